//! Longest-edge bisection with longest-edge-propagation-path closure.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Domain, MeshError};
use crate::geometry::{self, Point};

const NONE: usize = usize::MAX;

type Edge = (usize, usize);

#[inline]
fn key(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(super) struct Refiner<'a> {
    pts: Vec<Point>,
    tris: Vec<[usize; 3]>,
    edges: BTreeMap<Edge, [usize; 2]>,
    domain: &'a Domain,
}

impl<'a> Refiner<'a> {
    pub fn new(pts: Vec<Point>, tris: Vec<[usize; 3]>, domain: &'a Domain) -> Self {
        let mut edges: BTreeMap<Edge, [usize; 2]> = BTreeMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                let e = key(tri[k], tri[(k + 1) % 3]);
                let slot = edges.entry(e).or_insert([NONE, NONE]);
                if slot[0] == NONE {
                    slot[0] = t;
                } else {
                    slot[1] = t;
                }
            }
        }
        Refiner {
            pts,
            tris,
            edges,
            domain,
        }
    }

    pub fn finish(self) -> (Vec<Point>, Vec<[usize; 3]>) {
        (self.pts, self.tris)
    }

    /// Ordering key of the edge `(a, b)`: squared length, then vertex ids.
    fn edge_rank(&self, a: usize, b: usize) -> (f64, usize, usize) {
        let (p, q) = key(a, b);
        (
            geometry::norm2(geometry::sub(self.pts[p], self.pts[q])),
            p,
            q,
        )
    }

    fn longest_edge(&self, t: usize) -> Edge {
        let tri = self.tris[t];
        let mut best = key(tri[0], tri[1]);
        let mut rank = self.edge_rank(tri[0], tri[1]);
        for k in 1..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let r = self.edge_rank(a, b);
            if r.0 > rank.0 || (r.0 == rank.0 && (r.1, r.2) > (rank.1, rank.2)) {
                rank = r;
                best = key(a, b);
            }
        }
        best
    }

    fn diameter(&self, t: usize) -> f64 {
        let (a, b) = self.longest_edge(t);
        geometry::dist(self.pts[a], self.pts[b])
    }

    fn neighbour(&self, t: usize, e: Edge) -> Option<usize> {
        let s = self.edges[&e];
        let o = if s[0] == t { s[1] } else { s[0] };
        (o != NONE).then_some(o)
    }

    /// Refines triangles until `h_T <= size(barycenter)` everywhere.
    pub fn grade<F: Fn(Point) -> f64>(&mut self, size: F, cap: usize) -> Result<(), MeshError> {
        loop {
            let mut changed = false;
            let mut t = 0;
            while t < self.tris.len() {
                while self.diameter(t) > size(self.centroid(t)) {
                    self.refine(t);
                    changed = true;
                    if self.tris.len() > cap {
                        return Err(MeshError::TooLarge(cap));
                    }
                }
                t += 1;
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.tris[t];
        geometry::centroid(&[self.pts[a], self.pts[b], self.pts[c]])
    }

    /// Bisects `t` after bisecting along its longest-edge propagation path.
    fn refine(&mut self, t0: usize) {
        let mut path = alloc::vec![t0];
        while let Some(&t) = path.last() {
            let e = self.longest_edge(t);
            match self.neighbour(t, e) {
                Some(n) if self.longest_edge(n) != e => path.push(n),
                _ => {
                    self.bisect(e);
                    path.pop();
                }
            }
        }
    }

    fn bisect(&mut self, e: Edge) {
        let owners = self.edges.remove(&e).expect("edge exists");
        let on_boundary = owners[1] == NONE;
        let mut m = geometry::midpoint(self.pts[e.0], self.pts[e.1]);
        if on_boundary {
            m = self.domain.project_boundary(m);
        }
        let mid = self.pts.len();
        self.pts.push(m);
        for &t in owners.iter().filter(|&&t| t != NONE) {
            let tri = self.tris[t];
            // rotate so that (p, q) is the bisected edge in triangle order
            let k = (0..3)
                .find(|&k| key(tri[k], tri[(k + 1) % 3]) == e)
                .expect("edge in triangle");
            let (p, q, r) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let t2 = self.tris.len();
            self.tris[t] = [p, mid, r];
            self.tris.push([mid, q, r]);
            self.attach(key(p, mid), t);
            self.attach(key(mid, q), t2);
            self.attach(key(mid, r), t);
            self.attach(key(mid, r), t2);
            let s = self.edges.get_mut(&key(q, r)).expect("edge exists");
            for slot in s.iter_mut() {
                if *slot == t {
                    *slot = t2;
                }
            }
        }
    }

    fn attach(&mut self, e: Edge, t: usize) {
        let slot = self.edges.entry(e).or_insert([NONE, NONE]);
        if slot[0] == NONE {
            slot[0] = t;
        } else {
            slot[1] = t;
        }
    }
}
