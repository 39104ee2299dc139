use alloc::vec::Vec;

use super::TriangleMesh;
use crate::geometry::{self, Point};

/// Bucket grid over triangle bounding boxes for point location.
pub struct PointLocator<'m> {
    mesh: &'m TriangleMesh,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl<'m> PointLocator<'m> {
    pub fn new(mesh: &'m TriangleMesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in mesh.vertices() {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let nt = mesh.num_triangles().max(1);
        let w = (hi[0] - lo[0]).max(1e-300);
        let h = (hi[1] - lo[1]).max(1e-300);
        let cell = libm::sqrt(w * h / nt as f64).max(1e-300);
        let nx = ((w / cell) as usize + 1).min(4096);
        let ny = ((h / cell) as usize + 1).min(4096);
        let cell = (w / nx as f64).max(h / ny as f64);
        let range = |t: usize| {
            let p = mesh.triangle_points(t);
            let mut a = [f64::INFINITY; 2];
            let mut b = [f64::NEG_INFINITY; 2];
            for q in &p {
                for k in 0..2 {
                    a[k] = a[k].min(q[k]);
                    b[k] = b[k].max(q[k]);
                }
            }
            let i0 = (((a[0] - lo[0]) / cell) as usize).min(nx - 1);
            let i1 = (((b[0] - lo[0]) / cell) as usize).min(nx - 1);
            let j0 = (((a[1] - lo[1]) / cell) as usize).min(ny - 1);
            let j1 = (((b[1] - lo[1]) / cell) as usize).min(ny - 1);
            (i0, i1, j0, j1)
        };
        let mut count = alloc::vec![0usize; nx * ny + 1];
        for t in 0..mesh.num_triangles() {
            let (i0, i1, j0, j1) = range(t);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    count[j * nx + i + 1] += 1;
                }
            }
        }
        for c in 1..count.len() {
            count[c] += count[c - 1];
        }
        let start = count.clone();
        let mut items = alloc::vec![0usize; count[nx * ny]];
        for t in 0..mesh.num_triangles() {
            let (i0, i1, j0, j1) = range(t);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let c = j * nx + i;
                    items[count[c]] = t;
                    count[c] += 1;
                }
            }
        }
        PointLocator {
            mesh,
            origin: lo,
            cell,
            nx,
            ny,
            start,
            items,
        }
    }

    /// Triangle containing `x` and the barycentric coordinates of `x` in it.
    /// Points within a relative tolerance of an edge are accepted.
    pub fn locate(&self, x: Point) -> Option<(usize, [f64; 3])> {
        let fx = (x[0] - self.origin[0]) / self.cell;
        let fy = (x[1] - self.origin[1]) / self.cell;
        if !(fx > -1e-9 && fy > -1e-9) {
            return None;
        }
        let i = fx as usize;
        let j = fy as usize;
        if i > self.nx || j > self.ny {
            return None;
        }
        let i = i.min(self.nx - 1);
        let j = j.min(self.ny - 1);
        let c = j * self.nx + i;
        let mut best: Option<(usize, [f64; 3])> = None;
        let mut best_min = f64::NEG_INFINITY;
        for &t in &self.items[self.start[c]..self.start[c + 1]] {
            let l = geometry::barycentric(&self.mesh.triangle_points(t), x);
            let m = l[0].min(l[1]).min(l[2]);
            if m > best_min {
                best_min = m;
                best = Some((t, l));
            }
        }
        if best_min >= -1e-10 {
            best
        } else {
            None
        }
    }
}
