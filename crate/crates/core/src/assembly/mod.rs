//! Stiffness matrix of the integral fractional Laplacian for continuous
//! piecewise linear elements, and load vectors.
//!
//! With `K(x, y) = |x − y|^{−2−2s}` the entry `A_ij = (φ_i, φ_j)_s` is split as
//!
//! * touching pairs `T1 ∩ T2 ≠ ∅`: the full difference integrand, by the
//!   transformations in [`singular`];
//! * every triangle `T` against the exterior of its first ring `S¹_T`:
//!   `C ∫_T ψ_i ψ_j W_T(x) dx` with `W_T(x) = ∫_{ℝ² \ S¹_T} K(x, y) dy`, which
//!   also carries the contribution of the complement of the domain;
//! * non-touching pairs: the cross terms `−C ∫_T1 ∫_T2 ψ_i(x) ψ_j(y) K`,
//!   by the centroid rule in a dense pass and replaced by tensor Gauss
//!   rules for pairs closer than `far_ratio`.

pub mod exterior;
pub mod near;
pub mod singular;

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use thiserror::Error;

use crate::dense::SymMatrix;
use crate::geometry::{self, Point};
use crate::mesh::{StarIndex, TriangleMesh, NO_DOF};
use crate::quadrature::{gauss_legendre, QuadratureRules, TriangleRule};
use crate::special::gamma;

use exterior::CosPower;
use near::{cross_pair, NearScratch, RuleCache};
use singular::{touching_pair, Case};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("fractional order s = {0} outside (0, 1)")]
    InvalidOrder(f64),
    #[error("dimension {0} not supported")]
    InvalidDimension(usize),
    #[error("quadrature order must be positive")]
    InvalidRule,
    #[error("point is not strictly inside the domain")]
    NotInterior,
    #[error("mesh has no interior vertices")]
    NoDofs,
    #[error("non-finite matrix entry")]
    NonFinite,
}

fn check_order(s: f64) -> Result<(), AssemblyError> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(AssemblyError::InvalidOrder(s))
    }
}

fn check_rules(r: &QuadratureRules) -> Result<(), AssemblyError> {
    if r.q_sing == 0 || r.q_far == 0 || r.q_ang == 0 || r.q_load == 0 || !(r.far_ratio > 0.0) {
        return Err(AssemblyError::InvalidRule);
    }
    Ok(())
}

/// `C(n, s) = 2^{2s} s Γ(s + n/2) / (π^{n/2} Γ(1 − s))`.
pub fn normalization_constant(n: usize, s: f64) -> Result<f64, AssemblyError> {
    check_order(s)?;
    if n != 1 && n != 2 {
        return Err(AssemblyError::InvalidDimension(n));
    }
    let half = n as f64 / 2.0;
    Ok(libm::pow(2.0, 2.0 * s) * s * gamma(s + half) / (libm::pow(PI, half) * gamma(1.0 - s)))
}

/// `ω(x) = ∫_{ℝ² \ Ω} |x − y|^{−2−2s} dy` for a convex polygon `Ω` and `x`
/// strictly inside it.
pub fn complement_weight(
    x: Point,
    polygon: &[Point],
    s: f64,
    q_ang: usize,
) -> Result<f64, AssemblyError> {
    check_order(s)?;
    if q_ang == 0 {
        return Err(AssemblyError::InvalidRule);
    }
    let n = polygon.len();
    if n < 3 {
        return Err(AssemblyError::NotInterior);
    }
    let orientation = geometry::polygon_signed_area(polygon).signum();
    let mut segs = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        if !(orientation * geometry::orient(a, b, x) > 0.0) {
            return Err(AssemblyError::NotInterior);
        }
        segs.push(if orientation > 0.0 { [a, b] } else { [b, a] });
    }
    Ok(CosPower::new(s, q_ang).exterior_weight(x, &segs))
}

/// The assembled stiffness matrix and the data it was built with.
#[derive(Clone, Debug)]
pub struct FractionalSystem {
    pub matrix: SymMatrix,
    pub s: f64,
    pub constant: f64,
    pub rules: QuadratureRules,
}

impl FractionalSystem {
    pub fn ndof(&self) -> usize {
        self.matrix.dim()
    }
}

/// Triangle data with the vertices rotated to start at the lexicographically
/// smallest point, so that every rule below depends on geometry only and
/// not on the numbering.
struct TriInfo {
    verts: [usize; 3],
    pts: [Point; 3],
    area: f64,
    centroid: Point,
    radius: f64,
    dofs: [usize; 3],
}

impl TriInfo {
    fn has_dof(&self) -> bool {
        self.dofs.iter().any(|&d| d != NO_DOF)
    }

    fn min_dof(&self) -> usize {
        self.dofs.iter().copied().min().unwrap_or(NO_DOF)
    }

    fn max_dof(&self) -> Option<usize> {
        self.dofs.iter().copied().filter(|&d| d != NO_DOF).max()
    }
}

fn triangle_info(mesh: &TriangleMesh) -> Vec<TriInfo> {
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let raw = mesh.triangle_points(t);
            let k = (0..3).min_by(|&a, &b| lex(raw[a], raw[b])).unwrap_or(0);
            let verts = [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]];
            let pts = [raw[k], raw[(k + 1) % 3], raw[(k + 2) % 3]];
            let c = geometry::centroid(&pts);
            let radius = pts
                .iter()
                .map(|p| geometry::dist(*p, c))
                .fold(0.0, f64::max);
            TriInfo {
                verts,
                pts,
                area: geometry::triangle_area(&pts),
                centroid: c,
                radius,
                dofs: verts.map(|v| mesh.dof(v).unwrap_or(NO_DOF)),
            }
        })
        .collect()
}

fn lex(a: Point, b: Point) -> Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
}

/// Orders two triangles by size, radii equal up to rounding by position.
fn tri_cmp(a: &TriInfo, b: &TriInfo) -> Ordering {
    let by_size = if (a.radius - b.radius).abs() <= 1e-12 * a.radius.max(b.radius) {
        Ordering::Equal
    } else {
        a.radius.total_cmp(&b.radius)
    };
    by_size.then_with(|| {
        (0..3)
            .map(|k| lex(a.pts[k], b.pts[k]))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Assembles the stiffness matrix over the interior vertices of `mesh`.
pub fn assemble_stiffness(
    mesh: &TriangleMesh,
    star: &StarIndex,
    s: f64,
    rules: &QuadratureRules,
) -> Result<FractionalSystem, AssemblyError> {
    check_order(s)?;
    check_rules(rules)?;
    let n = mesh.ndof();
    if n == 0 {
        return Err(AssemblyError::NoDofs);
    }
    let c = normalization_constant(2, s)?;
    let info = triangle_info(mesh);
    let mut a = SymMatrix::zeros(n);
    far_pass(&mut a, &info, s, c);
    touching_and_local(&mut a, mesh, star, &info, s, c, rules);
    near_pairs(&mut a, &info, s, c, rules);
    if a.lower_row_major().any(|v| !v.is_finite()) {
        return Err(AssemblyError::NonFinite);
    }
    Ok(FractionalSystem {
        matrix: a,
        s,
        constant: c,
        rules: *rules,
    })
}

#[inline]
fn kernel(x: Point, y: Point, expo: f64) -> f64 {
    libm::exp(expo * libm::log(geometry::norm2(geometry::sub(x, y))))
}

/// Centroid-rule cross terms for every ordered pair of distinct triangles.
fn far_pass(a: &mut SymMatrix, info: &[TriInfo], s: f64, c: f64) {
    let n = a.dim();
    let expo = -1.0 - s;
    let mut list: Vec<usize> = (0..info.len()).filter(|&t| info[t].has_dof()).collect();
    list.sort_by_key(|&t| (info[t].min_dof(), t));
    let mindof: Vec<usize> = list.iter().map(|&t| info[t].min_dof()).collect();
    let cx: Vec<f64> = list.iter().map(|&t| info[t].centroid[0]).collect();
    let cy: Vec<f64> = list.iter().map(|&t| info[t].centroid[1]).collect();
    let bw: Vec<f64> = list.iter().map(|&t| info[t].area / 3.0).collect();
    let dofs: Vec<[usize; 3]> = list.iter().map(|&t| info[t].dofs).collect();
    let mut g = alloc::vec![0.0; n];
    let mut kbuf = alloc::vec![0.0; list.len()];
    for (pos, &t1) in list.iter().enumerate() {
        let ti = &info[t1];
        let m1 = ti.max_dof().expect("listed triangles carry a dof");
        let prefix = mindof.partition_point(|&d| d <= m1);
        let (x0, y0) = (ti.centroid[0], ti.centroid[1]);
        for k in 0..prefix {
            let dx = x0 - cx[k];
            let dy = y0 - cy[k];
            kbuf[k] = bw[k] * libm::exp(expo * libm::log(dx * dx + dy * dy));
        }
        kbuf[pos] = 0.0;
        for k in 0..prefix {
            let v = kbuf[k];
            for &j in &dofs[k] {
                if j <= m1 {
                    g[j] += v;
                }
            }
        }
        let alpha = -c * ti.area / 3.0;
        for &i in &ti.dofs {
            if i != NO_DOF {
                a.axpy_row(i, alpha, &g);
            }
        }
        g[..=m1].fill(0.0);
    }
}

/// Adds `scale * m[a][b]` for all unordered local pairs to the stored entries.
fn scatter<const N: usize>(a: &mut SymMatrix, dofs: &[usize; N], m: &[[f64; N]; N], scale: f64) {
    for p in 0..N {
        let i = dofs[p];
        if i == NO_DOF {
            continue;
        }
        for q in 0..=p {
            let j = dofs[q];
            if j != NO_DOF {
                a.add(i, j, scale * m[p][q]);
            }
        }
    }
}

/// Undoes the centroid-rule cross term of the dense pass for a pair.
fn undo_centroid(a: &mut SymMatrix, t1: &TriInfo, t2: &TriInfo, s: f64, c: f64) {
    let v = c * (t1.area / 3.0) * (t2.area / 3.0) * kernel(t1.centroid, t2.centroid, -1.0 - s);
    for &i in &t1.dofs {
        if i == NO_DOF {
            continue;
        }
        for &j in &t2.dofs {
            if j != NO_DOF {
                a.add_sym(i, j, v);
            }
        }
    }
}

/// Orders the vertices of a touching pair with the shared ones first and
/// returns the union positions of both triangles.
fn touching_layout(t1: &[usize; 3], t2: &[usize; 3]) -> ([usize; 3], [usize; 3], usize) {
    let shared: Vec<usize> = t1.iter().copied().filter(|v| t2.contains(v)).collect();
    let mut p = [0usize; 3];
    let mut q = [0usize; 3];
    let k = shared.len();
    p[..k].copy_from_slice(&shared);
    q[..k].copy_from_slice(&shared);
    let mut i = k;
    for &v in t1 {
        if !shared.contains(&v) {
            p[i] = v;
            i += 1;
        }
    }
    let mut j = k;
    for &v in t2 {
        if !shared.contains(&v) {
            q[j] = v;
            j += 1;
        }
    }
    (p, q, k)
}

#[allow(clippy::too_many_arguments)]
fn touching_and_local(
    a: &mut SymMatrix,
    mesh: &TriangleMesh,
    star: &StarIndex,
    info: &[TriInfo],
    s: f64,
    c: f64,
    rules: &QuadratureRules,
) {
    let g_sing = gauss_legendre(rules.q_sing);
    let cos_power = CosPower::new(s, rules.q_ang);
    let x_inner = TriangleRule::collapsed(rules.q_load);
    let x_ring = TriangleRule::collapsed(rules.q_load + 2);
    let x_vertex = TriangleRule::graded(
        rules.q_load,
        GRADED_LEVELS,
        GRADED_RATIO,
        1.0 - 2.0 * s,
        false,
    );
    let x_edge = TriangleRule::graded(
        rules.q_load,
        GRADED_LEVELS,
        GRADED_RATIO,
        2.0 - 2.0 * s,
        true,
    );
    let mut segs: Vec<[Point; 2]> = Vec::new();
    let mut edges: Vec<(usize, usize, bool)> = Vec::new();
    let tris = mesh.triangles();
    let verts = mesh.vertices();
    let dof = |v: usize| mesh.dof(v).unwrap_or(NO_DOF);
    for t in 0..tris.len() {
        let ti = &info[t];
        if !ti.has_dof() {
            continue;
        }
        // identical pair
        let m = touching_pair::<3>(
            Case::Identical,
            &ti.pts,
            &ti.pts,
            [0, 1, 2],
            [0, 1, 2],
            s,
            &g_sing,
        );
        scatter(a, &ti.dofs, &m, 0.5 * c);

        // touching pairs, each once
        for &t2 in star.ring1(t) {
            if t2 <= t || !info[t2].has_dof() {
                continue;
            }
            let (first, second) = if tri_cmp(ti, &info[t2]).is_le() {
                (ti, &info[t2])
            } else {
                (&info[t2], ti)
            };
            let (p, q, k) = touching_layout(&first.verts, &second.verts);
            let pp = p.map(|v| verts[v]);
            let qp = q.map(|v| verts[v]);
            match k {
                2 => {
                    let union = [dof(p[0]), dof(p[1]), dof(p[2]), dof(q[2])];
                    let m =
                        touching_pair::<4>(Case::Edge, &pp, &qp, [0, 1, 2], [0, 1, 3], s, &g_sing);
                    scatter(a, &union, &m, c);
                }
                1 => {
                    let union = [dof(p[0]), dof(p[1]), dof(p[2]), dof(q[1]), dof(q[2])];
                    let m = touching_pair::<5>(
                        Case::Vertex,
                        &pp,
                        &qp,
                        [0, 1, 2],
                        [0, 3, 4],
                        s,
                        &g_sing,
                    );
                    scatter(a, &union, &m, c);
                }
                _ => unreachable!("ring members share a vertex"),
            }
            undo_centroid(a, ti, &info[t2], s, c);
        }

        // exterior of the first ring; its boundary edges keep the
        // counter-clockwise orientation of their triangle
        edges.clear();
        for &t2 in star.ring1(t) {
            let tri = tris[t2];
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                edges.push((u.min(v), u.max(v), u < v));
            }
        }
        edges.sort_unstable();
        segs.clear();
        let mut i = 0;
        while i < edges.len() {
            let mut j = i + 1;
            while j < edges.len() && edges[j].0 == edges[i].0 && edges[j].1 == edges[i].1 {
                j += 1;
            }
            if j - i == 1 {
                let (u, v, fwd) = edges[i];
                let (u, v) = if fwd { (u, v) } else { (v, u) };
                segs.push([verts[u], verts[v]]);
            }
            i = j;
        }
        // ω blows up like δ^{−2s} at ∂Ω, so rules are graded toward it; along a
        // boundary edge only the apex is a dof and φ_apex² supplies δ²
        let on_bnd = ti.verts.map(|v| mesh.is_boundary(v));
        let (rule, apex) = match on_bnd.iter().filter(|&&b| b).count() {
            0 if star.is_boundary_element(t) => (&x_ring, 0),
            0 => (&x_inner, 0),
            1 => (&x_vertex, on_bnd.iter().position(|&b| b).unwrap_or(0)),
            _ => (&x_edge, on_bnd.iter().position(|&b| !b).unwrap_or(0)),
        };
        let mut loc = [[0.0; 3]; 3];
        for (b, &w) in rule.bary.iter().zip(&rule.weights) {
            let mut l = [0.0; 3];
            for k in 0..3 {
                l[(apex + k) % 3] = b[k];
            }
            let x = geometry::from_barycentric(&ti.pts, l);
            let wv = w * 2.0 * ti.area * cos_power.exterior_weight(x, &segs);
            for p in 0..3 {
                for q in 0..=p {
                    loc[p][q] += wv * l[p] * l[q];
                }
            }
        }
        scatter(a, &ti.dofs, &loc, c);
    }
}

const GRADED_LEVELS: usize = 3;
const GRADED_RATIO: f64 = 0.2;

/// Accurate cross terms for non-touching pairs closer than `far_ratio`.
fn near_pairs(a: &mut SymMatrix, info: &[TriInfo], s: f64, c: f64, rules: &QuadratureRules) {
    let expo = -1.0 - s;
    let active: Vec<usize> = (0..info.len()).filter(|&t| info[t].has_dof()).collect();
    if active.is_empty() {
        return;
    }
    let grid = Grid::new(info, &active);
    let cache = RuleCache::new(4 * rules.q_far);
    let mut scratch = NearScratch::default();
    let mut cand = Vec::new();
    let ratio = rules.far_ratio;
    for &t1 in &active {
        let ti = &info[t1];
        let reach = (2.0 + ratio) * ti.radius;
        grid.query(ti.centroid, reach, &mut cand);
        for &t2 in &cand {
            let tj = &info[t2];
            if t2 == t1 || tri_cmp(tj, ti).is_ge() {
                continue;
            }
            let sep = geometry::dist(ti.centroid, tj.centroid) - ti.radius - tj.radius;
            if sep >= ratio * ti.radius * (1.0 - 1e-9) {
                continue;
            }
            if ti.pts.iter().any(|p| tj.pts.contains(p)) {
                continue;
            }
            let mut x = [[0.0; 3]; 3];
            cross_pair(
                &ti.pts,
                &tj.pts,
                s,
                rules.q_far,
                &cache,
                &mut scratch,
                &mut x,
            );
            let cen = (ti.area / 3.0) * (tj.area / 3.0) * kernel(ti.centroid, tj.centroid, expo);
            for p in 0..3 {
                let i = ti.dofs[p];
                if i == NO_DOF {
                    continue;
                }
                for q in 0..3 {
                    let j = tj.dofs[q];
                    if j != NO_DOF {
                        a.add_sym(i, j, c * (cen - x[p][q]));
                    }
                }
            }
        }
    }
}

/// Uniform bucket grid over triangle centroids.
struct Grid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl Grid {
    fn new(info: &[TriInfo], active: &[usize]) -> Grid {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for &t in active {
            for k in 0..2 {
                lo[k] = lo[k].min(info[t].centroid[k]);
                hi[k] = hi[k].max(info[t].centroid[k]);
            }
        }
        let w = (hi[0] - lo[0]).max(1e-12);
        let h = (hi[1] - lo[1]).max(1e-12);
        let cell = libm::sqrt(w * h / active.len() as f64).max(1e-12) * 2.0;
        let nx = ((w / cell) as usize + 1).min(2048);
        let ny = ((h / cell) as usize + 1).min(2048);
        let cell = (w / nx as f64).max(h / ny as f64) * (1.0 + 1e-12);
        let idx = |p: Point| -> usize {
            let i = (((p[0] - lo[0]) / cell) as usize).min(nx - 1);
            let j = (((p[1] - lo[1]) / cell) as usize).min(ny - 1);
            j * nx + i
        };
        let mut count = alloc::vec![0usize; nx * ny + 1];
        for &t in active {
            count[idx(info[t].centroid) + 1] += 1;
        }
        for k in 1..count.len() {
            count[k] += count[k - 1];
        }
        let start = count.clone();
        let mut items = alloc::vec![0; active.len()];
        for &t in active {
            let c = idx(info[t].centroid);
            items[count[c]] = t;
            count[c] += 1;
        }
        Grid {
            origin: lo,
            cell,
            nx,
            ny,
            start,
            items,
        }
    }

    fn query(&self, x: Point, r: f64, out: &mut Vec<usize>) {
        out.clear();
        let f = |v: f64, o: f64, n: usize| -> usize {
            let q = libm::floor((v - o) / self.cell);
            if q < 0.0 {
                0
            } else {
                (q as usize).min(n - 1)
            }
        };
        let i0 = f(x[0] - r, self.origin[0], self.nx);
        let i1 = f(x[0] + r, self.origin[0], self.nx);
        let j0 = f(x[1] - r, self.origin[1], self.ny);
        let j1 = f(x[1] + r, self.origin[1], self.ny);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let c = j * self.nx + i;
                out.extend_from_slice(&self.items[self.start[c]..self.start[c + 1]]);
            }
        }
    }
}

/// Load vector `F_i = ∫ f φ_i` over interior vertices, collapsed Gauss rule
/// with `q_load` points per direction.
pub fn assemble_load<F: Fn(Point) -> f64>(
    mesh: &TriangleMesh,
    f: F,
    q_load: usize,
) -> Result<Vec<f64>, AssemblyError> {
    if q_load == 0 {
        return Err(AssemblyError::InvalidRule);
    }
    let rule = TriangleRule::collapsed(q_load);
    let mut out = alloc::vec![0.0; mesh.ndof()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let dofs = tri.map(|v| mesh.dof(v));
        if dofs.iter().all(|d| d.is_none()) {
            continue;
        }
        let pts = mesh.triangle_points(t);
        let area2 = 2.0 * geometry::triangle_area(&pts);
        for (l, &w) in rule.bary.iter().zip(&rule.weights) {
            let v = w * area2 * f(geometry::from_barycentric(&pts, *l));
            for k in 0..3 {
                if let Some(d) = dofs[k] {
                    out[d] += v * l[k];
                }
            }
        }
    }
    Ok(out)
}

/// `∬_{Ta×Tb} (ψ_a(x) − ψ_a(y)) (ψ_b(x) − ψ_b(y)) |x − y|^{−2−2s} dy dx` for
/// the hat functions of the vertices `va` and `vb` restricted to `Ta ∪ Tb`.
/// Triangles sharing vertices must use bitwise equal coordinates for them.
pub fn pair_integral(
    ta: &[Point; 3],
    tb: &[Point; 3],
    va: Point,
    vb: Point,
    s: f64,
    rules: &QuadratureRules,
) -> Result<f64, AssemblyError> {
    check_order(s)?;
    check_rules(rules)?;
    // canonical rotation and order, so that swapping the arguments repeats
    // the same computation
    let rot = |t: &[Point; 3]| {
        let k = (0..3).min_by(|&a, &b| lex(t[a], t[b])).unwrap_or(0);
        [t[k], t[(k + 1) % 3], t[(k + 2) % 3]]
    };
    let (ta, tb) = (rot(ta), rot(tb));
    let before = (0..3)
        .map(|k| lex(ta[k], tb[k]))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal);
    let (ta, tb) = if before.is_le() {
        (&ta, &tb)
    } else {
        (&tb, &ta)
    };
    let hat = |t: &[Point; 3], v: Point| -> [f64; 3] { t.map(|p| if p == v { 1.0 } else { 0.0 }) };
    let g = gauss_legendre(rules.q_sing);
    let shared: Vec<Point> = ta.iter().copied().filter(|p| tb.contains(p)).collect();
    // nodal values of ψ_a, ψ_b on both triangles, in union order
    let (ha, hb) = (hat(ta, va), hat(tb, va));
    let (ka, kb) = (hat(ta, vb), hat(tb, vb));
    if ta == tb || shared.len() == 3 {
        let m = touching_pair::<3>(Case::Identical, ta, ta, [0, 1, 2], [0, 1, 2], s, &g);
        return Ok(quad_form(&m, &ha, &ka));
    }
    if !shared.is_empty() {
        let k = shared.len();
        let mut p = [[0.0; 2]; 3];
        let mut q = [[0.0; 2]; 3];
        p[..k].copy_from_slice(&shared);
        q[..k].copy_from_slice(&shared);
        let rest_a: Vec<Point> = ta.iter().copied().filter(|x| !shared.contains(x)).collect();
        let rest_b: Vec<Point> = tb.iter().copied().filter(|x| !shared.contains(x)).collect();
        p[k..].copy_from_slice(&rest_a);
        q[k..].copy_from_slice(&rest_b);
        let union: Vec<Point> = p.iter().chain(q[k..].iter()).copied().collect();
        let nod = |v: Point| -> Vec<f64> {
            union
                .iter()
                .map(|&u| if u == v { 1.0 } else { 0.0 })
                .collect()
        };
        let (na, nb) = (nod(va), nod(vb));
        let form = |m: &[f64], n: usize| -> f64 {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += na[i] * m[i * n + j] * nb[j];
                }
            }
            acc
        };
        return Ok(if k == 2 {
            let m = touching_pair::<4>(Case::Edge, &p, &q, [0, 1, 2], [0, 1, 3], s, &g);
            form(&m.concat(), 4)
        } else {
            let m = touching_pair::<5>(Case::Vertex, &p, &q, [0, 1, 2], [0, 3, 4], s, &g);
            form(&m.concat(), 5)
        });
    }
    // disjoint: ψa(x)ψb(x) + ψa(y)ψb(y) − ψa(x)ψb(y) − ψa(y)ψb(x)
    let cache = RuleCache::new(4 * rules.q_far + 3);
    let mut scratch = NearScratch::default();
    let mut mo = near::Moments::default();
    near::pair_moments(ta, tb, s, rules.q_far, &cache, &mut scratch, &mut mo);
    Ok(quad_form(&mo.xx, &ha, &ka) + quad_form(&mo.yy, &hb, &kb)
        - quad_form(&mo.xy, &ha, &kb)
        - quad_form(&mo.xy, &ka, &hb))
}

fn quad_form(m: &[[f64; 3]; 3], u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += u[i] * m[i][j] * v[j];
        }
    }
    acc
}
