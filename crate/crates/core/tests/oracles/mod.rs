//! Independent reference computations used by the test suites.
//!
//! Nothing here calls into the library: the stiffness oracle evaluates the
//! bilinear form through the autocorrelation of the basis functions,
//! `(φ_i, φ_j)_s = C/2 ∫ |z|^{−2−2s} H_ij(z) dz` with
//! `H_ij(z) = ∫ (φ_i(x) − φ_i(x − z)) (φ_j(x) − φ_j(x − z)) dx`,
//! where `H` is computed exactly by clipping the mesh against its translate
//! and the `z` integral by nested adaptive Gauss–Kronrod in polar form.

#![allow(dead_code)]

pub mod kkt;

use std::f64::consts::PI;

pub type Pt = [f64; 2];

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Adaptive G7-K15 for vector integrands; `f(x, out)` overwrites `out`.
/// The error is measured in the max norm against an absolute tolerance.
pub fn adapt_vec<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, tol: f64, acc: &mut [f64]) {
    adapt_rec(f, a, b, tol, 0, acc);
}

fn adapt_rec<F: FnMut(f64, &mut [f64])>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
    acc: &mut [f64],
) {
    let n = acc.len();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut v = vec![0.0; n];
    for i in 0..8 {
        let pts: &[f64] = if i == 7 { &[0.0] } else { &[-1.0, 1.0] };
        for &sgn in pts {
            f(c + sgn * h * XGK[i], &mut v);
            for m in 0..n {
                k[m] += WGK[i] * v[m];
                if i % 2 == 1 {
                    g[m] += WG[i / 2] * v[m];
                }
            }
        }
    }
    let err = (0..n).map(|m| (k[m] - g[m]).abs()).fold(0.0, f64::max) * h;
    if err <= tol || depth >= 40 {
        for m in 0..n {
            acc[m] += h * k[m];
        }
        return;
    }
    let t = tol / std::f64::consts::SQRT_2;
    adapt_rec(f, a, c, t, depth + 1, acc);
    adapt_rec(f, c, b, t, depth + 1, acc);
}

pub fn adapt<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    let mut acc = [0.0];
    adapt_vec(
        &mut |x: f64, out: &mut [f64]| out[0] = f(x),
        a,
        b,
        tol,
        &mut acc,
    );
    acc[0]
}

/// Lanczos approximation (g = 7, 9 terms).
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

pub fn constant(n: usize, s: f64) -> f64 {
    let h = n as f64 / 2.0;
    4f64.powf(s) * s * gamma(s + h) / (PI.powf(h) * gamma(1.0 - s))
}

fn cross(a: Pt, b: Pt) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: Pt, b: Pt) -> Pt {
    [a[0] - b[0], a[1] - b[1]]
}

/// Keeps the part of `poly` to the left of the directed line `p → q`.
fn clip(poly: &[Pt], p: Pt, q: Pt, out: &mut Vec<Pt>) {
    out.clear();
    let d = sub(q, p);
    let side = |x: Pt| cross(d, sub(x, p));
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (sa, sb) = (side(a), side(b));
        if sa >= 0.0 {
            out.push(a);
        }
        if (sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
}

fn bbox_overlap(a: &[Pt], b: &[Pt]) -> bool {
    (0..2).all(|k| {
        let lo_a = a.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi_a = a.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        let lo_b = b.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi_b = b.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        lo_a < hi_b && lo_b < hi_a
    })
}

/// Affine function `g·x + c`.
#[derive(Clone, Copy, Default)]
struct Affine {
    g: Pt,
    c: f64,
}

impl Affine {
    fn at(&self, x: Pt) -> f64 {
        self.g[0] * x[0] + self.g[1] * x[1] + self.c
    }
}

/// `∫_poly f_a f_b` for all pairs of the given affine functions, exact
/// (edge-midpoint rule on a fan).
fn poly_products(poly: &[Pt], f: &[(usize, Affine)], out: &mut [f64], n: usize) {
    if poly.len() < 3 {
        return;
    }
    let o = poly[0];
    for k in 1..poly.len() - 1 {
        let (a, b) = (poly[k], poly[k + 1]);
        let area = 0.5 * cross(sub(a, o), sub(b, o));
        if area <= 0.0 {
            continue;
        }
        let mids = [
            [0.5 * (o[0] + a[0]), 0.5 * (o[1] + a[1])],
            [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
            [0.5 * (b[0] + o[0]), 0.5 * (b[1] + o[1])],
        ];
        for m in mids {
            let w = area / 3.0;
            for &(i, fi) in f {
                let vi = w * fi.at(m);
                for &(j, fj) in f {
                    out[i * n + j] += vi * fj.at(m);
                }
            }
        }
    }
}

/// Brute-force stiffness matrix of a conforming mesh of a convex polygon.
pub struct StiffnessOracle {
    verts: Vec<Pt>,
    tris: Vec<[usize; 3]>,
    /// dof index of each vertex
    dof: Vec<Option<usize>>,
    ndof: usize,
    /// barycentric coordinates of each triangle as affine functions
    bary: Vec<[Affine; 3]>,
    boundary: Vec<Pt>,
    diameter: f64,
}

impl StiffnessOracle {
    /// `tris` counterclockwise, `boundary` the counterclockwise hull of the
    /// mesh, `dof_vertex[d]` the vertex of dof `d`.
    pub fn new(
        verts: Vec<Pt>,
        tris: Vec<[usize; 3]>,
        boundary: Vec<Pt>,
        dof_vertex: &[usize],
    ) -> Self {
        let mut dof = vec![None; verts.len()];
        for (d, &v) in dof_vertex.iter().enumerate() {
            dof[v] = Some(d);
        }
        let bary = tris
            .iter()
            .map(|t| {
                let p = t.map(|v| verts[v]);
                let det = cross(sub(p[1], p[0]), sub(p[2], p[0]));
                assert!(det > 0.0, "triangles must be counterclockwise");
                let mut out = [Affine::default(); 3];
                for k in 0..3 {
                    let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
                    // λ_k(x) = cross(b − a, x − a) / det
                    let e = sub(b, a);
                    let g = [-e[1] / det, e[0] / det];
                    out[k] = Affine {
                        g,
                        c: -(g[0] * a[0] + g[1] * a[1]),
                    };
                }
                out
            })
            .collect();
        let mut diameter: f64 = 0.0;
        for a in &verts {
            for b in &verts {
                diameter = diameter.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        StiffnessOracle {
            verts,
            tris,
            dof,
            ndof: dof_vertex.len(),
            bary,
            boundary,
            diameter,
        }
    }

    fn has_dof(&self, t: usize) -> bool {
        self.tris[t].iter().any(|&v| self.dof[v].is_some())
    }

    /// Hat functions of triangle `t` shifted by `z`: `x ↦ φ(x − z)`.
    fn hats(&self, t: usize, z: Pt, sign: f64, out: &mut Vec<(usize, Affine)>) {
        for k in 0..3 {
            if let Some(d) = self.dof[self.tris[t][k]] {
                let f = self.bary[t][k];
                let c = f.c - f.g[0] * z[0] - f.g[1] * z[1];
                out.push((
                    d,
                    Affine {
                        g: [sign * f.g[0], sign * f.g[1]],
                        c: sign * c,
                    },
                ));
            }
        }
    }

    fn shifted(&self, t: usize, z: Pt) -> Vec<Pt> {
        self.tris[t]
            .iter()
            .map(|&v| [self.verts[v][0] + z[0], self.verts[v][1] + z[1]])
            .collect()
    }

    /// `H(z)` as a row-major `ndof × ndof` matrix.
    pub fn h(&self, z: Pt, out: &mut [f64]) {
        out.fill(0.0);
        let n = self.ndof;
        let nt = self.tris.len();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut f: Vec<(usize, Affine)> = Vec::new();
        for t1 in 0..nt {
            let p1: Vec<Pt> = self.tris[t1].iter().map(|&v| self.verts[v]).collect();
            for t2 in 0..nt {
                if !self.has_dof(t1) && !self.has_dof(t2) {
                    continue;
                }
                let q = self.shifted(t2, z);
                if !bbox_overlap(&p1, &q) {
                    continue;
                }
                clip(&p1, q[0], q[1], &mut a);
                clip(&a, q[1], q[2], &mut b);
                clip(&b, q[2], q[0], &mut a);
                if a.len() < 3 {
                    continue;
                }
                f.clear();
                self.hats(t1, [0.0, 0.0], 1.0, &mut f);
                let mut g = Vec::new();
                self.hats(t2, z, -1.0, &mut g);
                // merge equal dofs into a single difference function
                for (d, h) in g {
                    if let Some(e) = f.iter_mut().find(|e| e.0 == d) {
                        e.1.g[0] += h.g[0];
                        e.1.g[1] += h.g[1];
                        e.1.c += h.c;
                    } else {
                        f.push((d, h));
                    }
                }
                poly_products(&a, &f, out, n);
            }
        }
        // parts where only one of x, x − z lies in the mesh
        let shifted_hull: Vec<Pt> = self
            .boundary
            .iter()
            .map(|p| [p[0] + z[0], p[1] + z[1]])
            .collect();
        let zero = [0.0, 0.0];
        for (hull, shift) in [(&shifted_hull, zero), (&self.boundary, z)] {
            let m = hull.len();
            for t in 0..nt {
                if !self.has_dof(t) {
                    continue;
                }
                let tri: Vec<Pt> = if shift == zero {
                    self.tris[t].iter().map(|&v| self.verts[v]).collect()
                } else {
                    self.shifted(t, shift)
                };
                f.clear();
                self.hats(t, shift, 1.0, &mut f);
                let mut inside = tri.clone();
                for k in 0..m {
                    let (p, q) = (hull[k], hull[(k + 1) % m]);
                    clip(&inside, q, p, &mut a);
                    poly_products(&a, &f, out, n);
                    clip(&inside, p, q, &mut b);
                    std::mem::swap(&mut inside, &mut b);
                    if inside.len() < 3 {
                        break;
                    }
                }
            }
        }
    }

    pub fn mass(&self) -> Vec<f64> {
        let n = self.ndof;
        let mut m = vec![0.0; n * n];
        let mut f = Vec::new();
        for t in 0..self.tris.len() {
            f.clear();
            self.hats(t, [0.0, 0.0], 1.0, &mut f);
            let p: Vec<Pt> = self.tris[t].iter().map(|&v| self.verts[v]).collect();
            poly_products(&p, &f, &mut m, n);
        }
        m
    }

    /// Values of `ρ` in `(0, D)` where a vertex of the mesh translated by
    /// `ρe` crosses an edge of the mesh or vice versa. Between them `H(ρe)`
    /// is a polynomial in `ρ`.
    fn events(&self, e: Pt, out: &mut Vec<f64>) {
        out.clear();
        let d = self.diameter;
        for t in &self.tris {
            for k in 0..3 {
                let (a, b) = (self.verts[t[k]], self.verts[t[(k + 1) % 3]]);
                let ab = sub(b, a);
                let den = cross(ab, e);
                if den.abs() < 1e-14 {
                    continue;
                }
                for v in &self.verts {
                    for sgn in [1.0, -1.0] {
                        // cross(ab, v + sgn ρ e − a) = 0
                        let rho = -cross(ab, sub(*v, a)) / (sgn * den);
                        if !(rho > 1e-12 * d && rho < d) {
                            continue;
                        }
                        let p = [v[0] + sgn * rho * e[0], v[1] + sgn * rho * e[1]];
                        let u = ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1])
                            / (ab[0] * ab[0] + ab[1] * ab[1]);
                        if (-1e-12..=1.0 + 1e-12).contains(&u) {
                            out.push(rho);
                        }
                    }
                }
            }
        }
        out.push(d);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * d);
    }

    /// `∫_0^D ρ^{−1−2s} H(ρe) dρ`.
    fn radial(&self, e: Pt, s: f64, buf: &mut Radial) {
        let n = self.ndof * self.ndof;
        let Radial {
            events,
            h,
            out,
            cheb,
            cheb_w,
            gl,
        } = buf;
        out.fill(0.0);
        self.events(e, events);
        // first piece: H = ρ² Q(ρ) with Q a polynomial, integrated against ρ^{1−2s}
        let r1 = events[0];
        for (k, &t) in cheb.iter().enumerate() {
            let rho = r1 * t;
            self.h([rho * e[0], rho * e[1]], h);
            let w = cheb_w[k] * r1.powf(2.0 - 2.0 * s) / (rho * rho);
            for m in 0..n {
                out[m] += w * h[m];
            }
        }
        // remaining pieces: smooth, split geometrically and use Gauss
        let mut a = r1;
        for &b in events[1..].iter() {
            let parts = ((b / a).log2().ceil() as usize).max(1);
            let q = (b / a).powf(1.0 / parts as f64);
            let mut lo = a;
            for _ in 0..parts {
                let hi = (lo * q).min(b);
                for &(x, w) in gl.iter() {
                    let rho = lo + (hi - lo) * x;
                    self.h([rho * e[0], rho * e[1]], h);
                    let c = w * (hi - lo) * rho.powf(-1.0 - 2.0 * s);
                    for m in 0..n {
                        out[m] += c * h[m];
                    }
                }
                lo = hi;
            }
            a = b;
        }
    }

    /// Stiffness matrix, row-major, to relative accuracy about `rel`.
    pub fn matrix(&self, s: f64, rel: f64) -> Vec<f64> {
        let n = self.ndof;
        let d = self.diameter;
        let p = 2.0 - 2.0 * s;
        // scale of the radial integral: H ≈ ρ² ∫ |∇φ·e|²
        let mut grad = 0.0f64;
        for t in 0..self.tris.len() {
            let p3: Vec<Pt> = self.tris[t].iter().map(|&v| self.verts[v]).collect();
            let area = 0.5 * cross(sub(p3[1], p3[0]), sub(p3[2], p3[0]));
            for k in 0..3 {
                let g = self.bary[t][k].g;
                grad = grad.max(area * (g[0] * g[0] + g[1] * g[1]));
            }
        }
        let scale = grad * d.powf(p) / p;
        let mut angles = vec![0.0, PI];
        for a in &self.verts {
            for b in &self.verts {
                if a != b {
                    angles.push((b[1] - a[1]).atan2(b[0] - a[0]).rem_euclid(PI));
                }
            }
        }
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
        let mut buf = Radial::new(n, s);
        let mut total = vec![0.0; n * n];
        let mut outer = |th: f64, out: &mut [f64]| {
            self.radial([th.cos(), th.sin()], s, &mut buf);
            out.copy_from_slice(&buf.out);
        };
        for w in angles.windows(2) {
            if w[1] - w[0] > 1e-13 {
                adapt_vec(&mut outer, w[0], w[1], rel * scale, &mut total);
            }
        }
        let m = self.mass();
        let cst = constant(2, s);
        let tail = 2.0 * PI * d.powf(-2.0 * s) / (2.0 * s);
        // θ covers half the circle, H(z) = H(−z)
        (0..n * n)
            .map(|k| 0.5 * cst * (2.0 * total[k] + 2.0 * m[k] * tail))
            .collect()
    }
}

struct Radial {
    events: Vec<f64>,
    h: Vec<f64>,
    out: Vec<f64>,
    cheb: Vec<f64>,
    cheb_w: Vec<f64>,
    gl: Vec<(f64, f64)>,
}

impl Radial {
    fn new(n: usize, s: f64) -> Radial {
        // interpolatory weights for ∫_0^1 t^{1−2s} Q(t) dt at Chebyshev points
        let m = 9;
        let cheb: Vec<f64> = (0..m)
            .map(|k| 0.5 - 0.5 * ((2 * k + 1) as f64 * PI / (2 * m) as f64).cos())
            .collect();
        // solve Vᵀ w = moments, V_kj = t_k^j
        let mut a: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                let mut row: Vec<f64> = cheb.iter().map(|t| t.powi(j as i32)).collect();
                row.push(1.0 / (2.0 - 2.0 * s + j as f64));
                row
            })
            .collect();
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
                .unwrap();
            a.swap(c, piv);
            for r in 0..m {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=m {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        let cheb_w = (0..m).map(|k| a[k][m] / a[k][k]).collect();
        Radial {
            events: Vec::new(),
            h: vec![0.0; n * n],
            out: vec![0.0; n * n],
            cheb,
            cheb_w,
            gl: gauss_legendre(10),
        }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]` by Newton's method.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (1.0 - x), 0.5 * w)
        })
        .collect()
}

/// `∬_{T×T} (λ_a(x) − λ_a(y)) (λ_b(x) − λ_b(y)) |x − y|^{−2−2s}` in polar
/// form: with `c(θ) = Σ_k max(0, ∇λ_k·e)` the area of `T ∩ (T + ρe)` is
/// `|T| (1 − ρ c)²₊`, so the radial integral is a Beta function.
pub fn identical_pair(p: [Pt; 3], s: f64) -> [[f64; 3]; 3] {
    let det = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    let area = 0.5 * det.abs();
    let grads: Vec<Pt> = (0..3)
        .map(|k| {
            let e = sub(p[(k + 2) % 3], p[(k + 1) % 3]);
            [-e[1] / det, e[0] / det]
        })
        .collect();
    let mut cuts = vec![0.0, 2.0 * PI];
    for g in &grads {
        let t = g[1].atan2(g[0]);
        for d in [t + 0.5 * PI, t - 0.5 * PI] {
            cuts.push(d.rem_euclid(2.0 * PI));
        }
    }
    cuts.sort_by(f64::total_cmp);
    let beta = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s) * (4.0 - 2.0 * s));
    let mut out = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let mut v = 0.0;
            for w in cuts.windows(2) {
                if w[1] - w[0] < 1e-14 {
                    continue;
                }
                v += adapt(
                    |th| {
                        let e = [th.cos(), th.sin()];
                        let d = |g: &Pt| g[0] * e[0] + g[1] * e[1];
                        let c: f64 = grads.iter().map(|g| d(g).max(0.0)).sum();
                        d(&grads[a]) * d(&grads[b]) * c.powf(2.0 * s - 2.0)
                    },
                    w[0],
                    w[1],
                    1e-14,
                );
            }
            out[a][b] = area * beta * v;
        }
    }
    out
}

/// `∫_{ℝ² \ [−L, L]²} |y|^{−2−2s} dy`: an exact Cartesian integral over
/// `B_R \ square` plus the analytic tail `π R^{−2s} / s`.
pub fn square_center_weight(l: f64, s: f64) -> f64 {
    let r = 2.0 * l;
    let f = |x: f64, y: f64| (x * x + y * y).powf(-1.0 - s);
    // one octant 0 ≤ y ≤ x, x ≥ L
    let column = |x: f64| {
        let top = x.min((r * r - x * x).max(0.0).sqrt());
        adapt(|y| f(x, y), 0.0, top, 1e-15)
    };
    let kink = r / std::f64::consts::SQRT_2;
    let mut v = adapt(column, l, kink, 1e-14);
    // x = R − u² removes the square-root endpoint
    v += adapt(
        |u| 2.0 * u * column(r - u * u),
        0.0,
        (r - kink).sqrt(),
        1e-14,
    );
    8.0 * v + PI * r.powf(-2.0 * s) / s
}
