//! Gauss rules on intervals and triangles.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::special::beta;

/// Quadrature orders used by assembly, loads and interpolation.
///
/// `q_sing` is the Gauss order per direction for touching element pairs,
/// `q_far` the order per direction for nearby non-touching pairs at unit
/// separation ratio, `q_ang` the Gauss order per angular arc of the exterior
/// weights and `q_load` the order per direction for load vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureRules {
    pub q_sing: usize,
    pub q_far: usize,
    pub q_ang: usize,
    pub q_load: usize,
    /// Pairs whose separation ratio exceeds this use the centroid rule.
    pub far_ratio: f64,
}

impl Default for QuadratureRules {
    fn default() -> Self {
        QuadratureRules {
            q_sing: 11,
            q_far: 4,
            q_ang: 16,
            q_load: 6,
            far_ratio: 8.0,
        }
    }
}

impl QuadratureRules {
    /// All orders raised by `k`.
    pub fn elevated(&self, k: usize) -> Self {
        QuadratureRules {
            q_sing: self.q_sing + k,
            q_far: self.q_far + k,
            q_ang: self.q_ang + k,
            q_load: self.q_load + k,
            far_ratio: self.far_ratio,
        }
    }
}

/// Nodes and weights on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// The rule mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> Rule1d {
        let l = b - a;
        Rule1d {
            nodes: self.nodes.iter().map(|&t| a + l * t).collect(),
            weights: self.weights.iter().map(|&w| w * l).collect(),
        }
    }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Rule1d {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root on [-1, 1]
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    Rule1d { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `n`-point Gauss-Jacobi rule for the weight `(1 - x)^alpha (1 + x)^beta` on
/// `[-1, 1]`, computed from the eigen-decomposition of the Jacobi matrix.
pub fn gauss_jacobi(n: usize, alpha: f64, beta_: f64) -> Rule1d {
    assert!(n > 0, "gauss_jacobi needs at least one node");
    assert!(
        alpha > -1.0 && beta_ > -1.0,
        "Jacobi exponents must exceed -1"
    );
    let (a, b) = (alpha, beta_);
    let mut jm = faer::Mat::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + a + b;
            let num = 4.0 * m * (m + a) * (m + b) * (m + a + b);
            let den = s * s * (s + 1.0) * (s - 1.0);
            let off = libm::sqrt(num / den);
            jm[(k + 1, k)] = off;
            jm[(k, k + 1)] = off;
        }
    }
    let evd = jm
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric tridiagonal eigenproblem");
    let mu0 = libm::pow(2.0, a + b + 1.0) * beta(a + 1.0, b + 1.0);
    let s = evd.S();
    let u = evd.U();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        nodes.push(s[k]);
        let v = u[(0, k)];
        weights.push(mu0 * v * v);
    }
    Rule1d { nodes, weights }
}

/// Rule on the reference triangle `{(x, y): x, y >= 0, x + y <= 1}` with nodes
/// in barycentric coordinates `(1 - x - y, x, y)` and weights summing to `1/2`.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub bary: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed (Duffy) tensor Gauss rule with `q` points per direction.
    /// Exact for polynomials of total degree `2q - 2`.
    pub fn collapsed(q: usize) -> TriangleRule {
        let g = gauss_legendre(q);
        let mut bary = Vec::with_capacity(q * q);
        let mut weights = Vec::with_capacity(q * q);
        for (u, wu) in g.iter() {
            for (v, wv) in g.iter() {
                let x = u;
                let y = v * (1.0 - u);
                bary.push([1.0 - x - y, x, y]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        TriangleRule { bary, weights }
    }

    /// Collapsed rule at vertex 0 for integrands with a power singularity
    /// `d^beta` at that vertex (`toward_edge = false`) or at the opposite edge.
    /// The radial variable is split geometrically with ratio `sigma` into
    /// `levels` Gauss panels of `q` points, and the innermost panel carries a
    /// Gauss-Jacobi rule for the weight `d^beta`. For the vertex case `beta`
    /// must already include the factor `r` of the collapse.
    pub fn graded(
        q: usize,
        levels: usize,
        sigma: f64,
        beta: f64,
        toward_edge: bool,
    ) -> TriangleRule {
        let g = gauss_legendre(q);
        let gj = gauss_jacobi(q, 0.0, beta);
        let jac = libm::pow(0.5, 1.0 + beta);
        // radial nodes in the distance variable d, weights for `∫ f dd`
        let mut radial: Vec<(f64, f64)> = Vec::new();
        let mut hi = 1.0;
        for _ in 0..levels {
            let lo = hi * sigma;
            for (t, w) in g.iter() {
                radial.push((lo + (hi - lo) * t, w * (hi - lo)));
            }
            hi = lo;
        }
        for (x, w) in gj.iter() {
            let t = 0.5 * (1.0 + x);
            radial.push((hi * t, hi * w * jac * libm::pow(t, -beta)));
        }
        // along the edge the corners at its ends are graded as well
        let mut along: Vec<(f64, f64)> = g.iter().collect();
        if toward_edge {
            along.clear();
            let mut panels = Vec::new();
            let mut hi = 0.5;
            for _ in 0..levels {
                panels.push((hi * sigma, hi));
                hi *= sigma;
            }
            panels.push((0.0, hi));
            for &(a, b) in &panels {
                for (t, w) in g.iter() {
                    along.push((a + (b - a) * t, w * (b - a)));
                    along.push((1.0 - a - (b - a) * t, w * (b - a)));
                }
            }
        }
        let mut bary = Vec::with_capacity(radial.len() * along.len());
        let mut weights = Vec::with_capacity(radial.len() * along.len());
        for &(d, wd) in &radial {
            let r = if toward_edge { 1.0 - d } else { d };
            for &(t, wt) in &along {
                bary.push([1.0 - r, r * (1.0 - t), r * t]);
                weights.push(wd * wt * r);
            }
        }
        TriangleRule { bary, weights }
    }

    /// Single point at the centroid.
    pub fn centroid() -> TriangleRule {
        TriangleRule {
            bary: alloc::vec![[1.0 / 3.0; 3]],
            weights: alloc::vec![0.5],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
