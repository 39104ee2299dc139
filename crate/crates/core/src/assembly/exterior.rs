//! Exterior weights `∫_{ℝ² \ U} |x − y|^{−2−2s} dy` for a point `x` inside a
//! polygonal region `U` given by its boundary segments.
//!
//! In polar coordinates around `x` the radial integral is explicit:
//! a ray leaves and re-enters `U` at distances `t_1 < t_2 < ...` and the
//! outside intervals contribute `(t_{2k+1}^{−2s} − t_{2k+2}^{−2s}) / (2s)`.
//! The angle is split at the directions of all segment endpoints, so the set
//! of segments crossed by the ray is fixed on each arc and the angular
//! integrand is smooth there.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{self, Point};
use crate::quadrature::{gauss_jacobi, Rule1d};
use crate::special::beta;

/// `J(φ) = ∫_0^φ cos^{2s} t dt` on `[−π/2, π/2]`.
///
/// Near `φ = π/2` the integrand vanishes like `ψ^{2s}` with `ψ = π/2 − φ`, so
/// the tail is written as `ψ^{2s+1} G(ψ²)` with `G` analytic on the whole
/// range and interpolated in Chebyshev points.
#[derive(Clone, Debug)]
pub struct CosPower {
    s: f64,
    full: f64,
    coef: Vec<f64>,
}

const CHEB_NODES: usize = 24;
const Z_MAX: f64 = PI * PI / 4.0;

impl CosPower {
    /// `q` is the Gauss-Jacobi order used to sample `G`.
    pub fn new(s: f64, q: usize) -> CosPower {
        let p = 2.0 * s;
        // ∫_0^1 t^{2s} sinc(ψt)^{2s} dt with the weight on [−1, 1] mapped to [0, 1]
        let gj = gauss_jacobi(q.max(2), 0.0, p);
        let scale = libm::pow(0.5, 1.0 + p);
        let g = |z: f64| {
            let psi = libm::sqrt(z);
            gj.iter()
                .map(|(x, w)| {
                    let u = psi * 0.5 * (1.0 + x);
                    let sinc = if u > 1e-8 {
                        libm::sin(u) / u
                    } else {
                        1.0 - u * u / 6.0
                    };
                    w * scale * libm::exp(p * libm::log(sinc))
                })
                .sum::<f64>()
        };
        let n = CHEB_NODES;
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let t = libm::cos(PI * (k as f64 + 0.5) / n as f64);
                g(0.5 * Z_MAX * (1.0 + t))
            })
            .collect();
        let coef = (0..n)
            .map(|j| {
                let mut c = 0.0;
                for (k, v) in vals.iter().enumerate() {
                    c += v * libm::cos(PI * j as f64 * (k as f64 + 0.5) / n as f64);
                }
                c * 2.0 / n as f64
            })
            .collect();
        CosPower {
            s,
            full: 0.5 * beta(0.5, s + 0.5),
            coef,
        }
    }

    fn tail(&self, psi: f64) -> f64 {
        let t = 2.0 * psi * psi / Z_MAX - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coef[1..].iter().rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        let g = t * b1 - b2 + 0.5 * self.coef[0];
        libm::exp((2.0 * self.s + 1.0) * libm::log(psi)) * g
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let psi = (0.5 * PI - phi.abs()).max(0.0);
        let v = if psi > 0.0 {
            self.full - self.tail(psi)
        } else {
            self.full
        };
        if phi < 0.0 {
            -v
        } else {
            v
        }
    }

    /// Exterior weight of a region whose boundary segments are oriented with
    /// the region on their left, by the divergence theorem: each segment
    /// contributes `sign(h) |h|^{−2s} (J(φ_1) − J(φ_0)) / (2s)` with `h` the
    /// distance from `x` to its line.
    pub fn exterior_weight(&self, x: Point, segs: &[[Point; 2]]) -> f64 {
        let expo = -2.0 * self.s;
        let mut total = 0.0;
        for &[a, b] in segs {
            let d = geometry::sub(b, a);
            let len = geometry::norm(d);
            let tau = [d[0] / len, d[1] / len];
            let ax = geometry::sub(a, x);
            let h = geometry::cross(ax, tau);
            if h == 0.0 {
                continue;
            }
            let l0 = geometry::dot(ax, tau);
            let l1 = l0 + len;
            let ha = h.abs();
            let dj = self.eval(libm::atan(l1 / ha)) - self.eval(libm::atan(l0 / ha));
            total += h.signum() * libm::exp(expo * libm::log(ha)) * dj;
        }
        total / (2.0 * self.s)
    }
}

/// Reusable buffers.
#[derive(Default)]
pub struct Scratch {
    angles: Vec<f64>,
    hits: Vec<(f64, usize)>,
}

pub fn exterior_weight(
    x: Point,
    segs: &[[Point; 2]],
    s: f64,
    g: &Rule1d,
    scratch: &mut Scratch,
) -> f64 {
    let Scratch { angles, hits } = scratch;
    angles.clear();
    for seg in segs {
        for p in seg {
            let d = geometry::sub(*p, x);
            angles.push(libm::atan2(d[1], d[0]));
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let m = angles.len();
    let expo = -2.0 * s;
    let mut total = 0.0;
    for k in 0..m {
        let a = angles[k];
        let b = if k + 1 < m {
            angles[k + 1]
        } else {
            angles[0] + 2.0 * PI
        };
        let len = b - a;
        if len < 1e-14 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let e = [libm::cos(mid), libm::sin(mid)];
        hits.clear();
        for (i, seg) in segs.iter().enumerate() {
            if let Some(t) = geometry::ray_segment(x, e, seg[0], seg[1]) {
                hits.push((t, i));
            }
        }
        if hits.is_empty() {
            continue;
        }
        hits.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut arc = 0.0;
        for (t, w) in g.iter() {
            let th = a + len * t;
            let e = [libm::cos(th), libm::sin(th)];
            let mut v = 0.0;
            let mut sign = 1.0;
            for &(_, i) in hits.iter() {
                let [p, q] = segs[i];
                let pq = geometry::sub(q, p);
                let r = geometry::cross(geometry::sub(p, x), pq) / geometry::cross(e, pq);
                v += sign * libm::exp(expo * libm::log(r));
                sign = -sign;
            }
            arc += w * v;
        }
        total += arc * len;
    }
    total / (2.0 * s)
}
