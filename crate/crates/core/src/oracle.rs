//! Explicit radial solution of the obstacle problem on the unit disk and the
//! energy error evaluation built on it.
//!
//! With `w = 1 − r²` the solution is `u = w^s q(w)`, where
//! `q(w) = P₂^{(s,0)}(1 − 2w) = (a − b w + c w²)/2`. The forcing is the
//! eigenvalue `2^{2s−2} Γ(3+s)²` times `q(w)`.

use thiserror::Error;

use crate::dense::{Cholesky, SymMatrix};
use crate::geometry::{self, Point};
use crate::quadrature;
use crate::special::{gamma, powf};

/// Radius of the quadratic cap replacing cone apices.
pub const DEFAULT_CAP_RADIUS: f64 = 0.02;
/// Radius of the contact disk.
pub const CONTACT_RADIUS: f64 = 0.2;
/// Height of the forcing cone `100 (1/5 − |x|)₊`.
const CONE_SLOPE: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("fractional order {0} outside (0, 1)")]
    InvalidOrder(f64),
    #[error("cap radius {0} outside (0, 1/5)")]
    InvalidCap(f64),
    #[error("radial quadrature did not converge: {0:e} between orders")]
    NotConverged(f64),
    #[error("negative squared energy error {0:e}: inputs are inconsistent")]
    NegativeRadicand(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// `P₂^{(s,0)}(z)`.
pub fn jacobi_p2(s: f64, z: f64) -> f64 {
    let zm = z - 1.0;
    (4.0 * (s + 1.0) * (s + 2.0)
        + 4.0 * (s + 2.0) * (s + 3.0) * zm
        + (s + 3.0) * (s + 4.0) * zm * zm)
        / 8.0
}

/// `u(x) = (1 − |x|²)₊^s P₂^{(s,0)}(2|x|² − 1)`.
pub fn exact_solution(s: f64, x: Point) -> f64 {
    let w = 1.0 - geometry::norm2(x);
    if w <= 0.0 {
        return 0.0;
    }
    powf(w, s) * jacobi_p2(s, 1.0 - 2.0 * w)
}

/// Eigenvalue of the fractional Laplacian for the degree two Jacobi mode.
pub fn eigenvalue(s: f64) -> f64 {
    let g = gamma(3.0 + s);
    powf(2.0, 2.0 * (s - 1.0)) * g * g
}

/// `f̃ = (−Δ)^s u` inside the disk.
pub fn exact_rhs_linear(s: f64, x: Point) -> f64 {
    eigenvalue(s) * jacobi_p2(s, 2.0 * geometry::norm2(x) - 1.0)
}

/// `m(r)`: `r` away from the origin, a C¹ quadratic cap on `r < r_c`.
pub fn smoothed_radius(r: f64, r_c: f64) -> f64 {
    if r >= r_c {
        r
    } else {
        (r * r + r_c * r_c) / (2.0 * r_c)
    }
}

/// The constructed obstacle problem with known solution.
#[derive(Clone, Copy, Debug)]
pub struct ExplicitSolution {
    pub s: f64,
    pub r_c: f64,
    /// `|u|²_s = ∫ f̃ u`.
    pub e0: f64,
    coef: [f64; 3],
    taylor: [f64; 3],
}

impl ExplicitSolution {
    pub fn new(s: f64, r_c: f64) -> Result<ExplicitSolution, OracleError> {
        if !(s > 0.0 && s < 1.0) {
            return Err(OracleError::InvalidOrder(s));
        }
        if !(r_c > 0.0 && r_c < CONTACT_RADIUS) {
            return Err(OracleError::InvalidCap(r_c));
        }
        let coef = [
            (s + 1.0) * (s + 2.0),
            2.0 * (s + 2.0) * (s + 3.0),
            (s + 3.0) * (s + 4.0),
        ];
        let mut sol = ExplicitSolution {
            s,
            r_c,
            e0: 0.0,
            coef,
            taylor: [0.0; 3],
        };
        let r0 = CONTACT_RADIUS;
        sol.taylor = [sol.u_radial(r0), sol.du(r0), sol.d2u(r0)];
        sol.e0 = energy_norm_sq_exact(s, 4)?;
        Ok(sol)
    }

    /// `g^{(k)}(w)` for `g(w) = w^s q(w)`, `k ≤ 2`.
    fn g(&self, w: f64, k: usize) -> f64 {
        let s = self.s;
        let [a, b, c] = self.coef;
        // exponents s, s+1, s+2 with signs +, −, +
        let terms = [(a, s), (-b, s + 1.0), (c, s + 2.0)];
        let mut acc = 0.0;
        for (m, e) in terms {
            let mut f = m;
            for j in 0..k {
                f *= e - j as f64;
            }
            acc += f * powf(w, e - k as f64);
        }
        0.5 * acc
    }

    pub fn u_radial(&self, r: f64) -> f64 {
        let w = 1.0 - r * r;
        if w <= 0.0 {
            0.0
        } else {
            self.g(w, 0)
        }
    }

    /// `u′(r)` for `r < 1`.
    pub fn du(&self, r: f64) -> f64 {
        -2.0 * r * self.g(1.0 - r * r, 1)
    }

    /// `u″(r)` for `r < 1`.
    pub fn d2u(&self, r: f64) -> f64 {
        let w = 1.0 - r * r;
        4.0 * r * r * self.g(w, 2) - 2.0 * self.g(w, 1)
    }

    pub fn u(&self, x: Point) -> f64 {
        self.u_radial(geometry::norm(x))
    }

    pub fn f_tilde(&self, x: Point) -> f64 {
        exact_rhs_linear(self.s, x)
    }

    /// `u` on the contact disk, its radial Taylor polynomial outside.
    pub fn chi(&self, x: Point) -> f64 {
        let r = geometry::norm(x);
        if r <= CONTACT_RADIUS {
            return self.u_radial(r);
        }
        let d = r - CONTACT_RADIUS;
        let [u0, u1, u2] = self.taylor;
        u0 + u1 * d + 0.5 * u2 * d * d
    }

    /// `f̃ − 100 (1/5 − m(|x|))₊`.
    pub fn f(&self, x: Point) -> f64 {
        let m = smoothed_radius(geometry::norm(x), self.r_c);
        self.f_tilde(x) - CONE_SLOPE * (CONTACT_RADIUS - m).max(0.0)
    }
}

/// Centre of the cone obstacle of the qualitative experiment.
pub const CONE_CENTER: Point = [0.25, 0.25];

/// `1/2 − m(|x − x₀|)`: the cone obstacle with its apex capped.
pub fn cone_obstacle(x: Point, r_c: f64) -> f64 {
    0.5 - smoothed_radius(geometry::dist(x, CONE_CENTER), r_c)
}

/// `2π ∫₀¹ f̃ u r dr`. With `z = 2r² − 1` this is
/// `π 2^{−s−1} λ ∫_{−1}^{1} P₂(z)² (1 − z)^s dz`, integrated by Gauss–Jacobi
/// rules of order `q_rad` and `2 q_rad`.
pub fn energy_norm_sq_exact(s: f64, q_rad: usize) -> Result<f64, OracleError> {
    if !(s > 0.0 && s < 1.0) {
        return Err(OracleError::InvalidOrder(s));
    }
    let eval = |q: usize| {
        let rule = quadrature::gauss_jacobi(q.max(1), s, 0.0);
        let sum: f64 = rule
            .iter()
            .map(|(z, w)| {
                let p = jacobi_p2(s, z);
                w * p * p
            })
            .sum();
        core::f64::consts::PI * powf(2.0, -s - 1.0) * eigenvalue(s) * sum
    };
    let (lo, hi) = (eval(q_rad), eval(2 * q_rad));
    let diff = (hi - lo).abs();
    if diff > 1e-12 * hi.abs() {
        return Err(OracleError::NotConverged(diff));
    }
    Ok(hi)
}

/// Quadratic forms `xᵀ A x` from an assembled or factored matrix.
pub trait EnergyForm {
    fn dim(&self) -> usize;
    fn energy(&self, x: &[f64]) -> f64;
}

impl EnergyForm for SymMatrix {
    fn dim(&self) -> usize {
        SymMatrix::dim(self)
    }

    fn energy(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

impl EnergyForm for Cholesky {
    fn dim(&self) -> usize {
        Cholesky::dim(self)
    }

    fn energy(&self, x: &[f64]) -> f64 {
        Cholesky::energy(self, x)
    }
}

/// `|u − u_h|_s = sqrt(E0 − 2 F̃ᵀu_h + u_hᵀ A u_h)`, where `F̃` is the load
/// vector of `f̃` on the mesh of `u_h`.
pub fn energy_error<A: EnergyForm + ?Sized>(
    u_h: &[f64],
    a: &A,
    f_tilde: &[f64],
    e0: f64,
) -> Result<f64, OracleError> {
    let n = a.dim();
    for len in [u_h.len(), f_tilde.len()] {
        if len != n {
            return Err(OracleError::Dimension {
                expected: n,
                got: len,
            });
        }
    }
    let fu: f64 = f_tilde.iter().zip(u_h).map(|(f, u)| f * u).sum();
    let sq = e0 - 2.0 * fu + a.energy(u_h);
    if sq < -1e-10 * e0.max(1.0) {
        return Err(OracleError::NegativeRadicand(sq));
    }
    Ok(libm::sqrt(sq.max(0.0)))
}
