//! Discrete obstacle problem in complementarity form,
//!
//!   `A u − F = λ ≥ 0,  u ≥ χ,  λ (u − χ) = 0`,
//!
//! solved by a primal–dual active set iteration. `A` is factored once; the
//! reduced systems with `u = χ` on the active set go through the capacitance
//! matrix `S = E^T A^{-1} E = Z^T Z`, `Z = L^{-1} E`, whose columns are kept
//! between iterations. Should the active sets cycle, Murty's least index
//! principal pivoting takes over; it terminates for any positive definite `A`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};
use thiserror::Error;

use crate::dense::{Cholesky, LinalgError, SymMatrix};
use crate::interp::NodalField;
use crate::mesh::TriangleMesh;

/// Complementarity parameter of the active set update.
const C_ACTIVE: f64 = 1.0;
/// Columns of `Z` computed per blocked forward solve.
const CHUNK: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("active set iteration did not terminate in {0} steps")]
    MaxIterations(usize),
    #[error("reduced system is singular")]
    Capacitance,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("relative residual {0:e} above tolerance")]
    Residual(f64),
}

/// `A` (factored), load `F` and nodal obstacle `χ_h`.
#[derive(Clone, Debug)]
pub struct ObstacleProblem {
    pub factor: Cholesky,
    pub f: Vec<f64>,
    pub chi: Vec<f64>,
}

impl ObstacleProblem {
    /// Factors `a`.
    pub fn new(a: SymMatrix, f: Vec<f64>, chi: Vec<f64>) -> Result<ObstacleProblem, SolverError> {
        Self::from_factor(a.cholesky()?, f, chi)
    }

    pub fn from_factor(
        factor: Cholesky,
        f: Vec<f64>,
        chi: Vec<f64>,
    ) -> Result<ObstacleProblem, SolverError> {
        let n = factor.dim();
        for len in [f.len(), chi.len()] {
            if len != n {
                return Err(SolverError::Dimension {
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(ObstacleProblem { factor, f, chi })
    }

    pub fn ndof(&self) -> usize {
        self.f.len()
    }

    /// `½ uᵀAu − Fᵀu`.
    pub fn objective(&self, u: &[f64]) -> f64 {
        0.5 * self.factor.energy(u) - dot(&self.f, u)
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub u: NodalField,
    /// `A u − F`, exactly zero off the active set.
    pub lambda: Vec<f64>,
    /// Sorted degrees of freedom with `u = χ`.
    pub active: Vec<usize>,
    pub iterations: usize,
    /// `max_i |min(λ_i, u_i − χ_i)|`.
    pub comp_residual: f64,
    /// `max_i |(A u − F − λ)_i|` relative to `max(1, |F|_∞)`.
    pub kkt_residual: f64,
    /// Whether the pivoting fallback was needed.
    pub pivoting: bool,
}

/// Columns of `Z = L^{-1} E` for the current active set, column-major with
/// the padded row count of the factor.
struct Capacitance<'a> {
    l: &'a Cholesky,
    pad: usize,
    cols: Vec<usize>,
    z: Vec<f64>,
}

impl<'a> Capacitance<'a> {
    fn new(l: &'a Cholesky) -> Self {
        Capacitance {
            l,
            pad: l.padded_dim(),
            cols: Vec::new(),
            z: Vec::new(),
        }
    }

    /// Brings the stored columns to exactly `act`.
    fn update(&mut self, act: &BTreeSet<usize>) {
        let pad = self.pad;
        let mut kept = 0;
        for k in 0..self.cols.len() {
            if act.contains(&self.cols[k]) {
                if kept != k {
                    self.z.copy_within(k * pad..(k + 1) * pad, kept * pad);
                    self.cols[kept] = self.cols[k];
                }
                kept += 1;
            }
        }
        self.cols.truncate(kept);
        self.z.truncate(kept * pad);
        let have: BTreeSet<usize> = self.cols.iter().copied().collect();
        let new: Vec<usize> = act.difference(&have).copied().collect();
        for chunk in new.chunks(CHUNK) {
            let (row0, block) = self.l.forward_unit_columns(chunk);
            for (k, &c) in chunk.iter().enumerate() {
                self.z.resize(self.z.len() + row0, 0.0);
                self.z.extend((0..pad - row0).map(|r| block[(r, k)]));
                self.cols.push(c);
            }
        }
    }

    /// Solution of the reduced problem with `u = χ` on the stored columns:
    /// `u = u0 + A^{-1} E μ` with `S μ = χ_A − u0_A`. Returns `u` and `μ`,
    /// the multipliers in column order.
    fn solve(&self, u0: &[f64], chi: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
        let m = self.cols.len();
        if m == 0 {
            return Ok((u0.to_vec(), Vec::new()));
        }
        let z = MatRef::from_column_major_slice(&self.z, self.pad, m);
        let s: Mat<f64> = z.transpose() * z;
        let llt = s.llt(Side::Lower).map_err(|_| SolverError::Capacitance)?;
        let rhs = Mat::from_fn(m, 1, |k, _| chi[self.cols[k]] - u0[self.cols[k]]);
        let mu = llt.solve(&rhs);
        let v = z * &mu;
        let zv: Vec<f64> = (0..self.pad).map(|r| v[(r, 0)]).collect();
        let corr = self.l.backward_from(0, &zv);
        let mut u: Vec<f64> = u0.iter().zip(&corr).map(|(a, b)| a + b).collect();
        for &c in &self.cols {
            u[c] = chi[c];
        }
        Ok((u, (0..m).map(|k| mu[(k, 0)]).collect()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `u` with `A u = F`, checked to relative residual `1e-12`.
pub fn solve_linear(a: &Cholesky, f: &[f64]) -> Result<NodalField, SolverError> {
    if f.len() != a.dim() {
        return Err(SolverError::Dimension {
            expected: a.dim(),
            got: f.len(),
        });
    }
    let u = a.solve(f);
    let r = a.apply(&u);
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let res = r
        .iter()
        .zip(f)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 && res > 1e-12 * scale {
        return Err(SolverError::Residual(res / scale));
    }
    Ok(NodalField { values: u })
}

/// Iterate on an active set: `u`, and `λ` with zeros off the set.
struct Iterate {
    u: Vec<f64>,
    lambda: Vec<f64>,
}

fn iterate(
    cap: &mut Capacitance<'_>,
    act: &BTreeSet<usize>,
    u0: &[f64],
    chi: &[f64],
) -> Result<Iterate, SolverError> {
    cap.update(act);
    let (u, mu) = cap.solve(u0, chi)?;
    let mut lambda = alloc::vec![0.0; u.len()];
    for (k, &c) in cap.cols.iter().enumerate() {
        lambda[c] = mu[k];
    }
    Ok(Iterate { u, lambda })
}

/// Primal–dual active set iteration from the clipped unconstrained solution,
/// with least index pivoting if an active set repeats. `tol` bounds the
/// relative stationarity residual `|Au − F − λ|∞ / max(1, |F|∞)`.
pub fn solve_obstacle(
    p: &ObstacleProblem,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport, SolverError> {
    if !(tol > 0.0) {
        return Err(SolverError::InvalidTolerance(tol));
    }
    let chi = &p.chi;
    let u0 = p.factor.solve(&p.f);
    let mut cap = Capacitance::new(&p.factor);
    // u⁰ = max(u0, χ), λ⁰ = 0
    let mut it = Iterate {
        u: u0.iter().zip(chi).map(|(a, b)| a.max(*b)).collect(),
        lambda: alloc::vec![0.0; u0.len()],
    };
    let mut act: BTreeSet<usize> = BTreeSet::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut iterations = 0;
    let mut pivoting = false;
    loop {
        let next: BTreeSet<usize> = (0..chi.len())
            .filter(|&i| it.lambda[i] + C_ACTIVE * (chi[i] - it.u[i]) > 0.0)
            .collect();
        if iterations > 0 && next == act {
            break;
        }
        if !seen.insert(next.iter().copied().collect()) {
            pivoting = true;
            break;
        }
        if iterations >= max_iter {
            return Err(SolverError::MaxIterations(max_iter));
        }
        act = next;
        it = iterate(&mut cap, &act, &u0, chi)?;
        iterations += 1;
    }
    if pivoting {
        // Murty: flip the least index violating its sign condition
        loop {
            let viol = (0..chi.len()).find(|&i| {
                if act.contains(&i) {
                    it.lambda[i] < 0.0
                } else {
                    it.u[i] < chi[i]
                }
            });
            let Some(i) = viol else { break };
            if iterations >= max_iter {
                return Err(SolverError::MaxIterations(max_iter));
            }
            if !act.remove(&i) {
                act.insert(i);
            }
            it = iterate(&mut cap, &act, &u0, chi)?;
            iterations += 1;
        }
    }
    let Iterate { u, lambda } = it;
    let comp_residual = (0..chi.len())
        .map(|i| lambda[i].min(u[i] - chi[i]).abs())
        .fold(0.0, f64::max);
    let au = p.factor.apply(&u);
    let scale = p.f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let kkt_residual = (0..chi.len())
        .map(|i| (au[i] - p.f[i] - lambda[i]).abs())
        .fold(0.0, f64::max)
        / scale;
    if kkt_residual > tol {
        return Err(SolverError::Residual(kkt_residual));
    }
    Ok(SolveReport {
        u: NodalField { values: u },
        lambda,
        active: act.into_iter().collect(),
        iterations,
        comp_residual,
        kkt_residual,
        pivoting,
    })
}

/// Vertices in contact and triangles with all three vertices in contact.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactSet {
    /// Degrees of freedom in contact.
    pub dofs: Vec<usize>,
    /// Contact flag per mesh vertex; boundary vertices are never in contact.
    pub vertex_flags: Vec<bool>,
    pub triangles: Vec<usize>,
}

impl ContactSet {
    /// Total area of the contact triangles.
    pub fn area(&self, mesh: &TriangleMesh) -> f64 {
        self.triangles
            .iter()
            .map(|&t| crate::geometry::triangle_area(&mesh.triangle_points(t)))
            .sum()
    }
}

/// Contact iff `u_i − χ_i ≤ tol_c · max(1, |χ_i|)`.
pub fn discrete_contact_set(mesh: &TriangleMesh, u: &[f64], chi: &[f64], tol_c: f64) -> ContactSet {
    let dofs: Vec<usize> = (0..u.len())
        .filter(|&i| u[i] - chi[i] <= tol_c * chi[i].abs().max(1.0))
        .collect();
    let mut vertex_flags = alloc::vec![false; mesh.num_vertices()];
    for &d in &dofs {
        vertex_flags[mesh.dof_vertex(d)] = true;
    }
    let triangles = (0..mesh.num_triangles())
        .filter(|&t| mesh.triangles()[t].iter().all(|&v| vertex_flags[v]))
        .collect();
    ContactSet {
        dofs,
        vertex_flags,
        triangles,
    }
}
