//! Positivity preserving quasi-interpolation: the value at an interior vertex
//! is the mean of the field over the largest ball centred there inside the
//! vertex star; boundary values are zero.

use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{self, Point};
use crate::mesh::{maximal_ball, MeshError, PointLocator, StarIndex, TriangleMesh};
use crate::quadrature;

/// Radial Gauss points of the ball rule; the angular rule has twice as many.
pub const Q_BALL: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpError {
    #[error("vertex {0} is not an interior vertex")]
    NotInterior(usize),
    #[error("ball rule needs at least one point")]
    InvalidRule,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A piecewise affine function given by its values at the interior vertices,
/// in degree of freedom order.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(n: usize) -> NodalField {
        NodalField {
            values: alloc::vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values at every mesh vertex.
    pub fn vertex_values(&self, mesh: &TriangleMesh) -> Vec<f64> {
        mesh.vertex_values(&self.values)
    }

    /// Barycentric evaluation; zero outside the mesh.
    pub fn eval(&self, mesh: &TriangleMesh, locator: &PointLocator<'_>, x: Point) -> f64 {
        let Some((t, l)) = locator.locate(x) else {
            return 0.0;
        };
        let tri = mesh.triangles()[t];
        (0..3)
            .filter_map(|k| mesh.dof(tri[k]).map(|d| l[k] * self.values[d]))
            .sum()
    }
}

/// Polar product rule on the unit disk: nodes and weights summing to one.
struct BallRule {
    nodes: Vec<(Point, f64)>,
}

impl BallRule {
    fn new(q: usize) -> BallRule {
        let radial = quadrature::gauss_legendre(q).on(0.0, 1.0);
        let na = 2 * q;
        let mut nodes = Vec::with_capacity(q * na);
        for (r, wr) in radial.iter() {
            for k in 0..na {
                // equally spaced angles integrate trigonometric polynomials of
                // degree < na exactly
                let th = 2.0 * core::f64::consts::PI * (k as f64 + 0.5) / na as f64;
                let w = 2.0 * wr * r / na as f64;
                nodes.push(([r * libm::cos(th), r * libm::sin(th)], w));
            }
        }
        BallRule { nodes }
    }

    fn average<F: Fn(Point) -> f64>(&self, x: Point, rho: f64, v: &F) -> f64 {
        self.nodes
            .iter()
            .map(|&(p, w)| w * v(geometry::add(x, geometry::scale(p, rho))))
            .sum()
    }
}

/// `(1/|B|) ∫_B v` over the maximal ball `B` of interior vertex `i`.
pub fn ball_average<F: Fn(Point) -> f64>(
    mesh: &TriangleMesh,
    star: &StarIndex,
    i: usize,
    v: F,
    q_ball: usize,
) -> Result<f64, InterpError> {
    if q_ball == 0 {
        return Err(InterpError::InvalidRule);
    }
    if i >= mesh.num_vertices() || mesh.is_boundary(i) {
        return Err(InterpError::NotInterior(i));
    }
    let rho = maximal_ball(mesh, star, i)?;
    Ok(BallRule::new(q_ball).average(mesh.vertices()[i], rho, &v))
}

/// The quasi-interpolant of `v` with ball rule order `q_ball`.
pub fn interpolate<F: Fn(Point) -> f64>(
    mesh: &TriangleMesh,
    star: &StarIndex,
    v: F,
    q_ball: usize,
) -> Result<NodalField, InterpError> {
    if q_ball == 0 {
        return Err(InterpError::InvalidRule);
    }
    let rule = BallRule::new(q_ball);
    let mut values = Vec::with_capacity(mesh.ndof());
    for &i in mesh.dof_vertices() {
        let rho = maximal_ball(mesh, star, i)?;
        values.push(rule.average(mesh.vertices()[i], rho, &v));
    }
    Ok(NodalField { values })
}

/// Nodal interpolation of `v` at the interior vertices.
pub fn nodal_interpolate<F: Fn(Point) -> f64>(mesh: &TriangleMesh, v: F) -> NodalField {
    NodalField {
        values: mesh
            .dof_vertices()
            .iter()
            .map(|&i| v(mesh.vertices()[i]))
            .collect(),
    }
}
