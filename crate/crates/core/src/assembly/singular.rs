//! Touching element pairs: the singular integrals
//! `∫_T1 ∫_T2 (ψ_a(x) − ψ_a(y)) (ψ_b(x) − ψ_b(y)) |x − y|^{−2−2s} dy dx`
//! over the union of the vertices of both triangles.
//!
//! Both triangles are parametrised over `T̂ = {0 ≤ x̂2 ≤ x̂1 ≤ 1}` by
//! `F(x̂) = P0 + x̂1 (P1 − P0) + x̂2 (P2 − P1)`, with the shared vertices
//! first. The product domain is split into subregions mapped from the unit
//! hypercube in `(ξ, η1, η2, η3)`. On each subregion the numerator and the
//! kernel are homogeneous in `ξ` (and in `η1`, `η2` where the singular set
//! has higher dimension), so those variables are integrated in closed form
//! and only a smooth integral in the remaining variables is left to Gauss.

use crate::geometry::{self, Point};
use crate::quadrature::Rule1d;

/// Which variables are integrated in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    Identical,
    Edge,
    Vertex,
}

impl Case {
    pub fn subregions(self) -> usize {
        match self {
            Case::Identical => 6,
            Case::Edge => 5,
            Case::Vertex => 2,
        }
    }
}

/// Point pair `(x̂, ŷ)` in `T̂ × T̂` and the Jacobian of subregion `j`.
pub fn duffy_map(
    case: Case,
    j: usize,
    xi: f64,
    e1: f64,
    e2: f64,
    e3: f64,
) -> ([f64; 2], [f64; 2], f64) {
    match case {
        Case::Identical => {
            let jac = xi * xi * xi * e1 * e1 * e2;
            let (x, y) = match j {
                0 => ([1.0, 1.0 - e1 + e1 * e2], [1.0 - e1 * e2 * e3, 1.0 - e1]),
                1 => ([1.0 - e1 * e2 * e3, 1.0 - e1], [1.0, 1.0 - e1 + e1 * e2]),
                2 => (
                    [1.0, e1 * (1.0 - e2 + e2 * e3)],
                    [1.0 - e1 * e2, e1 * (1.0 - e2)],
                ),
                3 => (
                    [1.0 - e1 * e2, e1 * (1.0 - e2)],
                    [1.0, e1 * (1.0 - e2 + e2 * e3)],
                ),
                4 => (
                    [1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)],
                    [1.0, e1 * (1.0 - e2)],
                ),
                _ => (
                    [1.0, e1 * (1.0 - e2)],
                    [1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)],
                ),
            };
            ([xi * x[0], xi * x[1]], [xi * y[0], xi * y[1]], jac)
        }
        Case::Edge => {
            let base = xi * xi * xi * e1 * e1;
            let (x, y, jac) = match j {
                0 => ([1.0, e1 * e3], [1.0 - e1 * e2, e1 * (1.0 - e2)], base),
                1 => (
                    [1.0, e1],
                    [1.0 - e1 * e2 * e3, e1 * e2 * (1.0 - e3)],
                    base * e2,
                ),
                2 => (
                    [1.0 - e1 * e2, e1 * (1.0 - e2)],
                    [1.0, e1 * e2 * e3],
                    base * e2,
                ),
                3 => (
                    [1.0 - e1 * e2 * e3, e1 * e2 * (1.0 - e3)],
                    [1.0, e1],
                    base * e2,
                ),
                _ => (
                    [1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)],
                    [1.0, e1 * e2],
                    base * e2,
                ),
            };
            ([xi * x[0], xi * x[1]], [xi * y[0], xi * y[1]], jac)
        }
        Case::Vertex => {
            let jac = xi * xi * xi * e2;
            let (x, y) = match j {
                0 => ([1.0, e1], [e2, e2 * e3]),
                _ => ([e2, e2 * e1], [1.0, e3]),
            };
            ([xi * x[0], xi * x[1]], [xi * y[0], xi * y[1]], jac)
        }
    }
}

#[inline]
fn reference_bary(x: [f64; 2]) -> [f64; 3] {
    [1.0 - x[0], x[0] - x[1], x[1]]
}

#[inline]
fn map(p: &[Point; 3], x: [f64; 2]) -> Point {
    [
        p[0][0] + x[0] * (p[1][0] - p[0][0]) + x[1] * (p[2][0] - p[1][0]),
        p[0][1] + x[0] * (p[1][1] - p[0][1]) + x[1] * (p[2][1] - p[1][1]),
    ]
}

/// Singular pair integral for triangles `p` and `q` given with their shared
/// vertices first (`q[k] == p[k]` for the shared positions). `idx_p[k]` and
/// `idx_q[k]` give the position of each vertex in the local union list of
/// length `N`. Returns the `N × N` matrix of integrals.
pub fn touching_pair<const N: usize>(
    case: Case,
    p: &[Point; 3],
    q: &[Point; 3],
    idx_p: [usize; 3],
    idx_q: [usize; 3],
    s: f64,
    g: &Rule1d,
) -> [[f64; N]; N] {
    let mut m = [[0.0; N]; N];
    let mut add = |x: [f64; 2], y: [f64; 2], wk: f64| {
        let lx = reference_bary(x);
        let ly = reference_bary(y);
        let mut diff = [0.0; N];
        for k in 0..3 {
            diff[idx_p[k]] += lx[k];
            diff[idx_q[k]] -= ly[k];
        }
        for a in 0..N {
            let da = wk * diff[a];
            for b in 0..=a {
                m[a][b] += da * diff[b];
            }
        }
    };
    // One variable `η` enters the distance affinely, `d = a + η b`. With the
    // closest point `η*` inside the interval or within `h/|b|` of it,
    // `η = η* + (h/|b|) tan φ` turns `|d|^{−2−2s} dη` into
    // `h^{−1−2s} |b|^{−1} cos^{2s} φ dφ`; otherwise `|η − η*|` is graded
    // logarithmically.
    let mut line = |at: &dyn Fn(f64) -> ([f64; 2], [f64; 2], f64), w: f64| {
        let end = |t: f64| {
            let (x, y, _) = at(t);
            geometry::sub(map(p, x), map(q, y))
        };
        let a = end(0.0);
        let b = geometry::sub(end(1.0), a);
        let bb = geometry::norm2(b);
        let star = -geometry::dot(a, b) / bb;
        let h = geometry::norm(geometry::add(a, geometry::scale(b, star)));
        let nb = libm::sqrt(bb);
        let r = h / nb;
        let gap = (-star).max(star - 1.0);
        if gap <= r {
            let phi0 = libm::atan(-star / r);
            let phi1 = libm::atan((1.0 - star) / r);
            let c = w * (phi1 - phi0) * libm::exp((-1.0 - s) * libm::log(h * h)) * h / nb;
            for (t, wt) in g.iter() {
                let phi = phi0 + (phi1 - phi0) * t;
                let (x, y, jac) = at(star + r * libm::tan(phi));
                let cs = libm::cos(phi);
                add(x, y, c * wt * jac * libm::exp(2.0 * s * libm::log(cs)));
            }
        } else {
            let (dir, u0, u1) = if star < 0.0 {
                (1.0, libm::log(-star), libm::log(1.0 - star))
            } else {
                (-1.0, libm::log(star - 1.0), libm::log(star))
            };
            for (t, wt) in g.iter() {
                let u = u0 + (u1 - u0) * t;
                let off = libm::exp(u);
                let (x, y, jac) = at(star + dir * off);
                let d = geometry::sub(map(p, x), map(q, y));
                let k = libm::exp((-1.0 - s) * libm::log(geometry::norm2(d)));
                add(x, y, w * wt * (u1 - u0) * off * jac * k);
            }
        }
    };
    let two_s = 2.0 * s;
    let radial;
    match case {
        Case::Identical => {
            radial = 1.0 / ((4.0 - two_s) * (3.0 - two_s) * (2.0 - two_s));
            for j in 0..6 {
                line(&|e3| duffy_map(case, j, 1.0, 1.0, 1.0, e3), 1.0);
            }
        }
        Case::Edge => {
            radial = 1.0 / ((4.0 - two_s) * (3.0 - two_s));
            for j in 0..5 {
                for (e2, w2) in g.iter() {
                    line(&|e3| duffy_map(case, j, 1.0, 1.0, e2, e3), w2);
                }
            }
        }
        Case::Vertex => {
            // η2 scales one triangle towards the shared vertex, which also
            // absorbs size contrast between the two
            radial = 1.0 / (4.0 - two_s);
            for j in 0..2 {
                for (e1, w1) in g.iter() {
                    for (e3, w3) in g.iter() {
                        line(&|e2| duffy_map(case, j, 1.0, e1, e2, e3), w1 * w3);
                    }
                }
            }
        }
    }
    let scale = radial * 4.0 * geometry::triangle_area(p) * geometry::triangle_area(q);
    for a in 0..N {
        for b in 0..=a {
            m[a][b] *= scale;
            m[b][a] = m[a][b];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre, TriangleRule};

    fn on_hypercube<F: FnMut(f64, f64, f64, f64, f64)>(n: usize, mut f: F) {
        let g = gauss_legendre(n);
        for (a, wa) in g.iter() {
            for (b, wb) in g.iter() {
                for (c, wc) in g.iter() {
                    for (d, wd) in g.iter() {
                        f(a, b, c, d, wa * wb * wc * wd);
                    }
                }
            }
        }
    }

    fn reference_points(q: usize) -> Vec<([f64; 2], f64)> {
        // T̂ = {0 <= x2 <= x1 <= 1} from the standard triangle by (x, y) -> (x + y, y)
        let r = TriangleRule::collapsed(q);
        r.bary
            .iter()
            .zip(&r.weights)
            .map(|(l, &w)| ([l[1] + l[2], l[2]], w))
            .collect()
    }

    fn smooth(x: [f64; 2], y: [f64; 2]) -> f64 {
        libm::exp(0.3 * x[0] - 0.2 * y[1]) * (1.0 + x[1] * y[0]) + x[0] * x[0] * y[1]
    }

    #[test]
    fn subregions_tile_the_product_domain() {
        let pts = reference_points(12);
        let mut exact = 0.0;
        for &(x, wx) in &pts {
            for &(y, wy) in &pts {
                exact += wx * wy * smooth(x, y);
            }
        }
        for case in [Case::Identical, Case::Edge, Case::Vertex] {
            let mut vol = 0.0;
            let mut val = 0.0;
            for j in 0..case.subregions() {
                on_hypercube(12, |a, b, c, d, w| {
                    let (x, y, jac) = duffy_map(case, j, a, b, c, d);
                    assert!(x[1] >= -1e-15 && x[1] <= x[0] + 1e-15 && x[0] <= 1.0 + 1e-15);
                    assert!(y[1] >= -1e-15 && y[1] <= y[0] + 1e-15 && y[0] <= 1.0 + 1e-15);
                    vol += w * jac;
                    val += w * jac * smooth(x, y);
                });
            }
            assert!((vol - 0.25).abs() < 1e-13, "{case:?}: volume {vol}");
            assert!(
                (val - exact).abs() < 1e-10 * exact.abs(),
                "{case:?}: {val} vs {exact}"
            );
        }
    }

    #[test]
    fn singular_sets_scale_out() {
        // x̂ − ŷ is proportional to ξ η1 η2 (identical), ξ η1 (edge), ξ (vertex)
        let probe = [(0.3, 0.7, 0.45, 0.2), (0.9, 0.15, 0.8, 0.6)];
        for &(xi, e1, e2, e3) in &probe {
            for j in 0..6 {
                let (x, y, _) = duffy_map(Case::Identical, j, xi, e1, e2, e3);
                let (x1, y1, _) = duffy_map(Case::Identical, j, 1.0, 1.0, 1.0, e3);
                let f = xi * e1 * e2;
                for k in 0..2 {
                    assert!(((x[k] - y[k]) - f * (x1[k] - y1[k])).abs() < 1e-15);
                }
            }
            for j in 0..5 {
                let (x, y, _) = duffy_map(Case::Edge, j, xi, e1, e2, e3);
                let (x1, y1, _) = duffy_map(Case::Edge, j, 1.0, 1.0, e2, e3);
                let f = xi * e1;
                for k in 0..2 {
                    assert!(((x[k] - y[k]) - f * (x1[k] - y1[k])).abs() < 1e-15);
                }
                // shared edge x̂2 = 0 keeps the barycentric of the third vertex homogeneous
                assert!((x[1] - f * x1[1]).abs() < 1e-15 && (y[1] - f * y1[1]).abs() < 1e-15);
            }
        }
    }
}
