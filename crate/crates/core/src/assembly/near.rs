//! Non-touching element pairs: `∫_T1 ∫_T2 λ_a(x) λ_b(y) |x − y|^{−2−2s} dy dx`
//! by tensor Gauss rules whose order follows the separation ratio, with
//! recursive subdivision of the larger triangle for very close pairs.

use alloc::vec::Vec;

use crate::geometry::{self, Point};
use crate::quadrature::TriangleRule;

/// Pairs closer than this ratio of distance to diameter are subdivided; exact
/// ties (common in symmetric meshes) are not, whatever the rounding.
pub const SPLIT_RATIO: f64 = 0.5;
const MAX_DEPTH: usize = 10;

/// Distance between two disjoint triangles.
pub fn triangle_distance(p: &[Point; 3], q: &[Point; 3]) -> f64 {
    let mut d = f64::INFINITY;
    for k in 0..3 {
        let (a, b) = (q[k], q[(k + 1) % 3]);
        for x in p {
            d = d.min(geometry::point_segment_distance(*x, a, b));
        }
        let (a, b) = (p[k], p[(k + 1) % 3]);
        for y in q {
            d = d.min(geometry::point_segment_distance(*y, a, b));
        }
    }
    d
}

/// Bernstein ellipse parameter for a singularity at relative distance `eta`.
fn ellipse(eta: f64) -> f64 {
    2.0 * eta + libm::sqrt(4.0 * eta * eta + 1.0)
}

/// Gauss points per direction at separation ratio `eta`, `q_far` at ratio one.
pub fn order_for(eta: f64, q_far: usize) -> usize {
    let n = q_far as f64 * libm::log(ellipse(1.0)) / libm::log(ellipse(eta.max(SPLIT_RATIO)));
    (libm::ceil(n - 1e-9) as usize).clamp(1, 4 * q_far.max(1))
}

#[derive(Clone, Copy)]
struct Piece {
    bary: [[f64; 3]; 3],
    pts: [Point; 3],
    area: f64,
    diam: f64,
}

impl Piece {
    fn whole(p: &[Point; 3]) -> Piece {
        Piece {
            bary: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            pts: *p,
            area: geometry::triangle_area(p),
            diam: geometry::triangle_diameter(p),
        }
    }

    /// Midpoint subdivision; physical points are filled in by `physical`.
    fn split(&self) -> [Piece; 4] {
        let mb = |i: usize, j: usize| {
            let (a, b) = (self.bary[i], self.bary[j]);
            [
                0.5 * (a[0] + b[0]),
                0.5 * (a[1] + b[1]),
                0.5 * (a[2] + b[2]),
            ]
        };
        let m01 = mb(0, 1);
        let m12 = mb(1, 2);
        let m20 = mb(2, 0);
        let b = self.bary;
        let sub = [
            [b[0], m01, m20],
            [m01, b[1], m12],
            [m20, m12, b[2]],
            [m12, m20, m01],
        ];
        let area = 0.25 * self.area;
        let diam = 0.5 * self.diam;
        sub.map(|bary| Piece {
            bary,
            pts: [[0.0; 2]; 3],
            area,
            diam,
        })
    }
}

/// Quadrature points of a piece: physical point, weight, barycentrics in the
/// original triangle.
fn piece_points(
    piece: &Piece,
    orig: &[Point; 3],
    rule: &TriangleRule,
    out: &mut Vec<(Point, f64, [f64; 3])>,
) {
    out.clear();
    let scale = 2.0 * piece.area;
    for (l, &w) in rule.bary.iter().zip(&rule.weights) {
        let mut b = [0.0; 3];
        for k in 0..3 {
            for c in 0..3 {
                b[c] += l[k] * piece.bary[k][c];
            }
        }
        out.push((geometry::from_barycentric(orig, b), w * scale, b));
    }
}

fn physical(piece: &mut Piece, orig: &[Point; 3]) {
    for k in 0..3 {
        piece.pts[k] = geometry::from_barycentric(orig, piece.bary[k]);
    }
}

/// Cache of collapsed rules by order.
pub struct RuleCache {
    rules: Vec<TriangleRule>,
}

impl RuleCache {
    pub fn new(max: usize) -> RuleCache {
        RuleCache {
            rules: (1..=max).map(TriangleRule::collapsed).collect(),
        }
    }

    pub fn get(&self, n: usize) -> &TriangleRule {
        &self.rules[(n - 1).min(self.rules.len() - 1)]
    }
}

#[derive(Default)]
pub struct NearScratch {
    xs: Vec<(Point, f64, [f64; 3])>,
    ys: Vec<(Point, f64, [f64; 3])>,
    stack: Vec<(Piece, Piece, usize)>,
}

/// Adds `∫_T1 ∫_T2 λ_a(x) λ_b(y) |x − y|^{−2−2s}` to `out[a][b]`.
pub fn cross_pair(
    p: &[Point; 3],
    q: &[Point; 3],
    s: f64,
    q_far: usize,
    cache: &RuleCache,
    scratch: &mut NearScratch,
    out: &mut [[f64; 3]; 3],
) {
    let expo = -1.0 - s;
    let NearScratch { xs, ys, stack } = scratch;
    stack.clear();
    stack.push((Piece::whole(p), Piece::whole(q), 0));
    while let Some((a, b, depth)) = stack.pop() {
        let eta = triangle_distance(&a.pts, &b.pts) / a.diam.max(b.diam);
        if eta < SPLIT_RATIO * (1.0 - 1e-9) && depth < MAX_DEPTH {
            if a.diam >= b.diam * (1.0 - 1e-12) {
                for mut c in a.split() {
                    physical(&mut c, p);
                    stack.push((c, b, depth + 1));
                }
            } else {
                for mut c in b.split() {
                    physical(&mut c, q);
                    stack.push((a, c, depth + 1));
                }
            }
            continue;
        }
        let rule = cache.get(order_for(eta, q_far));
        piece_points(&a, p, rule, xs);
        piece_points(&b, q, rule, ys);
        for &(x, wx, lx) in xs.iter() {
            let mut acc = [0.0; 3];
            for &(y, wy, ly) in ys.iter() {
                let d = geometry::sub(x, y);
                let k = wy * libm::exp(expo * libm::log(geometry::norm2(d)));
                acc[0] += k * ly[0];
                acc[1] += k * ly[1];
                acc[2] += k * ly[2];
            }
            for i in 0..3 {
                let c = wx * lx[i];
                for j in 0..3 {
                    out[i][j] += c * acc[j];
                }
            }
        }
    }
}

/// Moments of a disjoint pair: `xy[a][b] = ∬ λ_a(x) λ_b(y) K`,
/// `xx[a][b] = ∬ λ_a(x) λ_b(x) K` and `yy[a][b] = ∬ λ_a(y) λ_b(y) K`.
#[derive(Default, Clone, Debug)]
pub struct Moments {
    pub xy: [[f64; 3]; 3],
    pub xx: [[f64; 3]; 3],
    pub yy: [[f64; 3]; 3],
}

pub fn pair_moments(
    p: &[Point; 3],
    q: &[Point; 3],
    s: f64,
    q_far: usize,
    cache: &RuleCache,
    scratch: &mut NearScratch,
    out: &mut Moments,
) {
    let expo = -1.0 - s;
    let NearScratch { xs, ys, stack } = scratch;
    stack.clear();
    stack.push((Piece::whole(p), Piece::whole(q), 0));
    while let Some((a, b, depth)) = stack.pop() {
        let eta = triangle_distance(&a.pts, &b.pts) / a.diam.max(b.diam);
        if eta < SPLIT_RATIO * (1.0 - 1e-9) && depth < MAX_DEPTH {
            if a.diam >= b.diam * (1.0 - 1e-12) {
                for mut c in a.split() {
                    physical(&mut c, p);
                    stack.push((c, b, depth + 1));
                }
            } else {
                for mut c in b.split() {
                    physical(&mut c, q);
                    stack.push((a, c, depth + 1));
                }
            }
            continue;
        }
        // products λ_a λ_b in one variable raise the degree
        let rule = cache.get(order_for(eta, q_far) + 3);
        piece_points(&a, p, rule, xs);
        piece_points(&b, q, rule, ys);
        for &(x, wx, lx) in xs.iter() {
            for &(y, wy, ly) in ys.iter() {
                let k = wx * wy * libm::exp(expo * libm::log(geometry::norm2(geometry::sub(x, y))));
                for i in 0..3 {
                    for j in 0..3 {
                        out.xy[i][j] += k * lx[i] * ly[j];
                        out.xx[i][j] += k * lx[i] * lx[j];
                        out.yy[i][j] += k * ly[i] * ly[j];
                    }
                }
            }
        }
    }
}
