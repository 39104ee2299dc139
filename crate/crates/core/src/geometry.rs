//! Small planar geometry helpers on `[f64; 2]` points.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, t: f64) -> Point {
    [a[0] * t, a[1] * t]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm2(a: Point) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: Point) -> f64 {
    libm::sqrt(norm2(a))
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Twice the signed area of `(a, b, c)`, positive for counter-clockwise order.
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

#[inline]
pub fn triangle_area(p: &[Point; 3]) -> f64 {
    0.5 * libm::fabs(orient(p[0], p[1], p[2]))
}

#[inline]
pub fn centroid(p: &[Point; 3]) -> Point {
    [
        (p[0][0] + p[1][0] + p[2][0]) / 3.0,
        (p[0][1] + p[1][1] + p[2][1]) / 3.0,
    ]
}

/// Longest edge length.
pub fn triangle_diameter(p: &[Point; 3]) -> f64 {
    let a = norm2(sub(p[1], p[0]));
    let b = norm2(sub(p[2], p[1]));
    let c = norm2(sub(p[0], p[2]));
    libm::sqrt(a.max(b).max(c))
}

/// Diameter of the inscribed circle.
pub fn triangle_inball_diameter(p: &[Point; 3]) -> f64 {
    let per = dist(p[0], p[1]) + dist(p[1], p[2]) + dist(p[2], p[0]);
    4.0 * triangle_area(p) / per
}

/// Distance from `x` to the segment `[a, b]`.
pub fn point_segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let l2 = norm2(ab);
    if l2 == 0.0 {
        return dist(x, a);
    }
    let t = (dot(sub(x, a), ab) / l2).clamp(0.0, 1.0);
    dist(x, add(a, scale(ab, t)))
}

/// Gradients of the three barycentric coordinates of a non-degenerate triangle.
pub fn barycentric_gradients(p: &[Point; 3]) -> [Point; 3] {
    let d = orient(p[0], p[1], p[2]);
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let a = p[(k + 1) % 3];
        let b = p[(k + 2) % 3];
        // rotate the opposite edge by -90 degrees
        g[k] = [(a[1] - b[1]) / d, (b[0] - a[0]) / d];
    }
    g
}

/// Barycentric coordinates of `x` with respect to `p`.
pub fn barycentric(p: &[Point; 3], x: Point) -> [f64; 3] {
    let d = orient(p[0], p[1], p[2]);
    let l0 = orient(x, p[1], p[2]) / d;
    let l1 = orient(p[0], x, p[2]) / d;
    [l0, l1, 1.0 - l0 - l1]
}

/// Point with barycentric coordinates `l` in `p`.
#[inline]
pub fn from_barycentric(p: &[Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}

/// Signed area of a closed polygon (counter-clockwise positive).
pub fn polygon_signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        a += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * a
}

/// Parameter `t > 0` at which the ray `x + t e` crosses the segment `[a, b]`,
/// if it does.
#[inline]
pub fn ray_segment(x: Point, e: Point, a: Point, b: Point) -> Option<f64> {
    let ab = sub(b, a);
    let den = cross(e, ab);
    if den == 0.0 {
        return None;
    }
    let ax = sub(a, x);
    let t = cross(ax, ab) / den;
    let u = cross(ax, e) / den;
    if t > 0.0 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}
