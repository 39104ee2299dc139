//! Conforming triangulations of convex polygons and the unit disk, graded
//! towards the boundary, together with the star and ring indices used by
//! assembly and interpolation.

mod locate;
mod refine;
mod star;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{self, Point};

pub use locate::PointLocator;
pub use star::StarIndex;

/// Largest accepted ratio `h_T / rho_T`.
pub const SIGMA_MAX: f64 = 10.0;
/// Accepted range for the grading constants `h_T / l(barycenter)`.
pub const GRADING_RANGE: (f64, f64) = (0.25, 4.0);
/// Hard cap on the number of triangles a mesh build may create.
pub const MAX_TRIANGLES: usize = 4_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid grading parameters: h = {h}, mu = {mu}")]
    InvalidGrading { h: f64, mu: f64 },
    #[error("h too large to grade (fewer than one boundary layer)")]
    TooCoarse,
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(&'static str),
    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),
    #[error("vertex index out of range in triangle {0}")]
    BadIndex(usize),
    #[error("non-conforming mesh: {0}")]
    NonConforming(&'static str),
    #[error("shape regularity violated: sigma = {sigma}")]
    ShapeRegularity { sigma: f64 },
    #[error("grading constants out of range: [{lower}, {upper}]")]
    GradingConstants { lower: f64, upper: f64 },
    #[error("mesh would exceed {0} triangles")]
    TooLarge(usize),
    #[error("vertex {0} is not an interior vertex")]
    NotInterior(usize),
    #[error("degenerate star at vertex {0}")]
    DegenerateStar(usize),
}

/// The computational domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// Convex polygon with counter-clockwise vertices.
    Polygon(Vec<Point>),
    /// Disk, approximated by inscribed polygons whose vertices lie on the circle.
    Disk { center: Point, radius: f64 },
}

impl Domain {
    /// Convex polygon; the orientation is normalised to counter-clockwise.
    pub fn polygon(mut vertices: Vec<Point>) -> Result<Domain, MeshError> {
        if vertices.len() < 3 {
            return Err(MeshError::DegeneratePolygon("fewer than three vertices"));
        }
        if vertices
            .iter()
            .any(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(MeshError::DegeneratePolygon("non-finite vertex"));
        }
        let area = geometry::polygon_signed_area(&vertices);
        let scale = vertices
            .iter()
            .map(|p| p[0].abs().max(p[1].abs()))
            .fold(0.0, f64::max);
        if !(area.abs() > 1e-12 * scale * scale) {
            return Err(MeshError::DegeneratePolygon("zero area"));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if geometry::dist(a, b) == 0.0 {
                return Err(MeshError::DegeneratePolygon("repeated vertex"));
            }
            if geometry::orient(a, b, c) <= 0.0 {
                return Err(MeshError::DegeneratePolygon("not strictly convex"));
            }
        }
        Ok(Domain::Polygon(vertices))
    }

    pub fn unit_disk() -> Domain {
        Domain::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    /// `[0, a] x [0, b]`.
    pub fn rectangle(a: f64, b: f64) -> Result<Domain, MeshError> {
        Domain::polygon(alloc::vec![[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]])
    }

    /// Distance from an interior point to the boundary (negative outside).
    pub fn distance_to_boundary(&self, x: Point) -> f64 {
        match self {
            Domain::Disk { center, radius } => radius - geometry::dist(x, *center),
            Domain::Polygon(v) => {
                let n = v.len();
                let mut d = f64::INFINITY;
                for i in 0..n {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let e = geometry::sub(b, a);
                    d = d.min(geometry::cross(e, geometry::sub(x, a)) / geometry::norm(e));
                }
                d
            }
        }
    }

    fn reference_point(&self) -> Point {
        match self {
            Domain::Disk { center, .. } => *center,
            Domain::Polygon(v) => {
                let mut c = [0.0, 0.0];
                for p in v {
                    c = geometry::add(c, *p);
                }
                geometry::scale(c, 1.0 / v.len() as f64)
            }
        }
    }

    /// A lower bound for the inradius.
    pub fn inradius_bound(&self) -> f64 {
        self.distance_to_boundary(self.reference_point())
    }

    fn initial_mesh(&self) -> (Vec<Point>, Vec<[usize; 3]>) {
        let c = self.reference_point();
        let ring: Vec<Point> = match self {
            Domain::Polygon(v) => v.clone(),
            Domain::Disk { center, radius } => (0..8)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / 8.0;
                    [
                        center[0] + radius * libm::cos(t),
                        center[1] + radius * libm::sin(t),
                    ]
                })
                .collect(),
        };
        let m = ring.len();
        let mut vertices = alloc::vec![c];
        vertices.extend_from_slice(&ring);
        let triangles = (0..m).map(|k| [0, 1 + k, 1 + (k + 1) % m]).collect();
        (vertices, triangles)
    }

    /// Projects a new boundary point onto the exact boundary.
    fn project_boundary(&self, x: Point) -> Point {
        match self {
            Domain::Polygon(_) => x,
            Domain::Disk { center, radius } => {
                let d = geometry::sub(x, *center);
                geometry::add(*center, geometry::scale(d, radius / geometry::norm(d)))
            }
        }
    }
}

/// Mesh size law `l(x) = h max(dist(x, boundary), h^mu)^((mu - 1) / mu)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grading {
    pub h: f64,
    pub mu: f64,
}

impl Grading {
    pub fn new(h: f64, mu: f64) -> Result<Grading, MeshError> {
        if !(h.is_finite() && h > 0.0 && mu.is_finite() && (1.0..=2.0).contains(&mu)) {
            return Err(MeshError::InvalidGrading { h, mu });
        }
        Ok(Grading { h, mu })
    }

    /// Target element size at distance `delta` from the boundary.
    pub fn size(&self, delta: f64) -> f64 {
        let floor = libm::pow(self.h, self.mu);
        self.h * libm::pow(delta.max(floor), (self.mu - 1.0) / self.mu)
    }
}

/// A conforming triangulation with counter-clockwise triangles. Interior
/// vertices carry degrees of freedom numbered by increasing distance to the
/// boundary.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    on_boundary: Vec<bool>,
    boundary_loop: Vec<usize>,
    vertex_dof: Vec<usize>,
    dof_vertex: Vec<usize>,
    grading: Option<Grading>,
    domain: Option<Domain>,
}

/// Marker for vertices without a degree of freedom.
pub const NO_DOF: usize = usize::MAX;

impl TriangleMesh {
    /// Builds a mesh from raw vertices and triangles, checking conformity.
    /// Clockwise triangles are reoriented.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<TriangleMesh, MeshError> {
        Self::assemble(vertices, triangles, None, None)
    }

    fn assemble(
        vertices: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        grading: Option<Grading>,
        domain: Option<Domain>,
    ) -> Result<TriangleMesh, MeshError> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(MeshError::BadIndex(t));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::DegenerateTriangle(t));
            }
            let o = geometry::orient(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(o.abs() > 0.0) || !o.is_finite() {
                return Err(MeshError::DegenerateTriangle(t));
            }
            if o < 0.0 {
                tri.swap(1, 2);
            }
        }
        let (on_boundary, boundary_loop) = boundary_structure(&vertices, &triangles)?;
        let mut mesh = TriangleMesh {
            vertices,
            triangles,
            on_boundary,
            boundary_loop,
            vertex_dof: Vec::new(),
            dof_vertex: Vec::new(),
            grading,
            domain,
        };
        mesh.number_dofs();
        Ok(mesh)
    }

    fn number_dofs(&mut self) {
        let mut interior: Vec<(f64, usize)> = (0..self.vertices.len())
            .filter(|&v| !self.on_boundary[v])
            .map(|v| (self.boundary_distance(self.vertices[v]), v))
            .collect();
        interior.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        self.vertex_dof = alloc::vec![NO_DOF; self.vertices.len()];
        self.dof_vertex = interior.iter().map(|&(_, v)| v).collect();
        for (d, &v) in self.dof_vertex.iter().enumerate() {
            self.vertex_dof[v] = d;
        }
    }

    /// Distance to the boundary of the exact domain when known, otherwise to
    /// the boundary of the triangulated polygon.
    pub fn boundary_distance(&self, x: Point) -> f64 {
        if let Some(d) = &self.domain {
            return d.distance_to_boundary(x);
        }
        let n = self.boundary_loop.len();
        let mut d = f64::INFINITY;
        for k in 0..n {
            let a = self.vertices[self.boundary_loop[k]];
            let b = self.vertices[self.boundary_loop[(k + 1) % n]];
            d = d.min(geometry::point_segment_distance(x, a, b));
        }
        d
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn ndof(&self) -> usize {
        self.dof_vertex.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.on_boundary
    }

    /// Boundary vertices in counter-clockwise order.
    pub fn boundary_loop(&self) -> &[usize] {
        &self.boundary_loop
    }

    /// Degree of freedom of vertex `v`, if interior.
    pub fn dof(&self, v: usize) -> Option<usize> {
        let d = self.vertex_dof[v];
        (d != NO_DOF).then_some(d)
    }

    /// Vertex carrying degree of freedom `d`.
    pub fn dof_vertex(&self, d: usize) -> usize {
        self.dof_vertex[d]
    }

    pub fn dof_vertices(&self) -> &[usize] {
        &self.dof_vertex
    }

    pub fn grading(&self) -> Option<Grading> {
        self.grading
    }

    pub fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| geometry::triangle_area(&self.triangle_points(t)))
            .sum()
    }

    /// Edge hash check: every edge is shared by at most two triangles with
    /// opposite orientations and the boundary edges form one simple closed
    /// loop enclosing the total triangle area.
    pub fn check_conforming(&self) -> Result<(), MeshError> {
        boundary_structure(&self.vertices, &self.triangles).map(|_| ())
    }

    /// Nodal values of a vector over degrees of freedom, zero on the boundary.
    pub fn vertex_values(&self, dof_values: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.vertices.len()];
        for (d, &v) in self.dof_vertex.iter().enumerate() {
            out[v] = dof_values[d];
        }
        out
    }
}

fn boundary_structure(
    vertices: &[Point],
    triangles: &[[usize; 3]],
) -> Result<(Vec<bool>, Vec<usize>), MeshError> {
    // directed edge -> use count
    let mut edges: BTreeMap<(usize, usize), u8> = BTreeMap::new();
    for tri in triangles {
        for k in 0..3 {
            let e = (tri[k], tri[(k + 1) % 3]);
            let c = edges.entry(e).or_insert(0);
            *c += 1;
            if *c > 1 {
                return Err(MeshError::NonConforming(
                    "edge repeated with equal orientation",
                ));
            }
        }
    }
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for &(a, b) in edges.keys() {
        if !edges.contains_key(&(b, a)) && next.insert(a, b).is_some() {
            return Err(MeshError::NonConforming(
                "boundary vertex with several boundary edges",
            ));
        }
    }
    if next.len() < 3 {
        return Err(MeshError::NonConforming("no closed boundary"));
    }
    let start = *next.keys().next().expect("non-empty");
    let mut boundary_loop = alloc::vec![start];
    let mut cur = next[&start];
    while cur != start {
        if boundary_loop.len() > next.len() {
            return Err(MeshError::NonConforming("boundary is not a simple loop"));
        }
        boundary_loop.push(cur);
        cur = *next
            .get(&cur)
            .ok_or(MeshError::NonConforming("open boundary chain"))?;
    }
    if boundary_loop.len() != next.len() {
        return Err(MeshError::NonConforming("boundary has several components"));
    }
    let poly: Vec<Point> = boundary_loop.iter().map(|&v| vertices[v]).collect();
    let enclosed = geometry::polygon_signed_area(&poly);
    let total: f64 = triangles
        .iter()
        .map(|t| geometry::triangle_area(&[vertices[t[0]], vertices[t[1]], vertices[t[2]]]))
        .sum();
    if (enclosed - total).abs() > 1e-9 * total {
        return Err(MeshError::NonConforming("triangles overlap or leave holes"));
    }
    let mut on_boundary = alloc::vec![false; vertices.len()];
    for &v in &boundary_loop {
        on_boundary[v] = true;
    }
    let mut used = alloc::vec![false; vertices.len()];
    for t in triangles {
        for &v in t {
            used[v] = true;
        }
    }
    if used.iter().any(|u| !u) {
        return Err(MeshError::NonConforming("unused vertex"));
    }
    Ok((on_boundary, boundary_loop))
}

/// Builds the graded mesh of `domain` with longest-edge bisection until every
/// triangle satisfies `h_T <= l(barycenter)`.
pub fn build_graded_mesh(domain: &Domain, grading: Grading) -> Result<TriangleMesh, MeshError> {
    let grading = Grading::new(grading.h, grading.mu)?;
    let floor = libm::pow(grading.h, grading.mu);
    if domain.inradius_bound() < 2.0 * floor || grading.h >= domain.inradius_bound() {
        return Err(MeshError::TooCoarse);
    }
    let (vertices, triangles) = domain.initial_mesh();
    let mut r = refine::Refiner::new(vertices, triangles, domain);
    r.grade(
        |x| grading.size(domain.distance_to_boundary(x)),
        MAX_TRIANGLES,
    )?;
    let (vertices, triangles) = r.finish();
    let mesh = TriangleMesh::assemble(vertices, triangles, Some(grading), Some(domain.clone()))?;
    let stats = mesh_stats(&mesh);
    if stats.sigma > SIGMA_MAX {
        return Err(MeshError::ShapeRegularity { sigma: stats.sigma });
    }
    if let Some((lower, upper)) = stats.grading_constants {
        if lower < GRADING_RANGE.0 || upper > GRADING_RANGE.1 {
            return Err(MeshError::GradingConstants { lower, upper });
        }
    }
    Ok(mesh)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshStats {
    pub nvertices: usize,
    pub ntriangles: usize,
    pub ndof: usize,
    pub h_min: f64,
    pub h_max: f64,
    /// `max h_T / rho_T`.
    pub sigma: f64,
    /// `(min, max)` of `h_T / l(barycenter)` for graded meshes.
    pub grading_constants: Option<(f64, f64)>,
    pub boundary_segments: usize,
    pub max_boundary_segment: f64,
}

pub fn mesh_stats(mesh: &TriangleMesh) -> MeshStats {
    let mut h_min = f64::INFINITY;
    let mut h_max = 0.0f64;
    let mut sigma = 0.0f64;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for t in 0..mesh.num_triangles() {
        let p = mesh.triangle_points(t);
        let h = geometry::triangle_diameter(&p);
        h_min = h_min.min(h);
        h_max = h_max.max(h);
        sigma = sigma.max(h / geometry::triangle_inball_diameter(&p));
        if let Some(g) = mesh.grading {
            let l = g.size(mesh.boundary_distance(geometry::centroid(&p)));
            lo = lo.min(h / l);
            hi = hi.max(h / l);
        }
    }
    let bl = mesh.boundary_loop();
    let mut max_seg = 0.0f64;
    for k in 0..bl.len() {
        let a = mesh.vertices[bl[k]];
        let b = mesh.vertices[bl[(k + 1) % bl.len()]];
        max_seg = max_seg.max(geometry::dist(a, b));
    }
    MeshStats {
        nvertices: mesh.num_vertices(),
        ntriangles: mesh.num_triangles(),
        ndof: mesh.ndof(),
        h_min,
        h_max,
        sigma,
        grading_constants: mesh.grading.map(|_| (lo, hi)),
        boundary_segments: bl.len(),
        max_boundary_segment: max_seg,
    }
}

/// Radius of the largest ball centred at interior vertex `v` contained in its
/// star, i.e. the distance from `x_v` to the link of the star.
pub fn maximal_ball(mesh: &TriangleMesh, star: &StarIndex, v: usize) -> Result<f64, MeshError> {
    if v >= mesh.num_vertices() || mesh.is_boundary(v) {
        return Err(MeshError::NotInterior(v));
    }
    let x = mesh.vertices[v];
    let mut rho = f64::INFINITY;
    let tris = star.vertex_star(v);
    if tris.len() < 3 {
        return Err(MeshError::DegenerateStar(v));
    }
    for &t in tris {
        let tri = mesh.triangles[t];
        let k = tri
            .iter()
            .position(|&w| w == v)
            .ok_or(MeshError::DegenerateStar(v))?;
        let a = mesh.vertices[tri[(k + 1) % 3]];
        let b = mesh.vertices[tri[(k + 2) % 3]];
        rho = rho.min(geometry::point_segment_distance(x, a, b));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(MeshError::DegenerateStar(v));
    }
    Ok(rho)
}
