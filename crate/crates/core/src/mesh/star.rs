use alloc::vec::Vec;

use super::TriangleMesh;

/// Vertex stars and first and second element rings of a mesh.
#[derive(Clone, Debug)]
pub struct StarIndex {
    vertex_star: Vec<Vec<usize>>,
    ring1: Vec<Vec<usize>>,
    ring2: Vec<Vec<usize>>,
    boundary_element: Vec<bool>,
}

impl StarIndex {
    pub fn new(mesh: &TriangleMesh) -> StarIndex {
        let mut vertex_star = alloc::vec![Vec::new(); mesh.num_vertices()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for &v in tri {
                vertex_star[v].push(t);
            }
        }
        let ring1: Vec<Vec<usize>> = mesh
            .triangles()
            .iter()
            .map(|tri| union(tri.iter().map(|&v| vertex_star[v].as_slice())))
            .collect();
        let ring2: Vec<Vec<usize>> = ring1
            .iter()
            .map(|r| {
                let mut verts: Vec<usize> = r.iter().flat_map(|&t| mesh.triangles()[t]).collect();
                verts.sort_unstable();
                verts.dedup();
                union(verts.iter().map(|&v| vertex_star[v].as_slice()))
            })
            .collect();
        let boundary_element = ring1
            .iter()
            .map(|r| {
                r.iter()
                    .any(|&t| mesh.triangles()[t].iter().any(|&v| mesh.is_boundary(v)))
            })
            .collect();
        StarIndex {
            vertex_star,
            ring1,
            ring2,
            boundary_element,
        }
    }

    /// Triangles containing vertex `v`.
    pub fn vertex_star(&self, v: usize) -> &[usize] {
        &self.vertex_star[v]
    }

    /// Triangles sharing at least one vertex with `t` (including `t`), sorted.
    pub fn ring1(&self, t: usize) -> &[usize] {
        &self.ring1[t]
    }

    /// Triangles meeting the first ring of `t`, sorted.
    pub fn ring2(&self, t: usize) -> &[usize] {
        &self.ring2[t]
    }

    /// Whether the first ring of `t` touches the boundary.
    pub fn is_boundary_element(&self, t: usize) -> bool {
        self.boundary_element[t]
    }
}

fn union<'a, I: Iterator<Item = &'a [usize]>>(lists: I) -> Vec<usize> {
    let mut out: Vec<usize> = lists.flat_map(|l| l.iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out
}
