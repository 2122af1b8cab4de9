use std::sync::Arc;

use serde::Serialize;

use crate::mesh::{Marker, Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Degree {
    P1,
    P2,
}

impl Degree {
    pub fn order(self) -> usize {
        match self {
            Degree::P1 => 1,
            Degree::P2 => 2,
        }
    }

    /// Local basis functions per triangle (one component).
    pub fn local_dofs(self) -> usize {
        match self {
            Degree::P1 => 3,
            Degree::P2 => 6,
        }
    }
}

/// Affine map data of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub points: [Point; 3],
    /// Twice the area (positive for counterclockwise triangles).
    pub det: f64,
    /// Physical gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl CellGeometry {
    pub fn new(mesh: &Mesh, t: usize) -> Self {
        let points = mesh.triangle_points(t);
        let [p0, p1, p2] = points;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let grad_lambda = [
            [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
            [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
            [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
        ];
        CellGeometry {
            points,
            det,
            grad_lambda,
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    pub fn map(&self, lam: [f64; 3]) -> Point {
        let [p0, p1, p2] = self.points;
        [
            lam[0] * p0[0] + lam[1] * p1[0] + lam[2] * p2[0],
            lam[0] * p0[1] + lam[1] * p1[1] + lam[2] * p2[1],
        ]
    }
}

/// Local P2 edge `k` joins local vertices `k` and `k + 1 mod 3`.
const EDGE_VERTS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Values of the local basis at barycentric point `lam`.
pub fn shape_values(degree: Degree, lam: [f64; 3]) -> [f64; 6] {
    let mut out = [0.0; 6];
    match degree {
        Degree::P1 => out[..3].copy_from_slice(&lam),
        Degree::P2 => {
            for k in 0..3 {
                out[k] = lam[k] * (2.0 * lam[k] - 1.0);
                let (a, b) = EDGE_VERTS[k];
                out[3 + k] = 4.0 * lam[a] * lam[b];
            }
        }
    }
    out
}

/// Physical gradients of the local basis at barycentric point `lam`.
pub fn shape_gradients(degree: Degree, lam: [f64; 3], gl: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    match degree {
        Degree::P1 => out[..3].copy_from_slice(gl),
        Degree::P2 => {
            for k in 0..3 {
                let s = 4.0 * lam[k] - 1.0;
                out[k] = [s * gl[k][0], s * gl[k][1]];
                let (a, b) = EDGE_VERTS[k];
                out[3 + k] = [
                    4.0 * (lam[a] * gl[b][0] + lam[b] * gl[a][0]),
                    4.0 * (lam[a] * gl[b][1] + lam[b] * gl[a][1]),
                ];
            }
        }
    }
    out
}

/// A scalar dof whose support point lies on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryNode {
    /// Scalar dof index.
    pub dof: usize,
    pub point: Point,
    /// Markers of the boundary edges containing the point.
    pub markers: Vec<Marker>,
}

/// Continuous Lagrange space of degree 1 or 2 with one or two components.
///
/// Scalar dofs: vertices first, then edge midpoints (P2). Component `c` of a
/// vector space occupies the block `c * nscalar .. (c + 1) * nscalar`.
#[derive(Debug)]
pub struct Space {
    mesh: Arc<Mesh>,
    degree: Degree,
    components: usize,
    nscalar: usize,
    cell_dofs: Vec<usize>,
    support: Vec<Point>,
    boundary: Vec<BoundaryNode>,
}

impl Space {
    pub fn scalar(mesh: Arc<Mesh>, degree: Degree) -> Self {
        Self::new(mesh, degree, 1)
    }

    pub fn vector(mesh: Arc<Mesh>, degree: Degree) -> Self {
        Self::new(mesh, degree, 2)
    }

    fn new(mesh: Arc<Mesh>, degree: Degree, components: usize) -> Self {
        let nv = mesh.num_vertices();
        let nloc = degree.local_dofs();
        let nscalar = match degree {
            Degree::P1 => nv,
            Degree::P2 => nv + mesh.num_edges(),
        };
        let mut cell_dofs = Vec::with_capacity(nloc * mesh.num_triangles());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            cell_dofs.extend_from_slice(tri);
            if degree == Degree::P2 {
                cell_dofs.extend(mesh.triangle_edges(t).iter().map(|e| nv + e));
            }
        }
        let mut support: Vec<Point> = mesh.vertices().to_vec();
        if degree == Degree::P2 {
            support.extend(mesh.edges().iter().map(|&[a, b]| {
                let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
            }));
        }

        let mut markers: Vec<Vec<Marker>> = vec![Vec::new(); nscalar];
        for be in mesh.boundary_edges() {
            for &v in &be.vertices {
                markers[v].push(be.marker);
            }
            if degree == Degree::P2 {
                let e = mesh.triangle_edges(be.triangle)[be.local_edge];
                markers[nv + e].push(be.marker);
            }
        }
        let boundary = markers
            .into_iter()
            .enumerate()
            .filter(|(_, m)| !m.is_empty())
            .map(|(dof, markers)| BoundaryNode {
                dof,
                point: support[dof],
                markers,
            })
            .collect();

        Space {
            mesh,
            degree,
            components,
            nscalar,
            cell_dofs,
            support,
            boundary,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Dofs of one component.
    pub fn nscalar(&self) -> usize {
        self.nscalar
    }

    pub fn ndofs(&self) -> usize {
        self.nscalar * self.components
    }

    pub fn local_dofs(&self) -> usize {
        self.degree.local_dofs()
    }

    /// Scalar dof indices of triangle `t`, in local basis order.
    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        let n = self.local_dofs();
        &self.cell_dofs[t * n..(t + 1) * n]
    }

    /// Global index of scalar dof `s` in component `c`.
    pub fn dof(&self, component: usize, s: usize) -> usize {
        component * self.nscalar + s
    }

    /// Support point of each scalar dof.
    pub fn support_points(&self) -> &[Point] {
        &self.support
    }

    pub fn boundary_nodes(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    /// All boundary dofs, every component, sorted.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        (0..self.components)
            .flat_map(|c| self.boundary.iter().map(move |n| self.dof(c, n.dof)))
            .collect()
    }
}
