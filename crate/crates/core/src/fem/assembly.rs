//! Global assembly of the bilinear and linear forms used by the drivers.
//!
//! Matrix conventions, with `vspace` a P2 vector space (basis `φ`) and
//! `pspace` a P1 scalar space (basis `ψ`):
//!
//! * stiffness `A[i, j] = ∫ ∇φ_j : ∇φ_i`
//! * divergence `B[q, u] = ∫ (div φ_u) ψ_q`
//! * gradient `G[u, q] = ∫ φ_u · ∇ψ_q`
//! * boundary flux `C[u, q] = ∮ (φ_u · ν) ψ_q`
//!
//! so that `G = -Bᵀ + C` holds to rounding.

use super::quadrature::{EdgeRule, QuadratureRule};
use super::space::{shape_gradients, shape_values, CellGeometry, Space};
use crate::error::{Error, Result};
use crate::mesh::{Marker, Point};
use crate::sparse::CsrMatrix;

/// Scalar or vector stiffness `∫ ∇u : ∇v`.
pub fn assemble_stiffness(space: &Space) -> CsrMatrix {
    let quad = QuadratureRule::degree5();
    let mesh = space.mesh();
    let degree = space.degree();
    let nloc = space.local_dofs();
    let mut triplets = Vec::with_capacity(mesh.num_triangles() * nloc * nloc * space.components());
    let mut local = [[0.0; 6]; 6];
    for t in 0..mesh.num_triangles() {
        let geo = CellGeometry::new(mesh, t);
        for row in local.iter_mut() {
            row.fill(0.0);
        }
        for (lam, w) in quad.iter() {
            let g = shape_gradients(degree, lam, &geo.grad_lambda);
            let wd = w * geo.det;
            for i in 0..nloc {
                for j in i..nloc {
                    local[i][j] += wd * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
        for i in 0..nloc {
            for j in 0..i {
                local[i][j] = local[j][i];
            }
        }
        let dofs = space.cell_dofs(t);
        for c in 0..space.components() {
            for i in 0..nloc {
                for j in 0..nloc {
                    triplets.push((space.dof(c, dofs[i]), space.dof(c, dofs[j]), local[i][j]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(space.ndofs(), space.ndofs(), &triplets)
}

fn check_pair(vspace: &Space, pspace: &Space) {
    assert_eq!(vspace.components(), 2, "velocity space must be vector valued");
    assert_eq!(pspace.components(), 1, "pressure space must be scalar");
    assert!(
        std::sync::Arc::ptr_eq(vspace.mesh(), pspace.mesh()),
        "spaces must share a mesh"
    );
}

/// `B[q, u] = ∫ (div φ_u) ψ_q`, shape `pspace.ndofs() x vspace.ndofs()`.
pub fn assemble_div_coupling(vspace: &Space, pspace: &Space) -> CsrMatrix {
    check_pair(vspace, pspace);
    let quad = QuadratureRule::degree5();
    let mesh = vspace.mesh();
    let (nu, nq) = (vspace.local_dofs(), pspace.local_dofs());
    let mut triplets = Vec::new();
    for t in 0..mesh.num_triangles() {
        let geo = CellGeometry::new(mesh, t);
        let mut local = [[[0.0; 6]; 2]; 6];
        for (lam, w) in quad.iter() {
            let psi = shape_values(pspace.degree(), lam);
            let dphi = shape_gradients(vspace.degree(), lam, &geo.grad_lambda);
            let wd = w * geo.det;
            for q in 0..nq {
                for c in 0..2 {
                    for u in 0..nu {
                        local[q][c][u] += wd * psi[q] * dphi[u][c];
                    }
                }
            }
        }
        let (vd, pd) = (vspace.cell_dofs(t), pspace.cell_dofs(t));
        for q in 0..nq {
            for c in 0..2 {
                for u in 0..nu {
                    triplets.push((pd[q], vspace.dof(c, vd[u]), local[q][c][u]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(pspace.ndofs(), vspace.ndofs(), &triplets)
}

/// `G[u, q] = ∫ φ_u · ∇ψ_q` by direct quadrature.
pub fn assemble_grad_coupling(vspace: &Space, pspace: &Space) -> CsrMatrix {
    check_pair(vspace, pspace);
    let quad = QuadratureRule::degree5();
    let mesh = vspace.mesh();
    let (nu, nq) = (vspace.local_dofs(), pspace.local_dofs());
    let mut triplets = Vec::new();
    for t in 0..mesh.num_triangles() {
        let geo = CellGeometry::new(mesh, t);
        let mut local = [[[0.0; 6]; 2]; 6];
        for (lam, w) in quad.iter() {
            let phi = shape_values(vspace.degree(), lam);
            let dpsi = shape_gradients(pspace.degree(), lam, &geo.grad_lambda);
            let wd = w * geo.det;
            for u in 0..nu {
                for c in 0..2 {
                    for q in 0..nq {
                        local[u][c][q] += wd * phi[u] * dpsi[q][c];
                    }
                }
            }
        }
        let (vd, pd) = (vspace.cell_dofs(t), pspace.cell_dofs(t));
        for u in 0..nu {
            for c in 0..2 {
                for q in 0..nq {
                    triplets.push((vspace.dof(c, vd[u]), pd[q], local[u][c][q]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(vspace.ndofs(), pspace.ndofs(), &triplets)
}

/// `C[u, q] = ∮ (φ_u · ν) ψ_q` over the boundary edges.
pub fn assemble_boundary_flux_coupling(vspace: &Space, pspace: &Space) -> CsrMatrix {
    check_pair(vspace, pspace);
    let rule = EdgeRule::gauss3();
    let mesh = vspace.mesh();
    let (nu, nq) = (vspace.local_dofs(), pspace.local_dofs());
    let mut triplets = Vec::new();
    for be in mesh.boundary_edges() {
        let len = be.length(mesh);
        let t = be.triangle;
        let (vd, pd) = (vspace.cell_dofs(t), pspace.cell_dofs(t));
        for (s, w) in rule.iter() {
            let lam = edge_barycentric(be.local_edge, s);
            let phi = shape_values(vspace.degree(), lam);
            let psi = shape_values(pspace.degree(), lam);
            for u in 0..nu {
                for c in 0..2 {
                    for q in 0..nq {
                        let v = w * len * phi[u] * be.normal[c] * psi[q];
                        if v != 0.0 {
                            triplets.push((vspace.dof(c, vd[u]), pd[q], v));
                        }
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(vspace.ndofs(), pspace.ndofs(), &triplets)
}

/// Gradient block built as `-Bᵀ + C` from the divergence and boundary flux
/// couplings. Agrees with [`assemble_grad_coupling`] to rounding and makes
/// `pᵀ B u = -uᵀ G p` exact whenever `u` vanishes on the boundary.
pub fn assemble_grad_coupling_transposed(vspace: &Space, pspace: &Space) -> CsrMatrix {
    let b = assemble_div_coupling(vspace, pspace);
    let c = assemble_boundary_flux_coupling(vspace, pspace);
    b.transpose().scale_add(-1.0, &c).expect("blocks share a shape")
}

/// Barycentric coordinates of the point at parameter `s` along local edge `k`.
pub(crate) fn edge_barycentric(k: usize, s: f64) -> [f64; 3] {
    let mut lam = [0.0; 3];
    lam[k] = 1.0 - s;
    lam[(k + 1) % 3] = s;
    lam
}

/// `∫ ψ_q` for a scalar space.
pub fn assemble_mass_vector(space: &Space) -> Vec<f64> {
    assemble_load_scalar(space, &QuadratureRule::degree5(), |_| 1.0)
}

/// Scalar mass matrix `∫ ψ_i ψ_j`.
pub fn assemble_mass(space: &Space) -> CsrMatrix {
    assert_eq!(space.components(), 1);
    let quad = QuadratureRule::degree5();
    let mesh = space.mesh();
    let nloc = space.local_dofs();
    let mut triplets = Vec::new();
    for t in 0..mesh.num_triangles() {
        let geo = CellGeometry::new(mesh, t);
        let mut local = [[0.0; 6]; 6];
        for (lam, w) in quad.iter() {
            let phi = shape_values(space.degree(), lam);
            for i in 0..nloc {
                for j in 0..nloc {
                    local[i][j] += w * geo.det * phi[i] * phi[j];
                }
            }
        }
        let dofs = space.cell_dofs(t);
        for i in 0..nloc {
            for j in 0..nloc {
                triplets.push((dofs[i], dofs[j], local[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(space.ndofs(), space.ndofs(), &triplets)
}

fn check_degree(space: &Space, quad: &QuadratureRule) {
    assert!(
        quad.degree() >= space.degree().order() + 2,
        "quadrature of degree {} too weak for a P{} load",
        quad.degree(),
        space.degree().order()
    );
}

/// `∫ f ψ_i` for a scalar space.
pub fn assemble_load_scalar(space: &Space, quad: &QuadratureRule, f: impl Fn(Point) -> f64) -> Vec<f64> {
    assert_eq!(space.components(), 1, "scalar load on a vector space");
    check_degree(space, quad);
    let mesh = space.mesh();
    let mut out = vec![0.0; space.ndofs()];
    for t in 0..mesh.num_triangles() {
        let geo = CellGeometry::new(mesh, t);
        let dofs = space.cell_dofs(t);
        for (lam, w) in quad.iter() {
            let fx = f(geo.map(lam)) * w * geo.det;
            let phi = shape_values(space.degree(), lam);
            for (&d, p) in dofs.iter().zip(&phi) {
                out[d] += fx * p;
            }
        }
    }
    out
}

/// `∫ f · φ_i` for a vector space.
pub fn assemble_load_vector(space: &Space, quad: &QuadratureRule, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
    assert_eq!(space.components(), 2, "vector load on a scalar space");
    check_degree(space, quad);
    let mesh = space.mesh();
    let mut out = vec![0.0; space.ndofs()];
    for t in 0..mesh.num_triangles() {
        let geo = CellGeometry::new(mesh, t);
        let dofs = space.cell_dofs(t);
        for (lam, w) in quad.iter() {
            let fx = f(geo.map(lam));
            let wd = w * geo.det;
            let phi = shape_values(space.degree(), lam);
            for (&d, p) in dofs.iter().zip(&phi) {
                for (c, fc) in fx.iter().enumerate() {
                    out[space.dof(c, d)] += wd * fc * p;
                }
            }
        }
    }
    out
}

/// `∫ F · ∇ψ_q` for a scalar space.
pub fn assemble_grad_load(pspace: &Space, quad: &QuadratureRule, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
    assert_eq!(pspace.components(), 1, "gradient load on a vector space");
    check_degree(pspace, quad);
    let mesh = pspace.mesh();
    let mut out = vec![0.0; pspace.ndofs()];
    for t in 0..mesh.num_triangles() {
        let geo = CellGeometry::new(mesh, t);
        let dofs = pspace.cell_dofs(t);
        for (lam, w) in quad.iter() {
            let fx = f(geo.map(lam));
            let wd = w * geo.det;
            let g = shape_gradients(pspace.degree(), lam, &geo.grad_lambda);
            for (&d, g) in dofs.iter().zip(&g) {
                out[d] += wd * (fx[0] * g[0] + fx[1] * g[1]);
            }
        }
    }
    out
}

/// Prescribed values on a subset of dofs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryValues {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoundaryValues {
    /// Shifts every dof by `offset`, for use inside a block system.
    pub fn offset(mut self, offset: usize) -> Self {
        self.dofs.iter_mut().for_each(|d| *d += offset);
        self
    }

    pub fn extend(&mut self, other: BoundaryValues) {
        self.dofs.extend(other.dofs);
        self.values.extend(other.values);
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }
}

const TRACE_JUMP_TOL: f64 = 1e-10;

fn trace_value(node_point: Point, markers: &[Marker], g: &impl Fn(Point, Marker) -> f64) -> Result<f64> {
    let first = g(node_point, markers[0]);
    for &m in &markers[1..] {
        let other = g(node_point, m);
        let jump = (other - first).abs();
        if !(jump <= TRACE_JUMP_TOL * first.abs().max(1.0)) {
            return Err(Error::DiscontinuousTrace {
                x: node_point[0],
                y: node_point[1],
                jump,
            });
        }
    }
    Ok(first)
}

/// Nodal interpolation of boundary data `g(x, marker)` on a scalar space.
///
/// At nodes shared by edges with different markers the data must agree,
/// otherwise the trace is discontinuous and rejected.
pub fn interpolate_boundary_scalar(space: &Space, g: impl Fn(Point, Marker) -> f64) -> Result<BoundaryValues> {
    assert_eq!(space.components(), 1);
    let mut bv = BoundaryValues::default();
    for node in space.boundary_nodes() {
        bv.dofs.push(node.dof);
        bv.values.push(trace_value(node.point, &node.markers, &g)?);
    }
    Ok(bv)
}

/// Nodal interpolation of vector boundary data on a vector space.
pub fn interpolate_boundary_vector(space: &Space, g: impl Fn(Point, Marker) -> [f64; 2]) -> Result<BoundaryValues> {
    assert_eq!(space.components(), 2);
    let nodes = space.boundary_nodes();
    let mut bv = BoundaryValues {
        dofs: Vec::with_capacity(2 * nodes.len()),
        values: vec![0.0; 2 * nodes.len()],
    };
    for c in 0..2 {
        bv.dofs.extend(nodes.iter().map(|n| space.dof(c, n.dof)));
    }
    for (k, node) in nodes.iter().enumerate() {
        for c in 0..2 {
            bv.values[c * nodes.len() + k] = trace_value(node.point, &node.markers, &|x, m| g(x, m)[c])?;
        }
    }
    Ok(bv)
}

/// Symmetric Dirichlet elimination.
///
/// Moves the known columns to the right-hand side, zeroes the boundary rows
/// and columns, puts 1 on their diagonal and the prescribed value in `b`.
pub fn apply_dirichlet(a: &CsrMatrix, b: &[f64], bv: &BoundaryValues) -> Result<(CsrMatrix, Vec<f64>)> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n || bv.dofs.len() != bv.values.len() {
        return Err(Error::ShapeMismatch {
            op: "apply_dirichlet",
            left: a.shape(),
            right: (b.len(), bv.dofs.len()),
        });
    }
    if bv.is_empty() {
        return Ok((a.clone(), b.to_vec()));
    }
    let mut fixed = vec![false; n];
    let mut lifted = vec![0.0; n];
    for (&d, &v) in bv.dofs.iter().zip(&bv.values) {
        if d >= n {
            return Err(Error::InvalidArgument(format!("boundary dof {d} out of range {n}")));
        }
        fixed[d] = true;
        lifted[d] = v;
    }
    let shift = a.spmv(&lifted)?;
    let mut rhs: Vec<f64> = b.iter().zip(&shift).map(|(b, s)| b - s).collect();
    let mut triplets = Vec::with_capacity(a.nnz());
    for i in 0..n {
        if fixed[i] {
            triplets.push((i, i, 1.0));
            rhs[i] = lifted[i];
        } else {
            triplets.extend(a.row(i).filter(|(j, _)| !fixed[*j]).map(|(j, v)| (i, j, v)));
        }
    }
    Ok((CsrMatrix::from_triplets(n, n, &triplets), rhs))
}
