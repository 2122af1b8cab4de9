//! Continuous P1/P2 Lagrange spaces, quadrature and assembly.

mod assembly;
mod field;
mod quadrature;
mod space;

pub(crate) use assembly::edge_barycentric;
pub use assembly::{
    apply_dirichlet, assemble_boundary_flux_coupling, assemble_div_coupling, assemble_grad_coupling,
    assemble_grad_coupling_transposed, assemble_grad_load, assemble_load_scalar, assemble_load_vector, assemble_mass,
    assemble_mass_vector, assemble_stiffness, interpolate_boundary_scalar, interpolate_boundary_vector, BoundaryValues,
};
pub use field::Field;
pub use quadrature::{EdgeRule, QuadratureRule};
pub use space::{shape_gradients, shape_values, BoundaryNode, CellGeometry, Degree, Space};
