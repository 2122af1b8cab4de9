use std::sync::Arc;

use estokes::fem::{
    assemble_boundary_flux_coupling, assemble_div_coupling, assemble_grad_coupling, Degree, Field, Space,
};
use estokes::mesh::build_structured_mesh;
use estokes::verification::{error_h1, error_l2, gauss_formula_residual, quotient_norm_l2, Exact, ExactGrad};
use proptest::prelude::*;

fn spaces(n: usize) -> (Arc<Space>, Arc<Space>) {
    let mesh = Arc::new(build_structured_mesh(n).unwrap());
    (
        Arc::new(Space::vector(mesh.clone(), Degree::P2)),
        Arc::new(Space::scalar(mesh, Degree::P1)),
    )
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// Quadrature form of the Gauss formula for random discrete fields.
    #[test]
    fn gauss_formula_random_fields(
        u in proptest::collection::vec(-1.0f64..1.0, 2 * 81),
        w in proptest::collection::vec(-1.0f64..1.0, 25),
    ) {
        let (vs, ps) = spaces(4);
        prop_assert_eq!(vs.ndofs(), u.len());
        let u = Field::new(vs, u).unwrap();
        let w = Field::new(ps, w).unwrap();
        prop_assert!(gauss_formula_residual(&u, &w).abs() <= 1e-12);
    }

    /// Matrix form: `qᵀ G u = -qᵀ B u + qᵀ C u` for every pair of coefficient vectors.
    #[test]
    fn gauss_formula_matrix_form(
        u in proptest::collection::vec(-1.0f64..1.0, 2 * 25),
        q in proptest::collection::vec(-1.0f64..1.0, 9),
    ) {
        let (vs, ps) = spaces(2);
        let g = assemble_grad_coupling(&vs, &ps);
        let b = assemble_div_coupling(&vs, &ps);
        let c = assemble_boundary_flux_coupling(&vs, &ps);
        let lhs = dot(&u, &g.spmv(&q).unwrap());
        let rhs = -dot(&q, &b.spmv(&u).unwrap()) + dot(&u, &c.spmv(&q).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    /// Norms are absolutely homogeneous and the quotient norm ignores constants.
    #[test]
    fn norm_homogeneity(
        coeffs in proptest::collection::vec(-1.0f64..1.0, 25),
        alpha in -5.0f64..5.0,
        shift in -10.0f64..10.0,
    ) {
        let (_, ps) = spaces(4);
        let f = Field::new(ps, coeffs).unwrap();
        let g = f.scaled(alpha);
        let base = error_h1(&f, Exact::Zero, ExactGrad::Zero);
        prop_assert!((error_h1(&g, Exact::Zero, ExactGrad::Zero) - alpha.abs() * base).abs() <= 1e-12);
        prop_assert!((error_l2(&g, Exact::Zero) - alpha.abs() * error_l2(&f, Exact::Zero)).abs() <= 1e-12);
        let q = quotient_norm_l2(&f, Exact::Zero);
        prop_assert!((quotient_norm_l2(&f.add_constant(shift), Exact::Zero) - q).abs() <= 1e-12);
    }
}
