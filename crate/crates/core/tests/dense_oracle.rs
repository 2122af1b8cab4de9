//! The n=2 Stokes system solved by a dense Gaussian elimination written here
//! from scratch, compared with the sparse driver.

#![allow(clippy::needless_range_loop)]

use std::sync::Arc;

use estokes::fem::{
    apply_dirichlet, assemble_div_coupling, assemble_load_vector, assemble_mass_vector, assemble_stiffness,
    interpolate_boundary_vector, Degree, QuadratureRule, Space,
};
use estokes::mesh::build_structured_mesh;
use estokes::problems::{Discretization, SolveOptions};
use estokes::sparse::CsrMatrix;
use estokes::verification::ms1;

fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        assert!(a[piv][k].abs() > 1e-14, "dense oracle hit a singular pivot");
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

fn parse_matrix_market(text: &str) -> CsrMatrix {
    let mut lines = text.lines().filter(|l| !l.starts_with('%'));
    let dims: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect();
    let trips: Vec<(usize, usize, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (
                f[0].parse::<usize>().unwrap() - 1,
                f[1].parse::<usize>().unwrap() - 1,
                f[2].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(trips.len(), dims[2]);
    CsrMatrix::from_triplets(dims[0], dims[1], &trips)
}

#[test]
fn stokes_n2_matches_dense_elimination() {
    let case = ms1();
    let mesh = Arc::new(build_structured_mesh(2).unwrap());
    let vs = Space::vector(mesh.clone(), Degree::P2);
    let ps = Space::scalar(mesh.clone(), Degree::P1);
    let (nu, nq) = (vs.ndofs(), ps.ndofs());
    let n = nu + nq + 1;

    let a = assemble_stiffness(&vs);
    let b = assemble_div_coupling(&vs, &ps);
    let m = assemble_mass_vector(&ps);
    let mut trips = Vec::new();
    trips.extend(a.triplets());
    for (q, u, v) in b.triplets() {
        trips.push((nu + q, u, -v));
        trips.push((u, nu + q, -v));
    }
    for (q, &mq) in m.iter().enumerate() {
        trips.push((nu + q, nu + nq, mq));
        trips.push((nu + nq, nu + q, mq));
    }
    let system = CsrMatrix::from_triplets(n, n, &trips);
    let mut rhs = vec![0.0; n];
    let f = assemble_load_vector(&vs, &QuadratureRule::degree5(), &*case.body_force);
    rhs[..nu].copy_from_slice(&f);
    let bc = interpolate_boundary_vector(&vs, |x, _| (case.u_exact)(x)).unwrap();
    let (system, rhs) = apply_dirichlet(&system, &rhs, &bc).unwrap();
    let oracle = dense_solve(system.to_dense(), rhs);

    let dir = tempfile::tempdir().unwrap();
    let opts = SolveOptions {
        dump_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let disc = Discretization::new(mesh.clone());
    let r = disc.solve_stokes(&case.problem_input(mesh), &opts).unwrap();
    let got: Vec<f64> = r.u.coeffs().iter().chain(r.p.coeffs()).copied().collect();
    let err = got.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "sparse vs dense: {err:e}");
    assert!(r.worst_residual() <= 1e-10);

    let dumped = parse_matrix_market(&std::fs::read_to_string(dir.path().join("stokes.mtx")).unwrap());
    assert!(dumped.max_abs_diff(&system).unwrap() < 1e-14);
}
