//! Discrete Stokes (S), pressure-Poisson (PP) and ε-Stokes (ES) problems.
//!
//! All three use the same Taylor–Hood pair. With `A` the vector stiffness,
//! `L` the scalar P1 stiffness, `B` the divergence coupling and `G` the
//! gradient coupling (see [`crate::fem`]):
//!
//! ```text
//! (S)   [ A  -Bᵀ  0 ] [u]   [f]      (PP)  L p = g,  p = p_b on Γ
//!       [-B   0   m ] [p] = [0]            A u = f - G p,  u = u_b on Γ
//!       [ 0   mᵀ  0 ] [λ]   [0]
//!
//! (ES)  [ A   G  ] [u]   [ f  ]
//!       [ B   εL ] [p] = [ εg ],  u = u_b, p = p_b on Γ
//! ```
//!
//! where `f = ∫F·φ`, `g = ∫F·∇ψ` and `m = ∫ψ`. The multiplier `λ` fixes the
//! Stokes pressure gauge to zero mean.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_div_coupling, assemble_grad_coupling, assemble_grad_coupling_transposed,
    assemble_grad_load, assemble_load_vector, assemble_mass_vector, assemble_stiffness, interpolate_boundary_scalar,
    interpolate_boundary_vector, BoundaryValues, Degree, EdgeRule, Field, QuadratureRule, Space,
};
use crate::mesh::{Marker, Mesh, Point};
use crate::sparse::{solve, CsrMatrix, SolverReport, DEFAULT_TOL};

pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type ScalarTrace = Arc<dyn Fn(Point, Marker) -> f64 + Send + Sync>;
pub type VectorTrace = Arc<dyn Fn(Point, Marker) -> [f64; 2] + Send + Sync>;

/// Largest boundary flux `∮ u_b·ν` accepted as compatible.
pub const FLUX_TOL: f64 = 1e-8;

/// Data shared by the three problems.
#[derive(Clone)]
pub struct ProblemInput {
    pub mesh: Arc<Mesh>,
    pub body_force: VectorFn,
    pub u_b: VectorTrace,
    pub p_b: ScalarTrace,
    /// Only used by (ES).
    pub epsilon: Option<f64>,
}

impl fmt::Debug for ProblemInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInput")
            .field("vertices", &self.mesh.num_vertices())
            .field("triangles", &self.mesh.num_triangles())
            .field("epsilon", &self.epsilon)
            .finish_non_exhaustive()
    }
}

impl ProblemInput {
    /// Zero forcing and zero boundary data.
    pub fn new(mesh: Arc<Mesh>) -> Self {
        ProblemInput {
            mesh,
            body_force: Arc::new(|_| [0.0, 0.0]),
            u_b: Arc::new(|_, _| [0.0, 0.0]),
            p_b: Arc::new(|_, _| 0.0),
            epsilon: None,
        }
    }

    pub fn with_body_force(mut self, f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.body_force = Arc::new(f);
        self
    }

    pub fn with_velocity_trace(mut self, g: impl Fn(Point, Marker) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.u_b = Arc::new(g);
        self
    }

    pub fn with_pressure_trace(mut self, g: impl Fn(Point, Marker) -> f64 + Send + Sync + 'static) -> Self {
        self.p_b = Arc::new(g);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProblemKind {
    S,
    PP,
    ES,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::S => "S",
            ProblemKind::PP => "PP",
            ProblemKind::ES => "ES",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// P2 velocity.
    pub u: Field,
    /// P1 pressure.
    pub p: Field,
    pub problem: ProblemKind,
    pub epsilon: Option<f64>,
    /// One report per linear solve (two for PP).
    pub reports: Vec<SolverReport>,
}

impl SolveResult {
    /// Largest relative residual over the linear solves.
    pub fn worst_residual(&self) -> f64 {
        self.reports.iter().map(|r| r.relative_residual).fold(0.0, f64::max)
    }
}

/// How the (ES) gradient block `∫(∇p)·φ` is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientForm {
    /// `-Bᵀ` plus the boundary flux correction.
    #[default]
    Transposed,
    /// Direct quadrature of `φ·∇ψ`.
    Direct,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub gradient_form: GradientForm,
    /// Write every assembled system as MatrixMarket into this directory.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            gradient_form: GradientForm::default(),
            dump_dir: None,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Default::default()
        }
    }
}

/// `∮ u_b·ν ds` by edge quadrature.
pub fn boundary_flux(input: &ProblemInput) -> f64 {
    let rule = EdgeRule::gauss3();
    let mesh = &input.mesh;
    mesh.boundary_edges()
        .iter()
        .map(|be| {
            let [a, b] = be.vertices;
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            let len = be.length(mesh);
            rule.iter()
                .map(|(s, w)| {
                    let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                    let u = (input.u_b)(x, be.marker);
                    w * len * (u[0] * be.normal[0] + u[1] * be.normal[1])
                })
                .sum::<f64>()
        })
        .sum()
}

/// Returns the boundary flux, or an error when it exceeds [`FLUX_TOL`].
pub fn check_compatibility(input: &ProblemInput) -> Result<f64> {
    let flux = boundary_flux(input);
    if flux.abs() > FLUX_TOL || !flux.is_finite() {
        return Err(Error::IncompatibleData { flux });
    }
    Ok(flux)
}

/// Assembled, data-independent blocks on one mesh. Shared across ε sweeps.
#[derive(Debug)]
pub struct Discretization {
    mesh: Arc<Mesh>,
    vspace: Arc<Space>,
    pspace: Arc<Space>,
    stiffness_u: CsrMatrix,
    stiffness_p: CsrMatrix,
    div: CsrMatrix,
    grad: CsrMatrix,
    grad_direct: CsrMatrix,
    pressure_mass: Vec<f64>,
}

struct Loads {
    f: Vec<f64>,
    g: Vec<f64>,
    u_bc: BoundaryValues,
}

impl Discretization {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let vspace = Arc::new(Space::vector(mesh.clone(), Degree::P2));
        let pspace = Arc::new(Space::scalar(mesh.clone(), Degree::P1));
        Discretization {
            stiffness_u: assemble_stiffness(&vspace),
            stiffness_p: assemble_stiffness(&pspace),
            div: assemble_div_coupling(&vspace, &pspace),
            grad: assemble_grad_coupling_transposed(&vspace, &pspace),
            grad_direct: assemble_grad_coupling(&vspace, &pspace),
            pressure_mass: assemble_mass_vector(&pspace),
            mesh,
            vspace,
            pspace,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn velocity_space(&self) -> &Arc<Space> {
        &self.vspace
    }

    pub fn pressure_space(&self) -> &Arc<Space> {
        &self.pspace
    }

    pub fn div_coupling(&self) -> &CsrMatrix {
        &self.div
    }

    pub fn grad_coupling(&self, form: GradientForm) -> &CsrMatrix {
        match form {
            GradientForm::Transposed => &self.grad,
            GradientForm::Direct => &self.grad_direct,
        }
    }

    fn check_mesh(&self, input: &ProblemInput) -> Result<()> {
        if Arc::ptr_eq(&self.mesh, &input.mesh) || *self.mesh == *input.mesh {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "problem input lives on a different mesh than the discretization".into(),
            ))
        }
    }

    fn loads(&self, input: &ProblemInput) -> Result<Loads> {
        self.check_mesh(input)?;
        check_compatibility(input)?;
        let quad = QuadratureRule::degree5();
        let force = &*input.body_force;
        Ok(Loads {
            f: assemble_load_vector(&self.vspace, &quad, force),
            g: assemble_grad_load(&self.pspace, &quad, force),
            u_bc: interpolate_boundary_vector(&self.vspace, &*input.u_b)?,
        })
    }

    fn pressure_bc(&self, input: &ProblemInput) -> Result<BoundaryValues> {
        interpolate_boundary_scalar(&self.pspace, &*input.p_b)
    }

    fn solve_system(
        &self,
        a: &CsrMatrix,
        b: &[f64],
        bc: &BoundaryValues,
        opts: &SolveOptions,
        tag: &str,
    ) -> Result<(Vec<f64>, SolverReport)> {
        let (a, b) = apply_dirichlet(a, b, bc)?;
        if let Some(dir) = &opts.dump_dir {
            std::fs::create_dir_all(dir)?;
            a.write_matrix_market(dir.join(format!("{tag}.mtx")))?;
        }
        solve(&a, &b, opts.tol)
    }

    fn fields(&self, u: Vec<f64>, p: Vec<f64>) -> Result<(Field, Field)> {
        Ok((Field::new(self.vspace.clone(), u)?, Field::new(self.pspace.clone(), p)?))
    }

    /// Taylor–Hood Stokes solve with a zero-mean pressure multiplier.
    pub fn solve_stokes(&self, input: &ProblemInput, opts: &SolveOptions) -> Result<SolveResult> {
        let loads = self.loads(input)?;
        let (nu, nq) = (self.vspace.ndofs(), self.pspace.ndofs());
        let n = nu + nq + 1;
        let bt = self.div.transpose();
        let mass_col = CsrMatrix::from_triplets(
            nq,
            1,
            &self
                .pressure_mass
                .iter()
                .enumerate()
                .map(|(q, &m)| (q, 0, m))
                .collect::<Vec<_>>(),
        );
        let mass_row = mass_col.transpose();
        let a = CsrMatrix::from_blocks(
            n,
            n,
            &[
                (0, 0, 1.0, &self.stiffness_u),
                (0, nu, -1.0, &bt),
                (nu, 0, -1.0, &self.div),
                (nu, nu + nq, 1.0, &mass_col),
                (nu + nq, nu, 1.0, &mass_row),
            ],
        );
        let mut rhs = vec![0.0; n];
        rhs[..nu].copy_from_slice(&loads.f);
        let (x, report) = self.solve_system(&a, &rhs, &loads.u_bc, opts, "stokes")?;
        let (u, p) = self.fields(x[..nu].to_vec(), x[nu..nu + nq].to_vec())?;
        Ok(SolveResult {
            u,
            p,
            problem: ProblemKind::S,
            epsilon: None,
            reports: vec![report],
        })
    }

    /// Two-stage pressure-Poisson solve: scalar Poisson for `p`, then a
    /// vector Poisson for `u` forced by `F - ∇p_h`.
    pub fn solve_pp(&self, input: &ProblemInput, opts: &SolveOptions) -> Result<SolveResult> {
        let loads = self.loads(input)?;
        let p_bc = self.pressure_bc(input)?;
        let (p, rep_p) = self.solve_system(&self.stiffness_p, &loads.g, &p_bc, opts, "pp_pressure")?;
        // ∫(∇p_h)·φ evaluated at the quadrature points of each cell
        let grad_p = self.grad_direct.spmv(&p)?;
        let rhs: Vec<f64> = loads.f.iter().zip(&grad_p).map(|(f, g)| f - g).collect();
        let (u, rep_u) = self.solve_system(&self.stiffness_u, &rhs, &loads.u_bc, opts, "pp_velocity")?;
        let (u, p) = self.fields(u, p)?;
        Ok(SolveResult {
            u,
            p,
            problem: ProblemKind::PP,
            epsilon: None,
            reports: vec![rep_p, rep_u],
        })
    }

    /// Coupled ε-Stokes solve.
    pub fn solve_es(&self, input: &ProblemInput, epsilon: f64, opts: &SolveOptions) -> Result<SolveResult> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        let loads = self.loads(input)?;
        let mut bc = loads.u_bc;
        let (nu, nq) = (self.vspace.ndofs(), self.pspace.ndofs());
        bc.extend(self.pressure_bc(input)?.offset(nu));
        let a = CsrMatrix::from_blocks(
            nu + nq,
            nu + nq,
            &[
                (0, 0, 1.0, &self.stiffness_u),
                (0, nu, 1.0, self.grad_coupling(opts.gradient_form)),
                (nu, 0, 1.0, &self.div),
                (nu, nu, epsilon, &self.stiffness_p),
            ],
        );
        let mut rhs = loads.f;
        rhs.extend(loads.g.iter().map(|g| epsilon * g));
        let (x, report) = self.solve_system(&a, &rhs, &bc, opts, &format!("es_eps{epsilon:e}"))?;
        let (u, p) = self.fields(x[..nu].to_vec(), x[nu..].to_vec())?;
        Ok(SolveResult {
            u,
            p,
            problem: ProblemKind::ES,
            epsilon: Some(epsilon),
            reports: vec![report],
        })
    }
}

pub fn solve_stokes(input: &ProblemInput) -> Result<SolveResult> {
    Discretization::new(input.mesh.clone()).solve_stokes(input, &SolveOptions::default())
}

pub fn solve_pp(input: &ProblemInput) -> Result<SolveResult> {
    Discretization::new(input.mesh.clone()).solve_pp(input, &SolveOptions::default())
}

/// Uses `input.epsilon`, which must be set.
pub fn solve_es(input: &ProblemInput) -> Result<SolveResult> {
    let eps = input
        .epsilon
        .ok_or_else(|| Error::InvalidArgument("epsilon-Stokes input without epsilon".into()))?;
    Discretization::new(input.mesh.clone()).solve_es(input, eps, &SolveOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_structured_mesh;

    fn unit_square(n: usize) -> Arc<Mesh> {
        Arc::new(build_structured_mesh(n).unwrap())
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn compatibility_examples() {
        let mesh = unit_square(4);
        let zero = ProblemInput::new(mesh.clone());
        assert_eq!(check_compatibility(&zero).unwrap(), 0.0);
        let uniform = ProblemInput::new(mesh.clone()).with_velocity_trace(|_, _| [1.0, 0.0]);
        assert!(check_compatibility(&uniform).unwrap().abs() < 1e-14);
        let outward = ProblemInput::new(mesh.clone()).with_velocity_trace(|_, m| match m {
            1 => [0.0, -1.0],
            2 => [1.0, 0.0],
            3 => [0.0, 1.0],
            _ => [-1.0, 0.0],
        });
        assert!((boundary_flux(&outward) - 4.0).abs() < 1e-13);
        match check_compatibility(&outward) {
            Err(Error::IncompatibleData { flux }) => assert!((flux - 4.0).abs() < 1e-13),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(solve_stokes(&outward), Err(Error::IncompatibleData { .. })));
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let input = ProblemInput::new(unit_square(3));
        for r in [
            solve_stokes(&input).unwrap(),
            solve_pp(&input).unwrap(),
            solve_es(&input.clone().with_epsilon(0.7)).unwrap(),
        ] {
            assert!(max_abs(r.u.coeffs()) < 1e-10);
            assert!(max_abs(r.p.coeffs()) < 1e-10);
        }
    }

    #[test]
    fn gradient_forcing_is_pressure_only() {
        let mesh = unit_square(4);
        let input = ProblemInput::new(mesh)
            .with_body_force(|_| [1.0, 0.0])
            .with_pressure_trace(|x, _| x[0] - 0.5);
        let s = solve_stokes(&input).unwrap();
        let pp = solve_pp(&input).unwrap();
        assert!(max_abs(s.u.coeffs()) < 1e-10 && max_abs(pp.u.coeffs()) < 1e-10);
        for (k, x) in s.p.space().support_points().iter().enumerate() {
            assert!((s.p.coeffs()[k] - (x[0] - 0.5)).abs() < 1e-10);
            assert!((pp.p.coeffs()[k] - (x[0] - 0.5)).abs() < 1e-10);
        }
        for eps in [1e-3, 1.0, 1e3] {
            let es = solve_es(&input.clone().with_epsilon(eps)).unwrap();
            assert!(max_abs(es.u.coeffs()) < 1e-9, "eps {eps}");
            for (k, x) in es.p.space().support_points().iter().enumerate() {
                assert!((es.p.coeffs()[k] - (x[0] - 0.5)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn boundary_values_are_reproduced_exactly() {
        let mesh = unit_square(3);
        let input = ProblemInput::new(mesh)
            .with_body_force(|x| [x[1], x[0] * x[0]])
            .with_velocity_trace(|x, _| [x[1] * (1.0 - x[1]), 0.0])
            .with_pressure_trace(|x, _| x[0] + 2.0 * x[1]);
        let disc = Discretization::new(input.mesh.clone());
        let opts = SolveOptions::default();
        for r in [
            disc.solve_stokes(&input, &opts).unwrap(),
            disc.solve_pp(&input, &opts).unwrap(),
            disc.solve_es(&input, 0.3, &opts).unwrap(),
        ] {
            for node in r.u.space().boundary_nodes() {
                let x = node.point;
                assert_eq!(r.u.coeffs()[node.dof], x[1] * (1.0 - x[1]));
                assert_eq!(r.u.coeffs()[r.u.space().dof(1, node.dof)], 0.0);
            }
            if r.problem != ProblemKind::S {
                for node in r.p.space().boundary_nodes() {
                    assert_eq!(r.p.coeffs()[node.dof], node.point[0] + 2.0 * node.point[1]);
                }
            }
        }
    }

    #[test]
    fn stokes_pressure_has_zero_mean() {
        let mesh = unit_square(4);
        let input = ProblemInput::new(mesh).with_body_force(|x| [x[1] * x[1], 3.0 + x[0]]);
        let disc = Discretization::new(input.mesh.clone());
        let r = disc.solve_stokes(&input, &SolveOptions::default()).unwrap();
        let mean: f64 = r.p.coeffs().iter().zip(&disc.pressure_mass).map(|(p, m)| p * m).sum();
        assert!(mean.abs() < 1e-10);
    }

    #[test]
    fn direct_and_transposed_gradient_forms_agree() {
        let mesh = unit_square(4);
        let input = ProblemInput::new(mesh)
            .with_body_force(|x| [x[1].sin(), x[0] * x[1]])
            .with_pressure_trace(|x, _| x[0] * x[0]);
        let disc = Discretization::new(input.mesh.clone());
        let t = disc.solve_es(&input, 2.0, &SolveOptions::default()).unwrap();
        let d = disc
            .solve_es(
                &input,
                2.0,
                &SolveOptions {
                    gradient_form: GradientForm::Direct,
                    ..Default::default()
                },
            )
            .unwrap();
        let du = t.u.sub(&d.u).unwrap();
        let dp = t.p.sub(&d.p).unwrap();
        assert!(max_abs(du.coeffs()) < 1e-12 && max_abs(dp.coeffs()) < 1e-12);
    }

    #[test]
    fn nonpositive_epsilon_rejected() {
        let input = ProblemInput::new(unit_square(2));
        let disc = Discretization::new(input.mesh.clone());
        for eps in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                disc.solve_es(&input, eps, &SolveOptions::default()),
                Err(Error::InvalidArgument(_))
            ));
        }
        assert!(solve_es(&input).is_err());
    }

    #[test]
    fn matrix_dump_writes_matrix_market() {
        let dir = tempfile::tempdir().unwrap();
        let input = ProblemInput::new(unit_square(2));
        let disc = Discretization::new(input.mesh.clone());
        let opts = SolveOptions {
            dump_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        disc.solve_pp(&input, &opts).unwrap();
        let text = std::fs::read_to_string(dir.path().join("pp_pressure.mtx")).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    }
}
