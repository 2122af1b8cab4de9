use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::problems::{ProblemInput, VectorFn};

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(Point) -> [[f64; 2]; 2] + Send + Sync>;

/// Closed-form Stokes solution with its forcing and a pressure-trace perturbation.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub u_exact: VectorFn,
    /// Row `c` is the gradient of velocity component `c`.
    pub grad_u_exact: TensorFn,
    pub p_exact: ScalarFn,
    pub grad_p_exact: VectorFn,
    /// `-Δu + ∇p`.
    pub body_force: VectorFn,
    /// Added to the pressure trace with amplitude `delta`.
    pub trace_perturbation: ScalarFn,
    pub delta: f64,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("delta", &self.delta)
            .finish_non_exhaustive()
    }
}

impl ManufacturedCase {
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Pressure boundary data `p_exact + delta * perturbation`.
    pub fn pressure_trace(&self, x: Point) -> f64 {
        (self.p_exact)(x) + self.delta * (self.trace_perturbation)(x)
    }

    /// Problem data on `mesh`: forcing `F`, `u_b = u_exact`, `p_b` as in
    /// [`pressure_trace`](Self::pressure_trace).
    pub fn problem_input(&self, mesh: Arc<Mesh>) -> ProblemInput {
        let (u, p, g, delta) = (
            self.u_exact.clone(),
            self.p_exact.clone(),
            self.trace_perturbation.clone(),
            self.delta,
        );
        ProblemInput {
            mesh,
            body_force: self.body_force.clone(),
            u_b: Arc::new(move |x, _| u(x)),
            p_b: Arc::new(move |x, _| p(x) + delta * g(x)),
            epsilon: None,
        }
    }
}

// ψ = X(x) Y(y) with X(t) = t²(1-t)²; derivatives of X in closed form.
fn s0(t: f64) -> f64 {
    t * t * (1.0 - t) * (1.0 - t)
}
fn s1(t: f64) -> f64 {
    2.0 * t - 6.0 * t * t + 4.0 * t * t * t
}
fn s2(t: f64) -> f64 {
    2.0 - 12.0 * t + 12.0 * t * t
}
fn s3(t: f64) -> f64 {
    -12.0 + 24.0 * t
}

/// Stream-function case `ψ = x²(1-x)²y²(1-y)²`, `u = (ψ_y, -ψ_x)`,
/// `p = x³ + y³ - 1/2`, perturbation `cos(πx)cos(πy)`.
pub fn ms1() -> ManufacturedCase {
    ManufacturedCase {
        name: "MS1".into(),
        u_exact: Arc::new(|[x, y]| [s0(x) * s1(y), -s1(x) * s0(y)]),
        grad_u_exact: Arc::new(|[x, y]| [[s1(x) * s1(y), s0(x) * s2(y)], [-s2(x) * s0(y), -s1(x) * s1(y)]]),
        p_exact: Arc::new(|[x, y]| x * x * x + y * y * y - 0.5),
        grad_p_exact: Arc::new(|[x, y]| [3.0 * x * x, 3.0 * y * y]),
        body_force: Arc::new(|[x, y]| {
            let lap_u1 = s2(x) * s1(y) + s0(x) * s3(y);
            let lap_u2 = -(s3(x) * s0(y) + s1(x) * s2(y));
            [-lap_u1 + 3.0 * x * x, -lap_u2 + 3.0 * y * y]
        }),
        trace_perturbation: Arc::new(|[x, y]| (PI * x).cos() * (PI * y).cos()),
        delta: 0.0,
    }
}

/// MS1 with a mismatched pressure trace of amplitude 1.
pub fn ms1_mismatch() -> ManufacturedCase {
    ManufacturedCase {
        name: "MS1-mismatch".into(),
        ..ms1().with_delta(1.0)
    }
}

pub fn registry() -> Vec<ManufacturedCase> {
    vec![ms1(), ms1_mismatch()]
}

pub fn find_case(name: &str) -> Result<ManufacturedCase> {
    registry()
        .into_iter()
        .find(|c| c.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| {
            let known: Vec<String> = registry().into_iter().map(|c| c.name).collect();
            Error::Config(format!("unknown case `{name}` (known: {})", known.join(", ")))
        })
}
