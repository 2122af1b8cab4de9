use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::fem::{assemble_stiffness, Degree, Field, Space};
use crate::harness::config::{default_eps_grid, RunConfig};
use crate::harness::sweep::{gradient_distance, h1_distance, quotient_distance, Experiment};
use crate::mesh::{build_structured_mesh, mesh_size, Mesh};
use crate::problems::{Discretization, ProblemInput, SolveOptions, SolveResult};
use crate::sparse::CsrMatrix;
use crate::verification::{
    error_h1, fit_log_slope, gauss_formula_residual, ms1, ms1_mismatch, quotient_norm_l2, saturation_window, Exact,
    ExactGrad,
};

/// Residual every accepted solve must reach.
pub const CONTRACT_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceReport {
    pub n: usize,
    pub tol: f64,
    pub criteria: Vec<CriterionResult>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, id: u32) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail") + "\n"
    }
}

struct Sweep {
    exp: Experiment,
    eps: Vec<f64>,
    es: Vec<SolveResult>,
}

impl Sweep {
    fn at(&self, eps: f64) -> &SolveResult {
        let k = self.eps.iter().position(|&e| e == eps).expect("epsilon in sweep grid");
        &self.es[k]
    }
}

/// Shared solves, computed on first use. Every solve's residual is logged
/// for the solver-contract check.
struct Context {
    n: usize,
    opts: SolveOptions,
    residuals: Mutex<Vec<(String, f64)>>,
    mismatch: OnceLock<Result<Sweep>>,
    compatible: OnceLock<Result<Sweep>>,
}

impl Context {
    fn record(&self, label: String, r: &SolveResult) {
        let mut log = self.residuals.lock().expect("residual log poisoned");
        for rep in &r.reports {
            log.push((label.clone(), rep.relative_residual));
        }
    }

    fn experiment(&self, case: &crate::verification::ManufacturedCase, n: usize) -> Result<Experiment> {
        let exp = Experiment::new(case, n, &self.opts)?;
        self.record(format!("{} n={n} S", case.name), &exp.stokes);
        self.record(format!("{} n={n} PP", case.name), &exp.pp);
        Ok(exp)
    }

    fn sweep(&self, case: crate::verification::ManufacturedCase) -> Result<Sweep> {
        let exp = self.experiment(&case, self.n)?;
        let eps = default_eps_grid();
        let es: Vec<SolveResult> = eps.par_iter().map(|&e| exp.solve_es(e)).collect::<Result<_>>()?;
        for r in &es {
            self.record(
                format!("{} n={} ES eps={:e}", case.name, self.n, r.epsilon.unwrap_or(0.0)),
                r,
            );
        }
        Ok(Sweep { exp, eps, es })
    }

    fn mismatch(&self) -> Result<&Sweep> {
        self.mismatch
            .get_or_init(|| self.sweep(ms1_mismatch()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn compatible(&self) -> Result<&Sweep> {
        self.compatible
            .get_or_init(|| self.sweep(ms1()))
            .as_ref()
            .map_err(Clone::clone)
    }
}

struct Outcome {
    passed: bool,
    measured: BTreeMap<String, f64>,
    detail: String,
}

fn outcome(passed: bool, measured: &[(&str, f64)], detail: String) -> Outcome {
    Outcome {
        passed,
        measured: measured.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        detail,
    }
}

const NAMES: [&str; 9] = [
    "eps->inf rate",
    "eps->0 convergence",
    "compatible-trace coincidence",
    "mismatch scaling in delta",
    "projection inequality",
    "pressure-gradient non-convergence",
    "discretization rates",
    "structural identities",
    "solver contract",
];

/// Runs all criteria on `cfg.n[0]` (default 32) with solver tolerance `cfg.tol`.
pub fn run_acceptance(cfg: &RunConfig) -> Result<AcceptanceReport> {
    cfg.validate()?;
    let ctx = Context {
        n: cfg.n[0],
        opts: SolveOptions::with_tol(cfg.tol),
        residuals: Mutex::new(Vec::new()),
        mismatch: OnceLock::new(),
        compatible: OnceLock::new(),
    };
    let checks: [fn(&Context) -> Result<Outcome>; 8] = [
        eps_infinity_rate,
        eps_zero_convergence,
        compatible_coincidence,
        delta_scaling,
        projection_inequality,
        gradient_non_convergence,
        discretization_rates,
        structural_identities,
    ];
    let mut criteria = Vec::new();
    for (k, check) in checks.iter().enumerate() {
        let o = check(&ctx).unwrap_or_else(|e| outcome(false, &[], format!("error: {e}")));
        criteria.push(CriterionResult {
            id: k as u32 + 1,
            name: NAMES[k].into(),
            passed: o.passed,
            measured: o.measured,
            detail: o.detail,
        });
    }
    let o = solver_contract(&ctx, cfg.tol);
    criteria.push(CriterionResult {
        id: 9,
        name: NAMES[8].into(),
        passed: o.passed,
        measured: o.measured,
        detail: o.detail,
    });
    Ok(AcceptanceReport {
        n: ctx.n,
        tol: cfg.tol,
        criteria,
    })
}

fn decades(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 10f64.powi(k)).collect()
}

fn eps_infinity_rate(ctx: &Context) -> Result<Outcome> {
    let sw = ctx.mismatch()?;
    let floor = 10.0 * ctx.opts.tol;
    let mut u = Vec::new();
    let mut p = Vec::new();
    for e in decades(0, 4) {
        let r = sw.at(e);
        u.push((e, h1_distance(&r.u, &sw.exp.pp.u)?));
        p.push((e, h1_distance(&r.p, &sw.exp.pp.p)?));
    }
    let su = fit_log_slope(&u, saturation_window(&u, floor))?;
    let sp = fit_log_slope(&p, saturation_window(&p, floor))?;
    Ok(outcome(
        su <= -0.9 && sp <= -0.9,
        &[("slope_u_H1", su), ("slope_p_H1", sp)],
        format!("slopes u {su:.4}, p {sp:.4} (need <= -0.9)"),
    ))
}

fn eps_zero_convergence(ctx: &Context) -> Result<Outcome> {
    let sw = ctx.mismatch()?;
    let grid: Vec<f64> = decades(-4, 0).into_iter().rev().collect();
    let mut errs = Vec::new();
    for &e in &grid {
        errs.push(h1_distance(&sw.at(e).u, &sw.exp.stokes.u)?);
    }
    let monotone = errs.windows(2).all(|w| w[1] <= 1.05 * w[0]);
    let p_err = quotient_distance(&sw.at(1e-4).p, &sw.exp.stokes.p)?;
    let floor = sw.exp.stokes_pressure_error();
    let pairs: Vec<(f64, f64)> = grid.iter().copied().zip(errs.iter().copied()).collect();
    let rate = fit_log_slope(&pairs, 0..pairs.len()).unwrap_or(f64::NAN);
    let passed = monotone && p_err <= 3.0 * floor;
    Ok(outcome(
        passed,
        &[
            ("u_H1_eps1", errs[0]),
            ("u_H1_eps1e-4", errs[errs.len() - 1]),
            ("p_L2R_eps1e-4", p_err),
            ("stokes_p_floor", floor),
            ("empirical_rate", rate),
        ],
        format!(
            "u error non-increasing: {monotone} ({:.3e} -> {:.3e}); p at eps=1e-4 {p_err:.3e} vs 3x floor {:.3e}; empirical u rate {rate:.3}",
            errs[0],
            errs[errs.len() - 1],
            3.0 * floor
        ),
    ))
}

fn compatible_coincidence(ctx: &Context) -> Result<Outcome> {
    let sw = ctx.compatible()?;
    let floor = sw.exp.stokes_velocity_error();
    let mut worst = 0.0f64;
    for r in &sw.es {
        worst = worst.max(h1_distance(&r.u, &sw.exp.stokes.u)?);
    }
    let pp = h1_distance(&sw.exp.pp.u, &sw.exp.stokes.u)?;
    Ok(outcome(
        worst <= 2.0 * floor && pp <= 2.0 * floor,
        &[("max_u_es_vs_s", worst), ("u_pp_vs_s", pp), ("stokes_u_floor", floor)],
        format!("max ES {worst:.3e}, PP {pp:.3e}, bound {:.3e}", 2.0 * floor),
    ))
}

fn delta_scaling(ctx: &Context) -> Result<Outcome> {
    let base = ms1_mismatch();
    let deltas = [0.25, 0.5, 1.0];
    let mesh = Arc::new(build_structured_mesh(ctx.n)?);
    let disc = Discretization::new(mesh.clone());
    let stokes = disc.solve_stokes(&base.problem_input(mesh.clone()), &ctx.opts)?;
    ctx.record(format!("MS1-mismatch n={} S", ctx.n), &stokes);
    let mut errs = Vec::new();
    for &d in &deltas {
        let pp = disc.solve_pp(&base.clone().with_delta(d).problem_input(mesh.clone()), &ctx.opts)?;
        ctx.record(format!("MS1-mismatch delta={d} n={} PP", ctx.n), &pp);
        errs.push(h1_distance(&stokes.u, &pp.u)?);
    }
    let c = errs.iter().zip(&deltas).map(|(e, d)| e * d).sum::<f64>() / deltas.iter().map(|d| d * d).sum::<f64>();
    let dev = errs
        .iter()
        .zip(&deltas)
        .map(|(e, d)| (e - c * d).abs() / (c * d))
        .fold(0.0, f64::max);
    Ok(outcome(
        dev <= 0.1,
        &[
            ("err_delta_0.25", errs[0]),
            ("err_delta_0.5", errs[1]),
            ("err_delta_1", errs[2]),
            ("max_rel_dev", dev),
        ],
        format!(
            "errors {:.4e}, {:.4e}, {:.4e}; max deviation from proportionality {:.2}%",
            errs[0],
            errs[1],
            errs[2],
            100.0 * dev
        ),
    ))
}

fn projection_inequality(ctx: &Context) -> Result<Outcome> {
    let sw = ctx.mismatch()?;
    let slack = 10.0 * ctx.opts.tol;
    let mut worst_ratio = 0.0f64;
    let mut ok = true;
    for r in &sw.es {
        let lhs = gradient_distance(&r.p, &sw.exp.pp.p)?;
        let rhs = gradient_distance(&r.p, &sw.exp.stokes.p)?;
        ok &= lhs <= rhs * 1.05 + slack;
        worst_ratio = worst_ratio.max(lhs / rhs);
    }
    Ok(outcome(
        ok,
        &[("max_ratio", worst_ratio)],
        format!("max |grad(p_eps - p_PP)| / |grad(p_eps - p_S)| = {worst_ratio:.4}"),
    ))
}

fn gradient_non_convergence(ctx: &Context) -> Result<Outcome> {
    let sw = ctx.mismatch()?;
    let mut min = f64::INFINITY;
    for (e, r) in sw.eps.iter().zip(&sw.es) {
        if *e <= 1.0 {
            min = min.min(gradient_distance(&r.p, &sw.exp.stokes.p)?);
        }
    }
    let comp = ctx.compatible()?;
    let reference = gradient_distance(&comp.at(1.0).p, &comp.exp.stokes.p)?;
    Ok(outcome(
        min > 10.0 * reference,
        &[("min_mismatch", min), ("compatible_eps1", reference)],
        format!("min over eps<=1 {min:.3e} vs 10x compatible {:.3e}", 10.0 * reference),
    ))
}

fn discretization_rates(ctx: &Context) -> Result<Outcome> {
    let case = ms1();
    let ns = [8usize, 16, 32, 64];
    let floor = 10.0 * ctx.opts.tol;
    let mut u = Vec::new();
    let mut p = Vec::new();
    for &n in &ns {
        let mesh = Arc::new(build_structured_mesh(n)?);
        let h = mesh_size(&mesh);
        let disc = Discretization::new(mesh.clone());
        let s = disc.solve_stokes(&case.problem_input(mesh), &ctx.opts)?;
        ctx.record(format!("MS1 n={n} S"), &s);
        u.push((
            h,
            error_h1(
                &s.u,
                Exact::Vector(&*case.u_exact),
                ExactGrad::Vector(&*case.grad_u_exact),
            ),
        ));
        p.push((h, quotient_norm_l2(&s.p, Exact::Scalar(&*case.p_exact))));
    }
    // errors decrease with h, so the guard drops the finest meshes first
    let su = fit_log_slope(
        &u,
        (0..u.len())
            .filter(|&k| u[k].1 >= floor)
            .fold(0..0, |r, k| r.start..k + 1),
    )?;
    let sp = fit_log_slope(
        &p,
        (0..p.len())
            .filter(|&k| p[k].1 >= floor)
            .fold(0..0, |r, k| r.start..k + 1),
    )?;
    Ok(outcome(
        (1.8..=2.2).contains(&su) && (1.6..=2.2).contains(&sp),
        &[("slope_u_H1", su), ("slope_p_L2R", sp)],
        format!("H1 velocity slope {su:.4} (in [1.8, 2.2]), L2/R pressure slope {sp:.4} (in [1.6, 2.2])"),
    ))
}

/// Closed-form P1 stiffness on each triangle: `(b_i b_j + c_i c_j) / (4|T|)`.
fn p1_stiffness_oracle(mesh: &Mesh) -> CsrMatrix {
    let mut trips = Vec::new();
    for tri in mesh.triangles() {
        let x = tri.map(|v| mesh.vertices()[v]);
        let area = 0.5 * ((x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1]));
        let b: [f64; 3] = std::array::from_fn(|i| x[(i + 1) % 3][1] - x[(i + 2) % 3][1]);
        let c: [f64; 3] = std::array::from_fn(|i| x[(i + 2) % 3][0] - x[(i + 1) % 3][0]);
        for i in 0..3 {
            for j in 0..3 {
                trips.push((tri[i], tri[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area)));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.num_vertices(), mesh.num_vertices(), &trips)
}

fn structural_identities(ctx: &Context) -> Result<Outcome> {
    // discrete Gauss formula for random field pairs
    let mesh = Arc::new(build_structured_mesh(16)?);
    let vs = Arc::new(Space::vector(mesh.clone(), Degree::P2));
    let ps = Arc::new(Space::scalar(mesh.clone(), Degree::P1));
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut gauss = 0.0f64;
    for _ in 0..20 {
        let u = Field::new(vs.clone(), (0..vs.ndofs()).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
        let w = Field::new(ps.clone(), (0..ps.ndofs()).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
        gauss = gauss.max(gauss_formula_residual(&u, &w).abs());
    }

    // gradient forcing F = ∇q with q = x - 1/2
    let disc = Discretization::new(mesh.clone());
    let q = |x: crate::Point| x[0] - 0.5;
    let input = ProblemInput::new(mesh.clone())
        .with_body_force(|_| [1.0, 0.0])
        .with_pressure_trace(move |x, _| q(x));
    let q_h = Field::interpolate_scalar(ps.clone(), q);
    let mut forcing = 0.0f64;
    let mut results = vec![disc.solve_stokes(&input, &ctx.opts)?, disc.solve_pp(&input, &ctx.opts)?];
    for e in [1e-3, 1.0, 1e3] {
        results.push(disc.solve_es(&input, e, &ctx.opts)?);
    }
    for r in &results {
        ctx.record(format!("gradient forcing {}", r.problem), r);
        let du = r.u.coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dp =
            r.p.coeffs()
                .iter()
                .zip(q_h.coeffs())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        forcing = forcing.max(du).max(dp);
    }

    // zero data
    let zero = ProblemInput::new(mesh.clone());
    let mut zeros = vec![disc.solve_stokes(&zero, &ctx.opts)?, disc.solve_pp(&zero, &ctx.opts)?];
    zeros.push(disc.solve_es(&zero, 1.0, &ctx.opts)?);
    let mut zero_max = 0.0f64;
    for r in &zeros {
        ctx.record(format!("zero data {}", r.problem), r);
        zero_max =
            r.u.coeffs()
                .iter()
                .chain(r.p.coeffs())
                .fold(zero_max, |m, v| m.max(v.abs()));
    }

    let p1 = assemble_stiffness(&ps);
    let stiff = p1.max_abs_diff(&p1_stiffness_oracle(&mesh))?;

    let passed = gauss <= 1e-10 && forcing <= 1e-9 && zero_max <= 1e-10 && stiff <= 1e-12;
    Ok(outcome(
        passed,
        &[
            ("gauss_residual", gauss),
            ("gradient_forcing", forcing),
            ("zero_data", zero_max),
            ("p1_stiffness", stiff),
        ],
        format!(
            "Gauss {gauss:.2e}, gradient forcing {forcing:.2e}, zero data {zero_max:.2e}, P1 stiffness {stiff:.2e}"
        ),
    ))
}

fn solver_contract(ctx: &Context, tol: f64) -> Outcome {
    let log = ctx.residuals.lock().expect("residual log poisoned");
    let (worst_label, worst) = log.iter().fold(
        (String::new(), 0.0f64),
        |acc, (l, r)| if *r > acc.1 { (l.clone(), *r) } else { acc },
    );
    let covers_extremes = ["eps=1e-6", "eps=1e6"]
        .iter()
        .all(|tag| log.iter().any(|(l, _)| l.ends_with(tag)));
    // a solve is only accepted against the requested tolerance, so a loose
    // tolerance voids the contract even when the achieved residual is small
    let passed = !log.is_empty() && covers_extremes && worst <= CONTRACT_RESIDUAL && tol <= CONTRACT_RESIDUAL;
    outcome(
        passed,
        &[("worst_residual", worst), ("accepted_tol", tol), ("solves", log.len() as f64)],
        format!(
            "{} solves, worst residual {worst:.2e} ({worst_label}), acceptance tol {tol:e}, eps extremes covered: {covers_extremes}",
            log.len()
        ),
    )
}

/// Exit code for a report: 0 when every criterion passes, 1 otherwise.
pub fn exit_code(report: &AcceptanceReport) -> i32 {
    if report.all_passed() {
        0
    } else {
        1
    }
}
