use std::sync::Arc;

use rayon::prelude::*;

use crate::error::Result;
use crate::fem::Field;
use crate::harness::config::RunConfig;
use crate::harness::table::{ErrorRow, ErrorTable, RateRecord};
use crate::mesh::build_structured_mesh;
use crate::problems::{Discretization, ProblemInput, ProblemKind, SolveOptions, SolveResult};
use crate::verification::{
    divergence_l2, error_h1, error_h1_seminorm, error_l2, fit_log_slope, quotient_norm_l2, trace_mismatch, Exact,
    ExactGrad, ManufacturedCase,
};

/// `‖a - b‖_{H¹}` for fields on the same space.
pub fn h1_distance(a: &Field, b: &Field) -> Result<f64> {
    Ok(error_h1(&a.sub(b)?, Exact::Zero, ExactGrad::Zero))
}

/// `‖∇(a - b)‖_{L²}`.
pub fn gradient_distance(a: &Field, b: &Field) -> Result<f64> {
    Ok(error_h1_seminorm(&a.sub(b)?, ExactGrad::Zero))
}

/// `‖[a - b]‖_{L²/R}`.
pub fn quotient_distance(a: &Field, b: &Field) -> Result<f64> {
    Ok(quotient_norm_l2(&a.sub(b)?, Exact::Zero))
}

/// A manufactured case on one structured mesh with its S and PP solutions.
pub struct Experiment {
    pub case: ManufacturedCase,
    pub n: usize,
    pub disc: Discretization,
    pub input: ProblemInput,
    pub opts: SolveOptions,
    pub stokes: SolveResult,
    pub pp: SolveResult,
    pub trace_mismatch: f64,
}

impl Experiment {
    pub fn new(case: &ManufacturedCase, n: usize, opts: &SolveOptions) -> Result<Self> {
        let mesh = Arc::new(build_structured_mesh(n)?);
        let disc = Discretization::new(mesh.clone());
        let input = case.problem_input(mesh.clone());
        let stokes = disc.solve_stokes(&input, opts)?;
        let pp = disc.solve_pp(&input, opts)?;
        let trace_mismatch = trace_mismatch(|x, _| case.pressure_trace(x), &*case.p_exact, &mesh);
        Ok(Experiment {
            case: case.clone(),
            n,
            disc,
            input,
            opts: opts.clone(),
            stokes,
            pp,
            trace_mismatch,
        })
    }

    pub fn solve_es(&self, eps: f64) -> Result<SolveResult> {
        self.disc.solve_es(&self.input, eps, &self.opts)
    }

    /// `‖u_h - u‖_{H¹}` of the discrete Stokes solution against the exact one.
    pub fn stokes_velocity_error(&self) -> f64 {
        error_h1(
            &self.stokes.u,
            Exact::Vector(&*self.case.u_exact),
            ExactGrad::Vector(&*self.case.grad_u_exact),
        )
    }

    /// `‖[p_h] - p‖_{L²/R}` of the discrete Stokes pressure.
    pub fn stokes_pressure_error(&self) -> f64 {
        quotient_norm_l2(&self.stokes.p, Exact::Scalar(&*self.case.p_exact))
    }

    pub fn row(&self, r: &SolveResult) -> Result<ErrorRow> {
        let case = &self.case;
        Ok(ErrorRow {
            problem: r.problem.to_string(),
            n: self.n,
            eps: r.epsilon,
            err_u_h1_vs_s: error_h1(
                &r.u,
                Exact::Vector(&*case.u_exact),
                ExactGrad::Vector(&*case.grad_u_exact),
            ),
            err_u_l2_vs_s: error_l2(&r.u, Exact::Vector(&*case.u_exact)),
            err_p_l2r_vs_s: quotient_norm_l2(&r.p, Exact::Scalar(&*case.p_exact)),
            err_u_h1_vs_pp: h1_distance(&r.u, &self.pp.u)?,
            err_p_h1_vs_pp: h1_distance(&r.p, &self.pp.p)?,
            div_u_l2: divergence_l2(&r.u),
            trace_mismatch: self.trace_mismatch,
        })
    }
}

fn options(cfg: &RunConfig, n: usize) -> SolveOptions {
    SolveOptions {
        tol: cfg.tol,
        dump_dir: cfg.dump_matrix.as_ref().map(|d| d.join(format!("n{n}"))),
        ..Default::default()
    }
}

/// ES solves for every ε in parallel; rows come back in ε order. Rows
/// before the first failure are kept in `table`.
fn es_rows(exp: &Experiment, eps: &[f64], table: &mut ErrorTable) -> Result<()> {
    let rows: Vec<Result<ErrorRow>> = eps
        .par_iter()
        .map(|&e| exp.solve_es(e).and_then(|r| exp.row(&r)))
        .collect();
    for row in rows {
        table.rows.push(row?);
    }
    Ok(())
}

/// Writes the (possibly partial) table to `cfg.out` before returning `result`.
fn finish(table: ErrorTable, cfg: &RunConfig, result: Result<()>) -> Result<ErrorTable> {
    if let Some(out) = &cfg.out {
        table.write(out, cfg.format)?;
    }
    result?;
    table.check_invariants()?;
    Ok(table)
}

/// For each `n`: S and PP once, then one ES row per ε.
pub fn run_sweep_eps(cfg: &RunConfig) -> Result<ErrorTable> {
    cfg.validate()?;
    let case = cfg.manufactured_case()?;
    let mut table = ErrorTable::default();
    let result = (|| {
        for &n in &cfg.n {
            let exp = Experiment::new(&case, n, &options(cfg, n))?;
            es_rows(&exp, &cfg.eps, &mut table)?;
        }
        Ok(())
    })();
    finish(table, cfg, result)
}

/// Rows for the selected problems at every `n`, without rate fits.
pub fn run_solve(cfg: &RunConfig) -> Result<ErrorTable> {
    cfg.validate()?;
    let case = cfg.manufactured_case()?;
    let mut table = ErrorTable::default();
    let result = solve_rows(cfg, &case, &mut table);
    finish(table, cfg, result)
}

fn solve_rows(cfg: &RunConfig, case: &ManufacturedCase, table: &mut ErrorTable) -> Result<()> {
    for &n in &cfg.n {
        let exp = Experiment::new(case, n, &options(cfg, n))?;
        for r in [&exp.stokes, &exp.pp] {
            if cfg.problem.includes(r.problem) {
                table.rows.push(exp.row(r)?);
            }
        }
        if cfg.problem.includes(ProblemKind::ES) {
            es_rows(&exp, &cfg.eps, table)?;
        }
    }
    Ok(())
}

/// Per-`n` rows plus fitted h-rates when at least two meshes are given.
pub fn run_sweep_h(cfg: &RunConfig) -> Result<ErrorTable> {
    cfg.validate()?;
    let case = cfg.manufactured_case()?;
    let mut table = ErrorTable::default();
    let result = solve_rows(cfg, &case, &mut table);
    if result.is_ok() && cfg.n.len() >= 2 {
        table.rates = h_rates(&table, 10.0 * cfg.tol);
    }
    finish(table, cfg, result)
}

type Column = fn(&ErrorRow) -> f64;

/// Slopes of the `vs_S` velocity H¹ and pressure L²/R errors against `h`,
/// skipping values below `floor`.
pub fn h_rates(table: &ErrorTable, floor: f64) -> Vec<RateRecord> {
    let mut groups: Vec<(String, Option<f64>)> = Vec::new();
    for r in &table.rows {
        let key = (r.problem.clone(), r.eps);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut rates = Vec::new();
    for (problem, eps) in groups {
        let rows: Vec<&ErrorRow> = table
            .rows
            .iter()
            .filter(|r| r.problem == problem && r.eps == eps)
            .collect();
        // structured meshes: the longest edge is √2/n
        let h = |n: usize| 2f64.sqrt() / n as f64;
        let columns: [(&str, Column); 2] = [
            ("err_u_H1_vs_S", |r| r.err_u_h1_vs_s),
            ("err_p_L2R_vs_S", |r| r.err_p_l2r_vs_s),
        ];
        for (column, get) in columns {
            let pairs: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| get(r) >= floor)
                .map(|r| (h(r.n), get(r)))
                .collect();
            if let Ok(slope) = fit_log_slope(&pairs, 0..pairs.len()) {
                rates.push(RateRecord {
                    problem: problem.clone(),
                    eps,
                    column: column.into(),
                    slope,
                });
            }
        }
    }
    rates
}
