use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use estokes::harness::{
    exit_code, export_vtk, run_acceptance, run_solve, run_sweep_eps, run_sweep_h, ErrorTable, Experiment, Format,
    ProblemSelection, RunConfig,
};
use estokes::problems::{ProblemKind, SolveOptions};
use estokes::Error;

#[derive(Parser)]
#[command(
    name = "estokes",
    version,
    about = "Stokes / pressure-Poisson / epsilon-Stokes finite-element lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the selected problems and print one error row per solve.
    Solve(Flags),
    /// One ES row per epsilon, measured against the S and PP solutions.
    SweepEps(Flags),
    /// Errors per mesh size with fitted h-rates.
    SweepH(Flags),
    /// Run the acceptance suite and print a JSON report.
    Verify(Flags),
    /// Write VTK files for the selected problems into the --out directory.
    ExportVtk(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    /// S, PP, ES or all.
    #[arg(long)]
    problem: Option<ProblemSelection>,
    /// Mesh subdivisions per side; comma-separated list allowed.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Strictly ascending epsilon values, comma-separated.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<Format>,
    /// Directory for MatrixMarket dumps of the assembled systems.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

impl Flags {
    fn config(self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.case {
            cfg.case = v;
        }
        if let Some(v) = self.problem {
            cfg.problem = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if self.delta.is_some() {
            cfg.delta = self.delta;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if self.dump_matrix.is_some() {
            cfg.dump_matrix = self.dump_matrix;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn error_code(e: &Error) -> u8 {
    if e.is_solver_failure() {
        3
    } else {
        2
    }
}

fn emit(table: &ErrorTable, cfg: &RunConfig) {
    // run_* already wrote the file when --out is set
    if cfg.out.is_none() {
        print!("{}", table.render(cfg.format));
    }
}

fn export(cfg: &RunConfig) -> Result<(), Error> {
    let dir = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Config("export-vtk needs --out <directory>".into()))?;
    std::fs::create_dir_all(&dir)?;
    let case = cfg.manufactured_case()?;
    let opts = SolveOptions {
        tol: cfg.tol,
        dump_dir: cfg.dump_matrix.clone(),
        ..Default::default()
    };
    for &n in &cfg.n {
        let exp = Experiment::new(&case, n, &opts)?;
        let mut results = Vec::new();
        for r in [&exp.stokes, &exp.pp] {
            if cfg.problem.includes(r.problem) {
                results.push(r.clone());
            }
        }
        if cfg.problem.includes(ProblemKind::ES) {
            for &e in &cfg.eps {
                results.push(exp.solve_es(e)?);
            }
        }
        for r in results {
            let name = match r.epsilon {
                Some(e) => format!("{}_{}_n{n}_eps{e:e}.vtk", case.name, r.problem),
                None => format!("{}_{}_n{n}.vtk", case.name, r.problem),
            };
            let path = dir.join(name);
            export_vtk(&r.u, &r.p, &path)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Solve(flags) => {
            let cfg = flags.config()?;
            emit(&run_solve(&cfg)?, &cfg);
        }
        Command::SweepEps(flags) => {
            let cfg = flags.config()?;
            emit(&run_sweep_eps(&cfg)?, &cfg);
        }
        Command::SweepH(flags) => {
            let cfg = flags.config()?;
            emit(&run_sweep_h(&cfg)?, &cfg);
        }
        Command::Verify(flags) => {
            let cfg = flags.config()?;
            let report = run_acceptance(&cfg)?;
            for c in &report.criteria {
                eprintln!("{}", c.line());
            }
            match &cfg.out {
                Some(path) => std::fs::write(path, report.to_json())?,
                None => print!("{}", report.to_json()),
            }
            return Ok(exit_code(&report) as u8);
        }
        Command::ExportVtk(flags) => export(&flags.config()?)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
