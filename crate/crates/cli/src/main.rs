mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use zermelo::fixedpoint::spin_half_closed_form;
use zermelo::geodesic::{
    covering_curve, sample_trajectory, write_covering_csv, write_unitary_csv, Trajectory,
};
use zermelo::problem::{ControlSolution, NavigationProblem, ProblemFile, SolveMethod};
use zermelo::verify::{verify_solution, Thresholds};
use zermelo::Error;

/// Solutions with a larger endpoint error make `solve` exit with status 2.
const ENDPOINT_LIMIT: f64 = 1e-6;
const FIGURE_OMEGAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Parser)]
#[command(name = "zermelo", version, about = "Time-optimal gate synthesis under a background Hamiltonian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print the control solution as JSON.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution against a problem and print the verification report.
    Verify {
        problem: PathBuf,
        solution: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        /// Samples along the path for the invariant checks.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Covering-map curves of the spin-1/2 example.
    Demo {
        /// Wind strengths; repeat the flag for several curves.
        #[arg(long = "omega", num_args = 1.., default_values_t = FIGURE_OMEGAS)]
        omegas: Vec<f64>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// CSV path; with several ω values, one file per value is written
        /// next to it as `<stem>_omega<ω>.csv`.
        #[arg(long, default_value = "figure1.csv")]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Sample the optimal trajectory of a solved problem as CSV.
    Trajectory {
        problem: PathBuf,
        solution: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Write U(t) entries even for a qubit instead of covering-map points.
        #[arg(long)]
        unitary: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Continuation,
    Fixedpoint,
    Auto,
}

impl From<MethodArg> for SolveMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Continuation => SolveMethod::Continuation,
            MethodArg::Fixedpoint => SolveMethod::Fixedpoint,
            MethodArg::Auto => SolveMethod::Auto,
        }
    }
}

/// Overrides for the options stored in the problem file.
#[derive(Args)]
struct SolverFlags {
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    quad_nodes: Option<usize>,
    #[arg(long)]
    polish: bool,
    #[arg(long)]
    allow_strong_wind: bool,
    /// Remove a trace component from H0 instead of rejecting the file.
    #[arg(long)]
    project_traceless: bool,
    #[arg(long)]
    seed: Option<u64>,
}

/// Failure carrying its exit status.
struct Failure {
    status: u8,
    error: Error,
}

impl Failure {
    fn input(error: Error) -> Self {
        Self { status: 1, error }
    }

    /// Input problems exit with 1, solver problems with `status`.
    fn classify(error: Error, status: u8) -> Self {
        let status = if error.is_input_error() || matches!(error, Error::Io(_)) {
            1
        } else {
            status
        };
        Self { status, error }
    }
}

#[derive(Serialize)]
struct ErrorObject<'a> {
    code: &'a str,
    message: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve {
            problem,
            solver,
            out,
        } => cmd_solve(&problem, &solver, out.as_deref()),
        Command::Verify {
            problem,
            solution,
            solver,
            grid,
            out,
        } => cmd_verify(&problem, &solution, &solver, grid, out.as_deref()),
        Command::Demo {
            omegas,
            samples,
            out,
            svg,
        } => cmd_demo(&omegas, samples, &out, svg.as_deref()),
        Command::Trajectory {
            problem,
            solution,
            solver,
            samples,
            unitary,
            out,
            svg,
        } => cmd_trajectory(
            &problem,
            &solution,
            &solver,
            samples,
            unitary,
            out.as_deref(),
            svg.as_deref(),
        ),
    };
    match outcome {
        Ok(status) => ExitCode::from(status),
        Err(failure) => {
            let object = ErrorObject {
                code: failure.error.code(),
                message: failure.error.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&object).expect("error object serializes"));
            ExitCode::from(failure.status)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input(Error::Io(format!("{}: {e}", path.display()))))
}

fn load_problem(path: &Path, flags: &SolverFlags) -> Result<NavigationProblem, Failure> {
    let mut file = ProblemFile::from_json(&read_text(path)?).map_err(Failure::input)?;
    let options = &mut file.options;
    if let Some(m) = flags.method {
        options.method = m.into();
    }
    if let Some(s) = flags.steps {
        options.steps = s;
    }
    if let Some(q) = flags.quad_nodes {
        options.quad_nodes = q;
    }
    if let Some(s) = flags.seed {
        options.seed = s;
    }
    options.polish |= flags.polish;
    options.allow_strong_wind |= flags.allow_strong_wind;
    file.into_problem(flags.project_traceless).map_err(Failure::input)
}

fn load_solution(path: &Path, problem: &NavigationProblem) -> Result<ControlSolution, Failure> {
    let solution = ControlSolution::from_json(&read_text(path)?).map_err(Failure::input)?;
    solution.validate(problem.dim()).map_err(Failure::input)?;
    Ok(solution)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let result = match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| Failure::input(Error::from(e)))
}

fn cmd_solve(path: &Path, flags: &SolverFlags, out: Option<&Path>) -> Result<u8, Failure> {
    let problem = load_problem(path, flags)?;
    let solution = problem.solve().map_err(|e| Failure::classify(e, 2))?;
    emit(&format!("{}\n", solution.to_json()), out)?;
    if solution.diagnostics.endpoint_error <= ENDPOINT_LIMIT {
        Ok(0)
    } else {
        log::error!(
            "endpoint error {:.3e} exceeds {ENDPOINT_LIMIT:e}",
            solution.diagnostics.endpoint_error
        );
        Ok(2)
    }
}

fn cmd_verify(
    problem_path: &Path,
    solution_path: &Path,
    flags: &SolverFlags,
    grid: usize,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let problem = load_problem(problem_path, flags)?;
    let solution = load_solution(solution_path, &problem)?;
    let report = verify_solution(&problem, &solution, grid).map_err(|e| Failure::classify(e, 2))?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    emit(&format!("{text}\n"), out)?;
    let failed = report.failures(&Thresholds::default());
    if failed.is_empty() {
        Ok(0)
    } else {
        log::error!("checks over threshold: {}", failed.join(", "));
        Ok(3)
    }
}

fn csv_bytes(traj: &Trajectory, unitary: bool) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    if unitary {
        write_unitary_csv(traj, &mut buf)
    } else {
        write_covering_csv(traj, &mut buf)
    }
    .map_err(|e| Failure::classify(e, 2))?;
    Ok(buf)
}

fn demo_path(out: &Path, omega: f64) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("figure1");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_omega{omega}.{ext}"))
}

fn cmd_demo(omegas: &[f64], samples: usize, out: &Path, svg_path: Option<&Path>) -> Result<u8, Failure> {
    if samples < 2 {
        return Err(Failure::input(Error::InvalidArgument("samples must be at least 2".into())));
    }
    let mut curves = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let problem = NavigationProblem::spin_half(omega);
        let solution = spin_half_closed_form(omega);
        let h1 = solution.h1_0.as_ref().expect("closed form has a control");
        let traj = sample_trajectory(&problem.h0, h1, &problem.u_i, solution.duration, samples)
            .map_err(|e| Failure::classify(e, 2))?;
        let path = if omegas.len() == 1 {
            out.to_path_buf()
        } else {
            demo_path(out, omega)
        };
        fs::write(&path, csv_bytes(&traj, false)?).map_err(|e| Failure::input(Error::from(e)))?;
        let points = covering_curve(&traj).map_err(|e| Failure::classify(e, 2))?;
        curves.push((format!("ω = {omega}"), points.into_iter().map(|(_, p)| p).collect()));
    }
    if let Some(path) = svg_path {
        fs::write(path, svg::render(&curves)).map_err(|e| Failure::input(Error::from(e)))?;
    }
    Ok(0)
}

fn cmd_trajectory(
    problem_path: &Path,
    solution_path: &Path,
    flags: &SolverFlags,
    samples: usize,
    unitary: bool,
    out: Option<&Path>,
    svg_path: Option<&Path>,
) -> Result<u8, Failure> {
    let problem = load_problem(problem_path, flags)?;
    let solution = load_solution(solution_path, &problem)?;
    let h1 = match &solution.h1_0 {
        Some(h) => h.clone(),
        None => zermelo::algebra::HermitianOperator::zeros(problem.dim()),
    };
    let traj = sample_trajectory(&problem.h0, &h1, &problem.u_i, solution.duration, samples)
        .map_err(|e| Failure::classify(e, 2))?;
    let unitary = unitary || problem.dim() != 2;
    let buf = csv_bytes(&traj, unitary)?;
    match out {
        Some(path) => fs::write(path, &buf),
        None => io::stdout().lock().write_all(&buf),
    }
    .map_err(|e| Failure::input(Error::from(e)))?;
    if let Some(path) = svg_path {
        if problem.dim() != 2 {
            return Err(Failure::input(Error::InvalidArgument(
                "SVG output needs a qubit problem".into(),
            )));
        }
        let points = covering_curve(&traj).map_err(|e| Failure::classify(e, 2))?;
        let curves = vec![("trajectory".to_string(), points.into_iter().map(|(_, p)| p).collect())];
        fs::write(path, svg::render(&curves)).map_err(|e| Failure::input(Error::from(e)))?;
    }
    Ok(0)
}
