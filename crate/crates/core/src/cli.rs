//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input (parse or
//! validation), 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{spectral_check, verify_bounds, BoundMode};
use crate::complex::{parse_manifest, Triangulation};
use crate::curvature::{covolume, curvature_with, functional_h_with, lift, realizability_report, Evaluation};
use crate::error::Error;
use crate::flow::{run_flow, solve, FlowConfig, FlowEquation, FlowStatus, FlowTrajectory, Method};
use crate::hypertet::{extended_dihedral_angles, CovolumeQuadrature};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hyperideal-flow",
    version,
    about = "Extended Ricci flow on ideally triangulated pseudo 3-manifolds"
)]
struct Cli {
    /// Evaluate tetrahedra on N worker threads (results are identical to serial runs).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the number of edge classes and their valences.
    Edges { manifest: PathBuf },
    /// Print the dihedral angles of every tetrahedron.
    Angles {
        manifest: PathBuf,
        #[command(flatten)]
        metric: MetricSource,
    },
    /// Report realizability per tetrahedron and the curvature bounds.
    Check {
        manifest: PathBuf,
        #[command(flatten)]
        metric: MetricSource,
    },
    /// Integrate the flow and write the trajectory as CSV.
    Flow {
        manifest: PathBuf,
        #[command(flatten)]
        metric: MetricSource,
        #[command(flatten)]
        flow: FlowArgs,
        /// Write the CSV here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Flow to a zero-curvature metric, polish it and certify the result.
    Solve {
        manifest: PathBuf,
        #[command(flatten)]
        metric: MetricSource,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Print the co-volume and H at a metric.
    Covolume {
        manifest: PathBuf,
        #[command(flatten)]
        metric: MetricSource,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct MetricSource {
    /// Same length on every edge class.
    #[arg(long)]
    uniform: Option<f64>,
    /// File of `class_id value` lines.
    #[arg(long, value_name = "FILE")]
    metric: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Rkf45,
}

#[derive(Debug, Args)]
struct FlowArgs {
    #[arg(long, value_enum, default_value = "rkf45")]
    method: MethodArg,
    /// Step for rk4, initial step for rkf45.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Relative tolerance for rkf45.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Stop when the largest |K| drops below this.
    #[arg(long, default_value_t = 1e-10)]
    stop_tol: f64,
    #[arg(long, default_value_t = 500.0)]
    t_max: f64,
    /// Keep every n-th accepted step.
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Integrate dl/dt = K instead of dl/dt = K l (comparison only).
    #[arg(long, hide = true)]
    luo: bool,
}

impl FlowArgs {
    fn config(&self, evaluation: Evaluation) -> FlowConfig {
        FlowConfig {
            method: match self.method {
                MethodArg::Rk4 => Method::Rk4,
                MethodArg::Rkf45 => Method::Rkf45,
            },
            dt: self.dt,
            rel_tol: self.tol,
            stop_tol: self.stop_tol,
            t_max: self.t_max,
            record_every: self.record_every,
            equation: if self.luo { FlowEquation::Luo } else { FlowEquation::Extended },
            evaluation,
            ..FlowConfig::default()
        }
    }
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            _ if e.is_numerical() => EXIT_NUMERICAL,
            Error::Precondition(_) => EXIT_NUMERICAL,
            Error::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_manifest(path: &Path) -> std::result::Result<Triangulation, Failure> {
    parse_manifest(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Parses `class_id value` lines; every class must appear exactly once.
pub fn parse_metric_file(text: &str, class_count: usize) -> crate::Result<Vec<f64>> {
    let mut values: Vec<Option<f64>> = vec![None; class_count];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse_err = |message: String| Error::Parse { line, message };
        let [id, value] = fields[..] else {
            return Err(parse_err(format!("expected `class_id value`, found {} fields", fields.len())));
        };
        let id: usize = id.parse().map_err(|_| parse_err(format!("`{id}` is not a class id")))?;
        let value: f64 = value.parse().map_err(|_| parse_err(format!("`{value}` is not a number")))?;
        if !value.is_finite() {
            return Err(parse_err(format!("length {value} is not finite")));
        }
        let slot = values
            .get_mut(id)
            .ok_or_else(|| parse_err(format!("class {id} out of range 0..{class_count}")))?;
        if slot.replace(value).is_some() {
            return Err(parse_err(format!("class {id} given twice")));
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Validation(format!("metric file has no value for class {i}"))))
        .collect()
}

impl MetricSource {
    fn resolve(&self, t: &Triangulation, require_positive: bool) -> std::result::Result<Vec<f64>, Failure> {
        let values = match (self.uniform, &self.metric) {
            (Some(v), None) => {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Failure::usage(format!("--uniform must be positive, got {v}")));
                }
                vec![v; t.class_count()]
            }
            (None, Some(path)) => parse_metric_file(&read(path)?, t.class_count())
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
            _ => return Err(Failure::usage("give exactly one of --uniform or --metric")),
        };
        if require_positive {
            if let Some(i) = values.iter().position(|&v| !(v > 0.0)) {
                return Err(Failure::input(format!(
                    "length of class {i} must be positive, got {}",
                    values[i]
                )));
            }
        }
        Ok(values)
    }
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.12}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Writes a trajectory as CSV: `t, l_0.., K_0.., H` in full precision.
pub fn write_trajectory_csv(traj: &FlowTrajectory, out: &mut dyn Write) -> std::io::Result<()> {
    let m = traj.samples.first().map_or(0, |s| s.l.len());
    let mut header = String::from("t");
    for i in 0..m {
        write!(header, ",l_{i}").unwrap();
    }
    for i in 0..m {
        write!(header, ",K_{i}").unwrap();
    }
    header.push_str(",H");
    writeln!(out, "{header}")?;
    for s in &traj.samples {
        let mut row = format!("{:.16e}", s.t);
        for v in s.l.iter().chain(s.k.iter()).chain(std::iter::once(&s.h)) {
            write!(row, ",{v:.16e}").unwrap();
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::input(format!("write failed: {e}"))
}

fn dispatch(command: &Command, eval: Evaluation, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Edges { manifest } => {
            let t = load_manifest(manifest)?;
            writeln!(out, "classes: {}, valences: {:?}", t.class_count(), t.valences())
                .map_err(io_failure)?;
        }
        Command::Angles { manifest, metric } => {
            let t = load_manifest(manifest)?;
            let l = metric.resolve(&t, true)?;
            for tet in 0..t.tet_count() {
                let a = extended_dihedral_angles(&lift(&t, &l, tet));
                writeln!(out, "tet {tet}: {}", fmt_list(&a.0)).map_err(io_failure)?;
            }
        }
        Command::Check { manifest, metric } => {
            let t = load_manifest(manifest)?;
            let l = metric.resolve(&t, true)?;
            for r in realizability_report(&t, &l)? {
                let verdict = if r.realizable { "realizable" } else { "not realizable" };
                writeln!(out, "tet {}: {verdict} (max |phi| = {:.12})", r.tet, r.max_abs_phi)
                    .map_err(io_failure)?;
            }
            let k = curvature_with(&t, &l, eval)?;
            writeln!(out, "curvature: {}", fmt_list(&k)).map_err(io_failure)?;
            let tau = std::f64::consts::TAU;
            let within = k
                .iter()
                .zip(t.valences())
                .all(|(&k, &d)| k >= tau - std::f64::consts::PI * d as f64 && k <= tau);
            writeln!(
                out,
                "curvature bounds 2pi - pi*d <= K <= 2pi: {}",
                if within { "ok" } else { "violated" }
            )
            .map_err(io_failure)?;
        }
        Command::Flow { manifest, metric, flow, output } => {
            let t = load_manifest(manifest)?;
            let l = metric.resolve(&t, true)?;
            let traj = run_flow(&t, &l, &flow.config(eval))?;
            match output {
                Some(path) => {
                    let mut file = fs::File::create(path)
                        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                    write_trajectory_csv(&traj, &mut file).map_err(io_failure)?;
                }
                None => write_trajectory_csv(&traj, out).map_err(io_failure)?,
            }
            let last = traj.last();
            let _ = writeln!(
                err,
                "status: {:?}, steps: {}, t = {}, max |K| = {:e}",
                traj.status,
                traj.steps,
                last.t,
                last.k.max_abs()
            );
            if let FlowStatus::Diverged(reason) = traj.status {
                return Err(Failure { code: EXIT_NUMERICAL, message: reason });
            }
        }
        Command::Solve { manifest, metric, flow } => {
            let t = load_manifest(manifest)?;
            let l = metric.resolve(&t, true)?;
            let sol = solve(&t, &l, &flow.config(eval))?;
            let d_max = t.classes().max_valence();
            let bounds = verify_bounds(&sol.trajectory, d_max, BoundMode::UpperAndLower);
            let spectral = spectral_check(&t, &sol.metric)?;
            let mut text = String::new();
            writeln!(text, "solution: {}", fmt_list(&sol.metric)).unwrap();
            writeln!(text, "max |K|: {:.3e}", sol.report.max_abs_curvature).unwrap();
            writeln!(text, "flow: {:?} after {} steps", sol.report.flow_status, sol.trajectory.steps)
                .unwrap();
            match &sol.report.convergence {
                Some(c) if c.is_stationary() => writeln!(text, "rate: stationary").unwrap(),
                Some(c) => writeln!(
                    text,
                    "rate: {:.6} (r^2 = {:.6}, {} samples)",
                    c.rate, c.r_squared, c.samples_used
                )
                .unwrap(),
                None => writeln!(text, "rate: not enough samples").unwrap(),
            }
            writeln!(
                text,
                "realizable: {}",
                if sol.report.all_realizable() { "all tetrahedra" } else { "no" }
            )
            .unwrap();
            writeln!(
                text,
                "bounds ({:.6}, {:.6}): upper {}, lower {} (max l = {:.6} at t = {}, min l = {:.6} at t = {})",
                bounds.lower_bound,
                bounds.upper_bound,
                if bounds.upper_ok { "ok" } else { "violated" },
                if bounds.lower_ok { "ok" } else { "violated" },
                bounds.worst_upper,
                bounds.worst_upper_t,
                bounds.worst_lower,
                bounds.worst_lower_t
            )
            .unwrap();
            writeln!(
                text,
                "spectral: {} {}",
                if spectral.stable { "stable" } else { "unstable" },
                fmt_list(&spectral.eigenvalues)
            )
            .unwrap();
            out.write_all(text.as_bytes()).map_err(io_failure)?;
        }
        Command::Covolume { manifest, metric } => {
            let t = load_manifest(manifest)?;
            let l = metric.resolve(&t, false)?;
            let quad = CovolumeQuadrature::default();
            let cov = covolume(&t, &l, &quad, eval)?;
            let h = functional_h_with(&t, &l, &quad, eval)?;
            writeln!(out, "cov: {cov:.15}\nH: {h:.15}").map_err(io_failure)?;
        }
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.threads {
        None => dispatch(&cli.command, Evaluation::Serial, out, err),
        Some(0) => Err(Failure::usage("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                let (mut buf_out, mut buf_err) = (Vec::new(), Vec::new());
                let r =
                    pool.install(|| dispatch(&cli.command, Evaluation::Parallel, &mut buf_out, &mut buf_err));
                let _ = out.write_all(&buf_out);
                let _ = err.write_all(&buf_err);
                r
            }
            Err(e) => Err(Failure { code: EXIT_NUMERICAL, message: e.to_string() }),
        },
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
