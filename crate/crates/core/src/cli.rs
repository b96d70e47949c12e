//! Command-line front end. [`run`] parses arguments, dispatches to one
//! subcommand and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | the solver proved or reported infeasibility |
//! | 2 | usage error |
//! | 3 | I/O or model error |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::anneal::{solve_blp_anneal, solve_ilp_anneal, AnnealConfig};
use crate::bench::{self, BenchSettings};
use crate::domain::{
    check_feasibility, format_cents, search_space_log2, Assignment, FeasibilityScope, Instance, ModelKind, SolveReport,
    SolveStatus,
};
use crate::exact::{solve_blp_exact, solve_ilp_exact};
use crate::ingest::{self, generate_instance, load_dir, save_instance, GeneratorConfig};
use crate::model_blp::build_blp;
use crate::model_ilp::{build_ilp_with, write_grounded_csv, IlpOptions};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

const SEED_ENV: &str = "FLEETOPT_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "fleetopt",
    version,
    about = "Airline fleet assignment: exact and annealing solvers"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded synthetic instance directory.
    Generate(GenerateArgs),
    /// Solve an instance and print the assignment as CSV.
    Solve(SolveArgs),
    /// Compare both backends over a ladder of generated instances.
    Bench(BenchArgs),
    /// Write a Graphviz timeline of an assigned schedule.
    ExportDot(ExportDotArgs),
    /// Print model sizes and the search space of an instance.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Blp,
    Ilp,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Blp => ModelKind::Blp,
            Model::Ilp => ModelKind::Ilp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Anneal,
}

fn seconds(s: &str) -> std::result::Result<Duration, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number of seconds"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err("time limit must be positive".into());
    }
    Ok(Duration::from_secs_f64(v))
}

#[derive(Debug, Args)]
struct GeneratorArgs {
    #[arg(long, default_value_t = 46)]
    flights_per_day: usize,
    #[arg(long, default_value_t = 7)]
    days: u32,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Weight of the squared seat mismatch.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
}

impl GeneratorArgs {
    fn config(&self) -> GeneratorConfig {
        let mut c = GeneratorConfig::new(self.flights_per_day, self.days, self.seed);
        c.lambda = self.lambda;
        c
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct AnnealArgs {
    /// Sweeps per restart [default: 2000·√bits].
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    anneal_seed: u64,
    /// Report only samples that decode feasibly without repair.
    #[arg(long)]
    no_repair: bool,
    /// Skip the local-search pass over decoded assignments.
    #[arg(long)]
    no_polish: bool,
    /// Wall-clock limit for the annealer, in seconds.
    #[arg(long, value_parser = seconds)]
    anneal_time_limit: Option<Duration>,
}

impl AnnealArgs {
    fn config(&self) -> AnnealConfig {
        AnnealConfig {
            sweeps: self.sweeps,
            restarts: self.restarts,
            seed: self.anneal_seed,
            repair: !self.no_repair,
            polish: !self.no_polish,
            time_limit: self.anneal_time_limit,
            ..AnnealConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Instance directory.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Model::Blp)]
    model: Model,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    /// Solve only this day; required for the balance model on multi-day data.
    #[arg(long)]
    day: Option<u32>,
    /// Wall-clock limit for the exact backend, in seconds.
    #[arg(long, value_parser = seconds)]
    time_limit: Option<Duration>,
    /// Drop the per-fleet flight cap rows of the balance model.
    #[arg(long)]
    no_flight_cap: bool,
    #[command(flatten)]
    anneal: AnnealArgs,
    /// Assignment CSV path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write end-of-day grounded aircraft per airport (balance model).
    #[arg(long)]
    grounded: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Model::Blp)]
    model: Model,
    /// Comma-separated flights per day [default: the ladder].
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Days per instance [default: 7 for blp, 1 for ilp].
    #[arg(long)]
    days: Option<u32>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Include the 1104, 1840 and 3680 flight rows.
    #[arg(long)]
    large: bool,
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
    /// Rows solved concurrently.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Wall-clock limit per exact solve, in seconds [default with --large: 3600].
    #[arg(long, value_parser = seconds)]
    time_limit: Option<Duration>,
    #[arg(long)]
    no_flight_cap: bool,
    #[command(flatten)]
    anneal: AnnealArgs,
}

#[derive(Debug, Args)]
struct ExportDotArgs {
    #[arg(long)]
    data: PathBuf,
    /// Assignment CSV to draw; without it the instance is solved first.
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    /// Draw only this day.
    #[arg(long)]
    day: Option<u32>,
    #[command(flatten)]
    anneal: AnnealArgs,
    #[arg(long, default_value = "timeline.dot")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct InspectArgs {
    /// Instance directory; without it an instance is generated from the
    /// generator flags.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, value_enum, default_value_t = Model::Blp)]
    model: Model,
    #[arg(long)]
    day: Option<u32>,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().ansi().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Config(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Generate(a) => generate(a, out),
        Command::Solve(a) => solve(a, out, err),
        Command::Bench(a) => run_bench(a, out, err),
        Command::ExportDot(a) => export_dot(a, out, err),
        Command::Inspect(a) => inspect(a, out),
    }
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<i32> {
    let instance = generate_instance(&a.generator.config())?;
    let paths = save_instance(&instance, &a.out_dir)?;
    for p in [&paths.fleet, &paths.schedule, &paths.cost, &paths.manifest] {
        writeln!(out, "{}", p.display())?;
    }
    Ok(EXIT_OK)
}

fn select_day(instance: Instance, day: Option<u32>) -> Result<Instance> {
    match day {
        None => Ok(instance),
        Some(d) if instance.days().contains(&d) => Ok(instance.restrict_to_day(d)),
        Some(d) => Err(Error::Config(format!("instance has no day {d}"))),
    }
}

/// Solution of one solve call together with the instance it refers to.
struct Solved {
    instance: Instance,
    report: SolveReport,
    grounded: Option<Vec<u8>>,
}

fn solve_instance(
    instance: Instance,
    model: ModelKind,
    backend: Backend,
    time_limit: Option<Duration>,
    anneal: &AnnealConfig,
    ilp: IlpOptions,
) -> Result<Solved> {
    match model {
        ModelKind::Blp => {
            let m = build_blp(&instance);
            let report = match backend {
                Backend::Exact => solve_blp_exact(&m, time_limit),
                Backend::Anneal => solve_blp_anneal(&m, anneal)?,
            };
            Ok(Solved {
                instance,
                report,
                grounded: None,
            })
        }
        ModelKind::Ilp => {
            let m = build_ilp_with(&instance, ilp)?;
            let report = match backend {
                Backend::Exact => solve_ilp_exact(&m, time_limit),
                Backend::Anneal => solve_ilp_anneal(&m, anneal)?,
            };
            let grounded = match &report.assignment {
                Some(a) => {
                    let g = m.grounded(&a.fleet_of);
                    let mut buf = Vec::new();
                    write_grounded_csv(&mut buf, m.network.airports(), &m.fleet_names, &g.end_of_day)?;
                    Some(buf)
                }
                None => None,
            };
            Ok(Solved {
                instance,
                report,
                grounded,
            })
        }
    }
}

fn verify(solved: &Solved, model: ModelKind) -> Result<()> {
    let Some(a) = &solved.report.assignment else {
        return Ok(());
    };
    let scope = match model {
        ModelKind::Blp => FeasibilityScope::Blp,
        ModelKind::Ilp => FeasibilityScope::Ilp,
    };
    let violations = check_feasibility(&solved.instance, a, scope);
    if let Some(v) = violations.first() {
        return Err(Error::ModelInconsistency(format!(
            "solver returned an infeasible assignment ({} violations, first: {v:?})",
            violations.len()
        )));
    }
    Ok(())
}

fn write_report(err: &mut dyn Write, model: ModelKind, backend: Backend, r: &SolveReport) -> Result<()> {
    let backend = match backend {
        Backend::Exact => "exact",
        Backend::Anneal => "anneal",
    };
    let cents = |c: Option<i64>| c.map_or("-".to_string(), format_cents);
    writeln!(
        err,
        "model={model} backend={backend} status={} objective={} bound={} time_s={:.3} explored={}",
        r.status,
        cents(r.objective),
        cents(r.bound),
        r.wall_time.as_secs_f64(),
        r.explored
    )?;
    Ok(())
}

fn exit_for(r: &SolveReport) -> i32 {
    match (r.status, r.has_solution()) {
        (SolveStatus::Infeasible, _) | (_, false) => EXIT_INFEASIBLE,
        _ => EXIT_OK,
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let model: ModelKind = a.model.into();
    if a.grounded.is_some() && model != ModelKind::Ilp {
        return Err(Error::Config("--grounded needs --model ilp".into()));
    }
    let config = a.anneal.config();
    config.validate()?;
    let instance = select_day(load_dir(&a.data)?, a.day)?;
    let ilp = IlpOptions {
        flight_cap: !a.no_flight_cap,
    };
    let solved = solve_instance(instance, model, a.backend, a.time_limit, &config, ilp)?;
    verify(&solved, model)?;
    write_report(err, model, a.backend, &solved.report)?;
    if let Some(assignment) = &solved.report.assignment {
        match &a.out {
            Some(path) => ingest::write_assignment_csv(fs::File::create(path)?, &solved.instance, assignment)?,
            None => ingest::write_assignment_csv(&mut *out, &solved.instance, assignment)?,
        }
    }
    if let (Some(path), Some(body)) = (&a.grounded, &solved.grounded) {
        fs::write(path, body)?;
    }
    Ok(exit_for(&solved.report))
}

fn run_bench(a: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let model: ModelKind = a.model.into();
    let mut configs = if a.sizes.is_empty() {
        bench::ladder(model, a.large, a.seed)
    } else {
        let days = if model == ModelKind::Ilp { 1 } else { 7 };
        a.sizes.iter().map(|&n| GeneratorConfig::new(n, days, a.seed)).collect()
    };
    if let Some(d) = a.days {
        if model == ModelKind::Ilp && d != 1 {
            return Err(Error::Config("the balance model is single-day; use --days 1".into()));
        }
        for c in &mut configs {
            c.days = d;
        }
    }
    for c in &configs {
        c.validate()?;
    }
    let mut anneal = a.anneal.config();
    let mut exact_time_limit = a.time_limit;
    if a.large {
        exact_time_limit.get_or_insert(Duration::from_secs(3600));
        anneal.time_limit.get_or_insert(Duration::from_secs(600));
    }
    let settings = BenchSettings {
        model,
        anneal,
        exact_time_limit,
        ilp: IlpOptions {
            flight_cap: !a.no_flight_cap,
        },
        workers: a.workers,
    };
    let rows = bench::run_suite(&configs, &settings)?;
    let paths = bench::write_report(&rows, &configs, &settings, &a.out_dir)?;
    write!(out, "{}", bench::render_csv(&rows))?;
    for p in paths {
        writeln!(err, "wrote {}", p.display())?;
    }
    Ok(EXIT_OK)
}

fn read_or_solve(a: &ExportDotArgs, instance: Instance, err: &mut dyn Write) -> Result<(Instance, Option<Assignment>)> {
    if let Some(path) = &a.assignment {
        let assignment = ingest::read_assignment_csv(path, &instance)?;
        return Ok((instance, Some(assignment)));
    }
    let config = a.anneal.config();
    config.validate()?;
    let solved = solve_instance(
        instance,
        ModelKind::Blp,
        a.backend,
        None,
        &config,
        IlpOptions::default(),
    )?;
    write_report(err, ModelKind::Blp, a.backend, &solved.report)?;
    Ok((solved.instance, solved.report.assignment))
}

fn export_dot(a: ExportDotArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let full = load_dir(&a.data)?;
    if let Some(d) = a.day {
        if !full.days().contains(&d) {
            return Err(Error::Config(format!("instance has no day {d}")));
        }
    }
    let (full, assignment) = read_or_solve(&a, full, err)?;
    let Some(assignment) = assignment else {
        writeln!(err, "no feasible assignment to draw")?;
        return Ok(EXIT_INFEASIBLE);
    };
    // Assignments are positional over the whole instance.
    let (instance, assignment) = match a.day {
        None => (full, assignment),
        Some(d) => {
            let local = full
                .flights()
                .iter()
                .zip(&assignment.fleet_of)
                .filter(|(f, _)| f.day == d)
                .map(|(_, &j)| j)
                .collect();
            (full.restrict_to_day(d), Assignment::new(local))
        }
    };
    bench::export_timeline_dot(&instance, &assignment, &a.out)?;
    writeln!(out, "{}", a.out.display())?;
    Ok(EXIT_OK)
}

fn load_or_generate(data: Option<&Path>, generator: &GeneratorArgs) -> Result<Instance> {
    match data {
        Some(dir) => load_dir(dir),
        None => generate_instance(&generator.config()),
    }
}

fn inspect(a: InspectArgs, out: &mut dyn Write) -> Result<i32> {
    let instance = select_day(load_or_generate(a.data.as_deref(), &a.generator)?, a.day)?;
    let (variables, constraints) = match a.model {
        Model::Blp => {
            let m = build_blp(&instance);
            (m.variable_count, m.constraint_count)
        }
        Model::Ilp => {
            let m = build_ilp_with(&instance, IlpOptions::default())?;
            (m.variable_count, m.constraint_count)
        }
    };
    writeln!(
        out,
        "flights={} fleets={} days={}",
        instance.flights().len(),
        instance.fleet_count(),
        instance.days().len()
    )?;
    writeln!(out, "variables={variables} constraints={constraints}")?;
    writeln!(out, "search_space_log2={:.1}", search_space_log2(&instance))?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("fleetopt").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn command_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn no_arguments_is_usage_error() {
        let (code, out, err) = call(&[]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("Usage"));
    }

    #[test]
    fn help_and_version_succeed() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, EXIT_OK);
        for sub in ["generate", "solve", "bench", "export-dot", "inspect"] {
            assert!(out.contains(sub), "{sub} missing from help");
        }
        assert_eq!(call(&["--version"]).0, EXIT_OK);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(call(&["solve", "--data", "x", "--frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["solve", "--data", "x", "--model", "lp"]).0, EXIT_USAGE);
        assert_eq!(call(&["bench", "--time-limit", "-1"]).0, EXIT_USAGE);
    }

    #[test]
    fn inspect_generated_week() {
        let (code, out, _) = call(&["inspect", "--flights-per-day", "46", "--days", "7"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("variables=1288 constraints=350"), "{out}");
        assert!(out.contains("search_space_log2=644.0"), "{out}");
    }

    #[test]
    fn missing_data_dir_is_io_error() {
        let (code, _, err) = call(&["solve", "--data", "/nonexistent/fleetopt"]);
        assert_eq!(code, EXIT_FAILURE);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn missing_day_is_usage_error() {
        let (code, _, _) = call(&["inspect", "--days", "2", "--day", "5"]);
        assert_eq!(code, EXIT_USAGE);
    }
}
