//! Benchmark harness: generate a ladder of instances, solve each with both
//! backends, and write comparison reports and timeline exports.
//!
//! Reported times cover the solve call only; instance generation and model
//! building are excluded.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{solve_blp_anneal, solve_ilp_anneal, AnnealConfig};
use crate::domain::{format_cents, Assignment, Cents, Instance, ModelKind, SolveReport, SolveStatus};
use crate::exact::{solve_blp_exact, solve_ilp_exact};
use crate::ingest::{format_time, generate_instance, GeneratorConfig, LADDER_SIZES};
use crate::model_blp::build_blp;
use crate::model_ilp::{build_ilp_with, IlpOptions};
use crate::{Error, Result};

pub const CSV_FILE: &str = "bench.csv";
pub const JSON_FILE: &str = "bench.json";

/// Ladder sizes run by default; the rest need `large`.
pub const DESK_LADDER: [usize; 5] = [46, 92, 184, 276, 368];

/// Note stored with every report.
pub const TIME_SCOPE: &str = "times cover the solve call only; instance generation and model build are excluded";

/// Solver settings shared by every row of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSettings {
    pub model: ModelKind,
    pub anneal: AnnealConfig,
    pub exact_time_limit: Option<Duration>,
    pub ilp: IlpOptions,
    /// Rows solved concurrently.
    pub workers: usize,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            model: ModelKind::Blp,
            anneal: AnnealConfig::default(),
            exact_time_limit: None,
            ilp: IlpOptions::default(),
            workers: 1,
        }
    }
}

/// Generator configs for the ladder: seven days for the binary model, one
/// for the balance model, four fleets scaled to the day size.
pub fn ladder(model: ModelKind, large: bool, seed: u64) -> Vec<GeneratorConfig> {
    let days = match model {
        ModelKind::Blp => 7,
        ModelKind::Ilp => 1,
    };
    let sizes: &[usize] = if large { &LADDER_SIZES } else { &DESK_LADDER };
    sizes.iter().map(|&n| GeneratorConfig::new(n, days, seed)).collect()
}

/// One backend's result in a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: SolveStatus,
    pub cost: Option<Cents>,
    pub time: Duration,
    /// Set when the backend failed before producing a status.
    pub error: Option<String>,
}

impl Outcome {
    fn from_report(r: &SolveReport) -> Self {
        Self {
            status: r.status,
            cost: if r.has_solution() { r.objective } else { None },
            time: r.wall_time,
            error: None,
        }
    }

    fn failed(e: &Error) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            cost: None,
            time: Duration::ZERO,
            error: Some(e.to_string()),
        }
    }

    /// Cost to two decimals, or the status when there is no cost.
    pub fn cost_cell(&self) -> String {
        match (self.cost, &self.error) {
            (Some(c), _) => format_cents(c),
            (None, Some(_)) => "Error".into(),
            (None, None) => self.status.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// `(flights, fleets, days)` for the binary model, `(flights, fleets)`
    /// for the balance model.
    pub label: String,
    /// Flights over all days.
    pub total_flights: usize,
    pub variables: usize,
    pub constraints: usize,
    pub exact: Outcome,
    pub anneal: Outcome,
}

impl BenchRow {
    /// `(anneal − exact) / exact` when both backends report a cost.
    pub fn gap(&self) -> Option<f64> {
        match (self.exact.cost, self.anneal.cost) {
            (Some(e), Some(a)) if e != 0 => Some((a - e) as f64 / e as f64),
            (Some(0), Some(0)) => Some(0.0),
            _ => None,
        }
    }
}

fn label(config: &GeneratorConfig, model: ModelKind) -> String {
    match model {
        ModelKind::Blp => config.label(),
        ModelKind::Ilp => format!("({},{})", config.flights_per_day, config.fleet_spec.len()),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Generates, builds and solves one configuration.
pub fn run_row(config: &GeneratorConfig, settings: &BenchSettings) -> BenchRow {
    let mut row = BenchRow {
        label: label(config, settings.model),
        total_flights: config.flights_per_day * config.days as usize,
        variables: 0,
        constraints: 0,
        exact: Outcome::failed(&Error::Config("not run".into())),
        anneal: Outcome::failed(&Error::Config("not run".into())),
    };
    let instance = match generate_instance(config) {
        Ok(i) => i,
        Err(e) => {
            row.exact = Outcome::failed(&e);
            row.anneal = Outcome::failed(&e);
            return row;
        }
    };
    match settings.model {
        ModelKind::Blp => {
            let model = build_blp(&instance);
            row.variables = model.variable_count;
            row.constraints = model.constraint_count;
            let (exact, t) = timed(|| solve_blp_exact(&model, settings.exact_time_limit));
            row.exact = Outcome {
                time: t,
                ..Outcome::from_report(&exact)
            };
            let (anneal, t) = timed(|| solve_blp_anneal(&model, &settings.anneal));
            row.anneal = match anneal {
                Ok(r) => Outcome {
                    time: t,
                    ..Outcome::from_report(&r)
                },
                Err(e) => Outcome::failed(&e),
            };
        }
        ModelKind::Ilp => {
            let model = match build_ilp_with(&instance, settings.ilp) {
                Ok(m) => m,
                Err(e) => {
                    row.exact = Outcome::failed(&e);
                    row.anneal = Outcome::failed(&e);
                    return row;
                }
            };
            row.variables = model.variable_count;
            row.constraints = model.constraint_count;
            let (exact, t) = timed(|| solve_ilp_exact(&model, settings.exact_time_limit));
            row.exact = Outcome {
                time: t,
                ..Outcome::from_report(&exact)
            };
            let (anneal, t) = timed(|| solve_ilp_anneal(&model, &settings.anneal));
            row.anneal = match anneal {
                Ok(r) => Outcome {
                    time: t,
                    ..Outcome::from_report(&r)
                },
                Err(e) => Outcome::failed(&e),
            };
        }
    }
    row
}

/// Runs every configuration, at most `settings.workers` at a time, and
/// returns the rows in configuration order.
pub fn run_suite(configs: &[GeneratorConfig], settings: &BenchSettings) -> Result<Vec<BenchRow>> {
    settings.anneal.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| configs.par_iter().map(|c| run_row(c, settings)).collect()))
}

fn secs(d: Duration) -> String {
    format!("{:.1}", d.as_secs_f64())
}

/// `bench.csv` body.
pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("label,variables,constraints,exact_cost,anneal_cost,exact_time_s,anneal_time_s,gap\n");
    for r in rows {
        let gap = r.gap().map_or(String::new(), |g| format!("{g:.6}"));
        writeln!(
            out,
            "\"{}\",{},{},{},{},{},{},{}",
            r.label,
            r.variables,
            r.constraints,
            r.exact.cost_cell(),
            r.anneal.cost_cell(),
            secs(r.exact.time),
            secs(r.anneal.time),
            gap
        )
        .expect("writing to a string");
    }
    out
}

#[derive(Serialize)]
struct JsonRow<'a> {
    label: &'a str,
    total_flights: usize,
    variables: usize,
    constraints: usize,
    exact_status: SolveStatus,
    exact_cost: Option<Cents>,
    anneal_status: SolveStatus,
    anneal_cost: Option<Cents>,
    gap: Option<f64>,
    errors: Vec<&'a str>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    note: &'static str,
    settings: &'a BenchSettings,
    configs: &'a [GeneratorConfig],
    rows: Vec<JsonRow<'a>>,
}

/// `bench.json` body: settings, generator configs (with seeds) and the
/// per-row outcomes without times, so that reruns reproduce it exactly.
pub fn render_json(rows: &[BenchRow], configs: &[GeneratorConfig], settings: &BenchSettings) -> Result<String> {
    let report = JsonReport {
        note: TIME_SCOPE,
        settings,
        configs,
        rows: rows
            .iter()
            .map(|r| JsonRow {
                label: &r.label,
                total_flights: r.total_flights,
                variables: r.variables,
                constraints: r.constraints,
                exact_status: r.exact.status,
                exact_cost: r.exact.cost,
                anneal_status: r.anneal.status,
                anneal_cost: r.anneal.cost,
                gap: r.gap(),
                errors: r
                    .exact
                    .error
                    .iter()
                    .chain(&r.anneal.error)
                    .map(String::as_str)
                    .collect(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

/// Plot series as `(file name, x y lines)`; x is the total flight count.
pub fn render_plot_data(rows: &[BenchRow]) -> Vec<(&'static str, String)> {
    type Pick = fn(&BenchRow) -> Option<String>;
    let series: [(&str, Pick); 4] = [
        ("exact_cost.dat", |r| r.exact.cost.map(format_cents)),
        ("anneal_cost.dat", |r| r.anneal.cost.map(format_cents)),
        ("exact_time.dat", |r| {
            r.exact.error.is_none().then(|| secs(r.exact.time))
        }),
        ("anneal_time.dat", |r| r.anneal.cost.map(|_| secs(r.anneal.time))),
    ];
    series
        .iter()
        .map(|(name, pick)| {
            let body: String = rows
                .iter()
                .filter_map(|r| pick(r).map(|y| format!("{} {}\n", r.total_flights, y)))
                .collect();
            (*name, body)
        })
        .collect()
}

/// Writes `bench.csv`, `bench.json` and the plot-data files into `dir`
/// (created if missing) and returns their paths.
pub fn write_report(
    rows: &[BenchRow],
    configs: &[GeneratorConfig],
    settings: &BenchSettings,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Config("no rows to report".into()));
    }
    fs::create_dir_all(dir)?;
    let mut files = vec![
        (CSV_FILE, render_csv(rows)),
        (JSON_FILE, render_json(rows, configs, settings)?),
    ];
    files.extend(render_plot_data(rows));
    let mut paths = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Edge colors, indexed by fleet id.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Graphviz description of the assigned schedule: one node per airport and
/// one edge per flight, colored by its fleet.
pub fn timeline_dot(instance: &Instance, assignment: &Assignment) -> Result<String> {
    let flights = instance.flights();
    if assignment.fleet_of.len() != flights.len() {
        return Err(Error::InvalidInstance(format!(
            "assignment covers {} flights, instance has {}",
            assignment.fleet_of.len(),
            flights.len()
        )));
    }
    let mut airports: Vec<&str> = flights
        .iter()
        .flat_map(|f| [f.origin.as_str(), f.destination.as_str()])
        .collect();
    airports.sort_unstable();
    airports.dedup();
    let mut out = String::from("digraph timeline {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for a in &airports {
        writeln!(out, "  \"{a}\";").expect("writing to a string");
    }
    for (f, &j) in flights.iter().zip(&assignment.fleet_of) {
        let fleet = instance
            .fleets()
            .get(j)
            .ok_or_else(|| Error::UnknownFleet(j.to_string()))?;
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}@{}→{}\", color=\"{}\", class=\"{}\"];",
            f.origin,
            f.destination,
            f.id,
            hhmm(f.departure),
            hhmm(f.arrival),
            PALETTE[fleet.id % PALETTE.len()],
            fleet.name
        )
        .expect("writing to a string");
    }
    out.push_str("}\n");
    Ok(out)
}

fn hhmm(minutes: u16) -> String {
    let mut t = format_time(minutes);
    t.truncate(5);
    t
}

pub fn export_timeline_dot(instance: &Instance, assignment: &Assignment, path: &Path) -> Result<()> {
    let body = timeline_dot(instance, assignment)?;
    let mut file = fs::File::create(path)?;
    file.write_all(body.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tests::{fleet, flight};
    use crate::domain::CostMatrix;

    fn outcome(cost: Option<Cents>, status: SolveStatus) -> Outcome {
        Outcome {
            status,
            cost,
            time: Duration::from_millis(1234),
            error: None,
        }
    }

    fn row(exact: Option<Cents>, anneal: Option<Cents>) -> BenchRow {
        BenchRow {
            label: "(1,1,1)".into(),
            total_flights: 1,
            variables: 1,
            constraints: 2,
            exact: outcome(exact, SolveStatus::Optimal),
            anneal: outcome(
                anneal,
                if anneal.is_some() {
                    SolveStatus::Feasible
                } else {
                    SolveStatus::Infeasible
                },
            ),
        }
    }

    #[test]
    fn gap_formula() {
        let r = row(Some(536_434_080), Some(536_568_240));
        assert!((r.gap().unwrap() - 0.000250).abs() < 5e-7);
        assert_eq!(row(Some(500), None).gap(), None);
    }

    #[test]
    fn infeasible_anneal_cells() {
        let csv = render_csv(&[row(Some(12_127_440), None), row(Some(100), Some(100))]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "\"(1,1,1)\",1,2,121274.40,Infeasible,1.2,1.2,");
        assert_eq!(lines[2], "\"(1,1,1)\",1,2,1.00,1.00,1.2,1.2,0.000000");
    }

    #[test]
    fn plot_data_skips_missing_costs() {
        let data = render_plot_data(&[row(Some(100), None)]);
        let anneal = data.iter().find(|(n, _)| *n == "anneal_cost.dat").unwrap();
        assert!(anneal.1.is_empty());
        let exact = data.iter().find(|(n, _)| *n == "exact_cost.dat").unwrap();
        assert_eq!(exact.1, "1 1.00\n");
    }

    #[test]
    fn trivial_suite_has_zero_gap() {
        let config = GeneratorConfig::new(3, 1, 4);
        let settings = BenchSettings {
            anneal: AnnealConfig {
                sweeps: Some(500),
                ..AnnealConfig::with_seed(1)
            },
            ..BenchSettings::default()
        };
        let rows = run_suite(&[config], &settings).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].gap(), Some(0.0), "{:?}", rows[0]);
        assert_eq!(rows[0].label, "(3,4,1)");
    }

    #[test]
    fn dot_has_one_edge_per_flight() {
        let inst = Instance::new(
            vec![fleet(0, "A330", 300, 1), fleet(1, "B737", 180, 1)],
            vec![flight(11111, "SYD", "MEL", 375, 440, 157, 1)],
            CostMatrix::new(1, 2, vec![100, 200]).unwrap(),
            1.0,
        )
        .unwrap();
        let dot = timeline_dot(&inst, &Assignment::new(vec![0])).unwrap();
        assert_eq!(dot.matches(" -> ").count(), 1);
        assert!(dot.contains("\"SYD\";") && dot.contains("\"MEL\";"));
        assert!(dot.contains("label=\"11111@06:15→07:20\", color=\"#1f77b4\", class=\"A330\""));
        let other = timeline_dot(&inst, &Assignment::new(vec![1])).unwrap();
        let diff: Vec<_> = dot.lines().zip(other.lines()).filter(|(a, b)| a != b).collect();
        assert_eq!(diff.len(), 1);
    }
}
