//! CSV instance format, seeded instance generator, and assignment output.
//!
//! An instance directory holds:
//!
//! * `fleet.csv`: `fleet,capacity,available`
//! * `schedule.csv`: `flight,origin,departure,destination,arrival,passengers,day`
//! * `cost.csv`: `flight,from,to,fleet,total_cost` (one row per flight id and fleet)
//! * `manifest.json`: `lambda`, `seed`, `flights_per_day`, `days`, `fleet_count`
//!
//! Times are written `HH:MM:SS` in 24-hour form. On input a single-digit
//! hour below 6 (such as `1:00:00`) is read as an afternoon time and shifted
//! by twelve hours; a zero-padded hour (`01:00:00`) is taken literally.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    format_cents, parse_cents, Assignment, Cents, CostMatrix, FleetType, Flight, Instance, DEFAULT_LAMBDA,
};
use crate::{Error, Result};

pub const FLEET_FILE: &str = "fleet.csv";
pub const SCHEDULE_FILE: &str = "schedule.csv";
pub const COST_FILE: &str = "cost.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Daily flight counts of the benchmark size ladder.
pub const LADDER_SIZES: [usize; 8] = [46, 92, 184, 276, 368, 1104, 1840, 3680];

/// Airport codes of the sample schedules.
pub const DEFAULT_AIRPORTS: [&str; 9] = ["SYD", "MEL", "HBA", "OOL", "DRW", "ADA", "BNE", "CBR", "PER"];

/// Sample fleet: name, seats, available aircraft.
pub const SAMPLE_FLEET: [(&str, u32, u32); 4] = [
    ("A330", 159, 10),
    ("A220", 192, 15),
    ("B737", 142, 15),
    ("B717", 165, 8),
];

const FIRST_FLIGHT_ID: u64 = 11111;

/// Parses `H:MM[:SS]` / `HH:MM[:SS]` into minutes since midnight.
pub fn parse_time(s: &str) -> Option<u16> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return None;
    }
    let digits = |p: &str, lens: &[usize]| lens.contains(&p.len()) && p.bytes().all(|b| b.is_ascii_digit());
    if !digits(parts[0], &[1, 2]) || !digits(parts[1], &[2]) {
        return None;
    }
    if parts.len() == 3 && (!digits(parts[2], &[2]) || parts[2] != "00") {
        return None;
    }
    let mut hour: u16 = parts[0].parse().ok()?;
    let minute: u16 = parts[1].parse().ok()?;
    if minute >= 60 || hour >= 24 {
        return None;
    }
    if parts[0].len() == 1 && hour < 6 {
        hour += 12;
    }
    Some(hour * 60 + minute)
}

pub fn format_time(minutes: u16) -> String {
    format!("{:02}:{:02}:00", minutes / 60, minutes % 60)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FleetSpec {
    pub name: String,
    pub capacity: u32,
    pub available: u32,
}

/// The sample fleet with availability scaled to a daily flight count, so that
/// the 46-flight sample day sees the sample counts verbatim and larger
/// days keep the same aircraft-to-flight ratio.
pub fn scaled_sample_fleet(flights_per_day: usize) -> Vec<FleetSpec> {
    SAMPLE_FLEET
        .iter()
        .map(|&(name, capacity, available)| FleetSpec {
            name: name.to_string(),
            capacity,
            available: (available as usize * flights_per_day).div_ceil(46) as u32,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub flights_per_day: usize,
    pub days: u32,
    pub fleet_spec: Vec<FleetSpec>,
    pub airports: Vec<String>,
    /// Inclusive passenger range.
    pub demand_range: (u32, u32),
    /// Inclusive cost range in cents.
    pub cost_range: (Cents, Cents),
    pub lambda: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    /// Defaults: sample fleet scaled to the day size, the nine sample
    /// airports, 100–210 passengers, costs 4000.00–6500.00, λ = 1.
    pub fn new(flights_per_day: usize, days: u32, seed: u64) -> Self {
        Self {
            flights_per_day,
            days,
            fleet_spec: scaled_sample_fleet(flights_per_day),
            airports: DEFAULT_AIRPORTS.iter().map(|s| s.to_string()).collect(),
            demand_range: (100, 210),
            cost_range: (400_000, 650_000),
            lambda: DEFAULT_LAMBDA,
            seed,
        }
    }

    pub fn label(&self) -> String {
        format!("({},{},{})", self.flights_per_day, self.fleet_spec.len(), self.days)
    }

    pub fn validate(&self) -> Result<()> {
        if self.flights_per_day == 0 || self.days == 0 {
            return Err(Error::Config("flights_per_day and days must be at least 1".into()));
        }
        let mut codes = self.airports.clone();
        codes.sort();
        codes.dedup();
        if codes.len() < 2 {
            return Err(Error::Config("at least 2 distinct airports are required".into()));
        }
        if codes.len() != self.airports.len() {
            return Err(Error::Config("airport codes must be distinct".into()));
        }
        let (dlo, dhi) = self.demand_range;
        if dlo > dhi || dhi > 400 {
            return Err(Error::Config(format!("demand range {dlo}..={dhi} outside 0..=400")));
        }
        let (clo, chi) = self.cost_range;
        if clo < 0 || clo > chi {
            return Err(Error::Config("cost range must be non-negative and ordered".into()));
        }
        if self.fleet_spec.is_empty() || self.fleet_spec.iter().any(|f| f.capacity == 0) {
            return Err(Error::Config(
                "fleet spec needs at least one fleet with capacity >= 1".into(),
            ));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config("lambda must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Deterministic synthetic instance: departures on a 5-minute grid between
/// 06:00 and 22:00, block times 60–230 minutes (also on the grid, and short
/// enough to land before midnight), uniform demand, and an independent
/// uniform cost per flight and fleet.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let fleets: Vec<FleetType> = config
        .fleet_spec
        .iter()
        .enumerate()
        .map(|(id, f)| FleetType {
            id,
            name: f.name.clone(),
            capacity: f.capacity,
            available: f.available,
        })
        .collect();
    let eta = fleets.len();
    let n_airports = config.airports.len();
    let total = config.flights_per_day * config.days as usize;
    let mut flights = Vec::with_capacity(total);
    let mut cents = Vec::with_capacity(total * eta);
    for day in 1..=config.days {
        for _ in 0..config.flights_per_day {
            let o = rng.gen_range(0..n_airports);
            let mut d = rng.gen_range(0..n_airports - 1);
            if d >= o {
                d += 1;
            }
            let block: u16 = 5 * rng.gen_range(12..=46);
            let latest = (22 * 60).min(23 * 60 + 55 - block);
            let departure: u16 = 6 * 60 + 5 * rng.gen_range(0..=(latest - 6 * 60) / 5);
            let demand = rng.gen_range(config.demand_range.0..=config.demand_range.1);
            flights.push(Flight {
                id: FIRST_FLIGHT_ID + flights.len() as u64,
                origin: config.airports[o].clone(),
                destination: config.airports[d].clone(),
                departure,
                arrival: departure + block,
                demand,
                day,
            });
            for _ in 0..eta {
                cents.push(rng.gen_range(config.cost_range.0..=config.cost_range.1));
            }
        }
    }
    let costs = CostMatrix::new(total, eta, cents)?;
    Ok(Instance::new(fleets, flights, costs, config.lambda)?.with_seed(Some(config.seed)))
}

#[derive(Debug, Serialize, Deserialize)]
struct FleetRow {
    fleet: String,
    capacity: u32,
    available: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleRow {
    flight: u64,
    origin: String,
    departure: String,
    destination: String,
    arrival: String,
    passengers: u32,
    day: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct CostRow {
    flight: u64,
    from: String,
    to: String,
    fleet: String,
    total_cost: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub lambda: f64,
    pub seed: Option<u64>,
    pub flights_per_day: Option<usize>,
    pub days: usize,
    pub fleet_count: usize,
}

impl Manifest {
    pub fn for_instance(instance: &Instance) -> Self {
        let counts: Vec<usize> = instance.flights_by_day().values().map(Vec::len).collect();
        let flights_per_day = match counts.first() {
            Some(&c) if counts.iter().all(|&x| x == c) => Some(c),
            _ => None,
        };
        Self {
            lambda: instance.lambda(),
            seed: instance.seed(),
            flights_per_day,
            days: instance.days().len(),
            fleet_count: instance.fleet_count(),
        }
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(u64, T)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let row: T = rec?;
        // Header is line 1; the reader's position is not exposed through serde.
        out.push((out.len() as u64 + 2, row));
    }
    Ok(out)
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads the three CSV tables into an [`Instance`].
pub fn load_instance(fleet_file: &Path, schedule_file: &Path, cost_file: &Path, lambda: f64) -> Result<Instance> {
    let fleets: Vec<FleetType> = read_rows::<FleetRow>(fleet_file)?
        .into_iter()
        .enumerate()
        .map(|(id, (_, r))| FleetType {
            id,
            name: r.fleet,
            capacity: r.capacity,
            available: r.available,
        })
        .collect();
    let fleet_index: HashMap<&str, usize> = fleets.iter().map(|f| (f.name.as_str(), f.id)).collect();
    if fleet_index.len() != fleets.len() {
        return Err(Error::InvalidInstance("duplicate fleet name in fleet file".into()));
    }

    let mut flights = Vec::new();
    for (line, r) in read_rows::<ScheduleRow>(schedule_file)? {
        let departure = parse_time(&r.departure)
            .ok_or_else(|| parse_err(schedule_file, line, format!("bad departure time `{}`", r.departure)))?;
        let arrival = parse_time(&r.arrival)
            .ok_or_else(|| parse_err(schedule_file, line, format!("bad arrival time `{}`", r.arrival)))?;
        flights.push(Flight {
            id: r.flight,
            origin: r.origin,
            destination: r.destination,
            departure,
            arrival,
            demand: r.passengers,
            day: r.day,
        });
    }

    let mut by_pair: HashMap<(u64, usize), Cents> = HashMap::new();
    for (line, r) in read_rows::<CostRow>(cost_file)? {
        let j = *fleet_index
            .get(r.fleet.as_str())
            .ok_or_else(|| Error::UnknownFleet(r.fleet.clone()))?;
        let c = parse_cents(&r.total_cost)
            .ok_or_else(|| parse_err(cost_file, line, format!("bad total_cost `{}`", r.total_cost)))?;
        if by_pair.insert((r.flight, j), c).is_some() {
            return Err(parse_err(
                cost_file,
                line,
                format!("duplicate cost for flight {} on fleet {}", r.flight, r.fleet),
            ));
        }
    }
    let mut cents = Vec::with_capacity(flights.len() * fleets.len());
    for f in &flights {
        for fleet in &fleets {
            let c = by_pair.get(&(f.id, fleet.id)).ok_or_else(|| Error::MissingCost {
                flight: f.id,
                fleet: fleet.name.clone(),
            })?;
            cents.push(*c);
        }
    }
    let costs = CostMatrix::new(flights.len(), fleets.len(), cents)?;
    Instance::new(fleets, flights, costs, lambda)
}

/// Loads an instance directory written by [`save_instance`]. Without a
/// manifest, λ defaults to 1.
pub fn load_dir(dir: &Path) -> Result<Instance> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: Option<Manifest> = if manifest_path.exists() {
        Some(serde_json::from_str(&fs::read_to_string(&manifest_path)?)?)
    } else {
        None
    };
    let lambda = manifest.as_ref().map_or(DEFAULT_LAMBDA, |m| m.lambda);
    let inst = load_instance(
        &dir.join(FLEET_FILE),
        &dir.join(SCHEDULE_FILE),
        &dir.join(COST_FILE),
        lambda,
    )?;
    Ok(inst.with_seed(manifest.and_then(|m| m.seed)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SavedPaths {
    pub fleet: PathBuf,
    pub schedule: PathBuf,
    pub cost: PathBuf,
    pub manifest: PathBuf,
}

/// Writes the three CSV tables and the manifest into `dir`.
pub fn save_instance(instance: &Instance, dir: &Path) -> Result<SavedPaths> {
    // Cost rows are keyed by flight id alone, so a repeated id must carry
    // identical costs on every day.
    let mut first_of: BTreeMap<u64, usize> = BTreeMap::new();
    let mut cost_order = Vec::new();
    for (pos, f) in instance.flights().iter().enumerate() {
        match first_of.get(&f.id) {
            Some(&first) => {
                if instance.costs().grid().row(first) != instance.costs().grid().row(pos) {
                    return Err(Error::InvalidInstance(format!(
                        "flight id {} repeats across days with different costs",
                        f.id
                    )));
                }
            }
            None => {
                first_of.insert(f.id, pos);
                cost_order.push(pos);
            }
        }
    }

    fs::create_dir_all(dir)?;
    let paths = SavedPaths {
        fleet: dir.join(FLEET_FILE),
        schedule: dir.join(SCHEDULE_FILE),
        cost: dir.join(COST_FILE),
        manifest: dir.join(MANIFEST_FILE),
    };

    let mut w = csv::Writer::from_path(&paths.fleet)?;
    for f in instance.fleets() {
        w.serialize(FleetRow {
            fleet: f.name.clone(),
            capacity: f.capacity,
            available: f.available,
        })?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(&paths.schedule)?;
    if instance.flights().is_empty() {
        w.write_record([
            "flight",
            "origin",
            "departure",
            "destination",
            "arrival",
            "passengers",
            "day",
        ])?;
    }
    for f in instance.flights() {
        w.serialize(ScheduleRow {
            flight: f.id,
            origin: f.origin.clone(),
            departure: format_time(f.departure),
            destination: f.destination.clone(),
            arrival: format_time(f.arrival),
            passengers: f.demand,
            day: f.day,
        })?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(&paths.cost)?;
    if instance.flights().is_empty() || instance.fleets().is_empty() {
        w.write_record(["flight", "from", "to", "fleet", "total_cost"])?;
    }
    for pos in cost_order {
        let f = &instance.flights()[pos];
        for fleet in instance.fleets() {
            w.serialize(CostRow {
                flight: f.id,
                from: f.origin.clone(),
                to: f.destination.clone(),
                fleet: fleet.name.clone(),
                total_cost: format_cents(instance.costs().get(pos, fleet.id)),
            })?;
        }
    }
    w.flush()?;

    let manifest = Manifest::for_instance(instance);
    fs::write(&paths.manifest, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(paths)
}

#[derive(Debug, Serialize, Deserialize)]
struct AssignmentRow {
    flight: u64,
    origin: String,
    departure: String,
    destination: String,
    arrival: String,
    passengers: u32,
    day: u32,
    fleet_assigned: String,
}

/// Writes one row per flight with its assigned fleet name.
pub fn write_assignment_csv<W: Write>(out: W, instance: &Instance, assignment: &Assignment) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if instance.flights().is_empty() {
        w.write_record([
            "flight",
            "origin",
            "departure",
            "destination",
            "arrival",
            "passengers",
            "day",
            "fleet_assigned",
        ])?;
    }
    for (f, &j) in instance.flights().iter().zip(&assignment.fleet_of) {
        w.serialize(AssignmentRow {
            flight: f.id,
            origin: f.origin.clone(),
            departure: format_time(f.departure),
            destination: f.destination.clone(),
            arrival: format_time(f.arrival),
            passengers: f.demand,
            day: f.day,
            fleet_assigned: instance.fleets()[j].name.clone(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an assignment CSV back against its instance, matching rows by
/// flight id and day.
pub fn read_assignment_csv(path: &Path, instance: &Instance) -> Result<Assignment> {
    let mut by_key: HashMap<(u64, u32), usize> = HashMap::new();
    for (_, r) in read_rows::<AssignmentRow>(path)? {
        let fleet = instance
            .fleet_by_name(&r.fleet_assigned)
            .ok_or_else(|| Error::UnknownFleet(r.fleet_assigned.clone()))?;
        by_key.insert((r.flight, r.day), fleet.id);
    }
    let fleet_of = instance
        .flights()
        .iter()
        .map(|f| {
            by_key.get(&(f.id, f.day)).copied().ok_or_else(|| {
                Error::ModelInconsistency(format!("no assignment row for flight {} day {}", f.id, f.day))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment::new(fleet_of))
}
