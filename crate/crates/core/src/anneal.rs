//! Multi-restart simulated annealing over penalty-compiled models, with
//! greedy feasibility repair.
//!
//! Energies are tracked exactly in integers. Each penalty row keeps a
//! running residual, so a flip costs time proportional to the rows and
//! objective pairs touching the bit rather than to its full QUBO
//! neighborhood.

use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wide::f64x4;

use crate::cqm::{self, Penalty, QuboForm};
use crate::domain::{Assignment, Cents, SolveReport, SolveStatus};
use crate::model_blp::{BlpModel, DayProblem};
use crate::model_ilp::IlpModel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    /// Sweeps per restart; `None` means `2000·√bits`.
    pub sweeps: Option<usize>,
    pub restarts: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub seed: u64,
    pub repair: bool,
    /// Run steepest-descent reassignment and swap moves on each decoded
    /// assignment.
    pub polish: bool,
    pub time_limit: Option<Duration>,
    /// Penalty weight for compiling assignment problems; `None` uses
    /// [`assignment_penalty`].
    pub penalty: Option<i64>,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            sweeps: None,
            restarts: 8,
            beta_start: 0.1,
            beta_end: 10.0,
            seed: 0,
            repair: true,
            polish: true,
            time_limit: None,
            penalty: None,
        }
    }
}

impl AnnealConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == Some(0) {
            return Err(Error::Config("sweeps must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if !(self.beta_start > 0.0 && self.beta_start < self.beta_end && self.beta_end.is_finite()) {
            return Err(Error::Config(format!(
                "beta schedule needs 0 < start < end, got {} → {}",
                self.beta_start, self.beta_end
            )));
        }
        if self.penalty.is_some_and(|p| p <= 0) {
            return Err(Error::Config("penalty must be positive".into()));
        }
        Ok(())
    }

    pub fn sweeps_for(&self, bits: usize) -> usize {
        self.sweeps
            .unwrap_or_else(|| (2000.0 * (bits as f64).sqrt()).round() as usize)
            .max(1)
    }
}

/// Best state of one restart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub restart: usize,
    pub bits: Vec<bool>,
    pub energy: i64,
    pub sweeps_done: usize,
}

/// State seen by a sweep observer after each sweep.
#[derive(Debug)]
pub struct SweepView<'a> {
    pub restart: usize,
    pub sweep: usize,
    pub bits: &'a [bool],
    pub energy: i64,
    pub best_energy: i64,
}

/// Flip-move evaluator for one [`QuboForm`].
///
/// Slack bits are not flipped on their own: each stays at the value that
/// minimizes its row's penalty given the other bits, so an inequality row
/// costs `w·max(0, excess)²`. A move is one flip of a non-slack bit plus the
/// induced slack update.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    qubo: &'a QuboForm,
    free: Vec<FreeBit>,
    /// Objective pairs as `(free index, coefficient)`.
    pairs: Vec<(usize, i64)>,
    terms: Vec<(usize, i64)>,
    rows: Vec<RowCell>,
    scale: f64,
}

#[derive(Debug, Clone, Copy)]
struct FreeBit {
    bit: usize,
    linear: i64,
    pairs: (usize, usize),
    terms: (usize, usize),
}

#[derive(Debug, Clone, Copy)]
struct RowCell {
    /// Residual of the row with every bit clear.
    constant: i64,
    weight: i64,
    /// Largest slack value; zero for equalities.
    span: i64,
}

impl RowCell {
    /// Residual once the slack absorbs as much of `u` as it can.
    #[inline(always)]
    fn settled(&self, u: i64) -> i64 {
        u + (-u).max(0).min(self.span)
    }
}

/// Restarts advanced together; lane `l` of every array belongs to one
/// restart.
const LANES: usize = 8;

/// `L` xoshiro256++ streams stepped together. Lane `l` yields the same
/// sequence as `Xoshiro256PlusPlus::seed_from_u64(seeds[l])`; the
/// structure-of-arrays layout lets one step vectorize across lanes.
#[derive(Debug, Clone)]
struct LaneRng<const L: usize> {
    s: [[u64; L]; 4],
}

impl<const L: usize> LaneRng<L> {
    fn new(seeds: [u64; L]) -> Self {
        let mut s = [[0; L]; 4];
        for (l, &seed) in seeds.iter().enumerate() {
            let mut mix = SplitMix64::seed_from_u64(seed);
            for word in &mut s {
                word[l] = mix.next_u64();
            }
        }
        Self { s }
    }

    #[inline(always)]
    fn next(&mut self) -> [u64; L] {
        let [s0, s1, s2, s3] = &mut self.s;
        let mut out = [0; L];
        for l in 0..L {
            out[l] = s0[l].wrapping_add(s3[l]).rotate_left(23).wrapping_add(s0[l]);
            let t = s1[l] << 17;
            s2[l] ^= s0[l];
            s3[l] ^= s1[l];
            s1[l] ^= s2[l];
            s0[l] ^= s3[l];
            s2[l] ^= t;
            s3[l] = s3[l].rotate_left(45);
        }
        out
    }

    /// Uniforms on `[0, 1)` with 53 random bits.
    #[inline(always)]
    fn uniforms(&mut self) -> [f64; L] {
        self.next().map(|v| (v >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
    }
}

/// Per-lane state of a group of restarts.
struct Lanes<const L: usize> {
    on: Vec<[bool; L]>,
    /// Row residuals without slack.
    partial: Vec<[i64; L]>,
    energy: [i64; L],
}

impl<'a> Sampler<'a> {
    pub fn new(qubo: &'a QuboForm) -> Self {
        let n = qubo.num_bits();
        let mut is_slack = vec![false; n];
        for enc in qubo.slacks.iter().flatten() {
            for &(b, _) in &enc.bits {
                is_slack[b] = true;
            }
        }
        let free_bits: Vec<usize> = (0..n).filter(|&b| !is_slack[b]).collect();
        let mut free_index = vec![usize::MAX; n];
        for (k, &b) in free_bits.iter().enumerate() {
            free_index[b] = k;
        }
        let mut pairs_of = vec![Vec::new(); n];
        for (&(i, j), &c) in &qubo.objective.quadratic {
            pairs_of[i].push((free_index[j], c));
            pairs_of[j].push((free_index[i], c));
        }
        let mut terms_of = vec![Vec::new(); n];
        for (r, row) in qubo.penalty_rows.iter().enumerate() {
            for &(b, c) in &row.terms {
                if !is_slack[b] {
                    terms_of[b].push((r, c));
                }
            }
        }
        let mut free = Vec::with_capacity(free_bits.len());
        let mut pairs = Vec::new();
        let mut terms = Vec::new();
        for &b in &free_bits {
            let p0 = pairs.len();
            pairs.extend_from_slice(&pairs_of[b]);
            let t0 = terms.len();
            terms.extend_from_slice(&terms_of[b]);
            free.push(FreeBit {
                bit: b,
                linear: qubo.objective.linear[b],
                pairs: (p0, pairs.len()),
                terms: (t0, terms.len()),
            });
        }
        let rows = qubo
            .penalty_rows
            .iter()
            .zip(&qubo.slacks)
            .map(|(row, slack)| RowCell {
                constant: row.constant,
                weight: row.weight,
                span: slack.as_ref().map_or(0, |e| e.max_value()),
            })
            .collect();
        Self {
            qubo,
            free,
            pairs,
            terms,
            rows,
            scale: energy_scale(qubo),
        }
    }

    /// Energy units per unit of `β`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Full bit vector of lane `l`, slacks settled.
    fn materialize<const L: usize>(&self, on: &[[bool; L]], partial: &[[i64; L]], l: usize) -> Vec<bool> {
        let mut bits = vec![false; self.qubo.num_bits()];
        for (fb, o) in self.free.iter().zip(on) {
            bits[fb.bit] = o[l];
        }
        for ((cell, enc), p) in self.rows.iter().zip(&self.qubo.slacks).zip(partial) {
            if let Some(enc) = enc {
                let ok = enc.encode(cell.settled(p[l]) - p[l], &mut bits);
                debug_assert!(ok, "slack value within its span");
            }
        }
        bits
    }

    /// One in-order sweep over the free bits for every lane. Kept out of
    /// line: inlined into the restart loop it loses its registers.
    #[inline(never)]
    fn sweep<const L: usize>(&self, state: &mut Lanes<L>, rng: &mut LaneRng<L>, inv: f64) {
        let Lanes { on, partial, energy } = state;
        for (k, fb) in self.free.iter().enumerate() {
            let s: [i64; L] = std::array::from_fn(|l| 1 - 2 * on[k][l] as i64);
            let mut d = [fb.linear; L];
            for &(j, c) in &self.pairs[fb.pairs.0..fb.pairs.1] {
                let o = on[j];
                for l in 0..L {
                    d[l] += c * o[l] as i64;
                }
            }
            for l in 0..L {
                d[l] *= s[l];
            }
            let terms = &self.terms[fb.terms.0..fb.terms.1];
            for &(r, a) in terms {
                let cell = self.rows[r];
                let p = &partial[r];
                if cell.span == 0 {
                    for l in 0..L {
                        let step = s[l] * a;
                        d[l] += cell.weight * step * (2 * p[l] + step);
                    }
                } else {
                    for l in 0..L {
                        let before = cell.settled(p[l]);
                        let after = cell.settled(p[l] + s[l] * a);
                        d[l] += cell.weight * (after - before) * (after + before);
                    }
                }
            }
            let u = rng.uniforms();
            let take = accept(d.map(|v| v as f64 * inv), u);
            let take = take.map(i64::from);
            for l in 0..L {
                on[k][l] ^= take[l] != 0;
                energy[l] += take[l] * d[l];
            }
            for &(r, a) in terms {
                let p = &mut partial[r];
                for l in 0..L {
                    p[l] += take[l] * s[l] * a;
                }
            }
        }
    }

    /// Runs the restarts in `restarts` (exactly `L` of them) in lockstep:
    /// random decision bits with matching slacks, then `sweeps` in-order
    /// Metropolis sweeps with `β` geometric from start to end. Each returns
    /// the lowest-energy state it showed at a sweep boundary.
    fn run_lanes<const L: usize>(
        &self,
        config: &AnnealConfig,
        sweeps: usize,
        stream: u64,
        restarts: &[usize],
        deadline: Option<Instant>,
        mut observer: Option<&mut dyn FnMut(&SweepView<'_>)>,
    ) -> Vec<Sample> {
        debug_assert_eq!(restarts.len(), L);
        let mut rng = LaneRng::<L>::new(std::array::from_fn(|l| restart_seed(config.seed, stream, restarts[l])));
        let mut state = Lanes {
            on: vec![[false; L]; self.free.len()],
            partial: self.rows.iter().map(|c| [c.constant; L]).collect(),
            energy: [0; L],
        };
        for (k, fb) in self.free.iter().enumerate() {
            let coin = rng.next();
            for l in 0..L {
                if coin[l] >> 63 == 1 {
                    state.on[k][l] = true;
                    for &(r, a) in &self.terms[fb.terms.0..fb.terms.1] {
                        state.partial[r][l] += a;
                    }
                }
            }
        }
        for l in 0..L {
            state.energy[l] = self.qubo.split_energy(&self.materialize(&state.on, &state.partial, l));
        }
        let mut best_on = state.on.clone();
        let mut best_partial = state.partial.clone();
        let mut best_energy = state.energy;
        let ratio = if sweeps > 1 {
            (config.beta_end / config.beta_start).powf(1.0 / (sweeps - 1) as f64)
        } else {
            1.0
        };
        let mut beta = config.beta_start;
        let mut done = 0;
        for sweep in 0..sweeps {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                break;
            }
            self.sweep(&mut state, &mut rng, beta / self.scale);
            for l in 0..L {
                if state.energy[l] < best_energy[l] {
                    best_energy[l] = state.energy[l];
                    for (b, o) in best_on.iter_mut().zip(&state.on) {
                        b[l] = o[l];
                    }
                    for (b, p) in best_partial.iter_mut().zip(&state.partial) {
                        b[l] = p[l];
                    }
                }
            }
            done = sweep + 1;
            if let Some(observer) = observer.as_mut() {
                for l in 0..L {
                    observer(&SweepView {
                        restart: restarts[l],
                        sweep,
                        bits: &self.materialize(&state.on, &state.partial, l),
                        energy: state.energy[l],
                        best_energy: best_energy[l],
                    });
                }
            }
            beta *= ratio;
        }
        (0..L)
            .map(|l| Sample {
                restart: restarts[l],
                bits: self.materialize(&best_on, &best_partial, l),
                energy: best_energy[l],
                sweeps_done: done,
            })
            .collect()
    }

    /// One restart, reporting its state to `observer` after every sweep.
    pub fn run(
        &self,
        config: &AnnealConfig,
        sweeps: usize,
        stream: u64,
        restart: usize,
        deadline: Option<Instant>,
        observer: &mut dyn FnMut(&SweepView<'_>),
    ) -> Sample {
        let mut out = self.run_lanes::<1>(config, sweeps, stream, &[restart], deadline, Some(observer));
        out.pop().expect("one lane")
    }

    /// Several restarts, grouped into lockstep lanes. A restart's result
    /// does not depend on which others share its group.
    pub fn run_batch(
        &self,
        config: &AnnealConfig,
        sweeps: usize,
        stream: u64,
        restarts: &[usize],
        deadline: Option<Instant>,
    ) -> Vec<Sample> {
        let mut out = Vec::with_capacity(restarts.len());
        let mut rest = restarts;
        while !rest.is_empty() {
            let (group, tail) = match rest.len() {
                n if n >= 8 => rest.split_at(8),
                n if n >= 4 => rest.split_at(4),
                n if n >= 2 => rest.split_at(2),
                _ => rest.split_at(1),
            };
            out.extend(match group.len() {
                8 => self.run_lanes::<8>(config, sweeps, stream, group, deadline, None),
                4 => self.run_lanes::<4>(config, sweeps, stream, group, deadline, None),
                2 => self.run_lanes::<2>(config, sweeps, stream, group, deadline, None),
                _ => self.run_lanes::<1>(config, sweeps, stream, group, deadline, None),
            });
            rest = tail;
        }
        out
    }
}

/// Seed of one restart's generator; distinct `(stream, restart)` pairs get
/// unrelated sequences after the generator's own seed expansion.
fn restart_seed(seed: u64, stream: u64, restart: usize) -> u64 {
    seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (restart as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Metropolis decisions for moves of scaled sizes `x` against uniforms
/// `u`: lane `l` accepts when `u[l] < e^−x[l]`, so every downhill move
/// passes.
#[inline(always)]
fn accept<const L: usize>(x: [f64; L], u: [f64; L]) -> [bool; L] {
    let mut out = [false; L];
    for c in (0..L).step_by(4) {
        let n = (L - c).min(4);
        let mut xs = [0.0; 4];
        let mut us = [1.0; 4];
        xs[..n].copy_from_slice(&x[c..c + n]);
        us[..n].copy_from_slice(&u[c..c + n]);
        let pass = f64x4::from(us).simd_lt((-f64x4::from(xs)).exp()).to_bitmask();
        for (i, o) in out[c..c + n].iter_mut().enumerate() {
            *o = pass >> i & 1 == 1;
        }
    }
    out
}

/// Standard deviation of the nonzero objective coefficients (at least 1),
/// so that `β` is measured against typical cost differences.
fn energy_scale(qubo: &QuboForm) -> f64 {
    let coefs: Vec<f64> = qubo
        .objective
        .linear
        .iter()
        .chain(qubo.objective.quadratic.values())
        .filter(|&&c| c != 0)
        .map(|&c| c as f64)
        .collect();
    if coefs.len() < 2 {
        return coefs.first().map_or(1.0, |c| c.abs().max(1.0));
    }
    let mean = coefs.iter().sum::<f64>() / coefs.len() as f64;
    let var = coefs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / coefs.len() as f64;
    var.sqrt().max(1.0)
}

/// Runs every restart (groups of lanes in parallel) and returns their best states in
/// restart order.
pub fn sample(qubo: &QuboForm, config: &AnnealConfig, stream: u64, deadline: Option<Instant>) -> Vec<Sample> {
    let sampler = Sampler::new(qubo);
    let sweeps = config.sweeps_for(qubo.num_bits());
    let restarts: Vec<usize> = (0..config.restarts).collect();
    restarts
        .par_chunks(LANES)
        .flat_map_iter(|group| sampler.run_batch(config, sweeps, stream, group, deadline))
        .collect()
}

/// Result of annealing a generic model.
#[derive(Debug, Clone, PartialEq)]
pub struct Annealed {
    /// Status and objective of the best feasible decoded state; no
    /// assignment is attached.
    pub report: SolveReport,
    pub values: Option<Vec<i64>>,
    pub energy: Option<i64>,
}

/// Anneals any compiled model and keeps the decoded state with the lowest
/// objective among those satisfying every constraint (lowest restart index
/// among ties).
pub fn anneal(qubo: &QuboForm, config: &AnnealConfig) -> Result<Annealed> {
    config.validate()?;
    let start = Instant::now();
    let deadline = config.time_limit.map(|t| start + t);
    let samples = sample(qubo, config, 0, deadline);
    let best = samples
        .iter()
        .filter_map(|s| {
            let values = qubo.decode(&s.bits);
            qubo.model
                .is_feasible(&values)
                .then(|| (qubo.model.objective(&values), s.restart, values, s.energy))
        })
        .min_by_key(|(obj, r, _, _)| (*obj, *r));
    let wall_time = start.elapsed();
    let restarts = samples.len() as u64;
    Ok(match best {
        Some((obj, _, values, energy)) => Annealed {
            report: SolveReport {
                status: SolveStatus::Feasible,
                objective: Some(obj),
                bound: None,
                wall_time,
                assignment: None,
                explored: restarts,
            },
            values: Some(values),
            energy: Some(energy),
        },
        None => Annealed {
            report: SolveReport::infeasible(wall_time, restarts),
            values: None,
            energy: None,
        },
    })
}

/// Signals that a decoded state could not be turned into a feasible one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Irreparable;

/// Penalty used when compiling assignment problems for annealing:
/// three fifths of the median spread between a flight's cheapest and
/// dearest fleets, plus one. Smaller weights leave lower barriers between
/// assignments; violations that survive are left to repair.
pub fn assignment_penalty(problem: &DayProblem) -> i64 {
    let mut spreads: Vec<i64> = (0..problem.flight_count())
        .map(|i| {
            let row = problem.effective_cost.row(i);
            row.iter().max().unwrap_or(&0) - row.iter().min().unwrap_or(&0)
        })
        .collect();
    spreads.sort_unstable();
    spreads.get(spreads.len() / 2).map_or(0, |&m| m * 3 / 5) + 1
}

/// Turns decoded `x` values (flight-major, one per fleet) into an assignment
/// that meets the one-hot rows and the fleet caps.
///
/// Flights with exactly one fleet keep it. Any other flight takes its
/// cheapest fleet with room, preferring the fleets it had set. Overfull
/// fleets then shed, one at a time, the flight whose move to a fleet with
/// room costs least.
pub fn repair(problem: &DayProblem, x: &[i64]) -> std::result::Result<Vec<usize>, Irreparable> {
    let f = problem.flight_count();
    let eta = problem.fleet_count();
    let ec = &problem.effective_cost;
    let caps = &problem.fleet_caps;
    let mut load = vec![0u32; eta];
    let mut fleet_of: Vec<Option<usize>> = vec![None; f];
    let mut broken = Vec::new();
    for i in 0..f {
        let set: Vec<usize> = (0..eta).filter(|&j| x[i * eta + j] != 0).collect();
        if set.len() == 1 {
            fleet_of[i] = Some(set[0]);
            load[set[0]] += 1;
        } else {
            broken.push((i, set));
        }
    }
    if eta == 0 {
        return if f == 0 { Ok(vec![]) } else { Err(Irreparable) };
    }
    for (i, set) in broken {
        let candidates: Vec<usize> = if set.is_empty() { (0..eta).collect() } else { set };
        let cheapest = |pool: &mut dyn Iterator<Item = usize>| pool.min_by_key(|&j| (ec[(i, j)], j));
        let j = cheapest(&mut candidates.iter().copied().filter(|&j| load[j] < caps[j]))
            .or_else(|| cheapest(&mut (0..eta).filter(|&j| load[j] < caps[j])))
            .or_else(|| cheapest(&mut candidates.iter().copied()))
            .expect("at least one fleet");
        fleet_of[i] = Some(j);
        load[j] += 1;
    }
    let mut fleet_of: Vec<usize> = fleet_of.into_iter().map(|j| j.expect("every flight placed")).collect();
    while let Some(j) = (0..eta).find(|&j| load[j] > caps[j]) {
        let mv = (0..f)
            .filter(|&i| fleet_of[i] == j)
            .flat_map(|i| {
                (0..eta)
                    .filter(|&k| k != j && load[k] < caps[k])
                    .map(move |k| (ec[(i, k)] - ec[(i, j)], i, k))
            })
            .min();
        let Some((_, i, k)) = mv else {
            return Err(Irreparable);
        };
        fleet_of[i] = k;
        load[j] -= 1;
        load[k] += 1;
    }
    Ok(fleet_of)
}

/// Steepest descent over two neighbourhoods: moving one flight to a fleet
/// with spare aircraft, and exchanging the fleets of two flights. Moves that
/// `accept` rejects are skipped. Stops at a local minimum.
pub fn polish(problem: &DayProblem, fleet_of: &mut [usize], accept: &dyn Fn(&[usize]) -> bool) {
    let f = problem.flight_count();
    let eta = problem.fleet_count();
    let ec = &problem.effective_cost;
    let mut load = vec![0u32; eta];
    for &j in fleet_of.iter() {
        load[j] += 1;
    }
    // (gain, first flight, fleet or second flight, is swap)
    let mut moves: Vec<(Cents, usize, usize, bool)> = Vec::new();
    loop {
        moves.clear();
        for i in 0..f {
            let a = fleet_of[i];
            for k in 0..eta {
                if k != a && load[k] < problem.fleet_caps[k] {
                    let gain = ec[(i, k)] - ec[(i, a)];
                    if gain < 0 {
                        moves.push((gain, i, k, false));
                    }
                }
            }
            for i2 in i + 1..f {
                let b = fleet_of[i2];
                if a != b {
                    let gain = ec[(i, b)] + ec[(i2, a)] - ec[(i, a)] - ec[(i2, b)];
                    if gain < 0 {
                        moves.push((gain, i, i2, true));
                    }
                }
            }
        }
        moves.sort_unstable();
        let mut improved = false;
        for &(_, i, other, swap) in &moves {
            let a = fleet_of[i];
            if swap {
                fleet_of.swap(i, other);
            } else {
                fleet_of[i] = other;
            }
            if accept(fleet_of) {
                if !swap {
                    load[a] -= 1;
                    load[other] += 1;
                }
                improved = true;
                break;
            }
            if swap {
                fleet_of.swap(i, other);
            } else {
                fleet_of[i] = a;
            }
        }
        if !improved {
            return;
        }
    }
}

/// Reads decoded `x` values as an assignment only if they already satisfy
/// the one-hot rows and fleet caps.
pub fn decode_strict(problem: &DayProblem, x: &[i64]) -> Option<Vec<usize>> {
    let eta = problem.fleet_count();
    let fleet_of: Option<Vec<usize>> = (0..problem.flight_count())
        .map(|i| {
            let set: Vec<usize> = (0..eta).filter(|&j| x[i * eta + j] != 0).collect();
            (set.len() == 1).then(|| set[0])
        })
        .collect();
    fleet_of.filter(|a| problem.respects_caps(a))
}

/// Anneals one assignment problem and returns the cheapest accepted local
/// assignment across restarts, or `None` when every restart was rejected.
fn anneal_assignment(
    problem: &DayProblem,
    config: &AnnealConfig,
    fleet_names: &[String],
    stream: u64,
    deadline: Option<Instant>,
    accept: &(dyn Fn(&[usize]) -> bool + Sync),
) -> Result<Option<(Cents, Vec<usize>)>> {
    if problem.flight_count() == 0 {
        return Ok(Some((0, vec![])));
    }
    let model = cqm::from_day_shifted(problem, fleet_names);
    let penalty = config.penalty.unwrap_or_else(|| assignment_penalty(problem));
    let qubo = cqm::to_qubo(&model, Penalty::Fixed(penalty))?;
    let samples = sample(&qubo, config, stream, deadline);
    let x_len = problem.flight_count() * problem.fleet_count();
    Ok(samples
        .iter()
        .filter_map(|s| {
            let values = qubo.decode(&s.bits);
            let x = &values[..x_len];
            let mut fleet_of = if config.repair {
                repair(problem, x).ok()?
            } else {
                decode_strict(problem, x)?
            };
            if !accept(&fleet_of) {
                return None;
            }
            if config.polish {
                polish(problem, &mut fleet_of, accept);
            }
            Some((problem.cost_of(&fleet_of), s.restart, fleet_of))
        })
        .min_by_key(|(c, r, _)| (*c, *r))
        .map(|(c, _, a)| (c, a)))
}

/// Anneals each day's assignment problem separately (days in parallel)
/// and combines the days.
/// A day with no accepted restart makes the whole result infeasible.
pub fn solve_blp_anneal(model: &BlpModel, config: &AnnealConfig) -> Result<SolveReport> {
    config.validate()?;
    let start = Instant::now();
    let deadline = config.time_limit.map(|t| start + t);
    let restarts = (config.restarts * model.day_problems.len()) as u64;
    if !model.infeasible_days.is_empty() {
        return Ok(SolveReport::infeasible(start.elapsed(), 0));
    }
    let found: Vec<Option<(Cents, Vec<usize>)>> = model
        .day_problems
        .par_iter()
        .map(|dp| anneal_assignment(dp, config, &model.fleet_names, dp.day as u64, deadline, &|_| true))
        .collect::<Result<_>>()?;
    let mut total = 0;
    let mut locals = Vec::with_capacity(found.len());
    for day in found {
        let Some((cost, local)) = day else {
            return Ok(SolveReport::infeasible(start.elapsed(), restarts));
        };
        total += cost;
        locals.push(local);
    }
    Ok(SolveReport {
        status: SolveStatus::Feasible,
        objective: Some(total),
        bound: None,
        wall_time: start.elapsed(),
        assignment: Some(Assignment::new(model.assemble(&locals))),
        explored: restarts,
    })
}

/// Repairs the one-hot and cap rows, then rejects the state if its minimal
/// initial placement exceeds some fleet's availability.
pub fn repair_ilp(model: &IlpModel, x: &[i64]) -> std::result::Result<Vec<usize>, Irreparable> {
    let fleet_of = repair(&model.assignment_problem(), x)?;
    if model.is_feasible(&fleet_of) {
        Ok(fleet_of)
    } else {
        Err(Irreparable)
    }
}

/// Anneals only the assignment bits; grounded counts follow by propagation
/// from the minimal initial placement, and a restart whose placement does
/// not fit the availability caps is rejected.
pub fn solve_ilp_anneal(model: &IlpModel, config: &AnnealConfig) -> Result<SolveReport> {
    config.validate()?;
    let start = Instant::now();
    let deadline = config.time_limit.map(|t| start + t);
    let problem = model.assignment_problem();
    let found = anneal_assignment(&problem, config, &model.fleet_names, model.day as u64, deadline, &|a| {
        model.is_feasible(a)
    })?;
    let wall_time = start.elapsed();
    let restarts = config.restarts as u64;
    Ok(match found {
        Some((cost, fleet_of)) => SolveReport {
            status: SolveStatus::Feasible,
            objective: Some(cost),
            bound: None,
            wall_time,
            assignment: Some(Assignment {
                grounded: Some(model.grounded(&fleet_of)),
                fleet_of,
            }),
            explored: restarts,
        },
        None => SolveReport::infeasible(wall_time, restarts),
    })
}
