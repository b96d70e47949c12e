//! Constrained quadratic models and their penalty compilation to QUBO form.
//!
//! Coefficients are integers (cents for objectives, counts for
//! constraints), so compiled energies are exact.
//!
//! Compilation encodes each bounded integer `v ∈ [lo, hi]` as
//! `lo + Σ w_b·bit_b` with `⌈log2(hi − lo + 1)⌉` bits whose weights are
//! `1, 2, …, 2^(k−2)` and a final weight that makes the maximum exactly
//! `hi − lo`, so every bit pattern decodes into range. An equality
//! `c·x = r` adds `P·(c·x − r)²`; an inequality `c·x ≤ r` adds
//! `P·(c·x + s − r)²` with a slack `s ∈ [0, r − min(c·x)]` encoded the same
//! way.

use std::collections::BTreeMap;
use std::io::Write;

use crate::model_blp::{BlpModel, DayProblem};
use crate::model_ilp::{Grounded, IlpModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    /// Integer with inclusive bounds; `hi = None` is unbounded above.
    Integer {
        lo: i64,
        hi: Option<i64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    pub fn lhs(&self, values: &[i64]) -> i64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    pub fn holds(&self, values: &[i64]) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Eq => lhs == self.rhs,
            Sense::Le => lhs <= self.rhs,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuadraticModel {
    variables: Vec<Variable>,
    constant: i64,
    linear: BTreeMap<usize, i64>,
    quadratic: BTreeMap<(usize, usize), i64>,
    constraints: Vec<Constraint>,
}

impl QuadraticModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            kind: VarKind::Binary,
        });
        self.variables.len() - 1
    }

    pub fn add_integer(&mut self, name: impl Into<String>, lo: i64, hi: Option<i64>) -> Result<usize> {
        let name = name.into();
        if hi.is_some_and(|h| h < lo) {
            return Err(Error::Config(format!("integer `{name}` has empty range")));
        }
        self.variables.push(Variable {
            name,
            kind: VarKind::Integer { lo, hi },
        });
        Ok(self.variables.len() - 1)
    }

    pub fn add_constant(&mut self, c: i64) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, v: usize, c: i64) {
        *self.linear.entry(v).or_insert(0) += c;
    }

    /// Adds `c·u·v`; the pair is stored with `u ≤ v`.
    pub fn add_quadratic(&mut self, u: usize, v: usize, c: i64) {
        *self.quadratic.entry((u.min(v), u.max(v))).or_insert(0) += c;
    }

    pub fn add_constraint(
        &mut self,
        label: impl Into<String>,
        terms: Vec<(usize, i64)>,
        sense: Sense,
        rhs: i64,
    ) -> usize {
        self.constraints.push(Constraint {
            label: label.into(),
            terms,
            sense,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn linear(&self) -> &BTreeMap<usize, i64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), i64> {
        &self.quadratic
    }

    pub fn constant(&self) -> i64 {
        self.constant
    }

    pub fn objective(&self, values: &[i64]) -> i64 {
        self.constant
            + self.linear.iter().map(|(&v, &c)| c * values[v]).sum::<i64>()
            + self
                .quadratic
                .iter()
                .map(|(&(u, v), &c)| c * values[u] * values[v])
                .sum::<i64>()
    }

    pub fn in_bounds(&self, values: &[i64]) -> bool {
        self.variables.iter().zip(values).all(|(var, &x)| match var.kind {
            VarKind::Binary => x == 0 || x == 1,
            VarKind::Integer { lo, hi } => x >= lo && hi.is_none_or(|h| x <= h),
        })
    }

    /// Indices of violated constraints.
    pub fn violated(&self, values: &[i64]) -> Vec<usize> {
        (0..self.constraints.len())
            .filter(|&c| !self.constraints[c].holds(values))
            .collect()
    }

    pub fn is_feasible(&self, values: &[i64]) -> bool {
        values.len() == self.variables.len() && self.in_bounds(values) && self.violated(values).is_empty()
    }
}

fn push_day(cqm: &mut QuadraticModel, dp: &DayProblem, fleet_names: &[String]) {
    let eta = dp.fleet_count();
    let base = cqm.variables.len();
    for (i, id) in dp.flight_ids.iter().enumerate() {
        for (j, name) in fleet_names.iter().enumerate().take(eta) {
            let v = cqm.add_binary(format!("x[{id},{name},{}]", dp.day));
            cqm.add_linear(v, dp.effective_cost[(i, j)]);
        }
    }
    for (i, id) in dp.flight_ids.iter().enumerate() {
        let terms = (0..eta).map(|j| (base + i * eta + j, 1)).collect();
        cqm.add_constraint(format!("one_fleet[{id},{}]", dp.day), terms, Sense::Eq, 1);
    }
    for (j, name) in fleet_names.iter().enumerate().take(eta) {
        let terms = (0..dp.flight_count()).map(|i| (base + i * eta + j, 1)).collect();
        cqm.add_constraint(
            format!("fleet_cap[{name},{}]", dp.day),
            terms,
            Sense::Le,
            dp.fleet_caps[j] as i64,
        );
    }
}

/// One day's problem: binary `x` per (flight, fleet) in flight-major order,
/// one-hot equalities, then fleet-cap inequalities.
pub fn from_day(dp: &DayProblem, fleet_names: &[String]) -> QuadraticModel {
    let mut cqm = QuadraticModel::new();
    push_day(&mut cqm, dp, fleet_names);
    cqm
}

/// Like [`from_day`] but with each flight's costs lowered by its cheapest
/// fleet's and the total moved into the constant. The objective is unchanged
/// wherever the one-hot rows hold, and the penalty weight needed to enforce
/// them shrinks from the largest cost to the largest within-flight spread.
pub fn from_day_shifted(dp: &DayProblem, fleet_names: &[String]) -> QuadraticModel {
    let mut cqm = from_day(dp, fleet_names);
    let eta = dp.fleet_count();
    for i in 0..dp.flight_count() {
        let Some(&low) = dp.effective_cost.row(i).iter().min() else {
            continue;
        };
        cqm.add_constant(low);
        for j in 0..eta {
            cqm.add_linear(i * eta + j, -low);
        }
    }
    cqm
}

/// The whole multi-day model, days in order.
pub fn from_blp(model: &BlpModel) -> QuadraticModel {
    let mut cqm = QuadraticModel::new();
    for dp in &model.day_problems {
        push_day(&mut cqm, dp, &model.fleet_names);
    }
    cqm
}

/// Variable layout of [`from_ilp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IlpLayout {
    pub flights: usize,
    pub fleets: usize,
    pub nodes: usize,
    pub airports: usize,
}

impl IlpLayout {
    pub fn x(&self, flight: usize, fleet: usize) -> usize {
        flight * self.fleets + fleet
    }

    pub fn g(&self, node: usize, fleet: usize) -> usize {
        self.flights * self.fleets + node * self.fleets + fleet
    }

    pub fn g0(&self, airport: usize, fleet: usize) -> usize {
        (self.flights + self.nodes) * self.fleets + airport * self.fleets + fleet
    }
}

/// The balance model with materialized grounded counts: binary `x`, then
/// `G` per (node, fleet) and initial `G0` per (airport, fleet), both in
/// `[0, N_j]`. Rows: one-hot, flight caps (if enabled), balance, and the
/// initial-availability caps.
pub fn from_ilp(model: &IlpModel) -> (QuadraticModel, IlpLayout) {
    let net = &model.network;
    let eta = model.fleet_count();
    let layout = IlpLayout {
        flights: model.flight_count(),
        fleets: eta,
        nodes: net.node_count(),
        airports: net.airports().len(),
    };
    let mut cqm = QuadraticModel::new();
    for (i, id) in model.flight_ids.iter().enumerate() {
        for j in 0..eta {
            let v = cqm.add_binary(format!("x[{id},{}]", model.fleet_names[j]));
            cqm.add_linear(v, model.effective_cost[(i, j)]);
        }
    }
    for k in 0..layout.nodes {
        for j in 0..eta {
            cqm.add_integer(
                format!("G[{k},{}]", model.fleet_names[j]),
                0,
                Some(model.fleet_caps[j] as i64),
            )
            .expect("non-empty range");
        }
    }
    for code in net.airports() {
        for j in 0..eta {
            cqm.add_integer(
                format!("G0[{code},{}]", model.fleet_names[j]),
                0,
                Some(model.fleet_caps[j] as i64),
            )
            .expect("non-empty range");
        }
    }
    for (i, id) in model.flight_ids.iter().enumerate() {
        let terms = (0..eta).map(|j| (layout.x(i, j), 1)).collect();
        cqm.add_constraint(format!("one_fleet[{id}]"), terms, Sense::Eq, 1);
    }
    if model.options.flight_cap {
        for j in 0..eta {
            let terms = (0..layout.flights).map(|i| (layout.x(i, j), 1)).collect();
            cqm.add_constraint(
                format!("fleet_cap[{}]", model.fleet_names[j]),
                terms,
                Sense::Le,
                model.fleet_caps[j] as i64,
            );
        }
    }
    for (k, node) in net.nodes().iter().enumerate() {
        let sign = if net.arrives_at(node.flight, k) { 1 } else { -1 };
        for j in 0..eta {
            let before = match net.previous(k) {
                Some(p) => layout.g(p, j),
                None => layout.g0(node.airport, j),
            };
            let terms = vec![(before, 1), (layout.x(node.flight, j), sign), (layout.g(k, j), -1)];
            cqm.add_constraint(format!("balance[{k},{}]", model.fleet_names[j]), terms, Sense::Eq, 0);
        }
    }
    for j in 0..eta {
        let terms = (0..layout.airports).map(|a| (layout.g0(a, j), 1)).collect();
        cqm.add_constraint(
            format!("initial_cap[{}]", model.fleet_names[j]),
            terms,
            Sense::Le,
            model.fleet_caps[j] as i64,
        );
    }
    (cqm, layout)
}

/// Values for [`from_ilp`] variables from an assignment and its grounded
/// counts.
pub fn ilp_values(layout: &IlpLayout, fleet_of: &[usize], grounded: &Grounded) -> Vec<i64> {
    let eta = layout.fleets;
    let mut values = vec![0; (layout.flights + layout.nodes + layout.airports) * eta];
    for (i, &j) in fleet_of.iter().enumerate() {
        values[layout.x(i, j)] = 1;
    }
    for k in 0..layout.nodes {
        for j in 0..eta {
            values[layout.g(k, j)] = grounded.at_node[(k, j)];
        }
    }
    for a in 0..layout.airports {
        for j in 0..eta {
            values[layout.g0(a, j)] = grounded.initial[(a, j)];
        }
    }
    values
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    /// `2·spread + 1`, with `spread` an upper bound on how far the objective
    /// can move over the variable domains.
    Auto,
    Fixed(i64),
}

/// How one model variable maps onto QUBO bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub offset: i64,
    /// `(bit, weight)` pairs.
    pub bits: Vec<(usize, i64)>,
}

impl Encoding {
    pub fn value(&self, bits: &[bool]) -> i64 {
        self.offset + self.bits.iter().filter(|(b, _)| bits[*b]).map(|(_, w)| w).sum::<i64>()
    }

    /// Largest representable value.
    pub fn max_value(&self) -> i64 {
        self.offset + self.bits.iter().map(|(_, w)| w).sum::<i64>()
    }

    /// Sets the bits so that they decode to `value`; false if out of range.
    pub fn encode(&self, value: i64, bits: &mut [bool]) -> bool {
        let mut rest = value - self.offset;
        if rest < 0 {
            return false;
        }
        for &(b, w) in self.bits.iter().rev() {
            let take = rest >= w
                && (rest - w)
                    <= self
                        .bits
                        .iter()
                        .take_while(|(bb, _)| *bb != b)
                        .map(|(_, ww)| ww)
                        .sum::<i64>();
            bits[b] = take;
            if take {
                rest -= w;
            }
        }
        rest == 0
    }
}

/// Bit weights for a range of `span + 1` values.
fn bounded_weights(span: i64) -> Vec<i64> {
    if span <= 0 {
        return vec![];
    }
    let k = 64 - (span as u64).leading_zeros() as usize; // ⌈log2(span + 1)⌉
    let mut w: Vec<i64> = (0..k - 1).map(|b| 1i64 << b).collect();
    w.push(span - ((1i64 << (k - 1)) - 1));
    w
}

/// Penalty-compiled form. Energy is
/// `offset + Σ linear[i]·b_i + Σ_{i<j} quadratic[(i,j)]·b_i·b_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuboForm {
    pub bit_labels: Vec<String>,
    pub linear: Vec<i64>,
    pub quadratic: BTreeMap<(usize, usize), i64>,
    pub offset: i64,
    /// One per model variable.
    pub encodings: Vec<Encoding>,
    /// Slack encoding per constraint (`None` for equalities).
    pub slacks: Vec<Option<Encoding>>,
    pub penalty_weights: Vec<i64>,
    /// The objective alone, over bits.
    pub objective: BitObjective,
    /// One row per constraint; energy adds `weight·(constant + Σ coef·bit)²`.
    pub penalty_rows: Vec<PenaltyRow>,
    pub model: QuadraticModel,
}

/// Objective part of a [`QuboForm`], over bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitObjective {
    pub offset: i64,
    pub linear: Vec<i64>,
    pub quadratic: BTreeMap<(usize, usize), i64>,
}

/// A constraint's penalty term over bits, slack included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PenaltyRow {
    pub constant: i64,
    pub terms: Vec<(usize, i64)>,
    pub weight: i64,
}

impl PenaltyRow {
    pub fn residual(&self, bits: &[bool]) -> i64 {
        self.constant + self.terms.iter().filter(|(b, _)| bits[*b]).map(|(_, c)| c).sum::<i64>()
    }
}

impl QuboForm {
    pub fn num_bits(&self) -> usize {
        self.linear.len()
    }

    /// Symmetric view of the coefficient map (`coef(i, i)` is linear).
    pub fn coef(&self, i: usize, j: usize) -> i64 {
        if i == j {
            self.linear[i]
        } else {
            self.quadratic.get(&(i.min(j), i.max(j))).copied().unwrap_or(0)
        }
    }

    pub fn energy(&self, bits: &[bool]) -> i64 {
        let mut e = self.offset as i128;
        for (i, &c) in self.linear.iter().enumerate() {
            if bits[i] {
                e += c as i128;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if bits[i] && bits[j] {
                e += c as i128;
            }
        }
        e as i64
    }

    /// Energy as objective plus weighted squared residuals; equals
    /// [`QuboForm::energy`] on every bit pattern.
    pub fn split_energy(&self, bits: &[bool]) -> i64 {
        let mut e = self.objective.offset as i128;
        for (i, &c) in self.objective.linear.iter().enumerate() {
            if bits[i] {
                e += c as i128;
            }
        }
        for (&(i, j), &c) in &self.objective.quadratic {
            if bits[i] && bits[j] {
                e += c as i128;
            }
        }
        for row in &self.penalty_rows {
            let r = row.residual(bits) as i128;
            e += row.weight as i128 * r * r;
        }
        e as i64
    }

    /// Original variable values; defined for every bit pattern.
    pub fn decode(&self, bits: &[bool]) -> Vec<i64> {
        self.encodings.iter().map(|e| e.value(bits)).collect()
    }

    /// Bits representing a feasible point of the source model (slacks set to
    /// absorb inequality gaps), or `None` if the point is not feasible.
    pub fn encode(&self, values: &[i64]) -> Option<Vec<bool>> {
        if !self.model.is_feasible(values) {
            return None;
        }
        let mut bits = vec![false; self.num_bits()];
        for (enc, &v) in self.encodings.iter().zip(values) {
            if !enc.encode(v, &mut bits) {
                return None;
            }
        }
        for (c, slack) in self.model.constraints.iter().zip(&self.slacks) {
            if let Some(enc) = slack {
                if !enc.encode(c.rhs - c.lhs(values), &mut bits) {
                    return None;
                }
            }
        }
        Some(bits)
    }

    /// Writes `# offset <v>` then `i j coef` lines (diagonal first, then the
    /// upper triangle in index order), skipping zeros.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# offset {}", self.offset)?;
        writeln!(out, "# bits {}", self.num_bits())?;
        for (i, &c) in self.linear.iter().enumerate() {
            if c != 0 {
                writeln!(out, "{i} {i} {c}")?;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if c != 0 {
                writeln!(out, "{i} {j} {c}")?;
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Expansion {
    constant: i128,
    linear: Vec<i128>,
    quadratic: BTreeMap<(usize, usize), i128>,
}

impl Expansion {
    fn add_pair(&mut self, a: usize, b: usize, c: i128) {
        if a == b {
            self.linear[a] += c;
        } else {
            *self.quadratic.entry((a.min(b), a.max(b))).or_insert(0) += c;
        }
    }

    /// Adds `scale·(affine)²` where affine is `constant + Σ coef·bit`.
    fn add_square(&mut self, constant: i128, terms: &BTreeMap<usize, i128>, scale: i128) {
        self.constant += scale * constant * constant;
        let items: Vec<(usize, i128)> = terms.iter().map(|(&b, &c)| (b, c)).filter(|&(_, c)| c != 0).collect();
        for (idx, &(a, ca)) in items.iter().enumerate() {
            self.linear[a] += scale * (ca * ca + 2 * constant * ca);
            for &(b, cb) in &items[idx + 1..] {
                self.add_pair(a, b, scale * 2 * ca * cb);
            }
        }
    }
}

fn narrow(v: i128, what: &str) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow(what.to_string()))
}

/// Compiles a model into its penalty form.
pub fn to_qubo(model: &QuadraticModel, penalty: Penalty) -> Result<QuboForm> {
    let mut bit_labels = Vec::new();
    let mut encodings = Vec::with_capacity(model.variables.len());
    for var in &model.variables {
        match var.kind {
            VarKind::Binary => {
                encodings.push(Encoding {
                    offset: 0,
                    bits: vec![(bit_labels.len(), 1)],
                });
                bit_labels.push(var.name.clone());
            }
            VarKind::Integer { lo, hi } => {
                let hi = hi.ok_or_else(|| Error::Unbounded(var.name.clone()))?;
                let bits = bounded_weights(hi - lo)
                    .into_iter()
                    .enumerate()
                    .map(|(b, w)| {
                        bit_labels.push(format!("{}#{b}", var.name));
                        (bit_labels.len() - 1, w)
                    })
                    .collect();
                encodings.push(Encoding { offset: lo, bits });
            }
        }
    }
    let range = |v: usize| -> (i64, i64) {
        match model.variables[v].kind {
            VarKind::Binary => (0, 1),
            VarKind::Integer { lo, hi } => (lo, hi.unwrap_or(lo)),
        }
    };

    let weight = match penalty {
        Penalty::Fixed(p) if p > 0 => p as i128,
        Penalty::Fixed(p) => return Err(Error::Config(format!("penalty must be positive, got {p}"))),
        Penalty::Auto => {
            let mut spread: i128 = 0;
            for (&v, &c) in &model.linear {
                let (lo, hi) = range(v);
                spread += (c as i128).abs() * (hi - lo) as i128;
            }
            for (&(u, v), &c) in &model.quadratic {
                let (ulo, uhi) = range(u);
                let (vlo, vhi) = range(v);
                let umax = ulo.abs().max(uhi.abs()) as i128;
                let vmax = vlo.abs().max(vhi.abs()) as i128;
                spread += 2 * (c as i128).abs() * umax * vmax;
            }
            2 * spread + 1
        }
    };

    let affine_of = |v: usize, coef: i128, constant: &mut i128, terms: &mut BTreeMap<usize, i128>| {
        let enc = &encodings[v];
        *constant += coef * enc.offset as i128;
        for &(b, w) in &enc.bits {
            *terms.entry(b).or_insert(0) += coef * w as i128;
        }
    };

    // Slack bits are appended after every variable bit.
    let mut slacks = Vec::with_capacity(model.constraints.len());
    let mut constraint_affines = Vec::with_capacity(model.constraints.len());
    for c in &model.constraints {
        let mut constant: i128 = -(c.rhs as i128);
        let mut terms = BTreeMap::new();
        for &(v, coef) in &c.terms {
            affine_of(v, coef as i128, &mut constant, &mut terms);
        }
        let slack = match c.sense {
            Sense::Eq => None,
            Sense::Le => {
                let min_lhs: i64 = c
                    .terms
                    .iter()
                    .map(|&(v, coef)| {
                        let (lo, hi) = range(v);
                        (coef * lo).min(coef * hi)
                    })
                    .sum();
                let span = (c.rhs - min_lhs).max(0);
                let bits: Vec<(usize, i64)> = bounded_weights(span)
                    .into_iter()
                    .enumerate()
                    .map(|(b, w)| {
                        bit_labels.push(format!("slack[{}]#{b}", c.label));
                        (bit_labels.len() - 1, w)
                    })
                    .collect();
                for &(b, w) in &bits {
                    terms.insert(b, w as i128);
                }
                Some(Encoding { offset: 0, bits })
            }
        };
        slacks.push(slack);
        constraint_affines.push((constant, terms));
    }

    let n = bit_labels.len();
    let mut ex = Expansion {
        constant: model.constant as i128,
        linear: vec![0; n],
        quadratic: BTreeMap::new(),
    };
    for (&v, &c) in &model.linear {
        let mut constant = 0;
        let mut terms = BTreeMap::new();
        affine_of(v, c as i128, &mut constant, &mut terms);
        ex.constant += constant;
        for (b, t) in terms {
            ex.linear[b] += t;
        }
    }
    for (&(u, v), &c) in &model.quadratic {
        let (mut cu, mut tu) = (0, BTreeMap::new());
        let (mut cv, mut tv) = (0, BTreeMap::new());
        affine_of(u, 1, &mut cu, &mut tu);
        affine_of(v, 1, &mut cv, &mut tv);
        let c = c as i128;
        ex.constant += c * cu * cv;
        for (&a, &wa) in &tu {
            ex.linear[a] += c * wa * cv;
        }
        for (&b, &wb) in &tv {
            ex.linear[b] += c * wb * cu;
        }
        for (&a, &wa) in &tu {
            for (&b, &wb) in &tv {
                ex.add_pair(a, b, c * wa * wb);
            }
        }
    }
    let objective = BitObjective {
        offset: narrow(ex.constant, "objective offset")?,
        linear: ex
            .linear
            .iter()
            .map(|&c| narrow(c, "objective coefficients"))
            .collect::<Result<_>>()?,
        quadratic: ex
            .quadratic
            .iter()
            .filter(|&(_, &c)| c != 0)
            .map(|(&k, &c)| narrow(c, "objective coefficients").map(|c| (k, c)))
            .collect::<Result<_>>()?,
    };
    let penalty_weight = narrow(weight, "penalty weight")?;
    let mut penalty_rows = Vec::with_capacity(constraint_affines.len());
    for (constant, terms) in &constraint_affines {
        ex.add_square(*constant, terms, weight);
        penalty_rows.push(PenaltyRow {
            constant: narrow(*constant, "constraint constant")?,
            terms: terms
                .iter()
                .filter(|&(_, &c)| c != 0)
                .map(|(&b, &c)| narrow(c, "constraint coefficients").map(|c| (b, c)))
                .collect::<Result<_>>()?,
            weight: penalty_weight,
        });
    }

    let linear = ex
        .linear
        .into_iter()
        .map(|c| narrow(c, "linear coefficients"))
        .collect::<Result<Vec<_>>>()?;
    let quadratic = ex
        .quadratic
        .into_iter()
        .filter(|&(_, c)| c != 0)
        .map(|(k, c)| narrow(c, "quadratic coefficients").map(|c| (k, c)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(QuboForm {
        bit_labels,
        linear,
        quadratic,
        offset: narrow(ex.constant, "offset")?,
        encodings,
        slacks,
        penalty_weights: vec![penalty_weight; model.constraints.len()],
        objective,
        penalty_rows,
        model: model.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_cover_range_exactly() {
        assert_eq!(bounded_weights(0), Vec::<i64>::new());
        assert_eq!(bounded_weights(1), vec![1]);
        assert_eq!(bounded_weights(2), vec![1, 1]);
        assert_eq!(bounded_weights(3), vec![1, 2]);
        assert_eq!(bounded_weights(10), vec![1, 2, 4, 3]);
        assert_eq!(bounded_weights(15), vec![1, 2, 4, 8]);
        for span in 0..40 {
            let w = bounded_weights(span);
            assert_eq!(w.iter().sum::<i64>(), span);
            let enc = Encoding {
                offset: 0,
                bits: w.iter().enumerate().map(|(b, &w)| (b, w)).collect(),
            };
            let mut bits = vec![false; w.len()];
            for v in 0..=span {
                assert!(enc.encode(v, &mut bits), "span {span} value {v}");
                assert_eq!(enc.value(&bits), v);
            }
        }
    }

    #[test]
    fn one_hot_expansion() {
        let mut m = QuadraticModel::new();
        let a = m.add_binary("a");
        let b = m.add_binary("b");
        m.add_constraint("one", vec![(a, 1), (b, 1)], Sense::Eq, 1);
        let q = to_qubo(&m, Penalty::Fixed(7)).unwrap();
        assert_eq!(q.num_bits(), 2);
        assert_eq!(q.linear, vec![-7, -7]);
        assert_eq!(q.coef(0, 1), 14);
        assert_eq!(q.coef(1, 0), 14);
        assert_eq!(q.offset, 7);
    }

    #[test]
    fn inequality_gets_slack_bit() {
        let mut m = QuadraticModel::new();
        let a = m.add_binary("a");
        let b = m.add_binary("b");
        m.add_constraint("le", vec![(a, 1), (b, 1)], Sense::Le, 1);
        let q = to_qubo(&m, Penalty::Fixed(3)).unwrap();
        // (a + b + s − 1)²·3
        assert_eq!(q.num_bits(), 3);
        assert_eq!(q.linear, vec![-3, -3, -3]);
        assert_eq!(q.coef(0, 1), 6);
        assert_eq!(q.coef(0, 2), 6);
        assert_eq!(q.coef(1, 2), 6);
        assert_eq!(q.offset, 3);
        for pattern in 0..8u32 {
            let bits: Vec<bool> = (0..3).map(|i| pattern >> i & 1 == 1).collect();
            let s: i64 = bits.iter().map(|&b| b as i64).sum();
            assert_eq!(q.energy(&bits), 3 * (s - 1) * (s - 1));
            assert_eq!(q.split_energy(&bits), q.energy(&bits));
        }
    }

    #[test]
    fn unbounded_integer_is_rejected() {
        let mut m = QuadraticModel::new();
        m.add_integer("g", 0, None).unwrap();
        assert!(matches!(to_qubo(&m, Penalty::Auto), Err(Error::Unbounded(_))));
        assert!(m.add_integer("bad", 3, Some(1)).is_err());
    }

    #[test]
    fn integer_objective_and_auto_penalty() {
        let mut m = QuadraticModel::new();
        let g = m.add_integer("g", 2, Some(5)).unwrap();
        let x = m.add_binary("x");
        m.add_linear(g, 3);
        m.add_quadratic(g, x, -1);
        let q = to_qubo(&m, Penalty::Auto).unwrap();
        // spread = 3·3 + 2·1·5·1 = 19
        assert!(q.penalty_weights.is_empty());
        for pattern in 0..(1u32 << q.num_bits()) {
            let bits: Vec<bool> = (0..q.num_bits()).map(|i| pattern >> i & 1 == 1).collect();
            let vals = q.decode(&bits);
            assert!((2..=5).contains(&vals[g]));
            assert_eq!(q.energy(&bits), m.objective(&vals));
        }
    }

    #[test]
    fn ilp_model_counts_and_exact_point() {
        use crate::domain::tests::{fleet, flight};
        use crate::domain::{CostMatrix, Instance};
        use crate::model_ilp::build_ilp;

        let inst = Instance::new(
            vec![fleet(0, "a", 100, 2), fleet(1, "b", 150, 1)],
            vec![
                flight(1, "SYD", "MEL", 600, 665, 120, 1),
                flight(2, "MEL", "SYD", 700, 765, 90, 1),
                flight(3, "SYD", "PER", 800, 900, 140, 1),
            ],
            CostMatrix::new(3, 2, vec![1000, 1200, 800, 900, 1500, 1400]).unwrap(),
            1.0,
        )
        .unwrap();
        let model = build_ilp(&inst).unwrap();
        let (cqm, layout) = from_ilp(&model);
        assert_eq!(
            cqm.variables().len(),
            model.variable_count + model.initial_variable_count
        );
        assert_eq!(
            cqm.constraints().len(),
            model.constraint_count + model.initial_constraint_count
        );
        let fleet_of = vec![0, 0, 1];
        let values = ilp_values(&layout, &fleet_of, &model.grounded(&fleet_of));
        assert!(cqm.is_feasible(&values));
        assert_eq!(cqm.objective(&values), model.cost_of(&fleet_of));

        let q = to_qubo(&cqm, Penalty::Auto).unwrap();
        let bits = q.encode(&values).unwrap();
        assert_eq!(q.decode(&bits), values);
        assert_eq!(q.energy(&bits), model.cost_of(&fleet_of));
        let mut broken = values.clone();
        broken[layout.x(0, 0)] = 0;
        broken[layout.x(0, 1)] = 1;
        assert!(!cqm.is_feasible(&broken));
    }

    #[test]
    fn rejects_nonpositive_penalty() {
        let m = QuadraticModel::new();
        assert!(to_qubo(&m, Penalty::Fixed(0)).is_err());
    }

    #[test]
    fn export_format() {
        let mut m = QuadraticModel::new();
        let a = m.add_binary("a");
        let b = m.add_binary("b");
        m.add_constraint("one", vec![(a, 1), (b, 1)], Sense::Eq, 1);
        let q = to_qubo(&m, Penalty::Fixed(2)).unwrap();
        let mut buf = Vec::new();
        q.write_to(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# offset 2\n# bits 2\n0 0 -2\n1 1 -2\n0 1 4\n"
        );
    }
}
