//! Single-day integer model with aircraft balance.
//!
//! Every flight contributes two events: a departure at its origin and an
//! arrival at its destination. Events are chained per airport in time order
//! (arrivals before departures at equal times) and the grounded count of each
//! fleet type is carried along the chain: the count at a node is the count
//! just before it, plus the arrival or minus the departure the node records.
//! The first node of a chain starts from that airport's initial grounded
//! aircraft, which are decision variables capped in total by the fleet's
//! available count.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain::{Cents, ConstraintFamily, Flight, Grid, Instance, Violation};
use crate::model_blp::DayProblem;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Arrival,
    Departure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub airport: usize,
    pub time: u16,
    pub kind: EventKind,
    /// Position of the flight in the slice the network was built from.
    pub flight: usize,
}

/// Per-airport chronological event chains.
///
/// Node ids follow global time order; each airport chain is the subsequence
/// of nodes at that airport. The incidence matrices are stored sparsely:
/// every flight has exactly one arrival node and one departure node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimelineNetwork {
    airports: Vec<String>,
    nodes: Vec<Node>,
    arrival_node: Vec<usize>,
    departure_node: Vec<usize>,
    chains: Vec<Vec<usize>>,
    /// For each node, the previous node in its airport chain.
    prev: Vec<Option<usize>>,
}

impl TimelineNetwork {
    /// Airport codes, sorted.
    pub fn airports(&self) -> &[String] {
        &self.airports
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn flight_count(&self) -> usize {
        self.arrival_node.len()
    }

    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn previous(&self, node: usize) -> Option<usize> {
        self.prev[node]
    }

    pub fn arrival_node(&self, flight: usize) -> usize {
        self.arrival_node[flight]
    }

    pub fn departure_node(&self, flight: usize) -> usize {
        self.departure_node[flight]
    }

    /// `a_ik`: flight `i` arrives at node `k`.
    pub fn arrives_at(&self, flight: usize, node: usize) -> bool {
        self.arrival_node[flight] == node
    }

    /// `b_ik`: flight `i` departs from node `k`.
    pub fn departs_at(&self, flight: usize, node: usize) -> bool {
        self.departure_node[flight] == node
    }

    /// Net change (+1 arrival, −1 departure) that node `k` applies to the
    /// fleet type flown by its flight.
    fn delta(&self, node: usize) -> i64 {
        match self.nodes[node].kind {
            EventKind::Arrival => 1,
            EventKind::Departure => -1,
        }
    }
}

/// Builds the event network for one day's flights.
pub fn build_timeline(flights: &[Flight]) -> Result<TimelineNetwork> {
    let mut days: Vec<u32> = flights.iter().map(|f| f.day).collect();
    days.sort_unstable();
    days.dedup();
    if days.len() > 1 {
        return Err(Error::MultiDay(days.len()));
    }
    let mut codes: Vec<&str> = flights
        .iter()
        .flat_map(|f| [f.origin.as_str(), f.destination.as_str()])
        .collect();
    codes.sort_unstable();
    codes.dedup();
    let index: BTreeMap<&str, usize> = codes.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    let mut nodes: Vec<Node> = Vec::with_capacity(flights.len() * 2);
    for (pos, f) in flights.iter().enumerate() {
        nodes.push(Node {
            airport: index[f.origin.as_str()],
            time: f.departure,
            kind: EventKind::Departure,
            flight: pos,
        });
        nodes.push(Node {
            airport: index[f.destination.as_str()],
            time: f.arrival,
            kind: EventKind::Arrival,
            flight: pos,
        });
    }
    nodes.sort_by_key(|n| (n.time, n.kind, n.airport, n.flight));

    let mut arrival_node = vec![usize::MAX; flights.len()];
    let mut departure_node = vec![usize::MAX; flights.len()];
    let mut chains = vec![Vec::new(); codes.len()];
    let mut prev = Vec::with_capacity(nodes.len());
    for (k, n) in nodes.iter().enumerate() {
        match n.kind {
            EventKind::Arrival => arrival_node[n.flight] = k,
            EventKind::Departure => departure_node[n.flight] = k,
        }
        prev.push(chains[n.airport].last().copied());
        chains[n.airport].push(k);
    }
    Ok(TimelineNetwork {
        airports: codes.into_iter().map(String::from).collect(),
        nodes,
        arrival_node,
        departure_node,
        chains,
        prev,
    })
}

/// Grounded-aircraft counts for every airport and node, by fleet type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grounded {
    /// Airports × fleets: aircraft parked before the first event.
    pub initial: Grid<i64>,
    /// Nodes × fleets: `G_kj` just after node `k`.
    pub at_node: Grid<i64>,
    /// Airports × fleets: aircraft parked after the last event.
    pub end_of_day: Grid<i64>,
}

/// First node at which some grounded count drops below zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Negativity {
    pub node: usize,
    pub fleet: usize,
    pub value: i64,
}

/// Carries grounded counts forward along every airport chain.
pub fn propagate_grounded(
    network: &TimelineNetwork,
    fleet_of: &[usize],
    initial: &Grid<i64>,
) -> std::result::Result<Grounded, Negativity> {
    let eta = initial.cols();
    let mut current = initial.clone();
    let mut at_node = Grid::filled(network.node_count(), eta, 0i64);
    if let Some((idx, &v)) = initial.as_slice().iter().enumerate().find(|(_, &v)| v < 0) {
        let airport = idx / eta.max(1);
        let node = network.chains[airport].first().copied().unwrap_or(0);
        return Err(Negativity {
            node,
            fleet: idx % eta,
            value: v,
        });
    }
    for (k, node) in network.nodes.iter().enumerate() {
        let j = fleet_of[node.flight];
        let row = current.row_mut(node.airport);
        row[j] += network.delta(k);
        if row[j] < 0 {
            return Err(Negativity {
                node: k,
                fleet: j,
                value: row[j],
            });
        }
        at_node.row_mut(k).copy_from_slice(row);
    }
    Ok(Grounded {
        initial: initial.clone(),
        at_node,
        end_of_day: current,
    })
}

/// Smallest non-negative initial counts that keep every chain non-negative:
/// per airport and fleet, the largest prefix excess of departures over
/// arrivals.
pub fn minimal_initials(network: &TimelineNetwork, fleet_of: &[usize], fleets: usize) -> Grid<i64> {
    let mut running = Grid::filled(network.airports.len(), fleets, 0i64);
    let mut need = Grid::filled(network.airports.len(), fleets, 0i64);
    for (k, node) in network.nodes.iter().enumerate() {
        let j = fleet_of[node.flight];
        let cell = &mut running[(node.airport, j)];
        *cell -= network.delta(k);
        if *cell > need[(node.airport, j)] {
            need[(node.airport, j)] = *cell;
        }
    }
    need
}

/// Per-fleet totals of [`minimal_initials`] over all airports.
pub fn required_aircraft(network: &TimelineNetwork, fleet_of: &[usize], fleets: usize) -> Vec<i64> {
    let need = minimal_initials(network, fleet_of, fleets);
    (0..fleets)
        .map(|j| (0..need.rows()).map(|a| need[(a, j)]).sum())
        .collect()
}

/// Balance-family violations for a total single-day assignment. When
/// `grounded` is given its values are checked as stated; otherwise the
/// minimal initials are derived and only their availability cap can fail.
pub fn balance_violations(
    network: &TimelineNetwork,
    fleet_of: &[usize],
    caps: &[u32],
    grounded: Option<&Grounded>,
    day: u32,
) -> Vec<Violation> {
    let eta = caps.len();
    let mut out = Vec::new();
    let shape_ok = grounded.is_some_and(|g| {
        g.initial.rows() == network.airports.len()
            && g.initial.cols() == eta
            && g.at_node.rows() == network.node_count()
            && g.at_node.cols() == eta
    });
    let initial = match grounded {
        Some(g) if shape_ok => {
            for (k, node) in network.nodes.iter().enumerate() {
                let j_flown = fleet_of[node.flight];
                for j in 0..eta {
                    let before = match network.prev[k] {
                        Some(p) => g.at_node[(p, j)],
                        None => g.initial[(node.airport, j)],
                    };
                    let delta = if j == j_flown { network.delta(k) } else { 0 };
                    let residual = before + delta - g.at_node[(k, j)];
                    if residual != 0 {
                        out.push(Violation {
                            family: ConstraintFamily::Balance,
                            day,
                            index: k,
                            fleet: Some(j),
                            amount: residual.abs(),
                        });
                    }
                    if g.at_node[(k, j)] < 0 {
                        out.push(Violation {
                            family: ConstraintFamily::NonNegative,
                            day,
                            index: k,
                            fleet: Some(j),
                            amount: -g.at_node[(k, j)],
                        });
                    }
                }
            }
            for a in 0..g.initial.rows() {
                for j in 0..eta {
                    if g.initial[(a, j)] < 0 {
                        out.push(Violation {
                            family: ConstraintFamily::NonNegative,
                            day,
                            index: network.chains[a].first().copied().unwrap_or(0),
                            fleet: Some(j),
                            amount: -g.initial[(a, j)],
                        });
                    }
                }
            }
            g.initial.clone()
        }
        _ => minimal_initials(network, fleet_of, eta),
    };
    for (j, &cap) in caps.iter().enumerate() {
        let used: i64 = (0..initial.rows()).map(|a| initial[(a, j)]).sum();
        if used > cap as i64 {
            out.push(Violation {
                family: ConstraintFamily::InitialCap,
                day,
                index: j,
                fleet: Some(j),
                amount: used - cap as i64,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IlpOptions {
    /// Keep the per-fleet flight cap rows alongside the balance system.
    /// With them every fleet's flights fit in its available aircraft, so the
    /// balance rows can never bind; turning them off leaves aircraft reuse
    /// limited by the balance system alone.
    pub flight_cap: bool,
}

impl Default for IlpOptions {
    fn default() -> Self {
        Self { flight_cap: true }
    }
}

#[derive(Debug, Clone)]
pub struct IlpModel {
    pub day: u32,
    pub flight_ids: Vec<u64>,
    pub network: TimelineNetwork,
    pub fleet_names: Vec<String>,
    pub fleet_caps: Vec<u32>,
    /// Flights × fleets, cost plus mismatch penalty.
    pub effective_cost: Grid<Cents>,
    pub options: IlpOptions,
    /// `|F|·η + |M|·η`.
    pub variable_count: usize,
    /// `|F| + η + |M|·η` (the `η` term only with flight caps).
    pub constraint_count: usize,
    /// Initial grounded variables, one per airport and fleet.
    pub initial_variable_count: usize,
    /// One availability row per fleet over the initial grounded variables.
    pub initial_constraint_count: usize,
}

impl IlpModel {
    pub fn flight_count(&self) -> usize {
        self.flight_ids.len()
    }

    pub fn fleet_count(&self) -> usize {
        self.fleet_caps.len()
    }

    pub fn cost_of(&self, fleet_of: &[usize]) -> Cents {
        fleet_of
            .iter()
            .enumerate()
            .map(|(i, &j)| self.effective_cost[(i, j)])
            .sum()
    }

    /// Whether a total assignment admits initial placements within the
    /// availability caps (and respects the flight caps when enabled).
    pub fn is_feasible(&self, fleet_of: &[usize]) -> bool {
        let eta = self.fleet_count();
        if self.options.flight_cap {
            let mut load = vec![0u32; eta];
            for &j in fleet_of {
                load[j] += 1;
            }
            if load.iter().zip(&self.fleet_caps).any(|(l, c)| l > c) {
                return false;
            }
        }
        required_aircraft(&self.network, fleet_of, eta)
            .iter()
            .zip(&self.fleet_caps)
            .all(|(&need, &cap)| need <= cap as i64)
    }

    /// The assignment part alone: one-hot rows plus flight caps, as a
    /// single-day transportation problem.
    pub fn assignment_problem(&self) -> DayProblem {
        DayProblem {
            day: self.day,
            flights: (0..self.flight_count()).collect(),
            flight_ids: self.flight_ids.clone(),
            effective_cost: self.effective_cost.clone(),
            fleet_caps: if self.options.flight_cap {
                self.fleet_caps.clone()
            } else {
                vec![self.flight_count() as u32; self.fleet_count()]
            },
        }
    }

    /// Grounded counts from the minimal initial placement.
    pub fn grounded(&self, fleet_of: &[usize]) -> Grounded {
        let init = minimal_initials(&self.network, fleet_of, self.fleet_count());
        propagate_grounded(&self.network, fleet_of, &init).expect("minimal initials keep every chain non-negative")
    }
}

pub fn build_ilp(instance: &Instance) -> Result<IlpModel> {
    build_ilp_with(instance, IlpOptions::default())
}

pub fn build_ilp_with(instance: &Instance, options: IlpOptions) -> Result<IlpModel> {
    if instance.days().len() > 1 {
        return Err(Error::MultiDay(instance.days().len()));
    }
    let network = build_timeline(instance.flights())?;
    let f = instance.flights().len();
    let eta = instance.fleet_count();
    let m = network.node_count();
    let mut ec = Grid::filled(f, eta, 0);
    for i in 0..f {
        for j in 0..eta {
            ec[(i, j)] = instance.effective_cost(i, j);
        }
    }
    let caps_rows = if options.flight_cap { eta } else { 0 };
    Ok(IlpModel {
        day: instance.days().first().copied().unwrap_or(1),
        flight_ids: instance.flights().iter().map(|f| f.id).collect(),
        fleet_names: instance.fleets().iter().map(|f| f.name.clone()).collect(),
        fleet_caps: instance.fleets().iter().map(|f| f.available).collect(),
        effective_cost: ec,
        options,
        variable_count: f * eta + m * eta,
        constraint_count: f + caps_rows + m * eta,
        initial_variable_count: network.airports.len() * eta,
        initial_constraint_count: eta,
        network,
    })
}

/// Writes per-airport counts as `city,<fleet names...>`.
pub fn write_grounded_csv<W: Write>(
    out: W,
    airports: &[String],
    fleet_names: &[String],
    counts: &Grid<i64>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["city".to_string()];
    header.extend(fleet_names.iter().cloned());
    w.write_record(&header)?;
    for (a, code) in airports.iter().enumerate() {
        let mut rec = vec![code.clone()];
        rec.extend(counts.row(a).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tests::{fleet, flight};
    use crate::domain::CostMatrix;

    #[test]
    fn single_flight_network() {
        let net = build_timeline(&[flight(1, "SYD", "MEL", 600, 665, 100, 1)]).unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.nodes()[0].kind, EventKind::Departure);
        assert_eq!(net.airports()[net.nodes()[0].airport], "SYD");
        assert!(net.departs_at(0, 0));
        assert!(net.arrives_at(0, 1));
        assert!(!net.arrives_at(0, 0));
    }

    #[test]
    fn empty_network_is_valid() {
        let net = build_timeline(&[]).unwrap();
        assert_eq!(net.node_count(), 0);
        assert!(net.airports().is_empty());
    }

    #[test]
    fn arrival_precedes_departure_on_tie() {
        let flights = [
            flight(1, "MEL", "SYD", 665, 730, 100, 1),
            flight(2, "SYD", "MEL", 600, 665, 100, 1),
        ];
        let net = build_timeline(&flights).unwrap();
        let mel = net.airports().iter().position(|a| a == "MEL").unwrap();
        let chain = &net.chains()[mel];
        assert_eq!(chain.len(), 2);
        assert_eq!(net.nodes()[chain[0]].kind, EventKind::Arrival);
        assert_eq!(net.nodes()[chain[1]].kind, EventKind::Departure);
        assert_eq!(net.previous(chain[1]), Some(chain[0]));
    }

    #[test]
    fn timeline_rejects_multiple_days() {
        let flights = [
            flight(1, "MEL", "SYD", 665, 730, 100, 1),
            flight(2, "SYD", "MEL", 600, 665, 100, 2),
        ];
        assert!(matches!(build_timeline(&flights), Err(Error::MultiDay(2))));
    }

    #[test]
    fn propagation_arrival_then_departure() {
        // MEL sees an arrival then a departure, both on fleet 0.
        let flights = [
            flight(1, "SYD", "MEL", 600, 665, 100, 1),
            flight(2, "MEL", "SYD", 700, 765, 100, 1),
        ];
        let net = build_timeline(&flights).unwrap();
        let mel = net.airports().iter().position(|a| a == "MEL").unwrap();
        let mut init = Grid::filled(2, 1, 0);
        let syd = 1 - mel;
        init[(syd, 0)] = 1;
        let g = propagate_grounded(&net, &[0, 0], &init).unwrap();
        let mel_values: Vec<i64> = net.chains()[mel].iter().map(|&k| g.at_node[(k, 0)]).collect();
        assert_eq!(mel_values, vec![1, 0]);
        assert_eq!(g.end_of_day[(syd, 0)], 1);
    }

    #[test]
    fn propagation_reports_departure_before_arrival() {
        let flights = [
            flight(1, "MEL", "SYD", 600, 665, 100, 1),
            flight(2, "SYD", "MEL", 700, 765, 100, 1),
        ];
        let net = build_timeline(&flights).unwrap();
        let init = Grid::filled(2, 1, 0);
        let err = propagate_grounded(&net, &[0, 0], &init).unwrap_err();
        assert_eq!(err.node, net.departure_node(0));
        assert_eq!(err.value, -1);
        let need = minimal_initials(&net, &[0, 0], 1);
        let mel = net.airports().iter().position(|a| a == "MEL").unwrap();
        assert_eq!(need[(mel, 0)], 1);
        assert_eq!(need[(1 - mel, 0)], 0);
    }

    #[test]
    fn single_departure_conservation() {
        let flights = [flight(1, "SYD", "MEL", 600, 665, 100, 1)];
        let net = build_timeline(&flights).unwrap();
        let syd = net.airports().iter().position(|a| a == "SYD").unwrap();
        let mut init = Grid::filled(2, 1, 0);
        init[(syd, 0)] = 1;
        let g = propagate_grounded(&net, &[0], &init).unwrap();
        assert_eq!(g.at_node[(net.departure_node(0), 0)], 0);
        assert!(propagate_grounded(&net, &[0], &Grid::filled(2, 1, 0)).is_err());
    }

    #[test]
    fn ilp_counts_follow_structure() {
        let flights = vec![
            flight(1, "SYD", "MEL", 600, 665, 100, 1),
            flight(2, "MEL", "SYD", 700, 765, 100, 1),
            flight(3, "MEL", "PER", 710, 900, 100, 1),
        ];
        let costs = CostMatrix::new(3, 2, vec![1; 6]).unwrap();
        let inst =
            crate::Instance::new(vec![fleet(0, "a", 100, 2), fleet(1, "b", 120, 2)], flights, costs, 1.0).unwrap();
        let m = build_ilp(&inst).unwrap();
        assert_eq!(m.network.node_count(), 6);
        assert_eq!(m.variable_count, 3 * 2 + 6 * 2);
        assert_eq!(m.constraint_count, 3 + 2 + 6 * 2);
        assert_eq!(m.initial_variable_count, 3 * 2);
        let relaxed = build_ilp_with(&inst, IlpOptions { flight_cap: false }).unwrap();
        assert_eq!(relaxed.constraint_count, 3 + 6 * 2);
    }

    #[test]
    fn grounded_csv_shape() {
        let mut counts = Grid::filled(2, 2, 0);
        counts[(1, 0)] = 3;
        let mut buf = Vec::new();
        write_grounded_csv(
            &mut buf,
            &["MEL".into(), "SYD".into()],
            &["A220".into(), "A330".into()],
            &counts,
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "city,A220,A330\nMEL,0,0\nSYD,3,0\n");
    }
}
