//! Min-cost flow by successive shortest augmenting paths.
//!
//! Dijkstra runs on reduced costs `c(u,v) + π(u) − π(v)`; after every search
//! the potentials absorb the distances, which keeps every residual arc's
//! reduced cost non-negative as long as all original costs are.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

const INF: i64 = i64::MAX / 4;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: i64,
}

#[derive(Debug, Clone)]
pub struct MinCostFlow {
    adj: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
    potential: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowResult {
    pub flow: i64,
    pub cost: i64,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            arcs: Vec::new(),
            potential: vec![0; nodes],
        }
    }

    /// Adds `u → v` and its zero-capacity reverse; returns the forward arc id.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: i64, cost: i64) -> usize {
        assert!(cost >= 0, "arc costs must be non-negative");
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap, cost });
        self.arcs.push(Arc {
            to: u,
            cap: 0,
            cost: -cost,
        });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    /// Flow currently carried by a forward arc.
    pub fn flow_on(&self, arc: usize) -> i64 {
        self.arcs[arc ^ 1].cap
    }

    /// Pushes up to `limit` units from `s` to `t` at minimum cost. Returns
    /// `None` if `deadline` passes first.
    pub fn run(&mut self, s: usize, t: usize, limit: i64, deadline: Option<Instant>) -> Option<FlowResult> {
        let n = self.adj.len();
        let mut flow = 0;
        let mut cost = 0;
        let mut dist = vec![INF; n];
        let mut parent = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        let mut rounds = 0u64;
        while flow < limit {
            rounds += 1;
            if rounds.is_multiple_of(32) && deadline.is_some_and(|d| Instant::now() >= d) {
                return None;
            }
            dist.fill(INF);
            parent.fill(usize::MAX);
            dist[s] = 0;
            heap.push(Reverse((0i64, s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.cap <= 0 {
                        continue;
                    }
                    let nd = d + arc.cost + self.potential[u] - self.potential[arc.to];
                    debug_assert!(arc.cost + self.potential[u] - self.potential[arc.to] >= 0);
                    if nd < dist[arc.to] {
                        dist[arc.to] = nd;
                        parent[arc.to] = a;
                        heap.push(Reverse((nd, arc.to)));
                    }
                }
            }
            if dist[t] == INF {
                break;
            }
            // Unreached nodes move by dist[t] so reduced costs stay non-negative.
            let cutoff = dist[t];
            for v in 0..n {
                self.potential[v] += dist[v].min(cutoff);
            }
            let mut push = limit - flow;
            let mut v = t;
            while v != s {
                let a = parent[v];
                push = push.min(self.arcs[a].cap);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let a = parent[v];
                self.arcs[a].cap -= push;
                self.arcs[a ^ 1].cap += push;
                cost += push * self.arcs[a].cost;
                v = self.arcs[a ^ 1].to;
            }
            flow += push;
        }
        Some(FlowResult { flow, cost })
    }

    /// Optimality certificate: Bellman–Ford potentials under which every
    /// residual arc has non-negative reduced cost, or `None` when the residual
    /// network holds a negative cycle (the flow is not min-cost).
    pub fn certificate(&self) -> Option<Vec<i64>> {
        let n = self.adj.len();
        let mut pi = vec![0i64; n];
        for round in 0..=n {
            let mut changed = false;
            for u in 0..n {
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.cap > 0 && pi[u] + arc.cost < pi[arc.to] {
                        pi[arc.to] = pi[u] + arc.cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                return Some(pi);
            }
            if round == n {
                return None;
            }
        }
        None
    }

    /// Residual arcs whose reduced cost under `pi` is negative.
    pub fn negative_reduced_arcs(&self, pi: &[i64]) -> usize {
        let mut count = 0;
        for u in 0..self.adj.len() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && arc.cost + pi[u] - pi[arc.to] < 0 {
                    count += 1;
                }
            }
        }
        count
    }
}
