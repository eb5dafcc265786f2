//! Exact optimization over the integer-flow encoding: a construction
//! heuristic, a depth-first branch-and-bound, admissible lower bounds for
//! partial states, and an exhaustive oracle for tiny instances.
//!
//! The search branches first on primary routes (vehicle by vehicle, routes in
//! nondecreasing lexicographic order), then places the visited copies one at a
//! time, each drawing its support vehicles from the current vehicle positions.
//! Placement sequences are restricted to the smallest-index topological order
//! of the resulting precedence graph, so every flow is generated once.

mod bounds;
mod brute;
mod heuristic;
mod search;

use std::time::Duration;

pub use bounds::{partial_lower_bound, PartialState};
pub use brute::{brute_force, brute_force_completion, BRUTE_FORCE_CAP};
pub use heuristic::construction_heuristic;
pub use search::solve_exact;

use crate::graph::ExpandedGraph;
use crate::instance::Instance;
use crate::schedule::{Schedule, Solution};

/// Absolute tolerance for incumbent comparisons.
pub const INCUMBENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SearchLimits {
    pub max_nodes: u64,
    pub max_time: Duration,
    /// Starting incumbent; used when feasible and better than the heuristic.
    pub incumbent: Option<(Solution, Schedule)>,
    /// Bound-based pruning; disabling it keeps symmetry breaking.
    pub pruning: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_nodes: u64::MAX,
            max_time: Duration::from_secs(60),
            incumbent: None,
            pruning: true,
        }
    }
}

impl SearchLimits {
    pub fn unlimited() -> Self {
        SearchLimits {
            max_time: Duration::MAX,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    FeasibleLimit,
    Infeasible,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleLimit => "limit",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    pub nodes: u64,
    pub pruned: u64,
    pub leaves: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub best: Option<(Solution, Schedule)>,
    pub status: SolveStatus,
    pub stats: SearchStats,
    pub lower_bound: f64,
}

impl SolveResult {
    pub fn makespan(&self) -> Option<f64> {
        self.best.as_ref().map(|(_, s)| s.makespan)
    }
}

/// Per-customer constants shared by the heuristic, the bounds and the search.
/// Vectors are indexed by original customer id (index 0 unused).
pub(crate) struct Ctx<'a> {
    pub inst: &'a Instance,
    pub g: &'a ExpandedGraph,
    pub split: bool,
    pub support: u32,
    /// `min(b_c, |O|)`: the largest usable mode.
    pub top: Vec<u32>,
    /// `service[c][m] = d_c / p_c^m`.
    pub service: Vec<Vec<f64>>,
    pub prod: Vec<Vec<f64>>,
    pub fastest: Vec<f64>,
    /// Least support-vehicle time `m · s` needed to serve all of `c`.
    pub work: Vec<f64>,
    /// Least travel time into `c` from the depot or another customer.
    pub min_in: Vec<f64>,
    /// Largest total service rate over simultaneous split visits.
    pub rmax: Vec<f64>,
}

impl<'a> Ctx<'a> {
    pub fn new(inst: &'a Instance, g: &'a ExpandedGraph) -> Self {
        let nv = inst.num_customers();
        let support = u32::try_from(g.num_support).unwrap_or(u32::MAX);
        let mut top = vec![0];
        let mut service = vec![Vec::new()];
        let mut prod = vec![Vec::new()];
        let mut fastest = vec![0.0];
        let mut work = vec![0.0];
        let mut min_in = vec![0.0];
        let mut rmax = vec![0.0];
        for c in 1..=nv {
            let spec = inst.customer(c);
            let t = spec.max_modes.min(support);
            let p: Vec<f64> = std::iter::once(0.0)
                .chain((1..=spec.max_modes).map(|m| spec.productivity(m).expect("valid mode")))
                .collect();
            let s: Vec<f64> = std::iter::once(0.0)
                .chain((1..=spec.max_modes).map(|m| spec.demand / p[m as usize]))
                .collect();
            top.push(t);
            fastest.push(s[t as usize]);
            work.push((1..=t).map(|m| f64::from(m) * s[m as usize]).fold(f64::INFINITY, f64::min));
            min_in.push(
                (0..=nv)
                    .filter(|&o| o != c)
                    .map(|o| inst.travel(o, c))
                    .fold(f64::INFINITY, f64::min),
            );
            rmax.push(max_rate(&p, t, g.num_primary, support));
            service.push(s);
            prod.push(p);
        }
        Ctx {
            inst,
            g,
            split: g.policy.split_allowed,
            support,
            top,
            service,
            prod,
            fastest,
            work,
            min_in,
            rmax,
        }
    }
}

/// `max Σ p^{m_k}` over at most `copies` visits with `Σ m_k ≤ support` and
/// each `m_k ≤ top`.
fn max_rate(p: &[f64], top: u32, copies: usize, support: u32) -> f64 {
    let width = support as usize + 1;
    let mut best = vec![0.0f64; width];
    let mut overall = 0.0f64;
    for _ in 0..copies {
        let mut next = vec![f64::NEG_INFINITY; width];
        for used in 0..width {
            if !best[used].is_finite() {
                continue;
            }
            for m in 1..=top as usize {
                if used + m < width {
                    let r = best[used] + p[m];
                    if r > next[used + m] {
                        next[used + m] = r;
                    }
                }
            }
        }
        overall = next.iter().copied().fold(overall, f64::max);
        best = next;
    }
    overall
}
