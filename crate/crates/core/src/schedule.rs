//! Solutions over the expanded graph, their feasibility check, and the
//! earliest-start schedule.
//!
//! A solution fixes primary routes, an integer support-vehicle flow, one mode
//! per visited copy and a service duration per visited copy. Start times are
//! not stored: they follow from the active arcs (primary arcs plus arcs with
//! support flow) by longest-path propagation,
//! `t_j = max_i (t_i + Σ_{h ∈ Ñ_i} s_h + τ_ij)`, and the makespan is the same
//! expression evaluated at the end depot.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ExpandedGraph, NodeId, VariantPolicy};
use crate::instance::Instance;
use crate::lp::{solve_lp, LpProblem, LpRow, LpStatus, Relation};

/// Absolute tolerance for equality constraints (demand, mode arithmetic).
pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrimaryPlan {
    /// `routes[k]` lists the copies of `C_k` visited by vehicle `k`, in order.
    pub routes: Vec<Vec<NodeId>>,
}

impl PrimaryPlan {
    pub fn new(routes: Vec<Vec<NodeId>>) -> Self {
        PrimaryPlan { routes }
    }

    pub fn visited(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.routes.iter().flatten().copied()
    }

    /// Primary arcs `0 → first`, consecutive pairs, `last → n` of every nonempty route.
    pub fn arcs(&self, end: NodeId) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for route in self.routes.iter().filter(|r| !r.is_empty()) {
            out.push((NodeId::START, route[0]));
            out.extend(route.windows(2).map(|w| (w[0], w[1])));
            out.push((*route.last().expect("nonempty"), end));
        }
        out
    }
}

/// Integer support-vehicle flow `w_ij`; `v_ij` is `w_ij > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportFlow {
    pub counts: BTreeMap<(NodeId, NodeId), u32>,
}

impl SupportFlow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, i: NodeId, j: NodeId, w: u32) {
        if w > 0 {
            *self.counts.entry((i, j)).or_insert(0) += w;
        }
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> u32 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn used(&self, i: NodeId, j: NodeId) -> bool {
        self.get(i, j) > 0
    }

    pub fn inflow(&self, j: NodeId) -> u32 {
        self.counts
            .iter()
            .filter(|((_, b), _)| *b == j)
            .map(|(_, w)| *w)
            .sum()
    }

    pub fn outflow(&self, i: NodeId) -> u32 {
        self.counts
            .range((i, NodeId(0))..=(i, NodeId(usize::MAX)))
            .map(|(_, w)| *w)
            .sum()
    }

    pub fn active_arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.counts
            .iter()
            .filter(|(_, w)| **w > 0)
            .map(|(&a, _)| a)
    }
}

/// One node sequence `0 → … → n` per support vehicle.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportPaths {
    pub paths: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ServicePlan {
    pub mode: BTreeMap<NodeId, u32>,
    pub duration: BTreeMap<NodeId, f64>,
}

impl ServicePlan {
    /// Full-demand durations `d / p^m` for every moded copy.
    pub fn full_service(inst: &Instance, g: &ExpandedGraph, mode: BTreeMap<NodeId, u32>) -> Result<Self> {
        let duration = mode
            .iter()
            .map(|(&j, &m)| Ok((j, inst.customer(g.original_of[j.0]).mode_service_time(m)?)))
            .collect::<Result<_>>()?;
        Ok(ServicePlan { mode, duration })
    }

    pub fn duration(&self, j: NodeId) -> f64 {
        self.duration.get(&j).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub plan: PrimaryPlan,
    pub flow: SupportFlow,
    pub services: ServicePlan,
    pub policy: VariantPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Start time of the depot, every visited copy, and the end depot.
    pub start: BTreeMap<NodeId, f64>,
    pub makespan: f64,
}

impl Schedule {
    pub fn start_of(&self, j: NodeId) -> f64 {
        self.start.get(&j).copied().unwrap_or(0.0)
    }
}

/// `Σ_{h ∈ Ñ_i} s_h`: the service time that delays departures from `i`.
pub fn related_service(g: &ExpandedGraph, durations: &ServicePlan, i: NodeId) -> f64 {
    g.related[i.0].iter().map(|&h| durations.duration(h)).sum()
}

fn active_arc_set(g: &ExpandedGraph, plan: &PrimaryPlan, flow: &SupportFlow) -> BTreeSet<(NodeId, NodeId)> {
    plan.arcs(g.end())
        .into_iter()
        .chain(flow.active_arcs())
        .collect()
}

/// Kahn order of `nodes` under `arcs`, or the node sequence of a cycle.
fn topological_order(count: usize, arcs: &BTreeSet<(NodeId, NodeId)>) -> std::result::Result<Vec<NodeId>, Vec<NodeId>> {
    let mut indeg = vec![0usize; count];
    let mut succ = vec![Vec::new(); count];
    for &(i, j) in arcs {
        indeg[j.0] += 1;
        succ[i.0].push(j);
    }
    let mut stack: Vec<usize> = (0..count).rev().filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(count);
    while let Some(v) = stack.pop() {
        order.push(NodeId(v));
        for &j in succ[v].iter().rev() {
            indeg[j.0] -= 1;
            if indeg[j.0] == 0 {
                stack.push(j.0);
            }
        }
    }
    if order.len() == count {
        return Ok(order);
    }
    // every leftover node has a leftover predecessor; walk back until a repeat
    let mut pred = vec![None; count];
    for &(i, j) in arcs {
        if indeg[i.0] > 0 && indeg[j.0] > 0 {
            pred[j.0] = Some(i);
        }
    }
    let mut seen = vec![false; count];
    let mut v = (0..count).find(|&v| indeg[v] > 0).expect("leftover node");
    let mut walk = Vec::new();
    while !seen[v] {
        seen[v] = true;
        walk.push(NodeId(v));
        v = pred[v].expect("leftover node has a leftover predecessor").0;
    }
    let first = walk.iter().position(|n| n.0 == v).expect("repeat is on the walk");
    let mut cycle: Vec<NodeId> = walk[first..].to_vec();
    cycle.reverse();
    Err(cycle)
}

/// Earliest-start schedule of `sol`, or [`Error::Cycle`] if the active arcs
/// contain a directed cycle.
pub fn compute_schedule(g: &ExpandedGraph, sol: &Solution) -> Result<Schedule> {
    schedule_from_parts(g, &sol.plan, &sol.flow, &sol.services)
}

pub(crate) fn schedule_from_parts(
    g: &ExpandedGraph,
    plan: &PrimaryPlan,
    flow: &SupportFlow,
    services: &ServicePlan,
) -> Result<Schedule> {
    let arcs = active_arc_set(g, plan, flow);
    for &(i, j) in &arcs {
        if !g.has_arc(i, j) {
            return Err(Error::UnknownArc(i, j));
        }
    }
    let count = g.node_count();
    let order = topological_order(count, &arcs).map_err(Error::Cycle)?;
    let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); count];
    for &(i, j) in &arcs {
        preds[j.0].push(i);
    }
    let mut t = vec![0.0f64; count];
    let mut touched = vec![false; count];
    touched[0] = true;
    touched[g.end().0] = true;
    for j in order {
        for &i in &preds[j.0] {
            touched[j.0] = true;
            let release = t[i.0] + related_service(g, services, i) + g.tau(i, j);
            if release > t[j.0] {
                t[j.0] = release;
            }
        }
    }
    let makespan = t[g.end().0];
    let start = (0..count)
        .filter(|&v| touched[v])
        .map(|v| (NodeId(v), t[v]))
        .collect();
    Ok(Schedule { start, makespan })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckFamily {
    RouteDegree,
    VisitCount,
    Demand,
    SingleMode,
    ServiceBound,
    ModeInflow,
    FlowConservation,
    DepotFlow,
    Capacity,
    Schedule,
}

impl CheckFamily {
    pub const ALL: [CheckFamily; 10] = [
        CheckFamily::RouteDegree,
        CheckFamily::VisitCount,
        CheckFamily::Demand,
        CheckFamily::SingleMode,
        CheckFamily::ServiceBound,
        CheckFamily::ModeInflow,
        CheckFamily::FlowConservation,
        CheckFamily::DepotFlow,
        CheckFamily::Capacity,
        CheckFamily::Schedule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckFamily::RouteDegree => "route-degree",
            CheckFamily::VisitCount => "visit-count",
            CheckFamily::Demand => "demand",
            CheckFamily::SingleMode => "single-mode",
            CheckFamily::ServiceBound => "service-bound",
            CheckFamily::ModeInflow => "mode-inflow",
            CheckFamily::FlowConservation => "flow-conservation",
            CheckFamily::DepotFlow => "depot-flow",
            CheckFamily::Capacity => "capacity",
            CheckFamily::Schedule => "schedule",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckEntry {
    pub family: CheckFamily,
    /// One message per violating index; empty when the family passes.
    pub violations: Vec<String>,
}

impl CheckEntry {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub entries: Vec<CheckEntry>,
    /// Non-fatal findings, e.g. zero-duration split visits.
    pub warnings: Vec<String>,
    pub schedule: Option<Schedule>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.entries.iter().all(CheckEntry::passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.entries
            .iter()
            .filter(|e| !e.passed())
            .map(|e| e.family.name())
            .collect()
    }

    pub fn entry(&self, family: CheckFamily) -> &CheckEntry {
        self.entries
            .iter()
            .find(|e| e.family == family)
            .expect("every family is reported")
    }
}

/// Itemized check of `sol` against the routing, mode, demand and flow
/// constraints plus schedulability.
pub fn check_feasibility(inst: &Instance, g: &ExpandedGraph, sol: &Solution) -> FeasibilityReport {
    let mut v: BTreeMap<CheckFamily, Vec<String>> =
        CheckFamily::ALL.iter().map(|&f| (f, Vec::new())).collect();
    let mut warnings = Vec::new();
    let mut push = |f: CheckFamily, msg: String| v.get_mut(&f).expect("family").push(msg);
    let count = g.node_count();
    let end = g.end();

    // routes
    if sol.plan.routes.len() != g.num_primary {
        push(
            CheckFamily::RouteDegree,
            format!("{} routes for {} primary vehicles", sol.plan.routes.len(), g.num_primary),
        );
    }
    let mut visits = vec![0usize; count];
    for (k, route) in sol.plan.routes.iter().enumerate() {
        for &j in route {
            if j.0 >= count || g.owner[j.0] != Some(k) {
                push(CheckFamily::RouteDegree, format!("route {k} visits node {j} outside C_{k}"));
                continue;
            }
            visits[j.0] += 1;
            if visits[j.0] > 1 {
                push(CheckFamily::RouteDegree, format!("node {j} visited twice"));
            }
        }
    }
    let visited = |j: NodeId| visits.get(j.0).copied().unwrap_or(0) > 0;

    // visit count per original customer
    for c in 1..=g.num_customers {
        let n = (0..g.num_primary).filter(|&k| visited(g.copy_of(k, c))).count();
        let ok = if sol.policy.split_allowed { n >= 1 } else { n == 1 };
        if !ok {
            push(CheckFamily::VisitCount, format!("customer {c} visited by {n} copies"));
        }
    }

    // modes and durations
    for j in g.customer_nodes() {
        let mode = sol.services.mode.get(&j).copied();
        match (visited(j), mode) {
            (true, None) => push(CheckFamily::SingleMode, format!("visited node {j} has no mode")),
            (false, Some(_)) => push(CheckFamily::SingleMode, format!("unvisited node {j} has a mode")),
            _ => {}
        }
        let s = sol.services.duration(j);
        if !visited(j) && s != 0.0 {
            push(CheckFamily::ServiceBound, format!("unvisited node {j} has duration {s}"));
        }
        if let Some(m) = mode {
            let spec = inst.customer(g.original_of[j.0]);
            match spec.mode_service_time(m) {
                Ok(ub) => {
                    if !(s >= -TOLERANCE && s <= ub + TOLERANCE) {
                        push(CheckFamily::ServiceBound, format!("node {j}: duration {s} outside [0, {ub}]"));
                    }
                }
                Err(_) => push(CheckFamily::ModeInflow, format!("node {j}: mode {m} outside 1..={}", spec.max_modes)),
            }
            if visited(j) && s.abs() <= TOLERANCE {
                warnings.push(format!("node {j} is visited with zero duration"));
            }
        }
    }
    for &j in sol.services.duration.keys() {
        if !g.is_customer(j) {
            push(CheckFamily::SingleMode, format!("duration given for non-customer node {j}"));
        }
    }
    for c in 1..=g.num_customers {
        let spec = inst.customer(c);
        let served: f64 = (0..g.num_primary)
            .map(|k| g.copy_of(k, c))
            .filter_map(|j| {
                let m = *sol.services.mode.get(&j)?;
                Some(sol.services.duration(j) * spec.productivity(m).ok()?)
            })
            .sum();
        if (served - spec.demand).abs() > TOLERANCE {
            push(CheckFamily::Demand, format!("customer {c}: served {served} of {}", spec.demand));
        }
    }

    // support flow
    for (&(i, j), &w) in &sol.flow.counts {
        match g.arc(i, j) {
            None => push(CheckFamily::Capacity, format!("flow on non-arc ({i}, {j})")),
            Some(a) if w > a.gamma => {
                push(CheckFamily::Capacity, format!("arc ({i}, {j}) carries {w} > {}", a.gamma))
            }
            _ => {}
        }
    }
    for j in g.customer_nodes() {
        let inflow = sol.flow.inflow(j);
        let outflow = sol.flow.outflow(j);
        if inflow != outflow {
            push(CheckFamily::FlowConservation, format!("node {j}: inflow {inflow} != outflow {outflow}"));
        }
        let mode = sol.services.mode.get(&j).copied().unwrap_or(0);
        if inflow != mode {
            push(CheckFamily::ModeInflow, format!("node {j}: mode {mode} but support inflow {inflow}"));
        }
        if visited(j) && (mode == 0 || mode > g.max_modes[j.0]) {
            push(CheckFamily::ModeInflow, format!("node {j}: mode {mode} outside 1..={}", g.max_modes[j.0]));
        }
    }
    let support = u32::try_from(g.num_support).unwrap_or(u32::MAX);
    let out0 = sol.flow.outflow(NodeId::START);
    let in_end = sol.flow.inflow(end);
    if out0 != support || in_end != support {
        push(
            CheckFamily::DepotFlow,
            format!("depot outflow {out0}, end inflow {in_end}, expected {support}"),
        );
    }

    let discrete_ok = v
        .iter()
        .filter(|(f, _)| **f != CheckFamily::Schedule)
        .all(|(_, msgs)| msgs.is_empty());
    let mut schedule = None;
    if discrete_ok {
        match compute_schedule(g, sol) {
            Ok(s) => schedule = Some(s),
            Err(e) => v
                .get_mut(&CheckFamily::Schedule)
                .expect("family")
                .push(e.to_string()),
        }
    } else {
        v.get_mut(&CheckFamily::Schedule)
            .expect("family")
            .push("not evaluated: discrete constraints violated".into());
    }

    FeasibilityReport {
        entries: v
            .into_iter()
            .map(|(family, violations)| CheckEntry { family, violations })
            .collect(),
        warnings,
        schedule,
    }
}

/// Splits an acyclic integral `0 → n` flow into one simple path per support
/// vehicle.
pub fn decompose_flow(g: &ExpandedGraph, flow: &SupportFlow) -> Result<SupportPaths> {
    let arcs: BTreeSet<_> = flow.active_arcs().collect();
    if let Err(cycle) = topological_order(g.node_count(), &arcs) {
        return Err(Error::Decomposition(format!("cyclic flow through {cycle:?}")));
    }
    let end = g.end();
    let mut remaining = flow.counts.clone();
    let mut paths = Vec::with_capacity(g.num_support);
    for o in 0..g.num_support {
        let mut path = vec![NodeId::START];
        let mut cur = NodeId::START;
        while cur != end {
            let next = remaining
                .range_mut((cur, NodeId(0))..=(cur, NodeId(usize::MAX)))
                .find(|(_, w)| **w > 0);
            let Some((&(_, j), w)) = next else {
                return Err(Error::Decomposition(format!(
                    "support vehicle {o} stranded at node {cur}"
                )));
            };
            *w -= 1;
            path.push(j);
            cur = j;
        }
        paths.push(path);
    }
    if let Some(((i, j), _)) = remaining.iter().find(|(_, w)| **w > 0) {
        return Err(Error::Decomposition(format!(
            "flow left on arc ({i}, {j}) after {} paths",
            g.num_support
        )));
    }
    Ok(SupportPaths { paths })
}

/// Per-arc path counts.
pub fn compose_flow(g: &ExpandedGraph, paths: &SupportPaths) -> Result<SupportFlow> {
    let mut flow = SupportFlow::new();
    for path in &paths.paths {
        for w in path.windows(2) {
            if !g.has_arc(w[0], w[1]) {
                return Err(Error::UnknownArc(w[0], w[1]));
            }
            flow.add(w[0], w[1], 1);
        }
    }
    Ok(flow)
}

/// Chooses service durations for a fixed structure (routes, flow, modes) by
/// linear programming: minimize `t_n` subject to the precedence inequalities
/// of the active arcs, exact demand coverage per customer and
/// `0 ≤ s_j ≤ d / p^{m_j}`.
pub fn optimize_split_times(
    inst: &Instance,
    g: &ExpandedGraph,
    plan: &PrimaryPlan,
    flow: &SupportFlow,
    mode: &BTreeMap<NodeId, u32>,
) -> Result<(ServicePlan, Schedule)> {
    let arcs = active_arc_set(g, plan, flow);
    for &(i, j) in &arcs {
        if !g.has_arc(i, j) {
            return Err(Error::UnknownArc(i, j));
        }
    }
    topological_order(g.node_count(), &arcs).map_err(Error::Cycle)?;

    let visited: Vec<NodeId> = plan.visited().collect();
    let count = g.node_count();
    let mut slot = vec![usize::MAX; count];
    for (idx, &j) in visited.iter().enumerate() {
        slot[j.0] = idx;
    }
    let nj = visited.len();
    // variables: s_j (0..nj), t_j (nj..2nj), t_n (2nj)
    let nvars = 2 * nj + 1;
    let s_var = |j: NodeId| slot[j.0];
    let t_var = |j: NodeId| if j == g.end() { 2 * nj } else { nj + slot[j.0] };

    let mut rows = Vec::new();
    for &(i, j) in &arcs {
        let mut coeffs = vec![0.0; nvars];
        coeffs[t_var(j)] += 1.0;
        if i != NodeId::START {
            coeffs[t_var(i)] -= 1.0;
            for &h in &g.related[i.0] {
                if slot[h.0] != usize::MAX {
                    coeffs[s_var(h)] -= 1.0;
                }
            }
        }
        rows.push(LpRow::new(coeffs, Relation::Ge, g.tau(i, j)));
    }
    let mut bounds = vec![(0.0, f64::INFINITY); nvars];
    for c in 1..=g.num_customers {
        let spec = inst.customer(c);
        let mut coeffs = vec![0.0; nvars];
        let mut any = false;
        for &j in &g.identical[g.copy_of(0, c).0] {
            if slot[j.0] == usize::MAX {
                continue;
            }
            let m = *mode
                .get(&j)
                .ok_or_else(|| Error::Infeasible(format!("visited node {j} has no mode")))?;
            coeffs[s_var(j)] = spec.productivity(m)?;
            bounds[s_var(j)] = (0.0, spec.mode_service_time(m)?);
            any = true;
        }
        if !any {
            return Err(Error::Infeasible(format!("customer {c} is not visited")));
        }
        rows.push(LpRow::new(coeffs, Relation::Eq, spec.demand));
    }
    let mut objective = vec![0.0; nvars];
    objective[2 * nj] = 1.0;
    let lp = LpProblem::new(objective, rows, bounds)?;
    let out = solve_lp(&lp);
    match out.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::Infeasible("demand cannot be met with the fixed modes".into()))
        }
        LpStatus::Unbounded => unreachable!("t_n is bounded below by zero"),
    }
    let services = ServicePlan {
        mode: visited
            .iter()
            .filter_map(|j| mode.get(j).map(|&m| (*j, m)))
            .collect(),
        duration: visited
            .iter()
            .map(|&j| (j, out.values[s_var(j)].max(0.0)))
            .collect(),
    };
    let schedule = schedule_from_parts(g, plan, flow, &services)?;
    Ok((services, schedule))
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    start: BTreeMap<usize, f64>,
    makespan: f64,
}

#[derive(Serialize, Deserialize)]
struct SolutionDoc {
    policy: VariantPolicy,
    routes: Vec<Vec<usize>>,
    flow: Vec<[u64; 3]>,
    modes: BTreeMap<usize, u32>,
    durations: BTreeMap<usize, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule: Option<ScheduleDoc>,
}

pub fn write_solution(sol: &Solution, schedule: Option<&Schedule>) -> Vec<u8> {
    let doc = SolutionDoc {
        policy: sol.policy,
        routes: sol
            .plan
            .routes
            .iter()
            .map(|r| r.iter().map(|j| j.0).collect())
            .collect(),
        flow: sol
            .flow
            .counts
            .iter()
            .map(|(&(i, j), &w)| [i.0 as u64, j.0 as u64, u64::from(w)])
            .collect(),
        modes: sol.services.mode.iter().map(|(j, m)| (j.0, *m)).collect(),
        durations: sol.services.duration.iter().map(|(j, s)| (j.0, *s)).collect(),
        schedule: schedule.map(|s| ScheduleDoc {
            start: s.start.iter().map(|(j, t)| (j.0, *t)).collect(),
            makespan: s.makespan,
        }),
    };
    serde_json::to_vec_pretty(&doc).expect("solution serialization is infallible")
}

pub fn read_solution(text: &[u8]) -> Result<(Solution, Option<Schedule>)> {
    let doc: SolutionDoc = serde_json::from_slice(text)?;
    let mut flow = SupportFlow::new();
    for [i, j, w] in doc.flow {
        let w = u32::try_from(w).map_err(|_| Error::validation("flow", "count too large"))?;
        flow.add(NodeId(i as usize), NodeId(j as usize), w);
    }
    let sol = Solution {
        plan: PrimaryPlan::new(
            doc.routes
                .into_iter()
                .map(|r| r.into_iter().map(NodeId).collect())
                .collect(),
        ),
        flow,
        services: ServicePlan {
            mode: doc.modes.into_iter().map(|(j, m)| (NodeId(j), m)).collect(),
            duration: doc.durations.into_iter().map(|(j, s)| (NodeId(j), s)).collect(),
        },
        policy: doc.policy,
    };
    let schedule = doc.schedule.map(|s| Schedule {
        start: s.start.into_iter().map(|(j, t)| (NodeId(j), t)).collect(),
        makespan: s.makespan,
    });
    Ok((sol, schedule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::build_graph;
    use crate::instance::{CustomerSpec, FleetConfig, Point};

    fn line_instance(demands: &[(f64, u32, f64)], primary: usize, support: usize) -> Instance {
        let customers = demands
            .iter()
            .enumerate()
            .map(|(i, &(d, b, x))| CustomerSpec::new(i + 1, Point::new(x, 0.0), d, b))
            .collect();
        Instance::new(
            "line",
            Point::new(0.0, 0.0),
            customers,
            FleetConfig {
                primary_count: primary,
                support_count: support,
            },
        )
        .unwrap()
    }

    fn solution(
        inst: &Instance,
        g: &ExpandedGraph,
        routes: Vec<Vec<usize>>,
        flow: &[(usize, usize, u32)],
        modes: &[(usize, u32)],
    ) -> Solution {
        let mut f = SupportFlow::new();
        for &(i, j, w) in flow {
            f.add(NodeId(i), NodeId(j), w);
        }
        let mode = modes.iter().map(|&(j, m)| (NodeId(j), m)).collect();
        Solution {
            plan: PrimaryPlan::new(routes.into_iter().map(|r| r.into_iter().map(NodeId).collect()).collect()),
            flow: f,
            services: ServicePlan::full_service(inst, g, mode).unwrap(),
            policy: g.policy,
        }
    }

    #[test]
    fn single_chain_schedule() {
        // depot at 0, customer at distance 5, demand 10 in mode 1 (b = 1)
        let inst = line_instance(&[(10.0, 1, 5.0)], 1, 1);
        let g = build_graph(&inst, VariantPolicy::integer(false, false), 100.0);
        let sol = solution(&inst, &g, vec![vec![1]], &[(0, 1, 1), (1, 2, 1)], &[(1, 1)]);
        let s = compute_schedule(&g, &sol).unwrap();
        assert_eq!(s.start_of(NodeId(1)), 5.0);
        assert_eq!(s.makespan, 15.0);
        assert!(check_feasibility(&inst, &g, &sol).is_feasible());
    }

    #[test]
    fn empty_plan_has_zero_makespan() {
        let inst = line_instance(&[], 2, 3);
        let g = build_graph(&inst, VariantPolicy::integer(true, true), 0.0);
        let sol = solution(&inst, &g, vec![vec![], vec![]], &[(0, 1, 3)], &[]);
        assert_eq!(g.end(), NodeId(1));
        assert_eq!(compute_schedule(&g, &sol).unwrap().makespan, 0.0);
        assert!(check_feasibility(&inst, &g, &sol).is_feasible());
    }

    /// Longest 0 → target path over all simple paths of the active DAG.
    fn all_paths_longest(
        g: &ExpandedGraph,
        arcs: &BTreeSet<(NodeId, NodeId)>,
        services: &ServicePlan,
        target: NodeId,
    ) -> f64 {
        fn walk(
            g: &ExpandedGraph,
            arcs: &BTreeSet<(NodeId, NodeId)>,
            services: &ServicePlan,
            at: NodeId,
            target: NodeId,
            acc: f64,
            best: &mut f64,
        ) {
            if at == target {
                *best = best.max(acc);
                return;
            }
            for &(i, j) in arcs.iter().filter(|(i, _)| *i == at) {
                let step = related_service(g, services, i) + g.tau(i, j);
                walk(g, arcs, services, j, target, acc + step, best);
            }
        }
        let mut best = 0.0;
        walk(g, arcs, services, NodeId::START, target, 0.0, &mut best);
        best
    }

    #[test]
    fn schedule_matches_all_paths_enumeration() {
        // three customers, two primary vehicles, one support vehicle switching
        let inst = line_instance(&[(10.0, 2, 10.0), (12.0, 2, 20.0), (8.0, 2, 30.0)], 2, 3);
        let g = build_graph(&inst, VariantPolicy::integer(true, false), 1e3);
        // vehicle 0: 1 -> 2 ; vehicle 1: copy of 3 (node 6)
        let sol = solution(
            &inst,
            &g,
            vec![vec![1, 2], vec![6]],
            &[(0, 1, 2), (1, 2, 1), (1, 6, 1), (0, 6, 1), (2, 7, 2), (6, 2, 1), (6, 7, 1)],
            &[(1, 2), (2, 2), (6, 2)],
        );
        let report = check_feasibility(&inst, &g, &sol);
        assert!(report.is_feasible(), "{:?}", report.failed());
        let s = report.schedule.unwrap();
        let arcs = active_arc_set(&g, &sol.plan, &sol.flow);
        for j in [NodeId(1), NodeId(2), NodeId(6), g.end()] {
            let oracle = all_paths_longest(&g, &arcs, &sol.services, j);
            assert!((s.start_of(j) - oracle).abs() < 1e-9, "node {j}");
        }
    }

    #[test]
    fn worked_example_solution_is_feasible() {
        let inst = fixtures::worked_example_instance();
        let g = build_graph(&inst, VariantPolicy::integer(true, false), 1e4);
        let sol = fixtures::worked_example_solution(&inst, &g);
        let report = check_feasibility(&inst, &g, &sol);
        assert!(report.is_feasible(), "{:?}", report.entries);
        // the switching support vehicle makes the no-switch policy fail capacity
        let ns = build_graph(&inst, VariantPolicy::integer(false, false), 1e4);
        let mut sol_ns = sol.clone();
        sol_ns.policy = ns.policy;
        let report = check_feasibility(&inst, &ns, &sol_ns);
        assert_eq!(report.failed(), vec!["capacity", "schedule"]);
        assert!(report.schedule.is_none());
    }

    #[test]
    fn visit_count_and_mode_inflow_failures() {
        let inst = line_instance(&[(10.0, 2, 10.0)], 2, 2);
        let g = build_graph(&inst, VariantPolicy::integer(true, false), 1e3);
        // both copies 1 and 2 visited under no-split
        let twice = solution(
            &inst,
            &g,
            vec![vec![1], vec![2]],
            &[(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)],
            &[(1, 1), (2, 1)],
        );
        let report = check_feasibility(&inst, &g, &twice);
        assert!(report.failed().contains(&"visit-count"));

        let mut wrong_mode = solution(
            &inst,
            &g,
            vec![vec![1], vec![]],
            &[(0, 1, 1), (1, 3, 1), (0, 3, 1)],
            &[(1, 1)],
        );
        wrong_mode.services = ServicePlan::full_service(&inst, &g, [(NodeId(1), 2)].into()).unwrap();
        let report = check_feasibility(&inst, &g, &wrong_mode);
        assert!(report.failed().contains(&"mode-inflow"));
    }

    #[test]
    fn cycle_is_reported_with_nodes() {
        let inst = line_instance(&[(10.0, 2, 10.0), (10.0, 2, 20.0)], 2, 2);
        let g = build_graph(&inst, VariantPolicy::integer(true, false), 1e3);
        // vehicle 0 serves 1, vehicle 1 serves copy of 2 (node 4); support
        // vehicles cross both ways, creating 1 -> 4 -> 1
        let sol = solution(
            &inst,
            &g,
            vec![vec![1], vec![4]],
            &[(0, 1, 1), (0, 4, 1), (1, 4, 1), (4, 1, 1), (1, 5, 1), (4, 5, 1)],
            &[(1, 2), (4, 2)],
        );
        match compute_schedule(&g, &sol) {
            Err(Error::Cycle(nodes)) => {
                let set: BTreeSet<_> = nodes.into_iter().collect();
                assert_eq!(set, [NodeId(1), NodeId(4)].into());
            }
            other => panic!("expected cycle, got {other:?}"),
        }
        assert!(check_feasibility(&inst, &g, &sol).failed().contains(&"schedule"));
    }

    #[test]
    fn decompose_and_compose_cases() {
        let inst = line_instance(&[(10.0, 3, 10.0)], 1, 3);
        let g = build_graph(&inst, VariantPolicy::integer(true, false), 1e3);
        let mut idle = SupportFlow::new();
        idle.add(NodeId(0), NodeId(2), 3);
        let paths = decompose_flow(&g, &idle).unwrap();
        assert_eq!(paths.paths, vec![vec![NodeId(0), NodeId(2)]; 3]);
        assert_eq!(compose_flow(&g, &paths).unwrap(), idle);

        let mut f = SupportFlow::new();
        f.add(NodeId(0), NodeId(1), 2);
        f.add(NodeId(1), NodeId(2), 2);
        f.add(NodeId(0), NodeId(2), 1);
        let paths = decompose_flow(&g, &f).unwrap();
        assert_eq!(
            paths.paths.iter().filter(|p| **p == [NodeId(0), NodeId(1), NodeId(2)]).count(),
            2
        );
        assert_eq!(compose_flow(&g, &paths).unwrap(), f);

        let bogus = SupportPaths {
            paths: vec![vec![NodeId(0), NodeId(2), NodeId(1)]],
        };
        assert!(matches!(compose_flow(&g, &bogus), Err(Error::UnknownArc(..))));
    }

    #[test]
    fn cyclic_flow_fails_decomposition() {
        let inst = line_instance(&[(10.0, 2, 10.0), (10.0, 2, 20.0)], 1, 1);
        let g = build_graph(&inst, VariantPolicy::integer(true, false), 1e3);
        let mut f = SupportFlow::new();
        f.add(NodeId(0), NodeId(3), 1);
        f.add(NodeId(1), NodeId(2), 1);
        f.add(NodeId(2), NodeId(1), 1);
        assert!(matches!(decompose_flow(&g, &f), Err(Error::Decomposition(_))));
    }

    #[test]
    fn split_halves_symmetric_work() {
        // one customer at distance 10 served in parallel by both vehicles
        let inst = line_instance(&[(40.0, 2, 10.0)], 2, 2);
        let g = build_graph(&inst, VariantPolicy::integer(true, true), 1e3);
        let mut f = SupportFlow::new();
        f.add(NodeId(0), NodeId(1), 1);
        f.add(NodeId(0), NodeId(2), 1);
        f.add(NodeId(1), NodeId(3), 1);
        f.add(NodeId(2), NodeId(3), 1);
        let plan = PrimaryPlan::new(vec![vec![NodeId(1)], vec![NodeId(2)]]);
        let modes = [(NodeId(1), 1), (NodeId(2), 1)].into();
        let (services, schedule) = optimize_split_times(&inst, &g, &plan, &f, &modes).unwrap();
        // mode 1 of b = 2 has rate 1/2: each copy needs 40 time units
        assert!((services.duration(NodeId(1)) - 40.0).abs() < 1e-6);
        assert!((services.duration(NodeId(2)) - 40.0).abs() < 1e-6);
        assert!((schedule.makespan - 50.0).abs() < 1e-6);
    }

    #[test]
    fn single_copy_duration_is_forced() {
        let inst = line_instance(&[(30.0, 2, 5.0)], 1, 2);
        let g = build_graph(&inst, VariantPolicy::integer(true, true), 1e3);
        let mut f = SupportFlow::new();
        f.add(NodeId(0), NodeId(1), 2);
        f.add(NodeId(1), NodeId(2), 2);
        let plan = PrimaryPlan::new(vec![vec![NodeId(1)]]);
        let (services, schedule) =
            optimize_split_times(&inst, &g, &plan, &f, &[(NodeId(1), 2)].into()).unwrap();
        assert!((services.duration(NodeId(1)) - 30.0).abs() < 1e-9);
        assert!((schedule.makespan - 35.0).abs() < 1e-6);
    }

    #[test]
    fn split_beats_best_unsplit_allocation() {
        // Customer 3 is shared by vehicles 0 and 1 after their own customers;
        // vehicle 0's own work is shorter, so an uneven split is optimal.
        let inst = line_instance(&[(20.0, 2, 10.0), (40.0, 2, -10.0), (30.0, 2, 0.5)], 2, 4);
        let g = build_graph(&inst, VariantPolicy::integer(true, true), 1e3);
        // vehicle 0: 1 -> 3 ; vehicle 1: copy of 2 (5) -> copy of 3 (6)
        let plan = PrimaryPlan::new(vec![vec![NodeId(1), NodeId(3)], vec![NodeId(5), NodeId(6)]]);
        let mut f = SupportFlow::new();
        for (i, j, w) in [(0, 1, 2), (1, 3, 2), (3, 7, 2), (0, 5, 2), (5, 6, 2), (6, 7, 2)] {
            f.add(NodeId(i), NodeId(j), w);
        }
        let modes: BTreeMap<NodeId, u32> =
            [(NodeId(1), 2), (NodeId(3), 2), (NodeId(5), 2), (NodeId(6), 2)].into();
        let (_, lp_schedule) = optimize_split_times(&inst, &g, &plan, &f, &modes).unwrap();

        // oracle: share f of customer 3 on vehicle 0, the rest on vehicle 1
        let eval = |share: f64| {
            let mut services = ServicePlan::full_service(&inst, &g, modes.clone()).unwrap();
            services.duration.insert(NodeId(3), 30.0 * share);
            services.duration.insert(NodeId(6), 30.0 * (1.0 - share));
            schedule_from_parts(&g, &plan, &f, &services).unwrap().makespan
        };
        let grid_best = (0..=1000).map(|i| eval(f64::from(i) / 1000.0)).fold(f64::INFINITY, f64::min);
        let unsplit = eval(0.0).min(eval(1.0));
        assert!(lp_schedule.makespan < unsplit - 1.0);
        assert!(lp_schedule.makespan <= grid_best + 1e-9);
        // the grid is 1e-3 fine in the share; makespan slope is at most 30
        assert!(grid_best - lp_schedule.makespan <= 30.0 * 1e-3 + 1e-9);
    }

    #[test]
    fn solution_json_round_trip() {
        let inst = fixtures::worked_example_instance();
        let g = build_graph(&inst, VariantPolicy::integer(true, false), 1e4);
        let sol = fixtures::worked_example_solution(&inst, &g);
        let sched = compute_schedule(&g, &sol).unwrap();
        let (back, s2) = read_solution(&write_solution(&sol, Some(&sched))).unwrap();
        assert_eq!(back, sol);
        assert_eq!(s2.unwrap(), sched);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn schedule_is_monotone_in_durations(extra in 0.0f64..50.0, which in 0usize..5) {
                let inst = fixtures::worked_example_instance();
                let g = build_graph(&inst, VariantPolicy::integer(true, false), 1e4);
                let sol = fixtures::worked_example_solution(&inst, &g);
                let base = compute_schedule(&g, &sol).unwrap();
                let mut bigger = sol.clone();
                let j = *bigger.services.duration.keys().nth(which).unwrap();
                *bigger.services.duration.get_mut(&j).unwrap() += extra;
                let after = compute_schedule(&g, &bigger).unwrap();
                prop_assert!(after.makespan >= base.makespan);
                for (node, t) in &base.start {
                    prop_assert!(after.start_of(*node) >= *t);
                }
            }
        }
    }
}
