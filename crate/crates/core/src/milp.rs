//! Both MILP formulations (binary per-vehicle support flow and aggregated
//! integer support flow), optional valid inequalities, LP-file export and
//! parsing, assignment evaluation, and encoding of native solutions.
//!
//! Rows are named `family[indices]`. Time rows take the big-M form
//! `t_j − t_i − Σ_{h∈Ñ_i} Σ_m s_h^m − (τ_ij + T)·u ≥ −T` where `u` is the
//! arc-use variable of the row.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exact::construction_heuristic;
use crate::graph::{ExpandedGraph, FlowMode, NodeId, VariantPolicy};
use crate::instance::Instance;
use crate::lp::{solve_lp, LpOutcome, LpProblem, LpRow, LpStatus, Relation, INFINITY};
use crate::schedule::{decompose_flow, Schedule, Solution};

/// Violations at or below this magnitude are ignored.
pub const EVAL_TOLERANCE: f64 = 1e-6;
const MAX_LINE: usize = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    X(NodeId, NodeId),
    Q(NodeId),
    Y(NodeId, u32),
    T(NodeId),
    S(NodeId, u32),
    Z(NodeId, NodeId, usize),
    V(NodeId, NodeId),
    W(NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarRef {
    pub kind: VarKind,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// `family[indices]`, e.g. `time_primary[0,1,n]`.
    pub name: String,
    /// Variable index and coefficient; one entry per variable.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn family(&self) -> &str {
        self.name.split('[').next().unwrap_or(&self.name)
    }

    /// Amount by which `values` violates the row; `0` when satisfied.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs: f64 = self.terms.iter().map(|&(i, a)| a * values[i]).sum();
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub vars: Vec<VarRef>,
    /// LP-file name per variable, e.g. `x_3_n`.
    pub names: Vec<String>,
    pub constraints: Vec<Constraint>,
    /// Index of the objective variable `t_n`.
    pub objective: usize,
    pub policy: VariantPolicy,
    pub big_m: f64,
    pub with_cuts: bool,
    pub graph: ExpandedGraph,
    index: HashMap<VarKind, usize>,
}

impl MilpModel {
    pub fn var_index(&self, kind: VarKind) -> Option<usize> {
        self.index.get(&kind).copied()
    }

    pub fn count_family(&self, family: &str) -> usize {
        self.constraints.iter().filter(|c| c.family() == family).count()
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }
}

pub type Assignment = BTreeMap<VarKind, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Row name, or `bound[var]` / `integrality[var]` for domain violations.
    pub row: String,
    pub amount: f64,
}

struct Builder<'g> {
    g: &'g ExpandedGraph,
    vars: Vec<VarRef>,
    names: Vec<String>,
    index: HashMap<VarKind, usize>,
    rows: Vec<Constraint>,
}

impl<'g> Builder<'g> {
    fn label(&self, j: NodeId) -> String {
        self.g.node_label(j)
    }

    fn var(&mut self, kind: VarKind, domain: Domain) {
        let l = |j: NodeId| self.g.node_label(j);
        let name = match kind {
            VarKind::X(i, j) => format!("x_{}_{}", l(i), l(j)),
            VarKind::Q(j) => format!("q_{}", l(j)),
            VarKind::Y(j, m) => format!("y_{}_{m}", l(j)),
            VarKind::T(j) => format!("t_{}", l(j)),
            VarKind::S(j, m) => format!("s_{}_{m}", l(j)),
            VarKind::Z(i, j, o) => format!("z_{}_{}_{o}", l(i), l(j)),
            VarKind::V(i, j) => format!("v_{}_{}", l(i), l(j)),
            VarKind::W(i, j) => format!("w_{}_{}", l(i), l(j)),
        };
        self.index.insert(kind, self.vars.len());
        self.vars.push(VarRef { kind, domain });
        self.names.push(name);
    }

    fn row(&mut self, name: String, terms: impl IntoIterator<Item = (VarKind, f64)>, relation: Relation, rhs: f64) {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (kind, a) in terms {
            let idx = *self
                .index
                .get(&kind)
                .unwrap_or_else(|| panic!("row {name} uses undeclared {kind:?}"));
            *merged.entry(idx).or_insert(0.0) += a;
        }
        let terms = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.rows.push(Constraint {
            name,
            terms,
            relation,
            rhs,
        });
    }

    /// `Σ_{h∈Ñ_i} Σ_m s_h^m` with coefficient `coef`.
    fn related_service(&self, i: NodeId, coef: f64) -> Vec<(VarKind, f64)> {
        self.g.related[i.0]
            .iter()
            .flat_map(|&h| (1..=self.g.max_modes[h.0]).map(move |m| (VarKind::S(h, m), coef)))
            .collect()
    }

    /// Big-M time row for arc `(i, j)` activated by `u`.
    fn time_row(&mut self, name: String, i: NodeId, j: NodeId, u: VarKind) {
        let big_m = self.g.big_m;
        let mut terms = vec![(VarKind::T(j), 1.0), (VarKind::T(i), -1.0)];
        terms.extend(self.related_service(i, -1.0));
        terms.push((u, -(self.g.tau(i, j) + big_m)));
        self.row(name, terms, Relation::Ge, -big_m);
    }
}

/// Arcs with both ends in `N_k` for some `k`: the only arcs a primary vehicle
/// can use.
fn primary_arcs(g: &ExpandedGraph) -> Vec<(NodeId, NodeId)> {
    g.arcs()
        .filter(|&(i, j, _)| (0..g.num_primary).any(|k| g.in_vehicle_nodes(k, i) && g.in_vehicle_nodes(k, j)))
        .map(|(i, j, _)| (i, j))
        .collect()
}

/// Builds the model for `g.policy` (flow mode included) with `T = g.big_m`.
pub fn build_model(inst: &Instance, g: &ExpandedGraph, with_cuts: bool) -> MilpModel {
    let mut b = Builder {
        g,
        vars: Vec::new(),
        names: Vec::new(),
        index: HashMap::new(),
        rows: Vec::new(),
    };
    let end = g.end();
    let customers: Vec<NodeId> = g.customer_nodes().collect();
    let arcs: Vec<(NodeId, NodeId)> = g.arcs().map(|(i, j, _)| (i, j)).collect();
    let modes = |j: NodeId| 1..=g.max_modes[j.0];
    let binary = g.policy.flow == FlowMode::Binary;
    let support = g.num_support;

    // variables, in kind order
    for (i, j) in primary_arcs(g) {
        b.var(VarKind::X(i, j), Domain::Binary);
    }
    for &j in &customers {
        b.var(VarKind::Q(j), Domain::Binary);
    }
    for &j in &customers {
        for m in modes(j) {
            b.var(VarKind::Y(j, m), Domain::Binary);
        }
    }
    for j in 0..g.node_count() {
        b.var(VarKind::T(NodeId(j)), Domain::Continuous);
    }
    for &j in &customers {
        for m in modes(j) {
            b.var(VarKind::S(j, m), Domain::Continuous);
        }
    }
    if binary {
        for &(i, j) in &arcs {
            for o in 0..support {
                b.var(VarKind::Z(i, j, o), Domain::Binary);
            }
        }
    } else {
        for &(i, j) in &arcs {
            b.var(VarKind::V(i, j), Domain::Binary);
        }
        for &(i, j) in &arcs {
            b.var(VarKind::W(i, j), Domain::Integer);
        }
    }

    // universal rows
    for k in 0..g.num_primary {
        let ck = g.copies[k].clone();
        b.row(
            format!("depot_out[{k}]"),
            ck.iter().map(|&j| (VarKind::X(NodeId::START, j), 1.0)),
            Relation::Le,
            1.0,
        );
        for &j in &ck {
            let lj = b.label(j);
            let preds = std::iter::once(NodeId::START).chain(ck.iter().copied().filter(|&i| i != j));
            let inflow: Vec<_> = preds.map(|i| (VarKind::X(i, j), 1.0)).chain([(VarKind::Q(j), -1.0)]).collect();
            b.row(format!("inflow[{k},{lj}]"), inflow, Relation::Eq, 0.0);
            let succs = ck.iter().copied().filter(|&i| i != j).chain(std::iter::once(end));
            let outflow: Vec<_> = succs.map(|i| (VarKind::X(j, i), 1.0)).chain([(VarKind::Q(j), -1.0)]).collect();
            b.row(format!("outflow[{k},{lj}]"), outflow, Relation::Eq, 0.0);
        }
        let tails: Vec<NodeId> = std::iter::once(NodeId::START).chain(ck.iter().copied()).collect();
        let heads: Vec<NodeId> = ck.iter().copied().chain(std::iter::once(end)).collect();
        for &i in &tails {
            for &j in heads.iter().filter(|&&j| j != i) {
                let name = format!("time_primary[{k},{},{}]", b.label(i), b.label(j));
                b.time_row(name, i, j, VarKind::X(i, j));
            }
        }
    }
    for c in 1..=g.num_customers {
        let spec = inst.customer(c);
        let copies = g.identical[g.copy_of(0, c).0].clone();
        let mut terms = Vec::new();
        for &i in &copies {
            for m in modes(i) {
                terms.push((VarKind::S(i, m), spec.productivity(m).expect("mode in range")));
            }
        }
        b.row(format!("demand[{c}]"), terms, Relation::Eq, spec.demand);
        let (family, rel) = if g.policy.split_allowed {
            ("visit_min", Relation::Ge)
        } else {
            ("visit_once", Relation::Eq)
        };
        b.row(
            format!("{family}[{c}]"),
            copies.iter().map(|&i| (VarKind::Q(i), 1.0)),
            rel,
            1.0,
        );
    }
    for &j in &customers {
        let lj = b.label(j);
        let terms: Vec<_> = modes(j).map(|m| (VarKind::Y(j, m), 1.0)).chain([(VarKind::Q(j), -1.0)]).collect();
        b.row(format!("single_mode[{lj}]"), terms, Relation::Eq, 0.0);
        let spec = inst.customer(g.original_of[j.0]);
        for m in modes(j) {
            let ub = spec.mode_service_time(m).expect("mode in range");
            b.row(
                format!("service_ub[{lj},{m}]"),
                [(VarKind::S(j, m), 1.0), (VarKind::Y(j, m), -ub)],
                Relation::Le,
                0.0,
            );
        }
    }

    // support-flow rows
    let inflow_terms = |j: NodeId, f: &dyn Fn(NodeId) -> Vec<VarKind>| -> Vec<(VarKind, f64)> {
        arcs.iter()
            .filter(|&&(_, h)| h == j)
            .flat_map(|&(i, _)| f(i).into_iter().map(|k| (k, 1.0)))
            .collect()
    };
    if binary {
        for &j in &customers {
            let lj = b.label(j);
            let mut terms: Vec<_> = modes(j).map(|m| (VarKind::Y(j, m), f64::from(m))).collect();
            for (k, a) in inflow_terms(j, &|i| (0..support).map(|o| VarKind::Z(i, j, o)).collect()) {
                terms.push((k, -a));
            }
            b.row(format!("mode_support[{lj}]"), terms, Relation::Eq, 0.0);
        }
        for o in 0..support {
            let terms: Vec<_> = arcs
                .iter()
                .filter(|&&(i, _)| i == NodeId::START)
                .map(|&(i, j)| (VarKind::Z(i, j, o), 1.0))
                .collect();
            b.row(format!("support_depot[{o}]"), terms, Relation::Eq, 1.0);
        }
        for &j in &customers {
            let lj = b.label(j);
            for o in 0..support {
                let mut terms: Vec<_> = arcs
                    .iter()
                    .filter(|&&(_, h)| h == j)
                    .map(|&(i, _)| (VarKind::Z(i, j, o), 1.0))
                    .collect();
                terms.extend(arcs.iter().filter(|&&(t, _)| t == j).map(|&(_, h)| (VarKind::Z(j, h, o), -1.0)));
                b.row(format!("support_flow[{lj},{o}]"), terms, Relation::Eq, 0.0);
            }
        }
        for &(i, j) in &arcs {
            for o in 0..support {
                let name = format!("time_support[{o},{},{}]", b.label(i), b.label(j));
                b.time_row(name, i, j, VarKind::Z(i, j, o));
            }
        }
        if !g.policy.switch_allowed {
            for &(i, j) in arcs.iter().filter(|&&(i, j)| g.is_cross_fleet(i, j)) {
                for o in 0..support {
                    let name = format!("no_switch[{o},{},{}]", b.label(i), b.label(j));
                    b.row(name, [(VarKind::Z(i, j, o), 1.0)], Relation::Eq, 0.0);
                }
            }
        }
    } else {
        for &j in &customers {
            let lj = b.label(j);
            let mut terms: Vec<_> = modes(j).map(|m| (VarKind::Y(j, m), f64::from(m))).collect();
            for (k, a) in inflow_terms(j, &|i| vec![VarKind::W(i, j)]) {
                terms.push((k, -a));
            }
            b.row(format!("mode_support[{lj}]"), terms, Relation::Eq, 0.0);
        }
        let terms: Vec<_> = arcs
            .iter()
            .filter(|&&(i, _)| i == NodeId::START)
            .map(|&(i, j)| (VarKind::W(i, j), 1.0))
            .collect();
        b.row("support_depot[]".into(), terms, Relation::Eq, support as f64);
        for &j in &customers {
            let lj = b.label(j);
            let mut terms: Vec<_> = arcs.iter().filter(|&&(_, h)| h == j).map(|&(i, _)| (VarKind::W(i, j), 1.0)).collect();
            terms.extend(arcs.iter().filter(|&&(t, _)| t == j).map(|&(_, h)| (VarKind::W(j, h), -1.0)));
            b.row(format!("support_flow[{lj}]"), terms, Relation::Eq, 0.0);
        }
        for &(i, j) in &arcs {
            let name = format!("arc_capacity[{},{}]", b.label(i), b.label(j));
            let gamma = f64::from(g.gamma(i, j));
            b.row(name, [(VarKind::W(i, j), 1.0), (VarKind::V(i, j), -gamma)], Relation::Le, 0.0);
        }
        for &(i, j) in &arcs {
            let name = format!("time_support[{},{}]", b.label(i), b.label(j));
            b.time_row(name, i, j, VarKind::V(i, j));
        }
    }

    if with_cuts {
        add_cuts(&mut b, &customers, &arcs);
    }

    let objective = b.index[&VarKind::T(end)];
    MilpModel {
        vars: b.vars,
        names: b.names,
        constraints: b.rows,
        objective,
        policy: g.policy,
        big_m: g.big_m,
        with_cuts,
        graph: g.clone(),
        index: b.index,
    }
}

fn add_cuts(b: &mut Builder<'_>, customers: &[NodeId], arcs: &[(NodeId, NodeId)]) {
    let g = b.g;
    let end = g.end();
    let modes = |j: NodeId| 1..=g.max_modes[j.0];
    let tau0 = |i: NodeId| if i == NodeId::START { 0.0 } else { g.tau(NodeId::START, i) };
    for k in 0..g.num_primary {
        let ck = g.copies[k].clone();
        let tails: Vec<NodeId> = std::iter::once(NodeId::START).chain(ck.iter().copied()).collect();
        let heads: Vec<NodeId> = ck.iter().copied().chain(std::iter::once(end)).collect();
        let pairs: Vec<(NodeId, NodeId)> = tails
            .iter()
            .flat_map(|&i| heads.iter().filter(move |&&j| j != i).map(move |&j| (i, j)))
            .collect();

        // makespan covers the whole route of k
        let mut terms = vec![(VarKind::T(end), 1.0)];
        terms.extend(pairs.iter().map(|&(i, j)| (VarKind::X(i, j), -g.tau(i, j))));
        terms.extend(ck.iter().flat_map(|&j| modes(j).map(move |m| (VarKind::S(j, m), -1.0))));
        b.row(format!("cut_route_load[{k}]"), terms, Relation::Ge, 0.0);

        // makespan covers the departure from i plus the next leg
        for &i in &tails {
            let mut terms = vec![(VarKind::T(end), 1.0), (VarKind::T(i), -1.0)];
            terms.extend(b.related_service(i, -1.0));
            terms.extend(
                heads
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (VarKind::X(i, j), -(g.tau(i, j) + if j == end { 0.0 } else { g.tau(j, end) }))),
            );
            b.row(format!("cut_route_exit[{k},{}]", b.label(i)), terms, Relation::Ge, 0.0);
        }

        // arrival at j is no earlier than the detour through its predecessor
        for &j in &heads {
            let mut terms = vec![(VarKind::T(j), 1.0)];
            terms.extend(
                tails
                    .iter()
                    .filter(|&&i| i != j)
                    .map(|&i| (VarKind::X(i, j), -(tau0(i) + g.tau(i, j)))),
            );
            b.row(format!("cut_arrival[{k},{}]", b.label(j)), terms, Relation::Ge, 0.0);
        }

        for &i in &ck {
            let mut terms: Vec<_> = ck.iter().map(|&j| (VarKind::X(NodeId::START, j), 1.0)).collect();
            terms.push((VarKind::Q(i), -1.0));
            b.row(format!("cut_depot_link[{k},{}]", b.label(i)), terms, Relation::Ge, 0.0);
        }
    }

    let support = g.num_support as f64;
    let binary = g.policy.flow == FlowMode::Binary;
    let flow_vars = |i: NodeId, j: NodeId| -> Vec<VarKind> {
        if binary {
            (0..g.num_support).map(|o| VarKind::Z(i, j, o)).collect()
        } else {
            vec![VarKind::W(i, j)]
        }
    };

    // support workload: |O| t_n ≥ travel + m·s
    let mut terms = vec![(VarKind::T(end), support)];
    for &(i, j) in arcs {
        terms.extend(flow_vars(i, j).into_iter().map(|k| (k, -g.tau(i, j))));
    }
    for &j in customers {
        terms.extend(modes(j).map(|m| (VarKind::S(j, m), -f64::from(m))));
    }
    b.row("cut_support_load[]".into(), terms, Relation::Ge, 0.0);

    // support vehicles entering the related copies of j
    let cap_nodes: Vec<NodeId> = if binary {
        customers.to_vec()
    } else {
        // indexed by original customer, read as the copy in C_1
        (1..=g.num_customers).map(|c| g.copy_of(0, c)).collect()
    };
    for j in cap_nodes {
        let cap = f64::from(g.max_modes[j.0].min(u32::try_from(g.num_support).unwrap_or(u32::MAX)));
        let related: BTreeSet<NodeId> = g.related[j.0].iter().copied().collect();
        let terms: Vec<_> = arcs
            .iter()
            .filter(|(_, h)| related.contains(h))
            .flat_map(|&(h, i)| flow_vars(h, i).into_iter().map(|k| (k, 1.0)))
            .collect();
        let label = if binary { b.label(j) } else { g.original_of[j.0].to_string() };
        b.row(format!("cut_support_cap[{label}]"), terms, Relation::Le, cap);
    }

    if !binary {
        for &(i, j) in arcs {
            let name = format!("cut_min_flow[{},{}]", b.label(i), b.label(j));
            b.row(name, [(VarKind::W(i, j), 1.0), (VarKind::V(i, j), -1.0)], Relation::Ge, 0.0);
        }
    }
}

/// Makespan of the construction heuristic: a feasible makespan, hence a valid `T`.
pub fn estimate_big_m(inst: &Instance, policy: VariantPolicy) -> f64 {
    construction_heuristic(inst, policy)
        .map(|(_, s)| s.makespan)
        .expect("the heuristic is feasible whenever the instance is valid")
}

/// Every constraint, bound and integrality requirement violated by more than
/// [`EVAL_TOLERANCE`].
pub fn evaluate_model(m: &MilpModel, assignment: &Assignment) -> Result<Vec<Violation>> {
    let mut values = Vec::with_capacity(m.vars.len());
    for (v, name) in m.vars.iter().zip(&m.names) {
        let x = *assignment
            .get(&v.kind)
            .ok_or_else(|| Error::MissingVariable(name.clone()))?;
        values.push(x);
    }
    let mut out = Vec::new();
    for ((v, name), &x) in m.vars.iter().zip(&m.names).zip(&values) {
        let hi = if v.domain == Domain::Binary { 1.0 } else { f64::INFINITY };
        let excess = (-x).max(x - hi).max(0.0);
        if excess > EVAL_TOLERANCE {
            out.push(Violation {
                row: format!("bound[{name}]"),
                amount: excess,
            });
        }
        if v.domain != Domain::Continuous && (x - x.round()).abs() > EVAL_TOLERANCE {
            out.push(Violation {
                row: format!("integrality[{name}]"),
                amount: (x - x.round()).abs(),
            });
        }
    }
    for c in &m.constraints {
        let amount = c.violation(&values);
        if amount > EVAL_TOLERANCE {
            out.push(Violation {
                row: c.name.clone(),
                amount,
            });
        }
    }
    Ok(out)
}

/// Objective value `t_n` of a complete assignment.
pub fn objective_value(m: &MilpModel, assignment: &Assignment) -> Option<f64> {
    assignment.get(&m.vars[m.objective].kind).copied()
}

/// Maps a native solution and its schedule onto the model's variables. In
/// binary mode the per-vehicle `z` comes from [`decompose_flow`].
pub fn encode_solution(m: &MilpModel, sol: &Solution, sched: &Schedule) -> Result<Assignment> {
    let g = &m.graph;
    let end = g.end();
    let mut a: Assignment = m.vars.iter().map(|v| (v.kind, 0.0)).collect();
    let mut set = |kind: VarKind, value: f64| -> Result<()> {
        match a.get_mut(&kind) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::MissingVariable(format!("{kind:?}"))),
        }
    };
    for (i, j) in sol.plan.arcs(end) {
        set(VarKind::X(i, j), 1.0)?;
    }
    if sol.plan.routes.iter().any(Vec::is_empty) {
        set(VarKind::X(NodeId::START, end), 1.0)?;
    }
    for j in sol.plan.visited() {
        set(VarKind::Q(j), 1.0)?;
    }
    for (&j, &mode) in &sol.services.mode {
        set(VarKind::Y(j, mode), 1.0)?;
        set(VarKind::S(j, mode), sol.services.duration(j))?;
    }
    for (&j, &t) in &sched.start {
        set(VarKind::T(j), t)?;
    }
    set(VarKind::T(end), sched.makespan)?;
    match m.policy.flow {
        FlowMode::Integer => {
            for (&(i, j), &w) in &sol.flow.counts {
                set(VarKind::W(i, j), f64::from(w))?;
                set(VarKind::V(i, j), if w > 0 { 1.0 } else { 0.0 })?;
            }
        }
        FlowMode::Binary => {
            let paths = decompose_flow(g, &sol.flow)?;
            for (o, path) in paths.paths.iter().enumerate() {
                for w in path.windows(2) {
                    set(VarKind::Z(w[0], w[1], o), 1.0)?;
                }
            }
        }
    }
    Ok(a)
}

/// The continuous relaxation: integrality dropped, binaries in `[0, 1]`.
pub fn lp_relaxation(m: &MilpModel) -> Result<LpProblem> {
    let n = m.vars.len();
    let mut objective = vec![0.0; n];
    objective[m.objective] = 1.0;
    let bounds = m
        .vars
        .iter()
        .map(|v| match v.domain {
            Domain::Binary => (0.0, 1.0),
            _ => (0.0, INFINITY),
        })
        .collect();
    let rows = m
        .constraints
        .iter()
        .map(|c| {
            let mut coeffs = vec![0.0; n];
            for &(i, a) in &c.terms {
                coeffs[i] = a;
            }
            LpRow::new(coeffs, c.relation, c.rhs)
        })
        .collect();
    LpProblem::new(objective, rows, bounds)
}

/// Optimal value of the continuous relaxation.
pub fn solve_relaxation(m: &MilpModel) -> Result<LpOutcome> {
    let out = solve_lp(&lp_relaxation(m)?);
    match out.status {
        LpStatus::Optimal => Ok(out),
        LpStatus::Infeasible => Err(Error::Infeasible("relaxation is infeasible".into())),
        LpStatus::Unbounded => unreachable!("t_n is bounded below by zero"),
    }
}

/// LP-file row name: `family[a,b]` becomes `family_a_b`.
pub fn sanitize_name(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    while s.ends_with('_') {
        s.pop();
    }
    s
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// Appends `token` to `out`, wrapping onto an indented continuation line
/// when the current line would exceed the width limit.
fn push_token(out: &mut String, line_start: &mut usize, token: &str) {
    if out.len() - *line_start + 1 + token.len() > MAX_LINE {
        out.push('\n');
        *line_start = out.len();
        out.push_str("   ");
    } else {
        out.push(' ');
    }
    out.push_str(token);
}

fn push_terms(out: &mut String, line_start: &mut usize, terms: impl Iterator<Item = (f64, String)>) {
    let mut first = true;
    for (a, name) in terms {
        let sign = if a < 0.0 { "-" } else { "+" };
        let mag = a.abs();
        let token = match (first, mag == 1.0) {
            (true, true) if a > 0.0 => name,
            (true, false) if a > 0.0 => format!("{} {name}", fmt_num(mag)),
            (_, true) => format!("{sign} {name}"),
            (_, false) => format!("{sign} {} {name}", fmt_num(mag)),
        };
        push_token(out, line_start, &token);
        first = false;
    }
    if first {
        push_token(out, line_start, "0");
    }
}

/// The model in LP text format: objective, named rows, `t ≤ T` bounds,
/// binaries and generals. Zero-term rows are written as `0 rel rhs`.
pub fn export_lp_file(m: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ policy {} big_m {} cuts {}",
        m.policy,
        fmt_num(m.big_m),
        if m.with_cuts { "on" } else { "off" }
    );
    out.push_str("Minimize\n");
    let _ = writeln!(out, " obj: {}", m.names[m.objective]);
    out.push_str("Subject To\n");
    for c in &m.constraints {
        let mut line_start = out.len();
        out.push(' ');
        out.push_str(&sanitize_name(&c.name));
        out.push(':');
        push_terms(&mut out, &mut line_start, c.terms.iter().map(|&(i, a)| (a, m.names[i].clone())));
        let rel = match c.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        push_token(&mut out, &mut line_start, rel);
        push_token(&mut out, &mut line_start, &fmt_num(c.rhs));
        out.push('\n');
    }
    out.push_str("Bounds\n");
    for (v, name) in m.vars.iter().zip(&m.names) {
        if matches!(v.kind, VarKind::T(_)) {
            let _ = writeln!(out, " 0 <= {name} <= {}", fmt_num(m.big_m));
        }
    }
    for (title, domain) in [("Binaries", Domain::Binary), ("Generals", Domain::Integer)] {
        let names: Vec<&String> = m
            .vars
            .iter()
            .zip(&m.names)
            .filter(|(v, _)| v.domain == domain)
            .map(|(_, n)| n)
            .collect();
        if names.is_empty() {
            continue;
        }
        out.push_str(title);
        out.push('\n');
        let mut line_start = out.len();
        for n in names {
            push_token(&mut out, &mut line_start, n);
        }
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl ParsedRow {
    /// Amount by which `values` (by variable name) violates the row.
    pub fn violation(&self, values: &HashMap<String, f64>) -> Option<f64> {
        let mut lhs = 0.0;
        for (name, a) in &self.terms {
            lhs += a * values.get(name)?;
        }
        Some(match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedLp {
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<ParsedRow>,
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binaries: Vec<String>,
    pub generals: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "st" | "s.t." | "such that" => Some(Section::Rows),
        "bounds" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !s.starts_with(|c: char| c.is_ascii_digit())
}

/// Token with its source position (1-based).
type Tok<'a> = (&'a str, usize, usize);

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// `[sign] [coef] name` sequence up to (not including) a relation token.
fn parse_linear<'a>(toks: &[Tok<'a>], pos: &mut usize) -> Result<Vec<(String, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while let Some(&(tok, line, col)) = toks.get(*pos) {
        match tok {
            "<=" | ">=" | "=" | "=<" | "=>" => break,
            "+" => sign = 1.0,
            "-" => sign = -sign,
            _ => {
                if let Ok(x) = tok.parse::<f64>() {
                    if coef.is_some() {
                        return Err(parse_err(line, col, "two coefficients in a row"));
                    }
                    coef = Some(x);
                } else if is_name(tok) {
                    terms.push((tok.to_string(), sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                } else {
                    return Err(parse_err(line, col, format!("unexpected token `{tok}`")));
                }
            }
        }
        *pos += 1;
    }
    if coef.is_some_and(|c| c != 0.0) {
        let (_, line, col) = toks[pos.saturating_sub(1)];
        return Err(parse_err(line, col, "constant term on the left-hand side"));
    }
    Ok(terms)
}

fn tokenize(line: &str, lineno: usize) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (idx, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((&line[s..idx], lineno, s + 1));
            }
        } else if start.is_none() {
            start = Some(idx);
        }
    }
    if let Some(s) = start {
        out.push((&line[s..], lineno, s + 1));
    }
    out
}

/// Parses and validates LP text: line widths, name characters, unique row
/// names, and well-formed rows and bounds.
pub fn parse_lp_file(text: &str) -> Result<ParsedLp> {
    let mut parsed = ParsedLp::default();
    let mut section = Section::Preamble;
    let mut objective_toks: Vec<Tok<'_>> = Vec::new();
    let mut row_toks: Vec<Tok<'_>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if raw.len() > MAX_LINE {
            return Err(parse_err(lineno, MAX_LINE + 1, format!("line longer than {MAX_LINE} characters")));
        }
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(next) = section_of(line) {
            section = next;
            continue;
        }
        let toks = tokenize(line, lineno);
        match section {
            Section::Preamble | Section::End => {
                return Err(parse_err(lineno, 1, "content outside a section"));
            }
            Section::Objective => objective_toks.extend(toks),
            Section::Rows => row_toks.extend(toks),
            Section::Bounds => parse_bound(&toks, &mut parsed.bounds)?,
            Section::Binaries | Section::Generals => {
                for (tok, l, c) in toks {
                    if !is_name(tok) {
                        return Err(parse_err(l, c, format!("bad variable name `{tok}`")));
                    }
                    let list = if section == Section::Binaries {
                        &mut parsed.binaries
                    } else {
                        &mut parsed.generals
                    };
                    list.push(tok.to_string());
                }
            }
        }
    }
    if section != Section::End {
        return Err(parse_err(text.lines().count(), 1, "missing End"));
    }

    let mut pos = 0;
    if let Some(&(tok, l, c)) = objective_toks.first() {
        if let Some(name) = tok.strip_suffix(':') {
            if !is_name(name) {
                return Err(parse_err(l, c, "bad objective name"));
            }
            pos = 1;
        }
    }
    parsed.objective = parse_linear(&objective_toks, &mut pos)?;
    if let Some(&(tok, l, c)) = objective_toks.get(pos) {
        return Err(parse_err(l, c, format!("unexpected `{tok}` in objective")));
    }

    let mut seen = BTreeSet::new();
    let mut pos = 0;
    while pos < row_toks.len() {
        let (tok, l, c) = row_toks[pos];
        let name = tok
            .strip_suffix(':')
            .filter(|n| is_name(n))
            .ok_or_else(|| parse_err(l, c, format!("expected `name:`, found `{tok}`")))?;
        if !seen.insert(name.to_string()) {
            return Err(parse_err(l, c, format!("duplicate row `{name}`")));
        }
        pos += 1;
        let mut terms = parse_linear(&row_toks, &mut pos)?;
        terms.retain(|(n, _)| n != "0");
        let (rel, l, c) = *row_toks
            .get(pos)
            .ok_or_else(|| parse_err(l, c, format!("row `{name}` has no relation")))?;
        let relation = match rel {
            "<=" | "=<" => Relation::Le,
            ">=" | "=>" => Relation::Ge,
            "=" => Relation::Eq,
            _ => return Err(parse_err(l, c, "expected a relation")),
        };
        let (rhs, l, c) = *row_toks
            .get(pos + 1)
            .ok_or_else(|| parse_err(l, c, format!("row `{name}` has no right-hand side")))?;
        let rhs = rhs
            .parse::<f64>()
            .map_err(|_| parse_err(l, c, format!("bad right-hand side `{rhs}`")))?;
        pos += 2;
        parsed.rows.push(ParsedRow {
            name: name.to_string(),
            terms,
            relation,
            rhs,
        });
    }
    Ok(parsed)
}

fn parse_bound(toks: &[Tok<'_>], bounds: &mut BTreeMap<String, (f64, f64)>) -> Result<()> {
    let num = |t: &Tok<'_>| -> Result<f64> {
        match t.0.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            s => s
                .parse::<f64>()
                .map_err(|_| parse_err(t.1, t.2, format!("bad bound `{}`", t.0))),
        }
    };
    let var = |t: &Tok<'_>| -> Result<String> {
        if is_name(t.0) {
            Ok(t.0.to_string())
        } else {
            Err(parse_err(t.1, t.2, format!("bad variable name `{}`", t.0)))
        }
    };
    let (name, range) = match toks {
        [v, f] if f.0.eq_ignore_ascii_case("free") => (var(v)?, (f64::NEG_INFINITY, f64::INFINITY)),
        [lo, l1, v, l2, hi] if l1.0 == "<=" && l2.0 == "<=" => (var(v)?, (num(lo)?, num(hi)?)),
        [v, rel, x] => {
            let name = var(v)?;
            let x = num(x)?;
            let cur = bounds.get(&name).copied().unwrap_or((0.0, f64::INFINITY));
            let range = match rel.0 {
                "<=" => (cur.0, x),
                ">=" => (x, cur.1),
                "=" => (x, x),
                _ => return Err(parse_err(rel.1, rel.2, "expected a relation")),
            };
            (name, range)
        }
        _ => {
            let (l, c) = toks.first().map_or((0, 0), |t| (t.1, t.2));
            return Err(parse_err(l, c, "unrecognized bound"));
        }
    };
    bounds.insert(name, range);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::build_graph;
    use crate::instance::{generate_instance, CustomerSpec, FleetConfig, GenConfig, Point};
    use crate::schedule::compute_schedule;

    fn tiny(n: usize, k: usize, o: usize, seed: u64) -> Instance {
        generate_instance(&GenConfig::new(n, k, o, seed)).unwrap()
    }

    fn model(inst: &Instance, policy: VariantPolicy, cuts: bool, big_m: f64) -> MilpModel {
        let g = build_graph(inst, policy, big_m);
        build_model(inst, &g, cuts)
    }

    #[test]
    fn support_depot_row_for_single_customer() {
        let inst = Instance::new(
            "one",
            Point::new(0.0, 0.0),
            vec![CustomerSpec::new(1, Point::new(3.0, 4.0), 30.0, 2)],
            FleetConfig {
                primary_count: 1,
                support_count: 3,
            },
        )
        .unwrap();
        let m = model(&inst, VariantPolicy::integer(true, false), false, 100.0);
        let row = m.constraint("support_depot[]").unwrap();
        let names: Vec<&str> = row.terms.iter().map(|&(i, _)| m.names[i].as_str()).collect();
        assert_eq!(names, ["w_0_1", "w_0_n"]);
        assert!(row.terms.iter().all(|&(_, a)| a == 1.0));
        assert_eq!((row.relation, row.rhs), (Relation::Eq, 3.0));
    }

    #[test]
    fn visit_rows_one_per_original_customer() {
        let inst = tiny(3, 2, 3, 1);
        let m = model(&inst, VariantPolicy::integer(true, false), false, 100.0);
        assert_eq!(m.count_family("visit_once"), 3);
        assert_eq!(m.count_family("visit_min"), 0);
        let m = model(&inst, VariantPolicy::integer(true, true), false, 100.0);
        assert_eq!(m.count_family("visit_min"), 3);
    }

    #[test]
    fn binary_model_is_larger_on_05_02_04() {
        let inst = tiny(5, 2, 4, 7);
        let p = VariantPolicy::integer(true, false);
        let int = model(&inst, p, false, 500.0);
        let bin = model(&inst, p.with_flow(FlowMode::Binary), false, 500.0);
        let arcs = int.graph.arc_count();
        let z = bin.vars.iter().filter(|v| matches!(v.kind, VarKind::Z(..))).count();
        let vw = int.vars.iter().filter(|v| matches!(v.kind, VarKind::V(..) | VarKind::W(..))).count();
        assert_eq!(z, 4 * arcs);
        assert_eq!(vw, 2 * arcs);
        assert!(bin.vars.len() > int.vars.len());
    }

    #[test]
    fn row_counts_match_index_set_formulas() {
        for (n, k, o) in [(2, 1, 2), (3, 2, 3), (4, 3, 2)] {
            let inst = tiny(n, k, o, 5);
            let sum_b: usize = inst.customers.iter().map(|c| c.max_modes as usize).sum();
            for policy in VariantPolicy::all() {
                for cuts in [false, true] {
                    let m = model(&inst, policy, cuts, 300.0);
                    let g = &m.graph;
                    let arcs = g.arc_count();
                    let cross = crate::graph::cross_fleet_arcs(g).len();
                    let per_k_pairs = (n + 1) * (n + 1) - n;
                    let mut expect: Vec<(&str, usize)> = vec![
                        ("depot_out", k),
                        ("inflow", k * n),
                        ("outflow", k * n),
                        ("time_primary", k * per_k_pairs),
                        ("demand", n),
                        (if policy.split_allowed { "visit_min" } else { "visit_once" }, n),
                        ("single_mode", k * n),
                        ("service_ub", k * sum_b),
                        ("mode_support", k * n),
                    ];
                    match policy.flow {
                        FlowMode::Binary => expect.extend([
                            ("support_depot", o),
                            ("support_flow", k * n * o),
                            ("time_support", o * arcs),
                            ("no_switch", if policy.switch_allowed { 0 } else { o * cross }),
                        ]),
                        FlowMode::Integer => expect.extend([
                            ("support_depot", 1),
                            ("support_flow", k * n),
                            ("arc_capacity", arcs),
                            ("time_support", arcs),
                        ]),
                    }
                    if cuts {
                        expect.extend([
                            ("cut_route_load", k),
                            ("cut_route_exit", k * (n + 1)),
                            ("cut_arrival", k * (n + 1)),
                            ("cut_depot_link", k * n),
                            ("cut_support_load", 1),
                        ]);
                        match policy.flow {
                            FlowMode::Binary => expect.push(("cut_support_cap", k * n)),
                            FlowMode::Integer => {
                                expect.extend([("cut_support_cap", n), ("cut_min_flow", arcs)])
                            }
                        }
                    }
                    let total: usize = expect.iter().map(|e| e.1).sum();
                    for (family, count) in &expect {
                        assert_eq!(m.count_family(family), *count, "{family} {policy} cuts={cuts}");
                    }
                    assert_eq!(m.constraints.len(), total, "{policy} cuts={cuts}");
                    // x lives on the arcs inside some N_k, with (0, n) shared
                    let xs = m.vars.iter().filter(|v| matches!(v.kind, VarKind::X(..))).count();
                    assert_eq!(xs, k * per_k_pairs - (k - 1));
                }
            }
        }
    }

    #[test]
    fn worked_example_encodes_in_both_models() {
        let inst = fixtures::worked_example_instance();
        for flow in [FlowMode::Integer, FlowMode::Binary] {
            let policy = VariantPolicy::new(flow, true, false);
            for cuts in [false, true] {
                let m = model(&inst, policy, cuts, 1e4);
                let sol = fixtures::worked_example_solution(&inst, &m.graph);
                let sched = compute_schedule(&m.graph, &sol).unwrap();
                let a = encode_solution(&m, &sol, &sched).unwrap();
                assert_eq!(evaluate_model(&m, &a).unwrap(), vec![], "{policy} cuts={cuts}");
                assert_eq!(objective_value(&m, &a), Some(sched.makespan));
                // bold modes: 2, 2, 3.07 (mode 3), 3, 1
                let y = |c: usize, k: usize, mode: u32| a[&VarKind::Y(m.graph.copy_of(k, c), mode)];
                assert_eq!([y(1, 0, 2), y(2, 1, 2), y(3, 0, 3), y(4, 0, 3), y(5, 1, 1)], [1.0; 5]);
            }
        }
    }

    #[test]
    fn empty_plan_encoding() {
        let inst = Instance::new(
            "empty",
            Point::new(0.0, 0.0),
            vec![],
            FleetConfig {
                primary_count: 1,
                support_count: 2,
            },
        )
        .unwrap();
        let m = model(&inst, VariantPolicy::integer(false, false), true, 0.0);
        let (sol, sched) = construction_heuristic(&inst, m.policy).unwrap();
        let a = encode_solution(&m, &sol, &sched).unwrap();
        assert_eq!(evaluate_model(&m, &a).unwrap(), vec![]);
        let n = m.graph.end();
        assert_eq!(a[&VarKind::W(NodeId::START, n)], 2.0);
        assert_eq!(a[&VarKind::X(NodeId::START, n)], 1.0);
        assert_eq!(a[&VarKind::T(n)], 0.0);
        let nonzero: Vec<_> = a.iter().filter(|(_, v)| **v != 0.0).map(|(k, _)| *k).collect();
        assert_eq!(
            nonzero,
            [VarKind::X(NodeId::START, n), VarKind::V(NodeId::START, n), VarKind::W(NodeId::START, n)]
        );
    }

    #[test]
    fn perturbed_flow_breaks_conservation() {
        let inst = fixtures::worked_example_instance();
        let m = model(&inst, VariantPolicy::integer(true, false), false, 1e4);
        let sol = fixtures::worked_example_solution(&inst, &m.graph);
        let sched = compute_schedule(&m.graph, &sol).unwrap();
        let mut a = encode_solution(&m, &sol, &sched).unwrap();
        let (i, j) = (m.graph.copy_of(0, 1), m.graph.copy_of(0, 4));
        *a.get_mut(&VarKind::W(i, j)).unwrap() += 1.0;
        let rows: Vec<String> = evaluate_model(&m, &a).unwrap().into_iter().map(|v| v.row).collect();
        assert!(rows.contains(&format!("support_flow[{i}]")), "{rows:?}");
        a.remove(&VarKind::W(i, j));
        match evaluate_model(&m, &a) {
            Err(Error::MissingVariable(name)) => assert_eq!(name, "w_1_4"),
            other => panic!("expected missing variable, got {other:?}"),
        }
    }

    #[test]
    fn lp_file_format_and_round_trip() {
        let inst = tiny(5, 2, 4, 7);
        for policy in VariantPolicy::all() {
            let m = model(&inst, policy, true, 400.0);
            let text = export_lp_file(&m);
            let mut lines = text.lines().skip_while(|l| l.starts_with('\\'));
            assert_eq!(lines.next(), Some("Minimize"));
            assert_eq!(lines.next(), Some(" obj: t_n"));
            assert!(text.lines().all(|l| l.len() <= MAX_LINE));
            let parsed = parse_lp_file(&text).unwrap();
            assert_eq!(parsed.objective, vec![("t_n".to_string(), 1.0)]);
            assert_eq!(parsed.rows.len(), m.constraints.len());
            for (row, c) in parsed.rows.iter().zip(&m.constraints) {
                assert_eq!(row.name, sanitize_name(&c.name));
                assert_eq!((row.relation, row.rhs), (c.relation, c.rhs));
                let expect: Vec<(String, f64)> = c.terms.iter().map(|&(i, a)| (m.names[i].clone(), a)).collect();
                assert_eq!(row.terms, expect);
            }
            let binaries: BTreeSet<&String> = parsed.binaries.iter().collect();
            for (v, name) in m.vars.iter().zip(&m.names) {
                if matches!(v.kind, VarKind::X(..) | VarKind::Y(..)) {
                    assert!(binaries.contains(name));
                }
                if let VarKind::T(_) = v.kind {
                    assert_eq!(parsed.bounds[name], (0.0, 400.0));
                }
            }
            let generals = parsed.generals.len();
            let ws = m.vars.iter().filter(|v| matches!(v.kind, VarKind::W(..))).count();
            assert_eq!(generals, ws);
        }
    }

    #[test]
    fn lp_parser_reports_positions() {
        let bad = "Minimize\n obj: t_n\nSubject To\n r1: x + 2 y >= 1\n r1: x <= 3\nEnd\n";
        match parse_lp_file(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let long = format!("Minimize\n obj: {}\nEnd\n", "a".repeat(300));
        assert!(matches!(parse_lp_file(&long), Err(Error::Parse { line: 2, .. })));
        let ok = "Minimize\n obj: t\nSubject To\n r: - x\n   + 2.5 y = -1\nBounds\n x free\n 1 <= y <= 2\nEnd\n";
        let p = parse_lp_file(ok).unwrap();
        assert_eq!(p.rows[0].terms, vec![("x".into(), -1.0), ("y".into(), 2.5)]);
        assert_eq!(p.bounds["x"], (f64::NEG_INFINITY, f64::INFINITY));
    }

    #[test]
    fn random_assignments_match_independent_row_evaluation() {
        use rand::{Rng, SeedableRng};
        let inst = tiny(3, 2, 3, 11);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for policy in VariantPolicy::all() {
            let m = model(&inst, policy, true, 250.0);
            let parsed = parse_lp_file(&export_lp_file(&m)).unwrap();
            for _ in 0..20 {
                let a: Assignment = m
                    .vars
                    .iter()
                    .map(|v| {
                        let x = match v.domain {
                            Domain::Binary => f64::from(rng.gen_range(0..2u8)),
                            Domain::Integer => f64::from(rng.gen_range(0..4u8)),
                            Domain::Continuous => rng.gen_range(0.0..300.0),
                        };
                        (v.kind, x)
                    })
                    .collect();
                let by_name: HashMap<String, f64> =
                    m.vars.iter().zip(&m.names).map(|(v, n)| (n.clone(), a[&v.kind])).collect();
                let mine: Vec<String> = evaluate_model(&m, &a)
                    .unwrap()
                    .into_iter()
                    .map(|v| sanitize_name(&v.row))
                    .collect();
                let theirs: Vec<String> = parsed
                    .rows
                    .iter()
                    .filter(|r| r.violation(&by_name).unwrap() > EVAL_TOLERANCE)
                    .map(|r| r.name.clone())
                    .collect();
                assert_eq!(mine, theirs);
            }
        }
    }

    #[test]
    fn relaxation_with_cuts_is_tighter_and_valid() {
        let inst = fixtures::worked_example_instance();
        let policy = VariantPolicy::integer(true, false);
        let g = build_graph(&inst, policy, 1e4);
        let sol = fixtures::worked_example_solution(&inst, &g);
        let feasible = compute_schedule(&g, &sol).unwrap().makespan;
        let big_m = feasible;
        let plain = solve_relaxation(&model(&inst, policy, false, big_m)).unwrap().objective;
        let cut = solve_relaxation(&model(&inst, policy, true, big_m)).unwrap().objective;
        assert!(cut >= plain - 1e-6, "{cut} < {plain}");
        assert!(cut <= feasible + 1e-6);
        assert!(cut > 0.0);
    }
}
