use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{build_graph, ExpandedGraph, NodeId, VariantPolicy};
use crate::instance::Instance;
use crate::schedule::{
    compute_schedule, optimize_split_times, PrimaryPlan, Schedule, ServicePlan, Solution, SupportFlow,
};

use super::{PartialState, SearchStats, SolveResult, SolveStatus};

/// Largest `(|V|, |K|, |O|)` accepted by the exhaustive oracle.
pub const BRUTE_FORCE_CAP: (usize, usize, usize) = (4, 2, 3);

/// Exhaustive minimum over every customer-to-vehicle assignment, every route
/// order, every placement order of the visited copies and every support flow
/// drawn forward along that order. Schedules come from
/// [`compute_schedule`] or, with splitting, [`optimize_split_times`].
pub fn brute_force(inst: &Instance, policy: VariantPolicy) -> Result<SolveResult> {
    run(inst, policy, None)
}

/// Best makespan among completions of `state`, or `None` if it has none.
pub fn brute_force_completion(inst: &Instance, policy: VariantPolicy, state: &PartialState) -> Result<Option<f64>> {
    Ok(run(inst, policy, Some(state))?.makespan())
}

fn run(inst: &Instance, policy: VariantPolicy, state: Option<&PartialState>) -> Result<SolveResult> {
    let (nv, nk, no) = (
        inst.num_customers(),
        inst.fleet.primary_count,
        inst.fleet.support_count,
    );
    let (cv, ck, co) = BRUTE_FORCE_CAP;
    if nv > cv || nk > ck || no > co {
        return Err(Error::SizeCap(format!(
            "{nv} customers, {nk} primary, {no} support exceeds {cv}/{ck}/{co}"
        )));
    }
    let started = Instant::now();
    let g = build_graph(inst, policy, 0.0);
    let mut oracle = Oracle {
        inst,
        g: &g,
        best: None,
        stats: SearchStats::default(),
        seen: HashSet::new(),
    };

    // every assignment: a vehicle per customer, or a nonempty vehicle set
    let choices: Vec<usize> = if policy.split_allowed {
        (1..1usize << nk).collect()
    } else {
        (0..nk).map(|k| 1 << k).collect()
    };
    let mut pick = vec![0usize; nv];
    loop {
        let members: Vec<Vec<usize>> = (0..nk)
            .map(|k| (1..=nv).filter(|&c| pick[c - 1] < choices.len() && choices[pick[c - 1]] & (1 << k) != 0).collect())
            .collect();
        let mut routes = vec![Vec::new(); nk];
        oracle.permute(&members, 0, &mut routes, state);

        // next assignment (odometer)
        let mut i = 0;
        while i < nv {
            pick[i] += 1;
            if pick[i] < choices.len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == nv {
            break;
        }
    }

    oracle.stats.elapsed = started.elapsed();
    let Oracle { best, stats, .. } = oracle;
    let (status, lower_bound) = match &best {
        Some((_, s)) => (SolveStatus::Optimal, s.makespan),
        None => (SolveStatus::Infeasible, f64::INFINITY),
    };
    Ok(SolveResult {
        best,
        status,
        stats,
        lower_bound,
    })
}

struct Oracle<'a> {
    inst: &'a Instance,
    g: &'a ExpandedGraph,
    best: Option<(Solution, Schedule)>,
    stats: SearchStats,
    /// Flows already evaluated for the current routes.
    seen: HashSet<Vec<(usize, usize, u32)>>,
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn route_order(a: &[usize], b: &[usize]) -> bool {
    b.is_empty() || (!a.is_empty() && a <= b)
}

fn matches_state(k: usize, route: &[usize], state: Option<&PartialState>) -> bool {
    state.is_none_or(|s| {
        let prefix = &s.routes[k];
        route.starts_with(prefix) && (!s.closed[k] || route.len() == prefix.len())
    })
}

impl Oracle<'_> {
    fn permute(&mut self, members: &[Vec<usize>], k: usize, routes: &mut Vec<Vec<usize>>, state: Option<&PartialState>) {
        if k == members.len() {
            // primary vehicles are interchangeable: without a fixed state only
            // route tuples sorted with empty routes last are evaluated
            if state.is_none() && !routes.windows(2).all(|w| route_order(&w[0], &w[1])) {
                return;
            }
            let copies: Vec<Vec<NodeId>> = routes
                .iter()
                .enumerate()
                .map(|(k, r)| r.iter().map(|&c| self.g.copy_of(k, c)).collect())
                .collect();
            self.seen.clear();
            let mut order = Vec::new();
            let mut next = vec![0; copies.len()];
            self.interleave(&copies, &mut next, &mut order);
            return;
        }
        for perm in permutations(&members[k]) {
            if matches_state(k, &perm, state) {
                routes[k] = perm;
                self.permute(members, k + 1, routes, state);
            }
        }
        routes[k].clear();
    }

    /// Every merge of the route sequences.
    fn interleave(&mut self, routes: &[Vec<NodeId>], next: &mut Vec<usize>, order: &mut Vec<NodeId>) {
        if next.iter().zip(routes).all(|(&i, r)| i == r.len()) {
            let mut pool = vec![0u32; self.g.node_count()];
            pool[0] = u32::try_from(self.g.num_support).unwrap_or(u32::MAX);
            let mut arcs = Vec::new();
            self.draw(routes, order, 0, &mut pool, &mut arcs);
            return;
        }
        for r in 0..routes.len() {
            if next[r] < routes[r].len() {
                order.push(routes[r][next[r]]);
                next[r] += 1;
                self.interleave(routes, next, order);
                next[r] -= 1;
                order.pop();
            }
        }
    }

    /// Support vehicles for `order[i]`, taken from where vehicles currently are.
    fn draw(
        &mut self,
        routes: &[Vec<NodeId>],
        order: &[NodeId],
        i: usize,
        pool: &mut Vec<u32>,
        arcs: &mut Vec<(usize, usize, u32)>,
    ) {
        if i == order.len() {
            self.evaluate(routes, pool, arcs);
            return;
        }
        let v = order[i];
        let sources: Vec<usize> = std::iter::once(0)
            .chain(order[..i].iter().map(|u| u.0))
            .filter(|&u| pool[u] > 0 && self.g.has_arc(NodeId(u), v))
            .collect();
        let max_mode = self.g.max_modes[v.0];
        self.take(routes, order, i, pool, arcs, &sources, 0, 0, max_mode);
    }

    #[allow(clippy::too_many_arguments)]
    fn take(
        &mut self,
        routes: &[Vec<NodeId>],
        order: &[NodeId],
        i: usize,
        pool: &mut Vec<u32>,
        arcs: &mut Vec<(usize, usize, u32)>,
        sources: &[usize],
        idx: usize,
        taken: u32,
        max_mode: u32,
    ) {
        let v = order[i];
        if idx == sources.len() {
            if taken >= 1 {
                pool[v.0] = taken;
                self.draw(routes, order, i + 1, pool, arcs);
                pool[v.0] = 0;
            }
            return;
        }
        let u = sources[idx];
        let available = pool[u];
        let capacity = self.g.gamma(NodeId(u), v);
        for n in 0..=available.min(max_mode - taken) {
            if n > capacity {
                break;
            }
            if n > 0 {
                pool[u] -= n;
                arcs.push((u, v.0, n));
            }
            self.take(routes, order, i, pool, arcs, sources, idx + 1, taken + n, max_mode);
            if n > 0 {
                arcs.pop();
                pool[u] += n;
            }
        }
    }

    fn evaluate(&mut self, routes: &[Vec<NodeId>], pool: &[u32], arcs: &[(usize, usize, u32)]) {
        self.stats.leaves += 1;
        let end = self.g.end();
        let mut key: Vec<(usize, usize, u32)> = arcs.to_vec();
        key.extend(pool.iter().enumerate().filter(|(_, &n)| n > 0).map(|(u, &n)| (u, end.0, n)));
        key.sort_unstable();
        if !self.seen.insert(key.clone()) {
            return;
        }
        self.stats.nodes += 1;
        let mut flow = SupportFlow::new();
        for &(u, v, n) in &key {
            flow.add(NodeId(u), NodeId(v), n);
        }
        let plan = PrimaryPlan::new(routes.to_vec());
        let mode: BTreeMap<NodeId, u32> = plan.visited().map(|j| (j, flow.inflow(j))).collect();
        let policy = self.g.policy;
        let (services, schedule) = if policy.split_allowed {
            match optimize_split_times(self.inst, self.g, &plan, &flow, &mode) {
                Ok(found) => found,
                Err(_) => return,
            }
        } else {
            let services = ServicePlan::full_service(self.inst, self.g, mode).expect("mode within range");
            let sol = Solution {
                plan: plan.clone(),
                flow: flow.clone(),
                services,
                policy,
            };
            let Ok(schedule) = compute_schedule(self.g, &sol) else {
                return;
            };
            (sol.services, schedule)
        };
        if self.best.as_ref().is_none_or(|(_, b)| schedule.makespan < b.makespan) {
            self.best = Some((
                Solution {
                    plan,
                    flow,
                    services,
                    policy,
                },
                schedule,
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::instance::{generate_instance, CustomerSpec, FleetConfig, GenConfig, Point};
    use crate::schedule::check_feasibility;

    #[test]
    fn empty_instance_has_zero_makespan() {
        let inst = Instance::new(
            "empty",
            Point::new(0.0, 0.0),
            vec![],
            FleetConfig {
                primary_count: 2,
                support_count: 2,
            },
        )
        .unwrap();
        let r = brute_force(&inst, VariantPolicy::integer(true, true)).unwrap();
        assert_eq!(r.makespan(), Some(0.0));
    }

    #[test]
    fn single_mode_customer_is_forced() {
        let inst = Instance::new(
            "b1",
            Point::new(0.0, 0.0),
            vec![CustomerSpec::new(1, Point::new(6.0, 8.0), 25.0, 1)],
            FleetConfig {
                primary_count: 1,
                support_count: 3,
            },
        )
        .unwrap();
        let r = brute_force(&inst, VariantPolicy::integer(false, false)).unwrap();
        assert_eq!(r.makespan(), Some(35.0));
        // one route, one copy, one support vehicle in, two idle
        assert_eq!(r.stats.nodes, 1);
        let (sol, _) = r.best.unwrap();
        assert_eq!(sol.flow.get(NodeId(0), NodeId(2)), 2);
    }

    #[test]
    fn size_cap_is_enforced() {
        let inst = generate_instance(&GenConfig::new(5, 2, 3, 0)).unwrap();
        assert!(matches!(
            brute_force(&inst, VariantPolicy::integer(true, false)),
            Err(Error::SizeCap(_))
        ));
        let inst = generate_instance(&GenConfig::new(2, 2, 4, 0)).unwrap();
        assert!(matches!(
            brute_force(&inst, VariantPolicy::integer(true, false)),
            Err(Error::SizeCap(_))
        ));
    }

    #[test]
    fn optimum_is_feasible_and_beats_heuristic() {
        for seed in 0..8 {
            let inst = generate_instance(&GenConfig::new(2 + seed as usize % 2, 2, 2, seed)).unwrap();
            for policy in VariantPolicy::integer_variants() {
                let r = brute_force(&inst, policy).unwrap();
                let (sol, sched) = r.best.unwrap();
                let g = build_graph(&inst, policy, sched.makespan);
                let report = check_feasibility(&inst, &g, &sol);
                assert!(report.is_feasible(), "{:?}", report.failed());
                let heuristic = super::super::construction_heuristic(&inst, policy).unwrap().1.makespan;
                assert!(sched.makespan <= heuristic + 1e-9);
            }
        }
    }

    #[test]
    fn completion_of_full_state_is_its_best_flow() {
        let inst = generate_instance(&GenConfig::new(3, 2, 2, 4)).unwrap();
        let policy = VariantPolicy::integer(true, false);
        let best = brute_force(&inst, policy).unwrap().makespan().unwrap();
        let unrestricted = brute_force_completion(&inst, policy, &PartialState::empty(2)).unwrap();
        assert_eq!(unrestricted, Some(best));
        // all customers closed into vehicle 1's route in a fixed order
        let state = PartialState {
            routes: vec![vec![], vec![3, 1, 2]],
            closed: vec![true, true],
        };
        let fixed = brute_force_completion(&inst, policy, &state).unwrap().unwrap();
        assert!(fixed >= best - 1e-9);
        // a closed state that misses customer 2 has no completion
        let state = PartialState {
            routes: vec![vec![1], vec![3]],
            closed: vec![true, true],
        };
        assert_eq!(brute_force_completion(&inst, policy, &state).unwrap(), None);
    }
}
