use std::collections::BTreeMap;
use std::time::Instant;

use crate::error::Result;
use crate::graph::{build_graph, ExpandedGraph, NodeId, VariantPolicy};
use crate::instance::Instance;
use crate::schedule::{
    check_feasibility, compute_schedule, optimize_split_times, PrimaryPlan, Schedule, ServicePlan, Solution,
    SupportFlow,
};

use super::{construction_heuristic, Ctx, SearchLimits, SearchStats, SolveResult, SolveStatus, INCUMBENT_EPS};

const UNPLACED: usize = usize::MAX;

/// Branch-and-bound over routes, support flows and modes. See the module
/// documentation for the branching scheme.
pub fn solve_exact(inst: &Instance, policy: VariantPolicy, limits: SearchLimits) -> Result<SolveResult> {
    let started = Instant::now();
    let mut best = construction_heuristic(inst, policy)?;
    if let Some(seed) = limits.incumbent.clone() {
        let g = build_graph(inst, policy, seed.1.makespan);
        let seed_check = check_feasibility(inst, &g, &seed.0);
        let feasible = seed_check.is_feasible();
        if let Some(sched) = seed_check.schedule.filter(|_| feasible) {
            if sched.makespan < best.1.makespan {
                best = (seed.0, sched);
            }
        }
    }
    let g = build_graph(inst, policy, best.1.makespan);
    let ctx = Ctx::new(inst, &g);
    let nk = g.num_primary;
    let root = ctx.route_bound(&vec![Vec::new(); nk], &vec![false; nk]);
    let best_value = best.1.makespan;
    let mut search = Search {
        ctx: &ctx,
        limits: &limits,
        started,
        best,
        best_value,
        stats: SearchStats::default(),
        stopped: false,
    };
    let mut routes = vec![Vec::new(); nk];
    let mut count = vec![0u32; inst.num_customers() + 1];
    search.routes(0, &mut routes, &mut count);

    let Search {
        best,
        best_value,
        mut stats,
        stopped,
        ..
    } = search;
    stats.elapsed = started.elapsed();
    let (status, lower_bound) = if stopped {
        (SolveStatus::FeasibleLimit, root.min(best_value))
    } else {
        (SolveStatus::Optimal, best_value)
    };
    Ok(SolveResult {
        best: Some(best),
        status,
        stats,
        lower_bound,
    })
}

struct Search<'a> {
    ctx: &'a Ctx<'a>,
    limits: &'a SearchLimits,
    started: Instant,
    best: (Solution, Schedule),
    best_value: f64,
    stats: SearchStats,
    stopped: bool,
}

/// `a < b` at their first differing position.
fn differs_lower(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

impl Search<'_> {
    /// Counts a node and reports whether a limit stops the search.
    fn tick(&mut self) -> bool {
        self.stats.nodes += 1;
        if self.stats.nodes >= self.limits.max_nodes
            || (self.stats.nodes.is_multiple_of(256) && self.started.elapsed() >= self.limits.max_time)
        {
            self.stopped = true;
        }
        self.stopped
    }

    fn prune(&mut self, lb: f64) -> bool {
        if self.limits.pruning && lb >= self.best_value - INCUMBENT_EPS {
            self.stats.pruned += 1;
            return true;
        }
        false
    }

    /// Builds route `k` by appending customers or closing it. Routes are kept
    /// in nondecreasing lexicographic order with empty routes last.
    fn routes(&mut self, k: usize, routes: &mut Vec<Vec<usize>>, count: &mut Vec<u32>) {
        if self.tick() {
            return;
        }
        let nk = routes.len();
        let nv = count.len() - 1;
        let closed: Vec<bool> = (0..nk).map(|i| i < k).collect();
        if self.prune(self.ctx.route_bound(routes, &closed)) {
            return;
        }
        let covered = count[1..].iter().all(|&c| c > 0);
        if k == nk {
            if covered {
                self.flows(routes);
            }
            return;
        }
        for c in 1..=nv {
            let taken = if self.ctx.split {
                routes[k].contains(&c)
            } else {
                count[c] > 0
            };
            if taken {
                continue;
            }
            routes[k].push(c);
            if k == 0 || !differs_lower(&routes[k], &routes[k - 1]) {
                count[c] += 1;
                self.routes(k, routes, count);
                count[c] -= 1;
            }
            routes[k].pop();
            if self.stopped {
                return;
            }
        }
        if routes[k].is_empty() {
            if covered {
                self.routes(nk, routes, count);
            }
        } else {
            let prev_ok = k == 0 || {
                let (a, b) = (&routes[k], &routes[k - 1]);
                !differs_lower(a, b) && (differs_lower(b, a) || a.len() >= b.len())
            };
            if prev_ok {
                self.routes(k + 1, routes, count);
            }
        }
    }

    fn flows(&mut self, routes: &[Vec<usize>]) {
        let mut state = FlowState::new(self.ctx, routes);
        self.place(&mut state);
    }

    fn place(&mut self, fs: &mut FlowState) {
        if fs.order.len() == fs.total {
            self.leaf(fs);
            return;
        }
        let g = self.ctx.g;
        let mut heads: Vec<(NodeId, usize)> = (0..fs.routes.len())
            .filter(|&r| fs.next[r] < fs.routes[r].len())
            .map(|r| (fs.routes[r][fs.next[r]], r))
            .collect();
        heads.sort();
        for (v, r) in heads {
            let c = g.original_of[v.0];
            let mut cands = Vec::new();
            if fs.left[0] > 0 {
                cands.push((NodeId::START, fs.left[0].min(g.gamma(NodeId::START, v))));
            }
            for &u in &fs.order {
                let cap = fs.left[u.0].min(g.gamma(u, v));
                if cap > 0 {
                    cands.push((u, cap));
                }
            }
            let mut counts = vec![0u32; cands.len()];
            self.choose(fs, v, r, &cands, &mut counts, 0, 0, self.ctx.top[c]);
            if self.stopped {
                return;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn choose(
        &mut self,
        fs: &mut FlowState,
        v: NodeId,
        r: usize,
        cands: &[(NodeId, u32)],
        counts: &mut Vec<u32>,
        idx: usize,
        total: u32,
        max_mode: u32,
    ) {
        if idx == cands.len() {
            if total >= 1 {
                self.apply(fs, v, r, cands, counts, total);
            }
            return;
        }
        let cap = cands[idx].1.min(max_mode - total);
        for n in (0..=cap).rev() {
            counts[idx] = n;
            self.choose(fs, v, r, cands, counts, idx + 1, total + n, max_mode);
            if self.stopped {
                break;
            }
        }
        counts[idx] = 0;
    }

    fn apply(&mut self, fs: &mut FlowState, v: NodeId, r: usize, cands: &[(NodeId, u32)], counts: &[u32], m: u32) {
        let g = self.ctx.g;
        let route_pred = (fs.next[r] > 0).then(|| fs.routes[r][fs.next[r] - 1]);
        // v became available right after its last-placed predecessor; every
        // copy placed since then must have a smaller index
        let avail = route_pred
            .into_iter()
            .chain(cands.iter().zip(counts).filter(|(c, &n)| n > 0 && c.0 != NodeId::START).map(|(c, _)| c.0))
            .map(|u| fs.pos[u.0] + 1)
            .max()
            .unwrap_or(0);
        if fs.order[avail..].iter().any(|u| u.0 > v.0) {
            return;
        }
        if self.tick() {
            return;
        }

        let ready = |u: NodeId| {
            if u == NodeId::START {
                g.tau(u, v)
            } else {
                fs.start[u.0] + fs.dur[u.0] + g.tau(u, v)
            }
        };
        let mut t = ready(route_pred.unwrap_or(NodeId::START));
        let mut travel = 0.0;
        for (&(u, _), &n) in cands.iter().zip(counts) {
            if n > 0 {
                t = t.max(ready(u));
                travel += f64::from(n) * g.tau(u, v);
            }
        }
        let c = g.original_of[v.0];
        let dur = if self.ctx.split && fs.multi[c] {
            0.0
        } else {
            self.ctx.service[c][m as usize]
        };

        for (&(u, _), &n) in cands.iter().zip(counts) {
            if n > 0 {
                fs.left[u.0] -= n;
                fs.arcs.push((u, v, n));
            }
        }
        let pushed = counts.iter().filter(|&&n| n > 0).count();
        fs.left[v.0] = m;
        fs.mode[v.0] = m;
        fs.start[v.0] = t;
        fs.dur[v.0] = dur;
        fs.pos[v.0] = fs.order.len();
        fs.order.push(v);
        fs.next[r] += 1;
        fs.travel += travel;
        fs.placed_of[c] += 1;

        let lb = fs.bound(self.ctx);
        if !self.prune(lb) {
            self.place(fs);
        }

        fs.placed_of[c] -= 1;
        fs.travel -= travel;
        fs.next[r] -= 1;
        fs.order.pop();
        fs.pos[v.0] = UNPLACED;
        fs.left[v.0] = 0;
        fs.mode[v.0] = 0;
        for _ in 0..pushed {
            let (u, _, n) = fs.arcs.pop().expect("pushed arc");
            fs.left[u.0] += n;
        }
    }

    fn leaf(&mut self, fs: &FlowState) {
        self.stats.leaves += 1;
        let g = self.ctx.g;
        let mut flow = SupportFlow::new();
        for &(u, v, n) in &fs.arcs {
            flow.add(u, v, n);
        }
        flow.add(NodeId::START, g.end(), fs.left[0]);
        for &u in &fs.order {
            flow.add(u, g.end(), fs.left[u.0]);
        }
        let plan = PrimaryPlan::new(fs.routes.clone());
        let mode: BTreeMap<NodeId, u32> = fs.order.iter().map(|&u| (u, fs.mode[u.0])).collect();
        let policy = g.policy;
        let found = if self.ctx.split {
            match optimize_split_times(self.ctx.inst, g, &plan, &flow, &mode) {
                Ok((services, schedule)) => Some((services, schedule)),
                Err(_) => None,
            }
        } else {
            let makespan = fs.completion();
            if makespan >= self.best_value - INCUMBENT_EPS {
                return;
            }
            let services = ServicePlan::full_service(self.ctx.inst, g, mode).expect("modes within range");
            let sol = Solution {
                plan: plan.clone(),
                flow: flow.clone(),
                services: services.clone(),
                policy,
            };
            let schedule = compute_schedule(g, &sol).expect("placement order is acyclic");
            debug_assert!((schedule.makespan - makespan).abs() <= 1e-6 * (1.0 + makespan));
            Some((services, schedule))
        };
        if let Some((services, schedule)) = found {
            if schedule.makespan < self.best_value - INCUMBENT_EPS {
                self.best_value = schedule.makespan;
                self.best = (
                    Solution {
                        plan,
                        flow,
                        services,
                        policy,
                    },
                    schedule,
                );
            }
        }
    }
}

/// Placement state for one fixed set of routes.
struct FlowState {
    routes: Vec<Vec<NodeId>>,
    next: Vec<usize>,
    order: Vec<NodeId>,
    pos: Vec<usize>,
    mode: Vec<u32>,
    /// Support vehicles currently at each node; index 0 is the depot.
    left: Vec<u32>,
    start: Vec<f64>,
    /// Exact durations, or lower bounds for copies of split customers.
    dur: Vec<f64>,
    arcs: Vec<(NodeId, NodeId, u32)>,
    travel: f64,
    total: usize,
    /// Per original customer: visited by more than one copy.
    multi: Vec<bool>,
    copies_of: Vec<usize>,
    placed_of: Vec<usize>,
    /// `suffix[r][i]`: travel plus least service from position `i` on.
    suffix: Vec<Vec<f64>>,
}

impl FlowState {
    fn new(ctx: &Ctx<'_>, routes: &[Vec<usize>]) -> Self {
        let g: &ExpandedGraph = ctx.g;
        let nv = g.num_customers;
        let mut copies_of = vec![0usize; nv + 1];
        for r in routes {
            for &c in r {
                copies_of[c] += 1;
            }
        }
        let multi: Vec<bool> = copies_of.iter().map(|&n| n > 1).collect();
        let lb_service = |c: usize| {
            if ctx.split && multi[c] {
                0.0
            } else {
                ctx.fastest[c]
            }
        };
        let suffix = routes
            .iter()
            .map(|r| {
                let mut s = vec![0.0; r.len() + 1];
                for i in (0..r.len()).rev() {
                    let prev = if i == 0 { 0 } else { r[i - 1] };
                    s[i] = s[i + 1] + ctx.inst.travel(prev, r[i]) + lb_service(r[i]);
                }
                s
            })
            .collect();
        let count = g.node_count();
        let mut left = vec![0u32; count];
        left[0] = ctx.support;
        FlowState {
            routes: routes
                .iter()
                .enumerate()
                .map(|(k, r)| r.iter().map(|&c| g.copy_of(k, c)).collect())
                .collect(),
            next: vec![0; routes.len()],
            order: Vec::new(),
            pos: vec![UNPLACED; count],
            mode: vec![0; count],
            left,
            start: vec![0.0; count],
            dur: vec![0.0; count],
            arcs: Vec::new(),
            travel: 0.0,
            total: copies_of.iter().sum(),
            multi,
            copies_of,
            placed_of: vec![0; nv + 1],
            suffix,
        }
    }

    fn completion(&self) -> f64 {
        self.order
            .iter()
            .map(|u| self.start[u.0] + self.dur[u.0])
            .fold(0.0, f64::max)
    }

    fn bound(&self, ctx: &Ctx<'_>) -> f64 {
        let g = ctx.g;
        let mut lb = self.completion();
        for (r, route) in self.routes.iter().enumerate() {
            let i = self.next[r];
            if i < route.len() {
                let base = if i == 0 {
                    0.0
                } else {
                    let u = route[i - 1];
                    self.start[u.0] + self.dur[u.0]
                };
                lb = lb.max(base + self.suffix[r][i]);
            }
        }
        let unplaced_in: f64 = self
            .routes
            .iter()
            .enumerate()
            .flat_map(|(r, route)| route[self.next[r]..].iter())
            .map(|v| ctx.min_in[g.original_of[v.0]])
            .sum();
        let support = f64::from(ctx.support);
        if ctx.split {
            let work: f64 = (1..=g.num_customers).map(|c| ctx.work[c]).sum();
            lb = lb.max((self.travel + work + unplaced_in) / support);
            // a fully placed split customer: Σ p_j (T − t_j) ≥ d
            for c in 1..=g.num_customers {
                if self.multi[c] && self.placed_of[c] == self.copies_of[c] {
                    let (mut rate, mut weighted) = (0.0, 0.0);
                    for &j in &g.identical[g.copy_of(0, c).0] {
                        if self.pos[j.0] != UNPLACED {
                            let p = ctx.prod[c][self.mode[j.0] as usize];
                            rate += p;
                            weighted += p * self.start[j.0];
                        }
                    }
                    lb = lb.max((ctx.inst.customer(c).demand + weighted) / rate);
                }
            }
        } else {
            let avail: f64 = self
                .order
                .iter()
                .map(|u| f64::from(self.left[u.0]) * (self.start[u.0] + self.dur[u.0]))
                .sum();
            let work: f64 = self
                .routes
                .iter()
                .enumerate()
                .flat_map(|(r, route)| route[self.next[r]..].iter())
                .map(|v| ctx.work[g.original_of[v.0]])
                .sum();
            lb = lb.max((avail + work + unplaced_in) / support);
        }
        lb
    }
}
