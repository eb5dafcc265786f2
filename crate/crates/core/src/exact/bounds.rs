use crate::graph::ExpandedGraph;
use crate::instance::Instance;

use super::Ctx;

/// Route prefixes fixed so far. `routes[k]` lists original customer ids in
/// visiting order; a closed route receives no further customers, an open one
/// may only be extended at its end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialState {
    pub routes: Vec<Vec<usize>>,
    pub closed: Vec<bool>,
}

impl PartialState {
    pub fn empty(primary: usize) -> Self {
        PartialState {
            routes: vec![Vec::new(); primary],
            closed: vec![false; primary],
        }
    }
}

/// Admissible lower bound on the best makespan of any completion of `state`;
/// `+∞` when no completion exists.
pub fn partial_lower_bound(inst: &Instance, g: &ExpandedGraph, state: &PartialState) -> f64 {
    Ctx::new(inst, g).route_bound(&state.routes, &state.closed)
}

impl Ctx<'_> {
    /// Maximum of the per-route chain, the aggregate primary workload, the
    /// aggregate support workload and the single-customer bounds.
    pub(crate) fn route_bound(&self, routes: &[Vec<usize>], closed: &[bool]) -> f64 {
        let nv = self.inst.num_customers();
        let nk = routes.len();
        let mut covered = vec![false; nv + 1];
        let mut lb = 0.0f64;
        let mut open = 0usize;
        let mut open_chain = 0.0;
        let mut travel_all = 0.0;
        let mut arrivals = 0.0;
        for (k, route) in routes.iter().enumerate() {
            let mut prev = 0;
            let mut travel = 0.0;
            let mut service = 0.0;
            for &c in route {
                travel += self.inst.travel(prev, c);
                if !self.split {
                    service += self.fastest[c];
                }
                arrivals += self.min_in[c];
                covered[c] = true;
                prev = c;
            }
            let chain = travel + service;
            lb = lb.max(chain);
            travel_all += travel;
            if !closed[k] {
                open += 1;
                open_chain += chain;
            }
        }
        let unassigned: Vec<usize> = (1..=nv).filter(|&c| !covered[c]).collect();
        if !unassigned.is_empty() && open == 0 {
            return f64::INFINITY;
        }
        let future_in: f64 = unassigned.iter().map(|&c| self.min_in[c]).sum();
        if self.split {
            let service: f64 = (1..=nv).map(|c| self.fastest[c]).sum();
            lb = lb.max((travel_all + service + future_in) / nk as f64);
        } else if open > 0 {
            let future: f64 = unassigned.iter().map(|&c| self.fastest[c]).sum();
            lb = lb.max((open_chain + future + future_in) / open as f64);
        }
        let work: f64 = (1..=nv).map(|c| self.work[c]).sum();
        lb = lb.max((work + arrivals + future_in) / f64::from(self.support));
        for c in 1..=nv {
            let service = if self.split {
                self.inst.customer(c).demand / self.rmax[c]
            } else {
                self.fastest[c]
            };
            lb = lb.max(self.inst.travel(0, c) + service);
        }
        lb
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_force_completion;
    use crate::graph::{build_graph, VariantPolicy};
    use crate::instance::{generate_instance, GenConfig};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_state_covers_each_customer_trip() {
        let inst = generate_instance(&GenConfig::new(3, 2, 2, 1)).unwrap();
        let policy = VariantPolicy::integer(true, false);
        let g = build_graph(&inst, policy, 0.0);
        let lb = partial_lower_bound(&inst, &g, &PartialState::empty(2));
        for c in 1..=3 {
            let spec = inst.customer(c);
            let fastest = spec.mode_service_time(spec.max_modes.min(2)).unwrap();
            assert!(lb >= inst.travel(0, c) + fastest - 1e-9);
        }
    }

    #[test]
    fn closed_state_missing_customers_is_infinite() {
        let inst = generate_instance(&GenConfig::new(2, 1, 2, 3)).unwrap();
        let g = build_graph(&inst, VariantPolicy::integer(false, false), 0.0);
        let state = PartialState {
            routes: vec![vec![1]],
            closed: vec![true],
        };
        assert_eq!(partial_lower_bound(&inst, &g, &state), f64::INFINITY);
    }

    #[test]
    fn bound_never_exceeds_best_completion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40u64 {
            let (n, k, o) = (rng.gen_range(1..=3), rng.gen_range(1..=2), rng.gen_range(1..=2));
            let inst = generate_instance(&GenConfig::new(n, k, o, trial)).unwrap();
            let policy = VariantPolicy::integer_variants()[trial as usize % 4];
            let g = build_graph(&inst, policy, 0.0);
            let mut customers: Vec<usize> = (1..=n).collect();
            customers.shuffle(&mut rng);
            let mut state = PartialState::empty(k);
            for c in customers.into_iter().take(rng.gen_range(0..=n)) {
                state.routes[rng.gen_range(0..k)].push(c);
            }
            for closed in &mut state.closed {
                *closed = rng.gen_bool(0.3);
            }
            let lb = partial_lower_bound(&inst, &g, &state);
            if let Some(best) = brute_force_completion(&inst, policy, &state).unwrap() {
                assert!(lb <= best + 1e-9, "{state:?}: {lb} > {best}");
            }
        }
    }
}
