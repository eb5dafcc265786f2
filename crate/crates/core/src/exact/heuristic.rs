use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{build_graph, NodeId, VariantPolicy};
use crate::instance::Instance;
use crate::schedule::{compute_schedule, PrimaryPlan, Schedule, ServicePlan, Solution, SupportFlow};

/// Nearest-neighbour routes with a fixed support group per primary vehicle.
///
/// `min(|K|, |O|, |V|)` primary vehicles are used and the support vehicles are
/// split among them as evenly as possible. The vehicle with the earliest
/// current time moves to its nearest unserved customer; its group serves it in
/// mode `min(group size, b)` while the rest of the group moves on to the next
/// customer directly. Uses neither switching nor splitting, so the result is
/// feasible under every policy.
pub fn construction_heuristic(inst: &Instance, policy: VariantPolicy) -> Result<(Solution, Schedule)> {
    let g = build_graph(inst, policy, 0.0);
    let nv = inst.num_customers();
    let nk = inst.fleet.primary_count;
    let no = inst.fleet.support_count;
    if no == 0 {
        return Err(Error::Infeasible("no support vehicles".into()));
    }
    let active = nk.min(no).min(nv);
    let end = g.end();
    let mut routes = vec![Vec::new(); nk];
    let mut flow = SupportFlow::new();
    let mut mode = BTreeMap::new();
    if active == 0 {
        flow.add(NodeId::START, end, u32::try_from(no).unwrap_or(u32::MAX));
    }

    // slot positions of each active group
    let mut slots: Vec<Vec<NodeId>> = (0..active)
        .map(|k| vec![NodeId::START; no / active + usize::from(k < no % active)])
        .collect();
    let mut clock = vec![0.0f64; active];
    let mut at = vec![0usize; active];
    let mut served = vec![false; nv + 1];
    for _ in 0..nv {
        let k = (0..active)
            .min_by(|&a, &b| clock[a].total_cmp(&clock[b]).then(a.cmp(&b)))
            .expect("at least one active vehicle");
        let c = (1..=nv)
            .filter(|&c| !served[c])
            .min_by(|&a, &b| inst.travel(at[k], a).total_cmp(&inst.travel(at[k], b)).then(a.cmp(&b)))
            .expect("an unserved customer remains");
        served[c] = true;
        let spec = inst.customer(c);
        let m = u32::try_from(slots[k].len()).unwrap_or(u32::MAX).min(spec.max_modes);
        let copy = g.copy_of(k, c);
        for slot in slots[k].iter_mut().take(m as usize) {
            flow.add(*slot, copy, 1);
            *slot = copy;
        }
        clock[k] += inst.travel(at[k], c) + spec.mode_service_time(m)?;
        at[k] = c;
        routes[k].push(copy);
        mode.insert(copy, m);
    }
    for group in &slots {
        for &slot in group {
            flow.add(slot, end, 1);
        }
    }

    let sol = Solution {
        plan: PrimaryPlan::new(routes),
        flow,
        services: ServicePlan::full_service(inst, &g, mode)?,
        policy,
    };
    let schedule = compute_schedule(&g, &sol)?;
    Ok((sol, schedule))
}
