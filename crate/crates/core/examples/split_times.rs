//! Splits one customer's service between two primary vehicles and lets the
//! split-time LP choose how much each visit serves.

use std::collections::BTreeMap;

use syncvrp::graph::{build_graph, NodeId, VariantPolicy};
use syncvrp::instance::{CustomerSpec, FleetConfig, Instance, Point};
use syncvrp::schedule::{optimize_split_times, PrimaryPlan, SupportFlow};

fn main() -> syncvrp::Result<()> {
    let inst = Instance::new(
        "split",
        Point::new(0.0, 0.0),
        vec![CustomerSpec::new(1, Point::new(3.0, 4.0), 40.0, 2)],
        FleetConfig {
            primary_count: 2,
            support_count: 4,
        },
    )?;
    let g = build_graph(&inst, VariantPolicy::integer(true, true), 1e3);
    let (a, b) = (g.copy_of(0, 1), g.copy_of(1, 1));
    let plan = PrimaryPlan::new(vec![vec![a], vec![b]]);
    let mut flow = SupportFlow::new();
    for (i, j, w) in [(NodeId::START, a, 2), (NodeId::START, b, 2), (a, g.end(), 2), (b, g.end(), 2)] {
        flow.add(i, j, w);
    }
    let mode: BTreeMap<NodeId, u32> = [(a, 2), (b, 2)].into();
    let (services, schedule) = optimize_split_times(&inst, &g, &plan, &flow, &mode)?;
    for j in [a, b] {
        println!("{}: mode {}, duration {:.2}", g.node_label(j), services.mode[&j], services.duration(j));
    }
    println!("makespan {:.2} (a single visit would need {:.2})", schedule.makespan, 5.0 + 40.0 + 5.0);
    Ok(())
}
