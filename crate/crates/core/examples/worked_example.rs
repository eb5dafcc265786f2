//! The five-customer worked example: service-time tables, the expanded graph
//! and a feasibility check of the drawn solution under two policies.

use syncvrp::fixtures::{worked_example_instance, worked_example_solution};
use syncvrp::graph::{build_graph, VariantPolicy};
use syncvrp::schedule::check_feasibility;

fn main() -> syncvrp::Result<()> {
    let inst = worked_example_instance();
    for c in &inst.customers {
        let times: Vec<String> = (1..=c.max_modes)
            .map(|m| c.mode_service_time(m).map(|t| format!("{t:.2}")))
            .collect::<syncvrp::Result<_>>()?;
        println!("customer {}: {}", c.id, times.join(" / "));
    }

    for policy in [VariantPolicy::integer(true, false), VariantPolicy::integer(false, false)] {
        let g = build_graph(&inst, policy, 1e4);
        println!("\n{policy}: {} nodes, {} arcs", g.node_count(), g.arc_count());
        let sol = worked_example_solution(&inst, &g);
        let report = check_feasibility(&inst, &g, &sol);
        for entry in &report.entries {
            let verdict = if entry.passed() { "ok" } else { "violated" };
            println!("  {:<16} {verdict}", entry.family.name());
        }
        match &report.schedule {
            Some(s) => {
                for (j, t) in &s.start {
                    println!("  start {:<6} {t:8.2}", g.node_label(*j));
                }
                println!("  makespan {:.2}", s.makespan);
            }
            None => println!("  no schedule"),
        }
    }
    Ok(())
}
