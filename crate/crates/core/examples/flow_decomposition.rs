//! Splits the integer support flow of the worked example into one path per
//! support vehicle and composes it back.

use syncvrp::fixtures::{worked_example_instance, worked_example_solution};
use syncvrp::graph::{build_graph, VariantPolicy};
use syncvrp::schedule::{compose_flow, decompose_flow};

fn main() -> syncvrp::Result<()> {
    let inst = worked_example_instance();
    let g = build_graph(&inst, VariantPolicy::integer(true, false), 1e4);
    let sol = worked_example_solution(&inst, &g);
    let paths = decompose_flow(&g, &sol.flow)?;
    for (o, path) in paths.paths.iter().enumerate() {
        let labels: Vec<String> = path.iter().map(|&j| g.node_label(j)).collect();
        println!("support vehicle {}: {}", o + 1, labels.join(" -> "));
    }
    assert_eq!(compose_flow(&g, &paths)?, sol.flow);
    println!("paths compose back to the original flow");
    Ok(())
}
