//! Builds both MILP formulations of a small instance, prints the row counts
//! per constraint family and the start of the LP file.

use std::collections::BTreeMap;

use syncvrp::graph::{build_graph, FlowMode, VariantPolicy};
use syncvrp::instance::{generate_instance, GenConfig};
use syncvrp::milp::{build_model, estimate_big_m, export_lp_file, solve_relaxation};

fn main() -> syncvrp::Result<()> {
    let inst = generate_instance(&GenConfig::new(3, 2, 4, 3))?;
    for flow in [FlowMode::Binary, FlowMode::Integer] {
        let policy = VariantPolicy::new(flow, true, false);
        let g = build_graph(&inst, policy, estimate_big_m(&inst, policy));
        let model = build_model(&inst, &g, true);
        let mut families: BTreeMap<&str, usize> = BTreeMap::new();
        for c in &model.constraints {
            *families.entry(c.family()).or_default() += 1;
        }
        println!("{policy}: {} variables, {} rows, Big-M {:.2}", model.vars.len(), model.constraints.len(), model.big_m);
        for (family, count) in &families {
            println!("  {family:<18} {count}");
        }
        println!("  root relaxation {:.3}", solve_relaxation(&model)?.objective);
        if flow == FlowMode::Integer {
            for line in export_lp_file(&model).lines().take(12) {
                println!("| {line}");
            }
        }
    }
    Ok(())
}
