//! Solves one instance exactly under the four integer-flow policies and
//! confirms the optimum with the brute-force oracle.

use syncvrp::exact::{brute_force, solve_exact, SearchLimits};
use syncvrp::graph::{build_graph, VariantPolicy};
use syncvrp::instance::{generate_instance, GenConfig};

fn main() -> syncvrp::Result<()> {
    let inst = generate_instance(&GenConfig::new(3, 2, 3, 11))?;
    println!("instance {}", inst.name);
    for policy in VariantPolicy::integer_variants() {
        let exact = solve_exact(&inst, policy, SearchLimits::default())?;
        let oracle = brute_force(&inst, policy)?;
        let (sol, sched) = exact.best.as_ref().expect("instance is feasible");
        let g = build_graph(&inst, policy, 0.0);
        println!(
            "{policy}: makespan {:.3} ({}), {} nodes, {} pruned; brute force {:.3}",
            sched.makespan,
            exact.status.name(),
            exact.stats.nodes,
            exact.stats.pruned,
            oracle.makespan().unwrap_or(f64::NAN)
        );
        for (k, route) in sol.plan.routes.iter().enumerate() {
            let stops: Vec<String> = route
                .iter()
                .map(|j| format!("c{}(m={})", g.original_of[j.0], sol.services.mode[j]))
                .collect();
            println!("  vehicle {}: {}", k + 1, stops.join(" -> "));
        }
    }
    Ok(())
}
