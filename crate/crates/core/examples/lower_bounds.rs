//! Compares the search's lower bound on a few partial route states with the
//! best completion found by exhaustive enumeration.

use syncvrp::exact::{brute_force_completion, partial_lower_bound, PartialState};
use syncvrp::graph::{build_graph, VariantPolicy};
use syncvrp::instance::{generate_instance, GenConfig};

fn main() -> syncvrp::Result<()> {
    let inst = generate_instance(&GenConfig::new(3, 2, 2, 5))?;
    let policy = VariantPolicy::integer(true, false);
    let g = build_graph(&inst, policy, 0.0);
    let states = [
        PartialState::empty(2),
        PartialState {
            routes: vec![vec![1], vec![]],
            closed: vec![false, false],
        },
        PartialState {
            routes: vec![vec![1, 2], vec![3]],
            closed: vec![false, true],
        },
        PartialState {
            routes: vec![vec![3, 2, 1], vec![]],
            closed: vec![true, true],
        },
    ];
    for state in &states {
        let lb = partial_lower_bound(&inst, &g, state);
        let best = brute_force_completion(&inst, policy, state)?;
        println!(
            "{:?} closed {:?}: bound {:.2}, best completion {}",
            state.routes,
            state.closed,
            lb,
            best.map_or("none".to_string(), |b| format!("{b:.2}"))
        );
    }
    Ok(())
}
