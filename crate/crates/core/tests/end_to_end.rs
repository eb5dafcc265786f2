use std::collections::HashMap;

use syncvrp::exact::{brute_force, construction_heuristic, solve_exact, SearchLimits, SolveStatus};
use syncvrp::graph::{build_graph, FlowMode, VariantPolicy};
use syncvrp::instance::{generate_instance, read_instance, write_instance, GenConfig};
use syncvrp::milp::{build_model, encode_solution, estimate_big_m, export_lp_file, parse_lp_file};
use syncvrp::schedule::{check_feasibility, compute_schedule, read_solution, write_solution};

#[test]
fn solved_instance_survives_every_representation() {
    let inst = generate_instance(&GenConfig::new(4, 2, 3, 21)).unwrap();
    let inst = read_instance(&write_instance(&inst)).unwrap();
    for policy in VariantPolicy::integer_variants() {
        let result = solve_exact(&inst, policy, SearchLimits::unlimited()).unwrap();
        assert_eq!(result.status, SolveStatus::Optimal);
        let (sol, sched) = result.best.unwrap();

        let (sol, stored) = read_solution(&write_solution(&sol, Some(&sched))).unwrap();
        assert_eq!(stored.as_ref(), Some(&sched));

        let g = build_graph(&inst, policy, sched.makespan);
        let report = check_feasibility(&inst, &g, &sol);
        assert!(report.is_feasible(), "{policy}: {:?}", report.failed());
        if !policy.split_allowed {
            assert_eq!(compute_schedule(&g, &sol).unwrap().makespan, sched.makespan);
        }

        for flow in [FlowMode::Binary, FlowMode::Integer] {
            let policy = policy.with_flow(flow);
            let g = build_graph(&inst, policy, estimate_big_m(&inst, policy).max(sched.makespan));
            let model = build_model(&inst, &g, true);
            let sol = syncvrp::schedule::Solution { policy, ..sol.clone() };
            let a = encode_solution(&model, &sol, &sched).unwrap();
            let values: HashMap<String, f64> = model
                .vars
                .iter()
                .zip(&model.names)
                .map(|(v, name)| (name.clone(), a[&v.kind]))
                .collect();
            let parsed = parse_lp_file(&export_lp_file(&model)).unwrap();
            assert_eq!(parsed.rows.len(), model.constraints.len());
            for row in &parsed.rows {
                let violation = row.violation(&values).expect("every variable is declared");
                assert!(violation <= 1e-6, "{policy} {}: {violation}", row.name);
            }
        }
    }
}

#[test]
fn heuristic_never_beats_the_oracle() {
    for seed in 0..50u64 {
        let (n, k, o) = (1 + seed as usize % 3, 1 + seed as usize / 3 % 2, 1 + seed as usize / 6 % 2);
        let inst = generate_instance(&GenConfig::new(n, k, o, 300 + seed)).unwrap();
        for policy in VariantPolicy::integer_variants() {
            let heuristic = construction_heuristic(&inst, policy).unwrap().1.makespan;
            let optimum = brute_force(&inst, policy).unwrap().makespan().unwrap();
            assert!(optimum <= heuristic + 1e-9, "{} {policy}: {optimum} > {heuristic}", inst.name);
        }
    }
}

#[test]
fn solves_are_deterministic() {
    let inst = generate_instance(&GenConfig::new(4, 2, 3, 8)).unwrap();
    for policy in VariantPolicy::integer_variants() {
        let a = solve_exact(&inst, policy, SearchLimits::unlimited()).unwrap();
        let b = solve_exact(&inst, policy, SearchLimits::unlimited()).unwrap();
        assert_eq!(a.makespan(), b.makespan());
        assert_eq!(a.stats.nodes, b.stats.nodes);
        assert_eq!(a.best.unwrap().0, b.best.unwrap().0);
    }
}

#[test]
fn limits_keep_a_valid_incumbent() {
    let inst = generate_instance(&GenConfig::new(6, 2, 4, 4)).unwrap();
    let policy = VariantPolicy::integer(true, true);
    let limits = SearchLimits {
        max_nodes: 200,
        ..SearchLimits::default()
    };
    let result = solve_exact(&inst, policy, limits).unwrap();
    assert_eq!(result.status, SolveStatus::FeasibleLimit);
    let (sol, sched) = result.best.unwrap();
    assert!(result.lower_bound <= sched.makespan);
    let g = build_graph(&inst, policy, sched.makespan);
    assert!(check_feasibility(&inst, &g, &sol).is_feasible());
}
