use std::path::Path;
use std::process::{Command, Output};

use syncvrp::bench::read_records;
use syncvrp::instance::{read_instance, write_instance, FleetConfig, Instance, Point};
use syncvrp::milp::parse_lp_file;
use syncvrp::schedule::{read_solution, write_solution};

fn syncvrp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syncvrp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_solve_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = syncvrp(
        &["gen", "--customers", "3", "--primary", "2", "--support", "3", "--seed", "7"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let file = dir.path().join("03-02-03_s7.json");
    let inst = read_instance(&std::fs::read(&file).unwrap()).unwrap();
    assert_eq!(inst.num_customers(), 3);

    for policy in ["I|N|N", "I|S|N", "I|N|S", "I|S|S"] {
        let out = syncvrp(
            &["solve", "03-02-03_s7.json", "--policy", policy, "--out", "sol.json"],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{policy}: {out:?}");
        let (sol, sched) = read_solution(&std::fs::read(dir.path().join("sol.json")).unwrap()).unwrap();
        assert_eq!(sol.policy.to_string(), policy);
        assert!(sched.unwrap().makespan > 0.0);

        let out = syncvrp(&["check", "03-02-03_s7.json", "sol.json"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{policy}: {}", stdout(&out));
        assert!(stdout(&out).contains("makespan"));
    }
}

#[test]
fn solve_empty_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = Instance::new(
        "empty",
        Point::new(50.0, 50.0),
        vec![],
        FleetConfig {
            primary_count: 1,
            support_count: 1,
        },
    )
    .unwrap();
    std::fs::write(dir.path().join("empty.json"), write_instance(&inst)).unwrap();
    let out = syncvrp(&["solve", "empty.json", "--policy", "I|N|N"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let (_, sched) = read_solution(&out.stdout).unwrap();
    assert_eq!(sched.unwrap().makespan, 0.0);
}

#[test]
fn check_rejects_a_broken_solution() {
    let dir = tempfile::tempdir().unwrap();
    syncvrp(&["gen", "--customers", "2", "--primary", "2", "--support", "2", "--seed", "1"], dir.path());
    let out = syncvrp(
        &["solve", "02-02-02_s1.json", "--policy", "I|N|N", "--out", "sol.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let out = syncvrp(&["check", "02-02-02_s1.json", "sol.json", "--policy", "I|S|S"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let (mut sol, _) = read_solution(&std::fs::read(dir.path().join("sol.json")).unwrap()).unwrap();
    for route in &mut sol.plan.routes {
        route.clear();
    }
    std::fs::write(dir.path().join("broken.json"), write_solution(&sol, None)).unwrap();
    let out = syncvrp(&["check", "02-02-02_s1.json", "broken.json"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn export_lp_writes_a_parsable_model() {
    let dir = tempfile::tempdir().unwrap();
    syncvrp(&["gen", "--customers", "2", "--primary", "2", "--support", "3", "--seed", "2"], dir.path());
    for flow in ["B", "I"] {
        let out = syncvrp(
            &["export-lp", "02-02-03_s2.json", "--flow", flow, "--switch", "--cuts", "--out", "m.lp"],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        let text = std::fs::read_to_string(dir.path().join("m.lp")).unwrap();
        let lp = parse_lp_file(&text).unwrap();
        assert!(lp.rows.iter().any(|r| r.name.starts_with("cut_route_load")));
        assert!(!lp.binaries.is_empty());
        let has_z = lp.binaries.iter().any(|v| v.starts_with("z_"));
        assert_eq!(has_z, flow == "B");
    }
}

#[test]
fn bench_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let out = syncvrp(
        &[
            "bench",
            "--customers",
            "2",
            "--primary",
            "2",
            "--instances",
            "1",
            "--time-limit",
            "30",
            "--out",
            "runs.csv",
            "--summary",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let records = read_records(&std::fs::read(dir.path().join("runs.csv")).unwrap()).unwrap();
    // four support sizes, four policies
    assert_eq!(records.len(), 16);
    assert!(records.iter().all(|r| r.makespan >= r.lower_bound - 1e-6));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mean_time_s"));

    let out = syncvrp(&["compare", "runs.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,policy,makespan,reference,relative_change"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    for row in rows.iter().filter(|r| r.contains(",I|S|S,")) {
        let change: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(change <= 1e-9, "{row}");
    }
}

#[test]
fn node_limit_exits_with_limit_code() {
    let dir = tempfile::tempdir().unwrap();
    syncvrp(&["gen", "--customers", "5", "--primary", "2", "--support", "4", "--seed", "3"], dir.path());
    let out = syncvrp(
        &["solve", "05-02-04_s3.json", "--policy", "I|S|S", "--node-limit", "20", "--out", "sol.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    assert!(dir.path().join("sol.json").exists());
}

#[test]
fn usage_and_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(syncvrp(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(syncvrp(&["solve"], dir.path()).status.code(), Some(2));
    assert_eq!(
        syncvrp(&["solve", "x.json", "--policy", "Q|N|N"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(syncvrp(&["solve", "missing.json"], dir.path()).status.code(), Some(1));
    for flag in ["--cuts", "--no-cuts"] {
        assert_eq!(syncvrp(&["solve", "missing.json", flag], dir.path()).status.code(), Some(1));
    }
    std::fs::write(dir.path().join("bad.json"), "{\"name\": 3}").unwrap();
    assert_eq!(syncvrp(&["solve", "bad.json"], dir.path()).status.code(), Some(1));
    assert_eq!(syncvrp(&["--help"], dir.path()).status.code(), Some(0));
}
