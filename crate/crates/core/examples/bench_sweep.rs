//! Runs a small policy sweep and prints the record CSV, the summary table and
//! the comparison against I|S|N.

use std::time::Duration;

use syncvrp::bench::{compare, grid, run_suite, summarize, write_records};
use syncvrp::exact::SearchLimits;
use syncvrp::graph::VariantPolicy;
use syncvrp::instance::generate_instance;

fn main() -> syncvrp::Result<()> {
    let suite = grid(&[3], &[2], 1, 0)
        .iter()
        .map(generate_instance)
        .collect::<syncvrp::Result<Vec<_>>>()?;
    let limits = SearchLimits {
        max_time: Duration::from_secs(10),
        ..SearchLimits::default()
    };
    let records = run_suite(&suite, &VariantPolicy::integer_variants(), &limits)?;
    print!("{}", String::from_utf8_lossy(&write_records(&records)?));

    println!("\ncustomers policy  mean_time_s mean_gap optimal best");
    for row in summarize(&records) {
        println!(
            "{:>9} {}  {:>11.4} {:>8.4} {:>4}/{} {:>2}/{}",
            row.customers, row.policy, row.mean_time_s, row.mean_gap, row.optimal, row.runs, row.best, row.runs
        );
    }
    println!("\nchange vs I|S|N");
    for c in compare(&records) {
        println!("{} {}: {:+.2}%", c.instance, c.policy, 100.0 * c.relative_change);
    }
    Ok(())
}
