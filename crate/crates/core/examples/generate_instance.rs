//! Draws a random instance and prints its customers and JSON form.

use syncvrp::instance::{generate_instance, write_instance, GenConfig};

fn main() -> syncvrp::Result<()> {
    let config = GenConfig::new(5, 2, 4, 7);
    let inst = generate_instance(&config)?;
    println!("{} ({})", config.file_stem(), inst.label());
    for c in &inst.customers {
        let times: Vec<String> = (1..=c.max_modes)
            .map(|m| c.mode_service_time(m).map(|t| format!("{t:.1}")))
            .collect::<syncvrp::Result<_>>()?;
        println!(
            "customer {} at ({:.1}, {:.1}): demand {}, b = {}, service times by mode [{}]",
            c.id,
            c.location.x,
            c.location.y,
            c.demand,
            c.max_modes,
            times.join(", ")
        );
    }
    println!("{}", String::from_utf8_lossy(&write_instance(&inst)));
    Ok(())
}
