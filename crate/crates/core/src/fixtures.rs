//! The five-customer, two-primary, four-support example used throughout the
//! tests and examples.

use crate::graph::{ExpandedGraph, NodeId};
use crate::instance::{CustomerSpec, FleetConfig, Instance, Point};
use crate::schedule::{PrimaryPlan, ServicePlan, Solution, SupportFlow};

/// Demands and mode counts reproduce the service-time tables of the example;
/// coordinates are the drawing positions scaled by ten.
pub fn worked_example_instance() -> Instance {
    let c = |id, x, y, d, b| CustomerSpec::new(id, Point::new(x * 10.0, y * 10.0), d, b);
    Instance::new(
        "worked-example",
        Point::new(36.587_566_928_488_315, 47.679_291_091_494_63),
        vec![
            c(1, 5.278_166_920_551_097, 3.525_966_131_686_03, 44.0, 3),
            c(2, 0.955_688_582_726_976, 6.297_792_780_330_559, 30.0, 2),
            c(3, 4.650_874_639_515_099, 0.401_503_144_195_132_2, 23.0, 4),
            c(4, 3.108_738_485_708_708_6, 1.629_503_946_677_351_8, 43.0, 3),
            c(5, 0.133_251_102_725_058_25, 2.944_739_474_992_302_6, 31.0, 4),
        ],
        FleetConfig {
            primary_count: 2,
            support_count: 4,
        },
    )
    .expect("fixture is valid")
}

/// Vehicle 1 serves 1, 4, 3 and vehicle 2 serves 2, 5. Two support vehicles
/// follow vehicle 1 throughout, one leaves customer 2 to join vehicle 1 at
/// customer 4, and one stays with vehicle 2. Requires switching.
pub fn worked_example_solution(inst: &Instance, g: &ExpandedGraph) -> Solution {
    let v1 = |c| g.copy_of(0, c);
    let v2 = |c| g.copy_of(1, c);
    let n = g.end();
    let mut flow = SupportFlow::new();
    for (i, j, w) in [
        (NodeId::START, v1(1), 2),
        (v1(1), v1(4), 2),
        (v1(4), v1(3), 3),
        (v1(3), n, 3),
        (NodeId::START, v2(2), 2),
        (v2(2), v1(4), 1),
        (v2(2), v2(5), 1),
        (v2(5), n, 1),
    ] {
        flow.add(i, j, w);
    }
    let mode = [(v1(1), 2), (v1(4), 3), (v1(3), 3), (v2(2), 2), (v2(5), 1)].into();
    Solution {
        plan: PrimaryPlan::new(vec![vec![v1(1), v1(4), v1(3)], vec![v2(2), v2(5)]]),
        flow,
        services: ServicePlan::full_service(inst, g, mode).expect("modes are valid"),
        policy: g.policy,
    }
}
