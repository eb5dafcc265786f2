//! Problem data: depot, customers with mode-dependent productivity, fleet
//! sizes, and the random instance generator.
//!
//! A customer `j` has a demand `d_j` (service duration at its highest mode
//! `b_j`) and a productivity rate `p_j^m` per mode `m = 1..=b_j`. Serving the
//! whole demand in mode `m` takes `d_j / p_j^m`. The default productivity is
//! `m / b_j`, so service time is inversely proportional to the number of
//! support vehicles present.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the random generator, recorded in generated instance names.
pub const GENERATOR_ID: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Euclidean travel time between two locations.
pub fn travel_time(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Default productivity `m / b` of mode `m` at a customer with `b` modes.
pub fn default_productivity(max_modes: u32, mode: u32) -> Result<f64> {
    if mode == 0 || mode > max_modes {
        return Err(Error::Domain(format!(
            "mode {mode} outside 1..={max_modes}"
        )));
    }
    Ok(f64::from(mode) / f64::from(max_modes))
}

fn default_productivity_vec(max_modes: u32) -> Vec<f64> {
    (1..=max_modes)
        .map(|m| f64::from(m) / f64::from(max_modes))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CustomerSpec {
    /// Original customer index, `1..=|V|`.
    pub id: usize,
    pub location: Point,
    pub demand: f64,
    pub max_modes: u32,
    /// `productivity[m - 1]` is the rate of mode `m`.
    pub productivity: Vec<f64>,
}

impl CustomerSpec {
    /// Customer with the default `m / b` productivity curve.
    pub fn new(id: usize, location: Point, demand: f64, max_modes: u32) -> Self {
        CustomerSpec {
            id,
            location,
            demand,
            max_modes,
            productivity: default_productivity_vec(max_modes),
        }
    }

    pub fn productivity(&self, mode: u32) -> Result<f64> {
        if mode == 0 || mode > self.max_modes {
            return Err(Error::Domain(format!(
                "mode {mode} outside 1..={} at customer {}",
                self.max_modes, self.id
            )));
        }
        Ok(self.productivity[mode as usize - 1])
    }

    /// Duration of serving the full demand in `mode`.
    pub fn mode_service_time(&self, mode: u32) -> Result<f64> {
        Ok(self.demand / self.productivity(mode)?)
    }

    fn validate(&self, expected_id: usize) -> Result<()> {
        let field = |f: &str| format!("customers[{}].{f}", expected_id - 1);
        if self.id != expected_id {
            return Err(Error::validation(
                field("id"),
                format!("expected id {expected_id}, found {}", self.id),
            ));
        }
        if !(self.location.x.is_finite() && self.location.y.is_finite()) {
            return Err(Error::validation(field("loc"), "coordinates must be finite"));
        }
        if !(self.demand.is_finite() && self.demand > 0.0) {
            return Err(Error::validation(field("demand"), "demand must be positive"));
        }
        if self.max_modes == 0 {
            return Err(Error::validation(field("max_modes"), "at least one mode required"));
        }
        if self.productivity.len() != self.max_modes as usize {
            return Err(Error::validation(
                field("productivity"),
                format!(
                    "expected {} rates, found {}",
                    self.max_modes,
                    self.productivity.len()
                ),
            ));
        }
        if self
            .productivity
            .iter()
            .any(|&p| !(p.is_finite() && p > 0.0 && p <= 1.0))
        {
            return Err(Error::validation(
                field("productivity"),
                "rates must lie in (0, 1]",
            ));
        }
        if self.productivity.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                field("productivity monotone"),
                "rates must be strictly increasing in the mode",
            ));
        }
        if self.productivity[self.max_modes as usize - 1] != 1.0 {
            return Err(Error::validation(
                field("productivity"),
                "highest mode must have rate 1",
            ));
        }
        Ok(())
    }
}

/// Duration of serving `spec`'s full demand in mode `m`.
pub fn mode_service_time(spec: &CustomerSpec, mode: u32) -> Result<f64> {
    spec.mode_service_time(mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FleetConfig {
    #[serde(rename = "primary")]
    pub primary_count: usize,
    #[serde(rename = "support")]
    pub support_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    /// Shared location of the start depot and the end depot.
    pub depot: Point,
    pub customers: Vec<CustomerSpec>,
    pub fleet: FleetConfig,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        depot: Point,
        customers: Vec<CustomerSpec>,
        fleet: FleetConfig,
    ) -> Result<Self> {
        let inst = Instance {
            name: name.into(),
            depot,
            customers,
            fleet,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.depot.x.is_finite() && self.depot.y.is_finite()) {
            return Err(Error::validation("depot", "coordinates must be finite"));
        }
        if self.fleet.primary_count == 0 {
            return Err(Error::validation("fleet.primary", "at least one primary vehicle"));
        }
        if self.fleet.support_count == 0 {
            return Err(Error::validation("fleet.support", "at least one support vehicle"));
        }
        for (i, c) in self.customers.iter().enumerate() {
            c.validate(i + 1)?;
        }
        Ok(())
    }

    pub fn num_customers(&self) -> usize {
        self.customers.len()
    }

    /// Customer with original id `v` (1-based).
    pub fn customer(&self, v: usize) -> &CustomerSpec {
        &self.customers[v - 1]
    }

    /// Location of original node `v`; `0` is the depot.
    pub fn location(&self, v: usize) -> Point {
        if v == 0 {
            self.depot
        } else {
            self.customers[v - 1].location
        }
    }

    /// Travel time between original nodes (`0` = depot).
    pub fn travel(&self, a: usize, b: usize) -> f64 {
        travel_time(self.location(a), self.location(b))
    }

    /// Highest mode reachable at customer `v` given the support fleet size.
    pub fn top_mode(&self, v: usize) -> u32 {
        let b = self.customer(v).max_modes;
        b.min(u32::try_from(self.fleet.support_count).unwrap_or(u32::MAX))
    }

    /// Configuration label `|C|-|K|-|O|`, e.g. `05-02-04`.
    pub fn label(&self) -> String {
        config_label(
            self.num_customers(),
            self.fleet.primary_count,
            self.fleet.support_count,
        )
    }

    /// Same customers and depot with a different fleet.
    pub fn with_fleet(&self, primary_count: usize, support_count: usize) -> Instance {
        let mut inst = self.clone();
        inst.fleet = FleetConfig {
            primary_count,
            support_count,
        };
        inst
    }
}

pub fn config_label(customers: usize, primary: usize, support: usize) -> String {
    format!("{customers:02}-{primary:02}-{support:02}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub num_customers: usize,
    pub primary_count: usize,
    pub support_count: usize,
    pub plane_size: f64,
    /// Inclusive integer range of demands.
    pub demand_range: (u32, u32),
    /// Inclusive range of the mode count `b_j`.
    pub max_modes_range: (u32, u32),
    pub seed: u64,
}

impl GenConfig {
    pub fn new(num_customers: usize, primary_count: usize, support_count: usize, seed: u64) -> Self {
        GenConfig {
            num_customers,
            primary_count,
            support_count,
            plane_size: 100.0,
            demand_range: (20, 50),
            max_modes_range: (2, 4),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.primary_count == 0 || self.support_count == 0 {
            return Err(Error::validation("fleet", "counts must be positive"));
        }
        if !(self.plane_size.is_finite() && self.plane_size > 0.0) {
            return Err(Error::validation("plane_size", "must be positive"));
        }
        if self.demand_range.0 == 0 || self.demand_range.0 > self.demand_range.1 {
            return Err(Error::validation("demand_range", "empty or non-positive range"));
        }
        if self.max_modes_range.0 == 0 || self.max_modes_range.0 > self.max_modes_range.1 {
            return Err(Error::validation("max_modes_range", "empty or non-positive range"));
        }
        Ok(())
    }

    /// File stem used by the CLI, e.g. `05-02-04_s7`.
    pub fn file_stem(&self) -> String {
        format!(
            "{}_s{}",
            config_label(self.num_customers, self.primary_count, self.support_count),
            self.seed
        )
    }
}

/// Draws a uniform random instance. Pure function of `config`.
pub fn generate_instance(config: &GenConfig) -> Result<Instance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let size = config.plane_size;
    let point = |rng: &mut ChaCha8Rng| Point::new(rng.gen_range(0.0..=size), rng.gen_range(0.0..=size));
    let depot = point(&mut rng);
    let customers = (1..=config.num_customers)
        .map(|id| {
            let location = point(&mut rng);
            let demand = rng.gen_range(config.demand_range.0..=config.demand_range.1);
            let b = rng.gen_range(config.max_modes_range.0..=config.max_modes_range.1);
            CustomerSpec::new(id, location, f64::from(demand), b)
        })
        .collect();
    Instance::new(
        format!("{}_{GENERATOR_ID}", config.file_stem()),
        depot,
        customers,
        FleetConfig {
            primary_count: config.primary_count,
            support_count: config.support_count,
        },
    )
}

#[derive(Serialize, Deserialize)]
struct CustomerDoc {
    id: usize,
    loc: Point,
    demand: f64,
    max_modes: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    productivity: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    name: String,
    depot: Point,
    customers: Vec<CustomerDoc>,
    fleet: FleetConfig,
}

pub fn read_instance(text: &[u8]) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_slice(text)?;
    let customers = doc
        .customers
        .into_iter()
        .map(|c| CustomerSpec {
            id: c.id,
            location: c.loc,
            demand: c.demand,
            max_modes: c.max_modes,
            productivity: c
                .productivity
                .unwrap_or_else(|| default_productivity_vec(c.max_modes)),
        })
        .collect();
    Instance::new(doc.name, doc.depot, customers, doc.fleet)
}

pub fn write_instance(inst: &Instance) -> Vec<u8> {
    let doc = InstanceDoc {
        name: inst.name.clone(),
        depot: inst.depot,
        customers: inst
            .customers
            .iter()
            .map(|c| CustomerDoc {
                id: c.id,
                loc: c.location,
                demand: c.demand,
                max_modes: c.max_modes,
                productivity: (c.productivity != default_productivity_vec(c.max_modes))
                    .then(|| c.productivity.clone()),
            })
            .collect(),
        fleet: inst.fleet,
    };
    serde_json::to_vec_pretty(&doc).expect("instance serialization is infallible")
}
