//! Experiment harness and command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{solve_exact, SearchLimits, SolveResult, SolveStatus};
use crate::graph::{build_graph, FlowMode, VariantPolicy};
use crate::instance::{generate_instance, read_instance, write_instance, GenConfig, Instance};
use crate::milp::{build_model, estimate_big_m, export_lp_file};
use crate::schedule::{check_feasibility, read_solution, write_solution};

/// Policy every variant is compared against.
pub const REFERENCE_POLICY: VariantPolicy = VariantPolicy {
    flow: FlowMode::Integer,
    switch_allowed: true,
    split_allowed: false,
};

/// Tolerance for ties between variants.
pub const TIE_EPS: f64 = 1e-6;

/// One solve of one instance under one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub policy: VariantPolicy,
    pub makespan: f64,
    pub lower_bound: f64,
    pub gap: f64,
    pub status: String,
    pub nodes: u64,
    pub time_s: f64,
}

impl RunRecord {
    pub fn from_result(instance: &str, policy: VariantPolicy, result: &SolveResult) -> Self {
        let makespan = result.makespan().unwrap_or(f64::INFINITY);
        let lower_bound = result.lower_bound.min(makespan);
        RunRecord {
            instance: instance.to_string(),
            policy,
            makespan,
            lower_bound,
            gap: relative_gap(makespan, lower_bound),
            status: result.status.name().to_string(),
            nodes: result.stats.nodes,
            time_s: result.stats.elapsed.as_secs_f64(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal.name()
    }

    /// Customer count parsed from the leading `|C|` of the instance label.
    pub fn customers(&self) -> Option<usize> {
        self.instance.split(['-', '_']).next()?.parse().ok()
    }
}

/// `(makespan − bound) / makespan`, 0 for a zero makespan.
pub fn relative_gap(makespan: f64, lower_bound: f64) -> f64 {
    if makespan > 0.0 {
        ((makespan - lower_bound) / makespan).max(0.0)
    } else {
        0.0
    }
}

/// Records sorted by instance and policy name, so output is stable.
pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        (a.instance.as_str(), a.policy.to_string()).cmp(&(b.instance.as_str(), b.policy.to_string()))
    });
}

pub fn write_records(records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn read_records(text: &[u8]) -> Result<Vec<RunRecord>> {
    csv::Reader::from_reader(text)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Table row aggregated over the records of one customer count and policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub customers: usize,
    pub policy: VariantPolicy,
    pub runs: usize,
    pub mean_time_s: f64,
    pub mean_gap: f64,
    pub optimal: usize,
    pub best: usize,
}

/// Mean time, mean gap, optimal count and best-solution count per customer
/// count and policy. Every variant tied for an instance's best makespan is
/// counted.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut best_of: BTreeMap<&str, f64> = BTreeMap::new();
    for r in records {
        let e = best_of.entry(r.instance.as_str()).or_insert(f64::INFINITY);
        *e = e.min(r.makespan);
    }
    let mut groups: BTreeMap<(usize, String), SummaryRow> = BTreeMap::new();
    for r in records {
        let customers = r.customers().unwrap_or(0);
        let row = groups
            .entry((customers, r.policy.to_string()))
            .or_insert(SummaryRow {
                customers,
                policy: r.policy,
                runs: 0,
                mean_time_s: 0.0,
                mean_gap: 0.0,
                optimal: 0,
                best: 0,
            });
        row.runs += 1;
        row.mean_time_s += r.time_s;
        row.mean_gap += r.gap;
        row.optimal += usize::from(r.is_optimal());
        row.best += usize::from(r.makespan <= best_of[r.instance.as_str()] + TIE_EPS);
    }
    groups
        .into_values()
        .map(|mut row| {
            row.mean_time_s /= row.runs as f64;
            row.mean_gap /= row.runs as f64;
            row
        })
        .collect()
}

/// Relative makespan change of one variant against [`REFERENCE_POLICY`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub instance: String,
    pub policy: VariantPolicy,
    pub makespan: f64,
    pub reference: f64,
    pub relative_change: f64,
}

/// One row per non-reference record whose instance was also solved under
/// the reference policy.
pub fn compare(records: &[RunRecord]) -> Vec<Comparison> {
    let reference: BTreeMap<&str, f64> = records
        .iter()
        .filter(|r| r.policy == REFERENCE_POLICY)
        .map(|r| (r.instance.as_str(), r.makespan))
        .collect();
    let mut out: Vec<Comparison> = records
        .iter()
        .filter(|r| r.policy != REFERENCE_POLICY)
        .filter_map(|r| {
            let base = *reference.get(r.instance.as_str())?;
            let change = if base > 0.0 {
                (r.makespan - base) / base
            } else {
                0.0
            };
            Some(Comparison {
                instance: r.instance.clone(),
                policy: r.policy,
                makespan: r.makespan,
                reference: base,
                relative_change: change,
            })
        })
        .collect();
    out.sort_by(|a, b| (a.instance.as_str(), a.policy.to_string()).cmp(&(b.instance.as_str(), b.policy.to_string())));
    out
}

/// Support fleet sizes paired with `primary`: `2|K| .. 2|K| + 3`.
pub fn support_sizes(primary: usize) -> Vec<usize> {
    (2 * primary..2 * primary + 4).collect()
}

/// Generator configurations for every customer count, primary fleet size and
/// its support sizes, with `instances` seeds each starting at `seed`.
pub fn grid(customers: &[usize], primary: &[usize], instances: u64, seed: u64) -> Vec<GenConfig> {
    let mut out = Vec::new();
    for &n in customers {
        for &k in primary {
            for o in support_sizes(k) {
                for s in seed..seed + instances {
                    out.push(GenConfig::new(n, k, o, s));
                }
            }
        }
    }
    out
}

/// Solves each instance under each policy.
pub fn run_suite(instances: &[Instance], policies: &[VariantPolicy], limits: &SearchLimits) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    for inst in instances {
        for &policy in policies {
            let result = solve_exact(inst, policy, limits.clone())?;
            records.push(RunRecord::from_result(&inst.name, policy, &result));
        }
    }
    sort_records(&mut records);
    Ok(records)
}

#[derive(Debug, Parser)]
#[command(name = "syncvrp", version, about = "Routing with synchronized support vehicles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance file named `CC-KK-OO_sSEED.json`.
    Gen {
        #[arg(long)]
        customers: usize,
        #[arg(long)]
        primary: usize,
        #[arg(long)]
        support: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve an instance exactly and write solution and schedule JSON.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = REFERENCE_POLICY)]
        policy: VariantPolicy,
        #[command(flatten)]
        limits: LimitArgs,
        /// Solution file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution file against an instance.
    Check {
        instance: PathBuf,
        solution: PathBuf,
        /// Policy to check under; defaults to the one stored in the solution.
        #[arg(long)]
        policy: Option<VariantPolicy>,
    },
    /// Write the MILP model of an instance in LP format.
    ExportLp {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = FlowArg::I)]
        flow: FlowArg,
        #[arg(long)]
        switch: bool,
        #[arg(long)]
        split: bool,
        #[arg(long)]
        cuts: bool,
        /// LP file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a grid of generated instances under several policies.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [5usize])]
        customers: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
        primary: Vec<usize>,
        /// Instances per configuration.
        #[arg(long, default_value_t = 5)]
        instances: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Policies to run; all four integer variants when omitted.
        #[arg(long, value_delimiter = ',')]
        policy: Vec<VariantPolicy>,
        #[command(flatten)]
        limits: LimitArgs,
        /// Record CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the per-size summary table to stderr.
        #[arg(long)]
        summary: bool,
    },
    /// Relative makespan change of each variant against I|S|N.
    Compare {
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct LimitArgs {
    /// Seconds per solve.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Disable bound-based pruning.
    #[arg(long = "no-cuts", action = clap::ArgAction::SetFalse)]
    cuts: bool,
    /// Enable bound-based pruning (default).
    #[arg(long = "cuts", overrides_with = "cuts")]
    _cuts_on: bool,
}

impl LimitArgs {
    fn limits(&self) -> Result<SearchLimits> {
        let max_time = Duration::try_from_secs_f64(self.time_limit)
            .map_err(|_| Error::validation("time-limit", "must be a nonnegative number of seconds"))?;
        Ok(SearchLimits {
            max_nodes: self.node_limit.unwrap_or(u64::MAX),
            max_time,
            incumbent: None,
            pruning: self.cuts,
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FlowArg {
    #[value(name = "B")]
    B,
    #[value(name = "I")]
    I,
}

/// Exit status of a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Done,
    Failed,
    Limit,
}

/// Runs the command line and returns the process exit code: 0 success,
/// 1 infeasible or invalid input, 2 usage error, 3 limit reached.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::Failed) => 1,
        Ok(Outcome::Limit) => 3,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    read_instance(&fs::read(path)?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Gen {
            customers,
            primary,
            support,
            seed,
            out,
        } => {
            let config = GenConfig::new(customers, primary, support, seed);
            fs::create_dir_all(&out)?;
            let inst = generate_instance(&config)?;
            let path = out.join(format!("{}.json", config.file_stem()));
            fs::write(&path, write_instance(&inst))?;
            println!("{}", path.display());
            Ok(Outcome::Done)
        }
        Command::Solve {
            instance,
            policy,
            limits,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let result = solve_exact(&inst, policy, limits.limits()?)?;
            let record = RunRecord::from_result(&inst.name, policy, &result);
            eprintln!(
                "{} {}: makespan {:.4} bound {:.4} gap {:.4} status {} nodes {} time {:.3}s",
                record.instance,
                policy,
                record.makespan,
                record.lower_bound,
                record.gap,
                record.status,
                record.nodes,
                record.time_s
            );
            match &result.best {
                Some((sol, sched)) => emit(out.as_deref(), &write_solution(sol, Some(sched)))?,
                None => return Ok(Outcome::Failed),
            }
            Ok(match result.status {
                SolveStatus::Optimal => Outcome::Done,
                SolveStatus::FeasibleLimit => Outcome::Limit,
                SolveStatus::Infeasible => Outcome::Failed,
            })
        }
        Command::Check {
            instance,
            solution,
            policy,
        } => {
            let inst = load_instance(&instance)?;
            let (mut sol, _) = read_solution(&fs::read(&solution)?)?;
            if let Some(policy) = policy {
                sol.policy = policy;
            }
            let g = build_graph(&inst, sol.policy, 0.0);
            let report = check_feasibility(&inst, &g, &sol);
            for entry in &report.entries {
                let verdict = if entry.passed() { "ok" } else { "FAIL" };
                println!("{:<16} {verdict}", entry.family.name());
                for message in &entry.violations {
                    println!("  {message}");
                }
            }
            for warning in &report.warnings {
                println!("warning: {warning}");
            }
            if let Some(schedule) = &report.schedule {
                println!("makespan {:.6}", schedule.makespan);
            }
            Ok(if report.is_feasible() {
                Outcome::Done
            } else {
                Outcome::Failed
            })
        }
        Command::ExportLp {
            instance,
            flow,
            switch,
            split,
            cuts,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let flow = match flow {
                FlowArg::B => FlowMode::Binary,
                FlowArg::I => FlowMode::Integer,
            };
            let policy = VariantPolicy::new(flow, switch, split);
            let g = build_graph(&inst, policy, estimate_big_m(&inst, policy));
            let model = build_model(&inst, &g, cuts);
            emit(out.as_deref(), export_lp_file(&model).as_bytes())?;
            Ok(Outcome::Done)
        }
        Command::Bench {
            customers,
            primary,
            instances,
            seed,
            policy,
            limits,
            out,
            summary,
        } => {
            let policies = if policy.is_empty() {
                VariantPolicy::integer_variants().to_vec()
            } else {
                policy
            };
            let suite = grid(&customers, &primary, instances, seed)
                .iter()
                .map(generate_instance)
                .collect::<Result<Vec<_>>>()?;
            let records = run_suite(&suite, &policies, &limits.limits()?)?;
            emit(out.as_deref(), &write_records(&records)?)?;
            if summary {
                eprintln!("customers,policy,runs,mean_time_s,mean_gap,optimal,best");
                for row in summarize(&records) {
                    eprintln!(
                        "{},{},{},{:.3},{:.4},{}/{},{}/{}",
                        row.customers,
                        row.policy,
                        row.runs,
                        row.mean_time_s,
                        row.mean_gap,
                        row.optimal,
                        row.runs,
                        row.best,
                        row.runs
                    );
                }
            }
            Ok(if records.iter().all(RunRecord::is_optimal) {
                Outcome::Done
            } else {
                Outcome::Limit
            })
        }
        Command::Compare { records, out } => {
            let records = read_records(&fs::read(&records)?)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in compare(&records) {
                w.serialize(row)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            emit(out.as_deref(), &bytes)?;
            Ok(Outcome::Done)
        }
    }
}
