//! Expanded graph: every original customer is duplicated once per primary
//! vehicle, so primary vehicle `k` owns its own copy set `C_k`. Copy of
//! customer `v` for vehicle `k` (0-based) is node `k * |V| + v`; node `0` is
//! the start depot and `n = |V| * |K| + 1` the end depot.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const START: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowMode {
    /// One binary flow per support vehicle.
    Binary,
    /// Aggregated integer flow of all support vehicles.
    Integer,
}

/// Flow representation plus the switching and splitting policies, rendered
/// as `F|S|S` (e.g. `I|S|N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariantPolicy {
    pub flow: FlowMode,
    pub switch_allowed: bool,
    pub split_allowed: bool,
}

impl VariantPolicy {
    pub const fn new(flow: FlowMode, switch_allowed: bool, split_allowed: bool) -> Self {
        VariantPolicy {
            flow,
            switch_allowed,
            split_allowed,
        }
    }

    pub const fn integer(switch_allowed: bool, split_allowed: bool) -> Self {
        Self::new(FlowMode::Integer, switch_allowed, split_allowed)
    }

    /// `I|N|N`, `I|N|S`, `I|S|N`, `I|S|S`.
    pub fn integer_variants() -> [VariantPolicy; 4] {
        [
            Self::integer(false, false),
            Self::integer(false, true),
            Self::integer(true, false),
            Self::integer(true, true),
        ]
    }

    pub fn all() -> Vec<VariantPolicy> {
        let mut out = Vec::with_capacity(8);
        for flow in [FlowMode::Binary, FlowMode::Integer] {
            for switch in [false, true] {
                for split in [false, true] {
                    out.push(Self::new(flow, switch, split));
                }
            }
        }
        out
    }

    pub fn with_flow(self, flow: FlowMode) -> Self {
        VariantPolicy { flow, ..self }
    }

    /// Same switching and splitting rules, regardless of flow encoding.
    pub fn same_rules(self, other: VariantPolicy) -> bool {
        self.switch_allowed == other.switch_allowed && self.split_allowed == other.split_allowed
    }
}

impl fmt::Display for VariantPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |b: bool| if b { 'S' } else { 'N' };
        let flow = match self.flow {
            FlowMode::Binary => 'B',
            FlowMode::Integer => 'I',
        };
        write!(
            f,
            "{flow}|{}|{}",
            flag(self.switch_allowed),
            flag(self.split_allowed)
        )
    }
}

impl FromStr for VariantPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split('|').map(str::trim).collect();
        let bad = || Error::Domain(format!("policy `{s}` is not of the form F|S|S, e.g. I|S|N"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let flow = match parts[0] {
            "B" | "b" => FlowMode::Binary,
            "I" | "i" => FlowMode::Integer,
            _ => return Err(bad()),
        };
        let flag = |p: &str| match p {
            "S" | "s" => Ok(true),
            "N" | "n" => Ok(false),
            _ => Err(bad()),
        };
        Ok(VariantPolicy::new(flow, flag(parts[1])?, flag(parts[2])?))
    }
}

impl Serialize for VariantPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VariantPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcData {
    pub tau: f64,
    /// Maximum number of support vehicles allowed on the arc.
    pub gamma: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedGraph {
    pub policy: VariantPolicy,
    pub num_customers: usize,
    pub num_primary: usize,
    pub num_support: usize,
    /// `copies[k]` is `C_k` in customer order.
    pub copies: Vec<Vec<NodeId>>,
    /// Owning primary vehicle per node (`None` for the depots).
    pub owner: Vec<Option<usize>>,
    /// Original customer id per node (`0` for the depots).
    pub original_of: Vec<usize>,
    /// Identical-node sets `N̄_j` (empty for the depots).
    pub identical: Vec<Vec<NodeId>>,
    /// Related-node sets `Ñ_j`: `N̄_j` without splitting, `{j}` with it.
    pub related: Vec<Vec<NodeId>>,
    /// Mode count `b` of the original customer per node (`0` for depots).
    pub max_modes: Vec<u32>,
    /// Dense `(n+1) x (n+1)` arc table.
    arcs: Vec<Option<ArcData>>,
    pub big_m: f64,
}

impl ExpandedGraph {
    pub fn node_count(&self) -> usize {
        self.num_customers * self.num_primary + 2
    }

    pub fn end(&self) -> NodeId {
        NodeId(self.node_count() - 1)
    }

    pub fn is_customer(&self, j: NodeId) -> bool {
        j.0 != 0 && j.0 < self.node_count() - 1
    }

    /// Copy of original customer `v` (1-based) owned by vehicle `k` (0-based).
    pub fn copy_of(&self, k: usize, v: usize) -> NodeId {
        NodeId(k * self.num_customers + v)
    }

    pub fn customer_nodes(&self) -> impl Iterator<Item = NodeId> {
        (1..self.node_count() - 1).map(NodeId)
    }

    pub fn arc(&self, i: NodeId, j: NodeId) -> Option<ArcData> {
        let n = self.node_count();
        if i.0 >= n || j.0 >= n {
            return None;
        }
        self.arcs[i.0 * n + j.0]
    }

    pub fn has_arc(&self, i: NodeId, j: NodeId) -> bool {
        self.arc(i, j).is_some()
    }

    /// Travel time of an arc; panics if the arc does not exist.
    pub fn tau(&self, i: NodeId, j: NodeId) -> f64 {
        self.arc(i, j)
            .unwrap_or_else(|| panic!("no arc ({i}, {j})"))
            .tau
    }

    /// Support-vehicle capacity; `0` for pairs that are not arcs.
    pub fn gamma(&self, i: NodeId, j: NodeId) -> u32 {
        self.arc(i, j).map_or(0, |a| a.gamma)
    }

    /// All arcs in `(i, j)` lexicographic order.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId, ArcData)> + '_ {
        let n = self.node_count();
        self.arcs
            .iter()
            .enumerate()
            .filter_map(move |(idx, a)| a.map(|a| (NodeId(idx / n), NodeId(idx % n), a)))
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.iter().filter(|a| a.is_some()).count()
    }

    /// `N_k = {0} ∪ C_k ∪ {n}` membership.
    pub fn in_vehicle_nodes(&self, k: usize, j: NodeId) -> bool {
        j.0 == 0 || j == self.end() || self.owner[j.0] == Some(k)
    }

    /// Arcs leaving a copy of one vehicle into a copy of another.
    pub fn is_cross_fleet(&self, i: NodeId, j: NodeId) -> bool {
        match (self.owner[i.0], self.owner.get(j.0).copied().flatten()) {
            (Some(a), Some(b)) => a != b,
            _ => false,
        }
    }

    /// Short node label for variable names: `n` for the end depot.
    pub fn node_label(&self, j: NodeId) -> String {
        if j == self.end() {
            "n".to_string()
        } else {
            j.0.to_string()
        }
    }
}

/// Builds the expanded graph of `inst` under `policy`.
pub fn build_graph(inst: &Instance, policy: VariantPolicy, big_m: f64) -> ExpandedGraph {
    let nv = inst.num_customers();
    let nk = inst.fleet.primary_count;
    let no = inst.fleet.support_count;
    let count = nv * nk + 2;
    let end = count - 1;

    let mut owner = vec![None; count];
    let mut original_of = vec![0; count];
    let mut max_modes = vec![0; count];
    let copies: Vec<Vec<NodeId>> = (0..nk)
        .map(|k| (1..=nv).map(|v| NodeId(k * nv + v)).collect())
        .collect();
    for (k, ck) in copies.iter().enumerate() {
        for (v0, &j) in ck.iter().enumerate() {
            owner[j.0] = Some(k);
            original_of[j.0] = v0 + 1;
            max_modes[j.0] = inst.customers[v0].max_modes;
        }
    }

    let mut identical = vec![Vec::new(); count];
    for j in 1..end {
        let v = original_of[j];
        identical[j] = (0..nk).map(|k| NodeId(k * nv + v)).collect();
    }
    let related = identical
        .iter()
        .enumerate()
        .map(|(j, set)| {
            if policy.split_allowed && !set.is_empty() {
                vec![NodeId(j)]
            } else {
                set.clone()
            }
        })
        .collect();

    let no_u32 = u32::try_from(no).unwrap_or(u32::MAX);
    let mut arcs = vec![None; count * count];
    for i in 0..end {
        for j in 1..count {
            if i == j || (i != 0 && j != end && original_of[i] == original_of[j]) {
                continue;
            }
            let tau = if j == end {
                0.0
            } else {
                inst.travel(original_of[i], original_of[j])
            };
            let cross = matches!((owner[i], owner[j]), (Some(a), Some(b)) if a != b);
            let gamma = if cross && !policy.switch_allowed {
                0
            } else if j == end {
                no_u32
            } else {
                no_u32.min(max_modes[j])
            };
            arcs[i * count + j] = Some(ArcData { tau, gamma });
        }
    }

    ExpandedGraph {
        policy,
        num_customers: nv,
        num_primary: nk,
        num_support: no,
        copies,
        owner,
        original_of,
        identical,
        related,
        max_modes,
        arcs,
        big_m,
    }
}

/// Arcs `(i, j)` with `i ∈ C_k`, `j ∉ C_k`, `j ≠ n`.
pub fn cross_fleet_arcs(g: &ExpandedGraph) -> Vec<(NodeId, NodeId)> {
    g.arcs()
        .filter(|&(i, j, _)| g.is_cross_fleet(i, j))
        .map(|(i, j, _)| (i, j))
        .collect()
}
