//! LEACH, SEP and DBCP election rules and nearest-head cluster formation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::election::{dbcp_threshold, sep_threshold, EligibilityState, TierProbabilities};
use crate::error::{Error, Result};
use crate::model::Node;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    /// Same probability for every node, heterogeneity ignored.
    Leach,
    /// Tier-weighted probabilities.
    Sep,
    /// Tier-weighted probabilities scaled by distance to the base station.
    Dbcp,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [ProtocolKind::Leach, ProtocolKind::Sep, ProtocolKind::Dbcp];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Leach => "leach",
            ProtocolKind::Sep => "sep",
            ProtocolKind::Dbcp => "dbcp",
        }
    }

    /// Per-tier probabilities this protocol actually draws with.
    pub fn effective_probabilities(self, weighted: &TierProbabilities, p_opt: f64) -> TierProbabilities {
        match self {
            ProtocolKind::Leach => TierProbabilities::uniform(p_opt),
            ProtocolKind::Sep | ProtocolKind::Dbcp => *weighted,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "leach" => Ok(ProtocolKind::Leach),
            "sep" => Ok(ProtocolKind::Sep),
            "dbcp" => Ok(ProtocolKind::Dbcp),
            other => Err(Error::invalid(
                "protocol",
                format!("`{other}` is not one of leach, sep, dbcp"),
            )),
        }
    }
}

/// Round-invariant inputs to the election of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectionContext {
    pub protocol: ProtocolKind,
    pub probs: TierProbabilities,
    pub p_opt: f64,
    pub d_avg: f64,
    pub eligibility: EligibilityState,
}

impl ElectionContext {
    pub fn new(protocol: ProtocolKind, weighted: TierProbabilities, p_opt: f64, d_avg: f64) -> Self {
        let effective = protocol.effective_probabilities(&weighted, p_opt);
        Self {
            protocol,
            probs: weighted,
            p_opt,
            d_avg,
            eligibility: EligibilityState::new(&effective),
        }
    }
}

pub fn threshold_for(ctx: &ElectionContext, node: &Node, r: u64) -> f64 {
    let eligible = ctx.eligibility.is_eligible(node, r);
    match ctx.protocol {
        ProtocolKind::Leach => sep_threshold(ctx.p_opt, r, eligible),
        ProtocolKind::Sep => sep_threshold(ctx.probs.for_tier(node.tier), r, eligible),
        ProtocolKind::Dbcp => dbcp_threshold(
            ctx.probs.for_tier(node.tier),
            r,
            eligible,
            node.distance_to_bs,
            ctx.d_avg,
        ),
    }
}

/// Draws one uniform number per alive node in ascending id order and
/// returns the ids whose draw fell below their threshold. Node state is not
/// touched.
pub fn draw_heads<R: Rng + ?Sized>(ctx: &ElectionContext, nodes: &[Node], r: u64, rng: &mut R) -> Vec<usize> {
    let mut heads = Vec::new();
    for node in nodes.iter().filter(|n| n.alive) {
        let draw: f64 = rng.gen();
        if draw < threshold_for(ctx, node, r) {
            heads.push(node.id);
        }
    }
    heads
}

/// [`draw_heads`], then records round `r` as the last election of every
/// head so it sits out the rest of its tier epoch.
pub fn elect_heads<R: Rng + ?Sized>(
    ctx: &ElectionContext,
    nodes: &mut [Node],
    r: u64,
    rng: &mut R,
) -> Vec<usize> {
    let heads = draw_heads(ctx, nodes, r, rng);
    for &id in &heads {
        nodes[id].last_elected_round = Some(r);
    }
    heads
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub head: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub clusters: Vec<Cluster>,
    /// Alive nodes left without a head; only populated when no head exists.
    pub unclustered: Vec<usize>,
}

impl ClusterAssignment {
    pub fn head_count(&self) -> usize {
        self.clusters.len()
    }
}

/// Every alive non-head joins its nearest head, ties going to the lower
/// head id. Heads are expected to be alive.
pub fn form_clusters(nodes: &[Node], heads: &[usize]) -> ClusterAssignment {
    let mut heads = heads.to_vec();
    heads.sort_unstable();
    heads.dedup();

    if heads.is_empty() {
        return ClusterAssignment {
            clusters: Vec::new(),
            unclustered: nodes.iter().filter(|n| n.alive).map(|n| n.id).collect(),
        };
    }

    let mut clusters: Vec<Cluster> = heads
        .iter()
        .map(|&head| Cluster {
            head,
            members: Vec::new(),
        })
        .collect();

    for node in nodes.iter().filter(|n| n.alive) {
        if heads.binary_search(&node.id).is_ok() {
            continue;
        }
        let mut best = 0;
        let mut best_distance = f64::INFINITY;
        for (slot, &head) in heads.iter().enumerate() {
            let d = node.distance_to(&nodes[head]);
            if d < best_distance {
                best = slot;
                best_distance = d;
            }
        }
        clusters[best].members.push(node.id);
    }

    ClusterAssignment {
        clusters,
        unclustered: Vec::new(),
    }
}
