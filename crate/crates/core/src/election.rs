//! Election probabilities and thresholds.
//!
//! Every tier has a weighted probability `p` and an epoch of `ceil(1/p)`
//! rounds. Within an epoch an eligible node's threshold climbs from `p` to
//! 1, and a node that has served as cluster head stays ineligible until its
//! tier's epoch wraps.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{HeterogeneityParams, Node, NodeTier, RadioParams};

/// Relative slack used when deciding whether `1/p` is a whole number.
const INTEGRAL_SLACK: f64 = 1e-9;

/// Weighted election probabilities for normal, advanced and super nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierProbabilities {
    pub p_n: f64,
    pub p_a: f64,
    pub p_s: f64,
}

impl TierProbabilities {
    pub fn uniform(p: f64) -> Self {
        Self {
            p_n: p,
            p_a: p,
            p_s: p,
        }
    }

    pub fn for_tier(&self, tier: NodeTier) -> f64 {
        match tier {
            NodeTier::Normal => self.p_n,
            NodeTier::Advanced => self.p_a,
            NodeTier::Super => self.p_s,
        }
    }
}

/// Per-tier epoch lengths. Eligibility is derived from each node's
/// `last_elected_round`: a node is eligible unless it was elected earlier in
/// the current epoch of its tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EligibilityState {
    epochs: [u64; 3],
}

impl EligibilityState {
    pub fn new(probs: &TierProbabilities) -> Self {
        Self {
            epochs: [
                epoch_length(probs.p_n),
                epoch_length(probs.p_a),
                epoch_length(probs.p_s),
            ],
        }
    }

    pub fn epoch(&self, tier: NodeTier) -> u64 {
        self.epochs[tier.index()]
    }

    /// Position of round `r` inside the tier's current epoch.
    pub fn epoch_position(&self, tier: NodeTier, r: u64) -> u64 {
        r % self.epoch(tier)
    }

    pub fn is_eligible(&self, node: &Node, r: u64) -> bool {
        let epoch = self.epoch(node.tier);
        match node.last_elected_round {
            None => true,
            Some(last) => last / epoch < r / epoch,
        }
    }
}

/// `1/p`, snapped to the nearest integer when within floating-point noise
/// of one (e.g. `p = 0.1 / 1.5`).
fn inverse(p: f64) -> f64 {
    let inv = 1.0 / p;
    let nearest = inv.round();
    if (inv - nearest).abs() <= INTEGRAL_SLACK * nearest.max(1.0) {
        nearest
    } else {
        inv
    }
}

/// Number of rounds in an election epoch, `ceil(1/p)`.
pub fn epoch_length(p: f64) -> u64 {
    (inverse(p).ceil() as u64).max(1)
}

pub fn weighted_probabilities(p_opt: f64, hetero: &HeterogeneityParams) -> Result<TierProbabilities> {
    if !(p_opt > 0.0 && p_opt < 1.0) {
        return Err(Error::invalid("p_opt", format!("{p_opt} is outside (0, 1)")));
    }
    hetero.validate()?;
    let p_n = p_opt / hetero.energy_factor();
    let probs = TierProbabilities {
        p_n,
        p_a: p_n * (1.0 + hetero.a),
        p_s: p_n * (1.0 + hetero.b),
    };
    for tier in NodeTier::ALL {
        let value = probs.for_tier(tier);
        if value >= 1.0 {
            return Err(Error::ProbabilityOutOfRange {
                tier: tier.name(),
                value,
            });
        }
    }
    Ok(probs)
}

/// `p / (1 - p (r mod ceil(1/p)))` for eligible nodes, clamped to `[0, 1]`.
pub fn sep_threshold(p: f64, r: u64, eligible: bool) -> f64 {
    if !eligible {
        return 0.0;
    }
    let position = r % epoch_length(p);
    if position == 0 {
        return p.clamp(0.0, 1.0);
    }
    // p / (1 - p k) == 1 / (1/p - k); the second form is exact at epoch end.
    let remaining = inverse(p) - position as f64;
    if remaining <= 1.0 {
        1.0
    } else {
        1.0 / remaining
    }
}

/// SEP threshold scaled by `1 - d_i / d_avg` for nodes nearer than `d_avg`;
/// unscaled otherwise.
pub fn dbcp_threshold(p: f64, r: u64, eligible: bool, d_i: f64, d_avg: f64) -> f64 {
    let base = sep_threshold(p, r, eligible);
    if d_i < d_avg {
        base * (1.0 - d_i / d_avg)
    } else {
        base
    }
}

/// Mean node-to-base-station distance over the given nodes.
pub fn average_distance(nodes: &[Node]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    Ok(nodes.iter().map(|n| n.distance_to_bs).sum::<f64>() / nodes.len() as f64)
}

/// Optimal number of clusters, `sqrt(n / 2pi) sqrt(eps_fs / eps_mp) M / d^2`.
pub fn optimal_cluster_count(n: usize, radio: &RadioParams, field_width: f64, d_to_bs: f64) -> f64 {
    (n as f64 / (2.0 * PI)).sqrt() * (radio.eps_fs / radio.eps_mp).sqrt() * field_width
        / (d_to_bs * d_to_bs)
}

/// Expected head-to-sink distance for a square field of side `M` with the
/// sink at its center.
pub fn expected_d_to_bs(field_width: f64) -> f64 {
    0.765 * field_width / 2.0
}

/// Reference optimal election probability,
/// `(1 / 0.765) sqrt(n / 2pi) sqrt(eps_fs / eps_mp)`.
///
/// Reported for inspection only. Under the default radio constants it is far
/// above 1, so the engine always takes `p_opt` from the configuration.
pub fn reference_p_opt(n: usize, radio: &RadioParams) -> f64 {
    (1.0 / 0.765) * (n as f64 / (2.0 * PI)).sqrt() * (radio.eps_fs / radio.eps_mp).sqrt()
}
