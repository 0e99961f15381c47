//! Nodes, field geometry, heterogeneity tiers and run configuration.

use std::fmt;

use rand::Rng;

use crate::election;
use crate::error::{Error, Result};
use crate::protocols::ProtocolKind;

/// Energy class of a sensor. Advanced and super nodes start with
/// `e0 * (1 + a)` and `e0 * (1 + b)` joules respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeTier {
    Normal,
    Advanced,
    Super,
}

impl NodeTier {
    pub const ALL: [NodeTier; 3] = [NodeTier::Normal, NodeTier::Advanced, NodeTier::Super];

    pub fn index(self) -> usize {
        match self {
            NodeTier::Normal => 0,
            NodeTier::Advanced => 1,
            NodeTier::Super => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeTier::Normal => "normal",
            NodeTier::Advanced => "advanced",
            NodeTier::Super => "super",
        }
    }
}

impl fmt::Display for NodeTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub tier: NodeTier,
    pub initial_energy: f64,
    pub residual_energy: f64,
    /// Euclidean distance to the base station, fixed at deployment.
    pub distance_to_bs: f64,
    /// Zero-based round in which this node last served as cluster head.
    pub last_elected_round: Option<u64>,
    pub alive: bool,
}

impl Node {
    pub fn distance_to(&self, other: &Node) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Three-tier energy population: a fraction `m` of nodes is above normal,
/// of which a fraction `m0` of the whole network is super.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterogeneityParams {
    pub m: f64,
    pub m0: f64,
    pub a: f64,
    pub b: f64,
    pub e0: f64,
}

impl Default for HeterogeneityParams {
    fn default() -> Self {
        Self {
            m: 0.2,
            m0: 0.1,
            a: 2.0,
            b: 3.0,
            e0: 0.5,
        }
    }
}

impl HeterogeneityParams {
    pub fn homogeneous(e0: f64) -> Self {
        Self {
            m: 0.0,
            m0: 0.0,
            a: 0.0,
            b: 0.0,
            e0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.m) {
            return Err(Error::invalid("m", format!("{} is outside [0, 1]", self.m)));
        }
        if !(0.0..=1.0).contains(&self.m0) {
            return Err(Error::invalid("m0", format!("{} is outside [0, 1]", self.m0)));
        }
        if self.m0 > self.m {
            return Err(Error::invalid(
                "m0",
                format!("super fraction {} exceeds m = {}", self.m0, self.m),
            ));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::invalid("a", format!("{} must be a finite value >= 0", self.a)));
        }
        if !(self.b.is_finite() && self.b >= self.a) {
            return Err(Error::invalid(
                "b",
                format!("{} must be finite and at least a = {}", self.b, self.a),
            ));
        }
        if !(self.e0 > 0.0 && self.e0.is_finite()) {
            return Err(Error::invalid("e0", format!("{} must be positive", self.e0)));
        }
        Ok(())
    }

    /// Energy multiplier `1 + a(m - m0) + b m0` of the whole population
    /// relative to an all-normal network.
    pub fn energy_factor(&self) -> f64 {
        1.0 + self.a * (self.m - self.m0) + self.b * self.m0
    }

    pub fn initial_energy(&self, tier: NodeTier) -> f64 {
        match tier {
            NodeTier::Normal => self.e0,
            NodeTier::Advanced => self.e0 * (1.0 + self.a),
            NodeTier::Super => self.e0 * (1.0 + self.b),
        }
    }

    /// Closed-form total initial energy `N e0 (1 + a(m - m0) + b m0)`.
    pub fn total_initial_energy(&self, n: usize) -> f64 {
        n as f64 * self.e0 * self.energy_factor()
    }
}

/// First-order radio constants. Energies are per bit; `e_da` is per bit per
/// aggregated signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub e_elec: f64,
    pub eps_fs: f64,
    pub eps_mp: f64,
    pub e_da: f64,
    pub d0_override: Option<f64>,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            e_elec: 5e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            e_da: 5e-9,
            d0_override: None,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e_elec", self.e_elec),
            ("eps_fs", self.eps_fs),
            ("eps_mp", self.eps_mp),
            ("e_da", self.e_da),
        ];
        for (key, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(key, format!("{value} must be positive")));
            }
        }
        if let Some(d0) = self.d0_override {
            if !(d0 > 0.0 && d0.is_finite()) {
                return Err(Error::invalid("d0_override", format!("{d0} must be positive")));
            }
        }
        Ok(())
    }

    /// Free-space/multipath crossover distance in meters.
    pub fn d0(&self) -> f64 {
        crate::radio::crossover_distance(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub field_width: f64,
    pub field_height: f64,
    pub bs_x: f64,
    pub bs_y: f64,
    pub p_opt: f64,
    pub packet_bits: u64,
    pub radio: RadioParams,
    pub hetero: HeterogeneityParams,
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub max_rounds: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 100,
            field_width: 100.0,
            field_height: 100.0,
            bs_x: 50.0,
            bs_y: 50.0,
            p_opt: 0.1,
            packet_bits: 4000,
            radio: RadioParams::default(),
            hetero: HeterogeneityParams::default(),
            protocol: ProtocolKind::Dbcp,
            seed: 1,
            max_rounds: 100_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::invalid("n", "at least one node is required"));
        }
        for (key, value) in [("field_width", self.field_width), ("field_height", self.field_height)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(key, format!("{value} must be positive")));
            }
        }
        for (key, value) in [("bs_x", self.bs_x), ("bs_y", self.bs_y)] {
            if !value.is_finite() {
                return Err(Error::invalid(key, format!("{value} must be finite")));
            }
        }
        if !(self.p_opt > 0.0 && self.p_opt < 1.0) {
            return Err(Error::invalid("p_opt", format!("{} is outside (0, 1)", self.p_opt)));
        }
        if self.packet_bits < 1 {
            return Err(Error::invalid("packet_bits", "must be at least 1"));
        }
        if self.max_rounds < 1 {
            return Err(Error::invalid("max_rounds", "must be at least 1"));
        }
        self.radio.validate()?;
        self.hetero.validate()?;
        election::weighted_probabilities(self.p_opt, &self.hetero)?;
        Ok(())
    }

    /// Same run parameters apart from seed and protocol.
    pub fn same_scenario(&self, other: &SimConfig) -> bool {
        let mut a = self.clone();
        a.seed = other.seed;
        a.protocol = other.protocol;
        a == *other
    }
}

/// Number of (normal, advanced, super) nodes. Super and above-normal counts
/// are `n m0` and `n m` rounded half-up; normals take the remainder.
pub fn tier_counts(n: usize, hetero: &HeterogeneityParams) -> Result<(usize, usize, usize)> {
    hetero.validate()?;
    let round_half_up = |x: f64| (x + 0.5 + 1e-9).floor();
    let above_normal = round_half_up(n as f64 * hetero.m);
    let n_super = round_half_up(n as f64 * hetero.m0);
    let n_advanced = above_normal - n_super;
    let n_normal = n as f64 - above_normal;
    if n_advanced < 0.0 || n_normal < 0.0 {
        return Err(Error::invalid(
            "m0",
            format!("tier counts ({n_normal}, {n_advanced}, {n_super}) include a negative entry"),
        ));
    }
    Ok((n_normal as usize, n_advanced as usize, n_super as usize))
}

/// Places `config.n` nodes uniformly over the field. Ids `0..n_super` are
/// super nodes, followed by advanced nodes, then normal nodes.
pub fn deploy<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Vec<Node>> {
    config.validate()?;
    let (_, n_advanced, n_super) = tier_counts(config.n, &config.hetero)?;
    let nodes = (0..config.n)
        .map(|id| {
            let tier = if id < n_super {
                NodeTier::Super
            } else if id < n_super + n_advanced {
                NodeTier::Advanced
            } else {
                NodeTier::Normal
            };
            let x = rng.gen::<f64>() * config.field_width;
            let y = rng.gen::<f64>() * config.field_height;
            let energy = config.hetero.initial_energy(tier);
            Node {
                id,
                x,
                y,
                tier,
                initial_energy: energy,
                residual_energy: energy,
                distance_to_bs: (x - config.bs_x).hypot(y - config.bs_y),
                last_elected_round: None,
                alive: true,
            }
        })
        .collect();
    Ok(nodes)
}
