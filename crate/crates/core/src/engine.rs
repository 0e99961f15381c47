//! Round loop: election, cluster formation, energy accounting and death
//! detection for one simulation run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::election::{average_distance, weighted_probabilities};
use crate::error::Result;
use crate::model::{deploy, Node, NodeTier, RadioParams, SimConfig};
use crate::protocols::{elect_heads, form_clusters, ClusterAssignment, ElectionContext};
use crate::radio::{aggregation_energy, rx_energy, tx_energy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundMetrics {
    /// One-based round number.
    pub round: u64,
    pub alive_normal: usize,
    pub alive_advanced: usize,
    pub alive_super: usize,
    pub head_count: usize,
    pub packets_to_bs_round: u64,
    pub packets_to_bs_cum: u64,
    pub residual_energy_j: f64,
}

impl RoundMetrics {
    pub fn alive_total(&self) -> usize {
        self.alive_normal + self.alive_advanced + self.alive_super
    }
}

/// First/half/last node death rounds (one-based). A field is `None` when the
/// event did not happen within the round cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SummaryMetrics {
    pub fnd: Option<u64>,
    pub hnd: Option<u64>,
    pub lnd: Option<u64>,
    pub total_packets: u64,
    pub rounds_simulated: u64,
}

/// Running energy account of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub initial_j: f64,
    /// Sum of every radio cost charged to a node.
    pub demanded_j: f64,
    /// Part of `demanded_j` that exceeded a dying node's remaining energy.
    pub unmet_j: f64,
}

impl EnergyLedger {
    /// Energy actually drawn from batteries.
    pub fn drawn_j(&self) -> f64 {
        self.demanded_j - self.unmet_j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub series: Vec<RoundMetrics>,
    pub summary: SummaryMetrics,
    pub ledger: EnergyLedger,
    pub d_avg: f64,
}

/// Traffic and cost produced by one round of data transfer.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RoundTraffic {
    pub packets_to_bs: u64,
    pub demanded_j: f64,
}

/// Charges every node in `assignment` for its part in one round of data
/// gathering. Residual energies may go negative here; see [`settle_deaths`].
///
/// Members send one packet to their head. A head receives one packet per
/// member, fuses `members + 1` signals and sends one packet to the base
/// station. Unclustered nodes send straight to the base station.
pub fn dissipate(
    nodes: &mut [Node],
    assignment: &ClusterAssignment,
    radio: &RadioParams,
    bits: u64,
) -> RoundTraffic {
    let mut traffic = RoundTraffic::default();
    let mut charge = |node: &mut Node, cost: f64| {
        node.residual_energy -= cost;
        traffic.demanded_j += cost;
    };

    for cluster in &assignment.clusters {
        for &member in &cluster.members {
            let d = nodes[member].distance_to(&nodes[cluster.head]);
            charge(&mut nodes[member], tx_energy(radio, bits, d));
        }
        let head = &mut nodes[cluster.head];
        let members = cluster.members.len();
        let cost = members as f64 * rx_energy(radio, bits)
            + aggregation_energy(radio, bits, members + 1)
            + tx_energy(radio, bits, head.distance_to_bs);
        charge(head, cost);
    }
    for &id in &assignment.unclustered {
        let d = nodes[id].distance_to_bs;
        charge(&mut nodes[id], tx_energy(radio, bits, d));
    }

    traffic.packets_to_bs = (assignment.clusters.len() + assignment.unclustered.len()) as u64;
    traffic
}

/// Clamps exhausted nodes to zero and marks them dead. Returns the energy
/// demanded beyond what those nodes had left.
pub fn settle_deaths(nodes: &mut [Node]) -> f64 {
    let mut unmet = 0.0;
    for node in nodes.iter_mut().filter(|n| n.alive) {
        if node.residual_energy <= 0.0 {
            unmet -= node.residual_energy;
            node.residual_energy = 0.0;
            node.alive = false;
        }
    }
    unmet
}

/// Mean member-to-head and head-to-sink distances of one clustering, next
/// to the network's average node distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceDiagnostic {
    pub mean_member_to_head: f64,
    pub mean_head_to_bs: f64,
    pub d_avg: f64,
}

/// Simulation state of a single run. Draws come from one ChaCha8 stream
/// seeded with `config.seed`: first the deployment, then one election draw
/// per alive node per round in ascending id order.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    nodes: Vec<Node>,
    ctx: ElectionContext,
    rng: ChaCha8Rng,
    next_round: u64,
    packets_cum: u64,
    ledger: EnergyLedger,
    last_assignment: ClusterAssignment,
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let nodes = deploy(config, &mut rng)?;
        let d_avg = average_distance(&nodes)?;
        let weighted = weighted_probabilities(config.p_opt, &config.hetero)?;
        let ctx = ElectionContext::new(config.protocol, weighted, config.p_opt, d_avg);
        let ledger = EnergyLedger {
            initial_j: nodes.iter().map(|n| n.initial_energy).sum(),
            ..EnergyLedger::default()
        };
        Ok(Self {
            config: config.clone(),
            nodes,
            ctx,
            rng,
            next_round: 0,
            packets_cum: 0,
            ledger,
            last_assignment: ClusterAssignment::default(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn context(&self) -> &ElectionContext {
        &self.ctx
    }

    pub fn d_avg(&self) -> f64 {
        self.ctx.d_avg
    }

    pub fn ledger(&self) -> EnergyLedger {
        self.ledger
    }

    pub fn last_assignment(&self) -> &ClusterAssignment {
        &self.last_assignment
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn is_finished(&self) -> bool {
        self.alive_count() == 0 || self.next_round >= self.config.max_rounds
    }

    /// Runs one full round: election, clustering, transfer, deaths.
    pub fn step(&mut self) -> RoundMetrics {
        let r = self.next_round;
        let heads = elect_heads(&self.ctx, &mut self.nodes, r, &mut self.rng);
        self.finish_round(&heads)
    }

    /// Runs one round with a fixed head set instead of an election. The
    /// heads are recorded as elected in this round.
    pub fn step_with_heads(&mut self, heads: &[usize]) -> RoundMetrics {
        let r = self.next_round;
        for &id in heads {
            self.nodes[id].last_elected_round = Some(r);
        }
        self.finish_round(heads)
    }

    fn finish_round(&mut self, heads: &[usize]) -> RoundMetrics {
        let assignment = form_clusters(&self.nodes, heads);
        let traffic = dissipate(
            &mut self.nodes,
            &assignment,
            &self.config.radio,
            self.config.packet_bits,
        );
        self.ledger.demanded_j += traffic.demanded_j;
        self.ledger.unmet_j += settle_deaths(&mut self.nodes);
        self.packets_cum += traffic.packets_to_bs;
        self.next_round += 1;

        let mut alive = [0usize; 3];
        for node in self.nodes.iter().filter(|n| n.alive) {
            alive[node.tier.index()] += 1;
        }
        let metrics = RoundMetrics {
            round: self.next_round,
            alive_normal: alive[NodeTier::Normal.index()],
            alive_advanced: alive[NodeTier::Advanced.index()],
            alive_super: alive[NodeTier::Super.index()],
            head_count: assignment.head_count(),
            packets_to_bs_round: traffic.packets_to_bs,
            packets_to_bs_cum: self.packets_cum,
            residual_energy_j: self.nodes.iter().map(|n| n.residual_energy).sum(),
        };
        self.last_assignment = assignment;
        metrics
    }

    pub fn distance_diagnostic(&self) -> DistanceDiagnostic {
        let mut to_head = (0.0, 0usize);
        let mut to_bs = (0.0, 0usize);
        for cluster in &self.last_assignment.clusters {
            let head = &self.nodes[cluster.head];
            to_bs.0 += head.distance_to_bs;
            to_bs.1 += 1;
            for &m in &cluster.members {
                to_head.0 += self.nodes[m].distance_to(head);
                to_head.1 += 1;
            }
        }
        let mean = |(sum, count): (f64, usize)| if count == 0 { 0.0 } else { sum / count as f64 };
        DistanceDiagnostic {
            mean_member_to_head: mean(to_head),
            mean_head_to_bs: mean(to_bs),
            d_avg: self.ctx.d_avg,
        }
    }
}

pub fn summarize(n: usize, series: &[RoundMetrics]) -> SummaryMetrics {
    let half = n / 2;
    let first_round = |pred: &dyn Fn(&RoundMetrics) -> bool| series.iter().find(|m| pred(m)).map(|m| m.round);
    SummaryMetrics {
        fnd: first_round(&|m| m.alive_total() < n),
        hnd: first_round(&|m| m.alive_total() <= half),
        lnd: first_round(&|m| m.alive_total() == 0),
        total_packets: series.last().map_or(0, |m| m.packets_to_bs_cum),
        rounds_simulated: series.len() as u64,
    }
}

/// Runs until every node is dead or the round cap is reached.
pub fn run(config: &SimConfig) -> Result<RunOutput> {
    let mut sim = Simulation::new(config)?;
    let mut series = Vec::new();
    while !sim.is_finished() {
        series.push(sim.step());
    }
    Ok(RunOutput {
        summary: summarize(config.n, &series),
        series,
        ledger: sim.ledger(),
        d_avg: sim.d_avg(),
    })
}

/// Runs independent configurations in parallel, preserving input order.
pub fn run_batch(configs: &[SimConfig]) -> Result<Vec<RunOutput>> {
    configs.par_iter().map(run).collect()
}
