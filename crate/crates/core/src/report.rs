//! Seed-batch aggregation and CSV output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::engine::{RoundMetrics, RunOutput, SummaryMetrics};
use crate::error::{Error, Result};
use crate::model::SimConfig;
use crate::protocols::ProtocolKind;

pub const SERIES_HEADER: &str = "round,alive_total,alive_normal,alive_advanced,alive_super,head_count,packets_to_bs_round,packets_to_bs_cum,residual_energy_j";
pub const SUMMARY_HEADER: &str = "protocol,seed,fnd_round,hnd_round,lnd_round,total_packets,rounds_simulated";
pub const COMPARISON_HEADER: &str = "protocol,metric,mean,stddev,n_seeds";
pub const CURVES_HEADER: &str = "protocol,round,mean_alive,mean_packets_to_bs_cum";
pub const SWEEP_HEADER: &str = "param_value,protocol,metric,mean,stddev";

/// A finished run together with the configuration that produced it.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: SimConfig,
    pub output: RunOutput,
}

/// Mean and sample standard deviation over the runs in which the quantity
/// was defined.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
    pub n: usize,
}

impl Stat {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Stat {
                mean: f64::NAN,
                stddev: f64::NAN,
                n: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stddev = if n < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        };
        Stat { mean, stddev, n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolStats {
    pub protocol: ProtocolKind,
    pub seeds: Vec<u64>,
    pub fnd: Stat,
    pub hnd: Stat,
    pub lnd: Stat,
    pub total_packets: Stat,
    /// Mean alive nodes per round; index 0 is round 1.
    pub mean_alive: Vec<f64>,
    pub mean_packets_cum: Vec<f64>,
}

impl ProtocolStats {
    pub fn metrics(&self) -> [(&'static str, Stat); 4] {
        [
            ("fnd", self.fnd),
            ("hnd", self.hnd),
            ("lnd", self.lnd),
            ("total_packets", self.total_packets),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    /// Ordered LEACH, SEP, DBCP; absent protocols are skipped.
    pub protocols: Vec<ProtocolStats>,
}

impl ComparisonResult {
    pub fn get(&self, protocol: ProtocolKind) -> Option<&ProtocolStats> {
        self.protocols.iter().find(|p| p.protocol == protocol)
    }
}

/// Groups runs by protocol and computes paired statistics.
///
/// All runs must share every setting except seed and protocol, and every
/// protocol must cover the same seed multiset. Curves are extended to the
/// longest run: dead networks count zero alive nodes and keep their final
/// packet total.
pub fn aggregate(runs: &[RunRecord]) -> Result<ComparisonResult> {
    let first = runs.first().ok_or(Error::NoRuns)?;
    for run in runs {
        if !run.config.same_scenario(&first.config) {
            return Err(Error::MismatchedConfigs(format!(
                "{} seed {} differs from {} seed {}",
                run.config.protocol, run.config.seed, first.config.protocol, first.config.seed
            )));
        }
    }

    let mut groups: BTreeMap<ProtocolKind, Vec<&RunRecord>> = BTreeMap::new();
    for run in runs {
        groups.entry(run.config.protocol).or_default().push(run);
    }
    for group in groups.values_mut() {
        // fixed summation order makes the statistics independent of input order
        group.sort_by(|a, b| {
            a.config
                .seed
                .cmp(&b.config.seed)
                .then(a.output.summary.rounds_simulated.cmp(&b.output.summary.rounds_simulated))
        });
    }

    let reference_seeds: Vec<u64> = groups.values().next().unwrap().iter().map(|r| r.config.seed).collect();
    for (protocol, group) in &groups {
        let seeds: Vec<u64> = group.iter().map(|r| r.config.seed).collect();
        if seeds != reference_seeds {
            return Err(Error::MismatchedConfigs(format!(
                "{protocol} covers seeds {seeds:?}, expected {reference_seeds:?}"
            )));
        }
    }

    let horizon = runs.iter().map(|r| r.output.series.len()).max().unwrap_or(0);
    let n_nodes = first.config.n;

    let protocols = groups
        .into_iter()
        .map(|(protocol, group)| {
            let collect = |f: &dyn Fn(&SummaryMetrics) -> Option<u64>| {
                let values: Vec<f64> = group
                    .iter()
                    .filter_map(|r| f(&r.output.summary))
                    .map(|v| v as f64)
                    .collect();
                Stat::from_values(&values)
            };
            let mut mean_alive = vec![0.0; horizon];
            let mut mean_packets_cum = vec![0.0; horizon];
            for run in &group {
                let series = &run.output.series;
                let final_cum = series.last().map_or(0, |m| m.packets_to_bs_cum);
                for round in 0..horizon {
                    let (alive, cum) = match series.get(round) {
                        Some(m) => (m.alive_total(), m.packets_to_bs_cum),
                        None if series.is_empty() => (n_nodes, 0),
                        None => (0, final_cum),
                    };
                    mean_alive[round] += alive as f64;
                    mean_packets_cum[round] += cum as f64;
                }
            }
            let count = group.len() as f64;
            mean_alive.iter_mut().for_each(|v| *v /= count);
            mean_packets_cum.iter_mut().for_each(|v| *v /= count);

            ProtocolStats {
                protocol,
                seeds: group.iter().map(|r| r.config.seed).collect(),
                fnd: collect(&|s| s.fnd),
                hnd: collect(&|s| s.hnd),
                lnd: collect(&|s| s.lnd),
                total_packets: collect(&|s| Some(s.total_packets)),
                mean_alive,
                mean_packets_cum,
            }
        })
        .collect();

    Ok(ComparisonResult { protocols })
}

fn opt(value: Option<u64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes through a sibling temporary file so a failed write never leaves a
/// truncated file at `path`.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, contents).map_err(|e| Error::io(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| Error::io(path, e))
}

pub fn series_csv(series: &[RoundMetrics]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for m in series {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            m.round,
            m.alive_total(),
            m.alive_normal,
            m.alive_advanced,
            m.alive_super,
            m.head_count,
            m.packets_to_bs_round,
            m.packets_to_bs_cum,
            m.residual_energy_j
        )
        .unwrap();
    }
    out
}

pub fn write_series(series: &[RoundMetrics], path: &Path) -> Result<()> {
    write_atomic(path, &series_csv(series))
}

pub fn read_series(path: &Path) -> Result<Vec<RoundMetrics>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let malformed = |line: usize, reason: String| Error::MalformedCsv {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == SERIES_HEADER => {}
        _ => return Err(malformed(1, "missing series header".into())),
    }
    lines
        .map(|(idx, line)| {
            let line_no = idx + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(malformed(line_no, format!("expected 9 fields, found {}", fields.len())));
            }
            let int = |i: usize| -> Result<u64> {
                fields[i]
                    .parse()
                    .map_err(|e| malformed(line_no, format!("field {}: {e}", i + 1)))
            };
            let metrics = RoundMetrics {
                round: int(0)?,
                alive_normal: int(2)? as usize,
                alive_advanced: int(3)? as usize,
                alive_super: int(4)? as usize,
                head_count: int(5)? as usize,
                packets_to_bs_round: int(6)?,
                packets_to_bs_cum: int(7)?,
                residual_energy_j: fields[8]
                    .parse()
                    .map_err(|e| malformed(line_no, format!("field 9: {e}")))?,
            };
            if int(1)? as usize != metrics.alive_total() {
                return Err(malformed(line_no, "alive_total disagrees with tier counts".into()));
            }
            Ok(metrics)
        })
        .collect()
}

pub fn summary_csv(runs: &[RunRecord]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for run in runs {
        let s = &run.output.summary;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            run.config.protocol,
            run.config.seed,
            opt(s.fnd),
            opt(s.hnd),
            opt(s.lnd),
            s.total_packets,
            s.rounds_simulated
        )
        .unwrap();
    }
    out
}

pub fn write_summary(runs: &[RunRecord], path: &Path) -> Result<()> {
    write_atomic(path, &summary_csv(runs))
}

pub fn comparison_csv(result: &ComparisonResult) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for stats in &result.protocols {
        for (metric, stat) in stats.metrics() {
            writeln!(out, "{},{},{},{},{}", stats.protocol, metric, stat.mean, stat.stddev, stat.n).unwrap();
        }
    }
    out
}

pub fn write_comparison(result: &ComparisonResult, path: &Path) -> Result<()> {
    write_atomic(path, &comparison_csv(result))
}

pub fn curves_csv(result: &ComparisonResult) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for stats in &result.protocols {
        for (i, (alive, cum)) in stats.mean_alive.iter().zip(&stats.mean_packets_cum).enumerate() {
            writeln!(out, "{},{},{},{}", stats.protocol, i + 1, alive, cum).unwrap();
        }
    }
    out
}

pub fn write_curves(result: &ComparisonResult, path: &Path) -> Result<()> {
    write_atomic(path, &curves_csv(result))
}

pub fn sweep_csv(points: &[(f64, ComparisonResult)]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for (value, result) in points {
        for stats in &result.protocols {
            for (metric, stat) in stats.metrics() {
                writeln!(out, "{},{},{},{},{}", value, stats.protocol, metric, stat.mean, stat.stddev).unwrap();
            }
        }
    }
    out
}

pub fn write_sweep(points: &[(f64, ComparisonResult)], path: &Path) -> Result<()> {
    write_atomic(path, &sweep_csv(points))
}

/// Human-readable FND/HND/LND table.
pub fn format_table(result: &ComparisonResult) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<8} {:>6} {:>12} {:>12} {:>12} {:>14}",
        "protocol", "seeds", "FND", "HND", "LND", "packets to BS"
    )
    .unwrap();
    for s in &result.protocols {
        let cell = |st: Stat| format!("{:.1}±{:.1}", st.mean, st.stddev);
        writeln!(
            out,
            "{:<8} {:>6} {:>12} {:>12} {:>12} {:>14}",
            s.protocol.name().to_uppercase(),
            s.seeds.len(),
            cell(s.fnd),
            cell(s.hnd),
            cell(s.lnd),
            cell(s.total_packets)
        )
        .unwrap();
    }
    out
}
