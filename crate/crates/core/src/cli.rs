//! Configuration files and the `run` / `compare` / `sweep` commands.
//!
//! Configuration is a flat TOML document. Every key is optional; missing
//! keys take the defaults of [`SimConfig::default`], except that the base
//! station defaults to the center of whatever field size is configured.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::engine::{run_batch, summarize, RunOutput, Simulation};
use crate::error::{Error, Result};
use crate::model::{tier_counts, HeterogeneityParams, RadioParams, SimConfig};
use crate::protocols::ProtocolKind;
use crate::report::{self, ComparisonResult, RunRecord};

pub const CONFIG_KEYS: [&str; 20] = [
    "n",
    "field_width",
    "field_height",
    "bs_x",
    "bs_y",
    "p_opt",
    "packet_bits",
    "e_elec",
    "eps_fs",
    "eps_mp",
    "e_da",
    "d0_override",
    "m",
    "m0",
    "a",
    "b",
    "e0",
    "protocol",
    "seed",
    "max_rounds",
];

pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.toml";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<usize>,
    field_width: Option<f64>,
    field_height: Option<f64>,
    bs_x: Option<f64>,
    bs_y: Option<f64>,
    p_opt: Option<f64>,
    packet_bits: Option<u64>,
    e_elec: Option<f64>,
    eps_fs: Option<f64>,
    eps_mp: Option<f64>,
    e_da: Option<f64>,
    d0_override: Option<f64>,
    m: Option<f64>,
    m0: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    e0: Option<f64>,
    protocol: Option<String>,
    seed: Option<u64>,
    max_rounds: Option<u64>,
}

impl ConfigFile {
    fn resolve(self) -> Result<SimConfig> {
        let d = SimConfig::default();
        let radio = RadioParams {
            e_elec: self.e_elec.unwrap_or(d.radio.e_elec),
            eps_fs: self.eps_fs.unwrap_or(d.radio.eps_fs),
            eps_mp: self.eps_mp.unwrap_or(d.radio.eps_mp),
            e_da: self.e_da.unwrap_or(d.radio.e_da),
            d0_override: self.d0_override,
        };
        let hetero = HeterogeneityParams {
            m: self.m.unwrap_or(d.hetero.m),
            m0: self.m0.unwrap_or(d.hetero.m0),
            a: self.a.unwrap_or(d.hetero.a),
            b: self.b.unwrap_or(d.hetero.b),
            e0: self.e0.unwrap_or(d.hetero.e0),
        };
        let field_width = self.field_width.unwrap_or(d.field_width);
        let field_height = self.field_height.unwrap_or(d.field_height);
        let protocol = match self.protocol {
            Some(name) => name.parse()?,
            None => d.protocol,
        };
        let config = SimConfig {
            n: self.n.unwrap_or(d.n),
            field_width,
            field_height,
            bs_x: self.bs_x.unwrap_or(field_width / 2.0),
            bs_y: self.bs_y.unwrap_or(field_height / 2.0),
            p_opt: self.p_opt.unwrap_or(d.p_opt),
            packet_bits: self.packet_bits.unwrap_or(d.packet_bits),
            radio,
            hetero,
            protocol,
            seed: self.seed.unwrap_or(d.seed),
            max_rounds: self.max_rounds.unwrap_or(d.max_rounds),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Splits `key=value`. The value is read as a TOML value, falling back to a
/// bare string (so `protocol=sep` works unquoted).
pub fn parse_override(raw: &str) -> Result<(String, toml::Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Error::ConfigParse(format!("override `{raw}` is not of the form key=value")))?;
    let key = key.trim().to_string();
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key, parsed))
}

/// Reads the optional config file, applies overrides on top and validates.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, toml::Value)]) -> Result<SimConfig> {
    let mut table = match path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str::<toml::Table>(&text).map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?
        }
        None => toml::Table::new(),
    };
    for (key, value) in overrides {
        table.insert(key.clone(), value.clone());
    }
    if let Some(key) = table.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(Error::UnknownKey(key.clone()));
    }
    let file: ConfigFile = table
        .try_into()
        .map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
    file.resolve()
}

/// Fully resolved configuration as TOML that [`parse_config`] reads back to
/// the same value. Derived quantities are written as comments.
pub fn echo_config(config: &SimConfig, notes: &[String]) -> String {
    let mut out = String::new();
    let (normal, advanced, sup) = tier_counts(config.n, &config.hetero).unwrap_or((0, 0, 0));
    writeln!(out, "# effective d0 = {} m", config.radio.d0()).unwrap();
    writeln!(out, "# tier counts: normal = {normal}, advanced = {advanced}, super = {sup}").unwrap();
    writeln!(
        out,
        "# heterogeneity defaults m = 0.2, m0 = 0.1, a = 2, b = 3 are simulator defaults"
    )
    .unwrap();
    for note in notes {
        writeln!(out, "# {note}").unwrap();
    }
    let r = &config.radio;
    let h = &config.hetero;
    let lines: Vec<(&str, String)> = vec![
        ("n", config.n.to_string()),
        ("field_width", float(config.field_width)),
        ("field_height", float(config.field_height)),
        ("bs_x", float(config.bs_x)),
        ("bs_y", float(config.bs_y)),
        ("p_opt", float(config.p_opt)),
        ("packet_bits", config.packet_bits.to_string()),
        ("e_elec", float(r.e_elec)),
        ("eps_fs", float(r.eps_fs)),
        ("eps_mp", float(r.eps_mp)),
        ("e_da", float(r.e_da)),
        ("m", float(h.m)),
        ("m0", float(h.m0)),
        ("a", float(h.a)),
        ("b", float(h.b)),
        ("e0", float(h.e0)),
        ("protocol", format!("\"{}\"", config.protocol)),
        ("seed", config.seed.to_string()),
        ("max_rounds", config.max_rounds.to_string()),
    ];
    for (key, value) in lines {
        writeln!(out, "{key} = {value}").unwrap();
    }
    if let Some(d0) = r.d0_override {
        writeln!(out, "d0_override = {}", float(d0)).unwrap();
    }
    out
}

/// TOML float literal that parses back to the same bits.
fn float(v: f64) -> String {
    // Debug output of a finite f64 always carries a `.` or an exponent
    format!("{v:?}")
}

/// Inclusive seed range written `a..b`, or a single seed.
pub fn parse_seeds(raw: &str) -> Result<RangeInclusive<u64>> {
    let bad = || Error::invalid("seeds", format!("`{raw}` is not a seed or an a..b range"));
    let (lo, hi) = match raw.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (raw, raw),
    };
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    M,
    M0,
    A,
    B,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::M => "m",
            SweepParam::M0 => "m0",
            SweepParam::A => "a",
            SweepParam::B => "b",
        }
    }

    pub fn apply(self, hetero: &mut HeterogeneityParams, value: f64) {
        match self {
            SweepParam::M => hetero.m = value,
            SweepParam::M0 => hetero.m0 = value,
            SweepParam::A => hetero.a = value,
            SweepParam::B => hetero.b = value,
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(SweepParam::M),
            "m0" => Ok(SweepParam::M0),
            "a" => Ok(SweepParam::A),
            "b" => Ok(SweepParam::B),
            other => Err(Error::invalid("param", format!("`{other}` is not one of m, m0, a, b"))),
        }
    }
}

pub fn parse_values(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid("values", format!("`{v}` is not a number")))
        })
        .collect()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn series_file_name(protocol: ProtocolKind, seed: u64) -> String {
    format!("series_{protocol}_seed{seed}.csv")
}

/// Runs LEACH, SEP and DBCP on every seed with otherwise identical settings.
pub fn compare_batch(base: &SimConfig, seeds: RangeInclusive<u64>) -> Result<Vec<RunRecord>> {
    let configs: Vec<SimConfig> = seeds
        .flat_map(|seed| {
            ProtocolKind::ALL.into_iter().map(move |protocol| SimConfig {
                protocol,
                seed,
                ..base.clone()
            })
        })
        .collect();
    let outputs = run_batch(&configs)?;
    Ok(configs
        .into_iter()
        .zip(outputs)
        .map(|(config, output)| RunRecord { config, output })
        .collect())
}

/// Single protocol, single seed. Writes the series, a one-row summary and the
/// effective configuration.
pub fn cmd_run(config: &SimConfig, out_dir: &Path, out: &mut dyn Write) -> Result<RunOutput> {
    config.validate()?;
    create_dir(out_dir)?;
    let mut sim = Simulation::new(config)?;
    let mut series = Vec::new();
    let mut diagnostic = None;
    while !sim.is_finished() {
        series.push(sim.step());
        if diagnostic.is_none() && sim.last_assignment().head_count() > 0 {
            diagnostic = Some(sim.distance_diagnostic());
        }
    }
    let output = RunOutput {
        summary: summarize(config.n, &series),
        series,
        ledger: sim.ledger(),
        d_avg: sim.d_avg(),
    };

    write_file(&out_dir.join(EFFECTIVE_CONFIG_FILE), &echo_config(config, &[]))?;
    report::write_series(&output.series, &out_dir.join(series_file_name(config.protocol, config.seed)))?;
    let record = RunRecord {
        config: config.clone(),
        output,
    };
    report::write_summary(std::slice::from_ref(&record), &out_dir.join("summary.csv"))?;

    let s = &record.output.summary;
    let show = |v: Option<u64>| v.map_or("-".to_string(), |r| r.to_string());
    let io = |e| Error::io("<stdout>", e);
    writeln!(out, "protocol {} seed {}", config.protocol, config.seed).map_err(io)?;
    writeln!(
        out,
        "FND {}  HND {}  LND {}  packets to BS {}  rounds {}",
        show(s.fnd),
        show(s.hnd),
        show(s.lnd),
        s.total_packets,
        s.rounds_simulated
    )
    .map_err(io)?;
    writeln!(out, "D_avg {:.4} m, effective d0 {:.4} m", record.output.d_avg, config.radio.d0()).map_err(io)?;
    if let Some(d) = diagnostic {
        writeln!(
            out,
            "first clustered round: mean member-to-head {:.4} m + mean head-to-BS {:.4} m = {:.4} m",
            d.mean_member_to_head,
            d.mean_head_to_bs,
            d.mean_member_to_head + d.mean_head_to_bs
        )
        .map_err(io)?;
    }
    Ok(record.output)
}

/// Paired comparison over a seed range. `comparison.csv` is written last.
pub fn cmd_compare(
    base: &SimConfig,
    seeds: RangeInclusive<u64>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<ComparisonResult> {
    base.validate()?;
    create_dir(out_dir)?;
    let notes = vec![format!("compare seeds {}..{}", seeds.start(), seeds.end())];
    write_file(&out_dir.join(EFFECTIVE_CONFIG_FILE), &echo_config(base, &notes))?;

    let runs = compare_batch(base, seeds)?;
    let result = report::aggregate(&runs)?;
    for run in &runs {
        let path = out_dir.join(series_file_name(run.config.protocol, run.config.seed));
        report::write_series(&run.output.series, &path)?;
    }
    report::write_summary(&runs, &out_dir.join("summary.csv"))?;
    report::write_curves(&result, &out_dir.join("curves.csv"))?;
    report::write_comparison(&result, &out_dir.join("comparison.csv"))?;

    out.write_all(report::format_table(&result).as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    Ok(result)
}

/// One paired comparison per parameter value, collected into `sweep.csv`.
pub fn cmd_sweep(
    base: &SimConfig,
    param: SweepParam,
    values: &[f64],
    seeds: RangeInclusive<u64>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<Vec<(f64, ComparisonResult)>> {
    let configs = values
        .iter()
        .map(|&value| {
            let mut config = base.clone();
            param.apply(&mut config.hetero, value);
            config.validate().map(|_| (value, config))
        })
        .collect::<Result<Vec<_>>>()?;
    create_dir(out_dir)?;
    let notes = vec![
        format!("sweep {} over {:?}", param.name(), values),
        format!("sweep seeds {}..{}", seeds.start(), seeds.end()),
    ];
    write_file(&out_dir.join(EFFECTIVE_CONFIG_FILE), &echo_config(base, &notes))?;

    let mut points = Vec::with_capacity(configs.len());
    let io = |e| Error::io("<stdout>", e);
    for (value, config) in configs {
        let runs = compare_batch(&config, seeds.clone())?;
        let result = report::aggregate(&runs)?;
        writeln!(out, "{} = {}", param.name(), value).map_err(io)?;
        out.write_all(report::format_table(&result).as_bytes()).map_err(io)?;
        points.push((value, result));
    }
    report::write_sweep(&points, &out_dir.join("sweep.csv"))?;
    Ok(points)
}
