//! Command-line runner: config files, single runs, comparisons and seed sweeps.
//!
//! Precedence is flags over config file over built-in defaults. Outputs are
//! `{protocol}_{seed}.csv` per run plus `summary.csv`, and `comparison.csv`
//! when two or more protocols ran. Every file is written to a temporary name
//! and renamed into place.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::engine::{simulate, MetricsSeries};
use crate::error::{Error, Result};
use crate::model::{ConfigValue, SimConfig};
use crate::protocols::Protocol;
use crate::report::{
    compare, emit_csv, emit_summary_csv, parse_summary_csv, summarize, ComparisonTable, Summary,
};

/// Parses a flat `key = value` document (`#` comments) into a config.
/// Omitted keys keep their defaults.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut config = SimConfig::default();
    apply_config_text(&mut config, text)?;
    config.validate()?;
    Ok(config)
}

fn apply_config_text(config: &mut SimConfig, text: &str) -> Result<()> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string().trim_end().to_string()))?;
    for (key, value) in &table {
        let v = match value {
            toml::Value::Integer(i) => ConfigValue::Int(*i),
            toml::Value::Float(f) => ConfigValue::Float(*f),
            other => {
                return Err(Error::config(
                    key,
                    format!("expected a number, got {}", other.type_str()),
                ))
            }
        };
        config.set(key, v)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolSelection {
    One(Protocol),
    All,
}

impl ProtocolSelection {
    pub fn protocols(&self) -> Vec<Protocol> {
        match self {
            ProtocolSelection::One(p) => vec![*p],
            ProtocolSelection::All => Protocol::ALL.to_vec(),
        }
    }
}

fn parse_protocol_selection(s: &str) -> std::result::Result<ProtocolSelection, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(ProtocolSelection::All);
    }
    s.parse()
        .map(ProtocolSelection::One)
        .map_err(|e: Error| e.to_string())
}

/// Seeds given as `a..b` (inclusive) or a single value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

fn parse_seed_list(s: &str) -> std::result::Result<SeedList, String> {
    parse_seed_range(s).map(SeedList)
}

/// Parses `a..b` (inclusive) or a single seed.
pub fn parse_seed_range(s: &str) -> std::result::Result<Vec<u64>, String> {
    let parse = |x: &str| {
        x.trim()
            .parse::<u64>()
            .map_err(|_| format!("invalid seed `{x}`"))
    };
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty seed range {a}..{b}"));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![parse(s)?]),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wsnsim",
    version,
    about = "Round-based WSN clustering protocol simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run protocols over seeds and write per-round and summary CSVs.
    Run(RunArgs),
    /// Run every protocol (by default) and print the comparison table; with
    /// `--from`, compare an existing summary.csv instead.
    Compare {
        #[command(flatten)]
        args: RunArgs,
        /// Existing summary.csv to tabulate without simulating.
        #[arg(long, value_name = "PATH")]
        from: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// leach, sep, esep, deec, hsep or all.
    #[arg(long, value_name = "NAME", value_parser = parse_protocol_selection)]
    pub protocol: Option<ProtocolSelection>,
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Inclusive seed range `a..b`.
    #[arg(long, value_name = "A..B", value_parser = parse_seed_list)]
    pub seeds: Option<SeedList>,
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// One flag per config scalar.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub max_rounds: Option<u64>,
    #[arg(long)]
    pub n_nodes: Option<u64>,
    #[arg(long)]
    pub field_width: Option<f64>,
    #[arg(long)]
    pub field_height: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub bs_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub bs_y: Option<f64>,
    #[arg(long)]
    pub e_elec: Option<f64>,
    #[arg(long)]
    pub e_da: Option<f64>,
    #[arg(long)]
    pub eps_fs: Option<f64>,
    #[arg(long)]
    pub eps_mp: Option<f64>,
    #[arg(long)]
    pub packet_bits: Option<u64>,
    #[arg(long)]
    pub e0: Option<f64>,
    #[arg(long)]
    pub p_opt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub intermediate_fraction: Option<f64>,
    #[arg(long)]
    pub p_h: Option<f64>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, ConfigValue)> {
        let int =
            |k, v: Option<u64>| v.map(|v| (k, ConfigValue::Int(v.min(i64::MAX as u64) as i64)));
        let float = |k, v: Option<f64>| v.map(|v| (k, ConfigValue::Float(v)));
        [
            int("max_rounds", self.max_rounds),
            int("n_nodes", self.n_nodes),
            float("field_width", self.field_width),
            float("field_height", self.field_height),
            float("bs_x", self.bs_x),
            float("bs_y", self.bs_y),
            float("e_elec", self.e_elec),
            float("e_da", self.e_da),
            float("eps_fs", self.eps_fs),
            float("eps_mp", self.eps_mp),
            int("packet_bits", self.packet_bits),
            float("e0", self.e0),
            float("p_opt", self.p_opt),
            float("alpha", self.alpha),
            float("m", self.m),
            float("beta", self.beta),
            float("intermediate_fraction", self.intermediate_fraction),
            float("p_h", self.p_h),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

/// A fully resolved batch: one base config, protocols, seeds, output dir.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub config: SimConfig,
    pub protocols: Vec<Protocol>,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

impl RunSpec {
    pub fn from_args(args: &RunArgs, default_selection: ProtocolSelection) -> Result<Self> {
        let mut config = SimConfig::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)?;
            apply_config_text(&mut config, &text)?;
        }
        for (key, value) in args.overrides.pairs() {
            config.set(key, value)?;
        }
        let seeds = match (&args.seeds, args.seed) {
            (Some(list), _) => list.0.clone(),
            (None, Some(s)) => vec![s],
            (None, None) => vec![config.seed],
        };
        let spec = RunSpec {
            config,
            protocols: args.protocol.unwrap_or(default_selection).protocols(),
            seeds,
            out_dir: args.out.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocols.is_empty() {
            return Err(Error::config(
                "protocol",
                "at least one protocol is required",
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seed", "at least one seed is required"));
        }
        self.config.validate()?;
        for p in &self.protocols {
            p.validate(&p.effective_config(&self.config))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summaries: Vec<Summary>,
    pub table: Option<ComparisonTable>,
}

/// Simulates every (protocol, seed) pair and writes the CSV tree.
pub fn run(spec: &RunSpec) -> Result<RunReport> {
    spec.validate()?;
    let jobs: Vec<(Protocol, u64)> = spec
        .protocols
        .iter()
        .flat_map(|&p| spec.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let mut results: Vec<(MetricsSeries, Option<Summary>)> = jobs
        .par_iter()
        .map(|&(protocol, seed)| {
            let config = SimConfig {
                seed,
                ..spec.config.clone()
            };
            let series = simulate(&config, protocol)?;
            let summary = match summarize(&series) {
                Ok(s) => Some(s),
                Err(Error::EmptySeries) => None,
                Err(e) => return Err(e),
            };
            Ok((series, summary))
        })
        .collect::<Result<_>>()?;
    results.sort_by_key(|(s, _)| (s.protocol, s.seed()));

    fs::create_dir_all(&spec.out_dir)?;
    let mut files = Vec::new();
    for (series, _) in &results {
        let path = spec
            .out_dir
            .join(format!("{}_{}.csv", series.protocol, series.seed()));
        write_atomic(&path, |w| emit_csv(series, w))?;
        files.push(path);
    }
    let summaries: Vec<Summary> = results.iter().filter_map(|(_, s)| *s).collect();
    let path = spec.out_dir.join("summary.csv");
    write_atomic(&path, |w| emit_summary_csv(&summaries, w))?;
    files.push(path);

    let table = if spec.protocols.len() >= 2 {
        let table = compare(&summaries);
        let path = spec.out_dir.join("comparison.csv");
        write_atomic(&path, |w| table.write_csv(w))?;
        files.push(path);
        Some(table)
    } else {
        None
    };
    Ok(RunReport {
        files,
        summaries,
        table,
    })
}

/// Tabulates an existing summary CSV.
pub fn compare_file(path: &Path) -> Result<ComparisonTable> {
    let file = fs::File::open(path)?;
    let summaries = parse_summary_csv(std::io::BufReader::new(file))?;
    Ok(compare(&summaries))
}

fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Entry point used by the binary; returns the process exit status.
pub fn main_with(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Run(args) => RunSpec::from_args(args, ProtocolSelection::All)
            .and_then(|spec| run(&spec))
            .map(|r| r.table),
        Command::Compare {
            from: Some(path), ..
        } => compare_file(path).map(Some),
        Command::Compare { args, from: None } => RunSpec::from_args(args, ProtocolSelection::All)
            .and_then(|spec| run(&spec))
            .map(|r| r.table),
    };
    match result {
        Ok(table) => {
            if let Some(table) = table {
                let _ = write!(stdout, "{table}");
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
