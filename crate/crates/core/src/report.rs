//! Derived metrics (stability period, lifetime, throughput) and CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use crate::engine::{MetricsSeries, SeriesRow};
use crate::error::{Error, Result};
use crate::protocols::Protocol;

pub const SERIES_HEADER: &str =
    "round,alive,dead,primary_chs,secondary_chs,packets_cum,energy_total";
pub const SUMMARY_COMMENT: &str =
    "# fnd/hnd/lnd are -1 when the event did not occur within max_rounds";
pub const SUMMARY_HEADER: &str = "protocol,seed,fnd,hnd,lnd,packets";

/// Per-run scalars. Round events are `None` if they never happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Summary {
    pub protocol: Protocol,
    pub seed: u64,
    /// First node dead: end of the stability period.
    pub fnd: Option<u64>,
    /// Half of the nodes dead.
    pub hnd: Option<u64>,
    /// Last node dead: network lifetime.
    pub lnd: Option<u64>,
    /// Packets delivered to the base station over the run.
    pub total_packets: u64,
}

pub fn summarize(series: &MetricsSeries) -> Result<Summary> {
    let last = series.rows.last().ok_or(Error::EmptySeries)?;
    let half = series.n_nodes.div_ceil(2).max(1);
    let first_round =
        |pred: &dyn Fn(&SeriesRow) -> bool| series.rows.iter().find(|r| pred(r)).map(|r| r.round);
    Ok(Summary {
        protocol: series.protocol,
        seed: series.seed(),
        fnd: first_round(&|r| r.dead >= 1),
        hnd: first_round(&|r| r.dead >= half),
        lnd: first_round(&|r| r.alive == 0),
        total_packets: last.packets_cum,
    })
}

/// Writes the per-round series. Energies use 17 significant digits so the
/// file parses back to the exact same values.
pub fn emit_csv<W: Write>(series: &MetricsSeries, mut sink: W) -> Result<()> {
    writeln!(sink, "{SERIES_HEADER}")?;
    for r in &series.rows {
        writeln!(
            sink,
            "{},{},{},{},{},{},{:.16e}",
            r.round, r.alive, r.dead, r.primary_chs, r.secondary_chs, r.packets_cum, r.energy_total
        )?;
    }
    sink.flush()?;
    Ok(())
}

/// Parses a series written by [`emit_csv`].
pub fn parse_series_csv<R: BufRead>(reader: R) -> Result<Vec<SeriesRow>> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if i == 0 {
            if line != SERIES_HEADER {
                return Err(Error::Csv {
                    line: 1,
                    reason: format!("unexpected header `{line}`"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Csv {
                line: lineno,
                reason: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let bad = |what: &str| Error::Csv {
            line: lineno,
            reason: format!("bad {what}"),
        };
        rows.push(SeriesRow {
            round: fields[0].parse().map_err(|_| bad("round"))?,
            alive: fields[1].parse().map_err(|_| bad("alive"))?,
            dead: fields[2].parse().map_err(|_| bad("dead"))?,
            primary_chs: fields[3].parse().map_err(|_| bad("primary_chs"))?,
            secondary_chs: fields[4].parse().map_err(|_| bad("secondary_chs"))?,
            packets_cum: fields[5].parse().map_err(|_| bad("packets_cum"))?,
            energy_total: fields[6].parse().map_err(|_| bad("energy_total"))?,
        });
    }
    Ok(rows)
}

fn opt_round(v: Option<u64>) -> String {
    v.map_or_else(|| "-1".to_string(), |r| r.to_string())
}

/// Writes the batch summary, sorted by protocol then seed.
pub fn emit_summary_csv<W: Write>(summaries: &[Summary], mut sink: W) -> Result<()> {
    let mut sorted = summaries.to_vec();
    sorted.sort_by_key(|s| (s.protocol, s.seed));
    writeln!(sink, "{SUMMARY_COMMENT}")?;
    writeln!(sink, "{SUMMARY_HEADER}")?;
    for s in &sorted {
        writeln!(
            sink,
            "{},{},{},{},{},{}",
            s.protocol,
            s.seed,
            opt_round(s.fnd),
            opt_round(s.hnd),
            opt_round(s.lnd),
            s.total_packets
        )?;
    }
    sink.flush()?;
    Ok(())
}

pub fn parse_summary_csv<R: BufRead>(reader: R) -> Result<Vec<Summary>> {
    let mut out = Vec::new();
    let mut seen_header = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line != SUMMARY_HEADER {
                return Err(Error::Csv {
                    line: lineno,
                    reason: format!("unexpected header `{line}`"),
                });
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Csv {
                line: lineno,
                reason: format!("expected 6 fields, got {}", f.len()),
            });
        }
        let bad = |what: &str| Error::Csv {
            line: lineno,
            reason: format!("bad {what}"),
        };
        let round = |s: &str, what: &str| -> Result<Option<u64>> {
            if s == "-1" {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(what))
            }
        };
        out.push(Summary {
            protocol: f[0].parse()?,
            seed: f[1].parse().map_err(|_| bad("seed"))?,
            fnd: round(f[2], "fnd")?,
            hnd: round(f[3], "hnd")?,
            lnd: round(f[4], "lnd")?,
            total_packets: f[5].parse().map_err(|_| bad("packets"))?,
        });
    }
    Ok(out)
}

/// Median where `None` (event never happened) sorts after every value.
/// Returns `None` when the median itself falls on an absent event.
pub fn median_round(values: &[Option<u64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by_key(|x| x.unwrap_or(u64::MAX));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2].map(|x| x as f64)
    } else {
        Some((v[n / 2 - 1]? as f64 + v[n / 2]? as f64) / 2.0)
    }
}

pub fn median(values: &[u64]) -> f64 {
    let opts: Vec<Option<u64>> = values.iter().copied().map(Some).collect();
    median_round(&opts).unwrap_or(0.0)
}

/// One protocol's line in the comparison table (medians across seeds).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub protocol: Protocol,
    pub runs: usize,
    pub fnd: Option<f64>,
    pub hnd: Option<f64>,
    pub lnd: Option<f64>,
    pub packets: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    /// Sorted by FND, longest stability period first.
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, protocol: Protocol) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.protocol == protocol)
    }

    /// How much shorter `other`'s stability period is than `reference`'s:
    /// `1 - FND(other) / FND(reference)`.
    pub fn fnd_shortfall(&self, other: Protocol, reference: Protocol) -> Option<f64> {
        let o = self.row(other)?.fnd?;
        let r = self.row(reference)?.fnd?;
        (r > 0.0).then(|| 1.0 - o / r)
    }

    pub fn write_csv<W: Write>(&self, mut sink: W) -> Result<()> {
        write!(sink, "protocol,runs,fnd,hnd,lnd,packets")?;
        for r in &self.rows {
            write!(sink, ",fnd_shortfall_vs_{}", r.protocol)?;
        }
        writeln!(sink)?;
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-1".to_string(), |x| x.to_string());
        for row in &self.rows {
            write!(
                sink,
                "{},{},{},{},{},{}",
                row.protocol,
                row.runs,
                fmt_opt(row.fnd),
                fmt_opt(row.hnd),
                fmt_opt(row.lnd),
                row.packets
            )?;
            for reference in &self.rows {
                let v = self.fnd_shortfall(row.protocol, reference.protocol);
                write!(
                    sink,
                    ",{}",
                    v.map_or_else(String::new, |x| format!("{x:.6}"))
                )?;
            }
            writeln!(sink)?;
        }
        sink.flush()?;
        Ok(())
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"));
        writeln!(
            f,
            "{:<8} {:>5} {:>10} {:>10} {:>10} {:>12}",
            "protocol", "runs", "FND", "HND", "LND", "packets"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<8} {:>5} {:>10} {:>10} {:>10} {:>12.1}",
                r.protocol.name().to_uppercase(),
                r.runs,
                cell(r.fnd),
                cell(r.hnd),
                cell(r.lnd),
                r.packets
            )?;
        }
        if let Some(best) = self.rows.first() {
            writeln!(f)?;
            writeln!(
                f,
                "stability period relative to {}:",
                best.protocol.name().to_uppercase()
            )?;
            for r in self.rows.iter().skip(1) {
                if let Some(s) = self.fnd_shortfall(r.protocol, best.protocol) {
                    writeln!(
                        f,
                        "  {:<8} {:.1}% less",
                        r.protocol.name().to_uppercase(),
                        s * 100.0
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Aggregates per-run summaries into a per-protocol comparison.
pub fn compare(summaries: &[Summary]) -> ComparisonTable {
    let mut by_protocol: BTreeMap<Protocol, Vec<&Summary>> = BTreeMap::new();
    for s in summaries {
        by_protocol.entry(s.protocol).or_default().push(s);
    }
    let mut rows: Vec<ComparisonRow> = by_protocol
        .into_iter()
        .map(|(protocol, runs)| {
            let col = |get: fn(&Summary) -> Option<u64>| {
                median_round(&runs.iter().map(|s| get(s)).collect::<Vec<_>>())
            };
            ComparisonRow {
                protocol,
                runs: runs.len(),
                fnd: col(|s| s.fnd),
                hnd: col(|s| s.hnd),
                lnd: col(|s| s.lnd),
                packets: median(&runs.iter().map(|s| s.total_packets).collect::<Vec<_>>()),
            }
        })
        .collect();
    // absent FND means the network never lost a node: longest stability
    rows.sort_by(|a, b| {
        let key = |r: &ComparisonRow| r.fnd.unwrap_or(f64::INFINITY);
        key(b).total_cmp(&key(a)).then(a.protocol.cmp(&b.protocol))
    });
    ComparisonTable { rows }
}
