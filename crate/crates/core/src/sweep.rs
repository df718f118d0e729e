//! Overhead versus tolerable-fault-rate sweeps over partition granularity.

use std::collections::BTreeMap;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::partition::{
    cut_stats, partition_brute_force, partition_spectral, Partition, BRUTE_FORCE_MAX_NODES,
};
use crate::reinforce::{reinforce_partitioned, ratio_f64, FaultKind};
use crate::reliability::{max_tolerable_p, naive_replication_p};

/// First line of every sweep CSV; bump when the column set changes.
pub const CSV_VERSION_LINE: &str = "# netreinforce sweep v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partitioner {
    Spectral,
    BruteForce,
    /// Brute force when the network is small enough, spectral otherwise.
    Auto,
}

impl Partitioner {
    pub fn partition(self, g: &Network, max_region: usize) -> Result<Partition> {
        match self {
            Partitioner::Spectral => partition_spectral(g, max_region),
            Partitioner::BruteForce => partition_brute_force(g, max_region),
            Partitioner::Auto if g.node_count() <= BRUTE_FORCE_MAX_NODES => {
                partition_brute_force(g, max_region)
            }
            Partitioner::Auto => partition_spectral(g, max_region),
        }
    }
}

impl FromStr for Partitioner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Partitioner::Spectral),
            "brute-force" | "brute" => Ok(Partitioner::BruteForce),
            "auto" => Ok(Partitioner::Auto),
            _ => Err(Error::Argument(format!(
                "unknown partitioner `{s}` (spectral, brute-force, auto)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub partitioner: Partitioner,
    /// Region size caps to try.
    pub grid: Vec<usize>,
    /// Fault parameters; `0` yields the unreinforced network.
    pub fs: Vec<usize>,
    pub kind: FaultKind,
    pub target: f64,
}

/// One design point. `max_region` is empty for designs that do not depend on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub design: String,
    pub max_region: Option<usize>,
    pub f: usize,
    pub k: usize,
    pub r_min: usize,
    pub r_max: usize,
    pub cut_edges: usize,
    pub epsilon: f64,
    pub nu: f64,
    pub eta: f64,
    pub max_p: f64,
    pub saturated: bool,
}

pub const DESIGN_ORIGINAL: &str = "original";
pub const DESIGN_PARTITIONED: &str = "partitioned";
pub const DESIGN_NAIVE: &str = "naive";

/// The network itself: one region, one copy.
pub fn original_row(g: &Network, kind: FaultKind, target: f64) -> Result<SweepRow> {
    let n = g.node_count();
    let max = max_tolerable_p(&[n], 0, kind, target)?;
    Ok(SweepRow {
        design: DESIGN_ORIGINAL.into(),
        max_region: None,
        f: 0,
        k: 1,
        r_min: n,
        r_max: n,
        cut_edges: 0,
        epsilon: 0.0,
        nu: 1.0,
        eta: 1.0,
        max_p: max.p,
        saturated: max.saturated,
    })
}

/// Evaluates every `(f, max_region)` pair; rows come back sorted by `eta`,
/// then `nu`, `f` and `max_region`.
pub fn pareto_sweep(g: &Network, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if !(cfg.target > 0.0 && cfg.target < 1.0) {
        return Err(Error::Argument(format!("target {} must lie in (0, 1)", cfg.target)));
    }
    if cfg.fs.is_empty() {
        return Ok(Vec::new());
    }
    let mut grid = cfg.grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let partitions: BTreeMap<usize, Partition> = grid
        .par_iter()
        .map(|&r| cfg.partitioner.partition(g, r).map(|p| (r, p)))
        .collect::<Result<_>>()?;

    let mut fs = cfg.fs.clone();
    fs.sort_unstable();
    fs.dedup();
    let jobs: Vec<(usize, usize)> = fs
        .iter()
        .filter(|&&f| f > 0)
        .flat_map(|&f| grid.iter().map(move |&r| (f, r)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(f, r)| partitioned_row(g, &partitions[&r], r, f, cfg.kind, cfg.target))
        .collect::<Result<Vec<_>>>()?;
    if fs.first() == Some(&0) {
        rows.push(original_row(g, cfg.kind, cfg.target)?);
    }
    rows.sort_by(|a, b| {
        a.eta
            .total_cmp(&b.eta)
            .then(a.nu.total_cmp(&b.nu))
            .then(a.f.cmp(&b.f))
            .then(a.max_region.cmp(&b.max_region))
    });
    Ok(rows)
}

pub fn partitioned_row(
    g: &Network,
    part: &Partition,
    max_region: usize,
    f: usize,
    kind: FaultKind,
    target: f64,
) -> Result<SweepRow> {
    let rn = reinforce_partitioned(g, part, f, kind)?;
    let cut = cut_stats(g, part)?;
    let oh = rn.overheads();
    let max = max_tolerable_p(&part.sizes(), f, kind, target)?;
    Ok(SweepRow {
        design: DESIGN_PARTITIONED.into(),
        max_region: Some(max_region),
        f,
        k: cut.regions,
        r_min: cut.r_min,
        r_max: cut.r_max,
        cut_edges: cut.cut_edges,
        epsilon: cut.epsilon_f64(),
        nu: oh.nu_f64(),
        eta: ratio_f64(oh.eta),
        max_p: max.p,
        saturated: max.saturated,
    })
}

/// Baseline of `k` disjoint copies of the whole network for each `k` in
/// `copies`. Such a design tolerates `k - 1` omission faults per copy-set.
pub fn naive_baseline_rows(n: usize, copies: &[usize], target: f64) -> Result<Vec<SweepRow>> {
    copies
        .iter()
        .map(|&k| {
            let max = naive_replication_p(n, k, target)?;
            Ok(SweepRow {
                design: DESIGN_NAIVE.into(),
                max_region: None,
                f: k - 1,
                k: 1,
                r_min: n,
                r_max: n,
                cut_edges: 0,
                epsilon: 0.0,
                nu: k as f64,
                eta: k as f64,
                max_p: max.p,
                saturated: max.saturated,
            })
        })
        .collect()
}

pub fn write_csv(rows: &[SweepRow], mut out: impl io::Write) -> Result<()> {
    let io_err = |e: io::Error| Error::Argument(format!("write failed: {e}"));
    writeln!(out, "{CSV_VERSION_LINE}").map_err(io_err)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(csv_header()).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_csv(text: &str) -> Result<Vec<SweepRow>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

pub fn csv_header() -> [&'static str; 12] {
    [
        "design",
        "max_region",
        "f",
        "k",
        "r_min",
        "r_max",
        "cut_edges",
        "epsilon",
        "nu",
        "eta",
        "max_p",
        "saturated",
    ]
}

fn csv_err(e: csv::Error) -> Error {
    Error::Argument(format!("csv: {e}"))
}
