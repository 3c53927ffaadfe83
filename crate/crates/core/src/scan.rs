//! Threshold scans: random instances over a grid of part sizes, `r` and
//! target densities, each decided by the exact oracle.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{degree_profile, gen_random};
use crate::oracle::{ham_power_cycle_exists, independence_necessity, Necessity, SearchBudget};
use crate::ratio::{format_ratio, Ratio};

pub const CSV_HEADER: [&str; 9] = [
    "n",
    "k",
    "r",
    "sizes",
    "target_delta",
    "measured_delta",
    "answer",
    "nodes",
    "seed",
];

/// One `(sizes, r, delta)` cell of the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanCell {
    pub sizes: Vec<usize>,
    pub r: usize,
    pub target_delta: Ratio,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub sizes: Vec<usize>,
    #[serde(with = "crate::ratio::serde_ratio")]
    pub target_delta: Ratio,
    #[serde(with = "crate::ratio::serde_ratio")]
    pub measured_delta: Ratio,
    pub answer: String,
    pub nodes: u64,
    pub seed: u64,
    /// Whether every part has at most `n/r` vertices.
    pub necessity: bool,
}

impl ScanRow {
    fn record(&self) -> [String; 9] {
        [
            self.n.to_string(),
            self.k.to_string(),
            self.r.to_string(),
            format_sizes(&self.sizes),
            format_ratio(&self.target_delta),
            format_ratio(&self.measured_delta),
            self.answer.clone(),
            self.nodes.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// `3-3-3`.
pub fn format_sizes(sizes: &[usize]) -> String {
    sizes.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let sizes: Vec<usize> = s
        .split('-')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("invalid part sizes `{s}`")))
        })
        .collect::<Result<_>>()?;
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::Parse(format!(
            "part sizes `{s}` need at least two positive entries"
        )));
    }
    Ok(sizes)
}

/// Every combination of the given ranges, sizes outermost.
pub fn grid(sizes: &[Vec<usize>], rs: &[usize], deltas: &[Ratio]) -> Vec<ScanCell> {
    let mut cells = Vec::new();
    for s in sizes {
        for &r in rs {
            for &d in deltas {
                cells.push(ScanCell {
                    sizes: s.clone(),
                    r,
                    target_delta: d,
                });
            }
        }
    }
    cells
}

/// Instance seed for sample `j` of cell `i`: a splitmix64 step on the
/// base seed and the position, so cells can run in any order.
pub fn instance_seed(seed: u64, cell: usize, sample: usize) -> u64 {
    let mut z = seed ^ (((cell as u64) << 32 | sample as u64) + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `samples` instances per cell in parallel. Row order is cell-major
/// and independent of scheduling.
pub fn run_scan(cells: &[ScanCell], samples: usize, budget: u64, seed: u64) -> Result<Vec<ScanRow>> {
    if cells.is_empty() {
        return Err(Error::Precondition("scan needs at least one cell".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|i| (0..samples).map(move |j| (i, j)))
        .collect();
    jobs.par_iter()
        .map(|&(i, j)| {
            let cell = &cells[i];
            let s = instance_seed(seed, i, j);
            let g = gen_random(&cell.sizes, cell.target_delta, s)?;
            let measured = degree_profile(&g)?.delta_p;
            let out = ham_power_cycle_exists(&g, cell.r, SearchBudget::nodes(budget));
            Ok(ScanRow {
                n: g.n(),
                k: g.k(),
                r: cell.r,
                sizes: cell.sizes.clone(),
                target_delta: cell.target_delta,
                measured_delta: measured,
                answer: out.answer.label().to_string(),
                nodes: out.nodes_expanded,
                seed: s,
                necessity: independence_necessity(&g, cell.r) == Necessity::Pass,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.record()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
