use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::Serialize;

use super::matrix::TemplateMatrix;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::MultipartiteGraph;
use crate::ratio::Ratio;
use crate::rng;

const STAGE: u64 = 0x7265_6669;
const REPAIR_STEPS: usize = 200;

/// `(group, cell, vertex)`.
type Slot = (usize, usize, usize);

/// Residual parts split into `ell` groups of `r` equal cells each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Refinement {
    /// `cols[j]` lists the part indices `i_{j,1} < … < i_{j,r}`.
    pub cols: Vec<Vec<usize>>,
    /// `cells[j][h]` is the cell of group `j` inside part `cols[j][h]`.
    pub cells: Vec<Vec<Vec<usize>>>,
    pub attempts: usize,
    /// Smallest `deg(v, C) / |C|` over cells `C` and vertices `v` in another
    /// cell of the same group, i.e. the least proportional minimum degree of
    /// a group.
    #[serde(with = "crate::ratio::serde_ratio")]
    pub min_ratio: Ratio,
    pub degree_ok: bool,
    /// A pair `(v, j, h)` achieving `min_ratio`, if any.
    pub worst: Option<(usize, usize, usize)>,
}

/// Randomly splits every residual part into cells of sizes `a_ij x_j`, then
/// repairs the split by swapping same-part vertices between groups until
/// every group has proportional minimum degree at least `threshold`.
/// Resamples up to the retry limit; with `require` unset the best split
/// found is returned even when it misses the threshold.
pub fn refine_partition(
    g: &MultipartiteGraph,
    residual: &[Vec<usize>],
    a: &TemplateMatrix,
    x: &[usize],
    threshold: Ratio,
    cfg: &Config,
    require: bool,
) -> Result<Refinement> {
    if residual.len() != a.k || x.len() != a.ell() {
        return Err(Error::Precondition(
            "residual parts or x do not match the template matrix".into(),
        ));
    }
    let rows = a.apply(x);
    if let Some(i) = (0..a.k).find(|&i| rows[i] != residual[i].len()) {
        return Err(Error::Precondition(format!(
            "row {i}: cells sum to {} but the residual part has {} vertices",
            rows[i],
            residual[i].len()
        )));
    }
    let cols: Vec<Vec<usize>> = a.columns.iter().map(|c| c.ones()).collect();
    let mut rng = rng::stream(cfg.seed, STAGE);
    let mut best: Option<Refinement> = None;
    for attempt in 1..=cfg.retry_limit {
        let mut pools = residual.to_vec();
        for p in &mut pools {
            p.shuffle(&mut rng);
        }
        let mut cells = vec![Vec::with_capacity(a.r); a.ell()];
        for (j, col) in cols.iter().enumerate() {
            for &i in col {
                let at = pools[i].len() - x[j];
                cells[j].push(pools[i].split_off(at));
            }
        }
        repair(g, &cols, &mut cells, threshold);
        cells.iter_mut().flatten().for_each(|c| c.sort_unstable());
        let (min_ratio, worst) = score(g, &cells);
        let cand = Refinement {
            cols: cols.clone(),
            cells,
            attempts: attempt,
            min_ratio,
            degree_ok: min_ratio >= threshold,
            worst,
        };
        if cand.degree_ok {
            return Ok(cand);
        }
        if best.as_ref().is_none_or(|b| cand.min_ratio > b.min_ratio) {
            best = Some(cand);
        }
    }
    let mut best = best.expect("retry_limit >= 1");
    best.attempts = cfg.retry_limit;
    if require {
        let (v, j, h) = best.worst.unwrap_or_default();
        return Err(Error::Exhausted {
            stage: "refine partition",
            attempts: cfg.retry_limit,
            detail: format!(
                "best split has vertex {v} seeing {} of cell ({j},{h}), below {threshold}",
                best.min_ratio
            ),
        });
    }
    Ok(best)
}

fn score(g: &MultipartiteGraph, cells: &[Vec<Vec<usize>>]) -> (Ratio, Option<(usize, usize, usize)>) {
    let mut min = Ratio::from_integer(1);
    let mut worst = None;
    for (j, group) in cells.iter().enumerate() {
        for (h, cell) in group.iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            for v in group
                .iter()
                .enumerate()
                .filter(|&(h2, _)| h2 != h)
                .flat_map(|(_, c)| c.iter().copied())
            {
                let q = Ratio::new(g.deg_into(v, cell) as i64, cell.len() as i64);
                if q < min || worst.is_none() {
                    min = min.min(q);
                    worst = Some((v, j, h));
                }
            }
        }
    }
    (min, worst)
}

/// Violating `(v, cell)` pairs and their total shortfall below `threshold`.
fn badness(g: &MultipartiteGraph, cells: &[Vec<Vec<usize>>], threshold: Ratio) -> (usize, Ratio) {
    let mut count = 0;
    let mut gap = Ratio::from_integer(0);
    for group in cells {
        for (h, cell) in group.iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            for (h2, other) in group.iter().enumerate() {
                if h2 == h {
                    continue;
                }
                for &v in other {
                    let q = Ratio::new(g.deg_into(v, cell) as i64, cell.len() as i64);
                    if q < threshold {
                        count += 1;
                        gap += threshold - q;
                    }
                }
            }
        }
    }
    (count, gap)
}

/// Best-improvement local search over swaps of two same-part vertices in
/// different groups. Candidate movers are the endpoints of violating pairs.
fn repair(g: &MultipartiteGraph, cols: &[Vec<usize>], cells: &mut [Vec<Vec<usize>>], threshold: Ratio) {
    let mut current = badness(g, cells, threshold);
    let mut steps = 0;
    while current.0 > 0 && steps < REPAIR_STEPS {
        steps += 1;
        let mut movers = BTreeSet::new();
        for (j, group) in cells.iter().enumerate() {
            for (h, cell) in group.iter().enumerate() {
                for (hv, other) in group.iter().enumerate().filter(|&(hv, _)| hv != h) {
                    for &v in other {
                        if Ratio::new(g.deg_into(v, cell) as i64, cell.len() as i64) >= threshold {
                            continue;
                        }
                        // move v away, or move one of its non-neighbours in the cell away
                        movers.insert((j, hv, v));
                        movers.extend(cell.iter().filter(|&&u| !g.adjacent(u, v)).map(|&u| (j, h, u)));
                    }
                }
            }
        }
        let mut best: Option<((usize, Ratio), Slot, Slot)> = None;
        for &(ja, ha, a) in &movers {
            let part = cols[ja][ha];
            for (jb, col) in cols.iter().enumerate() {
                if jb == ja {
                    continue;
                }
                let Some(hb) = col.iter().position(|&i| i == part) else {
                    continue;
                };
                for ib in 0..cells[jb][hb].len() {
                    let b = cells[jb][hb][ib];
                    let ia = cells[ja][ha].iter().position(|&x| x == a).expect("a in its cell");
                    cells[ja][ha][ia] = b;
                    cells[jb][hb][ib] = a;
                    let after = badness(g, cells, threshold);
                    cells[ja][ha][ia] = a;
                    cells[jb][hb][ib] = b;
                    if after < current && best.as_ref().is_none_or(|(s, _, _)| after < *s) {
                        best = Some((after, (ja, ha, a), (jb, hb, b)));
                    }
                }
            }
        }
        let Some((after, (ja, ha, a), (jb, hb, b))) = best else {
            return;
        };
        let ia = cells[ja][ha].iter().position(|&x| x == a).expect("a in its cell");
        let ib = cells[jb][hb].iter().position(|&x| x == b).expect("b in its cell");
        cells[ja][ha][ia] = b;
        cells[jb][hb][ib] = a;
        current = after;
    }
}

#[cfg(test)]
mod tests {
    use super::super::matrix::build_template_matrix;
    use super::*;
    use crate::graph::gen_random;

    #[test]
    fn complete_hosts_pass_first_try() {
        let g = gen_random(&[10, 10, 6, 4], Ratio::from_integer(1), 0).unwrap();
        let a = build_template_matrix(4, 3, 2).unwrap();
        let residual = g.parts().to_vec();
        let rf = refine_partition(&g, &residual, &a, &[6, 4], Ratio::new(5, 6), &Config::for_r(3), true).unwrap();
        assert_eq!(rf.attempts, 1);
        assert!(rf.degree_ok);
        assert_eq!(rf.cols, vec![vec![0, 1, 2], vec![0, 1, 3]]);
        for (j, size) in [(0, 6), (1, 4)] {
            assert!(rf.cells[j].iter().all(|c| c.len() == size));
        }
        for i in 0..4 {
            let mut all: Vec<usize> = (0..2)
                .flat_map(|j| {
                    rf.cols[j]
                        .iter()
                        .zip(&rf.cells[j])
                        .filter(|(&p, _)| p == i)
                        .flat_map(|(_, c)| c.clone())
                })
                .collect();
            all.sort_unstable();
            assert_eq!(all, residual[i]);
        }
    }

    #[test]
    fn single_column_keeps_residual_parts() {
        let g = gen_random(&[4, 4, 4], Ratio::from_integer(1), 0).unwrap();
        let a = build_template_matrix(3, 3, 0).unwrap();
        let rf = refine_partition(&g, g.parts(), &a, &[4], Ratio::new(2, 3), &Config::for_r(3), true).unwrap();
        assert_eq!(rf.cells[0], g.parts().to_vec());
    }

    #[test]
    fn sparse_hosts_exhaust_or_degrade() {
        let g = gen_random(&[6, 6, 6], Ratio::new(1, 3), 3).unwrap();
        let a = build_template_matrix(3, 3, 0).unwrap();
        let mut cfg = Config::for_r(3);
        cfg.retry_limit = 3;
        let err = refine_partition(&g, g.parts(), &a, &[6], Ratio::new(5, 6), &cfg, true).unwrap_err();
        assert!(matches!(
            err,
            Error::Exhausted {
                stage: "refine partition",
                ..
            }
        ));
        let rf = refine_partition(&g, g.parts(), &a, &[6], Ratio::new(5, 6), &cfg, false).unwrap();
        assert!(!rf.degree_ok && rf.worst.is_some());
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let g = gen_random(&[4, 4, 4], Ratio::from_integer(1), 0).unwrap();
        let a = build_template_matrix(3, 3, 0).unwrap();
        assert!(refine_partition(&g, g.parts(), &a, &[3], Ratio::new(1, 2), &Config::for_r(3), true).is_err());
    }
}
