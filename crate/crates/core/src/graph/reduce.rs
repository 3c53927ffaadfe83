use serde::Serialize;

use super::MultipartiteGraph;
use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// Output of [`reduce_parts`].
#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    #[serde(skip)]
    pub graph: MultipartiteGraph,
    /// `part_map[v]` is the index of the output part containing `v`.
    pub part_map: Vec<usize>,
    /// Pairs of input part indices merged, in merge order (indices refer to
    /// the part list at the time of the merge).
    pub merges: Vec<(usize, usize)>,
    /// Number of tiny parts dissolved into the others.
    pub splits: usize,
}

/// Merges parts whose combined size fits under `n/r` (smallest pair first,
/// deleting the edges between them) and dissolves parts smaller than
/// `tiny * n` into the parts with the most remaining capacity. Any
/// Hamiltonian (r-1)-cycle of the output is one of the input, since only
/// edges are removed.
pub fn reduce_parts(g: &MultipartiteGraph, r: usize, tiny: Ratio) -> Result<Reduction> {
    if r < 2 {
        return Err(Error::Precondition(format!("r must be at least 2, got {r}")));
    }
    let n = g.n();
    if let Some(i) = g.parts().iter().position(|p| p.len() * r > n) {
        return Err(Error::Precondition(format!(
            "part {i} has {} > n/r = {n}/{r} vertices",
            g.part(i).len()
        )));
    }
    let cap = n / r;
    let is_tiny = |len: usize| Ratio::from_integer(len as i64) < tiny * Ratio::from_integer(n as i64);

    let mut parts: Vec<Vec<usize>> = g.parts().iter().filter(|p| !p.is_empty()).cloned().collect();
    let mut merges = Vec::new();
    let mut splits = 0;
    loop {
        while parts.len() >= 2 {
            let mut order: Vec<usize> = (0..parts.len()).collect();
            order.sort_by_key(|&i| (parts[i].len(), i));
            let (a, b) = (order[0].min(order[1]), order[0].max(order[1]));
            if parts[a].len() + parts[b].len() > cap {
                break;
            }
            let moved = parts.remove(b);
            parts[a].extend(moved);
            parts[a].sort_unstable();
            merges.push((a, b));
        }

        let tiny_idx = (0..parts.len())
            .filter(|&i| is_tiny(parts[i].len()))
            .min_by_key(|&i| (parts[i].len(), i));
        let Some(t) = tiny_idx else { break };
        if parts.len() <= r {
            return Err(Error::InfeasibleSplit(format!(
                "part of size {} is below the tiny threshold but only {} parts remain",
                parts[t].len(),
                parts.len()
            )));
        }
        let dissolved = parts.remove(t);
        for v in dissolved {
            let target = (0..parts.len())
                .max_by_key(|&i| (cap.saturating_sub(parts[i].len()), std::cmp::Reverse(i)))
                .expect("at least r parts remain");
            if parts[target].len() >= cap {
                return Err(Error::InfeasibleSplit(format!(
                    "no part can absorb vertex {v} while staying within n/r = {cap}"
                )));
            }
            parts[target].push(v);
            parts[target].sort_unstable();
        }
        splits += 1;
    }

    let mut part_map = vec![0; n];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            part_map[v] = i;
        }
    }
    let k = parts.len();
    if k < r || k > 2 * r - 1 {
        return Err(Error::InfeasibleSplit(format!(
            "reduction ended with k' = {k} outside [{r}, {}]",
            2 * r - 1
        )));
    }
    let pm = part_map.clone();
    let graph = g
        .filter_edges(|u, v| pm[u] != pm[v])
        .repartition(parts)
        .expect("edges inside merged parts were removed");
    Ok(Reduction {
        graph,
        part_map,
        merges,
        splits,
    })
}
