use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MultipartiteGraph;
use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// Consecutive id blocks: part `i` holds the next `sizes[i]` ids.
pub fn sizes_layout(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut next = 0;
    sizes
        .iter()
        .map(|&s| {
            let part = (next..next + s).collect();
            next += s;
            part
        })
        .collect()
}

/// Random multipartite graph: each cross-part pair is an edge independently
/// with probability `target_delta`, drawn exactly as `num/den`.
pub fn gen_random(sizes: &[usize], target_delta: Ratio, seed: u64) -> Result<MultipartiteGraph> {
    if target_delta < Ratio::zero() || target_delta > Ratio::one() {
        return Err(Error::Precondition(format!(
            "target delta {target_delta} outside [0,1]"
        )));
    }
    let parts = sizes_layout(sizes);
    let n: usize = sizes.iter().sum();
    let part_of: Vec<usize> = parts
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.iter().map(move |_| i))
        .collect();
    let (num, den) = (*target_delta.numer(), *target_delta.denom());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if part_of[u] != part_of[v] && rng.gen_range(0..den) < num {
                edges.push((u, v));
            }
        }
    }
    MultipartiteGraph::new(parts, edges)
}

fn extremal_cores(sizes: &[usize], r: usize) -> Vec<Vec<usize>> {
    sizes_layout(sizes)
        .into_iter()
        .map(|p| p[..(p.len() / r + 1).min(p.len())].to_vec())
        .collect()
}

/// Complete multipartite graph minus every edge inside `V_1' ∪ … ∪ V_k'`,
/// where `V_i'` is the first `⌊|V_i|/r⌋ + 1` vertices of `V_i`.
pub fn gen_extremal(sizes: &[usize], r: usize) -> Result<MultipartiteGraph> {
    if r < 2 {
        return Err(Error::Precondition(format!("r must be at least 2, got {r}")));
    }
    if let Some(i) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyPart(i));
    }
    let mut core = vec![false; sizes.iter().sum()];
    for v in extremal_cores(sizes, r).into_iter().flatten() {
        core[v] = true;
    }
    let g = gen_random(sizes, Ratio::one(), 0)?;
    Ok(g.filter_edges(|u, v| !(core[u] && core[v])))
}

/// The independent set `V_1' ∪ … ∪ V_k'` planted by [`gen_extremal`].
pub fn extremal_independent_set(sizes: &[usize], r: usize) -> Vec<usize> {
    extremal_cores(sizes, r).into_iter().flatten().collect()
}
