//! Exact counting and sampling of connecting walks.
//!
//! Given `(r-1)`-walks `P1` and `P2` and vertex pools `U_1, …, U_r`, a
//! connecting walk of length `ell` is a sequence `Q` drawn from the union of
//! the pools such that `P1 Q P2` is again an `(r-1)`-walk. Walks are counted
//! by dynamic programming over the last `r - 1` vertices.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::MultipartiteGraph;
use crate::paths::{is_path, is_walk};
use crate::ratio::Ratio;
use crate::rng;

const STAGE: u64 = 0x7761_6c6b;
const SEARCH_BUDGET: u64 = 200_000;

/// Forward counts: `layers[t]` maps the last `r - 1` vertices of `P1` plus
/// the first `t` walk vertices to the number of ways of reaching it.
#[derive(Clone, Debug, Default, Serialize)]
pub struct WalkDpTable {
    pub ell: usize,
    #[serde(skip)]
    pub layers: Vec<HashMap<Vec<usize>, u128>>,
}

impl WalkDpTable {
    pub fn state_count(&self) -> usize {
        self.layers.iter().map(HashMap::len).sum()
    }
}

#[derive(Clone, Debug)]
pub struct WalkCount {
    pub total: u128,
    pub table: WalkDpTable,
    // completion counts per layer, used for weighted sampling
    completions: Vec<HashMap<Vec<usize>, u128>>,
    pool: Vec<usize>,
}

/// Part index shared by every vertex of `set`, or `None` when empty.
fn part_of_set(g: &MultipartiteGraph, set: &[usize]) -> Result<Option<usize>> {
    let Some(&first) = set.first() else {
        return Ok(None);
    };
    let i = g.part_of(first);
    match set.iter().find(|&&v| g.part_of(v) != i) {
        Some(v) => Err(Error::Precondition(format!(
            "pool contains vertices {first} and {v} from different parts"
        ))),
        None => Ok(Some(i)),
    }
}

fn check_terminals(g: &MultipartiteGraph, u: &[Vec<usize>], p1: &[usize], p2: &[usize], r: usize) -> Result<()> {
    if u.len() != r {
        return Err(Error::Precondition(format!("expected {r} pools, got {}", u.len())));
    }
    for (name, p) in [("P1", p1), ("P2", p2)] {
        if p.len() < r {
            return Err(Error::IllTerminated(format!(
                "{name} has {} vertices, fewer than r = {r}",
                p.len()
            )));
        }
        if let Some(&v) = p.iter().find(|&&v| v >= g.n()) {
            return Err(Error::DanglingVertex { vertex: v, n: g.n() });
        }
    }
    let tail = &p1[p1.len() - r..];
    let head = &p2[..r];
    for h in 0..r {
        if let Some(i) = part_of_set(g, &u[h])? {
            if g.part_of(tail[h]) != i || g.part_of(head[h]) != i {
                return Err(Error::IllTerminated(format!(
                    "terminal vertex at slot {h} is not in the part of pool {h}"
                )));
            }
        }
    }
    if !is_walk(g, tail, r) || !is_walk(g, head, r) {
        return Err(Error::IllTerminated("terminal r-tuple is not a clique".into()));
    }
    Ok(())
}

fn add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::CountOverflow)
}

/// Counts the walks `Q` of length `ell` over `U_1 ∪ … ∪ U_r` with `P1 Q P2`
/// an `(r-1)`-walk. Repeated vertices are allowed.
pub fn count_connecting_walks(
    g: &MultipartiteGraph,
    u: &[Vec<usize>],
    p1: &[usize],
    p2: &[usize],
    ell: usize,
    r: usize,
) -> Result<WalkCount> {
    if r < 2 || ell == 0 {
        return Err(Error::Precondition("connecting walks need r >= 2 and ell >= 1".into()));
    }
    check_terminals(g, u, p1, p2, r)?;
    let mut pool: Vec<usize> = u.iter().flatten().copied().collect();
    pool.sort_unstable();
    pool.dedup();

    let start = p1[p1.len() - (r - 1)..].to_vec();
    let mut layers = vec![HashMap::from([(start, 1u128)])];
    for _ in 0..ell {
        let mut next: HashMap<Vec<usize>, u128> = HashMap::new();
        for (state, &c) in layers.last().expect("nonempty") {
            for &v in &pool {
                if state.iter().all(|&w| g.adjacent(w, v)) {
                    let mut s = state[1..].to_vec();
                    s.push(v);
                    let e = next.entry(s).or_insert(0);
                    *e = add(*e, c)?;
                }
            }
        }
        layers.push(next);
    }

    let p2_head = p2[..r - 1].to_vec();
    let fits = |state: &[usize]| -> bool {
        let mut seam = state.to_vec();
        seam.extend_from_slice(&p2_head);
        is_walk(g, &seam, r)
    };
    let mut completions: Vec<HashMap<Vec<usize>, u128>> = vec![HashMap::new(); ell + 1];
    completions[ell] = layers[ell].keys().filter(|s| fits(s)).map(|s| (s.clone(), 1)).collect();
    let mut total = 0u128;
    for (s, &c) in &layers[ell] {
        if completions[ell].contains_key(s) {
            total = add(total, c)?;
        }
    }
    for t in (0..ell).rev() {
        let mut here = HashMap::new();
        for state in layers[t].keys() {
            let mut sum = 0u128;
            for &v in &pool {
                if state.iter().all(|&w| g.adjacent(w, v)) {
                    let mut s = state[1..].to_vec();
                    s.push(v);
                    if let Some(&c) = completions[t + 1].get(&s) {
                        sum = add(sum, c)?;
                    }
                }
            }
            if sum > 0 {
                here.insert(state.clone(), sum);
            }
        }
        completions[t] = here;
    }
    debug_assert_eq!(completions[0].values().sum::<u128>(), total);
    Ok(WalkCount {
        total,
        table: WalkDpTable { ell, layers },
        completions,
        pool,
    })
}

impl WalkCount {
    /// Draws one connecting walk uniformly at random, or `None` if there
    /// are none.
    pub fn sample<R: Rng>(&self, g: &MultipartiteGraph, rng: &mut R) -> Option<Vec<usize>> {
        if self.total == 0 {
            return None;
        }
        let ell = self.table.ell;
        let mut state = self.table.layers[0].keys().next()?.clone();
        let mut walk = Vec::with_capacity(ell);
        for t in 0..ell {
            let here = *self.completions[t].get(&state)?;
            let mut pick = rng.gen_range(0..here);
            let mut chosen = None;
            for &v in &self.pool {
                if !state.iter().all(|&w| g.adjacent(w, v)) {
                    continue;
                }
                let mut s = state[1..].to_vec();
                s.push(v);
                if let Some(&c) = self.completions[t + 1].get(&s) {
                    if pick < c {
                        chosen = Some((v, s));
                        break;
                    }
                    pick -= c;
                }
            }
            let (v, s) = chosen?;
            walk.push(v);
            state = s;
        }
        Some(walk)
    }
}

impl WalkCount {
    /// Backtracking over states that can still complete, refusing repeated
    /// vertices. Finds a repeat-free walk when sampling keeps hitting
    /// repeats because the pools are barely large enough.
    pub fn search_path<R: Rng>(&self, g: &MultipartiteGraph, rng: &mut R, budget: u64) -> Option<Vec<usize>> {
        fn go<R: Rng>(
            wc: &WalkCount,
            g: &MultipartiteGraph,
            state: &[usize],
            walk: &mut Vec<usize>,
            rng: &mut R,
            nodes: &mut u64,
        ) -> bool {
            let t = walk.len();
            if t == wc.table.ell {
                return true;
            }
            if *nodes == 0 {
                return false;
            }
            *nodes -= 1;
            let mut next: Vec<(usize, Vec<usize>)> = wc
                .pool
                .iter()
                .copied()
                .filter(|v| !walk.contains(v) && state.iter().all(|&w| g.adjacent(w, *v)))
                .filter_map(|v| {
                    let mut s = state[1..].to_vec();
                    s.push(v);
                    wc.completions[t + 1].contains_key(&s).then_some((v, s))
                })
                .collect();
            next.shuffle(rng);
            for (v, s) in next {
                walk.push(v);
                if go(wc, g, &s, walk, rng, nodes) {
                    return true;
                }
                walk.pop();
            }
            false
        }
        if self.total == 0 {
            return None;
        }
        let start = self.table.layers[0].keys().next()?.clone();
        let mut walk = Vec::with_capacity(self.table.ell);
        let mut nodes = budget;
        go(self, g, &start, &mut walk, rng, &mut nodes).then_some(walk)
    }
}

/// Samples connecting walks over the pools minus `forbidden` until one is a
/// path, up to the retry limit, then falls back to a repeat-free search.
pub fn find_connector(
    g: &MultipartiteGraph,
    u: &[Vec<usize>],
    p1: &[usize],
    p2: &[usize],
    ell: usize,
    forbidden: &HashSet<usize>,
    cfg: &Config,
) -> Result<Vec<usize>> {
    let r = cfg.r;
    let pools: Vec<Vec<usize>> = u
        .iter()
        .map(|p| p.iter().copied().filter(|v| !forbidden.contains(v)).collect())
        .collect();
    let count = count_connecting_walks(g, &pools, p1, p2, ell, r)?;
    let mut rng = rng::stream(cfg.seed, STAGE ^ (p1.last().copied().unwrap_or(0) as u64) << 20);
    if count.total > 0 {
        for _ in 0..cfg.retry_limit {
            let q = count.sample(g, &mut rng).expect("positive count yields a walk");
            if is_path(g, &q, r) {
                debug_assert!(is_walk(g, &[p1, &q, p2].concat(), r));
                return Ok(q);
            }
        }
        if let Some(q) = count.search_path(g, &mut rng, SEARCH_BUDGET) {
            debug_assert!(is_path(g, &q, r) && is_walk(g, &[p1, &q, p2].concat(), r));
            return Ok(q);
        }
    }
    Err(Error::ConnectorExhausted {
        samples: if count.total > 0 { cfg.retry_limit } else { 0 },
        walks: count.total,
    })
}

/// Number of `u` in `U` whose neighbourhood contains every vertex of `W`.
pub fn rich_count(g: &MultipartiteGraph, w: &[usize], u: &[usize]) -> usize {
    u.iter().filter(|&&x| w.iter().all(|&y| g.adjacent(x, y))).count()
}

/// `W` is rich for `(U, sigma)` when at least `sigma n` vertices of `U` see
/// all of `W`.
pub fn is_rich(g: &MultipartiteGraph, w: &[usize], u: &[usize], sigma: Ratio) -> bool {
    Ratio::from_integer(rich_count(g, w, u) as i64) >= sigma * Ratio::from_integer(g.n() as i64)
}
