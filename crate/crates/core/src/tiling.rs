//! Transversal cliques, fractional and integral clique tilings, and a
//! greedy cover by properly terminated paths.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use serde::{Serialize, Serializer};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::MultipartiteGraph;
use crate::ratio::Ratio;
use crate::rng;

const STAGE: u64 = 0x7469_6c65;

/// Every `r`-clique with its vertices in `r` distinct parts, each listed in
/// increasing part order, the list sorted lexicographically.
pub fn enumerate_cliques(g: &MultipartiteGraph, r: usize) -> Vec<Vec<usize>> {
    fn go(g: &MultipartiteGraph, r: usize, from_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        // leave room for the remaining picks
        for i in from_part..=g.k().saturating_sub(r - cur.len()) {
            for &v in g.part(i) {
                if cur.iter().all(|&u| g.adjacent(u, v)) {
                    cur.push(v);
                    go(g, r, i + 1, cur, out);
                    cur.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    if r >= 1 && r <= g.k() {
        go(g, r, 0, &mut Vec::with_capacity(r), &mut out);
    }
    out.sort();
    out
}

fn ser_big<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    if q.denom().is_one() {
        s.collect_str(q.numer())
    } else {
        s.collect_str(&format_args!("{}/{}", q.numer(), q.denom()))
    }
}

fn ser_big_vec<S: Serializer>(qs: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(|q| {
        if q.denom().is_one() {
            q.numer().to_string()
        } else {
            format!("{}/{}", q.numer(), q.denom())
        }
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightedClique {
    pub clique: Vec<usize>,
    #[serde(serialize_with = "ser_big")]
    pub weight: BigRational,
}

/// An optimal fractional tiling with its optimality certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FractionalTiling {
    /// Cliques with positive weight.
    pub weights: Vec<WeightedClique>,
    #[serde(serialize_with = "ser_big")]
    pub value: BigRational,
    /// Vertex prices: non-negative, at least 1 on every clique, summing to
    /// `value`.
    #[serde(serialize_with = "ser_big_vec")]
    pub prices: Vec<BigRational>,
    pub perfect: bool,
    pub pivots: usize,
}

impl FractionalTiling {
    pub fn load(&self, n: usize) -> Vec<BigRational> {
        let mut load = vec![BigRational::zero(); n];
        for wc in &self.weights {
            for &v in &wc.clique {
                load[v] += &wc.weight;
            }
        }
        load
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Maximises the total clique weight subject to every vertex carrying load
/// at most one, exactly, by the simplex method with Bland's rule.
pub fn fractional_tiling(g: &MultipartiteGraph, r: usize) -> FractionalTiling {
    let cliques = enumerate_cliques(g, r);
    let (m, nc) = (g.n(), cliques.len());
    let width = nc + m;
    // rows: vertex constraints with slack columns nc..nc+m
    let mut a: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); width]; m];
    for (j, k) in cliques.iter().enumerate() {
        for &v in k {
            a[v][j] = BigRational::one();
        }
    }
    for (v, row) in a.iter_mut().enumerate() {
        row[nc + v] = BigRational::one();
    }
    let mut rhs = vec![BigRational::one(); m];
    let mut basis: Vec<usize> = (nc..nc + m).collect();
    // reduced costs c_j - z_j
    let mut d: Vec<BigRational> = (0..width).map(|j| if j < nc { big(1) } else { big(0) }).collect();
    let mut value = BigRational::zero();
    let mut pivots = 0;

    while let Some(e) = (0..width).find(|&j| d[j].is_positive()) {
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if !a[i][e].is_positive() {
                continue;
            }
            leave = match leave {
                None => Some(i),
                Some(l) => {
                    let lhs = &rhs[i] * &a[l][e];
                    let rhs_l = &rhs[l] * &a[i][e];
                    if lhs < rhs_l || (lhs == rhs_l && basis[i] < basis[l]) {
                        Some(i)
                    } else {
                        Some(l)
                    }
                }
            };
        }
        let l = leave.expect("the load constraints bound every clique weight");
        let piv = a[l][e].clone();
        for x in a[l].iter_mut() {
            *x /= &piv;
        }
        rhs[l] /= &piv;
        let prow = a[l].clone();
        let prhs = rhs[l].clone();
        for i in 0..m {
            if i != l && !a[i][e].is_zero() {
                let f = a[i][e].clone();
                for (x, p) in a[i].iter_mut().zip(&prow) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
                rhs[i] -= &f * &prhs;
            }
        }
        let f = d[e].clone();
        for (x, p) in d.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *x -= &f * p;
            }
        }
        value += &f * &prhs;
        basis[l] = e;
        pivots += 1;
    }

    let mut weights: Vec<WeightedClique> = basis
        .iter()
        .zip(&rhs)
        .filter(|(&j, w)| j < nc && w.is_positive())
        .map(|(&j, w)| WeightedClique {
            clique: cliques[j].clone(),
            weight: w.clone(),
        })
        .collect();
    weights.sort_by(|x, y| x.clique.cmp(&y.clique));
    let prices: Vec<BigRational> = (0..m).map(|v| -d[nc + v].clone()).collect();
    let perfect = r > 0 && value == BigRational::new(BigInt::from(m), BigInt::from(r));
    FractionalTiling {
        weights,
        value,
        prices,
        perfect,
        pivots,
    }
}

/// Re-checks primal feasibility, dual feasibility and equal objectives.
pub fn verify_certificate(g: &MultipartiteGraph, r: usize, t: &FractionalTiling) -> bool {
    let load = t.load(g.n());
    let primal = t
        .weights
        .iter()
        .all(|w| w.weight.is_positive() && g.is_clique(&w.clique) && w.clique.len() == r)
        && load.iter().all(|l| *l <= BigRational::one());
    let total: BigRational = t.weights.iter().map(|w| w.weight.clone()).sum();
    let dual = t.prices.len() == g.n()
        && t.prices.iter().all(|p| !p.is_negative())
        && enumerate_cliques(g, r)
            .iter()
            .all(|k| k.iter().map(|&v| t.prices[v].clone()).sum::<BigRational>() >= BigRational::one());
    let price_total: BigRational = t.prices.iter().cloned().sum();
    primal && dual && total == t.value && price_total == t.value
}

/// Disjoint transversal cliques covering every vertex, if any exist.
pub fn perfect_tiling_bruteforce(g: &MultipartiteGraph, r: usize) -> Result<Option<Vec<Vec<usize>>>> {
    if r == 0 || !g.n().is_multiple_of(r) {
        return Err(Error::Precondition(format!(
            "{} vertices cannot be tiled by {r}-cliques",
            g.n()
        )));
    }
    let cliques = enumerate_cliques(g, r);
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (j, k) in cliques.iter().enumerate() {
        for &v in k {
            containing[v].push(j);
        }
    }
    fn go(cliques: &[Vec<usize>], containing: &[Vec<usize>], covered: &mut [bool], chosen: &mut Vec<usize>) -> bool {
        // most constrained uncovered vertex
        let mut best: Option<(usize, usize)> = None;
        for v in (0..covered.len()).filter(|&v| !covered[v]) {
            let c = containing[v]
                .iter()
                .filter(|&&j| cliques[j].iter().all(|&u| !covered[u]))
                .count();
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((v, c));
            }
        }
        let Some((v, c)) = best else { return true };
        if c == 0 {
            return false;
        }
        for &j in &containing[v] {
            if cliques[j].iter().any(|&u| covered[u]) {
                continue;
            }
            for &u in &cliques[j] {
                covered[u] = true;
            }
            chosen.push(j);
            if go(cliques, containing, covered, chosen) {
                return true;
            }
            chosen.pop();
            for &u in &cliques[j] {
                covered[u] = false;
            }
        }
        false
    }
    let mut covered = vec![false; g.n()];
    let mut chosen = Vec::new();
    Ok(go(&cliques, &containing, &mut covered, &mut chosen)
        .then(|| chosen.into_iter().map(|j| cliques[j].clone()).collect()))
}

/// Disjoint properly terminated paths plus the uncovered vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PathCover {
    pub paths: Vec<Vec<usize>>,
    pub leftover: Vec<usize>,
}

/// Cliques ranked by fractional weight; the LP is skipped above this many.
const LP_CLIQUE_LIMIT: usize = 4_000;

/// Greedily covers a balanced `r`-partite host by properly terminated
/// `(r-1)`-paths, starting each path at a high-weight clique of an optimal
/// fractional tiling and growing it around the parts in cyclic order. Path
/// lengths are trimmed to multiples of `r`, so the leftover stays balanced.
pub fn cover_with_paths(g: &MultipartiteGraph, r: usize, alpha: Ratio, cfg: &Config) -> Result<PathCover> {
    let n = g.n();
    if g.k() != r || g.parts().iter().any(|p| p.len() != n / r) {
        return Err(Error::Precondition(
            "cover_with_paths needs a balanced r-partite host".into(),
        ));
    }
    let allowed = alpha * Ratio::from_integer(n as i64);
    if Ratio::from_integer(n as i64) <= allowed {
        return Ok(PathCover {
            paths: Vec::new(),
            leftover: (0..n).collect(),
        });
    }
    let cliques = enumerate_cliques(g, r);
    let mut ranked: Vec<(BigRational, Vec<usize>)> = if cliques.len() <= LP_CLIQUE_LIMIT {
        let t = fractional_tiling(g, r);
        let mut w: Vec<(BigRational, Vec<usize>)> = t.weights.into_iter().map(|w| (w.weight, w.clique)).collect();
        let support: std::collections::HashSet<Vec<usize>> = w.iter().map(|(_, k)| k.clone()).collect();
        w.extend(
            cliques
                .into_iter()
                .filter(|k| !support.contains(k))
                .map(|k| (BigRational::zero(), k)),
        );
        w
    } else {
        cliques.into_iter().map(|k| (BigRational::zero(), k)).collect()
    };

    let mut rng = rng::stream(cfg.seed, STAGE);
    let mut best: Option<PathCover> = None;
    for _ in 0..cfg.retry_limit {
        ranked.shuffle(&mut rng);
        ranked.sort_by(|x, y| y.0.cmp(&x.0));
        let mut used = vec![false; n];
        let mut paths = Vec::new();
        for (_, k) in &ranked {
            if k.iter().any(|&v| used[v]) {
                continue;
            }
            let mut path = k.clone();
            for &v in k {
                used[v] = true;
            }
            grow(g, r, &mut path, &mut used, &mut rng);
            paths.push(path);
        }
        let leftover: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
        let cover = PathCover { paths, leftover };
        if Ratio::from_integer(cover.leftover.len() as i64) <= allowed {
            return Ok(cover);
        }
        if best.as_ref().is_none_or(|b| cover.leftover.len() < b.leftover.len()) {
            best = Some(cover);
        }
    }
    let best = best.map_or(n, |b| b.leftover.len());
    Err(Error::CoverageShortfall(format!(
        "best cover leaves {best} vertices uncovered, more than alpha n = {allowed}"
    )))
}

fn grow(g: &MultipartiteGraph, r: usize, path: &mut Vec<usize>, used: &mut [bool], rng: &mut rand_chacha::ChaCha8Rng) {
    loop {
        let part = path.len() % r;
        let window = &path[path.len() + 1 - r..];
        let mut cands: Vec<usize> = g
            .part(part)
            .iter()
            .copied()
            .filter(|&v| !used[v] && window.iter().all(|&u| g.adjacent(u, v)))
            .collect();
        if cands.is_empty() {
            break;
        }
        cands.shuffle(rng);
        // prefer vertices that keep the most options for the next step
        let next_part = (part + 1) % r;
        let tail = &path[path.len() + 2 - r..];
        let v = *cands
            .iter()
            .max_by_key(|&&v| {
                g.part(next_part)
                    .iter()
                    .filter(|&&w| !used[w] && w != v && g.adjacent(v, w) && tail.iter().all(|&u| g.adjacent(u, w)))
                    .count()
            })
            .expect("nonempty");
        used[v] = true;
        path.push(v);
    }
    while !path.len().is_multiple_of(r) {
        let v = path.pop().expect("path keeps its first clique");
        used[v] = false;
    }
}

/// The integer allocation `z_K = floor((1 - alpha') w_K m)` over the support
/// of a fractional tiling. Reported only; the cover above does not use it.
pub fn allocation_report(t: &FractionalTiling, alpha_prime: Ratio, m: usize) -> Vec<(Vec<usize>, u64)> {
    let scale = BigRational::new(
        BigInt::from(*alpha_prime.denom() - *alpha_prime.numer()) * BigInt::from(m),
        BigInt::from(*alpha_prime.denom()),
    );
    t.weights
        .iter()
        .map(|w| {
            let z = (&w.weight * &scale).floor().to_integer().to_u64().unwrap_or(0);
            (w.clique.clone(), z)
        })
        .collect()
}
