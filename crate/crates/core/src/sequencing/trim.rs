use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::template::TrimTemplate;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::MultipartiteGraph;
use crate::paths::{decompose, is_path, is_properly_terminated};
use crate::ratio::Ratio;
use crate::rng;

const STAGE: u64 = 0x7472_696d;

/// Candidate order inside the trim search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TrimOrder {
    /// Most neighbours among the next few required parts first.
    #[default]
    Lookahead,
    /// Most non-neighbours overall first, so the residual keeps the
    /// best-connected vertices; lookahead breaks ties.
    DefectsFirst,
}

/// Greedily builds `P0'` following the template, with backtracking inside
/// an attempt and a fresh random order on each restart.
pub fn build_trim_path(g: &MultipartiteGraph, tmpl: &TrimTemplate, cfg: &Config) -> Result<Vec<usize>> {
    build_trim_path_ordered(g, tmpl, cfg, TrimOrder::Lookahead)
}

pub fn build_trim_path_ordered(
    g: &MultipartiteGraph,
    tmpl: &TrimTemplate,
    cfg: &Config,
    order: TrimOrder,
) -> Result<Vec<usize>> {
    if g.k() != tmpl.k || g.n() != tmpl.n {
        return Err(Error::Precondition("template does not match the graph".into()));
    }
    let req: Vec<usize> = tmpl.run_parts().flatten().collect();
    let hits = tmpl.hits();
    if let Some(i) = (0..g.k()).find(|&i| hits[i] > g.part(i).len()) {
        return Err(Error::Trim(format!(
            "template uses {} vertices of part {i} of size {}",
            hits[i],
            g.part(i).len()
        )));
    }
    let r = tmpl.r;
    let budget = 50 * req.len() as u64 + 2_000;
    let mut rng = rng::stream(cfg.seed, STAGE);
    for _ in 0..cfg.retry_limit {
        let mut search = Search {
            g,
            r,
            req: &req,
            used: vec![false; g.n()],
            path: Vec::with_capacity(req.len()),
            nodes: 0,
            budget,
            salt: rng.gen(),
            order,
        };
        if search.extend() {
            return Ok(search.path);
        }
    }
    Err(Error::Exhausted {
        stage: "trim path",
        attempts: cfg.retry_limit,
        detail: format!("no {} -vertex trim path found", req.len()),
    })
}

struct Search<'a> {
    g: &'a MultipartiteGraph,
    r: usize,
    req: &'a [usize],
    used: Vec<bool>,
    path: Vec<usize>,
    nodes: u64,
    budget: u64,
    salt: u64,
    order: TrimOrder,
}

impl Search<'_> {
    fn extend(&mut self) -> bool {
        let t = self.path.len();
        if t == self.req.len() {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        let window = &self.path[t.saturating_sub(self.r - 1)..];
        let mut cands: Vec<usize> = self
            .g
            .part(self.req[t])
            .iter()
            .copied()
            .filter(|&v| !self.used[v] && window.iter().all(|&u| self.g.adjacent(u, v)))
            .collect();
        let mut rng = rng::stream(self.salt, (t as u64) << 32 | self.nodes);
        cands.shuffle(&mut rng);
        let ahead = &self.req[t + 1..(t + self.r).min(self.req.len())];
        let score = |v: usize| -> usize {
            ahead
                .iter()
                .map(|&i| {
                    self.g
                        .part(i)
                        .iter()
                        .filter(|&&u| !self.used[u] && self.g.adjacent(u, v))
                        .count()
                })
                .sum()
        };
        match self.order {
            TrimOrder::Lookahead => cands.sort_by_cached_key(|&v| std::cmp::Reverse(score(v))),
            TrimOrder::DefectsFirst => {
                let defects = |v: usize| self.g.n() - self.g.part(self.g.part_of(v)).len() - self.g.degree(v);
                cands.sort_by_cached_key(|&v| std::cmp::Reverse((defects(v), score(v))));
            }
        }
        for v in cands {
            self.used[v] = true;
            self.path.push(v);
            if self.extend() {
                return true;
            }
            self.path.pop();
            self.used[v] = false;
            if self.nodes > self.budget {
                return false;
            }
        }
        false
    }
}

/// Which of the trim conditions hold for a concrete `P0'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrimReport {
    pub residual: Vec<usize>,
    pub t1: bool,
    pub t2: bool,
    pub t3: bool,
    pub t4: bool,
    pub t5: bool,
    pub t6: bool,
}

impl TrimReport {
    /// The conditions that hold at every scale.
    pub fn exact_ok(&self) -> bool {
        self.t1 && self.t2 && self.t6
    }

    /// The conditions that depend on sigma being small relative to n.
    pub fn slack_ok(&self) -> bool {
        self.t3 && self.t4 && self.t5
    }

    pub fn all_ok(&self) -> bool {
        self.exact_ok() && self.slack_ok()
    }
}

pub fn check_trim(g: &MultipartiteGraph, tmpl: &TrimTemplate, p0_prime: &[usize], sigma: Ratio) -> TrimReport {
    let n = g.n();
    let mut residual = g.part_sizes();
    for &v in p0_prime {
        residual[g.part_of(v)] -= 1;
    }
    let total: usize = residual.iter().sum();
    let r = tmpl.r;
    let s = tmpl.s.min(g.k());
    let level = Ratio::new(total as i64, r as i64);
    let sigma_n = sigma * Ratio::from_integer(n as i64);
    let tail = &residual[s..];

    let t1 = total.is_multiple_of(r);
    let t2 = residual[..s].iter().all(|&x| x * r == total);
    let t3 = tail.iter().all(|&x| Ratio::from_integer(x as i64) >= sigma_n);
    let t4 = tail.iter().all(|&x| Ratio::from_integer(x as i64) <= level - sigma_n);
    let t5 = Ratio::from_integer(total as i64)
        >= (Ratio::from_integer(1) - Ratio::from_integer(3 * (r * r) as i64) * sigma) * Ratio::from_integer(n as i64);
    let t6 = is_path(g, p0_prime, r)
        && decompose(g, p0_prime, r).is_ok_and(|d| d.types == tmpl.type_sequence)
        && is_properly_terminated(p0_prime, &first_parts(g, r)).unwrap_or(false);
    TrimReport {
        residual,
        t1,
        t2,
        t3,
        t4,
        t5,
        t6,
    }
}

fn first_parts(g: &MultipartiteGraph, r: usize) -> Vec<&[usize]> {
    (0..r).map(|i| g.part(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::super::template::compute_trim_template;
    use super::*;
    use crate::graph::gen_random;

    fn complete(sizes: &[usize]) -> MultipartiteGraph {
        gen_random(sizes, Ratio::from_integer(1), 0).unwrap()
    }

    #[test]
    fn toy_instance_residuals() {
        let g = complete(&[5, 4, 3, 3]);
        let sigma = Ratio::new(1, 60);
        let t = compute_trim_template(&g.part_sizes(), 3, sigma).unwrap();
        let p = build_trim_path(&g, &t, &Config::for_r(3)).unwrap();
        assert_eq!(p.len(), 12);
        let rep = check_trim(&g, &t, &p, sigma);
        assert_eq!(rep.residual, vec![1, 1, 0, 1]);
        assert!(rep.exact_ok());
        assert!(!rep.t3, "a part is used up at this scale");
    }

    #[test]
    fn dense_random_instances_meet_exact_conditions() {
        for seed in 0..10 {
            let g = gen_random(&[8, 7, 6, 5], Ratio::new(9, 10), seed).unwrap();
            let sigma = Ratio::new(1, 24);
            let t = compute_trim_template(&g.part_sizes(), 3, sigma).unwrap();
            let p = build_trim_path(&g, &t, &Config::for_r(3).with_seed(seed)).unwrap();
            let rep = check_trim(&g, &t, &p, sigma);
            assert!(rep.exact_ok(), "seed {seed}: {rep:?}");
            assert_eq!(p.len(), t.p);
        }
    }

    #[test]
    fn empty_graph_exhausts() {
        let g = gen_random(&[5, 4, 3, 3], Ratio::from_integer(0), 0).unwrap();
        let t = compute_trim_template(&g.part_sizes(), 3, Ratio::new(1, 60)).unwrap();
        let mut cfg = Config::for_r(3);
        cfg.retry_limit = 2;
        let err = build_trim_path(&g, &t, &cfg).unwrap_err();
        assert!(matches!(err, Error::Exhausted { stage: "trim path", .. }));
    }

    #[test]
    fn defects_first_leaves_clean_residual() {
        let g = complete(&[5, 4, 3, 3]).filter_edges(|u, v| (u, v) != (0, 5));
        let sigma = Ratio::new(1, 60);
        let t = compute_trim_template(&g.part_sizes(), 3, sigma).unwrap();
        let p = build_trim_path_ordered(&g, &t, &Config::for_r(3), TrimOrder::DefectsFirst).unwrap();
        assert!(check_trim(&g, &t, &p, sigma).exact_ok());
        assert!(p.contains(&0) && p.contains(&5), "{p:?}");
    }
}
