use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::refine::Refinement;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::{degree_profile_of, MultipartiteGraph};
use crate::paths::{is_path, respects_final, respects_initial};
use crate::ratio::Ratio;
use crate::rng;

const STAGE: u64 = 0x636f_6e6e;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanGroup {
    pub cols: Vec<usize>,
    pub cells: Vec<Vec<usize>>,
}

/// The trim path, its extension, the balanced groups and the connecting
/// paths between consecutive groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequencingPlan {
    pub p0_prime: Vec<usize>,
    pub p0: Vec<usize>,
    pub groups: Vec<PlanGroup>,
    pub connectors: Vec<Vec<usize>>,
}

impl SequencingPlan {
    pub fn ell(&self) -> usize {
        self.groups.len()
    }
}

/// Builds the `2r`-vertex connectors between consecutive groups, then
/// extends `P0'` by `r` vertices of the last group in front and `r`
/// vertices of the first group behind.
pub fn build_connectors_and_p0(
    g: &MultipartiteGraph,
    p0_prime: &[usize],
    refinement: &Refinement,
    r: usize,
    cfg: &Config,
) -> Result<SequencingPlan> {
    let cells = &refinement.cells;
    let ell = cells.len();
    if ell == 0 || cells.iter().any(|c| c.len() != r) {
        return Err(Error::Precondition(
            "refinement must have at least one group of r cells".into(),
        ));
    }
    let mut rng = rng::stream(cfg.seed, STAGE);
    let budget = 200 * r as u64 * (ell as u64 + 2) + 1_000;
    'attempt: for _ in 0..cfg.retry_limit {
        let mut used = vec![false; g.n()];
        for &v in p0_prime {
            used[v] = true;
        }
        let mut connectors = Vec::with_capacity(ell - 1);
        for j in 0..ell - 1 {
            let slots: Vec<&[usize]> = cells[j].iter().chain(&cells[j + 1]).map(Vec::as_slice).collect();
            match fill(g, r, &[], &slots, &[], &mut used, &mut rng, budget) {
                Some(c) => connectors.push(c),
                None => continue 'attempt,
            }
        }
        let front: Vec<&[usize]> = cells[ell - 1].iter().map(Vec::as_slice).collect();
        let Some(pre) = fill(g, r, &[], &front, p0_prime, &mut used, &mut rng, budget) else {
            continue;
        };
        let back: Vec<&[usize]> = cells[0].iter().map(Vec::as_slice).collect();
        let Some(post) = fill(g, r, p0_prime, &back, &[], &mut used, &mut rng, budget) else {
            continue;
        };
        let p0 = [pre, p0_prime.to_vec(), post].concat();
        let groups = refinement
            .cols
            .iter()
            .zip(cells)
            .map(|(cols, cells)| PlanGroup {
                cols: cols.clone(),
                cells: cells.clone(),
            })
            .collect();
        return Ok(SequencingPlan {
            p0_prime: p0_prime.to_vec(),
            p0,
            groups,
            connectors,
        });
    }
    Err(Error::Exhausted {
        stage: "connectors",
        attempts: cfg.retry_limit,
        detail: format!("could not link {ell} groups and extend the trim path"),
    })
}

/// Fills one vertex per slot so that `left ++ fill ++ right` has every
/// window touching the fill a clique. Marks the chosen vertices used.
#[allow(clippy::too_many_arguments)]
fn fill(
    g: &MultipartiteGraph,
    r: usize,
    left: &[usize],
    slots: &[&[usize]],
    right: &[usize],
    used: &mut [bool],
    rng: &mut ChaCha8Rng,
    budget: u64,
) -> Option<Vec<usize>> {
    fn go(
        g: &MultipartiteGraph,
        r: usize,
        ctx: &mut Vec<usize>,
        base: usize,
        slots: &[&[usize]],
        right: &[usize],
        used: &mut [bool],
        rng: &mut ChaCha8Rng,
        nodes: &mut u64,
    ) -> bool {
        let t = ctx.len() - base;
        if t == slots.len() {
            return true;
        }
        if *nodes == 0 {
            return false;
        }
        *nodes -= 1;
        let window = &ctx[ctx.len().saturating_sub(r - 1)..];
        let reach = r.saturating_sub(slots.len() - t);
        let ahead = &right[..reach.min(right.len())];
        let mut cands: Vec<usize> = slots[t]
            .iter()
            .copied()
            .filter(|&v| !used[v] && window.iter().chain(ahead).all(|&u| g.adjacent(u, v)))
            .collect();
        cands.shuffle(rng);
        for v in cands {
            used[v] = true;
            ctx.push(v);
            if go(g, r, ctx, base, slots, right, used, rng, nodes) {
                return true;
            }
            ctx.pop();
            used[v] = false;
        }
        false
    }

    let keep = left.len().min(r - 1);
    let mut ctx = left[left.len() - keep..].to_vec();
    let mut nodes = budget + rng.gen_range(0..=slots.len() as u64);
    if go(g, r, &mut ctx, keep, slots, right, used, rng, &mut nodes) {
        Some(ctx.split_off(keep))
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub pass: bool,
    pub witness: Option<String>,
}

impl Check {
    fn ok() -> Self {
        Check {
            pass: true,
            witness: None,
        }
    }

    fn fail(w: impl Into<String>) -> Self {
        Check {
            pass: false,
            witness: Some(w.into()),
        }
    }

    fn from(res: std::result::Result<(), String>) -> Self {
        res.map_or_else(Check::fail, |()| Check::ok())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanReport {
    pub partition: Check,
    pub a1: Check,
    pub a2: Check,
    pub a3: Check,
    pub a4: Check,
    /// Smallest proportional minimum degree over the groups.
    #[serde(with = "crate::ratio::serde_ratio")]
    pub min_group_delta: Ratio,
}

impl PlanReport {
    /// Everything except the degree condition.
    pub fn structural_ok(&self) -> bool {
        self.partition.pass && self.a1.pass && self.a3.pass && self.a4.pass
    }

    pub fn all_ok(&self) -> bool {
        self.structural_ok() && self.a2.pass
    }
}

/// Checks a plan from scratch: the trim path and the cells partition
/// `V(G)`; every group has `r` equal cells of size at least `floor_m`
/// inside increasing parts; every group has proportional minimum degree at
/// least `threshold`; `P0` and the connectors are paths with the required
/// terminal cells and are pairwise disjoint.
pub fn verify_plan(
    g: &MultipartiteGraph,
    plan: &SequencingPlan,
    r: usize,
    floor_m: usize,
    threshold: Ratio,
) -> PlanReport {
    let (a2, min_group_delta) = check_a2(g, plan, threshold);
    PlanReport {
        partition: Check::from(check_partition(g, plan)),
        a1: Check::from(check_a1(g, plan, r, floor_m)),
        a2,
        a3: Check::from(check_a3(g, plan, r)),
        a4: Check::from(check_a4(g, plan, r)),
        min_group_delta,
    }
}

fn check_partition(g: &MultipartiteGraph, plan: &SequencingPlan) -> std::result::Result<(), String> {
    let mut owner: Vec<Option<String>> = vec![None; g.n()];
    let mut claim = |v: usize, who: String| -> std::result::Result<(), String> {
        match owner.get_mut(v) {
            None => Err(format!("vertex {v} is out of range")),
            Some(Some(prev)) => Err(format!("vertex {v} lies in both {prev} and {who}")),
            Some(slot) => {
                *slot = Some(who);
                Ok(())
            }
        }
    };
    for &v in &plan.p0_prime {
        claim(v, "the trim path".into())?;
    }
    for (j, grp) in plan.groups.iter().enumerate() {
        for (h, cell) in grp.cells.iter().enumerate() {
            for &v in cell {
                claim(v, format!("cell ({j},{h})"))?;
            }
        }
    }
    match owner.iter().position(Option::is_none) {
        Some(v) => Err(format!("vertex {v} is not covered")),
        None => Ok(()),
    }
}

fn check_a1(g: &MultipartiteGraph, plan: &SequencingPlan, r: usize, floor_m: usize) -> std::result::Result<(), String> {
    if plan.groups.is_empty() {
        return Err("no groups".into());
    }
    for (j, grp) in plan.groups.iter().enumerate() {
        if grp.cols.len() != r || grp.cells.len() != r {
            return Err(format!("group {j} does not have {r} cells"));
        }
        if grp.cols.windows(2).any(|w| w[0] >= w[1]) || grp.cols.iter().any(|&i| i >= g.k()) {
            return Err(format!(
                "group {j} has part indices {:?} that are not increasing",
                grp.cols
            ));
        }
        let size = grp.cells[0].len();
        if let Some(h) = grp.cells.iter().position(|c| c.len() != size) {
            return Err(format!(
                "group {j}: cell {h} has {} vertices, cell 0 has {size}",
                grp.cells[h].len()
            ));
        }
        if size < floor_m.max(1) {
            return Err(format!(
                "group {j}: cells have {size} vertices, fewer than {}",
                floor_m.max(1)
            ));
        }
        for (h, cell) in grp.cells.iter().enumerate() {
            if let Some(&v) = cell.iter().find(|&&v| v >= g.n() || g.part_of(v) != grp.cols[h]) {
                return Err(format!(
                    "group {j}: vertex {v} of cell {h} is not in part {}",
                    grp.cols[h]
                ));
            }
        }
    }
    Ok(())
}

fn check_a2(g: &MultipartiteGraph, plan: &SequencingPlan, threshold: Ratio) -> (Check, Ratio) {
    let mut min = Ratio::from_integer(1);
    let mut witness = None;
    for (j, grp) in plan.groups.iter().enumerate() {
        let d = match degree_profile_of(g, &grp.cells) {
            Ok(p) => p.delta_p,
            Err(e) => return (Check::fail(format!("group {j}: {e}")), Ratio::from_integer(0)),
        };
        if d < min {
            min = d;
        }
        if d < threshold && witness.is_none() {
            witness = Some(format!("group {j} has proportional minimum degree {d} < {threshold}"));
        }
    }
    (witness.map_or_else(Check::ok, Check::fail), min)
}

fn check_a3(g: &MultipartiteGraph, plan: &SequencingPlan, r: usize) -> std::result::Result<(), String> {
    let (p0, inner) = (&plan.p0, &plan.p0_prime);
    if p0.len() != inner.len() + 2 * r || p0[r..p0.len() - r] != inner[..] {
        return Err("P0 is not P0' extended by r vertices on each side".into());
    }
    if !is_path(g, p0, r) {
        return Err("P0 is not an (r-1)-path".into());
    }
    let Some(last) = plan.groups.last() else {
        return Err("no groups".into());
    };
    if !respects_initial(p0, &last.cells) {
        return Err("the initial r vertices of P0 do not respect the last group".into());
    }
    if !respects_final(p0, &plan.groups[0].cells) {
        return Err("the final r vertices of P0 do not respect the first group".into());
    }
    Ok(())
}

fn check_a4(g: &MultipartiteGraph, plan: &SequencingPlan, r: usize) -> std::result::Result<(), String> {
    let ell = plan.groups.len();
    if plan.connectors.len() + 1 != ell {
        return Err(format!("{} connectors for {ell} groups", plan.connectors.len()));
    }
    let mut seen: HashSet<usize> = plan.p0.iter().copied().collect();
    for (j, c) in plan.connectors.iter().enumerate() {
        if c.len() != 2 * r {
            return Err(format!("connector {j} has {} vertices", c.len()));
        }
        if !is_path(g, c, r) {
            return Err(format!("connector {j} is not an (r-1)-path"));
        }
        if !respects_initial(c, &plan.groups[j].cells) || !respects_final(c, &plan.groups[j + 1].cells) {
            return Err(format!("connector {j} does not respect groups {j} and {}", j + 1));
        }
        if let Some(&v) = c.iter().find(|&&v| !seen.insert(v)) {
            return Err(format!("connector {j} reuses vertex {v}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::matrix::build_template_matrix;
    use super::super::refine::refine_partition;
    use super::super::template::compute_trim_template;
    use super::super::trim::build_trim_path;
    use super::*;
    use crate::graph::gen_random;

    fn plan_for(sizes: &[usize], seed: u64) -> (MultipartiteGraph, SequencingPlan) {
        let g = gen_random(sizes, Ratio::from_integer(1), seed).unwrap();
        let cfg = Config::for_r(3).with_seed(seed);
        let t = compute_trim_template(&g.part_sizes(), 3, Ratio::new(1, 24)).unwrap();
        let p = build_trim_path(&g, &t, &cfg).unwrap();
        let a = build_template_matrix(g.k(), 3, t.s).unwrap();
        let mut residual = g.parts().to_vec();
        for part in &mut residual {
            part.retain(|v| !p.contains(v));
        }
        let b: Vec<usize> = residual.iter().map(Vec::len).collect();
        let x = super::super::solver::solve_part_sizes(&a, &b, 2).unwrap().x;
        let rf = refine_partition(&g, &residual, &a, &x, Ratio::new(2, 3), &cfg, true).unwrap();
        let plan = build_connectors_and_p0(&g, &p, &rf, 3, &cfg).unwrap();
        (g, plan)
    }

    #[test]
    fn complete_hosts_verify() {
        let (g, plan) = plan_for(&[12, 12, 9, 9], 1);
        let rep = verify_plan(&g, &plan, 3, 2, Ratio::new(2, 3));
        assert!(rep.all_ok(), "{rep:?}");
        assert_eq!(plan.connectors.len(), plan.ell() - 1);
    }

    #[test]
    fn moved_connector_vertex_breaks_disjointness() {
        let (g, mut plan) = plan_for(&[12, 12, 9, 9], 2);
        assert!(!plan.connectors.is_empty());
        // the final r vertices of P0 sit in the first group's cells
        let taken = plan.p0[plan.p0.len() - 3];
        plan.connectors[0][0] = taken;
        let rep = verify_plan(&g, &plan, 3, 2, Ratio::new(2, 3));
        assert!(!rep.a4.pass);
        assert_eq!(rep.a4.witness.unwrap(), format!("connector 0 reuses vertex {taken}"));
    }

    #[test]
    fn emptied_cell_breaks_equal_sizes() {
        let (g, mut plan) = plan_for(&[12, 12, 9, 9], 3);
        let last = plan.groups.len() - 1;
        plan.groups[last].cells[1].clear();
        let rep = verify_plan(&g, &plan, 3, 2, Ratio::new(2, 3));
        assert!(!rep.a1.pass);
        assert!(!rep.partition.pass);
    }

    #[test]
    fn single_group_has_no_connectors() {
        // three near-full parts make s = r, so the matrix has one column
        let g = gen_random(&[6, 6, 6, 1], Ratio::from_integer(1), 0).unwrap();
        let cfg = Config::for_r(3);
        let t = compute_trim_template(&g.part_sizes(), 3, Ratio::new(1, 24)).unwrap();
        assert_eq!(t.s, 3);
        let a = build_template_matrix(4, 3, t.s).unwrap();
        assert_eq!(a.ell(), 1);
        let p = build_trim_path(&g, &t, &cfg).unwrap();
        let mut residual = g.parts().to_vec();
        for part in &mut residual {
            part.retain(|v| !p.contains(v));
        }
        let b: Vec<usize> = residual.iter().map(Vec::len).collect();
        assert_eq!(b, vec![3, 3, 3, 0]);
        let x = super::super::solver::solve_part_sizes(&a, &b, 2).unwrap().x;
        let rf = refine_partition(&g, &residual, &a, &x, Ratio::new(2, 3), &cfg, true).unwrap();
        let plan = build_connectors_and_p0(&g, &p, &rf, 3, &cfg).unwrap();
        assert!(plan.connectors.is_empty());
        assert!(verify_plan(&g, &plan, 3, 2, Ratio::new(2, 3)).all_ok());
    }
}
