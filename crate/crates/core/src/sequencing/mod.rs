//! Splitting an unbalanced `k`-partite host (`r < k`) into a short trim path
//! plus `ell` balanced `r`-partite groups linked by short connecting paths.
//!
//! The stages run in order: [`compute_trim_template`], [`build_trim_path`],
//! [`build_template_matrix`], [`solve_part_sizes`], [`refine_partition`] and
//! [`build_connectors_and_p0`]. [`sequence`] chains them and checks the
//! result with [`verify_plan`].

mod matrix;
mod plan;
mod refine;
mod solver;
mod template;
mod trim;

pub use matrix::{build_template_matrix, TemplateMatrix};
pub use plan::{build_connectors_and_p0, verify_plan, Check, PlanGroup, PlanReport, SequencingPlan};
pub use refine::{refine_partition, Refinement};
pub use solver::{solve_part_sizes, PartSizeSolution};
pub use template::{compute_trim_template, TrimTemplate};
pub use trim::{build_trim_path, build_trim_path_ordered, check_trim, TrimOrder, TrimReport};

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::{degree_profile, MultipartiteGraph};
use crate::ratio::{ceil_times, Ratio};
use crate::rng;

const TRIM_ROUNDS: u64 = 32;
const TRIM_ROUND_STAGE: u64 = 0x726f_756e_6400;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SequenceOptions {
    /// Skip the checks that only hold once `n` is large relative to the
    /// constants, and measure the degree slack instead of assuming `gamma`.
    pub relaxed: bool,
    /// Minimum cell size; see [`default_floor`].
    pub floor_m: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SequencingOutcome {
    pub template: TrimTemplate,
    pub matrix: TemplateMatrix,
    pub solution: PartSizeSolution,
    pub trim: TrimReport,
    pub refinement_attempts: usize,
    pub floor_m: usize,
    #[serde(with = "crate::ratio::serde_ratio")]
    pub threshold: Ratio,
    pub plan: SequencingPlan,
    pub report: PlanReport,
}

/// `max(2, ceil(beta n))`. Each group later hosts two disjoint terminal
/// cliques, one vertex per cell each, so cells need at least two vertices.
pub fn default_floor(cfg: &Config, n: usize) -> usize {
    (ceil_times(&cfg.beta, n).max(0) as usize).max(2)
}

/// The same graph with parts reordered by non-increasing size (stable).
pub fn sort_parts_descending(g: &MultipartiteGraph) -> MultipartiteGraph {
    let mut parts = g.parts().to_vec();
    parts.sort_by_key(|p| std::cmp::Reverse(p.len()));
    g.repartition(parts).expect("reordering parts keeps the graph valid")
}

/// The purely arithmetic part of sequencing: template, matrix and cell
/// sizes for the given part sizes, without touching any graph.
pub fn arithmetic_plan(
    sizes: &[usize],
    r: usize,
    sigma: Ratio,
    floor_m: usize,
) -> Result<(TrimTemplate, TemplateMatrix, PartSizeSolution)> {
    let t = compute_trim_template(sizes, r, sigma)?;
    let a = build_template_matrix(t.k, r, t.s)?;
    let x = solve_part_sizes(&a, &t.residual_sizes(sizes), floor_m)?;
    Ok((t, a, x))
}

/// Runs every sequencing stage on a host with `k > r` parts sorted by
/// non-increasing size.
pub fn sequence(g: &MultipartiteGraph, cfg: &Config, opts: SequenceOptions) -> Result<SequencingOutcome> {
    cfg.validate()?;
    let (n, r) = (g.n(), cfg.r);
    let sizes = g.part_sizes();
    let base = Ratio::from_integer(1) - Ratio::new(1, r as i64);
    let delta = degree_profile(g)?.delta_p;
    if !opts.relaxed {
        if delta < base + cfg.gamma {
            return Err(Error::ScaleInfeasible(format!(
                "proportional minimum degree {delta} is below 1 - 1/r + gamma"
            )));
        }
        if let Some(i) = sizes
            .iter()
            .position(|&s| Ratio::from_integer(s as i64) < cfg.gamma * Ratio::from_integer(n as i64))
        {
            return Err(Error::ScaleInfeasible(format!(
                "part {i} has fewer than gamma n vertices"
            )));
        }
    }

    let template = compute_trim_template(&sizes, r, cfg.sigma)?;
    let matrix = build_template_matrix(g.k(), r, template.s)?;
    let floor_m = opts.floor_m.unwrap_or_else(|| default_floor(cfg, n));
    let threshold = if opts.relaxed {
        let slack = delta - base;
        base + if slack > Ratio::zero() {
            slack / 2
        } else {
            Ratio::zero()
        }
    } else {
        base + cfg.gamma / 2
    };

    let setup = RoundSetup {
        template: &template,
        matrix: &matrix,
        floor_m,
        threshold,
        relaxed: opts.relaxed,
    };
    // The trim path decides which vertices the groups lose, so a failed
    // round resamples it, alternating the candidate order. Round 0 uses the
    // configured seed as is.
    let mut best: Option<SequencingOutcome> = None;
    let mut last_err = None;
    for round in 0..TRIM_ROUNDS {
        let order = if round % 2 == 0 {
            TrimOrder::Lookahead
        } else {
            TrimOrder::DefectsFirst
        };
        let mut round_cfg = cfg.clone();
        if round > 0 {
            round_cfg.seed = rng::stream(cfg.seed, TRIM_ROUND_STAGE + round).gen();
        }
        let out = match sequence_round(g, &round_cfg, &setup, order) {
            Ok(out) => out,
            Err(e @ Error::ScaleInfeasible(_)) => return Err(e),
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        if out.report.a2.pass {
            return Ok(out);
        }
        if best
            .as_ref()
            .is_none_or(|b| out.report.min_group_delta > b.report.min_group_delta)
        {
            best = Some(out);
        }
    }
    best.ok_or_else(|| last_err.expect("at least one round ran"))
}

/// What every trim round shares.
struct RoundSetup<'a> {
    template: &'a TrimTemplate,
    matrix: &'a TemplateMatrix,
    floor_m: usize,
    threshold: Ratio,
    relaxed: bool,
}

fn sequence_round(
    g: &MultipartiteGraph,
    cfg: &Config,
    setup: &RoundSetup,
    order: TrimOrder,
) -> Result<SequencingOutcome> {
    let (n, r) = (g.n(), cfg.r);
    let RoundSetup {
        template,
        matrix,
        floor_m,
        threshold,
        relaxed,
    } = *setup;
    let p0_prime = build_trim_path_ordered(g, template, cfg, order)?;
    let trim = check_trim(g, template, &p0_prime, cfg.sigma);
    if !trim.exact_ok() {
        return Err(Error::Verification(format!(
            "trim path violates an exact condition: {trim:?}"
        )));
    }
    if !relaxed && !trim.slack_ok() {
        return Err(Error::ScaleInfeasible(format!(
            "residual sizes {:?} miss the sigma slack conditions at n = {n}",
            trim.residual
        )));
    }
    let solution = solve_part_sizes(matrix, &trim.residual, floor_m).map_err(|e| match e {
        Error::SolverPrecondition { condition, detail } => Error::ScaleInfeasible(format!(
            "cell sizes cannot reach {floor_m}: {condition} fails, {detail}"
        )),
        e => e,
    })?;

    let mut residual = g.parts().to_vec();
    for part in &mut residual {
        part.retain(|v| !p0_prime.contains(v));
    }
    let refinement = refine_partition(g, &residual, matrix, &solution.x, threshold, cfg, !relaxed)?;
    let plan = build_connectors_and_p0(g, &p0_prime, &refinement, r, cfg)?;
    let report = verify_plan(g, &plan, r, floor_m, threshold);
    if !report.structural_ok() || (!relaxed && !report.a2.pass) {
        return Err(Error::Verification(format!(
            "sequencing plan failed verification: {report:?}"
        )));
    }
    Ok(SequencingOutcome {
        template: template.clone(),
        matrix: matrix.clone(),
        solution,
        trim,
        refinement_attempts: refinement.attempts,
        floor_m,
        threshold,
        plan,
        report,
    })
}
