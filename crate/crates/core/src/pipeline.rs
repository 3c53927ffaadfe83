//! End-to-end construction of a Hamiltonian `(r-1)`-cycle: reduce the
//! parts, sequence the host into balanced groups, find a spanning path in
//! each group between its terminal cliques, splice and re-verify.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::absorber::{absorb, assemble_absorbing_path, AssembleOptions};
use crate::config::Config;
use crate::connect::find_connector;
use crate::error::{Error, Result};
use crate::graph::{reduce_parts, MultipartiteGraph};
use crate::oracle::{
    ham_power_cycle_exists, ham_power_path_between, independence_necessity, Answer, Necessity, SearchBudget,
};
use crate::paths::{is_path, is_walk, verify_ham_power_cycle};
use crate::ratio::{format_ratio, Ratio};
use crate::rng;
use crate::sequencing::{sequence, sort_parts_descending, SequenceOptions};
use crate::tiling::cover_with_paths;

const STAGE: u64 = 0x7069_7065;

/// How each group's spanning path is found.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupMode {
    /// Absorbing path, path cover and connectors only.
    Constructive,
    /// Exact search only.
    Oracle,
    /// Constructive first, exact search when that fails.
    #[default]
    Auto,
}

impl FromStr for GroupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constructive" => Ok(GroupMode::Constructive),
            "oracle" => Ok(GroupMode::Oracle),
            "auto" => Ok(GroupMode::Auto),
            _ => Err(Error::Parse(format!(
                "unknown mode {s:?}; expected constructive, oracle or auto"
            ))),
        }
    }
}

impl fmt::Display for GroupMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupMode::Constructive => "constructive",
            GroupMode::Oracle => "oracle",
            GroupMode::Auto => "auto",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    pub mode: GroupMode,
    /// Node limit for each exact search.
    pub budget: u64,
    /// Sequencing without the slack conditions.
    pub relaxed: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            mode: GroupMode::Auto,
            budget: 10_000_000,
            relaxed: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupRecord {
    pub group: usize,
    pub vertices: usize,
    /// "constructive" or "oracle".
    pub method: String,
    /// Why the constructive route was abandoned, if it was.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequencingSummary {
    pub groups: usize,
    pub p0_len: usize,
    pub floor_m: usize,
    pub threshold: String,
    pub cell_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub mode: GroupMode,
    pub relaxed: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_k: Option<usize>,
    pub stages: Vec<StageRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequencing: Option<SequencingSummary>,
    pub groups: Vec<GroupRecord>,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub exit_code: i32,
}

impl PipelineReport {
    fn push(&mut self, stage: &str, status: &str, detail: Option<String>) {
        self.stages.push(StageRecord {
            stage: stage.into(),
            status: status.into(),
            detail,
        });
    }
}

#[derive(Debug)]
pub struct PipelineRun {
    pub report: PipelineReport,
    pub result: Result<Vec<usize>>,
}

impl PipelineRun {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

/// Runs every stage and records each outcome. The cycle is returned only
/// after the independent verifier has accepted it on `g` itself.
pub fn run_pipeline(g: &MultipartiteGraph, cfg: &Config, opts: PipelineOptions) -> PipelineRun {
    let mut report = PipelineReport {
        n: g.n(),
        k: g.k(),
        r: cfg.r,
        mode: opts.mode,
        relaxed: opts.relaxed,
        seed: cfg.seed,
        reduced_k: None,
        stages: Vec::new(),
        sequencing: None,
        groups: Vec::new(),
        verified: false,
        cycle: None,
        error: None,
        exit_code: 0,
    };
    let result = drive(g, cfg, opts, &mut report);
    match &result {
        Ok(cycle) => {
            report.verified = true;
            report.cycle = Some(cycle.clone());
        }
        Err(e) => {
            report.error = Some(e.to_string());
            report.exit_code = e.exit_code();
        }
    }
    PipelineRun { report, result }
}

fn drive(
    g: &MultipartiteGraph,
    cfg: &Config,
    opts: PipelineOptions,
    report: &mut PipelineReport,
) -> Result<Vec<usize>> {
    cfg.validate()?;
    let r = cfg.r;
    if g.n() < r + 1 {
        return Err(Error::Precondition(format!(
            "need more than r = {r} vertices, got {}",
            g.n()
        )));
    }
    if let Necessity::Fail { part } = independence_necessity(g, r) {
        let e = Error::NoCycle(format!(
            "part {part} has {} > n/r = {}/{r} vertices, so no Hamiltonian (r-1)-cycle exists",
            g.part(part).len(),
            g.n()
        ));
        report.push("necessity", "failed", Some(e.to_string()));
        return Err(Error::stage("necessity", e));
    }
    report.push("necessity", "ok", None);

    let tiny = cfg.gamma / Ratio::from_integer(2 * r as i64);
    let reduction = reduce_parts(g, r, tiny).map_err(|e| {
        report.push("reduce", "failed", Some(e.to_string()));
        Error::stage("reduce", e)
    })?;
    let h = sort_parts_descending(&reduction.graph);
    report.reduced_k = Some(h.k());
    report.push(
        "reduce",
        "ok",
        Some(format!(
            "{} merges, {} dissolved, {} parts of sizes {:?}",
            reduction.merges.len(),
            reduction.splits,
            h.k(),
            h.part_sizes()
        )),
    );

    let cycle = if h.k() == r {
        report.push(
            "sequencing",
            "skipped",
            Some("host is already balanced r-partite".into()),
        );
        balanced_cycle(g, &h, cfg, opts, report)?
    } else {
        match sequenced_cycle(&h, cfg, opts, report) {
            Ok(c) => c,
            Err(e) if opts.mode == GroupMode::Auto && e.exit_code() == 4 => {
                report.push("fallback", "ok", Some(format!("whole-graph exact search after: {e}")));
                whole_graph_oracle(g, cfg, opts, report)?
            }
            Err(e) => return Err(e),
        }
    };

    report.push("splice", "ok", Some(format!("{} vertices", cycle.len())));
    let verdict = verify_ham_power_cycle(g, &cycle, r);
    if !verdict.ok {
        report.push("verify", "failed", Some(verdict.reason.clone()));
        return Err(Error::stage("verify", Error::Verification(verdict.reason)));
    }
    report.push("verify", "ok", None);
    Ok(cycle)
}

/// `k == r`: the whole host is one group and its cycle closes on a single
/// terminal clique.
fn balanced_cycle(
    g: &MultipartiteGraph,
    h: &MultipartiteGraph,
    cfg: &Config,
    opts: PipelineOptions,
    report: &mut PipelineReport,
) -> Result<Vec<usize>> {
    let mut fallback = None;
    if opts.mode != GroupMode::Oracle {
        let attempt = transversal_clique(h, cfg).and_then(|k| {
            let p = constructive_path(h, &k, &k, cfg)?;
            Ok([k, p].concat())
        });
        match attempt {
            Ok(c) => {
                report.groups.push(GroupRecord {
                    group: 0,
                    vertices: h.n(),
                    method: "constructive".into(),
                    fallback: None,
                    nodes: None,
                });
                report.push("groups", "ok", Some("1 group".into()));
                return Ok(c);
            }
            Err(e) if opts.mode == GroupMode::Auto => fallback = Some(e.to_string()),
            Err(e) => {
                report.push("groups", "failed", Some(e.to_string()));
                return Err(Error::stage("group path", e));
            }
        }
    }
    let out = ham_power_cycle_exists(g, cfg.r, SearchBudget::nodes(opts.budget));
    report.groups.push(GroupRecord {
        group: 0,
        vertices: h.n(),
        method: "oracle".into(),
        fallback,
        nodes: Some(out.nodes_expanded),
    });
    oracle_cycle(out.answer, opts, report)
}

fn whole_graph_oracle(
    g: &MultipartiteGraph,
    cfg: &Config,
    opts: PipelineOptions,
    report: &mut PipelineReport,
) -> Result<Vec<usize>> {
    let out = ham_power_cycle_exists(g, cfg.r, SearchBudget::nodes(opts.budget));
    report.groups.push(GroupRecord {
        group: 0,
        vertices: g.n(),
        method: "oracle".into(),
        fallback: Some("sequencing failed".into()),
        nodes: Some(out.nodes_expanded),
    });
    oracle_cycle(out.answer, opts, report)
}

fn oracle_cycle(answer: Answer, opts: PipelineOptions, report: &mut PipelineReport) -> Result<Vec<usize>> {
    match answer {
        Answer::Yes(c) => {
            report.push("groups", "ok", Some("exact search found a cycle".into()));
            Ok(c)
        }
        Answer::No => {
            let e = Error::NoCycle("exhaustive search found none".into());
            report.push("groups", "failed", Some(e.to_string()));
            Err(Error::stage("oracle", e))
        }
        Answer::BudgetExceeded => {
            report.push(
                "groups",
                "failed",
                Some(format!("node budget {} exhausted", opts.budget)),
            );
            Err(Error::stage("oracle", Error::Budget(opts.budget)))
        }
    }
}

/// `k > r`: sequence into groups, then fill each group between the last
/// `r` vertices of the piece before it and the first `r` of the piece after.
fn sequenced_cycle(
    h: &MultipartiteGraph,
    cfg: &Config,
    opts: PipelineOptions,
    report: &mut PipelineReport,
) -> Result<Vec<usize>> {
    let r = cfg.r;
    let seq_opts = SequenceOptions {
        relaxed: opts.relaxed,
        floor_m: None,
    };
    let out = sequence(h, cfg, seq_opts).map_err(|e| {
        report.push("sequencing", "failed", Some(e.to_string()));
        Error::stage("sequencing", e)
    })?;
    let plan = &out.plan;
    report.sequencing = Some(SequencingSummary {
        groups: plan.ell(),
        p0_len: plan.p0.len(),
        floor_m: out.floor_m,
        threshold: format_ratio(&out.threshold),
        cell_sizes: plan.groups.iter().map(|grp| grp.cells[0].len()).collect(),
    });
    report.push("sequencing", "ok", Some(format!("{} groups", plan.ell())));

    let ell = plan.ell();
    let mut cycle = plan.p0.clone();
    for (j, grp) in plan.groups.iter().enumerate() {
        let before: &[usize] = if j == 0 { &plan.p0 } else { &plan.connectors[j - 1] };
        let after: &[usize] = if j + 1 == ell { &plan.p0 } else { &plan.connectors[j] };
        let k1 = &before[before.len() - r..];
        let k2 = &after[..r];
        let q = group_path(h, &grp.cells, k1, k2, j, cfg, opts, report).map_err(|e| {
            report.push("groups", "failed", Some(format!("group {j}: {e}")));
            Error::stage("group path", e)
        })?;
        cycle.extend(q);
        if j + 1 < ell {
            cycle.extend_from_slice(&plan.connectors[j]);
        }
    }
    report.push("groups", "ok", Some(format!("{ell} groups filled")));
    Ok(cycle)
}

#[allow(clippy::too_many_arguments)]
fn group_path(
    host: &MultipartiteGraph,
    cells: &[Vec<usize>],
    k1: &[usize],
    k2: &[usize],
    j: usize,
    cfg: &Config,
    opts: PipelineOptions,
    report: &mut PipelineReport,
) -> Result<Vec<usize>> {
    let (h, map) = host.induced(cells)?;
    let local = |k: &[usize]| -> Result<Vec<usize>> {
        k.iter()
            .map(|v| {
                map.iter()
                    .position(|u| u == v)
                    .ok_or_else(|| Error::Verification(format!("terminal vertex {v} is outside group {j}")))
            })
            .collect()
    };
    let (l1, l2) = (local(k1)?, local(k2)?);
    let mut fallback = None;
    if opts.mode != GroupMode::Oracle {
        match constructive_path(&h, &l1, &l2, cfg) {
            Ok(p) => {
                report.groups.push(GroupRecord {
                    group: j,
                    vertices: h.n(),
                    method: "constructive".into(),
                    fallback: None,
                    nodes: None,
                });
                return Ok(p.into_iter().map(|v| map[v]).collect());
            }
            Err(e) if opts.mode == GroupMode::Auto => fallback = Some(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    let out = ham_power_path_between(&h, cfg.r, &l1, &l2, SearchBudget::nodes(opts.budget))?;
    report.groups.push(GroupRecord {
        group: j,
        vertices: h.n(),
        method: "oracle".into(),
        fallback,
        nodes: Some(out.nodes_expanded),
    });
    match out.answer {
        Answer::Yes(p) => Ok(p.into_iter().map(|v| map[v]).collect()),
        Answer::No => Err(Error::NoCycle(format!(
            "group {j} has no spanning path between its terminal cliques"
        ))),
        Answer::BudgetExceeded => Err(Error::Budget(opts.budget)),
    }
}

/// Some transversal `r`-clique of a balanced `r`-partite host, listed in
/// part order.
fn transversal_clique(h: &MultipartiteGraph, cfg: &Config) -> Result<Vec<usize>> {
    let mut rng = rng::stream(cfg.seed, STAGE);
    let mut order: Vec<Vec<usize>> = h.parts().to_vec();
    for p in &mut order {
        p.shuffle(&mut rng);
    }
    fn extend(h: &MultipartiteGraph, order: &[Vec<usize>], acc: &mut Vec<usize>) -> bool {
        let i = acc.len();
        if i == order.len() {
            return true;
        }
        for &v in &order[i] {
            if acc.iter().all(|&u| h.adjacent(u, v)) {
                acc.push(v);
                if extend(h, order, acc) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }
    let mut acc = Vec::with_capacity(h.k());
    if extend(h, &order, &mut acc) {
        Ok(acc)
    } else {
        Err(Error::NoCycle("the host has no transversal clique".into()))
    }
}

/// Spanning path of `h - (K1 ∪ K2)` continuing `K1` and leading into `K2`.
/// An absorbing path is placed first, a random balanced reservoir is set
/// aside, the rest is covered by paths, and consecutive pieces are joined
/// by connectors drawn from the reservoir and the cover's leftover. What the
/// connectors leave is absorbed up to capacity; any surplus is spliced in
/// one transversal tuple at a time. `K1` and `K2` are transversal cliques
/// in part order, equal or disjoint.
fn constructive_path(h: &MultipartiteGraph, k1: &[usize], k2: &[usize], cfg: &Config) -> Result<Vec<usize>> {
    let r = cfg.r;
    let terminals: HashSet<usize> = k1.iter().chain(k2).copied().collect();
    let free = h.n() - terminals.len();
    let gadget_len = 3 * r * r - r;
    if free < gadget_len + r {
        return Err(Error::ScaleInfeasible(format!(
            "{free} free vertices cannot hold an absorbing path of {gadget_len} vertices and a cover"
        )));
    }
    let mut aopts = AssembleOptions::new((free / (4 * gadget_len)).clamp(1, 4));
    aopts.exclusions = terminals.clone();
    let pabs = assemble_absorbing_path(h, &aopts, cfg)?;

    let mut used: HashSet<usize> = terminals.clone();
    used.extend(pabs.path.iter().copied());
    let mut rng = rng::stream(cfg.seed, STAGE + 1);
    let mut rest: Vec<Vec<usize>> = h
        .parts()
        .iter()
        .map(|p| p.iter().copied().filter(|v| !used.contains(v)).collect())
        .collect();
    let per_part = rest[0].len();
    let reserve = (per_part / 4).max(2 * r - 2).min(per_part);
    let mut pool: HashSet<usize> = HashSet::new();
    for part in &mut rest {
        part.shuffle(&mut rng);
        pool.extend(part.drain(..reserve));
        part.sort_unstable();
    }

    let mut pieces: Vec<Vec<usize>> = vec![k1.to_vec(), pabs.path.clone()];
    if per_part > reserve {
        let (rest_g, rest_map) = h.induced(&rest)?;
        let cover = cover_with_paths(&rest_g, r, cfg.alpha, cfg)?;
        pieces.extend(
            cover
                .paths
                .iter()
                .map(|p| p.iter().map(|&v| rest_map[v]).collect::<Vec<_>>()),
        );
        pool.extend(cover.leftover.iter().map(|&v| rest_map[v]));
    }
    pieces.push(k2.to_vec());
    let mut links = Vec::with_capacity(pieces.len() - 1);
    for w in pieces.windows(2) {
        links.push(link(h, &w[0], &w[1], &mut pool, cfg)?);
    }

    // absorb as much of the remainder as the gadgets allow
    let mut z: Vec<Vec<usize>> = vec![Vec::new(); r];
    for &v in &pool {
        z[h.part_of(v)].push(v);
    }
    for part in &mut z {
        part.sort_unstable();
    }
    let mut take = z[0].len().min(pabs.gadgets.len());
    loop {
        let batch: Vec<usize> = z.iter().flat_map(|p| p[..take].iter().copied()).collect();
        match absorb(h, &pabs, &batch) {
            Ok(path) => {
                pieces[1] = path;
                for part in &mut z {
                    part.drain(..take);
                }
                break;
            }
            Err(Error::Matching(_)) if take > 0 => take -= 1,
            Err(e) => return Err(e),
        }
    }

    let mut p = Vec::with_capacity(free);
    for (i, q) in links.into_iter().enumerate() {
        p.extend(q);
        if i + 2 < pieces.len() {
            p.extend_from_slice(&pieces[i + 1]);
        }
    }
    let mut full = [k1, &p, k2].concat();
    while !z[0].is_empty() {
        if !insert_tuple(h, &mut full, &mut z, r) {
            return Err(Error::CoverageShortfall(format!(
                "{} vertices could be neither absorbed nor spliced in",
                z.iter().map(Vec::len).sum::<usize>()
            )));
        }
    }
    let p = full[r..full.len() - r].to_vec();
    let covered: HashSet<usize> = p.iter().chain(&terminals).copied().collect();
    if p.len() != free || covered.len() != h.n() || !is_path(h, &p, r) || !is_walk(h, &full, r) {
        return Err(Error::Verification(
            "constructed group path does not span the group".into(),
        ));
    }
    Ok(p)
}

/// Inserts one vertex of every part into `seq` strictly between the
/// terminal cliques, at the first gap where the result stays a walk. The
/// tuple copies the part pattern of the `r` vertices before the gap.
fn insert_tuple(h: &MultipartiteGraph, seq: &mut Vec<usize>, z: &mut [Vec<usize>], r: usize) -> bool {
    for i in r..=seq.len() - r {
        let pattern: Vec<usize> = seq[i - r..i].iter().map(|&v| h.part_of(v)).collect();
        let mut tuple = Vec::with_capacity(r);
        if fill_tuple(h, seq, i, &pattern, z, &mut tuple, r) {
            for &v in &tuple {
                let part = &mut z[h.part_of(v)];
                part.retain(|&u| u != v);
            }
            seq.splice(i..i, tuple);
            return true;
        }
    }
    false
}

fn fill_tuple(
    h: &MultipartiteGraph,
    seq: &[usize],
    i: usize,
    pattern: &[usize],
    z: &[Vec<usize>],
    tuple: &mut Vec<usize>,
    r: usize,
) -> bool {
    let t = tuple.len();
    if t == r {
        // windows reaching past the gap
        let right = &seq[i..(i + r - 1).min(seq.len())];
        let joined: Vec<usize> = seq[i - r + 1..i]
            .iter()
            .chain(tuple.iter())
            .chain(right)
            .copied()
            .collect();
        return is_walk(h, &joined, r);
    }
    for &v in &z[pattern[t]] {
        // v must see the r-1 vertices before it in the new sequence
        let ok = (1..r).all(|d| {
            let u = if d <= t { tuple[t - d] } else { seq[i - (d - t)] };
            h.adjacent(u, v)
        });
        if ok {
            tuple.push(v);
            if fill_tuple(h, seq, i, pattern, z, tuple, r) {
                return true;
            }
            tuple.pop();
        }
    }
    false
}

/// The shortest connector, of length a multiple of `r` up to `r(2r-2)`,
/// drawn from `pool`. Used vertices leave the pool.
fn link(
    h: &MultipartiteGraph,
    a: &[usize],
    b: &[usize],
    pool: &mut HashSet<usize>,
    cfg: &Config,
) -> Result<Vec<usize>> {
    let r = cfg.r;
    let (tail, head) = (&a[a.len() - r..], &b[..r]);
    if is_walk(h, &[tail, head].concat(), r) {
        return Ok(Vec::new());
    }
    let pools: Vec<Vec<usize>> = h
        .parts()
        .iter()
        .map(|p| p.iter().copied().filter(|v| pool.contains(v)).collect())
        .collect();
    let mut last = None;
    for m in 1..=(2 * r - 2).max(1) {
        match find_connector(h, &pools, tail, head, m * r, &HashSet::new(), cfg) {
            Ok(q) => {
                for v in &q {
                    pool.remove(v);
                }
                return Ok(q);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one length tried"))
}
