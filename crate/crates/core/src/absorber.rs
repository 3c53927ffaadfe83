//! Absorber gadgets.
//!
//! A gadget for `r` is a labelled blow-up of the `r^2`-vertex properly
//! ordered path, with cells `D_i^j` of size 2 on the diagonal and 3
//! elsewhere. It carries two routings through the same labels, `Q2` of
//! length `3r^2 - r` and `Q1`, which additionally threads `x_1, …, x_r`.
//! Embedding a gadget in a host and laying `Q2` into a long path lets one
//! later swap in `Q1` and absorb a balanced `r`-set without touching the
//! rest of the path.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::config::Config;
use crate::connect::find_connector;
use crate::error::{Error, Result};
use crate::graph::MultipartiteGraph;
use crate::paths::{is_path, is_properly_terminated, Verdict};
use crate::rng;

const STAGE: u64 = 0x6162_736f;

/// Gadget labels with 1-based part index `i` and block index `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    A(usize, usize),
    B(usize, usize),
    C(usize, usize),
    X(usize),
}

impl Label {
    /// 1-based part the label lives in.
    pub fn part(self) -> usize {
        match self {
            Label::A(i, _) | Label::B(i, _) | Label::C(i, _) | Label::X(i) => i,
        }
    }

    /// Block `j` of a cell label.
    pub fn block(self) -> Option<usize> {
        match self {
            Label::A(_, j) | Label::B(_, j) | Label::C(_, j) => Some(j),
            Label::X(_) => None,
        }
    }

    /// Position of `D_i^j` on the underlying `r^2`-path.
    fn position(self, r: usize) -> Option<usize> {
        self.block().map(|j| (j - 1) * r + self.part())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Label::A(i, j) => write!(f, "a_{i}^{j}"),
            Label::B(i, j) => write!(f, "b_{i}^{j}"),
            Label::C(i, j) => write!(f, "c_{i}^{j}"),
            Label::X(i) => write!(f, "x_{i}"),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GadgetTemplate {
    pub r: usize,
    pub q1: Vec<Label>,
    pub q2: Vec<Label>,
}

impl GadgetTemplate {
    /// Adjacency in the blow-up plus the attachments of the `x_i`.
    pub fn adjacent(&self, a: Label, b: Label) -> bool {
        let r = self.r;
        match (a, b) {
            (Label::X(_), Label::X(_)) => false,
            (Label::X(i), l) | (l, Label::X(i)) => l.block() == Some(i) && l.part() != i,
            _ => {
                let (p, q) = (a.position(r).unwrap(), b.position(r).unwrap());
                (1..r).contains(&p.abs_diff(q))
            }
        }
    }

    fn q2_index(&self) -> HashMap<Label, usize> {
        self.q2.iter().enumerate().map(|(t, &l)| (l, t)).collect()
    }
}

/// Emits both routings for `r >= 2`.
pub fn build_gadget(r: usize) -> Result<GadgetTemplate> {
    if r < 2 {
        return Err(Error::Precondition("gadgets need r >= 2".into()));
    }
    let mut q1 = Vec::with_capacity(3 * r * r);
    for j in 1..=r {
        q1.extend((1..=r).map(|i| Label::A(i, j)));
        q1.extend((1..j).map(|i| Label::B(i, j)));
        q1.push(Label::X(j));
        q1.extend((j + 1..=r).map(|i| Label::B(i, j)));
        q1.extend((1..=r).map(|i| Label::C(i, j)));
    }
    let mut q2 = Vec::with_capacity(3 * r * r - r);
    for i in 1..=r {
        q2.extend((1..i).map(|h| Label::B(h, i)));
        q2.extend((i..=r).map(|h| Label::A(h, i)));
        q2.extend((1..=i).map(|h| Label::C(h, i)));
        q2.extend((i + 1..=r).map(|h| Label::B(h, i)));
        if i < r {
            q2.extend((1..=i).map(|h| Label::A(h, i + 1)));
        }
        q2.extend((i + 1..=r).map(|h| Label::C(h, i)));
    }
    Ok(GadgetTemplate { r, q1, q2 })
}

/// Checks lengths, label multisets, shared terminal labels and that every
/// `r` consecutive labels of either routing are pairwise adjacent.
pub fn verify_gadget(t: &GadgetTemplate) -> Verdict {
    let r = t.r;
    if r < 2 {
        return Verdict::fail("r must be at least 2", None);
    }
    if t.q2.len() != 3 * r * r - r || t.q1.len() != t.q2.len() + r {
        return Verdict::fail(format!("lengths {} and {} are wrong", t.q1.len(), t.q2.len()), None);
    }
    let mut cells: Vec<Label> = (1..=r)
        .flat_map(|j| {
            (1..=r).flat_map(move |i| {
                let mut v = vec![Label::A(i, j), Label::C(i, j)];
                if i != j {
                    v.push(Label::B(i, j));
                }
                v
            })
        })
        .collect();
    cells.sort_unstable();
    let mut q2 = t.q2.clone();
    q2.sort_unstable();
    if q2 != cells {
        return Verdict::fail("Q2 does not list every cell label exactly once", None);
    }
    let mut q1 = t.q1.clone();
    q1.sort_unstable();
    let mut expect = cells;
    expect.extend((1..=r).map(Label::X));
    expect.sort_unstable();
    if q1 != expect {
        return Verdict::fail("Q1 does not list every cell label and x_1..x_r exactly once", None);
    }
    if t.q1[..r] != t.q2[..r] || t.q1[t.q1.len() - r..] != t.q2[t.q2.len() - r..] {
        return Verdict::fail("Q1 and Q2 do not share their first and last r labels", None);
    }
    for (name, q) in [("Q1", &t.q1), ("Q2", &t.q2)] {
        for (w, win) in q.windows(r).enumerate() {
            for a in 0..r {
                for b in a + 1..r {
                    if !t.adjacent(win[a], win[b]) {
                        return Verdict::fail(
                            format!("{name}: {} and {} in window {w} are not adjacent", win[a], win[b]),
                            Some(w),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass()
}

/// A gadget embedded in a host: `vertices[t]` realises `q2[t]`, and the
/// embedding was searched for the balanced set `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbsorberInstance {
    pub target: Vec<usize>,
    pub vertices: Vec<usize>,
}

impl AbsorberInstance {
    /// The absorber path itself, i.e. `Q2` under the embedding.
    pub fn path(&self) -> &[usize] {
        &self.vertices
    }

    /// `Q1` under the embedding with `x_i = xs[i - 1]`.
    pub fn absorbing_route(&self, t: &GadgetTemplate, xs: &[usize]) -> Vec<usize> {
        let index = t.q2_index();
        t.q1.iter()
            .map(|&l| match l {
                Label::X(i) => xs[i - 1],
                l => self.vertices[index[&l]],
            })
            .collect()
    }

    /// Vertices of part `i` (0-based) adjacent to every vertex of the cells
    /// `D_h^{i+1}`, `h != i + 1`; any choice of one such vertex per part is
    /// absorbable.
    pub fn absorbable(&self, g: &MultipartiteGraph, t: &GadgetTemplate, i: usize) -> Vec<usize> {
        let row: Vec<usize> =
            t.q2.iter()
                .zip(&self.vertices)
                .filter(|(l, _)| l.block() == Some(i + 1) && l.part() != i + 1)
                .map(|(_, &v)| v)
                .collect();
        g.part(i)
            .iter()
            .copied()
            .filter(|&v| row.iter().all(|&u| g.adjacent(u, v)))
            .collect()
    }
}

/// Orders `x` by part and checks it has one vertex in each of the `r` parts.
fn balanced_target(g: &MultipartiteGraph, x: &[usize], r: usize) -> Result<Vec<usize>> {
    if g.k() != r || x.len() != r {
        return Err(Error::Precondition(format!("need an {r}-partite host and an {r}-set")));
    }
    let mut out = vec![usize::MAX; r];
    for &v in x {
        if v >= g.n() {
            return Err(Error::DanglingVertex { vertex: v, n: g.n() });
        }
        let i = g.part_of(v);
        if out[i] != usize::MAX {
            return Err(Error::Precondition(format!("target {x:?} is not balanced")));
        }
        out[i] = v;
    }
    Ok(out)
}

/// Re-checks an instance edge by edge against the host.
pub fn verify_instance(g: &MultipartiteGraph, t: &GadgetTemplate, inst: &AbsorberInstance) -> bool {
    let Ok(x) = balanced_target(g, &inst.target, t.r) else {
        return false;
    };
    if inst.vertices.len() != t.q2.len() {
        return false;
    }
    let distinct: HashSet<usize> = inst.vertices.iter().chain(&x).copied().collect();
    if distinct.len() != inst.vertices.len() + x.len() {
        return false;
    }
    let labelled: Vec<(Label, usize)> =
        t.q2.iter()
            .copied()
            .zip(inst.vertices.iter().copied())
            .chain((1..=t.r).map(|i| (Label::X(i), x[i - 1])))
            .collect();
    labelled.iter().all(|&(l, v)| v < g.n() && g.part_of(v) == l.part() - 1)
        && labelled.iter().enumerate().all(|(a, &(la, va))| {
            labelled[a + 1..]
                .iter()
                .all(|&(lb, vb)| !t.adjacent(la, lb) || g.adjacent(va, vb))
        })
}

struct Embedder<'a> {
    g: &'a MultipartiteGraph,
    t: &'a GadgetTemplate,
    x: &'a [usize],
    back: Vec<Vec<usize>>,
    blocked: Vec<bool>,
    assigned: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl<'a> Embedder<'a> {
    fn new(
        g: &'a MultipartiteGraph,
        t: &'a GadgetTemplate,
        x: &'a [usize],
        forbidden: &HashSet<usize>,
        budget: u64,
    ) -> Self {
        let back = (0..t.q2.len())
            .map(|a| (0..a).filter(|&b| t.adjacent(t.q2[a], t.q2[b])).collect())
            .collect();
        let mut blocked = vec![false; g.n()];
        for &v in forbidden.iter().chain(x) {
            blocked[v] = true;
        }
        Embedder {
            g,
            t,
            x,
            back,
            blocked,
            assigned: Vec::with_capacity(t.q2.len()),
            nodes: 0,
            budget,
        }
    }

    fn candidates(&self) -> Vec<usize> {
        let a = self.assigned.len();
        let label = self.t.q2[a];
        let xi = label.block().filter(|&j| j != label.part()).map(|j| self.x[j - 1]);
        self.g
            .part(label.part() - 1)
            .iter()
            .copied()
            .filter(|&v| {
                !self.blocked[v]
                    && xi.is_none_or(|x| self.g.adjacent(x, v))
                    && self.back[a].iter().all(|&b| self.g.adjacent(self.assigned[b], v))
            })
            .collect()
    }

    /// Depth-first enumeration; `visit` returns false to stop. Returns false
    /// when the node budget ran out.
    fn search(&mut self, rng: &mut Option<&mut ChaCha8Rng>, visit: &mut dyn FnMut(&[usize]) -> bool) -> Option<bool> {
        if self.assigned.len() == self.t.q2.len() {
            return Some(visit(&self.assigned));
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let mut cands = self.candidates();
        if let Some(rng) = rng.as_deref_mut() {
            cands.shuffle(rng);
        }
        for v in cands {
            self.blocked[v] = true;
            self.assigned.push(v);
            let go_on = self.search(rng, visit);
            self.assigned.pop();
            self.blocked[v] = false;
            if go_on != Some(true) {
                return go_on;
            }
        }
        Some(true)
    }
}

/// Randomised embedding search returning up to `limit` distinct instances
/// avoiding `x` and `forbidden`.
pub fn find_absorbers(
    g: &MultipartiteGraph,
    x: &[usize],
    limit: usize,
    forbidden: &HashSet<usize>,
    budget: u64,
    cfg: &Config,
) -> Result<Vec<AbsorberInstance>> {
    let t = build_gadget(cfg.r)?;
    let x = balanced_target(g, x, cfg.r)?;
    let mut found = Vec::new();
    if limit == 0 {
        return Ok(found);
    }
    let mut rng = rng::stream(cfg.seed, STAGE ^ x[0] as u64);
    let mut e = Embedder::new(g, &t, &x, forbidden, budget);
    e.search(&mut Some(&mut rng), &mut |vs| {
        found.push(AbsorberInstance {
            target: x.clone(),
            vertices: vs.to_vec(),
        });
        found.len() < limit
    });
    Ok(found)
}

/// Exact number of embeddings for `x`, or `None` if `budget` search nodes
/// do not suffice.
pub fn count_absorbers(g: &MultipartiteGraph, x: &[usize], r: usize, budget: u64) -> Result<Option<u64>> {
    let t = build_gadget(r)?;
    let x = balanced_target(g, x, r)?;
    let mut count = 0u64;
    let mut e = Embedder::new(g, &t, &x, &HashSet::new(), budget);
    let done = e.search(&mut None, &mut |_| {
        count += 1;
        true
    });
    Ok(done.map(|_| count))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlacedGadget {
    /// Index in the absorbing path where this gadget's `Q2` starts.
    pub offset: usize,
    pub instance: AbsorberInstance,
}

/// Gadgets laid out along one properly terminated path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbsorbingPath {
    pub r: usize,
    pub path: Vec<usize>,
    pub gadgets: Vec<PlacedGadget>,
    pub connectors: Vec<Vec<usize>>,
}

impl AbsorbingPath {
    /// Most vertices the path can take in, one balanced `r`-set per gadget.
    pub fn capacity(&self) -> usize {
        self.r * self.gadgets.len()
    }
}

#[derive(Clone, Debug)]
pub struct AssembleOptions {
    pub gadgets: usize,
    pub exclusions: HashSet<usize>,
    /// Reject paths longer than this (typically `beta n`).
    pub size_cap: Option<usize>,
    /// Embedding search nodes per sampled class.
    pub budget: u64,
    /// Connector length; defaults to `r(2r - 2)`.
    pub connector_len: Option<usize>,
}

impl AssembleOptions {
    pub fn new(gadgets: usize) -> Self {
        AssembleOptions {
            gadgets,
            exclusions: HashSet::new(),
            size_cap: None,
            budget: 20_000,
            connector_len: None,
        }
    }
}

/// Samples balanced classes, embeds one disjoint gadget for each, and links
/// the gadgets with connecting paths into a single absorbing path.
pub fn assemble_absorbing_path(g: &MultipartiteGraph, opts: &AssembleOptions, cfg: &Config) -> Result<AbsorbingPath> {
    let r = cfg.r;
    if g.k() != r {
        return Err(Error::Precondition(format!("absorbing paths need an {r}-partite host")));
    }
    if opts.gadgets == 0 {
        return Err(Error::Precondition("at least one gadget is required".into()));
    }
    let t = build_gadget(r)?;
    let mut rng = rng::stream(cfg.seed, STAGE);
    let mut used = opts.exclusions.clone();
    let mut placed: Vec<AbsorberInstance> = Vec::with_capacity(opts.gadgets);
    for _ in 0..opts.gadgets {
        let mut last_class = Vec::new();
        let mut found = None;
        for _ in 0..cfg.retry_limit {
            let Some(x) = sample_class(g, &used, &mut rng) else {
                break;
            };
            last_class = x.clone();
            let mut e = Embedder::new(g, &t, &x, &used, opts.budget);
            let mut hit = None;
            e.search(&mut Some(&mut rng), &mut |vs| {
                hit = Some(vs.to_vec());
                false
            });
            if let Some(vs) = hit {
                found = Some(AbsorberInstance {
                    target: x,
                    vertices: vs,
                });
                break;
            }
        }
        let Some(inst) = found else {
            return Err(Error::CoverageShortfall(format!(
                "no disjoint absorber found for class {last_class:?} after {} samples",
                cfg.retry_limit
            )));
        };
        used.extend(inst.vertices.iter().copied());
        placed.push(inst);
    }

    let ell = opts.connector_len.unwrap_or(r * (2 * r - 2));
    let mut path = Vec::new();
    let mut gadgets = Vec::with_capacity(placed.len());
    let mut connectors = Vec::new();
    for (k, inst) in placed.into_iter().enumerate() {
        if k > 0 {
            let pools: Vec<Vec<usize>> = g.parts().to_vec();
            let q = find_connector(g, &pools, &path, inst.path(), ell, &used, cfg)
                .map_err(|e| Error::stage("absorber connector", e))?;
            used.extend(q.iter().copied());
            path.extend_from_slice(&q);
            connectors.push(q);
        }
        gadgets.push(PlacedGadget {
            offset: path.len(),
            instance: inst.clone(),
        });
        path.extend_from_slice(inst.path());
    }
    if let Some(cap) = opts.size_cap {
        if path.len() > cap {
            return Err(Error::ScaleInfeasible(format!(
                "absorbing path has {} vertices, more than the cap {cap}",
                path.len()
            )));
        }
    }
    if !is_path(g, &path, r) || !is_properly_terminated(&path, g.parts())? {
        return Err(Error::Verification(
            "assembled absorbing path is not a properly terminated path".into(),
        ));
    }
    Ok(AbsorbingPath {
        r,
        path,
        gadgets,
        connectors,
    })
}

fn sample_class(g: &MultipartiteGraph, used: &HashSet<usize>, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    g.parts()
        .iter()
        .map(|p| {
            let free: Vec<usize> = p.iter().copied().filter(|v| !used.contains(v)).collect();
            (!free.is_empty()).then(|| free[rng.gen_range(0..free.len())])
        })
        .collect()
}

/// Splits `z` into balanced `r`-sets, matches each to a distinct gadget able
/// to take it, and reroutes those gadgets through their `r`-sets. The result
/// spans `V(P_abs) ∪ Z` and keeps the first and last `r` vertices.
pub fn absorb(g: &MultipartiteGraph, pabs: &AbsorbingPath, z: &[usize]) -> Result<Vec<usize>> {
    let r = pabs.r;
    let t = build_gadget(r)?;
    let on_path: HashSet<usize> = pabs.path.iter().copied().collect();
    let mut by_part: Vec<Vec<usize>> = vec![Vec::new(); r];
    for &v in z {
        if v >= g.n() {
            return Err(Error::DanglingVertex { vertex: v, n: g.n() });
        }
        if on_path.contains(&v) {
            return Err(Error::Precondition(format!(
                "vertex {v} is already on the absorbing path"
            )));
        }
        by_part[g.part_of(v)].push(v);
    }
    let m = by_part[0].len();
    if by_part.iter().any(|p| p.len() != m) {
        return Err(Error::Precondition("the set to absorb is not balanced".into()));
    }
    if m > pabs.gadgets.len() {
        return Err(Error::Precondition(format!(
            "{} vertices exceed the capacity {}",
            z.len(),
            pabs.capacity()
        )));
    }
    for p in &mut by_part {
        p.sort_unstable();
        let before = p.len();
        p.dedup();
        if p.len() != before {
            return Err(Error::Precondition("the set to absorb repeats a vertex".into()));
        }
    }
    if m == 0 {
        return Ok(pabs.path.clone());
    }

    // absorbable[k][i]: members of Z in part i that gadget k can take
    let absorbable: Vec<Vec<HashSet<usize>>> = pabs
        .gadgets
        .iter()
        .map(|pg| {
            (0..r)
                .map(|i| {
                    let ok: HashSet<usize> = pg.instance.absorbable(g, &t, i).into_iter().collect();
                    by_part[i].iter().copied().filter(|v| ok.contains(v)).collect()
                })
                .collect()
        })
        .collect();

    let mut assignment: Vec<Option<Vec<usize>>> = vec![None; pabs.gadgets.len()];
    let mut free: Vec<Vec<bool>> = by_part.iter().map(|p| vec![true; p.len()]).collect();
    let mut nodes = 0u64;
    if !match_sets(&by_part, &absorbable, &mut free, &mut assignment, &mut nodes, m) {
        return Err(Error::Matching(format!(
            "could not assign {m} balanced {r}-sets to {} gadgets",
            pabs.gadgets.len()
        )));
    }

    let mut out = Vec::with_capacity(pabs.path.len() + z.len());
    let mut cursor = 0;
    for (pg, xs) in pabs.gadgets.iter().zip(&assignment) {
        out.extend_from_slice(&pabs.path[cursor..pg.offset]);
        match xs {
            Some(xs) => out.extend(pg.instance.absorbing_route(&t, xs)),
            None => out.extend_from_slice(pg.instance.path()),
        }
        cursor = pg.offset + t.q2.len();
    }
    out.extend_from_slice(&pabs.path[cursor..]);

    let ends_kept = out[..r] == pabs.path[..r] && out[out.len() - r..] == pabs.path[pabs.path.len() - r..];
    if !is_path(g, &out, r) || !ends_kept || out.len() != pabs.path.len() + z.len() {
        return Err(Error::Verification("absorbed path failed re-verification".into()));
    }
    Ok(out)
}

fn match_sets(
    by_part: &[Vec<usize>],
    absorbable: &[Vec<HashSet<usize>>],
    free: &mut [Vec<bool>],
    assignment: &mut [Option<Vec<usize>>],
    nodes: &mut u64,
    remaining: usize,
) -> bool {
    if remaining == 0 {
        return true;
    }
    *nodes += 1;
    if *nodes > 1_000_000 {
        return false;
    }
    let r = by_part.len();
    // the first free vertex of part 0 must go somewhere; try gadgets that
    // can take it, scarcest first
    let a = free[0].iter().position(|&f| f).expect("remaining > 0");
    let v0 = by_part[0][a];
    let mut gadgets: Vec<usize> = (0..absorbable.len())
        .filter(|&k| assignment[k].is_none() && absorbable[k][0].contains(&v0))
        .collect();
    gadgets.sort_by_key(|&k| absorbable[k].iter().map(HashSet::len).sum::<usize>());
    free[0][a] = false;
    for k in gadgets {
        let mut chosen = vec![v0];
        if pick_rest(
            1,
            r,
            k,
            by_part,
            absorbable,
            free,
            assignment,
            &mut chosen,
            nodes,
            remaining,
        ) {
            return true;
        }
    }
    free[0][a] = true;
    false
}

#[allow(clippy::too_many_arguments)]
fn pick_rest(
    i: usize,
    r: usize,
    k: usize,
    by_part: &[Vec<usize>],
    absorbable: &[Vec<HashSet<usize>>],
    free: &mut [Vec<bool>],
    assignment: &mut [Option<Vec<usize>>],
    chosen: &mut Vec<usize>,
    nodes: &mut u64,
    remaining: usize,
) -> bool {
    if i == r {
        assignment[k] = Some(chosen.clone());
        if match_sets(by_part, absorbable, free, assignment, nodes, remaining - 1) {
            return true;
        }
        assignment[k] = None;
        return false;
    }
    for b in 0..by_part[i].len() {
        let v = by_part[i][b];
        if !free[i][b] || !absorbable[k][i].contains(&v) {
            continue;
        }
        free[i][b] = false;
        chosen.push(v);
        if pick_rest(
            i + 1,
            r,
            k,
            by_part,
            absorbable,
            free,
            assignment,
            chosen,
            nodes,
            remaining,
        ) {
            return true;
        }
        chosen.pop();
        free[i][b] = true;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_random;
    use crate::ratio::Ratio;

    fn names(q: &[Label]) -> String {
        q.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn r3_routings_match_the_worked_example() {
        let t = build_gadget(3).unwrap();
        assert_eq!(
            names(&t.q1),
            "a_1^1 a_2^1 a_3^1 x_1 b_2^1 b_3^1 c_1^1 c_2^1 c_3^1 a_1^2 a_2^2 a_3^2 b_1^2 x_2 b_3^2 c_1^2 c_2^2 c_3^2 \
             a_1^3 a_2^3 a_3^3 b_1^3 b_2^3 x_3 c_1^3 c_2^3 c_3^3"
        );
        assert_eq!(
            names(&t.q2),
            "a_1^1 a_2^1 a_3^1 c_1^1 b_2^1 b_3^1 a_1^2 c_2^1 c_3^1 b_1^2 a_2^2 a_3^2 c_1^2 c_2^2 b_3^2 a_1^3 a_2^3 c_3^2 \
             b_1^3 b_2^3 a_3^3 c_1^3 c_2^3 c_3^3"
        );
        assert_eq!((t.q1.len(), t.q2.len()), (27, 24));
    }

    #[test]
    fn gadgets_verify_for_small_r() {
        for r in 2..=6 {
            let t = build_gadget(r).unwrap();
            assert!(verify_gadget(&t).ok, "r = {r}: {:?}", verify_gadget(&t));
            assert_eq!(t.q1.len() - t.q2.len(), r);
            let first: Vec<Label> = (1..=r).map(|i| Label::A(i, 1)).collect();
            let last: Vec<Label> = (1..=r).map(|i| Label::C(i, r)).collect();
            assert_eq!(t.q2[..r], first[..]);
            assert_eq!(t.q2[t.q2.len() - r..], last[..]);
        }
    }

    #[test]
    fn injected_faults_fail() {
        let mut t = build_gadget(3).unwrap();
        t.q2.swap(4, 5);
        t.q2.swap(3, 9);
        assert!(!verify_gadget(&t).ok);
        let mut t = build_gadget(3).unwrap();
        t.q1.retain(|&l| l != Label::X(1));
        assert!(!verify_gadget(&t).ok);
    }

    #[test]
    fn serializes_label_strings() {
        let t = build_gadget(2).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["q1"][2], "x_1");
        assert_eq!(v["q2"][0], "a_1^1");
    }

    fn complete(sizes: &[usize]) -> MultipartiteGraph {
        gen_random(sizes, Ratio::from_integer(1), 0).unwrap()
    }

    #[test]
    fn complete_hosts_have_absorbers() {
        let g = complete(&[9, 9, 9]);
        let cfg = Config::for_r(3);
        let t = build_gadget(3).unwrap();
        let found = find_absorbers(&g, &[0, 9, 18], 3, &HashSet::new(), 100_000, &cfg).unwrap();
        assert_eq!(found.len(), 3);
        for inst in &found {
            assert!(verify_instance(&g, &t, inst));
            assert!(!inst.vertices.contains(&0));
        }
    }

    #[test]
    fn isolated_target_has_none() {
        // vertex 0 sees nothing in part 1
        let g = complete(&[6, 6]).filter_edges(|u, v| u.min(v) != 0);
        let found = find_absorbers(&g, &[0, 6], 5, &HashSet::new(), 100_000, &Config::for_r(2)).unwrap();
        assert!(found.is_empty());
    }

    fn brute_force_count(g: &MultipartiteGraph, t: &GadgetTemplate, x: &[usize]) -> u64 {
        // every injective part-respecting labelling, checked edge by edge
        let per_part: Vec<Vec<usize>> = (0..t.r)
            .map(|i| g.part(i).iter().copied().filter(|v| !x.contains(v)).collect())
            .collect();
        let slots: Vec<Vec<usize>> = (0..t.r)
            .map(|i| (0..t.q2.len()).filter(|&a| t.q2[a].part() == i + 1).collect())
            .collect();
        let mut count = 0;
        let mut assign = vec![0usize; t.q2.len()];
        fn perms(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for (i, &v) in pool.iter().enumerate() {
                let mut rest = pool.to_vec();
                rest.remove(i);
                for mut p in perms(&rest, k - 1) {
                    p.insert(0, v);
                    out.push(p);
                }
            }
            out
        }
        let choices: Vec<Vec<Vec<usize>>> = (0..t.r).map(|i| perms(&per_part[i], slots[i].len())).collect();
        for p0 in &choices[0] {
            for p1 in &choices[1] {
                for (s, v) in slots[0].iter().zip(p0).chain(slots[1].iter().zip(p1)) {
                    assign[*s] = *v;
                }
                let inst = AbsorberInstance {
                    target: x.to_vec(),
                    vertices: assign.clone(),
                };
                if verify_instance(g, t, &inst) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn exhaustive_count_matches_brute_force() {
        let t = build_gadget(2).unwrap();
        for seed in 0..3 {
            let g = gen_random(&[6, 6], Ratio::new(4, 5), seed).unwrap();
            let x = [0, 6];
            let dfs = count_absorbers(&g, &x, 2, u64::MAX).unwrap().unwrap();
            assert_eq!(dfs, brute_force_count(&g, &t, &x), "seed {seed}");
        }
        let g = complete(&[6, 6]);
        // 5 free vertices per part fill 5 labels per part in every order
        assert_eq!(count_absorbers(&g, &[0, 6], 2, u64::MAX).unwrap(), Some(120 * 120));
    }

    #[test]
    fn assembly_and_absorption_round_trip() {
        let g = complete(&[24, 24, 24]);
        let cfg = Config::for_r(3).with_seed(4);
        let pabs = assemble_absorbing_path(&g, &AssembleOptions::new(2), &cfg).unwrap();
        assert_eq!(pabs.path.len(), 24 * 2 + 12);
        assert!(is_path(&g, &pabs.path, 3));
        let free: Vec<usize> = (0..72).filter(|v| !pabs.path.contains(v)).collect();
        let z: Vec<usize> = (0..3)
            .flat_map(|i| free.iter().copied().filter(move |&v| v / 24 == i).take(2))
            .collect();
        let out = absorb(&g, &pabs, &z).unwrap();
        assert_eq!(out.len(), pabs.path.len() + 6);
        assert_eq!(out[..3], pabs.path[..3]);
        assert_eq!(absorb(&g, &pabs, &[]).unwrap(), pabs.path);
    }

    #[test]
    fn zero_budget_is_a_shortfall() {
        let g = complete(&[9, 9, 9]);
        let mut opts = AssembleOptions::new(1);
        opts.budget = 0;
        let err = assemble_absorbing_path(&g, &opts, &Config::for_r(3)).unwrap_err();
        assert!(matches!(err, Error::CoverageShortfall(_)));
    }
}
