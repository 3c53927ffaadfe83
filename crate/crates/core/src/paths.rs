//! (r-1)-walks and (r-1)-paths, termination and ordering predicates, type
//! vectors and the seam-validity test for concatenating increasing runs.

use std::collections::HashSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::MultipartiteGraph;

/// 0/1 indicator over the parts of a k-partite graph.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TypeVector(Vec<bool>);

impl TypeVector {
    pub fn new(bits: Vec<bool>) -> Self {
        TypeVector(bits)
    }

    pub fn from_ones(k: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![false; k];
        for i in ones {
            bits[i] = true;
        }
        TypeVector(bits)
    }

    /// The type of a run of vertices: which parts it meets.
    pub fn of_run(g: &MultipartiteGraph, run: &[usize]) -> Self {
        Self::from_ones(g.k(), run.iter().map(|&v| g.part_of(v)))
    }

    /// `z^(0)` (first `r+1` entries one) for `j = 0`, otherwise `z^(0)`
    /// minus the `j`-th unit vector (1-based `j <= r+1`). Needs `k > r`.
    pub fn template(k: usize, r: usize, j: usize) -> Self {
        assert!(k > r, "template vectors need k > r");
        assert!(j <= r + 1, "template index {j} out of range");
        Self::from_ones(k, (0..=r).filter(|&i| j == 0 || i + 1 != j))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn popcount(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Indices of the one entries, ascending.
    pub fn ones(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.0[i]).collect()
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, &b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", b as u8)?;
        }
        write!(f, ")")
    }
}

impl Serialize for TypeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&b| b as u8))
    }
}

/// First position `j` such that `s[j]` is not adjacent to some earlier vertex
/// within distance `r - 1`. Sequences shorter than `r` have no windows.
pub fn walk_violation(g: &MultipartiteGraph, s: &[usize], r: usize) -> Option<usize> {
    if s.len() < r {
        return None;
    }
    (1..s.len()).find(|&j| (j.saturating_sub(r - 1)..j).any(|i| !g.adjacent(s[i], s[j])))
}

/// Every `r` consecutive vertices form a clique.
pub fn is_walk(g: &MultipartiteGraph, s: &[usize], r: usize) -> bool {
    walk_violation(g, s, r).is_none()
}

fn first_repeat(s: &[usize]) -> Option<usize> {
    let mut seen = HashSet::with_capacity(s.len());
    s.iter().position(|v| !seen.insert(*v))
}

/// A walk without repeated vertices.
pub fn is_path(g: &MultipartiteGraph, s: &[usize], r: usize) -> bool {
    first_repeat(s).is_none() && is_walk(g, s, r)
}

fn member<S: AsRef<[usize]>>(set: &S, v: usize) -> bool {
    set.as_ref().binary_search(&v).is_ok()
}

/// `s[i] ∈ seq[i]` for the first `seq.len()` entries. Sets must be sorted.
pub fn respects_initial<S: AsRef<[usize]>>(s: &[usize], seq: &[S]) -> bool {
    s.len() >= seq.len() && seq.iter().zip(s).all(|(set, &v)| member(set, v))
}

/// `s[p - r + i] ∈ seq[i]` for the final `r = seq.len()` entries.
pub fn respects_final<S: AsRef<[usize]>>(s: &[usize], seq: &[S]) -> bool {
    s.len() >= seq.len() && respects_initial(&s[s.len() - seq.len()..], seq)
}

/// Both the initial and the final `r` vertices respect `seq` (with
/// `r = seq.len()`).
pub fn is_properly_terminated<S: AsRef<[usize]>>(s: &[usize], seq: &[S]) -> Result<bool> {
    if s.len() < seq.len() {
        return Err(Error::TooShort {
            len: s.len(),
            r: seq.len(),
        });
    }
    Ok(respects_initial(s, seq) && respects_final(s, seq))
}

/// Proper termination with respect to the host's first `r` parts.
pub fn is_properly_terminated_in(g: &MultipartiteGraph, s: &[usize], r: usize) -> Result<bool> {
    is_properly_terminated(s, &g.parts()[..r])
}

/// Split of a properly ordered sequence into increasing runs of length `r`
/// or `r + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProperDecomposition {
    /// `0 = p_0 < p_1 < … < p_q = len`.
    pub breakpoints: Vec<usize>,
    pub types: Vec<TypeVector>,
}

impl ProperDecomposition {
    pub fn q(&self) -> usize {
        self.types.len()
    }

    pub fn runs<'a>(&'a self, s: &'a [usize]) -> impl Iterator<Item = &'a [usize]> + 'a {
        self.breakpoints.windows(2).map(move |w| &s[w[0]..w[1]])
    }
}

/// Greedy decomposition into maximal runs of strictly increasing part index.
/// Fails when a maximal run is shorter than `r` or longer than `r + 1`.
pub fn decompose(g: &MultipartiteGraph, s: &[usize], r: usize) -> Result<ProperDecomposition> {
    let mut breakpoints = vec![0];
    let mut types = Vec::new();
    let mut start = 0;
    while start < s.len() {
        let mut end = start + 1;
        while end < s.len() && g.part_of(s[end]) > g.part_of(s[end - 1]) {
            end += 1;
        }
        let len = end - start;
        if len < r || len > r + 1 {
            return Err(Error::NotProperlyOrdered { index: start });
        }
        types.push(TypeVector::of_run(g, &s[start..end]));
        breakpoints.push(end);
        start = end;
    }
    Ok(ProperDecomposition { breakpoints, types })
}

/// `(z, z2)` is valid iff for every `i` with `z_i = z2_i = 1`,
/// `Σ_{v>i} z_v + Σ_{v<=i} z2_v >= r`: a run of type `z` followed by a run
/// of type `z2` keeps equal-part vertices at distance at least `r`.
pub fn is_valid_pair(z: &TypeVector, z2: &TypeVector, r: usize) -> bool {
    assert_eq!(z.len(), z2.len(), "type vectors of different length");
    let k = z.len();
    let mut after: usize = z.popcount();
    let mut upto2 = 0;
    for i in 0..k {
        after -= z.get(i) as usize;
        upto2 += z2.get(i) as usize;
        if z.get(i) && z2.get(i) && after + upto2 < r {
            return false;
        }
    }
    true
}

/// Prefix form for runs of exactly `r` vertices: for every shared index,
/// `Σ_{v<=i} z_v <= Σ_{v<=i} z2_v`.
pub fn is_valid_pair_prefix(z: &TypeVector, z2: &TypeVector) -> bool {
    let (mut a, mut b) = (0, 0);
    (0..z.len()).all(|i| {
        a += z.get(i) as usize;
        b += z2.get(i) as usize;
        !(z.get(i) && z2.get(i)) || a <= b
    })
}

/// Outcome of an independent check, with the position of the first failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub ok: bool,
    pub reason: String,
    pub index: Option<usize>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            ok: true,
            reason: "ok".into(),
            index: None,
        }
    }

    pub fn fail(reason: impl Into<String>, index: Option<usize>) -> Self {
        Verdict {
            ok: false,
            reason: reason.into(),
            index,
        }
    }
}

/// Checks that `s` lists every vertex exactly once and that every `r`
/// cyclically consecutive vertices form a clique.
pub fn verify_ham_power_cycle(g: &MultipartiteGraph, s: &[usize], r: usize) -> Verdict {
    let n = g.n();
    if s.len() != n {
        return Verdict::fail(format!("sequence has {} vertices, graph has {n}", s.len()), None);
    }
    if let Some(i) = s.iter().position(|&v| v >= n) {
        return Verdict::fail(format!("vertex {} out of range", s[i]), Some(i));
    }
    if let Some(i) = first_repeat(s) {
        return Verdict::fail(format!("vertex {} repeated", s[i]), Some(i));
    }
    for i in 0..n {
        for d in 1..r {
            let j = (i + d) % n;
            if !g.adjacent(s[i], s[j]) {
                return Verdict::fail(
                    format!(
                        "positions {i} and {j} (vertices {} and {}) are not adjacent",
                        s[i], s[j]
                    ),
                    Some(i),
                );
            }
        }
    }
    Verdict::pass()
}

/// Keeps exactly the walks with no repeated vertex and no forbidden vertex.
pub fn filter_walks_to_paths<'a, I>(walks: I, forbidden: &'a HashSet<usize>) -> impl Iterator<Item = Vec<usize>> + 'a
where
    I: IntoIterator<Item = Vec<usize>>,
    I::IntoIter: 'a,
{
    walks
        .into_iter()
        .filter(move |w| first_repeat(w).is_none() && !w.iter().any(|v| forbidden.contains(v)))
}
