use serde::Serialize;

use crate::error::{Error, Result};
use crate::paths::{is_valid_pair, TypeVector};
use crate::ratio::Ratio;

/// Type sequence prescribed for the trim path `P0'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrimTemplate {
    pub k: usize,
    pub r: usize,
    pub n: usize,
    pub s: usize,
    pub c0: usize,
    /// `c[i - 1]` is `c_i` for `i` in `1..=s`.
    pub c: Vec<usize>,
    pub q: usize,
    pub p: usize,
    /// Template index `j` of each run, i.e. run `t` has type `z^(indices[t])`.
    pub indices: Vec<usize>,
    pub type_sequence: Vec<TypeVector>,
}

impl TrimTemplate {
    /// Parts each run visits, in order.
    pub fn run_parts(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.type_sequence.iter().map(TypeVector::ones)
    }

    /// How many vertices of each part the trim path consumes.
    pub fn hits(&self) -> Vec<usize> {
        let mut hits = vec![0; self.k];
        for z in &self.type_sequence {
            for i in z.ones() {
                hits[i] += 1;
            }
        }
        hits
    }

    /// Part sizes left after removing the trim path.
    pub fn residual_sizes(&self, sizes: &[usize]) -> Vec<usize> {
        sizes
            .iter()
            .zip(self.hits())
            .map(|(&s, h)| s.saturating_sub(h))
            .collect()
    }
}

/// Computes `s`, `c_0 … c_s` and the run-type template for `P0'`.
///
/// `sizes` must be descending with every part at most `n/r`, and `k > r`.
pub fn compute_trim_template(sizes: &[usize], r: usize, sigma: Ratio) -> Result<TrimTemplate> {
    let k = sizes.len();
    let n: usize = sizes.iter().sum();
    if r < 2 || k <= r {
        return Err(Error::Precondition(format!(
            "trim template needs 2 <= r < k, got r={r}, k={k}"
        )));
    }
    if sizes.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Precondition(format!("part sizes {sizes:?} are not descending")));
    }
    if let Some(i) = sizes.iter().position(|&s| s * r > n) {
        return Err(Error::Precondition(format!("part {i} exceeds n/r")));
    }
    if let Some(i) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyPart(i));
    }

    let bound = Ratio::new(n as i64, r as i64) - sigma * Ratio::from_integer(2 * n as i64);
    let s = sizes
        .iter()
        .take_while(|&&sz| Ratio::from_integer(sz as i64) >= bound)
        .count();
    if s > r {
        return Err(Error::Trim(format!(
            "s = {s} exceeds r = {r}; sigma is too large for these part sizes"
        )));
    }

    let c0 = n % r;
    let base = (n - c0) / r;
    let c: Vec<usize> = sizes[..s]
        .iter()
        .map(|&sz| {
            base.checked_sub(sz)
                .ok_or_else(|| Error::Trim(format!("part of size {sz} exceeds (n - c_0)/r = {base}")))
        })
        .collect::<Result<_>>()?;
    if c.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Trim(format!("c_1..c_s = {c:?} is not non-decreasing")));
    }

    let mut indices = vec![0; c0];
    indices.extend((s + 1..=r + 1).rev());
    for i in (1..=s).rev() {
        indices.extend(std::iter::repeat_n(i, c[i - 1]));
    }
    indices.push(r + 1);
    let type_sequence: Vec<TypeVector> = indices.iter().map(|&j| TypeVector::template(k, r, j)).collect();
    for (t, w) in type_sequence.windows(2).enumerate() {
        if !is_valid_pair(&w[0], &w[1], r) {
            return Err(Error::Trim(format!(
                "runs {t} and {} have an invalid type pair {} -> {}",
                t + 1,
                w[0],
                w[1]
            )));
        }
    }
    let q = type_sequence.len();
    Ok(TrimTemplate {
        k,
        r,
        n,
        s,
        c0,
        c,
        q,
        p: c0 + q * r,
        indices,
        type_sequence,
    })
}
