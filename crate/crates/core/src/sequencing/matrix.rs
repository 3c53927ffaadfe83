use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::paths::TypeVector;

/// The 0/1 matrix whose columns are the admissible part-index sets for
/// the residual groups. Every column has exactly `r` ones and the first
/// `s` entries of every column are one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TemplateMatrix {
    pub k: usize,
    pub r: usize,
    pub s: usize,
    pub columns: Vec<TypeVector>,
}

impl TemplateMatrix {
    pub fn ell(&self) -> usize {
        self.columns.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.columns[j].get(i)
    }

    /// Row sums of `A x`.
    pub fn apply(&self, x: &[usize]) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for (col, &xj) in self.columns.iter().zip(x) {
            for i in col.ones() {
                out[i] += xj;
            }
        }
        out
    }

    pub(crate) fn column_lookup(&self) -> HashMap<u64, usize> {
        self.columns
            .iter()
            .enumerate()
            .map(|(j, c)| (mask(&c.ones()), j))
            .collect()
    }
}

pub(crate) fn mask(ones: &[usize]) -> u64 {
    ones.iter().fold(0u64, |m, &i| m | 1 << i)
}

/// Builds the template matrix for `0 <= s <= r <= k <= 64`.
pub fn build_template_matrix(k: usize, r: usize, s: usize) -> Result<TemplateMatrix> {
    if !(s <= r && r <= k && k <= 64 && r >= 1) {
        return Err(Error::Precondition(format!(
            "template matrix needs 0 <= s <= r <= k <= 64, got k={k}, r={r}, s={s}"
        )));
    }
    let columns = build(k, r, s).into_iter().map(TypeVector::new).collect();
    Ok(TemplateMatrix { k, r, s, columns })
}

fn build(k: usize, r: usize, s: usize) -> Vec<Vec<bool>> {
    if k == r || r == s {
        let mut col = vec![true; r];
        col.resize(k, false);
        return vec![col];
    }
    let mut cols = build(k, r, s + 1);
    for sub in build(k - s - 1, r - s, 0) {
        let mut col = vec![true; s];
        col.push(false);
        col.extend(sub);
        cols.push(col);
    }
    cols
}
