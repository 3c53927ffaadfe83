use num_traits::One;
use serde::Serialize;

use super::MultipartiteGraph;
use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// Proportional minimum degrees between ordered pairs of parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    /// `delta[i][j]` is `min_{v in V_i} deg(v, V_j) / |V_j|`; `None` on the diagonal.
    #[serde(serialize_with = "ser_matrix")]
    pub delta: Vec<Vec<Option<Ratio>>>,
    #[serde(with = "crate::ratio::serde_ratio")]
    pub delta_p: Ratio,
}

fn ser_matrix<S: serde::Serializer>(m: &[Vec<Option<Ratio>>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for row in m {
        let row: Vec<Option<String>> = row.iter().map(|e| e.as_ref().map(crate::ratio::format_ratio)).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl DegreeProfile {
    pub fn get(&self, i: usize, j: usize) -> Option<Ratio> {
        self.delta[i][j]
    }
}

/// Degree profile of `g` with respect to its own partition.
pub fn degree_profile(g: &MultipartiteGraph) -> Result<DegreeProfile> {
    degree_profile_of(g, g.parts())
}

/// Degree profile of the subgraph induced by the union of `cells`, taken with
/// respect to the ordered partition `cells`.
pub fn degree_profile_of<S: AsRef<[usize]>>(g: &MultipartiteGraph, cells: &[S]) -> Result<DegreeProfile> {
    let k = cells.len();
    if k < 2 {
        return Err(Error::Precondition(format!("degree profile needs k >= 2, got {k}")));
    }
    if let Some(i) = cells.iter().position(|c| c.as_ref().is_empty()) {
        return Err(Error::EmptyPart(i));
    }
    let mut delta = vec![vec![None; k]; k];
    let mut delta_p = Ratio::one();
    for (i, vi) in cells.iter().enumerate() {
        for (j, vj) in cells.iter().enumerate() {
            if i == j {
                continue;
            }
            let vj = vj.as_ref();
            let min = vi
                .as_ref()
                .iter()
                .map(|&v| g.deg_into(v, vj))
                .min()
                .expect("nonempty part");
            let d = Ratio::new(min as i64, vj.len() as i64);
            delta_p = delta_p.min(d);
            delta[i][j] = Some(d);
        }
    }
    Ok(DegreeProfile { delta, delta_p })
}
