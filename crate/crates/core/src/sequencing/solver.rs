use serde::Serialize;

use super::matrix::{mask, TemplateMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartSizeSolution {
    pub x: Vec<usize>,
    pub iterations: usize,
}

/// Solves `A x = b` with every `x_j >= m`.
///
/// After reserving `m` for every column the residual must satisfy: total
/// divisible by `r`, the first `s` entries equal to `total / r`, and every
/// other entry in `0..=total / r`. Each iteration then raises one column by
/// one, always covering the rows that are already at their ceiling.
pub fn solve_part_sizes(a: &TemplateMatrix, b: &[usize], m: usize) -> Result<PartSizeSolution> {
    let (k, r, s) = (a.k, a.r, a.s);
    if b.len() != k {
        return Err(Error::Precondition(format!("b has {} entries, expected {k}", b.len())));
    }
    let reserved = a.apply(&vec![m; a.ell()]);
    let mut res: Vec<i64> = b
        .iter()
        .zip(&reserved)
        .map(|(&bi, &ri)| bi as i64 - ri as i64)
        .collect();
    let total: i64 = res.iter().sum();
    if total < 0 || total % r as i64 != 0 {
        return Err(Error::SolverPrecondition {
            condition: "P1",
            detail: format!("residual total {total} is not a non-negative multiple of {r}"),
        });
    }
    let mut level = total / r as i64;
    if let Some(i) = (0..s).find(|&i| res[i] != level) {
        return Err(Error::SolverPrecondition {
            condition: "P2",
            detail: format!(
                "row {i} has residual {} but every one of the first {s} rows needs {level}",
                res[i]
            ),
        });
    }
    if let Some(i) = (s..k).find(|&i| res[i] < 0 || res[i] > level) {
        return Err(Error::SolverPrecondition {
            condition: "P3",
            detail: format!("row {i} has residual {} outside 0..={level}", res[i]),
        });
    }

    let lookup = a.column_lookup();
    let mut x = vec![m; a.ell()];
    let mut iterations = 0;
    while level > 0 {
        let mut chosen: Vec<usize> = (0..k).filter(|&i| res[i] == level).collect();
        let mut rest: Vec<usize> = (0..k).filter(|&i| res[i] > 0 && res[i] < level).collect();
        rest.sort_by_key(|&i| (std::cmp::Reverse(res[i]), i));
        chosen.extend(rest.into_iter().take(r.saturating_sub(chosen.len())));
        chosen.sort_unstable();
        assert_eq!(chosen.len(), r, "solver invariant: exactly r rows can be decremented");
        let j = *lookup
            .get(&mask(&chosen))
            .expect("solver invariant: the chosen rows form a column of the template matrix");
        x[j] += 1;
        for i in chosen {
            res[i] -= 1;
        }
        level -= 1;
        iterations += 1;
    }
    Ok(PartSizeSolution { x, iterations })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::super::matrix::build_template_matrix;
    use super::*;

    #[test]
    fn small_system() {
        let a = build_template_matrix(4, 3, 2).unwrap();
        let sol = solve_part_sizes(&a, &[10, 10, 6, 4], 1).unwrap();
        assert_eq!(sol.x, vec![6, 4]);
        assert_eq!(sol.iterations, 8);
        assert_eq!(a.apply(&sol.x), vec![10, 10, 6, 4]);
    }

    #[test]
    fn reports_each_precondition() {
        let a = build_template_matrix(4, 3, 2).unwrap();
        let p1 = solve_part_sizes(&a, &[10, 10, 6, 5], 1).unwrap_err();
        assert!(matches!(p1, Error::SolverPrecondition { condition: "P1", .. }));
        let p2 = solve_part_sizes(&a, &[11, 9, 6, 4], 1).unwrap_err();
        assert!(matches!(p2, Error::SolverPrecondition { condition: "P2", .. }));
        let p3 = solve_part_sizes(&a, &[10, 10, 10, 0], 1).unwrap_err();
        assert!(matches!(p3, Error::SolverPrecondition { condition: "P3", .. }));
    }

    proptest! {
        #[test]
        fn solutions_are_exact_and_floored(
            r in 2usize..5, extra in 1usize..4, s_frac in 0usize..100,
            m in 0usize..4, level in 0usize..25, seed in any::<u64>(),
        ) {
            let k = r + extra;
            let s = s_frac % (r + 1);
            let a = build_template_matrix(k, r, s).unwrap();
            // a random residual satisfying the preconditions: rows s.. share
            // (r - s) * level units, each capped at level
            let mut res = vec![level; s];
            let mut tail = vec![0usize; k - s];
            let mut budget = (r - s) * level;
            let mut state = seed;
            while budget > 0 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let i = (state >> 33) as usize % tail.len();
                if tail[i] < level {
                    tail[i] += 1;
                    budget -= 1;
                }
            }
            res.extend(tail);
            let reserved = a.apply(&vec![m; a.ell()]);
            let b: Vec<usize> = res.iter().zip(&reserved).map(|(x, y)| x + y).collect();
            let sol = solve_part_sizes(&a, &b, m).unwrap();
            prop_assert_eq!(a.apply(&sol.x), b.clone());
            prop_assert!(sol.x.iter().all(|&xj| xj >= m));
            let total: usize = b.iter().sum();
            prop_assert_eq!(sol.iterations, (total - r * a.ell() * m) / r);
        }
    }
}
