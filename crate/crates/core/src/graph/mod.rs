//! The multipartite host graph: an ordered partition into independent sets
//! plus a symmetric, irreflexive adjacency relation on dense ids `0..n`.

mod degree;
mod generate;
mod io;
mod reduce;

pub use degree::{degree_profile, degree_profile_of, DegreeProfile};
pub use generate::{extremal_independent_set, gen_extremal, gen_random, sizes_layout};
pub use io::{load_graph, save_graph, GraphDoc, GraphFormat};
pub use reduce::{reduce_parts, Reduction};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultipartiteGraph {
    parts: Vec<Vec<usize>>,
    part_of: Vec<usize>,
    // row-major bit matrix, `words` u64 per row
    adj: Vec<u64>,
    words: usize,
    nbrs: Vec<Vec<usize>>,
    name: Option<String>,
}

impl MultipartiteGraph {
    /// Builds and validates a graph. Part lists are sorted; the union of the
    /// parts must be exactly `0..n`.
    pub fn new<I>(parts: Vec<Vec<usize>>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n: usize = parts.iter().map(Vec::len).sum();
        let mut part_of = vec![usize::MAX; n];
        let mut parts = parts;
        for (i, part) in parts.iter_mut().enumerate() {
            part.sort_unstable();
            for &v in part.iter() {
                if v >= n {
                    return Err(Error::DanglingVertex { vertex: v, n });
                }
                if part_of[v] != usize::MAX {
                    return Err(Error::OverlappingParts(v));
                }
                part_of[v] = i;
            }
        }
        if let Some(v) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::UncoveredVertex(v));
        }

        let words = n.div_ceil(WORD).max(1);
        let mut adj = vec![0u64; n * words];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::DanglingVertex { vertex: u.max(v), n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if part_of[u] == part_of[v] {
                let (u, v) = (u.min(v), u.max(v));
                return Err(Error::EdgeInsidePart { u, v, part: part_of[u] });
            }
            adj[u * words + v / WORD] |= 1 << (v % WORD);
            adj[v * words + u / WORD] |= 1 << (u % WORD);
        }
        let nbrs = (0..n)
            .map(|u| {
                (0..n)
                    .filter(|&v| adj[u * words + v / WORD] >> (v % WORD) & 1 == 1)
                    .collect()
            })
            .collect();
        Ok(Self {
            parts,
            part_of,
            adj,
            words,
            nbrs,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n(&self) -> usize {
        self.part_of.len()
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &[usize] {
        &self.parts[i]
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nbrs[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.nbrs[v].len()
    }

    /// Number of neighbours of `v` inside `set`.
    pub fn deg_into(&self, v: usize, set: &[usize]) -> usize {
        set.iter().filter(|&&u| self.adjacent(v, u)).count()
    }

    /// True iff every pair of distinct entries is adjacent and no entry repeats.
    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &u)| vs[i + 1..].iter().all(|&v| self.adjacent(u, v)))
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.nbrs[u]
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.nbrs.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Same vertex set and partition, adjacency restricted by `keep`.
    pub fn filter_edges<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(usize, usize) -> bool,
    {
        let edges: Vec<_> = self.edges().filter(|&(u, v)| keep(u, v)).collect();
        let mut g = Self::new(self.parts.clone(), edges).expect("subgraph of a valid graph");
        g.name = self.name.clone();
        g
    }

    /// Same vertex set and adjacency with a new partition. Fails if some edge
    /// would fall inside a part.
    pub fn repartition(&self, parts: Vec<Vec<usize>>) -> Result<Self> {
        let mut g = Self::new(parts, self.edges())?;
        g.name = self.name.clone();
        Ok(g)
    }

    /// The subgraph induced by the union of `parts`, relabelled to `0..m`
    /// with the given ordered partition. Returns the graph together with the
    /// local-to-global vertex map.
    pub fn induced(&self, parts: &[Vec<usize>]) -> Result<(Self, Vec<usize>)> {
        let mut to_global = Vec::new();
        let mut local_parts = Vec::with_capacity(parts.len());
        for part in parts {
            let mut local = Vec::with_capacity(part.len());
            for &v in part {
                if v >= self.n() {
                    return Err(Error::DanglingVertex { vertex: v, n: self.n() });
                }
                local.push(to_global.len());
                to_global.push(v);
            }
            local_parts.push(local);
        }
        let m = to_global.len();
        let mut edges = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                if self.adjacent(to_global[a], to_global[b]) {
                    edges.push((a, b));
                }
            }
        }
        Ok((Self::new(local_parts, edges)?, to_global))
    }
}
