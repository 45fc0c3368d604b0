//! Weighted undirected multigraphs and their Laplacians.
//!
//! Edges are kept as an ordered multiset. Every edge carries a `parent` id
//! naming the original edge it descends from, so that parallel copies made
//! by [`WeightedGraph::split_edge`] can later be merged back by
//! [`WeightedGraph::recombine`].

mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

pub use io::{parse_graph, read_graph, render_graph, write_graph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    /// Index of the original edge this record descends from.
    pub parent: usize,
}

impl Edge {
    pub fn new(u: usize, v: usize, weight: f64, parent: usize) -> Self {
        Edge {
            u,
            v,
            weight,
            parent,
        }
    }

    /// Endpoints as an unordered pair (smaller index first).
    pub fn key(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Builds a graph from `(u, v, w)` triples. Each edge is its own parent.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(i, (u, v, w))| Edge::new(u, v, w, i))
            .collect();
        Self::from_edges(n, edges)
    }

    /// Builds a graph from full edge records, validating every invariant.
    pub fn from_edges(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyVertexSet);
        }
        let mut lineage: HashMap<usize, (usize, usize)> = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            for vertex in [e.u, e.v] {
                if vertex >= n {
                    return Err(Error::VertexOutOfRange { edge: i, vertex, n });
                }
            }
            if e.u == e.v {
                return Err(Error::SelfLoop {
                    edge: i,
                    vertex: e.u,
                });
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::InvalidWeight {
                    edge: i,
                    weight: e.weight,
                });
            }
            if *lineage.entry(e.parent).or_insert(e.key()) != e.key() {
                return Err(Error::InconsistentLineage { parent: e.parent });
            }
        }
        Ok(WeightedGraph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> Result<&Edge> {
        self.edges
            .get(index)
            .ok_or(Error::EdgeIndexOutOfRange { index, m: self.m() })
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// `L = sum_e w_e (d_u - d_v)(d_u - d_v)^T`.
    pub fn laplacian(&self) -> SymmetricMatrix {
        let mut l = SymmetricMatrix::zeros(self.n);
        for e in &self.edges {
            l.add_to(e.u, e.u, e.weight);
            l.add_to(e.v, e.v, e.weight);
            l.add_to(e.u, e.v, -e.weight);
            l.add_to(e.v, e.u, -e.weight);
        }
        l
    }

    /// Weighted incidence vector `sqrt(w) (d_u - d_v)`, with the positive
    /// entry on the lower-indexed endpoint.
    pub fn incidence_vector(&self, index: usize) -> Result<Vec<f64>> {
        let e = self.edge(index)?;
        let (lo, hi) = e.key();
        let s = e.weight.sqrt();
        let mut b = vec![0.0; self.n];
        b[lo] = s;
        b[hi] = -s;
        Ok(b)
    }

    /// Replaces edge `index` by `k` parallel copies of weight `w / k`, in
    /// place and in insertion order. All copies keep the edge's parent id.
    pub fn split_edge(&self, index: usize, k: usize) -> Result<Self> {
        let e = *self.edge(index)?;
        if k == 0 {
            return Err(Error::ZeroMultiplicity);
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let copy = Edge {
            weight: e.weight / k as f64,
            ..e
        };
        let mut edges = Vec::with_capacity(self.m() + k - 1);
        edges.extend_from_slice(&self.edges[..index]);
        edges.extend(std::iter::repeat_n(copy, k));
        edges.extend_from_slice(&self.edges[index + 1..]);
        Ok(WeightedGraph { n: self.n, edges })
    }

    /// Splits several edges at once; `multiplicity[i]` copies of edge `i`.
    pub fn split_edges(&self, multiplicity: &[usize]) -> Result<Self> {
        if multiplicity.len() != self.m() {
            return Err(Error::AssignmentLength {
                got: multiplicity.len(),
                m: self.m(),
            });
        }
        let mut edges = Vec::with_capacity(multiplicity.iter().sum());
        for (e, &k) in self.edges.iter().zip(multiplicity) {
            if k == 0 {
                return Err(Error::ZeroMultiplicity);
            }
            let copy = Edge {
                weight: if k == 1 {
                    e.weight
                } else {
                    e.weight / k as f64
                },
                ..*e
            };
            edges.extend(std::iter::repeat_n(copy, k));
        }
        Ok(WeightedGraph { n: self.n, edges })
    }

    /// Merges all records sharing a parent id into one edge carrying the
    /// summed weight. Output order is the order of first occurrence.
    pub fn recombine(&self) -> Self {
        let mut slot: HashMap<usize, usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        for e in &self.edges {
            match slot.get(&e.parent) {
                Some(&i) => edges[i].weight += e.weight,
                None => {
                    slot.insert(e.parent, edges.len());
                    edges.push(*e);
                }
            }
        }
        WeightedGraph { n: self.n, edges }
    }

    /// Number of distinct parent ids, i.e. the edge count after recombining.
    pub fn distinct_parents(&self) -> usize {
        let mut parents: Vec<usize> = self.edges.iter().map(|e| e.parent).collect();
        parents.sort_unstable();
        parents.dedup();
        parents.len()
    }

    /// Same vertex set, only the selected edges (in the given order).
    pub fn subgraph(&self, indices: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.m()];
        let mut edges = Vec::with_capacity(indices.len());
        for &index in indices {
            let e = self.edge(index)?;
            if std::mem::replace(&mut seen[index], true) {
                return Err(Error::DuplicateEdgeIndex { index });
            }
            edges.push(*e);
        }
        Ok(WeightedGraph { n: self.n, edges })
    }

    /// Splits the edge list by a two-coloring (`true` = first side).
    pub fn bipartition(&self, first_side: &[bool]) -> Result<(Self, Self)> {
        if first_side.len() != self.m() {
            return Err(Error::AssignmentLength {
                got: first_side.len(),
                m: self.m(),
            });
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (e, &first) in self.edges.iter().zip(first_side) {
            if first {
                a.push(*e);
            } else {
                b.push(*e);
            }
        }
        Ok((
            WeightedGraph {
                n: self.n,
                edges: a,
            },
            WeightedGraph {
                n: self.n,
                edges: b,
            },
        ))
    }

    /// Multiplies every edge weight by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive and finite, got {factor}"
            )));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: e.weight * factor,
                ..*e
            })
            .collect();
        Ok(WeightedGraph { n: self.n, edges })
    }

    /// Number of connected components (isolated vertices count).
    pub fn components(&self) -> usize {
        let mut dsu = DisjointSets::new(self.n);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        dsu.count()
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    sets: usize,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            sets: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
            self.sets -= 1;
        }
    }

    fn count(&self) -> usize {
        self.sets
    }
}
