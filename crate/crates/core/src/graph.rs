// SPDX-License-Identifier: Apache-2.0

//! Undirected simple graphs and the graph constructions of the model: the
//! opinion graph, the social graph for update and the profile.
//!
//! Vertices are 0-based in memory. Every external format (config files,
//! traces, reports) uses 1-based labels; conversion happens at the
//! serialization boundary.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{InteractionMode, OpinionState};
use crate::stochastic::ScheduleDraw;

/// Undirected simple graph on `0..n`, stored as a symmetric adjacency bit
/// matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SimpleGraph {
    n: usize,
    /// `u64` words per row.
    words: usize,
    bits: Vec<u64>,
    edge_count: usize,
}

impl fmt::Debug for SimpleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimpleGraph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// Set bits of a word sequence, as absolute indices.
fn set_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w * 64 + b)
        })
    })
}

impl SimpleGraph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; n * words],
            edge_count: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.insert_edge(i, j);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 1..n {
            g.insert_edge(i - 1, i);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n >= 3 {
            g.insert_edge(0, n - 1);
        }
        g
    }

    /// Builds a graph from 0-based edges, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            if i == j {
                return Err(Error::Graph(format!("loop at vertex {}", i + 1)));
            }
            if i >= n || j >= n {
                return Err(Error::Graph(format!(
                    "edge {{{}, {}}} has an endpoint outside [{n}]",
                    i + 1,
                    j + 1
                )));
            }
            if !g.insert_edge(i, j) {
                return Err(Error::Graph(format!(
                    "duplicate edge {{{}, {}}}",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(g)
    }

    /// As [`from_edges`](Self::from_edges) with 1-based labels.
    pub fn from_one_based(n: usize, edges: &[[usize; 2]]) -> Result<Self> {
        let mut zero = Vec::with_capacity(edges.len());
        for &[i, j] in edges {
            if i == 0 || j == 0 {
                return Err(Error::Graph("vertex labels are 1-based; found 0".into()));
            }
            zero.push((i - 1, j - 1));
        }
        Self::from_edges(n, &zero)
    }

    pub fn to_one_based(&self) -> Vec<[usize; 2]> {
        self.edges().map(|(i, j)| [i + 1, j + 1]).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Neighbours of `i`, ascending.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        set_bits(self.row(i))
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            let from = (i + 1) / 64;
            set_bits(&self.row(i)[from..])
                .map(move |j| j + from * 64)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j
            && i < self.n
            && j < self.n
            && self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Adds `{i, j}`; returns false when it was already present.
    pub(crate) fn insert_edge(&mut self, i: usize, j: usize) -> bool {
        debug_assert!(i != j && i < self.n && j < self.n);
        if self.has_edge(i, j) {
            return false;
        }
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
        self.edge_count += 1;
        true
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|i| self.neighbors(i).collect()).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|w| w.count_ones() as usize).sum())
            .collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && connected_components(self).components.len() == 1
    }

    pub fn is_subgraph_of(&self, other: &SimpleGraph) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Subgraph induced on `vertices`, relabelled `0..vertices.len()` in the
    /// given order.
    pub fn induced(&self, vertices: &[usize]) -> SimpleGraph {
        let mut g = SimpleGraph::empty(vertices.len());
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    g.insert_edge(a, b);
                }
            }
        }
        g
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> SimpleGraph {
        let mut g = SimpleGraph::empty(self.n);
        for (i, j) in self.edges() {
            g.insert_edge(perm[i], perm[j]);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    pub assignment: Vec<usize>,
    pub components: Vec<Vec<usize>>,
}

/// Opinion graph: `{i, j}` is an edge iff `i != j` and `|x_i - x_j| <= epsilon`.
pub fn build_opinion_graph(state: &OpinionState, epsilon: f64) -> SimpleGraph {
    let n = state.n();
    let mut g = SimpleGraph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if state.dist(i, j) <= epsilon {
                g.insert_edge(i, j);
            }
        }
    }
    g
}

/// Social graph for update: the social graph itself in group mode, and the
/// drawn matching's edges that are social edges in pair mode.
pub fn build_update_graph(
    social: &SimpleGraph,
    draw: &ScheduleDraw,
    mode: InteractionMode,
) -> Result<SimpleGraph> {
    match (mode, draw) {
        (InteractionMode::Group, ScheduleDraw::Group(_)) => Ok(social.clone()),
        (InteractionMode::Pair, ScheduleDraw::Pair(matching)) => {
            if !is_vertex_disjoint(matching) {
                return Err(Error::InvalidSchedule(
                    "pair-mode draw is not a matching".to_string(),
                ));
            }
            let mut g = SimpleGraph::empty(social.n());
            for &(i, j) in matching {
                if social.has_edge(i, j) {
                    g.insert_edge(i, j);
                }
            }
            Ok(g)
        }
        _ => Err(Error::InvalidSchedule(format!(
            "draw kind does not match the {mode:?} interaction mode"
        ))),
    }
}

/// Edge intersection of the social graph for update and the opinion graph.
pub fn profile(update_graph: &SimpleGraph, opinion_graph: &SimpleGraph) -> Result<SimpleGraph> {
    if update_graph.n != opinion_graph.n {
        return Err(Error::shape(format!(
            "profile of graphs on {} and {} vertices",
            update_graph.n, opinion_graph.n
        )));
    }
    let bits: Vec<u64> = update_graph
        .bits
        .iter()
        .zip(&opinion_graph.bits)
        .map(|(a, b)| a & b)
        .collect();
    let edge_count = bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2;
    Ok(SimpleGraph {
        n: update_graph.n,
        words: update_graph.words,
        bits,
        edge_count,
    })
}

pub fn connected_components(g: &SimpleGraph) -> ComponentPartition {
    let adj = g.adjacency();
    let mut assignment = vec![usize::MAX; g.n];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..g.n {
        if assignment[start] != usize::MAX {
            continue;
        }
        let label = components.len();
        let mut members = vec![start];
        assignment[start] = label;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if assignment[w] == usize::MAX {
                    assignment[w] = label;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    ComponentPartition {
        assignment,
        components,
    }
}

/// Largest pairwise opinion distance among `component`.
pub fn component_diameter(component: &[usize], state: &OpinionState) -> f64 {
    let mut diam: f64 = 0.0;
    for (k, &i) in component.iter().enumerate() {
        for &j in &component[k + 1..] {
            diam = diam.max(state.dist(i, j));
        }
    }
    diam
}

/// Every pair of opinions in `component` lies within `delta`.
pub fn is_delta_trivial(component: &[usize], state: &OpinionState, delta: f64) -> bool {
    component.iter().enumerate().all(|(k, &i)| {
        component[k + 1..]
            .iter()
            .all(|&j| state.dist(i, j) <= delta)
    })
}

/// `edges` is a set of pairwise vertex-disjoint, loop-free edges of `host`.
pub fn is_matching(edges: &[(usize, usize)], host: &SimpleGraph) -> bool {
    is_vertex_disjoint(edges) && edges.iter().all(|&(i, j)| host.has_edge(i, j))
}

fn is_vertex_disjoint(edges: &[(usize, usize)]) -> bool {
    let mut seen = BTreeSet::new();
    edges
        .iter()
        .all(|&(i, j)| i != j && seen.insert(i) && seen.insert(j))
}
