//! Minimum spanning forests: Kruskal, the edge-deletion pass, and the
//! increasing forest process `p -> T(W, p)`.

use std::collections::{HashSet, VecDeque};
use std::io::Write;

use crate::error::{invalid, Result};
use crate::graphgen::{CapacitySource, Edge, GraphSnapshot};
use crate::metrics::Tree;
use crate::unionfind::UnionFind;

/// Spanning forest over `0..n`.
///
/// Components are labelled `0..k` in order of their smallest node, which is
/// also the component's root.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    n: usize,
    edges: Vec<Edge>,
    labels: Vec<u32>,
    roots: Vec<u32>,
}

impl Forest {
    /// Validates that `edges` is acyclic on `0..n`.
    pub fn from_edges(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut uf = UnionFind::new(n);
        for e in &edges {
            if e.u as usize >= n || e.v as usize >= n || e.u == e.v {
                return invalid(format!("edge ({}, {}) invalid for n = {n}", e.u, e.v));
            }
            if !uf.union(e.u, e.v) {
                return invalid(format!("edge ({}, {}) closes a cycle", e.u, e.v));
            }
        }
        Ok(Self::with_union_find(n, edges, &mut uf))
    }

    fn with_union_find(n: usize, edges: Vec<Edge>, uf: &mut UnionFind) -> Self {
        let labels = uf.labels();
        let mut roots = Vec::with_capacity(uf.sets());
        for (v, &l) in labels.iter().enumerate() {
            if l as usize == roots.len() {
                roots.push(v as u32);
            }
        }
        Self { n, edges, labels, roots }
    }

    pub fn empty(n: usize) -> Self {
        Self::with_union_find(n, Vec::new(), &mut UnionFind::new(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Component label of each node.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Root (smallest node) of each component.
    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    pub fn component_count(&self) -> usize {
        self.roots.len()
    }

    pub fn is_spanning_tree(&self) -> bool {
        self.roots.len() == 1
    }

    pub fn total_capacity(&self) -> f64 {
        self.edges.iter().map(|e| e.cap).sum()
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.roots.len()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Label of the largest component; ties go to the smaller label.
    pub fn largest_component(&self) -> u32 {
        let sizes = self.component_sizes();
        let mut best = 0;
        for (c, &s) in sizes.iter().enumerate() {
            if s > sizes[best] {
                best = c;
            }
        }
        best as u32
    }

    /// Edge set as sorted `(u, v)` pairs.
    pub fn edge_pairs(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = self.edges.iter().map(|e| (e.u, e.v)).collect();
        out.sort_unstable();
        out
    }

    pub fn contains_edges_of(&self, other: &Forest) -> bool {
        let mine: HashSet<u64> = self.edges.iter().map(Edge::key).collect();
        other.edges.iter().all(|e| mine.contains(&e.key()))
    }

    /// The tree spanning component `label`.
    pub fn component_tree(&self, label: u32) -> Tree {
        let nodes: Vec<u32> = (0..self.n as u32).filter(|&v| self.labels[v as usize] == label).collect();
        let edges = self.edges.iter().filter(|e| self.labels[e.u as usize] == label).copied();
        Tree::from_component(nodes, edges, self.n)
    }

    /// Tree of the largest component.
    pub fn largest_tree(&self) -> Tree {
        self.component_tree(self.largest_component())
    }

    /// Edge-list export with a trailing component column (1-based labels).
    pub fn write_edge_list<W: Write>(&self, mut out: W, p: f64, mode: &str, seed: u64) -> Result<()> {
        writeln!(out, "{} {} {} {}", self.n, p, mode, seed)?;
        for e in &self.edges {
            writeln!(out, "{}\t{}\t{}\t{}", e.u + 1, e.v + 1, e.cap, self.labels[e.u as usize] + 1)?;
        }
        Ok(())
    }
}

/// Kruskal over an edge stream already in increasing capacity order.
///
/// Repeated pairs are harmless: the later copy closes a cycle. Stops early
/// once the forest is a spanning tree, since later edges cannot enter it.
pub fn kruskal_sorted(n: usize, edges: impl IntoIterator<Item = Edge>) -> Forest {
    let mut uf = UnionFind::new(n);
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    if n > 1 {
        for e in edges {
            if uf.union(e.u, e.v) {
                tree.push(e);
                if uf.sets() == 1 {
                    break;
                }
            }
        }
    }
    Forest::with_union_find(n, tree, &mut uf)
}

/// Minimum spanning forest of `g`.
pub fn kruskal(g: &GraphSnapshot) -> Forest {
    kruskal_sorted(g.n(), g.edges().iter().copied())
}

/// The edge-deletion ("bombing") construction.
///
/// Scans edges by decreasing capacity and deletes each one whose removal
/// keeps its endpoints connected. Each test is a BFS over the surviving
/// edges, so this is `O(m (n + m))`; it exists as an independent route to
/// the same forest as [`kruskal`].
pub fn edge_deletion(g: &GraphSnapshot) -> Forest {
    let n = g.n();
    let edges = g.edges();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        incident[e.u as usize].push(k);
        incident[e.v as usize].push(k);
    }
    let mut alive = vec![true; edges.len()];
    let mut seen = vec![u32::MAX; n];
    let mut queue = VecDeque::new();

    for k in (0..edges.len()).rev() {
        let Edge { u, v, .. } = edges[k];
        alive[k] = false;
        // BFS from u looking for v; `seen` is stamped with k to avoid clearing.
        let stamp = k as u32;
        queue.clear();
        queue.push_back(u);
        seen[u as usize] = stamp;
        let mut connected = false;
        'bfs: while let Some(x) = queue.pop_front() {
            for &id in &incident[x as usize] {
                if !alive[id] {
                    continue;
                }
                let e = edges[id];
                let y = if e.u == x { e.v } else { e.u };
                if seen[y as usize] != stamp {
                    if y == v {
                        connected = true;
                        break 'bfs;
                    }
                    seen[y as usize] = stamp;
                    queue.push_back(y);
                }
            }
        }
        if !connected {
            alive[k] = true;
        }
    }

    let kept: Vec<Edge> = edges.iter().zip(&alive).filter(|(_, &a)| a).map(|(e, _)| *e).collect();
    let mut uf = UnionFind::new(n);
    for e in &kept {
        uf.union(e.u, e.v);
    }
    Forest::with_union_find(n, kept, &mut uf)
}

/// `T(W, p)`: the minimum spanning forest of `src.snapshot(p)`.
pub fn spanning_forest(src: &CapacitySource, p: f64) -> Result<Forest> {
    Ok(kruskal_sorted(src.n(), src.edges_upto(p)?))
}

/// `T(W, p)` for each `p` in `ps`, from a single pass over the sorted edges.
pub fn forest_process(src: &CapacitySource, ps: &[f64]) -> Result<Vec<Forest>> {
    if let Some(bad) = ps.iter().find(|p| !(**p >= 0.0)) {
        return invalid(format!("p values must be non-negative, got {bad}"));
    }
    if ps.windows(2).any(|w| !(w[0] < w[1])) {
        return invalid("p values must be strictly increasing");
    }
    let Some(&last) = ps.last() else {
        return Ok(Vec::new());
    };
    let n = src.n();
    let mut stream = src.edges_upto(last)?.peekable();
    let mut uf = UnionFind::new(n);
    let mut tree: Vec<Edge> = Vec::new();
    let mut out = Vec::with_capacity(ps.len());
    for &p in ps {
        while let Some(e) = stream.next_if(|e| e.cap <= p) {
            if uf.union(e.u, e.v) {
                tree.push(e);
            }
        }
        out.push(Forest::with_union_find(n, tree.clone(), &mut uf));
    }
    Ok(out)
}
