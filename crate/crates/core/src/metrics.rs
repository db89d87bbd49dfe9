//! Component statistics, exact diameters and typical distances.
//!
//! All distances are hop counts.

use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graphgen::{Adjacency, Edge, GraphSnapshot};
use crate::mst::Forest;
use crate::seed;
use crate::unionfind::UnionFind;
use crate::weights::WeightVector;

const UNSEEN: u32 = u32::MAX;

/// A single tree with local node indices `0..size`.
#[derive(Debug, Clone)]
pub struct Tree {
    /// Global label of each local node.
    nodes: Vec<u32>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Tree {
    /// Builds a tree on `size` local nodes, checking that it is one.
    pub fn from_edges(size: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if size == 0 {
            return invalid("a tree needs at least one node");
        }
        if edges.len() + 1 != size {
            return invalid(format!("{} edges cannot form a tree on {size} nodes", edges.len()));
        }
        let mut uf = UnionFind::new(size);
        for &(a, b) in edges {
            if a as usize >= size || b as usize >= size || a == b || !uf.union(a, b) {
                return invalid(format!("edge ({a}, {b}) breaks the tree"));
            }
        }
        Ok(Self::build((0..size as u32).collect(), edges.iter().copied()))
    }

    /// Tree from a forest component; `edges` carry global labels.
    pub(crate) fn from_component(nodes: Vec<u32>, edges: impl Iterator<Item = Edge>, n_global: usize) -> Self {
        let mut index = vec![UNSEEN; n_global];
        for (k, &v) in nodes.iter().enumerate() {
            index[v as usize] = k as u32;
        }
        let local: Vec<(u32, u32)> = edges.map(|e| (index[e.u as usize], index[e.v as usize])).collect();
        Self::build(nodes, local.into_iter())
    }

    fn build(nodes: Vec<u32>, edges: impl Iterator<Item = (u32, u32)> + Clone) -> Self {
        let k = nodes.len();
        let mut offsets = vec![0usize; k + 1];
        for (a, b) in edges.clone() {
            offsets[a as usize + 1] += 1;
            offsets[b as usize + 1] += 1;
        }
        for i in 0..k {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[k]];
        for (a, b) in edges {
            targets[fill[a as usize]] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        Self { nodes, offsets, targets }
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Global labels, indexed by local node.
    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// BFS distances from local node `from`.
    pub fn distances_from(&self, from: u32) -> Vec<u32> {
        let mut dist = vec![UNSEEN; self.size()];
        let mut queue = VecDeque::with_capacity(self.size());
        dist[from as usize] = 0;
        queue.push_back(from);
        while let Some(x) = queue.pop_front() {
            let d = dist[x as usize] + 1;
            for &y in self.neighbors(x) {
                if dist[y as usize] == UNSEEN {
                    dist[y as usize] = d;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Height of the tree rooted at local node `root`.
    pub fn height(&self, root: u32) -> u32 {
        self.distances_from(root).into_iter().max().unwrap_or(0)
    }

    /// Exact mean distance over all unordered pairs of distinct nodes.
    ///
    /// Each edge separates `s` nodes from `size - s`, and lies on exactly
    /// `s (size - s)` of the pair paths.
    pub fn mean_pair_distance(&self) -> Option<f64> {
        let k = self.size();
        if k < 2 {
            return None;
        }
        let (order, parent) = self.bfs_order(0);
        let mut sub = vec![1u64; k];
        let mut total = 0u128;
        for &v in order.iter().rev() {
            let p = parent[v as usize];
            if p != UNSEEN {
                let s = sub[v as usize];
                total += (s * (k as u64 - s)) as u128;
                sub[p as usize] += s;
            }
        }
        let pairs = (k as u128 * (k as u128 - 1)) / 2;
        Some(total as f64 / pairs as f64)
    }

    fn bfs_order(&self, root: u32) -> (Vec<u32>, Vec<u32>) {
        let k = self.size();
        let mut parent = vec![UNSEEN; k];
        let mut seen = vec![false; k];
        let mut order = Vec::with_capacity(k);
        seen[root as usize] = true;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &y in self.neighbors(x) {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    parent[y as usize] = x;
                    order.push(y);
                }
            }
        }
        (order, parent)
    }
}

fn farthest(dist: &[u32]) -> (u32, u32) {
    let mut best = (0u32, 0u32);
    for (v, &d) in dist.iter().enumerate() {
        if d != UNSEEN && d > best.1 {
            best = (v as u32, d);
        }
    }
    best
}

/// Exact diameter of a tree by two BFS sweeps.
pub fn tree_diameter(t: &Tree) -> u32 {
    let (a, _) = farthest(&t.distances_from(0));
    farthest(&t.distances_from(a)).1
}

/// Lowest-common-ancestor index by binary lifting.
struct Lca {
    depth: Vec<u32>,
    up: Vec<Vec<u32>>,
}

impl Lca {
    fn new(t: &Tree) -> Self {
        let k = t.size();
        let (order, mut parent) = t.bfs_order(0);
        parent[0] = 0;
        let mut depth = vec![0u32; k];
        for &v in order.iter().skip(1) {
            depth[v as usize] = depth[parent[v as usize] as usize] + 1;
        }
        let levels = (usize::BITS - k.leading_zeros()).max(1) as usize;
        let mut up = vec![parent];
        for j in 1..levels {
            let prev = &up[j - 1];
            let next: Vec<u32> = (0..k).map(|v| prev[prev[v] as usize]).collect();
            up.push(next);
        }
        Self { depth, up }
    }

    fn distance(&self, a: u32, b: u32) -> u32 {
        let (mut x, mut y) = (a, b);
        if self.depth[x as usize] < self.depth[y as usize] {
            std::mem::swap(&mut x, &mut y);
        }
        let mut diff = self.depth[x as usize] - self.depth[y as usize];
        let mut j = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                x = self.up[j][x as usize];
            }
            diff >>= 1;
            j += 1;
        }
        if x != y {
            for j in (0..self.up.len()).rev() {
                let (px, py) = (self.up[j][x as usize], self.up[j][y as usize]);
                if px != py {
                    x = px;
                    y = py;
                }
            }
            x = self.up[0][x as usize];
        }
        self.depth[a as usize] + self.depth[b as usize] - 2 * self.depth[x as usize]
    }
}

/// Distances between `pairs` uniformly drawn pairs of distinct nodes.
///
/// Pairs are drawn independently; a draw with `U = V` is redrawn.
pub fn typical_distance(t: &Tree, pairs: usize, seed: u64) -> Result<Vec<u32>> {
    let k = t.size();
    if k < 2 {
        return invalid("typical distance needs a tree with at least two nodes");
    }
    let lca = Lca::new(t);
    let mut rng = seed::rng(seed);
    let mut out = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let a = rng.random_range(0..k as u32);
        let b = loop {
            let b = rng.random_range(0..k as u32);
            if b != a {
                break b;
            }
        };
        out.push(lca.distance(a, b));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentStats {
    pub size: usize,
    pub weight: f64,
    pub surplus: usize,
    pub diameter: Option<u32>,
    pub tree_diameter: Option<u32>,
    /// Smallest node of the component.
    pub representative: u32,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StatsOptions<'a> {
    pub diameters: bool,
    /// Spanning forest whose tree diameters are reported per component.
    pub spanning: Option<&'a Forest>,
}

/// Size, weight, surplus and diameter of every component, largest first.
pub fn component_stats(g: &GraphSnapshot, v: &WeightVector) -> Vec<ComponentStats> {
    component_stats_with(
        g,
        v,
        StatsOptions {
            diameters: true,
            spanning: None,
        },
    )
}

pub fn component_stats_with(g: &GraphSnapshot, v: &WeightVector, opts: StatsOptions<'_>) -> Vec<ComponentStats> {
    let n = g.n();
    let mut uf = UnionFind::new(n);
    for e in g.edges() {
        uf.union(e.u, e.v);
    }
    let labels = uf.labels();
    let k = uf.sets();
    let mut stats: Vec<ComponentStats> = vec![
        ComponentStats {
            size: 0,
            weight: 0.0,
            surplus: 0,
            diameter: None,
            tree_diameter: None,
            representative: u32::MAX,
        };
        k
    ];
    let w = v.as_slice();
    for node in 0..n {
        let s = &mut stats[labels[node] as usize];
        s.size += 1;
        s.weight += w[node];
        if s.representative == u32::MAX {
            s.representative = node as u32;
        }
    }
    let mut edge_counts = vec![0usize; k];
    for e in g.edges() {
        edge_counts[labels[e.u as usize] as usize] += 1;
    }
    for (s, &m) in stats.iter_mut().zip(&edge_counts) {
        s.surplus = m + 1 - s.size;
    }
    if opts.diameters {
        let adj = g.adjacency();
        let mut scratch = Scratch::new(n);
        let members = group_by_label(&labels, k);
        for (s, nodes) in stats.iter_mut().zip(&members) {
            s.diameter = Some(component_diameter(adj, nodes, &mut scratch));
        }
    }
    if let Some(forest) = opts.spanning {
        for s in stats.iter_mut() {
            let label = forest.labels()[s.representative as usize];
            s.tree_diameter = Some(tree_diameter(&forest.component_tree(label)));
        }
    }
    stats.sort_by(|a, b| b.size.cmp(&a.size).then(a.representative.cmp(&b.representative)));
    stats
}

fn group_by_label(labels: &[u32], k: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); k];
    for (v, &l) in labels.iter().enumerate() {
        out[l as usize].push(v as u32);
    }
    out
}

/// Writes one CSV row per component: rank, size, weight, surplus, diameter.
pub fn write_stats_csv<W: Write>(mut out: W, stats: &[ComponentStats]) -> Result<()> {
    writeln!(out, "rank,size,weight,surplus,diameter")?;
    for (rank, s) in stats.iter().enumerate() {
        let d = s.diameter.map(|d| d.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{}", rank + 1, s.size, s.weight, s.surplus, d)?;
    }
    Ok(())
}

/// BFS buffers reused across sweeps; `dist` is reset only on touched nodes.
struct Scratch {
    dist: Vec<u32>,
    touched: Vec<u32>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![UNSEEN; n],
            touched: Vec::new(),
        }
    }

    /// BFS from `s`; returns the eccentricity and leaves distances in `dist`.
    fn bfs(&mut self, adj: &Adjacency, s: u32) -> u32 {
        for &v in &self.touched {
            self.dist[v as usize] = UNSEEN;
        }
        self.touched.clear();
        self.dist[s as usize] = 0;
        self.touched.push(s);
        let mut head = 0;
        let mut ecc = 0;
        while head < self.touched.len() {
            let x = self.touched[head];
            head += 1;
            let d = self.dist[x as usize] + 1;
            for &(y, _) in adj.neighbors(x) {
                if self.dist[y as usize] == UNSEEN {
                    self.dist[y as usize] = d;
                    ecc = d;
                    self.touched.push(y);
                }
            }
        }
        ecc
    }

    fn farthest(&self) -> u32 {
        *self.touched.last().expect("bfs visited its source")
    }
}

/// Exact diameter of the component `nodes` by iFUB.
///
/// Sweeps from a central node `u`, then scans BFS levels of `u` from the
/// outside in. Once the best eccentricity seen reaches `2 i`, no pair within
/// the first `i` levels can beat it.
fn component_diameter(adj: &Adjacency, nodes: &[u32], scratch: &mut Scratch) -> u32 {
    if nodes.len() <= 1 {
        return 0;
    }
    // double sweep from the max-degree node, then take the middle of the path
    let start = *nodes.iter().max_by_key(|&&v| (adj.degree(v), std::cmp::Reverse(v))).unwrap();
    scratch.bfs(adj, start);
    let a = scratch.farthest();
    let mut lower = scratch.bfs(adj, a);
    let b = scratch.farthest();
    let mut mid = b;
    let half = lower / 2;
    while scratch.dist[mid as usize] > lower - half {
        let d = scratch.dist[mid as usize];
        mid = adj
            .neighbors(mid)
            .iter()
            .map(|&(y, _)| y)
            .find(|&y| scratch.dist[y as usize] + 1 == d)
            .expect("BFS parent exists");
    }
    let ecc_u = scratch.bfs(adj, mid);
    lower = lower.max(ecc_u);
    let mut levels: Vec<Vec<u32>> = vec![Vec::new(); ecc_u as usize + 1];
    for &v in &scratch.touched {
        levels[scratch.dist[v as usize] as usize].push(v);
    }
    for i in (1..=ecc_u as usize).rev() {
        // pairs left unchecked lie within level i, so are at most 2i apart
        if lower as usize >= 2 * i {
            return lower;
        }
        for &x in &levels[i] {
            lower = lower.max(scratch.bfs(adj, x));
        }
    }
    lower
}

/// Largest shortest-path distance within any component of `g`.
pub fn graph_diameter(g: &GraphSnapshot) -> u32 {
    let n = g.n();
    let mut uf = UnionFind::new(n);
    for e in g.edges() {
        uf.union(e.u, e.v);
    }
    let labels = uf.labels();
    let adj = g.adjacency();
    let mut scratch = Scratch::new(n);
    group_by_label(&labels, uf.sets())
        .iter()
        .map(|nodes| component_diameter(adj, nodes, &mut scratch))
        .max()
        .unwrap_or(0)
}

/// Length (in edges) of the longest simple path in `g`.
///
/// Exhaustive depth-first search over simple paths: exponential in general,
/// intended for small or nearly-tree graphs.
pub fn longest_path(g: &GraphSnapshot) -> u32 {
    let adj = g.adjacency();
    let n = g.n();
    let mut on_path = vec![false; n];
    let mut best = 0;
    for s in 0..n as u32 {
        on_path[s as usize] = true;
        extend_path(adj, s, 0, &mut on_path, &mut best);
        on_path[s as usize] = false;
    }
    best
}

fn extend_path(adj: &Adjacency, x: u32, len: u32, on_path: &mut [bool], best: &mut u32) {
    *best = (*best).max(len);
    for &(y, _) in adj.neighbors(x) {
        if !on_path[y as usize] {
            on_path[y as usize] = true;
            extend_path(adj, y, len + 1, on_path, best);
            on_path[y as usize] = false;
        }
    }
}

/// Longest-path bound `2 h (q + 1) + q` for a connected graph with surplus
/// `q` and a spanning tree of height `h`.
pub fn excess_height_bound(h: u64, q: u64) -> u64 {
    2 * h * (q + 1) + q
}

/// Diameter bound `diam(H') + 2 lp + 2` for connected `H' ⊂ H`, where `lp`
/// is the longest path of `H` with the nodes of `H'` removed.
pub fn diam_growth_bound(diam_sub: u64, lp_rest: u64) -> u64 {
    diam_sub + 2 * lp_rest + 2
}
