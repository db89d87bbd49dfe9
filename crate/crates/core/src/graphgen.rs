//! Edge capacities and the monotone graph process `G(W, p)`.
//!
//! Two sources share one contract: `snapshot(p)` returns the edges of
//! capacity at most `p`, and snapshots are nested in `p`.
//!
//! * [`CapacityMode::Exact`] gives every pair `{i, j}` an independent
//!   `Exp(w_i w_j)` capacity. Capacities are computed on demand from a
//!   counter-based hash of `(seed, i, j)`, so nothing of size `n^2` is stored,
//!   but every snapshot still scans all pairs.
//! * [`CapacityMode::Poissonized`] runs a Poisson process of arrivals with
//!   rate `ell_n^2 / 2` on `(0, p_max]`, each arrival joining two endpoints
//!   drawn independently with probability `w_i / ell_n`. Pair `{i, j}` then
//!   receives arrivals at rate `w_i w_j`, so its first arrival time is an
//!   `Exp(w_i w_j)` capacity truncated at `p_max`. Arrivals are produced in
//!   time order from the seed and never stored.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par::{self, Parallelism};
use crate::seed;
use crate::weights::{WeightStats, WeightVector};

pub const DEFAULT_DENSE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityMode {
    Exact,
    Poissonized,
}

impl CapacityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CapacityMode::Exact => "exact",
            CapacityMode::Poissonized => "poissonized",
        }
    }
}

impl std::str::FromStr for CapacityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(CapacityMode::Exact),
            "poissonized" => Ok(CapacityMode::Poissonized),
            other => invalid(format!("unknown capacity mode {other:?}")),
        }
    }
}

/// Undirected edge `u < v` with its capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub cap: f64,
}

impl Edge {
    pub fn new(a: u32, b: u32, cap: f64) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Edge { u, v, cap }
    }

    /// Capacity order with ties broken by `(u, v)`.
    #[inline]
    pub fn order(&self, other: &Edge) -> Ordering {
        self.cap
            .total_cmp(&other.cap)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }

    #[inline]
    pub fn key(&self) -> u64 {
        pair_key(self.u, self.v)
    }
}

#[inline]
pub(crate) fn pair_key(u: u32, v: u32) -> u64 {
    ((u as u64) << 32) | v as u64
}

/// Coupled source of edge capacities.
#[derive(Debug, Clone)]
pub struct CapacitySource {
    weights: WeightVector,
    seed: u64,
    kind: SourceKind,
}

#[derive(Debug, Clone)]
enum SourceKind {
    Exact,
    Poissonized {
        p_max: f64,
        rate: f64,
        endpoints: WeightedAliasIndex<f64>,
    },
}

impl CapacitySource {
    pub fn exact_capacities(v: &WeightVector, seed: u64) -> Result<Self> {
        Self::exact_capacities_with_limit(v, seed, DEFAULT_DENSE_LIMIT)
    }

    pub fn exact_capacities_with_limit(v: &WeightVector, seed: u64, dense_limit: usize) -> Result<Self> {
        if v.n() > dense_limit {
            return Err(Error::CapacityLimit { n: v.n(), limit: dense_limit });
        }
        if v.n() > u32::MAX as usize {
            return invalid("too many nodes");
        }
        Ok(Self {
            weights: v.clone(),
            seed,
            kind: SourceKind::Exact,
        })
    }

    pub fn poissonized(v: &WeightVector, p_max: f64, seed: u64) -> Result<Self> {
        if !(p_max > 0.0 && p_max.is_finite()) {
            return invalid(format!("p_max must be positive and finite, got {p_max}"));
        }
        if v.n() > u32::MAX as usize {
            return invalid("too many nodes");
        }
        let ell = v.ell_n();
        let endpoints = WeightedAliasIndex::new(v.as_slice().to_vec())
            .map_err(|e| Error::InvalidArgument(format!("alias table: {e}")))?;
        Ok(Self {
            weights: v.clone(),
            seed,
            kind: SourceKind::Poissonized {
                p_max,
                rate: ell * ell / 2.0,
                endpoints,
            },
        })
    }

    pub fn mode(&self) -> CapacityMode {
        match self.kind {
            SourceKind::Exact => CapacityMode::Exact,
            SourceKind::Poissonized { .. } => CapacityMode::Poissonized,
        }
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest `p` a snapshot may be taken at.
    pub fn p_max(&self) -> f64 {
        match self.kind {
            SourceKind::Exact => f64::INFINITY,
            SourceKind::Poissonized { p_max, .. } => p_max,
        }
    }

    /// Number of stored capacity entries in exact mode, `n (n - 1) / 2`.
    pub fn pair_count(&self) -> usize {
        let n = self.n();
        n * n.saturating_sub(1) / 2
    }

    /// Exact-mode capacity `E_{ij}`; `None` for `i == j` or in poissonized mode.
    pub fn capacity(&self, i: u32, j: u32) -> Option<f64> {
        match self.kind {
            SourceKind::Exact if i != j => {
                let (u, v) = if i < j { (i, j) } else { (j, i) };
                Some(self.exact_cap(u, v))
            }
            _ => None,
        }
    }

    #[inline]
    fn exact_cap(&self, u: u32, v: u32) -> f64 {
        let w = self.weights.as_slice();
        let uni = seed::counter_uniform(self.seed, u as u64, v as u64);
        -uni.ln() / (w[u as usize] * w[v as usize])
    }

    /// Raw arrivals with time at most `p`, in time order.
    ///
    /// Includes self-loops and repeated pairs; a repeat always arrives later
    /// than the first occurrence. Exact sources have no arrivals.
    pub fn arrivals(&self, p: f64) -> Result<Arrivals<'_>> {
        match &self.kind {
            SourceKind::Exact => invalid("exact sources have no arrival stream"),
            SourceKind::Poissonized { p_max, rate, endpoints } => {
                self.check_p(p)?;
                Ok(Arrivals {
                    rng: seed::rng(self.seed),
                    rate: *rate,
                    time: 0.0,
                    limit: p.min(*p_max),
                    endpoints,
                })
            }
        }
    }

    fn check_p(&self, p: f64) -> Result<()> {
        if p.is_nan() || p < 0.0 {
            return invalid(format!("p must be non-negative, got {p}"));
        }
        if p > self.p_max() {
            return invalid(format!("p = {p} exceeds the source range p_max = {}", self.p_max()));
        }
        Ok(())
    }

    /// Edges of capacity at most `p` in increasing capacity order.
    ///
    /// Self-loops are dropped. In poissonized mode a pair may repeat; callers
    /// that need a simple graph use [`CapacitySource::snapshot`].
    pub fn edges_upto(&self, p: f64) -> Result<EdgeStream<'_>> {
        self.check_p(p)?;
        match self.kind {
            SourceKind::Exact => {
                let mut edges = self.exact_edges(p, Parallelism::Sequential);
                edges.sort_unstable_by(Edge::order);
                Ok(EdgeStream::Sorted(edges.into_iter()))
            }
            SourceKind::Poissonized { .. } => Ok(EdgeStream::Arrivals(self.arrivals(p)?)),
        }
    }

    fn exact_edges(&self, p: f64, mode: Parallelism) -> Vec<Edge> {
        if p == 0.0 {
            return Vec::new();
        }
        let w = self.weights.as_slice();
        let n = self.n();
        let rows = par::map_indexed(n, mode, |u| {
            let mut row = Vec::new();
            let wu = w[u];
            for v in u + 1..n {
                // E <= p  <=>  u >= exp(-w_u w_v p)
                let uni = seed::counter_uniform(self.seed, u as u64, v as u64);
                // slack keeps boundary draws consistent with `capacity`
                if uni >= (-wu * w[v] * p).exp() * (1.0 - 1e-12) {
                    let cap = -uni.ln() / (wu * w[v]);
                    if cap <= p {
                        row.push(Edge { u: u as u32, v: v as u32, cap });
                    }
                }
            }
            row
        });
        rows.into_iter().flatten().collect()
    }

    pub fn snapshot(&self, p: f64) -> Result<GraphSnapshot> {
        self.snapshot_with(p, Parallelism::Sequential)
    }

    /// As [`CapacitySource::snapshot`]; exact mode scans rows with `mode`.
    pub fn snapshot_with(&self, p: f64, mode: Parallelism) -> Result<GraphSnapshot> {
        self.check_p(p)?;
        let edges = match self.kind {
            SourceKind::Exact => self.exact_edges(p, mode),
            SourceKind::Poissonized { .. } => {
                let mut seen = HashSet::new();
                let mut edges = Vec::new();
                for a in self.arrivals(p)? {
                    if a.u != a.v {
                        let e = Edge::new(a.u, a.v, a.time);
                        if seen.insert(e.key()) {
                            edges.push(e);
                        }
                    }
                }
                edges
            }
        };
        Ok(GraphSnapshot::from_sorted_unchecked(self.n(), p, edges))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub u: u32,
    pub v: u32,
    pub time: f64,
}

/// Time-ordered arrivals of a poissonized source.
#[derive(Debug, Clone)]
pub struct Arrivals<'a> {
    rng: ChaCha8Rng,
    rate: f64,
    time: f64,
    limit: f64,
    endpoints: &'a WeightedAliasIndex<f64>,
}

impl Iterator for Arrivals<'_> {
    type Item = Arrival;

    fn next(&mut self) -> Option<Arrival> {
        // Exponential gap by inversion; 1 - U lies in (0, 1].
        let u: f64 = self.rng.random();
        self.time += -(1.0 - u).ln() / self.rate;
        if self.time > self.limit {
            self.time = f64::INFINITY;
            return None;
        }
        let a = self.endpoints.sample(&mut self.rng) as u32;
        let b = self.endpoints.sample(&mut self.rng) as u32;
        Some(Arrival { u: a, v: b, time: self.time })
    }
}

#[allow(clippy::large_enum_variant)]
pub enum EdgeStream<'a> {
    Sorted(std::vec::IntoIter<Edge>),
    Arrivals(Arrivals<'a>),
}

impl Iterator for EdgeStream<'_> {
    type Item = Edge;

    fn next(&mut self) -> Option<Edge> {
        match self {
            EdgeStream::Sorted(it) => it.next(),
            EdgeStream::Arrivals(it) => it.find(|a| a.u != a.v).map(|a| Edge::new(a.u, a.v, a.time)),
        }
    }
}

/// Critical-window parameter `p_f = 1/ell_n + f / ell_n^{4/3}`.
pub fn p_critical(stats: &WeightStats, f: f64) -> Result<f64> {
    let ell = stats.ell_n;
    let p = 1.0 / ell + f / ell.powf(4.0 / 3.0);
    if !(p >= 0.0) {
        return invalid(format!("f = {f} gives a negative p"));
    }
    Ok(p)
}

/// Simple graph on `0..n` with the edges of capacity at most `p`.
#[derive(Debug)]
pub struct GraphSnapshot {
    n: usize,
    p: f64,
    edges: Vec<Edge>,
    adjacency: OnceLock<Adjacency>,
}

impl Clone for GraphSnapshot {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            p: self.p,
            edges: self.edges.clone(),
            adjacency: OnceLock::new(),
        }
    }
}

impl PartialEq for GraphSnapshot {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.p == other.p && self.edges == other.edges
    }
}

/// Compressed adjacency; each node's neighbors are in capacity order.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<(u32, f64)>,
}

impl Adjacency {
    pub fn build(n: usize, edges: &[Edge]) -> Self {
        let mut deg = vec![0usize; n + 1];
        for e in edges {
            deg[e.u as usize + 1] += 1;
            deg[e.v as usize + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let offsets = deg;
        let mut fill = offsets.clone();
        let mut targets = vec![(0u32, 0.0f64); offsets[n]];
        for e in edges {
            targets[fill[e.u as usize]] = (e.v, e.cap);
            fill[e.u as usize] += 1;
            targets[fill[e.v as usize]] = (e.u, e.cap);
            fill[e.v as usize] += 1;
        }
        for i in 0..n {
            targets[offsets[i]..offsets[i + 1]].sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        }
        Self { offsets, targets }
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[(u32, f64)] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }
}

impl GraphSnapshot {
    /// Builds a snapshot from explicit edges, validating the invariants.
    pub fn from_edges(n: usize, p: f64, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for e in edges {
            let e = Edge::new(e.u, e.v, e.cap);
            if e.u == e.v {
                return invalid(format!("self-loop at node {}", e.u));
            }
            if e.v as usize >= n {
                return invalid(format!("edge ({}, {}) out of range for n = {n}", e.u, e.v));
            }
            if !(e.cap <= p) {
                return invalid(format!("edge capacity {} exceeds p = {p}", e.cap));
            }
            if !seen.insert(e.key()) {
                return invalid(format!("duplicate edge ({}, {})", e.u, e.v));
            }
            out.push(e);
        }
        Ok(Self::from_sorted_unchecked(n, p, out))
    }

    /// Sorts `edges` into capacity order; caller guarantees validity.
    pub(crate) fn from_sorted_unchecked(n: usize, p: f64, mut edges: Vec<Edge>) -> Self {
        edges.sort_unstable_by(Edge::order);
        Self {
            n,
            p,
            edges,
            adjacency: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Edges in increasing capacity order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacency(&self) -> &Adjacency {
        self.adjacency.get_or_init(|| Adjacency::build(self.n, &self.edges))
    }

    /// The sub-snapshot at a smaller threshold.
    pub fn threshold(&self, p: f64) -> Result<Self> {
        if p.is_nan() || p < 0.0 || p > self.p {
            return invalid(format!("threshold {p} outside [0, {}]", self.p));
        }
        let keep = self.edges.partition_point(|e| e.cap <= p);
        Ok(Self::from_sorted_unchecked(self.n, p, self.edges[..keep].to_vec()))
    }

    /// The induced subgraph on `nodes`, relabelled `0..nodes.len()` in the given order.
    pub fn induced(&self, nodes: &[u32]) -> Self {
        let mut index = vec![u32::MAX; self.n];
        for (k, &v) in nodes.iter().enumerate() {
            index[v as usize] = k as u32;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| index[e.u as usize] != u32::MAX && index[e.v as usize] != u32::MAX)
            .map(|e| Edge::new(index[e.u as usize], index[e.v as usize], e.cap))
            .collect();
        Self::from_sorted_unchecked(nodes.len(), self.p, edges)
    }

    /// Same edge set with i.i.d. uniform `(0, 1)` capacities; `p` becomes 1.
    ///
    /// Duplicated draws are redrawn, so capacities are pairwise distinct.
    pub fn iid_capacities_on(&self, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge { cap: uniform_open(&mut rng), ..*e })
            .collect();
        loop {
            edges.sort_unstable_by(Edge::order);
            let mut clash = false;
            for i in 1..edges.len() {
                if edges[i].cap == edges[i - 1].cap {
                    edges[i].cap = uniform_open(&mut rng);
                    clash = true;
                }
            }
            if !clash {
                break;
            }
        }
        Self {
            n: self.n,
            p: 1.0,
            edges,
            adjacency: OnceLock::new(),
        }
    }

    /// Writes the edge list: header `n p mode seed`, then `i<TAB>j<TAB>capacity`
    /// per edge with 1-based labels.
    pub fn write_edge_list<W: Write>(&self, mut out: W, mode: &str, seed: u64) -> Result<()> {
        writeln!(out, "{} {} {} {}", self.n, self.p, mode, seed)?;
        for e in &self.edges {
            writeln!(out, "{}\t{}\t{}", e.u + 1, e.v + 1, e.cap)?;
        }
        Ok(())
    }

    /// Parses [`GraphSnapshot::write_edge_list`] output. Returns the snapshot,
    /// mode label and seed.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<(Self, String, u64)> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::InvalidArgument("empty edge list".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return invalid(format!("bad edge-list header {header:?}"));
        }
        let bad = |what: &str| Error::InvalidArgument(format!("bad {what} in edge-list header"));
        let n: usize = fields[0].parse().map_err(|_| bad("n"))?;
        let p: f64 = fields[1].parse().map_err(|_| bad("p"))?;
        let mode = fields[2].to_string();
        let seed: u64 = fields[3].parse().map_err(|_| bad("seed"))?;
        let mut edges = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 3 {
                return invalid(format!("bad edge line {line:?}"));
            }
            let parse_node = |s: &str| -> Result<u32> {
                let x: u32 = s.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad node {s:?}")))?;
                if x == 0 {
                    return invalid("node labels are 1-based");
                }
                Ok(x - 1)
            };
            let cap: f64 = cols[2].trim().parse().map_err(|_| Error::InvalidArgument(format!("bad capacity in {line:?}")))?;
            edges.push(Edge::new(parse_node(cols[0])?, parse_node(cols[1])?, cap));
        }
        Ok((Self::from_edges(n, p, edges)?, mode, seed))
    }
}

fn uniform_open<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
