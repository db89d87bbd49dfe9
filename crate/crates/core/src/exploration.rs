//! Breadth-first walk with size-biased roots, and its walk processes.
//!
//! Step `i` explores node `v(i)`; its children are its not-yet-discovered
//! neighbours in increasing capacity order. When no discovered node is left
//! to explore, the next root is drawn among undiscovered nodes with
//! probability proportional to weight. The walk `L'` starts at 1 and moves
//! by `c(i) - 1`; a component finishes exactly when `L'` reaches a new
//! minimum.

use std::collections::HashSet;
use std::io::Write;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::graphgen::{Edge, GraphSnapshot};
use crate::mst::Forest;
use crate::seed;
use crate::weights::WeightVector;

/// Weight-indexed sum tree supporting removal and proportional draws in
/// `O(log n)`.
///
/// Internal sums are recomputed from their children on every update, so
/// removals do not accumulate rounding drift.
#[derive(Debug, Clone)]
pub struct SizeBiasedSampler {
    leaves: usize,
    sums: Vec<f64>,
    remaining: usize,
}

impl SizeBiasedSampler {
    pub fn new(weights: &[f64]) -> Self {
        let leaves = weights.len().next_power_of_two().max(1);
        let mut sums = vec![0.0; 2 * leaves];
        sums[leaves..leaves + weights.len()].copy_from_slice(weights);
        for i in (1..leaves).rev() {
            sums[i] = sums[2 * i] + sums[2 * i + 1];
        }
        Self {
            leaves,
            sums,
            remaining: weights.len(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn contains(&self, i: u32) -> bool {
        self.sums[self.leaves + i as usize] > 0.0
    }

    pub fn total(&self) -> f64 {
        self.sums[1]
    }

    pub fn remove(&mut self, i: u32) {
        let mut k = self.leaves + i as usize;
        if self.sums[k] == 0.0 {
            return;
        }
        self.sums[k] = 0.0;
        self.remaining -= 1;
        while k > 1 {
            k /= 2;
            self.sums[k] = self.sums[2 * k] + self.sums[2 * k + 1];
        }
    }

    /// Draws a remaining index with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<u32> {
        if self.remaining == 0 {
            return None;
        }
        let mut x = rng.random::<f64>() * self.sums[1];
        let mut k = 1;
        while k < self.leaves {
            let left = self.sums[2 * k];
            if x < left {
                k *= 2;
            } else {
                x -= left;
                k = 2 * k + 1;
            }
        }
        let mut leaf = k - self.leaves;
        if self.sums[k] == 0.0 {
            // rounding walked off a positive leaf; take the nearest live one
            leaf = self.nearest_live(leaf);
        }
        Some(leaf as u32)
    }

    fn nearest_live(&self, leaf: usize) -> usize {
        let live = |i: usize| self.sums[self.leaves + i] > 0.0;
        (0..leaf).rev().find(|&i| live(i)).or_else(|| (leaf..self.leaves).find(|&i| live(i))).expect("sampler is non-empty")
    }
}

/// Draws `j` outside `excluded` with probability `w_j / sum_{k not excluded} w_k`.
pub fn size_biased_draw(v: &WeightVector, excluded: &HashSet<u32>, seed: u64) -> Result<u32> {
    let mut sampler = SizeBiasedSampler::new(v.as_slice());
    for &x in excluded {
        if (x as usize) < v.n() {
            sampler.remove(x);
        }
    }
    if sampler.remaining() == 0 {
        return invalid("every node is excluded");
    }
    let mut rng = seed::rng(seed);
    Ok(sampler.sample(&mut rng).expect("non-empty"))
}

/// Record of one breadth-first walk.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationTrace {
    /// `v(1), ..., v(n)`, stored 0-based by step.
    pub order: Vec<u32>,
    /// `c(i)` for each step.
    pub children: Vec<u32>,
    /// `L'_0, ..., L'_n`.
    pub walk: Vec<i64>,
    /// `L_0, ..., L_n`.
    pub reflected: Vec<i64>,
    /// 0-based steps at which a new root was drawn.
    pub component_starts: Vec<usize>,
    /// Exploration-forest parent of each node, indexed by node.
    pub parent: Vec<Option<u32>>,
    /// Capacity of the edge to the parent, indexed by node (0 for roots).
    parent_cap: Vec<f64>,
}

/// Runs the breadth-first walk on `g`.
pub fn bfw(g: &GraphSnapshot, v: &WeightVector, seed: u64) -> Result<ExplorationTrace> {
    let n = g.n();
    if v.n() != n {
        return invalid(format!("graph has {n} nodes but weight vector has {}", v.n()));
    }
    let adj = g.adjacency();
    let mut rng = seed::rng(seed);
    let mut sampler = SizeBiasedSampler::new(v.as_slice());
    let mut discovered = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut children = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    let mut parent_cap = vec![0.0; n];
    let mut component_starts = Vec::new();

    for step in 0..n {
        if step == order.len() {
            let root = sampler.sample(&mut rng).ok_or_else(|| Error::Invariant("sampler exhausted early".into()))?;
            sampler.remove(root);
            discovered[root as usize] = true;
            order.push(root);
            component_starts.push(step);
        }
        let x = order[step];
        let mut c = 0;
        for &(y, cap) in adj.neighbors(x) {
            if !discovered[y as usize] {
                discovered[y as usize] = true;
                sampler.remove(y);
                parent[y as usize] = Some(x);
                parent_cap[y as usize] = cap;
                order.push(y);
                c += 1;
            }
        }
        children.push(c);
    }

    let (walk, reflected) = walks(&children);
    Ok(ExplorationTrace {
        order,
        children,
        walk,
        reflected,
        component_starts,
        parent,
        parent_cap,
    })
}

/// Replays `L'` and `L` from the child counts.
pub fn walks(children: &[u32]) -> (Vec<i64>, Vec<i64>) {
    let mut walk = Vec::with_capacity(children.len() + 1);
    let mut reflected = Vec::with_capacity(children.len() + 1);
    walk.push(1i64);
    reflected.push(1i64);
    for &c in children {
        let step = c as i64 - 1;
        walk.push(walk.last().unwrap() + step);
        reflected.push((reflected.last().unwrap() + step).max(1));
    }
    (walk, reflected)
}

impl ExplorationTrace {
    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Component sizes in discovery order, from the bookkeeping.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.component_starts.len());
        for (k, &s) in self.component_starts.iter().enumerate() {
            let end = self.component_starts.get(k + 1).copied().unwrap_or(self.n());
            out.push(end - s);
        }
        out
    }

    /// The exploration forest (parent-child edges).
    pub fn forest(&self) -> Result<Forest> {
        let edges = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(y, p)| p.map(|x| Edge::new(x, y as u32, self.parent_cap[y])))
            .collect();
        Forest::from_edges(self.n(), edges)
    }

    /// Checks the trace's structural invariants.
    pub fn verify(&self) -> Result<()> {
        let n = self.n();
        let mut seen = vec![false; n];
        for &v in &self.order {
            if v as usize >= n || std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::Invariant("order is not a permutation".into()));
            }
        }
        let (walk, reflected) = walks(&self.children);
        if walk != self.walk || reflected != self.reflected {
            return Err(Error::Invariant("walk does not replay from child counts".into()));
        }
        if self.component_sizes().iter().sum::<usize>() != n {
            return Err(Error::Invariant("component sizes do not sum to n".into()));
        }
        Ok(())
    }

    /// Writes columns `step v c Lprime L new_component`, 1-based step and node.
    pub fn write_columns<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step\tv\tc\tLprime\tL\tnew_component")?;
        let mut starts = self.component_starts.iter().peekable();
        for i in 0..self.n() {
            let new = starts.next_if(|&&s| s == i).is_some();
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                i + 1,
                self.order[i] + 1,
                self.children[i],
                self.walk[i + 1],
                self.reflected[i + 1],
                new as u8
            )?;
        }
        Ok(())
    }
}

/// Components recovered from `L'` alone, as 1-based `(start step, size)`.
///
/// A component ends at each step where the walk hits a new strict minimum.
/// The result is checked against the trace's own bookkeeping.
pub fn excursion_components(t: &ExplorationTrace) -> Result<Vec<(usize, usize)>> {
    if t.walk.len() != t.n() + 1 {
        return Err(Error::Invariant("walk length must be n + 1".into()));
    }
    let mut out = Vec::new();
    let mut running_min = t.walk[0];
    let mut start = 1;
    for i in 1..t.walk.len() {
        if t.walk[i] < running_min {
            running_min = t.walk[i];
            out.push((start, i + 1 - start));
            start = i + 1;
        }
    }
    if start != t.walk.len() {
        return Err(Error::Invariant("walk ended inside an excursion".into()));
    }
    let expected: Vec<(usize, usize)> = t.component_starts.iter().map(|s| s + 1).zip(t.component_sizes()).collect();
    if out != expected {
        return Err(Error::Invariant("excursions disagree with recorded component starts".into()));
    }
    Ok(out)
}
