//! Poisson Galton-Watson trees coupled to the exploration, the red-colouring
//! pruning, i.i.d. edge cuts and height tails.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graphgen::Edge;
use crate::mst::Forest;
use crate::par::{self, Parallelism};
use crate::seed;
use crate::weights::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GwNode {
    pub parent: Option<u32>,
    pub label: u32,
    pub children: u32,
    pub depth: u32,
}

/// Galton-Watson tree with nodes in breadth-first order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwTree {
    pub nodes: Vec<GwNode>,
    pub height: u32,
    /// A size or height cap stopped generation early.
    pub truncated: bool,
}

impl GwTree {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GwCaps {
    pub max_size: usize,
    pub max_height: u32,
}

impl Default for GwCaps {
    fn default() -> Self {
        Self {
            max_size: 1_000_000,
            max_height: 10_000,
        }
    }
}

/// Poisson parameter `w_root * remaining_weight * p` for a node's offspring.
pub fn offspring_mean(w_root: f64, remaining_weight: f64, p: f64) -> f64 {
    w_root * remaining_weight * p
}

#[inline]
fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

/// Grows a Galton-Watson tree breadth-first.
///
/// Each node first receives a label from `label`, then a
/// `Poisson(mean(label))` number of children.
pub fn sample_gw<M, L>(mean: M, mut label: L, caps: GwCaps, seed: u64) -> GwTree
where
    M: Fn(u32) -> f64,
    L: FnMut(&mut ChaCha8Rng) -> u32,
{
    let mut rng = seed::rng(seed);
    let mut nodes = vec![GwNode {
        parent: None,
        label: label(&mut rng),
        children: 0,
        depth: 0,
    }];
    let mut truncated = false;
    let mut next = 0;
    while next < nodes.len() {
        let GwNode { label: l, depth, .. } = nodes[next];
        let k = poisson(mean(l), &mut rng);
        if k > 0 {
            if depth + 1 > caps.max_height || nodes.len() as u64 + k > caps.max_size as u64 {
                truncated = true;
                break;
            }
            nodes[next].children = k as u32;
            for _ in 0..k {
                let child_label = label(&mut rng);
                nodes.push(GwNode {
                    parent: Some(next as u32),
                    label: child_label,
                    children: 0,
                    depth: depth + 1,
                });
            }
        }
        next += 1;
    }
    let height = nodes.last().map_or(0, |x| x.depth);
    GwTree { nodes, height, truncated }
}

/// Labels drawn from the size-biased law over the nodes outside an excluded
/// set, with offspring means `w_r (ell_n - excluded weight) p`.
#[derive(Debug, Clone)]
pub struct CoupledOffspring {
    weights: Vec<f64>,
    allowed: Vec<u32>,
    alias: WeightedAliasIndex<f64>,
    remaining_weight: f64,
    p: f64,
}

impl CoupledOffspring {
    pub fn new(v: &WeightVector, excluded: &[u32], p: f64) -> Result<Self> {
        let mut mask = vec![true; v.n()];
        for &x in excluded {
            if let Some(m) = mask.get_mut(x as usize) {
                *m = false;
            }
        }
        let allowed: Vec<u32> = (0..v.n() as u32).filter(|&i| mask[i as usize]).collect();
        if allowed.is_empty() {
            return invalid("every node is excluded");
        }
        let w = v.as_slice();
        let remaining_weight = allowed.iter().map(|&i| w[i as usize]).sum();
        let alias = WeightedAliasIndex::new(allowed.iter().map(|&i| w[i as usize]).collect())
            .map_err(|e| Error::InvalidArgument(format!("alias table: {e}")))?;
        Ok(Self {
            weights: w.to_vec(),
            allowed,
            alias,
            remaining_weight,
            p,
        })
    }

    pub fn mean(&self, label: u32) -> f64 {
        offspring_mean(self.weights[label as usize], self.remaining_weight, self.p)
    }

    pub fn label<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.allowed[self.alias.sample(rng)]
    }

    pub fn sample(&self, caps: GwCaps, seed: u64) -> GwTree {
        sample_gw(|l| self.mean(l), |rng| self.label(rng), caps, seed)
    }
}

/// Keeps the red subtree: in breadth-first order a node turns red when its
/// parent is red and no earlier red node carries its label.
pub fn color_prune(t: &GwTree) -> GwTree {
    let max_label = t.nodes.iter().map(|x| x.label).max().unwrap_or(0) as usize;
    let mut red_label = vec![false; max_label + 1];
    let mut new_index = vec![u32::MAX; t.size()];
    let mut nodes: Vec<GwNode> = Vec::new();
    for (i, x) in t.nodes.iter().enumerate() {
        let parent = match x.parent {
            None => None,
            Some(p) => match new_index[p as usize] {
                u32::MAX => continue,
                q => Some(q),
            },
        };
        if red_label[x.label as usize] {
            continue;
        }
        red_label[x.label as usize] = true;
        new_index[i] = nodes.len() as u32;
        if let Some(q) = parent {
            nodes[q as usize].children += 1;
        }
        nodes.push(GwNode {
            parent,
            label: x.label,
            children: 0,
            depth: x.depth,
        });
    }
    let height = nodes.iter().map(|x| x.depth).max().unwrap_or(0);
    GwTree {
        nodes,
        height,
        truncated: t.truncated,
    }
}

/// Cut probability `q = 2 f / ell_n^{1/3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutConfig {
    pub f: f64,
    pub ell_n: f64,
    pub q: f64,
}

impl CutConfig {
    pub fn new(f: f64, ell_n: f64) -> Result<Self> {
        let q = 2.0 * f / ell_n.cbrt();
        if !(0.0..=1.0).contains(&q) {
            return invalid(format!("cut probability {q} outside [0, 1]"));
        }
        Ok(Self { f, ell_n, q })
    }

    /// A config with the given probability directly.
    pub fn with_probability(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return invalid(format!("cut probability {q} outside [0, 1]"));
        }
        Ok(Self {
            f: f64::NAN,
            ell_n: f64::NAN,
            q,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutOutcome {
    pub forest: Forest,
    pub cuts: usize,
}

/// Removes each forest edge independently with probability `cfg.q`.
pub fn edge_cut_prune(f: &Forest, cfg: &CutConfig, seed: u64) -> CutOutcome {
    let mut rng = seed::rng(seed);
    let kept: Vec<Edge> = f.edges().iter().copied().filter(|_| rng.random::<f64>() >= cfg.q).collect();
    let cuts = f.edge_count() - kept.len();
    CutOutcome {
        forest: Forest::from_edges(f.n(), kept).expect("a subset of a forest is a forest"),
        cuts,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub probability: f64,
    pub stderr: f64,
    /// Samples that contributed to the estimate.
    pub samples: usize,
    /// Samples dropped because a generation outgrew the size cap.
    pub truncated: usize,
}

const TAIL_CHUNK: usize = 16_384;

/// Monte-Carlo `P(height >= m)` for Poisson(`mean`) offspring.
///
/// Follows generation sizes `Z_{k+1} ~ Poisson(mean * Z_k)`; the height is
/// at least `m` exactly when `Z_m > 0`.
pub fn height_tail(mean: f64, m: u32, replicates: usize, seed: u64) -> Result<TailEstimate> {
    height_tail_with(mean, m, replicates, seed, GwCaps::default().max_size as u64, Parallelism::default())
}

pub fn height_tail_with(mean: f64, m: u32, replicates: usize, seed: u64, max_generation: u64, mode: Parallelism) -> Result<TailEstimate> {
    if replicates == 0 {
        return invalid("replicates must be at least 1");
    }
    if !(mean >= 0.0 && mean.is_finite()) {
        return invalid(format!("offspring mean must be finite and non-negative, got {mean}"));
    }
    let chunks = replicates.div_ceil(TAIL_CHUNK);
    let counts = par::map_indexed(chunks, mode, |c| {
        let mut rng = seed::rng(seed::derive(seed, &[c as u64]));
        let todo = TAIL_CHUNK.min(replicates - c * TAIL_CHUNK);
        let (mut hits, mut truncated) = (0usize, 0usize);
        'sample: for _ in 0..todo {
            let mut z = 1u64;
            for _ in 0..m {
                z = poisson(mean * z as f64, &mut rng);
                if z == 0 {
                    continue 'sample;
                }
                if z > max_generation {
                    truncated += 1;
                    continue 'sample;
                }
            }
            hits += 1;
        }
        (hits, truncated)
    });
    let hits: usize = counts.iter().map(|c| c.0).sum();
    let truncated: usize = counts.iter().map(|c| c.1).sum();
    let samples = replicates - truncated;
    if samples == 0 {
        return Err(Error::Invariant("every sample was truncated".into()));
    }
    let probability = hits as f64 / samples as f64;
    Ok(TailEstimate {
        probability,
        stderr: (probability * (1.0 - probability) / samples as f64).sqrt(),
        samples,
        truncated,
    })
}

/// Exact `P(height >= m)` from the generating-function recursion
/// `q_0 = 0`, `q_{k+1} = exp(mean (q_k - 1))`, `P(H >= m) = 1 - q_m`.
pub fn height_tail_exact(mean: f64, m: u32) -> f64 {
    let mut q = 0.0f64;
    for _ in 0..m {
        q = (mean * (q - 1.0)).exp();
    }
    1.0 - q
}

/// Window parameters `F, 1.5 F, 1.5^2 F, ...` up to the first value
/// at or above `f_max`.
pub fn snapshot_schedule(f0: f64, f_max: f64) -> Result<Vec<f64>> {
    if !(f0 > 0.0 && f0.is_finite()) {
        return invalid(format!("F must be positive and finite, got {f0}"));
    }
    if !(f_max >= f0 && f_max.is_finite()) {
        return invalid(format!("f_max must be finite and at least F = {f0}, got {f_max}"));
    }
    let mut out = vec![f0];
    let mut f = f0;
    while f < f_max {
        f *= 1.5;
        out.push(f);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> GwCaps {
        GwCaps::default()
    }

    #[test]
    fn offspring_mean_examples() {
        assert!((offspring_mean(2.0, 900.0, 0.001) - 1.8).abs() < 1e-12);
        let ell = 1234.5;
        assert!((offspring_mean(1.0, ell, 1.0 / ell) - 1.0).abs() < 1e-12);
        assert_eq!(offspring_mean(0.0, 55.0, 0.3), 0.0);
    }

    #[test]
    fn zero_mean_gives_a_single_node() {
        let t = sample_gw(|_| 0.0, |_| 0, caps(), 1);
        assert_eq!(t.size(), 1);
        assert_eq!(t.height, 0);
        assert!(!t.truncated);
    }

    #[test]
    fn breadth_first_structure() {
        for s in 0..50 {
            let t = sample_gw(|_| 0.9, |rng| rng.random_range(0..20), caps(), s);
            let mut kids = vec![0u32; t.size()];
            for (i, x) in t.nodes.iter().enumerate() {
                if let Some(p) = x.parent {
                    assert!((p as usize) < i);
                    assert_eq!(x.depth, t.nodes[p as usize].depth + 1);
                    kids[p as usize] += 1;
                }
            }
            assert!(t.nodes.windows(2).all(|w| w[0].depth <= w[1].depth));
            assert_eq!(kids, t.nodes.iter().map(|x| x.children).collect::<Vec<_>>());
            assert_eq!(t.height, t.nodes.iter().map(|x| x.depth).max().unwrap());
            assert_eq!(t, sample_gw(|_| 0.9, |rng| rng.random_range(0..20), caps(), s));
        }
    }

    #[test]
    fn subcritical_mean_total_size() {
        // total progeny of Poisson(0.5): mean 2, variance 0.5 / 0.5^3 = 4
        let k = 50_000;
        let total: usize = (0..k).map(|s| sample_gw(|_| 0.5, |_| 0, caps(), s).size()).sum();
        let mean = total as f64 / k as f64;
        assert!((mean - 2.0).abs() < 3.0 * 2.0 / (k as f64).sqrt(), "{mean}");
    }

    #[test]
    fn critical_tree_heights_follow_recursion() {
        let k = 100_000;
        let c = GwCaps { max_size: 1_000_000, max_height: 20 };
        let trees: Vec<GwTree> = (0..k).map(|s| sample_gw(|_| 1.0, |_| 0, c, 1000 + s)).collect();
        for m in [2u32, 5, 10] {
            // trees stopped by the height cap already reached depth 20
            let hits = trees.iter().filter(|t| t.height >= m).count();
            let p = hits as f64 / k as f64;
            let mut q = 0.0f64;
            for _ in 0..m {
                q = (q - 1.0).exp();
            }
            let sd = ((1.0 - q) * q / k as f64).sqrt();
            assert!((p - (1.0 - q)).abs() < 3.0 * sd, "m = {m}: {p} vs {}", 1.0 - q);
        }
    }

    #[test]
    fn caps_truncate() {
        let t = sample_gw(|_| 3.0, |_| 0, GwCaps { max_size: 100, max_height: 1000 }, 3);
        assert!(t.truncated && t.size() <= 100);
        let t = sample_gw(|_| 3.0, |_| 0, GwCaps { max_size: 1_000_000, max_height: 4 }, 3);
        assert!(t.truncated && t.height <= 4);
    }

    fn node(parent: Option<u32>, label: u32, depth: u32) -> GwNode {
        GwNode { parent, label, children: 0, depth }
    }

    fn with_counts(mut nodes: Vec<GwNode>) -> GwTree {
        for i in 0..nodes.len() {
            if let Some(p) = nodes[i].parent {
                nodes[p as usize].children += 1;
            }
        }
        let height = nodes.iter().map(|x| x.depth).max().unwrap();
        GwTree { nodes, height, truncated: false }
    }

    #[test]
    fn color_prune_distinct_labels_is_identity() {
        let t = with_counts(vec![node(None, 0, 0), node(Some(0), 1, 1), node(Some(0), 2, 1), node(Some(1), 3, 2)]);
        assert_eq!(color_prune(&t), t);
    }

    #[test]
    fn color_prune_removes_repeated_label_subtree() {
        // root labelled 7, child labelled 7 with its own subtree
        let t = with_counts(vec![
            node(None, 7, 0),
            node(Some(0), 7, 1),
            node(Some(0), 2, 1),
            node(Some(1), 4, 2),
            node(Some(2), 5, 2),
        ]);
        let r = color_prune(&t);
        let labels: Vec<u32> = r.nodes.iter().map(|x| x.label).collect();
        assert_eq!(labels, vec![7, 2, 5]);
        assert_eq!(r.nodes[0].children, 1);
        assert_eq!(r.nodes[2].parent, Some(1));
        assert_eq!(r.height, 2);
    }

    #[test]
    fn color_prune_invariants() {
        for s in 0..200 {
            let t = sample_gw(|_| 1.2, |rng| rng.random_range(0..30), GwCaps { max_size: 5000, max_height: 100 }, s);
            let r = color_prune(&t);
            let mut seen = std::collections::HashSet::new();
            assert!(r.nodes.iter().all(|x| seen.insert(x.label)));
            assert_eq!(r.nodes[0].parent, None);
            assert!(r.nodes.iter().skip(1).all(|x| x.parent.is_some()));
            assert!(r.size() <= 30);
        }
    }

    #[test]
    fn coupled_offspring_law() {
        let v = WeightVector::new(vec![3.0, 2.0, 1.0]).unwrap();
        let c = CoupledOffspring::new(&v, &[0], 0.1).unwrap();
        assert!((c.mean(1) - 2.0 * 3.0 * 0.1).abs() < 1e-12);
        let mut rng = seed::rng(4);
        let k = 60_000;
        let ones = (0..k).filter(|_| c.label(&mut rng) == 1).count();
        let f = ones as f64 / k as f64;
        assert!((f - 2.0 / 3.0).abs() < 3.0 * (2.0 / 9.0 / k as f64).sqrt());
        assert!(CoupledOffspring::new(&v, &[0, 1, 2], 0.1).is_err());
    }

    #[test]
    fn edge_cuts() {
        let v = WeightVector::make_constant(300).unwrap();
        let src = crate::graphgen::CapacitySource::exact_capacities(&v, 1).unwrap();
        let f = crate::mst::kruskal(&src.snapshot(0.01).unwrap());
        let none = edge_cut_prune(&f, &CutConfig::with_probability(0.0).unwrap(), 3);
        assert_eq!((none.cuts, &none.forest), (0, &f));
        let all = edge_cut_prune(&f, &CutConfig::with_probability(1.0).unwrap(), 3);
        assert_eq!(all.forest.component_count(), 300);
        assert_eq!(all.cuts, f.edge_count());

        let q = 0.3;
        let cfg = CutConfig::with_probability(q).unwrap();
        let reps = 10_000;
        let m = f.edge_count() as f64;
        let total: usize = (0..reps).map(|s| edge_cut_prune(&f, &cfg, s).cuts).sum();
        let mean = total as f64 / reps as f64;
        let sd = (m * q * (1.0 - q) / reps as f64).sqrt();
        assert!((mean - q * m).abs() < 3.0 * sd, "{mean} vs {}", q * m);

        let cut = edge_cut_prune(&f, &cfg, 77);
        assert_eq!(cut.forest.n(), f.n());
        assert!(f.contains_edges_of(&cut.forest));

        let c = CutConfig::new(2.0, 1000.0).unwrap();
        assert!((c.q - 0.4).abs() < 1e-12);
        assert!(CutConfig::new(10.0, 1000.0).is_err());
    }

    #[test]
    fn height_tail_small_cases() {
        let e = height_tail(1.0, 1, 200_000, 1).unwrap();
        let exact = 1.0 - (-1.0f64).exp();
        assert!((height_tail_exact(1.0, 1) - exact).abs() < 1e-15);
        assert!((e.probability - exact).abs() < 3.0 * e.stderr, "{:?}", e);
        let sub = height_tail(0.5, 30, 100_000, 2).unwrap();
        assert!(sub.probability < 1e-3);
        assert!(height_tail_exact(0.5, 30) < 1e-3);
        assert!(height_tail(1.0, 3, 0, 1).is_err());
        // thread count does not change the estimate
        let a = height_tail_with(1.0, 5, 50_000, 9, 1_000_000, Parallelism::Sequential).unwrap();
        let b = height_tail_with(1.0, 5, 50_000, 9, 1_000_000, Parallelism::Threads(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn schedules() {
        assert_eq!(snapshot_schedule(4.0, 20.0).unwrap(), vec![4.0, 6.0, 9.0, 13.5, 20.25]);
        assert_eq!(snapshot_schedule(3.0, 3.0).unwrap(), vec![3.0]);
        for (f0, fm) in [(1.0, 100.0), (0.3, 7.0), (2.0, 2.5)] {
            let s = snapshot_schedule(f0, fm).unwrap();
            let bound = (fm / f0).ln() / 1.5f64.ln();
            assert!(s.len() as f64 <= bound.ceil() + 1.0);
            assert!(*s.last().unwrap() >= fm);
        }
        assert!(snapshot_schedule(0.0, 1.0).is_err());
        assert!(snapshot_schedule(2.0, 1.0).is_err());
    }
}
