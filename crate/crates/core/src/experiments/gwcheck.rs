use std::collections::BTreeMap;

use serde_json::json;

use super::{aux_seed, mean_stderr, replicate_grid, require, source_for, values_of, weights_for, Experiment, ExperimentConfig, Outcome, Stat};
use crate::error::Result;
use crate::exploration::bfw;
use crate::gwcoupling::{color_prune, height_tail, height_tail_exact, CoupledOffspring, GwCaps};

pub const HEIGHT_TAIL_M: [u32; 5] = [2, 5, 10, 20, 40];
pub const HEIGHT_TAIL_SAMPLES: usize = 1_000_000;

/// Histogram bin of a tree size: `1, 2, 3..=4, 5..=8, ...`.
pub fn dyadic_bin(size: u64) -> u32 {
    64 - size.saturating_sub(1).leading_zeros()
}

/// Total-variation distance between the empirical laws of `a` and `b`
/// after mapping each value through `bin`.
pub fn tv_distance<K: Ord>(a: &[u64], b: &[u64], bin: impl Fn(u64) -> K) -> f64 {
    let mut h: BTreeMap<K, (f64, f64)> = BTreeMap::new();
    for &x in a {
        h.entry(bin(x)).or_default().0 += 1.0 / a.len() as f64;
    }
    for &x in b {
        h.entry(bin(x)).or_default().1 += 1.0 / b.len() as f64;
    }
    h.values().map(|(p, q)| (p - q).abs()).sum::<f64>() / 2.0
}

/// Compares the colour-pruned Galton-Watson tree with the first tree of the
/// breadth-first walk at `p = 1/ell_n`, one pair of samples per replicate,
/// and tabulates the critical height tail.
pub fn run_gwcheck(cfg: &ExperimentConfig) -> Result<Outcome> {
    require(cfg, Experiment::Gwcheck)?;
    let (rows, failures) = replicate_grid(cfg, |n, _, s| {
        let v = weights_for(cfg, n, s)?;
        let p = 1.0 / v.ell_n();
        let gw = CoupledOffspring::new(&v, &[], p)?.sample(GwCaps::default(), aux_seed(s, 0));
        let red = color_prune(&gw);
        let gw_stat = if gw.truncated {
            Stat::excluded("gw_size")
        } else {
            Stat::ok("gw_size", red.size() as f64)
        };
        let g = source_for(cfg, &v, p, s)?.snapshot(p)?;
        let trace = bfw(&g, &v, aux_seed(s, 1))?;
        Ok(vec![gw_stat, Stat::ok("bfw_size", trace.component_sizes()[0] as f64)])
    });
    let mut per_n = Vec::new();
    for &n in &cfg.n_grid {
        let gw: Vec<u64> = values_of(&rows, n, "gw_size").iter().map(|&x| x as u64).collect();
        let bf: Vec<u64> = values_of(&rows, n, "bfw_size").iter().map(|&x| x as u64).collect();
        let truncated = cfg.replicates - gw.len();
        let as_f = |xs: &[u64]| mean_stderr(&xs.iter().map(|&x| x as f64).collect::<Vec<_>>());
        per_n.push(json!({
            "n": n,
            "tv_dyadic": tv_distance(&gw, &bf, dyadic_bin),
            "tv_exact": tv_distance(&gw, &bf, |x| x),
            "gw_mean_size": as_f(&gw).0,
            "bfw_mean_size": as_f(&bf).0,
            "gw_truncated": truncated,
        }));
    }
    let mut tail = Vec::new();
    for (i, &m) in HEIGHT_TAIL_M.iter().enumerate() {
        let est = height_tail(1.0, m, HEIGHT_TAIL_SAMPLES, aux_seed(cfg.seed, 100 + i as u64))?;
        tail.push(json!({
            "m": m,
            "estimate": est.probability,
            "stderr": est.stderr,
            "exact": height_tail_exact(1.0, m),
            "m_times_estimate": m as f64 * est.probability,
            "truncated": est.truncated,
        }));
    }
    Ok(Outcome {
        experiment: cfg.experiment,
        rows,
        scaling: None,
        target: None,
        extra: json!({ "coupling": per_n, "height_tail": tail }),
        failures,
    })
}
