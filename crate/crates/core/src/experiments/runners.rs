use serde_json::json;

use super::{
    aux_seed, fit_loglog, mean_stderr, points_of, replicate_grid, require, source_for, values_of, weights_for,
    Experiment, ExperimentConfig, Outcome, Stat, Variant,
};
use crate::error::Result;
use crate::graphgen::p_critical;
use crate::metrics::{component_stats_with, tree_diameter, typical_distance, StatsOptions, Tree};
use crate::mst::{kruskal, kruskal_sorted};
use crate::unionfind::UnionFind;

/// Times the connection threshold is doubled before a replicate is excluded.
pub const MAX_DOUBLINGS: u32 = 4;

/// Largest-component size and fraction at `p = c / ell_n` for every `c`.
pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<Outcome> {
    require(cfg, Experiment::Phase)?;
    let (rows, failures) = replicate_grid(cfg, |n, _, s| {
        let v = weights_for(cfg, n, s)?;
        let ell = v.ell_n();
        let ps: Vec<f64> = cfg.c_grid.iter().map(|c| c / ell).collect();
        let p_max = *ps.last().unwrap();
        let src = source_for(cfg, &v, p_max, s)?;
        let mut uf = UnionFind::new(n);
        let mut largest = 1usize;
        let mut at = Vec::with_capacity(ps.len());
        for e in src.edges_upto(p_max)? {
            while at.len() < ps.len() && e.cap > ps[at.len()] {
                at.push(largest);
            }
            if uf.union(e.u, e.v) {
                largest = largest.max(uf.set_size(e.u));
            }
        }
        at.resize(ps.len(), largest);
        let mut out = Vec::new();
        for (c, size) in cfg.c_grid.iter().zip(at) {
            out.push(Stat::ok(format!("largest_size_c={c}"), size as f64));
            out.push(Stat::ok(format!("largest_fraction_c={c}"), size as f64 / n as f64));
        }
        Ok(out)
    });
    let mut per_c = Vec::new();
    let mut scaling = None;
    for &c in &cfg.c_grid {
        let points = points_of(&rows, &cfg.n_grid, &format!("largest_size_c={c}"));
        let fractions: Vec<f64> = cfg
            .n_grid
            .iter()
            .map(|&n| mean_stderr(&values_of(&rows, n, &format!("largest_fraction_c={c}"))).0)
            .collect();
        let fit = fit_loglog(&points).ok();
        if c == 1.0 {
            scaling = fit.clone();
        }
        per_c.push(json!({
            "c": c,
            "mean_fraction": fractions,
            "size_slope": fit.as_ref().map(|f| f.slope),
            "size_slope_ci": fit.as_ref().map(|f| f.slope_ci),
        }));
    }
    Ok(Outcome {
        experiment: cfg.experiment,
        rows,
        scaling,
        target: Some(2.0 / 3.0),
        extra: json!({ "per_c": per_c }),
        failures,
    })
}

fn window_name(stat: &str, f: f64) -> String {
    format!("{stat}_f={f}")
}

/// Component statistics at `p_f = 1/ell_n + f/ell_n^{4/3}` for every `f`.
pub fn run_critical_window(cfg: &ExperimentConfig) -> Result<Outcome> {
    require(cfg, Experiment::Window)?;
    let (rows, failures) = replicate_grid(cfg, |n, _, s| {
        let v = weights_for(cfg, n, s)?;
        let st = v.stats();
        let f_max = *cfg.f_grid.last().unwrap();
        let src = source_for(cfg, &v, p_critical(&st, f_max)?, s)?;
        let mut out = Vec::new();
        for &f in &cfg.f_grid {
            let g = src.snapshot(p_critical(&st, f)?)?;
            let comps = component_stats_with(&g, &v, StatsOptions::default());
            let first = &comps[0];
            let (second_size, second_weight) = comps.get(1).map_or((0, 0.0), |c| (c.size, c.weight));
            let ratio = first.size as f64 * st.c / (2.0 * f * st.ell_n.powf(2.0 / 3.0));
            out.push(Stat::ok(window_name("largest_size", f), first.size as f64));
            out.push(Stat::ok(window_name("largest_weight", f), first.weight));
            out.push(Stat::ok(window_name("surplus", f), first.surplus as f64));
            out.push(Stat::ok(window_name("second_size", f), second_size as f64));
            out.push(Stat::ok(window_name("second_weight", f), second_weight));
            out.push(Stat::ok(window_name("ratio", f), ratio));
        }
        Ok(out)
    });
    let mut per_f = Vec::new();
    for &f in &cfg.f_grid {
        for &n in &cfg.n_grid {
            let ratio = values_of(&rows, n, &window_name("ratio", f));
            let first = values_of(&rows, n, &window_name("largest_size", f));
            let second = values_of(&rows, n, &window_name("second_size", f));
            let small = first.iter().zip(&second).filter(|(a, b)| **b < **a / 4.0).count();
            let (mean, se) = mean_stderr(&ratio);
            per_f.push(json!({
                "f": f,
                "n": n,
                "mean_ratio": mean,
                "ratio_stderr": se,
                "second_below_quarter": small as f64 / first.len().max(1) as f64,
                "median_surplus": median(values_of(&rows, n, &window_name("surplus", f))),
            }));
        }
    }
    // growth of the median surplus in f, per n
    let mut surplus_slopes = Vec::new();
    if cfg.f_grid.len() >= 2 {
        for &n in &cfg.n_grid {
            let pts: Vec<(f64, f64)> = cfg
                .f_grid
                .iter()
                .map(|&f| (f.ln(), median(values_of(&rows, n, &window_name("surplus", f)))))
                .filter(|(_, m)| *m > 0.0)
                .map(|(x, m)| (x, m.ln()))
                .collect();
            let slope = (pts.len() >= 2).then(|| ols_slope(&pts));
            surplus_slopes.push(json!({ "n": n, "slope": slope }));
        }
    }
    Ok(Outcome {
        experiment: cfg.experiment,
        rows,
        scaling: None,
        target: None,
        extra: json!({ "per_f": per_f, "surplus_slope_in_f": surplus_slopes }),
        failures,
    })
}

pub(crate) fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        (xs[k / 2 - 1] + xs[k / 2]) / 2.0
    }
}

pub(crate) fn ols_slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let xbar = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ybar = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    sxy / sxx
}

/// Diameter of the minimum spanning tree of the complete graph.
///
/// Builds the forest at `p = 8 log n / ell_n`; while it does not span, `p`
/// doubles with the same capacity stream.
pub fn run_diameter_scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    require(cfg, Experiment::Diameter)?;
    let (rows, failures) = replicate_grid(cfg, |n, _, s| {
        let v = weights_for(cfg, n, s)?;
        let mut p = 8.0 * (n as f64).ln() / v.ell_n();
        for doublings in 0..=MAX_DOUBLINGS {
            let src = source_for(cfg, &v, p, s)?;
            let forest = kruskal_sorted(n, src.edges_upto(p)?);
            if forest.is_spanning_tree() {
                let d = tree_diameter(&forest.largest_tree());
                return Ok(vec![Stat::ok("diameter", d as f64), Stat::ok("doublings", doublings as f64)]);
            }
            p *= 2.0;
        }
        Ok(vec![Stat::excluded("diameter"), Stat::excluded("doublings")])
    });
    let scaling = fit_loglog(&points_of(&rows, &cfg.n_grid, "diameter")).ok();
    Ok(Outcome {
        experiment: cfg.experiment,
        rows,
        scaling,
        target: Some(1.0 / 3.0),
        extra: json!({}),
        failures,
    })
}

/// Spanning tree of the largest component of `G(W, c / ell_n)`.
fn giant_tree(cfg: &ExperimentConfig, n: usize, s: u64) -> Result<Tree> {
    let v = weights_for(cfg, n, s)?;
    let p = cfg.c / v.ell_n();
    let src = source_for(cfg, &v, p, s)?;
    match cfg.variant {
        Variant::Coupled => Ok(kruskal_sorted(n, src.edges_upto(p)?).largest_tree()),
        Variant::Iid => {
            let g = src.snapshot(p)?;
            let forest = kruskal(&g);
            let giant = forest.largest_component();
            let nodes: Vec<u32> = (0..n as u32).filter(|&x| forest.labels()[x as usize] == giant).collect();
            let sub = g.induced(&nodes).iid_capacities_on(aux_seed(s, 0));
            Ok(kruskal(&sub).largest_tree())
        }
    }
}

fn typical_grid(cfg: &ExperimentConfig, target: f64) -> Result<Outcome> {
    let (rows, failures) = replicate_grid(cfg, |n, _, s| {
        let tree = giant_tree(cfg, n, s)?;
        if tree.size() < 2 {
            return Ok(vec![Stat::excluded("typical_distance"), Stat::excluded("tree_diameter"), Stat::ok("giant_size", tree.size() as f64)]);
        }
        let typical = if cfg.pairs == 0 {
            tree.mean_pair_distance().expect("at least two nodes")
        } else {
            let d = typical_distance(&tree, cfg.pairs, aux_seed(s, 1))?;
            d.iter().map(|&x| x as f64).sum::<f64>() / d.len() as f64
        };
        Ok(vec![
            Stat::ok("typical_distance", typical),
            Stat::ok("tree_diameter", tree_diameter(&tree) as f64),
            Stat::ok("giant_size", tree.size() as f64),
        ])
    });
    let scaling = fit_loglog(&points_of(&rows, &cfg.n_grid, "typical_distance")).ok();
    let diameter = fit_loglog(&points_of(&rows, &cfg.n_grid, "tree_diameter")).ok();
    Ok(Outcome {
        experiment: cfg.experiment,
        rows,
        scaling,
        target: Some(target),
        extra: json!({
            "variant": cfg.variant.as_str(),
            "c": cfg.c,
            "diameter_slope": diameter.as_ref().map(|f| f.slope),
            "diameter_slope_ci": diameter.as_ref().map(|f| f.slope_ci),
        }),
        failures,
    })
}

/// Mean distance between uniform node pairs of the giant's spanning tree.
pub fn run_typical_distance(cfg: &ExperimentConfig) -> Result<Outcome> {
    require(cfg, Experiment::Typical)?;
    typical_grid(cfg, 1.0 / 3.0)
}

/// Conjectured typical-distance exponent `(alpha - 3) / (alpha - 1)`.
pub fn powerlaw_target(alpha: f64) -> f64 {
    (alpha - 3.0) / (alpha - 1.0)
}

/// Typical distances with power-law weights of exponent `cfg.alpha`.
pub fn run_powerlaw(cfg: &ExperimentConfig) -> Result<Outcome> {
    require(cfg, Experiment::Powerlaw)?;
    typical_grid(cfg, powerlaw_target(cfg.alpha))
}
