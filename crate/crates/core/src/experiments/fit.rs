use serde::Serialize;

use crate::error::{invalid, Result};

/// Aggregate of one statistic at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Straight-line fit of `log mean` against `log n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingResult {
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% interval for the slope.
    pub slope_ci: f64,
    pub slope_stderr: f64,
    pub weighted: bool,
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

pub fn aggregate(n: usize, xs: &[f64]) -> ScalingPoint {
    let (mean, stderr) = mean_stderr(xs);
    ScalingPoint {
        n,
        mean,
        stderr,
        count: xs.len(),
    }
}

/// Weighted least squares of `log value` on `log n`, weights `(value / stderr)^2`.
///
/// Falls back to ordinary least squares when any standard error is zero.
pub fn fit_loglog(points: &[ScalingPoint]) -> Result<ScalingResult> {
    if points.len() < 3 {
        return invalid(format!("a fit needs at least 3 points, got {}", points.len()));
    }
    if let Some(p) = points.iter().find(|p| !(p.mean > 0.0 && p.mean.is_finite())) {
        return invalid(format!("value {} at n = {} is not positive", p.mean, p.n));
    }
    let weighted = points.iter().all(|p| p.stderr > 0.0 && p.stderr.is_finite());
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean.ln()).collect();
    let ws: Vec<f64> = if weighted {
        points.iter().map(|p| (p.mean / p.stderr).powi(2)).collect()
    } else {
        vec![1.0; points.len()]
    };
    let sw: f64 = ws.iter().sum();
    let xbar = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ybar = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * (x - xbar).powi(2)).sum();
    if sxx <= 0.0 {
        return invalid("all points share the same n");
    }
    let sxy: f64 = (0..xs.len()).map(|i| ws[i] * (xs[i] - xbar) * (ys[i] - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let slope_stderr = if weighted {
        (1.0 / sxx).sqrt()
    } else {
        let rss: f64 = (0..xs.len()).map(|i| (ys[i] - intercept - slope * xs[i]).powi(2)).sum();
        (rss / (xs.len() - 2) as f64 / sxx).sqrt()
    };
    Ok(ScalingResult {
        points: points.to_vec(),
        slope,
        intercept,
        slope_ci: 1.96 * slope_stderr,
        slope_stderr,
        weighted,
    })
}
