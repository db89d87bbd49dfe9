//! Node-weight vectors and their moment diagnostics.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed;

/// Positive node weights sorted non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightStats {
    pub n: usize,
    pub ell_n: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub w_max: f64,
    /// `(s3 / n) / (ell_n / n)`, the finite-n stand-in for `E[W^3] / E[W]`.
    pub c: f64,
}

impl WeightVector {
    /// Validates and sorts `weights` into non-increasing order.
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return invalid("weight vector must be non-empty");
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return invalid(format!("weights must be finite and positive, got {bad}"));
        }
        weights.sort_unstable_by(|a, b| b.total_cmp(a));
        Ok(Self { weights })
    }

    pub fn make_constant(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("n must be at least 1");
        }
        Ok(Self { weights: vec![1.0; n] })
    }

    /// `n` i.i.d. draws from `law`, sorted. Deterministic in `seed`.
    pub fn sample_iid(n: usize, law: &WeightLaw, seed: u64) -> Result<Self> {
        if n == 0 {
            return invalid("n must be at least 1");
        }
        law.validate()?;
        let mut rng = seed::rng(seed);
        let draws = (0..n).map(|_| law.sample(&mut rng)).collect();
        Self::new(draws)
    }

    /// Deterministic power-law order statistics `(n/i)^{1/(alpha-1)}`,
    /// normalized to criticality.
    pub fn make_powerlaw(n: usize, alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha <= 3.0 {
            return invalid(format!("power-law exponent must exceed 3, got {alpha}"));
        }
        Ok(powerlaw_raw(n, alpha)?.normalize_critical())
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }

    pub fn ell_n(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn stats(&self) -> WeightStats {
        let (mut l, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
        for &w in &self.weights {
            let w2 = w * w;
            l += w;
            s2 += w2;
            s3 += w2 * w;
            s4 += w2 * w2;
        }
        WeightStats {
            n: self.n(),
            ell_n: l,
            s2,
            s3,
            s4,
            w_max: self.weights[0],
            c: s3 / l,
        }
    }

    /// Rescales by `ell_n / s2` so that the sum of squares equals the sum.
    pub fn normalize_critical(&self) -> Self {
        let s = self.stats();
        let lambda = s.ell_n / s.s2;
        Self {
            weights: self.weights.iter().map(|w| w * lambda).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.weights.iter().map(|w| w * factor).collect())
    }

    pub fn check_conditions(&self) -> ConditionsReport {
        self.check_conditions_with(None, &ConditionThresholds::default())
    }

    /// Finite-n diagnostics for the moment conditions.
    ///
    /// `reference` supplies population moments when the weights were drawn
    /// from a known law. Without one, moments of the vector with its
    /// `ceil(n^{1/3})` largest entries removed stand in for the population
    /// values, which measures how much the top of the vector dominates.
    pub fn check_conditions_with(
        &self,
        reference: Option<Moments>,
        thresholds: &ConditionThresholds,
    ) -> ConditionsReport {
        let st = self.stats();
        let n = st.n as f64;
        let n13 = n.cbrt();
        let n23 = n13 * n13;
        let trim = (n13.ceil() as usize).min(self.n() - 1);
        let trimmed = trimmed_moments(&self.weights, trim);
        let mean = st.ell_n / n;

        let r = reference.unwrap_or(Moments {
            m1: mean,
            m2: mean,
            m3: trimmed.m3,
            m4: trimmed.m4,
        });

        let third_change = if trim == 0 { 0.0 } else { (st.s3 / n - trimmed.m3).abs() / (st.s3 / n) };

        let mut entries = Vec::with_capacity(8);
        let mut push = |key, description, measured: f64, target: f64, deviation: f64, threshold: f64| {
            entries.push(ConditionEntry {
                key,
                description,
                measured,
                target,
                deviation,
                threshold,
                warn: !(deviation <= threshold),
            });
        };
        // Weak convergence cannot be judged from one vector.
        push(Condition::I, "empirical weight law converges weakly (not assessable at one n)", 0.0, 0.0, 0.0, f64::INFINITY);
        push(Condition::Ii, "finite third moment: relative change of s3/n when the top weights are removed", third_change, 0.0, third_change, thresholds.tail_change);
        push(Condition::Iii, "criticality: s2 / ell_n", st.s2 / st.ell_n, 1.0, (st.s2 / st.ell_n - 1.0).abs(), thresholds.criticality);
        push(Condition::Iv, "ell_n = E[W] n + o(n^{2/3})", mean, r.m1, (st.ell_n - r.m1 * n).abs() / n23, thresholds.moment);
        push(Condition::V, "s2 = E[W^2] n + o(n^{2/3})", st.s2 / n, r.m2, (st.s2 - r.m2 * n).abs() / n23, thresholds.moment);
        push(Condition::Vi, "s3 = E[W^3] n + o(1)", st.s3 / n, r.m3, (st.s3 - r.m3 * n).abs() / n23, thresholds.moment);
        push(Condition::Vii, "w_max = o(n^{1/3})", st.w_max / n13, 0.0, (st.w_max - mean) / n13, thresholds.max_weight);
        push(Condition::Viii, "s4 = E[W^4] n + o(1)", st.s4 / n, r.m4, (st.s4 - r.m4 * n).abs() / n23, thresholds.moment);

        ConditionsReport { entries }
    }
}

/// Power-law order statistics without the criticality rescaling.
pub(crate) fn powerlaw_raw(n: usize, alpha: f64) -> Result<WeightVector> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if !(alpha > 1.0) {
        return invalid(format!("power-law exponent must exceed 1, got {alpha}"));
    }
    let e = 1.0 / (alpha - 1.0);
    let nf = n as f64;
    Ok(WeightVector {
        weights: (1..=n).map(|i| (nf / i as f64).powf(e)).collect(),
    })
}

fn trimmed_moments(sorted_desc: &[f64], k: usize) -> Moments {
    let rest = &sorted_desc[k..];
    let m = rest.len() as f64;
    let mut acc = [0.0; 4];
    for &w in rest {
        let w2 = w * w;
        acc[0] += w;
        acc[1] += w2;
        acc[2] += w2 * w;
        acc[3] += w2 * w2;
    }
    Moments {
        m1: acc[0] / m,
        m2: acc[1] / m,
        m3: acc[2] / m,
        m4: acc[3] / m,
    }
}

/// Raw population moments `E[W^k]`, `k = 1..4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    /// Moments of `c * W`.
    pub fn scaled(&self, c: f64) -> Self {
        Moments {
            m1: self.m1 * c,
            m2: self.m2 * c * c,
            m3: self.m3 * c.powi(3),
            m4: self.m4 * c.powi(4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
    Vii,
    Viii,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::I => "(i)",
            Condition::Ii => "(ii)",
            Condition::Iii => "(iii)",
            Condition::Iv => "(iv)",
            Condition::V => "(v)",
            Condition::Vi => "(vi)",
            Condition::Vii => "(vii)",
            Condition::Viii => "(viii)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionThresholds {
    pub criticality: f64,
    pub moment: f64,
    pub tail_change: f64,
    pub max_weight: f64,
}

impl Default for ConditionThresholds {
    fn default() -> Self {
        Self {
            criticality: 1e-6,
            moment: 1.0,
            tail_change: 0.25,
            max_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub key: Condition,
    pub description: &'static str,
    pub measured: f64,
    pub target: f64,
    pub deviation: f64,
    pub threshold: f64,
    pub warn: bool,
}

/// One entry per moment condition, (i) through (viii). Diagnostic only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsReport {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionsReport {
    pub fn get(&self, key: Condition) -> &ConditionEntry {
        self.entries.iter().find(|e| e.key == key).expect("all eight conditions are present")
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| !e.warn)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ConditionEntry> {
        self.entries.iter().filter(|e| e.warn)
    }
}

/// Distribution of i.i.d. node weights.
///
/// Text form, as used in config files: `constant`, `two-point:a,b,p_a`,
/// `exp-shifted:shift,rate`, `uniform:lo,hi`, `pareto:alpha,lo,hi`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightLaw {
    Constant,
    /// `a` with probability `p_a`, otherwise `b`.
    TwoPoint { a: f64, b: f64, p_a: f64 },
    /// `shift + Exp(rate)`.
    ExpShifted { shift: f64, rate: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Pareto tail `x^{-alpha}` truncated to `[lo, hi]`.
    TruncatedPareto { alpha: f64, lo: f64, hi: f64 },
}

impl WeightLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightLaw::Constant => true,
            WeightLaw::TwoPoint { a, b, p_a } => a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&p_a),
            WeightLaw::ExpShifted { shift, rate } => shift > 0.0 && rate > 0.0,
            WeightLaw::Uniform { lo, hi } => lo > 0.0 && hi >= lo,
            WeightLaw::TruncatedPareto { alpha, lo, hi } => alpha > 0.0 && alpha != 1.0 && lo > 0.0 && hi > lo,
        };
        if ok && self.all_finite() {
            Ok(())
        } else {
            invalid(format!("weight law {self} needs finite parameters with positive support"))
        }
    }

    fn all_finite(&self) -> bool {
        match *self {
            WeightLaw::Constant => true,
            WeightLaw::TwoPoint { a, b, p_a } => a.is_finite() && b.is_finite() && p_a.is_finite(),
            WeightLaw::ExpShifted { shift, rate } => shift.is_finite() && rate.is_finite(),
            WeightLaw::Uniform { lo, hi } => lo.is_finite() && hi.is_finite(),
            WeightLaw::TruncatedPareto { alpha, lo, hi } => alpha.is_finite() && lo.is_finite() && hi.is_finite(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightLaw::Constant => 1.0,
            WeightLaw::TwoPoint { a, b, p_a } => {
                if rng.random::<f64>() < p_a {
                    a
                } else {
                    b
                }
            }
            WeightLaw::ExpShifted { shift, rate } => shift + Exp::new(rate).expect("validated rate").sample(rng),
            WeightLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            WeightLaw::TruncatedPareto { alpha, lo, hi } => {
                // inverse CDF of density proportional to x^{-alpha} on [lo, hi]
                let u: f64 = rng.random();
                let e = 1.0 - alpha;
                let (a, b) = (lo.powf(e), hi.powf(e));
                (a + u * (b - a)).powf(1.0 / e)
            }
        }
    }

    /// Analytic moments `E[W^k]`, `k = 1..4`.
    pub fn moments(&self) -> Moments {
        let m = |k: i32| -> f64 {
            match *self {
                WeightLaw::Constant => 1.0,
                WeightLaw::TwoPoint { a, b, p_a } => p_a * a.powi(k) + (1.0 - p_a) * b.powi(k),
                WeightLaw::ExpShifted { shift, rate } => {
                    // E[(s + X)^k] = sum_j C(k, j) s^{k-j} j! / rate^j
                    let mut total = 0.0;
                    let mut binom = 1.0;
                    let mut fact = 1.0;
                    for j in 0..=k {
                        if j > 0 {
                            binom = binom * (k - j + 1) as f64 / j as f64;
                            fact *= j as f64;
                        }
                        total += binom * shift.powi(k - j) * fact / rate.powi(j);
                    }
                    total
                }
                WeightLaw::Uniform { lo, hi } => {
                    if hi == lo {
                        lo.powi(k)
                    } else {
                        (hi.powi(k + 1) - lo.powi(k + 1)) / ((k + 1) as f64 * (hi - lo))
                    }
                }
                WeightLaw::TruncatedPareto { alpha, lo, hi } => {
                    let e = 1.0 - alpha;
                    let norm = (hi.powf(e) - lo.powf(e)) / e;
                    let ek = k as f64 + 1.0 - alpha;
                    let num = if ek.abs() < 1e-12 { (hi / lo).ln() } else { (hi.powf(ek) - lo.powf(ek)) / ek };
                    num / norm
                }
            }
        };
        Moments {
            m1: m(1),
            m2: m(2),
            m3: m(3),
            m4: m(4),
        }
    }
}

impl fmt::Display for WeightLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightLaw::Constant => write!(f, "constant"),
            WeightLaw::TwoPoint { a, b, p_a } => write!(f, "two-point:{a},{b},{p_a}"),
            WeightLaw::ExpShifted { shift, rate } => write!(f, "exp-shifted:{shift},{rate}"),
            WeightLaw::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            WeightLaw::TruncatedPareto { alpha, lo, hi } => write!(f, "pareto:{alpha},{lo},{hi}"),
        }
    }
}

impl FromStr for WeightLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("bad number in weight law {s:?}: {e}")))?
        };
        let want = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                invalid(format!("weight law {name:?} takes {k} parameters, got {}", nums.len()))
            }
        };
        let law = match name.trim() {
            "constant" => {
                want(0)?;
                WeightLaw::Constant
            }
            "two-point" => {
                want(3)?;
                WeightLaw::TwoPoint { a: nums[0], b: nums[1], p_a: nums[2] }
            }
            "exp-shifted" => {
                want(2)?;
                WeightLaw::ExpShifted { shift: nums[0], rate: nums[1] }
            }
            "uniform" => {
                want(2)?;
                WeightLaw::Uniform { lo: nums[0], hi: nums[1] }
            }
            "pareto" => {
                want(3)?;
                WeightLaw::TruncatedPareto { alpha: nums[0], lo: nums[1], hi: nums[2] }
            }
            other => return invalid(format!("unknown weight law {other:?}")),
        };
        law.validate()?;
        Ok(law)
    }
}

impl Serialize for WeightLaw {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeightLaw {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
