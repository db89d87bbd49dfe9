use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphgen::{CapacityMode, DEFAULT_DENSE_LIMIT};
use crate::weights::WeightLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Phase,
    Window,
    Diameter,
    Typical,
    Powerlaw,
    Gwcheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Phase,
        Experiment::Window,
        Experiment::Diameter,
        Experiment::Typical,
        Experiment::Powerlaw,
        Experiment::Gwcheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Phase => "phase",
            Experiment::Window => "window",
            Experiment::Diameter => "diameter",
            Experiment::Typical => "typical",
            Experiment::Powerlaw => "powerlaw",
            Experiment::Gwcheck => "gwcheck",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Capacities used for the spanning tree in typical-distance runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// The graph's own exponential capacities.
    #[default]
    Coupled,
    /// Fresh i.i.d. uniform capacities on the giant component.
    Iid,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Coupled => "coupled",
            Variant::Iid => "iid",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coupled" => Ok(Variant::Coupled),
            "iid" => Ok(Variant::Iid),
            _ => Err(Error::Config(format!("unknown variant `{s}` (expected coupled or iid)"))),
        }
    }
}

/// A campaign description. Every field is a top-level key of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_grid: Vec<usize>,
    pub weights: WeightLaw,
    pub capacity_mode: CapacityMode,
    /// Supercritical parameter for `typical` and `powerlaw`, `p = c / ell_n`.
    pub c: f64,
    pub c_grid: Vec<f64>,
    pub f_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// 0 uses every core, 1 runs sequentially.
    pub jobs: usize,
    pub alpha: f64,
    pub variant: Variant,
    /// Sampled pairs per replicate for typical distances; 0 averages over all pairs.
    pub pairs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Diameter,
            n_grid: (12..=17).map(|k| 1usize << k).collect(),
            weights: WeightLaw::Constant,
            capacity_mode: CapacityMode::Poissonized,
            c: 2.0,
            c_grid: vec![0.5, 1.0, 2.0],
            f_grid: vec![8.0],
            replicates: 50,
            seed: 1,
            out_dir: PathBuf::from("results"),
            jobs: 0,
            alpha: 3.5,
            variant: Variant::Coupled,
            pairs: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn for_experiment(experiment: Experiment) -> Self {
        let mut cfg = Self {
            experiment,
            ..Self::default()
        };
        if experiment == Experiment::Gwcheck {
            cfg.n_grid = vec![200];
            cfg.replicates = 10_000;
        }
        cfg
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg = Self::parse(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without validating, so callers can override keys first.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_grid.is_empty() {
            return bad("n_grid is empty".into());
        }
        if self.n_grid[0] < 2 {
            return bad("n_grid entries must be at least 2".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be strictly increasing".into());
        }
        if *self.n_grid.last().unwrap() > u32::MAX as usize {
            return bad("n_grid entries must fit in 32 bits".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        self.weights.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.capacity_mode == CapacityMode::Exact && *self.n_grid.last().unwrap() > DEFAULT_DENSE_LIMIT {
            return bad(format!("exact capacities are limited to n <= {DEFAULT_DENSE_LIMIT}"));
        }
        match self.experiment {
            Experiment::Phase => {
                if self.c_grid.is_empty() || self.c_grid.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
                    return bad("c_grid must be non-empty with positive entries".into());
                }
                if self.c_grid.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("c_grid must be strictly increasing".into());
                }
            }
            Experiment::Window => {
                if self.f_grid.is_empty() || self.f_grid.iter().any(|&f| !(f > 0.0 && f.is_finite())) {
                    return bad("f_grid must be non-empty with positive entries".into());
                }
                if self.f_grid.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("f_grid must be strictly increasing".into());
                }
                let n0 = self.n_grid[0] as f64;
                let f_max = *self.f_grid.last().unwrap();
                if f_max > n0.powf(0.25) {
                    return bad(format!("f = {f_max} exceeds n^(1/4) = {:.3} at n = {n0}", n0.powf(0.25)));
                }
            }
            Experiment::Typical | Experiment::Powerlaw => {
                if !(self.c > 1.0 && self.c.is_finite()) {
                    return bad(format!("c must exceed 1, got {}", self.c));
                }
                if self.experiment == Experiment::Powerlaw && !(self.alpha > 3.0 && self.alpha <= 4.0) {
                    return bad(format!("alpha must lie in (3, 4], got {}", self.alpha));
                }
            }
            Experiment::Diameter | Experiment::Gwcheck => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for e in Experiment::ALL {
            let cfg = ExperimentConfig::for_experiment(e);
            cfg.validate().unwrap();
            assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
            assert_eq!(e.as_str().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn parses_flat_file() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
experiment = "typical"
n_grid = [100, 200, 400]
weights = "two-point:0.5,2,0.6667"
capacity_mode = "exact"
variant = "iid"
replicates = 3
seed = 42
"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::Typical);
        assert_eq!(cfg.variant, Variant::Iid);
        assert_eq!(cfg.capacity_mode, CapacityMode::Exact);
        assert_eq!(cfg.n_grid, vec![100, 200, 400]);
        assert_eq!(cfg.c, 2.0);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "n_grid = [10, 10]",
            "n_grid = []",
            "replicates = 0",
            "unknown_key = 1",
            "experiment = \"nope\"",
            "weights = \"uniform:0,1\"",
            "experiment = \"typical\"\nc = 0.9",
            "experiment = \"powerlaw\"\nalpha = 3.0",
            "experiment = \"window\"\nn_grid = [4096]\nf_grid = [9]",
            "capacity_mode = \"exact\"\nn_grid = [100, 100000]",
            "seed = \"x\"",
        ] {
            assert!(matches!(ExperimentConfig::from_toml_str(text), Err(Error::Config(_))), "{text}");
        }
        assert!(ExperimentConfig::from_toml_str("experiment = \"window\"\nn_grid = [4096]\nf_grid = [8]").is_ok());
    }
}
