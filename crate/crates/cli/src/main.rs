use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rgmst::experiments::{self, Experiment, ExperimentConfig};
use rgmst::exploration::{bfw, excursion_components};
use rgmst::graphgen::CapacitySource;
use rgmst::gwcoupling::{height_tail, height_tail_exact};
use rgmst::mst::{edge_deletion, kruskal};
use rgmst::{Error, WeightVector};

#[derive(Parser)]
#[command(name = "rgmst", version, about = "Scaling experiments for minimum spanning trees of rank-1 random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Largest-component fraction across c at p = c / ell_n
    Phase(Common),
    /// Component statistics inside the critical window
    Window(Common),
    /// Diameter of the minimum spanning tree against n
    Diameter(Common),
    /// Typical distance in the giant's spanning tree against n
    Typical(Common),
    /// Typical distance with power-law weights
    Powerlaw(Common),
    /// Galton-Watson coupling and height-tail checks
    Gwcheck(Common),
    /// Quick internal consistency checks
    Selftest,
}

#[derive(Args)]
struct Common {
    /// TOML file with ExperimentConfig keys
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for raw.csv and summary.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated sizes, e.g. 4096,8192,16384
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
}

impl Common {
    fn config(self, kind: Experiment) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::for_experiment(kind),
        };
        cfg.experiment = kind;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = self.out {
            cfg.out_dir = o;
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        if let Some(g) = self.n_grid {
            cfg.n_grid = g;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn campaign(kind: Experiment, args: Common) -> Result<(), Error> {
    let cfg = args.config(kind)?;
    let rep = experiments::run_campaign(&cfg)?;
    match &rep.outcome.scaling {
        Some(fit) => println!(
            "{}: slope {:.4} +/- {:.4} (target {})",
            kind,
            fit.slope,
            fit.slope_ci,
            rep.outcome.target.map_or("none".into(), |t| format!("{t:.4}"))
        ),
        None => println!("{kind}: done"),
    }
    println!("raw: {}", rep.raw_path.display());
    println!("summary: {}", rep.summary_path.display());
    Ok(())
}

fn check(name: &str, ok: bool, failures: &mut usize) {
    println!("{} {name}", if ok { "ok  " } else { "FAIL" });
    if !ok {
        *failures += 1;
    }
}

fn selftest() -> Result<(), Error> {
    let mut failures = 0;

    let mut same = true;
    for s in 0..20u64 {
        let v = WeightVector::make_constant(60)?;
        let g = CapacitySource::exact_capacities(&v, s)?.snapshot(0.05)?;
        same &= kruskal(&g).edge_pairs() == edge_deletion(&g).edge_pairs();
    }
    check("kruskal matches edge deletion", same, &mut failures);

    let mut walk_ok = true;
    for s in 0..20u64 {
        let v = WeightVector::make_constant(80)?;
        let g = CapacitySource::exact_capacities(&v, s)?.snapshot(1.5 / 80.0)?;
        let t = bfw(&g, &v, s)?;
        walk_ok &= t.verify().is_ok() && excursion_components(&t).is_ok();
    }
    check("exploration walk is consistent", walk_ok, &mut failures);

    let est = height_tail(1.0, 1, 100_000, 7)?;
    let exact = height_tail_exact(1.0, 1);
    check("critical height tail at m = 1", (est.probability - exact).abs() < 4.0 * est.stderr, &mut failures);

    let base = ExperimentConfig {
        n_grid: vec![128, 256, 512],
        replicates: 3,
        ..ExperimentConfig::for_experiment(Experiment::Diameter)
    };
    let a = experiments::run(&ExperimentConfig { jobs: 1, ..base.clone() })?;
    let b = experiments::run(&ExperimentConfig { jobs: 3, ..base })?;
    check("results do not depend on thread count", a.rows == b.rows, &mut failures);

    if failures > 0 {
        return Err(Error::Invariant(format!("{failures} self-test check(s) failed")));
    }
    println!("all self-test checks passed");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Phase(a) => campaign(Experiment::Phase, a),
        Command::Window(a) => campaign(Experiment::Window, a),
        Command::Diameter(a) => campaign(Experiment::Diameter, a),
        Command::Typical(a) => campaign(Experiment::Typical, a),
        Command::Powerlaw(a) => campaign(Experiment::Powerlaw, a),
        Command::Gwcheck(a) => campaign(Experiment::Gwcheck, a),
        Command::Selftest => selftest(),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
