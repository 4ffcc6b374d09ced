//! Train a few instances in parallel and sweep GNMC over a coarse rho grid,
//! writing sweep.csv and sweep_mean.csv.
//!
//!     cargo run --release --example compaction_sweep -- [out_dir]

use std::path::PathBuf;

use xcsf_gnmc::compaction::MassFunction;
use xcsf_gnmc::harness::{run_compaction_sweep, run_training_experiment, EnvVariant, ExperimentConfig};

fn main() -> xcsf_gnmc::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sweep-out".into()));
    let cfg = ExperimentConfig {
        env: EnvVariant::Deterministic,
        budget: Some(100_000),
        trials: 3,
        workers: 3,
        seed: 11,
        ..Default::default()
    };
    let run = run_training_experiment(&cfg, &out)?;
    let rhos = [0.0, 0.25, 0.5, 0.75, 0.9, 0.99];
    let rows = run_compaction_sweep(
        &run.instances,
        &cfg.env.world(),
        &MassFunction::ALL,
        &rhos,
        cfg.hyperparams.x0,
        cfg.workers,
        Some(&out),
    )?;
    for r in rows.iter().filter(|r| r.instance == "pop-0") {
        println!(
            "{:<8} rho {:<5} mae {:.5} acc {:.4} macro {}",
            r.mass, r.rho, r.report.mae, r.report.policy_accuracy, r.report.macro_count
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
