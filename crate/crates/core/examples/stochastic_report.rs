//! Slippery lake: train several instances and write the per-state optimal-action
//! frequency and action-distribution reports.
//!
//!     cargo run --release --example stochastic_report -- [out_dir] [budget]

use std::path::PathBuf;

use xcsf_gnmc::harness::{run_training_experiment, write_state_report, EnvVariant, ExperimentConfig};

fn main() -> xcsf_gnmc::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "slip-out".into()));
    let budget: u64 = args.next().map_or(200_000, |s| s.parse().expect("budget"));
    let cfg = ExperimentConfig {
        env: EnvVariant::Slippery,
        budget: Some(budget),
        trials: 5,
        workers: 5,
        ..Default::default()
    };
    let run = run_training_experiment(&cfg, &out)?;
    for (i, t) in run.traces.iter().enumerate() {
        let last = t.last().expect("trace");
        println!("trial {i}: mae {:.4} accuracy {:.4}", last.mae, last.policy_accuracy);
    }
    write_state_report(&cfg.env.world(), &run.instances, cfg.hyperparams.x0, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
