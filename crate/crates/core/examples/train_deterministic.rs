//! Train one XCSF instance on the deterministic lake and watch it converge.
//!
//!     cargo run --release --example train_deterministic -- [budget] [seed]

use xcsf_gnmc::env::GridWorld;
use xcsf_gnmc::oracle::GroundTruth;
use xcsf_gnmc::xcsf::{train, Hyperparams, TraceMonitor};

fn main() -> xcsf_gnmc::Result<()> {
    let mut args = std::env::args().skip(1);
    let budget: u64 = args.next().map_or(100_000, |s| s.parse().expect("budget"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let world = GridWorld::deterministic();
    let truth = GroundTruth::solve(&world)?;
    let monitor = TraceMonitor {
        truth: &truth,
        cadence: 10_000,
    };
    let out = train(&world, &Hyperparams::default(), budget, seed, Some(monitor))?;

    println!("{:>8} {:>8} {:>8} {:>6} {:>6}", "step", "mae", "acc", "macro", "micro");
    for p in &out.trace {
        println!(
            "{:>8} {:>8.4} {:>8.4} {:>6} {:>6}",
            p.step, p.mae, p.policy_accuracy, p.macro_count, p.micro_count
        );
    }
    println!("{} episodes", out.episodes);
    Ok(())
}
