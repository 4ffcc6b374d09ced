//! Steps-to-goal: the optimal agent, then trained instances with and without
//! compaction (groups A/B/C).
//!
//!     cargo run --release --example stg_rollouts

use xcsf_gnmc::env::GridWorld;
use xcsf_gnmc::harness::{default_groups, run_stg_groups, Instance};
use xcsf_gnmc::oracle::GroundTruth;
use xcsf_gnmc::rollout::{stg_test, StgConfig};
use xcsf_gnmc::xcsf::{train, Hyperparams};

fn main() -> xcsf_gnmc::Result<()> {
    let world = GridWorld::deterministic();
    let truth = GroundTruth::solve(&world)?;
    let optimal = stg_test(&truth.q_star, &world, &StgConfig::default())?;
    println!("optimal agent: {optimal:?}");

    let hp = Hyperparams::default();
    let instances: Vec<Instance> = (0..2)
        .map(|i| {
            Ok(Instance {
                name: format!("pop-{i}"),
                population: train(&world, &hp, 150_000, 100 + i, None)?.population,
            })
        })
        .collect::<xcsf_gnmc::Result<_>>()?;
    for row in run_stg_groups(&instances, &world, &default_groups(), 5, hp.x0, 2, None)? {
        println!(
            "{} group {}: mean_stg {:?} successes {}/{} accuracy {:.3}",
            row.instance, row.group, row.report.mean_stg, row.report.successes, row.report.num_rollouts, row.policy_accuracy
        );
    }
    Ok(())
}
