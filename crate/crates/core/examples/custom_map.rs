//! Any rectangular S/F/H/G map works with the oracle, the learner and GNMC.
//!
//!     cargo run --release --example custom_map

use xcsf_gnmc::compaction::{gnmc, CompactionConfig, MassFunction};
use xcsf_gnmc::env::{GridWorld, DEFAULT_GAMMA};
use xcsf_gnmc::metrics::evaluate;
use xcsf_gnmc::oracle::GroundTruth;
use xcsf_gnmc::xcsf::{train, Hyperparams, InputSpace};

const MAP: &str = "\
SFFF
FHFH
FFFH
HFFG
";

fn main() -> xcsf_gnmc::Result<()> {
    let world = GridWorld::parse_map(MAP, 0.0, DEFAULT_GAMMA)?;
    let truth = GroundTruth::solve(&world)?;
    let hp = Hyperparams {
        pop_size: 800,
        ..Default::default()
    };
    let space = InputSpace::of_world(&world);
    let pop = train(&world, &hp, 50_000, 3, None)?.population;
    let compacted = gnmc(&pop, &world, &CompactionConfig::new(MassFunction::Fit, 0.99)?)?;
    for (label, p) in [("trained", &pop), ("compacted", &compacted)] {
        let r = evaluate(&world, &truth, &p.predictor(&space, hp.x0), p.macro_count(), p.micro_count())?;
        println!("{label:<10} mae {:.4} accuracy {:.3} macro {}", r.mae, r.policy_accuracy, r.macro_count);
    }
    Ok(())
}
