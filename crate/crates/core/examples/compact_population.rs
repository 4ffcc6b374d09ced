//! Train a population, then compact it with each mass function at rho = 0.99.
//!
//!     cargo run --release --example compact_population

use xcsf_gnmc::compaction::{gnmc, CompactionConfig, MassFunction};
use xcsf_gnmc::env::GridWorld;
use xcsf_gnmc::metrics::evaluate;
use xcsf_gnmc::oracle::GroundTruth;
use xcsf_gnmc::xcsf::{train, Hyperparams, InputSpace, Population};

fn main() -> xcsf_gnmc::Result<()> {
    let world = GridWorld::deterministic();
    let truth = GroundTruth::solve(&world)?;
    let hp = Hyperparams::default();
    let space = InputSpace::of_world(&world);
    let pop = train(&world, &hp, 200_000, 7, None)?.population;

    let show = |label: &str, p: &Population| -> xcsf_gnmc::Result<()> {
        let r = evaluate(&world, &truth, &p.predictor(&space, hp.x0), p.macro_count(), p.micro_count())?;
        println!(
            "{label:<12} mae {:.5}  accuracy {:.4}  macro {:>5}  micro {:>5}",
            r.mae, r.policy_accuracy, r.macro_count, r.micro_count
        );
        Ok(())
    };
    show("trained", &pop)?;
    for mass in MassFunction::ALL {
        let compacted = gnmc(&pop, &world, &CompactionConfig::new(mass, 0.99)?)?;
        show(mass.name(), &compacted)?;
    }
    Ok(())
}
