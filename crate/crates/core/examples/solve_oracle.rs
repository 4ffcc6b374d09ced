//! Solve FrozenLake8x8 exactly and print V* and the optimal advocacy policy.
//!
//!     cargo run --release --example solve_oracle -- [p_slip]

use xcsf_gnmc::env::{GridWorld, State};
use xcsf_gnmc::oracle::GroundTruth;

fn main() -> xcsf_gnmc::Result<()> {
    let p_slip: f64 = std::env::args().nth(1).map_or(0.0, |s| s.parse().expect("p_slip"));
    let world = GridWorld::frozen_lake_8x8(p_slip)?;
    let truth = GroundTruth::solve(&world)?;

    println!("p_slip = {p_slip}\n\nV*:");
    for y in 0..world.height() {
        let row: Vec<String> = (0..world.width())
            .map(|x| match truth.q_star.max_value(State::new(x, y)) {
                Some(v) => format!("{v:6.3}"),
                None if world.is_goal(State::new(x, y)) => format!("{:>6}", "G"),
                None => format!("{:>6}", "H"),
            })
            .collect();
        println!("{}", row.join(" "));
    }
    println!("\noptimal actions [L,D,R,U]:");
    for (s, adv) in truth.pi_star.iter() {
        if adv.count() > 1 {
            println!("  {s} {adv}  (tie)");
        }
    }
    Ok(())
}
