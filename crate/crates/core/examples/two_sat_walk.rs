//! Random walk on a planted 2-SAT formula compared with the gambler's-ruin
//! chain built from its lower bounds.
//!
//! ```bash
//! cargo run --release --example two_sat_walk
//! ```

use fitness_levels::bounds::AssociatedChain;
use fitness_levels::kernels::{lower_bounds_for_kernel, planted_two_sat, LowerBoundPreset};
use fitness_levels::problems::two_sat_instance;
use fitness_levels::simulator::{run_many, AlgorithmConfig, InitRule, Variant};

fn main() -> fitness_levels::Result<()> {
    let n = 20;
    let (formula, planted) = planted_two_sat(n, 60, 11)?;
    let start = planted.complement();
    let problem = two_sat_instance(formula, planted)?;

    let a = lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m: n })?;
    let chain = AssociatedChain::from_lower_bounds(&a)?;
    let mut p0 = vec![0.0; n + 1];
    p0[0] = 1.0;
    let median = chain
        .first_time_reaching(&p0, n, 0.5, 100_000)
        .expect("absorbing");
    println!(
        "chain absorbs with probability 1/2 after {median} steps ({:.3} n^2)",
        median as f64 / (n * n) as f64
    );

    let config = AlgorithmConfig::new(
        Variant::Ea { lambda: 1, s: 1 },
        problem.default_kernel(),
        problem,
    )
    .with_init(InitRule::Fixed(start))
    .with_t_max(median)
    .with_seed(3);
    let runs = run_many(&config, 1000)?;
    let hit = runs.hit_by(median);
    println!(
        "walk satisfied the formula by then in {:.3} +- {:.3} of runs",
        hit.p_hat,
        hit.half_width()
    );
    Ok(())
}
