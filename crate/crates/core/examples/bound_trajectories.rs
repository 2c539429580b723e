//! Lower and upper bounds on the expected population vector for OneMax with
//! point mutation, printed side by side with the associated chain.
//!
//! ```bash
//! cargo run --example bound_trajectories
//! ```

use fitness_levels::bounds::{lower_bound_chain, lower_bound_linear, upper_bound_jensen};
use fitness_levels::kernels::MutationKernel;
use fitness_levels::problems::onemax;
use fitness_levels::PopulationVector;

fn main() -> fitness_levels::Result<()> {
    let n = 6;
    let problem = onemax(n)?;
    let kernel = MutationKernel::Point {
        q: 1.0 / (n as f64 + 1.0),
    };
    let (lower, upper) = problem.bound_pair(&kernel)?;
    println!("monotone: {}", lower.is_monotone());

    let z0 = PopulationVector::zeros(n);
    let linear = lower_bound_linear(&lower, &z0, 60)?;
    println!("certified by {:?}", linear.certificate);
    if let Some(check) = &linear.closed_form {
        println!("closed form agrees to {:.1e}", check.max_discrepancy);
    }

    let mut p0 = vec![0.0; n + 1];
    p0[0] = 1.0;
    let chain = lower_bound_chain(&lower, problem.partition(), &p0, 60)?;
    let tournament = upper_bound_jensen(&upper, &z0, 3, 60)?;

    println!(
        "{:>4} {:>10} {:>10} {:>10}",
        "t", "linear", "chain", "s=3 upper"
    );
    for t in (0..=60).step_by(10) {
        println!(
            "{t:>4} {:>10.5} {:>10.5} {:>10.5}",
            linear.trajectory.at(t).unwrap()[n - 1],
            chain.at(t).unwrap()[n - 1],
            tournament.at(t).unwrap()[n - 1],
        );
    }
    Ok(())
}
