//! The exact level recursion of the (1,lambda) EA next to a simulation, and
//! the (1+1) EA given the same number of evaluations.
//!
//! ```bash
//! cargo run --release --example one_comma_lambda
//! ```

use fitness_levels::bounds::one_comma_lambda_recursion;
use fitness_levels::kernels::MutationKernel;
use fitness_levels::problems::onemax;
use fitness_levels::simulator::{run_many, AlgorithmConfig, Variant};

fn main() -> fitness_levels::Result<()> {
    let (n, lambda) = (6, 5);
    let q = 1.0 / (n as f64 + 1.0);
    let problem = onemax(n)?;
    let kernel = MutationKernel::Point { q };
    let (gamma, _) = problem.bound_pair(&kernel)?;
    let exact = one_comma_lambda_recursion(&gamma, &vec![0.0; n], lambda as u32, 30)?;

    let comma = AlgorithmConfig::new(
        Variant::OneCommaLambda { lambda },
        kernel.clone(),
        problem.clone(),
    )
    .with_t_max(30)
    .with_seed(9);
    let plus = AlgorithmConfig::new(Variant::OnePlusOne, kernel, problem)
        .with_t_max(30 * lambda as u64)
        .with_seed(9);
    let comma = run_many(&comma, 4000)?;
    let plus = run_many(&plus, 4000)?;
    println!(
        "{:>3} {:>8} {:>8} {:>12}",
        "t", "exact", "(1,5)", "(1+1) at 5t"
    );
    for t in (0..=30).step_by(5) {
        println!(
            "{t:>3} {:>8.4} {:>8.4} {:>12.4}",
            exact.at(t).unwrap()[n - 1],
            comma.level_probability(n, t).p_hat,
            plus.level_probability(n, t * lambda as u64).p_hat,
        );
    }
    Ok(())
}
