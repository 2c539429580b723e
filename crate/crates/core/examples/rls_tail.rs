//! RLS on the capped LeadingOnes path: empirical tail of the hitting time
//! against the exponential tail bound and Markov's inequality.
//!
//! ```bash
//! cargo run --release --example rls_tail
//! ```

use fitness_levels::bounds::{
    closed_form_lower_bound_unimodal, markov_tail_bound, rls_exp_tail_bound,
};
use fitness_levels::kernels::MutationKernel;
use fitness_levels::problems::unimodal_path;
use fitness_levels::simulator::{run_many, AlgorithmConfig, Variant};

fn main() -> fitness_levels::Result<()> {
    let (n, ell) = (12, 13);
    let config = AlgorithmConfig::new(Variant::Rls, MutationKernel::Rls, unimodal_path(n, ell)?)
        .with_t_max(1500)
        .with_seed(5);
    let runs = run_many(&config, 2000)?;
    println!(
        "{:>5} {:>9} {:>9} {:>9} {:>9}",
        "t", "Pr{T>t}", "exp tail", "markov", "E[z_m]>="
    );
    for t in (0..=1500).step_by(150) {
        println!(
            "{t:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            runs.hit_tail(t).p_hat,
            rls_exp_tail_bound(n, ell, t)?.min(1.0),
            markov_tail_bound(n, ell, t)?.min(1.0),
            closed_form_lower_bound_unimodal(n, ell, t)?.max(0.0),
        );
    }
    Ok(())
}
