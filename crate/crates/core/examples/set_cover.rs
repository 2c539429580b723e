//! The set-cover family in unitation form: stationary vector, horizon and
//! the linear lower bound on reaching a cover.
//!
//! ```bash
//! cargo run --example set_cover
//! ```

use fitness_levels::bounds::{
    balas_grouped_ehrenfest, balas_horizon, balas_lower_bounds, balas_stationary_vector,
    lower_bound_linear,
};
use fitness_levels::kernels::BalasTop;
use fitness_levels::PopulationVector;

fn main() -> fitness_levels::Result<()> {
    for n in [8, 12, 16] {
        let m = n / 2;
        let q = 1.0 / (n as f64 + 1.0);
        let v = balas_stationary_vector(n)?;
        let grouped = balas_grouped_ehrenfest(n)?;
        let (c, t) = balas_horizon(n, v[m - 1])?;
        let pessimistic = balas_lower_bounds(n, q, BalasTop::Pessimistic)?;
        let safe = balas_lower_bounds(n, q, BalasTop::Safe)?;
        let bound = lower_bound_linear(&safe, &PopulationVector::zeros(m), t)?;
        println!("n = {n}");
        println!(
            "  v_1 = {:.4} (grouped chain {:.4}), v_m = {:.4}",
            v[0],
            grouped[0],
            v[m - 1]
        );
        println!(
            "  pessimistic matrix monotone: {}",
            pessimistic.is_monotone()
        );
        if let Some(at) = pessimistic.monotone_violation() {
            println!("    {at}");
        }
        println!(
            "  horizon t = {t} (c = {c:.3}), bound on E[z_m] = {:.4}",
            bound.trajectory.last().unwrap()[m - 1]
        );
    }
    Ok(())
}
