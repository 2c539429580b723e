//! Bound matrices round-trip through CSV; a hand-edited matrix that breaks
//! monotonicity is rejected with the offending entry.
//!
//! ```bash
//! cargo run --example bound_matrix_csv
//! ```

use fitness_levels::bounds::lower_bound_linear;
use fitness_levels::kernels::point_mutation_gamma;
use fitness_levels::{BoundKind, BoundMatrix, PopulationVector};

fn main() -> fitness_levels::Result<()> {
    let gamma = point_mutation_gamma(4, 0.2)?;
    let mut text = Vec::new();
    gamma.write_csv(&mut text)?;
    println!("{}", String::from_utf8_lossy(&text));

    let back = BoundMatrix::read_csv(text.as_slice(), BoundKind::Lower)?;
    println!("round trip equal: {}", back.rows() == gamma.rows());

    let mut edited = back.clone();
    edited.set_entry(2, 2, 0.1);
    match lower_bound_linear(&edited, &PopulationVector::zeros(4), 10) {
        Ok(_) => println!("accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
