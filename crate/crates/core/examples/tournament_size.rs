//! The infinite-population recursion for several tournament sizes: larger
//! tournaments push more mass into the top level.
//!
//! ```bash
//! cargo run --example tournament_size
//! ```

use fitness_levels::bounds::infinite_population_recursion;
use fitness_levels::kernels::{block_gamma, vcp_block_params};

fn main() -> fitness_levels::Result<()> {
    let (r, r_tilde) = vcp_block_params(0.1)?;
    let gamma = block_gamma(8, r, r_tilde)?;
    let u0 = vec![0.0; 8];
    let sizes = [1u32, 2, 4, 10];
    let curves = sizes
        .iter()
        .map(|&s| infinite_population_recursion(&gamma, &u0, s, 80))
        .collect::<fitness_levels::Result<Vec<_>>>()?;

    print!("{:>4}", "t");
    for s in sizes {
        print!(" {:>8}", format!("s={s}"));
    }
    println!();
    for t in (0..=80).step_by(10) {
        print!("{t:>4}");
        for c in &curves {
            print!(" {:>8.4}", c.at(t).unwrap()[7]);
        }
        println!();
    }
    Ok(())
}
