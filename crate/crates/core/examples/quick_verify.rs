//! Runs the acceptance checks with reduced run counts and prints the
//! report.
//!
//! ```bash
//! cargo run --release --example quick_verify -- 1 4 7
//! ```

use fitness_levels::verify::{run_criterion, VerifyOptions, CRITERIA};

fn main() {
    let ids: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let ids = if ids.is_empty() {
        CRITERIA.to_vec()
    } else {
        ids
    };
    let opts = VerifyOptions {
        quick: true,
        ..Default::default()
    };
    for id in ids {
        print!("{}", run_criterion(id, &opts));
    }
}
