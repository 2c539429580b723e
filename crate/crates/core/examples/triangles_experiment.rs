//! Monte-Carlo runs on 8 disjoint triangles next to the bounds, written as
//! a long-format CSV and an SVG plot.
//!
//! ```bash
//! cargo run --release --example triangles_experiment -- out/
//! ```

use std::path::PathBuf;

use fitness_levels::experiment::{cmd_experiment, parse_config};

const SPEC: &str = r#"
[[experiment]]
name = "triangles"
preset = "vcp:m=8,pm=0.1"
lambda = [1, 2, 10]
s = [2]
bounds = ["lower-linear", "upper-jensen"]
runs = 300
t_max = 100
t_step = 5
seed = 1
"#;

fn main() -> fitness_levels::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("triangles"), PathBuf::from);
    for spec in parse_config(SPEC)? {
        let (csv, svg) = cmd_experiment(&spec, &out)?;
        println!("wrote {} and {}", csv.display(), svg.display());
    }
    Ok(())
}
