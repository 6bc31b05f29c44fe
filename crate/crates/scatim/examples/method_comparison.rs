//! Side-by-side comparison of the imaging methods on one scene: single
//! illumination, joint recovery from random and from singular-vector
//! illuminations, and MUSIC.
//!
//! Run with: cargo run --release --example method_comparison

use scatim::experiment::{compare_methods, CompareMethod, ExperimentConfig};

fn main() -> scatim::Result<()> {
    let methods = [
        CompareMethod::Smv,
        CompareMethod::MmvRandom,
        CompareMethod::MmvOptimal,
        CompareMethod::Music,
    ];
    for noise in [0.0, 20.0] {
        let mut config = ExperimentConfig::default();
        config.noise_pct = noise;
        println!("=== noise {noise}% ===");
        let table = compare_methods(&config, &methods)?;
        print!("{table}");
        println!();
    }
    Ok(())
}
