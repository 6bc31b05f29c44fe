//! The coherence-based stability constants in action: an admissible
//! low-coherence instance where the bound certifies recovery, and the
//! reference array configuration, which violates the sufficient condition
//! yet still images (the practical support rule covers that regime).
//!
//! Run with: cargo run --release --example theory_bounds

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scatim::experiment::ExperimentConfig;
use scatim::geometry::{build_sensing_matrix, exact_recovery_coefficient, mutual_coherence, SensingMatrix};
use scatim::solver::{gelma_solve, theory_bounds, SolverSettings, SupportRule};

fn main() -> scatim::Result<()> {
    // admissible instance: tall random dictionary, M·ε < 1/2
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (n, k, m) = (256, 16, 2);
    let mut g = DMatrix::zeros(n, k);
    for j in 0..k {
        let mut col = DVector::from_fn(n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        col /= Complex64::new(col.norm(), 0.0);
        g.column_mut(j).copy_from(&col);
    }
    let sensing = SensingMatrix::from_raw_normalized(g.clone());
    let eps = mutual_coherence(&sensing)?;
    println!("random {n}x{k} dictionary: coherence ε = {eps:.3}, M = {m}, M·ε = {:.3}", eps * m as f64);

    let mut x0 = DMatrix::zeros(k, 2);
    x0[(3, 0)] = Complex64::new(1.2, 0.4);
    x0[(3, 1)] = Complex64::new(-0.5, 0.9);
    x0[(11, 0)] = Complex64::new(0.8, -0.7);
    x0[(11, 1)] = Complex64::new(1.1, 0.2);
    let clean = &g * &x0;
    let mut noise = DMatrix::from_fn(n, 2, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    noise *= Complex64::new(0.05 * clean.norm() / noise.norm(), 0.0);
    let b = &clean + &noise;

    let bounds = theory_bounds(eps, m, noise.norm());
    println!("noise energy ‖E‖_F = {:.4e}", noise.norm());
    println!("δ_min        = {:.4e}", bounds.delta_min.unwrap());
    println!("error bound  = {:.4e}", bounds.err_bound.unwrap());
    println!("detectability (row-norm level guaranteed recovered) = {:.4e}", bounds.detectability.unwrap());

    let settings = SolverSettings {
        delta: bounds.delta_min,
        ..Default::default()
    };
    let mut sol = gelma_solve(&sensing, &b, &settings)?;
    sol.extract_support(&SupportRule::Theory(&bounds));
    let err = (&sol.x - &x0).norm();
    println!(
        "recovered support {:?} (truth [3, 11]); ‖X−X₀‖_F = {err:.4e} ≤ bound: {}",
        sol.support,
        err <= bounds.err_bound.unwrap()
    );
    let erc = exact_recovery_coefficient(&sensing, &[3, 11])?;
    println!("ERC of the true support = {erc:.4} (positive certifies support-restricted recovery)");

    // the reference imaging configuration violates the sufficient condition
    let config = ExperimentConfig::default();
    let geom = config.build_geometry()?;
    let iw = config.build_window()?;
    let reference = build_sensing_matrix(&geom, &iw, true)?;
    let eps_ref = mutual_coherence(&reference)?;
    let ref_bounds = theory_bounds(eps_ref, 5, 1.0);
    println!(
        "\nreference array: ε = {eps_ref:.3}, M = 5, M·ε = {:.2} — condition violated: {}",
        5.0 * eps_ref,
        ref_bounds.violated
    );
    println!("(imaging still works there; the support rule falls back to 10% of the max row norm)");
    Ok(())
}
