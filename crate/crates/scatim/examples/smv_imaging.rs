//! Two-step imaging from a single illumination: recover the effective
//! sources by ℓ1 minimization, then divide out the exciting fields to get
//! the true reflectivities. Noise-free recovery is exact; with noise the
//! support degrades, which is what motivates multiple illuminations.
//!
//! Run with: cargo run --release --example smv_imaging

use scatim::experiment::ExperimentConfig;
use scatim::forward::response_matrix;
use scatim::geometry::build_sensing_matrix;
use scatim::illumination::{point_illumination, DataMatrix};
use scatim::reflectivity::recover_reflectivities;
use scatim::solver::{gelma_solve, SolverSettings, SupportRule};

fn main() -> scatim::Result<()> {
    let config = ExperimentConfig::default();
    let geom = config.build_geometry()?;
    let iw = config.build_window()?;
    let scene = config.build_scene(&iw)?;
    let sensing = build_sensing_matrix(&geom, &iw, true)?;
    let p = response_matrix(&scene, &geom, &iw)?;
    // single illumination from the central transducer
    let f = point_illumination(50, geom.len())?;

    for noise_pct in [0.0, 10.0] {
        println!("--- noise {noise_pct}% ---");
        let data = DataMatrix::synthesize(&p, vec![f.clone()], noise_pct, 7)?;
        let settings = SolverSettings {
            delta: (noise_pct > 0.0).then_some(data.noise_norm()),
            ..Default::default()
        };
        let mut sol = gelma_solve(&sensing, data.matrix(), &settings)?;
        sol.extract_support(&SupportRule::RelativeMax(0.1));
        println!(
            "solver: {} iterations, residual {:.2e}, support {:?}",
            sol.iterations, sol.residual, sol.support
        );
        if sol.support.is_empty() {
            println!("no support recovered");
            continue;
        }
        let est = recover_reflectivities(&sol, &sensing, &iw, data.illuminations())?;
        let mut order: Vec<usize> = (0..est.support.len()).collect();
        order.sort_by(|&a, &b| est.rho[b].norm().partial_cmp(&est.rho[a].norm()).unwrap());
        println!("  strongest recovered pixels (? marks ghosts):");
        println!("  pixel     true |rho|   recovered |rho|");
        for &i in order.iter().take(8) {
            let k = est.support[i];
            let truth = scene.rho0()[k].norm();
            let mark = if scene.support().contains(&k) { ' ' } else { '?' };
            println!(
                "  {k:>5}{mark}   {truth:>9.4}   {:>15.6}{}",
                est.rho[i].norm(),
                if est.screened[i] { "  [screened]" } else { "" }
            );
        }
        let hits = est
            .support
            .iter()
            .filter(|k| scene.support().contains(k))
            .count();
        let missed: Vec<usize> = scene
            .support()
            .iter()
            .cloned()
            .filter(|k| !est.support.contains(k))
            .collect();
        println!(
            "  summary: {hits}/{} true pixels recovered, {} ghosts, missed {missed:?}",
            scene.sparsity(),
            est.support.len() - hits
        );
    }
    Ok(())
}
