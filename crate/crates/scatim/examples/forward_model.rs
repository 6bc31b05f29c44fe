//! Foldy-Lax forward model on the reference scene: build the response
//! matrix, quantify how much multiple scattering it carries, and export
//! everything as CSV.
//!
//! Run with: cargo run --release --example forward_model

use scatim::experiment::ExperimentConfig;
use scatim::forward::{
    extended_response_matrix, multiple_scattering_amount, response_matrix,
    single_scattering_response,
};
use scatim::io::{write_complex_matrix_csv, write_scene_csv};

fn main() -> scatim::Result<()> {
    let config = ExperimentConfig::default();
    let geom = config.build_geometry()?;
    let iw = config.build_window()?;
    let scene = config.build_scene(&iw)?;

    println!("array: {} sensors ({})", geom.len(), geom.kind());
    println!(
        "window: {}x{} pixels at pitch {}λ, {} unknowns",
        iw.counts().0,
        iw.counts().1,
        iw.pitch(),
        iw.len()
    );
    println!("scene: {} scatterers at grid indices {:?}", scene.sparsity(), scene.support());

    let p = response_matrix(&scene, &geom, &iw)?;
    println!("response matrix: {0}x{0}, asymmetry {1:.2e}", p.len(), p.symmetry_defect());

    let ms = multiple_scattering_amount(&scene, &geom, &iw)?;
    println!("multiple scattering vs single scattering: {ms:.2}%");

    let sv = p.singular_values();
    println!("leading singular values (rank should equal the scatterer count):");
    for j in 0..8 {
        println!("  σ_{} = {:.3e}", j + 1, sv[j]);
    }

    // cross-check the support-sized solve against the full-grid form on a
    // smaller window (the extended matrix is dense in K²)
    let small = scatim::geometry::ImageWindow::from_counts(iw.center(), 9, 9, 5.0)?;
    let small_scene = scatim::forward::ScattererScene::from_entries(
        small.len(),
        &[
            (12, scene.rho0()[scene.support()[0]]),
            (40, scene.rho0()[scene.support()[1]]),
            (68, scene.rho0()[scene.support()[2]]),
        ],
    )?;
    let p_support = response_matrix(&small_scene, &geom, &small)?;
    let p_extended = extended_response_matrix(&small_scene, &geom, &small)?;
    let rel = (p_support.matrix() - &p_extended).norm() / p_extended.norm();
    println!("support-form vs extended-form response (9x9 window): {rel:.2e} relative");

    let out = std::path::Path::new("out/forward_model");
    std::fs::create_dir_all(out)?;
    write_scene_csv(&out.join("scene.csv"), &scene)?;
    write_complex_matrix_csv(&out.join("response.csv"), p.matrix())?;
    write_complex_matrix_csv(
        &out.join("response_single_scattering.csv"),
        &single_scattering_response(&scene, &geom, &iw)?,
    )?;
    println!("CSV outputs in {}", out.display());
    Ok(())
}
