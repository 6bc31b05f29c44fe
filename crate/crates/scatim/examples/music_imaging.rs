//! MUSIC baseline: beamform the normalized steering vectors against the
//! signal subspace of the measured response matrix. The subspace must span
//! at least as many singular vectors as there are scatterers; beyond that
//! the image barely changes.
//!
//! Run with: cargo run --release --example music_imaging

use scatim::experiment::{noisy_response, ExperimentConfig};
use scatim::forward::response_matrix;
use scatim::io::ImageGrid;
use scatim::music::music_image;

fn main() -> scatim::Result<()> {
    let config = ExperimentConfig::default();
    let geom = config.build_geometry()?;
    let iw = config.build_window()?;
    let scene = config.build_scene(&iw)?;
    let p = response_matrix(&scene, &geom, &iw)?;
    let measured = noisy_response(&p, 50.0, 5)?;

    println!("true pixels: {:?} (50% noise on the measured response)", scene.support());
    for nu in [1usize, 2, 3, 4, 5, 12] {
        let img = music_image(&measured, &iw, &geom, nu)?;
        let peaks = img.top_local_maxima(&iw, scene.sparsity());
        let hits = peaks.iter().filter(|k| scene.support().contains(k)).count();
        println!(
            "nu = {nu:>2}: top-{} local maxima {:?} — {hits}/{} true",
            scene.sparsity(),
            peaks,
            scene.sparsity()
        );
        if nu == 5 {
            let out = std::path::Path::new("out/music");
            std::fs::create_dir_all(out)?;
            let grid = ImageGrid::new(&iw, img.values.clone(), scene.support().to_vec())?;
            grid.write_csv(&out.join("music_nu5.csv"))?;
            grid.write_pgm(&out.join("music_nu5.pgm"))?;
            println!("        image written to {}", out.display());
        }
    }
    Ok(())
}
