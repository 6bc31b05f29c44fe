//! Joint row-sparse recovery from several randomly chosen single-transducer
//! illuminations. More shots stabilize imaging against noise, though random
//! choices give no guarantee of diversity — occasionally more shots do
//! worse, which is the argument for the singular-vector illuminations.
//!
//! Run with: cargo run --release --example random_illuminations

use scatim::experiment::ExperimentConfig;
use scatim::forward::response_matrix;
use scatim::geometry::build_sensing_matrix;
use scatim::illumination::{random_illuminations, DataMatrix, IlluminationLabel};
use scatim::solver::{gelma_solve, SolverSettings, SupportRule};

fn main() -> scatim::Result<()> {
    let config = ExperimentConfig::default();
    let geom = config.build_geometry()?;
    let iw = config.build_window()?;
    let scene = config.build_scene(&iw)?;
    let sensing = build_sensing_matrix(&geom, &iw, true)?;
    let p = response_matrix(&scene, &geom, &iw)?;

    println!("true support: {:?}", scene.support());
    for (shots, noise_pct) in [(5usize, 10.0), (5, 20.0), (5, 50.0), (15, 20.0)] {
        let ills = random_illuminations(shots, geom.len(), 42)?;
        let fired: Vec<usize> = ills
            .iter()
            .map(|f| match f.label() {
                IlluminationLabel::Transducer(s) => s,
                _ => 0,
            })
            .collect();
        let data = DataMatrix::synthesize(&p, ills, noise_pct, 9)?;
        let settings = SolverSettings {
            delta: Some(data.noise_norm()),
            ..Default::default()
        };
        let mut sol = gelma_solve(&sensing, data.matrix(), &settings)?;
        sol.extract_support(&SupportRule::RelativeMax(0.1));
        let hits = sol
            .support
            .iter()
            .filter(|k| scene.support().contains(k))
            .count();
        // rank the recovered pixels by row norm to see where the truth sits
        let mut order: Vec<usize> = sol.support.clone();
        order.sort_by(|&a, &b| sol.row_norms[b].partial_cmp(&sol.row_norms[a]).unwrap());
        let top: Vec<usize> = order.iter().take(5).cloned().collect();
        let true_in_top = top.iter().filter(|k| scene.support().contains(k)).count();
        println!(
            "{shots:>2} shots (transducers {fired:?}) at {noise_pct:>4}% noise: {hits}/{} true pixels in a {}-pixel support; top-5 rows {top:?} ({true_in_top} true)",
            scene.sparsity(),
            sol.support.len()
        );
    }
    println!("(more random shots are not guaranteed to help; ghosts persist at high noise)");
    Ok(())
}
