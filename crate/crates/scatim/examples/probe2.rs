// temporary probe: multiplier clamping at the discrepancy level
use nalgebra::DMatrix;
use num_complex::Complex64;
use scatim::experiment::ExperimentConfig;
use scatim::forward::response_matrix;
use scatim::geometry::build_sensing_matrix;
use scatim::illumination::{optimal_illuminations, point_illumination, DataMatrix};
use scatim::solver::spectral_norm_estimate;
use std::time::Instant;

fn clamped_gelma(
    g: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    delta: f64,
    tau_scale: f64,
    max_iters: usize,
) -> (DMatrix<Complex64>, usize, f64) {
    let k = g.ncols();
    let nu = b.ncols();
    let sigma1 = spectral_norm_estimate(g);
    let step = 0.9 / (sigma1 * sigma1);
    let gtb = g.ad_mul(b);
    let mut worst = 0.0_f64;
    for i in 0..k {
        let mut s = 0.0;
        for j in 0..nu {
            s += gtb[(i, j)].norm_sqr();
        }
        worst = worst.max(s.sqrt());
    }
    let tau = tau_scale * worst;
    let shrink = step * tau;
    let sc = Complex64::new(step, 0.0);

    let mut x: DMatrix<Complex64> = DMatrix::zeros(k, nu);
    let mut z: DMatrix<Complex64> = DMatrix::zeros(b.nrows(), nu);
    let mut iters = 0;
    let mut res = 0.0;
    let mut streak = 0;
    for it in 1..=max_iters {
        iters = it;
        let r = b - g * &x;
        res = r.norm();
        // multiplier grows only while the residual exceeds the noise budget
        if res > delta {
            for (zi, ri) in z.iter_mut().zip(r.iter()) {
                *zi += sc * ri;
            }
        }
        let t = &z + &r;
        let y = &x + g.adjoint() * &t * sc;
        let mut diff = 0.0;
        let mut norm = 0.0;
        let mut xn = y.clone();
        for i in 0..k {
            let mut row = 0.0;
            for j in 0..nu {
                row += y[(i, j)].norm_sqr();
            }
            let row = row.sqrt();
            let scale = if row > shrink { (row - shrink) / row } else { 0.0 };
            for j in 0..nu {
                let v = y[(i, j)] * scale;
                diff += (v - x[(i, j)]).norm_sqr();
                norm += v.norm_sqr();
                xn[(i, j)] = v;
            }
        }
        x = xn;
        let rel = if norm > 0.0 { (diff / norm).sqrt() } else { f64::INFINITY };
        if rel < 1e-8 {
            streak += 1;
            if streak >= 2 {
                break;
            }
        } else {
            streak = 0;
        }
    }
    (x, iters, res)
}

fn main() {
    let config = ExperimentConfig::default();
    let geom = config.build_geometry().unwrap();
    let iw = config.build_window().unwrap();
    let scene = config.build_scene(&iw).unwrap();
    let sensing = build_sensing_matrix(&geom, &iw, true).unwrap();
    let p = response_matrix(&scene, &geom, &iw).unwrap();
    println!("truth {:?}", scene.support());
    for (nu, noise) in [(3usize, 50.0), (12, 50.0), (1, 10.0), (5, 20.0)] {
        let ills = if nu == 1 {
            vec![point_illumination(50, geom.len()).unwrap()]
        } else {
            optimal_illuminations(&p, nu).unwrap()
        };
        let dm = DataMatrix::synthesize(&p, ills, noise, 23).unwrap();
        let t = Instant::now();
        let (x, iters, res) = clamped_gelma(
            sensing.matrix(),
            dm.matrix(),
            dm.noise_norm(),
            0.1,
            50_000,
        );
        let row_norm = |i: usize| -> f64 {
            (0..x.ncols()).map(|j| x[(i, j)].norm_sqr()).sum::<f64>().sqrt()
        };
        let max = (0..x.nrows()).map(row_norm).fold(0.0, f64::max);
        let support: Vec<usize> = (0..x.nrows()).filter(|&i| row_norm(i) > 0.1 * max).collect();
        let hits = support.iter().filter(|k| scene.support().contains(k)).count();
        println!(
            "nu {nu:>2} noise {noise:>3}%: iters {iters:>6} res/delta {:.3} support size {:>4} recall {hits}/5 support {:?} ({:?})",
            res / dm.noise_norm(),
            support.len(),
            if support.len() <= 12 { format!("{support:?}") } else { "…".into() },
            t.elapsed()
        );
    }
}
