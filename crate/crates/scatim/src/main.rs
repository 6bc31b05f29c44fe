//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scatim::coherence::{planar_coherence_curve, spherical_coherence_curve, PlanarOrientation};
use scatim::experiment::{
    compare_methods, run_experiment, write_comparison_csv, CompareMethod, ExperimentConfig,
    IlluminationMode, Method,
};
use scatim::forward::response_matrix;
use scatim::geometry::{build_sensing_matrix, exact_recovery_coefficient, mutual_coherence};
use scatim::io::{write_complex_matrix_csv, write_curve_csv};
use scatim::solver::theory_bounds;

#[derive(Parser)]
#[command(
    name = "scatim",
    about = "Active-array imaging with multiple scattering: synthesis, inversion, coherence studies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the response matrix and data for a config and write CSVs.
    Synthesize {
        /// Config file (key = value sections); omit for the built-in default.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the imaging pipeline and write images plus a recovered table.
    Image {
        #[arg(long)]
        config: Option<PathBuf>,
        /// smv | mmv | music
        #[arg(long)]
        method: Option<Method>,
        /// point:S | random:N | optimal:N
        #[arg(long)]
        illum: Option<IlluminationMode>,
        /// Additive noise in percent of the signal energy.
        #[arg(long)]
        noise: Option<f64>,
        /// Master seed (phases, illumination draw, noise).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep steering-vector coherence against the analytic predictions.
    Coherence {
        /// spherical | planar
        #[arg(long)]
        array: String,
        /// Sphere radius or planar standoff distance L (wavelengths).
        #[arg(long, default_value_t = 100.0)]
        distance: f64,
        /// Planar array side a (wavelengths).
        #[arg(long, default_value_t = 100.0)]
        side: f64,
        /// Sensor spacing h (wavelengths).
        #[arg(long, default_value_t = 0.5)]
        spacing: f64,
        /// parallel | perpendicular (planar only).
        #[arg(long, default_value = "perpendicular")]
        orientation: String,
        #[arg(long, default_value_t = 4.0)]
        min_sep: f64,
        #[arg(long, default_value_t = 10.0)]
        max_sep: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Report the stability constants and support diagnostics for a config.
    Bounds {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Noise energy ‖E‖_F to plug into the bound (defaults to the
        /// realized energy at the configured noise level).
        #[arg(long)]
        noise_energy: Option<f64>,
    },
    /// Run several methods on one scene and tabulate precision/recall.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated: smv,mmv-random,mmv-optimal,music
        #[arg(long, default_value = "smv,mmv-random,mmv-optimal,music")]
        methods: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> scatim::Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn main() -> ExitCode {
    // env var only controls the default thread count
    if let Ok(threads) = std::env::var("SCATIM_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> scatim::Result<()> {
    match cli.command {
        Command::Synthesize { config, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = out {
                cfg.out_dir = dir;
            }
            cfg.validate()?;
            let geom = cfg.build_geometry()?;
            let iw = cfg.build_window()?;
            let scene = cfg.build_scene(&iw)?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let p = response_matrix(&scene, &geom, &iw)?;
            write_complex_matrix_csv(&cfg.out_dir.join("response.csv"), p.matrix())?;
            scatim::io::write_scene_csv(&cfg.out_dir.join("scene.csv"), &scene)?;
            let ms = scatim::forward::multiple_scattering_amount(&scene, &geom, &iw)?;
            println!("response matrix {}x{} written to {}", p.len(), p.len(), cfg.out_dir.display());
            println!("multiple scattering: {ms:.1}%");
            Ok(())
        }
        Command::Image {
            config,
            method,
            illum,
            noise,
            seed,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(m) = method {
                cfg.method = m;
            }
            if let Some(i) = illum {
                cfg.illumination = i;
            }
            if let Some(n) = noise {
                cfg.noise_pct = n;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(dir) = out {
                cfg.out_dir = dir;
            }
            let report = run_experiment(&cfg)?;
            println!("coherence = {:.4}", report.coherence);
            println!("multiple scattering = {:.1}%", report.ms_amount);
            println!("recovered support: {:?}", report.support);
            if !report.rho.is_empty() {
                println!("recovered |rho|:");
                for (i, r) in report.rho.iter().enumerate() {
                    let tag = if report.screened.get(i).copied().unwrap_or(false) {
                        "  [screened]"
                    } else {
                        ""
                    };
                    println!("  pixel {:>5}: {:.4}{tag}", report.support[i], r.norm());
                }
            }
            println!("outputs in {}", report.out_dir.display());
            Ok(())
        }
        Command::Coherence {
            array,
            distance,
            side,
            spacing,
            orientation,
            min_sep,
            max_sep,
            step,
            out,
        } => {
            let mut separations = Vec::new();
            let mut d = min_sep;
            while d <= max_sep + 1e-12 {
                separations.push(d);
                d += step;
            }
            let curve = match array.as_str() {
                "spherical" => spherical_coherence_curve(distance, spacing, &separations)?,
                "planar" => {
                    let orient = match orientation.as_str() {
                        "parallel" => PlanarOrientation::Parallel,
                        "perpendicular" => PlanarOrientation::Perpendicular,
                        other => {
                            return Err(scatim::Error::InvalidInput(format!(
                                "unknown orientation `{other}`"
                            )))
                        }
                    };
                    planar_coherence_curve(side, distance, spacing, &separations, orient)?
                }
                other => {
                    return Err(scatim::Error::InvalidInput(format!(
                        "unknown array kind `{other}`"
                    )))
                }
            };
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("coherence_{array}.csv"));
            write_curve_csv(&path, &curve)?;
            println!("{}", curve.geometry);
            println!("{} separations written to {}", curve.separations.len(), path.display());
            Ok(())
        }
        Command::Bounds {
            config,
            noise_energy,
        } => {
            let cfg = load_config(&config)?;
            cfg.validate()?;
            let geom = cfg.build_geometry()?;
            let iw = cfg.build_window()?;
            let scene = cfg.build_scene(&iw)?;
            let sensing = build_sensing_matrix(&geom, &iw, true)?;
            let eps = mutual_coherence(&sensing)?;
            let m = scene.sparsity();
            let energy = match noise_energy {
                Some(e) => e,
                None => {
                    let p = response_matrix(&scene, &geom, &iw)?;
                    let ill = scatim::illumination::point_illumination(
                        match cfg.illumination {
                            IlluminationMode::Point(s) => s,
                            _ => (geom.len() + 1) / 2,
                        },
                        geom.len(),
                    )?;
                    let dm = scatim::illumination::DataMatrix::synthesize(
                        &p,
                        vec![ill],
                        cfg.noise_pct,
                        cfg.noise_seed(),
                    )?;
                    dm.noise_norm()
                }
            };
            let bounds = theory_bounds(eps, m, energy);
            println!("mutual coherence eps = {eps:.4}");
            println!("sparsity M = {m}");
            println!("M*eps = {:.4} (need < 0.5)", eps * m as f64);
            if bounds.violated {
                println!("stability condition: VIOLATED (support threshold falls back to 10% of max row norm)");
            } else {
                println!("stability condition: satisfied");
                println!("delta_min   = {:.6e}", bounds.delta_min.unwrap());
                println!("error bound = {:.6e}", bounds.err_bound.unwrap());
                println!("detectable  = rows with norm > {:.6e}", bounds.detectability.unwrap());
            }
            match exact_recovery_coefficient(&sensing, scene.support()) {
                Ok(erc) => println!("ERC(true support) = {erc:.6}"),
                Err(e) => println!("ERC(true support) unavailable: {e}"),
            }
            Ok(())
        }
        Command::Compare {
            config,
            methods,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = out {
                cfg.out_dir = dir;
            }
            let parsed: Vec<CompareMethod> = methods
                .split(',')
                .map(|s| s.parse())
                .collect::<scatim::Result<_>>()?;
            let table = compare_methods(&cfg, &parsed)?;
            print!("{table}");
            std::fs::create_dir_all(&cfg.out_dir)?;
            write_comparison_csv(&cfg.out_dir.join("compare.csv"), &table)?;
            Ok(())
        }
    }
}
