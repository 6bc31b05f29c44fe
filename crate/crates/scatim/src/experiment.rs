//! End-to-end experiment runner behind a key = value config file.
//!
//! A config names the array, the image window, the scene (pixel positions
//! and reflectivity amplitudes; phases are drawn per realization from a
//! seed), the illumination strategy, the noise level and the solver knobs.
//! [`run_experiment`] synthesizes data, runs the two-step inversion (or
//! MUSIC), and writes CSV/PGM outputs that are byte-identical for a fixed
//! master seed. [`compare_methods`] runs several methods on one scene and
//! tabulates support precision/recall and reflectivity errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Point3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forward::{
    multiple_scattering_amount, response_matrix, ResponseMatrix, ScattererScene,
};
use crate::geometry::{build_sensing_matrix, mutual_coherence, ArrayGeometry, ImageWindow};
use crate::illumination::{
    optimal_illuminations, point_illumination, random_illuminations, DataMatrix, Illumination,
};
use crate::io::{write_column_csv, write_scene_csv, ImageGrid};
use crate::music::music_image;
use crate::reflectivity::recover_reflectivities;
use crate::solver::{gelma_solve, theory_bounds, SolverSettings, SupportRule, TheoryBounds};

/// Array family and its size parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    Linear { sensors: usize, pitch: f64 },
    Planar { side: f64, pitch: f64 },
    Spherical { radius: f64, spacing: f64 },
}

/// Image-window placement and resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub center: [f64; 3],
    pub nx: usize,
    pub ny: usize,
    pub pitch: f64,
}

/// One scatterer: 1-based grid coordinates and reflectivity amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelSpec {
    pub ix: usize,
    pub iy: usize,
    pub amplitude: f64,
}

/// How the array is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlluminationMode {
    /// Fire the 1-based transducer `s`.
    Point(usize),
    /// ν distinct random transducers.
    Random(usize),
    /// ν leading right singular vectors of the response matrix.
    Optimal(usize),
}

impl std::fmt::Display for IlluminationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IlluminationMode::Point(s) => write!(f, "point:{s}"),
            IlluminationMode::Random(nu) => write!(f, "random:{nu}"),
            IlluminationMode::Optimal(nu) => write!(f, "optimal:{nu}"),
        }
    }
}

impl std::str::FromStr for IlluminationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("illumination `{s}` needs the form kind:count")))?;
        let n: usize = arg
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad illumination count `{arg}`")))?;
        match kind.trim() {
            "point" => Ok(IlluminationMode::Point(n)),
            "random" => Ok(IlluminationMode::Random(n)),
            "optimal" => Ok(IlluminationMode::Optimal(n)),
            other => Err(Error::invalid(format!("unknown illumination kind `{other}`"))),
        }
    }
}

/// Inversion method run by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Two-step inversion from the first illumination only.
    Smv,
    /// Joint row-sparse inversion over all illuminations.
    Mmv,
    /// Subspace pseudospectrum from the response-matrix SVD.
    Music,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Smv => write!(f, "smv"),
            Method::Mmv => write!(f, "mmv"),
            Method::Music => write!(f, "music"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "smv" => Ok(Method::Smv),
            "mmv" => Ok(Method::Mmv),
            "music" => Ok(Method::Music),
            other => Err(Error::invalid(format!("unknown method `{other}`"))),
        }
    }
}

/// Solver knobs; `None` means pick the documented default at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub max_iters: usize,
    pub tolerance: f64,
    pub step: Option<f64>,
    pub tau: Option<f64>,
    /// Noise budget for discrepancy stopping; `None` means use the realized
    /// synthetic noise energy when noise is present.
    pub delta: Option<f64>,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverSettings::default();
        Self {
            max_iters: d.max_iters,
            tolerance: d.tolerance,
            step: None,
            tau: None,
            delta: None,
        }
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: GeometrySpec,
    pub window: WindowSpec,
    pub pixels: Vec<PixelSpec>,
    pub phase_seed: Option<u64>,
    pub illumination: IlluminationMode,
    pub illumination_seed: Option<u64>,
    pub noise_pct: f64,
    pub solver: SolverSpec,
    pub method: Method,
    pub music_nu: usize,
    pub out_dir: PathBuf,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    /// The reference configuration: a 100-element linear array at pitch λ,
    /// a 41×41 window at pitch λ centered 100λ broadside, five scatterers
    /// with amplitudes 2.96/2.76/2.05/1.54/1.35 at fixed well-separated
    /// pixels (the exact positions are this crate's choice), illuminated
    /// from the central transducer.
    fn default() -> Self {
        Self {
            geometry: GeometrySpec::Linear {
                sensors: 100,
                pitch: 1.0,
            },
            window: WindowSpec {
                center: [0.0, 100.0, 0.0],
                nx: 41,
                ny: 41,
                pitch: 1.0,
            },
            pixels: vec![
                PixelSpec { ix: 10, iy: 32, amplitude: 2.96 },
                PixelSpec { ix: 31, iy: 28, amplitude: 2.76 },
                PixelSpec { ix: 15, iy: 16, amplitude: 2.05 },
                PixelSpec { ix: 34, iy: 11, amplitude: 1.54 },
                PixelSpec { ix: 23, iy: 22, amplitude: 1.35 },
            ],
            phase_seed: None,
            illumination: IlluminationMode::Point(50),
            illumination_seed: None,
            noise_pct: 0.0,
            solver: SolverSpec::default(),
            method: Method::Smv,
            music_nu: 5,
            out_dir: PathBuf::from("out"),
            master_seed: 1,
        }
    }
}

impl ExperimentConfig {
    /// Seed for the scene phases (explicit or derived from the master seed).
    pub fn effective_phase_seed(&self) -> u64 {
        self.phase_seed.unwrap_or(self.master_seed)
    }

    /// Seed for random illumination selection.
    pub fn effective_illumination_seed(&self) -> u64 {
        self.illumination_seed
            .unwrap_or_else(|| self.master_seed.wrapping_add(1))
    }

    /// Seed for the additive data noise.
    pub fn noise_seed(&self) -> u64 {
        self.master_seed.wrapping_add(2)
    }

    pub fn build_geometry(&self) -> Result<ArrayGeometry> {
        match self.geometry {
            GeometrySpec::Linear { sensors, pitch } => ArrayGeometry::linear(sensors, pitch),
            GeometrySpec::Planar { side, pitch } => ArrayGeometry::planar(side, pitch),
            GeometrySpec::Spherical { radius, spacing } => {
                ArrayGeometry::spherical(radius, spacing)
            }
        }
    }

    pub fn build_window(&self) -> Result<ImageWindow> {
        ImageWindow::from_counts(
            Point3::new(self.window.center[0], self.window.center[1], self.window.center[2]),
            self.window.nx,
            self.window.ny,
            self.window.pitch,
        )
    }

    /// Scene with the configured amplitudes and seeded uniform phases.
    pub fn build_scene(&self, iw: &ImageWindow) -> Result<ScattererScene> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.effective_phase_seed());
        let mut entries = Vec::with_capacity(self.pixels.len());
        for p in &self.pixels {
            let k = iw
                .index_of(p.ix - 1, p.iy - 1)
                .ok_or_else(|| Error::config("scene.pixel", "pixel outside the window"))?;
            let phase = std::f64::consts::TAU * rng.gen::<f64>();
            entries.push((k, Complex64::from_polar(p.amplitude, phase)));
        }
        ScattererScene::from_entries(iw.len(), &entries)
    }

    /// Validate every field, reporting the first offending one.
    pub fn validate(&self) -> Result<()> {
        match self.geometry {
            GeometrySpec::Linear { sensors, pitch } => {
                if sensors == 0 {
                    return Err(Error::config("geometry.sensors", "need at least one sensor"));
                }
                if !(pitch > 0.0) {
                    return Err(Error::config("geometry.pitch", "pitch must be positive"));
                }
            }
            GeometrySpec::Planar { side, pitch } => {
                if !(side > 0.0 && pitch > 0.0) {
                    return Err(Error::config("geometry", "side and pitch must be positive"));
                }
            }
            GeometrySpec::Spherical { radius, spacing } => {
                if !(radius > 0.0 && spacing > 0.0) {
                    return Err(Error::config("geometry", "radius and spacing must be positive"));
                }
            }
        }
        if self.window.nx == 0 || self.window.ny == 0 {
            return Err(Error::config("window", "window needs at least one pixel"));
        }
        if !(self.window.pitch > 0.0) {
            return Err(Error::config("window.pitch", "pixel pitch must be positive"));
        }
        if self.pixels.is_empty() {
            return Err(Error::config(
                "scene.pixel",
                "scene must contain at least one scatterer",
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &self.pixels {
            if p.ix == 0 || p.ix > self.window.nx || p.iy == 0 || p.iy > self.window.ny {
                return Err(Error::config(
                    "scene.pixel",
                    format!(
                        "pixel ({}, {}) outside the 1..={} x 1..={} window",
                        p.ix, p.iy, self.window.nx, self.window.ny
                    ),
                ));
            }
            if !seen.insert((p.ix, p.iy)) {
                return Err(Error::config(
                    "scene.pixel",
                    format!("duplicate pixel ({}, {})", p.ix, p.iy),
                ));
            }
            if !(p.amplitude > 0.0) {
                return Err(Error::config("scene.pixel", "amplitude must be positive"));
            }
        }
        let n = match self.geometry {
            GeometrySpec::Linear { sensors, .. } => sensors,
            // sensor counts of areal arrays are derived; bounds checked at run time
            _ => usize::MAX,
        };
        match self.illumination {
            IlluminationMode::Point(s) => {
                if s == 0 || s > n {
                    return Err(Error::config("illumination.mode", "transducer index out of range"));
                }
            }
            IlluminationMode::Random(nu) | IlluminationMode::Optimal(nu) => {
                if nu == 0 || nu > n {
                    return Err(Error::config("illumination.mode", "illumination count out of range"));
                }
            }
        }
        if self.noise_pct < 0.0 {
            return Err(Error::config("noise.percent", "noise must be non-negative"));
        }
        if self.solver.max_iters == 0 {
            return Err(Error::config("solver.max_iters", "must be at least 1"));
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(Error::config("solver.tolerance", "must be positive"));
        }
        if self.method == Method::Music && (self.music_nu == 0 || self.music_nu > n) {
            return Err(Error::config("run.music_nu", "subspace size out of range"));
        }
        Ok(())
    }

    /// Serialize to the canonical key = value form.
    pub fn to_ini_string(&self) -> String {
        let mut s = String::new();
        s.push_str("[geometry]\n");
        match self.geometry {
            GeometrySpec::Linear { sensors, pitch } => {
                let _ = writeln!(s, "kind = linear\nsensors = {sensors}\npitch = {pitch}");
            }
            GeometrySpec::Planar { side, pitch } => {
                let _ = writeln!(s, "kind = planar\nside = {side}\npitch = {pitch}");
            }
            GeometrySpec::Spherical { radius, spacing } => {
                let _ = writeln!(s, "kind = spherical\nradius = {radius}\nspacing = {spacing}");
            }
        }
        s.push_str("\n[window]\n");
        let _ = writeln!(
            s,
            "center = {}, {}, {}\nnx = {}\nny = {}\npitch = {}",
            self.window.center[0],
            self.window.center[1],
            self.window.center[2],
            self.window.nx,
            self.window.ny,
            self.window.pitch
        );
        s.push_str("\n[scene]\n");
        for p in &self.pixels {
            let _ = writeln!(s, "pixel = {}, {}, {}", p.ix, p.iy, p.amplitude);
        }
        if let Some(seed) = self.phase_seed {
            let _ = writeln!(s, "phase_seed = {seed}");
        }
        s.push_str("\n[illumination]\n");
        let _ = writeln!(s, "mode = {}", self.illumination);
        if let Some(seed) = self.illumination_seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        s.push_str("\n[noise]\n");
        let _ = writeln!(s, "percent = {}", self.noise_pct);
        s.push_str("\n[solver]\n");
        let _ = writeln!(s, "max_iters = {}", self.solver.max_iters);
        let _ = writeln!(s, "tolerance = {}", self.solver.tolerance);
        let _ = writeln!(s, "step = {}", opt(self.solver.step));
        let _ = writeln!(s, "tau = {}", opt(self.solver.tau));
        let _ = writeln!(s, "delta = {}", opt(self.solver.delta));
        s.push_str("\n[run]\n");
        let _ = writeln!(s, "method = {}", self.method);
        let _ = writeln!(s, "music_nu = {}", self.music_nu);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        s
    }

    /// Parse the key = value form produced by [`Self::to_ini_string`].
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let get = |section: &str, key: &str| -> Option<&str> {
            sections
                .iter()
                .find(|(name, _)| name == section)
                .and_then(|(_, kv)| {
                    kv.iter()
                        .find(|(k, _)| k == key)
                        .map(|(_, v)| v.as_str())
                })
        };
        let require = |section: &str, key: &str| -> Result<&str> {
            get(section, key)
                .ok_or_else(|| Error::config(format!("{section}.{key}"), "missing key"))
        };

        let geometry = match require("geometry", "kind")? {
            "linear" => GeometrySpec::Linear {
                sensors: parse_field(require("geometry", "sensors")?, "geometry.sensors")?,
                pitch: parse_field(require("geometry", "pitch")?, "geometry.pitch")?,
            },
            "planar" => GeometrySpec::Planar {
                side: parse_field(require("geometry", "side")?, "geometry.side")?,
                pitch: parse_field(require("geometry", "pitch")?, "geometry.pitch")?,
            },
            "spherical" => GeometrySpec::Spherical {
                radius: parse_field(require("geometry", "radius")?, "geometry.radius")?,
                spacing: parse_field(require("geometry", "spacing")?, "geometry.spacing")?,
            },
            other => {
                return Err(Error::config("geometry.kind", format!("unknown kind `{other}`")))
            }
        };

        let center_raw = require("window", "center")?;
        let parts: Vec<&str> = center_raw.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::config("window.center", "need three coordinates"));
        }
        let center = [
            parse_field(parts[0], "window.center")?,
            parse_field(parts[1], "window.center")?,
            parse_field(parts[2], "window.center")?,
        ];
        let window = WindowSpec {
            center,
            nx: parse_field(require("window", "nx")?, "window.nx")?,
            ny: parse_field(require("window", "ny")?, "window.ny")?,
            pitch: parse_field(require("window", "pitch")?, "window.pitch")?,
        };

        let mut pixels = Vec::new();
        if let Some((_, kv)) = sections.iter().find(|(name, _)| name == "scene") {
            for (k, v) in kv {
                if k == "pixel" {
                    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(Error::config("scene.pixel", "need ix, iy, amplitude"));
                    }
                    pixels.push(PixelSpec {
                        ix: parse_field(parts[0], "scene.pixel")?,
                        iy: parse_field(parts[1], "scene.pixel")?,
                        amplitude: parse_field(parts[2], "scene.pixel")?,
                    });
                }
            }
        }
        let phase_seed = match get("scene", "phase_seed") {
            Some(v) => Some(parse_field(v, "scene.phase_seed")?),
            None => None,
        };

        let illumination: IlluminationMode = require("illumination", "mode")?.parse()?;
        let illumination_seed = match get("illumination", "seed") {
            Some(v) => Some(parse_field(v, "illumination.seed")?),
            None => None,
        };

        let noise_pct = parse_field(require("noise", "percent")?, "noise.percent")?;

        let solver = SolverSpec {
            max_iters: parse_field(require("solver", "max_iters")?, "solver.max_iters")?,
            tolerance: parse_field(require("solver", "tolerance")?, "solver.tolerance")?,
            step: parse_opt(get("solver", "step"), "solver.step")?,
            tau: parse_opt(get("solver", "tau"), "solver.tau")?,
            delta: parse_opt(get("solver", "delta"), "solver.delta")?,
        };

        let config = ExperimentConfig {
            geometry,
            window,
            pixels,
            phase_seed,
            illumination,
            illumination_seed,
            noise_pct,
            solver,
            method: require("run", "method")?.parse()?,
            music_nu: parse_field(require("run", "music_nu")?, "run.music_nu")?,
            out_dir: PathBuf::from(require("run", "out_dir")?),
            master_seed: parse_field(require("run", "master_seed")?, "run.master_seed")?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_ini_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_ini_string())?;
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "auto".to_string(),
    }
}

fn parse_opt(v: Option<&str>, field: &str) -> Result<Option<f64>> {
    match v {
        None => Ok(None),
        Some(s) if s.trim() == "auto" => Ok(None),
        Some(s) => Ok(Some(parse_field(s, field)?)),
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, field: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{s}`")))
}

type Sections = Vec<(String, Vec<(String, String)>)>;

fn parse_sections(text: &str) -> Result<Sections> {
    let mut sections: Sections = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            sections.push((name.trim().to_string(), Vec::new()));
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(format!("line {}", lineno + 1), "expected key = value")
        })?;
        let section = sections
            .last_mut()
            .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "key before any [section]"))?;
        section
            .1
            .push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(sections)
}

/// Response matrix as it would be measured: every transducer fires once
/// and each received column carries its own scaled noise draw.
pub fn noisy_response(p: &ResponseMatrix, noise_pct: f64, seed: u64) -> Result<ResponseMatrix> {
    if noise_pct == 0.0 {
        return ResponseMatrix::from_matrix(p.matrix().clone(), 0.0);
    }
    let n = p.len();
    let ills: Vec<Illumination> = (1..=n)
        .map(|s| point_illumination(s, n))
        .collect::<Result<_>>()?;
    let dm = DataMatrix::synthesize(p, ills, noise_pct, seed)?;
    ResponseMatrix::from_matrix(dm.matrix().clone(), noise_pct)
}

/// Everything a run produces, plus where the files went.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub coherence: f64,
    pub ms_amount: f64,
    pub singular_values: Vec<f64>,
    pub bounds: TheoryBounds,
    /// Recovered support (grid indices): thresholded row support for the
    /// sparse methods, top-M pseudospectrum pixels for MUSIC.
    pub support: Vec<usize>,
    /// Recovered reflectivities on `support` (empty for MUSIC).
    pub rho: Vec<Complex64>,
    pub screened: Vec<bool>,
    pub residual: f64,
    pub iterations: usize,
    pub noise_norm: f64,
    pub true_support: Vec<usize>,
    pub out_dir: PathBuf,
}

fn build_illuminations(
    config: &ExperimentConfig,
    p: &ResponseMatrix,
    n: usize,
) -> Result<Vec<Illumination>> {
    match config.illumination {
        IlluminationMode::Point(s) => Ok(vec![point_illumination(s, n)?]),
        IlluminationMode::Random(nu) => {
            random_illuminations(nu, n, config.effective_illumination_seed())
        }
        // singular vectors of the synthesized response; noise enters the
        // data columns, mirroring B = P·V + E
        IlluminationMode::Optimal(nu) => optimal_illuminations(p, nu),
    }
}

fn settings_from_spec(spec: &SolverSpec, noise_norm: f64) -> SolverSettings {
    SolverSettings {
        step: spec.step,
        tau: spec.tau,
        max_iters: spec.max_iters,
        tolerance: spec.tolerance,
        delta: spec.delta.or(if noise_norm > 0.0 {
            Some(noise_norm)
        } else {
            None
        }),
        trace_every: 0,
    }
}

/// Run the configured experiment end to end and write its outputs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let geom = config.build_geometry()?;
    let iw = config.build_window()?;
    let scene = config.build_scene(&iw)?;

    fs::create_dir_all(&config.out_dir)?;
    config.save(&config.out_dir.join("config.ini"))?;
    write_scene_csv(&config.out_dir.join("scene.csv"), &scene)?;

    let sensing = build_sensing_matrix(&geom, &iw, true)?;
    let coherence = mutual_coherence(&sensing)?;
    let p = response_matrix(&scene, &geom, &iw)?;
    let ms_amount = multiple_scattering_amount(&scene, &geom, &iw)?;
    let singular_values: Vec<f64> = p.singular_values().iter().cloned().collect();
    write_column_csv(
        &config.out_dir.join("singular_values.csv"),
        "sigma",
        &singular_values,
    )?;

    let mut illuminations = build_illuminations(config, &p, geom.len())?;
    if config.method == Method::Smv {
        illuminations.truncate(1);
    }
    let data = DataMatrix::synthesize(&p, illuminations, config.noise_pct, config.noise_seed())?;
    let bounds = theory_bounds(coherence, scene.sparsity(), data.noise_norm());

    let (support, rho, screened, residual, iterations, image_values);
    match config.method {
        Method::Smv | Method::Mmv => {
            let settings = settings_from_spec(&config.solver, data.noise_norm());
            let mut sol = gelma_solve(&sensing, data.matrix(), &settings)?;
            sol.extract_support(&SupportRule::Theory(&bounds));
            let est = if sol.support.is_empty() {
                None
            } else {
                Some(recover_reflectivities(&sol, &sensing, &iw, data.illuminations())?)
            };
            support = sol.support.clone();
            rho = est.as_ref().map(|e| e.rho.clone()).unwrap_or_default();
            screened = est.as_ref().map(|e| e.screened.clone()).unwrap_or_default();
            residual = sol.residual;
            iterations = sol.iterations;
            image_values = sol.row_norms.clone();
        }
        Method::Music => {
            let measured = noisy_response(&p, config.noise_pct, config.master_seed ^ 0x51d)?;
            let img = music_image(&measured, &iw, &geom, config.music_nu)?;
            support = img.top_indices(scene.sparsity());
            rho = Vec::new();
            screened = Vec::new();
            residual = 0.0;
            iterations = 0;
            image_values = img.values;
        }
    }

    let image = ImageGrid::new(&iw, image_values, scene.support().to_vec())?;
    let stem = format!("image_{}", config.method);
    image.write_csv(&config.out_dir.join(format!("{stem}.csv")))?;
    image.write_pgm(&config.out_dir.join(format!("{stem}.pgm")))?;
    image.write_markers_csv(&config.out_dir.join("true_pixels.csv"))?;

    // recovered table
    let mut table = String::from("index,ix,iy,x,y,re,im,abs,screened\n");
    for (i, &k) in support.iter().enumerate() {
        let (ix, iy) = iw.grid_coords(k);
        let pt = iw.point(k);
        let (re, im, ab, sc) = if i < rho.len() {
            (rho[i].re, rho[i].im, rho[i].norm(), screened.get(i).copied().unwrap_or(false))
        } else {
            (0.0, 0.0, 0.0, false)
        };
        let _ = writeln!(
            table,
            "{k},{},{},{},{},{re},{im},{ab},{}",
            ix + 1,
            iy + 1,
            pt.x,
            pt.y,
            if sc { 1 } else { 0 }
        );
    }
    fs::write(config.out_dir.join("recovered.csv"), table)?;

    // summary (deterministic: no wall-clock content)
    let mut summary = String::new();
    let _ = writeln!(summary, "method = {}", config.method);
    let _ = writeln!(summary, "mutual_coherence = {coherence:.6}");
    let _ = writeln!(summary, "multiple_scattering_pct = {ms_amount:.4}");
    let _ = writeln!(summary, "noise_pct = {}", config.noise_pct);
    let _ = writeln!(summary, "noise_norm = {:.6e}", data.noise_norm());
    let _ = writeln!(
        summary,
        "stability_condition = {}",
        if bounds.violated { "violated" } else { "satisfied" }
    );
    if let (Some(dmin), Some(err)) = (bounds.delta_min, bounds.err_bound) {
        let _ = writeln!(summary, "delta_min = {dmin:.6e}");
        let _ = writeln!(summary, "err_bound = {err:.6e}");
    }
    let _ = writeln!(summary, "residual = {residual:.6e}");
    let _ = writeln!(summary, "iterations = {iterations}");
    let _ = writeln!(summary, "true_support = {:?}", scene.support());
    let _ = writeln!(summary, "recovered_support = {support:?}");
    fs::write(config.out_dir.join("summary.txt"), summary)?;

    Ok(ExperimentReport {
        coherence,
        ms_amount,
        singular_values,
        bounds,
        support,
        rho,
        screened,
        residual,
        iterations,
        noise_norm: data.noise_norm(),
        true_support: scene.support().to_vec(),
        out_dir: config.out_dir.clone(),
    })
}

/// Methods selectable in a comparison run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMethod {
    Smv,
    MmvRandom,
    MmvOptimal,
    Music,
}

impl std::fmt::Display for CompareMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CompareMethod::Smv => write!(f, "smv"),
            CompareMethod::MmvRandom => write!(f, "mmv-random"),
            CompareMethod::MmvOptimal => write!(f, "mmv-optimal"),
            CompareMethod::Music => write!(f, "music"),
        }
    }
}

impl std::str::FromStr for CompareMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "smv" => Ok(CompareMethod::Smv),
            "mmv-random" => Ok(CompareMethod::MmvRandom),
            "mmv-optimal" => Ok(CompareMethod::MmvOptimal),
            "music" => Ok(CompareMethod::Music),
            other => Err(Error::invalid(format!("unknown comparison method `{other}`"))),
        }
    }
}

/// One row of a comparison table.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub method: CompareMethod,
    pub recovered: usize,
    pub precision: f64,
    pub recall: f64,
    /// Mean relative reflectivity error over true positives (sparse methods).
    pub rho_rel_err: Option<f64>,
    pub runtime_s: f64,
}

/// Results of [`compare_methods`].
#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl std::fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{:<12} {:>9} {:>10} {:>8} {:>12} {:>10}",
            "method", "recovered", "precision", "recall", "rho_rel_err", "runtime_s"
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<12} {:>9} {:>10.3} {:>8.3} {:>12} {:>10.3}",
                row.method.to_string(),
                row.recovered,
                row.precision,
                row.recall,
                row.rho_rel_err
                    .map_or("-".to_string(), |e| format!("{e:.3e}")),
                row.runtime_s
            )?;
        }
        Ok(())
    }
}

fn score_support(recovered: &[usize], truth: &[usize]) -> (f64, f64) {
    if recovered.is_empty() {
        return (0.0, 0.0);
    }
    let true_set: std::collections::HashSet<usize> = truth.iter().cloned().collect();
    let hits = recovered.iter().filter(|k| true_set.contains(k)).count();
    (
        hits as f64 / recovered.len() as f64,
        hits as f64 / truth.len().max(1) as f64,
    )
}

/// Run several methods on the same scene/noise realization and score them
/// against the ground truth.
///
/// Random and optimal MMV use the illumination count from the config when
/// the family matches, otherwise 5 random shots and 3 optimal shots.
pub fn compare_methods(
    config: &ExperimentConfig,
    methods: &[CompareMethod],
) -> Result<ComparisonTable> {
    config.validate()?;
    let geom = config.build_geometry()?;
    let iw = config.build_window()?;
    let scene = config.build_scene(&iw)?;
    let sensing = build_sensing_matrix(&geom, &iw, true)?;
    let coherence = mutual_coherence(&sensing)?;
    let p = response_matrix(&scene, &geom, &iw)?;
    let truth = scene.support().to_vec();
    let true_rho = scene.rho0().clone();

    let mut rows = Vec::new();
    for &method in methods {
        let start = Instant::now();
        let (support, rho): (Vec<usize>, Vec<Complex64>) = match method {
            CompareMethod::Music => {
                let measured =
                    noisy_response(&p, config.noise_pct, config.master_seed ^ 0x51d)?;
                let img = music_image(&measured, &iw, &geom, config.music_nu)?;
                (img.top_indices(scene.sparsity()), Vec::new())
            }
            _ => {
                let illuminations = match method {
                    CompareMethod::Smv => {
                        let s = match config.illumination {
                            IlluminationMode::Point(s) => s,
                            _ => (geom.len() + 1) / 2,
                        };
                        vec![point_illumination(s, geom.len())?]
                    }
                    CompareMethod::MmvRandom => {
                        let nu = match config.illumination {
                            IlluminationMode::Random(nu) => nu,
                            _ => 5,
                        };
                        random_illuminations(nu, geom.len(), config.effective_illumination_seed())?
                    }
                    CompareMethod::MmvOptimal => {
                        let nu = match config.illumination {
                            IlluminationMode::Optimal(nu) => nu,
                            _ => 3,
                        };
                        optimal_illuminations(&p, nu)?
                    }
                    CompareMethod::Music => unreachable!(),
                };
                let data = DataMatrix::synthesize(
                    &p,
                    illuminations,
                    config.noise_pct,
                    config.noise_seed(),
                )?;
                let bounds = theory_bounds(coherence, scene.sparsity(), data.noise_norm());
                let settings = settings_from_spec(&config.solver, data.noise_norm());
                let mut sol = gelma_solve(&sensing, data.matrix(), &settings)?;
                sol.extract_support(&SupportRule::Theory(&bounds));
                if sol.support.is_empty() {
                    (Vec::new(), Vec::new())
                } else {
                    let est =
                        recover_reflectivities(&sol, &sensing, &iw, data.illuminations())?;
                    (sol.support.clone(), est.rho)
                }
            }
        };
        let runtime_s = start.elapsed().as_secs_f64();
        let (precision, recall) = score_support(&support, &truth);
        let rho_rel_err = if rho.is_empty() {
            None
        } else {
            let mut errs = Vec::new();
            for (i, &k) in support.iter().enumerate() {
                if truth.contains(&k) && i < rho.len() {
                    let t = true_rho[k];
                    errs.push((rho[i] - t).norm() / t.norm());
                }
            }
            if errs.is_empty() {
                None
            } else {
                Some(errs.iter().sum::<f64>() / errs.len() as f64)
            }
        };
        rows.push(ComparisonRow {
            method,
            recovered: support.len(),
            precision,
            recall,
            rho_rel_err,
            runtime_s,
        });
    }
    Ok(ComparisonTable { rows })
}

/// Write a comparison table as CSV (runtimes excluded so the file is
/// byte-reproducible under a fixed seed).
pub fn write_comparison_csv(path: &Path, table: &ComparisonTable) -> Result<()> {
    let mut out = String::from("method,recovered,precision,recall,rho_rel_err\n");
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.method,
            row.recovered,
            row.precision,
            row.recall,
            row.rho_rel_err.map_or(String::new(), |e| format!("{e}"))
        );
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_roundtrips() {
        let config = ExperimentConfig::default();
        config.validate().unwrap();
        let text = config.to_ini_string();
        let back = ExperimentConfig::from_ini_str(&text).unwrap();
        assert_eq!(config, back);
        // a second roundtrip is the identity as well
        assert_eq!(back.to_ini_string(), text);
    }

    #[test]
    fn roundtrip_preserves_explicit_values() {
        let mut config = ExperimentConfig::default();
        config.noise_pct = 12.5;
        config.illumination = IlluminationMode::Optimal(4);
        config.method = Method::Mmv;
        config.phase_seed = Some(99);
        config.solver.delta = Some(1.25e-3);
        config.solver.step = Some(0.007);
        let back = ExperimentConfig::from_ini_str(&config.to_ini_string()).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn empty_scene_is_rejected_with_field_message() {
        let mut config = ExperimentConfig::default();
        config.pixels.clear();
        let err = config.validate().unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("scene must contain at least one scatterer"),
            "unexpected message: {msg}"
        );
    }

    #[test]
    fn out_of_window_pixel_is_rejected() {
        let mut config = ExperimentConfig::default();
        config.pixels[0].ix = 42;
        assert!(config.validate().is_err());
        config.pixels[0].ix = 0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn scene_phases_are_seeded() {
        let config = ExperimentConfig::default();
        let iw = config.build_window().unwrap();
        let a = config.build_scene(&iw).unwrap();
        let b = config.build_scene(&iw).unwrap();
        assert_eq!(a.rho0(), b.rho0());
        let mut other = config.clone();
        other.phase_seed = Some(1234);
        let c = other.build_scene(&iw).unwrap();
        assert_ne!(a.rho0(), c.rho0());
        // amplitudes survive the phase draw
        for p in &config.pixels {
            let k = iw.index_of(p.ix - 1, p.iy - 1).unwrap();
            assert!((a.rho0()[k].norm() - p.amplitude).abs() < 1e-12);
        }
    }

    #[test]
    fn comment_and_whitespace_tolerant_parsing() {
        let text = "\
# reference setup
[geometry]
kind = linear
sensors = 10
pitch = 1

[window]
center = 0, 30, 0   # broadside
nx = 5
ny = 5
pitch = 2

[scene]
pixel = 2, 3, 1.5

[illumination]
mode = point:5

[noise]
percent = 0

[solver]
max_iters = 1000
tolerance = 1e-8

[run]
method = smv
music_nu = 1
out_dir = out
master_seed = 7
";
        let config = ExperimentConfig::from_ini_str(text).unwrap();
        assert_eq!(
            config.geometry,
            GeometrySpec::Linear {
                sensors: 10,
                pitch: 1.0
            }
        );
        assert_eq!(config.pixels.len(), 1);
        assert_eq!(config.solver.step, None);
    }
}
