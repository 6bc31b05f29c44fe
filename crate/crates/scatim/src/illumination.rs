//! Illumination vectors and multi-shot data assembly.
//!
//! Three ways to drive the array: fire a single transducer, fire several
//! randomly chosen transducers one at a time, or use the right singular
//! vectors of the response matrix as illuminations. The last choice
//! concentrates the received power in the leading data columns, which is
//! what makes it robust at high noise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forward::{synthesize_data, ResponseMatrix};

/// Where an illumination vector came from (1-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlluminationLabel {
    /// Standard basis vector: a single transducer fires.
    Transducer(usize),
    /// Right singular vector of the response matrix.
    SingularVector(usize),
    /// Caller-supplied vector.
    Custom,
}

impl std::fmt::Display for IlluminationLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IlluminationLabel::Transducer(s) => write!(f, "transducer:{s}"),
            IlluminationLabel::SingularVector(j) => write!(f, "singular:{j}"),
            IlluminationLabel::Custom => write!(f, "custom"),
        }
    }
}

/// A unit-norm illumination vector with its provenance.
#[derive(Debug, Clone)]
pub struct Illumination {
    f: DVector<Complex64>,
    label: IlluminationLabel,
}

impl Illumination {
    /// Wrap and normalize a vector; errors on a zero vector.
    pub fn new(f: DVector<Complex64>, label: IlluminationLabel) -> Result<Self> {
        let norm = f.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("illumination vector must be nonzero and finite"));
        }
        Ok(Self {
            f: f * Complex64::new(1.0 / norm, 0.0),
            label,
        })
    }

    pub fn vector(&self) -> &DVector<Complex64> {
        &self.f
    }

    pub fn label(&self) -> IlluminationLabel {
        self.label
    }
}

/// Illumination that fires transducer `s` (1-based) of an `n`-element array.
pub fn point_illumination(s: usize, n: usize) -> Result<Illumination> {
    if s == 0 || s > n {
        return Err(Error::invalid(format!(
            "transducer index {s} out of range 1..={n}"
        )));
    }
    let mut f = DVector::zeros(n);
    f[s - 1] = Complex64::new(1.0, 0.0);
    Illumination::new(f, IlluminationLabel::Transducer(s))
}

/// `count` single-transducer illuminations at distinct random positions.
///
/// Indices are drawn uniformly without replacement; the draw is
/// deterministic under the seed.
pub fn random_illuminations(count: usize, n: usize, seed: u64) -> Result<Vec<Illumination>> {
    if count > n {
        return Err(Error::invalid(format!(
            "requested {count} illuminations from an array of {n} transducers"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, n, count);
    picks
        .iter()
        .map(|idx| point_illumination(idx + 1, n))
        .collect()
}

/// The top `count` right singular vectors of the response matrix, in
/// descending singular-value order.
pub fn optimal_illuminations(p: &ResponseMatrix, count: usize) -> Result<Vec<Illumination>> {
    let n = p.len();
    if count > n {
        return Err(Error::invalid(format!(
            "requested {count} singular illuminations from an array of {n} transducers"
        )));
    }
    let parts = p.svd();
    (0..count)
        .map(|j| {
            Illumination::new(
                parts.v.column(j).into_owned(),
                IlluminationLabel::SingularVector(j + 1),
            )
        })
        .collect()
}

/// Data matrix B whose columns are (optionally noisy) array responses to a
/// set of illuminations.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    b: DMatrix<Complex64>,
    illuminations: Vec<Illumination>,
    noise_pct: f64,
    noise_norm: f64,
}

impl DataMatrix {
    /// Synthesize one data column per illumination.
    ///
    /// Each column receives its own Gaussian draw (seed derived per column
    /// from the master seed) scaled to `noise_pct` percent of that column's
    /// signal energy. The realized total noise norm ‖E‖_F is recorded; it is
    /// the oracle input for discrepancy-based stopping.
    pub fn synthesize(
        p: &ResponseMatrix,
        illuminations: Vec<Illumination>,
        noise_pct: f64,
        seed: u64,
    ) -> Result<Self> {
        if illuminations.is_empty() {
            return Err(Error::invalid("need at least one illumination"));
        }
        let n = p.len();
        let mut b = DMatrix::zeros(n, illuminations.len());
        let mut noise_sq = 0.0;
        for (j, f) in illuminations.iter().enumerate() {
            let col_seed = seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let col = synthesize_data(p, f, noise_pct, col_seed)?;
            let clean = p.matrix() * f.vector();
            noise_sq += (col.clone() - clean).norm_squared();
            b.column_mut(j).copy_from(&col);
        }
        Ok(Self {
            b,
            illuminations,
            noise_pct,
            noise_norm: noise_sq.sqrt(),
        })
    }

    /// Wrap an externally assembled data matrix with a known noise norm.
    pub fn from_parts(
        b: DMatrix<Complex64>,
        illuminations: Vec<Illumination>,
        noise_pct: f64,
        noise_norm: f64,
    ) -> Result<Self> {
        if b.ncols() != illuminations.len() {
            return Err(Error::invalid("one illumination per data column required"));
        }
        Ok(Self {
            b,
            illuminations,
            noise_pct,
            noise_norm,
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    pub fn illuminations(&self) -> &[Illumination] {
        &self.illuminations
    }

    /// Number of illuminations ν.
    pub fn n_shots(&self) -> usize {
        self.b.ncols()
    }

    pub fn noise_pct(&self) -> f64 {
        self.noise_pct
    }

    /// Realized noise energy ‖E‖_F of the synthesis.
    pub fn noise_norm(&self) -> f64 {
        self.noise_norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{response_matrix, ScattererScene};
    use crate::geometry::{green_vector, ArrayGeometry, ImageWindow};
    use nalgebra::Point3;

    fn setup() -> (ArrayGeometry, ImageWindow, ScattererScene) {
        let geom = ArrayGeometry::linear(24, 1.0).unwrap();
        let iw = ImageWindow::from_counts(Point3::new(0.0, 40.0, 0.0), 9, 9, 2.0).unwrap();
        let entries = [
            (12, Complex64::new(2.0, 0.4)),
            (40, Complex64::new(-1.0, 1.6)),
            (66, Complex64::new(0.9, -0.8)),
        ];
        let scene = ScattererScene::from_entries(iw.len(), &entries).unwrap();
        (geom, iw, scene)
    }

    #[test]
    fn point_illumination_is_basis_vector() {
        let f = point_illumination(1, 3).unwrap();
        assert_eq!(f.vector()[0], Complex64::new(1.0, 0.0));
        assert_eq!(f.vector()[1], Complex64::new(0.0, 0.0));
        assert_eq!(f.vector()[2], Complex64::new(0.0, 0.0));
        assert!((f.vector().norm() - 1.0).abs() < 1e-15);
        assert!(point_illumination(0, 3).is_err());
        assert!(point_illumination(4, 3).is_err());
    }

    #[test]
    fn point_illumination_incident_field_is_green_kernel() {
        let (geom, iw, _) = setup();
        let s = 5;
        let f = point_illumination(s, geom.len()).unwrap();
        let y = iw.point(30);
        let g = green_vector(&geom, &y).unwrap();
        let incident = g.dot(f.vector());
        let direct =
            crate::geometry::green_kernel(&geom.sensors()[s - 1], &y).unwrap();
        assert!((incident - direct).norm() < 1e-15);
    }

    #[test]
    fn random_illuminations_are_distinct_and_seeded() {
        let a = random_illuminations(5, 100, 17).unwrap();
        let b = random_illuminations(5, 100, 17).unwrap();
        let idx = |ill: &[Illumination]| -> Vec<usize> {
            ill.iter()
                .map(|f| match f.label() {
                    IlluminationLabel::Transducer(s) => s,
                    _ => panic!("expected transducer label"),
                })
                .collect()
        };
        assert_eq!(idx(&a), idx(&b));
        let mut sorted = idx(&a);
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 5);
        for f in &a {
            assert!((f.vector().norm() - 1.0).abs() < 1e-15);
        }
        assert!(random_illuminations(6, 5, 0).is_err());
    }

    #[test]
    fn full_draw_covers_every_transducer() {
        let all = random_illuminations(8, 8, 3).unwrap();
        let mut idx: Vec<usize> = all
            .iter()
            .map(|f| match f.label() {
                IlluminationLabel::Transducer(s) => s,
                _ => unreachable!(),
            })
            .collect();
        idx.sort_unstable();
        assert_eq!(idx, (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn optimal_illuminations_reproduce_svd_columns() {
        let (geom, iw, scene) = setup();
        let p = response_matrix(&scene, &geom, &iw).unwrap();
        let ills = optimal_illuminations(&p, 3).unwrap();
        let parts = p.svd();
        for (j, f) in ills.iter().enumerate() {
            let pv = p.matrix() * f.vector();
            let su = parts.u.column(j) * Complex64::new(parts.sigma[j], 0.0);
            assert!((pv - su).norm() < 1e-10 * parts.sigma[0]);
        }
    }

    #[test]
    fn noise_free_rank_matches_scene_sparsity() {
        let (geom, iw, scene) = setup();
        let p = response_matrix(&scene, &geom, &iw).unwrap();
        let sv = p.singular_values();
        assert!(sv[scene.sparsity()] / sv[0] < 1e-10);
    }

    #[test]
    fn optimal_data_columns_are_orthogonal_noise_free() {
        let (geom, iw, scene) = setup();
        let p = response_matrix(&scene, &geom, &iw).unwrap();
        let ills = optimal_illuminations(&p, scene.sparsity()).unwrap();
        let dm = DataMatrix::synthesize(&p, ills, 0.0, 0).unwrap();
        let b = dm.matrix();
        for i in 0..b.ncols() {
            for j in i + 1..b.ncols() {
                let ip = b.column(i).dotc(&b.column(j)).norm();
                let scale = b.column(i).norm() * b.column(j).norm();
                assert!(ip <= 1e-10 * scale.max(1e-300), "columns {i},{j} not orthogonal");
            }
        }
        assert!(dm.noise_norm() == 0.0);
    }

    #[test]
    fn data_matrix_records_noise_energy() {
        let (geom, iw, scene) = setup();
        let p = response_matrix(&scene, &geom, &iw).unwrap();
        let ills = random_illuminations(4, geom.len(), 5).unwrap();
        let dm = DataMatrix::synthesize(&p, ills.clone(), 20.0, 77).unwrap();
        // per-column scaling: ‖E‖_F² = Σ (0.2·‖P f_j‖)²
        let expect_sq: f64 = ills
            .iter()
            .map(|f| (0.2 * (p.matrix() * f.vector()).norm()).powi(2))
            .sum();
        assert!((dm.noise_norm() - expect_sq.sqrt()).abs() < 1e-12 * expect_sq.sqrt());
    }
}
