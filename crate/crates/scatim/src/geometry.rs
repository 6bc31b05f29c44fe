//! Sensor arrays, image-window grids and the sensing matrix.
//!
//! All lengths are in wavelengths: the wavelength is fixed to 1 and the
//! wavenumber to 2π. The free-space kernel between two points is
//! exp(iκr)/(4πr), and the steering vector at an image point collects that
//! kernel over every sensor of the array. Stacking steering vectors for all
//! grid points of an image window yields the N×K sensing matrix, whose
//! mutual coherence governs how well sparse recovery can work.

use nalgebra::{DMatrix, DVector, Point3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Wavelength of the probing signal; every coordinate is expressed in it.
pub const WAVELENGTH: f64 = 1.0;

/// Wavenumber κ = 2π/λ.
pub const WAVENUMBER: f64 = std::f64::consts::TAU / WAVELENGTH;

/// Points closer than this (in wavelengths) are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-9;

/// Free-space kernel exp(iκ|x−y|)/(4π|x−y|) between two points.
pub fn green_kernel(x: &Point3<f64>, y: &Point3<f64>) -> Result<Complex64> {
    let r = (x - y).norm();
    if r < COINCIDENCE_TOL {
        return Err(Error::SingularKernel {
            tol: COINCIDENCE_TOL,
        });
    }
    Ok(Complex64::from_polar(
        1.0 / (4.0 * std::f64::consts::PI * r),
        WAVENUMBER * r,
    ))
}

/// Layout family of a sensor array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    Linear,
    Planar,
    Spherical,
}

impl std::fmt::Display for ArrayKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArrayKind::Linear => write!(f, "linear"),
            ArrayKind::Planar => write!(f, "planar"),
            ArrayKind::Spherical => write!(f, "spherical"),
        }
    }
}

/// An active array of transducers; positions in wavelengths.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct ArrayGeometry {
    sensors: Vec<Point3<f64>>,
    kind: ArrayKind,
}

impl ArrayGeometry {
    /// Linear array of `n` sensors along the x-axis, centered at the origin.
    pub fn linear(n: usize, pitch: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("array needs at least one sensor"));
        }
        if !(pitch > 0.0) {
            return Err(Error::invalid("sensor pitch must be positive"));
        }
        let mid = 0.5 * (n as f64 - 1.0);
        let sensors = (0..n)
            .map(|i| Point3::new((i as f64 - mid) * pitch, 0.0, 0.0))
            .collect();
        Self::from_sensors(ArrayKind::Linear, sensors)
    }

    /// Circular planar array of diameter `aperture` in the z = 0 plane:
    /// grid points at pitch `pitch` within radius aperture/2.
    pub fn planar(aperture: f64, pitch: f64) -> Result<Self> {
        if !(aperture > 0.0 && pitch > 0.0) {
            return Err(Error::invalid("planar aperture and pitch must be positive"));
        }
        let half = aperture / 2.0;
        let per_side = (aperture / pitch).round() as i64 + 1;
        let mid = 0.5 * (per_side as f64 - 1.0);
        let mut sensors = Vec::new();
        for iy in 0..per_side {
            for ix in 0..per_side {
                let x = (ix as f64 - mid) * pitch;
                let y = (iy as f64 - mid) * pitch;
                if x * x + y * y <= half * half + 1e-12 {
                    sensors.push(Point3::new(x, y, 0.0));
                }
            }
        }
        Self::from_sensors(ArrayKind::Planar, sensors)
    }

    /// Spherical array of radius `radius` centered at the origin.
    ///
    /// Sensors are placed on a Fibonacci sphere with count chosen so the mean
    /// inter-sensor spacing is close to `spacing`.
    pub fn spherical(radius: f64, spacing: f64) -> Result<Self> {
        if !(radius > 0.0 && spacing > 0.0) {
            return Err(Error::invalid("sphere radius and spacing must be positive"));
        }
        let area = 4.0 * std::f64::consts::PI * radius * radius;
        let n = (area / (spacing * spacing)).round().max(2.0) as usize;
        let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        let sensors = (0..n)
            .map(|i| {
                // latitudes at uniform area increments, longitudes on the golden spiral
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                Point3::new(
                    radius * rho * phi.cos(),
                    radius * rho * phi.sin(),
                    radius * z,
                )
            })
            .collect();
        Self::from_sensors(ArrayKind::Spherical, sensors)
    }

    /// Build from explicit sensor positions, checking the layout invariants.
    pub fn from_sensors(kind: ArrayKind, sensors: Vec<Point3<f64>>) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::invalid("array needs at least one sensor"));
        }
        if sensors.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("sensor positions must be finite"));
        }
        match kind {
            ArrayKind::Linear | ArrayKind::Planar => {
                // all constructors place these in the z = 0 plane
                let max_dev = sensors.iter().map(|p| p.z.abs()).fold(0.0, f64::max);
                if max_dev > COINCIDENCE_TOL {
                    return Err(Error::invalid("linear/planar arrays must lie in a plane"));
                }
            }
            ArrayKind::Spherical => {
                let radius =
                    sensors.iter().map(|p| p.coords.norm()).sum::<f64>() / sensors.len() as f64;
                let max_dev = sensors
                    .iter()
                    .map(|p| (p.coords.norm() - radius).abs())
                    .fold(0.0, f64::max);
                if max_dev > 1e-9 * radius {
                    return Err(Error::invalid("spherical array sensors must lie on a sphere"));
                }
            }
        }
        Ok(Self { sensors, kind })
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    /// Number of transducers N.
    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn sensors(&self) -> &[Point3<f64>] {
        &self.sensors
    }

    pub fn wavenumber(&self) -> f64 {
        WAVENUMBER
    }
}

/// Uniform rectangular grid of image points (the search region).
///
/// Grid points are laid out row-major: index k = iy·nx + ix, with offsets
/// along the x and y axes around the center.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageWindow {
    center: Point3<f64>,
    nx: usize,
    ny: usize,
    pitch: f64,
}

impl ImageWindow {
    /// Window with `nx` × `ny` grid points at the given pixel pitch.
    pub fn from_counts(center: Point3<f64>, nx: usize, ny: usize, pitch: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("image window needs at least one grid point"));
        }
        if !(pitch > 0.0) {
            return Err(Error::invalid("pixel pitch must be positive"));
        }
        Ok(Self {
            center,
            nx,
            ny,
            pitch,
        })
    }

    /// Window covering `width` × `height`; grid counts are derived from the pitch.
    pub fn from_extents(center: Point3<f64>, width: f64, height: f64, pitch: f64) -> Result<Self> {
        if !(width >= 0.0 && height >= 0.0 && pitch > 0.0) {
            return Err(Error::invalid("extents must be non-negative and pitch positive"));
        }
        let nx = (width / pitch).round() as usize + 1;
        let ny = (height / pitch).round() as usize + 1;
        Self::from_counts(center, nx, ny, pitch)
    }

    pub fn center(&self) -> Point3<f64> {
        self.center
    }

    pub fn counts(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    /// Physical extents (width, height) spanned by the grid.
    pub fn extents(&self) -> (f64, f64) {
        (
            (self.nx as f64 - 1.0) * self.pitch,
            (self.ny as f64 - 1.0) * self.pitch,
        )
    }

    /// Total number of grid points K.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point for linear index `k` (row-major).
    pub fn point(&self, k: usize) -> Point3<f64> {
        debug_assert!(k < self.len());
        let (ix, iy) = self.grid_coords(k);
        let ox = (ix as f64 - 0.5 * (self.nx as f64 - 1.0)) * self.pitch;
        let oy = (iy as f64 - 0.5 * (self.ny as f64 - 1.0)) * self.pitch;
        Point3::new(self.center.x + ox, self.center.y + oy, self.center.z)
    }

    /// All grid points in row-major order.
    pub fn points(&self) -> Vec<Point3<f64>> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Linear index of grid coordinates (0-based).
    pub fn index_of(&self, ix: usize, iy: usize) -> Option<usize> {
        (ix < self.nx && iy < self.ny).then_some(iy * self.nx + ix)
    }

    /// Grid coordinates (ix, iy) of a linear index.
    pub fn grid_coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }
}

/// The N×K matrix of steering vectors over an image window.
#[derive(Debug, Clone)]
pub struct SensingMatrix {
    g: DMatrix<Complex64>,
    column_norms: Vec<f64>,
    normalized: bool,
}

impl SensingMatrix {
    /// Wrap an arbitrary matrix, normalizing its columns in place.
    ///
    /// Panics on a zero column. Intended for synthetic sensing matrices in
    /// experiments and tests; windows over real arrays should go through
    /// [`build_sensing_matrix`].
    pub fn from_raw_normalized(mut g: DMatrix<Complex64>) -> Self {
        let mut column_norms = Vec::with_capacity(g.ncols());
        for j in 0..g.ncols() {
            let norm = g.column(j).norm();
            assert!(norm > 0.0, "column {j} has zero norm");
            g.column_mut(j).scale_mut(1.0 / norm);
            column_norms.push(norm);
        }
        Self {
            g,
            column_norms,
            normalized: true,
        }
    }

    /// Wrap an arbitrary matrix as-is, recording its column norms.
    pub fn from_raw_unnormalized(g: DMatrix<Complex64>) -> Self {
        let column_norms = (0..g.ncols()).map(|j| g.column(j).norm()).collect();
        Self {
            g,
            column_norms,
            normalized: false,
        }
    }

    /// The stored matrix (column-normalized if `is_normalized`).
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.g
    }

    /// ℓ2 norms of the columns before any normalization.
    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Number of sensors N.
    pub fn n_sensors(&self) -> usize {
        self.g.nrows()
    }

    /// Number of grid points K.
    pub fn n_pixels(&self) -> usize {
        self.g.ncols()
    }

    /// Column `j` at physical scale (normalization undone if needed).
    pub fn physical_column(&self, j: usize) -> DVector<Complex64> {
        let col = self.g.column(j).into_owned();
        if self.normalized {
            col * Complex64::new(self.column_norms[j], 0.0)
        } else {
            col
        }
    }

    /// Incident field g₀ᵀ(y_j)·f at grid point `j` (unconjugated product).
    pub fn incident_field(&self, j: usize, f: &DVector<Complex64>) -> Complex64 {
        let raw = self.g.column(j).dot(f);
        if self.normalized {
            raw * self.column_norms[j]
        } else {
            raw
        }
    }
}

/// Steering vector at `y`: entry r is exp(iκ|x_r−y|)/(4π|x_r−y|).
pub fn green_vector(geom: &ArrayGeometry, y: &Point3<f64>) -> Result<DVector<Complex64>> {
    let mut v = DVector::zeros(geom.len());
    for (r, x) in geom.sensors().iter().enumerate() {
        v[r] = green_kernel(x, y)?;
    }
    Ok(v)
}

/// Assemble the sensing matrix over the window, optionally column-normalized.
pub fn build_sensing_matrix(
    geom: &ArrayGeometry,
    iw: &ImageWindow,
    normalize: bool,
) -> Result<SensingMatrix> {
    let points = iw.points();
    let columns: Vec<DVector<Complex64>> = points
        .par_iter()
        .map(|y| green_vector(geom, y))
        .collect::<Result<_>>()?;
    let mut g = DMatrix::zeros(geom.len(), iw.len());
    let mut column_norms = Vec::with_capacity(iw.len());
    for (j, col) in columns.iter().enumerate() {
        let norm = col.norm();
        column_norms.push(norm);
        if normalize {
            g.column_mut(j)
                .copy_from(&(col * Complex64::new(1.0 / norm, 0.0)));
        } else {
            g.column_mut(j).copy_from(col);
        }
    }
    Ok(SensingMatrix {
        g,
        column_norms,
        normalized: normalize,
    })
}

/// Mutual coherence: max over i≠j of the normalized column inner products.
pub fn mutual_coherence(s: &SensingMatrix) -> Result<f64> {
    let k = s.n_pixels();
    if k < 2 {
        return Err(Error::invalid("mutual coherence needs at least two columns"));
    }
    // work on unit columns so the value is normalization-invariant
    let unit = if s.is_normalized() {
        s.matrix().clone()
    } else {
        let mut m = s.matrix().clone();
        for j in 0..k {
            let norm = s.column_norms[j];
            m.column_mut(j).scale_mut(1.0 / norm);
        }
        m
    };
    let max = (0..k - 1)
        .into_par_iter()
        .map(|i| {
            let ci = unit.column(i);
            let mut local = 0.0_f64;
            for j in i + 1..k {
                let ip = ci.dotc(&unit.column(j)).norm();
                if ip > local {
                    local = ip;
                }
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    Ok(max.min(1.0))
}

/// Exact recovery coefficient of a support set Λ:
/// 1 − max_{j∉Λ} ‖G_Λ† g(y_j)‖₁ with G_Λ† = (G_Λ*G_Λ)⁻¹G_Λ*.
///
/// Requires a column-normalized sensing matrix. Positive ERC certifies that
/// penalized recovery stays on the support.
pub fn exact_recovery_coefficient(s: &SensingMatrix, support: &[usize]) -> Result<f64> {
    if !s.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if support.is_empty() {
        return Err(Error::invalid("support must be nonempty"));
    }
    let k = s.n_pixels();
    let mut seen = vec![false; k];
    for &j in support {
        if j >= k {
            return Err(Error::invalid(format!("support index {j} out of range")));
        }
        if seen[j] {
            return Err(Error::invalid(format!("duplicate support index {j}")));
        }
        seen[j] = true;
    }

    let m = support.len();
    let g_sub = s.matrix().select_columns(support.iter());
    let gram = g_sub.ad_mul(&g_sub);

    // rank check on the m×m Gram before factorizing
    let sv = gram.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > smax * 1e-12) {
        return Err(Error::DependentSupportColumns);
    }
    let lu = gram.lu();

    let mut worst = 0.0_f64;
    for j in 0..k {
        if seen[j] {
            continue;
        }
        let rhs = g_sub.ad_mul(&s.matrix().column(j).clone_owned());
        let w = lu.solve(&rhs).ok_or(Error::DependentSupportColumns)?;
        let l1 = (0..m).map(|i| w[i].norm()).sum::<f64>();
        if l1 > worst {
            worst = l1;
        }
    }
    Ok(1.0 - worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relerr(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn kernel_at_one_wavelength_is_real() {
        // phase wraps to 1 at integer wavelengths
        let g = green_kernel(&Point3::new(1.0, 0.0, 0.0), &Point3::origin()).unwrap();
        let expect = 1.0 / (4.0 * std::f64::consts::PI);
        assert!((g.re - expect).abs() < 1e-14);
        assert!(g.im.abs() < 1e-12);
    }

    #[test]
    fn kernel_at_half_wavelength_is_negative() {
        let g = green_kernel(&Point3::new(0.5, 0.0, 0.0), &Point3::origin()).unwrap();
        let expect = -1.0 / (4.0 * std::f64::consts::PI * 0.5);
        assert!((g.re - expect).abs() < 1e-13);
        assert!(g.im.abs() < 1e-12);
    }

    #[test]
    fn kernel_rejects_coincident_points() {
        let p = Point3::new(0.3, -0.2, 0.9);
        assert!(matches!(
            green_kernel(&p, &p),
            Err(Error::SingularKernel { .. })
        ));
    }

    #[test]
    fn steering_vector_matches_per_entry_loop() {
        let geom = ArrayGeometry::linear(100, 1.0).unwrap();
        let y = Point3::new(3.0, 100.0, 0.0);
        let v = green_vector(&geom, &y).unwrap();
        // independent per-entry evaluation
        let mut norm_sq = 0.0;
        for (r, x) in geom.sensors().iter().enumerate() {
            let d = ((x.x - y.x).powi(2) + (x.y - y.y).powi(2) + (x.z - y.z).powi(2)).sqrt();
            let expect = Complex64::new(0.0, WAVENUMBER * d).exp()
                / Complex64::new(4.0 * std::f64::consts::PI * d, 0.0);
            assert!((v[r] - expect).norm() <= 1e-12 * expect.norm());
            norm_sq += expect.norm_sqr();
        }
        assert!(relerr(v.norm(), norm_sq.sqrt()) < 1e-12);
    }

    #[test]
    fn sensing_matrix_single_point_equals_steering_vector() {
        let geom = ArrayGeometry::linear(7, 0.5).unwrap();
        let iw = ImageWindow::from_counts(Point3::new(0.0, 20.0, 0.0), 1, 1, 1.0).unwrap();
        let s = build_sensing_matrix(&geom, &iw, false).unwrap();
        let v = green_vector(&geom, &iw.point(0)).unwrap();
        assert_eq!(s.matrix().ncols(), 1);
        assert!((s.matrix().column(0).clone_owned() - v).norm() < 1e-15);
    }

    #[test]
    fn paper_window_has_expected_size() {
        let geom = ArrayGeometry::linear(100, 1.0).unwrap();
        let iw = ImageWindow::from_counts(Point3::new(0.0, 100.0, 0.0), 41, 41, 1.0).unwrap();
        assert_eq!(iw.len(), 1681);
        let s = build_sensing_matrix(&geom, &iw, true).unwrap();
        assert_eq!((s.n_sensors(), s.n_pixels()), (100, 1681));
        let worst = (0..s.n_pixels())
            .map(|j| (s.matrix().column(j).norm() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn coherence_of_orthogonal_and_duplicate_columns() {
        let mut g = DMatrix::zeros(3, 3);
        g[(0, 0)] = Complex64::new(1.0, 0.0);
        g[(1, 1)] = Complex64::new(1.0, 0.0);
        g[(2, 2)] = Complex64::new(1.0, 0.0);
        let s = SensingMatrix {
            g: g.clone(),
            column_norms: vec![1.0; 3],
            normalized: true,
        };
        assert!(mutual_coherence(&s).unwrap() < 1e-15);

        let first = g.column(0).clone_owned();
        g.column_mut(2).copy_from(&first);
        let s = SensingMatrix {
            g,
            column_norms: vec![1.0; 3],
            normalized: true,
        };
        assert!((mutual_coherence(&s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_invariant_under_normalization() {
        let geom = ArrayGeometry::linear(12, 1.0).unwrap();
        let iw = ImageWindow::from_counts(Point3::new(0.0, 30.0, 0.0), 5, 5, 2.0).unwrap();
        let raw = build_sensing_matrix(&geom, &iw, false).unwrap();
        let unit = build_sensing_matrix(&geom, &iw, true).unwrap();
        let a = mutual_coherence(&raw).unwrap();
        let b = mutual_coherence(&unit).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn spherical_array_norm_is_constant_over_window() {
        let geom = ArrayGeometry::spherical(50.0, 1.0).unwrap();
        let samples = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(5.0, 0.0, 0.0),
            Point3::new(0.0, -5.0, 0.0),
            Point3::new(3.0, 3.0, 1.0),
            Point3::new(-2.0, 1.5, -4.0),
        ];
        let norms: Vec<f64> = samples
            .iter()
            .map(|y| green_vector(&geom, y).unwrap().norm_squared())
            .collect();
        let (lo, hi) = norms
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &n| (lo.min(n), hi.max(n)));
        assert!(
            (hi - lo) / lo < 0.02,
            "norm² spread {:.4}% exceeds 2%",
            100.0 * (hi - lo) / lo
        );
    }

    #[test]
    fn erc_is_one_for_orthonormal_support() {
        // support columns orthonormal, remaining column orthogonal to them
        let mut g = DMatrix::zeros(4, 3);
        g[(0, 0)] = Complex64::new(1.0, 0.0);
        g[(1, 1)] = Complex64::new(1.0, 0.0);
        g[(2, 2)] = Complex64::new(1.0, 0.0);
        let s = SensingMatrix {
            g,
            column_norms: vec![1.0; 3],
            normalized: true,
        };
        let erc = exact_recovery_coefficient(&s, &[0, 1]).unwrap();
        assert!((erc - 1.0).abs() < 1e-14);
    }

    #[test]
    fn erc_matches_least_squares_oracle_and_is_at_most_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let (n, k) = (5, 6);
        let mut g = DMatrix::zeros(n, k);
        for j in 0..k {
            let mut col = DVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            col /= Complex64::new(col.norm(), 0.0);
            g.column_mut(j).copy_from(&col);
        }
        let s = SensingMatrix {
            g: g.clone(),
            column_norms: vec![1.0; k],
            normalized: true,
        };
        let support = [1usize, 4];
        let erc = exact_recovery_coefficient(&s, &support).unwrap();
        assert!(erc <= 1.0 + 1e-12);

        // oracle: explicit pseudoinverse via dense inversion
        let g_sub = g.select_columns(support.iter());
        let gram_inv = g_sub.ad_mul(&g_sub).try_inverse().unwrap();
        let pinv = gram_inv * g_sub.adjoint();
        let mut worst = 0.0_f64;
        for j in 0..k {
            if support.contains(&j) {
                continue;
            }
            let w = &pinv * g.column(j).clone_owned();
            worst = worst.max(w.iter().map(|c| c.norm()).sum());
        }
        assert!((erc - (1.0 - worst)).abs() < 1e-10);
    }

    #[test]
    fn erc_rejects_dependent_support() {
        let mut g = DMatrix::zeros(3, 2);
        let c = Complex64::new(1.0 / 3.0_f64.sqrt(), 0.0);
        for i in 0..3 {
            g[(i, 0)] = c;
            g[(i, 1)] = c;
        }
        let s = SensingMatrix {
            g,
            column_norms: vec![1.0; 2],
            normalized: true,
        };
        assert!(matches!(
            exact_recovery_coefficient(&s, &[0, 1]),
            Err(Error::DependentSupportColumns)
        ));
    }

    #[test]
    fn window_indexing_is_row_major() {
        let iw = ImageWindow::from_counts(Point3::new(0.0, 100.0, 0.0), 3, 2, 1.0).unwrap();
        assert_eq!(iw.index_of(2, 1), Some(5));
        assert_eq!(iw.grid_coords(5), (2, 1));
        assert_eq!(iw.index_of(3, 0), None);
        let p = iw.point(0);
        assert!((p.x - (-1.0)).abs() < 1e-15 && (p.y - 99.5).abs() < 1e-15);
        // extents derived from counts
        assert_eq!(iw.extents(), (2.0, 1.0));
        let from_ext =
            ImageWindow::from_extents(Point3::new(0.0, 100.0, 0.0), 2.0, 1.0, 1.0).unwrap();
        assert_eq!(from_ext, iw);
    }
}
