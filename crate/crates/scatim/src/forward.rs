//! Foldy-Lax forward model: exciting fields, response matrix, array data.
//!
//! A scene of M point scatterers on the image-window grid couples through
//! the self-consistent system Z·Φᵉ = Φ^inc, where Z has unit diagonal and
//! off-diagonal entries −α_j·G₀(y_i, y_j). The array response matrix
//! P = G_M·diag(α)·Z⁻¹·G_Mᵀ then captures all orders of multiple
//! scattering, and the data for an illumination f is b = P·f (plus noise).

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{green_kernel, green_vector, ArrayGeometry, ImageWindow};
use crate::illumination::Illumination;

/// Condition-number guard on the Foldy-Lax matrix; beyond this the solve
/// errors instead of returning garbage.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Sparse complex reflectivity vector on the image-window grid.
#[derive(Debug, Clone)]
pub struct ScattererScene {
    rho0: DVector<Complex64>,
    support: Vec<usize>,
}

impl ScattererScene {
    /// Build from a dense reflectivity vector; the support is its nonzero set.
    pub fn from_dense(rho0: DVector<Complex64>) -> Self {
        let support = (0..rho0.len())
            .filter(|&k| rho0[k] != Complex64::new(0.0, 0.0))
            .collect();
        Self { rho0, support }
    }

    /// Build from (grid index, reflectivity) pairs on a grid of `k` points.
    pub fn from_entries(k: usize, entries: &[(usize, Complex64)]) -> Result<Self> {
        let mut rho0 = DVector::zeros(k);
        for &(idx, alpha) in entries {
            if idx >= k {
                return Err(Error::invalid(format!(
                    "scatterer index {idx} outside grid of {k} points"
                )));
            }
            if rho0[idx] != Complex64::new(0.0, 0.0) {
                return Err(Error::invalid(format!("duplicate scatterer index {idx}")));
            }
            rho0[idx] = alpha;
        }
        Ok(Self::from_dense(rho0))
    }

    /// Full reflectivity vector ρ₀ (length K).
    pub fn rho0(&self) -> &DVector<Complex64> {
        &self.rho0
    }

    /// Indices of the nonzero reflectivities, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Number of scatterers M.
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    /// Reflectivities α_j in support order.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.support.iter().map(|&k| self.rho0[k]).collect()
    }
}

/// Which form of the Foldy-Lax matrix is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldyLaxForm {
    /// M×M matrix on the scene support.
    Support,
    /// K×K matrix over the whole grid (dense; built only on request).
    Extended,
}

/// The Foldy-Lax coupling matrix: unit diagonal, −ρ_j·G₀(y_i,y_j) off it.
#[derive(Debug, Clone)]
pub struct FoldyLaxMatrix {
    z: DMatrix<Complex64>,
    form: FoldyLaxForm,
}

impl FoldyLaxMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.z
    }

    pub fn form(&self) -> FoldyLaxForm {
        self.form
    }
}

/// Build the Foldy-Lax matrix for a scene in the requested form.
pub fn foldy_lax_matrix(
    scene: &ScattererScene,
    iw: &ImageWindow,
    form: FoldyLaxForm,
) -> Result<FoldyLaxMatrix> {
    if scene.rho0().len() != iw.len() {
        return Err(Error::invalid("scene length does not match the image window"));
    }
    let z = match form {
        FoldyLaxForm::Support => {
            let m = scene.sparsity();
            let alphas = scene.amplitudes();
            let points: Vec<_> = scene.support().iter().map(|&k| iw.point(k)).collect();
            DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    -alphas[j] * green_kernel(&points[i], &points[j]).expect("distinct grid points")
                }
            })
        }
        FoldyLaxForm::Extended => {
            let k = iw.len();
            let points = iw.points();
            DMatrix::from_fn(k, k, |i, j| {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else if scene.rho0()[j] == Complex64::new(0.0, 0.0) {
                    Complex64::new(0.0, 0.0)
                } else {
                    -scene.rho0()[j]
                        * green_kernel(&points[i], &points[j]).expect("distinct grid points")
                }
            })
        }
    };
    Ok(FoldyLaxMatrix { z, form })
}

fn guarded_lu(z: &DMatrix<Complex64>) -> Result<nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    let sv = z.clone().singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::ResonantConfiguration {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    Ok(z.clone().lu())
}

/// Exciting fields Φᵉ = Z_M⁻¹·Φ^inc at the scatterer positions.
pub fn solve_exciting_fields(
    scene: &ScattererScene,
    geom: &ArrayGeometry,
    iw: &ImageWindow,
    f: &Illumination,
) -> Result<DVector<Complex64>> {
    if scene.sparsity() == 0 {
        return Err(Error::invalid("scene has no scatterers"));
    }
    if f.vector().len() != geom.len() {
        return Err(Error::invalid("illumination length does not match the array"));
    }
    let z = foldy_lax_matrix(scene, iw, FoldyLaxForm::Support)?;
    let mut phi_inc = DVector::zeros(scene.sparsity());
    for (j, &k) in scene.support().iter().enumerate() {
        let g = green_vector(geom, &iw.point(k))?;
        phi_inc[j] = g.dot(f.vector());
    }
    let lu = guarded_lu(z.matrix())?;
    let mut phi_e = lu
        .solve(&phi_inc)
        .ok_or(Error::ResonantConfiguration {
            cond: f64::INFINITY,
            limit: CONDITION_LIMIT,
        })?;
    // one step of iterative refinement keeps the residual near working precision
    let residual = &phi_inc - z.matrix() * &phi_e;
    if let Some(corr) = lu.solve(&residual) {
        phi_e += corr;
    }
    Ok(phi_e)
}

/// True effective source vector γ_f = diag(ρ)·Z⁻¹·Gᵀ·f, embedded in length K.
///
/// This is the exact forward-model quantity that step one of the inversion
/// estimates from data.
pub fn effective_source_vector(
    scene: &ScattererScene,
    geom: &ArrayGeometry,
    iw: &ImageWindow,
    f: &Illumination,
) -> Result<DVector<Complex64>> {
    let phi_e = solve_exciting_fields(scene, geom, iw, f)?;
    let mut gamma = DVector::zeros(iw.len());
    for (j, &k) in scene.support().iter().enumerate() {
        gamma[k] = scene.rho0()[k] * phi_e[j];
    }
    Ok(gamma)
}

/// Cached singular value decomposition U·Σ·V* of a response matrix.
///
/// Columns are ordered by descending singular value (ties broken by index)
/// and each (U, V) column pair is rotated by a common phase so the
/// largest-magnitude entry of the V column is real and positive. This makes
/// the decomposition reproducible while preserving P·V_j = σ_j·U_j.
#[derive(Debug, Clone)]
pub struct SvdParts {
    pub u: DMatrix<Complex64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<Complex64>,
}

/// The N×N array response matrix with a lazily cached SVD.
#[derive(Debug, Clone)]
pub struct ResponseMatrix {
    p: DMatrix<Complex64>,
    svd: OnceLock<SvdParts>,
    noise_level: f64,
}

impl ResponseMatrix {
    /// Wrap an externally assembled (possibly noisy) response matrix.
    pub fn from_matrix(p: DMatrix<Complex64>, noise_level: f64) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::invalid("response matrix must be square"));
        }
        Ok(Self {
            p,
            svd: OnceLock::new(),
            noise_level,
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.p
    }

    /// Number of transducers N.
    pub fn len(&self) -> usize {
        self.p.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Fraction of noise the stored matrix was synthesized with (percent).
    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    /// Relative asymmetry ‖P−Pᵀ‖_F/‖P‖_F; near zero for exact physics.
    pub fn symmetry_defect(&self) -> f64 {
        let diff = (&self.p - self.p.transpose()).norm();
        diff / self.p.norm().max(f64::MIN_POSITIVE)
    }

    /// SVD with deterministic ordering and phase convention, computed once.
    pub fn svd(&self) -> &SvdParts {
        self.svd.get_or_init(|| {
            let svd = self.p.clone().svd(true, true);
            let u_raw = svd.u.expect("u requested");
            let vt_raw = svd.v_t.expect("v_t requested");
            let sig_raw = svd.singular_values;
            let r = sig_raw.len();

            let mut order: Vec<usize> = (0..r).collect();
            order.sort_by(|&a, &b| {
                sig_raw[b]
                    .partial_cmp(&sig_raw[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });

            let n = self.p.nrows();
            let mut u = DMatrix::zeros(n, r);
            let mut v = DMatrix::zeros(n, r);
            let mut sigma = DVector::zeros(r);
            for (dst, &src) in order.iter().enumerate() {
                sigma[dst] = sig_raw[src];
                u.column_mut(dst).copy_from(&u_raw.column(src));
                // V column = conjugate of the V^H row
                let vcol = vt_raw.row(src).transpose().map(|c| c.conj());
                v.column_mut(dst).copy_from(&vcol);
            }
            for j in 0..r {
                let (mut best, mut mag) = (0, 0.0);
                for i in 0..n {
                    let m = v[(i, j)].norm();
                    if m > mag {
                        mag = m;
                        best = i;
                    }
                }
                if mag > 0.0 {
                    let phase = v[(best, j)] / Complex64::new(mag, 0.0);
                    let rot = phase.conj();
                    v.column_mut(j).scale_mut(1.0);
                    for i in 0..n {
                        v[(i, j)] *= rot;
                        u[(i, j)] *= rot;
                    }
                }
            }
            SvdParts { u, sigma, v }
        })
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> &DVector<f64> {
        &self.svd().sigma
    }
}

/// Response matrix P = G_M·diag(α)·Z_M⁻¹·G_Mᵀ via the support-sized system.
pub fn response_matrix(
    scene: &ScattererScene,
    geom: &ArrayGeometry,
    iw: &ImageWindow,
) -> Result<ResponseMatrix> {
    if scene.sparsity() == 0 {
        return Err(Error::invalid("scene has no scatterers"));
    }
    let m = scene.sparsity();
    let n = geom.len();
    let alphas = scene.amplitudes();

    let mut g_m = DMatrix::zeros(n, m);
    for (j, &k) in scene.support().iter().enumerate() {
        g_m.column_mut(j).copy_from(&green_vector(geom, &iw.point(k))?);
    }

    let z = foldy_lax_matrix(scene, iw, FoldyLaxForm::Support)?;
    let lu = guarded_lu(z.matrix())?;
    let w = lu
        .solve(&g_m.transpose())
        .ok_or(Error::ResonantConfiguration {
            cond: f64::INFINITY,
            limit: CONDITION_LIMIT,
        })?;

    let mut scaled = g_m;
    for j in 0..m {
        scaled.column_mut(j).scale_mut(1.0);
        let a = alphas[j];
        for i in 0..n {
            scaled[(i, j)] *= a;
        }
    }
    let p = scaled * w;
    ResponseMatrix::from_matrix(p, 0.0)
}

/// Response matrix via the extended K×K form P = G·diag(ρ₀)·Z⁻¹·Gᵀ.
///
/// Dense in K²; intended for cross-validation at small K, not production runs.
pub fn extended_response_matrix(
    scene: &ScattererScene,
    geom: &ArrayGeometry,
    iw: &ImageWindow,
) -> Result<DMatrix<Complex64>> {
    if scene.sparsity() == 0 {
        return Err(Error::invalid("scene has no scatterers"));
    }
    let k = iw.len();
    let g = crate::geometry::build_sensing_matrix(geom, iw, false)?;
    let z = foldy_lax_matrix(scene, iw, FoldyLaxForm::Extended)?;
    let lu = guarded_lu(z.matrix())?;
    let w = lu
        .solve(&g.matrix().transpose())
        .ok_or(Error::ResonantConfiguration {
            cond: f64::INFINITY,
            limit: CONDITION_LIMIT,
        })?;
    let mut scaled = g.matrix().clone();
    for j in 0..k {
        let rho = scene.rho0()[j];
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= rho;
        }
    }
    Ok(scaled * w)
}

/// Single-scattering (Born) response P_ss = G·diag(ρ)·Gᵀ.
pub fn single_scattering_response(
    scene: &ScattererScene,
    geom: &ArrayGeometry,
    iw: &ImageWindow,
) -> Result<DMatrix<Complex64>> {
    if scene.sparsity() == 0 {
        return Err(Error::invalid("scene has no scatterers"));
    }
    let m = scene.sparsity();
    let n = geom.len();
    let alphas = scene.amplitudes();
    let mut g_m = DMatrix::zeros(n, m);
    for (j, &k) in scene.support().iter().enumerate() {
        g_m.column_mut(j).copy_from(&green_vector(geom, &iw.point(k))?);
    }
    let mut scaled = g_m.clone();
    for j in 0..m {
        let a = alphas[j];
        for i in 0..n {
            scaled[(i, j)] *= a;
        }
    }
    Ok(scaled * g_m.transpose())
}

/// Percentage of multiple scattering, 100·‖P−P_ss‖_F/‖P_ss‖_F.
pub fn multiple_scattering_amount(
    scene: &ScattererScene,
    geom: &ArrayGeometry,
    iw: &ImageWindow,
) -> Result<f64> {
    let p = response_matrix(scene, geom, iw)?;
    let p_ss = single_scattering_response(scene, geom, iw)?;
    let denom = p_ss.norm();
    Ok(100.0 * (p.matrix() - &p_ss).norm() / denom)
}

/// Array data b = P·f + e with ‖e‖ = (noise_pct/100)·‖P·f‖.
///
/// The noise is an i.i.d. complex Gaussian draw rescaled to the exact target
/// energy; the draw is deterministic under the seed.
pub fn synthesize_data(
    p: &ResponseMatrix,
    f: &Illumination,
    noise_pct: f64,
    seed: u64,
) -> Result<DVector<Complex64>> {
    if noise_pct < 0.0 {
        return Err(Error::invalid("noise percentage must be non-negative"));
    }
    if f.vector().len() != p.len() {
        return Err(Error::invalid("illumination length does not match the array"));
    }
    let mut b = p.matrix() * f.vector();
    let signal = b.norm();
    if noise_pct > 0.0 && signal > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = DVector::from_fn(p.len(), |_, _| {
            Complex64::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            )
        });
        let target = noise_pct / 100.0 * signal;
        let norm = e.norm();
        if norm > 0.0 {
            e.scale_mut(target / norm);
            b += e;
        }
    }
    Ok(b)
}
