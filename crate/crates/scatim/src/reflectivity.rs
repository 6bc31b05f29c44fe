//! Step two of the inversion: reflectivities from recovered effective sources.
//!
//! On a fixed support the exciting field at each scatterer is an explicit
//! sum over the recovered sources — no linear solve is involved — and the
//! reflectivity is the source strength divided by that field. A shot in
//! which the exciting field nearly vanishes says nothing about the
//! scatterer (it is screened by multiple scattering), so such shots are
//! excluded from the per-index average over illuminations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{green_kernel, ImageWindow, SensingMatrix};
use crate::illumination::Illumination;
use crate::solver::EffectiveSourceSolution;

/// Fraction of the per-shot median exciting-field magnitude below which a
/// shot is considered screened at an index.
pub const SCREEN_FRACTION: f64 = 1e-3;

/// Reflectivities on a recovered support, with per-shot detail.
#[derive(Debug, Clone)]
pub struct ReflectivityEstimate {
    /// Grid indices the estimate lives on (ascending, size M′).
    pub support: Vec<usize>,
    /// Averaged reflectivity per support index; zero where screened.
    pub rho: Vec<Complex64>,
    /// True where every shot was screened and no value could be assigned.
    pub screened: Vec<bool>,
    /// M′×ν per-shot estimates ρ^j (NaN-free; screened shots keep the raw ratio).
    pub per_illumination: DMatrix<Complex64>,
    /// M′×ν exciting fields used in the divisions.
    pub exciting_fields: DMatrix<Complex64>,
}

/// Exciting fields on a support from recovered sources, by direct summation:
/// g_f(y_j) = g₀ᵀ(y_j)·f + Σ_{k≠j} γ_k·G₀(y_j, y_k).
pub fn exciting_fields_on_support(
    sensing: &SensingMatrix,
    iw: &ImageWindow,
    support: &[usize],
    gamma: &[Complex64],
    f: &Illumination,
) -> Result<Vec<Complex64>> {
    if support.is_empty() {
        return Err(Error::invalid("support must be nonempty"));
    }
    if gamma.len() != support.len() {
        return Err(Error::invalid("one source value per support index required"));
    }
    let points: Vec<_> = support.iter().map(|&k| iw.point(k)).collect();
    let mut fields = Vec::with_capacity(support.len());
    for (j, &k) in support.iter().enumerate() {
        let mut field = sensing.incident_field(k, f.vector());
        for (l, _) in support.iter().enumerate() {
            if l != j {
                field += gamma[l] * green_kernel(&points[j], &points[l])?;
            }
        }
        fields.push(field);
    }
    Ok(fields)
}

/// Divide recovered sources by their exciting fields and average over shots.
///
/// Shots whose exciting-field magnitude falls below [`SCREEN_FRACTION`]
/// times the per-shot median are excluded from the average at that index;
/// an index screened in every shot is flagged instead of given a value.
pub fn recover_reflectivities(
    sol: &EffectiveSourceSolution,
    sensing: &SensingMatrix,
    iw: &ImageWindow,
    illuminations: &[Illumination],
) -> Result<ReflectivityEstimate> {
    if sol.support.is_empty() {
        return Err(Error::invalid("no support extracted; nothing to recover"));
    }
    let nu = sol.x.ncols();
    if illuminations.len() != nu {
        return Err(Error::invalid("one illumination per solution column required"));
    }
    let m = sol.support.len();
    let mut exciting = DMatrix::zeros(m, nu);
    let mut per_shot = DMatrix::zeros(m, nu);
    let mut usable = vec![vec![false; nu]; m];

    for (j, f) in illuminations.iter().enumerate() {
        let gamma: Vec<Complex64> = sol.support.iter().map(|&k| sol.x[(k, j)]).collect();
        let fields = exciting_fields_on_support(sensing, iw, &sol.support, &gamma, f)?;
        let mut mags: Vec<f64> = fields.iter().map(|c| c.norm()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = mags[mags.len() / 2];
        let tol = SCREEN_FRACTION * median;
        for i in 0..m {
            exciting[(i, j)] = fields[i];
            let ok = fields[i].norm() >= tol && fields[i].norm() > 0.0;
            usable[i][j] = ok;
            per_shot[(i, j)] = if fields[i].norm() > 0.0 {
                gamma[i] / fields[i]
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
    }

    let mut rho = Vec::with_capacity(m);
    let mut screened = Vec::with_capacity(m);
    for i in 0..m {
        let shots: Vec<usize> = (0..nu).filter(|&j| usable[i][j]).collect();
        if shots.is_empty() {
            rho.push(Complex64::new(0.0, 0.0));
            screened.push(true);
        } else {
            let sum: Complex64 = shots.iter().map(|&j| per_shot[(i, j)]).sum();
            rho.push(sum / Complex64::new(shots.len() as f64, 0.0));
            screened.push(false);
        }
    }

    Ok(ReflectivityEstimate {
        support: sol.support.clone(),
        rho,
        screened,
        per_illumination: per_shot,
        exciting_fields: exciting,
    })
}
