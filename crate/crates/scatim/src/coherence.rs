//! Numerical study of steering-vector coherence for spherical and planar arrays.
//!
//! For a pair of points separated by d inside the window, the normalized
//! inner product of their steering vectors decays like |sinc(κd)| under a
//! surrounding spherical array, and like (κd)^{-1/2} under a finite planar
//! array. These are order-of-magnitude statements, so the sweeps here are
//! compared through envelopes, slopes and two-sided bounds rather than
//! pointwise.

use nalgebra::Point3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{green_kernel, ArrayGeometry};

/// Direction of the separation relative to the line of sight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanarOrientation {
    /// Separation along the array axis (range).
    Parallel,
    /// Separation transverse to the array axis (cross-range).
    Perpendicular,
}

impl std::fmt::Display for PlanarOrientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanarOrientation::Parallel => write!(f, "parallel"),
            PlanarOrientation::Perpendicular => write!(f, "perpendicular"),
        }
    }
}

/// Measured and predicted coherence values over a separation sweep.
#[derive(Debug, Clone)]
pub struct CoherenceCurve {
    /// Pair separations in wavelengths, strictly increasing.
    pub separations: Vec<f64>,
    /// Normalized inner products from the discrete array.
    pub measured: Vec<f64>,
    /// Model values: |sinc(κd)| (spherical), fitted envelope or asymptotic
    /// oscillation (planar).
    pub predicted: Vec<f64>,
    /// Two-sided bound, when the theory provides one (planar parallel).
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    /// Human-readable description of the array and sweep.
    pub geometry: String,
}

fn check_separations(separations: &[f64], l: f64) -> Result<()> {
    if separations.is_empty() {
        return Err(Error::invalid("separation sweep is empty"));
    }
    for pair in separations.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::invalid("separations must be strictly increasing"));
        }
    }
    for &d in separations {
        if d < 3.0 {
            return Err(Error::ScaleSeparation(format!(
                "separation {d}λ is below 3λ; the asymptotics need λ ≪ d"
            )));
        }
        if d > l / 5.0 + 1e-9 {
            return Err(Error::ScaleSeparation(format!(
                "separation {d}λ exceeds L/5 = {}λ; the asymptotics need d ≪ L",
                l / 5.0
            )));
        }
    }
    Ok(())
}

/// Normalized |g*(y1)·g(y2)| for a discrete array, streamed over sensors.
fn normalized_inner_product(
    geom: &ArrayGeometry,
    y1: &Point3<f64>,
    y2: &Point3<f64>,
) -> Result<f64> {
    let (ip, n1, n2) = geom
        .sensors()
        .par_iter()
        .try_fold(
            || (Complex64::new(0.0, 0.0), 0.0_f64, 0.0_f64),
            |(ip, n1, n2), x| -> Result<_> {
                let g1 = green_kernel(x, y1)?;
                let g2 = green_kernel(x, y2)?;
                Ok((ip + g1.conj() * g2, n1 + g1.norm_sqr(), n2 + g2.norm_sqr()))
            },
        )
        .try_reduce(
            || (Complex64::new(0.0, 0.0), 0.0, 0.0),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)),
        )?;
    Ok(ip.norm() / (n1.sqrt() * n2.sqrt()))
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Coherence sweep for a spherical array of radius `l`, sensor spacing `h`.
///
/// Point pairs sit on a diameter, centered on the array. The prediction is
/// |sinc(κd)|.
pub fn spherical_coherence_curve(l: f64, h: f64, separations: &[f64]) -> Result<CoherenceCurve> {
    check_separations(separations, l)?;
    let geom = ArrayGeometry::spherical(l, h)?;
    let kappa = geom.wavenumber();
    let measured: Vec<f64> = separations
        .iter()
        .map(|&d| {
            let y1 = Point3::new(0.0, 0.0, -0.5 * d);
            let y2 = Point3::new(0.0, 0.0, 0.5 * d);
            normalized_inner_product(&geom, &y1, &y2)
        })
        .collect::<Result<_>>()?;
    let predicted = separations.iter().map(|&d| sinc(kappa * d).abs()).collect();
    Ok(CoherenceCurve {
        separations: separations.to_vec(),
        measured,
        predicted,
        lower: None,
        upper: None,
        geometry: format!("spherical array, L={l}λ, h={h}λ, {} sensors", geom.len()),
    })
}

/// Coherence sweep for a circular planar array of aperture `a` at distance `l`.
///
/// The reference point sits on the array axis at distance `l`; its partner
/// is offset by the separation either along the axis (`Parallel`) or
/// transverse to it (`Perpendicular`).
pub fn planar_coherence_curve(
    a: f64,
    l: f64,
    h: f64,
    separations: &[f64],
    orientation: PlanarOrientation,
) -> Result<CoherenceCurve> {
    check_separations(separations, l)?;
    let geom = ArrayGeometry::planar(a, h)?;
    let kappa = geom.wavenumber();
    let cos_phi0 = 1.0 / (1.0 + (a / (2.0 * l)).powi(2)).sqrt();

    if orientation == PlanarOrientation::Parallel {
        // the stationary-phase regime needs 1/(κd) ≪ cos φ₀ ≪ 1
        let min_sep = separations[0];
        if 1.0 / (kappa * min_sep) > 0.2 * cos_phi0 {
            return Err(Error::ScaleSeparation(format!(
                "κd·cosφ₀ = {:.2} at d = {min_sep}λ is too small; need 1/(κd) ≪ cosφ₀",
                kappa * min_sep * cos_phi0
            )));
        }
        if cos_phi0 > 0.98 {
            return Err(Error::ScaleSeparation(format!(
                "cosφ₀ = {cos_phi0:.3} too close to 1; enlarge the array relative to L"
            )));
        }
    }

    let measured: Vec<f64> = separations
        .iter()
        .map(|&d| {
            let y1 = Point3::new(0.0, 0.0, l);
            let y2 = match orientation {
                PlanarOrientation::Parallel => Point3::new(0.0, 0.0, l + d),
                PlanarOrientation::Perpendicular => Point3::new(d, 0.0, l),
            };
            normalized_inner_product(&geom, &y1, &y2)
        })
        .collect::<Result<_>>()?;

    let (predicted, lower, upper) = match orientation {
        PlanarOrientation::Perpendicular => {
            // envelope model C/√(κd) with C fitted to the measured sweep
            let (slope, intercept) = envelope_loglog_fit(separations, &measured, 6);
            let _ = slope;
            let predicted = separations
                .iter()
                .map(|&d| intercept * (kappa * d).powf(-0.5))
                .collect();
            (predicted, None, None)
        }
        PlanarOrientation::Parallel => {
            let log_sec = -cos_phi0.ln();
            let predicted = separations
                .iter()
                .map(|&d| {
                    let ke = kappa * d;
                    let osc = (Complex64::new(cos_phi0, 0.0)
                        - Complex64::new(0.0, -ke * (cos_phi0 - 1.0)).exp())
                    .norm();
                    osc / (ke * cos_phi0 * log_sec)
                })
                .collect();
            let lower = separations
                .iter()
                .map(|&d| (2.0 / cos_phi0 - 2.0) / (kappa * d * log_sec))
                .collect();
            let upper = separations
                .iter()
                .map(|&d| 2.0 / (kappa * d * cos_phi0 * log_sec))
                .collect();
            (predicted, Some(lower), Some(upper))
        }
    };

    Ok(CoherenceCurve {
        separations: separations.to_vec(),
        measured,
        predicted,
        lower,
        upper,
        geometry: format!(
            "planar array, a={a}λ, L={l}λ, h={h}λ, {} sensors, {} separation",
            geom.len(),
            orientation
        ),
    })
}

/// Fit log(envelope) = slope·log(d) + log(C) on binned maxima of the sweep.
///
/// Oscillatory curves dip toward zero, so the fit uses the maximum within
/// each of `bins` logarithmic separation bins. Returns (slope, C).
pub fn envelope_loglog_fit(separations: &[f64], values: &[f64], bins: usize) -> (f64, f64) {
    assert_eq!(separations.len(), values.len());
    let lo = separations[0].ln();
    let hi = separations[separations.len() - 1].ln() + 1e-12;
    let width = (hi - lo) / bins as f64;
    let mut best: Vec<Option<(f64, f64)>> = vec![None; bins];
    for (&d, &v) in separations.iter().zip(values.iter()) {
        let bin = (((d.ln() - lo) / width) as usize).min(bins - 1);
        if best[bin].map_or(true, |(_, bv)| v > bv) {
            best[bin] = Some((d, v));
        }
    }
    let pts: Vec<(f64, f64)> = best
        .into_iter()
        .flatten()
        .filter(|&(_, v)| v > 0.0)
        .map(|(d, v)| (d.ln(), v.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = ((sy - slope * sx) / n).exp();
    (slope, intercept)
}

/// Closed-form continuum value of ‖g₀(y)‖² under a planar array:
/// log(1 + a²/4L²)/(16πh²).
pub fn planar_norm_prediction(a: f64, l: f64, h: f64) -> f64 {
    (1.0 + (a * a) / (4.0 * l * l)).ln() / (16.0 * std::f64::consts::PI * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::green_vector;

    #[test]
    fn spherical_sweep_tracks_sinc_zeros() {
        // κd is an integer multiple of π at every half-wavelength separation
        let seps: Vec<f64> = (0..6).map(|i| 4.0 + 0.5 * i as f64).collect();
        let curve = spherical_coherence_curve(80.0, 1.0, &seps).unwrap();
        for (i, &d) in curve.separations.iter().enumerate() {
            assert!(curve.predicted[i] < 1e-10, "sinc({d}κ) should vanish");
            assert!(curve.measured[i] < 0.05, "measured {:.3} at d={d}", curve.measured[i]);
            assert!(curve.measured[i] >= 0.0 && curve.measured[i] <= 1.0);
        }
    }

    #[test]
    fn spherical_sweep_rejects_out_of_range_separations() {
        assert!(matches!(
            spherical_coherence_curve(80.0, 1.0, &[2.0]),
            Err(Error::ScaleSeparation(_))
        ));
        assert!(matches!(
            spherical_coherence_curve(80.0, 1.0, &[20.0]),
            Err(Error::ScaleSeparation(_))
        ));
    }

    #[test]
    fn halving_the_spacing_barely_moves_the_measurement() {
        // Riemann-sum convergence of the discrete array toward the continuum
        let seps = [5.0];
        let coarse = spherical_coherence_curve(50.0, 0.5, &seps).unwrap();
        let fine = spherical_coherence_curve(50.0, 0.25, &seps).unwrap();
        let diff = (coarse.measured[0] - fine.measured[0]).abs();
        assert!(diff < 0.01, "refinement moved the value by {diff:.4}");
    }

    #[test]
    fn planar_norm_matches_continuum_formula() {
        let (a, l, h) = (60.0, 60.0, 0.5);
        let geom = ArrayGeometry::planar(a, h).unwrap();
        let g = green_vector(&geom, &Point3::new(0.0, 0.0, l)).unwrap();
        let predicted = planar_norm_prediction(a, l, h);
        let measured = g.norm_squared();
        let rel = (measured - predicted).abs() / predicted;
        assert!(rel < 0.05, "norm² off by {:.2}%", 100.0 * rel);
    }

    #[test]
    fn envelope_fit_recovers_a_known_power_law() {
        let seps: Vec<f64> = (0..40).map(|i| 4.0 + i as f64).collect();
        let vals: Vec<f64> = seps.iter().map(|&d| 3.0 * d.powf(-0.5)).collect();
        let (slope, c) = envelope_loglog_fit(&seps, &vals, 6);
        assert!((slope + 0.5).abs() < 1e-9, "slope {slope}");
        assert!((c - 3.0).abs() < 1e-9, "scale {c}");
        // oscillation dips must not drag the envelope down
        let mut dipped = vals.clone();
        dipped[7] = 1e-9;
        dipped[23] = 0.0;
        let (slope, _) = envelope_loglog_fit(&seps, &dipped, 6);
        assert!((slope + 0.5).abs() < 0.05, "slope with dips {slope}");
    }

    #[test]
    fn parallel_precondition_is_enforced() {
        // a tiny array at long range makes cosφ₀ ≈ 1
        assert!(matches!(
            planar_coherence_curve(5.0, 100.0, 0.5, &[4.0, 6.0], PlanarOrientation::Parallel),
            Err(Error::ScaleSeparation(_))
        ));
    }
}
