//! MUSIC imaging from the significant singular vectors of the response matrix.
//!
//! The pseudospectrum at a grid point is the reciprocal distance between the
//! normalized steering vector and the signal subspace spanned by the top
//! left singular vectors. Peaks mark scatterer locations once the subspace
//! dimension reaches the number of scatterers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::ResponseMatrix;
use crate::geometry::{green_vector, ArrayGeometry, ImageWindow};

/// Keeps the pseudospectrum finite where the steering vector lies exactly
/// in the signal subspace.
pub const FLOOR_EPS: f64 = 1e-12;

/// Pseudospectrum over the image-window grid.
#[derive(Debug, Clone)]
pub struct MusicImage {
    /// One non-negative value per grid point, row-major.
    pub values: Vec<f64>,
    /// Number of singular vectors spanning the signal subspace.
    pub nu_used: usize,
}

impl MusicImage {
    /// Indices of the `count` largest pseudospectrum values, descending.
    pub fn top_indices(&self, count: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order.truncate(count);
        order
    }

    /// Indices of the `count` largest local maxima (8-neighborhood) on the grid.
    pub fn top_local_maxima(&self, iw: &ImageWindow, count: usize) -> Vec<usize> {
        let (nx, ny) = iw.counts();
        let mut peaks: Vec<usize> = (0..self.values.len())
            .filter(|&k| {
                let (ix, iy) = iw.grid_coords(k);
                let v = self.values[k];
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                        if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                            continue;
                        }
                        if self.values[jy as usize * nx + jx as usize] > v {
                            return false;
                        }
                    }
                }
                true
            })
            .collect();
        peaks.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        peaks.truncate(count);
        peaks
    }
}

/// MUSIC pseudospectrum using the `nu` leading left singular vectors.
pub fn music_image(
    p: &ResponseMatrix,
    iw: &ImageWindow,
    geom: &ArrayGeometry,
    nu: usize,
) -> Result<MusicImage> {
    let n = p.len();
    if nu == 0 || nu > n {
        return Err(Error::invalid(format!(
            "subspace dimension {nu} out of range 1..={n}"
        )));
    }
    if geom.len() != n {
        return Err(Error::invalid("geometry does not match the response matrix"));
    }
    let u = &p.svd().u;
    let points = iw.points();
    let values: Vec<f64> = points
        .par_iter()
        .map(|y| {
            let mut g = green_vector(geom, y)?;
            let norm = g.norm();
            g /= num_complex::Complex64::new(norm, 0.0);
            let mut projection = 0.0;
            for j in 0..nu {
                projection += u.column(j).dotc(&g).norm_sqr();
            }
            // rounding can push the projection a hair past one
            let s = projection.min(1.0);
            Ok(1.0 / (1.0 - s + FLOOR_EPS))
        })
        .collect::<Result<_>>()?;
    Ok(MusicImage {
        values,
        nu_used: nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{response_matrix, ScattererScene};
    use nalgebra::Point3;
    use num_complex::Complex64;

    fn setup() -> (ArrayGeometry, ImageWindow) {
        let geom = ArrayGeometry::linear(24, 1.0).unwrap();
        let iw = ImageWindow::from_counts(Point3::new(0.0, 40.0, 0.0), 9, 9, 2.0).unwrap();
        (geom, iw)
    }

    #[test]
    fn single_scatterer_peak_is_at_the_true_pixel() {
        let (geom, iw) = setup();
        let scene =
            ScattererScene::from_entries(iw.len(), &[(31, Complex64::new(2.0, 1.0))]).unwrap();
        let p = response_matrix(&scene, &geom, &iw).unwrap();
        let img = music_image(&p, &iw, &geom, 1).unwrap();
        let argmax = img
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 31);
        assert!(img.values.iter().all(|&v| v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn full_subspace_flattens_the_image() {
        let (geom, iw) = setup();
        let scene =
            ScattererScene::from_entries(iw.len(), &[(31, Complex64::new(2.0, 1.0))]).unwrap();
        let p = response_matrix(&scene, &geom, &iw).unwrap();
        let img = music_image(&p, &iw, &geom, geom.len()).unwrap();
        // s(y) = 1 everywhere: the image sits at the 1/floor cap
        let cap = 1.0 / FLOOR_EPS;
        for &v in &img.values {
            assert!(v > 0.1 * cap, "value {v:.3e} far below cap");
        }
    }

    #[test]
    fn projection_grows_with_subspace_dimension() {
        let (geom, iw) = setup();
        let entries = [
            (12, Complex64::new(2.0, 0.4)),
            (40, Complex64::new(-1.0, 1.6)),
            (66, Complex64::new(0.9, -0.8)),
        ];
        let scene = ScattererScene::from_entries(iw.len(), &entries).unwrap();
        let p = response_matrix(&scene, &geom, &iw).unwrap();
        let mut last: Option<Vec<f64>> = None;
        for nu in 1..=4 {
            let img = music_image(&p, &iw, &geom, nu).unwrap();
            if let Some(prev) = &last {
                // 1/(1−s+eps) is monotone in s, so values must not decrease
                for (a, b) in prev.iter().zip(img.values.iter()) {
                    assert!(b >= a || (a - b) / a < 1e-9);
                }
            }
            last = Some(img.values);
        }
    }

    #[test]
    fn matched_subspace_finds_all_scatterers() {
        let (geom, iw) = setup();
        let entries = [
            (12, Complex64::new(2.0, 0.4)),
            (40, Complex64::new(-1.0, 1.6)),
            (66, Complex64::new(0.9, -0.8)),
        ];
        let scene = ScattererScene::from_entries(iw.len(), &entries).unwrap();
        let p = response_matrix(&scene, &geom, &iw).unwrap();
        let img = music_image(&p, &iw, &geom, 3).unwrap();
        let mut top = img.top_indices(3);
        top.sort_unstable();
        assert_eq!(top, vec![12, 40, 66]);
    }

    #[test]
    fn nu_out_of_range_is_rejected() {
        let (geom, iw) = setup();
        let scene =
            ScattererScene::from_entries(iw.len(), &[(31, Complex64::new(2.0, 1.0))]).unwrap();
        let p = response_matrix(&scene, &geom, &iw).unwrap();
        assert!(music_image(&p, &iw, &geom, 0).is_err());
        assert!(music_image(&p, &iw, &geom, geom.len() + 1).is_err());
    }
}
