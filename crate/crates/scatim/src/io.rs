//! CSV and PGM writers for matrices, scenes, curves and image grids.
//!
//! Complex entries are written as adjacent `re,im` column pairs. Images go
//! out both as plain CSV grids and as binary 8-bit PGM with values mapped
//! linearly from [0, max], so anything can render them.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coherence::CoherenceCurve;
use crate::error::Result;
use crate::forward::ScattererScene;
use crate::geometry::ImageWindow;

/// Write a complex matrix as CSV with `re_j,im_j` column pairs.
pub fn write_complex_matrix_csv(path: &Path, m: &DMatrix<Complex64>) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let mut first = true;
        for j in 0..m.ncols() {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("{},{}", m[(i, j)].re, m[(i, j)].im));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a complex matrix written by [`write_complex_matrix_csv`].
pub fn read_complex_matrix_csv(path: &Path) -> Result<DMatrix<Complex64>> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| crate::error::Error::invalid(format!("bad CSV number: {e}")))
            })
            .collect::<Result<_>>()?;
        if fields.len() % 2 != 0 {
            return Err(crate::error::Error::invalid(
                "complex CSV needs an even number of fields per row",
            ));
        }
        rows.push(fields.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    }
    if rows.is_empty() {
        return Err(crate::error::Error::invalid("empty CSV matrix"));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(crate::error::Error::invalid("ragged CSV matrix"));
    }
    let nrows = rows.len();
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Write a scene as `index,re,im` rows (0-based grid index).
pub fn write_scene_csv(path: &Path, scene: &ScattererScene) -> Result<()> {
    let mut out = String::from("index,re,im\n");
    for &k in scene.support() {
        let v = scene.rho0()[k];
        out.push_str(&format!("{k},{},{}\n", v.re, v.im));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a scene written by [`write_scene_csv`] onto a grid of `k` points.
pub fn read_scene_csv(path: &Path, k: usize) -> Result<ScattererScene> {
    let text = fs::read_to_string(path)?;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("index")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(crate::error::Error::invalid(format!(
                "scene CSV line {} needs index,re,im",
                lineno + 1
            )));
        }
        let idx: usize = fields[0].trim().parse().map_err(|e| {
            crate::error::Error::invalid(format!("bad scene index on line {}: {e}", lineno + 1))
        })?;
        let re: f64 = fields[1].trim().parse().map_err(|e| {
            crate::error::Error::invalid(format!("bad value on line {}: {e}", lineno + 1))
        })?;
        let im: f64 = fields[2].trim().parse().map_err(|e| {
            crate::error::Error::invalid(format!("bad value on line {}: {e}", lineno + 1))
        })?;
        entries.push((idx, Complex64::new(re, im)));
    }
    ScattererScene::from_entries(k, &entries)
}

/// A real-valued image aligned to an image-window grid, with true-scatterer
/// markers carried along for reports.
#[derive(Debug, Clone)]
pub struct ImageGrid {
    pub nx: usize,
    pub ny: usize,
    /// Row-major values, one per grid point.
    pub values: Vec<f64>,
    /// Grid indices of the true scatterers (may be empty).
    pub markers: Vec<usize>,
}

impl ImageGrid {
    pub fn new(iw: &ImageWindow, values: Vec<f64>, markers: Vec<usize>) -> Result<Self> {
        let (nx, ny) = iw.counts();
        if values.len() != nx * ny {
            return Err(crate::error::Error::invalid(
                "image length does not match the window grid",
            ));
        }
        Ok(Self {
            nx,
            ny,
            values,
            markers,
        })
    }

    /// CSV grid: one row per iy, nx comma-separated values.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for iy in 0..self.ny {
            let row: Vec<String> = (0..self.nx)
                .map(|ix| format!("{}", self.values[iy * self.nx + ix]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Binary 8-bit PGM, values mapped linearly from [0, max].
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let max = self.values.iter().cloned().fold(0.0_f64, f64::max);
        let mut bytes = Vec::with_capacity(self.nx * self.ny + 32);
        bytes.extend_from_slice(format!("P5\n{} {}\n255\n", self.nx, self.ny).as_bytes());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let v = self.values[iy * self.nx + ix];
                let level = if max > 0.0 {
                    (v / max * 255.0).round().clamp(0.0, 255.0) as u8
                } else {
                    0
                };
                bytes.push(level);
            }
        }
        let mut file = fs::File::create(path)?;
        file.write_all(&bytes)?;
        Ok(())
    }

    /// CSV of marker pixels: `index,ix,iy`.
    pub fn write_markers_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("index,ix,iy\n");
        for &k in &self.markers {
            out.push_str(&format!("{k},{},{}\n", k % self.nx, k / self.nx));
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Write a coherence curve as `sep,measured,predicted,lower,upper` rows.
pub fn write_curve_csv(path: &Path, curve: &CoherenceCurve) -> Result<()> {
    let mut out = String::from("separation,measured,predicted,lower_bound,upper_bound\n");
    for i in 0..curve.separations.len() {
        let lower = curve
            .lower
            .as_ref()
            .map_or(String::new(), |v| format!("{}", v[i]));
        let upper = curve
            .upper
            .as_ref()
            .map_or(String::new(), |v| format!("{}", v[i]));
        out.push_str(&format!(
            "{},{},{},{lower},{upper}\n",
            curve.separations[i], curve.measured[i], curve.predicted[i]
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write real values as a single CSV column with a header.
pub fn write_column_csv(path: &Path, header: &str, values: &[f64]) -> Result<()> {
    let mut out = format!("{header}\n");
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    #[test]
    fn complex_matrix_roundtrips() {
        let dir = std::env::temp_dir().join("scatim_io_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.csv");
        let m = DMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64 + 0.25, j as f64 - 1.5));
        write_complex_matrix_csv(&path, &m).unwrap();
        let back = read_complex_matrix_csv(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn scene_roundtrips() {
        let dir = std::env::temp_dir().join("scatim_io_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("scene.csv");
        let scene = ScattererScene::from_entries(
            50,
            &[(3, Complex64::new(1.0, -2.0)), (17, Complex64::new(0.5, 0.25))],
        )
        .unwrap();
        write_scene_csv(&path, &scene).unwrap();
        let back = read_scene_csv(&path, 50).unwrap();
        assert_eq!(scene.support(), back.support());
        assert_eq!(scene.rho0(), back.rho0());
    }

    #[test]
    fn pgm_has_correct_header_and_size() {
        let dir = std::env::temp_dir().join("scatim_io_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("img.pgm");
        let iw = ImageWindow::from_counts(Point3::origin(), 4, 3, 1.0).unwrap();
        let values: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let img = ImageGrid::new(&iw, values, vec![5]).unwrap();
        img.write_pgm(&path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n4 3\n255\n"));
        assert_eq!(bytes.len(), b"P5\n4 3\n255\n".len() + 12);
        assert_eq!(*bytes.last().unwrap(), 255);
    }
}
