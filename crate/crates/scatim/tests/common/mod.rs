//! Shared helpers for integration tests: instance generators, the
//! exhaustive ℓ0 oracle, and uniform pass/fail reporting.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Print one pass/fail line for a criterion and return whether it passed.
pub fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

/// Random matrix with unit-norm complex columns.
pub fn random_unit_columns(n: usize, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut g = DMatrix::zeros(n, k);
    for j in 0..k {
        let mut col = DVector::from_fn(n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        col /= Complex64::new(col.norm(), 0.0);
        g.column_mut(j).copy_from(&col);
    }
    g
}

/// Random complex value with magnitude in [lo, hi].
pub fn random_value(lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(
        lo + (hi - lo) * rng.gen::<f64>(),
        std::f64::consts::TAU * rng.gen::<f64>(),
    )
}

/// `count` distinct indices below `k`.
pub fn random_support(count: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut support = Vec::new();
    while support.len() < count {
        let idx = rng.gen_range(0..k);
        if !support.contains(&idx) {
            support.push(idx);
        }
    }
    support.sort_unstable();
    support
}

fn combinations(k: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(start: usize, k: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..k {
            current.push(i);
            rec(i + 1, k, size, current, out);
            current.pop();
        }
    }
    rec(0, k, size, &mut current, &mut out);
    out
}

fn least_squares_residual(g: &DMatrix<Complex64>, cols: &[usize], b: &DVector<Complex64>) -> f64 {
    if cols.is_empty() {
        return b.norm();
    }
    let sub = g.select_columns(cols.iter());
    let gram = sub.ad_mul(&sub);
    let rhs = sub.ad_mul(&DMatrix::from_column_slice(b.len(), 1, b.as_slice()));
    match gram.lu().solve(&rhs) {
        Some(x) => (b - sub * x.column(0).clone_owned()).norm(),
        None => f64::INFINITY,
    }
}

/// Exhaustive sparsest-support oracle: the smallest support (up to
/// `max_size`) whose least-squares fit explains `b` to `tol`·‖b‖, ties
/// broken by residual. Entirely independent of the iterative solver.
pub fn l0_oracle_support(
    g: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    max_size: usize,
    tol: f64,
) -> Vec<usize> {
    let scale = b.norm();
    if scale == 0.0 {
        return Vec::new();
    }
    for size in 0..=max_size {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for cols in combinations(g.ncols(), size) {
            let res = least_squares_residual(g, &cols, b);
            if res <= tol * scale {
                if best.as_ref().map_or(true, |(r, _)| res < *r) {
                    best = Some((res, cols));
                }
            }
        }
        if let Some((_, cols)) = best {
            return cols;
        }
    }
    Vec::new()
}
