//! Savitzky-Golay smoothing of ball coordinates.
//!
//! The filter replaces each sample by the center value of a least-squares
//! polynomial fit over a symmetric window. Windows never span dead-ball
//! gaps: set pieces cause genuine velocity discontinuities and smoothing
//! across them corrupts the kinematics downstream.

use std::collections::HashMap;

use crate::config::SmoothingConfig;
use crate::frames::FrameSeries;

/// Center-evaluation convolution weights for a symmetric window of
/// half-width `half` and the given polynomial order.
///
/// Solves (A^T A) z = e0 for the Vandermonde matrix A of offsets
/// -half..=half, then w = A z; the smoothed center value is sum(w_j * y_j).
fn center_weights(half: usize, order: usize) -> Vec<f64> {
    let w = 2 * half + 1;
    let k = order + 1;
    // normal matrix M[i][j] = sum_t t^(i+j)
    let mut moments = vec![0.0_f64; 2 * k];
    for t in -(half as i64)..=(half as i64) {
        let tf = t as f64;
        let mut p = 1.0;
        for m in moments.iter_mut() {
            *m += p;
            p *= tf;
        }
    }
    let mut mat = vec![vec![0.0_f64; k]; k];
    for (i, row) in mat.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = moments[i + j];
        }
    }
    let mut rhs = vec![0.0_f64; k];
    rhs[0] = 1.0;
    let z = solve_dense(&mut mat, &mut rhs);
    let mut weights = Vec::with_capacity(w);
    for t in -(half as i64)..=(half as i64) {
        let tf = t as f64;
        let mut p = 1.0;
        let mut acc = 0.0;
        for zi in &z {
            acc += zi * p;
            p *= tf;
        }
        weights.push(acc);
    }
    weights
}

/// Gaussian elimination with partial pivoting for the small normal system.
fn solve_dense(mat: &mut [Vec<f64>], rhs: &mut [f64]) -> Vec<f64> {
    let n = rhs.len();
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if mat[r][col].abs() > mat[pivot][col].abs() {
                pivot = r;
            }
        }
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        let diag = mat[col][col];
        for r in (col + 1)..n {
            let factor = mat[r][col] / diag;
            for c in col..n {
                mat[r][c] -= factor * mat[col][c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut out = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in (row + 1)..n {
            acc -= mat[row][c] * out[c];
        }
        out[row] = acc / mat[row][row];
    }
    out
}

/// Smooths one scalar run in place. Runs shorter than the window get a
/// reduced symmetric window (minimum 3); runs shorter than 3 pass through.
fn smooth_run(values: &mut [f64], cfg: &SmoothingConfig, cache: &mut HashMap<usize, Vec<f64>>) {
    let n = values.len();
    if n < 3 {
        return;
    }
    let max_half = ((cfg.window - 1) / 2).min((n - 1) / 2);
    let input = values.to_vec();
    for (i, out) in values.iter_mut().enumerate() {
        let half = max_half.min(i).min(n - 1 - i);
        if 2 * half + 1 <= cfg.polynomial_order {
            continue; // under-determined fit reproduces the sample anyway
        }
        if half == 0 {
            continue;
        }
        let weights = cache
            .entry(half)
            .or_insert_with(|| center_weights(half, cfg.polynomial_order));
        let mut acc = 0.0;
        for (j, w) in weights.iter().enumerate() {
            acc += w * input[i - half + j];
        }
        *out = acc;
    }
}

/// Applies Savitzky-Golay smoothing to the ball x/y coordinates, run by run.
///
/// A run is a maximal stretch of consecutive frames in the same period that
/// are in-play with a ball position. Frame count and all non-ball fields are
/// unchanged.
pub fn smooth_ball_positions(series: &FrameSeries, cfg: &SmoothingConfig) -> FrameSeries {
    let mut out = series.clone();
    if !cfg.enabled {
        return out;
    }
    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
    let runs = super::inplay_runs(series);
    for run in runs {
        let mut xs: Vec<f64> = Vec::with_capacity(run.len());
        let mut ys: Vec<f64> = Vec::with_capacity(run.len());
        for &i in &run {
            let b = series.frames[i].ball.expect("in-play run frame has ball");
            xs.push(b.x);
            ys.push(b.y);
        }
        smooth_run(&mut xs, cfg, &mut cache);
        smooth_run(&mut ys, cfg, &mut cache);
        for (k, &i) in run.iter().enumerate() {
            let b = out.frames[i].ball.as_mut().unwrap();
            b.x = xs[k];
            b.y = ys[k];
        }
    }
    out
}
