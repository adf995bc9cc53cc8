//! Dense least squares with column scaling, used for residual-decay fits and
//! for fitting samples against `t^a ln^b t` bases.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Error, Result};

/// Relative singular-value cutoff for numerical rank.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    /// 2-norm condition number of the column-scaled design.
    pub condition: f64,
    pub rank: usize,
}

/// Minimizes `‖A c − b‖₂` for the row-major design `rows`.
pub fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Result<LeastSquares> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || rhs.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("design of {m} rows does not match {} samples", rhs.len())));
    }
    if m < n {
        return Err(Error::RankDeficient { rank: m, cols: n });
    }
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let scale: Vec<f64> = (0..n)
        .map(|j| {
            let s = a.column(j).norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let scaled = DMatrix::from_fn(m, n, |i, j| a[(i, j)] / scale[j]);
    let b = DVector::from_column_slice(rhs);
    let svd = scaled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > smax * RANK_TOL).count();
    if rank < n {
        return Err(Error::RankDeficient { rank, cols: n });
    }
    let smin = svd.singular_values.min();
    let y = svd
        .solve(&b, smax * RANK_TOL)
        .map_err(|e| Error::InvalidInput(format!("least squares failed: {e}")))?;
    let coefficients: Vec<f64> = (0..n).map(|j| y[j] / scale[j]).collect();
    let residual_norm = (&scaled * &y - &b).norm();
    Ok(LeastSquares { coefficients, residual_norm, condition: smax / smin, rank })
}

/// Slope of the least-squares line through `(x, y)` points.
pub fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|p| vec![1.0, p.0]).collect();
    let rhs: Vec<f64> = points.iter().map(|p| p.1).collect();
    least_squares(&rows, &rhs).ok().map(|r| r.coefficients[1])
}
