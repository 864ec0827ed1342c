//! Closed-form ridge regression on standardized features.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A fitted ridge solution. Weights apply to standardized features:
/// prediction = Σ w_j · (x_j − mean_j) / scale_j + intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub means: Vec<f64>,
    /// Per-feature standard deviation; 1.0 for zero-variance features,
    /// whose weights are fixed at 0.
    pub scales: Vec<f64>,
}

impl RidgeFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut acc = self.intercept;
        for (j, w) in self.weights.iter().enumerate() {
            acc += w * (row[j] - self.means[j]) / self.scales[j];
        }
        acc
    }
}

/// Solves min ‖Zw − (y − ȳ)‖² + λ‖w‖² over the standardized feature matrix Z.
/// Zero-variance columns are excluded from the system and get weight 0.
/// A singular system (possible only at λ = 0) is reported as an error.
pub fn fit_ridge(rows: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<RidgeFit> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "ridge fit needs at least 2 rows".to_string(),
        ));
    }
    if y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{n} rows against {} targets",
            y.len()
        )));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("negative lambda {lambda}")));
    }
    let d = rows[0].len();
    for row in rows {
        if row.len() != d {
            return Err(Error::InvalidArgument(
                "feature rows have inconsistent lengths".to_string(),
            ));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite feature value".to_string(),
            ));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite target value".to_string()));
    }

    let mut means = vec![0.0; d];
    for row in rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut variances = vec![0.0; d];
    for row in rows {
        for j in 0..d {
            variances[j] += (row[j] - means[j]).powi(2);
        }
    }
    let scales: Vec<f64> = variances
        .iter()
        .map(|v| {
            let sd = (v / n as f64).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    let active: Vec<usize> = (0..d).filter(|&j| variances[j] > 0.0).collect();

    let y_mean = y.iter().sum::<f64>() / n as f64;
    if active.is_empty() {
        return if lambda == 0.0 && d > 0 {
            Err(Error::SingularSystem)
        } else {
            Ok(RidgeFit {
                weights: vec![0.0; d],
                intercept: y_mean,
                means,
                scales,
            })
        };
    }

    let mut z = DMatrix::zeros(n, active.len());
    for (i, row) in rows.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            z[(i, c)] = (row[j] - means[j]) / scales[j];
        }
    }
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let mut gram = z.transpose() * &z;
    for c in 0..active.len() {
        gram[(c, c)] += lambda;
    }
    let rhs = z.transpose() * yc;

    let Some(cholesky) = gram.clone().cholesky() else {
        return Err(Error::SingularSystem);
    };
    let solution = cholesky.solve(&rhs);

    // Cholesky can numerically "succeed" on a rank-deficient Gram matrix;
    // reject solutions that fail to satisfy the normal equations.
    let residual = (&gram * &solution - &rhs).norm();
    if residual / (rhs.norm() + 1.0) >= 1e-6 {
        return Err(Error::SingularSystem);
    }

    let mut weights = vec![0.0; d];
    for (&j, w) in active.iter().zip(solution.iter()) {
        weights[j] = *w;
    }
    Ok(RidgeFit {
        weights,
        intercept: y_mean,
        means,
        scales,
    })
}
