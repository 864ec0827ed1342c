//! Regression quality metrics: R² and Spearman rank correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// R² and SpearmanR for one prediction/truth pairing. A degenerate input
/// (constant truths for R², a constant side for SpearmanR) yields 0.0 with
/// the matching flag set, so comparisons stay total.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub r2: f64,
    pub spearman_r: f64,
    #[serde(default)]
    pub r2_degenerate: bool,
    #[serde(default)]
    pub spearman_degenerate: bool,
}

impl RegressionMetrics {
    pub fn degenerate() -> Self {
        RegressionMetrics {
            r2: 0.0,
            spearman_r: 0.0,
            r2_degenerate: true,
            spearman_degenerate: true,
        }
    }
}

/// Computes both metrics; inputs must be equal-length and nonempty.
pub fn evaluate(predictions: &[f64], truths: &[f64]) -> Result<RegressionMetrics> {
    if predictions.len() != truths.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions against {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot evaluate empty prediction list".to_string(),
        ));
    }

    let mean = truths.iter().sum::<f64>() / truths.len() as f64;
    let ss_tot: f64 = truths.iter().map(|t| (t - mean).powi(2)).sum();
    let ss_res: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t).powi(2))
        .sum();
    let (r2, r2_degenerate) = if ss_tot == 0.0 {
        (0.0, true)
    } else {
        (1.0 - ss_res / ss_tot, false)
    };

    let (spearman_r, spearman_degenerate) =
        pearson(&average_ranks(predictions), &average_ranks(truths));

    Ok(RegressionMetrics {
        r2,
        spearman_r,
        r2_degenerate,
        spearman_degenerate,
    })
}

/// 1-based ranks with ties assigned the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut at = 0;
    while at < order.len() {
        let mut end = at + 1;
        while end < order.len() && values[order[end]] == values[order[at]] {
            end += 1;
        }
        // Positions at..end (0-based) share the average 1-based rank.
        let rank = (at + 1 + end) as f64 / 2.0;
        for &i in &order[at..end] {
            ranks[i] = rank;
        }
        at = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> (f64, bool) {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a).powi(2);
        var_b += (y - mean_b).powi(2);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return (0.0, true);
    }
    ((cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_score_one() {
        let truths = [0.1, 0.4, 0.3, 0.9];
        let m = evaluate(&truths, &truths).unwrap();
        assert_eq!(m.r2, 1.0);
        assert_eq!(m.spearman_r, 1.0);
        assert!(!m.r2_degenerate && !m.spearman_degenerate);
    }

    #[test]
    fn constant_predictions_hit_the_degenerate_policy() {
        let truths = [0.1, 0.4, 0.3, 0.9];
        let mean = truths.iter().sum::<f64>() / 4.0;
        let m = evaluate(&[mean; 4], &truths).unwrap();
        assert!((m.r2 - 0.0).abs() < 1e-12);
        assert_eq!(m.spearman_r, 0.0);
        assert!(m.spearman_degenerate);
        assert!(!m.r2_degenerate);

        let m = evaluate(&truths, &[0.5; 4]).unwrap();
        assert!(m.r2_degenerate && m.spearman_degenerate);
    }

    #[test]
    fn reversed_ranking_scores_minus_one() {
        let truths = [0.1, 0.2, 0.3, 0.4, 0.5];
        let preds = [5.0, 4.0, 3.0, 2.0, 1.0];
        let m = evaluate(&preds, &truths).unwrap();
        assert_eq!(m.spearman_r, -1.0);
    }

    #[test]
    fn monotone_transform_preserves_spearman() {
        let truths: [f64; 5] = [0.12, 0.7, 0.33, 0.9, 0.51];
        let preds: Vec<f64> = truths.iter().map(|t| t.exp() * 3.0 - 1.0).collect();
        let m = evaluate(&preds, &truths).unwrap();
        assert!((m.spearman_r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ranks_average_over_ties() {
        assert_eq!(
            average_ranks(&[1.0, 2.0, 2.0, 3.0]),
            vec![1.0, 2.5, 2.5, 4.0]
        );
    }

    #[test]
    fn shape_errors() {
        assert!(evaluate(&[1.0], &[1.0, 2.0]).is_err());
        assert!(evaluate(&[], &[]).is_err());
    }
}
