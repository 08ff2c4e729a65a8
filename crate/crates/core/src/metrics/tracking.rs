use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Per-joint tracking error statistics, degrees. Standard deviations are
/// population (divide by N) over the aligned series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    pub mode: String,
    pub samples: usize,
    pub std_dev: Vec<f64>,
    pub max_abs: Vec<f64>,
    /// Largest per-joint standard deviation.
    pub max_std_dev: f64,
    pub max_abs_error: f64,
}

/// Statistics of `measured − reference` per joint. Both series must be on
/// the same time grid.
pub fn tracking_std(
    mode: &str,
    reference: &[Vec<f64>],
    measured: &[Vec<f64>],
) -> Result<TrackingReport, MetricsError> {
    if reference.len() != measured.len() {
        return Err(MetricsError::LengthMismatch {
            reference: reference.len(),
            measured: measured.len(),
        });
    }
    let n = reference.len();
    if n == 0 {
        return Err(MetricsError::Empty);
    }
    let dof = reference[0].len();
    let mut sum = vec![0.0; dof];
    let mut max_abs = vec![0.0f64; dof];
    for (index, (r, m)) in reference.iter().zip(measured).enumerate() {
        for got in [r.len(), m.len()] {
            if got != dof {
                return Err(MetricsError::DofMismatch {
                    index,
                    expected: dof,
                    got,
                });
            }
        }
        for j in 0..dof {
            let e = m[j] - r[j];
            sum[j] += e;
            max_abs[j] = max_abs[j].max(e.abs());
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
    let mut var = vec![0.0; dof];
    for (r, m) in reference.iter().zip(measured) {
        for j in 0..dof {
            let d = m[j] - r[j] - mean[j];
            var[j] += d * d;
        }
    }
    let std_dev: Vec<f64> = var.iter().map(|v| (v / n as f64).sqrt()).collect();
    Ok(TrackingReport {
        mode: mode.to_string(),
        samples: n,
        max_std_dev: std_dev.iter().copied().fold(0.0, f64::max),
        max_abs_error: max_abs.iter().copied().fold(0.0, f64::max),
        std_dev,
        max_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn identical_series() {
        let r = col(&[1.0, 2.0, 3.0]);
        let rep = tracking_std("x", &r, &r).unwrap();
        assert_eq!(rep.std_dev, vec![0.0]);
        assert_eq!(rep.max_abs_error, 0.0);
    }

    #[test]
    fn constant_offset() {
        let r = col(&[1.0, 2.0, 3.0, 4.0]);
        let m = col(&[2.0, 3.0, 4.0, 5.0]);
        let rep = tracking_std("x", &r, &m).unwrap();
        assert!(rep.std_dev[0].abs() < 1e-12);
        assert!((rep.max_abs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alternating_error() {
        let r = col(&[0.0; 6]);
        let m = col(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        let rep = tracking_std("x", &r, &m).unwrap();
        assert!((rep.std_dev[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn per_joint_and_max() {
        let r = vec![vec![0.0, 0.0]; 4];
        let m = vec![
            vec![1.0, 2.0],
            vec![-1.0, -2.0],
            vec![1.0, 2.0],
            vec![-1.0, -2.0],
        ];
        let rep = tracking_std("x", &r, &m).unwrap();
        assert_eq!(rep.std_dev, vec![1.0, 2.0]);
        assert_eq!(rep.max_std_dev, 2.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            tracking_std("x", &col(&[1.0]), &col(&[1.0, 2.0])),
            Err(MetricsError::LengthMismatch { .. })
        ));
        assert_eq!(tracking_std("x", &[], &[]), Err(MetricsError::Empty));
        assert!(matches!(
            tracking_std("x", &[vec![0.0, 0.0]], &[vec![0.0]]),
            Err(MetricsError::DofMismatch { .. })
        ));
    }
}
