use serde::{Deserialize, Serialize};

use super::MetricsError;

const BIN_EPS: f64 = 1e-9;

/// Fixed-width histogram whose first bin starts at `origin`, the largest
/// multiple of the bin width not above the minimum sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub origin: f64,
    pub counts: Vec<u64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

pub fn histogram(samples: &[f64], bin_width: f64) -> Result<Histogram, MetricsError> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(MetricsError::BadBinWidth(bin_width));
    }
    if samples.is_empty() {
        return Ok(Histogram {
            bin_width,
            origin: 0.0,
            counts: Vec::new(),
            min: None,
            max: None,
        });
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let origin = (min / bin_width + BIN_EPS).floor() * bin_width;
    let index = |x: f64| ((x - origin) / bin_width + BIN_EPS).floor().max(0.0) as usize;
    let mut counts = vec![0u64; index(max) + 1];
    for &x in samples {
        counts[index(x)] += 1;
    }
    Ok(Histogram {
        bin_width,
        origin,
        counts,
        min: Some(min),
        max: Some(max),
    })
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Lower edge of bin `i`.
    pub fn bin_start(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.bin_width
    }

    /// Indices of local maxima. A run of equal bins counts once, at its
    /// first index, when both outer neighbours are lower.
    pub fn modes(&self) -> Vec<usize> {
        let c = &self.counts;
        let mut modes = Vec::new();
        let mut i = 0;
        while i < c.len() {
            let mut j = i;
            while j + 1 < c.len() && c[j + 1] == c[i] {
                j += 1;
            }
            let left = if i == 0 { 0 } else { c[i - 1] };
            let right = c.get(j + 1).copied().unwrap_or(0);
            if c[i] > 0 && left < c[i] && right < c[i] {
                modes.push(i);
            }
            i = j + 1;
        }
        modes
    }

    /// Distance between the two modes when there are exactly two.
    pub fn mode_gap(&self) -> Option<f64> {
        match self.modes().as_slice() {
            [a, b] => Some((b - a) as f64 * self.bin_width),
            _ => None,
        }
    }

    pub fn nonzero_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Share of samples strictly above `threshold`.
pub fn fraction_above(samples: &[f64], threshold: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|&&x| x > threshold).count() as f64 / samples.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub p50: f64,
    pub p95: f64,
}

impl LatencySummary {
    pub fn of(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let pick = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
        Some(Self {
            count: sorted.len(),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            p50: pick(0.5),
            p95: pick(0.95),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_mixture() {
        let mut s = vec![22.0; 9];
        s.push(27.0);
        let h = histogram(&s, 1.0).unwrap();
        assert_eq!(h.nonzero_bins(), 2);
        assert_eq!(h.total(), 10);
        assert_eq!(h.modes(), vec![0, 5]);
        assert_eq!(h.mode_gap(), Some(5.0));
        assert!((fraction_above(&s, 5.0) - 1.0).abs() < 1e-12);
        assert!((fraction_above(&s, 25.0) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn empty() {
        let h = histogram(&[], 1.0).unwrap();
        assert_eq!(h.total(), 0);
        assert!(h.modes().is_empty());
        assert_eq!(fraction_above(&[], 1.0), 0.0);
        assert!(histogram(&[1.0], 0.0).is_err());
    }

    #[test]
    fn plateau_counts_once() {
        let h = Histogram {
            bin_width: 1.0,
            origin: 0.0,
            counts: vec![1, 3, 3, 1, 0, 2],
            min: None,
            max: None,
        };
        assert_eq!(h.modes(), vec![1, 5]);
    }

    #[test]
    fn summary() {
        let s = LatencySummary::of(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert_eq!((s.min, s.max, s.p50), (1.0, 10.0, 3.0));
        assert!((s.mean - 4.0).abs() < 1e-12);
    }
}
