use serde::{Deserialize, Serialize};

/// One issued request and whether it counted as successful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEntry {
    pub rate_hz: f64,
    pub success: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub rate_hz: f64,
    pub issued: usize,
    pub succeeded: usize,
    pub rate: f64,
}

/// Successes over issued requests, grouped by request frequency in
/// ascending order.
pub fn success_rate(log: &[SuccessEntry]) -> Vec<RateSummary> {
    let mut rates: Vec<f64> = log.iter().map(|e| e.rate_hz).collect();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    rates
        .into_iter()
        .map(|rate_hz| {
            let group = log.iter().filter(|e| e.rate_hz == rate_hz);
            let issued = group.clone().count();
            let succeeded = group.filter(|e| e.success).count();
            RateSummary {
                rate_hz,
                issued,
                succeeded,
                rate: succeeded as f64 / issued as f64,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(rate_hz: f64, ok: usize, bad: usize) -> Vec<SuccessEntry> {
        (0..ok + bad)
            .map(|i| SuccessEntry {
                rate_hz,
                success: i < ok,
            })
            .collect()
    }

    #[test]
    fn grouping() {
        let mut log = entries(200.0, 0, 5);
        log.extend(entries(100.0, 4, 0));
        log.extend(entries(10.0, 3, 1));
        let r = success_rate(&log);
        assert_eq!(
            r.iter().map(|s| s.rate_hz).collect::<Vec<_>>(),
            vec![10.0, 100.0, 200.0]
        );
        assert_eq!(r[0].rate, 0.75);
        assert_eq!(r[1].rate, 1.0);
        assert_eq!(r[2].rate, 0.0);
        assert!(success_rate(&[]).is_empty());
    }
}
