use crate::trajmath::{JointTrajectory, TrajectoryPoint};

use super::ClientError;

const GRID_EPS: f64 = 1e-9;

/// Number of samples a stream at `rate_hz` emits over `duration` seconds.
pub fn stream_sample_count(duration: f64, rate_hz: f64) -> usize {
    (duration * rate_hz + GRID_EPS).floor().max(0.0) as usize + 1
}

fn held(points: &[TrajectoryPoint], t: f64) -> Vec<f64> {
    let i = points
        .partition_point(|p| p.t <= t + GRID_EPS)
        .saturating_sub(1);
    points[i].q.as_slice().to_vec()
}

fn lerp(points: &[TrajectoryPoint], t: f64) -> Vec<f64> {
    if points.len() == 1 {
        return points[0].q.as_slice().to_vec();
    }
    let i = points
        .partition_point(|p| p.t <= t + GRID_EPS)
        .saturating_sub(1)
        .min(points.len() - 2);
    let (a, b) = (&points[i], &points[i + 1]);
    let s = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
    (0..a.q.dof())
        .map(|j| a.q[j] + s * (b.q[j] - a.q[j]))
        .collect()
}

/// Joint samples emitted by a stream, one per `1/rate_hz` from the first
/// waypoint. With `interpolate` the trajectory is evaluated piecewise
/// linearly at each emission time; otherwise the latest waypoint at or
/// before that time is sent as is.
pub fn stream_samples(
    traj: &JointTrajectory,
    rate_hz: f64,
    interpolate: bool,
) -> Result<Vec<Vec<f64>>, ClientError> {
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return Err(ClientError::BadRate(rate_hz));
    }
    if traj.is_empty() {
        return Err(ClientError::EmptyTrajectory);
    }
    let points = traj.points();
    let n = stream_sample_count(traj.duration(), rate_hz);
    Ok((0..n)
        .map(|i| {
            let t = traj.start_time() + i as f64 / rate_hz;
            if interpolate {
                lerp(points, t)
            } else {
                held(points, t)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, dt: f64) -> JointTrajectory {
        JointTrajectory::from_positions(
            (0..n).map(|i| (i as f64 * dt, vec![i as f64, -(i as f64)])),
        )
        .unwrap()
    }

    #[test]
    fn raw_10hz_emits_waypoints() {
        let traj = ramp(41, 0.1);
        let s = stream_samples(&traj, 10.0, false).unwrap();
        assert_eq!(s.len(), 41);
        assert_eq!(s[7], vec![7.0, -7.0]);
    }

    #[test]
    fn interpolated_200hz_count_and_values() {
        let traj = ramp(41, 0.1);
        let s = stream_samples(&traj, 200.0, true).unwrap();
        assert_eq!(s.len(), 801);
        assert!((s[10][0] - 0.5).abs() < 1e-12);
        assert_eq!(s[800], vec![40.0, -40.0]);
    }

    #[test]
    fn raw_at_high_rate_holds() {
        let traj = ramp(3, 0.1);
        let s = stream_samples(&traj, 200.0, false).unwrap();
        assert_eq!(s.len(), 41);
        assert!(s[..20].iter().all(|q| q[0] == 0.0));
        assert!(s[20..40].iter().all(|q| q[0] == 1.0));
    }

    #[test]
    fn bad_rate() {
        assert!(matches!(
            stream_samples(&ramp(2, 1.0), 0.0, true),
            Err(ClientError::BadRate(_))
        ));
        assert!(matches!(
            stream_samples(&ramp(2, 1.0), -5.0, true),
            Err(ClientError::BadRate(_))
        ));
    }

    #[test]
    fn count_formula() {
        assert_eq!(stream_sample_count(4.0, 10.0), 41);
        assert_eq!(stream_sample_count(1.0, 200.0), 201);
        assert_eq!(stream_sample_count(0.33, 10.0), 4);
        assert_eq!(stream_sample_count(0.0, 10.0), 1);
    }
}
