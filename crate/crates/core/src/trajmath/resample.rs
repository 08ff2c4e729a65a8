use super::spline::QuinticSpline;
use super::types::{JointTrajectory, JointVector, TrajectoryPoint};
use super::{TrajError, TIME_EPS};

/// Sample times `start, start + period, …` through `end`, always ending on
/// `end` itself even when the span is not a multiple of `period`.
pub fn sample_grid(start: f64, end: f64, period: f64) -> Result<Vec<f64>, TrajError> {
    if !(period.is_finite() && period > 0.0) {
        return Err(TrajError::BadPeriod(period));
    }
    let span = end - start;
    let n = ((span / period) + TIME_EPS).floor().max(0.0) as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| start + k as f64 * period).collect();
    let last = grid[grid.len() - 1];
    if end - last > TIME_EPS {
        grid.push(end);
    } else {
        // absorb rounding so the final sample sits exactly on the end knot
        let len = grid.len();
        grid[len - 1] = end;
    }
    Ok(grid)
}

fn point(t: f64, q: Vec<f64>, v: Vec<f64>, a: Vec<f64>) -> TrajectoryPoint {
    TrajectoryPoint {
        t,
        q: JointVector::new(q).expect("finite interpolant"),
        v: Some(JointVector::new(v).expect("finite interpolant")),
        a: Some(JointVector::new(a).expect("finite interpolant")),
    }
}

/// Samples a quintic spline on a fixed period grid.
pub fn resample(spline: &QuinticSpline, period: f64) -> Result<Vec<TrajectoryPoint>, TrajError> {
    let grid = sample_grid(spline.start_time(), spline.end_time(), period)?;
    Ok(grid
        .into_iter()
        .map(|t| {
            let (q, v, a) = spline.eval(t);
            point(t, q, v, a)
        })
        .collect())
}

/// Index of the waypoint segment `[i, i+1]` holding `t`.
fn segment_index(pts: &[TrajectoryPoint], t: f64) -> usize {
    let after = pts.partition_point(|p| p.t <= t + TIME_EPS);
    after.saturating_sub(1).min(pts.len().saturating_sub(2))
}

/// Piecewise-linear interpolation on a period grid; `v` is the segment
/// slope, `a` is zero.
pub fn linear_resample(
    traj: &JointTrajectory,
    period: f64,
) -> Result<Vec<TrajectoryPoint>, TrajError> {
    let pts = traj.points();
    let dof = traj.dof();
    let grid = sample_grid(traj.start_time(), traj.end_time(), period)?;
    if pts.len() == 1 {
        return Ok(vec![point(
            pts[0].t,
            pts[0].q.as_slice().to_vec(),
            vec![0.0; dof],
            vec![0.0; dof],
        )]);
    }
    Ok(grid
        .into_iter()
        .map(|t| {
            let i = segment_index(pts, t);
            let (a, b) = (&pts[i], &pts[i + 1]);
            let h = b.t - a.t;
            let s = ((t - a.t) / h).clamp(0.0, 1.0);
            let q = (0..dof).map(|j| a.q[j] + s * (b.q[j] - a.q[j])).collect();
            let v = (0..dof).map(|j| (b.q[j] - a.q[j]) / h).collect();
            point(t, q, v, vec![0.0; dof])
        })
        .collect())
}

/// Holds the most recent waypoint position on a period grid.
pub fn zoh_resample(
    traj: &JointTrajectory,
    period: f64,
) -> Result<Vec<TrajectoryPoint>, TrajError> {
    let pts = traj.points();
    let dof = traj.dof();
    let grid = sample_grid(traj.start_time(), traj.end_time(), period)?;
    Ok(grid
        .into_iter()
        .map(|t| {
            let held = pts
                .partition_point(|p| p.t <= t + TIME_EPS)
                .saturating_sub(1);
            point(
                t,
                pts[held].q.as_slice().to_vec(),
                vec![0.0; dof],
                vec![0.0; dof],
            )
        })
        .collect())
}
