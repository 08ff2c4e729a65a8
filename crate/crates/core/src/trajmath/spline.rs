use serde::{Deserialize, Serialize};

use super::quintic::{quintic_coeffs, QuinticSegment};
use super::types::{JointTrajectory, JointVector, TrajectoryPoint};
use super::TrajError;

fn central_difference<'a>(
    pts: &[TrajectoryPoint],
    i: usize,
    values: impl Fn(usize) -> &'a [f64],
) -> JointVector {
    let dt = pts[i + 1].t - pts[i - 1].t;
    let diff = values(i + 1)
        .iter()
        .zip(values(i - 1))
        .map(|(next, prev)| (next - prev) / dt)
        .collect();
    JointVector::new(diff).expect("finite differences of finite values")
}

/// Fills in missing waypoint velocities and accelerations.
///
/// Interior velocities are central differences of position, interior
/// accelerations central differences of the (possibly caller-supplied)
/// velocities. Both are zero at the first and last waypoint. Values already
/// present on a waypoint are kept.
pub fn assign_waypoint_derivatives(traj: &JointTrajectory) -> Result<JointTrajectory, TrajError> {
    let pts = traj.points();
    let n = pts.len();
    if n < 2 {
        return Err(TrajError::TooFewPoints { needed: 2, got: n });
    }
    let dof = traj.dof();

    let velocities: Vec<JointVector> = (0..n)
        .map(|i| match &pts[i].v {
            Some(v) => v.clone(),
            None if i == 0 || i == n - 1 => JointVector::zeros(dof),
            None => central_difference(pts, i, |k| pts[k].q.as_slice()),
        })
        .collect();
    let accelerations: Vec<JointVector> = (0..n)
        .map(|i| match &pts[i].a {
            Some(a) => a.clone(),
            None if i == 0 || i == n - 1 => JointVector::zeros(dof),
            None => central_difference(pts, i, |k| velocities[k].as_slice()),
        })
        .collect();

    let points = pts
        .iter()
        .zip(velocities.into_iter().zip(accelerations))
        .map(|(p, (v, a))| TrajectoryPoint {
            t: p.t,
            q: p.q.clone(),
            v: Some(v),
            a: Some(a),
        })
        .collect();
    JointTrajectory::new(points)
}

/// Piecewise quintic interpolant, C² across knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuinticSpline {
    segments: Vec<QuinticSegment>,
}

impl QuinticSpline {
    pub fn segments(&self) -> &[QuinticSegment] {
        &self.segments
    }

    pub fn dof(&self) -> usize {
        self.segments[0].dof()
    }

    pub fn start_time(&self) -> f64 {
        self.segments[0].t0
    }

    pub fn end_time(&self) -> f64 {
        self.segments[self.segments.len() - 1].t1
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    /// Evaluates at `t`, clamped to the spline span.
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let t = t.clamp(self.start_time(), self.end_time());
        let idx = self
            .segments
            .partition_point(|s| s.t1 < t)
            .min(self.segments.len() - 1);
        self.segments[idx].eval_unchecked(t)
    }

    /// Largest |v| over all joints, sampled densely per segment.
    pub fn max_abs_velocity(&self) -> f64 {
        const STEPS: usize = 64;
        let mut best = 0.0f64;
        for seg in &self.segments {
            for k in 0..=STEPS {
                let t = seg.t0 + seg.duration() * k as f64 / STEPS as f64;
                let (_, v, _) = seg.eval_unchecked(t);
                best = v.iter().fold(best, |m, x| m.max(x.abs()));
            }
        }
        best
    }

    /// Largest velocity and acceleration mismatch at shared knots.
    pub fn max_knot_jumps(&self) -> (f64, f64) {
        let mut dv = 0.0f64;
        let mut da = 0.0f64;
        for pair in self.segments.windows(2) {
            let (_, v0, a0) = pair[0].eval_unchecked(pair[0].t1);
            let (_, v1, a1) = pair[1].eval_unchecked(pair[1].t0);
            for j in 0..v0.len() {
                dv = dv.max((v0[j] - v1[j]).abs());
                da = da.max((a0[j] - a1[j]).abs());
            }
        }
        (dv, da)
    }
}

/// One quintic segment per adjacent waypoint pair. Every waypoint must
/// carry velocity and acceleration (see [`assign_waypoint_derivatives`]).
pub fn build_spline(traj: &JointTrajectory) -> Result<QuinticSpline, TrajError> {
    let pts = traj.points();
    if pts.len() < 2 {
        return Err(TrajError::TooFewPoints {
            needed: 2,
            got: pts.len(),
        });
    }
    for (i, p) in pts.iter().enumerate() {
        if p.v.is_none() {
            return Err(TrajError::MissingDerivative {
                index: i,
                what: "velocity",
            });
        }
        if p.a.is_none() {
            return Err(TrajError::MissingDerivative {
                index: i,
                what: "acceleration",
            });
        }
    }
    let segments = pts
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let (va, aa) = (a.v.as_ref().unwrap(), a.a.as_ref().unwrap());
            let (vb, ab) = (b.v.as_ref().unwrap(), b.a.as_ref().unwrap());
            let coeffs = (0..traj.dof())
                .map(|j| quintic_coeffs(a.q[j], va[j], aa[j], b.q[j], vb[j], ab[j], b.t - a.t))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(QuinticSegment {
                t0: a.t,
                t1: b.t,
                coeffs,
            })
        })
        .collect::<Result<Vec<_>, TrajError>>()?;
    Ok(QuinticSpline { segments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajmath::quintic_eval;

    fn traj(points: &[(f64, f64)]) -> JointTrajectory {
        JointTrajectory::from_positions(points.iter().map(|&(t, q)| (t, vec![q]))).unwrap()
    }

    #[test]
    fn two_waypoints_are_rest_to_rest() {
        let out = assign_waypoint_derivatives(&traj(&[(0.0, 0.0), (1.0, 5.0)])).unwrap();
        for p in out.points() {
            assert_eq!(p.v.as_ref().unwrap()[0], 0.0);
            assert_eq!(p.a.as_ref().unwrap()[0], 0.0);
        }
    }

    #[test]
    fn central_difference_velocity() {
        let out =
            assign_waypoint_derivatives(&traj(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])).unwrap();
        assert_eq!(out.points()[1].v.as_ref().unwrap()[0], 1.0);
        // a(1) = (v2 - v0) / 2 with both endpoint velocities zero
        assert_eq!(out.points()[1].a.as_ref().unwrap()[0], 0.0);
    }

    #[test]
    fn constant_positions_have_zero_derivatives() {
        let out =
            assign_waypoint_derivatives(&traj(&[(0.0, 3.0), (0.5, 3.0), (1.5, 3.0), (2.0, 3.0)]))
                .unwrap();
        for p in out.points() {
            assert_eq!(p.v.as_ref().unwrap()[0], 0.0);
            assert_eq!(p.a.as_ref().unwrap()[0], 0.0);
        }
    }

    #[test]
    fn supplied_derivatives_are_preserved() {
        let mut pts = traj(&[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]).into_points();
        pts[1].v = Some(JointVector::new(vec![7.0]).unwrap());
        let out = assign_waypoint_derivatives(&JointTrajectory::new(pts).unwrap()).unwrap();
        assert_eq!(out.points()[1].v.as_ref().unwrap()[0], 7.0);
        assert_eq!(out.points()[1].a.as_ref().unwrap()[0], 0.0);
    }

    #[test]
    fn single_point_is_rejected() {
        let t = traj(&[(0.0, 1.0)]);
        assert!(matches!(
            assign_waypoint_derivatives(&t),
            Err(TrajError::TooFewPoints { .. })
        ));
        assert!(build_spline(&t).is_err());
    }

    #[test]
    fn build_requires_derivatives() {
        let err = build_spline(&traj(&[(0.0, 0.0), (1.0, 1.0)])).unwrap_err();
        assert!(matches!(err, TrajError::MissingDerivative { index: 0, .. }));
    }

    #[test]
    fn three_waypoints_two_segments_continuous() {
        let t = assign_waypoint_derivatives(&traj(&[(0.0, 0.0), (0.4, 3.0), (1.0, -2.0)])).unwrap();
        let s = build_spline(&t).unwrap();
        assert_eq!(s.segments().len(), 2);
        let (p0, _, _) = quintic_eval(&s.segments()[0], 0.4).unwrap();
        let (p1, _, _) = quintic_eval(&s.segments()[1], 0.4).unwrap();
        assert!((p0[0] - 3.0).abs() < 1e-9 && (p1[0] - 3.0).abs() < 1e-9);
        let (dv, da) = s.max_knot_jumps();
        assert!(dv < 1e-9 && da < 1e-9);
    }

    #[test]
    fn single_pair_matches_quintic_coeffs() {
        let t = assign_waypoint_derivatives(&traj(&[(0.0, 0.0), (1.0, 1.0)])).unwrap();
        let s = build_spline(&t).unwrap();
        let c = quintic_coeffs(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(s.segments()[0].coeffs[0], c);
    }

    #[test]
    fn eval_clamps_outside_span() {
        let t = assign_waypoint_derivatives(&traj(&[(1.0, 2.0), (2.0, 4.0)])).unwrap();
        let s = build_spline(&t).unwrap();
        assert_eq!(s.eval(0.0).0[0], 2.0);
        assert!((s.eval(5.0).0[0] - 4.0).abs() < 1e-12);
    }
}
