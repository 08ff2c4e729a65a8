use serde::{Deserialize, Serialize};

use super::TrajError;

/// Joint angles (degrees) or their derivatives, one entry per joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(Vec<f64>);

impl JointVector {
    pub fn new(values: Vec<f64>) -> Result<Self, TrajError> {
        if values.is_empty() {
            return Err(TrajError::ZeroDof);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TrajError::NonFinite("joint vector"));
        }
        Ok(Self(values))
    }

    pub fn zeros(dof: usize) -> Self {
        Self(vec![0.0; dof])
    }

    pub fn dof(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Largest absolute per-joint difference.
    pub fn max_abs_diff(&self, other: &JointVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for JointVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub q: JointVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<JointVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<JointVector>,
}

impl TrajectoryPoint {
    pub fn new(t: f64, q: Vec<f64>) -> Result<Self, TrajError> {
        Ok(Self {
            t,
            q: JointVector::new(q)?,
            v: None,
            a: None,
        })
    }

    pub fn with_derivatives(
        t: f64,
        q: Vec<f64>,
        v: Vec<f64>,
        a: Vec<f64>,
    ) -> Result<Self, TrajError> {
        Ok(Self {
            t,
            q: JointVector::new(q)?,
            v: Some(JointVector::new(v)?),
            a: Some(JointVector::new(a)?),
        })
    }

    pub fn dof(&self) -> usize {
        self.q.dof()
    }
}

/// Timed joint waypoints with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TrajectoryPoint>", into = "Vec<TrajectoryPoint>")]
pub struct JointTrajectory {
    points: Vec<TrajectoryPoint>,
    dof: usize,
}

impl JointTrajectory {
    pub fn new(points: Vec<TrajectoryPoint>) -> Result<Self, TrajError> {
        let first = points
            .first()
            .ok_or(TrajError::TooFewPoints { needed: 1, got: 0 })?;
        let dof = first.dof();
        for (i, p) in points.iter().enumerate() {
            if !p.t.is_finite() {
                return Err(TrajError::NonFinite("timestamp"));
            }
            if p.t < 0.0 {
                return Err(TrajError::NegativeTime(p.t));
            }
            for jv in [Some(&p.q), p.v.as_ref(), p.a.as_ref()]
                .into_iter()
                .flatten()
            {
                if jv.dof() != dof {
                    return Err(TrajError::DofMismatch {
                        expected: dof,
                        got: jv.dof(),
                    });
                }
            }
            if i > 0 && p.t <= points[i - 1].t {
                return Err(TrajError::NonMonotonicTime { index: i });
            }
        }
        Ok(Self { points, dof })
    }

    /// Builds a position-only trajectory from `(t, q)` pairs.
    pub fn from_positions<I>(waypoints: I) -> Result<Self, TrajError>
    where
        I: IntoIterator<Item = (f64, Vec<f64>)>,
    {
        let points = waypoints
            .into_iter()
            .map(|(t, q)| TrajectoryPoint::new(t, q))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(points)
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.points[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.points[self.points.len() - 1].t
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    /// Largest per-joint position change between adjacent waypoints.
    pub fn max_waypoint_delta(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1].q.max_abs_diff(&w[0].q))
            .fold(0.0, f64::max)
    }

    pub fn into_points(self) -> Vec<TrajectoryPoint> {
        self.points
    }
}

impl TryFrom<Vec<TrajectoryPoint>> for JointTrajectory {
    type Error = TrajError;
    fn try_from(points: Vec<TrajectoryPoint>) -> Result<Self, TrajError> {
        Self::new(points)
    }
}

impl From<JointTrajectory> for Vec<TrajectoryPoint> {
    fn from(t: JointTrajectory) -> Self {
        t.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_timestamps() {
        let err =
            JointTrajectory::from_positions([(0.0, vec![0.0]), (0.0, vec![1.0])]).unwrap_err();
        assert_eq!(err, TrajError::NonMonotonicTime { index: 1 });
    }

    #[test]
    fn rejects_mixed_dof() {
        let err =
            JointTrajectory::from_positions([(0.0, vec![0.0]), (1.0, vec![1.0, 2.0])]).unwrap_err();
        assert!(matches!(err, TrajError::DofMismatch { .. }));
    }

    #[test]
    fn rejects_nan_and_empty() {
        assert!(JointVector::new(vec![f64::NAN]).is_err());
        assert!(JointVector::new(vec![]).is_err());
        assert!(JointTrajectory::new(vec![]).is_err());
    }

    #[test]
    fn waypoint_delta() {
        let traj = JointTrajectory::from_positions([
            (0.0, vec![0.0, 0.0]),
            (1.0, vec![1.0, -3.0]),
            (2.0, vec![1.5, -3.0]),
        ])
        .unwrap();
        assert_eq!(traj.max_waypoint_delta(), 3.0);
        assert_eq!(traj.duration(), 2.0);
    }
}
