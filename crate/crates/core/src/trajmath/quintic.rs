use serde::{Deserialize, Serialize};

use super::{TrajError, TIME_EPS};

/// Coefficients `c0..c5` of `p(τ) = Σ cᵢ τⁱ` matching position, velocity
/// and acceleration at both ends of an interval of length `duration`.
pub fn quintic_coeffs(
    p0: f64,
    v0: f64,
    a0: f64,
    p1: f64,
    v1: f64,
    a1: f64,
    duration: f64,
) -> Result<[f64; 6], TrajError> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(TrajError::BadDuration(duration));
    }
    if ![p0, v0, a0, p1, v1, a1].iter().all(|x| x.is_finite()) {
        return Err(TrajError::NonFinite("boundary conditions"));
    }
    let t = duration;
    let t2 = t * t;
    let t3 = t2 * t;
    let h = p1 - p0;
    // Closed-form inverse of the 3×3 system for the cubic, quartic and
    // quintic terms once c0..c2 are pinned by the start state.
    let c3 = (20.0 * h - (8.0 * v1 + 12.0 * v0) * t - (3.0 * a0 - a1) * t2) / (2.0 * t3);
    let c4 =
        (-30.0 * h + (14.0 * v1 + 16.0 * v0) * t + (3.0 * a0 - 2.0 * a1) * t2) / (2.0 * t3 * t);
    let c5 = (12.0 * h - 6.0 * (v1 + v0) * t + (a1 - a0) * t2) / (2.0 * t3 * t2);
    Ok([p0, v0, 0.5 * a0, c3, c4, c5])
}

/// Position, velocity and acceleration of a quintic at local time `tau`.
pub(crate) fn eval_poly(c: &[f64; 6], tau: f64) -> (f64, f64, f64) {
    let p = c[0] + tau * (c[1] + tau * (c[2] + tau * (c[3] + tau * (c[4] + tau * c[5]))));
    let v = c[1] + tau * (2.0 * c[2] + tau * (3.0 * c[3] + tau * (4.0 * c[4] + tau * 5.0 * c[5])));
    let a = 2.0 * c[2] + tau * (6.0 * c[3] + tau * (12.0 * c[4] + tau * 20.0 * c[5]));
    (p, v, a)
}

/// One interpolation interval `[t0, t1]` with per-joint quintic coefficients
/// in local time `τ = t − t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuinticSegment {
    pub t0: f64,
    pub t1: f64,
    pub coeffs: Vec<[f64; 6]>,
}

impl QuinticSegment {
    pub fn dof(&self) -> usize {
        self.coeffs.len()
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Evaluates without the span check. Callers guarantee `t` is in range.
    pub(crate) fn eval_unchecked(&self, t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let tau = (t - self.t0).clamp(0.0, self.duration());
        let mut p = Vec::with_capacity(self.dof());
        let mut v = Vec::with_capacity(self.dof());
        let mut a = Vec::with_capacity(self.dof());
        for c in &self.coeffs {
            let (pj, vj, aj) = eval_poly(c, tau);
            p.push(pj);
            v.push(vj);
            a.push(aj);
        }
        (p, v, a)
    }
}

/// Per-joint position, velocity and acceleration.
pub type JointState = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Evaluates a segment at absolute time `t`.
pub fn quintic_eval(segment: &QuinticSegment, t: f64) -> Result<JointState, TrajError> {
    if !t.is_finite() || t < segment.t0 - TIME_EPS || t > segment.t1 + TIME_EPS {
        return Err(TrajError::OutOfSpan {
            t,
            t0: segment.t0,
            t1: segment.t1,
        });
    }
    Ok(segment.eval_unchecked(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gaussian elimination on the end-point conditions; shares nothing with
    /// the closed form above.
    fn solve_tail(p0: f64, v0: f64, a0: f64, p1: f64, v1: f64, a1: f64, t: f64) -> [f64; 3] {
        let c0 = p0;
        let c1 = v0;
        let c2 = a0 / 2.0;
        let mut m = [
            [
                t.powi(3),
                t.powi(4),
                t.powi(5),
                p1 - c0 - c1 * t - c2 * t * t,
            ],
            [
                3.0 * t * t,
                4.0 * t.powi(3),
                5.0 * t.powi(4),
                v1 - c1 - 2.0 * c2 * t,
            ],
            [6.0 * t, 12.0 * t * t, 20.0 * t.powi(3), a1 - 2.0 * c2],
        ];
        for col in 0..3 {
            let piv = (col..3)
                .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
                .unwrap();
            m.swap(col, piv);
            for row in 0..3 {
                if row != col {
                    let f = m[row][col] / m[col][col];
                    let pivot = m[col];
                    for (x, p) in m[row].iter_mut().zip(pivot).skip(col) {
                        *x -= f * p;
                    }
                }
            }
        }
        [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
    }

    #[test]
    fn minimum_jerk_unit_step() {
        let c = quintic_coeffs(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let oracle = solve_tail(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0);
        assert_eq!(&c[..3], &[0.0, 0.0, 0.0]);
        for (got, want) in c[3..].iter().zip(oracle) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in c[3..].iter().zip([10.0, -15.0, 6.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_elimination_on_general_boundaries() {
        let cases = [
            (1.0, -2.0, 0.5, -3.0, 4.0, -1.0, 0.7),
            (10.0, 0.0, 0.0, 25.0, 3.0, 0.0, 2.5),
            (-5.0, 1.0, 9.0, 2.0, -1.0, -9.0, 0.05),
        ];
        for (p0, v0, a0, p1, v1, a1, t) in cases {
            let c = quintic_coeffs(p0, v0, a0, p1, v1, a1, t).unwrap();
            let oracle = solve_tail(p0, v0, a0, p1, v1, a1, t);
            for (got, want) in c[3..].iter().zip(oracle) {
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "{got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn zero_and_constant_cases() {
        assert_eq!(
            quintic_coeffs(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0).unwrap(),
            [0.0; 6]
        );
        assert_eq!(
            quintic_coeffs(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2.0).unwrap(),
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn bad_duration() {
        assert!(matches!(
            quintic_coeffs(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            Err(TrajError::BadDuration(_))
        ));
        assert!(quintic_coeffs(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0).is_err());
        assert!(quintic_coeffs(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, f64::NAN).is_err());
        assert!(quintic_coeffs(f64::INFINITY, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn eval_examples() {
        let seg = QuinticSegment {
            t0: 2.0,
            t1: 3.0,
            coeffs: vec![
                [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
                [1.0, 2.0, 3.0, 0.0, 0.0, 0.0],
            ],
        };
        let (p, v, a) = quintic_eval(&seg, 3.0).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && v[0].abs() < 1e-12 && a[0].abs() < 1e-12);
        let (p, v, a) = quintic_eval(&seg, 2.0).unwrap();
        assert_eq!((p[1], v[1], a[1]), (1.0, 2.0, 6.0));
        let (p, _, _) = quintic_eval(&seg, 2.5).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!(matches!(
            quintic_eval(&seg, 3.1),
            Err(TrajError::OutOfSpan { .. })
        ));
        assert!(quintic_eval(&seg, 1.9).is_err());
    }
}
