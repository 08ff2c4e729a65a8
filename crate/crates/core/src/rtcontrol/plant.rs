//! Simulated joint servos, omnidirectional base and grippers.

use serde::{Deserialize, Serialize};

/// 3.5 km/h expressed in m/s.
pub const BASE_MAX_SPEED: f64 = 3.5 / 3.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServoParams {
    /// Natural frequency, rad/s.
    pub omega_n: f64,
    /// Damping ratio.
    pub zeta: f64,
}

impl Default for ServoParams {
    fn default() -> Self {
        Self {
            omega_n: 40.0,
            zeta: 1.0,
        }
    }
}

impl ServoParams {
    /// Steady-state lag of this plant behind a constant-velocity reference,
    /// seconds.
    pub fn ramp_lag(&self) -> f64 {
        2.0 * self.zeta / self.omega_n
    }
}

/// One joint: angle in degrees and rate in deg/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ServoState {
    pub theta: f64,
    pub theta_dot: f64,
}

impl ServoState {
    pub fn at_rest(theta: f64) -> Self {
        Self {
            theta,
            theta_dot: 0.0,
        }
    }
}

/// Semi-implicit Euler step of θ̈ = ωn²(ref − θ) − 2ζωn·θ̇.
pub fn motor_step(servo: ServoState, params: &ServoParams, reference: f64, dt: f64) -> ServoState {
    let wn = params.omega_n;
    let accel = wn * wn * (reference - servo.theta) - 2.0 * params.zeta * wn * servo.theta_dot;
    let theta_dot = servo.theta_dot + accel * dt;
    ServoState {
        theta: servo.theta + theta_dot * dt,
        theta_dot,
    }
}

/// Planar pose in the odometry frame: meters and radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BasePose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

/// Body-frame velocity command: m/s and rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseTwist {
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
}

impl BaseTwist {
    /// Scales the translational part down to `max_speed` if needed.
    pub fn clamped(self, max_speed: f64) -> Self {
        let speed = self.vx.hypot(self.vy);
        if speed <= max_speed || speed == 0.0 {
            return self;
        }
        let k = max_speed / speed;
        Self {
            vx: self.vx * k,
            vy: self.vy * k,
            wz: self.wz,
        }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseState {
    pub pose: BasePose,
    /// Applied (post-clamp) body-frame velocity.
    pub velocity: BaseTwist,
}

/// Integrates a body-frame twist, clamping translational speed.
pub fn base_step(state: BaseState, command: BaseTwist, max_speed: f64, dt: f64) -> BaseState {
    let v = command.clamped(max_speed);
    let (s, c) = state.pose.yaw.sin_cos();
    BaseState {
        pose: BasePose {
            x: state.pose.x + (v.vx * c - v.vy * s) * dt,
            y: state.pose.y + (v.vx * s + v.vy * c) * dt,
            yaw: state.pose.yaw + v.wz * dt,
        },
        velocity: v,
    }
}

/// Moves an opening fraction toward `target` at `rate` per second.
pub fn gripper_step(position: f64, target: f64, rate: f64, dt: f64) -> f64 {
    let target = target.clamp(0.0, 1.0);
    let max_move = rate * dt;
    let next = if (target - position).abs() <= max_move {
        target
    } else {
        position + max_move * (target - position).signum()
    };
    next.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_is_fixed_point() {
        let s = ServoState::at_rest(12.5);
        let p = ServoParams::default();
        assert_eq!(motor_step(s, &p, 12.5, 1e-3), s);
    }

    /// Critically damped closed form: e(t) = (1 + ωn t)·e^{−ωn t}.
    fn closed_form_error(wn: f64, t: f64) -> f64 {
        (1.0 + wn * t) * (-wn * t).exp()
    }

    #[test]
    fn step_response_no_overshoot_and_settles() {
        let p = ServoParams::default();
        let mut s = ServoState::at_rest(0.0);
        let mut last_outside = 0.0;
        for k in 1..=2000 {
            s = motor_step(s, &p, 1.0, 1e-3);
            assert!(s.theta <= 1.0, "overshoot at step {k}: {}", s.theta);
            if (1.0 - s.theta).abs() > 0.01 {
                last_outside = k as f64 * 1e-3;
            }
        }
        // closed form crosses 1% at ωn·t ≈ 6.64, bounded by 7/ωn
        assert!(closed_form_error(p.omega_n, 7.0 / p.omega_n) < 0.01);
        assert!(last_outside <= 7.0 / p.omega_n, "settled at {last_outside}");
    }

    #[test]
    fn tracks_closed_form() {
        let p = ServoParams::default();
        let mut s = ServoState::at_rest(0.0);
        for k in 1..=300 {
            s = motor_step(s, &p, 1.0, 1e-3);
            let want = 1.0 - closed_form_error(p.omega_n, k as f64 * 1e-3);
            assert!((s.theta - want).abs() < 0.03, "k={k}");
        }
    }

    #[test]
    fn base_speed_clamp() {
        let s = base_step(
            BaseState::default(),
            BaseTwist {
                vx: 2.0,
                vy: 0.0,
                wz: 0.0,
            },
            BASE_MAX_SPEED,
            1.0,
        );
        assert!((s.velocity.speed() - 0.972).abs() < 1e-3);
        assert!((s.pose.x - BASE_MAX_SPEED).abs() < 1e-12);
        let diag = BaseTwist {
            vx: 1.0,
            vy: 1.0,
            wz: 0.3,
        }
        .clamped(BASE_MAX_SPEED);
        assert!((diag.speed() - BASE_MAX_SPEED).abs() < 1e-12);
        assert_eq!(diag.wz, 0.3);
    }

    #[test]
    fn base_zero_command_holds_pose() {
        let start = BaseState {
            pose: BasePose {
                x: 1.0,
                y: -2.0,
                yaw: 0.5,
            },
            velocity: BaseTwist::default(),
        };
        let s = base_step(start, BaseTwist::default(), BASE_MAX_SPEED, 0.1);
        assert_eq!(s.pose, start.pose);
    }

    #[test]
    fn base_integrates_in_body_frame() {
        let start = BaseState {
            pose: BasePose {
                x: 0.0,
                y: 0.0,
                yaw: std::f64::consts::FRAC_PI_2,
            },
            velocity: BaseTwist::default(),
        };
        let s = base_step(
            start,
            BaseTwist {
                vx: 0.5,
                vy: 0.0,
                wz: 0.0,
            },
            BASE_MAX_SPEED,
            1.0,
        );
        assert!(s.pose.x.abs() < 1e-12 && (s.pose.y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gripper_slew() {
        let mut pos: f64 = 0.0;
        let mut t: f64 = 0.0;
        while pos < 1.0 {
            pos = gripper_step(pos, 1.0, 2.0, 1e-3);
            t += 1e-3;
        }
        assert!((t - 0.5).abs() < 1e-9);
        assert_eq!(gripper_step(0.5, 7.0, 100.0, 1.0), 1.0);
        assert_eq!(gripper_step(0.2, -1.0, 100.0, 1.0), 0.0);
    }
}
