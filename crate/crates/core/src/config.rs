//! Run configuration, read from JSON. Every field has a default, so `{}`
//! is a valid config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::perception::DetectParams;
use crate::rtcontrol::{RtConfig, ServoParams, BASE_MAX_SPEED};
use crate::scene::SceneSpec;
use crate::session::SessionConfig;
use crate::simkit::{ms_to_ns, ClockMode, JitterModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub clock: ClockMode,
    pub seed: u64,
    pub dof: usize,
    pub control_period_ms: f64,
    pub motor_substeps: u32,
    /// Offset of the first client request within a control period. When
    /// absent, requests are timed so the nominal forward transit ends
    /// exactly on a tick boundary.
    pub client_phase_ms: Option<f64>,
    pub forward_jitter: JitterModel,
    pub return_jitter: JitterModel,
    pub servo: ServoParams,
    pub gripper_rate: f64,
    pub base_max_speed: f64,
    pub feedback_period_ticks: u64,
    pub transport: TransportConfig,
    pub success_rate: SuccessRateConfig,
    pub latency_modes: LatencyModesConfig,
    pub tracking: TrackingConfig,
    pub perception: PerceptionConfig,
    pub end_to_end: EndToEndConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            clock: ClockMode::Virtual,
            seed: 0,
            dof: crate::trajmath::DEFAULT_DOF,
            control_period_ms: 5.0,
            motor_substeps: 5,
            client_phase_ms: None,
            forward_jitter: JitterModel::default(),
            return_jitter: JitterModel::constant(1.0),
            servo: ServoParams::default(),
            gripper_rate: 2.0,
            base_max_speed: BASE_MAX_SPEED,
            feedback_period_ticks: 20,
            transport: TransportConfig::default(),
            success_rate: SuccessRateConfig::default(),
            latency_modes: LatencyModesConfig::default(),
            tracking: TrackingConfig::default(),
            perception: PerceptionConfig::default(),
            end_to_end: EndToEndConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub rate_hz: f64,
    pub samples: usize,
    pub bin_ms: f64,
    pub threshold_ms: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            rate_hz: 200.0,
            samples: 2000,
            bin_ms: 1.0,
            threshold_ms: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuccessRateConfig {
    pub frequencies_hz: Vec<f64>,
    pub duration_s: f64,
    /// Constant-latency reference runs: `[forward_ms, return_ms, rate_hz]`.
    pub constant_cases: Vec<[f64; 3]>,
}

impl Default for SuccessRateConfig {
    fn default() -> Self {
        Self {
            frequencies_hz: vec![10.0, 20.0, 50.0, 100.0, 200.0, 250.0, 500.0],
            duration_s: 2.0,
            constant_cases: vec![
                [1.5, 1.5, 200.0],
                [3.5, 3.5, 200.0],
                [1.5, 1.5, 100.0],
                [3.5, 3.5, 100.0],
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyModesConfig {
    pub jitter: JitterModel,
    pub rate_hz: f64,
    pub samples: usize,
    pub bin_ms: f64,
}

impl Default for LatencyModesConfig {
    fn default() -> Self {
        Self {
            jitter: JitterModel {
                base_ms: 22.0,
                tail_prob: 0.1,
                tail_extra_ms: 5.0,
                seed: 0,
            },
            rate_hz: 100.0,
            samples: 400,
            bin_ms: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingConfig {
    pub duration_s: f64,
    pub waypoint_dt_s: f64,
    /// Peak excursion per joint, degrees; its length sets the joint count.
    pub amplitudes_deg: Vec<f64>,
    pub raw_rate_hz: f64,
    pub interp_rate_hz: f64,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            duration_s: 4.0,
            waypoint_dt_s: 0.1,
            amplitudes_deg: vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            raw_rate_hz: 10.0,
            interp_rate_hz: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptionConfig {
    pub scene: SceneSpec,
    pub detect: DetectParams,
    pub poses_per_category: usize,
    /// Sampled footprint centers `[min, max]`, meters, world frame.
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub tolerance_m: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            scene: SceneSpec::default(),
            detect: DetectParams::default(),
            poses_per_category: 10,
            x_range: [0.65, 0.95],
            y_range: [-0.2, 0.2],
            tolerance_m: 0.01,
        }
    }
}

/// Joint-space reach pose for one category, degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachPose {
    pub category: String,
    pub joints_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndToEndConfig {
    pub scene: SceneSpec,
    pub detect: DetectParams,
    pub reach_poses: Vec<ReachPose>,
    pub move_duration_s: f64,
    pub waypoint_dt_s: f64,
}

impl Default for EndToEndConfig {
    fn default() -> Self {
        let scene = SceneSpec {
            objects: vec![
                crate::scene::SceneObject {
                    category: "cereal".into(),
                    x: 0.75,
                    y: 0.22,
                    yaw: 0.4,
                },
                crate::scene::SceneObject {
                    category: "cracker".into(),
                    x: 0.85,
                    y: 0.0,
                    yaw: 1.1,
                },
                crate::scene::SceneObject {
                    category: "tea".into(),
                    x: 0.7,
                    y: -0.22,
                    yaw: 0.2,
                },
            ],
            ..SceneSpec::default()
        };
        let pose = |c: &str, q: [f64; 7]| ReachPose {
            category: c.into(),
            joints_deg: q.to_vec(),
        };
        Self {
            scene,
            detect: DetectParams::default(),
            reach_poses: vec![
                pose("cereal", [0.0, -30.0, 0.0, -70.0, 0.0, 20.0, 0.0]),
                pose("cracker", [0.0, -40.0, 0.0, -60.0, 0.0, 30.0, 10.0]),
                pose("tea", [0.0, -35.0, 0.0, -80.0, 0.0, 25.0, -10.0]),
            ],
            move_duration_s: 2.0,
            waypoint_dt_s: 0.1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.control_period_ms.is_nan()
            || self.control_period_ms <= 0.0
            || self.motor_substeps == 0
        {
            return bad("control period and motor substeps must be positive");
        }
        if self.dof == 0 || self.dof > u16::MAX as usize {
            return bad("dof out of range");
        }
        for j in [
            &self.forward_jitter,
            &self.return_jitter,
            &self.latency_modes.jitter,
        ] {
            j.validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if !(self.servo.omega_n > 0.0 && self.servo.zeta > 0.0) {
            return bad("servo parameters must be positive");
        }
        if self.tracking.amplitudes_deg.len() != self.dof {
            return bad("tracking.amplitudes_deg must have one entry per joint");
        }
        if self
            .end_to_end
            .reach_poses
            .iter()
            .any(|p| p.joints_deg.len() != self.dof)
        {
            return bad("end_to_end.reach_poses must have one angle per joint");
        }
        let rates = self.success_rate.frequencies_hz.iter().chain([
            &self.transport.rate_hz,
            &self.latency_modes.rate_hz,
            &self.tracking.raw_rate_hz,
            &self.tracking.interp_rate_hz,
        ]);
        if rates.into_iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad("request rates must be positive");
        }
        Ok(())
    }

    pub fn period_ns(&self) -> u64 {
        ms_to_ns(self.control_period_ms)
    }

    pub fn rt_config(&self) -> RtConfig {
        RtConfig {
            control_period_ns: self.period_ns(),
            motor_substeps: self.motor_substeps,
            dof: self.dof,
            servo: self.servo,
            gripper_rate: self.gripper_rate,
            base_max_speed: self.base_max_speed,
            feedback_every: self.feedback_period_ticks,
        }
    }

    pub fn session(&self) -> SessionConfig {
        SessionConfig {
            clock: self.clock,
            seed: self.seed,
            rt: self.rt_config(),
            forward_jitter: self.forward_jitter,
            return_jitter: self.return_jitter,
        }
    }

    /// Session time of the first client request.
    pub fn client_phase_ns(&self, forward: &JitterModel) -> u64 {
        let period = self.period_ns();
        match self.client_phase_ms {
            Some(ms) => ms_to_ns(ms),
            None => (period - ms_to_ns(forward.base_ms) % period) % period,
        }
    }
}
