use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimError;

pub fn ms_to_ns(ms: f64) -> u64 {
    (ms * 1e6).round().max(0.0) as u64
}

pub fn ns_to_ms(ns: u64) -> f64 {
    ns as f64 / 1e6
}

/// Two-point transit latency mixture: `base_ms` most of the time and
/// `base_ms + tail_extra_ms` with probability `tail_prob`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JitterModel {
    pub base_ms: f64,
    pub tail_prob: f64,
    pub tail_extra_ms: f64,
    /// Salt mixed into the run seed for this link's random stream.
    pub seed: u64,
}

impl Default for JitterModel {
    /// 1 ms nominal transit with 10% of packets taking 6 ms, i.e. beyond a
    /// 5 ms control period.
    fn default() -> Self {
        Self {
            base_ms: 1.0,
            tail_prob: 0.1,
            tail_extra_ms: 5.0,
            seed: 0,
        }
    }
}

impl JitterModel {
    pub fn constant(ms: f64) -> Self {
        Self {
            base_ms: ms,
            tail_prob: 0.0,
            tail_extra_ms: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.base_ms.is_finite() && self.base_ms >= 0.0) {
            return Err(SimError::BadJitter(format!("base_ms {}", self.base_ms)));
        }
        if !(0.0..=1.0).contains(&self.tail_prob) {
            return Err(SimError::BadJitter(format!("tail_prob {}", self.tail_prob)));
        }
        if !(self.tail_extra_ms.is_finite() && self.tail_extra_ms >= 0.0) {
            return Err(SimError::BadJitter(format!(
                "tail_extra_ms {}",
                self.tail_extra_ms
            )));
        }
        Ok(())
    }

    /// Random stream for this model under a run seed. `stream` separates
    /// links that share a run seed.
    pub fn rng(&self, run_seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed ^ self.seed.rotate_left(32));
        rng.set_stream(stream);
        rng
    }
}

/// One latency draw in milliseconds. Always consumes exactly one random
/// number so runs stay aligned when parameters change.
pub fn sample_latency<R: Rng + ?Sized>(model: &JitterModel, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if u < model.tail_prob {
        model.base_ms + model.tail_extra_ms
    } else {
        model.base_ms
    }
}

/// A one-way simulated link with its own seeded random stream.
#[derive(Debug, Clone)]
pub struct Link {
    model: JitterModel,
    rng: ChaCha8Rng,
}

impl Link {
    pub fn new(model: JitterModel, run_seed: u64, stream: u64) -> Result<Self, SimError> {
        model.validate()?;
        Ok(Self {
            rng: model.rng(run_seed, stream),
            model,
        })
    }

    pub fn model(&self) -> &JitterModel {
        &self.model
    }

    pub fn next_latency_ns(&mut self) -> u64 {
        ms_to_ns(sample_latency(&self.model, &mut self.rng))
    }
}

/// Transit record for one frame received by the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencySample {
    pub seq: u32,
    pub t_send_ns: u64,
    pub t_arrive_ns: u64,
    pub handled_tick: u64,
    /// Handled-tick time minus send time.
    pub end_to_end_ns: u64,
}

impl LatencySample {
    pub fn new(
        seq: u32,
        t_send_ns: u64,
        t_arrive_ns: u64,
        handled_tick: u64,
        period_ns: u64,
    ) -> Self {
        debug_assert!(t_arrive_ns >= t_send_ns);
        Self {
            seq,
            t_send_ns,
            t_arrive_ns,
            handled_tick,
            end_to_end_ns: (handled_tick * period_ns).saturating_sub(t_send_ns),
        }
    }

    pub fn transit_ms(&self) -> f64 {
        ns_to_ms(self.t_arrive_ns - self.t_send_ns)
    }

    pub fn end_to_end_ms(&self) -> f64 {
        ns_to_ms(self.end_to_end_ns)
    }
}
