//! Sample-level receiver simulation.
//!
//! Unit-power M-PSK symbols pass through the cascade amplitude, complex AWGN
//! is added, and the receiver reports the mean `|r|^2` averaged over frames
//! in the linear domain.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::gain::ChannelRealization;
use crate::rng::noise_rng;

/// Largest `frames * samples_per_frame` accepted by [`simulate_frames`].
pub const DEFAULT_SAMPLE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub frames: u32,
    pub samples_per_frame: u32,
    pub modulation_order: u32,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            frames: 50,
            samples_per_frame: 1_000,
            modulation_order: 4,
        }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.samples_per_frame == 0 {
            return Err(Error::InvalidFrameConfig(
                "frames and samples_per_frame must be at least 1".into(),
            ));
        }
        if ![2, 4, 8, 16].contains(&self.modulation_order) {
            return Err(Error::InvalidFrameConfig(format!(
                "modulation order {} not in {{2, 4, 8, 16}}",
                self.modulation_order
            )));
        }
        Ok(())
    }

    pub fn total_samples(&self) -> u64 {
        self.frames as u64 * self.samples_per_frame as u64
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Empirical RSSI in dBm of `cb` under `chan`.
pub fn simulate_frames(
    chan: &ChannelRealization,
    cb: &Codebook,
    fc: &FrameConfig,
    noise_seed: u64,
) -> Result<f64> {
    simulate_frames_budgeted(chan, cb, fc, noise_seed, DEFAULT_SAMPLE_BUDGET)
}

pub fn simulate_frames_budgeted(
    chan: &ChannelRealization,
    cb: &Codebook,
    fc: &FrameConfig,
    noise_seed: u64,
    budget: u64,
) -> Result<f64> {
    fc.validate()?;
    let requested = fc.total_samples();
    if requested > budget {
        return Err(Error::BudgetExceeded { requested, budget });
    }
    let link = chan.amplitude(cb)? * dbm_to_mw(chan.tx_power_dbm()).sqrt();
    let sigma = dbm_to_mw(chan.noise_power_dbm()).sqrt();
    let noisy = sigma > 0.0;
    let step = 2.0 * PI / fc.modulation_order as f64;
    let mut rng = noise_rng(noise_seed);

    let mut total = 0.0;
    for _ in 0..fc.frames {
        let mut frame = 0.0;
        for _ in 0..fc.samples_per_frame {
            let m = rng.random_range(0..fc.modulation_order);
            let x = Complex64::from_polar(1.0, step * m as f64);
            let mut r = link * x;
            if noisy {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                r += Complex64::new(re, im) * (sigma * FRAC_1_SQRT_2);
            }
            frame += r.norm_sqr();
        }
        total += frame / fc.samples_per_frame as f64;
    }
    Ok(mw_to_dbm(total / fc.frames as f64))
}
