//! Black-box RSSI feedback.
//!
//! Search algorithms only ever see [`RssiOracle::measure`]. The simulated
//! oracle answers either from the analytic gain (optionally perturbed by
//! Gaussian noise in dB) or from the sample-level frame simulator, and keeps
//! a log of every query.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::frames::{simulate_frames, FrameConfig};
use crate::gain::{received_power_dbm, ChannelRealization};
use crate::rng::noise_rng;

/// Anything that can report the received power for a codebook.
pub trait RssiOracle {
    type Error: From<Error>;

    fn measure(&mut self, cb: &Codebook) -> Result<f64, Self::Error>;
}

impl<O: RssiOracle + ?Sized> RssiOracle for &mut O {
    type Error = O::Error;

    fn measure(&mut self, cb: &Codebook) -> Result<f64, Self::Error> {
        (**self).measure(cb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    #[default]
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    #[serde(default)]
    pub mode: OracleMode,
    /// Standard deviation of the additive dB-domain noise (analytic mode).
    #[serde(default)]
    pub measurement_noise_db: f64,
    #[serde(default)]
    pub frame_config: FrameConfig,
    #[serde(default)]
    pub noise_seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl OracleConfig {
    pub fn noiseless() -> Self {
        Self {
            mode: OracleMode::Analytic,
            measurement_noise_db: 0.0,
            frame_config: FrameConfig::default(),
            noise_seed: 0,
        }
    }

    pub fn noisy(std_db: f64, noise_seed: u64) -> Self {
        Self {
            measurement_noise_db: std_db,
            noise_seed,
            ..Self::noiseless()
        }
    }

    pub fn empirical(frame_config: FrameConfig, noise_seed: u64) -> Self {
        Self {
            mode: OracleMode::Empirical,
            measurement_noise_db: 0.0,
            frame_config,
            noise_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.measurement_noise_db.is_finite() || self.measurement_noise_db < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "measurement_noise_db must be finite and >= 0, got {}",
                self.measurement_noise_db
            )));
        }
        if self.mode == OracleMode::Empirical {
            self.frame_config.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    /// 1-based position in the log.
    pub index: u64,
    pub digest: u64,
    pub rssi_dbm: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryLog {
    pub count: u64,
    pub trajectory: Vec<QueryRecord>,
}

/// Oracle bound to one channel realization.
#[derive(Debug, Clone)]
pub struct SimulatedOracle {
    channel: ChannelRealization,
    config: OracleConfig,
    log: QueryLog,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl SimulatedOracle {
    pub fn new(channel: ChannelRealization, config: OracleConfig) -> Result<Self> {
        config.validate()?;
        let noise = (config.measurement_noise_db > 0.0)
            .then(|| Normal::new(0.0, config.measurement_noise_db).expect("validated std"));
        Ok(Self {
            rng: noise_rng(config.noise_seed),
            channel,
            config,
            log: QueryLog::default(),
            noise,
        })
    }

    /// Analytic, noiseless oracle.
    pub fn exact(channel: ChannelRealization) -> Self {
        Self::new(channel, OracleConfig::noiseless()).expect("noiseless config is valid")
    }

    pub fn channel(&self) -> &ChannelRealization {
        &self.channel
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn query_count(&self) -> u64 {
        self.log.count
    }

    pub fn log(&self) -> &QueryLog {
        &self.log
    }

    /// Clears the log and rewinds the noise stream to its seed.
    pub fn reset(&mut self) {
        self.log = QueryLog::default();
        self.rng = noise_rng(self.config.noise_seed);
    }

    pub fn take_trajectory(&mut self) -> QueryLog {
        std::mem::take(&mut self.log)
    }

    /// Frames averaged per report (1 for analytic mode).
    pub fn frames_per_report(&self) -> u32 {
        match self.config.mode {
            OracleMode::Analytic => 1,
            OracleMode::Empirical => self.config.frame_config.frames,
        }
    }

    fn evaluate(&mut self, cb: &Codebook) -> Result<f64> {
        match self.config.mode {
            OracleMode::Analytic => {
                let exact = received_power_dbm(&self.channel, cb)?;
                Ok(match &self.noise {
                    Some(n) => exact + n.sample(&mut self.rng),
                    None => exact,
                })
            }
            OracleMode::Empirical => {
                let frame_seed = self.rng.random::<u64>();
                simulate_frames(&self.channel, cb, &self.config.frame_config, frame_seed)
            }
        }
    }
}

impl RssiOracle for SimulatedOracle {
    type Error = Error;

    fn measure(&mut self, cb: &Codebook) -> Result<f64> {
        let rssi_dbm = self.evaluate(cb)?;
        self.log.count += 1;
        self.log.trajectory.push(QueryRecord {
            index: self.log.count,
            digest: cb.digest(),
            rssi_dbm,
        });
        Ok(rssi_dbm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, ChannelSpec};
    use crate::codebook::Grid;
    use crate::gain::cascade_gain;

    fn setup() -> (Grid, ChannelRealization) {
        let grid = Grid::full(2, 2).unwrap();
        (grid, generate_channel(&ChannelSpec::rayleigh(4), 4).unwrap())
    }

    #[test]
    fn analytic_noiseless_is_definition() {
        let (grid, chan) = setup();
        let off = Codebook::all_off(&grid);
        let mut o = SimulatedOracle::exact(chan.clone());
        let want = chan.tx_power_dbm() + 10.0 * cascade_gain(&chan, &off).unwrap().linear.log10();
        let got = o.measure(&off).unwrap();
        assert_eq!(got, want);
        assert_eq!(o.measure(&off).unwrap().to_bits(), got.to_bits());
    }

    #[test]
    fn counter_contract() {
        let (grid, chan) = setup();
        let off = Codebook::all_off(&grid);
        let mut o = SimulatedOracle::exact(chan);
        o.measure(&off).unwrap();
        assert_eq!(o.query_count(), 1);
        o.measure(&off).unwrap();
        assert_eq!(o.query_count(), 2);
        o.reset();
        assert_eq!(o.query_count(), 0);
        for _ in 0..3 {
            o.measure(&off.flip_all()).unwrap();
        }
        assert_eq!(o.query_count(), 3);
        let log = o.take_trajectory();
        assert_eq!(log.count, 3);
        assert_eq!(log.trajectory.iter().map(|r| r.index).collect::<Vec<_>>(), [1, 2, 3]);
        assert!(log.trajectory.iter().all(|r| r.digest == off.flip_all().digest()));
        assert_eq!(o.query_count(), 0);
    }

    #[test]
    fn mismatch_does_not_count() {
        let (_, chan) = setup();
        let mut o = SimulatedOracle::exact(chan);
        let wrong = Codebook::all_off(&Grid::full(1, 3).unwrap());
        assert!(matches!(o.measure(&wrong), Err(Error::DimensionMismatch { expected: 4, actual: 3 })));
        assert_eq!(o.query_count(), 0);
    }

    #[test]
    fn noise_model_std() {
        let (grid, chan) = setup();
        let off = Codebook::all_off(&grid);
        let exact = received_power_dbm(&chan, &off).unwrap();
        let mut o = SimulatedOracle::new(chan, OracleConfig::noisy(2.0, 11)).unwrap();
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| o.measure(&off).unwrap() - exact).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() / 2.0 - 1.0).abs() < 0.10, "std {}", var.sqrt());
    }

    #[test]
    fn noise_stream_reproducible() {
        let (grid, chan) = setup();
        let off = Codebook::all_off(&grid);
        let run = |seed| {
            let mut o = SimulatedOracle::new(chan.clone(), OracleConfig::noisy(1.0, seed)).unwrap();
            (0..5).map(|_| o.measure(&off).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));

        let mut o = SimulatedOracle::new(chan.clone(), OracleConfig::noisy(1.0, 3)).unwrap();
        let first: Vec<f64> = (0..5).map(|_| o.measure(&off).unwrap()).collect();
        o.reset();
        let again: Vec<f64> = (0..5).map(|_| o.measure(&off).unwrap()).collect();
        assert_eq!(first, again);
    }

    #[test]
    fn empirical_mode_uses_frames() {
        let (grid, chan) = setup();
        let chan = chan.with_powers(-10.0, f64::NEG_INFINITY).unwrap();
        let off = Codebook::all_off(&grid);
        let fc = FrameConfig { frames: 2, samples_per_frame: 50, modulation_order: 4 };
        let mut o = SimulatedOracle::new(chan.clone(), OracleConfig::empirical(fc, 1)).unwrap();
        let got = o.measure(&off).unwrap();
        assert!((got - received_power_dbm(&chan, &off).unwrap()).abs() < 1e-9);
        assert_eq!(o.frames_per_report(), 2);
        assert_eq!(o.query_count(), 1);
    }

    #[test]
    fn rejects_negative_noise() {
        let (_, chan) = setup();
        assert!(SimulatedOracle::new(chan, OracleConfig::noisy(-1.0, 0)).is_err());
    }
}
