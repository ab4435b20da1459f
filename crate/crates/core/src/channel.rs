//! Seeded random channel generation.
//!
//! Rayleigh is the default non-line-of-sight stand-in for an indoor office;
//! it is a modelling assumption, not a measured statistic. The Rician variant
//! adds a unit-modulus specular component with a linear phase progression
//! across the elements.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::ChannelRealization;
use crate::rng::channel_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    #[default]
    Rayleigh,
    Rician,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(default)]
    pub kind: ChannelKind,
    /// Linear K-factor; ignored for Rayleigh.
    #[serde(default)]
    pub rician_k: f64,
    /// Attenuation applied to each of the four vectors.
    #[serde(default)]
    pub path_loss_db: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ChannelSpec {
    pub fn rayleigh(seed: u64) -> Self {
        Self {
            kind: ChannelKind::Rayleigh,
            rician_k: 0.0,
            path_loss_db: 0.0,
            seed,
        }
    }

    pub fn rician(k: f64, seed: u64) -> Self {
        Self {
            kind: ChannelKind::Rician,
            rician_k: k,
            path_loss_db: 0.0,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rician_k.is_finite() || self.rician_k < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "rician_k must be finite and >= 0, got {}",
                self.rician_k
            )));
        }
        if !self.path_loss_db.is_finite() {
            return Err(Error::InvalidArgument("path_loss_db must be finite".into()));
        }
        Ok(())
    }
}

/// Draws `h_h, h_v, g_h, g_v` (in that order) for `n` elements. Powers,
/// background and alpha take their defaults.
pub fn generate_channel(spec: &ChannelSpec, n: usize) -> Result<ChannelRealization> {
    if n == 0 {
        return Err(Error::InvalidArgument("element count must be at least 1".into()));
    }
    spec.validate()?;
    let scale = 10f64.powf(-spec.path_loss_db / 20.0);
    let mut rng = channel_rng(spec.seed);

    let (los_w, nlos_w) = match spec.kind {
        ChannelKind::Rayleigh => (0.0, 1.0),
        ChannelKind::Rician => {
            let k = spec.rician_k;
            ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
        }
    };

    let mut draw = || -> Vec<Complex64> {
        // phase slope of the specular component, drawn even for Rayleigh so
        // both kinds consume the stream identically
        let theta: f64 = rng.random_range(-PI / 2.0..PI / 2.0);
        (0..n)
            .map(|i| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let diffuse = Complex64::new(re, im) * FRAC_1_SQRT_2;
                let los = Complex64::from_polar(1.0, PI * i as f64 * theta.sin());
                (los * los_w + diffuse * nlos_w) * scale
            })
            .collect()
    };
    let h_h = draw();
    let h_v = draw();
    let g_h = draw();
    let g_v = draw();
    ChannelRealization::new(h_h, h_v, g_h, g_v)
}
