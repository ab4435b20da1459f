//! Scenario files: one JSON document that fully determines an experiment.

use std::collections::HashSet;
use std::path::Path;

use ris_core::search::Bench2Variant;
use ris_core::{
    generate_channel, AlgorithmId, ChannelRealization, ChannelSpec, Complex64, Grid, OracleConfig,
    SearchOptions,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Corner {
    #[default]
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

/// Which cells are wired to the controller rather than to a PIN diode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaskSpec {
    Full,
    CornerBlock {
        #[serde(default = "default_block")]
        size: usize,
        #[serde(default)]
        corner: Corner,
    },
    Blocked {
        cells: Vec<(usize, usize)>,
    },
}

fn default_block() -> usize {
    2
}

impl Default for MaskSpec {
    fn default() -> Self {
        MaskSpec::CornerBlock {
            size: 2,
            corner: Corner::TopLeft,
        }
    }
}

impl MaskSpec {
    pub fn grid(&self, rows: usize, cols: usize) -> Result<Grid, CliError> {
        let blocked = match self {
            MaskSpec::Full => Vec::new(),
            MaskSpec::CornerBlock { size, corner } => {
                let (size_r, size_c) = (*size.min(&rows), *size.min(&cols));
                let r0 = match corner {
                    Corner::TopLeft | Corner::TopRight => 0,
                    _ => rows - size_r,
                };
                let c0 = match corner {
                    Corner::TopLeft | Corner::BottomLeft => 0,
                    _ => cols - size_c,
                };
                (r0..r0 + size_r)
                    .flat_map(|r| (c0..c0 + size_c).map(move |c| (r, c)))
                    .collect()
            }
            MaskSpec::Blocked { cells } => cells.clone(),
        };
        Ok(Grid::with_blocked(rows, cols, &blocked)?)
    }
}

/// Channel statistics plus the link parameters layered on top of a draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    #[serde(flatten)]
    pub spec: ChannelSpec,
    /// Direct-path leakage `[re, im]`.
    #[serde(default)]
    pub background: [f64; 2],
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "default_tx")]
    pub tx_power_dbm: f64,
    #[serde(default = "default_noise")]
    pub noise_power_dbm: f64,
}

fn one() -> f64 {
    1.0
}

fn default_tx() -> f64 {
    ris_core::gain::DEFAULT_TX_POWER_DBM
}

fn default_noise() -> f64 {
    ris_core::gain::DEFAULT_NOISE_POWER_DBM
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            spec: ChannelSpec::rayleigh(0),
            background: [0.0, 0.0],
            alpha: 1.0,
            tx_power_dbm: default_tx(),
            noise_power_dbm: default_noise(),
        }
    }
}

impl ChannelConfig {
    /// Draws a realization for `n` elements with the given seed.
    pub fn realize(&self, n: usize, seed: u64) -> Result<ChannelRealization, CliError> {
        let chan = generate_channel(&self.spec.with_seed(seed), n)?
            .with_background(Complex64::new(self.background[0], self.background[1]))?
            .with_alpha(self.alpha)?
            .with_powers(self.tx_power_dbm, self.noise_power_dbm)?;
        Ok(chan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    pub seed: u64,
    /// Overrides the scenario channel for this location.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default = "default_cols")]
    pub cols: usize,
    #[serde(default)]
    pub mask: MaskSpec,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub locations: Vec<Location>,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<AlgorithmId>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub random_budget: Option<usize>,
    #[serde(default)]
    pub bench2_variant: Bench2Variant,
}

fn default_rows() -> usize {
    8
}

fn default_cols() -> usize {
    10
}

fn default_algorithms() -> Vec<AlgorithmId> {
    vec![AlgorithmId::Alg1, AlgorithmId::Bench1, AlgorithmId::Bench2]
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

impl Default for Scenario {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let grid = self.grid()?;
        if grid.controllable() == 0 {
            return Err(CliError::Config("the panel has no controllable element".into()));
        }
        if self.algorithms.is_empty() {
            return Err(CliError::Config("at least one algorithm is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(CliError::Config(format!("seed {dup} is listed twice")));
        }
        let mut ids = HashSet::new();
        for loc in &self.locations {
            ris_control::store::validate_location_id(&loc.id).map_err(|e| CliError::Config(e.to_string()))?;
            if !ids.insert(loc.id.as_str()) {
                return Err(CliError::Config(format!("location {:?} is listed twice", loc.id)));
            }
            if let Some(c) = &loc.channel {
                c.spec.validate()?;
            }
        }
        self.channel.spec.validate()?;
        self.oracle.validate()?;
        if self.random_budget == Some(0) {
            return Err(CliError::Config("random_budget must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        self.mask.grid(self.rows, self.cols)
    }

    pub fn search_options(&self, seed: u64) -> SearchOptions {
        SearchOptions {
            random_budget: self.random_budget,
            random_seed: seed,
            bench2_variant: self.bench2_variant,
            ..SearchOptions::default()
        }
    }

    pub fn location(&self, id: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.id == id)
    }

    pub fn location_channel(&self, loc: &Location, n: usize) -> Result<ChannelRealization, CliError> {
        loc.channel.as_ref().unwrap_or(&self.channel).realize(n, loc.seed)
    }

    /// Oracle settings for one run; the noise stream is keyed by the run seed
    /// so that sweeps stay reproducible cell by cell.
    pub fn oracle_for(&self, seed: u64) -> OracleConfig {
        OracleConfig {
            noise_seed: ris_core::rng::derive_seed(self.oracle.noise_seed, seed),
            ..self.oracle.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_panel() {
        let s = Scenario::default();
        let grid = s.grid().unwrap();
        assert_eq!((grid.rows(), grid.cols(), grid.controllable()), (8, 10, 76));
        assert_eq!(grid.element_at(0, 0), None);
        assert_eq!(grid.element_at(1, 1), None);
        assert!(grid.element_at(2, 2).is_some());
        assert_eq!(s.channel.tx_power_dbm, -10.0);
        assert_eq!(s.algorithms.len(), 3);
    }

    #[test]
    fn corners() {
        let g = MaskSpec::CornerBlock { size: 2, corner: Corner::BottomRight }.grid(4, 5).unwrap();
        assert_eq!(g.element_at(3, 4), None);
        assert_eq!(g.element_at(2, 3), None);
        assert!(g.element_at(0, 0).is_some());
        assert_eq!(g.controllable(), 16);
    }

    #[test]
    fn validation() {
        assert!(matches!(Scenario::from_json(r#"{"seeds":[1,1]}"#), Err(CliError::Config(_))));
        assert!(matches!(Scenario::from_json(r#"{"algorithms":[]}"#), Err(CliError::Config(_))));
        assert!(matches!(Scenario::from_json(r#"{"algorithms":["magic"]}"#), Err(CliError::Config(_))));
        assert!(matches!(
            Scenario::from_json(r#"{"rows":1,"cols":1,"mask":{"kind":"blocked","cells":[[0,0]]}}"#),
            Err(CliError::Config(_))
        ));
        assert!(matches!(Scenario::from_json(r#"{"colums":3}"#), Err(CliError::Config(_))));
        let s = Scenario::from_json(
            r#"{"rows":2,"cols":2,"mask":{"kind":"full"},"channel":{"kind":"rician","rician_k":4.0,"background":[0.5,0]},
                "locations":[{"id":"LocA","seed":1}],"oracle":{"measurement_noise_db":0.5,"noise_seed":3}}"#,
        )
        .unwrap();
        assert_eq!(s.grid().unwrap().controllable(), 4);
        let chan = s.location_channel(&s.locations[0], 4).unwrap();
        assert_eq!(chan.background(), Complex64::new(0.5, 0.0));
    }
}
