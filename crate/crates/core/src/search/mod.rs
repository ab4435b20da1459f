//! Codebook search driven purely by RSSI feedback.
//!
//! * [`run_alg1`]: row pass, column pass, intersection of the two results
//!   (the influential elements), then a per-element pass over the rest.
//! * [`run_benchmark1`]: per-element pass over every controllable cell.
//! * [`run_benchmark2`]: row pass followed by a column pass on top of it.
//! * [`run_random`] and [`run_exhaustive`] as sanity baselines.
//!
//! Every candidate is accepted only on strict improvement. States are tried
//! in [`STATES`](crate::element::STATES) order, rows and columns ascending,
//! single elements in row-major order. Rows or columns without controllable
//! cells are skipped.

mod baselines;
mod cost;
mod influential;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codebook::{Codebook, Grid};
use crate::element::STATES;
use crate::error::{Error, Result};
use crate::gain::DEFAULT_ENUMERATION_LIMIT;
use crate::oracle::RssiOracle;

pub use baselines::{run_benchmark1, run_benchmark2, run_exhaustive, run_random, Bench2Variant};
pub use cost::{predicted_queries, predicted_queries_for_grid};
pub use influential::{
    horizontal_search, influential_merge, refine_remaining, run_alg1, vertical_search,
    HorizontalPass, InfluentialSet, Pass,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    Alg1,
    Bench1,
    Bench2,
    Random,
    Exhaustive,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] = [
        AlgorithmId::Alg1,
        AlgorithmId::Bench1,
        AlgorithmId::Bench2,
        AlgorithmId::Random,
        AlgorithmId::Exhaustive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::Alg1 => "alg1",
            AlgorithmId::Bench1 => "bench1",
            AlgorithmId::Bench2 => "bench2",
            AlgorithmId::Random => "random",
            AlgorithmId::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// An accepted improvement: the query that produced it and its RSSI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accepted {
    pub query: u64,
    pub rssi_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub algorithm: AlgorithmId,
    pub final_codebook: Codebook,
    pub final_rssi_dbm: f64,
    /// RSSI of the all-off surface, when the algorithm measures it.
    pub initial_rssi_dbm: Option<f64>,
    pub queries_used: u64,
    /// Strictly increasing under noiseless feedback. For alg1 this is the
    /// construction of the final codebook: the re-measure of the influential
    /// configuration followed by the per-element improvements.
    pub accepted_trajectory: Vec<Accepted>,
    pub phi_h: Option<Codebook>,
    pub phi_v: Option<Codebook>,
    pub influential_count: Option<usize>,
    /// Row-major over all grid cells; masked cells are `false`.
    pub influential_mask: Option<Vec<bool>>,
}

/// Knobs for [`run_algorithm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Random-search budget; defaults to benchmark 1's query count.
    #[serde(default)]
    pub random_budget: Option<usize>,
    #[serde(default)]
    pub random_seed: u64,
    #[serde(default)]
    pub bench2_variant: Bench2Variant,
    #[serde(default = "default_limit")]
    pub enumeration_limit: u64,
}

fn default_limit() -> u64 {
    DEFAULT_ENUMERATION_LIMIT
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            random_budget: None,
            random_seed: 0,
            bench2_variant: Bench2Variant::default(),
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

pub fn run_algorithm<O: RssiOracle>(
    oracle: O,
    grid: &Grid,
    algorithm: AlgorithmId,
    options: &SearchOptions,
) -> Result<SearchReport, O::Error> {
    match algorithm {
        AlgorithmId::Alg1 => run_alg1(oracle, grid),
        AlgorithmId::Bench1 => run_benchmark1(oracle, grid),
        AlgorithmId::Bench2 => run_benchmark2(oracle, grid, options.bench2_variant),
        AlgorithmId::Random => {
            let budget = options
                .random_budget
                .unwrap_or(1 + 4 * grid.controllable());
            run_random(oracle, grid, budget, options.random_seed)
        }
        AlgorithmId::Exhaustive => run_exhaustive(oracle, grid, options.enumeration_limit),
    }
}

/// Oracle wrapper that numbers queries from 1.
#[derive(Debug)]
pub struct Counted<O> {
    inner: O,
    queries: u64,
}

impl<O: RssiOracle> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, queries: 0 }
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn into_inner(self) -> O {
        self.inner
    }

    /// Measures `cb`, returning the 1-based query index and the RSSI.
    pub fn probe(&mut self, cb: &Codebook) -> Result<(u64, f64), O::Error> {
        let rssi = self.inner.measure(cb)?;
        self.queries += 1;
        Ok((self.queries, rssi))
    }
}

impl<O: RssiOracle> RssiOracle for Counted<O> {
    type Error = O::Error;

    fn measure(&mut self, cb: &Codebook) -> Result<f64, O::Error> {
        self.probe(cb).map(|(_, rssi)| rssi)
    }
}

/// One greedy sweep. For each group, every state is written to all of the
/// group's elements on top of the incumbent; the candidate replaces the
/// incumbent only if its RSSI strictly exceeds the running maximum.
fn group_pass<'g, O: RssiOracle>(
    oracle: &mut Counted<O>,
    start: &Codebook,
    groups: impl IntoIterator<Item = &'g [usize]>,
    mut p_max: f64,
    accepted: &mut Vec<Accepted>,
) -> Result<(Codebook, f64), O::Error> {
    let mut best = start.clone();
    let mut temp = start.clone();
    for group in groups {
        if group.is_empty() {
            continue;
        }
        for state in STATES {
            temp.set_group(group, state);
            let (query, rssi) = oracle.probe(&temp)?;
            if rssi > p_max {
                best.clone_from(&temp);
                p_max = rssi;
                accepted.push(Accepted {
                    query,
                    rssi_dbm: rssi,
                });
            }
        }
        temp.clone_from(&best);
    }
    Ok((best, p_max))
}

fn rows(grid: &Grid) -> impl Iterator<Item = &[usize]> {
    (0..grid.rows()).map(|r| grid.row_members(r))
}

fn cols(grid: &Grid) -> impl Iterator<Item = &[usize]> {
    (0..grid.cols()).map(|c| grid.col_members(c))
}

#[cfg(test)]
mod tests;
