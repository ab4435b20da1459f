//! Experiment sweeps behind `run` and `locations`.

use std::io::Write;

use rayon::prelude::*;
use ris_core::search::run_algorithm;
use ris_core::{received_power_dbm, AlgorithmId, Codebook, SearchReport, SimulatedOracle};
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::Scenario;

pub const RUN_HEADER: &str = "seed,algorithm,rows,cols,n,i,queries,rssi_all_off_dbm,rssi_final_dbm,gain_db";
pub const LOCATIONS_HEADER: &str = "location,cb_id,rssi_dbm,diag_is_row_max";

/// One `run` cell. RSSI columns are noiseless evaluations of the codebooks,
/// so they compare algorithms fairly even when the search saw noisy feedback.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub seed: u64,
    pub algorithm: AlgorithmId,
    pub rows: usize,
    pub cols: usize,
    pub n: usize,
    pub i: Option<usize>,
    pub queries: u64,
    pub rssi_all_off_dbm: f64,
    pub rssi_final_dbm: f64,
}

impl RunRow {
    pub fn gain_db(&self) -> f64 {
        self.rssi_final_dbm - self.rssi_all_off_dbm
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.algorithm,
            self.rows,
            self.cols,
            self.n,
            self.i.map(|i| i.to_string()).unwrap_or_default(),
            self.queries,
            fixed(self.rssi_all_off_dbm),
            fixed(self.rssi_final_dbm),
            fixed(self.gain_db()),
        )
    }
}

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

/// Runs one algorithm on the channel drawn for `seed`.
pub fn run_cell(scenario: &Scenario, seed: u64, algorithm: AlgorithmId) -> Result<(RunRow, SearchReport), CliError> {
    let grid = scenario.grid()?;
    let chan = scenario.channel.realize(grid.controllable(), seed)?;
    let oracle = SimulatedOracle::new(chan.clone(), scenario.oracle_for(seed))?;
    let report = run_algorithm(oracle, &grid, algorithm, &scenario.search_options(seed))?;
    log::debug!("seed {seed} {algorithm}: {} queries", report.queries_used);
    let row = RunRow {
        seed,
        algorithm,
        rows: grid.rows(),
        cols: grid.cols(),
        n: grid.controllable(),
        i: report.influential_count,
        queries: report.queries_used,
        rssi_all_off_dbm: received_power_dbm(&chan, &Codebook::all_off(&grid))?,
        rssi_final_dbm: received_power_dbm(&chan, &report.final_codebook)?,
    };
    Ok((row, report))
}

/// Every (seed, algorithm) cell, ordered by seed then algorithm as listed.
pub fn run_sweep(scenario: &Scenario) -> Result<Vec<(RunRow, SearchReport)>, CliError> {
    let cells: Vec<(u64, AlgorithmId)> = scenario
        .seeds
        .iter()
        .flat_map(|&s| scenario.algorithms.iter().map(move |&a| (s, a)))
        .collect();
    cells
        .par_iter()
        .map(|&(seed, alg)| run_cell(scenario, seed, alg))
        .collect()
}

pub fn write_run_csv(rows: &[RunRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{RUN_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv())?;
    }
    out.flush()
}

/// RSSI of every location's codebook measured at every location.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossMatrix {
    pub ids: Vec<String>,
    pub codebooks: Vec<Codebook>,
    /// `rssi_dbm[location][cb]`
    pub rssi_dbm: Vec<Vec<f64>>,
}

impl CrossMatrix {
    /// Whether the location's own codebook is at least as strong there as
    /// any other location's.
    pub fn diag_is_row_max(&self, location: usize) -> bool {
        let row = &self.rssi_dbm[location];
        row.iter().all(|&x| x <= row[location])
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{LOCATIONS_HEADER}")?;
        for (i, loc) in self.ids.iter().enumerate() {
            let diag = self.diag_is_row_max(i);
            for (j, cb) in self.ids.iter().enumerate() {
                writeln!(out, "{loc},{cb},{},{diag}", fixed(self.rssi_dbm[i][j]))?;
            }
        }
        out.flush()
    }
}

/// Generates a codebook per location with the scenario's first algorithm and
/// evaluates each codebook at every location.
pub fn cross_locations(scenario: &Scenario) -> Result<CrossMatrix, CliError> {
    if scenario.locations.len() < 2 {
        return Err(CliError::Usage(format!(
            "locations needs at least 2 locations, the scenario has {}",
            scenario.locations.len()
        )));
    }
    let grid = scenario.grid()?;
    let n = grid.controllable();
    let algorithm = scenario.algorithms[0];
    log::info!("generating {} codebooks with {algorithm}", scenario.locations.len());
    let generated: Vec<_> = scenario
        .locations
        .par_iter()
        .map(|loc| -> Result<_, CliError> {
            let chan = scenario.location_channel(loc, n)?;
            let oracle = SimulatedOracle::new(chan.clone(), scenario.oracle_for(loc.seed))?;
            let report = run_algorithm(oracle, &grid, algorithm, &scenario.search_options(loc.seed))?;
            Ok((chan, report.final_codebook))
        })
        .collect::<Result<_, _>>()?;
    let rssi_dbm = generated
        .iter()
        .map(|(chan, _)| {
            generated
                .iter()
                .map(|(_, cb)| received_power_dbm(chan, cb))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CrossMatrix {
        ids: scenario.locations.iter().map(|l| l.id.clone()).collect(),
        codebooks: generated.into_iter().map(|(_, cb)| cb).collect(),
        rssi_dbm,
    })
}
