//! The influential-element search and its building blocks.

use crate::codebook::{Codebook, Grid};
use crate::error::{Error, Result};
use crate::oracle::RssiOracle;

use super::{cols, group_pass, rows, Accepted, AlgorithmId, Counted, SearchReport};

#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalPass {
    pub phi_h: Codebook,
    pub p_max: f64,
    /// RSSI of the all-off surface.
    pub p0: f64,
    pub accepted: Vec<Accepted>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pass {
    pub codebook: Codebook,
    pub p_max: f64,
    pub accepted: Vec<Accepted>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluentialSet {
    /// All-off except the influential cells, which carry the shared state.
    pub partial: Codebook,
    /// Row-major over all grid cells.
    pub mask: Vec<bool>,
    pub count: usize,
}

/// Measures the all-off surface, then sweeps the rows. `1 + 4R` queries.
pub fn horizontal_search<O: RssiOracle>(
    oracle: &mut Counted<O>,
    grid: &Grid,
) -> Result<HorizontalPass, O::Error> {
    let off = Codebook::all_off(grid);
    let (query, p0) = oracle.probe(&off)?;
    let mut accepted = vec![Accepted {
        query,
        rssi_dbm: p0,
    }];
    let (phi_h, p_max) = group_pass(oracle, &off, rows(grid), p0, &mut accepted)?;
    Ok(HorizontalPass {
        phi_h,
        p_max,
        p0,
        accepted,
    })
}

/// Column sweep from the all-off surface with the running maximum reset to
/// `p0`; nothing is re-measured for the reset. `4C` queries.
pub fn vertical_search<O: RssiOracle>(
    oracle: &mut Counted<O>,
    grid: &Grid,
    p0: f64,
) -> Result<Pass, O::Error> {
    let mut accepted = Vec::new();
    let (codebook, p_max) =
        group_pass(oracle, &Codebook::all_off(grid), cols(grid), p0, &mut accepted)?;
    Ok(Pass {
        codebook,
        p_max,
        accepted,
    })
}

/// Cells whose full (h, v) state agrees between the row and column results.
pub fn influential_merge(phi_h: &Codebook, phi_v: &Codebook) -> Result<InfluentialSet> {
    let grid = phi_h.grid();
    if grid != phi_v.grid() {
        return Err(Error::InvalidArgument(format!(
            "codebooks cover different grids ({}x{}/{} vs {}x{}/{})",
            grid.rows(),
            grid.cols(),
            grid.controllable(),
            phi_v.grid().rows(),
            phi_v.grid().cols(),
            phi_v.grid().controllable(),
        )));
    }
    let mut partial = Codebook::all_off(grid);
    let mut mask = vec![false; grid.rows() * grid.cols()];
    let mut count = 0;
    for e in 0..grid.controllable() {
        let s = phi_h.state(e);
        if s == phi_v.state(e) {
            partial.set(e, s);
            let (r, c) = grid.position(e);
            mask[r * grid.cols() + c] = true;
            count += 1;
        }
    }
    Ok(InfluentialSet {
        partial,
        mask,
        count,
    })
}

/// Re-measures `partial`, then runs a per-element sweep over every
/// controllable cell not flagged in `influential` (row-major cell mask).
/// `1 + 4(N - I)` queries.
pub fn refine_remaining<O: RssiOracle>(
    oracle: &mut Counted<O>,
    partial: &Codebook,
    influential: &[bool],
) -> Result<Pass, O::Error> {
    let grid = partial.grid();
    if influential.len() != grid.rows() * grid.cols() {
        return Err(Error::InvalidArgument(format!(
            "influential mask has {} cells, grid has {}",
            influential.len(),
            grid.rows() * grid.cols()
        ))
        .into());
    }
    let (query, p_start) = oracle.probe(partial)?;
    let mut accepted = vec![Accepted {
        query,
        rssi_dbm: p_start,
    }];
    let remaining: Vec<usize> = (0..grid.controllable())
        .filter(|&e| {
            let (r, c) = grid.position(e);
            !influential[r * grid.cols() + c]
        })
        .collect();
    let (codebook, p_max) = group_pass(
        oracle,
        partial,
        remaining.chunks(1),
        p_start,
        &mut accepted,
    )?;
    Ok(Pass {
        codebook,
        p_max,
        accepted,
    })
}

/// Full influential-element search. Uses `2 + 4R + 4C + 4(N - I)` queries.
pub fn run_alg1<O: RssiOracle>(oracle: O, grid: &Grid) -> Result<SearchReport, O::Error> {
    let mut oracle = Counted::new(oracle);
    let horizontal = horizontal_search(&mut oracle, grid)?;
    let vertical = vertical_search(&mut oracle, grid, horizontal.p0)?;
    let merged = influential_merge(&horizontal.phi_h, &vertical.codebook)?;
    let refined = refine_remaining(&mut oracle, &merged.partial, &merged.mask)?;
    Ok(SearchReport {
        algorithm: AlgorithmId::Alg1,
        final_codebook: refined.codebook,
        final_rssi_dbm: refined.p_max,
        initial_rssi_dbm: Some(horizontal.p0),
        queries_used: oracle.queries(),
        accepted_trajectory: refined.accepted,
        phi_h: Some(horizontal.phi_h),
        phi_v: Some(vertical.codebook),
        influential_count: Some(merged.count),
        influential_mask: Some(merged.mask),
    })
}
