use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::{Codebook, Grid};
use crate::element::{ElementState, STATES};
use crate::error::Error;
use crate::oracle::RssiOracle;
use crate::rng::search_rng;

use super::influential::horizontal_search;
use super::{cols, group_pass, Accepted, AlgorithmId, Counted, SearchReport};

/// How benchmark 2's column pass treats the running maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bench2Variant {
    /// Keep the maximum reached by the row pass.
    #[default]
    CarryMax,
    /// Restart from the all-off RSSI.
    ResetMax,
}

/// Per-element on/off search over every controllable cell. `1 + 4N` queries.
pub fn run_benchmark1<O: RssiOracle>(oracle: O, grid: &Grid) -> Result<SearchReport, O::Error> {
    let mut oracle = Counted::new(oracle);
    let off = Codebook::all_off(grid);
    let (query, p0) = oracle.probe(&off)?;
    let mut accepted = vec![Accepted {
        query,
        rssi_dbm: p0,
    }];
    let elements: Vec<usize> = (0..grid.controllable()).collect();
    let (final_codebook, p_max) = group_pass(&mut oracle, &off, elements.chunks(1), p0, &mut accepted)?;
    Ok(SearchReport {
        algorithm: AlgorithmId::Bench1,
        final_codebook,
        final_rssi_dbm: p_max,
        initial_rssi_dbm: Some(p0),
        queries_used: oracle.queries(),
        accepted_trajectory: accepted,
        phi_h: None,
        phi_v: None,
        influential_count: None,
        influential_mask: None,
    })
}

/// Row pass, then a column pass applied on top of the row result.
/// `1 + 4R + 4C` queries.
pub fn run_benchmark2<O: RssiOracle>(
    oracle: O,
    grid: &Grid,
    variant: Bench2Variant,
) -> Result<SearchReport, O::Error> {
    let mut oracle = Counted::new(oracle);
    let horizontal = horizontal_search(&mut oracle, grid)?;
    let start_max = match variant {
        Bench2Variant::CarryMax => horizontal.p_max,
        Bench2Variant::ResetMax => horizontal.p0,
    };
    let mut column_accepts = Vec::new();
    let (final_codebook, p_max) = group_pass(
        &mut oracle,
        &horizontal.phi_h,
        cols(grid),
        start_max,
        &mut column_accepts,
    )?;
    // without a column commit the row result stands, with its own RSSI
    let final_rssi_dbm = if column_accepts.is_empty() {
        horizontal.p_max
    } else {
        p_max
    };
    let mut accepted = horizontal.accepted;
    accepted.extend(column_accepts);
    Ok(SearchReport {
        algorithm: AlgorithmId::Bench2,
        final_codebook: final_codebook.clone(),
        final_rssi_dbm,
        initial_rssi_dbm: Some(horizontal.p0),
        queries_used: oracle.queries(),
        accepted_trajectory: accepted,
        phi_h: Some(horizontal.phi_h),
        phi_v: Some(final_codebook),
        influential_count: None,
        influential_mask: None,
    })
}

/// Best of `budget` uniformly drawn codebooks (with replacement).
pub fn run_random<O: RssiOracle>(
    oracle: O,
    grid: &Grid,
    budget: usize,
    seed: u64,
) -> Result<SearchReport, O::Error> {
    if budget == 0 {
        return Err(Error::InvalidArgument("random search budget must be at least 1".into()).into());
    }
    let mut oracle = Counted::new(oracle);
    let mut rng = search_rng(seed);
    let mut best: Option<(Codebook, f64)> = None;
    let mut accepted = Vec::new();
    for _ in 0..budget {
        let states: Vec<ElementState> = (0..grid.controllable())
            .map(|_| STATES[rng.random_range(0..4)])
            .collect();
        let cb = Codebook::from_states(grid, states)?;
        let (query, rssi) = oracle.probe(&cb)?;
        if best.as_ref().is_none_or(|(_, b)| rssi > *b) {
            accepted.push(Accepted {
                query,
                rssi_dbm: rssi,
            });
            best = Some((cb, rssi));
        }
    }
    let (final_codebook, final_rssi_dbm) = best.expect("budget >= 1");
    Ok(SearchReport {
        algorithm: AlgorithmId::Random,
        final_codebook,
        final_rssi_dbm,
        initial_rssi_dbm: None,
        queries_used: oracle.queries(),
        accepted_trajectory: accepted,
        phi_h: None,
        phi_v: None,
        influential_count: None,
        influential_mask: None,
    })
}

/// Queries all `4^N` configurations in lexicographic order (first element
/// most significant), keeping the first maximum.
pub fn run_exhaustive<O: RssiOracle>(
    oracle: O,
    grid: &Grid,
    limit: u64,
) -> Result<SearchReport, O::Error> {
    let n = grid.controllable();
    let total = match 4u64.checked_pow(n as u32) {
        Some(t) if t <= limit => t,
        _ => return Err(Error::EnumerationLimit { elements: n, limit }.into()),
    };
    let mut oracle = Counted::new(oracle);
    let mut cb = Codebook::all_off(grid);
    let mut best: Option<(Codebook, f64)> = None;
    let mut accepted = Vec::new();
    let mut initial = None;
    for k in 0..total {
        let mut rest = k;
        for e in (0..n).rev() {
            cb.set(e, STATES[(rest % 4) as usize]);
            rest /= 4;
        }
        let (query, rssi) = oracle.probe(&cb)?;
        if k == 0 {
            initial = Some(rssi);
        }
        if best.as_ref().is_none_or(|(_, b)| rssi > *b) {
            accepted.push(Accepted {
                query,
                rssi_dbm: rssi,
            });
            best = Some((cb.clone(), rssi));
        }
    }
    let (final_codebook, final_rssi_dbm) = best.expect("at least one configuration");
    Ok(SearchReport {
        algorithm: AlgorithmId::Exhaustive,
        final_codebook,
        final_rssi_dbm,
        initial_rssi_dbm: initial,
        queries_used: oracle.queries(),
        accepted_trajectory: accepted,
        phi_h: None,
        phi_v: None,
        influential_count: None,
        influential_mask: None,
    })
}
