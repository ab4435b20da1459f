use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::channel::{generate_channel, ChannelSpec};
use crate::element::ElementState;
use crate::gain::{cascade_gain, exhaustive_optimum, ChannelRealization};
use crate::oracle::SimulatedOracle;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn rayleigh(grid: &Grid, seed: u64) -> ChannelRealization {
    generate_channel(&ChannelSpec::rayleigh(seed), grid.controllable()).unwrap()
}

// --- straight-line reference transcription -------------------------------
//
// Works on a rows x cols matrix of state codes (None = masked) and only
// converts to a Codebook to ask the channel for RSSI.

type Cells = Vec<Vec<Option<u8>>>;

fn to_codebook(grid: &Grid, cells: &Cells) -> Codebook {
    let mut states = Vec::new();
    for row in cells {
        for cell in row.iter().flatten() {
            states.push(ElementState::from_code(*cell).unwrap());
        }
    }
    Codebook::from_states(grid, states).unwrap()
}

fn off_cells(grid: &Grid) -> Cells {
    (0..grid.rows())
        .map(|r| {
            (0..grid.cols())
                .map(|c| grid.element_at(r, c).map(|_| 0))
                .collect()
        })
        .collect()
}

struct RefRun {
    phi_h: Cells,
    phi_v: Cells,
    phi_ris: Cells,
    p_final: f64,
    queries: u64,
    influential: usize,
}

fn reference_alg1(chan: &ChannelRealization, grid: &Grid) -> RefRun {
    let mut queries = 0u64;
    let mut rssi = |cells: &Cells| {
        queries += 1;
        let g = cascade_gain(chan, &to_codebook(grid, cells)).unwrap();
        g.dbm(chan.tx_power_dbm())
    };
    let (nr, nc) = (grid.rows(), grid.cols());
    let row_has = |r: usize| (0..nc).any(|c| grid.element_at(r, c).is_some());
    let col_has = |c: usize| (0..nr).any(|r| grid.element_at(r, c).is_some());

    let mut phi_h = off_cells(grid);
    let mut temp = off_cells(grid);
    let p0 = rssi(&temp);
    let mut p_max = p0;
    for r in 0..nr {
        if !row_has(r) {
            continue;
        }
        for s in 0..4u8 {
            for c in 0..nc {
                if temp[r][c].is_some() {
                    temp[r][c] = Some(s);
                }
            }
            let p = rssi(&temp);
            if p > p_max {
                phi_h = temp.clone();
                p_max = p;
            }
        }
        temp = phi_h.clone();
    }

    p_max = p0;
    temp = off_cells(grid);
    let mut phi_v = off_cells(grid);
    for c in 0..nc {
        if !col_has(c) {
            continue;
        }
        for s in 0..4u8 {
            for r in 0..nr {
                if temp[r][c].is_some() {
                    temp[r][c] = Some(s);
                }
            }
            let p = rssi(&temp);
            if p > p_max {
                phi_v = temp.clone();
                p_max = p;
            }
        }
        temp = phi_v.clone();
    }

    let mut phi_ris = off_cells(grid);
    let mut is_influential = vec![vec![false; nc]; nr];
    let mut influential = 0;
    for r in 0..nr {
        for c in 0..nc {
            if let (Some(a), Some(b)) = (phi_h[r][c], phi_v[r][c]) {
                if a == b {
                    phi_ris[r][c] = Some(a);
                    is_influential[r][c] = true;
                    influential += 1;
                }
            }
        }
    }

    p_max = rssi(&phi_ris);
    temp = phi_ris.clone();
    for r in 0..nr {
        for c in 0..nc {
            if temp[r][c].is_none() || is_influential[r][c] {
                continue;
            }
            for s in 0..4u8 {
                temp[r][c] = Some(s);
                let p = rssi(&temp);
                if p > p_max {
                    phi_ris = temp.clone();
                    p_max = p;
                }
            }
            temp = phi_ris.clone();
        }
    }
    RefRun {
        phi_h,
        phi_v,
        phi_ris,
        p_final: p_max,
        queries,
        influential,
    }
}

fn reference_bench1(chan: &ChannelRealization, grid: &Grid) -> (Cells, u64) {
    let mut queries = 0u64;
    let mut rssi = |cells: &Cells| {
        queries += 1;
        cascade_gain(chan, &to_codebook(grid, cells)).unwrap().linear
    };
    let mut best = off_cells(grid);
    let mut p_max = rssi(&best);
    let mut temp = best.clone();
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            if temp[r][c].is_none() {
                continue;
            }
            for s in 0..4u8 {
                temp[r][c] = Some(s);
                let p = rssi(&temp);
                if p > p_max {
                    best = temp.clone();
                    p_max = p;
                }
            }
            temp = best.clone();
        }
    }
    (best, queries)
}

fn reference_bench2(chan: &ChannelRealization, grid: &Grid) -> Cells {
    let rssi = |cells: &Cells| cascade_gain(chan, &to_codebook(grid, cells)).unwrap().linear;
    let mut best = off_cells(grid);
    let mut p_max = rssi(&best);
    let mut temp = best.clone();
    for r in 0..grid.rows() {
        for s in 0..4u8 {
            for c in 0..grid.cols() {
                if temp[r][c].is_some() {
                    temp[r][c] = Some(s);
                }
            }
            let p = rssi(&temp);
            if p > p_max {
                best = temp.clone();
                p_max = p;
            }
        }
        temp = best.clone();
    }
    for c in 0..grid.cols() {
        for s in 0..4u8 {
            for r in 0..grid.rows() {
                if temp[r][c].is_some() {
                    temp[r][c] = Some(s);
                }
            }
            let p = rssi(&temp);
            if p > p_max {
                best = temp.clone();
                p_max = p;
            }
        }
        temp = best.clone();
    }
    best
}

// --- hand-built instances -------------------------------------------------

fn single(h: f64, v: f64) -> (Grid, ChannelRealization) {
    let grid = Grid::full(1, 1).unwrap();
    (grid, ChannelRealization::from_products(&[c(h)], &[c(v)]).unwrap())
}

#[test]
fn horizontal_keeps_all_off_when_already_maximal() {
    let (grid, chan) = single(1.0, 1.0);
    let mut o = Counted::new(SimulatedOracle::exact(chan));
    let pass = horizontal_search(&mut o, &grid).unwrap();
    assert_eq!(pass.phi_h, Codebook::all_off(&grid));
    assert_eq!(o.queries(), 5);
    assert_eq!(pass.p_max, pass.p0);
}

#[test]
fn horizontal_inverted_element_needs_a_reference_phase() {
    // without background the sign of the sum is invisible: all-off is already optimal
    let (grid, chan) = single(-1.0, -1.0);
    let mut o = Counted::new(SimulatedOracle::exact(chan.clone()));
    let pass = horizontal_search(&mut o, &grid).unwrap();
    assert_eq!(pass.phi_h, Codebook::all_off(&grid));

    // a background path cancelling the all-off sum makes (1,1) the fix
    let chan = chan.with_background(c(2.0)).unwrap();
    let mut o = Counted::new(SimulatedOracle::exact(chan));
    let pass = horizontal_search(&mut o, &grid).unwrap();
    assert_eq!(pass.p0, f64::NEG_INFINITY);
    assert_eq!(pass.phi_h.state(0), STATES[3]);
    assert!((10f64.powf((pass.p_max + 10.0) / 10.0) - 16.0).abs() < 1e-12);
    assert_eq!(pass.accepted.len(), 3);
}

#[test]
fn horizontal_on_null_initial_power_commits_first_gain() {
    // (1,0) and (0,1) both give 4 from 0; the first one tried wins
    let (grid, chan) = single(1.0, -1.0);
    let mut o = Counted::new(SimulatedOracle::exact(chan));
    let pass = horizontal_search(&mut o, &grid).unwrap();
    assert_eq!(pass.p0, f64::NEG_INFINITY);
    assert_eq!(pass.phi_h.state(0), STATES[1]);
}

#[test]
fn vertical_mirrors_horizontal_on_single_cell() {
    for (h, v) in [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 0.0), (0.3, -0.7)] {
        let (grid, chan) = single(h, v);
        let mut o = Counted::new(SimulatedOracle::exact(chan));
        let hp = horizontal_search(&mut o, &grid).unwrap();
        let vp = vertical_search(&mut o, &grid, hp.p0).unwrap();
        assert_eq!(hp.phi_h, vp.codebook);
        assert_eq!(hp.p_max, vp.p_max);
        assert_eq!(o.queries(), 9);
    }
}

#[test]
fn vertical_on_null_channel_stays_off() {
    let grid = Grid::full(2, 3).unwrap();
    let chan = ChannelRealization::from_products(&[c(0.0); 6], &[c(0.0); 6]).unwrap();
    let mut o = Counted::new(SimulatedOracle::exact(chan));
    let hp = horizontal_search(&mut o, &grid).unwrap();
    let vp = vertical_search(&mut o, &grid, hp.p0).unwrap();
    assert_eq!(vp.codebook, Codebook::all_off(&grid));
    assert!(vp.accepted.is_empty());
    assert_eq!(o.queries(), 1 + 4 * 2 + 4 * 3);
}

#[test]
fn merge_identical_and_disjoint() {
    let grid = Grid::with_blocked(2, 3, &[(1, 2)]).unwrap();
    let mut a = Codebook::all_off(&grid);
    a.set(1, STATES[2]);
    a.set(3, STATES[1]);
    let m = influential_merge(&a, &a).unwrap();
    assert_eq!(m.count, grid.controllable());
    assert_eq!(m.partial, a);
    assert_eq!(m.mask, vec![true, true, true, true, true, false]);

    let off = Codebook::all_off(&grid);
    let m = influential_merge(&off, &off.flip_all()).unwrap();
    assert_eq!(m.count, 0);
    assert_eq!(m.partial, off);
    assert!(m.mask.iter().all(|&x| !x));
}

#[test]
fn merge_hand_table() {
    // rows: row 0 off, row 1 (1,0); columns: both (1,0)
    //          col0    col1
    // row0 h  (0,0)   (0,0)    v (1,0) (1,0)  -> differ, differ
    // row1 h  (1,0)   (1,0)    v (1,0) (1,0)  -> match, match
    let grid = Grid::full(2, 2).unwrap();
    let phi_h = Codebook::from_states(&grid, vec![STATES[0], STATES[0], STATES[1], STATES[1]]).unwrap();
    let phi_v = Codebook::from_states(&grid, vec![STATES[1]; 4]).unwrap();
    let m = influential_merge(&phi_h, &phi_v).unwrap();
    assert_eq!(m.mask, vec![false, false, true, true]);
    assert_eq!(m.count, 2);
    assert_eq!(
        m.partial,
        Codebook::from_states(&grid, vec![STATES[0], STATES[0], STATES[1], STATES[1]]).unwrap()
    );
}

#[test]
fn merge_needs_both_bits_to_agree() {
    let grid = Grid::full(1, 2).unwrap();
    let phi_h = Codebook::from_states(&grid, vec![STATES[1], STATES[3]]).unwrap();
    let phi_v = Codebook::from_states(&grid, vec![STATES[3], STATES[3]]).unwrap();
    let m = influential_merge(&phi_h, &phi_v).unwrap();
    assert_eq!(m.mask, vec![false, true]);
}

#[test]
fn merge_rejects_different_grids() {
    let a = Codebook::all_off(&Grid::full(2, 2).unwrap());
    let b = Codebook::all_off(&Grid::full(1, 4).unwrap());
    assert!(influential_merge(&a, &b).is_err());
}

#[test]
fn refine_with_everything_influential_is_one_query() {
    let grid = Grid::full(2, 2).unwrap();
    let chan = rayleigh(&grid, 8);
    let mut partial = Codebook::all_off(&grid);
    partial.set(2, STATES[3]);
    let mut o = Counted::new(SimulatedOracle::exact(chan));
    let pass = refine_remaining(&mut o, &partial, &[true; 4]).unwrap();
    assert_eq!(pass.codebook, partial);
    assert_eq!(o.queries(), 1);
}

#[test]
fn refine_single_cell_equals_benchmark1_step() {
    for (h, v) in [(-1.0, 0.0), (0.4, -0.9), (1.0, 1.0)] {
        let (grid, chan) = single(h, v);
        let mut o = Counted::new(SimulatedOracle::exact(chan.clone()));
        let pass = refine_remaining(&mut o, &Codebook::all_off(&grid), &[false]).unwrap();
        let b1 = run_benchmark1(SimulatedOracle::exact(chan), &grid).unwrap();
        assert_eq!(pass.codebook, b1.final_codebook);
        assert_eq!(pass.p_max, b1.final_rssi_dbm);
        assert_eq!(o.queries(), b1.queries_used);
    }
}

#[test]
fn refine_rejects_mask_of_wrong_size() {
    let grid = Grid::full(2, 2).unwrap();
    let mut o = Counted::new(SimulatedOracle::exact(rayleigh(&grid, 1)));
    assert!(refine_remaining(&mut o, &Codebook::all_off(&grid), &[false; 3]).is_err());
    assert_eq!(o.queries(), 0);
}

#[test]
fn benchmark1_single_element() {
    // |-1|^2 = 1 already at all-off; (1,0) only ties, so nothing is committed
    let (grid, chan) = single(-1.0, 0.0);
    let report = run_benchmark1(SimulatedOracle::exact(chan.clone()), &grid).unwrap();
    assert_eq!(report.final_codebook.state(0), STATES[0]);
    assert_eq!(cascade_gain(&chan, &report.final_codebook).unwrap().linear, 1.0);
    assert_eq!(report.queries_used, 5);

    // with a half-strength opposing background, flipping h is a strict gain
    let chan = chan.with_background(c(0.5)).unwrap();
    let report = run_benchmark1(SimulatedOracle::exact(chan.clone()), &grid).unwrap();
    assert_eq!(report.final_codebook.state(0), STATES[1]);
    assert_eq!(cascade_gain(&chan, &report.final_codebook).unwrap().linear, 2.25);
}

#[test]
fn benchmark2_column_pass_idle_when_rows_already_optimal() {
    // both elements prefer (1,0), so the row pass already lands on the optimum
    let grid = Grid::full(1, 2).unwrap();
    let chan = ChannelRealization::from_products(&[c(-1.0), c(-0.5)], &[c(0.2), c(0.1)]).unwrap();
    let (opt, opt_gain) = exhaustive_optimum(&chan, &grid).unwrap();
    let report = run_benchmark2(SimulatedOracle::exact(chan.clone()), &grid, Bench2Variant::CarryMax).unwrap();
    let phi_h = report.phi_h.clone().unwrap();
    assert_eq!(cascade_gain(&chan, &phi_h).unwrap(), opt_gain);
    assert_eq!(phi_h, opt);
    // only the all-off measurement and the row commit are accepted
    let row_queries = 1 + 4;
    assert!(report.accepted_trajectory.iter().all(|a| a.query <= row_queries));
    assert_eq!(report.final_codebook, phi_h);
    assert_eq!(report.queries_used, 1 + 4 + 8);
}

#[test]
fn alg1_single_cell_counts() {
    for (h, v) in [(1.0, 1.0), (-1.0, 0.0), (0.5, -0.2)] {
        let (grid, chan) = single(h, v);
        let mut oracle = SimulatedOracle::exact(chan);
        let report = run_alg1(&mut oracle, &grid).unwrap();
        let i = report.influential_count.unwrap();
        assert!(i <= 1);
        assert_eq!(report.queries_used, 2 + 4 + 4 + 4 * (1 - i as u64));
        assert_eq!(oracle.query_count(), report.queries_used);
    }
}

#[test]
fn paper_scale_formulas() {
    assert_eq!(predicted_queries(AlgorithmId::Bench1, 8, 10, 76, None).unwrap(), 305);
    assert_eq!(predicted_queries(AlgorithmId::Bench2, 8, 10, 76, None).unwrap(), 73);
    assert_eq!(predicted_queries(AlgorithmId::Alg1, 8, 10, 76, Some(76)).unwrap(), 74);
    assert_eq!(predicted_queries(AlgorithmId::Alg1, 8, 10, 76, Some(40)).unwrap(), 218);
    assert_eq!(predicted_queries(AlgorithmId::Exhaustive, 2, 2, 4, None).unwrap(), 256);
    assert!(predicted_queries(AlgorithmId::Alg1, 8, 10, 76, None).is_err());
    assert!(predicted_queries(AlgorithmId::Alg1, 8, 10, 76, Some(77)).is_err());
    assert!(predicted_queries(AlgorithmId::Random, 8, 10, 76, None).is_err());
    assert!(matches!("alg2".parse::<AlgorithmId>(), Err(Error::UnknownAlgorithm(_))));
    for a in AlgorithmId::ALL {
        assert_eq!(a.as_str().parse::<AlgorithmId>().unwrap(), a);
    }
}

#[test]
fn crossover_threshold_matches_formula() {
    // alg1 < bench1  <=>  I >= R + C + 1
    for (r, c) in [(1, 1), (2, 2), (4, 4), (8, 10), (3, 7)] {
        let n = r * c;
        for i in 0..=n {
            let a = predicted_queries(AlgorithmId::Alg1, r, c, n, Some(i)).unwrap();
            let b = predicted_queries(AlgorithmId::Bench1, r, c, n, None).unwrap();
            assert_eq!(a < b, i > r + c, "r={r} c={c} i={i}");
        }
    }
}

#[test]
fn random_search_contract() {
    let grid = Grid::full(1, 2).unwrap();
    let chan = rayleigh(&grid, 2);
    let one = run_random(SimulatedOracle::exact(chan.clone()), &grid, 1, 5).unwrap();
    assert_eq!(one.queries_used, 1);
    assert_eq!(one.accepted_trajectory.len(), 1);
    let a = run_random(SimulatedOracle::exact(chan.clone()), &grid, 16, 5).unwrap();
    let b = run_random(SimulatedOracle::exact(chan.clone()), &grid, 16, 5).unwrap();
    assert_eq!(a, b);
    assert!(run_random(SimulatedOracle::exact(chan), &grid, 0, 5).is_err());
}

#[test]
fn exhaustive_search_agrees_with_closed_form_optimum() {
    let grid = Grid::full(2, 2).unwrap();
    let chan = rayleigh(&grid, 7);
    let mut oracle = SimulatedOracle::exact(chan.clone());
    let report = run_exhaustive(&mut oracle, &grid, 1 << 20).unwrap();
    let (cb, _) = exhaustive_optimum(&chan, &grid).unwrap();
    assert_eq!(report.final_codebook, cb);
    assert_eq!(report.queries_used, 256);
    assert_eq!(oracle.query_count(), 256);
    assert!(run_exhaustive(SimulatedOracle::exact(chan), &grid, 255).is_err());
}

// --- seeded instances against the transcription ---------------------------

fn cells_of(cb: &Codebook) -> Cells {
    let g = cb.grid();
    (0..g.rows())
        .map(|r| (0..g.cols()).map(|c| cb.cell(r, c).map(|s| s.code())).collect())
        .collect()
}

#[test]
fn alg1_matches_transcription_seed11() {
    let grid = Grid::full(4, 4).unwrap();
    let chan = rayleigh(&grid, 11);
    let reference = reference_alg1(&chan, &grid);
    let mut o = Counted::new(SimulatedOracle::exact(chan.clone()));
    let hp = horizontal_search(&mut o, &grid).unwrap();
    assert_eq!(cells_of(&hp.phi_h), reference.phi_h);
    let vp = vertical_search(&mut o, &grid, hp.p0).unwrap();
    assert_eq!(cells_of(&vp.codebook), reference.phi_v);
    let merged = influential_merge(&hp.phi_h, &vp.codebook).unwrap();
    assert_eq!(merged.count, reference.influential);
    let refined = refine_remaining(&mut o, &merged.partial, &merged.mask).unwrap();
    assert_eq!(cells_of(&refined.codebook), reference.phi_ris);
    assert_eq!(refined.p_max, reference.p_final);
    assert_eq!(o.queries(), reference.queries);

    let report = run_alg1(SimulatedOracle::exact(chan.clone()), &grid).unwrap();
    assert_eq!(cells_of(&report.final_codebook), reference.phi_ris);
    let off = SimulatedOracle::exact(chan).measure(&Codebook::all_off(&grid)).unwrap();
    assert!(report.final_rssi_dbm >= off);
}

#[test]
fn alg1_matches_transcription_on_masked_grids() {
    let grid = Grid::with_blocked(8, 10, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
    assert_eq!(grid.controllable(), 76);
    for seed in 0..5 {
        let chan = rayleigh(&grid, seed);
        let reference = reference_alg1(&chan, &grid);
        let report = run_alg1(SimulatedOracle::exact(chan), &grid).unwrap();
        assert_eq!(cells_of(&report.final_codebook), reference.phi_ris);
        assert_eq!(report.queries_used, reference.queries);
    }
}

#[test]
fn benchmark1_matches_transcription_seed3() {
    let grid = Grid::full(2, 2).unwrap();
    let chan = rayleigh(&grid, 3);
    let (cells, queries) = reference_bench1(&chan, &grid);
    let report = run_benchmark1(SimulatedOracle::exact(chan), &grid).unwrap();
    assert_eq!(cells_of(&report.final_codebook), cells);
    assert_eq!(report.queries_used, queries);
}

#[test]
fn benchmark2_matches_transcription_seed11() {
    let grid = Grid::full(4, 4).unwrap();
    let chan = rayleigh(&grid, 11);
    let report = run_benchmark2(SimulatedOracle::exact(chan.clone()), &grid, Bench2Variant::CarryMax).unwrap();
    assert_eq!(cells_of(&report.final_codebook), reference_bench2(&chan, &grid));
    assert_eq!(report.queries_used, 1 + 16 + 16);
}

#[test]
fn benchmark2_reset_variant_counts_the_same() {
    let grid = Grid::full(3, 5).unwrap();
    for seed in 0..10 {
        let chan = rayleigh(&grid, seed);
        let report = run_benchmark2(SimulatedOracle::exact(chan.clone()), &grid, Bench2Variant::ResetMax).unwrap();
        assert_eq!(report.queries_used, 1 + 12 + 20);
        let measured = SimulatedOracle::exact(chan).measure(&report.final_codebook).unwrap();
        assert_eq!(measured, report.final_rssi_dbm);
    }
}

#[test]
fn report_serializes_to_json() {
    let grid = Grid::full(2, 2).unwrap();
    let report = run_alg1(SimulatedOracle::exact(rayleigh(&grid, 1)), &grid).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["algorithm"], "alg1");
    assert_eq!(json["queries_used"], report.queries_used);
    assert!(json["final_codebook"].as_str().unwrap().starts_with("RISCB v1 rows=2 cols=2\n"));
}

// --- properties ------------------------------------------------------------

fn arb_grid() -> impl Strategy<Value = Grid> {
    (1usize..5, 1usize..5)
        .prop_flat_map(|(r, c)| (Just((r, c)), prop::collection::vec(prop::bool::weighted(0.85), r * c)))
        .prop_filter_map("need a controllable cell", |((r, c), mask)| {
            let g = Grid::new(r, c, mask).ok()?;
            (g.controllable() > 0).then_some(g)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn query_counts_match_formulas(grid in arb_grid(), seed in any::<u64>()) {
        let chan = rayleigh(&grid, seed);
        for alg in [AlgorithmId::Alg1, AlgorithmId::Bench1, AlgorithmId::Bench2] {
            let mut oracle = SimulatedOracle::exact(chan.clone());
            let report = run_algorithm(&mut oracle, &grid, alg, &SearchOptions::default()).unwrap();
            let predicted = predicted_queries_for_grid(alg, &grid, report.influential_count).unwrap();
            prop_assert_eq!(oracle.query_count(), predicted);
            prop_assert_eq!(report.queries_used, predicted);
        }
    }

    #[test]
    fn noiseless_trajectories_increase(grid in arb_grid(), seed in any::<u64>()) {
        let chan = rayleigh(&grid, seed);
        let off = SimulatedOracle::exact(chan.clone()).measure(&Codebook::all_off(&grid)).unwrap();
        for alg in [AlgorithmId::Alg1, AlgorithmId::Bench1, AlgorithmId::Bench2, AlgorithmId::Random] {
            let report = run_algorithm(SimulatedOracle::exact(chan.clone()), &grid, alg, &SearchOptions::default()).unwrap();
            for w in report.accepted_trajectory.windows(2) {
                prop_assert!(w[1].rssi_dbm > w[0].rssi_dbm);
                prop_assert!(w[1].query > w[0].query);
            }
            if alg != AlgorithmId::Random {
                prop_assert!(report.final_rssi_dbm >= off);
            }
            let last = report.accepted_trajectory.last().unwrap();
            prop_assert_eq!(last.rssi_dbm, report.final_rssi_dbm);
        }
    }

    #[test]
    fn alg1_preserves_influential_cells(grid in arb_grid(), seed in any::<u64>()) {
        let report = run_alg1(SimulatedOracle::exact(rayleigh(&grid, seed)), &grid).unwrap();
        let phi_h = report.phi_h.as_ref().unwrap();
        let mask = report.influential_mask.as_ref().unwrap();
        prop_assert_eq!(mask.iter().filter(|&&m| m).count(), report.influential_count.unwrap());
        for e in 0..grid.controllable() {
            let (r, c) = grid.position(e);
            if mask[r * grid.cols() + c] {
                prop_assert_eq!(report.final_codebook.state(e), phi_h.state(e));
                prop_assert_eq!(phi_h.state(e), report.phi_v.as_ref().unwrap().state(e));
            }
        }
    }

    #[test]
    fn searches_never_beat_exhaustive(grid in arb_grid(), seed in any::<u64>()) {
        prop_assume!(grid.controllable() <= 6);
        let chan = rayleigh(&grid, seed);
        let (_, best) = exhaustive_optimum(&chan, &grid).unwrap();
        for alg in [AlgorithmId::Alg1, AlgorithmId::Bench1, AlgorithmId::Bench2, AlgorithmId::Random] {
            let report = run_algorithm(SimulatedOracle::exact(chan.clone()), &grid, alg, &SearchOptions::default()).unwrap();
            let g = cascade_gain(&chan, &report.final_codebook).unwrap().linear;
            prop_assert!(g <= best.linear * (1.0 + 1e-9));
        }
    }

    #[test]
    fn reports_are_deterministic(grid in arb_grid(), seed in any::<u64>()) {
        let chan = rayleigh(&grid, seed);
        for alg in [AlgorithmId::Alg1, AlgorithmId::Bench1, AlgorithmId::Bench2, AlgorithmId::Random] {
            let opts = SearchOptions { random_seed: seed, ..Default::default() };
            let a = run_algorithm(SimulatedOracle::exact(chan.clone()), &grid, alg, &opts).unwrap();
            let b = run_algorithm(SimulatedOracle::exact(chan.clone()), &grid, alg, &opts).unwrap();
            prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
            prop_assert_eq!(a, b);
        }
    }
}
