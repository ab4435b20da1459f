//! Cross-checks of the channel model against straight-line evaluations.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use ris_core::frames::{dbm_to_mw, simulate_frames};
use ris_core::rng::noise_rng;
use ris_core::{
    cascade_gain, exhaustive_optimum, generate_channel, ChannelRealization, ChannelSpec, Codebook,
    ElementState, FrameConfig, Grid, STATES,
};

/// |b + alpha * sum((-1)^h g_h h_h + (-1)^v g_v h_v)|^2, written out longhand.
fn direct_gain(chan: &ChannelRealization, states: &[(u8, u8)]) -> f64 {
    let mut re = chan.background().re;
    let mut im = chan.background().im;
    for (n, &(h, v)) in states.iter().enumerate() {
        let sh = if h == 1 { -1.0 } else { 1.0 };
        let sv = if v == 1 { -1.0 } else { 1.0 };
        let ph = chan.g_h()[n] * chan.h_h()[n];
        let pv = chan.g_v()[n] * chan.h_v()[n];
        re += chan.alpha() * (sh * ph.re + sv * pv.re);
        im += chan.alpha() * (sh * ph.im + sv * pv.im);
    }
    re * re + im * im
}

fn pairs(cb: &Codebook) -> Vec<(u8, u8)> {
    cb.states().iter().map(|s| (s.h_bit(), s.v_bit())).collect()
}

#[test]
fn seeded_rayleigh_gain_matches_direct_evaluation() {
    let grid = Grid::full(2, 2).unwrap();
    let chan = generate_channel(&ChannelSpec::rayleigh(42), 4).unwrap();
    let mut cb = Codebook::all_off(&grid);
    for (e, s) in [STATES[0], STATES[1], STATES[2], STATES[3]].into_iter().enumerate() {
        cb.set(e, s);
    }
    for candidate in [Codebook::all_off(&grid), cb.clone(), cb.flip_all()] {
        let got = cascade_gain(&chan, &candidate).unwrap().linear;
        let want = direct_gain(&chan, &pairs(&candidate));
        assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{got} vs {want}");
    }
}

#[test]
fn exhaustive_matches_nested_loop_enumeration() {
    let grid = Grid::full(2, 2).unwrap();
    let chan = generate_channel(&ChannelSpec::rayleigh(7), 4).unwrap();
    let mut best = f64::NEG_INFINITY;
    let mut best_states = Vec::new();
    let states = [(0u8, 0u8), (1, 0), (0, 1), (1, 1)];
    for a in states {
        for b in states {
            for c in states {
                for d in states {
                    let g = direct_gain(&chan, &[a, b, c, d]);
                    if g > best {
                        best = g;
                        best_states = vec![a, b, c, d];
                    }
                }
            }
        }
    }
    let (cb, gain) = exhaustive_optimum(&chan, &grid).unwrap();
    assert!((gain.linear - best).abs() <= 1e-12 * best);
    assert_eq!(pairs(&cb), best_states);
}

#[test]
fn exhaustive_is_deterministic_and_sound() {
    let grid = Grid::with_blocked(2, 3, &[(0, 2)]).unwrap();
    for seed in 0..20 {
        let chan = generate_channel(&ChannelSpec::rayleigh(seed), grid.controllable()).unwrap();
        let (cb, gain) = exhaustive_optimum(&chan, &grid).unwrap();
        assert_eq!(exhaustive_optimum(&chan, &grid).unwrap().0, cb);
        // re-scan all 4^5 configurations
        for k in 0..4usize.pow(5) {
            let states: Vec<ElementState> =
                (0..5).map(|e| STATES[(k >> (2 * e)) & 3]).collect();
            let other = Codebook::from_states(&grid, states).unwrap();
            assert!(cascade_gain(&chan, &other).unwrap().linear <= gain.linear);
        }
    }
}

/// Same sample recipe as the simulator, written without helpers.
fn straight_line_frames(chan: &ChannelRealization, cb: &Codebook, fc: &FrameConfig, seed: u64) -> f64 {
    let amp = chan.amplitude(cb).unwrap();
    let tx = 10f64.powf(chan.tx_power_dbm() / 10.0).sqrt();
    let sigma = 10f64.powf(chan.noise_power_dbm() / 10.0).sqrt();
    let mut rng = noise_rng(seed);
    let mut sum_of_means = 0.0;
    for _ in 0..fc.frames {
        let mut acc = 0.0;
        for _ in 0..fc.samples_per_frame {
            let m: u32 = rng.random_range(0..fc.modulation_order);
            let phase = 2.0 * std::f64::consts::PI * m as f64 / fc.modulation_order as f64;
            let x = Complex64::new(phase.cos(), phase.sin());
            let nr: f64 = rng.sample(StandardNormal);
            let ni: f64 = rng.sample(StandardNormal);
            let r = amp * tx * x + Complex64::new(nr, ni) * (sigma / 2f64.sqrt());
            acc += r.re * r.re + r.im * r.im;
        }
        sum_of_means += acc / fc.samples_per_frame as f64;
    }
    10.0 * (sum_of_means / fc.frames as f64).log10()
}

#[test]
fn frame_simulation_matches_straight_line_version() {
    let grid = Grid::full(2, 2).unwrap();
    let chan = generate_channel(&ChannelSpec::rayleigh(5), 4)
        .unwrap()
        .with_powers(-10.0, -25.0)
        .unwrap();
    let fc = FrameConfig { frames: 50, samples_per_frame: 200, modulation_order: 4 };
    let cb = Codebook::all_off(&grid).flip_all();
    let got = simulate_frames(&chan, &cb, &fc, 5).unwrap();
    let want = straight_line_frames(&chan, &cb, &fc, 5);
    assert!((got - want).abs() < 1e-9, "{got} vs {want}");
}

#[test]
fn frame_averaging_shrinks_spread() {
    let grid = Grid::full(2, 2).unwrap();
    // moderate SNR so per-frame fluctuations are small in dB
    let chan = generate_channel(&ChannelSpec::rayleigh(2), 4)
        .unwrap()
        .with_powers(-10.0, -14.0)
        .unwrap();
    let cb = Codebook::all_off(&grid);
    let spread = |frames: u32| {
        let fc = FrameConfig { frames, samples_per_frame: 100, modulation_order: 4 };
        let xs: Vec<f64> = (0..200u64)
            .map(|t| simulate_frames(&chan, &cb, &fc, 1000 + t).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
    };
    let ratio = spread(50) / (spread(1) / 50f64.sqrt());
    assert!((ratio - 1.0).abs() <= 0.3, "ratio {ratio}");
}

#[test]
fn power_helpers() {
    assert!((dbm_to_mw(-10.0) - 0.1).abs() < 1e-15);
}

fn arb_channel(n: usize) -> impl Strategy<Value = ChannelRealization> {
    let cplx = || (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b));
    (
        prop::collection::vec(cplx(), n),
        prop::collection::vec(cplx(), n),
        prop::collection::vec(cplx(), n),
        prop::collection::vec(cplx(), n),
    )
        .prop_map(|(a, b, c, d)| ChannelRealization::new(a, b, c, d).unwrap())
}

fn arb_instance() -> impl Strategy<Value = (ChannelRealization, Codebook)> {
    (1usize..4, 1usize..5).prop_flat_map(|(r, c)| {
        let grid = Grid::full(r, c).unwrap();
        (
            arb_channel(r * c),
            prop::collection::vec(0u8..4, r * c).prop_map(move |codes| {
                let states = codes.iter().map(|&k| ElementState::from_code(k).unwrap()).collect();
                Codebook::from_states(&grid, states).unwrap()
            }),
        )
    })
}

proptest! {
    #[test]
    fn global_flip_invariance((chan, cb) in arb_instance()) {
        let a = cascade_gain(&chan, &cb).unwrap().linear;
        let b = cascade_gain(&chan, &cb.flip_all()).unwrap().linear;
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn alpha_scales_quadratically((chan, cb) in arb_instance(), alpha in 0.05f64..1.0) {
        let unit = cascade_gain(&chan, &cb).unwrap().linear;
        let scaled = cascade_gain(&chan.clone().with_alpha(alpha).unwrap(), &cb).unwrap().linear;
        prop_assert!((scaled - alpha * alpha * unit).abs() <= 1e-12 * unit.max(1.0));
    }

    #[test]
    fn gain_agrees_with_longhand((chan, cb) in arb_instance(), bre in -3.0f64..3.0, bim in -3.0f64..3.0) {
        let chan = chan.with_background(Complex64::new(bre, bim)).unwrap();
        let got = cascade_gain(&chan, &cb).unwrap().linear;
        let want = direct_gain(&chan, &pairs(&cb));
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn noiseless_frames_equal_analytic((chan, cb) in arb_instance(), seed in any::<u64>(), m in prop::sample::select(vec![2u32, 4, 8, 16])) {
        let chan = chan.with_powers(-10.0, f64::NEG_INFINITY).unwrap();
        prop_assume!(cascade_gain(&chan, &cb).unwrap().linear > 1e-12);
        let fc = FrameConfig { frames: 2, samples_per_frame: 64, modulation_order: m };
        let sim = simulate_frames(&chan, &cb, &fc, seed).unwrap();
        let exact = cascade_gain(&chan, &cb).unwrap().dbm(-10.0);
        prop_assert!((sim - exact).abs() < 1e-9);
    }
}
