use gedanken_core::eraser::*;
use proptest::prelude::*;

const N: usize = 1_000_000;

fn erased(timing: EraseTiming) -> EraserConfig {
    EraserConfig::erased(timing)
}

#[test]
fn sampled_visibilities() {
    let sigma = EraserConfig::default().sigma;
    let unmarked = screen_distribution(&EraserConfig::unmarked(), 1, N).unwrap();
    assert!(unmarked.visibility(Series::Screen, sigma).unwrap() >= 0.95);
    let marked = screen_distribution(&EraserConfig::marked(), 2, N).unwrap();
    assert!(marked.visibility(Series::Screen, sigma).unwrap() <= 0.05);
    let e = erase_and_condition(&EraserConfig::marked(), 3, N).unwrap();
    assert!(e.visibility(Series::Plus, sigma).unwrap() >= 0.95);
    assert!(e.visibility(Series::Minus, sigma).unwrap() >= 0.95);
    assert!(e.visibility(Series::Screen, sigma).unwrap() <= 0.05);
}

#[test]
fn fringes_and_anti_fringes_are_shifted() {
    let h = analytic_histogram(&erased(EraseTiming::BeforeScreen)).unwrap();
    let centers = &h.bin_centers;
    let at = |x: f64| centers.iter().position(|c| (c - x).abs() < 1e-9).unwrap();
    let (plus, minus) = (h.p_plus.as_ref().unwrap(), h.p_minus.as_ref().unwrap());
    assert!(plus[at(0.0)] > 0.0 && minus[at(0.0)] < 1e-15);
    assert!(minus[at(0.25)] > 0.0 && plus[at(0.25)] < 1e-15);
}

#[test]
fn complementarity_on_the_analytic_grid() {
    let h = analytic_histogram(&erased(EraseTiming::AfterScreen)).unwrap();
    let [pp, pm] = h.marker_probabilities.unwrap();
    for i in 0..h.p.len() {
        let recombined = pp * h.p_plus.as_ref().unwrap()[i] + pm * h.p_minus.as_ref().unwrap()[i];
        assert!((recombined - h.envelope[i]).abs() < 1e-12);
        assert!((h.p[i] - h.envelope[i]).abs() < 1e-12);
    }
    // the grid sum of G²cos(k x) is not exactly zero
    assert!((pp - 0.5).abs() < 1e-6, "{pp}");
}

#[test]
fn sampled_marginal_is_the_mixture() {
    let h = erase_and_condition(&EraserConfig::marked(), 8, N).unwrap();
    let (plus, minus) = (h.counts_plus.as_ref().unwrap(), h.counts_minus.as_ref().unwrap());
    let exact = analytic_histogram(&EraserConfig::marked()).unwrap();
    for i in 0..h.p.len() {
        let n = (plus[i] + minus[i]) as f64 / N as f64;
        assert_eq!(n, h.p[i]);
        // bin-integrated and point envelopes agree to far better than the sampling error here
        let p = exact.p[i];
        let sd = (p * (1.0 - p) / N as f64).sqrt();
        assert!((h.p[i] - p).abs() <= 3.0 * sd + 2e-4, "bin {i}");
    }
}

#[test]
fn marker_marginal_is_timing_independent() {
    let a = joint_law(&erased(EraseTiming::BeforeScreen), EraseTiming::BeforeScreen, false).unwrap();
    let b = joint_law(&erased(EraseTiming::BeforeScreen), EraseTiming::AfterScreen, false).unwrap();
    assert!(a.max_abs_diff(&b) <= 1e-12);
    let unmarked = analytic_histogram(&EraserConfig::marked()).unwrap().p;
    for (x, y) in a.screen_marginal().iter().zip(&unmarked) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn paired_seed_histograms_match() {
    for seed in [4, 5, 6] {
        let a = screen_distribution(&erased(EraseTiming::BeforeScreen), seed, 200_000).unwrap();
        let b = screen_distribution(&erased(EraseTiming::AfterScreen), seed, 200_000).unwrap();
        assert_eq!(a, b);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
    }
}

#[test]
fn choices_do_not_move_the_screen() {
    let choices: Vec<bool> = (0..400_000u64).map(|i| (i * 7919) % 3 == 0).collect();
    let run = sample_with_choices(&EraserConfig::marked(), 12, &choices).unwrap();
    assert!(run.n_erased > 0 && run.n_kept > 0);
    assert!(run.max_marginal_z < 4.5, "{}", run.max_marginal_z);
    assert!(run.erased.visibility(Series::Plus, 1.0).unwrap() >= 0.9);
}

#[test]
fn which_way_readout_is_flat() {
    let cfg = EraserConfig { erase_basis: MarkerBasis::WhichWay, ..EraserConfig::marked() };
    let h = erase_and_condition(&cfg, 9, N).unwrap();
    assert!(h.visibility(Series::Plus, 1.0).unwrap() <= 0.05);
    assert!(h.visibility(Series::Minus, 1.0).unwrap() <= 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn histograms_are_normalized(d in 1.0..8.0f64, sigma in 0.3..2.0f64, bins in 16usize..300, mark in any::<bool>(), gamma in 0.0..=1.0f64) {
        let cfg = EraserConfig { slit_separation: d, sigma, bins, mark, erase: mark, marker_overlap: gamma, ..Default::default() };
        let h = analytic_histogram(&cfg).unwrap();
        prop_assert!((h.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(h.p.iter().all(|&p| p >= 0.0));
        if let Some(plus) = &h.p_plus {
            prop_assert!((plus.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn timings_share_one_joint_law(d in 1.0..8.0f64, sigma in 0.3..2.0f64, gamma in 0.0..=1.0f64) {
        let cfg = EraserConfig { slit_separation: d, sigma, marker_overlap: gamma, ..erased(EraseTiming::BeforeScreen) };
        let a = joint_law(&cfg, EraseTiming::BeforeScreen, false).unwrap();
        let b = joint_law(&cfg, EraseTiming::AfterScreen, false).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12);
    }

    #[test]
    fn partial_marking_visibility_tracks_overlap(gamma in 0.0..=1.0f64) {
        let cfg = EraserConfig { marker_overlap: gamma, ..EraserConfig::marked() };
        let v = analytic_histogram(&cfg).unwrap().visibility(Series::Screen, cfg.sigma).unwrap();
        prop_assert!((v - gamma).abs() < 1e-9);
    }
}
