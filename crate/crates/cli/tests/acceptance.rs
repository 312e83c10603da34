//! Acceptance criteria, one line per criterion.

use std::f64::consts::TAU;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gedanken_core::bellstates::{correlation_closed, correlation_numeric, BellKind, MeasurementDirection};
use gedanken_core::eraser::{
    analytic_histogram, erase_and_condition, joint_law, ordering_invariance_check, screen_distribution, EraseTiming,
    EraserConfig, Series,
};
use gedanken_core::ensembles::{figure7_ensemble, partition_by_alice, run_trials, Source};
use gedanken_core::inequalities::{
    evaluate_deterministic, mu_sweep, rho_mu, search_settings, DeterministicAssignment, Objective, SearchConfig,
    SettingsSix, TSIRELSON_CHSH_LHS,
};
use gedanken_core::qstate::{Direction, Plane};
use gedanken_core::rng::{range_rng, uniform};
use gedanken_core::wigner::{
    build_initial, contradiction_demo, ok_fail_expansion, relative_state_probability, standard_probability, Event,
    Formalism, MeasurementChoice,
};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T>(r: gedanken_core::Result<T>) -> Result<T, String> {
    r.map_err(|err| err.to_string())
}

fn ev(s: &str) -> Event {
    s.parse().expect("event literal")
}

fn seq(items: &[&str]) -> Vec<MeasurementChoice> {
    items.iter().map(|s| s.parse().expect("choice literal")).collect()
}

fn random_direction(draw: &mut impl FnMut() -> f64) -> Direction {
    let z = 2.0 * draw() - 1.0;
    let phi = TAU * draw();
    let r = (1.0 - z * z).max(0.0).sqrt();
    Direction::new([r * phi.cos(), r * phi.sin(), z]).expect("unit vector")
}

fn bell_correlations() -> Outcome {
    let mut rng = range_rng(2024, 0);
    let mut draw = || uniform(&mut rng);
    for kind in BellKind::ALL {
        for i in 0..1000 {
            let dirs = MeasurementDirection::new(random_direction(&mut draw), random_direction(&mut draw), None).unwrap();
            let closed = correlation_closed(kind, &dirs);
            let numeric = correlation_numeric(kind, &dirs).map_err(|e| e.to_string())?;
            ensure((closed - numeric).abs() <= 1e-12, || format!("{kind} pair {i}: {numeric} vs {closed}"))?;
        }
    }
    for plane in [Plane::Xz, Plane::Yz, Plane::Xy] {
        for theta in [0.0f64, 30.0, 60.0, 90.0, 180.0] {
            let dirs = MeasurementDirection::in_plane(plane, 0.3, 0.3 + theta.to_radians());
            let closed = correlation_closed(BellKind::PsiMinus, &dirs);
            let numeric = correlation_numeric(BellKind::PsiMinus, &dirs).map_err(|e| e.to_string())?;
            let want = -theta.to_radians().cos();
            ensure((closed - want).abs() <= 1e-12 && (numeric - want).abs() <= 1e-12, || {
                format!("{plane} theta {theta}: {closed}, {numeric} vs {want}")
            })?;
        }
    }
    Ok(())
}

fn average_conservation() -> Outcome {
    let (ensemble, report) = figure7_ensemble();
    ensure(report.avg_given_plus == Some(0.5), || format!("figure 7 average {:?}", report.avg_given_plus))?;
    let conservation = gedanken_core::ensembles::conservation_check(&ensemble, 1e-12).map_err(|e| e.to_string())?;
    ensure(ensemble.len() == 8 && conservation.fails_every_trial(), || "figure 7 conserves on some trial".into())?;

    let n = 100_000;
    let tol = 4.0 / (n as f64).sqrt();
    for seed in [7, 11, 2024] {
        let e = run_trials(Source::Bell(BellKind::PsiMinus), 0.0, 60f64.to_radians(), Plane::Xz, n, seed)
            .map_err(|e| e.to_string())?;
        let r = partition_by_alice(&e).map_err(|e| e.to_string())?;
        let (plus, minus) = (r.avg_given_plus.unwrap_or(f64::NAN), r.avg_given_minus.unwrap_or(f64::NAN));
        ensure((plus + 0.5).abs() <= tol && (minus - 0.5).abs() <= tol, || {
            format!("seed {seed}: averages {plus}, {minus} outside {tol}")
        })?;
    }
    Ok(())
}

fn inequality_values() -> Outcome {
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for a in DeterministicAssignment::all() {
        let r = evaluate_deterministic(&a);
        ensure(r.chsh_lhs <= 0.0 && r.lf_lhs <= 0.0, || format!("{a:?} violates: {} {}", r.chsh_lhs, r.lf_lhs))?;
        max = (max.0.max(r.chsh_lhs), max.1.max(r.lf_lhs));
    }
    ensure(max == (0.0, 0.0), || format!("deterministic maxima {max:?}"))?;
    let saturating = DeterministicAssignment::new([1, -1, 1, -1, -1, -1]).unwrap();
    let r = evaluate_deterministic(&saturating);
    ensure(r.chsh_lhs == 0.0 && r.lf_lhs == 0.0, || format!("saturating set gives {} {}", r.chsh_lhs, r.lf_lhs))?;

    let singlet = rho_mu(1.0).unwrap();
    let cfg = SearchConfig::default();
    let best = search_settings(&singlet, Plane::Xy, Objective::MaxChsh, &cfg).map_err(|e| e.to_string())?;
    ensure((best.report.chsh_lhs - TSIRELSON_CHSH_LHS).abs() <= 1e-6, || format!("max CHSH {}", best.report.chsh_lhs))?;
    let joint = search_settings(&singlet, Plane::Xy, Objective::JointTarget { chsh: 0.5, lf: 0.5 }, &cfg)
        .map_err(|e| e.to_string())?;
    let (c, l) = (joint.report.chsh_lhs, joint.report.lf_lhs);
    ensure((c - 0.5).abs() <= 0.01 && (l - 0.5).abs() <= 0.01, || format!("joint search gives {c}, {l}"))?;

    let mus: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    for settings in [SettingsSix::chsh_optimal(), joint.settings] {
        let sweep = mu_sweep(&settings, &mus).map_err(|e| e.to_string())?;
        let (zero, one) = (&sweep[0], &sweep[20]);
        for (r, mu) in sweep.iter().zip(&mus) {
            let lin_c = mu * one.chsh_lhs + (1.0 - mu) * zero.chsh_lhs;
            let lin_l = mu * one.lf_lhs + (1.0 - mu) * zero.lf_lhs;
            ensure((r.chsh_lhs - lin_c).abs() <= 1e-10 && (r.lf_lhs - lin_l).abs() <= 1e-10, || format!("sweep not linear at {mu}"))?;
            ensure(r.chsh_lhs <= one.chsh_lhs + 1e-12 && r.lf_lhs <= one.lf_lhs + 1e-12, || format!("sweep exceeds mu = 1 at {mu}"))?;
        }
    }
    Ok(())
}

fn wigner_friend() -> Outcome {
    let cond = [ev("xena:tails")];
    let target = ev("wigner:OK");
    let standard = e(standard_probability(&cond, &target, &[]))?;
    let zeus_x = e(relative_state_probability(&seq(&["zeus:xhat", "wigner:what"]), &cond, &target))?;
    let zeus_z = e(relative_state_probability(&seq(&["zeus:zhat", "wigner:what"]), &cond, &target))?;
    let no_zeus = e(relative_state_probability(&seq(&["wigner:what"]), &cond, &target))?;
    ensure(standard.abs() <= 1e-12, || format!("standard {standard}"))?;
    ensure(zeus_x.abs() <= 1e-12, || format!("Zeus x first {zeus_x}"))?;
    ensure((zeus_z - 1.0 / 6.0).abs() <= 1e-12, || format!("Zeus z first {zeus_z}"))?;
    ensure(no_zeus.abs() <= 1e-12, || format!("no Zeus {no_zeus}"))?;

    let x = ok_fail_expansion(&build_initial());
    let r12 = 1.0 / 12f64.sqrt();
    let want = [(["OK", "OK"], r12), (["OK", "fail"], -r12), (["fail", "OK"], r12), (["fail", "fail"], 3f64.sqrt() / 2.0)];
    for (labels, w) in want {
        let got = x.coefficient(&labels).ok_or_else(|| format!("no component {labels:?}"))?;
        ensure((got.re - w).abs() <= 1e-12 && got.im.abs() <= 1e-12, || format!("{labels:?}: {got} vs {w}"))?;
    }

    let (subjective, _) = contradiction_demo(Formalism::SubjectiveCollapse, 3, 10_000).map_err(|e| e.to_string())?;
    let (standard, _) = contradiction_demo(Formalism::Standard, 3, 10_000).map_err(|e| e.to_string())?;
    ensure(subjective.contradictions >= 1, || "no subjective-collapse contradiction".into())?;
    ensure(standard.contradictions == 0, || format!("{} standard contradictions", standard.contradictions))
}

/// `|χ²/ν − 1| ≤ 3·√(2/ν)` for counts against bin probabilities.
fn chi_square_ok(counts: &[u64], p: &[f64]) -> Result<f64, String> {
    let n: u64 = counts.iter().sum();
    let (mut chi2, mut dof) = (0.0, 0usize);
    for (&c, &q) in counts.iter().zip(p) {
        let expected = q * n as f64;
        if expected >= 5.0 {
            chi2 += (c as f64 - expected).powi(2) / expected;
            dof += 1;
        }
    }
    let dof = dof.saturating_sub(1).max(1) as f64;
    let stat = chi2 / dof;
    if (stat - 1.0).abs() <= 3.0 * (2.0 / dof).sqrt() {
        Ok(stat)
    } else {
        Err(format!("reduced chi-square {stat} over {dof} bins"))
    }
}

fn eraser() -> Outcome {
    let unmarked = e(analytic_histogram(&EraserConfig::unmarked()))?;
    let marked = e(analytic_histogram(&EraserConfig::marked()))?;
    let erased = e(analytic_histogram(&EraserConfig::erased(EraseTiming::BeforeScreen)))?;
    let vis = |h: &gedanken_core::eraser::ScreenHistogram, s| h.visibility(s, 1.0).unwrap_or(f64::NAN);
    let analytic = [
        vis(&unmarked, Series::Screen),
        vis(&marked, Series::Screen),
        vis(&erased, Series::Plus),
        vis(&erased, Series::Minus),
    ];
    for (got, want) in analytic.iter().zip([1.0, 0.0, 1.0, 1.0]) {
        ensure((got - want).abs() <= 1e-9, || format!("analytic visibilities {analytic:?}"))?;
    }

    let n = 1_000_000;
    let s_unmarked = e(screen_distribution(&EraserConfig::unmarked(), 41, n))?;
    let s_marked = e(screen_distribution(&EraserConfig::marked(), 42, n))?;
    let s_before = e(erase_and_condition(&EraserConfig::erased(EraseTiming::BeforeScreen), 43, n))?;
    let s_after = e(erase_and_condition(&EraserConfig::erased(EraseTiming::AfterScreen), 44, n))?;
    let sampled = [
        vis(&s_unmarked, Series::Screen),
        vis(&s_marked, Series::Screen),
        vis(&s_before, Series::Plus),
        vis(&s_before, Series::Minus),
    ];
    for (got, want) in sampled.iter().zip([1.0, 0.0, 1.0, 1.0]) {
        ensure((got - want).abs() <= 0.05, || format!("sampled visibilities {sampled:?}"))?;
    }

    let cfg = EraserConfig::erased(EraseTiming::BeforeScreen);
    let ordering = e(ordering_invariance_check(&cfg, &[1, 2], 10_000))?;
    ensure(ordering.passed, || format!("ordering report {ordering:?}"))?;
    let marginal = e(joint_law(&cfg, EraseTiming::AfterScreen, true))?.screen_marginal();
    for (name, h) in [("marked", &s_marked), ("erase before screen", &s_before), ("erase after screen", &s_after)] {
        let counts = h.counts.as_ref().ok_or("sampled histogram has no counts")?;
        chi_square_ok(counts, &marginal).map_err(|m| format!("{name}: {m}"))?;
    }
    Ok(())
}

fn gedanken(args: &[&str], threads: usize) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gedanken"))
        .args(args)
        .args(["--threads", &threads.to_string()])
        .env_remove("GEDANKEN_OUT_DIR")
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let runs: &[&[&str]] = &[
        &["bell", "--kind", "psi-minus", "--plane", "xz", "--theta", "60"],
        &["ensemble", "--kind", "psi-minus", "--theta", "60", "--n", "100000", "--seed", "7"],
        &["ensemble", "--figure7", "--format", "csv"],
        &["inequality", "--mu", "1", "--search", "joint:0.5,0.5"],
        &["inequality", "--sweep", "10", "--format", "csv"],
        &["wigner", "--contradiction-demo", "10000", "--seed", "3"],
        &["wigner", "--formalism", "relative-state", "--sequence", "zeus:zhat,wigner:what", "--cond", "xena:tails", "--target", "wigner:OK"],
        &["eraser", "--mark", "--erase", "--particles", "200000", "--seed", "5", "--format", "csv"],
        &["eraser", "--no-mark"],
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, args) in runs.iter().enumerate() {
        let first = gedanken(args, 1)?;
        let second = gedanken(args, 1)?;
        let wide = gedanken(args, 4)?;
        ensure(first == second, || format!("{args:?} differs between runs"))?;
        ensure(first == wide, || format!("{args:?} differs between 1 and 4 threads"))?;
        let file = dir.path().join(format!("run{i}.out"));
        std::fs::write(&file, &first).map_err(|e| e.to_string())?;
        gedanken(&["replay", file.to_str().unwrap(), "--check"], 2)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("Bell correlations", bell_correlations, Duration::from_secs(5)),
        ("average-only conservation", average_conservation, Duration::from_secs(10)),
        ("inequality values", inequality_values, Duration::from_secs(60)),
        ("Wigner's friend", wigner_friend, Duration::from_secs(10)),
        ("quantum eraser", eraser, Duration::from_secs(30)),
        ("determinism", determinism, Duration::MAX),
    ];
    let mut failures = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = outcome.and_then(|()| ensure(took <= *budget, || format!("took {took:.2?}, budget {budget:.0?}")));
        match outcome {
            Ok(()) => println!("criterion {}: PASS  {name} ({took:.2?})", i + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {}: FAIL  {name} ({took:.2?}): {msg}", i + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
