use gedanken_core::eraser::{
    analytic_histogram, erase_and_condition, ordering_invariance_check, parse_choices, sample_with_choices,
    screen_distribution, ChoiceRun, EraserConfig, OrderingReport, ScreenHistogram, Series,
};
use serde::Serialize;

use crate::args::EraserArgs;
use crate::output::{check, usage, Check, CliError, Outcome};

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    Analytic,
    Sampled,
    Choices,
}

#[derive(Serialize)]
struct Visibility {
    screen: Option<f64>,
    plus: Option<f64>,
    minus: Option<f64>,
}

#[derive(Serialize)]
struct EraserResult {
    mode: Mode,
    /// Visibilities over bins with `|x| ≤ σ`.
    visibility: Visibility,
    histogram: ScreenHistogram,
    choices: Option<ChoiceSummary>,
    ordering: Option<OrderingReport>,
}

#[derive(Serialize)]
struct ChoiceSummary {
    n_erased: usize,
    n_kept: usize,
    max_marginal_z: f64,
    erased: ScreenHistogram,
    kept: ScreenHistogram,
}

fn config(args: &EraserArgs) -> Result<EraserConfig, CliError> {
    let cfg = EraserConfig {
        slit_separation: args.d,
        sigma: args.sigma,
        x_min: args.x_min,
        x_max: args.x_max,
        bins: args.bins,
        mark: args.mark && !args.no_mark,
        erase: args.erase,
        timing: args.timing,
        erase_basis: args.erase_basis,
        marker_overlap: args.overlap,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// A sampled conditional with no particles stays all zero.
fn normalized(name: &str, p: Option<&[f64]>) -> Option<Check> {
    p.map(|p| {
        let total: f64 = p.iter().sum();
        check(format!("{name} histogram is normalized"), (total - 1.0).abs() <= 1e-9 || total == 0.0)
    })
}

pub fn run(args: &EraserArgs) -> Result<Outcome, CliError> {
    let cfg = config(args)?;
    let (mode, histogram, choices) = if let Some(path) = &args.choices {
        let seed = args.seed.ok_or_else(|| usage("randomized runs need --seed"))?;
        let text = std::fs::read_to_string(path)?;
        let decisions = parse_choices(&text)?;
        if decisions.is_empty() {
            return Err(usage("the choice file is empty"));
        }
        let ChoiceRun { all, erased, kept, n_erased, n_kept, max_marginal_z } = sample_with_choices(&cfg, seed, &decisions)?;
        (Mode::Choices, all, Some(ChoiceSummary { n_erased, n_kept, max_marginal_z, erased, kept }))
    } else if let Some(n) = args.particles {
        let seed = args.seed.ok_or_else(|| usage("randomized runs need --seed"))?;
        let h = if cfg.erase { erase_and_condition(&cfg, seed, n)? } else { screen_distribution(&cfg, seed, n)? };
        (Mode::Sampled, h, None)
    } else {
        (Mode::Analytic, analytic_histogram(&cfg)?, None)
    };

    let half = cfg.sigma;
    let visibility = Visibility {
        screen: histogram.visibility(Series::Screen, half),
        plus: histogram.visibility(Series::Plus, half),
        minus: histogram.visibility(Series::Minus, half),
    };
    let mut checks: Vec<Check> = [
        normalized("screen", Some(&histogram.p)),
        normalized("plus-conditional", histogram.p_plus.as_deref()),
        normalized("minus-conditional", histogram.p_minus.as_deref()),
    ]
    .into_iter()
    .flatten()
    .collect();
    let ordering = if cfg.erase && matches!(mode, Mode::Analytic) {
        let report = ordering_invariance_check(&cfg, &[], 0)?;
        checks.push(check("screen marginal independent of erasure and timing", report.passed));
        Some(report)
    } else {
        None
    };

    let mut buf = Vec::new();
    histogram.write_csv(&mut buf)?;
    let csv = String::from_utf8(buf).expect("csv is utf-8");
    let result = EraserResult { mode, visibility, histogram, choices, ordering };
    Ok(Outcome::new(result, csv, checks))
}
