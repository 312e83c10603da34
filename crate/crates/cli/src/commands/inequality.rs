use gedanken_core::bellstates::make_bell;
use gedanken_core::inequalities::{
    evaluate, evaluate_deterministic, mu_sweep, rho_mu, search_settings, write_sweep_csv, DeterministicAssignment,
    InequalityReport, Objective, SearchConfig, SettingsSix, TSIRELSON_CHSH_LHS,
};
use gedanken_core::qstate::MixedState;
use serde::Serialize;

use crate::args::InequalityArgs;
use crate::output::{check, usage, CliError, Outcome};

const HEADER: &str = "state,mu,a1_deg,a2_deg,a3_deg,b1_deg,b2_deg,b3_deg,chsh_lhs,lf_lhs,chsh_violated,lf_violated\n";

#[derive(Serialize)]
struct SearchSummary {
    objective: Objective,
    target_met: bool,
    config: SearchConfig,
}

#[derive(Serialize)]
struct SingleResult {
    report: InequalityReport,
    alice_deg: Option<[f64; 3]>,
    bob_deg: Option<[f64; 3]>,
    search: Option<SearchSummary>,
}

#[derive(Serialize)]
struct SweepResult {
    alice_deg: [f64; 3],
    bob_deg: [f64; 3],
    reports: Vec<InequalityReport>,
    linear: bool,
    maximal_at_one: bool,
}

fn degrees3(v: &Option<Vec<f64>>, fallback: [f64; 3]) -> Result<[f64; 3], CliError> {
    match v {
        Some(v) => v.as_slice().try_into().map_err(|_| usage("settings need three angles")),
        None => Ok(fallback),
    }
}

fn settings(args: &InequalityArgs) -> Result<SettingsSix, CliError> {
    let (a, b) = SettingsSix::chsh_optimal().degrees();
    Ok(SettingsSix::from_degrees(degrees3(&args.alice, a)?, degrees3(&args.bob, b)?, args.plane)?)
}

fn csv_row(r: &InequalityReport) -> String {
    let (a, b) = r.settings.as_ref().map(SettingsSix::degrees).unwrap_or(([f64::NAN; 3], [f64::NAN; 3]));
    let fmt = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
        r.state,
        r.mu.map(fmt).unwrap_or_default(),
        fmt(a[0]),
        fmt(a[1]),
        fmt(a[2]),
        fmt(b[0]),
        fmt(b[1]),
        fmt(b[2]),
        r.chsh_lhs,
        r.lf_lhs,
        r.chsh_violated,
        r.lf_violated
    )
}

fn report_checks(r: &InequalityReport, quantum: bool) -> Vec<crate::output::Check> {
    let mut checks = vec![check("correlators and singles in [-1, 1]", r.is_physical())];
    if quantum {
        checks.push(check("CHSH within the Tsirelson bound", r.chsh_lhs <= TSIRELSON_CHSH_LHS + 1e-9));
    } else {
        checks.push(check("deterministic model obeys both inequalities", r.chsh_lhs <= 0.0 && r.lf_lhs <= 0.0));
    }
    checks
}

pub fn run(args: &InequalityArgs) -> Result<Outcome, CliError> {
    if let Some(values) = &args.deterministic {
        let values: [i8; 6] = values.as_slice().try_into().map_err(|_| usage("--deterministic needs six values"))?;
        let report = evaluate_deterministic(&DeterministicAssignment::new(values)?);
        let checks = report_checks(&report, false);
        let csv = format!("{HEADER}{}", csv_row(&report));
        let result = SingleResult { report, alice_deg: None, bob_deg: None, search: None };
        return Ok(Outcome::new(result, csv, checks));
    }

    if let Some(steps) = args.sweep {
        if steps == 0 {
            return Err(usage("--sweep needs at least one step"));
        }
        let s = settings(args)?;
        let mus: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
        let reports = mu_sweep(&s, &mus)?;
        let (zero, one) = (&reports[0], &reports[steps]);
        let linear = reports.iter().zip(&mus).all(|(r, mu)| {
            (r.chsh_lhs - (mu * one.chsh_lhs + (1.0 - mu) * zero.chsh_lhs)).abs() < 1e-10
                && (r.lf_lhs - (mu * one.lf_lhs + (1.0 - mu) * zero.lf_lhs)).abs() < 1e-10
        });
        let maximal_at_one = reports.iter().all(|r| r.chsh_lhs <= one.chsh_lhs + 1e-12 && r.lf_lhs <= one.lf_lhs + 1e-12);
        let mut buf = Vec::new();
        write_sweep_csv(&reports, &mut buf)?;
        let mut checks: Vec<_> = reports.iter().flat_map(|r| report_checks(r, true)).filter(|c| !c.passed).collect();
        checks.push(check("left-hand sides are linear in mu", linear));
        if one.chsh_lhs >= zero.chsh_lhs && one.lf_lhs >= zero.lf_lhs {
            checks.push(check("left-hand sides are maximal at mu = 1", maximal_at_one));
        }
        let (alice_deg, bob_deg) = s.degrees();
        let result = SweepResult { alice_deg, bob_deg, reports, linear, maximal_at_one };
        return Ok(Outcome::new(result, String::from_utf8(buf).expect("csv is utf-8"), checks));
    }

    let state: MixedState = match args.state {
        Some(kind) => make_bell(kind).density(),
        None => rho_mu(args.mu.unwrap_or(1.0))?,
    };
    let (report, search) = match &args.search {
        Some(spec) => {
            let objective: Objective = spec.parse()?;
            let config = SearchConfig {
                grid_resolution: args.grid,
                refine_iters: args.refine,
                joint_tolerance: args.tolerance,
                ..SearchConfig::default()
            };
            let out = search_settings(&state, args.plane, objective, &config)?;
            (out.report, Some(SearchSummary { objective, target_met: out.target_met, config }))
        }
        None => (evaluate(&state, &settings(args)?)?, None),
    };
    let mut report = report;
    match args.state {
        Some(kind) => (report.state, report.mu) = (kind.to_string(), None),
        None => {
            let mu = args.mu.unwrap_or(1.0);
            (report.state, report.mu) = (format!("rho-mu({mu})"), Some(mu));
        }
    }
    let checks = report_checks(&report, true);
    let degrees = report.settings.as_ref().map(SettingsSix::degrees);
    let csv = format!("{HEADER}{}", csv_row(&report));
    let result = SingleResult {
        alice_deg: degrees.map(|d| d.0),
        bob_deg: degrees.map(|d| d.1),
        report,
        search,
    };
    Ok(Outcome::new(result, csv, checks))
}
