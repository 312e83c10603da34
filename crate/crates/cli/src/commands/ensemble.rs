use gedanken_core::ensembles::{
    conservation_check, figure7_ensemble, joint_law, partition_by_alice, partition_by_bob, run_trials, ConservationReport,
    PartitionReport, SamplingOrder, Source, TrialEnsemble,
};
use gedanken_core::qstate::Plane;
use serde::Serialize;

use crate::args::EnsembleArgs;
use crate::output::{check, usage, CliError, Outcome, RunManifest};

#[derive(Serialize)]
struct EnsembleResult {
    source: Source,
    plane: Plane,
    alice_angle_deg: f64,
    bob_angle_deg: f64,
    n_trials: usize,
    seed: Option<u64>,
    /// Exact `⟨a·b⟩` for the source and settings.
    expected_correlation: f64,
    correlation: f64,
    /// Sampling tolerance, `4/√N`.
    tolerance: f64,
    by_alice: PartitionReport,
    by_bob: PartitionReport,
    conservation: Option<ConservationSummary>,
}

#[derive(Serialize)]
struct ConservationSummary {
    expected_projection: f64,
    observed_average: f64,
    trials_conserved: usize,
    fails_every_trial: bool,
    average_conserved: bool,
}

impl From<&ConservationReport> for ConservationSummary {
    fn from(r: &ConservationReport) -> Self {
        Self {
            expected_projection: r.expected_projection,
            observed_average: r.observed_average,
            trials_conserved: r.per_trial_conserved.iter().filter(|c| **c).count(),
            fails_every_trial: r.fails_every_trial(),
            average_conserved: r.average_conserved,
        }
    }
}

fn trials_csv(ensemble: &TrialEnsemble) -> Result<String, CliError> {
    let mut buf = Vec::new();
    ensemble.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

pub fn run(args: &EnsembleArgs, manifest: &RunManifest) -> Result<Outcome, CliError> {
    let (ensemble, seed) = if args.figure7 {
        (figure7_ensemble().0, None)
    } else {
        let seed = args.seed.ok_or_else(|| usage("randomized runs need --seed"))?;
        let source = args.mu.map_or(Source::Bell(args.kind), Source::Mu);
        let alpha = args.alpha.to_radians();
        let beta = (args.alpha + args.theta).to_radians();
        (run_trials(source, alpha, beta, args.plane, args.n, seed)?, Some(seed))
    };
    let first = ensemble.trials[0];
    let law = joint_law(ensemble.source, ensemble.plane, first.alice_angle, first.bob_angle, SamplingOrder::AliceFirst)?;
    let expected = law[0][0] + law[1][1] - law[0][1] - law[1][0];
    let n = ensemble.len();
    let tolerance = 4.0 / (n as f64).sqrt();
    let by_alice = partition_by_alice(&ensemble)?;
    let by_bob = partition_by_bob(&ensemble)?;
    let conservation = match ensemble.source {
        Source::Bell(_) => Some(conservation_check(&ensemble, tolerance)?),
        Source::Mu(_) => None,
    };
    let correlation = ensemble.product_average()?;

    let mut checks = vec![
        check("outcomes are +1 or -1", ensemble.trials.iter().all(|t| t.alice_outcome.abs() == 1 && t.bob_outcome.abs() == 1)),
        check(
            "count-weighted partition equals product average",
            by_alice.count_weighted_estimate == correlation && by_bob.count_weighted_estimate == correlation,
        ),
    ];
    if args.figure7 {
        checks.push(check("Bob's average given Alice +1 is 0.5", by_alice.avg_given_plus == Some(0.5)));
        if let Some(c) = &conservation {
            checks.push(check("conservation fails on every trial", c.fails_every_trial()));
        }
    }

    let result = EnsembleResult {
        source: ensemble.source,
        plane: ensemble.plane,
        alice_angle_deg: first.alice_angle.to_degrees(),
        bob_angle_deg: first.bob_angle.to_degrees(),
        n_trials: n,
        seed,
        expected_correlation: expected,
        correlation,
        tolerance,
        by_alice,
        by_bob,
        conservation: conservation.as_ref().map(ConservationSummary::from),
    };
    let csv = trials_csv(&ensemble)?;
    let mut outcome = Outcome::new(result, csv.clone(), checks);
    if let Some(path) = &args.trials_csv {
        outcome.side_files.push((path.clone(), manifest.csv_header() + &csv));
    }
    Ok(outcome)
}
