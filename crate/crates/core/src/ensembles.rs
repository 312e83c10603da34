//! Seeded two-wing spin-measurement ensembles and the data-partition analysis.
//!
//! A trial draws Alice's outcome from the Born distribution of her spin
//! measurement and then Bob's from the Lüders post-state, so every sample
//! follows the exact joint law of the source state. Outcomes are always `±1`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bellstates::{correlation_closed, make_bell, BellKind, MeasurementDirection};
use crate::error::{Error, Result};
use crate::inequalities::rho_mu;
use crate::qstate::{Measurable, MixedState, Plane, ProjectorSet, QuantumState, TOLERANCES};
use crate::rng::{self, GENERATOR_ID};

/// Source of the particle pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "param")]
pub enum Source {
    Bell(BellKind),
    /// The tunable singlet/product mixture with weight `mu` on the singlet.
    Mu(f64),
}

impl Source {
    pub fn label(&self) -> String {
        match self {
            Source::Bell(k) => k.name().to_owned(),
            Source::Mu(mu) => format!("rho-mu({mu})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// Which wing is measured first when sampling. The joint law does not depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingOrder {
    AliceFirst,
    BobFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    /// radians
    pub alice_angle: f64,
    /// radians
    pub bob_angle: f64,
    pub alice_outcome: i8,
    pub bob_outcome: i8,
}

impl Trial {
    pub fn product(&self) -> i64 {
        i64::from(self.alice_outcome) * i64::from(self.bob_outcome)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialEnsemble {
    pub source: Source,
    pub plane: Plane,
    pub seed: u64,
    pub generator: String,
    pub trials: Vec<Trial>,
}

impl TrialEnsemble {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    /// Plain `Σ a·b / N`.
    pub fn product_average(&self) -> Result<f64> {
        if self.trials.is_empty() {
            return Err(Error::InvalidConfig("empty ensemble".into()));
        }
        let sum: i64 = self.trials.iter().map(Trial::product).sum();
        Ok(sum as f64 / self.trials.len() as f64)
    }

    /// CSV with columns `trial,alice_angle_deg,bob_angle_deg,a,b`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "trial,alice_angle_deg,bob_angle_deg,a,b")?;
        for (i, t) in self.trials.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                i,
                t.alice_angle.to_degrees(),
                t.bob_angle.to_degrees(),
                t.alice_outcome,
                t.bob_outcome
            )?;
        }
        Ok(())
    }
}

/// Conditional averages of one party's outcomes, grouped by the other party's outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    /// The party whose outcomes define the two groups.
    pub by: Party,
    /// With `by = Alice`: the average of Bob's outcomes over trials where Alice got `+1`.
    pub avg_given_plus: Option<f64>,
    /// With `by = Alice`: the average of Bob's outcomes over trials where Alice got `−1`.
    pub avg_given_minus: Option<f64>,
    pub count_plus: usize,
    pub count_minus: usize,
    /// `Σ a·b / N` over all trials.
    pub correlation_estimate: f64,
    /// `½·avg₊ − ½·avg₋`, which assumes equally populated groups.
    pub equal_weight_estimate: Option<f64>,
    /// `(n₊·avg₊ − n₋·avg₋) / N`; equals `correlation_estimate` exactly.
    pub count_weighted_estimate: f64,
}

fn partition(ensemble: &TrialEnsemble, by: Party) -> Result<PartitionReport> {
    if ensemble.trials.is_empty() {
        return Err(Error::InvalidConfig("empty ensemble".into()));
    }
    let (mut n_plus, mut n_minus, mut sum_plus, mut sum_minus) = (0usize, 0usize, 0i64, 0i64);
    for t in &ensemble.trials {
        let (key, other) = match by {
            Party::Alice => (t.alice_outcome, t.bob_outcome),
            Party::Bob => (t.bob_outcome, t.alice_outcome),
        };
        if key > 0 {
            n_plus += 1;
            sum_plus += i64::from(other);
        } else {
            n_minus += 1;
            sum_minus += i64::from(other);
        }
    }
    let n = ensemble.trials.len() as f64;
    let avg_plus = (n_plus > 0).then(|| sum_plus as f64 / n_plus as f64);
    let avg_minus = (n_minus > 0).then(|| sum_minus as f64 / n_minus as f64);
    let equal_weight = match (avg_plus, avg_minus) {
        (Some(p), Some(m)) => Some(0.5 * p - 0.5 * m),
        _ => None,
    };
    Ok(PartitionReport {
        by,
        avg_given_plus: avg_plus,
        avg_given_minus: avg_minus,
        count_plus: n_plus,
        count_minus: n_minus,
        correlation_estimate: ensemble.product_average()?,
        equal_weight_estimate: equal_weight,
        count_weighted_estimate: (sum_plus - sum_minus) as f64 / n,
    })
}

/// Groups Bob's outcomes by Alice's outcome.
pub fn partition_by_alice(ensemble: &TrialEnsemble) -> Result<PartitionReport> {
    partition(ensemble, Party::Alice)
}

/// Groups Alice's outcomes by Bob's outcome.
pub fn partition_by_bob(ensemble: &TrialEnsemble) -> Result<PartitionReport> {
    partition(ensemble, Party::Bob)
}

enum SourceState {
    Pure(crate::qstate::PureState),
    Mixed(MixedState),
}

fn source_state(source: Source) -> Result<SourceState> {
    Ok(match source {
        Source::Bell(k) => SourceState::Pure(make_bell(k)),
        Source::Mu(mu) => SourceState::Mixed(rho_mu(mu)?),
    })
}

fn wing_sets(plane: Plane, alice_angle: f64, bob_angle: f64) -> Result<(ProjectorSet, ProjectorSet)> {
    let a = ProjectorSet::spin(&plane.direction(alice_angle)).on_qubit(0, 2)?;
    let b = ProjectorSet::spin(&plane.direction(bob_angle)).on_qubit(1, 2)?;
    Ok((a, b))
}

/// Exact law `p[first][second]` of sequential measurement; index 0 is `+1`, 1 is `−1`.
fn sequential_law<S: Measurable + Clone>(state: &S, first: &ProjectorSet, second: &ProjectorSet) -> Result<[[f64; 2]; 2]> {
    let mut law = [[0.0; 2]; 2];
    for b1 in state.branches(first)? {
        if let Some(post) = &b1.post_state {
            for b2 in post.branches(second)? {
                law[b1.outcome][b2.outcome] = b1.probability * b2.probability;
            }
        }
    }
    Ok(law)
}

/// Exact joint outcome law `p[alice][bob]` (index 0 is `+1`) for the chosen sampling order.
pub fn joint_law(source: Source, plane: Plane, alice_angle: f64, bob_angle: f64, order: SamplingOrder) -> Result<[[f64; 2]; 2]> {
    let (a, b) = wing_sets(plane, alice_angle, bob_angle)?;
    type Law = Result<[[f64; 2]; 2]>;
    let law = |s: &dyn Fn(&ProjectorSet, &ProjectorSet) -> Law| -> Law {
        match order {
            SamplingOrder::AliceFirst => s(&a, &b),
            SamplingOrder::BobFirst => {
                let t = s(&b, &a)?;
                Ok([[t[0][0], t[1][0]], [t[0][1], t[1][1]]])
            }
        }
    };
    match source_state(source)? {
        SourceState::Pure(st) => law(&|f, s| sequential_law(&st, f, s)),
        SourceState::Mixed(st) => law(&|f, s| sequential_law(&st, f, s)),
    }
}

/// Cumulative tables for two-stage sampling.
struct TwoStage {
    first: Vec<f64>,
    second: [Vec<f64>; 2],
}

fn cumulative(ps: &[f64]) -> Vec<f64> {
    let total: f64 = ps.iter().sum();
    let mut acc = 0.0;
    ps.iter()
        .map(|p| {
            acc += p / total;
            acc
        })
        .collect()
}

fn two_stage<S: Measurable + Clone + QuantumState>(state: &S, first: &ProjectorSet, second: &ProjectorSet) -> Result<TwoStage> {
    let branches = state.branches(first)?;
    let first_p: Vec<f64> = branches.iter().map(|b| b.probability).collect();
    let mut second_tables = [vec![1.0, 1.0], vec![1.0, 1.0]];
    for b in &branches {
        if let Some(post) = &b.post_state {
            let ps: Vec<f64> = post.branches(second)?.iter().map(|x| x.probability).collect();
            second_tables[b.outcome] = cumulative(&ps);
        }
    }
    if first_p.iter().all(|&p| p < TOLERANCES.probability_floor) {
        return Err(Error::MeasurementUndefined(first_p.iter().sum()));
    }
    Ok(TwoStage { first: cumulative(&first_p), second: second_tables })
}

fn spin_of(index: usize) -> i8 {
    if index == 0 {
        1
    } else {
        -1
    }
}

/// Samples `n` trials with fixed settings. Deterministic in `seed` and independent of thread count.
pub fn run_trials(source: Source, alice_angle: f64, bob_angle: f64, plane: Plane, n: usize, seed: u64) -> Result<TrialEnsemble> {
    run_trials_ordered(source, alice_angle, bob_angle, plane, n, seed, SamplingOrder::AliceFirst)
}

pub fn run_trials_ordered(
    source: Source,
    alice_angle: f64,
    bob_angle: f64,
    plane: Plane,
    n: usize,
    seed: u64,
    order: SamplingOrder,
) -> Result<TrialEnsemble> {
    if n == 0 {
        return Err(Error::OutOfRange { name: "trial count", value: 0.0 });
    }
    if let Source::Mu(mu) = source {
        rho_mu(mu)?;
    }
    let (a, b) = wing_sets(plane, alice_angle, bob_angle)?;
    let (first, second) = match order {
        SamplingOrder::AliceFirst => (&a, &b),
        SamplingOrder::BobFirst => (&b, &a),
    };
    let sampler = match source_state(source)? {
        SourceState::Pure(s) => two_stage(&s, first, second)?,
        SourceState::Mixed(s) => two_stage(&s, first, second)?,
    };
    let trials = rng::par_draws(n, seed, |_, r| {
        let i = rng::pick(&sampler.first, rng::uniform(r));
        let j = rng::pick(&sampler.second[i], rng::uniform(r));
        let (ai, bi) = match order {
            SamplingOrder::AliceFirst => (i, j),
            SamplingOrder::BobFirst => (j, i),
        };
        Trial { alice_angle, bob_angle, alice_outcome: spin_of(ai), bob_outcome: spin_of(bi) }
    });
    Ok(TrialEnsemble { source, plane, seed, generator: GENERATOR_ID.to_owned(), trials })
}

/// Per-trial versus ensemble-average conservation against the aligned-frame projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    /// `⟨a·b⟩` predicted for the settings, i.e. the fraction Bob "should" measure.
    pub expected_projection: f64,
    /// Trial `i` conserves only if `b = expected·a` exactly, which needs a fractional outcome.
    pub per_trial_conserved: Vec<bool>,
    pub observed_average: f64,
    pub average_conserved: bool,
}

impl ConservationReport {
    pub fn fails_every_trial(&self) -> bool {
        self.per_trial_conserved.iter().all(|c| !c)
    }
}

/// Checks conservation per trial and on average against `correlation_closed` for Bell sources.
pub fn conservation_check(ensemble: &TrialEnsemble, tolerance: f64) -> Result<ConservationReport> {
    let Source::Bell(kind) = ensemble.source else {
        return Err(Error::InvalidConfig("conservation check needs a Bell source".into()));
    };
    let first = ensemble.trials.first().ok_or_else(|| Error::InvalidConfig("empty ensemble".into()))?;
    let dirs = MeasurementDirection::in_plane(ensemble.plane, first.alice_angle, first.bob_angle);
    let expected = correlation_closed(kind, &dirs);
    let per_trial = ensemble
        .trials
        .iter()
        .map(|t| (f64::from(t.bob_outcome) - expected * f64::from(t.alice_outcome)).abs() <= TOLERANCES.exact)
        .collect();
    let observed = ensemble.product_average()?;
    Ok(ConservationReport {
        expected_projection: expected,
        per_trial_conserved: per_trial,
        observed_average: observed,
        average_conserved: (observed - expected).abs() <= tolerance,
    })
}

/// The fixed eight-trial triplet ensemble: Alice `+1` at 0°, Bob at 60° with six `+1` and two `−1`.
pub fn figure7_ensemble() -> (TrialEnsemble, PartitionReport) {
    let bob = [1, 1, -1, 1, 1, 1, -1, 1];
    let beta = 60f64.to_radians();
    let trials = bob
        .iter()
        .map(|&b| Trial { alice_angle: 0.0, bob_angle: beta, alice_outcome: 1, bob_outcome: b })
        .collect();
    let ensemble = TrialEnsemble {
        source: Source::Bell(BellKind::PhiPlus),
        plane: Plane::Xz,
        seed: 0,
        generator: "fixed".to_owned(),
        trials,
    };
    let report = partition_by_alice(&ensemble).expect("ensemble is non-empty");
    (ensemble, report)
}
