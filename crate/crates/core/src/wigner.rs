//! Four agents: Xena and Yvonne in isolated labs, Zeus and Wigner outside.
//!
//! Xena's lab `X` is a qubit with `|heads⟩ = |0⟩`, `|tails⟩ = |1⟩`; Yvonne's lab `Y`
//! has `|+⟩ = |0⟩`, `|−⟩ = |1⟩`. Zeus measures `X` in `x̂` or `ẑ`, Wigner measures
//! `Y` in `ŷ` or `ŵ`, where
//!
//! ```text
//! |OK⟩_Z = (|heads⟩ − |tails⟩)/√2    |fail⟩_Z = (|heads⟩ + |tails⟩)/√2
//! |OK⟩_W = (|+⟩ − |−⟩)/√2            |fail⟩_W = (|+⟩ + |−⟩)/√2
//! ```
//!
//! The `ẑ` and `ŵ` bases have no operational meaning for an isolated lab holding a
//! coin record; they are computed anyway.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{
    conditional_probability, project_measure, re, Amplitude, BasisLabels, Matrix, Projector, ProjectorSet, PureState,
    TOLERANCES,
};
use crate::rng::{par_draws, GENERATOR_ID};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    Xena,
    Yvonne,
    Zeus,
    Wigner,
}

impl Agent {
    pub const ALL: [Agent; 4] = [Agent::Xena, Agent::Yvonne, Agent::Zeus, Agent::Wigner];

    pub fn name(self) -> &'static str {
        match self {
            Agent::Xena => "xena",
            Agent::Yvonne => "yvonne",
            Agent::Zeus => "zeus",
            Agent::Wigner => "wigner",
        }
    }

    /// Lab qubit this agent measures: 0 for `X`, 1 for `Y`.
    pub fn lab(self) -> usize {
        match self {
            Agent::Xena | Agent::Zeus => 0,
            Agent::Yvonne | Agent::Wigner => 1,
        }
    }

    pub fn legal_bases(self) -> &'static [Basis] {
        match self {
            Agent::Xena => &[Basis::XHat],
            Agent::Yvonne => &[Basis::YHat],
            Agent::Zeus => &[Basis::XHat, Basis::ZHat],
            Agent::Wigner => &[Basis::YHat, Basis::WHat],
        }
    }

    fn is_friend(self) -> bool {
        matches!(self, Agent::Xena | Agent::Yvonne)
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Agent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xena" | "x" => Ok(Agent::Xena),
            "yvonne" | "y" => Ok(Agent::Yvonne),
            "zeus" | "z" => Ok(Agent::Zeus),
            "wigner" | "w" => Ok(Agent::Wigner),
            other => Err(Error::Parse(format!("unknown agent '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// heads / tails
    XHat,
    /// + / −
    YHat,
    /// OK / fail on Xena's lab
    ZHat,
    /// OK / fail on Yvonne's lab
    WHat,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::XHat => "xhat",
            Basis::YHat => "yhat",
            Basis::ZHat => "zhat",
            Basis::WHat => "what",
        }
    }

    pub fn labels(self) -> [&'static str; 2] {
        match self {
            Basis::XHat => ["heads", "tails"],
            Basis::YHat => ["+", "-"],
            Basis::ZHat | Basis::WHat => ["OK", "fail"],
        }
    }

    /// Basis kets in the lab's native encoding.
    pub fn kets(self) -> [[Amplitude; 2]; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Basis::XHat | Basis::YHat => [[re(1.0), re(0.0)], [re(0.0), re(1.0)]],
            Basis::ZHat | Basis::WHat => [[re(h), re(-h)], [re(h), re(h)]],
        }
    }

    pub fn outcome(self, label: &str) -> Result<usize> {
        let l = normalize_label(label);
        self.labels()
            .iter()
            .position(|x| x.eq_ignore_ascii_case(&l))
            .ok_or_else(|| Error::Parse(format!("'{label}' is not an outcome of {}", self.name())))
    }

    fn local(self) -> LocalBasis {
        LocalBasis { labels: self.labels().map(String::from), kets: self.kets() }
    }

    fn projector_set(self) -> ProjectorSet {
        let [a, b] = self.kets();
        ProjectorSet::from_kets(&[a.to_vec(), b.to_vec()], vec![1.0, -1.0])
            .and_then(|s| s.with_labels(&self.labels()))
            .expect("orthonormal basis")
    }
}

fn normalize_label(label: &str) -> String {
    match label.trim() {
        "−" | "minus" | "-1" => "-".into(),
        "plus" | "+1" => "+".into(),
        other => other.to_string(),
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xhat" | "x" | "x̂" => Ok(Basis::XHat),
            "yhat" | "y" | "ŷ" => Ok(Basis::YHat),
            "zhat" | "z" | "ẑ" => Ok(Basis::ZHat),
            "what" | "w" | "ŵ" => Ok(Basis::WHat),
            other => Err(Error::Parse(format!("unknown basis '{other}'"))),
        }
    }
}

/// An agent's measurement in a basis that agent is allowed to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementChoice {
    pub agent: Agent,
    pub basis: Basis,
}

impl MeasurementChoice {
    pub fn new(agent: Agent, basis: Basis) -> Result<Self> {
        if !agent.legal_bases().contains(&basis) {
            return Err(Error::IllegalBasis { agent: agent.name().into(), basis: basis.name().into() });
        }
        Ok(Self { agent, basis })
    }
}

impl FromStr for MeasurementChoice {
    type Err = Error;

    /// `agent:basis`, e.g. `zeus:zhat`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(':').ok_or_else(|| Error::Parse(format!("expected agent:basis, got '{s}'")))?;
        Self::new(a.parse()?, b.parse()?)
    }
}

/// `agent` obtained `outcome` in `basis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub agent: Agent,
    pub basis: Basis,
    pub outcome: usize,
}

impl Event {
    pub fn new(agent: Agent, label: &str) -> Result<Self> {
        for &basis in agent.legal_bases() {
            if let Ok(outcome) = basis.outcome(label) {
                return Ok(Self { agent, basis, outcome });
            }
        }
        Err(Error::Parse(format!("'{label}' is not an outcome {agent} can record")))
    }

    pub fn label(&self) -> &'static str {
        self.basis.labels()[self.outcome]
    }
}

impl FromStr for Event {
    type Err = Error;

    /// `agent:outcome`, e.g. `wigner:OK`; the basis follows from the outcome label.
    fn from_str(s: &str) -> Result<Self> {
        let (a, l) = s.split_once(':').ok_or_else(|| Error::Parse(format!("expected agent:outcome, got '{s}'")))?;
        Event::new(a.parse()?, l)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.agent, self.label())
    }
}

/// Who owns each qubit of a scenario register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Subsystem {
    XenaLab,
    YvonneLab,
    /// Record of a superobserver's relative-state measurement, `|k⟩` for outcome `k`.
    Copy { agent: Agent, basis: Basis },
}

impl Subsystem {
    fn native(self) -> LocalBasis {
        match self {
            Subsystem::XenaLab => Basis::XHat.local(),
            Subsystem::YvonneLab => Basis::YHat.local(),
            Subsystem::Copy { basis, .. } => {
                LocalBasis { labels: basis.labels().map(String::from), kets: Basis::XHat.kets() }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioState {
    psi: PureState,
    subsystems: Vec<Subsystem>,
}

impl ScenarioState {
    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn n_qubits(&self) -> usize {
        self.subsystems.len()
    }

    fn copy_of(&self, agent: Agent) -> Option<(usize, Basis)> {
        self.subsystems.iter().enumerate().find_map(|(q, s)| match s {
            Subsystem::Copy { agent: a, basis } if *a == agent => Some((q, *basis)),
            _ => None,
        })
    }

    /// Appends `agent`'s record qubit: `Σ_k P_k|ψ⟩ ⊗ |k⟩`.
    pub fn record(&self, choice: MeasurementChoice) -> Result<ScenarioState> {
        if choice.agent.is_friend() {
            return Err(Error::IllegalSequence(format!("{} is inside a lab and has already measured", choice.agent)));
        }
        if self.copy_of(choice.agent).is_some() {
            return Err(Error::IllegalSequence(format!("{} measures twice", choice.agent)));
        }
        let n = self.n_qubits();
        let set = choice.basis.projector_set().on_qubit(choice.agent.lab(), n)?;
        let dim = self.psi.dim();
        let mut amps = vec![re(0.0); 2 * dim];
        for k in 0..2 {
            let branch = set.projector(k).matrix() * self.psi.vector();
            for i in 0..dim {
                amps[(i << 1) | k] = branch[i];
            }
        }
        let mut subsystems = self.subsystems.clone();
        subsystems.push(Subsystem::Copy { agent: choice.agent, basis: choice.basis });
        let psi = PureState::new(amps)?.with_labels(labels_for(&subsystems))?;
        Ok(ScenarioState { psi, subsystems })
    }

    /// Projector for an event on this register.
    fn projector(&self, e: &Event) -> Result<Projector> {
        let n = self.n_qubits();
        if e.agent.is_friend() {
            return lab_projector(e, n);
        }
        match self.copy_of(e.agent) {
            Some((q, basis)) if basis == e.basis => {
                let mut ket = [re(0.0); 2];
                ket[e.outcome] = re(1.0);
                Projector::from_ket(&ket).and_then(|p| p.on_qubit(q, n))
            }
            Some((_, basis)) => Err(Error::IllegalSequence(format!(
                "{} measured {basis}, which has no outcome '{}'",
                e.agent,
                e.label()
            ))),
            None => Err(Error::IllegalSequence(format!("{} has no record in this state", e.agent))),
        }
    }
}

/// Projector onto the event's basis ket on the lab qubit itself.
fn lab_projector(e: &Event, n_qubits: usize) -> Result<Projector> {
    Projector::from_ket(&e.basis.kets()[e.outcome]).and_then(|p| p.on_qubit(e.agent.lab(), n_qubits))
}

fn labels_for(subsystems: &[Subsystem]) -> Vec<Option<BasisLabels>> {
    subsystems
        .iter()
        .map(|s| {
            let l = s.native().labels;
            Some(BasisLabels::new(&l[0], &l[1]))
        })
        .collect()
}

/// `(1/√3)(|heads⟩|−⟩ + |tails⟩|+⟩ + |tails⟩|−⟩)`, built from Xena's coin state and the
/// state she sends Yvonne for each outcome.
pub fn build_initial() -> ScenarioState {
    let r3 = 3f64.sqrt();
    let coin = [1.0 / r3, (2.0f64).sqrt() / r3];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sent = [[0.0, 1.0], [h, h]];
    let mut amps = vec![re(0.0); 4];
    for x in 0..2 {
        for y in 0..2 {
            amps[2 * x + y] = re(coin[x] * sent[x][y]);
        }
    }
    let subsystems = vec![Subsystem::XenaLab, Subsystem::YvonneLab];
    let psi = PureState::new(amps)
        .and_then(|p| p.with_labels(labels_for(&subsystems)))
        .expect("normalized by construction");
    ScenarioState { psi, subsystems }
}

#[derive(Clone, Debug, PartialEq)]
struct LocalBasis {
    labels: [String; 2],
    kets: [[Amplitude; 2]; 2],
}

impl LocalBasis {
    /// Rows are bras `⟨b_k|`.
    fn bra_matrix(&self) -> Matrix {
        Matrix::from_fn(2, 2, |k, i| self.kets[k][i].conj())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub labels: Vec<String>,
    pub amplitude: Amplitude,
}

/// A scenario state written as coefficients over a product basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    /// Basis labels per qubit.
    pub bases: Vec<[String; 2]>,
    /// In lexicographic order of outcome indices, qubit 0 most significant.
    pub components: Vec<Component>,
    #[serde(skip)]
    kets: Vec<[[Amplitude; 2]; 2]>,
}

impl Expansion {
    fn new(state: &ScenarioState, locals: Vec<LocalBasis>) -> Self {
        let u = locals.iter().map(LocalBasis::bra_matrix).reduce(|a, b| a.kronecker(&b)).expect("at least one qubit");
        let coeffs = &u * state.psi.vector();
        let n = locals.len();
        let components = (0..coeffs.len())
            .map(|idx| Component {
                labels: (0..n).map(|q| locals[q].labels[(idx >> (n - 1 - q)) & 1].clone()).collect(),
                amplitude: coeffs[idx],
            })
            .collect();
        Self {
            bases: locals.iter().map(|l| l.labels.clone()).collect(),
            kets: locals.iter().map(|l| l.kets).collect(),
            components,
        }
    }

    pub fn coefficient(&self, labels: &[&str]) -> Option<Amplitude> {
        self.components
            .iter()
            .find(|c| c.labels.len() == labels.len() && c.labels.iter().zip(labels).all(|(a, b)| a == b))
            .map(|c| c.amplitude)
    }

    /// Sums the components back into the native-basis state vector.
    pub fn reconstruct(&self) -> Result<PureState> {
        let locals: Vec<LocalBasis> = self
            .bases
            .iter()
            .zip(&self.kets)
            .map(|(labels, kets)| LocalBasis { labels: labels.clone(), kets: *kets })
            .collect();
        let u = locals.iter().map(LocalBasis::bra_matrix).reduce(|a, b| a.kronecker(&b)).expect("at least one qubit");
        let coeffs = DVector::from_iterator(self.components.len(), self.components.iter().map(|c| c.amplitude));
        let v = u.adjoint() * coeffs;
        PureState::new(v.iter().copied().collect())
    }
}

/// Expresses the state with `agent`'s lab written in `basis` and every other qubit in its
/// native basis. The state vector itself is unchanged.
pub fn rewrite_in_basis(state: &ScenarioState, agent: Agent, basis: Basis) -> Result<Expansion> {
    MeasurementChoice::new(agent, basis)?;
    let locals = state
        .subsystems
        .iter()
        .enumerate()
        .map(|(q, s)| if q == agent.lab() { basis.local() } else { s.native() })
        .collect();
    Ok(Expansion::new(state, locals))
}

/// Both labs in the OK/fail bases.
///
/// Yvonne's OK ket is taken as `(|−⟩ − |+⟩)/√2`, the opposite overall phase to Wigner's
/// `|OK⟩_W`, giving coefficients `(1/√12, −1/√12, 1/√12, √3/2)` on
/// `OK·OK, OK·fail, fail·OK, fail·fail`. Probabilities do not depend on this phase.
pub fn ok_fail_expansion(state: &ScenarioState) -> Expansion {
    let mut yvonne = Basis::WHat.local();
    yvonne.kets[0] = yvonne.kets[0].map(|a| -a);
    let locals = state
        .subsystems
        .iter()
        .enumerate()
        .map(|(q, s)| match q {
            0 => Basis::ZHat.local(),
            1 => yvonne.clone(),
            _ => s.native(),
        })
        .collect();
    Expansion::new(state, locals)
}

fn check_distinct(events: &[Event]) -> Result<()> {
    for (i, a) in events.iter().enumerate() {
        if events[i + 1..].iter().any(|b| b.agent == a.agent) {
            return Err(Error::IllegalSequence(format!("{} appears in more than one event", a.agent)));
        }
    }
    Ok(())
}

/// `P(target | conditions)` with objective collapse on the initial state.
///
/// Events are applied as Lüders projections in time order: the friends first, then Zeus
/// and Wigner in the order given by `order` (either agent may be omitted). The target
/// agent's measurement is performed whatever its outcome, so the denominator sums over
/// the target's outcomes.
pub fn standard_probability(conditions: &[Event], target: &Event, order: &[Agent]) -> Result<f64> {
    let mut all: Vec<Event> = conditions.to_vec();
    all.push(*target);
    check_distinct(&all)?;
    for e in &all {
        MeasurementChoice::new(e.agent, e.basis)?;
    }
    let rank = |a: Agent| -> usize {
        if a.is_friend() {
            return 0;
        }
        order.iter().position(|&o| o == a).map_or(order.len() + 1 + a as usize, |p| p + 1)
    };
    let state = build_initial();
    let joint = |outcome: usize| -> Result<f64> {
        let mut events: Vec<Event> = conditions.to_vec();
        events.push(Event { outcome, ..*target });
        events.sort_by_key(|e| rank(e.agent));
        let mut v = state.psi.vector().clone();
        for e in &events {
            v = lab_projector(e, 2)?.matrix() * v;
        }
        Ok(v.norm_squared())
    };
    let hit = joint(target.outcome)?;
    let total = hit + joint(1 - target.outcome)?;
    if total < TOLERANCES.probability_floor {
        return Err(Error::UndefinedConditional(total));
    }
    Ok(hit / total)
}

/// Grows the initial state by one record qubit per superobserver measurement.
pub fn relative_state(sequence: &[MeasurementChoice]) -> Result<ScenarioState> {
    sequence.iter().try_fold(build_initial(), |s, c| s.record(*c))
}

/// `P(target | conditions)` on the state grown by `sequence`.
///
/// Zeus and Wigner refer to their record qubits. A superobserver that appears in an event
/// but not in `sequence` measures last, in the basis the event names.
pub fn relative_state_probability(sequence: &[MeasurementChoice], conditions: &[Event], target: &Event) -> Result<f64> {
    let mut all: Vec<Event> = conditions.to_vec();
    all.push(*target);
    check_distinct(&all)?;
    let mut state = relative_state(sequence)?;
    for e in &all {
        if !e.agent.is_friend() && state.copy_of(e.agent).is_none() {
            state = state.record(MeasurementChoice::new(e.agent, e.basis)?)?;
        }
    }
    let cond = conditions
        .iter()
        .map(|e| state.projector(e))
        .try_fold(Projector::identity(state.psi.dim()), |acc, p| acc.and(&p?))?;
    conditional_probability(&state.psi, &cond, &state.projector(target)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formalism {
    Standard,
    RelativeState,
    SubjectiveCollapse,
}

impl FromStr for Formalism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "standard" => Ok(Formalism::Standard),
            "relative-state" | "relative" => Ok(Formalism::RelativeState),
            "subjective-collapse" | "subjective" => Ok(Formalism::SubjectiveCollapse),
            other => Err(Error::Parse(format!("unknown formalism '{other}'"))),
        }
    }
}

impl fmt::Display for Formalism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formalism::Standard => "standard",
            Formalism::RelativeState => "relative-state",
            Formalism::SubjectiveCollapse => "subjective-collapse",
        })
    }
}

/// One classical record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub trial: u64,
    pub seq: u32,
    pub agent: Agent,
    pub basis: Basis,
    pub outcome: String,
}

/// Append-only records of one trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalLedger {
    trial: u64,
    /// Whether Xena's lab passed Zeus's heads-tails polarizer.
    passed: bool,
    entries: Vec<LedgerEntry>,
}

impl ClassicalLedger {
    pub fn new(trial: u64) -> Self {
        Self { trial, passed: true, entries: Vec::new() }
    }

    pub fn append(&mut self, agent: Agent, basis: Basis, outcome: &str) {
        let seq = self.entries.len() as u32;
        self.entries.push(LedgerEntry { trial: self.trial, seq, agent, basis, outcome: outcome.into() });
    }

    pub fn mark_blocked(&mut self) {
        self.passed = false;
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    pub fn passed(&self) -> bool {
        self.passed
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    fn last_record(&self, agent: Agent, basis: Basis) -> Option<&str> {
        self.entries.iter().rev().find(|e| e.agent == agent && e.basis == basis).map(|e| e.outcome.as_str())
    }
}

/// Writes each entry as one JSON object per line.
pub fn write_ledgers_jsonl<W: Write>(ledgers: &[ClassicalLedger], mut w: W) -> Result<()> {
    for l in ledgers {
        for e in &l.entries {
            serde_json::to_writer(&mut w, e).map_err(|err| Error::Parse(err.to_string()))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Polarizer passing `(|heads⟩ + |tails⟩)/√2`.
fn polarizer() -> ProjectorSet {
    let pass = Projector::from_ket(&Basis::ZHat.kets()[1]).expect("unit ket");
    ProjectorSet::new(vec![pass.clone(), pass.complement()], vec![1.0, 0.0])
        .and_then(|s| s.with_labels(&["pass", "blocked"]))
        .expect("complete pair")
}

/// The record-sharing run.
///
/// Per trial Xena measures `(|heads⟩ + |tails⟩)/√2` in `x̂` and sends the resulting
/// basis state to Wigner, who measures it in `x̂`. Under subjective collapse Zeus then
/// treats Xena's lab quantum mechanically: he passes it through the heads-tails
/// polarizer and, on passage, measures `x̂`; his outcome stands for Xena's whole
/// recorded history. Under the standard formalism Xena's record is classical, the
/// polarizer has nothing to act on, and Zeus reads the record as it is.
pub fn run_collapse_demo(formalism: Formalism, seed: u64, n_trials: usize) -> Result<Vec<ClassicalLedger>> {
    if n_trials == 0 {
        return Err(Error::OutOfRange { name: "n_trials", value: 0.0 });
    }
    if formalism == Formalism::RelativeState {
        return Err(Error::InvalidConfig("the record-sharing run is defined for the collapse formalisms".into()));
    }
    let coin = PureState::new(vec![re(std::f64::consts::FRAC_1_SQRT_2); 2])?;
    let xhat = Basis::XHat.projector_set();
    let filter = polarizer();
    par_draws(n_trials, seed, |i, rng| -> Result<ClassicalLedger> {
        let mut ledger = ClassicalLedger::new(i as u64);
        let xena = project_measure(&coin, &xhat, rng)?;
        let xena_label = xhat.labels()[xena.outcome].clone();
        ledger.append(Agent::Xena, Basis::XHat, &xena_label);
        let wigner = project_measure(&xena.post_state, &xhat, rng)?;
        ledger.append(Agent::Wigner, Basis::XHat, &xhat.labels()[wigner.outcome]);
        match formalism {
            Formalism::SubjectiveCollapse => {
                let passage = project_measure(&xena.post_state, &filter, rng)?;
                if passage.outcome == 1 {
                    ledger.mark_blocked();
                } else {
                    let zeus = project_measure(&passage.post_state, &xhat, rng)?;
                    ledger.append(Agent::Zeus, Basis::XHat, &xhat.labels()[zeus.outcome]);
                }
            }
            _ => ledger.append(Agent::Zeus, Basis::XHat, &xena_label),
        }
        Ok(ledger)
    })
    .into_iter()
    .collect()
}

pub fn run_subjective_collapse(seed: u64, n_trials: usize) -> Result<Vec<ClassicalLedger>> {
    run_collapse_demo(Formalism::SubjectiveCollapse, seed, n_trials)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContradictionReport {
    pub formalism: Option<Formalism>,
    pub seed: Option<u64>,
    pub generator: Option<String>,
    pub n_trials: usize,
    pub n_passed: usize,
    pub contradiction_trials: Vec<u64>,
    pub contradictions: usize,
    /// Contradictions over all trials.
    pub raw_frequency: f64,
    /// Contradictions over trials that passed the polarizer.
    pub conditioned_frequency: Option<f64>,
    /// Binomial standard error of `conditioned_frequency`.
    pub conditioned_std_error: Option<f64>,
}

/// Flags trials where Zeus's account of Xena's history and Wigner's record disagree.
pub fn detect_contradiction(ledgers: &[ClassicalLedger]) -> ContradictionReport {
    let contradiction_trials: Vec<u64> = ledgers
        .iter()
        .filter(|l| {
            match (l.last_record(Agent::Zeus, Basis::XHat), l.last_record(Agent::Wigner, Basis::XHat)) {
                (Some(z), Some(w)) => z != w,
                _ => false,
            }
        })
        .map(|l| l.trial)
        .collect();
    let n_trials = ledgers.len();
    let n_passed = ledgers.iter().filter(|l| l.passed).count();
    let k = contradiction_trials.len();
    let conditioned = (n_passed > 0).then(|| k as f64 / n_passed as f64);
    ContradictionReport {
        formalism: None,
        seed: None,
        generator: None,
        n_trials,
        n_passed,
        contradictions: k,
        contradiction_trials,
        raw_frequency: if n_trials == 0 { 0.0 } else { k as f64 / n_trials as f64 },
        conditioned_frequency: conditioned,
        conditioned_std_error: conditioned.map(|p| (p * (1.0 - p) / n_passed as f64).sqrt()),
    }
}

/// Runs the record-sharing scenario and summarizes its contradictions.
pub fn contradiction_demo(formalism: Formalism, seed: u64, n_trials: usize) -> Result<(ContradictionReport, Vec<ClassicalLedger>)> {
    let ledgers = run_collapse_demo(formalism, seed, n_trials)?;
    let mut report = detect_contradiction(&ledgers);
    report.formalism = Some(formalism);
    report.seed = Some(seed);
    report.generator = Some(GENERATOR_ID.into());
    Ok((report, ledgers))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str) -> Event {
        s.parse().unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn initial_state_marginals() {
        let s = build_initial();
        assert!(close(s.psi().norm_sqr(), 1.0));
        let p = |e: &str| {
            let p = s.projector(&ev(e)).unwrap();
            (p.matrix() * s.psi().vector()).norm_squared()
        };
        assert!(close(p("xena:heads"), 1.0 / 3.0));
        assert!(close(p("xena:tails"), 2.0 / 3.0));
        assert!(close(p("yvonne:+"), 1.0 / 3.0));
    }

    #[test]
    fn zeus_fail_rewrite() {
        let e = rewrite_in_basis(&build_initial(), Agent::Zeus, Basis::ZHat).unwrap();
        let want = (2.0f64).sqrt() / 3f64.sqrt();
        assert!((e.coefficient(&["fail", "-"]).unwrap() - re(want)).norm() < 1e-12);
        assert!(e.coefficient(&["OK", "-"]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn ok_fail_coefficients() {
        let e = ok_fail_expansion(&build_initial());
        let r12 = 1.0 / 12f64.sqrt();
        let want = [r12, -r12, r12, 3f64.sqrt() / 2.0];
        for (c, w) in e.components.iter().zip(want) {
            assert!((c.amplitude - re(w)).norm() < 1e-12, "{:?}", c);
        }
        assert_eq!(e.components[1].labels, vec!["OK", "fail"]);
        assert!(e.reconstruct().unwrap().approx_eq(build_initial().psi(), 1e-12));
    }

    #[test]
    fn wigner_ok_projection() {
        // ⟨OK|_W Ψ = −(1/√6)|heads⟩
        let s = build_initial();
        let e = rewrite_in_basis(&s, Agent::Wigner, Basis::WHat).unwrap();
        assert!((e.coefficient(&["heads", "OK"]).unwrap() - re(-1.0 / 6f64.sqrt())).norm() < 1e-12);
        assert!(e.coefficient(&["tails", "OK"]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn standard_examples() {
        let order = [Agent::Zeus, Agent::Wigner];
        assert!(close(standard_probability(&[ev("xena:tails")], &ev("wigner:OK"), &order).unwrap(), 0.0));
        assert!(close(standard_probability(&[ev("zeus:OK")], &ev("yvonne:+"), &order).unwrap(), 1.0));
        assert!(close(standard_probability(&[ev("wigner:OK")], &ev("zeus:heads"), &order).unwrap(), 1.0));
    }

    #[test]
    fn relative_state_context_dependence() {
        let seq = |s: &[&str]| s.iter().map(|c| c.parse().unwrap()).collect::<Vec<MeasurementChoice>>();
        let p = |s: &[&str]| relative_state_probability(&seq(s), &[ev("xena:tails")], &ev("wigner:OK")).unwrap();
        assert!(close(p(&["zeus:xhat", "wigner:what"]), 0.0));
        assert!(close(p(&["zeus:zhat", "wigner:what"]), 1.0 / 6.0));
        assert!(close(p(&["wigner:what"]), 0.0));
        assert!(close(p(&[]), 0.0));
    }

    #[test]
    fn illegal_choices() {
        assert!(matches!("zeus:yhat".parse::<MeasurementChoice>(), Err(Error::IllegalBasis { .. })));
        assert!("xena:zhat".parse::<MeasurementChoice>().is_err());
        let xena = MeasurementChoice::new(Agent::Xena, Basis::XHat).unwrap();
        assert!(matches!(relative_state(&[xena]), Err(Error::IllegalSequence(_))));
        let z = MeasurementChoice::new(Agent::Zeus, Basis::ZHat).unwrap();
        assert!(matches!(relative_state(&[z, z]), Err(Error::IllegalSequence(_))));
        assert!(relative_state_probability(&[z], &[ev("zeus:heads")], &ev("wigner:OK")).is_err());
    }

    #[test]
    fn zero_probability_condition() {
        let r = standard_probability(&[ev("xena:heads"), ev("yvonne:+")], &ev("zeus:OK"), &[Agent::Zeus]);
        assert!(matches!(r, Err(Error::UndefinedConditional(_))));
    }

    #[test]
    fn relative_state_growth_is_normalized() {
        let s = relative_state(&["zeus:zhat".parse().unwrap(), "wigner:what".parse().unwrap()]).unwrap();
        assert_eq!(s.n_qubits(), 4);
        assert!(close(s.psi().norm_sqr(), 1.0));
    }

    #[test]
    fn ledger_detection() {
        let mut bad = ClassicalLedger::new(0);
        bad.append(Agent::Xena, Basis::XHat, "heads");
        bad.append(Agent::Wigner, Basis::XHat, "heads");
        bad.append(Agent::Zeus, Basis::XHat, "tails");
        let mut good = ClassicalLedger::new(1);
        good.append(Agent::Wigner, Basis::XHat, "tails");
        good.append(Agent::Zeus, Basis::XHat, "tails");
        assert_eq!(detect_contradiction(&[bad.clone(), good.clone()]).contradiction_trials, vec![0]);
        assert_eq!(detect_contradiction(&[good]).contradictions, 0);
        assert_eq!(bad.entries()[2].seq, 2);
    }

    #[test]
    fn collapse_runs() {
        let (sub, ledgers) = contradiction_demo(Formalism::SubjectiveCollapse, 3, 2000).unwrap();
        assert!(sub.contradictions > 0);
        assert!(ledgers.iter().any(|l| !l.passed()));
        let (std, _) = contradiction_demo(Formalism::Standard, 3, 2000).unwrap();
        assert_eq!(std.contradictions, 0);
        assert_eq!(std.n_passed, 2000);
        assert!(run_collapse_demo(Formalism::RelativeState, 3, 10).is_err());
        assert!(run_subjective_collapse(3, 0).is_err());
    }
}
