//! Small dense complex linear algebra for qubit registers.
//!
//! Qubit 0 is the most significant bit of a basis index, so `|u⟩ ⊗ |d⟩` is
//! basis index `0b01`. All scenarios in this crate stay at or below four
//! qubits, so every operator is a dense `DMatrix`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use num_complex::Complex64 as Amplitude;

pub type Matrix = DMatrix<Amplitude>;

/// Numerical tolerances shared by every module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Closed-form algebra (Hermiticity, normalization).
    pub exact: f64,
    /// Results of composed operations (idempotence, completeness, products).
    pub composed: f64,
    /// Smallest eigenvalue accepted for a positive semidefinite operator.
    pub psd_floor: f64,
    /// Allowed deviation of a direction vector from unit length.
    pub unit_norm: f64,
    /// Probabilities below this are treated as zero.
    pub probability_floor: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    exact: 1e-12,
    composed: 1e-10,
    psd_floor: -1e-10,
    unit_norm: 1e-9,
    probability_floor: 1e-12,
};

pub const fn c(re: f64, im: f64) -> Amplitude {
    Amplitude::new(re, im)
}

pub const fn re(re: f64) -> Amplitude {
    Amplitude::new(re, 0.0)
}

fn qubits_for(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_deviation(m: &Matrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn check_square(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    qubits_for(m.nrows())?;
    Ok(m.nrows())
}

/// Outcome names for the `|0⟩` and `|1⟩` states of one qubit, e.g. `("u", "d")`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisLabels {
    pub zero: String,
    pub one: String,
}

impl BasisLabels {
    pub fn new(zero: &str, one: &str) -> Self {
        Self { zero: zero.to_owned(), one: one.to_owned() }
    }
}

/// Normalized state vector of a qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: DVector<Amplitude>,
    labels: Vec<Option<BasisLabels>>,
}

impl PureState {
    /// Builds a state from amplitudes whose squared norm is 1 within the composed tolerance.
    /// The stored vector is renormalized exactly.
    pub fn new(amps: Vec<Amplitude>) -> Result<Self> {
        qubits_for(amps.len())?;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > TOLERANCES.composed {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Self::normalized(amps)
    }

    /// Builds a state by normalizing arbitrary nonzero amplitudes.
    pub fn normalized(amps: Vec<Amplitude>) -> Result<Self> {
        let n = qubits_for(amps.len())?;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || norm_sqr < TOLERANCES.probability_floor {
            return Err(Error::NotNormalized(norm_sqr));
        }
        let scale = 1.0 / norm_sqr.sqrt();
        Ok(Self {
            amps: DVector::from_iterator(amps.len(), amps.into_iter().map(|a| a * scale)),
            labels: vec![None; n],
        })
    }

    /// Computational basis state `|index⟩` of an `n_qubits` register.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::OutOfRange { name: "basis index", value: index as f64 });
        }
        let mut amps = vec![re(0.0); dim];
        amps[index] = re(1.0);
        Self::new(amps)
    }

    /// Single qubit `zero|0⟩ + one|1⟩`, normalized.
    pub fn qubit(zero: Amplitude, one: Amplitude) -> Result<Self> {
        Self::normalized(vec![zero, one])
    }

    fn from_vector(amps: DVector<Amplitude>, labels: Vec<Option<BasisLabels>>) -> Self {
        Self { amps, labels }
    }

    pub fn with_labels(mut self, labels: Vec<Option<BasisLabels>>) -> Result<Self> {
        if labels.len() != self.n_qubits() {
            return Err(Error::DimensionMismatch { expected: self.n_qubits(), found: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    /// Attaches the same labels to every qubit.
    pub fn labelled(self, zero: &str, one: &str) -> Self {
        let n = self.n_qubits();
        Self { labels: vec![Some(BasisLabels::new(zero, one)); n], ..self }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        self.amps.as_slice()
    }

    pub fn vector(&self) -> &DVector<Amplitude> {
        &self.amps
    }

    pub fn labels(&self) -> &[Option<BasisLabels>] {
        &self.labels
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Amplitude> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Equality up to a global phase: `|⟨a|b⟩| ≥ 1 − tol`.
    pub fn equal_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        self.inner(other).map(|z| z.norm() >= 1.0 - tol).unwrap_or(false)
    }

    /// Componentwise amplitude equality.
    pub fn approx_eq(&self, other: &PureState, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.amps.iter().zip(other.amps.iter()).all(|(a, b)| (a - b).norm() <= tol)
    }

    pub fn density(&self) -> MixedState {
        MixedState { rho: &self.amps * self.amps.adjoint() }
    }

    /// `P|ψ⟩` without renormalization.
    fn project(&self, p: &Projector) -> Result<DVector<Amplitude>> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.dim() });
        }
        Ok(&p.0 * &self.amps)
    }

    /// Applies an arbitrary operator and renormalizes, keeping labels.
    pub fn map(&self, op: &Matrix) -> Result<PureState> {
        if op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.ncols() });
        }
        let out = op * &self.amps;
        let mut state = PureState::normalized(out.iter().copied().collect())?;
        if state.n_qubits() == self.n_qubits() {
            state.labels = self.labels.clone();
        }
        Ok(state)
    }
}

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    rho: Matrix,
}

impl MixedState {
    pub fn new(rho: Matrix) -> Result<Self> {
        check_square(&rho)?;
        let dev = hermitian_deviation(&rho);
        if dev > TOLERANCES.exact {
            return Err(Error::NotHermitian(dev));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > TOLERANCES.exact || trace.im.abs() > TOLERANCES.exact {
            return Err(Error::NotDensityOperator(format!("trace = {trace}")));
        }
        let hermitian = (&rho + rho.adjoint()) * re(0.5);
        let min_eig = hermitian.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < TOLERANCES.psd_floor {
            return Err(Error::NotDensityOperator(format!("smallest eigenvalue {min_eig:e}")));
        }
        Ok(Self { rho: hermitian })
    }

    /// `Σ wᵢ ρᵢ`; weights must be nonnegative and sum to 1.
    pub fn convex(parts: &[(f64, &MixedState)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::NotDensityOperator("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut rho = Matrix::zeros(dim, dim);
        for (w, s) in parts {
            if *w < 0.0 {
                return Err(Error::OutOfRange { name: "mixture weight", value: *w });
            }
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
            }
            rho += &s.rho * re(*w);
        }
        Self::new(rho)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self { rho: Matrix::identity(dim, dim) * re(1.0 / dim as f64) }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    pub fn approx_eq(&self, other: &MixedState, tol: f64) -> bool {
        self.dim() == other.dim() && max_abs(&(&self.rho - &other.rho)) <= tol
    }
}

impl From<&PureState> for MixedState {
    fn from(s: &PureState) -> Self {
        s.density()
    }
}

/// Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable(Matrix);

impl Observable {
    pub fn new(m: Matrix) -> Result<Self> {
        check_square(&m)?;
        let dev = hermitian_deviation(&m);
        if dev > TOLERANCES.exact {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim, dim))
    }

    pub fn pauli_x() -> Self {
        Self(Matrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]))
    }

    pub fn pauli_y() -> Self {
        Self(Matrix::from_row_slice(2, 2, &[re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)]))
    }

    pub fn pauli_z() -> Self {
        Self(Matrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)]))
    }

    /// `Σ value_k P_k`.
    pub fn from_projectors(set: &ProjectorSet) -> Self {
        let dim = set.dim();
        let mut m = Matrix::zeros(dim, dim);
        for (p, v) in set.projectors.iter().zip(&set.values) {
            m += &p.0 * re(*v);
        }
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Ascending real spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// The operator acting on `qubit` of an `n_qubits` register, identity elsewhere.
    pub fn on_qubit(&self, qubit: usize, n_qubits: usize) -> Result<Self> {
        Ok(Self(embed(&self.0, qubit, n_qubits)?))
    }
}

/// Hermitian idempotent operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector(Matrix);

impl Projector {
    pub fn new(m: Matrix) -> Result<Self> {
        check_square(&m)?;
        let dev = hermitian_deviation(&m);
        if dev > TOLERANCES.composed {
            return Err(Error::InvalidProjectorSet(format!("projector not Hermitian ({dev:e})")));
        }
        let idem = max_abs(&(&m * &m - &m));
        if idem > TOLERANCES.composed {
            return Err(Error::InvalidProjectorSet(format!("projector not idempotent ({idem:e})")));
        }
        Ok(Self(m))
    }

    /// `|k⟩⟨k|` for the normalized version of `ket`.
    pub fn from_ket(ket: &[Amplitude]) -> Result<Self> {
        let s = PureState::normalized(ket.to_vec())?;
        Ok(Self(&s.amps * s.amps.adjoint()))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim, dim))
    }

    pub fn complement(&self) -> Self {
        Self(Matrix::identity(self.dim(), self.dim()) - &self.0)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn on_qubit(&self, qubit: usize, n_qubits: usize) -> Result<Self> {
        Ok(Self(embed(&self.0, qubit, n_qubits)?))
    }

    /// Product of projectors known to commute (acting on different qubits).
    pub fn and(&self, other: &Projector) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Self::new(&self.0 * &other.0)
    }
}

/// Orthogonal projectors with the eigenvalue attached to each outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorSet {
    projectors: Vec<Projector>,
    values: Vec<f64>,
    labels: Vec<String>,
    complete: bool,
}

impl ProjectorSet {
    /// Complete measurement: projectors must be orthogonal and sum to identity.
    pub fn new(projectors: Vec<Projector>, values: Vec<f64>) -> Result<Self> {
        let set = Self::partial(projectors, values)?;
        let dim = set.dim();
        let mut sum = Matrix::zeros(dim, dim);
        for p in &set.projectors {
            sum += &p.0;
        }
        let dev = max_abs(&(sum - Matrix::identity(dim, dim)));
        if dev > TOLERANCES.composed {
            return Err(Error::InvalidProjectorSet(format!("projectors do not sum to identity ({dev:e})")));
        }
        Ok(Self { complete: true, ..set })
    }

    /// Orthogonal projectors that need not cover the whole space (a filter).
    pub fn partial(projectors: Vec<Projector>, values: Vec<f64>) -> Result<Self> {
        if projectors.is_empty() || projectors.len() != values.len() {
            return Err(Error::InvalidProjectorSet("need one value per projector".into()));
        }
        let dim = projectors[0].dim();
        for p in &projectors {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
        }
        for (i, a) in projectors.iter().enumerate() {
            for b in &projectors[i + 1..] {
                let overlap = max_abs(&(&a.0 * &b.0));
                if overlap > TOLERANCES.composed {
                    return Err(Error::InvalidProjectorSet(format!("projectors not orthogonal ({overlap:e})")));
                }
            }
        }
        let labels = (0..projectors.len()).map(|i| i.to_string()).collect();
        Ok(Self { projectors, values, labels, complete: false })
    }

    /// Rank-one projectors onto each ket.
    pub fn from_kets(kets: &[Vec<Amplitude>], values: Vec<f64>) -> Result<Self> {
        let projectors = kets.iter().map(|k| Projector::from_ket(k)).collect::<Result<Vec<_>>>()?;
        Self::new(projectors, values)
    }

    /// Computational basis `{|0⟩, |1⟩}` of one qubit with values `(+1, −1)`.
    pub fn computational() -> Self {
        Self::from_kets(&[vec![re(1.0), re(0.0)], vec![re(0.0), re(1.0)]], vec![1.0, -1.0])
            .expect("computational basis is valid")
    }

    /// Spectral projectors `(I ± n·σ)/2` of a spin measurement, values `(+1, −1)`.
    pub fn spin(direction: &Direction) -> Self {
        let s = spin_observable_unchecked(direction);
        let id = Matrix::identity(2, 2);
        let plus = Projector((&id + &s.0) * re(0.5));
        let minus = Projector((&id - &s.0) * re(0.5));
        Self::new(vec![plus, minus], vec![1.0, -1.0]).expect("spin projectors are valid")
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.projectors.len() {
            return Err(Error::InvalidProjectorSet("need one label per projector".into()));
        }
        self.labels = labels.iter().map(|s| s.to_string()).collect();
        Ok(self)
    }

    /// The same measurement acting on `qubit` of an `n_qubits` register.
    pub fn on_qubit(&self, qubit: usize, n_qubits: usize) -> Result<Self> {
        let projectors = self
            .projectors
            .iter()
            .map(|p| p.on_qubit(qubit, n_qubits))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { projectors, ..self.clone() })
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn projector(&self, outcome: usize) -> &Projector {
        &self.projectors[outcome]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Kronecker product, with qubit labels concatenated for states.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        let labels = self.labels.iter().chain(&other.labels).cloned().collect();
        PureState::from_vector(self.amps.kronecker(&other.amps), labels)
    }
}

impl Tensor for MixedState {
    fn tensor(&self, other: &Self) -> Self {
        MixedState { rho: self.rho.kronecker(&other.rho) }
    }
}

impl Tensor for Observable {
    fn tensor(&self, other: &Self) -> Self {
        Observable(self.0.kronecker(&other.0))
    }
}

impl Tensor for Projector {
    fn tensor(&self, other: &Self) -> Self {
        Projector(self.0.kronecker(&other.0))
    }
}

fn embed(op: &Matrix, qubit: usize, n_qubits: usize) -> Result<Matrix> {
    if op.nrows() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: op.nrows() });
    }
    if qubit >= n_qubits {
        return Err(Error::InvalidQubitSet(format!("qubit {qubit} of {n_qubits}")));
    }
    let left = Matrix::identity(1 << qubit, 1 << qubit);
    let right_dim = 1usize << (n_qubits - qubit - 1);
    let right = Matrix::identity(right_dim, right_dim);
    Ok(left.kronecker(op).kronecker(&right))
}

/// States against which expectations and Born probabilities can be taken.
pub trait QuantumState {
    fn dim(&self) -> usize;
    /// `⟨ψ|M|ψ⟩` or `tr(ρM)` without any realness check.
    fn raw_expectation(&self, m: &Matrix) -> Amplitude;
}

impl QuantumState for PureState {
    fn dim(&self) -> usize {
        self.amps.len()
    }

    fn raw_expectation(&self, m: &Matrix) -> Amplitude {
        self.amps.dotc(&(m * &self.amps))
    }
}

impl QuantumState for MixedState {
    fn dim(&self) -> usize {
        self.rho.nrows()
    }

    fn raw_expectation(&self, m: &Matrix) -> Amplitude {
        // tr(ρM) = Σ_ij ρ_ij M_ji
        let mut acc = re(0.0);
        let d = self.rho.nrows();
        for i in 0..d {
            for j in 0..d {
                acc += self.rho[(i, j)] * m[(j, i)];
            }
        }
        acc
    }
}

/// Real expectation value of a Hermitian observable.
pub fn expectation<S: QuantumState>(obs: &Observable, state: &S) -> Result<f64> {
    if obs.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: obs.dim() });
    }
    let z = state.raw_expectation(&obs.0);
    if z.im.abs() >= TOLERANCES.composed {
        return Err(Error::ComplexExpectation(z.im));
    }
    Ok(z.re)
}

/// Born probability `⟨ψ|P|ψ⟩`, clamped at zero.
pub fn probability<S: QuantumState>(state: &S, p: &Projector) -> Result<f64> {
    if p.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: p.dim() });
    }
    Ok(state.raw_expectation(&p.0).re.max(0.0))
}

/// One outcome of a projective measurement with its Lüders post-state.
#[derive(Clone, Debug)]
pub struct Branch<S> {
    pub outcome: usize,
    pub value: f64,
    pub probability: f64,
    /// `None` when the outcome has probability below the floor.
    pub post_state: Option<S>,
}

/// States that can be updated by a projective measurement.
pub trait Measurable: QuantumState + Sized {
    fn branches(&self, basis: &ProjectorSet) -> Result<Vec<Branch<Self>>>;
}

impl Measurable for PureState {
    fn branches(&self, basis: &ProjectorSet) -> Result<Vec<Branch<Self>>> {
        basis
            .projectors
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let v = self.project(p)?;
                let prob = v.norm_squared();
                let post_state = (prob >= TOLERANCES.probability_floor).then(|| {
                    PureState::from_vector(v * re(1.0 / prob.sqrt()), self.labels.clone())
                });
                Ok(Branch { outcome: k, value: basis.values[k], probability: prob, post_state })
            })
            .collect()
    }
}

impl Measurable for MixedState {
    fn branches(&self, basis: &ProjectorSet) -> Result<Vec<Branch<Self>>> {
        basis
            .projectors
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let prob = probability(self, p)?;
                let post_state = (prob >= TOLERANCES.probability_floor).then(|| {
                    let m = &p.0 * &self.rho * &p.0 * re(1.0 / prob);
                    MixedState { rho: (&m + m.adjoint()) * re(0.5) }
                });
                Ok(Branch { outcome: k, value: basis.values[k], probability: prob, post_state })
            })
            .collect()
    }
}

/// A sampled measurement result.
#[derive(Clone, Debug)]
pub struct Measurement<S> {
    pub outcome: usize,
    pub value: f64,
    pub probability: f64,
    pub post_state: S,
}

/// Samples one outcome from precomputed branches with a uniform draw `u ∈ [0, 1)`.
///
/// For an incomplete set the draw is conditioned on one of the listed outcomes occurring.
pub fn sample_branch<S: Clone>(branches: &[Branch<S>], u: f64) -> Result<Measurement<S>> {
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    if branches.iter().all(|b| b.probability < TOLERANCES.probability_floor) {
        return Err(Error::MeasurementUndefined(total));
    }
    let mut acc = 0.0;
    let cumulative: Vec<f64> = branches
        .iter()
        .map(|b| {
            acc += b.probability / total;
            acc
        })
        .collect();
    let mut k = rng::pick(&cumulative, u);
    // never land on a zero-probability branch through rounding at the top end
    while branches[k].post_state.is_none() {
        k -= 1;
    }
    let b = &branches[k];
    Ok(Measurement {
        outcome: b.outcome,
        value: b.value,
        probability: b.probability,
        post_state: b.post_state.clone().expect("checked above"),
    })
}

/// Projective measurement with Born sampling and Lüders update.
pub fn project_measure<S, R>(state: &S, basis: &ProjectorSet, rng: &mut R) -> Result<Measurement<S>>
where
    S: Measurable + Clone,
    R: RngCore + ?Sized,
{
    let branches = state.branches(basis)?;
    sample_branch(&branches, rng::uniform(rng))
}

/// `⟨ψ|P_c P_t P_c|ψ⟩ / ⟨ψ|P_c|ψ⟩`.
pub fn conditional_probability(state: &PureState, condition: &Projector, target: &Projector) -> Result<f64> {
    let conditioned = state.project(condition)?;
    let p_cond = conditioned.norm_squared();
    if p_cond < TOLERANCES.probability_floor {
        return Err(Error::UndefinedConditional(p_cond));
    }
    if target.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: target.dim() });
    }
    let joint = (&target.0 * conditioned).norm_squared();
    Ok(joint / p_cond)
}

/// Reduced density operator on `keep` (output qubits in ascending order).
pub fn partial_trace(rho: &MixedState, keep: &[usize]) -> Result<MixedState> {
    let n = rho.n_qubits();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() {
        return Err(Error::InvalidQubitSet("empty keep set".into()));
    }
    if kept.len() != keep.len() {
        return Err(Error::InvalidQubitSet("duplicate qubit index".into()));
    }
    if let Some(&q) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::InvalidQubitSet(format!("qubit {q} out of range for {n} qubits")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let bit = |q: usize| 1usize << (n - 1 - q);
    let compose = |sub: usize, qubits: &[usize]| -> usize {
        let m = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(i, _)| sub & (1 << (m - 1 - i)) != 0)
            .map(|(_, &q)| bit(q))
            .sum()
    };
    let kd = 1usize << kept.len();
    let td = 1usize << traced.len();
    let mut out = Matrix::zeros(kd, kd);
    for i in 0..kd {
        let ri = compose(i, &kept);
        for j in 0..kd {
            let rj = compose(j, &kept);
            let mut acc = re(0.0);
            for t in 0..td {
                let rt = compose(t, &traced);
                acc += rho.rho[(ri | rt, rj | rt)];
            }
            out[(i, j)] = acc;
        }
    }
    MixedState::new(out)
}

/// The three coordinate planes of physical space used for measurement settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xz,
    Yz,
    Xy,
}

impl Plane {
    pub fn name(self) -> &'static str {
        match self {
            Plane::Xz => "xz",
            Plane::Yz => "yz",
            Plane::Xy => "xy",
        }
    }

    fn axes(self) -> (usize, usize) {
        match self {
            Plane::Xz => (0, 2),
            Plane::Yz => (1, 2),
            Plane::Xy => (0, 1),
        }
    }

    fn normal_axis(self) -> usize {
        match self {
            Plane::Xz => 1,
            Plane::Yz => 0,
            Plane::Xy => 2,
        }
    }

    /// Unit vector at `angle` radians, counterclockwise from the plane's first axis
    /// toward its second.
    pub fn direction(self, angle: f64) -> Direction {
        let (a, b) = self.axes();
        let mut v = [0.0; 3];
        v[a] = angle.cos();
        v[b] = angle.sin();
        Direction(v)
    }

    pub fn contains(self, d: &Direction, tol: f64) -> bool {
        d.0[self.normal_axis()].abs() <= tol
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xz" => Ok(Plane::Xz),
            "yz" => Ok(Plane::Yz),
            "xy" => Ok(Plane::Xy),
            other => Err(Error::Parse(format!("unknown plane '{other}' (expected xz, yz or xy)"))),
        }
    }
}

/// Unit 3-vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction([f64; 3]);

impl Direction {
    /// Rejects vectors whose length differs from 1 by more than `1e-9`; no renormalization.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > TOLERANCES.unit_norm {
            return Err(Error::NonUnitDirection(norm));
        }
        Ok(Self(v))
    }

    pub const X: Direction = Direction([1.0, 0.0, 0.0]);
    pub const Y: Direction = Direction([0.0, 1.0, 0.0]);
    pub const Z: Direction = Direction([0.0, 0.0, 1.0]);

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.iter().zip(other.0).map(|(a, b)| a * b).sum()
    }
}

fn spin_observable_unchecked(d: &Direction) -> Observable {
    let [x, y, z] = d.0;
    Observable(Matrix::from_row_slice(2, 2, &[re(z), c(x, -y), c(x, y), re(-z)]))
}

/// `n·σ = n_x σ_x + n_y σ_y + n_z σ_z`.
pub fn spin_observable(direction: [f64; 3]) -> Result<Observable> {
    Ok(spin_observable_unchecked(&Direction::new(direction)?))
}
