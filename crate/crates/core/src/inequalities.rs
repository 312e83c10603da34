//! CHSH and Local-Friendliness inequalities for three settings per party.
//!
//! Both inequalities are written as `lhs ≤ 0`:
//!
//! ```text
//! LF:   −⟨A₁⟩ − ⟨A₂⟩ − ⟨B₁⟩ − ⟨B₂⟩ − ⟨A₁B₁⟩ − 2⟨A₁B₂⟩ − 2⟨A₂B₁⟩ + 2⟨A₂B₂⟩
//!       − ⟨A₂B₃⟩ − ⟨A₃B₂⟩ − ⟨A₃B₃⟩ − 6
//! CHSH: ⟨A₂B₂⟩ − ⟨A₂B₃⟩ − ⟨A₃B₂⟩ − ⟨A₃B₃⟩ − 2
//! ```
//!
//! All settings are in-plane angles (radians) in a common plane, `xy` by default.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bellstates::{make_bell, BellKind};
use crate::error::{Error, Result};
use crate::qstate::{
    expectation, partial_trace, spin_observable, Direction, MixedState, Observable, Plane, PureState, Tensor,
};

const LF_SINGLES: [f64; 3] = [-1.0, -1.0, 0.0];
const LF_CORRELATORS: [[f64; 3]; 3] = [[-1.0, -2.0, 0.0], [-2.0, 2.0, -1.0], [0.0, -1.0, -1.0]];
const LF_CONSTANT: f64 = -6.0;
const CHSH_CORRELATORS: [[f64; 3]; 3] = [[0.0, 0.0, 0.0], [0.0, 1.0, -1.0], [0.0, -1.0, -1.0]];
const CHSH_CONSTANT: f64 = -2.0;

/// Largest CHSH left-hand side any two-qubit state can reach: `2√2 − 2`.
pub const TSIRELSON_CHSH_LHS: f64 = 2.0 * std::f64::consts::SQRT_2 - 2.0;

pub fn chsh_lhs(correlators: &[[f64; 3]; 3]) -> f64 {
    weighted(correlators, &CHSH_CORRELATORS) + CHSH_CONSTANT
}

pub fn lf_lhs(singles_a: &[f64; 3], singles_b: &[f64; 3], correlators: &[[f64; 3]; 3]) -> f64 {
    let singles: f64 = (0..3).map(|i| LF_SINGLES[i] * (singles_a[i] + singles_b[i])).sum();
    singles + weighted(correlators, &LF_CORRELATORS) + LF_CONSTANT
}

fn weighted(corr: &[[f64; 3]; 3], coeff: &[[f64; 3]; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += coeff[i][j] * corr[i][j];
        }
    }
    acc
}

/// Three in-plane measurement angles for each party.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingsSix {
    pub alice: [f64; 3],
    pub bob: [f64; 3],
    pub plane: Plane,
}

impl SettingsSix {
    pub fn new(alice: [f64; 3], bob: [f64; 3], plane: Plane) -> Result<Self> {
        if alice.iter().chain(&bob).any(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig("settings angles must be finite".into()));
        }
        Ok(Self { alice, bob, plane })
    }

    pub fn from_degrees(alice: [f64; 3], bob: [f64; 3], plane: Plane) -> Result<Self> {
        Self::new(alice.map(f64::to_radians), bob.map(f64::to_radians), plane)
    }

    /// CHSH-optimal for the singlet (`a₂ = 0°, a₃ = 90°, b₂ = 135°, b₃ = 45°`), with
    /// `a₁ = b₁ = 67.5°`, the angle maximizing the remaining LF terms.
    pub fn chsh_optimal() -> Self {
        Self::from_degrees([67.5, 0.0, 90.0], [67.5, 135.0, 45.0], Plane::Xy).expect("finite")
    }

    pub fn degrees(&self) -> ([f64; 3], [f64; 3]) {
        (self.alice.map(f64::to_degrees), self.bob.map(f64::to_degrees))
    }

    pub fn rotated(&self, offset: f64) -> Self {
        Self { alice: self.alice.map(|a| a + offset), bob: self.bob.map(|b| b + offset), plane: self.plane }
    }

    /// Angles in the order `a₁, a₂, a₃, b₁, b₂, b₃`.
    pub fn as_array(&self) -> [f64; 6] {
        let [a1, a2, a3] = self.alice;
        let [b1, b2, b3] = self.bob;
        [a1, a2, a3, b1, b2, b3]
    }

    fn from_array(v: [f64; 6], plane: Plane) -> Self {
        Self { alice: [v[0], v[1], v[2]], bob: [v[3], v[4], v[5]], plane }
    }

    fn wrapped(&self) -> Self {
        Self { alice: self.alice.map(|a| a.rem_euclid(TAU)), bob: self.bob.map(|b| b.rem_euclid(TAU)), plane: self.plane }
    }
}

/// Weight on the singlet in the tunable source mixture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuState(f64);

impl MuState {
    pub fn new(mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::OutOfRange { name: "mu", value: mu });
        }
        Ok(Self(mu))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn density(self) -> MixedState {
        let singlet = make_bell(BellKind::PsiMinus).density();
        let hv = PureState::basis(2, 0b01).expect("valid").density();
        let vh = PureState::basis(2, 0b10).expect("valid").density();
        let w = (1.0 - self.0) / 2.0;
        MixedState::convex(&[(self.0, &singlet), (w, &hv), (w, &vh)]).expect("convex mixture of states")
    }
}

/// `μ|Φ⁻⟩⟨Φ⁻| + (1−μ)/2 (|HV⟩⟨HV| + |VH⟩⟨VH|)` with `H = u`, `V = d` and `Φ⁻` the singlet.
pub fn rho_mu(mu: f64) -> Result<MixedState> {
    Ok(MuState::new(mu)?.density())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub state: String,
    pub mu: Option<f64>,
    pub settings: Option<SettingsSix>,
    pub singles_a: [f64; 3],
    pub singles_b: [f64; 3],
    /// `correlators[i][j] = ⟨A_{i+1} B_{j+1}⟩`
    pub correlators: [[f64; 3]; 3],
    pub chsh_lhs: f64,
    pub lf_lhs: f64,
    pub chsh_violated: bool,
    pub lf_violated: bool,
}

impl InequalityReport {
    fn build(state: String, mu: Option<f64>, settings: Option<SettingsSix>, sa: [f64; 3], sb: [f64; 3], corr: [[f64; 3]; 3]) -> Self {
        let chsh = chsh_lhs(&corr);
        let lf = lf_lhs(&sa, &sb, &corr);
        Self {
            state,
            mu,
            settings,
            singles_a: sa,
            singles_b: sb,
            correlators: corr,
            chsh_lhs: chsh,
            lf_lhs: lf,
            chsh_violated: chsh > 0.0,
            lf_violated: lf > 0.0,
        }
    }

    /// Correlators and singles all lie in `[−1, 1]` (with rounding slack).
    pub fn is_physical(&self) -> bool {
        self.correlators.iter().flatten().chain(&self.singles_a).chain(&self.singles_b).all(|v| v.abs() <= 1.0 + 1e-12)
    }
}

fn spin(plane: Plane, angle: f64) -> Result<Observable> {
    spin_observable(plane.direction(angle).components())
}

/// Evaluates both inequalities by reduced-state and joint expectations.
pub fn evaluate(state: &MixedState, settings: &SettingsSix) -> Result<InequalityReport> {
    evaluate_labelled(state, settings, "custom".into(), None)
}

pub fn evaluate_mu(mu: f64, settings: &SettingsSix) -> Result<InequalityReport> {
    evaluate_labelled(&rho_mu(mu)?, settings, format!("rho-mu({mu})"), Some(mu))
}

fn evaluate_labelled(state: &MixedState, s: &SettingsSix, label: String, mu: Option<f64>) -> Result<InequalityReport> {
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: state.dim() });
    }
    let rho_a = partial_trace(state, &[0])?;
    let rho_b = partial_trace(state, &[1])?;
    let a_ops = s.alice.iter().map(|&a| spin(s.plane, a)).collect::<Result<Vec<_>>>()?;
    let b_ops = s.bob.iter().map(|&b| spin(s.plane, b)).collect::<Result<Vec<_>>>()?;
    let mut sa = [0.0; 3];
    let mut sb = [0.0; 3];
    let mut corr = [[0.0; 3]; 3];
    for i in 0..3 {
        sa[i] = expectation(&a_ops[i], &rho_a)?;
        sb[i] = expectation(&b_ops[i], &rho_b)?;
        for j in 0..3 {
            corr[i][j] = expectation(&a_ops[i].tensor(&b_ops[j]), state)?;
        }
    }
    Ok(InequalityReport::build(label, mu, Some(*s), sa, sb, corr))
}

/// Predetermined `±1` values for all six measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicAssignment {
    pub alice: [i8; 3],
    pub bob: [i8; 3],
}

impl DeterministicAssignment {
    /// Values in the order `A₁, A₂, A₃, B₁, B₂, B₃`.
    pub fn new(values: [i8; 6]) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.abs() != 1) {
            return Err(Error::OutOfRange { name: "deterministic value", value: f64::from(*v) });
        }
        Ok(Self { alice: [values[0], values[1], values[2]], bob: [values[3], values[4], values[5]] })
    }

    /// All 64 assignments.
    pub fn all() -> impl Iterator<Item = DeterministicAssignment> {
        (0u8..64).map(|bits| {
            let v = std::array::from_fn(|k| if bits & (1 << (5 - k)) == 0 { 1 } else { -1 });
            DeterministicAssignment::new(v).expect("±1 by construction")
        })
    }
}

pub fn evaluate_deterministic(assignment: &DeterministicAssignment) -> InequalityReport {
    let sa = assignment.alice.map(f64::from);
    let sb = assignment.bob.map(f64::from);
    let corr = std::array::from_fn(|i| std::array::from_fn(|j| sa[i] * sb[j]));
    InequalityReport::build("deterministic".into(), None, None, sa, sb, corr)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Objective {
    MaxChsh,
    MaxLf,
    JointTarget { chsh: f64, lf: f64 },
}

impl FromStr for Objective {
    type Err = Error;

    /// `max-chsh`, `max-lf` or `joint:CHSH,LF`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown search objective '{s}' (max-chsh, max-lf or joint:CHSH,LF)"));
        match s.trim().to_ascii_lowercase().as_str() {
            "max-chsh" => Ok(Objective::MaxChsh),
            "max-lf" => Ok(Objective::MaxLf),
            other => {
                let (c, l) = other.strip_prefix("joint:").and_then(|t| t.split_once(',')).ok_or_else(bad)?;
                let chsh = c.trim().parse().map_err(|_| bad())?;
                let lf = l.trim().parse().map_err(|_| bad())?;
                Ok(Objective::JointTarget { chsh, lf })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Grid points per angle for the coarse scan.
    pub grid_resolution: usize,
    pub refine_iters: usize,
    /// Largest grid used by the joint-target scan, which does not separate over Bob's angles.
    pub joint_grid_cap: usize,
    /// Accepted distance of each left-hand side from a joint target.
    pub joint_tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { grid_resolution: 72, refine_iters: 200, joint_grid_cap: 16, joint_tolerance: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub objective: Objective,
    pub settings: SettingsSix,
    pub report: InequalityReport,
    /// `false` only when a joint target was not reached within tolerance.
    pub target_met: bool,
}

/// Linear-response data of a two-qubit state: `⟨σ_k⊗σ_l⟩` and the local Bloch vectors.
struct Response {
    tensor: [[f64; 3]; 3],
    bloch_a: [f64; 3],
    bloch_b: [f64; 3],
    plane: Plane,
}

impl Response {
    fn of(state: &MixedState, plane: Plane) -> Result<Self> {
        let axes = [Direction::X, Direction::Y, Direction::Z];
        let paulis = axes.iter().map(|d| spin_observable(d.components())).collect::<Result<Vec<_>>>()?;
        let id = Observable::identity(2);
        let mut tensor = [[0.0; 3]; 3];
        let mut bloch_a = [0.0; 3];
        let mut bloch_b = [0.0; 3];
        for k in 0..3 {
            bloch_a[k] = expectation(&paulis[k].tensor(&id), state)?;
            bloch_b[k] = expectation(&id.tensor(&paulis[k]), state)?;
            for l in 0..3 {
                tensor[k][l] = expectation(&paulis[k].tensor(&paulis[l]), state)?;
            }
        }
        Ok(Self { tensor, bloch_a, bloch_b, plane })
    }

    fn single_a(&self, angle: f64) -> f64 {
        self.plane.direction(angle).components().iter().zip(self.bloch_a).map(|(a, r)| a * r).sum()
    }

    fn single_b(&self, angle: f64) -> f64 {
        self.plane.direction(angle).components().iter().zip(self.bloch_b).map(|(b, r)| b * r).sum()
    }

    fn correlator(&self, alpha: f64, beta: f64) -> f64 {
        let a = self.plane.direction(alpha).components();
        let b = self.plane.direction(beta).components();
        a.iter().zip(&self.tensor).map(|(ak, row)| ak * row.iter().zip(&b).map(|(t, bl)| t * bl).sum::<f64>()).sum()
    }

    fn lhs(&self, v: &[f64; 6]) -> (f64, f64) {
        let sa = [self.single_a(v[0]), self.single_a(v[1]), self.single_a(v[2])];
        let sb = [self.single_b(v[3]), self.single_b(v[4]), self.single_b(v[5])];
        let corr = std::array::from_fn(|i| std::array::from_fn(|j| self.correlator(v[i], v[3 + j])));
        (chsh_lhs(&corr), lf_lhs(&sa, &sb, &corr))
    }
}

fn score(objective: Objective, (chsh, lf): (f64, f64)) -> f64 {
    match objective {
        Objective::MaxChsh => chsh,
        Objective::MaxLf => lf,
        Objective::JointTarget { chsh: c, lf: l } => -((chsh - c).powi(2) + (lf - l).powi(2)),
    }
}

struct Tables {
    angles: Vec<f64>,
    sa: Vec<f64>,
    sb: Vec<f64>,
    /// `corr[i * n + j] = E(angle_i, angle_j)`
    corr: Vec<f64>,
}

impl Tables {
    fn new(resp: &Response, n: usize) -> Self {
        let angles: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        let sa = angles.iter().map(|&a| resp.single_a(a)).collect();
        let sb = angles.iter().map(|&b| resp.single_b(b)).collect();
        let corr = angles.iter().flat_map(|&a| angles.iter().map(move |&b| resp.correlator(a, b))).collect();
        Self { angles, sa, sb, corr }
    }

    fn e(&self, i: usize, j: usize) -> f64 {
        self.corr[i * self.angles.len() + j]
    }
}

/// Scans every Alice triple and, because a linear objective separates over Bob's
/// angles, picks each Bob angle independently.
fn scan_linear(t: &Tables, coeff: &[[f64; 3]; 3], singles: [f64; 3], constant: f64) -> (f64, [usize; 6]) {
    let n = t.angles.len();
    let best_per_first: Vec<(f64, [usize; 6])> = (0..n)
        .into_par_iter()
        .map(|i1| {
            let mut best = (f64::NEG_INFINITY, [0usize; 6]);
            for i2 in 0..n {
                for i3 in 0..n {
                    let idx = [i1, i2, i3];
                    let mut total = constant;
                    for k in 0..3 {
                        total += singles[k] * t.sa[idx[k]];
                    }
                    let mut bobs = [0usize; 3];
                    for j in 0..3 {
                        let mut bj = (f64::NEG_INFINITY, 0usize);
                        for b in 0..n {
                            let mut v = singles[j] * t.sb[b];
                            for k in 0..3 {
                                v += coeff[k][j] * t.e(idx[k], b);
                            }
                            if v > bj.0 {
                                bj = (v, b);
                            }
                        }
                        total += bj.0;
                        bobs[j] = bj.1;
                    }
                    if total > best.0 {
                        best = (total, [i1, i2, i3, bobs[0], bobs[1], bobs[2]]);
                    }
                }
            }
            best
        })
        .collect();
    first_best(best_per_first)
}

fn scan_joint(t: &Tables, chsh_target: f64, lf_target: f64) -> (f64, [usize; 6]) {
    let n = t.angles.len();
    let best_per_first: Vec<(f64, [usize; 6])> = (0..n)
        .into_par_iter()
        .map(|i1| {
            let mut best = (f64::NEG_INFINITY, [0usize; 6]);
            let mut idx = [i1, 0, 0, 0, 0, 0];
            for i2 in 0..n {
                idx[1] = i2;
                for i3 in 0..n {
                    idx[2] = i3;
                    for j1 in 0..n {
                        idx[3] = j1;
                        for j2 in 0..n {
                            idx[4] = j2;
                            for j3 in 0..n {
                                idx[5] = j3;
                                let corr: [[f64; 3]; 3] =
                                    std::array::from_fn(|i| std::array::from_fn(|j| t.e(idx[i], idx[3 + j])));
                                let sa = [t.sa[idx[0]], t.sa[idx[1]], t.sa[idx[2]]];
                                let sb = [t.sb[idx[3]], t.sb[idx[4]], t.sb[idx[5]]];
                                let s = score(
                                    Objective::JointTarget { chsh: chsh_target, lf: lf_target },
                                    (chsh_lhs(&corr), lf_lhs(&sa, &sb, &corr)),
                                );
                                if s > best.0 {
                                    best = (s, idx);
                                }
                            }
                        }
                    }
                }
            }
            best
        })
        .collect();
    first_best(best_per_first)
}

fn first_best(candidates: Vec<(f64, [usize; 6])>) -> (f64, [usize; 6]) {
    candidates.into_iter().fold((f64::NEG_INFINITY, [0; 6]), |acc, c| if c.0 > acc.0 { c } else { acc })
}

/// Coordinate ascent with step halving.
fn refine(resp: &Response, objective: Objective, start: [f64; 6], step0: f64, iters: usize) -> [f64; 6] {
    let mut cur = start;
    let mut cur_score = score(objective, resp.lhs(&cur));
    let mut step = step0;
    for _ in 0..iters {
        let mut improved = false;
        for k in 0..6 {
            for dir in [1.0, -1.0] {
                let mut trial = cur;
                trial[k] += dir * step;
                let s = score(objective, resp.lhs(&trial));
                if s > cur_score {
                    cur = trial;
                    cur_score = s;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
    }
    cur
}

/// Grid scan followed by coordinate refinement. Deterministic.
pub fn search_settings(state: &MixedState, plane: Plane, objective: Objective, config: &SearchConfig) -> Result<SearchOutcome> {
    if config.grid_resolution < 8 {
        return Err(Error::OutOfRange { name: "grid_resolution", value: config.grid_resolution as f64 });
    }
    let resp = Response::of(state, plane)?;
    let (res, (_, idx)) = match objective {
        Objective::MaxChsh => {
            let t = Tables::new(&resp, config.grid_resolution);
            (config.grid_resolution, scan_linear(&t, &CHSH_CORRELATORS, [0.0; 3], CHSH_CONSTANT))
        }
        Objective::MaxLf => {
            let t = Tables::new(&resp, config.grid_resolution);
            (config.grid_resolution, scan_linear(&t, &LF_CORRELATORS, LF_SINGLES, LF_CONSTANT))
        }
        Objective::JointTarget { chsh, lf } => {
            let n = config.grid_resolution.min(config.joint_grid_cap.max(8));
            let t = Tables::new(&resp, n);
            (n, scan_joint(&t, chsh, lf))
        }
    };
    let start = idx.map(|i| TAU * i as f64 / res as f64);
    let step0 = PI / res as f64;
    let best = refine(&resp, objective, start, step0, config.refine_iters);
    let settings = SettingsSix::from_array(best, plane).wrapped();
    let report = evaluate(state, &settings)?;
    let target_met = match objective {
        Objective::JointTarget { chsh, lf } => {
            (report.chsh_lhs - chsh).abs() <= config.joint_tolerance && (report.lf_lhs - lf).abs() <= config.joint_tolerance
        }
        _ => true,
    };
    Ok(SearchOutcome { objective, settings, report, target_met })
}

/// Reports for each `μ` at fixed settings.
pub fn mu_sweep(settings: &SettingsSix, mus: &[f64]) -> Result<Vec<InequalityReport>> {
    mus.iter().map(|&mu| evaluate_mu(mu, settings)).collect()
}

/// Sweep CSV with columns `mu,chsh_lhs,lf_lhs`.
pub fn write_sweep_csv<W: Write>(reports: &[InequalityReport], mut w: W) -> Result<()> {
    writeln!(w, "mu,chsh_lhs,lf_lhs")?;
    for r in reports {
        let mu = r.mu.map(|m| m.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{}", mu, r.chsh_lhs, r.lf_lhs)?;
    }
    Ok(())
}
