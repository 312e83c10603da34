//! The four Bell states and their spin correlation functions.
//!
//! In-plane angles are measured counterclockwise from the first axis of the
//! plane (`x` for `xz` and `xy`, `y` for `yz`) toward the second.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{expectation, re, spin_observable, Direction, Plane, PureState, Tensor, TOLERANCES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellKind {
    /// The spin singlet `(|ud⟩ − |du⟩)/√2`.
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::PsiMinus, BellKind::PsiPlus, BellKind::PhiMinus, BellKind::PhiPlus];

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PsiMinus => "psi-minus",
            BellKind::PsiPlus => "psi-plus",
            BellKind::PhiMinus => "phi-minus",
            BellKind::PhiPlus => "phi-plus",
        }
    }

    /// Plane in which aligned measurements always agree; `None` for the singlet,
    /// which anticorrelates for every aligned pair.
    pub fn symmetry_plane(self) -> Option<Plane> {
        match self {
            BellKind::PsiMinus => None,
            BellKind::PsiPlus => Some(Plane::Xy),
            BellKind::PhiMinus => Some(Plane::Yz),
            BellKind::PhiPlus => Some(Plane::Xz),
        }
    }

    /// Coefficients `(c_x, c_y, c_z)` of `⟨σ_a ⊗ σ_b⟩ = c_x a_x b_x + c_y a_y b_y + c_z a_z b_z`.
    pub fn correlation_signs(self) -> [f64; 3] {
        match self {
            BellKind::PsiMinus => [-1.0, -1.0, -1.0],
            BellKind::PsiPlus => [1.0, 1.0, -1.0],
            BellKind::PhiMinus => [-1.0, 1.0, 1.0],
            BellKind::PhiPlus => [1.0, -1.0, 1.0],
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "psi-minus" | "singlet" => Ok(BellKind::PsiMinus),
            "psi-plus" => Ok(BellKind::PsiPlus),
            "phi-minus" => Ok(BellKind::PhiMinus),
            "phi-plus" => Ok(BellKind::PhiPlus),
            other => Err(Error::Parse(format!("unknown Bell state '{other}'"))),
        }
    }
}

/// Alice's and Bob's measurement axes, optionally tagged with a common plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDirection {
    pub alice: Direction,
    pub bob: Direction,
    pub plane: Option<Plane>,
}

impl MeasurementDirection {
    pub fn new(alice: Direction, bob: Direction, plane: Option<Plane>) -> Result<Self> {
        if let Some(p) = plane {
            if !p.contains(&alice, TOLERANCES.unit_norm) || !p.contains(&bob, TOLERANCES.unit_norm) {
                return Err(Error::OutOfPlane(p.name()));
            }
        }
        Ok(Self { alice, bob, plane })
    }

    /// Both axes in `plane` at in-plane angles `alpha` (Alice) and `beta` (Bob), radians.
    pub fn in_plane(plane: Plane, alpha: f64, beta: f64) -> Self {
        Self { alice: plane.direction(alpha), bob: plane.direction(beta), plane: Some(plane) }
    }

    pub fn aligned(d: Direction) -> Self {
        Self { alice: d, bob: d, plane: None }
    }
}

/// The Bell state in the `σ_z` eigenbasis, qubits labelled `u`/`d`.
pub fn make_bell(kind: BellKind) -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match kind {
        BellKind::PsiMinus => [0.0, h, -h, 0.0],
        BellKind::PsiPlus => [0.0, h, h, 0.0],
        BellKind::PhiMinus => [h, 0.0, 0.0, -h],
        BellKind::PhiPlus => [h, 0.0, 0.0, h],
    };
    PureState::new(amps.iter().map(|&a| re(a)).collect())
        .expect("Bell states are normalized")
        .labelled("u", "d")
}

/// Closed-form correlation polynomial in the components of `â` and `b̂`.
pub fn correlation_closed(kind: BellKind, dirs: &MeasurementDirection) -> f64 {
    let a = dirs.alice.components();
    let b = dirs.bob.components();
    let s = kind.correlation_signs();
    s[0] * a[0] * b[0] + s[1] * a[1] * b[1] + s[2] * a[2] * b[2]
}

/// `⟨Bell| (â·σ) ⊗ (b̂·σ) |Bell⟩` evaluated numerically.
pub fn correlation_numeric(kind: BellKind, dirs: &MeasurementDirection) -> Result<f64> {
    let joint = spin_observable(dirs.alice.components())?.tensor(&spin_observable(dirs.bob.components())?);
    expectation(&joint, &make_bell(kind))
}
