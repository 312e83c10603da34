//! Executable quantum-foundations gedanken experiments.
//!
//! * [`qstate`]: dense states, operators, Born-rule measurement, partial trace.
//! * [`bellstates`]: the four Bell states and their spin correlation functions.
//! * [`ensembles`]: seeded two-wing trial ensembles and data-partition averages.
//! * [`inequalities`]: CHSH and Local-Friendliness evaluation and settings search.
//! * [`wigner`]: the four-agent Wigner's-friend scenario under three formalisms.
//! * [`eraser`]: which-way marking and the delayed-choice quantum eraser.

pub mod bellstates;
pub mod ensembles;
pub mod eraser;
pub mod error;
pub mod inequalities;
pub mod qstate;
pub mod rng;
pub mod wigner;

pub use error::{Error, Result};
