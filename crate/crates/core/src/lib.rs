//! Extensive game forms with chance and information sets, dominance checkers
//! (weak / obvious, per-realization and in expectation), probabilistic
//! verification schemes with fines, direct-revelation mechanism constructions,
//! the sequential public-project mechanism with verification accounting, and
//! the softmax outcome-selection mechanism with partial verification.
//!
//! Everything is finite and exhaustively enumerable: domains, trees, chance
//! supports and strategy spaces are all explicit, so the game-theoretic
//! definitions become decidable checks. All randomized routines take explicit
//! seeds and derive one counter-based stream per trial, so results are
//! byte-identical regardless of thread count.

pub mod direct;
pub mod dominance;
pub mod exec;
pub mod exponential;
pub mod fixtures;
pub mod game;
pub mod public_project;
pub mod rng;
pub mod stats;
pub mod valuation;
pub mod verification;

pub use game::{
    ChanceRealization, DepartureAnalysis, DeparturePoint, Diagnostic, GameError, GameForm,
    MechanismFile, PlayTrace, Strategy,
};
pub use valuation::ValuationTable;
