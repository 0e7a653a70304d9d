//! Multilinear polynomial algebra over F2 and F3 backing the counting
//! argument for the hardest query classes, (x∧y)⊕z and x+y+z=1.
//!
//! A stored set S is turned into a product polynomial P_S over the 3s memory
//! variables whose value on a scheme memory σ(S') is the indicator of
//! S = S'; linear independence of the P_S then caps how many sets fit in a
//! given space. `restrict` adds the sharper version: on probe maps whose
//! A/B-graph keeps producing intersecting or trapping edge pairs, P_S can be
//! rewritten into a strictly lower-degree polynomial that agrees with it on
//! every memory excluding a small trap set. Good-gainer status is checked by
//! exhaustive subset enumeration under an explicit budget — the sampling
//! argument that guarantees it at scale stays on paper.

mod poly;
mod restrict;

pub use poly::{
    build_ps, element_factor, independence_check, Field, IndependenceReport, MultilinearPoly,
    PolyFunction,
};
pub use restrict::{
    gains, is_good_gainer, restrict_polynomial, GainEvidence, RestrictStep, RestrictionResult,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("subset enumeration needs {needed} combinations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("no intersecting or trapping pair available at step {step}")]
    NoGainAvailable { step: usize },
}
