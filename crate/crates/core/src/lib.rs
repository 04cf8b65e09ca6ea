//! Synthesis of bounded finite-state controllers for stochastic planning.
//!
//! The probabilistic engine ([`pandor`]) searches for a controller with at
//! most `N` states whose likelihood of terminating in a goal is at least a
//! requested bound, optionally together with a bound on the likelihood of
//! terminating at all. [`andor`] is the classical deterministic baseline and
//! [`oracle`] computes exact measures of a fixed controller.

pub mod andor;
pub mod domains;
pub mod dot;
pub mod error;
pub mod format;
pub mod ledger;
pub mod model;
pub mod oracle;
pub mod pandor;
pub mod prob;

pub use error::{ModelError, ParseError, ParseErrorKind};
pub use model::{
    Act, ActionId, Controller, Edge, Environment, EnvironmentBuilder, History, ObsId, PlanningProblem, StateId,
    SynthesisRequest, SystemStep,
};
pub use oracle::{exact_measures, Measures};
pub use pandor::{pandor_synth, SynthesisOutcome};
pub use prob::{Rational, Scalar};
