//! Matching with linearly transferable utility, solved through
//! generalized hide-and-seek games in exact rational arithmetic.
//!
//! A problem's stable outcomes correspond one-to-one with the Nash
//! equilibria of a bimatrix game built from it. The crate builds that game,
//! solves it with Lemke-Howson or support enumeration, maps equilibria back
//! to outcomes, and checks stability exactly. It also tests the TU property,
//! constructs non-exchangeable subproblems, and provides a brute-force
//! oracle over stable outcomes for small instances.

#![allow(clippy::needless_range_loop, clippy::result_large_err)]

pub mod error;
pub mod fuzz;
pub mod game;
pub mod lemke;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod reduction;
pub mod stability;
pub mod support;
pub mod tu;

pub use error::{Error, Result};
pub use game::{
    expected_values, is_equilibrium, BimatrixGame, Deviation, EquilibriumCertificate,
    EquilibriumCheck, MixedProfile, Player,
};
pub use lemke::{lemke_howson, lemke_howson_with, LemkeHowsonOptions, LemkeHowsonRun};
pub use model::{
    Arrangement, LtuProblem, ManyToOneOutcome, ManyToOneProblem, Outcome, Population,
    SubproblemSpec, ValidateOptions,
};
pub use oracle::{
    enumerate_stable, induced_pattern, ComplementarityPattern, OracleCaps, StableRepresentative,
};
pub use rational::Rational;
pub use reduction::{
    equilibrium_to_outcome, equilibrium_to_outcome_n, normalize_outputs, outcome_to_equilibrium,
    outcome_to_equilibrium_n, to_game, to_game_n,
};
pub use stability::{
    blocking_pairs, verify_stable, verify_stable_m2o, Condition, StabilityReport, Violation,
};
pub use support::{enumerate_equilibria, EnumerationOptions};
pub use tu::{
    build_counterexample, check_tu, exchange_test, make_subproblem, rescale_to_tu, Counterexample,
    ExchangeReport, Quadruple, TuWitness,
};
