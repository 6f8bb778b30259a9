//! Exact mean profits for Toral's cooperative Parrondo games on a ring of
//! `n` players, computed on symmetry-reduced Markov chains and checked by
//! simulation.

pub mod error;
pub mod game;
pub mod matrix;
pub mod means;
pub mod montecarlo;
pub mod region;
pub mod scalar;
pub mod stationary;
pub mod symmetry;

pub use error::{Error, Result};
pub use game::{build_game_a, build_game_b, build_game_b_signed, Configuration, ParamVector, PatternSpec};
pub use matrix::{product_support_size, DenseMatrix, TransitionMatrix};
pub use means::{
    closed_form_n3, full_state_mean, mean, mean_game_b, mean_mixture, mean_mixture_by_substitution,
    mean_pattern, mean_pattern_with_group, MeanCalculator, ProfitReport,
};
pub use scalar::{Rational, Scalar};
pub use stationary::{classify_boundary, pattern_stationary, solve_stationary, ReducibleCase, StationaryResult};
pub use symmetry::{build_classes, quotient, GroupKind, QuotientModel, SymmetryGroup};
