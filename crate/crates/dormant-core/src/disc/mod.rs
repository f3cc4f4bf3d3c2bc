//! The level-N logarithmic operator calculus on the formal disc.
//!
//! `algebra` holds the abstract operator algebra, its scalar action on
//! truncated series, monodromy and solution computations; `local` holds the
//! split local models and the pull-back / descent pair between parabolic
//! and flat data.

pub mod algebra;
pub mod local;

pub use algebra::{
    apply_element, apply_operator, b_coeff, generalized_binomial_mod_p, monodromy,
    nabla_action_scalar, solution_exponents, OperatorAlgebraElement, TruncatedSeries,
};
pub use local::{
    canonical_flag, local_descent, local_det, local_pullback, transitivity_check, FlagStep,
    LocalDatum, LocalFlatDatum, LocalParabolicDatum,
};
