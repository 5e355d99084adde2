//! Anisotropic grand Lorentz quasinorms at desk scale.
//!
//! This crate computes two-parameter Lorentz-type quasinorms on the unit
//! square, their "grand" perturbations driven by an extremal search over a
//! small exponent `eps`, the dyadic-sum forms of the same functionals, and
//! the one-dimensional grand Lebesgue norms they generalize. A verification
//! layer evaluates embedding inequalities between these spaces on registered
//! families of test functions and reports empirical constants.
//!
//! The numerical backbone:
//!
//! * iterated decreasing rearrangements of grid functions are exact
//!   (a two-stage sort, [`rearrange`]);
//! * integrals against `dt/t` run on log-spaced grids with a rule that is
//!   exact for pure powers, so piecewise-constant data produces closed-form
//!   values ([`quadrature`], [`profile`]);
//! * every power and sum is accumulated in log space, since weighted
//!   integrands routinely span hundreds of orders of magnitude;
//! * extremal parameters are located by a coarse log-spaced scan followed
//!   by golden-section coordinate refinement ([`search`]).
//!
//! The long-form guide lives in the `book/` directory of the repository and
//! doubles as this crate's doc-tests; see [`guide`].

pub mod error;
pub mod guide;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod rearrange;
pub mod search;

mod evaluate;
mod logspace;

pub mod norms;
pub mod verify;

pub use error::{Error, Result};
pub use norms::{
    dyadic_grand_norm, grand_lebesgue_1d, grand_norm, grand_norm_restricted, grand_weak_norm,
    log_weight_integral_bound, log_weight_weak_norm, lorentz_norm, optimal_epsilon,
    optimal_epsilon_clamped, weak_lorentz_norm, BoundSide, Diagnostics, GrandLebesgueForm,
    LogWeightVariant, NormResult,
};
pub use params::{conjugate, GrandParams, ParamPair, Regime, ThetaPair};
pub use profile::AxisProfile;
pub use quadrature::{
    dyadic_nested_sum, nested_log_integral, refine_until, DyadicTruncation, LogGrid,
    QuadratureRule, DEFAULT_NODES, DEFAULT_REL_TOL, DEFAULT_T_MIN,
};
pub use rearrange::{
    analytic_example1, analytic_power_log, equimeasurable_check, iterated_rearrangement,
    GridFunction2D, Rearrangement2D,
};
pub use search::{EpsBox, SearchConfig};
pub use verify::{
    check_embedding, standard_families, verify_example1, verify_theorem1,
    verify_theorem1_corollary, verify_theorem3, verify_theorem4, verify_theorem5, verify_theorem6,
    verify_theorem7, ChainReport, DyadicReport, EmbeddingReport, Example1Outcome, NormKind,
    ReportSettings, TestFamily,
};
