//! Parameter calculus and numerical verification for Kondratiev-type
//! weighted Sobolev spaces K^m_{a,p}(D, M) on model polyhedral domains.
//!
//! The crate has two halves that check each other:
//!
//! * an exact decision engine ([`calculus`]) that answers embedding,
//!   compactness, algebra, membership and product questions by comparing
//!   rational parameters against sharp thresholds, and
//! * a numerical side ([`geometry`], [`testfuncs`], [`norms`]) that evaluates
//!   the weighted norms of concrete analytic functions by per-dyadic-shell
//!   quadrature and detects membership from the decay of the shell series.
//!
//! The [`verify`] module binds the two together into executable suites; the
//! companion `kondratiev` binary exposes everything on the command line. The
//! mdbook guide under `book/` walks through the concepts; its code snippets
//! are compiled as doctests via the [`guide`] module.

pub mod calculus;
pub mod error;
pub mod geometry;
pub mod guide;
pub mod jet;
pub mod norms;
pub mod rational;
pub mod testfuncs;
pub mod verify;

pub use calculus::{
    embed_compact, embed_continuous, is_algebra, member_constant, member_rho_power, power_target,
    product_target, Outcome, ProductResult, SpaceParams, Verdict,
};
pub use error::{Error, Result};
pub use geometry::DomainSpec;
pub use norms::{extremal_norm, kondratiev_norm, membership_detect, Membership, NormResult, QuadSpec};
pub use rational::{parse_rat, rat, ratq, Integrability, Rat};
pub use testfuncs::TestFunction;
