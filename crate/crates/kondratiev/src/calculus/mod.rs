//! Exact parameter calculus: embedding, compactness, algebra, membership and
//! product rules, decided in rational arithmetic with citation-bearing
//! tri-state verdicts.
//!
//! Every rule is identified by a stable id (`Thm-3.3`, `Cor-5.2`, ...); the
//! catalog of rule statements ships with the guide in `book/src/rules.md`.

mod algebra;
mod embedding;
mod product;

pub use algebra::{is_algebra, member_constant, member_rho_power};
pub use embedding::{embed_compact, embed_continuous};
pub use product::{power_target, product_target, ProductEntry, ProductResult, TargetSpace};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rat, rat_serde, rat_str, Integrability, Rat};

/// The triple (m, a, p) identifying a space K^m_{a,p}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceParams {
    /// Smoothness order m >= 0.
    pub m: u32,
    /// Weight exponent, exact rational.
    #[serde(with = "rat_serde")]
    pub a: Rat,
    /// Integrability: rational p >= 1 or infinity.
    pub p: Integrability,
}

impl SpaceParams {
    pub fn new(m: u32, a: Rat, p: Integrability) -> Self {
        SpaceParams { m, a, p }
    }

    pub fn finite(m: u32, a: Rat, p: Rat) -> Self {
        SpaceParams { m, a, p: Integrability::Finite(p) }
    }

    pub fn validate(&self) -> Result<()> {
        self.p.validate()
    }

    /// a - d/p (with d/infinity = 0).
    pub fn a_shift(&self, d: u32) -> Rat {
        self.a.clone() - self.p.d_over(d)
    }

    /// m - d/p.
    pub fn m_shift(&self, d: u32) -> Rat {
        rat(self.m as i64) - self.p.d_over(d)
    }
}

impl std::fmt::Display for SpaceParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "K[m={}, a={}, p={}]", self.m, rat_str(&self.a), self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Holds,
    Fails,
    Undetermined,
}

/// Tri-state theorem outcome.
///
/// `Undetermined` is returned exactly when the queried parameters fall
/// outside every implemented rule's hypotheses, or when only a sufficient
/// condition exists and it fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Identifier of the rule applied (see the catalog in the guide).
    pub rule: String,
    /// Short statement of what the rule decides.
    pub citation: String,
    /// The concrete inequality that decided, or the scope condition that
    /// failed.
    pub reason: String,
}

impl Verdict {
    pub fn new(outcome: Outcome, rule: &str, citation: &str, reason: String) -> Self {
        Verdict { outcome, rule: rule.into(), citation: citation.into(), reason }
    }

    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }
}

/// A re-checkable exact condition recorded with product-rule entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cond {
    pub label: String,
    #[serde(with = "rat_serde")]
    pub lhs: Rat,
    pub op: CmpOp,
    #[serde(with = "rat_serde")]
    pub rhs: Rat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Cond {
    pub fn new(label: impl Into<String>, lhs: Rat, op: CmpOp, rhs: Rat) -> Self {
        Cond { label: label.into(), lhs, op, rhs }
    }

    /// Re-evaluates the recorded inequality in exact arithmetic.
    pub fn eval(&self) -> bool {
        match self.op {
            CmpOp::Lt => self.lhs < self.rhs,
            CmpOp::Le => self.lhs <= self.rhs,
            CmpOp::Gt => self.lhs > self.rhs,
            CmpOp::Ge => self.lhs >= self.rhs,
            CmpOp::Eq => self.lhs == self.rhs,
        }
    }
}

impl std::fmt::Display for Cond {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = match self.op {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
        };
        write!(f, "{}: {} {} {}", self.label, rat_str(&self.lhs), op, rat_str(&self.rhs))
    }
}

pub(crate) fn require_finite_p<'a>(
    sp: &'a SpaceParams,
    what: &str,
) -> Result<&'a Rat> {
    sp.p.finite().ok_or_else(|| {
        Error::InvalidParams(format!("{what} requires p < infinity, got p = inf"))
    })
}
