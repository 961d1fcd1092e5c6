//! Algebra property and membership of the elementary functions 1 and
//! rho~^b (times a cutoff in the model case).

use super::{require_finite_p, Outcome, SpaceParams, Verdict};
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::rational::{rat, rat_str, Integrability, Rat};

const CIT_ALGEBRA: &str =
    "algebra under pointwise multiplication: a >= d/p and (1 < p < inf with m > d/p, or p = 1 with m >= d)";
const CIT_MEMBER_ONE: &str = "membership of the constant 1: a < kappa/p (p < inf), a <= 0 (p = inf)";
const CIT_MEMBER_RHO: &str =
    "membership of rho~^b in K^m_{a+b,p}: a < kappa/p (p < inf), a <= 0 (p = inf)";

/// The sufficient algebra condition shared by all domain kinds.
fn algebra_condition(sp: &SpaceParams, d: u32, p: &Rat) -> (bool, String) {
    let dp = sp.p.d_over(d);
    let weight_ok = sp.a >= dp;
    let smooth_ok = if *p == rat(1) {
        sp.m >= d
    } else {
        rat(sp.m as i64) > dp
    };
    let reason = format!(
        "a = {} {} d/p = {}; {}",
        rat_str(&sp.a),
        if weight_ok { ">=" } else { "<" },
        rat_str(&dp),
        if *p == rat(1) {
            format!("p = 1: m = {} {} d = {}", sp.m, if smooth_ok { ">=" } else { "<" }, d)
        } else {
            format!(
                "p = {}: m = {} {} d/p = {}",
                rat_str(p),
                sp.m,
                if smooth_ok { ">" } else { "<=" },
                rat_str(&dp)
            )
        }
    );
    (weight_ok && smooth_ok, reason)
}

/// Is K^m_{a,p}(D, M) an algebra with respect to pointwise multiplication?
///
/// The condition is necessary and sufficient on smooth cones and on the
/// model pair with l = 0; on every other supported pair only sufficiency is
/// known, so a failed condition yields `Undetermined`.
pub fn is_algebra(sp: &SpaceParams, dom: &DomainSpec) -> Result<Verdict> {
    sp.validate()?;
    dom.validate()?;
    let p = require_finite_p(sp, "is_algebra")?.clone();
    let d = dom.d();
    let (ok, reason) = algebra_condition(sp, d, &p);
    let iff_domain = matches!(dom, DomainSpec::SmoothCone { .. })
        || matches!(dom, DomainSpec::Model { l: 0, .. });
    let (rule, citation): (&str, &str) = match dom {
        DomainSpec::SmoothCone { .. } => ("Cor-5.16", CIT_ALGEBRA),
        DomainSpec::Model { l: 0, .. } => ("Cor-5.2", CIT_ALGEBRA),
        _ => ("Thm-5.15", CIT_ALGEBRA),
    };
    let outcome = if ok {
        Outcome::Holds
    } else if iff_domain {
        Outcome::Fails
    } else {
        Outcome::Undetermined
    };
    let reason = if !ok && !iff_domain {
        format!("{reason}; only sufficiency is known on a {} pair", dom.kind_name())
    } else {
        reason
    };
    Ok(Verdict::new(outcome, rule, citation, reason))
}

fn membership_threshold(a_eff: &Rat, p: &Integrability, kappa: u32) -> (bool, String) {
    match p {
        Integrability::Finite(p) => {
            let thr = rat(kappa as i64) / p.clone();
            let ok = *a_eff < thr;
            (
                ok,
                format!(
                    "a = {} {} kappa/p = {}",
                    rat_str(a_eff),
                    if ok { "<" } else { ">=" },
                    rat_str(&thr)
                ),
            )
        }
        Integrability::Infinity => {
            let ok = *a_eff <= rat(0);
            (
                ok,
                format!("p = inf: a = {} {} 0", rat_str(a_eff), if ok { "<=" } else { ">" }),
            )
        }
    }
}

/// Does the constant function 1 belong to K^m_{a,p}(D, M)?
///
/// Defined on the bounded pairs only; the constant is not integrable over
/// the unbounded model domain, which is rejected as an input.
pub fn member_constant(sp: &SpaceParams, dom: &DomainSpec) -> Result<Verdict> {
    sp.validate()?;
    dom.validate()?;
    if !dom.is_bounded() {
        return Err(Error::InvalidParams(
            "member_constant is not defined on the unbounded model pair".into(),
        ));
    }
    let kappa = dom.transverse_dim();
    let (ok, reason) = membership_threshold(&sp.a, &sp.p, kappa);
    let outcome = if ok { Outcome::Holds } else { Outcome::Fails };
    Ok(Verdict::new(
        outcome,
        "Lem-6.1",
        CIT_MEMBER_ONE,
        format!("kappa = {kappa} ({}): {reason}", dom.kind_name()),
    ))
}

/// Does rho~^b (times the fixed cutoff psi in the model case) belong to the
/// queried space K^m_{a+b,p}? `sp.a` is the queried exponent a+b; the rule
/// compares a = sp.a - b against kappa/p.
pub fn member_rho_power(b: &Rat, sp: &SpaceParams, dom: &DomainSpec) -> Result<Verdict> {
    sp.validate()?;
    dom.validate()?;
    let a_eff = sp.a.clone() - b.clone();
    let kappa = dom.transverse_dim();
    let (ok, reason) = membership_threshold(&a_eff, &sp.p, kappa);
    let rule = if dom.is_bounded() { "Lem-6.2" } else { "Lem-6.3" };
    let outcome = if ok { Outcome::Holds } else { Outcome::Fails };
    Ok(Verdict::new(
        outcome,
        rule,
        CIT_MEMBER_RHO,
        format!(
            "query exponent a+b = {}, b = {}, kappa = {kappa} ({}): {reason}",
            rat_str(&sp.a),
            rat_str(b),
            dom.kind_name()
        ),
    ))
}
