//! Product and power rules: enumerates every multiplication estimate whose
//! hypotheses hold for the given factor spaces and emits the target space of
//! each, together with a re-checkable hypothesis record.

use num::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{CmpOp, Cond, SpaceParams};
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::rational::{rat, rat_serde, rat_str, Integrability, Rat};

/// Target space of a product estimate. When `a_open_sup` is set the rule
/// holds for every exponent strictly below `a` (an exclusive supremum), not
/// for `a` itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpace {
    pub m: u32,
    #[serde(with = "rat_serde")]
    pub a: Rat,
    pub a_open_sup: bool,
    pub p: Integrability,
}

impl TargetSpace {
    fn closed(m: u32, a: Rat, p: Integrability) -> Self {
        TargetSpace { m, a, a_open_sup: false, p }
    }

    pub fn as_space(&self) -> Option<SpaceParams> {
        if self.a_open_sup {
            None
        } else {
            Some(SpaceParams::new(self.m, self.a.clone(), self.p.clone()))
        }
    }
}

impl std::fmt::Display for TargetSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.a_open_sup {
            write!(f, "K[m={}, a < {}, p={}]", self.m, rat_str(&self.a), self.p)
        } else {
            write!(f, "K[m={}, a={}, p={}]", self.m, rat_str(&self.a), self.p)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub rule: String,
    pub citation: String,
    pub target: TargetSpace,
    pub hypotheses: Vec<Cond>,
    /// A requirement on the factors that is not expressible in the space
    /// parameters alone (e.g. boundedness); entries carrying one do not
    /// produce an unconditional target.
    pub side_condition: Option<String>,
}

impl ProductEntry {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(Cond::eval)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductResult {
    pub applicable: Vec<ProductEntry>,
    /// The unconditional entry whose target is maximal under the embedding
    /// order (it embeds into the other unconditional targets).
    pub best: Option<ProductEntry>,
}

impl ProductResult {
    fn assemble(applicable: Vec<ProductEntry>, d: u32) -> Self {
        let best = pick_best(&applicable, d);
        ProductResult { applicable, best }
    }
}

/// Embedding order on closed targets: does src embed into tgt?
fn target_embeds(src: &TargetSpace, tgt: &TargetSpace, d: u32) -> bool {
    let (s, t) = match (src.as_space(), tgt.as_space()) {
        (Some(s), Some(t)) => (s, t),
        _ => return false,
    };
    if s.m < 1 {
        // K^0 embeds into K^0 with the same p and smaller a; fall back to
        // the monotone comparison.
        return s.p == t.p && s.m >= t.m && s.a >= t.a;
    }
    crate::calculus::embed_continuous(&s, &t, &DomainSpec::Model { d, l: 0 })
        .map(|v| v.holds())
        .unwrap_or(false)
}

fn pick_best(entries: &[ProductEntry], d: u32) -> Option<ProductEntry> {
    let closed: Vec<&ProductEntry> = entries
        .iter()
        .filter(|e| e.side_condition.is_none() && !e.target.a_open_sup)
        .collect();
    if closed.is_empty() {
        return None;
    }
    // Prefer an entry that embeds into every other closed target.
    for e in &closed {
        if closed
            .iter()
            .all(|o| std::ptr::eq(*e, *o) || target_embeds(&e.target, &o.target, d))
        {
            return Some((*e).clone());
        }
    }
    // Otherwise the first maximal one (no other strictly above it).
    for e in &closed {
        let dominated = closed.iter().any(|o| {
            !std::ptr::eq(*e, *o)
                && target_embeds(&o.target, &e.target, d)
                && !target_embeds(&e.target, &o.target, d)
        });
        if !dominated {
            return Some((*e).clone());
        }
    }
    None
}

fn floor_u32(r: &Rat) -> Option<u32> {
    let f = r.floor();
    f.to_integer().to_u32()
}

fn cond(label: &str, lhs: Rat, op: CmpOp, rhs: Rat) -> Cond {
    Cond::new(label, lhs, op, rhs)
}

/// Algebra-grade hypothesis on (m, p): 1 < p with m > d/p, or p = 1 with
/// m >= d. Returns the conditions (whether satisfied or not) and the truth.
fn sobolev_algebra_conds(m: u32, p: &Rat, d: u32) -> (Vec<Cond>, bool) {
    let dp = rat(d as i64) / p.clone();
    let conds = if *p == rat(1) {
        vec![
            cond("p = 1", p.clone(), CmpOp::Eq, rat(1)),
            cond("m >= d", rat(m as i64), CmpOp::Ge, rat(d as i64)),
        ]
    } else {
        vec![
            cond("p > 1", p.clone(), CmpOp::Gt, rat(1)),
            cond("m > d/p", rat(m as i64), CmpOp::Gt, dp),
        ]
    };
    let ok = conds.iter().all(Cond::eval);
    (conds, ok)
}

const CIT_51: &str = "same-space product lands in K^m_{2a - d/p, p} when the unweighted order-m space is an algebra";
const CIT_53: &str = "product of K^{m1}_{a1,p} and K^{m2}_{a2,p} lands in K^m_{a1+a2-d/p,p} for m <= min(m1,m2), m above the algebra grade";
const CIT_55: &str = "same-space product with d/(2p) <= m0 < d/p lands in K^{m1}_{2(a0 - d/(2p)), p} for m1 <= 2 m0 - d/p";
const CIT_57: &str = "mixed-smoothness product, m0 + m1 >= d/p, m0, m1 < d/p: target K^{m2}_{a0+a1-d/p, p} for m2 <= m0 + m1 - d/p";
const CIT_58: &str = "same-space product with integrability shift: target K^m_{a1, t}, t = d/(2d/p - m), for every a1 < 2a0 - m";
const CIT_510: &str = "bounded-factor product bound ||uv|| <= c(||u|| ||v||_inf + ||v|| ||u||_inf)";
const CIT_512: &str = "multiplier bound ||uv|| <= c ||v : K^m_{0,inf}|| ||u : K^m_{a,p}||";
const CIT_514: &str = "damped multiplier: ||uv : K^m_{a,p}|| <= c ||v : K^{m+n}_{a+n,p}|| ||u : K^m_{a,p}|| for a >= d/p - n";
const CIT_59I: &str = "n-th power of an algebra-grade space lands in K^m_{na - d(n-1)/p, p}";
const CIT_59II: &str = "square with d/(2p) <= m0 < d/p lands in K^{m1}_{2a - d/p, p} for m1 <= 2 m0 - d/p";
const CIT_59III: &str = "square with integrability shift: K^m_{a1,t}, t = d/(2d/p - m), for every a1 < 2a - m";
const CIT_REM59: &str = "iterated mixed-smoothness power for integer d/p: K^{nm-(n-1)d/p}_{na-(n-1)d/p, p}";

/// Enumerates every product rule applicable to u * v on the given domain and
/// reports the target spaces. Same-p rules require u.p = v.p; the only mixed
/// rule pairs a finite-p factor with a K^m_{0,inf}-type multiplier.
pub fn product_target(
    u: &SpaceParams,
    v: &SpaceParams,
    dom: &DomainSpec,
) -> Result<ProductResult> {
    u.validate()?;
    v.validate()?;
    dom.validate()?;
    let d = dom.d();

    if u.p != v.p {
        let mut entries = Vec::new();
        for (base, mult) in [(u, v), (v, u)] {
            if base.p.is_infinite() || !mult.p.is_infinite() {
                continue;
            }
            // Prop 5.12 via monotonicity: the multiplier's declared space
            // K^{m_v}_{a_v, inf} embeds into K^{m_u}_{0, inf} iff m_v >= m_u
            // and a_v >= 0.
            let conds = vec![
                cond("m_u >= 1", rat(base.m as i64), CmpOp::Ge, rat(1)),
                cond("m_v >= m_u", rat(mult.m as i64), CmpOp::Ge, rat(base.m as i64)),
                cond("a_v >= 0", mult.a.clone(), CmpOp::Ge, rat(0)),
            ];
            if conds.iter().all(Cond::eval) {
                entries.push(ProductEntry {
                    rule: "Prop-5.12".into(),
                    citation: CIT_512.into(),
                    target: TargetSpace::closed(base.m, base.a.clone(), base.p.clone()),
                    hypotheses: conds,
                    side_condition: None,
                });
            }
        }
        if entries.is_empty() {
            return Err(Error::MixedIntegrability(format!(
                "u.p = {} and v.p = {}: no implemented rule multiplies these spaces",
                u.p, v.p
            )));
        }
        return Ok(ProductResult::assemble(entries, d));
    }

    let p = match u.p.finite() {
        Some(p) => p.clone(),
        None => return Ok(ProductResult { applicable: Vec::new(), best: None }),
    };
    let dp = rat(d as i64) / p.clone();
    let mut entries: Vec<ProductEntry> = Vec::new();
    let same_space = u.m == v.m && u.a == v.a;

    // Thm 5.1: identical factor spaces, algebra-grade smoothness.
    if same_space {
        let (conds, ok) = sobolev_algebra_conds(u.m, &p, d);
        if ok {
            entries.push(ProductEntry {
                rule: "Thm-5.1".into(),
                citation: CIT_51.into(),
                target: TargetSpace::closed(
                    u.m,
                    rat(2) * u.a.clone() - dp.clone(),
                    u.p.clone(),
                ),
                hypotheses: conds,
                side_condition: None,
            });
        }
    }

    // Cor 5.3: m <= min(m1, m2), represented by the maximal admissible m.
    let m_min = u.m.min(v.m);
    if m_min >= 1 {
        let (conds, ok) = sobolev_algebra_conds(m_min, &p, d);
        if ok {
            entries.push(ProductEntry {
                rule: "Cor-5.3".into(),
                citation: CIT_53.into(),
                target: TargetSpace::closed(
                    m_min,
                    u.a.clone() + v.a.clone() - dp.clone(),
                    u.p.clone(),
                ),
                hypotheses: conds,
                side_condition: None,
            });
        }
    }

    // Thm 5.5: identical factors, d/(2p) <= m0 < d/p, shift in smoothness.
    if same_space && p > rat(1) {
        let m0 = rat(u.m as i64);
        let half_dp = dp.clone() / rat(2);
        let conds = vec![
            cond("p > 1", p.clone(), CmpOp::Gt, rat(1)),
            cond("m0 >= d/(2p)", m0.clone(), CmpOp::Ge, half_dp),
            cond("m0 < d/p", m0.clone(), CmpOp::Lt, dp.clone()),
            cond("m0 >= 1", m0.clone(), CmpOp::Ge, rat(1)),
        ];
        if conds.iter().all(Cond::eval) {
            let m1_bound = rat(2) * m0 - dp.clone();
            if let Some(m1) = floor_u32(&m1_bound) {
                entries.push(ProductEntry {
                    rule: "Thm-5.5".into(),
                    citation: CIT_55.into(),
                    target: TargetSpace::closed(
                        m1,
                        rat(2) * u.a.clone() - dp.clone(),
                        u.p.clone(),
                    ),
                    hypotheses: conds,
                    side_condition: None,
                });
            }
        }
    }

    // Prop 5.7: mixed smoothness below the algebra grade.
    if u.m >= 1 && v.m >= 1 && p > rat(1) {
        let m0 = rat(u.m as i64);
        let m1 = rat(v.m as i64);
        let conds = vec![
            cond("p > 1", p.clone(), CmpOp::Gt, rat(1)),
            cond("m0 + m1 >= d/p", m0.clone() + m1.clone(), CmpOp::Ge, dp.clone()),
            cond("m0 < d/p", m0.clone(), CmpOp::Lt, dp.clone()),
            cond("m1 < d/p", m1.clone(), CmpOp::Lt, dp.clone()),
        ];
        if conds.iter().all(Cond::eval) {
            let m2_bound = m0 + m1 - dp.clone();
            if let Some(m2) = floor_u32(&m2_bound) {
                entries.push(ProductEntry {
                    rule: "Prop-5.7".into(),
                    citation: CIT_57.into(),
                    target: TargetSpace::closed(
                        m2,
                        u.a.clone() + v.a.clone() - dp.clone(),
                        u.p.clone(),
                    ),
                    hypotheses: conds,
                    side_condition: None,
                });
            }
        }
    }

    // Thm 5.8: identical factors, integrability shift with an open bound.
    if same_space && p > rat(1) {
        let m = rat(u.m as i64);
        let lower = rat(2 * d as i64) * (rat(1) / p.clone() - rat(1) / rat(2));
        let conds = vec![
            cond("p > 1", p.clone(), CmpOp::Gt, rat(1)),
            cond("m > 2d(1/p - 1/2)", m.clone(), CmpOp::Gt, lower),
            cond("m < d/p", m.clone(), CmpOp::Lt, dp.clone()),
            cond("m >= 1", m.clone(), CmpOp::Ge, rat(1)),
        ];
        if conds.iter().all(Cond::eval) {
            let t = rat(d as i64) / (rat(2) * dp.clone() - m.clone());
            entries.push(ProductEntry {
                rule: "Thm-5.8".into(),
                citation: CIT_58.into(),
                target: TargetSpace {
                    m: u.m,
                    a: rat(2) * u.a.clone() - m,
                    a_open_sup: true,
                    p: Integrability::Finite(t),
                },
                hypotheses: conds,
                side_condition: None,
            });
        }
    }

    // Thm 5.10 (Moser): identical factor spaces, needs L_inf data.
    if same_space && u.m >= 1 && p > rat(1) {
        let conds = vec![
            cond("p > 1", p.clone(), CmpOp::Gt, rat(1)),
            cond("m >= 1", rat(u.m as i64), CmpOp::Ge, rat(1)),
        ];
        entries.push(ProductEntry {
            rule: "Thm-5.10".into(),
            citation: CIT_510.into(),
            target: TargetSpace::closed(u.m, u.a.clone(), u.p.clone()),
            hypotheses: conds,
            side_condition: Some("requires u, v in L_inf".into()),
        });
    }

    // Prop 5.12 with the same finite p: v must additionally lie in
    // K^m_{0,inf}; annotated, not unconditional.
    if u.m >= 1 && v.m >= u.m {
        let conds = vec![
            cond("m_u >= 1", rat(u.m as i64), CmpOp::Ge, rat(1)),
            cond("m_v >= m_u", rat(v.m as i64), CmpOp::Ge, rat(u.m as i64)),
        ];
        entries.push(ProductEntry {
            rule: "Prop-5.12".into(),
            citation: CIT_512.into(),
            target: TargetSpace::closed(u.m, u.a.clone(), u.p.clone()),
            hypotheses: conds,
            side_condition: Some(format!("requires v in K^{}_{{0,inf}}", u.m)),
        });
    }

    // Cor 5.14: one factor n orders smoother and n weights heavier.
    for (base, mult) in [(u, v), (v, u)] {
        if mult.m <= base.m || base.m < 1 {
            continue;
        }
        let n = mult.m - base.m;
        if mult.a.clone() - base.a.clone() != rat(n as i64) {
            continue;
        }
        let nr = rat(n as i64);
        let conds = if p == rat(1) {
            vec![
                cond("p = 1", p.clone(), CmpOp::Eq, rat(1)),
                cond("n >= d", nr.clone(), CmpOp::Ge, rat(d as i64)),
                cond("a >= d - n", base.a.clone(), CmpOp::Ge, rat(d as i64) - nr.clone()),
            ]
        } else {
            vec![
                cond("p > max(1, d/n)", p.clone(), CmpOp::Gt, rat(1).max(rat(d as i64) / nr.clone())),
                cond("a >= d/p - n", base.a.clone(), CmpOp::Ge, dp.clone() - nr.clone()),
            ]
        };
        if conds.iter().all(Cond::eval) {
            entries.push(ProductEntry {
                rule: "Cor-5.14".into(),
                citation: CIT_514.into(),
                target: TargetSpace::closed(base.m, base.a.clone(), base.p.clone()),
                hypotheses: conds,
                side_condition: None,
            });
        }
    }

    Ok(ProductResult::assemble(entries, d))
}

/// Power map u -> u^n. n = 1 returns the space unchanged; n >= 2 enumerates
/// the applicable power rules.
pub fn power_target(sp: &SpaceParams, n: u32, dom: &DomainSpec) -> Result<ProductResult> {
    sp.validate()?;
    dom.validate()?;
    if n < 1 {
        return Err(Error::InvalidParams("power exponent n must be >= 1".into()));
    }
    let d = dom.d();
    if n == 1 {
        let entry = ProductEntry {
            rule: "identity".into(),
            citation: "u^1 = u".into(),
            target: TargetSpace::closed(sp.m, sp.a.clone(), sp.p.clone()),
            hypotheses: vec![cond("n = 1", rat(1), CmpOp::Eq, rat(1))],
            side_condition: None,
        };
        return Ok(ProductResult { best: Some(entry.clone()), applicable: vec![entry] });
    }
    let p = match sp.p.finite() {
        Some(p) => p.clone(),
        None => return Ok(ProductResult { applicable: Vec::new(), best: None }),
    };
    let dp = rat(d as i64) / p.clone();
    let nr = rat(n as i64);
    let mut entries = Vec::new();

    // Cor 5.9(i): algebra grade.
    {
        let (conds, ok) = sobolev_algebra_conds(sp.m, &p, d);
        if ok {
            entries.push(ProductEntry {
                rule: "Cor-5.9i".into(),
                citation: CIT_59I.into(),
                target: TargetSpace::closed(
                    sp.m,
                    nr.clone() * sp.a.clone() - (nr.clone() - rat(1)) * dp.clone(),
                    sp.p.clone(),
                ),
                hypotheses: conds,
                side_condition: None,
            });
        }
    }

    if n == 2 {
        // Cor 5.9(ii).
        if p > rat(1) {
            let m0 = rat(sp.m as i64);
            let conds = vec![
                cond("p > 1", p.clone(), CmpOp::Gt, rat(1)),
                cond("m0 >= d/(2p)", m0.clone(), CmpOp::Ge, dp.clone() / rat(2)),
                cond("m0 < d/p", m0.clone(), CmpOp::Lt, dp.clone()),
                cond("m0 >= 1", m0.clone(), CmpOp::Ge, rat(1)),
            ];
            if conds.iter().all(Cond::eval) {
                if let Some(m1) = floor_u32(&(rat(2) * m0 - dp.clone())) {
                    entries.push(ProductEntry {
                        rule: "Cor-5.9ii".into(),
                        citation: CIT_59II.into(),
                        target: TargetSpace::closed(
                            m1,
                            rat(2) * sp.a.clone() - dp.clone(),
                            sp.p.clone(),
                        ),
                        hypotheses: conds,
                        side_condition: None,
                    });
                }
            }
        }
        // Cor 5.9(iii).
        if p > rat(1) {
            let m = rat(sp.m as i64);
            let lower = rat(2 * d as i64) * (rat(1) / p.clone() - rat(1) / rat(2));
            let conds = vec![
                cond("p > 1", p.clone(), CmpOp::Gt, rat(1)),
                cond("m > 2d(1/p - 1/2)", m.clone(), CmpOp::Gt, lower),
                cond("m < d/p", m.clone(), CmpOp::Lt, dp.clone()),
                cond("m >= 1", m.clone(), CmpOp::Ge, rat(1)),
            ];
            if conds.iter().all(Cond::eval) {
                let t = rat(d as i64) / (rat(2) * dp.clone() - m.clone());
                entries.push(ProductEntry {
                    rule: "Cor-5.9iii".into(),
                    citation: CIT_59III.into(),
                    target: TargetSpace {
                        m: sp.m,
                        a: rat(2) * sp.a.clone() - m,
                        a_open_sup: true,
                        p: Integrability::Finite(t),
                    },
                    hypotheses: conds,
                    side_condition: None,
                });
            }
        }
    }

    // Remark after Cor 5.9: iterated mixed-smoothness power when d/p is a
    // natural number (only then does the induction not lose regularity).
    if p > rat(1) && dp.denom() == &num::BigInt::from(1) {
        let dp_int = dp.to_integer().to_i64().unwrap_or(-1);
        if (1..=(d as i64 - 1)).contains(&dp_int) {
            let m = rat(sp.m as i64);
            let conds = vec![
                cond("p > 1", p.clone(), CmpOp::Gt, rat(1)),
                cond("d/p integer in [1, d-1]", dp.clone(), CmpOp::Eq, rat(dp_int)),
                cond("m < d/p", m.clone(), CmpOp::Lt, dp.clone()),
                cond(
                    "n m >= (n-1) d/p",
                    nr.clone() * m.clone(),
                    CmpOp::Ge,
                    (nr.clone() - rat(1)) * dp.clone(),
                ),
            ];
            if conds.iter().all(Cond::eval) {
                let m_target = n as i64 * sp.m as i64 - (n as i64 - 1) * dp_int;
                entries.push(ProductEntry {
                    rule: "Rem-5.9".into(),
                    citation: CIT_REM59.into(),
                    target: TargetSpace::closed(
                        m_target as u32,
                        nr.clone() * sp.a.clone() - (nr.clone() - rat(1)) * dp.clone(),
                        sp.p.clone(),
                    ),
                    hypotheses: conds,
                    side_condition: None,
                });
            }
        }
    }

    Ok(ProductResult::assemble(entries, d))
}
