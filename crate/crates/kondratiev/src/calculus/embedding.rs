//! Continuous and compact embedding decisions.

use super::{Outcome, SpaceParams, Verdict};
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::rational::{rat, rat_str, Integrability, Rat};

const CIT_CONT: &str =
    "continuous embedding: m - d/p >= m' - d/q and a - d/p >= a' - d/q, 1 <= p <= q < inf";
const CIT_CONT_INF: &str =
    "continuous embedding into q = inf: m - d/p > m' and a - d/p >= a' (p > 1); m - d >= m' and a - d >= a' (p = 1)";
const CIT_COMPACT: &str =
    "compact embedding: strict inequalities m - d/p > m' - d/q and a - d/p > a' - d/q, 1 <= p <= q <= inf";

fn fmt_shift(label: &str, v: &Rat) -> String {
    format!("{label} = {}", rat_str(v))
}

fn validate(src: &SpaceParams, tgt: &SpaceParams, dom: &DomainSpec) -> Result<()> {
    src.validate()?;
    tgt.validate()?;
    dom.validate()?;
    if src.m < 1 {
        return Err(Error::InvalidParams(
            "source smoothness must satisfy m >= 1".into(),
        ));
    }
    Ok(())
}

/// Decides K^m_{a,p}(D, M) -> K^{m'}_{a',q}(D, M) on a generalized
/// polyhedral-type pair (all supported domain kinds).
pub fn embed_continuous(
    src: &SpaceParams,
    tgt: &SpaceParams,
    dom: &DomainSpec,
) -> Result<Verdict> {
    validate(src, tgt, dom)?;
    let d = dom.d();
    match (&src.p, &tgt.p) {
        (Integrability::Infinity, _) => Ok(Verdict::new(
            Outcome::Undetermined,
            "Thm-3.3",
            CIT_CONT,
            "source integrability p = inf is outside the scope of the embedding rules".into(),
        )),
        (Integrability::Finite(p), Integrability::Finite(q)) => {
            if p > q {
                return Ok(Verdict::new(
                    Outcome::Undetermined,
                    "Thm-3.3",
                    CIT_CONT,
                    format!(
                        "p = {} > q = {}: outside the scope 1 <= p <= q < inf",
                        rat_str(p),
                        rat_str(q)
                    ),
                ));
            }
            let sm = src.m_shift(d);
            let tm = tgt.m_shift(d);
            let sa = src.a_shift(d);
            let ta = tgt.a_shift(d);
            let smooth_ok = sm >= tm;
            let weight_ok = sa >= ta;
            let reason = format!(
                "{} {} {}; {} {} {}",
                fmt_shift("m - d/p", &sm),
                if smooth_ok { ">=" } else { "<" },
                fmt_shift("m' - d/q", &tm),
                fmt_shift("a - d/p", &sa),
                if weight_ok { ">=" } else { "<" },
                fmt_shift("a' - d/q", &ta),
            );
            let outcome = if smooth_ok && weight_ok { Outcome::Holds } else { Outcome::Fails };
            Ok(Verdict::new(outcome, "Thm-3.3", CIT_CONT, reason))
        }
        (Integrability::Finite(p), Integrability::Infinity) => {
            let sm = src.m_shift(d);
            let sa = src.a_shift(d);
            let tm = rat(tgt.m as i64);
            let ta = tgt.a.clone();
            let (smooth_ok, smooth_rel) = if *p == rat(1) {
                (sm >= tm, if sm >= tm { ">=" } else { "<" })
            } else {
                (sm > tm, if sm > tm { ">" } else { "<=" })
            };
            let weight_ok = sa >= ta;
            let reason = format!(
                "q = inf, p {} 1: {} {} m' = {}; {} {} a' = {}",
                if *p == rat(1) { "=" } else { ">" },
                fmt_shift("m - d/p", &sm),
                smooth_rel,
                rat_str(&tm),
                fmt_shift("a - d/p", &sa),
                if weight_ok { ">=" } else { "<" },
                rat_str(&ta),
            );
            let outcome = if smooth_ok && weight_ok { Outcome::Holds } else { Outcome::Fails };
            Ok(Verdict::new(outcome, "Thm-3.4", CIT_CONT_INF, reason))
        }
    }
}

/// Decides compactness of the embedding. On bounded pairs this is the strict
/// variant of the continuous conditions; the unbounded model pair admits no
/// compact embedding at all (a far-field translation family, living where
/// rho == 1, is bounded with no convergent subsequence).
pub fn embed_compact(src: &SpaceParams, tgt: &SpaceParams, dom: &DomainSpec) -> Result<Verdict> {
    validate(src, tgt, dom)?;
    let d = dom.d();
    if src.p.is_infinite() {
        return Ok(Verdict::new(
            Outcome::Undetermined,
            "Thm-4.1",
            CIT_COMPACT,
            "source integrability p = inf is outside the scope of the compactness rule".into(),
        ));
    }
    if let (Integrability::Finite(p), Integrability::Finite(q)) = (&src.p, &tgt.p) {
        if p > q {
            return Ok(Verdict::new(
                Outcome::Undetermined,
                "Thm-4.1",
                CIT_COMPACT,
                format!(
                    "p = {} > q = {}: outside the scope 1 <= p <= q <= inf",
                    rat_str(p),
                    rat_str(q)
                ),
            ));
        }
    }
    if !dom.is_bounded() {
        return Ok(Verdict::new(
            Outcome::Fails,
            "unbounded-domain",
            "no compact embedding on the unbounded model pair",
            "translates far from the singular set (where rho == 1) form a bounded \
             sequence with pairwise-disjoint supports and no convergent subsequence"
                .into(),
        ));
    }
    let sm = src.m_shift(d);
    let tm = tgt.m_shift(d);
    let sa = src.a_shift(d);
    let ta = tgt.a_shift(d);
    let smooth_ok = sm > tm;
    let weight_ok = sa > ta;
    let reason = format!(
        "{} {} {}; {} {} {}",
        fmt_shift("m - d/p", &sm),
        if smooth_ok { ">" } else { "<=" },
        fmt_shift("m' - d/q", &tm),
        fmt_shift("a - d/p", &sa),
        if weight_ok { ">" } else { "<=" },
        fmt_shift("a' - d/q", &ta),
    );
    let outcome = if smooth_ok && weight_ok { Outcome::Holds } else { Outcome::Fails };
    Ok(Verdict::new(outcome, "Thm-4.1", CIT_COMPACT, reason))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratq;

    fn model3() -> DomainSpec {
        DomainSpec::Model { d: 3, l: 0 }
    }

    fn cone3() -> DomainSpec {
        DomainSpec::SmoothCone { d: 3, gamma: 1.0 }
    }

    fn sp(m: u32, a: Rat, p: Rat) -> SpaceParams {
        SpaceParams::finite(m, a, p)
    }

    #[test]
    fn continuous_holds_example() {
        // (2,1,2) -> (1,0,4) on d=3: 0.5 >= 0.25 and -0.5 >= -0.75.
        let v = embed_continuous(
            &sp(2, rat(1), rat(2)),
            &sp(1, rat(0), rat(4)),
            &model3(),
        )
        .unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert_eq!(v.rule, "Thm-3.3");
    }

    #[test]
    fn identity_embedding_holds() {
        let s = sp(2, rat(1), rat(2));
        let v = embed_continuous(&s, &s, &model3()).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
    }

    #[test]
    fn continuous_fails_example() {
        let v = embed_continuous(
            &sp(1, rat(0), rat(2)),
            &sp(1, rat(0), rat(4)),
            &model3(),
        )
        .unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        assert!(v.reason.contains('<'), "{}", v.reason);
    }

    #[test]
    fn p_greater_than_q_undetermined() {
        let v = embed_continuous(
            &sp(2, rat(1), rat(4)),
            &sp(1, rat(0), rat(2)),
            &model3(),
        )
        .unwrap();
        assert_eq!(v.outcome, Outcome::Undetermined);
    }

    #[test]
    fn q_infinity_split_on_p() {
        // p > 1 requires strict m - d/p > m'.
        let inf = |m, a| SpaceParams::new(m, a, Integrability::Infinity);
        let v = embed_continuous(&sp(2, rat(2), rat(2)), &inf(0, rat(0)), &model3()).unwrap();
        assert_eq!(v.rule, "Thm-3.4");
        assert_eq!(v.outcome, Outcome::Holds); // 0.5 > 0, 0.5 >= 0
        let v = embed_continuous(&sp(2, rat(2), rat(2)), &inf(0, rat(1)), &model3()).unwrap();
        assert_eq!(v.outcome, Outcome::Fails); // a - d/p = 1/2 < 1
        // p = 1 allows equality in the smoothness shift.
        let v = embed_continuous(&sp(3, rat(3), rat(1)), &inf(0, rat(0)), &model3()).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        let v = embed_continuous(&sp(3, rat(3), rat(1)), &inf(1, rat(0)), &model3()).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
    }

    #[test]
    fn compact_examples() {
        let v = embed_compact(&sp(2, rat(1), rat(2)), &sp(1, rat(0), rat(4)), &cone3()).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        // Equality in the weight shift: continuous yes, compact no.
        let v =
            embed_compact(&sp(2, rat(1), rat(2)), &sp(1, ratq(1, 4), rat(4)), &cone3()).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        let vc = embed_continuous(&sp(2, rat(1), rat(2)), &sp(1, ratq(1, 4), rat(4)), &cone3())
            .unwrap();
        assert_eq!(vc.outcome, Outcome::Holds);
        // Identity is never compact.
        let s = sp(2, rat(1), rat(2));
        assert_eq!(embed_compact(&s, &s, &cone3()).unwrap().outcome, Outcome::Fails);
    }

    #[test]
    fn compact_on_model_pair_fails() {
        let v = embed_compact(&sp(2, rat(1), rat(2)), &sp(1, rat(0), rat(4)), &model3()).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        assert_eq!(v.rule, "unbounded-domain");
    }

    #[test]
    fn monotonicity_in_m_and_a() {
        // Same p: holds whenever m' <= m and a' <= a.
        for (m, mp) in [(3u32, 1u32), (2, 2), (4, 0)] {
            for (a, ap) in [(rat(2), rat(1)), (ratq(3, 2), ratq(3, 2)), (rat(0), rat(-1))] {
                let v = embed_continuous(
                    &sp(m, a.clone(), rat(2)),
                    &sp(mp, ap.clone(), rat(2)),
                    &model3(),
                )
                .unwrap();
                assert_eq!(v.outcome, Outcome::Holds, "m={m},m'={mp},a={a},a'={ap}");
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(embed_continuous(
            &sp(0, rat(1), rat(2)),
            &sp(0, rat(0), rat(2)),
            &model3()
        )
        .is_err());
        assert!(embed_continuous(
            &sp(2, rat(1), ratq(1, 2)),
            &sp(0, rat(0), rat(2)),
            &model3()
        )
        .is_err());
    }

    #[test]
    fn verdict_depends_only_on_rational_values() {
        // Unreduced input fractions decide identically.
        let a1 = ratq(100, 100);
        let a2 = rat(1);
        let v1 = embed_continuous(
            &sp(2, a1, ratq(14, 7)),
            &sp(1, rat(0), ratq(32, 8)),
            &model3(),
        )
        .unwrap();
        let v2 = embed_continuous(
            &sp(2, a2, rat(2)),
            &sp(1, rat(0), rat(4)),
            &model3(),
        )
        .unwrap();
        assert_eq!(v1, v2);
    }
}
