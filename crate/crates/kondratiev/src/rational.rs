//! Exact rational scalars used by the decision engine.
//!
//! All theorem thresholds are sharp at equality, so parameter comparisons are
//! done in arbitrary-precision rational arithmetic and never in floating
//! point. Values serialize as `"num/den"` strings (plain `"n"` for integers)
//! and parse back from `"3/2"`, `"2"`, or exact decimal strings like `"-0.08"`
//! (decimals are read as num/10^k).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn ratq(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Canonical display: `"n"` for integers, `"num/den"` otherwise.
pub fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"3/2"`, `"-2"`, or exact decimals such as `"1.5"` / `"-0.08"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::ParseError("empty rational".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::ParseError(format!("bad numerator in {s:?}")))?;
        let den: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::ParseError(format!("bad denominator in {s:?}")))?;
        if den.is_zero() {
            return Err(Error::ParseError(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse()
                .map_err(|_| Error::ParseError(format!("bad decimal in {s:?}")))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::ParseError(format!("bad decimal in {s:?}")));
        }
        let frac_num: BigInt = frac
            .parse()
            .map_err(|_| Error::ParseError(format!("bad decimal in {s:?}")))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_rat = BigRational::new(frac_num, den);
        let int_rat = BigRational::from_integer(int_part.abs());
        let abs = int_rat + frac_rat;
        return Ok(if neg { -abs } else { abs });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::ParseError(format!("bad rational {s:?}")))?;
    Ok(BigRational::from_integer(n))
}

/// The integrability parameter: a finite rational p >= 1 or the distinguished
/// value infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Integrability {
    Finite(Rat),
    Infinity,
}

impl Integrability {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Integrability::Finite(p) => Some(p),
            Integrability::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Integrability::Infinity)
    }

    /// d/p with the convention d/infinity = 0.
    pub fn d_over(&self, d: u32) -> Rat {
        match self {
            Integrability::Finite(p) => rat(d as i64) / p.clone(),
            Integrability::Infinity => Rat::zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Integrability::Finite(p) => to_f64(p),
            Integrability::Infinity => f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Integrability::Finite(p) = self {
            if *p < rat(1) {
                return Err(Error::InvalidParams(format!(
                    "integrability p = {} must satisfy p >= 1",
                    rat_str(p)
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for Integrability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Integrability::Finite(p) => write!(f, "{}", rat_str(p)),
            Integrability::Infinity => write!(f, "inf"),
        }
    }
}

/// Parses `"inf"` / `"infinity"` / `"oo"` or any rational accepted by
/// [`parse_rat`].
pub fn parse_integrability(s: &str) -> Result<Integrability> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf")
        || t.eq_ignore_ascii_case("infinity")
        || t == "oo"
        || t == "\u{221e}"
    {
        return Ok(Integrability::Infinity);
    }
    Ok(Integrability::Finite(parse_rat(t)?))
}

impl serde::Serialize for Integrability {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Integrability {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_integrability(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Rat` fields: rationals travel as `"num/den"` strings.
pub mod rat_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rat_str(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}
