//! Textual expression syntax for test functions.
//!
//! Grammar (documented in the guide, chapter "Test functions"):
//!
//! ```text
//! expr   := factor ('*' factor)*
//! factor := name '(' args ')'
//! args   := [arg (',' arg)*]
//! arg    := key '=' value | value        (positional only for combinators)
//! value  := number | fraction | vector
//! vector := '(' number (',' number)* ')'
//! ```
//!
//! Atoms: `constant(c=1)`, `rho_pow(b=-0.4)`, `f_alpha(a=0.4, x0=(1,0,0))`,
//! `bump(c=(0,0,0), r=1)`, `psi()`. Combinators: `dilate(2, expr)`,
//! `translate((1,0,0), expr)`, `scale(3, expr)`. Products with `*`.

use super::TestFunction;
use crate::error::{Error, Result};
use crate::rational::{parse_rat, to_f64};

/// Parses an expression in a d-dimensional ambient space whose first
/// `trans` coordinates are transverse to the singular set.
pub fn parse_expr(input: &str, d: usize, trans: usize) -> Result<TestFunction> {
    let mut p = Parser { s: input.as_bytes(), pos: 0, d, trans };
    let f = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(Error::ParseError(format!(
            "trailing input at byte {}: {:?}",
            p.pos,
            &input[p.pos..]
        )));
    }
    Ok(f)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    d: usize,
    trans: usize,
}

#[derive(Debug, Clone)]
enum Value {
    Num(f64),
    Vec(Vec<f64>),
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::ParseError(format!(
                "expected {:?} at byte {}",
                b as char, self.pos
            )))
        }
    }

    fn expr(&mut self) -> Result<TestFunction> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = acc.multiply(rhs);
        }
        Ok(acc)
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::ParseError(format!("expected a name at byte {start}")));
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string())
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_digit()
                || matches!(self.s[self.pos], b'.' | b'-' | b'+' | b'/' | b'e' | b'E'))
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        if text.is_empty() {
            return Err(Error::ParseError(format!("expected a number at byte {start}")));
        }
        if text.contains('/') {
            return Ok(to_f64(&parse_rat(text)?));
        }
        text.parse::<f64>()
            .map_err(|_| Error::ParseError(format!("bad number {text:?}")))
    }

    fn value(&mut self) -> Result<Value> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let mut items = vec![self.number()?];
            while self.peek() == Some(b',') {
                self.pos += 1;
                items.push(self.number()?);
            }
            self.expect(b')')?;
            Ok(Value::Vec(items))
        } else {
            Ok(Value::Num(self.number()?))
        }
    }

    fn factor(&mut self) -> Result<TestFunction> {
        let name = self.ident()?;
        self.expect(b'(')?;
        match name.as_str() {
            "dilate" | "scale" => {
                let factor = self.number()?;
                self.expect(b',')?;
                let inner = self.expr()?;
                self.expect(b')')?;
                if name == "dilate" {
                    inner.dilate(factor)
                } else {
                    Ok(inner.scale(factor))
                }
            }
            "translate" => {
                let v = match self.value()? {
                    Value::Vec(v) => v,
                    Value::Num(n) => vec![n],
                };
                self.expect(b',')?;
                let inner = self.expr()?;
                self.expect(b')')?;
                let shift = self.fit_vector(v)?;
                Ok(inner.translate(shift))
            }
            _ => {
                let kwargs = self.kwargs()?;
                self.expect(b')')?;
                self.atom(&name, kwargs)
            }
        }
    }

    fn kwargs(&mut self) -> Result<Vec<(String, Value)>> {
        let mut out = Vec::new();
        if self.peek() == Some(b')') {
            return Ok(out);
        }
        loop {
            let key = self.ident()?;
            self.expect(b'=')?;
            out.push((key, self.value()?));
            if self.peek() == Some(b',') {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn fit_vector(&self, v: Vec<f64>) -> Result<Vec<f64>> {
        if v.len() == self.d {
            Ok(v)
        } else if v.len() == 1 {
            let mut out = vec![0.0; self.d];
            out[0] = v[0];
            Ok(out)
        } else {
            Err(Error::ParseError(format!(
                "vector length {} does not match dimension {}",
                v.len(),
                self.d
            )))
        }
    }

    fn atom(&self, name: &str, kwargs: Vec<(String, Value)>) -> Result<TestFunction> {
        let get_num = |key: &str| -> Result<Option<f64>> {
            for (k, v) in &kwargs {
                if k == key {
                    return match v {
                        Value::Num(n) => Ok(Some(*n)),
                        Value::Vec(_) => {
                            Err(Error::ParseError(format!("{key} expects a number")))
                        }
                    };
                }
            }
            Ok(None)
        };
        let get_vec = |key: &str| -> Result<Option<Vec<f64>>> {
            for (k, v) in &kwargs {
                if k == key {
                    return match v {
                        Value::Vec(vv) => Ok(Some(self.fit_vector(vv.clone())?)),
                        Value::Num(n) => Ok(Some(self.fit_vector(vec![*n])?)),
                    };
                }
            }
            Ok(None)
        };
        for (k, _) in &kwargs {
            let known = match name {
                "constant" | "const" => k == "c",
                "rho_pow" => k == "b",
                "f_alpha" => k == "a" || k == "alpha" || k == "x0",
                "bump" => k == "c" || k == "r",
                "psi" => false,
                _ => false,
            };
            if !known {
                return Err(Error::ParseError(format!(
                    "unknown argument {k:?} for {name}"
                )));
            }
        }
        match name {
            "constant" | "const" => Ok(TestFunction::constant(get_num("c")?.unwrap_or(1.0))),
            "rho_pow" => {
                let b = get_num("b")?
                    .ok_or_else(|| Error::ParseError("rho_pow requires b=".into()))?;
                Ok(TestFunction::rho_power(b, self.trans))
            }
            "f_alpha" => {
                let alpha = get_num("a")?
                    .or(get_num("alpha")?)
                    .ok_or_else(|| Error::ParseError("f_alpha requires a=".into()))?;
                let x0 = get_vec("x0")?.unwrap_or_else(|| vec![0.0; self.d]);
                Ok(TestFunction::f_alpha(alpha, x0))
            }
            "bump" => {
                let c = get_vec("c")?.unwrap_or_else(|| vec![0.0; self.d]);
                let r = get_num("r")?.unwrap_or(1.0);
                if r <= 0.0 {
                    return Err(Error::ParseError("bump radius must be positive".into()));
                }
                Ok(TestFunction::bump(c, r))
            }
            "psi" => Ok(TestFunction::psi()),
            other => Err(Error::ParseError(format!("unknown function {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spec_examples() {
        let f = parse_expr("rho_pow(b=-0.4)*psi()", 3, 3).unwrap();
        assert_eq!(
            f,
            TestFunction::rho_power(-0.4, 3).multiply(TestFunction::psi())
        );
        let f = parse_expr("f_alpha(a=0.4)*bump(r=1)", 3, 3).unwrap();
        match f {
            TestFunction::Product(a, b) => {
                assert!(matches!(*a, TestFunction::FAlpha { .. }));
                assert!(matches!(*b, TestFunction::Bump { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_combinators() {
        let f = parse_expr("dilate(2, bump(r=1))", 3, 3).unwrap();
        assert!(matches!(f, TestFunction::Dilate { lambda, .. } if lambda == 2.0));
        let f = parse_expr("translate((0.5, 0, 0), psi())", 3, 2).unwrap();
        assert!(matches!(f, TestFunction::Translate { .. }));
        let f = parse_expr("scale(3/2, constant(c=2))", 3, 3).unwrap();
        assert_eq!(f, TestFunction::Scale {
            c: 1.5,
            inner: Box::new(TestFunction::constant(2.0))
        });
    }

    #[test]
    fn fractions_accepted() {
        let f = parse_expr("rho_pow(b=-2/5)", 3, 1).unwrap();
        assert_eq!(f, TestFunction::rho_power(-0.4, 1));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_expr("rho_pow(b=-0.4) psi()", 3, 3).is_err());
        assert!(parse_expr("nope(x=1)", 3, 3).is_err());
        assert!(parse_expr("rho_pow()", 3, 3).is_err());
        assert!(parse_expr("bump(q=2)", 3, 3).is_err());
        assert!(parse_expr("bump(c=(1,2))", 3, 3).is_err());
    }
}
