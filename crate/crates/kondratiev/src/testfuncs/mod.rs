//! Analytic test-function families with exact derivative evaluation, closed
//! under dilation, translation and pointwise product.
//!
//! `RhoPower` is the uncapped radial power |x'|^b in the transverse
//! coordinates; it is always meant to be paired with a cutoff supported in
//! {|x| <= 3/2}, so the cap in the weight min(1, dist) activates only inside
//! a bounded, smooth region and membership thresholds are unaffected.
//! Derivatives come from jet arithmetic ([`crate::jet`]); central finite
//! differences are used only as an independent oracle in tests.

mod parse;

pub use parse::parse_expr;

use crate::error::{Error, Result};
use crate::jet::{bump_q_coeffs, pow_coeffs, smooth_step_coeffs, table, MJet};

pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// The constant c.
    Constant(f64),
    /// |x'|^b with x' the first `trans` coordinates, uncapped.
    RhoPower { b: f64, trans: usize },
    /// |x - x0|^(-alpha) * psi(x - x0).
    FAlpha { alpha: f64, x0: Vec<f64> },
    /// Smooth bump, = 1 at `center`, supported in the closed ball of radius
    /// `radius`.
    Bump { center: Vec<f64>, radius: f64 },
    /// The fixed cutoff psi: 1 on |x| <= 1, supported in {|x| <= 3/2}.
    CutoffPsi,
    Dilate { lambda: f64, inner: Box<TestFunction> },
    Translate { shift: Vec<f64>, inner: Box<TestFunction> },
    Product(Box<TestFunction>, Box<TestFunction>),
    Scale { c: f64, inner: Box<TestFunction> },
}

/// Exact support descriptor: an annulus in |x'|, a box in x'', and a list of
/// ambient balls, all intersected.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    /// [lo, hi] bounds for |x'|; hi may be infinite.
    pub radial: [f64; 2],
    /// Per-coordinate [lo, hi] bounds for the x'' block.
    pub xsecond: Vec<[f64; 2]>,
    /// Ambient balls (center, radius) the support is contained in.
    pub balls: Vec<(Vec<f64>, f64)>,
}

impl Support {
    fn everywhere(d: usize, trans: usize) -> Self {
        Support {
            radial: [0.0, f64::INFINITY],
            xsecond: vec![[f64::NEG_INFINITY, f64::INFINITY]; d - trans],
            balls: Vec::new(),
        }
    }

    fn intersect(mut self, other: Support) -> Support {
        self.radial[0] = self.radial[0].max(other.radial[0]);
        self.radial[1] = self.radial[1].min(other.radial[1]);
        for (a, b) in self.xsecond.iter_mut().zip(&other.xsecond) {
            a[0] = a[0].max(b[0]);
            a[1] = a[1].min(b[1]);
        }
        self.balls.extend(other.balls);
        self
    }

    /// Tightens the radial annulus and x''-box using the recorded balls.
    fn tighten(mut self, trans: usize) -> Support {
        for (c, r) in &self.balls {
            let cr: f64 = c[..trans].iter().map(|v| v * v).sum::<f64>().sqrt();
            self.radial[0] = self.radial[0].max((cr - r).max(0.0));
            self.radial[1] = self.radial[1].min(cr + r);
            for (i, b) in self.xsecond.iter_mut().enumerate() {
                b[0] = b[0].max(c[trans + i] - r);
                b[1] = b[1].min(c[trans + i] + r);
            }
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.radial[0] > self.radial[1] || self.xsecond.iter().any(|b| b[0] > b[1])
    }
}

/// Off-singular-set point singularities carried by a function:
/// (location, strength alpha). Used by the quadrature to pick ring
/// coordinates around the point.
#[derive(Debug, Clone, PartialEq)]
pub struct Singularities {
    pub on_axis: bool,
    pub points: Vec<(Vec<f64>, f64)>,
}

fn is_even_nonneg_int(b: f64) -> bool {
    b >= 0.0 && b == b.round() && (b as i64) % 2 == 0
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        TestFunction::Constant(c)
    }

    pub fn rho_power(b: f64, trans: usize) -> Self {
        TestFunction::RhoPower { b, trans }
    }

    pub fn f_alpha(alpha: f64, x0: Vec<f64>) -> Self {
        TestFunction::FAlpha { alpha, x0 }
    }

    pub fn bump(center: Vec<f64>, radius: f64) -> Self {
        TestFunction::Bump { center, radius }
    }

    pub fn psi() -> Self {
        TestFunction::CutoffPsi
    }

    pub fn max_order(&self) -> usize {
        MAX_ORDER
    }

    /// x -> self(lambda x). Nested dilations merge.
    pub fn dilate(self, lambda: f64) -> Result<TestFunction> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "dilation factor {lambda} must be positive"
            )));
        }
        Ok(match self {
            TestFunction::Dilate { lambda: l0, inner } => {
                TestFunction::Dilate { lambda: l0 * lambda, inner }
            }
            other => TestFunction::Dilate { lambda, inner: Box::new(other) },
        })
    }

    /// x -> self(x - shift).
    pub fn translate(self, shift: Vec<f64>) -> TestFunction {
        TestFunction::Translate { shift, inner: Box::new(self) }
    }

    pub fn scale(self, c: f64) -> TestFunction {
        TestFunction::Scale { c, inner: Box::new(self) }
    }

    /// Pointwise product with the algebraic normalizations: constants fold
    /// into a scale, radial powers with a common transverse block add their
    /// exponents.
    pub fn multiply(self, other: TestFunction) -> TestFunction {
        match (self, other) {
            (TestFunction::Constant(c), g) | (g, TestFunction::Constant(c)) => {
                if c == 1.0 {
                    g
                } else {
                    g.scale(c)
                }
            }
            (
                TestFunction::RhoPower { b: b1, trans: t1 },
                TestFunction::RhoPower { b: b2, trans: t2 },
            ) if t1 == t2 => TestFunction::RhoPower { b: b1 + b2, trans: t1 },
            (f, g) => TestFunction::Product(Box::new(f), Box::new(g)),
        }
    }

    /// Jet of the function at x, carrying all partial derivatives up to
    /// `order`.
    pub fn jet(&self, x: &[f64], order: usize) -> Result<MJet> {
        if order > MAX_ORDER {
            return Err(Error::OrderExceeded { requested: order, max: MAX_ORDER });
        }
        let tab = table(x.len(), order);
        let coords: Vec<MJet> = (0..x.len())
            .map(|i| MJet::variable(tab.clone(), i, x[i]))
            .collect();
        self.jet_at(&coords, order)
    }

    fn jet_at(&self, coords: &[MJet], order: usize) -> Result<MJet> {
        let tab = coords[0].tab.clone();
        let sum_sq = |items: &[MJet]| -> MJet {
            let mut acc = MJet::constant(tab.clone(), 0.0);
            for c in items {
                acc = acc.add(&c.mul(c));
            }
            acc
        };
        match self {
            TestFunction::Constant(c) => Ok(MJet::constant(tab, *c)),
            TestFunction::RhoPower { b, trans } => {
                if *trans > coords.len() {
                    return Err(Error::InvalidParams(format!(
                        "rho_pow transverse block {trans} exceeds dimension {}",
                        coords.len()
                    )));
                }
                let q = sum_sq(&coords[..*trans]);
                if *b == 0.0 {
                    return Ok(MJet::constant(tab, 1.0));
                }
                if is_even_nonneg_int(*b) {
                    // Polynomial case q^(b/2), smooth everywhere.
                    let k = (*b as i64 / 2) as u32;
                    let mut acc = MJet::constant(tab, 1.0);
                    for _ in 0..k {
                        acc = acc.mul(&q);
                    }
                    return Ok(acc);
                }
                if q.value() <= 0.0 {
                    return Err(Error::SingularPoint(
                        "rho_pow evaluated on the singular set".into(),
                    ));
                }
                Ok(q.compose(&pow_coeffs(*b / 2.0, q.value(), order)))
            }
            TestFunction::FAlpha { alpha, x0 } => {
                let shifted: Vec<MJet> =
                    coords.iter().zip(x0).map(|(c, s)| c.add_scalar(-s)).collect();
                let q = sum_sq(&shifted);
                let cut = psi_of_q(&q, order);
                if *alpha == 0.0 {
                    return Ok(cut);
                }
                if is_even_nonneg_int(-*alpha) {
                    let k = ((-*alpha) as i64 / 2) as u32;
                    let mut acc = MJet::constant(tab, 1.0);
                    for _ in 0..k {
                        acc = acc.mul(&q);
                    }
                    return Ok(acc.mul(&cut));
                }
                if q.value() <= 0.0 {
                    return Err(Error::SingularPoint(format!(
                        "f_alpha evaluated at its singular point {x0:?}"
                    )));
                }
                let pow = q.compose(&pow_coeffs(-*alpha / 2.0, q.value(), order));
                Ok(pow.mul(&cut))
            }
            TestFunction::Bump { center, radius } => {
                let shifted: Vec<MJet> =
                    coords.iter().zip(center).map(|(c, s)| c.add_scalar(-s)).collect();
                let q = sum_sq(&shifted).scale(1.0 / (radius * radius));
                Ok(q.compose(&bump_q_coeffs(q.value(), order)))
            }
            TestFunction::CutoffPsi => {
                let q = sum_sq(coords);
                Ok(psi_of_q(&q, order))
            }
            TestFunction::Dilate { lambda, inner } => {
                let scaled: Vec<MJet> = coords.iter().map(|c| c.scale(*lambda)).collect();
                inner.jet_at(&scaled, order)
            }
            TestFunction::Translate { shift, inner } => {
                let moved: Vec<MJet> =
                    coords.iter().zip(shift).map(|(c, s)| c.add_scalar(-s)).collect();
                inner.jet_at(&moved, order)
            }
            TestFunction::Product(f, g) => {
                Ok(f.jet_at(coords, order)?.mul(&g.jet_at(coords, order)?))
            }
            TestFunction::Scale { c, inner } => Ok(inner.jet_at(coords, order)?.scale(*c)),
        }
    }

    /// Single partial derivative; `alpha` is a multi-index over the ambient
    /// coordinates.
    pub fn eval_derivative(&self, alpha: &[u8], x: &[f64]) -> Result<f64> {
        let order: usize = alpha.iter().map(|&a| a as usize).sum();
        Ok(self.jet(x, order)?.partial(alpha))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.jet(x, 0)?.value())
    }

    /// Exact support descriptor relative to a d-dimensional ambient space
    /// with `trans` transverse coordinates.
    pub fn support(&self, d: usize, trans: usize) -> Support {
        match self {
            TestFunction::Constant(_) | TestFunction::RhoPower { .. } => {
                Support::everywhere(d, trans)
            }
            TestFunction::FAlpha { x0, .. } => Support {
                balls: vec![(x0.clone(), 1.5)],
                ..Support::everywhere(d, trans)
            }
            .tighten(trans),
            TestFunction::Bump { center, radius } => Support {
                balls: vec![(center.clone(), *radius)],
                ..Support::everywhere(d, trans)
            }
            .tighten(trans),
            TestFunction::CutoffPsi => Support {
                balls: vec![(vec![0.0; d], 1.5)],
                ..Support::everywhere(d, trans)
            }
            .tighten(trans),
            TestFunction::Dilate { lambda, inner } => {
                let s = inner.support(d, trans);
                Support {
                    radial: [s.radial[0] / lambda, s.radial[1] / lambda],
                    xsecond: s
                        .xsecond
                        .iter()
                        .map(|b| [b[0] / lambda, b[1] / lambda])
                        .collect(),
                    balls: s
                        .balls
                        .iter()
                        .map(|(c, r)| (c.iter().map(|v| v / lambda).collect(), r / lambda))
                        .collect(),
                }
            }
            TestFunction::Translate { shift, inner } => {
                let s = inner.support(d, trans);
                let shift_r: f64 = shift[..trans].iter().map(|v| v * v).sum::<f64>().sqrt();
                Support {
                    radial: [
                        (s.radial[0] - shift_r).max(0.0),
                        if s.radial[1].is_finite() { s.radial[1] + shift_r } else { f64::INFINITY },
                    ],
                    xsecond: s
                        .xsecond
                        .iter()
                        .enumerate()
                        .map(|(i, b)| [b[0] + shift[trans + i], b[1] + shift[trans + i]])
                        .collect(),
                    balls: s
                        .balls
                        .iter()
                        .map(|(c, r)| {
                            (c.iter().zip(shift).map(|(v, s)| v + s).collect(), *r)
                        })
                        .collect(),
                }
            }
            TestFunction::Product(f, g) => {
                f.support(d, trans).intersect(g.support(d, trans))
            }
            TestFunction::Scale { inner, .. } => inner.support(d, trans),
        }
    }

    /// Collects singular behaviour: `on_axis` when the function carries a
    /// genuine radial power at the singular set, plus isolated singular
    /// points away from it.
    pub fn singularities(&self) -> Singularities {
        match self {
            TestFunction::Constant(_) | TestFunction::Bump { .. } | TestFunction::CutoffPsi => {
                Singularities { on_axis: false, points: Vec::new() }
            }
            TestFunction::RhoPower { b, .. } => Singularities {
                on_axis: !is_even_nonneg_int(*b),
                points: Vec::new(),
            },
            TestFunction::FAlpha { alpha, x0 } => Singularities {
                on_axis: false,
                points: if is_even_nonneg_int(-*alpha) {
                    Vec::new()
                } else {
                    vec![(x0.clone(), *alpha)]
                },
            },
            TestFunction::Dilate { lambda, inner } => {
                let s = inner.singularities();
                Singularities {
                    on_axis: s.on_axis,
                    points: s
                        .points
                        .into_iter()
                        .map(|(c, a)| (c.iter().map(|v| v / lambda).collect(), a))
                        .collect(),
                }
            }
            TestFunction::Translate { shift, inner } => {
                let s = inner.singularities();
                Singularities {
                    on_axis: s.on_axis,
                    points: s
                        .points
                        .into_iter()
                        .map(|(c, a)| (c.iter().zip(shift).map(|(v, t)| v + t).collect(), a))
                        .collect(),
                }
            }
            TestFunction::Product(f, g) => {
                let a = f.singularities();
                let b = g.singularities();
                Singularities {
                    on_axis: a.on_axis || b.on_axis,
                    points: a.points.into_iter().chain(b.points).collect(),
                }
            }
            TestFunction::Scale { inner, .. } => inner.singularities(),
        }
    }
}

/// psi as a function of q = |y|^2: 1 for q <= 1, 0 for q >= 9/4, a smooth
/// taper in between.
fn psi_of_q(q: &MJet, order: usize) -> MJet {
    let tab = q.tab.clone();
    let q0 = q.value();
    if q0 <= 1.0 {
        return MJet::constant(tab, 1.0);
    }
    if q0 >= 2.25 {
        return MJet::constant(tab, 0.0);
    }
    // 1 - S(2(|y| - 1)) with |y| = sqrt(q), q in (1, 9/4).
    let r = q.compose(&pow_coeffs(0.5, q0, order));
    let arg = r.add_scalar(-1.0).scale(2.0);
    let s = arg.compose(&smooth_step_coeffs(arg.value(), order));
    s.scale(-1.0).add_scalar(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: &TestFunction, x: &[f64], alpha: &[u8], h: f64) -> f64 {
        let mut indices = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                indices.push(i);
            }
        }
        fn rec(f: &TestFunction, x: &mut Vec<f64>, idx: &[usize], h: f64) -> f64 {
            if idx.is_empty() {
                return f.eval(x).unwrap();
            }
            let i = idx[0];
            x[i] += h;
            let plus = rec(f, x, &idx[1..], h);
            x[i] -= 2.0 * h;
            let minus = rec(f, x, &idx[1..], h);
            x[i] += h;
            (plus - minus) / (2.0 * h)
        }
        rec(f, &mut x.to_vec(), &indices, h)
    }

    #[test]
    fn constant_derivative_is_zero() {
        let f = TestFunction::constant(5.0);
        assert_eq!(f.eval_derivative(&[1, 0, 0], &[0.3, 0.1, 0.2]).unwrap(), 0.0);
        assert_eq!(f.eval(&[1.0, 2.0, 3.0]).unwrap(), 5.0);
    }

    #[test]
    fn rho_power_radial_derivative() {
        // d/dx1 of |x|^b at (r,0,0) is b r^(b-1) (l = 0 => trans = 3).
        let b = -0.4;
        let r = 0.3;
        let f = TestFunction::rho_power(b, 3);
        let got = f.eval_derivative(&[1, 0, 0], &[r, 0.0, 0.0]).unwrap();
        let expect = b * r.powf(b - 1.0);
        assert!((got - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn falpha_mixed_derivative_matches_fd() {
        let f = TestFunction::f_alpha(0.4, vec![0.0; 3])
            .multiply(TestFunction::psi());
        let x = [0.3, 0.2, 0.1];
        for alpha in [[1u8, 1, 0], [2, 0, 0], [1, 0, 1]] {
            let exact = f.eval_derivative(&alpha, &x).unwrap();
            let approx = fd(&f, &x, &alpha, 1e-4);
            let rel = (exact - approx).abs() / exact.abs().max(1e-8);
            assert!(rel < 1e-5, "alpha {alpha:?}: exact {exact}, fd {approx}");
        }
    }

    #[test]
    fn leibniz_square_matches_fd() {
        // (rho^b * psi)^2 via Product; derivative against finite differences.
        let u = TestFunction::rho_power(-0.3, 3).multiply(TestFunction::psi());
        let sq = u.clone().multiply(u);
        let x = [0.25, 0.15, -0.2];
        for alpha in [[1u8, 0, 0], [1, 1, 0]] {
            let exact = sq.eval_derivative(&alpha, &x).unwrap();
            let approx = fd(&sq, &x, &alpha, 1e-5);
            let rel = (exact - approx).abs() / exact.abs().max(1e-8);
            assert!(rel < 1e-5, "alpha {alpha:?}");
        }
    }

    #[test]
    fn dilate_support_shrinks() {
        let f = TestFunction::bump(vec![0.0; 3], 1.0).dilate(2.0).unwrap();
        let s = f.support(3, 3);
        assert_eq!(s.balls[0].1, 0.5);
        assert_eq!(s.radial[1], 0.5);
    }

    #[test]
    fn dilate_evaluation_identity() {
        let f = TestFunction::bump(vec![0.1, 0.0, 0.2], 0.8);
        let g = f.clone().dilate(3.0).unwrap();
        for x in [[0.05, 0.01, 0.03], [0.1, -0.02, 0.05]] {
            let lhs = g.eval(&x).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| v * 3.0).collect();
            let rhs = f.eval(&scaled).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn dilate_chain_merges() {
        let f = TestFunction::psi().dilate(2.0).unwrap().dilate(4.0).unwrap();
        assert_eq!(
            f,
            TestFunction::Dilate { lambda: 8.0, inner: Box::new(TestFunction::psi()) }
        );
    }

    #[test]
    fn product_normalizations() {
        let a = TestFunction::rho_power(-0.3, 3);
        let b = TestFunction::rho_power(-0.3, 3);
        assert_eq!(a.multiply(b), TestFunction::rho_power(-0.6, 3));
        let u = TestFunction::psi();
        assert_eq!(u.clone().multiply(TestFunction::constant(1.0)), u);
    }

    #[test]
    fn psi_plateau_and_support() {
        let f = TestFunction::psi();
        assert_eq!(f.eval(&[0.5, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(f.eval(&[0.9, 0.3, 0.1]).unwrap(), 1.0);
        assert_eq!(f.eval(&[1.6, 0.0, 0.0]).unwrap(), 0.0);
        let v = f.eval(&[1.2, 0.0, 0.0]).unwrap();
        assert!(v > 0.0 && v < 1.0);
        let s = f.support(3, 2);
        assert_eq!(s.radial[1], 1.5);
        assert_eq!(s.xsecond[0], [-1.5, 1.5]);
    }

    #[test]
    fn singular_point_evaluation_rejected() {
        let f = TestFunction::rho_power(-0.4, 3);
        assert!(matches!(
            f.eval(&[0.0, 0.0, 0.0]),
            Err(Error::SingularPoint(_))
        ));
        // Smooth polynomial powers evaluate fine at the origin.
        let g = TestFunction::rho_power(2.0, 3);
        assert_eq!(g.eval(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn order_cap_enforced() {
        let f = TestFunction::psi();
        assert!(matches!(
            f.jet(&[0.5, 0.0, 0.0], 7),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn translate_moves_singularities() {
        let f = TestFunction::f_alpha(0.5, vec![0.0; 3]).translate(vec![1.0, 0.0, 0.0]);
        let s = f.singularities();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].0, vec![1.0, 0.0, 0.0]);
    }
}
