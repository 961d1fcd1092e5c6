//! Truncated multivariate Taylor arithmetic.
//!
//! Every analytic test function in this crate is a composition of polynomial
//! coordinates with smooth 1-D profiles (powers, exponentials, smooth steps,
//! bumps). Evaluating such a composition in the algebra of Taylor polynomials
//! truncated at total degree `n` yields all partial derivatives up to order
//! `n` at once, exactly up to rounding. Numeric differentiation is used only
//! as an independent test oracle.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Shared index table for multi-indices of dimension `d`, total degree <= `n`.
pub struct IndexTable {
    pub d: usize,
    pub n: usize,
    /// Multi-indices ordered by total degree, then lexicographically.
    pub exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// prod[k] lists the (i, j) pairs with exps[i] + exps[j] = exps[k].
    prod: Vec<Vec<(u32, u32)>>,
}

impl IndexTable {
    fn build(d: usize, n: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut cur = vec![vec![0u8; d]];
        exps.extend(cur.iter().cloned());
        for _deg in 1..=n {
            let mut next: Vec<Vec<u8>> = Vec::new();
            for e in &cur {
                for i in 0..d {
                    let mut f = e.clone();
                    f[i] += 1;
                    if !next.contains(&f) {
                        next.push(f);
                    }
                }
            }
            next.sort();
            exps.extend(next.iter().cloned());
            cur = next;
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut prod = vec![Vec::new(); exps.len()];
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                let da: usize = a.iter().map(|&v| v as usize).sum();
                let db: usize = b.iter().map(|&v| v as usize).sum();
                if da + db > n {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let k = index[&sum];
                prod[k].push((i as u32, j as u32));
            }
        }
        IndexTable { d, n, exps, index, prod }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.index.get(alpha).copied()
    }
}

pub fn table(d: usize, n: usize) -> Arc<IndexTable> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<IndexTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((d, n))
        .or_insert_with(|| Arc::new(IndexTable::build(d, n)))
        .clone()
}

/// A truncated Taylor polynomial in `d` variables of total degree <= `n`.
/// Coefficient `c[k]` multiplies `delta^exps[k]`, so the partial derivative
/// for multi-index alpha is `c[idx(alpha)] * alpha!`.
#[derive(Clone)]
pub struct MJet {
    pub tab: Arc<IndexTable>,
    pub c: Vec<f64>,
}

impl MJet {
    pub fn constant(tab: Arc<IndexTable>, v: f64) -> Self {
        let mut c = vec![0.0; tab.len()];
        c[0] = v;
        MJet { tab, c }
    }

    /// The jet of the coordinate function x_i expanded at base point value `v`.
    pub fn variable(tab: Arc<IndexTable>, i: usize, v: f64) -> Self {
        let mut c = vec![0.0; tab.len()];
        c[0] = v;
        if tab.n >= 1 {
            let mut e = vec![0u8; tab.d];
            e[i] = 1;
            let k = tab.index_of(&e).unwrap();
            c[k] = 1.0;
        }
        MJet { tab, c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn add(&self, o: &MJet) -> MJet {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect();
        MJet { tab: self.tab.clone(), c }
    }

    pub fn sub(&self, o: &MJet) -> MJet {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect();
        MJet { tab: self.tab.clone(), c }
    }

    pub fn scale(&self, s: f64) -> MJet {
        let c = self.c.iter().map(|a| a * s).collect();
        MJet { tab: self.tab.clone(), c }
    }

    pub fn add_scalar(&self, s: f64) -> MJet {
        let mut c = self.c.clone();
        c[0] += s;
        MJet { tab: self.tab.clone(), c }
    }

    pub fn mul(&self, o: &MJet) -> MJet {
        let tab = &self.tab;
        let mut c = vec![0.0; tab.len()];
        for (k, pairs) in tab.prod.iter().enumerate() {
            let mut acc = 0.0;
            for &(i, j) in pairs {
                acc += self.c[i as usize] * o.c[j as usize];
            }
            c[k] = acc;
        }
        MJet { tab: self.tab.clone(), c }
    }

    /// Composes a univariate analytic function, given its Taylor coefficients
    /// `t_k = f^(k)(u0)/k!` at `u0 = self.value()`, with this jet.
    pub fn compose(&self, coeffs: &[f64]) -> MJet {
        let mut shifted = self.clone();
        shifted.c[0] = 0.0;
        let mut acc = MJet::constant(self.tab.clone(), *coeffs.last().unwrap());
        for k in (0..coeffs.len() - 1).rev() {
            acc = acc.mul(&shifted).add_scalar(coeffs[k]);
        }
        acc
    }

    /// Partial derivative for the multi-index `alpha`.
    pub fn partial(&self, alpha: &[u8]) -> f64 {
        let k = self
            .tab
            .index_of(alpha)
            .expect("multi-index outside jet order");
        self.c[k] * multi_factorial(alpha)
    }
}

pub fn multi_factorial(alpha: &[u8]) -> f64 {
    alpha.iter().map(|&a| FACTORIALS[a as usize]).product()
}

pub const FACTORIALS: [f64; 13] = [
    1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0, 362880.0, 3628800.0, 39916800.0,
    479001600.0,
];

// ---------------------------------------------------------------------------
// Univariate Taylor coefficient generators for the primitive profiles.
// ---------------------------------------------------------------------------

/// Coefficients of t^b at t0 > 0: c_k = binom(b, k) t0^(b-k).
pub fn pow_coeffs(b: f64, t0: f64, n: usize) -> Vec<f64> {
    debug_assert!(t0 > 0.0);
    let mut out = Vec::with_capacity(n + 1);
    let mut binom = 1.0; // binom(b, k)
    for k in 0..=n {
        if k > 0 {
            binom *= (b - (k as f64 - 1.0)) / k as f64;
        }
        out.push(binom * t0.powf(b - k as f64));
    }
    out
}

pub fn exp_coeffs(t0: f64, n: usize) -> Vec<f64> {
    let e = t0.exp();
    (0..=n).map(|k| e / FACTORIALS[k]).collect()
}

pub fn ln_coeffs(t0: f64, n: usize) -> Vec<f64> {
    debug_assert!(t0 > 0.0);
    let mut out = Vec::with_capacity(n + 1);
    out.push(t0.ln());
    for k in 1..=n {
        let sgn = if k % 2 == 0 { -1.0 } else { 1.0 };
        out.push(sgn / (k as f64 * t0.powi(k as i32)));
    }
    out
}

pub fn recip_coeffs(t0: f64, n: usize) -> Vec<f64> {
    debug_assert!(t0 != 0.0);
    (0..=n)
        .map(|k| {
            let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
            sgn / t0.powi(k as i32 + 1)
        })
        .collect()
}

fn jet1(t0: f64, n: usize) -> MJet {
    MJet::variable(table(1, n), 0, t0)
}

/// The C^inf step S: S = 0 for t <= 0, S = 1 for t >= 1, strictly increasing
/// in between, flat to all orders at both junctions, S(t) + S(1-t) = 1.
/// Returns Taylor coefficients at t0.
pub fn smooth_step_coeffs(t0: f64, n: usize) -> Vec<f64> {
    if t0 <= 0.0 {
        let mut c = vec![0.0; n + 1];
        if t0 == 0.0 {
            c[0] = 0.0;
        }
        return c;
    }
    if t0 >= 1.0 {
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0;
        return c;
    }
    // S(t) = g(t) / (g(t) + g(1-t)), g(u) = exp(-1/u).
    let t = jet1(t0, n);
    let g1 = {
        let inv = t.compose(&recip_coeffs(t.value(), n)).scale(-1.0);
        inv.compose(&exp_coeffs(inv.value(), n))
    };
    let one_minus = t.scale(-1.0).add_scalar(1.0);
    let g2 = {
        let inv = one_minus
            .compose(&recip_coeffs(one_minus.value(), n))
            .scale(-1.0);
        inv.compose(&exp_coeffs(inv.value(), n))
    };
    let denom = g1.add(&g2);
    let s = g1.mul(&denom.compose(&recip_coeffs(denom.value(), n)));
    s.c
}

/// Plain value of the smooth step.
pub fn smooth_step_value(t: f64) -> f64 {
    smooth_step_coeffs(t, 0)[0]
}

/// The unit bump profile in the squared radial variable q = |x|^2 / R^2:
/// beta(q) = exp(1 - 1/(1 - q)) for q < 1, 0 otherwise; beta(0) = 1.
pub fn bump_q_coeffs(q0: f64, n: usize) -> Vec<f64> {
    if q0 >= 1.0 {
        return vec![0.0; n + 1];
    }
    let q = jet1(q0, n);
    let one_minus = q.scale(-1.0).add_scalar(1.0);
    let arg = one_minus
        .compose(&recip_coeffs(one_minus.value(), n))
        .scale(-1.0)
        .add_scalar(1.0);
    arg.compose(&exp_coeffs(arg.value(), n)).c
}

/// Taylor coefficients of an affine pre-composition: if `f` has coefficients
/// `coeffs` at the point `scale*t0 + shift`, the function t -> f(scale*t +
/// shift) has coefficients `coeffs[k] * scale^k` at t0.
pub fn affine_arg(coeffs: &[f64], scale: f64) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * scale.powi(k as i32))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], alpha: &[u8], h: f64) -> f64 {
        // Nested central differences.
        let mut indices = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                indices.push(i);
            }
        }
        fn rec(f: &dyn Fn(&[f64]) -> f64, x: &mut Vec<f64>, idx: &[usize], h: f64) -> f64 {
            if idx.is_empty() {
                return f(x);
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
    fn polynomial_jets_are_exact() {
        let tab = table(2, 4);
        let x = MJet::variable(tab.clone(), 0, 1.5);
        let y = MJet::variable(tab.clone(), 1, -0.5);
        // f = x^2 y + 3 x
        let f = x.mul(&x).mul(&y).add(&x.scale(3.0));
        assert_eq!(f.value(), 1.5 * 1.5 * -0.5 + 4.5);
        assert_eq!(f.partial(&[2, 1]), 2.0);
        assert_eq!(f.partial(&[1, 0]), 2.0 * 1.5 * -0.5 + 3.0);
        assert_eq!(f.partial(&[0, 2]), 0.0);
    }

    #[test]
    fn radial_power_derivative() {
        // d/dx1 of |x|^b at (r, 0, 0) equals b r^(b-1).
        let b = -0.7;
        let r = 0.3;
        let tab = table(3, 1);
        let coords: Vec<MJet> = vec![
            MJet::variable(tab.clone(), 0, r),
            MJet::variable(tab.clone(), 1, 0.0),
            MJet::variable(tab.clone(), 2, 0.0),
        ];
        let q = coords
            .iter()
            .fold(MJet::constant(tab.clone(), 0.0), |acc, c| acc.add(&c.mul(c)));
        let f = q.compose(&pow_coeffs(b / 2.0, q.value(), 1));
        let got = f.partial(&[1, 0, 0]);
        let expect = b * r.powf(b - 1.0);
        assert!((got - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn smooth_step_partition_identity() {
        for i in 0..50 {
            let t = -0.2 + 1.4 * i as f64 / 49.0;
            let s = smooth_step_value(t) + smooth_step_value(1.0 - t);
            assert!((s - 1.0).abs() < 1e-14, "t = {t}");
        }
        assert_eq!(smooth_step_value(-1.0), 0.0);
        assert_eq!(smooth_step_value(2.0), 1.0);
    }

    #[test]
    fn step_jets_match_finite_differences() {
        let f = |x: &[f64]| smooth_step_value(x[0]);
        for &t0 in &[0.2, 0.5, 0.77] {
            let coeffs = smooth_step_coeffs(t0, 3);
            for k in 1..=3usize {
                let fd = fd_partial(&f, &[t0], &[k as u8], 1e-3);
                let exact = coeffs[k] * FACTORIALS[k];
                assert!(
                    (fd - exact).abs() <= 1e-4 * exact.abs().max(1.0),
                    "order {k} at {t0}: fd {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn bump_is_one_at_center_and_vanishes() {
        assert!((bump_q_coeffs(0.0, 0)[0] - 1.0).abs() < 1e-15);
        assert_eq!(bump_q_coeffs(1.2, 2), vec![0.0; 3]);
    }

    #[test]
    fn composed_mixed_partial_matches_fd() {
        // f(x) = exp(-1/(1-q)) style bump of |x|^2 times |x|^(-0.4).
        let f = |x: &[f64]| {
            let q: f64 = x.iter().map(|v| v * v).sum();
            let b = bump_q_coeffs(q / 4.0, 0)[0];
            q.sqrt().powf(-0.4) * b
        };
        let x = [0.3, 0.2, 0.1];
        let tab = table(3, 2);
        let coords: Vec<MJet> = (0..3)
            .map(|i| MJet::variable(tab.clone(), i, x[i]))
            .collect();
        let q = coords
            .iter()
            .fold(MJet::constant(tab.clone(), 0.0), |acc, c| acc.add(&c.mul(c)));
        let bump = q.scale(0.25).compose(&bump_q_coeffs(q.value() * 0.25, 2));
        let pow = q.compose(&pow_coeffs(-0.2, q.value(), 2));
        let jet = bump.mul(&pow);
        for alpha in [[1u8, 1, 0], [0, 1, 1], [2, 0, 0]] {
            let fd = fd_partial(&f, &x, &alpha, 1e-4);
            let exact = jet.partial(&alpha);
            let rel = (fd - exact).abs() / exact.abs().max(1e-6);
            assert!(rel < 1e-5, "alpha {alpha:?}: fd {fd} vs jet {exact}");
        }
    }
}
