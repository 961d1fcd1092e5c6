//! Numerical evaluation of the weighted norms by per-dyadic-band quadrature,
//! the extremal-derivative norm, and the tail-slope membership detector.
//!
//! The norm's p-th power is accumulated over the disjoint dyadic bands
//! {2^(-j-1) < rho <= 2^(-j)} (band j1 absorbs everything above), so the
//! totals are exact sums. Convergence is decided from the sign of the
//! least-squares slope of log2 s_j over the deepest bands: weighted integrals
//! of the families used here diverge geometrically in the band index, so the
//! slope sign is a scale-free divergence detector. At an exact membership
//! threshold the contributions are asymptotically flat (logarithmic
//! divergence) and the detector reports Borderline.

mod quad;

pub use quad::{gauss_legendre, paneled_interval};

use serde::{Deserialize, Serialize};

use crate::calculus::SpaceParams;
use crate::error::{Error, Result};
use crate::geometry::{pow2, DomainSpec};
use crate::jet::table;
use crate::rational::to_f64;
use crate::testfuncs::TestFunction;

/// Borderline band: |tail slope| below this (log2 units per band) is neither
/// convergence nor divergence. Chosen so that the sharp-threshold families
/// with weight margins of a few hundredths are still classified, while exact
/// thresholds (slope -> 0) stay Borderline.
pub const MEMBERSHIP_DELTA: f64 = 0.03;

/// Number of deepest bands entering the tail-slope fit.
pub const TAIL_WINDOW: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSpec {
    /// Radial panels per band (8-point Gauss-Legendre each).
    pub radial_panels: usize,
    /// Angular quadrature order (nodes per angular dimension).
    pub angular_order: usize,
    /// Deepest band index.
    pub j_max: i32,
    /// Per-run relative tolerance; the refined-pair estimate must stay
    /// within 10x this value.
    pub target_rel_error: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { radial_panels: 3, angular_order: 12, j_max: 40, target_rel_error: 1e-7 }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.j_max < 8 {
            return Err(Error::InvalidParams(format!(
                "jMax = {} must be at least 8",
                self.j_max
            )));
        }
        if !(self.target_rel_error > 0.0 && self.target_rel_error <= 1e-4) {
            return Err(Error::InvalidParams(format!(
                "targetRelError = {} must lie in (0, 1e-4]",
                self.target_rel_error
            )));
        }
        if self.radial_panels == 0 || self.angular_order < 4 {
            return Err(Error::InvalidParams(
                "radialPanels >= 1 and angularOrder >= 4 required".into(),
            ));
        }
        Ok(())
    }

    fn mc_samples(&self) -> usize {
        80_000 * self.radial_panels
    }
}

/// Per-band p-th-power contributions and their tail diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSeries {
    /// Index of the first band.
    pub j_start: i32,
    /// s[k] = contribution of band j_start + k.
    pub s: Vec<f64>,
    /// Sum of the series (plus the geometric tail estimate when convergent).
    pub total: f64,
    /// Least-squares slope of log2 s_j over the deepest bands.
    pub tail_slope: f64,
    pub converged: bool,
}

impl ShellSeries {
    /// CSV export with columns `j,s_j`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,s_j\n");
        for (k, v) in self.s.iter().enumerate() {
            out.push_str(&format!("{},{:e}\n", self.j_start + k as i32, v));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    /// The norm; `None` when the series did not converge (the integral is
    /// divergent or borderline at this depth).
    pub value: Option<f64>,
    pub series: ShellSeries,
    pub est_rel_error: f64,
    /// Set for p = infinity results: grid suprema are lower bounds.
    pub lower_bound_only: bool,
}

impl NormResult {
    pub fn value_or_inf(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Convergent,
    Divergent,
    Borderline,
}

#[derive(Clone, Copy, PartialEq)]
enum AlphaSet {
    Full,
    Extremal,
}

/// The Kondratiev norm of `tf` in K^m_{a,p}(D, M).
pub fn kondratiev_norm(
    tf: &TestFunction,
    sp: &SpaceParams,
    dom: &DomainSpec,
    quad: &QuadSpec,
) -> Result<NormResult> {
    compute_norm(tf, sp, dom, quad, AlphaSet::Full, true)
}

/// The extremal norm: only the order-0 and order-m terms of the same
/// expression (p-summed), so extremal <= full holds exactly.
pub fn extremal_norm(
    tf: &TestFunction,
    sp: &SpaceParams,
    dom: &DomainSpec,
    quad: &QuadSpec,
) -> Result<NormResult> {
    compute_norm(tf, sp, dom, quad, AlphaSet::Extremal, true)
}

/// Tail-slope membership detector; requires jMax >= 30.
pub fn membership_detect(
    tf: &TestFunction,
    sp: &SpaceParams,
    dom: &DomainSpec,
    quad: &QuadSpec,
) -> Result<Membership> {
    if quad.j_max < 30 {
        return Err(Error::InvalidParams(format!(
            "membership detection requires jMax >= 30, got {}",
            quad.j_max
        )));
    }
    let res = compute_norm(tf, sp, dom, quad, AlphaSet::Full, false)?;
    let slope = res.series.tail_slope;
    Ok(if slope <= -MEMBERSHIP_DELTA {
        Membership::Convergent
    } else if slope >= MEMBERSHIP_DELTA {
        Membership::Divergent
    } else {
        Membership::Borderline
    })
}

fn alphas_for(d: usize, m: u32, set: AlphaSet) -> Vec<Vec<u8>> {
    let tab = table(d, m as usize);
    tab.exps
        .iter()
        .filter(|e| {
            let o: u32 = e.iter().map(|&v| v as u32).sum();
            match set {
                AlphaSet::Full => o <= m,
                AlphaSet::Extremal => o == 0 || o == m,
            }
        })
        .cloned()
        .collect()
}

struct Integrand<'a> {
    tf: &'a TestFunction,
    m: u32,
    alphas: Vec<Vec<u8>>,
    /// (|alpha| - a) * p per alpha (f64), for the weight power.
    weight_exps: Vec<f64>,
    p: f64,
}

impl<'a> Integrand<'a> {
    fn new(tf: &'a TestFunction, sp: &SpaceParams, d: usize, set: AlphaSet) -> Self {
        let alphas = alphas_for(d, sp.m, set);
        let a = to_f64(&sp.a);
        let p = sp.p.to_f64();
        let weight_exps = alphas
            .iter()
            .map(|e| {
                let o: f64 = e.iter().map(|&v| v as f64).sum();
                if p.is_finite() {
                    (o - a) * p
                } else {
                    o - a
                }
            })
            .collect();
        Integrand { tf, m: sp.m, alphas, weight_exps, p }
    }

    /// sum_alpha |rho^(|alpha|-a) d^alpha u|^p at x (rho passed in).
    fn eval_p(&self, x: &[f64], rho: f64) -> Result<f64> {
        let jet = self.tf.jet(x, self.m as usize)?;
        let mut acc = 0.0;
        for (alpha, we) in self.alphas.iter().zip(&self.weight_exps) {
            let v = jet.partial(alpha).abs();
            if v == 0.0 {
                continue;
            }
            let term = if self.p == 2.0 {
                v * v
            } else if self.p == 1.0 {
                v
            } else {
                v.powf(self.p)
            };
            acc += rho.powf(*we) * term;
        }
        Ok(acc)
    }

    /// sum_alpha rho^(|alpha|-a) |d^alpha u| at x (p = infinity mode).
    fn eval_sup(&self, x: &[f64], rho: f64) -> Result<f64> {
        let jet = self.tf.jet(x, self.m as usize)?;
        let mut acc = 0.0;
        for (alpha, we) in self.alphas.iter().zip(&self.weight_exps) {
            acc += rho.powf(*we) * jet.partial(alpha).abs();
        }
        Ok(acc)
    }
}

fn compute_norm(
    tf: &TestFunction,
    sp: &SpaceParams,
    dom: &DomainSpec,
    quad: &QuadSpec,
    set: AlphaSet,
    strict_precision: bool,
) -> Result<NormResult> {
    sp.validate()?;
    dom.validate()?;
    quad.validate()?;
    if (sp.m as usize) > tf.max_order() {
        return Err(Error::OrderExceeded { requested: sp.m as usize, max: tf.max_order() });
    }
    let d = dom.d() as usize;
    let trans = dom.transverse_dim() as usize;
    let support = tf.support(d, trans);
    if support.is_empty() {
        let series = ShellSeries {
            j_start: dom.j1(),
            s: vec![0.0; 4],
            total: 0.0,
            tail_slope: f64::NEG_INFINITY,
            converged: true,
        };
        return Ok(NormResult {
            value: Some(0.0),
            series,
            est_rel_error: 0.0,
            lower_bound_only: false,
        });
    }
    let sing = tf.singularities();
    if !sing.points.is_empty() {
        if sing.on_axis {
            return Err(Error::QuadratureFailure(
                "functions combining an axis power with off-set point singularities are not \
                 supported by the quadrature"
                    .into(),
            ));
        }
        if sing.points.len() > 1 {
            return Err(Error::QuadratureFailure(
                "more than one off-set singular point is not supported".into(),
            ));
        }
        return ring_mode(tf, sp, dom, quad, set, strict_precision, &sing.points[0].0);
    }
    if matches!(dom, DomainSpec::PolyhedralCone { .. }) {
        return polyhedral_mc(tf, sp, dom, quad, set);
    }
    if !dom.is_bounded() && !support.radial[1].is_finite() {
        return Err(Error::QuadratureFailure(
            "unbounded support on the unbounded model pair; pair the function with a cutoff"
                .into(),
        ));
    }
    band_mode(tf, sp, dom, quad, set, strict_precision)
}

/// Radial extent of band j: (2^(-j-1), 2^(-j)], with the head band extended
/// to the supremum of rho-relevant radii.
fn band_interval(j: i32, j1: i32, r_top: f64) -> (f64, f64) {
    if j == j1 {
        (pow2(-j - 1), r_top.max(pow2(-j)))
    } else {
        (pow2(-j - 1), pow2(-j))
    }
}

fn band_mode(
    tf: &TestFunction,
    sp: &SpaceParams,
    dom: &DomainSpec,
    quad: &QuadSpec,
    set: AlphaSet,
    strict_precision: bool,
) -> Result<NormResult> {
    let d = dom.d() as usize;
    let trans = dom.transverse_dim() as usize;
    let support = tf.support(d, trans);
    let integrand = Integrand::new(tf, sp, d, set);
    let j1 = dom.j1();
    let r_top = if dom.is_bounded() {
        // Generous upper radius; band nodes are clipped by geometry anyway.
        2.0 * pow2(-j1)
    } else {
        support.radial[1]
    };

    if sp.p.is_infinite() {
        let mut s = Vec::new();
        let mut per_alpha_sup = vec![0.0f64; integrand.alphas.len()];
        let mut coarse_val = 0.0f64;
        for refine in [1usize, 2] {
            let mut series = Vec::new();
            let mut sups = vec![0.0f64; integrand.alphas.len()];
            for j in j1..=quad.j_max {
                let (lo, hi) = band_interval(j, j1, r_top);
                let nodes = quad::band_nodes(
                    dom,
                    lo,
                    hi,
                    &support,
                    quad.radial_panels * refine,
                    quad.angular_order * refine,
                );
                let mut band_sup = 0.0f64;
                for n in &nodes {
                    let rho = n.dist.min(1.0);
                    band_sup = band_sup.max(integrand.eval_sup(&n.x, rho)?);
                    let jet = integrand.tf.jet(&n.x, integrand.m as usize)?;
                    for ((alpha, we), s) in integrand
                        .alphas
                        .iter()
                        .zip(&integrand.weight_exps)
                        .zip(sups.iter_mut())
                    {
                        *s = s.max(rho.powf(*we) * jet.partial(alpha).abs());
                    }
                }
                series.push(band_sup);
            }
            if refine == 1 {
                coarse_val = sups.iter().sum();
            } else {
                s = series;
                per_alpha_sup = sups;
            }
        }
        let value: f64 = per_alpha_sup.iter().sum();
        let est = if value > 0.0 { ((value - coarse_val) / value).abs() } else { 0.0 };
        let slope = tail_slope(&s);
        return Ok(NormResult {
            value: Some(value),
            series: ShellSeries {
                j_start: j1,
                total: value,
                s,
                tail_slope: slope,
                converged: true,
            },
            est_rel_error: est,
            lower_bound_only: true,
        });
    }

    let pass = |panels: usize, ang: usize| -> Result<Vec<f64>> {
        let mut series = Vec::with_capacity((quad.j_max - j1 + 1) as usize);
        for j in j1..=quad.j_max {
            let (lo, hi) = band_interval(j, j1, r_top);
            let nodes = quad::band_nodes(dom, lo, hi, &support, panels, ang);
            let mut acc = 0.0;
            for n in &nodes {
                let rho = n.dist.min(1.0);
                acc += n.w * integrand.eval_p(&n.x, rho)?;
            }
            series.push(acc);
        }
        Ok(series)
    };
    let coarse = pass(quad.radial_panels, quad.angular_order)?;
    let fine = pass(
        quad.radial_panels * 2,
        quad.angular_order + quad.angular_order / 2,
    )?;
    finish(coarse, fine, j1, sp, quad, strict_precision)
}

fn ring_mode(
    tf: &TestFunction,
    sp: &SpaceParams,
    dom: &DomainSpec,
    quad: &QuadSpec,
    set: AlphaSet,
    strict_precision: bool,
    x0: &[f64],
) -> Result<NormResult> {
    let d = dom.d() as usize;
    let trans = dom.transverse_dim() as usize;
    let support = tf.support(d, trans);
    let integrand = Integrand::new(tf, sp, d, set);
    // Outer radius of the rings: the support radius around x0.
    let mut r_out = f64::INFINITY;
    for (c, r) in &support.balls {
        let dist: f64 = c
            .iter()
            .zip(x0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        r_out = r_out.min(dist + r);
    }
    if !r_out.is_finite() {
        return Err(Error::QuadratureFailure(
            "point-singular function without a bounding ball".into(),
        ));
    }
    let i_start = (-r_out.log2()).floor() as i32;
    let pass = |panels: usize, ang: usize| -> Result<Vec<f64>> {
        let mut series = Vec::new();
        for i in i_start..=quad.j_max {
            let (lo, hi) =
                if i == i_start { (pow2(-i - 1), r_out) } else { (pow2(-i - 1), pow2(-i)) };
            let nodes = quad::ring_nodes(d, x0, lo, hi, panels, ang);
            let mut acc = 0.0;
            for n in &nodes {
                if !dom.contains(&n.x) {
                    continue;
                }
                let rho = dom.dist_singular(&n.x).min(1.0);
                acc += n.w * integrand.eval_p(&n.x, rho)?;
            }
            series.push(acc);
        }
        Ok(series)
    };
    let coarse = pass(quad.radial_panels, quad.angular_order)?;
    let fine = pass(
        quad.radial_panels * 2,
        quad.angular_order + quad.angular_order / 2,
    )?;
    finish(coarse, fine, i_start, sp, quad, strict_precision)
}

fn polyhedral_mc(
    tf: &TestFunction,
    sp: &SpaceParams,
    dom: &DomainSpec,
    quad: &QuadSpec,
    set: AlphaSet,
) -> Result<NormResult> {
    use rand::prelude::*;
    let edges = match dom {
        DomainSpec::PolyhedralCone { edges, .. } => edges,
        _ => unreachable!(),
    };
    let integrand = Integrand::new(tf, sp, 3, set);
    let (mut lo_x, mut hi_x) = (0.0f64, 0.0f64);
    let (mut lo_y, mut hi_y) = (0.0f64, 0.0f64);
    for v in edges {
        lo_x = lo_x.min(v[0]);
        hi_x = hi_x.max(v[0]);
        lo_y = lo_y.min(v[1]);
        hi_y = hi_y.max(v[1]);
    }
    let vol_box = (hi_x - lo_x) * (hi_y - lo_y);
    let n = quad.mc_samples();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0b5e55ed);
    let j1 = dom.j1();
    let bands = (quad.j_max - j1 + 1) as usize;
    let mut s = vec![0.0f64; bands];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let w = vol_box / n as f64;
    for _ in 0..n {
        let x = vec![
            rng.random_range(lo_x..hi_x),
            rng.random_range(lo_y..hi_y),
            rng.random_range(0.0..1.0),
        ];
        if !dom.contains(&x) {
            continue;
        }
        let rho = dom.dist_singular(&x).min(1.0);
        if rho <= 0.0 {
            continue;
        }
        let v = integrand.eval_p(&x, rho)?;
        let j = ((-rho.log2()).floor() as i32).clamp(j1, quad.j_max);
        s[(j - j1) as usize] += w * v;
        sum += v;
        sum_sq += v * v;
    }
    let total: f64 = s.iter().sum();
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    let est = if total > 0.0 {
        (var / n as f64).sqrt() * vol_box / total
    } else {
        0.0
    };
    let slope = tail_slope(&s);
    // Monte-Carlo grade: convergence judged by the deepest bands carrying a
    // negligible share of the mass.
    let tail: f64 = s.iter().rev().take(3).sum();
    let converged = total == 0.0 || tail <= 0.02 * total;
    let p = sp.p.to_f64();
    Ok(NormResult {
        value: if converged { Some(total.powf(1.0 / p)) } else { None },
        series: ShellSeries { j_start: j1, s, total, tail_slope: slope, converged },
        est_rel_error: est,
        lower_bound_only: false,
    })
}

/// Least-squares slope of log2 s over the deepest TAIL_WINDOW bands.
fn tail_slope(s: &[f64]) -> f64 {
    let window = TAIL_WINDOW.min(s.len());
    let tail = &s[s.len() - window..];
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 1e-290)
        .map(|(i, &v)| (i as f64, v.log2()))
        .collect();
    if pts.len() < 3 {
        return if tail.iter().all(|&v| v <= 1e-290) { f64::NEG_INFINITY } else { 0.0 };
    }
    least_squares_slope(&pts)
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return 0.0;
    }
    (n * sxy - sx * sy) / denom
}

fn finish(
    coarse: Vec<f64>,
    fine: Vec<f64>,
    j_start: i32,
    sp: &SpaceParams,
    quad: &QuadSpec,
    strict_precision: bool,
) -> Result<NormResult> {
    let t1: f64 = coarse.iter().sum();
    let mut total: f64 = fine.iter().sum();
    let slope = tail_slope(&fine);
    let converged = slope <= -MEMBERSHIP_DELTA;
    let mut est = if total != 0.0 { ((total - t1) / total).abs() } else { 0.0 };

    if converged && slope.is_finite() {
        // Geometric tail extrapolation past j_max, with the spread of two
        // window fits as its uncertainty.
        let last = *fine.last().unwrap_or(&0.0);
        let q = pow2_f(slope);
        if q < 1.0 && last > 0.0 {
            let corr = last * q / (1.0 - q);
            let short = tail_slope(&fine[fine.len().saturating_sub(8)..]);
            let q2 = pow2_f(short);
            let corr2 = if q2 < 1.0 { last * q2 / (1.0 - q2) } else { corr };
            total += corr;
            if total > 0.0 {
                est += (corr - corr2).abs() / total;
            }
        }
    }
    if strict_precision && converged && est > 10.0 * quad.target_rel_error {
        return Err(Error::QuadratureFailure(format!(
            "refined quadrature pair disagrees: estimated relative error {est:.3e} exceeds \
             10 x targetRelError = {:.3e}",
            10.0 * quad.target_rel_error
        )));
    }
    let p = sp.p.to_f64();
    let value = if converged { Some(total.max(0.0).powf(1.0 / p)) } else { None };
    Ok(NormResult {
        value,
        series: ShellSeries { j_start, s: fine, total, tail_slope: slope, converged },
        est_rel_error: est,
        lower_bound_only: false,
    })
}

fn pow2_f(e: f64) -> f64 {
    (2.0f64).powf(e)
}

/// Sup norm of a test function over a sampled grid of the domain (used by
/// the Moser suite); a lower-bound estimate.
pub fn sup_norm_sampled(tf: &TestFunction, dom: &DomainSpec, quad: &QuadSpec) -> Result<f64> {
    let d = dom.d() as usize;
    let trans = dom.transverse_dim() as usize;
    let support = tf.support(d, trans);
    let j1 = dom.j1();
    let mut best = 0.0f64;
    for j in j1..=quad.j_max.min(j1 + 30) {
        let (lo, hi) = band_interval(j, j1, if dom.is_bounded() { 2.0 } else { support.radial[1] });
        for n in quad::band_nodes(dom, lo, hi, &support, quad.radial_panels, quad.angular_order) {
            best = best.max(tf.eval(&n.x)?.abs());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratq};

    fn default_quad() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn closed_form_constant_on_smooth_cone() {
        // ||1||^p = omega(gamma) / (d - a p) for m = 0.
        let gamma: f64 = 1.2;
        let dom = DomainSpec::SmoothCone { d: 3, gamma };
        let sp = SpaceParams::finite(0, rat(1), rat(2));
        let res = kondratiev_norm(&TestFunction::constant(1.0), &sp, &dom, &default_quad())
            .unwrap();
        let omega = 2.0 * std::f64::consts::PI * (1.0 - (gamma / 2.0).cos());
        let expect = omega; // d - a p = 1
        let got = res.value.unwrap().powi(2);
        assert!(
            ((got - expect) / expect).abs() < 1e-6,
            "got {got}, expect {expect}, est {:.2e}",
            res.est_rel_error
        );
    }

    #[test]
    fn closed_form_2d_cone() {
        let gamma: f64 = 0.9;
        let dom = DomainSpec::SmoothCone { d: 2, gamma };
        // a = 1/2, p = 2: d - ap = 1.
        let sp = SpaceParams::finite(0, ratq(1, 2), rat(2));
        let res = kondratiev_norm(&TestFunction::constant(1.0), &sp, &dom, &default_quad())
            .unwrap();
        let got = res.value.unwrap().powi(2);
        let expect = gamma; // omega = arc length, d - ap = 1
        assert!(((got - expect) / expect).abs() < 1e-6, "got {got} vs {expect}");
    }

    #[test]
    fn rho_power_membership_finite() {
        // rho^b psi on the model pair: converges iff a - b < (d - l)/p.
        let dom = DomainSpec::Model { d: 3, l: 0 };
        let tf = TestFunction::rho_power(-0.4, 3).multiply(TestFunction::psi());
        let quad = QuadSpec { j_max: 36, ..Default::default() };
        // a = 1.0: a - b = 1.4 < 1.5.
        let sp = SpaceParams::finite(1, rat(1), rat(2));
        let res = kondratiev_norm(&tf, &sp, &dom, &quad).unwrap();
        assert!(res.series.converged);
        assert!(res.value.unwrap().is_finite());
    }

    #[test]
    fn membership_detector_thresholds() {
        let dom = DomainSpec::Model { d: 3, l: 0 };
        let quad = QuadSpec { j_max: 36, ..Default::default() };
        let b = -0.4;
        let tf = TestFunction::rho_power(b, 3).multiply(TestFunction::psi());
        // Query space exponent a + b with a = 1.4 (< 1.5): convergent.
        let sp = SpaceParams::finite(1, ratq(14, 10) + ratq(-4, 10), rat(2));
        assert_eq!(
            membership_detect(&tf, &sp, &dom, &quad).unwrap(),
            Membership::Convergent
        );
        // a = 1.6: divergent.
        let sp = SpaceParams::finite(1, ratq(16, 10) + ratq(-4, 10), rat(2));
        assert_eq!(
            membership_detect(&tf, &sp, &dom, &quad).unwrap(),
            Membership::Divergent
        );
        // a = 1.5: borderline.
        let sp = SpaceParams::finite(1, ratq(15, 10) + ratq(-4, 10), rat(2));
        assert_eq!(
            membership_detect(&tf, &sp, &dom, &quad).unwrap(),
            Membership::Borderline
        );
    }

    #[test]
    fn shell_decay_slope_matches_radial_exponent() {
        // log2 s_j affine with slope -((b - a) p + (d - l)).
        let dom = DomainSpec::Model { d: 3, l: 1 };
        let b = -0.3;
        let a = 0.6;
        let p = 2.0;
        let tf = TestFunction::rho_power(b, 2).multiply(TestFunction::psi());
        let sp = SpaceParams::finite(1, ratq(6, 10), rat(2));
        let quad = QuadSpec { j_max: 34, ..Default::default() };
        let res = kondratiev_norm(&tf, &sp, &dom, &quad).unwrap();
        let expect = -((b - a) * p + 2.0);
        assert!(
            (res.series.tail_slope - expect).abs() < 0.02,
            "slope {} vs {expect}",
            res.series.tail_slope
        );
    }

    #[test]
    fn extremal_le_full_and_equal_at_m0() {
        let dom = DomainSpec::Model { d: 3, l: 0 };
        let tf = TestFunction::rho_power(-0.2, 3).multiply(TestFunction::psi());
        let quad = default_quad();
        for m in [0u32, 1, 2] {
            let sp = SpaceParams::finite(m, rat(1), rat(2));
            let full = kondratiev_norm(&tf, &sp, &dom, &quad).unwrap();
            let ext = extremal_norm(&tf, &sp, &dom, &quad).unwrap();
            let (f, e) = (full.value.unwrap(), ext.value.unwrap());
            assert!(e <= f * (1.0 + 1e-12), "m = {m}: extremal {e} > full {f}");
            if m == 0 {
                assert_eq!(e, f);
            }
        }
    }

    #[test]
    fn dilation_scaling_exact() {
        // ||u(lambda .)|| = lambda^(a - d/p) ||u|| for supports inside the cap.
        let dom = DomainSpec::Model { d: 3, l: 0 };
        let u = TestFunction::rho_power(-0.3, 3)
            .multiply(TestFunction::bump(vec![0.75, 0.0, 0.0], 0.125));
        let sp = SpaceParams::finite(2, rat(1), rat(2));
        let quad = default_quad();
        let base = kondratiev_norm(&u, &sp, &dom, &quad).unwrap().value.unwrap();
        for lam in [2.0, 4.0, 8.0] {
            let dil = u.clone().dilate(lam).unwrap();
            let got = kondratiev_norm(&dil, &sp, &dom, &quad).unwrap().value.unwrap();
            let expect = lam.powf(1.0 - 1.5) * base;
            assert!(
                ((got - expect) / expect).abs() < 1e-6,
                "lambda {lam}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn quadrature_refinement_stays_within_estimate() {
        let dom = DomainSpec::SmoothCone { d: 3, gamma: 1.0 };
        let sp = SpaceParams::finite(0, ratq(1, 2), rat(2));
        let tf = TestFunction::constant(1.0);
        let q1 = default_quad();
        let r1 = kondratiev_norm(&tf, &sp, &dom, &q1).unwrap();
        let q2 = QuadSpec {
            radial_panels: q1.radial_panels * 2,
            angular_order: q1.angular_order * 2,
            ..q1.clone()
        };
        let r2 = kondratiev_norm(&tf, &sp, &dom, &q2).unwrap();
        let diff = ((r1.value.unwrap() - r2.value.unwrap()) / r2.value.unwrap()).abs();
        assert!(diff <= r1.est_rel_error.max(1e-12), "diff {diff} vs est {}", r1.est_rel_error);
    }

    #[test]
    fn falpha_ring_mode_detects_sobolev_threshold() {
        // f_alpha in W^m_p near x0 iff alpha < d/p - m; the weight is inert
        // away from the singular set.
        let dom = DomainSpec::Model { d: 3, l: 0 };
        let x0 = vec![0.0, 0.0, 0.75];
        let quad = QuadSpec { j_max: 34, ..Default::default() };
        // d/p - m = 1.5 - 1 = 0.5 at p = 2, m = 1.
        let scaled = |alpha: f64| {
            TestFunction::f_alpha(alpha, x0.clone())
                .multiply(TestFunction::bump(x0.clone(), 0.1))
        };
        let sp = SpaceParams::finite(1, rat(0), rat(2));
        assert_eq!(
            membership_detect(&scaled(0.3), &sp, &dom, &quad).unwrap(),
            Membership::Convergent
        );
        assert_eq!(
            membership_detect(&scaled(0.7), &sp, &dom, &quad).unwrap(),
            Membership::Divergent
        );
    }

    #[test]
    fn infinite_p_gives_flagged_lower_bound() {
        let dom = DomainSpec::Model { d: 3, l: 0 };
        let tf = TestFunction::psi();
        let sp = SpaceParams::new(0, rat(0), Integrability::Infinity);
        let res = kondratiev_norm(&tf, &sp, &dom, &default_quad()).unwrap();
        assert!(res.lower_bound_only);
        let v = res.value.unwrap();
        assert!(v > 0.9 && v <= 1.0 + 1e-9, "sup estimate {v}");
    }

    #[test]
    fn divergent_norm_reports_nonnegative_slope() {
        let dom = DomainSpec::Model { d: 3, l: 0 };
        let tf = TestFunction::rho_power(-0.4, 3).multiply(TestFunction::psi());
        // a - b = 1.9 >= 1.5: divergent.
        let sp = SpaceParams::finite(1, ratq(15, 10), rat(2));
        let res = kondratiev_norm(&tf, &sp, &dom, &default_quad()).unwrap();
        assert!(!res.series.converged);
        assert!(res.value.is_none());
        assert!(res.series.tail_slope >= 0.0);
    }

    #[test]
    fn quad_spec_validation() {
        assert!(QuadSpec { j_max: 4, ..Default::default() }.validate().is_err());
        assert!(QuadSpec { target_rel_error: 1e-3, ..Default::default() }
            .validate()
            .is_err());
        assert!(QuadSpec::default().validate().is_ok());
    }

    #[test]
    fn csv_export_shape() {
        let s = ShellSeries {
            j_start: 0,
            s: vec![1.0, 0.5],
            total: 1.5,
            tail_slope: -1.0,
            converged: true,
        };
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("j,s_j"));
        assert!(lines.next().unwrap().starts_with("0,"));
        assert!(lines.next().unwrap().starts_with("1,"));
    }
}
