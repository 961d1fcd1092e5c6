//! Smooth dyadic partition of unity subordinate to the shells Omega_j.
//!
//! The partition is synthesized from a single 1-D profile in the variable
//! s = log2(1/dist(x, M)): phi_j(x) = theta(s - j) for j > j1, and the head
//! phi_j1 collapses every coarser translate so that the sum is exactly 1 on
//! the whole domain. The profile theta is a difference of two C^inf steps of
//! width 1/2, so supp theta = [-3/4, 3/4]; in radial terms supp phi_j lies in
//! (2^(-j-3/4), 2^(-j+3/4)), strictly inside Omega_j even after shrinking the
//! shell by the margins eps_j = 2^(-j-4).

use serde::{Deserialize, Serialize};

use super::{pow2, DomainSpec};
use crate::error::{Error, Result};
use crate::jet::{
    affine_arg, ln_coeffs, pow_coeffs, smooth_step_coeffs, smooth_step_value, table, MJet,
};

pub const MAX_PARTITION_ORDER: usize = 6;

/// Specification of the dyadic partition of unity for one domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionSpec {
    /// Starting index; phi_{j1} absorbs the coarse tail.
    pub j1: i32,
}

impl PartitionSpec {
    pub fn for_domain(dom: &DomainSpec) -> Self {
        PartitionSpec { j1: dom.j1() }
    }

    /// Shell margin guaranteed by the profile: supp phi_j stays at distance
    /// eps_j from the boundary of Omega_j.
    pub fn epsilon(&self, j: i32) -> f64 {
        pow2(-j - 4)
    }
}

/// Re-export of the C^inf step used to build the profile.
pub fn smooth_step(t: f64) -> f64 {
    smooth_step_value(t)
}

/// S2: step of width 1/2 rising on [-1/4, 1/4].
fn s2_coeffs(u0: f64, n: usize) -> Vec<f64> {
    affine_arg(&smooth_step_coeffs(2.0 * u0 + 0.5, n), 2.0)
}

/// Taylor coefficients of the partition profile theta at t0.
/// theta(t) = S2(t + 1/2) - S2(t - 1/2); theta(0) = 1, supp = [-3/4, 3/4],
/// and the integer translates of theta sum to 1 exactly.
pub fn theta_profile(t0: f64, n: usize) -> Vec<f64> {
    let a = s2_coeffs(t0 + 0.5, n);
    let b = s2_coeffs(t0 - 0.5, n);
    a.iter().zip(&b).map(|(x, y)| x - y).collect()
}

pub fn theta_value(t: f64) -> f64 {
    theta_profile(t, 0)[0]
}

/// Jet of the squared distance to M along its smooth branch at x.
pub(crate) fn dist_sq_jet(dom: &DomainSpec, x: &[f64], order: usize) -> Result<MJet> {
    let d = dom.d() as usize;
    let tab = table(d, order);
    let coords: Vec<MJet> = (0..d).map(|i| MJet::variable(tab.clone(), i, x[i])).collect();
    let sum_sq = |idx: std::ops::Range<usize>| -> MJet {
        let mut acc = MJet::constant(tab.clone(), 0.0);
        for i in idx {
            acc = acc.add(&coords[i].mul(&coords[i]));
        }
        acc
    };
    Ok(match dom {
        DomainSpec::Model { l, .. } => sum_sq(0..d - *l as usize),
        DomainSpec::SmoothCone { .. } => sum_sq(0..d),
        DomainSpec::NonsmoothCone { .. } => sum_sq(0..d - 1),
        DomainSpec::DihedralCube { l, .. } => sum_sq(0..d - *l as usize),
        DomainSpec::PolyhedralCone { edges, .. } => {
            // Nearest edge, smooth branch (projection interior vs endpoints).
            let mut best: Option<(f64, MJet)> = None;
            for v in edges {
                let b = [v[0], v[1], 1.0];
                let len2: f64 = b.iter().map(|t| t * t).sum();
                let t = (x[0] * b[0] + x[1] * b[1] + x[2] * b[2]) / len2;
                let q = if t <= 0.0 {
                    sum_sq(0..3)
                } else if t >= 1.0 {
                    let mut acc = MJet::constant(tab.clone(), 0.0);
                    for i in 0..3 {
                        let diff = coords[i].add_scalar(-b[i]);
                        acc = acc.add(&diff.mul(&diff));
                    }
                    acc
                } else {
                    // dist^2 = |x|^2 - (x.b)^2/|b|^2
                    let dot = coords[0]
                        .scale(b[0])
                        .add(&coords[1].scale(b[1]))
                        .add(&coords[2].scale(b[2]));
                    sum_sq(0..3).sub(&dot.mul(&dot).scale(1.0 / len2))
                };
                match &best {
                    Some((bv, _)) if *bv <= q.value() => {}
                    _ => best = Some((q.value(), q)),
                }
            }
            best.unwrap().1
        }
    })
}

/// s = log2(1/dist) as a jet; dist taken uncapped on its smooth branch.
fn log_scale_jet(dom: &DomainSpec, x: &[f64], order: usize) -> Result<MJet> {
    let q = dist_sq_jet(dom, x, order)?;
    if q.value() <= 0.0 {
        return Err(Error::ZeroWeightPoint);
    }
    // s = -ln(q) / (2 ln 2)
    let lnq = q.compose(&ln_coeffs(q.value(), order));
    Ok(lnq.scale(-0.5 / std::f64::consts::LN_2))
}

/// The partition function phi_j and all its partial derivatives up to
/// `order`, returned as a jet.
pub fn partition_jet(
    spec: &PartitionSpec,
    dom: &DomainSpec,
    j: i32,
    x: &[f64],
    order: usize,
) -> Result<MJet> {
    if order > MAX_PARTITION_ORDER {
        return Err(Error::OrderExceeded { requested: order, max: MAX_PARTITION_ORDER });
    }
    if j < spec.j1 {
        return Err(Error::InvalidParams(format!(
            "shell index {j} below starting index {}",
            spec.j1
        )));
    }
    if !dom.contains(x) {
        return Err(Error::PointOutsideDomain(format!("{x:?}")));
    }
    let s = log_scale_jet(dom, x, order)?;
    if j == spec.j1 {
        // Head: 1 - S2(s - j1 - 1/2), the collapsed sum of all coarser
        // translates.
        let u = s.add_scalar(-(j as f64) - 0.5);
        let s2 = u.compose(&s2_coeffs(u.value(), order));
        Ok(s2.scale(-1.0).add_scalar(1.0))
    } else {
        let t = s.add_scalar(-(j as f64));
        Ok(t.compose(&theta_profile(t.value(), order)))
    }
}

/// Value-only convenience wrapper.
pub fn partition_value(
    spec: &PartitionSpec,
    dom: &DomainSpec,
    j: i32,
    x: &[f64],
) -> Result<f64> {
    Ok(partition_jet(spec, dom, j, x, 0)?.value())
}

// ---------------------------------------------------------------------------
// Regularized distance: a C^inf substitute for min(1, dist) with two-sided
// bounds A rho <= rho~ <= B rho and |d^alpha rho~| <= C_alpha rho^(1-|alpha|).
// ---------------------------------------------------------------------------

/// Taylor coefficients of the cap profile: identity below 7/8, constant 15/16
/// above 1, C^inf monotone blend on the transition window of width 1/8.
fn cap_coeffs(t0: f64, n: usize) -> Vec<f64> {
    if t0 <= 7.0 / 8.0 {
        let mut c = vec![0.0; n + 1];
        c[0] = t0;
        if n >= 1 {
            c[1] = 1.0;
        }
        return c;
    }
    if t0 >= 1.0 {
        let mut c = vec![0.0; n + 1];
        c[0] = 15.0 / 16.0;
        return c;
    }
    // cap(t) = t - int_{7/8}^{t} S(8(s - 7/8)) ds
    let mut c = vec![0.0; n + 1];
    c[0] = t0 - gl_integral_step(t0);
    if n >= 1 {
        let dcoeffs = affine_arg(&smooth_step_coeffs(8.0 * (t0 - 7.0 / 8.0), n - 1), 8.0);
        c[1] = 1.0 - dcoeffs[0];
        for k in 1..n {
            c[k + 1] = -dcoeffs[k] / (k as f64 + 1.0);
        }
    }
    c
}

/// 24-point Gauss-Legendre integral of S(8(s-7/8)) over [7/8, t].
fn gl_integral_step(t: f64) -> f64 {
    let (nodes, weights) = crate::norms::gauss_legendre(24);
    let a = 7.0 / 8.0;
    let half = (t - a) / 2.0;
    let mid = (t + a) / 2.0;
    let mut acc = 0.0;
    for (xi, wi) in nodes.iter().zip(&weights) {
        let s = mid + half * xi;
        acc += wi * smooth_step_value(8.0 * (s - a));
    }
    acc * half
}

/// Jet of the regularized weight rho~ = cap(dist(x, M)).
pub fn regularized_weight_jet(dom: &DomainSpec, x: &[f64], order: usize) -> Result<MJet> {
    if !dom.contains(x) {
        return Err(Error::PointOutsideDomain(format!("{x:?}")));
    }
    let q = dist_sq_jet(dom, x, order)?;
    if q.value() <= 0.0 {
        return Err(Error::ZeroWeightPoint);
    }
    let r = q.compose(&pow_coeffs(0.5, q.value(), order));
    Ok(r.compose(&cap_coeffs(r.value(), order)))
}

pub fn regularized_weight(dom: &DomainSpec, x: &[f64]) -> Result<f64> {
    Ok(regularized_weight_jet(dom, x, 0)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    fn model(d: u32, l: u32) -> DomainSpec {
        DomainSpec::Model { d, l }
    }

    #[test]
    fn theta_is_a_partition_profile() {
        for i in 0..200 {
            let t = -2.0 + 6.0 * i as f64 / 199.0;
            let sum: f64 = (-4..8).map(|k| theta_value(t - k as f64)).sum();
            assert!((sum - 1.0).abs() < 1e-13, "t = {t}, sum = {sum}");
        }
        assert_eq!(theta_value(0.0), 1.0);
        assert_eq!(theta_value(1.0), 0.0);
        assert_eq!(theta_value(-0.75), 0.0);
        assert_eq!(theta_value(0.75), 0.0);
    }

    #[test]
    fn sum_to_one_on_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for dom in [model(3, 0), model(3, 1), model(2, 0)] {
            let spec = PartitionSpec::for_domain(&dom);
            for _ in 0..2000 {
                let scale = pow2(rng.random_range(-20..2));
                let x: Vec<f64> = (0..dom.d() as usize)
                    .map(|_| rng.random_range(-1.0..1.0) * scale)
                    .collect();
                if !dom.contains(&x) {
                    continue;
                }
                let w = dom.weight(&x).unwrap();
                let jc = (-w.log2()).round() as i32;
                let mut sum = 0.0;
                for j in (jc - 3).max(spec.j1)..=(jc + 3) {
                    sum += partition_value(&spec, &dom, j, &x).unwrap();
                }
                assert!((sum - 1.0).abs() < 1e-12, "x = {x:?}, sum = {sum}");
            }
        }
    }

    #[test]
    fn support_containment_is_exact() {
        let dom = model(3, 1);
        let spec = PartitionSpec::for_domain(&dom);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..3000 {
            let scale = pow2(rng.random_range(-12..2));
            let x = [
                rng.random_range(-1.0..1.0) * scale,
                rng.random_range(-1.0..1.0) * scale,
                rng.random_range(-1.0..1.0),
            ];
            if !dom.contains(&x) {
                continue;
            }
            let w = dom.weight(&x).unwrap();
            let jc = (-w.log2()).round() as i32;
            for j in (jc - 3).max(spec.j1)..=(jc + 3) {
                let v = partition_value(&spec, &dom, j, &x).unwrap();
                let shell = super::super::Shell::new(j);
                if v != 0.0 && j > spec.j1 {
                    assert!(
                        shell.contains_value(w),
                        "phi_{j}({x:?}) = {v} outside shell"
                    );
                    // Also inside the eps_j-shrunk shell.
                    assert!(w > shell.inner + spec.epsilon(j));
                    assert!(w < shell.outer - spec.epsilon(j));
                }
                if v != 0.0 && j == spec.j1 {
                    assert!(w > shell.inner + spec.epsilon(j));
                }
            }
        }
    }

    #[test]
    fn model_case_self_similarity_exact() {
        // phi_j(x) = phi_1(2^(j-1) x) exactly, for j >= 1.
        let dom = model(3, 0);
        let spec = PartitionSpec::for_domain(&dom);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let j = rng.random_range(1..24);
            let r = pow2(-j) * rng.random_range(0.4..2.5);
            let dir: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = super::super::norm(&dir);
            if n == 0.0 {
                continue;
            }
            let x: Vec<f64> = dir.iter().map(|v| v * r / n).collect();
            let lhs = partition_value(&spec, &dom, j, &x).unwrap();
            let y: Vec<f64> = x.iter().map(|v| v * pow2(j - 1)).collect();
            let rhs = partition_value(&spec, &dom, 1, &y).unwrap();
            assert_eq!(lhs, rhs, "j = {j}, x = {x:?}");
        }
    }

    #[test]
    fn shell_center_gives_one() {
        let dom = model(3, 0);
        let spec = PartitionSpec::for_domain(&dom);
        for j in 1..10 {
            let x = [pow2(-j), 0.0, 0.0];
            assert_eq!(partition_value(&spec, &dom, j, &x).unwrap(), 1.0);
            assert_eq!(partition_value(&spec, &dom, j + 1, &x).unwrap(), 0.0);
            assert_eq!(partition_value(&spec, &dom, j - 1, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn gradient_growth_bound() {
        // |grad phi_j| <= C 2^j with a single C across shells.
        let dom = model(2, 0);
        let spec = PartitionSpec::for_domain(&dom);
        let mut worst = 0.0f64;
        for j in 1..20 {
            for i in 0..40 {
                let r = pow2(-j) * (0.6 + i as f64 * 0.03);
                let x = [r, 0.0];
                let jet = partition_jet(&spec, &dom, j, &x, 1).unwrap();
                let g = (jet.partial(&[1, 0]).powi(2) + jet.partial(&[0, 1]).powi(2)).sqrt();
                worst = worst.max(g / pow2(j));
            }
        }
        // Measured once: sup |grad phi_j| * 2^-j ~= 3.69; frozen with headroom.
        assert!(worst <= 7.5, "gradient constant {worst}");
        assert!(worst > 0.0);
    }

    #[test]
    fn partition_on_bounded_domains() {
        let cone = DomainSpec::SmoothCone { d: 3, gamma: 1.2 };
        let spec = PartitionSpec::for_domain(&cone);
        assert_eq!(spec.j1, 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 500 {
            let z: f64 = rng.random_range(0.0..1.0);
            let rad = rng.random_range(0.0..1.0) * z;
            let x = [rad * 0.3, rad * 0.2, z];
            if !cone.contains(&x) {
                continue;
            }
            let w = cone.weight(&x).unwrap();
            let jc = (-w.log2()).round() as i32;
            let sum: f64 = ((jc - 3).max(0)..=(jc + 3))
                .map(|j| partition_value(&spec, &cone, j, &x).unwrap())
                .sum();
            assert!((sum - 1.0).abs() < 1e-12);
            checked += 1;
        }
    }

    #[test]
    fn regularized_weight_two_sided_bounds() {
        let dom = model(3, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let scale = pow2(rng.random_range(-10..3));
            let x = [
                rng.random_range(-1.0..1.0) * scale,
                rng.random_range(-1.0..1.0) * scale,
                rng.random_range(-1.0..1.0),
            ];
            if !dom.contains(&x) {
                continue;
            }
            let rho = dom.weight(&x).unwrap();
            let reg = regularized_weight(&dom, &x).unwrap();
            assert!(reg >= 7.0 / 8.0 * rho - 1e-15, "A bound at {x:?}");
            assert!(reg <= rho + 1e-15, "B bound at {x:?}");
        }
    }

    #[test]
    fn regularized_weight_derivative_bounds() {
        // |d^alpha rho~| <= C_alpha rho^(1-|alpha|) on a sampled grid.
        let dom = model(2, 0);
        let mut worst = [0.0f64; 4];
        for j in 0..14 {
            for i in 0..30 {
                let r = pow2(-j) * (0.55 + 0.05 * i as f64);
                let x = [r * 0.8, r * 0.6];
                let jet = regularized_weight_jet(&dom, &x, 3).unwrap();
                let rho = dom.weight(&x).unwrap();
                for (k, alpha) in [[1u8, 0], [2, 0], [1, 2]].iter().enumerate() {
                    let o: u8 = alpha.iter().sum();
                    let v = jet.partial(alpha).abs();
                    worst[k] = worst[k].max(v * rho.powi(o as i32 - 1));
                }
                let _ = worst;
                let _ = rho;
            }
        }
        // Frozen regression bounds (measured, doubled).
        assert!(worst[0] <= 2.0, "first order {}", worst[0]);
        assert!(worst[1] <= 45.0, "second order {}", worst[1]);
        assert!(worst[2] <= 120.0, "third order {}", worst[2]);
    }
}
