//! Quadrature node generation: Gauss-Legendre panels in coordinates adapted
//! to the singular set, per dyadic band.

use crate::geometry::DomainSpec;
use crate::testfuncs::Support;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let out = (nodes, weights);
    cache.lock().unwrap().insert(n, out.clone());
    out
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// GL nodes over [a, b] split into `panels` equal panels of 8 nodes each.
pub fn paneled_interval(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if !(b > a) {
        return out;
    }
    let (xs, ws) = gauss_legendre(8);
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for (x, w) in xs.iter().zip(&ws) {
            out.push((mid + half * x, w * half));
        }
    }
    out
}

/// Uniform (trapezoid) nodes on the periodic circle [0, 2pi).
fn circle_nodes(n: usize) -> Vec<(f64, f64)> {
    let w = 2.0 * std::f64::consts::PI / n as f64;
    (0..n).map(|k| (k as f64 * w, w)).collect()
}

/// A quadrature node: ambient point, total weight (all Jacobians included),
/// and the exact distance to the singular set.
pub struct Node {
    pub x: Vec<f64>,
    pub w: f64,
    pub dist: f64,
}

/// Splits [lo, hi] at the weight-cap radius 1 so panels never straddle the
/// kink of min(1, r).
fn radial_segments(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    if lo < 1.0 && hi > 1.0 {
        vec![(lo, 1.0), (1.0, hi)]
    } else {
        vec![(lo, hi)]
    }
}

/// Generates the nodes of one radial band [r_lo, r_hi] (in the distance-to-M
/// coordinate), clipped against the support descriptor.
pub fn band_nodes(
    dom: &DomainSpec,
    r_lo: f64,
    r_hi: f64,
    support: &Support,
    radial_panels: usize,
    angular_order: usize,
) -> Vec<Node> {
    let lo = r_lo.max(support.radial[0]);
    let hi = r_hi.min(support.radial[1]);
    if !(hi > lo) {
        return Vec::new();
    }
    let mut nodes = Vec::new();
    match dom {
        DomainSpec::Model { d, l } => {
            let trans = (d - l) as usize;
            let boxes = xsecond_boxes(support, *l as usize, radial_panels);
            for (seg_lo, seg_hi) in radial_segments(lo, hi) {
                for (r, wr) in paneled_interval(seg_lo, seg_hi, radial_panels) {
                    for (dir, wa) in sphere_nodes(trans, angular_order, None) {
                        let mut x: Vec<f64> = dir.iter().map(|v| v * r).collect();
                        x.resize(*d as usize, 0.0);
                        let jac = r.powi(trans as i32 - 1);
                        for (xsec, wb) in &boxes {
                            for (i, v) in xsec.iter().enumerate() {
                                x[trans + i] = *v;
                            }
                            nodes.push(Node { x: x.clone(), w: wr * wa * wb * jac, dist: r });
                        }
                    }
                }
            }
        }
        DomainSpec::SmoothCone { d, gamma } => {
            let hi = hi.min(1.0);
            if !(hi > lo) {
                return Vec::new();
            }
            let polar = cap_polar_range(*gamma, support);
            for (r, wr) in paneled_interval(lo, hi, radial_panels) {
                for (dir, wa) in sphere_nodes(*d as usize, angular_order, Some(polar)) {
                    let x: Vec<f64> = dir.iter().map(|v| v * r).collect();
                    let jac = r.powi(*d as i32 - 1);
                    nodes.push(Node { x, w: wr * wa * jac, dist: r });
                }
            }
        }
        DomainSpec::NonsmoothCone { d, gamma } => {
            let t = (gamma / 2.0).tan();
            if *d == 2 {
                // x = (r, z) with r < min(1, t z).
                let hi = hi.min(1.0);
                for (r, wr) in paneled_interval(lo, hi, radial_panels) {
                    let z_lo = r / t;
                    if z_lo >= 1.0 {
                        continue;
                    }
                    for (z, wz) in paneled_interval(z_lo, 1.0, radial_panels) {
                        nodes.push(Node { x: vec![r, z], w: wr * wz, dist: r });
                    }
                }
            } else {
                // Quarter arc from the cube walls; the box also caps r.
                let (xs, ws) = gauss_legendre(angular_order);
                for (xi, wth) in xs.iter().zip(&ws) {
                    let theta = std::f64::consts::FRAC_PI_4 * (xi + 1.0);
                    let wth = wth * std::f64::consts::FRAC_PI_4;
                    let r_box = (1.0 / theta.cos()).min(1.0 / theta.sin());
                    let hi_t = hi.min(r_box);
                    for (seg_lo, seg_hi) in radial_segments(lo, hi_t) {
                        for (r, wr) in paneled_interval(seg_lo, seg_hi, radial_panels) {
                            let z_lo = r / t;
                            if z_lo >= 1.0 {
                                continue;
                            }
                            for (z, wz) in paneled_interval(z_lo, 1.0, radial_panels) {
                                let x = vec![r * theta.cos(), r * theta.sin(), z];
                                nodes.push(Node { x, w: wr * wth * wz * r, dist: r });
                            }
                        }
                    }
                }
            }
        }
        DomainSpec::DihedralCube { d, l } => {
            let trans = (d - l) as usize;
            let boxes = xsecond_unit_boxes(support, *l as usize, radial_panels);
            match trans {
                1 => {
                    let hi = hi.min(1.0);
                    for (seg_lo, seg_hi) in radial_segments(lo, hi) {
                        for (r, wr) in paneled_interval(seg_lo, seg_hi, radial_panels) {
                            for (xsec, wb) in &boxes {
                                let mut x = vec![r];
                                x.extend_from_slice(xsec);
                                nodes.push(Node { x, w: wr * wb, dist: r });
                            }
                        }
                    }
                }
                2 => {
                    let (xs, ws) = gauss_legendre(angular_order);
                    for (xi, wth) in xs.iter().zip(&ws) {
                        let theta = std::f64::consts::FRAC_PI_4 * (xi + 1.0);
                        let wth = wth * std::f64::consts::FRAC_PI_4;
                        // Box constraint: r < min(1/cos, 1/sin).
                        let r_max = (1.0 / theta.cos()).min(1.0 / theta.sin());
                        let hi_t = hi.min(r_max);
                        for (seg_lo, seg_hi) in radial_segments(lo, hi_t) {
                            for (r, wr) in paneled_interval(seg_lo, seg_hi, radial_panels) {
                                for (xsec, wb) in &boxes {
                                    let mut x = vec![r * theta.cos(), r * theta.sin()];
                                    x.extend_from_slice(xsec);
                                    nodes.push(Node {
                                        x,
                                        w: wr * wth * wb * r,
                                        dist: r,
                                    });
                                }
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        DomainSpec::PolyhedralCone { .. } => {
            // Handled by the Monte-Carlo path in the caller.
        }
    }
    nodes
}

/// Directions on S^(k-1) with surface-measure weights. `polar` optionally
/// restricts the polar angle around the last axis to [cos_hi, cos_lo] in
/// cosine terms (used for spherical caps).
fn sphere_nodes(k: usize, order: usize, polar: Option<(f64, f64)>) -> Vec<(Vec<f64>, f64)> {
    match k {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => match polar {
            None => circle_nodes(order.max(4))
                .into_iter()
                .map(|(t, w)| (vec![t.cos(), t.sin()], w))
                .collect(),
            Some((cos_lo, cos_hi)) => {
                // Arc symmetric about the +y axis (vector cone axis e_2):
                // theta measured from the axis.
                let t_hi = cos_lo.acos();
                let t_lo = cos_hi.acos();
                let (xs, ws) = gauss_legendre(order.max(4));
                let mid = 0.5 * (t_lo + t_hi);
                let half = 0.5 * (t_hi - t_lo);
                let mut out = Vec::new();
                for (xi, w) in xs.iter().zip(&ws) {
                    let t = mid + half * xi;
                    // Both sides of the axis.
                    out.push((vec![t.sin(), t.cos()], w * half));
                    out.push((vec![-t.sin(), t.cos()], w * half));
                }
                out
            }
        },
        3 => {
            let (u_lo, u_hi) = polar.unwrap_or((-1.0, 1.0));
            let (xs, ws) = gauss_legendre(order.max(4));
            let mid = 0.5 * (u_lo + u_hi);
            let half = 0.5 * (u_hi - u_lo);
            let az = circle_nodes(order.max(4));
            let mut out = Vec::new();
            for (xi, wu) in xs.iter().zip(&ws) {
                let u = mid + half * xi;
                let s = (1.0 - u * u).max(0.0).sqrt();
                for (phi, wphi) in &az {
                    out.push((vec![s * phi.cos(), s * phi.sin(), u], wu * half * wphi));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Polar cosine range for the spherical cap of a smooth cone, tightened by
/// axis-centered support balls (small witnesses subtend a small angle).
fn cap_polar_range(gamma: f64, support: &Support) -> (f64, f64) {
    let mut u_lo = (gamma / 2.0).cos();
    let mut u_hi = 1.0f64;
    for (c, r) in &support.balls {
        let c_norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if c_norm <= *r || c_norm == 0.0 {
            continue;
        }
        // The ball subtends a polar range around the direction of c; only
        // axis-aligned centers tighten the cap usefully.
        let axis_cos = c.last().copied().unwrap_or(0.0) / c_norm;
        if axis_cos > 0.999_999 {
            let half_angle = (r / c_norm).min(1.0).asin();
            u_lo = u_lo.max((half_angle).cos() - 1e-12);
            u_hi = 1.0;
        }
    }
    (u_lo.min(u_hi), u_hi)
}

/// Tensor GL boxes over the x'' block, clipped to the support box.
fn xsecond_boxes(support: &Support, l: usize, panels: usize) -> Vec<(Vec<f64>, f64)> {
    if l == 0 {
        return vec![(Vec::new(), 1.0)];
    }
    let mut dims: Vec<Vec<(f64, f64)>> = Vec::new();
    for b in &support.xsecond {
        if !b[0].is_finite() || !b[1].is_finite() || b[1] <= b[0] {
            return Vec::new();
        }
        dims.push(paneled_interval(b[0], b[1], panels));
    }
    tensor(&dims)
}

/// Same, but intersected with the unit box (0,1)^l of the dihedral cube.
fn xsecond_unit_boxes(support: &Support, l: usize, panels: usize) -> Vec<(Vec<f64>, f64)> {
    if l == 0 {
        return vec![(Vec::new(), 1.0)];
    }
    let mut dims: Vec<Vec<(f64, f64)>> = Vec::new();
    for b in &support.xsecond {
        let lo = b[0].max(0.0);
        let hi = b[1].min(1.0);
        if hi <= lo {
            return Vec::new();
        }
        dims.push(paneled_interval(lo, hi, panels));
    }
    tensor(&dims)
}

fn tensor(dims: &[Vec<(f64, f64)>]) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for dim in dims {
        let mut next = Vec::with_capacity(out.len() * dim.len());
        for (prefix, w) in &out {
            for (v, wv) in dim {
                let mut p = prefix.clone();
                p.push(*v);
                next.push((p, w * wv));
            }
        }
        out = next;
    }
    out
}

/// Spherical rings around an off-set singular point x0.
pub fn ring_nodes(
    d: usize,
    x0: &[f64],
    r_lo: f64,
    r_hi: f64,
    radial_panels: usize,
    angular_order: usize,
) -> Vec<Node> {
    let mut out = Vec::new();
    for (r, wr) in paneled_interval(r_lo, r_hi, radial_panels) {
        for (dir, wa) in sphere_nodes(d, angular_order, None) {
            let x: Vec<f64> = x0.iter().zip(&dir).map(|(c, v)| c + v * r).collect();
            let jac = r.powi(d as i32 - 1);
            out.push(Node { x, w: wr * wa * jac, dist: f64::NAN });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(8);
        // x^14 over [-1, 1]: 2/15, exact for 8-point GL (degree <= 15).
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert!((got - 2.0 / 15.0).abs() < 1e-14);
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(3)).sum();
        assert!(got.abs() < 1e-15);
    }

    #[test]
    fn sphere_measures() {
        // Full sphere areas: 2 (S^0), 2 pi (S^1), 4 pi (S^2).
        for (k, expect) in [
            (1usize, 2.0),
            (2, 2.0 * std::f64::consts::PI),
            (3, 4.0 * std::f64::consts::PI),
        ] {
            let total: f64 = sphere_nodes(k, 16, None).iter().map(|(_, w)| w).sum();
            assert!((total - expect).abs() < 1e-10, "k = {k}: {total}");
        }
    }

    #[test]
    fn cap_measure_matches_closed_form() {
        let gamma: f64 = 1.2;
        let polar = ((gamma / 2.0).cos(), 1.0);
        let total: f64 = sphere_nodes(3, 24, Some(polar)).iter().map(|(_, w)| w).sum();
        let expect = 2.0 * std::f64::consts::PI * (1.0 - (gamma / 2.0).cos());
        assert!((total - expect).abs() < 1e-10);
    }

    #[test]
    fn interval_panels_cover() {
        let total: f64 = paneled_interval(0.25, 1.0, 3).iter().map(|(_, w)| w).sum();
        assert!((total - 0.75).abs() < 1e-14);
    }
}
