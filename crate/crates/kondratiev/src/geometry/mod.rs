//! Model domains: the five pairs (D, M) the library computes on, their weight
//! functions, dyadic shells, the smooth partition of unity, and the
//! polyhedral-cone decomposition.

mod decomposition;
mod partition;

pub use decomposition::{decompose_polyhedral_cone, ConeDecomposition, EdgeConePiece};
pub use partition::{
    partition_jet, partition_value, regularized_weight, regularized_weight_jet, smooth_step,
    theta_profile, theta_value, PartitionSpec, MAX_PARTITION_ORDER,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A model pair (D, M).
///
/// * `Model`: R^d minus the flat set R^l_* (unbounded prototype); M = R^l_*.
/// * `SmoothCone`: rotationally invariant cone about the x_d axis, opening
///   angle `gamma`, truncated by the unit ball; M = {0}.
/// * `NonsmoothCone`: the same rotational cone intersected with the unit
///   cube, M = the axis segment from 0 to e_d.
/// * `DihedralCube`: the unit cube with M = the l-dimensional face
///   {x_1 = ... = x_{d-l} = 0}.
/// * `PolyhedralCone`: a cone in R^3 over a convex polygon drawn in the
///   plane x_3 = 1, truncated by 0 < x_3 < 1; M = the union of its edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Model { d: u32, l: u32 },
    SmoothCone { d: u32, gamma: f64 },
    NonsmoothCone { d: u32, gamma: f64 },
    DihedralCube { d: u32, l: u32 },
    PolyhedralCone { d: u32, edges: Vec<[f64; 2]> },
}

impl DomainSpec {
    pub fn d(&self) -> u32 {
        match *self {
            DomainSpec::Model { d, .. }
            | DomainSpec::SmoothCone { d, .. }
            | DomainSpec::NonsmoothCone { d, .. }
            | DomainSpec::DihedralCube { d, .. }
            | DomainSpec::PolyhedralCone { d, .. } => d,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DomainSpec::Model { .. } => "model",
            DomainSpec::SmoothCone { .. } => "smooth-cone",
            DomainSpec::NonsmoothCone { .. } => "nonsmooth-cone",
            DomainSpec::DihedralCube { .. } => "dihedral-cube",
            DomainSpec::PolyhedralCone { .. } => "polyhedral-cone",
        }
    }

    /// Number of coordinates transverse to the singular set. This is the
    /// exponent kappa in the membership thresholds a < kappa/p.
    pub fn transverse_dim(&self) -> u32 {
        match *self {
            DomainSpec::Model { d, l } => d - l,
            DomainSpec::SmoothCone { d, .. } => d,
            DomainSpec::NonsmoothCone { d, .. } => d - 1,
            DomainSpec::DihedralCube { d, l } => d - l,
            DomainSpec::PolyhedralCone { .. } => 2,
        }
    }

    /// Codimension parameter l of the flat singular set, where applicable.
    pub fn flat_codim(&self) -> Option<u32> {
        match *self {
            DomainSpec::Model { l, .. } | DomainSpec::DihedralCube { l, .. } => Some(l),
            _ => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, DomainSpec::Model { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d();
        if d < 2 {
            return Err(Error::InvalidParams(format!("dimension d = {d} must be >= 2")));
        }
        match self {
            DomainSpec::Model { l, .. } => {
                if *l >= d {
                    return Err(Error::InvalidParams(format!(
                        "model pair requires 0 <= l < d, got l = {l}, d = {d}"
                    )));
                }
            }
            DomainSpec::SmoothCone { gamma, .. } | DomainSpec::NonsmoothCone { gamma, .. } => {
                if !(*gamma > 0.0 && *gamma < std::f64::consts::PI) {
                    return Err(Error::InvalidParams(format!(
                        "opening angle gamma = {gamma} must lie in (0, pi)"
                    )));
                }
            }
            DomainSpec::DihedralCube { l, .. } => {
                if *l == 0 || *l >= d {
                    return Err(Error::InvalidParams(format!(
                        "dihedral cube requires 1 <= l < d, got l = {l}, d = {d}"
                    )));
                }
            }
            DomainSpec::PolyhedralCone { d, edges } => {
                if *d != 3 {
                    return Err(Error::InvalidParams("polyhedral cone requires d = 3".into()));
                }
                validate_polygon(edges)?;
            }
        }
        Ok(())
    }

    /// Strict interior membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        let d = self.d() as usize;
        if x.len() != d {
            return false;
        }
        match self {
            DomainSpec::Model { l, .. } => {
                let k = (self.d() - l) as usize;
                x[..k].iter().any(|&xi| xi != 0.0)
            }
            DomainSpec::SmoothCone { gamma, .. } => {
                let r = norm(x);
                if !(r > 0.0 && r < 1.0) {
                    return false;
                }
                // Polar angle against the x_d axis below gamma/2.
                let cos_angle = x[d - 1] / r;
                cos_angle > (gamma / 2.0).cos()
            }
            DomainSpec::NonsmoothCone { gamma, .. } => {
                if !x.iter().all(|&xi| xi > 0.0 && xi < 1.0) {
                    return false;
                }
                let rp = norm(&x[..d - 1]);
                rp < (gamma / 2.0).tan() * x[d - 1]
            }
            DomainSpec::DihedralCube { .. } => x.iter().all(|&xi| xi > 0.0 && xi < 1.0),
            DomainSpec::PolyhedralCone { edges, .. } => {
                let z = x[2];
                if !(z > 0.0 && z < 1.0) {
                    return false;
                }
                point_in_convex_polygon(x[0] / z, x[1] / z, edges)
            }
        }
    }

    /// Uncapped distance to the singular set M.
    pub fn dist_singular(&self, x: &[f64]) -> f64 {
        let d = self.d() as usize;
        match self {
            DomainSpec::Model { l, .. } => norm(&x[..d - *l as usize]),
            DomainSpec::SmoothCone { .. } => norm(x),
            DomainSpec::NonsmoothCone { .. } | DomainSpec::DihedralCube { .. } => {
                // M is the axis segment / flat face; for interior points the
                // distance is |x'| in both cases.
                let l = match self {
                    DomainSpec::NonsmoothCone { .. } => 1,
                    DomainSpec::DihedralCube { l, .. } => *l as usize,
                    _ => unreachable!(),
                };
                norm(&x[..d - l])
            }
            DomainSpec::PolyhedralCone { edges, .. } => edges
                .iter()
                .map(|v| dist_to_segment(x, &[0.0; 3], &[v[0], v[1], 1.0]))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Essential supremum of rho = min(1, dist(., M)) over the domain, and
    /// whether it is attained on a set of positive measure.
    pub fn sup_rho(&self) -> (f64, bool) {
        match self {
            DomainSpec::Model { .. } => (1.0, true),
            DomainSpec::SmoothCone { .. } => (1.0, false),
            DomainSpec::NonsmoothCone { d, gamma } => {
                let t = (gamma / 2.0).tan();
                let geo = t.min(((d - 1) as f64).sqrt());
                if geo > 1.0 {
                    (1.0, true)
                } else {
                    (geo, false)
                }
            }
            DomainSpec::DihedralCube { d, l } => {
                if d - l >= 2 {
                    (1.0, true)
                } else {
                    (1.0, false)
                }
            }
            DomainSpec::PolyhedralCone { edges, .. } => {
                let geo = polyhedral_sup_dist(edges);
                if geo > 1.0 {
                    (1.0, true)
                } else {
                    (geo, false)
                }
            }
        }
    }

    /// Largest j0 >= 0 with {x : rho(x) >= 2^(-j0+1)} empty.
    pub fn j0(&self) -> i32 {
        let (sup, attained) = self.sup_rho();
        let mut j0: i32 = 0;
        // rho >= 2^(-j+1) is empty iff 2^(-j+1) > sup, or == sup unattained.
        loop {
            let next = j0 + 1;
            let thr = pow2(-next + 1);
            let empty = thr > sup || (thr == sup && !attained);
            if empty {
                j0 = next;
            } else {
                return j0;
            }
        }
    }

    /// Starting shell index j1 per the bounded-domain case split: j1 = j0
    /// unless values of rho cross (2^-j0 + 2^-j0-2, 2^-j0+2 - 2^-j0-2), in
    /// which case j1 = j0 - 1.
    pub fn j1(&self) -> i32 {
        let j0 = self.j0();
        let (sup, attained) = self.sup_rho();
        let lo = pow2(-j0) + pow2(-j0 - 2);
        // rho is continuous on a connected domain with inf rho = 0, so its
        // range covers (0, sup); the gap set is nonempty iff sup > lo.
        let case_b = sup > lo || (sup == lo && attained);
        if case_b {
            j0 - 1
        } else {
            j0
        }
    }

    /// The weight rho(x) = min(1, dist(x, M)).
    pub fn weight(&self, x: &[f64]) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::PointOutsideDomain(format!(
                "{:?} is not an interior point of the {} domain",
                x,
                self.kind_name()
            )));
        }
        Ok(self.dist_singular(x).min(1.0))
    }
}

/// Dyadic shell Omega_j = {2^(-j-1) < rho < 2^(-j+1)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub j: i32,
    pub inner: f64,
    pub outer: f64,
}

impl Shell {
    pub fn new(j: i32) -> Self {
        Shell { j, inner: pow2(-j - 1), outer: pow2(-j + 1) }
    }

    pub fn contains_value(&self, rho: f64) -> bool {
        self.inner < rho && rho < self.outer
    }
}

/// Exact power of two as f64 (exact for the index range used here).
pub fn pow2(e: i32) -> f64 {
    (2.0f64).powi(e)
}

/// Shell indices {j >= j1 : 2^(-j-1) < rho(x) < 2^(-j+1)}; one index when
/// rho is an exact dyadic power, two otherwise.
pub fn shells_of(dom: &DomainSpec, x: &[f64]) -> Result<BTreeSet<i32>> {
    let w = dom.weight(x)?;
    if w <= 0.0 {
        return Err(Error::ZeroWeightPoint);
    }
    let j1 = dom.j1();
    let center = -w.log2();
    let mut out = BTreeSet::new();
    let base = center.floor() as i32;
    for j in (base - 2)..=(base + 2) {
        if j >= j1 && Shell::new(j).contains_value(w) {
            out.insert(j);
        }
    }
    Ok(out)
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist_to_segment(x: &[f64], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let ab: Vec<f64> = (0..3).map(|i| b[i] - a[i]).collect();
    let ax: Vec<f64> = (0..3).map(|i| x[i] - a[i]).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 {
        (ax.iter().zip(&ab).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let diff: Vec<f64> = (0..3).map(|i| x[i] - (a[i] + t * ab[i])).collect();
    norm(&diff)
}

fn validate_polygon(edges: &[[f64; 2]]) -> Result<()> {
    let n = edges.len();
    if n < 3 {
        return Err(Error::InvalidParams(format!(
            "polyhedral cone needs at least 3 edges, got {n}"
        )));
    }
    // Signed area and convexity (consistent turn direction, no zero turns).
    let mut area2 = 0.0;
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = edges[i];
        let b = edges[(i + 1) % n];
        let c = edges[(i + 2) % n];
        area2 += a[0] * b[1] - b[0] * a[1];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross == 0.0 {
            return Err(Error::DegeneratePolygon(format!(
                "collinear vertices at index {i}"
            )));
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return Err(Error::InvalidParams("base polygon is not convex".into()));
        }
    }
    if area2.abs() < 1e-12 {
        return Err(Error::DegeneratePolygon("zero-area base polygon".into()));
    }
    Ok(())
}

fn point_in_convex_polygon(px: f64, py: f64, verts: &[[f64; 2]]) -> bool {
    let n = verts.len();
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let cross = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
        if cross == 0.0 {
            return false;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    true
}

/// Supremum of min-edge-distance over the truncated polyhedral cone,
/// estimated by grid sampling with local refinement.
fn polyhedral_sup_dist(edges: &[[f64; 2]]) -> f64 {
    let segs: Vec<[f64; 2]> = edges.to_vec();
    let dist = |x: &[f64; 3]| -> f64 {
        segs.iter()
            .map(|v| dist_to_segment(x, &[0.0; 3], &[v[0], v[1], 1.0]))
            .fold(f64::INFINITY, f64::min)
    };
    let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in edges {
        lo_x = lo_x.min(v[0]);
        hi_x = hi_x.max(v[0]);
        lo_y = lo_y.min(v[1]);
        hi_y = hi_y.max(v[1]);
    }
    let mut best = 0.0f64;
    let mut best_pt = [0.0f64; 3];
    let n = 24;
    for iz in 1..=n {
        let z = iz as f64 / n as f64;
        for ix in 0..=n {
            for iy in 0..=n {
                let px = lo_x + (hi_x - lo_x) * ix as f64 / n as f64;
                let py = lo_y + (hi_y - lo_y) * iy as f64 / n as f64;
                if point_in_convex_polygon(px, py, edges) {
                    let x = [px * z, py * z, z];
                    let d = dist(&x);
                    if d > best {
                        best = d;
                        best_pt = x;
                    }
                }
            }
        }
    }
    // Local refinement around the best grid point.
    let mut step = ((hi_x - lo_x).max(hi_y - lo_y)).max(1.0) / n as f64;
    for _ in 0..40 {
        let mut improved = false;
        for dx in [-1.0, 0.0, 1.0] {
            for dy in [-1.0, 0.0, 1.0] {
                for dz in [-1.0, 0.0, 1.0] {
                    let cand = [
                        best_pt[0] + dx * step,
                        best_pt[1] + dy * step,
                        (best_pt[2] + dz * step).clamp(1e-6, 1.0),
                    ];
                    let z = cand[2];
                    if z > 0.0 && point_in_convex_polygon(cand[0] / z, cand[1] / z, edges) {
                        let d = dist(&cand);
                        if d > best {
                            best = d;
                            best_pt = cand;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}
