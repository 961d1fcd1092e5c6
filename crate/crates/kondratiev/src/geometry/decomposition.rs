//! Decomposition of a polyhedral cone into a smooth central cone and
//! nonsmooth edge cones, with at-most-two overlap.
//!
//! Around each edge ray a circular cone is drawn whose opening angle is half
//! the angular gap to the nearest neighbouring edge, so the edge cones are
//! pairwise disjoint; the central piece is the complement of the half-opening
//! cones, so every point of Q lies in the central piece or in exactly one
//! edge cone, and in at most two pieces overall. On each edge cone the
//! distance to the full edge set is comparable to the distance to that edge
//! alone; on the central piece it is comparable to the distance to the
//! vertex. The comparison constants are measured and recorded.

use serde::{Deserialize, Serialize};

use super::{norm, DomainSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeConePiece {
    /// Unit direction of the edge ray this piece surrounds.
    pub axis: [f64; 3],
    /// Opening angle of the piece (half the angular gap to the nearest edge).
    pub opening: f64,
    /// Measured bounds of dist(x, M) / dist(x, M_j) over the piece.
    pub dist_ratio: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeDecomposition {
    /// Descriptor of the rotationally symmetric model the central piece is
    /// diffeomorphic to.
    pub smooth_piece: DomainSpec,
    /// Central axis used for the descriptor.
    pub smooth_axis: [f64; 3],
    pub edge_pieces: Vec<EdgeConePiece>,
    /// Measured bounds of dist(x, M) / |x| over the central piece.
    pub smooth_dist_ratio: [f64; 2],
    base: DomainSpec,
}

impl ConeDecomposition {
    /// Is x in the central piece K~ (complement of the half-opening cones)?
    pub fn in_smooth_piece(&self, x: &[f64]) -> bool {
        if !self.base.contains(x) {
            return false;
        }
        let r = norm(x);
        self.edge_pieces
            .iter()
            .all(|p| angle_to(x, &p.axis, r) > p.opening / 4.0)
    }

    pub fn in_edge_piece(&self, k: usize, x: &[f64]) -> bool {
        if !self.base.contains(x) {
            return false;
        }
        let r = norm(x);
        angle_to(x, &self.edge_pieces[k].axis, r) < self.edge_pieces[k].opening / 2.0
    }

    /// Number of pieces containing x (0 if x is outside Q).
    pub fn cover_count(&self, x: &[f64]) -> usize {
        if !self.base.contains(x) {
            return 0;
        }
        let mut n = usize::from(self.in_smooth_piece(x));
        for k in 0..self.edge_pieces.len() {
            n += usize::from(self.in_edge_piece(k, x));
        }
        n
    }

    pub fn base(&self) -> &DomainSpec {
        &self.base
    }
}

fn angle_to(x: &[f64], axis: &[f64; 3], r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let dot: f64 = x.iter().zip(axis).map(|(a, b)| a * b).sum();
    (dot / r).clamp(-1.0, 1.0).acos()
}

fn dist_to_edge_segment(x: &[f64], v: &[f64; 2]) -> f64 {
    let b = [v[0], v[1], 1.0];
    let len2: f64 = b.iter().map(|t| t * t).sum();
    let t = ((x[0] * b[0] + x[1] * b[1] + x[2] * b[2]) / len2).clamp(0.0, 1.0);
    let diff = [x[0] - t * b[0], x[1] - t * b[1], x[2] - t * b[2]];
    norm(&diff)
}

pub fn decompose_polyhedral_cone(q: &DomainSpec) -> Result<ConeDecomposition> {
    q.validate()?;
    let edges = match q {
        DomainSpec::PolyhedralCone { edges, .. } => edges.clone(),
        _ => {
            return Err(Error::InvalidParams(
                "decompose_polyhedral_cone requires a polyhedral cone".into(),
            ))
        }
    };
    let n = edges.len();
    let dirs: Vec<[f64; 3]> = edges
        .iter()
        .map(|v| {
            let raw = [v[0], v[1], 1.0];
            let l = norm(&raw);
            [raw[0] / l, raw[1] / l, raw[2] / l]
        })
        .collect();
    let mut pieces = Vec::with_capacity(n);
    for k in 0..n {
        let prev = dirs[(k + n - 1) % n];
        let next = dirs[(k + 1) % n];
        let gap = angle_between(&dirs[k], &prev).min(angle_between(&dirs[k], &next));
        if gap <= 0.0 {
            return Err(Error::DegeneratePolygon(format!(
                "coincident edge directions at index {k}"
            )));
        }
        pieces.push(EdgeConePiece { axis: dirs[k], opening: gap / 2.0, dist_ratio: [1.0, 1.0] });
    }
    // Central axis: normalized mean edge direction.
    let mut c = [0.0f64; 3];
    for d in &dirs {
        for i in 0..3 {
            c[i] += d[i];
        }
    }
    let cl = norm(&c);
    let smooth_axis = [c[0] / cl, c[1] / cl, c[2] / cl];
    let max_angle = dirs
        .iter()
        .map(|d| angle_to(d, &smooth_axis, 1.0))
        .fold(0.0f64, f64::max);

    let mut deco = ConeDecomposition {
        smooth_piece: DomainSpec::SmoothCone {
            d: 3,
            gamma: (2.0 * max_angle).min(std::f64::consts::PI - 1e-9),
        },
        smooth_axis,
        edge_pieces: pieces,
        smooth_dist_ratio: [f64::INFINITY, 0.0],
        base: q.clone(),
    };

    // Measure the distance-comparison constants on a deterministic sample.
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x1e14);
    let mut ratios: Vec<[f64; 2]> = vec![[f64::INFINITY, 0.0]; n];
    let mut smooth_ratio = [f64::INFINITY, 0.0f64];
    let mut accepted = 0usize;
    while accepted < 20_000 {
        let x = sample_in_cone(&mut rng, &edges);
        if !q.contains(&x) {
            continue;
        }
        accepted += 1;
        let dist_m = q.dist_singular(&x);
        for k in 0..n {
            if deco.in_edge_piece(k, &x) {
                let dk = dist_to_edge_segment(&x, &edges[k]);
                if dk > 0.0 {
                    let r = dist_m / dk;
                    ratios[k][0] = ratios[k][0].min(r);
                    ratios[k][1] = ratios[k][1].max(r);
                }
            }
        }
        if deco.in_smooth_piece(&x) {
            let r = dist_m / norm(&x);
            smooth_ratio[0] = smooth_ratio[0].min(r);
            smooth_ratio[1] = smooth_ratio[1].max(r);
        }
    }
    for (p, r) in deco.edge_pieces.iter_mut().zip(ratios) {
        p.dist_ratio = r;
    }
    deco.smooth_dist_ratio = smooth_ratio;
    Ok(deco)
}

fn angle_between(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0).acos()
}

pub(crate) fn sample_in_cone<R: rand::Rng>(rng: &mut R, edges: &[[f64; 2]]) -> Vec<f64> {
    let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in edges {
        lo_x = lo_x.min(v[0]);
        hi_x = hi_x.max(v[0]);
        lo_y = lo_y.min(v[1]);
        hi_y = hi_y.max(v[1]);
    }
    let z: f64 = rng.random_range(0.0..1.0f64).max(1e-9);
    let px = rng.random_range(lo_x..hi_x);
    let py = rng.random_range(lo_y..hi_y);
    vec![px * z, py * z, z]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    fn square_cone() -> DomainSpec {
        DomainSpec::PolyhedralCone {
            d: 3,
            edges: vec![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]],
        }
    }

    #[test]
    fn square_base_gives_four_equal_pieces() {
        let deco = decompose_polyhedral_cone(&square_cone()).unwrap();
        assert_eq!(deco.edge_pieces.len(), 4);
        let first = deco.edge_pieces[0].opening;
        for p in &deco.edge_pieces {
            assert!((p.opening - first).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_base_gives_three_plus_one() {
        let tri = DomainSpec::PolyhedralCone {
            d: 3,
            edges: vec![[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]],
        };
        let deco = decompose_polyhedral_cone(&tri).unwrap();
        assert_eq!(deco.edge_pieces.len(), 3);
        assert!(matches!(deco.smooth_piece, DomainSpec::SmoothCone { .. }));
    }

    #[test]
    fn cover_count_between_one_and_two() {
        for dom in [
            square_cone(),
            // Thin triangle: one interior angle near pi.
            DomainSpec::PolyhedralCone {
                d: 3,
                edges: vec![[1.0, 0.05], [-1.0, 0.05], [0.0, -0.05]],
            },
        ] {
            let deco = decompose_polyhedral_cone(&dom).unwrap();
            let edges = match &dom {
                DomainSpec::PolyhedralCone { edges, .. } => edges.clone(),
                _ => unreachable!(),
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
            let mut accepted = 0;
            while accepted < 5000 {
                let x = sample_in_cone(&mut rng, &edges);
                if !dom.contains(&x) {
                    continue;
                }
                accepted += 1;
                let c = deco.cover_count(&x);
                assert!(
                    (1..=2).contains(&c),
                    "cover count {c} at {x:?} on {dom:?}"
                );
            }
        }
    }

    #[test]
    fn edge_pieces_pairwise_disjoint() {
        let deco = decompose_polyhedral_cone(&square_cone()).unwrap();
        let edges = match deco.base() {
            DomainSpec::PolyhedralCone { edges, .. } => edges.clone(),
            _ => unreachable!(),
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut accepted = 0;
        while accepted < 5000 {
            let x = sample_in_cone(&mut rng, &edges);
            if !deco.base().contains(&x) {
                continue;
            }
            accepted += 1;
            let hits: usize = (0..4).filter(|&k| deco.in_edge_piece(k, &x)).count();
            assert!(hits <= 1, "point {x:?} in {hits} edge pieces");
        }
    }

    #[test]
    fn distance_equivalence_constants_recorded() {
        let deco = decompose_polyhedral_cone(&square_cone()).unwrap();
        for p in &deco.edge_pieces {
            assert!(p.dist_ratio[0] > 0.0);
            assert!(p.dist_ratio[1] <= 1.0 + 1e-12);
            assert!(p.dist_ratio[0] <= p.dist_ratio[1]);
        }
        let [lo, hi] = deco.smooth_dist_ratio;
        assert!(lo > 0.0 && hi <= 1.0 + 1e-12 && lo <= hi);
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let bad = DomainSpec::PolyhedralCone {
            d: 3,
            edges: vec![[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]],
        };
        assert!(decompose_polyhedral_cone(&bad).is_err());
    }
}
