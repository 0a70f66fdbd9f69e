//! Two-ball counterexample configuration: a ball of radius slightly below
//! one plus a far-away ball of small radius eps, with total volume w_n. The
//! barycenter lies outside the set once the components are far enough apart,
//! which drives the barycentric asymmetry to its maximum value 2 while the
//! deficit shrinks like eps^{n-s} - the configuration that rules out a
//! barycentric stability inequality without convexity.
//!
//! The set carries its own closed-form oracles (volume, barycenter,
//! asymmetries, Hausdorff deviation) and a decomposition-based deficit:
//! P_s(E) = P_s(B_r) + P_s(B_eps) - 2 I with the smooth interaction term I
//! estimated by plain Monte Carlo.

use crate::error::{Error, Result};
use crate::math::{stats::Moments, unit_ball_volume, Vector};
use crate::perimeter::{
    check_budget, check_s, unit_ball_ps_analytic, CrossingBuf, EvaluableSet,
};
use crate::sampling::{self, chunk_rng, CHUNK_SIZE};
use alloc::format;
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct TwoBallSet {
    dim: usize,
    eps: f64,
    separation: f64,
    r_big: f64,
}

const PURPOSE_INTERACTION: u64 = 0x77;

impl TwoBallSet {
    /// Margin factor applied to the disjointness criterion.
    const MARGIN: f64 = 0.25;

    /// Smallest separation for which the volume-matched reference ball
    /// centered at the barycenter misses both components.
    pub fn required_separation(dim: usize, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0, 0.5), got {eps}"
            )));
        }
        let n = dim as f64;
        let eps_n = libm::pow(eps, n);
        let r_big = libm::pow(1.0 - eps_n, 1.0 / n);
        let m1 = (1.0 + r_big) * (1.0 + Self::MARGIN);
        let m2 = (1.0 + eps) * (1.0 + Self::MARGIN);
        Ok((m1 / eps_n).max(m2 / (1.0 - eps_n)))
    }

    /// Build the configuration; `separation` defaults to the disjointness
    /// criterion value and errors below it.
    pub fn new(dim: usize, eps: f64, separation: Option<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let required = Self::required_separation(dim, eps)?;
        let separation = separation.unwrap_or(required);
        if separation < required {
            return Err(Error::SeparationTooSmall { required, actual: separation });
        }
        let n = dim as f64;
        let r_big = libm::pow(1.0 - libm::pow(eps, n), 1.0 / n);
        Ok(TwoBallSet { dim, eps, separation, r_big })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn r_big(&self) -> f64 {
        self.r_big
    }

    fn center_small(&self) -> Vector {
        let mut c = Vector::zeros(self.dim);
        c.set(0, self.separation);
        c
    }

    /// Exact barycenter: volume-weighted centers.
    pub fn barycenter(&self) -> Vector {
        let n = self.dim as f64;
        let w_small = libm::pow(self.eps, n); // fraction of total volume
        let mut b = Vector::zeros(self.dim);
        b.set(0, w_small * self.separation);
        b
    }

    /// The reference ball (radius 1 about the barycenter) misses both
    /// components by construction, so |E delta B| = 2 |E| exactly.
    pub fn lambda0_exact(&self) -> f64 {
        debug_assert!(self.reference_ball_disjoint());
        2.0
    }

    fn reference_ball_disjoint(&self) -> bool {
        let bar = self.barycenter();
        let d_big = bar.norm();
        let d_small = self.center_small().sub(&bar).norm();
        d_big > 1.0 + self.r_big && d_small > 1.0 + self.eps
    }

    /// Exact Fraenkel asymmetry for well-separated components: the optimal
    /// unit ball swallows the large component whole, leaving
    /// |E delta B| = 2 w_n eps^n.
    pub fn fraenkel_exact(&self) -> f64 {
        2.0 * libm::pow(self.eps, self.dim as f64)
    }

    /// Hausdorff deviation from the unit ball centered at the barycenter
    /// (the inner inclusion already fails at tau = 1).
    pub fn hausdorff_exact(&self) -> f64 {
        let bar = self.barycenter();
        let far = (bar.norm() + self.r_big)
            .max(self.center_small().sub(&bar).norm() + self.eps);
        (far - 1.0).max(1.0)
    }

    /// Deficit by decomposition: the ball terms are analytic and the
    /// interaction integral I = Int_{B_r x B_eps} |x-y|^{-n-s} is smooth
    /// (components far apart) and estimated by plain Monte Carlo.
    pub fn deficit(&self, s: f64, budget: u64, seed: u64) -> Result<(f64, f64)> {
        check_s(s)?;
        check_budget(budget)?;
        let n = self.dim as f64;
        let ball_unit = unit_ball_ps_analytic(self.dim, s)?;
        let p_big = libm::pow(self.r_big, n - s) * ball_unit;
        let p_small = libm::pow(self.eps, n - s) * ball_unit;

        let v_big = unit_ball_volume(self.dim) * libm::pow(self.r_big, n);
        let v_small = unit_ball_volume(self.dim) * libm::pow(self.eps, n);
        let c_small = self.center_small();
        let mut merged = Moments::new();
        let n_chunks = budget.div_ceil(CHUNK_SIZE);
        for chunk in 0..n_chunks {
            let len = CHUNK_SIZE.min(budget - chunk * CHUNK_SIZE);
            let mut rng = chunk_rng(seed, PURPOSE_INTERACTION, 0, chunk);
            let mut acc = Moments::new();
            for _ in 0..len {
                let x = sampling::ball_point(&mut rng, self.dim).scale(self.r_big);
                let y = c_small.add(&sampling::ball_point(&mut rng, self.dim).scale(self.eps));
                acc.push(libm::pow(x.dist(&y), -(n + s)));
            }
            merged.merge(&acc);
        }
        let interaction = v_big * v_small * merged.mean();
        let interaction_sigma = v_big * v_small * merged.std_error();
        let ps_e = p_big + p_small - 2.0 * interaction;
        Ok((
            (ps_e - ball_unit) / ball_unit,
            2.0 * interaction_sigma / ball_unit,
        ))
    }
}

impl EvaluableSet for TwoBallSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn volume(&self) -> f64 {
        // r_big^n + eps^n = 1 by construction
        unit_ball_volume(self.dim)
    }

    fn membership(&self, x: &Vector) -> bool {
        x.norm() <= self.r_big || x.dist(&self.center_small()) <= self.eps
    }

    fn ray_crossings(&self, x: &Vector, dir: &Vector, out: &mut CrossingBuf) {
        out.clear();
        let mut push_ball = |center: &Vector, radius: f64| {
            let p = x.sub(center);
            let pq = p.dot(dir);
            let disc = pq * pq - (p.norm_sq() - radius * radius);
            if disc > 0.0 {
                let root = disc.sqrt();
                for t in [-pq - root, -pq + root] {
                    if t > 0.0 {
                        out.push(t);
                    }
                }
            }
        };
        push_ball(&Vector::zeros(self.dim), self.r_big);
        push_ball(&self.center_small(), self.eps);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    }

    fn center_hint(&self) -> Vector {
        // midpoint between components: only used for bounding constructions
        let mut c = Vector::zeros(self.dim);
        c.set(0, 0.5 * self.separation);
        c
    }

    fn barycenter(&self) -> Vector {
        TwoBallSet::barycenter(self)
    }

    fn bounding_radius(&self) -> f64 {
        0.5 * self.separation + self.r_big.max(self.eps) + 1.0
    }

    fn bounding_box(&self) -> (Vector, Vector) {
        let mut lo = Vector::zeros(self.dim);
        let mut hi = Vector::zeros(self.dim);
        let r = self.r_big;
        for i in 0..self.dim {
            lo.set(i, -r);
            hi.set(i, r);
        }
        hi.set(0, self.separation + self.eps);
        (lo, hi)
    }

    fn star_anchor(&self) -> Option<Vector> {
        None // two components: not star-shaped
    }

    fn radial_exit(&self, _dir: &Vector) -> f64 {
        unreachable!("two-ball set exposes no star anchor")
    }

    fn inradius_proxy(&self) -> f64 {
        self.eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_volume() {
        let tb = TwoBallSet::new(2, 0.1, None).unwrap();
        assert!((EvaluableSet::volume(&tb) - core::f64::consts::PI).abs() < 1e-12);
        assert!((tb.r_big() - (1.0f64 - 0.01).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn separation_criterion_enforced() {
        // the value the old-style heuristics would pick is far too small
        let err = TwoBallSet::new(2, 0.05, Some(10.5));
        match err {
            Err(Error::SeparationTooSmall { required, actual }) => {
                assert!(required > 900.0, "required {required}");
                assert!((actual - 10.5).abs() < 1e-12);
            }
            other => panic!("expected SeparationTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn barycenter_outside_set_and_lambda0_is_two() {
        for eps in [0.2, 0.1, 0.05] {
            let tb = TwoBallSet::new(2, eps, None).unwrap();
            let bar = tb.barycenter();
            assert!(!tb.membership(&bar), "barycenter must be outside");
            assert!(bar.norm() > 1.0 + tb.r_big());
            assert_eq!(tb.lambda0_exact(), 2.0);
        }
    }

    #[test]
    fn crossings_merge_both_components() {
        let tb = TwoBallSet::new(2, 0.1, None).unwrap();
        let mut buf = CrossingBuf::new();
        // ray from the big-ball center along +e1 crosses: exit big, enter
        // small, exit small
        let x = Vector::zeros(2);
        let dir = Vector::new(&[1.0, 0.0]);
        tb.ray_crossings(&x, &dir, &mut buf);
        assert_eq!(buf.len(), 3, "crossings {buf:?}");
        assert!((buf[0] - tb.r_big()).abs() < 1e-10);
        assert!((buf[1] - (tb.separation() - 0.1)).abs() < 1e-9);
        assert!((buf[2] - (tb.separation() + 0.1)).abs() < 1e-9);
    }

    #[test]
    fn deficit_scales_like_eps_to_n_minus_s() {
        // analytic expansion: delta ~ eps^{n-s} - ((n-s)/n) eps^n; at small
        // eps the leading term dominates
        let (d, sigma) = TwoBallSet::new(2, 0.05, None)
            .unwrap()
            .deficit(0.5, 100_000, 3)
            .unwrap();
        let expected = (1.0f64 - 0.05f64.powi(2)).powf(0.75) + 0.05f64.powf(1.5) - 1.0;
        assert!(
            (d - expected).abs() < 3.0 * sigma + 1e-5,
            "{d} vs {expected} (sigma {sigma})"
        );
        assert!(sigma < 1e-4, "interaction noise too large: {sigma}");
    }

    #[test]
    fn deficit_insensitive_to_doubling_separation() {
        let a = TwoBallSet::new(2, 0.1, None).unwrap();
        let req = TwoBallSet::required_separation(2, 0.1).unwrap();
        let b = TwoBallSet::new(2, 0.1, Some(2.0 * req)).unwrap();
        let (da, sa) = a.deficit(0.5, 100_000, 5).unwrap();
        let (db, sb) = b.deficit(0.5, 100_000, 6).unwrap();
        let sigma = (sa * sa + sb * sb).sqrt();
        assert!((da - db).abs() <= 3.0 * sigma + 1e-7, "{da} vs {db}");
    }

    #[test]
    fn fraenkel_exact_value() {
        let tb = TwoBallSet::new(2, 0.1, None).unwrap();
        assert!((tb.fraenkel_exact() - 0.02).abs() < 1e-15);
        // fraenkel <= lambda0 <= 2 ordering
        assert!(tb.fraenkel_exact() <= tb.lambda0_exact());
    }
}
