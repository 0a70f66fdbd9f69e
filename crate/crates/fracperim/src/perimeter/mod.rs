//! Fractional s-perimeter estimators and oracles.
//!
//! The s-perimeter of a bounded set E is the double integral of
//! |x - y|^{-n-s} over E x E^c. Three numerical routes are implemented:
//!
//! * [`ray_mc`] - the primary estimator: for x in E the complement integral
//!   reduces along each direction to a one-dimensional power integral of the
//!   exit distances, so P_s(E) = (1/s) Int_E Int_{S^{n-1}} of the per-ray gap
//!   sum. Variance near the boundary is controlled by stratifying on the
//!   radial margin.
//! * [`chord_mc`] - an independent oracle: Fubini over affine lines; on each
//!   line both remaining integrals evaluate in closed form, so the integrand
//!   is bounded by diam^{1-s} and the variance is finite for every s.
//! * [`unit_ball_ps_quadrature`]/[`unit_ball_ps_analytic`] - deterministic
//!   values for balls, and [`interval_ps_exact`] for intervals.
//!
//! A fourth route, [`coupled_vs_ball`], estimates P_s(E) - P_s(B(m)) directly
//! with common random numbers through the shared radial parametrization; it
//! resolves small deficits that independent estimates cannot.

mod ball;
mod chord;
mod coupled;
mod ray;
mod slicing;

pub use ball::{interval_ps_exact, unit_ball_ps_analytic, unit_ball_ps_quadrature};
pub use chord::chord_mc;
pub use coupled::{coupled_vs_ball, CoupledEstimate};
pub use ray::ray_mc;
pub use slicing::slicewise_lower_bound;

use crate::error::{Error, Result};
use crate::math::Vector;
use alloc::format;
use smallvec::SmallVec;

/// Boundary-crossing parameters along a ray (sorted, positive).
pub type CrossingBuf = SmallVec<[f64; 8]>;
/// (entry, exit) parameter pairs of a full line through a set.
pub type SegmentBuf = SmallVec<[(f64, f64); 4]>;

/// Everything an s-perimeter estimator needs from a set.
///
/// Implemented by convex bodies, nearly spherical (radial-graph) sets and the
/// two-ball counterexample configuration.
pub trait EvaluableSet: Sync {
    fn dim(&self) -> usize;
    /// Exact volume (estimators require it positive).
    fn volume(&self) -> f64;
    fn membership(&self, x: &Vector) -> bool;
    /// Sorted boundary crossings of the ray x + t*dir, t > 0. Finitely many.
    fn ray_crossings(&self, x: &Vector, dir: &Vector, out: &mut CrossingBuf);
    /// An interior reference point (barycenter for convex bodies).
    fn center_hint(&self) -> Vector;
    /// Exact barycenter (defaults to `center_hint`; disconnected sets
    /// override it - their barycenter may lie outside the set).
    fn barycenter(&self) -> Vector {
        self.center_hint()
    }
    /// Radius of a ball about `center_hint` containing the set.
    fn bounding_radius(&self) -> f64;
    fn bounding_box(&self) -> (Vector, Vector);
    /// Point about which the set is star-shaped, when one is available.
    fn star_anchor(&self) -> Option<Vector>;
    /// Boundary distance from the star anchor along `dir` (unit).
    /// Only called when `star_anchor` is Some.
    fn radial_exit(&self, dir: &Vector) -> f64;
    /// Lower-bound proxy for the inradius (stratification scale).
    fn inradius_proxy(&self) -> f64;

    /// Intersection of the full line p + t*dir with the set, as sorted
    /// (entry, exit) parameter pairs. Default: enumerate crossings from a
    /// point far outside.
    fn line_segments(&self, p: &Vector, dir: &Vector, out: &mut SegmentBuf) {
        out.clear();
        let shift = self.bounding_radius() + p.sub(&self.center_hint()).norm() + 1.0;
        let start = p.add_scaled(dir, -shift);
        let mut buf = CrossingBuf::new();
        self.ray_crossings(&start, dir, &mut buf);
        let mut i = 0;
        while i + 1 < buf.len() {
            out.push((buf[i] - shift, buf[i + 1] - shift));
            i += 2;
        }
    }
}

/// How samples are split across boundary strata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrataConfig {
    /// Plain uniform sampling in E (rejection from the bounding box).
    None,
    /// Two strata split at a margin threshold; samples split by
    /// `boundary_share`. Weights are estimated from a calibration stream.
    BoundaryLayer { threshold_frac: f64, boundary_share: f64 },
    /// Geometric stack of radial-fraction layers (requires a star anchor;
    /// falls back to `BoundaryLayer` otherwise). Finite per-stratum variance
    /// for every s in (0,1).
    Geometric { base_frac: f64, levels: u32 },
}

impl StrataConfig {
    pub fn boundary_layer_default() -> Self {
        StrataConfig::BoundaryLayer { threshold_frac: 0.1, boundary_share: 0.5 }
    }
}

impl Default for StrataConfig {
    fn default() -> Self {
        StrataConfig::Geometric { base_frac: 0.1, levels: 30 }
    }
}

/// Monte Carlo budget and reproducibility configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub strata: StrataConfig,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig { samples, seed, strata: StrataConfig::default() }
    }

    pub fn with_strata(mut self, strata: StrataConfig) -> Self {
        self.strata = strata;
        self
    }
}

/// Estimator identification for reporting/serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    RayMc,
    ChordMc,
    CoupledMc,
    Quadrature,
    Analytic,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::RayMc => "ray_mc",
            Method::ChordMc => "chord_mc",
            Method::CoupledMc => "coupled_mc",
            Method::Quadrature => "quadrature",
            Method::Analytic => "analytic",
        }
    }
}

/// An s-perimeter value with statistical error and provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerimeterEstimate {
    pub value: f64,
    /// 1-sigma statistical error; 0 for deterministic methods.
    pub std_error: f64,
    pub method: Method,
    /// Sample count (MC) or node budget (quadrature).
    pub budget: u64,
    /// Seed for MC methods; None for deterministic ones.
    pub seed: Option<u64>,
}

impl PerimeterEstimate {
    pub fn deterministic(value: f64, method: Method, budget: u64) -> Self {
        PerimeterEstimate { value, std_error: 0.0, method, budget, seed: None }
    }
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s must lie in (0,1), got {s}")));
    }
    Ok(())
}

pub(crate) fn check_budget(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample budget must be positive".into()));
    }
    Ok(())
}

/// Sum over complement gaps ahead: for sorted crossings c_0 < c_1 < ... of a
/// ray from an interior point, the complement of the set along the ray is
/// [c_0, c_1) u [c_2, c_3) u ... u [c_last, inf), and
/// Int_complement r^{-1-s} dr = (1/s) * sum_i (-1)^i c_i^{-s}.
#[inline]
pub(crate) fn gap_sum(crossings: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    let mut sign = 1.0;
    for &c in crossings {
        acc += sign * libm::pow(c, -s);
        sign = -sign;
    }
    acc
}

/// One-directional line functional: with the set meeting the line in
/// `segments` (sorted), integrates the per-point forward gap power integral
/// over every segment, in closed form:
/// F+ = (1/(s(1-s))) * sum over segments j and forward gaps (g1, g2).
pub(crate) fn line_functional_forward(segments: &[(f64, f64)], s: f64) -> f64 {
    let q = 1.0 - s;
    let mut total = 0.0;
    for (j, &(a, b)) in segments.iter().enumerate() {
        // gaps ahead of segment j: (b_j, a_{j+1}), ..., (b_last, inf)
        for k in j..segments.len() {
            let g1 = segments[k].1;
            let term1 = libm::pow(g1 - a, q) - libm::pow(g1 - b, q);
            if k + 1 < segments.len() {
                let g2 = segments[k + 1].0;
                let term2 = libm::pow(g2 - a, q) - libm::pow(g2 - b, q);
                total += term1 - term2;
            } else {
                total += term1;
            }
        }
    }
    total / (s * q)
}

/// Symmetrized line functional (both directions; equals
/// 2 L^{1-s}/(s(1-s)) for a single segment of length L).
pub(crate) fn line_functional(segments: &[(f64, f64)], s: f64) -> f64 {
    if segments.is_empty() {
        return 0.0;
    }
    if segments.len() == 1 {
        let l = segments[0].1 - segments[0].0;
        return 2.0 * libm::pow(l, 1.0 - s) / (s * (1.0 - s));
    }
    let fwd = line_functional_forward(segments, s);
    let mut mirrored: SmallVec<[(f64, f64); 4]> = SmallVec::new();
    for &(a, b) in segments.iter().rev() {
        mirrored.push((-b, -a));
    }
    fwd + line_functional_forward(&mirrored, s)
}

// ----- EvaluableSet for convex bodies -----

impl EvaluableSet for crate::geometry::ConvexBody {
    fn dim(&self) -> usize {
        ConvexBodyExt::dim(self)
    }

    fn volume(&self) -> f64 {
        crate::geometry::ConvexBody::volume(self).unwrap_or(0.0)
    }

    fn membership(&self, x: &Vector) -> bool {
        crate::geometry::ConvexBody::membership(self, x)
    }

    fn ray_crossings(&self, x: &Vector, dir: &Vector, out: &mut CrossingBuf) {
        self.forward_crossings(x, dir, out);
    }

    fn center_hint(&self) -> Vector {
        self.barycenter().unwrap_or_else(|_| Vector::zeros(ConvexBodyExt::dim(self)))
    }

    fn bounding_radius(&self) -> f64 {
        self.circumradius_about(&EvaluableSet::center_hint(self))
    }

    fn bounding_box(&self) -> (Vector, Vector) {
        crate::geometry::ConvexBody::bounding_box(self)
    }

    fn star_anchor(&self) -> Option<Vector> {
        Some(EvaluableSet::center_hint(self))
    }

    fn radial_exit(&self, dir: &Vector) -> f64 {
        let anchor = EvaluableSet::center_hint(self);
        self.exit_unchecked(&anchor, dir)
    }

    fn inradius_proxy(&self) -> f64 {
        crate::geometry::ConvexBody::inradius_proxy(self)
    }
}

// disambiguation helper: ConvexBody::dim vs EvaluableSet::dim
trait ConvexBodyExt {
    fn dim(&self) -> usize;
}

impl ConvexBodyExt for crate::geometry::ConvexBody {
    fn dim(&self) -> usize {
        crate::geometry::ConvexBody::dim(self)
    }
}
