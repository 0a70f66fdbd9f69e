//! Convex body representations and the geometric oracles every estimator
//! consumes: membership, ray exit, volume, barycenter, diameter, slices,
//! Hausdorff distance to the unit ball, and normalization.
//!
//! Bodies are tagged variants with closed forms wherever they exist; the
//! polytope variant carries both an H-representation and a V-representation
//! and keeps them consistent.

mod polytope;

pub use polytope::Halfspace;

use crate::error::{Error, Result};
use crate::math::{self, Matrix, Vector};
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

/// Relative tolerance used by membership and consistency checks.
pub const GEOM_TOL: f64 = 1e-9;
/// Relative tolerance of the generic bisection ray-exit fallback.
pub const BISECT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball { center: Vector, radius: f64 },
    /// x = center + rotation * (semiaxes .* z), |z| <= 1.
    Ellipsoid { center: Vector, semiaxes: Vector, rotation: Matrix },
    Polytope { halfspaces: Vec<Halfspace>, vertices: Vec<Vector> },
    Cuboid { center: Vector, half_extents: Vector },
    /// Empty set (valid slice outcome; measure 0).
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    shape: Shape,
    dim: usize,
    cached_volume: Option<f64>,
    cached_barycenter: Option<Vector>,
}

/// Diameter with an achieving endpoint pair.
#[derive(Debug, Clone, Copy)]
pub struct Diameter {
    pub length: f64,
    pub x0: Vector,
    pub x1: Vector,
}

/// Scale/translation applied by [`ConvexBody::normalize`].
#[derive(Debug, Clone, Copy)]
pub struct NormalizeInfo {
    pub scale: f64,
    pub translation: Vector,
}

#[derive(Debug, Clone, Copy)]
pub struct HausdorffConfig {
    /// Direction count (default 4096 in n=2, 16384 in n=3).
    pub directions: usize,
    pub refine_rounds: usize,
}

impl HausdorffConfig {
    pub fn for_dim(dim: usize) -> Self {
        HausdorffConfig {
            directions: if dim >= 3 { 16384 } else { 4096 },
            refine_rounds: 12,
        }
    }
}

impl ConvexBody {
    // ---------------- constructors ----------------

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::DegenerateBody("ball needs positive finite radius".into()));
        }
        Ok(ConvexBody {
            dim: center.dim(),
            shape: Shape::Ball { center, radius },
            cached_volume: None,
            cached_barycenter: None,
        })
    }

    /// Interval [a, b] as a 1-dimensional body.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::DegenerateBody("interval needs b > a".into()));
        }
        ConvexBody::cuboid(Vector::new(&[0.5 * (a + b)]), Vector::new(&[0.5 * (b - a)]))
    }

    pub fn ellipsoid(center: Vector, semiaxes: Vector, rotation: Matrix) -> Result<Self> {
        let n = center.dim();
        if semiaxes.dim() != n || rotation.dim() != n {
            return Err(Error::InvalidParameter("ellipsoid dimension mismatch".into()));
        }
        if semiaxes.as_slice().iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::DegenerateBody("ellipsoid needs positive semiaxes".into()));
        }
        if !rotation.is_orthogonal(1e-8) {
            return Err(Error::InvalidParameter("ellipsoid rotation not orthogonal".into()));
        }
        Ok(ConvexBody {
            dim: n,
            shape: Shape::Ellipsoid { center, semiaxes, rotation },
            cached_volume: None,
            cached_barycenter: None,
        })
    }

    pub fn cuboid(center: Vector, half_extents: Vector) -> Result<Self> {
        if half_extents.dim() != center.dim() {
            return Err(Error::InvalidParameter("cuboid dimension mismatch".into()));
        }
        if half_extents.as_slice().iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::DegenerateBody("cuboid needs positive half-extents".into()));
        }
        Ok(ConvexBody {
            dim: center.dim(),
            shape: Shape::Cuboid { center, half_extents },
            cached_volume: None,
            cached_barycenter: None,
        })
    }

    /// Convex polygon from its vertices (any order; hull-ordered internally).
    pub fn polygon(vertices: &[Vector]) -> Result<Self> {
        let (hs, vs) = polytope::polygon_reps(vertices)?;
        Self::polytope(hs, vs)
    }

    /// Simplex conv{v0..v3} in R^3.
    pub fn simplex_3d(verts: &[Vector; 4]) -> Result<Self> {
        let (hs, vs) = polytope::simplex_3d_reps(verts)?;
        Self::polytope(hs, vs)
    }

    /// Polytope from matching H- and V-representations (validated).
    pub fn polytope(halfspaces: Vec<Halfspace>, mut vertices: Vec<Vector>) -> Result<Self> {
        if vertices.is_empty() || halfspaces.is_empty() {
            return Err(Error::DegenerateBody("polytope needs vertices and halfspaces".into()));
        }
        let dim = vertices[0].dim();
        if dim == 2 {
            // the polygon volume/centroid formulas need hull order
            let mut ctr = Vector::zeros(2);
            for v in &vertices {
                ctr = ctr.add(v);
            }
            let ctr = ctr.scale(1.0 / vertices.len() as f64);
            vertices.sort_by(|a, b| {
                let aa = libm::atan2(a.coord(1) - ctr.coord(1), a.coord(0) - ctr.coord(0));
                let ab = libm::atan2(b.coord(1) - ctr.coord(1), b.coord(0) - ctr.coord(0));
                aa.partial_cmp(&ab).unwrap_or(core::cmp::Ordering::Equal)
            });
        }
        let mut body = ConvexBody {
            shape: Shape::Polytope { halfspaces, vertices },
            dim,
            cached_volume: None,
            cached_barycenter: None,
        };
        body.validate_polytope()?;
        let (v, b) = polytope::volume_barycenter(&body)?;
        if !(v > 0.0) {
            return Err(Error::DegenerateBody("polytope has zero volume".into()));
        }
        body.cached_volume = Some(v);
        body.cached_barycenter = Some(b);
        Ok(body)
    }

    pub(crate) fn empty(dim: usize) -> Self {
        ConvexBody {
            shape: Shape::Empty,
            dim,
            cached_volume: None,
            cached_barycenter: None,
        }
    }

    // ---------------- accessors ----------------

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.shape, Shape::Empty)
    }

    pub fn cached_volume(&self) -> Option<f64> {
        self.cached_volume
    }

    pub fn cached_barycenter(&self) -> Option<Vector> {
        self.cached_barycenter
    }

    // ---------------- oracles ----------------

    pub fn membership(&self, x: &Vector) -> bool {
        let tol = GEOM_TOL * self.scale_hint();
        match &self.shape {
            Shape::Ball { center, radius } => x.dist(center) <= radius + tol,
            Shape::Ellipsoid { .. } => self.ellipsoid_norm(x) <= 1.0 + GEOM_TOL,
            Shape::Polytope { halfspaces, .. } => halfspaces
                .iter()
                .all(|h| h.normal.dot(x) <= h.offset + tol),
            Shape::Cuboid { center, half_extents } => (0..self.dim)
                .all(|i| (x.coord(i) - center.coord(i)).abs() <= half_extents.coord(i) + tol),
            Shape::Empty => false,
        }
    }

    fn ellipsoid_norm(&self, x: &Vector) -> f64 {
        if let Shape::Ellipsoid { center, semiaxes, rotation } = &self.shape {
            let p = rotation.tr_mul_vec(&x.sub(center));
            let mut z = Vector::zeros(self.dim);
            for i in 0..self.dim {
                z.set(i, p.coord(i) / semiaxes.coord(i));
            }
            z.norm()
        } else {
            unreachable!()
        }
    }

    /// Characteristic length used to scale tolerances.
    pub fn scale_hint(&self) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => radius + center.norm(),
            Shape::Ellipsoid { center, semiaxes, .. } => {
                let mut m: f64 = 0.0;
                for &a in semiaxes.as_slice() {
                    m = m.max(a);
                }
                m + center.norm()
            }
            Shape::Polytope { vertices, .. } => {
                let mut m: f64 = 0.0;
                for v in vertices {
                    m = m.max(v.norm());
                }
                m.max(1e-30)
            }
            Shape::Cuboid { center, half_extents } => half_extents.norm() + center.norm(),
            Shape::Empty => 1.0,
        }
    }

    pub fn volume(&self) -> Result<f64> {
        if let Some(v) = self.cached_volume {
            return Ok(v);
        }
        let v = match &self.shape {
            Shape::Ball { radius, .. } => {
                math::unit_ball_volume(self.dim) * libm::pow(*radius, self.dim as f64)
            }
            Shape::Ellipsoid { semiaxes, .. } => {
                let mut p = math::unit_ball_volume(self.dim);
                for &a in semiaxes.as_slice() {
                    p *= a;
                }
                p
            }
            Shape::Cuboid { half_extents, .. } => {
                let mut p = 1.0;
                for &h in half_extents.as_slice() {
                    p *= 2.0 * h;
                }
                p
            }
            Shape::Polytope { .. } => polytope::volume_barycenter(self)?.0,
            Shape::Empty => {
                return Err(Error::DegenerateBody("empty body has no volume".into()))
            }
        };
        if !(v > 0.0) {
            return Err(Error::DegenerateBody("zero volume".into()));
        }
        Ok(v)
    }

    /// Measure that treats empty/degenerate slices as 0 instead of erroring.
    pub fn measure(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.volume().unwrap_or(0.0)
        }
    }

    pub fn barycenter(&self) -> Result<Vector> {
        if let Some(b) = self.cached_barycenter {
            return Ok(b);
        }
        match &self.shape {
            Shape::Ball { center, .. } => Ok(*center),
            Shape::Ellipsoid { center, .. } => Ok(*center),
            Shape::Cuboid { center, .. } => Ok(*center),
            Shape::Polytope { .. } => Ok(polytope::volume_barycenter(self)?.1),
            Shape::Empty => Err(Error::DegenerateBody("empty body has no barycenter".into())),
        }
    }

    pub fn diameter(&self) -> Result<Diameter> {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let e = Vector::basis(self.dim, 0);
                Ok(Diameter {
                    length: 2.0 * radius,
                    x0: center.sub(&e.scale(*radius)),
                    x1: center.add(&e.scale(*radius)),
                })
            }
            Shape::Ellipsoid { center, semiaxes, rotation } => {
                let mut k = 0;
                for i in 1..self.dim {
                    if semiaxes.coord(i) > semiaxes.coord(k) {
                        k = i;
                    }
                }
                let axis = rotation.mul_vec(&Vector::basis(self.dim, k));
                let a = semiaxes.coord(k);
                Ok(Diameter {
                    length: 2.0 * a,
                    x0: center.sub(&axis.scale(a)),
                    x1: center.add(&axis.scale(a)),
                })
            }
            Shape::Polytope { vertices, .. } => Ok(polytope::vertex_diameter(vertices)),
            Shape::Cuboid { .. } => {
                let vs = self.cuboid_corners();
                Ok(polytope::vertex_diameter(&vs))
            }
            Shape::Empty => Err(Error::DegenerateBody("empty body has no diameter".into())),
        }
    }

    pub(crate) fn cuboid_corners(&self) -> Vec<Vector> {
        if let Shape::Cuboid { center, half_extents } = &self.shape {
            let n = self.dim;
            let mut out = Vec::with_capacity(1 << n);
            for mask in 0..(1u32 << n) {
                let mut v = *center;
                for i in 0..n {
                    let s = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
                    v.set(i, center.coord(i) + s * half_extents.coord(i));
                }
                out.push(v);
            }
            out
        } else {
            unreachable!()
        }
    }

    /// The unique rho > 0 with x + rho*theta on the boundary; `x` strictly interior.
    pub fn ray_exit_distance(&self, x: &Vector, theta: &Vector) -> Result<f64> {
        if !self.point_strictly_interior(x) {
            return Err(Error::Precondition("ray origin not strictly interior".into()));
        }
        let rho = self.exit_unchecked(x, theta);
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Internal("ray exit not finite/positive".into()));
        }
        Ok(rho)
    }

    pub(crate) fn point_strictly_interior(&self, x: &Vector) -> bool {
        let tol = GEOM_TOL * self.scale_hint();
        match &self.shape {
            Shape::Ball { center, radius } => x.dist(center) < radius - tol,
            Shape::Ellipsoid { .. } => self.ellipsoid_norm(x) < 1.0 - GEOM_TOL,
            Shape::Polytope { halfspaces, .. } => halfspaces
                .iter()
                .all(|h| h.normal.dot(x) < h.offset - tol),
            Shape::Cuboid { center, half_extents } => (0..self.dim)
                .all(|i| (x.coord(i) - center.coord(i)).abs() < half_extents.coord(i) - tol),
            Shape::Empty => false,
        }
    }

    /// Exit distance assuming x inside; positive by construction.
    pub(crate) fn exit_unchecked(&self, x: &Vector, theta: &Vector) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let p = x.sub(center);
                ball_exit(radius * radius - p.norm_sq(), p.dot(theta))
            }
            Shape::Ellipsoid { center, semiaxes, rotation } => {
                let pr = rotation.tr_mul_vec(&x.sub(center));
                let qr = rotation.tr_mul_vec(theta);
                let mut p = Vector::zeros(self.dim);
                let mut q = Vector::zeros(self.dim);
                for i in 0..self.dim {
                    p.set(i, pr.coord(i) / semiaxes.coord(i));
                    q.set(i, qr.coord(i) / semiaxes.coord(i));
                }
                let qq = q.norm_sq();
                let pq = p.dot(&q);
                // solve |p + t q|^2 = 1; conjugate form when pq > 0
                let one_minus_pp = 1.0 - p.norm_sq();
                let disc = pq * pq + qq * one_minus_pp;
                let root = disc.max(0.0).sqrt();
                if pq > 0.0 {
                    one_minus_pp / (root + pq)
                } else {
                    (root - pq) / qq
                }
            }
            Shape::Cuboid { center, half_extents } => {
                let mut t = f64::INFINITY;
                for i in 0..self.dim {
                    let d = theta.coord(i);
                    if d > 1e-300 {
                        t = t.min((center.coord(i) + half_extents.coord(i) - x.coord(i)) / d);
                    } else if d < -1e-300 {
                        t = t.min((center.coord(i) - half_extents.coord(i) - x.coord(i)) / d);
                    }
                }
                t
            }
            Shape::Polytope { halfspaces, .. } => {
                let mut t = f64::INFINITY;
                for h in halfspaces {
                    let d = h.normal.dot(theta);
                    if d > 1e-300 {
                        t = t.min((h.offset - h.normal.dot(x)) / d);
                    }
                }
                t
            }
            Shape::Empty => f64::NAN,
        }
    }

    /// Generic bracketing + bisection fallback on membership alone
    /// (tolerance BISECT_TOL * bounding radius). Uses the tolerance-free
    /// membership predicate so the achievable resolution is not limited by
    /// the membership band.
    pub fn ray_exit_bisect(&self, x: &Vector, theta: &Vector) -> Result<f64> {
        if !self.point_strictly_interior(x) {
            return Err(Error::Precondition("ray origin not strictly interior".into()));
        }
        let rmax = 2.0 * self.scale_hint() + x.norm();
        let mut lo = 0.0;
        let mut hi = rmax;
        if self.membership_raw(&x.add_scaled(theta, hi)) {
            return Err(Error::Internal("bracketing failed: far point inside".into()));
        }
        let tol = BISECT_TOL * rmax;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.membership_raw(&x.add_scaled(theta, mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Membership without the tolerance band.
    fn membership_raw(&self, x: &Vector) -> bool {
        match &self.shape {
            Shape::Ball { center, radius } => x.dist(center) <= *radius,
            Shape::Ellipsoid { .. } => self.ellipsoid_norm(x) <= 1.0,
            Shape::Polytope { halfspaces, .. } => {
                halfspaces.iter().all(|h| h.normal.dot(x) <= h.offset)
            }
            Shape::Cuboid { center, half_extents } => (0..self.dim)
                .all(|i| (x.coord(i) - center.coord(i)).abs() <= half_extents.coord(i)),
            Shape::Empty => false,
        }
    }

    /// Boundary crossings of the ray x + t*theta, t > 0 (sorted). Convex:
    /// at most two.
    pub(crate) fn forward_crossings(&self, x: &Vector, theta: &Vector, out: &mut crate::perimeter::CrossingBuf) {
        out.clear();
        match &self.shape {
            Shape::Ball { center, radius } => {
                let p = x.sub(center);
                let pq = p.dot(theta);
                let c0 = p.norm_sq() - radius * radius;
                let disc = pq * pq - c0;
                if disc > 0.0 {
                    let root = disc.sqrt();
                    push_pos(out, -pq - root);
                    push_pos(out, -pq + root);
                }
            }
            Shape::Ellipsoid { center, semiaxes, rotation } => {
                let pr = rotation.tr_mul_vec(&x.sub(center));
                let qr = rotation.tr_mul_vec(theta);
                let mut p = Vector::zeros(self.dim);
                let mut q = Vector::zeros(self.dim);
                for i in 0..self.dim {
                    p.set(i, pr.coord(i) / semiaxes.coord(i));
                    q.set(i, qr.coord(i) / semiaxes.coord(i));
                }
                let a = q.norm_sq();
                let b = p.dot(&q);
                let c = p.norm_sq() - 1.0;
                let disc = b * b - a * c;
                if disc > 0.0 && a > 0.0 {
                    let root = disc.sqrt();
                    push_pos(out, (-b - root) / a);
                    push_pos(out, (-b + root) / a);
                }
            }
            Shape::Cuboid { .. } | Shape::Polytope { .. } => {
                let (tlo, thi) = self.line_interval(x, theta);
                if tlo < thi {
                    push_pos(out, tlo);
                    push_pos(out, thi);
                }
            }
            Shape::Empty => {}
        }
    }

    /// Parameter interval of the full line x + t*theta inside the body
    /// (cuboid/polytope only).
    fn line_interval(&self, x: &Vector, theta: &Vector) -> (f64, f64) {
        let mut tlo = f64::NEG_INFINITY;
        let mut thi = f64::INFINITY;
        let mut clamp = |nx: f64, nd: f64, b: f64| {
            if nd > 1e-300 {
                thi = thi.min((b - nx) / nd);
            } else if nd < -1e-300 {
                tlo = tlo.max((b - nx) / nd);
            } else if nx > b {
                tlo = 1.0;
                thi = 0.0;
            }
        };
        match &self.shape {
            Shape::Cuboid { center, half_extents } => {
                for i in 0..self.dim {
                    clamp(
                        x.coord(i) - center.coord(i),
                        theta.coord(i),
                        half_extents.coord(i),
                    );
                    clamp(
                        -(x.coord(i) - center.coord(i)),
                        -theta.coord(i),
                        half_extents.coord(i),
                    );
                }
            }
            Shape::Polytope { halfspaces, .. } => {
                for h in halfspaces {
                    clamp(h.normal.dot(x), h.normal.dot(theta), h.offset);
                }
            }
            _ => unreachable!(),
        }
        (tlo, thi)
    }

    /// Slice at x_t = x0 + t (x1 - x0) by the hyperplane orthogonal to
    /// x1 - x0, expressed in an orthonormal frame of that hyperplane.
    /// Empty slices are a valid value, not an error.
    pub fn slice(&self, x0: &Vector, x1: &Vector, t: f64) -> Result<ConvexBody> {
        if self.dim < 2 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter("slice parameter t outside [0,1]".into()));
        }
        let axis = x1.sub(x0);
        let w = axis.unit()?;
        let xt = x0.add_scaled(&axis, t);
        let basis = math::orthonormal_complement(&w);
        match &self.shape {
            Shape::Ball { center, radius } => {
                let d = center.sub(&xt);
                let dn = d.dot(&w);
                let r2 = radius * radius - dn * dn;
                let scale_tol = GEOM_TOL * radius * radius;
                if r2 <= scale_tol {
                    return Ok(ConvexBody::empty(self.dim - 1));
                }
                let mut c = Vector::zeros(self.dim - 1);
                for (i, b) in basis.iter().enumerate() {
                    c.set(i, d.dot(b));
                }
                ConvexBody::ball(c, r2.sqrt())
            }
            Shape::Ellipsoid { .. } => self.slice_ellipsoid(&xt, &basis),
            Shape::Polytope { halfspaces, .. } => {
                polytope::slice_polytope(halfspaces, self.dim, &xt, &basis)
            }
            Shape::Cuboid { .. } => {
                let p = self.to_polytope()?;
                p.slice(x0, x1, t)
            }
            Shape::Empty => Ok(ConvexBody::empty(self.dim - 1)),
        }
    }

    fn slice_ellipsoid(&self, xt: &Vector, basis: &[Vector]) -> Result<ConvexBody> {
        let (center, semiaxes, rotation) = match &self.shape {
            Shape::Ellipsoid { center, semiaxes, rotation } => (center, semiaxes, rotation),
            _ => unreachable!(),
        };
        let n = self.dim;
        let m = n - 1;
        // map into unit-ball coordinates: z = diag(1/a) R^T (x - c)
        let to_z = |v: &Vector| {
            let r = rotation.tr_mul_vec(v);
            let mut z = Vector::zeros(n);
            for i in 0..n {
                z.set(i, r.coord(i) / semiaxes.coord(i));
            }
            z
        };
        let z0 = to_z(&xt.sub(center));
        let bs: Vec<Vector> = basis.iter().map(|b| to_z(b)).collect();
        // quadratic form: |z0 + sum x_i bs_i|^2 <= 1
        let mut mm = [[0.0f64; 2]; 2];
        let mut v = [0.0f64; 2];
        for i in 0..m {
            for j in 0..m {
                mm[i][j] = bs[i].dot(&bs[j]);
            }
            v[i] = bs[i].dot(&z0);
        }
        // center xc = -M^{-1} v ; residual w0 = |z0|^2 - v^T M^{-1} v
        let (xc, vmv) = if m == 1 {
            if mm[0][0] <= 0.0 {
                return Err(Error::Internal("degenerate ellipsoid slice form".into()));
            }
            ([-v[0] / mm[0][0], 0.0], v[0] * v[0] / mm[0][0])
        } else {
            let det = mm[0][0] * mm[1][1] - mm[0][1] * mm[1][0];
            if det <= 0.0 {
                return Err(Error::Internal("degenerate ellipsoid slice form".into()));
            }
            let inv = [
                [mm[1][1] / det, -mm[0][1] / det],
                [-mm[1][0] / det, mm[0][0] / det],
            ];
            let xc = [
                -(inv[0][0] * v[0] + inv[0][1] * v[1]),
                -(inv[1][0] * v[0] + inv[1][1] * v[1]),
            ];
            let vmv = v[0] * (inv[0][0] * v[0] + inv[0][1] * v[1])
                + v[1] * (inv[1][0] * v[0] + inv[1][1] * v[1]);
            (xc, vmv)
        };
        let rhs = 1.0 - (z0.norm_sq() - vmv);
        if rhs <= GEOM_TOL * GEOM_TOL {
            return Ok(ConvexBody::empty(m));
        }
        if m == 1 {
            let half = (rhs / mm[0][0]).sqrt();
            return ConvexBody::cuboid(Vector::new(&[xc[0]]), Vector::new(&[half]));
        }
        // symmetric 2x2 eigendecomposition of M
        let tr = mm[0][0] + mm[1][1];
        let det = mm[0][0] * mm[1][1] - mm[0][1] * mm[1][0];
        let gap = ((tr * tr / 4.0 - det).max(0.0)).sqrt();
        let l1 = tr / 2.0 + gap;
        let l2 = tr / 2.0 - gap;
        if l2 <= 0.0 {
            return Err(Error::Internal("ellipsoid slice form not positive".into()));
        }
        let (c_, s_) = if mm[0][1].abs() > 1e-14 {
            let u = Vector::new(&[mm[0][1], l1 - mm[0][0]]);
            let u = u.unit().unwrap();
            (u.coord(0), u.coord(1))
        } else {
            (1.0, 0.0)
        };
        let rot = Matrix::from_rows(2, &[c_, -s_, s_, c_]);
        let a1 = (rhs / l1).sqrt();
        let a2 = (rhs / l2).sqrt();
        ConvexBody::ellipsoid(
            Vector::new(&[xc[0], xc[1]]),
            Vector::new(&[a1, a2]),
            rot,
        )
    }

    /// sup over directions of |rho_E(theta) - 1| for bodies with the origin
    /// strictly interior (exact identity for the Hausdorff distance to the
    /// unit ball for such bodies).
    pub fn hausdorff_to_unit_ball(&self, cfg: &HausdorffConfig) -> Result<f64> {
        let origin = Vector::zeros(self.dim);
        if !self.point_strictly_interior(&origin) {
            return Err(Error::Precondition("origin not strictly interior".into()));
        }
        let f = |dir: &Vector| -> f64 { (self.exit_unchecked(&origin, dir) - 1.0).abs() };
        match self.dim {
            1 => {
                let a = f(&Vector::new(&[1.0]));
                let b = f(&Vector::new(&[-1.0]));
                Ok(a.max(b))
            }
            2 => {
                let n = cfg.directions.max(8);
                let mut best = (0.0f64, 0.0f64); // (value, angle)
                for i in 0..n {
                    let a = core::f64::consts::TAU * (i as f64) / (n as f64);
                    let v = f(&Vector::new(&[a.cos(), a.sin()]));
                    if v > best.0 {
                        best = (v, a);
                    }
                }
                let mut half = core::f64::consts::TAU / n as f64;
                let mut center = best.1;
                for _ in 0..cfg.refine_rounds {
                    for k in -4..=4 {
                        let a = center + half * (k as f64) / 4.0;
                        let v = f(&Vector::new(&[a.cos(), a.sin()]));
                        if v > best.0 {
                            best = (v, a);
                        }
                    }
                    center = best.1;
                    half *= 0.25;
                }
                Ok(best.0)
            }
            3 => {
                let n = cfg.directions.max(32);
                let golden = core::f64::consts::PI * (3.0 - libm::sqrt(5.0));
                let mut best = (0.0f64, Vector::basis(3, 2));
                for i in 0..n {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let r = libm::sqrt((1.0 - z * z).max(0.0));
                    let a = golden * i as f64;
                    let d = Vector::new(&[r * a.cos(), r * a.sin(), z]);
                    let v = f(&d);
                    if v > best.0 {
                        best = (v, d);
                    }
                }
                let mut h = 2.0 / libm::sqrt(n as f64);
                for _ in 0..cfg.refine_rounds {
                    let frame = math::orthonormal_complement(&best.1);
                    let center = best.1;
                    for i in -2i32..=2 {
                        for j in -2i32..=2 {
                            let d = center
                                .add_scaled(&frame[0], h * i as f64 / 2.0)
                                .add_scaled(&frame[1], h * j as f64 / 2.0);
                            if let Ok(d) = d.unit() {
                                let v = f(&d);
                                if v > best.0 {
                                    best = (v, d);
                                }
                            }
                        }
                    }
                    h *= 0.3;
                }
                Ok(best.0)
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn translate(&self, v: &Vector) -> ConvexBody {
        let shape = match &self.shape {
            Shape::Ball { center, radius } => Shape::Ball { center: center.add(v), radius: *radius },
            Shape::Ellipsoid { center, semiaxes, rotation } => Shape::Ellipsoid {
                center: center.add(v),
                semiaxes: *semiaxes,
                rotation: *rotation,
            },
            Shape::Cuboid { center, half_extents } => Shape::Cuboid {
                center: center.add(v),
                half_extents: *half_extents,
            },
            Shape::Polytope { halfspaces, vertices } => Shape::Polytope {
                halfspaces: halfspaces
                    .iter()
                    .map(|h| Halfspace {
                        normal: h.normal,
                        offset: h.offset + h.normal.dot(v),
                    })
                    .collect(),
                vertices: vertices.iter().map(|p| p.add(v)).collect(),
            },
            Shape::Empty => Shape::Empty,
        };
        ConvexBody {
            shape,
            dim: self.dim,
            cached_volume: self.cached_volume,
            cached_barycenter: self.cached_barycenter.map(|b| b.add(v)),
        }
    }

    /// Scale about the origin by k > 0.
    pub fn scale(&self, k: f64) -> ConvexBody {
        let kn = libm::pow(k, self.dim as f64);
        let shape = match &self.shape {
            Shape::Ball { center, radius } => Shape::Ball {
                center: center.scale(k),
                radius: radius * k,
            },
            Shape::Ellipsoid { center, semiaxes, rotation } => Shape::Ellipsoid {
                center: center.scale(k),
                semiaxes: semiaxes.scale(k),
                rotation: *rotation,
            },
            Shape::Cuboid { center, half_extents } => Shape::Cuboid {
                center: center.scale(k),
                half_extents: half_extents.scale(k),
            },
            Shape::Polytope { halfspaces, vertices } => Shape::Polytope {
                halfspaces: halfspaces
                    .iter()
                    .map(|h| Halfspace {
                        normal: h.normal,
                        offset: h.offset * k,
                    })
                    .collect(),
                vertices: vertices.iter().map(|p| p.scale(k)).collect(),
            },
            Shape::Empty => Shape::Empty,
        };
        ConvexBody {
            shape,
            dim: self.dim,
            cached_volume: self.cached_volume.map(|v| v * kn),
            cached_barycenter: self.cached_barycenter.map(|b| b.scale(k)),
        }
    }

    /// Rotate about the origin by an orthogonal map (cuboids become polytopes).
    pub fn rotate(&self, r: &Matrix) -> Result<ConvexBody> {
        let shape = match &self.shape {
            Shape::Ball { center, radius } => Shape::Ball {
                center: r.mul_vec(center),
                radius: *radius,
            },
            Shape::Ellipsoid { center, semiaxes, rotation } => {
                // compose rotations
                let mut entries = alloc::vec![0.0; self.dim * self.dim];
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        let mut s = 0.0;
                        for k in 0..self.dim {
                            s += r.entry(i, k) * rotation.entry(k, j);
                        }
                        entries[i * self.dim + j] = s;
                    }
                }
                Shape::Ellipsoid {
                    center: r.mul_vec(center),
                    semiaxes: *semiaxes,
                    rotation: Matrix::from_rows(self.dim, &entries),
                }
            }
            Shape::Polytope { halfspaces, vertices } => Shape::Polytope {
                halfspaces: halfspaces
                    .iter()
                    .map(|h| Halfspace {
                        normal: r.mul_vec(&h.normal),
                        offset: h.offset,
                    })
                    .collect(),
                vertices: vertices.iter().map(|p| r.mul_vec(p)).collect(),
            },
            Shape::Cuboid { .. } => return self.to_polytope()?.rotate(r),
            Shape::Empty => Shape::Empty,
        };
        Ok(ConvexBody {
            shape,
            dim: self.dim,
            cached_volume: self.cached_volume,
            cached_barycenter: self.cached_barycenter.map(|b| r.mul_vec(&b)),
        })
    }

    /// Rescale to |E| = w_n and translate the barycenter to the origin.
    pub fn normalize(&self) -> Result<(ConvexBody, NormalizeInfo)> {
        let vol = self.volume()?;
        let bar = self.barycenter()?;
        let k = libm::pow(math::unit_ball_volume(self.dim) / vol, 1.0 / self.dim as f64);
        let moved = self.translate(&bar.scale(-1.0)).scale(k);
        Ok((
            moved,
            NormalizeInfo {
                scale: k,
                translation: bar.scale(-1.0),
            },
        ))
    }

    pub fn to_polytope(&self) -> Result<ConvexBody> {
        match &self.shape {
            Shape::Cuboid { center, half_extents } => {
                let mut hs = Vec::new();
                for i in 0..self.dim {
                    for sgn in [1.0, -1.0] {
                        let mut nrm = Vector::zeros(self.dim);
                        nrm.set(i, sgn);
                        hs.push(Halfspace {
                            normal: nrm,
                            offset: sgn * center.coord(i) + half_extents.coord(i),
                        });
                    }
                }
                ConvexBody::polytope(hs, self.cuboid_corners())
            }
            Shape::Polytope { .. } => Ok(self.clone()),
            _ => Err(Error::InvalidParameter("only cuboids/polytopes convert to polytope".into())),
        }
    }

    pub fn bounding_box(&self) -> (Vector, Vector) {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let mut lo = Vector::zeros(self.dim);
                let mut hi = Vector::zeros(self.dim);
                for i in 0..self.dim {
                    lo.set(i, center.coord(i) - radius);
                    hi.set(i, center.coord(i) + radius);
                }
                (lo, hi)
            }
            Shape::Ellipsoid { center, semiaxes, rotation } => {
                // half-width along axis i: || row_i(R * diag(a)) ||
                let mut lo = Vector::zeros(self.dim);
                let mut hi = Vector::zeros(self.dim);
                for i in 0..self.dim {
                    let mut w = 0.0;
                    for j in 0..self.dim {
                        let v = rotation.entry(i, j) * semiaxes.coord(j);
                        w += v * v;
                    }
                    let w = w.sqrt();
                    lo.set(i, center.coord(i) - w);
                    hi.set(i, center.coord(i) + w);
                }
                (lo, hi)
            }
            Shape::Polytope { vertices, .. } => {
                let mut lo = Vector::zeros(self.dim);
                let mut hi = Vector::zeros(self.dim);
                for i in 0..self.dim {
                    let mut a = f64::INFINITY;
                    let mut b = f64::NEG_INFINITY;
                    for v in vertices {
                        a = a.min(v.coord(i));
                        b = b.max(v.coord(i));
                    }
                    lo.set(i, a);
                    hi.set(i, b);
                }
                (lo, hi)
            }
            Shape::Cuboid { center, half_extents } => {
                let mut lo = Vector::zeros(self.dim);
                let mut hi = Vector::zeros(self.dim);
                for i in 0..self.dim {
                    lo.set(i, center.coord(i) - half_extents.coord(i));
                    hi.set(i, center.coord(i) + half_extents.coord(i));
                }
                (lo, hi)
            }
            Shape::Empty => (Vector::zeros(self.dim), Vector::zeros(self.dim)),
        }
    }

    /// Radius of a ball about `p` containing the body.
    pub fn circumradius_about(&self, p: &Vector) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => p.dist(center) + radius,
            Shape::Ellipsoid { center, semiaxes, .. } => {
                let mut m: f64 = 0.0;
                for &a in semiaxes.as_slice() {
                    m = m.max(a);
                }
                p.dist(center) + m
            }
            Shape::Polytope { vertices, .. } => {
                let mut m: f64 = 0.0;
                for v in vertices {
                    m = m.max(v.dist(p));
                }
                m
            }
            Shape::Cuboid { center, half_extents } => p.dist(center) + half_extents.norm(),
            Shape::Empty => 0.0,
        }
    }

    /// Cheap lower-bound proxy of the inradius (used for stratification scales).
    pub fn inradius_proxy(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => *radius,
            Shape::Ellipsoid { semiaxes, .. } => {
                let mut m = f64::INFINITY;
                for &a in semiaxes.as_slice() {
                    m = m.min(a);
                }
                m
            }
            Shape::Polytope { halfspaces, .. } => {
                let b = self.cached_barycenter.unwrap_or_else(|| Vector::zeros(self.dim));
                let mut m = f64::INFINITY;
                for h in halfspaces {
                    m = m.min(h.offset - h.normal.dot(&b));
                }
                m.max(0.0)
            }
            Shape::Cuboid { half_extents, .. } => {
                let mut m = f64::INFINITY;
                for &h in half_extents.as_slice() {
                    m = m.min(h);
                }
                m
            }
            Shape::Empty => 0.0,
        }
    }

    fn validate_polytope(&self) -> Result<()> {
        if let Shape::Polytope { halfspaces, vertices } = &self.shape {
            let tol = GEOM_TOL * self.scale_hint().max(1.0);
            for h in halfspaces {
                if (h.normal.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter("halfspace normal not unit".into()));
                }
            }
            for v in vertices {
                for h in halfspaces {
                    if h.normal.dot(v) > h.offset + tol {
                        return Err(Error::InvalidParameter(String::from(
                            "vertex violates halfspace",
                        )));
                    }
                }
            }
            for h in halfspaces {
                let tight = vertices
                    .iter()
                    .filter(|v| (h.normal.dot(v) - h.offset).abs() <= tol)
                    .count();
                if tight < self.dim {
                    return Err(Error::InvalidParameter(String::from(
                        "halfspace not supported by enough vertices",
                    )));
                }
            }
            Ok(())
        } else {
            Ok(())
        }
    }
}

/// Stable exit distance for a ball: rr_minus_pp = r^2 - |p|^2 (>0 inside),
/// pq = p . theta with |theta| = 1.
#[inline]
pub(crate) fn ball_exit(rr_minus_pp: f64, pq: f64) -> f64 {
    let disc = (pq * pq + rr_minus_pp).max(0.0);
    let root = disc.sqrt();
    if pq > 0.0 {
        // conjugate form avoids cancellation when the point is near the boundary
        rr_minus_pp / (root + pq)
    } else {
        root - pq
    }
}

#[inline]
fn push_pos(out: &mut crate::perimeter::CrossingBuf, t: f64) {
    if t > 0.0 && t.is_finite() {
        out.push(t);
    }
}
