//! Nearly spherical sets: radial graphs (1 + u(x)) x over a sphere
//! quadrature grid, with volume/barycenter normalization, Sobolev-type
//! norms, the Gagliardo seminorm and the stability-inequality functional.

mod fuglede;
mod seminorm;

pub use fuglede::{fuglede_ratio, FugledeRatio, DEFAULT_EPS0};
pub use seminorm::{gagliardo_seminorm_sq, GagliardoValue};

use crate::error::{Error, Result};
use crate::math::{quad::gauss_legendre, unit_ball_volume, Vector};
use crate::perimeter::{CrossingBuf, EvaluableSet};
use alloc::format;
use alloc::vec::Vec;

/// Quadrature grid on the unit sphere S^{n-1}, n in {2, 3}.
///
/// n=2: uniform angles with equal weights; n=3: Gauss-Legendre nodes in
/// cos(polar) times a uniform azimuth grid with product weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    dim: usize,
    nodes: Vec<Vector>,
    weights: Vec<f64>,
    /// n=2: (angular count, 0); n=3: (polar, azimuth) counts.
    res: (usize, usize),
    /// n=3 only: Gauss-Legendre cos(polar) nodes (ascending).
    polar_cos: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridResolution {
    /// n = 2: number of angular nodes.
    Angular(usize),
    /// n = 3: (polar rings, azimuthal nodes per ring).
    Product { polar: usize, azimuth: usize },
}

pub fn build_grid(n: usize, resolution: GridResolution) -> Result<SphereGrid> {
    match (n, resolution) {
        (2, GridResolution::Angular(count)) => {
            if count < 8 {
                return Err(Error::InvalidParameter("need at least 8 angular nodes".into()));
            }
            let w = core::f64::consts::TAU / count as f64;
            let mut nodes = Vec::with_capacity(count);
            for i in 0..count {
                let a = w * i as f64;
                nodes.push(Vector::new(&[libm::cos(a), libm::sin(a)]));
            }
            Ok(SphereGrid {
                dim: 2,
                weights: alloc::vec![w; count],
                nodes,
                res: (count, 0),
                polar_cos: Vec::new(),
            })
        }
        (3, GridResolution::Product { polar, azimuth }) => {
            if polar < 4 || azimuth < 8 {
                return Err(Error::InvalidParameter("n=3 grid too coarse".into()));
            }
            let (gc, gw) = gauss_legendre(polar);
            let wphi = core::f64::consts::TAU / azimuth as f64;
            let mut nodes = Vec::with_capacity(polar * azimuth);
            let mut weights = Vec::with_capacity(polar * azimuth);
            for (ci, &c) in gc.iter().enumerate() {
                let st = libm::sqrt((1.0 - c * c).max(0.0));
                for j in 0..azimuth {
                    let a = wphi * j as f64;
                    nodes.push(Vector::new(&[st * libm::cos(a), st * libm::sin(a), c]));
                    weights.push(gw[ci] * wphi);
                }
            }
            Ok(SphereGrid {
                dim: 3,
                nodes,
                weights,
                res: (polar, azimuth),
                polar_cos: gc,
            })
        }
        (d, _) => Err(Error::UnsupportedDimension(d)),
    }
}

impl SphereGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vector] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn resolution(&self) -> (usize, usize) {
        self.res
    }

    /// Grid-adjacent node indices (for discrete Lipschitz estimation).
    pub fn neighbors(&self, i: usize) -> smallvec::SmallVec<[usize; 4]> {
        let mut out = smallvec::SmallVec::new();
        match self.dim {
            2 => {
                let count = self.res.0;
                out.push((i + count - 1) % count);
                out.push((i + 1) % count);
            }
            3 => {
                let (_np, na) = self.res;
                let ring = i / na;
                let j = i % na;
                out.push(ring * na + (j + na - 1) % na);
                out.push(ring * na + (j + 1) % na);
                if ring > 0 {
                    out.push((ring - 1) * na + j);
                }
                if (ring + 1) * na < self.nodes.len() {
                    out.push((ring + 1) * na + j);
                }
            }
            _ => unreachable!(),
        }
        out
    }

    /// Geodesic distance between two nodes.
    pub fn geodesic(&self, i: usize, j: usize) -> f64 {
        let c = self.nodes[i].dot(&self.nodes[j]).clamp(-1.0, 1.0);
        libm::acos(c)
    }
}

/// Radial-graph set: boundary {(1 + u(x)) x : x on the unit sphere}, with u
/// stored at the grid nodes and extended by piecewise-linear (n=2) or
/// bilinear (n=3) interpolation. All quadratures below integrate the
/// interpolated set exactly, so normalization and Monte Carlo sampling see
/// the same body.
#[derive(Debug, Clone)]
pub struct NearlySphericalSet {
    grid: SphereGrid,
    u: Vec<f64>,
    lip_estimate: f64,
    normalized: bool,
    volume: f64,
}

/// Hard bound from the radial-graph definition: sup|u| below 1/2.
pub const SUP_U_BOUND: f64 = 0.5;

const NORM_MAX_ITERS: usize = 100;
const VOL_TOL: f64 = 1e-8;
const BAR_TOL: f64 = 1e-8;

impl NearlySphericalSet {
    /// Build a normalized nearly spherical set from raw per-node radial
    /// perturbations: iteratively rescales the volume to w_n and recenters
    /// the barycenter to the origin by first-order radial updates.
    pub fn from_radial_samples(grid: SphereGrid, raw_u: &[f64]) -> Result<Self> {
        if raw_u.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "u has {} values for {} nodes",
                raw_u.len(),
                grid.len()
            )));
        }
        let sup = raw_u.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if sup >= SUP_U_BOUND {
            return Err(Error::InvalidParameter(format!(
                "sup|u| = {sup} violates the radial-graph bound 1/2"
            )));
        }
        let n = grid.dim();
        let wn = unit_ball_volume(n);
        let mut set = NearlySphericalSet {
            grid,
            u: raw_u.to_vec(),
            lip_estimate: 0.0,
            normalized: false,
            volume: 0.0,
        };
        for _ in 0..NORM_MAX_ITERS {
            let vol = set.quad_volume();
            let t = libm::pow(wn / vol, 1.0 / n as f64);
            for v in set.u.iter_mut() {
                *v = t * (1.0 + *v) - 1.0;
            }
            let vol = set.quad_volume();
            let bar = set.quad_barycenter(vol);
            // first-order recentring: u(x) <- u(x) - bar . x
            for i in 0..set.u.len() {
                let node = set.grid.nodes[i];
                set.u[i] -= bar.dot(&node);
            }
            let sup = set.u.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            if sup >= SUP_U_BOUND {
                return Err(Error::NormalizationFailed(
                    "radial bound 1/2 exceeded during normalization".into(),
                ));
            }
            let vol2 = set.quad_volume();
            let bar2 = set.quad_barycenter(vol2);
            if (vol2 - wn).abs() <= VOL_TOL * wn && bar2.norm() <= BAR_TOL {
                set.volume = vol2;
                set.normalized = true;
                set.lip_estimate = set.discrete_lipschitz();
                return Ok(set);
            }
        }
        Err(Error::NormalizationFailed(format!(
            "no convergence in {NORM_MAX_ITERS} iterations (set too far from a ball)"
        )))
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn lip_estimate(&self) -> f64 {
        self.lip_estimate
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn sup_u(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// W^{1,infty} proxy: max(sup|u|, discrete Lipschitz constant).
    pub fn w1inf(&self) -> f64 {
        self.sup_u().max(self.lip_estimate)
    }

    fn discrete_lipschitz(&self) -> f64 {
        let mut lip: f64 = 0.0;
        for i in 0..self.grid.len() {
            for j in self.grid.neighbors(i) {
                let d = self.grid.geodesic(i, j);
                if d > 1e-12 {
                    lip = lip.max((self.u[i] - self.u[j]).abs() / d);
                }
            }
        }
        lip
    }

    /// Radial boundary distance 1 + u along a unit direction (interpolated).
    pub fn radius(&self, dir: &Vector) -> f64 {
        1.0 + self.u_at(dir)
    }

    pub fn u_at(&self, dir: &Vector) -> f64 {
        match self.grid.dim() {
            2 => {
                let count = self.grid.res.0;
                let ang = libm::atan2(dir.coord(1), dir.coord(0));
                let step = core::f64::consts::TAU / count as f64;
                let pos = wrap_positive(ang / step, count as f64);
                let i = (pos as usize) % count;
                let frac = pos - libm::floor(pos);
                let j = (i + 1) % count;
                self.u[i] * (1.0 - frac) + self.u[j] * frac
            }
            3 => {
                let (np, na) = self.grid.res;
                let c = dir.coord(2).clamp(-1.0, 1.0);
                let ang = libm::atan2(dir.coord(1), dir.coord(0));
                let step = core::f64::consts::TAU / na as f64;
                let pos = wrap_positive(ang / step, na as f64);
                let j0 = (pos as usize) % na;
                let fj = pos - libm::floor(pos);
                let j1 = (j0 + 1) % na;
                let pc = &self.grid.polar_cos;
                let ring_val = |r: usize| -> f64 {
                    self.u[r * na + j0] * (1.0 - fj) + self.u[r * na + j1] * fj
                };
                if c <= pc[0] {
                    return ring_val(0);
                }
                if c >= pc[np - 1] {
                    return ring_val(np - 1);
                }
                let mut lo = 0;
                let mut hi = np - 1;
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if pc[mid] <= c {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let fc = (c - pc[lo]) / (pc[hi] - pc[lo]);
                ring_val(lo) * (1.0 - fc) + ring_val(hi) * fc
            }
            _ => unreachable!(),
        }
    }

    /// Volume of the interpolated set: (1/n) Int (1+u)^n dH^{n-1}.
    pub fn quad_volume(&self) -> f64 {
        let n = self.grid.dim() as f64;
        self.surface_integral(&|r: f64, _node: &Vector| libm::pow(r, n)) / n
    }

    /// Barycenter: (1/((n+1)|E|)) Int x (1+u)^{n+1} dH^{n-1}.
    pub fn quad_barycenter(&self, volume: f64) -> Vector {
        let n = self.grid.dim();
        let mut out = Vector::zeros(n);
        for k in 0..n {
            let val = self.surface_integral(&|r: f64, node: &Vector| {
                node.coord(k) * libm::pow(r, (n + 1) as f64)
            });
            out.set(k, val / ((n as f64 + 1.0) * volume));
        }
        out
    }

    /// Integral over the sphere of f(1 + u(x), x), resolving the
    /// interpolant: n=2 per-segment 8-point Gauss; n=3 per-cell products
    /// (polar caps carry the end-ring value).
    pub(crate) fn surface_integral(&self, f: &dyn Fn(f64, &Vector) -> f64) -> f64 {
        let (gx, gw) = gauss_legendre(8);
        let mut acc = crate::math::Kahan::new();
        match self.grid.dim() {
            2 => {
                let count = self.grid.res.0;
                let step = core::f64::consts::TAU / count as f64;
                for i in 0..count {
                    let a0 = step * i as f64;
                    let u0 = self.u[i];
                    let u1 = self.u[(i + 1) % count];
                    for (x, w) in gx.iter().zip(&gw) {
                        let frac = 0.5 * (x + 1.0);
                        let ang = a0 + frac * step;
                        let uu = u0 * (1.0 - frac) + u1 * frac;
                        let node = Vector::new(&[libm::cos(ang), libm::sin(ang)]);
                        acc.add(w * 0.5 * step * f(1.0 + uu, &node));
                    }
                }
            }
            3 => {
                let (np, na) = self.grid.res;
                let pc = self.grid.polar_cos.clone();
                let step = core::f64::consts::TAU / na as f64;
                let mut cell = |c_lo: f64, c_hi: f64, ring_lo: usize, ring_hi: usize| {
                    for j in 0..na {
                        let j1 = (j + 1) % na;
                        let corners = [
                            self.u[ring_lo * na + j],
                            self.u[ring_lo * na + j1],
                            self.u[ring_hi * na + j],
                            self.u[ring_hi * na + j1],
                        ];
                        for (xc, wc) in gx.iter().zip(&gw) {
                            let fc = 0.5 * (xc + 1.0);
                            let c = c_lo + fc * (c_hi - c_lo);
                            let st = libm::sqrt((1.0 - c * c).max(0.0));
                            for (xa, wa) in gx.iter().zip(&gw) {
                                let fa = 0.5 * (xa + 1.0);
                                let ang = step * (j as f64 + fa);
                                let uu = (corners[0] * (1.0 - fa) + corners[1] * fa)
                                    * (1.0 - fc)
                                    + (corners[2] * (1.0 - fa) + corners[3] * fa) * fc;
                                let node =
                                    Vector::new(&[st * libm::cos(ang), st * libm::sin(ang), c]);
                                acc.add(
                                    wc * wa * 0.25 * (c_hi - c_lo) * step * f(1.0 + uu, &node),
                                );
                            }
                        }
                    }
                };
                cell(-1.0, pc[0], 0, 0);
                for r in 0..np - 1 {
                    cell(pc[r], pc[r + 1], r, r + 1);
                }
                cell(pc[np - 1], 1.0, np - 1, np - 1);
            }
            _ => unreachable!(),
        }
        acc.value()
    }

    /// Exact symmetric-difference asymmetry against the unit ball:
    /// lambda0 = (1/(n w_n)) Int |(1+u)^n - 1| dH^{n-1}; normalized sets only.
    pub fn lambda0_exact(&self) -> Result<f64> {
        if !self.normalized {
            return Err(Error::Precondition("lambda0 needs a normalized set".into()));
        }
        let n = self.grid.dim() as f64;
        let v = self.surface_integral(&|r: f64, _| (libm::pow(r, n) - 1.0).abs());
        Ok(v / (n * unit_ball_volume(self.grid.dim())))
    }

    /// L1 and squared-L2 norms of u over the sphere plus the W^{1,infty}
    /// proxy.
    pub fn norms(&self) -> NsNorms {
        let l1 = self.surface_integral(&|r: f64, _| (r - 1.0).abs());
        let l2_sq = self.surface_integral(&|r: f64, _| (r - 1.0) * (r - 1.0));
        NsNorms { l1, l2_sq, w1inf: self.w1inf() }
    }

    /// Replace the radial profile in place (test scaffolding: bypasses
    /// normalization so pure profiles can be compared exactly).
    #[cfg(test)]
    pub(crate) fn set_u_for_tests(&mut self, u: &[f64]) {
        assert_eq!(u.len(), self.u.len());
        self.u = u.to_vec();
        self.lip_estimate = self.discrete_lipschitz();
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NsNorms {
    pub l1: f64,
    pub l2_sq: f64,
    pub w1inf: f64,
}

// ----- ray crossings by Lipschitz-certified scanning -----

impl NearlySphericalSet {
    /// All roots of g(r) = |x + r d| - (1 + u)(angle(x + r d)) for r > 0.
    /// Roots only occur where |x + r d| >= 1 - sup|u| > 0.45, so
    /// |g'| <= 1 + Lip/0.45 there; cells whose endpoint values exceed that
    /// slope times the cell length are certified root-free.
    fn scan_crossings(&self, x: &Vector, dir: &Vector, out: &mut CrossingBuf) {
        out.clear();
        let rmax = x.norm() + 1.0 + SUP_U_BOUND + 0.1;
        let lip_g = 1.0 + self.lip_estimate.max(0.2) / 0.45;
        let g = |r: f64| -> f64 {
            let p = x.add_scaled(dir, r);
            let norm = p.norm();
            if norm < 1e-14 {
                return norm - (1.0 - self.sup_u());
            }
            norm - self.radius(&p.scale(1.0 / norm))
        };
        let h0 = 0.04;
        let mut r0 = 0.0;
        let mut g0 = g(r0);
        while r0 < rmax {
            let r1 = (r0 + h0).min(rmax);
            let g1 = g(r1);
            self.scan_cell(&g, r0, g0, r1, g1, lip_g, out);
            r0 = r1;
            g0 = g1;
        }
    }

    /// Certify or split [r0, r1]; bisect to 1e-13 on sign changes.
    #[allow(clippy::too_many_arguments)]
    fn scan_cell(
        &self,
        g: &dyn Fn(f64) -> f64,
        r0: f64,
        g0: f64,
        r1: f64,
        g1: f64,
        lip_g: f64,
        out: &mut CrossingBuf,
    ) {
        let h = r1 - r0;
        if (g0 <= 0.0) != (g1 <= 0.0) {
            let (mut lo, mut hi) = (r0, r1);
            let lo_inside = g0 <= 0.0;
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if (g(mid) <= 0.0) == lo_inside {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
            return;
        }
        if g0.abs().min(g1.abs()) > lip_g * h || h < 1e-6 {
            return;
        }
        let rm = 0.5 * (r0 + r1);
        let gm = g(rm);
        self.scan_cell(g, r0, g0, rm, gm, lip_g, out);
        self.scan_cell(g, rm, gm, r1, g1, lip_g, out);
    }
}

impl EvaluableSet for NearlySphericalSet {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn volume(&self) -> f64 {
        if self.volume > 0.0 {
            self.volume
        } else {
            self.quad_volume()
        }
    }

    fn membership(&self, x: &Vector) -> bool {
        let r = x.norm();
        if r < 1e-14 {
            return true;
        }
        r <= self.radius(&x.scale(1.0 / r))
    }

    fn ray_crossings(&self, x: &Vector, dir: &Vector, out: &mut CrossingBuf) {
        self.scan_crossings(x, dir, out);
    }

    fn center_hint(&self) -> Vector {
        Vector::zeros(self.grid.dim())
    }

    fn bounding_radius(&self) -> f64 {
        1.0 + self.sup_u()
    }

    fn bounding_box(&self) -> (Vector, Vector) {
        let n = self.grid.dim();
        let r = self.bounding_radius();
        let mut lo = Vector::zeros(n);
        let mut hi = Vector::zeros(n);
        for i in 0..n {
            lo.set(i, -r);
            hi.set(i, r);
        }
        (lo, hi)
    }

    fn star_anchor(&self) -> Option<Vector> {
        Some(Vector::zeros(self.grid.dim()))
    }

    fn radial_exit(&self, dir: &Vector) -> f64 {
        self.radius(dir)
    }

    fn inradius_proxy(&self) -> f64 {
        1.0 - self.sup_u()
    }
}

#[inline]
fn wrap_positive(v: f64, modulus: f64) -> f64 {
    let r = v % modulus;
    if r < 0.0 {
        r + modulus
    } else {
        r
    }
}

/// Per-node u from cosine harmonics (frequency, amplitude, phase), n = 2.
pub fn harmonic_u(grid: &SphereGrid, modes: &[(u32, f64)], phases: &[f64]) -> Result<Vec<f64>> {
    if grid.dim() != 2 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let count = grid.len();
    let mut u = alloc::vec![0.0; count];
    for (i, uu) in u.iter_mut().enumerate() {
        let ang = core::f64::consts::TAU * i as f64 / count as f64;
        for (m, &(k, a)) in modes.iter().enumerate() {
            let ph = phases.get(m).copied().unwrap_or(0.0);
            *uu += a * libm::cos(k as f64 * ang + ph);
        }
    }
    Ok(u)
}

/// Total sphere measure carried by a grid.
pub fn grid_total_weight(grid: &SphereGrid) -> f64 {
    grid.weights().iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid2(n: usize) -> SphereGrid {
        build_grid(2, GridResolution::Angular(n)).unwrap()
    }

    #[test]
    fn grid_weights_sum_to_sphere_area() {
        let g = grid2(8);
        assert!((grid_total_weight(&g) - core::f64::consts::TAU).abs() < 1e-10);
        assert!(g
            .weights()
            .iter()
            .all(|&w| (w - core::f64::consts::TAU / 8.0).abs() < 1e-12));
        let g3 = build_grid(3, GridResolution::Product { polar: 16, azimuth: 32 }).unwrap();
        let want = 4.0 * core::f64::consts::PI;
        assert!((grid_total_weight(&g3) - want).abs() < 1e-10);
    }

    #[test]
    fn grid_integrates_coordinates_to_zero() {
        for g in [
            grid2(64),
            build_grid(3, GridResolution::Product { polar: 16, azimuth: 32 }).unwrap(),
        ] {
            for k in 0..g.dim() {
                let s: f64 = g
                    .nodes()
                    .iter()
                    .zip(g.weights())
                    .map(|(x, w)| w * x.coord(k))
                    .sum();
                assert!(s.abs() < 1e-10, "coordinate {k}: {s}");
            }
        }
    }

    #[test]
    fn zero_u_normalizes_to_unit_ball() {
        let g = grid2(128);
        let set = NearlySphericalSet::from_radial_samples(g, &vec![0.0; 128]).unwrap();
        assert!(set.is_normalized());
        assert!(set.sup_u() < 1e-12);
        assert!((EvaluableSet::volume(&set) - core::f64::consts::PI).abs() < 1e-10);
        assert!(set.lambda0_exact().unwrap() < 1e-12);
    }

    #[test]
    fn constant_u_is_absorbed_by_volume_rescale() {
        let g = grid2(128);
        let set = NearlySphericalSet::from_radial_samples(g, &vec![0.1; 128]).unwrap();
        assert!(set.sup_u() < 1e-10, "sup|u| = {}", set.sup_u());
    }

    #[test]
    fn cosine_mode_is_recentred() {
        // u = 0.05 cos(theta) is a translation to first order; recentring
        // must shrink it and land the barycenter at the origin
        let g = grid2(256);
        let raw = harmonic_u(&g, &[(1, 0.05)], &[0.0]).unwrap();
        let l2_before: f64 = raw.iter().map(|v| v * v).sum();
        let set = NearlySphericalSet::from_radial_samples(g, &raw).unwrap();
        let vol = set.quad_volume();
        let bar = set.quad_barycenter(vol);
        assert!(bar.norm() < 1e-8, "barycenter {}", bar.norm());
        let l2_after: f64 = set.u().iter().map(|v| v * v).sum();
        assert!(
            l2_after < 0.1 * l2_before,
            "translation mode not removed: {l2_after} vs {l2_before}"
        );
    }

    #[test]
    fn norms_on_simple_profiles() {
        let g = grid2(256);
        let set = NearlySphericalSet::from_radial_samples(g.clone(), &vec![0.0; 256]).unwrap();
        let n = set.norms();
        assert!(n.l1 < 1e-12 && n.l2_sq < 1e-12 && n.w1inf < 1e-12);

        // Cauchy-Schwarz: l1^2 <= (n w_n) l2_sq for any u
        let raw = harmonic_u(&g, &[(2, 0.08), (3, 0.03)], &[0.3, 1.1]).unwrap();
        let set = NearlySphericalSet::from_radial_samples(g, &raw).unwrap();
        let n = set.norms();
        assert!(n.l1 * n.l1 <= core::f64::consts::TAU * n.l2_sq * (1.0 + 1e-9));
    }

    #[test]
    fn lambda0_upper_bound_in_terms_of_l1() {
        // lambda0 <= ((1+a)^n - 1)/(w_n a) * ||u||_L1 with a = sup|u|
        let g = grid2(256);
        let raw = harmonic_u(&g, &[(2, 0.07)], &[0.0]).unwrap();
        let set = NearlySphericalSet::from_radial_samples(g, &raw).unwrap();
        let l = set.lambda0_exact().unwrap();
        let a = set.sup_u();
        let bound = ((1.0 + a) * (1.0 + a) - 1.0) / (core::f64::consts::PI * a) * set.norms().l1;
        assert!(l <= bound * (1.0 + 1e-9), "{l} vs bound {bound}");
    }

    #[test]
    fn membership_and_crossings_agree() {
        let g = grid2(256);
        let raw = harmonic_u(&g, &[(2, 0.08), (5, 0.02)], &[0.0, 0.7]).unwrap();
        let set = NearlySphericalSet::from_radial_samples(g, &raw).unwrap();
        let mut rng = crate::sampling::chunk_rng(3, 17, 0, 0);
        let mut buf = CrossingBuf::new();
        for _ in 0..300 {
            let dir = crate::sampling::sphere_dir(&mut rng, 2);
            let t = libm::sqrt(crate::sampling::uniform01(&mut rng)) * 0.9;
            let x = dir.scale(t * set.radius(&dir));
            let theta = crate::sampling::sphere_dir(&mut rng, 2);
            set.ray_crossings(&x, &theta, &mut buf);
            assert!(buf.len() % 2 == 1, "interior point must see odd crossings");
            let c = buf[0];
            assert!(set.membership(&x.add_scaled(&theta, c - 1e-9)));
            assert!(!set.membership(&x.add_scaled(&theta, c + 1e-9)));
        }
    }

    #[test]
    fn ns_volume_formula_matches_mc_membership() {
        let g = grid2(256);
        let raw = harmonic_u(&g, &[(3, 0.1)], &[0.2]).unwrap();
        let set = NearlySphericalSet::from_radial_samples(g, &raw).unwrap();
        let vol = EvaluableSet::volume(&set);
        let (lo, hi) = set.bounding_box();
        let mut rng = crate::sampling::chunk_rng(9, 23, 0, 0);
        let n = 200_000;
        let mut hits = 0u64;
        for _ in 0..n {
            let x = crate::sampling::box_point(&mut rng, &lo, &hi);
            if set.membership(&x) {
                hits += 1;
            }
        }
        let box_vol = (hi.coord(0) - lo.coord(0)) * (hi.coord(1) - lo.coord(1));
        let p = hits as f64 / n as f64;
        let mc = p * box_vol;
        let sigma = box_vol * libm::sqrt(p * (1.0 - p) / n as f64);
        assert!((mc - vol).abs() < 4.0 * sigma, "{mc} vs {vol} (sigma {sigma})");
    }

    #[test]
    fn rejects_oversized_u() {
        let g = grid2(64);
        assert!(NearlySphericalSet::from_radial_samples(g, &vec![0.6; 64]).is_err());
    }

    #[test]
    fn n3_round_sphere_volume() {
        let g = build_grid(3, GridResolution::Product { polar: 16, azimuth: 32 }).unwrap();
        let set = NearlySphericalSet::from_radial_samples(g, &vec![0.0; 16 * 32]).unwrap();
        let want = 4.0 * core::f64::consts::PI / 3.0;
        assert!((EvaluableSet::volume(&set) - want).abs() < 1e-9);
    }
}
