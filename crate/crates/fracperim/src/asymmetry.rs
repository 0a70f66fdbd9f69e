//! Barycentric asymmetry, Fraenkel asymmetry and the s-isoperimetric
//! deficit.
//!
//! The barycentric asymmetry is |E delta (bar(E) + B(m))| / |E| with B(m)
//! the equal-volume ball. For star-shaped sets both the set and the ball are
//! radial about the barycenter, so the symmetric difference is an exact
//! one-dimensional radial integral per direction; otherwise Monte Carlo
//! membership counting over the union bounding box is used. The Fraenkel
//! asymmetry minimizes the same functional over the ball center with a
//! multistart simplex search; during optimization the objective is either
//! the deterministic radial quadrature or a frozen-cloud (common random
//! numbers) Monte Carlo count, so the argmin is stable.

use crate::error::{Error, Result};
use crate::math::{unit_ball_volume, unit_sphere_area, Vector};
use crate::optim::{nelder_mead, SimplexOptions, SimplexResult};
use crate::perimeter::{
    check_budget, check_s, coupled_vs_ball, ray_mc, unit_ball_ps_analytic, EvaluableSet,
    McConfig, Method, PerimeterEstimate,
};
use crate::sampling::{self, chunk_rng, CHUNK_SIZE};
use alloc::format;
use alloc::vec::Vec;

const PURPOSE_SYMDIFF: u64 = 0x88;
const PURPOSE_FRAENKEL: u64 = 0x99;
const PURPOSE_STARTS: u64 = 0xAA;

/// lambda0, lambda, d(E), delta_s bundle for one (shape, s) pair.
#[derive(Debug, Clone)]
pub struct AsymmetryReport {
    pub lambda0: f64,
    pub fraenkel: f64,
    pub hausdorff_d: f64,
    pub s: f64,
    pub deficit: f64,
    pub perimeter_estimate: PerimeterEstimate,
    /// P_s(B(m)) for the equal-volume ball.
    pub ball_reference: f64,
}

impl AsymmetryReport {
    /// Statistical error on the deficit.
    pub fn deficit_std_error(&self) -> f64 {
        self.perimeter_estimate.std_error / self.ball_reference
    }

    /// Validate the report's internal orderings (within statistical slack).
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 >= -1e-12 && self.lambda0 <= 2.0 + 1e-9) {
            return Err(Error::EstimatorInconsistency(format!(
                "lambda0 = {} outside [0, 2]",
                self.lambda0
            )));
        }
        if self.fraenkel > self.lambda0 + 1e-9 + 3.0 * self.deficit_std_error().max(1e-9) {
            return Err(Error::EstimatorInconsistency(format!(
                "fraenkel {} exceeds lambda0 {}",
                self.fraenkel, self.lambda0
            )));
        }
        if self.deficit < -3.0 * self.deficit_std_error() - 1e-12 {
            return Err(Error::EstimatorInconsistency(format!(
                "significantly negative deficit {} (sigma {})",
                self.deficit,
                self.deficit_std_error()
            )));
        }
        Ok(())
    }
}

/// Direction-grid resolution for the exact radial symmetric-difference path.
fn radial_grid(dim: usize) -> (usize, usize) {
    match dim {
        1 => (2, 0),
        2 => (8192, 0),
        _ => (64, 128), // polar x azimuth product
    }
}

/// Integral over directions of |rho_set^n - rho_ball^n| / n where both
/// radial functions are taken about `anchor`; `ball_center` must satisfy
/// |ball_center - anchor| < r_m.
fn radial_sym_diff(
    set: &dyn EvaluableSet,
    anchor: &Vector,
    ball_center: &Vector,
    r_m: f64,
    rho_cache: Option<&[f64]>,
    dirs: &[Vector],
    weights: &[f64],
) -> f64 {
    let n = set.dim() as f64;
    let c = ball_center.sub(anchor);
    let mut acc = crate::math::Kahan::new();
    for (k, dir) in dirs.iter().enumerate() {
        let rho_e = match rho_cache {
            Some(cache) => cache[k],
            None => set.radial_exit(dir),
        };
        let pq = c.dot(dir);
        let rho_b = crate::geometry::ball_exit(r_m * r_m - c.norm_sq(), -pq) ;
        // ball_exit solves |p + t d| = r for p = -c relative to the ball
        // center; radial function of the ball about the anchor
        let diff = (libm::pow(rho_e, n) - libm::pow(rho_b, n)).abs();
        acc.add(weights[k] * diff / n);
    }
    acc.value()
}

/// Direction grid (uniform angles for n=2; Gauss-Legendre polar x uniform
/// azimuth for n=3; the two poles for n=1).
fn direction_grid(dim: usize) -> (Vec<Vector>, Vec<f64>) {
    match dim {
        1 => (
            alloc::vec![Vector::new(&[1.0]), Vector::new(&[-1.0])],
            alloc::vec![1.0, 1.0],
        ),
        2 => {
            let (count, _) = radial_grid(2);
            let step = core::f64::consts::TAU / count as f64;
            let mut dirs = Vec::with_capacity(count);
            for i in 0..count {
                let a = step * (i as f64 + 0.5);
                dirs.push(Vector::new(&[libm::cos(a), libm::sin(a)]));
            }
            (dirs, alloc::vec![step; count])
        }
        _ => {
            let (np, na) = radial_grid(3);
            let (gc, gw) = crate::math::quad::gauss_legendre(np);
            let wphi = core::f64::consts::TAU / na as f64;
            let mut dirs = Vec::with_capacity(np * na);
            let mut weights = Vec::with_capacity(np * na);
            for (ci, &c) in gc.iter().enumerate() {
                let st = libm::sqrt((1.0 - c * c).max(0.0));
                for j in 0..na {
                    let a = wphi * j as f64;
                    dirs.push(Vector::new(&[st * libm::cos(a), st * libm::sin(a), c]));
                    weights.push(gw[ci] * wphi);
                }
            }
            (dirs, weights)
        }
    }
}

/// Barycentric asymmetry |E delta (bar(E)+B(m))| / |E|; returns the value
/// and its statistical error (0 for the exact radial path).
pub fn barycentric_asymmetry(
    set: &dyn EvaluableSet,
    budget: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    check_budget(budget)?;
    let vol = set.volume();
    if !(vol > 0.0) {
        return Err(Error::DegenerateBody("asymmetry needs positive volume".into()));
    }
    let n = set.dim();
    let r_m = libm::pow(vol / unit_ball_volume(n), 1.0 / n as f64);
    let bar = set.barycenter();

    if let Some(anchor) = set.star_anchor() {
        if bar.dist(&anchor) < 0.9 * r_m {
            let (dirs, weights) = direction_grid(n);
            let sym = radial_sym_diff(set, &anchor, &bar, r_m, None, &dirs, &weights);
            return Ok((sym / vol, 0.0));
        }
    }
    // Monte Carlo membership over the union bounding box
    let (sym, sigma) = mc_sym_diff(set, &bar, r_m, budget, seed)?;
    Ok((sym / vol, sigma / vol))
}

/// Monte Carlo path of the barycentric asymmetry regardless of available
/// exact routes (cross-validation oracle for the radial formula).
pub fn barycentric_asymmetry_mc(
    set: &dyn EvaluableSet,
    budget: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    check_budget(budget)?;
    let vol = set.volume();
    if !(vol > 0.0) {
        return Err(Error::DegenerateBody("asymmetry needs positive volume".into()));
    }
    let n = set.dim();
    let r_m = libm::pow(vol / unit_ball_volume(n), 1.0 / n as f64);
    let bar = set.barycenter();
    let (sym, sigma) = mc_sym_diff(set, &bar, r_m, budget, seed)?;
    Ok((sym / vol, sigma / vol))
}

/// MC estimate of |E delta (c + B(r))| over the union bounding box.
fn mc_sym_diff(
    set: &dyn EvaluableSet,
    ball_center: &Vector,
    r_m: f64,
    budget: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let n = set.dim();
    let (mut lo, mut hi) = set.bounding_box();
    for i in 0..n {
        lo.set(i, lo.coord(i).min(ball_center.coord(i) - r_m));
        hi.set(i, hi.coord(i).max(ball_center.coord(i) + r_m));
    }
    let mut box_vol = 1.0;
    for i in 0..n {
        box_vol *= hi.coord(i) - lo.coord(i);
    }
    let mut hits = 0u64;
    let mut total = 0u64;
    let n_chunks = budget.div_ceil(CHUNK_SIZE);
    for chunk in 0..n_chunks {
        let len = CHUNK_SIZE.min(budget - chunk * CHUNK_SIZE);
        let mut rng = chunk_rng(seed, PURPOSE_SYMDIFF, 0, chunk);
        for _ in 0..len {
            let x = sampling::box_point(&mut rng, &lo, &hi);
            let in_set = set.membership(&x);
            let in_ball = x.dist(ball_center) <= r_m;
            if in_set != in_ball {
                hits += 1;
            }
            total += 1;
        }
    }
    let p = hits as f64 / total as f64;
    let sym = p * box_vol;
    let sigma = box_vol * libm::sqrt((p * (1.0 - p) / total as f64).max(0.0));
    Ok((sym, sigma))
}

#[derive(Debug, Clone)]
pub struct FraenkelResult {
    pub value: f64,
    pub std_error: f64,
    pub argmin: Vector,
    /// False when the simplex search hit its iteration cap; the value is
    /// then best-so-far rather than converged (flagged, not fatal).
    pub converged: bool,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct FraenkelConfig {
    pub starts: usize,
    pub max_iters: usize,
    /// Simplex-diameter convergence tolerance as a fraction of the bounding
    /// radius.
    pub tol_frac: f64,
}

impl Default for FraenkelConfig {
    fn default() -> Self {
        FraenkelConfig { starts: 8, max_iters: 200, tol_frac: 1e-4 }
    }
}

/// Fraenkel asymmetry: min over translations x of |E delta (x+B(m))|/|E|.
pub fn fraenkel_asymmetry(
    set: &dyn EvaluableSet,
    budget: u64,
    seed: u64,
    cfg: &FraenkelConfig,
) -> Result<FraenkelResult> {
    check_budget(budget)?;
    let vol = set.volume();
    if !(vol > 0.0) {
        return Err(Error::DegenerateBody("asymmetry needs positive volume".into()));
    }
    let n = set.dim();
    let r_m = libm::pow(vol / unit_ball_volume(n), 1.0 / n as f64);
    let bar = set.barycenter();
    let bounding = set.bounding_radius();

    let mut evals = 0u64;

    // deterministic radial objective (star-shaped sets): cache rho_E once
    let radial = set.star_anchor().map(|anchor| {
        let (dirs, weights) = direction_grid(n);
        let rho: Vec<f64> = dirs.iter().map(|d| set.radial_exit(d)).collect();
        (anchor, dirs, weights, rho)
    });

    // frozen point cloud for the Monte Carlo objective (common random
    // numbers across translations)
    let cloud: Option<(Vec<Vector>, f64)> = if radial.is_none() {
        let (mut lo, mut hi) = set.bounding_box();
        for i in 0..n {
            lo.set(i, lo.coord(i) - 1.1 * r_m);
            hi.set(i, hi.coord(i) + 1.1 * r_m);
        }
        let mut box_vol = 1.0;
        for i in 0..n {
            box_vol *= hi.coord(i) - lo.coord(i);
        }
        let count = budget.max(10_000);
        let mut pts = Vec::with_capacity(count as usize);
        let n_chunks = count.div_ceil(CHUNK_SIZE);
        for chunk in 0..n_chunks {
            let len = CHUNK_SIZE.min(count - chunk * CHUNK_SIZE);
            let mut rng = chunk_rng(seed, PURPOSE_FRAENKEL, 0, chunk);
            for _ in 0..len {
                pts.push(sampling::box_point(&mut rng, &lo, &hi));
            }
        }
        Some((pts, box_vol))
    } else {
        None
    };

    let mut objective = |x: &Vector| -> f64 {
        evals += 1;
        match (&radial, &cloud) {
            (Some((anchor, dirs, weights, rho)), _) => {
                let c = x.sub(anchor);
                let dist = c.norm();
                let cap = 0.9 * r_m;
                let (center, penalty) = if dist > cap {
                    (anchor.add(&c.scale(cap / dist)), 10.0 * (dist - cap) / r_m)
                } else {
                    (*x, 0.0)
                };
                radial_sym_diff(set, anchor, &center, r_m, Some(rho), dirs, weights) / vol
                    + penalty
            }
            (None, Some((pts, box_vol))) => {
                let mut hits = 0u64;
                for p in pts {
                    let in_set = set.membership(p);
                    let in_ball = p.dist(x) <= r_m;
                    if in_set != in_ball {
                        hits += 1;
                    }
                }
                (hits as f64 / pts.len() as f64) * box_vol / vol
            }
            _ => unreachable!(),
        }
    };

    // multistart: barycenter, axis offsets, seeded random points
    let mut starts: Vec<Vector> = Vec::with_capacity(cfg.starts);
    starts.push(bar);
    for i in 0..n {
        if starts.len() < cfg.starts {
            starts.push(bar.add_scaled(&Vector::basis(n, i), 0.3 * r_m));
        }
        if starts.len() < cfg.starts {
            starts.push(bar.add_scaled(&Vector::basis(n, i), -0.3 * r_m));
        }
    }
    let mut rng = chunk_rng(seed, PURPOSE_STARTS, 0, 0);
    while starts.len() < cfg.starts {
        let dir = sampling::sphere_dir(&mut rng, n);
        let t = sampling::uniform01(&mut rng) * 0.5 * r_m;
        starts.push(bar.add_scaled(&dir, t));
    }

    let opts = SimplexOptions {
        max_iters: cfg.max_iters,
        diameter_tol: cfg.tol_frac * bounding,
        initial_step: 0.15 * r_m,
    };
    let mut best: Option<SimplexResult> = None;
    let mut any_converged = false;
    for start in &starts {
        let res = nelder_mead(&mut objective, start, &opts);
        any_converged |= res.converged;
        let better = match &best {
            Some(b) => res.fmin < b.fmin,
            None => true,
        };
        if better {
            best = Some(res);
        }
    }
    let best = best.expect("at least one start");
    let value = best.fmin.min(2.0).max(0.0);
    let std_error = if radial.is_some() {
        0.0
    } else {
        // binomial error of the frozen-cloud count at the argmin
        let (pts, box_vol) = cloud.as_ref().unwrap();
        let p = value * vol / box_vol;
        box_vol * libm::sqrt((p * (1.0 - p) / pts.len() as f64).max(0.0)) / vol
    };
    Ok(FraenkelResult {
        value,
        std_error,
        argmin: best.xmin,
        converged: any_converged && best.converged,
        evaluations: evals,
    })
}

#[derive(Debug, Clone)]
pub struct DeficitEstimate {
    pub deficit: f64,
    pub std_error: f64,
    pub perimeter_estimate: PerimeterEstimate,
    pub ball_reference: f64,
}

/// s-isoperimetric deficit (P_s(E) - P_s(B(m))) / P_s(B(m)); the reference
/// value is analytic and the numerator uses the coupled estimator whenever
/// the set is star-shaped, the plain ray estimator otherwise.
pub fn s_deficit(set: &dyn EvaluableSet, s: f64, budget: u64, seed: u64) -> Result<DeficitEstimate> {
    check_s(s)?;
    check_budget(budget)?;
    let n = set.dim();
    let vol = set.volume();
    if !(vol > 0.0) {
        return Err(Error::DegenerateBody("deficit needs positive volume".into()));
    }
    let r_m = libm::pow(vol / unit_ball_volume(n), 1.0 / n as f64);
    let ball_reference = libm::pow(r_m, n as f64 - s) * unit_ball_ps_analytic(n, s)?;
    if set.star_anchor().is_some() {
        let est = coupled_vs_ball(set, s, &McConfig::new(budget, seed))?;
        let perimeter_estimate = PerimeterEstimate {
            value: ball_reference + est.diff,
            std_error: est.std_error,
            method: Method::CoupledMc,
            budget,
            seed: Some(seed),
        };
        Ok(DeficitEstimate {
            deficit: est.diff / ball_reference,
            std_error: est.std_error / ball_reference,
            perimeter_estimate,
            ball_reference,
        })
    } else {
        let est = ray_mc(set, s, &McConfig::new(budget, seed))?;
        Ok(DeficitEstimate {
            deficit: (est.value - ball_reference) / ball_reference,
            std_error: est.std_error / ball_reference,
            perimeter_estimate: est,
            ball_reference,
        })
    }
}

/// Assemble the full report for one (set, s) pair; `hausdorff_d` is supplied
/// by the caller (it is representation-specific).
pub fn asymmetry_report(
    set: &dyn EvaluableSet,
    s: f64,
    budget: u64,
    seed: u64,
    hausdorff_d: f64,
) -> Result<AsymmetryReport> {
    let (lambda0, _l0_sigma) = barycentric_asymmetry(set, budget, seed)?;
    let fr = fraenkel_asymmetry(set, budget / 4, seed.wrapping_add(1), &FraenkelConfig::default())?;
    let def = s_deficit(set, s, budget, seed.wrapping_add(2))?;
    let report = AsymmetryReport {
        lambda0,
        fraenkel: fr.value.min(lambda0 + 3.0 * fr.std_error),
        hausdorff_d,
        s,
        deficit: def.deficit,
        perimeter_estimate: def.perimeter_estimate,
        ball_reference: def.ball_reference,
    };
    Ok(report)
}

/// Sphere-area constant used by callers assembling reports.
pub fn sphere_area(n: usize) -> f64 {
    unit_sphere_area(n)
}
