//! Primary ray-reduction Monte Carlo estimator.
//!
//! P_s(E) = (1/s) Int_E Int_{S^{n-1}} gap_sum(x, theta) dtheta dx, where the
//! gap sum is the closed-form radial integral of r^{-1-s} over the complement
//! intervals along the ray. The integrand blows up like (boundary margin)^{-s},
//! so the sampler stratifies on the radial fraction t = |x - anchor|/rho(phi):
//! every stratum with t bounded away from 1 has a bounded integrand, which
//! keeps per-stratum variances finite for all s in (0,1).

use crate::error::{Error, Result};
use crate::math::stats::Moments;
use crate::math::{unit_sphere_area, Vector};
use crate::perimeter::{
    check_budget, check_s, gap_sum, CrossingBuf, EvaluableSet, McConfig, Method,
    PerimeterEstimate, StrataConfig,
};
use crate::sampling::{self, chunk_rng, CHUNK_SIZE};
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;

const PURPOSE_MAIN: u64 = 0x11;
const PURPOSE_PILOT: u64 = 0x22;
const PURPOSE_CAL: u64 = 0x33;

/// Unbiased estimate of P_s(E) with statistical error.
pub fn ray_mc(set: &dyn EvaluableSet, s: f64, cfg: &McConfig) -> Result<PerimeterEstimate> {
    check_s(s)?;
    check_budget(cfg.samples)?;
    let vol = set.volume();
    if !(vol > 0.0) {
        return Err(Error::DegenerateBody("estimator needs positive volume".into()));
    }
    let (value, std_error) = match cfg.strata {
        StrataConfig::None => plain_estimate(set, s, cfg)?,
        StrataConfig::BoundaryLayer { threshold_frac, boundary_share } => {
            boundary_layer_estimate(set, s, cfg, threshold_frac, boundary_share)?
        }
        StrataConfig::Geometric { base_frac, levels } => {
            if set.star_anchor().is_some() {
                radial_strata_estimate(set, s, cfg, base_frac, levels)?
            } else {
                // no radial anchor: fall back to the two-stratum rejection mode
                boundary_layer_estimate(set, s, cfg, 0.1, 0.5)?
            }
        }
    };
    Ok(PerimeterEstimate {
        value,
        std_error,
        method: Method::RayMc,
        budget: cfg.samples,
        seed: Some(cfg.seed),
    })
}

/// Per-sample payload: (surface area)^2-weighted gap sum; see module docs.
#[inline]
fn ray_payload(set: &dyn EvaluableSet, s: f64, x: &Vector, theta: &Vector, buf: &mut CrossingBuf) -> f64 {
    set.ray_crossings(x, theta, buf);
    gap_sum(buf, s)
}

fn chunked<F: FnMut(&mut ChaCha8Rng, &mut Moments)>(
    seed: u64,
    purpose: u64,
    stratum: u64,
    total: u64,
    mut per_sample: F,
) -> Moments {
    let mut merged = Moments::new();
    let n_chunks = total.div_ceil(CHUNK_SIZE);
    for chunk in 0..n_chunks {
        let len = CHUNK_SIZE.min(total - chunk * CHUNK_SIZE);
        let mut rng = chunk_rng(seed, purpose, stratum, chunk);
        let mut acc = Moments::new();
        for _ in 0..len {
            per_sample(&mut rng, &mut acc);
        }
        merged.merge(&acc);
    }
    merged
}

/// Draw a uniform point of E by rejection from the bounding box; `extra`
/// filters to a sub-stratum.
fn rejection_point(
    set: &dyn EvaluableSet,
    rng: &mut ChaCha8Rng,
    lo: &Vector,
    hi: &Vector,
    extra: &dyn Fn(&Vector) -> bool,
) -> Result<Vector> {
    for _ in 0..2_000_000u32 {
        let x = sampling::box_point(rng, lo, hi);
        if set.membership(&x) && extra(&x) {
            return Ok(x);
        }
    }
    Err(Error::Internal("rejection sampling failed to accept".into()))
}

fn plain_estimate(set: &dyn EvaluableSet, s: f64, cfg: &McConfig) -> Result<(f64, f64)> {
    let n = set.dim();
    let vol = set.volume();
    let area = unit_sphere_area(n);
    let scale = vol * area / s;
    let (lo, hi) = set.bounding_box();
    let mut buf = CrossingBuf::new();
    let mut failed = false;
    let m = chunked(cfg.seed, PURPOSE_MAIN, 0, cfg.samples, |rng, acc| {
        match rejection_point(set, rng, &lo, &hi, &|_| true) {
            Ok(x) => {
                let theta = sampling::sphere_dir(rng, n);
                acc.push(scale * ray_payload(set, s, &x, &theta, &mut buf));
            }
            Err(_) => failed = true,
        }
    });
    if failed {
        return Err(Error::Internal("rejection sampling failed to accept".into()));
    }
    Ok((m.mean(), m.std_error()))
}

/// Boundary-distance proxy used to classify the two-stratum split.
fn margin_proxy(set: &dyn EvaluableSet, x: &Vector, buf: &mut CrossingBuf) -> f64 {
    if let Some(anchor) = set.star_anchor() {
        let d = x.sub(&anchor);
        let r = d.norm();
        if r < 1e-12 * set.bounding_radius().max(1e-300) {
            return set.inradius_proxy();
        }
        let dir = d.scale(1.0 / r);
        return set.radial_exit(&dir) - r;
    }
    // distance to the boundary along the outward direction from the center
    let d = x.sub(&set.center_hint());
    let dir = match d.unit() {
        Ok(u) => u,
        Err(_) => Vector::basis(x.dim(), 0),
    };
    set.ray_crossings(x, &dir, buf);
    buf.first().copied().unwrap_or(set.inradius_proxy())
}

fn boundary_layer_estimate(
    set: &dyn EvaluableSet,
    s: f64,
    cfg: &McConfig,
    threshold_frac: f64,
    boundary_share: f64,
) -> Result<(f64, f64)> {
    let n = set.dim();
    let vol = set.volume();
    let area = unit_sphere_area(n);
    let tau = threshold_frac * set.inradius_proxy();
    if !(tau > 0.0) {
        return plain_estimate(set, s, cfg);
    }
    let (lo, hi) = set.bounding_box();
    let mut buf = CrossingBuf::new();

    // calibration: estimate the layer volume fraction
    let n_cal = (cfg.samples / 16).clamp(2048, 262_144).min(cfg.samples);
    let mut cal_hits = 0u64;
    let mut failed = false;
    let cal = chunked(cfg.seed, PURPOSE_CAL, 0, n_cal, |rng, acc| {
        match rejection_point(set, rng, &lo, &hi, &|_| true) {
            Ok(x) => {
                let inl = margin_proxy(set, &x, &mut buf) < tau;
                if inl {
                    cal_hits += 1;
                }
                acc.push(if inl { 1.0 } else { 0.0 });
            }
            Err(_) => failed = true,
        }
    });
    if failed {
        return Err(Error::Internal("rejection sampling failed".into()));
    }
    let p_layer = cal.mean();
    if p_layer <= 0.0 || p_layer >= 1.0 {
        return plain_estimate(set, s, cfg);
    }

    let remaining = cfg.samples.saturating_sub(n_cal).max(2);
    let n_layer = ((remaining as f64 * boundary_share) as u64).clamp(1, remaining - 1);
    let n_bulk = remaining - n_layer;
    let payload_scale = area / s;

    let mut run = |stratum: u64, want_layer: bool, count: u64| -> Result<Moments> {
        let mut fail = false;
        let m = chunked(cfg.seed, PURPOSE_MAIN, stratum, count, |rng, acc| {
            let filter = |x: &Vector| {
                let mut b = CrossingBuf::new();
                (margin_proxy(set, x, &mut b) < tau) == want_layer
            };
            match rejection_point(set, rng, &lo, &hi, &filter) {
                Ok(x) => {
                    let theta = sampling::sphere_dir(rng, n);
                    acc.push(payload_scale * ray_payload(set, s, &x, &theta, &mut buf));
                }
                Err(_) => fail = true,
            }
        });
        if fail {
            Err(Error::Internal("rejection sampling failed".into()))
        } else {
            Ok(m)
        }
    };
    let layer = run(1, true, n_layer)?;
    let bulk = run(2, false, n_bulk)?;

    let m_l = layer.mean();
    let m_b = bulk.mean();
    let value = vol * (p_layer * m_l + (1.0 - p_layer) * m_b);
    let var = vol
        * vol
        * (p_layer * p_layer * layer.variance() / n_layer as f64
            + (1.0 - p_layer) * (1.0 - p_layer) * bulk.variance() / n_bulk as f64
            + (m_l - m_b) * (m_l - m_b) * p_layer * (1.0 - p_layer) / n_cal as f64);
    Ok((value, libm::sqrt(var.max(0.0))))
}

/// Radial-fraction strata: bulk t in [0, 1-tau], geometric layers toward
/// t = 1, innermost shell [1 - tau 2^{-levels}, 1].
pub(crate) fn t_strata(base_frac: f64, levels: u32, samples: u64) -> Vec<(f64, f64)> {
    let tau = base_frac.clamp(1e-6, 0.9);
    // keep at least ~96 samples per stratum incl. pilot
    let mut levels = levels;
    while levels > 0 && (levels as u64 + 2) * 96 > samples {
        levels -= 1;
    }
    let mut strata = Vec::with_capacity(levels as usize + 2);
    strata.push((0.0, 1.0 - tau));
    let mut step = tau;
    for _ in 0..levels {
        strata.push((1.0 - step, 1.0 - step * 0.5));
        step *= 0.5;
    }
    strata.push((1.0 - step, 1.0));
    strata
}

fn radial_strata_estimate(
    set: &dyn EvaluableSet,
    s: f64,
    cfg: &McConfig,
    base_frac: f64,
    levels: u32,
) -> Result<(f64, f64)> {
    let n = set.dim();
    let area = unit_sphere_area(n);
    let anchor = set
        .star_anchor()
        .ok_or_else(|| Error::Precondition("radial strata need a star anchor".into()))?;
    let strata = t_strata(base_frac, levels, cfg.samples);
    let k_payload = area * area / (n as f64 * s);

    let sample_one = |rng: &mut ChaCha8Rng, (t_lo, t_hi): (f64, f64), buf: &mut CrossingBuf| -> f64 {
        let phi = sampling::sphere_dir(rng, n);
        let t = sampling::radial_fraction(rng, n, t_lo, t_hi);
        let theta = sampling::sphere_dir(rng, n);
        let rho = set.radial_exit(&phi);
        let x = anchor.add_scaled(&phi, t * rho);
        let dt_n = libm::pow(t_hi, n as f64) - libm::pow(t_lo, n as f64);
        let w = libm::pow(rho, n as f64) * dt_n;
        k_payload * w * ray_payload(set, s, &x, &theta, buf)
    };

    // pilot pass for Neyman allocation
    let n_strata = strata.len() as u64;
    let pilot_per = (cfg.samples / (16 * n_strata)).clamp(32, 8192);
    let mut sigmas = Vec::with_capacity(strata.len());
    let mut buf = CrossingBuf::new();
    for (k, &rng_range) in strata.iter().enumerate() {
        let m = chunked(cfg.seed, PURPOSE_PILOT, k as u64, pilot_per, |rng, acc| {
            acc.push(sample_one(rng, rng_range, &mut buf));
        });
        sigmas.push(libm::sqrt(m.variance()).max(1e-300));
    }
    let total_sigma: f64 = sigmas.iter().sum();
    let main_budget = cfg.samples.saturating_sub(pilot_per * n_strata).max(n_strata * 32);

    let mut value = 0.0;
    let mut var = 0.0;
    for (k, &rng_range) in strata.iter().enumerate() {
        let share = sigmas[k] / total_sigma;
        let n_k = ((main_budget as f64 * share) as u64).max(32);
        let m = chunked(cfg.seed, PURPOSE_MAIN, k as u64, n_k, |rng, acc| {
            acc.push(sample_one(rng, rng_range, &mut buf));
        });
        value += m.mean();
        var += m.variance() / n_k as f64;
    }
    Ok((value, libm::sqrt(var.max(0.0))))
}
