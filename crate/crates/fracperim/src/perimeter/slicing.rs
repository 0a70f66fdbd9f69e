//! Slicewise lower-bound functional: D(E) * Int_0^1 P_s^{(n-1)}(E_t) dt,
//! with slices taken along a diameter-achieving axis. For convex E this is a
//! lower bound for P_s(E) (the slicing chain used to bound the diameter by
//! the s-perimeter).

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Shape};
use crate::perimeter::{check_s, chord_mc, interval_ps_exact, unit_ball_ps_analytic, McConfig};

/// Trapezoidal integration over `n_t` slice intervals; MC slices (dimension 2)
/// use `per_slice_budget` chord samples each.
pub fn slicewise_lower_bound(
    body: &ConvexBody,
    s: f64,
    n_t: usize,
    per_slice_budget: u64,
    seed: u64,
) -> Result<f64> {
    check_s(s)?;
    if body.dim() < 2 {
        return Err(Error::UnsupportedDimension(body.dim()));
    }
    if n_t < 2 {
        return Err(Error::InvalidParameter("need at least 2 slice intervals".into()));
    }
    let diam = body.diameter()?;
    let mut acc = 0.0;
    for i in 0..=n_t {
        let t = i as f64 / n_t as f64;
        let slice = body.slice(&diam.x0, &diam.x1, t)?;
        let p = slice_ps(&slice, s, per_slice_budget, seed.wrapping_add(i as u64))?;
        let w = if i == 0 || i == n_t { 0.5 } else { 1.0 };
        acc += w * p;
    }
    Ok(diam.length * acc / n_t as f64)
}

/// s-perimeter of a slice body of dimension 1 or 2; empty slices weigh 0.
fn slice_ps(slice: &ConvexBody, s: f64, budget: u64, seed: u64) -> Result<f64> {
    if slice.is_empty() || slice.measure() <= 0.0 {
        return Ok(0.0);
    }
    match slice.dim() {
        1 => {
            let length = slice.measure();
            interval_ps_exact(length, s)
        }
        2 => match slice.shape() {
            Shape::Ball { radius, .. } => {
                Ok(libm::pow(*radius, 2.0 - s) * unit_ball_ps_analytic(2, s)?)
            }
            _ => {
                let est = chord_mc(slice, s, &McConfig::new(budget.max(1000), seed))?;
                Ok(est.value)
            }
        },
        d => Err(Error::UnsupportedDimension(d)),
    }
}
