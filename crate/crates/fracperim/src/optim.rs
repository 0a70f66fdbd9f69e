//! Derivative-free simplex (Nelder-Mead) minimizer for the translation
//! search in the Fraenkel asymmetry. Dimensions are tiny (n <= 3) and the
//! objective may carry frozen Monte Carlo noise, which simplex search
//! tolerates.

use crate::math::Vector;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Convergence when the simplex diameter falls below this.
    pub diameter_tol: f64,
    pub initial_step: f64,
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub xmin: Vector,
    pub fmin: f64,
    pub iters: usize,
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const BETA: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

pub fn nelder_mead<F: FnMut(&Vector) -> f64>(
    mut f: F,
    start: &Vector,
    opts: &SimplexOptions,
) -> SimplexResult {
    let n = start.dim();
    let mut pts: Vec<Vector> = Vec::with_capacity(n + 1);
    pts.push(*start);
    for i in 0..n {
        let mut p = *start;
        p.set(i, p.coord(i) + opts.initial_step);
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();

    let mut iters = 0;
    let mut converged = false;
    while iters < opts.max_iters {
        iters += 1;
        // order ascending by value
        let mut idx: Vec<usize> = (0..pts.len()).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(core::cmp::Ordering::Equal));
        let ordered: Vec<Vector> = idx.iter().map(|&i| pts[i]).collect();
        let ovals: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
        pts = ordered;
        vals = ovals;

        let mut diam: f64 = 0.0;
        for i in 1..pts.len() {
            diam = diam.max(pts[i].dist(&pts[0]));
        }
        if diam < opts.diameter_tol {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut cen = Vector::zeros(n);
        for p in &pts[..n] {
            cen = cen.add(p);
        }
        let cen = cen.scale(1.0 / n as f64);
        let worst = pts[n];
        let fworst = vals[n];

        let refl = cen.add(&cen.sub(&worst).scale(ALPHA));
        let frefl = f(&refl);
        if frefl < vals[0] {
            let exp = cen.add(&cen.sub(&worst).scale(GAMMA));
            let fexp = f(&exp);
            if fexp < frefl {
                pts[n] = exp;
                vals[n] = fexp;
            } else {
                pts[n] = refl;
                vals[n] = frefl;
            }
        } else if frefl < vals[n - 1] {
            pts[n] = refl;
            vals[n] = frefl;
        } else {
            let (better, fbetter) = if frefl < fworst { (refl, frefl) } else { (worst, fworst) };
            let con = cen.add(&better.sub(&cen).scale(BETA));
            let fcon = f(&con);
            if fcon < fbetter {
                pts[n] = con;
                vals[n] = fcon;
            } else {
                // shrink toward the best
                for i in 1..=n {
                    pts[i] = pts[0].add(&pts[i].sub(&pts[0]).scale(SIGMA));
                    vals[i] = f(&pts[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..pts.len() {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    SimplexResult {
        xmin: pts[best],
        fmin: vals[best],
        iters,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_shifted_quadratic() {
        let opts = SimplexOptions { max_iters: 500, diameter_tol: 1e-10, initial_step: 0.5 };
        let target = Vector::new(&[0.3, -1.2]);
        let res = nelder_mead(
            |x| {
                let d = x.sub(&target);
                d.norm_sq() + 0.5
            },
            &Vector::zeros(2),
            &opts,
        );
        assert!(res.converged);
        assert!(res.xmin.dist(&target) < 1e-6, "off by {}", res.xmin.dist(&target));
        assert!((res.fmin - 0.5).abs() < 1e-9);
    }

    #[test]
    fn one_dimensional_works() {
        let opts = SimplexOptions { max_iters: 300, diameter_tol: 1e-12, initial_step: 0.3 };
        let res = nelder_mead(|x| (x.coord(0) - 2.0).powi(2), &Vector::zeros(1), &opts);
        assert!(res.converged && (res.xmin.coord(0) - 2.0).abs() < 1e-6);
    }
}
