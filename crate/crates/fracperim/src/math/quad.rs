//! Gauss-Legendre nodes/weights and composite panel quadrature.

use alloc::vec::Vec;
use num_traits::Float;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_m.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mh = (m + 1) / 2;
    for i in 0..mh {
        // Tricomi-style initial guess
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_m(x) and P'_m(x) by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (pm1 - x * p) / (1.0 - x * x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(x);
        weights.push(w);
    }
    // mirror
    let mut all_nodes = Vec::with_capacity(m);
    let mut all_weights = Vec::with_capacity(m);
    for i in (0..mh).rev() {
        if nodes[i].abs() > 1e-14 || m % 2 == 0 {
            all_nodes.push(-nodes[i]);
            all_weights.push(weights[i]);
        }
    }
    if m % 2 == 1 {
        all_nodes.push(0.0);
        all_weights.push(weights[mh - 1]);
    }
    for i in 0..m / 2 {
        all_nodes.push(nodes[i]);
        all_weights.push(weights[i]);
    }
    (all_nodes, all_weights)
}

/// Integrate f over [a, b] with an m-point Gauss-Legendre rule.
pub fn gl_integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, nodes: &[f64], weights: &[f64], f: &mut F) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = super::Kahan::new();
    for (x, w) in nodes.iter().zip(weights) {
        acc.add(w * f(c + h * x));
    }
    acc.value() * h
}

/// Integrate f over consecutive panels given by `breaks` (sorted).
pub fn gl_panels<F: FnMut(f64) -> f64>(breaks: &[f64], nodes: &[f64], weights: &[f64], f: &mut F) -> f64 {
    let mut acc = super::Kahan::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            acc.add(gl_integrate(w[0], w[1], nodes, weights, f));
        }
    }
    acc.value()
}

/// Panel breakpoints on [lo, hi] geometrically graded toward `edge`
/// (which must be lo or hi) with the innermost panel of width ~`scale`.
pub fn graded_breaks(lo: f64, hi: f64, edge_at_hi: bool, scale: f64, ratio: f64) -> Vec<f64> {
    let len = hi - lo;
    let mut offs: Vec<f64> = Vec::new(); // distances from the graded edge
    let mut d = len;
    offs.push(d);
    while d > scale && offs.len() < 400 {
        d *= ratio;
        offs.push(d);
    }
    offs.push(0.0);
    let mut breaks: Vec<f64> = offs
        .iter()
        .map(|o| if edge_at_hi { hi - o } else { lo + o })
        .collect();
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    breaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Float;

    #[test]
    fn gl_exactness_polynomials() {
        let (n, w) = gauss_legendre(8);
        // degree 15 polynomial integrated exactly
        let mut f = |x: f64| x.powi(15) + 3.0 * x.powi(8) - x + 0.5;
        let got = gl_integrate(-1.0, 1.0, &n, &w, &mut f);
        let want = 2.0 * (3.0 / 9.0) + 2.0 * 0.5;
        assert!((got - want).abs() < 1e-13, "got {got} want {want}");
    }

    #[test]
    fn gl_weights_sum_to_two() {
        for m in [1, 2, 3, 5, 8, 16, 32, 64] {
            let (_, w) = gauss_legendre(m);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "m={m}: {s}");
        }
    }

    #[test]
    fn graded_panels_resolve_edge_singularity() {
        // integral of (1-x)^{-1/2} over [0,1] = 2; the innermost panel
        // truncates ~2*sqrt(scale), so accuracy is ~1e-7 at scale 1e-14
        let (n, w) = gauss_legendre(12);
        let breaks = graded_breaks(0.0, 1.0, true, 1e-14, 0.35);
        let mut f = |x: f64| (1.0 - x).sqrt().recip();
        let got = gl_panels(&breaks, &n, &w, &mut f);
        assert!((got - 2.0).abs() < 1e-6, "got {got}");
    }
}
