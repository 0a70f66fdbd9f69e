//! Discrete Gagliardo seminorm on the sphere:
//! [u]^2 = Int Int |u(x) - u(y)|^2 / |x - y|^{n+s} over sphere pairs.
//!
//! Far pairs (geodesic distance above a cut ~1.5 grid steps) are summed with
//! the product quadrature weights; the near band is restored analytically
//! from the discrete gradient (|u(x) - u(y)| ~ |u'| d for nearby points), and
//! a Lipschitz-based upper bound for that band is reported alongside as the
//! quadrature's documented bias estimate. Both terms are exactly quadratic
//! in u, so quadratic homogeneity holds at the discrete level.

use super::{NearlySphericalSet, SphereGrid};
use crate::error::Result;
use crate::math::quad::{gauss_legendre, gl_panels};
use crate::perimeter::check_s;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy)]
pub struct GagliardoValue {
    /// Far-pair sum plus the near-band gradient correction.
    pub value: f64,
    /// Lipschitz-based upper bound for the near band (bias estimate).
    pub near_band_bound: f64,
    /// Geodesic cut radius actually used.
    pub cut: f64,
}

/// Near-band kernel integrals, via the substitution d = v^{1/(1-s)} that
/// absorbs the d^{-s} edge:
/// n=2: C(h) = 2 Int_0^h d^2 / (2 sin(d/2))^{2+s} dd
/// n=3: C(h) = pi Int_0^h d^2 sin(d) / (2 sin(d/2))^{3+s} dd
fn near_band_kernel(n: usize, s: f64, h: f64) -> f64 {
    let p = 1.0 / (1.0 - s);
    let (gx, gw) = gauss_legendre(16);
    let vmax = libm::pow(h, 1.0 - s);
    let mut f = |v: f64| -> f64 {
        let d = libm::pow(v, p);
        let chord = 2.0 * libm::sin(0.5 * d);
        if chord <= 0.0 {
            return 0.0;
        }
        // d^{-s} factor cancels against the substitution Jacobian
        let smooth = match n {
            2 => d * d * libm::pow(chord, -(2.0 + s)) * libm::pow(d, s),
            3 => d * d * libm::sin(d) * libm::pow(chord, -(3.0 + s)) * libm::pow(d, s),
            _ => unreachable!(),
        };
        p * smooth
    };
    let pref = match n {
        2 => 2.0,
        3 => core::f64::consts::PI,
        _ => unreachable!(),
    };
    pref * gl_panels(&[0.0, 0.5 * vmax, vmax], &gx, &gw, &mut f)
}

/// Discrete squared gradient at every node (used for the near-band
/// correction); n=2: central differences; n=3: polar + azimuthal parts.
fn grad_sq(grid: &SphereGrid, u: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len());
    match grid.dim() {
        2 => {
            let count = grid.resolution().0;
            let step = core::f64::consts::TAU / count as f64;
            for i in 0..count {
                let d = (u[(i + 1) % count] - u[(i + count - 1) % count]) / (2.0 * step);
                out.push(d * d);
            }
        }
        3 => {
            let (np, na) = grid.resolution();
            let nodes = grid.nodes();
            let step = core::f64::consts::TAU / na as f64;
            for i in 0..u.len() {
                let ring = i / na;
                let j = i % na;
                let st = {
                    let c = nodes[i].coord(2);
                    libm::sqrt((1.0 - c * c).max(1e-6))
                };
                let du_az = (u[ring * na + (j + 1) % na] - u[ring * na + (j + na - 1) % na])
                    / (2.0 * step * st);
                let du_pol = if ring == 0 {
                    (u[na + j] - u[j]) / grid.geodesic(na + j, j).max(1e-12)
                } else if ring == np - 1 {
                    (u[i] - u[i - na]) / grid.geodesic(i, i - na).max(1e-12)
                } else {
                    (u[i + na] - u[i - na])
                        / (grid.geodesic(i + na, i) + grid.geodesic(i, i - na)).max(1e-12)
                };
                out.push(du_az * du_az + du_pol * du_pol);
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Squared Gagliardo seminorm with kernel exponent n + s (the (1+s)/2
/// fractional order on the sphere).
pub fn gagliardo_seminorm_sq(set: &NearlySphericalSet, s: f64) -> Result<GagliardoValue> {
    check_s(s)?;
    let grid = set.grid();
    let u = set.u();
    let n = grid.dim();
    let nodes = grid.nodes();
    let weights = grid.weights();
    let count = nodes.len();

    // cut: 1.5 x the largest neighbor spacing
    let mut hmax: f64 = 0.0;
    for i in 0..count {
        for j in grid.neighbors(i) {
            hmax = hmax.max(grid.geodesic(i, j));
        }
    }
    let cut = 1.5 * hmax;
    let cos_cut = libm::cos(cut);

    let expo = -((n as f64) + s);
    let mut far = crate::math::Kahan::new();
    for i in 0..count {
        for j in (i + 1)..count {
            let c = nodes[i].dot(&nodes[j]);
            if c >= cos_cut {
                continue; // near band handled analytically
            }
            let du = u[i] - u[j];
            let dist_sq = (2.0 - 2.0 * c).max(1e-300);
            far.add(2.0 * weights[i] * weights[j] * du * du * libm::pow(dist_sq, 0.5 * expo));
        }
    }

    let kernel = near_band_kernel(n, s, cut);
    let gsq = grad_sq(grid, u);
    let mut grad_l2 = crate::math::Kahan::new();
    for i in 0..count {
        grad_l2.add(weights[i] * gsq[i]);
    }
    let correction = grad_l2.value() * kernel;
    let lip = set.lip_estimate();
    let total_weight: f64 = weights.iter().sum();
    let near_bound = lip * lip * total_weight * kernel;

    Ok(GagliardoValue {
        value: far.value() + correction,
        near_band_bound: near_bound,
        cut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherical::{build_grid, harmonic_u, GridResolution, NearlySphericalSet};
    use alloc::vec;
    use alloc::vec::Vec;

    fn ns_from(u: &[f64], count: usize) -> NearlySphericalSet {
        let g = build_grid(2, GridResolution::Angular(count)).unwrap();
        NearlySphericalSet::from_radial_samples(g, u).unwrap()
    }

    // seminorm of amp*cos(k theta): frozen from the one-dimensional
    // reduction Int 4 pi sin^2(k d/2) / (2 sin(d/2))^{2+s} dd evaluated in
    // high precision, cross-checked against a direct dense double sum
    const COS_MODE_TABLE: &[(u32, f64, f64)] = &[
        (2, 0.25, 46.5649942469),
        (2, 0.5, 62.1306387778),
        (2, 0.75, 111.2879844226),
        (3, 0.25, 76.2501780793),
        (3, 0.5, 112.0570449385),
        (3, 0.75, 223.1110072316),
    ];

    /// Raw (non-normalized) evaluation path used by oracle tests: the
    /// normalization would slightly deform pure modes.
    fn seminorm_of_raw(u: &[f64], count: usize, s: f64) -> f64 {
        // build through a tiny-amplitude normalized set is wrong here; use an
        // internal set with normalization skipped by constructing from the
        // already-normalized profile: volume/barycenter of pure k>=2 modes
        // stay within tolerance for small amplitudes, so from_radial_samples
        // leaves them nearly untouched; instead evaluate by scaling down.
        let eps = 1e-3;
        let scaled: Vec<f64> = u.iter().map(|v| v * eps).collect();
        let set = ns_from(&scaled, count);
        let g = gagliardo_seminorm_sq(&set, s).unwrap();
        g.value / (eps * eps)
    }

    #[test]
    fn cosine_mode_oracle_within_half_percent() {
        for &(k, s, want) in COS_MODE_TABLE {
            let g = build_grid(2, GridResolution::Angular(1024)).unwrap();
            let u = harmonic_u(&g, &[(k, 1.0)], &[0.0]).unwrap();
            let got = seminorm_of_raw(&u, 1024, s);
            let rel = ((got - want) / want).abs();
            assert!(rel < 5e-3, "k={k} s={s}: got {got}, want {want}, rel {rel:.2e}");
        }
    }

    #[test]
    fn quadratic_homogeneity_is_exact() {
        let g = build_grid(2, GridResolution::Angular(256)).unwrap();
        let u = harmonic_u(&g, &[(2, 0.06), (4, 0.02)], &[0.1, 0.9]).unwrap();
        let set = ns_from(&u, 256);
        let base = gagliardo_seminorm_sq(&set, 0.5).unwrap().value;
        // halve u: exactly representable scaling, compared bit-for-bit scaled
        let half: Vec<f64> = set.u().iter().map(|v| 0.5 * v).collect();
        let set2 = scaled_copy(&set, &half);
        let v2 = gagliardoq(&set2, 0.5);
        let rel = (v2 - 0.25 * base).abs() / base.max(1e-300);
        assert!(rel < 1e-13, "homogeneity violated: {rel:.2e}");
    }

    fn scaled_copy(set: &NearlySphericalSet, new_u: &[f64]) -> NearlySphericalSet {
        let mut c = set.clone();
        c.set_u_for_tests(new_u);
        c
    }

    fn gagliardoq(set: &NearlySphericalSet, s: f64) -> f64 {
        gagliardo_seminorm_sq(set, s).unwrap().value
    }

    #[test]
    fn rotation_equivariance_under_grid_shifts() {
        let count = 256;
        let g = build_grid(2, GridResolution::Angular(count)).unwrap();
        let u = harmonic_u(&g, &[(2, 0.05), (5, 0.02)], &[0.4, 1.3]).unwrap();
        let set = ns_from(&u, count);
        let base = gagliardoq(&set, 0.5);
        // rotate by 13 grid steps: cyclic shift of u
        let mut shifted = set.u().to_vec();
        shifted.rotate_right(13);
        let set2 = scaled_copy(&set, &shifted);
        let rot = gagliardoq(&set2, 0.5);
        assert!((base - rot).abs() <= 1e-10 * base, "{base} vs {rot}");
    }

    #[test]
    fn refinement_changes_little_on_lipschitz_profiles() {
        for s in [0.25, 0.5, 0.75] {
            let mut prev = None;
            for count in [256usize, 512, 1024] {
                let g = build_grid(2, GridResolution::Angular(count)).unwrap();
                let u = harmonic_u(&g, &[(2, 1.0)], &[0.0]).unwrap();
                let v = seminorm_of_raw(&u, count, s);
                if let Some(p) = prev {
                    let rel: f64 = (v - p) / v;
                    assert!(rel.abs() < 0.01, "s={s} count={count}: jump {rel:.3e}");
                }
                prev = Some(v);
            }
        }
    }

    #[test]
    fn constant_u_has_zero_seminorm() {
        // constant raw u is absorbed into the volume normalization: the
        // normalized set is the round sphere, seminorm 0
        let set = ns_from(&vec![0.07; 128], 128);
        let g = gagliardo_seminorm_sq(&set, 0.5).unwrap();
        assert!(g.value < 1e-20, "value {}", g.value);
    }

    #[test]
    fn near_band_bound_dominates_correction() {
        let g = build_grid(2, GridResolution::Angular(512)).unwrap();
        let u = harmonic_u(&g, &[(3, 0.05)], &[0.0]).unwrap();
        let set = ns_from(&u, 512);
        let got = gagliardo_seminorm_sq(&set, 0.5).unwrap();
        assert!(got.near_band_bound >= 0.0);
        assert!(got.value > 0.0);
    }

    #[test]
    fn n3_seminorm_runs_and_scales() {
        let g = build_grid(3, GridResolution::Product { polar: 12, azimuth: 24 }).unwrap();
        // z-aligned quadrupole-ish profile: u = a (3 cos^2(theta) - 1)
        let mut u = vec![0.0; g.len()];
        for (i, node) in g.nodes().iter().enumerate() {
            let c = node.coord(2);
            u[i] = 0.05 * (3.0 * c * c - 1.0) / 2.0;
        }
        let set = NearlySphericalSet::from_radial_samples(g, &u).unwrap();
        let a = gagliardo_seminorm_sq(&set, 0.5).unwrap().value;
        assert!(a > 0.0);
        let half: Vec<f64> = set.u().iter().map(|v| 0.5 * v).collect();
        let set2 = scaled_copy(&set, &half);
        let b = gagliardoq(&set2, 0.5);
        assert!(((b - 0.25 * a) / a).abs() < 1e-12);
    }
}
