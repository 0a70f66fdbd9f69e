//! Named check suites run by `fracperim verify`. Each entry wraps a
//! structured verdict; entries marked `expected_failure` count as OK when
//! they fail (the counterexample family is supposed to break the stability
//! bound) and as suite failures when they unexpectedly pass.

use anyhow::Result;
use fracperim::experiments::{
    counterexample_curve, fit_counterexample_exponent, standard_convex_family, FamilyKind,
    ShapeFamily,
};
use fracperim::geometry::ConvexBody;
use fracperim::math::Vector;
use fracperim::perimeter::{chord_mc, ray_mc, McConfig};
use fracperim::spherical::{build_grid, harmonic_u, GridResolution, NearlySphericalSet};
use fracperim::verify::{
    check_fuglede_family, check_limits, check_main_theorem, check_ratio_spread,
    check_scale_invariance, check_slicing_steps, check_small_deficit_qualitative, CheckStatus,
    CheckVerdict,
};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub details: String,
    pub status: String,
    pub expected_failure: bool,
    /// Entry is acceptable for the suite outcome.
    pub ok: bool,
}

impl SuiteEntry {
    fn from_verdict(v: CheckVerdict, expected_failure: bool) -> Self {
        let ok = if expected_failure {
            !v.passed
        } else {
            v.passed
        };
        SuiteEntry {
            name: v.name,
            passed: v.passed,
            margin: v.margin,
            details: v.details,
            status: match v.status {
                CheckStatus::Pass => "pass".into(),
                CheckStatus::Fail => "fail".into(),
                CheckStatus::NotApplicable => "not_applicable".into(),
            },
            expected_failure,
            ok,
        }
    }

    fn expect_pass(v: CheckVerdict) -> Self {
        Self::from_verdict(v, false)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub budget: u64,
    pub seed: u64,
    pub eps0: f64,
    pub spread_cap: f64,
    pub fuglede_count: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            budget: 200_000,
            seed: 0x5eed,
            eps0: 0.1,
            spread_cap: 3.0,
            fuglede_count: 50,
        }
    }
}

fn ball2() -> ConvexBody {
    ConvexBody::ball(Vector::zeros(2), 1.0).unwrap()
}

fn square2() -> ConvexBody {
    ConvexBody::cuboid(Vector::zeros(2), Vector::new(&[1.0, 1.0])).unwrap()
}

fn interval() -> ConvexBody {
    ConvexBody::interval(0.0, 1.0).unwrap()
}

/// Cross-estimator consistency as a verdict (ray vs chord within 3 sigma).
fn cross_estimator_entry(
    body: &ConvexBody,
    label: &str,
    s: f64,
    cfg: &SuiteConfig,
) -> Result<SuiteEntry> {
    let a = ray_mc(body, s, &McConfig::new(cfg.budget, cfg.seed))?;
    let b = chord_mc(body, s, &McConfig::new(cfg.budget, cfg.seed.wrapping_add(1)))?;
    let sigma = (a.std_error * a.std_error + b.std_error * b.std_error)
        .sqrt()
        .max(1e-12 * b.value);
    let margin = 3.0 - (a.value - b.value).abs() / sigma;
    Ok(SuiteEntry::expect_pass(CheckVerdict::from_margin(
        &format!("cross_estimator_{label}_s{s}"),
        margin,
        format!(
            "ray={:.6e}+-{:.1e} chord={:.6e}+-{:.1e}",
            a.value, a.std_error, b.value, b.std_error
        ),
    )))
}

pub fn suite_convex(s_values: &[f64], cfg: &SuiteConfig) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    // scale invariance: analytic paths plus one Monte Carlo body
    for &s in s_values {
        out.push(SuiteEntry::expect_pass(check_scale_invariance(
            &interval(),
            s,
            2.0,
            cfg.budget,
            cfg.seed,
        )?));
        out.push(SuiteEntry::expect_pass(check_scale_invariance(
            &ball2(),
            s,
            2.0,
            cfg.budget,
            cfg.seed,
        )?));
        out.push(SuiteEntry::expect_pass(check_scale_invariance(
            &square2(),
            s,
            2.0,
            cfg.budget,
            cfg.seed.wrapping_add(7),
        )?));
    }
    // estimator cross-validation
    let ellipse = ConvexBody::ellipsoid(
        Vector::zeros(2),
        Vector::new(&[1.4, 1.0 / 1.4]),
        fracperim::math::Matrix::identity(2),
    )
    .unwrap();
    for &s in s_values {
        out.push(cross_estimator_entry(&ball2(), "ball", s, cfg)?);
        out.push(cross_estimator_entry(&square2(), "square", s, cfg)?);
        out.push(cross_estimator_entry(&ellipse, "ellipse", s, cfg)?);
    }
    // slicing chain
    let tri = fracperim::experiments::regular_polygon(3)?;
    for &s in s_values {
        for (label, body) in [("ball", &ball2()), ("square", &square2()), ("triangle", &tri)] {
            let [s1, s2, s3] = check_slicing_steps(body, s, 48, cfg.budget, cfg.seed)?;
            for mut v in [s1, s2, s3] {
                v.name = format!("{}_{label}_s{s}", v.name);
                out.push(SuiteEntry::expect_pass(v));
            }
        }
    }
    // limits (deterministic bodies)
    for (label, body) in [("interval", interval()), ("disc", ball2())] {
        let [lo, hi] = check_limits(&body, cfg.budget, cfg.seed)?;
        for mut v in [lo, hi] {
            v.name = format!("{}_{label}", v.name);
            out.push(SuiteEntry::expect_pass(v));
        }
    }
    // stability ratio across the standard family
    let family = standard_convex_family(2)?;
    for &s in s_values {
        let mut ratios = Vec::new();
        for (i, member) in family.iter().enumerate() {
            if let fracperim::experiments::SetVariant::Convex(body) = &member.set {
                let v = check_main_theorem(
                    body,
                    s,
                    cfg.budget,
                    cfg.seed.wrapping_add(i as u64),
                )?;
                // harvest the ratio payload for the spread check
                if let Some(r) = v
                    .details
                    .split("ratio=")
                    .nth(1)
                    .and_then(|t| t.trim().parse::<f64>().ok())
                {
                    ratios.push(r);
                }
                let mut v = v;
                v.name = format!("{}_{}_s{s}", v.name, member.id);
                out.push(SuiteEntry::expect_pass(v));
            }
        }
        let mut spread = check_ratio_spread(&ratios, cfg.spread_cap);
        spread.name = format!("{}_s{s}", spread.name);
        out.push(SuiteEntry::expect_pass(spread));
    }
    // qualitative small-deficit ordering along an eccentricity family
    let fam = ShapeFamily {
        kind: FamilyKind::Ellipsoids(vec![0.4, 0.2, 0.1, 0.05]),
        dim: 2,
    }
    .generate()?;
    let bodies: Vec<ConvexBody> = fam
        .into_iter()
        .filter_map(|m| match m.set {
            fracperim::experiments::SetVariant::Convex(b) => Some(b),
            _ => None,
        })
        .collect();
    let mid_s = s_values.get(s_values.len() / 2).copied().unwrap_or(0.5);
    out.push(SuiteEntry::expect_pass(check_small_deficit_qualitative(
        &bodies, mid_s, cfg.budget, cfg.seed,
    )?));
    Ok(out)
}

/// Randomized admissible nearly spherical family (w1inf <= eps0).
pub fn fuglede_family(count: usize, eps0: f64, seed: u64) -> Result<Vec<NearlySphericalSet>> {
    let grid = build_grid(2, GridResolution::Angular(512))?;
    let mut out = Vec::with_capacity(count);
    let mut rng = fracperim::sampling::chunk_rng(seed, 0xF0, 0, 0);
    let mut made = 0usize;
    while made < count {
        // random low-frequency modes, rescaled to a target w1inf in
        // [0.3, 1.0] x eps0
        let k1 = 2 + (fracperim::sampling::uniform01(&mut rng) * 3.0) as u32; // 2..4
        let k2 = 2 + (fracperim::sampling::uniform01(&mut rng) * 5.0) as u32; // 2..6
        let a1 = fracperim::sampling::uniform01(&mut rng);
        let a2 = 0.5 * fracperim::sampling::uniform01(&mut rng);
        let p1 = core::f64::consts::TAU * fracperim::sampling::uniform01(&mut rng);
        let p2 = core::f64::consts::TAU * fracperim::sampling::uniform01(&mut rng);
        let target = eps0 * (0.4 + 0.6 * fracperim::sampling::uniform01(&mut rng));
        // Lipschitz of sum a_i cos(k_i t) is at most sum k_i a_i
        let lip = (k1 as f64) * a1 + (k2 as f64) * a2;
        let scale = target / lip.max(1e-9);
        let u = harmonic_u(
            &grid,
            &[(k1, a1 * scale), (k2, a2 * scale)],
            &[p1, p2],
        )?;
        match NearlySphericalSet::from_radial_samples(grid.clone(), &u) {
            Ok(set) if set.w1inf() <= eps0 => {
                out.push(set);
                made += 1;
            }
            _ => {} // over threshold after normalization: draw again
        }
    }
    Ok(out)
}

pub fn suite_fuglede(s_values: &[f64], cfg: &SuiteConfig) -> Result<Vec<SuiteEntry>> {
    let family = fuglede_family(cfg.fuglede_count, cfg.eps0, cfg.seed)?;
    // exact-lambda0 vs Monte Carlo consistency on every set is part of the
    // acceptance suite; here the family-level positivity is checked per s
    let mut out = Vec::new();
    for &s in s_values {
        let mut v = check_fuglede_family(&family, s, cfg.budget, cfg.seed)?;
        v.name = format!("{}_s{s}", v.name);
        out.push(SuiteEntry::expect_pass(v));
    }
    Ok(out)
}

pub fn suite_counterexample(cfg: &SuiteConfig) -> Result<Vec<SuiteEntry>> {
    let s = 0.5;
    // small-eps window where the leading eps^{n-s} power dominates the
    // volume-renormalization correction
    let curve = counterexample_curve(&[0.05, 0.02, 0.01], s, cfg.budget, cfg.seed, None, 2)?;
    let all_two = curve.iter().all(|p| p.lambda0 == 2.0);
    let mut out = Vec::new();
    out.push(SuiteEntry::expect_pass(CheckVerdict::from_margin(
        "counterexample_lambda0_saturates",
        if all_two { 3.0 } else { -1.0 },
        format!("lambda0 rows: {:?}", curve.iter().map(|p| p.lambda0).collect::<Vec<_>>()),
    )));
    let (slope, se) = fit_counterexample_exponent(&curve)?;
    let margin = 3.0 * (1.0 - (slope - 1.5).abs() / 0.15);
    out.push(SuiteEntry::expect_pass(CheckVerdict::from_margin(
        "counterexample_deficit_exponent",
        margin,
        format!("fitted exponent {slope:.4} +- {se:.4} vs n-s = 1.5 (window 0.15)"),
    )));
    // the stability ratio diverges along the family: the boundedness check
    // must FAIL here, and that failure is the asserted outcome
    let wide = counterexample_curve(&[0.2, 0.1, 0.05, 0.02], s, cfg.budget, cfg.seed, None, 2)?;
    let ratios: Vec<f64> = wide
        .iter()
        .map(|p| p.lambda0 / p.deficit.sqrt())
        .collect();
    let spread = check_ratio_spread(&ratios, cfg.spread_cap);
    out.push(SuiteEntry::from_verdict(spread, true));
    Ok(out)
}

pub fn suite_limits(cfg: &SuiteConfig) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    for (label, body) in [("interval", interval()), ("disc", ball2())] {
        let [lo, hi] = check_limits(&body, cfg.budget, cfg.seed)?;
        for mut v in [lo, hi] {
            v.name = format!("{}_{label}", v.name);
            out.push(SuiteEntry::expect_pass(v));
        }
    }
    Ok(out)
}

pub fn run_suite(name: &str, s_values: &[f64], cfg: &SuiteConfig) -> Result<Vec<SuiteEntry>> {
    match name {
        "convex" => suite_convex(s_values, cfg),
        "fuglede" => suite_fuglede(s_values, cfg),
        "counterexample" => suite_counterexample(cfg),
        "limits" => suite_limits(cfg),
        "all" => {
            let mut out = suite_convex(s_values, cfg)?;
            out.extend(suite_fuglede(s_values, cfg)?);
            out.extend(suite_counterexample(cfg)?);
            Ok(out)
        }
        other => anyhow::bail!("unknown suite {other:?} (convex|fuglede|counterexample|limits|all)"),
    }
}
