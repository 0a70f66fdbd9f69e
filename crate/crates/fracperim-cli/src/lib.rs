//! IO companion for the `fracperim` core: file formats, sweep persistence,
//! verify suites and the parallel job driver used by the CLI.

pub mod formats;
pub mod suites;
pub mod sweep_io;

use anyhow::Context;
use serde::Serialize;
use std::path::Path;

/// Per-shape compute report saved by `fracperim compute`.
#[derive(Debug, Serialize)]
pub struct ComputeReport {
    pub shape_kind: String,
    pub s: f64,
    pub lambda0: f64,
    pub fraenkel: f64,
    pub hausdorff_d: f64,
    pub deficit: f64,
    pub deficit_std_error: f64,
    pub ps_value: f64,
    pub ps_std_error: f64,
    pub method: String,
    pub ball_reference: f64,
    pub seed: u64,
    pub budget: u64,
}

/// Compute the full asymmetry report for a parsed shape. Convex bodies are
/// normalized first (the reported quantities are scale invariant).
pub fn compute_report(
    shape: &formats::ParsedShape,
    s: f64,
    budget: u64,
    seed: u64,
) -> anyhow::Result<ComputeReport> {
    use formats::ParsedShape;
    let (report, kind) = match shape {
        ParsedShape::Convex(body) => {
            let (normalized, _) = body.normalize().context("normalization failed")?;
            let d = normalized
                .hausdorff_to_unit_ball(&fracperim::geometry::HausdorffConfig::for_dim(
                    body.dim(),
                ))
                .context("Hausdorff distance failed")?;
            (
                fracperim::asymmetry::asymmetry_report(&normalized, s, budget, seed, d)?,
                "convex",
            )
        }
        ParsedShape::Radial(set) => {
            let lambda0 = set.lambda0_exact()?;
            let fr = fracperim::asymmetry::fraenkel_asymmetry(
                set,
                budget / 4,
                seed.wrapping_add(1),
                &fracperim::asymmetry::FraenkelConfig::default(),
            )?;
            let def = fracperim::asymmetry::s_deficit(set, s, budget, seed.wrapping_add(2))?;
            (
                fracperim::asymmetry::AsymmetryReport {
                    lambda0,
                    fraenkel: fr.value,
                    hausdorff_d: set.sup_u(),
                    s,
                    deficit: def.deficit,
                    perimeter_estimate: def.perimeter_estimate,
                    ball_reference: def.ball_reference,
                },
                "radial",
            )
        }
        ParsedShape::TwoBall(tb) => {
            let (deficit, sigma) = tb.deficit(s, budget, seed)?;
            let ball_reference = fracperim::perimeter::unit_ball_ps_analytic(2, s)?;
            (
                fracperim::asymmetry::AsymmetryReport {
                    lambda0: tb.lambda0_exact(),
                    fraenkel: tb.fraenkel_exact(),
                    hausdorff_d: tb.hausdorff_exact(),
                    s,
                    deficit,
                    perimeter_estimate: fracperim::perimeter::PerimeterEstimate {
                        value: ball_reference * (1.0 + deficit),
                        std_error: sigma * ball_reference,
                        method: fracperim::perimeter::Method::Analytic,
                        budget,
                        seed: Some(seed),
                    },
                    ball_reference,
                },
                "two_ball",
            )
        }
    };
    Ok(ComputeReport {
        shape_kind: kind.into(),
        s,
        lambda0: report.lambda0,
        fraenkel: report.fraenkel,
        hausdorff_d: report.hausdorff_d,
        deficit: report.deficit,
        deficit_std_error: report.deficit_std_error(),
        ps_value: report.perimeter_estimate.value,
        ps_std_error: report.perimeter_estimate.std_error,
        method: report.perimeter_estimate.method.as_str().into(),
        ball_reference: report.ball_reference,
        seed,
        budget,
    })
}

/// Summary produced by `fracperim report` from an existing results file.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub failed_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_emp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_std_error: Option<f64>,
    pub convex_rows_used: usize,
    pub nonconvex_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample_exponent: Option<f64>,
}

pub fn summarize_results(path: &Path) -> anyhow::Result<Summary> {
    let rows = sweep_io::read_rows(path)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut c_emp: f64 = 0.0;
    let mut used = 0usize;
    let mut nonconvex = 0usize;
    let mut tb_pts: Vec<(f64, f64)> = Vec::new();
    for r in &rows {
        if r.error.is_some() {
            continue;
        }
        if !r.convex {
            nonconvex += 1;
            if let Some(eps) = r
                .shape_id
                .strip_prefix("two_ball_eps")
                .and_then(|t| t.parse::<f64>().ok())
            {
                if r.deficit > 0.0 {
                    tb_pts.push((eps, r.deficit));
                }
            }
            continue;
        }
        if let Some(ratio) = r.ratio {
            if r.deficit > 0.0 && r.lambda0 > 0.0 {
                x.push(r.deficit.ln());
                y.push(r.lambda0.ln());
                c_emp = c_emp.max(ratio);
                used += 1;
            }
        }
    }
    let fit = fracperim::math::stats::linear_fit(&x, &y);
    let tb_exp = if tb_pts.len() >= 2 {
        let tx: Vec<f64> = tb_pts.iter().map(|p| p.0.ln()).collect();
        let ty: Vec<f64> = tb_pts.iter().map(|p| p.1.ln()).collect();
        fracperim::math::stats::linear_fit(&tx, &ty).map(|f| f.1)
    } else {
        None
    };
    Ok(Summary {
        rows: rows.len(),
        failed_rows: failed,
        c_emp: if used >= 5 { Some(c_emp) } else { None },
        slope: if used >= 5 { fit.map(|f| f.1) } else { None },
        slope_std_error: if used >= 5 { fit.map(|f| f.2) } else { None },
        convex_rows_used: used,
        nonconvex_rows: nonconvex,
        counterexample_exponent: tb_exp,
    })
}
