//! Sweep persistence: append-only delimiter-separated rows plus a run
//! manifest. Rows are written in a fixed global order regardless of how many
//! workers computed them, so output bytes depend only on (config, seed);
//! wall-clock timings go to a separate sidecar excluded from that guarantee.

use anyhow::{bail, Context};
use fracperim::experiments::{compute_row, row_seed, ShapeInstance, SweepRow};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

pub const RESULT_HEADER: &str = "shape_id,params,s,ps_value,ps_std_error,method,lambda0,fraenkel,deficit,deficit_std_error,hausdorff_d,ratio,seed,budget,convex,error";

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

fn fmt_f(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "NaN".into()
    }
}

pub fn row_to_csv(row: &SweepRow) -> String {
    format!(
        "{},\"{}\",{},{},{},{},{},{},{},{},{},{},{},{},{},\"{}\"",
        row.shape_id,
        row.params,
        fmt_f(row.s),
        fmt_f(row.ps_value),
        fmt_f(row.ps_std_error),
        row.method.as_str(),
        fmt_f(row.lambda0),
        fmt_f(row.fraenkel),
        fmt_f(row.deficit),
        fmt_f(row.deficit_std_error),
        fmt_f(row.hausdorff_d),
        fmt_opt(row.ratio),
        row.seed,
        row.budget,
        row.convex,
        row.error.clone().unwrap_or_default(),
    )
}

/// Minimal CSV field splitter for our own files (quotes only, no embedded
/// newlines).
fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    for c in line.chars() {
        match c {
            '"' => in_quotes = !in_quotes,
            ',' if !in_quotes => {
                out.push(core::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

/// Parsed subset of a results row needed by `report` and by resume logic.
#[derive(Debug, Clone)]
pub struct ParsedRow {
    pub shape_id: String,
    pub s: f64,
    pub lambda0: f64,
    pub fraenkel: f64,
    pub deficit: f64,
    pub deficit_std_error: f64,
    pub ratio: Option<f64>,
    pub convex: bool,
    pub error: Option<String>,
}

pub fn read_rows(path: &Path) -> anyhow::Result<Vec<ParsedRow>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != RESULT_HEADER {
                bail!("unrecognized results header in {path:?}");
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f = split_csv(line);
        if f.len() != 16 {
            continue; // trailing partial line from an interrupted run
        }
        rows.push(ParsedRow {
            shape_id: f[0].clone(),
            s: f[2].parse().unwrap_or(f64::NAN),
            lambda0: f[6].parse().unwrap_or(f64::NAN),
            fraenkel: f[7].parse().unwrap_or(f64::NAN),
            deficit: f[8].parse().unwrap_or(f64::NAN),
            deficit_std_error: f[9].parse().unwrap_or(f64::NAN),
            ratio: if f[11].is_empty() { None } else { f[11].parse().ok() },
            convex: f[14] == "true",
            error: if f[15].is_empty() { None } else { Some(f[15].clone()) },
        });
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub command: &'a str,
    pub config_hash: String,
    pub seed: u64,
    pub library_version: &'a str,
    /// Fully resolved configuration, defaults included.
    pub config: C,
}

pub fn write_manifest<C: Serialize>(path: &Path, m: &Manifest<C>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(m)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {path:?}"))
}

pub fn config_hash<C: Serialize>(config: &C) -> anyhow::Result<String> {
    let bytes = serde_json::to_vec(config)?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(hex::encode(h.finalize()))
}

pub struct SweepOutcome {
    pub rows_written: usize,
    pub rows_skipped: usize,
    pub failures: usize,
}

/// Drive a sweep over (shape, s) jobs: parallel computation in fixed-size
/// batches, rows appended strictly in job order, wall times to the sidecar.
/// With `resume`, rows already present in the output are kept and their jobs
/// skipped; the final byte content matches an uninterrupted run.
pub fn run_sweep_to_file(
    instances: &[ShapeInstance],
    s_values: &[f64],
    budget: u64,
    seed: u64,
    out: &Path,
    resume: bool,
) -> anyhow::Result<SweepOutcome> {
    let mut done: HashSet<(String, u64)> = HashSet::new();
    let mut existing_text = String::new();
    if resume && out.exists() {
        let text = fs::read_to_string(out)?;
        let mut keep = String::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line != RESULT_HEADER {
                    bail!("cannot resume: unrecognized header");
                }
                keep.push_str(line);
                keep.push('\n');
                continue;
            }
            let f = split_csv(line);
            if f.len() == 16 {
                if let Ok(s) = f[2].parse::<f64>() {
                    done.insert((f[0].clone(), s.to_bits()));
                    keep.push_str(line);
                    keep.push('\n');
                }
            }
            // partial trailing lines are dropped
        }
        existing_text = keep;
    }

    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..s_values.len()).map(move |j| (i, j)))
        .collect();
    let pending: Vec<(usize, usize)> = jobs
        .iter()
        .copied()
        .filter(|&(i, j)| {
            !done.contains(&(instances[i].id.clone(), s_values[j].to_bits()))
        })
        .collect();

    // resumability requires completed rows to form a prefix of the job order
    if !done.is_empty() {
        let mut seen_pending = false;
        for &(i, j) in &jobs {
            let key = (instances[i].id.clone(), s_values[j].to_bits());
            if done.contains(&key) {
                if seen_pending {
                    bail!("cannot resume: completed rows are not a prefix of the job order");
                }
            } else {
                seen_pending = true;
            }
        }
    }

    let mut file = if resume && out.exists() {
        fs::write(out, &existing_text)?;
        BufWriter::new(fs::OpenOptions::new().append(true).open(out)?)
    } else {
        let mut f = BufWriter::new(fs::File::create(out)?);
        writeln!(f, "{RESULT_HEADER}")?;
        f
    };
    let timing_path = out.with_extension("timing.txt");
    let mut timing = BufWriter::new(if resume && timing_path.exists() {
        fs::OpenOptions::new().append(true).open(&timing_path)?
    } else {
        fs::File::create(&timing_path)?
    });

    let batch = rayon::current_num_threads().max(1) * 4;
    let mut written = 0usize;
    let mut failures = 0usize;
    for chunk in pending.chunks(batch) {
        let rows: Vec<(SweepRow, f64)> = chunk
            .par_iter()
            .map(|&(i, j)| {
                let t0 = Instant::now();
                let row = compute_row(
                    &instances[i],
                    s_values[j],
                    budget,
                    row_seed(seed, i, j),
                );
                (row, t0.elapsed().as_secs_f64() * 1e3)
            })
            .collect();
        for (row, ms) in rows {
            if row.error.is_some() {
                failures += 1;
            }
            writeln!(file, "{}", row_to_csv(&row))?;
            writeln!(timing, "{} s={} wall_ms={ms:.1}", row.shape_id, row.s)?;
            written += 1;
        }
        file.flush()?;
        timing.flush()?;
    }
    Ok(SweepOutcome {
        rows_written: written,
        rows_skipped: done.len(),
        failures,
    })
}
