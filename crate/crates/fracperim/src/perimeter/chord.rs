//! Chord (line-process) estimator of the s-perimeter double integral.
//!
//! Writing both points of the W^{s,1} double integral in line coordinates
//! (direction, base point in the orthogonal hyperplane, two scalar offsets)
//! leaves only the direction and base point to sample; the two offsets
//! integrate in closed form per line. The per-line payload is bounded by
//! diam(E)^{1-s}, so the variance is finite for every s in (0,1) - this is
//! the oracle used to cross-validate the ray reduction.

use crate::error::{Error, Result};
use crate::math::stats::Moments;
use crate::math::{unit_sphere_area, Vector};
use crate::perimeter::{
    check_budget, check_s, line_functional, EvaluableSet, McConfig, Method, PerimeterEstimate,
    SegmentBuf,
};
use crate::sampling::{self, chunk_rng, CHUNK_SIZE};

const PURPOSE_CHORD: u64 = 0x44;

pub fn chord_mc(set: &dyn EvaluableSet, s: f64, cfg: &McConfig) -> Result<PerimeterEstimate> {
    check_s(s)?;
    check_budget(cfg.samples)?;
    let vol = set.volume();
    if !(vol > 0.0) {
        return Err(Error::DegenerateBody("estimator needs positive volume".into()));
    }
    let n = set.dim();
    let center = set.center_hint();
    let radius = set.bounding_radius();
    let mut segbuf = SegmentBuf::new();

    if n == 1 {
        // the hyperplane of base points is a single point: deterministic
        let dir = Vector::new(&[1.0]);
        set.line_segments(&center, &dir, &mut segbuf);
        let value = line_functional(&segbuf, s);
        return Ok(PerimeterEstimate {
            value,
            std_error: 0.0,
            method: Method::ChordMc,
            budget: 1,
            seed: Some(cfg.seed),
        });
    }

    let area_measure = match n {
        2 => 2.0 * radius,
        3 => core::f64::consts::PI * radius * radius,
        d => return Err(Error::UnsupportedDimension(d)),
    };
    let scale = unit_sphere_area(n) * area_measure * 0.5;

    let mut merged = Moments::new();
    let n_chunks = cfg.samples.div_ceil(CHUNK_SIZE);
    for chunk in 0..n_chunks {
        let len = CHUNK_SIZE.min(cfg.samples - chunk * CHUNK_SIZE);
        let mut rng = chunk_rng(cfg.seed, PURPOSE_CHORD, 0, chunk);
        let mut acc = Moments::new();
        for _ in 0..len {
            let omega = sampling::sphere_dir(&mut rng, n);
            let basis = crate::math::orthonormal_complement(&omega);
            let base = match n {
                2 => {
                    let u = (2.0 * sampling::uniform01(&mut rng) - 1.0) * radius;
                    center.add_scaled(&basis[0], u)
                }
                _ => {
                    let r = radius * libm::sqrt(sampling::uniform01(&mut rng));
                    let a = core::f64::consts::TAU * sampling::uniform01(&mut rng);
                    center
                        .add_scaled(&basis[0], r * libm::cos(a))
                        .add_scaled(&basis[1], r * libm::sin(a))
                }
            };
            set.line_segments(&base, &omega, &mut segbuf);
            acc.push(scale * line_functional(&segbuf, s));
        }
        merged.merge(&acc);
    }
    Ok(PerimeterEstimate {
        value: merged.mean(),
        std_error: merged.std_error(),
        method: Method::ChordMc,
        budget: cfg.samples,
        seed: Some(cfg.seed),
    })
}
