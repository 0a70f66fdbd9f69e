//! Deterministic chunked random streams.
//!
//! Every Monte Carlo routine draws from per-chunk ChaCha8 generators keyed by
//! (seed, purpose, stratum, chunk). Chunks are the unit of (potential)
//! parallelism; reductions over chunks are order-fixed, so results are
//! bit-identical regardless of how chunks are scheduled.

use crate::math::Vector;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Fixed number of samples per chunk.
pub const CHUNK_SIZE: u64 = 4096;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent generator for (seed, purpose, stratum, chunk).
pub fn chunk_rng(seed: u64, purpose: u64, stratum: u64, chunk: u64) -> ChaCha8Rng {
    let mut st = seed ^ 0xD1B5_4A32_D192_ED03;
    let mut key = [0u8; 32];
    let a = splitmix64(&mut st);
    let mut st2 = a ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let b = splitmix64(&mut st2);
    let mut st3 = b ^ stratum.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    let c = splitmix64(&mut st3);
    let mut st4 = c ^ chunk.wrapping_mul(0x1656_67B1_9E37_79F9);
    let d = splitmix64(&mut st4);
    key[0..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Uniform f64 in [0, 1) from the top 53 bits.
#[inline]
pub fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Uniform direction on S^{n-1} (closed-form per dimension: no rejection).
#[inline]
pub fn sphere_dir(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    match dim {
        1 => {
            let b = rng.next_u64() & 1;
            Vector::new(&[if b == 0 { 1.0 } else { -1.0 }])
        }
        2 => {
            let a = core::f64::consts::TAU * uniform01(rng);
            Vector::new(&[libm::cos(a), libm::sin(a)])
        }
        3 => {
            let z = 1.0 - 2.0 * uniform01(rng);
            let a = core::f64::consts::TAU * uniform01(rng);
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            Vector::new(&[r * libm::cos(a), r * libm::sin(a), z])
        }
        _ => unreachable!("dimension 1..=3"),
    }
}

/// Uniform point in the unit ball of dimension n.
#[inline]
pub fn ball_point(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    let dir = sphere_dir(rng, dim);
    let t = radial_fraction(rng, dim, 0.0, 1.0);
    dir.scale(t)
}

/// Radial fraction t in [lo, hi] with density proportional to t^{n-1}
/// (inverse CDF; exact).
#[inline]
pub fn radial_fraction(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> f64 {
    let u = uniform01(rng);
    match dim {
        1 => lo + u * (hi - lo),
        2 => libm::sqrt(lo * lo + u * (hi * hi - lo * lo)),
        3 => libm::cbrt(lo * lo * lo + u * (hi * hi * hi - lo * lo * lo)),
        _ => unreachable!(),
    }
}

/// Uniform point in an axis-aligned box.
#[inline]
pub fn box_point(rng: &mut ChaCha8Rng, lo: &Vector, hi: &Vector) -> Vector {
    let mut v = Vector::zeros(lo.dim());
    for i in 0..lo.dim() {
        v.set(i, lo.coord(i) + uniform01(rng) * (hi.coord(i) - lo.coord(i)));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let mut a = chunk_rng(7, 1, 0, 3);
        let mut b = chunk_rng(7, 1, 0, 3);
        let mut c = chunk_rng(7, 1, 0, 4);
        let xa: alloc::vec::Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let xb: alloc::vec::Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let xc: alloc::vec::Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn sphere_dirs_are_unit() {
        let mut rng = chunk_rng(1, 2, 0, 0);
        for dim in 1..=3 {
            for _ in 0..100 {
                let d = sphere_dir(&mut rng, dim);
                assert!((d.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_fraction_moments() {
        // E[t] for density 2t on [0,1] is 2/3
        let mut rng = chunk_rng(3, 4, 0, 0);
        let n = 200_000;
        let mut s = 0.0;
        for _ in 0..n {
            s += radial_fraction(&mut rng, 2, 0.0, 1.0);
        }
        let m = s / n as f64;
        assert!((m - 2.0 / 3.0).abs() < 3e-3, "mean {m}");
    }
}
