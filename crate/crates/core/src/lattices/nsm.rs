//! Monte Carlo normalized second moment of a Voronoi region.

use super::{Lattice, LatticeName};
use crate::error::{contract, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CHUNK: usize = 4096;

/// Result of [`nsm_estimate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NsmEstimate {
    /// Dimensionless second moment G.
    pub g: f64,
    /// Standard error of `g`.
    pub stderr: f64,
    /// Shaping gain `10·log₁₀(1/(12G))` in dB.
    pub gain_db: f64,
    pub samples: usize,
}

/// Estimates G for the Voronoi region of `lat` from `samples` quantization errors.
///
/// Points are drawn uniformly from the fundamental parallelepiped `r·G`,
/// `r ∈ [0, 1)ⁿ`; its image modulo Λ is uniform over the Voronoi region.
/// Chunks of samples use independent ChaCha streams, so the result depends
/// only on `(seed, samples)`.
pub fn nsm_estimate(lat: &Lattice, samples: usize, seed: u64) -> Result<NsmEstimate> {
    if samples < 2 {
        return Err(contract("NSM estimation needs at least two samples"));
    }
    let n = lat.dim();
    let g = lat.generator_f64();
    let chunks = samples.div_ceil(CHUNK);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut r = vec![0.0; n];
            let mut x = vec![0.0; n];
            let mut q = vec![0.0; n];
            let (mut s, mut s2) = (0.0f64, 0.0f64);
            for _ in 0..count {
                r.iter_mut().for_each(|v| *v = rng.gen::<f64>());
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = (0..n).map(|i| r[i] * g[i][j]).sum();
                }
                lat.quantize_into(&x, &mut q);
                let e2: f64 = x.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                s += e2;
                s2 += e2 * e2;
            }
            (s, s2)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    let norm = n as f64 * lat.volume().powf(2.0 / n as f64);
    let g_val = mean / norm;
    Ok(NsmEstimate {
        g: g_val,
        stderr: (var / nf).sqrt() / norm,
        gain_db: 10.0 * (1.0 / (12.0 * g_val)).log10(),
        samples,
    })
}

/// Asymptotic shaping gain of the cataloged lattices, in dB.
pub fn reference_shaping_gain_db(name: LatticeName) -> f64 {
    match name {
        LatticeName::Z(_) => 0.0,
        LatticeName::D(4) => 0.366,
        LatticeName::D(_) => f64::NAN,
        LatticeName::E8 => 0.653,
        LatticeName::Bw16 => 0.864,
        LatticeName::Leech24 => 1.026,
        LatticeName::L32 => 0.935,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattices::build_named;

    #[test]
    fn cube_second_moment() {
        let z = build_named(LatticeName::Z(3)).unwrap();
        let est = nsm_estimate(&z, 100_000, 4).unwrap();
        assert!((est.g - 1.0 / 12.0).abs() < 3.0 * est.stderr, "{est:?}");
        assert!(est.gain_db.abs() < 0.01);
    }

    #[test]
    fn deterministic_for_seed() {
        let d4 = build_named(LatticeName::D(4)).unwrap();
        let a = nsm_estimate(&d4, 10_000, 9).unwrap();
        let b = nsm_estimate(&d4, 10_000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn d4_gain_close_to_known_value() {
        let d4 = build_named(LatticeName::D(4)).unwrap();
        let est = nsm_estimate(&d4, 200_000, 1).unwrap();
        assert!((est.gain_db - 0.366).abs() < 0.02, "{est:?}");
    }
}
