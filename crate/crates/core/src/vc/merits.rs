//! Spectral efficiency, energy and asymptotic power efficiency.

use super::{GrayPenaltyMode, VoronoiConstellation, OFFSET_ENUMERATION_LIMIT};
use crate::error::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Figures of merit of a constellation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeritReport {
    /// Bits per symbol per dimension pair, `2·log₂(M)/n`.
    pub beta: f64,
    /// `(2·log₂ M, n)` when M is a power of two, so `beta = num/den` exactly.
    pub beta_exact: Option<(u64, u64)>,
    /// Average symbol energy.
    pub es: f64,
    /// Standard error of `es` (zero when enumerated).
    pub es_stderr: f64,
    pub es_enumerated: bool,
    /// Squared minimum distance of the coding lattice.
    pub d_min2: f64,
    /// Asymptotic power efficiency `d_min²·log₂(M)/(4·E_s)`.
    pub gamma: f64,
    /// PAM benchmark `3β/(2(2^β − 1))`.
    pub gamma_pam: f64,
    /// `10·log₁₀(γ/γ_PAM)`.
    pub gain_db: f64,
    pub gray_penalty: Option<f64>,
}

/// Power efficiency of PAM at spectral efficiency `beta`.
pub fn gamma_pam(beta: f64) -> f64 {
    3.0 * beta / (2.0 * (2f64.powf(beta) - 1.0))
}

const CHUNK: usize = 8192;

impl VoronoiConstellation {
    /// Monte Carlo average energy over uniform messages: `(mean, stderr)`.
    pub fn energy_monte_carlo(&self, samples: usize, seed: u64) -> (f64, f64) {
        let n = self.dim();
        let chunks = samples.div_ceil(CHUNK);
        let (s1, s2) = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let mut sc = self.scratch();
                let mut u = vec![0i64; n];
                let mut x = vec![0.0; n];
                let (mut a, mut b) = (0.0, 0.0);
                for _ in 0..CHUNK.min(samples - c * CHUNK) {
                    self.random_message(&mut rng, &mut u);
                    self.encode_into(&u, &mut sc, &mut x);
                    let e: f64 = x.iter().map(|v| v * v).sum();
                    a += e;
                    b += e * e;
                }
                (a, b)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((0.0, 0.0), |p, q| (p.0 + q.0, p.1 + q.1));
        let nf = samples as f64;
        let mean = s1 / nf;
        let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
        (mean, (var / nf).sqrt())
    }

    /// Merit figures; energy is enumerated for `M ≤ 2¹⁷`, otherwise estimated
    /// from `mc_samples` random messages.
    pub fn merit_report(
        &self,
        mc_samples: usize,
        seed: u64,
        gray: Option<GrayPenaltyMode>,
    ) -> Result<MeritReport> {
        let n = self.dim() as f64;
        let log2m = self.log2_size();
        let beta = 2.0 * log2m / n;
        let enumerate = self
            .size_u64()
            .is_some_and(|m| m <= OFFSET_ENUMERATION_LIMIT);
        let (es, es_stderr) = if enumerate {
            (self.energy_and_centroid()?.0, 0.0)
        } else {
            self.energy_monte_carlo(mc_samples, seed)
        };
        let d_min2 = self.coding.min_norm();
        let gamma = d_min2 * log2m / (4.0 * es);
        let gp = gamma_pam(beta);
        let gray_penalty = match gray {
            Some(mode) => Some(self.gray_penalty(mode)?),
            None => None,
        };
        Ok(MeritReport {
            beta,
            beta_exact: self.exact_log2_size().map(|b| (2 * b, self.dim() as u64)),
            es,
            es_stderr,
            es_enumerated: enumerate,
            d_min2,
            gamma,
            gamma_pam: gp,
            gain_db: 10.0 * (gamma / gp).log10(),
            gray_penalty,
        })
    }
}
