//! Real AWGN channel with total noise power σ².

use crate::error::{contract, Result};
use crate::vc::VoronoiConstellation;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// `y = x + g` with `g` i.i.d. Gaussian of variance `σ²/n` per dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwgnChannel {
    pub n: usize,
    /// Total noise power σ².
    pub sigma2: f64,
    /// `10·log₁₀(E_s/σ²)`.
    pub snr_db: f64,
}

impl AwgnChannel {
    /// Channel whose noise power gives `snr_db` for symbol energy `es`.
    pub fn from_snr(n: usize, es: f64, snr_db: f64) -> Result<Self> {
        if n == 0 || !(es > 0.0) || !snr_db.is_finite() {
            return Err(contract("channel needs n > 0, E_s > 0 and a finite SNR"));
        }
        Ok(AwgnChannel {
            n,
            sigma2: es / 10f64.powf(snr_db / 10.0),
            snr_db,
        })
    }

    /// Per-dimension noise variance `σ²/n`.
    pub fn variance(&self) -> f64 {
        self.sigma2 / self.n as f64
    }

    /// `ln p` with `p = (2πσ²/n)^{n/2}`, so `ln f(y|x) = −ln p − ‖y−x‖²/(2σ²/n)`.
    pub fn log_normalizer(&self) -> f64 {
        0.5 * self.n as f64 * (2.0 * PI * self.variance()).ln()
    }

    /// `ln f(y|x)` for squared distance `d2 = ‖y − x‖²`.
    pub fn log_density(&self, d2: f64) -> f64 {
        -self.log_normalizer() - d2 / (2.0 * self.variance())
    }

    /// Writes `x + g` into `y`.
    pub fn sample_into<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, y: &mut [f64]) {
        let sd = self.variance().sqrt();
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = xi + sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
}

/// Average symbol energy: enumerated up to 2²⁰ points, otherwise 2·10⁵ Monte Carlo messages.
pub fn average_energy(vc: &VoronoiConstellation, seed: u64) -> Result<f64> {
    match vc.size_u64() {
        Some(m) if m <= 1 << 20 => Ok(vc.energy_and_centroid()?.0),
        _ => Ok(vc.energy_monte_carlo(200_000, seed).0),
    }
}
