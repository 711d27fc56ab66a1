//! Offset selection by centroid descent.

use super::{VoronoiConstellation, OFFSET_ENUMERATION_LIMIT};
use crate::error::{Error, Result};
use num_bigint::BigUint;
use rand::Rng;
use rand_distr::StandardNormal;

/// Adds a random vector of norm 10⁻⁹.
pub(crate) fn perturb<R: Rng + ?Sized>(a: &[f64], rng: &mut R) -> Vec<f64> {
    let g: Vec<f64> = a
        .iter()
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let norm = g
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(&g)
        .map(|(ai, gi)| ai + 1e-9 * gi / norm)
        .collect()
}

impl VoronoiConstellation {
    /// Average energy and centroid of Γ, by enumeration.
    pub fn energy_and_centroid(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.dim();
        let mut sum = vec![0.0; n];
        let mut energy = 0.0;
        self.for_each_point(u64::MAX, |_, x| {
            for (s, v) in sum.iter_mut().zip(x) {
                *s += v;
            }
            energy += x.iter().map(|v| v * v).sum::<f64>();
        })?;
        let m = self.size_u64().unwrap() as f64;
        Ok((energy / m, sum.into_iter().map(|s| s / m).collect()))
    }

    /// Centroid descent: `a ← a + centroid(Γ(a))` until the step is below `tol`.
    ///
    /// Starts from the zero offset and `starts − 1` random offsets in
    /// `[−½, ½)ⁿ`; returns the lowest-energy result after a 10⁻⁹ perturbation.
    pub fn optimize_offset<R: Rng + ?Sized>(
        &self,
        tol: f64,
        max_iter: usize,
        starts: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if self.size > BigUint::from(OFFSET_ENUMERATION_LIMIT) {
            return Err(Error::UseRandomOffset(
                u128::try_from(&self.size).unwrap_or(u128::MAX),
            ));
        }
        let n = self.dim();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for start in 0..starts.max(1) {
            let mut a: Vec<f64> = if start == 0 {
                vec![0.0; n]
            } else {
                (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect()
            };
            let mut vc = self.with_offset(a.clone())?;
            let (mut es, mut mu) = vc.energy_and_centroid()?;
            for _ in 0..max_iter {
                let step = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
                if step < tol {
                    break;
                }
                let next: Vec<f64> = a.iter().zip(&mu).map(|(x, y)| x + y).collect();
                vc = self.with_offset(next.clone())?;
                let (es_next, mu_next) = vc.energy_and_centroid()?;
                if es_next > es {
                    break;
                }
                a = next;
                es = es_next;
                mu = mu_next;
            }
            if best.as_ref().is_none_or(|(e, _)| es < *e) {
                best = Some((es, a));
            }
        }
        Ok(perturb(&best.unwrap().1, rng))
    }
}
