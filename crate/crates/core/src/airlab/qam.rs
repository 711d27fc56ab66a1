//! Square-QAM and capacity reference curves.

use crate::error::{contract, Result};
use std::f64::consts::PI;

/// Gaussian capacity `log₂(1 + SNR)` in bits per dimension pair.
pub fn awgn_capacity(snr_db: f64) -> f64 {
    (1.0 + 10f64.powf(snr_db / 10.0)).log2()
}

/// `SNR − SNR*(mi)` in dB, where `SNR*` is the SNR at which capacity equals `mi` (bits per dimension pair).
pub fn gap_to_capacity_db(mi: f64, snr_db: f64) -> f64 {
    snr_db - 10.0 * (2f64.powf(mi) - 1.0).log10()
}

/// MI of equiprobable `levels`-PAM in bits per dimension, at `SNR = E_s/σ²` per dimension.
///
/// The Gaussian expectation uses the trapezoid rule on `[−12σ, 12σ]`; pairs
/// farther apart than `40σ` are dropped.
pub fn pam_mi(levels: usize, snr_db: f64) -> Result<f64> {
    if levels < 2 {
        return Err(contract("PAM needs at least two levels"));
    }
    let l = levels as f64;
    let es = (l * l - 1.0) / 3.0;
    let v = es / 10f64.powf(snr_db / 10.0);
    let sd = v.sqrt();
    let reach = ((40.0 * sd + 2.0) / 2.0).ceil() as usize;
    let h = 0.05;
    let nodes = (24.0 / h) as usize;
    let weights: Vec<(f64, f64)> = (0..=nodes)
        .map(|k| {
            let t = -12.0 + k as f64 * h;
            let w = if k == 0 || k == nodes { 0.5 } else { 1.0 };
            (t * sd, w * h * (-0.5 * t * t).exp() / (2.0 * PI).sqrt())
        })
        .collect();
    let term = |i: usize| -> f64 {
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(levels - 1);
        weights
            .iter()
            .map(|&(z, w)| {
                let s: f64 = (lo..=hi)
                    .map(|j| {
                        let d = 2.0 * (i as f64 - j as f64);
                        (-(d * d + 2.0 * d * z) / (2.0 * v)).exp()
                    })
                    .sum();
                w * s.log2()
            })
            .sum()
    };
    // Levels i and L−1−i contribute equally; levels at least `reach` from both edges are identical.
    let half = levels.div_ceil(2);
    let edge = half.min(reach);
    let mut total = 0.0;
    for i in 0..edge {
        let mult = if levels % 2 == 1 && i == half - 1 {
            1.0
        } else {
            2.0
        };
        total += mult * term(i);
    }
    let interior = levels.saturating_sub(2 * edge);
    if interior > 0 {
        total += interior as f64 * term(edge);
    }
    Ok(l.log2() - total / l)
}

/// MI of `levels²`-QAM in bits per dimension pair.
pub fn qam_mi(levels: usize, snr_db: f64) -> Result<f64> {
    Ok(2.0 * pam_mi(levels, snr_db)?)
}

/// PAM size per dimension of the QAM baseline for a rate of `beta` bits per dimension pair: `2^⌈β/2⌉`.
pub fn qam_baseline_levels(beta: f64) -> Result<usize> {
    let e = (beta / 2.0).ceil();
    if !(1.0..32.0).contains(&e) {
        return Err(contract(format!("no QAM baseline for rate {beta}")));
    }
    Ok(1usize << e as u32)
}

/// SNR in dB at which `levels²`-QAM reaches `target` bits per dimension pair.
pub fn snr_for_qam_mi(target: f64, levels: usize) -> Result<f64> {
    if !(target > 0.0 && target < 2.0 * (levels as f64).log2()) {
        return Err(contract("target MI outside the QAM range"));
    }
    let (mut lo, mut hi) = (-20.0, 100.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if qam_mi(levels, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
