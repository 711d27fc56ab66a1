//! Pseudo-Gray labels and the Gray penalty.

use super::{Mapping, Scratch, VoronoiConstellation};
use crate::error::{contract, Error, Result};
use crate::lattices::LatticeName;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Binary reflected Gray code.
#[inline]
pub fn gray_encode(v: u64) -> u64 {
    v ^ (v >> 1)
}

/// Inverse of [`gray_encode`].
#[inline]
pub fn gray_decode(mut g: u64) -> u64 {
    let mut shift = 1;
    while shift < 64 {
        g ^= g >> shift;
        shift <<= 1;
    }
    g
}

/// How [`VoronoiConstellation::gray_penalty`] visits minimum-distance pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrayPenaltyMode {
    /// Every point and every neighbor direction; fails above `limit` points.
    Exhaustive { limit: u64 },
    /// Random (point, direction) draws.
    Sampled { samples: usize, seed: u64 },
}

/// Minimum vectors of the coding lattice whose first nonzero entry is positive.
fn positive_min_vectors(name: LatticeName) -> Result<Vec<Vec<f64>>> {
    let n = name.dim();
    let mut out = Vec::new();
    match name {
        LatticeName::Z(_) => {
            for i in 0..n {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                out.push(v);
            }
        }
        LatticeName::D(_) | LatticeName::E8 => {
            for i in 0..n {
                for j in i + 1..n {
                    for s in [1.0, -1.0] {
                        let mut v = vec![0.0; n];
                        v[i] = 1.0;
                        v[j] = s;
                        out.push(v);
                    }
                }
            }
            if name == LatticeName::E8 {
                for mask in 0u32..128 {
                    // First coordinate +½, even number of minus signs overall.
                    if mask.count_ones() % 2 == 0 {
                        let mut v = vec![0.5; 8];
                        for k in 0..7 {
                            if mask >> k & 1 == 1 {
                                v[k + 1] = -0.5;
                            }
                        }
                        out.push(v);
                    }
                }
            }
        }
        other => {
            return Err(contract(format!(
                "no neighbor table for coding lattice {other}"
            )));
        }
    }
    Ok(out)
}

impl VoronoiConstellation {
    /// Bits per coordinate, or the first coordinate whose range is not a power of two.
    pub fn label_bits(&self) -> Result<&[u32]> {
        match &self.bits {
            Some(b) => Ok(b),
            None => {
                let (coord, &range) = self
                    .tables
                    .ranges
                    .iter()
                    .enumerate()
                    .find(|(_, &r)| !(r as u64).is_power_of_two())
                    .unwrap();
                Err(Error::BitMappingUnavailable {
                    coord,
                    range: range as u64,
                })
            }
        }
    }

    /// Total label length `log₂ M`.
    pub fn bits_per_symbol(&self) -> Result<usize> {
        Ok(self.label_bits()?.iter().map(|&b| b as usize).sum())
    }

    /// `(coordinate, bit position within the coordinate's Gray word)` for each label bit, MSB first.
    pub fn bit_layout(&self) -> Result<Vec<(usize, u32)>> {
        let mut out = Vec::new();
        for (i, &b) in self.label_bits()?.iter().enumerate() {
            for k in (0..b).rev() {
                out.push((i, k));
            }
        }
        Ok(out)
    }

    /// Concatenated per-coordinate Gray words, most significant bit first.
    pub fn gray_label(&self, u: &[i64]) -> Result<Vec<u8>> {
        let bits = self.label_bits()?;
        if u.len() != bits.len() {
            return Err(contract("message has the wrong dimension"));
        }
        let mut out = Vec::new();
        for (i, (&ui, &b)) in u.iter().zip(bits).enumerate() {
            if !(0..self.tables.ranges[i]).contains(&ui) {
                return Err(contract(format!("u[{i}] = {ui} out of range")));
            }
            let g = gray_encode(ui as u64);
            out.extend((0..b).rev().map(|k| ((g >> k) & 1) as u8));
        }
        Ok(out)
    }

    /// Inverse of [`gray_label`](Self::gray_label).
    pub fn gray_unlabel(&self, label: &[u8]) -> Result<Vec<i64>> {
        let bits = self.label_bits()?;
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if label.len() != total || label.iter().any(|&b| b > 1) {
            return Err(contract("label has the wrong length or non-binary entries"));
        }
        let mut pos = 0;
        Ok(bits
            .iter()
            .map(|&b| {
                let g = label[pos..pos + b as usize]
                    .iter()
                    .fold(0u64, |acc, &bit| (acc << 1) | bit as u64);
                pos += b as usize;
                gray_decode(g) as i64
            })
            .collect())
    }

    /// Label packed into an integer, first label bit in the most significant used position.
    ///
    /// Needs at most 64 label bits; `u` must be in range.
    pub fn packed_label(&self, u: &[i64]) -> Result<u64> {
        let bits = self.label_bits()?;
        if bits.iter().sum::<u32>() > 64 {
            return Err(contract("label longer than 64 bits"));
        }
        Ok(u.iter().zip(bits).fold(0u64, |acc, (&ui, &b)| {
            if b == 0 {
                acc
            } else {
                (acc << b) | gray_encode(ui as u64)
            }
        }))
    }

    /// Hamming distance between the labels of two messages.
    pub fn label_distance(&self, u: &[i64], v: &[i64]) -> u32 {
        u.iter()
            .zip(v)
            .map(|(&a, &b)| (gray_encode(a as u64) ^ gray_encode(b as u64)).count_ones())
            .sum()
    }

    /// Mean label Hamming distance over pairs of points at minimum distance.
    pub fn gray_penalty(&self, mode: GrayPenaltyMode) -> Result<f64> {
        self.label_bits()?;
        let name = self
            .coding
            .name()
            .ok_or_else(|| contract("Gray penalty needs a cataloged coding lattice"))?;
        let dirs = positive_min_vectors(name)?;
        let n = self.dim();
        let mut s = self.scratch();
        let mut y = vec![0.0; n];
        let mut v = vec![0i64; n];
        let (mut pairs, mut total) = (0u64, 0u64);
        let mut visit = |u: &[i64], x: &[f64], dir: &[f64], sign: f64, s: &mut Scratch| {
            for i in 0..n {
                y[i] = x[i] + sign * dir[i];
            }
            if self.in_region(&y, s) {
                self.decode_into(&y, s, &mut v);
                pairs += 1;
                total += self.label_distance(u, &v) as u64;
            }
        };
        match mode {
            GrayPenaltyMode::Exhaustive { limit } => {
                let mut inner = self.scratch();
                self.for_each_point(limit, |u, x| {
                    for d in &dirs {
                        visit(u, x, d, 1.0, &mut inner);
                    }
                })?;
            }
            GrayPenaltyMode::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut u = vec![0i64; n];
                let mut x = vec![0.0; n];
                let mut w = vec![0i64; n];
                for _ in 0..samples {
                    self.sample_canonical_point(&mut rng, &mut s, &mut w, &mut x);
                    self.decode_into(&x, &mut s, &mut u);
                    let d = &dirs[rng.gen_range(0..dirs.len())];
                    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    visit(&u, &x, d, sign, &mut s);
                }
            }
        }
        if pairs == 0 {
            return Err(contract("no minimum-distance pairs found"));
        }
        Ok(total as f64 / pairs as f64)
    }

    /// A uniform point of Γ drawn independently of the mapping, so that
    /// two mappings of the same constellation see the same points for a seed.
    pub(crate) fn sample_canonical_point<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        s: &mut Scratch,
        w: &mut [i64],
        x: &mut [f64],
    ) {
        let n = self.dim();
        if self.mapping == Mapping::Cs83 {
            self.random_message(rng, w);
            self.encode_into(w, s, x);
            return;
        }
        for i in 0..n {
            let r = self.tables.l[i][i];
            s.c[i] = rng.gen_range(0..r) as f64 - self.offset[i];
        }
        self.shaping.quantize_into(&s.c, &mut s.a, &mut s.b);
        for i in 0..n {
            x[i] = s.c[i] - s.b[i];
        }
    }
}
