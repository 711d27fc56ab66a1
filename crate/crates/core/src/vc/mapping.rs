//! Encoding `u ↦ x ∈ Γ` and decoding `y ↦ u` for the four mappings.

use super::{Mapping, Scratch, VoronoiConstellation};
use crate::error::{contract, Result};
use crate::lattices::quantizers::round_half_down;

impl VoronoiConstellation {
    fn check_message(&self, u: &[i64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(contract("message has the wrong dimension"));
        }
        for (i, (&ui, &r)) in u.iter().zip(&self.tables.ranges).enumerate() {
            if !(0..r).contains(&ui) {
                return Err(contract(format!("u[{i}] = {ui} outside 0..{r}")));
            }
        }
        Ok(())
    }

    /// Maps an in-range message to its constellation point.
    pub fn encode(&self, u: &[i64]) -> Result<Vec<f64>> {
        self.check_message(u)?;
        let mut out = vec![0.0; self.dim()];
        self.encode_into(u, &mut self.scratch(), &mut out);
        Ok(out)
    }

    /// Unchecked [`encode`](Self::encode) into caller buffers.
    pub fn encode_into(&self, u: &[i64], s: &mut Scratch, out: &mut [f64]) {
        let n = self.dim();
        let a = &self.offset;
        let t = &self.tables;
        match self.mapping {
            Mapping::Kurkoski => {
                for i in 0..n {
                    s.c[i] = u[i] as f64 - a[i];
                }
            }
            Mapping::Ferdinand => {
                let f = t.ferdinand_rows.as_ref().expect("ferdinand tables");
                for j in 0..n {
                    let d: i64 = (j..n).map(|i| u[i] * f[i][j]).sum();
                    s.c[j] = d as f64 - a[j];
                }
            }
            Mapping::Feng => {
                let (_, _, tinv) = t.smith.as_ref().expect("smith tables");
                for j in 0..n {
                    s.w[j] = (0..n).map(|i| u[i] as i128 * tinv[i][j]).sum();
                }
                reduce_rectangle(&t.l, &mut s.w);
                for j in 0..n {
                    s.c[j] = s.w[j] as f64 - a[j];
                }
            }
            Mapping::Cs83 => {
                let (b, den) = t.coding_basis.as_ref().expect("coding basis");
                for j in 0..n {
                    let v: i64 = (j..n).map(|i| u[i] * b[i][j]).sum();
                    s.c[j] = v as f64 / *den as f64 - a[j];
                }
            }
        }
        self.shaping.quantize_into(&s.c, &mut s.a, &mut s.b);
        for i in 0..n {
            out[i] = s.c[i] - s.b[i];
        }
    }

    /// Recovers the message nearest to a received vector; always in range.
    pub fn decode(&self, y: &[f64]) -> Result<Vec<i64>> {
        if y.len() != self.dim() {
            return Err(contract("received vector has the wrong dimension"));
        }
        let mut u = vec![0i64; self.dim()];
        self.decode_into(y, &mut self.scratch(), &mut u);
        Ok(u)
    }

    /// Unchecked [`decode`](Self::decode) into caller buffers.
    pub fn decode_into(&self, y: &[f64], s: &mut Scratch, u: &mut [i64]) {
        let n = self.dim();
        let a = &self.offset;
        let t = &self.tables;
        if self.mapping == Mapping::Cs83 {
            for i in 0..n {
                s.a[i] = y[i] + a[i];
            }
            self.coding.quantize_into(&s.a, &mut s.b);
            let (b, den) = t.coding_basis.as_ref().expect("coding basis");
            for i in 0..n {
                s.w[i] = (s.b[i] * *den as f64).round() as i128;
            }
            // w·B = p with B lower-triangular: back-substitute from the last column.
            let m = t.ranges[0] as i128;
            for j in (0..n).rev() {
                let mut acc = s.w[j];
                for i in j + 1..n {
                    acc -= s.w[i] * b[i][j] as i128;
                }
                s.w[j] = acc / b[j][j] as i128;
            }
            for i in 0..n {
                u[i] = s.w[i].rem_euclid(m) as i64;
            }
            return;
        }
        for i in 0..n {
            s.w[i] = round_half_down(y[i] + a[i]) as i128;
        }
        match self.mapping {
            Mapping::Kurkoski => {
                reduce_rectangle(&t.l, &mut s.w);
                for i in 0..n {
                    u[i] = s.w[i] as i64;
                }
            }
            Mapping::Feng => {
                let (j, t_red, _) = t.smith.as_ref().expect("smith tables");
                for c in 0..n {
                    let acc: i128 = (0..n).map(|r| s.w[r] * t_red[r][c] as i128).sum();
                    u[c] = acc.rem_euclid(j[c] as i128) as i64;
                }
            }
            Mapping::Ferdinand => {
                let f = t.ferdinand_rows.as_ref().expect("ferdinand tables");
                for i in (0..n).rev() {
                    let q = s.w[i];
                    u[i] = q.rem_euclid(t.l[i][i] as i128) as i64;
                    for k in 0..=i {
                        s.w[k] -= q * f[i][k] as i128;
                    }
                }
            }
            Mapping::Cs83 => unreachable!(),
        }
    }
}

/// Reduces `p` modulo the row lattice of lower-triangular `l` into the box `0 ≤ p_i < L_ii`.
pub(crate) fn reduce_rectangle(l: &[Vec<i64>], p: &mut [i128]) {
    for i in (0..p.len()).rev() {
        let v = p[i].div_euclid(l[i][i] as i128);
        if v != 0 {
            for k in 0..=i {
                p[k] -= v * l[i][k] as i128;
            }
        }
    }
}
