//! Closest-point quantizers for the cataloged lattices.
//!
//! Ties between equally close candidates go to the lexicographically
//! smaller point: coordinate rounding breaks `.5` downward, and the
//! checkerboard fix-up flips the lowest-index coordinate among equals.

/// Rounds to the nearest integer, sending exact halves down.
#[inline]
pub fn round_half_down(x: f64) -> f64 {
    (x - 0.5).ceil()
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Zⁿ: coordinate-wise rounding.
pub fn quantize_cubic(x: &[f64], out: &mut [f64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o = round_half_down(v);
    }
}

/// Dₙ (integer vectors with even coordinate sum).
///
/// Round every coordinate; if the sum is odd, re-round the coordinate with
/// the largest rounding error the other way.
pub fn quantize_checkerboard(x: &[f64], out: &mut [f64]) {
    let mut parity = 0i64;
    let mut worst = 0usize;
    let mut worst_err = -1.0f64;
    for (i, (o, &v)) in out.iter_mut().zip(x).enumerate() {
        let r = round_half_down(v);
        *o = r;
        parity ^= (r as i64) & 1;
        let e = (v - r).abs();
        if e > worst_err {
            worst_err = e;
            worst = i;
        }
    }
    if parity != 0 {
        out[worst] += if x[worst] - out[worst] > 0.0 {
            1.0
        } else {
            -1.0
        };
    }
}

/// E₈ = D₈ ∪ (D₈ + ½): best of the two checkerboard candidates.
pub fn quantize_gosset(x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(x.len(), 8);
    let mut a = [0.0f64; 8];
    let mut b = [0.0f64; 8];
    let mut shifted = [0.0f64; 8];
    quantize_checkerboard(x, &mut a);
    for (s, &v) in shifted.iter_mut().zip(x) {
        *s = v - 0.5;
    }
    quantize_checkerboard(&shifted, &mut b);
    for v in b.iter_mut() {
        *v += 0.5;
    }
    let da = sq_dist(x, &a);
    let db = sq_dist(x, &b);
    let pick_b = db < da || (db == da && lex_less(&b, &a));
    out.copy_from_slice(if pick_b { &b } else { &a });
}

/// A lattice written as a union of cosets `c + k·Dₙ` with integer representatives.
#[derive(Clone, Debug)]
pub struct CosetUnion {
    n: usize,
    /// Scale of the checkerboard base lattice.
    k: i64,
    reps: Vec<Vec<i64>>,
    /// `reps[j][i] mod k`, flattened rep-major.
    residues: Vec<u8>,
    /// Parity of `Σ (reps[j][i] div k)`.
    rep_parity: Vec<u8>,
}

impl CosetUnion {
    /// Panics if `k` is not in `1..=255` or a representative has the wrong length.
    pub fn new(n: usize, k: i64, reps: Vec<Vec<i64>>) -> Self {
        assert!((1..=255).contains(&k), "base scale out of range");
        let mut residues = Vec::with_capacity(reps.len() * n);
        let mut rep_parity = Vec::with_capacity(reps.len());
        for r in &reps {
            assert_eq!(r.len(), n);
            let mut par = 0i64;
            for &c in r {
                residues.push(c.rem_euclid(k) as u8);
                par ^= c.div_euclid(k) & 1;
            }
            rep_parity.push(par as u8);
        }
        CosetUnion {
            n,
            k,
            reps,
            residues,
            rep_parity,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn base_scale(&self) -> i64 {
        self.k
    }

    pub fn reps(&self) -> &[Vec<i64>] {
        &self.reps
    }

    pub fn index(&self) -> usize {
        self.reps.len()
    }

    /// Per-coordinate, per-residue rounding table for `x`.
    fn table(&self, x: &[f64]) -> CosetTable {
        let k = self.k as usize;
        let kf = self.k as f64;
        let mut t = CosetTable {
            dist: vec![0.0; self.n * k],
            flip_cost: vec![0.0; self.n * k],
            z: vec![0.0; self.n * k],
            parity: vec![0; self.n * k],
        };
        for (i, &xi) in x.iter().enumerate() {
            for r in 0..k {
                let v = (xi - r as f64) / kf;
                let z = round_half_down(v);
                let e = v - z;
                let idx = i * k + r;
                t.dist[idx] = e * e;
                t.flip_cost[idx] = 1.0 - 2.0 * e.abs();
                t.z[idx] = z;
                t.parity[idx] = ((z as i64) & 1) as u8;
            }
        }
        t
    }

    /// Scaled squared distance to the best point of coset `j`, with the
    /// coordinate to flip (if any).
    #[inline]
    fn coset_cost(&self, t: &CosetTable, j: usize) -> (f64, Option<usize>) {
        let k = self.k as usize;
        let res = &self.residues[j * self.n..(j + 1) * self.n];
        let mut sum = 0.0;
        let mut par = self.rep_parity[j];
        let mut best_flip = f64::INFINITY;
        let mut flip_at = 0usize;
        for (i, &r) in res.iter().enumerate() {
            let idx = i * k + r as usize;
            sum += t.dist[idx];
            par ^= t.parity[idx];
            let c = t.flip_cost[idx];
            if c < best_flip {
                best_flip = c;
                flip_at = i;
            }
        }
        if par & 1 == 1 {
            (sum + best_flip, Some(flip_at))
        } else {
            (sum, None)
        }
    }

    fn point(&self, t: &CosetTable, x: &[f64], j: usize, flip: Option<usize>, out: &mut [f64]) {
        let k = self.k as usize;
        let kf = self.k as f64;
        let res = &self.residues[j * self.n..(j + 1) * self.n];
        for (i, &r) in res.iter().enumerate() {
            out[i] = r as f64 + kf * t.z[i * k + r as usize];
        }
        if let Some(i) = flip {
            let step = if x[i] - out[i] > 0.0 { kf } else { -kf };
            out[i] += step;
        }
    }

    /// Exact closest point of the union: the best over all cosets.
    pub fn quantize(&self, x: &[f64], out: &mut [f64]) {
        let t = self.table(x);
        let mut best = (f64::INFINITY, 0usize, None);
        let mut tmp = vec![0.0; self.n];
        for j in 0..self.reps.len() {
            let (cost, flip) = self.coset_cost(&t, j);
            if cost < best.0 {
                best = (cost, j, flip);
            } else if cost == best.0 {
                self.point(&t, x, best.1, best.2, out);
                self.point(&t, x, j, flip, &mut tmp);
                if lex_less(&tmp, out) {
                    best = (cost, j, flip);
                }
            }
        }
        self.point(&t, x, best.1, best.2, out);
    }

    /// True when the origin is a closest point to `x`, with early exit as
    /// soon as some coset offers a strictly closer point.
    ///
    /// Coset costs that reach the origin through a parity flip carry rounding
    /// error, so a coset must beat the origin by more than that to count.
    pub fn origin_is_closest(&self, x: &[f64]) -> bool {
        let kf = self.k as f64;
        let threshold: f64 = x.iter().map(|v| (v / kf) * (v / kf)).sum();
        let limit = threshold - 1e-12 * (1.0 + threshold);
        let t = self.table(x);
        (0..self.reps.len()).all(|j| self.coset_cost(&t, j).0 >= limit)
    }
}

struct CosetTable {
    dist: Vec<f64>,
    flip_cost: Vec<f64>,
    z: Vec<f64>,
    parity: Vec<u8>,
}

/// Exact search over a bounding box of integer coefficients, for small
/// custom lattices that have no structured decoder.
#[derive(Clone, Debug)]
pub struct BoxSearch {
    n: usize,
    /// Real generator rows.
    basis: Vec<Vec<f64>>,
    /// Inverse of the generator, row-major.
    inverse: Vec<Vec<f64>>,
    /// Euclidean norms of the inverse's columns.
    col_norms: Vec<f64>,
}

/// Largest dimension accepted by [`BoxSearch`].
pub const BOX_SEARCH_MAX_DIM: usize = 4;

impl BoxSearch {
    pub fn new(basis: Vec<Vec<f64>>) -> Option<Self> {
        let n = basis.len();
        if n == 0 || n > BOX_SEARCH_MAX_DIM {
            return None;
        }
        let inverse = invert(&basis)?;
        let col_norms = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| inverse[i][j] * inverse[i][j])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Some(BoxSearch {
            n,
            basis,
            inverse,
            col_norms,
        })
    }

    fn coords(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| x[i] * self.inverse[i][j]).sum())
            .collect()
    }

    fn point(&self, u: &[i64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..self.n).map(|i| u[i] as f64 * self.basis[i][j]).sum();
        }
    }

    /// Calls `f` for every coefficient vector in the box `|u_j − t_j| ≤ radius·‖col_j‖`.
    fn for_each_in_box(&self, t: &[f64], radius: f64, mut f: impl FnMut(&[i64])) {
        let lo: Vec<i64> = (0..self.n)
            .map(|j| (t[j] - radius * self.col_norms[j] - 1e-9).ceil() as i64)
            .collect();
        let hi: Vec<i64> = (0..self.n)
            .map(|j| (t[j] + radius * self.col_norms[j] + 1e-9).floor() as i64)
            .collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return;
        }
        let mut u = lo.clone();
        loop {
            f(&u);
            let mut i = 0;
            loop {
                if i == self.n {
                    return;
                }
                if u[i] < hi[i] {
                    u[i] += 1;
                    break;
                }
                u[i] = lo[i];
                i += 1;
            }
        }
    }

    pub fn quantize(&self, x: &[f64], out: &mut [f64]) {
        let t = self.coords(x);
        let babai: Vec<i64> = t.iter().map(|&v| round_half_down(v) as i64).collect();
        self.point(&babai, out);
        let radius = sq_dist(x, out).sqrt();
        let mut best = out.to_vec();
        let mut best_d = sq_dist(x, &best);
        let mut cand = vec![0.0; self.n];
        self.for_each_in_box(&t, radius, |u| {
            self.point(u, &mut cand);
            let d = sq_dist(x, &cand);
            if d < best_d || (d == best_d && lex_less(&cand, &best)) {
                best_d = d;
                best.copy_from_slice(&cand);
            }
        });
        out.copy_from_slice(&best);
    }

    /// Squared length of a shortest nonzero vector.
    pub fn min_norm(&self) -> f64 {
        let bound = self
            .basis
            .iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let zero = vec![0.0; self.n];
        let mut best = bound;
        let mut cand = vec![0.0; self.n];
        self.for_each_in_box(&zero, bound.sqrt(), |u| {
            if u.iter().all(|&v| v == 0) {
                return;
            }
            self.point(u, &mut cand);
            best = best.min(cand.iter().map(|v| v * v).sum());
        });
        best
    }
}

/// Gauss–Jordan inverse of a small dense matrix.
pub(crate) fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, p);
        let piv = m[c][c];
        m[c].iter_mut().for_each(|v| *v /= piv);
        for i in 0..n {
            if i != c {
                let f = m[i][c];
                if f != 0.0 {
                    for j in 0..2 * n {
                        m[i][j] -= f * m[c][j];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_rounds_down() {
        assert_eq!(round_half_down(2.5), 2.0);
        assert_eq!(round_half_down(-0.5), -1.0);
        assert_eq!(round_half_down(2.6), 3.0);
        assert_eq!(round_half_down(-1.6), -2.0);
    }

    #[test]
    fn cubic_rounding() {
        let mut out = [0.0; 4];
        quantize_cubic(&[0.4, -1.6, 2.2, 0.0], &mut out);
        assert_eq!(out, [0.0, -2.0, 2.0, 0.0]);
    }

    #[test]
    fn checkerboard_fixup() {
        let mut out = [0.0; 4];
        quantize_checkerboard(&[1.2, 0.9, -0.1, 0.2], &mut out);
        assert_eq!(out, [1.0, 1.0, 0.0, 0.0]);
        // Sum 1 is odd; 0.6 has the largest error and is pushed to 0.
        quantize_checkerboard(&[0.6, 0.0, 0.0, 0.1], &mut out);
        assert_eq!(out, [0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn gosset_fixed_points() {
        let mut out = [0.0; 8];
        let p = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        quantize_gosset(&p, &mut out);
        assert_eq!(out, p);
        let h = [0.5; 8];
        quantize_gosset(&h, &mut out);
        assert_eq!(out, h);
    }

    #[test]
    fn box_search_matches_rounding_on_z2() {
        let b = BoxSearch::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut out = [0.0; 2];
        b.quantize(&[1.7, -0.2], &mut out);
        assert_eq!(out, [2.0, 0.0]);
        assert_eq!(b.min_norm(), 1.0);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = vec![vec![6.0, 0.0], vec![4.0, 4.0]];
        let inv = invert(&a).unwrap();
        assert!((inv[0][0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((inv[1][1] - 0.25).abs() < 1e-15);
        assert!((inv[1][0] + 1.0 / 6.0).abs() < 1e-15);
    }
}
