//! Exact integer matrix algorithms.
//!
//! Everything here works over `i128` with checked arithmetic: an operation
//! that would overflow returns [`Error::Overflow`] instead of wrapping.
//! Matrices act on row vectors, matching the lattice convention
//! `Λ = { uG : u ∈ Zⁿ }`.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{contract, Error, Result};

fn ck_mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow("multiplication"))
}

fn ck_add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow("addition"))
}

fn ck_sub(a: i128, b: i128) -> Result<i128> {
    a.checked_sub(b).ok_or(Error::Overflow("subtraction"))
}

/// Dense integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn diagonal(diag: &[i128]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows<T: Copy + Into<i128>>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().map(|&v| v.into()));
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[i128] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i128>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<i128> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = ck_mul(a, other[(k, j)])?;
                    out[(i, j)] = ck_add(out[(i, j)], v)?;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: i128) -> Result<IntMatrix> {
        let data = self
            .data
            .iter()
            .map(|&v| ck_mul(v, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix { data, ..*self })
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[i128]) -> Result<Vec<i128>> {
        if v.len() != self.rows {
            return Err(contract("vector length does not match matrix rows"));
        }
        let mut out = vec![0i128; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = ck_add(*o, ck_mul(vi, self[(i, j)])?)?;
            }
        }
        Ok(out)
    }

    /// Exact division of every entry; fails if some entry is not divisible.
    pub fn div_exact(&self, k: i128) -> Option<IntMatrix> {
        if k == 0 || self.data.iter().any(|v| v % k != 0) {
            return None;
        }
        Some(IntMatrix {
            data: self.data.iter().map(|v| v / k).collect(),
            ..*self
        })
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| ((i + 1)..self.cols).all(|j| self[(i, j)] == 0))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)] == 0))
    }

    pub fn max_abs(&self) -> i128 {
        self.data.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] -= k * row[src]
    fn sub_row_multiple(&mut self, dst: usize, src: usize, k: i128) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        for j in 0..self.cols {
            let v = ck_mul(k, self[(src, j)])?;
            self[(dst, j)] = ck_sub(self[(dst, j)], v)?;
        }
        Ok(())
    }

    /// col[dst] -= k * col[src]
    fn sub_col_multiple(&mut self, dst: usize, src: usize, k: i128) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        for i in 0..self.rows {
            let v = ck_mul(k, self[(i, src)])?;
            self[(i, dst)] = ck_sub(self[(i, dst)], v)?;
        }
        Ok(())
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            self[(i, j)] = -self[(i, j)];
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = i128;
    fn index(&self, (i, j): (usize, usize)) -> &i128 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i128 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det_int(g: &IntMatrix) -> Result<i128> {
    if !g.is_square() {
        return Err(contract("determinant of a non-square matrix"));
    }
    let n = g.rows();
    if n == 0 {
        return Ok(1);
    }
    let mut a = g.clone();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[(k, k)] == 0 {
            match ((k + 1)..n).find(|&i| a[(i, k)] != 0) {
                Some(p) => {
                    a.swap_rows(k, p);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = ck_sub(ck_mul(a[(i, j)], a[(k, k)])?, ck_mul(a[(i, k)], a[(k, j)])?)?;
                a[(i, j)] = num / prev;
            }
            a[(i, k)] = 0;
        }
        prev = a[(k, k)];
    }
    Ok(sign * a[(n - 1, n - 1)])
}

/// `J = S·G·T` with `S`, `T` unimodular and `J` diagonal with a divisibility chain.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub s: IntMatrix,
    pub j: IntMatrix,
    pub t: IntMatrix,
}

impl SmithDecomposition {
    pub fn invariant_factors(&self) -> Vec<i128> {
        self.j.diag()
    }
}

/// `L = S·G` with `S` unimodular and `L` lower-triangular with positive diagonal.
#[derive(Clone, Debug)]
pub struct TriangularDecomposition {
    pub s: IntMatrix,
    pub l: IntMatrix,
}

/// Position of the smallest nonzero |entry| in the trailing block starting at `k`.
/// Ties go to the lowest row, then the lowest column.
fn smallest_pivot(a: &IntMatrix, k: usize) -> Option<(usize, usize)> {
    let n = a.rows();
    let mut best: Option<(i128, usize, usize)> = None;
    for i in k..n {
        for j in k..a.cols() {
            let v = a[(i, j)].abs();
            if v != 0 && best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Smith normal form by gcd elimination with smallest-entry pivoting.
pub fn smith_normal_form(g: &IntMatrix) -> Result<SmithDecomposition> {
    if !g.is_square() {
        return Err(contract("Smith normal form needs a square matrix"));
    }
    let n = g.rows();
    let mut a = g.clone();
    let mut s = IntMatrix::identity(n);
    let mut t = IntMatrix::identity(n);

    for k in 0..n {
        loop {
            let Some((pi, pj)) = smallest_pivot(&a, k) else {
                return Err(contract("Smith normal form of a singular matrix"));
            };
            a.swap_rows(k, pi);
            s.swap_rows(k, pi);
            a.swap_cols(k, pj);
            t.swap_cols(k, pj);

            let p = a[(k, k)];
            let mut clean = true;
            for i in (k + 1)..n {
                let q = a[(i, k)].div_euclid(p);
                a.sub_row_multiple(i, k, q)?;
                s.sub_row_multiple(i, k, q)?;
                clean &= a[(i, k)] == 0;
            }
            for j in (k + 1)..n {
                let q = a[(k, j)].div_euclid(p);
                a.sub_col_multiple(j, k, q)?;
                t.sub_col_multiple(j, k, q)?;
                clean &= a[(k, j)] == 0;
            }
            if !clean {
                continue;
            }
            // Divisibility: fold an offending row into the pivot row and retry.
            let offender = ((k + 1)..n).find(|&i| ((k + 1)..n).any(|j| a[(i, j)] % p != 0));
            match offender {
                Some(i) => {
                    a.sub_row_multiple(k, i, -1)?;
                    s.sub_row_multiple(k, i, -1)?;
                }
                None => break,
            }
        }
        if a[(k, k)] < 0 {
            a.negate_row(k);
            s.negate_row(k);
        }
    }
    Ok(SmithDecomposition { s, j: a, t })
}

/// Left-unimodular lower-triangularization (Hermite form with row operations).
///
/// Off-diagonal entries are reduced into `0 ≤ L_ij < L_jj`.
pub fn lower_triangularize(g: &IntMatrix) -> Result<TriangularDecomposition> {
    if !g.is_square() {
        return Err(contract("triangularization needs a square matrix"));
    }
    let n = g.rows();
    let mut l = g.clone();
    let mut s = IntMatrix::identity(n);

    for col in (0..n).rev() {
        loop {
            // Smallest nonzero entry among the active rows 0..=col.
            let pivot = (0..=col)
                .filter(|&i| l[(i, col)] != 0)
                .min_by_key(|&i| (l[(i, col)].abs(), i));
            let Some(p) = pivot else {
                return Err(contract("triangularization of a singular matrix"));
            };
            l.swap_rows(col, p);
            s.swap_rows(col, p);
            let d = l[(col, col)];
            let mut done = true;
            for i in 0..col {
                let q = l[(i, col)].div_euclid(d);
                l.sub_row_multiple(i, col, q)?;
                s.sub_row_multiple(i, col, q)?;
                done &= l[(i, col)] == 0;
            }
            if done {
                break;
            }
        }
        if l[(col, col)] < 0 {
            l.negate_row(col);
            s.negate_row(col);
        }
    }
    for i in 1..n {
        for j in (0..i).rev() {
            let q = l[(i, j)].div_euclid(l[(j, j)]);
            l.sub_row_multiple(i, j, q)?;
            s.sub_row_multiple(i, j, q)?;
        }
    }
    Ok(TriangularDecomposition { s, l })
}

/// Exact inverse of a unimodular matrix.
pub fn unimodular_inverse(u: &IntMatrix) -> Result<IntMatrix> {
    let det = det_int(u)?;
    if det.abs() != 1 {
        return Err(Error::NotUnimodular(det));
    }
    let n = u.rows();
    // S·U = L with unit diagonal, so U⁻¹ = L⁻¹·S.
    let TriangularDecomposition { s, l } = lower_triangularize(u)?;
    let mut linv = IntMatrix::zeros(n, n);
    // Solve L·X = I column by column (forward substitution, L unit lower).
    for c in 0..n {
        for i in 0..n {
            let mut acc: i128 = if i == c { 1 } else { 0 };
            for k in 0..i {
                acc = ck_sub(acc, ck_mul(l[(i, k)], linv[(k, c)])?)?;
            }
            linv[(i, c)] = acc;
        }
    }
    linv.mul(&s)
}

/// Solves `w·G = p` for an integer row vector `w`; `None` when no integer solution exists.
pub fn solve_integer_row(tri: &TriangularDecomposition, p: &[i128]) -> Result<Option<Vec<i128>>> {
    let l = &tri.l;
    let n = l.rows();
    if p.len() != n {
        return Err(contract("vector length does not match lattice dimension"));
    }
    // v·L = p, back-substitute from the last column.
    let mut v = vec![0i128; n];
    for j in (0..n).rev() {
        let mut acc = p[j];
        for (i, &vi) in v.iter().enumerate().skip(j + 1) {
            acc = ck_sub(acc, ck_mul(vi, l[(i, j)])?)?;
        }
        if acc % l[(j, j)] != 0 {
            return Ok(None);
        }
        v[j] = acc / l[(j, j)];
    }
    // G = S⁻¹·L, so w = v·S.
    tri.s.left_mul_vec(&v).map(Some)
}

/// Lower-triangular basis of the lattice spanned by arbitrary integer rows.
///
/// Rows are folded in one at a time into a Hermite-reduced basis, which keeps
/// the entries bounded by the diagonal.
pub fn lattice_basis_from_rows(rows: &[Vec<i128>], n: usize) -> Result<IntMatrix> {
    let mut basis: Vec<Option<Vec<i128>>> = vec![None; n];
    for r in rows {
        if r.len() != n {
            return Err(contract("spanning vector has wrong length"));
        }
        let mut v = r.clone();
        for col in (0..n).rev() {
            if v[col] == 0 {
                continue;
            }
            match basis[col].take() {
                None => {
                    if v[col] < 0 {
                        v.iter_mut().for_each(|x| *x = -*x);
                    }
                    basis[col] = Some(v);
                    break;
                }
                Some(mut b) => {
                    // Euclid on the pivot entries of b and v.
                    while v[col] != 0 {
                        let q = b[col].div_euclid(v[col]);
                        for k in 0..=col {
                            b[k] = ck_sub(b[k], ck_mul(q, v[k])?)?;
                        }
                        std::mem::swap(&mut b, &mut v);
                    }
                    if b[col] < 0 {
                        b.iter_mut().for_each(|x| *x = -*x);
                    }
                    basis[col] = Some(b);
                }
            }
        }
        // Keep entries small: reduce every stored row against lower pivots.
        for col in 0..n {
            let Some(mut b) = basis[col].take() else {
                continue;
            };
            for j in (0..col).rev() {
                if let Some(pj) = &basis[j] {
                    let q = b[j].div_euclid(pj[j]);
                    if q != 0 {
                        for k in 0..=j {
                            b[k] = ck_sub(b[k], ck_mul(q, pj[k])?)?;
                        }
                    }
                }
            }
            basis[col] = Some(b);
        }
    }
    let mut out = IntMatrix::zeros(n, n);
    for (i, b) in basis.into_iter().enumerate() {
        let b = b.ok_or_else(|| contract("spanning set does not have full rank"))?;
        for (j, v) in b.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}
