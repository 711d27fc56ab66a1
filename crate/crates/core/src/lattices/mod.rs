//! Lattice catalog and closest-point quantizers.
//!
//! Every lattice is stored through an integer lower-triangular basis of
//! `denom·Λ`; `denom` is 1 except for E₈, whose half-integer coset needs 2.
//! Points are row vectors: `Λ = {u·G}`.

pub mod codes;
mod nsm;
pub mod quantizers;
mod transform;

pub use nsm::{nsm_estimate, reference_shaping_gain_db, NsmEstimate};
pub use transform::{quantize_transformed, rotation_matrix, AffineTransform, ShapingLattice};

use crate::error::{contract, Error, Result};
use crate::intlinalg::{
    det_int, lattice_basis_from_rows, solve_integer_row, IntMatrix, TriangularDecomposition,
};
use quantizers::{BoxSearch, CosetUnion};

/// Quantizer strategy attached to a lattice.
#[derive(Clone, Debug)]
pub enum QuantizerKind {
    Cubic,
    Checkerboard,
    Gosset,
    CosetUnion(CosetUnion),
    BoxSearch(BoxSearch),
}

/// Named lattice families understood by [`build_named`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeName {
    Z(usize),
    D(usize),
    E8,
    Bw16,
    Leech24,
    L32,
}

impl LatticeName {
    pub fn dim(self) -> usize {
        match self {
            LatticeName::Z(n) | LatticeName::D(n) => n,
            LatticeName::E8 => 8,
            LatticeName::Bw16 => 16,
            LatticeName::Leech24 => 24,
            LatticeName::L32 => 32,
        }
    }

    pub fn canonical(self) -> String {
        match self {
            LatticeName::Z(n) => format!("Z{n}"),
            LatticeName::D(n) => format!("D{n}"),
            LatticeName::E8 => "E8".into(),
            LatticeName::Bw16 => "BW16".into(),
            LatticeName::Leech24 => "Leech24".into(),
            LatticeName::L32 => "L32".into(),
        }
    }
}

impl std::fmt::Display for LatticeName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Parses `Z`, `Z4`, `D4`, `E8`, `BW16`, `Leech24` or `L32`.
///
/// A bare `Z` needs `default_dim`.
pub fn parse_lattice_name(s: &str, default_dim: Option<usize>) -> Result<LatticeName> {
    let bad = || Error::UnsupportedLattice(s.to_string());
    let lower = s.trim().to_ascii_lowercase();
    let name = match lower.as_str() {
        "e8" => LatticeName::E8,
        "bw16" | "lambda16" | "l16" => LatticeName::Bw16,
        "leech24" | "leech" | "lambda24" | "l24" => LatticeName::Leech24,
        "l32" => LatticeName::L32,
        "z" => LatticeName::Z(default_dim.ok_or_else(bad)?),
        _ => {
            let (head, digits) = lower.split_at(1);
            let n: usize = digits.parse().map_err(|_| bad())?;
            match head {
                "z" if n >= 1 => LatticeName::Z(n),
                "d" if n >= 2 => LatticeName::D(n),
                _ => return Err(bad()),
            }
        }
    };
    if let Some(d) = default_dim {
        if name.dim() != d {
            return Err(bad());
        }
    }
    Ok(name)
}

/// A full-rank lattice with an exact closest-point quantizer.
#[derive(Clone, Debug)]
pub struct Lattice {
    label: String,
    name: Option<LatticeName>,
    basis: IntMatrix,
    denom: i128,
    kind: QuantizerKind,
    min_norm: f64,
}

fn checkerboard_rows(n: usize, scale: i128) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| {
            let mut r = vec![0i128; n];
            if i == 0 {
                r[0] = 2 * scale;
            } else {
                r[i - 1] = -scale;
                r[i] = scale;
            }
            r
        })
        .collect()
}

fn bits_to_i128(word: &[u8], scale: i128) -> Vec<i128> {
    word.iter().map(|&b| scale * b as i128).collect()
}

/// Builds one of the cataloged lattices.
pub fn build_named(name: LatticeName) -> Result<Lattice> {
    let n = name.dim();
    let (basis, denom, kind, min_norm) = match name {
        LatticeName::Z(n) => (IntMatrix::identity(n), 1, QuantizerKind::Cubic, 1.0),
        LatticeName::D(n) => (
            lattice_basis_from_rows(&checkerboard_rows(n, 1), n)?,
            1,
            QuantizerKind::Checkerboard,
            2.0,
        ),
        LatticeName::E8 => {
            let mut rows = checkerboard_rows(8, 2);
            rows.push(vec![1; 8]);
            (
                lattice_basis_from_rows(&rows, 8)?,
                2,
                QuantizerKind::Gosset,
                2.0,
            )
        }
        LatticeName::Bw16 => construction_b(4)?,
        LatticeName::L32 => construction_b(5)?,
        LatticeName::Leech24 => {
            let mut rows = checkerboard_rows(24, 4);
            rows.extend(
                codes::golay24_generators()
                    .iter()
                    .map(|g| bits_to_i128(g, 2)),
            );
            let mut odd = vec![1i128; 24];
            odd[0] = -3;
            rows.push(odd);
            let mut reps = Vec::with_capacity(8192);
            for c in codes::golay24_codewords() {
                let even: Vec<i64> = c.iter().map(|&b| 2 * b as i64).collect();
                let mut odd: Vec<i64> = c.iter().map(|&b| 1 + 2 * b as i64).collect();
                odd[0] -= 4;
                reps.push(even);
                reps.push(odd);
            }
            (
                lattice_basis_from_rows(&rows, 24)?,
                1,
                QuantizerKind::CosetUnion(CosetUnion::new(24, 4, reps)),
                32.0,
            )
        }
    };
    debug_assert_eq!(basis.rows(), n);
    Ok(Lattice {
        label: name.canonical(),
        name: Some(name),
        basis,
        denom,
        kind,
        min_norm,
    })
}

/// Construction B from RM(1, m): the union of the 2^{m+1} cosets `c + 2D_{2^m}`.
fn construction_b(m: u32) -> Result<(IntMatrix, i128, QuantizerKind, f64)> {
    let n = 1usize << m;
    let mut rows = checkerboard_rows(n, 2);
    rows.extend(
        codes::reed_muller_1_generators(m)
            .iter()
            .map(|g| bits_to_i128(g, 1)),
    );
    let reps: Vec<Vec<i64>> = codes::reed_muller_1(m)
        .iter()
        .map(|w| w.iter().map(|&b| b as i64).collect())
        .collect();
    Ok((
        lattice_basis_from_rows(&rows, n)?,
        1,
        QuantizerKind::CosetUnion(CosetUnion::new(n, 2, reps)),
        8.0,
    ))
}

impl Lattice {
    /// A small custom integer lattice, quantized by exhaustive box search.
    pub fn custom(label: &str, rows: &[Vec<i128>]) -> Result<Lattice> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(contract("custom generator must be square"));
        }
        if det_int(&IntMatrix::from_rows(rows))? == 0 {
            return Err(contract("custom generator is singular"));
        }
        let real: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect();
        let search = BoxSearch::new(real).ok_or_else(|| {
            contract(format!(
                "custom lattices are limited to dimension {}",
                quantizers::BOX_SEARCH_MAX_DIM
            ))
        })?;
        let min_norm = search.min_norm();
        Ok(Lattice {
            label: label.to_string(),
            name: None,
            basis: lattice_basis_from_rows(rows, n)?,
            denom: 1,
            kind: QuantizerKind::BoxSearch(search),
            min_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn name(&self) -> Option<LatticeName> {
        self.name
    }

    pub fn kind(&self) -> &QuantizerKind {
        &self.kind
    }

    /// Lower-triangular integer basis of `denom·Λ`.
    pub fn integer_basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn denom(&self) -> i128 {
        self.denom
    }

    /// Real generator rows.
    pub fn generator_f64(&self) -> Vec<Vec<f64>> {
        let d = self.denom as f64;
        self.basis
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(|v| v as f64 / d).collect())
            .collect()
    }

    /// Fundamental volume |det G|.
    pub fn volume(&self) -> f64 {
        let n = self.dim() as i32;
        self.basis.diag().iter().map(|&v| v as f64).product::<f64>() / (self.denom as f64).powi(n)
    }

    /// Squared minimum distance.
    pub fn min_norm(&self) -> f64 {
        self.min_norm
    }

    /// Number of cosets of the base lattice, for coset-union lattices.
    pub fn index(&self) -> Option<usize> {
        match &self.kind {
            QuantizerKind::CosetUnion(c) => Some(c.index()),
            _ => None,
        }
    }

    /// Closest lattice point to `x`; `x` and `out` must have length `dim()`.
    pub fn quantize_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            QuantizerKind::Cubic => quantizers::quantize_cubic(x, out),
            QuantizerKind::Checkerboard => quantizers::quantize_checkerboard(x, out),
            QuantizerKind::Gosset => quantizers::quantize_gosset(x, out),
            QuantizerKind::CosetUnion(c) => c.quantize(x, out),
            QuantizerKind::BoxSearch(b) => b.quantize(x, out),
        }
    }

    /// Closest lattice point to `x`.
    pub fn quantize(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(contract(format!(
                "vector of length {} given to a {}-dimensional lattice",
                x.len(),
                self.dim()
            )));
        }
        let mut out = vec![0.0; x.len()];
        self.quantize_into(x, &mut out);
        Ok(out)
    }

    /// True when the origin is a closest lattice point to `x`.
    pub fn in_voronoi_region(&self, x: &[f64]) -> bool {
        match &self.kind {
            QuantizerKind::CosetUnion(c) => c.origin_is_closest(x),
            QuantizerKind::Cubic => x.iter().all(|&v| quantizers::round_half_down(v) == 0.0),
            _ if x.len() <= 64 => {
                let mut buf = [0.0; 64];
                let out = &mut buf[..x.len()];
                self.quantize_into(x, out);
                out.iter().all(|&v| v == 0.0)
            }
            _ => {
                let mut out = vec![0.0; x.len()];
                self.quantize_into(x, &mut out);
                out.iter().all(|&v| v == 0.0)
            }
        }
    }

    /// Integer coordinates `u` with `u·G = p`, or `None` when `p ∉ Λ`.
    pub fn coordinates(&self, p: &[f64]) -> Result<Option<Vec<i128>>> {
        if p.len() != self.dim() {
            return Err(contract("point dimension does not match lattice"));
        }
        let mut scaled = Vec::with_capacity(p.len());
        for &v in p {
            let s = v * self.denom as f64;
            if s.fract() != 0.0 || s.abs() > 1e15 {
                return Ok(None);
            }
            scaled.push(s as i128);
        }
        self.coordinates_scaled(&scaled)
    }

    /// As [`Lattice::coordinates`] for a point already multiplied by `denom`.
    pub fn coordinates_scaled(&self, p: &[i128]) -> Result<Option<Vec<i128>>> {
        let tri = TriangularDecomposition {
            s: IntMatrix::identity(self.dim()),
            l: self.basis.clone(),
        };
        solve_integer_row(&tri, p)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        matches!(self.coordinates(p), Ok(Some(_)))
    }
}
