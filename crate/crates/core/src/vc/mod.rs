//! Voronoi constellations `Γ = (Λ − a) ∩ Ω(Λ_s)`.
//!
//! The coding lattice is Zⁿ for the Kurkoski, Feng and Ferdinand mappings;
//! the Conway–Sloane mapping handles self-similar partitions `Λ/mΛ`.

mod labels;
mod mapping;
mod merits;
mod offset;
mod spec;

pub use labels::{gray_decode, gray_encode, GrayPenaltyMode};
pub use merits::{gamma_pam, MeritReport};
pub use spec::{parse_vc_spec, VcSpec};

use crate::error::{contract, Error, Result};
use crate::intlinalg::{lower_triangularize, smith_normal_form, unimodular_inverse, IntMatrix};
use crate::lattices::{build_named, Lattice, LatticeName, ShapingLattice};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Integer-to-point mapping algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mapping {
    Kurkoski,
    Feng,
    Ferdinand,
    /// Self-similar mapping `x = uG − a − Q_{mΛ}(uG − a)`.
    Cs83,
}

impl Mapping {
    pub fn parse(s: &str) -> Result<Mapping> {
        match s.to_ascii_lowercase().as_str() {
            "kurkoski" => Ok(Mapping::Kurkoski),
            "feng" => Ok(Mapping::Feng),
            "ferdinand" => Ok(Mapping::Ferdinand),
            "cs83" | "conway-sloane" | "conway_sloane" => Ok(Mapping::Cs83),
            _ => Err(Error::Config(format!("unknown mapping `{s}`"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mapping::Kurkoski => "kurkoski",
            Mapping::Feng => "feng",
            Mapping::Ferdinand => "ferdinand",
            Mapping::Cs83 => "cs83",
        }
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the offset `a` is chosen at construction.
#[derive(Clone, Debug, PartialEq)]
pub enum OffsetPolicy {
    /// Use the vector as given (no perturbation).
    Exact(Vec<f64>),
    /// Uniform in `[−½, ½)ⁿ`, then perturbed.
    Random { seed: u64 },
    /// Centroid descent from several starts, then perturbed.
    Optimized { seed: u64, starts: usize },
    /// Optimized when `M ≤ 2¹⁷`, random otherwise.
    Auto { seed: u64 },
}

/// Largest constellation for which the offset is optimized by enumeration.
pub const OFFSET_ENUMERATION_LIMIT: u64 = 1 << 17;

/// Precomputed data for the integer mappings.
#[derive(Clone, Debug)]
pub struct MappingTables {
    /// Lower-triangular `L = S·G_s` (Kurkoski, Ferdinand, and the reduction used by Feng).
    pub l: Vec<Vec<i64>>,
    /// Rows `l_i / L_ii` (Ferdinand only).
    pub ferdinand_rows: Option<Vec<Vec<i64>>>,
    /// Smith data `(J diagonal, T reduced column-wise mod J, T⁻¹)` (Feng only).
    pub smith: Option<(Vec<i64>, Vec<Vec<i64>>, Vec<Vec<i128>>)>,
    /// Integer generator of the coding lattice scaled by its denominator (Cs83 only).
    pub coding_basis: Option<(Vec<Vec<i64>>, i64)>,
    /// Per-coordinate message ranges.
    pub ranges: Vec<i64>,
}

/// A Voronoi constellation with a chosen integer mapping.
#[derive(Clone, Debug)]
pub struct VoronoiConstellation {
    label: String,
    coding: Lattice,
    shaping: ShapingLattice,
    offset: Vec<f64>,
    mapping: Mapping,
    tables: MappingTables,
    size: BigUint,
    /// Bits per coordinate when every range is a power of two.
    bits: Option<Vec<u32>>,
}

/// Reusable buffers for encoding and decoding.
#[derive(Clone, Debug)]
pub struct Scratch {
    pub(crate) a: Vec<f64>,
    pub(crate) b: Vec<f64>,
    pub(crate) c: Vec<f64>,
    pub(crate) w: Vec<i128>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: vec![0.0; n],
            w: vec![0; n],
        }
    }
}

fn to_i64(m: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    m.to_rows()
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|v| i64::try_from(v).map_err(|_| Error::Overflow("mapping table")))
                .collect()
        })
        .collect()
}

impl VoronoiConstellation {
    /// Builds a constellation from a spec string such as `Z4/16D4` or `D4/16D4`.
    ///
    /// Without an explicit mapping, Zⁿ coding uses Kurkoski and any other
    /// coding lattice uses Cs83.
    pub fn from_spec(spec: &str, mapping: Option<Mapping>, offset: OffsetPolicy) -> Result<Self> {
        let s = parse_vc_spec(spec)?;
        let coding = build_named(s.coding)?;
        let base = build_named(s.shaping)?;
        let shaping = ShapingLattice::new(base, s.m, s.rotated)?;
        let mapping = mapping.unwrap_or(if matches!(s.coding, LatticeName::Z(_)) {
            Mapping::Kurkoski
        } else {
            Mapping::Cs83
        });
        let mut vc = Self::new(coding, shaping, mapping, offset)?;
        vc.label = s.to_string();
        Ok(vc)
    }

    /// Builds a constellation from explicit lattices.
    pub fn new(
        coding: Lattice,
        shaping: ShapingLattice,
        mapping: Mapping,
        offset: OffsetPolicy,
    ) -> Result<Self> {
        let n = coding.dim();
        if shaping.dim() != n {
            return Err(contract("coding and shaping dimensions differ"));
        }
        let cubic = matches!(coding.name(), Some(LatticeName::Z(_)));
        let tables = match mapping {
            Mapping::Cs83 => Self::cs83_tables(&coding, &shaping)?,
            _ if !cubic => {
                return Err(contract(format!(
                    "{mapping} mapping needs a cubic coding lattice, got {}",
                    coding.label()
                )))
            }
            _ => Self::cubic_tables(&shaping, mapping)?,
        };
        let size = tables
            .ranges
            .iter()
            .fold(BigUint::from(1u32), |acc, &r| acc * BigUint::from(r as u64));
        let bits = tables
            .ranges
            .iter()
            .map(|&r| ((r as u64).is_power_of_two()).then(|| (r as u64).trailing_zeros()))
            .collect();
        let label = format!("{}/{}", coding.label(), shaping.label());
        let mut vc = VoronoiConstellation {
            label,
            coding,
            shaping,
            offset: vec![0.0; n],
            mapping,
            tables,
            size,
            bits,
        };
        vc.offset = vc.resolve_offset(offset)?;
        Ok(vc)
    }

    fn cubic_tables(shaping: &ShapingLattice, mapping: Mapping) -> Result<MappingTables> {
        let base = shaping.unscaled_integer_generator()?;
        let d = shaping.base().denom();
        let m = shaping.scale() as i128;
        // Tables of m·G/d follow from those of G when d divides m.
        let (g0, k) = if m % d == 0 {
            (base, m / d)
        } else {
            (
                shaping
                    .integer_generator()
                    .map_err(|_| Error::NotSublattice)?,
                1,
            )
        };
        let tri = lower_triangularize(&g0)?;
        let l = tri.l.scale(k)?;
        let n = l.rows();
        let ranges: Vec<i64> = l.diag().iter().map(|&v| v as i64).collect();
        let mut tables = MappingTables {
            l: to_i64(&l)?,
            ferdinand_rows: None,
            smith: None,
            coding_basis: None,
            ranges,
        };
        match mapping {
            Mapping::Ferdinand => {
                let mut rows = vec![vec![0i64; n]; n];
                for i in 0..n {
                    for j in 0..=i {
                        if l[(i, j)] % l[(i, i)] != 0 {
                            return Err(Error::FerdinandInapplicable { row: i, col: j });
                        }
                        rows[i][j] = (l[(i, j)] / l[(i, i)]) as i64;
                    }
                }
                tables.ferdinand_rows = Some(rows);
            }
            Mapping::Feng => {
                let snf = smith_normal_form(&g0)?;
                let j: Vec<i64> = snf.j.diag().iter().map(|&v| (v * k) as i64).collect();
                let tinv = unimodular_inverse(&snf.t)?;
                let t_red = (0..n)
                    .map(|r| {
                        (0..n)
                            .map(|c| snf.t[(r, c)].rem_euclid(j[c] as i128) as i64)
                            .collect()
                    })
                    .collect();
                tables.ranges = j.clone();
                tables.smith = Some((j, t_red, tinv.to_rows()));
            }
            _ => {}
        }
        Ok(tables)
    }

    fn cs83_tables(coding: &Lattice, shaping: &ShapingLattice) -> Result<MappingTables> {
        let same = coding.name().is_some() && coding.name() == shaping.base().name();
        if !same || shaping.rotated() {
            return Err(contract("Conway–Sloane mapping needs a partition Λ/mΛ"));
        }
        let n = coding.dim();
        let basis = to_i64(coding.integer_basis())?;
        Ok(MappingTables {
            l: vec![vec![0; n]; n],
            ferdinand_rows: None,
            smith: None,
            coding_basis: Some((basis, coding.denom() as i64)),
            ranges: vec![shaping.scale(); n],
        })
    }

    fn resolve_offset(&mut self, policy: OffsetPolicy) -> Result<Vec<f64>> {
        let n = self.dim();
        match policy {
            OffsetPolicy::Exact(a) => {
                if a.len() != n {
                    return Err(contract("offset has the wrong dimension"));
                }
                Ok(a)
            }
            OffsetPolicy::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
                Ok(offset::perturb(&a, &mut rng))
            }
            OffsetPolicy::Optimized { seed, starts } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                self.optimize_offset(1e-12, 200, starts.max(1), &mut rng)
            }
            OffsetPolicy::Auto { seed } => {
                if self.size <= BigUint::from(OFFSET_ENUMERATION_LIMIT) {
                    self.resolve_offset(OffsetPolicy::Optimized { seed, starts: 4 })
                } else {
                    self.resolve_offset(OffsetPolicy::Random { seed })
                }
            }
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.coding.dim()
    }

    pub fn coding(&self) -> &Lattice {
        &self.coding
    }

    pub fn shaping(&self) -> &ShapingLattice {
        &self.shaping
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn mapping(&self) -> Mapping {
        self.mapping
    }

    pub fn tables(&self) -> &MappingTables {
        &self.tables
    }

    /// Per-coordinate message ranges.
    pub fn ranges(&self) -> &[i64] {
        &self.tables.ranges
    }

    /// Number of points M.
    pub fn size(&self) -> &BigUint {
        &self.size
    }

    /// M as `u64`, when it fits.
    pub fn size_u64(&self) -> Option<u64> {
        u64::try_from(&self.size).ok()
    }

    /// `log₂ M`.
    pub fn log2_size(&self) -> f64 {
        let bits = self.size.bits();
        if bits <= 53 {
            (self.size_u64().unwrap() as f64).log2()
        } else {
            let shift = bits - 53;
            let top = u64::try_from(&self.size >> shift).unwrap() as f64;
            top.log2() + shift as f64
        }
    }

    /// `log₂ M` when M is a power of two.
    pub fn exact_log2_size(&self) -> Option<u64> {
        let b = self.size.bits();
        (b > 0 && self.size == BigUint::from(1u32) << (b - 1)).then_some(b - 1)
    }

    /// Same constellation with a different offset.
    pub fn with_offset(&self, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != self.dim() {
            return Err(contract("offset has the wrong dimension"));
        }
        let mut vc = self.clone();
        vc.offset = offset;
        Ok(vc)
    }

    /// Same point set under another mapping.
    pub fn with_mapping(&self, mapping: Mapping) -> Result<Self> {
        let mut vc = Self::new(
            self.coding.clone(),
            self.shaping.clone(),
            mapping,
            OffsetPolicy::Exact(self.offset.clone()),
        )?;
        vc.label = self.label.clone();
        Ok(vc)
    }

    pub fn scratch(&self) -> Scratch {
        Scratch::new(self.dim())
    }

    /// Uniformly random message.
    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R, u: &mut [i64]) {
        for (ui, &r) in u.iter_mut().zip(&self.tables.ranges) {
            *ui = rng.gen_range(0..r);
        }
    }

    /// Visits every message (in odometer order, first coordinate fastest) with its point.
    pub fn for_each_point(&self, limit: u64, mut f: impl FnMut(&[i64], &[f64])) -> Result<()> {
        let size =
            self.size_u64()
                .filter(|&s| s <= limit)
                .ok_or_else(|| Error::TooLargeToEnumerate {
                    what: "constellation",
                    size: u128::try_from(&self.size).unwrap_or(u128::MAX),
                    limit: limit as u128,
                })?;
        let n = self.dim();
        let mut u = vec![0i64; n];
        let mut x = vec![0.0; n];
        let mut s = self.scratch();
        for _ in 0..size {
            self.encode_into(&u, &mut s, &mut x);
            f(&u, &x);
            for (ui, &r) in u.iter_mut().zip(&self.tables.ranges) {
                *ui += 1;
                if *ui < r {
                    break;
                }
                *ui = 0;
            }
        }
        Ok(())
    }

    /// True when `x` lies in the shaping Voronoi region.
    pub fn in_region(&self, x: &[f64], scratch: &mut Scratch) -> bool {
        self.shaping.in_voronoi_region(x, &mut scratch.a)
    }
}
