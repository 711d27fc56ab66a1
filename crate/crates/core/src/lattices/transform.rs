//! Scaled and rotated copies of a lattice, `m·Λ·R`.

use super::Lattice;
use crate::error::{contract, Result};
use crate::intlinalg::IntMatrix;

/// Block-diagonal matrix with 2×2 blocks `[[1, 1], [−1, 1]]`.
pub fn rotation_matrix(n: usize) -> Result<IntMatrix> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(contract("rotation needs an even dimension"));
    }
    let mut r = IntMatrix::zeros(n, n);
    for b in (0..n).step_by(2) {
        r[(b, b)] = 1;
        r[(b, b + 1)] = 1;
        r[(b + 1, b)] = -1;
        r[(b + 1, b + 1)] = 1;
    }
    Ok(r)
}

/// `x ↦ m·x·R` (scale first, then the optional rotation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineTransform {
    pub scale: f64,
    pub rotated: bool,
}

impl AffineTransform {
    pub fn new(scale: f64, rotated: bool) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(contract("transform scale must be positive and finite"));
        }
        Ok(AffineTransform { scale, rotated })
    }

    pub fn identity() -> Self {
        AffineTransform {
            scale: 1.0,
            rotated: false,
        }
    }

    /// `out = m·x·R`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.scale;
        if self.rotated {
            for (o, p) in out.chunks_exact_mut(2).zip(x.chunks_exact(2)) {
                o[0] = m * (p[0] - p[1]);
                o[1] = m * (p[0] + p[1]);
            }
        } else {
            for (o, &v) in out.iter_mut().zip(x) {
                *o = m * v;
            }
        }
    }

    /// `out = (1/m)·x·R⁻¹`, with `R⁻¹ = Rᵀ/2`.
    pub fn apply_inverse(&self, x: &[f64], out: &mut [f64]) {
        let m = self.scale;
        if self.rotated {
            let k = 0.5 / m;
            for (o, p) in out.chunks_exact_mut(2).zip(x.chunks_exact(2)) {
                o[0] = k * (p[0] + p[1]);
                o[1] = k * (p[1] - p[0]);
            }
        } else {
            for (o, &v) in out.iter_mut().zip(x) {
                *o = v / m;
            }
        }
    }

    /// Volume factor `mⁿ·2^{n/2}` (rotation) or `mⁿ`.
    pub fn volume_factor(&self, n: usize) -> f64 {
        let r = if self.rotated {
            2f64.powi(n as i32 / 2)
        } else {
            1.0
        };
        self.scale.powi(n as i32) * r
    }
}

/// `Q_{T(Λ)}(x) = T(Q_Λ(T⁻¹(x)))`.
pub fn quantize_transformed(lat: &Lattice, tf: &AffineTransform, x: &[f64]) -> Result<Vec<f64>> {
    let n = lat.dim();
    if x.len() != n {
        return Err(contract("vector length does not match lattice dimension"));
    }
    if tf.rotated && !n.is_multiple_of(2) {
        return Err(contract("rotation needs an even dimension"));
    }
    let mut t = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut out = vec![0.0; n];
    tf.apply_inverse(x, &mut t);
    lat.quantize_into(&t, &mut q);
    tf.apply(&q, &mut out);
    Ok(out)
}

/// A shaping lattice `m·Λ_s` or `m·Λ_s·R` with integer scale `m`.
#[derive(Clone, Debug)]
pub struct ShapingLattice {
    base: Lattice,
    m: i64,
    rotated: bool,
    tf: AffineTransform,
}

impl ShapingLattice {
    pub fn new(base: Lattice, m: i64, rotated: bool) -> Result<Self> {
        if m < 1 {
            return Err(contract("scale must be a positive integer"));
        }
        if rotated && !base.dim().is_multiple_of(2) {
            return Err(contract("rotation needs an even dimension"));
        }
        let tf = AffineTransform::new(m as f64, rotated)?;
        Ok(ShapingLattice {
            base,
            m,
            rotated,
            tf,
        })
    }

    pub fn base(&self) -> &Lattice {
        &self.base
    }

    pub fn scale(&self) -> i64 {
        self.m
    }

    pub fn rotated(&self) -> bool {
        self.rotated
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn label(&self) -> String {
        format!(
            "{}{}{}",
            self.m,
            self.base.label(),
            if self.rotated { "R" } else { "" }
        )
    }

    /// Fundamental volume of the transformed lattice.
    pub fn volume(&self) -> f64 {
        self.base.volume() * self.tf.volume_factor(self.dim())
    }

    /// Base-lattice generator times `R` (if rotated), still over `denom`.
    pub fn unscaled_integer_generator(&self) -> Result<IntMatrix> {
        let b = self.base.integer_basis();
        if self.rotated {
            b.mul(&rotation_matrix(self.dim())?)
        } else {
            Ok(b.clone())
        }
    }

    /// Integer generator `m·G·R`, or a contract error when it is not integral.
    pub fn integer_generator(&self) -> Result<IntMatrix> {
        let g = self.unscaled_integer_generator()?.scale(self.m as i128)?;
        g.div_exact(self.base.denom())
            .ok_or_else(|| contract(format!("{} is not an integer lattice", self.label())))
    }

    pub fn quantize_into(&self, x: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        self.tf.apply_inverse(x, scratch);
        self.base.quantize_into(scratch, out);
        scratch.copy_from_slice(out);
        self.tf.apply(scratch, out);
    }

    pub fn quantize(&self, x: &[f64]) -> Result<Vec<f64>> {
        quantize_transformed(&self.base, &self.tf, x)
    }

    /// True when the origin is a closest point of the transformed lattice to `x`.
    pub fn in_voronoi_region(&self, x: &[f64], scratch: &mut [f64]) -> bool {
        self.tf.apply_inverse(x, scratch);
        self.base.in_voronoi_region(scratch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::det_int;
    use crate::lattices::{build_named, LatticeName};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rotation_blocks() {
        assert_eq!(
            rotation_matrix(2).unwrap().to_rows(),
            vec![vec![1, 1], vec![-1, 1]]
        );
        assert_eq!(det_int(&rotation_matrix(8).unwrap()).unwrap(), 16);
        let r = rotation_matrix(4).unwrap();
        assert_eq!(
            r.mul(&r.transpose()).unwrap(),
            IntMatrix::identity(4).scale(2).unwrap()
        );
        assert!(rotation_matrix(3).is_err());
    }

    #[test]
    fn transform_inverse_roundtrip() {
        let tf = AffineTransform::new(4.0, true).unwrap();
        let x = [0.3, -1.7, 2.5, 9.0];
        let mut y = [0.0; 4];
        let mut z = [0.0; 4];
        tf.apply(&x, &mut y);
        tf.apply_inverse(&y, &mut z);
        for (a, b) in x.iter().zip(&z) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_z2_matches_brute_force() {
        let z2 = build_named(LatticeName::Z(2)).unwrap();
        let tf = AffineTransform::new(1.0, true).unwrap();
        let q = quantize_transformed(&z2, &tf, &[1.9, 0.2]).unwrap();
        // Z²R consists of integer points with even coordinate sum.
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for a in -4..=4 {
            for b in -4..=4 {
                if (a + b) % 2 == 0 {
                    let d = (1.9 - a as f64).powi(2) + (0.2 - b as f64).powi(2);
                    if d < best.0 {
                        best = (d, [a as f64, b as f64]);
                    }
                }
            }
        }
        assert_eq!(q, best.1.to_vec());
    }

    #[test]
    fn scaled_e8_is_scaled_quantizer() {
        let e8 = build_named(LatticeName::E8).unwrap();
        let s = ShapingLattice::new(e8.clone(), 8, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-20.0..20.0)).collect();
            let direct: Vec<f64> = e8
                .quantize(&x.iter().map(|v| v / 8.0).collect::<Vec<_>>())
                .unwrap()
                .iter()
                .map(|v| 8.0 * v)
                .collect();
            assert_eq!(s.quantize(&x).unwrap(), direct);
        }
        assert_eq!(
            ShapingLattice::new(build_named(LatticeName::D(4)).unwrap(), 16, false)
                .unwrap()
                .quantize(&[0.0; 4])
                .unwrap(),
            vec![0.0; 4]
        );
    }

    #[test]
    fn integer_generators() {
        let e8 = build_named(LatticeName::E8).unwrap();
        let g = ShapingLattice::new(e8.clone(), 8, false)
            .unwrap()
            .integer_generator()
            .unwrap();
        assert_eq!(det_int(&g).unwrap().abs(), 1 << 24);
        assert!(ShapingLattice::new(e8, 1, false)
            .unwrap()
            .integer_generator()
            .is_err());
        let d4r = ShapingLattice::new(build_named(LatticeName::D(4)).unwrap(), 1, true).unwrap();
        assert_eq!(det_int(&d4r.integer_generator().unwrap()).unwrap().abs(), 8);
        assert_eq!(d4r.volume(), 8.0);
    }
}
