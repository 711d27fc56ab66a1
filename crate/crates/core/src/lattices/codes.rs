//! Binary codes used to glue the Construction-B style lattices.

/// Codewords of the first-order Reed–Muller code RM(1, m), length 2^m.
///
/// Codeword `(a, b)` evaluates the affine function `a·x ⊕ b` at every
/// `x ∈ F₂^m`; the all-zero word comes first.
pub fn reed_muller_1(m: u32) -> Vec<Vec<u8>> {
    let len = 1usize << m;
    let mut words = Vec::with_capacity(2 * len);
    for b in 0..2u8 {
        for a in 0..len {
            words.push(
                (0..len)
                    .map(|x| (((a & x).count_ones() as u8) & 1) ^ b)
                    .collect(),
            );
        }
    }
    words
}

/// Generator rows of RM(1, m): the all-ones word and the m coordinate functions.
pub fn reed_muller_1_generators(m: u32) -> Vec<Vec<u8>> {
    let len = 1usize << m;
    let mut rows = vec![vec![1u8; len]];
    for bit in 0..m {
        rows.push((0..len).map(|x| ((x >> bit) & 1) as u8).collect());
    }
    rows
}

/// Generator polynomial of the cyclic (23, 12) Golay code,
/// 1 + x² + x⁴ + x⁵ + x⁶ + x¹⁰ + x¹¹.
const GOLAY_POLY: u32 = 0b1100_0111_0101;

/// Generator rows of the extended (24, 12, 8) Golay code.
pub fn golay24_generators() -> Vec<Vec<u8>> {
    (0..12)
        .map(|shift| {
            let word = GOLAY_POLY << shift;
            let mut row: Vec<u8> = (0..23).map(|i| ((word >> i) & 1) as u8).collect();
            let parity = row.iter().fold(0u8, |acc, &b| acc ^ b);
            row.push(parity);
            row
        })
        .collect()
}

/// All 4096 codewords of the extended Golay code.
pub fn golay24_codewords() -> Vec<Vec<u8>> {
    let gens = golay24_generators();
    (0..1u32 << 12)
        .map(|mask| {
            let mut w = vec![0u8; 24];
            for (k, g) in gens.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    for (wi, gi) in w.iter_mut().zip(g) {
                        *wi ^= gi;
                    }
                }
            }
            w
        })
        .collect()
}
