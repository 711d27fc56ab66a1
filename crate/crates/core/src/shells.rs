//! Integer shells `{v ∈ Zⁿ : ‖v‖² = r²}`: counts, enumeration and uniform sampling.
//!
//! A shell splits into square decompositions: multisets of positive integers
//! whose squares sum to r². Each decomposition with k parts contributes
//! `n!/((n−k)!·∏mult!)·2^k` points (positions times signs).

use crate::error::{Error, Result};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Default ceiling on the number of points [`enumerate_shell`] will materialize.
pub const ENUMERATION_CAP: u64 = 10_000_000;

/// Positive parts (in non-increasing order) of one way to write r² as a sum of squares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareDecomposition {
    pub parts: Vec<u32>,
    /// Number of shell points with this absolute-value pattern.
    pub count: u64,
}

type Cache = Mutex<HashMap<(usize, u64), Arc<Vec<SquareDecomposition>>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn arrangements(n: usize, parts: &[u32]) -> Option<u64> {
    // C(n, k) · k!/∏mult! · 2^k, built from exact binomials.
    let k = parts.len();
    let mut acc = binomial(n as u64, k as u64)?;
    let mut left = k as u64;
    let mut i = 0;
    while i < k {
        let mut j = i;
        while j < k && parts[j] == parts[i] {
            j += 1;
        }
        acc = acc.checked_mul(binomial(left, (j - i) as u64)?)?;
        left -= (j - i) as u64;
        i = j;
    }
    let signs = 1u128.checked_shl(k as u32)?;
    u64::try_from(acc.checked_mul(signs)?).ok()
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn collect(n: usize, rem: u64, max_part: u32, stack: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if rem == 0 {
        out.push(stack.clone());
        return;
    }
    if stack.len() == n {
        return;
    }
    let top = max_part.min((rem as f64).sqrt() as u32 + 1);
    for a in (1..=top).rev() {
        let sq = a as u64 * a as u64;
        if sq > rem {
            continue;
        }
        // Remaining slots must be able to absorb what is left.
        if sq * ((n - stack.len()) as u64) < rem {
            break;
        }
        stack.push(a);
        collect(n, rem - sq, a, stack, out);
        stack.pop();
    }
}

/// All square decompositions of `r2` into at most `n` parts, with their point counts.
pub fn decompositions(n: usize, r2: u64) -> Result<Arc<Vec<SquareDecomposition>>> {
    if let Some(d) = cache().lock().unwrap().get(&(n, r2)) {
        return Ok(d.clone());
    }
    let mut raw = Vec::new();
    collect(n, r2, u32::MAX, &mut Vec::new(), &mut raw);
    let decs = raw
        .into_iter()
        .map(|parts| {
            let count = arrangements(n, &parts).ok_or(Error::Overflow("shell cardinality"))?;
            Ok(SquareDecomposition { parts, count })
        })
        .collect::<Result<Vec<_>>>()?;
    let decs = Arc::new(decs);
    cache().lock().unwrap().insert((n, r2), decs.clone());
    Ok(decs)
}

/// Number of integer vectors of squared norm `r2` in `n` dimensions.
pub fn shell_cardinality(n: usize, r2: u64) -> Result<u64> {
    decompositions(n, r2)?
        .iter()
        .try_fold(0u64, |acc, d| acc.checked_add(d.count))
        .ok_or(Error::Overflow("shell cardinality"))
}

/// Number of integer vectors of squared norm at most `r2_max`.
pub fn ball_cardinality(n: usize, r2_max: u64) -> Result<u64> {
    (0..=r2_max).try_fold(0u64, |acc, r2| {
        acc.checked_add(shell_cardinality(n, r2)?)
            .ok_or(Error::Overflow("ball cardinality"))
    })
}

/// Rearranges `v` into the next lexicographic permutation; false after the last one.
fn next_permutation(v: &mut [u32]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Calls `f` once for every integer vector of squared norm `r2`.
pub fn for_each_shell_point(n: usize, r2: u64, mut f: impl FnMut(&[i64])) -> Result<()> {
    let mut v = vec![0i64; n];
    let mut nz = Vec::with_capacity(n);
    for dec in decompositions(n, r2)?.iter() {
        let mut abs = vec![0u32; n];
        abs[n - dec.parts.len()..].copy_from_slice(&dec.parts);
        abs.sort_unstable();
        loop {
            nz.clear();
            nz.extend((0..n).filter(|&i| abs[i] != 0));
            for signs in 0u64..(1u64 << nz.len()) {
                for (i, &a) in abs.iter().enumerate() {
                    v[i] = a as i64;
                }
                for (b, &i) in nz.iter().enumerate() {
                    if signs >> b & 1 == 1 {
                        v[i] = -v[i];
                    }
                }
                f(&v);
            }
            if !next_permutation(&mut abs) {
                break;
            }
        }
    }
    Ok(())
}

/// A shell around an integer center, seen from an offset: points `center + v − offset`.
#[derive(Clone, Debug)]
pub struct ShellRef {
    pub center: Vec<i64>,
    pub r2: u64,
    pub offset: Vec<f64>,
}

impl ShellRef {
    pub fn cardinality(&self) -> Result<u64> {
        shell_cardinality(self.center.len(), self.r2)
    }
}

/// Every point of the shell, refusing shells above `cap` points.
pub fn enumerate_shell(shell: &ShellRef, cap: u64) -> Result<Vec<Vec<f64>>> {
    let n = shell.center.len();
    let size = shell.cardinality()?;
    if size > cap {
        return Err(Error::TooLargeToEnumerate {
            what: "shell",
            size: size as u128,
            limit: cap as u128,
        });
    }
    let mut out = Vec::with_capacity(size as usize);
    for_each_shell_point(n, shell.r2, |v| {
        out.push(
            (0..n)
                .map(|i| (shell.center[i] + v[i]) as f64 - shell.offset[i])
                .collect(),
        );
    })?;
    Ok(out)
}

/// Uniform sampler over the integer vectors of squared norm `r2`.
#[derive(Clone, Debug)]
pub struct ShellSampler {
    n: usize,
    decs: Arc<Vec<SquareDecomposition>>,
    pick: Option<WeightedIndex<u64>>,
}

impl ShellSampler {
    pub fn new(n: usize, r2: u64) -> Result<Self> {
        let decs = decompositions(n, r2)?;
        let pick = if decs.is_empty() {
            None
        } else {
            Some(
                WeightedIndex::new(decs.iter().map(|d| d.count))
                    .map_err(|e| Error::Contract(e.to_string()))?,
            )
        };
        Ok(ShellSampler { n, decs, pick })
    }

    /// False when no integer vector has this squared norm.
    pub fn is_nonempty(&self) -> bool {
        self.pick.is_some()
    }

    /// Writes one uniform draw into `out`; panics on an empty shell.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [i64]) {
        let dec = &self.decs[self.pick.as_ref().expect("empty shell").sample(rng)];
        out.iter_mut().for_each(|v| *v = 0);
        for (o, &p) in out.iter_mut().zip(&dec.parts) {
            *o = if rng.gen::<bool>() {
                p as i64
            } else {
                -(p as i64)
            };
        }
        out[..self.n].shuffle(rng);
    }
}

/// `k` independent uniform draws from the shell.
pub fn sample_shell_uniform<R: Rng + ?Sized>(
    shell: &ShellRef,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let n = shell.center.len();
    let sampler = ShellSampler::new(n, shell.r2)?;
    if !sampler.is_nonempty() {
        return Ok(Vec::new());
    }
    let mut v = vec![0i64; n];
    Ok((0..k)
        .map(|_| {
            sampler.sample_into(rng, &mut v);
            (0..n)
                .map(|i| (shell.center[i] + v[i]) as f64 - shell.offset[i])
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    /// Counts by dynamic programming over coordinates.
    fn dp_counts(n: usize, r2_max: usize) -> Vec<u128> {
        let mut ways = vec![0u128; r2_max + 1];
        ways[0] = 1;
        for _ in 0..n {
            let mut next = vec![0u128; r2_max + 1];
            for (s, &w) in ways.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                let mut a = 0usize;
                while s + a * a <= r2_max {
                    next[s + a * a] += if a == 0 { w } else { 2 * w };
                    a += 1;
                }
            }
            ways = next;
        }
        ways
    }

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn closed_forms() {
        for n in 1..=12usize {
            assert_eq!(shell_cardinality(n, 1).unwrap(), 2 * n as u64);
        }
        for n in 4..=12u64 {
            assert_eq!(
                shell_cardinality(n as usize, 4).unwrap(),
                16 * binom(n, 4) + 2 * n
            );
        }
        assert_eq!(shell_cardinality(4, 3).unwrap(), 32);
        assert_eq!(shell_cardinality(5, 0).unwrap(), 1);
    }

    #[test]
    fn matches_box_enumeration() {
        for n in 1..=6usize {
            let mut hist = [0u64; 17];
            let mut v = vec![-4i64; n];
            loop {
                let s: i64 = v.iter().map(|x| x * x).sum();
                if s <= 16 {
                    hist[s as usize] += 1;
                }
                let mut i = 0;
                while i < n && v[i] == 4 {
                    v[i] = -4;
                    i += 1;
                }
                if i == n {
                    break;
                }
                v[i] += 1;
            }
            for (r2, &c) in hist.iter().enumerate() {
                assert_eq!(shell_cardinality(n, r2 as u64).unwrap(), c, "n={n} r2={r2}");
            }
        }
    }

    #[test]
    fn matches_dp_up_to_32_dims() {
        for n in [1usize, 2, 7, 8, 16, 24, 32] {
            let dp = dp_counts(n, 25);
            for r2 in 0..=25 {
                assert_eq!(
                    u128::from(shell_cardinality(n, r2 as u64).unwrap()),
                    dp[r2],
                    "n={n} r2={r2}"
                );
            }
        }
    }

    #[test]
    fn ball_counts() {
        assert_eq!(ball_cardinality(8, 4).unwrap(), 1713);
        assert_eq!(ball_cardinality(8, 22).unwrap(), 1_025_649);
        assert_eq!(
            u128::from(ball_cardinality(4, 20).unwrap()),
            dp_counts(4, 20).iter().sum::<u128>()
        );
        assert_eq!(ball_cardinality(4, 20).unwrap(), 2041);
    }

    #[test]
    fn enumeration_is_exact() {
        for (n, r2) in [(4usize, 2u64), (8, 1), (3, 9), (5, 7), (8, 4), (6, 0)] {
            let mut seen = std::collections::HashSet::new();
            for_each_shell_point(n, r2, |v| {
                assert_eq!(v.iter().map(|x| x * x).sum::<i64>() as u64, r2);
                assert!(seen.insert(v.to_vec()));
            })
            .unwrap();
            assert_eq!(seen.len() as u64, shell_cardinality(n, r2).unwrap());
        }
        let s = ShellRef {
            center: vec![3, -1],
            r2: 0,
            offset: vec![0.25, -0.5],
        };
        assert_eq!(enumerate_shell(&s, 10).unwrap(), vec![vec![2.75, -0.5]]);
    }

    #[test]
    fn enumeration_sum_equals_ball() {
        for n in [2usize, 4, 8] {
            let mut total = 0u64;
            for r2 in 0..=12 {
                for_each_shell_point(n, r2, |_| total += 1).unwrap();
            }
            assert_eq!(total, ball_cardinality(n, 12).unwrap());
        }
    }

    #[test]
    fn cap_is_enforced() {
        let s = ShellRef {
            center: vec![0; 8],
            r2: 4,
            offset: vec![0.0; 8],
        };
        assert!(matches!(
            enumerate_shell(&s, 100),
            Err(Error::TooLargeToEnumerate { size: 1136, .. })
        ));
    }

    #[test]
    fn sampling_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let sampler = ShellSampler::new(4, 2).unwrap();
        let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
        let mut v = [0i64; 4];
        let draws = 1_000_000u64;
        for _ in 0..draws {
            sampler.sample_into(&mut rng, &mut v);
            *counts.entry(v.to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let expect = draws as f64 / 24.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        // 23 degrees of freedom; the 0.999 quantile is 49.7.
        assert!(chi2 < 49.7, "chi2 = {chi2}");
    }

    #[test]
    fn sampling_pattern_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let sampler = ShellSampler::new(8, 4).unwrap();
        let mut v = [0i64; 8];
        let draws = 200_000u64;
        let mut single = 0u64;
        for _ in 0..draws {
            sampler.sample_into(&mut rng, &mut v);
            assert_eq!(v.iter().map(|x| x * x).sum::<i64>(), 4);
            if v.iter().any(|&x| x.abs() == 2) {
                single += 1;
            }
        }
        let p = 16.0 / 1136.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((single as f64 - draws as f64 * p).abs() < 4.0 * sd);
    }

    #[test]
    fn empty_shells() {
        // 7 is not a sum of three squares.
        assert_eq!(shell_cardinality(3, 7).unwrap(), 0);
        assert!(!ShellSampler::new(3, 7).unwrap().is_nonempty());
    }
}
