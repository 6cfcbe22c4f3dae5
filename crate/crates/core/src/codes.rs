//! Left `M_n(F_p)`-submodules of `M_n(F_p)^t` isomorphic to `(F_p^n)^k`,
//! stored through the Morita correspondence as `k`-dimensional row spaces
//! of `F_p^{nt}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{self, Fp, FpMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub p: u64,
}

impl CodeParams {
    pub fn new(n: usize, t: usize, k: usize, p: u64) -> Result<Self> {
        if n == 0 || t == 0 || k == 0 || k > n * t {
            return Err(Error::InvalidParams(format!(
                "need 0 < k <= nt, got n={n} t={t} k={k}"
            )));
        }
        if !crate::primes::is_prime_u64(p) {
            return Err(Error::InvalidParams(format!("{p} is not prime")));
        }
        Ok(CodeParams { n, t, k, p })
    }

    /// Range `(n-1)t < k < nt` required by the averaging theorem.
    pub fn in_search_range(&self) -> bool {
        (self.n - 1) * self.t < self.k && self.k < self.n * self.t
    }

    pub fn width(&self) -> usize {
        self.n * self.t
    }

    /// Number of codes, `[nt choose k]_p`.
    pub fn count(&self) -> Option<u128> {
        gaussian_binomial(self.width(), self.k, self.p)
    }
}

/// Gaussian binomial coefficient `[n choose k]_q`, `None` on overflow.
pub fn gaussian_binomial(n: usize, k: usize, q: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let q = q as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num = num.checked_mul(q.checked_pow((n - i) as u32)?.checked_sub(1)?)?;
        den = den.checked_mul(q.checked_pow((i + 1) as u32)?.checked_sub(1)?)?;
        let g = num_integer::gcd(num, den);
        num /= g;
        den /= g;
    }
    Some(num / den)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Code {
    pub params: CodeParams,
    /// `k × nt` matrix in reduced row echelon form.
    pub rows: FpMatrix,
    pub pivots: Vec<usize>,
}

/// A tuple of `t` matrices `n × n` over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueTuple {
    pub mats: Vec<FpMatrix>,
}

impl ResidueTuple {
    pub fn zero(n: usize, t: usize) -> Self {
        ResidueTuple { mats: vec![ff::zeros(n, n); t] }
    }

    /// The `n × nt` matrix `[M_1 | … | M_t]`.
    pub fn concat(&self) -> FpMatrix {
        let n = self.mats.first().map_or(0, Vec::len);
        (0..n)
            .map(|r| self.mats.iter().flat_map(|m| m[r].iter().copied()).collect())
            .collect()
    }

    pub fn from_concat(rows: &FpMatrix, n: usize, t: usize) -> Self {
        ResidueTuple {
            mats: (0..t)
                .map(|s| rows.iter().map(|r| r[s * n..(s + 1) * n].to_vec()).collect())
                .collect(),
        }
    }
}

impl Code {
    pub fn from_rows(params: CodeParams, rows: FpMatrix) -> Result<Self> {
        let f = Fp::new(params.p);
        let mut rows = rows;
        if rows.iter().any(|r| r.len() != params.width()) {
            return Err(Error::DimensionMismatch {
                expected: params.width(),
                got: rows.first().map_or(0, Vec::len),
            });
        }
        let pivots = ff::rref(&f, &mut rows);
        if pivots.len() != params.k {
            return Err(Error::InvalidParams(format!(
                "rows have rank {}, expected k = {}",
                pivots.len(),
                params.k
            )));
        }
        Ok(Code { params, rows, pivots })
    }

    /// Whether every row of `[v_1 | … | v_t]` lies in the row space.
    pub fn contains(&self, v: &ResidueTuple) -> bool {
        let f = Fp::new(self.params.p);
        v.concat().iter().all(|r| ff::in_rref_span(&f, &self.rows, &self.pivots, r))
    }

    pub fn contains_rows(&self, rows: &FpMatrix) -> bool {
        let f = Fp::new(self.params.p);
        rows.iter().all(|r| ff::in_rref_span(&f, &self.rows, &self.pivots, r))
    }

    /// Flat row-major list, for serialization.
    pub fn flat(&self) -> Vec<u64> {
        self.rows.concat()
    }

    /// All `p^{nk}` tuples of the submodule (test oracle only).
    pub fn expand(&self) -> Vec<ResidueTuple> {
        let CodeParams { n, t, k, p } = self.params;
        let f = Fp::new(p);
        let total = (p as u128).pow((n * k) as u32);
        let mut out = Vec::with_capacity(total as usize);
        for idx in 0..total {
            let mut rest = idx;
            let mut coeffs = vec![vec![0u64; k]; n];
            for row in coeffs.iter_mut() {
                for c in row.iter_mut() {
                    *c = (rest % p as u128) as u64;
                    rest /= p as u128;
                }
            }
            let rows = ff::mat_mul(&f, &coeffs, &self.rows);
            out.push(ResidueTuple::from_concat(&rows, n, t));
        }
        out
    }
}

/// Whether `M_n(F_p) · v` has dimension `n²`, i.e. `[v_1 | … | v_t]` has
/// full row rank `n`.
pub fn in_u(v: &ResidueTuple, p: u64) -> bool {
    let n = v.mats.first().map_or(0, Vec::len);
    ff::rank(&Fp::new(p), &v.concat()) == n
}

pub fn in_u_rows(rows: &FpMatrix, p: u64) -> bool {
    ff::rank(&Fp::new(p), rows) == rows.len()
}

/// Uniform code by rejection sampling of full-rank `k × nt` matrices.
pub fn sample_code<R: Rng>(params: CodeParams, rng: &mut R) -> Code {
    let f = Fp::new(params.p);
    loop {
        let mut m: FpMatrix = (0..params.k)
            .map(|_| (0..params.width()).map(|_| rng.gen_range(0..params.p)).collect())
            .collect();
        let pivots = ff::rref(&f, &mut m);
        if pivots.len() == params.k {
            return Code { params, rows: m, pivots };
        }
    }
}

/// Pivot sets in lexicographic order together with their free-entry count.
fn pivot_patterns(width: usize, k: usize) -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        let free: usize = combo
            .iter()
            .enumerate()
            .map(|(r, &pc)| (pc + 1..width).filter(|c| !combo[r + 1..].contains(c)).count())
            .sum();
        out.push((combo.clone(), free));
        // Next k-combination of 0..width.
        let mut i = k;
        while i > 0 && combo[i - 1] == i - 1 + width - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        combo[i - 1] += 1;
        for j in i..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Deterministic indexing of all codes with given parameters.
#[derive(Debug, Clone)]
pub struct CodeEnumerator {
    pub params: CodeParams,
    patterns: Vec<(Vec<usize>, u128)>,
    total: u128,
}

impl CodeEnumerator {
    pub fn new(params: CodeParams, cap: u128) -> Result<Self> {
        let total = params.count().ok_or_else(|| Error::Overflow("code count".into()))?;
        if total > cap {
            return Err(Error::EnumerationCap { cap: cap as usize });
        }
        let patterns = pivot_patterns(params.width(), params.k)
            .into_iter()
            .map(|(c, free)| (c, (params.p as u128).pow(free as u32)))
            .collect();
        Ok(CodeEnumerator { params, patterns, total })
    }

    pub fn len(&self) -> u128 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// The code with the given index in `0..len()`.
    pub fn get(&self, mut index: u128) -> Code {
        assert!(index < self.total, "code index out of range");
        let CodeParams { k, p, .. } = self.params;
        let width = self.params.width();
        for (pivots, count) in &self.patterns {
            if index >= *count {
                index -= count;
                continue;
            }
            let mut rows = vec![vec![0u64; width]; k];
            for (r, &pc) in pivots.iter().enumerate() {
                rows[r][pc] = 1;
                for c in pc + 1..width {
                    if pivots[r + 1..].contains(&c) {
                        continue;
                    }
                    rows[r][c] = (index % p as u128) as u64;
                    index /= p as u128;
                }
            }
            return Code { params: self.params, rows, pivots: pivots.clone() };
        }
        unreachable!("index bounded by total")
    }

    pub fn iter(&self) -> impl Iterator<Item = Code> + '_ {
        (0..self.total).map(move |i| self.get(i))
    }
}

pub fn enumerate_codes(params: CodeParams, cap: u128) -> Result<Vec<Code>> {
    Ok(CodeEnumerator::new(params, cap)?.iter().collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalancednessReport {
    pub params: CodeParams,
    pub codes: u128,
    pub points_in_u: u64,
    /// Common number of codes through each point of U (or the first count
    /// seen when not uniform).
    pub l: u64,
    pub uniform: bool,
    /// `[nt - n choose k - n]_p`
    pub expected_l: u128,
}

/// Counts, for every `u ∈ U`, the codes containing `u`.
pub fn balancedness_audit(params: CodeParams, cap: u128) -> Result<BalancednessReport> {
    let codes = enumerate_codes(params, cap)?;
    let CodeParams { n, t, k, p } = params;
    let width = n * t;
    let points = (p as u128)
        .checked_pow((n * width) as u32)
        .filter(|&x| x <= cap.saturating_mul(64))
        .ok_or(Error::EnumerationCap { cap: cap as usize })?;
    let mut counts = Vec::new();
    for idx in 0..points {
        let mut rest = idx;
        let rows: FpMatrix = (0..n)
            .map(|_| {
                (0..width)
                    .map(|_| {
                        let v = (rest % p as u128) as u64;
                        rest /= p as u128;
                        v
                    })
                    .collect()
            })
            .collect();
        if !in_u_rows(&rows, p) {
            continue;
        }
        counts.push(codes.iter().filter(|c| c.contains_rows(&rows)).count() as u64);
    }
    let l = counts.first().copied().unwrap_or(0);
    let expected_l = if k >= n { gaussian_binomial(width - n, k - n, p).unwrap_or(0) } else { 0 };
    Ok(BalancednessReport {
        params,
        codes: codes.len() as u128,
        points_in_u: counts.len() as u64,
        l,
        uniform: counts.iter().all(|&c| c == l),
        expected_l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn brute_force_subspace_count(width: usize, k: usize, p: u64) -> usize {
        // Distinct RREF forms of all k-tuples of vectors with rank k.
        let f = Fp::new(p);
        let vectors = (p as usize).pow(width as u32);
        let mut seen = HashSet::new();
        let mut idx = vec![0usize; k];
        loop {
            let mut m: FpMatrix = idx
                .iter()
                .map(|&v| (0..width).map(|c| ((v / (p as usize).pow(c as u32)) % p as usize) as u64).collect())
                .collect();
            if ff::rref(&f, &mut m).len() == k {
                seen.insert(m);
            }
            let mut i = 0;
            loop {
                if i == k {
                    return seen.len();
                }
                idx[i] += 1;
                if idx[i] < vectors {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn counts_match_gaussian_binomial() {
        for (n, t, k, p) in [(2, 2, 3, 2), (1, 2, 1, 11), (2, 2, 3, 3), (1, 3, 2, 3), (2, 2, 2, 2)] {
            let params = CodeParams::new(n, t, k, p).unwrap();
            let codes = enumerate_codes(params, 1 << 20).unwrap();
            assert_eq!(codes.len() as u128, params.count().unwrap());
            let distinct: HashSet<_> = codes.iter().map(|c| c.rows.clone()).collect();
            assert_eq!(distinct.len(), codes.len());
            if (p as usize).pow((n * t) as u32) <= 81 {
                assert_eq!(brute_force_subspace_count(n * t, k, p), codes.len());
            }
        }
        assert_eq!(gaussian_binomial(4, 3, 2), Some(15));
        assert_eq!(gaussian_binomial(4, 3, 3), Some(40));
        assert_eq!(gaussian_binomial(2, 1, 7), Some(8));
    }

    #[test]
    fn membership_and_u() {
        let params = CodeParams::new(2, 2, 3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let code = sample_code(params, &mut rng);
        assert!(code.contains(&ResidueTuple::zero(2, 2)));
        let own = ResidueTuple::from_concat(&code.rows[..2].to_vec(), 2, 2);
        assert!(code.contains(&own));
        let id = ResidueTuple { mats: vec![ff::identity(2), ff::zeros(2, 2)] };
        assert!(in_u(&id, 3));
        assert!(!in_u(&ResidueTuple::zero(2, 2), 3));
        let rank_one = vec![vec![1, 2], vec![0, 0]];
        let shared = ResidueTuple { mats: vec![rank_one.clone(), ff::mat_scale(&Fp::new(3), &rank_one, 2)] };
        assert!(!in_u(&shared, 3));
    }

    #[test]
    fn morita_expansion_is_a_left_module() {
        let params = CodeParams::new(2, 2, 3, 2).unwrap();
        let f = Fp::new(2);
        let mats: Vec<FpMatrix> = (0..16u64)
            .map(|b| vec![vec![b & 1, (b >> 1) & 1], vec![(b >> 2) & 1, (b >> 3) & 1]])
            .collect();
        for code in enumerate_codes(params, 100).unwrap() {
            let elems: HashSet<ResidueTuple> = code.expand().into_iter().collect();
            assert_eq!(elems.len(), 1 << 6);
            for v in &elems {
                assert!(code.contains(v));
                for g in &mats {
                    let gv = ResidueTuple { mats: v.mats.iter().map(|m| ff::mat_mul(&f, g, m)).collect() };
                    assert!(elems.contains(&gv));
                }
            }
            // Non-members are rejected.
            let mut all = 0;
            for idx in 0..256u64 {
                let rows: FpMatrix = (0..2).map(|r| (0..4).map(|c| (idx >> (4 * r + c)) & 1).collect()).collect();
                let v = ResidueTuple::from_concat(&rows, 2, 2);
                assert_eq!(code.contains(&v), elems.contains(&v));
                all += 1;
            }
            assert_eq!(all, 256);
        }
    }

    #[test]
    fn balancedness() {
        for ((n, t, k, p), l) in [((2, 2, 3, 2), 3), ((2, 2, 3, 3), 4), ((1, 2, 1, 5), 1), ((1, 3, 2, 3), 4)] {
            let rep = balancedness_audit(CodeParams::new(n, t, k, p).unwrap(), 1 << 20).unwrap();
            assert!(rep.uniform);
            assert_eq!(rep.l, l);
            assert_eq!(rep.expected_l, l as u128);
        }
    }

    #[test]
    fn sampling_is_uniform() {
        // χ² over the 6 lines of F_5².
        let params = CodeParams::new(1, 2, 1, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut counts = std::collections::HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            *counts.entry(sample_code(params, &mut rng).rows).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        let e = draws as f64 / 6.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 99th percentile of χ²₅ is 15.09.
        assert!(chi2 < 15.09, "chi2 = {chi2}");
    }
}
