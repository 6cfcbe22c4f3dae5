//! Exact linear algebra over Q and Z.
//!
//! Everything here is fraction-exact; the lattice and algebra modules rely
//! on these routines for determinants, ranks and positive-definiteness
//! certificates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `"num/den"` (or `"num"` when integral).
pub fn rational_string(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Natural log of a positive big integer without overflowing f64.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln of non-positive integer");
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(q: &Rational) -> f64 {
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rational(&q.abs()).exp()
}

/// Determinant by Gaussian elimination over Q.
pub fn det_rational(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

/// Rank of a list of rational row vectors.
pub fn rank_rational(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut a = rows.to_vec();
    let ncols = a[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(piv, rank);
        let p = a[rank][col].clone();
        for r in rank + 1..a.len() {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..ncols {
                let v = &f * &a[rank][c];
                a[r][c] -= v;
            }
        }
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}

/// Pivots of the LDLᵀ decomposition of a symmetric matrix. The matrix is
/// positive definite iff every pivot is strictly positive; `None` when a
/// zero pivot stops the elimination.
pub fn ldl_pivots(m: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let p = a[k][k].clone();
        if p.is_zero() {
            return None;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for j in k..n {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
        }
        pivots.push(p);
    }
    Some(pivots)
}

/// Solves `x · rows = target` for `x` (rows must be linearly independent).
/// Returns `None` if the target is outside the row span.
pub fn solve_row_combination(rows: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    let k = rows.len();
    let ncols = target.len();
    // Augmented system on the transpose: columns are the rows.
    let mut a: Vec<Vec<Rational>> = (0..ncols)
        .map(|c| {
            let mut r: Vec<Rational> = rows.iter().map(|row| row[c].clone()).collect();
            r.push(target[c].clone());
            r
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for col in 0..k {
        let Some(piv) = (rank..ncols).find(|&r| !a[r][col].is_zero()) else {
            return None;
        };
        a.swap(piv, rank);
        let p = a[rank][col].clone();
        for c in col..=k {
            a[rank][c] = &a[rank][c] / &p;
        }
        for r in 0..ncols {
            if r == rank || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..=k {
                let v = &f * &a[rank][c];
                a[r][c] -= v;
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    if a[rank..].iter().any(|r| !r[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| a[i][k].clone()).collect())
}

/// Inverse of a square rational matrix.
pub fn inverse_rational(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(piv, col);
        let p = a[col][col].clone();
        for c in 0..2 * n {
            a[col][c] = &a[col][c] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Integer determinant via Bareiss fraction-free elimination.
pub fn det_integer<T: Into<BigInt> + Clone>(m: &[Vec<T>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().cloned().map(Into::into).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(piv) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Rank of an integer matrix (rows), computed fraction-free.
pub fn rank_integer(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let ncols = a[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(piv, rank);
        for r in rank + 1..a.len() {
            if a[r][col].is_zero() {
                continue;
            }
            let p = a[rank][col].clone();
            let f = a[r][col].clone();
            let g = p.gcd(&f);
            let (pm, fm) = (&p / &g, &f / &g);
            for c in 0..ncols {
                let v = &a[r][c] * &pm - &a[rank][c] * &fm;
                a[r][c] = v;
            }
        }
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}

pub fn to_rational_matrix(m: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    m.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_matches_bareiss() {
        let m = vec![vec![2i64, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]];
        assert_eq!(det_integer(&m), BigInt::from(4));
        assert_eq!(det_rational(&to_rational_matrix(&m)), rat(4));
    }

    #[test]
    fn ldl_detects_indefinite() {
        let pd = to_rational_matrix(&[vec![2, 1], vec![1, 2]]);
        assert!(ldl_pivots(&pd).unwrap().iter().all(|p| p.is_positive()));
        let indef = to_rational_matrix(&[vec![1, 2], vec![2, 1]]);
        assert!(ldl_pivots(&indef).unwrap().iter().any(|p| p.is_negative()));
    }

    #[test]
    fn row_combination_solve() {
        let rows = to_rational_matrix(&[vec![1, 0, 1], vec![0, 1, 1]]);
        let t = vec![rat(2), rat(3), rat(5)];
        assert_eq!(solve_row_combination(&rows, &t), Some(vec![rat(2), rat(3)]));
        let bad = vec![rat(2), rat(3), rat(4)];
        assert_eq!(solve_row_combination(&rows, &bad), None);
    }

    #[test]
    fn integer_rank() {
        assert_eq!(rank_integer(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]), 2);
    }

    #[test]
    fn rational_strings() {
        let q = rat_frac(-6, 4);
        assert_eq!(rational_string(&q), "-3/2");
        assert_eq!(parse_rational("-3/2"), Some(q));
        assert_eq!(parse_rational("7"), Some(rat(7)));
    }

    #[test]
    fn big_log() {
        let x = BigInt::from(10).pow(400u32);
        assert!((ln_bigint(&x) - 400.0 * 10f64.ln()).abs() < 1e-9);
    }
}
