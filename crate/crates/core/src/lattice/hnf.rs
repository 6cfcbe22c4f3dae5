//! Hermite normal form of integer row lattices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Upper-triangular HNF basis of the lattice spanned by `rows`: positive
/// diagonal, entries above each pivot reduced into `[0, pivot)`. The input
/// must span a full-rank lattice in `Z^d`.
pub fn hnf(rows: &[Vec<BigInt>], d: usize) -> Result<Vec<Vec<BigInt>>> {
    let mut a: Vec<Vec<BigInt>> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut out: Vec<Vec<BigInt>> = Vec::with_capacity(d);
    for col in 0..d {
        // Combine all rows with a nonzero entry in `col` into one via gcd steps.
        let mut pivot: Option<Vec<BigInt>> = None;
        let mut rest = Vec::with_capacity(a.len());
        for row in a.drain(..) {
            if row[col].is_zero() {
                rest.push(row);
                continue;
            }
            match pivot.take() {
                None => pivot = Some(row),
                Some(p) => {
                    let eg = p[col].extended_gcd(&row[col]);
                    let (g, x, y) = (eg.gcd, eg.x, eg.y);
                    let pa = &p[col] / &g;
                    let rb = &row[col] / &g;
                    let new_p: Vec<BigInt> = p.iter().zip(&row).map(|(u, v)| &x * u + &y * v).collect();
                    let other: Vec<BigInt> = p.iter().zip(&row).map(|(u, v)| &pa * v - &rb * u).collect();
                    debug_assert!(other[col].is_zero());
                    if other.iter().any(|e| !e.is_zero()) {
                        rest.push(other);
                    }
                    pivot = Some(new_p);
                }
            }
        }
        let Some(mut p) = pivot else {
            return Err(Error::InvalidParams(format!("generators are not full rank (column {col})")));
        };
        if p[col].is_negative() {
            p.iter_mut().for_each(|x| *x = -x.clone());
        }
        a = rest;
        out.push(p);
    }
    if a.iter().any(|r| r.iter().any(|x| !x.is_zero())) {
        return Err(Error::InvalidParams("leftover generators after HNF".into()));
    }
    // Reduce entries above the diagonal.
    for col in 0..d {
        let piv = out[col][col].clone();
        for r in 0..col {
            let q = out[r][col].div_floor(&piv);
            if !q.is_zero() {
                let prow = out[col].clone();
                for (x, y) in out[r].iter_mut().zip(&prow) {
                    *x -= &q * y;
                }
            }
        }
    }
    Ok(out)
}

pub fn hnf_i64(rows: &[Vec<i64>], d: usize) -> Result<Vec<Vec<i64>>> {
    let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    hnf(&big, d)?
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| i64::try_from(x).map_err(|_| Error::Overflow("HNF entry".into())))
                .collect()
        })
        .collect()
}

/// Whether `rows` is square, upper triangular with positive diagonal and
/// reduced off-diagonal entries.
pub fn is_hnf(rows: &[Vec<i64>]) -> bool {
    let d = rows.len();
    (0..d).all(|i| {
        rows[i].len() == d
            && rows[i][i] > 0
            && (0..i).all(|j| rows[i][j] == 0)
            && (0..i).all(|r| rows[r][i] >= 0 && rows[r][i] < rows[i][i])
    })
}

/// Integer coordinates of `v` in an upper-triangular basis, if `v` lies in
/// the lattice.
pub fn solve_triangular(basis: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    let d = basis.len();
    let mut rest: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    let mut coords = vec![0i64; d];
    for j in 0..d {
        let piv = basis[j][j] as i128;
        if rest[j] % piv != 0 {
            return None;
        }
        let c = rest[j] / piv;
        coords[j] = c as i64;
        if c != 0 {
            for (r, &b) in rest.iter_mut().zip(&basis[j]).skip(j) {
                *r -= c * b as i128;
            }
        }
    }
    Some(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hnf_of_small_lattice() {
        let rows = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let h = hnf_i64(&rows, 3).unwrap();
        assert!(is_hnf(&h));
        // |det| is preserved.
        let det: i64 = (0..3).map(|i| h[i][i]).product();
        assert_eq!(BigInt::from(det), crate::exact::det_integer(&rows).abs());
        for r in &rows {
            assert!(solve_triangular(&h, r).is_some());
        }
    }

    #[test]
    fn hnf_is_canonical() {
        let a = vec![vec![3, 1], vec![0, 2]];
        let b = vec![vec![3, 3], vec![3, 1], vec![6, 4]];
        assert_eq!(hnf_i64(&a, 2).unwrap(), hnf_i64(&b, 2).unwrap());
        assert!(solve_triangular(&hnf_i64(&a, 2).unwrap(), &[1, 0]).is_none());
    }
}
