//! Dense linear algebra over a prime field F_p.

use serde::{Deserialize, Serialize};

/// Prime field F_p with `p < 2^31`, so products of reduced residues fit in u64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Self {
        assert!(p >= 2 && p < (1 << 31), "field characteristic out of range");
        Fp { p }
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        (self.p - a) % self.p
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    /// Signed representative in (-p/2, p/2].
    pub fn centered(&self, a: u64) -> i64 {
        let a = a % self.p;
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

pub type FpMatrix = Vec<Vec<u64>>;

pub fn identity(n: usize) -> FpMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect()
}

pub fn zeros(r: usize, c: usize) -> FpMatrix {
    vec![vec![0; c]; r]
}

pub fn mat_mul(f: &Fp, a: &FpMatrix, b: &FpMatrix) -> FpMatrix {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] = (out[i][j] + x * b[l][j]) % f.p;
            }
        }
    }
    out
}

pub fn mat_add(f: &Fp, a: &FpMatrix, b: &FpMatrix) -> FpMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(&x, &y)| f.add(x, y)).collect())
        .collect()
}

pub fn mat_scale(f: &Fp, a: &FpMatrix, s: u64) -> FpMatrix {
    a.iter()
        .map(|r| r.iter().map(|&x| f.mul(x, s)).collect())
        .collect()
}

/// In-place reduced row echelon form; returns pivot columns. Zero rows are
/// removed so the result has exactly `rank` rows.
pub fn rref(f: &Fp, m: &mut FpMatrix) -> Vec<usize> {
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(piv) = (row..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(piv, row);
        let inv = f.inv(m[row][col]);
        for c in col..ncols {
            m[row][c] = f.mul(m[row][c], inv);
        }
        for r in 0..m.len() {
            if r == row || m[r][col] == 0 {
                continue;
            }
            let factor = m[r][col];
            for c in col..ncols {
                let v = f.mul(factor, m[row][c]);
                m[r][c] = f.sub(m[r][c], v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    m.truncate(row);
    pivots
}

pub fn rank(f: &Fp, m: &FpMatrix) -> usize {
    let mut a = m.clone();
    rref(f, &mut a).len()
}

pub fn det(f: &Fp, m: &FpMatrix) -> u64 {
    let n = m.len();
    let mut a = m.clone();
    let mut d = 1u64;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if piv != col {
            a.swap(piv, col);
            d = f.neg(d);
        }
        d = f.mul(d, a[col][col]);
        let inv = f.inv(a[col][col]);
        for r in col + 1..n {
            if a[r][col] == 0 {
                continue;
            }
            let factor = f.mul(a[r][col], inv);
            for c in col..n {
                let v = f.mul(factor, a[col][c]);
                a[r][c] = f.sub(a[r][c], v);
            }
        }
    }
    d
}

/// Basis (as rows, in RREF) of the right null space `{x : M x = 0}`.
pub fn null_space(f: &Fp, m: &FpMatrix, ncols: usize) -> FpMatrix {
    let mut a = m.clone();
    let pivots = rref(f, &mut a);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &fc in &free {
        let mut v = vec![0u64; ncols];
        v[fc] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = f.neg(a[r][fc]);
        }
        basis.push(v);
    }
    let _ = rref(f, &mut basis);
    basis
}

/// Row-vector membership in the row space of an RREF matrix.
pub fn in_rref_span(f: &Fp, rref_rows: &FpMatrix, pivots: &[usize], v: &[u64]) -> bool {
    let mut r: Vec<u64> = v.to_vec();
    for (row, &pc) in rref_rows.iter().zip(pivots) {
        let c = r[pc];
        if c == 0 {
            continue;
        }
        for (x, &y) in r.iter_mut().zip(row) {
            *x = f.sub(*x, f.mul(c, y));
        }
    }
    r.iter().all(|&x| x == 0)
}

pub fn pivot_columns(rref_rows: &FpMatrix) -> Vec<usize> {
    rref_rows
        .iter()
        .map(|r| r.iter().position(|&x| x != 0).expect("zero row in RREF"))
        .collect()
}

/// |GL_n(F_p)| by the product formula.
pub fn gl_order(n: u32, p: u64) -> u128 {
    let q = p as u128;
    let qn = q.pow(n);
    (0..n).map(|i| qn - q.pow(i)).product()
}
