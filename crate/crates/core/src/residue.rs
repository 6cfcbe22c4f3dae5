//! Degree-one split primes and explicit reductions `O → M_n(F_p)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, OrderModel, OrderSpec};
use crate::catalog::Family;
use crate::error::{Error, Result};
use crate::ff::{self, Fp, FpMatrix};
use crate::primes;

const PRIME_SEARCH_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPrime {
    pub p: u64,
    /// Equal to `p`: only degree-one primes are used.
    pub residue_card: u64,
    pub family: Family,
}

/// Smallest prime `p >= min_bound` passing the family's split criterion.
pub fn find_split_prime(family: &Family, min_bound: u64) -> Result<SplitPrime> {
    let start = min_bound.max(3);
    for p in start..start.saturating_add(PRIME_SEARCH_CAP) {
        if family.splits_at(p) {
            return Ok(SplitPrime { p, residue_card: p, family: *family });
        }
    }
    Err(Error::PrimeSearchExhausted { tried: PRIME_SEARCH_CAP })
}

/// Images of the order basis under one factor `O/pO → M_n(F_p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingMap {
    pub p: u64,
    pub n: usize,
    /// Root of Φ_m in F_p selecting the factor (1 when the center is Q).
    pub root: u64,
    pub images: Vec<FpMatrix>,
}

fn scalar(f: &Fp, n: usize, c: u64) -> FpMatrix {
    ff::mat_scale(f, &ff::identity(n), c)
}

/// `r = g^{(p-1)/m}` for the smallest primitive root `g`.
fn cyclotomic_root(p: u64, m: u64) -> Result<u64> {
    if m <= 2 {
        return Ok(if m == 2 { p - 1 } else { 1 });
    }
    if (p - 1) % m != 0 {
        return Err(Error::NotSplit { p, reason: format!("p is not 1 mod {m}") });
    }
    let g = primes::primitive_root(p);
    Ok(primes::pow_mod_u64(g, (p - 1) / m, p))
}

/// `(x, y)` with `x² + y² ≡ -1 (mod p)`.
fn sum_of_two_squares_minus_one(p: u64) -> Result<(u64, u64)> {
    let f = Fp::new(p);
    let mut root_of = vec![u64::MAX; p as usize];
    for y in 0..p {
        let s = f.mul(y, y) as usize;
        if root_of[s] == u64::MAX {
            root_of[s] = y;
        }
    }
    for x in 0..p {
        let target = f.sub(p - 1, f.mul(x, x));
        let y = root_of[target as usize];
        if y != u64::MAX {
            return Ok((x, y));
        }
    }
    Err(Error::NotSplit { p, reason: "no solution to x² + y² = -1".into() })
}

/// Images of the Hurwitz basis `1, i, j, ω`.
fn hurwitz_images(f: &Fp) -> Result<[FpMatrix; 4]> {
    if f.p == 2 {
        return Err(Error::NotSplit { p: 2, reason: "the Hurwitz order ramifies at 2".into() });
    }
    let (x, y) = sum_of_two_squares_minus_one(f.p)?;
    let one = ff::identity(2);
    let i = vec![vec![0, 1], vec![f.neg(1), 0]];
    let j = vec![vec![x, y], vec![y, f.neg(x)]];
    let k = ff::mat_mul(f, &i, &j);
    let sum = ff::mat_add(f, &ff::mat_add(f, &one, &i), &ff::mat_add(f, &j, &k));
    let omega = ff::mat_scale(f, &sum, f.inv(2));
    Ok([one, i, j, omega])
}

impl SplittingMap {
    /// Builds and certifies the reduction of `order` modulo `p`.
    pub fn build(order: &OrderSpec, p: u64) -> Result<Self> {
        if !primes::is_prime_u64(p) || p == 2 {
            return Err(Error::NotSplit { p, reason: "p must be an odd prime".into() });
        }
        let f = Fp::new(p);
        let (root, images) = match order.model {
            OrderModel::Cyclotomic { m } => {
                let r = cyclotomic_root(p, m)?;
                let imgs = (0..order.dim).map(|a| vec![vec![f.pow(r, a as u64)]]).collect();
                (r, imgs)
            }
            OrderModel::HurwitzTensor { m } => {
                let r = cyclotomic_root(p, m)?;
                let h = hurwitz_images(&f)?;
                let imgs = (0..order.dim)
                    .map(|idx| ff::mat_scale(&f, &h[idx % 4], f.pow(r, (idx / 4) as u64)))
                    .collect();
                (r, imgs)
            }
            OrderModel::DihedralCrossed { m } => {
                let r = cyclotomic_root(p, m)?;
                let rinv = f.inv(r);
                let half = order.dim / 2;
                let jm = vec![vec![0, f.neg(1)], vec![1, 0]];
                let imgs = (0..order.dim)
                    .map(|idx| {
                        let a = (idx % half) as u64;
                        let z = vec![vec![f.pow(r, a), 0], vec![0, f.pow(rinv, a)]];
                        if idx < half {
                            z
                        } else {
                            ff::mat_mul(&f, &z, &jm)
                        }
                    })
                    .collect();
                (r, imgs)
            }
            OrderModel::Opaque => {
                return Err(Error::NotSplit {
                    p,
                    reason: "no splitting recipe for an order loaded without a model".into(),
                })
            }
        };
        let map = SplittingMap { p, n: order.n, root, images };
        map.certify(order)?;
        Ok(map)
    }

    pub fn field(&self) -> Fp {
        Fp::new(self.p)
    }

    /// Checks the homomorphism property on all basis pairs, `φ(1) = I` and
    /// surjectivity (the images span `M_n(F_p)`).
    pub fn certify(&self, order: &OrderSpec) -> Result<()> {
        let f = self.field();
        let d = order.dim;
        if self.images.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.images.len() });
        }
        if self.reduce(&order.unity) != ff::identity(self.n) {
            return Err(Error::ReductionFailure("unity does not map to the identity".into()));
        }
        for i in 0..d {
            for j in 0..d {
                let lhs = ff::mat_mul(&f, &self.images[i], &self.images[j]);
                let mut ei = vec![0; d];
                ei[i] = 1;
                let mut ej = vec![0; d];
                ej[j] = 1;
                let rhs = self.reduce(&order.mul_int(&ei, &ej));
                if lhs != rhs {
                    return Err(Error::ReductionFailure(format!(
                        "φ(e_{i} e_{j}) != φ(e_{i}) φ(e_{j})"
                    )));
                }
            }
        }
        let flat: FpMatrix = self.images.iter().map(|m| m.concat()).collect();
        if ff::rank(&f, &flat) != self.n * self.n {
            return Err(Error::ReductionFailure("images do not span M_n(F_p)".into()));
        }
        Ok(())
    }

    /// `Σ x_i φ(e_i)` for an integral coordinate vector.
    pub fn reduce(&self, x: &[i64]) -> FpMatrix {
        let f = self.field();
        let mut out = ff::zeros(self.n, self.n);
        for (&c, img) in x.iter().zip(&self.images) {
            let c = f.reduce(c);
            if c == 0 {
                continue;
            }
            for (orow, irow) in out.iter_mut().zip(img) {
                for (o, &v) in orow.iter_mut().zip(irow) {
                    *o = f.add(*o, f.mul(c, v));
                }
            }
        }
        out
    }

    pub fn reduce_element(&self, x: &AlgebraElement) -> Result<FpMatrix> {
        Ok(self.reduce(&x.to_ints()?))
    }

    /// `F_p`-linear map `O → F_p^{n²}` as a matrix with one row per basis
    /// element (row-major flattening of the image).
    pub fn flat_images(&self) -> FpMatrix {
        self.images.iter().map(|m| m.concat()).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetCompatReport {
    pub p: u64,
    pub samples: usize,
    pub violations: Vec<Vec<i64>>,
}

/// Samples `x ∈ O` with coordinates in `[-range, range]` and checks
/// `det φ(x) = φ(nrd_{A/K}(x))`, the latter being a scalar matrix.
pub fn det_compat_audit<R: Rng>(
    order: &OrderSpec,
    map: &SplittingMap,
    samples: usize,
    range: i64,
    rng: &mut R,
) -> Result<DetCompatReport> {
    let f = map.field();
    let mut violations = Vec::new();
    for _ in 0..samples {
        let x: Vec<i64> = (0..order.dim).map(|_| rng.gen_range(-range..=range)).collect();
        if !det_compatible(order, map, &f, &x)? {
            violations.push(x);
        }
    }
    Ok(DetCompatReport { p: map.p, samples, violations })
}

pub fn det_compatible(order: &OrderSpec, map: &SplittingMap, f: &Fp, x: &[i64]) -> Result<bool> {
    let det = ff::det(f, &map.reduce(x));
    let nrd = order.reduced_norm_center_int(x)?;
    Ok(map.reduce(&nrd) == scalar(f, map.n, det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_primes() {
        assert_eq!(find_split_prime(&Family::Hurwitz, 3).unwrap().p, 3);
        assert_eq!(find_split_prime(&Family::Cyclotomic { m: 5 }, 2).unwrap().p, 11);
        assert_eq!(find_split_prime(&Family::CyclotomicQuaternion { m: 7 }, 2).unwrap().p, 29);
    }

    #[test]
    fn hurwitz_reduction_mod_three() {
        let b = Family::Hurwitz.build().unwrap();
        let map = SplittingMap::build(&b.order, 3).unwrap();
        let f = map.field();
        let i2 = ff::mat_mul(&f, &map.images[1], &map.images[1]);
        assert_eq!(i2, ff::mat_scale(&f, &ff::identity(2), 2));
        // 1 + i + j has reduced norm 3.
        assert_eq!(ff::det(&f, &map.reduce(&[1, 1, 1, 0])), 0);
    }

    #[test]
    fn hurwitz_one_plus_i_mod_five() {
        let b = Family::Hurwitz.build().unwrap();
        let map = SplittingMap::build(&b.order, 5).unwrap();
        assert_eq!(ff::det(&map.field(), &map.reduce(&[1, 1, 0, 0])), 2);
    }

    #[test]
    fn cyclotomic_reduction() {
        let b = Family::Cyclotomic { m: 5 }.build().unwrap();
        let map = SplittingMap::build(&b.order, 11).unwrap();
        let r = map.images[1][0][0];
        assert_eq!(map.root, r);
        assert_eq!(primes::multiplicative_order(r, 11), Some(5));
        assert_eq!(r, primes::pow_mod_u64(2, 2, 11));
        assert!(SplittingMap::build(&b.order, 13).is_err());
    }

    #[test]
    fn multiple_of_p_reduces_to_zero() {
        let b = Family::Hurwitz.build().unwrap();
        let map = SplittingMap::build(&b.order, 7).unwrap();
        assert_eq!(map.reduce(&[7, -14, 21, 0]), ff::zeros(2, 2));
    }

    #[test]
    fn det_compat_all_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cases = [
            (Family::Hurwitz, vec![3u64, 5, 7]),
            (Family::Cyclotomic { m: 5 }, vec![11, 31, 41]),
            (Family::CyclotomicQuaternion { m: 7 }, vec![29]),
            (Family::DihedralQuaternion { m: 5 }, vec![11, 31]),
        ];
        for (fam, ps) in cases {
            let b = fam.build().unwrap();
            for p in ps {
                let map = SplittingMap::build(&b.order, p).unwrap();
                let rep = det_compat_audit(&b.order, &map, 300, 5, &mut rng).unwrap();
                assert!(rep.violations.is_empty(), "{fam} p = {p}");
            }
        }
    }
}
