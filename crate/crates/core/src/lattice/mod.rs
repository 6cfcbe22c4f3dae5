//! Lattices `φ_p^{-1}(C) ⊆ O^t`: lifting, exact Gram data, shortest
//! vectors, densities and the order-level bounds.

pub mod hnf;
pub mod reduce;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{FiniteUnitGroup, OrderSpec, PositiveElement};
use crate::catalog::Family;
use crate::codes::Code;
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::ff::{self, Fp, FpMatrix};
use crate::residue::SplittingMap;
use crate::special;

pub use reduce::{Gram, ShortVector};

/// Default dimension cap for exact SVP.
pub const SVP_DIM_CAP: usize = 16;
/// Default cap on the number of vectors returned by one enumeration.
pub const ENUM_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub family: Option<Family>,
    pub p: Option<u64>,
    /// Flat row-major RREF rows of the code.
    pub code: Option<Vec<u64>>,
    pub code_index: Option<u128>,
    pub t: usize,
    pub k: Option<usize>,
    /// Coordinates of the form element `a`.
    pub a: Vec<i64>,
}

/// A full-rank sublattice of `O^t` with its exact Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeInstance {
    /// Upper-triangular HNF rows in the Z-basis of `O^t`.
    pub basis: Vec<Vec<i64>>,
    /// `B · G_{O^t} · Bᵀ`
    pub gram: Gram,
    /// `[A:Q]`, the size of one block.
    pub block: usize,
    pub t: usize,
    pub provenance: Provenance,
}

/// `t`-fold block diagonal of the order Gram matrix.
pub fn block_gram(order_gram: &Gram, t: usize) -> Gram {
    let n = order_gram.len();
    let mut g = vec![vec![0i128; n * t]; n * t];
    for s in 0..t {
        for i in 0..n {
            for j in 0..n {
                g[s * n + i][s * n + j] = order_gram[i][j];
            }
        }
    }
    g
}

fn basis_gram(basis: &[Vec<i64>], ambient: &Gram) -> Gram {
    let d = basis.len();
    let bg: Vec<Vec<i128>> = basis
        .iter()
        .map(|row| {
            (0..ambient.len())
                .map(|j| row.iter().enumerate().filter(|(_, &x)| x != 0).map(|(k, &x)| x as i128 * ambient[k][j]).sum())
                .collect()
        })
        .collect();
    (0..d)
        .map(|i| (0..d).map(|j| (0..ambient.len()).map(|k| bg[i][k] * basis[j][k] as i128).sum()).collect())
        .collect()
}

impl LatticeInstance {
    /// Sublattice of `O^t` with the given basis rows (brought to HNF).
    pub fn from_basis(
        rows: &[Vec<i64>],
        order_gram: &Gram,
        t: usize,
        provenance: Provenance,
    ) -> Result<Self> {
        let block = order_gram.len();
        let d = block * t;
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: rows[0].len() });
        }
        let basis = hnf::hnf_i64(rows, d)?;
        let gram = basis_gram(&basis, &block_gram(order_gram, t));
        Ok(LatticeInstance { basis, gram, block, t, provenance })
    }

    /// `O^t` itself.
    pub fn whole(order_gram: &Gram, t: usize, provenance: Provenance) -> Self {
        let d = order_gram.len() * t;
        let basis: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
        LatticeInstance {
            basis,
            gram: block_gram(order_gram, t),
            block: order_gram.len(),
            t,
            provenance,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `[O^t : Λ] = |det B|`.
    pub fn index(&self) -> BigInt {
        self.basis.iter().enumerate().map(|(i, r)| BigInt::from(r[i])).product()
    }

    pub fn gram_det(&self) -> BigInt {
        exact::det_integer(&self.gram)
    }

    pub fn gram_rational(&self) -> Vec<Vec<Rational>> {
        self.gram
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect())
            .collect()
    }

    /// Ambient coordinates `c · B` of a lattice vector.
    pub fn ambient(&self, coords: &[i64]) -> Vec<i64> {
        let d = self.dim();
        let mut v = vec![0i64; d];
        for (&c, row) in coords.iter().zip(&self.basis) {
            if c != 0 {
                for (x, &b) in v.iter_mut().zip(row) {
                    *x += c * b;
                }
            }
        }
        v
    }

    /// Lattice coordinates of an ambient vector, if it lies in Λ.
    pub fn coords_of(&self, ambient: &[i64]) -> Option<Vec<i64>> {
        hnf::solve_triangular(&self.basis, ambient)
    }

    pub fn contains(&self, ambient: &[i64]) -> bool {
        self.coords_of(ambient).is_some()
    }

    /// `c · Λ` realized by scaling the Gram matrix by `c²`.
    pub fn scaled(&self, c: i64) -> Self {
        let mut s = self.clone();
        let c2 = (c as i128) * (c as i128);
        for row in s.gram.iter_mut() {
            for x in row.iter_mut() {
                *x *= c2;
            }
        }
        s
    }

    /// Left action of `g ∈ O^×` on every coordinate of `O^t`.
    pub fn act(&self, order: &OrderSpec, g: &[i64], ambient: &[i64]) -> Vec<i64> {
        let n = self.block;
        (0..self.t).flat_map(|s| order.mul_int(g, &ambient[s * n..(s + 1) * n])).collect()
    }

    /// Whether every `g ∈ G₀` maps Λ to itself.
    pub fn is_group_stable(&self, order: &OrderSpec, group: &FiniteUnitGroup) -> bool {
        group
            .elements
            .iter()
            .all(|g| self.basis.iter().all(|b| self.contains(&self.act(order, g, b))))
    }

    /// Whether `p·O^t ⊆ Λ`.
    pub fn contains_multiple_of_whole(&self, p: i64) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            let mut e = vec![0i64; d];
            e[i] = p;
            self.contains(&e)
        })
    }

    /// Nonzero vectors with `q(v) <= bound`, one per `±` pair.
    pub fn short_vectors(&self, bound: i128, cap: usize) -> Result<Vec<ShortVector>> {
        reduce::enumerate_short(&self.gram, bound, cap)
    }

    pub fn svp(&self) -> Result<SvpResult> {
        self.svp_with_cap(SVP_DIM_CAP)
    }

    /// Exact shortest vectors: LLL for an upper bound, then enumeration.
    pub fn svp_with_cap(&self, dim_cap: usize) -> Result<SvpResult> {
        let d = self.dim();
        if d > dim_cap {
            return Err(Error::DimensionCap { dim: d, cap: dim_cap });
        }
        let mut red = self.gram.clone();
        reduce::lll(&mut red, 0.99)?;
        let upper = (0..d).map(|i| red[i][i]).min().expect("nonempty lattice");
        let vecs = self.short_vectors(upper, ENUM_CAP)?;
        let min = vecs.iter().map(|v| v.norm).min().ok_or_else(|| {
            Error::Numerical("enumeration missed the LLL vector".into())
        })?;
        let vectors: Vec<Vec<i64>> = vecs.into_iter().filter(|v| v.norm == min).map(|v| v.coords).collect();
        Ok(SvpResult { min_sq: min, kissing: 2 * vectors.len(), vectors })
    }

    pub fn density(&self) -> Result<DensityReport> {
        let svp = self.svp()?;
        Ok(self.density_from_min(svp.min_sq, &svp))
    }

    pub fn density_from_min(&self, min_sq: i128, svp: &SvpResult) -> DensityReport {
        let d = self.dim();
        let det = self.gram_det();
        let ln_density = ln_packing_density(d, &BigInt::from(min_sq), &det);
        let zeta_d = if d >= 2 { special::zeta(d as f64) } else { f64::INFINITY };
        let g0 = self.provenance.family.map(|f| f.g0_order()).unwrap_or(2);
        DensityReport {
            dimension: d,
            lambda1_sq: min_sq.to_string(),
            covolume_sq: det.to_string(),
            density: ln_density.exp(),
            log2_density: ln_density / std::f64::consts::LN_2,
            bound_mh: 2.0 * zeta_d * (-(d as f64) * std::f64::consts::LN_2).exp(),
            bound_g0: g0 as f64 * zeta_d * (-(d as f64) * std::f64::consts::LN_2).exp(),
            kissing: svp.kissing,
            provenance: self.provenance.clone(),
        }
    }

    /// Whether the coordinate vector is primitive in Λ.
    pub fn is_primitive(coords: &[i64]) -> bool {
        coords.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1
    }

    /// Primitive vectors with `q(v) <= bound`, counted with both signs.
    pub fn primitive_count(&self, bound: i128, cap: usize) -> Result<u64> {
        let v = self.short_vectors(bound, cap)?;
        Ok(2 * v.iter().filter(|s| Self::is_primitive(&s.coords)).count() as u64)
    }
}

/// `ln Δ = ln V_d + (d/2) ln(λ₁²/4) - ½ ln det G`.
pub fn ln_packing_density(d: usize, lambda1_sq: &BigInt, gram_det: &BigInt) -> f64 {
    special::ln_ball_volume(d) + d as f64 / 2.0 * (exact::ln_bigint(lambda1_sq) - 4f64.ln())
        - 0.5 * exact::ln_bigint(gram_det)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvpResult {
    pub min_sq: i128,
    /// Lattice coordinates, one per `±` pair.
    pub vectors: Vec<Vec<i64>>,
    pub kissing: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityReport {
    pub dimension: usize,
    /// Exact λ₁² of the unscaled lattice.
    pub lambda1_sq: String,
    /// Exact `det G = covolume²` of the unscaled lattice.
    pub covolume_sq: String,
    pub density: f64,
    pub log2_density: f64,
    /// `2 ζ(d) / 2^d`
    pub bound_mh: f64,
    /// `|G₀| ζ(d) / 2^d`
    pub bound_g0: f64,
    pub kissing: usize,
    pub provenance: Provenance,
}

/// Lifts a code: `{x ∈ O^t : φ_p(x) ∈ C}`.
pub fn lift_code(
    order: &OrderSpec,
    map: &SplittingMap,
    code: &Code,
    form: &PositiveElement,
    family: Option<Family>,
) -> Result<LatticeInstance> {
    let params = code.params;
    if params.n != map.n || params.p != map.p {
        return Err(Error::InvalidParams(format!(
            "code (n={}, p={}) does not match reduction (n={}, p={})",
            params.n, params.p, map.n, map.p
        )));
    }
    let f = Fp::new(map.p);
    let (n, t) = (params.n, params.t);
    let big_n = order.dim;
    let d = big_n * t;
    // Parity checks h with C hᵀ = 0; membership means H · [φ(x_1)|…|φ(x_t)]ᵀ = 0.
    let parity = ff::null_space(&f, &code.rows, n * t);
    let mut constraints: FpMatrix = Vec::with_capacity(parity.len() * n);
    for h in &parity {
        for r in 0..n {
            let mut row = vec![0u64; d];
            for s in 0..t {
                for (i, img) in map.images.iter().enumerate() {
                    let mut acc = 0u64;
                    for c in 0..n {
                        acc = f.add(acc, f.mul(img[r][c], h[s * n + c]));
                    }
                    row[s * big_n + i] = acc;
                }
            }
            constraints.push(row);
        }
    }
    let basis = if constraints.is_empty() {
        (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect()
    } else {
        kernel_lattice_basis(&f, &constraints, d)
    };
    let gram = basis_gram(&basis, &block_gram(&form.gram_int()?, t));
    let provenance = Provenance {
        family,
        p: Some(map.p),
        code: Some(code.flat()),
        code_index: None,
        t,
        k: Some(params.k),
        a: form.value_int()?,
    };
    Ok(LatticeInstance { basis, gram, block: big_n, t, provenance })
}

/// HNF basis of `{x ∈ Z^d : M x ≡ 0 (mod p)}`: RREF kernel rows for pivot
/// columns and `p e_j` elsewhere, already upper triangular and reduced.
fn kernel_lattice_basis(f: &Fp, m: &FpMatrix, d: usize) -> Vec<Vec<i64>> {
    let kernel = ff::null_space(f, m, d);
    let pivots = ff::pivot_columns(&kernel);
    let mut rows: Vec<Vec<i64>> = vec![Vec::new(); d];
    for (row, &pc) in kernel.iter().zip(&pivots) {
        rows[pc] = row.iter().map(|&x| x as i64).collect();
    }
    for (j, slot) in rows.iter_mut().enumerate() {
        if slot.is_empty() {
            let mut v = vec![0i64; d];
            v[j] = f.p as i64;
            *slot = v;
        }
    }
    rows
}

/// `β_p = p^{(nk - n²t)/(n² m t)}`.
pub fn beta_scale(p: u64, n: usize, m: usize, t: usize, k: usize) -> f64 {
    let num = (n * k) as f64 - (n * n * t) as f64;
    let den = (n * n * m * t) as f64;
    (num / den * (p as f64).ln()).exp()
}

/// `√[A:Q] · N(a)^{1/(2[A:Q])} · q^{1/(nm)}` for points with singular
/// reduction.
pub fn bad_point_bound(dim_a: usize, n: usize, m: usize, ln_norm_a: f64, q: u64) -> f64 {
    let da = dim_a as f64;
    (0.5 * da.ln() + ln_norm_a / (2.0 * da) + (q as f64).ln() / (n * m) as f64).exp()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OrderBounds {
    pub lambda1_lb: f64,
    pub hermite_lb: f64,
    pub covering_ub: f64,
}

/// The three order-level bounds for `q_a`, given `ln N(a)` and a
/// discriminant `d(O/Z)`.
pub fn order_bounds(dim_a: usize, ln_norm_a: f64, discriminant: &BigInt) -> OrderBounds {
    let da = dim_a as f64;
    let ln_disc_root = exact::ln_bigint(discriminant) / da;
    let pi = std::f64::consts::PI;
    OrderBounds {
        lambda1_lb: (0.5 * da.ln() + ln_norm_a / (2.0 * da)).exp(),
        hermite_lb: da * (-ln_disc_root).exp(),
        covering_ub: ln_disc_root.exp() * (da.sqrt() / (2.0 * pi) + 3.0 / pi) * (-ln_norm_a / (2.0 * da)).exp(),
    }
}

/// `ln N_{A/Q}(a)` for a form element.
pub fn ln_norm(order: &OrderSpec, form: &PositiveElement) -> f64 {
    exact::ln_rational(&order.norm_q(&form.value).abs())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringEstimate {
    /// Largest distance to the lattice found among sampled targets.
    pub lower_bound: f64,
    pub samples: usize,
    pub witness: Vec<f64>,
}

/// Sampled lower bound for the covering radius: exact closest-vector
/// distances for uniform targets in a fundamental cell, followed by a
/// local ascent from the best targets.
pub fn covering_radius_lower_bound<R: Rng>(
    instance: &LatticeInstance,
    samples: usize,
    rng: &mut R,
) -> Result<CoveringEstimate> {
    let d = instance.dim();
    let (l, dd) = reduce::ldl_f64(&reduce::gram_to_f64(&instance.gram))?;
    let dist = |t: &[f64]| reduce::closest_distance_sq(&l, &dd, t);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..samples {
        let t: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let v = dist(&t);
        best.push((v, t));
        if best.len() > 64 {
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
            best.truncate(16);
        }
    }
    best.sort_by(|a, b| b.0.total_cmp(&a.0));
    best.truncate(16);
    let mut top = (0.0, vec![0.0; d]);
    for (mut v, mut t) in best {
        let mut step = 0.05;
        while step > 1e-7 {
            let mut improved = false;
            for _ in 0..20 {
                let cand: Vec<f64> = t.iter().map(|x| x + step * (2.0 * rng.gen::<f64>() - 1.0)).collect();
                let cv = dist(&cand);
                if cv > v {
                    v = cv;
                    t = cand;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if v > top.0 {
            top = (v, t);
        }
    }
    Ok(CoveringEstimate { lower_bound: top.0.sqrt(), samples, witness: top.1 })
}

/// Exact check that `λ₁² >= radius_sq` (or `>` when `strict`).
pub fn certify_min_at_least(instance: &LatticeInstance, radius_sq: &Rational, strict: bool) -> Result<bool> {
    // Largest integer norm that must be absent.
    let mut limit = radius_sq
        .floor()
        .to_integer()
        .to_i128()
        .ok_or_else(|| Error::Overflow("radius".into()))?;
    if !strict && radius_sq.is_integer() {
        limit -= 1;
    }
    if limit <= 0 {
        return Ok(true);
    }
    Ok(instance.short_vectors(limit, ENUM_CAP)?.is_empty())
}

/// `det(gram) = index² · det(G_{O^t})`.
pub fn index_identity_holds(instance: &LatticeInstance, order_gram: &Gram) -> bool {
    let whole = exact::det_integer(&block_gram(order_gram, instance.t));
    let idx = instance.index();
    instance.gram_det() == &idx * &idx * whole
}

/// `[O^t : Λ]` for a lift through one split factor: `p^{n²t - nk}`.
pub fn expected_index(p: u64, n: usize, t: usize, k: usize) -> BigInt {
    num_traits::Pow::pow(BigInt::from(p), (n * n * t - n * k) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{enumerate_codes, CodeParams};
    use crate::residue::SplittingMap;

    #[test]
    fn hurwitz_d4() {
        let b = Family::Hurwitz.build().unwrap();
        let unit = b.unit_form().unwrap();
        let g = unit.gram_int().unwrap();
        let lat = LatticeInstance::whole(&g, 1, Provenance::default());
        let svp = lat.svp().unwrap();
        assert_eq!(svp.min_sq, 4);
        assert_eq!(svp.kissing, 24);
        assert_eq!(lat.gram_det(), BigInt::from(64));
        let rep = lat.density_from_min(svp.min_sq, &svp);
        let pi = std::f64::consts::PI;
        assert!((rep.density - pi * pi / 16.0).abs() < 1e-12);
        let s = lat.scaled(3);
        assert_eq!(s.svp().unwrap().min_sq, 36);
        assert!((s.density().unwrap().density - rep.density).abs() < 1e-12);
    }

    #[test]
    fn lift_index_and_nesting() {
        let b = Family::Hurwitz.build().unwrap();
        let map = SplittingMap::build(&b.order, 3).unwrap();
        let params = CodeParams::new(2, 2, 3, 3).unwrap();
        let og = b.form.gram_int().unwrap();
        for code in enumerate_codes(params, 100).unwrap().iter().take(10) {
            let lat = lift_code(&b.order, &map, code, &b.form, Some(Family::Hurwitz)).unwrap();
            assert!(hnf::is_hnf(&lat.basis));
            assert_eq!(lat.index(), BigInt::from(9));
            assert!(lat.contains_multiple_of_whole(3));
            assert!(lat.is_group_stable(&b.order, &b.group));
            assert!(index_identity_holds(&lat, &og));
        }
    }

    #[test]
    fn cyclotomic_lift_index() {
        let b = Family::Cyclotomic { m: 5 }.build().unwrap();
        let map = SplittingMap::build(&b.order, 11).unwrap();
        let params = CodeParams::new(1, 2, 1, 11).unwrap();
        for code in enumerate_codes(params, 100).unwrap() {
            let lat = lift_code(&b.order, &map, &code, &b.form, None).unwrap();
            assert_eq!(lat.index(), BigInt::from(11));
            assert!(lat.is_group_stable(&b.order, &b.group));
        }
        assert_eq!(expected_index(11, 1, 2, 1), BigInt::from(11));
    }

    #[test]
    fn prime_ideal_sublattice() {
        // Lift of the zero code for t = 1: the kernel of φ_3.
        let b = Family::Hurwitz.build().unwrap();
        let map = SplittingMap::build(&b.order, 3).unwrap();
        let f = Fp::new(3);
        let flat = map.flat_images();
        let cons: FpMatrix = (0..4).map(|c| flat.iter().map(|r| r[c]).collect()).collect();
        let basis = kernel_lattice_basis(&f, &cons, 4);
        let unit = b.unit_form().unwrap().gram_int().unwrap();
        let lat = LatticeInstance::from_basis(&basis, &unit, 1, Provenance::default()).unwrap();
        assert_eq!(lat.index(), BigInt::from(81));
        assert_eq!(lat.svp().unwrap().min_sq, 36);
    }

    #[test]
    fn beta() {
        assert!((beta_scale(3, 2, 1, 2, 3) - 3f64.powf(-0.25)).abs() < 1e-15);
        assert_eq!(beta_scale(7, 2, 1, 2, 4), 1.0);
    }

    #[test]
    fn bounds_formulas() {
        let b = bad_point_bound(4, 2, 1, 0.0, 3);
        assert!((b - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        let c = bad_point_bound(4, 1, 4, 0.0, 11);
        assert!((c - 2.0 * 11f64.powf(0.25)).abs() < 1e-12);
        let ob = order_bounds(4, 0.0, &BigInt::from(2));
        assert!((ob.lambda1_lb - 2.0).abs() < 1e-12);
        let pi = std::f64::consts::PI;
        assert!((ob.covering_ub - 2f64.powf(0.25) * (2.0 / (2.0 * pi) + 3.0 / pi)).abs() < 1e-12);
        let scaled = order_bounds(4, 4.0 * 5f64.ln(), &BigInt::from(2));
        assert!((scaled.covering_ub / ob.covering_ub - 5f64.powf(-0.5)).abs() < 1e-12);
    }
}
