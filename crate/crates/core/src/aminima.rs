//! The A-valued inner product on `A_R^t`, Gram–Schmidt over `A_R`,
//! A-successive minima and Minkowski balancing.
//!
//! Floating point throughout; witnesses and spans are handled exactly
//! because lattice vectors have integer coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::OrderSpec;
use crate::error::{Error, Result};
use crate::exact;
use crate::lattice::{reduce, LatticeInstance, ENUM_CAP};

/// Relative threshold below which `⟨u,u⟩_A` counts as singular.
const SINGULAR_TOL: f64 = 1e-12;

/// An element of `A_R^t`: `t` algebra elements in the order's Q-basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AVector {
    pub coords: Vec<Vec<f64>>,
}

impl AVector {
    pub fn zero(t: usize, dim: usize) -> Self {
        AVector { coords: vec![vec![0.0; dim]; t] }
    }

    /// Splits a flat `O^t` coordinate vector into blocks.
    pub fn from_flat(v: &[f64], dim: usize) -> Self {
        AVector { coords: v.chunks(dim).map(|c| c.to_vec()).collect() }
    }

    pub fn from_ints(v: &[i64], dim: usize) -> Self {
        AVector { coords: v.chunks(dim).map(|c| c.iter().map(|&x| x as f64).collect()).collect() }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.coords.concat()
    }

    pub fn t(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().flatten().all(|&x| x == 0.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        AVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        AVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }

    /// `α · x`, coordinatewise left multiplication.
    pub fn left_mul(&self, order: &OrderSpec, alpha: &[f64]) -> Self {
        AVector { coords: self.coords.iter().map(|c| order.mul_f64(alpha, c)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        AVector { coords: self.coords.iter().map(|c| c.iter().map(|x| x * s).collect()).collect() }
    }
}

/// `⟨x, y⟩_A = Σ x_i a y_i*`.
pub fn a_inner(order: &OrderSpec, x: &AVector, y: &AVector, a: &[f64]) -> Result<Vec<f64>> {
    if x.t() != y.t() {
        return Err(Error::DimensionMismatch { expected: x.t(), got: y.t() });
    }
    let mut out = vec![0.0; order.dim];
    for (xi, yi) in x.coords.iter().zip(&y.coords) {
        let term = order.mul_f64(&order.mul_f64(xi, a), &order.involute_f64(yi));
        for (o, v) in out.iter_mut().zip(term) {
            *o += v;
        }
    }
    Ok(out)
}

/// `⟨x, y⟩_R = T(⟨x, y⟩_A)`.
pub fn real_inner(order: &OrderSpec, x: &AVector, y: &AVector, a: &[f64]) -> Result<f64> {
    Ok(order.trace_f64(&a_inner(order, x, y, a)?))
}

fn left_dmatrix(order: &OrderSpec, x: &[f64]) -> DMatrix<f64> {
    let l = order.left_matrix_f64(x);
    DMatrix::from_fn(order.dim, order.dim, |i, j| l[i][j])
}

fn unity_f64(order: &OrderSpec) -> DVector<f64> {
    DVector::from_iterator(order.dim, order.unity.iter().map(|&x| x as f64))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Two-sided inverse of `u`, via its left-regular matrix.
pub fn element_inverse(order: &OrderSpec, u: &[f64]) -> Result<Vec<f64>> {
    let l = left_dmatrix(order, u);
    let sv = l.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smax == 0.0 || smin / smax < SINGULAR_TOL {
        return Err(Error::Numerical(format!("element is numerically singular (condition {:e})", smax / smin)));
    }
    let z = l
        .lu()
        .solve(&unity_f64(order))
        .ok_or_else(|| Error::Numerical("singular left-regular matrix".into()))?;
    Ok(z.iter().copied().collect())
}

/// Cholesky factor `L` of the trace form `T(e_i* e_j)`, giving coordinates in
/// which left multiplication by symmetric elements is a symmetric matrix.
fn trace_form_factor(order: &OrderSpec) -> Result<DMatrix<f64>> {
    let g = order.form_gram_int(&order.unity);
    let m = DMatrix::from_fn(order.dim, order.dim, |i, j| g[i][j] as f64);
    Ok(m.cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite { index: 0, pivot: "trace form".into() })?
        .l())
}

/// For symmetric positive `s`, the symmetric `b = s^{-1/2}`, so that
/// `b* b = s^{-1}`.
pub fn inverse_sqrt(order: &OrderSpec, s: &[f64]) -> Result<Vec<f64>> {
    let l = trace_form_factor(order)?;
    let lt = l.transpose();
    let lt_inv = lt
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("trace form factor not invertible".into()))?;
    let sym = &lt * left_dmatrix(order, s) * &lt_inv;
    let asym = (&sym - sym.transpose()).abs().max();
    if asym > 1e-8 * sym.abs().max().max(1.0) {
        return Err(Error::Numerical("element is not symmetric".into()));
    }
    let eig = nalgebra::SymmetricEigen::new((&sym + sym.transpose()) * 0.5);
    if let Some((i, &ev)) = eig.eigenvalues.iter().enumerate().find(|(_, &e)| e <= 0.0) {
        return Err(Error::NotPositiveDefinite { index: i, pivot: format!("{ev:e}") });
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e.sqrt()));
    let m = &lt_inv * &eig.eigenvectors * d * eig.eigenvectors.transpose() * &lt;
    Ok((m * unity_f64(order)).iter().copied().collect())
}

/// `pr(u, v) = ⟨v, u⟩_A ⟨u, u⟩_A^{-1} u`, the component of `v` along the
/// left module `A u`; `v - pr(u, v)` is orthogonal to `u`.
pub fn project(order: &OrderSpec, u: &AVector, v: &AVector, a: &[f64]) -> Result<AVector> {
    if u.is_zero() {
        return Ok(AVector::zero(u.t(), order.dim));
    }
    let uu = a_inner(order, u, u, a)?;
    let coef = order.mul_f64(&a_inner(order, v, u, a)?, &element_inverse(order, &uu)?);
    Ok(u.left_mul(order, &coef))
}

/// Orthonormalizes left-free vectors: `⟨x_i, x_j⟩_A = δ_ij`, with `x_j` in
/// the left span of `v_1..v_j`.
pub fn a_gram_schmidt(order: &OrderSpec, vs: &[AVector], a: &[f64]) -> Result<Vec<AVector>> {
    let mut out: Vec<AVector> = Vec::with_capacity(vs.len());
    for (idx, v) in vs.iter().enumerate() {
        let scale = real_inner(order, v, v, a)?;
        let mut w = v.clone();
        // Two passes of modified Gram–Schmidt keep the residual at rounding level.
        for _ in 0..2 {
            for x in &out {
                let c = a_inner(order, &w, x, a)?;
                w = w.sub(&x.left_mul(order, &c));
            }
        }
        let ww = a_inner(order, &w, &w, a)?;
        if order.trace_f64(&ww) <= SINGULAR_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!("vector {idx} depends on the previous ones")));
        }
        let b = inverse_sqrt(order, &ww)?;
        out.push(w.left_mul(order, &b));
    }
    Ok(out)
}

/// Largest entry of `⟨x_i, x_j⟩_A - δ_ij 1_A` in absolute value.
pub fn orthonormality_residual(order: &OrderSpec, xs: &[AVector], a: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in xs.iter().enumerate() {
            let mut g = a_inner(order, x, y, a)?;
            if i == j {
                for (gk, &u) in g.iter_mut().zip(&order.unity) {
                    *gk -= u as f64;
                }
            }
            worst = worst.max(max_abs(&g));
        }
    }
    Ok(worst)
}

/// Integer rows spanning the left module `Σ O v_i` over Q.
fn left_span_rows(order: &OrderSpec, vs: &[Vec<i64>], block: usize) -> Vec<Vec<i64>> {
    let mut rows = Vec::new();
    for v in vs {
        for k in 0..order.dim {
            let mut e = vec![0i64; order.dim];
            e[k] = 1;
            rows.push((0..v.len() / block).flat_map(|s| order.mul_int(&e, &v[s * block..(s + 1) * block])).collect());
        }
    }
    rows
}

/// Real dimension of `A_R v_1 + … + A_R v_j` (exact).
pub fn left_span_rank(order: &OrderSpec, vs: &[Vec<i64>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    exact::rank_integer(&left_span_rows(order, vs, order.dim))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaProfile {
    /// `min_1 <= … <= min_t` (lengths).
    pub minima: Vec<f64>,
    /// Exact squared minima.
    pub minima_sq: Vec<i128>,
    /// Witnesses in ambient `O^t` coordinates.
    pub witnesses: Vec<Vec<i64>>,
}

/// Greedy A-successive minima: scan lattice vectors by exact norm and keep
/// each one not in the left span of those already kept.
pub fn successive_minima(order: &OrderSpec, instance: &LatticeInstance) -> Result<MinimaProfile> {
    let t = instance.t;
    let mut red = instance.gram.clone();
    reduce::lll(&mut red, 0.99)?;
    let mut bound = (0..instance.dim()).map(|i| red[i][i]).min().unwrap_or(0);
    loop {
        let vecs = instance.short_vectors(bound, ENUM_CAP)?;
        let mut witnesses: Vec<Vec<i64>> = Vec::new();
        let mut minima_sq = Vec::new();
        let mut rank = 0;
        for v in &vecs {
            let amb = instance.ambient(&v.coords);
            witnesses.push(amb);
            let r = left_span_rank(order, &witnesses);
            if r > rank {
                rank = r;
                minima_sq.push(v.norm);
                if minima_sq.len() == t {
                    break;
                }
            } else {
                witnesses.pop();
            }
        }
        if minima_sq.len() == t {
            return Ok(MinimaProfile {
                minima: minima_sq.iter().map(|&m| (m as f64).sqrt()).collect(),
                minima_sq,
                witnesses,
            });
        }
        bound = bound.checked_mul(2).ok_or_else(|| Error::Overflow("minima search radius".into()))?;
    }
}

/// The balanced lattice `Λ' = (Π min_i)^{1/t} · T(Λ)` with
/// `T(Σ y_i x_i) = Σ (y_i / min_i) x_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalancedLattice {
    pub scale: f64,
    pub minima: Vec<f64>,
    /// Rows in `A_R^t` coordinates, one per input basis vector.
    pub basis: Vec<Vec<f64>>,
    pub gram: Vec<Vec<f64>>,
    /// The integer basis it was derived from.
    pub source_basis: Vec<Vec<i64>>,
    pub lambda1_sq: f64,
    /// Shortest vector of `Λ'` in coordinates of the source basis.
    pub shortest: Vec<i64>,
    /// Exact `q(v)` of its preimage in Λ.
    pub shortest_preimage_norm: i128,
    /// `ln det G' - ln det G`.
    pub ln_det_ratio: f64,
}

impl BalancedLattice {
    /// `(Π min_i)^{2/t}`, the squared lower bound for `λ₁(Λ')`.
    pub fn target_sq(&self) -> f64 {
        let t = self.minima.len() as f64;
        (self.minima.iter().map(|m| m.ln()).sum::<f64>() * 2.0 / t).exp()
    }

    /// Real basis with 15 significant digits, one row per line.
    pub fn basis_text(&self) -> String {
        self.basis
            .iter()
            .map(|r| r.iter().map(|x| format!("{x:.14e}")).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }
}

fn real_gram(order: &OrderSpec, rows: &[AVector], a: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = rows.len();
    let mut g = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let v = 0.5 * (real_inner(order, &rows[i], &rows[j], a)? + real_inner(order, &rows[j], &rows[i], a)?);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

fn ln_det_f64(g: &[Vec<f64>]) -> Result<f64> {
    let (_, dd) = reduce::ldl_f64(g)?;
    Ok(dd.iter().map(|x| x.ln()).sum())
}

pub fn balance(
    order: &OrderSpec,
    instance: &LatticeInstance,
    profile: &MinimaProfile,
    a: &[f64],
) -> Result<BalancedLattice> {
    let block = order.dim;
    let t = instance.t;
    // The appendix form must reproduce the lattice Gram matrix.
    let src: Vec<AVector> = instance.basis.iter().map(|b| AVector::from_ints(b, block)).collect();
    let g0 = real_gram(order, &src, a)?;
    for (i, row) in g0.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let exact = instance.gram[i][j] as f64;
            if (v - exact).abs() > 1e-9 * exact.abs().max(1.0) {
                return Err(Error::Numerical(format!(
                    "form convention mismatch at ({i}, {j}): {v} vs {exact}"
                )));
            }
        }
    }
    let ws: Vec<AVector> = profile.witnesses.iter().map(|w| AVector::from_ints(w, block)).collect();
    let xs = a_gram_schmidt(order, &ws, a)?;
    let scale = (profile.minima.iter().map(|m| m.ln()).sum::<f64>() / t as f64).exp();

    let transform = |v: &AVector| -> Result<AVector> {
        let mut out = AVector::zero(t, block);
        for (x, &lam) in xs.iter().zip(&profile.minima) {
            let c = a_inner(order, v, x, a)?;
            let c: Vec<f64> = c.iter().map(|y| y * scale / lam).collect();
            out = out.add(&x.left_mul(order, &c));
        }
        Ok(out)
    };
    let rows: Vec<AVector> = src.iter().map(&transform).collect::<Result<_>>()?;
    let gram = real_gram(order, &rows, a)?;
    let ln_det_ratio = ln_det_f64(&gram)? - exact::ln_bigint(&instance.gram_det());

    // Shortest vector of Λ', enumerated in an LLL basis of Λ.
    let mut red = instance.gram.clone();
    let u = reduce::lll(&mut red, 0.99)?;
    let d = instance.dim();
    let combine = |coeffs: &[i64]| -> AVector {
        let mut acc = AVector::zero(t, block);
        for (&c, r) in coeffs.iter().zip(&rows) {
            if c != 0 {
                acc = acc.add(&r.scale(c as f64));
            }
        }
        acc
    };
    let red_rows: Vec<AVector> = u.iter().map(|c| combine(c)).collect();
    let red_gram = real_gram(order, &red_rows, a)?;
    let (l, dd) = reduce::ldl_f64(&red_gram)?;
    let upper = (0..d).map(|i| red_gram[i][i]).fold(f64::INFINITY, f64::min);
    let cands = reduce::enumerate_ldl(&l, &dd, upper * (1.0 + 1e-9), ENUM_CAP)?;
    let norm = |x: &[i64]| -> f64 {
        (0..d)
            .map(|i| (0..d).map(|j| red_gram[i][j] * x[i] as f64 * x[j] as f64).sum::<f64>())
            .sum()
    };
    let best = cands
        .iter()
        .map(|x| (norm(x), x))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::Numerical("no vector found for the balanced lattice".into()))?;
    let mut shortest = vec![0i64; d];
    for (i, &xi) in best.1.iter().enumerate() {
        for (s, &uij) in shortest.iter_mut().zip(&u[i]) {
            *s += xi * uij;
        }
    }
    let shortest_preimage_norm = reduce::quad_form(&instance.gram, &shortest);
    Ok(BalancedLattice {
        scale,
        minima: profile.minima.clone(),
        basis: rows.iter().map(|r| r.flat()).collect(),
        gram,
        source_basis: instance.basis.clone(),
        lambda1_sq: best.0,
        shortest,
        shortest_preimage_norm,
        ln_det_ratio,
    })
}

/// Whether `(a_1..a_m) ↦ Σ a_i x_i` is injective (full real rank).
pub fn is_left_free(order: &OrderSpec, xs: &[AVector]) -> bool {
    let dim = order.dim;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for x in xs {
        for k in 0..dim {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            rows.push(x.left_mul(order, &e).flat());
        }
    }
    if rows.is_empty() {
        return true;
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let sv = m.singular_values();
    sv.min() > 1e-9 * sv.max()
}
