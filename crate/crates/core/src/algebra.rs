//! Exact arithmetic in a Q-division algebra given by integer structure
//! constants on an order basis, together with its positive involution,
//! trace/norm maps, reduced norms and G₀-invariant quadratic forms.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, rat, Rational};

/// How the order basis is laid out, so the residue module can write down
/// explicit splittings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderModel {
    /// Power basis `ζ^a` of `Z[ζ_m]`, `0 <= a < φ(m)`.
    Cyclotomic { m: u64 },
    /// Tensor basis `ζ^a ⊗ {1, i, j, ω}` with `ω = (1+i+j+k)/2`, index
    /// `4a + s`. `m = 1` is the Hurwitz order itself.
    HurwitzTensor { m: u64 },
    /// Crossed-product basis `ζ^a` then `ζ^a j` with `j² = -1`, `jz = z̄j`.
    DihedralCrossed { m: u64 },
    /// Loaded from JSON without a known splitting recipe.
    Opaque,
}

/// Closed form for `nrd_{A/K}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReducedNormRule {
    /// `A = K`, so `nrd_{A/K}(x) = x`.
    Commutative,
    /// Quaternion algebra over K: `nrd_{A/K}(x) = x · x̄` with the canonical
    /// (K-linear) conjugation given by its matrix rows.
    Quaternion { canonical: Vec<Vec<i64>> },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement {
    pub coords: Vec<Rational>,
}

impl AlgebraElement {
    pub fn from_ints(v: &[i64]) -> Self {
        AlgebraElement { coords: v.iter().map(|&x| rat(x)).collect() }
    }

    pub fn zero(dim: usize) -> Self {
        AlgebraElement { coords: vec![Rational::zero(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    pub fn to_ints(&self) -> Result<Vec<i64>> {
        self.coords
            .iter()
            .map(|c| {
                if !c.is_integer() {
                    return Err(Error::NotIntegral);
                }
                c.to_integer().to_i64().ok_or(Error::Overflow("coordinate exceeds i64".into()))
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        AlgebraElement {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        AlgebraElement {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        AlgebraElement { coords: self.coords.iter().map(|a| a * s).collect() }
    }
}

/// An order `O` in a division algebra `A`: basis `e_0..e_{N-1}` with
/// `e_i e_j = Σ_k c[i][j][k] e_k`, a positive involution and the data
/// needed for reduced norms.
#[derive(Debug, Clone)]
pub struct OrderSpec {
    /// `√[A:K]`
    pub n: usize,
    /// `[K:Q]`
    pub m: usize,
    pub dim: usize,
    structure: Vec<i64>,
    /// Row `i` holds the coordinates of `e_i*`.
    pub involution: Vec<Vec<i64>>,
    pub unity: Vec<i64>,
    pub nrd_rule: ReducedNormRule,
    /// Integer coordinates of a Q-basis of the center K.
    pub center_basis: Vec<Vec<i64>>,
    pub model: OrderModel,
    trace_vec: Vec<i64>,
    center_pivots: Vec<usize>,
    center_pivot_inverse: Vec<Vec<Rational>>,
}

/// JSON shape of an order basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderSpecJson {
    pub n: usize,
    pub m: usize,
    pub structure_constants: Vec<Vec<Vec<i64>>>,
    pub involution: Vec<Vec<i64>>,
    #[serde(default)]
    pub unity: Option<Vec<i64>>,
    #[serde(default)]
    pub center_basis: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub reduced_norm: Option<ReducedNormRule>,
    #[serde(default)]
    pub model: Option<OrderModel>,
}

impl OrderSpec {
    /// Builds and validates an order: associativity, unity, involution
    /// axioms and positivity of the trace form are all checked here.
    pub fn new(
        n: usize,
        m: usize,
        structure: Vec<Vec<Vec<i64>>>,
        involution: Vec<Vec<i64>>,
        unity: Vec<i64>,
        nrd_rule: ReducedNormRule,
        center_basis: Vec<Vec<i64>>,
        model: OrderModel,
    ) -> Result<Self> {
        let dim = structure.len();
        if dim != m * n * n {
            return Err(Error::InvalidOrder(format!(
                "basis size {dim} differs from m·n² = {}",
                m * n * n
            )));
        }
        let mut flat = Vec::with_capacity(dim * dim * dim);
        for row in &structure {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            for v in row {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
                }
                flat.extend_from_slice(v);
            }
        }
        if involution.len() != dim || involution.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidOrder("involution matrix has wrong shape".into()));
        }
        if unity.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: unity.len() });
        }
        if center_basis.len() != m {
            return Err(Error::InvalidOrder(format!(
                "center basis has {} elements, expected {m}",
                center_basis.len()
            )));
        }
        let trace_vec = (0..dim)
            .map(|i| (0..dim).map(|j| flat[(i * dim + j) * dim + j]).sum())
            .collect();
        let (center_pivots, center_pivot_inverse) = center_coordinate_system(&center_basis, dim)?;
        let spec = OrderSpec {
            n,
            m,
            dim,
            structure: flat,
            involution,
            unity,
            nrd_rule,
            center_basis,
            model,
            trace_vec,
            center_pivots,
            center_pivot_inverse,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(j: OrderSpecJson) -> Result<Self> {
        let dim = j.structure_constants.len();
        let unity = match j.unity {
            Some(u) => u,
            None => {
                let mut u = vec![0; dim];
                if dim > 0 {
                    u[0] = 1;
                }
                u
            }
        };
        let center = j.center_basis.unwrap_or_else(|| vec![unity.clone()]);
        OrderSpec::new(
            j.n,
            j.m,
            j.structure_constants,
            j.involution,
            unity,
            j.reduced_norm.unwrap_or(ReducedNormRule::None),
            center,
            j.model.unwrap_or(OrderModel::Opaque),
        )
    }

    pub fn to_json(&self) -> OrderSpecJson {
        OrderSpecJson {
            n: self.n,
            m: self.m,
            structure_constants: (0..self.dim)
                .map(|i| (0..self.dim).map(|j| self.product_of_basis(i, j).to_vec()).collect())
                .collect(),
            involution: self.involution.clone(),
            unity: Some(self.unity.clone()),
            center_basis: Some(self.center_basis.clone()),
            reduced_norm: Some(self.nrd_rule.clone()),
            model: Some(self.model.clone()),
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim;
        let basis = |i: usize| -> Vec<i64> {
            let mut v = vec![0; d];
            v[i] = 1;
            v
        };
        for i in 0..d {
            let ei = basis(i);
            if self.mul_int(&self.unity, &ei) != ei || self.mul_int(&ei, &self.unity) != ei {
                return Err(Error::InvalidOrder(format!("unity fails on basis element {i}")));
            }
            if self.involute_int(&self.involution[i]) != ei {
                return Err(Error::InvalidOrder("involution is not an involution".into()));
            }
        }
        for i in 0..d {
            for j in 0..d {
                let eij = self.product_of_basis(i, j).to_vec();
                for k in 0..d {
                    let left = self.mul_int(&eij, &basis(k));
                    let right = self.mul_int(&basis(i), self.product_of_basis(j, k));
                    if left != right {
                        return Err(Error::InvalidOrder(format!(
                            "associativity fails on ({i},{j},{k})"
                        )));
                    }
                }
                let lhs = self.involute_int(&eij);
                let rhs = self.mul_int(&self.involution[j], &self.involution[i]);
                if lhs != rhs {
                    return Err(Error::InvalidOrder(format!(
                        "(e_{i} e_{j})* != e_{j}* e_{i}*"
                    )));
                }
            }
        }
        if let ReducedNormRule::Quaternion { canonical } = &self.nrd_rule {
            if canonical.len() != d || canonical.iter().any(|r| r.len() != d) {
                return Err(Error::InvalidOrder("canonical involution has wrong shape".into()));
            }
        }
        // Positivity of the involution: T(x* x) must be positive definite.
        let gram = self.form_gram_int(&self.unity);
        let pivots = exact::ldl_pivots(&exact::to_rational_matrix(
            &gram.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect::<Vec<_>>(),
        ));
        match pivots {
            Some(p) => {
                if let Some((idx, piv)) = p.iter().enumerate().find(|(_, x)| !x.is_positive()) {
                    return Err(Error::NotPositiveDefinite {
                        index: idx,
                        pivot: exact::rational_string(piv),
                    });
                }
            }
            None => {
                return Err(Error::NotPositiveDefinite { index: 0, pivot: "0".into() });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> i64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    fn product_of_basis(&self, i: usize, j: usize) -> &[i64] {
        let start = (i * self.dim + j) * self.dim;
        &self.structure[start..start + self.dim]
    }

    pub fn one(&self) -> AlgebraElement {
        AlgebraElement::from_ints(&self.unity)
    }

    pub fn basis_element(&self, i: usize) -> AlgebraElement {
        let mut v = vec![0; self.dim];
        v[i] = 1;
        AlgebraElement::from_ints(&v)
    }

    fn check_dim(&self, x: &AlgebraElement) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        Ok(())
    }

    pub fn mul(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let d = self.dim;
        let mut out = vec![Rational::zero(); d];
        for i in 0..d {
            if x.coords[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y.coords[j].is_zero() {
                    continue;
                }
                let xy = &x.coords[i] * &y.coords[j];
                for (k, &c) in self.product_of_basis(i, j).iter().enumerate() {
                    if c != 0 {
                        out[k] += &xy * rat(c);
                    }
                }
            }
        }
        Ok(AlgebraElement { coords: out })
    }

    /// Product of integral elements.
    pub fn mul_int(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        let d = self.dim;
        let mut out = vec![0i64; d];
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0 {
                    continue;
                }
                let xy = x[i] * y[j];
                for (o, &c) in out.iter_mut().zip(self.product_of_basis(i, j)) {
                    *o += xy * c;
                }
            }
        }
        out
    }

    pub fn mul_f64(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0.0 {
                    continue;
                }
                let xy = x[i] * y[j];
                for (o, &c) in out.iter_mut().zip(self.product_of_basis(i, j)) {
                    if c != 0 {
                        *o += xy * c as f64;
                    }
                }
            }
        }
        out
    }

    pub fn involute(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut out = vec![Rational::zero(); self.dim];
        for (xi, row) in x.coords.iter().zip(&self.involution) {
            if xi.is_zero() {
                continue;
            }
            for (o, &c) in out.iter_mut().zip(row) {
                if c != 0 {
                    *o += xi * rat(c);
                }
            }
        }
        AlgebraElement { coords: out }
    }

    pub fn involute_int(&self, x: &[i64]) -> Vec<i64> {
        apply_rows_int(&self.involution, x)
    }

    pub fn involute_f64(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&xi, row) in x.iter().zip(&self.involution) {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += xi * c as f64;
            }
        }
        out
    }

    /// Left-regular matrix `L_x` with `x · e_j = Σ_k L[k][j] e_k`.
    pub fn left_matrix(&self, x: &AlgebraElement) -> Vec<Vec<Rational>> {
        let d = self.dim;
        let mut l = vec![vec![Rational::zero(); d]; d];
        for i in 0..d {
            if x.coords[i].is_zero() {
                continue;
            }
            for j in 0..d {
                for (k, &c) in self.product_of_basis(i, j).iter().enumerate() {
                    if c != 0 {
                        l[k][j] += &x.coords[i] * rat(c);
                    }
                }
            }
        }
        l
    }

    pub fn left_matrix_f64(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim;
        let mut l = vec![vec![0.0; d]; d];
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                for (k, &c) in self.product_of_basis(i, j).iter().enumerate() {
                    if c != 0 {
                        l[k][j] += x[i] * c as f64;
                    }
                }
            }
        }
        l
    }

    /// `T_{A/Q}(x)`: trace of left multiplication.
    pub fn trace_q(&self, x: &AlgebraElement) -> Rational {
        x.coords
            .iter()
            .zip(&self.trace_vec)
            .filter(|(_, &t)| t != 0)
            .map(|(c, &t)| c * rat(t))
            .sum()
    }

    pub fn trace_int(&self, x: &[i64]) -> i64 {
        x.iter().zip(&self.trace_vec).map(|(a, b)| a * b).sum()
    }

    pub fn trace_f64(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.trace_vec).map(|(a, &b)| a * b as f64).sum()
    }

    /// `N_{A/Q}(x)`: determinant of left multiplication.
    pub fn norm_q(&self, x: &AlgebraElement) -> Rational {
        exact::det_rational(&self.left_matrix(x))
    }

    pub fn norm_int(&self, x: &[i64]) -> BigInt {
        let d = self.dim;
        let mut l = vec![vec![0i64; d]; d];
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                for (k, &c) in self.product_of_basis(i, j).iter().enumerate() {
                    l[k][j] += x[i] * c;
                }
            }
        }
        exact::det_integer(&l)
    }

    /// `trd_{A/Q}(x) = T(x)/n`.
    pub fn reduced_trace(&self, x: &AlgebraElement) -> Rational {
        self.trace_q(x) / rat(self.n as i64)
    }

    /// `nrd_{A/K}(x)` as a central element of A.
    pub fn reduced_norm_center(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        match &self.nrd_rule {
            ReducedNormRule::Commutative => Ok(x.clone()),
            ReducedNormRule::Quaternion { canonical } => {
                let conj = apply_rows_rational(canonical, &x.coords);
                self.mul(x, &AlgebraElement { coords: conj })
            }
            ReducedNormRule::None => Err(Error::NoReducedNorm),
        }
    }

    pub fn reduced_norm_center_int(&self, x: &[i64]) -> Result<Vec<i64>> {
        match &self.nrd_rule {
            ReducedNormRule::Commutative => Ok(x.to_vec()),
            ReducedNormRule::Quaternion { canonical } => {
                Ok(self.mul_int(x, &apply_rows_int(canonical, x)))
            }
            ReducedNormRule::None => Err(Error::NoReducedNorm),
        }
    }

    /// Coordinates of a central element in `center_basis`.
    pub fn center_coords(&self, z: &AlgebraElement) -> Vec<Rational> {
        let k = self.center_pivots.len();
        (0..k)
            .map(|c| {
                self.center_pivots
                    .iter()
                    .enumerate()
                    .map(|(r, &pc)| &z.coords[pc] * &self.center_pivot_inverse[r][c])
                    .sum()
            })
            .collect()
    }

    /// `N_{K/Q}(z)` for central `z`: determinant of multiplication by `z`
    /// on the center basis.
    pub fn center_norm(&self, z: &AlgebraElement) -> Result<Rational> {
        let mut rows = Vec::with_capacity(self.m);
        for b in &self.center_basis {
            let prod = self.mul(z, &AlgebraElement::from_ints(b))?;
            let coords = self.center_coords(&prod);
            let recon = coords.iter().zip(&self.center_basis).fold(
                AlgebraElement::zero(self.dim),
                |acc, (c, b)| acc.add(&AlgebraElement::from_ints(b).scale(c)),
            );
            if recon != prod {
                return Err(Error::InvalidOrder("element is not central".into()));
            }
            rows.push(coords);
        }
        Ok(exact::det_rational(&rows))
    }

    /// `nrd_{A/Q}(x) = N_{K/Q}(nrd_{A/K}(x))`, satisfying `N(x) = nrd(x)^n`.
    pub fn reduced_norm(&self, x: &AlgebraElement) -> Result<Rational> {
        let c = self.reduced_norm_center(x)?;
        self.center_norm(&c)
    }

    /// Gram matrix `G[i][j] = T(e_i* a e_j)` of the form `q_a(x) = T(x* a x)`
    /// for an integral `a`.
    pub fn form_gram_int(&self, a: &[i64]) -> Vec<Vec<i128>> {
        let d = self.dim;
        let mut g = vec![vec![0i128; d]; d];
        for i in 0..d {
            let left = self.mul_int(&self.involution[i], a);
            for j in 0..d {
                let mut ej = vec![0; d];
                ej[j] = 1;
                g[i][j] = self.trace_int(&self.mul_int(&left, &ej)) as i128;
            }
        }
        g
    }

    pub fn form_gram(&self, a: &AlgebraElement) -> Result<Vec<Vec<Rational>>> {
        let d = self.dim;
        let mut g = vec![vec![Rational::zero(); d]; d];
        for i in 0..d {
            let left = self.mul(&AlgebraElement::from_ints(&self.involution[i]), a)?;
            for j in 0..d {
                g[i][j] = self.trace_q(&self.mul(&left, &self.basis_element(j))?);
            }
        }
        Ok(g)
    }

    pub fn is_central(&self, x: &[i64]) -> bool {
        (0..self.dim).all(|i| {
            let mut e = vec![0; self.dim];
            e[i] = 1;
            self.mul_int(x, &e) == self.mul_int(&e, x)
        })
    }

    /// Builds `a = Σ_{g∈G₀} g* g` and certifies positivity and G₀-invariance.
    pub fn build_invariant_form(&self, group: &FiniteUnitGroup) -> Result<PositiveElement> {
        let mut a = vec![0i64; self.dim];
        for g in &group.elements {
            let gg = self.mul_int(&self.involute_int(g), g);
            for (x, y) in a.iter_mut().zip(gg) {
                *x += y;
            }
        }
        let pos = PositiveElement::new(self, AlgebraElement::from_ints(&a))?;
        let gram = self.form_gram_int(&a);
        let d = self.dim;
        for g in &group.elements {
            // Pᵀ G P with P = L_g (column j = g e_j).
            let cols: Vec<Vec<i64>> = (0..d)
                .map(|j| {
                    let mut e = vec![0; d];
                    e[j] = 1;
                    self.mul_int(g, &e)
                })
                .collect();
            let gp: Vec<Vec<i128>> = cols
                .iter()
                .map(|c| (0..d).map(|k| (0..d).map(|l| gram[k][l] * c[l] as i128).sum()).collect())
                .collect();
            for i in 0..d {
                for j in 0..d {
                    let s: i128 = (0..d).map(|k| cols[i][k] as i128 * gp[j][k]).sum();
                    if s != gram[i][j] {
                        return Err(Error::InvalidOrder("form is not G₀-invariant".into()));
                    }
                }
            }
        }
        Ok(pos)
    }

    /// Closure of `generators` under multiplication, failing past `cap`.
    pub fn enumerate_group(&self, generators: &[AlgebraElement], cap: usize) -> Result<FiniteUnitGroup> {
        let gens: Vec<Vec<i64>> = generators.iter().map(|g| g.to_ints()).collect::<Result<_>>()?;
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut elements = vec![self.unity.clone()];
        seen.insert(self.unity.clone());
        let mut queue: VecDeque<Vec<i64>> = VecDeque::from([self.unity.clone()]);
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = self.mul_int(&x, g);
                if seen.insert(y.clone()) {
                    if elements.len() >= cap {
                        return Err(Error::GroupCapExceeded { cap });
                    }
                    elements.push(y.clone());
                    queue.push_back(y);
                }
            }
        }
        for g in &elements {
            let nrm = self.norm_int(g);
            if nrm.abs() != BigInt::one() {
                return Err(Error::InvalidOrder(format!("group element {g:?} has norm {nrm}")));
            }
        }
        Ok(FiniteUnitGroup { elements })
    }

    /// `(T(x* a x)/d, |N(x)|^{2/d} N(a)^{1/d})`; the first always dominates.
    pub fn norm_trace_gap(&self, x: &AlgebraElement, a: &AlgebraElement) -> Result<(Rational, f64)> {
        let d = self.dim as f64;
        let xax = self.mul(&self.mul(&self.involute(x), a)?, x)?;
        let lhs = self.trace_q(&xax) / rat(self.dim as i64);
        let nx = self.norm_q(x);
        let na = self.norm_q(a);
        let rhs = if nx.is_zero() {
            0.0
        } else {
            (2.0 / d * exact::ln_rational(&nx.abs()) + exact::ln_rational(&na) / d).exp()
        };
        Ok((lhs, rhs))
    }
}

fn apply_rows_int(rows: &[Vec<i64>], x: &[i64]) -> Vec<i64> {
    let d = rows.first().map_or(0, Vec::len);
    let mut out = vec![0; d];
    for (&xi, row) in x.iter().zip(rows) {
        if xi == 0 {
            continue;
        }
        for (o, &c) in out.iter_mut().zip(row) {
            *o += xi * c;
        }
    }
    out
}

fn apply_rows_rational(rows: &[Vec<i64>], x: &[Rational]) -> Vec<Rational> {
    let d = rows.first().map_or(0, Vec::len);
    let mut out = vec![Rational::zero(); d];
    for (xi, row) in x.iter().zip(rows) {
        if xi.is_zero() {
            continue;
        }
        for (o, &c) in out.iter_mut().zip(row) {
            if c != 0 {
                *o += xi * rat(c);
            }
        }
    }
    out
}

fn center_coordinate_system(basis: &[Vec<i64>], dim: usize) -> Result<(Vec<usize>, Vec<Vec<Rational>>)> {
    // Greedily pick columns that make the square submatrix invertible.
    let mut pivots: Vec<usize> = Vec::new();
    for col in 0..dim {
        if pivots.len() == basis.len() {
            break;
        }
        let mut trial = pivots.clone();
        trial.push(col);
        let sub: Vec<Vec<i64>> = trial.iter().map(|&c| basis.iter().map(|b| b[c]).collect()).collect();
        if exact::rank_integer(&sub) == trial.len() {
            pivots = trial;
        }
    }
    if pivots.len() != basis.len() {
        return Err(Error::InvalidOrder("center basis is linearly dependent".into()));
    }
    let sq: Vec<Vec<Rational>> = pivots
        .iter()
        .map(|&c| basis.iter().map(|b| rat(b[c])).collect())
        .collect();
    // z[pivots] = coords · B[:, pivots]; sq = B[:,pivots]ᵀ so coords = z_p · (sqᵀ)^{-1}.
    let sqt: Vec<Vec<Rational>> = (0..basis.len())
        .map(|i| (0..pivots.len()).map(|j| sq[j][i].clone()).collect())
        .collect();
    let inv = exact::inverse_rational(&sqt)
        .ok_or_else(|| Error::InvalidOrder("singular center basis".into()))?;
    Ok((pivots, inv))
}

/// A symmetric element `a` whose form `x ↦ T(x* a x)` is positive definite.
#[derive(Debug, Clone)]
pub struct PositiveElement {
    pub value: AlgebraElement,
    pub gram: Vec<Vec<Rational>>,
}

impl PositiveElement {
    pub fn new(order: &OrderSpec, value: AlgebraElement) -> Result<Self> {
        if order.involute(&value) != value {
            return Err(Error::InvalidOrder("form element is not symmetric".into()));
        }
        let gram = match value.to_ints() {
            Ok(v) => order
                .form_gram_int(&v)
                .into_iter()
                .map(|r| r.into_iter().map(|x| Rational::from_integer(BigInt::from(x))).collect())
                .collect(),
            Err(_) => order.form_gram(&value)?,
        };
        for i in 0..order.dim {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidOrder("trace form is not symmetric".into()));
                }
            }
        }
        let pivots = exact::ldl_pivots(&gram)
            .ok_or(Error::NotPositiveDefinite { index: 0, pivot: "0".into() })?;
        if let Some((index, p)) = pivots.iter().enumerate().find(|(_, p)| !p.is_positive()) {
            return Err(Error::NotPositiveDefinite { index, pivot: exact::rational_string(p) });
        }
        Ok(PositiveElement { value, gram })
    }

    pub fn unit(order: &OrderSpec) -> Result<Self> {
        Self::new(order, order.one())
    }

    pub fn value_int(&self) -> Result<Vec<i64>> {
        self.value.to_ints()
    }

    /// Integral Gram matrix; errors if `a` has fractional entries.
    pub fn gram_int(&self) -> Result<Vec<Vec<i128>>> {
        self.gram
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        if !x.is_integer() {
                            return Err(Error::NotIntegral);
                        }
                        x.to_integer().to_i128().ok_or(Error::Overflow("gram entry".into()))
                    })
                    .collect()
            })
            .collect()
    }
}

/// A finite subgroup `G₀ ⊂ O^×`, stored as integer coordinate vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteUnitGroup {
    pub elements: Vec<Vec<i64>>,
}

impl FiniteUnitGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn trivial(order: &OrderSpec) -> Self {
        FiniteUnitGroup { elements: vec![order.unity.clone()] }
    }
}

/// Convenience: a rational from a big integer.
pub fn big_rat(x: BigInt) -> Rational {
    BigRational::from_integer(x)
}
