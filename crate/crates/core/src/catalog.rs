//! Concrete families of orders: cyclotomic integers, the Hurwitz order,
//! cyclotomic Hurwitz orders and a dihedral crossed product, with their
//! finite unit groups, discriminants and bound calculators.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    AlgebraElement, FiniteUnitGroup, OrderModel, OrderSpec, PositiveElement, ReducedNormRule,
};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::primes;
use crate::special;

/// Largest unit group materialized by closure enumeration.
pub const GROUP_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Hurwitz,
    Cyclotomic { m: u64 },
    CyclotomicQuaternion { m: u64 },
    DihedralQuaternion { m: u64 },
    HurwitzRank { t: usize },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Hurwitz => write!(f, "hurwitz"),
            Family::Cyclotomic { m } => write!(f, "cyclotomic(m={m})"),
            Family::CyclotomicQuaternion { m } => write!(f, "cyclo-quat(m={m})"),
            Family::DihedralQuaternion { m } => write!(f, "dihedral(m={m})"),
            Family::HurwitzRank { t } => write!(f, "hurwitz-rank(t={t})"),
        }
    }
}

/// Whether 2 has odd multiplicative order modulo `m` (odd `m` only).
pub fn admissible(m: u64) -> bool {
    if m == 1 {
        return true;
    }
    if m % 2 == 0 {
        return false;
    }
    primes::multiplicative_order(2, m).is_some_and(|o| o % 2 == 1)
}

impl Family {
    /// Parses a family name as used on the command line.
    pub fn parse(name: &str, m: Option<u64>, t: Option<usize>) -> Result<Self> {
        let need_m = || m.ok_or_else(|| Error::InvalidParams(format!("family {name} needs --m")));
        let fam = match name {
            "hurwitz" => Family::Hurwitz,
            "cyclotomic" | "cyclo" => Family::Cyclotomic { m: need_m()? },
            "cyclo-quat" | "cyclotomic-quaternion" => Family::CyclotomicQuaternion { m: need_m()? },
            "dihedral" | "dihedral-quaternion" => Family::DihedralQuaternion { m: need_m()? },
            "hurwitz-rank" => Family::HurwitzRank {
                t: t.ok_or_else(|| Error::InvalidParams("hurwitz-rank needs --t".into()))?,
            },
            other => return Err(Error::InvalidParams(format!("unknown family '{other}'"))),
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn all_names() -> &'static [&'static str] {
        &["hurwitz", "cyclotomic", "cyclo-quat", "dihedral", "hurwitz-rank"]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Cyclotomic { m } if m < 3 => {
                Err(Error::FamilyConstraint(format!("cyclotomic family needs m >= 3, got {m}")))
            }
            Family::CyclotomicQuaternion { m } if !admissible(m) => Err(Error::FamilyConstraint(
                format!("2 must have odd order modulo m = {m}"),
            )),
            Family::DihedralQuaternion { m } if m < 3 || m % 2 == 0 => Err(
                Error::FamilyConstraint(format!("dihedral family needs odd m >= 3, got {m}")),
            ),
            Family::HurwitzRank { t } if t == 0 => {
                Err(Error::FamilyConstraint("rank t must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// `√[A:K]`
    pub fn n(&self) -> usize {
        match self {
            Family::Cyclotomic { .. } => 1,
            _ => 2,
        }
    }

    /// `[K:Q]`
    pub fn m_deg(&self) -> usize {
        match *self {
            Family::Hurwitz | Family::HurwitzRank { .. } => 1,
            Family::Cyclotomic { m } | Family::CyclotomicQuaternion { m } => {
                primes::euler_phi(m) as usize
            }
            Family::DihedralQuaternion { m } => primes::euler_phi(m) as usize / 2,
        }
    }

    /// `[A:Q] = m n²`
    pub fn dim(&self) -> usize {
        self.m_deg() * self.n() * self.n()
    }

    pub fn g0_order(&self) -> u64 {
        match *self {
            Family::Hurwitz | Family::HurwitzRank { .. } => 24,
            Family::Cyclotomic { m } => num_integer::lcm(2, m),
            Family::CyclotomicQuaternion { m } => 24 * m,
            Family::DihedralQuaternion { m } => 4 * m,
        }
    }

    /// Rank recorded by the family itself (HurwitzRank), if any.
    pub fn fixed_t(&self) -> Option<usize> {
        match *self {
            Family::HurwitzRank { t } => Some(t),
            _ => None,
        }
    }

    /// Modulus of the split congruence `p ≡ 1 (mod m)`; 1 for Hurwitz.
    pub fn split_modulus(&self) -> u64 {
        match *self {
            Family::Hurwitz | Family::HurwitzRank { .. } => 1,
            Family::Cyclotomic { m }
            | Family::CyclotomicQuaternion { m }
            | Family::DihedralQuaternion { m } => m,
        }
    }

    /// Degree-one split criterion used by the residue module.
    pub fn splits_at(&self, p: u64) -> bool {
        p % 2 == 1 && primes::is_prime_u64(p) && p % self.split_modulus() == 1 % self.split_modulus()
    }

    pub fn is_experimental(&self) -> bool {
        matches!(self, Family::DihedralQuaternion { .. })
    }

    pub fn build(&self) -> Result<BuiltFamily> {
        self.validate()?;
        let (order, generators) = match *self {
            Family::Hurwitz | Family::HurwitzRank { .. } => cyclo_hurwitz(1)?,
            Family::Cyclotomic { m } => cyclotomic(m)?,
            Family::CyclotomicQuaternion { m } => cyclo_hurwitz(m)?,
            Family::DihedralQuaternion { m } => dihedral(m)?,
        };
        let group = order.enumerate_group(&generators, GROUP_CAP)?;
        if group.order() as u64 != self.g0_order() {
            return Err(Error::InvalidOrder(format!(
                "unit group has order {}, expected {}",
                group.order(),
                self.g0_order()
            )));
        }
        let form = order.build_invariant_form(&group)?;
        Ok(BuiltFamily { family: *self, order, group, form })
    }
}

/// An order with its finite unit group and G₀-invariant form.
#[derive(Debug, Clone)]
pub struct BuiltFamily {
    pub family: Family,
    pub order: OrderSpec,
    pub group: FiniteUnitGroup,
    pub form: PositiveElement,
}

impl BuiltFamily {
    pub fn unit_form(&self) -> Result<PositiveElement> {
        PositiveElement::unit(&self.order)
    }
}

/// Coefficients (constant term first) of the cyclotomic polynomial Φ_m.
pub fn cyclotomic_polynomial(m: u64) -> Vec<i64> {
    assert!(m >= 1);
    // x^m - 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in (1..m).filter(|d| m % d == 0) {
        num = poly_div_exact(&num, &cyclotomic_polynomial(d));
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    assert_eq!(*den.last().unwrap(), 1, "divisor must be monic");
    let mut q = vec![0i64; rem.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd];
        q[i] = c;
        for (j, &b) in den.iter().enumerate() {
            rem[i + j] -= c * b;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

/// `x^e mod Φ_m` for `e = 0..m`, as coordinate vectors in the power basis.
fn power_table(m: u64) -> Vec<Vec<i64>> {
    let phi_poly = cyclotomic_polynomial(m);
    let deg = phi_poly.len() - 1;
    let mut table = Vec::with_capacity(m as usize);
    let mut cur = vec![0i64; deg];
    cur[0] = 1;
    for _ in 0..m {
        table.push(cur.clone());
        // Multiply by x and reduce the overflow coefficient.
        let top = cur[deg - 1];
        for i in (1..deg).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for i in 0..deg {
                cur[i] -= top * phi_poly[i];
            }
        }
    }
    table
}

fn cyclotomic(m: u64) -> Result<(OrderSpec, Vec<AlgebraElement>)> {
    let pow = power_table(m);
    let deg = pow[0].len();
    let structure = (0..deg)
        .map(|a| (0..deg).map(|b| pow[(a + b) % m as usize].clone()).collect())
        .collect();
    let involution = (0..deg).map(|a| pow[(m as usize - a) % m as usize].clone()).collect();
    let order = OrderSpec::new(
        1,
        deg,
        structure,
        involution,
        pow[0].clone(),
        ReducedNormRule::Commutative,
        (0..deg).map(|a| unit_vec(deg, a)).collect(),
        OrderModel::Cyclotomic { m },
    )?;
    let zeta = pow[1 % m as usize].clone();
    let generator = if m % 2 == 1 { zeta.iter().map(|x| -x).collect() } else { zeta };
    Ok((order, vec![AlgebraElement::from_ints(&generator)]))
}

fn unit_vec(d: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; d];
    v[i] = 1;
    v
}

/// Hurwitz basis `1, i, j, ω` with `ω = (1+i+j+k)/2`, in doubled Lipschitz
/// coordinates.
const HURWITZ_DOUBLED: [[i64; 4]; 4] = [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [1, 1, 1, 1]];

fn hamilton(a: &[i64; 4], b: &[i64; 4]) -> [i64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Hurwitz coordinates of the quaternion `q/4`.
fn hurwitz_coords_of_quarter(q: [i64; 4]) -> Vec<i64> {
    assert!(q[3] % 2 == 0 && (q[0] - q[3]) % 4 == 0 && (q[1] - q[3]) % 4 == 0 && (q[2] - q[3]) % 4 == 0);
    vec![(q[0] - q[3]) / 4, (q[1] - q[3]) / 4, (q[2] - q[3]) / 4, q[3] / 2]
}

fn hurwitz_tables() -> (Vec<Vec<Vec<i64>>>, Vec<Vec<i64>>) {
    let mult = (0..4)
        .map(|s| {
            (0..4)
                .map(|u| hurwitz_coords_of_quarter(hamilton(&HURWITZ_DOUBLED[s], &HURWITZ_DOUBLED[u])))
                .collect()
        })
        .collect();
    let conj = (0..4)
        .map(|s| {
            let h = HURWITZ_DOUBLED[s];
            hurwitz_coords_of_quarter([2 * h[0], -2 * h[1], -2 * h[2], -2 * h[3]])
        })
        .collect();
    (mult, conj)
}

/// `Z[ζ_m] ⊗ H`, index `4a + s` for `ζ^a ⊗ h_s`. `m = 1` gives H itself.
fn cyclo_hurwitz(m: u64) -> Result<(OrderSpec, Vec<AlgebraElement>)> {
    let (hm, hc) = hurwitz_tables();
    let (pow, deg) = if m == 1 {
        (vec![vec![1i64]], 1)
    } else {
        let p = power_table(m);
        let d = p[0].len();
        (p, d)
    };
    let dim = 4 * deg;
    let mut structure = vec![vec![vec![0i64; dim]; dim]; dim];
    for a in 0..deg {
        for b in 0..deg {
            let zab = &pow[(a + b) % m as usize];
            for s in 0..4 {
                for u in 0..4 {
                    let out = &mut structure[4 * a + s][4 * b + u];
                    for (c, &zc) in zab.iter().enumerate() {
                        if zc == 0 {
                            continue;
                        }
                        for (v, &hv) in hm[s][u].iter().enumerate() {
                            out[4 * c + v] += zc * hv;
                        }
                    }
                }
            }
        }
    }
    let mut involution = vec![vec![0i64; dim]; dim];
    let mut canonical = vec![vec![0i64; dim]; dim];
    for a in 0..deg {
        let za = &pow[(m as usize - a) % m as usize];
        for s in 0..4 {
            for (c, &zc) in za.iter().enumerate() {
                for (v, &hv) in hc[s].iter().enumerate() {
                    involution[4 * a + s][4 * c + v] += zc * hv;
                }
            }
            for (v, &hv) in hc[s].iter().enumerate() {
                canonical[4 * a + s][4 * a + v] = hv;
            }
        }
    }
    let center = (0..deg).map(|a| unit_vec(dim, 4 * a)).collect();
    let order = OrderSpec::new(
        2,
        deg,
        structure,
        involution,
        unit_vec(dim, 0),
        ReducedNormRule::Quaternion { canonical },
        center,
        OrderModel::HurwitzTensor { m },
    )?;
    let mut gens = vec![
        AlgebraElement::from_ints(&unit_vec(dim, 1)),
        AlgebraElement::from_ints(&unit_vec(dim, 3)),
    ];
    if m > 1 {
        gens.push(AlgebraElement::from_ints(&unit_vec(dim, 4)));
    }
    Ok((order, gens))
}

/// `Z[ζ_m] ⊕ Z[ζ_m] j` with `j² = -1`, `j z = z̄ j`, over the real subfield.
fn dihedral(m: u64) -> Result<(OrderSpec, Vec<AlgebraElement>)> {
    let pow = power_table(m);
    let deg = pow[0].len();
    let dim = 2 * deg;
    let mu = m as usize;
    let place = |half: usize, v: &[i64], sign: i64, out: &mut Vec<i64>| {
        for (c, &x) in v.iter().enumerate() {
            out[half * deg + c] += sign * x;
        }
    };
    let mut structure = vec![vec![vec![0i64; dim]; dim]; dim];
    for x in 0..dim {
        for y in 0..dim {
            let (hx, a) = (x / deg, x % deg);
            let (hy, b) = (y / deg, y % deg);
            let out = &mut structure[x][y];
            match (hx, hy) {
                (0, 0) => place(0, &pow[(a + b) % mu], 1, out),
                (0, 1) => place(1, &pow[(a + b) % mu], 1, out),
                (1, 0) => place(1, &pow[(a + mu - b) % mu], 1, out),
                _ => place(0, &pow[(a + mu - b) % mu], -1, out),
            }
        }
    }
    let mut involution = vec![vec![0i64; dim]; dim];
    for a in 0..deg {
        place(0, &pow[(mu - a) % mu], 1, &mut involution[a]);
        involution[deg + a][deg + a] = -1;
    }
    let center = (0..deg / 2)
        .map(|a| {
            let mut v = vec![0i64; dim];
            place(0, &pow[a], 1, &mut v);
            place(0, &pow[(mu - a) % mu], 1, &mut v);
            v
        })
        .collect();
    let order = OrderSpec::new(
        2,
        deg / 2,
        structure,
        involution.clone(),
        unit_vec(dim, 0),
        ReducedNormRule::Quaternion { canonical: involution },
        center,
        OrderModel::DihedralCrossed { m },
    )?;
    let minus_zeta: Vec<i64> = {
        let mut v = vec![0i64; dim];
        place(0, &pow[1], -1, &mut v);
        v
    };
    Ok((
        order,
        vec![AlgebraElement::from_ints(&minus_zeta), AlgebraElement::from_ints(&unit_vec(dim, deg))],
    ))
}

/// Product of the primes `p ≤ k` for which 2 has odd order modulo `p`.
pub fn admissible_m_sequence(k: u64) -> Result<u128> {
    if k < 2 {
        return Err(Error::InvalidParams("k must be at least 2".into()));
    }
    let mut acc: u128 = 1;
    for p in (3..=k).filter(|&p| primes::is_prime_u64(p) && admissible(p)) {
        acc = acc
            .checked_mul(p as u128)
            .ok_or_else(|| Error::Overflow(format!("m_k exceeds u128 at prime {p}")))?;
    }
    Ok(acc)
}

/// `|d(Z[ζ_m]/Z)| = m^{φ(m)} / Π_{l | m} l^{φ(m)/(l-1)}`.
pub fn cyclotomic_discriminant(m: u64) -> Result<BigInt> {
    if m < 3 {
        return Err(Error::InvalidParams(format!("cyclotomic discriminant needs m >= 3, got {m}")));
    }
    let phi = primes::euler_phi(m);
    let mut num = BigInt::from(m).pow(phi as u32);
    for l in primes::prime_factors(m) {
        num /= BigInt::from(l).pow((phi / (l - 1)) as u32);
    }
    Ok(num)
}

/// Discriminant data under the conventions in use.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscriminantReport {
    /// `N_{K/Q}(d(O/O_K)) · d(O_K/Z)^{n²}` with the reduced discriminant of
    /// the quaternion part; absent when the family has no closed form.
    pub formula: Option<String>,
    /// `|det(trd(e_i e_j))|` as an exact rational string.
    pub reduced_trace_pairing: String,
    /// `det(T(e_i* e_j))`, the determinant of the trace form `q_1`.
    pub trace_form: String,
}

pub fn order_discriminant(built: &BuiltFamily) -> Result<DiscriminantReport> {
    let fam = built.family;
    let formula = match fam {
        Family::Hurwitz | Family::HurwitzRank { .. } => Some(BigInt::from(2)),
        Family::Cyclotomic { m } => Some(cyclotomic_discriminant(m)?),
        Family::CyclotomicQuaternion { m } if m == 1 => Some(BigInt::from(2)),
        Family::CyclotomicQuaternion { m } => {
            let phi = primes::euler_phi(m) as u32;
            Some(BigInt::from(2).pow(phi) * cyclotomic_discriminant(m)?.pow(4u32))
        }
        Family::DihedralQuaternion { .. } => None,
    };
    let order = &built.order;
    let d = order.dim;
    let n = Rational::from_integer(BigInt::from(order.n));
    let mut pairing = vec![vec![Rational::from_integer(BigInt::from(0)); d]; d];
    for i in 0..d {
        for j in 0..d {
            let prod = order.mul_int(&unit_vec(d, i), &unit_vec(d, j));
            pairing[i][j] = Rational::from_integer(BigInt::from(order.trace_int(&prod))) / &n;
        }
    }
    let pairing_det = exact::det_rational(&pairing);
    let trace_form = exact::det_integer(&order.form_gram_int(&order.unity));
    Ok(DiscriminantReport {
        formula: formula.map(|f| f.to_string()),
        reduced_trace_pairing: exact::rational_string(&num_traits::Signed::abs(&pairing_det)),
        trace_form: trace_form.to_string(),
    })
}

/// Smallest probable prime `p ≥ lower` with `p ≡ 1 (mod m)`.
pub fn find_congruence_prime(m: u64, lower: &BigUint) -> Result<BigUint> {
    primes::next_congruent_prime(m, lower, 64, 50_000_000)
}

/// `(m · φ(m)²)^{2φ(m)}`, the starting point of the effective prime search.
pub fn effective_prime_lower_bound(m: u64) -> BigUint {
    let phi = primes::euler_phi(m);
    let base = BigUint::from(m) * BigUint::from(phi) * BigUint::from(phi);
    Pow::pow(base, 2 * phi as u32)
}

/// Density targets in log₂ form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub family: Family,
    pub t: usize,
    pub dimension: usize,
    pub g0_order: u64,
    pub zeta_d: f64,
    /// `log₂(|G₀| ζ(d) t / (2^d e (1 - e^{-t})))`
    pub log2_rogers: f64,
    /// `log₂(|G₀| ζ(d) / 2^d)`
    pub log2_symmetric: f64,
    /// `log₂(2 ζ(d) / 2^d)`
    pub log2_minkowski_hlawka: f64,
    /// `log₂(24 m / 2^{8φ(m)})` for cyclotomic Hurwitz families.
    pub log2_cyclo_quat_target: Option<f64>,
    pub n_k: Option<usize>,
}

pub fn asymptotic_bounds(family: &Family, t: usize) -> Result<AsymptoticReport> {
    if t == 0 {
        return Err(Error::InvalidParams("t must be positive".into()));
    }
    let d = family.dim() * t;
    let g0 = family.g0_order();
    let zeta_d = if d >= 2 { special::zeta(d as f64) } else { f64::INFINITY };
    let ln2 = std::f64::consts::LN_2;
    let lz = zeta_d.ln() / ln2;
    let tf = t as f64;
    let e_factor = (std::f64::consts::E * (1.0 - (-tf).exp())).ln() / ln2;
    let lg0 = (g0 as f64).log2();
    let (cq, n_k) = match *family {
        Family::CyclotomicQuaternion { m } => {
            let n_k = 8 * primes::euler_phi(m) as usize;
            (Some((24.0 * m as f64).log2() - n_k as f64), Some(n_k))
        }
        Family::Hurwitz | Family::HurwitzRank { .. } => (Some(24f64.log2() - 8.0), Some(8)),
        _ => (None, None),
    };
    Ok(AsymptoticReport {
        family: *family,
        t,
        dimension: d,
        g0_order: g0,
        zeta_d,
        log2_rogers: lg0 + lz + tf.log2() - d as f64 - e_factor,
        log2_symmetric: lg0 + lz - d as f64,
        log2_minkowski_hlawka: 1.0 + lz - d as f64,
        log2_cyclo_quat_target: cq,
        n_k,
    })
}

/// Values derived without building the order, for `family info`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyInfo {
    pub family: Family,
    pub name: String,
    pub n: usize,
    pub m_deg: usize,
    pub dim: usize,
    pub g0_order: u64,
    pub split_modulus: u64,
    pub experimental: bool,
}

impl Family {
    pub fn info(&self) -> FamilyInfo {
        FamilyInfo {
            family: *self,
            name: self.to_string(),
            n: self.n(),
            m_deg: self.m_deg(),
            dim: self.dim(),
            g0_order: self.g0_order(),
            split_modulus: self.split_modulus(),
            experimental: self.is_experimental(),
        }
    }
}
