//! LLL reduction and Fincke–Pohst enumeration driven by an exact integer
//! Gram matrix. Floating point only steers the search; every reported norm
//! is recomputed exactly.

use crate::error::{Error, Result};

pub type Gram = Vec<Vec<i128>>;

/// Exact `cᵀ G c`.
pub fn quad_form(g: &Gram, c: &[i64]) -> i128 {
    let mut s = 0i128;
    for (i, &ci) in c.iter().enumerate() {
        if ci == 0 {
            continue;
        }
        let mut row = 0i128;
        for (j, &cj) in c.iter().enumerate() {
            if cj != 0 {
                row += g[i][j] * cj as i128;
            }
        }
        s += ci as i128 * row;
    }
    s
}

/// `U G Uᵀ`
pub fn transform_gram(g: &Gram, u: &[Vec<i64>]) -> Gram {
    let d = u.len();
    let ug: Vec<Vec<i128>> = u
        .iter()
        .map(|row| {
            (0..g.len())
                .map(|j| row.iter().enumerate().map(|(k, &x)| x as i128 * g[k][j]).sum())
                .collect()
        })
        .collect();
    (0..d)
        .map(|i| (0..d).map(|j| (0..g.len()).map(|k| ug[i][k] * u[j][k] as i128).sum()).collect())
        .collect()
}

/// Gram–Schmidt data `(μ, |b*_i|²)` in floating point.
fn gso(g: &Gram, upto: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = g.len();
    let mut mu = vec![vec![0.0; d]; d];
    let mut r = vec![vec![0.0; d]; d];
    let mut bstar = vec![0.0; d];
    for i in 0..=upto.min(d - 1) {
        for j in 0..=i {
            let mut v = g[i][j] as f64;
            for k in 0..j {
                v -= mu[j][k] * r[i][k];
            }
            r[i][j] = v;
            if j < i {
                mu[i][j] = v / bstar[j];
            }
        }
        bstar[i] = r[i][i];
    }
    (mu, bstar)
}

/// LLL-reduces the basis described by `g` in place and returns the
/// unimodular `U` with `new basis = U · old basis`.
pub fn lll(g: &mut Gram, delta: f64) -> Result<Vec<Vec<i64>>> {
    let d = g.len();
    let mut u: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
    if d <= 1 {
        return Ok(u);
    }
    let mut k = 1;
    let mut iterations = 0u64;
    while k < d {
        iterations += 1;
        if iterations > 10_000_000 {
            return Err(Error::Numerical("LLL failed to terminate".into()));
        }
        let (mut mu, _) = gso(g, k);
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q == 0.0 {
                continue;
            }
            let qi = q as i128;
            // b_k -= q b_j
            for l in 0..d {
                g[k][l] -= qi * g[j][l];
            }
            for l in 0..d {
                g[l][k] -= qi * g[l][j];
            }
            for l in 0..d {
                u[k][l] -= qi as i64 * u[j][l];
            }
            for i in 0..j {
                mu[k][i] -= q * mu[j][i];
            }
            mu[k][j] -= q;
        }
        let (mu, bstar) = gso(g, k);
        if bstar[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            k += 1;
        } else {
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            u.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok(u)
}

/// `G = L D Lᵀ`; returns `(L, D)`, or an error when `G` is not positive
/// definite in floating point.
pub fn ldl_f64(g: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let d = g.len();
    let mut l = vec![vec![0.0; d]; d];
    let mut dd = vec![0.0; d];
    for i in 0..d {
        let mut v = g[i][i];
        for k in 0..i {
            v -= l[i][k] * l[i][k] * dd[k];
        }
        if v <= 0.0 {
            return Err(Error::NotPositiveDefinite { index: i, pivot: format!("{v:e}") });
        }
        dd[i] = v;
        l[i][i] = 1.0;
        for j in i + 1..d {
            let mut w = g[j][i];
            for k in 0..i {
                w -= l[j][k] * l[i][k] * dd[k];
            }
            l[j][i] = w / v;
        }
    }
    Ok((l, dd))
}

pub fn gram_to_f64(g: &Gram) -> Vec<Vec<f64>> {
    g.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect()
}

/// A lattice vector found by enumeration: coordinates in the input basis
/// and the exact norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortVector {
    pub coords: Vec<i64>,
    pub norm: i128,
}

/// All nonzero `c` with `cᵀ G c <= bound`, one representative per `±` pair
/// (the last nonzero coordinate in the reduced basis is positive).
pub fn enumerate_short(g: &Gram, bound: i128, cap: usize) -> Result<Vec<ShortVector>> {
    let d = g.len();
    if d == 0 || bound <= 0 {
        return Ok(Vec::new());
    }
    let mut red = g.clone();
    let u = lll(&mut red, 0.99)?;
    let (l, dd) = ldl_f64(&gram_to_f64(&red))?;
    let slack = bound as f64 * 1e-9 + 1e-6;
    let out = enumerate_ldl(&l, &dd, bound as f64 + slack, cap)?;
    let mut result = Vec::with_capacity(out.len());
    for xr in out {
        // Back to the input basis: c = xᵀ U.
        let mut c = vec![0i64; d];
        for (i, &xi) in xr.iter().enumerate() {
            if xi != 0 {
                for (cj, &uij) in c.iter_mut().zip(&u[i]) {
                    *cj += xi * uij;
                }
            }
        }
        let norm = quad_form(g, &c);
        if norm <= bound {
            result.push(ShortVector { coords: c, norm });
        }
    }
    result.sort_by(|a, b| a.norm.cmp(&b.norm).then_with(|| a.coords.cmp(&b.coords)));
    Ok(result)
}

/// Fincke–Pohst over an `L D Lᵀ` factorization: all nonzero `x` with
/// `xᵀ G x <= bound` (floating point), one per `±` pair.
pub fn enumerate_ldl(l: &[Vec<f64>], dd: &[f64], bound: f64, cap: usize) -> Result<Vec<Vec<i64>>> {
    let d = dd.len();
    let mut out = Vec::new();
    if d == 0 || bound <= 0.0 {
        return Ok(out);
    }
    let mut x = vec![0i64; d];
    let mut ctx = EnumCtx { l, dd, fbound: bound, cap, found: &mut out };
    enum_level(&mut ctx, d - 1, 0.0, true, &mut x)?;
    Ok(out)
}

struct EnumCtx<'a> {
    l: &'a [Vec<f64>],
    dd: &'a [f64],
    fbound: f64,
    cap: usize,
    found: &'a mut Vec<Vec<i64>>,
}

fn enum_level(ctx: &mut EnumCtx, i: usize, partial: f64, zero_above: bool, x: &mut [i64]) -> Result<()> {
    let d = x.len();
    let mut center = 0.0;
    for j in i + 1..d {
        center -= ctx.l[j][i] * x[j] as f64;
    }
    let room = (ctx.fbound - partial) / ctx.dd[i];
    if room < 0.0 {
        return Ok(());
    }
    let radius = room.sqrt();
    let lo = if zero_above { 0 } else { (center - radius).ceil() as i64 };
    let hi = (center + radius).floor() as i64;
    for v in lo..=hi {
        let diff = v as f64 - center;
        let contrib = ctx.dd[i] * diff * diff;
        let next = partial + contrib;
        if next > ctx.fbound {
            continue;
        }
        x[i] = v;
        let still_zero = zero_above && v == 0;
        if i == 0 {
            if !still_zero {
                if ctx.found.len() >= ctx.cap {
                    return Err(Error::EnumerationCap { cap: ctx.cap });
                }
                ctx.found.push(x.to_vec());
            }
        } else {
            enum_level(ctx, i - 1, next, still_zero, x)?;
        }
    }
    x[i] = 0;
    Ok(())
}

/// Squared distance from `target` (real coordinates in the basis of `g`)
/// to the nearest lattice point, by exhaustive enumeration around the
/// target. `l`, `dd` must come from [`ldl_f64`] of the same Gram matrix.
pub fn closest_distance_sq(l: &[Vec<f64>], dd: &[f64], target: &[f64]) -> f64 {
    let d = target.len();
    // Start from Babai rounding in the LDL frame.
    let mut x = vec![0i64; d];
    let mut best = 0.0;
    for i in (0..d).rev() {
        let mut c = target[i];
        for j in i + 1..d {
            c -= l[j][i] * (x[j] as f64 - target[j]);
        }
        x[i] = c.round() as i64;
        let diff = x[i] as f64 - c;
        best += dd[i] * diff * diff;
    }
    let mut bound = best * (1.0 + 1e-12);
    cvp_level(l, dd, target, d - 1, 0.0, &mut x, &mut bound);
    bound
}

fn cvp_level(l: &[Vec<f64>], dd: &[f64], t: &[f64], i: usize, partial: f64, x: &mut [i64], bound: &mut f64) {
    let d = x.len();
    let mut c = t[i];
    for j in i + 1..d {
        c -= l[j][i] * (x[j] as f64 - t[j]);
    }
    let room = (*bound - partial) / dd[i];
    if room < 0.0 {
        return;
    }
    let r = room.sqrt();
    // Visit candidates nearest first so the bound shrinks quickly.
    let mut cands: Vec<i64> = ((c - r).ceil() as i64..=(c + r).floor() as i64).collect();
    cands.sort_by(|a, b| (*a as f64 - c).abs().total_cmp(&(*b as f64 - c).abs()));
    for v in cands {
        let diff = v as f64 - c;
        let next = partial + dd[i] * diff * diff;
        if next > *bound {
            continue;
        }
        x[i] = v;
        if i == 0 {
            *bound = next;
        } else {
            cvp_level(l, dd, t, i - 1, next, x, bound);
        }
    }
}
