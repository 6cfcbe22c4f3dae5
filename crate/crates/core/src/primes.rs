//! Prime utilities: deterministic tests for machine-size integers and a
//! Baillie–PSW style probable-prime test (Miller–Rabin plus strong Lucas)
//! for big integers.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for all 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    prime_factors(n).iter().fold(n, |acc, &p| acc / p * (p - 1))
}

/// Multiplicative order of `a` modulo `m` (requires gcd(a, m) = 1, m ≥ 2).
pub fn multiplicative_order(a: u64, m: u64) -> Option<u64> {
    if m < 2 || a.gcd(&m) != 1 {
        return None;
    }
    let phi = euler_phi(m);
    let mut ord = phi;
    for q in prime_factors(phi) {
        while ord % q == 0 && pow_mod(a, ord / q, m) == 1 {
            ord /= q;
        }
    }
    Some(ord)
}

/// Smallest primitive root modulo an odd prime.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("prime has a primitive root")
}

pub fn pow_mod_u64(b: u64, e: u64, m: u64) -> u64 {
    pow_mod(b, e, m)
}

fn small_primes(limit: u64) -> Vec<u64> {
    let mut sieve = vec![true; limit as usize + 1];
    sieve[0] = false;
    if limit >= 1 {
        sieve[1] = false;
    }
    let mut i = 2;
    while i * i <= limit as usize {
        if sieve[i] {
            let mut j = i * i;
            while j <= limit as usize {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..=limit).filter(|&i| sieve[i as usize]).collect()
}

fn jacobi(a: &BigInt, n: &BigInt) -> i32 {
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut result = 1;
    let three = BigInt::from(3);
    let five = BigInt::from(5);
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = n.mod_floor(&eight);
            if r == three || r == five {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&four) == three && n.mod_floor(&four) == three {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

fn miller_rabin_round(n: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let n_minus_1 = n - 1u32;
    let mut x = a.modpow(d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

fn half_mod(x: BigInt, n: &BigInt) -> BigInt {
    let x = if x.is_odd() { x + n } else { x };
    let h: BigInt = x >> 1;
    h.mod_floor(n)
}

/// Strong Lucas probable-prime test with Selfridge parameters.
fn strong_lucas(n: &BigUint) -> bool {
    let nb = BigInt::from_biguint(Sign::Plus, n.clone());
    let root = n.sqrt();
    if &(&root * &root) == n {
        return false;
    }
    let mut d_val: i64 = 5;
    loop {
        let j = jacobi(&BigInt::from(d_val), &nb);
        if j == -1 {
            break;
        }
        if j == 0 && BigInt::from(d_val.abs()) != nb {
            return false;
        }
        d_val = if d_val > 0 { -(d_val + 2) } else { -d_val + 2 };
    }
    let d_big = BigInt::from(d_val);
    let q = BigInt::from((1 - d_val) / 4);
    let np1: BigInt = &nb + 1;
    let s = np1.trailing_zeros().unwrap_or(0);
    let k = &np1 >> s;

    // Binary ladder for U_k, V_k with P = 1.
    let mut u = BigInt::one();
    let mut v = BigInt::one();
    let mut qk = q.mod_floor(&nb);
    let bits = k.bits();
    for i in (0..bits - 1).rev() {
        u = (&u * &v).mod_floor(&nb);
        v = (&v * &v - &qk * 2u32).mod_floor(&nb);
        qk = (&qk * &qk).mod_floor(&nb);
        if k.bit(i) {
            let nu = half_mod(&u + &v, &nb);
            let nv = half_mod(&d_big * &u + &v, &nb);
            u = nu;
            v = nv;
            qk = (&qk * &q).mod_floor(&nb);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = (&v * &v - &qk * 2u32).mod_floor(&nb);
        if v.is_zero() {
            return true;
        }
        qk = (&qk * &qk).mod_floor(&nb);
    }
    false
}

/// Probable-prime test: trial division, Miller–Rabin to base 2 plus
/// `rounds` seeded random bases, then one strong Lucas test.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    for p in small_primes(2000).into_iter().skip(1) {
        if (n % p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    if !miller_rabin_round(n, &d, s, &BigUint::from(2u32)) {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_9e11);
    let two = BigUint::from(2u32);
    for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        if !miller_rabin_round(n, &d, s, &a) {
            return false;
        }
    }
    strong_lucas(n)
}

/// Smallest probable prime `p >= lower` with `p ≡ 1 (mod m)`, trying at
/// most `max_candidates` members of the progression.
pub fn next_congruent_prime(m: u64, lower: &BigUint, rounds: usize, max_candidates: u64) -> Result<BigUint> {
    assert!(m >= 1);
    let mb = BigUint::from(m);
    // First element of the progression 1 + mℤ that is >= lower.
    let r = lower % &mb;
    let one_mod = BigUint::one() % &mb;
    let mut start = lower - &r + &one_mod;
    if &start < lower {
        start += &mb;
    }
    let sieve_primes = small_primes(1 << 16);
    let residues: Vec<(u64, u64, u64)> = sieve_primes
        .iter()
        .map(|&q| ((&start % q).to_u64().unwrap(), m % q, q))
        .collect();
    // The sieve is only sound once every candidate exceeds the sieve primes.
    let use_sieve = start.bits() > 17;
    for i in 0..max_candidates {
        if use_sieve
            && residues.iter().any(|&(r0, step, q)| {
                (r0 as u128 + i as u128 * step as u128) % q as u128 == 0
            })
        {
            continue;
        }
        let cand = &start + BigUint::from(i) * &mb;
        if is_probable_prime(&cand, rounds) {
            return Ok(cand);
        }
    }
    Err(Error::PrimeSearchExhausted { tried: max_candidates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(3_215_031_751));
    }

    #[test]
    fn orders_and_roots() {
        assert_eq!(multiplicative_order(2, 7), Some(3));
        assert_eq!(multiplicative_order(2, 23), Some(11));
        assert_eq!(multiplicative_order(2, 5), Some(4));
        assert_eq!(primitive_root(11), 2);
        assert_eq!(euler_phi(161), 132);
    }

    #[test]
    fn big_probable_primes() {
        // 2^127 - 1 is prime, 2^128 + 1 is not.
        let m127 = (BigUint::one() << 127) - 1u32;
        assert!(is_probable_prime(&m127, 8));
        let f7 = (BigUint::one() << 128) + 1u32;
        assert!(!is_probable_prime(&f7, 8));
        // Strong pseudoprime to many bases: 3825123056546413051 (fits u64 but
        // exercise the big path via a product of two 40-bit primes).
        let c = BigUint::from(1_099_511_627_791u64) * BigUint::from(1_099_511_628_211u64);
        assert!(!is_probable_prime(&c, 4));
    }

    #[test]
    fn lucas_agrees_on_medium_numbers() {
        for n in (1u64 << 40..(1u64 << 40) + 2000).filter(|n| n % 2 == 1) {
            let big = BigUint::from(n);
            if big.bits() > 0 && !(0..10).any(|q| q > 1 && n % q == 0) {
                assert_eq!(strong_lucas(&big), is_prime_u64(n), "n = {n}");
            }
        }
    }

    #[test]
    fn congruence_prime_small() {
        assert_eq!(next_congruent_prime(5, &BigUint::from(2u32), 8, 1000).unwrap(), BigUint::from(11u32));
        assert_eq!(next_congruent_prime(7, &BigUint::from(2u32), 8, 1000).unwrap(), BigUint::from(29u32));
        assert_eq!(next_congruent_prime(1, &BigUint::from(90u32), 8, 1000).unwrap(), BigUint::from(97u32));
    }
}
