//! Riemann zeta at integers and Euclidean ball volumes.

use std::f64::consts::PI;

/// Bernoulli numbers B_2, B_4, ..., B_16.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// ζ(s) for real s > 1: direct partial sum plus an Euler–Maclaurin tail.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta requires s > 1");
    if s > 60.0 {
        // 2^{-s} already below machine epsilon relative to 1.
        return 1.0 + 2f64.powf(-s) + 3f64.powf(-s);
    }
    const N: usize = 30;
    let n = N as f64;
    let mut sum = 0.0;
    for k in (1..N).rev() {
        sum += (k as f64).powf(-s);
    }
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Σ B_{2j}/(2j)! · s(s+1)…(s+2j-2) · N^{-s-2j+1}
    let mut rising = s; // s(s+1)...(s+2j-2)
    let mut fact = 2.0; // (2j)!
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let j = j + 1;
        tail += b / fact * rising * n.powf(-s - 2.0 * j as f64 + 1.0);
        rising *= (s + 2.0 * j as f64 - 1.0) * (s + 2.0 * j as f64);
        fact *= (2 * j + 1) as f64 * (2 * j + 2) as f64;
    }
    sum + tail
}

/// ln V_d where V_d is the volume of the unit ball in R^d.
pub fn ln_ball_volume(d: usize) -> f64 {
    // V_d = 2π/d · V_{d-2}, V_0 = 1, V_1 = 2.
    let mut ln_v = if d % 2 == 0 { 0.0 } else { 2f64.ln() };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        ln_v += (2.0 * PI / k as f64).ln();
        k += 2;
    }
    ln_v
}

pub fn ball_volume(d: usize) -> f64 {
    ln_ball_volume(d).exp()
}
