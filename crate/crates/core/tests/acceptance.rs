//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Criteria run on separate
//! threads and are reported in order. A criterion listed in `KNOWN_FAIL`
//! is reported as FAIL but does not change the exit status.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orderlat::aminima::{a_gram_schmidt, balance, is_left_free, orthonormality_residual, successive_minima, AVector};
use orderlat::catalog::{asymptotic_bounds, effective_prime_lower_bound, find_congruence_prime, Family};
use orderlat::codes::{balancedness_audit, enumerate_codes, sample_code, CodeParams};
use orderlat::ff;
use orderlat::lattice::{
    covering_radius_lower_bound, order_bounds, LatticeInstance, Provenance, ENUM_CAP,
};
use orderlat::primes;
use orderlat::residue::{det_compat_audit, SplittingMap};
use orderlat::search::{
    density_search, lattice_for_index, mc_average, primitive_count, LiftContext, Sampling, SearchConfig,
    SearchMode, TestFunction, TestKind,
};

const KNOWN_FAIL: &[usize] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: Vec<(usize, &str, Duration, Criterion)> = vec![
        (1, "D4 reproduction", Duration::from_secs(1), c1_d4),
        (2, "balancedness", Duration::from_secs(60), c2_balanced),
        (3, "nrd-det compatibility", Duration::from_secs(10), c3_det_compat),
        (4, "bad-point bound", Duration::from_secs(10), c4_bad_points),
        (5, "covering-radius sandwich", Duration::from_secs(30), c5_covering),
        (6, "mean-value trend", Duration::from_secs(300), c6_mean_value),
        (7, "density search", Duration::from_secs(3600), c7_search),
        (8, "Minkowski balancing", Duration::from_secs(600), c8_balancing),
        (9, "A-orthonormality", Duration::from_secs(60), c9_gram_schmidt),
        (10, "effective prime", Duration::from_secs(1800), c10_prime),
        (11, "bound calculators", Duration::from_secs(1), c11_bounds),
    ];
    let results: Vec<(Outcome, Duration)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, _, _, f)| {
                s.spawn(move || {
                    let t0 = Instant::now();
                    let out = std::panic::catch_unwind(f)
                        .unwrap_or_else(|_| outcome(false, "panicked".into()));
                    (out, t0.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut passed = 0;
    let mut blocking = 0;
    for ((id, name, limit, _), (out, elapsed)) in criteria.iter().zip(&results) {
        let in_time = elapsed <= limit;
        let pass = out.pass && in_time;
        let tag = if pass {
            passed += 1;
            "PASS"
        } else if KNOWN_FAIL.contains(id) {
            "FAIL (known)"
        } else {
            blocking += 1;
            "FAIL"
        };
        let time_note = if in_time { String::new() } else { format!(" over limit {limit:?}") };
        println!(
            "criterion {id:>2} {tag}: {name}: {} [{:.2?}{time_note}]",
            out.detail, elapsed
        );
    }
    println!("{passed}/{} criteria passed", criteria.len());
    if blocking > 0 {
        std::process::exit(1);
    }
}

fn hurwitz_unit_gram() -> Vec<Vec<i128>> {
    let b = Family::Hurwitz.build().unwrap();
    b.unit_form().unwrap().gram_int().unwrap()
}

fn quad(g: &[Vec<i128>], x: &[i64]) -> i128 {
    (0..x.len()).map(|i| (0..x.len()).map(|j| g[i][j] * x[i] as i128 * x[j] as i128).sum::<i128>()).sum()
}

fn c1_d4() -> Outcome {
    let g = hurwitz_unit_gram();
    let lat = LatticeInstance::whole(&g, 1, Provenance::default());
    let svp = lat.svp().unwrap();
    let rep = lat.density_from_min(svp.min_sq, &svp);
    // Box oracle: every coordinate in [-2, 2].
    let mut box_min = i128::MAX;
    for idx in 1..5i64.pow(4) {
        let x: Vec<i64> = (0..4).map(|k| (idx / 5i64.pow(k)) % 5 - 2).collect();
        let q = quad(&g, &x);
        if q > 0 {
            box_min = box_min.min(q);
        }
    }
    let covolume = (lat.gram_det().to_string().parse::<f64>().unwrap()).sqrt();
    let oracle_density = PI * PI / 2.0 * (box_min as f64).powi(2) / 16.0 / covolume;
    let pass = svp.min_sq == 4
        && box_min == 4
        && lat.gram_det() == BigInt::from(64)
        && (rep.density - PI * PI / 16.0).abs() < 1e-9
        && (rep.density - oracle_density).abs() < 1e-9;
    outcome(
        pass,
        format!("lambda1^2={} (box {box_min}), covolume={covolume}, density={:.9}", svp.min_sq, rep.density),
    )
}

fn c2_balanced() -> Outcome {
    let sets = [((2, 2, 3, 2), 3u64), ((2, 2, 3, 3), 4), ((1, 2, 1, 5), 1), ((1, 3, 2, 3), 4)];
    let mut pass = true;
    let mut parts = Vec::new();
    for ((n, t, k, p), expected) in sets {
        let rep = balancedness_audit(CodeParams::new(n, t, k, p).unwrap(), 10_000).unwrap();
        pass &= rep.uniform && rep.l == expected && rep.expected_l == expected as u128;
        parts.push(format!("({n},{t},{k},{p}): L={} uniform={}", rep.l, rep.uniform));
    }
    outcome(pass, parts.join("; "))
}

fn c3_det_compat() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (family, ps) in [(Family::Hurwitz, [3u64, 5, 7]), (Family::Cyclotomic { m: 5 }, [11, 31, 41])] {
        let b = family.build().unwrap();
        for p in ps {
            let map = SplittingMap::build(&b.order, p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(p);
            let rep = det_compat_audit(&b.order, &map, 10_000, 50, &mut rng).unwrap();
            pass &= rep.violations.is_empty();
            parts.push(format!("{family} p={p}: {}", rep.violations.len()));
        }
    }
    outcome(pass, format!("violations {}", parts.join(", ")))
}

fn c4_bad_points() -> Outcome {
    let b = Family::Hurwitz.build().unwrap();
    let g = b.unit_form().unwrap().gram_int().unwrap();
    let map = SplittingMap::build(&b.order, 3).unwrap();
    let f = map.field();
    let lat = LatticeInstance::whole(&g, 1, Provenance::default());
    let pts = lat.short_vectors(48, ENUM_CAP).unwrap();
    let mut min_bad = i128::MAX;
    let mut bad = 0;
    let mut witness_ok = false;
    for v in &pts {
        if ff::det(&f, &map.reduce(&v.coords)) == 0 {
            bad += 2;
            min_bad = min_bad.min(v.norm);
        }
    }
    // 1 + i + j in the basis (1, i, j, ω).
    let w = [1i64, 1, 1, 0];
    if ff::det(&f, &map.reduce(&w)) == 0 && quad(&g, &w) == 12 {
        witness_ok = true;
    }
    let pass = min_bad == 12 && witness_ok && bad > 0;
    outcome(
        pass,
        format!(
            "{} points, {bad} singular, min singular norm^2={min_bad} (bound 12), 1+i+j singular={witness_ok}",
            pts.len() * 2
        ),
    )
}

fn c5_covering() -> Outcome {
    let g = hurwitz_unit_gram();
    let lat = LatticeInstance::whole(&g, 1, Provenance::default());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let est = covering_radius_lower_bound(&lat, 100_000, &mut rng).unwrap();
    let ub = order_bounds(4, 0.0, &BigInt::from(2)).covering_ub;
    let pass = (1.40..=1.513).contains(&est.lower_bound) && est.lower_bound <= ub;
    outcome(pass, format!("estimate {:.6} in [1.40, 1.513], upper bound {ub:.6}", est.lower_bound))
}

/// Code-average of primitive points in the ball, by enumerating the ball in
/// `O^t` and testing membership and primitivity code by code.
fn mean_value_oracle(ctx: &LiftContext, r2_unscaled: f64) -> f64 {
    let whole = LatticeInstance::whole(&ctx.form_gram, ctx.params.t, Provenance::default());
    let pts = whole.short_vectors(r2_unscaled.floor() as i128, ENUM_CAP).unwrap();
    let codes = enumerate_codes(ctx.params, 10_000).unwrap();
    let block = ctx.built.order.dim;
    let t = ctx.params.t;
    let reduce = |x: &[i64]| -> Vec<Vec<u64>> {
        let row: Vec<u64> = (0..t).flat_map(|s| ctx.map.reduce(&x[s * block..(s + 1) * block]).concat()).collect();
        vec![row]
    };
    let mut total = 0u64;
    for v in &pts {
        let x = &v.coords;
        let content = x.iter().fold(0i64, |g, &c| g.gcd(&c));
        let divisors: Vec<i64> = (2..=content).filter(|&l| content % l == 0 && primes::is_prime_u64(l as u64)).collect();
        for c in &codes {
            if !c.contains_rows(&reduce(x)) {
                continue;
            }
            let primitive = divisors.iter().all(|&l| {
                let y: Vec<i64> = x.iter().map(|c| c / l).collect();
                !c.contains_rows(&reduce(&y))
            });
            if primitive {
                total += 2;
            }
        }
    }
    total as f64 / codes.len() as f64
}

fn c6_mean_value() -> Outcome {
    let target = 5.0;
    let d = 8;
    let mut means = Vec::new();
    let mut oracle_ok = true;
    for p in [11u64, 31, 101] {
        let ctx = LiftContext::new(Family::Cyclotomic { m: 5 }, 2, 1, p).unwrap();
        let ln_r = ((target * orderlat::special::zeta(d as f64)).ln() + ctx.ln_vol
            - orderlat::special::ln_ball_volume(d))
            / d as f64;
        let f = TestFunction::new(TestKind::Indicator, ln_r.exp(), d, 2);
        let est = mc_average(&ctx, &f, Sampling::Exhaustive, 0, None).unwrap();
        let oracle = mean_value_oracle(&ctx, (f.r / ctx.beta).powi(2));
        oracle_ok &= (est.mean - oracle).abs() < 1e-12 && (est.target - target).abs() < 1e-9;
        means.push(est.mean);
    }
    let bounded = means.iter().all(|&m| m <= target * 1.25);
    let margins: Vec<f64> = means.iter().map(|m| (m / target - 1.0).abs()).collect();
    let monotone = margins.windows(2).all(|w| w[1] < w[0]);
    let pass = oracle_ok && bounded && monotone;
    outcome(
        pass,
        format!(
            "means {:?} at p=11,31,101 (<= 6.25: {bounded}), margins {:?} shrinking: {monotone}, oracle agrees: {oracle_ok}",
            means.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
            margins.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn c7_search() -> Outcome {
    let target = 0.99 * 24.0 * (PI.powi(8) / 9450.0) / 256.0;
    let mut parts = Vec::new();
    let mut any = false;
    let mut audits_ok = true;
    for p in [7u64, 11, 13] {
        let cfg = SearchConfig {
            family: Family::Hurwitz,
            t: 2,
            k: 3,
            p,
            mode: SearchMode::Exhaustive,
            test: TestKind::Indicator,
            epsilon: 0.01,
            seed: 0,
            budget: None,
        };
        let r = density_search(&cfg, None).unwrap();
        let Some(idx) = r.best_index.filter(|_| r.hit) else {
            parts.push(format!("p={p}: miss"));
            continue;
        };
        let best = r.best.as_ref().unwrap();
        let lat = lattice_for_index(&cfg, idx).unwrap();
        let svp = lat.svp().unwrap();
        let min_sq: i128 = best.lambda1_sq.parse().unwrap();
        let certified = r.best_certified && svp.min_sq == min_sq && best.density >= target;
        let balls = [min_sq, 2 * min_sq, 3 * min_sq, r.target_radius_sq_unscaled.floor() as i128];
        let counts: Vec<u64> = balls.iter().map(|&b| primitive_count(&lat, b).unwrap()).collect();
        let divisible = counts.iter().all(|c| c % 24 == 0) && counts[0] > 0;
        audits_ok &= !certified || divisible;
        any |= certified && divisible;
        parts.push(format!(
            "p={p}: {} hits of {}, best density {:.5}, lambda1^2={min_sq}, ball counts {counts:?}",
            r.hits, r.codes_tried, best.density
        ));
    }
    outcome(any && audits_ok, format!("target {target:.5}; {}", parts.join("; ")))
}

fn c8_balancing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ctxs: Vec<LiftContext> =
        [7u64, 11, 13].iter().map(|&p| LiftContext::new(Family::Hurwitz, 2, 3, p).unwrap()).collect();
    let a = ctxs[0].form_f64().unwrap();
    let mut worst_det = 0f64;
    let mut worst_ratio = f64::INFINITY;
    for i in 0..100 {
        let ctx = &ctxs[i % ctxs.len()];
        let code = sample_code(ctx.params, &mut rng);
        let lat = ctx.lift(&code).unwrap();
        let order = &ctx.built.order;
        let profile = successive_minima(order, &lat).unwrap();
        let bal = balance(order, &lat, &profile, &a).unwrap();
        worst_det = worst_det.max((0.5 * bal.ln_det_ratio).exp_m1().abs());
        worst_ratio = worst_ratio.min(bal.lambda1_sq / bal.target_sq());
    }
    let pass = worst_det < 1e-9 && worst_ratio >= 1.0 - 1e-9;
    outcome(
        pass,
        format!("100 lattices, max covolume drift {worst_det:.2e}, min lambda1^2/(min1 min2) {worst_ratio:.6}"),
    )
}

fn c9_gram_schmidt() -> Outcome {
    let orders = [Family::Hurwitz.build().unwrap(), Family::Cyclotomic { m: 5 }.build().unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0f64;
    let mut pairs = 0;
    while pairs < 1000 {
        let b = &orders[pairs % 2];
        let o = &b.order;
        let a: Vec<f64> = if pairs % 4 < 2 {
            o.unity.iter().map(|&x| x as f64).collect()
        } else {
            b.form.value_int().unwrap().iter().map(|&x| x as f64).collect()
        };
        let mut v = || AVector {
            coords: (0..2).map(|_| (0..o.dim).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect(),
        };
        let pair = [v(), v()];
        if !is_left_free(o, &pair) {
            continue;
        }
        let xs = a_gram_schmidt(o, &pair, &a).unwrap();
        worst = worst.max(orthonormality_residual(o, &xs, &a).unwrap());
        pairs += 1;
    }
    outcome(worst < 1e-9, format!("{pairs} pairs, max residual {worst:.2e}"))
}

fn c10_prime() -> Outcome {
    let lower = effective_prime_lower_bound(161);
    // Independent lower bound: (161 * 132^2)^264.
    let base = BigUint::from(161u32 * 132 * 132);
    let mut independent = BigUint::one();
    for _ in 0..264 {
        independent *= &base;
    }
    let p = find_congruence_prime(161, &lower).unwrap();
    let offset = &p - &lower;
    let congruent = (&p % 161u32).is_one();
    let probable = primes::is_probable_prime(&p, 32);
    let pass = lower == independent && offset == BigUint::from(223_147u32) && congruent && probable;
    outcome(
        pass,
        format!(
            "offset {offset}, {} digits, p = 1 mod 161: {congruent}, probable prime: {probable}",
            p.to_string().len()
        ),
    )
}

fn c11_bounds() -> Outcome {
    let cq = asymptotic_bounds(&Family::CyclotomicQuaternion { m: 161 }, 2).unwrap();
    let expected_cq = (24.0f64 * 161.0).log2() - 1056.0;
    let cq_ok = cq.n_k == Some(1056) && (cq.log2_cyclo_quat_target.unwrap() - expected_cq).abs() < 1e-12;

    let h = asymptotic_bounds(&Family::Hurwitz, 2).unwrap();
    let (n, m, t) = (2u32, 1u32, 2u32);
    let d = (n * n * m * t) as i32;
    let zeta8 = PI.powi(8) / 9450.0;
    let tf = t as f64;
    let theorem = 24.0 * zeta8 * tf / (2f64.powi(d) * std::f64::consts::E * (1.0 - (-tf).exp()));
    let thm_ok = h.dimension == d as usize && (h.log2_rogers - theorem.log2()).abs() < 1e-12;
    outcome(
        cq_ok && thm_ok,
        format!(
            "log2 24*161/2^1056 = {:.9} (expected {expected_cq:.9}); rank-t bound log2 = {:.12} (expected {:.12})",
            cq.log2_cyclo_quat_target.unwrap(),
            h.log2_rogers,
            theorem.log2()
        ),
    )
}
