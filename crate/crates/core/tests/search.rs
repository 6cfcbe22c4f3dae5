use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orderlat::aminima::{
    a_gram_schmidt, balance, is_left_free, left_span_rank, orthonormality_residual, successive_minima, AVector,
};
use orderlat::catalog::Family;
use orderlat::codes::{sample_code, CodeEnumerator};
use orderlat::search::{
    density_search, density_search_resumable, lattice_sum, Checkpoint, mc_average, primitive_count, LiftContext, Sampling,
    SearchConfig, SearchMode, TestFunction, TestKind,
};

fn config(p: u64, mode: SearchMode, budget: Option<u64>) -> SearchConfig {
    SearchConfig {
        family: Family::Hurwitz,
        t: 2,
        k: 3,
        p,
        mode,
        test: TestKind::Indicator,
        epsilon: 0.01,
        seed: 42,
        budget,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn indicator_sum_is_primitive_count(seed in any::<u64>(), mult in 1.0f64..3.0) {
        let ctx = LiftContext::new(Family::Hurwitz, 2, 3, 5).unwrap();
        let lat = ctx.lift(&sample_code(ctx.params, &mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
        let min = lat.svp().unwrap().min_sq as f64;
        let bound = (mult * min).floor();
        let r = bound.sqrt() * ctx.beta * (1.0 + 1e-12);
        let f = TestFunction::new(TestKind::Indicator, r, 8, 2);
        let sum = lattice_sum(&f, &lat, ctx.beta).unwrap();
        prop_assert_eq!(sum, primitive_count(&lat, bound as i128).unwrap() as f64);
    }

    #[test]
    fn gram_schmidt_orthonormalizes_free_pairs(seed in any::<u64>(), use_form in any::<bool>()) {
        let b = Family::Hurwitz.build().unwrap();
        let o = &b.order;
        let a: Vec<f64> = if use_form {
            b.form.value_int().unwrap().iter().map(|&x| x as f64).collect()
        } else {
            o.unity.iter().map(|&x| x as f64).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = |rng: &mut ChaCha8Rng| {
            use rand::Rng;
            AVector { coords: (0..2).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect() }
        };
        let pair = [v(&mut rng), v(&mut rng)];
        prop_assume!(is_left_free(o, &pair));
        let xs = a_gram_schmidt(o, &pair, &a).unwrap();
        prop_assert!(orthonormality_residual(o, &xs, &a).unwrap() < 1e-9);
        prop_assert!(is_left_free(o, &xs));
    }

    #[test]
    fn balancing_keeps_covolume(seed in any::<u64>(), pi in 0usize..3) {
        let ctx = LiftContext::new(Family::Hurwitz, 2, 3, [5u64, 7, 11][pi]).unwrap();
        let lat = ctx.lift(&sample_code(ctx.params, &mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
        let order = &ctx.built.order;
        let prof = successive_minima(order, &lat).unwrap();
        prop_assert_eq!(prof.minima.len(), 2);
        prop_assert!(prof.minima_sq[0] <= prof.minima_sq[1]);
        prop_assert_eq!(prof.minima_sq[0], lat.svp().unwrap().min_sq);
        prop_assert_eq!(left_span_rank(order, &prof.witnesses), 8);
        let bal = balance(order, &lat, &prof, &ctx.form_f64().unwrap()).unwrap();
        prop_assert!(bal.ln_det_ratio.abs() < 1e-9);
        prop_assert!(bal.lambda1_sq >= bal.target_sq() * (1.0 - 1e-9));
    }
}

#[test]
fn exhaustive_average_matches_direct_sum() {
    let ctx = LiftContext::new(Family::Hurwitz, 2, 3, 5).unwrap();
    let f = TestFunction::new(TestKind::RogersRadial, 4.0 * ctx.beta, 8, 2);
    let est = mc_average(&ctx, &f, Sampling::Exhaustive, 0, Some(3)).unwrap();
    let e = CodeEnumerator::new(ctx.params, 10_000).unwrap();
    let direct: f64 =
        e.iter().map(|c| lattice_sum(&f, &ctx.lift(&c).unwrap(), ctx.beta).unwrap()).sum::<f64>() / e.len() as f64;
    assert_eq!(est.samples as u128, e.len());
    assert!((est.mean - direct).abs() < 1e-9 * direct.max(1.0));
}

#[test]
fn sampled_estimates_are_reproducible() {
    let ctx = LiftContext::new(Family::Hurwitz, 2, 3, 11).unwrap();
    let f = TestFunction::new(TestKind::Indicator, 20.0 * ctx.beta, 8, 2);
    let a = mc_average(&ctx, &f, Sampling::Random { samples: 40 }, 7, Some(1)).unwrap();
    let b = mc_average(&ctx, &f, Sampling::Random { samples: 40 }, 7, Some(4)).unwrap();
    assert_eq!(a.mean, b.mean);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn resumed_search_matches_a_single_run() {
    let cfg = config(7, SearchMode::Exhaustive, None);
    let full = density_search(&cfg, Some(2)).unwrap();
    let dir = std::env::temp_dir().join(format!("orderlat-search-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cp.json");
    let partial = Checkpoint { schema: 1, config: cfg.clone(), next_index: 150, outcomes: full.outcomes[..150].to_vec() };
    std::fs::write(&path, serde_json::to_string(&partial).unwrap()).unwrap();
    let resumed = density_search_resumable(&cfg, Some(2), Some(&path)).unwrap();
    assert_eq!(resumed.outcomes, full.outcomes);
    assert_eq!(resumed.best_index, full.best_index);
    let saved: Checkpoint = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(saved.next_index, 400);

    // A checkpoint for another configuration is ignored.
    let other = config(5, SearchMode::Exhaustive, None);
    let fresh = density_search_resumable(&other, Some(2), Some(&path)).unwrap();
    assert_eq!(fresh.outcomes, density_search(&other, None).unwrap().outcomes);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn search_hits_are_certified() {
    let r = density_search(&config(11, SearchMode::Exhaustive, None), None).unwrap();
    assert!(r.hit && r.best_certified);
    assert_eq!(r.codes_tried as u128, r.codes_total.unwrap());
    for o in &r.outcomes {
        assert_eq!(o.primitive_in_ball % 24, 0);
        assert_eq!(o.hit, o.primitive_in_ball == 0);
        assert_eq!(o.hit, o.lambda1_sq as f64 > r.target_radius_sq_unscaled);
    }
    let best = r.best.unwrap();
    assert!(best.density >= r.target_density);
    assert!(best.density > r.bound_minkowski_hlawka);
}

#[test]
fn sampled_search_is_deterministic() {
    let cfg = config(101, SearchMode::Sampled, Some(12));
    let a = density_search(&cfg, Some(1)).unwrap();
    let b = density_search(&cfg, Some(3)).unwrap();
    assert_eq!(a.mode_used, SearchMode::Sampled);
    assert_eq!(a.outcomes, b.outcomes);
}
