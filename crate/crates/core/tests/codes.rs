use std::collections::HashSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orderlat::codes::{gaussian_binomial, in_u_rows, sample_code, CodeEnumerator, CodeParams};
use orderlat::ff::{self, Fp};

fn small_params() -> impl Strategy<Value = CodeParams> {
    (1usize..=2, 1usize..=3, prop::sample::select(vec![2u64, 3, 5]))
        .prop_flat_map(|(n, t, p)| (Just(n), Just(t), 1..=n * t, Just(p)))
        .prop_filter("enumerable", |&(n, t, k, p)| {
            gaussian_binomial(n * t, k, p).is_some_and(|c| c <= 5_000)
        })
        .prop_map(|(n, t, k, p)| CodeParams::new(n, t, k, p).unwrap())
}

/// Counts k-dimensional subspaces by brute force over all k × w matrices.
fn subspace_count(w: usize, k: usize, p: u64) -> usize {
    let f = Fp::new(p);
    let total = (p as usize).pow((w * k) as u32);
    let mut seen = HashSet::new();
    for idx in 0..total {
        let mut rest = idx;
        let mut m: Vec<Vec<u64>> = (0..k)
            .map(|_| {
                (0..w)
                    .map(|_| {
                        let v = (rest % p as usize) as u64;
                        rest /= p as usize;
                        v
                    })
                    .collect()
            })
            .collect();
        if ff::rref(&f, &mut m).len() == k {
            seen.insert(m);
        }
    }
    seen.len()
}

#[test]
fn gaussian_binomial_matches_brute_force() {
    for (w, k, p) in [(2, 1, 2), (3, 1, 3), (3, 2, 2), (4, 2, 2), (4, 3, 3), (4, 2, 3)] {
        assert_eq!(gaussian_binomial(w, k, p).unwrap() as usize, subspace_count(w, k, p), "w={w} k={k} p={p}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unranking_is_a_bijection_onto_rref(params in small_params()) {
        let e = CodeEnumerator::new(params, 5_000).unwrap();
        let f = Fp::new(params.p);
        let mut seen = HashSet::new();
        for code in e.iter() {
            let mut again = code.rows.clone();
            let piv = ff::rref(&f, &mut again);
            prop_assert_eq!(&again, &code.rows);
            prop_assert_eq!(&piv, &code.pivots);
            prop_assert_eq!(piv.len(), params.k);
            prop_assert!(seen.insert(code.rows.clone()));
        }
        prop_assert_eq!(seen.len() as u128, params.count().unwrap());
    }

    #[test]
    fn sampled_codes_are_valid(params in small_params(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = sample_code(params, &mut rng);
        let f = Fp::new(params.p);
        prop_assert_eq!(ff::rank(&f, &code.rows), params.k);
        let mut again = code.rows.clone();
        ff::rref(&f, &mut again);
        prop_assert_eq!(again, code.rows.clone());
        // Rows of the code are contained, their sum too.
        let sum: Vec<u64> = (0..params.width())
            .map(|c| code.rows.iter().fold(0, |acc, r| f.add(acc, r[c])))
            .collect();
        prop_assert!(code.contains_rows(&vec![sum]));
    }

    #[test]
    fn expansion_has_p_to_nk_elements(params in small_params().prop_filter("small", |p| p.p.pow((p.n * p.k) as u32) <= 4096)) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let code = sample_code(params, &mut rng);
        let all = code.expand();
        prop_assert_eq!(all.len() as u64, params.p.pow((params.n * params.k) as u32));
        let distinct: HashSet<_> = all.iter().collect();
        prop_assert_eq!(distinct.len(), all.len());
        for v in &all {
            prop_assert!(code.contains(v));
        }
        let good = all.iter().filter(|v| in_u_rows(&v.concat(), params.p)).count();
        if params.k < params.n {
            prop_assert_eq!(good, 0);
        }
    }
}
