use lgp_core::bounds::{
    constructive_rate_ub, fitness_gap_bound, hitting_time_with, lambda_bounds, omega_bounds, reduction_ranges,
    DeltaConstants, SpaceParams,
};
use lgp_core::evolution::random_program;
use lgp_core::stats::rank_sum;
use lgp_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn default_set(features: usize) -> InstructionSet {
    InstructionSet::standard(&RegisterConfig::with_features(features))
}

fn probe(features: usize, cases: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|_| (0..features).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect()
}

fn output_bits(p: &Program, s0: &Semantics) -> Vec<u64> {
    execute(p, s0).register_column(0).iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn removing_introns_keeps_output_bits(seed in any::<u64>(), len in 0usize..60, features in 1usize..4) {
        let iset = default_set(features);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(len, 100, &iset, &mut rng);
        let s0 = init_registers(iset.config(), &probe(features, 16, seed ^ 1)).unwrap();
        let full = output_bits(&p, &s0);
        prop_assert_eq!(&full, &output_bits(&p.without_introns(iset.config()), &s0));
        // Dropping any single intron is also invisible.
        let mask = p.introns(iset.config());
        for (k, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            let mut ins = p.instructions().to_vec();
            ins.remove(k);
            prop_assert_eq!(&full, &output_bits(&Program::new(ins, 100).unwrap(), &s0));
        }
    }

    #[test]
    fn execution_is_deterministic_and_keeps_features(seed in any::<u64>(), len in 0usize..40) {
        let iset = default_set(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(len, 100, &iset, &mut rng);
        let s0 = init_registers(iset.config(), &probe(2, 8, seed)).unwrap();
        let a = execute(&p, &s0);
        let b = std::thread::scope(|s| s.spawn(|| execute(&p, &s0)).join().unwrap());
        prop_assert_eq!(a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        for c in 0..a.num_cases {
            prop_assert_eq!(&a.case(c)[8..], &s0.case(c)[8..]);
        }
    }

    #[test]
    fn freemut_respects_length_limit(seed in any::<u64>(), len in 0usize..=100, u in 0usize..20) {
        let iset = default_set(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(len, 100, &iset, &mut rng);
        let added = freemut_add(&p, u, &iset, &mut rng);
        prop_assert_eq!(added.len(), (len + u).min(100));
        let removed = freemut_remove(&p, u, &mut rng);
        prop_assert!(removed.len() <= 100);
        prop_assert_eq!(removed.len(), if len > u { len - u } else { len.min(1) });
        // The parent survives as a subsequence of the grown child.
        let mut it = added.instructions().iter();
        prop_assert!(p.instructions().iter().all(|x| it.any(|y| y == x)));
    }

    #[test]
    fn rse_is_nonnegative_and_permutation_invariant(seed in any::<u64>(), len in 0usize..30) {
        let (train, _) = Benchmark::Keijzer11.train_test(seed % 7).unwrap();
        let iset = default_set(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(len, 100, &iset, &mut rng);
        let r = rse(&p, &train, iset.config()).unwrap();
        prop_assert!(r >= 0.0);
        let mut order: Vec<usize> = (0..train.num_cases()).collect();
        order.reverse();
        let shuffled = Dataset::new(
            "rev",
            order.iter().map(|&i| train.features[i].clone()).collect(),
            order.iter().map(|&i| train.targets[i]).collect(),
        ).unwrap();
        let r2 = rse(&p, &shuffled, iset.config()).unwrap();
        prop_assert!((r - r2).abs() <= 1e-9 * r.max(1.0));
    }

    #[test]
    fn bloating_bounds_are_ordered_and_scale_with_n(
        gamma in 2usize..10, out in 1usize..3, n_per in 1u64..50, m1 in 0usize..20, k in 0usize..6,
    ) {
        prop_assume!(out < gamma);
        let n = n_per * gamma as u64;
        let p = SpaceParams::new(gamma, out, n, 1, 200).unwrap();
        let p2 = SpaceParams::new(gamma, out, 2 * n, 1, 200).unwrap();
        for f in [omega_bounds, lambda_bounds] {
            let a = f(m1, m1 + k, &p).unwrap();
            let b = f(m1, m1 + k, &p2).unwrap();
            prop_assert!(a.ln_lower <= a.ln_upper + 1e-12);
            if a.ln_lower.is_finite() {
                prop_assert!((b.ln_lower - a.ln_lower - k as f64 * 2f64.ln()).abs() < 1e-9);
            }
            if a.ln_upper.is_finite() {
                prop_assert!((b.ln_upper - a.ln_upper - k as f64 * 2f64.ln()).abs() < 1e-9);
            }
            if let (Some((lo, hi)), Some((lo2, hi2))) = (a.exact, b.exact) {
                let scale = num_rational::BigRational::from_integer(num_bigint::BigInt::from(2u64.pow(k as u32)));
                prop_assert_eq!(lo2, lo * &scale);
                prop_assert_eq!(hi2, hi * scale);
            }
        }
    }

    #[test]
    fn fitness_gap_bound_grows_with_distance(
        psi in 0.0f64..100.0, f_psi in 0.0f64..10.0, i_star in 0.0f64..5.0, extra in 0.0f64..5.0, l in 1usize..50,
    ) {
        let c = DeltaConstants { psi, f_psi, i_star, i_sq: i_star + extra };
        let mut prev = 0.0;
        for d in 0..=l {
            let b = fitness_gap_bound(d as f64, l, &c).unwrap();
            prop_assert!(b + 1e-12 >= prev);
            prev = b;
        }
    }

    #[test]
    fn truncated_rate_is_bounded(d in 1usize..12, m in 1usize..101, u in 1usize..36) {
        let p = SpaceParams::nguyen4();
        let (i1, i2) = reduction_ranges(d, m, u);
        let r = constructive_rate_ub(d, m, u, &p, true);
        prop_assert!(r >= 0.0);
        prop_assert!(r <= 0.5 * (i1 as f64 + (1.0 + i2 as f64) / 2.0) + 1e-12);
    }

    #[test]
    fn faster_constant_rate_never_takes_longer(slow in 0.01f64..3.0, boost in 1.0f64..3.0, d0 in 1usize..12) {
        let q_slow = hitting_time_with(d0 as f64, 1e-4, |_| slow).unwrap();
        let q_fast = hitting_time_with(d0 as f64, 1e-4, |_| slow * boost).unwrap();
        prop_assert!(q_fast <= q_slow);
    }

    #[test]
    fn rank_sum_is_symmetric(a in prop::collection::vec(0.0f64..10.0, 1..12), b in prop::collection::vec(0.0f64..10.0, 1..12)) {
        let x = rank_sum(&a, &b).p;
        let y = rank_sum(&b, &a).p;
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert!((x - y).abs() < 1e-9);
    }

    #[test]
    fn program_text_round_trips(seed in any::<u64>(), len in 0usize..30) {
        let iset = default_set(3).build_variant(Variant::Scaled(1.1)).build_variant(Variant::AddOffset(100.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(len, 100, &iset, &mut rng);
        prop_assert_eq!(Program::parse(&p.to_text(), 100).unwrap(), p);
    }
}

/// Exon removal is only expected to be visible on most probes: an exon can
/// still be semantically neutral (for instance `R1 = R0 - R0` feeding a
/// product that is overwritten later), so this is a statistical check.
#[test]
fn removing_exons_usually_changes_output() {
    let iset = default_set(1);
    let s0 = init_registers(iset.config(), &probe(1, 64, 9)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut exons, mut visible) = (0usize, 0usize);
    for _ in 0..500 {
        let p = random_program(20, 100, &iset, &mut rng);
        let full = output_bits(&p, &s0);
        for (k, _) in p.introns(iset.config()).iter().enumerate().filter(|(_, &m)| !m) {
            let mut ins = p.instructions().to_vec();
            ins.remove(k);
            exons += 1;
            visible += (output_bits(&Program::new(ins, 100).unwrap(), &s0) != full) as usize;
        }
    }
    let share = visible as f64 / exons as f64;
    assert!(share > 0.9, "{visible}/{exons}");
}

/// With equal add and remove rates and no selection, program size drifts
/// by zero in expectation away from the length limits.
#[test]
fn operators_have_no_size_bias() {
    use rand::Rng;
    let iset = default_set(1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0i64;
    let trials = 40_000;
    for _ in 0..trials {
        let p = random_program(50, 100, &iset, &mut rng);
        let r: f64 = rng.random();
        let child = if r < 0.45 {
            freemut_add(&p, 3, &iset, &mut rng)
        } else if r < 0.9 {
            freemut_remove(&p, 3, &mut rng)
        } else {
            p.clone()
        };
        total += child.len() as i64 - 50;
    }
    let mean = total as f64 / trials as f64;
    // Standard error is about 2.85 / sqrt(40000) ≈ 0.014.
    assert!(mean.abs() < 0.07, "{mean}");
}

#[test]
fn variants_preserve_the_default_set() {
    let base = default_set(2);
    for v in Variant::ALL {
        let set = base.build_variant(v);
        assert!(base.members().iter().all(|m| set.members().contains(m)), "{v}");
    }
}

/// With rates that differ between distance bands, a faster step can land on
/// a slow band that a slower step would have skipped, so pointwise faster
/// rates do not always mean an earlier hit.
#[test]
fn faster_band_rate_can_land_in_a_slow_band() {
    let rates = [0.0, 0.01, 1.5, 1.5];
    let slow = hitting_time_with(3.0, 1e-4, |k| rates[k]).unwrap();
    let fast = hitting_time_with(3.0, 1e-4, |k| if k == 3 { 2.0 } else { rates[k] }).unwrap();
    assert_eq!(slow, 2);
    assert_eq!(fast, 101);
}
