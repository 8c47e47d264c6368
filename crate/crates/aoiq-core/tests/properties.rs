//! Property tests: structural invariants that must hold for every valid
//! distribution and queue spec, not just the hand-picked oracle points.

use aoiq_core::analytic::{
    self, cross_expectations, gginf_drop_time_distribution, ArrivalSpec, FixedPointOpts, QueueSpec,
};
use aoiq_core::dist::DiscreteDist;
use aoiq_core::sim::invariants::check_trace;
use aoiq_core::sim::{run_simulation, SimConfig};
use proptest::prelude::*;

fn arb_dist() -> impl Strategy<Value = DiscreteDist> {
    prop_oneof![
        (1u64..=15).prop_map(|v| DiscreteDist::deterministic(v).unwrap()),
        (0.05f64..=0.95).prop_map(|p| DiscreteDist::geometric(p).unwrap()),
        (1u64..=8, 0u64..=8).prop_map(|(a, w)| DiscreteDist::uniform(a, a + w).unwrap()),
        proptest::collection::btree_map(1u64..=12, 0.05f64..1.0, 1..5).prop_map(|m| {
            let total: f64 = m.values().sum();
            let pmf: Vec<(u64, f64)> = m.into_iter().map(|(k, p)| (k, p / total)).collect();
            DiscreteDist::explicit(&pmf).unwrap()
        }),
    ]
}

/// Service laws kept small enough that moderate arrival rates stay stable.
fn arb_short_service() -> impl Strategy<Value = DiscreteDist> {
    prop_oneof![
        Just(DiscreteDist::deterministic(1).unwrap()),
        (0.55f64..=0.95).prop_map(|p| DiscreteDist::geometric(p).unwrap()),
        Just(DiscreteDist::uniform(1, 2).unwrap()),
        Just(DiscreteDist::explicit(&[(1, 0.8), (2, 0.15), (3, 0.05)]).unwrap()),
    ]
}

proptest! {
    #[test]
    fn dist_mass_moments_and_survival_are_consistent(d in arb_dist()) {
        let stored: f64 = d.support().iter().map(|&(_, p)| p).sum();
        prop_assert!((stored + d.tail_mass() - 1.0).abs() < 1e-9);
        prop_assert!(d.min_support() >= 1);
        prop_assert!(d.mean() >= d.min_support() as f64 - 1e-12);
        // E[S²] ≥ E[S]² (variance is non-negative).
        prop_assert!(d.second_moment() + 1e-9 >= d.mean() * d.mean());
        prop_assert!(d.variance() >= -1e-9);
        // Survival: starts at 1 (support is positive), non-increasing, in [0,1].
        prop_assert_eq!(d.survival(0), 1.0);
        let mut prev = 1.0;
        for k in 1..=40u64 {
            let s = d.survival(k);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!(s <= prev + 1e-12);
            prev = s;
        }
        // Survival sums back to the mean: E[S] = Σ_{k≥0} P(S > k).
        if let Some(max) = d.max_support() {
            let sum: f64 = (0..max).map(|k| d.survival(k)).sum();
            prop_assert!((sum - d.mean()).abs() < 1e-9);
        }
    }

    #[test]
    fn pgf_is_monotone_and_normalized(d in arb_dist(), x in 0.0f64..=1.0) {
        let at_x = d.pgf_eval(x).unwrap();
        let at_one = d.pgf_eval(1.0).unwrap();
        prop_assert!((at_one - 1.0).abs() < 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&at_x));
        prop_assert!(at_x <= at_one + 1e-12);
        prop_assert!(d.pgf_derivative(x).unwrap() >= -1e-12);
        // Derivative at 1 recovers the mean.
        prop_assert!((d.pgf_derivative(1.0).unwrap() - d.mean()).abs() < 1e-7);
        prop_assert!(d.pgf_eval(1.5).is_err());
    }

    #[test]
    fn samples_stay_in_support(d in arb_dist(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..64 {
            let k = d.sample(&mut rng);
            prop_assert!(k >= d.min_support());
            if let Some(max) = d.max_support() {
                prop_assert!(k <= max);
            }
            prop_assert!(d.pmf(k) > 0.0);
        }
    }

    #[test]
    fn fcfs_ages_are_ordered_and_dominated_by_vacations(
        lambda in 0.02f64..=0.6,
        s in arb_short_service(),
        v in arb_dist(),
    ) {
        let base = QueueSpec::fcfs(lambda, s.clone());
        prop_assume!(base.rho().unwrap() < 0.98);
        let a = analytic::evaluate(&base).unwrap();
        let (peak, avg) = (a.peak_age.unwrap(), a.avg_age.unwrap());
        // Any sampled age is at least 1, a delivered update needs at least
        // one slot of service plus one of transit, and the peak dominates
        // the average.
        prop_assert!(avg >= 1.0 + s.mean() - 1e-12);
        prop_assert!(peak >= avg - 1e-12);
        prop_assert!(peak.is_finite() && avg.is_finite());

        let vac = QueueSpec::fcfs_vacation(lambda, s, v);
        let b = analytic::evaluate(&vac).unwrap();
        let vac_peak = b.peak_age.unwrap();
        // Idle-period vacations can only delay deliveries.
        prop_assert!(vac_peak >= peak - 1e-12);
        // The two bound expressions keep their order even where the lower
        // one is known not to contain the truth.
        prop_assert!(b.avg_age_upper.unwrap() >= b.avg_age_lower.unwrap() - 1e-9);
    }

    #[test]
    fn lcfs_cross_expectations_are_exact_and_ordered(x in arb_dist(), s in arb_dist()) {
        let ce = cross_expectations(&x, &s);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ce.p_serve));
        prop_assert_eq!(ce.truncation_bound, 0.0);
        // S·1{S≤X} ≤ min(X,S) ≤ X pointwise.
        prop_assert!(ce.e_s_served <= ce.e_min + 1e-9);
        prop_assert!(ce.e_min <= x.mean() + 1e-9);
        prop_assert!(ce.e_min <= s.mean() + 1e-9);
        if ce.p_serve > 0.0 {
            let spec = QueueSpec::lcfs(ArrivalSpec::Renewal(x), s);
            let a = analytic::evaluate(&spec).unwrap();
            prop_assert!(a.peak_age.unwrap() >= 1.0 - 1e-12);
            prop_assert!(a.avg_age.unwrap() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn drop_time_is_between_one_and_service(x in arb_dist(), s in arb_dist()) {
        let drop = gginf_drop_time_distribution(&x, &s, &FixedPointOpts::default()).unwrap();
        // D = min(S, …) with every term ≥ 1.
        prop_assert!(drop.mean >= 1.0 - 1e-12);
        prop_assert!(drop.mean <= s.mean() + 1e-9);
        prop_assert!(drop.diagnostics.residual <= 1e-12);
        prop_assert!(drop.diagnostics.truncation_bound < 1e-9);
        if s.max_support() == Some(s.min_support()) {
            // Deterministic service: replacements never help, D ≡ s.
            prop_assert!((drop.mean - s.mean()).abs() < 1e-9);
            prop_assert_eq!(drop.diagnostics.iterations, 1);
        }
    }
}

proptest! {
    // Simulation-backed property: heavier per case, so fewer cases.
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn short_traces_always_satisfy_their_invariants(
        which in 0usize..4,
        lambda in 0.05f64..=0.5,
        s in arb_short_service(),
        v in arb_short_service(),
        seed in any::<u64>(),
    ) {
        let spec = match which {
            0 => QueueSpec::fcfs(lambda, s),
            1 => QueueSpec::fcfs_vacation(lambda, s, v),
            2 => QueueSpec::lcfs(ArrivalSpec::Bernoulli(lambda), s),
            _ => QueueSpec::gg_infinity(ArrivalSpec::Bernoulli(lambda), s),
        };
        prop_assume!(spec.rho().map_or(true, |r| r < 0.98));
        let cfg = SimConfig::new(spec.clone(), 4_000, 100, seed).with_trace();
        let out = run_simulation(&cfg).unwrap();
        let est = &out.estimate;
        prop_assert!(est.avg_age >= 1.0);
        prop_assert!(est.peak_age >= 1.0);
        let trace = out.trace.as_ref().unwrap();
        prop_assert_eq!(trace.ages.len() as u64, 4_001);
        if let Err(viol) = check_trace(spec.discipline, trace) {
            return Err(TestCaseError::fail(format!("{spec:?}: {viol}")));
        }
    }
}
