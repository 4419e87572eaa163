use ergokit::battery::passive_state;
use ergokit::ensemble::{
    brute_force_oracle, build_level_table, curve, passive_energy_per_copy, EnsembleConfig, MAX_COMPOSITIONS_ENV,
};
use ergokit::gibbs::gibbs_state;
use ergokit::random::{random_battery, random_diagonal_state, random_spectrum};
use ergokit::{BatterySpec, QuantumState};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn three_level() -> (QuantumState, BatterySpec) {
    (
        QuantumState::diagonal(vec![0.224, 0.237, 0.539]).unwrap(),
        BatterySpec::new(vec![0.0, 0.579, 1.0]).unwrap(),
    )
}

#[test]
fn table_mass_and_level_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let config = EnsembleConfig::default();
    for d in 2..=5 {
        let b = random_battery::<f64, _>(d, &mut rng);
        let r = random_spectrum::<f64, _>(d, &mut rng);
        for n in [1, 3, 8, 15] {
            let t = build_level_table(&r, &b, n, &config).unwrap();
            assert!((t.total_mass() - 1.0).abs() <= 1e-9);
            let levels = (d as f64).powi(n as i32);
            assert!((t.level_count() - levels).abs() <= 1e-9 * levels);
        }
    }
}

#[test]
fn compressed_matches_brute_force_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let config = EnsembleConfig::default();
    for d in 2..=4 {
        for _ in 0..10 {
            let b = random_battery::<f64, _>(d, &mut rng);
            let r = random_spectrum::<f64, _>(d, &mut rng);
            for n in 1..=6 {
                let fast = passive_energy_per_copy(&build_level_table(&r, &b, n, &config).unwrap());
                let slow = brute_force_oracle(&r, &b, n, &config).unwrap();
                assert!((fast - slow).abs() <= 1e-10, "d={d} n={n}: {fast} vs {slow}");
            }
        }
    }
}

#[test]
fn zero_eigenvalues_are_handled() {
    let config = EnsembleConfig::default();
    let b = BatterySpec::new(vec![0.0, 0.4, 1.3, 2.0]).unwrap();
    let r = [0.0, 0.6, 0.0, 0.4];
    for n in 1..=7 {
        let fast = passive_energy_per_copy(&build_level_table(&r, &b, n, &config).unwrap());
        let slow = brute_force_oracle(&r, &b, n, &config).unwrap();
        assert!((fast - slow).abs() <= 1e-12);
    }
}

#[test]
fn single_copy_point_equals_passive_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    for d in 2..=6 {
        let b = random_battery::<f64, _>(d, &mut rng);
        let s = random_diagonal_state::<f64, _>(d, &mut rng);
        let c = curve(&s, &b, 3).unwrap();
        assert_eq!(c.e(1), passive_state(&s, &b).unwrap().passive_energy);
    }
}

#[test]
fn structural_bounds_on_random_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for d in 2..=4 {
        let b = random_battery::<f64, _>(d, &mut rng);
        let s = random_diagonal_state::<f64, _>(d, &mut rng);
        let n_max = 24;
        let c = curve(&s, &b, n_max).unwrap();
        for n in 1..=n_max {
            assert!(c.e(n) >= c.asymptote - 1e-9);
            for k in 2..=n_max / n {
                assert!(c.e(k * n) <= c.e(n) + 1e-12);
            }
            if n < n_max {
                let mixed = (n as f64 * c.e(n) + c.e(1)) / (n as f64 + 1.0);
                assert!(c.e(n + 1) <= mixed + 1e-12);
            }
        }
    }
}

#[test]
fn uniform_and_gibbs_curves_are_flat() {
    let b = BatterySpec::new(vec![0.0, 0.579, 1.0]).unwrap();
    let mixed = QuantumState::maximally_mixed(3).unwrap();
    let c = curve(&mixed, &b, 15).unwrap();
    for n in 1..=15 {
        assert!((c.e(n) - 1.579 / 3.0).abs() <= 1e-12);
        assert!(c.w(n).abs() <= 1e-12);
    }
    let g = QuantumState::diagonal(gibbs_state(&b, 1.3).unwrap().populations).unwrap();
    let c = curve(&g, &b, 15).unwrap();
    for n in 1..=15 {
        assert!(c.gap(n).abs() <= 1e-10);
    }
}

#[test]
fn passive_qubit_curve_sits_on_asymptote() {
    let b = BatterySpec::new(vec![0.0, 1.0]).unwrap();
    let s = QuantumState::diagonal(vec![0.7, 0.3]).unwrap();
    let c = curve(&s, &b, 30).unwrap();
    for n in 1..=30 {
        assert!(c.gap(n).abs() <= 1e-9, "n={n} gap {}", c.gap(n));
    }
}

#[test]
fn three_level_gap_decreases_on_powers_of_two() {
    let (s, b) = three_level();
    let c = curve(&s, &b, 32).unwrap();
    let gaps: Vec<f64> = [1, 2, 4, 8, 16, 32].iter().map(|&n| c.gap(n)).collect();
    assert!(gaps.iter().all(|&g| g > 0.0));
    for w in gaps.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    assert!(gaps[5] < gaps[0]);
}

#[test]
fn parallel_curve_is_deterministic() {
    let (s, b) = three_level();
    let a = curve(&s, &b, 40).unwrap();
    let c = curve(&s, &b, 40).unwrap();
    assert_eq!(a.per_copy_energy, c.per_copy_energy);
    let sequential: Vec<f64> = (1..=40)
        .map(|n| passive_energy_per_copy(&build_level_table(s.spectrum(), &b, n, &EnsembleConfig::default()).unwrap()))
        .collect();
    assert_eq!(a.per_copy_energy, sequential);
}

#[test]
fn tie_order_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    let config = EnsembleConfig::default();
    // integer levels and a repeated eigenvalue produce many ties on both sides
    let b = BatterySpec::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let r = [0.4, 0.2, 0.2, 0.2];
    for n in [3, 6, 9] {
        let table = build_level_table(&r, &b, n, &config).unwrap();
        let reference = passive_energy_per_copy(&table);
        for _ in 0..20 {
            let mut shuffled = table.clone();
            shuffled.entries.shuffle(&mut rng);
            assert!((passive_energy_per_copy(&shuffled) - reference).abs() <= 1e-12);
        }
    }
}

#[test]
fn environment_overrides_the_cap() {
    std::env::set_var(MAX_COMPOSITIONS_ENV, "1234");
    let config = EnsembleConfig::from_env().unwrap();
    assert_eq!(config.max_compositions, 1234);
    std::env::set_var(MAX_COMPOSITIONS_ENV, "lots");
    assert!(EnsembleConfig::from_env().is_err());
    std::env::remove_var(MAX_COMPOSITIONS_ENV);
    assert_eq!(EnsembleConfig::from_env().unwrap(), EnsembleConfig::default());
}

#[test]
fn large_n_stays_finite() {
    // 3^2000 levels; multiplicities far beyond f64 range
    let (s, b) = three_level();
    let t = build_level_table(s.spectrum(), &b, 2000, &EnsembleConfig::default()).unwrap();
    let e = passive_energy_per_copy(&t);
    assert!(e.is_finite());
    let c = curve(&s, &b, 2).unwrap();
    assert!(e > c.asymptote - 1e-9 && e < c.e(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_equivalence_property(seed in any::<u64>(), d in 2usize..5, n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_battery::<f64, _>(d, &mut rng);
        let r = random_spectrum::<f64, _>(d, &mut rng);
        let config = EnsembleConfig::default();
        let fast = passive_energy_per_copy(&build_level_table(&r, &b, n, &config).unwrap());
        let slow = brute_force_oracle(&r, &b, n, &config).unwrap();
        prop_assert!((fast - slow).abs() <= 1e-10);
    }
}

#[test]
fn long_curve_matches_high_precision_reference() {
    // 50-digit exact-multinomial enumeration
    let (s, b) = three_level();
    let config = EnsembleConfig::default();
    for (n, want) in [
        (40, 0.35315440136025365),
        (100, 0.35295366532164396),
        (200, 0.3529256697388161),
    ] {
        let got = passive_energy_per_copy(&build_level_table(s.spectrum(), &b, n, &config).unwrap());
        assert!((got - want).abs() <= 1e-10, "n={n}: {got} vs {want}");
    }
}
