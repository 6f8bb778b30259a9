use parrondo_core::matrix::dense_pattern_product;
use parrondo_core::stationary::solve_dense;
use parrondo_core::symmetry::quotient_dense;
use parrondo_core::*;
use proptest::prelude::*;

fn interior() -> impl Strategy<Value = f64> {
    0.02f64..0.98
}

fn symmetric_params() -> impl Strategy<Value = ParamVector<f64>> {
    (interior(), interior(), interior()).prop_map(|(a, b, c)| ParamVector::symmetric(a, b, c).unwrap())
}

fn any_params() -> impl Strategy<Value = ParamVector<f64>> {
    [interior(), interior(), interior(), interior()].prop_map(|p| ParamVector::new(p).unwrap())
}

fn short_pattern() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((1, 1)), Just((1, 2)), Just((1, 3)), Just((2, 1)), Just((2, 2)), Just((3, 1))]
}

fn totient(mut n: u64) -> u64 {
    let mut result = n;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            while n % f == 0 {
                n /= f;
            }
            result -= result / f;
        }
        f += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

fn necklaces(n: u64) -> u64 {
    (1..=n).filter(|d| n % d == 0).map(|d| totient(d) << (n / d)).sum::<u64>() / n
}

fn bracelets(n: u64) -> u64 {
    let reflections = if n % 2 == 0 {
        3 * (1u64 << (n / 2)) / 4
    } else {
        1u64 << ((n - 1) / 2)
    };
    necklaces(n) / 2 + reflections
}

/// `(1/n) Σ (2 p_{m_i} − 1)` straight from the definition.
fn expected_payoff(x: &Configuration, params: &ParamVector<f64>) -> f64 {
    let n = x.n();
    (1..=n)
        .map(|i| 2.0 * params.p(x.neighbor_index(i).unwrap() as usize) - 1.0)
        .sum::<f64>()
        / n as f64
}

#[test]
fn class_counts_follow_burnside() {
    for n in 3..=18usize {
        let dihedral = build_classes(n, SymmetryGroup::dihedral(n)).unwrap();
        assert_eq!(dihedral.class_count() as u64, bracelets(n as u64), "n = {n}");
        assert_eq!(dihedral.sizes().iter().sum::<usize>(), 1 << n);
        let cyclic = build_classes(n, SymmetryGroup::cyclic(n)).unwrap();
        assert_eq!(cyclic.class_count() as u64, necklaces(n as u64), "n = {n}");
    }
    assert_eq!(bracelets(18), 7685);
    assert_eq!(necklaces(6), 14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn game_matrices_are_stochastic(n in 3usize..=12, params in any_params()) {
        let b = build_game_b(n, &params).unwrap();
        b.check_stochastic(1e-12).unwrap();
        let a = build_game_a::<f64>(n).unwrap();
        a.check_stochastic(1e-12).unwrap();
        for (i, row) in b.rows().enumerate() {
            prop_assert!(row.len() <= n + 1);
            prop_assert!(row.iter().all(|(j, _)| (i ^ j).count_ones() <= 1));
        }
    }

    #[test]
    fn signed_rows_give_expected_payoff(n in 3usize..=10, params in any_params()) {
        let signed = build_game_b_signed(n, &params).unwrap();
        for (x, sum) in signed.row_sums().iter().enumerate() {
            let config = Configuration::new(n, x as u64).unwrap();
            prop_assert!((sum - expected_payoff(&config, &params)).abs() < 1e-13);
        }
    }

    #[test]
    fn lumping_is_multiplicative(n in 3usize..=8, params in any_params(), (r, s) in short_pattern()) {
        let group = SymmetryGroup::cyclic(n);
        let model = build_classes(n, group).unwrap();
        let a = build_game_a::<f64>(n).unwrap();
        let b = build_game_b(n, &params).unwrap();
        let lumped_product = quotient_dense(&dense_pattern_product(&a, r, &b, s).unwrap(), &model).unwrap();
        let qa = quotient(&a, &model).unwrap();
        let qb = quotient(&b, &model).unwrap();
        let product_of_lumped = dense_pattern_product(&qa, r, &qb, s).unwrap();
        prop_assert!(lumped_product.max_abs_diff(&product_of_lumped) < 1e-13);
    }

    #[test]
    fn lifted_stationary_is_stationary(n in 3usize..=7, params in symmetric_params(), (r, s) in short_pattern()) {
        let group = SymmetryGroup::dihedral(n);
        let model = build_classes(n, group).unwrap();
        let reduced = pattern_stationary(n, &params, r, s, group).unwrap();
        let pi = model.lift(&reduced.pi).unwrap();
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let full = dense_pattern_product(
            &build_game_a::<f64>(n).unwrap(), r, &build_game_b(n, &params).unwrap(), s,
        ).unwrap();
        let moved = full.to_sparse(true).left_mul(&pi).unwrap();
        let err = moved.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13, "residual {err}");
    }

    #[test]
    fn coupled_parameters_negate_the_mean(n in 3usize..=9, params in any_params(), (r, s) in short_pattern()) {
        let mu = mean_pattern(n, &params, r, s).unwrap().mu;
        let mirrored = mean_pattern(n, &params.coupled(), r, s).unwrap().mu;
        prop_assert!((mu + mirrored).abs() < 1e-10);
        let b = mean_game_b(n, &params).unwrap().mu;
        let b_mirrored = mean_game_b(n, &params.coupled()).unwrap().mu;
        prop_assert!((b + b_mirrored).abs() < 1e-10);
    }

    #[test]
    fn fair_line_has_zero_mean(n in 3usize..=9, p0 in interior(), p1 in interior(), (r, s) in short_pattern()) {
        let params = ParamVector::new([p0, p1, 1.0 - p1, 1.0 - p0]).unwrap();
        prop_assert!(mean_pattern(n, &params, r, s).unwrap().mu.abs() < 1e-10);
    }

    #[test]
    fn group_choice_does_not_change_the_mean(n in 3usize..=11, params in symmetric_params(), (r, s) in short_pattern()) {
        let dihedral = mean_pattern_with_group(n, &params, r, s, SymmetryGroup::dihedral(n)).unwrap();
        let cyclic = mean_pattern_with_group(n, &params, r, s, SymmetryGroup::cyclic(n)).unwrap();
        prop_assert!((dihedral.mu - cyclic.mu).abs() < 1e-12);
        prop_assert!(dihedral.class_count <= cyclic.class_count);
    }

    #[test]
    fn reduced_mean_matches_unreduced(n in 3usize..=7, params in any_params(), (r, s) in short_pattern()) {
        let pattern = PatternSpec::Pattern { r, s };
        let reduced = mean(n, &params, &pattern).unwrap().mu;
        let full = full_state_mean(n, &params, &pattern).unwrap();
        prop_assert!((reduced - full).abs() < 1e-12);
    }

    #[test]
    fn mixture_routes_agree(n in 3usize..=9, params in any_params(), gamma in 0.05f64..0.95) {
        let direct = mean_mixture(n, &params, &gamma).unwrap().mu;
        let substituted = mean_mixture_by_substitution(n, &params, &gamma).unwrap().mu;
        prop_assert!((direct - substituted).abs() < 1e-12);
    }

    #[test]
    fn lambda_swaps_labels(n in 3usize..=5, params in symmetric_params(), (r, s) in short_pattern()) {
        let [p0, p1, _, p3] = *params.as_array();
        let pattern = PatternSpec::Pattern { r, s };
        let here = region::classify_point(p0, p1, p3, &pattern, n).unwrap();
        let (a, b, c) = region::symmetry_map(&p0, &p1, &p3);
        let there = region::classify_point(a, b, c, &pattern, n).unwrap();
        let swapped = match here.label {
            region::Label::Parrondo => region::Label::AntiParrondo,
            region::Label::AntiParrondo => region::Label::Parrondo,
            region::Label::Neither => region::Label::Neither,
        };
        prop_assert_eq!(there.label, swapped);
    }

    #[test]
    fn conditions_union_is_any(p in [0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0]) {
        let report = region::ergodicity_conditions(&ParamVector::new(p).unwrap(), None).unwrap();
        prop_assert_eq!(report.in_union, report.holds.iter().any(|&h| h));
        prop_assert!((report.p_bar - p.iter().sum::<f64>() / 4.0).abs() < 1e-15);
    }
}

fn unexcluded_full_mass(n: usize, params: &ParamVector<Rational>, states: &[u64]) -> Vec<Rational> {
    let a = build_game_a::<Rational>(n).unwrap();
    let b = build_game_b(n, params).unwrap();
    let product = dense_pattern_product(&a, 1, &b, 1).unwrap();
    let pi = solve_dense(&product, &[]).unwrap().pi;
    states.iter().map(|&x| pi[x as usize].clone()).collect()
}

#[test]
fn all_losers_carry_no_mass_when_p0_is_one() {
    let params = ParamVector::<Rational>::parse(&["1", "4/25", "4/25", "7/10"]).unwrap();
    for n in 3..=6 {
        let mass = unexcluded_full_mass(n, &params, &[0]);
        assert_eq!(mass[0], Rational::from_ratio(0, 1), "n = {n}");
    }
}

#[test]
fn alternating_states_carry_no_mass_when_p0_zero_p3_one() {
    let params = ParamVector::<Rational>::parse(&["0", "3/10", "3/10", "1"]).unwrap();
    for n in [4, 6] {
        let states: Vec<u64> = [0u8, 1]
            .iter()
            .map(|&phase| Configuration::alternating(n, phase).unwrap().encode())
            .collect();
        for mass in unexcluded_full_mass(n, &params, &states) {
            assert_eq!(mass, Rational::from_ratio(0, 1), "n = {n}");
        }
    }
}

#[test]
fn forced_means_on_absorbing_faces() {
    for n in 3..=8 {
        let losing = ParamVector::symmetric(0.0, 0.4, 0.6).unwrap();
        assert_eq!(mean_game_b(n, &losing).unwrap().mu, -1.0);
        let winning = ParamVector::symmetric(0.3, 0.4, 1.0).unwrap();
        assert_eq!(mean_game_b(n, &winning).unwrap().mu, 1.0);
    }
}
