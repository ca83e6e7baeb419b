use super::*;

fn fraction4() -> ScoreFn {
    ScoreFn::FractionHigh { agents: 4 }
}

fn binary_vals(n: usize) -> ValuationTable {
    // type 0 wants outcome s1, type 1 wants outcome s2
    ValuationTable::new(
        0.0,
        1.0,
        vec!["s1".into(), "s2".into()],
        (0..n)
            .map(|_| (vec!["lo".into(), "hi".into()], vec![vec![1.0, 0.0], vec![0.0, 1.0]]))
            .collect(),
    )
    .unwrap()
}

// -- sensitivity ---------------------------------------------------------------

#[test]
fn fraction_family_has_sensitivity_one() {
    assert_eq!(sensitivity(&fraction4(), 1 << 20).unwrap(), 1);
}

#[test]
fn constant_table_has_sensitivity_zero() {
    let t = ScoreFn::Table(ScoreTable {
        domain_sizes: vec![2, 2],
        outcomes: vec!["a".into(), "b".into()],
        values: vec![vec![0.5, 0.5]; 4],
    });
    assert_eq!(sensitivity(&t, 1 << 20).unwrap(), 0);
}

#[test]
fn single_coordinate_jump_of_three_over_n_gives_three() {
    // three agents; agent 0's report moves the score by a full unit = 3/n
    let values = odometer(&[2, 2, 2])
        .into_iter()
        .map(|p| vec![if p[0] == 1 { 1.0 } else { 0.0 }])
        .collect();
    let t = ScoreFn::Table(ScoreTable {
        domain_sizes: vec![2, 2, 2],
        outcomes: vec!["only".into()],
        values,
    });
    assert_eq!(sensitivity(&t, 1 << 20).unwrap(), 3);
}

#[test]
fn sweep_cap_is_enforced() {
    let t = ScoreFn::Table(ScoreTable {
        domain_sizes: vec![2, 2],
        outcomes: vec!["a".into()],
        values: vec![vec![0.0]; 4],
    });
    assert!(matches!(sensitivity(&t, 1), Err(ExpError::SweepTooLarge { .. })));
}

// -- configuration ----------------------------------------------------------------

#[test]
fn config_derives_beta() {
    let config = ExpMechConfig::new(4, 1, 1, 1.05).unwrap();
    assert!((config.beta - 4.0 * 1.05 / 2.0).abs() < 1e-15);
}

#[test]
fn config_rejects_infeasible_parameters() {
    assert!(matches!(ExpMechConfig::new(4, 1, 1, 0.5), Err(ExpError::Infeasible { .. })));
    assert!(matches!(ExpMechConfig::new(4, 1, 0, 1.5), Err(ExpError::ZeroSensitivity)));
    assert!(matches!(ExpMechConfig::new(4, 5, 1, 1.5), Err(ExpError::CTooLarge { .. })));
    assert!(matches!(ExpMechConfig::new(4, 1, 1, 0.0), Err(ExpError::BadEpsilon(_))));
}

#[test]
fn fully_verified_config_uses_the_unit_scale() {
    let config = ExpMechConfig::new(10, 0, 1, 0.5).unwrap();
    assert!((config.beta - 10.0 * 0.5 / 2.0).abs() < 1e-15);
}

// -- distribution ------------------------------------------------------------------

#[test]
fn constant_scores_give_the_uniform_distribution() {
    let dist = softmax(3.0, &[0.4, 0.4, 0.4, 0.4]);
    for p in dist {
        assert!((p - 0.25).abs() < 1e-12);
    }
}

#[test]
fn zero_beta_gives_the_uniform_distribution() {
    let dist = softmax(0.0, &[1.0, 0.0]);
    assert!((dist[0] - 0.5).abs() < 1e-12);
}

#[test]
fn two_point_distribution_matches_the_closed_form() {
    let dist = softmax(1.0, &[1.0, 0.0]);
    let e = std::f64::consts::E;
    assert!((dist[0] - e / (e + 1.0)).abs() < 1e-12);
    assert!((dist[1] - 1.0 / (e + 1.0)).abs() < 1e-12);
}

#[test]
fn softmax_is_shift_invariant() {
    let a = softmax(2.5, &[0.1, 0.7, 0.4]);
    let b = softmax(2.5, &[0.1 + 0.3, 0.7 + 0.3, 0.4 + 0.3]);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn distributions_normalize_tightly() {
    let f = fraction4();
    for profile in odometer(&f.domain_sizes()) {
        let dist = distribution(&f, &profile, 7.3);
        let total: f64 = dist.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

// -- sampling ----------------------------------------------------------------------

#[test]
fn cumulative_intervals_are_left_open() {
    let dist = [0.3, 0.7];
    assert_eq!(sample_outcome(&dist, 0.3), 0); // u <= 0.3 stays in the first
    assert_eq!(sample_outcome(&dist, 0.3 + 1e-12), 1);
    assert_eq!(sample_outcome(&dist, 1.0), 1);
    assert_eq!(sample_outcome(&dist, 1e-300), 0);
    // zero-probability outcomes have empty intervals
    assert_eq!(sample_outcome(&[0.0, 1.0], 0.5), 1);
    assert_eq!(sample_outcome(&[1.0, 0.0], 1.0), 0);
}

#[test]
fn verified_set_is_the_first_n_minus_c() {
    let f = fraction4();
    let config = ExpMechConfig::new(4, 1, 1, 1.05).unwrap();
    let run = run_expmech(&[0, 1, 0, 1], &config, &f, 5, false);
    assert_eq!(run.verified, vec![0, 1, 2]);
    let all = ExpMechConfig::new(4, 0, 1, 1.05).unwrap();
    assert_eq!(run_expmech(&[0, 1, 0, 1], &all, &f, 5, false).verified.len(), 4);
    let none = ExpMechConfig::new(4, 4, 1, 17.0).unwrap();
    assert!(run_expmech(&[0, 1, 0, 1], &none, &f, 5, false).verified.is_empty());
}

#[test]
fn runs_are_reproducible_and_shuffle_is_seeded() {
    let f = fraction4();
    let config = ExpMechConfig::new(4, 1, 1, 1.05).unwrap();
    let a = run_expmech(&[1, 1, 0, 0], &config, &f, 9, true);
    let b = run_expmech(&[1, 1, 0, 0], &config, &f, 9, true);
    assert_eq!(a.outcome, b.outcome);
    assert_eq!(a.order, b.order);
    assert_eq!(a.verified, b.verified);
}

#[test]
fn sampled_frequencies_match_the_distribution() {
    let f = fraction4();
    let config = ExpMechConfig::new(4, 1, 1, 1.05).unwrap();
    let profile = [1, 0, 1, 0];
    let dist = distribution(&f, &profile, config.beta);
    let trials = 1_000_000usize;
    let outcomes =
        crate::exec::indexed_map(trials, |t| {
            run_expmech(&profile, &config, &f, t as u64, false).outcome
        });
    let mut counts = [0u64; 2];
    for s in outcomes {
        counts[s] += 1;
    }
    for s in 0..2 {
        let freq = counts[s] as f64 / trials as f64;
        let sigma = (dist[s] * (1.0 - dist[s]) / trials as f64).sqrt();
        assert!(
            (freq - dist[s]).abs() <= 4.0 * sigma,
            "outcome {s}: {freq} vs {} (4sigma {})",
            dist[s],
            4.0 * sigma
        );
    }
}

// -- incentive gap check ------------------------------------------------------------

#[test]
fn ratio_and_utility_bounds_hold_at_the_derived_beta() {
    let f = fraction4();
    let config = ExpMechConfig::new(4, 1, 1, 1.05).unwrap();
    let check = osp_gap_check(&f, &config, &binary_vals(4), 1 << 24).unwrap();
    assert!(check.ratio_holds, "max ratio {} bound {}", check.max_ratio, check.ratio_bound);
    assert!(check.utility_holds);
    assert!(check.max_ratio >= 1.0);
}

#[test]
fn fully_verified_profiles_have_unit_ratio() {
    let f = fraction4();
    let mut config = ExpMechConfig::new(4, 0, 1, 1.05).unwrap();
    config.beta = 5.0; // any scale: with c = 0 the pairs are identical
    let check = osp_gap_check(&f, &config, &binary_vals(4), 1 << 24).unwrap();
    assert!((check.max_ratio - 1.0).abs() < 1e-12);
    assert!(check.max_utility_diff.abs() < 1e-12);
}

#[test]
fn inflated_beta_breaks_the_ratio_bound() {
    let f = fraction4();
    let mut config = ExpMechConfig::new(4, 1, 1, 1.05).unwrap();
    config.beta *= 10.0;
    let check = osp_gap_check(&f, &config, &binary_vals(4), 1 << 24).unwrap();
    assert!(!check.ratio_holds);
    assert!(check.worst_ratio_witness.is_some());
}

// -- approximation -------------------------------------------------------------------

#[test]
fn single_outcome_has_zero_error() {
    let t = ScoreFn::Table(ScoreTable {
        domain_sizes: vec![2],
        outcomes: vec!["only".into()],
        values: vec![vec![0.3], vec![0.9]],
    });
    let report = approx_error(&t, &[1], 4.0);
    assert_eq!(report.error, 0.0);
    assert!(report.bound_holds);
}

#[test]
fn two_point_error_matches_the_closed_form() {
    let t = ScoreFn::Table(ScoreTable {
        domain_sizes: vec![1],
        outcomes: vec!["good".into(), "bad".into()],
        values: vec![vec![1.0, 0.0]],
    });
    let report = approx_error(&t, &[0], 5.0);
    let expected_error = 1.0 / (1.0 + (5.0f64).exp());
    assert!((report.error - expected_error).abs() < 1e-12);
    let bound = report.bound.unwrap();
    assert!((bound - 2.0 * (10.0f64).ln() / 5.0).abs() < 1e-12);
    assert!(report.bound_holds);
}

#[test]
fn bound_is_withheld_below_the_validity_threshold() {
    let t = ScoreFn::Table(ScoreTable {
        domain_sizes: vec![1],
        outcomes: vec!["a".into(), "b".into()],
        values: vec![vec![1.0, 0.0]],
    });
    // beta * |S| = 1 < e: no bound asserted
    let report = approx_error(&t, &[0], 0.5);
    assert!(report.bound.is_none());
    assert!(report.bound_holds);
}

#[test]
fn error_bound_formula_decreases_over_the_sweep() {
    let mut last = f64::INFINITY;
    for n in [100usize, 1_000, 10_000] {
        let c = (n as f64).powf(0.25) as usize;
        let bound = error_bound(n, c, 1, 0.1, 2);
        assert!(bound < last, "bound not decreasing at n = {n}");
        last = bound;
    }
}

// -- imposing mechanism ---------------------------------------------------------------

/// Reaction table with gamma = 0.5: matching the true type is worth +0.5 at
/// every outcome, on top of an outcome-dependent base.
fn reaction_table() -> Vec<Vec<Vec<f64>>> {
    let v = |t: usize, s: usize, r: usize| -> f64 {
        let base = if s == 1 { 0.3 } else { 0.0 };
        base + if r == t { 0.5 } else { 0.0 }
    };
    (0..2)
        .map(|t| (0..2).map(|s| (0..2).map(|r| v(t, s, r)).collect()).collect())
        .collect()
}

fn imposing_200() -> ImposingMechanism {
    let n = 200;
    let f = ScoreFn::FractionHigh { agents: n };
    let reactions = ReactionModel::shared(n, reaction_table()).unwrap();
    build_imposing(f, 1, reactions, n, 2).unwrap()
}

#[test]
fn imposing_parameters_match_the_derivations() {
    let mech = imposing_200();
    assert_eq!(mech.n0, 164);
    assert!((mech.gamma - 0.5).abs() < 1e-15);
    assert!((mech.epsilon - 0.06992874056341342).abs() < 1e-12);
    assert!((mech.q - 0.5594299245073073).abs() < 1e-12);
    assert!((mech.beta - 3.496437028170671).abs() < 1e-12);
    // q * gamma / |S| equals 2 * epsilon identically
    let lhs = mech.q * mech.gamma / 2.0;
    assert!((lhs - 2.0 * mech.epsilon).abs() < 1e-12);
    assert!(lhs >= 2.0 * mech.epsilon * (1.0 - 1e-12));
}

#[test]
fn single_reaction_means_gamma_zero() {
    let n = 200;
    let values: Vec<Vec<Vec<f64>>> =
        (0..2).map(|_| (0..2).map(|_| vec![0.7]).collect()).collect();
    let reactions = ReactionModel::shared(n, values).unwrap();
    let err = build_imposing(ScoreFn::FractionHigh { agents: n }, 1, reactions, n, 2)
        .unwrap_err();
    assert!(matches!(err, ExpError::GammaZero));
}

#[test]
fn too_few_agents_report_the_threshold() {
    let n = 100;
    let reactions = ReactionModel::shared(n, reaction_table()).unwrap();
    let err = build_imposing(ScoreFn::FractionHigh { agents: n }, 1, reactions, n, 2)
        .unwrap_err();
    match err {
        ExpError::NTooSmall { n: got, n0 } => {
            assert_eq!(got, 100);
            assert_eq!(n0, 164);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn pairwise_gap_of_the_reaction_table() {
    // an asymmetric table where deviating costs exactly 0.3 at one outcome
    let values: Vec<Vec<Vec<f64>>> = vec![
        // type 0: reaction 0 optimal everywhere
        vec![vec![0.8, 0.5], vec![0.6, 0.3]],
        // type 1: reaction 1 optimal everywhere
        vec![vec![0.5, 0.8], vec![0.3, 0.6]],
    ];
    let n = 400;
    let reactions = ReactionModel::shared(n, values).unwrap();
    let mech = build_imposing(ScoreFn::FractionHigh { agents: n }, 1, reactions, n, 2)
        .unwrap();
    assert!((mech.gamma - 0.3).abs() < 1e-15);
    assert_eq!(mech.n0, 306);
}

#[test]
fn uniform_margin_meets_the_gamma_over_s_floor() {
    let mech = imposing_200();
    let report = mech.margin_check();
    assert!(report.holds);
    assert!((report.min_margin - 0.5).abs() < 1e-15);
    assert!((report.required - 0.25).abs() < 1e-15);
}

#[test]
fn mixture_has_full_support_and_normalizes() {
    let mech = imposing_200();
    let floor = mech.q / 2.0;
    for k in [0usize, 1, 63, 200] {
        let mut profile = vec![0usize; 200];
        for slot in profile.iter_mut().take(k) {
            *slot = 1;
        }
        let dist = mech.mixture(&profile);
        let total: f64 = dist.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for p in dist {
            assert!(p >= floor - 1e-12);
        }
    }
}

#[test]
fn truth_beats_lies_strictly_under_imposition() {
    let mech = imposing_200();
    let report = mech.strict_osp_check(1 << 24).unwrap();
    assert!(report.holds, "min gap {}", report.min_gap);
    assert!(report.min_gap > 0.0);
    assert!(report.pairs_checked > 0);
}

// -- game-form cross-check ---------------------------------------------------------

#[test]
fn tiny_instance_is_obviously_dominant_in_expectation_at_twice_epsilon() {
    use crate::dominance::{check_mechanism, MechanismNotion};
    use crate::game::EnumLimits;
    let f = ScoreFn::FractionHigh { agents: 3 };
    let config = ExpMechConfig::new(3, 1, 1, 1.4).unwrap();
    let vals = binary_vals(3);
    let (game, signalling, utility) = expmech_game_form(&f, &config, &vals).unwrap();
    assert!(game.validate().is_empty());
    let report = check_mechanism(
        &game,
        &signalling,
        &utility,
        2.0 * config.epsilon,
        MechanismNotion::OspExpectation,
        &EnumLimits::default(),
    )
    .unwrap();
    assert!(report.holds);
}

// -- files --------------------------------------------------------------------------

#[test]
fn score_file_round_trips_both_kinds() {
    let fraction = ScoreFile {
        kind: "fraction".into(),
        domain_sizes: None,
        outcomes: None,
        scores: None,
        agents: Some(6),
    };
    let f = ScoreFile::from_json(&fraction.to_json()).unwrap().into_score_fn().unwrap();
    assert_eq!(f.n_agents(), 6);
    let table = ScoreFile {
        kind: "table".into(),
        domain_sizes: Some(vec![2, 2]),
        outcomes: Some(vec!["a".into(), "b".into()]),
        scores: Some(vec![vec![0.1, 0.9]; 4]),
        agents: None,
    };
    let t = ScoreFile::from_json(&table.to_json()).unwrap().into_score_fn().unwrap();
    assert_eq!(t.score(&[1, 0], 1), 0.9);
    let bad = ScoreFile {
        kind: "table".into(),
        domain_sizes: Some(vec![2, 2]),
        outcomes: Some(vec!["a".into()]),
        scores: Some(vec![vec![0.1]; 3]),
        agents: None,
    };
    assert!(bad.into_score_fn().is_err());
}


#[test]
fn gap_witness_names_the_attaining_outcome() {
    // deviating costs 0.5 everywhere; the tie breaks to outcome 0
    let mech = imposing_200();
    let (gap, outcome) = mech.gap_witness(199, 0, 1);
    assert!((gap - 0.5).abs() < 1e-15);
    assert_eq!(outcome, 0);
}
