//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them). Every tolerance is
//! pinned here in code.

use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use osplab_core::direct::{build_fixed_fines, build_fixed_probs, verification_curve, Scf};
use osplab_core::dominance::{check_mechanism, MechanismNotion, UtilityModel};
use osplab_core::exponential::{
    approx_error, build_imposing, error_bound, osp_gap_check, ExpMechConfig, ReactionModel,
    ScoreFn,
};
use osplab_core::fixtures;
use osplab_core::game::EnumLimits;
use osplab_core::public_project::{
    bayes_experiment, compare_rules, prob_tau_below, prob_tau_below_mc, tau_statistics,
    SelectionRule,
};
use osplab_core::rng::stream;
use osplab_core::valuation::ValuationTable;
use osplab_core::verification::{
    expected_verified_count, sampled_caught_count, AgentScheme, FinePerturbation, FineSpec,
    ProbSpec, VerificationScheme,
};
use rand::Rng;

/// Criteria run one at a time so the stated runtime budgets measure the
/// criterion itself, not contention on the shared worker pool.
fn serial() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(())).lock().unwrap_or_else(|e| e.into_inner())
}

fn criterion(name: &str, pass: bool, detail: &str) {
    println!("ACCEPTANCE {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} failed: {detail}");
}

fn within_budget(name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    criterion(
        &format!("{name}-runtime"),
        elapsed <= budget,
        &format!("{elapsed:?} of {budget:?}"),
    );
}

fn limits() -> EnumLimits {
    EnumLimits::default()
}

// -- C1: the separation fixtures ----------------------------------------------

#[test]
fn c01_osp_vs_sp_separation() {
    let _serial = serial();
    let started = Instant::now();
    let game = fixtures::second_price_game();
    let vals = fixtures::second_price_valuations();
    let signalling = fixtures::second_price_signalling(&game);
    let utility = UtilityModel::from_valuations(&game, &vals).unwrap();
    let sp =
        check_mechanism(&game, &signalling, &utility, 0.0, MechanismNotion::Sp, &limits())
            .unwrap();
    let osp =
        check_mechanism(&game, &signalling, &utility, 0.0, MechanismNotion::Osp, &limits())
            .unwrap();
    let gap = osp
        .cells
        .iter()
        .find(|c| c.agent == 0 && c.type_idx == 1)
        .and_then(|c| c.verdict.counterexample.as_ref())
        .map(|ce| ce.gap);

    let posted = fixtures::posted_price_game();
    let posted_vals = fixtures::posted_price_valuations();
    let posted_signalling = fixtures::posted_price_signalling(&posted);
    let posted_utility = UtilityModel::from_valuations(&posted, &posted_vals).unwrap();
    let posted_osp = check_mechanism(
        &posted,
        &posted_signalling,
        &posted_utility,
        0.0,
        MechanismNotion::Osp,
        &limits(),
    )
    .unwrap();

    criterion(
        "C01 osp-vs-sp-separation",
        sp.holds && !osp.holds && gap == Some(1.0) && posted_osp.holds,
        &format!(
            "second-price sp={} osp={} gap={gap:?}; posted-price osp={}",
            sp.holds, osp.holds, posted_osp.holds
        ),
    );
    within_budget("C01", started, Duration::from_secs(1));
}

// -- C2: fines-first construction is obviously dominant, and tight --------------

#[test]
fn c02_fixed_fines_cross_validation() {
    let _serial = serial();
    let started = Instant::now();
    let mut all_osp = true;
    for instance in 0..100u64 {
        let mut rng = stream(2024, 0, instance);
        let sizes: Vec<usize> = (0..2).map(|_| 2 + (rng.random::<u32>() % 2) as usize).collect();
        let n_outcomes = 2 + (rng.random::<u32>() % 3) as usize;
        let outcomes: Vec<String> = (0..n_outcomes).map(|s| format!("s{s}")).collect();
        let agents = sizes
            .iter()
            .map(|&d| {
                let types: Vec<String> = (0..d).map(|t| format!("t{t}")).collect();
                let values: Vec<Vec<f64>> =
                    (0..d).map(|_| (0..n_outcomes).map(|_| rng.random::<f64>()).collect()).collect();
                (types, values)
            })
            .collect();
        let vals = ValuationTable::new(0.0, 1.0, outcomes.clone(), agents).unwrap();
        let table: Vec<usize> = (0..sizes.iter().product::<usize>())
            .map(|_| (rng.random::<u32>() as usize) % n_outcomes)
            .collect();
        let f = Scf::new(sizes.clone(), outcomes, table).unwrap();
        let fines: Vec<FineSpec> =
            (0..2).map(|_| FineSpec::Constant(1.0 + 2.0 * rng.random::<f64>())).collect();
        let mech = build_fixed_fines(f, vals, fines).unwrap();
        let (game, signalling, utility) = mech.as_game_form();
        let report =
            check_mechanism(&game, &signalling, &utility, 0.0, MechanismNotion::Osp, &limits())
                .unwrap();
        if !report.holds {
            all_osp = false;
            break;
        }
    }
    criterion("C02a fixed-fines-100-instances", all_osp, "100 randomized builds");

    // tightness: shave one tight fine and obviousness must break somewhere
    let f = Scf::new(vec![2, 2], vec!["A".into(), "B".into()], vec![0, 0, 1, 1]).unwrap();
    let vals = ValuationTable::new(
        0.0,
        1.0,
        vec!["A".into(), "B".into()],
        vec![
            (vec!["lo".into(), "hi".into()], vec![vec![0.0, 1.0], vec![0.2, 0.8]]),
            (vec!["lo".into(), "hi".into()], vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
        ],
    )
    .unwrap();
    let tight = build_fixed_probs(
        f,
        vals,
        vec![ProbSpec::Constant(0.5), ProbSpec::Constant(0.5)],
        None,
    )
    .unwrap();
    let (game, signalling, utility) = tight.as_game_form();
    let before =
        check_mechanism(&game, &signalling, &utility, 0.0, MechanismNotion::Osp, &limits())
            .unwrap();
    let mut found_violation = false;
    for (reported, truth) in [(1usize, 0usize), (0, 1)] {
        let mut shaved = tight.clone();
        shaved.perturb_fine(
            0,
            FinePerturbation { reported, truth, others: None, delta: -1e-3 },
        );
        let (game, signalling, utility) = shaved.as_game_form();
        let after =
            check_mechanism(&game, &signalling, &utility, 0.0, MechanismNotion::Osp, &limits())
                .unwrap();
        if !after.holds {
            found_violation = true;
        }
    }
    criterion(
        "C02b tight-fine-perturbation",
        before.holds && found_violation,
        &format!("tight osp={} shaved breaks={found_violation}", before.holds),
    );
    within_budget("C02", started, Duration::from_secs(30));
}

// -- C3: uniform-fine accounting -------------------------------------------------

#[test]
fn c03_uniform_fine_accounting() {
    let _serial = serial();
    let theorem1 = |n: usize, gamma: f64| VerificationScheme {
        agents: (0..n)
            .map(|_| AgentScheme {
                verifiable: true,
                prob: ProbSpec::Theorem1 { gamma },
                fine: FineSpec::Theorem1 { gamma },
                revealing: None,
            })
            .collect(),
    };

    let n = 100;
    let scheme = theorem1(n, n as f64);
    let profile: Vec<usize> = vec![0; n];
    let exact = expected_verified_count(&scheme, &profile, &profile);
    criterion(
        "C03a expected-count-gamma-n",
        (exact - 1.0).abs() <= 1e-12,
        &format!("expected {exact}"),
    );

    let scheme = theorem1(10, 2.0);
    let profile: Vec<usize> = vec![1; 10];
    let exact_small = expected_verified_count(&scheme, &profile, &profile);
    criterion(
        "C03b expected-count-gamma-2",
        (exact_small - 5.0).abs() <= 1e-12,
        &format!("expected {exact_small}"),
    );

    // Monte Carlo: everyone lies, so the caught count is the checked count
    let n = 100;
    let gamma = 2.0;
    let scheme = theorem1(n, gamma);
    let truths: Vec<usize> = vec![0; n];
    let reports: Vec<usize> = vec![1; n];
    let trials = 100_000u64;
    let stats = sampled_caught_count(&scheme, &truths, &reports, trials, 31);
    let expected = expected_verified_count(&scheme, &truths, &reports);
    let p = 1.0 / gamma;
    let se = (n as f64 * p * (1.0 - p)).sqrt() / (trials as f64).sqrt();
    criterion(
        "C03c monte-carlo-3se",
        (stats.mean - expected).abs() <= 3.0 * se,
        &format!("mean {} vs {expected}, 3se {}", stats.mean, 3.0 * se),
    );
}

// -- C4: the probability-fine trade-off curve --------------------------------------

#[test]
fn c04_trade_off_curve() {
    let _serial = serial();
    let grid: Vec<f64> = (0..=38).map(|i| 1.0 + 0.5 * i as f64).collect();
    let curve = verification_curve(1.0, &grid);
    let at = |f: f64| curve.iter().find(|(x, _)| *x == f).map(|(_, p)| *p);
    let p1 = at(1.0);
    let p2 = at(2.0);
    let increasing = curve.windows(2).all(|w| w[1].1 > w[0].1);
    let concave = curve.windows(3).all(|w| w[2].1 - 2.0 * w[1].1 + w[0].1 < 1e-12);
    criterion(
        "C04 curve-shape",
        p1 == Some(0.0) && p2 == Some(0.5) && increasing && concave,
        &format!("p(1)={p1:?} p(2)={p2:?} increasing={increasing} concave={concave}"),
    );
}

// -- C5: exact stop-position combinatorics ------------------------------------------

#[test]
fn c05_public_project_combinatorics() {
    let _serial = serial();
    let started = Instant::now();
    let exact = prob_tau_below(10, 4);
    criterion(
        "C05a closed-form-value",
        (exact - 4.0 / 210.0).abs() <= 1e-12,
        &format!("{exact} vs {}", 4.0 / 210.0),
    );

    let mc = prob_tau_below_mc(10, 4, 100_000, 51);
    criterion(
        "C05b monte-carlo-cross-check",
        (mc - exact).abs() <= 0.005,
        &format!("mc {mc} vs exact {exact}"),
    );

    let n = 101u64;
    let c = 11u64;
    let value = prob_tau_below(n, c);
    let bound = (1.0 + ((n - 1) as f64).sqrt()) / (std::f64::consts::E * n as f64);
    criterion(
        "C05c proof-chain-bound",
        value <= bound,
        &format!("{value} <= {bound}"),
    );
    within_budget("C05", started, Duration::from_secs(20));
}

// -- C6: the verified-fraction trend -------------------------------------------------

#[test]
fn c06_lower_bound_trend() {
    let _serial = serial();
    let started = Instant::now();
    let mut fractions = Vec::new();
    for n in [100usize, 400, 1600] {
        let c = 1 + ((n as f64 - 1.0).sqrt().floor() as usize);
        let stats = tau_statistics(n, c, &SelectionRule::Uniform, 10_000, 61).unwrap();
        fractions.push(stats.mean.mean / n as f64);
    }
    let increasing = fractions.windows(2).all(|w| w[1] > w[0]);
    criterion(
        "C06 verified-fraction-trend",
        increasing && fractions[2] > 0.9,
        &format!("fractions {fractions:?}"),
    );
    within_budget("C06", started, Duration::from_secs(120));
}

// -- C7: selection rules tie the uniform rule under the count prior ------------------

#[test]
fn c07_rule_equality_under_the_prior() {
    let _serial = serial();
    let trials = 100_000u64;
    let mut pass = true;
    let mut detail = String::new();
    for (name, rule) in [
        ("fixed-order", SelectionRule::FixedOrder((0..30).collect())),
        ("adaptive", SelectionRule::Adaptive),
    ] {
        let cmp = compare_rules(30, 5, &rule, trials, 71).unwrap();
        let ok = cmp.mean_diff.abs() < 3.0 * cmp.se_diff;
        detail.push_str(&format!(
            "{name}: diff {} (3se {}); ",
            cmp.mean_diff,
            3.0 * cmp.se_diff
        ));
        pass &= ok;
    }
    criterion("C07 rule-equality", pass, &detail);
}

// -- C8: the Bayesian prior keeps verification high -----------------------------------

#[test]
fn c08_bayes_bound() {
    let _serial = serial();
    let report = bayes_experiment(200, 5, 2.0, 10_000, 81).unwrap();
    criterion(
        "C08 bayes-bound",
        report.bound_satisfied,
        &format!(
            "mean {} >= bound {} - half width {}",
            report.mean_tau.mean, report.bound, report.mean_tau.half_width
        ),
    );
}

// -- C9: softmax mechanism incentives and approximation --------------------------------

#[test]
fn c09_softmax_mechanism() {
    let _serial = serial();
    let started = Instant::now();

    // exhaustive ratio and utility checks on the 4-agent binary family
    let f = ScoreFn::FractionHigh { agents: 4 };
    let config = ExpMechConfig::new(4, 1, 1, 1.05).unwrap();
    let vals = ValuationTable::new(
        0.0,
        1.0,
        vec!["s1".into(), "s2".into()],
        (0..4)
            .map(|_| {
                (vec!["lo".into(), "hi".into()], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
            })
            .collect(),
    )
    .unwrap();
    let check = osp_gap_check(&f, &config, &vals, 1 << 24).unwrap();
    criterion(
        "C09a ratio-and-utility-bounds",
        check.ratio_holds && check.utility_holds,
        &format!(
            "ratio {} <= {}, utility diff {} <= {}",
            check.max_ratio, check.ratio_bound, check.max_utility_diff, check.utility_bound
        ),
    );

    // the tiny game-form encoding passes obvious dominance in expectation
    // at twice the slack
    let tiny_f = ScoreFn::FractionHigh { agents: 3 };
    let tiny_config = ExpMechConfig::new(3, 1, 1, 1.4).unwrap();
    let tiny_vals = ValuationTable::new(
        0.0,
        1.0,
        vec!["s1".into(), "s2".into()],
        (0..3)
            .map(|_| {
                (vec!["lo".into(), "hi".into()], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
            })
            .collect(),
    )
    .unwrap();
    let (game, signalling, utility) =
        osplab_core::exponential::expmech_game_form(&tiny_f, &tiny_config, &tiny_vals).unwrap();
    let report = check_mechanism(
        &game,
        &signalling,
        &utility,
        2.0 * tiny_config.epsilon,
        MechanismNotion::OspExpectation,
        &limits(),
    )
    .unwrap();
    criterion("C09b tiny-game-osp-expectation", report.holds, "n=3 c=1 binary |S|=2");

    // exact approximation error within the bound on every enumerable profile
    let mut approx_ok = true;
    for mask in 0u32..16 {
        let profile: Vec<usize> = (0..4).map(|a| ((mask >> a) & 1) as usize).collect();
        let report = approx_error(&f, &profile, config.beta);
        assert!(config.beta * 2.0 > std::f64::consts::E, "bound applies");
        approx_ok &= report.bound_holds;
    }
    criterion("C09c approx-error-bound", approx_ok, "16 profiles, beta*|S| > e");

    // the bound formula shrinks along the sweep
    let mut bounds = Vec::new();
    for n in [100usize, 1_000, 10_000] {
        let c = (n as f64).powf(0.25) as usize;
        bounds.push(error_bound(n, c, 1, 0.1, 2));
    }
    let decreasing = bounds.windows(2).all(|w| w[1] < w[0]);
    criterion("C09d error-bound-sweep", decreasing, &format!("bounds {bounds:?}"));
    within_budget("C09", started, Duration::from_secs(60));
}

// -- C10: the imposing mixture ------------------------------------------------------

#[test]
fn c10_imposing_mechanism() {
    let _serial = serial();
    let n = 200;
    let values: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|t| {
            (0..2)
                .map(|s| {
                    (0..2)
                        .map(|r| {
                            let base = if s == 1 { 0.3 } else { 0.0 };
                            base + if r == t { 0.5 } else { 0.0 }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let reactions = ReactionModel::shared(n, values).unwrap();
    let mech =
        build_imposing(ScoreFn::FractionHigh { agents: n }, 1, reactions, n, 2).unwrap();

    let q_margin_ok = mech.n > mech.n0
        && mech.q * mech.gamma / 2.0 >= 2.0 * mech.epsilon * (1.0 - 1e-12);
    criterion(
        "C10a q-gamma-margin",
        q_margin_ok,
        &format!("q*gamma/|S| = {} vs 2eps = {}", mech.q * mech.gamma / 2.0, 2.0 * mech.epsilon),
    );

    let margin = mech.margin_check();
    criterion(
        "C10b uniform-margin",
        margin.holds,
        &format!("min margin {} >= {}", margin.min_margin, margin.required),
    );

    // full support at q/|S| on every reachable distribution (high-count
    // quotient covers all profiles of the fraction family)
    let floor = mech.q / 2.0;
    let mut support_ok = true;
    for k in 0..=n {
        let mut profile = vec![0usize; n];
        for slot in profile.iter_mut().take(k) {
            *slot = 1;
        }
        let dist = mech.mixture(&profile);
        support_ok &= dist.iter().all(|&p| p >= floor - 1e-12);
        support_ok &= (dist.iter().sum::<f64>() - 1.0).abs() < 1e-12;
    }
    criterion("C10c full-support", support_ok, &format!("floor {floor}"));
}

// -- C11: byte-identical outputs --------------------------------------------------------

#[test]
fn c11_reproducibility() {
    let _serial = serial();
    let bin = env!("CARGO_BIN_EXE_osplab");
    let dir = std::env::temp_dir().join(format!("osplab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let run = |out: &str, threads: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.args([
            "pubproj", "--n", "30", "--c", "5", "--rule", "uniform", "--trials", "20000",
            "--seed", "9", "--out",
        ])
        .arg(dir.join(out));
        if let Some(t) = threads {
            cmd.env("RAYON_NUM_THREADS", t);
        }
        let status = cmd.status().unwrap();
        assert!(status.success());
        std::fs::read(dir.join(out)).unwrap()
    };
    let first = run("a.csv", None);
    let second = run("b.csv", None);
    let single_threaded = run("c.csv", Some("1"));
    criterion(
        "C11a pubproj-bytes",
        first == second && first == single_threaded,
        "two parallel runs and one single-threaded run",
    );

    let run_exp = |out: &str, threads: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.args([
            "expmech", "--n", "4", "--c", "1", "--epsilon", "1.05", "--f", "fraction",
            "--d", "auto", "--trials", "5000", "--seed", "3", "--out",
        ])
        .arg(dir.join(out));
        if let Some(t) = threads {
            cmd.env("RAYON_NUM_THREADS", t);
        }
        let status = cmd.status().unwrap();
        assert!(status.success());
        std::fs::read(dir.join(out)).unwrap()
    };
    let first = run_exp("d.csv", None);
    let second = run_exp("e.csv", Some("1"));
    criterion("C11b expmech-bytes", first == second, "parallel vs single-threaded");

    // exit-code contract: 0 pass, 1 failed verdict, 2 usage
    let fixtures_dir = dir.join("fixtures");
    let ok = Command::new(bin)
        .args(["fixtures", "--dir"])
        .arg(&fixtures_dir)
        .status()
        .unwrap();
    let failing = Command::new(bin)
        .args(["check", "--mechanism"])
        .arg(fixtures_dir.join("second_price.mechanism.json"))
        .arg("--valuations")
        .arg(fixtures_dir.join("second_price.valuations.json"))
        .arg("--signalling")
        .arg(fixtures_dir.join("second_price.signalling.json"))
        .args(["--notion", "osp"])
        .status()
        .unwrap();
    let usage = Command::new(bin)
        .args(["check", "--mechanism", "/nonexistent.json"])
        .args(["--valuations", "/nonexistent.json"])
        .args(["--signalling", "/nonexistent.json"])
        .status()
        .unwrap();
    criterion(
        "C11c exit-codes",
        ok.code() == Some(0) && failing.code() == Some(1) && usage.code() == Some(2),
        &format!("{:?} {:?} {:?}", ok.code(), failing.code(), usage.code()),
    );

    std::fs::remove_dir_all(&dir).ok();
}
