//! `osplab expmech`: softmax outcome selection with partial verification.
//! Runs the exhaustive probability-ratio and utility checks whenever the
//! profile space is enumerable, reports the exact approximation error at the
//! given profile, and (with --imposing) derives and validates the mixture
//! mechanism's parameters.

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use std::path::PathBuf;

use osplab_core::exponential::{
    approx_error, build_imposing, distribution, osp_gap_check, run_expmech, sensitivity,
    ExpMechConfig, ReactionModel, ReactionsFile, ScoreFile, ScoreFn,
};
use osplab_core::ValuationTable;

use crate::out::{self, Outcome, Table};

const SWEEP_CAP: u128 = 1 << 24;

#[derive(Args)]
pub struct ExpmechArgs {
    /// Number of agents (must match the score function).
    #[arg(long)]
    n: usize,
    /// Number of unverified agents (the last c in revelation order).
    #[arg(long)]
    c: usize,
    /// Incentive slack for the softmax scale (ignored with --imposing,
    /// where epsilon is derived).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Score function: "fraction" or a path to a score table file.
    #[arg(long)]
    f: String,
    /// Sensitivity: "auto" to sweep, or an explicit integer.
    #[arg(long, default_value = "auto")]
    d: String,
    /// Build the imposing mixture mechanism.
    #[arg(long)]
    imposing: bool,
    /// Reaction valuation file (required with --imposing).
    #[arg(long)]
    reactions: Option<PathBuf>,
    /// Report profile as comma-separated type indices (defaults to all 0).
    #[arg(long)]
    profile: Option<String>,
    /// Sample the outcome this many times and report empirical frequencies.
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Shuffle the revelation order (seeded) instead of index order.
    #[arg(long)]
    shuffle: bool,
    /// Check valuations for the utility-difference bound (defaults to the
    /// opposed two-outcome table on binary domains).
    #[arg(long)]
    valuations: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: ExpmechArgs) -> Result<Outcome> {
    let seed = out::resolve_seed(args.seed)?;
    let f = load_score(&args)?;
    if f.n_agents() != args.n {
        bail!("score function covers {} agents, --n says {}", f.n_agents(), args.n);
    }
    let d = match args.d.as_str() {
        "auto" => sensitivity(&f, SWEEP_CAP)?,
        text => text.parse::<u32>().map_err(|e| anyhow!("bad --d: {e}"))?,
    };
    let profile = parse_profile(&args, &f)?;
    let mut failed = false;

    let (epsilon, beta, q, gamma, n0) = if args.imposing {
        let reactions_path =
            args.reactions.as_ref().ok_or_else(|| anyhow!("--imposing needs --reactions"))?;
        let reactions_file = ReactionsFile::from_json(&out::read_file(reactions_path)?)
            .with_context(|| format!("parsing {}", reactions_path.display()))?;
        let reactions = ReactionModel::shared(args.n, reactions_file.values)?;
        let mech = build_imposing(f.clone(), d, reactions, args.n, args.c)?;
        let margin = mech.margin_check();
        if !margin.holds {
            failed = true;
        }
        println!(
            "imposing: gamma={} epsilon={} q={} beta={} n0={} margin_min={} (needs {}) q*gamma/|S|={} (needs {})",
            mech.gamma,
            mech.epsilon,
            mech.q,
            mech.beta,
            mech.n0,
            margin.min_margin,
            margin.required,
            margin.q_times_margin,
            margin.two_epsilon
        );
        match mech.strict_osp_check(SWEEP_CAP) {
            Ok(strict) => {
                if !strict.holds {
                    failed = true;
                }
                println!(
                    "imposing strict gap: min={} over {} pairs, positive={}",
                    strict.min_gap, strict.pairs_checked, strict.holds
                );
            }
            Err(err) => println!("imposing strict gap: skipped ({err})"),
        }
        (mech.epsilon, mech.beta, Some(mech.q), Some(mech.gamma), Some(mech.n0))
    } else {
        let epsilon = args.epsilon.ok_or_else(|| anyhow!("--epsilon is required"))?;
        let config = ExpMechConfig::new(args.n, args.c, d, epsilon)?;
        (config.epsilon, config.beta, None, None, None)
    };

    let config = ExpMechConfig { n: args.n, c: args.c, d, epsilon, beta };

    // exhaustive incentive checks when the profile space is enumerable
    let (max_ratio, ratio_bound) = if f.profile_count() <= 1 << 16 {
        let vals = load_or_default_vals(&args, &f)?;
        let check = osp_gap_check(&f, &config, &vals, SWEEP_CAP)?;
        if !check.ratio_holds || !check.utility_holds {
            failed = true;
        }
        println!(
            "ratio check: max={} bound={} holds={} | utility diff max={} bound={} holds={}",
            check.max_ratio,
            check.ratio_bound,
            check.ratio_holds,
            check.max_utility_diff,
            check.utility_bound,
            check.utility_holds
        );
        (Some(check.max_ratio), Some(check.ratio_bound))
    } else {
        println!("ratio check: skipped (profile space too large to enumerate)");
        (None, None)
    };

    let approx = approx_error(&f, &profile, beta);
    if !approx.bound_holds {
        failed = true;
    }

    if args.trials > 0 {
        let dist = distribution(&f, &profile, beta);
        let mut counts = vec![0u64; f.n_outcomes()];
        for t in 0..args.trials {
            let run = run_expmech(&profile, &config, &f, seed.wrapping_add(t), args.shuffle);
            counts[run.outcome] += 1;
        }
        let freqs: Vec<String> = counts
            .iter()
            .enumerate()
            .map(|(s, &c)| format!("{}={}", s, c as f64 / args.trials as f64))
            .collect();
        println!(
            "sampling: {} trials, frequencies [{}] vs distribution {:?}",
            args.trials,
            freqs.join(" "),
            dist
        );
    }

    let table = Table {
        columns: vec![
            "n",
            "c",
            "epsilon",
            "beta",
            "max_ratio",
            "ratio_bound",
            "expected_f",
            "max_f",
            "approx_bound",
            "q",
            "gamma",
            "n0",
        ],
        rows: vec![vec![
            args.n.to_string(),
            args.c.to_string(),
            out::num(Some(epsilon)),
            out::num(Some(beta)),
            out::num(max_ratio),
            out::num(ratio_bound),
            out::num(Some(approx.expected)),
            out::num(Some(approx.max)),
            out::num(approx.bound),
            out::num(q),
            out::num(gamma),
            n0.map(|v| v.to_string()).unwrap_or_default(),
        ]],
    };
    table.emit(args.out.as_ref(), args.json)?;
    Ok(if failed { Outcome::CheckFailed } else { Outcome::Pass })
}

fn load_score(args: &ExpmechArgs) -> Result<ScoreFn> {
    if args.f == "fraction" {
        return Ok(ScoreFn::FractionHigh { agents: args.n });
    }
    let path = PathBuf::from(&args.f);
    Ok(ScoreFile::from_json(&out::read_file(&path)?)
        .with_context(|| format!("parsing {}", path.display()))?
        .into_score_fn()?)
}

fn parse_profile(args: &ExpmechArgs, f: &ScoreFn) -> Result<Vec<usize>> {
    let sizes = f.domain_sizes();
    match &args.profile {
        None => Ok(vec![0; sizes.len()]),
        Some(text) => {
            let profile = text
                .split(',')
                .map(|part| part.trim().parse::<usize>().map_err(|e| anyhow!("bad profile: {e}")))
                .collect::<Result<Vec<_>>>()?;
            if profile.len() != sizes.len() {
                bail!("profile has {} entries, expected {}", profile.len(), sizes.len());
            }
            for (agent, (&b, &d)) in profile.iter().zip(&sizes).enumerate() {
                if b >= d {
                    bail!("profile entry {b} out of range for agent {agent} (domain {d})");
                }
            }
            Ok(profile)
        }
    }
}

fn load_or_default_vals(args: &ExpmechArgs, f: &ScoreFn) -> Result<ValuationTable> {
    if let Some(path) = &args.valuations {
        return ValuationTable::from_json(&out::read_file(path)?)
            .with_context(|| format!("parsing {}", path.display()));
    }
    // opposed preferences over the outcome labels: type k likes outcome k
    let labels = f.outcome_labels();
    let sizes = f.domain_sizes();
    let agents = sizes
        .iter()
        .map(|&d| {
            let types: Vec<String> = (0..d).map(|t| format!("t{t}")).collect();
            let values: Vec<Vec<f64>> = (0..d)
                .map(|t| {
                    (0..labels.len())
                        .map(|s| if s == t.min(labels.len() - 1) { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect();
            (types, values)
        })
        .collect();
    Ok(ValuationTable::new(0.0, 1.0, labels, agents)?)
}
