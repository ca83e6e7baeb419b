//! `osplab pubproj`: verified-count statistics for the sequential
//! public-project mechanism under a selection rule, the exact stop-position
//! closed form with its Monte Carlo cross-check, and the Bayesian variant.

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use std::path::PathBuf;

use osplab_core::public_project::{
    bayes_experiment, prob_tau_below, prob_tau_below_mc, tau_statistics, RuleFile, SelectionRule,
};

use crate::out::{self, Outcome, Table};

#[derive(Args)]
pub struct PubprojArgs {
    /// Number of agents.
    #[arg(long)]
    n: usize,
    /// Threshold of high types needed to implement the project.
    #[arg(long)]
    c: Option<usize>,
    /// Derive the threshold instead: `sqrt` sets `1 + floor(sqrt(n-1))`.
    #[arg(long)]
    c_rule: Option<String>,
    /// Low type's value (default `1/n^2`).
    #[arg(long)]
    delta: Option<f64>,
    /// Selection rule: uniform, adaptive, fixed:<comma-separated permutation>
    /// or file:<path>.
    #[arg(long, default_value = "uniform")]
    rule: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Master seed (falls back to OSPLAB_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Run the Bayesian variant: types i.i.d. high with probability
    /// `g / (g + (n-c-1)^2)`.
    #[arg(long)]
    bayes_g: Option<f64>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: PubprojArgs) -> Result<Outcome> {
    let seed = out::resolve_seed(args.seed)?;
    let c = match (&args.c, &args.c_rule) {
        (Some(c), None) => *c,
        (None, Some(rule)) if rule == "sqrt" => {
            1 + ((args.n as f64 - 1.0).sqrt().floor() as usize)
        }
        (None, Some(other)) => bail!("unknown --c-rule {other:?} (expected: sqrt)"),
        (Some(_), Some(_)) => bail!("--c and --c-rule are mutually exclusive"),
        (None, None) => bail!("one of --c or --c-rule is required"),
    };
    if c > args.n {
        bail!("threshold {c} exceeds n = {}", args.n);
    }
    if let Some(delta) = args.delta {
        if !(delta > 0.0) || delta * args.n as f64 >= 1.0 {
            bail!("--delta must satisfy 0 < delta and delta * n < 1");
        }
    }
    let rule = parse_rule(&args.rule)?;
    rule.validate(args.n)?;

    let exact = prob_tau_below(args.n as u64, c as u64);
    let rule_name = rule_name(&args.rule);

    let (mean, lo, hi, mc, failed) = match args.bayes_g {
        None => {
            let stats = tau_statistics(args.n, c, &rule, args.trials, seed)?;
            let mc = prob_tau_below_mc(args.n, c, args.trials, seed.wrapping_add(1));
            (stats.mean.mean, stats.mean.lo(), stats.mean.hi(), Some(mc), false)
        }
        Some(g) => {
            if !(g > 0.0) {
                bail!("--bayes-g must be positive");
            }
            let report = bayes_experiment(args.n, c, g, args.trials, seed)?;
            println!(
                "bayes: p_high={} bound={} satisfied={}",
                report.p_high, report.bound, report.bound_satisfied
            );
            (
                report.mean_tau.mean,
                report.mean_tau.lo(),
                report.mean_tau.hi(),
                None,
                !report.bound_satisfied,
            )
        }
    };

    let table = Table {
        columns: vec![
            "n",
            "c",
            "rule",
            "trials",
            "mean_tau",
            "ci_lo",
            "ci_hi",
            "prob_tau_below_exact",
            "prob_tau_below_mc",
        ],
        rows: vec![vec![
            args.n.to_string(),
            c.to_string(),
            rule_name,
            args.trials.to_string(),
            out::num(Some(mean)),
            out::num(Some(lo)),
            out::num(Some(hi)),
            out::num(Some(exact)),
            out::num(mc),
        ]],
    };
    table.emit(args.out.as_ref(), args.json)?;
    Ok(if failed { Outcome::CheckFailed } else { Outcome::Pass })
}

fn parse_rule(text: &str) -> Result<SelectionRule> {
    if text == "uniform" {
        return Ok(SelectionRule::Uniform);
    }
    if text == "adaptive" {
        return Ok(SelectionRule::Adaptive);
    }
    if let Some(perm) = text.strip_prefix("fixed:") {
        let order = perm
            .split(',')
            .map(|part| part.trim().parse::<usize>().map_err(|e| anyhow!("bad index: {e}")))
            .collect::<Result<Vec<_>>>()?;
        return Ok(SelectionRule::FixedOrder(order));
    }
    if let Some(path) = text.strip_prefix("file:") {
        let file = RuleFile::from_json(&out::read_file(&PathBuf::from(path))?)
            .with_context(|| format!("parsing {path}"))?;
        return Ok(file.into_rule()?);
    }
    bail!("unknown rule {text:?} (uniform|adaptive|fixed:<perm>|file:<path>)")
}

fn rule_name(text: &str) -> String {
    text.replace(',', ";")
}
