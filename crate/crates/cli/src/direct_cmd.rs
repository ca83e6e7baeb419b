//! `osplab direct`: build one of the direct-revelation constructions,
//! account its expected verified count on the truthful profile, optionally
//! emit the probability-versus-fine curve and cross-check obviousness on the
//! explicit game form.

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use std::fs;
use std::path::PathBuf;

use osplab_core::direct::{
    build_fixed_fines, build_fixed_probs, build_theorem1, verification_curve, DirectMechanism,
    Scf, ScfFile,
};
use osplab_core::dominance::{check_mechanism, MechanismNotion};
use osplab_core::game::EnumLimits;
use osplab_core::verification::{
    expected_verified_count, AgentScheme, FineSpec, ProbSpec, SchemeFile, VerificationScheme,
};
use osplab_core::ValuationTable;

use crate::out::{self, Outcome, Table};

#[derive(Args)]
pub struct DirectArgs {
    /// Construction: mf (fines given), t1 (uniform fines), mp
    /// (probabilities given) or mp-rev (probabilities given, revealing).
    #[arg(long)]
    construction: String,
    /// Social choice table file; optional for t1 accounting runs.
    #[arg(long)]
    f: Option<PathBuf>,
    /// Valuation table file (required with --f).
    #[arg(long)]
    valuations: Option<PathBuf>,
    /// Uniform-fine scale for t1 (must exceed 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Scheme file supplying per-agent fines (mf).
    #[arg(long)]
    fines: Option<PathBuf>,
    /// Scheme file supplying per-agent probabilities (mp, mp-rev) and, for
    /// mp-rev, the revealing sets.
    #[arg(long)]
    probs: Option<PathBuf>,
    /// Agent count for accounting-only t1 runs without --f.
    #[arg(long)]
    n: Option<usize>,
    /// Write the (fine, probability) trade-off curve as CSV.
    #[arg(long)]
    emit_curve: Option<PathBuf>,
    /// Convert to a game form and check obviousness with the dominance
    /// module.
    #[arg(long)]
    cross_check: bool,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: DirectArgs) -> Result<Outcome> {
    let loaded = match (&args.f, &args.valuations) {
        (Some(f_path), Some(v_path)) => {
            let f = Scf::from_file(
                &ScfFile::from_json(&out::read_file(f_path)?)
                    .with_context(|| format!("parsing {}", f_path.display()))?,
            )?;
            let vals = ValuationTable::from_json(&out::read_file(v_path)?)
                .with_context(|| format!("parsing {}", v_path.display()))?;
            Some((f, vals))
        }
        (None, None) => None,
        _ => bail!("--f and --valuations must be given together"),
    };

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut failed = false;

    let range = loaded.as_ref().map(|(_, v)| v.range()).unwrap_or(1.0);
    if let Some(curve_path) = &args.emit_curve {
        let grid: Vec<f64> = (0..=38).map(|i| range * (1.0 + 0.5 * i as f64)).collect();
        let curve = verification_curve(range, &grid);
        let mut text = String::from("F,p\n");
        for (fine, p) in curve {
            text.push_str(&format!("{fine},{p}\n"));
        }
        fs::write(curve_path, text)
            .with_context(|| format!("writing {}", curve_path.display()))?;
        println!("curve written to {}", curve_path.display());
    }

    match args.construction.as_str() {
        "t1" => {
            let gamma = args.gamma.ok_or_else(|| anyhow!("t1 needs --gamma"))?;
            match loaded {
                Some((f, vals)) => {
                    let n = vals.n_agents();
                    let mech = build_theorem1(f, vals, gamma)?;
                    let truthful: Vec<usize> = vec![0; n];
                    let expected = mech.expected_verified(&truthful, &truthful);
                    let cross = cross_check(&args, &mech, &mut failed)?;
                    rows.push(row(
                        "t1",
                        n,
                        Some(gamma),
                        Some(1.0 - 1.0 / gamma),
                        Some(expected),
                        cross,
                    ));
                }
                None => {
                    // accounting-only: the expected count needs just the scheme
                    let n = args.n.ok_or_else(|| anyhow!("t1 without --f needs --n"))?;
                    if !(gamma > 1.0) {
                        bail!("gamma must exceed 1, got {gamma}");
                    }
                    let scheme = VerificationScheme {
                        agents: (0..n)
                            .map(|_| AgentScheme {
                                verifiable: true,
                                prob: ProbSpec::Theorem1 { gamma },
                                fine: FineSpec::Theorem1 { gamma },
                                revealing: None,
                            })
                            .collect(),
                    };
                    let profile: Vec<usize> = vec![0; n];
                    let expected = expected_verified_count(&scheme, &profile, &profile);
                    rows.push(row(
                        "t1",
                        n,
                        Some(gamma),
                        Some(1.0 - 1.0 / gamma),
                        Some(expected),
                        None,
                    ));
                }
            }
        }
        "mf" => {
            let (f, vals) = loaded.ok_or_else(|| anyhow!("mf needs --f and --valuations"))?;
            let fines_path = args.fines.as_ref().ok_or_else(|| anyhow!("mf needs --fines"))?;
            let scheme_file = SchemeFile::from_json(&out::read_file(fines_path)?)
                .with_context(|| format!("parsing {}", fines_path.display()))?;
            let fines = scheme_file
                .into_scheme()?
                .agents
                .into_iter()
                .map(|a| a.fine)
                .collect::<Vec<_>>();
            let n = vals.n_agents();
            let mech = build_fixed_fines(f, vals, fines)?;
            let truthful: Vec<usize> = vec![0; n];
            let expected = mech.expected_verified(&truthful, &truthful);
            let p = mech.scheme.raw_miss_prob(0, 0, 0, None);
            let cross = cross_check(&args, &mech, &mut failed)?;
            rows.push(row("mf", n, None, Some(p), Some(expected), cross));
        }
        "mp" | "mp-rev" => {
            let (f, vals) = loaded.ok_or_else(|| anyhow!("mp needs --f and --valuations"))?;
            let probs_path = args.probs.as_ref().ok_or_else(|| anyhow!("mp needs --probs"))?;
            let scheme_file = SchemeFile::from_json(&out::read_file(probs_path)?)
                .with_context(|| format!("parsing {}", probs_path.display()))?;
            let parsed = scheme_file.into_scheme()?;
            let probs: Vec<ProbSpec> = parsed.agents.iter().map(|a| a.prob.clone()).collect();
            let revealing = if args.construction == "mp-rev" {
                let maps: Option<Vec<Vec<Vec<usize>>>> =
                    parsed.agents.iter().map(|a| a.revealing.clone()).collect();
                Some(maps.ok_or_else(|| {
                    anyhow!("mp-rev needs a revealing set per agent in the probs file")
                })?)
            } else {
                None
            };
            let n = vals.n_agents();
            let mech = build_fixed_probs(f, vals, probs, revealing)?;
            let truthful: Vec<usize> = vec![0; n];
            let expected = mech.expected_verified(&truthful, &truthful);
            let cross = cross_check(&args, &mech, &mut failed)?;
            rows.push(row(&args.construction, n, None, None, Some(expected), cross));
        }
        other => bail!("unknown construction {other:?} (mf|t1|mp|mp-rev)"),
    }

    let table = Table {
        columns: vec!["construction", "n", "gamma", "p", "expected_verified", "cross_check_osp"],
        rows,
    };
    table.emit(args.out.as_ref(), args.json)?;
    Ok(if failed { Outcome::CheckFailed } else { Outcome::Pass })
}

fn cross_check(
    args: &DirectArgs,
    mech: &DirectMechanism,
    failed: &mut bool,
) -> Result<Option<bool>> {
    if !args.cross_check {
        return Ok(None);
    }
    let (game, signalling, utility) = mech.as_game_form();
    let report =
        check_mechanism(&game, &signalling, &utility, 0.0, MechanismNotion::Osp, &EnumLimits::default())?;
    if !report.holds {
        *failed = true;
    }
    Ok(Some(report.holds))
}

fn row(
    construction: &str,
    n: usize,
    gamma: Option<f64>,
    p: Option<f64>,
    expected: Option<f64>,
    cross: Option<bool>,
) -> Vec<String> {
    vec![
        construction.to_string(),
        n.to_string(),
        out::num(gamma),
        out::num(p),
        out::num(expected),
        cross.map(|b| b.to_string()).unwrap_or_default(),
    ]
}
