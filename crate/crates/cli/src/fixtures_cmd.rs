//! `osplab fixtures`: write the bundled example files (game trees,
//! valuations, signalling plans, a score table, reactions and a scheme) into
//! a directory. Output is deterministic, so repeated runs are byte-identical.

use anyhow::{Context, Result};
use clap::Args;
use std::fs;
use std::path::PathBuf;

use osplab_core::exponential::{ReactionsFile, ScoreFile};
use osplab_core::fixtures;
use osplab_core::verification::{SchemeAgentFile, SchemeFile};

use crate::out::Outcome;

#[derive(Args)]
pub struct FixturesArgs {
    /// Target directory (created if missing).
    #[arg(long)]
    dir: PathBuf,
}

pub fn run(args: FixturesArgs) -> Result<Outcome> {
    fs::create_dir_all(&args.dir)
        .with_context(|| format!("creating {}", args.dir.display()))?;
    let write = |name: &str, text: String| -> Result<()> {
        let path = args.dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
        Ok(())
    };

    // coin-toss tree
    let game = fixtures::fig1_game();
    write("fig1.mechanism.json", fixtures::fig1_description().to_json())?;
    write("fig1.valuations.json", fixtures::fig1_valuations().to_file().to_json())?;
    write(
        "fig1.signalling.json",
        fixtures::fig1_signalling(&game)
            .to_file(&game, &fixtures::fig1_valuations())
            .to_json(),
    )?;

    // second-price encoding
    let game = fixtures::second_price_game();
    write("second_price.mechanism.json", fixtures::second_price_description().to_json())?;
    write(
        "second_price.valuations.json",
        fixtures::second_price_valuations().to_file().to_json(),
    )?;
    write(
        "second_price.signalling.json",
        fixtures::second_price_signalling(&game)
            .to_file(&game, &fixtures::second_price_valuations())
            .to_json(),
    )?;

    // posted-price tree
    let game = fixtures::posted_price_game();
    write("posted_price.mechanism.json", fixtures::posted_price_description().to_json())?;
    write(
        "posted_price.valuations.json",
        fixtures::posted_price_valuations().to_file().to_json(),
    )?;
    write(
        "posted_price.signalling.json",
        fixtures::posted_price_signalling(&game)
            .to_file(&game, &fixtures::posted_price_valuations())
            .to_json(),
    )?;

    // fraction-of-highs score family on four agents, as an explicit table
    // (profiles in odometer order, last agent fastest)
    let sizes = vec![2usize; 4];
    let scores: Vec<Vec<f64>> = (0u32..16)
        .map(|idx| {
            let frac = (0..4)
                .filter(|&agent| idx & (1 << (3 - agent)) != 0)
                .count() as f64
                / 4.0;
            vec![1.0 - frac, frac]
        })
        .collect();
    write(
        "expmech_fraction4.json",
        ScoreFile {
            kind: "table".into(),
            domain_sizes: Some(sizes),
            outcomes: Some(vec!["s1".into(), "s2".into()]),
            scores: Some(scores),
            agents: None,
        }
        .to_json(),
    )?;

    // matching-reaction table with an outcome-dependent base
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
    write("expmech_reactions.json", ReactionsFile { values }.to_json())?;

    // a two-agent binary social choice table (agent 0's report decides)
    // with boundary valuations: type lo earns the floor truthfully and the
    // ceiling when lying
    write(
        "direct_f.json",
        osplab_core::direct::ScfFile {
            domain_sizes: vec![2, 2],
            outcomes: vec!["A".into(), "B".into()],
            table: vec!["A".into(), "A".into(), "B".into(), "B".into()],
        }
        .to_json(),
    )?;
    write(
        "direct_valuations.json",
        osplab_core::valuation::ValuationFile {
            value_min: 0.0,
            value_max: 1.0,
            outcomes: vec!["A".into(), "B".into()],
            agents: vec![
                osplab_core::valuation::AgentValuationFile {
                    types: vec!["lo".into(), "hi".into()],
                    values: vec![vec![0.0, 1.0], vec![0.2, 0.8]],
                },
                osplab_core::valuation::AgentValuationFile {
                    types: vec!["lo".into(), "hi".into()],
                    values: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
                },
            ],
        }
        .to_json(),
    )?;

    // half-miss probabilities for a two-agent binary instance
    write(
        "mp_scheme.json",
        SchemeFile {
            agents: (0..2)
                .map(|_| SchemeAgentFile {
                    verifiable: true,
                    p_kind: "constant".into(),
                    p_value: Some(0.5),
                    p_gamma: None,
                    p_table: None,
                    p_default: None,
                    fine_kind: "constant".into(),
                    fine_value: Some(2.0),
                    fine_gamma: None,
                    fine_table: None,
                    fine_default: None,
                    revealing: Some(vec![vec![0, 1], vec![0, 1]]),
                })
                .collect(),
        }
        .to_json(),
    )?;

    Ok(Outcome::Pass)
}
