//! `osplab check`: load a mechanism, valuations, signalling (and optionally
//! a verification scheme for fine-adjusted utilities), run the requested
//! dominance notion cell by cell, and print the verdict table.

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use std::path::PathBuf;

use osplab_core::dominance::{
    check_mechanism, MechanismNotion, MechanismReport, SignallingFile, SignallingMap,
    UtilityModel,
};
use osplab_core::game::EnumLimits;
use osplab_core::verification::SchemeFile;
use osplab_core::{GameForm, MechanismFile, ValuationTable};

use crate::out::{self, Outcome, Table};

#[derive(Args)]
pub struct CheckArgs {
    /// Mechanism description (game tree) file.
    #[arg(long)]
    mechanism: PathBuf,
    /// Valuation table file.
    #[arg(long)]
    valuations: PathBuf,
    /// Signalling strategies file.
    #[arg(long)]
    signalling: PathBuf,
    /// Optional verification scheme; lies attributed on a path are charged
    /// their expected fine.
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Notion to decide: sp, osp, sp-exp or osp-exp.
    #[arg(long, default_value = "osp")]
    notion: String,
    /// Additive slack on the deviation side.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Print the failing witnesses for every violated cell.
    #[arg(long)]
    counterexamples: bool,
    /// Emit the verdict table as JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Also write the verdict table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: CheckArgs) -> Result<Outcome> {
    let notion = parse_notion(&args.notion)?;
    let mechanism = MechanismFile::from_json(&out::read_file(&args.mechanism)?)
        .with_context(|| format!("parsing {}", args.mechanism.display()))?;
    let game = GameForm::from_description(&mechanism)?;
    let diagnostics = game.validate();
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("invalid mechanism: {}", d.message);
        }
        bail!("{} validation failure(s) in {}", diagnostics.len(), args.mechanism.display());
    }
    let vals = ValuationTable::from_json(&out::read_file(&args.valuations)?)
        .with_context(|| format!("parsing {}", args.valuations.display()))?;
    let signalling_file = SignallingFile::from_json(&out::read_file(&args.signalling)?)
        .with_context(|| format!("parsing {}", args.signalling.display()))?;
    let signalling = SignallingMap::from_file(&game, &vals, &signalling_file)?;

    let utility = match &args.scheme {
        None => UtilityModel::from_valuations(&game, &vals)?,
        Some(path) => {
            let scheme = SchemeFile::from_json(&out::read_file(path)?)
                .with_context(|| format!("parsing {}", path.display()))?
                .into_scheme()?;
            scheme.validate(&vals)?;
            UtilityModel::with_scheme(&game, &vals, &scheme, &signalling)?
        }
    };

    let report =
        check_mechanism(&game, &signalling, &utility, args.epsilon, notion, &EnumLimits::default())?;
    print_report(&game, &vals, &args, &report);

    let table = report_table(&vals, &args, &report);
    if args.out.is_some() || args.json {
        table.emit(args.out.as_ref(), args.json)?;
    }
    Ok(if report.holds { Outcome::Pass } else { Outcome::CheckFailed })
}

fn parse_notion(text: &str) -> Result<MechanismNotion> {
    Ok(match text {
        "sp" => MechanismNotion::Sp,
        "osp" => MechanismNotion::Osp,
        "sp-exp" => MechanismNotion::SpExpectation,
        "osp-exp" => MechanismNotion::OspExpectation,
        other => return Err(anyhow!("unknown notion {other:?} (sp|osp|sp-exp|osp-exp)")),
    })
}

fn print_report(
    game: &GameForm,
    vals: &ValuationTable,
    args: &CheckArgs,
    report: &MechanismReport,
) {
    for cell in &report.cells {
        let type_name = &vals.type_names(cell.agent)[cell.type_idx];
        let verdict = if cell.verdict.holds { "holds" } else { "FAILS" };
        let cross = match cell.weak_cross_check {
            Some(true) => " (weak: holds)",
            Some(false) => " (weak: FAILS)",
            None => "",
        };
        println!(
            "agent={} type={} notion={} epsilon={} {}{}",
            cell.agent, type_name, args.notion, args.epsilon, verdict, cross
        );
        if args.counterexamples {
            if let Some(ce) = &cell.verdict.counterexample {
                let plan = |s: &osplab_core::Strategy| {
                    game.strategy_labels(s)
                        .into_iter()
                        .map(|(set, action)| format!("I{set}->{action}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                println!(
                    "  deviation: {} | truthful utility {} vs deviating {} (gap {})",
                    plan(&ce.deviation),
                    ce.truthful_utility,
                    ce.deviating_utility,
                    ce.gap
                );
                for (side, witness) in [
                    ("truthful", &ce.truthful_witness),
                    ("deviating", &ce.deviating_witness),
                ] {
                    let opponents = witness
                        .opponents
                        .iter()
                        .map(|s| format!("a{}[{}]", s.agent, plan(s)))
                        .collect::<Vec<_>>()
                        .join(", ");
                    let chance = witness
                        .realization
                        .as_ref()
                        .map(|r| format!(" chance={:?}", r.choices))
                        .unwrap_or_default();
                    println!("  {side} witness: {opponents}{chance}");
                }
            }
        }
    }
    println!(
        "mechanism {} at epsilon={}: {}",
        args.notion,
        args.epsilon,
        if report.holds { "holds" } else { "FAILS" }
    );
}

fn report_table(vals: &ValuationTable, args: &CheckArgs, report: &MechanismReport) -> Table {
    let rows = report
        .cells
        .iter()
        .map(|cell| {
            vec![
                cell.agent.to_string(),
                vals.type_names(cell.agent)[cell.type_idx].clone(),
                args.notion.clone(),
                out::num(Some(args.epsilon)),
                cell.verdict.holds.to_string(),
                out::num(cell.verdict.counterexample.as_ref().map(|ce| ce.gap)),
            ]
        })
        .collect();
    Table { columns: vec!["agent", "type", "notion", "epsilon", "holds", "gap"], rows }
}
