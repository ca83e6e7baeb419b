//! Bundled example mechanisms: the coin-toss tree (a chance move that can
//! make an information set unreachable), a sealed-bid second-price encoding
//! (strategyproof but not obviously so), and a posted-price-style sequential
//! tree (obviously strategyproof). Each comes with valuations and the
//! intended signalling strategies, and every builder is deterministic.

use crate::dominance::SignallingMap;
use crate::game::{EdgeFile, GameForm, InfoSetFile, MechanismFile, NodeFile};
use crate::valuation::ValuationTable;

fn player(id: &str, owner: usize, edges: Vec<(&str, &str)>) -> NodeFile {
    NodeFile {
        id: id.into(),
        kind: "player".into(),
        owner: Some(owner),
        edges: edges
            .into_iter()
            .map(|(action, child)| EdgeFile {
                action: action.into(),
                child: child.into(),
                prob: None,
            })
            .collect(),
        outcome: None,
    }
}

fn chance(id: &str, edges: Vec<(&str, &str, f64)>) -> NodeFile {
    NodeFile {
        id: id.into(),
        kind: "chance".into(),
        owner: None,
        edges: edges
            .into_iter()
            .map(|(action, child, prob)| EdgeFile {
                action: action.into(),
                child: child.into(),
                prob: Some(prob),
            })
            .collect(),
        outcome: None,
    }
}

fn terminal(id: &str, outcome: &str) -> NodeFile {
    NodeFile {
        id: id.into(),
        kind: "terminal".into(),
        owner: None,
        edges: Vec::new(),
        outcome: Some(outcome.into()),
    }
}

/// The coin-toss tree: chance flips a fair coin; on heads agent 0 either
/// continues (handing the move to agent 1) or stops at `s3`; on tails agent
/// 1 picks between `s4` and `s5` directly. Agent 1's two decision nodes are
/// distinct information sets with disjoint action labels.
pub fn fig1_description() -> MechanismFile {
    MechanismFile {
        root: "coin".into(),
        nodes: vec![
            chance("coin", vec![("H", "i", 0.5), ("T", "jT", 0.5)]),
            player("i", 0, vec![("continue", "jH"), ("stop", "s3")]),
            player("jH", 1, vec![("L", "s1"), ("R", "s2")]),
            player("jT", 1, vec![("l", "s4"), ("r", "s5")]),
            terminal("s1", "s1"),
            terminal("s2", "s2"),
            terminal("s3", "s3"),
            terminal("s4", "s4"),
            terminal("s5", "s5"),
        ],
        info_sets: vec![
            InfoSetFile { agent: 0, nodes: vec!["i".into()] },
            InfoSetFile { agent: 1, nodes: vec!["jH".into()] },
            InfoSetFile { agent: 1, nodes: vec!["jT".into()] },
        ],
    }
}

pub fn fig1_game() -> GameForm {
    GameForm::from_description(&fig1_description()).expect("fig1 builds")
}

/// Single-type valuations over `s1..s5`: agent 0 strictly prefers `s1`,
/// gets nothing at `s2`, and 0.4 at the early exit `s3`; agent 1 prefers
/// the left action everywhere.
pub fn fig1_valuations() -> ValuationTable {
    ValuationTable::new(
        0.0,
        1.0,
        vec!["s1".into(), "s2".into(), "s3".into(), "s4".into(), "s5".into()],
        vec![
            (vec!["t".into()], vec![vec![1.0, 0.0, 0.4, 0.2, 0.2]]),
            (vec!["u".into()], vec![vec![1.0, 0.0, 0.5, 1.0, 0.0]]),
        ],
    )
    .expect("fig1 valuations are in bounds")
}

pub fn fig1_signalling(game: &GameForm) -> SignallingMap {
    let agent0 = game.strategy_from_labels(0, &[(0, "continue")]).expect("agent 0 plan");
    let agent1 = game
        .strategy_from_labels(1, &[(1, "L"), (2, "l")])
        .expect("agent 1 plan");
    SignallingMap::new(vec![vec![agent0], vec![agent1]])
}

/// Sealed-bid second-price auction, agent 0 bidding in `{1,2,3}` and agent 1
/// in `{1,3}`, ties to agent 0. Outcomes encode (winner, price); quasilinear
/// utilities are folded into the valuation table.
pub fn second_price_description() -> MechanismFile {
    MechanismFile {
        root: "b".into(),
        nodes: vec![
            player("b", 0, vec![("bid1", "o1"), ("bid2", "o2"), ("bid3", "o3")]),
            player("o1", 1, vec![("Bid1", "z11"), ("Bid3", "z13")]),
            player("o2", 1, vec![("Bid1", "z21"), ("Bid3", "z23")]),
            player("o3", 1, vec![("Bid1", "z31"), ("Bid3", "z33")]),
            terminal("z11", "w1p1"),
            terminal("z13", "w2p1"),
            terminal("z21", "w1p1"),
            terminal("z23", "w2p2"),
            terminal("z31", "w1p1"),
            terminal("z33", "w1p3"),
        ],
        info_sets: vec![
            InfoSetFile { agent: 0, nodes: vec!["b".into()] },
            InfoSetFile { agent: 1, nodes: vec!["o1".into(), "o2".into(), "o3".into()] },
        ],
    }
}

pub fn second_price_game() -> GameForm {
    GameForm::from_description(&second_price_description()).expect("second price builds")
}

pub fn second_price_valuations() -> ValuationTable {
    // winner's utility = type - price, loser's 0
    ValuationTable::new(
        -2.0,
        2.0,
        vec!["w1p1".into(), "w2p1".into(), "w2p2".into(), "w1p3".into()],
        vec![
            (
                vec!["1".into(), "2".into(), "3".into()],
                vec![
                    vec![0.0, 0.0, 0.0, -2.0],
                    vec![1.0, 0.0, 0.0, -1.0],
                    vec![2.0, 0.0, 0.0, 0.0],
                ],
            ),
            (
                vec!["1".into(), "3".into()],
                vec![vec![0.0, 0.0, -1.0, 0.0], vec![0.0, 2.0, 1.0, 0.0]],
            ),
        ],
    )
    .expect("second price valuations are in bounds")
}

pub fn second_price_signalling(game: &GameForm) -> SignallingMap {
    let a0 = ["bid1", "bid2", "bid3"]
        .iter()
        .map(|action| game.strategy_from_labels(0, &[(0, action)]).expect("bid plan"))
        .collect();
    let a1 = ["Bid1", "Bid3"]
        .iter()
        .map(|action| game.strategy_from_labels(1, &[(1, action)]).expect("bid plan"))
        .collect();
    SignallingMap::new(vec![a0, a1])
}

/// Posted-price-style sequential tree: agent 0 is offered the item first;
/// if she passes, agent 1 gets the same offer. Types are below/above the
/// price, so the truthful action is optimal at every own node.
pub fn posted_price_description() -> MechanismFile {
    MechanismFile {
        root: "offer0".into(),
        nodes: vec![
            player("offer0", 0, vec![("take", "buy0"), ("pass", "offer1")]),
            player("offer1", 1, vec![("Take", "buy1"), ("Pass", "none")]),
            terminal("buy0", "buy0"),
            terminal("buy1", "buy1"),
            terminal("none", "none"),
        ],
        info_sets: vec![
            InfoSetFile { agent: 0, nodes: vec!["offer0".into()] },
            InfoSetFile { agent: 1, nodes: vec!["offer1".into()] },
        ],
    }
}

pub fn posted_price_game() -> GameForm {
    GameForm::from_description(&posted_price_description()).expect("posted price builds")
}

pub fn posted_price_valuations() -> ValuationTable {
    ValuationTable::new(
        -1.0,
        1.0,
        vec!["buy0".into(), "buy1".into(), "none".into()],
        vec![
            (vec!["lo".into(), "hi".into()], vec![vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]),
            (vec!["lo".into(), "hi".into()], vec![vec![0.0, -1.0, 0.0], vec![0.0, 1.0, 0.0]]),
        ],
    )
    .expect("posted price valuations are in bounds")
}

pub fn posted_price_signalling(game: &GameForm) -> SignallingMap {
    let a0 = vec![
        game.strategy_from_labels(0, &[(0, "pass")]).expect("lo plan"),
        game.strategy_from_labels(0, &[(0, "take")]).expect("hi plan"),
    ];
    let a1 = vec![
        game.strategy_from_labels(1, &[(1, "Pass")]).expect("lo plan"),
        game.strategy_from_labels(1, &[(1, "Take")]).expect("hi plan"),
    ];
    SignallingMap::new(vec![a0, a1])
}
