use super::*;
use crate::fixtures::{
    fig1_description, fig1_game, posted_price_game, second_price_game,
};

fn limits() -> EnumLimits {
    EnumLimits::default()
}

#[test]
fn fig1_validates_cleanly() {
    assert!(fig1_game().validate().is_empty());
}

#[test]
fn single_terminal_tree_validates_cleanly() {
    let desc = MechanismFile {
        root: "z".into(),
        nodes: vec![NodeFile {
            id: "z".into(),
            kind: "terminal".into(),
            owner: None,
            edges: vec![],
            outcome: Some("only".into()),
        }],
        info_sets: vec![],
    };
    let game = GameForm::from_description(&desc).unwrap();
    assert!(game.validate().is_empty());
}

#[test]
fn shared_action_label_across_info_sets_is_flagged() {
    // two decision nodes of agent 0, both using label "L"
    let desc = MechanismFile {
        root: "a".into(),
        nodes: vec![
            NodeFile {
                id: "a".into(),
                kind: "player".into(),
                owner: Some(0),
                edges: vec![
                    EdgeFile { action: "L".into(), child: "b".into(), prob: None },
                    EdgeFile { action: "R".into(), child: "t1".into(), prob: None },
                ],
                outcome: None,
            },
            NodeFile {
                id: "b".into(),
                kind: "player".into(),
                owner: Some(0),
                edges: vec![
                    EdgeFile { action: "L".into(), child: "t2".into(), prob: None },
                    EdgeFile { action: "M".into(), child: "t3".into(), prob: None },
                ],
                outcome: None,
            },
            NodeFile {
                id: "t1".into(),
                kind: "terminal".into(),
                owner: None,
                edges: vec![],
                outcome: Some("x".into()),
            },
            NodeFile {
                id: "t2".into(),
                kind: "terminal".into(),
                owner: None,
                edges: vec![],
                outcome: Some("y".into()),
            },
            NodeFile {
                id: "t3".into(),
                kind: "terminal".into(),
                owner: None,
                edges: vec![],
                outcome: Some("z".into()),
            },
        ],
        info_sets: vec![
            InfoSetFile { agent: 0, nodes: vec!["a".into()] },
            InfoSetFile { agent: 0, nodes: vec!["b".into()] },
        ],
    };
    let game = GameForm::from_description(&desc).unwrap();
    let diags = game.validate();
    assert_eq!(diags.len(), 1, "{diags:?}");
    assert!(diags[0].message.contains("available at two information sets"));
}

#[test]
fn bad_chance_probabilities_are_flagged() {
    let mut desc = fig1_description();
    desc.nodes[0].edges[0].prob = Some(0.6); // 0.6 + 0.5 != 1
    let game = GameForm::from_description(&desc).unwrap();
    let diags = game.validate();
    assert!(diags.iter().any(|d| d.kind == DiagnosticKind::Chance
        && d.message.contains("probabilities sum")));
}

#[test]
fn multiple_parents_are_flagged() {
    let mut desc = fig1_description();
    // point the tails branch at the heads subtree's node
    desc.nodes[0].edges[1].child = "jH".into();
    let game = GameForm::from_description(&desc).unwrap();
    let diags = game.validate();
    assert!(diags.iter().any(|d| d.message.contains("parents")));
    assert!(diags.iter().any(|d| d.message.contains("unreachable")));
}

// -- play ------------------------------------------------------------------

fn fig1_realization(game: &GameForm, heads: bool) -> ChanceRealization {
    let reals = game.enumerate_realizations(100).unwrap();
    // action order at the coin is declared H, T
    let want = if heads { 0 } else { 1 };
    reals.into_iter().find(|r| r.choices == vec![want]).unwrap()
}

#[test]
fn fig1_play_heads_continue_left_reaches_s1() {
    let game = fig1_game();
    let s_i = game.strategy_from_labels(0, &[(0, "continue")]).unwrap();
    let s_j = game.strategy_from_labels(1, &[(1, "L"), (2, "l")]).unwrap();
    let trace = game.play(&fig1_realization(&game, true), &[s_i, s_j]).unwrap();
    assert_eq!(game.outcome_label(trace.outcome), "s1");
}

#[test]
fn fig1_play_tails_right_reaches_s5() {
    let game = fig1_game();
    for i_action in ["continue", "stop"] {
        let s_i = game.strategy_from_labels(0, &[(0, i_action)]).unwrap();
        let s_j = game.strategy_from_labels(1, &[(1, "L"), (2, "r")]).unwrap();
        let trace = game.play(&fig1_realization(&game, false), &[s_i, s_j]).unwrap();
        assert_eq!(game.outcome_label(trace.outcome), "s5");
    }
}

#[test]
fn single_terminal_play_needs_no_strategies() {
    let desc = MechanismFile {
        root: "z".into(),
        nodes: vec![NodeFile {
            id: "z".into(),
            kind: "terminal".into(),
            owner: None,
            edges: vec![],
            outcome: Some("only".into()),
        }],
        info_sets: vec![],
    };
    let game = GameForm::from_description(&desc).unwrap();
    let real = game.enumerate_realizations(10).unwrap();
    assert_eq!(real.len(), 1);
    assert_eq!(real[0].prob, 1.0);
    let trace = game.play(&real[0], &[]).unwrap();
    assert_eq!(game.outcome_label(trace.outcome), "only");
}

#[test]
fn missing_strategy_is_an_unassigned_agent() {
    let game = fig1_game();
    let s_i = game.strategy_from_labels(0, &[(0, "continue")]).unwrap();
    let err = game.play(&fig1_realization(&game, true), &[s_i]).unwrap_err();
    assert!(matches!(err, GameError::UnassignedAgent(1)));
}

// -- enumeration -----------------------------------------------------------

#[test]
fn fig1_strategy_counts() {
    let game = fig1_game();
    assert_eq!(game.enumerate_strategies(0, 1_000_000).unwrap().len(), 2);
    // two info sets with two actions each
    assert_eq!(game.enumerate_strategies(1, 1_000_000).unwrap().len(), 4);
}

#[test]
fn agent_without_decision_nodes_has_one_empty_strategy() {
    let game = fig1_game();
    let list = game.enumerate_strategies(7, 1_000_000).unwrap();
    assert_eq!(list.len(), 1);
    assert!(list[0].choices.is_empty());
}

#[test]
fn strategy_cap_is_enforced() {
    let game = fig1_game();
    let err = game.enumerate_strategies(1, 3).unwrap_err();
    assert!(matches!(err, GameError::StrategySpaceTooLarge { agent: 1, size: 4, cap: 3 }));
}

#[test]
fn realization_probabilities_sum_to_one() {
    for game in [fig1_game(), second_price_game(), posted_price_game()] {
        let total: f64 =
            game.enumerate_realizations(1_000).unwrap().iter().map(|r| r.prob).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

// -- departure points ------------------------------------------------------

#[test]
fn fig1_departure_has_one_info_set_witnessed_only_by_heads() {
    let game = fig1_game();
    let s = game.strategy_from_labels(0, &[(0, "continue")]).unwrap();
    let s_alt = game.strategy_from_labels(0, &[(0, "stop")]).unwrap();
    let analysis = game.departure_points(&s, &s_alt, &limits()).unwrap();
    assert_eq!(analysis.points.len(), 1);
    let point = &analysis.points[0];
    assert_eq!(game.info_set(point.info_set).agent, 0);
    // witnesses must all pick the heads branch at the coin
    assert!(!point.witnesses.is_empty());
    for &(_, r) in &point.witnesses {
        assert_eq!(analysis.realizations[r].choices, vec![0]);
    }
    // all four opponent strategies witness
    assert_eq!(point.witness_opponents.len(), 4);
}

#[test]
fn identical_strategies_have_no_departure() {
    let game = fig1_game();
    let s = game.strategy_from_labels(0, &[(0, "continue")]).unwrap();
    let analysis = game.departure_points(&s, &s.clone(), &limits()).unwrap();
    assert!(analysis.points.is_empty());
}

#[test]
fn departure_blocked_by_own_earlier_move_is_empty() {
    // agent 0 moves twice; strategies agree on the first move (leave), so
    // the second info set is never reached under either
    let desc = MechanismFile {
        root: "a".into(),
        nodes: vec![
            NodeFile {
                id: "a".into(),
                kind: "player".into(),
                owner: Some(0),
                edges: vec![
                    EdgeFile { action: "leave".into(), child: "t1".into(), prob: None },
                    EdgeFile { action: "go".into(), child: "b".into(), prob: None },
                ],
                outcome: None,
            },
            NodeFile {
                id: "b".into(),
                kind: "player".into(),
                owner: Some(0),
                edges: vec![
                    EdgeFile { action: "x".into(), child: "t2".into(), prob: None },
                    EdgeFile { action: "y".into(), child: "t3".into(), prob: None },
                ],
                outcome: None,
            },
            NodeFile {
                id: "t1".into(),
                kind: "terminal".into(),
                owner: None,
                edges: vec![],
                outcome: Some("o1".into()),
            },
            NodeFile {
                id: "t2".into(),
                kind: "terminal".into(),
                owner: None,
                edges: vec![],
                outcome: Some("o2".into()),
            },
            NodeFile {
                id: "t3".into(),
                kind: "terminal".into(),
                owner: None,
                edges: vec![],
                outcome: Some("o3".into()),
            },
        ],
        info_sets: vec![
            InfoSetFile { agent: 0, nodes: vec!["a".into()] },
            InfoSetFile { agent: 0, nodes: vec!["b".into()] },
        ],
    };
    let game = GameForm::from_description(&desc).unwrap();
    assert!(game.validate().is_empty());
    let s1 = game.strategy_from_labels(0, &[(0, "leave"), (1, "x")]).unwrap();
    let s2 = game.strategy_from_labels(0, &[(0, "leave"), (1, "y")]).unwrap();
    let analysis = game.departure_points(&s1, &s2, &limits()).unwrap();
    assert!(analysis.points.is_empty());
}

#[test]
fn departure_is_symmetric_and_witnesses_replay() {
    let game = fig1_game();
    let strategies = game.enumerate_strategies(0, 100).unwrap();
    let (s, s_alt) = (&strategies[0], &strategies[1]);
    let forward = game.departure_points(s, s_alt, &limits()).unwrap();
    let backward = game.departure_points(s_alt, s, &limits()).unwrap();
    let sets = |a: &DepartureAnalysis| {
        a.points.iter().map(|p| p.info_set).collect::<Vec<_>>()
    };
    assert_eq!(sets(&forward), sets(&backward));
    // replay every witness: both plays must cross the departure set
    for point in &forward.points {
        for &(o, r) in &point.witnesses {
            for own in [s, s_alt] {
                let trace = game
                    .trace(&forward.realizations[r], |a| {
                        if a == own.agent {
                            Some(own)
                        } else {
                            forward.opponent_profiles[o].iter().find(|x| x.agent == a)
                        }
                    })
                    .unwrap();
                assert!(trace.visited_info_sets.contains(&point.info_set));
            }
        }
    }
}

#[test]
fn different_agents_cannot_be_compared() {
    let game = fig1_game();
    let s0 = game.strategy_from_labels(0, &[(0, "continue")]).unwrap();
    let s1 = game.strategy_from_labels(1, &[(1, "L"), (2, "l")]).unwrap();
    assert!(matches!(
        game.departure_points(&s0, &s1, &limits()),
        Err(GameError::AgentMismatch(0, 1))
    ));
}

#[test]
fn description_round_trips() {
    let desc = fig1_description();
    let game = GameForm::from_description(&desc).unwrap();
    let back = game.to_description();
    let again = GameForm::from_description(&back).unwrap();
    assert!(again.validate().is_empty());
    assert_eq!(game.n_nodes(), again.n_nodes());
    assert_eq!(game.outcome_labels(), again.outcome_labels());
    // JSON round trip too
    let json = back.to_json();
    let reparsed = MechanismFile::from_json(&json).unwrap();
    assert_eq!(reparsed.nodes.len(), desc.nodes.len());
}

#[test]
fn odometer_orders_last_slot_fastest() {
    assert_eq!(
        odometer(&[2, 3]),
        vec![
            vec![0, 0],
            vec![0, 1],
            vec![0, 2],
            vec![1, 0],
            vec![1, 1],
            vec![1, 2]
        ]
    );
    assert_eq!(odometer(&[]), vec![Vec::<usize>::new()]);
    assert!(odometer(&[2, 0]).is_empty());
}
