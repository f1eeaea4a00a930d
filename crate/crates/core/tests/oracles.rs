//! Independent brute-force oracles checked against the library.

use std::collections::BTreeSet;

use gridforge::attributes::{Color, Shape};
use gridforge::grammar::{enumerate_commands, parse, GrammarConfig, SemanticFrame, Verb};
use gridforge::sampler::{enumerate_slots, RelativeDirection};
use gridforge::world::{goal_satisfied, Cell, Heading, ObjectSpec, Pose, WorldState};

/// Expands the command grammar symbol by symbol, capping adjectives at one
/// size word and one color word.
fn expand(symbol: &str) -> Vec<Vec<String>> {
    let words = |ws: &[&str]| ws.iter().map(|w| vec![w.to_string()]).collect::<Vec<_>>();
    let seq = |parts: &[&str]| -> Vec<Vec<String>> {
        parts.iter().fold(vec![Vec::new()], |acc, part| {
            let mut out = Vec::new();
            for prefix in &acc {
                for tail in expand(part) {
                    let mut p = prefix.clone();
                    p.extend(tail);
                    out.push(p);
                }
            }
            out
        })
    };
    match symbol {
        "C" => [seq(&["VP"]), seq(&["VP", "RB"])].concat(),
        "VP" => [seq(&["VV_i", "to", "DP"]), seq(&["VV_t", "DP"])].concat(),
        "DP" => seq(&["the", "NP"]),
        "NP" => [
            seq(&["NN"]),
            seq(&["SIZE", "NN"]),
            seq(&["COLOR", "NN"]),
            seq(&["SIZE", "COLOR", "NN"]),
            seq(&["COLOR", "SIZE", "NN"]),
        ]
        .concat(),
        "VV_i" => words(&["walk"]),
        "VV_t" => words(&["push", "pull"]),
        "RB" => vec![
            vec!["cautiously".into()],
            vec!["hesitantly".into()],
            vec!["while".into(), "spinning".into()],
            vec!["while".into(), "zigzagging".into()],
        ],
        "NN" => words(&["circle", "square", "cylinder"]),
        "SIZE" => words(&["small", "big"]),
        "COLOR" => words(&["red", "green", "blue", "yellow"]),
        terminal => vec![vec![terminal.to_string()]],
    }
}

#[test]
fn enumeration_matches_brute_force_expansion() {
    let brute: BTreeSet<String> = expand("C").into_iter().map(|w| w.join(" ")).collect();
    let ours: Vec<String> = enumerate_commands(&GrammarConfig::default())
        .unwrap()
        .iter()
        .map(|c| c.to_string())
        .collect();
    assert_eq!(brute.len(), 3 * 5 * 23 * 3);
    assert_eq!(ours.len(), brute.len());
    assert_eq!(ours.iter().cloned().collect::<BTreeSet<_>>(), brute);
    for c in enumerate_commands(&GrammarConfig::default()).unwrap() {
        parse(&c).unwrap();
    }
}

#[test]
fn slots_match_all_agent_target_pairs() {
    for d in 3..=7 {
        let mut brute = BTreeSet::new();
        for ar in 0..d as isize {
            for ac in 0..d as isize {
                for tr in 0..d as isize {
                    for tc in 0..d as isize {
                        let (dr, dc) = (tr - ar, tc - ac);
                        if let Some(dir) = RelativeDirection::from_offset(dr, dc) {
                            brute.insert((dir, (dr.abs() + dc.abs()) as usize));
                        }
                    }
                }
            }
        }
        let ours: BTreeSet<_> = enumerate_slots(d).into_iter().map(|s| (s.direction, s.distance)).collect();
        assert_eq!(ours, brute, "grid {d}");
    }
    let north: Vec<usize> = enumerate_slots(6)
        .into_iter()
        .filter(|s| s.direction == RelativeDirection::North)
        .map(|s| s.distance)
        .collect();
    assert_eq!(north, vec![1, 2, 3, 4, 5]);
    let ne: Vec<usize> = enumerate_slots(6)
        .into_iter()
        .filter(|s| s.direction == RelativeDirection::NorthEast)
        .map(|s| s.distance)
        .collect();
    assert_eq!(ne, (2..=10).collect::<Vec<_>>());
}

/// On every 4x4 layout of a light target and one blocker, a pushed (or pulled)
/// end state satisfies the goal exactly when the object rests on the last free
/// cell before the blocker or the wall.
#[test]
fn push_goal_matches_legal_final_positions() {
    let d = 4usize;
    let cells: Vec<Cell> = (0..d).flat_map(|r| (0..d).map(move |c| Cell::new(r, c))).collect();
    let target = ObjectSpec::new(Shape::Circle, Color::Red, 1);
    let blocker = ObjectSpec::new(Shape::Square, Color::Blue, 1);
    let mut checked = 0;
    for verb in [Verb::Push, Verb::Pull] {
        let frame = SemanticFrame::new(verb, Shape::Circle);
        for &start in &cells {
            for &block in cells.iter().filter(|c| **c != start) {
                for heading in Heading::ALL {
                    let dir = if verb == Verb::Push { heading } else { heading.opposite() };
                    let (ur, uc) = dir.delta();
                    let ray: Vec<Cell> = (0..d as isize)
                        .map_while(|k| {
                            let r = start.row as isize + k * ur;
                            let c = start.col as isize + k * uc;
                            (r >= 0 && c >= 0 && r < d as isize && c < d as isize)
                                .then(|| Cell::new(r as usize, c as usize))
                        })
                        .collect();
                    let free = ray.iter().position(|c| *c == block).unwrap_or(ray.len());
                    let legal = ray[free - 1];
                    let initial = WorldState::empty(d, Pose::new(start.row, start.col, heading))
                        .with_object(start, target)
                        .with_object(block, blocker)
                        .with_target(start);
                    for &end in &ray[..free] {
                        let mut fin = WorldState::empty(d, Pose::new(end.row, end.col, heading))
                            .with_object(end, target)
                            .with_object(block, blocker)
                            .with_target(end);
                        fin.agent.heading = heading;
                        assert_eq!(
                            goal_satisfied(&frame, &initial, &fin).unwrap(),
                            end == legal,
                            "{verb:?} from {start} heading {heading:?} blocker {block} end {end}"
                        );
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn stopping_two_cells_short_of_a_blocker_fails() {
    let frame = SemanticFrame::new(Verb::Push, Shape::Circle);
    let circle = ObjectSpec::new(Shape::Circle, Color::Green, 2);
    let wall = ObjectSpec::new(Shape::Cylinder, Color::Green, 2);
    let initial = WorldState::empty(6, Pose::new(0, 0, Heading::East))
        .with_object(Cell::new(0, 0), circle)
        .with_object(Cell::new(0, 4), wall)
        .with_target(Cell::new(0, 0));
    let end = |col| {
        WorldState::empty(6, Pose::new(0, col, Heading::East))
            .with_object(Cell::new(0, col), circle)
            .with_object(Cell::new(0, 4), wall)
            .with_target(Cell::new(0, col))
    };
    assert!(goal_satisfied(&frame, &initial, &end(3)).unwrap());
    assert!(!goal_satisfied(&frame, &initial, &end(2)).unwrap());
}
