use std::collections::BTreeMap;
use std::io::Cursor;
use std::sync::OnceLock;

use rand::seq::{IteratorRandom, SliceRandom};

use gridforge::config::RunConfig;
use gridforge::dataset_io::{Dataset, SuiteKind};
use gridforge::eval::{read_predictions, score, write_predictions};
use gridforge::pipeline::build_suite;
use gridforge::planner::{plan_to_cell, Convention};
use gridforge::seed::rng_for;
use gridforge::splits::SplitLabel;
use gridforge::world::ActionSequence;

fn dataset() -> &'static Dataset {
    static DS: OnceLock<Dataset> = OnceLock::new();
    DS.get_or_init(|| {
        let mut cfg = RunConfig::default();
        cfg.compositional.samples_per_slot = 1;
        build_suite(&cfg, SuiteKind::Compositional).unwrap().dataset
    })
}

/// Walks to (or moves) a uniformly chosen object, ignoring the command's description.
fn chance_agent(ds: &Dataset, seed: u64) -> BTreeMap<u64, ActionSequence> {
    let mut rng = rng_for(seed, &[]);
    ds.examples()
        .map(|e| {
            let cell = *e.world.objects.keys().choose(&mut rng).unwrap();
            (e.id, plan_to_cell(&e.frame, &e.world, cell, Convention::HorizontalFirst))
        })
        .collect()
}

#[test]
fn chance_agent_scores_near_chance_on_red_squares() {
    let ds = dataset();
    let report = score(ds, &chance_agent(ds, 11)).unwrap();
    let square = &report.splits[&SplitLabel::TestRedSquares].by_target["square"];
    assert!(square.examples > 1000, "{}", square.examples);
    let diff = square.semantic_pct() - square.chance_pct();
    assert!(diff.abs() <= 3.0, "semantic {:.2}% vs chance {:.2}%", square.semantic_pct(), square.chance_pct());
}

#[test]
fn exact_implies_semantic() {
    let ds = dataset();
    let report = score(ds, &chance_agent(ds, 12)).unwrap();
    for s in report.splits.values() {
        assert!(s.overall.exact <= s.overall.semantic);
        for t in s.by_target.values() {
            assert!(t.exact <= t.semantic);
        }
    }
}

#[test]
fn line_order_of_predictions_does_not_matter() {
    let ds = dataset();
    let preds = chance_agent(ds, 13);
    let text = write_predictions(preds.iter().map(|(id, s)| (*id, s)));
    let mut lines: Vec<&str> = text.lines().collect();
    lines.shuffle(&mut rng_for(13, &[1]));
    let shuffled = read_predictions(Cursor::new(lines.join("\n"))).unwrap();
    assert_eq!(shuffled, preds);
    assert_eq!(score(ds, &shuffled).unwrap(), score(ds, &preds).unwrap());
}

#[test]
fn empty_predictions_score_zero() {
    let ds = dataset();
    let report = score(ds, &BTreeMap::new()).unwrap();
    assert_eq!(report.missing_ids.len(), ds.len());
    for s in report.splits.values() {
        assert_eq!((s.exact_pct, s.semantic_pct, s.row_col_pct), (0.0, 0.0, 0.0));
    }
}
