use std::fs;
use std::path::PathBuf;

use cognilog::belog::BeLog;
use cognilog::functor::{natural_transformation, search_functors, Functor, SearchConfig};
use cognilog::reasoning::{classify_story, comprehend, infer_missing, plan, Segmentation, Tense};
use cognilog::store::Store;
use cognilog::temporal::check_temporal_consistency;
use cognilog::text::parse_functors;
use cognilog::{oid, Log};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn log(name: &str) -> Log {
    Store::load(&fixture(name)).unwrap().logs.into_values().next().unwrap()
}

fn belog(names: &[&str]) -> BeLog {
    let mut store = Store::new();
    for n in names {
        store.load_belog_file(&fixture(n)).unwrap();
    }
    store.belog
}

fn functor(name: &str) -> Functor {
    parse_functors(&fs::read_to_string(fixture(name)).unwrap()).unwrap().remove(0)
}

#[test]
fn robot_abstractions() {
    let (e, s, b) = (log("robot.elog"), log("worker.slog"), belog(&["robot.belog"]));
    let found = search_functors(&e, &s, &b, &SearchConfig::exhaustive());
    let complete: Vec<_> = found.iter().filter(|c| c.score.report.is_complete()).collect();
    assert!(complete.len() >= 2);
    let a = functor("fig10a.functor");
    let bb = functor("fig10b.functor");
    let pos = |f: &Functor| complete.iter().position(|c| c.functor == *f).unwrap();
    assert!(pos(&a) < pos(&bb));
    assert_eq!(natural_transformation(&a, &bb, &e, &s).unwrap(), None);
    assert!(natural_transformation(&a, &a, &e, &s).unwrap().is_some());
}

#[test]
fn attention_functors() {
    let (e, s) = (log("robot.elog"), log("worker.slog"));
    let (h, j, k) = (functor("fig11-h.functor"), functor("fig11-j.functor"), functor("fig11-k.functor"));
    let eta = natural_transformation(&h, &j, &s, &e).unwrap().unwrap();
    assert_eq!(eta[&oid("is_carried")], (oid("was_carried0"), oid("carries_load")));
    assert_eq!(natural_transformation(&h, &k, &s, &e).unwrap(), None);
}

#[test]
fn explosion_prediction() {
    let (e, s, b) = (log("explosion.elog"), log("blast.slog"), belog(&["explosion.belog"]));
    let cfg = SearchConfig { min_compatibility: 0.5, ..SearchConfig::exhaustive() };
    let r = infer_missing(&e, &s, &b, &cfg).unwrap();
    let added: Vec<(&str, Tense)> = r.added.iter().map(|a| (a.id.as_str(), a.tense)).collect();
    assert_eq!(added, [("destroy", Tense::Future), ("is_destroyed", Tense::Future)]);
    assert_eq!(r.log.actions[&oid("is_destroyed")].who, Some(oid("bond")));
    assert!(infer_missing(&r.log, &s, &b, &cfg).unwrap().added.is_empty());
}

#[test]
fn fig14_orderings() {
    let e = log("fig14.elog");
    let good = check_temporal_consistency(&e, &log("fig14-true.slog"), &functor("fig14-true.functor"));
    let bad = check_temporal_consistency(&e, &log("fig14-false.slog"), &functor("fig14-false.functor"));
    assert!(good.ok);
    assert!(!bad.ok);
}

#[test]
fn story_is_read_scene_by_scene() {
    let story = log("story.elog");
    let library = [log("worker.slog"), log("blast.slog")];
    let b = belog(&["robot.belog", "explosion.belog", "story.belog"]);
    let tree = comprehend(&story, &library, &b, &SearchConfig::default(), Segmentation::CausalComponents, 3).unwrap();
    assert_eq!(tree.levels[0].len(), 2);
    let scenes: Vec<_> = tree.levels[0].iter().map(|n| n.matched.as_ref().unwrap().slog.as_str()).collect();
    assert_eq!(scenes, ["worker", "blast"]);
    let classes = classify_story(&tree, &b);
    assert_eq!((classes[0].class.as_str(), classes[0].score), ("delivery", 1.0));
    assert_eq!((classes[1].class.as_str(), classes[1].score), ("accident", 0.5));
}

#[test]
fn delivery_plans() {
    let plans = plan(
        &oid("is_carried"),
        &[log("worker.slog"), log("blast.slog")],
        &log("world.elog"),
        &belog(&["robot.belog"]),
        &SearchConfig::default(),
    )
    .unwrap();
    let assignments: Vec<Vec<&str>> =
        plans.iter().map(|p| p.assignment.values().map(|w| w.as_str()).collect()).collect();
    assert_eq!(assignments, [vec!["bottle", "dolly"], vec!["bottle", "robot"], vec!["dolly", "robot"]]);
}
