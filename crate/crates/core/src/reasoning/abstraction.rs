//! Abstraction of an episode into a scenario.

use std::collections::{BTreeMap, BTreeSet};

use crate::belog::BeLog;
use crate::functor::{reach, search_functors, Candidate, Functor, SearchConfig};
use crate::id::ObjectId;
use crate::log::Log;

#[derive(Debug, Clone, PartialEq)]
pub struct AbstractionResult {
    pub candidate: Candidate,
    /// Content objects of the e-log the functor leaves unmapped.
    pub residue: Vec<ObjectId>,
}

/// Whether every arrow of `s` between objects in the image of `f` is the
/// image of some composite arrow of `e`.
pub fn is_full(f: &Functor, e: &Log, s: &Log) -> bool {
    let mut preimage: BTreeMap<&ObjectId, Vec<&ObjectId>> = BTreeMap::new();
    for (x, y) in f.action_map.iter().chain(&f.participant_map) {
        preimage.entry(y).or_default().push(x);
    }
    let r = reach(e);
    for x in s.content_actions() {
        let Some(xs) = preimage.get(&x.id) else { continue };
        for t in [&x.who, &x.cause_s, &x.cause_n].into_iter().flatten() {
            if t.is_sentinel() || *t == x.id {
                continue;
            }
            let Some(ts) = preimage.get(t) else { continue };
            let covered = xs.iter().any(|a| ts.iter().any(|b| r.get(*a).is_some_and(|set| set.contains(*b))));
            if !covered {
                return false;
            }
        }
    }
    true
}

/// Full functors from `e` onto `s`, best first. Every candidate hits all of
/// `s`; whether all of `e` must be mapped follows `cfg.require_injective`.
pub fn abstract_episode(e: &Log, s: &Log, b: &BeLog, cfg: &SearchConfig) -> Vec<AbstractionResult> {
    let cfg = SearchConfig { require_surjective: true, ..cfg.clone() };
    search_functors(e, s, b, &cfg)
        .into_iter()
        .filter(|c| is_full(&c.functor, e, s))
        .map(|candidate| {
            let mapped: BTreeSet<&ObjectId> =
                candidate.functor.action_map.keys().chain(candidate.functor.participant_map.keys()).collect();
            let residue = e
                .content_action_ids()
                .into_iter()
                .chain(e.content_participants())
                .filter(|x| !mapped.contains(x))
                .collect();
            AbstractionResult { candidate, residue }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::{adjacency, completeness};
    use crate::id::oid;
    use crate::log::{build_elog, build_slog, Action, Participant};

    fn chain_e() -> Log {
        build_elog(
            oid("e"),
            vec![
                Action::new(oid("a1"), oid("p")).cause_n(oid("a2")).at(0),
                Action::new(oid("a2"), oid("q")).cause_s(oid("a1")).cause_n(oid("a3")).at(1),
                Action::new(oid("a3"), oid("q")).cause_s(oid("a2")).at(2),
            ],
            vec![Participant::plain(oid("p")), Participant::plain(oid("q"))],
        )
        .unwrap()
    }

    fn pair_s() -> Log {
        build_slog(
            oid("s"),
            vec![
                Action::new(oid("x"), oid("P")).cause_n(oid("y")).at(0),
                Action::new(oid("y"), oid("Q")).cause_s(oid("x")).at(1),
            ],
            vec![Participant::class(oid("P")), Participant::class(oid("Q"))],
        )
        .unwrap()
    }

    #[test]
    fn every_result_is_complete_and_full() {
        let (e, s) = (chain_e(), pair_s());
        let results = abstract_episode(&e, &s, &BeLog::new(), &SearchConfig::exhaustive());
        assert!(!results.is_empty());
        for r in &results {
            let f = &r.candidate.functor;
            let (ecm, scm) = (adjacency(&e), adjacency(&s));
            let p = f.conversion(&ecm, &scm).unwrap();
            assert!(completeness(&ecm, &scm, &p).unwrap().is_complete());
            assert!(is_full(f, &e, &s));
            assert!(r.residue.is_empty());
        }
        let best = &results[0].candidate.functor;
        assert_eq!(best.action_map[&oid("a1")], oid("x"));
        assert_eq!(best.action_map[&oid("a3")], oid("y"));
    }

    #[test]
    fn partial_results_report_residue() {
        let (e, s) = (chain_e(), pair_s());
        let cfg = SearchConfig { require_injective: false, ..SearchConfig::exhaustive() };
        let results = abstract_episode(&e, &s, &BeLog::new(), &cfg);
        assert!(results.iter().any(|r| !r.residue.is_empty()));
        assert!(results.iter().all(|r| r.candidate.score.report.surjective));
    }

    #[test]
    fn missing_arrow_is_not_full() {
        let e = build_elog(
            oid("e"),
            vec![Action::new(oid("u"), oid("p")), Action::new(oid("v"), oid("q"))],
            vec![Participant::plain(oid("p")), Participant::plain(oid("q"))],
        )
        .unwrap();
        let s = pair_s();
        let mut f = Functor::empty(e.id.clone(), s.id.clone());
        f.action_map.insert(oid("u"), oid("x"));
        f.action_map.insert(oid("v"), oid("y"));
        f.participant_map.insert(oid("p"), oid("P"));
        f.participant_map.insert(oid("q"), oid("Q"));
        assert!(!is_full(&f, &e, &s));
        assert!(abstract_episode(&e, &s, &BeLog::new(), &SearchConfig::exhaustive()).is_empty());
    }
}
