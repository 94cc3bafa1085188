//! Scenario generation from a selected part of an episode.

use std::collections::{BTreeMap, BTreeSet};

use crate::belog::BeLog;
use crate::edit::extract_subepisode;
use crate::functor::Functor;
use crate::id::ObjectId;
use crate::log::{check_built, Action, Log, LogKind, ModelError, Participant, RawData};

use super::ReasoningError;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScenario {
    /// The selected sub-episode the scenario was read from.
    pub source: Log,
    pub slog: Log,
    /// Functor from `source` onto `slog`.
    pub functor: Functor,
}

fn class_of(b: &BeLog, p: &ObjectId) -> ObjectId {
    b.narrowest_class(p).unwrap_or_else(|| p.clone())
}

/// Actions the selection must also contain to be causally convex and keep
/// trivial pairs whole.
fn closure_gaps(e: &Log, actions: &BTreeSet<ObjectId>) -> Vec<ObjectId> {
    let desc = e.causal_descendants();
    let mut missing = BTreeSet::new();
    for a in actions {
        if let Some(p) = e.mutual_partner(a) {
            if !actions.contains(p) {
                missing.insert(p.clone());
            }
        }
    }
    for (x, below) in &desc {
        if actions.contains(x) {
            continue;
        }
        let after_selected = actions.iter().any(|a| desc.get(a).is_some_and(|d| d.contains(x)));
        if after_selected && below.iter().any(|c| actions.contains(c)) {
            missing.insert(x.clone());
        }
    }
    missing.into_iter().collect()
}

/// Builds an s-log from the objects `selection` of `e`.
///
/// Performers of selected actions join the selection. Each participant is
/// replaced by its narrowest Be3 class in `b`, or by a class of its own, and
/// timestamps become dense ranks in the same order.
pub fn generate_slog(
    e: &Log,
    selection: &BTreeSet<ObjectId>,
    b: &BeLog,
    id: ObjectId,
) -> Result<GeneratedScenario, ReasoningError> {
    for o in selection {
        if !e.actions.contains_key(o) && !e.participants.contains_key(o) {
            return Err(ModelError::UnknownObject(o.clone()).into());
        }
    }
    let actions: BTreeSet<ObjectId> = selection.iter().filter(|o| e.is_action(o) && !o.is_sentinel()).cloned().collect();
    let gaps = closure_gaps(e, &actions);
    if !gaps.is_empty() {
        return Err(ReasoningError::NotCausallyClosed(gaps));
    }
    let mut objects: BTreeSet<ObjectId> = selection.iter().filter(|o| !o.is_sentinel()).cloned().collect();
    for a in &actions {
        if let Some(w) = &e.actions[a].who {
            if !w.is_sentinel() {
                objects.insert(w.clone());
            }
        }
    }
    let source = extract_subepisode(e, &objects)?;

    let times: BTreeSet<i64> =
        source.content_actions().flat_map(|a| [a.raw.t_start, a.raw.t_end]).flatten().collect();
    let rank: BTreeMap<i64, i64> = times.into_iter().zip(0..).collect();

    let mut functor = Functor::empty(source.id.clone(), id.clone());
    let mut classes = BTreeMap::new();
    for p in source.content_participants() {
        let c = class_of(b, &p);
        classes.entry(c.clone()).or_insert_with(|| Participant::class(c.clone()));
        functor.participant_map.insert(p, c);
    }
    let mut slog = Log::empty(LogKind::Scenario, id);
    slog.provenance = Some(e.id.clone());
    slog.participants.extend(classes);
    for a in source.content_actions() {
        let who = a.who.as_ref().map(|w| functor.participant_map.get(w).cloned().unwrap_or_else(|| w.clone()));
        slog.put_action(Action {
            who,
            raw: RawData {
                t_start: a.raw.t_start.map(|t| rank[&t]),
                t_end: a.raw.t_end.map(|t| rank[&t]),
                attrs: BTreeMap::new(),
            },
            ..a.clone()
        });
        functor.action_map.insert(a.id.clone(), a.id.clone());
    }
    let slog = check_built(slog)?;
    Ok(GeneratedScenario { source, slog, functor })
}

/// Scenario from several exemplar episodes: the s-log comes from the first
/// one, and each class is given the characteristics shared by every
/// exemplar participant that falls into it.
pub fn enumerative_induction(
    exemplars: &[Log],
    b: &BeLog,
    id: ObjectId,
) -> Result<(GeneratedScenario, BTreeMap<ObjectId, BTreeSet<ObjectId>>), ReasoningError> {
    let first = exemplars.first().ok_or(ReasoningError::EmptyLibrary)?;
    let all: BTreeSet<ObjectId> = first.content_action_ids().into_iter().chain(first.content_participants()).collect();
    let generated = generate_slog(first, &all, b, id)?;
    let mut shared: BTreeMap<ObjectId, BTreeSet<ObjectId>> = BTreeMap::new();
    for e in exemplars {
        for p in e.content_participants() {
            let c = class_of(b, &p);
            if !generated.slog.participants.contains_key(&c) {
                continue;
            }
            let ch = b.characteristics(&p);
            shared.entry(c).and_modify(|s| s.retain(|x| ch.contains(x))).or_insert(ch);
        }
    }
    Ok((generated, shared))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belog::{BeRelation, BeVerbType};
    use crate::equations::{adjacency, completeness};
    use crate::id::oid;
    use crate::log::build_elog;

    fn story() -> Log {
        build_elog(
            oid("story"),
            vec![
                Action::new(oid("a"), oid("p")).cause_n(oid("b")).at(10),
                Action::new(oid("b"), oid("q")).cause_s(oid("a")).cause_n(oid("c")).at(20),
                Action::new(oid("c"), oid("r")).cause_s(oid("b")).at(35),
                Action::new(oid("d"), oid("p")).at(40),
            ],
            ["p", "q", "r"].iter().map(|x| Participant::plain(oid(x))).collect(),
        )
        .unwrap()
    }

    fn sel(ids: &[&str]) -> BTreeSet<ObjectId> {
        ids.iter().map(|x| oid(x)).collect()
    }

    #[test]
    fn classes_and_ranks() {
        let b = BeLog::from_relations([
            BeRelation::new(BeVerbType::Be3, oid("p"), oid("Agent")),
            BeRelation::new(BeVerbType::Be3, oid("q"), oid("Agent")),
        ])
        .unwrap();
        let g = generate_slog(&story(), &sel(&["a", "b", "c"]), &b, oid("gen")).unwrap();
        assert_eq!(g.slog.kind, LogKind::Scenario);
        let classes: Vec<&str> = g.slog.participants.keys().map(|c| c.as_str()).filter(|c| *c != "nobody").collect();
        assert_eq!(classes, ["Agent", "r"]);
        let ranks: Vec<Option<i64>> = ["a", "b", "c"].iter().map(|x| g.slog.actions[&oid(x)].raw.t_start).collect();
        assert_eq!(ranks, [Some(0), Some(1), Some(2)]);
        assert!(!g.slog.actions.contains_key(&oid("d")));
        let (ecm, scm) = (adjacency(&g.source), adjacency(&g.slog));
        let p = g.functor.conversion(&ecm, &scm).unwrap();
        assert!(completeness(&ecm, &scm, &p).unwrap().is_complete());
    }

    #[test]
    fn gap_in_the_middle_is_rejected() {
        let err = generate_slog(&story(), &sel(&["a", "c"]), &BeLog::new(), oid("gen")).unwrap_err();
        assert_eq!(err, ReasoningError::NotCausallyClosed(vec![oid("b")]));
        let err = generate_slog(&story(), &sel(&["zzz"]), &BeLog::new(), oid("gen")).unwrap_err();
        assert!(matches!(err, ReasoningError::Model(ModelError::UnknownObject(_))));
    }

    #[test]
    fn induction_intersects_characteristics() {
        let b = BeLog::from_relations([
            BeRelation::new(BeVerbType::Be3, oid("p"), oid("Agent")),
            BeRelation::new(BeVerbType::Be3, oid("q"), oid("Agent")),
            BeRelation::new(BeVerbType::Be4, oid("p"), oid("tall")),
            BeRelation::new(BeVerbType::Be4, oid("p"), oid("quick")),
            BeRelation::new(BeVerbType::Be4, oid("q"), oid("quick")),
        ])
        .unwrap();
        let (g, shared) = enumerative_induction(&[story()], &b, oid("ind")).unwrap();
        assert!(g.slog.actions.contains_key(&oid("d")));
        assert_eq!(shared[&oid("Agent")], sel(&["quick"]));
        assert!(enumerative_induction(&[], &b, oid("x")).is_err());
    }
}
