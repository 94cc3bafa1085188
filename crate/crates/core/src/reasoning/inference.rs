//! Completion of an episode from a scenario it partially matches.

use std::collections::{BTreeMap, BTreeSet};

use crate::belog::BeLog;
use crate::functor::{search_functors, Functor, SearchConfig};
use crate::id::ObjectId;
use crate::log::{check_built, Action, Log, RawData};

use super::{InferenceMode, ReasoningError};

/// Attribute recording which s-log action an inferred action copies.
pub const INFERRED_ATTR: &str = "inferred";
/// Attribute holding the [`Tense`] of an inferred action.
pub const TENSE_ATTR: &str = "tense";

/// When an inferred action happens relative to what the episode records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tense {
    /// It precedes a recorded event and went unobserved.
    PastHidden,
    /// Every cause is recorded or itself predicted; it is yet to come.
    Future,
    Undetermined,
}

impl Tense {
    pub fn as_str(self) -> &'static str {
        match self {
            Tense::PastHidden => "past_hidden",
            Tense::Future => "future",
            Tense::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddedAction {
    pub id: ObjectId,
    /// The s-log action it copies.
    pub source: ObjectId,
    pub tense: Tense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub log: Log,
    /// The partial functor the completion was read from.
    pub functor: Functor,
    pub added: Vec<AddedAction>,
    /// Existing arrows `(action, arrow, new target)` that pointed to
    /// `unknown` and now reach an inferred action.
    pub rewired: Vec<(ObjectId, &'static str, ObjectId)>,
}

fn provenance_tag(s: &Log, x: &ObjectId) -> String {
    format!("{}:{}", s.id, x)
}

/// Adds to `e` the actions of `s` that the best partial functor leaves
/// uncovered, wired through the functor's inverse image.
///
/// Running it again on its own output adds nothing: inferred actions carry
/// their origin and are recognised on later runs.
pub fn infer_missing(e: &Log, s: &Log, b: &BeLog, cfg: &SearchConfig) -> Result<InferenceResult, ReasoningError> {
    let cfg = SearchConfig { max_candidates: cfg.max_candidates.max(1), ..InferenceMode::Abduction.config(cfg) };
    let best = search_functors(e, s, b, &cfg).into_iter().next().ok_or(ReasoningError::NoAdmissibleFunctor)?;
    let f = best.functor;

    let mut earlier: BTreeMap<ObjectId, ObjectId> = BTreeMap::new();
    for a in e.content_actions() {
        if let Some(tag) = a.raw.attrs.get(INFERRED_ATTR) {
            for x in s.content_action_ids() {
                if *tag == provenance_tag(s, &x) {
                    earlier.insert(x, a.id.clone());
                }
            }
        }
    }
    let hit: BTreeSet<&ObjectId> = f.action_map.values().collect();
    let s_order = s.canonical_action_order();
    let unhit: Vec<&ObjectId> = s_order
        .iter()
        .filter(|x| !x.is_sentinel() && !hit.contains(x) && !earlier.contains_key(*x))
        .collect();
    if unhit.is_empty() {
        return Ok(InferenceResult { log: e.clone(), functor: f, added: vec![], rewired: vec![] });
    }

    let mut copy_of: BTreeMap<ObjectId, ObjectId> = BTreeMap::new();
    for x in &unhit {
        let id = if e.actions.contains_key(*x) || e.participants.contains_key(*x) {
            ObjectId::new(format!("{}@{}", x, s.id)).map_err(|_| ReasoningError::NoAdmissibleFunctor)?
        } else {
            (*x).clone()
        };
        copy_of.insert((*x).clone(), id);
    }

    let e_rank: BTreeMap<ObjectId, usize> =
        e.canonical_action_order().into_iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut action_pre: BTreeMap<&ObjectId, Vec<&ObjectId>> = BTreeMap::new();
    for (a, x) in &f.action_map {
        action_pre.entry(x).or_default().push(a);
    }
    for v in action_pre.values_mut() {
        v.sort_by_key(|a| e_rank.get(*a).copied().unwrap_or(usize::MAX));
    }
    let mut participant_pre: BTreeMap<&ObjectId, Vec<&ObjectId>> = BTreeMap::new();
    for (p, c) in &f.participant_map {
        participant_pre.entry(c).or_default().push(p);
    }

    // Target of an arrow from a copy; `last` picks the causally latest
    // preimage, as suits a pastward arrow.
    let resolve = |t: &ObjectId, last: bool| -> ObjectId {
        if t.is_sentinel() {
            return t.clone();
        }
        if let Some(c) = copy_of.get(t) {
            return c.clone();
        }
        if let Some(a) = earlier.get(t) {
            return a.clone();
        }
        match action_pre.get(t) {
            Some(pre) if last => (*pre.last().expect("non-empty")).clone(),
            Some(pre) => (*pre.first().expect("non-empty")).clone(),
            None => ObjectId::unknown(),
        }
    };

    let s_edges = s.causal_edges();
    let timestamped = |x: &ObjectId| {
        action_pre
            .get(x)
            .is_some_and(|pre| pre.iter().all(|a| e.actions[*a].raw.t_start.is_some()))
    };
    let mut tense: BTreeMap<ObjectId, Tense> = BTreeMap::new();
    for x in &unhit {
        let effects_recorded = s_edges.iter().any(|(c, z)| c == *x && hit.contains(z) && timestamped(z));
        let causes: Vec<&ObjectId> = s_edges.iter().filter(|(_, z)| z == *x).map(|(c, _)| c).collect();
        let t = if effects_recorded {
            Tense::PastHidden
        } else if !causes.is_empty()
            && causes.iter().all(|c| {
                timestamped(c)
                    || earlier.contains_key(*c)
                    || tense.get(*c).is_some_and(|t| *t != Tense::Undetermined)
            })
        {
            Tense::Future
        } else {
            Tense::Undetermined
        };
        tense.insert((*x).clone(), t);
    }

    let mut log = e.clone();
    let mut added = Vec::new();
    for x in &unhit {
        let src = &s.actions[*x];
        let who = match src.who.as_ref() {
            None => ObjectId::nobody(),
            Some(c) if c.is_sentinel() => c.clone(),
            Some(c) => match participant_pre.get(c).map(Vec::as_slice) {
                None | Some([]) => ObjectId::nobody(),
                Some([p]) => (*p).clone(),
                Some(many) => {
                    return Err(ReasoningError::AmbiguousInverseImage {
                        participant: c.clone(),
                        preimages: many.iter().map(|p| (*p).clone()).collect(),
                    })
                }
            },
        };
        let id = copy_of[*x].clone();
        let t = tense[*x];
        let mut raw = RawData::default();
        raw.attrs.insert(INFERRED_ATTR.to_string(), provenance_tag(s, x));
        raw.attrs.insert(TENSE_ATTR.to_string(), t.as_str().to_string());
        let mut a = Action::new(id.clone(), who);
        a.label = src.label.clone();
        a.volition = src.volition;
        a.raw = raw;
        a.cause_s = Some(src.cause_s.as_ref().map_or(ObjectId::unknown(), |c| resolve(c, true)));
        a.cause_n = Some(src.cause_n.as_ref().map_or(ObjectId::unknown(), |c| resolve(c, false)));
        a.trivial_partner = src.trivial_partner.as_ref().and_then(|p| copy_of.get(p).cloned());
        log.put_action(a);
        added.push(AddedAction { id, source: (*x).clone(), tense: t });
    }

    let mut rewired = Vec::new();
    for (a, x) in &f.action_map {
        let src = &s.actions[x];
        let targets = [("cause_s", &src.cause_s), ("cause_n", &src.cause_n)];
        for (arrow, t) in targets {
            let Some(copy) = t.as_ref().and_then(|t| copy_of.get(t)) else { continue };
            let act = log.actions.get_mut(a).expect("mapped action");
            let slot = if arrow == "cause_s" { &mut act.cause_s } else { &mut act.cause_n };
            if slot.as_ref().is_none_or(|c| *c == ObjectId::unknown()) {
                *slot = Some(copy.clone());
                rewired.push((a.clone(), arrow, copy.clone()));
            }
        }
    }

    let log = check_built(log)?;
    Ok(InferenceResult { log, functor: f, added, rewired })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::belog::{BeRelation, BeVerbType};
    use crate::id::oid;
    use crate::log::{build_elog, build_slog, Participant};

    pub(crate) fn explosion() -> (Log, Log, BeLog) {
        let e = build_elog(
            oid("explosion"),
            vec![
                Action::new(oid("walks_near"), oid("bond")).at(0),
                Action::new(oid("ignite"), oid("explosive")).cause_n(oid("explodes")).at(0),
                Action::new(oid("explodes"), oid("explosive")).cause_s(oid("ignite")).at(1),
                Action::new(oid("looks_at"), oid("tower")).trivial(oid("is_looked_at")).cause_n(oid("is_looked_at")).at(2),
                Action::new(oid("is_looked_at"), oid("bond")).trivial(oid("looks_at")).cause_s(oid("looks_at")).at(2),
            ],
            ["explosive", "bond", "tower"].iter().map(|p| Participant::plain(oid(p))).collect(),
        )
        .unwrap();
        let s = build_slog(
            oid("blast"),
            vec![
                Action::new(oid("explode"), oid("Explosive")).cause_n(oid("destroy")).at(0),
                Action::new(oid("near"), oid("Thing")).cause_n(oid("is_destroyed")).at(0),
                Action::new(oid("destroy"), oid("Explosive"))
                    .cause_s(oid("explode"))
                    .cause_n(oid("is_destroyed"))
                    .trivial(oid("is_destroyed"))
                    .at(1),
                Action::new(oid("is_destroyed"), oid("Thing")).cause_s(oid("destroy")).trivial(oid("destroy")).at(1),
            ],
            vec![Participant::class(oid("Explosive")), Participant::class(oid("Thing"))],
        )
        .unwrap();
        let b = BeLog::from_relations([
            BeRelation::new(BeVerbType::Similar, oid("explodes"), oid("explode")),
            BeRelation::new(BeVerbType::Similar, oid("ignite"), oid("explode")).weighted(0.6),
            BeRelation::new(BeVerbType::Similar, oid("walks_near"), oid("near")).weighted(0.9),
            BeRelation::new(BeVerbType::Be3, oid("explosive"), oid("Explosive")),
            BeRelation::new(BeVerbType::Be3, oid("bond"), oid("Thing")),
        ])
        .unwrap();
        (e, s, b)
    }

    fn cfg() -> SearchConfig {
        SearchConfig { min_compatibility: 0.5, ..SearchConfig::exhaustive() }
    }

    #[test]
    fn adds_the_destruction_pair() {
        let (e, s, b) = explosion();
        let r = infer_missing(&e, &s, &b, &cfg()).unwrap();
        let ids: Vec<&str> = r.added.iter().map(|a| a.id.as_str()).collect();
        assert_eq!(ids, ["destroy", "is_destroyed"]);
        assert!(r.added.iter().all(|a| a.tense == Tense::Future));
        let d = &r.log.actions[&oid("destroy")];
        assert_eq!(d.who, Some(oid("explosive")));
        assert_eq!(d.cause_s, Some(oid("explodes")));
        assert_eq!(d.cause_n, Some(oid("is_destroyed")));
        let v = &r.log.actions[&oid("is_destroyed")];
        assert_eq!(v.who, Some(oid("bond")));
        assert_eq!(r.log.mutual_partner(&oid("destroy")), Some(&oid("is_destroyed")));
        assert_eq!(r.log.actions[&oid("explodes")].cause_n, Some(oid("destroy")));
        assert_eq!(r.log.actions[&oid("walks_near")].cause_n, Some(oid("is_destroyed")));
        assert_eq!(r.log.content_action_ids().len(), e.content_action_ids().len() + 2);
    }

    #[test]
    fn second_run_adds_nothing() {
        let (e, s, b) = explosion();
        let once = infer_missing(&e, &s, &b, &cfg()).unwrap().log;
        let twice = infer_missing(&once, &s, &b, &cfg()).unwrap();
        assert!(twice.added.is_empty());
        assert_eq!(twice.log, once);
    }

    #[test]
    fn ambiguous_performer_is_an_error() {
        let (e, s, mut b) = explosion();
        b.insert(BeRelation::new(BeVerbType::Be3, oid("tower"), oid("Thing"))).unwrap();
        b.insert(BeRelation::new(BeVerbType::Similar, oid("looks_at"), oid("near"))).unwrap();
        let err = infer_missing(&e, &s, &b, &cfg()).unwrap_err();
        assert!(matches!(err, ReasoningError::AmbiguousInverseImage { participant, .. } if participant == oid("Thing")));
    }

    #[test]
    fn no_functor_is_an_error() {
        let (e, s, _) = explosion();
        let err = infer_missing(&e, &s, &BeLog::new(), &cfg()).unwrap_err();
        assert_eq!(err, ReasoningError::NoAdmissibleFunctor);
    }
}
