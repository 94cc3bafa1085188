//! Editors that produce new, revalidated log versions.

use std::collections::BTreeSet;

use crate::id::ObjectId;
use crate::log::{check_built, Action, Log, ModelError, RawData};

/// Input of [`decompose_transitive`]. Ids of the two produced actions are
/// supplied by the caller.
#[derive(Debug, Clone)]
pub struct TransitiveClause {
    pub subject: ObjectId,
    pub verb: String,
    pub object: ObjectId,
    pub do_id: ObjectId,
    pub be_done_id: ObjectId,
    pub time: RawData,
    /// Time of the `be done` half when it differs from the `do` half.
    pub be_done_time: Option<RawData>,
}

/// Splits a transitive action into a `do` action performed by the subject and
/// a `be done` action undergone by the object, linked as a trivial pair.
///
/// A time lag between the halves makes the relation non-trivial; the caller
/// must then link the two actions explicitly instead.
pub fn decompose_transitive(log: &Log, clause: &TransitiveClause) -> Result<(Action, Action), ModelError> {
    for p in [&clause.subject, &clause.object] {
        if !log.participants.contains_key(p) && !log.actions.contains_key(p) {
            return Err(ModelError::UnknownParticipant(p.clone()));
        }
    }
    let be_done_time = clause.be_done_time.clone().unwrap_or_else(|| clause.time.clone());
    if be_done_time.t_start != clause.time.t_start {
        return Err(ModelError::TrivialTimeMismatch(clause.do_id.clone(), clause.be_done_id.clone()));
    }
    let mut act = Action::new(clause.do_id.clone(), clause.subject.clone())
        .cause_s(ObjectId::unknown())
        .cause_n(clause.be_done_id.clone())
        .trivial(clause.be_done_id.clone())
        .with_label(clause.verb.clone());
    act.raw = clause.time.clone();
    let mut done = Action::new(clause.be_done_id.clone(), clause.object.clone())
        .cause_s(clause.do_id.clone())
        .cause_n(ObjectId::unknown())
        .trivial(clause.do_id.clone())
        .with_label(format!("be {}", clause.verb));
    done.raw = be_done_time;
    Ok((act, done))
}

/// Adds both halves of a decomposition to `log`, returning the new version.
pub fn add_transitive(log: &Log, clause: &TransitiveClause) -> Result<Log, ModelError> {
    let (act, done) = decompose_transitive(log, clause)?;
    for id in [&act.id, &done.id] {
        if log.actions.contains_key(id) || log.participants.contains_key(id) {
            return Err(ModelError::DuplicateId(id.clone()));
        }
    }
    let mut next = log.clone();
    next.put_action(act);
    next.put_action(done);
    check_built(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Branch the sufficient-condition (pastward) arrow.
    S,
    /// Branch the necessary-condition (futureward) arrow.
    N,
}

/// Inserts a replica `replica_id` of `action` so that a second arrow of the
/// given kind can leave the same event.
///
/// The replica shares performer and raw-data with the original and is tied
/// to it by an arrow of the opposite kind (a cause-N replica is caused by
/// the original; a cause-S replica is a necessary condition of it). The
/// replica's own arrow of the requested kind points to `branch`, or to
/// `unknown` until the caller wires it.
pub fn add_intermediate_replica(
    log: &Log,
    action: &ObjectId,
    direction: Direction,
    replica_id: ObjectId,
    branch: Option<ObjectId>,
) -> Result<Log, ModelError> {
    if action.is_sentinel() {
        return Err(ModelError::SentinelNotBranchable(action.clone()));
    }
    let original = log.actions.get(action).ok_or_else(|| ModelError::UnknownObject(action.clone()))?;
    if log.actions.contains_key(&replica_id) || log.participants.contains_key(&replica_id) {
        return Err(ModelError::DuplicateId(replica_id));
    }
    let branch = branch.unwrap_or_else(ObjectId::unknown);
    let mut replica = Action {
        id: replica_id,
        label: original.label.clone(),
        who: original.who.clone(),
        cause_s: None,
        cause_n: None,
        trivial_partner: None,
        volition: original.volition,
        raw: original.raw.clone(),
    };
    match direction {
        Direction::N => {
            replica.cause_s = Some(action.clone());
            replica.cause_n = Some(branch);
        }
        Direction::S => {
            replica.cause_n = Some(action.clone());
            replica.cause_s = Some(branch);
        }
    }
    let mut next = log.clone();
    next.put_action(replica);
    check_built(next)
}

/// Full subcategory of `log` on `objects` plus the sentinels. Arrows leaving
/// the selection are rerouted to `unknown` (causes) or `nobody` (performer).
pub fn extract_subepisode(log: &Log, objects: &BTreeSet<ObjectId>) -> Result<Log, ModelError> {
    for o in objects {
        if !log.actions.contains_key(o) && !log.participants.contains_key(o) {
            return Err(ModelError::UnknownObject(o.clone()));
        }
    }
    let keep = |id: &ObjectId| id.is_sentinel() || objects.contains(id);
    let mut sub = Log::empty(log.kind, log.id.clone());
    sub.provenance = Some(log.id.clone());
    for p in log.participants.values() {
        if !p.id.is_sentinel() && keep(&p.id) {
            sub.participants.insert(p.id.clone(), p.clone());
        }
    }
    for a in log.content_actions() {
        if !keep(&a.id) {
            continue;
        }
        let mut a = a.clone();
        let reroute = |t: &mut Option<ObjectId>, fallback: ObjectId| {
            if let Some(x) = t {
                if !keep(x) {
                    *t = Some(fallback);
                }
            }
        };
        reroute(&mut a.who, ObjectId::nobody());
        reroute(&mut a.cause_s, ObjectId::unknown());
        reroute(&mut a.cause_n, ObjectId::unknown());
        if a.trivial_partner.as_ref().is_some_and(|p| !keep(p)) {
            a.trivial_partner = None;
        }
        sub.put_action(a);
    }
    Ok(sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::oid;
    use crate::log::{build_elog, Participant};

    fn people() -> Log {
        build_elog(
            oid("e"),
            vec![],
            ["Bob", "Alice", "A", "archer", "target"].iter().map(|p| Participant::plain(oid(p))).collect(),
        )
        .unwrap()
    }

    fn clause(s: &str, v: &str, o: &str, d: &str, b: &str) -> TransitiveClause {
        TransitiveClause {
            subject: oid(s),
            verb: v.into(),
            object: oid(o),
            do_id: oid(d),
            be_done_id: oid(b),
            time: RawData::default(),
            be_done_time: None,
        }
    }

    #[test]
    fn bob_loves_alice() {
        let log = people();
        let (act, done) = decompose_transitive(&log, &clause("Bob", "loves", "Alice", "loves1", "is_loved1")).unwrap();
        assert_eq!(done.cause_s, Some(oid("loves1")));
        assert_eq!(act.cause_n, Some(oid("is_loved1")));
        assert_eq!(act.who, Some(oid("Bob")));
        assert_eq!(done.who, Some(oid("Alice")));
        let next = add_transitive(&log, &clause("Bob", "loves", "Alice", "loves1", "is_loved1")).unwrap();
        assert!(next.is_trivial_arrow(&oid("loves1"), &oid("is_loved1")));
    }

    #[test]
    fn self_action_is_still_paired() {
        let next = add_transitive(&people(), &clause("A", "pushes", "A", "push", "is_pushed")).unwrap();
        assert_eq!(next.actions[&oid("push")].who, next.actions[&oid("is_pushed")].who);
        assert_eq!(next.mutual_partner(&oid("push")), Some(&oid("is_pushed")));
    }

    #[test]
    fn time_lag_is_not_trivial() {
        let mut c = clause("archer", "shoots", "target", "shoots", "is_hit");
        c.time = RawData::at(1);
        c.be_done_time = Some(RawData::at(4));
        assert_eq!(
            decompose_transitive(&people(), &c).unwrap_err(),
            ModelError::TrivialTimeMismatch(oid("shoots"), oid("is_hit"))
        );
    }

    #[test]
    fn unknown_participant() {
        let err = decompose_transitive(&people(), &clause("Zed", "loves", "Alice", "x", "y")).unwrap_err();
        assert_eq!(err, ModelError::UnknownParticipant(oid("Zed")));
    }

    fn fan_log() -> Log {
        build_elog(
            oid("e"),
            vec![
                Action::new(oid("A"), oid("P")).cause_n(oid("B")),
                Action::new(oid("B"), oid("P")),
                Action::new(oid("C"), oid("P")),
            ],
            vec![Participant::plain(oid("P"))],
        )
        .unwrap()
    }

    #[test]
    fn replica_carries_second_branch() {
        let log = add_intermediate_replica(&fan_log(), &oid("A"), Direction::N, oid("A2"), Some(oid("C"))).unwrap();
        let a2 = &log.actions[&oid("A2")];
        assert_eq!(a2.cause_s, Some(oid("A")));
        assert_eq!(a2.cause_n, Some(oid("C")));
        assert_eq!(log.actions[&oid("A")].cause_n, Some(oid("B")));
        let desc = log.causal_descendants();
        assert!(desc[&oid("A")].contains(&oid("B")) && desc[&oid("A")].contains(&oid("C")));
        assert!(log.validate().is_valid());
    }

    #[test]
    fn replica_of_replica() {
        let log = add_intermediate_replica(&fan_log(), &oid("A"), Direction::N, oid("A2"), None).unwrap();
        let log = add_intermediate_replica(&log, &oid("A2"), Direction::N, oid("A3"), Some(oid("C"))).unwrap();
        assert_eq!(log.actions[&oid("A3")].cause_s, Some(oid("A2")));
        assert!(log.validate().is_valid());
    }

    #[test]
    fn sentinels_cannot_branch() {
        let err = add_intermediate_replica(&fan_log(), &oid("nothing"), Direction::S, oid("x"), None).unwrap_err();
        assert_eq!(err, ModelError::SentinelNotBranchable(oid("nothing")));
    }

    #[test]
    fn extraction_reroutes_to_sentinels() {
        let log = fan_log();
        let sub = extract_subepisode(&log, &[oid("B")].into_iter().collect()).unwrap();
        assert_eq!(sub.actions[&oid("B")].who, Some(oid("nobody")));
        assert_eq!(sub.actions[&oid("B")].cause_s, Some(oid("unknown")));
        assert!(sub.validate().is_valid());

        let all: BTreeSet<ObjectId> = log.actions.keys().chain(log.participants.keys()).cloned().collect();
        let mut whole = extract_subepisode(&log, &all).unwrap();
        whole.provenance = None;
        assert_eq!(whole, log);

        let none = extract_subepisode(&log, &BTreeSet::new()).unwrap();
        assert_eq!(none.actions.len(), 2);
        assert_eq!(none.participants.len(), 1);

        assert!(matches!(
            extract_subepisode(&log, &[oid("zz")].into_iter().collect()),
            Err(ModelError::UnknownObject(_))
        ));
    }
}
