//! E-logs and s-logs: episodes and scenarios recorded as finite categories.
//!
//! A [`Log`] holds a set of actions and a set of participants. Every action
//! emanates exactly one `who` arrow (to its performer), one `cause-S` arrow
//! (pastward, to its sufficient cause) and one `cause-N` arrow (futureward, to
//! the action it is a necessary condition of). The reserved objects
//! `nothing`, `unknown` and `nobody` keep these maps total. Identity
//! morphisms are implied and never stored.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use thiserror::Error;

use crate::id::ObjectId;
use crate::validate::{validate_category, ValidationReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LogKind {
    /// A concrete episode (e-log).
    Episode,
    /// A reference scenario (s-log): class participants, relative time.
    Scenario,
}

impl LogKind {
    pub fn default_participant_kind(self) -> ParticipantKind {
        match self {
            LogKind::Episode => ParticipantKind::Plain,
            LogKind::Scenario => ParticipantKind::Class,
        }
    }
}

impl fmt::Display for LogKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogKind::Episode => f.write_str("elog"),
            LogKind::Scenario => f.write_str("slog"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParticipantKind {
    Plain,
    /// A nominalized action used as a participant.
    ActionNoun,
    Class,
    Sentinel,
}

impl ParticipantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParticipantKind::Plain => "plain",
            ParticipantKind::ActionNoun => "action",
            ParticipantKind::Class => "class",
            ParticipantKind::Sentinel => "sentinel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "plain" => ParticipantKind::Plain,
            "action" => ParticipantKind::ActionNoun,
            "class" => ParticipantKind::Class,
            "sentinel" => ParticipantKind::Sentinel,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Participant {
    pub id: ObjectId,
    pub label: Option<String>,
    pub kind: ParticipantKind,
}

impl Participant {
    pub fn new(id: ObjectId, kind: ParticipantKind) -> Self {
        Participant { id, label: None, kind }
    }

    pub fn plain(id: ObjectId) -> Self {
        Participant::new(id, ParticipantKind::Plain)
    }

    pub fn class(id: ObjectId) -> Self {
        Participant::new(id, ParticipantKind::Class)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    fn nobody() -> Self {
        Participant::new(ObjectId::nobody(), ParticipantKind::Sentinel)
    }
}

/// Raw-data attached to an action: timestamps in opaque integer ticks and
/// free-form attributes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawData {
    pub t_start: Option<i64>,
    pub t_end: Option<i64>,
    pub attrs: BTreeMap<String, String>,
}

impl RawData {
    pub fn at(t: i64) -> Self {
        RawData { t_start: Some(t), ..RawData::default() }
    }

    pub fn span(t_start: i64, t_end: i64) -> Self {
        RawData { t_start: Some(t_start), t_end: Some(t_end), ..RawData::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub id: ObjectId,
    pub label: Option<String>,
    pub who: Option<ObjectId>,
    pub cause_s: Option<ObjectId>,
    pub cause_n: Option<ObjectId>,
    pub trivial_partner: Option<ObjectId>,
    pub volition: bool,
    pub raw: RawData,
}

impl Action {
    /// An action performed by `who` whose causes are not yet recorded.
    pub fn new(id: ObjectId, who: ObjectId) -> Self {
        Action {
            id,
            label: None,
            who: Some(who),
            cause_s: None,
            cause_n: None,
            trivial_partner: None,
            volition: false,
            raw: RawData::default(),
        }
    }

    pub fn cause_s(mut self, c: ObjectId) -> Self {
        self.cause_s = Some(c);
        self
    }

    pub fn cause_n(mut self, c: ObjectId) -> Self {
        self.cause_n = Some(c);
        self
    }

    pub fn trivial(mut self, partner: ObjectId) -> Self {
        self.trivial_partner = Some(partner);
        self
    }

    pub fn at(mut self, t: i64) -> Self {
        self.raw.t_start = Some(t);
        self
    }

    pub fn span(mut self, t_start: i64, t_end: i64) -> Self {
        self.raw.t_start = Some(t_start);
        self.raw.t_end = Some(t_end);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn t_start(&self) -> Option<i64> {
        self.raw.t_start
    }

    fn sentinel(id: ObjectId) -> Self {
        Action {
            who: Some(ObjectId::nobody()),
            cause_s: Some(id.clone()),
            cause_n: Some(id.clone()),
            ..Action::new(id, ObjectId::nobody())
        }
    }

    fn is_sentinel_shaped(&self) -> bool {
        self.who.as_ref().is_some_and(|w| *w == ObjectId::nobody())
            && self.cause_s.as_ref().is_none_or(|c| c.is_sentinel_action())
            && self.cause_n.as_ref().is_none_or(|c| c.is_sentinel_action())
            && self.trivial_partner.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate object id `{0}`")]
    DuplicateId(ObjectId),
    #[error("`{from}` has a {arrow} arrow to missing object `{target}`")]
    DanglingReference { from: ObjectId, arrow: &'static str, target: ObjectId },
    #[error("causal cycle among {0:?}")]
    CausalCycle(Vec<ObjectId>),
    #[error("invalid log: {0}")]
    Invalid(ValidationReport),
    #[error("unknown participant `{0}`")]
    UnknownParticipant(ObjectId),
    #[error("unknown object `{0}`")]
    UnknownObject(ObjectId),
    #[error("sentinel `{0}` cannot be branched")]
    SentinelNotBranchable(ObjectId),
    #[error("trivial pair `{0}`/`{1}` needs equal start times")]
    TrivialTimeMismatch(ObjectId, ObjectId),
    #[error("sentinel `{0}` may not be redefined")]
    SentinelRedefined(ObjectId),
}

/// An e-log or s-log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Log {
    pub id: ObjectId,
    pub kind: LogKind,
    pub actions: BTreeMap<ObjectId, Action>,
    pub participants: BTreeMap<ObjectId, Participant>,
    /// Parent log this one was extracted from, if any.
    pub provenance: Option<ObjectId>,
}

impl Log {
    /// A log holding only the sentinels.
    pub fn empty(kind: LogKind, id: ObjectId) -> Self {
        let mut actions = BTreeMap::new();
        for s in [ObjectId::nothing(), ObjectId::unknown()] {
            actions.insert(s.clone(), Action::sentinel(s));
        }
        let mut participants = BTreeMap::new();
        participants.insert(ObjectId::nobody(), Participant::nobody());
        Log { id, kind, actions, participants, provenance: None }
    }

    pub fn is_action(&self, id: &ObjectId) -> bool {
        self.actions.contains_key(id)
    }

    pub fn action(&self, id: &ObjectId) -> Option<&Action> {
        self.actions.get(id)
    }

    /// Non-sentinel actions, in id order.
    pub fn content_actions(&self) -> impl Iterator<Item = &Action> {
        self.actions.values().filter(|a| !a.id.is_sentinel())
    }

    pub fn content_action_ids(&self) -> Vec<ObjectId> {
        self.content_actions().map(|a| a.id.clone()).collect()
    }

    /// Every object that can sit at the head of a `who` arrow: the declared
    /// participants plus actions referenced nominally. Non-sentinels in id
    /// order, then `nobody`.
    pub fn participant_universe(&self) -> Vec<ObjectId> {
        let mut set: BTreeSet<ObjectId> = self.participants.keys().cloned().collect();
        for a in self.actions.values() {
            if let Some(w) = &a.who {
                if self.actions.contains_key(w) {
                    set.insert(w.clone());
                }
            }
        }
        let mut out: Vec<ObjectId> = set.iter().filter(|p| !p.is_sentinel()).cloned().collect();
        if set.contains(&ObjectId::nobody()) {
            out.push(ObjectId::nobody());
        }
        out
    }

    pub fn content_participants(&self) -> Vec<ObjectId> {
        self.participant_universe().into_iter().filter(|p| !p.is_sentinel()).collect()
    }

    /// Trivial partner of `a`, only when the partnership is mutual.
    pub fn mutual_partner(&self, a: &ObjectId) -> Option<&ObjectId> {
        let p = self.actions.get(a)?.trivial_partner.as_ref()?;
        let back = self.actions.get(p)?.trivial_partner.as_ref()?;
        (back == a).then_some(p)
    }

    /// Whether the arrow `from -> to` belongs to a trivial causal relationship.
    pub fn is_trivial_arrow(&self, from: &ObjectId, to: &ObjectId) -> bool {
        self.mutual_partner(from) == Some(to)
    }

    /// Direct causal precedence `(cause, effect)` between non-sentinel actions,
    /// read off both kinds of cause arrow. Self arrows are dropped.
    pub fn causal_edges(&self) -> BTreeSet<(ObjectId, ObjectId)> {
        let mut edges = BTreeSet::new();
        for a in self.content_actions() {
            if let Some(c) = &a.cause_s {
                if *c != a.id && !c.is_sentinel() && self.is_action(c) {
                    edges.insert((c.clone(), a.id.clone()));
                }
            }
            if let Some(e) = &a.cause_n {
                if *e != a.id && !e.is_sentinel() && self.is_action(e) {
                    edges.insert((a.id.clone(), e.clone()));
                }
            }
        }
        edges
    }

    /// For each non-sentinel action, the set of actions it (transitively)
    /// precedes. Computed by depth-first search over [`Log::causal_edges`].
    pub fn causal_descendants(&self) -> BTreeMap<ObjectId, BTreeSet<ObjectId>> {
        let mut succ: BTreeMap<ObjectId, Vec<ObjectId>> = BTreeMap::new();
        for (c, e) in self.causal_edges() {
            succ.entry(c).or_default().push(e);
        }
        let mut out = BTreeMap::new();
        for a in self.content_action_ids() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<ObjectId> = succ.get(&a).cloned().unwrap_or_default();
            while let Some(x) = stack.pop() {
                if seen.insert(x.clone()) {
                    if let Some(next) = succ.get(&x) {
                        stack.extend(next.iter().cloned());
                    }
                }
            }
            out.insert(a, seen);
        }
        out
    }

    /// Canonical action order: causes before effects (trivial pairs kept
    /// adjacent, `do` before `be done`), ties broken by start time then id;
    /// sentinel actions last.
    pub fn canonical_action_order(&self) -> Vec<ObjectId> {
        let content = self.content_action_ids();
        let group_of = |a: &ObjectId| -> ObjectId {
            match self.mutual_partner(a) {
                Some(p) if p < a => p.clone(),
                _ => a.clone(),
            }
        };
        let mut members: BTreeMap<ObjectId, Vec<ObjectId>> = BTreeMap::new();
        for a in &content {
            members.entry(group_of(a)).or_default().push(a.clone());
        }
        let key = |g: &ObjectId| {
            let t = members[g].iter().filter_map(|m| self.actions[m].t_start()).min();
            (t.is_none(), t.unwrap_or(0), g.clone())
        };
        let mut succ: BTreeMap<ObjectId, BTreeSet<ObjectId>> = BTreeMap::new();
        let mut indeg: BTreeMap<ObjectId, usize> = members.keys().map(|g| (g.clone(), 0)).collect();
        for (c, e) in self.causal_edges() {
            let (gc, ge) = (group_of(&c), group_of(&e));
            if gc != ge && succ.entry(gc).or_default().insert(ge.clone()) {
                *indeg.get_mut(&ge).expect("group") += 1;
            }
        }
        let mut heap: BinaryHeap<Reverse<(bool, i64, ObjectId)>> = indeg
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(g, _)| Reverse(key(g)))
            .collect();
        let mut groups = Vec::new();
        let mut done = BTreeSet::new();
        while let Some(Reverse((_, _, g))) = heap.pop() {
            done.insert(g.clone());
            if let Some(next) = succ.get(&g) {
                for n in next {
                    let d = indeg.get_mut(n).expect("group");
                    *d -= 1;
                    if *d == 0 {
                        heap.push(Reverse(key(n)));
                    }
                }
            }
            groups.push(g);
        }
        // Groups left over sit on a cycle; keep them in key order.
        let mut rest: Vec<_> = members.keys().filter(|g| !done.contains(*g)).cloned().collect();
        rest.sort_by_key(|g| key(g));
        groups.extend(rest);

        let mut order = Vec::with_capacity(self.actions.len());
        for g in groups {
            let mut m = members[&g].clone();
            if m.len() == 2 {
                let (x, y) = (&m[0], &m[1]);
                let y_is_do = self.actions[y].cause_n.as_ref() == Some(x)
                    || self.actions[x].cause_s.as_ref() == Some(y);
                if y_is_do {
                    m.swap(0, 1);
                }
            }
            order.extend(m);
        }
        for s in [ObjectId::nothing(), ObjectId::unknown()] {
            if self.actions.contains_key(&s) {
                order.push(s);
            }
        }
        order
    }

    /// Replaces or adds an action. No validation is performed.
    pub fn put_action(&mut self, action: Action) {
        self.actions.insert(action.id.clone(), action);
    }

    /// Removes a non-sentinel object; arrows into it are rerouted to the
    /// matching sentinel. Used, for instance, to drop a volition action.
    pub fn remove_object(&mut self, id: &ObjectId) -> Result<(), ModelError> {
        if id.is_sentinel() {
            return Err(ModelError::SentinelRedefined(id.clone()));
        }
        let removed_action = self.actions.remove(id).is_some();
        let removed_participant = self.participants.remove(id).is_some();
        if !removed_action && !removed_participant {
            return Err(ModelError::UnknownObject(id.clone()));
        }
        for a in self.actions.values_mut() {
            if a.who.as_ref() == Some(id) {
                a.who = Some(ObjectId::nobody());
            }
            if a.cause_s.as_ref() == Some(id) {
                a.cause_s = Some(ObjectId::unknown());
            }
            if a.cause_n.as_ref() == Some(id) {
                a.cause_n = Some(ObjectId::unknown());
            }
            if a.trivial_partner.as_ref() == Some(id) {
                a.trivial_partner = None;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_category(self)
    }
}

/// Builds a validated log from action records and participants.
///
/// Sentinels are inserted automatically, missing causes default to
/// `unknown` and a missing performer to `nobody`. Records that restate a
/// sentinel in its standard shape (as in imported relational tables) are
/// accepted and ignored.
pub fn build_log(
    kind: LogKind,
    id: ObjectId,
    records: Vec<Action>,
    participants: Vec<Participant>,
) -> Result<Log, ModelError> {
    let mut log = Log::empty(kind, id);
    for p in participants {
        if p.id.is_sentinel() {
            if p.id == ObjectId::nobody() {
                continue;
            }
            return Err(ModelError::SentinelRedefined(p.id));
        }
        if log.participants.contains_key(&p.id) {
            return Err(ModelError::DuplicateId(p.id));
        }
        log.participants.insert(p.id.clone(), p);
    }
    for mut a in records {
        if a.id.is_sentinel() {
            if a.id.is_sentinel_action() && a.is_sentinel_shaped() {
                continue;
            }
            return Err(ModelError::SentinelRedefined(a.id));
        }
        if log.actions.contains_key(&a.id) || log.participants.contains_key(&a.id) {
            return Err(ModelError::DuplicateId(a.id));
        }
        a.who.get_or_insert_with(ObjectId::nobody);
        a.cause_s.get_or_insert_with(ObjectId::unknown);
        a.cause_n.get_or_insert_with(ObjectId::unknown);
        log.actions.insert(a.id.clone(), a);
    }
    check_built(log)
}

pub fn build_elog(id: ObjectId, records: Vec<Action>, participants: Vec<Participant>) -> Result<Log, ModelError> {
    build_log(LogKind::Episode, id, records, participants)
}

pub fn build_slog(id: ObjectId, records: Vec<Action>, participants: Vec<Participant>) -> Result<Log, ModelError> {
    build_log(LogKind::Scenario, id, records, participants)
}

/// Turns the first blocking violation of `log` into an error.
pub(crate) fn check_built(log: Log) -> Result<Log, ModelError> {
    let report = log.validate();
    if report.is_valid() {
        return Ok(log);
    }
    for v in &report.violations {
        match v {
            Violation::IdClash(id) => return Err(ModelError::DuplicateId(id.clone())),
            Violation::Dangling { from, arrow, target } => {
                return Err(ModelError::DanglingReference {
                    from: from.clone(),
                    arrow,
                    target: target.clone(),
                })
            }
            _ => {}
        }
    }
    if let Some(Violation::Cycle(ids)) = report.violations.iter().find(|v| matches!(v, Violation::Cycle(_))) {
        return Err(ModelError::CausalCycle(ids.clone()));
    }
    Err(ModelError::Invalid(report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::oid;

    pub(crate) fn bob_alice() -> Log {
        build_elog(
            oid("bob-alice"),
            vec![
                Action::new(oid("unknown"), oid("nobody")).cause_s(oid("unknown")).cause_n(oid("unknown")),
                Action::new(oid("loves"), oid("Bob"))
                    .cause_s(oid("unknown"))
                    .cause_n(oid("is_loved"))
                    .trivial(oid("is_loved")),
                Action::new(oid("is_loved"), oid("Alice"))
                    .cause_s(oid("loves"))
                    .cause_n(oid("is_loved"))
                    .trivial(oid("loves")),
            ],
            vec![Participant::plain(oid("Bob")), Participant::plain(oid("Alice"))],
        )
        .expect("table 1 builds")
    }

    #[test]
    fn table_one_builds() {
        let log = bob_alice();
        assert_eq!(log.content_actions().count(), 2);
        assert_eq!(log.actions.len(), 4);
        assert_eq!(log.participant_universe(), vec![oid("Alice"), oid("Bob"), oid("nobody")]);
        assert_eq!(log.canonical_action_order(), vec![oid("loves"), oid("is_loved"), oid("nothing"), oid("unknown")]);
    }

    #[test]
    fn empty_records_give_sentinels_only() {
        let log = build_elog(oid("e"), vec![], vec![]).unwrap();
        assert_eq!(log.actions.len(), 2);
        assert_eq!(log.participants.len(), 1);
        assert!(log.validate().is_valid());
    }

    #[test]
    fn two_cycle_is_rejected() {
        // Oracle: DFS over {a -> b, b -> a} finds a back edge.
        let err = build_elog(
            oid("e"),
            vec![
                Action::new(oid("a"), oid("P")).cause_s(oid("b")),
                Action::new(oid("b"), oid("P")).cause_s(oid("a")),
            ],
            vec![Participant::plain(oid("P"))],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::CausalCycle(_)), "{err:?}");
    }

    #[test]
    fn duplicate_and_dangling() {
        let dup = build_elog(
            oid("e"),
            vec![Action::new(oid("P"), oid("P"))],
            vec![Participant::plain(oid("P"))],
        );
        assert_eq!(dup.unwrap_err(), ModelError::DuplicateId(oid("P")));
        let dangling = build_elog(oid("e"), vec![Action::new(oid("a"), oid("ghost"))], vec![]);
        assert!(matches!(dangling.unwrap_err(), ModelError::DanglingReference { arrow: "who", .. }));
    }

    #[test]
    fn missing_causes_default_to_unknown() {
        let log = build_elog(oid("e"), vec![Action::new(oid("a"), oid("P"))], vec![Participant::plain(oid("P"))]).unwrap();
        let a = &log.actions[&oid("a")];
        assert_eq!(a.cause_s, Some(oid("unknown")));
        assert_eq!(a.cause_n, Some(oid("unknown")));
    }

    #[test]
    fn canonical_order_is_topological() {
        let log = build_elog(
            oid("e"),
            vec![
                Action::new(oid("c"), oid("P")).cause_s(oid("b")),
                Action::new(oid("b"), oid("P")).cause_s(oid("a")),
                Action::new(oid("a"), oid("P")),
            ],
            vec![Participant::plain(oid("P"))],
        )
        .unwrap();
        let order = log.canonical_action_order();
        assert_eq!(&order[..3], &[oid("a"), oid("b"), oid("c")]);
    }

    #[test]
    fn remove_volition_action() {
        let mut log = build_elog(
            oid("e"),
            vec![
                Action::new(oid("vol"), oid("Bob")).cause_n(oid("open")),
                Action::new(oid("open"), oid("Bob")).cause_s(oid("vol")),
            ],
            vec![Participant::plain(oid("Bob"))],
        )
        .unwrap();
        log.remove_object(&oid("vol")).unwrap();
        assert_eq!(log.actions[&oid("open")].cause_s, Some(oid("unknown")));
        assert!(log.validate().is_valid());
    }
}
