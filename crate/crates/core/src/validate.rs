use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::id::ObjectId;
use crate::log::{Log, LogKind, ParticipantKind};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    MissingSentinel(ObjectId),
    /// A sentinel whose arrows differ from the reserved shape.
    SentinelShape(ObjectId),
    /// The same id names an action and a participant.
    IdClash(ObjectId),
    Totality { action: ObjectId, arrow: &'static str },
    Dangling { from: ObjectId, arrow: &'static str, target: ObjectId },
    Cycle(Vec<ObjectId>),
    TrivialPair { action: ObjectId, reason: &'static str },
    IntervalOrder(ObjectId),
    TimestampOrder { cause: ObjectId, effect: ObjectId },
    NotClass(ObjectId),
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::MissingSentinel(_) => "missing-sentinel",
            Violation::SentinelShape(_) => "sentinel-shape",
            Violation::IdClash(_) => "id-clash",
            Violation::Totality { .. } => "totality",
            Violation::Dangling { .. } => "dangling",
            Violation::Cycle(_) => "cycle",
            Violation::TrivialPair { .. } => "trivial-pair",
            Violation::IntervalOrder(_) => "interval",
            Violation::TimestampOrder { .. } => "timestamp-order",
            Violation::NotClass(_) => "not-class",
        }
    }

    /// The object the violation is reported against.
    pub fn subject(&self) -> String {
        match self {
            Violation::MissingSentinel(id)
            | Violation::SentinelShape(id)
            | Violation::IdClash(id)
            | Violation::IntervalOrder(id)
            | Violation::NotClass(id) => id.to_string(),
            Violation::Totality { action, .. } | Violation::TrivialPair { action, .. } => action.to_string(),
            Violation::Dangling { from, .. } => from.to_string(),
            Violation::Cycle(ids) => ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(","),
            Violation::TimestampOrder { effect, .. } => effect.to_string(),
        }
    }

    pub fn detail(&self) -> String {
        match self {
            Violation::MissingSentinel(id) => format!("reserved object `{id}` is missing"),
            Violation::SentinelShape(id) => format!("reserved object `{id}` has non-standard arrows"),
            Violation::IdClash(id) => format!("`{id}` is both an action and a participant"),
            Violation::Totality { action, arrow } => format!("action `{action}` has no {arrow} arrow"),
            Violation::Dangling { from, arrow, target } => format!("`{from}` {arrow} -> missing `{target}`"),
            Violation::Cycle(ids) => format!("causal cycle through {}", self.subject_list(ids)),
            Violation::TrivialPair { action, reason } => format!("trivial pair at `{action}`: {reason}"),
            Violation::IntervalOrder(id) => format!("`{id}` ends before it starts"),
            Violation::TimestampOrder { cause, effect } => format!("effect `{effect}` starts before its cause `{cause}`"),
            Violation::NotClass(id) => format!("scenario participant `{id}` is not a class"),
        }
    }

    fn subject_list(&self, ids: &[ObjectId]) -> String {
        ids.iter().map(|i| format!("`{i}`")).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code(), self.detail())
    }
}

/// Outcome of [`validate_category`]; empty iff the log is a valid category.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks totality, uniqueness, reference integrity, acyclicity (trivial
/// pairs collapsed), trivial-pair symmetry and timestamp order.
pub fn validate_category(log: &Log) -> ValidationReport {
    let mut out = Vec::new();

    for s in [ObjectId::nothing(), ObjectId::unknown()] {
        match log.actions.get(&s) {
            None => out.push(Violation::MissingSentinel(s)),
            Some(a) => {
                let ok = a.who.as_ref() == Some(&ObjectId::nobody())
                    && a.cause_s.as_ref().is_some_and(|c| c.is_sentinel_action())
                    && a.cause_n.as_ref().is_some_and(|c| c.is_sentinel_action());
                if !ok {
                    out.push(Violation::SentinelShape(s));
                }
            }
        }
    }
    if !log.participants.contains_key(&ObjectId::nobody()) {
        out.push(Violation::MissingSentinel(ObjectId::nobody()));
    }

    for id in log.participants.keys() {
        if log.actions.contains_key(id) {
            out.push(Violation::IdClash(id.clone()));
        }
    }

    for a in log.actions.values() {
        for (arrow, target) in [("who", &a.who), ("cause-S", &a.cause_s), ("cause-N", &a.cause_n)] {
            match target {
                None => out.push(Violation::Totality { action: a.id.clone(), arrow }),
                Some(t) => {
                    let exists = if arrow == "who" {
                        log.participants.contains_key(t) || log.actions.contains_key(t)
                    } else {
                        log.actions.contains_key(t)
                    };
                    if !exists {
                        out.push(Violation::Dangling { from: a.id.clone(), arrow, target: t.clone() });
                    }
                }
            }
        }
        if let (Some(s), Some(e)) = (a.raw.t_start, a.raw.t_end) {
            if s > e {
                out.push(Violation::IntervalOrder(a.id.clone()));
            }
        }
    }

    for a in log.content_actions() {
        let Some(p) = &a.trivial_partner else { continue };
        let Some(partner) = log.actions.get(p) else {
            out.push(Violation::Dangling { from: a.id.clone(), arrow: "trivial", target: p.clone() });
            continue;
        };
        if partner.trivial_partner.as_ref() != Some(&a.id) {
            out.push(Violation::TrivialPair { action: a.id.clone(), reason: "partnership is not mutual" });
            continue;
        }
        if a.id > *p {
            continue;
        }
        if let (Some(x), Some(y)) = (a.raw.t_start, partner.raw.t_start) {
            if x != y {
                out.push(Violation::TrivialPair { action: a.id.clone(), reason: "partners have different start times" });
            }
        }
        let forward = a.cause_n.as_ref() == Some(p) && partner.cause_s.as_ref() == Some(&a.id);
        let backward = partner.cause_n.as_ref() == Some(&a.id) && a.cause_s.as_ref() == Some(p);
        if !forward && !backward {
            out.push(Violation::TrivialPair { action: a.id.clone(), reason: "partners are not linked by a cause-S/cause-N pair" });
        }
    }

    if let Some(cycle) = find_cycle(log) {
        out.push(Violation::Cycle(cycle));
    }

    for (c, e) in log.causal_edges() {
        let (tc, te) = (log.actions[&c].raw.t_start, log.actions[&e].raw.t_start);
        if let (Some(tc), Some(te)) = (tc, te) {
            if te < tc {
                out.push(Violation::TimestampOrder { cause: c, effect: e });
            }
        }
    }

    if log.kind == LogKind::Scenario {
        for p in log.participants.values() {
            if !p.id.is_sentinel() && p.kind != ParticipantKind::Class {
                out.push(Violation::NotClass(p.id.clone()));
            }
        }
    }

    out.sort();
    out.dedup();
    ValidationReport { violations: out }
}

/// Actions lying on causal cycles once trivial pairs are collapsed, or `None`.
fn find_cycle(log: &Log) -> Option<Vec<ObjectId>> {
    let group = |a: &ObjectId| -> ObjectId {
        match log.mutual_partner(a) {
            Some(p) if p < a => p.clone(),
            _ => a.clone(),
        }
    };
    let mut succ: BTreeMap<ObjectId, BTreeSet<ObjectId>> = BTreeMap::new();
    let mut pred: BTreeMap<ObjectId, BTreeSet<ObjectId>> = BTreeMap::new();
    let mut nodes: BTreeSet<ObjectId> = BTreeSet::new();
    for (c, e) in log.causal_edges() {
        let (gc, ge) = (group(&c), group(&e));
        if gc == ge {
            continue;
        }
        nodes.insert(gc.clone());
        nodes.insert(ge.clone());
        succ.entry(gc.clone()).or_default().insert(ge.clone());
        pred.entry(ge).or_default().insert(gc);
    }
    // Peel sources and sinks; whatever survives lies on or between cycles.
    loop {
        let peel: Vec<ObjectId> = nodes
            .iter()
            .filter(|n| {
                let no_in = pred.get(*n).is_none_or(|s| s.iter().all(|p| !nodes.contains(p)));
                let no_out = succ.get(*n).is_none_or(|s| s.iter().all(|p| !nodes.contains(p)));
                no_in || no_out
            })
            .cloned()
            .collect();
        if peel.is_empty() {
            break;
        }
        for n in peel {
            nodes.remove(&n);
        }
    }
    if nodes.is_empty() {
        return None;
    }
    let mut ids: Vec<ObjectId> = Vec::new();
    for g in nodes {
        if let Some(p) = log.mutual_partner(&g) {
            ids.push(p.clone());
        }
        ids.push(g);
    }
    ids.sort();
    Some(ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::oid;
    use crate::log::{build_elog, Action, Participant};

    fn pair(t_do: i64, t_done: i64) -> Log {
        let mut log = build_elog(
            oid("e"),
            vec![
                Action::new(oid("loves"), oid("Bob")).cause_n(oid("is_loved")).trivial(oid("is_loved")).at(1),
                Action::new(oid("is_loved"), oid("Alice")).cause_s(oid("loves")).trivial(oid("loves")).at(1),
            ],
            vec![Participant::plain(oid("Bob")), Participant::plain(oid("Alice"))],
        )
        .unwrap();
        log.actions.get_mut(&oid("loves")).unwrap().raw.t_start = Some(t_do);
        log.actions.get_mut(&oid("is_loved")).unwrap().raw.t_start = Some(t_done);
        log
    }

    #[test]
    fn valid_pair_has_empty_report() {
        assert!(pair(3, 3).validate().is_valid());
    }

    #[test]
    fn missing_who_is_a_totality_violation() {
        let mut log = pair(1, 1);
        log.actions.get_mut(&oid("loves")).unwrap().who = None;
        let r = log.validate();
        assert_eq!(r.violations, vec![Violation::Totality { action: oid("loves"), arrow: "who" }]);
    }

    #[test]
    fn unequal_trivial_times() {
        // do at 1 and be-done at 2 respects cause order but breaks the same-time rule.
        let r = pair(1, 2).validate();
        assert_eq!(
            r.violations,
            vec![Violation::TrivialPair { action: oid("is_loved"), reason: "partners have different start times" }]
        );
    }

    #[test]
    fn effect_before_cause() {
        let r = pair(2, 1).validate();
        assert!(r.violations.contains(&Violation::TimestampOrder { cause: oid("loves"), effect: oid("is_loved") }));
    }

    #[test]
    fn one_sided_partner() {
        let mut log = pair(1, 1);
        log.actions.get_mut(&oid("is_loved")).unwrap().trivial_partner = None;
        let r = log.validate();
        assert_eq!(r.violations, vec![Violation::TrivialPair { action: oid("loves"), reason: "partnership is not mutual" }]);
    }

    #[test]
    fn cycle_reports_members_only() {
        let mut log = pair(1, 1);
        log.put_action(Action::new(oid("a"), oid("Bob")).cause_s(oid("b")).cause_n(oid("unknown")));
        log.put_action(Action::new(oid("b"), oid("Bob")).cause_s(oid("a")).cause_n(oid("unknown")));
        log.put_action(Action::new(oid("c"), oid("Bob")).cause_s(oid("b")).cause_n(oid("unknown")));
        let r = log.validate();
        assert_eq!(r.violations, vec![Violation::Cycle(vec![oid("a"), oid("b")])]);
    }
}
