//! Planning: chaining scenarios backward from a goal and grounding the
//! chain in the participants of a world episode.

use std::collections::{BTreeMap, BTreeSet};

use crate::belog::BeLog;
use crate::functor::{Functor, SearchConfig};
use crate::id::ObjectId;
use crate::log::{check_built, Log, LogKind, Participant};

use super::ReasoningError;

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub id: ObjectId,
    /// S-log ids, earliest first.
    pub chain: Vec<ObjectId>,
    /// The chained s-logs joined into one.
    pub scenario: Log,
    /// The grounded plan as an e-log.
    pub elog: Log,
    /// Class to world participant.
    pub assignment: BTreeMap<ObjectId, ObjectId>,
    /// Functor from `elog` onto `scenario`.
    pub functor: Functor,
    /// Mean compatibility of the assignment.
    pub score: f64,
}

fn terminal_actions(s: &Log) -> Vec<ObjectId> {
    s.canonical_action_order()
        .into_iter()
        .filter(|x| !x.is_sentinel())
        .filter(|x| s.actions[x].cause_n.as_ref().is_none_or(|c| c.is_sentinel() || c == x))
        .collect()
}

fn initial_action(s: &Log) -> Option<ObjectId> {
    s.canonical_action_order()
        .into_iter()
        .filter(|x| !x.is_sentinel())
        .find(|x| s.actions[x].cause_s.as_ref().is_none_or(|c| c.is_sentinel() || c == x))
}

/// Joins the chain into one s-log. The last action of each part is linked
/// to the first action of the next, and later parts get later ranks.
fn assemble(parts: &[&Log]) -> Result<Log, ReasoningError> {
    if let [one] = parts {
        return Ok((*one).clone());
    }
    let id = parts.iter().map(|s| s.id.as_str()).collect::<Vec<_>>().join("+");
    let bad_id = |_| ReasoningError::NoAdmissibleFunctor;
    let mut out = Log::empty(LogKind::Scenario, ObjectId::new(id).map_err(bad_id)?);
    let rename = |s: &Log, x: &ObjectId| -> ObjectId {
        if x.is_sentinel() || !s.is_action(x) {
            x.clone()
        } else {
            ObjectId::new(format!("{}.{}", s.id, x)).expect("ids have no spaces")
        }
    };
    let mut offset = 0;
    let mut previous_end: Option<ObjectId> = None;
    for s in parts {
        for p in s.participants.values().filter(|p| !p.id.is_sentinel()) {
            out.participants.entry(p.id.clone()).or_insert_with(|| p.clone());
        }
        let mut max_rank = None;
        for a in s.content_actions() {
            let mut a = a.clone();
            a.raw.t_start = a.raw.t_start.map(|t| t + offset);
            a.raw.t_end = a.raw.t_end.map(|t| t + offset);
            max_rank = max_rank.max(a.raw.t_end.or(a.raw.t_start));
            a.id = rename(s, &a.id);
            a.cause_s = a.cause_s.as_ref().map(|c| rename(s, c));
            a.cause_n = a.cause_n.as_ref().map(|c| rename(s, c));
            a.trivial_partner = a.trivial_partner.as_ref().map(|c| rename(s, c));
            out.put_action(a);
        }
        if let (Some(end), Some(start)) = (&previous_end, initial_action(s).map(|x| rename(s, &x))) {
            let e = out.actions.get_mut(end).expect("renamed");
            if e.cause_n.as_ref().is_none_or(|c| c.is_sentinel()) {
                e.cause_n = Some(start.clone());
            }
            let st = out.actions.get_mut(&start).expect("renamed");
            if st.cause_s.as_ref().is_none_or(|c| c.is_sentinel()) {
                st.cause_s = Some(end.clone());
            }
        }
        previous_end = terminal_actions(s).last().map(|x| rename(s, x));
        offset = max_rank.map_or(offset, |m| m + 1);
    }
    Ok(check_built(out)?)
}

/// Injective assignments of `classes` to `world`, each pair at least
/// `threshold` compatible, with their mean compatibility.
struct Grounding<'a> {
    classes: &'a [ObjectId],
    world: &'a [ObjectId],
    compat: &'a dyn Fn(&ObjectId, &ObjectId) -> f64,
    threshold: f64,
}

impl Grounding<'_> {
    fn all(&self) -> Vec<(BTreeMap<ObjectId, ObjectId>, f64)> {
        let mut out = Vec::new();
        self.go(&mut BTreeSet::new(), &mut Vec::new(), &mut out);
        out
    }

    fn go(
        &self,
        used: &mut BTreeSet<usize>,
        current: &mut Vec<(ObjectId, ObjectId, f64)>,
        out: &mut Vec<(BTreeMap<ObjectId, ObjectId>, f64)>,
    ) {
        let i = current.len();
        if i == self.classes.len() {
            let total: f64 = current.iter().map(|(_, _, c)| c).sum();
            let map = current.iter().map(|(c, w, _)| (c.clone(), w.clone())).collect();
            out.push((map, if i == 0 { 1.0 } else { total / i as f64 }));
            return;
        }
        for (j, w) in self.world.iter().enumerate() {
            let c = (self.compat)(w, &self.classes[i]);
            if used.contains(&j) || c < self.threshold {
                continue;
            }
            used.insert(j);
            current.push((self.classes[i].clone(), w.clone(), c));
            self.go(used, current, out);
            current.pop();
            used.remove(&j);
        }
    }
}

/// Plans that reach `goal`: chains of up to `cfg.depth` s-logs from
/// `library`, the last ending in an action compatible with `goal`, each
/// joined to the next through compatible end and start actions, and
/// grounded injectively in the participants of `world`.
///
/// Plans are ordered by mean compatibility of the grounding, then by
/// shorter chain, then by chain and assignment ids.
pub fn plan(
    goal: &ObjectId,
    library: &[Log],
    world: &Log,
    b: &BeLog,
    cfg: &SearchConfig,
) -> Result<Vec<Plan>, ReasoningError> {
    if library.is_empty() {
        return Err(ReasoningError::EmptyLibrary);
    }
    let compat = |x: &ObjectId, y: &ObjectId| b.mapping_compatibility_with(x, y, &cfg.compat);
    let threshold = cfg.min_compatibility.max(f64::MIN_POSITIVE);
    let ends_in = |s: &Log, target: &ObjectId| terminal_actions(s).iter().any(|t| compat(t, target) >= threshold);

    let mut chains: Vec<Vec<usize>> = (0..library.len()).filter(|&i| ends_in(&library[i], goal)).map(|i| vec![i]).collect();
    let mut frontier = chains.clone();
    for _ in 1..cfg.depth.max(1) {
        let mut next = Vec::new();
        for chain in &frontier {
            let Some(start) = initial_action(&library[chain[0]]) else { continue };
            for (i, s) in library.iter().enumerate() {
                if !chain.contains(&i) && ends_in(s, &start) {
                    let mut longer = vec![i];
                    longer.extend(chain);
                    next.push(longer);
                }
            }
        }
        chains.extend(next.iter().cloned());
        frontier = next;
    }

    let world_participants = world.content_participants();
    let mut plans = Vec::new();
    for chain in chains {
        let parts: Vec<&Log> = chain.iter().map(|&i| &library[i]).collect();
        let scenario = assemble(&parts)?;
        let classes = scenario.content_participants();
        let grounding = Grounding { classes: &classes, world: &world_participants, compat: &compat, threshold };
        for (assignment, score) in grounding.all() {
            plans.push((chain.clone(), scenario.clone(), assignment, score));
        }
    }
    plans.sort_by(|a, b| {
        b.3.total_cmp(&a.3)
            .then_with(|| a.0.len().cmp(&b.0.len()))
            .then_with(|| a.0.cmp(&b.0))
            .then_with(|| a.2.cmp(&b.2))
    });
    plans.truncate(cfg.max_candidates.max(1));
    if plans.is_empty() {
        return Err(ReasoningError::NoPlanFound(goal.clone()));
    }

    let mut out = Vec::new();
    for (k, (chain, scenario, assignment, score)) in plans.into_iter().enumerate() {
        let id = ObjectId::new(format!("plan{}", k + 1)).expect("plain id");
        let mut elog = Log::empty(LogKind::Episode, id.clone());
        elog.provenance = Some(scenario.id.clone());
        let mut functor = Functor::empty(id.clone(), scenario.id.clone());
        for (class, w) in &assignment {
            let mut p = world.participants[w].clone();
            p.kind = Participant::plain(w.clone()).kind;
            elog.participants.insert(w.clone(), p);
            functor.participant_map.insert(w.clone(), class.clone());
        }
        for a in scenario.content_actions() {
            let mut a = a.clone();
            a.who = a.who.map(|c| assignment.get(&c).cloned().unwrap_or(c));
            functor.action_map.insert(a.id.clone(), a.id.clone());
            elog.put_action(a);
        }
        let elog = check_built(elog)?;
        out.push(Plan {
            id,
            chain: chain.iter().map(|&i| library[i].id.clone()).collect(),
            scenario,
            elog,
            assignment,
            functor,
            score,
        });
    }
    Ok(out)
}
