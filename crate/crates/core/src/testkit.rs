//! Random logs for property tests and acceptance runs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::functor::Functor;
use crate::id::ObjectId;
use crate::log::{build_log, Action, Log, LogKind, Participant};

fn id(s: String) -> ObjectId {
    ObjectId::new(s).expect("generated ids have no spaces")
}

/// Random edges `(i, j)` with `i < j` on `n` nodes, each present with
/// probability `density`.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// A valid log with `actions` actions and `participants` participants.
///
/// Actions are created in causal order; consecutive actions may form a
/// trivial pair, other causes point backward (cause-S) or forward
/// (cause-N). Start times follow the creation order, and trivial partners
/// share theirs. E-log objects are named `a<i>`/`p<i>`, s-log objects
/// `x<i>`/`C<i>`.
pub fn random_log<R: Rng>(rng: &mut R, kind: LogKind, log_id: &str, actions: usize, participants: usize) -> Log {
    let (a_prefix, p_prefix) = match kind {
        LogKind::Episode => ("a", "p"),
        LogKind::Scenario => ("x", "C"),
    };
    let parts: Vec<ObjectId> = (0..participants.max(1)).map(|i| id(format!("{p_prefix}{i}"))).collect();
    let ids: Vec<ObjectId> = (0..actions).map(|i| id(format!("{a_prefix}{i}"))).collect();
    let mut recs: Vec<Action> =
        ids.iter().map(|a| Action::new(a.clone(), parts.choose(rng).expect("non-empty").clone())).collect();
    let mut t = 0;
    let mut i = 0;
    while i < actions {
        recs[i].raw.t_start = Some(t);
        if i + 1 < actions && rng.gen_bool(0.3) {
            recs[i].cause_n = Some(ids[i + 1].clone());
            recs[i].trivial_partner = Some(ids[i + 1].clone());
            recs[i + 1].cause_s = Some(ids[i].clone());
            recs[i + 1].trivial_partner = Some(ids[i].clone());
            recs[i + 1].raw.t_start = Some(t);
            i += 2;
        } else {
            i += 1;
        }
        t += 1;
    }
    for j in 0..actions {
        if recs[j].cause_s.is_none() && j > 0 && rng.gen_bool(0.4) {
            recs[j].cause_s = Some(ids[rng.gen_range(0..j)].clone());
        }
        if recs[j].cause_n.is_none() && j + 1 < actions && rng.gen_bool(0.4) {
            recs[j].cause_n = Some(ids[rng.gen_range(j + 1..actions)].clone());
        }
    }
    let participants = parts
        .into_iter()
        .map(|p| match kind {
            LogKind::Episode => Participant::plain(p),
            LogKind::Scenario => Participant::class(p),
        })
        .collect();
    build_log(kind, id(log_id.to_string()), recs, participants).expect("generated logs are valid")
}

/// A random total object map from `e` into `s`; not necessarily a functor.
pub fn random_map<R: Rng>(rng: &mut R, e: &Log, s: &Log) -> Functor {
    let mut f = Functor::empty(e.id.clone(), s.id.clone());
    let sa = s.content_action_ids();
    let sp = s.content_participants();
    for a in e.content_action_ids() {
        if let Some(x) = sa.choose(rng) {
            f.action_map.insert(a, x.clone());
        }
    }
    for p in e.content_participants() {
        if let Some(c) = sp.choose(rng) {
            f.participant_map.insert(p, c.clone());
        }
    }
    f
}
