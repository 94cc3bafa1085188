//! Matrix form of a log and the Boolean functor equations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::id::ObjectId;
use crate::log::Log;
use crate::matrix::{BoolMatrix, MatrixError};

/// Cause and performer matrices of one log, with rows and columns in the
/// canonical action order (sentinels last).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauseMatrices {
    pub actions: Vec<ObjectId>,
    pub participants: Vec<ObjectId>,
    /// `S[a][c]` set when `cause_s(a) = c`.
    pub s: BoolMatrix,
    /// `N[a][x]` set when `cause_n(a) = x`.
    pub n: BoolMatrix,
    pub s_tri: BoolMatrix,
    pub n_tri: BoolMatrix,
    /// `E[p][a]` set when `who(a) = p` (participants × actions).
    pub e: BoolMatrix,
    /// Reachability closure of `S + N^Tri`.
    pub s_reach: BoolMatrix,
    /// Reachability closure of `N + S^Tri`.
    pub n_reach: BoolMatrix,
    action_index: BTreeMap<ObjectId, usize>,
    participant_index: BTreeMap<ObjectId, usize>,
}

impl CauseMatrices {
    pub fn action_index(&self, id: &ObjectId) -> Option<usize> {
        self.action_index.get(id).copied()
    }

    pub fn participant_index(&self, id: &ObjectId) -> Option<usize> {
        self.participant_index.get(id).copied()
    }

    /// Index of the performer of action `a`, if any.
    pub fn who_of(&self, a: usize) -> Option<usize> {
        (0..self.participants.len()).find(|&p| self.e.get(p, a))
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# actions {}\n", join(&self.actions)));
        out.push_str(&format!("# participants {}\n", join(&self.participants)));
        for (name, m) in [("S", &self.s), ("N", &self.n), ("S_tri", &self.s_tri), ("N_tri", &self.n_tri), ("E", &self.e)] {
            out.push_str(&m.dump(name));
        }
        out
    }
}

fn join(ids: &[ObjectId]) -> String {
    ids.iter().map(ObjectId::as_str).collect::<Vec<_>>().join(" ")
}

/// Builds the matrices of a validated log. Arrows into sentinels and self
/// arrows are left out of `S` and `N`.
pub fn adjacency(log: &Log) -> CauseMatrices {
    let actions = log.canonical_action_order();
    let participants = log.participant_universe();
    let action_index: BTreeMap<ObjectId, usize> = actions.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    let participant_index: BTreeMap<ObjectId, usize> =
        participants.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();

    let mut s = BoolMatrix::square(actions.clone());
    let mut n = BoolMatrix::square(actions.clone());
    let mut s_tri = BoolMatrix::square(actions.clone());
    let mut n_tri = BoolMatrix::square(actions.clone());
    let mut e = BoolMatrix::zeros(participants.clone(), actions.clone());

    for (i, id) in actions.iter().enumerate() {
        let a = &log.actions[id];
        if let Some(w) = a.who.as_ref().and_then(|w| participant_index.get(w)) {
            if !id.is_sentinel() {
                e.set(*w, i, true);
            }
        }
        if id.is_sentinel() {
            continue;
        }
        for (target, m, tri) in [(&a.cause_s, &mut s, &mut s_tri), (&a.cause_n, &mut n, &mut n_tri)] {
            let Some(t) = target else { continue };
            if t == id || t.is_sentinel() {
                continue;
            }
            if let Some(&j) = action_index.get(t) {
                m.set(i, j, true);
                if log.is_trivial_arrow(id, t) {
                    tri.set(i, j, true);
                }
            }
        }
    }
    let s_reach = s.or(&n_tri).and_then(|m| m.transitive_closure()).expect("square");
    let n_reach = n.or(&s_tri).and_then(|m| m.transitive_closure()).expect("square");
    CauseMatrices { actions, participants, s, n, s_tri, n_tri, e, s_reach, n_reach, action_index, participant_index }
}

/// Conversion matrices of an object map from `e` into `s`.
/// `p_s[x][a]` set when `a ↦ x`; `p_e[q][p]` set when `p ↦ q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionPair {
    pub p_s: BoolMatrix,
    pub p_e: BoolMatrix,
}

impl ConversionPair {
    /// Builds the pair from object maps. Sentinels present on both sides are
    /// mapped to themselves.
    pub fn from_maps(
        e: &CauseMatrices,
        s: &CauseMatrices,
        action_map: &BTreeMap<ObjectId, ObjectId>,
        participant_map: &BTreeMap<ObjectId, ObjectId>,
    ) -> Result<Self, MatrixError> {
        let mut p_s = BoolMatrix::zeros(s.actions.clone(), e.actions.clone());
        let mut p_e = BoolMatrix::zeros(s.participants.clone(), e.participants.clone());
        let missing = |id: &ObjectId| MatrixError::DimensionMismatch(format!("no row or column for {id}"));
        for (a, x) in action_map {
            let j = e.action_index(a).ok_or_else(|| missing(a))?;
            let i = s.action_index(x).ok_or_else(|| missing(x))?;
            p_s.set(i, j, true);
        }
        for (p, q) in participant_map {
            let j = e.participant_index(p).ok_or_else(|| missing(p))?;
            let i = s.participant_index(q).ok_or_else(|| missing(q))?;
            p_e.set(i, j, true);
        }
        for id in [ObjectId::nothing(), ObjectId::unknown()] {
            if let (Some(j), Some(i)) = (e.action_index(&id), s.action_index(&id)) {
                p_s.set(i, j, true);
            }
        }
        let nobody = ObjectId::nobody();
        if let (Some(j), Some(i)) = (e.participant_index(&nobody), s.participant_index(&nobody)) {
            p_e.set(i, j, true);
        }
        Ok(ConversionPair { p_s, p_e })
    }

    /// Non-sentinel s-actions hit by the map.
    pub fn action_image(&self) -> Vec<usize> {
        (0..self.p_s.rows()).filter(|&i| !self.p_s.row_ids[i].is_sentinel() && !self.p_s.row_is_zero(i)).collect()
    }
}

/// One failed entry of a matrix comparison.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mismatch {
    pub check: &'static str,
    pub row: ObjectId,
    pub col: ObjectId,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}->{}", self.check, self.row, self.col)
    }
}

fn check_dims(e: &CauseMatrices, s: &CauseMatrices, p: &ConversionPair) -> Result<(), MatrixError> {
    let ok = p.p_s.rows() == s.actions.len()
        && p.p_s.cols() == e.actions.len()
        && p.p_e.rows() == s.participants.len()
        && p.p_e.cols() == e.participants.len();
    if ok {
        Ok(())
    } else {
        Err(MatrixError::DimensionMismatch(format!(
            "P_S {}x{}, P_E {}x{} for e {}/{} and s {}/{}",
            p.p_s.rows(),
            p.p_s.cols(),
            p.p_e.rows(),
            p.p_e.cols(),
            e.actions.len(),
            e.participants.len(),
            s.actions.len(),
            s.participants.len()
        )))
    }
}

/// `P · M · Pᵀ + I`.
fn convert(p: &BoolMatrix, m: &BoolMatrix) -> Result<BoolMatrix, MatrixError> {
    p.mul(m)?.mul(&p.transpose())?.with_identity()
}

fn compare_on(check: &'static str, l: &BoolMatrix, r: &BoolMatrix, rows: &[usize], cols: &[usize]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for &i in rows {
        for &j in cols {
            if l.get(i, j) != r.get(i, j) {
                out.push(Mismatch { check, row: l.row_ids[i].clone(), col: l.col_ids[j].clone() });
            }
        }
    }
    out
}

/// Result of [`check_causal_equations`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalCheck {
    pub s_ok: bool,
    pub n_ok: bool,
    pub mismatches: Vec<Mismatch>,
}

/// Compares the closed cause structure of `s` with the converted closure of
/// `e`, for both arrow kinds, on the image of the action map.
pub fn check_causal_equations(
    e: &CauseMatrices,
    s: &CauseMatrices,
    p: &ConversionPair,
) -> Result<CausalCheck, MatrixError> {
    check_dims(e, s, p)?;
    let image = p.action_image();
    let mut mismatches = Vec::new();
    let mut flags = [true; 2];
    for (k, (name, s_reach, e_reach)) in
        [("S", &s.s_reach, &e.s_reach), ("N", &s.n_reach, &e.n_reach)].into_iter().enumerate()
    {
        let l = s_reach.with_identity()?;
        let r = convert(&p.p_s, e_reach)?;
        let found = compare_on(name, &l, &r, &image, &image);
        flags[k] = found.is_empty();
        mismatches.extend(found);
    }
    Ok(CausalCheck { s_ok: flags[0], n_ok: flags[1], mismatches })
}

/// Checks that performers commute with the map: `P_E · E_e · P_Sᵀ` equals
/// `E_s` on every s-action in the image.
pub fn check_who_equation(
    e: &CauseMatrices,
    s: &CauseMatrices,
    p: &ConversionPair,
) -> Result<(bool, Vec<Mismatch>), MatrixError> {
    check_dims(e, s, p)?;
    let r = p.p_e.mul(&e.e)?.mul(&p.p_s.transpose())?;
    let rows: Vec<usize> = (0..s.participants.len()).collect();
    let found = compare_on("who", &s.e, &r, &rows, &p.action_image());
    Ok((found.is_empty(), found))
}

/// Which of surjectivity and injectivity (over non-sentinel objects) a
/// caller requires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FunctionMode {
    pub surjective_required: bool,
    pub injective_required: bool,
}

/// All completeness checks of one object map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessReport {
    pub is_function: bool,
    pub zero_column_rule_ok: bool,
    /// Every non-sentinel s-object is hit.
    pub surjective: bool,
    /// Every non-sentinel e-object is mapped.
    pub injective: bool,
    pub causal_eq_s_ok: bool,
    pub causal_eq_n_ok: bool,
    pub who_eq_ok: bool,
    /// Soft flag: mapped trivial pairs land on trivial pairs or identities.
    pub trivial_preserved: bool,
    pub mismatches: Vec<Mismatch>,
}

impl CompletenessReport {
    /// All hard checks pass.
    pub fn is_complete(&self) -> bool {
        self.is_function
            && self.zero_column_rule_ok
            && self.surjective
            && self.injective
            && self.causal_eq_s_ok
            && self.causal_eq_n_ok
            && self.who_eq_ok
    }

    /// Hard checks pass, with surjectivity and injectivity only when required.
    pub fn satisfies(&self, mode: FunctionMode) -> bool {
        self.is_function
            && self.zero_column_rule_ok
            && self.causal_eq_s_ok
            && self.causal_eq_n_ok
            && self.who_eq_ok
            && (self.surjective || !mode.surjective_required)
            && (self.injective || !mode.injective_required)
    }

    /// Count of the four structural checks (zero column, S, N, who) passed.
    pub fn structural_passed(&self) -> usize {
        [self.zero_column_rule_ok, self.causal_eq_s_ok, self.causal_eq_n_ok, self.who_eq_ok]
            .iter()
            .filter(|b| **b)
            .count()
    }
}

/// Function, zero-column, surjectivity and injectivity rules, with
/// mismatches for each failure.
pub fn check_function_rules(e: &CauseMatrices, s: &CauseMatrices, p: &ConversionPair) -> Result<FunctionRules, MatrixError> {
    check_dims(e, s, p)?;
    let mut mismatches = Vec::new();
    let mut is_function = true;
    for (name, m) in [("function.P_S", &p.p_s), ("function.P_E", &p.p_e)] {
        for j in 0..m.cols() {
            if m.col_count(j) > 1 {
                is_function = false;
                mismatches.push(Mismatch { check: name, row: m.row_ids[0].clone(), col: m.col_ids[j].clone() });
            }
        }
    }
    let pe_e = p.p_e.mul(&e.e)?;
    let mut zero_column_rule_ok = true;
    for j in 0..p.p_s.cols() {
        if e.actions[j].is_sentinel() {
            continue;
        }
        if pe_e.col_is_zero(j) && !p.p_s.col_is_zero(j) {
            zero_column_rule_ok = false;
            let i = (0..p.p_s.rows()).find(|&i| p.p_s.get(i, j)).expect("nonzero column");
            mismatches.push(Mismatch { check: "zero_column", row: p.p_s.row_ids[i].clone(), col: e.actions[j].clone() });
        }
    }
    let mut surjective = true;
    let mut injective = true;
    for m in [&p.p_s, &p.p_e] {
        for i in 0..m.rows() {
            if !m.row_ids[i].is_sentinel() && m.row_is_zero(i) {
                surjective = false;
                mismatches.push(Mismatch { check: "surjective", row: m.row_ids[i].clone(), col: m.row_ids[i].clone() });
            }
        }
        for j in 0..m.cols() {
            if !m.col_ids[j].is_sentinel() && m.col_is_zero(j) {
                injective = false;
                mismatches.push(Mismatch { check: "injective", row: m.col_ids[j].clone(), col: m.col_ids[j].clone() });
            }
        }
    }
    Ok(FunctionRules { is_function, zero_column_rule_ok, surjective, injective, mismatches })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionRules {
    pub is_function: bool,
    pub zero_column_rule_ok: bool,
    pub surjective: bool,
    pub injective: bool,
    pub mismatches: Vec<Mismatch>,
}

/// Whether every e-side trivial arrow between mapped actions lands on an
/// s-side trivial arrow or collapses to an identity.
pub fn trivial_preserved(e: &CauseMatrices, s: &CauseMatrices, p: &ConversionPair) -> bool {
    let image_of = |j: usize| (0..p.p_s.rows()).find(|&i| p.p_s.get(i, j));
    for m in [(&e.s_tri, &s.s_tri), (&e.n_tri, &s.n_tri)] {
        for (a, b) in m.0.ones() {
            if let (Some(x), Some(y)) = (image_of(a), image_of(b)) {
                if x != y && !m.1.get(x, y) {
                    return false;
                }
            }
        }
    }
    true
}

/// Runs every check and assembles the report.
pub fn completeness(e: &CauseMatrices, s: &CauseMatrices, p: &ConversionPair) -> Result<CompletenessReport, MatrixError> {
    let rules = check_function_rules(e, s, p)?;
    let causal = check_causal_equations(e, s, p)?;
    let (who_eq_ok, who_mm) = check_who_equation(e, s, p)?;
    let mut mismatches = rules.mismatches;
    mismatches.extend(causal.mismatches);
    mismatches.extend(who_mm);
    Ok(CompletenessReport {
        is_function: rules.is_function,
        zero_column_rule_ok: rules.zero_column_rule_ok,
        surjective: rules.surjective,
        injective: rules.injective,
        causal_eq_s_ok: causal.s_ok,
        causal_eq_n_ok: causal.n_ok,
        who_eq_ok,
        trivial_preserved: trivial_preserved(e, s, p),
        mismatches,
    })
}

/// Identity object maps of a log onto itself (sentinels excluded).
pub fn identity_maps(log: &Log) -> (BTreeMap<ObjectId, ObjectId>, BTreeMap<ObjectId, ObjectId>) {
    let a = log.content_action_ids().into_iter().map(|x| (x.clone(), x)).collect();
    let p = log.content_participants().into_iter().map(|x| (x.clone(), x)).collect();
    (a, p)
}

/// Ids of the non-sentinel s-actions hit by the map.
pub fn image_ids(p: &ConversionPair) -> BTreeSet<ObjectId> {
    p.action_image().into_iter().map(|i| p.p_s.row_ids[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::oid;
    use crate::log::{build_elog, build_slog, Action, Participant};

    fn bob_alice() -> Log {
        build_elog(
            oid("bob-alice"),
            vec![
                Action::new(oid("loves"), oid("Bob")).cause_n(oid("is_loved")).trivial(oid("is_loved")),
                Action::new(oid("is_loved"), oid("Alice")).cause_s(oid("loves")).cause_n(oid("is_loved")).trivial(oid("loves")),
            ],
            vec![Participant::plain(oid("Bob")), Participant::plain(oid("Alice"))],
        )
        .unwrap()
    }

    fn acts() -> Log {
        build_slog(
            oid("acts"),
            vec![
                Action::new(oid("acts"), oid("agent")).cause_n(oid("is_acted_on")).trivial(oid("is_acted_on")),
                Action::new(oid("is_acted_on"), oid("patient")).cause_s(oid("acts")).trivial(oid("acts")),
            ],
            vec![Participant::class(oid("agent")), Participant::class(oid("patient"))],
        )
        .unwrap()
    }

    fn maps(pairs: &[(&str, &str)]) -> BTreeMap<ObjectId, ObjectId> {
        pairs.iter().map(|(a, b)| (oid(a), oid(b))).collect()
    }

    #[test]
    fn table_one_matrices() {
        let m = adjacency(&bob_alice());
        assert_eq!(m.s.describe_ones(), "is_loved->loves");
        assert_eq!(m.n.describe_ones(), "loves->is_loved");
        assert_eq!(m.s_tri, m.s);
        assert_eq!(m.n_tri, m.n);
        assert!(m.s.is_strictly_lower() && m.n.is_strictly_upper());
        assert_eq!(m.e.describe_ones(), "Alice->is_loved Bob->loves");
    }

    #[test]
    fn sentinel_only_is_zero() {
        let m = adjacency(&build_elog(oid("e"), vec![], vec![]).unwrap());
        assert!(m.s.is_zero() && m.n.is_zero() && m.e.is_zero());
    }

    #[test]
    fn chain_is_lower_triangular() {
        let log = build_elog(
            oid("e"),
            vec![
                Action::new(oid("a"), oid("P")).cause_n(oid("b")),
                Action::new(oid("b"), oid("P")).cause_s(oid("a")).cause_n(oid("c")),
                Action::new(oid("c"), oid("P")).cause_s(oid("b")),
            ],
            vec![Participant::plain(oid("P"))],
        )
        .unwrap();
        let m = adjacency(&log);
        assert_eq!(m.s.count_ones(), 2);
        assert!(m.s.is_strictly_lower());
        let (a, p) = identity_maps(&log);
        let r = completeness(&m, &m, &ConversionPair::from_maps(&m, &m, &a, &p).unwrap()).unwrap();
        assert!(r.is_complete(), "{:?}", r.mismatches);
    }

    #[test]
    fn bob_alice_into_acts() {
        let (e, s) = (adjacency(&bob_alice()), adjacency(&acts()));
        let p = ConversionPair::from_maps(
            &e,
            &s,
            &maps(&[("loves", "acts"), ("is_loved", "is_acted_on")]),
            &maps(&[("Bob", "agent"), ("Alice", "patient")]),
        )
        .unwrap();
        let r = completeness(&e, &s, &p).unwrap();
        assert!(r.is_complete() && r.trivial_preserved, "{:?}", r.mismatches);
    }

    #[test]
    fn swapped_who_fails() {
        let (e, s) = (adjacency(&bob_alice()), adjacency(&acts()));
        let p = ConversionPair::from_maps(
            &e,
            &s,
            &maps(&[("loves", "acts"), ("is_loved", "is_acted_on")]),
            &maps(&[("Bob", "patient"), ("Alice", "agent")]),
        )
        .unwrap();
        let (ok, mm) = check_who_equation(&e, &s, &p).unwrap();
        assert!(!ok);
        // Product: column acts gets patient (from Bob), is_acted_on gets agent.
        assert!(mm.contains(&Mismatch { check: "who", row: oid("patient"), col: oid("acts") }));
        assert!(mm.contains(&Mismatch { check: "who", row: oid("agent"), col: oid("acts") }));
    }

    #[test]
    fn reversed_chain_fails() {
        let two = |id: &str, x: &str, y: &str| {
            build_elog(
                oid(id),
                vec![Action::new(oid(x), oid("P")).cause_n(oid(y)), Action::new(oid(y), oid("P")).cause_s(oid(x))],
                vec![Participant::plain(oid("P"))],
            )
            .unwrap()
        };
        let (e, s) = (adjacency(&two("e", "a", "b")), adjacency(&two("s", "x", "y")));
        let p = ConversionPair::from_maps(&e, &s, &maps(&[("a", "y"), ("b", "x")]), &maps(&[("P", "P")])).unwrap();
        let c = check_causal_equations(&e, &s, &p).unwrap();
        // L_S has y->x only; R_S has x->y only (b.cs = a converts to x -> y).
        assert!(!c.s_ok && !c.n_ok);
        assert!(c.mismatches.contains(&Mismatch { check: "S", row: oid("y"), col: oid("x") }));
        assert!(c.mismatches.contains(&Mismatch { check: "S", row: oid("x"), col: oid("y") }));
    }

    #[test]
    fn zero_column_rule() {
        // a and b performed by P and Q, both mapped onto x; Q left unmapped.
        let e = build_elog(
            oid("e"),
            vec![Action::new(oid("a"), oid("P")), Action::new(oid("b"), oid("Q"))],
            vec![Participant::plain(oid("P")), Participant::plain(oid("Q"))],
        )
        .unwrap();
        let s = build_slog(oid("s"), vec![Action::new(oid("x"), oid("C"))], vec![Participant::class(oid("C"))]).unwrap();
        let (em, sm) = (adjacency(&e), adjacency(&s));
        let p = ConversionPair::from_maps(&em, &sm, &maps(&[("a", "x"), ("b", "x")]), &maps(&[("P", "C")])).unwrap();
        let r = check_function_rules(&em, &sm, &p).unwrap();
        assert!(r.is_function && !r.zero_column_rule_ok && !r.injective && r.surjective);
        assert!(r.mismatches.contains(&Mismatch { check: "zero_column", row: oid("x"), col: oid("b") }));
    }

    #[test]
    fn double_image_is_not_function() {
        let (e, s) = (adjacency(&bob_alice()), adjacency(&acts()));
        let mut p = ConversionPair::from_maps(&e, &s, &maps(&[("loves", "acts")]), &BTreeMap::new()).unwrap();
        let (i, j) = (s.action_index(&oid("is_acted_on")).unwrap(), e.action_index(&oid("loves")).unwrap());
        p.p_s.set(i, j, true);
        assert!(!check_function_rules(&e, &s, &p).unwrap().is_function);
    }

    #[test]
    fn swapping_kinds_swaps_flags() {
        let (e, s) = (adjacency(&bob_alice()), adjacency(&acts()));
        let p = ConversionPair::from_maps(&e, &s, &maps(&[("loves", "is_acted_on"), ("is_loved", "acts")]), &BTreeMap::new())
            .unwrap();
        let c = check_causal_equations(&e, &s, &p).unwrap();
        let swap = |m: &CauseMatrices| {
            let mut m = m.clone();
            std::mem::swap(&mut m.s, &mut m.n);
            std::mem::swap(&mut m.s_tri, &mut m.n_tri);
            std::mem::swap(&mut m.s_reach, &mut m.n_reach);
            m
        };
        let d = check_causal_equations(&swap(&e), &swap(&s), &p).unwrap();
        assert_eq!((c.s_ok, c.n_ok), (d.n_ok, d.s_ok));
    }

    #[test]
    fn dimension_mismatch() {
        let e = adjacency(&bob_alice());
        let s = adjacency(&build_slog(oid("s"), vec![], vec![]).unwrap());
        let p = ConversionPair::from_maps(&e, &e, &BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert!(matches!(check_causal_equations(&e, &s, &p), Err(MatrixError::DimensionMismatch(_))));
    }
}
