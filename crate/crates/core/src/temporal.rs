//! Timestamp-order checks for functors and Vendler typing of causal pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::functor::Functor;
use crate::id::ObjectId;
use crate::log::{Log, RawData};

/// Start and end ticks of an action. Ticks are opaque ordered integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Interval {
    pub t_start: Option<i64>,
    pub t_end: Option<i64>,
}

impl Interval {
    pub fn new(t_start: i64, t_end: i64) -> Self {
        Interval { t_start: Some(t_start), t_end: Some(t_end) }
    }
}

impl From<&RawData> for Interval {
    fn from(r: &RawData) -> Self {
        Interval { t_start: r.t_start, t_end: r.t_end }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalViolation {
    /// Action required to come first.
    pub earlier: ObjectId,
    pub later: ObjectId,
    pub reason: &'static str,
}

impl fmt::Display for TemporalViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} must not follow {}: {}", self.earlier, self.later, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemporalReport {
    pub ok: bool,
    pub violations: Vec<TemporalViolation>,
    /// Ordered pairs whose check passed.
    pub consistent: usize,
    /// Ordered pairs skipped for lack of timestamps.
    pub indeterminate: usize,
}

impl TemporalReport {
    /// Fraction of determinable pairs that are consistent; 1 when none are.
    pub fn fraction(&self) -> f64 {
        let bad: BTreeSet<(&ObjectId, &ObjectId)> = self.violations.iter().map(|v| (&v.earlier, &v.later)).collect();
        let total = self.consistent + bad.len();
        if total == 0 {
            1.0
        } else {
            self.consistent as f64 / total as f64
        }
    }
}

/// Checks that `f` keeps causes no later than their effects.
///
/// An ordered pair `(u, v)` of mapped e-actions is constrained when `u`
/// causally precedes `v` in `e`, or when their distinct images are so
/// ordered in `s`. A constrained pair needs `t(u) ≤ t(v)` in `e`; if `u`
/// precedes `v` in `e` the s-side ranks of the images must agree as well.
/// Unconstrained pairs may occur in either order.
pub fn check_temporal_consistency(e: &Log, s: &Log, f: &Functor) -> TemporalReport {
    check_with(e, s, &e.causal_descendants(), &s.causal_descendants(), f)
}

pub(crate) type Descendants = BTreeMap<ObjectId, BTreeSet<ObjectId>>;

pub(crate) fn check_with(e: &Log, s: &Log, e_desc: &Descendants, s_desc: &Descendants, f: &Functor) -> TemporalReport {
    let precedes = |desc: &Descendants, a: &ObjectId, b: &ObjectId| {
        desc.get(a).is_some_and(|d| d.contains(b))
    };
    let start = |log: &Log, a: &ObjectId| log.actions.get(a).and_then(|x| x.t_start());
    let mut report = TemporalReport { ok: true, ..Default::default() };
    let mapped: Vec<(&ObjectId, &ObjectId)> = f.action_map.iter().filter(|(a, _)| !a.is_sentinel()).collect();
    for &(u, fu) in &mapped {
        for &(v, fv) in &mapped {
            if u == v {
                continue;
            }
            let e_related = precedes(e_desc, u, v);
            let s_related = fu != fv && precedes(s_desc, fu, fv);
            if !e_related && !s_related {
                continue;
            }
            let mut checked = false;
            let mut failed = false;
            if let (Some(tu), Some(tv)) = (start(e, u), start(e, v)) {
                checked = true;
                if tu > tv {
                    failed = true;
                    let reason = if e_related { "effect precedes its cause" } else { "order reverses the s-log cause order" };
                    report.violations.push(TemporalViolation { earlier: u.clone(), later: v.clone(), reason });
                }
            }
            if e_related && fu != fv {
                if let (Some(ru), Some(rv)) = (start(s, fu), start(s, fv)) {
                    checked = true;
                    if ru > rv {
                        failed = true;
                        report.violations.push(TemporalViolation {
                            earlier: u.clone(),
                            later: v.clone(),
                            reason: "images ranked in reverse order",
                        });
                    }
                }
            }
            match (checked, failed) {
                (false, _) => report.indeterminate += 1,
                (true, false) => report.consistent += 1,
                (true, true) => {}
            }
        }
    }
    report.ok = report.violations.is_empty();
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VendlerClass {
    Activities,
    Status,
    Accomplishments,
    Achievements,
    Indeterminate,
}

impl VendlerClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VendlerClass::Activities => "Activities",
            VendlerClass::Status => "Status",
            VendlerClass::Accomplishments => "Accomplishments",
            VendlerClass::Achievements => "Achievements",
            VendlerClass::Indeterminate => "Indeterminate",
        }
    }
}

/// Start-time relation of effect to cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StartRelation {
    /// Same start.
    A,
    /// Effect starts strictly inside the cause.
    B,
    /// Effect starts at or after the cause ends.
    C,
}

/// End-time relation of effect to cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EndRelation {
    /// Same end.
    A,
    /// Effect ends before the cause.
    B,
    /// Effect ends after the cause.
    C,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VendlerCell {
    pub column: StartRelation,
    pub row: EndRelation,
    pub primary: Vec<VendlerClass>,
    /// Parenthesized readings of the cell.
    pub alternative: Vec<VendlerClass>,
}

impl VendlerCell {
    pub fn classes(&self) -> BTreeSet<VendlerClass> {
        self.primary.iter().chain(&self.alternative).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemporalError {
    #[error("interval lacks a start or end time")]
    MissingTimestamp,
    #[error("effect starts before its cause")]
    EffectBeforeCause,
    #[error("interval ends before it starts")]
    BadInterval,
}

fn bounds(i: Interval) -> Result<(i64, i64), TemporalError> {
    match (i.t_start, i.t_end) {
        (Some(s), Some(e)) if s <= e => Ok((s, e)),
        (Some(_), Some(_)) => Err(TemporalError::BadInterval),
        _ => Err(TemporalError::MissingTimestamp),
    }
}

/// Table cell for a cause/effect pair of intervals.
pub fn vendler_type(cause: Interval, effect: Interval) -> Result<VendlerCell, TemporalError> {
    use VendlerClass::*;
    let (cs, ce) = bounds(cause)?;
    let (es, ee) = bounds(effect)?;
    let column = if es == cs {
        StartRelation::A
    } else if es < cs {
        return Err(TemporalError::EffectBeforeCause);
    } else if es < ce {
        StartRelation::B
    } else {
        StartRelation::C
    };
    let row = match ee.cmp(&ce) {
        std::cmp::Ordering::Equal => EndRelation::A,
        std::cmp::Ordering::Less => EndRelation::B,
        std::cmp::Ordering::Greater => EndRelation::C,
    };
    let (primary, alternative) = match (column, row) {
        (StartRelation::A, EndRelation::B) => (vec![Accomplishments, Achievements], vec![]),
        (StartRelation::A, _) => (vec![Indeterminate], vec![]),
        (StartRelation::B, _) => (vec![Activities], vec![Status]),
        (StartRelation::C, _) => (vec![Status], vec![Activities]),
    };
    Ok(VendlerCell { column, row, primary, alternative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor::{Functor, FunctorDirection};
    use crate::id::oid;
    use crate::log::{build_elog, build_slog, Action, Participant};

    fn fig14_elog(tb: i64, tc: i64) -> Log {
        build_elog(
            oid("e"),
            vec![
                Action::new(oid("A"), oid("P")).cause_n(oid("B")).at(0),
                Action::new(oid("B"), oid("P")).at(tb),
                Action::new(oid("C"), oid("P")).cause_s(oid("A")).at(tc),
            ],
            vec![Participant::plain(oid("P"))],
        )
        .unwrap()
    }

    fn functor(pairs: &[(&str, &str)]) -> Functor {
        Functor {
            src: oid("e"),
            dst: oid("s"),
            action_map: pairs.iter().map(|(a, b)| (oid(a), oid(b))).collect(),
            participant_map: BTreeMap::from([(oid("P"), oid("Q"))]),
            direction: FunctorDirection::EToS,
        }
    }

    #[test]
    fn fig14_true_and_false() {
        let e = fig14_elog(1, 2);
        let branching = build_slog(
            oid("s"),
            vec![
                Action::new(oid("X"), oid("Q")).cause_n(oid("Y")).at(0),
                Action::new(oid("Y"), oid("Q")).at(1),
                Action::new(oid("Z"), oid("Q")).cause_s(oid("X")).at(1),
            ],
            vec![Participant::class(oid("Q"))],
        )
        .unwrap();
        let good = check_temporal_consistency(&e, &branching, &functor(&[("A", "X"), ("B", "Y"), ("C", "Z")]));
        assert!(good.ok);
        assert_eq!(good.consistent, 2);

        let chain = build_slog(
            oid("s"),
            vec![
                Action::new(oid("X"), oid("Q")).cause_n(oid("Y")).at(0),
                Action::new(oid("Y"), oid("Q")).cause_n(oid("Z")).at(1),
                Action::new(oid("Z"), oid("Q")).at(2),
            ],
            vec![Participant::class(oid("Q"))],
        )
        .unwrap();
        let bad = check_temporal_consistency(&e, &chain, &functor(&[("A", "X"), ("C", "Y"), ("B", "Z")]));
        assert!(!bad.ok);
        assert_eq!(bad.violations.len(), 1);
        assert_eq!((bad.violations[0].earlier.as_str(), bad.violations[0].later.as_str()), ("C", "B"));
        assert!((bad.fraction() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn missing_timestamps_are_indeterminate() {
        let e = build_elog(
            oid("e"),
            vec![Action::new(oid("A"), oid("P")).cause_n(oid("B")), Action::new(oid("B"), oid("P"))],
            vec![Participant::plain(oid("P"))],
        )
        .unwrap();
        let r = check_temporal_consistency(&e, &e, &functor(&[("A", "A"), ("B", "B")]));
        assert!(r.ok);
        assert_eq!((r.consistent, r.indeterminate), (0, 1));
        assert_eq!(r.fraction(), 1.0);
    }

    #[test]
    fn table_cells() {
        use VendlerClass::*;
        let ab = vendler_type(Interval::new(0, 10), Interval::new(0, 5)).unwrap();
        assert_eq!((ab.column, ab.row), (StartRelation::A, EndRelation::B));
        assert_eq!(ab.classes(), BTreeSet::from([Accomplishments, Achievements]));

        let aa = vendler_type(Interval::new(3, 3), Interval::new(3, 3)).unwrap();
        assert_eq!((aa.column, aa.row), (StartRelation::A, EndRelation::A));
        assert_eq!(aa.classes(), BTreeSet::from([Indeterminate]));

        let b = vendler_type(Interval::new(0, 10), Interval::new(4, 12)).unwrap();
        assert_eq!((b.column, b.row), (StartRelation::B, EndRelation::C));
        assert_eq!((b.primary.clone(), b.alternative.clone()), (vec![Activities], vec![Status]));

        let c = vendler_type(Interval::new(0, 10), Interval::new(10, 12)).unwrap();
        assert_eq!(c.column, StartRelation::C);
        assert_eq!(c.primary, vec![Status]);
    }

    #[test]
    fn vendler_errors() {
        let none = Interval { t_start: Some(1), t_end: None };
        assert_eq!(vendler_type(none, Interval::new(1, 2)), Err(TemporalError::MissingTimestamp));
        assert_eq!(vendler_type(Interval::new(5, 6), Interval::new(1, 2)), Err(TemporalError::EffectBeforeCause));
        assert_eq!(vendler_type(Interval::new(5, 4), Interval::new(5, 6)), Err(TemporalError::BadInterval));
    }
}
