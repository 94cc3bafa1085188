//! Be-logs: static relations expressed by be-like verbs, and the similarity,
//! membership and compatibility measures derived from them.
//!
//! Similarity edges are directed and never symmetrized or closed
//! transitively. Characteristic similarity of `a` to `b` is the share of
//! `b`'s characteristics that `a` also has; when `b` has no characteristics
//! the ratio is taken to be 1, so characteristic-free classes behave as a top
//! element of the membership preorder.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::id::ObjectId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BeVerbType {
    /// "He is Bob."
    Be1,
    /// "Bob is (the same as) Mike."
    Be2,
    /// "Bob is a human."
    Be3,
    /// "The apple is red."
    Be4,
    /// "The car is Daddy's."
    Belong,
    /// "Mango resembles apple."
    Similar,
    /// "Mango evokes apple."
    Association,
}

impl BeVerbType {
    pub const ALL: [BeVerbType; 7] = [
        BeVerbType::Be1,
        BeVerbType::Be2,
        BeVerbType::Be3,
        BeVerbType::Be4,
        BeVerbType::Belong,
        BeVerbType::Similar,
        BeVerbType::Association,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BeVerbType::Be1 => "be1",
            BeVerbType::Be2 => "be2",
            BeVerbType::Be3 => "be3",
            BeVerbType::Be4 => "be4",
            BeVerbType::Belong => "belong",
            BeVerbType::Similar => "similar",
            BeVerbType::Association => "association",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        BeVerbType::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for BeVerbType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeRelation {
    pub kind: BeVerbType,
    pub source: ObjectId,
    pub target: ObjectId,
    /// Strength in (0, 1].
    pub weight: f64,
    pub label: Option<String>,
}

impl BeRelation {
    pub fn new(kind: BeVerbType, source: ObjectId, target: ObjectId) -> Self {
        BeRelation { kind, source, target, weight: 1.0, label: None }
    }

    pub fn weighted(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    fn key(&self) -> (BeVerbType, ObjectId, ObjectId) {
        (self.kind, self.source.clone(), self.target.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeLogError {
    #[error("{0} relation from `{1}` to itself")]
    SelfRelation(BeVerbType, ObjectId),
    #[error("weight {0} outside (0, 1]")]
    BadWeight(f64),
    #[error("duplicate {0} relation `{1}` -> `{2}`")]
    Duplicate(BeVerbType, ObjectId, ObjectId),
    #[error("empty class")]
    EmptyClass,
    #[error("`{0}` is not in the class")]
    NotInClass(ObjectId),
}

/// How [`BeLog::mapping_compatibility_with`] combines its evidence channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatPolicy {
    pub aggregate: Aggregate,
    /// Multiplier applied to association weights.
    pub association_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Max,
    Mean,
}

impl Default for CompatPolicy {
    fn default() -> Self {
        CompatPolicy { aggregate: Aggregate::Max, association_scale: 1.0 }
    }
}

/// A set of be-relations indexed by `(type, source)` and `(type, target)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeLog {
    relations: BTreeMap<(BeVerbType, ObjectId, ObjectId), BeRelation>,
    by_source: BTreeMap<(BeVerbType, ObjectId), BTreeSet<ObjectId>>,
    by_target: BTreeMap<(BeVerbType, ObjectId), BTreeSet<ObjectId>>,
}

impl BeLog {
    pub fn new() -> Self {
        BeLog::default()
    }

    pub fn from_relations(relations: impl IntoIterator<Item = BeRelation>) -> Result<Self, BeLogError> {
        let mut b = BeLog::new();
        for r in relations {
            b.insert(r)?;
        }
        Ok(b)
    }

    pub fn insert(&mut self, r: BeRelation) -> Result<(), BeLogError> {
        if r.source == r.target && r.kind != BeVerbType::Be1 {
            return Err(BeLogError::SelfRelation(r.kind, r.source));
        }
        if !(r.weight > 0.0 && r.weight <= 1.0) {
            return Err(BeLogError::BadWeight(r.weight));
        }
        let key = r.key();
        if self.relations.contains_key(&key) {
            return Err(BeLogError::Duplicate(r.kind, r.source, r.target));
        }
        self.by_source.entry((r.kind, r.source.clone())).or_default().insert(r.target.clone());
        self.by_target.entry((r.kind, r.target.clone())).or_default().insert(r.source.clone());
        self.relations.insert(key, r);
        Ok(())
    }

    pub fn remove(&mut self, kind: BeVerbType, source: &ObjectId, target: &ObjectId) -> Option<BeRelation> {
        let r = self.relations.remove(&(kind, source.clone(), target.clone()))?;
        if let Some(s) = self.by_source.get_mut(&(kind, source.clone())) {
            s.remove(target);
        }
        if let Some(s) = self.by_target.get_mut(&(kind, target.clone())) {
            s.remove(source);
        }
        Some(r)
    }

    /// Relations in canonical `(type, source, target)` order.
    pub fn relations(&self) -> impl Iterator<Item = &BeRelation> {
        self.relations.values()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn get(&self, kind: BeVerbType, source: &ObjectId, target: &ObjectId) -> Option<&BeRelation> {
        self.relations.get(&(kind, source.clone(), target.clone()))
    }

    pub fn targets(&self, kind: BeVerbType, source: &ObjectId) -> BTreeSet<ObjectId> {
        self.by_source.get(&(kind, source.clone())).cloned().unwrap_or_default()
    }

    pub fn sources(&self, kind: BeVerbType, target: &ObjectId) -> BTreeSet<ObjectId> {
        self.by_target.get(&(kind, target.clone())).cloned().unwrap_or_default()
    }

    /// Every object mentioned by some relation.
    pub fn objects(&self) -> BTreeSet<ObjectId> {
        self.relations.values().flat_map(|r| [r.source.clone(), r.target.clone()]).collect()
    }

    /// Ch(a): targets of characteristic relations from `a`.
    pub fn characteristics(&self, a: &ObjectId) -> BTreeSet<ObjectId> {
        self.targets(BeVerbType::Be4, a)
    }

    /// `(|Ch(a) ∩ Ch(b)|, |Ch(b)|)`.
    pub fn similarity_ratio(&self, a: &ObjectId, b: &ObjectId) -> (usize, usize) {
        let (ca, cb) = (self.characteristics(a), self.characteristics(b));
        (ca.intersection(&cb).count(), cb.len())
    }

    /// Similarity of `a` to `b` by characteristics, in [0, 1]. Vacuously 1
    /// when `b` has no characteristics.
    pub fn similarity_by_characteristics(&self, a: &ObjectId, b: &ObjectId) -> f64 {
        match self.similarity_ratio(a, b) {
            (_, 0) => 1.0,
            (n, d) => n as f64 / d as f64,
        }
    }

    /// `a` is a member of `class` when recorded so (Be3) or when it has
    /// every characteristic of `class`. A class without characteristics
    /// gains no members this way.
    pub fn is_member(&self, a: &ObjectId, class: &ObjectId) -> bool {
        let (n, d) = self.similarity_ratio(a, class);
        (d > 0 && n == d) || self.get(BeVerbType::Be3, a, class).is_some()
    }

    /// Membership closed under composition (syllogism): `a` reaches `class`
    /// through a chain of [`BeLog::is_member`] steps over known objects.
    pub fn is_member_transitive(&self, a: &ObjectId, class: &ObjectId) -> bool {
        if self.is_member(a, class) {
            return true;
        }
        let universe = self.objects();
        let mut seen = BTreeSet::from([a.clone()]);
        let mut stack = vec![a.clone()];
        while let Some(x) = stack.pop() {
            for y in &universe {
                if !seen.contains(y) && self.is_member(&x, y) {
                    if y == class {
                        return true;
                    }
                    seen.insert(y.clone());
                    stack.push(y.clone());
                }
            }
        }
        false
    }

    /// Directed similarity used by prototype analysis: an explicit Similar
    /// weight when recorded, otherwise characteristic similarity when `to`
    /// has characteristics, otherwise 0.
    pub fn prototype_similarity(&self, from: &ObjectId, to: &ObjectId) -> f64 {
        if from == to {
            return 1.0;
        }
        if let Some(r) = self.get(BeVerbType::Similar, from, to) {
            return r.weight;
        }
        match self.similarity_ratio(from, to) {
            (_, 0) => 0.0,
            (n, d) => n as f64 / d as f64,
        }
    }

    /// The member receiving the largest total similarity from the other
    /// members; ties go to the smallest id.
    pub fn class_centre(&self, members: &BTreeSet<ObjectId>) -> Result<ObjectId, BeLogError> {
        let mut best: Option<(f64, &ObjectId)> = None;
        for m in members {
            let score: f64 = members.iter().filter(|n| *n != m).map(|n| self.prototype_similarity(n, m)).sum();
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, m));
            }
        }
        best.map(|(_, m)| m.clone()).ok_or(BeLogError::EmptyClass)
    }

    /// `1 - S(member -> centre)`.
    pub fn prototype_distance(
        &self,
        class: &BTreeSet<ObjectId>,
        member: &ObjectId,
        centre: &ObjectId,
    ) -> Result<f64, BeLogError> {
        for x in [member, centre] {
            if !class.contains(x) {
                return Err(BeLogError::NotInClass(x.clone()));
            }
        }
        Ok(1.0 - self.prototype_similarity(member, centre))
    }

    /// The block of the equivalence relation induced by membership of
    /// `class`, restricted to `participants`.
    pub fn equivalence_from_class(&self, class: &ObjectId, participants: &BTreeSet<ObjectId>) -> EquivalenceBlock {
        EquivalenceBlock {
            class: class.clone(),
            members: participants.iter().filter(|p| self.is_member(p, class)).cloned().collect(),
        }
    }

    pub fn mapping_compatibility(&self, x: &ObjectId, y: &ObjectId) -> f64 {
        self.mapping_compatibility_with(x, y, &CompatPolicy::default())
    }

    /// Evidence that `x` may be mapped onto `y`: identity, explicit
    /// identification/equivalence, classification of `x` as `y`, a shared
    /// class, similarity/association weights, and characteristic similarity
    /// (only when `y` has characteristics). 0 without evidence.
    pub fn mapping_compatibility_with(&self, x: &ObjectId, y: &ObjectId, policy: &CompatPolicy) -> f64 {
        if x == y {
            return 1.0;
        }
        let mut channels: Vec<f64> = Vec::new();
        for kind in [BeVerbType::Be1, BeVerbType::Be2, BeVerbType::Be3] {
            if self.get(kind, x, y).is_some() {
                channels.push(1.0);
            }
        }
        if self.get(BeVerbType::Be2, y, x).is_some() {
            channels.push(1.0);
        }
        let shared = self.targets(BeVerbType::Be3, x);
        if !shared.is_empty() && shared.intersection(&self.targets(BeVerbType::Be3, y)).next().is_some() {
            channels.push(1.0);
        }
        if let Some(r) = self.get(BeVerbType::Similar, x, y) {
            channels.push(r.weight);
        }
        if let Some(r) = self.get(BeVerbType::Association, x, y) {
            channels.push((r.weight * policy.association_scale).clamp(0.0, 1.0));
        }
        let (n, d) = self.similarity_ratio(x, y);
        if d > 0 && n > 0 {
            channels.push(n as f64 / d as f64);
        }
        if channels.is_empty() {
            return 0.0;
        }
        match policy.aggregate {
            Aggregate::Max => channels.into_iter().fold(0.0, f64::max),
            Aggregate::Mean => channels.iter().sum::<f64>() / channels.len() as f64,
        }
    }

    /// The Be3 target of `x` with the fewest members; ties by id.
    pub fn narrowest_class(&self, x: &ObjectId) -> Option<ObjectId> {
        self.targets(BeVerbType::Be3, x)
            .into_iter()
            .min_by_key(|c| (self.sources(BeVerbType::Be3, c).len(), c.clone()))
    }
}

/// One block of an equivalence relation: all members are related pairwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceBlock {
    pub class: ObjectId,
    pub members: BTreeSet<ObjectId>,
}

impl EquivalenceBlock {
    pub fn related(&self, x: &ObjectId, y: &ObjectId) -> bool {
        self.members.contains(x) && self.members.contains(y)
    }

    pub fn pairs(&self) -> Vec<(ObjectId, ObjectId)> {
        let mut out = Vec::new();
        for x in &self.members {
            for y in &self.members {
                out.push((x.clone(), y.clone()));
            }
        }
        out
    }
}
