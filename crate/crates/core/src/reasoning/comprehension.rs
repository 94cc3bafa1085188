//! Story comprehension: segmenting a long episode, matching each piece
//! against a scenario library and composing the pieces upward.

use std::collections::{BTreeMap, BTreeSet};

use crate::belog::{BeLog, BeVerbType};
use crate::edit::extract_subepisode;
use crate::functor::{search_functors, Candidate, SearchConfig};
use crate::id::ObjectId;
use crate::log::Log;

use super::ReasoningError;

/// How the story is cut into elemental episodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Segmentation {
    /// Weakly connected components of the causal graph.
    #[default]
    CausalComponents,
    /// Each action with its trivial partner, if any.
    TrivialPairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneMatch {
    pub slog: ObjectId,
    pub candidate: Candidate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    /// `L<level>N<index>`.
    pub id: String,
    pub level: usize,
    pub actions: BTreeSet<ObjectId>,
    pub elog: Log,
    pub matched: Option<SceneMatch>,
    pub children: Vec<String>,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComprehensionTree {
    pub story: ObjectId,
    pub levels: Vec<Vec<TreeNode>>,
}

impl ComprehensionTree {
    pub fn node(&self, id: &str) -> Option<&TreeNode> {
        self.levels.iter().flatten().find(|n| n.id == id)
    }

    /// S-logs matched by the elemental episodes.
    pub fn scenes(&self) -> BTreeSet<ObjectId> {
        self.levels.first().into_iter().flatten().filter_map(|n| n.matched.as_ref().map(|m| m.slog.clone())).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let r = self.find(p);
        self.0[i] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Groups of indices, ordered by their smallest member.
    fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.0.len() {
            let r = self.find(i);
            by_root.entry(r).or_default().push(i);
        }
        by_root.into_values().collect()
    }
}

fn segments(story: &Log, segmentation: Segmentation) -> Vec<BTreeSet<ObjectId>> {
    let order: Vec<ObjectId> = story.canonical_action_order().into_iter().filter(|a| !a.is_sentinel()).collect();
    let index: BTreeMap<&ObjectId, usize> = order.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut uf = UnionFind((0..order.len()).collect());
    for a in &order {
        if let Some(p) = story.mutual_partner(a) {
            uf.union(index[a], index[p]);
        }
    }
    if segmentation == Segmentation::CausalComponents {
        for (c, e) in story.causal_edges() {
            uf.union(index[&c], index[&e]);
        }
    }
    uf.groups().into_iter().map(|g| g.into_iter().map(|i| order[i].clone()).collect()).collect()
}

/// Best partial match of `sub` over the library: an elemental episode may
/// carry detail its scene leaves out.
fn best_match(sub: &Log, library: &[Log], b: &BeLog, cfg: &SearchConfig) -> Option<SceneMatch> {
    let cfg = &SearchConfig { require_injective: false, ..cfg.clone() };
    let mut best: Option<SceneMatch> = None;
    for s in library {
        if let Some(c) = search_functors(sub, s, b, cfg).into_iter().next() {
            if best.as_ref().is_none_or(|m| c.score.total > m.candidate.score.total) {
                best = Some(SceneMatch { slog: s.id.clone(), candidate: c });
            }
        }
    }
    best
}

fn build_node(
    story: &Log,
    level: usize,
    index: usize,
    actions: BTreeSet<ObjectId>,
    library: &[Log],
    b: &BeLog,
    cfg: &SearchConfig,
) -> Result<TreeNode, ReasoningError> {
    let id = format!("L{level}N{index}");
    let mut objects = actions.clone();
    for a in &actions {
        if let Some(w) = &story.actions[a].who {
            if !w.is_sentinel() {
                objects.insert(w.clone());
            }
        }
    }
    let mut elog = extract_subepisode(story, &objects)?;
    elog.id = ObjectId::new(format!("{}.{}", story.id, id)).map_err(|_| ReasoningError::NoAdmissibleFunctor)?;
    let matched = best_match(&elog, library, b, cfg);
    Ok(TreeNode { id, level, actions, elog, matched, children: vec![], parent: None })
}

/// Builds the comprehension tree of `story`. Level 0 holds the elemental
/// episodes; each higher level joins nodes linked by a causal arrow, until
/// nothing joins or `max_depth` levels sit above level 0.
pub fn comprehend(
    story: &Log,
    library: &[Log],
    b: &BeLog,
    cfg: &SearchConfig,
    segmentation: Segmentation,
    max_depth: usize,
) -> Result<ComprehensionTree, ReasoningError> {
    let mut levels = Vec::new();
    let mut level0 = Vec::new();
    for (i, seg) in segments(story, segmentation).into_iter().enumerate() {
        level0.push(build_node(story, 0, i, seg, library, b, cfg)?);
    }
    levels.push(level0);
    let edges = story.causal_edges();
    while levels.len() <= max_depth {
        let level = levels.len();
        let current = levels.last_mut().expect("level 0");
        if current.len() < 2 {
            break;
        }
        let owner: BTreeMap<&ObjectId, usize> =
            current.iter().enumerate().flat_map(|(i, n)| n.actions.iter().map(move |a| (a, i))).collect();
        let mut uf = UnionFind((0..current.len()).collect());
        for (c, e) in &edges {
            if let (Some(&i), Some(&j)) = (owner.get(c), owner.get(e)) {
                uf.union(i, j);
            }
        }
        let groups = uf.groups();
        if groups.len() == current.len() {
            break;
        }
        let mut next = Vec::new();
        for (k, g) in groups.into_iter().enumerate() {
            let actions: BTreeSet<ObjectId> = g.iter().flat_map(|&i| current[i].actions.iter().cloned()).collect();
            let mut node = build_node(story, level, k, actions, library, b, cfg)?;
            for &i in &g {
                current[i].parent = Some(node.id.clone());
                node.children.push(current[i].id.clone());
            }
            next.push(node);
        }
        levels.push(next);
    }
    Ok(ComprehensionTree { story: story.id.clone(), levels })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassScore {
    pub class: ObjectId,
    /// Share of the class's characteristic scenes found in the story.
    pub score: f64,
    /// Set when no scene was matched, so the score carries no evidence.
    pub vacuous: bool,
}

/// Scores each story class (any object with characteristics in `b`) by
/// the share of its characteristic scenes the tree matched. Best first.
pub fn classify_story(tree: &ComprehensionTree, b: &BeLog) -> Vec<ClassScore> {
    let scenes = tree.scenes();
    let classes: BTreeSet<ObjectId> =
        b.relations().filter(|r| r.kind == BeVerbType::Be4).map(|r| r.source.clone()).collect();
    let mut out: Vec<ClassScore> = classes
        .into_iter()
        .map(|class| {
            let ch = b.characteristics(&class);
            let shared = ch.intersection(&scenes).count();
            ClassScore { class, score: shared as f64 / ch.len() as f64, vacuous: scenes.is_empty() }
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.class.cmp(&b.class)));
    out
}
