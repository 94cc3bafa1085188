//! Functor candidates between logs: search, scoring, a brute-force oracle and
//! natural transformations.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::belog::{BeLog, CompatPolicy};
use crate::equations::{adjacency, completeness, CauseMatrices, CompletenessReport, ConversionPair, FunctionMode};
use crate::id::ObjectId;
use crate::log::Log;
use crate::matrix::MatrixError;
use crate::temporal::{check_with, Descendants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FunctorDirection {
    #[default]
    EToS,
    SToE,
}

impl FunctorDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            FunctorDirection::EToS => "e_to_s",
            FunctorDirection::SToE => "s_to_e",
        }
    }
}

/// Object maps of a functor. Sentinels are implicit and map to themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functor {
    pub src: ObjectId,
    pub dst: ObjectId,
    pub action_map: BTreeMap<ObjectId, ObjectId>,
    pub participant_map: BTreeMap<ObjectId, ObjectId>,
    pub direction: FunctorDirection,
}

/// Ordering key: action pairs, then participant pairs.
pub type FunctorKey = (Vec<(ObjectId, ObjectId)>, Vec<(ObjectId, ObjectId)>);

impl Functor {
    pub fn empty(src: ObjectId, dst: ObjectId) -> Functor {
        Functor {
            src,
            dst,
            action_map: BTreeMap::new(),
            participant_map: BTreeMap::new(),
            direction: FunctorDirection::EToS,
        }
    }

    pub fn identity(log: &Log) -> Functor {
        let (action_map, participant_map) = crate::equations::identity_maps(log);
        Functor { src: log.id.clone(), dst: log.id.clone(), action_map, participant_map, direction: FunctorDirection::EToS }
    }

    pub fn key(&self) -> FunctorKey {
        (
            self.action_map.iter().map(|(a, b)| (a.clone(), b.clone())).collect(),
            self.participant_map.iter().map(|(a, b)| (a.clone(), b.clone())).collect(),
        )
    }

    pub fn conversion(&self, e: &CauseMatrices, s: &CauseMatrices) -> Result<ConversionPair, MatrixError> {
        ConversionPair::from_maps(e, s, &self.action_map, &self.participant_map)
    }

    /// Image of an object under either map; sentinels map to themselves.
    pub fn image<'a>(&'a self, x: &'a ObjectId) -> Option<&'a ObjectId> {
        if x.is_sentinel() {
            return Some(x);
        }
        self.action_map.get(x).or_else(|| self.participant_map.get(x))
    }

    fn pairs(&self) -> impl Iterator<Item = (&ObjectId, &ObjectId)> {
        self.action_map.iter().chain(&self.participant_map)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctorError {
    #[error("{0} actions exceed the brute-force limit of {1}")]
    TooLarge(usize, usize),
    #[error("functors do not share source and target")]
    SourceTargetMismatch,
    #[error("weights must be non-negative and sum to 1, got {0:?}")]
    BadWeights([f64; 3]),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub structural: f64,
    pub temporal: f64,
    pub similarity: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { structural: 0.5, temporal: 0.25, similarity: 0.25 }
    }
}

impl Weights {
    pub fn new(structural: f64, temporal: f64, similarity: f64) -> Result<Self, FunctorError> {
        let w = [structural, temporal, similarity];
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(FunctorError::BadWeights(w));
        }
        Ok(Weights { structural, temporal, similarity })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub weights: Weights,
    pub min_compatibility: f64,
    pub max_candidates: usize,
    pub require_surjective: bool,
    pub require_injective: bool,
    /// 0 means exhaustive backtracking.
    pub beam_width: usize,
    /// Composition depth for planning and comprehension.
    pub depth: usize,
    pub compat: CompatPolicy,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            weights: Weights::default(),
            min_compatibility: 0.0,
            max_candidates: 10,
            require_surjective: false,
            require_injective: true,
            beam_width: 0,
            depth: 3,
            compat: CompatPolicy::default(),
        }
    }
}

impl SearchConfig {
    pub fn mode(&self) -> FunctionMode {
        FunctionMode { surjective_required: self.require_surjective, injective_required: self.require_injective }
    }

    /// Exhaustive settings with no result cap.
    pub fn exhaustive() -> Self {
        SearchConfig { max_candidates: usize::MAX, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub structural: f64,
    pub temporal: f64,
    pub similarity: f64,
    pub total: f64,
    pub report: CompletenessReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub functor: Functor,
    pub score: Score,
}

struct Prepared<'a> {
    e: &'a Log,
    s: &'a Log,
    b: &'a BeLog,
    cfg: &'a SearchConfig,
    ecm: CauseMatrices,
    scm: CauseMatrices,
    e_desc: Descendants,
    s_desc: Descendants,
}

impl<'a> Prepared<'a> {
    fn new(e: &'a Log, s: &'a Log, b: &'a BeLog, cfg: &'a SearchConfig) -> Self {
        Prepared {
            e,
            s,
            b,
            cfg,
            ecm: adjacency(e),
            scm: adjacency(s),
            e_desc: e.causal_descendants(),
            s_desc: s.causal_descendants(),
        }
    }

    fn compat(&self, x: &ObjectId, y: &ObjectId) -> f64 {
        self.b.mapping_compatibility_with(x, y, &self.cfg.compat)
    }

    fn score(&self, f: &Functor) -> Result<Score, FunctorError> {
        let p = f.conversion(&self.ecm, &self.scm)?;
        let report = completeness(&self.ecm, &self.scm, &p)?;

        let e_objects: BTreeSet<&ObjectId> =
            self.ecm.actions.iter().chain(&self.ecm.participants).filter(|x| !x.is_sentinel()).collect();
        let s_objects: BTreeSet<&ObjectId> =
            self.scm.actions.iter().chain(&self.scm.participants).filter(|x| !x.is_sentinel()).collect();
        let mapped = f.pairs().filter(|(a, _)| e_objects.contains(a)).count();
        let hit: BTreeSet<&ObjectId> = f.pairs().map(|(_, b)| b).filter(|b| s_objects.contains(b)).collect();
        let denom = e_objects.len() + s_objects.len();
        let coverage = if denom == 0 { 1.0 } else { (mapped + hit.len()) as f64 / denom as f64 };
        let structural =
            if report.is_function { report.structural_passed() as f64 / 4.0 * coverage } else { 0.0 };

        let temporal = check_with(self.e, self.s, &self.e_desc, &self.s_desc, f).fraction();

        let values: Vec<f64> = f.pairs().map(|(a, b)| self.compat(a, b)).collect();
        let similarity = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 };

        let w = &self.cfg.weights;
        let total = w.structural * structural + w.temporal * temporal + w.similarity * similarity;
        Ok(Score { structural, temporal, similarity, total, report })
    }
}

/// Scores a functor from `e` into `s`.
pub fn score_functor(f: &Functor, e: &Log, s: &Log, b: &BeLog, cfg: &SearchConfig) -> Result<Score, FunctorError> {
    Prepared::new(e, s, b, cfg).score(f)
}

/// Ranking order: total descending, then map order.
pub fn rank(candidates: &mut [Candidate]) {
    candidates.sort_by(|x, y| {
        y.score.total.partial_cmp(&x.score.total).unwrap_or(Ordering::Equal).then_with(|| x.functor.key().cmp(&y.functor.key()))
    });
}

#[derive(Clone)]
struct State {
    /// s-action index per e-action position.
    amap: Vec<Option<usize>>,
    /// e-participant index to s-participant index.
    pmap: BTreeMap<usize, usize>,
    compat_sum: f64,
}

struct Search<'a> {
    prep: &'a Prepared<'a>,
    e_actions: Vec<usize>,
    s_actions: Vec<usize>,
    e_parts: Vec<usize>,
    s_parts: Vec<usize>,
    e_who: Vec<Option<usize>>,
    s_who: Vec<Option<usize>>,
    e_nobody: Option<usize>,
    s_nobody: Option<usize>,
    compat_a: Vec<Vec<f64>>,
    compat_p: Vec<Vec<f64>>,
}

impl<'a> Search<'a> {
    fn new(prep: &'a Prepared<'a>) -> Self {
        let (ecm, scm) = (&prep.ecm, &prep.scm);
        let content = |ids: &[ObjectId]| -> Vec<usize> { (0..ids.len()).filter(|&i| !ids[i].is_sentinel()).collect() };
        let e_actions = content(&ecm.actions);
        let s_actions = content(&scm.actions);
        let e_parts = content(&ecm.participants);
        let s_parts = content(&scm.participants);
        let compat_a = ecm.actions.iter().map(|a| scm.actions.iter().map(|x| prep.compat(a, x)).collect()).collect();
        let compat_p =
            ecm.participants.iter().map(|p| scm.participants.iter().map(|q| prep.compat(p, q)).collect()).collect();
        Search {
            prep,
            e_who: (0..ecm.actions.len()).map(|a| ecm.who_of(a)).collect(),
            s_who: (0..scm.actions.len()).map(|a| scm.who_of(a)).collect(),
            e_nobody: ecm.participant_index(&ObjectId::nobody()),
            s_nobody: scm.participant_index(&ObjectId::nobody()),
            e_actions,
            s_actions,
            e_parts,
            s_parts,
            compat_a,
            compat_p,
        }
    }

    fn min(&self) -> f64 {
        self.prep.cfg.min_compatibility
    }

    fn allow_unmapped(&self) -> bool {
        !self.prep.cfg.require_injective
    }

    /// Whether mapping e-action `ia` onto `ix` keeps every already mapped
    /// pair's converted cause closure inside the s-side closure.
    fn causal_ok(&self, st: &State, ia: usize, ix: usize) -> bool {
        let (ecm, scm) = (&self.prep.ecm, &self.prep.scm);
        let mapped = st.amap.iter().enumerate().filter_map(|(k, m)| m.map(|iy| (self.e_actions[k], iy)));
        for (ib, iy) in mapped.chain(std::iter::once((ia, ix))) {
            for (er, sr) in [(&ecm.s_reach, &scm.s_reach), (&ecm.n_reach, &scm.n_reach)] {
                if er.get(ia, ib) && ix != iy && !sr.get(ix, iy) {
                    return false;
                }
                if er.get(ib, ia) && ix != iy && !sr.get(iy, ix) {
                    return false;
                }
            }
        }
        true
    }

    fn expand_action(&self, st: &State, k: usize) -> Vec<State> {
        let ia = self.e_actions[k];
        let mut out = Vec::new();
        for &ix in &self.s_actions {
            let c = self.compat_a[ia][ix];
            if c < self.min() {
                continue;
            }
            let mut pmap = st.pmap.clone();
            let mut sum = st.compat_sum + c;
            match (self.e_who[ia], self.s_who[ix]) {
                (Some(p), Some(q)) if Some(p) == self.e_nobody => {
                    if Some(q) != self.s_nobody {
                        continue;
                    }
                }
                (Some(p), Some(q)) => {
                    if Some(q) == self.s_nobody {
                        continue;
                    }
                    match pmap.get(&p) {
                        Some(&q0) if q0 != q => continue,
                        Some(_) => {}
                        None => {
                            let cp = self.compat_p[p][q];
                            if cp < self.min() {
                                continue;
                            }
                            sum += cp;
                            pmap.insert(p, q);
                        }
                    }
                }
                (None, None) => {}
                _ => continue,
            }
            if !self.causal_ok(st, ia, ix) {
                continue;
            }
            let mut amap = st.amap.clone();
            amap.push(Some(ix));
            out.push(State { amap, pmap, compat_sum: sum });
        }
        if self.allow_unmapped() {
            let mut amap = st.amap.clone();
            amap.push(None);
            out.push(State { amap, pmap: st.pmap.clone(), compat_sum: st.compat_sum });
        }
        out
    }

    fn free_participants(&self, st: &State) -> Vec<usize> {
        self.e_parts.iter().copied().filter(|p| !st.pmap.contains_key(p)).collect()
    }

    fn expand_participant(&self, st: &State, p: usize) -> Vec<State> {
        let mut out = Vec::new();
        for &q in &self.s_parts {
            let c = self.compat_p[p][q];
            if c < self.min() {
                continue;
            }
            let mut next = st.clone();
            next.pmap.insert(p, q);
            next.compat_sum += c;
            out.push(next);
        }
        if self.allow_unmapped() {
            // Marks `p` as decided without mapping it.
            let mut next = st.clone();
            next.pmap.insert(p, usize::MAX);
            out.push(next);
        }
        out
    }

    fn to_functor(&self, st: &State) -> Functor {
        let (ecm, scm) = (&self.prep.ecm, &self.prep.scm);
        let mut f = Functor::empty(self.prep.e.id.clone(), self.prep.s.id.clone());
        for (k, m) in st.amap.iter().enumerate() {
            if let Some(ix) = m {
                f.action_map.insert(ecm.actions[self.e_actions[k]].clone(), scm.actions[*ix].clone());
            }
        }
        for (&p, &q) in &st.pmap {
            if q != usize::MAX && Some(p) != self.e_nobody {
                f.participant_map.insert(ecm.participants[p].clone(), scm.participants[q].clone());
            }
        }
        f
    }

    fn finish(&self, st: &State, out: &mut Vec<Candidate>) -> Result<(), FunctorError> {
        if st.amap.iter().all(Option::is_none) {
            return Ok(());
        }
        let functor = self.to_functor(st);
        let score = self.prep.score(&functor)?;
        if score.report.satisfies(self.prep.cfg.mode()) {
            out.push(Candidate { functor, score });
        }
        Ok(())
    }

    fn dfs(&self, st: State, out: &mut Vec<Candidate>) -> Result<(), FunctorError> {
        let k = st.amap.len();
        if k < self.e_actions.len() {
            for next in self.expand_action(&st, k) {
                self.dfs(next, out)?;
            }
            return Ok(());
        }
        match self.free_participants(&st).first() {
            Some(&p) => {
                for next in self.expand_participant(&st, p) {
                    self.dfs(next, out)?;
                }
                Ok(())
            }
            None => self.finish(&st, out),
        }
    }

    fn beam(&self, width: usize, out: &mut Vec<Candidate>) -> Result<(), FunctorError> {
        let mut layer = vec![self.root()];
        loop {
            let mut next = Vec::new();
            let mut done = Vec::new();
            for st in &layer {
                let k = st.amap.len();
                if k < self.e_actions.len() {
                    next.extend(self.expand_action(st, k));
                } else if let Some(&p) = self.free_participants(st).first() {
                    next.extend(self.expand_participant(st, p));
                } else {
                    done.push(st.clone());
                }
            }
            for st in &done {
                self.finish(st, out)?;
            }
            if next.is_empty() {
                return Ok(());
            }
            next.sort_by(|x, y| {
                y.compat_sum
                    .partial_cmp(&x.compat_sum)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| (&x.amap, &x.pmap).cmp(&(&y.amap, &y.pmap)))
            });
            next.truncate(width);
            layer = next;
        }
    }

    fn root(&self) -> State {
        let mut pmap = BTreeMap::new();
        if let (Some(p), Some(q)) = (self.e_nobody, self.s_nobody) {
            pmap.insert(p, q);
        }
        State { amap: Vec::new(), pmap, compat_sum: 0.0 }
    }
}

/// Ranked functor candidates from `e` into `s`.
///
/// Actions are mapped in canonical causal order. Each mapping fixes the
/// image of the performer; a mapping is abandoned as soon as a converted
/// cause arrow has no counterpart in `s` or a compatibility falls below the
/// threshold. Every returned candidate passes the function, zero-column,
/// performer and cause checks plus the surjectivity and injectivity
/// requirements of `cfg`.
pub fn search_functors(e: &Log, s: &Log, b: &BeLog, cfg: &SearchConfig) -> Vec<Candidate> {
    let prep = Prepared::new(e, s, b, cfg);
    let search = Search::new(&prep);
    let mut out = Vec::new();
    let run = if cfg.beam_width == 0 { search.dfs(search.root(), &mut out) } else { search.beam(cfg.beam_width, &mut out) };
    run.expect("maps built from the logs' own ids");
    rank(&mut out);
    out.truncate(cfg.max_candidates);
    out
}

/// Largest action count accepted by [`brute_force_functors`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Every total object map from `e` into `s` that passes the completeness
/// rules required by `cfg`, in map order. Only meant as a test oracle.
pub fn brute_force_functors(e: &Log, s: &Log, b: &BeLog, cfg: &SearchConfig) -> Result<Vec<Functor>, FunctorError> {
    let ea = e.content_action_ids();
    let sa = s.content_action_ids();
    for n in [ea.len(), sa.len()] {
        if n > BRUTE_FORCE_LIMIT {
            return Err(FunctorError::TooLarge(n, BRUTE_FORCE_LIMIT));
        }
    }
    let ep = e.content_participants();
    let sp = s.content_participants();
    let (ecm, scm) = (adjacency(e), adjacency(s));
    let mut out = Vec::new();
    if ea.is_empty() || sa.is_empty() || (!ep.is_empty() && sp.is_empty()) {
        return Ok(out);
    }
    let compat = |x: &ObjectId, y: &ObjectId| b.mapping_compatibility_with(x, y, &cfg.compat);
    let mut a_digits = vec![0usize; ea.len()];
    loop {
        let action_map: BTreeMap<ObjectId, ObjectId> =
            ea.iter().zip(&a_digits).map(|(a, &i)| (a.clone(), sa[i].clone())).collect();
        let mut p_digits = vec![0usize; ep.len()];
        loop {
            let participant_map: BTreeMap<ObjectId, ObjectId> =
                ep.iter().zip(&p_digits).map(|(p, &i)| (p.clone(), sp[i].clone())).collect();
            let f = Functor {
                src: e.id.clone(),
                dst: s.id.clone(),
                action_map: action_map.clone(),
                participant_map,
                direction: FunctorDirection::EToS,
            };
            if f.pairs().all(|(x, y)| compat(x, y) >= cfg.min_compatibility) {
                let report = completeness(&ecm, &scm, &f.conversion(&ecm, &scm)?)?;
                if report.satisfies(cfg.mode()) {
                    out.push(f);
                }
            }
            if !odometer(&mut p_digits, sp.len()) {
                break;
            }
        }
        if !odometer(&mut a_digits, sa.len()) {
            break;
        }
    }
    Ok(out)
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Components of a natural transformation: for each source object, the
/// endpoints `(F(x), G(x))` of its connecting arrow in the target.
pub type NaturalTransformation = BTreeMap<ObjectId, (ObjectId, ObjectId)>;

/// Reachability through performer and cause arrows plus identities, with
/// arrows into sentinels left out.
pub(crate) fn reach(log: &Log) -> BTreeMap<ObjectId, BTreeSet<ObjectId>> {
    let mut succ: BTreeMap<ObjectId, Vec<ObjectId>> = BTreeMap::new();
    for a in log.content_actions() {
        for t in [&a.who, &a.cause_s, &a.cause_n].into_iter().flatten() {
            if !t.is_sentinel() && *t != a.id {
                succ.entry(a.id.clone()).or_default().push(t.clone());
            }
        }
    }
    let objects: Vec<ObjectId> = log.actions.keys().chain(log.participants.keys()).cloned().collect();
    let mut out = BTreeMap::new();
    for o in objects {
        let mut seen = BTreeSet::from([o.clone()]);
        let mut stack = vec![o.clone()];
        while let Some(x) = stack.pop() {
            for y in succ.get(&x).into_iter().flatten() {
                if seen.insert(y.clone()) {
                    stack.push(y.clone());
                }
            }
        }
        out.insert(o, seen);
    }
    out
}

/// Looks for a natural transformation from `f` to `g`, both functors from
/// `source` into `target`.
///
/// The logs are read as thin categories: an arrow exists when the target is
/// reachable and parallel arrows are equal. A component for `x` exists when
/// `G(x)` is reachable from `F(x)`; the squares then commute as soon as both
/// functors carry every source arrow onto a reachable pair.
pub fn natural_transformation(
    f: &Functor,
    g: &Functor,
    source: &Log,
    target: &Log,
) -> Result<Option<NaturalTransformation>, FunctorError> {
    if f.src != g.src || f.dst != g.dst || f.src != source.id || f.dst != target.id {
        return Err(FunctorError::SourceTargetMismatch);
    }
    let src_objects = |h: &Functor| -> BTreeSet<ObjectId> { h.pairs().map(|(a, _)| a.clone()).collect() };
    if src_objects(f) != src_objects(g) {
        return Ok(None);
    }
    let r = reach(target);
    let reaches = |x: &ObjectId, y: &ObjectId| r.get(x).is_some_and(|s| s.contains(y));
    let mut eta = NaturalTransformation::new();
    for (x, fx) in f.pairs() {
        let gx = g.image(x).expect("same domain");
        if !reaches(fx, gx) {
            return Ok(None);
        }
        eta.insert(x.clone(), (fx.clone(), gx.clone()));
    }
    for (x, ys) in reach(source) {
        for y in ys {
            for h in [f, g] {
                if let (Some(hx), Some(hy)) = (h.image(&x), h.image(&y)) {
                    if !hx.is_sentinel() && !hy.is_sentinel() && !reaches(hx, hy) {
                        return Ok(None);
                    }
                }
            }
        }
    }
    Ok(Some(eta))
}
