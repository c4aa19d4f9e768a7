//! Causal coverage `Cov⁻` / `Cov⁺` on finite frames.
//!
//! The search walks target paths backwards from their anchor step. Whether a
//! path can be locally refined only depends on the current head step and, for
//! each candidate endpoint `W`, on the current restricted step together with
//! the ⊆-minimal restricted steps seen so far. Paths are therefore folded into
//! these states and explored breadth first, so repeated states are pruned and
//! a closed state space settles every path length at once.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::locale::{OrderedLocale, Universe};
use crate::paths::{
    make_path, refines_steps, restrict_future, restrict_past, FamilyMember,
    LocalRefinementFamily, Path, PathError, Side,
};
use crate::space::{canon_cmp, subset, FiniteSpace, Mask, SpaceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `A ∈ Cov⁻(U)`: paths landing in `U` are refined towards the past.
    Below,
    /// `B ∈ Cov⁺(U)`: paths starting in `U` are refined towards the future.
    Above,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Below => "below",
            Direction::Above => "above",
        }
    }

    pub fn side(self) -> Side {
        match self {
            Direction::Below => Side::Past,
            Direction::Above => Side::Future,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverageError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("bounds must be positive")]
    ZeroBound,
    #[error("{0:#x} is not an open of the frame")]
    NotOpen(Mask),
    #[error("the step universe is empty")]
    NoSteps,
}

#[derive(Debug, Clone)]
pub struct CoverageConfig {
    pub steps: Universe,
    /// `None` means `2·|opens|`.
    pub max_target_path_len: Option<usize>,
    /// `None` means `(N+2)·(|opens|+1)` for a target of length `N+1`.
    pub max_refinement_len: Option<usize>,
    /// Cap on explored target states.
    pub budget: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            steps: Universe::All,
            max_target_path_len: None,
            max_refinement_len: None,
            budget: crate::default_budget(),
        }
    }
}

impl CoverageConfig {
    pub fn with_basis(mut self, basis: Vec<Mask>) -> Self {
        self.steps = Universe::Explicit(basis);
        self
    }

    pub fn with_target_len(mut self, n: usize) -> Self {
        self.max_target_path_len = Some(n);
        self
    }

    pub fn with_refinement_len(mut self, n: usize) -> Self {
        self.max_refinement_len = Some(n);
        self
    }

    pub fn with_budget(mut self, b: u64) -> Self {
        self.budget = b;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Covered,
    NotCovered,
    Unknown,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Covered => "covered",
            VerdictKind::NotCovered => "not-covered",
            VerdictKind::Unknown => "unknown",
        }
    }
}

/// Why a region fails to cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotCoveredWitness {
    /// `A ⋢ ⇓U` (or `B ⋢ ⇑U`); carries the cone.
    OutsideCone { cone: Mask },
    /// A target path none of whose qualifying endpoints join to its anchor.
    Path { path: Path, qualifying_join: Mask, refinement_bound: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownReason {
    Budget { states: u64 },
    RefinementBound { path: Path, refinement_bound: usize },
}

/// One row of a cover certificate: endpoint `W`, the ⊆-minimal restricted
/// steps it must refine, and a refining path that inhabits the region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateEntry {
    pub endpoint: Mask,
    pub restricted: Vec<Mask>,
    pub refinement: Path,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverCertificate {
    pub direction: Direction,
    pub region: Mask,
    pub entries: Vec<CertificateEntry>,
}

impl CoverCertificate {
    /// Assemble the local refinement family for a concrete target path from
    /// the certificate table.
    pub fn family_for(
        &self,
        l: &OrderedLocale,
        p: &Path,
        steps: &[Mask],
    ) -> Option<LocalRefinementFamily> {
        let table: HashMap<(Mask, &[Mask]), &Path> = self
            .entries
            .iter()
            .map(|e| ((e.endpoint, e.restricted.as_slice()), &e.refinement))
            .collect();
        let internal = to_internal(self.direction, p.steps());
        let anchor = *internal.last()?;
        let mut members = Vec::new();
        for &w in steps.iter().filter(|&&w| w != 0 && subset(w, anchor)) {
            let Some(t) = restricted_minimal(l, self.direction, &internal, w) else {
                continue;
            };
            if let Some(q) = table.get(&(w, t.as_slice())) {
                let r = restricted_internal(l, self.direction, &internal, w);
                let witness = refines_steps(
                    &to_internal(self.direction, q.steps()),
                    &r,
                )?;
                let witness = match self.direction {
                    Direction::Below => witness,
                    Direction::Above => {
                        let n = q.len();
                        let mut a: Vec<usize> =
                            witness.assignment.iter().map(|&m| n - 1 - m).collect();
                        a.reverse();
                        crate::paths::RefinementWitness { assignment: a }
                    }
                };
                members.push(FamilyMember { endpoint: w, path: (*q).clone(), witness });
            }
        }
        let join = members.iter().fold(0, |a, m| a | m.endpoint);
        (join == anchor).then(|| LocalRefinementFamily {
            side: self.direction.side(),
            target: p.clone(),
            members,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageVerdict {
    pub direction: Direction,
    pub region: Mask,
    pub target: Mask,
    pub kind: VerdictKind,
    pub max_target_path_len: usize,
    /// `None` when the per-path default formula applied.
    pub max_refinement_len: Option<usize>,
    /// True when every target path, of any length, was settled.
    pub exhaustive: bool,
    pub states: u64,
    pub certificate: Option<CoverCertificate>,
    pub witness: Option<NotCoveredWitness>,
    pub unknown: Option<UnknownReason>,
}

impl CoverageVerdict {
    pub fn is_covered(&self) -> bool {
        self.kind == VerdictKind::Covered
    }

    pub fn to_json(&self, space: &FiniteSpace) -> Value {
        let witness = self.witness.as_ref().map(|w| match w {
            NotCoveredWitness::OutsideCone { cone } => json!({
                "kind": "outside-cone",
                "cone": space.labels_of(*cone),
            }),
            NotCoveredWitness::Path { path, qualifying_join, refinement_bound } => json!({
                "kind": "path",
                "path": path.to_json(space),
                "qualifying_join": space.labels_of(*qualifying_join),
                "refinement_bound": refinement_bound,
            }),
        });
        let unknown = self.unknown.as_ref().map(|u| match u {
            UnknownReason::Budget { states } => json!({"kind": "budget", "states": states}),
            UnknownReason::RefinementBound { path, refinement_bound } => json!({
                "kind": "refinement-bound",
                "path": path.to_json(space),
                "refinement_bound": refinement_bound,
            }),
        });
        let certificate = self.certificate.as_ref().map(|c| {
            c.entries
                .iter()
                .map(|e| {
                    json!({
                        "endpoint": space.labels_of(e.endpoint),
                        "restricted": e.restricted.iter().map(|&m| space.labels_of(m)).collect::<Vec<_>>(),
                        "refinement": e.refinement.to_json(space),
                    })
                })
                .collect::<Vec<_>>()
        });
        json!({
            "direction": self.direction.name(),
            "region": space.labels_of(self.region),
            "target": space.labels_of(self.target),
            "verdict": self.kind.name(),
            "bounds": {
                "max_target_path_len": self.max_target_path_len,
                "max_refinement_len": self.max_refinement_len
                    .map(|n| json!(n))
                    .unwrap_or(json!("(len+1)*(|steps|+1)")),
            },
            "exhaustive": self.exhaustive,
            "states": self.states,
            "witness": witness,
            "unknown": unknown,
            "certificate": certificate,
        })
    }
}

/// Result of searching one endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Qual {
    /// Shortest refinement in internal order (anchor last).
    Yes(Vec<Mask>),
    No,
}

fn to_internal(d: Direction, steps: &[Mask]) -> Vec<Mask> {
    let mut v = steps.to_vec();
    if d == Direction::Above {
        v.reverse();
    }
    v
}

fn from_internal(d: Direction, mut steps: Vec<Mask>) -> Path {
    if d == Direction::Above {
        steps.reverse();
    }
    Path::raw(steps)
}

fn toward(l: &OrderedLocale, d: Direction, m: Mask) -> Mask {
    match d {
        Direction::Below => l.cone_down(m),
        Direction::Above => l.cone_up(m),
    }
}

/// `x` may precede `y` on a path whose anchor comes last.
fn before(l: &OrderedLocale, d: Direction, x: Mask, y: Mask) -> bool {
    match d {
        Direction::Below => l.leq(x, y),
        Direction::Above => l.leq(y, x),
    }
}

fn restricted_internal(l: &OrderedLocale, d: Direction, internal: &[Mask], w: Mask) -> Vec<Mask> {
    let mut out = vec![0; internal.len()];
    let mut cur = w;
    for n in (0..internal.len()).rev() {
        if n + 1 < internal.len() {
            cur = internal[n] & toward(l, d, cur);
        }
        out[n] = cur;
    }
    out
}

/// Minimal restricted steps, or `None` if the restriction breaks down.
fn restricted_minimal(
    l: &OrderedLocale,
    d: Direction,
    internal: &[Mask],
    w: Mask,
) -> Option<Vec<Mask>> {
    let r = restricted_internal(l, d, internal, w);
    if r.contains(&0) || r.windows(2).any(|x| !before(l, d, x[0], x[1])) {
        return None;
    }
    let mut t = Vec::new();
    for &s in r.iter().rev() {
        add_minimal(&mut t, s);
    }
    Some(t)
}

fn add_minimal(t: &mut Vec<Mask>, x: Mask) {
    if t.iter().any(|&y| subset(y, x)) {
        return;
    }
    t.retain(|&y| !subset(x, y));
    t.push(x);
    t.sort_by(|a, b| canon_cmp(*a, *b));
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Entry {
    w: Mask,
    /// Current restricted step; zero once the restriction broke down.
    r: Mask,
    t: Vec<Mask>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct State {
    anchor: Mask,
    head: Mask,
    entries: Vec<Entry>,
}

/// Precomputed step universe and its order relation, reusable across queries.
pub struct CoverageEngine<'a> {
    l: &'a OrderedLocale,
    cfg: CoverageConfig,
    steps: Vec<Mask>,
    index: HashMap<Mask, usize>,
    /// `preds[i]`: indices `j` with `S_j ⊴ S_i`, canonical order.
    preds: Vec<Vec<u32>>,
    /// `succs[i]`: indices `j` with `S_i ⊴ S_j`, canonical order.
    succs: Vec<Vec<u32>>,
    open_count: usize,
}

impl<'a> CoverageEngine<'a> {
    pub fn new(l: &'a OrderedLocale, cfg: CoverageConfig) -> Result<Self, CoverageError> {
        if cfg.max_target_path_len == Some(0) || cfg.max_refinement_len == Some(0) {
            return Err(CoverageError::ZeroBound);
        }
        let all = l.universe(&cfg.steps)?;
        let open_count = all.len();
        let steps: Vec<Mask> = all.into_iter().filter(|&s| s != 0).collect();
        if steps.is_empty() {
            return Err(CoverageError::NoSteps);
        }
        let n = steps.len();
        let rel: Vec<Vec<bool>> = steps
            .par_iter()
            .map(|&x| steps.iter().map(|&y| l.leq(x, y)).collect())
            .collect();
        let preds = (0..n)
            .map(|i| (0..n).filter(|&j| rel[j][i]).map(|j| j as u32).collect())
            .collect();
        let succs = (0..n)
            .map(|i| (0..n).filter(|&j| rel[i][j]).map(|j| j as u32).collect())
            .collect();
        let index = steps.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(CoverageEngine { l, cfg, steps, index, preds, succs, open_count })
    }

    pub fn locale(&self) -> &OrderedLocale {
        self.l
    }

    pub fn config(&self) -> &CoverageConfig {
        &self.cfg
    }

    pub fn steps(&self) -> &[Mask] {
        &self.steps
    }

    /// `|opens|` as used by the default bounds: the size of the step universe
    /// including the empty open.
    pub fn open_count(&self) -> usize {
        self.open_count
    }

    pub fn target_bound(&self) -> usize {
        self.cfg.max_target_path_len.unwrap_or(2 * self.open_count)
    }

    /// Refinement length allowed against a target path of `len` steps.
    pub fn refinement_bound(&self, len: usize) -> usize {
        self.cfg.max_refinement_len.unwrap_or((len + 1) * (self.open_count + 1))
    }

    fn prev(&self, d: Direction, i: usize) -> &[u32] {
        match d {
            Direction::Below => &self.preds[i],
            Direction::Above => &self.succs[i],
        }
    }

    fn check_open(&self, m: Mask) -> Result<(), CoverageError> {
        self.l.space().check_mask(m)?;
        if !self.l.space().is_open(m) {
            return Err(CoverageError::NotOpen(m));
        }
        Ok(())
    }

    /// Shortest path ending (internally) at `w` that has a step inside each
    /// member of `t` and a step inside `a`.
    ///
    /// The order is a preorder, so a shortest such path never needs a step
    /// that meets no new requirement; the search only follows such steps.
    fn qualify(&self, d: Direction, a: Mask, w: Mask, t: &[Mask]) -> Qual {
        let Some(&wi) = self.index.get(&w) else {
            return Qual::No;
        };
        let k = t.len();
        if k >= 63 {
            return Qual::No;
        }
        let goal: u64 = (1u64 << (k + 1)) - 1;
        let hits = |s: Mask| -> u64 {
            let mut h = 0;
            for (i, &x) in t.iter().enumerate() {
                if subset(s, x) {
                    h |= 1 << i;
                }
            }
            if subset(s, a) {
                h |= 1 << k;
            }
            h
        };
        let start = (wi as u32, hits(w));
        let mut parent: HashMap<(u32, u64), (u32, u64)> = HashMap::new();
        let mut seen: HashSet<(u32, u64)> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start);
        queue.push_back(start);
        while let Some(cur) = queue.pop_front() {
            if cur.1 == goal {
                let mut out = vec![self.steps[cur.0 as usize]];
                let mut c = cur;
                while let Some(&p) = parent.get(&c) {
                    out.push(self.steps[p.0 as usize]);
                    c = p;
                }
                return Qual::Yes(out);
            }
            for &j in self.prev(d, cur.0 as usize) {
                let h = hits(self.steps[j as usize]);
                if h & !cur.1 == 0 {
                    continue;
                }
                let nxt = (j, cur.1 | h);
                if seen.insert(nxt) {
                    parent.insert(nxt, cur);
                    queue.push_back(nxt);
                }
            }
        }
        Qual::No
    }

    fn initial_state(&self, anchor: Mask) -> State {
        let entries = self
            .steps
            .iter()
            .filter(|&&w| subset(w, anchor))
            .map(|&w| Entry { w, r: w, t: vec![w] })
            .collect();
        State { anchor, head: anchor, entries }
    }

    fn extend(&self, d: Direction, s: &State, step: Mask) -> State {
        let entries = s
            .entries
            .iter()
            .map(|e| {
                if e.r == 0 {
                    return e.clone();
                }
                let r = step & toward(self.l, d, e.r);
                if r == 0 || !before(self.l, d, r, e.r) {
                    return Entry { w: e.w, r: 0, t: Vec::new() };
                }
                let mut t = e.t.clone();
                add_minimal(&mut t, r);
                Entry { w: e.w, r, t }
            })
            .collect();
        State { anchor: s.anchor, head: step, entries }
    }

    pub fn cov_minus(&self, a: Mask, u: Mask) -> Result<CoverageVerdict, CoverageError> {
        self.cover(Direction::Below, a, u)
    }

    pub fn cov_plus(&self, b: Mask, u: Mask) -> Result<CoverageVerdict, CoverageError> {
        self.cover(Direction::Above, b, u)
    }

    pub fn cover(&self, d: Direction, a: Mask, u: Mask) -> Result<CoverageVerdict, CoverageError> {
        self.check_open(a)?;
        self.check_open(u)?;
        let max_len = self.target_bound();
        let mut verdict = CoverageVerdict {
            direction: d,
            region: a,
            target: u,
            kind: VerdictKind::Covered,
            max_target_path_len: max_len,
            max_refinement_len: self.cfg.max_refinement_len,
            exhaustive: false,
            states: 0,
            certificate: None,
            witness: None,
            unknown: None,
        };
        let cone = toward(self.l, d, u);
        if !subset(a, cone) {
            verdict.kind = VerdictKind::NotCovered;
            verdict.exhaustive = true;
            verdict.witness = Some(NotCoveredWitness::OutsideCone { cone });
            return Ok(verdict);
        }

        // Nodes record (parent, step) to rebuild witness paths.
        let mut nodes: Vec<(u32, Mask)> = Vec::new();
        let mut level: Vec<(u32, State)> = Vec::new();
        let mut visited: HashSet<State> = HashSet::new();
        for &e in self.steps.iter().filter(|&&e| subset(e, u)) {
            let st = self.initial_state(e);
            if visited.insert(st.clone()) {
                nodes.push((u32::MAX, e));
                level.push((nodes.len() as u32 - 1, st));
            }
        }
        let mut cache: HashMap<(Mask, Vec<Mask>), Qual> = HashMap::new();
        let mut used: BTreeMap<(Mask, Vec<Mask>), Vec<Mask>> = BTreeMap::new();
        let mut first_unknown: Option<UnknownReason> = None;
        let mut states: u64 = level.len() as u64;
        let path_of = |nodes: &Vec<(u32, Mask)>, id: u32| -> Path {
            let mut out = Vec::new();
            let mut c = id;
            while c != u32::MAX {
                out.push(nodes[c as usize].1);
                c = nodes[c as usize].0;
            }
            from_internal(d, out)
        };

        for depth in 0..max_len {
            if level.is_empty() {
                verdict.exhaustive = true;
                break;
            }
            let mut missing: Vec<(Mask, Vec<Mask>)> = Vec::new();
            let mut seen_keys: HashSet<(Mask, Vec<Mask>)> = HashSet::new();
            for (_, st) in &level {
                for e in st.entries.iter().filter(|e| e.r != 0) {
                    let key = (e.w, e.t.clone());
                    if !cache.contains_key(&key) && seen_keys.insert(key.clone()) {
                        missing.push(key);
                    }
                }
            }
            let results: Vec<Qual> =
                missing.par_iter().map(|(w, t)| self.qualify(d, a, *w, t)).collect();
            cache.extend(missing.into_iter().zip(results));

            let bound = self.refinement_bound(depth + 1);
            for (id, st) in &level {
                let mut yes = 0;
                let mut beyond = 0;
                for e in st.entries.iter().filter(|e| e.r != 0) {
                    if let Some(Qual::Yes(q)) = cache.get(&(e.w, e.t.clone())) {
                        if q.len() <= bound {
                            yes |= e.w;
                            used.entry((e.w, e.t.clone())).or_insert_with(|| q.clone());
                        } else {
                            beyond |= e.w;
                        }
                    }
                }
                if yes == st.anchor {
                    continue;
                }
                if (yes | beyond) == st.anchor {
                    if first_unknown.is_none() {
                        first_unknown = Some(UnknownReason::RefinementBound {
                            path: path_of(&nodes, *id),
                            refinement_bound: bound,
                        });
                    }
                    continue;
                }
                verdict.kind = VerdictKind::NotCovered;
                verdict.exhaustive = true;
                verdict.states = states;
                verdict.witness = Some(NotCoveredWitness::Path {
                    path: path_of(&nodes, *id),
                    qualifying_join: yes | beyond,
                    refinement_bound: bound,
                });
                return Ok(verdict);
            }

            let children: Vec<Vec<(Mask, State)>> = level
                .par_iter()
                .map(|(_, st)| {
                    let hi = self.index[&st.head];
                    self.prev(d, hi)
                        .iter()
                        .map(|&j| {
                            let s = self.steps[j as usize];
                            (s, self.extend(d, st, s))
                        })
                        .collect()
                })
                .collect();
            let mut next = Vec::new();
            for ((id, _), kids) in level.iter().zip(children) {
                for (s, st) in kids {
                    if visited.insert(st.clone()) {
                        nodes.push((*id, s));
                        next.push((nodes.len() as u32 - 1, st));
                    }
                }
            }
            states += next.len() as u64;
            if states > self.cfg.budget {
                verdict.kind = VerdictKind::Unknown;
                verdict.states = states;
                verdict.unknown = Some(UnknownReason::Budget { states: self.cfg.budget });
                return Ok(verdict);
            }
            level = next;
        }
        if level.is_empty() {
            verdict.exhaustive = true;
        }
        verdict.states = states;
        if let Some(reason) = first_unknown {
            verdict.kind = VerdictKind::Unknown;
            verdict.unknown = Some(reason);
            return Ok(verdict);
        }
        verdict.certificate = Some(CoverCertificate {
            direction: d,
            region: a,
            entries: used
                .into_iter()
                .map(|((w, t), q)| CertificateEntry {
                    endpoint: w,
                    restricted: t,
                    refinement: from_internal(d, q),
                })
                .collect(),
        });
        Ok(verdict)
    }

    /// Every path over the step universe of length `≤ max_target_path_len`
    /// ending inside `ends_in`, ordered by length and then by steps compared
    /// from the end backwards. The flag is set when the budget cut the list.
    pub fn enumerate_paths(&self, ends_in: Mask) -> (Vec<Path>, bool) {
        self.enumerate_paths_upto(ends_in, self.target_bound())
    }

    pub fn enumerate_paths_upto(&self, ends_in: Mask, max_len: usize) -> (Vec<Path>, bool) {
        let mut out = Vec::new();
        let mut level: Vec<Vec<Mask>> = self
            .steps
            .iter()
            .filter(|&&s| subset(s, ends_in))
            .map(|&s| vec![s])
            .collect();
        for _ in 0..max_len {
            if level.is_empty() {
                break;
            }
            if (out.len() + level.len()) as u64 > self.cfg.budget {
                return (out, true);
            }
            let mut next = Vec::new();
            for rev in &level {
                let hi = self.index[rev.last().unwrap()];
                for &j in &self.preds[hi] {
                    let mut v = rev.clone();
                    v.push(self.steps[j as usize]);
                    next.push(v);
                }
            }
            out.extend(level.iter().map(|rev| {
                let mut v = rev.clone();
                v.reverse();
                Path::raw(v)
            }));
            level = next;
        }
        (out, false)
    }

    /// Search a local refinement family of `p` whose members inhabit `a`.
    /// `Err(())` means the refinement bound cut off a possible member.
    pub fn find_local_refinement(
        &self,
        d: Direction,
        p: &Path,
        a: Mask,
    ) -> Result<Option<LocalRefinementFamily>, Inconclusive> {
        if d == Direction::Below {
            if let Some(f) = self.interleave_family(p, a) {
                return Ok(Some(f));
            }
        }
        let internal = to_internal(d, p.steps());
        let anchor = *internal.last().unwrap();
        let bound = self.refinement_bound(p.len());
        let mut members = Vec::new();
        let mut beyond = 0;
        for &w in self.steps.iter().filter(|&&w| subset(w, anchor)) {
            let Some(t) = restricted_minimal(self.l, d, &internal, w) else {
                continue;
            };
            match self.qualify(d, a, w, &t) {
                Qual::Yes(q) if q.len() <= bound => {
                    let r = restricted_internal(self.l, d, &internal, w);
                    let q = from_internal(d, q);
                    let target = match d {
                        Direction::Below => restrict_past(self.l, p, w),
                        Direction::Above => restrict_future(self.l, p, w),
                    };
                    let Ok(target) = target else { continue };
                    debug_assert_eq!(to_internal(d, target.steps()), r);
                    if let Some(witness) = crate::paths::refines(&q, &target) {
                        members.push(FamilyMember { endpoint: w, path: q, witness });
                    }
                }
                Qual::Yes(_) => beyond |= w,
                Qual::No => {}
            }
        }
        let join = members.iter().fold(0, |acc, m| acc | m.endpoint);
        if join == anchor {
            return Ok(Some(LocalRefinementFamily { side: d.side(), target: p.clone(), members }));
        }
        if join | beyond == anchor {
            return Err(Inconclusive { refinement_bound: bound });
        }
        Ok(None)
    }

    /// Try the canonical interleavings of `p` with `a`; succeed when their
    /// endpoints, plus `p` itself if it already inhabits `a`, join to `p_⊤`.
    fn interleave_family(&self, p: &Path, a: Mask) -> Option<LocalRefinementFamily> {
        let bound = self.refinement_bound(p.len());
        let mut candidates = Vec::new();
        if p.inhabits(a) {
            candidates.push(p.clone());
        }
        if let Ok(Some(q)) = prepend_interleave(self.l, p, a) {
            candidates.push(q);
        }
        for k in 0..p.len().saturating_sub(1) {
            if let Ok(Some(q)) = canonical_interleave(self.l, p, a, k) {
                candidates.push(q);
            }
        }
        let mut members: Vec<FamilyMember> = Vec::new();
        for q in candidates {
            if q.len() > bound || members.iter().any(|m| m.endpoint == q.end()) {
                continue;
            }
            let Ok(r) = restrict_past(self.l, p, q.end()) else { continue };
            if let Some(witness) = crate::paths::refines(&q, &r) {
                members.push(FamilyMember { endpoint: q.end(), path: q, witness });
            }
        }
        let join = members.iter().fold(0, |acc, m| acc | m.endpoint);
        (join == p.end()).then(|| LocalRefinementFamily {
            side: Side::Past,
            target: p.clone(),
            members,
        })
    }
}

/// The refinement bound cut off the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inconclusive {
    pub refinement_bound: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterleaveError {
    #[error("split index {0} is out of range")]
    BadIndex(usize),
    #[error("interleaving failed ({0}); it needs a parallel ordered locale")]
    NotParallel(String),
}

fn interleave_result(
    l: &OrderedLocale,
    p: &Path,
    steps: Vec<Mask>,
    a: Mask,
) -> Result<Option<Path>, InterleaveError> {
    let q = make_path(l, steps).map_err(|e| InterleaveError::NotParallel(e.to_string()))?;
    let r = restrict_past(l, p, q.end()).map_err(|e| InterleaveError::NotParallel(e.to_string()))?;
    if crate::paths::refines(&q, &r).is_none() || !q.inhabits(a) {
        return Err(InterleaveError::NotParallel("result does not refine its restriction".into()));
    }
    Ok(Some(q))
}

fn restriction_err(e: PathError) -> InterleaveError {
    InterleaveError::NotParallel(e.to_string())
}

/// Split `p` after index `k` and insert `W″ = A ∧ ⇑p_k ∧ ⇓p_{k+1}`, restricting
/// the head to the past of `W″` and the tail to its future.
pub fn canonical_interleave(
    l: &OrderedLocale,
    p: &Path,
    a: Mask,
    k: usize,
) -> Result<Option<Path>, InterleaveError> {
    if k + 1 >= p.len() {
        return Err(InterleaveError::BadIndex(k));
    }
    let s = p.steps();
    let mid = a & l.cone_up(s[k]) & l.cone_down(s[k + 1]);
    if mid == 0 {
        return Ok(None);
    }
    let head = Path::raw(s[..=k].to_vec());
    let tail = Path::raw(s[k + 1..].to_vec());
    let head = restrict_past(l, &head, s[k] & l.cone_down(mid)).map_err(restriction_err)?;
    let tail = restrict_future(l, &tail, s[k + 1] & l.cone_up(mid)).map_err(restriction_err)?;
    let mut steps = head.steps().to_vec();
    steps.push(mid);
    steps.extend_from_slice(tail.steps());
    interleave_result(l, p, steps, a)
}

/// Insert `W = A ∧ ⇓p_0` before the whole path, restricting `p` to its future.
pub fn prepend_interleave(
    l: &OrderedLocale,
    p: &Path,
    a: Mask,
) -> Result<Option<Path>, InterleaveError> {
    let w = a & l.cone_down(p.start());
    if w == 0 {
        return Ok(None);
    }
    let tail = restrict_future(l, p, p.start() & l.cone_up(w)).map_err(restriction_err)?;
    let mut steps = vec![w];
    steps.extend_from_slice(tail.steps());
    interleave_result(l, p, steps, a)
}

pub fn cov_minus(
    l: &OrderedLocale,
    a: Mask,
    u: Mask,
    cfg: &CoverageConfig,
) -> Result<CoverageVerdict, CoverageError> {
    CoverageEngine::new(l, cfg.clone())?.cov_minus(a, u)
}

pub fn cov_plus(
    l: &OrderedLocale,
    b: Mask,
    u: Mask,
    cfg: &CoverageConfig,
) -> Result<CoverageVerdict, CoverageError> {
    CoverageEngine::new(l, cfg.clone())?.cov_plus(b, u)
}

pub fn find_local_past_refinement(
    l: &OrderedLocale,
    p: &Path,
    a: Mask,
    cfg: &CoverageConfig,
) -> Result<Result<Option<LocalRefinementFamily>, Inconclusive>, CoverageError> {
    Ok(CoverageEngine::new(l, cfg.clone())?.find_local_refinement(Direction::Below, p, a))
}

/// Re-check a verdict: certificates must produce valid families for every
/// target path of length `≤ replay_len`, and a path witness must fail the
/// refinement search again.
pub fn replay_verdict(
    engine: &CoverageEngine,
    v: &CoverageVerdict,
    replay_len: usize,
) -> Result<(), String> {
    let l = engine.locale();
    match v.kind {
        VerdictKind::Covered => {
            let cert = v.certificate.as_ref().ok_or("covered verdict without certificate")?;
            let (paths, truncated) = match v.direction {
                Direction::Below => engine.enumerate_paths_upto(v.target, replay_len),
                Direction::Above => enumerate_future_paths(engine, v.target, replay_len),
            };
            if truncated {
                return Err("path enumeration truncated".into());
            }
            for p in paths {
                let fam = cert
                    .family_for(l, &p, engine.steps())
                    .ok_or_else(|| format!("no family for {}", p.show(l.space())))?;
                fam.validate(l, Some(v.region))?;
            }
            Ok(())
        }
        VerdictKind::NotCovered => match v.witness.as_ref().ok_or("missing witness")? {
            NotCoveredWitness::OutsideCone { cone } => {
                if subset(v.region, *cone) {
                    Err("region lies inside the cone".into())
                } else {
                    Ok(())
                }
            }
            NotCoveredWitness::Path { path, .. } => {
                make_path(l, path.steps().to_vec()).map_err(|e| e.to_string())?;
                let anchor = match v.direction {
                    Direction::Below => path.end(),
                    Direction::Above => path.start(),
                };
                if !subset(anchor, v.target) {
                    return Err("witness is not anchored in the target".into());
                }
                match engine.find_local_refinement(v.direction, path, v.region) {
                    Ok(None) => Ok(()),
                    Ok(Some(_)) => Err("witness path is refinable".into()),
                    Err(_) => Err("witness replay inconclusive".into()),
                }
            }
        },
        VerdictKind::Unknown => Ok(()),
    }
}

/// Paths starting in `starts_in`, mirror image of `enumerate_paths`.
pub fn enumerate_future_paths(
    engine: &CoverageEngine,
    starts_in: Mask,
    max_len: usize,
) -> (Vec<Path>, bool) {
    let mut out = Vec::new();
    let mut level: Vec<Vec<Mask>> = engine
        .steps
        .iter()
        .filter(|&&s| subset(s, starts_in))
        .map(|&s| vec![s])
        .collect();
    for _ in 0..max_len {
        if level.is_empty() {
            break;
        }
        if (out.len() + level.len()) as u64 > engine.cfg.budget {
            return (out, true);
        }
        let mut next = Vec::new();
        for fwd in &level {
            let hi = engine.index[fwd.last().unwrap()];
            for &j in &engine.succs[hi] {
                let mut v = fwd.clone();
                v.push(engine.steps[j as usize]);
                next.push(v);
            }
        }
        out.extend(level.iter().map(|v| Path::raw(v.clone())));
        level = next;
    }
    (out, false)
}

/// Tally for one coverage property.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyTally {
    pub property: &'static str,
    pub instances: u64,
    pub violations: u64,
    pub unknowns: u64,
    pub first_violation: Option<Vec<Mask>>,
}

impl PropertyTally {
    pub(crate) fn new(property: &'static str) -> Self {
        PropertyTally { property, ..Default::default() }
    }

    pub(crate) fn record(&mut self, outcome: Option<bool>, tuple: &[Mask]) {
        self.instances += 1;
        match outcome {
            Some(true) => {}
            Some(false) => {
                self.violations += 1;
                if self.first_violation.is_none() {
                    self.first_violation = Some(tuple.to_vec());
                }
            }
            None => self.unknowns += 1,
        }
    }

    pub fn holds(&self) -> bool {
        self.violations == 0 && self.unknowns == 0
    }
}

/// Membership tables `Cov⁻(U)` and `Cov⁺(U)` over the whole frame.
pub struct CoverTables {
    pub opens: Vec<Mask>,
    /// `below[i][j]`: verdict of `opens[j] ∈ Cov⁻(opens[i])`.
    pub below: Vec<Vec<VerdictKind>>,
    pub above: Vec<Vec<VerdictKind>>,
}

impl CoverTables {
    pub fn compute(engine: &CoverageEngine) -> Result<CoverTables, CoverageError> {
        let opens = engine.locale().space().opens()?;
        let table = |d: Direction| -> Result<Vec<Vec<VerdictKind>>, CoverageError> {
            opens
                .par_iter()
                .map(|&u| {
                    opens.iter().map(|&a| Ok(engine.cover(d, a, u)?.kind)).collect()
                })
                .collect()
        };
        Ok(CoverTables { below: table(Direction::Below)?, above: table(Direction::Above)?, opens })
    }

    fn idx(&self, m: Mask) -> usize {
        self.opens.iter().position(|&x| x == m).expect("open in table")
    }

    pub fn get(&self, d: Direction, a: Mask, u: Mask) -> VerdictKind {
        let t = match d {
            Direction::Below => &self.below,
            Direction::Above => &self.above,
        };
        t[self.idx(u)][self.idx(a)]
    }

    pub fn member(&self, d: Direction, a: Mask, u: Mask) -> Option<bool> {
        match self.get(d, a, u) {
            VerdictKind::Covered => Some(true),
            VerdictKind::NotCovered => Some(false),
            VerdictKind::Unknown => None,
        }
    }

    /// Opens covering `u` from the given side; `None` if any entry is unknown.
    pub fn covers_of(&self, d: Direction, u: Mask) -> Option<Vec<Mask>> {
        let mut out = Vec::new();
        for &a in &self.opens {
            if self.member(d, a, u)? {
                out.push(a);
            }
        }
        Some(out)
    }
}

pub(crate) fn implies(p: Option<bool>, q: Option<bool>) -> Option<bool> {
    match (p, q) {
        (Some(false), _) | (_, Some(true)) => Some(true),
        (Some(true), Some(false)) => Some(false),
        _ => None,
    }
}

/// Check the structural properties of `Cov±` over every tuple of opens.
pub fn verify_cov_properties(
    l: &OrderedLocale,
    cfg: &CoverageConfig,
) -> Result<Vec<PropertyTally>, CoverageError> {
    let engine = CoverageEngine::new(l, cfg.clone())?;
    let tables = CoverTables::compute(&engine)?;
    Ok(cov_properties_from_tables(l, &tables))
}

pub fn cov_properties_from_tables(l: &OrderedLocale, tables: &CoverTables) -> Vec<PropertyTally> {
    use Direction::{Above, Below};
    let opens = &tables.opens;
    let m = |d, a, u| tables.member(d, a, u);
    let mut reflexive = PropertyTally::new("reflexive");
    let mut cones = PropertyTally::new("cone-covers");
    let mut transitive = PropertyTally::new("transitive");
    let mut pull_minus = PropertyTally::new("pullback-below");
    let mut pull_plus = PropertyTally::new("pullback-above");
    let mut ordered = PropertyTally::new("covers-are-ordered");
    let mut empty = PropertyTally::new("empty-target");
    let mut join_weak = PropertyTally::new("join-of-covers-weak");
    let mut join = PropertyTally::new("join-of-covers");

    for &u in opens {
        for d in [Below, Above] {
            reflexive.record(m(d, u, u), &[u]);
        }
        cones.record(m(Below, l.cone_down(u), u), &[u]);
        cones.record(m(Above, l.cone_up(u), u), &[u]);
        for &a in opens {
            ordered.record(implies(m(Below, a, u), Some(l.leq(a, u))), &[a, u]);
            ordered.record(implies(m(Above, a, u), Some(l.leq(u, a))), &[a, u]);
            for &w in opens.iter().filter(|&&w| subset(w, u)) {
                let lhs = m(Below, a, u);
                pull_minus.record(implies(lhs, m(Below, a & l.cone_down(w), w)), &[a, u, w]);
                let lhs = m(Above, a, u);
                pull_plus.record(implies(lhs, m(Above, a & l.cone_up(w), w)), &[a, u, w]);
            }
            for d in [Below, Above] {
                if m(d, a, u) == Some(false) {
                    continue;
                }
                for &b in opens {
                    let pre = match (m(d, b, a), m(d, a, u)) {
                        (Some(true), Some(true)) => Some(true),
                        (Some(false), _) | (_, Some(false)) => Some(false),
                        _ => None,
                    };
                    transitive.record(implies(pre, m(d, b, u)), &[b, a, u]);
                }
            }
        }
    }
    for &a in opens {
        empty.record(Some((m(Below, a, 0) == Some(true)) == (a == 0)), &[a]);
        empty.record(Some((m(Above, a, 0) == Some(true)) == (a == 0)), &[a]);
    }
    for (i, &u1) in opens.iter().enumerate() {
        for &u2 in &opens[i..] {
            for d in [Below, Above] {
                let (Some(c1), Some(c2), Some(c12)) = (
                    tables.covers_of(d, u1),
                    tables.covers_of(d, u2),
                    tables.covers_of(d, u1 | u2),
                ) else {
                    join_weak.record(None, &[u1, u2]);
                    join.record(None, &[u1, u2]);
                    continue;
                };
                let mut joins: Vec<Mask> =
                    c1.iter().flat_map(|&a1| c2.iter().map(move |&a2| a1 | a2)).collect();
                joins.sort_by(|a, b| canon_cmp(*a, *b));
                joins.dedup();
                join_weak.record(Some(joins.iter().all(|j| c12.contains(j))), &[u1, u2]);
                join.record(Some(joins == c12), &[u1, u2]);
            }
        }
    }
    vec![reflexive, cones, transitive, pull_minus, pull_plus, ordered, empty, join_weak, join]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{chain3, vee};

    fn m(l: &OrderedLocale, labels: &[&str]) -> Mask {
        l.space().mask_of(labels).unwrap()
    }

    #[test]
    fn chain_past_refinement_prepends() {
        let l = OrderedLocale::egli_milner(chain3());
        let p = make_path(&l, vec![m(&l, &["b"]), m(&l, &["c"])]).unwrap();
        let f = find_local_past_refinement(&l, &p, m(&l, &["a"]), &CoverageConfig::default())
            .unwrap()
            .unwrap()
            .unwrap();
        assert_eq!(f.members.len(), 1);
        assert_eq!(f.members[0].endpoint, m(&l, &["c"]));
        assert_eq!(f.members[0].path.steps(), &[1, 2, 4]);
        f.validate(&l, Some(1)).unwrap();
    }

    #[test]
    fn vee_has_no_refinement() {
        let l = OrderedLocale::egli_milner(vee());
        let p = make_path(&l, vec![m(&l, &["y"]), m(&l, &["z"])]).unwrap();
        let cfg = CoverageConfig::default();
        let r = find_local_past_refinement(&l, &p, m(&l, &["x"]), &cfg).unwrap();
        assert_eq!(r, Ok(None));
        let v = cov_minus(&l, m(&l, &["x"]), m(&l, &["z"]), &cfg).unwrap();
        assert_eq!(v.kind, VerdictKind::NotCovered);
        match v.witness.unwrap() {
            NotCoveredWitness::Path { path, .. } => assert_eq!(path.steps(), &[2, 4]),
            w => panic!("{w:?}"),
        }
    }

    #[test]
    fn interleave_inserts_middle_step() {
        let l = OrderedLocale::egli_milner(chain3());
        let p = make_path(&l, vec![1, 4]).unwrap();
        assert_eq!(canonical_interleave(&l, &p, 2, 0).unwrap().unwrap().steps(), &[1, 2, 4]);
        assert_eq!(canonical_interleave(&l, &p, 0, 0).unwrap(), None);
        assert!(canonical_interleave(&l, &p, 2, 1).is_err());
    }

    #[test]
    fn singleton_basis_enumeration() {
        let l = OrderedLocale::egli_milner(chain3());
        let cfg = CoverageConfig::default().with_basis(vec![1, 2, 4]).with_target_len(2);
        let e = CoverageEngine::new(&l, cfg).unwrap();
        let (paths, cut) = e.enumerate_paths(4);
        assert!(!cut);
        let got: Vec<&[Mask]> = paths.iter().map(|p| p.steps()).collect();
        assert_eq!(got, vec![&[4][..], &[1, 4], &[2, 4], &[4, 4]]);
        assert!(e.enumerate_paths(0).0.is_empty());
    }

    #[test]
    fn cone_covers_and_certificate_replays() {
        let l = OrderedLocale::egli_milner(chain3());
        let e = CoverageEngine::new(&l, CoverageConfig::default()).unwrap();
        let v = e.cov_minus(l.cone_down(4), 4).unwrap();
        assert!(v.is_covered());
        assert!(v.exhaustive);
        replay_verdict(&e, &v, 4).unwrap();
        let v = e.cov_plus(l.cone_up(1), 1).unwrap();
        assert!(v.is_covered());
        replay_verdict(&e, &v, 4).unwrap();
    }

    #[test]
    fn outside_cone_is_immediate() {
        let l = OrderedLocale::egli_milner(chain3());
        let v = cov_minus(&l, 4, 1, &CoverageConfig::default()).unwrap();
        assert_eq!(v.witness, Some(NotCoveredWitness::OutsideCone { cone: 1 }));
    }
}
