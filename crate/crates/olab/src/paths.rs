//! Localic paths, refinement, concatenation and restriction.

use serde_json::{json, Value};
use thiserror::Error;

use crate::locale::OrderedLocale;
use crate::space::{bits, submasks, subset, FiniteSpace, Mask};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("a path needs at least one step")]
    NoSteps,
    #[error("step {0} is empty")]
    EmptyStep(usize),
    #[error("step {0} is not causally below step {next}", next = .0 + 1)]
    NotRelated(usize),
    #[error("endpoint of the first path differs from the start of the second")]
    EndpointMismatch,
    #[error("restriction target is empty")]
    EmptyTarget,
    #[error("restriction target is not contained in the path's end step")]
    TargetOutside,
    #[error("restriction produced an empty step at index {0}; it needs a parallel ordered locale")]
    EmptyRestrictedStep(usize),
    #[error("restricted steps {0} and {next} are not related; it needs a parallel ordered locale", next = .0 + 1)]
    RestrictedNotRelated(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    steps: Vec<Mask>,
}

impl Path {
    /// Wrap steps without validation. Callers inside the crate use this only
    /// for sequences already known to be paths.
    pub(crate) fn raw(steps: Vec<Mask>) -> Path {
        Path { steps }
    }

    pub fn steps(&self) -> &[Mask] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn start(&self) -> Mask {
        self.steps[0]
    }

    pub fn end(&self) -> Mask {
        *self.steps.last().unwrap()
    }

    pub fn inhabits(&self, v: Mask) -> bool {
        self.steps.iter().any(|&s| subset(s, v))
    }

    pub fn lands_in(&self, v: Mask) -> bool {
        subset(self.end(), v)
    }

    /// Collapse consecutive repeated steps.
    pub fn normalized(&self) -> Path {
        let mut steps = self.steps.clone();
        steps.dedup();
        Path { steps }
    }

    pub fn to_json(&self, space: &FiniteSpace) -> Value {
        json!(self.steps.iter().map(|&s| space.labels_of(s)).collect::<Vec<_>>())
    }

    pub fn show(&self, space: &FiniteSpace) -> String {
        let parts: Vec<String> = self.steps.iter().map(|&s| space.show(s)).collect();
        format!("({})", parts.join(","))
    }
}

pub fn make_path(l: &OrderedLocale, steps: Vec<Mask>) -> Result<Path, PathError> {
    if steps.is_empty() {
        return Err(PathError::NoSteps);
    }
    if let Some(i) = steps.iter().position(|&s| s == 0) {
        return Err(PathError::EmptyStep(i));
    }
    if let Some(i) = (0..steps.len() - 1).find(|&i| !l.leq(steps[i], steps[i + 1])) {
        return Err(PathError::NotRelated(i));
    }
    Ok(Path { steps })
}

/// `q · p`: first `p`, then `q`, sharing the step `p_⊤ = q_⊥`.
pub fn concat(q: &Path, p: &Path) -> Result<Path, PathError> {
    if p.end() != q.start() {
        return Err(PathError::EndpointMismatch);
    }
    let mut steps = p.steps.clone();
    steps.extend_from_slice(&q.steps[1..]);
    Ok(Path { steps })
}

/// For each step of the coarse path, the earliest fine step inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementWitness {
    pub assignment: Vec<usize>,
}

impl RefinementWitness {
    pub fn check(&self, q: &Path, p: &Path) -> bool {
        self.assignment.len() == p.len()
            && self
                .assignment
                .iter()
                .enumerate()
                .all(|(n, &m)| m < q.len() && subset(q.steps[m], p.steps[n]))
    }
}

/// `q ⋐ p`: every step of `p` contains some step of `q`.
pub fn refines(q: &Path, p: &Path) -> Option<RefinementWitness> {
    refines_steps(&q.steps, &p.steps)
}

pub(crate) fn refines_steps(q: &[Mask], p: &[Mask]) -> Option<RefinementWitness> {
    p.iter()
        .map(|&pn| q.iter().position(|&qm| subset(qm, pn)))
        .collect::<Option<Vec<_>>>()
        .map(|assignment| RefinementWitness { assignment })
}

/// Raw past restriction steps; may contain empty steps on non-parallel locales.
pub fn restricted_past_steps(l: &OrderedLocale, steps: &[Mask], w: Mask) -> Vec<Mask> {
    let mut out = vec![0; steps.len()];
    let mut cur = w;
    for n in (0..steps.len()).rev() {
        cur = if n + 1 == steps.len() { w } else { steps[n] & l.cone_down(cur) };
        out[n] = cur;
    }
    out
}

pub fn restricted_future_steps(l: &OrderedLocale, steps: &[Mask], v: Mask) -> Vec<Mask> {
    let mut out = Vec::with_capacity(steps.len());
    let mut cur = v;
    for (n, &s) in steps.iter().enumerate() {
        if n > 0 {
            cur = s & l.cone_up(cur);
        }
        out.push(cur);
    }
    out
}

fn validate_restriction(l: &OrderedLocale, steps: Vec<Mask>) -> Result<Path, PathError> {
    if let Some(i) = steps.iter().position(|&s| s == 0) {
        return Err(PathError::EmptyRestrictedStep(i));
    }
    if let Some(i) = (0..steps.len() - 1).find(|&i| !l.leq(steps[i], steps[i + 1])) {
        return Err(PathError::RestrictedNotRelated(i));
    }
    Ok(Path { steps })
}

/// `p|_W`, ending in `W ⊑ p_⊤`, with `(p|_W)_n = p_n ∧ ⇓(p|_W)_{n+1}`.
pub fn restrict_past(l: &OrderedLocale, p: &Path, w: Mask) -> Result<Path, PathError> {
    if w == 0 {
        return Err(PathError::EmptyTarget);
    }
    if !subset(w, p.end()) {
        return Err(PathError::TargetOutside);
    }
    validate_restriction(l, restricted_past_steps(l, &p.steps, w))
}

/// `p|^V`, starting in `V ⊑ p_⊥`, with `(p|^V)_n = p_n ∧ ⇑(p|^V)_{n-1}`.
pub fn restrict_future(l: &OrderedLocale, p: &Path, v: Mask) -> Result<Path, PathError> {
    if v == 0 {
        return Err(PathError::EmptyTarget);
    }
    if !subset(v, p.start()) {
        return Err(PathError::TargetOutside);
    }
    validate_restriction(l, restricted_future_steps(l, &p.steps, v))
}

/// Which end of the target a family refines towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Members end in subopens of `p_⊤` and refine past restrictions.
    Past,
    /// Members start in subopens of `p_⊥` and refine future restrictions.
    Future,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyMember {
    /// `q_⊤` for past families, `q_⊥` for future ones.
    pub endpoint: Mask,
    pub path: Path,
    pub witness: RefinementWitness,
}

/// Paths refining restrictions of `target` whose endpoints join to `target`'s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRefinementFamily {
    pub side: Side,
    pub target: Path,
    pub members: Vec<FamilyMember>,
}

impl LocalRefinementFamily {
    /// Re-check every claim of the family; `inhabit` additionally demands
    /// each member inhabits the given open.
    pub fn validate(&self, l: &OrderedLocale, inhabit: Option<Mask>) -> Result<(), String> {
        let mut join = 0;
        for m in &self.members {
            let q = make_path(l, m.path.steps.clone()).map_err(|e| e.to_string())?;
            let (anchor, r) = match self.side {
                Side::Past => (q.end(), restrict_past(l, &self.target, m.endpoint)),
                Side::Future => (q.start(), restrict_future(l, &self.target, m.endpoint)),
            };
            if anchor != m.endpoint {
                return Err(format!("member is anchored at {:#x}, not {:#x}", anchor, m.endpoint));
            }
            let r = r.map_err(|e| e.to_string())?;
            if !m.witness.check(&q, &r) {
                return Err("refinement witness does not check".into());
            }
            if let Some(a) = inhabit {
                if !q.inhabits(a) {
                    return Err("member does not inhabit the region".into());
                }
            }
            join |= m.endpoint;
        }
        let goal = match self.side {
            Side::Past => self.target.end(),
            Side::Future => self.target.start(),
        };
        if join != goal {
            return Err("member anchors do not join to the target's anchor step".into());
        }
        Ok(())
    }

    pub fn to_json(&self, space: &FiniteSpace) -> Value {
        json!({
            "side": match self.side { Side::Past => "past", Side::Future => "future" },
            "target": self.target.to_json(space),
            "members": self.members.iter().map(|m| json!({
                "endpoint": space.labels_of(m.endpoint),
                "path": m.path.to_json(space),
                "assignment": m.witness.assignment,
            })).collect::<Vec<_>>(),
        })
    }
}

/// All paths of length `1..=max_len` with steps from `universe`.
pub fn all_paths(l: &OrderedLocale, universe: &[Mask], max_len: usize) -> Vec<Path> {
    let steps: Vec<Mask> = universe.iter().copied().filter(|&s| s != 0).collect();
    let mut out: Vec<Path> = steps.iter().map(|&s| Path { steps: vec![s] }).collect();
    let mut frontier = out.clone();
    for _ in 1..max_len {
        let mut next = Vec::new();
        for p in &frontier {
            for &s in &steps {
                if l.leq(p.end(), s) {
                    let mut v = p.steps.clone();
                    v.push(s);
                    next.push(Path { steps: v });
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Tally of one lemma over many generated instances.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaTally {
    pub lemma: &'static str,
    pub instances: usize,
    pub violations: Vec<String>,
}

impl LemmaTally {
    fn new(lemma: &'static str) -> Self {
        LemmaTally { lemma, ..Default::default() }
    }

    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok && self.violations.len() < 16 {
            self.violations.push(describe());
        }
    }
}

/// `p|_W = (p|_V)|_W` for every nonempty `W ⊑ V ⊑ p_⊤` from `opens`.
pub fn check_functoriality(l: &OrderedLocale, paths: &[Path], opens: &[Mask]) -> LemmaTally {
    let mut t = LemmaTally::new("functoriality");
    let sp = l.space();
    for p in paths {
        for &v in opens.iter().filter(|&&v| v != 0 && subset(v, p.end())) {
            let Ok(pv) = restrict_past(l, p, v) else { continue };
            for &w in opens.iter().filter(|&&w| w != 0 && subset(w, v)) {
                let a = restrict_past(l, p, w);
                let b = restrict_past(l, &pv, w);
                t.record(a.is_ok() && a == b, || {
                    format!("p={} V={} W={}", p.show(sp), sp.show(v), sp.show(w))
                });
            }
        }
    }
    t
}

/// `p_n = ⋁ᵢ (p|_{Wᵢ})_n` for covers of `p_⊤` by nonempty subopens.
pub fn check_join_over_restrictions(
    l: &OrderedLocale,
    paths: &[Path],
    opens: &[Mask],
    max_cover_pieces: usize,
) -> LemmaTally {
    let mut t = LemmaTally::new("join-over-restrictions");
    let sp = l.space();
    for p in paths {
        let subs: Vec<Mask> =
            opens.iter().copied().filter(|&w| w != 0 && subset(w, p.end())).collect();
        let restricted: Vec<Vec<Mask>> =
            subs.iter().map(|&w| restricted_past_steps(l, p.steps(), w)).collect();
        let k = subs.len().min(max_cover_pieces);
        // Every nonempty subfamily of the first k subopens that covers p_⊤.
        for pick in 1u64..(1u64 << k) {
            let join = bits(pick).fold(0, |a, i| a | subs[i]);
            if join != p.end() {
                continue;
            }
            let ok = (0..p.len()).all(|n| {
                bits(pick).fold(0, |a, i| a | restricted[i][n]) == p.steps()[n]
            });
            t.record(ok, || {
                let cover: Vec<String> = bits(pick).map(|i| sp.show(subs[i])).collect();
                format!("p={} cover=[{}]", p.show(sp), cover.join(" "))
            });
        }
    }
    t
}

/// The side condition: if `q_m ⊑ p_n ≠ p_⊤` then some `q_k`, `k ≥ m`, lies in `p_{n+1}`.
pub fn side_condition(q: &Path, p: &Path) -> bool {
    let (qs, ps) = (q.steps(), p.steps());
    (0..qs.len()).all(|m| {
        (0..ps.len() - 1).all(|n| {
            !subset(qs[m], ps[n]) || ps[n] == p.end() || (m..qs.len()).any(|k| subset(qs[k], ps[n + 1]))
        })
    })
}

/// `q ⋐ p` plus the side condition give `q|_W ⋐ p|_W` for nonempty `W ⊑ q_⊤ ⊑ p_⊤`.
pub fn check_refinement_preservation(
    l: &OrderedLocale,
    pairs: impl IntoIterator<Item = (Path, Path)>,
    opens: &[Mask],
) -> LemmaTally {
    let mut t = LemmaTally::new("refinement-preservation");
    let sp = l.space();
    for (q, p) in pairs {
        if !subset(q.end(), p.end()) || refines(&q, &p).is_none() || !side_condition(&q, &p) {
            continue;
        }
        for &w in opens.iter().filter(|&&w| w != 0 && subset(w, q.end())) {
            let ok = match (restrict_past(l, &q, w), restrict_past(l, &p, w)) {
                (Ok(qw), Ok(pw)) => refines(&qw, &pw).is_some(),
                _ => false,
            };
            t.record(ok, || format!("q={} p={} W={}", q.show(sp), p.show(sp), sp.show(w)));
        }
    }
    t
}

/// For a point chain `x_0 ≤ … ≤ x_N` with `x_n ∈ p_n` and `x_N ∈ W`, each
/// `x_n ∈ (p|_W)_n`. Chains are enumerated exhaustively for each `(p, W)`.
pub fn check_point_preservation(l: &OrderedLocale, paths: &[Path], opens: &[Mask]) -> LemmaTally {
    let mut t = LemmaTally::new("point-preservation");
    let sp = l.space();
    for p in paths {
        for &w in opens.iter().filter(|&&w| w != 0 && subset(w, p.end())) {
            let Ok(r) = restrict_past(l, p, w) else {
                t.record(false, || format!("p={} W={} restriction failed", p.show(sp), sp.show(w)));
                continue;
            };
            // Walk chains backward from each x_N ∈ W.
            let mut stack: Vec<Vec<usize>> = bits(w).map(|x| vec![x]).collect();
            while let Some(chain) = stack.pop() {
                let n = p.len() - chain.len();
                let x = *chain.last().unwrap();
                let ok = r.steps()[n] >> x & 1 == 1;
                t.record(ok, || {
                    format!("p={} W={} point {} at {n}", p.show(sp), sp.show(w), sp.labels()[x])
                });
                if n > 0 {
                    for y in bits(p.steps()[n - 1] & sp.point_down(x)) {
                        let mut c = chain.clone();
                        c.push(y);
                        stack.push(c);
                    }
                }
            }
        }
    }
    t
}

/// All subsets of `m` that are open in the space.
pub fn open_subsets(space: &FiniteSpace, m: Mask) -> Vec<Mask> {
    submasks(m).filter(|&s| space.is_open(s)).collect()
}
