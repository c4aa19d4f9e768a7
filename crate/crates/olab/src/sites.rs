//! Sieves on a frame, the canonical coverage and the ⇓-Grothendieck topology
//! induced by `Cov⁻`.
//!
//! Arrows between opens are unique, so a sieve is stored as its set of
//! member opens.

use serde_json::{json, Value};
use thiserror::Error;

use crate::coverage::{CoverTables, CoverageConfig, CoverageEngine, CoverageError, Direction, VerdictKind};
use crate::locale::{OrderedLocale, Outcome};
use crate::space::{canon_cmp, canon_sort, subset, FiniteSpace, Mask, SpaceError};

#[derive(Debug, Error)]
pub enum SiteError {
    #[error("sieve is rooted at {found:#b}, expected {expected:#b}")]
    RootMismatch { expected: Mask, found: Mask },
    #[error("{0:#b} is not below the sieve root")]
    NotBelow(Mask),
    #[error("sieve enumeration exceeded the budget of {0}")]
    Budget(u64),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sieve {
    root: Mask,
    /// Canonically sorted, down-closed within the opens below `root`.
    members: Vec<Mask>,
}

impl Sieve {
    /// Down-closure of `gens` among the opens of `space` below `root`.
    pub fn generated(space: &FiniteSpace, root: Mask, gens: &[Mask]) -> Result<Sieve, SiteError> {
        space.check_mask(root)?;
        for &g in gens {
            if !subset(g, root) {
                return Err(SiteError::NotBelow(g));
            }
        }
        let mut members: Vec<Mask> = opens_below(space, root)?
            .into_iter()
            .filter(|&v| gens.iter().any(|&g| subset(v, g)))
            .collect();
        canon_sort(&mut members);
        Ok(Sieve { root, members })
    }

    pub fn root(&self) -> Mask {
        self.root
    }

    pub fn members(&self) -> &[Mask] {
        &self.members
    }

    pub fn contains(&self, v: Mask) -> bool {
        self.members.binary_search_by(|m| canon_cmp(*m, v)).is_ok()
    }

    pub fn join(&self) -> Mask {
        self.members.iter().fold(0, |a, &m| a | m)
    }

    /// Maximal members, canonically ordered.
    pub fn generators(&self) -> Vec<Mask> {
        self.members
            .iter()
            .copied()
            .filter(|&m| !self.members.iter().any(|&n| n != m && subset(m, n)))
            .collect()
    }

    pub fn is_down_closed(&self, space: &FiniteSpace) -> Result<bool, SiteError> {
        let below = opens_below(space, self.root)?;
        Ok(self
            .members
            .iter()
            .all(|&m| below.iter().filter(|&&w| subset(w, m)).all(|&w| self.contains(w))))
    }

    pub fn to_json(&self, space: &FiniteSpace) -> Value {
        json!({
            "root": space.labels_of(self.root),
            "generators": self.generators().iter().map(|&g| space.labels_of(g)).collect::<Vec<_>>(),
        })
    }
}

fn opens_below(space: &FiniteSpace, root: Mask) -> Result<Vec<Mask>, SpaceError> {
    Ok(space.opens()?.into_iter().filter(|&v| subset(v, root)).collect())
}

pub fn maximal_sieve(space: &FiniteSpace, u: Mask) -> Result<Sieve, SiteError> {
    Sieve::generated(space, u, &[u])
}

/// Pull `r` back along `v ⊑ root`: `{v ∧ w : w ∈ r}`.
pub fn pullback(space: &FiniteSpace, v: Mask, r: &Sieve) -> Result<Sieve, SiteError> {
    if !subset(v, r.root) {
        return Err(SiteError::NotBelow(v));
    }
    let mut members: Vec<Mask> = r.members.iter().map(|&w| w & v).collect();
    canon_sort(&mut members);
    members.dedup();
    let s = Sieve { root: v, members };
    debug_assert!(s.is_down_closed(space).unwrap_or(true));
    Ok(s)
}

/// `r` is a down-closed open cover of `u`.
pub fn canonical_cover_member(u: Mask, r: &Sieve) -> Result<bool, SiteError> {
    if r.root != u {
        return Err(SiteError::RootMismatch { expected: u, found: r.root });
    }
    Ok(r.join() == u)
}

/// `r ∈ J⁻(u)` iff `⋁r ∈ Cov⁻(u)`; `r` must be rooted at `⇓u`.
pub fn j_minus_member(engine: &CoverageEngine, u: Mask, r: &Sieve) -> Result<VerdictKind, SiteError> {
    let root = engine.locale().cone_down(u);
    if r.root != root {
        return Err(SiteError::RootMismatch { expected: root, found: r.root });
    }
    Ok(engine.cov_minus(r.join(), u)?.kind)
}

/// Every sieve on `root`, each exactly once, as down-closures of antichains
/// taken in canonical order.
pub fn all_sieves(space: &FiniteSpace, root: Mask, budget: u64) -> Result<Vec<Sieve>, SiteError> {
    let below = opens_below(space, root)?;
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    antichains(space, root, &below, 0, &mut chosen, &mut out, budget)?;
    Ok(out)
}

fn antichains(
    space: &FiniteSpace,
    root: Mask,
    opens: &[Mask],
    from: usize,
    chosen: &mut Vec<Mask>,
    out: &mut Vec<Sieve>,
    budget: u64,
) -> Result<(), SiteError> {
    if out.len() as u64 >= budget {
        return Err(SiteError::Budget(budget));
    }
    out.push(Sieve::generated(space, root, chosen)?);
    for i in from..opens.len() {
        let v = opens[i];
        if chosen.iter().all(|&c| !subset(c, v) && !subset(v, c)) {
            chosen.push(v);
            antichains(space, root, opens, i + 1, chosen, out, budget)?;
            chosen.pop();
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtAxiom {
    /// The maximal sieve covers.
    Maximal,
    /// Covering sieves are stable under pullback.
    Stability,
    /// Local character.
    Transitivity,
    /// The unit image of the maximal sieve covers.
    UnitMaximal,
    /// Unit images of canonical covers cover.
    UnitCanonical,
}

impl GtAxiom {
    pub const ALL: [GtAxiom; 5] = [
        GtAxiom::Maximal,
        GtAxiom::Stability,
        GtAxiom::Transitivity,
        GtAxiom::UnitMaximal,
        GtAxiom::UnitCanonical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GtAxiom::Maximal => "i",
            GtAxiom::Stability => "ii",
            GtAxiom::Transitivity => "iii",
            GtAxiom::UnitMaximal => "i'",
            GtAxiom::UnitCanonical => "i''",
        }
    }
}

/// Failing tuple: the open `u`, optional arrow source `w` and sieves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtWitness {
    pub u: Mask,
    pub w: Option<Mask>,
    pub s: Option<Sieve>,
    pub r: Option<Sieve>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtReport {
    pub axiom: GtAxiom,
    pub outcome: Outcome,
    pub instances: u64,
    pub witness: Option<GtWitness>,
}

impl GtReport {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn to_json(&self, space: &FiniteSpace) -> Value {
        let mut v = json!({
            "axiom": self.axiom.name(),
            "outcome": self.outcome,
            "instances": self.instances,
        });
        if let Some(w) = &self.witness {
            let mut o = json!({ "U": space.labels_of(w.u) });
            if let Some(x) = w.w {
                o["W"] = json!(space.labels_of(x));
            }
            if let Some(s) = &w.s {
                o["S"] = s.to_json(space);
            }
            if let Some(r) = &w.r {
                o["R"] = r.to_json(space);
            }
            v["witness"] = o;
        }
        v
    }
}

/// A coverage on sieves: where sieves on `u` live and which joins cover.
pub struct SieveTopology<'a> {
    space: &'a FiniteSpace,
    opens: Vec<Mask>,
    root: Box<dyn Fn(Mask) -> Mask + Sync + 'a>,
    covers: Box<dyn Fn(Mask, Mask) -> Option<bool> + Sync + 'a>,
    budget: u64,
}

impl<'a> SieveTopology<'a> {
    /// The canonical coverage: sieves on `u` whose join is `u`.
    pub fn canonical(space: &'a FiniteSpace, budget: u64) -> Result<Self, SiteError> {
        Ok(SieveTopology {
            space,
            opens: space.opens()?,
            root: Box::new(|u| u),
            covers: Box::new(|a, u| Some(a == u)),
            budget,
        })
    }

    /// Sieves on `⇓u` whose join lies in `Cov⁻(u)`.
    pub fn down(l: &'a OrderedLocale, tables: &'a CoverTables, budget: u64) -> Self {
        SieveTopology {
            space: l.space(),
            opens: tables.opens.clone(),
            root: Box::new(move |u| l.cone_down(u)),
            covers: Box::new(move |a, u| tables.member(Direction::Below, a, u)),
            budget,
        }
    }

    pub fn member(&self, u: Mask, r: &Sieve) -> Option<bool> {
        (self.covers)(r.join(), u)
    }

    fn sieves(&self, u: Mask) -> Result<Vec<Sieve>, SiteError> {
        all_sieves(self.space, (self.root)(u), self.budget)
    }

    pub fn check(&self, axiom: GtAxiom) -> Result<GtReport, SiteError> {
        let mut tally = Tally::new(axiom);
        for &u in &self.opens {
            let root = (self.root)(u);
            match axiom {
                GtAxiom::Maximal => {
                    let t = maximal_sieve(self.space, root)?;
                    tally.see(self.member(u, &t), || GtWitness { u, w: None, s: Some(t.clone()), r: None });
                }
                GtAxiom::UnitMaximal => {
                    let t = Sieve::generated(self.space, root, &[u])?;
                    tally.see(self.member(u, &t), || GtWitness { u, w: None, s: Some(t.clone()), r: None });
                }
                GtAxiom::UnitCanonical => {
                    for r in all_sieves(self.space, u, self.budget)? {
                        if r.join() != u {
                            continue;
                        }
                        let pushed = Sieve::generated(self.space, root, &r.generators())?;
                        tally.see(self.member(u, &pushed), || GtWitness { u, w: None, s: None, r: Some(r.clone()) });
                    }
                }
                GtAxiom::Stability => {
                    let sieves = self.sieves(u)?;
                    for s in sieves.iter().filter(|s| self.member(u, s) == Some(true)) {
                        for &w in self.opens.iter().filter(|&&w| subset(w, u)) {
                            let pulled = pullback(self.space, (self.root)(w), &restrict_root(s, (self.root)(w)))?;
                            tally.see(self.member(w, &pulled), || GtWitness {
                                u,
                                w: Some(w),
                                s: Some(s.clone()),
                                r: None,
                            });
                        }
                    }
                }
                GtAxiom::Transitivity => {
                    let sieves = self.sieves(u)?;
                    let covering: Vec<&Sieve> =
                        sieves.iter().filter(|s| self.member(u, s) == Some(true)).collect();
                    for s in covering {
                        for r in &sieves {
                            // Premise: R pulled back to each member of S covers it.
                            let mut premise = Some(true);
                            for &v in &s.members {
                                let pulled = pullback(self.space, (self.root)(v), &restrict_root(r, (self.root)(v)))?;
                                premise = and3(premise, self.member(v, &pulled));
                                if premise == Some(false) {
                                    break;
                                }
                            }
                            let verdict = match premise {
                                Some(false) => Some(true),
                                Some(true) => self.member(u, r),
                                None => match self.member(u, r) {
                                    Some(true) => Some(true),
                                    _ => None,
                                },
                            };
                            tally.see(verdict, || GtWitness {
                                u,
                                w: None,
                                s: Some(s.clone()),
                                r: Some(r.clone()),
                            });
                        }
                    }
                }
            }
        }
        Ok(tally.finish())
    }

    pub fn check_all(&self, axioms: &[GtAxiom]) -> Result<Vec<GtReport>, SiteError> {
        axioms.iter().map(|&a| self.check(a)).collect()
    }
}

/// View `s` as a sieve on a larger root so it can be pulled back to `to`;
/// members are unchanged since pullback meets them with `to` anyway.
fn restrict_root(s: &Sieve, to: Mask) -> Sieve {
    Sieve { root: s.root | to, members: s.members.clone() }
}

fn and3(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

struct Tally {
    axiom: GtAxiom,
    instances: u64,
    unknown: bool,
    witness: Option<GtWitness>,
}

impl Tally {
    fn new(axiom: GtAxiom) -> Self {
        Tally { axiom, instances: 0, unknown: false, witness: None }
    }

    fn see(&mut self, ok: Option<bool>, w: impl FnOnce() -> GtWitness) {
        self.instances += 1;
        match ok {
            Some(true) => {}
            Some(false) => {
                if self.witness.is_none() {
                    self.witness = Some(w());
                }
            }
            None => self.unknown = true,
        }
    }

    fn finish(self) -> GtReport {
        let outcome = if self.witness.is_some() {
            Outcome::Violated
        } else if self.unknown {
            Outcome::Unknown
        } else {
            Outcome::Holds
        };
        GtReport { axiom: self.axiom, outcome, instances: self.instances, witness: self.witness }
    }
}

/// Check all five axioms for the topology induced by `Cov⁻` on `l`.
pub fn verify_down_gt_axioms(l: &OrderedLocale, cfg: &CoverageConfig) -> Result<Vec<GtReport>, SiteError> {
    let engine = CoverageEngine::new(l, cfg.clone())?;
    let tables = CoverTables::compute(&engine)?;
    let topology = SieveTopology::down(l, &tables, cfg.budget);
    // Bound so the borrow of `tables` ends before it drops.
    #[allow(clippy::let_and_return)]
    let reports = topology.check_all(&GtAxiom::ALL);
    reports
}

/// Does the witness still violate its axiom when recomputed?
pub fn replay_gt_witness(t: &SieveTopology, r: &GtReport) -> Result<bool, SiteError> {
    let Some(w) = &r.witness else { return Ok(false) };
    let fails = |v: Mask, s: &Sieve| t.member(v, s) == Some(false);
    Ok(match r.axiom {
        GtAxiom::Maximal | GtAxiom::UnitMaximal => fails(w.u, w.s.as_ref().unwrap()),
        GtAxiom::UnitCanonical => {
            let rr = w.r.as_ref().unwrap();
            fails(w.u, &Sieve::generated(t.space, (t.root)(w.u), &rr.generators())?)
        }
        GtAxiom::Stability => {
            let (s, x) = (w.s.as_ref().unwrap(), w.w.unwrap());
            let root = (t.root)(x);
            t.member(w.u, s) == Some(true) && fails(x, &pullback(t.space, root, &restrict_root(s, root))?)
        }
        GtAxiom::Transitivity => {
            let (s, rr) = (w.s.as_ref().unwrap(), w.r.as_ref().unwrap());
            let mut premise = t.member(w.u, s) == Some(true);
            for &v in &s.members {
                let root = (t.root)(v);
                premise &= t.member(v, &pullback(t.space, root, &restrict_root(rr, root))?) == Some(true);
            }
            premise && fails(w.u, rr)
        }
    })
}

/// First failure of pullback stability in the plain Kleisli category of `⇓`,
/// where an arrow `W → U` is `W ⊑ ⇓U` and pulling `S` back keeps the members
/// below `⇓W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KleisliFailure {
    pub u: Mask,
    pub w: Mask,
    pub s: Sieve,
    pub pulled_join: Mask,
}

pub fn kleisli_stability_search(
    l: &OrderedLocale,
    tables: &CoverTables,
    budget: u64,
) -> Result<Option<KleisliFailure>, SiteError> {
    let space = l.space();
    for &u in &tables.opens {
        let root = l.cone_down(u);
        for s in all_sieves(space, root, budget)? {
            if tables.member(Direction::Below, s.join(), u) != Some(true) {
                continue;
            }
            for &w in tables.opens.iter().filter(|&&w| subset(w, root)) {
                let dw = l.cone_down(w);
                let pulled_join = s.members.iter().filter(|&&v| subset(v, dw)).fold(0, |a, &v| a | v);
                if tables.member(Direction::Below, pulled_join, w) == Some(false) {
                    return Ok(Some(KleisliFailure { u, w, s, pulled_join }));
                }
            }
        }
    }
    Ok(None)
}
