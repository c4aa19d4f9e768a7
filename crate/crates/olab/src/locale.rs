//! Ordered locales over a finite frame and exhaustive axiom checkers.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::space::{canon_sort, subset, FiniteSpace, Mask, SpaceError};

/// An open-to-open map used as one half of a monad pair.
pub type ConeFn = Arc<dyn Fn(Mask) -> Mask + Send + Sync>;

#[derive(Clone)]
pub enum OrderSource {
    /// `U ⊴ V` iff `U ⊆ ↓V` and `V ⊆ ↑U`.
    EgliMilner,
    /// `U ⊴ V` iff `U ⊑ down(V)` and `V ⊑ up(U)`.
    MonadPair { up: ConeFn, down: ConeFn },
    /// `U ⊴ V` iff `V ⊆ ↑U`.
    Upper,
}

impl fmt::Debug for OrderSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderSource::EgliMilner => "EgliMilner",
            OrderSource::MonadPair { .. } => "MonadPair",
            OrderSource::Upper => "Upper",
        })
    }
}

#[derive(Debug, Error)]
pub enum LocaleError {
    #[error("{cone} map violates the {law} law at {open}")]
    MonadLaw { cone: &'static str, law: &'static str, open: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Debug)]
pub struct OrderedLocale {
    space: Arc<FiniteSpace>,
    source: OrderSource,
}

/// Which opens an exhaustive check quantifies over.
#[derive(Clone, Debug, Default)]
pub enum Universe {
    #[default]
    All,
    Explicit(Vec<Mask>),
}

impl OrderedLocale {
    pub fn egli_milner(space: impl Into<Arc<FiniteSpace>>) -> Self {
        OrderedLocale { space: space.into(), source: OrderSource::EgliMilner }
    }

    pub fn upper(space: impl Into<Arc<FiniteSpace>>) -> Self {
        OrderedLocale { space: space.into(), source: OrderSource::Upper }
    }

    /// The equality order: identity monads on both sides.
    pub fn equality(space: impl Into<Arc<FiniteSpace>>) -> Self {
        let id: ConeFn = Arc::new(|u| u);
        OrderedLocale {
            space: space.into(),
            source: OrderSource::MonadPair { up: id.clone(), down: id },
        }
    }

    /// Build from a pair of monads on the frame. The monad laws are checked on
    /// every open when the frame is enumerable, otherwise on singletons and
    /// the full set.
    pub fn from_monad_pair(
        space: impl Into<Arc<FiniteSpace>>,
        up: ConeFn,
        down: ConeFn,
    ) -> Result<Self, LocaleError> {
        let space = space.into();
        let sample: Vec<Mask> = if space.is_enumerable() {
            space.opens()?
        } else {
            let mut v: Vec<Mask> = (0..space.len()).map(|i| 1 << i).collect();
            v.push(0);
            v.push(space.full());
            v
        };
        for (cone, f) in [("up", &up), ("down", &down)] {
            for &u in &sample {
                let fu = f(u);
                let law = if !space.is_open(fu) {
                    Some("openness")
                } else if !subset(u, fu) {
                    Some("unit")
                } else if f(fu) != fu {
                    Some("idempotence")
                } else {
                    None
                };
                if let Some(law) = law {
                    return Err(LocaleError::MonadLaw { cone, law, open: space.show(u) });
                }
            }
            for &u in &sample {
                for &v in &sample {
                    if subset(u, v) && !subset(f(u), f(v)) {
                        return Err(LocaleError::MonadLaw {
                            cone,
                            law: "monotonicity",
                            open: space.show(u),
                        });
                    }
                }
            }
        }
        Ok(OrderedLocale { space, source: OrderSource::MonadPair { up, down } })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn space_arc(&self) -> Arc<FiniteSpace> {
        self.space.clone()
    }

    pub fn source(&self) -> &OrderSource {
        &self.source
    }

    pub fn source_name(&self) -> &'static str {
        match self.source {
            OrderSource::EgliMilner => "egli-milner",
            OrderSource::MonadPair { .. } => "monad-pair",
            OrderSource::Upper => "upper",
        }
    }

    pub fn full(&self) -> Mask {
        self.space.full()
    }

    /// The causal order `U ⊴ V`.
    pub fn leq(&self, u: Mask, v: Mask) -> bool {
        match &self.source {
            OrderSource::EgliMilner => self.space.egli_milner(u, v),
            OrderSource::MonadPair { up, down } => subset(u, down(v)) && subset(v, up(u)),
            OrderSource::Upper => subset(v, self.space.up_set(u)),
        }
    }

    /// Future localic cone `⇑U`.
    pub fn cone_up(&self, u: Mask) -> Mask {
        match &self.source {
            OrderSource::EgliMilner | OrderSource::Upper => {
                self.space.interior(self.space.up_set(u))
            }
            OrderSource::MonadPair { up, .. } => up(u),
        }
    }

    /// Past localic cone `⇓U`.
    pub fn cone_down(&self, u: Mask) -> Mask {
        match &self.source {
            OrderSource::EgliMilner => self.space.interior(self.space.down_set(u)),
            OrderSource::MonadPair { down, .. } => down(u),
            OrderSource::Upper => self.space.full(),
        }
    }

    /// `⋁{V : U ⊴ V}` over the enumerated frame.
    pub fn cone_up_by_join(&self, u: Mask) -> Result<Mask, SpaceError> {
        Ok(self.space.opens()?.into_iter().filter(|&v| self.leq(u, v)).fold(0, |a, v| a | v))
    }

    /// `⋁{W : W ⊴ U}` over the enumerated frame.
    pub fn cone_down_by_join(&self, u: Mask) -> Result<Mask, SpaceError> {
        Ok(self.space.opens()?.into_iter().filter(|&w| self.leq(w, u)).fold(0, |a, w| a | w))
    }

    /// Resolve a universe to a canonical list of opens.
    pub fn universe(&self, u: &Universe) -> Result<Vec<Mask>, SpaceError> {
        match u {
            Universe::All => self.space.opens(),
            Universe::Explicit(list) => {
                let mut v = list.clone();
                for &m in &v {
                    self.space.check_mask(m)?;
                    if !self.space.is_open(m) {
                        return Err(SpaceError::NotOpen(m));
                    }
                }
                canon_sort(&mut v);
                v.dedup();
                Ok(v)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Axiom {
    Join,
    ConeOrder,
    ConeJoinUp,
    ConeJoinDown,
    WedgePlus,
    WedgeMinus,
    Bottom,
    FrobeniusMinus,
    FrobeniusPlus,
    Parallel,
}

impl Axiom {
    pub const ALL: [Axiom; 10] = [
        Axiom::Join,
        Axiom::ConeOrder,
        Axiom::ConeJoinUp,
        Axiom::ConeJoinDown,
        Axiom::WedgePlus,
        Axiom::WedgeMinus,
        Axiom::Bottom,
        Axiom::FrobeniusMinus,
        Axiom::FrobeniusPlus,
        Axiom::Parallel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Join => "join",
            Axiom::ConeOrder => "cone-order",
            Axiom::ConeJoinUp => "cone-join-up",
            Axiom::ConeJoinDown => "cone-join-down",
            Axiom::WedgePlus => "wedge-plus",
            Axiom::WedgeMinus => "wedge-minus",
            Axiom::Bottom => "bottom",
            Axiom::FrobeniusMinus => "frobenius-minus",
            Axiom::FrobeniusPlus => "frobenius-plus",
            Axiom::Parallel => "parallel",
        }
    }

    pub fn from_name(s: &str) -> Option<Axiom> {
        Axiom::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Violated,
    Unknown,
}

impl Outcome {
    pub fn from_bool(b: bool) -> Outcome {
        if b {
            Outcome::Holds
        } else {
            Outcome::Violated
        }
    }

    /// Conjunction: any violation wins, then any unknown.
    pub fn and(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Violated, _) | (_, Outcome::Violated) => Outcome::Violated,
            (Outcome::Unknown, _) | (_, Outcome::Unknown) => Outcome::Unknown,
            _ => Outcome::Holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub roles: Vec<&'static str>,
    pub opens: Vec<Mask>,
}

impl Witness {
    fn new(roles: &[&'static str], opens: Vec<Mask>) -> Self {
        Witness { roles: roles.to_vec(), opens }
    }

    pub fn get(&self, role: &str) -> Option<Mask> {
        self.roles.iter().position(|r| *r == role).map(|i| self.opens[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    /// For composite axioms, the component that produced the witness.
    pub via: Option<Axiom>,
    pub note: Option<String>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn to_json(&self, space: &FiniteSpace) -> Value {
        let mut v = json!({ "axiom": self.axiom.name(), "outcome": self.outcome });
        if let Some(w) = &self.witness {
            let mut obj = serde_json::Map::new();
            for (r, m) in w.roles.iter().zip(&w.opens) {
                obj.insert(r.to_string(), json!(space.labels_of(*m)));
            }
            v["witness"] = Value::Object(obj);
        }
        if let Some(a) = self.via {
            v["via"] = json!(a.name());
        }
        if let Some(n) = &self.note {
            v["note"] = json!(n);
        }
        v
    }
}

fn report(axiom: Axiom, found: Option<Witness>) -> AxiomReport {
    AxiomReport {
        axiom,
        outcome: Outcome::from_bool(found.is_none()),
        witness: found,
        via: None,
        note: None,
    }
}

fn unknown(axiom: Axiom, work: u128, budget: u64) -> AxiomReport {
    AxiomReport {
        axiom,
        outcome: Outcome::Unknown,
        witness: None,
        via: None,
        note: Some(format!("needs {work} checks, budget is {budget}")),
    }
}

/// First pair `(i, j)` in lexicographic order for which `bad` holds.
fn first_pair(n: usize, bad: impl Fn(usize, usize) -> bool + Sync) -> Option<(usize, usize)> {
    (0..n).into_par_iter().find_map_first(|i| (0..n).find(|&j| bad(i, j)).map(|j| (i, j)))
}

/// Checker bound to one locale and one universe of opens.
pub struct AxiomChecker<'a> {
    l: &'a OrderedLocale,
    opens: Vec<Mask>,
    budget: u64,
}

impl<'a> AxiomChecker<'a> {
    pub fn new(l: &'a OrderedLocale, universe: &Universe, budget: u64) -> Result<Self, SpaceError> {
        Ok(AxiomChecker { l, opens: l.universe(universe)?, budget })
    }

    pub fn opens(&self) -> &[Mask] {
        &self.opens
    }

    fn cube(&self) -> u128 {
        (self.opens.len() as u128).pow(3)
    }

    fn square(&self) -> u128 {
        (self.opens.len() as u128).pow(2)
    }

    pub fn check(&self, axiom: Axiom) -> AxiomReport {
        match axiom {
            Axiom::Join => self.join(),
            Axiom::ConeOrder => self.cone_order(),
            Axiom::ConeJoinUp => self.cone_join(Axiom::ConeJoinUp),
            Axiom::ConeJoinDown => self.cone_join(Axiom::ConeJoinDown),
            Axiom::WedgePlus => self.wedge_plus(),
            Axiom::WedgeMinus => self.wedge_minus(),
            Axiom::Bottom => self.bottom(),
            Axiom::FrobeniusMinus => self.frobenius_minus(),
            Axiom::FrobeniusPlus => self.frobenius_plus(),
            Axiom::Parallel => self.parallel(),
        }
    }

    pub fn check_all(&self, selection: &[Axiom]) -> Vec<AxiomReport> {
        selection.iter().map(|&a| self.check(a)).collect()
    }

    /// Nullary and binary instances of `Uᵢ ⊴ Vᵢ ⇒ ⋁Uᵢ ⊴ ⋁Vᵢ`.
    fn join(&self) -> AxiomReport {
        let l = self.l;
        if !l.leq(0, 0) {
            return report(Axiom::Join, Some(Witness::new(&[], vec![])));
        }
        let o = &self.opens;
        let related: Vec<(Mask, Mask)> = o
            .iter()
            .flat_map(|&u| o.iter().filter(move |&&v| l.leq(u, v)).map(move |&v| (u, v)))
            .collect();
        let work = (related.len() as u128).pow(2);
        if work > self.budget as u128 {
            return unknown(Axiom::Join, work, self.budget);
        }
        let found = first_pair(related.len(), |a, b| {
            let ((u1, v1), (u2, v2)) = (related[a], related[b]);
            !l.leq(u1 | u2, v1 | v2)
        });
        report(
            Axiom::Join,
            found.map(|(a, b)| {
                let ((u1, v1), (u2, v2)) = (related[a], related[b]);
                Witness::new(&["U1", "V1", "U2", "V2"], vec![u1, v1, u2, v2])
            }),
        )
    }

    fn cone_order(&self) -> AxiomReport {
        let (l, o) = (self.l, &self.opens);
        if self.square() > self.budget as u128 {
            return unknown(Axiom::ConeOrder, self.square(), self.budget);
        }
        let found = first_pair(o.len(), |i, j| {
            let (u, v) = (o[i], o[j]);
            l.leq(u, v) != (subset(u, l.cone_down(v)) && subset(v, l.cone_up(u)))
        });
        report(Axiom::ConeOrder, found.map(|(i, j)| Witness::new(&["U", "V"], vec![o[i], o[j]])))
    }

    fn cone_join(&self, axiom: Axiom) -> AxiomReport {
        let l = self.l;
        let cone = |u: Mask| if axiom == Axiom::ConeJoinUp { l.cone_up(u) } else { l.cone_down(u) };
        if cone(0) != 0 {
            return report(axiom, Some(Witness::new(&[], vec![])));
        }
        if self.square() > self.budget as u128 {
            return unknown(axiom, self.square(), self.budget);
        }
        let o = &self.opens;
        let found = first_pair(o.len(), |i, j| cone(o[i] | o[j]) != cone(o[i]) | cone(o[j]));
        report(axiom, found.map(|(i, j)| Witness::new(&["U", "V"], vec![o[i], o[j]])))
    }

    /// Strong square: `W ⊑ U ⊴ V` gives `W ⊴ ⇑W ∧ V`.
    fn wedge_plus(&self) -> AxiomReport {
        let (l, o) = (self.l, &self.opens);
        if self.cube() > self.budget as u128 {
            return unknown(Axiom::WedgePlus, self.cube(), self.budget);
        }
        let found = (0..o.len()).into_par_iter().find_map_first(|wi| {
            let w = o[wi];
            let uw = l.cone_up(w);
            for &u in o.iter().filter(|&&u| subset(w, u)) {
                for &v in o.iter() {
                    if l.leq(u, v) && !l.leq(w, uw & v) {
                        return Some(vec![w, u, v]);
                    }
                }
            }
            None
        });
        report(Axiom::WedgePlus, found.map(|t| Witness::new(&["W", "U", "V"], t)))
    }

    /// Strong square: `W ⊑ V` and `U ⊴ V` give `⇓W ∧ U ⊴ W`.
    fn wedge_minus(&self) -> AxiomReport {
        let (l, o) = (self.l, &self.opens);
        if self.cube() > self.budget as u128 {
            return unknown(Axiom::WedgeMinus, self.cube(), self.budget);
        }
        let found = (0..o.len()).into_par_iter().find_map_first(|wi| {
            let w = o[wi];
            let dw = l.cone_down(w);
            for &u in o.iter() {
                for &v in o.iter().filter(|&&v| subset(w, v)) {
                    if l.leq(u, v) && !l.leq(dw & u, w) {
                        return Some(vec![w, u, v]);
                    }
                }
            }
            None
        });
        report(Axiom::WedgeMinus, found.map(|t| Witness::new(&["W", "U", "V"], t)))
    }

    fn bottom(&self) -> AxiomReport {
        let l = self.l;
        let found = self
            .opens
            .iter()
            .find(|&&u| u != 0 && (l.leq(u, 0) || l.leq(0, u)))
            .map(|&u| Witness::new(&["U"], vec![u]));
        report(Axiom::Bottom, found)
    }

    /// `U ∧ ⇓V ⊑ ⇓(⇑U ∧ V)`.
    fn frobenius_minus(&self) -> AxiomReport {
        let (l, o) = (self.l, &self.opens);
        if self.square() > self.budget as u128 {
            return unknown(Axiom::FrobeniusMinus, self.square(), self.budget);
        }
        let found = first_pair(o.len(), |i, j| {
            let (u, v) = (o[i], o[j]);
            !subset(u & l.cone_down(v), l.cone_down(l.cone_up(u) & v))
        });
        report(
            Axiom::FrobeniusMinus,
            found.map(|(i, j)| Witness::new(&["U", "V"], vec![o[i], o[j]])),
        )
    }

    /// `V ∧ ⇑U ⊑ ⇑(U ∧ ⇓V)`.
    fn frobenius_plus(&self) -> AxiomReport {
        let (l, o) = (self.l, &self.opens);
        if self.square() > self.budget as u128 {
            return unknown(Axiom::FrobeniusPlus, self.square(), self.budget);
        }
        let found = first_pair(o.len(), |i, j| {
            let (u, v) = (o[i], o[j]);
            !subset(v & l.cone_up(u), l.cone_up(u & l.cone_down(v)))
        });
        report(
            Axiom::FrobeniusPlus,
            found.map(|(i, j)| Witness::new(&["U", "V"], vec![o[i], o[j]])),
        )
    }

    fn parallel(&self) -> AxiomReport {
        let mut outcome = Outcome::Holds;
        let mut note = None;
        for part in [Axiom::WedgePlus, Axiom::WedgeMinus, Axiom::Bottom] {
            let r = self.check(part);
            match r.outcome {
                Outcome::Violated => {
                    return AxiomReport {
                        axiom: Axiom::Parallel,
                        outcome: Outcome::Violated,
                        witness: r.witness,
                        via: Some(part),
                        note: None,
                    }
                }
                Outcome::Unknown => {
                    outcome = Outcome::Unknown;
                    note = r.note;
                }
                Outcome::Holds => {}
            }
        }
        AxiomReport { axiom: Axiom::Parallel, outcome, witness: None, via: None, note }
    }

    /// Original existential form of both meet squares.
    pub fn wedge_existential(&self) -> Outcome {
        let (l, o) = (self.l, &self.opens);
        let work = self.cube() * o.len() as u128;
        if work > self.budget as u128 {
            return Outcome::Unknown;
        }
        // U ⊑ V ⊴ V' needs some U' with U ⊴ U' ⊑ V'.
        let plus = (0..o.len()).into_par_iter().all(|i| {
            let u = o[i];
            o.iter().filter(|&&v| subset(u, v)).all(|&v| {
                o.iter()
                    .filter(|&&v2| l.leq(v, v2))
                    .all(|&v2| o.iter().any(|&u2| subset(u2, v2) && l.leq(u, u2)))
            })
        });
        // U' ⊑ V' and V ⊴ V' need some U with U ⊑ V and U ⊴ U'.
        let minus = (0..o.len()).into_par_iter().all(|i| {
            let u2 = o[i];
            o.iter().filter(|&&v2| subset(u2, v2)).all(|&v2| {
                o.iter()
                    .filter(|&&v| l.leq(v, v2))
                    .all(|&v| o.iter().any(|&u| subset(u, v) && l.leq(u, u2)))
            })
        });
        Outcome::from_bool(plus && minus)
    }

    /// Both relations of the arbitrary-opens lemma for every pair.
    pub fn arbitrary_opens_relations(&self) -> Option<(Mask, Mask)> {
        let (l, o) = (self.l, &self.opens);
        first_pair(o.len(), |i, j| {
            let (u, v) = (o[i], o[j]);
            let a = u & l.cone_down(v);
            let b = l.cone_up(u) & v;
            !l.leq(a, v & l.cone_up(a)) || !l.leq(u & l.cone_down(b), b)
        })
        .map(|(i, j)| (o[i], o[j]))
    }

    /// `U ∧ ⇓V = ∅` iff `⇑U ∧ V = ∅` for every pair.
    pub fn cones_parallel(&self) -> Option<(Mask, Mask)> {
        let (l, o) = (self.l, &self.opens);
        first_pair(o.len(), |i, j| {
            let (u, v) = (o[i], o[j]);
            (u & l.cone_down(v) == 0) != (l.cone_up(u) & v == 0)
        })
        .map(|(i, j)| (o[i], o[j]))
    }
}

pub fn check_axioms(
    l: &OrderedLocale,
    universe: &Universe,
    selection: &[Axiom],
    budget: u64,
) -> Result<Vec<AxiomReport>, SpaceError> {
    Ok(AxiomChecker::new(l, universe, budget)?.check_all(selection))
}

/// Re-derive the violation recorded in a report.
pub fn replay_witness(l: &OrderedLocale, r: &AxiomReport) -> bool {
    let Some(w) = &r.witness else { return false };
    let g = |role| w.get(role).unwrap_or(0);
    match r.via.unwrap_or(r.axiom) {
        Axiom::Join => {
            if w.opens.is_empty() {
                !l.leq(0, 0)
            } else {
                l.leq(g("U1"), g("V1"))
                    && l.leq(g("U2"), g("V2"))
                    && !l.leq(g("U1") | g("U2"), g("V1") | g("V2"))
            }
        }
        Axiom::ConeOrder => {
            let (u, v) = (g("U"), g("V"));
            l.leq(u, v) != (subset(u, l.cone_down(v)) && subset(v, l.cone_up(u)))
        }
        a @ (Axiom::ConeJoinUp | Axiom::ConeJoinDown) => {
            let cone = |u| if a == Axiom::ConeJoinUp { l.cone_up(u) } else { l.cone_down(u) };
            if w.opens.is_empty() {
                cone(0) != 0
            } else {
                cone(g("U") | g("V")) != cone(g("U")) | cone(g("V"))
            }
        }
        Axiom::WedgePlus => {
            let (wm, u, v) = (g("W"), g("U"), g("V"));
            subset(wm, u) && l.leq(u, v) && !l.leq(wm, l.cone_up(wm) & v)
        }
        Axiom::WedgeMinus => {
            let (wm, u, v) = (g("W"), g("U"), g("V"));
            subset(wm, v) && l.leq(u, v) && !l.leq(l.cone_down(wm) & u, wm)
        }
        Axiom::Bottom => {
            let u = g("U");
            u != 0 && (l.leq(u, 0) || l.leq(0, u))
        }
        Axiom::FrobeniusMinus => {
            let (u, v) = (g("U"), g("V"));
            !subset(u & l.cone_down(v), l.cone_down(l.cone_up(u) & v))
        }
        Axiom::FrobeniusPlus => {
            let (u, v) = (g("U"), g("V"));
            !subset(v & l.cone_up(u), l.cone_up(u & l.cone_down(v)))
        }
        Axiom::Parallel => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub name: &'static str,
    pub lhs: Outcome,
    pub rhs: Outcome,
    /// For implications, agreement means the implication was not refuted.
    pub implication: bool,
    pub agree: bool,
}

fn equivalence(name: &'static str, lhs: Outcome, rhs: Outcome, implication: bool) -> Equivalence {
    let agree = if lhs == Outcome::Unknown || rhs == Outcome::Unknown {
        true
    } else if implication {
        lhs == Outcome::Violated || rhs == Outcome::Holds
    } else {
        lhs == rhs
    };
    Equivalence { name, lhs, rhs, implication, agree }
}

/// Evaluate both sides of each biconditional independently.
pub fn check_equivalences(
    l: &OrderedLocale,
    universe: &Universe,
    budget: u64,
) -> Result<Vec<Equivalence>, SpaceError> {
    let c = AxiomChecker::new(l, universe, budget)?;
    let wedge = c.wedge_existential();
    let cone_order = c.check(Axiom::ConeOrder).outcome;
    let frob = c.check(Axiom::FrobeniusMinus).outcome.and(c.check(Axiom::FrobeniusPlus).outcome);
    let strong = c.check(Axiom::WedgePlus).outcome.and(c.check(Axiom::WedgeMinus).outcome);
    let parallel = strong.and(c.check(Axiom::Bottom).outcome);
    let disjoint = Outcome::from_bool(c.cones_parallel().is_none());
    let arbitrary = Outcome::from_bool(c.arbitrary_opens_relations().is_none());
    Ok(vec![
        equivalence("wedge-iff-cone-order-and-frobenius", wedge, cone_order.and(frob), false),
        equivalence("wedge-iff-strong-squares", wedge, strong, false),
        equivalence("wedge-implies-cone-order", wedge, cone_order, true),
        equivalence("parallel-implies-disjoint-cones", parallel, disjoint, true),
        equivalence("parallel-implies-arbitrary-opens-order", parallel, arbitrary, true),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{chain3, star, lvfail};

    const B: u64 = 1 << 40;

    #[test]
    fn chain_cones_and_axioms() {
        let l = OrderedLocale::egli_milner(chain3());
        assert_eq!(l.cone_up(0b001), 0b111);
        assert_eq!(l.cone_down(0b100), 0b111);
        assert_eq!(l.cone_up(0), 0);
        let reps = check_axioms(&l, &Universe::All, &Axiom::ALL, B).unwrap();
        assert!(reps.iter().all(|r| r.holds()), "{reps:?}");
    }

    #[test]
    fn star_frobenius_witness() {
        let s = star();
        let l = OrderedLocale::egli_milner(s.clone());
        let r = check_axioms(&l, &Universe::All, &[Axiom::FrobeniusMinus], B).unwrap().remove(0);
        let w = r.witness.clone().unwrap();
        assert_eq!(w.get("U"), Some(s.mask_of(&["s"]).unwrap()));
        assert_eq!(w.get("V"), Some(s.mask_of(&["m", "z", "p"]).unwrap()));
        assert!(replay_witness(&l, &r));
    }

    #[test]
    fn lvfail_up_cone_drops_point() {
        let s = lvfail();
        let l = OrderedLocale::egli_milner(s.clone());
        let u = s.mask_of(&["a0", "a1"]).unwrap();
        assert_eq!(l.cone_up(u), s.mask_of(&["a0", "a1", "b1"]).unwrap());
    }

    #[test]
    fn equality_order() {
        let l = OrderedLocale::equality(chain3());
        for u in 0..8 {
            for v in 0..8 {
                assert_eq!(l.leq(u, v), u == v);
            }
        }
    }

    #[test]
    fn monad_law_violation_is_named() {
        let shrink: ConeFn = Arc::new(|u| u & 1);
        let id: ConeFn = Arc::new(|u| u);
        let e = OrderedLocale::from_monad_pair(chain3(), shrink, id).unwrap_err();
        assert!(matches!(e, LocaleError::MonadLaw { cone: "up", law: "unit", .. }));
    }

    #[test]
    fn upper_order_cones() {
        let l = OrderedLocale::upper(chain3());
        for u in 0..8 {
            assert_eq!(l.cone_up(u), l.cone_up_by_join(u).unwrap());
            assert_eq!(l.cone_down(u), l.cone_down_by_join(u).unwrap());
        }
        let r = check_axioms(&l, &Universe::All, &[Axiom::ConeJoinDown], B).unwrap().remove(0);
        assert_eq!(r.outcome, Outcome::Violated);
        assert!(r.witness.unwrap().opens.is_empty());
    }

    #[test]
    fn budget_gives_unknown() {
        let l = OrderedLocale::egli_milner(chain3());
        let r = check_axioms(&l, &Universe::All, &[Axiom::WedgePlus], 10).unwrap().remove(0);
        assert_eq!(r.outcome, Outcome::Unknown);
    }
}
