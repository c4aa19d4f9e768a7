//! Abstract causal coverages, the influence monads `L±` and domains of
//! dependence `D±`.
//!
//! Every table here is computed over decided entries only. Unknown entries
//! are left out of joins and counted, so `L` and `D` are certified lower
//! bounds when a frame is not fully decided.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coverage::{implies, CoverageConfig, CoverageEngine, CoverageError, Direction, PropertyTally, VerdictKind};
use crate::locale::{ConeFn, OrderedLocale};
use crate::space::{subset, FiniteSpace, Mask, SpaceError};

use Direction::{Above, Below};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    FromOrderedLocale { source: &'static str, bounds: Value },
    ExplicitTable,
}

enum Oracle<'a> {
    Engine(CoverageEngine<'a>),
    /// `below[u][a]`, `above[u][a]` indexed by frame position.
    Table { below: Vec<Vec<bool>>, above: Vec<Vec<bool>> },
}

pub struct AbstractCoverage<'a> {
    space: Arc<FiniteSpace>,
    opens: Vec<Mask>,
    index: HashMap<Mask, usize>,
    oracle: Oracle<'a>,
    provenance: Provenance,
    cache: Mutex<HashMap<(bool, Mask, Mask), Option<bool>>>,
}

fn dir_key(d: Direction) -> bool {
    d == Below
}

impl<'a> AbstractCoverage<'a> {
    /// `Cov⊴±` of an ordered locale under bounded semantics.
    pub fn from_locale(l: &'a OrderedLocale, cfg: &CoverageConfig) -> Result<Self, CoverageError> {
        let engine = CoverageEngine::new(l, cfg.clone())?;
        let opens = l.space().opens()?;
        let bounds = json!({
            "max_target_path_len": cfg.max_target_path_len,
            "max_refinement_len": cfg.max_refinement_len,
            "budget": cfg.budget,
        });
        Ok(Self::assemble(
            l.space_arc(),
            opens,
            Oracle::Engine(engine),
            Provenance::FromOrderedLocale { source: l.source_name(), bounds },
        ))
    }

    /// Explicit membership relation; `below(a, u)` means `a ∈ Cov⁻(u)`.
    pub fn explicit(
        space: Arc<FiniteSpace>,
        below: impl Fn(Mask, Mask) -> bool,
        above: impl Fn(Mask, Mask) -> bool,
    ) -> Result<Self, SpaceError> {
        let opens = space.opens()?;
        let tab = |f: &dyn Fn(Mask, Mask) -> bool| -> Vec<Vec<bool>> {
            opens.iter().map(|&u| opens.iter().map(|&a| f(a, u)).collect()).collect()
        };
        let oracle = Oracle::Table { below: tab(&below), above: tab(&above) };
        Ok(Self::assemble(space, opens, oracle, Provenance::ExplicitTable))
    }

    fn assemble(space: Arc<FiniteSpace>, opens: Vec<Mask>, oracle: Oracle<'a>, provenance: Provenance) -> Self {
        let index = opens.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        AbstractCoverage { space, opens, index, oracle, provenance, cache: Mutex::new(HashMap::new()) }
    }

    /// Copy of the fully decided table with one entry changed.
    pub fn with_entry(&self, d: Direction, a: Mask, u: Mask, value: bool) -> Option<AbstractCoverage<'static>> {
        let t = self.tabulate();
        if t.unknowns > 0 {
            return None;
        }
        let lookup = |dd: Direction| {
            let t = &t;
            move |x: Mask, y: Mask| {
                if dd == d && x == a && y == u {
                    value
                } else {
                    t.get(dd, x, y) == Some(true)
                }
            }
        };
        AbstractCoverage::explicit(self.space.clone(), lookup(Below), lookup(Above)).ok()
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn opens(&self) -> &[Mask] {
        &self.opens
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn member(&self, d: Direction, a: Mask, u: Mask) -> Option<bool> {
        let key = (dir_key(d), a, u);
        if let Some(&v) = self.cache.lock().unwrap().get(&key) {
            return v;
        }
        let v = match &self.oracle {
            Oracle::Table { below, above } => {
                let t = if d == Below { below } else { above };
                match (self.index.get(&u), self.index.get(&a)) {
                    (Some(&i), Some(&j)) => Some(t[i][j]),
                    _ => Some(false),
                }
            }
            Oracle::Engine(e) => match e.cover(d, a, u).map(|v| v.kind) {
                Ok(VerdictKind::Covered) => Some(true),
                Ok(VerdictKind::NotCovered) => Some(false),
                _ => None,
            },
        };
        self.cache.lock().unwrap().insert(key, v);
        v
    }

    /// Decide every pair, in parallel.
    pub fn tabulate(&self) -> Table {
        let n = self.opens.len();
        let row = |d: Direction| -> Vec<Vec<Option<bool>>> {
            self.opens
                .par_iter()
                .map(|&u| self.opens.iter().map(|&a| self.member(d, a, u)).collect())
                .collect()
        };
        let (below, above) = (row(Below), row(Above));
        let unknowns = below.iter().chain(&above).flatten().filter(|v| v.is_none()).count();
        Table { opens: self.opens.clone(), index: self.index.clone(), below, above, unknowns, n }
    }

    /// `L±(u) = ⋁Cov±(u)`.
    pub fn influence_of(&self, d: Direction, u: Mask) -> (Mask, bool) {
        let mut m = 0;
        let mut unknown = false;
        for &a in &self.opens {
            match self.member(d, a, u) {
                Some(true) => m |= a,
                Some(false) => {}
                None => unknown = true,
            }
        }
        (m, unknown)
    }

    /// `D⁺(a) = ⋁{v : a ∈ Cov⁻(v)}` when `future`, else `D⁻(a)` from `Cov⁺`.
    pub fn domain_of(&self, future: bool, a: Mask) -> DomainEntry {
        let d = if future { Below } else { Above };
        let results: Vec<(Mask, Option<bool>)> =
            self.opens.par_iter().map(|&v| (v, self.member(d, a, v))).collect();
        let mut entry = DomainEntry { region: a, domain: 0, covered: Vec::new(), unknown: Vec::new() };
        for (v, r) in results {
            match r {
                Some(true) => {
                    entry.domain |= v;
                    entry.covered.push(v);
                }
                Some(false) => {}
                None => entry.unknown.push(v),
            }
        }
        entry
    }
}

/// Fully tabulated coverage.
pub struct Table {
    pub opens: Vec<Mask>,
    index: HashMap<Mask, usize>,
    below: Vec<Vec<Option<bool>>>,
    above: Vec<Vec<Option<bool>>>,
    pub unknowns: usize,
    n: usize,
}

impl Table {
    /// Fully decided table from membership rows `rows[u][a]`.
    pub fn from_rows(opens: Vec<Mask>, below: &[Vec<bool>], above: &[Vec<bool>]) -> Table {
        let wrap = |r: &[Vec<bool>]| r.iter().map(|row| row.iter().map(|&b| Some(b)).collect()).collect();
        let index = opens.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let n = opens.len();
        Table { opens, index, below: wrap(below), above: wrap(above), unknowns: 0, n }
    }

    pub fn get(&self, d: Direction, a: Mask, u: Mask) -> Option<bool> {
        let t = if d == Below { &self.below } else { &self.above };
        match (self.index.get(&u), self.index.get(&a)) {
            (Some(&i), Some(&j)) => t[i][j],
            _ => Some(false),
        }
    }

    pub fn covers(&self, d: Direction, u: Mask) -> Vec<Mask> {
        self.opens.iter().copied().filter(|&a| self.get(d, a, u) == Some(true)).collect()
    }

    fn join_covers(&self, d: Direction, u: Mask) -> Mask {
        self.covers(d, u).into_iter().fold(0, |x, a| x | a)
    }

    /// `L⁺` (Above) or `L⁻` (Below) for every open, in frame order.
    pub fn influence(&self, d: Direction) -> Vec<Mask> {
        self.opens.iter().map(|&u| self.join_covers(d, u)).collect()
    }

    /// `D⁺` (future) or `D⁻` for every open, in frame order.
    pub fn domains(&self, future: bool) -> Vec<Mask> {
        let d = if future { Below } else { Above };
        self.opens
            .iter()
            .map(|&a| {
                self.opens.iter().filter(|&&v| self.get(d, a, v) == Some(true)).fold(0, |x, &v| x | v)
            })
            .collect()
    }

    fn pos(&self, m: Mask) -> usize {
        self.index[&m]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainEntry {
    pub region: Mask,
    pub domain: Mask,
    /// Opens certified as covered by `region`.
    pub covered: Vec<Mask>,
    /// Opens whose verdict stayed unknown; excluded from `domain`.
    pub unknown: Vec<Mask>,
}

/// Check C1–C5 over every tuple of opens.
pub fn check_causal_site_axioms(t: &Table) -> Vec<PropertyTally> {
    let opens = &t.opens;
    let mut c1 = PropertyTally::new("C1");
    let mut c2 = PropertyTally::new("C2");
    let mut c3 = PropertyTally::new("C3");
    let mut c4 = PropertyTally::new("C4");
    let mut c5 = PropertyTally::new("C5");
    for d in [Below, Above] {
        let other = if d == Below { Above } else { Below };
        c2.record(Some(t.covers(d, 0) == vec![0]), &[0]);
        for &u in opens {
            c1.record(t.get(d, u, u), &[u]);
            let covers = t.covers(d, u);
            for &a in opens {
                let m = t.get(d, a, u);
                if m != Some(false) {
                    for &b in opens {
                        let pre = match (t.get(d, b, a), m) {
                            (Some(true), Some(true)) => Some(true),
                            (Some(false), _) => Some(false),
                            _ => None,
                        };
                        c3.record(implies(pre, t.get(d, b, u)), &[b, a, u]);
                    }
                }
                if m == Some(true) {
                    let exists = opens.iter().any(|&w| subset(u, w) && t.get(other, w, a) == Some(true));
                    c5.record(Some(exists), &[a, u]);
                }
            }
            for (i, &a) in covers.iter().enumerate() {
                for &b in &covers[i..] {
                    let (lo, hi) = if subset(a, b) { (a, b) } else if subset(b, a) { (b, a) } else { continue };
                    for &c in opens.iter().filter(|&&c| subset(lo, c) && subset(c, hi)) {
                        c4.record(t.get(d, c, u), &[lo, c, hi, u]);
                    }
                }
            }
        }
        for (i, &u1) in opens.iter().enumerate() {
            for &u2 in &opens[i..] {
                let mut joins: Vec<Mask> = t
                    .covers(d, u1)
                    .iter()
                    .flat_map(|&a1| t.covers(d, u2).into_iter().map(move |a2| a1 | a2))
                    .collect();
                joins.sort_by_key(|&m| t.pos(m));
                joins.dedup();
                c2.record(Some(joins == t.covers(d, u1 | u2)), &[u1, u2]);
            }
        }
    }
    vec![c1, c2, c3, c4, c5]
}

fn monad_laws(name: &'static str, t: &Table, f: &[Mask]) -> PropertyTally {
    let mut tally = PropertyTally::new(name);
    let at = |m: Mask| f[t.pos(m)];
    tally.record(Some(at(0) == 0), &[0]);
    for &u in &t.opens {
        let fu = at(u);
        tally.record(Some(subset(u, fu) && t.index.contains_key(&fu) && at(fu) == fu), &[u]);
        for &v in &t.opens {
            tally.record(Some(at(u | v) == fu | at(v)), &[u, v]);
        }
    }
    tally
}

/// Influence monads with their law checks.
pub struct InfluenceResult {
    pub opens: Vec<Mask>,
    pub plus: Vec<Mask>,
    pub minus: Vec<Mask>,
    pub laws: Vec<PropertyTally>,
}

pub fn influence(t: &Table) -> InfluenceResult {
    let plus = t.influence(Above);
    let minus = t.influence(Below);
    let laws = vec![monad_laws("L+ monad", t, &plus), monad_laws("L- monad", t, &minus)];
    InfluenceResult { opens: t.opens.clone(), plus, minus, laws }
}

pub struct DependenceResult {
    pub opens: Vec<Mask>,
    pub plus: Vec<Mask>,
    pub minus: Vec<Mask>,
    pub unknowns: usize,
}

pub fn domain_of_dependence(t: &Table) -> DependenceResult {
    DependenceResult { opens: t.opens.clone(), plus: t.domains(true), minus: t.domains(false), unknowns: t.unknowns }
}

/// Identities relating `Cov±`, `L±` and `D±`; `order` is the relation to
/// recover, if any.
pub fn verify_dependence_lemmas(t: &Table, order: Option<&dyn Fn(Mask, Mask) -> bool>) -> Vec<PropertyTally> {
    let lp = t.influence(Above);
    let lm = t.influence(Below);
    let dp = t.domains(true);
    let dm = t.domains(false);
    let l = |d: Direction, m: Mask| if d == Above { lp[t.pos(m)] } else { lm[t.pos(m)] };
    let dom = |future: bool, m: Mask| if future { dp[t.pos(m)] } else { dm[t.pos(m)] };

    let mut d_monad = PropertyTally::new("D monad");
    let mut pull = PropertyTally::new("L pullback");
    let mut determ = PropertyTally::new("determination");
    let mut comp = PropertyTally::new("L after D");
    let mut below_l = PropertyTally::new("D below L");
    let mut recovery = PropertyTally::new("order recovery");
    let decided = t.unknowns == 0;

    for &a in &t.opens {
        for future in [true, false] {
            let da = dom(future, a);
            let idem = !decided || (t.index.contains_key(&da) && dom(future, da) == da);
            d_monad.record(Some(subset(a, da) && idem), &[a]);
            for &b in t.opens.iter().filter(|&&b| subset(a, b)) {
                d_monad.record(Some(subset(da, dom(future, b))), &[a, b]);
            }
            let d = if future { Above } else { Below };
            let ld = t.index.get(&da).map(|_| l(d, da));
            comp.record(Some(ld == Some(l(d, a))), &[a]);
            below_l.record(Some(subset(da, l(d, a))), &[a]);
        }
    }
    for d in [Below, Above] {
        // Cov⁻ pairs with D⁺, Cov⁺ with D⁻.
        let future = d == Below;
        for &u in &t.opens {
            for &a in &t.opens {
                let m = t.get(d, a, u);
                let rhs = subset(a, l(d, u)) && subset(u, dom(future, a));
                determ.record(m.map(|m| m == rhs), &[a, u]);
                if m == Some(true) {
                    for &w in t.opens.iter().filter(|&&w| subset(w, u)) {
                        pull.record(t.get(d, a & l(d, w), w), &[a, u, w]);
                    }
                }
            }
        }
    }
    if let Some(order) = order {
        for &u in &t.opens {
            for &v in &t.opens {
                let induced = subset(u, l(Below, v)) && subset(v, l(Above, u));
                recovery.record(Some(induced == order(u, v)), &[u, v]);
            }
        }
    }
    let mut out = vec![d_monad, pull, determ, comp, below_l];
    if order.is_some() {
        out.push(recovery);
    }
    out
}

/// Per-pair comparison between a coverage and the coverage induced by the
/// locale built from its influence monads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundtripReport {
    pub equal: u64,
    pub only_original: u64,
    pub only_roundtrip: u64,
    pub unknown: u64,
    /// First differing `(direction is below, a, u)`.
    pub first_difference: Option<(bool, Mask, Mask)>,
    /// Why no locale could be built from `L±`, if so.
    pub locale_error: Option<String>,
}

impl RoundtripReport {
    pub fn is_equal(&self) -> bool {
        self.locale_error.is_none() && self.only_original == 0 && self.only_roundtrip == 0 && self.unknown == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "equal": self.equal,
            "only_original": self.only_original,
            "only_roundtrip": self.only_roundtrip,
            "unknown": self.unknown,
            "locale_error": self.locale_error,
            "roundtrip_equal": self.is_equal(),
        })
    }
}

fn table_fn(opens: &[Mask], values: Vec<Mask>) -> ConeFn {
    let map: HashMap<Mask, Mask> = opens.iter().copied().zip(values).collect();
    Arc::new(move |m: Mask| map.get(&m).copied().unwrap_or(m))
}

pub fn roundtrip_experiment(
    space: Arc<FiniteSpace>,
    t: &Table,
    cfg: &CoverageConfig,
) -> Result<RoundtripReport, CoverageError> {
    let mut report = RoundtripReport::default();
    let up = table_fn(&t.opens, t.influence(Above));
    let down = table_fn(&t.opens, t.influence(Below));
    let l = match OrderedLocale::from_monad_pair(space, up, down) {
        Ok(l) => l,
        Err(e) => {
            report.locale_error = Some(e.to_string());
            return Ok(report);
        }
    };
    let rebuilt = AbstractCoverage::from_locale(&l, cfg)?.tabulate();
    for d in [Below, Above] {
        for &u in &t.opens {
            for &a in &t.opens {
                match (t.get(d, a, u), rebuilt.get(d, a, u)) {
                    (Some(x), Some(y)) if x == y => report.equal += 1,
                    (Some(x), Some(_)) => {
                        if x {
                            report.only_original += 1;
                        } else {
                            report.only_roundtrip += 1;
                        }
                        report.first_difference.get_or_insert((d == Below, a, u));
                    }
                    _ => report.unknown += 1,
                }
            }
        }
    }
    Ok(report)
}

/// Membership list of `(a, u)` pairs.
pub type Entries = Vec<(Mask, Mask)>;

/// Outcome of the exhaustive search over explicit tables on a frame.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableSearchReport {
    pub tables: u64,
    pub satisfying: u64,
    pub roundtrip_equal: u64,
    /// Tables passing C1–C5 whose roundtrip differs, as `(below, above)`
    /// membership lists of `(a, u)` pairs.
    pub candidates: Vec<(Entries, Entries)>,
}

/// Enumerate tables on `space`: free entries sit on join-irreducible
/// targets, every other target gets the joins of covers of its first
/// canonical splitting, and `Cov(∅) = {∅}`. Tables passing C1–C5 are
/// roundtripped. Returns `None` when a direction has more than `max_free`
/// free entries.
pub fn search_explicit_tables(
    space: Arc<FiniteSpace>,
    cfg: &CoverageConfig,
    max_free: usize,
) -> Result<Option<TableSearchReport>, CoverageError> {
    let opens = space.opens()?;
    let splits: Vec<Option<(usize, usize)>> = opens
        .iter()
        .map(|&u| {
            let pos = |m: Mask| opens.iter().position(|&o| o == m).unwrap();
            opens
                .iter()
                .filter(|&&x| x != u && subset(x, u))
                .flat_map(|&x| opens.iter().map(move |&y| (x, y)))
                .find(|&(x, y)| y != u && subset(y, u) && x | y == u && x != 0 && y != 0)
                .map(|(x, y)| (pos(x), pos(y)))
        })
        .collect();
    let free: Vec<(usize, Mask)> = opens
        .iter()
        .enumerate()
        .filter(|&(i, &u)| u != 0 && splits[i].is_none())
        .flat_map(|(i, &u)| opens.iter().filter(move |&&a| a != u).map(move |&a| (i, a)))
        .collect();
    if free.len() > max_free {
        return Ok(None);
    }
    let k = free.len();
    let build = |bits: u64| -> Vec<Vec<bool>> {
        let mut covers: Vec<Vec<Mask>> = vec![Vec::new(); opens.len()];
        for (i, &u) in opens.iter().enumerate() {
            covers[i] = match splits[i] {
                _ if u == 0 => vec![0],
                Some((x, y)) => {
                    let mut v: Vec<Mask> =
                        covers[x].iter().flat_map(|&a| covers[y].iter().map(move |&b| a | b)).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                }
                None => {
                    let mut v = vec![u];
                    v.extend(free.iter().enumerate().filter(|&(j, &(t, _))| t == i && bits >> j & 1 == 1).map(|(_, &(_, a))| a));
                    v
                }
            };
        }
        covers.iter().map(|c| opens.iter().map(|a| c.contains(a)).collect()).collect()
    };
    let tables: Vec<Vec<Vec<bool>>> = (0..1u64 << k).map(build).collect();
    let satisfying: Vec<(usize, usize)> = (0..tables.len())
        .into_par_iter()
        .flat_map_iter(|lo| {
            let tables = &tables;
            let opens = &opens;
            (0..tables.len()).filter_map(move |hi| {
                let t = Table::from_rows(opens.clone(), &tables[lo], &tables[hi]);
                check_causal_site_axioms(&t).iter().all(|p| p.holds()).then_some((lo, hi))
            })
        })
        .collect();
    let mut report = TableSearchReport { tables: 1u64 << (2 * k), satisfying: satisfying.len() as u64, ..Default::default() };
    for (lo, hi) in satisfying {
        let t = Table::from_rows(opens.clone(), &tables[lo], &tables[hi]);
        if roundtrip_experiment(space.clone(), &t, cfg)?.is_equal() {
            report.roundtrip_equal += 1;
        } else {
            let list = |rows: &Vec<Vec<bool>>| {
                let mut v = Vec::new();
                for (i, &u) in opens.iter().enumerate() {
                    for (j, &a) in opens.iter().enumerate() {
                        if rows[i][j] && a != u {
                            v.push((a, u));
                        }
                    }
                }
                v
            };
            report.candidates.push((list(&tables[lo]), list(&tables[hi])));
        }
    }
    Ok(Some(report))
}

/// JSON map from canonical open labels to open labels.
pub fn table_json(space: &FiniteSpace, opens: &[Mask], values: &[Mask]) -> Value {
    let mut m = serde_json::Map::new();
    for (&o, &v) in opens.iter().zip(values) {
        m.insert(space.show(o), json!(space.labels_of(v)));
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{chain3, vee};

    #[test]
    fn chain_domains() {
        let l = OrderedLocale::egli_milner(chain3());
        let c = AbstractCoverage::from_locale(&l, &CoverageConfig::default()).unwrap();
        assert_eq!(c.domain_of(true, 1).domain, 7);
        assert_eq!(c.domain_of(true, 0).domain, 0);
        let l = OrderedLocale::egli_milner(vee());
        let c = AbstractCoverage::from_locale(&l, &CoverageConfig::default()).unwrap();
        assert_eq!(c.domain_of(true, 1).domain, 1);
    }

    #[test]
    fn dropping_the_diagonal_breaks_reflexivity() {
        let l = OrderedLocale::egli_milner(chain3());
        let c = AbstractCoverage::from_locale(&l, &CoverageConfig::default()).unwrap();
        let broken = c.with_entry(Below, 2, 2, false).unwrap();
        assert_eq!(broken.provenance(), &Provenance::ExplicitTable);
        let r = check_causal_site_axioms(&broken.tabulate());
        assert_eq!(r[0].first_violation, Some(vec![2]));
    }
}
