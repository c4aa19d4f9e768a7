//! Discrete Minkowski-like grids, chain coverage and the five domains of
//! dependence.
//!
//! Cell `(x,t)` lies below `(x',t')` when `t ≤ t'` and `|x-x'|·slope ≤ t'-t`.
//! Holes are ignored by this formula: removing a cell does not change how the
//! remaining cells are ordered. Chains move one time row per link.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::coverage::{CoverageConfig, CoverageEngine, CoverageError, VerdictKind};
use crate::locale::{LocaleError, OrderedLocale};
use crate::space::{canon_sort, FiniteSpace, Mask, Topology, MAX_POINTS};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid dimensions must be positive")]
    ZeroDimension,
    #[error("cone slopes must be positive")]
    ZeroSlope,
    #[error("cell ({0},{1}) is outside the grid")]
    OutOfBounds(i64, i64),
    #[error("cell ({0},{1}) is a hole")]
    Hole(i64, i64),
    #[error("{0} cells exceed the frame capacity of 64; only chain operations are available")]
    Capacity(usize),
    #[error("malformed grid description: {0}")]
    Malformed(String),
    #[error(transparent)]
    Locale(#[from] LocaleError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridParams {
    pub width: usize,
    pub height: usize,
    pub up_slope: u32,
    pub down_slope: u32,
    #[serde(default)]
    pub holes: Vec<(i64, i64)>,
}

impl GridParams {
    pub fn new(width: usize, height: usize, slope: u32) -> Self {
        GridParams { width, height, up_slope: slope, down_slope: slope, holes: Vec::new() }
    }

    pub fn with_holes(mut self, holes: &[(i64, i64)]) -> Self {
        self.holes.extend_from_slice(holes);
        self
    }
}

pub type CellSet = Vec<bool>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChainMode {
    Causal,
    Chronological,
}

impl ChainMode {
    pub fn name(self) -> &'static str {
        match self {
            ChainMode::Causal => "causal",
            ChainMode::Chronological => "chronological",
        }
    }
}

/// Cells listed earliest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GridSpacetime {
    params: GridParams,
    cells: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
    space: Option<Arc<FiniteSpace>>,
}

pub fn build_grid(params: GridParams) -> Result<GridSpacetime, GridError> {
    if params.width == 0 || params.height == 0 {
        return Err(GridError::ZeroDimension);
    }
    if params.up_slope == 0 || params.down_slope == 0 {
        return Err(GridError::ZeroSlope);
    }
    let (w, h) = (params.width as i64, params.height as i64);
    for &(x, t) in &params.holes {
        if x < 0 || t < 0 || x >= w || t >= h {
            return Err(GridError::OutOfBounds(x, t));
        }
    }
    let mut cells = Vec::new();
    for t in 0..h {
        for x in 0..w {
            if !params.holes.contains(&(x, t)) {
                cells.push((x, t));
            }
        }
    }
    let index = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut g = GridSpacetime { params, cells, index, space: None };
    if g.cells.len() <= MAX_POINTS {
        let labels = g.cells.iter().map(|&(x, t)| format!("{x},{t}")).collect();
        let n = g.cells.len();
        let ups = (0..n)
            .map(|i| (0..n).filter(|&j| g.below(i, j, g.params.up_slope)).fold(0, |m, j| m | 1 << j))
            .collect();
        let name = format!("grid{}x{}", g.params.width, g.params.height);
        g.space = Some(Arc::new(FiniteSpace::from_cones(&name, labels, ups, Topology::Discrete)));
    }
    Ok(g)
}

impl GridSpacetime {
    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, i: usize) -> (i64, i64) {
        self.cells[i]
    }

    pub fn index_of(&self, x: i64, t: i64) -> Option<usize> {
        self.index.get(&(x, t)).copied()
    }

    pub fn is_hole(&self, x: i64, t: i64) -> bool {
        self.params.holes.contains(&(x, t))
    }

    /// Resolve coordinates to cell indices.
    pub fn cells_of(&self, coords: &[(i64, i64)]) -> Result<Vec<usize>, GridError> {
        let (w, h) = (self.params.width as i64, self.params.height as i64);
        coords
            .iter()
            .map(|&(x, t)| {
                if x < 0 || t < 0 || x >= w || t >= h {
                    Err(GridError::OutOfBounds(x, t))
                } else {
                    self.index_of(x, t).ok_or(GridError::Hole(x, t))
                }
            })
            .collect()
    }

    pub fn set_of(&self, cells: &[usize]) -> CellSet {
        let mut s = vec![false; self.cells.len()];
        for &c in cells {
            s[c] = true;
        }
        s
    }

    pub fn coords(&self, s: &CellSet) -> Vec<(i64, i64)> {
        s.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.cells[i]).collect()
    }

    /// Cell `i` lies in the cone below cell `j` for the given slope.
    fn below(&self, i: usize, j: usize, slope: u32) -> bool {
        let (xi, ti) = self.cells[i];
        let (xj, tj) = self.cells[j];
        tj >= ti && (xi - xj).abs() * slope as i64 <= tj - ti
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.below(i, j, self.params.up_slope)
    }

    pub fn has_equal_slopes(&self) -> bool {
        self.params.up_slope == self.params.down_slope
    }

    pub fn space(&self) -> Result<Arc<FiniteSpace>, GridError> {
        self.space.clone().ok_or(GridError::Capacity(self.cells.len()))
    }

    /// Egli–Milner locale for equal slopes; otherwise the pair of cone
    /// monads with the future cone using `up_slope` and the past cone
    /// `down_slope`.
    pub fn locale(&self) -> Result<OrderedLocale, GridError> {
        let space = self.space()?;
        if self.has_equal_slopes() {
            return Ok(OrderedLocale::egli_milner(space));
        }
        let n = self.cells.len();
        let cone = |slope: u32, up: bool| -> Vec<Mask> {
            (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| if up { self.below(i, j, slope) } else { self.below(j, i, slope) })
                        .fold(0, |m, j| m | 1 << j)
                })
                .collect()
        };
        let ups = cone(self.params.up_slope, true);
        let downs = cone(self.params.down_slope, false);
        let join = |table: Vec<Mask>| -> crate::locale::ConeFn {
            Arc::new(move |m: Mask| {
                crate::space::bits(m).fold(0, |acc, i| acc | table[i])
            })
        };
        Ok(OrderedLocale::from_monad_pair(space, join(ups), join(downs))?)
    }

    /// Order intervals `[a,b] = ⇑{a} ∧ ⇓{b}` for `a ⊴ b`: causal diamonds.
    pub fn interval_basis(&self, l: &OrderedLocale) -> Vec<Mask> {
        let n = self.cells.len();
        let mut v: Vec<Mask> = Vec::new();
        for a in 0..n {
            let up = l.cone_up(1 << a);
            for b in 0..n {
                if up >> b & 1 == 1 {
                    let d = up & l.cone_down(1 << b);
                    if d != 0 {
                        v.push(d);
                    }
                }
            }
        }
        canon_sort(&mut v);
        v.dedup();
        v
    }

    /// Causal past of a cell, holes ignored, using the past slope.
    pub fn past(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.cells.len()).filter(move |&j| self.below(j, i, self.params.down_slope))
    }

    fn past_meets(&self, i: usize, a: &CellSet) -> bool {
        self.past(i).any(|j| a[j])
    }

    /// Immediate predecessors one row down, with the link displacement.
    pub fn predecessors(&self, i: usize) -> Vec<(usize, i64)> {
        let (x, t) = self.cells[i];
        let s = self.params.down_slope as i64;
        (-1..=1)
            .filter(|dx: &i64| dx.abs() * s <= 1)
            .filter_map(|dx| self.index_of(x - dx, t - 1).map(|j| (j, dx)))
            .collect()
    }

    pub fn is_past_inextendible(&self, i: usize) -> bool {
        self.predecessors(i).is_empty()
    }

    /// Chronological links compare cell extents: the unit squares around
    /// the two cells must contain a strictly timelike pair. On one time row
    /// this holds for every causal link.
    fn link_allowed(&self, mode: ChainMode, dx: i64) -> bool {
        match mode {
            ChainMode::Causal => true,
            ChainMode::Chronological => {
                (dx.abs() - 1).max(0) * (self.params.down_slope as i64) < 2
            }
        }
    }

    fn back_moves(&self, mode: ChainMode, cell: usize) -> impl Iterator<Item = usize> + '_ {
        self.predecessors(cell)
            .into_iter()
            .filter(move |&(_, dx)| self.link_allowed(mode, dx))
            .map(|(j, _)| j)
    }

    /// Chains ending in `cell`, in depth-first order; with `inextendible`
    /// only those whose earliest cell has no predecessor. At most `limit`.
    pub fn chains_through(
        &self,
        cell: usize,
        mode: ChainMode,
        inextendible: bool,
        limit: usize,
    ) -> Vec<Chain> {
        let mut out = Vec::new();
        let mut stack = vec![vec![cell]];
        while let Some(rev) = stack.pop() {
            if out.len() >= limit {
                break;
            }
            let head = *rev.last().unwrap();
            if !inextendible || self.is_past_inextendible(head) {
                let mut cells = rev.clone();
                cells.reverse();
                out.push(Chain { cells });
            }
            let moves: Vec<usize> = self.back_moves(mode, head).collect();
            for &j in moves.iter().rev() {
                let mut v = rev.clone();
                v.push(j);
                stack.push(v);
            }
        }
        out
    }

    pub fn is_chain(&self, c: &Chain, mode: ChainMode) -> bool {
        !c.cells.is_empty()
            && c.cells.windows(2).all(|w| self.back_moves(mode, w[1]).any(|j| j == w[0]))
    }

    /// Search for a chain ending in `cell` that avoids `a` and whose start
    /// has no cell of `a` in its past.
    fn dodging_chain(&self, cell: usize, a: &CellSet, mode: ChainMode) -> Option<Chain> {
        if a[cell] {
            return None;
        }
        let mut parent: HashMap<usize, usize> = HashMap::from([(cell, cell)]);
        let mut queue = VecDeque::from([cell]);
        while let Some(y) = queue.pop_front() {
            if !self.past_meets(y, a) {
                let mut cells = vec![y];
                let mut c = y;
                while c != cell {
                    c = parent[&c];
                    cells.push(c);
                }
                return Some(Chain { cells });
            }
            for j in self.back_moves(mode, y) {
                if !a[j] && !parent.contains_key(&j) {
                    parent.insert(j, y);
                    queue.push_back(j);
                }
            }
        }
        None
    }

    /// `A` covers `U` from below with chains: `A` lies in the past of `U` and
    /// every chain ending in `U` meets `A` or starts with `A` in its past.
    pub fn chain_cover_minus(&self, a: &CellSet, u: &CellSet, mode: ChainMode) -> ChainCover {
        let in_past = (0..a.len())
            .filter(|&i| a[i])
            .all(|i| (0..u.len()).any(|j| u[j] && self.below(i, j, self.params.down_slope)));
        if !in_past {
            return ChainCover { holds: false, outside_past: true, witness: None };
        }
        for c in (0..u.len()).filter(|&c| u[c]) {
            if let Some(w) = self.dodging_chain(c, a, mode) {
                return ChainCover { holds: false, outside_past: false, witness: Some(w) };
            }
        }
        ChainCover { holds: true, outside_past: false, witness: None }
    }

    /// Cells all of whose past-inextendible chains meet `A`. Cells are in
    /// time order, so one forward sweep settles every cell.
    pub fn domain_inextendible(&self, a: &CellSet, mode: ChainMode) -> CellSet {
        let mut escapes = vec![false; self.cells.len()];
        for c in 0..self.cells.len() {
            escapes[c] = !a[c]
                && (self.is_past_inextendible(c) || self.back_moves(mode, c).any(|j| escapes[j]));
        }
        escapes.into_iter().map(|e| !e).collect()
    }

    /// Join of all regions that `A` covers with chains; cellwise, the cells
    /// from which no chain dodges `A`.
    pub fn domain_bounded(&self, a: &CellSet, mode: ChainMode) -> CellSet {
        (0..self.cells.len()).map(|c| self.dodging_chain(c, a, mode).is_none()).collect()
    }

    /// Cells `x` with `A ∧ ⇓{x} ∈ Cov⁻({x})` over the interval basis.
    pub fn domain_localic(&self, a: &CellSet, cfg: &CoverageConfig) -> Result<LocalicColumn, GridError> {
        let l = self.locale()?;
        let cfg = cfg.clone().with_basis(self.interval_basis(&l));
        let engine = CoverageEngine::new(&l, cfg)?;
        let am = mask_of(a);
        let mut cells = vec![false; self.cells.len()];
        let mut unknown = Vec::new();
        let mut states = 0;
        for x in 0..self.cells.len() {
            let v = engine.cov_minus(am & l.cone_down(1 << x), 1 << x)?;
            states += v.states;
            match v.kind {
                VerdictKind::Covered => cells[x] = true,
                VerdictKind::NotCovered => {}
                VerdictKind::Unknown => unknown.push(x),
            }
        }
        Ok(LocalicColumn { cells, unknown, states })
    }

    pub fn domains_all(&self, a: &CellSet, cfg: &CoverageConfig) -> DomainReport {
        let localic = self.domain_localic(a, cfg).ok();
        let columns = vec![
            ("inext-causal", self.domain_inextendible(a, ChainMode::Causal)),
            ("inext-chron", self.domain_inextendible(a, ChainMode::Chronological)),
            ("bounded-causal", self.domain_bounded(a, ChainMode::Causal)),
            ("bounded-chron", self.domain_bounded(a, ChainMode::Chronological)),
        ];
        let mut report = DomainReport {
            region: a.clone(),
            columns: columns.into_iter().map(|(n, s)| (n.to_string(), Some(s))).collect(),
            localic_unknown: Vec::new(),
            inclusions: Vec::new(),
        };
        report.columns.push((
            "localic".to_string(),
            localic.as_ref().map(|c| c.cells.clone()),
        ));
        if let Some(c) = &localic {
            report.localic_unknown = c.unknown.clone();
        }
        report.inclusions = report.compute_inclusions();
        report
    }

    pub fn render_ascii(&self, marks: &[(char, &CellSet)]) -> String {
        let mut out = String::new();
        for t in (0..self.params.height as i64).rev() {
            for x in 0..self.params.width as i64 {
                let ch = match self.index_of(x, t) {
                    None => '#',
                    Some(i) => marks.iter().find(|(_, s)| s[i]).map(|(c, _)| *c).unwrap_or('.'),
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "grid",
            "width": self.params.width,
            "height": self.params.height,
            "up_slope": self.params.up_slope,
            "down_slope": self.params.down_slope,
            "holes": self.params.holes.iter().map(|&(x, t)| [x, t]).collect::<Vec<_>>(),
        })
    }
}

pub fn mask_of(s: &CellSet) -> Mask {
    s.iter().enumerate().filter(|(_, &b)| b).fold(0, |m, (i, _)| m | 1 << i)
}

pub fn set_from_mask(m: Mask, n: usize) -> CellSet {
    (0..n).map(|i| m >> i & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainCover {
    pub holds: bool,
    /// `A` is not contained in the past of `U`.
    pub outside_past: bool,
    pub witness: Option<Chain>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalicColumn {
    pub cells: CellSet,
    /// Cells whose verdict stayed unknown; they are left out of `cells`.
    pub unknown: Vec<usize>,
    pub states: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inclusion {
    pub lhs: String,
    pub rhs: String,
    pub subset: bool,
    pub strict: bool,
    /// First cell of `lhs` outside `rhs`, else first cell of `rhs` outside `lhs`.
    pub witness: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainReport {
    pub region: CellSet,
    /// Column name and cell set; `None` when the column is unavailable.
    pub columns: Vec<(String, Option<CellSet>)>,
    pub localic_unknown: Vec<usize>,
    pub inclusions: Vec<Inclusion>,
}

/// Inclusions the theory predicts, in chain order.
pub const EXPECTED_INCLUSIONS: [(&str, &str); 5] = [
    ("inext-causal", "inext-chron"),
    ("inext-causal", "bounded-causal"),
    ("inext-chron", "bounded-chron"),
    ("bounded-causal", "bounded-chron"),
    ("bounded-chron", "localic"),
];

impl DomainReport {
    pub fn column(&self, name: &str) -> Option<&CellSet> {
        self.columns.iter().find(|(n, _)| n == name).and_then(|(_, s)| s.as_ref())
    }

    fn compute_inclusions(&self) -> Vec<Inclusion> {
        let mut out = Vec::new();
        for (i, (ln, ls)) in self.columns.iter().enumerate() {
            for (rn, rs) in &self.columns[i + 1..] {
                let (Some(ls), Some(rs)) = (ls, rs) else { continue };
                for (a, an, b, bn) in [(ls, ln, rs, rn), (rs, rn, ls, ln)] {
                    let outside = (0..a.len()).find(|&c| a[c] && !b[c]);
                    let extra = (0..a.len()).find(|&c| b[c] && !a[c]);
                    if EXPECTED_INCLUSIONS.contains(&(an.as_str(), bn.as_str())) {
                        out.push(Inclusion {
                            lhs: an.clone(),
                            rhs: bn.clone(),
                            subset: outside.is_none(),
                            strict: outside.is_none() && extra.is_some(),
                            witness: outside.or(extra),
                        });
                    }
                }
            }
        }
        out.sort_by_key(|inc| {
            EXPECTED_INCLUSIONS
                .iter()
                .position(|&(l, r)| l == inc.lhs && r == inc.rhs)
                .unwrap_or(usize::MAX)
        });
        out
    }

    /// All predicted inclusions that could be evaluated hold.
    pub fn chain_holds(&self) -> bool {
        self.inclusions.iter().all(|i| i.subset)
    }

    pub fn to_json(&self, g: &GridSpacetime) -> Value {
        let cells = |s: &CellSet| {
            g.coords(s).into_iter().map(|(x, t)| [x, t]).collect::<Vec<_>>()
        };
        let mut cols = serde_json::Map::new();
        for (n, s) in &self.columns {
            cols.insert(n.clone(), s.as_ref().map(|s| json!(cells(s))).unwrap_or(json!("unavailable")));
        }
        json!({
            "region": cells(&self.region),
            "domains": cols,
            "localic_unknown": self.localic_unknown.iter().map(|&i| { let (x, t) = g.cell(i); [x, t] }).collect::<Vec<_>>(),
            "inclusions": self.inclusions.iter().map(|i| json!({
                "lhs": i.lhs,
                "rhs": i.rhs,
                "subset": i.subset,
                "strict": i.strict,
                "witness": i.witness.map(|c| { let (x, t) = g.cell(c); [x, t] }),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Grid description as read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridJson {
    pub kind: String,
    pub width: usize,
    pub height: usize,
    #[serde(default = "one")]
    pub up_slope: u32,
    #[serde(default = "one")]
    pub down_slope: u32,
    #[serde(default)]
    pub holes: Vec<[i64; 2]>,
    #[serde(default)]
    pub regions: HashMap<String, Vec<[i64; 2]>>,
}

fn one() -> u32 {
    1
}

impl GridJson {
    pub fn params(&self) -> Result<GridParams, GridError> {
        if self.kind != "grid" {
            return Err(GridError::Malformed(format!("kind {:?} is not \"grid\"", self.kind)));
        }
        Ok(GridParams {
            width: self.width,
            height: self.height,
            up_slope: self.up_slope,
            down_slope: self.down_slope,
            holes: self.holes.iter().map(|&[x, t]| (x, t)).collect(),
        })
    }

    pub fn region(&self, g: &GridSpacetime, name: &str) -> Result<CellSet, GridError> {
        let coords: Vec<(i64, i64)> = self
            .regions
            .get(name)
            .map(|v| v.iter().map(|&[x, t]| (x, t)).collect())
            .unwrap_or_default();
        Ok(g.set_of(&g.cells_of(&coords)?))
    }
}

/// A named grid with designated regions.
#[derive(Debug, Clone)]
pub struct GridScenario {
    pub name: String,
    pub grid: GridSpacetime,
    pub a: CellSet,
    pub u: CellSet,
}

pub const GRID_SCENARIOS: [&str; 6] = [
    "MINKOWSKI_PLAIN",
    "POINT_REMOVED",
    "CONE_CUT",
    "CURVE_REMOVED_FROM_A",
    "REGION_REMOVED",
    "TWO_SLOPES(1,2)",
];

fn row(t: i64, xs: std::ops::RangeInclusive<i64>) -> Vec<(i64, i64)> {
    xs.map(|x| (x, t)).collect()
}

/// Look up a grid scenario. `TWO_SLOPES(a,b)` takes any positive slopes.
pub fn grid_scenario(name: &str) -> Option<GridScenario> {
    type Cells = Vec<(i64, i64)>;
    let (params, a, u): (GridParams, Cells, Cells) = match name {
        "MINKOWSKI_PLAIN" => (GridParams::new(7, 5, 1), row(0, 1..=5), vec![(3, 2)]),
        "POINT_REMOVED" => {
            (GridParams::new(7, 5, 1).with_holes(&[(3, 2)]), row(0, 1..=5), vec![(3, 3)])
        }
        "CONE_CUT" => (
            GridParams::new(7, 5, 1).with_holes(&[(2, 1), (3, 1), (4, 1)]),
            row(0, 1..=5),
            vec![(3, 2)],
        ),
        "CURVE_REMOVED_FROM_A" => {
            let mut a = row(0, 0..=6);
            a.extend(row(1, 0..=6));
            a.retain(|&(x, _)| x != 3);
            (GridParams::new(7, 5, 1), a, vec![(3, 3)])
        }
        "REGION_REMOVED" => (
            GridParams::new(7, 6, 1).with_holes(&[(2, 2), (3, 2), (4, 2), (2, 3), (3, 3), (4, 3)]),
            row(0, 0..=6),
            vec![(3, 4)],
        ),
        _ => {
            let inner = name.strip_prefix("TWO_SLOPES(")?.strip_suffix(')')?;
            let (p, q) = inner.split_once(',')?;
            let (up, down): (u32, u32) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
            if up == 0 || down == 0 {
                return None;
            }
            let params = GridParams { up_slope: up, down_slope: down, ..GridParams::new(3, 3, 1) };
            (params, row(0, 0..=2), vec![(1, 2)])
        }
    };
    let grid = build_grid(params).ok()?;
    let a = grid.set_of(&grid.cells_of(&a).ok()?);
    let u = grid.set_of(&grid.cells_of(&u).ok()?);
    Some(GridScenario { name: name.to_string(), grid, a, u })
}
