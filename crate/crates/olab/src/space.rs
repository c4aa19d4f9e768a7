//! Finite preordered topological spaces over word-sized point masks.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A set of point indices, bit `i` standing for point `i`.
pub type Mask = u64;

/// Spaces are limited to one machine word of points.
pub const MAX_POINTS: usize = 64;

/// Largest discrete space whose topology may be enumerated.
pub const DISCRETE_ENUM_CAP: usize = 16;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SpaceError {
    #[error("duplicate point label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown point label `{0}`")]
    UnknownLabel(String),
    #[error("{0} points exceed the capacity of {MAX_POINTS}")]
    TooManyPoints(usize),
    #[error("discrete topology on {points} points exceeds the enumeration cap of {cap}")]
    EnumerationCap { points: usize, cap: usize },
    #[error("point index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("set {0:#x} is not open")]
    NotOpen(Mask),
    #[error("malformed space description: {0}")]
    Malformed(String),
}

/// Iterate over the indices of set bits, lowest first.
pub fn bits(mut m: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// All submasks of `m`, including `0` and `m` itself.
pub fn submasks(m: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(m);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & m) };
        Some(cur)
    })
}

#[inline]
pub fn subset(a: Mask, b: Mask) -> bool {
    a & !b == 0
}

/// Canonical order on sets: by cardinality, then lexicographically on the
/// ascending index lists.
pub fn canon_cmp(a: Mask, b: Mask) -> Ordering {
    match a.count_ones().cmp(&b.count_ones()) {
        Ordering::Equal => {}
        o => return o,
    }
    let (mut x, mut y) = (a, b);
    while x != 0 && y != 0 {
        let (i, j) = (x.trailing_zeros(), y.trailing_zeros());
        if i != j {
            return i.cmp(&j);
        }
        x &= x - 1;
        y &= y - 1;
    }
    Ordering::Equal
}

pub fn canon_sort(v: &mut [Mask]) {
    v.sort_by(|a, b| canon_cmp(*a, *b));
}

fn full_mask(n: usize) -> Mask {
    if n == 64 {
        !0
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    /// Every subset is open; enumerated only on demand.
    Discrete,
    /// Explicit canonical list of opens.
    Listed(Vec<Mask>),
}

/// How the caller describes a topology to [`FiniteSpace::build`].
#[derive(Debug, Clone)]
pub enum TopologySpec {
    Discrete,
    Subbase(Vec<Vec<String>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    name: String,
    labels: Vec<String>,
    /// `ups[i]` is the set of points above `i`, including `i`.
    ups: Vec<Mask>,
    downs: Vec<Mask>,
    topology: Topology,
    full: Mask,
}

/// Which cone fails to be open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeSide {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenConesVerdict {
    pub holds: bool,
    /// First open (canonical order) with a non-open cone.
    pub witness: Option<(Mask, ConeSide)>,
}

impl FiniteSpace {
    pub fn build<S: AsRef<str>>(
        name: &str,
        points: &[S],
        order_pairs: &[(S, S)],
        topology: TopologySpec,
    ) -> Result<Self, SpaceError> {
        let n = points.len();
        if n > MAX_POINTS {
            return Err(SpaceError::TooManyPoints(n));
        }
        let mut index = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.as_ref().to_string(), i).is_some() {
                return Err(SpaceError::DuplicateLabel(p.as_ref().to_string()));
            }
        }
        let lookup = |l: &str| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| SpaceError::UnknownLabel(l.to_string()))
        };
        let mut pairs = Vec::with_capacity(order_pairs.len());
        for (a, b) in order_pairs {
            pairs.push((lookup(a.as_ref())?, lookup(b.as_ref())?));
        }
        let topology = match topology {
            TopologySpec::Discrete => Topology::Discrete,
            TopologySpec::Subbase(sets) => {
                let mut masks = Vec::with_capacity(sets.len());
                for s in &sets {
                    let mut m = 0;
                    for l in s {
                        m |= 1 << lookup(l)?;
                    }
                    masks.push(m);
                }
                Topology::Listed(close_topology(full_mask(n), &masks))
            }
        };
        let labels = points.iter().map(|p| p.as_ref().to_string()).collect();
        Ok(Self::from_relation(name, labels, &pairs, topology))
    }

    /// Build from index pairs and a ready topology. The pairs are closed
    /// reflexively and transitively.
    pub fn from_relation(
        name: &str,
        labels: Vec<String>,
        pairs: &[(usize, usize)],
        topology: Topology,
    ) -> Self {
        let n = labels.len();
        assert!(n <= MAX_POINTS);
        let mut ups: Vec<Mask> = (0..n).map(|i| 1 << i).collect();
        for &(a, b) in pairs {
            ups[a] |= 1 << b;
        }
        // Warshall over successor masks.
        for k in 0..n {
            for i in 0..n {
                if ups[i] >> k & 1 == 1 {
                    ups[i] |= ups[k];
                }
            }
        }
        Self::from_cones(name, labels, ups, topology)
    }

    /// Build from already reflexive-transitive successor masks.
    pub fn from_cones(name: &str, labels: Vec<String>, ups: Vec<Mask>, topology: Topology) -> Self {
        let n = labels.len();
        let mut downs = vec![0; n];
        for (i, &u) in ups.iter().enumerate() {
            for j in bits(u) {
                downs[j] |= 1 << i;
            }
        }
        let topology = match topology {
            Topology::Listed(mut v) => {
                canon_sort(&mut v);
                v.dedup();
                Topology::Listed(v)
            }
            t => t,
        };
        FiniteSpace { name: name.to_string(), labels, ups, downs, topology, full: full_mask(n) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn full(&self) -> Mask {
        self.full
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.topology, Topology::Discrete)
    }

    pub fn index_of(&self, label: &str) -> Result<usize, SpaceError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| SpaceError::UnknownLabel(label.to_string()))
    }

    pub fn mask_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Mask, SpaceError> {
        let mut m = 0;
        for l in labels {
            m |= 1 << self.index_of(l.as_ref())?;
        }
        Ok(m)
    }

    pub fn labels_of(&self, m: Mask) -> Vec<&str> {
        bits(m).map(|i| self.labels[i].as_str()).collect()
    }

    /// `{a,b}` style rendering used in reports.
    pub fn show(&self, m: Mask) -> String {
        format!("{{{}}}", self.labels_of(m).join(","))
    }

    pub fn check_mask(&self, m: Mask) -> Result<(), SpaceError> {
        if m & !self.full != 0 {
            Err(SpaceError::IndexOutOfRange(63 - (m & !self.full).leading_zeros() as usize))
        } else {
            Ok(())
        }
    }

    /// `i ≤ j` in the point order.
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.ups[i] >> j & 1 == 1
    }

    pub fn point_up(&self, i: usize) -> Mask {
        self.ups[i]
    }

    pub fn point_down(&self, i: usize) -> Mask {
        self.downs[i]
    }

    pub fn up_set(&self, a: Mask) -> Mask {
        bits(a).fold(0, |acc, i| acc | self.ups[i])
    }

    pub fn down_set(&self, a: Mask) -> Mask {
        bits(a).fold(0, |acc, i| acc | self.downs[i])
    }

    pub fn is_open(&self, a: Mask) -> bool {
        match &self.topology {
            Topology::Discrete => a & !self.full == 0,
            Topology::Listed(v) => v.binary_search_by(|o| canon_cmp(*o, a)).is_ok(),
        }
    }

    /// Largest open contained in `a`.
    pub fn interior(&self, a: Mask) -> Mask {
        match &self.topology {
            Topology::Discrete => a & self.full,
            Topology::Listed(v) => v.iter().filter(|&&o| subset(o, a)).fold(0, |acc, o| acc | o),
        }
    }

    /// Number of opens, without enumerating a discrete topology.
    pub fn open_count(&self) -> u128 {
        match &self.topology {
            Topology::Discrete => 1u128 << self.len(),
            Topology::Listed(v) => v.len() as u128,
        }
    }

    pub fn is_enumerable(&self) -> bool {
        match self.topology {
            Topology::Discrete => self.len() <= DISCRETE_ENUM_CAP,
            Topology::Listed(_) => true,
        }
    }

    /// All opens in canonical order.
    pub fn opens(&self) -> Result<Vec<Mask>, SpaceError> {
        match &self.topology {
            Topology::Discrete => {
                if self.len() > DISCRETE_ENUM_CAP {
                    return Err(SpaceError::EnumerationCap {
                        points: self.len(),
                        cap: DISCRETE_ENUM_CAP,
                    });
                }
                let mut v: Vec<Mask> = (0..=self.full).collect();
                canon_sort(&mut v);
                Ok(v)
            }
            Topology::Listed(v) => Ok(v.clone()),
        }
    }

    pub fn has_open_cones(&self) -> Result<OpenConesVerdict, SpaceError> {
        if self.is_discrete() {
            return Ok(OpenConesVerdict { holds: true, witness: None });
        }
        for u in self.opens()? {
            if !self.is_open(self.up_set(u)) {
                return Ok(OpenConesVerdict { holds: false, witness: Some((u, ConeSide::Up)) });
            }
            if !self.is_open(self.down_set(u)) {
                return Ok(OpenConesVerdict { holds: false, witness: Some((u, ConeSide::Down)) });
            }
        }
        Ok(OpenConesVerdict { holds: true, witness: None })
    }

    /// Point-induced Egli–Milner order on subsets.
    pub fn egli_milner(&self, u: Mask, v: Mask) -> bool {
        subset(u, self.down_set(v)) && subset(v, self.up_set(u))
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn to_json(&self) -> SpaceJson {
        let mut order = Vec::new();
        for i in 0..self.len() {
            for j in bits(self.ups[i] & !(1 << i)) {
                order.push((self.labels[i].clone(), self.labels[j].clone()));
            }
        }
        let topology = match &self.topology {
            Topology::Discrete => TopologyJson::Discrete,
            Topology::Listed(v) => TopologyJson::Subbase {
                sets: v
                    .iter()
                    .filter(|&&m| m != 0 && m != self.full)
                    .map(|&m| self.labels_of(m).into_iter().map(String::from).collect())
                    .collect(),
            },
        };
        SpaceJson { name: self.name.clone(), points: self.labels.clone(), order, topology }
    }
}

/// Saturate under binary union and intersection, adding `∅` and `full`.
pub fn close_topology(full: Mask, subbase: &[Mask]) -> Vec<Mask> {
    let mut seen: HashSet<Mask> = HashSet::new();
    let mut list = Vec::new();
    let mut work: Vec<Mask> = vec![0, full];
    work.extend_from_slice(subbase);
    while let Some(m) = work.pop() {
        if !seen.insert(m) {
            continue;
        }
        for &o in &list {
            for c in [m | o, m & o] {
                if !seen.contains(&c) {
                    work.push(c);
                }
            }
        }
        list.push(m);
    }
    canon_sort(&mut list);
    list
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SpaceJson {
    pub name: String,
    pub points: Vec<String>,
    #[serde(default)]
    pub order: Vec<(String, String)>,
    pub topology: TopologyJson,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TopologyJson {
    Discrete,
    Subbase { sets: Vec<Vec<String>> },
}

impl SpaceJson {
    pub fn build(&self) -> Result<FiniteSpace, SpaceError> {
        let topo = match &self.topology {
            TopologyJson::Discrete => TopologySpec::Discrete,
            TopologyJson::Subbase { sets } => TopologySpec::Subbase(sets.clone()),
        };
        FiniteSpace::build(&self.name, &self.points, &self.order, topo)
    }
}

pub fn parse_space(text: &str) -> Result<FiniteSpace, SpaceError> {
    let j: SpaceJson =
        serde_json::from_str(text).map_err(|e| SpaceError::Malformed(e.to_string()))?;
    j.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> FiniteSpace {
        FiniteSpace::build("CHAIN3", &["a", "b", "c"], &[("a", "b"), ("b", "c")], TopologySpec::Discrete)
            .unwrap()
    }

    fn star() -> FiniteSpace {
        let sets = [vec!["m"], vec!["p"], vec!["m", "z", "p"], vec!["s"]];
        FiniteSpace::build(
            "STAR",
            &["s", "m", "z", "p"],
            &[("s", "z")],
            TopologySpec::Subbase(
                sets.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect(),
            ),
        )
        .unwrap()
    }

    #[test]
    fn canonical_order() {
        let mut v = vec![0b110, 0b001, 0b011, 0b000, 0b101, 0b100];
        canon_sort(&mut v);
        assert_eq!(v, vec![0b000, 0b001, 0b100, 0b011, 0b101, 0b110]);
    }

    #[test]
    fn submask_enumeration() {
        let mut v: Vec<_> = submasks(0b1010).collect();
        v.sort();
        assert_eq!(v, vec![0, 0b10, 0b1000, 0b1010]);
    }

    #[test]
    fn chain_cones() {
        let s = chain3();
        assert_eq!(s.up_set(0b001), 0b111);
        assert_eq!(s.down_set(0b100), 0b111);
        assert_eq!(s.up_set(0), 0);
        assert_eq!(s.opens().unwrap().len(), 8);
        assert!(s.egli_milner(0b001, 0b010));
        assert!(!s.egli_milner(0b010, 0b001));
        assert!(!s.egli_milner(0, 0b010));
    }

    #[test]
    fn star_topology() {
        let s = star();
        let sz = s.mask_of(&["s", "z"]).unwrap();
        assert!(!s.is_open(sz));
        assert_eq!(s.interior(sz), s.mask_of(&["s"]).unwrap());
        assert_eq!(s.opens().unwrap().len(), 10);
        let v = s.has_open_cones().unwrap();
        assert_eq!(v.witness, Some((s.mask_of(&["s"]).unwrap(), ConeSide::Up)));
    }

    #[test]
    fn build_errors() {
        let e = FiniteSpace::build("x", &["a", "a"], &[], TopologySpec::Discrete).unwrap_err();
        assert_eq!(e, SpaceError::DuplicateLabel("a".into()));
        let e = FiniteSpace::build("x", &["a"], &[("a", "q")], TopologySpec::Discrete).unwrap_err();
        assert_eq!(e, SpaceError::UnknownLabel("q".into()));
        let labels: Vec<String> = (0..17).map(|i| format!("p{i}")).collect();
        let s = FiniteSpace::build("big", &labels, &[], TopologySpec::Discrete).unwrap();
        assert!(matches!(s.opens(), Err(SpaceError::EnumerationCap { points: 17, cap: 16 })));
        let labels: Vec<String> = (0..65).map(|i| format!("p{i}")).collect();
        assert_eq!(
            FiniteSpace::build("huge", &labels, &[], TopologySpec::Discrete).unwrap_err(),
            SpaceError::TooManyPoints(65)
        );
    }

    #[test]
    fn json_roundtrip() {
        let s = star();
        let text = serde_json::to_string(&s.to_json()).unwrap();
        let back = parse_space(&text).unwrap();
        assert_eq!(back.opens().unwrap(), s.opens().unwrap());
        assert_eq!(back.point_up(0), s.point_up(0));
        assert!(matches!(parse_space("{"), Err(SpaceError::Malformed(_))));
    }
}
