//! Named example spaces used across the workbench.

use crate::space::{FiniteSpace, TopologySpec};

fn subbase(sets: &[&[&str]]) -> TopologySpec {
    TopologySpec::Subbase(
        sets.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect(),
    )
}

/// Three points `a ≤ b ≤ c`, discrete.
pub fn chain3() -> FiniteSpace {
    FiniteSpace::build("chain3", &["a", "b", "c"], &[("a", "b"), ("b", "c")], TopologySpec::Discrete)
        .expect("chain3")
}

/// `s ≤ z` with opens generated by `{m}`, `{p}`, `{m,z,p}`, `{s}`.
pub fn star() -> FiniteSpace {
    FiniteSpace::build(
        "star",
        &["s", "m", "z", "p"],
        &[("s", "z")],
        subbase(&[&["m"], &["p"], &["m", "z", "p"], &["s"]]),
    )
    .expect("star")
}

/// Two chains `a0 ≤ b0`, `a1 ≤ b1`; every open around `b0` also holds
/// `b-1` and `b1`, so the future of `{a0,a1}` misses exactly `b0`.
pub fn lvfail() -> FiniteSpace {
    FiniteSpace::build(
        "lvfail",
        &["a0", "a1", "b-1", "b0", "b1"],
        &[("a0", "b0"), ("a1", "b1")],
        subbase(&[&["a0", "a1"], &["a1"], &["b-1"], &["b1"], &["b-1", "b0", "b1"]]),
    )
    .expect("lvfail")
}

/// `x ≤ z`, `y ≤ z`, discrete.
pub fn vee() -> FiniteSpace {
    FiniteSpace::build("vee", &["x", "y", "z"], &[("x", "z"), ("y", "z")], TopologySpec::Discrete)
        .expect("vee")
}

/// Look up a named space.
pub fn named_space(name: &str) -> Option<FiniteSpace> {
    match name {
        "chain3" => Some(chain3()),
        "star" => Some(star()),
        "lvfail" => Some(lvfail()),
        "vee" => Some(vee()),
        _ => None,
    }
}

pub const SPACE_NAMES: [&str; 4] = ["chain3", "star", "lvfail", "vee"];
