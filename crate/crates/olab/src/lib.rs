//! Finite-model workbench for ordered locales, causal coverage and domains of
//! dependence.

pub mod coverage;
pub mod dependence;
pub mod grid;
pub mod locale;
pub mod paths;
pub mod render;
pub mod scenarios;
pub mod sites;
pub mod space;

/// Default search budget; `OLAB_BUDGET` overrides it.
pub const DEFAULT_BUDGET: u64 = 200_000_000;

pub fn default_budget() -> u64 {
    std::env::var("OLAB_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}
