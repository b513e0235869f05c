//! Deterministic certification schemes: spanning trees, node counting with
//! distance-2 coloring, the cycle-language scheme and the universal scheme
//! for regular graphs.

pub mod cycle;
pub mod dist2;
pub mod regular;
pub mod tree;

use std::sync::Arc;

use crate::netconfig::NetworkConfig;

#[derive(Debug, thiserror::Error)]
pub enum PlsError {
    #[error("configuration is not an oriented cycle with ids 0..n-1: {0}")]
    NotOrientedCycle(String),
    #[error("configuration is not {0}-regular")]
    NotRegular(usize),
    #[error("prover found no covering assignment after {0} attempts")]
    CoverageFailed(usize),
    #[error("labels must be single bits")]
    BadLabels,
}

/// Membership oracle for a language of 0/1 strings.
pub type StringLanguage = Arc<dyn Fn(&[bool]) -> bool + Send + Sync>;

/// Membership oracle for a language of configurations.
pub type ConfigLanguage = Arc<dyn Fn(&NetworkConfig) -> bool + Send + Sync>;

/// Strings with an even number of ones.
pub fn even_parity() -> StringLanguage {
    Arc::new(|s: &[bool]| s.iter().filter(|&&b| b).count() % 2 == 0)
}

/// Depth-first search over per-node certificate choices, assigning nodes
/// in index order. After node `v` is assigned, `consistent(w, partial)` runs
/// for `w = v` and every assigned neighbor `w` of `v`; a `false` prunes the
/// branch, so it must only be returned when `w` rejects every completion.
/// Each surviving full assignment is passed to `visit`.
pub fn search_assignments<C: Clone>(
    config: &NetworkConfig,
    alphabets: &[Vec<C>],
    consistent: &dyn Fn(usize, &[Option<C>]) -> bool,
    visit: &mut dyn FnMut(&[C]),
) {
    let n = config.n();
    let mut partial: Vec<Option<C>> = vec![None; n];
    fn rec<C: Clone>(
        v: usize,
        config: &NetworkConfig,
        alphabets: &[Vec<C>],
        partial: &mut Vec<Option<C>>,
        consistent: &dyn Fn(usize, &[Option<C>]) -> bool,
        visit: &mut dyn FnMut(&[C]),
    ) {
        if v == partial.len() {
            let full: Vec<C> = partial.iter().map(|c| c.clone().expect("assigned")).collect();
            visit(&full);
            return;
        }
        for choice in &alphabets[v] {
            partial[v] = Some(choice.clone());
            let ok = consistent(v, partial)
                && config.neighbors(v).iter().all(|&w| w > v || consistent(w, partial));
            if ok {
                rec(v + 1, config, alphabets, partial, consistent, visit);
            }
        }
        partial[v] = None;
    }
    if n > 0 {
        rec(0, config, alphabets, &mut partial, consistent, visit);
    }
}
