//! Locally checkable proof for any language of 0/1-labeled oriented cycles:
//! every node receives the whole input string and checks its own bit, its
//! neighbors' copies and membership.

use std::sync::Arc;

use super::{PlsError, StringLanguage};
use crate::bits::Bits;
use crate::engine::{
    best_prover_acceptance, Acceptance, CertSpace, EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec,
    Prover, ProverInput, RandomnessMode,
};
use crate::netconfig::NetworkConfig;

/// Checks that `config` is the oriented cycle with ids `0..n` (node with id
/// `i` adjacent to `i±1 mod n`) and 1-bit labels; returns the input string
/// indexed by id.
pub fn cycle_input(config: &NetworkConfig) -> Result<Vec<bool>, PlsError> {
    let n = config.n();
    if n < 3 || !config.is_regular(2) {
        return Err(PlsError::NotOrientedCycle("not a 2-regular graph on at least 3 nodes".into()));
    }
    let mut input = vec![false; n];
    for v in 0..n {
        let id = config.id(v);
        if id >= n as u64 {
            return Err(PlsError::NotOrientedCycle(format!("id {id} outside 0..{n}")));
        }
        let next = config.index_of((id + 1) % n as u64);
        if !next.is_some_and(|u| config.has_edge(v, u)) {
            return Err(PlsError::NotOrientedCycle(format!("id {id} not adjacent to its successor")));
        }
        let label = config.label(v);
        if label.len() != 1 {
            return Err(PlsError::BadLabels);
        }
        input[id as usize] = label.get(0).unwrap_or(false);
    }
    Ok(input)
}

struct CycleVerifier {
    n: usize,
    language: StringLanguage,
}

impl LocalVerifier for CycleVerifier {
    fn messages(&self, view: &NodeView<'_>, _round: usize) -> Vec<Bits> {
        vec![view.certificates[0].clone(); view.degree]
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let s = view.certificates[0];
        if s.len() != self.n || view.label.len() != 1 {
            return false;
        }
        let own_bit = s.get(view.id as usize);
        if own_bit.is_none() || own_bit != view.label.get(0) {
            return false;
        }
        view.inbox[0].iter().all(|m| m == s) && (self.language)(s.as_slice())
    }
}

/// Honest prover: the full input string, indexed by id.
pub fn honest_cycle_prover() -> Arc<dyn Prover> {
    Arc::new(|input: &ProverInput<'_>| {
        let s = match cycle_input(input.config) {
            Ok(x) => Bits::from_bools(x),
            Err(_) => Bits::new(),
        };
        vec![s; input.config.n()]
    })
}

pub fn cycle_lcp_spec(config: &NetworkConfig, language: StringLanguage) -> Result<ProtocolSpec, EngineError> {
    cycle_input(config).map_err(|e| EngineError::Protocol(e.to_string()))?;
    ProtocolSpec::new(
        "cycle-lcp",
        vec![Phase::Merlin],
        RandomnessMode::Shared,
        honest_cycle_prover(),
        Arc::new(CycleVerifier { n: config.n(), language }),
    )
}

/// Number of certificate assignments (n-bit string per node) under which
/// every node accepts. Uses pruned search: a branch is cut as soon as an
/// assigned node fails its own checks or disagrees with an assigned
/// neighbor.
pub fn count_accepting_assignments(config: &NetworkConfig, language: &StringLanguage) -> Result<u64, PlsError> {
    let input = cycle_input(config)?;
    let n = config.n();
    let all: Vec<Vec<bool>> = (0..1u64 << n).map(|m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect();
    let alphabets: Vec<Vec<Vec<bool>>> = (0..n)
        .map(|v| {
            let i = config.id(v) as usize;
            all.iter().filter(|s| s[i] == input[i] && language(s)).cloned().collect()
        })
        .collect();
    let consistent = |w: usize, p: &[Option<Vec<bool>>]| {
        let own = p[w].as_ref().expect("assigned");
        config.neighbors(w).iter().all(|&u| p[u].as_ref().is_none_or(|s| s == own))
    };
    let mut count = 0u64;
    super::search_assignments(config, &alphabets, &consistent, &mut |_| count += 1);
    Ok(count)
}

/// Optimal prover acceptance by plain enumeration of every assignment;
/// feasible only for very small `n`.
pub fn best_cycle_acceptance(config: &NetworkConfig, language: StringLanguage) -> Result<Acceptance, EngineError> {
    let spec = cycle_lcp_spec(config, language)?;
    best_prover_acceptance(&spec, config, &[CertSpace::all_strings(config.n(), config.n())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_once;
    use crate::netconfig::{generate, GraphKind};
    use crate::pls::even_parity;

    fn labeled(bits: &str) -> NetworkConfig {
        let c = generate(&GraphKind::Cycle(bits.len())).unwrap();
        let labels = bits.chars().map(|ch| ch.to_string().parse().unwrap()).collect();
        c.with_labels(labels).unwrap()
    }

    #[test]
    fn honest_yes_instance() {
        let c = labeled("1100");
        let spec = cycle_lcp_spec(&c, even_parity()).unwrap();
        assert!(run_once(&spec, &c, 0, 0).unwrap().0);
    }

    #[test]
    fn no_instance_has_no_accepting_assignment() {
        let c = labeled("1000");
        assert_eq!(best_cycle_acceptance(&c, even_parity()).unwrap().accepting, 0);
        assert_eq!(count_accepting_assignments(&c, &even_parity()).unwrap(), 0);
        assert_eq!(count_accepting_assignments(&labeled("1100"), &even_parity()).unwrap(), 1);
    }

    #[test]
    fn mismatched_copies_rejected() {
        let c = labeled("0110");
        let spec = cycle_lcp_spec(&c, even_parity()).unwrap();
        let forged = Arc::new(|_: &ProverInput<'_>| {
            ["0110", "0110", "0110", "1111"].iter().map(|s| s.parse().unwrap()).collect()
        });
        let (ok, t) = run_once(&spec.with_prover(forged), &c, 0, 0).unwrap();
        assert!(!ok);
        assert!(!t.verdicts[3] || !t.verdicts[2] || !t.verdicts[0]);
    }

    #[test]
    fn non_cycles_rejected() {
        let p = generate(&GraphKind::Path(4)).unwrap();
        assert!(cycle_input(&p).is_err());
        let c = generate(&GraphKind::Cycle(4)).unwrap();
        assert!(matches!(cycle_input(&c), Err(PlsError::BadLabels)));
    }
}
