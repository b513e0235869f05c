//! Executes protocols: Arthur phases draw randomness, Merlin phases ask the
//! prover for one certificate per node, then every node runs a `t`-round
//! local verifier exchanging one message per port per round. The network
//! accepts iff every node accepts.

mod exact;
mod run;

pub use exact::{best_prover_acceptance, exact_acceptance, Acceptance, CertSpace, LEAF_GUARD};
pub use run::{estimate, evaluate, run_once, three_sigma, Evaluation, RunReport, Transcript, TranscriptEntry};

use std::fmt;
use std::sync::Arc;

use crate::bits::{ceil_log2, Bits};
use crate::netconfig::NetworkConfig;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("prover returned {got} certificates for {expected} nodes in Merlin phase {phase}")]
    ProverArity { phase: usize, expected: usize, got: usize },
    #[error("verifier at node {node} sent {got} messages on {expected} ports in round {round}")]
    MessageArity { node: usize, round: usize, expected: usize, got: usize },
    #[error("certificate of {bits} bits at node {node} in Merlin phase {phase} exceeds the cap of {cap}")]
    BudgetViolation { node: usize, phase: usize, bits: usize, cap: usize },
    #[error("exhaustive enumeration needs {needed} leaf evaluations, limit is {limit}")]
    GuardExceeded { needed: u128, limit: u128 },
    #[error("invalid configuration: {0}")]
    Config(#[from] crate::netconfig::Violation),
    #[error("protocol construction failed: {0}")]
    Protocol(String),
}

/// The values one Arthur phase draws per node: coordinate `i` is uniform in
/// `[0, moduli[i])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomDomain {
    moduli: Vec<u64>,
}

impl RandomDomain {
    pub fn new(moduli: Vec<u64>) -> Result<Self, EngineError> {
        if moduli.contains(&0) {
            return Err(EngineError::Schedule("random domain with modulus 0".into()));
        }
        Ok(RandomDomain { moduli })
    }

    /// `bits` independent fair bits.
    pub fn bits(bits: usize) -> Self {
        RandomDomain { moduli: vec![2; bits] }
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// Random bits per node for this phase.
    pub fn bit_count(&self) -> usize {
        self.moduli.iter().map(|&m| ceil_log2(m)).sum()
    }

    /// Number of distinct draws, saturating at `u128::MAX`.
    pub fn outcomes(&self) -> u128 {
        self.moduli.iter().fold(1u128, |acc, &m| acc.saturating_mul(m as u128))
    }

    /// The `index`-th draw in mixed-radix order (last coordinate fastest).
    pub fn nth(&self, mut index: u128) -> Vec<u64> {
        let mut out = vec![0; self.moduli.len()];
        for (slot, &m) in out.iter_mut().zip(&self.moduli).rev() {
            *slot = (index % m as u128) as u64;
            index /= m as u128;
        }
        out
    }

    pub fn concat(parts: &[RandomDomain]) -> RandomDomain {
        RandomDomain { moduli: parts.iter().flat_map(|d| d.moduli.iter().copied()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase {
    Merlin,
    Arthur(RandomDomain),
}

impl Phase {
    pub fn is_merlin(&self) -> bool {
        matches!(self, Phase::Merlin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomnessMode {
    /// One string per phase, seen by every node.
    Shared,
    /// Independent strings per node.
    Distributed,
}

/// What the prover sees when asked for a Merlin phase: the whole
/// configuration and everything Arthur has drawn so far.
pub struct ProverInput<'a> {
    pub config: &'a NetworkConfig,
    /// Index of this phase among the Merlin phases.
    pub merlin_index: usize,
    /// `[arthur phase][node]` draws revealed so far.
    pub randomness: &'a [Vec<Vec<u64>>],
    /// `[merlin phase][node]` certificates of earlier Merlin phases.
    pub certificates: &'a [Vec<Bits>],
}

pub trait Prover: Send + Sync {
    /// One certificate per node, in node-index order.
    fn certify(&self, input: &ProverInput<'_>) -> Vec<Bits>;
}

impl<F> Prover for F
where
    F: Fn(&ProverInput<'_>) -> Vec<Bits> + Send + Sync,
{
    fn certify(&self, input: &ProverInput<'_>) -> Vec<Bits> {
        self(input)
    }
}

/// Everything a node knows while verifying.
pub struct NodeView<'a> {
    pub id: u64,
    pub label: &'a Bits,
    pub degree: usize,
    /// Ids of the neighbors in port order, when the protocol grants them.
    pub neighbor_ids: Option<&'a [u64]>,
    /// This node's draw for each Arthur phase so far.
    pub randomness: Vec<&'a [u64]>,
    /// This node's certificate for each Merlin phase.
    pub certificates: Vec<&'a Bits>,
    /// `[round][port]` messages received in completed rounds.
    pub inbox: &'a [Vec<Bits>],
}

pub trait LocalVerifier: Send + Sync {
    fn rounds(&self) -> usize {
        1
    }

    /// Messages sent in `round`, one per port. `view.inbox` holds rounds
    /// `0..round`.
    fn messages(&self, view: &NodeView<'_>, round: usize) -> Vec<Bits>;

    /// Local verdict after all rounds.
    fn decide(&self, view: &NodeView<'_>) -> bool;
}

#[derive(Clone)]
pub struct ProtocolSpec {
    pub name: String,
    schedule: Vec<Phase>,
    pub randomness: RandomnessMode,
    /// Whether nodes know the ids behind their ports.
    pub neighbor_ids_visible: bool,
    /// Certificates longer than this abort the run.
    pub cert_cap: Option<usize>,
    pub prover: Arc<dyn Prover>,
    pub verifier: Arc<dyn LocalVerifier>,
}

impl fmt::Debug for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProtocolSpec")
            .field("name", &self.name)
            .field("schedule", &self.schedule)
            .field("randomness", &self.randomness)
            .field("neighbor_ids_visible", &self.neighbor_ids_visible)
            .field("cert_cap", &self.cert_cap)
            .finish()
    }
}

impl ProtocolSpec {
    /// Consecutive phases must alternate between Merlin and Arthur.
    pub fn new(
        name: impl Into<String>,
        schedule: Vec<Phase>,
        randomness: RandomnessMode,
        prover: Arc<dyn Prover>,
        verifier: Arc<dyn LocalVerifier>,
    ) -> Result<Self, EngineError> {
        if let Some(i) = (1..schedule.len()).find(|&i| schedule[i].is_merlin() == schedule[i - 1].is_merlin()) {
            return Err(EngineError::Schedule(format!(
                "phases {} and {i} are both {}",
                i - 1,
                if schedule[i].is_merlin() { "Merlin" } else { "Arthur" }
            )));
        }
        Ok(ProtocolSpec {
            name: name.into(),
            schedule,
            randomness,
            neighbor_ids_visible: false,
            cert_cap: None,
            prover,
            verifier,
        })
    }

    pub fn with_neighbor_ids(mut self, visible: bool) -> Self {
        self.neighbor_ids_visible = visible;
        self
    }

    pub fn with_cert_cap(mut self, cap: Option<usize>) -> Self {
        self.cert_cap = cap;
        self
    }

    pub fn with_prover(&self, prover: Arc<dyn Prover>) -> Self {
        ProtocolSpec { prover, ..self.clone() }
    }

    pub fn schedule(&self) -> &[Phase] {
        &self.schedule
    }

    /// Number of interactions `k`.
    pub fn interactions(&self) -> usize {
        self.schedule.len()
    }

    /// The last phase is Arthur's, so its coins drive the verifier.
    pub fn verifier_randomized(&self) -> bool {
        matches!(self.schedule.last(), Some(Phase::Arthur(_)))
    }

    pub fn merlin_phases(&self) -> usize {
        self.schedule.iter().filter(|p| p.is_merlin()).count()
    }

    pub fn arthur_domains(&self) -> Vec<&RandomDomain> {
        self.schedule
            .iter()
            .filter_map(|p| match p {
                Phase::Arthur(d) => Some(d),
                Phase::Merlin => None,
            })
            .collect()
    }

    /// Largest per-node random bit count over Arthur phases.
    pub fn rho(&self) -> usize {
        self.arthur_domains().iter().map(|d| d.bit_count()).max().unwrap_or(0)
    }

    /// Total random bits per node over all Arthur phases.
    pub fn total_random_bits(&self) -> usize {
        self.arthur_domains().iter().map(|d| d.bit_count()).sum()
    }

    pub fn uses_shared_randomness(&self) -> bool {
        self.randomness == RandomnessMode::Shared && !self.arthur_domains().is_empty()
    }
}

/// Prover that hands every node an empty certificate.
pub fn empty_prover() -> Arc<dyn Prover> {
    Arc::new(|input: &ProverInput<'_>| vec![Bits::new(); input.config.n()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_enumeration() {
        let d = RandomDomain::new(vec![3, 2]).unwrap();
        assert_eq!(d.outcomes(), 6);
        assert_eq!(d.bit_count(), 3);
        let all: Vec<Vec<u64>> = (0..6).map(|i| d.nth(i)).collect();
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![2, 1]);
    }

    struct Accept;
    impl LocalVerifier for Accept {
        fn messages(&self, view: &NodeView<'_>, _: usize) -> Vec<Bits> {
            vec![Bits::new(); view.degree]
        }
        fn decide(&self, _: &NodeView<'_>) -> bool {
            true
        }
    }

    #[test]
    fn schedule_must_alternate() {
        let a = || Phase::Arthur(RandomDomain::bits(1));
        let ok = ProtocolSpec::new("ma", vec![Phase::Merlin, a()], RandomnessMode::Shared, empty_prover(), Arc::new(Accept));
        let spec = ok.unwrap();
        assert_eq!(spec.interactions(), 2);
        assert!(spec.verifier_randomized());
        let bad = ProtocolSpec::new("mm", vec![Phase::Merlin, Phase::Merlin], RandomnessMode::Shared, empty_prover(), Arc::new(Accept));
        assert!(matches!(bad, Err(EngineError::Schedule(_))));
    }
}
