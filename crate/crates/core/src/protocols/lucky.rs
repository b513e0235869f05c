//! Certifying a lucky labeling with labels in `1..=λ`: adjacent nodes have
//! distinct neighbor-label sums `S(v) = Σ_{u∼v} ℓ(u)`. The prover gives each
//! node its label, its claimed sum and differing-bit positions between
//! claimed sums; a SumZero test ties each claimed sum to the neighbors'
//! labels.

use std::sync::Arc;

use super::coloring::{honest_positions, DiffBitLink, PositionExchange};
use crate::bits::{width_for, BitReader, Bits};
use crate::commprims::{residues_sum_to_zero, EqualityTest, SumZeroTest};
use crate::engine::{EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, Prover, ProverInput, RandomDomain, RandomnessMode};
use crate::netconfig::NetworkConfig;

/// Neighbor-label sums.
pub fn neighbor_sums(config: &NetworkConfig, labels: &[u64]) -> Vec<u64> {
    (0..config.n()).map(|v| config.neighbors(v).iter().map(|&u| labels[u]).sum()).collect()
}

pub fn is_lucky(config: &NetworkConfig, labels: &[u64]) -> bool {
    let s = neighbor_sums(config, labels);
    config.edges().iter().all(|&(a, b)| s[a] != s[b])
}

/// A lucky labeling with labels in `1..=lambda`, by backtracking in
/// node-index order. An edge is checked once both endpoint
/// neighborhoods are fully labeled.
pub fn find_lucky_labeling(config: &NetworkConfig, lambda: u64) -> Option<Vec<u64>> {
    let n = config.n();
    // Position from which all of N(v) is labeled.
    let ready: Vec<usize> = (0..n).map(|v| config.neighbors(v).iter().map(|&u| u + 1).max().unwrap_or(0)).collect();
    let mut labels = vec![0u64; n];
    fn rec(i: usize, config: &NetworkConfig, lambda: u64, ready: &[usize], labels: &mut Vec<u64>) -> bool {
        let n = labels.len();
        let sum = |v: usize, labels: &[u64]| config.neighbors(v).iter().map(|&u| labels[u]).sum::<u64>();
        let ok = config
            .edges()
            .iter()
            .filter(|&&(a, b)| ready[a].max(ready[b]) == i)
            .all(|&(a, b)| sum(a, labels) != sum(b, labels));
        if !ok {
            return false;
        }
        if i == n {
            return true;
        }
        for l in 1..=lambda {
            labels[i] = l;
            if rec(i + 1, config, lambda, ready, labels) {
                return true;
            }
        }
        labels[i] = 0;
        false
    }
    rec(0, config, lambda, &ready, &mut labels).then_some(labels)
}

#[derive(Debug, Clone)]
pub struct LuckyInstance {
    pub config: NetworkConfig,
    pub lambda: u64,
    /// Labeling handed out by the honest prover.
    pub labels: Vec<u64>,
    pub sumzero: SumZeroTest,
    pub exchange: PositionExchange,
}

impl LuckyInstance {
    /// Uses `labels` if given, else searches for a lucky labeling (which
    /// may not exist; the honest prover then hands out all-ones labels).
    pub fn new(config: NetworkConfig, lambda: u64, labels: Option<Vec<u64>>) -> Result<Self, EngineError> {
        if lambda == 0 {
            return Err(EngineError::Protocol("label bound must be positive".into()));
        }
        let labels = match labels {
            Some(l) if l.len() != config.n() => {
                return Err(EngineError::Protocol(format!("expected {} labels, got {}", config.n(), l.len())))
            }
            Some(l) => l,
            None => find_lucky_labeling(&config, lambda).unwrap_or_else(|| vec![1; config.n()]),
        };
        let d = config.max_degree() as u64;
        Ok(LuckyInstance {
            sumzero: SumZeroTest::new(d * lambda, d + 1),
            exchange: PositionExchange::Fingerprint { repetitions: EqualityTest::DEFAULT_REPETITIONS },
            config,
            lambda,
            labels,
        })
    }

    pub fn with_sumzero(mut self, sumzero: SumZeroTest) -> Self {
        self.sumzero = sumzero;
        self
    }

    pub fn with_exchange(mut self, exchange: PositionExchange) -> Self {
        self.exchange = exchange;
        self
    }

    pub fn label_bits(&self) -> usize {
        width_for(self.lambda)
    }

    pub fn sum_bits(&self) -> usize {
        width_for(self.config.max_degree() as u64 * self.lambda)
    }

    pub fn link(&self) -> DiffBitLink {
        DiffBitLink::new(self.sum_bits(), self.exchange)
    }

    pub fn cert_bits(&self, degree: usize) -> usize {
        self.label_bits() + self.sum_bits() + self.link().cert_bits(degree)
    }

    pub fn message_bits(&self) -> usize {
        self.link().message_bits() + self.sumzero.residue_bits()
    }

    /// Certificates for labels `labels` and claimed sums `sums`.
    pub fn certs(&self, labels: &[u64], sums: &[u64]) -> Vec<Bits> {
        let link = self.link();
        let positions = honest_positions(&self.config, &link, sums);
        (0..self.config.n())
            .map(|v| {
                let mut b = Bits::from_uint(labels[v], self.label_bits());
                b.push_uint(sums[v], self.sum_bits());
                b.extend(&positions[v]);
                b
            })
            .collect()
    }

    pub fn honest_certs(&self) -> Vec<Bits> {
        self.certs(&self.labels, &neighbor_sums(&self.config, &self.labels))
    }
}

struct LuckyVerifier {
    lambda: u64,
    label_bits: usize,
    sum_bits: usize,
    link: DiffBitLink,
    sumzero: SumZeroTest,
}

impl LuckyVerifier {
    fn coins<'a>(&self, view: &NodeView<'a>) -> (&'a [u64], u64) {
        let r = view.randomness[0];
        let eq = self.link.random_bits();
        (&r[..eq], self.sumzero.modulus(r[eq]))
    }

    fn own(&self, view: &NodeView<'_>) -> Option<(u64, u64, Vec<u64>)> {
        let mut r: BitReader<'_> = view.certificates[0].reader();
        let l = r.read_uint(self.label_bits)?;
        let s = r.read_uint(self.sum_bits)?;
        let p = self.link.decode_positions(&mut r, view.degree)?;
        r.is_done().then_some((l, s, p))
    }
}

impl LocalVerifier for LuckyVerifier {
    fn messages(&self, view: &NodeView<'_>, _round: usize) -> Vec<Bits> {
        let (eq_coins, m) = self.coins(view);
        let (l, s, pos) = self.own(view).unwrap_or((0, 0, vec![0; view.degree]));
        pos.iter()
            .map(|&p| {
                let mut b = self.link.message(s, p, eq_coins);
                b.extend(&self.sumzero.encode_residue(l as i64, m));
                b
            })
            .collect()
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let Some((l, s, pos)) = self.own(view) else { return false };
        if l == 0 || l > self.lambda {
            return false;
        }
        let (eq_coins, m) = self.coins(view);
        let k = self.link.message_bits();
        let mut parts = Vec::with_capacity(view.degree);
        let mut residues = vec![SumZeroTest::residue(-(s as i64), m)];
        for msg in &view.inbox[0] {
            let mut r = msg.reader();
            let (Some(part), Some(res)) = (r.read_bits(k), r.read_uint(self.sumzero.residue_bits())) else {
                return false;
            };
            parts.push(part);
            residues.push(res);
        }
        self.link.check(s, &pos, &parts, eq_coins) && residues_sum_to_zero(&residues, m)
    }
}

/// `[Merlin, Arthur]` with shared coins: position masks then a pool index.
pub fn lucky_spec(inst: &LuckyInstance) -> Result<ProtocolSpec, EngineError> {
    let link = inst.link();
    let mut parts = Vec::new();
    if link.random_bits() > 0 {
        parts.push(link.equality().domain());
    }
    parts.push(inst.sumzero.domain());
    let certs = inst.honest_certs();
    let prover: Arc<dyn Prover> = Arc::new(move |_: &ProverInput<'_>| certs.clone());
    let verifier = LuckyVerifier {
        lambda: inst.lambda,
        label_bits: inst.label_bits(),
        sum_bits: inst.sum_bits(),
        link,
        sumzero: inst.sumzero.clone(),
    };
    ProtocolSpec::new(
        "lucky",
        vec![Phase::Merlin, Phase::Arthur(RandomDomain::concat(&parts))],
        RandomnessMode::Shared,
        prover,
        Arc::new(verifier),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{estimate, exact_acceptance};
    use crate::netconfig::{generate, GraphKind};

    #[test]
    fn c4_sums_by_hand() {
        let c = generate(&GraphKind::Cycle(4)).unwrap();
        let l = vec![1, 2, 1, 2];
        assert_eq!(neighbor_sums(&c, &l), vec![4, 2, 4, 2]);
        assert!(is_lucky(&c, &l));
        let inst = LuckyInstance::new(c.clone(), 2, Some(l)).unwrap();
        let r = estimate(&lucky_spec(&inst).unwrap(), &c, 300, 0).unwrap();
        assert_eq!(r.accepted, 300);
        assert_eq!(r.max_msg_bits, inst.message_bits());
        assert_eq!(r.max_cert_bits, inst.cert_bits(2));
    }

    #[test]
    fn search_finds_lucky_labelings() {
        for kind in [GraphKind::Path(5), GraphKind::Cycle(5), GraphKind::Complete(4)] {
            let c = generate(&kind).unwrap();
            let d = c.max_degree() as u64;
            let l = find_lucky_labeling(&c, d * d - d + 1).unwrap();
            assert!(is_lucky(&c, &l), "{kind}");
        }
        // With a single label value the sums are the degrees.
        assert!(find_lucky_labeling(&generate(&GraphKind::Cycle(5)).unwrap(), 1).is_none());
        assert_eq!(find_lucky_labeling(&generate(&GraphKind::Path(2)).unwrap(), 2), Some(vec![1, 2]));
    }

    #[test]
    fn forged_sum_caught_by_pool() {
        // True sums (4, 2, 4, 2); node 0 claims 6 instead, which keeps the
        // sums a proper coloring. Node 0's SumZero sees -2.
        let c = generate(&GraphKind::Cycle(4)).unwrap();
        let inst = LuckyInstance::new(c.clone(), 2, Some(vec![1, 2, 1, 2]))
            .unwrap()
            .with_exchange(PositionExchange::Plain)
            .with_sumzero(SumZeroTest::with_pool_size(4, 3, 10));
        let certs = inst.certs(&inst.labels, &[6, 2, 4, 2]);
        let spec = lucky_spec(&inst).unwrap().with_prover(Arc::new(move |_: &ProverInput<'_>| certs.clone()));
        let a = exact_acceptance(&spec, &c).unwrap();
        assert_eq!((a.accepting, a.total), (inst.sumzero.false_accept_count(-2) as u128, 10));
        assert_eq!(a.accepting, 1);
    }
}
