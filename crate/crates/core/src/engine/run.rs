use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EngineError, NodeView, Phase, ProtocolSpec, ProverInput, RandomDomain, RandomnessMode};
use crate::bits::Bits;
use crate::netconfig::NetworkConfig;

/// Outcome of the verification stage for fixed randomness and certificates.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub verdicts: Vec<bool>,
    /// `[round][node][port]` messages sent.
    pub messages: Vec<Vec<Vec<Bits>>>,
}

impl Evaluation {
    pub fn accepted(&self) -> bool {
        self.verdicts.iter().all(|&b| b)
    }
}

/// Runs the local verifier at every node on fixed randomness
/// (`[arthur phase][node]`) and certificates (`[merlin phase][node]`).
pub fn evaluate(
    spec: &ProtocolSpec,
    config: &NetworkConfig,
    randomness: &[Vec<Vec<u64>>],
    certificates: &[Vec<Bits>],
) -> Result<Evaluation, EngineError> {
    let n = config.n();
    let rounds = spec.verifier.rounds();
    let neighbor_ids: Vec<Vec<u64>> = if spec.neighbor_ids_visible {
        (0..n).map(|v| config.neighbors(v).iter().map(|&u| config.id(u)).collect()).collect()
    } else {
        Vec::new()
    };
    // For each node and port: the receiving node and the port it arrives on.
    let routes: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|v| {
            config
                .neighbors(v)
                .iter()
                .map(|&u| (u, config.port_of(u, v).expect("adjacency is symmetric")))
                .collect()
        })
        .collect();
    let mut inbox: Vec<Vec<Vec<Bits>>> = (0..n)
        .map(|v| vec![vec![Bits::new(); config.degree(v)]; rounds])
        .collect();
    let mut messages = Vec::with_capacity(rounds);

    for round in 0..rounds {
        let mut sent = Vec::with_capacity(n);
        for v in 0..n {
            let node_view = NodeView {
                id: config.id(v),
                label: config.label(v),
                degree: config.degree(v),
                neighbor_ids: neighbor_ids.get(v).map(Vec::as_slice),
                randomness: randomness.iter().map(|r| r[v].as_slice()).collect(),
                certificates: certificates.iter().map(|c| &c[v]).collect(),
                inbox: &inbox[v][..round],
            };
            let out = spec.verifier.messages(&node_view, round);
            if out.len() != config.degree(v) {
                return Err(EngineError::MessageArity {
                    node: v,
                    round,
                    expected: config.degree(v),
                    got: out.len(),
                });
            }
            sent.push(out);
        }
        for (v, out) in sent.iter().enumerate() {
            for (port, msg) in out.iter().enumerate() {
                let (u, q) = routes[v][port];
                inbox[u][round][q] = msg.clone();
            }
        }
        messages.push(sent);
    }

    let verdicts = (0..n)
        .map(|v| {
            let node_view = NodeView {
                id: config.id(v),
                label: config.label(v),
                degree: config.degree(v),
                neighbor_ids: neighbor_ids.get(v).map(Vec::as_slice),
                randomness: randomness.iter().map(|r| r[v].as_slice()).collect(),
                certificates: certificates.iter().map(|c| &c[v]).collect(),
                inbox: &inbox[v],
            };
            spec.verifier.decide(&node_view)
        })
        .collect();
    Ok(Evaluation { verdicts, messages })
}

/// One entry of a node's view of the interaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranscriptEntry {
    Certificate(Bits),
    Random(Vec<u64>),
}

#[derive(Debug, Clone)]
pub struct Transcript {
    pub schedule: Vec<Phase>,
    /// `[arthur phase][node]`.
    pub randomness: Vec<Vec<Vec<u64>>>,
    /// `[merlin phase][node]`.
    pub certificates: Vec<Vec<Bits>>,
    /// `[round][node][port]`.
    pub messages: Vec<Vec<Vec<Bits>>>,
    pub verdicts: Vec<bool>,
}

impl Transcript {
    pub fn accepted(&self) -> bool {
        self.verdicts.iter().all(|&b| b)
    }

    /// `(c_0, r_1, c_1, ...)` for node `v`; `c_0` is empty when Arthur
    /// moves first.
    pub fn node_sequence(&self, v: usize) -> Vec<TranscriptEntry> {
        let mut out = Vec::new();
        if matches!(self.schedule.first(), Some(Phase::Arthur(_))) {
            out.push(TranscriptEntry::Certificate(Bits::new()));
        }
        let (mut a, mut m) = (0, 0);
        for phase in &self.schedule {
            match phase {
                Phase::Merlin => {
                    out.push(TranscriptEntry::Certificate(self.certificates[m][v].clone()));
                    m += 1;
                }
                Phase::Arthur(_) => {
                    out.push(TranscriptEntry::Random(self.randomness[a][v].clone()));
                    a += 1;
                }
            }
        }
        out
    }

    pub fn max_cert_bits(&self) -> usize {
        self.certificates.iter().flatten().map(Bits::len).max().unwrap_or(0)
    }

    pub fn max_msg_bits(&self) -> usize {
        self.messages.iter().flatten().flatten().map(Bits::len).max().unwrap_or(0)
    }
}

pub(crate) fn draw(domain: &RandomDomain, rng: &mut ChaCha8Rng) -> Vec<u64> {
    domain.moduli().iter().map(|&m| rng.gen_range(0..m)).collect()
}

/// Draws a full phase of randomness for `n` nodes.
pub(crate) fn draw_phase(
    domain: &RandomDomain,
    mode: RandomnessMode,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<u64>> {
    match mode {
        RandomnessMode::Shared => vec![draw(domain, rng); n],
        RandomnessMode::Distributed => (0..n).map(|_| draw(domain, rng)).collect(),
    }
}

pub(crate) fn ask_prover(
    spec: &ProtocolSpec,
    config: &NetworkConfig,
    randomness: &[Vec<Vec<u64>>],
    certificates: &[Vec<Bits>],
) -> Result<Vec<Bits>, EngineError> {
    let phase = certificates.len();
    let input = ProverInput { config, merlin_index: phase, randomness, certificates };
    let certs = spec.prover.certify(&input);
    if certs.len() != config.n() {
        return Err(EngineError::ProverArity { phase, expected: config.n(), got: certs.len() });
    }
    if let Some(cap) = spec.cert_cap {
        if let Some((node, c)) = certs.iter().enumerate().find(|(_, c)| c.len() > cap) {
            return Err(EngineError::BudgetViolation { node, phase, bits: c.len(), cap });
        }
    }
    Ok(certs)
}

/// Executes trial number `trial` of the run seeded by `seed`. Each trial
/// uses its own ChaCha stream, so trials are independent and reproducible.
pub fn run_once(
    spec: &ProtocolSpec,
    config: &NetworkConfig,
    seed: u64,
    trial: u64,
) -> Result<(bool, Transcript), EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let n = config.n();
    let mut randomness = Vec::new();
    let mut certificates = Vec::new();
    for phase in spec.schedule() {
        match phase {
            Phase::Arthur(d) => randomness.push(draw_phase(d, spec.randomness, n, &mut rng)),
            Phase::Merlin => {
                let certs = ask_prover(spec, config, &randomness, &certificates)?;
                certificates.push(certs);
            }
        }
    }
    let eval = evaluate(spec, config, &randomness, &certificates)?;
    let t = Transcript {
        schedule: spec.schedule().to_vec(),
        randomness,
        certificates,
        messages: eval.messages,
        verdicts: eval.verdicts,
    };
    Ok((t.accepted(), t))
}

/// Acceptance statistics and measured bit budgets over many trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub trials: u64,
    pub accepted: u64,
    pub accept_all_fraction: f64,
    /// Longest certificate emitted (σ).
    pub max_cert_bits: usize,
    /// Longest message on any directed edge in any round (γ).
    pub max_msg_bits: usize,
    /// Random bits per node in the largest Arthur phase (ρ).
    pub random_bits_per_node_per_phase: usize,
    pub seed: u64,
}

impl RunReport {
    fn empty(seed: u64, rho: usize) -> Self {
        RunReport {
            trials: 0,
            accepted: 0,
            accept_all_fraction: 0.0,
            max_cert_bits: 0,
            max_msg_bits: 0,
            random_bits_per_node_per_phase: rho,
            seed,
        }
    }

    /// Combines reports of disjoint trial sets.
    pub fn merge(&self, other: &RunReport) -> RunReport {
        let trials = self.trials + other.trials;
        let accepted = self.accepted + other.accepted;
        RunReport {
            trials,
            accepted,
            accept_all_fraction: if trials == 0 { 0.0 } else { accepted as f64 / trials as f64 },
            max_cert_bits: self.max_cert_bits.max(other.max_cert_bits),
            max_msg_bits: self.max_msg_bits.max(other.max_msg_bits),
            random_bits_per_node_per_phase: self
                .random_bits_per_node_per_phase
                .max(other.random_bits_per_node_per_phase),
            seed: self.seed.min(other.seed),
        }
    }

    /// Three standard deviations of the binomial estimate around its mean.
    pub fn three_sigma(&self) -> f64 {
        three_sigma(self.accept_all_fraction, self.trials)
    }
}

/// `3·sqrt(p(1-p)/trials)`.
pub fn three_sigma(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::INFINITY;
    }
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

fn estimate_range(
    spec: &ProtocolSpec,
    config: &NetworkConfig,
    seed: u64,
    range: std::ops::Range<u64>,
) -> Result<RunReport, EngineError> {
    let mut report = RunReport::empty(seed, spec.rho());
    for trial in range {
        let (ok, t) = run_once(spec, config, seed, trial)?;
        report.trials += 1;
        report.accepted += ok as u64;
        report.max_cert_bits = report.max_cert_bits.max(t.max_cert_bits());
        report.max_msg_bits = report.max_msg_bits.max(t.max_msg_bits());
    }
    report.accept_all_fraction = if report.trials == 0 {
        0.0
    } else {
        report.accepted as f64 / report.trials as f64
    };
    Ok(report)
}

/// Monte-Carlo estimate over `trials` independent runs, spread across the
/// available cores. The result depends only on `(spec, config, trials,
/// seed)`.
pub fn estimate(
    spec: &ProtocolSpec,
    config: &NetworkConfig,
    trials: u64,
    seed: u64,
) -> Result<RunReport, EngineError> {
    config.validate()?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    let workers = workers.min(trials.div_ceil(256)).max(1);
    if workers == 1 {
        return estimate_range(spec, config, seed, 0..trials);
    }
    let chunk = trials.div_ceil(workers);
    let results: Vec<Result<RunReport, EngineError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * chunk).min(trials)..((w + 1) * chunk).min(trials);
                s.spawn(move || estimate_range(spec, config, seed, range))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut total = RunReport::empty(seed, spec.rho());
    for r in results {
        total = total.merge(&r?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{empty_prover, LocalVerifier, RandomDomain};
    use crate::netconfig::{generate, GraphKind};
    use std::sync::Arc;

    struct RejectId(u64);
    impl LocalVerifier for RejectId {
        fn messages(&self, view: &NodeView<'_>, _: usize) -> Vec<Bits> {
            vec![Bits::from_uint(view.id % 2, 1); view.degree]
        }
        fn decide(&self, view: &NodeView<'_>) -> bool {
            view.id != self.0
        }
    }

    struct CoinIsZero;
    impl LocalVerifier for CoinIsZero {
        fn messages(&self, view: &NodeView<'_>, _: usize) -> Vec<Bits> {
            vec![Bits::new(); view.degree]
        }
        fn decide(&self, view: &NodeView<'_>) -> bool {
            view.randomness[0][0] == 0
        }
    }

    fn c3() -> NetworkConfig {
        NetworkConfig::from_id_edges(vec![1, 2, 3], &[(1, 2), (2, 3), (1, 3)]).unwrap()
    }

    #[test]
    fn unanimity() {
        let spec = ProtocolSpec::new("r1", vec![], RandomnessMode::Shared, empty_prover(), Arc::new(RejectId(1))).unwrap();
        let (ok, t) = run_once(&spec, &c3(), 0, 0).unwrap();
        assert!(!ok);
        assert_eq!(t.verdicts, vec![false, true, true]);
        assert_eq!(t.max_msg_bits(), 1);
        let spec = ProtocolSpec::new("r9", vec![], RandomnessMode::Shared, empty_prover(), Arc::new(RejectId(9))).unwrap();
        let r = estimate(&spec, &c3(), 100, 4).unwrap();
        assert_eq!(r.accept_all_fraction, 1.0);
    }

    #[test]
    fn shared_coin_estimate() {
        let spec = ProtocolSpec::new(
            "coin",
            vec![Phase::Arthur(RandomDomain::bits(1))],
            RandomnessMode::Shared,
            empty_prover(),
            Arc::new(CoinIsZero),
        )
        .unwrap();
        let r = estimate(&spec, &c3(), 10_000, 7).unwrap();
        assert!((r.accept_all_fraction - 0.5).abs() <= 0.02, "{r:?}");
        assert_eq!(r.random_bits_per_node_per_phase, 1);
        assert_eq!(r, estimate(&spec, &c3(), 10_000, 7).unwrap());
        // Every node sees the same string.
        let (_, t) = run_once(&spec, &c3(), 7, 3).unwrap();
        assert!(t.randomness[0].iter().all(|r| r == &t.randomness[0][0]));
        assert_eq!(t.node_sequence(0)[0], TranscriptEntry::Certificate(Bits::new()));
    }

    #[test]
    fn report_merge_is_associative() {
        let mk = |t, a, s, g, seed| RunReport {
            trials: t,
            accepted: a,
            accept_all_fraction: a as f64 / t as f64,
            max_cert_bits: s,
            max_msg_bits: g,
            random_bits_per_node_per_phase: 3,
            seed,
        };
        let (a, b, c) = (mk(10, 3, 5, 1, 2), mk(4, 4, 2, 9, 1), mk(6, 0, 7, 2, 3));
        assert_eq!(a.merge(&b).merge(&c), a.merge(&b.merge(&c)));
        assert_eq!(a.merge(&b), b.merge(&a));
    }

    #[test]
    fn cap_violation_aborts() {
        let prover = Arc::new(|input: &ProverInput<'_>| vec![Bits::from_uint(0, 4); input.config.n()]);
        let spec = ProtocolSpec::new("cap", vec![Phase::Merlin], RandomnessMode::Shared, prover, Arc::new(RejectId(0)))
            .unwrap()
            .with_cert_cap(Some(3));
        let c = generate(&GraphKind::Cycle(4)).unwrap();
        assert!(matches!(run_once(&spec, &c, 0, 0), Err(EngineError::BudgetViolation { bits: 4, cap: 3, .. })));
    }
}
