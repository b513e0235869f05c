//! Threshold certification for locally checkable optimization problems.
//! The prover marks a solution, certifies a spanning tree and gives every
//! node the weight of the marked nodes in its subtree. Neighbors check
//! admissibility with one bit each, compare tree certificates by
//! fingerprint, and each node checks its subtree sum with a SumZero test
//! over a shared random prime; the root compares its sum to the threshold.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::bits::{width_for, BitReader, Bits};
use crate::commprims::{residues_sum_to_zero, EqualityTest, SumZeroTest};
use crate::engine::{EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, Prover, ProverInput, RandomDomain, RandomnessMode};
use crate::netconfig::NetworkConfig;
use crate::pls::tree::{tree_prove, RootRule, TreeCert, TreeCodec, TreeExchange, TreeLink};

/// Largest `n` for which the optimum is found by subset enumeration.
pub const BRUTE_FORCE_LIMIT: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// Minimum dominating set.
    Mds,
    /// Maximum independent set.
    Mis,
    /// Minimum vertex cover.
    Mvc,
}

impl Problem {
    pub fn objective(self) -> Objective {
        match self {
            Problem::Mis => Objective::Maximize,
            Problem::Mds | Problem::Mvc => Objective::Minimize,
        }
    }

    /// Local admissibility from a node's own bit and its neighbors' bits.
    pub fn admissible_at(self, own: bool, neighbors: &[bool]) -> bool {
        match self {
            Problem::Mds => own || neighbors.iter().any(|&b| b),
            Problem::Mis => !own || neighbors.iter().all(|&b| !b),
            Problem::Mvc => own || neighbors.iter().all(|&b| b),
        }
    }

    pub fn admissible(self, config: &NetworkConfig, x: &[bool]) -> bool {
        (0..config.n()).all(|v| {
            let nb: Vec<bool> = config.neighbors(v).iter().map(|&u| x[u]).collect();
            self.admissible_at(x[v], &nb)
        })
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Mds => "mds",
            Problem::Mis => "mis",
            Problem::Mvc => "mvc",
        })
    }
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mds" => Ok(Problem::Mds),
            "mis" => Ok(Problem::Mis),
            "mvc" => Ok(Problem::Mvc),
            _ => Err(format!("unknown problem {s:?} (expected mds, mis or mvc)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OptError {
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("weight {weight} of node {id} outside 1..={bound}")]
    WeightRange { id: u64, weight: u64, bound: u64 },
    #[error("{0} nodes is too many for brute force (limit {BRUTE_FORCE_LIMIT})")]
    TooLarge(usize),
}

#[derive(Debug, Clone)]
pub struct OptInstance {
    pub config: NetworkConfig,
    pub problem: Problem,
    /// Per node, in node-index order.
    pub weights: Vec<u64>,
    pub threshold: u64,
    /// Upper bound `M` on any weight.
    pub weight_bound: u64,
    pub exchange: TreeExchange,
    pub sumzero: SumZeroTest,
}

impl OptInstance {
    /// Weight bound `n^3`, fingerprinted tree exchange and the full pool.
    pub fn new(config: NetworkConfig, problem: Problem, weights: Vec<u64>, threshold: u64) -> Result<Self, OptError> {
        let n = config.n() as u64;
        Self::with_weight_bound(config, problem, weights, threshold, n.pow(3).max(1))
    }

    pub fn unit(config: NetworkConfig, problem: Problem, threshold: u64) -> Result<Self, OptError> {
        let n = config.n();
        Self::new(config, problem, vec![1; n], threshold)
    }

    pub fn with_weight_bound(
        config: NetworkConfig,
        problem: Problem,
        weights: Vec<u64>,
        threshold: u64,
        weight_bound: u64,
    ) -> Result<Self, OptError> {
        if weights.len() != config.n() {
            return Err(OptError::WeightCount { expected: config.n(), got: weights.len() });
        }
        if let Some(v) = (0..config.n()).find(|&v| weights[v] == 0 || weights[v] > weight_bound) {
            return Err(OptError::WeightRange { id: config.id(v), weight: weights[v], bound: weight_bound });
        }
        let mut inst = OptInstance {
            sumzero: SumZeroTest::new(1, 1),
            config,
            problem,
            weights,
            threshold,
            weight_bound,
            exchange: TreeExchange::Fingerprint { repetitions: EqualityTest::DEFAULT_REPETITIONS },
        };
        inst.sumzero = SumZeroTest::new(inst.sum_bound(), inst.arity());
        Ok(inst)
    }

    /// Largest possible subtree sum, `n·M`.
    pub fn sum_bound(&self) -> u64 {
        self.config.n() as u64 * self.weight_bound
    }

    /// Parties in one SumZero test: a node and its tree children.
    pub fn arity(&self) -> u64 {
        self.config.max_degree() as u64 + 1
    }

    pub fn with_exchange(mut self, exchange: TreeExchange) -> Self {
        self.exchange = exchange;
        self
    }

    pub fn with_sumzero(mut self, sumzero: SumZeroTest) -> Self {
        self.sumzero = sumzero;
        self
    }

    pub fn with_threshold(mut self, threshold: u64) -> Self {
        self.threshold = threshold;
        self
    }

    /// Plain tree exchange and the reduced pool; the shared randomness is a
    /// single pool index, small enough for exhaustive prover search.
    pub fn tiny(self) -> Self {
        let sz = SumZeroTest::reduced(self.sum_bound(), self.arity());
        self.with_exchange(TreeExchange::Plain).with_sumzero(sz)
    }

    pub fn weight_of(&self, x: &[bool]) -> u64 {
        x.iter().zip(&self.weights).filter(|(&b, _)| b).map(|(_, &w)| w).sum()
    }

    pub fn meets_threshold(&self, value: u64) -> bool {
        match self.problem.objective() {
            Objective::Minimize => value <= self.threshold,
            Objective::Maximize => value >= self.threshold,
        }
    }

    pub fn is_yes_instance(&self) -> Result<bool, OptError> {
        Ok(self.meets_threshold(optimum(&self.config, self.problem, &self.weights)?.0))
    }

    pub fn codec(&self) -> OptCodec {
        OptCodec { tree: TreeCodec::for_config(&self.config), sum_bits: width_for(self.sum_bound()) }
    }

    pub fn link(&self) -> TreeLink {
        TreeLink::new(self.codec().tree, self.exchange)
    }

    pub fn message_bits(&self) -> usize {
        1 + self.link().message_bits() + self.sumzero.residue_bits()
    }
}

/// Best admissible solution by subset enumeration: its weight and the set.
/// Ties go to the first set in counting order.
pub fn optimum(config: &NetworkConfig, problem: Problem, weights: &[u64]) -> Result<(u64, Vec<bool>), OptError> {
    let n = config.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(OptError::TooLarge(n));
    }
    let mut best: Option<(u64, Vec<bool>)> = None;
    for mask in 0u64..1 << n {
        let x: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if !problem.admissible(config, &x) {
            continue;
        }
        let w: u64 = (0..n).filter(|&i| x[i]).map(|i| weights[i]).sum();
        let better = match (&best, problem.objective()) {
            (None, _) => true,
            (Some((b, _)), Objective::Minimize) => w < *b,
            (Some((b, _)), Objective::Maximize) => w > *b,
        };
        if better {
            best = Some((w, x));
        }
    }
    Ok(best.expect("the full or the empty set is admissible"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptCert {
    pub member: bool,
    pub tree: TreeCert,
    pub sum: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptCodec {
    pub tree: TreeCodec,
    pub sum_bits: usize,
}

impl OptCodec {
    pub fn bits(&self) -> usize {
        1 + self.tree.bits() + self.sum_bits
    }

    pub fn encode(&self, c: &OptCert) -> Bits {
        let mut b = Bits::new();
        b.push(c.member);
        self.tree.encode_into(&c.tree, &mut b);
        b.push_uint(c.sum, self.sum_bits);
        b
    }

    pub fn decode(&self, r: &mut BitReader<'_>) -> Option<OptCert> {
        Some(OptCert { member: r.read_bool()?, tree: self.tree.decode(r)?, sum: r.read_uint(self.sum_bits)? })
    }
}

/// Certificates for solution `x`: min-id BFS tree and true subtree sums.
pub fn certs_for_solution(inst: &OptInstance, x: &[bool]) -> Vec<OptCert> {
    let config = &inst.config;
    let n = config.n();
    let tree = tree_prove(config, RootRule::MinId);
    let mut sum: Vec<u64> = (0..n).map(|v| if x[v] { inst.weights[v] } else { 0 }).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(tree[v].dist));
    for v in order {
        if let Some(p) = tree[v].parent_id.and_then(|p| config.index_of(p)) {
            sum[p] += sum[v];
        }
    }
    (0..n).map(|v| OptCert { member: x[v], tree: tree[v], sum: sum[v] }).collect()
}

/// Honest certificates built on an optimal solution.
pub fn honest_optval_certs(inst: &OptInstance) -> Result<Vec<OptCert>, OptError> {
    let (_, x) = optimum(&inst.config, inst.problem, &inst.weights)?;
    Ok(certs_for_solution(inst, &x))
}

pub fn fixed_optval_prover(codec: OptCodec, certs: Vec<OptCert>) -> Arc<dyn Prover> {
    let encoded: Vec<Bits> = certs.iter().map(|c| codec.encode(c)).collect();
    Arc::new(move |_: &ProverInput<'_>| encoded.clone())
}

struct OptVerifier {
    problem: Problem,
    objective: Objective,
    threshold: u64,
    codec: OptCodec,
    link: TreeLink,
    sumzero: SumZeroTest,
    /// Each node's own weight, part of its input.
    weights: HashMap<u64, u64>,
}

impl OptVerifier {
    fn coins<'a>(&self, view: &NodeView<'a>) -> (&'a [u64], u64) {
        let r = view.randomness[0];
        let eq = self.link.random_bits();
        (&r[..eq], self.sumzero.modulus(r[eq]))
    }

    fn own(&self, view: &NodeView<'_>) -> Option<OptCert> {
        let cert = view.certificates[0];
        let mut r = cert.reader();
        let c = self.codec.decode(&mut r)?;
        r.is_done().then_some(c)
    }

    /// Whether the tree part of a neighbor's message names us as parent.
    fn names_me_parent(&self, own_id: u64, tree_part: &Bits) -> bool {
        match self.link.exchange {
            TreeExchange::Plain => {
                let mut r = tree_part.reader();
                r.read_uint(self.link.codec.id_bits);
                self.link.codec.decode(&mut r).is_some_and(|c| c.parent_id == Some(own_id))
            }
            TreeExchange::Fingerprint { .. } => tree_part.get(0).unwrap_or(false),
        }
    }
}

impl LocalVerifier for OptVerifier {
    fn messages(&self, view: &NodeView<'_>, _round: usize) -> Vec<Bits> {
        let (eq_coins, m) = self.coins(view);
        let own = self.own(view).unwrap_or(OptCert {
            member: false,
            tree: TreeCert { root_id: 0, parent_id: None, dist: 0 },
            sum: 0,
        });
        (0..view.degree)
            .map(|p| {
                let mut b = Bits::new();
                b.push(own.member);
                let nb = view.neighbor_ids.map(|ids| ids[p]);
                b.extend(&self.link.message(view.id, &own.tree, nb, eq_coins));
                b.extend(&self.sumzero.encode_residue(own.sum as i64, m));
                b
            })
            .collect()
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let Some(own) = self.own(view) else { return false };
        let Some(&w) = self.weights.get(&view.id) else { return false };
        let (eq_coins, m) = self.coins(view);
        let tree_bits = self.link.message_bits();
        let res_bits = self.sumzero.residue_bits();
        let mut nb_members = Vec::with_capacity(view.degree);
        let mut tree_parts = Vec::with_capacity(view.degree);
        let mut residues = vec![SumZeroTest::residue(if own.member { w as i64 } else { 0 } - own.sum as i64, m)];
        for msg in &view.inbox[0] {
            let mut r = msg.reader();
            let (Some(member), Some(tree), Some(res)) = (r.read_bool(), r.read_bits(tree_bits), r.read_uint(res_bits))
            else {
                return false;
            };
            if self.names_me_parent(view.id, &tree) {
                residues.push(res);
            }
            nb_members.push(member);
            tree_parts.push(tree);
        }
        if !self.problem.admissible_at(own.member, &nb_members) {
            return false;
        }
        if !self.link.check(view.id, &own.tree, view.neighbor_ids, &tree_parts, eq_coins) {
            return false;
        }
        if !residues_sum_to_zero(&residues, m) {
            return false;
        }
        match (own.tree.parent_id, self.objective) {
            (None, Objective::Minimize) => own.sum <= self.threshold,
            (None, Objective::Maximize) => own.sum >= self.threshold,
            (Some(_), _) => true,
        }
    }
}

/// `[Merlin, Arthur]` with shared coins: the equality masks (fingerprint
/// mode only) followed by one pool index.
pub fn optval_spec(inst: &OptInstance) -> Result<ProtocolSpec, EngineError> {
    let codec = inst.codec();
    let link = inst.link();
    let mut parts = Vec::new();
    if link.random_bits() > 0 {
        parts.push(link.equality().domain());
    }
    parts.push(inst.sumzero.domain());
    let domain = RandomDomain::concat(&parts);
    let prover: Arc<dyn Prover> = match honest_optval_certs(inst) {
        Ok(certs) => fixed_optval_prover(codec, certs),
        Err(e) => return Err(EngineError::Protocol(e.to_string())),
    };
    let verifier = OptVerifier {
        problem: inst.problem,
        objective: inst.problem.objective(),
        threshold: inst.threshold,
        codec,
        link,
        sumzero: inst.sumzero.clone(),
        weights: (0..inst.config.n()).map(|v| (inst.config.id(v), inst.weights[v])).collect(),
    };
    let spec = ProtocolSpec::new(
        format!("optval-{}", inst.problem),
        vec![Phase::Merlin, Phase::Arthur(domain)],
        RandomnessMode::Shared,
        prover,
        Arc::new(verifier),
    )?;
    Ok(spec.with_neighbor_ids(matches!(inst.exchange, TreeExchange::Fingerprint { .. })))
}
