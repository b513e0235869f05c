//! Spanning-tree certificates: every node gets the root's id, its parent's
//! id and its distance to the root.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::bits::{width_for, BitReader, Bits};
use crate::commprims::EqualityTest;
use crate::engine::{
    EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, Prover, ProverInput, RandomnessMode,
};
use crate::netconfig::NetworkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeCert {
    pub root_id: u64,
    pub parent_id: Option<u64>,
    pub dist: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootRule {
    MinId,
    MaxId,
    Id(u64),
}

/// Fixed-width layout: root id, presence bit, parent id, distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeCodec {
    pub id_bits: usize,
    pub dist_bits: usize,
}

impl TreeCodec {
    /// Ids up to `max_id + 1` and distances up to `n` fit.
    pub fn for_config(config: &NetworkConfig) -> Self {
        TreeCodec { id_bits: width_for(config.max_id() + 1), dist_bits: width_for(config.n() as u64) }
    }

    pub fn bits(&self) -> usize {
        2 * self.id_bits + 1 + self.dist_bits
    }

    pub fn encode(&self, c: &TreeCert) -> Bits {
        let mut b = Bits::new();
        self.encode_into(c, &mut b);
        b
    }

    pub fn encode_into(&self, c: &TreeCert, out: &mut Bits) {
        out.push_uint(c.root_id, self.id_bits);
        out.push(c.parent_id.is_some());
        out.push_uint(c.parent_id.unwrap_or(0), self.id_bits);
        out.push_uint(c.dist, self.dist_bits);
    }

    pub fn decode(&self, r: &mut BitReader<'_>) -> Option<TreeCert> {
        let root_id = r.read_uint(self.id_bits)?;
        let has_parent = r.read_bool()?;
        let parent = r.read_uint(self.id_bits)?;
        let dist = r.read_uint(self.dist_bits)?;
        Some(TreeCert { root_id, parent_id: has_parent.then_some(parent), dist })
    }
}

/// BFS tree from the root chosen by `rule`; each node's parent is its
/// smallest-id neighbor one step closer to the root.
pub fn tree_prove(config: &NetworkConfig, rule: RootRule) -> Vec<TreeCert> {
    let root = match rule {
        RootRule::MinId => (0..config.n()).min_by_key(|&v| config.id(v)),
        RootRule::MaxId => (0..config.n()).max_by_key(|&v| config.id(v)),
        RootRule::Id(id) => config.index_of(id),
    }
    .expect("root exists in configuration");
    let root_id = config.id(root);
    let mut certs = vec![TreeCert { root_id, parent_id: None, dist: 0 }; config.n()];
    let mut seen = vec![false; config.n()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in config.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                certs[w] = TreeCert { root_id, parent_id: Some(config.id(u)), dist: certs[u].dist + 1 };
                queue.push_back(w);
            }
        }
    }
    certs
}

/// Checks that depend only on the node itself: a parentless node must be
/// the root at distance 0, any other node must point at a neighbor.
pub fn tree_check_self(own_id: u64, own: &TreeCert, neighbor_ids: &[u64]) -> bool {
    match own.parent_id {
        None => own.dist == 0 && own.root_id == own_id,
        Some(p) => own.dist >= 1 && neighbor_ids.contains(&p),
    }
}

/// Checks against one neighbor `(id, cert)`: same root, and distances
/// consistent along parent pointers in either direction.
pub fn tree_check_edge(own_id: u64, own: &TreeCert, nb_id: u64, nb: &TreeCert) -> bool {
    if nb.root_id != own.root_id {
        return false;
    }
    if own.parent_id == Some(nb_id) && nb.dist + 1 != own.dist {
        return false;
    }
    if nb.parent_id == Some(own_id) && nb.dist != own.dist + 1 {
        return false;
    }
    true
}

/// Plaintext verification at one node given every neighbor's id and
/// certificate.
pub fn tree_verify_local(own_id: u64, own: &TreeCert, neighbors: &[(u64, TreeCert)]) -> bool {
    let ids: Vec<u64> = neighbors.iter().map(|&(id, _)| id).collect();
    tree_check_self(own_id, own, &ids)
        && neighbors.iter().all(|(id, c)| tree_check_edge(own_id, own, *id, c))
}

/// Global oracle: the assignment encodes a spanning tree of `config`.
pub fn is_valid_tree(config: &NetworkConfig, certs: &[TreeCert]) -> bool {
    let n = config.n();
    let Some(first) = certs.first() else { return false };
    let root_id = first.root_id;
    if certs.iter().any(|c| c.root_id != root_id) {
        return false;
    }
    let Some(root) = config.index_of(root_id) else { return false };
    if certs[root].parent_id.is_some() || certs[root].dist != 0 {
        return false;
    }
    for v in 0..n {
        if v == root {
            continue;
        }
        let Some(p) = certs[v].parent_id.and_then(|p| config.index_of(p)) else { return false };
        if !config.has_edge(v, p) || certs[v].dist != certs[p].dist + 1 {
            return false;
        }
    }
    true
}

/// How neighbors compare tree certificates during verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeExchange {
    /// Send the sender's id and whole certificate.
    Plain,
    /// Send a parent flag plus fingerprints of the root id and distance,
    /// with `repetitions` shared masks. Nodes must know neighbor ids.
    Fingerprint { repetitions: usize },
}

/// Message layout and checks for one exchange mode. Composite protocols
/// embed these messages inside their own.
#[derive(Debug, Clone, Copy)]
pub struct TreeLink {
    pub codec: TreeCodec,
    pub exchange: TreeExchange,
    eq: EqualityTest,
}

impl TreeLink {
    pub fn new(codec: TreeCodec, exchange: TreeExchange) -> Self {
        let input_bits = codec.id_bits.max(codec.dist_bits + 1);
        let reps = match exchange {
            TreeExchange::Plain => 0,
            TreeExchange::Fingerprint { repetitions } => repetitions,
        };
        TreeLink { codec, exchange, eq: EqualityTest::new(input_bits).with_repetitions(reps) }
    }

    pub fn equality(&self) -> EqualityTest {
        self.eq
    }

    /// Shared coins consumed per run (0 in plain mode).
    pub fn random_bits(&self) -> usize {
        match self.exchange {
            TreeExchange::Plain => 0,
            TreeExchange::Fingerprint { .. } => self.eq.random_bits(),
        }
    }

    pub fn message_bits(&self) -> usize {
        match self.exchange {
            TreeExchange::Plain => self.codec.id_bits + self.codec.bits(),
            TreeExchange::Fingerprint { repetitions } => 1 + 2 * repetitions,
        }
    }

    fn fp(&self, value: u64, coins: &[u64]) -> Bits {
        let x = Bits::from_uint(value, self.eq.input_bits);
        self.eq.fingerprint(&x, coins).expect("value fits the mask length")
    }

    /// Message for the neighbor with id `nb_id` (which is `None` in plain
    /// mode, where the message does not depend on the port).
    pub fn message(&self, own_id: u64, own: &TreeCert, nb_id: Option<u64>, coins: &[u64]) -> Bits {
        match self.exchange {
            TreeExchange::Plain => {
                let mut b = Bits::from_uint(own_id, self.codec.id_bits);
                self.codec.encode_into(own, &mut b);
                b
            }
            TreeExchange::Fingerprint { .. } => {
                let mut b = Bits::new();
                b.push(nb_id.is_some() && own.parent_id == nb_id);
                b.extend(&self.fp(own.root_id, coins));
                b.extend(&self.fp(own.dist, coins));
                b
            }
        }
    }

    /// Verdict at a node from the tree part of each port's message.
    /// `neighbor_ids` is required in fingerprint mode.
    pub fn check(
        &self,
        own_id: u64,
        own: &TreeCert,
        neighbor_ids: Option<&[u64]>,
        inbox: &[Bits],
        coins: &[u64],
    ) -> bool {
        match self.exchange {
            TreeExchange::Plain => {
                let mut nbs = Vec::with_capacity(inbox.len());
                for m in inbox {
                    let mut r = m.reader();
                    let Some(id) = r.read_uint(self.codec.id_bits) else { return false };
                    let Some(c) = self.codec.decode(&mut r) else { return false };
                    if !r.is_done() {
                        return false;
                    }
                    nbs.push((id, c));
                }
                tree_verify_local(own_id, own, &nbs)
            }
            TreeExchange::Fingerprint { repetitions } => {
                let Some(ids) = neighbor_ids else { return false };
                if !tree_check_self(own_id, own, ids) {
                    return false;
                }
                let root_fp = self.fp(own.root_id, coins);
                let parent_dist_fp = own.dist.checked_sub(1).map(|d| self.fp(d, coins));
                let child_dist_fp = self.fp(own.dist + 1, coins);
                for (port, m) in inbox.iter().enumerate() {
                    if m.len() != 1 + 2 * repetitions {
                        return false;
                    }
                    let mut r = m.reader();
                    let claims_me = r.read_bool().unwrap_or(false);
                    let fr = r.read_bits(repetitions).unwrap_or_default();
                    let fd = r.read_bits(repetitions).unwrap_or_default();
                    if fr != root_fp {
                        return false;
                    }
                    if own.parent_id == Some(ids[port]) && Some(&fd) != parent_dist_fp.as_ref() {
                        return false;
                    }
                    if claims_me && fd != child_dist_fp {
                        return false;
                    }
                }
                true
            }
        }
    }
}

struct TreeVerifier {
    link: TreeLink,
}

impl LocalVerifier for TreeVerifier {
    fn messages(&self, view: &NodeView<'_>, _round: usize) -> Vec<Bits> {
        let coins = view.randomness.first().copied().unwrap_or(&[]);
        let own = self.link.codec.decode(&mut view.certificates[0].reader());
        let own = own.unwrap_or(TreeCert { root_id: 0, parent_id: None, dist: 0 });
        (0..view.degree)
            .map(|p| {
                let nb = view.neighbor_ids.map(|ids| ids[p]);
                self.link.message(view.id, &own, nb, coins)
            })
            .collect()
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let cert = view.certificates[0];
        if cert.len() != self.link.codec.bits() {
            return false;
        }
        let Some(own) = self.link.codec.decode(&mut cert.reader()) else { return false };
        let coins = view.randomness.first().copied().unwrap_or(&[]);
        self.link.check(view.id, &own, view.neighbor_ids, &view.inbox[0], coins)
    }
}

/// Honest prover: BFS tree rooted at the minimum id.
pub fn honest_tree_prover(codec: TreeCodec) -> Arc<dyn Prover> {
    Arc::new(move |input: &ProverInput<'_>| {
        tree_prove(input.config, RootRule::MinId).iter().map(|c| codec.encode(c)).collect()
    })
}

/// Prover handing out a fixed assignment.
pub fn fixed_tree_prover(codec: TreeCodec, certs: Vec<TreeCert>) -> Arc<dyn Prover> {
    Arc::new(move |_: &ProverInput<'_>| certs.iter().map(|c| codec.encode(c)).collect())
}

/// Spanning-tree certification as a protocol: one Merlin phase, then in
/// fingerprint mode one shared Arthur phase for the masks.
pub fn tree_spec(config: &NetworkConfig, exchange: TreeExchange) -> Result<ProtocolSpec, EngineError> {
    let codec = TreeCodec::for_config(config);
    let link = TreeLink::new(codec, exchange);
    let (schedule, kt1) = match exchange {
        TreeExchange::Plain => (vec![Phase::Merlin], false),
        TreeExchange::Fingerprint { .. } => {
            (vec![Phase::Merlin, Phase::Arthur(link.equality().domain())], true)
        }
    };
    let spec = ProtocolSpec::new(
        "tree",
        schedule,
        RandomnessMode::Shared,
        honest_tree_prover(codec),
        Arc::new(TreeVerifier { link }),
    )?;
    Ok(spec.with_neighbor_ids(kt1))
}

/// Every assignment from bounded alphabets (root and parent drawn from the
/// ids plus one unused id, parent also absent, distance in `0..=n`) that
/// all nodes accept in plaintext mode.
pub fn accepted_assignments(config: &NetworkConfig) -> Vec<Vec<TreeCert>> {
    let n = config.n();
    let bogus = config.max_id() + 1;
    let ids: Vec<u64> = config.ids().iter().copied().chain([bogus]).collect();
    let mut alphabet = Vec::new();
    for &root_id in &ids {
        for parent_id in std::iter::once(None).chain(ids.iter().map(|&p| Some(p))) {
            for dist in 0..=n as u64 {
                alphabet.push(TreeCert { root_id, parent_id, dist });
            }
        }
    }
    let neighbor_ids: Vec<Vec<u64>> =
        (0..n).map(|v| config.neighbors(v).iter().map(|&u| config.id(u)).collect()).collect();
    let consistent = |w: usize, p: &[Option<TreeCert>]| {
        let own = p[w].as_ref().expect("assigned");
        tree_check_self(config.id(w), own, &neighbor_ids[w])
            && config.neighbors(w).iter().all(|&u| match &p[u] {
                Some(c) => tree_check_edge(config.id(w), own, config.id(u), c),
                None => true,
            })
    };
    let mut out = Vec::new();
    search_all(config, &vec![alphabet; n], &consistent, &mut out);
    out
}

fn search_all(
    config: &NetworkConfig,
    alphabets: &[Vec<TreeCert>],
    consistent: &dyn Fn(usize, &[Option<TreeCert>]) -> bool,
    out: &mut Vec<Vec<TreeCert>>,
) {
    super::search_assignments(config, alphabets, consistent, &mut |a| out.push(a.to_vec()));
}
