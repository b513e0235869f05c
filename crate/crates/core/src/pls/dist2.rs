//! Certified node count and distance-2 coloring. A spanning tree carries
//! subtree sizes up to the root, which fixes the node count `n`; colors in
//! `1..=n` that differ within every closed neighborhood are then checked
//! locally.

use std::sync::Arc;

use super::tree::{tree_check_edge, tree_check_self, tree_prove, RootRule, TreeCert, TreeCodec};
use crate::bits::{width_for, BitReader, Bits};
use crate::engine::{EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, Prover, ProverInput, RandomnessMode};
use crate::netconfig::NetworkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dist2ColorCert {
    pub tree: TreeCert,
    pub subtree_count: u64,
    pub n_claimed: u64,
    pub color: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dist2Codec {
    pub tree: TreeCodec,
    /// Width of counts and colors; values up to `2n + 1` fit.
    pub count_bits: usize,
}

impl Dist2Codec {
    pub fn for_config(config: &NetworkConfig) -> Self {
        Dist2Codec {
            tree: TreeCodec::for_config(config),
            count_bits: width_for(2 * config.n() as u64 + 1),
        }
    }

    pub fn bits(&self) -> usize {
        self.tree.bits() + 3 * self.count_bits
    }

    pub fn encode(&self, c: &Dist2ColorCert) -> Bits {
        let mut b = self.tree.encode(&c.tree);
        b.push_uint(c.subtree_count, self.count_bits);
        b.push_uint(c.n_claimed, self.count_bits);
        b.push_uint(c.color, self.count_bits);
        b
    }

    pub fn decode(&self, r: &mut BitReader<'_>) -> Option<Dist2ColorCert> {
        Some(Dist2ColorCert {
            tree: self.tree.decode(r)?,
            subtree_count: r.read_uint(self.count_bits)?,
            n_claimed: r.read_uint(self.count_bits)?,
            color: r.read_uint(self.count_bits)?,
        })
    }
}

/// Greedy coloring in increasing id order: each node takes the smallest
/// color unused within distance 2. Uses at most `min(d^2 + 1, n)` colors.
pub fn greedy_dist2_coloring(config: &NetworkConfig) -> Vec<u64> {
    let n = config.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| config.id(v));
    let mut color = vec![0u64; n];
    for v in order {
        let mut used: Vec<u64> = Vec::new();
        for &u in config.neighbors(v) {
            used.push(color[u]);
            used.extend(config.neighbors(u).iter().map(|&w| color[w]));
        }
        color[v] = (1..).find(|c| !used.contains(c)).expect("a free color exists");
    }
    color
}

/// Whether nodes at distance 1 or 2 always have distinct colors.
pub fn is_dist2_proper(config: &NetworkConfig, colors: &[u64]) -> bool {
    (0..config.n()).all(|v| {
        let nb = config.neighbors(v);
        nb.iter().all(|&u| colors[u] != colors[v])
            && nb.iter().enumerate().all(|(i, &a)| nb[i + 1..].iter().all(|&b| colors[a] != colors[b]))
    })
}

pub fn dist2_prove(config: &NetworkConfig) -> Vec<Dist2ColorCert> {
    let n = config.n();
    let tree = tree_prove(config, RootRule::MinId);
    let colors = greedy_dist2_coloring(config);
    let mut count = vec![1u64; n];
    let mut by_depth: Vec<usize> = (0..n).collect();
    by_depth.sort_by_key(|&v| std::cmp::Reverse(tree[v].dist));
    for v in by_depth {
        if let Some(p) = tree[v].parent_id.and_then(|p| config.index_of(p)) {
            count[p] += count[v];
        }
    }
    (0..n)
        .map(|v| Dist2ColorCert { tree: tree[v], subtree_count: count[v], n_claimed: n as u64, color: colors[v] })
        .collect()
}

/// Verdict at one node given each neighbor's id and certificate.
pub fn dist2_verify_local(own_id: u64, own: &Dist2ColorCert, neighbors: &[(u64, Dist2ColorCert)]) -> bool {
    let ids: Vec<u64> = neighbors.iter().map(|&(id, _)| id).collect();
    if !tree_check_self(own_id, &own.tree, &ids) {
        return false;
    }
    if !neighbors.iter().all(|(id, c)| tree_check_edge(own_id, &own.tree, *id, &c.tree)) {
        return false;
    }
    let children: u64 = neighbors
        .iter()
        .filter(|(_, c)| c.tree.parent_id == Some(own_id))
        .map(|(_, c)| c.subtree_count)
        .sum();
    if own.subtree_count != 1 + children {
        return false;
    }
    if neighbors.iter().any(|(_, c)| c.n_claimed != own.n_claimed) {
        return false;
    }
    if own.tree.parent_id.is_none() && own.n_claimed != own.subtree_count {
        return false;
    }
    if own.color == 0 || own.color > own.n_claimed {
        return false;
    }
    let colors: Vec<u64> = neighbors.iter().map(|(_, c)| c.color).collect();
    if colors.contains(&own.color) {
        return false;
    }
    colors.iter().enumerate().all(|(i, a)| !colors[i + 1..].contains(a))
}

struct Dist2Verifier {
    codec: Dist2Codec,
}

impl LocalVerifier for Dist2Verifier {
    fn messages(&self, view: &NodeView<'_>, _round: usize) -> Vec<Bits> {
        let mut m = Bits::from_uint(view.id, self.codec.tree.id_bits);
        m.extend(view.certificates[0]);
        vec![m; view.degree]
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let cert = view.certificates[0];
        if cert.len() != self.codec.bits() {
            return false;
        }
        let Some(own) = self.codec.decode(&mut cert.reader()) else { return false };
        let mut nbs = Vec::with_capacity(view.degree);
        for m in &view.inbox[0] {
            if m.len() != self.codec.tree.id_bits + self.codec.bits() {
                return false;
            }
            let mut r = m.reader();
            let (Some(id), Some(c)) = (r.read_uint(self.codec.tree.id_bits), self.codec.decode(&mut r)) else {
                return false;
            };
            nbs.push((id, c));
        }
        dist2_verify_local(view.id, &own, &nbs)
    }
}

pub fn honest_dist2_prover(codec: Dist2Codec) -> Arc<dyn Prover> {
    Arc::new(move |input: &ProverInput<'_>| dist2_prove(input.config).iter().map(|c| codec.encode(c)).collect())
}

pub fn fixed_dist2_prover(codec: Dist2Codec, certs: Vec<Dist2ColorCert>) -> Arc<dyn Prover> {
    Arc::new(move |_: &ProverInput<'_>| certs.iter().map(|c| codec.encode(c)).collect())
}

/// One Merlin phase, one round in which each node sends its id and
/// certificate.
pub fn dist2_spec(config: &NetworkConfig) -> Result<ProtocolSpec, EngineError> {
    let codec = Dist2Codec::for_config(config);
    ProtocolSpec::new(
        "dist2",
        vec![Phase::Merlin],
        RandomnessMode::Shared,
        honest_dist2_prover(codec),
        Arc::new(Dist2Verifier { codec }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{evaluate, run_once};
    use crate::netconfig::{all_connected_graphs, generate, GraphKind};

    #[test]
    fn c5_colors() {
        let c = generate(&GraphKind::Cycle(5)).unwrap();
        let certs = dist2_prove(&c);
        assert!(certs.iter().all(|x| (1..=5).contains(&x.color)));
        let spec = dist2_spec(&c).unwrap();
        assert!(run_once(&spec, &c, 0, 0).unwrap().0);
    }

    #[test]
    fn greedy_bound_on_small_graphs() {
        for n in 1..=5 {
            for g in all_connected_graphs(n) {
                let colors = greedy_dist2_coloring(&g);
                let d = g.max_degree() as u64;
                assert!(is_dist2_proper(&g, &colors));
                assert!(*colors.iter().max().unwrap() <= (d * d + 1).min(n as u64));
            }
        }
    }

    #[test]
    fn forged_count_rejected_at_root() {
        let c = generate(&GraphKind::Cycle(5)).unwrap();
        let mut certs = dist2_prove(&c);
        for x in &mut certs {
            x.n_claimed = 6;
        }
        let codec = Dist2Codec::for_config(&c);
        let spec = dist2_spec(&c).unwrap().with_prover(fixed_dist2_prover(codec, certs.clone()));
        let certs_bits: Vec<Bits> = certs.iter().map(|x| codec.encode(x)).collect();
        let e = evaluate(&spec, &c, &[], &[certs_bits]).unwrap();
        let root = c.index_of(0).unwrap();
        assert!(!e.verdicts[root]);
    }

    #[test]
    fn clashing_neighbor_colors_rejected() {
        let c = generate(&GraphKind::Path(3)).unwrap();
        let mut certs = dist2_prove(&c);
        certs[2].color = certs[0].color;
        let codec = Dist2Codec::for_config(&c);
        let bits: Vec<Bits> = certs.iter().map(|x| codec.encode(x)).collect();
        let spec = dist2_spec(&c).unwrap();
        let e = evaluate(&spec, &c, &[], &[bits]).unwrap();
        assert!(!e.verdicts[1]);
    }

    #[test]
    fn acceptance_implies_proper_coloring_and_true_count() {
        // Exhaustive over colors in 1..=n+1 and counts on small paths and
        // cycles, keeping honest trees.
        for kind in [GraphKind::Path(3), GraphKind::Cycle(4), GraphKind::Complete(3)] {
            let c = generate(&kind).unwrap();
            let n = c.n() as u64;
            let honest = dist2_prove(&c);
            let mut alphabets = Vec::new();
            for h in &honest {
                let mut a = Vec::new();
                for count in 1..=n + 1 {
                    for claimed in n - 1..=n + 1 {
                        for color in 1..=n + 1 {
                            a.push(Dist2ColorCert { tree: h.tree, subtree_count: count, n_claimed: claimed, color });
                        }
                    }
                }
                alphabets.push(a);
            }
            let mut accepted = 0;
            crate::pls::search_assignments(&c, &alphabets, &|_, _| true, &mut |a| {
                let ok = (0..c.n()).all(|v| {
                    let nbs: Vec<(u64, Dist2ColorCert)> = c.neighbors(v).iter().map(|&u| (c.id(u), a[u])).collect();
                    dist2_verify_local(c.id(v), &a[v], &nbs)
                });
                if ok {
                    accepted += 1;
                    let colors: Vec<u64> = a.iter().map(|x| x.color).collect();
                    assert!(is_dist2_proper(&c, &colors));
                    assert!(a.iter().all(|x| x.n_claimed == n));
                }
            });
            assert!(accepted > 0);
        }
    }
}
