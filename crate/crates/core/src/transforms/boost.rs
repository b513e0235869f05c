//! Majority boosting. `C` independent copies run side by side on disjoint
//! slices of every Arthur draw. In the last Merlin phase the prover also
//! certifies a spanning tree and, per copy, how many nodes in each subtree
//! reject that copy; the root accepts iff most copies have no rejecting
//! node.

use std::sync::Arc;

use super::{push_prefixed, read_prefixed, slices};
use crate::bits::{width_for, BitReader, Bits};
use crate::engine::{
    evaluate, EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, Prover, ProverInput, RandomDomain,
    RandomnessMode,
};
use crate::netconfig::NetworkConfig;
use crate::pls::tree::{tree_prove, tree_verify_local, RootRule, TreeCert, TreeCodec};

/// Probability that more than half of `c` independent trials succeed,
/// each with probability `p`.
pub fn majority_success(p: f64, c: usize) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=c {
        if 2 * j > c {
            total += binom * p.powi(j as i32) * (1.0 - p).powi((c - j) as i32);
        }
        binom = binom * (c - j) as f64 / (j + 1) as f64;
    }
    total
}

/// Smallest odd `C` with `exp(-2C(p - 1/2)^2) <= 1 - target` (Hoeffding),
/// which guarantees majority success at least `target`.
pub fn repetitions_for(p: f64, target: f64) -> Option<usize> {
    if !(p > 0.5 && p < 1.0 && target > p && target < 1.0) {
        return None;
    }
    let c = ((1.0 / (1.0 - target)).ln() / (2.0 * (p - 0.5).powi(2))).ceil() as usize;
    Some(if c.is_multiple_of(2) { c + 1 } else { c.max(1) })
}

/// Two-phase fixture: Arthur draws a shared value in `0..modulus`, Merlin
/// sends nothing, every node accepts iff the value is below `accept`.
pub fn coin_spec(accept: u64, modulus: u64) -> Result<ProtocolSpec, EngineError> {
    struct Coin(u64);
    impl LocalVerifier for Coin {
        fn messages(&self, view: &NodeView<'_>, _round: usize) -> Vec<Bits> {
            vec![Bits::new(); view.degree]
        }
        fn decide(&self, view: &NodeView<'_>) -> bool {
            view.randomness[0][0] < self.0
        }
    }
    ProtocolSpec::new(
        format!("coin-{accept}/{modulus}"),
        vec![Phase::Arthur(RandomDomain::new(vec![modulus])?), Phase::Merlin],
        RandomnessMode::Shared,
        crate::engine::empty_prover(),
        Arc::new(Coin(accept)),
    )
}

#[derive(Clone)]
struct Plan {
    inner: ProtocolSpec,
    copies: usize,
    /// Coordinates per copy, for each Arthur phase.
    widths: Vec<usize>,
    tree: TreeCodec,
    count_bits: usize,
}

impl Plan {
    fn last_merlin(&self) -> usize {
        self.inner.merlin_phases() - 1
    }

    fn trailer_bits(&self) -> usize {
        self.tree.bits() + self.copies * self.count_bits
    }

    /// Copy `j`'s view of `[phase][node]` draws.
    fn copy_randomness(&self, all: &[Vec<Vec<u64>>], j: usize) -> Vec<Vec<Vec<u64>>> {
        all.iter()
            .enumerate()
            .map(|(a, phase)| phase.iter().map(|d| slices(d, self.widths[a], self.copies)[j].to_vec()).collect())
            .collect()
    }

    /// Splits one compiled certificate into the copies' certificates and
    /// the trailer (if any).
    fn split_cert(&self, cert: &Bits) -> Option<(Vec<Bits>, Bits)> {
        let mut r = cert.reader();
        let parts: Option<Vec<Bits>> = (0..self.copies).map(|_| read_prefixed(&mut r)).collect();
        Some((parts?, r.rest()))
    }

    fn split_message(&self, m: &Bits) -> Option<(Vec<Bits>, Bits)> {
        self.split_cert(m)
    }
}

struct BoostProver {
    plan: Plan,
}

impl Prover for BoostProver {
    fn certify(&self, input: &ProverInput<'_>) -> Vec<Bits> {
        let plan = &self.plan;
        let n = input.config.n();
        let earlier: Vec<Vec<Vec<Bits>>> = input
            .certificates
            .iter()
            .map(|phase| phase.iter().map(|c| plan.split_cert(c).map(|x| x.0).unwrap_or_default()).collect())
            .collect();
        let mut out = vec![Bits::new(); n];
        let mut rejects = vec![vec![false; plan.copies]; n];
        for j in 0..plan.copies {
            let rand_j = plan.copy_randomness(input.randomness, j);
            let mut certs_j: Vec<Vec<Bits>> = earlier
                .iter()
                .map(|phase| (0..n).map(|v| phase[v].get(j).cloned().unwrap_or_default()).collect())
                .collect();
            let inner_input = ProverInput {
                config: input.config,
                merlin_index: input.merlin_index,
                randomness: &rand_j,
                certificates: &certs_j,
            };
            let mine = plan.inner.prover.certify(&inner_input);
            for v in 0..n {
                push_prefixed(&mut out[v], mine.get(v).unwrap_or(&Bits::new()));
            }
            if input.merlin_index == plan.last_merlin() {
                certs_j.push(mine);
                if let Ok(e) = evaluate(&plan.inner, input.config, &rand_j, &certs_j) {
                    for v in 0..n {
                        rejects[v][j] = !e.verdicts[v];
                    }
                }
            }
        }
        if input.merlin_index == plan.last_merlin() {
            let tree = tree_prove(input.config, RootRule::MinId);
            let counts = subtree_counts(input.config, &tree, &rejects);
            for v in 0..n {
                plan.tree.encode_into(&tree[v], &mut out[v]);
                for &c in &counts[v] {
                    out[v].push_uint(c, plan.count_bits);
                }
            }
        }
        out
    }
}

/// Per node and copy: rejecting nodes in the node's subtree.
fn subtree_counts(config: &NetworkConfig, tree: &[TreeCert], rejects: &[Vec<bool>]) -> Vec<Vec<u64>> {
    let n = config.n();
    let mut counts: Vec<Vec<u64>> = rejects.iter().map(|r| r.iter().map(|&b| u64::from(b)).collect()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(tree[v].dist));
    for v in order {
        if let Some(p) = tree[v].parent_id.and_then(|p| config.index_of(p)) {
            for j in 0..counts[v].len() {
                counts[p][j] += counts[v][j];
            }
        }
    }
    counts
}

struct BoostVerifier {
    plan: Plan,
}

struct Parsed {
    /// `[merlin phase][copy]`.
    certs: Vec<Vec<Bits>>,
    tree: TreeCert,
    counts: Vec<u64>,
}

impl BoostVerifier {
    fn parse_own(&self, view: &NodeView<'_>) -> Option<Parsed> {
        let plan = &self.plan;
        let mut certs = Vec::new();
        let mut trailer = Bits::new();
        for c in &view.certificates {
            let (parts, rest) = plan.split_cert(c)?;
            certs.push(parts);
            trailer = rest;
        }
        let (tree, counts) = self.parse_trailer(&trailer)?;
        Some(Parsed { certs, tree, counts })
    }

    fn parse_trailer(&self, b: &Bits) -> Option<(TreeCert, Vec<u64>)> {
        if b.len() != self.plan.trailer_bits() {
            return None;
        }
        let mut r: BitReader<'_> = b.reader();
        let tree = self.plan.tree.decode(&mut r)?;
        let counts = (0..self.plan.copies).map(|_| r.read_uint(self.plan.count_bits)).collect::<Option<_>>()?;
        Some((tree, counts))
    }

    /// `[copy][round][port]` inner messages, plus each port's round-0
    /// trailer.
    fn split_inbox(&self, inbox: &[Vec<Bits>]) -> Option<(Vec<Vec<Vec<Bits>>>, Vec<Bits>)> {
        let copies = self.plan.copies;
        let mut per_copy = vec![Vec::with_capacity(inbox.len()); copies];
        let mut trailers = Vec::new();
        for (round, msgs) in inbox.iter().enumerate() {
            let mut split = vec![Vec::with_capacity(msgs.len()); copies];
            for m in msgs {
                let (parts, rest) = self.plan.split_message(m)?;
                for (j, p) in parts.into_iter().enumerate() {
                    split[j].push(p);
                }
                if round == 0 {
                    trailers.push(rest);
                }
            }
            for (j, s) in split.into_iter().enumerate() {
                per_copy[j].push(s);
            }
        }
        Some((per_copy, trailers))
    }

    fn inner_view<'a>(
        &self,
        view: &NodeView<'a>,
        certs: &'a [Vec<Bits>],
        j: usize,
        inbox: &'a [Vec<Bits>],
    ) -> NodeView<'a> {
        let randomness = view
            .randomness
            .iter()
            .enumerate()
            .map(|(a, d)| slices(d, self.plan.widths[a], self.plan.copies)[j])
            .collect();
        NodeView {
            id: view.id,
            label: view.label,
            degree: view.degree,
            neighbor_ids: view.neighbor_ids,
            randomness,
            certificates: certs.iter().map(|c| &c[j]).collect(),
            inbox,
        }
    }
}

impl LocalVerifier for BoostVerifier {
    fn rounds(&self) -> usize {
        self.plan.inner.verifier.rounds()
    }

    fn messages(&self, view: &NodeView<'_>, round: usize) -> Vec<Bits> {
        let plan = &self.plan;
        let parsed = self.parse_own(view);
        let empty = vec![vec![Bits::new(); plan.copies]; view.certificates.len()];
        let certs = parsed.as_ref().map_or(&empty, |p| &p.certs);
        let inbox = self.split_inbox(view.inbox).map(|x| x.0);
        let mut out = vec![Bits::new(); view.degree];
        for j in 0..plan.copies {
            let no_inbox = vec![vec![Bits::new(); view.degree]; round];
            let copy_inbox = inbox.as_ref().map_or(&no_inbox, |i| &i[j]);
            let inner = self.inner_view(view, certs, j, copy_inbox);
            let msgs = plan.inner.verifier.messages(&inner, round);
            for (p, o) in out.iter_mut().enumerate() {
                push_prefixed(o, msgs.get(p).unwrap_or(&Bits::new()));
            }
        }
        if round == 0 {
            if let Some(p) = &parsed {
                for o in &mut out {
                    o.push_uint(view.id, plan.tree.id_bits);
                    plan.tree.encode_into(&p.tree, o);
                    for &c in &p.counts {
                        o.push_uint(c, plan.count_bits);
                    }
                }
            }
        }
        out
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let plan = &self.plan;
        let Some(own) = self.parse_own(view) else { return false };
        let Some((inbox, trailers)) = self.split_inbox(view.inbox) else { return false };
        let mut nbs = Vec::with_capacity(view.degree);
        for t in &trailers {
            let mut r = t.reader();
            let Some(id) = r.read_uint(plan.tree.id_bits) else { return false };
            let Some((tree, counts)) = self.parse_trailer(&r.rest()) else { return false };
            nbs.push((id, tree, counts));
        }
        let tree_nbs: Vec<(u64, TreeCert)> = nbs.iter().map(|(id, t, _)| (*id, *t)).collect();
        if !tree_verify_local(view.id, &own.tree, &tree_nbs) {
            return false;
        }
        for j in 0..plan.copies {
            let inner = self.inner_view(view, &own.certs, j, &inbox[j]);
            let reject = u64::from(!plan.inner.verifier.decide(&inner));
            let children: u64 = nbs
                .iter()
                .filter(|(_, t, _)| t.parent_id == Some(view.id))
                .map(|(_, _, c)| c[j])
                .sum();
            if own.counts[j] != reject + children {
                return false;
            }
        }
        if own.tree.parent_id.is_some() {
            return true;
        }
        let accepted = own.counts.iter().filter(|&&c| c == 0).count();
        2 * accepted > plan.copies
    }
}

/// Runs `copies` (odd) copies of `spec` and takes the majority. The protocol
/// must have at least two phases and end with Merlin, who then sees every
/// copy's coins and can certify the reject counts.
pub fn boost(spec: &ProtocolSpec, config: &NetworkConfig, copies: usize) -> Result<ProtocolSpec, EngineError> {
    if copies.is_multiple_of(2) {
        return Err(EngineError::Protocol(format!("repetition count must be odd, got {copies}")));
    }
    if spec.interactions() < 2 || !matches!(spec.schedule().last(), Some(Phase::Merlin)) {
        return Err(EngineError::Schedule("boosting needs at least two phases ending with Merlin".into()));
    }
    let schedule: Vec<Phase> = spec
        .schedule()
        .iter()
        .map(|p| match p {
            Phase::Merlin => Phase::Merlin,
            Phase::Arthur(d) => Phase::Arthur(RandomDomain::concat(&vec![d.clone(); copies])),
        })
        .collect();
    let plan = Plan {
        inner: spec.clone(),
        copies,
        widths: spec.arthur_domains().iter().map(|d| d.moduli().len()).collect(),
        tree: TreeCodec::for_config(config),
        count_bits: width_for(config.n() as u64),
    };
    let out = ProtocolSpec::new(
        format!("boost{copies}({})", spec.name),
        schedule,
        spec.randomness,
        Arc::new(BoostProver { plan: plan.clone() }),
        Arc::new(BoostVerifier { plan }),
    )?;
    Ok(out.with_neighbor_ids(spec.neighbor_ids_visible))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{estimate, exact_acceptance, run_once};
    use crate::netconfig::{generate, GraphKind};

    #[test]
    fn majority_closed_form() {
        assert!((majority_success(0.4, 5) - 0.31744).abs() < 1e-12);
        assert_eq!(majority_success(1.0, 3), 1.0);
        assert_eq!(repetitions_for(0.6, 0.9), Some(117));
        let c = repetitions_for(0.75, 0.95).unwrap();
        assert!(c % 2 == 1 && majority_success(0.75, c) >= 0.95);
    }

    #[test]
    fn coin_fixture_boosted_exactly() {
        let c = generate(&GraphKind::Path(3)).unwrap();
        let spec = boost(&coin_spec(2, 5).unwrap(), &c, 5).unwrap();
        let a = exact_acceptance(&spec, &c).unwrap();
        assert_eq!(a.total, 3125);
        // Outcomes with at least three of five draws in {0, 1}.
        let oracle: u128 = (0..3125u32)
            .filter(|&x| (0..5).filter(|i| (x / 5u32.pow(*i)) % 5 < 2).count() >= 3)
            .count() as u128;
        assert_eq!(a.accepting, oracle);
        assert_eq!(oracle as f64 / 3125.0, 0.31744);
    }

    #[test]
    fn completeness_kept() {
        let c = generate(&GraphKind::Cycle(4)).unwrap();
        let spec = boost(&coin_spec(5, 5).unwrap(), &c, 3).unwrap();
        assert_eq!(estimate(&spec, &c, 100, 0).unwrap().accepted, 100);
    }

    #[test]
    fn even_or_short_rejected() {
        let c = generate(&GraphKind::Path(2)).unwrap();
        assert!(boost(&coin_spec(1, 2).unwrap(), &c, 4).is_err());
        let tree = crate::pls::tree::tree_spec(&c, crate::pls::tree::TreeExchange::Plain).unwrap();
        assert!(boost(&tree, &c, 3).is_err());
    }

    #[test]
    fn forged_counts_rejected_locally() {
        // Copy 0 fails everywhere; a prover claiming zero rejections at a
        // leaf is caught by the leaf itself.
        let c = generate(&GraphKind::Path(3)).unwrap();
        let inner = coin_spec(1, 2).unwrap();
        let spec = boost(&inner, &c, 3).unwrap();
        let honest = spec.prover.clone();
        let forged = Arc::new(move |input: &ProverInput<'_>| {
            let mut certs = honest.certify(input);
            let leaf = &mut certs[2];
            let k = leaf.len();
            // Zero the last count field (copy 2), 2 bits wide for n = 3.
            let mut bits = leaf.as_slice().to_vec();
            bits[k - 2] = false;
            bits[k - 1] = false;
            *leaf = Bits::from_bools(bits);
            certs
        });
        let spec = spec.with_prover(forged);
        for trial in 0..20 {
            let (_, t) = run_once(&spec, &c, 5, trial).unwrap();
            let r = &t.randomness[0][0];
            if r[2] == 1 {
                assert!(!t.verdicts[2]);
            }
        }
    }
}
