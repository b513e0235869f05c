//! Shared to distributed randomness. Every node draws its own string in
//! each Arthur phase; in the next Merlin phase the prover hands everyone
//! the string of the minimum-id node, together with a spanning tree rooted
//! there. Neighbors compare strings, and the root compares the string with
//! its own draw. A final Arthur phase gets an extra Merlin phase for this.

use std::sync::Arc;

use crate::bits::{ceil_log2, BitReader, Bits};
use crate::engine::{
    EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, Prover, ProverInput, RandomDomain, RandomnessMode,
};
use crate::netconfig::NetworkConfig;
use crate::pls::tree::{tree_prove, tree_verify_local, RootRule, TreeCert, TreeCodec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerandMode {
    /// The input ends with Merlin; the phase count is kept.
    Am,
    /// The input ends with Arthur; one Merlin phase is appended.
    Ma,
}

#[derive(Debug, Clone)]
struct MerlinSlot {
    /// Arthur phase (in both schedules) whose string this phase certifies.
    certifies: Option<usize>,
    /// Merlin phase of the input spec carried here.
    inner: Option<usize>,
}

#[derive(Clone)]
struct Plan {
    inner: ProtocolSpec,
    domains: Vec<RandomDomain>,
    slots: Vec<MerlinSlot>,
    tree: TreeCodec,
}

fn domain_bits(d: &RandomDomain) -> usize {
    d.moduli().iter().map(|&m| ceil_log2(m)).sum()
}

impl Plan {
    fn header_bits(&self, slot: &MerlinSlot) -> usize {
        slot.certifies.map_or(0, |a| self.tree.bits() + domain_bits(&self.domains[a]))
    }

    fn encode_draw(&self, a: usize, draw: &[u64], out: &mut Bits) {
        for (&m, &x) in self.domains[a].moduli().iter().zip(draw) {
            out.push_uint(x, ceil_log2(m));
        }
    }

    fn decode_draw(&self, a: usize, r: &mut BitReader<'_>) -> Option<Vec<u64>> {
        self.domains[a]
            .moduli()
            .iter()
            .map(|&m| r.read_uint(ceil_log2(m)).filter(|&x| x < m))
            .collect()
    }

    /// Splits a compiled certificate into header `(tree, string)` and the
    /// inner certificate.
    fn split(&self, slot: &MerlinSlot, cert: &Bits) -> Option<(Option<(TreeCert, Vec<u64>)>, Bits)> {
        let mut r = cert.reader();
        let head = match slot.certifies {
            Some(a) => Some((self.tree.decode(&mut r)?, self.decode_draw(a, &mut r)?)),
            None => None,
        };
        Some((head, r.rest()))
    }
}

struct DerandProver {
    plan: Plan,
    tamper: bool,
}

impl Prover for DerandProver {
    fn certify(&self, input: &ProverInput<'_>) -> Vec<Bits> {
        let plan = &self.plan;
        let config = input.config;
        let n = config.n();
        let root = (0..n).min_by_key(|&v| config.id(v)).expect("non-empty configuration");
        let shared: Vec<Vec<Vec<u64>>> = input.randomness.iter().map(|phase| vec![phase[root].clone(); n]).collect();
        let mut inner_certs = Vec::new();
        for (slot, certs) in plan.slots.iter().zip(input.certificates) {
            if slot.inner.is_some() {
                inner_certs.push(certs.iter().map(|c| plan.split(slot, c).map(|x| x.1).unwrap_or_default()).collect());
            }
        }
        let slot = &plan.slots[input.merlin_index];
        let inner = slot.inner.map(|mi| {
            plan.inner.prover.certify(&ProverInput {
                config,
                merlin_index: mi,
                randomness: &shared,
                certificates: &inner_certs,
            })
        });
        let tree = slot.certifies.map(|_| tree_prove(config, RootRule::MinId));
        (0..n)
            .map(|v| {
                let mut b = Bits::new();
                if let (Some(a), Some(tree)) = (slot.certifies, &tree) {
                    plan.tree.encode_into(&tree[v], &mut b);
                    let mut draw = shared[a][v].clone();
                    if self.tamper && a == 0 {
                        let m = plan.domains[a].moduli()[0];
                        draw[0] = (draw[0] + 1) % m;
                    }
                    plan.encode_draw(a, &draw, &mut b);
                }
                if let Some(certs) = &inner {
                    b.extend(&certs[v]);
                }
                b
            })
            .collect()
    }
}

struct DerandVerifier {
    plan: Plan,
}

struct Own {
    heads: Vec<(usize, TreeCert, Vec<u64>)>,
    inner: Vec<Bits>,
}

impl DerandVerifier {
    fn own(&self, view: &NodeView<'_>) -> Option<Own> {
        let mut heads = Vec::new();
        let mut inner = Vec::new();
        for (slot, c) in self.plan.slots.iter().zip(&view.certificates) {
            let (head, rest) = self.plan.split(slot, c)?;
            if let (Some(a), Some((t, r))) = (slot.certifies, head) {
                heads.push((a, t, r));
            }
            if slot.inner.is_some() {
                inner.push(rest);
            }
        }
        Some(Own { heads, inner })
    }

    fn trailer_bits(&self) -> usize {
        self.plan.tree.id_bits + self.plan.slots.iter().map(|s| self.plan.header_bits(s)).sum::<usize>()
    }

    /// Inner rounds' inbox: round 0 without the headers.
    fn inner_inbox(&self, inbox: &[Vec<Bits>]) -> Vec<Vec<Bits>> {
        let k = self.trailer_bits();
        inbox
            .iter()
            .enumerate()
            .map(|(round, msgs)| {
                msgs.iter()
                    .map(|m| if round == 0 { Bits::from_bools(m.as_slice().get(k..).unwrap_or(&[]).to_vec()) } else { m.clone() })
                    .collect()
            })
            .collect()
    }

    fn inner_view<'a>(&self, view: &NodeView<'a>, own: &'a Own, draws: &'a [Vec<u64>], inbox: &'a [Vec<Bits>]) -> NodeView<'a> {
        NodeView {
            id: view.id,
            label: view.label,
            degree: view.degree,
            neighbor_ids: view.neighbor_ids,
            randomness: draws.iter().map(Vec::as_slice).collect(),
            certificates: own.inner.iter().collect(),
            inbox,
        }
    }

    /// Certified strings for Arthur phases completed so far.
    fn draws(&self, own: &Own, phases: usize) -> Vec<Vec<u64>> {
        let mut d: Vec<Vec<u64>> = vec![Vec::new(); phases];
        for (a, _, r) in &own.heads {
            if *a < phases {
                d[*a] = r.clone();
            }
        }
        d
    }
}

impl LocalVerifier for DerandVerifier {
    fn rounds(&self) -> usize {
        self.plan.inner.verifier.rounds()
    }

    fn messages(&self, view: &NodeView<'_>, round: usize) -> Vec<Bits> {
        let Some(own) = self.own(view) else { return vec![Bits::new(); view.degree] };
        let draws = self.draws(&own, view.randomness.len());
        let inbox = self.inner_inbox(view.inbox);
        let inner = self.inner_view(view, &own, &draws, &inbox);
        let msgs = self.plan.inner.verifier.messages(&inner, round);
        if round > 0 {
            return msgs;
        }
        let mut head = Bits::from_uint(view.id, self.plan.tree.id_bits);
        for (a, t, r) in &own.heads {
            self.plan.tree.encode_into(t, &mut head);
            self.plan.encode_draw(*a, r, &mut head);
        }
        msgs.iter()
            .map(|m| {
                let mut b = head.clone();
                b.extend(m);
                b
            })
            .collect()
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let plan = &self.plan;
        let Some(own) = self.own(view) else { return false };
        let k = self.trailer_bits();
        let mut nbs: Vec<(u64, Vec<(TreeCert, Vec<u64>)>)> = Vec::with_capacity(view.degree);
        for m in &view.inbox[0] {
            if m.len() < k {
                return false;
            }
            let mut r = m.reader();
            let Some(id) = r.read_uint(plan.tree.id_bits) else { return false };
            let mut heads = Vec::new();
            for (a, _, _) in &own.heads {
                let (Some(t), Some(d)) = (plan.tree.decode(&mut r), plan.decode_draw(*a, &mut r)) else { return false };
                heads.push((t, d));
            }
            nbs.push((id, heads));
        }
        for (i, (a, tree, r)) in own.heads.iter().enumerate() {
            let tree_nbs: Vec<(u64, TreeCert)> = nbs.iter().map(|(id, h)| (*id, h[i].0)).collect();
            if !tree_verify_local(view.id, tree, &tree_nbs) || tree.root_id > view.id {
                return false;
            }
            if nbs.iter().any(|(_, h)| &h[i].1 != r) {
                return false;
            }
            if tree.parent_id.is_none() && view.randomness.get(*a).is_none_or(|own_draw| *own_draw != r.as_slice()) {
                return false;
            }
        }
        let draws = self.draws(&own, view.randomness.len());
        let inbox = self.inner_inbox(view.inbox);
        plan.inner.verifier.decide(&self.inner_view(view, &own, &draws, &inbox))
    }
}

pub struct Derandomized {
    pub spec: ProtocolSpec,
    /// Certificate bits added in each Merlin phase.
    pub overhead_bits: Vec<usize>,
    plan: Plan,
}

impl Derandomized {
    /// Honest in every respect except that the first certified string is
    /// shifted by one in its first coordinate, consistently at all nodes.
    pub fn tampered_prover(&self) -> Arc<dyn Prover> {
        Arc::new(DerandProver { plan: self.plan.clone(), tamper: true })
    }
}

/// Compiles a shared-randomness spec to one that uses only per-node draws.
pub fn derandomize_shared(spec: &ProtocolSpec, config: &NetworkConfig, mode: DerandMode) -> Result<Derandomized, EngineError> {
    if spec.randomness != RandomnessMode::Shared {
        return Err(EngineError::Protocol("input spec must use shared randomness".into()));
    }
    let ends_merlin = matches!(spec.schedule().last(), Some(Phase::Merlin));
    match (mode, ends_merlin) {
        (DerandMode::Am, false) => return Err(EngineError::Schedule("AM mode needs a spec ending with Merlin".into())),
        (DerandMode::Ma, true) => return Err(EngineError::Schedule("MA mode needs a spec ending with Arthur".into())),
        _ => {}
    }
    let mut schedule = Vec::new();
    let mut slots = Vec::new();
    let mut domains = Vec::new();
    let mut pending = None;
    let mut merlin = 0;
    for p in spec.schedule() {
        match p {
            Phase::Arthur(d) => {
                pending = Some(domains.len());
                domains.push(d.clone());
                schedule.push(Phase::Arthur(d.clone()));
            }
            Phase::Merlin => {
                slots.push(MerlinSlot { certifies: pending.take(), inner: Some(merlin) });
                merlin += 1;
                schedule.push(Phase::Merlin);
            }
        }
    }
    if let Some(a) = pending {
        slots.push(MerlinSlot { certifies: Some(a), inner: None });
        schedule.push(Phase::Merlin);
    }
    let plan = Plan { inner: spec.clone(), domains, slots, tree: TreeCodec::for_config(config) };
    let overhead_bits = plan.slots.iter().map(|s| plan.header_bits(s)).collect();
    let out = ProtocolSpec::new(
        format!("derand({})", spec.name),
        schedule,
        RandomnessMode::Distributed,
        Arc::new(DerandProver { plan: plan.clone(), tamper: false }),
        Arc::new(DerandVerifier { plan: plan.clone() }),
    )?
    .with_neighbor_ids(spec.neighbor_ids_visible);
    Ok(Derandomized { spec: out, overhead_bits, plan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{estimate, run_once};
    use crate::netconfig::{generate, GraphKind};
    use crate::protocols::triangle::{triangle_spec, TriangleInstance, TriangleVariant};
    use crate::transforms::coin_spec;

    fn triangle_c5() -> (NetworkConfig, ProtocolSpec) {
        let c = generate(&GraphKind::Cycle(5)).unwrap();
        let inst = Arc::new(TriangleInstance::with_defaults(c.clone(), 1).unwrap());
        (c, triangle_spec(inst, TriangleVariant::Shared).unwrap())
    }

    #[test]
    fn triangle_on_c5_stays_complete() {
        let (c, spec) = triangle_c5();
        let d = derandomize_shared(&spec, &c, DerandMode::Ma).unwrap();
        assert_eq!(d.spec.interactions(), 3);
        assert!(!d.spec.uses_shared_randomness());
        let r = estimate(&d.spec, &c, 300, 2).unwrap();
        assert_eq!(r.accepted, 300);
        let base = estimate(&spec, &c, 10, 2).unwrap();
        let tree = TreeCodec::for_config(&c).bits();
        assert_eq!(r.max_cert_bits, base.max_cert_bits.max(tree + spec.rho()));
        assert_eq!(d.overhead_bits, vec![0, tree + spec.rho()]);
    }

    #[test]
    fn tampered_string_rejected_by_root() {
        let (c, spec) = triangle_c5();
        let d = derandomize_shared(&spec, &c, DerandMode::Ma).unwrap();
        let bad = d.spec.with_prover(d.tampered_prover());
        for trial in 0..50 {
            let (ok, t) = run_once(&bad, &c, 9, trial).unwrap();
            assert!(!ok);
            assert!(!t.verdicts[c.index_of(0).unwrap()]);
        }
    }

    #[test]
    fn am_mode_keeps_phase_count() {
        let c = generate(&GraphKind::Path(4)).unwrap();
        let spec = coin_spec(3, 4).unwrap();
        let d = derandomize_shared(&spec, &c, DerandMode::Am).unwrap();
        assert_eq!(d.spec.interactions(), 2);
        let r = estimate(&d.spec, &c, 4000, 1).unwrap();
        assert!((r.accept_all_fraction - 0.75).abs() <= r.three_sigma());
        assert!(derandomize_shared(&spec, &c, DerandMode::Ma).is_err());
    }
}
