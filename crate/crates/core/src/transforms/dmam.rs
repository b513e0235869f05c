//! Merlin-Arthur-Merlin to Arthur-Merlin by parallel repetition. Arthur
//! draws `K` strings up front; Merlin answers with one first-round
//! certificate and `K` second-round certificates per node; a node accepts
//! iff all `K` simulated runs accept. With `K = nσ` a union bound over the
//! `2^{nσ}` first-round assignments keeps soundness.

use std::sync::Arc;

use super::slices;
use crate::bits::Bits;
use crate::engine::{
    EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, Prover, ProverInput, RandomDomain, RandomnessMode,
};
use crate::netconfig::NetworkConfig;

/// First-round prover: sees the configuration and any leading Arthur draws.
pub type FirstProver = Arc<dyn Fn(&NetworkConfig, &[Vec<Vec<u64>>]) -> Vec<Bits> + Send + Sync>;
/// Second-round prover: sees the first-round certificates and all draws.
pub type SecondProver = Arc<dyn Fn(&NetworkConfig, &[Bits], &[Vec<Vec<u64>>]) -> Vec<Bits> + Send + Sync>;

/// A `[Merlin, Arthur, Merlin]` protocol (optionally preceded by one more
/// Arthur phase) with exactly `sigma`-bit certificates and `gamma`-bit
/// messages.
#[derive(Clone)]
pub struct DmamDescription {
    pub name: String,
    pub sigma: usize,
    pub gamma: usize,
    pub domain: RandomDomain,
    /// Arthur phase before the first Merlin phase, if any.
    pub leading: Option<RandomDomain>,
    pub randomness: RandomnessMode,
    pub one_sided: bool,
    pub neighbor_ids_visible: bool,
    pub prover1: FirstProver,
    pub prover2: SecondProver,
    /// Sees certificates `[y1, y2]` and randomness `[r]` (or `[r0, r]`).
    pub verifier: Arc<dyn LocalVerifier>,
}

impl DmamDescription {
    /// The protocol itself, uncompiled.
    pub fn to_spec(&self) -> Result<ProtocolSpec, EngineError> {
        let mut schedule = Vec::new();
        if let Some(d) = &self.leading {
            schedule.push(Phase::Arthur(d.clone()));
        }
        schedule.extend([Phase::Merlin, Phase::Arthur(self.domain.clone()), Phase::Merlin]);
        let lead = usize::from(self.leading.is_some());
        let (p1, p2) = (self.prover1.clone(), self.prover2.clone());
        let prover = Arc::new(move |input: &ProverInput<'_>| match input.merlin_index {
            0 => p1(input.config, &input.randomness[..lead]),
            _ => p2(input.config, &input.certificates[0], input.randomness),
        });
        let spec = ProtocolSpec::new(self.name.clone(), schedule, self.randomness, prover, self.verifier.clone())?;
        Ok(spec.with_neighbor_ids(self.neighbor_ids_visible))
    }
}

#[derive(Clone)]
struct Plan {
    desc: DmamDescription,
    repetitions: usize,
    lead_width: usize,
    width: usize,
}

impl Plan {
    /// Leading draw and the `K` repetition draws of one node.
    fn split_draw<'a>(&self, draw: &'a [u64]) -> (&'a [u64], Vec<&'a [u64]>) {
        let (lead, rest) = draw.split_at(self.lead_width.min(draw.len()));
        (lead, slices(rest, self.width, self.repetitions))
    }

    fn split_cert(&self, cert: &Bits) -> Option<Vec<Bits>> {
        let s = self.desc.sigma;
        if cert.len() != (self.repetitions + 1) * s {
            return None;
        }
        let mut r = cert.reader();
        (0..=self.repetitions).map(|_| r.read_bits(s)).collect()
    }
}

struct CompiledProver {
    plan: Plan,
}

impl Prover for CompiledProver {
    fn certify(&self, input: &ProverInput<'_>) -> Vec<Bits> {
        let plan = &self.plan;
        let n = input.config.n();
        let per_node: Vec<_> = input.randomness[0].iter().map(|d| plan.split_draw(d)).collect();
        let lead: Vec<Vec<Vec<u64>>> = if plan.desc.leading.is_some() {
            vec![per_node.iter().map(|(l, _)| l.to_vec()).collect()]
        } else {
            Vec::new()
        };
        let y1 = (plan.desc.prover1)(input.config, &lead);
        let mut out: Vec<Bits> = y1.clone();
        for i in 0..plan.repetitions {
            let mut rand = lead.clone();
            rand.push(per_node.iter().map(|(_, r)| r[i].to_vec()).collect());
            let y2 = (plan.desc.prover2)(input.config, &y1, &rand);
            for v in 0..n {
                out[v].extend(&y2[v]);
            }
        }
        out
    }
}

struct CompiledVerifier {
    plan: Plan,
}

impl CompiledVerifier {
    fn inner_view<'a>(
        &self,
        view: &NodeView<'a>,
        certs: &'a [Bits],
        lead: &'a [u64],
        r: &'a [u64],
        i: usize,
        inbox: &'a [Vec<Bits>],
    ) -> NodeView<'a> {
        let mut randomness = Vec::new();
        if self.plan.desc.leading.is_some() {
            randomness.push(lead);
        }
        randomness.push(r);
        NodeView {
            id: view.id,
            label: view.label,
            degree: view.degree,
            neighbor_ids: view.neighbor_ids,
            randomness,
            certificates: vec![&certs[0], &certs[i + 1]],
            inbox,
        }
    }

    /// `[repetition][round][port]` slices of the received messages.
    fn split_inbox(&self, inbox: &[Vec<Bits>]) -> Vec<Vec<Vec<Bits>>> {
        let g = self.plan.desc.gamma;
        (0..self.plan.repetitions)
            .map(|i| {
                inbox
                    .iter()
                    .map(|msgs| {
                        msgs.iter()
                            .map(|m| Bits::from_bools(m.as_slice().get(i * g..(i + 1) * g).unwrap_or(&[]).to_vec()))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

impl LocalVerifier for CompiledVerifier {
    fn rounds(&self) -> usize {
        self.plan.desc.verifier.rounds()
    }

    fn messages(&self, view: &NodeView<'_>, round: usize) -> Vec<Bits> {
        let plan = &self.plan;
        let g = plan.desc.gamma;
        let certs = plan
            .split_cert(view.certificates[0])
            .unwrap_or_else(|| vec![Bits::from_uint(0, plan.desc.sigma); plan.repetitions + 1]);
        let (lead, rs) = plan.split_draw(view.randomness[0]);
        let inboxes = self.split_inbox(view.inbox);
        let mut out = vec![Bits::new(); view.degree];
        for i in 0..plan.repetitions {
            let inner = self.inner_view(view, &certs, lead, rs[i], i, &inboxes[i]);
            let msgs = plan.desc.verifier.messages(&inner, round);
            for (o, m) in out.iter_mut().zip(&msgs) {
                assert_eq!(m.len(), g, "description promised {g}-bit messages");
                o.extend(m);
            }
        }
        out
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let plan = &self.plan;
        let Some(certs) = plan.split_cert(view.certificates[0]) else { return false };
        let (lead, rs) = plan.split_draw(view.randomness[0]);
        let inboxes = self.split_inbox(view.inbox);
        (0..plan.repetitions).all(|i| {
            let inner = self.inner_view(view, &certs, lead, rs[i], i, &inboxes[i]);
            plan.desc.verifier.decide(&inner)
        })
    }
}

/// `[Arthur, Merlin]` spec running `repetitions` copies (default `nσ`).
/// Certificates are `(K + 1)·σ` bits: `y1`, then `y2` for each copy.
pub fn compile_dmam_to_dam(
    desc: &DmamDescription,
    n: usize,
    repetitions: Option<usize>,
) -> Result<ProtocolSpec, EngineError> {
    if !desc.one_sided {
        return Err(EngineError::Protocol("only one-sided descriptions can be compiled".into()));
    }
    let k = repetitions.unwrap_or(n * desc.sigma).max(1);
    let mut parts = Vec::new();
    if let Some(d) = &desc.leading {
        parts.push(d.clone());
    }
    parts.extend(std::iter::repeat_n(desc.domain.clone(), k));
    let domain = RandomDomain::concat(&parts);
    if domain.outcomes() == 0 {
        return Err(EngineError::GuardExceeded { needed: u128::MAX, limit: u128::MAX });
    }
    let plan = Plan {
        desc: desc.clone(),
        repetitions: k,
        lead_width: desc.leading.as_ref().map_or(0, |d| d.moduli().len()),
        width: desc.domain.moduli().len(),
    };
    let spec = ProtocolSpec::new(
        format!("dam({})", desc.name),
        vec![Phase::Arthur(domain), Phase::Merlin],
        desc.randomness,
        Arc::new(CompiledProver { plan: plan.clone() }),
        Arc::new(CompiledVerifier { plan }),
    )?;
    Ok(spec.with_neighbor_ids(desc.neighbor_ids_visible))
}

/// The same compiler for descriptions with a leading Arthur phase; that
/// phase's draw is folded into the single compiled Arthur phase.
pub fn compile_damam_to_dam(
    desc: &DmamDescription,
    n: usize,
    repetitions: Option<usize>,
) -> Result<ProtocolSpec, EngineError> {
    if desc.leading.is_none() {
        return Err(EngineError::Schedule("description has no leading Arthur phase".into()));
    }
    compile_dmam_to_dam(desc, n, repetitions)
}

struct ToyVerifier;

impl LocalVerifier for ToyVerifier {
    fn messages(&self, view: &NodeView<'_>, _round: usize) -> Vec<Bits> {
        vec![view.certificates[0].clone(); view.degree]
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let (y1, y2) = (view.certificates[0], view.certificates[1]);
        if y1.len() != 1 || y2.len() != 1 || view.label.len() != 1 {
            return false;
        }
        if view.inbox[0].iter().any(|m| m != y1) {
            return false;
        }
        let inconsistent = view.label.get(0) != y1.get(0);
        let r = view.randomness.last().expect("one Arthur phase")[0] == 1;
        let echo = y2.get(0) == Some(r ^ inconsistent);
        // An inconsistent node survives only on a zero coin.
        echo && (!inconsistent || !r)
    }
}

/// Fixture for the language "all 1-bit labels are equal". Merlin first
/// claims the common bit `b`; Arthur draws one bit `r(v)` per node; Merlin
/// then echoes `r(v) XOR [label(v) != b]`. Nodes check the echo and that
/// neighbors agree on `b`; a node whose label differs from `b` accepts
/// only when `r(v) = 0`.
pub fn toy_dmam() -> DmamDescription {
    let prover1: FirstProver = Arc::new(|config: &NetworkConfig, _: &[Vec<Vec<u64>>]| {
        let b = config.label(0).get(0).unwrap_or(false);
        vec![Bits::from_bools(vec![b]); config.n()]
    });
    let prover2: SecondProver = Arc::new(|config: &NetworkConfig, y1: &[Bits], rand: &[Vec<Vec<u64>>]| {
        let r = rand.last().expect("one Arthur phase");
        (0..config.n())
            .map(|v| {
                let inconsistent = config.label(v).get(0) != y1[v].get(0);
                Bits::from_bools(vec![(r[v][0] == 1) ^ inconsistent])
            })
            .collect()
    });
    DmamDescription {
        name: "toy-dmam".into(),
        sigma: 1,
        gamma: 1,
        domain: RandomDomain::bits(1),
        leading: None,
        randomness: RandomnessMode::Distributed,
        one_sided: true,
        neighbor_ids_visible: false,
        prover1,
        prover2,
        verifier: Arc::new(ToyVerifier),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{best_prover_acceptance, estimate, CertSpace};
    use crate::netconfig::{generate, GraphKind};

    fn two_nodes(a: &str, b: &str) -> NetworkConfig {
        let c = generate(&GraphKind::Path(2)).unwrap();
        c.with_labels(vec![a.parse().unwrap(), b.parse().unwrap()]).unwrap()
    }

    #[test]
    fn toy_optimum_is_one_half() {
        let c = two_nodes("0", "1");
        let spec = toy_dmam().to_spec().unwrap();
        let space = CertSpace::all_strings(1, 2);
        let a = best_prover_acceptance(&spec, &c, &[space.clone(), space]).unwrap();
        assert_eq!((a.accepting, a.total), (2, 4));
    }

    #[test]
    fn compiled_shape_and_completeness() {
        let yes = two_nodes("1", "1");
        let spec = compile_dmam_to_dam(&toy_dmam(), 2, None).unwrap();
        assert_eq!(spec.interactions(), 2);
        assert!(!spec.verifier_randomized());
        let r = estimate(&spec, &yes, 200, 0).unwrap();
        assert_eq!(r.accepted, 200);
        assert_eq!(r.max_cert_bits, 3);
    }

    #[test]
    fn compiled_optimum_matches_oracle() {
        // The prover picks b after seeing all coins, so it wins iff one of
        // the two nodes drew only zeros: 2·2^-K - 4^-K.
        let no = two_nodes("0", "1");
        for k in [2usize, 4] {
            let spec = compile_dmam_to_dam(&toy_dmam(), 2, Some(k)).unwrap();
            let a = best_prover_acceptance(&spec, &no, &[CertSpace::all_strings(k + 1, 2)]).unwrap();
            let total = 1u128 << (2 * k);
            assert_eq!(a.total, total);
            assert_eq!(a.accepting, 2 * (1u128 << k) - 1);
        }
    }

    #[test]
    fn two_sided_refused() {
        let mut d = toy_dmam();
        d.one_sided = false;
        assert!(compile_dmam_to_dam(&d, 2, None).is_err());
        assert!(compile_damam_to_dam(&toy_dmam(), 2, None).is_err());
    }
}
