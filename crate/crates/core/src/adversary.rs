//! Cheating provers and exact small-instance oracles for measuring
//! soundness.

use std::sync::Arc;

use crate::algebra::{AlgebraError, FieldPoly};
use crate::bits::Bits;
use crate::engine::{best_prover_acceptance, Acceptance, CertSpace, EngineError, ProtocolSpec, Prover, ProverInput};
use crate::netconfig::NetworkConfig;
use crate::protocols::optval::{certs_for_solution, optimum, OptCert, OptError, OptInstance};
use crate::protocols::{TriangleInstance, TriangleVariant};

#[derive(Debug, thiserror::Error)]
pub enum AdversaryError {
    #[error("instance is a yes-instance; the honest prover already wins")]
    YesInstance,
    #[error("cheating offset must be nonzero")]
    ZeroDelta,
    #[error("exact acceptance does not fit in 128 bits")]
    Overflow,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Opt(#[from] OptError),
}

/// The polynomial of degree at most `2(B-1)` that vanishes on `1..=B` and
/// agrees with `target` on `points` (which must avoid `1..=B`, with
/// `|points| = B - 1`).
pub fn vanishing_interpolant(
    inst: &TriangleInstance,
    target: &FieldPoly,
    points: &[u64],
) -> Result<FieldPoly, AlgebraError> {
    let mut pts: Vec<(u64, u64)> = (1..=inst.rows).map(|i| (i, 0)).collect();
    pts.extend(points.iter().map(|&x| (x, target.evaluate(x))));
    FieldPoly::interpolate(inst.field, &pts)
}

/// Points `B+1 ..= 2B-1`, where the interpolation cheater forces agreement.
pub fn forced_points(inst: &TriangleInstance) -> Vec<u64> {
    (inst.rows + 1..2 * inst.rows).collect()
}

/// Cheating certificates for the triangle protocol: every target
/// polynomial that fails the zero check is replaced by its vanishing
/// interpolant through the forced points.
#[derive(Debug, Clone)]
pub struct InterpolationCheater {
    pub inst: Arc<TriangleInstance>,
    pub variant: TriangleVariant,
    /// `[node][k]`: one polynomial per node, or one per port for the
    /// one-round variant.
    pub polys: Vec<Vec<FieldPoly>>,
    /// The honest targets the polynomials are checked against.
    pub targets: Vec<Vec<FieldPoly>>,
}

pub fn interpolation_cheater(
    inst: Arc<TriangleInstance>,
    variant: TriangleVariant,
) -> Result<InterpolationCheater, AdversaryError> {
    let n = inst.config.n();
    let targets: Vec<Vec<FieldPoly>> = (0..n)
        .map(|u| match variant {
            TriangleVariant::Dist1Round => inst.config.neighbors(u).iter().map(|&v| inst.pair_poly(u, v)).collect(),
            _ => vec![inst.honest_cert(u)],
        })
        .collect();
    if targets.iter().flatten().all(|p| inst.vanishes_on_rows(p)) {
        return Err(AdversaryError::YesInstance);
    }
    let points = forced_points(&inst);
    let polys = targets
        .iter()
        .map(|ts| {
            ts.iter()
                .map(|p| if inst.vanishes_on_rows(p) { Ok(p.clone()) } else { vanishing_interpolant(&inst, p, &points) })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(InterpolationCheater { inst, variant, polys, targets })
}

impl InterpolationCheater {
    pub fn certs(&self) -> Vec<Bits> {
        let len = self.inst.cert_coeffs();
        self.polys.iter().map(|ps| Bits::concat(ps.iter().map(|p| p.encode(len)).collect::<Vec<_>>().iter())).collect()
    }

    pub fn prover(&self) -> Arc<dyn Prover> {
        let certs = self.certs();
        Arc::new(move |_: &ProverInput<'_>| certs.clone())
    }

    /// Points of `F_q` where the `k`-th polynomial of node `u` agrees with
    /// its target.
    pub fn agreement(&self, u: usize, k: usize) -> Vec<bool> {
        let (p, t) = (&self.polys[u][k], &self.targets[u][k]);
        (0..self.inst.field.modulus()).map(|x| p.evaluate(x) == t.evaluate(x)).collect()
    }

    /// Exact acceptance probability. With a shared point every check uses
    /// the same `x`; in the two-round variant node `u`'s checks use its own
    /// point; in the one-round variant the checks on edges into `v` use
    /// `v`'s point. Independent points multiply.
    pub fn exact_acceptance(&self) -> Result<Acceptance, AdversaryError> {
        let q = self.inst.field.modulus() as usize;
        let config = &self.inst.config;
        let n = config.n();
        // Groups of (node, k) checks sharing one random point.
        let groups: Vec<Vec<(usize, usize)>> = match self.variant {
            TriangleVariant::Shared => vec![(0..n).map(|u| (u, 0)).collect()],
            TriangleVariant::Dist2Round => (0..n).map(|u| vec![(u, 0)]).collect(),
            TriangleVariant::Dist1Round => (0..n)
                .map(|v| config.neighbors(v).iter().map(|&u| (u, config.port_of(u, v).expect("edge"))).collect())
                .collect(),
        };
        let mut acc = Acceptance { accepting: 1, total: 1 };
        for g in groups {
            let tables: Vec<Vec<bool>> = g.iter().map(|&(u, k)| self.agreement(u, k)).collect();
            let good = (0..q).filter(|&x| tables.iter().all(|t| t[x])).count() as u128;
            acc.accepting = acc.accepting.checked_mul(good).ok_or(AdversaryError::Overflow)?;
            acc.total = acc.total.checked_mul(q as u128).ok_or(AdversaryError::Overflow)?;
        }
        Ok(acc)
    }
}

/// Per node, the vanishing interpolants through every `(B-1)`-subset of
/// `candidates`, deduplicated. Covers the interpolation cheater when the
/// candidates include the forced points. Shared and two-round variants.
pub fn triangle_restricted_alphabet(inst: &TriangleInstance, candidates: &[u64]) -> Result<CertSpace, AdversaryError> {
    let k = inst.rows as usize - 1;
    let subsets = subsets_of_size(candidates, k);
    let mut alphabets = Vec::with_capacity(inst.config.n());
    for u in 0..inst.config.n() {
        let target = inst.honest_cert(u);
        let mut alpha: Vec<Bits> = Vec::new();
        for s in &subsets {
            let b = vanishing_interpolant(inst, &target, s)?.encode(inst.cert_coeffs());
            if !alpha.contains(&b) {
                alpha.push(b);
            }
        }
        alphabets.push(alpha);
    }
    Ok(CertSpace::PerNode(alphabets))
}

fn subsets_of_size(items: &[u64], k: usize) -> Vec<Vec<u64>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in subsets_of_size(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// A prover that is honest except at the root, whose subtree sum is
/// shifted by `delta`.
#[derive(Clone)]
pub struct ForgedSum {
    pub prover: Arc<dyn Prover>,
    pub certs: Vec<OptCert>,
    /// False when the shift was refused and the prover is honest.
    pub forged: bool,
}

/// Shifts the root's claimed sum by `delta` on top of an optimal solution,
/// so only the root's SumZero test sees `-delta`. Refuses (returns the
/// honest prover) on yes-instances, and when the shifted sum would be
/// negative, unencodable, or still miss the threshold.
pub fn forge_sum_cheater(inst: &OptInstance, delta: i64) -> Result<ForgedSum, AdversaryError> {
    if delta == 0 {
        return Err(AdversaryError::ZeroDelta);
    }
    let (value, x) = optimum(&inst.config, inst.problem, &inst.weights)?;
    let mut certs = certs_for_solution(inst, &x);
    let codec = inst.codec();
    let root = certs.iter().position(|c| c.tree.parent_id.is_none()).expect("tree has a root");
    let shifted = value as i64 + delta;
    let forged = !inst.meets_threshold(value)
        && shifted >= 0
        && (shifted as u64) < (1u64 << codec.sum_bits)
        && inst.meets_threshold(shifted as u64);
    if forged {
        certs[root].sum = shifted as u64;
    }
    let prover = crate::protocols::optval::fixed_optval_prover(codec, certs.clone());
    Ok(ForgedSum { prover, certs, forged })
}

/// Joint certificate assignments for an exhaustive OptVal prover: every
/// admissible marking, the min-id BFS tree, and every vector of subtree
/// sums in `0..=max_sum` whose root entry meets the threshold. Other
/// markings or root sums are rejected with certainty.
pub fn optval_alphabet(inst: &OptInstance, max_sum: u64, limit: usize) -> Result<CertSpace, AdversaryError> {
    let config = &inst.config;
    let n = config.n();
    let codec = inst.codec();
    let max_sum = max_sum.min((1u64 << codec.sum_bits) - 1);
    let root_sums: Vec<u64> = (0..=max_sum).filter(|&s| inst.meets_threshold(s)).collect();
    let markings: Vec<Vec<bool>> = (0..1u64 << n)
        .map(|m| (0..n).map(|v| m >> v & 1 == 1).collect::<Vec<bool>>())
        .filter(|x| inst.problem.admissible(config, x))
        .collect();
    let size = (markings.len() as u128) * (root_sums.len() as u128) * u128::from(max_sum + 1).pow(n as u32 - 1);
    if size > limit as u128 {
        return Err(EngineError::GuardExceeded { needed: size, limit: limit as u128 }.into());
    }
    let mut list = Vec::with_capacity(size as usize);
    for x in &markings {
        let base = certs_for_solution(inst, x);
        let root = base.iter().position(|c| c.tree.parent_id.is_none()).expect("tree has a root");
        let others: Vec<usize> = (0..n).filter(|&v| v != root).collect();
        for &rs in &root_sums {
            let mut sums = vec![0u64; n];
            sums[root] = rs;
            loop {
                list.push(
                    base.iter().enumerate().map(|(v, c)| codec.encode(&OptCert { sum: sums[v], ..*c })).collect(),
                );
                // Odometer over the non-root sums.
                let Some(i) = others.iter().position(|&v| sums[v] < max_sum) else { break };
                for &v in &others[..i] {
                    sums[v] = 0;
                }
                sums[others[i]] += 1;
            }
        }
    }
    Ok(CertSpace::Joint(list))
}

/// Optimal acceptance over `spaces` (one per Merlin phase), by exhaustive
/// enumeration.
pub fn exhaustive_prover(
    spec: &ProtocolSpec,
    config: &NetworkConfig,
    spaces: &[CertSpace],
) -> Result<Acceptance, AdversaryError> {
    Ok(best_prover_acceptance(spec, config, spaces)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{estimate, exact_acceptance, three_sigma};
    use crate::netconfig::{generate, GraphKind};
    use crate::pls::cycle::cycle_lcp_spec;
    use crate::pls::even_parity;
    use crate::protocols::optval::{optval_spec, Problem};
    use crate::protocols::triangle_spec;
    use crate::transforms::toy_dmam;

    fn tri(kind: GraphKind) -> Arc<TriangleInstance> {
        Arc::new(TriangleInstance::with_defaults(generate(&kind).unwrap(), 1).unwrap())
    }

    #[test]
    fn cheater_passes_zero_check_and_forced_points() {
        let t = tri(GraphKind::Complete(4));
        let ch = interpolation_cheater(t.clone(), TriangleVariant::Shared).unwrap();
        for u in 0..4 {
            let p = &ch.polys[u][0];
            assert!(t.vanishes_on_rows(p));
            assert!(p.degree().is_none_or(|d| d <= 2 * (t.rows as usize - 1)));
            let agree = ch.agreement(u, 0).iter().filter(|&&a| a).count();
            assert!(agree >= t.rows as usize - 1);
        }
        assert!(matches!(
            interpolation_cheater(tri(GraphKind::Cycle(5)), TriangleVariant::Shared),
            Err(AdversaryError::YesInstance)
        ));
    }

    #[test]
    fn oracle_matches_engine_enumeration() {
        let t = tri(GraphKind::Complete(3));
        for variant in [TriangleVariant::Shared, TriangleVariant::Dist2Round, TriangleVariant::Dist1Round] {
            let ch = interpolation_cheater(t.clone(), variant).unwrap();
            let spec = triangle_spec(t.clone(), variant).unwrap().with_prover(ch.prover());
            let engine = exact_acceptance(&spec, &t.config).unwrap();
            let oracle = ch.exact_acceptance().unwrap();
            assert_eq!(engine.value(), oracle.value(), "{variant}");
        }
    }

    #[test]
    fn k3_monte_carlo_within_bound() {
        let t = tri(GraphKind::Complete(3));
        let ch = interpolation_cheater(t.clone(), TriangleVariant::Shared).unwrap();
        let spec = triangle_spec(t.clone(), TriangleVariant::Shared).unwrap().with_prover(ch.prover());
        let r = estimate(&spec, &t.config, 5000, 3).unwrap();
        let p = ch.exact_acceptance().unwrap().value();
        assert!((r.accept_all_fraction - p).abs() <= three_sigma(p, 5000) + 1e-12);
        assert!(p <= t.soundness_bound());
    }

    #[test]
    fn restricted_search_matches_cheater() {
        let t = tri(GraphKind::Complete(3));
        assert_eq!(t.field.modulus(), 37);
        let ch = interpolation_cheater(t.clone(), TriangleVariant::Shared).unwrap();
        let spec = triangle_spec(t.clone(), TriangleVariant::Shared).unwrap();
        let space = triangle_restricted_alphabet(&t, &(4..=9).collect::<Vec<_>>()).unwrap();
        let best = exhaustive_prover(&spec, &t.config, &[space]).unwrap();
        assert_eq!(best, ch.exact_acceptance().unwrap());
    }

    #[test]
    fn forged_sum_divisor_count() {
        // C5 has maximum independent set 2; claiming 8 needs a shift of 6.
        let c = generate(&GraphKind::Cycle(5)).unwrap();
        let inst = OptInstance::unit(c.clone(), Problem::Mis, 8)
            .unwrap()
            .with_exchange(crate::pls::tree::TreeExchange::Plain)
            .with_sumzero(crate::commprims::SumZeroTest::with_pool_size(5 * 125, 3, 10));
        let f = forge_sum_cheater(&inst, 6).unwrap();
        assert!(f.forged);
        let spec = optval_spec(&inst).unwrap().with_prover(f.prover);
        assert_eq!(exact_acceptance(&spec, &c).unwrap(), Acceptance { accepting: 2, total: 10 });
        // A shift that leaves the verdict unchanged is refused.
        assert!(!forge_sum_cheater(&inst, 1).unwrap().forged);
        assert!(!forge_sum_cheater(&inst.clone().with_threshold(2), 6).unwrap().forged);
        assert!(matches!(forge_sum_cheater(&inst, 0), Err(AdversaryError::ZeroDelta)));
    }

    #[test]
    fn deterministic_and_toy_optima() {
        let c4 = generate(&GraphKind::Cycle(4)).unwrap();
        let c4 = c4.with_labels(["1", "0", "0", "0"].iter().map(|b| b.parse().unwrap()).collect()).unwrap();
        let spec = cycle_lcp_spec(&c4, even_parity()).unwrap();
        let a = exhaustive_prover(&spec, &c4, &[CertSpace::all_strings(4, 4)]).unwrap();
        assert_eq!(a.accepting, 0);

        let p2 = generate(&GraphKind::Path(2)).unwrap().with_labels(vec!["0".parse().unwrap(), "1".parse().unwrap()]).unwrap();
        let spec = toy_dmam().to_spec().unwrap();
        let s = CertSpace::all_strings(1, 2);
        assert_eq!(exhaustive_prover(&spec, &p2, &[s.clone(), s]).unwrap().value(), 0.5);
    }

    #[test]
    fn optval_exhaustive_on_path() {
        // P4 has domination number 2; threshold 1 is a no-instance.
        let c = generate(&GraphKind::Path(4)).unwrap();
        let inst = OptInstance::with_weight_bound(c.clone(), Problem::Mds, vec![1; 4], 1, 1).unwrap().tiny();
        let spec = optval_spec(&inst).unwrap();
        let space = optval_alphabet(&inst, 4, 1_000_000).unwrap();
        let best = exhaustive_prover(&spec, &c, &[space]).unwrap();
        assert!(best.cmp_ratio(1, 3).is_le(), "{best}");
    }
}
