//! Exact acceptance probabilities by full enumeration of Arthur's coins and,
//! for the optimal prover, of Merlin's certificate choices.

use std::cmp::Ordering;
use std::fmt;

use super::run::{ask_prover, evaluate};
use super::{EngineError, Phase, ProtocolSpec, RandomDomain, RandomnessMode};
use crate::bits::Bits;
use crate::netconfig::NetworkConfig;

/// Maximum number of verifier evaluations an enumeration may need.
pub const LEAF_GUARD: u128 = 10_000_000;

/// An exact probability `accepting / total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Acceptance {
    pub accepting: u128,
    pub total: u128,
}

impl Acceptance {
    pub fn value(&self) -> f64 {
        self.accepting as f64 / self.total as f64
    }

    /// Compares against the fraction `num / den` without rounding.
    pub fn cmp_ratio(&self, num: u128, den: u128) -> Ordering {
        (self.accepting * den).cmp(&(num * self.total))
    }
}

impl fmt::Display for Acceptance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.accepting, self.total)
    }
}

/// The certificates a prover may choose from in one Merlin phase.
#[derive(Debug, Clone)]
pub enum CertSpace {
    /// Independent alphabet per node; assignments are the product.
    PerNode(Vec<Vec<Bits>>),
    /// An explicit list of full assignments.
    Joint(Vec<Vec<Bits>>),
}

impl CertSpace {
    /// The same alphabet at every one of `n` nodes.
    pub fn uniform(alphabet: Vec<Bits>, n: usize) -> Self {
        CertSpace::PerNode(vec![alphabet; n])
    }

    /// All bit strings of length `len` at each of `n` nodes.
    pub fn all_strings(len: usize, n: usize) -> Self {
        let alphabet = (0..1u64 << len).map(|v| Bits::from_uint(v, len)).collect();
        Self::uniform(alphabet, n)
    }

    pub fn size(&self) -> u128 {
        match self {
            CertSpace::PerNode(a) => a.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128)),
            CertSpace::Joint(list) => list.len() as u128,
        }
    }

    fn nth(&self, mut index: u128) -> Vec<Bits> {
        match self {
            CertSpace::PerNode(alphabets) => {
                let mut out = vec![Bits::new(); alphabets.len()];
                for (slot, alpha) in out.iter_mut().zip(alphabets).rev() {
                    let k = alpha.len() as u128;
                    *slot = alpha[(index % k) as usize].clone();
                    index /= k;
                }
                out
            }
            CertSpace::Joint(list) => list[index as usize].clone(),
        }
    }
}

fn phase_outcomes(domain: &RandomDomain, mode: RandomnessMode, n: usize) -> u128 {
    match mode {
        RandomnessMode::Shared => domain.outcomes(),
        RandomnessMode::Distributed => {
            (0..n).fold(1u128, |acc, _| acc.saturating_mul(domain.outcomes()))
        }
    }
}

fn nth_phase(domain: &RandomDomain, mode: RandomnessMode, n: usize, mut index: u128) -> Vec<Vec<u64>> {
    match mode {
        RandomnessMode::Shared => vec![domain.nth(index); n],
        RandomnessMode::Distributed => {
            let k = domain.outcomes();
            let mut out = vec![Vec::new(); n];
            for slot in out.iter_mut().rev() {
                *slot = domain.nth(index % k);
                index /= k;
            }
            out
        }
    }
}

struct Enumerator<'a> {
    spec: &'a ProtocolSpec,
    config: &'a NetworkConfig,
    spaces: Option<&'a [CertSpace]>,
    /// Number of coin outcomes from phase `i` to the end.
    remaining: Vec<u128>,
}

impl Enumerator<'_> {
    fn rec(
        &self,
        phase: usize,
        randomness: &mut Vec<Vec<Vec<u64>>>,
        certs: &mut Vec<Vec<Bits>>,
    ) -> Result<u128, EngineError> {
        let schedule = self.spec.schedule();
        if phase == schedule.len() {
            let e = evaluate(self.spec, self.config, randomness, certs)?;
            return Ok(e.accepted() as u128);
        }
        match &schedule[phase] {
            Phase::Arthur(d) => {
                let n = self.config.n();
                let mut sum = 0;
                for i in 0..phase_outcomes(d, self.spec.randomness, n) {
                    randomness.push(nth_phase(d, self.spec.randomness, n, i));
                    sum += self.rec(phase + 1, randomness, certs)?;
                    randomness.pop();
                }
                Ok(sum)
            }
            Phase::Merlin => match self.spaces {
                None => {
                    certs.push(ask_prover(self.spec, self.config, randomness, certs)?);
                    let r = self.rec(phase + 1, randomness, certs);
                    certs.pop();
                    r
                }
                Some(spaces) => {
                    let space = &spaces[certs.len()];
                    let ceiling = self.remaining[phase + 1];
                    let mut best = 0;
                    for i in 0..space.size() {
                        certs.push(space.nth(i));
                        let r = self.rec(phase + 1, randomness, certs);
                        certs.pop();
                        best = best.max(r?);
                        if best == ceiling {
                            break;
                        }
                    }
                    Ok(best)
                }
            },
        }
    }
}

fn enumerate(
    spec: &ProtocolSpec,
    config: &NetworkConfig,
    spaces: Option<&[CertSpace]>,
) -> Result<Acceptance, EngineError> {
    config.validate()?;
    let n = config.n();
    let schedule = spec.schedule();
    if let Some(s) = spaces {
        if s.len() != spec.merlin_phases() {
            return Err(EngineError::Schedule(format!(
                "{} certificate spaces for {} Merlin phases",
                s.len(),
                spec.merlin_phases()
            )));
        }
    }
    let mut remaining = vec![1u128; schedule.len() + 1];
    let mut leaves = 1u128;
    let mut merlin = 0;
    for (i, phase) in schedule.iter().enumerate().rev() {
        remaining[i] = remaining[i + 1];
        if let Phase::Arthur(d) = phase {
            remaining[i] = remaining[i].saturating_mul(phase_outcomes(d, spec.randomness, n));
        }
    }
    leaves = leaves.saturating_mul(remaining[0]);
    for phase in schedule {
        if phase.is_merlin() {
            if let Some(s) = spaces {
                leaves = leaves.saturating_mul(s[merlin].size());
            }
            merlin += 1;
        }
    }
    if leaves > LEAF_GUARD {
        return Err(EngineError::GuardExceeded { needed: leaves, limit: LEAF_GUARD });
    }
    let e = Enumerator { spec, config, spaces, remaining };
    let accepting = e.rec(0, &mut Vec::new(), &mut Vec::new())?;
    Ok(Acceptance { accepting, total: e.remaining[0] })
}

/// Acceptance probability of the optimal prover restricted to `spaces`
/// (one per Merlin phase). Each Merlin choice may depend on all coins
/// drawn before it, so the value is computed by backward induction:
/// maximum over Merlin's choices, average over Arthur's coins.
pub fn best_prover_acceptance(
    spec: &ProtocolSpec,
    config: &NetworkConfig,
    spaces: &[CertSpace],
) -> Result<Acceptance, EngineError> {
    enumerate(spec, config, Some(spaces))
}

/// Exact acceptance probability of `spec`'s own prover.
pub fn exact_acceptance(spec: &ProtocolSpec, config: &NetworkConfig) -> Result<Acceptance, EngineError> {
    enumerate(spec, config, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{empty_prover, estimate, LocalVerifier, NodeView, ProverInput};
    use crate::netconfig::{generate, GraphKind};
    use std::sync::Arc;

    struct Never;
    impl LocalVerifier for Never {
        fn messages(&self, view: &NodeView<'_>, _: usize) -> Vec<Bits> {
            vec![Bits::new(); view.degree]
        }
        fn decide(&self, _: &NodeView<'_>) -> bool {
            false
        }
    }

    /// Accepts iff the 1-bit certificate equals the 1-bit label.
    struct CopyLabel;
    impl LocalVerifier for CopyLabel {
        fn messages(&self, view: &NodeView<'_>, _: usize) -> Vec<Bits> {
            vec![Bits::new(); view.degree]
        }
        fn decide(&self, view: &NodeView<'_>) -> bool {
            view.certificates[0] == view.label
        }
    }

    /// Merlin commits to a bit per node, then a shared coin is tossed;
    /// accepts iff every committed bit equals the coin.
    struct GuessCoin;
    impl LocalVerifier for GuessCoin {
        fn messages(&self, view: &NodeView<'_>, _: usize) -> Vec<Bits> {
            vec![Bits::new(); view.degree]
        }
        fn decide(&self, view: &NodeView<'_>) -> bool {
            view.certificates[0].to_uint() == Some(view.randomness[0][0])
        }
    }

    #[test]
    fn impossible_acceptance_is_zero() {
        let spec = ProtocolSpec::new("never", vec![Phase::Merlin], RandomnessMode::Shared, empty_prover(), Arc::new(Never)).unwrap();
        let c = generate(&GraphKind::Path(3)).unwrap();
        let a = best_prover_acceptance(&spec, &c, &[CertSpace::all_strings(1, 3)]).unwrap();
        assert_eq!(a.accepting, 0);
    }

    #[test]
    fn copying_prover_is_optimal() {
        let c = generate(&GraphKind::Cycle(4)).unwrap();
        let labels = ["1", "0", "0", "1"].iter().map(|s| s.parse().unwrap()).collect();
        let c = c.with_labels(labels).unwrap();
        let spec = ProtocolSpec::new("copy", vec![Phase::Merlin], RandomnessMode::Shared, empty_prover(), Arc::new(CopyLabel)).unwrap();
        let a = best_prover_acceptance(&spec, &c, &[CertSpace::all_strings(1, 4)]).unwrap();
        assert_eq!(a, Acceptance { accepting: 1, total: 1 });
    }

    #[test]
    fn merlin_cannot_see_later_coins() {
        let c = generate(&GraphKind::Path(2)).unwrap();
        let coin = Phase::Arthur(RandomDomain::bits(1));
        let ma = ProtocolSpec::new("ma", vec![Phase::Merlin, coin.clone()], RandomnessMode::Shared, empty_prover(), Arc::new(GuessCoin)).unwrap();
        let a = best_prover_acceptance(&ma, &c, &[CertSpace::all_strings(1, 2)]).unwrap();
        assert_eq!(a, Acceptance { accepting: 1, total: 2 });
        let am = ProtocolSpec::new("am", vec![coin, Phase::Merlin], RandomnessMode::Shared, empty_prover(), Arc::new(GuessCoin)).unwrap();
        let a = best_prover_acceptance(&am, &c, &[CertSpace::all_strings(1, 2)]).unwrap();
        assert_eq!(a, Acceptance { accepting: 2, total: 2 });
    }

    #[test]
    fn best_prover_dominates_fixed_prover() {
        let c = generate(&GraphKind::Path(3)).unwrap();
        let zeros = Arc::new(|i: &ProverInput<'_>| vec![Bits::from_uint(0, 1); i.config.n()]);
        let spec = ProtocolSpec::new(
            "ma",
            vec![Phase::Merlin, Phase::Arthur(RandomDomain::bits(1))],
            RandomnessMode::Distributed,
            zeros,
            Arc::new(GuessCoin),
        )
        .unwrap();
        let fixed = exact_acceptance(&spec, &c).unwrap();
        assert_eq!(fixed, Acceptance { accepting: 1, total: 8 });
        let best = best_prover_acceptance(&spec, &c, &[CertSpace::all_strings(1, 3)]).unwrap();
        assert!(best.value() >= fixed.value());
        let mc = estimate(&spec, &c, 4000, 1).unwrap();
        assert!((mc.accept_all_fraction - 0.125).abs() <= mc.three_sigma().max(0.02));
    }

    #[test]
    fn guard_trips() {
        let c = generate(&GraphKind::Path(8)).unwrap();
        let spec = ProtocolSpec::new("copy", vec![Phase::Merlin], RandomnessMode::Shared, empty_prover(), Arc::new(CopyLabel)).unwrap();
        let r = best_prover_acceptance(&spec, &c, &[CertSpace::all_strings(8, 8)]);
        assert!(matches!(r, Err(EngineError::GuardExceeded { .. })));
    }
}
