//! Coloring verification by differing-bit positions. For every edge the
//! prover names a bit position where the two colors differ; the endpoints
//! check they were given the same position and that their bits there
//! differ. Positions are compared verbatim or by fingerprint.

use std::collections::HashMap;
use std::sync::Arc;

use crate::bits::{ceil_log2, BitReader, Bits};
use crate::commprims::EqualityTest;
use crate::engine::{EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, Prover, ProverInput, RandomnessMode};
use crate::netconfig::NetworkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionExchange {
    Plain,
    Fingerprint { repetitions: usize },
}

/// Wire format and checks for position certificates over `value_bits`-bit
/// values. Shared by the coloring and lucky-labeling protocols.
#[derive(Debug, Clone, Copy)]
pub struct DiffBitLink {
    pub value_bits: usize,
    pub pos_bits: usize,
    pub exchange: PositionExchange,
    eq: EqualityTest,
}

impl DiffBitLink {
    pub fn new(value_bits: usize, exchange: PositionExchange) -> Self {
        let value_bits = value_bits.max(1);
        let pos_bits = ceil_log2(value_bits as u64);
        let reps = match exchange {
            PositionExchange::Plain => 0,
            PositionExchange::Fingerprint { repetitions } => repetitions,
        };
        DiffBitLink { value_bits, pos_bits, exchange, eq: EqualityTest::new(pos_bits).with_repetitions(reps) }
    }

    pub fn equality(&self) -> EqualityTest {
        self.eq
    }

    pub fn random_bits(&self) -> usize {
        match self.exchange {
            PositionExchange::Plain => 0,
            PositionExchange::Fingerprint { .. } => self.eq.random_bits(),
        }
    }

    pub fn message_bits(&self) -> usize {
        1 + match self.exchange {
            PositionExchange::Plain => self.pos_bits,
            PositionExchange::Fingerprint { repetitions } => repetitions,
        }
    }

    pub fn cert_bits(&self, degree: usize) -> usize {
        degree * self.pos_bits
    }

    /// Lowest bit where `own` and each neighbor value differ; 0 when equal,
    /// which no check will accept.
    pub fn positions(&self, own: u64, neighbors: &[u64]) -> Vec<u64> {
        neighbors.iter().map(|&u| (own ^ u).trailing_zeros().min(self.value_bits as u32 - 1) as u64).collect()
    }

    pub fn encode_positions(&self, positions: &[u64], out: &mut Bits) {
        for &p in positions {
            out.push_uint(p, self.pos_bits);
        }
    }

    pub fn decode_positions(&self, r: &mut BitReader<'_>, degree: usize) -> Option<Vec<u64>> {
        (0..degree)
            .map(|_| r.read_uint(self.pos_bits).filter(|&p| (p as usize) < self.value_bits))
            .collect()
    }

    fn bit_at(value: u64, pos: u64) -> bool {
        pos < 64 && value >> pos & 1 == 1
    }

    fn fp(&self, pos: u64, coins: &[u64]) -> Bits {
        let x = Bits::from_uint(pos, self.pos_bits);
        self.eq.fingerprint(&x, coins).expect("position fits the mask length")
    }

    /// Message for the port whose position is `pos`.
    pub fn message(&self, own: u64, pos: u64, coins: &[u64]) -> Bits {
        let mut b = match self.exchange {
            PositionExchange::Plain => Bits::from_uint(pos, self.pos_bits),
            PositionExchange::Fingerprint { .. } => self.fp(pos, coins),
        };
        b.push(Self::bit_at(own, pos));
        b
    }

    /// Per port: the neighbor used our position and its bit differs from ours.
    pub fn check(&self, own: u64, positions: &[u64], inbox: &[Bits], coins: &[u64]) -> bool {
        if positions.len() != inbox.len() {
            return false;
        }
        positions.iter().zip(inbox).all(|(&pos, m)| {
            if m.len() != self.message_bits() {
                return false;
            }
            let expected = self.message(own, pos, coins);
            let k = m.len() - 1;
            m.as_slice()[..k] == expected.as_slice()[..k] && m.get(k) != expected.get(k)
        })
    }
}

/// Honest certificates: one position per port for each node.
pub fn honest_positions(config: &NetworkConfig, link: &DiffBitLink, values: &[u64]) -> Vec<Bits> {
    (0..config.n())
        .map(|v| {
            let nb: Vec<u64> = config.neighbors(v).iter().map(|&u| values[u]).collect();
            let mut b = Bits::new();
            link.encode_positions(&link.positions(values[v], &nb), &mut b);
            b
        })
        .collect()
}

struct ColoringVerifier {
    link: DiffBitLink,
    max_color: u64,
    /// Each node's color, part of its input.
    colors: HashMap<u64, u64>,
}

impl ColoringVerifier {
    fn coins<'a>(&self, view: &NodeView<'a>) -> &'a [u64] {
        view.randomness.first().copied().unwrap_or(&[])
    }

    fn positions(&self, view: &NodeView<'_>) -> Option<Vec<u64>> {
        let mut r = view.certificates[0].reader();
        let p = self.link.decode_positions(&mut r, view.degree)?;
        r.is_done().then_some(p)
    }
}

impl LocalVerifier for ColoringVerifier {
    fn messages(&self, view: &NodeView<'_>, _round: usize) -> Vec<Bits> {
        let own = self.colors.get(&view.id).map_or(0, |c| c.wrapping_sub(1));
        let pos = self.positions(view).unwrap_or_else(|| vec![0; view.degree]);
        pos.iter().map(|&p| self.link.message(own, p, self.coins(view))).collect()
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let Some(&c) = self.colors.get(&view.id) else { return false };
        if c == 0 || c > self.max_color {
            return false;
        }
        let Some(pos) = self.positions(view) else { return false };
        self.link.check(c - 1, &pos, &view.inbox[0], self.coins(view))
    }
}

/// Verifies the given coloring with colors in `1..=max_color`, stored as
/// `color - 1` in `ceil(log2 max_color)` bits. Plain mode is a single
/// Merlin phase; fingerprint mode adds shared masks.
pub fn coloring_spec(
    config: &NetworkConfig,
    colors: &[u64],
    max_color: u64,
    exchange: PositionExchange,
) -> Result<ProtocolSpec, EngineError> {
    if colors.len() != config.n() {
        return Err(EngineError::Protocol(format!("expected {} colors, got {}", config.n(), colors.len())));
    }
    let link = DiffBitLink::new(ceil_log2(max_color), exchange);
    let values: Vec<u64> = colors.iter().map(|c| c.saturating_sub(1)).collect();
    let certs = honest_positions(config, &link, &values);
    let prover: Arc<dyn Prover> = Arc::new(move |_: &ProverInput<'_>| certs.clone());
    let schedule = match exchange {
        PositionExchange::Plain => vec![Phase::Merlin],
        PositionExchange::Fingerprint { .. } => vec![Phase::Merlin, Phase::Arthur(link.equality().domain())],
    };
    let verifier = ColoringVerifier {
        link,
        max_color,
        colors: (0..config.n()).map(|v| (config.id(v), colors[v])).collect(),
    };
    ProtocolSpec::new("coloring", schedule, RandomnessMode::Shared, prover, Arc::new(verifier))
}

/// Greedy proper coloring in id order, colors from 1.
pub fn greedy_coloring(config: &NetworkConfig) -> Vec<u64> {
    let mut order: Vec<usize> = (0..config.n()).collect();
    order.sort_by_key(|&v| config.id(v));
    let mut color = vec![0u64; config.n()];
    for v in order {
        let used: Vec<u64> = config.neighbors(v).iter().map(|&u| color[u]).collect();
        color[v] = (1..).find(|c| !used.contains(c)).expect("a free color exists");
    }
    color
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{estimate, exact_acceptance, best_prover_acceptance, CertSpace};
    use crate::netconfig::{generate, GraphKind};

    const FP: PositionExchange = PositionExchange::Fingerprint { repetitions: 3 };

    #[test]
    fn c4_two_coloring_accepted() {
        let c = generate(&GraphKind::Cycle(4)).unwrap();
        let colors = vec![1, 2, 1, 2];
        for ex in [PositionExchange::Plain, FP] {
            let spec = coloring_spec(&c, &colors, 2, ex).unwrap();
            assert_eq!(exact_acceptance(&spec, &c).unwrap().value(), 1.0);
        }
    }

    #[test]
    fn c3_with_clash_rejected_by_every_prover() {
        let c = generate(&GraphKind::Cycle(3)).unwrap();
        let colors = vec![1, 1, 2];
        let spec = coloring_spec(&c, &colors, 2, PositionExchange::Plain).unwrap();
        let link = DiffBitLink::new(1, PositionExchange::Plain);
        let space = CertSpace::all_strings(link.cert_bits(2), 3);
        assert_eq!(best_prover_acceptance(&spec, &c, &[space]).unwrap().accepting, 0);
    }

    #[test]
    fn budgets_on_wide_colors() {
        let c = generate(&GraphKind::Complete(5)).unwrap();
        let colors = vec![1, 7, 12, 16, 3];
        let spec = coloring_spec(&c, &colors, 16, FP).unwrap();
        let r = estimate(&spec, &c, 50, 0).unwrap();
        assert_eq!(r.accepted, 50);
        // 4 neighbors, colors in 4 bits, positions in 2 bits.
        assert_eq!(r.max_cert_bits, 4 * 2);
        assert_eq!(r.max_msg_bits, 4);
    }

    #[test]
    fn greedy_is_proper() {
        let c = generate(&GraphKind::RandomRegular { n: 12, d: 4, seed: 1 }).unwrap();
        let colors = greedy_coloring(&c);
        for (a, b) in c.edges() {
            assert_ne!(colors[*a], colors[*b]);
        }
    }
}
