//! Universal two-round certification on `d`-regular graphs. The edges and
//! the (id, label) pairs are split into `d` parts; every node is handed a
//! few parts so that its neighbors jointly hold all of them. Each node
//! rebuilds the whole configuration, neighbors compare rebuilds, and every
//! node checks its own edges and label before deciding membership.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConfigLanguage, PlsError};
use crate::bits::{ceil_log2, width_for, BitReader, Bits};
use crate::engine::{EngineError, LocalVerifier, NodeView, Phase, ProtocolSpec, ProverInput, RandomnessMode};
use crate::netconfig::NetworkConfig;

pub const DEFAULT_REPETITION_CONSTANT: usize = 4;

/// One part of the configuration: a slice of the edges and of the labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub edges: Vec<(u64, u64)>,
    pub labels: Vec<(u64, Bits)>,
}

/// Wire layout shared by prover and verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularLayout {
    pub d: usize,
    pub repetitions: usize,
    pub id_bits: usize,
    pub edge_count_bits: usize,
    pub label_count_bits: usize,
    pub label_len_bits: usize,
}

impl RegularLayout {
    pub fn for_config(config: &NetworkConfig, d: usize, c: usize) -> Self {
        let n = config.n() as u64;
        let max_label = config.labels().iter().map(Bits::len).max().unwrap_or(0);
        RegularLayout {
            d,
            repetitions: (c * ceil_log2(n)).max(1),
            id_bits: width_for(config.max_id()),
            edge_count_bits: width_for(n * d as u64 / 2),
            label_count_bits: width_for(n),
            label_len_bits: width_for(max_label as u64),
        }
    }

    fn index_bits(&self) -> usize {
        ceil_log2(self.d as u64)
    }

    fn encode_part(&self, part: &Part, out: &mut Bits) {
        out.push_uint(part.edges.len() as u64, self.edge_count_bits);
        for &(a, b) in &part.edges {
            out.push_uint(a, self.id_bits);
            out.push_uint(b, self.id_bits);
        }
        out.push_uint(part.labels.len() as u64, self.label_count_bits);
        for (id, label) in &part.labels {
            out.push_uint(*id, self.id_bits);
            out.push_uint(label.len() as u64, self.label_len_bits);
            out.extend(label);
        }
    }

    fn decode_part(&self, r: &mut BitReader<'_>) -> Option<Part> {
        let m = r.read_uint(self.edge_count_bits)?;
        let mut edges = Vec::new();
        for _ in 0..m {
            edges.push((r.read_uint(self.id_bits)?, r.read_uint(self.id_bits)?));
        }
        let k = r.read_uint(self.label_count_bits)?;
        let mut labels = Vec::new();
        for _ in 0..k {
            let id = r.read_uint(self.id_bits)?;
            let len = r.read_uint(self.label_len_bits)? as usize;
            labels.push((id, r.read_bits(len)?));
        }
        Some(Part { edges, labels })
    }

    /// Certificate: for each repetition, the part index and its contents.
    pub fn encode_cert(&self, parts: &[Part], indices: &[usize]) -> Bits {
        let mut b = Bits::new();
        for &j in indices {
            b.push_uint(j as u64, self.index_bits());
            self.encode_part(&parts[j], &mut b);
        }
        b
    }

    pub fn decode_cert(&self, cert: &Bits) -> Option<Vec<(usize, Part)>> {
        let mut r = cert.reader();
        let mut out = Vec::with_capacity(self.repetitions);
        for _ in 0..self.repetitions {
            let j = r.read_uint(self.index_bits())? as usize;
            if j >= self.d {
                return None;
            }
            out.push((j, self.decode_part(&mut r)?));
        }
        r.is_done().then_some(out)
    }

    /// Canonical encoding of a full set of parts, used to compare rebuilds.
    pub fn encode_parts(&self, parts: &[Part]) -> Bits {
        let mut b = Bits::new();
        for p in parts {
            self.encode_part(p, &mut b);
        }
        b
    }
}

/// Round-robin split of the sorted edge list and the id-sorted labels into
/// `d` parts; edge parts hold at most `ceil(n/2)` edges each.
pub fn partition(config: &NetworkConfig, d: usize) -> Vec<Part> {
    let mut parts = vec![Part { edges: Vec::new(), labels: Vec::new() }; d];
    for (i, e) in config.id_edges().into_iter().enumerate() {
        parts[i % d].edges.push(e);
    }
    let mut nodes: Vec<usize> = (0..config.n()).collect();
    nodes.sort_by_key(|&v| config.id(v));
    for (i, v) in nodes.into_iter().enumerate() {
        parts[i % d].labels.push((config.id(v), config.label(v).clone()));
    }
    parts
}

/// Draws one part index per node per repetition until every node's
/// neighbors jointly hold all `d` parts, trying at most `50·n` times.
pub fn assign_parts(config: &NetworkConfig, d: usize, repetitions: usize, seed: u64) -> Result<Vec<Vec<usize>>, PlsError> {
    let n = config.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = 50 * n;
    for _ in 0..cap {
        let idx: Vec<Vec<usize>> = (0..n).map(|_| (0..repetitions).map(|_| rng.gen_range(0..d)).collect()).collect();
        let covered = (0..n).all(|v| {
            let mut seen = vec![false; d];
            for &u in config.neighbors(v) {
                for &j in &idx[u] {
                    seen[j] = true;
                }
            }
            seen.iter().all(|&s| s)
        });
        if covered {
            return Ok(idx);
        }
    }
    Err(PlsError::CoverageFailed(cap))
}

pub fn regular_universal_prove(config: &NetworkConfig, layout: &RegularLayout, seed: u64) -> Result<Vec<Bits>, PlsError> {
    if !config.is_regular(layout.d) {
        return Err(PlsError::NotRegular(layout.d));
    }
    let parts = partition(config, layout.d);
    let idx = assign_parts(config, layout.d, layout.repetitions, seed)?;
    Ok(idx.iter().map(|ix| layout.encode_cert(&parts, ix)).collect())
}

/// Combines decoded certificates into all `d` parts; `None` if some part is
/// missing or two copies of a part disagree.
pub fn rebuild_parts(layout: &RegularLayout, certs: &[Vec<(usize, Part)>]) -> Option<Vec<Part>> {
    let mut found: Vec<Option<Part>> = vec![None; layout.d];
    for (j, part) in certs.iter().flatten() {
        match &found[*j] {
            Some(p) if p != part => return None,
            Some(_) => {}
            None => found[*j] = Some(part.clone()),
        }
    }
    found.into_iter().collect()
}

/// The configuration described by `parts`, with nodes in id order.
pub fn parts_to_config(parts: &[Part]) -> Option<NetworkConfig> {
    let mut labels: BTreeMap<u64, Bits> = BTreeMap::new();
    for (id, l) in parts.iter().flat_map(|p| &p.labels) {
        if labels.insert(*id, l.clone()).is_some() {
            return None;
        }
    }
    let edges: BTreeSet<(u64, u64)> = parts.iter().flat_map(|p| p.edges.iter().copied()).collect();
    if edges.iter().any(|&(a, b)| !labels.contains_key(&a) || !labels.contains_key(&b)) {
        return None;
    }
    let ids: Vec<u64> = labels.keys().copied().collect();
    let edges: Vec<(u64, u64)> = edges.into_iter().collect();
    let c = NetworkConfig::from_id_edges(ids, &edges).ok()?;
    c.with_labels(labels.into_values().collect()).ok()
}

/// Same configuration up to node order.
pub fn same_configuration(a: &NetworkConfig, b: &NetworkConfig) -> bool {
    let labels = |c: &NetworkConfig| -> BTreeMap<u64, Bits> {
        (0..c.n()).map(|v| (c.id(v), c.label(v).clone())).collect()
    };
    a.id_edges() == b.id_edges() && labels(a) == labels(b)
}

struct RegularVerifier {
    layout: RegularLayout,
    language: ConfigLanguage,
}

impl RegularVerifier {
    fn rebuild(&self, view: &NodeView<'_>) -> Option<(Vec<Part>, Vec<u64>)> {
        let mut certs = vec![self.layout.decode_cert(view.certificates[0])?];
        let mut nb_ids = Vec::with_capacity(view.degree);
        for m in &view.inbox[0] {
            let mut r = m.reader();
            nb_ids.push(r.read_uint(self.layout.id_bits)?);
            certs.push(self.layout.decode_cert(&r.rest())?);
        }
        Some((rebuild_parts(&self.layout, &certs)?, nb_ids))
    }
}

impl LocalVerifier for RegularVerifier {
    fn rounds(&self) -> usize {
        2
    }

    fn messages(&self, view: &NodeView<'_>, round: usize) -> Vec<Bits> {
        let m = match round {
            0 => {
                let mut m = Bits::from_uint(view.id, self.layout.id_bits);
                m.extend(view.certificates[0]);
                m
            }
            _ => match self.rebuild(view) {
                Some((parts, _)) => self.layout.encode_parts(&parts),
                None => Bits::new(),
            },
        };
        vec![m; view.degree]
    }

    fn decide(&self, view: &NodeView<'_>) -> bool {
        let Some((parts, nb_ids)) = self.rebuild(view) else { return false };
        let mine = self.layout.encode_parts(&parts);
        if view.inbox[1].iter().any(|m| m != &mine) {
            return false;
        }
        let Some(rebuilt) = parts_to_config(&parts) else { return false };
        let Some(me) = rebuilt.index_of(view.id) else { return false };
        if rebuilt.label(me) != view.label {
            return false;
        }
        let mut claimed: Vec<u64> = rebuilt.neighbors(me).iter().map(|&u| rebuilt.id(u)).collect();
        let mut actual = nb_ids;
        claimed.sort_unstable();
        actual.sort_unstable();
        claimed == actual && (self.language)(&rebuilt)
    }
}

/// Two verification rounds: certificates (with the sender's id), then
/// rebuilt configurations.
pub fn regular_universal_spec(
    config: &NetworkConfig,
    d: usize,
    c: usize,
    language: ConfigLanguage,
    prover_seed: u64,
) -> Result<ProtocolSpec, EngineError> {
    if !config.is_regular(d) {
        return Err(EngineError::Protocol(PlsError::NotRegular(d).to_string()));
    }
    let layout = RegularLayout::for_config(config, d, c);
    let prover = Arc::new(move |input: &ProverInput<'_>| {
        regular_universal_prove(input.config, &layout, prover_seed)
            .unwrap_or_else(|_| vec![Bits::new(); input.config.n()])
    });
    ProtocolSpec::new(
        "regular-universal",
        vec![Phase::Merlin],
        RandomnessMode::Shared,
        prover,
        Arc::new(RegularVerifier { layout, language }),
    )
}

/// What node `v` rebuilds from its own and its neighbors' certificates.
pub fn rebuild_at(config: &NetworkConfig, layout: &RegularLayout, certs: &[Bits], v: usize) -> Option<NetworkConfig> {
    let decoded: Option<Vec<_>> = std::iter::once(v)
        .chain(config.neighbors(v).iter().copied())
        .map(|u| layout.decode_cert(&certs[u]))
        .collect();
    parts_to_config(&rebuild_parts(layout, &decoded?)?)
}

/// Every label equal.
pub fn uniform_labels() -> ConfigLanguage {
    Arc::new(|c: &NetworkConfig| c.labels().windows(2).all(|w| w[0] == w[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_once;
    use crate::netconfig::{generate, GraphKind};

    fn labeled_c4(bits: &str) -> NetworkConfig {
        let c = generate(&GraphKind::Cycle(4)).unwrap();
        c.with_labels(bits.chars().map(|ch| ch.to_string().parse().unwrap()).collect()).unwrap()
    }

    #[test]
    fn c4_uniform_labels() {
        let yes = labeled_c4("1111");
        let spec = regular_universal_spec(&yes, 2, 4, uniform_labels(), 1).unwrap();
        assert!(run_once(&spec, &yes, 0, 0).unwrap().0);
        let no = labeled_c4("1101");
        let spec = regular_universal_spec(&no, 2, 4, uniform_labels(), 1).unwrap();
        assert!(!run_once(&spec, &no, 0, 0).unwrap().0);
    }

    #[test]
    fn partition_is_balanced() {
        let c = generate(&GraphKind::RandomRegular { n: 16, d: 3, seed: 5 }).unwrap();
        let parts = partition(&c, 3);
        assert!(parts.iter().all(|p| p.edges.len() <= 8));
        assert_eq!(parts.iter().map(|p| p.edges.len()).sum::<usize>(), 24);
        assert_eq!(parts.iter().map(|p| p.labels.len()).sum::<usize>(), 16);
    }

    #[test]
    fn every_node_rebuilds_the_configuration() {
        let c = generate(&GraphKind::RandomRegular { n: 16, d: 3, seed: 9 }).unwrap();
        let layout = RegularLayout::for_config(&c, 3, 4);
        let certs = regular_universal_prove(&c, &layout, 3).unwrap();
        for v in 0..c.n() {
            let r = rebuild_at(&c, &layout, &certs, v).unwrap();
            assert!(same_configuration(&r, &c));
        }
    }

    #[test]
    fn tampered_part_rejected() {
        let c = labeled_c4("0000");
        let layout = RegularLayout::for_config(&c, 2, 4);
        let mut parts = partition(&c, 2);
        // Claim node 1 carries label 1 in every copy handed out.
        for (id, l) in parts.iter_mut().flat_map(|p| p.labels.iter_mut()) {
            if *id == 1 {
                *l = "1".parse().unwrap();
            }
        }
        let idx = assign_parts(&c, 2, layout.repetitions, 0).unwrap();
        let certs: Vec<Bits> = idx.iter().map(|ix| layout.encode_cert(&parts, ix)).collect();
        let spec = regular_universal_spec(&c, 2, 4, Arc::new(|_: &NetworkConfig| true), 0).unwrap();
        let spec = spec.with_prover(Arc::new(move |_: &ProverInput<'_>| certs.clone()));
        let (ok, t) = run_once(&spec, &c, 0, 0).unwrap();
        assert!(!ok);
        assert!(!t.verdicts[c.index_of(1).unwrap()]);
    }
}
