use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConfigError, NetworkConfig};
use crate::bits::Bits;

const MAX_ATTEMPTS: usize = 1000;

/// Graph families produced by [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub enum GraphKind {
    /// Oriented cycle with ids `0..n`, node `i` adjacent to `i±1 mod n`.
    Cycle(usize),
    Path(usize),
    Complete(usize),
    RandomRegular { n: usize, d: usize, seed: u64 },
    ErdosRenyi { n: usize, p: f64, seed: u64 },
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Cycle(n) => write!(f, "cycle:{n}"),
            GraphKind::Path(n) => write!(f, "path:{n}"),
            GraphKind::Complete(n) => write!(f, "complete:{n}"),
            GraphKind::RandomRegular { n, d, seed } => write!(f, "regular:{n}:{d}:{seed}"),
            GraphKind::ErdosRenyi { n, p, seed } => write!(f, "er:{n}:{p}:{seed}"),
        }
    }
}

impl FromStr for GraphKind {
    type Err = ConfigError;

    /// Accepts `cycle:N`, `path:N`, `complete:N`, `regular:N:D[:SEED]` and
    /// `er:N:P[:SEED]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::Infeasible(format!("unrecognized graph kind `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<usize, ConfigError> {
            parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(bad)
        };
        let seed = |i: usize| -> Result<u64, ConfigError> {
            match parts.get(i) {
                None => Ok(0),
                Some(p) => p.parse().map_err(|_| bad()),
            }
        };
        let kind = match parts[0] {
            "cycle" if parts.len() == 2 => GraphKind::Cycle(num(1)?),
            "path" if parts.len() == 2 => GraphKind::Path(num(1)?),
            "complete" if parts.len() == 2 => GraphKind::Complete(num(1)?),
            "regular" if (3..=4).contains(&parts.len()) => {
                GraphKind::RandomRegular { n: num(1)?, d: num(2)?, seed: seed(3)? }
            }
            "er" if (3..=4).contains(&parts.len()) => {
                let p: f64 = parts[2].parse().map_err(|_| bad())?;
                GraphKind::ErdosRenyi { n: num(1)?, p, seed: seed(3)? }
            }
            _ => return Err(bad()),
        };
        Ok(kind)
    }
}

fn sequential_ids(n: usize) -> Vec<u64> {
    (1..=n as u64).collect()
}

fn build(ids: Vec<u64>, edges: Vec<(usize, usize)>) -> Result<NetworkConfig, ConfigError> {
    let n = ids.len();
    Ok(NetworkConfig::new(ids, vec![Bits::new(); n], edges)?)
}

pub fn generate(kind: &GraphKind) -> Result<NetworkConfig, ConfigError> {
    match *kind {
        GraphKind::Cycle(n) => {
            if n < 3 {
                return Err(ConfigError::Infeasible(format!("a simple cycle needs n >= 3, got {n}")));
            }
            let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
            build((0..n as u64).collect(), edges)
        }
        GraphKind::Path(n) => {
            if n == 0 {
                return Err(ConfigError::Infeasible("a path needs n >= 1".into()));
            }
            build(sequential_ids(n), (1..n).map(|i| (i - 1, i)).collect())
        }
        GraphKind::Complete(n) => {
            if n == 0 {
                return Err(ConfigError::Infeasible("a complete graph needs n >= 1".into()));
            }
            let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            build(sequential_ids(n), edges)
        }
        GraphKind::RandomRegular { n, d, seed } => random_regular(n, d, seed),
        GraphKind::ErdosRenyi { n, p, seed } => erdos_renyi(n, p, seed),
    }
}

fn random_regular(n: usize, d: usize, seed: u64) -> Result<NetworkConfig, ConfigError> {
    let connected_possible = match (n, d) {
        (1, 0) => true,
        (_, 0) => false,
        (2, 1) => true,
        (_, 1) => false,
        _ => d < n,
    };
    if n == 0 || (n * d) % 2 == 1 || !connected_possible {
        return Err(ConfigError::Infeasible(format!(
            "no connected simple {d}-regular graph on {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..MAX_ATTEMPTS {
        stubs.shuffle(&mut rng);
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * d / 2);
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        if let Ok(c) = build(sequential_ids(n), edges) {
            return Ok(c);
        }
    }
    Err(ConfigError::Infeasible(format!(
        "no simple connected {d}-regular pairing on {n} nodes after {MAX_ATTEMPTS} attempts"
    )))
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<NetworkConfig, ConfigError> {
    if n == 0 || !(0.0..=1.0).contains(&p) || (n > 1 && p == 0.0) {
        return Err(ConfigError::Infeasible(format!("G(n={n}, p={p}) cannot be connected")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        if let Ok(c) = build(sequential_ids(n), edges) {
            return Ok(c);
        }
    }
    Err(ConfigError::Infeasible(format!(
        "G(n={n}, p={p}) was disconnected in all {MAX_ATTEMPTS} attempts"
    )))
}

/// Every connected simple graph on nodes with ids `1..=n` (labeled, not up
/// to isomorphism), in increasing order of the edge-subset bitmask.
pub fn all_connected_graphs(n: usize) -> impl Iterator<Item = NetworkConfig> {
    assert!((1..=7).contains(&n), "exhaustive enumeration supports 1 <= n <= 7");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let total = 1u64 << pairs.len();
    (0..total).filter_map(move |mask| {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        build(sequential_ids(n), edges).ok()
    })
}
