//! Text edge-list format.
//!
//! ```text
//! n m
//! u v        (m lines, node ids)
//! id bits    (optional n lines, node id then its label; empty label = id alone)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Without the label
//! section, nodes are the edge endpoints in increasing id order.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{ConfigError, NetworkConfig};
use crate::bits::Bits;

/// Serializes with sorted edges and nodes in index order. The label section
/// is always written so that node order survives a round trip.
pub fn write_graph_file(config: &NetworkConfig) -> String {
    let edges = config.id_edges();
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", config.n(), edges.len());
    for (a, b) in edges {
        let _ = writeln!(out, "{a} {b}");
    }
    for v in 0..config.n() {
        let label = config.label(v);
        if label.is_empty() {
            let _ = writeln!(out, "{}", config.id(v));
        } else {
            let _ = writeln!(out, "{} {}", config.id(v), label);
        }
    }
    out
}

pub fn parse_graph_file(text: &str) -> Result<NetworkConfig, ConfigError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, msg: &str| ConfigError::Parse { line, msg: msg.to_string() };

    let (hline, header) = lines.next().ok_or_else(|| err(1, "missing `n m` header"))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(hline, "header must be two integers")))
        .collect::<Result<_, _>>()?;
    let [n, m] = nums[..] else {
        return Err(err(hline, "header must be two integers"));
    };

    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = lines.next().ok_or_else(|| err(hline, "fewer edge lines than declared"))?;
        let ends: Vec<u64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(ln, "edge endpoints must be integers")))
            .collect::<Result<_, _>>()?;
        let [a, b] = ends[..] else {
            return Err(err(ln, "edge line must hold two ids"));
        };
        edges.push((a, b));
    }

    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (ln, l) in lines.by_ref() {
        let mut toks = l.split_whitespace();
        let id: u64 = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(ln, "node line must start with an integer id"))?;
        let label: Bits = match toks.next() {
            None => Bits::new(),
            Some(t) => t.parse().map_err(|_| err(ln, "label must be a 0/1 string"))?,
        };
        if toks.next().is_some() {
            return Err(err(ln, "trailing tokens on node line"));
        }
        ids.push(id);
        labels.push(label);
    }

    if ids.is_empty() {
        let set: BTreeSet<u64> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids = set.into_iter().collect();
        labels = vec![Bits::new(); ids.len()];
    }
    if ids.len() != n {
        return Err(err(hline, &format!("header declares {n} nodes, found {}", ids.len())));
    }
    let config = NetworkConfig::from_id_edges(ids, &edges)?;
    Ok(config.with_labels(labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netconfig::{generate, GraphKind};
    use proptest::prelude::*;

    #[test]
    fn parses_without_label_section() {
        let c = parse_graph_file("3 2\n1 2\n# comment\n2 3\n").unwrap();
        assert_eq!(c.ids(), &[1, 2, 3]);
        assert_eq!(c.edges().len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_graph_file("3 2\n1 2\n").is_err());
        assert!(parse_graph_file("3 1\n1 2\n").is_err());
        assert!(parse_graph_file("2 1\n1 2\n1 01\n2 0x\n").is_err());
        assert!(parse_graph_file("4 2\n1 2\n3 4\n").is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(n in 3usize..12, seed in any::<u64>(), label_seed in any::<u64>()) {
            let base = generate(&GraphKind::ErdosRenyi { n, p: 0.5, seed }).unwrap();
            let labels: Vec<Bits> = (0..n)
                .map(|v| {
                    let w = v % 3;
                    Bits::from_uint((label_seed >> (2 * v)) & ((1 << w) - 1), w)
                })
                .collect();
            let c = base.with_labels(labels).unwrap();
            let text = write_graph_file(&c);
            let back = parse_graph_file(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(write_graph_file(&back), text);
        }
    }
}
