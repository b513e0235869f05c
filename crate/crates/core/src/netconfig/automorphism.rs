use std::collections::BTreeMap;

use super::{ConfigError, NetworkConfig};

/// Largest graph accepted by [`has_nontrivial_automorphism`].
pub const AUTOMORPHISM_GUARD: usize = 24;

/// Exhaustive search for a non-identity permutation of the nodes that maps
/// the edge set onto itself. Ids and labels are ignored.
///
/// Candidates are pruned by color refinement (automorphisms preserve the
/// stable coloring) and by adjacency with already-placed nodes; the search
/// is otherwise complete.
pub fn has_nontrivial_automorphism(config: &NetworkConfig) -> Result<bool, ConfigError> {
    let n = config.n();
    if n > AUTOMORPHISM_GUARD {
        return Err(ConfigError::GuardExceeded { nodes: n, limit: AUTOMORPHISM_GUARD });
    }
    let color = refine_colors(config);
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|u| (0..n).map(|v| config.has_edge(u, v)).collect())
        .collect();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(search(0, false, &adj, &color, &mut image, &mut used))
}

fn search(
    v: usize,
    moved: bool,
    adj: &[Vec<bool>],
    color: &[usize],
    image: &mut [usize],
    used: &mut [bool],
) -> bool {
    let n = adj.len();
    if v == n {
        return moved;
    }
    for w in 0..n {
        if used[w] || color[w] != color[v] {
            continue;
        }
        if (0..v).any(|u| adj[u][v] != adj[image[u]][w]) {
            continue;
        }
        image[v] = w;
        used[w] = true;
        if search(v + 1, moved || w != v, adj, color, image, used) {
            return true;
        }
        used[w] = false;
    }
    image[v] = usize::MAX;
    false
}

/// Stable partition under iterated (color, sorted neighbor colors)
/// refinement, starting from degrees.
fn refine_colors(config: &NetworkConfig) -> Vec<usize> {
    let n = config.n();
    let mut color: Vec<usize> = (0..n).map(|v| config.degree(v)).collect();
    let mut classes = 0;
    loop {
        let mut sig: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let keys: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = config.neighbors(v).iter().map(|&w| color[w]).collect();
                nb.sort_unstable();
                (color[v], nb)
            })
            .collect();
        for k in &keys {
            let next = sig.len();
            sig.entry(k.clone()).or_insert(next);
        }
        let next: Vec<usize> = keys.iter().map(|k| sig[k]).collect();
        if sig.len() == classes {
            return next;
        }
        classes = sig.len();
        color = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netconfig::{build_sym_gadget, generate, GraphKind};

    /// Plain enumeration of all n! permutations.
    fn brute_force(config: &NetworkConfig) -> bool {
        let n = config.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let preserves = |p: &[usize]| {
            config.edges().iter().all(|&(u, v)| config.has_edge(p[u], p[v]))
        };
        // Heap's algorithm.
        let mut c = vec![0usize; n];
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                if preserves(&perm) && perm.iter().enumerate().any(|(a, &b)| a != b) {
                    return true;
                }
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        false
    }

    #[test]
    fn c4_is_symmetric() {
        let c = generate(&GraphKind::Cycle(4)).unwrap();
        assert!(has_nontrivial_automorphism(&c).unwrap());
    }

    #[test]
    fn smallest_asymmetric_tree() {
        // Spine 1-2-3-4-5-6 with a pendant 7 on node 3.
        let t = NetworkConfig::from_id_edges(
            (1..=7).collect(),
            &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (3, 7)],
        )
        .unwrap();
        assert!(!has_nontrivial_automorphism(&t).unwrap());
        assert!(!brute_force(&t));
    }

    #[test]
    fn agrees_with_brute_force_on_small_graphs() {
        for n in 1..=5 {
            for g in crate::netconfig::all_connected_graphs(n) {
                assert_eq!(has_nontrivial_automorphism(&g).unwrap(), brute_force(&g), "{g:?}");
            }
        }
    }

    #[test]
    fn gadget_with_equal_inputs_is_symmetric() {
        let g = build_sym_gadget(&[true, true], &[true, true]).unwrap();
        assert!(has_nontrivial_automorphism(&g).unwrap());
    }

    #[test]
    fn gadget_with_unequal_inputs_keeps_cycle_symmetry() {
        // Every y_j is adjacent to every u_i, so swapping y_1 and y_2 fixes
        // all edges whatever x and y are.
        let g = build_sym_gadget(&[true, false], &[false, true]).unwrap();
        assert!(has_nontrivial_automorphism(&g).unwrap());
    }

    #[test]
    fn guard_enforced() {
        let c = generate(&GraphKind::Cycle(AUTOMORPHISM_GUARD + 1)).unwrap();
        assert!(matches!(
            has_nontrivial_automorphism(&c),
            Err(ConfigError::GuardExceeded { .. })
        ));
    }
}
