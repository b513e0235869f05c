use super::{ConfigError, NetworkConfig};
use crate::bits::Bits;

/// Builds the `6n+2`-node graph `G(x, y)` on nodes `a, b, a_i, b_i, u_i, v_i,
/// y_i, z_i` (`1 <= i <= n`).
///
/// Ids: `a = 1`, `b = 2`, then `a_i = 2 + i`, `b_i = 2 + n + i`,
/// `u_i = 2 + 2n + i`, `v_i = 2 + 3n + i`, `y_i = 2 + 4n + i`,
/// `z_i = 2 + 5n + i`.
///
/// Edges: `(a,b)`; `(a,a_i)` iff `x_i = 1`; `(b,b_i)` iff `y_i = 1`;
/// `(u_i,a_j)` and `(v_i,b_j)` for `i <= j`; `(u_i,u_j)` and `(v_i,v_j)` for
/// `i < j`; `(u_i,y_j)` and `(v_i,z_j)` for all `i, j`; and the cycles
/// `y_1 .. y_n` and `z_1 .. z_n` closed by `(y_1,y_n)`, `(z_1,z_n)`. For
/// `n <= 2` the closing edge would be a self-loop or repeat `(y_1,y_2)`, and
/// is omitted so the graph stays simple.
pub fn build_sym_gadget(x: &[bool], y: &[bool]) -> Result<NetworkConfig, ConfigError> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(ConfigError::Infeasible(format!(
            "gadget needs two vectors of equal positive length, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if !x.iter().any(|&b| b) || !y.iter().any(|&b| b) {
        return Err(ConfigError::Infeasible("gadget inputs must be nonzero vectors".into()));
    }
    let a = 0usize;
    let b = 1usize;
    let ai = |i: usize| 1 + i;
    let bi = |i: usize| 1 + n + i;
    let ui = |i: usize| 1 + 2 * n + i;
    let vi = |i: usize| 1 + 3 * n + i;
    let yi = |i: usize| 1 + 4 * n + i;
    let zi = |i: usize| 1 + 5 * n + i;

    let mut edges = vec![(a, b)];
    for i in 1..=n {
        if x[i - 1] {
            edges.push((a, ai(i)));
        }
        if y[i - 1] {
            edges.push((b, bi(i)));
        }
    }
    for i in 1..=n {
        for j in i..=n {
            edges.push((ui(i), ai(j)));
            edges.push((vi(i), bi(j)));
        }
        for j in i + 1..=n {
            edges.push((ui(i), ui(j)));
            edges.push((vi(i), vi(j)));
        }
        for j in 1..=n {
            edges.push((ui(i), yi(j)));
            edges.push((vi(i), zi(j)));
        }
    }
    for i in 1..n {
        edges.push((yi(i), yi(i + 1)));
        edges.push((zi(i), zi(i + 1)));
    }
    if n >= 3 {
        edges.push((yi(1), yi(n)));
        edges.push((zi(1), zi(n)));
    }

    let total = 6 * n + 2;
    let ids = (1..=total as u64).collect();
    Ok(NetworkConfig::new(ids, vec![Bits::new(); total], edges)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_count_is_six_n_plus_two() {
        for n in 1..=4 {
            let x = vec![true; n];
            assert_eq!(build_sym_gadget(&x, &x).unwrap().n(), 6 * n + 2);
        }
    }

    #[test]
    fn zero_vectors_rejected() {
        assert!(build_sym_gadget(&[false, false], &[true, false]).is_err());
        assert!(build_sym_gadget(&[true, false], &[false, false]).is_err());
        assert!(build_sym_gadget(&[true], &[true, false]).is_err());
    }

    #[test]
    fn edge_families() {
        let g = build_sym_gadget(&[true, false, true], &[false, true, true]).unwrap();
        let id = |v: u64| g.index_of(v).unwrap();
        // a = 1, a_1 = 3, a_2 = 4, a_3 = 5; b = 2, b_1 = 6 .. b_3 = 8.
        assert!(g.has_edge(id(1), id(2)));
        assert!(g.has_edge(id(1), id(3)) && !g.has_edge(id(1), id(4)) && g.has_edge(id(1), id(5)));
        assert!(!g.has_edge(id(2), id(6)) && g.has_edge(id(2), id(7)) && g.has_edge(id(2), id(8)));
        // u_2 = 10 sees a_2, a_3 but not a_1.
        assert!(g.has_edge(id(10), id(4)) && g.has_edge(id(10), id(5)) && !g.has_edge(id(10), id(3)));
        // y-cycle 15-16-17-15.
        assert!(g.has_edge(id(15), id(16)) && g.has_edge(id(16), id(17)) && g.has_edge(id(15), id(17)));
        let m = 1 + 2 + 2 + 2 * 6 + 2 * 3 + 2 * 9 + 2 * 3;
        assert_eq!(g.edges().len(), m);
    }
}
