use dip_core::engine::exact_acceptance;
use dip_core::netconfig::all_connected_graphs;
use dip_core::transforms::{boost, coin_spec};

// Per-copy acceptance 1/2 or 2/3; the boosted network accepts iff a strict
// majority of the three shared coins accepts.
#[test]
fn boosted_tallies_on_all_small_graphs() {
    for n in 1..=4 {
        for g in all_connected_graphs(n) {
            for (accept, m) in [(1u64, 2u64), (2, 3)] {
                let spec = boost(&coin_spec(accept, m).unwrap(), &g, 3).unwrap();
                let a = exact_acceptance(&spec, &g).unwrap();
                let (yes, no) = (accept as u128, (m - accept) as u128);
                let majority = yes.pow(3) + 3 * yes.pow(2) * no;
                assert_eq!((a.accepting, a.total), (majority, (m as u128).pow(3)), "n={n} {g:?}");
            }
        }
    }
}
