use std::collections::HashSet;

use num_complex::Complex64;
use ontochain::hamiltonian::approx_hamiltonian_apply;
use ontochain::hilbert::{apply_chain_update, tensor};
use ontochain::hybrid::{interaction, joint_update, Bipartition};
use ontochain::states::{
    chain_update, chain_update_by_transpositions, is_zero_mode, orbit_census, orbit_of, transpose,
    update_index, zero_modes,
};
use ontochain::{ChainConfig, OntState, QState, SparseVector};
use proptest::prelude::*;

fn even_spins(lo: usize, hi: usize) -> impl Strategy<Value = usize> {
    (lo / 2..=hi / 2).prop_map(|h| 2 * h)
}

fn chain_state(lo: usize, hi: usize) -> impl Strategy<Value = OntState> {
    even_spins(lo, hi).prop_flat_map(|n| {
        (0..(1u64 << n)).prop_map(move |idx| OntState::from_index(n, idx).unwrap())
    })
}

fn sparse_state(num_spins: usize, max_branches: usize) -> impl Strategy<Value = QState> {
    prop::collection::vec(
        (0..(1u64 << num_spins), -1.0f64..1.0, -1.0f64..1.0),
        1..=max_branches,
    )
    .prop_filter_map("nonzero", move |entries| {
        let v = SparseVector::from_pairs(
            num_spins,
            entries.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im))),
        )
        .ok()?;
        QState::normalized(&v).ok()
    })
}

proptest! {
    #[test]
    fn transposition_is_an_involution(s in chain_state(4, 24), i in 1usize..=24, j in 1usize..=24) {
        let n = s.num_spins();
        let (i, j) = ((i - 1) % n + 1, (j - 1) % n + 1);
        let once = transpose(&s, i, j).unwrap();
        prop_assert_eq!(transpose(&once, i, j).unwrap(), s);
        prop_assert_eq!(once, transpose(&s, j, i).unwrap());
    }

    #[test]
    fn update_routes_agree(s in chain_state(10, 24)) {
        let cfg = ChainConfig::with_spins(s.num_spins()).unwrap();
        prop_assert_eq!(chain_update(&s, &cfg).unwrap(), chain_update_by_transpositions(&s, &cfg).unwrap());
    }

    #[test]
    fn orbit_length_divides_half(s in chain_state(4, 40)) {
        let cfg = ChainConfig::with_spins(s.num_spins()).unwrap();
        let orbit = orbit_of(&s, &cfg).unwrap();
        prop_assert_eq!(cfg.half() % orbit.len(), 0);
        let last = *orbit.indices().last().unwrap();
        prop_assert_eq!(update_index(last, s.num_spins()), orbit.indices()[0]);
        prop_assert_eq!(orbit.len() == 1, is_zero_mode(&s, &cfg).unwrap());
    }

    #[test]
    fn conservation_of_ontology(q in sparse_state(20, 12), steps in 1usize..40) {
        let cfg = ChainConfig::with_spins(20).unwrap();
        let before = q.sorted_amplitudes();
        let mut cur = q.clone();
        for _ in 0..steps {
            cur = apply_chain_update(&cur, &cfg).unwrap();
        }
        prop_assert_eq!(cur.sorted_amplitudes(), before);
        prop_assert_eq!(cur.support_size(), q.support_size());
        prop_assert_eq!(cur.born_weight(), q.born_weight());
    }

    #[test]
    fn approx_hamiltonian_is_self_adjoint(p in sparse_state(10, 6), q in sparse_state(10, 6)) {
        let cfg = ChainConfig::with_spins(10).unwrap();
        let hq = approx_hamiltonian_apply(q.vector(), &cfg).unwrap();
        let hp = approx_hamiltonian_apply(p.vector(), &cfg).unwrap();
        let lhs = p.vector().inner(&hq);
        let rhs = q.vector().inner(&hp).conj();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn interaction_is_an_involution_preserving_norm(
        a in sparse_state(6, 4),
        b in sparse_state(6, 4),
        i in 1usize..=6,
        j in 1usize..=6,
    ) {
        prop_assume!(i != j);
        let split = Bipartition::new(6, 6);
        let joint = tensor(&a, &b).unwrap();
        let once = interaction(&joint, split, i, j).unwrap();
        prop_assert!((once.vector().norm() - 1.0).abs() < 1e-12);
        prop_assert_eq!(interaction(&once, split, i, j).unwrap(), joint.clone());
        prop_assert!((joint_update(&once, split).unwrap().vector().norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn update_is_a_bijection() {
    for n in (4..=12).step_by(2) {
        let dim = 1u64 << n;
        let image: HashSet<u64> = (0..dim).map(|k| update_index(k, n)).collect();
        assert_eq!(image.len() as u64, dim, "2S={n}");
    }
}

#[test]
fn half_period_is_identity_exhaustively() {
    for n in [4usize, 6, 8, 10] {
        let half = n / 2;
        for k in 0..(1u64 << n) {
            let mut cur = k;
            for _ in 0..half {
                cur = update_index(cur, n);
            }
            assert_eq!(cur, k);
        }
    }
}

#[test]
fn exactly_four_zero_modes() {
    for n in (4..=16).step_by(2) {
        let cfg = ChainConfig::with_spins(n).unwrap();
        let fixed = orbit_census(&cfg).unwrap().iter().filter(|o| o.len() == 1).count();
        assert_eq!(fixed, 4, "2S={n}");
    }
    for n in [20usize, 40, 62] {
        let cfg = ChainConfig::with_spins(n).unwrap();
        for z in zero_modes(&cfg) {
            assert!(is_zero_mode(&z, &cfg).unwrap());
            assert_eq!(chain_update(&z, &cfg).unwrap(), z);
        }
    }
}
