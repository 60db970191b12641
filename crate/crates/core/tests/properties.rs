//! Property tests: algebraic invariants checked against dense matrices.

use lst_core::clifford::CliffordElement;
use lst_core::codes::{load_code, LogicalStatePrep, StabilizerCode};
use lst_core::dense::{self, DenseMatrix};
use lst_core::estimator::{projected_moment, EstimatorConfig};
use lst_core::experiments::dense_affine_trace;
use lst_core::gf2;
use lst_core::noise::NoiseSpec;
use lst_core::pauli::{self, Pauli, PauliOp};
use lst_core::shadow::{self, acquire_ensemble, ShadowEnsemble};
use lst_core::tableau::{Gate, Tableau};
use lst_core::trace::{affine_product_trace_complex, AffinePauliFactor, DEFAULT_NULL_SPACE_CAP};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pauli_op(n: usize) -> impl Strategy<Value = PauliOp> {
    (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(letters, phase)| {
        let l: Vec<Pauli> = letters
            .into_iter()
            .map(|c| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][c as usize])
            .collect();
        PauliOp::from_letters(&l, phase)
    })
}

fn triple() -> impl Strategy<Value = (PauliOp, PauliOp, PauliOp)> {
    (1usize..=70).prop_flat_map(|n| (pauli_op(n), pauli_op(n), pauli_op(n)))
}

fn factor_list() -> impl Strategy<Value = (usize, Vec<AffinePauliFactor>)> {
    (1usize..=5).prop_flat_map(|n| {
        let f = (-1.0f64..1.0, -1.0f64..1.0, pauli_op(n)).prop_map(|(a, b, mut op)| {
            op.set_phase(0);
            AffinePauliFactor::new(a, b, op)
        });
        (Just(n), prop::collection::vec(f, 0..=12))
    })
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
    prop_oneof![
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::S),
        q.clone().prop_map(Gate::X),
        q.clone().prop_map(Gate::Y),
        q.prop_map(Gate::Z),
        pair.clone().prop_map(|(a, b)| Gate::CX(a, b)),
        pair.clone().prop_map(|(a, b)| Gate::CZ(a, b)),
        pair.prop_map(|(a, b)| Gate::Swap(a, b)),
    ]
}

fn commuting_gens(n: usize, count: usize, seed: u64) -> Vec<PauliOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = CliffordElement::sample(n, &mut rng).unwrap();
    (0..count)
        .map(|j| if seed >> j & 1 == 1 { u.image_z(j).negated() } else { u.image_z(j) })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn multiplication_is_associative((a, b, c) in triple()) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn swapped_products_differ_by_the_commutation_sign((a, b, _c) in triple()) {
        let ab = a.multiply(&b).unwrap();
        let ba = b.multiply(&a).unwrap();
        let expected = if a.commutes(&b).unwrap() { ba } else { ba.negated() };
        prop_assert_eq!(ab, expected);
    }

    #[test]
    fn products_match_dense_matrices(a in pauli_op(3), b in pauli_op(3)) {
        let lhs = DenseMatrix::<f64>::from_pauli(&a.multiply(&b).unwrap());
        let rhs = DenseMatrix::<f64>::from_pauli(&a).matmul(&DenseMatrix::from_pauli(&b));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }

    #[test]
    fn affine_trace_matches_dense((n, factors) in factor_list()) {
        let t = affine_product_trace_complex(n, &factors, DEFAULT_NULL_SPACE_CAP).unwrap();
        let (re, im) = dense_affine_trace(n, &factors);
        let scale = re.abs().max(im.abs()).max(1.0);
        prop_assert!((t.re - re).abs() <= 1e-10 * scale, "{} vs {}", t.re, re);
        prop_assert!((t.im - im).abs() <= 1e-10 * scale, "{} vs {}", t.im, im);
    }

    #[test]
    fn null_space_vectors_multiply_to_identity(ops in (1usize..=8).prop_flat_map(|n| prop::collection::vec(pauli_op(n), 1..12))) {
        for v in gf2::null_space(&ops).unwrap() {
            let chosen: Vec<PauliOp> = v.ones().map(|j| ops[j].clone()).collect();
            prop_assert!(pauli::product(&chosen).unwrap().is_identity_string());
        }
        let rank = gf2::pauli_rank(&ops);
        prop_assert_eq!(rank + gf2::null_space(&ops).unwrap().len(), ops.len());
    }

    #[test]
    fn gates_match_dense_conjugation(gates in (2usize..=4).prop_flat_map(|n| (Just(n), prop::collection::vec(gate(n), 0..20)))) {
        let (n, gates) = gates;
        let mut t = Tableau::init_zero(n);
        let mut rho = dense::density_from_tableau::<f64>(&t).unwrap();
        for g in &gates {
            t.apply_gate(*g).unwrap();
            let u = dense::gate_unitary::<f64>(*g, n);
            rho = u.matmul(&rho).matmul(&u.dagger());
        }
        t.check_invariants().unwrap();
        let from_tableau = dense::density_from_tableau::<f64>(&t).unwrap();
        prop_assert!(from_tableau.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn projection_matches_dense_and_is_idempotent(n in 1usize..=5, s1 in any::<u64>(), s2 in any::<u64>(), c1 in 0usize..=5, c2 in 1usize..=5) {
        let state = commuting_gens(n, c1.min(n), s1);
        let proj = commuting_gens(n, c2.min(n), s2);
        let mut t = Tableau::maximally_mixed(n);
        t.project(&state).unwrap();
        let before = dense::density_from_tableau::<f64>(&t).unwrap();
        let tr = t.project(&proj).unwrap();
        t.check_invariants().unwrap();
        let projected = before.sandwich(&proj);
        prop_assert_eq!(tr, projected.trace().re);
        if tr > 0.0 {
            let after = dense::density_from_tableau::<f64>(&t).unwrap();
            prop_assert!(after.max_abs_diff(&projected.scale(1.0 / tr)) < 1e-12);
            let again = t.clone().project(&proj).unwrap();
            prop_assert_eq!(again, 1.0);
            let mut t2 = t.clone();
            t2.project(&proj).unwrap();
            prop_assert!(dense::density_from_tableau::<f64>(&t2).unwrap().max_abs_diff(&after) < 1e-12);
        }
    }

    #[test]
    fn clifford_conjugation_is_an_automorphism(n in 1usize..=6, seed in any::<u64>(), a in pauli_op(6), b in pauli_op(6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = CliffordElement::sample(n, &mut rng).unwrap();
        let (a, b) = (a.restrict(0, n), b.restrict(0, n));
        let ua = u.pullback(&a).unwrap();
        let ub = u.pullback(&b).unwrap();
        prop_assert_eq!(u.pullback(&a.multiply(&b).unwrap()).unwrap(), ua.multiply(&ub).unwrap());
        prop_assert_eq!(ua.commutes(&ub).unwrap(), a.commutes(&b).unwrap());
        prop_assert_eq!(u.inverse().pullback(&ua).unwrap(), a);
    }

    #[test]
    fn lifted_logicals_respect_products(a in pauli_op(1), b in pauli_op(1)) {
        let code = StabilizerCode::five_qubit();
        let la = code.lift_logical(&a).unwrap();
        let lb = code.lift_logical(&b).unwrap();
        let lab = code.lift_logical(&a.multiply(&b).unwrap()).unwrap();
        prop_assert_eq!(la.multiply(&lb).unwrap(), lab);
        for g in code.generators() {
            prop_assert!(la.commutes(g).unwrap());
        }
    }

    #[test]
    fn ensemble_files_round_trip(seed in any::<u64>(), shots in 1u64..40, p in 0.0f64..1.0) {
        let codes = [StabilizerCode::five_qubit(), StabilizerCode::five_qubit()];
        let ens = acquire_ensemble(&codes, &LogicalStatePrep::ghz(2), NoiseSpec::new(p, seed), shots).unwrap();
        let bytes = shadow::encode_ensemble(&ens);
        let back: ShadowEnsemble = shadow::decode_ensemble(&bytes).unwrap();
        prop_assert_eq!(&back, &ens);
        prop_assert_eq!(shadow::encode_ensemble(&back), bytes);
    }

    #[test]
    fn code_files_round_trip(n in 2usize..=9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = CliffordElement::sample(n, &mut rng).unwrap();
        let gens: Vec<PauliOp> = (1..n).map(|j| u.image_z(j)).collect();
        let code = StabilizerCode::new("r", None, gens, vec![u.image_x(0)], vec![u.image_z(0)]).unwrap();
        prop_assert_eq!(load_code(&code.to_text()).unwrap(), code);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moments_are_linear_in_the_observable(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let code = StabilizerCode::five_qubit();
        let ens = acquire_ensemble(std::slice::from_ref(&code), &LogicalStatePrep::zero(1), NoiseSpec::new(0.1, seed), 40).unwrap();
        let z = code.lift_logical(&"Z".parse().unwrap()).unwrap();
        let x = code.lift_logical(&"X".parse().unwrap()).unwrap();
        let sum = lst_core::pauli::PauliSum::new(vec![(a, "Z".parse().unwrap()), (b, "X".parse().unwrap())]).unwrap();
        for m in [1usize, 2] {
            let cfg = EstimatorConfig { bootstrap: 0, ..EstimatorConfig::power(m) };
            let mz = projected_moment(&ens, &code, &z, m, &cfg).unwrap().mean;
            let mx = projected_moment(&ens, &code, &x, m, &cfg).unwrap().mean;
            let r = lst_core::estimator::lst_expectation(&ens, &code, &sum, &cfg).unwrap();
            prop_assert!((r.numerator_mean - (a * mz + b * mx)).abs() < 1e-9);
        }
    }

    #[test]
    fn estimates_are_invariant_under_permutation(seed in any::<u64>(), perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let code = StabilizerCode::five_qubit();
        let ens = acquire_ensemble(std::slice::from_ref(&code), &LogicalStatePrep::zero(1), NoiseSpec::new(0.1, seed), 60).unwrap();
        let z = code.lift_logical(&"Z".parse().unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        for m in [1usize, 2] {
            let cfg = EstimatorConfig { bootstrap: 0, ..EstimatorConfig::power(m) };
            let base = projected_moment(&ens, &code, &z, m, &cfg).unwrap().mean;
            // Permute whole tuples.
            let mut tuples: Vec<_> = ens.snapshots.chunks(m).map(|c| c.to_vec()).collect();
            tuples.shuffle(&mut rng);
            let mut shuffled = ens.clone();
            shuffled.snapshots = tuples.concat();
            let moved = projected_moment(&shuffled, &code, &z, m, &cfg).unwrap().mean;
            prop_assert!((base - moved).abs() < 1e-9 * base.abs().max(1.0));
        }
    }
}
