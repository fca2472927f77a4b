//! Randomised invariants across the library.

use proptest::prelude::*;
use qwires_core::bose::FockChain;
use qwires_core::classify::{classify, equivalent, random_gauge, random_normal_form};
use qwires_core::compile::{basis_action, simulate_bases};
use qwires_core::coupler::{entangling_gate, solve_coupling_angles};
use qwires_core::mat::c;
use qwires_core::mps::{transfer_channel, WireTensor};
use qwires_core::random::{random_unit_vec2, random_wire, seeded};
use qwires_core::{NormalFormWire, Verdict};
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn classification_is_gauge_invariant(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let nf = random_normal_form(&mut rng);
        let t = random_gauge(&nf.tensor(), rng.gen());
        let report = classify(&t, 1e-9).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Wire);
        let found = report.normal_form.unwrap();
        prop_assert!(equivalent(&found, &nf, 1e-7), "{:?} vs {:?}", found, nf);
        prop_assert!(report.reconstruction_residual.unwrap() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn trajectories_match_exact_simulation(seed in any::<u64>(), n in 3usize..=12) {
        let mut rng = seeded(seed);
        let nf = random_normal_form(&mut rng);
        let k = rng.gen_range(1..n);
        let thetas: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let init = random_unit_vec2(&mut rng);
        let run = simulate_bases(&nf, &thetas, &init, n, &mut rng).unwrap();
        prop_assert_eq!(run.trajectory.len(), k);
        prop_assert!(run.max_prob_deviation < 1e-10);
        prop_assert!((run.state_fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn random_wires_are_normalized_channels(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let t: WireTensor = random_wire(&mut rng);
        prop_assert!(t.normalization_defect() < 1e-12);
        prop_assert!(transfer_channel(&t).trace_preservation_residual() < 1e-12);
        // A Haar-random preparation is generically not a wire.
        let report = classify(&t, 1e-9).unwrap();
        prop_assert!(report.verdict != Verdict::Wire || report.unitality_residual < 1e-9);
    }

    #[test]
    fn normal_forms_are_unital(seed in any::<u64>()) {
        let nf = random_normal_form(&mut seeded(seed));
        let ch = transfer_channel(&nf.tensor());
        prop_assert!(ch.unitality_residual() < 1e-12);
        prop_assert!(ch.trace_preservation_residual() < 1e-12);
    }

    #[test]
    fn branch_probabilities_are_complete(seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let nf = random_normal_form(&mut seeded(seed));
        let (b0, b1) = basis_action(&nf, theta);
        prop_assert!((b0.prob + b1.prob - 1.0).abs() < 1e-12);
        prop_assert!((b0.unitary.determinant() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn coupling_gate_is_unitary(phi in 0.1..(std::f64::consts::TAU - 0.1)) {
        let nf = NormalFormWire::new(qwires_core::classify::hadamard_su2(), phi).unwrap();
        let g = entangling_gate(&nf, &solve_coupling_angles(phi).unwrap()).unwrap();
        prop_assert!(g.unitarity_defect < 1e-8);
        prop_assert!(g.schmidt[1] > 1e-6);
    }

    #[test]
    fn hopping_preserves_norm_and_number(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let mut s = FockChain::initial_state(3, 3).unwrap();
        for _ in 0..6 {
            s = s.hop_pair(rng.gen_range(0..5), rng.gen_range(-1.0..1.0)).unwrap();
        }
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        prop_assert!((s.mean_particle_number() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn measured_states_stay_normalized(seed in any::<u64>()) {
        use qwires_core::oracle::{measure_site, prepare_from_mps, Branch};
        use qwires_core::trajectory::Basis;
        let mut rng = seeded(seed);
        let nf = random_normal_form(&mut rng);
        let s = prepare_from_mps(&nf.tensor(), 6, 14).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        let (rec, post) = measure_site(&s, 2, &Basis::theta(rng.gen()), Branch::Sample(&mut rng)).unwrap();
        prop_assert!((post.norm() - 1.0).abs() < 1e-12);
        prop_assert!(rec.prob > 0.0 && rec.prob <= 1.0);
    }
}
