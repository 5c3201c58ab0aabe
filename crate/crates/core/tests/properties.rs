use ensemble_aqc::entanglement::{log_negativity, partial_transpose, BipartiteState, Subsystem};
use ensemble_aqc::instances::random_instance;
use ensemble_aqc::landscape::{corner_trajectory_energy, qubit_ground_state, trajectory_energy};
use ensemble_aqc::symspace::{hamiltonian, FockBasis};
use ensemble_aqc::ProblemInstance;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn instance_strategy() -> impl Strategy<Value = ProblemInstance> {
    (1usize..6).prop_flat_map(|m| {
        (
            prop::collection::vec(-1.0f64..1.0, m * (m - 1) / 2),
            prop::collection::vec(-1.0f64..1.0, m),
        )
            .prop_map(move |(upper, k)| {
                let mut j = vec![vec![0.0; m]; m];
                let mut it = upper.into_iter();
                for a in 0..m {
                    for b in (a + 1)..m {
                        let v = it.next().unwrap();
                        j[a][b] = v;
                        j[b][a] = v;
                    }
                }
                ProblemInstance::new(j, k).unwrap()
            })
    })
}

/// Random density matrix `A A^dag / tr` of dimension `d`.
fn density_of(d: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |entries| {
        let a = DMatrix::from_iterator(d, d, entries.into_iter().map(|(re, im)| Complex64::new(re, im)));
        let rho = &a * a.adjoint();
        let rho = &rho / rho.trace();
        (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0)
    })
}

fn density_strategy() -> impl Strategy<Value = (DMatrix<Complex64>, usize, usize)> {
    (1usize..4, 1usize..4).prop_flat_map(|(d1, d2)| density_of(d1 * d2).prop_map(move |rho| (rho, d1, d2)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_documents_round_trip(inst in instance_strategy()) {
        let back = ProblemInstance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn trajectories_never_dip_below_ground(seed in any::<u64>(), m in 2usize..6, eps in 0.0f64..=1.0, raw in prop::collection::vec(0.0f64..=1.0, 6), top in 0usize..6) {
        let inst = random_instance(m, seed).unwrap();
        let sigma = qubit_ground_state(&inst).unwrap().sigma_star;
        let mut alpha = raw[..m].to_vec();
        alpha[top % m] = 1.0;
        prop_assert!(trajectory_energy(&inst, &sigma, &alpha, eps).unwrap() >= -1e-12);
        let flips: Vec<bool> = alpha.iter().map(|&a| a > 0.5).collect();
        prop_assert!(corner_trajectory_energy(&inst, &sigma, &flips, eps).unwrap() >= -1e-12);
    }

    #[test]
    fn annealing_hamiltonian_is_symmetric(inst in instance_strategy(), n in 1usize..4, lambda in 0.0f64..=1.0) {
        prop_assume!(FockBasis::new(inst.m(), n).unwrap().dim() <= 256);
        let h = hamiltonian(&inst, n, lambda).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12);
        let dense = h.to_dense();
        prop_assert!((&dense - dense.transpose()).amax() <= 1e-12);
    }

    #[test]
    fn partial_transpose_is_a_trace_preserving_involution((rho, d1, d2) in density_strategy()) {
        let state = BipartiteState::new(rho.clone(), d1, d2).unwrap();
        for which in [Subsystem::First, Subsystem::Second] {
            let once = partial_transpose(&state, which);
            prop_assert!((once.trace() - rho.trace()).norm() <= 1e-12);
            let twice = partial_transpose(&BipartiteState::new(once, d1, d2).unwrap(), which);
            prop_assert!((twice - &rho).camax() <= 1e-15);
        }
        prop_assert!(log_negativity(&state).unwrap() >= 0.0);
    }

    #[test]
    fn product_states_have_no_negativity((a, b) in (1usize..4, 1usize..4).prop_flat_map(|(d1, d2)| (density_of(d1), density_of(d2)))) {
        let state = BipartiteState::new(a.kronecker(&b), a.nrows(), b.nrows()).unwrap();
        prop_assert!(log_negativity(&state).unwrap() <= 1e-10);
    }
}
