use floquet_dd::floquet::{
    coherence_floquet, envelope_general, floquet_pair, thermal_coherence_numeric, unit_cell, ConditionalHamiltonians,
    PulseSequence,
};
use floquet_dd::linalg::{inner, phase_distance};
use floquet_dd::pseudospin::{avg_hamiltonian_dip, coherence_analytic, floquet_phase, TwoStateModel};
use floquet_dd::ComplexMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn model() -> impl Strategy<Value = TwoStateModel> {
    (0.05f64..2.0, -2.0f64..2.0, -2.0f64..2.0, any::<bool>())
        .prop_map(|(x, zu, zd, neg)| TwoStateModel::from_xz(if neg { -x } else { x }, zu, zd).unwrap())
}

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let data = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        ComplexMatrix::from_row_major(data).hermitian_part()
    })
}

fn conditional() -> impl Strategy<Value = ConditionalHamiltonians> {
    prop_oneof![Just(2usize), Just(4), Just(8)]
        .prop_flat_map(|d| (hermitian(d), hermitian(d)))
        .prop_map(|(u, d)| ConditionalHamiltonians::new(u, d).unwrap())
}

fn eps0(m: &TwoStateModel) -> f64 {
    let (wu, wd) = (m.omega_u(), m.omega_d());
    0.5 * (wu * wu + wd * wd + 2.0 * wu * wd * m.cos_dtheta()).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_matches_propagation(m in model(), s in 0.01f64..8.0, n_p in 1u32..60) {
        let tau = s / eps0(&m);
        let a = coherence_analytic(&m, tau, n_p).unwrap().value;
        let cell = unit_cell(&m.conditional_hamiltonians(), &PulseSequence::ideal(tau, n_p).unwrap()).unwrap();
        let n = thermal_coherence_numeric(&cell, n_p).unwrap();
        prop_assert!((a - n).abs() < 1e-9, "{} vs {}", a, n);
        prop_assert!(a.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn coherence_starts_at_one(m in model(), n_p in 1u32..100) {
        let tau = 1e-9 / eps0(&m);
        let l = coherence_analytic(&m, tau, n_p).unwrap().value;
        prop_assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_tau_slope(m in model()) {
        let e0 = eps0(&m);
        let s = 1e-6 / e0;
        let slope = (floquet_phase(&m, 2.0 * s).unwrap() - floquet_phase(&m, s).unwrap()) / s;
        prop_assert!((slope - 4.0 * e0).abs() / (4.0 * e0) < 1e-4);
    }

    #[test]
    fn average_hamiltonian_identity(m in model()) {
        let a = avg_hamiltonian_dip(&m).unwrap();
        prop_assert!((a.tau_bar - std::f64::consts::PI / (4.0 * a.omega_av)).abs() <= 1e-14 * a.tau_bar);
    }

    #[test]
    fn phase_multisets_agree(ch in conditional(), tau in 0.05f64..2.0, delta in 0.0f64..0.5) {
        for d in [0.0, delta] {
            let cell = unit_cell(&ch, &PulseSequence::new(tau, 1, d, None).unwrap()).unwrap();
            let pair = floquet_pair(&cell).unwrap();
            prop_assert!(pair.phase_mismatch() < 1e-12);
            let mut pu = pair.spectrum_u.phases.clone();
            let mut pd = pair.spectrum_d.phases.clone();
            pu.sort_by(f64::total_cmp);
            pd.sort_by(f64::total_cmp);
            for (a, b) in pu.iter().zip(&pd) {
                prop_assert!(phase_distance(*a, *b) < 1e-12);
            }
        }
    }

    #[test]
    fn overlap_matrix_is_unitary(ch in conditional(), tau in 0.05f64..2.0) {
        let pair = floquet_pair(&unit_cell(&ch, &PulseSequence::ideal(tau, 1).unwrap()).unwrap()).unwrap();
        let n = pair.dim();
        for l in 0..n {
            let row: f64 = (0..n).map(|k| pair.overlap[l][k].norm_sqr()).sum();
            let col: f64 = (0..n).map(|k| pair.overlap[k][l].norm_sqr()).sum();
            prop_assert!((row - 1.0).abs() < 1e-10 && (col - 1.0).abs() < 1e-10);
            let direct = inner(pair.d_mode(l), &pair.spectrum_u.modes[l]);
            prop_assert!((direct - pair.overlap[l][l]).norm() < 1e-12);
        }
    }

    #[test]
    fn floquet_sum_matches_basis_average(ch in conditional(), tau in 0.05f64..2.0, n_p in 1u32..50) {
        let cell = unit_cell(&ch, &PulseSequence::ideal(tau, n_p).unwrap()).unwrap();
        let pair = floquet_pair(&cell).unwrap();
        let direct = thermal_coherence_numeric(&cell, n_p).unwrap();
        prop_assert!((coherence_floquet(&pair, n_p) - direct).abs() < 1e-9);
        let env = envelope_general(&pair);
        prop_assert!((env.coherence(n_p) - direct).abs() < 1e-9);
        prop_assert!(env.envelope <= direct + 1e-9 || env.terms.is_empty());
    }
}
