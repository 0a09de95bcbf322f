//! Randomized invariants for the physics, measurement, and classifier
//! layers. Each property states something that must hold for every input in
//! its domain, with test-side oracles kept independent of the library code
//! they check.

use std::f64::consts::TAU;

use proptest::prelude::*;

use qsep::ann::{loss_and_gradients, predict, Arch, Model};
use qsep::linalg::{c, from_eigen, hermitian_eigen, kron, Mat2, Mat4};
use qsep::measure::{
    chsh_sign_patterns, chsh_value, features_exact, FeaturePlan, DEFAULT_CHSH_SIGNS,
};
use qsep::quantum::{
    concurrence, ket_from_params, ppt_boundary, ppt_label, project_to_physical, werner_like,
    DensityMatrix, Ket, SeparabilityLabel, PSD_TOL,
};
use qsep::tomography::{pauli_table_exact, reconstruct_from_table};

/// Mixing angle, relative phase, and mixing weight of one family state.
fn family_params() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.01f64..1.55f64, 0.0f64..TAU, 0.0f64..=1.0f64)
}

fn family_state(theta: f64, phi: f64, p: f64) -> DensityMatrix {
    let pure = ket_from_params(theta, phi).unwrap().density();
    werner_like(&pure, p).unwrap()
}

/// Test-side partial transpose on the second factor: index pair (b, d) of
/// element ((a b),(c d)) swaps.
fn pt_oracle(m: &Mat4) -> Mat4 {
    let mut out = Mat4::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    out.0[2 * a + b][2 * cc + d] = m.0[2 * a + d][2 * cc + b];
                }
            }
        }
    }
    out
}

/// Random Hermitian matrix from sixteen raw complex entries.
fn hermitian_from(raw: &[(f64, f64)]) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let (re, im) = raw[4 * i + j];
            m.0[i][j] = c(re, im);
        }
    }
    m.add(&m.adjoint()).scale(0.5)
}

/// Determinant-one single-qubit unitary from three angles.
fn unitary2(a: f64, beta: f64, gamma: f64) -> Mat2 {
    let mut u = Mat2::zeros();
    u.0[0][0] = c(beta.cos(), beta.sin()) * a.cos();
    u.0[0][1] = c(gamma.cos(), gamma.sin()) * a.sin();
    u.0[1][0] = c(-gamma.cos(), gamma.sin()) * a.sin();
    u.0[1][1] = c(beta.cos(), -beta.sin()) * a.cos();
    u
}

/// Product ket (a|H> + b|V>) x (c|H> + d|V>) from four Bloch angles.
fn product_ket(a1: f64, b1: f64, a2: f64, b2: f64) -> Ket {
    let one = [c((a1 / 2.0).cos(), 0.0), {
        let s = (a1 / 2.0).sin();
        c(b1.cos() * s, b1.sin() * s)
    }];
    let two = [c((a2 / 2.0).cos(), 0.0), {
        let s = (a2 / 2.0).sin();
        c(b2.cos() * s, b2.sin() * s)
    }];
    Ket::new([
        one[0] * two[0],
        one[0] * two[1],
        one[1] * two[0],
        one[1] * two[1],
    ])
    .unwrap()
}

proptest! {
    #[test]
    fn partial_transpose_is_an_involution_that_keeps_the_trace(
        (theta, phi, p) in family_params()
    ) {
        let rho = family_state(theta, phi, p);
        let pt = rho.partial_transpose();
        prop_assert!(pt_oracle(&pt).max_abs_diff(rho.matrix()) <= 1e-15);
        prop_assert!((pt.trace().re - 1.0).abs() <= 1e-12);
        prop_assert!(pt.trace().im.abs() <= 1e-12);
    }

    #[test]
    fn eigenvalues_sum_to_the_trace_and_rebuild_the_matrix(
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)
    ) {
        let h = hermitian_from(&raw);
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        let sum: f64 = vals.iter().sum();
        prop_assert!((sum - h.trace().re).abs() <= 1e-10);
        prop_assert!(from_eigen(&vals, &vecs).max_abs_diff(&h) <= 1e-9);
    }

    #[test]
    fn entanglement_measures_stay_in_range((theta, phi, p) in family_params()) {
        let rho = family_state(theta, phi, p);
        let purity = rho.purity();
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&purity));
        let conc = concurrence(&rho);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&conc));
        ppt_label(&rho, PSD_TOL).unwrap();
    }

    #[test]
    fn local_rotations_change_no_entanglement_measure(
        (theta, phi, p) in family_params(),
        angles in proptest::array::uniform6(0.0f64..TAU)
    ) {
        let rho = family_state(theta, phi, p);
        let u = kron(
            &unitary2(angles[0], angles[1], angles[2]),
            &unitary2(angles[3], angles[4], angles[5]),
        );
        let rotated = DensityMatrix::new(u.mul(rho.matrix()).mul(&u.adjoint())).unwrap();
        prop_assert!((concurrence(&rotated) - concurrence(&rho)).abs() <= 1e-8);
        prop_assert!((rotated.purity() - rho.purity()).abs() <= 1e-10);
    }

    #[test]
    fn correlators_scale_linearly_with_the_mixing_weight(
        (theta, phi, p) in family_params()
    ) {
        let pure = ket_from_params(theta, phi).unwrap().density();
        let mixed = werner_like(&pure, p).unwrap();
        for plan in [FeaturePlan::xz(), FeaturePlan::xyz(), FeaturePlan::xz_chsh()] {
            let full = features_exact(&pure, &plan);
            let scaled = features_exact(&mixed, &plan);
            for i in 0..4 {
                prop_assert!((scaled.0[i] - p * full.0[i]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn chsh_never_beats_the_quantum_bound((theta, phi, p) in family_params()) {
        let rho = family_state(theta, phi, p);
        let plan = FeaturePlan::xz_chsh();
        let s = chsh_value(&rho, &plan, DEFAULT_CHSH_SIGNS).unwrap();
        prop_assert!(s.abs() <= 2.0 * std::f64::consts::SQRT_2 + 1e-9);
    }

    #[test]
    fn product_states_never_violate(
        bloch in proptest::array::uniform4(0.0f64..TAU)
    ) {
        let rho = product_ket(bloch[0], bloch[1], bloch[2], bloch[3]).density();
        for plan in [FeaturePlan::xz(), FeaturePlan::xz_chsh(), FeaturePlan::xyz()] {
            for signs in chsh_sign_patterns() {
                let s = chsh_value(&rho, &plan, signs).unwrap();
                prop_assert!(s.abs() <= 2.0 + 1e-9);
            }
        }
    }

    #[test]
    fn projection_fixes_physical_states_and_repairs_perturbed_ones(
        (theta, phi, p) in family_params(),
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        scale in 0.0f64..0.2
    ) {
        let rho = family_state(theta, phi, p);
        let fixed = project_to_physical(rho.matrix()).unwrap();
        prop_assert!(fixed.matrix().max_abs_diff(rho.matrix()) <= 1e-9);
        // Shot noise in a linear inversion never moves the trace, so the
        // projection domain is trace-one matrices; keep the noise traceless.
        let h = hermitian_from(&raw);
        let traceless = h.sub(&Mat4::identity().scale(h.trace().re / 4.0));
        let noisy = rho.matrix().add(&traceless.scale(scale));
        let repaired = project_to_physical(&noisy).unwrap();
        prop_assert!((repaired.matrix().trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(repaired.eigenvalues().iter().all(|&v| v >= -PSD_TOL));
    }

    #[test]
    fn exact_tables_invert_to_the_source_state((theta, phi, p) in family_params()) {
        let rho = family_state(theta, phi, p);
        let rebuilt = reconstruct_from_table(&pauli_table_exact(&rho)).unwrap();
        prop_assert!(rebuilt.matrix().max_abs_diff(rho.matrix()) <= 1e-9);
    }

    #[test]
    fn the_boundary_separates_the_family(
        theta in 0.05f64..1.52, phi in 0.0f64..TAU
    ) {
        let boundary = ppt_boundary(theta, phi).unwrap().unwrap();
        let below = family_state(theta, phi, boundary - 0.02);
        let above = family_state(theta, phi, boundary + 0.02);
        prop_assert_eq!(ppt_label(&below, PSD_TOL).unwrap(), SeparabilityLabel::Separable);
        prop_assert_eq!(ppt_label(&above, PSD_TOL).unwrap(), SeparabilityLabel::Entangled);
    }

    #[test]
    fn forward_stays_strictly_inside_the_unit_interval(
        hidden in 1usize..24,
        seedlets in proptest::collection::vec(-3.0f64..3.0, 24),
        x in proptest::array::uniform4(-10.0f64..10.0)
    ) {
        for arch in [Arch::Linear, Arch::Mlp { hidden }] {
            let params: Vec<f64> = (0..arch.n_params())
                .map(|i| seedlets[i % seedlets.len()] * (1.0 + (i as f64 * 0.37).sin()))
                .collect();
            let model = Model::from_flat(arch, &params).unwrap();
            let out = model.forward(&x);
            prop_assert!(out.is_finite() && out > 0.0 && out < 1.0);
        }
    }

    #[test]
    fn linear_decisions_ignore_positive_rescaling(
        weights in proptest::array::uniform5(-2.0f64..2.0),
        lambda in 1e-3f64..1e3,
        x in proptest::array::uniform4(-1.0f64..1.0)
    ) {
        let base = Model::from_flat(Arch::Linear, &weights).unwrap();
        let scaled_params: Vec<f64> = weights.iter().map(|w| w * lambda).collect();
        let scaled = Model::from_flat(Arch::Linear, &scaled_params).unwrap();
        prop_assert_eq!(predict(&base, &x, 0.5), predict(&scaled, &x, 0.5));
    }

    #[test]
    fn gradients_vanish_only_with_the_loss_floor(
        x in proptest::array::uniform4(-1.0f64..1.0),
        label in any::<bool>()
    ) {
        // A correct, extremely confident linear model sits on the loss floor;
        // its gradient must be tiny rather than NaN.
        let sign = if label { 1.0 } else { -1.0 };
        let params = [40.0 * sign * x[0], 40.0 * sign * x[1], 40.0 * sign * x[2], 40.0 * sign * x[3], sign];
        let model = Model::from_flat(Arch::Linear, &params).unwrap();
        let (loss, grad) = loss_and_gradients(&model, &[x], &[label]).unwrap();
        prop_assert!(loss.is_finite() && loss >= 0.0);
        prop_assert!(grad.iter().all(|g| g.is_finite()));
    }
}
