//! Two-qubit state tomography from joint Pauli measurements.
//!
//! Nine settings (a, b) ∈ {x, y, z}² determine all fifteen Pauli expectation
//! values: the joint terms directly, the single-qubit terms from marginals of
//! the joint counts. Linear inversion ρ̂ = (1/4) Σ T̂ᵢⱼ σᵢ⊗σⱼ is followed by a
//! spectral projection onto the physical cone, so every reconstruction is a
//! valid density matrix.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{kron, Mat2, Mat4};
use crate::measure::{sample_counts, BlochDirection, CountRecord};
use crate::quantum::{pauli_x, pauli_y, pauli_z, project_to_physical, DensityMatrix};

/// The nine tomography settings in row-major (a, b) order over {x, y, z}.
pub fn tomography_settings() -> [(BlochDirection, BlochDirection); 9] {
    let dirs = [BlochDirection::X, BlochDirection::Y, BlochDirection::Z];
    let mut out = [(BlochDirection::X, BlochDirection::X); 9];
    for (i, &a) in dirs.iter().enumerate() {
        for (j, &b) in dirs.iter().enumerate() {
            out[3 * i + j] = (a, b);
        }
    }
    out
}

/// Measure all nine Pauli settings with `shots` events each.
pub fn tomography_measure(
    rho: &DensityMatrix,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<Vec<CountRecord>> {
    tomography_settings()
        .iter()
        .map(|(a, b)| sample_counts(rho, a, b, shots, rng))
        .collect()
}

/// Estimated Pauli expectation table T̂ᵢⱼ, i, j ∈ {0, x, y, z}; T̂₀₀ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTable(pub [[f64; 4]; 4]);

/// Build the expectation table from nine tomography records (row-major
/// (a, b) order). Joint terms come straight from each record; each
/// single-qubit term is the average of its three marginal estimates.
pub fn pauli_table_from_counts(records: &[CountRecord]) -> Result<PauliTable> {
    if records.len() != 9 {
        return Err(Error::Domain(format!(
            "expected 9 tomography records, got {}",
            records.len()
        )));
    }
    let mut t = [[0.0f64; 4]; 4];
    t[0][0] = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            let rec = &records[3 * i + j];
            let total = rec.total();
            if total == 0 {
                return Err(Error::DegenerateData(
                    "tomography record holds zero events".into(),
                ));
            }
            let n = total as f64;
            let [pp, pm, mp, mm] = rec.counts().map(|k| k as f64);
            t[i + 1][j + 1] = (pp - pm - mp + mm) / n;
            // Marginals: A outcome ignores B and vice versa.
            t[i + 1][0] += (pp + pm - mp - mm) / n / 3.0;
            t[0][j + 1] += (pp - pm + mp - mm) / n / 3.0;
        }
    }
    Ok(PauliTable(t))
}

fn pauli_basis() -> [Mat2; 4] {
    [Mat2::identity(), pauli_x(), pauli_y(), pauli_z()]
}

/// Linear inversion ρ̂ = (1/4) Σᵢⱼ T̂ᵢⱼ σᵢ⊗σⱼ followed by the physical
/// projection (eigenvalue clipping with uniform redistribution).
pub fn reconstruct_from_table(table: &PauliTable) -> Result<DensityMatrix> {
    let basis = pauli_basis();
    let mut m = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let w = table.0[i][j];
            if w == 0.0 {
                continue;
            }
            m = m.add(&kron(&basis[i], &basis[j]).scale(w));
        }
    }
    project_to_physical(&m.scale(0.25))
}

/// Full pipeline: nine count records → physical density matrix.
pub fn reconstruct_density(records: &[CountRecord]) -> Result<DensityMatrix> {
    reconstruct_from_table(&pauli_table_from_counts(records)?)
}

/// Exact Pauli table of a state (oracle path; no sampling).
pub fn pauli_table_exact(rho: &DensityMatrix) -> PauliTable {
    let basis = pauli_basis();
    let mut t = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let obs = kron(&basis[i], &basis[j]);
            let mut tr = num_complex::Complex64::new(0.0, 0.0);
            for r in 0..4 {
                for s in 0..4 {
                    tr += rho.matrix().0[r][s] * obs.0[s][r];
                }
            }
            t[i][j] = tr.re;
        }
    }
    PauliTable(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{fidelity, ket_from_params, werner_like, DensityMatrix};
    use crate::stream::{lanes, substream};
    use std::f64::consts::FRAC_PI_4;

    fn bell_werner(p: f64) -> DensityMatrix {
        werner_like(&ket_from_params(FRAC_PI_4, 0.0).unwrap().density(), p).unwrap()
    }

    #[test]
    fn settings_cover_the_nine_pauli_pairs_in_order() {
        let s = tomography_settings();
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], (BlochDirection::X, BlochDirection::X));
        assert_eq!(s[1], (BlochDirection::X, BlochDirection::Y));
        assert_eq!(s[8], (BlochDirection::Z, BlochDirection::Z));
    }

    #[test]
    fn record_totals_equal_shots_and_mixed_state_correlators_vanish() {
        let mut rng = substream(3, &[lanes::MEASURE, 10]);
        let shots = 20_000u64;
        let recs =
            tomography_measure(&DensityMatrix::maximally_mixed(), shots, &mut rng).unwrap();
        assert_eq!(recs.len(), 9);
        let bound = 5.0 / (shots as f64).sqrt();
        for rec in &recs {
            assert_eq!(rec.total(), shots);
            let est = crate::measure::estimate_correlator(rec).unwrap();
            assert!(est.abs() < bound, "correlator {est} exceeds {bound}");
        }
    }

    #[test]
    fn bell_state_pauli_estimates() {
        let rho = bell_werner(1.0);
        let mut rng = substream(3, &[lanes::MEASURE, 11]);
        let recs = tomography_measure(&rho, 100_000, &mut rng).unwrap();
        let PauliTable(t) = pauli_table_from_counts(&recs).unwrap();
        // (xx, yy, zz) = (1, 1, -1) for (|HV> + |VH>)/sqrt2.
        assert!((t[1][1] - 1.0).abs() < 0.02);
        assert!((t[2][2] - 1.0).abs() < 0.02);
        assert!((t[3][3] + 1.0).abs() < 0.02);
        // Singles vanish.
        for k in 1..4 {
            assert!(t[k][0].abs() < 0.02);
            assert!(t[0][k].abs() < 0.02);
        }
    }

    #[test]
    fn exact_table_inverts_to_the_exact_state() {
        // Feeding exact expectations through the inversion is the identity.
        let mut rng = substream(8, &[lanes::MEASURE, 2]);
        for trial in 0..100 {
            let theta = rng.gen_range(0.0..FRAC_PI_4 * 2.0);
            let phi = rng.gen_range(0.0..std::f64::consts::PI);
            let p = rng.gen_range(0.0..1.0);
            let rho =
                werner_like(&ket_from_params(theta, phi).unwrap().density(), p).unwrap();
            let rebuilt = reconstruct_from_table(&pauli_table_exact(&rho)).unwrap();
            assert!(
                rebuilt.matrix().max_abs_diff(rho.matrix()) < 1e-9,
                "trial {trial}: inversion deviates"
            );
        }
    }

    #[test]
    fn proportional_counts_invert_to_the_exact_state() {
        // Bell-Werner(0.5) has joint outcome probabilities that are exact
        // multiples of 1/8, so scaled counts introduce no rounding at all.
        let rho = bell_werner(0.5);
        let mut records = Vec::new();
        for (a, b) in tomography_settings() {
            let probs = crate::measure::joint_outcome_probabilities(&rho, &a, &b).unwrap();
            let counts = probs.map(|p| (p * 8_000_000.0).round() as u64);
            assert_eq!(counts.iter().sum::<u64>(), 8_000_000);
            records.push(CountRecord::from_counts(a, b, counts));
        }
        let rebuilt = reconstruct_density(&records).unwrap();
        assert!(rebuilt.matrix().max_abs_diff(rho.matrix()) < 1e-9);
    }

    #[test]
    fn reconstruction_is_physical_and_accurate_across_seeds() {
        // 20 independent reconstructions at 1e5 shots: every one is a valid
        // state (constructor enforces that) with fidelity >= 0.99.
        let rho = bell_werner(0.8);
        for seed in 0..20u64 {
            let mut rng = substream(101, &[lanes::MEASURE, seed]);
            let recs = tomography_measure(&rho, 100_000, &mut rng).unwrap();
            let rebuilt = reconstruct_density(&recs).unwrap();
            let f = fidelity(&rebuilt, &rho);
            assert!(f >= 0.99, "seed {seed}: fidelity {f}");
            assert!(rebuilt.eigenvalues()[0] >= -1e-12);
        }
    }

    #[test]
    fn zero_records_are_rejected() {
        let records: Vec<CountRecord> = tomography_settings()
            .iter()
            .map(|&(a, b)| CountRecord::from_counts(a, b, [0; 4]))
            .collect();
        assert!(reconstruct_density(&records).is_err());
        assert!(pauli_table_from_counts(&records[..5]).is_err());
    }
}
