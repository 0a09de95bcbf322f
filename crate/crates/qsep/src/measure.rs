//! Correlation measurements: exact two-qubit correlators, CHSH combinations,
//! and finite-shot sampling of joint ±1 outcomes.
//!
//! A measurement setting is a pair of Bloch directions (a, b), one per
//! photon; the observable is (a·σ) ⊗ (b·σ) with outcomes in {+1, −1}².

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, kron, Mat2};
use crate::quantum::{pauli_x, pauli_y, pauli_z, DensityMatrix, SeparabilityLabel};
use crate::stream::multinomial4;

/// Unit vector on the Bloch sphere; constructor enforces |n| = 1 within 1e-12.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochDirection {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochDirection {
    pub const X: BlochDirection = BlochDirection { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: BlochDirection = BlochDirection { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: BlochDirection = BlochDirection { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "direction ({x}, {y}, {z}) has norm {norm}, expected 1"
            )));
        }
        Ok(BlochDirection { x, y, z })
    }

    /// Convenience constructor that rescales a nonzero vector to unit length.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::Domain(
                "cannot normalize a (near-)zero direction".into(),
            ));
        }
        Ok(BlochDirection {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    pub fn approx_eq(&self, other: &BlochDirection, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && (self.z - other.z).abs() <= tol
    }
}

/// n·σ for a unit Bloch direction; Hermitian, traceless, eigenvalues ±1.
pub fn pauli_from_direction(n: &BlochDirection) -> Mat2 {
    let mut m = Mat2::zeros();
    m = m.add(&pauli_x().scale(n.x));
    m = m.add(&pauli_y().scale(n.y));
    m = m.add(&pauli_z().scale(n.z));
    m
}

/// The four analyzer settings of one feature acquisition, in the fixed order
/// (a₀b₀, a₀b₀′, a₀′b₀, a₀′b₀′).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePlan {
    pub name: String,
    pub a0: BlochDirection,
    pub a0_prime: BlochDirection,
    pub b0: BlochDirection,
    pub b0_prime: BlochDirection,
}

impl FeaturePlan {
    /// Main x-z-plane plan: a₀ = z, a₀′ = x, b₀ = (z+x)/√2, b₀′ = (z−x)/√2.
    pub fn xz() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        FeaturePlan {
            name: "xz".into(),
            a0: BlochDirection::Z,
            a0_prime: BlochDirection::X,
            b0: BlochDirection::new(s, 0.0, s).unwrap(),
            b0_prime: BlochDirection::new(-s, 0.0, s).unwrap(),
        }
    }

    /// x-z-plane plan rotated so the standard sign pattern (+,−,+,+) is the
    /// maximally violating CHSH combination: b₀ = (x−z)/√2, b₀′ = (x+z)/√2.
    pub fn xz_chsh() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        FeaturePlan {
            name: "xz-chsh".into(),
            a0: BlochDirection::Z,
            a0_prime: BlochDirection::X,
            b0: BlochDirection::new(s, 0.0, -s).unwrap(),
            b0_prime: BlochDirection::new(s, 0.0, s).unwrap(),
        }
    }

    /// Out-of-plane plan used by the phase-sensitive protocol:
    /// a₀ = z, a₀′ = x, b₀ = (x+y+z)/√3, b₀′ = (z+y)/√2. All four feature
    /// columns are nonzero on the protocol family and the map stays sensitive
    /// to the relative phase.
    pub fn xyz() -> Self {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let s3 = 1.0 / 3.0f64.sqrt();
        FeaturePlan {
            name: "xyz".into(),
            a0: BlochDirection::Z,
            a0_prime: BlochDirection::X,
            b0: BlochDirection::new(s3, s3, s3).unwrap(),
            b0_prime: BlochDirection::new(0.0, s2, s2).unwrap(),
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "xz" => Ok(Self::xz()),
            "xz-chsh" => Ok(Self::xz_chsh()),
            "xyz" => Ok(Self::xyz()),
            other => Err(Error::InvalidConfig(format!(
                "unknown measurement plan '{other}' (known: xz, xz-chsh, xyz)"
            ))),
        }
    }

    pub fn settings(&self) -> [(BlochDirection, BlochDirection); 4] {
        [
            (self.a0, self.b0),
            (self.a0, self.b0_prime),
            (self.a0_prime, self.b0),
            (self.a0_prime, self.b0_prime),
        ]
    }

    pub fn approx_eq(&self, other: &FeaturePlan, tol: f64) -> bool {
        self.a0.approx_eq(&other.a0, tol)
            && self.a0_prime.approx_eq(&other.a0_prime, tol)
            && self.b0.approx_eq(&other.b0, tol)
            && self.b0_prime.approx_eq(&other.b0_prime, tol)
    }
}

/// The four correlators of a plan, each in [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; 4]);

impl FeatureVector {
    pub fn new(values: [f64; 4]) -> Result<Self> {
        for v in values {
            if !v.is_finite() || v.abs() > 1.0 + 1e-9 {
                return Err(Error::Domain(format!(
                    "correlator {v} outside [-1, 1]"
                )));
            }
        }
        Ok(FeatureVector(values.map(|v| v.clamp(-1.0, 1.0))))
    }
}

/// tr(ρ (a·σ ⊗ b·σ)). Exact; the imaginary part of the trace vanishes for
/// Hermitian inputs and is discarded after a roundoff check.
pub fn correlator_exact(rho: &DensityMatrix, a: &BlochDirection, b: &BlochDirection) -> f64 {
    let obs = kron(&pauli_from_direction(a), &pauli_from_direction(b));
    let mut tr = c(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            tr += rho.matrix().0[i][j] * obs.0[j][i];
        }
    }
    debug_assert!(tr.im.abs() < 1e-12);
    tr.re.clamp(-1.0, 1.0)
}

/// Exact feature vector of a state under a plan.
pub fn features_exact(rho: &DensityMatrix, plan: &FeaturePlan) -> FeatureVector {
    let f = plan
        .settings()
        .map(|(a, b)| correlator_exact(rho, &a, &b));
    FeatureVector::new(f).expect("exact correlators lie in [-1, 1]")
}

/// Default sign pattern for the CHSH combination: (+1, -1, +1, +1).
pub const DEFAULT_CHSH_SIGNS: [i8; 4] = [1, -1, 1, 1];

/// S = Σᵢ signᵢ ⟨aᵢ bᵢ⟩ over the plan's four settings.
pub fn chsh_value(rho: &DensityMatrix, plan: &FeaturePlan, signs: [i8; 4]) -> Result<f64> {
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::Domain(format!(
            "CHSH signs must be +1 or -1, got {signs:?}"
        )));
    }
    let FeatureVector(f) = features_exact(rho, plan);
    Ok(f.iter().zip(signs.iter()).map(|(&fi, &s)| s as f64 * fi).sum())
}

/// The eight sign patterns with an odd number of minus signs: exactly those
/// combinations that are CHSH inequalities (classically bounded by 2 and by
/// 2√2 for quantum states). Patterns with an even count are excluded; they
/// are not Bell inequalities (a product state reaches 4).
pub fn chsh_sign_patterns() -> [[i8; 4]; 8] {
    let mut out = [[0i8; 4]; 8];
    let mut k = 0;
    for bits in 0..16u8 {
        let signs = [
            if bits & 1 != 0 { -1 } else { 1 },
            if bits & 2 != 0 { -1 } else { 1 },
            if bits & 4 != 0 { -1 } else { 1 },
            if bits & 8 != 0 { -1 } else { 1 },
        ];
        if signs.iter().filter(|&&s| s == -1).count() % 2 == 1 {
            out[k] = signs;
            k += 1;
        }
    }
    out
}

/// Max of |S| over the CHSH sign patterns, with the pattern attaining it.
/// |S| is invariant under a global sign flip, so four distinct values are
/// probed.
pub fn chsh_max_violation(rho: &DensityMatrix, plan: &FeaturePlan) -> (f64, [i8; 4]) {
    let mut best = (f64::NEG_INFINITY, [1i8; 4]);
    for signs in chsh_sign_patterns() {
        let s = chsh_value(rho, plan, signs).expect("patterns are valid");
        if s.abs() > best.0 {
            best = (s.abs(), signs);
        }
    }
    best
}

/// The unoptimized classifier: Entangled iff |f₁ − f₂ + f₃ + f₄| > 2,
/// i.e. the fixed weights {1, −1, 1, 1, −2} applied to the features.
pub fn chsh_classifier_standard(features: &FeatureVector) -> SeparabilityLabel {
    let f = features.0;
    if (f[0] - f[1] + f[2] + f[3]).abs() > 2.0 {
        SeparabilityLabel::Entangled
    } else {
        SeparabilityLabel::Separable
    }
}

/// Joint outcome counts of one setting: n_{s₁s₂} indexed (+,+), (+,−),
/// (−,+), (−,−).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub a: BlochDirection,
    pub b: BlochDirection,
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }

    pub fn counts(&self) -> [u64; 4] {
        [self.n_pp, self.n_pm, self.n_mp, self.n_mm]
    }

    pub fn from_counts(a: BlochDirection, b: BlochDirection, counts: [u64; 4]) -> Self {
        CountRecord {
            a,
            b,
            n_pp: counts[0],
            n_pm: counts[1],
            n_mp: counts[2],
            n_mm: counts[3],
        }
    }

    /// Empirical outcome distribution.
    pub fn probabilities(&self) -> Result<[f64; 4]> {
        let t = self.total();
        if t == 0 {
            return Err(Error::DegenerateData(
                "count record holds zero events".into(),
            ));
        }
        Ok(self.counts().map(|n| n as f64 / t as f64))
    }
}

/// Exact joint outcome probabilities tr(ρ (Π^a_{s₁} ⊗ Π^b_{s₂})) with
/// Π^n_± = (I ± n·σ)/2, ordered (+,+), (+,−), (−,+), (−,−).
pub fn joint_outcome_probabilities(
    rho: &DensityMatrix,
    a: &BlochDirection,
    b: &BlochDirection,
) -> Result<[f64; 4]> {
    let pa = pauli_from_direction(a);
    let pb = pauli_from_direction(b);
    let proj = |m: &Mat2, sign: f64| -> Mat2 { Mat2::identity().add(&m.scale(sign)).scale(0.5) };
    let mut probs = [0.0; 4];
    for (idx, (sa, sb)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .enumerate()
    {
        let op = kron(&proj(&pa, *sa), &proj(&pb, *sb));
        let mut tr = c(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                tr += rho.matrix().0[i][j] * op.0[j][i];
            }
        }
        if tr.re < -1e-12 {
            return Err(Error::Domain(format!(
                "outcome probability {:.3e} below zero",
                tr.re
            )));
        }
        probs[idx] = tr.re.max(0.0);
    }
    let total: f64 = probs.iter().sum();
    Ok(probs.map(|p| p / total))
}

/// Draw `shots` joint outcomes of setting (a, b) on ρ.
pub fn sample_counts(
    rho: &DensityMatrix,
    a: &BlochDirection,
    b: &BlochDirection,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be positive".into()));
    }
    let probs = joint_outcome_probabilities(rho, a, b)?;
    Ok(CountRecord::from_counts(
        *a,
        *b,
        multinomial4(rng, shots, probs),
    ))
}

/// Correlator estimate (n₊₊ − n₊₋ − n₋₊ + n₋₋)/N.
pub fn estimate_correlator(record: &CountRecord) -> Result<f64> {
    let t = record.total();
    if t == 0 {
        return Err(Error::DegenerateData(
            "cannot estimate a correlator from zero events".into(),
        ));
    }
    let num = record.n_pp as f64 - record.n_pm as f64 - record.n_mp as f64 + record.n_mm as f64;
    Ok(num / t as f64)
}

/// Sampled feature vector: one count record per plan setting.
pub fn features_sampled(
    rho: &DensityMatrix,
    plan: &FeaturePlan,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<(FeatureVector, Vec<CountRecord>)> {
    let mut records = Vec::with_capacity(4);
    let mut f = [0.0; 4];
    for (i, (a, b)) in plan.settings().iter().enumerate() {
        let rec = sample_counts(rho, a, b, shots, rng)?;
        f[i] = estimate_correlator(&rec)?;
        records.push(rec);
    }
    Ok((FeatureVector::new(f)?, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ket_from_params, werner_like};
    use crate::stream::{lanes, substream};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn bell() -> DensityMatrix {
        ket_from_params(FRAC_PI_4, 0.0).unwrap().density()
    }

    #[test]
    fn pauli_from_direction_has_unit_eigenvalues() {
        let n = BlochDirection::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2).unwrap();
        let [lo, hi] = pauli_from_direction(&n).hermitian_eigenvalues();
        assert_abs_diff_eq!(lo, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pauli_from_direction(&n).trace().norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn direction_constructor_rejects_non_unit_vectors() {
        assert!(BlochDirection::new(1.0, 1.0, 0.0).is_err());
        assert!(BlochDirection::new(0.0, 0.0, 0.0).is_err());
        assert!(BlochDirection::normalized(3.0, 0.0, 4.0).is_ok());
        assert!(BlochDirection::normalized(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn exact_correlators_of_the_bell_state() {
        let rho = bell();
        assert_abs_diff_eq!(
            correlator_exact(&rho, &BlochDirection::Z, &BlochDirection::Z),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            correlator_exact(&rho, &BlochDirection::X, &BlochDirection::X),
            1.0,
            epsilon = 1e-12
        );
        let diag = BlochDirection::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2).unwrap();
        assert_abs_diff_eq!(
            correlator_exact(&rho, &BlochDirection::Z, &diag),
            -FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bell_features_under_the_xz_plan() {
        let FeatureVector(f) = features_exact(&bell(), &FeaturePlan::xz());
        let s = FRAC_1_SQRT_2;
        assert_abs_diff_eq!(f[0], -s, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], -s, epsilon = 1e-12);
        assert_abs_diff_eq!(f[2], s, epsilon = 1e-12);
        assert_abs_diff_eq!(f[3], -s, epsilon = 1e-12);
    }

    #[test]
    fn features_scale_linearly_in_the_mixing_weight() {
        let rho1 = bell();
        let FeatureVector(f1) = features_exact(&rho1, &FeaturePlan::xz());
        for &p in &[0.2, 0.5, 0.8] {
            let FeatureVector(fp) =
                features_exact(&werner_like(&rho1, p).unwrap(), &FeaturePlan::xz());
            for k in 0..4 {
                assert_abs_diff_eq!(fp[k], p * f1[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn default_sign_pattern_vanishes_but_max_reaches_tsirelson_on_bell() {
        let rho = bell();
        let plan = FeaturePlan::xz();
        let s_default = chsh_value(&rho, &plan, DEFAULT_CHSH_SIGNS).unwrap();
        assert_abs_diff_eq!(s_default, 0.0, epsilon = 1e-12);
        let (max, pattern) = chsh_max_violation(&rho, &plan);
        assert_abs_diff_eq!(max, 2.0 * 2.0f64.sqrt(), epsilon = 1e-9);
        // The attaining pattern is (+,+,-,+) up to a global flip.
        let canonical: [i8; 4] = if pattern[0] == 1 {
            pattern
        } else {
            pattern.map(|s| -s)
        };
        assert_eq!(canonical, [1, 1, -1, 1]);
    }

    #[test]
    fn quarter_phase_kills_the_violation() {
        let rho = ket_from_params(FRAC_PI_4, FRAC_PI_2).unwrap().density();
        let (max, _) = chsh_max_violation(&rho, &FeaturePlan::xz());
        assert!(max <= 2.0 + 1e-12, "max violation {max}");
        assert_abs_diff_eq!(max, 2.0f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn chsh_value_rejects_bad_signs() {
        assert!(chsh_value(&bell(), &FeaturePlan::xz(), [1, 0, 1, 1]).is_err());
        assert!(chsh_value(&bell(), &FeaturePlan::xz(), [2, -1, 1, 1]).is_err());
    }

    #[test]
    fn standard_classifier_thresholds_at_two() {
        let over = FeatureVector::new([0.7, -0.7, 0.7, 0.7]).unwrap();
        let under = FeatureVector::new([0.4, -0.4, 0.4, 0.4]).unwrap();
        assert_eq!(chsh_classifier_standard(&over), SeparabilityLabel::Entangled);
        assert_eq!(chsh_classifier_standard(&under), SeparabilityLabel::Separable);
        // Exactly 2 does not violate.
        let edge = FeatureVector::new([0.5, -0.5, 0.5, 0.5]).unwrap();
        assert_eq!(chsh_classifier_standard(&edge), SeparabilityLabel::Separable);
    }

    #[test]
    fn product_state_outcomes_are_deterministic_under_aligned_settings() {
        // |HV>: first photon H (+1 under z), second V (-1 under z).
        let hv = crate::quantum::Ket::new([
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ])
        .unwrap()
        .density();
        let mut rng = substream(5, &[lanes::MEASURE, 0]);
        let rec =
            sample_counts(&hv, &BlochDirection::Z, &BlochDirection::Z, 1000, &mut rng).unwrap();
        assert_eq!(rec.n_pm, 1000);
        assert_eq!(rec.total(), 1000);
        assert_abs_diff_eq!(estimate_correlator(&rec).unwrap(), -1.0, epsilon = 0.0);
    }

    #[test]
    fn sampled_correlator_converges_to_the_exact_value() {
        // Bell state, a = z, b = (z+x)/sqrt2: exact correlator -1/sqrt2.
        // At 1e6 shots, 3 sigma of the estimator is below 0.005.
        let rho = bell();
        let diag = BlochDirection::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2).unwrap();
        let mut rng = substream(20180601, &[lanes::MEASURE, 1]);
        let rec = sample_counts(&rho, &BlochDirection::Z, &diag, 1_000_000, &mut rng).unwrap();
        let est = estimate_correlator(&rec).unwrap();
        assert!((est + FRAC_1_SQRT_2).abs() < 0.005, "estimate {est}");
    }

    #[test]
    fn estimator_concentrates_across_seeds() {
        // 100 independent 10k-shot runs: at least 99 estimates within
        // 4/sqrt(N) of the exact correlator (4 sigma, since var <= 1/N).
        let rho = werner_like(&bell(), 0.8).unwrap();
        let exact = correlator_exact(&rho, &BlochDirection::X, &BlochDirection::X);
        let n = 10_000u64;
        let bound = 4.0 / (n as f64).sqrt();
        let mut hits = 0;
        for run in 0..100u64 {
            let mut rng = substream(77, &[lanes::MEASURE, run]);
            let rec =
                sample_counts(&rho, &BlochDirection::X, &BlochDirection::X, n, &mut rng).unwrap();
            if (estimate_correlator(&rec).unwrap() - exact).abs() < bound {
                hits += 1;
            }
        }
        assert!(hits >= 99, "only {hits}/100 runs within 4 sigma");
    }

    #[test]
    fn estimate_requires_events() {
        let rec = CountRecord::from_counts(BlochDirection::Z, BlochDirection::Z, [0; 4]);
        assert!(estimate_correlator(&rec).is_err());
    }

    #[test]
    fn plans_resolve_by_name() {
        for name in ["xz", "xz-chsh", "xyz"] {
            assert_eq!(FeaturePlan::from_name(name).unwrap().name, name);
        }
        assert!(FeaturePlan::from_name("yz").is_err());
    }
}
