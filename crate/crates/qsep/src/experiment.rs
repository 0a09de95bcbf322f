//! Experimental pipeline simulation.
//!
//! A calibrated noisy pair source emits the entangled component; polarizer
//! projections supply the four product components. One pooled acquisition per
//! source setting records counts for every component under every measurement
//! setting, and mixtures at arbitrary weight p are then synthesized by
//! re-drawing events from the pool (time mixing with a seeded stream standing
//! in for the hardware randomness). Datasets pair the mixed features with
//! separability labels computed on the tomographic reconstruction of the very
//! same mixed counts, never on the ground-truth state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat4;
use crate::measure::{estimate_correlator, BlochDirection, CountRecord, FeaturePlan, FeatureVector};
use crate::quantum::{
    ket_from_params, min_pt_eigenvalue, ppt_boundary, ppt_label, werner_like, DensityMatrix, Ket,
    SeparabilityLabel, BOUNDARY_BISECTIONS,
};
use crate::stream::{binomial, derive_seed, lanes, multinomial4, seeded_rng};
use crate::tomography::{reconstruct_density, tomography_settings};

/// Calibration match tolerance on purity and concurrence.
pub const CALIBRATION_TOL: f64 = 1e-3;

/// Default number of events per (component, setting) pool cell.
pub const DEFAULT_SHOTS: u64 = 10_000;

/// Default master seed for dataset generation.
pub const DEFAULT_SEED: u64 = 20_180_601;

/// Imperfection model of the entangled-pair source.
///
/// The emitted state is v·D(ρ) + (1−v)·B, where D scales every off-diagonal
/// entry by d (coherence loss) and B is a background floor. `bg_asym` skews
/// the floor away from white noise: B = (1−a)·I/4 + a·diag(1/3, 1/3, 1/3, 0),
/// an accidental-coincidence profile that starves the VV mode. A flat floor
/// (a = 0) cannot reach every (purity, concurrence) pair a real source shows,
/// which is why the skew exists; see `calibrate_source`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    /// Depolarizing retention: weight of the (damped) signal state, in [0, 1].
    pub v: f64,
    /// Coherence retention: off-diagonal damping factor, in [0, 1].
    pub d: f64,
    /// Background asymmetry, in [0, 1]; 0 means a flat I/4 floor.
    #[serde(default)]
    pub bg_asym: f64,
}

impl SourceModel {
    /// Noiseless source: emits the ideal state unchanged.
    pub const IDEAL: SourceModel = SourceModel {
        v: 1.0,
        d: 1.0,
        bg_asym: 0.0,
    };

    pub fn new(v: f64, d: f64, bg_asym: f64) -> Result<Self> {
        let m = SourceModel { v, d, bg_asym };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("v", self.v), ("d", self.d), ("bg_asym", self.bg_asym)] {
            if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidConfig(format!(
                    "source parameter {name} = {x} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Background floor B = (1−a)·I/4 + a·diag(1/3, 1/3, 1/3, 0).
    pub fn background(&self) -> Mat4 {
        let a = self.bg_asym;
        let mut b = Mat4::identity().scale(0.25 * (1.0 - a));
        for (i, w) in [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0].iter().enumerate() {
            b.0[i][i] += a * w;
        }
        b
    }
}

/// Pass a state through the source imperfection model: damp every
/// off-diagonal entry by d, then mix v·ρ_damped + (1−v)·B.
pub fn apply_noise(rho: &DensityMatrix, m: &SourceModel) -> Result<DensityMatrix> {
    m.validate()?;
    let mut damped = *rho.matrix();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                damped.0[i][j] = damped.0[i][j].scale(m.d);
            }
        }
    }
    DensityMatrix::new(damped.scale(m.v).add(&m.background().scale(1.0 - m.v)))
}

/// A calibrated source model together with the values it actually achieves
/// on the maximally entangled reference state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub model: SourceModel,
    pub achieved_purity: f64,
    pub achieved_concurrence: f64,
}

/// Reference state for calibration: the θ = π/4, φ = 0 member of the family.
fn bell_reference() -> DensityMatrix {
    ket_from_params(std::f64::consts::FRAC_PI_4, 0.0)
        .expect("Bell parameters are in range")
        .density()
}

/// Find the source model whose noisy reference state matches the target
/// purity and concurrence within 1e-3.
///
/// On the reference state the model is analytically tame: with background
/// diagonal (b₀, b₀, b₀, b₃) and s = √(b₀b₃), the concurrence is
/// C = v·d − 2(1−v)·s, so for a fixed background the concurrence contour is
/// d(v) = (C + 2(1−v)s)/v, valid (d ≤ 1) for v ≥ (C+2s)/(1+2s). The search
/// walks the flattest background first (smallest `bg_asym` on a 1/64 grid),
/// scans purity along the contour, bisects the bracket, and closed-loop
/// verifies the result through the density-matrix purity and concurrence
/// routines. Infeasible targets report the nearest achievable point.
pub fn calibrate_source(target_purity: f64, target_concurrence: f64) -> Result<Calibration> {
    if !(0.25..=1.0).contains(&target_purity) || target_purity <= 0.25 {
        return Err(Error::Domain(format!(
            "target purity {target_purity} outside (0.25, 1]"
        )));
    }
    if !(0.0..=1.0).contains(&target_concurrence) {
        return Err(Error::Domain(format!(
            "target concurrence {target_concurrence} outside [0, 1]"
        )));
    }
    let bell = bell_reference();
    let c0 = target_concurrence;

    let evaluate = |v: f64, a: f64| -> Result<Calibration> {
        let b0 = (3.0 + a) / 12.0;
        let b3 = (1.0 - a) / 4.0;
        let s = (b0 * b3).sqrt();
        let d = ((c0 + 2.0 * (1.0 - v) * s) / v).clamp(0.0, 1.0);
        let model = SourceModel { v, d, bg_asym: a };
        let noisy = apply_noise(&bell, &model)?;
        Ok(Calibration {
            model,
            achieved_purity: noisy.purity(),
            achieved_concurrence: crate::quantum::concurrence(&noisy),
        })
    };

    let mut nearest: Option<Calibration> = None;
    let mut nearest_miss = f64::INFINITY;

    for k in 0..=64u32 {
        let a = f64::from(k) / 64.0;
        let b0 = (3.0 + a) / 12.0;
        let b3 = (1.0 - a) / 4.0;
        let s = (b0 * b3).sqrt();
        // Smallest v with d(v) ≤ 1 on the concurrence contour.
        let v_min = ((c0 + 2.0 * s) / (1.0 + 2.0 * s)).min(1.0);
        const SCAN: usize = 256;
        let v_at = |i: usize| v_min + (1.0 - v_min) * i as f64 / SCAN as f64;
        let mut prev = evaluate(v_at(0), a)?;
        let mut bracket = None;
        for i in 1..=SCAN {
            let cur = evaluate(v_at(i), a)?;
            let (fp, fc) = (
                prev.achieved_purity - target_purity,
                cur.achieved_purity - target_purity,
            );
            if fp == 0.0 || fp * fc < 0.0 {
                bracket = Some((v_at(i - 1), v_at(i)));
                break;
            }
            let miss = fc.abs();
            if miss < nearest_miss {
                nearest_miss = miss;
                nearest = Some(cur);
            }
            prev = cur;
        }
        let Some((mut lo, mut hi)) = bracket else {
            continue;
        };
        let f_lo = evaluate(lo, a)?.achieved_purity - target_purity;
        for _ in 0..BOUNDARY_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let f_mid = evaluate(mid, a)?.achieved_purity - target_purity;
            if (f_lo < 0.0) == (f_mid < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cal = evaluate(0.5 * (lo + hi), a)?;
        if (cal.achieved_purity - target_purity).abs() <= CALIBRATION_TOL
            && (cal.achieved_concurrence - target_concurrence).abs() <= CALIBRATION_TOL
        {
            return Ok(cal);
        }
        let miss = (cal.achieved_purity - target_purity).abs();
        if miss < nearest_miss {
            nearest_miss = miss;
            nearest = Some(cal);
        }
    }

    let near = nearest.expect("scan always evaluates at least one point");
    Err(Error::Calibration(format!(
        "no source model reaches purity {target_purity} at concurrence {target_concurrence}; \
         nearest achievable: purity {:.6}, concurrence {:.6} at v = {:.6}, d = {:.6}, \
         bg_asym = {:.6}",
        near.achieved_purity,
        near.achieved_concurrence,
        near.model.v,
        near.model.d,
        near.model.bg_asym
    )))
}

/// Mixing weight at which the noisy family state p·ρ_src(θ,φ) + (1−p)·I/4
/// stops being PPT, or None if it is separable all the way to p = 1.
pub fn ppt_boundary_noisy(m: &SourceModel, theta: f64, phi: f64) -> Result<Option<f64>> {
    let noisy = apply_noise(&ket_from_params(theta, phi)?.density(), m)?;
    if min_pt_eigenvalue(&werner_like(&noisy, 1.0)?) >= 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BOUNDARY_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if min_pt_eigenvalue(&werner_like(&noisy, mid)?) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Mixture component: the entangled signal or one of the four polarization
/// product states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Entangled,
    HH,
    HV,
    VH,
    VV,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::Entangled,
        Component::HH,
        Component::HV,
        Component::VH,
        Component::VV,
    ];

    /// Basis index of the product component; None for the entangled signal.
    pub fn basis_index(&self) -> Option<usize> {
        match self {
            Component::Entangled => None,
            Component::HH => Some(0),
            Component::HV => Some(1),
            Component::VH => Some(2),
            Component::VV => Some(3),
        }
    }

    fn product_ket(&self) -> Option<Ket> {
        self.basis_index().map(|i| {
            let mut amp = [crate::linalg::c(0.0, 0.0); 4];
            amp[i] = crate::linalg::c(1.0, 0.0);
            Ket::new(amp).expect("basis kets are normalized")
        })
    }
}

/// All settings acquired per component: the four plan settings followed by
/// the nine tomography settings.
pub fn pool_settings(plan: &FeaturePlan) -> Vec<(BlochDirection, BlochDirection)> {
    let mut out = plan.settings().to_vec();
    out.extend_from_slice(&tomography_settings());
    out
}

/// Number of plan settings at the head of every pool record list.
pub const PLAN_SETTINGS: usize = 4;

/// One acquisition campaign for a single (θ, φ) source setting: counts for
/// all five components under all thirteen settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPool {
    pub theta: f64,
    pub phi: f64,
    pub plan: FeaturePlan,
    pub shots: u64,
    pub seed: u64,
    records: [Vec<CountRecord>; 5],
}

impl DataPool {
    /// Records for one component, in `pool_settings` order.
    pub fn records(&self, c: Component) -> &[CountRecord] {
        let idx = Component::ALL.iter().position(|x| *x == c).unwrap();
        &self.records[idx]
    }
}

/// Acquire the pool: the noisy entangled state and the four product states,
/// each measured for `shots` events under every setting. Product components
/// are projector outputs and carry no source noise.
pub fn build_pool(
    theta: f64,
    phi: f64,
    m: &SourceModel,
    plan: &FeaturePlan,
    shots: u64,
    seed: u64,
) -> Result<DataPool> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be positive".into()));
    }
    let settings = pool_settings(plan);
    let mut rng = seeded_rng(seed);
    let mut records: [Vec<CountRecord>; 5] = Default::default();
    for (slot, component) in Component::ALL.iter().enumerate() {
        let state = match component.product_ket() {
            None => apply_noise(&ket_from_params(theta, phi)?.density(), m)?,
            Some(ket) => ket.density(),
        };
        let recs: Result<Vec<CountRecord>> = settings
            .iter()
            .map(|(a, b)| crate::measure::sample_counts(&state, a, b, shots, &mut rng))
            .collect();
        records[slot] = recs?;
    }
    Ok(DataPool {
        theta,
        phi,
        plan: plan.clone(),
        shots,
        seed,
        records,
    })
}

/// Synthesize one mixed acquisition at weight p by re-drawing events from the
/// pool: per setting, each of `shots` events comes from the entangled
/// component with probability p and from a uniformly chosen product component
/// otherwise, with outcomes drawn from that component's recorded frequencies.
/// Returns the plan features and the tomographic reconstruction of the mixed
/// counts; the expected reconstruction is p·ρ_noisy + (1−p)·I/4.
pub fn mix_sample(
    pool: &DataPool,
    p: f64,
    rng: &mut impl Rng,
) -> Result<(FeatureVector, DensityMatrix)> {
    if !(0.01..=0.99).contains(&p) {
        return Err(Error::Domain(format!(
            "mixing weight p = {p} outside [0.01, 0.99]"
        )));
    }
    let settings = pool_settings(&pool.plan);
    let mut mixed: Vec<CountRecord> = Vec::with_capacity(settings.len());
    for (s, (a, b)) in settings.iter().enumerate() {
        let n_entangled = binomial(rng, pool.shots, p);
        let product_split = multinomial4(rng, pool.shots - n_entangled, [0.25; 4]);
        let mut outcome = [0u64; 4];
        for (slot, component) in Component::ALL.iter().enumerate() {
            let events = match component.basis_index() {
                None => n_entangled,
                Some(i) => product_split[i],
            };
            if events == 0 {
                continue;
            }
            let probs = pool.records[slot][s].probabilities()?;
            let drawn = multinomial4(rng, events, probs);
            for (acc, k) in outcome.iter_mut().zip(drawn) {
                *acc += k;
            }
        }
        mixed.push(CountRecord::from_counts(*a, *b, outcome));
    }
    let mut f = [0.0; 4];
    for (i, rec) in mixed[..PLAN_SETTINGS].iter().enumerate() {
        f[i] = estimate_correlator(rec)?;
    }
    let features = FeatureVector::new(f)?;
    let reconstruction = reconstruct_density(&mixed[PLAN_SETTINGS..])?;
    Ok((features, reconstruction))
}

/// Protocol family: boundary tracing along φ = 0 or phase discrimination
/// across φ classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Linear,
    Nonlinear,
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProtocolKind::Linear => "linear",
            ProtocolKind::Nonlinear => "nonlinear",
        })
    }
}

/// The five default half-angles, equally spaced up to the Bell point.
pub fn default_thetas() -> Vec<f64> {
    (1..=5)
        .map(|k| k as f64 * std::f64::consts::PI / 20.0)
        .collect()
}

/// Full description of a dataset-generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Measurement plan name, resolved via `FeaturePlan::from_name`.
    pub plan: String,
    pub shots: u64,
    /// Evenly spaced test grid p_min..=p_max with p_count points.
    pub p_min: f64,
    pub p_max: f64,
    pub p_count: u32,
    /// Half-width of the training window around the separability boundary.
    pub margin_halfwidth: f64,
    /// Training samples drawn per source setting inside the window.
    pub margin_draws: u32,
    pub seed: u64,
}

impl ProtocolSpec {
    /// Boundary-tracing protocol: five θ sections at φ = 0, x-z-plane plan.
    pub fn linear(seed: u64) -> Self {
        ProtocolSpec {
            kind: ProtocolKind::Linear,
            thetas: default_thetas(),
            phis: vec![0.0],
            plan: "xz".into(),
            shots: DEFAULT_SHOTS,
            p_min: 0.01,
            p_max: 0.99,
            p_count: 99,
            margin_halfwidth: 0.05,
            margin_draws: 80,
            seed,
        }
    }

    /// Phase-discrimination protocol: three φ classes, out-of-plane plan.
    pub fn nonlinear(seed: u64) -> Self {
        ProtocolSpec {
            phis: vec![0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI],
            plan: "xyz".into(),
            kind: ProtocolKind::Nonlinear,
            ..Self::linear(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() || self.phis.is_empty() {
            return Err(Error::InvalidConfig("empty θ or φ list".into()));
        }
        for &t in &self.thetas {
            if !(t > 0.0 && t <= std::f64::consts::FRAC_PI_4 + 1e-12) {
                return Err(Error::InvalidConfig(format!(
                    "θ = {t} outside (0, π/4]"
                )));
            }
        }
        for &f in &self.phis {
            if !(0.0..2.0 * std::f64::consts::PI).contains(&f) {
                return Err(Error::InvalidConfig(format!("φ = {f} outside [0, 2π)")));
            }
        }
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be positive".into()));
        }
        if !(0.01..=0.99).contains(&self.p_min)
            || !(0.01..=0.99).contains(&self.p_max)
            || self.p_min > self.p_max
            || self.p_count == 0
        {
            return Err(Error::InvalidConfig(format!(
                "p grid [{}, {}] x {} outside [0.01, 0.99]",
                self.p_min, self.p_max, self.p_count
            )));
        }
        if self.p_count > 1 && self.p_min == self.p_max {
            return Err(Error::InvalidConfig(
                "p grid has multiple points but zero width".into(),
            ));
        }
        if !(self.margin_halfwidth > 0.0) || self.margin_draws == 0 {
            return Err(Error::InvalidConfig(
                "margin window must have positive width and draws".into(),
            ));
        }
        FeaturePlan::from_name(&self.plan)?;
        Ok(())
    }

    /// The evenly spaced test grid.
    pub fn p_grid(&self) -> Vec<f64> {
        if self.p_count == 1 {
            return vec![self.p_min];
        }
        let step = (self.p_max - self.p_min) / (self.p_count - 1) as f64;
        (0..self.p_count)
            .map(|i| self.p_min + f64::from(i) * step)
            .collect()
    }
}

/// One labeled observation: mixed-acquisition features plus the PPT label of
/// their tomographic reconstruction.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub theta: f64,
    pub phi: f64,
    pub p: f64,
    pub features: FeatureVector,
    pub label: SeparabilityLabel,
    /// Substream seed that reproduces this sample; 0 for exact (theory) rows.
    pub seed: u64,
    /// The matrix the label was computed from.
    pub reconstructed: DensityMatrix,
    /// The exact mixed state behind the acquisition.
    pub ground_truth: DensityMatrix,
}

/// An ordered, reproducible collection of labeled samples.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
    pub spec: ProtocolSpec,
    /// None for theory datasets (exact features, no acquisition).
    pub source: Option<SourceModel>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Feature rows in sample order.
    pub fn xs(&self) -> Vec<[f64; 4]> {
        self.samples.iter().map(|s| s.features.0).collect()
    }

    /// Labels in sample order, Entangled = true.
    pub fn ys(&self) -> Vec<bool> {
        self.samples
            .iter()
            .map(|s| s.label == SeparabilityLabel::Entangled)
            .collect()
    }
}

/// Sub-lane separating test-grid substreams from training-draw substreams.
const ROLE_GRID: u64 = 0;
const ROLE_MARGIN: u64 = 1;

fn mixed_truth(noisy: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    werner_like(noisy, p)
}

/// Generate one labeled sample from a pool at mixing weight p.
fn pooled_sample(
    pool: &DataPool,
    noisy: &DensityMatrix,
    p: f64,
    seed: u64,
) -> Result<LabeledSample> {
    let mut rng = seeded_rng(seed);
    let (features, reconstructed) = mix_sample(pool, p, &mut rng)?;
    Ok(LabeledSample {
        theta: pool.theta,
        phi: pool.phi,
        p,
        features,
        label: ppt_label(&reconstructed, 0.0)?,
        seed,
        reconstructed,
        ground_truth: mixed_truth(noisy, p)?,
    })
}

/// Boundary-tracing dataset: for every (θ, φ) source setting, one mixed
/// acquisition per grid weight p, labeled by PPT on its reconstruction.
pub fn gen_linear_dataset(spec: &ProtocolSpec, m: &SourceModel) -> Result<Dataset> {
    spec.validate()?;
    if spec.kind != ProtocolKind::Linear {
        return Err(Error::InvalidConfig(
            "boundary-tracing generator needs a linear protocol spec".into(),
        ));
    }
    let ds = gen_grid_samples(spec, m)?;
    Ok(Dataset {
        samples: ds,
        spec: spec.clone(),
        source: Some(*m),
    })
}

/// Phase-discrimination datasets: training draws concentrated in a window
/// around each state's noisy separability boundary, plus a full-grid test set.
pub fn gen_nonlinear_dataset(
    spec: &ProtocolSpec,
    m: &SourceModel,
) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    if spec.kind != ProtocolKind::Nonlinear {
        return Err(Error::InvalidConfig(
            "phase-discrimination generator needs a nonlinear protocol spec".into(),
        ));
    }
    let plan = FeaturePlan::from_name(&spec.plan)?;
    let mut train = Vec::new();
    for (ti, &theta) in spec.thetas.iter().enumerate() {
        for (fi, &phi) in spec.phis.iter().enumerate() {
            let pool_seed = derive_seed(spec.seed, &[lanes::POOL, ti as u64, fi as u64]);
            let pool = build_pool(theta, phi, m, &plan, spec.shots, pool_seed)?;
            let noisy = apply_noise(&ket_from_params(theta, phi)?.density(), m)?;
            let pstar = ppt_boundary_noisy(m, theta, phi)?.ok_or_else(|| {
                Error::Domain(format!(
                    "state θ = {theta}, φ = {phi} has no separability boundary; \
                     the training window is undefined"
                ))
            })?;
            let lo = (pstar - spec.margin_halfwidth).max(0.01);
            let hi = (pstar + spec.margin_halfwidth).min(0.99);
            for draw in 0..spec.margin_draws {
                let seed = derive_seed(
                    spec.seed,
                    &[lanes::MIX, ti as u64, fi as u64, u64::from(draw), ROLE_MARGIN],
                );
                let mut rng = seeded_rng(seed);
                let p = rng.gen_range(lo..=hi);
                let (features, reconstructed) = mix_sample(&pool, p, &mut rng)?;
                train.push(LabeledSample {
                    theta,
                    phi,
                    p,
                    features,
                    label: ppt_label(&reconstructed, 0.0)?,
                    seed,
                    reconstructed,
                    ground_truth: mixed_truth(&noisy, p)?,
                });
            }
        }
    }
    let test = gen_grid_samples(spec, m)?;
    Ok((
        Dataset {
            samples: train,
            spec: spec.clone(),
            source: Some(*m),
        },
        Dataset {
            samples: test,
            spec: spec.clone(),
            source: Some(*m),
        },
    ))
}

fn gen_grid_samples(spec: &ProtocolSpec, m: &SourceModel) -> Result<Vec<LabeledSample>> {
    let plan = FeaturePlan::from_name(&spec.plan)?;
    let grid = spec.p_grid();
    let mut out = Vec::with_capacity(spec.thetas.len() * spec.phis.len() * grid.len());
    for (ti, &theta) in spec.thetas.iter().enumerate() {
        for (fi, &phi) in spec.phis.iter().enumerate() {
            let pool_seed = derive_seed(spec.seed, &[lanes::POOL, ti as u64, fi as u64]);
            let pool = build_pool(theta, phi, m, &plan, spec.shots, pool_seed)?;
            let noisy = apply_noise(&ket_from_params(theta, phi)?.density(), m)?;
            for (pi, &p) in grid.iter().enumerate() {
                let seed = derive_seed(
                    spec.seed,
                    &[lanes::MIX, ti as u64, fi as u64, pi as u64, ROLE_GRID],
                );
                out.push(pooled_sample(&pool, &noisy, p, seed)?);
            }
        }
    }
    Ok(out)
}

/// Exact counterpart of the generators: features are exact correlators of
/// the noiseless family states and labels come from PPT on exact matrices.
/// Linear specs map to the full grid; nonlinear specs map to a deterministic
/// margin window (evenly spaced weights around each ideal boundary), since
/// that is the set the phase protocol trains on. No randomness is involved
/// and the protocol's seed field is ignored.
pub fn gen_theory_dataset(spec: &ProtocolSpec) -> Result<Dataset> {
    spec.validate()?;
    let plan = FeaturePlan::from_name(&spec.plan)?;
    let mut samples = Vec::new();
    for &theta in &spec.thetas {
        for &phi in &spec.phis {
            let pure = ket_from_params(theta, phi)?.density();
            let ps: Vec<f64> = match spec.kind {
                ProtocolKind::Linear => spec.p_grid(),
                ProtocolKind::Nonlinear => {
                    let pstar = ppt_boundary(theta, phi)?.ok_or_else(|| {
                        Error::Domain(format!(
                            "state θ = {theta}, φ = {phi} has no separability boundary"
                        ))
                    })?;
                    let lo = (pstar - spec.margin_halfwidth).max(0.01);
                    let hi = (pstar + spec.margin_halfwidth).min(0.99);
                    let n = spec.margin_draws;
                    (0..n)
                        .map(|i| {
                            if n == 1 {
                                0.5 * (lo + hi)
                            } else {
                                lo + (hi - lo) * f64::from(i) / f64::from(n - 1)
                            }
                        })
                        .collect()
                }
            };
            for p in ps {
                let truth = werner_like(&pure, p)?;
                samples.push(LabeledSample {
                    theta,
                    phi,
                    p,
                    features: crate::measure::features_exact(&truth, &plan),
                    label: ppt_label(&truth, 0.0)?,
                    seed: 0,
                    reconstructed: truth,
                    ground_truth: truth,
                });
            }
        }
    }
    Ok(Dataset {
        samples,
        spec: spec.clone(),
        source: None,
    })
}
