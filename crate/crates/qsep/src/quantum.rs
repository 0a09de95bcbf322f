//! Exact two-qubit state algebra.
//!
//! States live in the polarization product basis (HH, HV, VH, VV) with
//! H ↔ 0 and V ↔ 1. The central family is the partially entangled ket
//! |ψ⟩ = cosθ|HV⟩ + e^{iφ} sinθ|VH⟩ mixed with white noise,
//! ρ = p|ψ⟩⟨ψ| + (1−p)I/4, whose separability is decided exactly by the
//! positivity of the partial transpose (necessary and sufficient for two
//! qubits).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, from_eigen, hermitian_eigen, kron, psd_sqrt, Mat2, Mat4};

/// Accepted Hermiticity / trace defect for a density matrix.
pub const DENSITY_TOL: f64 = 1e-12;
/// Eigenvalues are allowed to undershoot zero by this much (roundoff).
pub const PSD_TOL: f64 = 1e-10;
/// Bisection iterations used by [`ppt_boundary`]; 2^-60 localizes the root
/// far below every tolerance in the pipeline.
pub const BOUNDARY_BISECTIONS: usize = 60;

/// Separability verdict of the PPT test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeparabilityLabel {
    Separable,
    Entangled,
}

impl SeparabilityLabel {
    pub fn as_u8(self) -> u8 {
        match self {
            SeparabilityLabel::Separable => 0,
            SeparabilityLabel::Entangled => 1,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(SeparabilityLabel::Separable),
            1 => Ok(SeparabilityLabel::Entangled),
            other => Err(Error::Parse(format!("label must be 0 or 1, got {other}"))),
        }
    }
}

impl std::fmt::Display for SeparabilityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeparabilityLabel::Separable => write!(f, "separable"),
            SeparabilityLabel::Entangled => write!(f, "entangled"),
        }
    }
}

/// Parameters (θ, φ, p) of the noisy partially entangled family.
///
/// θ ∈ [0, π/2] sets the amplitude split, φ ∈ [0, 2π) the relative phase,
/// p ∈ [0, 1] the entangled fraction of the white-noise mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    pub theta: f64,
    pub phi: f64,
    pub p: f64,
}

impl StateParams {
    pub fn new(theta: f64, phi: f64, p: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) || !theta.is_finite() {
            return Err(Error::Domain(format!("theta {theta} outside [0, pi/2]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) || !phi.is_finite() {
            return Err(Error::Domain(format!("phi {phi} outside [0, 2pi)")));
        }
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::Domain(format!("p {p} outside [0, 1]")));
        }
        Ok(StateParams { theta, phi, p })
    }
}

/// Normalized two-qubit state vector in the (HH, HV, VH, VV) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket(pub [C64; 4]);

impl Ket {
    /// Validates normalization: ⟨ψ|ψ⟩ = 1 within 1e-12.
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "ket squared norm {norm2} deviates from 1 by more than 1e-12"
            )));
        }
        Ok(Ket(amplitudes))
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[i] * self.0[j].conj();
            }
        }
        DensityMatrix::new(m).expect("projector onto a normalized ket is a valid state")
    }
}

/// |ψ⟩ = cosθ|HV⟩ + e^{iφ} sinθ|VH⟩.
pub fn ket_from_params(theta: f64, phi: f64) -> Result<Ket> {
    // Reuse the range checks; p is irrelevant here.
    let sp = StateParams::new(theta, phi, 0.0)?;
    let amp = [
        c(0.0, 0.0),
        c(sp.theta.cos(), 0.0),
        C64::from_polar(sp.theta.sin(), sp.phi),
        c(0.0, 0.0),
    ];
    Ok(Ket(amp))
}

/// Validated two-qubit density matrix: Hermitian within 1e-12, unit trace
/// within 1e-12, eigenvalues ≥ −1e-10.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Mat4,
}

impl DensityMatrix {
    pub fn new(m: Mat4) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > DENSITY_TOL {
            return Err(Error::Domain(format!(
                "density matrix not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::Domain(format!(
                "density matrix trace {tr} deviates from 1"
            )));
        }
        let vals = crate::linalg::hermitian_eigenvalues(&m)?;
        if vals[0] < -PSD_TOL {
            return Err(Error::Domain(format!(
                "density matrix has eigenvalue {:.3e} below -1e-10",
                vals[0]
            )));
        }
        Ok(DensityMatrix { m })
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m.0[i][j]
    }

    /// The maximally mixed state I/4.
    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: Mat4::identity().scale(0.25),
        }
    }

    /// Eigenvalues ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        crate::linalg::hermitian_eigenvalues(&self.m)
            .expect("validated density matrix is Hermitian")
    }

    /// tr(ρ²) ∈ [1/4, 1].
    pub fn purity(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += self.m.0[i][j].norm_sqr();
            }
        }
        s
    }

    /// ⟨ψ|ρ|ψ⟩ for a pure reference state.
    pub fn fidelity_to_pure(&self, psi: &Ket) -> f64 {
        let mut s = c(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                s += psi.0[i].conj() * self.m.0[i][j] * psi.0[j];
            }
        }
        s.re.clamp(0.0, 1.0)
    }

    /// Partial transpose over the second qubit: in the 2x2-block view
    /// indexed by the first qubit, every block is transposed in place.
    /// The result is Hermitian and trace-1 but in general not positive.
    pub fn partial_transpose(&self) -> Mat4 {
        let mut out = Mat4::zeros();
        for a in 0..2 {
            for ap in 0..2 {
                for b in 0..2 {
                    for bp in 0..2 {
                        out.0[2 * a + b][2 * ap + bp] = self.m.0[2 * a + bp][2 * ap + b];
                    }
                }
            }
        }
        out
    }
}

/// ρ = p|ψ⟩⟨ψ| + (1−p)I/4 generalized to an arbitrary base state:
/// p·ρ₀ + (1−p)·I/4.
pub fn werner_like(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::Domain(format!("mixing weight p {p} outside [0, 1]")));
    }
    let m = rho
        .matrix()
        .scale(p)
        .add(&Mat4::identity().scale(0.25 * (1.0 - p)));
    DensityMatrix::new(m)
}

/// Smallest eigenvalue of the partial transpose.
pub fn min_pt_eigenvalue(rho: &DensityMatrix) -> f64 {
    crate::linalg::hermitian_eigenvalues(&rho.partial_transpose())
        .expect("partial transpose of a valid state is Hermitian")[0]
}

/// PPT separability test, exact for two qubits: entangled iff the partial
/// transpose has an eigenvalue below −tol.
pub fn ppt_label(rho: &DensityMatrix, tol: f64) -> Result<SeparabilityLabel> {
    if tol < 0.0 || !tol.is_finite() {
        return Err(Error::Domain(format!("ppt tolerance {tol} must be >= 0")));
    }
    if min_pt_eigenvalue(rho) < -tol {
        Ok(SeparabilityLabel::Entangled)
    } else {
        Ok(SeparabilityLabel::Separable)
    }
}

/// Wootters concurrence.
///
/// With ρ̃ = (σy⊗σy) ρ* (σy⊗σy), the λᵢ are the square roots of the
/// eigenvalues of ρρ̃ in decreasing order and C = max(0, λ₁−λ₂−λ₃−λ₄).
/// Computed through Hermitian problems only: λᵢ² are the eigenvalues of
/// √ρ ρ̃ √ρ.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let yy = kron(&pauli_y(), &pauli_y());
    let mut conj = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            conj.0[i][j] = rho.matrix().0[i][j].conj();
        }
    }
    let rho_tilde = yy.mul(&conj).mul(&yy);
    let sqrt_rho = psd_sqrt(rho.matrix(), PSD_TOL).expect("validated state is PSD");
    let k = sqrt_rho.mul(&rho_tilde).mul(&sqrt_rho);
    // k is Hermitian PSD up to roundoff.
    let k = k.add(&k.adjoint()).scale(0.5);
    let vals = crate::linalg::hermitian_eigenvalues(&k).expect("symmetrized product");
    let mut lambdas: Vec<f64> = vals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// Uhlmann fidelity F(ρ, σ) = (tr √(√ρ σ √ρ))².
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let sr = psd_sqrt(rho.matrix(), PSD_TOL).expect("validated state is PSD");
    let inner = sr.mul(sigma.matrix()).mul(&sr);
    let inner = inner.add(&inner.adjoint()).scale(0.5);
    let vals = crate::linalg::hermitian_eigenvalues(&inner).expect("symmetrized product");
    let tr_sqrt: f64 = vals.iter().map(|&v| v.max(0.0).sqrt()).sum();
    (tr_sqrt * tr_sqrt).clamp(0.0, 1.0)
}

/// Entanglement boundary of the family ρ(p) = p|ψ(θ,φ)⟩⟨ψ| + (1−p)I/4.
///
/// Returns the p at which the smallest partial-transpose eigenvalue crosses
/// zero, located by bisection (60 iterations). `None` when the family has no
/// entangled member (θ = 0 or π/2, where the ket is a product state). The
/// closed form is p* = 1/(1 + 2 sinθ cosθ), independent of φ.
pub fn ppt_boundary(theta: f64, phi: f64) -> Result<Option<f64>> {
    let psi = ket_from_params(theta, phi)?;
    let rho1 = psi.density();
    if min_pt_eigenvalue(&rho1) >= 0.0 {
        // Product ket: no p in (0, 1] is entangled.
        return Ok(None);
    }
    let f = |p: f64| -> f64 {
        let rho = werner_like(&rho1, p).expect("p in [0,1]");
        min_pt_eigenvalue(&rho)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    debug_assert!(f(lo) > 0.0 && f(hi) < 0.0);
    for _ in 0..BOUNDARY_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Projection of a Hermitian, trace-1 matrix onto the density-matrix cone:
/// eigenvalues are clipped at zero and the removed (negative) mass is spread
/// uniformly over the remaining eigenvalues, smallest first.
pub fn project_to_physical(m: &Mat4) -> Result<DensityMatrix> {
    let tr = m.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "projection input trace {tr} deviates from 1"
        )));
    }
    let sym = m.add(&m.adjoint()).scale(0.5);
    let (mut vals, vecs) = hermitian_eigen(&sym)?;
    let mut carry = 0.0;
    let mut first_kept = 4;
    for i in 0..4 {
        let remaining = (4 - i) as f64;
        if vals[i] + carry / remaining < 0.0 {
            carry += vals[i];
            vals[i] = 0.0;
        } else {
            first_kept = i;
            break;
        }
    }
    if first_kept == 4 {
        return Err(Error::Domain(
            "projection input has no positive spectral mass".into(),
        ));
    }
    let share = carry / (4 - first_kept) as f64;
    for v in vals.iter_mut().skip(first_kept) {
        *v += share;
    }
    let rebuilt = from_eigen(&vals, &vecs);
    // Eigenvalue clipping keeps the trace; normalize away residual roundoff.
    let rebuilt = rebuilt.scale(1.0 / rebuilt.trace().re);
    DensityMatrix::new(rebuilt)
}

pub fn pauli_x() -> Mat2 {
    Mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn pauli_y() -> Mat2 {
    Mat2([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> Mat2 {
    Mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
}
