//! Dense complex matrices of the two sizes this crate needs (2x2 and 4x4)
//! and a cyclic Jacobi eigensolver for 4x4 Hermitian matrices.
//!
//! The eigensolver is deliberately dependency-free: the whole pipeline rests
//! on eigenvalues of 4x4 Hermitian matrices, and at that size cyclic Jacobi
//! converges in a handful of sweeps with no workspace management.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Frobenius norm of the strict off-diagonal part below which the Jacobi
/// iteration is considered converged.
pub const JACOBI_OFF_TOL: f64 = 1e-13;
/// Hard cap on Jacobi sweeps; at n = 4 convergence takes far fewer.
pub const JACOBI_MAX_SWEEPS: usize = 200;
/// Hermiticity defect accepted by `hermitian_eigen`.
pub const HERMITICITY_TOL: f64 = 1e-10;

pub const fn c(re: f64, im: f64) -> C64 {
    C64 { re, im }
}

/// 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn zeros() -> Self {
        Mat2([[c(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        m.0[0][0] = c(1.0, 0.0);
        m.0[1][1] = c(1.0, 0.0);
        m
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let mut out = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][j] + other.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Eigenvalues of a 2x2 Hermitian matrix, ascending (closed form).
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1];
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mid - rad, mid + rad]
    }
}

/// 4x4 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[C64; 4]; 4]);

impl Mat4 {
    pub fn zeros() -> Self {
        Mat4([[c(0.0, 0.0); 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.0[i][i] = c(1.0, 0.0);
        }
        m
    }

    pub fn add(&self, other: &Mat4) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[i][j] + other.0[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat4) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[i][j] - other.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat4 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn mul(&self, other: &Mat4) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for k in 0..4 {
                let aik = self.0[i][k];
                if aik == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..4 {
                    out.0[i][j] += aik * other.0[k][j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2] + self.0[3][3]
    }

    /// Largest entry-wise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    s += self.0[i][j].norm_sqr();
                }
            }
        }
        s.sqrt()
    }
}

/// Kronecker product: (a ⊗ b)[(2i+k)(2j+l)] = a[ij] * b[kl].
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    out
}

/// Full eigensystem of a 4x4 Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending together with a unitary whose columns are
/// the matching eigenvectors. Each sweep visits every off-diagonal pivot
/// (p, q) in row-major order; a complex plane rotation with the phase of
/// a_pq folded in annihilates the pivot. Iteration stops once the
/// off-diagonal Frobenius norm drops below `JACOBI_OFF_TOL`, with a hard cap
/// of `JACOBI_MAX_SWEEPS` sweeps.
pub fn hermitian_eigen(m: &Mat4) -> Result<([f64; 4], Mat4)> {
    let defect = m.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::Domain(format!(
            "hermitian_eigen: input is not Hermitian (defect {defect:.3e})"
        )));
    }
    // Work on the exactly Hermitian average so roundoff in the input cannot
    // leak into complex eigenvalues.
    let mut a = m.add(&m.adjoint()).scale(0.5);
    let mut v = Mat4::identity();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if a.off_diagonal_norm() < JACOBI_OFF_TOL {
            converged = true;
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a.0[p][q];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                let phase = apq / r; // e^{i alpha}
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                // tan(2 phi) = 2r / (aqq - app), smaller-angle root.
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;

                // U is identity except U[p][p]=c, U[p][q]=s*phase,
                // U[q][p]=-s*conj(phase), U[q][q]=c.  Update A <- U† A U.
                for k in 0..4 {
                    let akp = a.0[k][p];
                    let akq = a.0[k][q];
                    a.0[k][p] = akp * cth - akq * sth * phase.conj();
                    a.0[k][q] = akp * sth * phase + akq * cth;
                }
                for k in 0..4 {
                    let apk = a.0[p][k];
                    let aqk = a.0[q][k];
                    a.0[p][k] = apk * cth - aqk * sth * phase;
                    a.0[q][k] = apk * sth * phase.conj() + aqk * cth;
                }
                // Pivot is annihilated up to roundoff; pin it to keep the
                // off-diagonal norm honest.
                a.0[p][q] = c(0.0, 0.0);
                a.0[q][p] = c(0.0, 0.0);
                a.0[p][p] = c(a.0[p][p].re, 0.0);
                a.0[q][q] = c(a.0[q][q].re, 0.0);

                for k in 0..4 {
                    let vkp = v.0[k][p];
                    let vkq = v.0[k][q];
                    v.0[k][p] = vkp * cth - vkq * sth * phase.conj();
                    v.0[k][q] = vkp * sth * phase + vkq * cth;
                }
            }
        }
    }
    if !converged && a.off_diagonal_norm() >= JACOBI_OFF_TOL {
        return Err(Error::Domain(
            "hermitian_eigen: Jacobi iteration did not converge".into(),
        ));
    }

    let mut order = [0usize, 1, 2, 3];
    let diag = [a.0[0][0].re, a.0[1][1].re, a.0[2][2].re, a.0[3][3].re];
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let mut vals = [0.0; 4];
    let mut vecs = Mat4::zeros();
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = diag[src];
        for k in 0..4 {
            vecs.0[k][dst] = v.0[k][src];
        }
    }
    Ok((vals, vecs))
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &Mat4) -> Result<[f64; 4]> {
    hermitian_eigen(m).map(|(vals, _)| vals)
}

/// Rebuild V diag(vals) V† from an eigensystem.
pub fn from_eigen(vals: &[f64; 4], vecs: &Mat4) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mut s = c(0.0, 0.0);
            for k in 0..4 {
                s += vecs.0[i][k] * vals[k] * vecs.0[j][k].conj();
            }
            out.0[i][j] = s;
        }
    }
    out
}

/// Square root of a positive semidefinite Hermitian matrix. Eigenvalues in
/// [-clip, 0) are treated as roundoff and clamped to zero.
pub fn psd_sqrt(m: &Mat4, clip: f64) -> Result<Mat4> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let mut roots = [0.0; 4];
    for (r, &lambda) in roots.iter_mut().zip(vals.iter()) {
        if lambda < -clip {
            return Err(Error::Domain(format!(
                "psd_sqrt: eigenvalue {lambda:.3e} below -{clip:.1e}"
            )));
        }
        *r = lambda.max(0.0).sqrt();
    }
    Ok(from_eigen(&roots, &vecs))
}
