//! Bipartite Gaussian entanglement measures from a 4×4 covariance matrix.
//!
//! Quantities follow the standard continuous-variable conventions with
//! vacuum variance 1/2 per quadrature:
//!
//! * Duan–Simon joint variances Δ∓ = V̄₁₁ + V̄₃₃ ∓ 2V̄₁₃, minimized over a
//!   local optical phase rotation; the state is inseparable iff Δ⁻ < 1
//!   (Duan et al., PRL 84, 2722 (2000); Simon, PRL 84, 2726 (2000)).
//! * Logarithmic negativity E_N = max(0, −ln 2ζ₋), with ζ₋ the smaller
//!   symplectic eigenvalue of the partially transposed matrix, from the
//!   closed form ζ₋² = (Δ̃ − √(Δ̃² − 4 det V))/2 where the partial
//!   transpose flips the sign of the det V_eo term in the Seralian Δ̃.
//! * Purity ρ = 1/(4√det V).

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::spectra::{symplectic_pair, CovarianceMatrix};
use crate::{Error, Result};

/// Cross-block mixing angle and magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngle {
    /// θ = atan2(Ṽ₁₄, Ṽ₁₃) (rad).
    pub theta: f64,
    /// Rotation-invariant correlation magnitude √(Ṽ₁₃² + Ṽ₁₄²).
    pub magnitude: f64,
    /// Set when both projections vanish and θ is undefined (θ = 0 returned).
    pub degenerate: bool,
}

/// Entanglement figures of one covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    /// Mixing angle θ of the cross block (rad).
    pub theta: f64,
    /// Squeezed joint variance Δ⁻ (vacuum = 1); entangled iff < 1.
    pub delta_epr_minus: f64,
    /// Anti-squeezed joint variance Δ⁺.
    pub delta_epr_plus: f64,
    /// Logarithmic negativity (nats).
    pub log_negativity: f64,
    /// State purity ∈ (0, 1].
    pub purity: f64,
    /// Symplectic eigenvalues (ζ₋, ζ₊) of the partially transposed matrix.
    pub symplectic_eigs: (f64, f64),
}

/// Mixing angle of the two-mode cross block, θ = atan2(Ṽ₁₄, Ṽ₁₃).
pub fn mixing_angle(v: &CovarianceMatrix) -> MixingAngle {
    let v13 = v.vtilde_13();
    let v14 = v.vtilde_14();
    let magnitude = (v13 * v13 + v14 * v14).sqrt();
    if magnitude == 0.0 {
        return MixingAngle {
            theta: 0.0,
            magnitude: 0.0,
            degenerate: true,
        };
    }
    MixingAngle {
        theta: v14.atan2(v13),
        magnitude,
        degenerate: false,
    }
}

/// Joint variance under a local optical phase rotation by φ, normalized to
/// a vacuum level of 1:
/// Δ(φ) = V̄₁₁ + V̄₃₃ + 2 V̄₁₃ cos(θ − φ) = ΔX₊²(φ) = ΔP₋²(φ).
pub fn duan_sweep(v: &CovarianceMatrix, phi: f64) -> f64 {
    let mix = mixing_angle(v);
    v.vbar_11() + v.vbar_33() + 2.0 * mix.magnitude * (mix.theta - phi).cos()
}

/// Extremal joint variances (Δ⁻, Δ⁺) = V̄₁₁ + V̄₃₃ ∓ 2V̄₁₃, reached at
/// φ = θ − π and φ = θ. Entanglement is witnessed iff Δ⁻ < 1.
pub fn delta_epr(v: &CovarianceMatrix) -> (f64, f64) {
    let mix = mixing_angle(v);
    let base = v.vbar_11() + v.vbar_33();
    (
        base - 2.0 * mix.magnitude,
        base + 2.0 * mix.magnitude,
    )
}

/// Symplectic eigenvalues of the partially transposed matrix (ζ₋, ζ₊).
pub fn pt_symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<(f64, f64)> {
    symplectic_pair(&v.matrix(), true)
}

/// Logarithmic negativity E_N = max(0, −ln 2ζ₋) in nats.
pub fn log_negativity(v: &CovarianceMatrix) -> Result<f64> {
    let (lo, _) = pt_symplectic_eigenvalues(v)?;
    if lo <= 0.0 {
        return Err(Error::numerical("vanishing symplectic eigenvalue"));
    }
    Ok((-(2.0 * lo).ln()).max(0.0))
}

/// Purity ρ = 1/(4 √det V); 1 for a pure state.
pub fn purity(v: &CovarianceMatrix) -> Result<f64> {
    let det = v.matrix().determinant();
    if det <= 0.0 {
        return Err(Error::numerical(format!(
            "purity undefined: det V = {det} ≤ 0"
        )));
    }
    Ok(1.0 / (4.0 * det.sqrt()))
}

/// Local optical phase rotation S_φ = 1₂ ⊕ R_φ applied to the covariance
/// matrix, V(φ) = S_φ V S_φᵀ, with R_φ = [[cos φ, sin φ], [−sin φ, cos φ]].
pub fn rotate_optical(v: &CovarianceMatrix, phi: f64) -> CovarianceMatrix {
    let (c, s) = (phi.cos(), phi.sin());
    let mut rot = Matrix4::identity();
    rot[(2, 2)] = c;
    rot[(2, 3)] = s;
    rot[(3, 2)] = -s;
    rot[(3, 3)] = c;
    CovarianceMatrix::from_matrix(rot * v.matrix() * rot.transpose(), v.frequency)
}

/// Rotate into standard form: the optical phase is chosen so Ṽ₁₄ → 0 and
/// the cross block becomes V̄₁₃ σ_z. Returns the rotated matrix and the
/// applied angle. Only a local phase is needed because the model produces
/// no single-mode squeezing (V₁₁ = V₂₂, V₃₃ = V₄₄).
pub fn standard_form(v: &CovarianceMatrix) -> (CovarianceMatrix, f64) {
    let mix = mixing_angle(v);
    (rotate_optical(v, mix.theta), mix.theta)
}

/// Full entanglement report for one covariance matrix.
pub fn report(v: &CovarianceMatrix) -> Result<EntanglementReport> {
    v.check_physical(1e-6)?;
    let mix = mixing_angle(v);
    let (minus, plus) = delta_epr(v);
    let eigs = pt_symplectic_eigenvalues(v)?;
    Ok(EntanglementReport {
        theta: mix.theta,
        delta_epr_minus: minus,
        delta_epr_plus: plus,
        log_negativity: log_negativity(v)?,
        purity: purity(v)?,
        symplectic_eigs: eigs,
    })
}

/// 2-D Gaussian marginal of the Wigner function over one quadrature pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerMarginal {
    /// Indices of the retained quadratures in (X_e, P_e, X_o, P_o).
    pub axes: (usize, usize),
    /// Marginal covariance (rows/columns of the other pair deleted).
    pub cov: [[f64; 2]; 2],
    /// 1/e contour semi-axes (√(2λ) per eigenvalue of the marginal).
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Orientation of the major axis (rad, in the axes plane).
    pub angle: f64,
}

/// Marginal covariance and 1/e iso-contour of the Wigner function for the
/// chosen quadrature pair. For vacuum the contour is a circle of radius 1.
pub fn wigner_marginal(v: &CovarianceMatrix, axes: (usize, usize)) -> Result<WignerMarginal> {
    let (a, b) = axes;
    if a >= 4 || b >= 4 || a == b {
        return Err(Error::validation("wigner_marginal: invalid axes pair"));
    }
    let m = v.matrix();
    let cov = Matrix2::new(m[(a, a)], m[(a, b)], m[(b, a)], m[(b, b)]);
    let eig = cov.symmetric_eigen();
    let (mut hi, mut lo) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let mut major = eig.eigenvectors.column(0).into_owned();
    if lo > hi {
        std::mem::swap(&mut hi, &mut lo);
        major = eig.eigenvectors.column(1).into_owned();
    }
    if lo <= 0.0 {
        return Err(Error::numerical("singular marginal covariance"));
    }
    Ok(WignerMarginal {
        axes,
        cov: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        semi_major: (2.0 * hi).sqrt(),
        semi_minor: (2.0 * lo).sqrt(),
        angle: major[1].atan2(major[0]),
    })
}

/// Covariance matrix in the standard two-mode form from its distinct
/// elements (V₁₁ = V₂₂, V₃₃ = V₄₄, cross block diag(v13, −v13)).
pub fn standard_cm(v11: f64, v33: f64, v13: f64, frequency: f64) -> CovarianceMatrix {
    let mut v = Matrix4::zeros();
    v[(0, 0)] = v11;
    v[(1, 1)] = v11;
    v[(2, 2)] = v33;
    v[(3, 3)] = v33;
    v[(0, 2)] = v13;
    v[(2, 0)] = v13;
    v[(1, 3)] = -v13;
    v[(3, 1)] = -v13;
    CovarianceMatrix::from_matrix(v, frequency)
}
