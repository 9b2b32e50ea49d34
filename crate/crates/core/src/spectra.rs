//! Frequency-domain output-field correlations and filtered covariance
//! matrices.
//!
//! The steady-state Langevin system is solved in the Fourier domain: the
//! output field vector f_out(ω) = (a_e,out(ω), a_e,out†(−ω), a_o,out(−ω),
//! a_o,out†(ω)) is related to the twelve input noises by the transfer
//! matrix
//!
//! ```text
//!   T(ω) = L − N · [iωO − M]⁻¹ · K
//! ```
//!
//! (standard input–output convention; all covariances are invariant under
//! the global sign of the output pair). Mode correlations follow as
//! C̃(ω) = T(ω) · D · T†(ω), where the dagger is the matrix adjoint of T at
//! the same argument — in operator notation this is the conventional
//! "T†(−ω)", since daggering flips the frequency argument of each component.
//!
//! A measurement over a finite window of length T resolves discrete
//! frequencies ω_n = 2πn/T and convolves the quadrature correlations with
//! the sinc² filter F(ω) = G(ω)², G(ω) = √(2/(πT)) sin(ωT/2)/ω:
//!
//! ```text
//!   V(ω_n) = ∫ F(ω_n − ω) C(ω) dω.
//! ```
//!
//! The convolution is evaluated on a uniform grid of C(ω) samples with the
//! *exact* filter mass per cell, using the closed-form antiderivative
//! ∫F du = (1/π)[Si(uT) − 2 sin²(uT/2)/(uT)]. Exact cell masses keep the
//! quadrature correct for any window length, including windows so long that
//! the sinc oscillation is far below the grid spacing; the smooth part
//! C(ω) − C(∞) is what the grid must resolve, and the constant part is
//! integrated analytically (total filter mass is exactly 1).

use nalgebra::{Matrix4, SMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{SystemConfig, TransferMatrices, C64};
use crate::special::si;
use crate::units::{rads_to_hz, TWO_PI};
use crate::{Error, Result};

/// Discrete analysis frequencies for a finite measurement window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    /// Analysis offsets ω_n (rad/s).
    pub frequencies: Vec<f64>,
    /// Window length T (s).
    pub window_t: f64,
}

impl SpectralGrid {
    pub fn new(frequencies: Vec<f64>, window_t: f64) -> Result<Self> {
        if !(window_t > 0.0) {
            return Err(Error::validation("window_t must be > 0"));
        }
        Ok(SpectralGrid {
            frequencies,
            window_t,
        })
    }

    /// Bins ω_n = 2πn/T for n ∈ [−n_half, n_half].
    pub fn symmetric_bins(n_half: u32, window_t: f64) -> Result<Self> {
        let df = TWO_PI / window_t;
        let frequencies = (-(n_half as i64)..=n_half as i64)
            .map(|n| n as f64 * df)
            .collect();
        Self::new(frequencies, window_t)
    }
}

/// 4×4 real symmetric covariance matrix over (X_e, P_e, X_o, P_o) at one
/// analysis frequency. Vacuum normalizes to 1/2 per quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    /// Matrix elements, row-major.
    pub v: [[f64; 4]; 4],
    /// Analysis offset ω_n this matrix belongs to (rad/s).
    pub frequency: f64,
}

impl CovarianceMatrix {
    pub fn from_matrix(v: Matrix4<f64>, frequency: f64) -> Self {
        let mut out = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                out[r][c] = v[(r, c)];
            }
        }
        CovarianceMatrix { v: out, frequency }
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|r, c| self.v[r][c])
    }

    pub fn vacuum(frequency: f64) -> Self {
        Self::from_matrix(Matrix4::identity() * 0.5, frequency)
    }

    /// Averaged microwave variance V̄₁₁ = (V₁₁+V₂₂)/2.
    pub fn vbar_11(&self) -> f64 {
        0.5 * (self.v[0][0] + self.v[1][1])
    }

    /// Averaged optical variance V̄₃₃ = (V₃₃+V₄₄)/2.
    pub fn vbar_33(&self) -> f64 {
        0.5 * (self.v[2][2] + self.v[3][3])
    }

    /// σ_z projection of the cross block, Ṽ₁₃ = (V₁₃ − V₂₄)/2.
    pub fn vtilde_13(&self) -> f64 {
        0.5 * (self.v[0][2] - self.v[1][3])
    }

    /// σ_x projection of the cross block, Ṽ₁₄ = (V₁₄ + V₂₃)/2.
    pub fn vtilde_14(&self) -> f64 {
        0.5 * (self.v[0][3] + self.v[1][2])
    }

    /// Check symmetry within 1e-12 relative.
    pub fn check_symmetric(&self) -> Result<()> {
        let scale = self
            .v
            .iter()
            .flatten()
            .fold(0.0f64, |a, &x| a.max(x.abs()))
            .max(1e-300);
        for r in 0..4 {
            for c in 0..4 {
                if (self.v[r][c] - self.v[c][r]).abs() > 1e-12 * scale {
                    return Err(Error::numerical(format!(
                        "covariance matrix not symmetric at ({r},{c})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ordinary symplectic eigenvalues (ν₋, ν₊) of the two-mode matrix.
    /// A physical state has both ≥ 1/2.
    pub fn symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        symplectic_pair(&self.matrix(), false)
    }

    /// Physicality: V + (i/2)Ω ⪰ 0, i.e. both symplectic eigenvalues at
    /// least 1/2 − tol.
    pub fn check_physical(&self, tol: f64) -> Result<()> {
        self.check_symmetric()?;
        let (lo, _) = self.symplectic_eigenvalues()?;
        if lo < 0.5 - tol {
            return Err(Error::numerical(format!(
                "unphysical covariance matrix: symplectic eigenvalue {lo} < 1/2"
            )));
        }
        Ok(())
    }
}

/// Symplectic eigenvalue pair of a 4×4 two-mode covariance matrix, via the
/// Seralian invariant Δ = det V_e + det V_o ± 2 det V_eo. With
/// `partial_transpose` the sign of the det V_eo term flips (time reversal
/// of the second mode).
pub(crate) fn symplectic_pair(v: &Matrix4<f64>, partial_transpose: bool) -> Result<(f64, f64)> {
    let ve = v.fixed_view::<2, 2>(0, 0).into_owned();
    let vo = v.fixed_view::<2, 2>(2, 2).into_owned();
    let veo = v.fixed_view::<2, 2>(0, 2).into_owned();
    let sign = if partial_transpose { -1.0 } else { 1.0 };
    let seralian = ve.determinant() + vo.determinant() + sign * 2.0 * veo.determinant();
    let det_v = v.determinant();
    let disc = seralian * seralian - 4.0 * det_v;
    if disc < -1e-9 * seralian.abs().max(1.0) {
        return Err(Error::numerical(format!(
            "complex symplectic spectrum: Δ² − 4 det V = {disc}"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let lo2 = 0.5 * (seralian - root);
    let hi2 = 0.5 * (seralian + root);
    if lo2 < -1e-12 || hi2 < 0.0 {
        return Err(Error::numerical(format!(
            "negative squared symplectic eigenvalue {lo2}"
        )));
    }
    Ok((lo2.max(0.0).sqrt(), hi2.sqrt()))
}

/// Output transfer matrix T(ω) = L − N·[iωO − M]⁻¹·K (4×12 complex).
///
/// Errors with a singular-resolvent message when iωO − M is not invertible,
/// which on the real axis signals operation at or above the parametric
/// threshold.
pub fn output_transfer(tm: &TransferMatrices, omega: f64) -> Result<SMatrix<C64, 4, 12>> {
    let i = C64::i();
    let mut a = SMatrix::<C64, 8, 8>::zeros();
    for r in 0..8 {
        for c in 0..8 {
            a[(r, c)] = -tm.m[(r, c)];
        }
        a[(r, r)] += i * omega * tm.o_signs[(r, r)];
    }
    let lu = a.lu();
    let k_c = tm.k.map(|x| C64::new(x, 0.0));
    let mut s = SMatrix::<C64, 8, 12>::zeros();
    for col in 0..12 {
        let rhs = k_c.column(col).into_owned();
        let x = lu
            .solve(&rhs)
            .ok_or_else(|| Error::numerical("singular resolvent iωO − M (at/above threshold?)"))?;
        s.set_column(col, &x);
    }
    let l_c = tm.l.map(|x| C64::new(x, 0.0));
    let n_c = tm.n.map(|x| C64::new(x, 0.0));
    Ok(l_c - n_c * s)
}

/// Output mode-correlation matrix C̃(ω) = T(ω) D T†(ω) for the ordered
/// vector (a_e,out(ω), a_e,out†(−ω), a_o,out(−ω), a_o,out†(ω)).
pub fn output_mode_correlations(
    tm: &TransferMatrices,
    omega: f64,
) -> Result<SMatrix<C64, 4, 4>> {
    let t = output_transfer(tm, omega)?;
    let d_c = tm.d.map(|x| C64::new(x, 0.0));
    Ok(t * d_c * t.adjoint())
}

/// Commutator matrix T(ω) Λ T†(ω); equals diag(+1, −1, +1, −1) for any
/// parameters (unitarity of the input–output map).
pub fn commutator_matrix(tm: &TransferMatrices, omega: f64) -> Result<SMatrix<C64, 4, 4>> {
    let t = output_transfer(tm, omega)?;
    let lambda_c = tm.lambda.map(|x| C64::new(x, 0.0));
    Ok(t * lambda_c * t.adjoint())
}

/// Rotate mode correlations into real symmetric quadrature correlations:
/// C = ½(U C̃ U† + (U C̃ U†)ᵀ) with U = u ⊕ u, u = (1/√2)[[1,1],[−i,i]].
///
/// Errors when the symmetrized matrix retains an imaginary part above
/// 1e-10 (an upstream conjugation bug).
pub fn quadrature_correlations(c_tilde: &SMatrix<C64, 4, 4>) -> Result<Matrix4<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = SMatrix::<C64, 4, 4>::zeros();
    for b in 0..2 {
        u[(2 * b, 2 * b)] = C64::new(s, 0.0);
        u[(2 * b, 2 * b + 1)] = C64::new(s, 0.0);
        u[(2 * b + 1, 2 * b)] = C64::new(0.0, -s);
        u[(2 * b + 1, 2 * b + 1)] = C64::new(0.0, s);
    }
    let rotated = u * c_tilde * u.adjoint();
    let sym = (rotated + rotated.transpose()) * C64::new(0.5, 0.0);
    let scale = sym.iter().fold(1.0f64, |a, z| a.max(z.norm()));
    let mut out = Matrix4::zeros();
    for r in 0..4 {
        for c in 0..4 {
            if sym[(r, c)].im.abs() > 1e-10 * scale {
                return Err(Error::numerical(format!(
                    "quadrature correlations not real at ({r},{c}): imag {}",
                    sym[(r, c)].im
                )));
            }
            out[(r, c)] = sym[(r, c)].re;
        }
    }
    Ok(out)
}

/// Real quadrature correlation spectrum C(ω) (unfiltered).
pub fn quadrature_spectrum(tm: &TransferMatrices, omega: f64) -> Result<Matrix4<f64>> {
    quadrature_correlations(&output_mode_correlations(tm, omega)?)
}

// ---------------------------------------------------------------------------
// Finite-window filter
// ---------------------------------------------------------------------------

/// Filter amplitude G(ω) = √(2/(πT)) sin(ωT/2)/ω, with the removable
/// singularity at ω = 0 evaluated by series.
pub fn filter_amplitude(omega: f64, window_t: f64) -> f64 {
    let norm = (2.0 / (std::f64::consts::PI * window_t)).sqrt();
    let x = omega * window_t / 2.0;
    if x.abs() < 1e-6 {
        norm * (window_t / 2.0) * (1.0 - x * x / 6.0)
    } else {
        norm * x.sin() / omega
    }
}

/// Effective filter F(ω) = G(ω)²; unit area, F(0) = T/(2π).
pub fn filter_kernel(omega: f64, window_t: f64) -> f64 {
    let g = filter_amplitude(omega, window_t);
    g * g
}

/// Cumulative filter mass Φ(u) = ∫_{−∞}^{u} F(x) dx, from the closed-form
/// antiderivative (1/π)[Si(uT) − 2 sin²(uT/2)/(uT)].
pub fn filter_mass_below(u: f64, window_t: f64) -> f64 {
    let x = u * window_t;
    let correction = if x.abs() < 1e-8 {
        x / 2.0
    } else {
        2.0 * (0.5 * x).sin().powi(2) / x
    };
    0.5 + (si(x) - correction) / std::f64::consts::PI
}

// ---------------------------------------------------------------------------
// Filtered covariance via exact-mass convolution
// ---------------------------------------------------------------------------

/// Shared evaluation grid for convolving one system over many analysis
/// frequencies.
pub struct ConvolutionEngine {
    tm: TransferMatrices,
    window_t: f64,
    half_width: f64,
    /// Grid step of the fine pass.
    step: f64,
    grid_start: f64,
    /// C(ω) − C(∞) samples on the fine grid.
    excess: Vec<Matrix4<f64>>,
    /// C(∞) = quadrature rotation of L D Lᵀ.
    c_inf: Matrix4<f64>,
}

/// Width of the narrowest spectral feature: mode linewidths, with the
/// microwave line narrowed by dynamical back-action κ_e,eff = (1−C)κ_e.
fn narrowest_feature(cfg: &SystemConfig, g: f64) -> f64 {
    let c = crate::model::cooperativity(g, cfg.mode_e.kappa, cfg.mode_o.kappa);
    let ke_eff = (cfg.mode_e.kappa * (1.0 - c).abs()).max(cfg.mode_e.kappa / 50.0);
    ke_eff
        .min(cfg.mode_o.kappa)
        .min(cfg.mode_t.kappa)
        .min(cfg.mode_tm.kappa)
}

/// Integration half-width: covers the filter mass target and every spectral
/// feature (detunings and the hybridized t±tm doublet at ±J).
fn integration_half_width(cfg: &SystemConfig, window_t: f64) -> f64 {
    let base = (40.0 * std::f64::consts::PI / window_t).max(10.0 * cfg.mode_o.kappa);
    let j_span = cfg.pump.j_coupling + 5.0 * cfg.mode_t.kappa.max(cfg.mode_tm.kappa);
    let d_span = cfg
        .mode_o
        .delta
        .abs()
        .max(cfg.mode_t.delta.abs())
        .max(cfg.mode_tm.delta.abs())
        + 5.0 * cfg.mode_o.kappa;
    base.max(j_span).max(d_span)
}

impl ConvolutionEngine {
    /// Sample C(ω) over the union of the target range and the integration
    /// width. Frequency points are independent and evaluated in parallel.
    pub fn new(
        cfg: &SystemConfig,
        tm: &TransferMatrices,
        targets: &[f64],
        window_t: f64,
    ) -> Result<Self> {
        if !(window_t > 0.0) {
            return Err(Error::validation("window_t must be > 0"));
        }
        if targets.is_empty() {
            return Err(Error::validation("no analysis frequencies supplied"));
        }
        let g = tm.m[(0, 3)].norm(); // |−ig| entry carries the coupling
        let half_width = integration_half_width(cfg, window_t);
        let step = narrowest_feature(cfg, g) / 100.0;
        let lo = targets.iter().cloned().fold(f64::INFINITY, f64::min) - half_width;
        let hi = targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + half_width;
        // Fine grid at step/2 so the coarse pass (every other point) gives a
        // convergence estimate for free.
        let fine = step / 2.0;
        let n_points = ((hi - lo) / fine).ceil() as usize + 2;
        if n_points > 6_000_000 {
            return Err(Error::numerical(format!(
                "convolution grid too large ({n_points} points); widen features or narrow sweep"
            )));
        }
        let c_inf_tilde = {
            let l_c = tm.l.map(|x| C64::new(x, 0.0));
            let d_c = tm.d.map(|x| C64::new(x, 0.0));
            l_c * d_c * l_c.adjoint()
        };
        let c_inf = quadrature_correlations(&c_inf_tilde)?;
        let excess = (0..n_points)
            .into_par_iter()
            .map(|j| {
                let w = lo + j as f64 * fine;
                quadrature_spectrum(tm, w).map(|c| c - c_inf)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvolutionEngine {
            tm: tm.clone(),
            window_t,
            half_width,
            step: fine,
            grid_start: lo,
            excess,
            c_inf,
        })
    }

    fn mass(&self, u_lo: f64, u_hi: f64) -> f64 {
        filter_mass_below(u_hi, self.window_t) - filter_mass_below(u_lo, self.window_t)
    }

    fn pass(&self, omega_n: f64, stride: usize) -> Result<Matrix4<f64>> {
        // Exact-mass midpoint rule over cells centered on grid points:
        // V = C∞ (full unit mass, analytic) + Σ_j mass_j (C(x_j) − C∞).
        //
        // When the window is so long that the sinc core is narrower than
        // the grid, the core |u| < r is taken out of the cells and handled
        // by moment expansion: mass(core)·C_excess(ω_n) + ½ M₂ C_excess″,
        // with the exact second filter moment M₂ = (2/(πT))(r − sin(rT)/T).
        let h = self.step * stride as f64;
        let lobe = TWO_PI / self.window_t;
        let core_r = if lobe < 8.0 * h {
            (6.0 * lobe).max(1.5 * h)
        } else {
            0.0
        };
        let lo_idx = ((omega_n - self.half_width - self.grid_start) / self.step).ceil() as i64;
        let hi_idx = ((omega_n + self.half_width - self.grid_start) / self.step).floor() as i64;
        let mut acc = Matrix4::zeros();
        let mut j = lo_idx.max(0) as usize;
        // Align the coarse pass to even indices so its samples are a strict
        // subset of the fine pass.
        if stride > 1 {
            j += j % stride;
        }
        while j <= hi_idx as usize && j < self.excess.len() {
            let x = self.grid_start + j as f64 * self.step;
            let u_lo = omega_n - x - 0.5 * h;
            let u_hi = omega_n - x + 0.5 * h;
            let mass = if core_r == 0.0 {
                self.mass(u_lo, u_hi)
            } else {
                // Clip the core interval (−r, r) out of this cell.
                let mut m = 0.0;
                if u_lo < -core_r {
                    m += self.mass(u_lo, u_hi.min(-core_r));
                }
                if u_hi > core_r {
                    m += self.mass(u_lo.max(core_r), u_hi);
                }
                m
            };
            acc += self.excess[j] * mass;
            j += stride;
        }
        if core_r > 0.0 {
            let c_n = quadrature_spectrum(&self.tm, omega_n)? - self.c_inf;
            let core_mass = self.mass(-core_r, core_r);
            let t = self.window_t;
            let m2 = (2.0 / (std::f64::consts::PI * t)) * (core_r - (core_r * t).sin() / t);
            let j0 = (((omega_n - self.grid_start) / self.step).round() as i64)
                .clamp(2, self.excess.len() as i64 - 3) as usize;
            let c2 = (self.excess[j0 + 2] - self.excess[j0] * 2.0 + self.excess[j0 - 2])
                / (2.0 * self.step).powi(2);
            acc += c_n * core_mass + c2 * (0.5 * m2);
        }
        Ok(self.c_inf + acc)
    }

    /// Filtered covariance at ω_n with an accuracy check: the coarse and
    /// fine passes must agree within 1e-4 of the diagonal scale.
    pub fn covariance_at(&self, omega_n: f64) -> Result<CovarianceMatrix> {
        let fine = self.pass(omega_n, 1)?;
        let coarse = self.pass(omega_n, 2)?;
        let scale = (0..4).map(|i| fine[(i, i)]).fold(0.0f64, f64::max);
        let err = (fine - coarse).abs().max();
        if err > 1e-4 * scale {
            return Err(Error::numerical(format!(
                "convolution accuracy {err:.3e} exceeds 1e-4 of diagonal ({scale:.3e}) at ω_n = {omega_n:.3e}"
            )));
        }
        let sym = (fine + fine.transpose()) * 0.5;
        Ok(CovarianceMatrix::from_matrix(sym, omega_n))
    }
}

/// Filtered covariance matrices for every frequency of `grid`.
pub fn covariance_sweep(
    cfg: &SystemConfig,
    tm: &TransferMatrices,
    grid: &SpectralGrid,
) -> Result<Vec<CovarianceMatrix>> {
    let engine = ConvolutionEngine::new(cfg, tm, &grid.frequencies, grid.window_t)?;
    grid.frequencies
        .iter()
        .map(|&w| engine.covariance_at(w))
        .collect()
}

// ---------------------------------------------------------------------------
// CSV export / import
// ---------------------------------------------------------------------------

pub const SPECTRA_CSV_HEADER: &str = "offset_hz,V11,V22,V33,V44,V13,V24,V14,V23";

/// Write the spectra CSV (one row per analysis frequency).
pub fn write_spectra_csv<W: std::io::Write>(mut w: W, rows: &[CovarianceMatrix]) -> Result<()> {
    writeln!(w, "{SPECTRA_CSV_HEADER}")?;
    for cm in rows {
        let v = &cm.v;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            rads_to_hz(cm.frequency),
            v[0][0],
            v[1][1],
            v[2][2],
            v[3][3],
            v[0][2],
            v[1][3],
            v[0][3],
            v[1][2]
        )?;
    }
    Ok(())
}

/// Read a spectra CSV back; elements outside the stored set follow the
/// standard block structure (V12 = V34 = 0, V23 = V14 as stored).
pub fn read_spectra_csv<R: std::io::BufRead>(r: R) -> Result<Vec<CovarianceMatrix>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with("offset_hz") {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::validation(format!("csv line {}: {e}", idx + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if fields.len() != 9 {
            return Err(Error::validation(format!(
                "csv line {}: expected 9 columns, got {}",
                idx + 1,
                fields.len()
            )));
        }
        let [off, v11, v22, v33, v44, v13, v24, v14, v23] = <[f64; 9]>::try_from(fields).unwrap();
        let mut v = Matrix4::zeros();
        v[(0, 0)] = v11;
        v[(1, 1)] = v22;
        v[(2, 2)] = v33;
        v[(3, 3)] = v44;
        v[(0, 2)] = v13;
        v[(2, 0)] = v13;
        v[(1, 3)] = v24;
        v[(3, 1)] = v24;
        v[(0, 3)] = v14;
        v[(3, 0)] = v14;
        v[(1, 2)] = v23;
        v[(2, 1)] = v23;
        out.push(CovarianceMatrix::from_matrix(
            v,
            crate::units::hz_to_rads(off),
        ));
    }
    Ok(out)
}
