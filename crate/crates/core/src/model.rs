//! Linearized five-mode cavity electro-optic model.
//!
//! Four quantum modes — microwave (e), optical Stokes (o), optical
//! anti-Stokes (t) and a transverse-magnetic optical mode (tm) — plus a
//! classical pump. The pump is eliminated at its steady state, leaving a
//! linear quantum Langevin system
//!
//! ```text
//!   v̇(t) = M v(t) + K f_in(t)
//! ```
//!
//! over the conjugate-pair mode vector
//! v = (a_e, a_e†, a_o, a_o†, a_t, a_t†, a_tm, a_tm†) and twelve input
//! noises f_in = (intrinsic e, waveguide e, intrinsic o, external o,
//! t vacuum, tm vacuum), each an (a, a†) pair. The microwave–Stokes pair
//! couples through two-mode squeezing at the multiphoton rate g, the
//! microwave–anti-Stokes pair through a beam-splitter term, and t–tm through
//! the mode-hybridization rate J.

use nalgebra::{Complex, SMatrix};
use serde::Deserialize;

use crate::units::hz_to_rads;
use crate::{Error, Result};

pub type C64 = Complex<f64>;
/// 8×8 complex drift matrix.
pub type DriftMatrix = SMatrix<C64, 8, 8>;
/// 8×12 noise-input matrix.
pub type NoiseInputMatrix = SMatrix<f64, 8, 12>;
/// 4×12 input selector.
pub type InputSelector = SMatrix<f64, 4, 12>;
/// 4×8 output-coupling matrix.
pub type OutputCoupling = SMatrix<f64, 4, 8>;

/// Loss, coupling and detuning of one quantum mode.
///
/// `delta` is the detuning from the scattered-sideband rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    /// Total angular loss rate κ (rad/s).
    pub kappa: f64,
    /// External coupling efficiency η ∈ [0, 1].
    pub eta: f64,
    /// Detuning δ from the rotating frame (rad/s).
    pub delta: f64,
}

impl ModeParams {
    pub fn new(kappa: f64, eta: f64, delta: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::validation(format!("kappa must be > 0, got {kappa}")));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::validation(format!("eta must be in [0, 1], got {eta}")));
        }
        if !delta.is_finite() {
            return Err(Error::validation("delta must be finite"));
        }
        Ok(ModeParams { kappa, eta, delta })
    }
}

/// Classical pump drive parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpParams {
    /// Pump mode loss rate κ_p (rad/s).
    pub kappa_p: f64,
    /// Pump external coupling efficiency η_p.
    pub eta_p: f64,
    /// Pump detuning Δ_p (rad/s); the laser is locked on resonance by
    /// default (Δ_p = 0).
    pub delta_p: f64,
    /// Input drive amplitude ā_in (√(photons/s)).
    pub drive_amplitude: f64,
    /// Vacuum electro-optic coupling rate g₀ (rad/s).
    pub g0: f64,
    /// Anti-Stokes ↔ TM coupling rate J (rad/s).
    pub j_coupling: f64,
}

impl PumpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_p > 0.0) {
            return Err(Error::validation("pump kappa_p must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.eta_p) {
            return Err(Error::validation("pump eta_p must be in [0, 1]"));
        }
        if self.g0 < 0.0 || self.j_coupling < 0.0 {
            return Err(Error::validation("g0 and J must be >= 0"));
        }
        Ok(())
    }
}

/// Thermal occupancies of the microwave baths. All optical baths are vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BathOccupancy {
    /// Microwave intrinsic bath occupancy n̄_e,int (photons).
    pub n_e_int: f64,
    /// Microwave waveguide bath occupancy n̄_e,wg (photons).
    pub n_e_wg: f64,
}

impl BathOccupancy {
    pub fn validate(&self) -> Result<()> {
        if self.n_e_int < 0.0 || self.n_e_wg < 0.0 {
            return Err(Error::validation("bath occupancies must be >= 0"));
        }
        Ok(())
    }
}

/// Complete physical description of the five-mode system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub mode_e: ModeParams,
    pub mode_o: ModeParams,
    pub mode_t: ModeParams,
    pub mode_tm: ModeParams,
    pub pump: PumpParams,
    pub bath: BathOccupancy,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, m) in [
            ("mode_e", &self.mode_e),
            ("mode_o", &self.mode_o),
            ("mode_t", &self.mode_t),
            ("mode_tm", &self.mode_tm),
        ] {
            ModeParams::new(m.kappa, m.eta, m.delta)
                .map_err(|e| Error::validation(format!("{name}: {e}")))?;
        }
        self.pump.validate()?;
        self.bath.validate()
    }

    /// Multiphoton coupling implied by the steady-state pump.
    pub fn coupling_g(&self) -> f64 {
        multiphoton_coupling(pump_steady_state(&self.pump), self.pump.g0)
    }

    /// Cooperativity implied by the steady-state pump.
    pub fn cooperativity(&self) -> f64 {
        cooperativity(self.coupling_g(), self.mode_e.kappa, self.mode_o.kappa)
    }
}

/// Steady-state intracavity pump amplitude
/// ā_p = √(η_p κ_p) ā_in / (κ_p/2 − iΔ_p).
pub fn pump_steady_state(pump: &PumpParams) -> C64 {
    let num = (pump.eta_p * pump.kappa_p).sqrt() * pump.drive_amplitude;
    let den = C64::new(pump.kappa_p / 2.0, -pump.delta_p);
    C64::new(num, 0.0) / den
}

/// Multiphoton coupling g = |ā_p| g₀. The pump phase is absorbed into the
/// mode definitions, so g is real and non-negative.
pub fn multiphoton_coupling(pump_amplitude: C64, g0: f64) -> f64 {
    pump_amplitude.norm() * g0
}

/// Cooperativity C = 4g²/(κ_e κ_o). Parametric instability at C = 1.
pub fn cooperativity(g: f64, kappa_e: f64, kappa_o: f64) -> f64 {
    4.0 * g * g / (kappa_e * kappa_o)
}

/// Constant matrices of the quantum Langevin system and its input–output
/// relation.
///
/// Index convention for the 12 noise slots (pairs of (a, a†)):
/// (e intrinsic, e waveguide, o intrinsic, o external, t vacuum, tm vacuum).
#[derive(Debug, Clone)]
pub struct TransferMatrices {
    /// Drift matrix M (8×8).
    pub m: DriftMatrix,
    /// Noise-input matrix K (8×12).
    pub k: NoiseInputMatrix,
    /// Selector L (4×12) picking the reflected external inputs.
    pub l: InputSelector,
    /// Output coupling N = (N_J, 0) (4×8).
    pub n: OutputCoupling,
    /// Frequency-sign matrix O = Diag(1,−1,1,1) ⊗ σ_z (8×8 diagonal).
    pub o_signs: SMatrix<f64, 8, 8>,
    /// Diffusion matrix D (12×12 diagonal), ⟨f_in f_in†⟩ densities.
    pub d: SMatrix<f64, 12, 12>,
    /// Commutator matrix Λ (12×12 diagonal, +1/−1 per conjugate pair).
    pub lambda: SMatrix<f64, 12, 12>,
}

/// Build all constant matrices for a given multiphoton coupling g.
///
/// The drift diagonal carries (−κ/2 ± iδ) per conjugate pair; off-diagonals
/// carry the ∓ig two-mode-squeezing entries (e ↔ o), the ∓ig beam-splitter
/// entries (e ↔ t), and ∓iJ (t ↔ tm). g is taken real by convention.
pub fn build_transfer_matrices(cfg: &SystemConfig, g: f64) -> Result<TransferMatrices> {
    cfg.validate()?;
    if g < 0.0 || !g.is_finite() {
        return Err(Error::validation("coupling g must be finite and >= 0"));
    }

    let i = C64::i();
    let re = |x: f64| C64::new(x, 0.0);
    let (ke, ko, kt, km) = (
        cfg.mode_e.kappa,
        cfg.mode_o.kappa,
        cfg.mode_t.kappa,
        cfg.mode_tm.kappa,
    );
    let (d_o, d_t, d_tm) = (cfg.mode_o.delta, cfg.mode_t.delta, cfg.mode_tm.delta);
    let gc = re(g); // real by convention; conjugates kept explicit below

    let mut m = DriftMatrix::zeros();
    // microwave pair: no detuning in the co-rotating frame
    m[(0, 0)] = re(-ke / 2.0);
    m[(1, 1)] = re(-ke / 2.0);
    m[(0, 3)] = -i * gc; // a_e  ← a_o†  (two-mode squeezing)
    m[(1, 2)] = i * gc.conj(); // a_e† ← a_o
    m[(0, 4)] = -i * gc.conj(); // a_e  ← a_t   (beam splitter)
    m[(1, 5)] = i * gc; // a_e† ← a_t†
    // Stokes pair
    m[(2, 2)] = C64::new(-ko / 2.0, d_o);
    m[(3, 3)] = C64::new(-ko / 2.0, -d_o);
    m[(2, 1)] = -i * gc;
    m[(3, 0)] = i * gc.conj();
    // anti-Stokes pair
    m[(4, 4)] = C64::new(-kt / 2.0, d_t);
    m[(5, 5)] = C64::new(-kt / 2.0, -d_t);
    m[(4, 0)] = -i * gc;
    m[(5, 1)] = i * gc.conj();
    m[(4, 6)] = -i * re(cfg.pump.j_coupling);
    m[(5, 7)] = i * re(cfg.pump.j_coupling);
    // TM pair
    m[(6, 6)] = C64::new(-km / 2.0, d_tm);
    m[(7, 7)] = C64::new(-km / 2.0, -d_tm);
    m[(6, 4)] = -i * re(cfg.pump.j_coupling);
    m[(7, 5)] = i * re(cfg.pump.j_coupling);

    // K: which noise drives which mode, per conjugate pair.
    let mut k = NoiseInputMatrix::zeros();
    let couplings = [
        (0usize, 0usize, ((1.0 - cfg.mode_e.eta) * ke).sqrt()),
        (0, 1, (cfg.mode_e.eta * ke).sqrt()),
        (1, 2, ((1.0 - cfg.mode_o.eta) * ko).sqrt()),
        (1, 3, (cfg.mode_o.eta * ko).sqrt()),
        (2, 4, kt.sqrt()),
        (3, 5, km.sqrt()),
    ];
    for (mode, noise, amp) in couplings {
        k[(2 * mode, 2 * noise)] = amp;
        k[(2 * mode + 1, 2 * noise + 1)] = amp;
    }

    // L selects the external (waveguide) inputs reflected into the outputs.
    let mut l = InputSelector::zeros();
    l[(0, 2)] = 1.0;
    l[(1, 3)] = 1.0;
    l[(2, 6)] = 1.0;
    l[(3, 7)] = 1.0;

    // N = (N_J, 0): only e and o couple to the monitored outputs.
    let mut n = OutputCoupling::zeros();
    let ne = (cfg.mode_e.eta * ke).sqrt();
    let no = (cfg.mode_o.eta * ko).sqrt();
    n[(0, 0)] = ne;
    n[(1, 1)] = ne;
    n[(2, 2)] = no;
    n[(3, 3)] = no;

    // O = Diag(1,−1,1,1) ⊗ σ_z encodes which vector components are read at
    // +ω and which at −ω (the Stokes pair is frequency-reversed).
    let mut o_signs = SMatrix::<f64, 8, 8>::zeros();
    for (block, s) in [1.0f64, -1.0, 1.0, 1.0].iter().enumerate() {
        o_signs[(2 * block, 2 * block)] = s * 1.0;
        o_signs[(2 * block + 1, 2 * block + 1)] = s * -1.0;
    }

    let mut d = SMatrix::<f64, 12, 12>::zeros();
    let occupancies = [cfg.bath.n_e_int, cfg.bath.n_e_wg, 0.0, 0.0, 0.0, 0.0];
    for (pair, nb) in occupancies.iter().enumerate() {
        d[(2 * pair, 2 * pair)] = nb + 1.0;
        d[(2 * pair + 1, 2 * pair + 1)] = *nb;
    }

    let mut lambda = SMatrix::<f64, 12, 12>::zeros();
    for pair in 0..6 {
        lambda[(2 * pair, 2 * pair)] = 1.0;
        lambda[(2 * pair + 1, 2 * pair + 1)] = -1.0;
    }

    Ok(TransferMatrices {
        m,
        k,
        l,
        n,
        o_signs,
        d,
        lambda,
    })
}

// ---------------------------------------------------------------------------
// Config file loading ([mode_e]/[mode_o]/[mode_t]/[mode_tm]/[pump]/[bath],
// frequencies in Hz).
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct RawMode {
    kappa_hz: f64,
    eta: f64,
    #[serde(default)]
    delta_hz: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RawPump {
    kappa_hz: f64,
    eta: f64,
    #[serde(default)]
    delta_hz: f64,
    drive_amplitude: f64,
    g0_hz: f64,
    #[serde(default)]
    j_hz: f64,
}

#[derive(Debug, Deserialize, Default)]
struct RawBath {
    #[serde(default)]
    n_e_int: f64,
    #[serde(default)]
    n_e_wg: f64,
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    mode_e: RawMode,
    mode_o: RawMode,
    mode_t: RawMode,
    mode_tm: RawMode,
    pump: RawPump,
    #[serde(default)]
    bath: RawBath,
}

impl SystemConfig {
    /// Parse a config document. Frequencies are given in Hz and converted to
    /// angular units here. When `mode_t.delta_hz` is omitted it defaults to
    /// −δ_o (no optical mode dispersion); `mode_tm.delta_hz` defaults to δ_t.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| Error::validation(format!("config parse error: {e}")))?;
        let delta_o = hz_to_rads(raw.mode_o.delta_hz.unwrap_or(0.0));
        let delta_t = match raw.mode_t.delta_hz {
            Some(hz) => hz_to_rads(hz),
            None => -delta_o,
        };
        let delta_tm = match raw.mode_tm.delta_hz {
            Some(hz) => hz_to_rads(hz),
            None => delta_t,
        };
        let mode = |r: &RawMode, delta: f64, name: &str| -> Result<ModeParams> {
            ModeParams::new(hz_to_rads(r.kappa_hz), r.eta, delta)
                .map_err(|e| Error::validation(format!("{name}: {e}")))
        };
        let cfg = SystemConfig {
            mode_e: mode(&raw.mode_e, hz_to_rads(raw.mode_e.delta_hz.unwrap_or(0.0)), "mode_e")?,
            mode_o: mode(&raw.mode_o, delta_o, "mode_o")?,
            mode_t: mode(&raw.mode_t, delta_t, "mode_t")?,
            mode_tm: mode(&raw.mode_tm, delta_tm, "mode_tm")?,
            pump: PumpParams {
                kappa_p: hz_to_rads(raw.pump.kappa_hz),
                eta_p: raw.pump.eta,
                delta_p: hz_to_rads(raw.pump.delta_hz),
                drive_amplitude: raw.pump.drive_amplitude,
                g0: hz_to_rads(raw.pump.g0_hz),
                j_coupling: hz_to_rads(raw.pump.j_hz),
            },
            bath: BathOccupancy {
                n_e_int: raw.bath.n_e_int,
                n_e_wg: raw.bath.n_e_wg,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::TWO_PI;
    use approx::assert_relative_eq;

    pub(crate) fn test_config(g0_scale: f64) -> SystemConfig {
        SystemConfig {
            mode_e: ModeParams::new(TWO_PI * 11e6, 0.41, 0.0).unwrap(),
            mode_o: ModeParams::new(TWO_PI * 28e6, 0.22, 0.0).unwrap(),
            mode_t: ModeParams::new(TWO_PI * 28e6, 0.3, 0.0).unwrap(),
            mode_tm: ModeParams::new(TWO_PI * 28e6, 0.0, 0.0).unwrap(),
            pump: PumpParams {
                kappa_p: TWO_PI * 28e6,
                eta_p: 0.5,
                delta_p: 0.0,
                drive_amplitude: 9.437e8 * g0_scale,
                g0: TWO_PI * 37.0,
                j_coupling: TWO_PI * 44e6,
            },
            bath: BathOccupancy {
                n_e_int: 0.07,
                n_e_wg: 0.0,
            },
        }
    }

    #[test]
    fn pump_zero_drive_gives_zero_amplitude() {
        let mut pump = test_config(1.0).pump;
        pump.drive_amplitude = 0.0;
        assert_eq!(pump_steady_state(&pump).norm(), 0.0);
    }

    #[test]
    fn pump_reaches_published_photon_number() {
        // Resonant drive, critically coupled: |ā_p|² = 4 η κ |ā_in|² / κ².
        // Drive chosen so n̄_p = 1.6e10.
        let kappa_p = TWO_PI * 10e6;
        let n_target = 1.6e10f64;
        let drive = (n_target * kappa_p / 4.0).sqrt();
        let pump = PumpParams {
            kappa_p,
            eta_p: 1.0,
            delta_p: 0.0,
            drive_amplitude: drive,
            g0: TWO_PI * 37.0,
            j_coupling: 0.0,
        };
        let a_p = pump_steady_state(&pump);
        assert_relative_eq!(a_p.norm_sqr(), 1.6e10, max_relative = 1e-12);
        assert!(a_p.im.abs() < 1e-9 && a_p.re > 0.0);
    }

    #[test]
    fn pump_half_width_detuning_halves_photon_number() {
        let mut pump = test_config(1.0).pump;
        pump.delta_p = 0.0;
        let resonant = pump_steady_state(&pump).norm_sqr();
        pump.delta_p = pump.kappa_p / 2.0;
        let detuned = pump_steady_state(&pump).norm_sqr();
        assert_relative_eq!(detuned, resonant / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn multiphoton_coupling_from_published_numbers() {
        // √(1.6e10) · 37 Hz = 4.6802e6 Hz (in ordinary frequency units).
        let g = multiphoton_coupling(C64::new(1.6e10f64.sqrt(), 0.0), TWO_PI * 37.0);
        assert_relative_eq!(g / TWO_PI, 4.680_170_9e6, max_relative = 1e-6);
        assert_eq!(multiphoton_coupling(C64::new(0.0, 0.0), TWO_PI * 37.0), 0.0);
        assert_eq!(multiphoton_coupling(C64::new(1e5, 2e4), 0.0), 0.0);
    }

    #[test]
    fn cooperativity_inversion_matches_published_rates() {
        // C = 0.18 with κ_e/2π = 11 MHz, κ_o/2π = 28 MHz → g/2π = 3.7229 MHz.
        let g = TWO_PI * 3.722_902_1e6;
        let c = cooperativity(g, TWO_PI * 11e6, TWO_PI * 28e6);
        assert_relative_eq!(c, 0.18, max_relative = 1e-6);
        assert_eq!(cooperativity(0.0, 1.0, 1.0), 0.0);
        assert_relative_eq!(
            cooperativity(2.0 * g, TWO_PI * 11e6, TWO_PI * 28e6),
            4.0 * c,
            max_relative = 1e-12
        );
    }

    #[test]
    fn drift_matrix_sparsity_and_conjugate_pairing() {
        let cfg = test_config(1.0);
        let g = cfg.coupling_g();
        let tm = build_transfer_matrices(&cfg, g).unwrap();
        // Structural zero pattern: allowed couplings only.
        let allowed: &[(usize, usize)] = &[
            (0, 0), (1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (6, 6), (7, 7),
            (0, 3), (1, 2), (2, 1), (3, 0), // e ↔ o (TMS)
            (0, 4), (1, 5), (4, 0), (5, 1), // e ↔ t (BS)
            (4, 6), (5, 7), (6, 4), (7, 5), // t ↔ tm
        ];
        for r in 0..8 {
            for c in 0..8 {
                if !allowed.contains(&(r, c)) {
                    assert_eq!(tm.m[(r, c)], C64::new(0.0, 0.0), "M[{r}][{c}] must be 0");
                }
            }
        }
        // Conjugate-pair symmetry between (a, a†) rows/columns.
        for br in 0..4 {
            for bc in 0..4 {
                let a = tm.m[(2 * br, 2 * bc)];
                let b = tm.m[(2 * br + 1, 2 * bc + 1)];
                assert_relative_eq!(b.re, a.conj().re, epsilon = 1e-12);
                assert_relative_eq!(b.im, a.conj().im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_limit_is_diagonal() {
        let mut cfg = test_config(1.0);
        cfg.pump.j_coupling = 0.0;
        let tm = build_transfer_matrices(&cfg, 0.0).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                if r != c {
                    assert_eq!(tm.m[(r, c)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn diffusion_and_commutator_structure() {
        let cfg = test_config(1.0);
        let tm = build_transfer_matrices(&cfg, cfg.coupling_g()).unwrap();
        let expect = [
            1.07, 0.07, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0,
        ];
        for (idx, want) in expect.iter().enumerate() {
            assert_relative_eq!(tm.d[(idx, idx)], want, epsilon = 1e-12);
            assert!(tm.d[(idx, idx)] >= 0.0);
        }
        let lambda_sq = tm.lambda * tm.lambda;
        assert_eq!(lambda_sq, SMatrix::<f64, 12, 12>::identity());
    }

    #[test]
    fn stability_below_threshold() {
        // δ = 0, J = 0: max Re eig(M) < 0 for C < 1. Holds with the
        // anti-Stokes mode active, whose beam-splitter channel only damps.
        let mut cfg = test_config(1.0);
        cfg.pump.j_coupling = 0.0;
        let (ke, ko) = (cfg.mode_e.kappa, cfg.mode_o.kappa);
        for c_target in [0.5, 0.9, 0.99] {
            let g = (c_target * ke * ko / 4.0).sqrt();
            let tm = build_transfer_matrices(&cfg, g).unwrap();
            let eigs = tm.m.eigenvalues().expect("8x8 complex eigenvalues");
            let max_re = eigs.iter().map(|l| l.re).fold(f64::MIN, f64::max);
            assert!(max_re < 0.0, "C = {c_target}: max Re λ = {max_re}");
        }
    }

    #[test]
    fn parametric_threshold_at_unit_cooperativity() {
        // The C = 1 instability is a property of the microwave–Stokes pair;
        // an active anti-Stokes channel shifts it upward (its beam-splitter
        // damping competes with the parametric gain). Overdamping the t/tm
        // modes isolates the pair, and the crossing lands at C = 1.
        let mut cfg = test_config(1.0);
        cfg.pump.j_coupling = 0.0;
        cfg.mode_t = ModeParams::new(1e4 * cfg.mode_o.kappa, 0.0, 0.0).unwrap();
        cfg.mode_tm = ModeParams::new(1e4 * cfg.mode_o.kappa, 0.0, 0.0).unwrap();
        let (ke, ko) = (cfg.mode_e.kappa, cfg.mode_o.kappa);
        let max_re_at = |c_target: f64| {
            let g = (c_target * ke * ko / 4.0).sqrt();
            let tm = build_transfer_matrices(&cfg, g).unwrap();
            let eigs = tm.m.eigenvalues().unwrap();
            eigs.iter().map(|l| l.re).fold(f64::MIN, f64::max)
        };
        assert!(max_re_at(0.999) < 0.0);
        assert!(max_re_at(1.001) > -1e-3 * ke);
        assert!(max_re_at(1.0).abs() < 1e-3 * ke);
    }

    #[test]
    fn config_roundtrip_from_toml() {
        let text = r#"
[mode_e]
kappa_hz = 11e6
eta = 0.41

[mode_o]
kappa_hz = 28e6
eta = 0.22
delta_hz = 1.5e6

[mode_t]
kappa_hz = 28e6
eta = 0.3

[mode_tm]
kappa_hz = 28e6
eta = 0.0

[pump]
kappa_hz = 28e6
eta = 0.5
drive_amplitude = 9.437e8
g0_hz = 37.0
j_hz = 44e6

[bath]
n_e_int = 0.07
"#;
        let cfg = SystemConfig::from_toml_str(text).unwrap();
        assert_relative_eq!(cfg.mode_e.kappa, TWO_PI * 11e6, max_relative = 1e-12);
        // δ_t defaults to −δ_o, δ_tm follows δ_t.
        assert_relative_eq!(cfg.mode_t.delta, -TWO_PI * 1.5e6, max_relative = 1e-12);
        assert_relative_eq!(cfg.mode_tm.delta, -TWO_PI * 1.5e6, max_relative = 1e-12);
        assert_relative_eq!(cfg.bath.n_e_int, 0.07);
        // C lands near the published operating point with these defaults.
        let c = cfg.cooperativity();
        assert!(c > 0.15 && c < 0.21, "C = {c}");
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(ModeParams::new(-1.0, 0.5, 0.0).is_err());
        assert!(ModeParams::new(1.0, 1.5, 0.0).is_err());
        let text = "[mode_e]\nkappa_hz = 11e6\n"; // missing sections
        assert!(SystemConfig::from_toml_str(text).is_err());
    }
}
