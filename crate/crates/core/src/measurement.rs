//! Heterodyne detection with gain and added noise.
//!
//! Both output fields are mixed with local oscillators detuned by the
//! intermediate frequency Ω_IF, on opposite sides of their resonances:
//! Δ_LO,e = −Ω_IF (microwave LO below) and Δ_LO,o = +Ω_IF (optical LO
//! above). With this placement, a frequency-reversed signal pair — the
//! pairing produced by two-mode squeezing — lands at the *same* detected
//! frequency ω_n + Ω_IF in the two current spectra, which is what makes
//! broadband covariance reconstruction per detected bin possible. The
//! detected current covariance is
//!
//! ```text
//!   D_AB(ω_n) = √(G_A G_B) · (V_AB(ω_n) + N_A,add δ_AB),
//! ```
//!
//! where N_add (≥ 1/2, including the heterodyne vacuum unit) is the added
//! noise of the chain referenced to the device output and G the
//! frequency-dependent power gain at ω_n + Ω_IF.

use nalgebra::Matrix4;
use serde::Deserialize;

use crate::spectra::CovarianceMatrix;
use crate::units::{db_to_linear, hz_to_rads};
use crate::{Error, Result};

/// Which detection channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Microwave,
    Optical,
}

impl Channel {
    /// Sign of the device-frame frequency read out at detected offset +ω:
    /// the microwave channel (LO below resonance) exposes −ω content, the
    /// optical channel (LO above) +ω.
    pub fn device_frequency_sign(self) -> f64 {
        match self {
            Channel::Microwave => -1.0,
            Channel::Optical => 1.0,
        }
    }
}

/// Power gain versus absolute detected frequency, interpolated linearly in
/// power between tabulated points and clamped at the table ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GainCurve {
    /// (detected frequency rad/s, linear power gain), sorted by frequency.
    points: Vec<(f64, f64)>,
}

impl GainCurve {
    pub fn flat(linear: f64) -> Result<Self> {
        if !(linear > 0.0) {
            return Err(Error::validation("gain must be strictly positive"));
        }
        Ok(GainCurve {
            points: vec![(0.0, linear)],
        })
    }

    pub fn from_table(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("empty gain table"));
        }
        if points.iter().any(|&(_, g)| !(g > 0.0)) {
            return Err(Error::validation("gain table entries must be > 0"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(GainCurve { points })
    }

    /// Linear power gain at detected frequency (rad/s).
    pub fn at(&self, omega: f64) -> f64 {
        let pts = &self.points;
        if omega <= pts[0].0 {
            return pts[0].1;
        }
        if omega >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let idx = pts.partition_point(|&(w, _)| w <= omega);
        let (w0, g0) = pts[idx - 1];
        let (w1, g1) = pts[idx];
        let frac = (omega - w0) / (w1 - w0);
        g0 + frac * (g1 - g0)
    }
}

/// One channel of the detection chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelChain {
    /// Added noise referenced to the device output (photons); includes the
    /// heterodyne half-photon, so never below 1/2.
    pub n_add: f64,
    /// 1σ uncertainty of the added-noise calibration (for systematics).
    pub n_add_sigma: f64,
    /// Power gain curve over detected frequency.
    pub gain: GainCurve,
    /// LO placement sign (−1: LO below resonance, +1: above).
    pub lo_sign: i8,
}

impl ChannelChain {
    fn validate(&self, name: &str, expected_sign: i8) -> Result<()> {
        if self.n_add < 0.5 - 1e-9 {
            return Err(Error::validation(format!(
                "{name}: n_add = {} beats the heterodyne bound of 0.5",
                self.n_add
            )));
        }
        if self.n_add_sigma < 0.0 {
            return Err(Error::validation(format!("{name}: negative n_add_sigma")));
        }
        if self.lo_sign != expected_sign {
            return Err(Error::validation(format!(
                "{name}: lo_sign must be {expected_sign}"
            )));
        }
        Ok(())
    }
}

/// Full two-channel heterodyne detection chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionChain {
    pub microwave: ChannelChain,
    pub optical: ChannelChain,
    /// Intermediate frequency Ω_IF (rad/s).
    pub omega_if: f64,
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        self.microwave.validate("microwave", -1)?;
        self.optical.validate("optical", 1)?;
        if !(self.omega_if > 0.0) {
            return Err(Error::validation("omega_if must be > 0"));
        }
        Ok(())
    }

    pub fn channel(&self, ch: Channel) -> &ChannelChain {
        match ch {
            Channel::Microwave => &self.microwave,
            Channel::Optical => &self.optical,
        }
    }

    /// Per-quadrature gain vector (G_e, G_e, G_o, G_o) at detected
    /// frequency ω_n + Ω_IF.
    pub fn gains_at(&self, omega_n: f64) -> [f64; 4] {
        let det = omega_n + self.omega_if;
        let ge = self.microwave.gain.at(det);
        let go = self.optical.gain.at(det);
        [ge, ge, go, go]
    }

    fn n_add_diag(&self) -> [f64; 4] {
        [
            self.microwave.n_add,
            self.microwave.n_add,
            self.optical.n_add,
            self.optical.n_add,
        ]
    }
}

/// Detected heterodyne noise power density at ω_n + Ω_IF:
/// S_II,det = G·[(S_XX(sω_n) + S_PP(sω_n))/2 + N_add], with the channel's
/// device-frequency sign s (microwave reads −ω_n, optics +ω_n).
pub fn heterodyne_noise_spectrum(
    chain: &DetectionChain,
    channel: Channel,
    device_psd: impl Fn(f64) -> (f64, f64),
    omega_n: f64,
) -> f64 {
    let ch = chain.channel(channel);
    let s = channel.device_frequency_sign();
    let (s_xx, s_pp) = device_psd(s * omega_n);
    let g = ch.gain.at(omega_n + chain.omega_if);
    g * (0.5 * (s_xx + s_pp) + ch.n_add)
}

/// Detected-current covariance D_AB = √(G_A G_B)(V_AB + N_AB,add).
pub fn detected_covariance(
    v: &CovarianceMatrix,
    chain: &DetectionChain,
    omega_n: f64,
) -> Matrix4<f64> {
    let gains = chain.gains_at(omega_n);
    let n_add = chain.n_add_diag();
    let vm = v.matrix();
    Matrix4::from_fn(|r, c| {
        let base = vm[(r, c)] + if r == c { n_add[r] } else { 0.0 };
        (gains[r] * gains[c]).sqrt() * base
    })
}

/// Result of referring a detected covariance back to the device output.
#[derive(Debug, Clone, Copy)]
pub struct CalibratedCovariance {
    /// V_meas = D/√(G_A G_B): device-unit covariance including added noise.
    pub v_meas: CovarianceMatrix,
    /// V = V_meas − N_add on the diagonal.
    pub v: CovarianceMatrix,
    /// Set when a diagonal went negative after subtraction (miscalibration;
    /// values are passed through for error analysis).
    pub negative_variance: bool,
}

/// Undo gain and added noise: V_meas = D/√(G_A G_B), V_ii = V_ii,meas −
/// N_ii,add. Fails on non-positive gains.
pub fn calibrate_out(
    d: &Matrix4<f64>,
    chain: &DetectionChain,
    omega_n: f64,
) -> Result<CalibratedCovariance> {
    let gains = chain.gains_at(omega_n);
    if gains.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
        return Err(Error::validation(
            "calibrate_out: detection gain must be positive and finite",
        ));
    }
    let n_add = chain.n_add_diag();
    let v_meas = Matrix4::from_fn(|r, c| d[(r, c)] / (gains[r] * gains[c]).sqrt());
    let mut v = v_meas;
    let mut negative = false;
    for i in 0..4 {
        v[(i, i)] -= n_add[i];
        if v[(i, i)] < 0.0 {
            negative = true;
        }
    }
    Ok(CalibratedCovariance {
        v_meas: CovarianceMatrix::from_matrix(v_meas, omega_n),
        v: CovarianceMatrix::from_matrix(v, omega_n),
        negative_variance: negative,
    })
}

// ---------------------------------------------------------------------------
// Chain file loading
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct RawGainPoint {
    hz: f64,
    db: f64,
}

#[derive(Debug, Deserialize)]
struct RawChannel {
    n_add: f64,
    #[serde(default)]
    n_add_sigma: f64,
    #[serde(default)]
    gain_db: Option<f64>,
    #[serde(default)]
    gain_table: Option<Vec<RawGainPoint>>,
    #[serde(default)]
    lo_sign: Option<i8>,
}

#[derive(Debug, Deserialize)]
struct RawChain {
    omega_if_hz: f64,
    microwave: RawChannel,
    optical: RawChannel,
}

fn channel_from_raw(raw: &RawChannel, default_sign: i8, name: &str) -> Result<ChannelChain> {
    let gain = match (&raw.gain_table, raw.gain_db) {
        (Some(table), _) => GainCurve::from_table(
            table
                .iter()
                .map(|p| (hz_to_rads(p.hz), db_to_linear(p.db)))
                .collect(),
        )?,
        (None, Some(db)) => GainCurve::flat(db_to_linear(db))?,
        (None, None) => {
            return Err(Error::validation(format!(
                "{name}: either gain_db or gain_table is required"
            )))
        }
    };
    Ok(ChannelChain {
        n_add: raw.n_add,
        n_add_sigma: raw.n_add_sigma,
        gain,
        lo_sign: raw.lo_sign.unwrap_or(default_sign),
    })
}

impl DetectionChain {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawChain = toml::from_str(text)
            .map_err(|e| Error::validation(format!("chain parse error: {e}")))?;
        let chain = DetectionChain {
            microwave: channel_from_raw(&raw.microwave, -1, "microwave")?,
            optical: channel_from_raw(&raw.optical, 1, "optical")?,
            omega_if: hz_to_rads(raw.omega_if_hz),
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn from_toml_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Published-chain values: N_e,add = 13.09 at 66.20 dB, N_o,add = 5.54
    /// at unit gain, Ω_IF/2π = 40 MHz. Flat gains.
    pub fn reference(unit_gain: bool) -> Self {
        let ge = if unit_gain {
            1.0
        } else {
            db_to_linear(66.20)
        };
        DetectionChain {
            microwave: ChannelChain {
                n_add: 13.09,
                n_add_sigma: 0.33 / 2.0,
                gain: GainCurve::flat(ge).unwrap(),
                lo_sign: -1,
            },
            optical: ChannelChain {
                n_add: 5.54,
                n_add_sigma: 0.21 / 2.0,
                gain: GainCurve::flat(1.0).unwrap(),
                lo_sign: 1,
            },
            omega_if: hz_to_rads(40e6),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::TWO_PI;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_floor_with_minimal_added_noise() {
        let mut chain = DetectionChain::reference(true);
        chain.microwave.n_add = 0.5;
        let floor = heterodyne_noise_spectrum(&chain, Channel::Microwave, |_| (0.5, 0.5), 0.0);
        assert_relative_eq!(floor, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn published_microwave_floor() {
        // N_e,add = 13.09 at 66.20 dB, vacuum input:
        // floor = 10^6.620 · (0.5 + 13.09).
        let chain = DetectionChain::reference(false);
        let floor = heterodyne_noise_spectrum(&chain, Channel::Microwave, |_| (0.5, 0.5), 0.0);
        assert_relative_eq!(floor, db_to_linear(66.20) * 13.59, max_relative = 1e-12);
        // flat spectrum: off-resonant floor equals on-resonant floor
        let off = heterodyne_noise_spectrum(&chain, Channel::Microwave, |_| (0.5, 0.5), TWO_PI * 8e6);
        assert_relative_eq!(floor, off, max_relative = 1e-12);
    }

    #[test]
    fn frequency_reversed_pair_lands_at_same_detected_bin() {
        // A microwave feature at device −ω₀ and an optical feature at +ω₀
        // (a two-mode-squeezing pair) appear at the same detected offset.
        let chain = DetectionChain::reference(true);
        let w0 = TWO_PI * 5e6;
        let bump = |w: f64, at: f64| 0.5 + 2.0 * (-((w - at) / (TWO_PI * 1e6)).powi(2)).exp();
        let mw_psd = |w: f64| (bump(w, -w0), bump(w, -w0));
        let opt_psd = |w: f64| (bump(w, w0), bump(w, w0));
        let grid: Vec<f64> = (-40..=40).map(|n| TWO_PI * 0.25e6 * n as f64).collect();
        let argmax = |ch: Channel, psd: &dyn Fn(f64) -> (f64, f64)| {
            grid.iter()
                .cloned()
                .max_by(|a, b| {
                    heterodyne_noise_spectrum(&chain, ch, psd, *a)
                        .total_cmp(&heterodyne_noise_spectrum(&chain, ch, psd, *b))
                })
                .unwrap()
        };
        let peak_mw = argmax(Channel::Microwave, &mw_psd);
        let peak_opt = argmax(Channel::Optical, &opt_psd);
        assert_relative_eq!(peak_mw, w0, max_relative = 1e-9);
        assert_relative_eq!(peak_opt, w0, max_relative = 1e-9);
    }

    #[test]
    fn detected_covariance_published_example() {
        // V = (0.93, 0.84, 0.46) with N_e = 13.09, N_o = 5.54, unit gains:
        // D11 = 14.02, D33 = 6.38, D13 = 0.46.
        let chain = DetectionChain::reference(true);
        let mut v = nalgebra::Matrix4::zeros();
        for (i, d) in [0.93, 0.93, 0.84, 0.84].iter().enumerate() {
            v[(i, i)] = *d;
        }
        v[(0, 2)] = 0.46;
        v[(2, 0)] = 0.46;
        v[(1, 3)] = -0.46;
        v[(3, 1)] = -0.46;
        let cm = CovarianceMatrix::from_matrix(v, 0.0);
        let d = detected_covariance(&cm, &chain, 0.0);
        assert_relative_eq!(d[(0, 0)], 14.02, epsilon = 1e-12);
        assert_relative_eq!(d[(2, 2)], 6.38, epsilon = 1e-12);
        assert_relative_eq!(d[(0, 2)], 0.46, epsilon = 1e-12);
    }

    #[test]
    fn identity_gain_adds_only_diagonal_noise() {
        let chain = DetectionChain::reference(true);
        let cm = CovarianceMatrix::vacuum(0.0);
        let d = detected_covariance(&cm, &chain, 0.0);
        for i in 0..4 {
            let want = 0.5 + if i < 2 { 13.09 } else { 5.54 };
            assert_relative_eq!(d[(i, i)], want, epsilon = 1e-12);
        }
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert_eq!(d[(r, c)], 0.0);
                }
            }
        }
    }

    #[test]
    fn off_diagonals_scale_by_geometric_gain_without_offset() {
        let mut chain = DetectionChain::reference(false);
        chain.optical.gain = GainCurve::flat(db_to_linear(20.0)).unwrap();
        let mut v = nalgebra::Matrix4::identity() * 0.7;
        v[(0, 2)] = 0.3;
        v[(2, 0)] = 0.3;
        let cm = CovarianceMatrix::from_matrix(v, 0.0);
        let d = detected_covariance(&cm, &chain, 0.0);
        let want = (db_to_linear(66.20) * db_to_linear(20.0)).sqrt() * 0.3;
        assert_relative_eq!(d[(0, 2)], want, max_relative = 1e-12);
    }

    #[test]
    fn calibration_roundtrip_is_exact() {
        let chain = DetectionChain::reference(false);
        let mut v = nalgebra::Matrix4::identity() * 0.9;
        v[(0, 2)] = 0.4;
        v[(2, 0)] = 0.4;
        v[(1, 3)] = -0.4;
        v[(3, 1)] = -0.4;
        let cm = CovarianceMatrix::from_matrix(v, TWO_PI * 2e6);
        let d = detected_covariance(&cm, &chain, TWO_PI * 2e6);
        let cal = calibrate_out(&d, &chain, TWO_PI * 2e6).unwrap();
        assert!(!cal.negative_variance);
        for r in 0..4 {
            for c in 0..4 {
                assert_relative_eq!(cal.v.v[r][c], cm.v[r][c], epsilon = 1e-12);
            }
        }
        // Published diagonal: V_meas = 14.02 → V11 = 0.93.
        let chain1 = DetectionChain::reference(true);
        let mut d = nalgebra::Matrix4::zeros();
        d[(0, 0)] = 14.02;
        let cal = calibrate_out(&d, &chain1, 0.0).unwrap();
        assert_relative_eq!(cal.v.v[0][0], 0.93, epsilon = 1e-12);
    }

    #[test]
    fn negative_variance_flagged_and_zero_gain_rejected() {
        let chain = DetectionChain::reference(true);
        let d = nalgebra::Matrix4::identity() * 0.3; // below N_add
        let cal = calibrate_out(&d, &chain, 0.0).unwrap();
        assert!(cal.negative_variance);
        assert!(cal.v.v[0][0] < 0.0); // passed through

        let bad = GainCurve::flat(0.0);
        assert!(bad.is_err());
    }

    #[test]
    fn chain_file_roundtrip_and_validation() {
        let text = r#"
omega_if_hz = 40e6

[microwave]
n_add = 13.09
n_add_sigma = 0.165
gain_table = [{ hz = 30e6, db = 66.0 }, { hz = 50e6, db = 66.4 }]

[optical]
n_add = 5.54
gain_db = 0.0
"#;
        let chain = DetectionChain::from_toml_str(text).unwrap();
        assert_relative_eq!(chain.omega_if, TWO_PI * 40e6, max_relative = 1e-12);
        // Interpolated linearly in power between the two table points.
        let mid = chain.microwave.gain.at(TWO_PI * 40e6);
        let want = 0.5 * (db_to_linear(66.0) + db_to_linear(66.4));
        assert_relative_eq!(mid, want, max_relative = 1e-12);
        // Clamped outside the table.
        assert_relative_eq!(
            chain.microwave.gain.at(TWO_PI * 10e6),
            db_to_linear(66.0),
            max_relative = 1e-12
        );

        let bad = text.replace("n_add = 5.54", "n_add = 0.2");
        assert!(DetectionChain::from_toml_str(&bad).is_err());
    }
}
