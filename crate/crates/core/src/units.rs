//! Unit conversions and physical constants.
//!
//! Internally everything runs in angular frequency (rad/s); configuration
//! files quote frequencies in Hz (the κ/2π convention) and gains in dB.

use std::f64::consts::PI;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

pub const TWO_PI: f64 = 2.0 * PI;

/// Hz (as quoted in configs, i.e. ω/2π) to angular frequency (rad/s).
#[inline]
pub fn hz_to_rads(hz: f64) -> f64 {
    TWO_PI * hz
}

/// Angular frequency (rad/s) to Hz.
#[inline]
pub fn rads_to_hz(rads: f64) -> f64 {
    rads / TWO_PI
}

/// Power dB to linear power ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to dB.
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips() {
        assert!((hz_to_rads(11e6) - 6.911503837897545e7).abs() < 1.0);
        assert!((rads_to_hz(hz_to_rads(3.2e9)) - 3.2e9).abs() < 1e-3);
        assert!((db_to_linear(3.0) - 1.9952623149688795).abs() < 1e-12);
        assert!((linear_to_db(db_to_linear(66.2)) - 66.2).abs() < 1e-12);
    }
}
