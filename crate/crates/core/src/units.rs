//! Physical constants and unit conversions.
//!
//! Internal units: time in ps, angular frequency in rad/ps, length along the
//! fiber in m, wavelength in nm, power in W, energy in pJ.

use std::f64::consts::PI;

/// Speed of light in nm/ps.
pub const C_NM_PER_PS: f64 = 299_792.458;

/// Reduced Planck constant in pJ·ps.
pub const HBAR_PJ_PS: f64 = 1.054_571_817e-10;

/// Boltzmann constant in pJ/K.
pub const KB_PJ_PER_K: f64 = 1.380_649e-11;

/// Absolute angular frequency (rad/ps) of light at wavelength `lambda_nm`.
pub fn angular_frequency(lambda_nm: f64) -> f64 {
    2.0 * PI * C_NM_PER_PS / lambda_nm
}

/// Wavelength (nm) of light at absolute angular frequency `omega` (rad/ps).
pub fn wavelength_from_angular(omega: f64) -> f64 {
    2.0 * PI * C_NM_PER_PS / omega
}

/// Angular-frequency detuning of `lambda_nm` from `carrier_nm`, in rad/ps.
///
/// Positive detuning means bluer than the carrier.
pub fn wavelength_to_detuning(lambda_nm: f64, carrier_nm: f64) -> f64 {
    2.0 * PI * C_NM_PER_PS * (1.0 / lambda_nm - 1.0 / carrier_nm)
}

pub fn detuning_to_wavelength(detuning: f64, carrier_nm: f64) -> f64 {
    wavelength_from_angular(angular_frequency(carrier_nm) + detuning)
}

/// Bose occupation of a mode at angular frequency `omega` (rad/ps) and temperature `kelvin`.
pub fn bose_occupation(omega: f64, kelvin: f64) -> f64 {
    if kelvin <= 0.0 || omega == 0.0 {
        return 0.0;
    }
    let x = HBAR_PJ_PS * omega.abs() / (KB_PJ_PER_K * kelvin);
    1.0 / x.exp_m1()
}

/// Converts rad/ps to THz.
pub fn rad_per_ps_to_thz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Converts a linear ratio to decibels.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carrier_has_zero_detuning() {
        assert_eq!(wavelength_to_detuning(810.0, 810.0), 0.0);
    }

    #[test]
    fn detuning_of_raman_peak_and_filter_edge() {
        // 2πc(1/915 − 1/810) and 2πc(1/850 − 1/810)
        let raman = wavelength_to_detuning(915.0, 810.0);
        let edge = wavelength_to_detuning(850.0, 810.0);
        assert!((raman - -266.9).abs() < 0.1, "{raman}");
        assert!((edge - -109.5).abs() < 0.1, "{edge}");
    }

    #[test]
    fn detuning_round_trip() {
        for lambda in [650.0, 750.0, 915.0, 1000.0] {
            let back = detuning_to_wavelength(wavelength_to_detuning(lambda, 810.0), 810.0);
            assert!((back - lambda).abs() < 1e-9);
        }
    }

    #[test]
    fn bose_factor_at_raman_peak() {
        // 1/(exp(hν/kT) − 1) with ν = 13.2 THz, T = 300 K
        let h: f64 = 6.626_070_15e-34;
        let k = 1.380_649e-23;
        let oracle = 1.0 / ((h * 13.2e12 / (k * 300.0)).exp() - 1.0);
        let n = bose_occupation(2.0 * PI * 13.2, 300.0);
        assert!((n - oracle).abs() < 1e-9);
        assert!((n - 0.14).abs() < 0.01, "{n}");
        assert_eq!(bose_occupation(2.0 * PI * 13.2, 0.0), 0.0);
    }
}
