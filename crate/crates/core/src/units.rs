//! Unit conventions and conversions.
//!
//! Internal units everywhere: ordinary frequency ν in THz, time in ps,
//! wavelength in nm (μm inside the crystal optics). With THz·ps = 1 every
//! interference phase is written `2π·Δν·δt` and a delay δt produces fringes
//! of period 1/δt THz along the frequency-difference axis.

use crate::error::{Error, Result};

/// Speed of light in nm·THz (equivalently μm·(rad/ps)/2π-free form: nm/ps).
pub const C_NM_THZ: f64 = 299_792.458;

/// Speed of light in μm·THz, for crystal-side wave numbers in rad/μm.
pub const C_UM_THZ: f64 = 299.792_458;

/// FWHM of a unit-σ Gaussian: 2√(2 ln 2).
pub const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// ν = c/λ.
pub fn wavelength_to_frequency(lambda_nm: f64) -> Result<f64> {
    if !(lambda_nm > 0.0) {
        return Err(Error::invalid(format!(
            "wavelength must be positive, got {lambda_nm} nm"
        )));
    }
    Ok(C_NM_THZ / lambda_nm)
}

/// λ = c/ν. Exact round-trip partner of [`wavelength_to_frequency`].
pub fn frequency_to_wavelength(nu_thz: f64) -> Result<f64> {
    if !(nu_thz > 0.0) {
        return Err(Error::invalid(format!(
            "frequency must be positive, got {nu_thz} THz"
        )));
    }
    Ok(C_NM_THZ / nu_thz)
}

/// Small-bandwidth linearization Δν = c·Δλ/λ².
pub fn bandwidth_nm_to_thz(delta_lambda_nm: f64, center_lambda_nm: f64) -> Result<f64> {
    if !(center_lambda_nm > 0.0) {
        return Err(Error::invalid("center wavelength must be positive"));
    }
    if !(delta_lambda_nm >= 0.0) {
        return Err(Error::invalid("bandwidth must be non-negative"));
    }
    Ok(C_NM_THZ * delta_lambda_nm / (center_lambda_nm * center_lambda_nm))
}

/// Inverse of [`bandwidth_nm_to_thz`] at the same center wavelength.
pub fn bandwidth_thz_to_nm(delta_nu_thz: f64, center_lambda_nm: f64) -> Result<f64> {
    if !(center_lambda_nm > 0.0) {
        return Err(Error::invalid("center wavelength must be positive"));
    }
    if !(delta_nu_thz >= 0.0) {
        return Err(Error::invalid("bandwidth must be non-negative"));
    }
    Ok(delta_nu_thz * center_lambda_nm * center_lambda_nm / C_NM_THZ)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn telecom_degenerate_wavelength() {
        // 1570 nm is the degenerate pair wavelength; 785 nm the pump.
        assert!((wavelength_to_frequency(1570.0).unwrap() - 190.95).abs() < 5e-3);
        assert!((wavelength_to_frequency(785.0).unwrap() - 381.90).abs() < 5e-3);
    }

    #[test]
    fn roundtrip_is_exact() {
        for lambda in [532.0, 785.0, 1550.0, 1570.0, 1640.33] {
            let nu = wavelength_to_frequency(lambda).unwrap();
            let back = frequency_to_wavelength(nu).unwrap();
            assert!((back - lambda).abs() / lambda < 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(wavelength_to_frequency(0.0).is_err());
        assert!(wavelength_to_frequency(-1.0).is_err());
        assert!(frequency_to_wavelength(f64::NAN).is_err());
    }

    #[test]
    fn spectrometer_resolution_in_thz() {
        // 3.6 nm at 1570 nm: the coincidence-basis resolution on the THz axis
        let dv = bandwidth_nm_to_thz(3.6, 1570.0).unwrap();
        assert!((dv - 0.438).abs() < 5e-4);
        // source bandwidth
        let dv = bandwidth_nm_to_thz(17.3, 1570.0).unwrap();
        assert!((dv - 2.10).abs() < 5e-3);
        // zero case
        assert_eq!(bandwidth_nm_to_thz(0.0, 1570.0).unwrap(), 0.0);
    }

    #[test]
    fn bandwidth_conversion_first_order_symmetric() {
        let (dl, l) = (17.3, 1570.0);
        let dv = bandwidth_nm_to_thz(dl, l).unwrap();
        let back = bandwidth_thz_to_nm(dv, l).unwrap();
        // exact inverse at fixed center wavelength
        assert!((back - dl).abs() / dl < 1e-12);
    }
}
