//! First-principles JSA of the pulsed type-II pp-KTP source.
//!
//! The two-photon amplitude is the product of the pump's spectral field
//! envelope (a function of ν1+ν2) with the quasi-phase-matching response
//! sinc(Δk·L/2). Axis convention: the vertically polarized signal (crystal
//! z axis) is axis 1, the horizontally polarized idler (crystal y axis) is
//! axis 2; the pump propagates on the y axis.
//!
//! Two deliberately asymmetric ingredients model the experiment's
//! imperfections: a collection bias that detunes signal up / idler down by
//! a fixed amount, and the tilted-collection mode overlap
//! a(λ,θ) = exp(−½(π·w0·θ/λ)²) applied along one detection axis.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fwhm::fwhm;
use crate::grid::FrequencyGrid;
use crate::jsa::{intensity_of, marginal, JointSpectralAmplitude};
use crate::sellmeier::SellmeierSet;
use crate::units::{bandwidth_nm_to_thz, bandwidth_thz_to_nm, frequency_to_wavelength, C_UM_THZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpShape {
    Gaussian,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    pub center_lambda_nm: f64,
    /// Measured spectral FWHM of the pump pulse (an intensity width).
    pub fwhm_lambda_nm: f64,
    #[serde(default = "default_shape")]
    pub shape: PumpShape,
}

fn default_shape() -> PumpShape {
    PumpShape::Gaussian
}

impl PumpSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.center_lambda_nm > 0.0) {
            return Err(Error::invalid("pump center wavelength must be positive"));
        }
        if !(self.fwhm_lambda_nm > 0.0 && self.fwhm_lambda_nm < self.center_lambda_nm) {
            return Err(Error::invalid(
                "pump bandwidth must be positive and below the center wavelength",
            ));
        }
        Ok(())
    }

    /// Pump center frequency ν_p = c/λ_p in THz.
    pub fn center_nu_thz(&self) -> f64 {
        crate::units::C_NM_THZ / self.center_lambda_nm
    }

    /// Spectral FWHM converted to THz: Δν_p = c·Δλ_p/λ_p².
    pub fn fwhm_nu_thz(&self) -> f64 {
        bandwidth_nm_to_thz(self.fwhm_lambda_nm, self.center_lambda_nm)
            .expect("validated pump spec")
    }
}

#[derive(Debug, Clone)]
pub struct CrystalSpec {
    pub length_mm: f64,
    pub poling_period_um: f64,
    pub sellmeier_pump: SellmeierSet,
    pub sellmeier_signal: SellmeierSet,
    pub sellmeier_idler: SellmeierSet,
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm > 0.0) {
            return Err(Error::invalid("crystal length must be positive"));
        }
        if !(self.poling_period_um > 0.0) {
            return Err(Error::invalid("poling period must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiltedPort {
    Port1,
    Port2,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionSpec {
    /// Off-axis collection tilt in degrees.
    pub theta_deg: f64,
    /// Collected Gaussian mode waist in μm.
    pub waist_w0_um: f64,
    #[serde(default = "default_tilted_port")]
    pub tilted_port: TiltedPort,
    /// Optional JSA center offset: signal shifted up, idler down by this.
    #[serde(default)]
    pub bias_detuning_thz: f64,
}

fn default_tilted_port() -> TiltedPort {
    TiltedPort::Port2
}

impl CollectionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_deg >= 0.0) {
            return Err(Error::invalid("collection tilt must be >= 0"));
        }
        if !(self.waist_w0_um > 0.0) {
            return Err(Error::invalid("collection waist must be positive"));
        }
        Ok(())
    }
}

/// Pump spectral envelope at a given sum frequency: a real positive Gaussian
/// with maximum 1 at ν_p and FWHM Δν_p (half amplitude at ν_p ± Δν_p/2).
pub fn pump_envelope(pump: &PumpSpec, nu_sum_thz: f64) -> Result<f64> {
    pump.validate()?;
    let PumpShape::Gaussian = pump.shape;
    Ok(gaussian_envelope(
        nu_sum_thz,
        pump.center_nu_thz(),
        pump.fwhm_nu_thz(),
    ))
}

fn gaussian_envelope(nu: f64, center: f64, fwhm: f64) -> f64 {
    let x = (nu - center) / fwhm;
    (-4.0 * std::f64::consts::LN_2 * x * x).exp()
}

/// Collinear quasi-phase-matching mismatch in rad/μm:
/// Δk = k_p(ν1+ν2) − k_s(ν1) − k_i(ν2) + 2π/Λ with k = 2π·n(λ)·ν/c.
/// The grating vector enters with the sign that compensates the pair's
/// excess momentum (k_s + k_i > k_p in normally dispersive KTP).
pub fn phase_mismatch(crystal: &CrystalSpec, nu1_thz: f64, nu2_thz: f64) -> Result<f64> {
    let k = |set: &SellmeierSet, nu: f64| -> Result<f64> {
        let lambda_nm = frequency_to_wavelength(nu)?;
        let n = set.refractive_index(lambda_nm)?;
        Ok(2.0 * std::f64::consts::PI * n * nu / C_UM_THZ)
    };
    let kp = k(&crystal.sellmeier_pump, nu1_thz + nu2_thz)?;
    let ks = k(&crystal.sellmeier_signal, nu1_thz)?;
    let ki = k(&crystal.sellmeier_idler, nu2_thz)?;
    let grating = 2.0 * std::f64::consts::PI / crystal.poling_period_um;
    Ok(kp - ks - ki + grating)
}

/// Phase-matching amplitude Φ = sinc(Δk·L/2) ∈ [−1, 1], 1 at Δk = 0.
pub fn phasematch_amplitude(crystal: &CrystalSpec, nu1_thz: f64, nu2_thz: f64) -> Result<f64> {
    let dk = phase_mismatch(crystal, nu1_thz, nu2_thz)?;
    let x = dk * crystal.length_mm * 1e3 / 2.0;
    Ok(sinc(x))
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Mode-overlap amplitude of a collection tilted by θ against the optical
/// axis: a(λ,θ) = exp(−½(π·w0·θ/λ)²). Equal to 1 when aligned, strictly
/// decreasing in θ, increasing in λ.
pub fn collection_amplitude(coll: &CollectionSpec, lambda_nm: f64) -> f64 {
    let theta_rad = coll.theta_deg.to_radians();
    let lambda_um = lambda_nm * 1e-3;
    let arg = std::f64::consts::PI * coll.waist_w0_um * theta_rad / lambda_um;
    (-0.5 * arg * arg).exp()
}

/// Build the normalized JSA on `grid`: pump envelope × phase matching, with
/// the optional collection bias and tilted-port overlap applied.
///
/// The pump factor is the spectral *field* envelope: the stored pump width
/// is a measured spectral (intensity) FWHM, so the amplitude Gaussian is
/// √2 wider than the stored value.
pub fn build_jsa(
    pump: &PumpSpec,
    crystal: &CrystalSpec,
    grid: &FrequencyGrid,
    coll: Option<&CollectionSpec>,
) -> Result<JointSpectralAmplitude> {
    pump.validate()?;
    crystal.validate()?;
    if let Some(c) = coll {
        c.validate()?;
    }
    let bias = coll.map_or(0.0, |c| c.bias_detuning_thz);
    let nu_p = pump.center_nu_thz();
    let amp_fwhm = pump.fwhm_nu_thz() * std::f64::consts::SQRT_2;

    let n1 = grid.n1();
    let n2 = grid.n2();
    let mut amp = Array2::from_elem((n1, n2), Complex64::ZERO);
    for (i, &nu1) in grid.nu1().iter().enumerate() {
        for (j, &nu2) in grid.nu2().iter().enumerate() {
            // the bias shifts the signal feature up and the idler feature
            // down; the sum ν1+ν2 (pump energy conservation) is unchanged
            let (s, id) = (nu1 - bias, nu2 + bias);
            let envelope = gaussian_envelope(s + id, nu_p, amp_fwhm);
            let pm = phasematch_amplitude(crystal, s, id)?;
            amp[[i, j]] = Complex64::new(envelope * pm, 0.0);
        }
    }

    if let Some(c) = coll {
        if c.theta_deg > 0.0 {
            match c.tilted_port {
                TiltedPort::Port2 => {
                    for (j, &nu2) in grid.nu2().iter().enumerate() {
                        let a = collection_amplitude(c, frequency_to_wavelength(nu2)?);
                        for i in 0..n1 {
                            amp[[i, j]] *= a;
                        }
                    }
                }
                TiltedPort::Port1 => {
                    for (i, &nu1) in grid.nu1().iter().enumerate() {
                        let a = collection_amplitude(c, frequency_to_wavelength(nu1)?);
                        for j in 0..n2 {
                            amp[[i, j]] *= a;
                        }
                    }
                }
            }
        }
    }

    JointSpectralAmplitude::new(grid.clone(), amp)?.normalize()
}

/// Signal-axis marginal FWHM of the built source, in nm at the grid center.
pub fn marginal_fwhm_nm(
    pump: &PumpSpec,
    crystal: &CrystalSpec,
    grid: &FrequencyGrid,
    coll: Option<&CollectionSpec>,
) -> Result<f64> {
    let jsa = build_jsa(pump, crystal, grid, coll)?;
    let jsi = intensity_of(&jsa);
    let (nu, m) = marginal(&jsi, 1)?;
    let width_thz = fwhm(&nu, &m)?;
    let center_lambda = frequency_to_wavelength(grid.center_nu1())?;
    bandwidth_thz_to_nm(width_thz, center_lambda)
}

/// Choose the crystal length so the signal marginal FWHM matches
/// `target_fwhm_nm`. The marginal narrows monotonically with length, so a
/// bracketed bisection suffices. Returns the calibrated length in mm.
pub fn calibrate_crystal_length(
    pump: &PumpSpec,
    crystal_template: &CrystalSpec,
    grid: &FrequencyGrid,
    target_fwhm_nm: f64,
) -> Result<f64> {
    if !(target_fwhm_nm > 0.0) {
        return Err(Error::invalid("target marginal FWHM must be positive"));
    }
    let width_at = |length_mm: f64| -> Result<f64> {
        let crystal = CrystalSpec {
            length_mm,
            ..crystal_template.clone()
        };
        marginal_fwhm_nm(pump, &crystal, grid, None)
    };
    let (mut lo, mut hi) = (0.05_f64, 50.0_f64);
    let (w_lo, w_hi) = (width_at(lo)?, width_at(hi)?);
    if !(w_lo >= target_fwhm_nm && w_hi <= target_fwhm_nm) {
        return Err(Error::Numeric(format!(
            "target {target_fwhm_nm} nm not bracketed: width({lo} mm) = {w_lo:.2}, width({hi} mm) = {w_hi:.2}"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if width_at(mid)? >= target_fwhm_nm {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn pump() -> PumpSpec {
        PumpSpec {
            center_lambda_nm: 785.0,
            fwhm_lambda_nm: 5.3,
            shape: PumpShape::Gaussian,
        }
    }

    #[test]
    fn pump_envelope_peak_and_half_points() {
        let p = pump();
        let nu_p = p.center_nu_thz();
        let dv = p.fwhm_nu_thz();
        assert!((pump_envelope(&p, nu_p).unwrap() - 1.0).abs() < 1e-15);
        assert!((pump_envelope(&p, nu_p + dv / 2.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((pump_envelope(&p, nu_p - dv / 2.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pump_bandwidth_matches_conversion() {
        // Δν_p = c·5.3/785² = 2.58 THz
        assert!((pump().fwhm_nu_thz() - 2.5785).abs() < 1e-3);
    }

    #[test]
    fn pump_envelope_even_about_center() {
        let p = pump();
        let nu_p = p.center_nu_thz();
        for x in [0.1, 0.7, 2.3, 5.9] {
            let up = pump_envelope(&p, nu_p + x).unwrap();
            let dn = pump_envelope(&p, nu_p - x).unwrap();
            assert!((up - dn).abs() < 1e-12);
        }
    }

    #[test]
    fn collection_amplitude_limits_and_monotonicity() {
        let mut c = CollectionSpec {
            theta_deg: 0.0,
            waist_w0_um: 300.0,
            tilted_port: TiltedPort::Port2,
            bias_detuning_thz: 0.0,
        };
        for lambda in [1500.0, 1570.0, 1650.0] {
            assert_eq!(collection_amplitude(&c, lambda), 1.0);
        }
        c.theta_deg = 0.5;
        let a_short = collection_amplitude(&c, 1500.0);
        let a_long = collection_amplitude(&c, 1650.0);
        assert!(a_short < a_long, "coupling must grow with wavelength");
        assert!(a_short > 0.0 && a_long <= 1.0);
        let mut steeper = c.clone();
        steeper.theta_deg = 1.0;
        assert!(collection_amplitude(&steeper, 1570.0) < collection_amplitude(&c, 1570.0));
    }

    #[test]
    fn sinc_zero_and_first_null() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(std::f64::consts::PI).abs() < 1e-15);
        for x in [-8.0, -1.3, 0.4, 2.9, 12.0] {
            assert!(sinc(x).abs() <= 1.0);
        }
    }

    fn reference_crystal() -> CrystalSpec {
        let file = crate::sellmeier::SellmeierFile::load(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/ktp_sellmeier.toml"
        ))
        .expect("golden sellmeier data");
        let y = file.axis("y").unwrap().clone();
        let z = file.axis("z").unwrap().clone();
        CrystalSpec {
            length_mm: 1.7333,
            poling_period_um: 46.15,
            sellmeier_pump: y.clone(),
            sellmeier_signal: z,
            sellmeier_idler: y,
        }
    }

    #[test]
    fn ktp_index_at_degenerate_wavelength() {
        let c = reference_crystal();
        let ns = c.sellmeier_signal.refractive_index(1570.0).unwrap();
        let ni = c.sellmeier_idler.refractive_index(1570.0).unwrap();
        assert!((1.7..1.9).contains(&ns), "n_z(1570) = {ns}");
        assert!((1.7..1.9).contains(&ni), "n_y(1570) = {ni}");
        // values recorded in the golden file header
        assert!((ns - 1.816812).abs() < 1e-6);
        assert!((ni - 1.733493).abs() < 1e-6);
    }

    #[test]
    fn degenerate_design_point_is_phase_matched() {
        let c = reference_crystal();
        let nu_d = crate::units::wavelength_to_frequency(1570.0).unwrap();
        let dk = phase_mismatch(&c, nu_d, nu_d).unwrap();
        assert!(dk.abs() < 1e-4, "dk = {dk} rad/um");
        // confirm by root-find along the degenerate line: locate the zero of
        // dk(nu, nu) and check it sits at the design wavelength
        let f = |nu: f64| phase_mismatch(&c, nu, nu).unwrap();
        // narrow bracket: the group-velocity-matched design makes dk(nu,nu)
        // shallow, with a second crossing a few THz above degeneracy
        let (mut lo, mut hi) = (nu_d - 1.0, nu_d + 1.0);
        assert!(f(lo) * f(hi) < 0.0, "zero not bracketed");
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let nu_zero = 0.5 * (lo + hi);
        assert!(
            (nu_zero - nu_d).abs() < 1e-3,
            "zero at {nu_zero}, design {nu_d}"
        );
    }

    #[test]
    fn phase_mismatch_derivative_matches_secant() {
        let c = reference_crystal();
        let nu_d = crate::units::wavelength_to_frequency(1570.0).unwrap();
        let h = 0.05;
        for &(n1, n2) in &[
            (nu_d, nu_d),
            (nu_d + 2.0, nu_d - 1.0),
            (nu_d - 3.0, nu_d + 4.0),
        ] {
            // central finite difference vs wide secant: smooth to ~1%
            let fd = (phase_mismatch(&c, n1 + h, n2).unwrap()
                - phase_mismatch(&c, n1 - h, n2).unwrap())
                / (2.0 * h);
            let sec = (phase_mismatch(&c, n1 + 10.0 * h, n2).unwrap()
                - phase_mismatch(&c, n1 - 10.0 * h, n2).unwrap())
                / (20.0 * h);
            assert!(
                (fd - sec).abs() <= 0.01 * fd.abs().max(sec.abs()),
                "fd={fd} sec={sec}"
            );
        }
    }

    #[test]
    fn type_ii_swap_asymmetry() {
        let c = reference_crystal();
        let nu_d = crate::units::wavelength_to_frequency(1570.0).unwrap();
        let a = phase_mismatch(&c, nu_d + 2.0, nu_d - 2.0).unwrap();
        let b = phase_mismatch(&c, nu_d - 2.0, nu_d + 2.0).unwrap();
        assert!((a - b).abs() > 1e-6, "signal/idler axes must differ");
    }

    #[test]
    fn phasematch_amplitude_bounded() {
        let c = reference_crystal();
        let nu_d = crate::units::wavelength_to_frequency(1570.0).unwrap();
        assert!((phasematch_amplitude(&c, nu_d, nu_d).unwrap() - 1.0).abs() < 1e-6);
        for dx in [-8.0, -3.0, 0.7, 4.4, 9.0] {
            let v = phasematch_amplitude(&c, nu_d + dx, nu_d - 0.3 * dx).unwrap();
            assert!(v.abs() <= 1.0);
        }
    }

    #[test]
    fn build_jsa_normalized_and_collection_identity() {
        let p = pump();
        let c = reference_crystal();
        let nu_d = crate::units::wavelength_to_frequency(1570.0).unwrap();
        let grid = make_grid(nu_d, 20.0, 96).unwrap();
        let plain = build_jsa(&p, &c, &grid, None).unwrap();
        assert!((plain.l2_measure() - 1.0).abs() < 1e-12);
        let idle_coll = CollectionSpec {
            theta_deg: 0.0,
            waist_w0_um: 300.0,
            tilted_port: TiltedPort::Port2,
            bias_detuning_thz: 0.0,
        };
        let with_coll = build_jsa(&p, &c, &grid, Some(&idle_coll)).unwrap();
        for (a, b) in plain.amp.iter().zip(with_coll.amp.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn golden_length_reproduces_source_bandwidth() {
        let p = pump();
        let c = reference_crystal();
        let nu_d = crate::units::wavelength_to_frequency(1570.0).unwrap();
        let grid = make_grid(nu_d, 20.0, 256).unwrap();
        let w = marginal_fwhm_nm(&p, &c, &grid, None).unwrap();
        assert!((w - 17.3).abs() / 17.3 < 0.02, "marginal = {w} nm");
    }

    #[test]
    fn calibration_rejects_unreachable_target() {
        let sell = SellmeierSet {
            axis: "y".into(),
            a: 2.19229,
            b: vec![0.83547],
            c: vec![0.04970],
            d: 0.01621,
            valid_range_um: (0.4, 3.5),
            source: String::new(),
        };
        let crystal = CrystalSpec {
            length_mm: 1.0,
            poling_period_um: 46.15,
            sellmeier_pump: sell.clone(),
            sellmeier_signal: sell.clone(),
            sellmeier_idler: sell,
        };
        let grid = make_grid(190.95, 20.0, 64).unwrap();
        // a 1 m crystal's marginal cannot be 500 nm wide
        assert!(calibrate_crystal_length(&pump(), &crystal, &grid, 500.0).is_err());
    }
}
