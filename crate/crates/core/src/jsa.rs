//! Joint spectral amplitude and intensity containers.
//!
//! A `JointSpectralAmplitude` holds the complex two-photon amplitude
//! C(ν1,ν2) on a [`FrequencyGrid`]; its squared modulus is the
//! `JointSpectralIntensity`. Normalization carries the explicit grid
//! measure so Schmidt coefficients and rates do not depend on resolution:
//! L2 for amplitudes (Σ|C|²·dν1·dν2 = 1), L1 for intensities.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

#[derive(Debug, Clone)]
pub struct JointSpectralAmplitude {
    pub grid: FrequencyGrid,
    pub amp: Array2<Complex64>,
}

#[derive(Debug, Clone)]
pub struct JointSpectralIntensity {
    pub grid: FrequencyGrid,
    pub inten: Array2<f64>,
}

fn check_shape(grid: &FrequencyGrid, shape: &[usize]) -> Result<()> {
    if shape != [grid.n1(), grid.n2()] {
        return Err(Error::invalid(format!(
            "matrix shape {:?} does not match grid {}x{}",
            shape,
            grid.n1(),
            grid.n2()
        )));
    }
    Ok(())
}

impl JointSpectralAmplitude {
    pub fn new(grid: FrequencyGrid, amp: Array2<Complex64>) -> Result<Self> {
        check_shape(&grid, amp.shape())?;
        if amp.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("JSA has non-finite entries".into()));
        }
        Ok(Self { grid, amp })
    }

    /// Σ|C|²·dν1·dν2.
    pub fn l2_measure(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_measure()
    }

    /// Rescale so the L2 measure is exactly 1.
    pub fn normalize(mut self) -> Result<Self> {
        let total = self.l2_measure();
        if !(total > 0.0) {
            return Err(Error::DegenerateInput(
                "cannot normalize all-zero JSA".into(),
            ));
        }
        let scale = 1.0 / total.sqrt();
        self.amp.mapv_inplace(|z| z * scale);
        Ok(self)
    }

    /// True when every entry is real and non-negative (the assumption behind
    /// the magnitude-only interference bound).
    pub fn is_real_nonnegative(&self) -> bool {
        self.amp.iter().all(|z| z.im == 0.0 && z.re >= 0.0)
    }
}

impl JointSpectralIntensity {
    pub fn new(grid: FrequencyGrid, inten: Array2<f64>) -> Result<Self> {
        check_shape(&grid, inten.shape())?;
        if inten.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numeric("JSI entries must be finite and >= 0".into()));
        }
        Ok(Self { grid, inten })
    }

    /// Σ I·dν1·dν2.
    pub fn l1_measure(&self) -> f64 {
        self.inten.sum() * self.grid.cell_measure()
    }

    /// Rescale so the L1 measure is exactly 1.
    pub fn normalize(mut self) -> Result<Self> {
        let total = self.l1_measure();
        if !(total > 0.0) {
            return Err(Error::DegenerateInput(
                "cannot normalize all-zero JSI".into(),
            ));
        }
        let scale = 1.0 / total;
        self.inten.mapv_inplace(|v| v * scale);
        Ok(self)
    }
}

/// I(ν1,ν2) = |C(ν1,ν2)|². A normalized JSA yields a normalized JSI.
pub fn intensity_of(jsa: &JointSpectralAmplitude) -> JointSpectralIntensity {
    JointSpectralIntensity {
        grid: jsa.grid.clone(),
        inten: jsa.amp.mapv(|z| z.norm_sqr()),
    }
}

/// The real non-negative amplitude √I with zero phase — the "joint spectrum
/// is real" assumption used to bound the dip visibility from a measured JSI.
pub fn magnitude_jsa_from_jsi(jsi: &JointSpectralIntensity) -> JointSpectralAmplitude {
    JointSpectralAmplitude {
        grid: jsi.grid.clone(),
        amp: jsi.inten.mapv(|v| Complex64::new(v.sqrt(), 0.0)),
    }
}

/// Marginal spectrum along one axis: sum over the other axis times its
/// spacing. Returns (axis frequencies, spectral density).
pub fn marginal(jsi: &JointSpectralIntensity, axis: u8) -> Result<(Vec<f64>, Vec<f64>)> {
    match axis {
        1 => {
            let vals: Vec<f64> = jsi
                .inten
                .rows()
                .into_iter()
                .map(|r| r.sum() * jsi.grid.d_nu2())
                .collect();
            Ok((jsi.grid.nu1().to_vec(), vals))
        }
        2 => {
            let vals: Vec<f64> = jsi
                .inten
                .columns()
                .into_iter()
                .map(|c| c.sum() * jsi.grid.d_nu1())
                .collect();
            Ok((jsi.grid.nu2().to_vec(), vals))
        }
        _ => Err(Error::invalid(format!(
            "marginal axis must be 1 or 2, got {axis}"
        ))),
    }
}
