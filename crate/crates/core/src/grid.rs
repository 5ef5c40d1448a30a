//! Uniform frequency grids for joint spectra.

use crate::error::{Error, Result};

/// Relative non-uniformity allowed before a grid is rejected.
const UNIFORMITY_TOL: f64 = 1e-9;

/// A pair of ascending, uniformly spaced frequency axes (THz). Axis 1 is the
/// signal frequency, axis 2 the idler.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    nu1: Vec<f64>,
    nu2: Vec<f64>,
    d_nu1: f64,
    d_nu2: f64,
}

impl FrequencyGrid {
    /// Build a grid from explicit axes, validating ascent and uniformity.
    pub fn new(nu1: Vec<f64>, nu2: Vec<f64>) -> Result<Self> {
        let d_nu1 = Self::check_axis(&nu1, "nu1")?;
        let d_nu2 = Self::check_axis(&nu2, "nu2")?;
        Ok(Self {
            nu1,
            nu2,
            d_nu1,
            d_nu2,
        })
    }

    fn check_axis(axis: &[f64], name: &str) -> Result<f64> {
        if axis.len() < 2 {
            return Err(Error::invalid(format!("{name}: need at least 2 samples")));
        }
        if axis.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{name}: non-finite sample")));
        }
        let step = axis[1] - axis[0];
        if !(step > 0.0) {
            return Err(Error::invalid(format!("{name}: axis must ascend")));
        }
        let scale = step.abs().max(axis[0].abs() * 1e-3);
        for w in axis.windows(2) {
            let s = w[1] - w[0];
            if (s - step).abs() > UNIFORMITY_TOL * scale.max(step) {
                return Err(Error::invalid(format!("{name}: spacing not uniform")));
            }
        }
        Ok(step)
    }

    pub fn nu1(&self) -> &[f64] {
        &self.nu1
    }

    pub fn nu2(&self) -> &[f64] {
        &self.nu2
    }

    pub fn n1(&self) -> usize {
        self.nu1.len()
    }

    pub fn n2(&self) -> usize {
        self.nu2.len()
    }

    pub fn d_nu1(&self) -> f64 {
        self.d_nu1
    }

    pub fn d_nu2(&self) -> f64 {
        self.d_nu2
    }

    /// Cell measure dν1·dν2 used by every integral over the grid.
    pub fn cell_measure(&self) -> f64 {
        self.d_nu1 * self.d_nu2
    }

    /// True when both axes are identical, which the exchange operation
    /// C(ν1,ν2) → C(ν2,ν1) requires.
    pub fn is_square(&self) -> bool {
        self.n1() == self.n2()
            && self
                .nu1
                .iter()
                .zip(&self.nu2)
                .all(|(a, b)| (a - b).abs() <= UNIFORMITY_TOL * self.d_nu1)
    }

    /// Midpoint of axis 1 (== axis 2 center for square grids).
    pub fn center_nu1(&self) -> f64 {
        0.5 * (self.nu1[0] + self.nu1[self.n1() - 1])
    }

    pub fn center_nu2(&self) -> f64 {
        0.5 * (self.nu2[0] + self.nu2[self.n2() - 1])
    }

    pub fn span_nu1(&self) -> f64 {
        self.nu1[self.n1() - 1] - self.nu1[0]
    }

    pub fn span_nu2(&self) -> f64 {
        self.nu2[self.n2() - 1] - self.nu2[0]
    }
}

/// Square grid centered at `center_nu` on both axes, endpoints inclusive,
/// total width `span_nu`.
pub fn make_grid(center_nu: f64, span_nu: f64, n: usize) -> Result<FrequencyGrid> {
    if !(span_nu > 0.0) || !center_nu.is_finite() {
        return Err(Error::invalid(format!(
            "grid needs positive span and finite center, got center={center_nu}, span={span_nu}"
        )));
    }
    if n < 2 {
        return Err(Error::invalid(format!("grid needs n >= 2, got {n}")));
    }
    let lo = center_nu - span_nu / 2.0;
    let step = span_nu / (n - 1) as f64;
    let axis: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    FrequencyGrid::new(axis.clone(), axis)
}
