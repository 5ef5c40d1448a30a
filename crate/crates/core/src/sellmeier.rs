//! Sellmeier refractive-index sets and their data file.
//!
//! The standard multi-term form is used throughout:
//!
//! ```text
//! n²(λ) = A + Σ_k B_k / (1 − C_k/λ²) − D·λ²,    λ in μm
//! ```
//!
//! Coefficients ship as a TOML data file (one axis per block, named
//! coefficients, validity range, provenance notes); see `data/` in the
//! repository root.

use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};

/// Named coefficient set for one crystal polarization axis.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SellmeierSet {
    /// Crystal polarization axis this set describes ("y", "z", ...).
    pub axis: String,
    pub a: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default)]
    pub d: f64,
    /// Wavelength validity range in μm.
    pub valid_range_um: (f64, f64),
    /// Where the coefficients come from (free text, kept with the data).
    #[serde(default)]
    pub source: String,
}

impl SellmeierSet {
    /// n(λ) per the stored formula. `lambda_nm` must fall in the validity
    /// range; the result must be a physical index (> 1), otherwise the set
    /// is being used outside its domain.
    pub fn refractive_index(&self, lambda_nm: f64) -> Result<f64> {
        let lambda_um = lambda_nm * 1e-3;
        let (lo, hi) = self.valid_range_um;
        if !(lambda_um >= lo && lambda_um <= hi) {
            return Err(Error::domain(format!(
                "axis {}: wavelength {lambda_nm} nm outside validity [{lo}, {hi}] um",
                self.axis
            )));
        }
        let l2 = lambda_um * lambda_um;
        let mut n2 = self.a - self.d * l2;
        for (b, c) in self.b.iter().zip(&self.c) {
            n2 += b / (1.0 - c / l2);
        }
        if !(n2 > 1.0) {
            return Err(Error::domain(format!(
                "axis {}: n^2 = {n2} at {lambda_nm} nm is unphysical",
                self.axis
            )));
        }
        Ok(n2.sqrt())
    }
}

/// On-disk container: a list of axis blocks.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierFile {
    #[serde(default)]
    pub provenance: String,
    pub axis: Vec<SellmeierSet>,
}

impl SellmeierFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: SellmeierFile =
            toml::from_str(text).map_err(|e| Error::Format(format!("sellmeier file: {e}")))?;
        for set in &file.axis {
            if set.b.len() != set.c.len() {
                return Err(Error::Format(format!(
                    "axis {}: B and C coefficient lists differ in length",
                    set.axis
                )));
            }
            if !(set.valid_range_um.0 > 0.0 && set.valid_range_um.1 > set.valid_range_um.0) {
                return Err(Error::Format(format!(
                    "axis {}: bad validity range",
                    set.axis
                )));
            }
        }
        Ok(file)
    }

    pub fn axis(&self, label: &str) -> Result<&SellmeierSet> {
        self.axis
            .iter()
            .find(|s| s.axis == label)
            .ok_or_else(|| Error::Format(format!("no axis '{label}' in sellmeier file")))
    }
}
