//! Frequency-resolved Hong-Ou-Mandel interference.
//!
//! For a pair with joint amplitude C(ν1,ν2) meeting on a beamsplitter of
//! transmission T (R = 1−T) with relative delay δt, the spectra behind the
//! splitter are
//!
//! ```text
//! coincidence:     I_c  = |T·C − R·C_T·e^{−i·2π·Δν·δt}|²
//! bunching (each): I_b  = (T·R/2)·|C + C_T·e^{−i·2π·Δν·δt}|²
//! ```
//!
//! with C_T(ν1,ν2) = C(ν2,ν1) and Δν = ν1 − ν2. The normalization is fixed
//! by unitarity: I_c + I_b1 + I_b2 = T·|C|² + R·|C_T|² pointwise for every
//! delay, so the three integrated rates of a normalized JSA always sum
//! to 1, and the delay-averaged coincidence rate is T² + R² (½ at T = ½).
//! The beamsplitter acts as a symmetry filter: an exchange-symmetric C at
//! δt = 0 cancels the coincidence spectrum exactly.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::jsa::JointSpectralAmplitude;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamsplitterSpec {
    pub transmission: f64,
}

impl Default for BeamsplitterSpec {
    fn default() -> Self {
        Self { transmission: 0.5 }
    }
}

impl BeamsplitterSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.transmission) {
            return Err(Error::invalid(format!(
                "beamsplitter transmission must be in [0,1], got {}",
                self.transmission
            )));
        }
        Ok(())
    }

    pub fn reflection(&self) -> f64 {
        1.0 - self.transmission
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Coincidence,
    BunchPort1,
    BunchPort2,
}

/// A real non-negative interference spectrum at a fixed HOM delay.
#[derive(Debug, Clone)]
pub struct InterferenceSpectrum {
    pub grid: FrequencyGrid,
    pub inten: Array2<f64>,
    pub delta_t_ps: f64,
    pub kind: SpectrumKind,
}

impl InterferenceSpectrum {
    /// Σ inten·dν1·dν2, optionally weighted by a filter.
    pub fn integrate(&self, filter: Option<&FilterSpec>) -> Result<f64> {
        let measure = self.grid.cell_measure();
        match filter {
            None => Ok(self.inten.sum() * measure),
            Some(f) => {
                let w = f.weights(&self.grid)?;
                Ok((&self.inten * &w).sum() * measure)
            }
        }
    }
}

/// Integrated rates of a HOM delay scan plus the analytic large-delay
/// baseline.
#[derive(Debug, Clone)]
pub struct HomScan {
    pub delays_ps: Vec<f64>,
    pub r_c: Vec<f64>,
    pub r_b1: Vec<f64>,
    pub r_b2: Vec<f64>,
    pub baseline: f64,
}

/// Spectral post-selection filter.
#[derive(Debug, Clone)]
pub enum FilterSpec {
    /// Square top-hat: each photon's frequency within `full_width/2` of the
    /// center. Cells partially covered get fractional weight.
    Tophat {
        center_nu_thz: f64,
        full_width_thz: f64,
    },
    /// Explicit weight matrix on the grid, entries in [0,1].
    Mask(Array2<f64>),
}

impl FilterSpec {
    pub fn weights(&self, grid: &FrequencyGrid) -> Result<Array2<f64>> {
        match self {
            FilterSpec::Tophat {
                center_nu_thz,
                full_width_thz,
            } => {
                if !(*full_width_thz > 0.0) {
                    return Err(Error::invalid("top-hat filter needs positive width"));
                }
                let w1 = axis_overlap(grid.nu1(), grid.d_nu1(), *center_nu_thz, *full_width_thz);
                let w2 = axis_overlap(grid.nu2(), grid.d_nu2(), *center_nu_thz, *full_width_thz);
                Ok(Array2::from_shape_fn((w1.len(), w2.len()), |(i, j)| {
                    w1[i] * w2[j]
                }))
            }
            FilterSpec::Mask(m) => {
                if m.shape() != [grid.n1(), grid.n2()] {
                    return Err(Error::invalid("filter mask shape does not match grid"));
                }
                if m.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
                    return Err(Error::invalid("filter mask entries must be in [0,1]"));
                }
                Ok(m.clone())
            }
        }
    }
}

/// Per-cell fractional overlap of [ν−dν/2, ν+dν/2] with the filter band.
fn axis_overlap(axis: &[f64], step: f64, center: f64, width: f64) -> Vec<f64> {
    let (lo, hi) = (center - width / 2.0, center + width / 2.0);
    axis.iter()
        .map(|&nu| {
            let (a, b) = (nu - step / 2.0, nu + step / 2.0);
            ((b.min(hi) - a.max(lo)).max(0.0) / step).min(1.0)
        })
        .collect()
}

fn check_inputs(
    jsa: &JointSpectralAmplitude,
    delta_t_ps: f64,
    bs: &BeamsplitterSpec,
) -> Result<()> {
    bs.validate()?;
    if !delta_t_ps.is_finite() {
        return Err(Error::invalid("delay must be finite"));
    }
    if !jsa.grid.is_square() {
        return Err(Error::invalid(
            "interference needs a square, axis-matched grid (C(ν2,ν1) is a transposition)",
        ));
    }
    Ok(())
}

fn evaluate(
    jsa: &JointSpectralAmplitude,
    delta_t_ps: f64,
    bs: &BeamsplitterSpec,
    kind: SpectrumKind,
) -> Result<InterferenceSpectrum> {
    check_inputs(jsa, delta_t_ps, bs)?;
    let t = bs.transmission;
    let r = bs.reflection();
    let n = jsa.grid.n1();
    let nu1 = jsa.grid.nu1();
    let nu2 = jsa.grid.nu2();
    let mut inten = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let c = jsa.amp[[i, j]];
            let ct = jsa.amp[[j, i]];
            let phase = Complex64::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * (nu1[i] - nu2[j]) * delta_t_ps,
            );
            inten[[i, j]] = match kind {
                SpectrumKind::Coincidence => (t * c - r * ct * phase).norm_sqr(),
                SpectrumKind::BunchPort1 | SpectrumKind::BunchPort2 => {
                    0.5 * t * r * (c + ct * phase).norm_sqr()
                }
            };
        }
    }
    Ok(InterferenceSpectrum {
        grid: jsa.grid.clone(),
        inten,
        delta_t_ps,
        kind,
    })
}

/// Spectrum of pairs leaving opposite beamsplitter ports.
pub fn coincidence_spectrum(
    jsa: &JointSpectralAmplitude,
    delta_t_ps: f64,
    bs: &BeamsplitterSpec,
) -> Result<InterferenceSpectrum> {
    evaluate(jsa, delta_t_ps, bs, SpectrumKind::Coincidence)
}

/// Coincidence spectrum under the real-JSA assumption, written without
/// complex arithmetic: I ∝ T²C² + R²C_T² − 2TR·C·C_T·cos(2πΔν·δt).
/// Applied to √JSI this bounds the dip visibility from above — any phase
/// structure can only lower it.
pub fn coincidence_spectrum_real(
    jsa_mag: &JointSpectralAmplitude,
    delta_t_ps: f64,
    bs: &BeamsplitterSpec,
) -> Result<InterferenceSpectrum> {
    check_inputs(jsa_mag, delta_t_ps, bs)?;
    if !jsa_mag.is_real_nonnegative() {
        return Err(Error::invalid(
            "real-form evaluation needs a real non-negative amplitude",
        ));
    }
    let t = bs.transmission;
    let r = bs.reflection();
    let n = jsa_mag.grid.n1();
    let nu1 = jsa_mag.grid.nu1();
    let nu2 = jsa_mag.grid.nu2();
    let mut inten = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let c = jsa_mag.amp[[i, j]].re;
            let ct = jsa_mag.amp[[j, i]].re;
            let cosphi = (2.0 * std::f64::consts::PI * (nu1[i] - nu2[j]) * delta_t_ps).cos();
            inten[[i, j]] = t * t * c * c + r * r * ct * ct - 2.0 * t * r * c * ct * cosphi;
        }
    }
    Ok(InterferenceSpectrum {
        grid: jsa_mag.grid.clone(),
        inten,
        delta_t_ps,
        kind: SpectrumKind::Coincidence,
    })
}

/// Spectrum of pairs bunching into one output port (ports are identical in
/// this model; the port tag only routes detection downstream).
pub fn bunching_spectrum(
    jsa: &JointSpectralAmplitude,
    delta_t_ps: f64,
    bs: &BeamsplitterSpec,
    port: u8,
) -> Result<InterferenceSpectrum> {
    let kind = match port {
        1 => SpectrumKind::BunchPort1,
        2 => SpectrumKind::BunchPort2,
        _ => {
            return Err(Error::invalid(format!(
                "bunching port must be 1 or 2, got {port}"
            )))
        }
    };
    evaluate(jsa, delta_t_ps, bs, kind)
}

/// R = Σ filter·I·dν1·dν2 (all-ones filter when absent).
pub fn integrate_rate(spec: &InterferenceSpectrum, filter: Option<&FilterSpec>) -> Result<f64> {
    spec.integrate(filter)
}

/// Analytic δt→∞ (cosine-averaged) coincidence rate under a filter:
/// ∫ f·(T²|C|² + R²|C_T|²).
pub fn analytic_baseline(
    jsa: &JointSpectralAmplitude,
    bs: &BeamsplitterSpec,
    filter: Option<&FilterSpec>,
) -> Result<f64> {
    bs.validate()?;
    if !jsa.grid.is_square() {
        return Err(Error::invalid("baseline needs a square grid"));
    }
    let t2 = bs.transmission * bs.transmission;
    let r2 = bs.reflection() * bs.reflection();
    let w = match filter {
        Some(f) => Some(f.weights(&jsa.grid)?),
        None => None,
    };
    let n = jsa.grid.n1();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let c2 = jsa.amp[[i, j]].norm_sqr();
            let ct2 = jsa.amp[[j, i]].norm_sqr();
            let fw = w.as_ref().map_or(1.0, |w| w[[i, j]]);
            acc += fw * (t2 * c2 + r2 * ct2);
        }
    }
    Ok(acc * jsa.grid.cell_measure())
}

/// Evaluate the three channels over a delay list.
pub fn scan_hom(
    jsa: &JointSpectralAmplitude,
    delays_ps: &[f64],
    bs: &BeamsplitterSpec,
    filter: Option<&FilterSpec>,
) -> Result<HomScan> {
    if delays_ps.iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("delays must be finite"));
    }
    let mut r_c = Vec::with_capacity(delays_ps.len());
    let mut r_b1 = Vec::with_capacity(delays_ps.len());
    let mut r_b2 = Vec::with_capacity(delays_ps.len());
    for &dt in delays_ps {
        r_c.push(coincidence_spectrum(jsa, dt, bs)?.integrate(filter)?);
        r_b1.push(bunching_spectrum(jsa, dt, bs, 1)?.integrate(filter)?);
        r_b2.push(bunching_spectrum(jsa, dt, bs, 2)?.integrate(filter)?);
    }
    let baseline = analytic_baseline(jsa, bs, filter)?;
    Ok(HomScan {
        delays_ps: delays_ps.to_vec(),
        r_c,
        r_b1,
        r_b2,
        baseline,
    })
}

/// Dip visibility V = (baseline − min r_c)/baseline. The minimum is located
/// by direct scan plus parabolic refinement over the three lowest samples,
/// so no dip shape is assumed.
pub fn visibility(scan: &HomScan) -> Result<f64> {
    if !(scan.baseline > 0.0) {
        return Err(Error::DegenerateInput("scan baseline is zero".into()));
    }
    if scan.r_c.is_empty() {
        return Err(Error::invalid("scan has no delay points"));
    }
    let min = refined_minimum(&scan.delays_ps, &scan.r_c);
    Ok((scan.baseline - min) / scan.baseline)
}

/// Minimum rate with parabolic refinement through the argmin and its two
/// neighbours; falls back to the raw sample at the scan edges or for a
/// degenerate parabola.
fn refined_minimum(delays: &[f64], rates: &[f64]) -> f64 {
    let (k, _) = rates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if k == 0 || k + 1 >= rates.len() {
        return rates[k];
    }
    let (x0, x1, x2) = (delays[k - 1], delays[k], delays[k + 1]);
    let (y0, y1, y2) = (rates[k - 1], rates[k], rates[k + 1]);
    // Lagrange parabola vertex
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    if denom == 0.0 {
        return y1;
    }
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    if a <= 0.0 {
        // not convex around the sample minimum; keep the raw value
        return y1;
    }
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    let xv = -b / (2.0 * a);
    if xv < x0 || xv > x2 {
        return y1;
    }
    let c = y1 - a * x1 * x1 - b * x1;
    let yv = a * xv * xv + b * xv + c;
    yv.min(y1).max(0.0)
}

/// Visibility after centered top-hat post-selection, for each width.
/// Spectra are evaluated once per delay and integrated against every
/// filter, so the cost is one scan regardless of the width count.
pub fn visibility_vs_bandwidth(
    jsa: &JointSpectralAmplitude,
    delays_ps: &[f64],
    widths_thz: &[f64],
    bs: &BeamsplitterSpec,
) -> Result<Vec<(f64, f64)>> {
    if widths_thz.is_empty() {
        return Ok(Vec::new());
    }
    if widths_thz.windows(2).any(|w| w[1] <= w[0]) || widths_thz[0] <= 0.0 {
        return Err(Error::invalid(
            "filter widths must be positive and ascending",
        ));
    }
    let center = jsa.grid.center_nu1();
    let filters: Vec<FilterSpec> = widths_thz
        .iter()
        .map(|&w| FilterSpec::Tophat {
            center_nu_thz: center,
            full_width_thz: w,
        })
        .collect();
    let weights: Vec<Array2<f64>> = filters
        .iter()
        .map(|f| f.weights(&jsa.grid))
        .collect::<Result<_>>()?;

    let measure = jsa.grid.cell_measure();
    let mut rates = vec![Vec::with_capacity(delays_ps.len()); widths_thz.len()];
    for &dt in delays_ps {
        let spec = coincidence_spectrum(jsa, dt, bs)?;
        for (w, r) in weights.iter().zip(rates.iter_mut()) {
            r.push((&spec.inten * w).sum() * measure);
        }
    }
    let mut out = Vec::with_capacity(widths_thz.len());
    for (k, &width) in widths_thz.iter().enumerate() {
        let baseline = analytic_baseline(jsa, bs, Some(&filters[k]))?;
        let scan = HomScan {
            delays_ps: delays_ps.to_vec(),
            r_c: rates[k].clone(),
            r_b1: vec![0.0; delays_ps.len()],
            r_b2: vec![0.0; delays_ps.len()],
            baseline,
        };
        out.push((width, visibility(&scan)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::jsa::JointSpectralAmplitude;
    use ndarray::Array2;

    fn bs() -> BeamsplitterSpec {
        BeamsplitterSpec::default()
    }

    /// smooth exchange-symmetric complex JSA
    fn symmetric_jsa(n: usize) -> JointSpectralAmplitude {
        let grid = make_grid(190.0, 8.0, n).unwrap();
        let amp = Array2::from_shape_fn((n, n), |(i, j)| {
            let x = grid.nu1()[i] - 190.0;
            let y = grid.nu2()[j] - 190.0;
            Complex64::from_polar((-(x * x + y * y) / 6.0).exp(), 0.3 * (x + y))
        });
        JointSpectralAmplitude::new(grid, amp)
            .unwrap()
            .normalize()
            .unwrap()
    }

    fn asymmetric_jsa(n: usize) -> JointSpectralAmplitude {
        let grid = make_grid(190.0, 8.0, n).unwrap();
        let amp = Array2::from_shape_fn((n, n), |(i, j)| {
            let x = grid.nu1()[i] - 190.0;
            let y = grid.nu2()[j] - 190.0;
            Complex64::from_polar(
                (-(x * x + 0.6 * y * y + 0.4 * x * y) / 5.0).exp(),
                0.2 * x - 0.05 * y * y,
            )
        });
        JointSpectralAmplitude::new(grid, amp)
            .unwrap()
            .normalize()
            .unwrap()
    }

    #[test]
    fn symmetric_jsa_cancels_at_zero_delay() {
        let jsa = symmetric_jsa(24);
        let spec = coincidence_spectrum(&jsa, 0.0, &bs()).unwrap();
        let peak = spec.inten.iter().cloned().fold(0.0, f64::max);
        assert!(peak < 1e-25, "residual {peak}");
    }

    #[test]
    fn two_cell_constructive_maximum() {
        // C(a,b) = C(b,a) = 1/√2 on a 2×2 grid; at 2π·Δν·δt = π the
        // off-diagonal cells double the per-cell baseline
        let grid = make_grid(0.5, 1.0, 2).unwrap();
        let mut amp = Array2::from_elem((2, 2), Complex64::ZERO);
        let v = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        amp[[0, 1]] = v;
        amp[[1, 0]] = v;
        let jsa = JointSpectralAmplitude::new(grid, amp)
            .unwrap()
            .normalize()
            .unwrap();
        // Δν = ±1 THz on the off-diagonal: δt = 0.5 ps gives phase π
        let spec = coincidence_spectrum(&jsa, 0.5, &bs()).unwrap();
        let c2 = jsa.amp[[0, 1]].norm_sqr();
        let baseline_cell = 0.25 * (c2 + c2);
        assert!((spec.inten[[0, 1]] - 2.0 * baseline_cell).abs() < 1e-12);
        assert!((spec.inten[[1, 0]] - 2.0 * baseline_cell).abs() < 1e-12);
        // and at δt = 0 the symmetric matrix cancels
        let spec0 = coincidence_spectrum(&jsa, 0.0, &bs()).unwrap();
        assert!(spec0.inten.iter().all(|v| *v < 1e-30));
    }

    #[test]
    fn bunching_peaks_where_coincidences_vanish() {
        let jsa = symmetric_jsa(16);
        let b = bunching_spectrum(&jsa, 0.0, &bs(), 1).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let c2 = jsa.amp[[i, j]].norm_sqr();
                // per-port bunching at δt=0 equals ½·|C|² for symmetric C
                assert!((b.inten[[i, j]] - 0.5 * c2).abs() < 1e-12 * c2.max(1e-30));
            }
        }
    }

    #[test]
    fn conservation_across_delays_and_splits() {
        let jsa = asymmetric_jsa(12);
        for t in [0.5, 0.3, 0.7, 1.0] {
            let bs = BeamsplitterSpec { transmission: t };
            let mut totals = Vec::new();
            for dt in [-1.3, 0.0, 0.4, 2.7] {
                let rc = coincidence_spectrum(&jsa, dt, &bs)
                    .unwrap()
                    .integrate(None)
                    .unwrap();
                let b1 = bunching_spectrum(&jsa, dt, &bs, 1)
                    .unwrap()
                    .integrate(None)
                    .unwrap();
                let b2 = bunching_spectrum(&jsa, dt, &bs, 2)
                    .unwrap()
                    .integrate(None)
                    .unwrap();
                totals.push(rc + b1 + b2);
            }
            for w in totals.windows(2) {
                assert!((w[0] - w[1]).abs() < 1e-12, "T={t}: {totals:?}");
            }
            assert!(
                (totals[0] - 1.0).abs() < 1e-10,
                "T={t}: total {}",
                totals[0]
            );
        }
    }

    #[test]
    fn real_form_agrees_with_general() {
        let n = 14;
        let grid = make_grid(190.0, 6.0, n).unwrap();
        let amp = Array2::from_shape_fn((n, n), |(i, j)| {
            Complex64::new((0.1 + ((i * 7 + j * 3) % 11) as f64 / 11.0).sqrt(), 0.0)
        });
        let jsa = JointSpectralAmplitude::new(grid, amp)
            .unwrap()
            .normalize()
            .unwrap();
        for dt in [0.0, 0.37, -1.9] {
            let full = coincidence_spectrum(&jsa, dt, &bs()).unwrap();
            let real = coincidence_spectrum_real(&jsa, dt, &bs()).unwrap();
            for (a, b) in full.inten.iter().zip(real.inten.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn real_form_rejects_complex_input() {
        let jsa = symmetric_jsa(8);
        assert!(coincidence_spectrum_real(&jsa, 0.0, &bs()).is_err());
    }

    #[test]
    fn antisymmetric_jsa_gives_coincidence_peak() {
        // C_T = −C doubles the coincidence rate at δt = 0: V = −1
        let n = 10;
        let grid = make_grid(190.0, 4.0, n).unwrap();
        let amp = Array2::from_shape_fn((n, n), |(i, j)| {
            let x = grid.nu1()[i] - 190.0;
            let y = grid.nu2()[j] - 190.0;
            Complex64::new((x - y) * (-(x * x + y * y)).exp(), 0.0)
        });
        let jsa = JointSpectralAmplitude::new(grid, amp)
            .unwrap()
            .normalize()
            .unwrap();
        let scan = scan_hom(&jsa, &[0.0], &bs(), None).unwrap();
        // the zero-delay rate doubles the baseline, so V there is −1
        assert!((scan.r_c[0] - 2.0 * scan.baseline).abs() < 1e-10);
        let v = visibility(&scan).unwrap();
        assert!((v + 1.0).abs() < 1e-10, "V = {v}");
    }

    #[test]
    fn symmetric_scan_has_unit_visibility() {
        let jsa = symmetric_jsa(20);
        let delays: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.2).collect();
        let scan = scan_hom(&jsa, &delays, &bs(), None).unwrap();
        let v = visibility(&scan).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "V = {v}");
        // the bunching channels trace the inverted dip: peak at zero delay
        assert!(
            scan.r_b1[10] > 1.5 * scan.r_b1[0],
            "bunching must peak at δt = 0"
        );
        assert!(
            (scan.r_b1[10] - scan.r_b2[10]).abs() < 1e-12,
            "ports identical at T = ½"
        );
    }

    #[test]
    fn filters_select_rates() {
        let jsa = symmetric_jsa(32);
        let spec = coincidence_spectrum(&jsa, 3.0, &bs()).unwrap();
        let all = spec.integrate(None).unwrap();
        let wide = FilterSpec::Tophat {
            center_nu_thz: 190.0,
            full_width_thz: 100.0,
        };
        assert!((spec.integrate(Some(&wide)).unwrap() - all).abs() < 1e-12);
        // tiny filter passes almost nothing
        let tiny = FilterSpec::Tophat {
            center_nu_thz: 190.0,
            full_width_thz: 1e-6,
        };
        assert!(spec.integrate(Some(&tiny)).unwrap() < 1e-6);
        // mask must match the grid
        let bad = FilterSpec::Mask(Array2::ones((3, 3)));
        assert!(spec.integrate(Some(&bad)).is_err());
    }

    #[test]
    fn bandwidth_scan_narrow_limit_is_unity() {
        let jsa = asymmetric_jsa(48);
        let delays: Vec<f64> = (-12..=12).map(|k| k as f64 * 0.25).collect();
        let vw = visibility_vs_bandwidth(&jsa, &delays, &[0.05, 1.0, 6.0], &bs()).unwrap();
        // a single spectral cell cannot carry exchange asymmetry
        assert!(vw[0].1 > 0.999, "narrow-limit V = {}", vw[0].1);
        assert!(vw.iter().all(|(_, v)| *v <= 1.0 + 1e-9));
    }

    #[test]
    fn zero_baseline_is_degenerate() {
        let scan = HomScan {
            delays_ps: vec![0.0],
            r_c: vec![0.0],
            r_b1: vec![0.0],
            r_b2: vec![0.0],
            baseline: 0.0,
        };
        assert!(matches!(visibility(&scan), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn non_square_grid_rejected() {
        let grid = crate::grid::FrequencyGrid::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0]).unwrap();
        let amp = Array2::from_elem((3, 2), Complex64::new(0.5, 0.0));
        let jsa = JointSpectralAmplitude::new(grid, amp).unwrap();
        assert!(coincidence_spectrum(&jsa, 0.0, &bs()).is_err());
    }
}
