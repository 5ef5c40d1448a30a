//! Inverse chain: arrival times back to joint spectra, plus rate and
//! counting-statistics estimators.
//!
//! Reconstruction maps each time bin through the inverted per-fiber group
//! delay onto the frequency grid. A bin's count is spread over its exact
//! mapped frequency footprint (separable interval overlap with the target
//! cells — the extended-source form of bilinear spreading), which keeps
//! counts exactly and keeps a flat spectral density flat after the
//! time→frequency change of variables.

use ndarray::Array2;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::hom::{FilterSpec, HomScan};
use crate::jsa::JointSpectralIntensity;
use crate::spectrometer::{CoincidenceHistogram, DispersionCurve};
use crate::units::C_NM_THZ;

/// Per-channel inversion data: the fiber curve (channels sharing a fiber
/// share a curve) and a constant trigger-to-detector time offset.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelCalibration {
    pub id: u8,
    #[serde(default)]
    pub time_offset_ps: f64,
    pub curve: DispersionCurve,
}

#[derive(Debug, Clone)]
pub struct CalibrationSet {
    channels: BTreeMap<u8, ChannelCalibration>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFileRaw {
    schema_version: u32,
    channel: Vec<ChannelCalibration>,
}

impl CalibrationSet {
    pub fn new(channels: Vec<ChannelCalibration>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ch in channels {
            ch.curve.validate()?;
            if map.insert(ch.id, ch).is_some() {
                return Err(Error::invalid("duplicate channel in calibration"));
            }
        }
        if map.is_empty() {
            return Err(Error::invalid("calibration maps no channels"));
        }
        Ok(Self { channels: map })
    }

    pub fn channel(&self, id: u8) -> Result<&ChannelCalibration> {
        self.channels
            .get(&id)
            .ok_or_else(|| Error::invalid(format!("channel {id} not in calibration")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: CalibrationFileRaw =
            toml::from_str(text).map_err(|e| Error::Format(format!("calibration file: {e}")))?;
        if raw.schema_version != 1 {
            return Err(Error::Format(format!(
                "unsupported calibration schema version {}",
                raw.schema_version
            )));
        }
        Self::new(raw.channel)
    }
}

/// Result of a histogram → spectrum inversion.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Normalized spectral density on the target grid.
    pub jsi: JointSpectralIntensity,
    /// Raw deposited counts per cell (before normalization).
    pub deposited_counts: Array2<f64>,
    pub total_counts: u64,
    /// Histogram content that mapped outside the calibration range or the
    /// target grid (fractional at grid edges); never silently dropped.
    pub out_of_range_counts: f64,
}

/// Fractional overlap of the interval [lo, hi] with every cell of a uniform
/// axis, as weights relative to the interval length.
fn interval_weights(axis: &[f64], step: f64, lo: f64, hi: f64) -> Vec<(usize, f64)> {
    debug_assert!(hi >= lo);
    let width = (hi - lo).max(f64::MIN_POSITIVE);
    let first_edge = axis[0] - step / 2.0;
    let i0 = (((lo - first_edge) / step).floor().max(0.0)) as usize;
    let mut out = Vec::new();
    let mut i = i0;
    while i < axis.len() {
        let a = axis[i] - step / 2.0;
        let b = axis[i] + step / 2.0;
        if a > hi {
            break;
        }
        let ov = (b.min(hi) - a.max(lo)).max(0.0);
        if ov > 0.0 {
            out.push((i, ov / width));
        }
        i += 1;
    }
    out
}

/// Invert the dispersion encoding: every time bin of `hist` becomes a
/// frequency rectangle on `target`, and its counts are deposited over that
/// footprint. Returns the normalized density plus the raw deposit and an
/// out-of-range counter.
pub fn reconstruct_jsi(
    hist: &CoincidenceHistogram,
    cal: &CalibrationSet,
    target: &FrequencyGrid,
) -> Result<Reconstruction> {
    let (deposited, out_of_range, total) = deposit_counts(hist, cal, target)?;
    let density = deposited.mapv(|m| m / target.cell_measure());
    let jsi = JointSpectralIntensity::new(target.clone(), density)?.normalize()?;
    Ok(Reconstruction {
        jsi,
        deposited_counts: deposited,
        total_counts: total,
        out_of_range_counts: out_of_range,
    })
}

/// The deposit pass alone: raw per-cell counts, out-of-range weight, and
/// the histogram total. Usable when the spectrum may be legitimately empty
/// (rate integration of sparse scans).
fn deposit_counts(
    hist: &CoincidenceHistogram,
    cal: &CalibrationSet,
    target: &FrequencyGrid,
) -> Result<(Array2<f64>, f64, u64)> {
    let cal1 = cal.channel(hist.channel_pair.0)?;
    let cal2 = cal.channel(hist.channel_pair.1)?;

    let n_bins = hist.counts.nrows();
    // per-axis bin → frequency interval maps, computed once
    let map_axis = |c: &ChannelCalibration| -> Vec<Option<(f64, f64)>> {
        (0..n_bins)
            .map(|b| {
                let t_lo = hist.origin_ps + b as f64 * hist.bin_width_ps - c.time_offset_ps;
                let t_hi = t_lo + hist.bin_width_ps;
                let l0 = c.curve.invert_group_delay(t_lo);
                let l1 = c.curve.invert_group_delay(t_hi);
                match (l0, l1) {
                    (Ok(l0), Ok(l1)) => {
                        let (nu_a, nu_b) = (C_NM_THZ / l0, C_NM_THZ / l1);
                        Some((nu_a.min(nu_b), nu_a.max(nu_b)))
                    }
                    _ => None,
                }
            })
            .collect()
    };
    let nu_map1 = map_axis(cal1);
    let nu_map2 = map_axis(cal2);

    let mut deposited = Array2::<f64>::zeros((target.n1(), target.n2()));
    let mut out_of_range = 0.0_f64;
    let mut total = 0u64;

    for bi in 0..n_bins {
        for bj in 0..n_bins {
            let n = hist.counts[[bi, bj]];
            if n == 0 {
                continue;
            }
            total += n;
            let (r1, r2) = match (&nu_map1[bi], &nu_map2[bj]) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    out_of_range += n as f64;
                    continue;
                }
            };
            let w1 = interval_weights(target.nu1(), target.d_nu1(), r1.0, r1.1);
            let w2 = interval_weights(target.nu2(), target.d_nu2(), r2.0, r2.1);
            let covered1: f64 = w1.iter().map(|(_, w)| w).sum();
            let covered2: f64 = w2.iter().map(|(_, w)| w).sum();
            let mass = n as f64;
            for &(i, wa) in &w1 {
                for &(j, wb) in &w2 {
                    deposited[[i, j]] += mass * wa * wb;
                }
            }
            out_of_range += mass * (1.0 - covered1 * covered2);
        }
    }
    Ok((deposited, out_of_range, total))
}

/// Forward expectation: the probability that a pair drawn from `density`
/// (on `grid`) lands in each time bin, with axis 1 read through `cal1` and
/// axis 2 through `cal2`. Each grid cell is sliced `oversample` times per
/// axis to track the curvature of t(λ(ν)). Rows/columns that map outside
/// the window are simply absent from the totals.
pub fn expected_histogram(
    grid: &FrequencyGrid,
    density: &Array2<f64>,
    cal1: &ChannelCalibration,
    cal2: &ChannelCalibration,
    bin_width_ps: f64,
    window_ps: f64,
    oversample: usize,
) -> Result<Array2<f64>> {
    if density.shape() != [grid.n1(), grid.n2()] {
        return Err(Error::invalid("density shape does not match grid"));
    }
    if oversample == 0 {
        return Err(Error::invalid("oversample must be >= 1"));
    }
    let n_bins = (window_ps / bin_width_ps).ceil() as usize;

    // per-axis cell → time-bin weight maps (sparse rows)
    let axis_weights =
        |axis: &[f64], step: f64, c: &ChannelCalibration| -> Result<Vec<Vec<(usize, f64)>>> {
            let mut rows = Vec::with_capacity(axis.len());
            for &nu in axis {
                let mut row: BTreeMap<usize, f64> = BTreeMap::new();
                for s in 0..oversample {
                    let f0 = (s as f64) / oversample as f64;
                    let f1 = (s as f64 + 1.0) / oversample as f64;
                    let nu_a = nu - step / 2.0 + f0 * step;
                    let nu_b = nu - step / 2.0 + f1 * step;
                    let t_of = |nu: f64| -> Result<f64> {
                        Ok(c.curve.group_delay(C_NM_THZ / nu)? + c.time_offset_ps)
                    };
                    let (Ok(ta), Ok(tb)) = (t_of(nu_a), t_of(nu_b)) else {
                        continue;
                    };
                    let (t_lo, t_hi) = (ta.min(tb), ta.max(tb));
                    let slice_mass = 1.0 / oversample as f64;
                    let width = (t_hi - t_lo).max(f64::MIN_POSITIVE);
                    let b0 = ((t_lo / bin_width_ps).floor().max(0.0)) as usize;
                    for b in b0..n_bins {
                        let a = b as f64 * bin_width_ps;
                        let e = a + bin_width_ps;
                        if a > t_hi {
                            break;
                        }
                        let ov = (e.min(t_hi) - a.max(t_lo)).max(0.0);
                        if ov > 0.0 {
                            *row.entry(b).or_insert(0.0) += slice_mass * ov / width;
                        }
                    }
                }
                rows.push(row.into_iter().collect());
            }
            Ok(rows)
        };
    let w1 = axis_weights(grid.nu1(), grid.d_nu1(), cal1)?;
    let w2 = axis_weights(grid.nu2(), grid.d_nu2(), cal2)?;

    let measure = grid.cell_measure();
    let mut expected = Array2::<f64>::zeros((n_bins, n_bins));
    for i in 0..grid.n1() {
        if w1[i].is_empty() {
            continue;
        }
        for j in 0..grid.n2() {
            let mass = density[[i, j]] * measure;
            if mass == 0.0 || w2[j].is_empty() {
                continue;
            }
            for &(b1, f1) in &w1[i] {
                for &(b2, f2) in &w2[j] {
                    expected[[b1, b2]] += mass * f1 * f2;
                }
            }
        }
    }
    Ok(expected)
}

/// Pair rate and per-arm system efficiencies.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateModel {
    pub pair_rate_hz: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl RateModel {
    pub fn from_pulsed(rep_rate_mhz: f64, pairs_per_pulse: f64, eta1: f64, eta2: f64) -> Self {
        Self {
            pair_rate_hz: rep_rate_mhz * 1e6 * pairs_per_pulse,
            eta1,
            eta2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate_hz >= 0.0) {
            return Err(Error::invalid("pair rate must be >= 0"));
        }
        for eta in [self.eta1, self.eta2] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::invalid("efficiencies must be in [0,1]"));
            }
        }
        Ok(())
    }
}

/// Detected coincidence rate R_s = R_p·η1·η2.
pub fn expected_coincidence_rate(model: &RateModel) -> Result<f64> {
    model.validate()?;
    Ok(model.pair_rate_hz * model.eta1 * model.eta2)
}

/// Relative statistical uncertainty of one bin of the coincidence matrix:
/// N = rate·integration/bins (halved first when the 50/50 HOM splitter eats
/// half the coincidences), uncertainty 1/√N.
pub fn bin_relative_uncertainty(
    rate_hz: f64,
    integration_s: f64,
    bins_in_fwhm: f64,
    hom_split: bool,
) -> Result<f64> {
    if !(rate_hz > 0.0 && integration_s > 0.0 && bins_in_fwhm > 0.0) {
        return Err(Error::invalid(
            "rate, integration and bin count must be positive",
        ));
    }
    let mut per_bin = rate_hz * integration_s / bins_in_fwhm;
    if hom_split {
        per_bin /= 2.0;
    }
    Ok(1.0 / per_bin.sqrt())
}

/// Heralding (Klyshko) efficiency: coincidences over heralding singles.
pub fn klyshko_efficiency(coincidences: u64, heralding_singles: u64) -> Result<f64> {
    if heralding_singles == 0 {
        return Err(Error::DegenerateInput("no heralding singles".into()));
    }
    if coincidences > heralding_singles {
        return Err(Error::invalid("more coincidences than heralding singles"));
    }
    Ok(coincidences as f64 / heralding_singles as f64)
}

/// Histograms recorded at one HOM delay: the cross-port pairs feeding the
/// coincidence channel and the within-port pairs feeding the two bunching
/// channels.
#[derive(Debug, Clone)]
pub struct DelayHistograms {
    pub delay_ps: f64,
    pub coincidence: Vec<CoincidenceHistogram>,
    pub bunch1: Vec<CoincidenceHistogram>,
    pub bunch2: Vec<CoincidenceHistogram>,
}

/// Filtered counts of one histogram after reconstruction onto `grid`.
fn filtered_counts(
    hist: &CoincidenceHistogram,
    cal: &CalibrationSet,
    filter: Option<&FilterSpec>,
    grid: &FrequencyGrid,
) -> Result<f64> {
    let (deposited, _, _) = deposit_counts(hist, cal, grid)?;
    match filter {
        None => Ok(deposited.sum()),
        Some(f) => {
            let w = f.weights(grid)?;
            Ok((&deposited * &w).sum())
        }
    }
}

/// Assemble a HOM scan from per-delay histogram sets: reconstruct, apply
/// the optional virtual filter, integrate. The baseline is the mean
/// coincidence rate of the wing points (|δt| > `wings_threshold_ps`).
pub fn scan_from_histograms(
    sets: &[DelayHistograms],
    cal: &CalibrationSet,
    filter: Option<&FilterSpec>,
    grid: &FrequencyGrid,
    wings_threshold_ps: f64,
) -> Result<HomScan> {
    if sets.is_empty() {
        return Err(Error::invalid("no delay points"));
    }
    let mut delays = Vec::with_capacity(sets.len());
    let mut r_c = Vec::with_capacity(sets.len());
    let mut r_b1 = Vec::with_capacity(sets.len());
    let mut r_b2 = Vec::with_capacity(sets.len());
    for set in sets {
        let sum_counts = |hists: &[CoincidenceHistogram]| -> Result<f64> {
            let mut acc = 0.0;
            for h in hists {
                acc += filtered_counts(h, cal, filter, grid)?;
            }
            Ok(acc)
        };
        delays.push(set.delay_ps);
        r_c.push(sum_counts(&set.coincidence)?);
        r_b1.push(sum_counts(&set.bunch1)?);
        r_b2.push(sum_counts(&set.bunch2)?);
    }
    let wings: Vec<f64> = delays
        .iter()
        .zip(&r_c)
        .filter(|(d, _)| d.abs() > wings_threshold_ps)
        .map(|(_, r)| *r)
        .collect();
    if wings.len() < 2 {
        return Err(Error::BaselineUndefined(format!(
            "need at least 2 wing points beyond |δt| = {wings_threshold_ps} ps, found {}",
            wings.len()
        )));
    }
    let baseline = wings.iter().sum::<f64>() / wings.len() as f64;
    if !(baseline > 0.0) {
        return Err(Error::BaselineUndefined("wing rates are all zero".into()));
    }
    Ok(HomScan {
        delays_ps: delays,
        r_c,
        r_b1,
        r_b2,
        baseline,
    })
}
