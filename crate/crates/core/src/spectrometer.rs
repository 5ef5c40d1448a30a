//! Forward model of the dispersive-fiber single-photon spectrometer.
//!
//! A long single-mode fiber encodes photon wavelength into arrival time
//! through its group delay t(λ); fast detectors with Gaussian timing jitter
//! then sample that time. The spectral resolution of a channel is the
//! jitter divided by the local dispersion slope, and two channels combine
//! in inverse quadrature for coincidence detection.
//!
//! `simulate_timetags` is the detection Monte Carlo: per pump pulse it
//! draws a pair from the three interference spectra (coincidence, bunching
//! port 1/2 — one categorical distribution, so pair-number conservation
//! carries over to counts), routes the photons through the port's 50/50
//! detector split, thins by fiber transmission × detector efficiency,
//! applies dispersion delay plus jitter, and adds uniform background
//! counts. All randomness is counter-based on (seed, pulse, draw slot).

use serde::Deserialize;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hom::{bunching_spectrum, coincidence_spectrum, BeamsplitterSpec, InterferenceSpectrum};
use crate::jsa::JointSpectralAmplitude;
use crate::rng::CounterRng;
use crate::units::{frequency_to_wavelength, GAUSSIAN_FWHM_PER_SIGMA};

/// Polynomial group delay t(λ) in ps, expanded around `lambda_ref_nm`,
/// degree ≤ 3, single-signed slope over the validity range.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionCurve {
    /// Human label, e.g. the fiber length ("1.3 km").
    pub label: String,
    /// Coefficients of Σ c_k·(λ−λ_ref)^k, ps with λ in nm.
    pub coeffs_ps: Vec<f64>,
    pub lambda_ref_nm: f64,
    pub valid_range_nm: (f64, f64),
    /// Power transmission of the fiber.
    pub transmission: f64,
}

impl DispersionCurve {
    pub fn validate(&self) -> Result<()> {
        if self.coeffs_ps.is_empty() || self.coeffs_ps.len() > 4 {
            return Err(Error::invalid(
                "dispersion polynomial must have degree 1..=3",
            ));
        }
        let (lo, hi) = self.valid_range_nm;
        if !(hi > lo) {
            return Err(Error::invalid("dispersion validity range is empty"));
        }
        if !(0.0..=1.0).contains(&self.transmission) {
            return Err(Error::invalid("fiber transmission must be in [0,1]"));
        }
        // slope must be nonzero and single-signed over the range (invertible)
        let s0 = self.slope_unchecked(lo);
        for k in 0..=200 {
            let lambda = lo + (hi - lo) * k as f64 / 200.0;
            let s = self.slope_unchecked(lambda);
            if s == 0.0 || s.signum() != s0.signum() {
                return Err(Error::invalid(format!(
                    "fiber {}: group delay not invertible near {lambda:.1} nm",
                    self.label
                )));
            }
        }
        Ok(())
    }

    fn in_range(&self, lambda_nm: f64) -> Result<()> {
        let (lo, hi) = self.valid_range_nm;
        if !(lambda_nm >= lo && lambda_nm <= hi) {
            return Err(Error::domain(format!(
                "fiber {}: {lambda_nm} nm outside calibration range [{lo}, {hi}]",
                self.label
            )));
        }
        Ok(())
    }

    /// Group delay t(λ) in ps.
    pub fn group_delay(&self, lambda_nm: f64) -> Result<f64> {
        self.in_range(lambda_nm)?;
        let x = lambda_nm - self.lambda_ref_nm;
        Ok(self.coeffs_ps.iter().rev().fold(0.0, |acc, c| acc * x + c))
    }

    /// dt/dλ in ps/nm.
    pub fn slope(&self, lambda_nm: f64) -> Result<f64> {
        self.in_range(lambda_nm)?;
        Ok(self.slope_unchecked(lambda_nm))
    }

    fn slope_unchecked(&self, lambda_nm: f64) -> f64 {
        let x = lambda_nm - self.lambda_ref_nm;
        self.coeffs_ps
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
    }

    /// Invert t(λ) by bisection over the validity range; round-trips with
    /// [`Self::group_delay`] to better than 1e-9 nm.
    pub fn invert_group_delay(&self, t_ps: f64) -> Result<f64> {
        let (lo, hi) = self.valid_range_nm;
        let (t_lo, t_hi) = (self.group_delay(lo)?, self.group_delay(hi)?);
        let (t_min, t_max) = if t_lo <= t_hi {
            (t_lo, t_hi)
        } else {
            (t_hi, t_lo)
        };
        if !(t_ps >= t_min && t_ps <= t_max) {
            return Err(Error::domain(format!(
                "fiber {}: delay {t_ps} ps outside invertible range [{t_min:.1}, {t_max:.1}]",
                self.label
            )));
        }
        let rising = t_hi >= t_lo;
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let tm = self.group_delay(mid)?;
            if (tm <= t_ps) == rising {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-12 {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorChannel {
    pub id: u8,
    pub efficiency: f64,
    pub jitter_fwhm_ps: f64,
    /// Observed background count rate in counts/s (not thinned further).
    pub background_rate_hz: f64,
}

impl DetectorChannel {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.id) {
            return Err(Error::invalid("channel id must be 1..=4"));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::invalid("detector efficiency must be in [0,1]"));
        }
        if !(self.jitter_fwhm_ps >= 0.0) {
            return Err(Error::invalid("jitter must be >= 0"));
        }
        if !(self.background_rate_hz >= 0.0) {
            return Err(Error::invalid("background rate must be >= 0"));
        }
        Ok(())
    }
}

/// Wiring of the four detectors: each beamsplitter output port feeds one
/// fiber whose far end is split 50/50 onto two channels.
#[derive(Debug, Clone)]
pub struct SpectrometerTopology {
    pub fiber_port1: DispersionCurve,
    pub fiber_port2: DispersionCurve,
    pub channels_port1: [DetectorChannel; 2],
    pub channels_port2: [DetectorChannel; 2],
}

impl SpectrometerTopology {
    pub fn validate(&self) -> Result<()> {
        self.fiber_port1.validate()?;
        self.fiber_port2.validate()?;
        let mut ids = Vec::new();
        for ch in self.channels_port1.iter().chain(&self.channels_port2) {
            ch.validate()?;
            ids.push(ch.id);
        }
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != 4 {
            return Err(Error::invalid("topology needs four distinct channels"));
        }
        Ok(())
    }

    pub fn fiber_for_channel(&self, id: u8) -> Result<&DispersionCurve> {
        if self.channels_port1.iter().any(|c| c.id == id) {
            Ok(&self.fiber_port1)
        } else if self.channels_port2.iter().any(|c| c.id == id) {
            Ok(&self.fiber_port2)
        } else {
            Err(Error::invalid(format!("unknown channel {id}")))
        }
    }
}

/// Single-photon spectral resolution: Δλ = jitter / |dt/dλ|.
pub fn singles_resolution(
    ch: &DetectorChannel,
    curve: &DispersionCurve,
    at_lambda_nm: f64,
) -> Result<f64> {
    let slope = curve.slope(at_lambda_nm)?;
    if slope == 0.0 {
        return Err(Error::DegenerateInput("zero dispersion slope".into()));
    }
    Ok(ch.jitter_fwhm_ps / slope.abs())
}

/// Two-channel coincidence resolution, combined in inverse quadrature:
/// r_c = (r1⁻² + r2⁻²)^(−1/2).
///
/// This is the rule that reproduces the measured channel-pair table. Note
/// it is tighter than either single channel — a plain convolution of the
/// two instrument response functions would instead add in quadrature and
/// come out wider, so the combining rule here follows the numbers, not
/// that description.
pub fn coincidence_resolution(r1_nm: f64, r2_nm: f64) -> f64 {
    1.0 / (1.0 / (r1_nm * r1_nm) + 1.0 / (r2_nm * r2_nm)).sqrt()
}

/// Simulated detection event: channel, pump pulse, and arrival offset
/// relative to the pulse trigger. Offsets are kept in integer femtoseconds
/// so the binary tag format round-trips bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeTagRecord {
    pub channel: u8,
    pub pulse_index: u64,
    pub arrival_offset_fs: i64,
}

impl TimeTagRecord {
    pub fn arrival_offset_ps(&self) -> f64 {
        self.arrival_offset_fs as f64 * 1e-3
    }
}

/// Pulsed-source rates for the Monte Carlo.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceRates {
    pub rep_rate_mhz: f64,
    /// Pair probability per pump pulse (single-pair regime, ≪ 1).
    pub pair_prob: f64,
}

impl SourceRates {
    pub fn validate(&self) -> Result<()> {
        if !(self.rep_rate_mhz > 0.0) {
            return Err(Error::invalid("repetition rate must be positive"));
        }
        if !(0.0..=0.5).contains(&self.pair_prob) {
            return Err(Error::invalid(
                "pair probability must be in [0, 0.5] (single-pair regime)",
            ));
        }
        Ok(())
    }

    /// Pulse window 1/rep in ps.
    pub fn window_ps(&self) -> f64 {
        1e6 / self.rep_rate_mhz
    }
}

// fixed draw slots per pulse; jitter slots stay put so changing the jitter
// width never consumes someone else's draw
const SLOT_PAIR: u32 = 0;
const SLOT_BACKGROUND: u32 = 1;
const SLOT_CELL: u32 = 2;
const SLOT_SPLIT_A: u32 = 3;
const SLOT_SPLIT_B: u32 = 4;
const SLOT_SURVIVE_A: u32 = 5;
const SLOT_SURVIVE_B: u32 = 6;
const SLOT_JITTER_A: u32 = 7; // and 8
const SLOT_JITTER_B: u32 = 9; // and 10
const SLOT_POS_A: u32 = 11;
const SLOT_POS_B: u32 = 12;
const SLOT_BG_DETAIL: u32 = 16; // 2 per background event

#[derive(Clone, Copy)]
enum Outcome {
    Coincidence,
    Bunch1,
    Bunch2,
}

/// Cumulative distribution over (outcome, cell) built from the three
/// spectra at the simulated delay. Total mass is 1 by conservation. The
/// spectra are densities: a drawn pair is placed uniformly within its
/// cell, not at the cell center.
struct OutcomeTable {
    cum: Vec<f64>,
    n2: usize,
    nu1_thz: Vec<f64>,
    nu2_thz: Vec<f64>,
    d_nu1: f64,
    d_nu2: f64,
}

impl OutcomeTable {
    fn build(jsa: &JointSpectralAmplitude, delta_t_ps: f64, bs: &BeamsplitterSpec) -> Result<Self> {
        let spectra: [InterferenceSpectrum; 3] = [
            coincidence_spectrum(jsa, delta_t_ps, bs)?,
            bunching_spectrum(jsa, delta_t_ps, bs, 1)?,
            bunching_spectrum(jsa, delta_t_ps, bs, 2)?,
        ];
        let measure = jsa.grid.cell_measure();
        let n1 = jsa.grid.n1();
        let n2 = jsa.grid.n2();
        let mut cum = Vec::with_capacity(3 * n1 * n2);
        let mut acc = 0.0;
        for spec in &spectra {
            for v in spec.inten.iter() {
                acc += v * measure;
                cum.push(acc);
            }
        }
        let total = acc;
        if !(total > 0.0) {
            return Err(Error::DegenerateInput("all spectra are zero".into()));
        }
        // exact unit total for the sampler regardless of quadrature residue
        for v in &mut cum {
            *v /= total;
        }
        Ok(Self {
            cum,
            n2,
            nu1_thz: jsa.grid.nu1().to_vec(),
            nu2_thz: jsa.grid.nu2().to_vec(),
            d_nu1: jsa.grid.d_nu1(),
            d_nu2: jsa.grid.d_nu2(),
        })
    }

    fn draw(&self, u: f64) -> (Outcome, usize, usize) {
        let idx = self
            .cum
            .partition_point(|&c| c <= u)
            .min(self.cum.len() - 1);
        let per = self.cum.len() / 3;
        let outcome = match idx / per {
            0 => Outcome::Coincidence,
            1 => Outcome::Bunch1,
            _ => Outcome::Bunch2,
        };
        let cell = idx % per;
        (outcome, cell / self.n2, cell % self.n2)
    }

    /// Wavelengths of a pair drawn in cell (i, j), dithered uniformly over
    /// the cell with the unit draws `u1`, `u2`.
    fn pair_wavelengths(&self, i: usize, j: usize, u1: f64, u2: f64) -> (f64, f64) {
        let nu1 = self.nu1_thz[i] + (u1 - 0.5) * self.d_nu1;
        let nu2 = self.nu2_thz[j] + (u2 - 0.5) * self.d_nu2;
        (crate::units::C_NM_THZ / nu1, crate::units::C_NM_THZ / nu2)
    }
}

/// Run the detection Monte Carlo and return the ordered tag stream.
#[allow(clippy::too_many_arguments)]
pub fn simulate_timetags(
    jsa: &JointSpectralAmplitude,
    delta_t_ps: f64,
    topo: &SpectrometerTopology,
    bs: &BeamsplitterSpec,
    source: &SourceRates,
    duration_s: f64,
    seed: u64,
) -> Result<Vec<TimeTagRecord>> {
    topo.validate()?;
    source.validate()?;
    if !(duration_s >= 0.0) {
        return Err(Error::invalid("duration must be >= 0"));
    }
    // fail fast if the grid (plus the half-cell dither margin) maps
    // outside a fiber calibration
    for nu in [
        jsa.grid.nu1()[0] - jsa.grid.d_nu1() / 2.0,
        jsa.grid.nu1()[jsa.grid.n1() - 1] + jsa.grid.d_nu1() / 2.0,
    ] {
        let lam = frequency_to_wavelength(nu)?;
        topo.fiber_port1.group_delay(lam)?;
        topo.fiber_port2.group_delay(lam)?;
    }

    let table = OutcomeTable::build(jsa, delta_t_ps, bs)?;
    let window_ps = source.window_ps();
    let n_pulses = (duration_s * source.rep_rate_mhz * 1e6).round() as u64;
    let rng = CounterRng::new(seed);

    let bg_means: [f64; 4] = {
        let mut m = [0.0; 4];
        for (k, ch) in topo
            .channels_port1
            .iter()
            .chain(&topo.channels_port2)
            .enumerate()
        {
            m[k] = ch.background_rate_hz * window_ps * 1e-12;
        }
        m
    };
    let bg_total: f64 = bg_means.iter().sum();

    let mut tags: Vec<TimeTagRecord> = Vec::new();
    let mut pulse_tags: Vec<TimeTagRecord> = Vec::with_capacity(8);

    for pulse in 0..n_pulses {
        let prng = rng.pulse(pulse);
        pulse_tags.clear();

        if prng.uniform(SLOT_PAIR) < source.pair_prob {
            let (outcome, i, j) = table.draw(prng.uniform(SLOT_CELL));
            let (port_a, port_b) = match outcome {
                Outcome::Coincidence => (1u8, 2u8),
                Outcome::Bunch1 => (1, 1),
                Outcome::Bunch2 => (2, 2),
            };
            let (lam_a, lam_b) =
                table.pair_wavelengths(i, j, prng.uniform(SLOT_POS_A), prng.uniform(SLOT_POS_B));

            let mut detected: Vec<(u8, f64)> = Vec::with_capacity(2);
            for (lam, port, s_split, s_surv, s_jit) in [
                (lam_a, port_a, SLOT_SPLIT_A, SLOT_SURVIVE_A, SLOT_JITTER_A),
                (lam_b, port_b, SLOT_SPLIT_B, SLOT_SURVIVE_B, SLOT_JITTER_B),
            ] {
                let (fiber, chans) = if port == 1 {
                    (&topo.fiber_port1, &topo.channels_port1)
                } else {
                    (&topo.fiber_port2, &topo.channels_port2)
                };
                let ch = if prng.uniform(s_split) < 0.5 {
                    &chans[0]
                } else {
                    &chans[1]
                };
                let p_detect = fiber.transmission * ch.efficiency;
                if prng.uniform(s_surv) < p_detect {
                    let sigma = ch.jitter_fwhm_ps / GAUSSIAN_FWHM_PER_SIGMA;
                    let t = fiber.group_delay(lam)? + sigma * prng.gaussian(s_jit);
                    detected.push((ch.id, t));
                }
            }
            // a bunched pair on one detector fires it once, at the earlier
            // arrival (no photon-number resolution)
            if detected.len() == 2 && detected[0].0 == detected[1].0 {
                let t = detected[0].1.min(detected[1].1);
                detected = vec![(detected[0].0, t)];
            }
            for (ch, t) in detected {
                if t >= 0.0 && t < window_ps {
                    pulse_tags.push(TimeTagRecord {
                        channel: ch,
                        pulse_index: pulse,
                        arrival_offset_fs: (t * 1e3).round() as i64,
                    });
                }
            }
        }

        if bg_total > 0.0 {
            let n_bg = prng.poisson(SLOT_BACKGROUND, bg_total);
            for k in 0..n_bg {
                let u = prng.uniform(SLOT_BG_DETAIL + 2 * k) * bg_total;
                let mut pick = 0usize;
                let mut acc = 0.0;
                for (idx, m) in bg_means.iter().enumerate() {
                    acc += m;
                    if u < acc {
                        pick = idx;
                        break;
                    }
                }
                let ch = topo
                    .channels_port1
                    .iter()
                    .chain(&topo.channels_port2)
                    .nth(pick)
                    .unwrap();
                let t = prng.uniform(SLOT_BG_DETAIL + 2 * k + 1) * window_ps;
                pulse_tags.push(TimeTagRecord {
                    channel: ch.id,
                    pulse_index: pulse,
                    arrival_offset_fs: (t * 1e3).round() as i64,
                });
            }
        }

        pulse_tags.sort_by_key(|t| (t.channel, t.arrival_offset_fs));
        tags.extend_from_slice(&pulse_tags);
    }
    Ok(tags)
}

/// 2-D arrival-time histogram of pulse-wise coincidences between two
/// channels.
#[derive(Debug, Clone)]
pub struct CoincidenceHistogram {
    pub channel_pair: (u8, u8),
    /// counts[(bin of first channel, bin of second channel)]
    pub counts: Array2<u64>,
    pub bin_width_ps: f64,
    pub origin_ps: f64,
    /// pulses rejected because a channel fired more than once
    pub dropped_multi_tag_pulses: u64,
    /// coincidences whose time fell outside the histogram span
    pub dropped_out_of_window: u64,
}

impl CoincidenceHistogram {
    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Bin-center time along either axis.
    pub fn bin_center_ps(&self, bin: usize) -> f64 {
        self.origin_ps + (bin as f64 + 0.5) * self.bin_width_ps
    }

    /// Elementwise merge of shard histograms.
    pub fn merge(&mut self, other: &CoincidenceHistogram) -> Result<()> {
        if self.channel_pair != other.channel_pair
            || self.bin_width_ps != other.bin_width_ps
            || self.origin_ps != other.origin_ps
            || self.counts.shape() != other.counts.shape()
        {
            return Err(Error::invalid("histograms are not mergeable"));
        }
        self.counts += &other.counts;
        self.dropped_multi_tag_pulses += other.dropped_multi_tag_pulses;
        self.dropped_out_of_window += other.dropped_out_of_window;
        Ok(())
    }
}

/// Accumulate pulse-wise two-channel coincidences from an ordered tag
/// stream. Pulses carrying more than one tag on either channel of the pair
/// are dropped and counted.
pub fn accumulate_coincidences(
    tags: &[TimeTagRecord],
    pair: (u8, u8),
    bin_width_ps: f64,
    window_ps: f64,
) -> Result<CoincidenceHistogram> {
    if pair.0 == pair.1 || !(1..=4).contains(&pair.0) || !(1..=4).contains(&pair.1) {
        return Err(Error::invalid(format!("bad channel pair {pair:?}")));
    }
    if !(bin_width_ps > 0.0) || !(window_ps > bin_width_ps) {
        return Err(Error::invalid("need 0 < bin width < window"));
    }
    let n_bins = (window_ps / bin_width_ps).ceil() as usize;
    let mut hist = CoincidenceHistogram {
        channel_pair: pair,
        counts: Array2::zeros((n_bins, n_bins)),
        bin_width_ps,
        origin_ps: 0.0,
        dropped_multi_tag_pulses: 0,
        dropped_out_of_window: 0,
    };

    let mut k = 0usize;
    let mut last_pulse: Option<u64> = None;
    while k < tags.len() {
        let pulse = tags[k].pulse_index;
        if let Some(prev) = last_pulse {
            if pulse < prev {
                return Err(Error::invalid("tag stream is not ordered by pulse index"));
            }
        }
        last_pulse = Some(pulse);
        let start = k;
        while k < tags.len() && tags[k].pulse_index == pulse {
            k += 1;
        }
        let group = &tags[start..k];

        let mut t_a: Option<f64> = None;
        let mut t_b: Option<f64> = None;
        let mut multi = false;
        for tag in group {
            if tag.channel == pair.0 {
                multi |= t_a.replace(tag.arrival_offset_ps()).is_some();
            } else if tag.channel == pair.1 {
                multi |= t_b.replace(tag.arrival_offset_ps()).is_some();
            }
        }
        if multi {
            hist.dropped_multi_tag_pulses += 1;
            continue;
        }
        if let (Some(ta), Some(tb)) = (t_a, t_b) {
            let ba = (ta / bin_width_ps).floor();
            let bb = (tb / bin_width_ps).floor();
            if ba >= 0.0 && bb >= 0.0 && (ba as usize) < n_bins && (bb as usize) < n_bins {
                hist.counts[[ba as usize, bb as usize]] += 1;
            } else {
                hist.dropped_out_of_window += 1;
            }
        }
    }
    Ok(hist)
}
