//! Run configuration: one TOML file wiring the source, grid, beamsplitter,
//! spectrometer topology, rates, scan and filters together. Unknown keys
//! are rejected everywhere. File paths are resolved relative to the config
//! file location; the output directory can be overridden with the
//! `HOMSPEC_OUT` environment variable.

use serde::Deserialize;
use std::path::{Path, PathBuf};

use homspec_core::analysis::CalibrationSet;
use homspec_core::error::{Error, Result};
use homspec_core::grid::{make_grid, FrequencyGrid};
use homspec_core::hom::BeamsplitterSpec;
use homspec_core::sellmeier::SellmeierFile;
use homspec_core::source::{CollectionSpec, CrystalSpec, PumpSpec};
use homspec_core::spectrometer::{DetectorChannel, SourceRates, SpectrometerTopology};
use homspec_core::units::wavelength_to_frequency;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: GridConfig,
    pub pump: PumpSpec,
    pub crystal: CrystalConfig,
    #[serde(default)]
    pub collection: Option<CollectionSpec>,
    #[serde(default)]
    pub beamsplitter: Option<BeamsplitterSpec>,
    pub rates: SourceRates,
    pub scan: ScanConfig,
    #[serde(default)]
    pub filters: FiltersConfig,
    pub topology: TopologyConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub center_nu_thz: Option<f64>,
    #[serde(default)]
    pub center_lambda_nm: Option<f64>,
    pub span_thz: f64,
    pub n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    pub length_mm: f64,
    pub poling_period_um: f64,
    pub sellmeier_file: PathBuf,
    pub pump_axis: String,
    pub signal_axis: String,
    pub idler_axis: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default)]
    pub delays_ps: Option<Vec<f64>>,
    #[serde(default)]
    pub start_ps: Option<f64>,
    #[serde(default)]
    pub stop_ps: Option<f64>,
    #[serde(default)]
    pub step_ps: Option<f64>,
    /// extra points (dip wings for the baseline) merged into the ramp
    #[serde(default)]
    pub extra_ps: Vec<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FiltersConfig {
    #[serde(default)]
    pub widths_thz: Vec<f64>,
    /// |δt| beyond this counts as baseline wing for measured scans
    #[serde(default = "default_wings")]
    pub wings_threshold_ps: f64,
}

fn default_wings() -> f64 {
    3.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub calibration_file: PathBuf,
    pub port1_channels: [u8; 2],
    pub port2_channels: [u8; 2],
    pub bin_width_ps: f64,
    pub channel: Vec<DetectorChannel>,
}

/// Fully resolved configuration ready to drive the pipeline.
pub struct Resolved {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: FrequencyGrid,
    pub pump: PumpSpec,
    pub crystal: CrystalSpec,
    pub collection: Option<CollectionSpec>,
    pub beamsplitter: BeamsplitterSpec,
    pub rates: SourceRates,
    pub delays_ps: Vec<f64>,
    pub filter_widths_thz: Vec<f64>,
    pub wings_threshold_ps: f64,
    pub topology: SpectrometerTopology,
    pub calibration: CalibrationSet,
    pub bin_width_ps: f64,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Resolved> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {path:?}: {e}")))?;
        let raw: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("config {path:?}: {e}")))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        raw.resolve(base)
    }

    fn resolve(self, base: &Path) -> Result<Resolved> {
        let center = match (self.grid.center_nu_thz, self.grid.center_lambda_nm) {
            (Some(nu), None) => nu,
            (None, Some(lambda)) => wavelength_to_frequency(lambda)?,
            _ => {
                return Err(Error::invalid(
                    "grid: set exactly one of center_nu_thz / center_lambda_nm",
                ))
            }
        };
        let grid = make_grid(center, self.grid.span_thz, self.grid.n)?;

        self.pump.validate()?;

        let sellmeier_path = base.join(&self.crystal.sellmeier_file);
        let sellmeier = SellmeierFile::load(&sellmeier_path)?;
        let crystal = CrystalSpec {
            length_mm: self.crystal.length_mm,
            poling_period_um: self.crystal.poling_period_um,
            sellmeier_pump: sellmeier.axis(&self.crystal.pump_axis)?.clone(),
            sellmeier_signal: sellmeier.axis(&self.crystal.signal_axis)?.clone(),
            sellmeier_idler: sellmeier.axis(&self.crystal.idler_axis)?.clone(),
        };
        crystal.validate()?;
        if let Some(c) = &self.collection {
            c.validate()?;
        }

        let beamsplitter = self.beamsplitter.unwrap_or_default();
        beamsplitter.validate()?;
        self.rates.validate()?;

        let delays_ps = self.scan.delays(&grid)?;
        if !self.filters.widths_thz.is_empty() {
            let w = &self.filters.widths_thz;
            if w.iter().any(|v| !(*v > 0.0)) || w.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::invalid(
                    "filters.widths_thz must be positive and ascending",
                ));
            }
        }

        let calibration = CalibrationSet::load(base.join(&self.topology.calibration_file))?;
        let topology = self.topology.build(&calibration)?;
        if !(self.topology.bin_width_ps > 0.0) {
            return Err(Error::invalid("topology.bin_width_ps must be positive"));
        }

        Ok(Resolved {
            seed: self.seed,
            output_dir: match std::env::var_os("HOMSPEC_OUT") {
                Some(dir) => PathBuf::from(dir),
                None => base.join(&self.output_dir),
            },
            grid,
            pump: self.pump,
            crystal,
            collection: self.collection,
            beamsplitter,
            rates: self.rates,
            delays_ps,
            filter_widths_thz: self.filters.widths_thz,
            wings_threshold_ps: self.filters.wings_threshold_ps,
            topology,
            calibration,
            bin_width_ps: self.topology.bin_width_ps,
        })
    }
}

impl ScanConfig {
    fn delays(&self, _grid: &FrequencyGrid) -> Result<Vec<f64>> {
        let mut delays = match (&self.delays_ps, self.start_ps, self.stop_ps, self.step_ps) {
            (Some(list), None, None, None) => list.clone(),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0) || stop < start {
                    return Err(Error::invalid("scan: need step > 0 and stop >= start"));
                }
                let count = ((stop - start) / step).round() as usize;
                (0..=count).map(|k| start + k as f64 * step).collect()
            }
            _ => {
                return Err(Error::invalid(
                    "scan: set either delays_ps or all of start_ps/stop_ps/step_ps",
                ))
            }
        };
        delays.extend_from_slice(&self.extra_ps);
        delays.sort_by(f64::total_cmp);
        delays.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        if delays.is_empty() {
            return Err(Error::invalid("scan produced no delay points"));
        }
        Ok(delays)
    }
}

impl TopologyConfig {
    fn build(&self, cal: &CalibrationSet) -> Result<SpectrometerTopology> {
        if self.channel.len() != 4 {
            return Err(Error::invalid(format!(
                "topology needs exactly 4 channel blocks, got {}",
                self.channel.len()
            )));
        }
        let find = |id: u8| -> Result<DetectorChannel> {
            self.channel
                .iter()
                .find(|c| c.id == id)
                .copied()
                .ok_or_else(|| Error::invalid(format!("channel {id} referenced but not defined")))
        };
        // channels of one port must ride the same fiber: same calibration
        // curve label
        let fiber_of = |ids: [u8; 2], port: u8| -> Result<_> {
            let a = cal.channel(ids[0])?;
            let b = cal.channel(ids[1])?;
            if a.curve.label != b.curve.label {
                return Err(Error::invalid(format!(
                    "port {port} channels {ids:?} map to different fibers ('{}' vs '{}')",
                    a.curve.label, b.curve.label
                )));
            }
            Ok(a.curve.clone())
        };
        let topo = SpectrometerTopology {
            fiber_port1: fiber_of(self.port1_channels, 1)?,
            fiber_port2: fiber_of(self.port2_channels, 2)?,
            channels_port1: [find(self.port1_channels[0])?, find(self.port1_channels[1])?],
            channels_port2: [find(self.port2_channels[0])?, find(self.port2_channels[1])?],
        };
        topo.validate()?;
        Ok(topo)
    }
}
