//! `homspec` — build joint spectra of a pulsed SPDC source, evaluate
//! frequency-resolved HOM interference, run the fiber-spectrometer Monte
//! Carlo, and invert recorded arrival times back to spectra.
//!
//! Every command is deterministic given (config, seed). Outputs are CSV
//! matrices/tables plus the binary time-tag format; nothing is plotted
//! here, the tables are plot-ready.

// validations are written `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use homspec_core::analysis::{reconstruct_jsi, scan_from_histograms, DelayHistograms};
use homspec_core::error::Error;
use homspec_core::fwhm::fwhm;
use homspec_core::hom::{scan_hom, visibility, visibility_vs_bandwidth, FilterSpec, HomScan};
use homspec_core::jsa::{intensity_of, magnitude_jsa_from_jsi, marginal, JointSpectralAmplitude};
use homspec_core::matrix_io;
use homspec_core::schmidt::schmidt_decompose;
use homspec_core::source::{build_jsa, marginal_fwhm_nm, CollectionSpec, TiltedPort};
use homspec_core::spectrometer::{accumulate_coincidences, simulate_timetags};
use homspec_core::tags;
use homspec_core::units::{bandwidth_thz_to_nm, frequency_to_wavelength};

use config::{Resolved, RunConfig};

#[derive(Parser)]
#[command(
    name = "homspec",
    version,
    about = "spectrally resolved HOM interference toolkit"
)]
struct Cli {
    /// Run configuration (TOML)
    #[arg(long, global = true, default_value = "homspec.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint-spectral-amplitude operations
    Jsa {
        #[command(subcommand)]
        cmd: JsaCmd,
    },
    /// Hong-Ou-Mandel interference operations
    Hom {
        #[command(subcommand)]
        cmd: HomCmd,
    },
    /// Fiber-spectrometer Monte Carlo
    Spectrometer {
        #[command(subcommand)]
        cmd: SpectrometerCmd,
    },
    /// Invert a recorded tag stream into a joint spectral intensity
    Reconstruct(ReconstructArgs),
    /// Analysis over scans, tag sets, or the analytic model
    Analyze {
        #[command(subcommand)]
        cmd: AnalyzeCmd,
    },
}

#[derive(Subcommand)]
enum JsaCmd {
    /// Build the source JSA/JSI and a summary (Schmidt number, marginals)
    Build(JsaBuildArgs),
}

#[derive(Args)]
struct JsaBuildArgs {
    /// Override the collection bias detuning (THz, signal up / idler down)
    #[arg(long)]
    bias: Option<f64>,
}

#[derive(Subcommand)]
enum HomCmd {
    /// Scan the dip: per-delay integrated rates plus per-delay spectra
    Scan(HomScanArgs),
}

#[derive(Args)]
struct HomScanArgs {
    /// Use the real-|JSA| form (the maximum-visibility bound)
    #[arg(long)]
    real: bool,
    /// Apply a centered top-hat filter of this width (THz)
    #[arg(long)]
    filter: Option<f64>,
    /// Skip writing per-delay spectrum matrices
    #[arg(long)]
    no_spectra: bool,
    /// Write spectra for every delay instead of five snapshots
    #[arg(long)]
    all_spectra: bool,
}

#[derive(Subcommand)]
enum SpectrometerCmd {
    /// Generate a time-tag stream through the detection Monte Carlo
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// HOM delay for the run (ps)
    #[arg(long, default_value_t = 0.0)]
    delta_t: f64,
    /// Simulate every configured scan delay into one tag file per delay
    #[arg(long)]
    scan_delays: bool,
    /// Wall-clock acquisition time to simulate (s)
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the debug CSV mirror
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Binary tag file to invert
    #[arg(long)]
    tags: PathBuf,
    /// Channel pair, e.g. 1,3
    #[arg(long, value_parser = parse_pair, default_value = "1,3")]
    pair: (u8, u8),
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Visibility vs virtual filter bandwidth
    Visibility(VisibilityArgs),
}

#[derive(Args)]
struct VisibilityArgs {
    /// Filter widths in THz (comma separated; default from config)
    #[arg(long, value_delimiter = ',')]
    widths: Vec<f64>,
    /// Compute the visibility of an existing scan CSV instead
    #[arg(long)]
    scan: Option<PathBuf>,
    /// Reconstruct from simulated per-delay tag files (directory with
    /// an index.csv as written by `spectrometer simulate --scan-delays`)
    #[arg(long)]
    tags_dir: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(u8, u8), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected two comma-separated channels, e.g. 1,3".into());
    }
    let a = parts[0].trim().parse().map_err(|_| "bad channel number")?;
    let b = parts[1].trim().parse().map_err(|_| "bad channel number")?;
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command, cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(4),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn run(cmd: Command, cfg: Resolved) -> Result<(), Error> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    match cmd {
        Command::Jsa {
            cmd: JsaCmd::Build(args),
        } => jsa_build(&cfg, &args),
        Command::Hom {
            cmd: HomCmd::Scan(args),
        } => hom_scan_cmd(&cfg, &args),
        Command::Spectrometer {
            cmd: SpectrometerCmd::Simulate(args),
        } => simulate_cmd(&cfg, &args),
        Command::Reconstruct(args) => reconstruct_cmd(&cfg, &args),
        Command::Analyze {
            cmd: AnalyzeCmd::Visibility(args),
        } => visibility_cmd(&cfg, &args),
    }
}

/// Source JSA with an optional bias override from the command line.
fn source_jsa(cfg: &Resolved, bias_override: Option<f64>) -> Result<JointSpectralAmplitude, Error> {
    let mut collection = cfg.collection.clone();
    if let Some(bias) = bias_override {
        collection = Some(match collection {
            Some(mut c) => {
                c.bias_detuning_thz = bias;
                c
            }
            None => CollectionSpec {
                theta_deg: 0.0,
                waist_w0_um: 300.0,
                tilted_port: TiltedPort::Port2,
                bias_detuning_thz: bias,
            },
        });
    }
    build_jsa(&cfg.pump, &cfg.crystal, &cfg.grid, collection.as_ref())
}

fn jsa_build(cfg: &Resolved, args: &JsaBuildArgs) -> Result<(), Error> {
    let jsa = source_jsa(cfg, args.bias)?;
    let jsi = intensity_of(&jsa);

    matrix_io::write_jsa(cfg.output_dir.join("jsa.csv"), &jsa)?;
    matrix_io::write_jsi(cfg.output_dir.join("jsi.csv"), &jsi)?;

    let schmidt_full = schmidt_decompose(&jsa)?;
    let schmidt_mag = schmidt_decompose(&magnitude_jsa_from_jsi(&jsi))?;

    let center_lambda = frequency_to_wavelength(cfg.grid.center_nu1())?;
    let mut lines = Vec::new();
    for axis in [1u8, 2] {
        let (nu, m) = marginal(&jsi, axis)?;
        let w_thz = fwhm(&nu, &m)?;
        let w_nm = bandwidth_thz_to_nm(w_thz, center_lambda)?;
        lines.push(format!("marginal{axis}_fwhm_thz: {w_thz:.6}"));
        lines.push(format!("marginal{axis}_fwhm_nm: {w_nm:.6}"));
    }
    let summary = format!(
        "schmidt_number: {:.6}\nschmidt_number_magnitude_jsa: {:.6}\npurity: {:.6}\n{}\ncrystal_length_mm: {:.6}\npoling_period_um: {:.4}\ngrid_center_thz: {:.6}\ngrid_span_thz: {:.4}\ngrid_n: {}\n",
        schmidt_full.schmidt_number,
        schmidt_mag.schmidt_number,
        schmidt_full.purity,
        lines.join("\n"),
        cfg.crystal.length_mm,
        cfg.crystal.poling_period_um,
        cfg.grid.center_nu1(),
        cfg.grid.span_nu1(),
        cfg.grid.n1(),
    );
    std::fs::write(cfg.output_dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    // marginal sanity against the calibrated source bandwidth
    let w = marginal_fwhm_nm(&cfg.pump, &cfg.crystal, &cfg.grid, cfg.collection.as_ref())?;
    println!("signal_marginal_check_nm: {w:.4}");
    Ok(())
}

fn hom_scan_cmd(cfg: &Resolved, args: &HomScanArgs) -> Result<(), Error> {
    let jsa = source_jsa(cfg, None)?;
    let jsa = if args.real {
        magnitude_jsa_from_jsi(&intensity_of(&jsa))
    } else {
        jsa
    };
    let filter = args.filter.map(|w| FilterSpec::Tophat {
        center_nu_thz: cfg.grid.center_nu1(),
        full_width_thz: w,
    });
    let scan = scan_hom(&jsa, &cfg.delays_ps, &cfg.beamsplitter, filter.as_ref())?;
    matrix_io::write_scan_csv(cfg.output_dir.join("hom_scan.csv"), &scan)?;

    if !args.no_spectra {
        let dir = cfg.output_dir.join("spectra");
        std::fs::create_dir_all(&dir)?;
        // default: snapshot spectra across the dip, like the usual
        // five-panel presentation; --all-spectra for the full set
        let snapshots: Vec<f64> = if args.all_spectra || cfg.delays_ps.len() <= 5 {
            cfg.delays_ps.clone()
        } else {
            let n = cfg.delays_ps.len();
            let mut idx = vec![0, n / 4, n / 2, 3 * n / 4, n - 1];
            idx.dedup();
            idx.into_iter().map(|k| cfg.delays_ps[k]).collect()
        };
        for &dt in &snapshots {
            let specs = [
                homspec_core::hom::coincidence_spectrum(&jsa, dt, &cfg.beamsplitter)?,
                homspec_core::hom::bunching_spectrum(&jsa, dt, &cfg.beamsplitter, 1)?,
                homspec_core::hom::bunching_spectrum(&jsa, dt, &cfg.beamsplitter, 2)?,
            ];
            for spec in &specs {
                let kind = match spec.kind {
                    homspec_core::hom::SpectrumKind::Coincidence => "coincidence",
                    homspec_core::hom::SpectrumKind::BunchPort1 => "bunch1",
                    homspec_core::hom::SpectrumKind::BunchPort2 => "bunch2",
                };
                matrix_io::write_spectrum(dir.join(format!("delay_{dt:+.3}ps_{kind}.csv")), spec)?;
            }
        }
    }

    let v = visibility(&scan)?;
    println!("visibility: {v:.6}");
    println!("baseline: {:.6e}", scan.baseline);
    Ok(())
}

fn simulate_cmd(cfg: &Resolved, args: &SimulateArgs) -> Result<(), Error> {
    let jsa = source_jsa(cfg, None)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let delays: Vec<f64> = if args.scan_delays {
        cfg.delays_ps.clone()
    } else {
        vec![args.delta_t]
    };

    let mut index = String::from("delay_ps,file\n");
    let mut status = Vec::with_capacity(delays.len());
    for (k, &dt) in delays.iter().enumerate() {
        // decorrelate per-delay streams while staying reproducible
        let run_seed = seed.wrapping_add(k as u64);
        let stream = simulate_timetags(
            &jsa,
            dt,
            &cfg.topology,
            &cfg.beamsplitter,
            &cfg.rates,
            args.duration,
            run_seed,
        )?;
        let name = if args.scan_delays {
            format!("tags_{k:03}.bin")
        } else {
            "tags.bin".to_string()
        };
        tags::write_tags(cfg.output_dir.join(&name), &stream)?;
        if args.csv {
            tags::write_tags_csv(cfg.output_dir.join(format!("{name}.csv")), &stream)?;
        }
        index.push_str(&format!("{dt:.6},{name}\n"));
        let mut per_channel = [0usize; 4];
        for t in &stream {
            per_channel[(t.channel - 1) as usize] += 1;
        }
        status.push(format!(
            "delta_t {dt:+.3} ps -> {name}: {} tags (ch1 {} ch2 {} ch3 {} ch4 {})",
            stream.len(),
            per_channel[0],
            per_channel[1],
            per_channel[2],
            per_channel[3]
        ));
    }
    if args.scan_delays {
        std::fs::write(cfg.output_dir.join("index.csv"), index)?;
    }
    // status only after every artifact is on disk
    for line in status {
        println!("{line}");
    }
    Ok(())
}

fn reconstruct_cmd(cfg: &Resolved, args: &ReconstructArgs) -> Result<(), Error> {
    let stream = tags::read_tags(&args.tags)?;
    let hist =
        accumulate_coincidences(&stream, args.pair, cfg.bin_width_ps, cfg.rates.window_ps())?;
    let rec = reconstruct_jsi(&hist, &cfg.calibration, &cfg.grid)?;

    matrix_io::write_jsi(cfg.output_dir.join("reconstructed_jsi.csv"), &rec.jsi)?;
    // log-scale export for lobe inspection
    let peak = rec.jsi.inten.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        let log10 = rec.jsi.inten.mapv(|v| (v / peak).max(1e-12).log10());
        matrix_io::write_real_matrix(
            cfg.output_dir.join("reconstructed_jsi_log10.csv"),
            &rec.jsi.grid,
            &log10,
            "jsi_log10",
            &BTreeMap::new(),
        )?;
    }
    let diag = format!(
        "histogram_counts: {}\ndeposited_counts: {:.3}\nout_of_range_counts: {:.3}\ndropped_multi_tag_pulses: {}\ndropped_out_of_window: {}\n",
        rec.total_counts,
        rec.deposited_counts.sum(),
        rec.out_of_range_counts,
        hist.dropped_multi_tag_pulses,
        hist.dropped_out_of_window,
    );
    std::fs::write(cfg.output_dir.join("reconstruct_diagnostics.txt"), &diag)?;
    print!("{diag}");
    Ok(())
}

fn visibility_cmd(cfg: &Resolved, args: &VisibilityArgs) -> Result<(), Error> {
    let out = cfg.output_dir.join("visibility_vs_bandwidth.csv");

    if let Some(scan_path) = &args.scan {
        let scan = matrix_io::read_scan_csv(scan_path)?;
        let v = visibility(&scan)?;
        std::fs::write(&out, format!("width_thz,visibility\ninf,{v:.9}\n"))?;
        println!("visibility: {v:.6}");
        return Ok(());
    }

    let widths = if args.widths.is_empty() {
        cfg.filter_widths_thz.clone()
    } else {
        args.widths.clone()
    };
    if widths.is_empty() {
        return Err(Error::invalid(
            "no filter widths: set filters.widths_thz or --widths",
        ));
    }

    let rows: Vec<(f64, f64)> = if let Some(dir) = &args.tags_dir {
        visibility_from_tags(cfg, dir, &widths)?
    } else {
        let jsa = source_jsa(cfg, None)?;
        visibility_vs_bandwidth(&jsa, &cfg.delays_ps, &widths, &cfg.beamsplitter)?
    };

    let mut body = String::from("width_thz,visibility\n");
    for (w, v) in &rows {
        body.push_str(&format!("{w:.6},{v:.9}\n"));
    }
    std::fs::write(&out, body)?;
    for (w, v) in &rows {
        println!("{w:>8.3} THz  V = {v:.4}");
    }
    Ok(())
}

/// Rebuild per-delay histograms from simulated tag files and compute the
/// reconstructed visibility for every filter width.
fn visibility_from_tags(
    cfg: &Resolved,
    dir: &Path,
    widths: &[f64],
) -> Result<Vec<(f64, f64)>, Error> {
    let index = std::fs::read_to_string(dir.join("index.csv"))?;
    let window = cfg.rates.window_ps();
    let mut sets = Vec::new();
    for line in index.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (delay, file) = line
            .split_once(',')
            .ok_or_else(|| Error::Format("bad index.csv line".into()))?;
        let delay: f64 = delay
            .trim()
            .parse()
            .map_err(|_| Error::Format("bad delay in index.csv".into()))?;
        let stream = tags::read_tags(dir.join(file.trim()))?;
        let cross = [(1, 3), (1, 4), (2, 3), (2, 4)]
            .iter()
            .map(|&p| accumulate_coincidences(&stream, p, cfg.bin_width_ps, window))
            .collect::<Result<Vec<_>, _>>()?;
        let b1 = accumulate_coincidences(&stream, (1, 2), cfg.bin_width_ps, window)?;
        let b2 = accumulate_coincidences(&stream, (3, 4), cfg.bin_width_ps, window)?;
        sets.push(DelayHistograms {
            delay_ps: delay,
            coincidence: cross,
            bunch1: vec![b1],
            bunch2: vec![b2],
        });
    }
    let mut rows = Vec::with_capacity(widths.len());
    for &w in widths {
        let filter = FilterSpec::Tophat {
            center_nu_thz: cfg.grid.center_nu1(),
            full_width_thz: w,
        };
        let scan: HomScan = scan_from_histograms(
            &sets,
            &cfg.calibration,
            Some(&filter),
            &cfg.grid,
            cfg.wings_threshold_ps,
        )?;
        rows.push((w, visibility(&scan)?));
    }
    Ok(rows)
}
