//! Shared on-disk matrix format and scan CSVs.
//!
//! Matrices travel as UTF-8 CSV with `#`-prefixed header lines carrying the
//! grid metadata, then n1 rows × n2 columns of values. Complex matrices use
//! one file with two blocks (`# block: re`, `# block: im`). Values are
//! written with 13 significant digits: round-trips are within 1e-9
//! relative, bit-exactness is not promised.

use ndarray::Array2;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::hom::{HomScan, InterferenceSpectrum, SpectrumKind};
use crate::jsa::{JointSpectralAmplitude, JointSpectralIntensity};

const FORMAT_LINE: &str = "homspec matrix v1";

fn axis_line(name: &str, center: f64, span: f64, n: usize) -> String {
    format!("# {name}: center_thz={center:.12e} span_thz={span:.12e} n={n}")
}

fn write_header(
    w: &mut impl Write,
    grid: &FrequencyGrid,
    kind: &str,
    extra: &BTreeMap<String, String>,
) -> Result<()> {
    writeln!(w, "# {FORMAT_LINE}")?;
    writeln!(w, "# kind: {kind}")?;
    writeln!(
        w,
        "{}",
        axis_line("axis1", grid.center_nu1(), grid.span_nu1(), grid.n1())
    )?;
    writeln!(
        w,
        "{}",
        axis_line("axis2", grid.center_nu2(), grid.span_nu2(), grid.n2())
    )?;
    writeln!(w, "# units: THz")?;
    for (k, v) in extra {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

fn write_block(
    w: &mut impl Write,
    rows: usize,
    cols: usize,
    get: impl Fn(usize, usize) -> f64,
) -> Result<()> {
    for i in 0..rows {
        let mut line = String::with_capacity(cols * 20);
        for j in 0..cols {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:.12e}", get(i, j)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_real_matrix(
    path: impl AsRef<Path>,
    grid: &FrequencyGrid,
    values: &Array2<f64>,
    kind: &str,
    extra: &BTreeMap<String, String>,
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, grid, kind, extra)?;
    write_block(&mut w, grid.n1(), grid.n2(), |i, j| values[[i, j]])?;
    w.flush()?;
    Ok(())
}

pub fn write_complex_matrix(
    path: impl AsRef<Path>,
    grid: &FrequencyGrid,
    values: &Array2<Complex64>,
    kind: &str,
    extra: &BTreeMap<String, String>,
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, grid, kind, extra)?;
    writeln!(w, "# block: re")?;
    write_block(&mut w, grid.n1(), grid.n2(), |i, j| values[[i, j]].re)?;
    writeln!(w, "# block: im")?;
    write_block(&mut w, grid.n1(), grid.n2(), |i, j| values[[i, j]].im)?;
    w.flush()?;
    Ok(())
}

/// Everything a matrix file can carry.
#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub grid: FrequencyGrid,
    pub kind: String,
    pub headers: BTreeMap<String, String>,
    pub blocks: Vec<Array2<f64>>,
}

impl MatrixFile {
    pub fn real(&self) -> Result<&Array2<f64>> {
        if self.blocks.len() != 1 {
            return Err(Error::Format(format!(
                "expected one real block, file has {}",
                self.blocks.len()
            )));
        }
        Ok(&self.blocks[0])
    }

    pub fn complex(&self) -> Result<Array2<Complex64>> {
        if self.blocks.len() != 2 {
            return Err(Error::Format(format!(
                "expected re/im blocks, file has {}",
                self.blocks.len()
            )));
        }
        let (re, im) = (&self.blocks[0], &self.blocks[1]);
        Ok(Array2::from_shape_fn(re.raw_dim(), |(i, j)| {
            Complex64::new(re[[i, j]], im[[i, j]])
        }))
    }
}

fn parse_axis(value: &str, name: &str) -> Result<(f64, f64, usize)> {
    let mut center = None;
    let mut span = None;
    let mut n = None;
    for field in value.split_whitespace() {
        let (key, val) = field
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("{name}: bad field '{field}'")))?;
        match key {
            "center_thz" => center = val.parse::<f64>().ok(),
            "span_thz" => span = val.parse::<f64>().ok(),
            "n" => n = val.parse::<usize>().ok(),
            _ => return Err(Error::Format(format!("{name}: unknown field '{key}'"))),
        }
    }
    match (center, span, n) {
        (Some(c), Some(s), Some(n)) => Ok((c, s, n)),
        _ => Err(Error::Format(format!("{name}: missing center/span/n"))),
    }
}

fn rebuild_axis(center: f64, span: f64, n: usize) -> Vec<f64> {
    let lo = center - span / 2.0;
    let step = span / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<MatrixFile> {
    let r = BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut headers: BTreeMap<String, String> = BTreeMap::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut block_starts: Vec<usize> = Vec::new();
    let mut saw_format = false;

    for line in r.lines() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if comment == FORMAT_LINE {
                saw_format = true;
            } else if let Some((key, value)) = comment.split_once(':') {
                let key = key.trim().to_string();
                let value = value.trim().to_string();
                if key == "block" {
                    block_starts.push(rows.len());
                } else {
                    headers.insert(key, value);
                }
            }
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("bad number '{tok}'")))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if !saw_format {
        return Err(Error::Format("missing matrix format line".into()));
    }
    let (c1, s1, n1) = parse_axis(
        headers
            .get("axis1")
            .ok_or_else(|| Error::Format("missing axis1".into()))?,
        "axis1",
    )?;
    let (c2, s2, n2) = parse_axis(
        headers
            .get("axis2")
            .ok_or_else(|| Error::Format("missing axis2".into()))?,
        "axis2",
    )?;
    let grid = FrequencyGrid::new(rebuild_axis(c1, s1, n1), rebuild_axis(c2, s2, n2))?;
    let kind = headers.get("kind").cloned().unwrap_or_default();

    if block_starts.is_empty() {
        block_starts.push(0);
    }
    let mut blocks = Vec::new();
    let mut bounds = block_starts.clone();
    bounds.push(rows.len());
    for pair in bounds.windows(2) {
        let chunk = &rows[pair[0]..pair[1]];
        if chunk.len() != n1 || chunk.iter().any(|r| r.len() != n2) {
            return Err(Error::Format(format!(
                "block shape mismatch: expected {n1}x{n2}"
            )));
        }
        let mut m = Array2::zeros((n1, n2));
        for (i, row) in chunk.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[[i, j]] = *v;
            }
        }
        blocks.push(m);
    }
    Ok(MatrixFile {
        grid,
        kind,
        headers,
        blocks,
    })
}

pub fn write_jsi(path: impl AsRef<Path>, jsi: &JointSpectralIntensity) -> Result<()> {
    write_real_matrix(path, &jsi.grid, &jsi.inten, "jsi", &BTreeMap::new())
}

pub fn read_jsi(path: impl AsRef<Path>) -> Result<JointSpectralIntensity> {
    let f = read_matrix(path)?;
    JointSpectralIntensity::new(f.grid.clone(), f.real()?.clone())
}

pub fn write_jsa(path: impl AsRef<Path>, jsa: &JointSpectralAmplitude) -> Result<()> {
    write_complex_matrix(path, &jsa.grid, &jsa.amp, "jsa", &BTreeMap::new())
}

pub fn read_jsa(path: impl AsRef<Path>) -> Result<JointSpectralAmplitude> {
    let f = read_matrix(path)?;
    JointSpectralAmplitude::new(f.grid.clone(), f.complex()?)
}

/// Interference spectra carry their delay and channel kind in the header.
pub fn write_spectrum(path: impl AsRef<Path>, spec: &InterferenceSpectrum) -> Result<()> {
    let mut extra = BTreeMap::new();
    extra.insert(
        "delta_t_ps".to_string(),
        format!("{:.12e}", spec.delta_t_ps),
    );
    let kind_tag = match spec.kind {
        SpectrumKind::Coincidence => "coincidence",
        SpectrumKind::BunchPort1 => "bunch_port1",
        SpectrumKind::BunchPort2 => "bunch_port2",
    };
    extra.insert("spectrum_kind".to_string(), kind_tag.to_string());
    write_real_matrix(path, &spec.grid, &spec.inten, "interference", &extra)
}

pub fn write_scan_csv(path: impl AsRef<Path>, scan: &HomScan) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "delay_ps,r_c,r_b1,r_b2,baseline")?;
    for k in 0..scan.delays_ps.len() {
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            scan.delays_ps[k], scan.r_c[k], scan.r_b1[k], scan.r_b2[k], scan.baseline
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scan_csv(path: impl AsRef<Path>) -> Result<HomScan> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "delay_ps,r_c,r_b1,r_b2,baseline" => {}
        _ => return Err(Error::Format("missing scan CSV header".into())),
    }
    let mut scan = HomScan {
        delays_ps: Vec::new(),
        r_c: Vec::new(),
        r_b1: Vec::new(),
        r_b2: Vec::new(),
        baseline: 0.0,
    };
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format("bad scan value".into()))
            })
            .collect::<Result<_>>()?;
        if vals.len() != 5 {
            return Err(Error::Format("scan CSV needs 5 columns".into()));
        }
        scan.delays_ps.push(vals[0]);
        scan.r_c.push(vals[1]);
        scan.r_b1.push(vals[2]);
        scan.r_b2.push(vals[3]);
        scan.baseline = vals[4];
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn tmpdir(tag: &str) -> std::path::PathBuf {
        let d = std::env::temp_dir().join(format!("homspec-mat-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn real_matrix_roundtrip_within_1e9() {
        let dir = tmpdir("real");
        let grid = make_grid(190.9506, 20.0, 17).unwrap();
        let m = Array2::from_shape_fn((17, 17), |(i, j)| {
            1e-4 * ((i * 37 + j) as f64).sin() + 3.0e-7 * i as f64
        });
        let path = dir.join("m.csv");
        write_real_matrix(&path, &grid, &m, "jsi", &BTreeMap::new()).unwrap();
        let f = read_matrix(&path).unwrap();
        assert_eq!(f.kind, "jsi");
        assert_eq!(f.grid.n1(), 17);
        assert!((f.grid.center_nu1() - 190.9506).abs() < 1e-9);
        for (a, b) in m.iter().zip(f.real().unwrap().iter()) {
            let scale = a.abs().max(1e-30);
            assert!((a - b).abs() / scale < 1e-9);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn complex_two_block_roundtrip() {
        let dir = tmpdir("cplx");
        let grid = make_grid(0.0, 2.0, 5).unwrap();
        let m = Array2::from_shape_fn((5, 5), |(i, j)| {
            Complex64::new(i as f64 - 2.0, (j as f64) * 0.25 - 0.5)
        });
        let path = dir.join("c.csv");
        write_complex_matrix(&path, &grid, &m, "jsa", &BTreeMap::new()).unwrap();
        let f = read_matrix(&path).unwrap();
        let back = f.complex().unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn spectrum_headers_survive() {
        let dir = tmpdir("spec");
        let grid = make_grid(190.0, 4.0, 4).unwrap();
        let spec = InterferenceSpectrum {
            grid: grid.clone(),
            inten: Array2::ones((4, 4)),
            delta_t_ps: -1.25,
            kind: SpectrumKind::BunchPort2,
        };
        let path = dir.join("s.csv");
        write_spectrum(&path, &spec).unwrap();
        let f = read_matrix(&path).unwrap();
        assert_eq!(f.kind, "interference");
        assert_eq!(f.headers.get("spectrum_kind").unwrap(), "bunch_port2");
        let dt: f64 = f.headers.get("delta_t_ps").unwrap().parse().unwrap();
        assert!((dt + 1.25).abs() < 1e-12);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn scan_csv_roundtrip() {
        let dir = tmpdir("scan");
        let scan = HomScan {
            delays_ps: vec![-1.0, 0.0, 1.0],
            r_c: vec![0.5, 0.01, 0.5],
            r_b1: vec![0.25, 0.49, 0.25],
            r_b2: vec![0.25, 0.5, 0.25],
            baseline: 0.5,
        };
        let path = dir.join("scan.csv");
        write_scan_csv(&path, &scan).unwrap();
        let back = read_scan_csv(&path).unwrap();
        assert_eq!(back.delays_ps.len(), 3);
        assert!((back.baseline - 0.5).abs() < 1e-12);
        assert!((back.r_c[1] - 0.01).abs() < 1e-12);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn malformed_files_rejected() {
        let dir = tmpdir("bad");
        let path = dir.join("bad.csv");
        std::fs::write(&path, "1,2,3\n4,5,6\n").unwrap();
        assert!(read_matrix(&path).is_err());
        std::fs::write(
            &path,
            "# homspec matrix v1\n# kind: jsi\n# axis1: center_thz=1 span_thz=1 n=2\n# axis2: center_thz=1 span_thz=1 n=2\n1,2\n",
        )
        .unwrap();
        assert!(read_matrix(&path).is_err(), "row count mismatch must fail");
        std::fs::remove_dir_all(&dir).ok();
    }
}
