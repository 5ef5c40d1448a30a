//! Time-tag streams on disk.
//!
//! Binary layout (little-endian), bit-exact round-trip:
//!
//! ```text
//! offset 0   8 bytes   magic "HOMTTAG\0"
//! offset 8   4 bytes   format version (u32, currently 1)
//! then per record (17 bytes):
//!            1 byte    channel
//!            8 bytes   pulse index (u64)
//!            8 bytes   arrival offset in femtoseconds (i64)
//! ```
//!
//! A CSV mirror with the same integer fields exists for debugging.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectrometer::TimeTagRecord;

pub const TAG_MAGIC: [u8; 8] = *b"HOMTTAG\0";
pub const TAG_VERSION: u32 = 1;
const RECORD_BYTES: usize = 17;

pub fn write_tags(path: impl AsRef<Path>, tags: &[TimeTagRecord]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(&TAG_MAGIC)?;
    w.write_all(&TAG_VERSION.to_le_bytes())?;
    for t in tags {
        w.write_all(&[t.channel])?;
        w.write_all(&t.pulse_index.to_le_bytes())?;
        w.write_all(&t.arrival_offset_fs.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tags(path: impl AsRef<Path>) -> Result<Vec<TimeTagRecord>> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header = [0u8; 12];
    r.read_exact(&mut header)
        .map_err(|_| Error::Format("tag file shorter than its header".into()))?;
    if header[..8] != TAG_MAGIC {
        return Err(Error::Format("bad tag file magic".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != TAG_VERSION {
        return Err(Error::Format(format!(
            "unsupported tag format version {version}"
        )));
    }
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % RECORD_BYTES != 0 {
        return Err(Error::Format(format!(
            "tag file body length {} is not a whole number of records",
            body.len()
        )));
    }
    let mut tags = Vec::with_capacity(body.len() / RECORD_BYTES);
    for rec in body.chunks_exact(RECORD_BYTES) {
        tags.push(TimeTagRecord {
            channel: rec[0],
            pulse_index: u64::from_le_bytes(rec[1..9].try_into().unwrap()),
            arrival_offset_fs: i64::from_le_bytes(rec[9..17].try_into().unwrap()),
        });
    }
    Ok(tags)
}

pub fn write_tags_csv(path: impl AsRef<Path>, tags: &[TimeTagRecord]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "channel,pulse_index,arrival_offset_fs")?;
    for t in tags {
        writeln!(w, "{},{},{}", t.channel, t.pulse_index, t.arrival_offset_fs)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tags_csv(path: impl AsRef<Path>) -> Result<Vec<TimeTagRecord>> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "channel,pulse_index,arrival_offset_fs" => {}
        _ => return Err(Error::Format("missing tag CSV header".into())),
    }
    let mut tags = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse_err = || Error::Format(format!("tag CSV line {}: bad record", k + 2));
        let channel = parts
            .next()
            .ok_or_else(parse_err)?
            .trim()
            .parse()
            .map_err(|_| parse_err())?;
        let pulse_index = parts
            .next()
            .ok_or_else(parse_err)?
            .trim()
            .parse()
            .map_err(|_| parse_err())?;
        let arrival_offset_fs = parts
            .next()
            .ok_or_else(parse_err)?
            .trim()
            .parse()
            .map_err(|_| parse_err())?;
        if parts.next().is_some() {
            return Err(parse_err());
        }
        tags.push(TimeTagRecord {
            channel,
            pulse_index,
            arrival_offset_fs,
        });
    }
    Ok(tags)
}
