//! Per-station binary signal files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                                   |
//! |-------:|-----:|-----------------------------------------|
//! | 0      | 4    | magic `EVPM`                            |
//! | 4      | 2    | format version (1)                      |
//! | 6      | 2    | channel count                           |
//! | 8      | 8    | sample rate, Hz (f64)                   |
//! | 16     | 8    | start time, s (f64)                     |
//! | 24     | 8    | samples per channel (u64)               |
//! | 32     | 8    | channel-kind codes, unused slots `0xFF` |
//! | 40     | 16   | station id, ASCII, zero padded          |
//! | 56     | 8    | reserved, zero                          |
//!
//! The header is followed by each channel in turn as `f32` samples. A
//! `.txt` sidecar next to the file repeats the header in readable form.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{ChannelKind, SignalRecord, MAX_STATION_ID_LEN};

pub const MAGIC: [u8; 4] = *b"EVPM";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 64;
pub const MAX_CHANNELS: usize = 8;
pub const EXTENSION: &str = "evpm";

/// Decoded header fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub sample_count: u64,
    pub channels: Vec<ChannelKind>,
    pub station_id: String,
}

impl Header {
    pub fn of(record: &SignalRecord) -> Self {
        Header {
            sample_rate_hz: record.sample_rate_hz(),
            start_time_s: record.start_time_s(),
            sample_count: record.len() as u64,
            channels: record.channels().keys().copied().collect(),
            station_id: record.station_id().to_string(),
        }
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(&MAGIC);
        h[4..6].copy_from_slice(&VERSION.to_le_bytes());
        h[6..8].copy_from_slice(&(self.channels.len() as u16).to_le_bytes());
        h[8..16].copy_from_slice(&self.sample_rate_hz.to_le_bytes());
        h[16..24].copy_from_slice(&self.start_time_s.to_le_bytes());
        h[24..32].copy_from_slice(&self.sample_count.to_le_bytes());
        h[32..40].fill(0xFF);
        for (i, c) in self.channels.iter().enumerate() {
            h[32 + i] = c.code();
        }
        let id = self.station_id.as_bytes();
        h[40..40 + id.len()].copy_from_slice(id);
        h
    }

    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |msg: String| Error::Format {
            path: path.to_path_buf(),
            msg,
        };
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("file is {} bytes, shorter than the header", bytes.len())));
        }
        if bytes[0..4] != MAGIC {
            return Err(bad("bad magic; not a signal file".into()));
        }
        let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let version = u16_at(4);
        if version != VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let count = u16_at(6) as usize;
        if count == 0 || count > MAX_CHANNELS {
            return Err(bad(format!("channel count {count} outside 1..={MAX_CHANNELS}")));
        }
        let mut channels = Vec::with_capacity(count);
        for (i, &code) in bytes[32..40].iter().enumerate() {
            if i < count {
                let kind = ChannelKind::from_code(code)
                    .ok_or_else(|| bad(format!("unknown channel code {code} in slot {i}")))?;
                if channels.contains(&kind) {
                    return Err(bad(format!("channel {} listed twice", kind.as_str())));
                }
                channels.push(kind);
            } else if code != 0xFF {
                return Err(bad(format!("unused channel slot {i} holds {code}, expected 0xFF")));
            }
        }
        let id_field = &bytes[40..40 + MAX_STATION_ID_LEN];
        let id_len = id_field.iter().position(|&b| b == 0).unwrap_or(MAX_STATION_ID_LEN);
        let station_id = std::str::from_utf8(&id_field[..id_len])
            .map_err(|_| bad("station id is not ASCII".into()))?
            .to_string();
        Ok(Header {
            sample_rate_hz: f64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")),
            start_time_s: f64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")),
            sample_count: u64_at(24),
            channels,
            station_id,
        })
    }

    /// Readable copy of the header for the sidecar.
    pub fn sidecar_text(&self) -> String {
        let channels: Vec<_> = self.channels.iter().map(|c| c.as_str()).collect();
        let codes: Vec<_> = self.channels.iter().map(|c| c.code().to_string()).collect();
        format!(
            "magic = EVPM\nversion = {VERSION}\nstation_id = {}\nsample_rate_hz = {}\nstart_time_s = {}\n\
             sample_count = {}\nchannel_count = {}\nchannel_codes = {}\nchannels = {}\nsample_format = f32le, channel-major\n",
            self.station_id,
            self.sample_rate_hz,
            self.start_time_s,
            self.sample_count,
            self.channels.len(),
            codes.join(","),
            channels.join(","),
        )
    }
}

pub fn encode(record: &SignalRecord) -> Vec<u8> {
    let header = Header::of(record);
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * record.len() * header.channels.len());
    out.extend_from_slice(&header.encode());
    for samples in record.channels().values() {
        for v in samples {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<SignalRecord> {
    let header = Header::decode(bytes, path)?;
    let n = usize::try_from(header.sample_count).map_err(|_| Error::Format {
        path: path.to_path_buf(),
        msg: "sample count does not fit in memory".into(),
    })?;
    let expected = n
        .checked_mul(4 * header.channels.len())
        .and_then(|b| b.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: format!(
                "{} bytes on disk, header implies {}",
                bytes.len(),
                expected.map_or_else(|| "overflow".to_string(), |e| e.to_string())
            ),
        });
    }
    let mut channels = BTreeMap::new();
    for (i, kind) in header.channels.iter().enumerate() {
        let start = HEADER_LEN + 4 * n * i;
        let samples = bytes[start..start + 4 * n]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        channels.insert(*kind, samples);
    }
    SignalRecord::new(header.station_id, header.sample_rate_hz, header.start_time_s, channels).map_err(|e| {
        Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        }
    })
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("txt")
}

/// Writes `record` and its sidecar.
pub fn write(path: &Path, record: &SignalRecord) -> Result<()> {
    std::fs::write(path, encode(record)).map_err(|e| Error::io(path, e))?;
    let sidecar = sidecar_path(path);
    std::fs::write(&sidecar, Header::of(record).sidecar_text()).map_err(|e| Error::io(&sidecar, e))
}

pub fn read(path: &Path) -> Result<SignalRecord> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

/// Signal files in `dir`, sorted by name.
pub fn list(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == EXTENSION) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> SignalRecord {
        let mut ch = BTreeMap::new();
        ch.insert(ChannelKind::StaticPressure, vec![4.0f32, 4.1, 3.9]);
        ch.insert(ChannelKind::DynamicPressure, vec![0.5f32, -0.25, f32::MIN_POSITIVE]);
        SignalRecord::new("D", 8192.0, 1.5, ch).unwrap()
    }

    #[test]
    fn header_bytes_are_fixed() {
        let bytes = encode(&record());
        assert_eq!(bytes.len(), 64 + 2 * 3 * 4);
        assert_eq!(&bytes[0..4], b"EVPM");
        assert_eq!(&bytes[4..8], &[1, 0, 2, 0]);
        assert_eq!(&bytes[8..16], &8192.0f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &3u64.to_le_bytes());
        assert_eq!(&bytes[32..40], &[1, 2, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF]);
        assert_eq!(bytes[40], b'D');
        assert!(bytes[41..64].iter().all(|&b| b == 0));
        assert_eq!(&bytes[64..68], &4.0f32.to_le_bytes());
        assert_eq!(&bytes[76..80], &0.5f32.to_le_bytes());
    }

    #[test]
    fn decode_inverts_encode() {
        let r = record();
        assert_eq!(decode(&encode(&r), Path::new("d.evpm")).unwrap(), r);
    }

    #[test]
    fn rejects_corruption() {
        let p = Path::new("d.evpm");
        let good = encode(&record());
        let mut b = good.clone();
        b[0] = b'X';
        assert!(matches!(decode(&b, p), Err(Error::Format { .. })));
        let mut b = good.clone();
        b[4] = 2;
        assert!(decode(&b, p).is_err());
        let mut b = good.clone();
        b[33] = 9;
        assert!(decode(&b, p).is_err());
        let mut b = good.clone();
        b[33] = 1;
        assert!(decode(&b, p).is_err());
        assert!(decode(&good[..good.len() - 1], p).is_err());
        assert!(decode(&good[..40], p).is_err());
        let mut b = good;
        b[8..16].copy_from_slice(&4000.0f64.to_le_bytes());
        assert!(decode(&b, p).is_err());
    }

    #[test]
    fn sidecar_repeats_header() {
        let text = Header::of(&record()).sidecar_text();
        assert!(text.contains("station_id = D"));
        assert!(text.contains("sample_rate_hz = 8192"));
        assert!(text.contains("channel_codes = 1,2"));
        assert!(text.contains("channels = static_pressure_bar,dynamic_pressure_kpa"));
    }
}
