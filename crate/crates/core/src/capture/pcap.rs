//! Classic libpcap file format (not pcapng), both byte orders, micro- and
//! nanosecond timestamp variants.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::CaptureError;

const MAGIC_MICRO: u32 = 0xa1b2_c3d4;
const MAGIC_NANO: u32 = 0xa1b2_3c4d;
const MAGIC_MICRO_SWAPPED: u32 = 0xd4c3_b2a1;
const MAGIC_NANO_SWAPPED: u32 = 0x4d3c_b2a1;

pub const LINKTYPE_ETHERNET: u32 = 1;
const GLOBAL_HEADER_LEN: usize = 24;
const RECORD_HEADER_LEN: usize = 16;
/// Upper bound on a single record; anything larger is treated as corruption.
const MAX_RECORD_LEN: u32 = 256 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsResolution {
    Micro,
    Nano,
}

/// One capture record as stored in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFrame {
    pub ts_sec: u32,
    /// Sub-second part, in units given by `resolution`.
    pub ts_frac: u32,
    pub resolution: TsResolution,
    pub captured_len: u32,
    pub original_len: u32,
    pub data: Vec<u8>,
}

impl RawFrame {
    /// Timestamp in decimal seconds.
    pub fn timestamp(&self) -> f64 {
        let scale = match self.resolution {
            TsResolution::Micro => 1e-6,
            TsResolution::Nano => 1e-9,
        };
        f64::from(self.ts_sec) + f64::from(self.ts_frac) * scale
    }
}

/// Streaming reader over the records of a pcap file.
pub struct PcapReader<R> {
    inner: R,
    big_endian: bool,
    resolution: TsResolution,
    snaplen: u32,
    index: u64,
    done: bool,
}

/// Opens `path` and validates its global header.
pub fn read_capture(path: impl AsRef<Path>) -> Result<PcapReader<BufReader<File>>, CaptureError> {
    let file = File::open(path)?;
    PcapReader::new(BufReader::new(file))
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

impl<R: Read> PcapReader<R> {
    pub fn new(mut inner: R) -> Result<Self, CaptureError> {
        let mut header = [0u8; GLOBAL_HEADER_LEN];
        let n = read_full(&mut inner, &mut header)?;
        if n < 4 {
            let mut m = [0u8; 4];
            m[..n].copy_from_slice(&header[..n]);
            return Err(CaptureError::BadMagic(u32::from_le_bytes(m)));
        }
        let magic = u32::from_le_bytes([header[0], header[1], header[2], header[3]]);
        let (big_endian, resolution) = match magic {
            MAGIC_MICRO => (false, TsResolution::Micro),
            MAGIC_NANO => (false, TsResolution::Nano),
            MAGIC_MICRO_SWAPPED => (true, TsResolution::Micro),
            MAGIC_NANO_SWAPPED => (true, TsResolution::Nano),
            other => return Err(CaptureError::BadMagic(other)),
        };
        if n < GLOBAL_HEADER_LEN {
            return Err(CaptureError::TruncatedHeader);
        }
        let word = |b: &[u8]| {
            let a = [b[0], b[1], b[2], b[3]];
            if big_endian {
                u32::from_be_bytes(a)
            } else {
                u32::from_le_bytes(a)
            }
        };
        let snaplen = word(&header[16..20]);
        let link_type = word(&header[20..24]);
        if link_type != LINKTYPE_ETHERNET {
            return Err(CaptureError::UnsupportedLinkType(link_type));
        }
        Ok(PcapReader { inner, big_endian, resolution, snaplen, index: 0, done: false })
    }

    pub fn resolution(&self) -> TsResolution {
        self.resolution
    }

    pub fn snaplen(&self) -> u32 {
        self.snaplen
    }

    fn word(&self, b: &[u8]) -> u32 {
        let a = [b[0], b[1], b[2], b[3]];
        if self.big_endian {
            u32::from_be_bytes(a)
        } else {
            u32::from_le_bytes(a)
        }
    }

    fn next_frame(&mut self) -> Result<Option<RawFrame>, CaptureError> {
        let mut rec = [0u8; RECORD_HEADER_LEN];
        let n = read_full(&mut self.inner, &mut rec)?;
        if n == 0 {
            return Ok(None);
        }
        let index = self.index;
        if n < RECORD_HEADER_LEN {
            return Err(CaptureError::TruncatedRecord {
                index,
                claimed: RECORD_HEADER_LEN as u32,
                available: n,
            });
        }
        let ts_sec = self.word(&rec[0..4]);
        let ts_frac = self.word(&rec[4..8]);
        let captured_len = self.word(&rec[8..12]);
        let original_len = self.word(&rec[12..16]);
        if captured_len > MAX_RECORD_LEN {
            return Err(CaptureError::InvalidRecord {
                index,
                reason: format!("captured length {captured_len} exceeds limit"),
            });
        }
        if captured_len > original_len {
            return Err(CaptureError::InvalidRecord {
                index,
                reason: format!("captured length {captured_len} exceeds original length {original_len}"),
            });
        }
        let mut data = vec![0u8; captured_len as usize];
        let got = read_full(&mut self.inner, &mut data)?;
        if got < data.len() {
            return Err(CaptureError::TruncatedRecord { index, claimed: captured_len, available: got });
        }
        self.index += 1;
        Ok(Some(RawFrame { ts_sec, ts_frac, resolution: self.resolution, captured_len, original_len, data }))
    }
}

impl<R: Read> Iterator for PcapReader<R> {
    type Item = Result<RawFrame, CaptureError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_frame() {
            Ok(Some(f)) => Some(Ok(f)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Writes little-endian microsecond pcap files with Ethernet link type.
pub struct PcapWriter<W: Write> {
    inner: W,
}

impl PcapWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> io::Result<Self> {
        PcapWriter::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> PcapWriter<W> {
    pub fn new(mut inner: W) -> io::Result<Self> {
        inner.write_all(&MAGIC_MICRO.to_le_bytes())?;
        inner.write_all(&2u16.to_le_bytes())?;
        inner.write_all(&4u16.to_le_bytes())?;
        inner.write_all(&0i32.to_le_bytes())?; // thiszone
        inner.write_all(&0u32.to_le_bytes())?; // sigfigs
        inner.write_all(&65535u32.to_le_bytes())?;
        inner.write_all(&LINKTYPE_ETHERNET.to_le_bytes())?;
        Ok(PcapWriter { inner })
    }

    pub fn write_frame(&mut self, ts_sec: u32, ts_usec: u32, data: &[u8]) -> io::Result<()> {
        let len = u32::try_from(data.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
        self.inner.write_all(&ts_sec.to_le_bytes())?;
        self.inner.write_all(&ts_usec.to_le_bytes())?;
        self.inner.write_all(&len.to_le_bytes())?;
        self.inner.write_all(&len.to_le_bytes())?;
        self.inner.write_all(data)
    }

    pub fn into_inner(self) -> W {
        self.inner
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}
