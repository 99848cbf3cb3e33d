//! Capture ingest: pcap files, link/network/transport decoding and MQTT dissection.

pub mod craft;
pub mod mqtt;
pub mod packet;
pub mod pcap;

use std::path::Path;

use thiserror::Error;

pub use mqtt::{parse_mqtt_stream, scan_mqtt_stream, MqttMessage, MqttScan};
pub use packet::{parse_packet, MalformedHeader, PacketConfig, ParsedPacket, TcpFlags, Transport};
pub use pcap::{read_capture, PcapReader, PcapWriter, RawFrame, TsResolution};

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("not a pcap file (bad magic {0:#010x})")]
    BadMagic(u32),
    #[error("truncated pcap global header")]
    TruncatedHeader,
    #[error("unsupported link type {0} (only Ethernet is supported)")]
    UnsupportedLinkType(u32),
    #[error("truncated record #{index}: header claims {claimed} bytes, {available} remain")]
    TruncatedRecord { index: u64, claimed: u32, available: usize },
    #[error("invalid record #{index}: {reason}")]
    InvalidRecord { index: u64, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Diagnostic counters collected while decoding a capture.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DecodeStats {
    pub frames: u64,
    pub packets: u64,
    pub skipped: u64,
    pub malformed: u64,
    /// Segments whose MQTT bytes ended in an undecodable or partial packet.
    pub mqtt_partial: u64,
    /// MQTT messages beyond the first in a segment.
    pub mqtt_extra_messages: u64,
}

/// Reads a capture and decodes every frame, counting skips and malformed frames.
pub fn decode_capture(
    path: impl AsRef<Path>,
    cfg: &PacketConfig,
) -> Result<(Vec<ParsedPacket>, DecodeStats), CaptureError> {
    decode_frames(read_capture(path)?, cfg)
}

pub fn decode_frames<I>(frames: I, cfg: &PacketConfig) -> Result<(Vec<ParsedPacket>, DecodeStats), CaptureError>
where
    I: IntoIterator<Item = Result<RawFrame, CaptureError>>,
{
    let mut stats = DecodeStats::default();
    let mut packets = Vec::new();
    for frame in frames {
        let frame = frame?;
        stats.frames += 1;
        match parse_packet(&frame, cfg) {
            Ok(Some(p)) => {
                stats.packets += 1;
                if p.mqtt_partial {
                    stats.mqtt_partial += 1;
                }
                stats.mqtt_extra_messages += p.mqtt_messages.len().saturating_sub(1) as u64;
                packets.push(p);
            }
            Ok(None) => stats.skipped += 1,
            Err(e) => {
                log::debug!("frame {}: {e}", stats.frames - 1);
                stats.malformed += 1;
            }
        }
    }
    Ok((packets, stats))
}
