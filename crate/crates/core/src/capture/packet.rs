//! Ethernet / IPv4 / TCP / UDP header decoding.

use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::craft::{ETHERTYPE_IPV4, ETHERTYPE_VLAN};
use super::mqtt::{scan_mqtt_stream, MqttMessage};
use super::pcap::RawFrame;

pub const DEFAULT_MQTT_PORT: u16 = 1883;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketConfig {
    /// TCP ports whose payloads are dissected as MQTT (either direction).
    pub mqtt_ports: BTreeSet<u16>,
}

impl Default for PacketConfig {
    fn default() -> Self {
        PacketConfig { mqtt_ports: BTreeSet::from([DEFAULT_MQTT_PORT]) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Transport {
    Tcp,
    Udp,
    /// Any other IP protocol, or a non-first IP fragment.
    Other(u8),
}

impl Transport {
    pub fn protocol_number(self) -> u8 {
        match self {
            Transport::Tcp => 6,
            Transport::Udp => 17,
            Transport::Other(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TcpFlags {
    /// Any of the three reserved header bits.
    pub res: bool,
    pub ns: bool,
    pub cwr: bool,
    pub ecn: bool,
    pub urg: bool,
    pub ack: bool,
    pub push: bool,
    pub reset: bool,
    pub syn: bool,
    pub fin: bool,
}

impl TcpFlags {
    /// Decodes header bytes 12 (offset/reserved/NS) and 13 (CWR..FIN).
    pub fn from_header_bytes(b12: u8, b13: u8) -> Self {
        TcpFlags {
            res: b12 & 0x0e != 0,
            ns: b12 & 0x01 != 0,
            cwr: b13 & 0x80 != 0,
            ecn: b13 & 0x40 != 0,
            urg: b13 & 0x20 != 0,
            ack: b13 & 0x10 != 0,
            push: b13 & 0x08 != 0,
            reset: b13 & 0x04 != 0,
            syn: b13 & 0x02 != 0,
            fin: b13 & 0x01 != 0,
        }
    }

    pub fn any(&self) -> bool {
        *self != TcpFlags::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedPacket {
    pub timestamp: f64,
    pub ip_src: Ipv4Addr,
    pub ip_dest: Ipv4Addr,
    pub ttl: u8,
    /// IPv4 total-length field.
    pub ip_len: u16,
    pub ip_flag_df: bool,
    pub ip_flag_mf: bool,
    pub ip_flag_rb: bool,
    pub transport: Transport,
    pub prt_src: u16,
    pub prt_dst: u16,
    pub tcp_flags: TcpFlags,
    /// Transport payload length according to the headers.
    pub payload_len: u32,
    pub mqtt_messages: Vec<MqttMessage>,
    /// MQTT dissection stopped before the end of the captured payload.
    pub mqtt_partial: bool,
}

impl ParsedPacket {
    /// Highest decoded layer.
    pub fn protocol_name(&self) -> &'static str {
        if !self.mqtt_messages.is_empty() {
            return "MQTT";
        }
        match self.transport {
            Transport::Tcp => "TCP",
            Transport::Udp => "UDP",
            Transport::Other(_) => "OTHER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed header: {0}")]
pub struct MalformedHeader(pub &'static str);

fn be16(b: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([b[at], b[at + 1]])
}

/// Decodes one Ethernet frame. Returns `Ok(None)` for non-IPv4 frames.
pub fn parse_packet(frame: &RawFrame, cfg: &PacketConfig) -> Result<Option<ParsedPacket>, MalformedHeader> {
    let data = &frame.data[..frame.data.len().min(frame.captured_len as usize)];
    let truncated_by_snaplen = frame.captured_len < frame.original_len;
    if data.len() < 14 {
        return Err(MalformedHeader("frame shorter than an Ethernet header"));
    }
    let mut ethertype = be16(data, 12);
    let mut l3 = 14;
    if ethertype == ETHERTYPE_VLAN {
        if data.len() < 18 {
            return Err(MalformedHeader("truncated 802.1Q tag"));
        }
        ethertype = be16(data, 16);
        l3 = 18;
    }
    if ethertype != ETHERTYPE_IPV4 {
        return Ok(None);
    }
    let ip = &data[l3..];
    if ip.len() < 20 {
        return Err(MalformedHeader("truncated IPv4 header"));
    }
    if ip[0] >> 4 != 4 {
        return Err(MalformedHeader("IP version is not 4"));
    }
    let ihl = usize::from(ip[0] & 0x0f) * 4;
    if ihl < 20 || ihl > ip.len() {
        return Err(MalformedHeader("IPv4 header length out of range"));
    }
    let total_len = be16(ip, 2);
    if usize::from(total_len) < ihl {
        return Err(MalformedHeader("IPv4 total length below header length"));
    }
    if usize::from(total_len) > ip.len() && !truncated_by_snaplen {
        return Err(MalformedHeader("IPv4 total length exceeds frame"));
    }
    let flags_frag = be16(ip, 6);
    let frag_offset = flags_frag & 0x1fff;
    let protocol = ip[9];
    let ip_src = Ipv4Addr::new(ip[12], ip[13], ip[14], ip[15]);
    let ip_dest = Ipv4Addr::new(ip[16], ip[17], ip[18], ip[19]);

    let wire_seg_len = usize::from(total_len) - ihl;
    let captured_end = usize::from(total_len).min(ip.len());
    let seg = &ip[ihl..captured_end];

    let mut pkt = ParsedPacket {
        timestamp: frame.timestamp(),
        ip_src,
        ip_dest,
        ttl: ip[8],
        ip_len: total_len,
        ip_flag_df: flags_frag & 0x4000 != 0,
        ip_flag_mf: flags_frag & 0x2000 != 0,
        ip_flag_rb: flags_frag & 0x8000 != 0,
        transport: Transport::Other(protocol),
        prt_src: 0,
        prt_dst: 0,
        tcp_flags: TcpFlags::default(),
        payload_len: wire_seg_len as u32,
        mqtt_messages: Vec::new(),
        mqtt_partial: false,
    };
    if frag_offset != 0 {
        return Ok(Some(pkt));
    }
    match protocol {
        6 => {
            if seg.len() < 20 {
                return Err(MalformedHeader("truncated TCP header"));
            }
            let doff = usize::from(seg[12] >> 4) * 4;
            if doff < 20 || doff > seg.len() || doff > wire_seg_len {
                return Err(MalformedHeader("TCP data offset out of range"));
            }
            pkt.transport = Transport::Tcp;
            pkt.prt_src = be16(seg, 0);
            pkt.prt_dst = be16(seg, 2);
            pkt.tcp_flags = TcpFlags::from_header_bytes(seg[12], seg[13]);
            pkt.payload_len = (wire_seg_len - doff) as u32;
            let payload = &seg[doff..];
            if !payload.is_empty()
                && (cfg.mqtt_ports.contains(&pkt.prt_src) || cfg.mqtt_ports.contains(&pkt.prt_dst))
            {
                let scan = scan_mqtt_stream(payload);
                pkt.mqtt_partial = scan.trailing > 0;
                pkt.mqtt_messages = scan.messages;
            }
        }
        17 => {
            if seg.len() < 8 || wire_seg_len < 8 {
                return Err(MalformedHeader("truncated UDP header"));
            }
            pkt.transport = Transport::Udp;
            pkt.prt_src = be16(seg, 0);
            pkt.prt_dst = be16(seg, 2);
            pkt.payload_len = (wire_seg_len - 8) as u32;
        }
        _ => {}
    }
    Ok(Some(pkt))
}
