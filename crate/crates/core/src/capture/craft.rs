//! Frame construction: Ethernet II + IPv4 + TCP/UDP with valid checksums.

use std::net::Ipv4Addr;

pub mod tcp_flags {
    pub const FIN: u8 = 0x01;
    pub const SYN: u8 = 0x02;
    pub const RST: u8 = 0x04;
    pub const PSH: u8 = 0x08;
    pub const ACK: u8 = 0x10;
    pub const URG: u8 = 0x20;
    pub const ECE: u8 = 0x40;
    pub const CWR: u8 = 0x80;
}

pub const ETHERTYPE_IPV4: u16 = 0x0800;
pub const ETHERTYPE_ARP: u16 = 0x0806;
pub const ETHERTYPE_VLAN: u16 = 0x8100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ipv4Header {
    pub src: Ipv4Addr,
    pub dst: Ipv4Addr,
    pub ttl: u8,
    pub ident: u16,
    pub dont_fragment: bool,
}

impl Ipv4Header {
    pub fn new(src: Ipv4Addr, dst: Ipv4Addr) -> Self {
        Ipv4Header { src, dst, ttl: 64, ident: 0, dont_fragment: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TcpHeader {
    pub src_port: u16,
    pub dst_port: u16,
    pub seq: u32,
    pub ack: u32,
    /// Byte 13 of the TCP header (CWR..FIN).
    pub flags: u8,
    pub ns: bool,
    pub window: u16,
}

impl TcpHeader {
    pub fn new(src_port: u16, dst_port: u16, flags: u8) -> Self {
        TcpHeader { src_port, dst_port, seq: 0, ack: 0, flags, ns: false, window: 64240 }
    }
}

/// Locally administered MAC derived from an IPv4 address.
pub fn mac_for(ip: Ipv4Addr) -> [u8; 6] {
    let o = ip.octets();
    [0x02, 0x00, o[0], o[1], o[2], o[3]]
}

pub fn internet_checksum(chunks: &[&[u8]]) -> u16 {
    let mut sum: u32 = 0;
    let mut carry: Option<u8> = None;
    for chunk in chunks {
        for &b in chunk.iter() {
            match carry.take() {
                Some(hi) => sum += u32::from(u16::from_be_bytes([hi, b])),
                None => carry = Some(b),
            }
        }
    }
    if let Some(hi) = carry {
        sum += u32::from(u16::from_be_bytes([hi, 0]));
    }
    while sum >> 16 != 0 {
        sum = (sum & 0xffff) + (sum >> 16);
    }
    !(sum as u16)
}

fn ethernet(src: Ipv4Addr, dst: Ipv4Addr, ethertype: u16, body: &[u8]) -> Vec<u8> {
    let mut f = Vec::with_capacity(14 + body.len());
    f.extend_from_slice(&mac_for(dst));
    f.extend_from_slice(&mac_for(src));
    f.extend_from_slice(&ethertype.to_be_bytes());
    f.extend_from_slice(body);
    // minimum Ethernet payload is 46 bytes
    if f.len() < 60 {
        f.resize(60, 0);
    }
    f
}

fn ipv4_packet(ip: &Ipv4Header, protocol: u8, transport: &[u8]) -> Vec<u8> {
    let total = 20 + transport.len();
    let mut h = [0u8; 20];
    h[0] = 0x45;
    h[2..4].copy_from_slice(&(total as u16).to_be_bytes());
    h[4..6].copy_from_slice(&ip.ident.to_be_bytes());
    h[6] = if ip.dont_fragment { 0x40 } else { 0 };
    h[8] = ip.ttl;
    h[9] = protocol;
    h[12..16].copy_from_slice(&ip.src.octets());
    h[16..20].copy_from_slice(&ip.dst.octets());
    let csum = internet_checksum(&[&h]);
    h[10..12].copy_from_slice(&csum.to_be_bytes());
    let mut p = Vec::with_capacity(total);
    p.extend_from_slice(&h);
    p.extend_from_slice(transport);
    p
}

fn pseudo_header(ip: &Ipv4Header, protocol: u8, len: usize) -> [u8; 12] {
    let mut ph = [0u8; 12];
    ph[0..4].copy_from_slice(&ip.src.octets());
    ph[4..8].copy_from_slice(&ip.dst.octets());
    ph[9] = protocol;
    ph[10..12].copy_from_slice(&(len as u16).to_be_bytes());
    ph
}

pub fn tcp_frame(ip: &Ipv4Header, tcp: &TcpHeader, payload: &[u8]) -> Vec<u8> {
    let mut seg = vec![0u8; 20];
    seg[0..2].copy_from_slice(&tcp.src_port.to_be_bytes());
    seg[2..4].copy_from_slice(&tcp.dst_port.to_be_bytes());
    seg[4..8].copy_from_slice(&tcp.seq.to_be_bytes());
    seg[8..12].copy_from_slice(&tcp.ack.to_be_bytes());
    seg[12] = (5 << 4) | u8::from(tcp.ns);
    seg[13] = tcp.flags;
    seg[14..16].copy_from_slice(&tcp.window.to_be_bytes());
    seg.extend_from_slice(payload);
    let ph = pseudo_header(ip, 6, seg.len());
    let csum = internet_checksum(&[&ph, &seg]);
    seg[16..18].copy_from_slice(&csum.to_be_bytes());
    ethernet(ip.src, ip.dst, ETHERTYPE_IPV4, &ipv4_packet(ip, 6, &seg))
}

pub fn udp_frame(ip: &Ipv4Header, src_port: u16, dst_port: u16, payload: &[u8]) -> Vec<u8> {
    let len = 8 + payload.len();
    let mut seg = vec![0u8; 8];
    seg[0..2].copy_from_slice(&src_port.to_be_bytes());
    seg[2..4].copy_from_slice(&dst_port.to_be_bytes());
    seg[4..6].copy_from_slice(&(len as u16).to_be_bytes());
    seg.extend_from_slice(payload);
    let ph = pseudo_header(ip, 17, len);
    let mut csum = internet_checksum(&[&ph, &seg]);
    if csum == 0 {
        csum = 0xffff;
    }
    seg[6..8].copy_from_slice(&csum.to_be_bytes());
    ethernet(ip.src, ip.dst, ETHERTYPE_IPV4, &ipv4_packet(ip, 17, &seg))
}

/// IPv4 frame carrying an arbitrary protocol body (e.g. ICMP).
pub fn ip_frame(ip: &Ipv4Header, protocol: u8, body: &[u8]) -> Vec<u8> {
    ethernet(ip.src, ip.dst, ETHERTYPE_IPV4, &ipv4_packet(ip, protocol, body))
}

/// ARP who-has request.
pub fn arp_request(sender: Ipv4Addr, target: Ipv4Addr) -> Vec<u8> {
    let mut body = vec![0x00, 0x01, 0x08, 0x00, 6, 4, 0x00, 0x01];
    body.extend_from_slice(&mac_for(sender));
    body.extend_from_slice(&sender.octets());
    body.extend_from_slice(&[0; 6]);
    body.extend_from_slice(&target.octets());
    let mut f = Vec::with_capacity(60);
    f.extend_from_slice(&[0xff; 6]);
    f.extend_from_slice(&mac_for(sender));
    f.extend_from_slice(&ETHERTYPE_ARP.to_be_bytes());
    f.extend_from_slice(&body);
    f.resize(60, 0);
    f
}
