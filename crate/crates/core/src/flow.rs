//! Uni- and bidirectional flow assembly.

use std::collections::HashMap;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capture::{ParsedPacket, Transport};
use crate::dataset::{FeatureLevel, FeatureRow, LabelQuery, LabelRuleSet, Value};
use crate::label::AttackClass;

/// Per-direction statistic columns, in output order.
pub const FLOW_STAT_COLUMNS: [&str; 13] = [
    "num_pkts",
    "mean_iat",
    "std_iat",
    "min_iat",
    "max_iat",
    "num_bytes",
    "num_psh_flags",
    "num_rst_flags",
    "num_urg_flags",
    "mean_pkt_len",
    "std_pkt_len",
    "min_pkt_len",
    "max_pkt_len",
];

const KEY_COLUMNS: [&str; 5] = ["ip_src", "ip_dest", "prt_src", "prt_dst", "proto"];

pub fn uniflow_columns() -> Vec<String> {
    KEY_COLUMNS.iter().chain(FLOW_STAT_COLUMNS.iter()).map(|s| s.to_string()).collect()
}

pub fn biflow_columns() -> Vec<String> {
    let mut cols: Vec<String> = KEY_COLUMNS.iter().map(|s| s.to_string()).collect();
    for prefix in ["fwd_", "bwd_"] {
        cols.extend(FLOW_STAT_COLUMNS.iter().map(|c| format!("{prefix}{c}")));
    }
    cols
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("flow has no packets")]
    EmptyFlow,
    #[error("input lengths differ: {timestamps} timestamps, {lens} lengths, {flags} flag triples")]
    LengthMismatch { timestamps: usize, lens: usize, flags: usize },
    #[error("timestamps decrease at index {0}")]
    UnorderedTimestamps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowKey {
    pub ip_src: Ipv4Addr,
    pub ip_dest: Ipv4Addr,
    pub prt_src: u16,
    pub prt_dst: u16,
    /// IP protocol number, 6 or 17.
    pub proto: u8,
}

impl FlowKey {
    /// Key of a TCP or UDP packet; `None` for anything else.
    pub fn of(p: &ParsedPacket) -> Option<Self> {
        match p.transport {
            Transport::Tcp | Transport::Udp => Some(FlowKey {
                ip_src: p.ip_src,
                ip_dest: p.ip_dest,
                prt_src: p.prt_src,
                prt_dst: p.prt_dst,
                proto: p.transport.protocol_number(),
            }),
            Transport::Other(_) => None,
        }
    }

    pub fn reverse(&self) -> Self {
        FlowKey { ip_src: self.ip_dest, ip_dest: self.ip_src, prt_src: self.prt_dst, prt_dst: self.prt_src, proto: self.proto }
    }

    fn values(&self) -> [Value; 5] {
        [
            Value::Text(self.ip_src.to_string()),
            Value::Text(self.ip_dest.to_string()),
            Value::Num(self.prt_src.into()),
            Value::Num(self.prt_dst.into()),
            Value::Num(self.proto.into()),
        ]
    }
}

/// Statistics over one direction of a flow. All zero for an empty direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowStats {
    pub num_pkts: u64,
    pub mean_iat: f64,
    pub std_iat: f64,
    pub min_iat: f64,
    pub max_iat: f64,
    pub num_bytes: u64,
    pub num_psh_flags: u64,
    pub num_rst_flags: u64,
    pub num_urg_flags: u64,
    pub mean_pkt_len: f64,
    pub std_pkt_len: f64,
    pub min_pkt_len: f64,
    pub max_pkt_len: f64,
}

impl FlowStats {
    pub fn values(&self) -> [f64; 13] {
        [
            self.num_pkts as f64,
            self.mean_iat,
            self.std_iat,
            self.min_iat,
            self.max_iat,
            self.num_bytes as f64,
            self.num_psh_flags as f64,
            self.num_rst_flags as f64,
            self.num_urg_flags as f64,
            self.mean_pkt_len,
            self.std_pkt_len,
            self.min_pkt_len,
            self.max_pkt_len,
        ]
    }
}

/// (mean, population std, min, max); all zero when empty.
fn moments(xs: &[f64]) -> (f64, f64, f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, var.sqrt(), min, max)
}

/// Flow statistics from per-packet timestamps, IP total lengths and
/// (psh, rst, urg) flags.
pub fn summarize_stats(timestamps: &[f64], ip_lens: &[u16], flags: &[(bool, bool, bool)]) -> Result<FlowStats, FlowError> {
    if timestamps.len() != ip_lens.len() || timestamps.len() != flags.len() {
        return Err(FlowError::LengthMismatch { timestamps: timestamps.len(), lens: ip_lens.len(), flags: flags.len() });
    }
    if timestamps.is_empty() {
        return Err(FlowError::EmptyFlow);
    }
    if let Some(i) = timestamps.windows(2).position(|w| w[1] < w[0]) {
        return Err(FlowError::UnorderedTimestamps(i + 1));
    }
    let iats: Vec<f64> = timestamps.windows(2).map(|w| w[1] - w[0]).collect();
    let lens: Vec<f64> = ip_lens.iter().map(|&l| l.into()).collect();
    let (mean_iat, std_iat, min_iat, max_iat) = moments(&iats);
    let (mean_pkt_len, std_pkt_len, min_pkt_len, max_pkt_len) = moments(&lens);
    let count = |f: fn(&(bool, bool, bool)) -> bool| flags.iter().filter(|t| f(t)).count() as u64;
    Ok(FlowStats {
        num_pkts: timestamps.len() as u64,
        mean_iat,
        std_iat,
        min_iat,
        max_iat,
        num_bytes: ip_lens.iter().map(|&l| u64::from(l)).sum(),
        num_psh_flags: count(|t| t.0),
        num_rst_flags: count(|t| t.1),
        num_urg_flags: count(|t| t.2),
        mean_pkt_len,
        std_pkt_len,
        min_pkt_len,
        max_pkt_len,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Start a new flow for a key when the gap since its previous packet exceeds
    /// this many seconds. `None` keeps one flow per key for the whole capture.
    pub idle_timeout: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniFlowRecord {
    pub key: FlowKey,
    pub stats: FlowStats,
    pub is_attack: u8,
    pub class: AttackClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiFlowRecord {
    /// Direction of the first packet seen for the pair.
    pub key: FlowKey,
    pub fwd: FlowStats,
    pub bwd: FlowStats,
    pub is_attack: u8,
    pub class: AttackClass,
}

#[derive(Default)]
struct Side {
    ts: Vec<f64>,
    lens: Vec<u16>,
    flags: Vec<(bool, bool, bool)>,
}

impl Side {
    fn push(&mut self, p: &ParsedPacket) {
        self.ts.push(p.timestamp);
        self.lens.push(p.ip_len);
        self.flags.push((p.tcp_flags.push, p.tcp_flags.reset, p.tcp_flags.urg));
    }

    fn stats(&self) -> FlowStats {
        if self.ts.is_empty() {
            return FlowStats::default();
        }
        summarize_stats(&self.ts, &self.lens, &self.flags).expect("sides are built from ordered packets")
    }
}

struct Open {
    key: FlowKey,
    first_ts: f64,
    last_ts: f64,
    label: (u8, AttackClass),
    fwd: Side,
    bwd: Side,
}

/// Packets in timestamp order (stable), restricted to TCP and UDP.
fn ordered(packets: &[ParsedPacket]) -> Vec<(&ParsedPacket, FlowKey)> {
    let mut v: Vec<_> = packets.iter().filter_map(|p| FlowKey::of(p).map(|k| (p, k))).collect();
    if v.windows(2).any(|w| w[1].0.timestamp < w[0].0.timestamp) {
        v.sort_by(|a, b| a.0.timestamp.total_cmp(&b.0.timestamp));
    }
    v
}

fn assemble(packets: &[ParsedPacket], labels: &LabelRuleSet, cfg: &FlowConfig, pair: bool) -> Vec<Open> {
    let mut flows: Vec<Open> = Vec::new();
    let mut open: HashMap<FlowKey, usize> = HashMap::new();
    for (p, k) in ordered(packets) {
        let hit = match open.get(&k) {
            Some(&i) => Some((i, true)),
            None if pair => open.get(&k.reverse()).map(|&i| (i, false)),
            None => None,
        };
        let hit = hit.filter(|&(i, _)| match cfg.idle_timeout {
            Some(t) => p.timestamp - flows[i].last_ts <= t,
            None => true,
        });
        let (i, forward) = match hit {
            Some(h) => h,
            None => {
                if let Some((old, _)) = hit_key(&open, &k, pair) {
                    open.remove(&old);
                }
                open.insert(k, flows.len());
                flows.push(Open {
                    key: k,
                    first_ts: p.timestamp,
                    last_ts: p.timestamp,
                    label: labels.label(&LabelQuery::from_packet(p)),
                    fwd: Side::default(),
                    bwd: Side::default(),
                });
                (flows.len() - 1, true)
            }
        };
        let f = &mut flows[i];
        f.last_ts = p.timestamp;
        if forward { f.fwd.push(p) } else { f.bwd.push(p) }
    }
    let mut order: Vec<usize> = (0..flows.len()).collect();
    order.sort_by(|&a, &b| {
        flows[a].first_ts.total_cmp(&flows[b].first_ts).then(flows[a].key.cmp(&flows[b].key)).then(a.cmp(&b))
    });
    let mut slots: Vec<Option<Open>> = flows.into_iter().map(Some).collect();
    order.into_iter().map(|i| slots[i].take().expect("each flow emitted once")).collect()
}

/// An expired open flow that a new packet with key `k` would otherwise join.
fn hit_key(open: &HashMap<FlowKey, usize>, k: &FlowKey, pair: bool) -> Option<(FlowKey, usize)> {
    if let Some(&i) = open.get(k) {
        return Some((*k, i));
    }
    if pair {
        let r = k.reverse();
        return open.get(&r).map(|&i| (r, i));
    }
    None
}

/// Groups TCP/UDP packets by exact 5-tuple.
pub fn assemble_uniflows(packets: &[ParsedPacket], labels: &LabelRuleSet, cfg: &FlowConfig) -> Vec<UniFlowRecord> {
    assemble(packets, labels, cfg, false)
        .into_iter()
        .map(|f| UniFlowRecord { key: f.key, stats: f.fwd.stats(), is_attack: f.label.0, class: f.label.1 })
        .collect()
}

/// Merges each 5-tuple with its reverse. Forward is the direction of the first packet.
pub fn assemble_biflows(packets: &[ParsedPacket], labels: &LabelRuleSet, cfg: &FlowConfig) -> Vec<BiFlowRecord> {
    assemble(packets, labels, cfg, true)
        .into_iter()
        .map(|f| BiFlowRecord {
            key: f.key,
            fwd: f.fwd.stats(),
            bwd: f.bwd.stats(),
            is_attack: f.label.0,
            class: f.label.1,
        })
        .collect()
}

impl FeatureRow for UniFlowRecord {
    const LEVEL: FeatureLevel = FeatureLevel::Uniflow;

    fn values(&self) -> Vec<Value> {
        let mut v = self.key.values().to_vec();
        v.extend(self.stats.values().into_iter().map(Value::Num));
        v
    }

    fn label(&self) -> (u8, AttackClass) {
        (self.is_attack, self.class)
    }
}

impl FeatureRow for BiFlowRecord {
    const LEVEL: FeatureLevel = FeatureLevel::Biflow;

    fn values(&self) -> Vec<Value> {
        let mut v = self.key.values().to_vec();
        v.extend(self.fwd.values().into_iter().map(Value::Num));
        v.extend(self.bwd.values().into_iter().map(Value::Num));
        v
    }

    fn label(&self) -> (u8, AttackClass) {
        (self.is_attack, self.class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::TcpFlags;

    const A: Ipv4Addr = Ipv4Addr::new(10, 0, 0, 1);
    const B: Ipv4Addr = Ipv4Addr::new(10, 0, 0, 2);

    fn pkt(ts: f64, src: Ipv4Addr, dst: Ipv4Addr, sp: u16, dp: u16, len: u16) -> ParsedPacket {
        ParsedPacket {
            timestamp: ts,
            ip_src: src,
            ip_dest: dst,
            ttl: 64,
            ip_len: len,
            ip_flag_df: true,
            ip_flag_mf: false,
            ip_flag_rb: false,
            transport: Transport::Tcp,
            prt_src: sp,
            prt_dst: dp,
            tcp_flags: TcpFlags::default(),
            payload_len: 0,
            mqtt_messages: Vec::new(),
            mqtt_partial: false,
        }
    }

    fn three_plus_two() -> Vec<ParsedPacket> {
        vec![
            pkt(0.0, A, B, 5000, 1883, 60),
            pkt(0.1, B, A, 1883, 5000, 60),
            pkt(0.2, A, B, 5000, 1883, 52),
            pkt(0.3, B, A, 1883, 5000, 52),
            pkt(0.4, A, B, 5000, 1883, 52),
        ]
    }

    #[test]
    fn single_packet_stats() {
        let s = summarize_stats(&[5.0], &[60], &[(false, false, false)]).unwrap();
        assert_eq!(s.num_pkts, 1);
        assert_eq!((s.mean_iat, s.std_iat, s.min_iat, s.max_iat), (0.0, 0.0, 0.0, 0.0));
        assert_eq!((s.mean_pkt_len, s.std_pkt_len), (60.0, 0.0));
    }

    #[test]
    fn three_packet_stats() {
        let s = summarize_stats(&[0.0, 1.0, 3.0], &[40, 40, 100], &[(false, false, false); 3]).unwrap();
        assert_eq!((s.mean_iat, s.std_iat, s.min_iat, s.max_iat), (1.5, 0.5, 1.0, 2.0));
        assert_eq!(s.num_bytes, 180);
        assert_eq!(s.mean_pkt_len, 60.0);
        assert_eq!((s.min_pkt_len, s.max_pkt_len), (40.0, 100.0));
    }

    #[test]
    fn flag_counts() {
        let s = summarize_stats(&[0.0, 1.0, 2.0, 3.0], &[40; 4], &[(true, false, false); 4]).unwrap();
        assert_eq!((s.num_psh_flags, s.num_rst_flags, s.num_urg_flags), (4, 0, 0));
    }

    #[test]
    fn summarize_errors() {
        assert_eq!(summarize_stats(&[], &[], &[]), Err(FlowError::EmptyFlow));
        assert!(matches!(summarize_stats(&[0.0], &[], &[]), Err(FlowError::LengthMismatch { .. })));
        assert_eq!(
            summarize_stats(&[1.0, 0.0], &[1, 1], &[(false, false, false); 2]),
            Err(FlowError::UnorderedTimestamps(1))
        );
    }

    #[test]
    fn direction_separates_uniflows() {
        let p = three_plus_two();
        let u = assemble_uniflows(&p[..], &LabelRuleSet::normal(), &FlowConfig::default());
        assert_eq!(u.len(), 2);
        assert_eq!(u[0].key.prt_src, 5000);
        assert_eq!(u[0].stats.num_pkts, 3);
        assert_eq!(u[1].stats.num_pkts, 2);
        let only_fwd: Vec<_> = p.iter().filter(|x| x.ip_src == A).cloned().collect();
        assert_eq!(assemble_uniflows(&only_fwd, &LabelRuleSet::normal(), &FlowConfig::default()).len(), 1);
    }

    #[test]
    fn biflow_pairs_directions() {
        let b = assemble_biflows(&three_plus_two(), &LabelRuleSet::normal(), &FlowConfig::default());
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].key.ip_src, A);
        assert_eq!((b[0].fwd.num_pkts, b[0].bwd.num_pkts), (3, 2));
        assert!((b[0].bwd.mean_iat - 0.2).abs() < 1e-12);
    }

    #[test]
    fn unanswered_probe_has_zero_backward() {
        let b = assemble_biflows(&[pkt(1.0, A, B, 40000, 22, 44)], &LabelRuleSet::normal(), &FlowConfig::default());
        assert_eq!(b[0].bwd, FlowStats::default());
    }

    #[test]
    fn idle_timeout_splits() {
        let p = vec![pkt(0.0, A, B, 1, 2, 40), pkt(1.0, A, B, 1, 2, 40), pkt(10.0, A, B, 1, 2, 40), pkt(10.5, B, A, 2, 1, 40)];
        let cfg = FlowConfig { idle_timeout: Some(5.0) };
        let u = assemble_uniflows(&p, &LabelRuleSet::normal(), &cfg);
        assert_eq!(u.iter().map(|r| r.stats.num_pkts).collect::<Vec<_>>(), vec![2, 1, 1]);
        let b = assemble_biflows(&p, &LabelRuleSet::normal(), &cfg);
        assert_eq!(b.len(), 2);
        assert_eq!((b[1].fwd.num_pkts, b[1].bwd.num_pkts), (1, 1));
    }

    #[test]
    fn unordered_input_is_sorted() {
        let mut p = three_plus_two();
        p.swap(0, 2);
        let b = assemble_biflows(&p, &LabelRuleSet::normal(), &FlowConfig::default());
        assert_eq!((b[0].fwd.num_pkts, b[0].bwd.num_pkts), (3, 2));
        assert!(b[0].fwd.min_iat >= 0.0);
    }

    #[test]
    fn columns_match_values() {
        let p = three_plus_two();
        let u = assemble_uniflows(&p, &LabelRuleSet::normal(), &FlowConfig::default());
        assert_eq!(u[0].values().len(), uniflow_columns().len());
        let b = assemble_biflows(&p, &LabelRuleSet::normal(), &FlowConfig::default());
        assert_eq!(b[0].values().len(), biflow_columns().len());
        assert_eq!(biflow_columns().len(), 31);
        assert_eq!(biflow_columns()[5], "fwd_num_pkts");
    }

    #[test]
    fn non_transport_packets_are_ignored() {
        let mut p = three_plus_two();
        p[1].transport = Transport::Other(1);
        let u = assemble_uniflows(&p, &LabelRuleSet::normal(), &FlowConfig::default());
        assert_eq!(u.iter().map(|r| r.stats.num_pkts).sum::<u64>(), 4);
    }
}
