//! Reference implementations used as test oracles. They are written
//! independently of the library code paths they check.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use mqtt_ids::capture::{ParsedPacket, TcpFlags, Transport};
use mqtt_ids::dataset::{LabelQuery, LabelRuleSet};
use mqtt_ids::flow::{FlowKey, FlowStats};
use mqtt_ids::AttackClass;
use rand::Rng;

/// Random TCP/UDP/other stream over a handful of hosts and ports, so keys
/// repeat and reverse directions occur. Timestamps never decrease.
pub fn random_stream<R: Rng>(rng: &mut R, n: usize) -> Vec<ParsedPacket> {
    let hosts = [Ipv4Addr::new(10, 0, 0, 1), Ipv4Addr::new(10, 0, 0, 2), Ipv4Addr::new(10, 0, 0, 3)];
    let ports = [1883u16, 5000, 22];
    let mut t = 1_600_000_000.0 + rng.gen_range(0.0..10.0);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.8) {
                t += rng.gen_range(0.0..2.0);
            }
            let transport = match rng.gen_range(0..10) {
                0 => Transport::Other(1),
                1..=3 => Transport::Udp,
                _ => Transport::Tcp,
            };
            let tcp = transport == Transport::Tcp;
            let src = hosts[rng.gen_range(0..3)];
            let mut dst = hosts[rng.gen_range(0..3)];
            if dst == src {
                dst = hosts[(hosts.iter().position(|h| *h == src).unwrap() + 1) % 3];
            }
            let (sp, dp) = if matches!(transport, Transport::Other(_)) {
                (0, 0)
            } else {
                (ports[rng.gen_range(0..3)], ports[rng.gen_range(0..3)])
            };
            ParsedPacket {
                timestamp: t,
                ip_src: src,
                ip_dest: dst,
                ttl: 64,
                ip_len: rng.gen_range(20..1500),
                ip_flag_df: true,
                ip_flag_mf: false,
                ip_flag_rb: false,
                transport,
                prt_src: sp,
                prt_dst: dp,
                tcp_flags: TcpFlags {
                    push: tcp && rng.gen_bool(0.3),
                    reset: tcp && rng.gen_bool(0.1),
                    urg: tcp && rng.gen_bool(0.05),
                    ack: tcp,
                    ..TcpFlags::default()
                },
                payload_len: 0,
                mqtt_messages: Vec::new(),
                mqtt_partial: false,
            }
        })
        .collect()
}

pub fn key_of(p: &ParsedPacket) -> Option<FlowKey> {
    let proto = match p.transport {
        Transport::Tcp => 6,
        Transport::Udp => 17,
        Transport::Other(_) => return None,
    };
    Some(FlowKey { ip_src: p.ip_src, ip_dest: p.ip_dest, prt_src: p.prt_src, prt_dst: p.prt_dst, proto })
}

fn reversed(k: &FlowKey) -> FlowKey {
    FlowKey { ip_src: k.ip_dest, ip_dest: k.ip_src, prt_src: k.prt_dst, prt_dst: k.prt_src, proto: k.proto }
}

/// Statistics straight from the definitions, using the E[x^2] - E[x]^2 form
/// for the variance.
pub fn oracle_stats(pkts: &[&ParsedPacket]) -> FlowStats {
    if pkts.is_empty() {
        return FlowStats::default();
    }
    fn summary(v: &[f64]) -> (f64, f64, f64, f64) {
        if v.is_empty() {
            return (0.0, 0.0, 0.0, 0.0);
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sq = v.iter().map(|x| x * x).sum::<f64>() / n;
        let mut sorted = v.to_vec();
        sorted.sort_by(f64::total_cmp);
        (mean, (sq - mean * mean).max(0.0).sqrt(), sorted[0], sorted[sorted.len() - 1])
    }
    let iat: Vec<f64> = (1..pkts.len()).map(|i| pkts[i].timestamp - pkts[i - 1].timestamp).collect();
    let lens: Vec<f64> = pkts.iter().map(|p| p.ip_len as f64).collect();
    let (mi, si, ni, xi) = summary(&iat);
    let (ml, sl, nl, xl) = summary(&lens);
    FlowStats {
        num_pkts: pkts.len() as u64,
        mean_iat: mi,
        std_iat: si,
        min_iat: ni,
        max_iat: xi,
        num_bytes: pkts.iter().map(|p| p.ip_len as u64).sum(),
        num_psh_flags: pkts.iter().filter(|p| p.tcp_flags.push).count() as u64,
        num_rst_flags: pkts.iter().filter(|p| p.tcp_flags.reset).count() as u64,
        num_urg_flags: pkts.iter().filter(|p| p.tcp_flags.urg).count() as u64,
        mean_pkt_len: ml,
        std_pkt_len: sl,
        min_pkt_len: nl,
        max_pkt_len: xl,
    }
}

pub type Label = (u8, AttackClass);

/// Per-key recomputation: filter the stream for each key, recompute.
pub fn oracle_uniflows(pkts: &[ParsedPacket], rules: &LabelRuleSet) -> BTreeMap<FlowKey, (FlowStats, Label)> {
    let mut out = BTreeMap::new();
    for p in pkts {
        let Some(k) = key_of(p) else { continue };
        if out.contains_key(&k) {
            continue;
        }
        let members: Vec<&ParsedPacket> = pkts.iter().filter(|q| key_of(q) == Some(k)).collect();
        out.insert(k, (oracle_stats(&members), rules.label(&LabelQuery::from_packet(p))));
    }
    out
}

/// Pairs keyed by the direction of their first packet.
pub fn oracle_biflows(pkts: &[ParsedPacket], rules: &LabelRuleSet) -> BTreeMap<FlowKey, (FlowStats, FlowStats, Label)> {
    let mut out: BTreeMap<FlowKey, (FlowStats, FlowStats, Label)> = BTreeMap::new();
    for p in pkts {
        let Some(k) = key_of(p) else { continue };
        if out.contains_key(&k) || out.contains_key(&reversed(&k)) {
            continue;
        }
        let fwd: Vec<&ParsedPacket> = pkts.iter().filter(|q| key_of(q) == Some(k)).collect();
        let r = reversed(&k);
        let bwd: Vec<&ParsedPacket> = if r == k { Vec::new() } else { pkts.iter().filter(|q| key_of(q) == Some(r)).collect() };
        out.insert(k, (oracle_stats(&fwd), oracle_stats(&bwd), rules.label(&LabelQuery::from_packet(p))));
    }
    out
}

/// Exact on counts, `tol` on decimals. Returns the first mismatch.
pub fn stats_mismatch(a: &FlowStats, b: &FlowStats, tol: f64) -> Option<String> {
    let counts = [
        ("num_pkts", a.num_pkts, b.num_pkts),
        ("num_bytes", a.num_bytes, b.num_bytes),
        ("num_psh_flags", a.num_psh_flags, b.num_psh_flags),
        ("num_rst_flags", a.num_rst_flags, b.num_rst_flags),
        ("num_urg_flags", a.num_urg_flags, b.num_urg_flags),
    ];
    for (name, x, y) in counts {
        if x != y {
            return Some(format!("{name}: {x} != {y}"));
        }
    }
    let decimals = [
        ("mean_iat", a.mean_iat, b.mean_iat),
        ("std_iat", a.std_iat, b.std_iat),
        ("min_iat", a.min_iat, b.min_iat),
        ("max_iat", a.max_iat, b.max_iat),
        ("mean_pkt_len", a.mean_pkt_len, b.mean_pkt_len),
        ("std_pkt_len", a.std_pkt_len, b.std_pkt_len),
        ("min_pkt_len", a.min_pkt_len, b.min_pkt_len),
        ("max_pkt_len", a.max_pkt_len, b.max_pkt_len),
    ];
    for (name, x, y) in decimals {
        if (x - y).abs() > tol * (1.0 + x.abs().max(y.abs())) {
            return Some(format!("{name}: {x} != {y}"));
        }
    }
    None
}

/// k-NN by sorting every training row: majority, then smaller summed
/// distance, then lower class index.
pub fn knn_oracle(x: &[Vec<f64>], y: &[usize], n_classes: usize, k: usize, q: &[f64]) -> usize {
    let mut all: Vec<(f64, usize)> = x
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = vec![(0usize, 0.0f64); n_classes];
    for &(d, i) in all.iter().take(k) {
        votes[y[i]].0 += 1;
        votes[y[i]].1 += d.sqrt();
    }
    let mut best = 0;
    for c in 1..n_classes {
        let (v, d) = votes[c];
        let (bv, bd) = votes[best];
        if v > bv || (v == bv && d < bd) {
            best = c;
        }
    }
    best
}

/// Every midpoint split of every feature with its weighted Gini impurity.
pub fn gini_candidates(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Vec<(usize, f64, f64)> {
    let n = x.len();
    let gini = |rows: &[usize]| {
        if rows.is_empty() {
            return 0.0;
        }
        let mut c = vec![0.0; n_classes];
        for &r in rows {
            c[y[r]] += 1.0;
        }
        let m = rows.len() as f64;
        1.0 - c.iter().map(|v| (v / m) * (v / m)).sum::<f64>()
    };
    let mut out = Vec::new();
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| x[i][f] <= thr);
            let imp = (l.len() as f64 * gini(&l) + r.len() as f64 * gini(&r)) / n as f64;
            out.push((f, thr, imp));
        }
    }
    out
}
