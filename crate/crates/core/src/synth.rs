//! Deterministic synthetic captures for the benign and attack scenarios.
//!
//! Every scenario carries the same benign substrate: MQTT sensors that
//! connect to a broker and publish random payloads, plus a camera streaming
//! UDP to a monitor. Attack scenarios overlay traffic from a single attacker
//! address. The generator is a pure function of [`ScenarioConfig`].

use std::collections::HashMap;
use std::net::Ipv4Addr;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capture::craft::{self, tcp_flags as F, Ipv4Header, TcpHeader};
use crate::capture::mqtt::{encode_connect, encode_raw, CONNACK, PUBLISH};
use crate::capture::PcapWriter;
use crate::dataset::LabelRuleSet;
use crate::label::{AttackClass, Scenario};

/// Capture start, seconds since the epoch.
pub const BASE_TIME: u64 = 1_590_000_000;
const MQTT_PORT: u16 = 1883;
const SSH_PORT: u16 = 22;
const CAMERA_PORT: u16 = 5004;
const SSH_BANNER: &[u8] = b"SSH-2.0-OpenSSH_7.6p1 Ubuntu-4ubuntu0.3\r\n";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Seconds of benign traffic.
    pub duration: f64,
    pub sensor_count: usize,
    /// Seconds between a sensor's publishes, drawn uniformly.
    pub sensor_publish_period_range: (f64, f64),
    /// Per-device loss probabilities, assigned round-robin to the sensors and
    /// then the camera. Attacker traffic is never dropped.
    pub drop_rates: Vec<f64>,
    pub broker_ip: Ipv4Addr,
    /// First sensor address; the rest follow consecutively.
    pub first_sensor_ip: Ipv4Addr,
    /// (camera, monitor)
    pub camera_ips: (Ipv4Addr, Ipv4Addr),
    pub camera_rate: f64,
    pub attacker_ip: Ipv4Addr,
    /// Brute-force attempts for `sparta` and `mqtt_bf`.
    pub attack_attempts: usize,
    /// Ports probed by the scans.
    pub scan_ports: (u16, u16),
    /// Source-port pool for client connections. Small on purpose, so that
    /// ports get reused over a long capture.
    pub ephemeral_ports: (u16, u16),
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: Scenario::Normal,
            duration: 60.0,
            sensor_count: 12,
            sensor_publish_period_range: (1.0, 5.0),
            drop_rates: vec![0.002, 0.01, 0.0013],
            broker_ip: Ipv4Addr::new(192, 168, 2, 10),
            first_sensor_ip: Ipv4Addr::new(192, 168, 2, 101),
            camera_ips: (Ipv4Addr::new(192, 168, 2, 20), Ipv4Addr::new(192, 168, 2, 21)),
            camera_rate: 5.0,
            attacker_ip: Ipv4Addr::new(192, 168, 2, 66),
            attack_attempts: 100,
            scan_ports: (1, 1024),
            ephemeral_ports: (49152, 49407),
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        ScenarioConfig { scenario, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if !(self.duration > 0.0 && self.duration < 1e6) {
            return bad(format!("duration {} must be in (0, 1e6) seconds", self.duration));
        }
        if self.sensor_count == 0 || self.sensor_count > 100 {
            return bad(format!("sensor_count {} must be in 1..=100", self.sensor_count));
        }
        let (lo, hi) = self.sensor_publish_period_range;
        if !(lo > 0.0 && lo <= hi) {
            return bad(format!("publish period range ({lo}, {hi}) must satisfy 0 < lo <= hi"));
        }
        if self.drop_rates.is_empty() || self.drop_rates.iter().any(|r| !(0.0..1.0).contains(r)) {
            return bad(format!("drop rates {:?} must be non-empty and in [0, 1)", self.drop_rates));
        }
        if !(self.camera_rate >= 0.0 && self.camera_rate <= 10_000.0) {
            return bad(format!("camera_rate {} must be in [0, 10000]", self.camera_rate));
        }
        if self.scan_ports.0 == 0 || self.scan_ports.0 > self.scan_ports.1 {
            return bad(format!("scan port range {:?} is empty or starts at 0", self.scan_ports));
        }
        if self.ephemeral_ports.0 == 0 || self.ephemeral_ports.0 > self.ephemeral_ports.1 {
            return bad(format!("ephemeral port range {:?} is empty or starts at 0", self.ephemeral_ports));
        }
        let sensors = self.sensor_ips();
        let mut hosts = vec![self.broker_ip, self.camera_ips.0, self.camera_ips.1, self.attacker_ip];
        hosts.extend(&sensors);
        let mut sorted = hosts.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != hosts.len() || u32::from(self.first_sensor_ip).checked_add(self.sensor_count as u32).is_none() {
            return bad("broker, camera, attacker and sensor addresses must be distinct".into());
        }
        Ok(())
    }

    pub fn sensor_ips(&self) -> Vec<Ipv4Addr> {
        let first = u32::from(self.first_sensor_ip);
        (0..self.sensor_count as u32).map(|i| Ipv4Addr::from(first.wrapping_add(i))).collect()
    }

    /// Label rules that reproduce the ground truth.
    pub fn label_rules(&self) -> LabelRuleSet {
        match self.scenario {
            Scenario::Normal => LabelRuleSet::normal(),
            s => LabelRuleSet::attack(s, [self.attacker_ip]).expect("attack scenarios accept an attacker address"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub is_attack: u8,
    pub class: AttackClass,
}

/// Labels aligned with the capture's packets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundTruth(pub Vec<TruthEntry>);

#[derive(Debug, Clone)]
pub struct SynthCapture {
    /// Little-endian microsecond pcap, link type Ethernet.
    pub pcap: Vec<u8>,
    pub truth: GroundTruth,
}

struct Event {
    ts: u64,
    frame: Vec<u8>,
    attack: bool,
}

#[derive(Default)]
struct Emitter {
    events: Vec<Event>,
    ident: HashMap<Ipv4Addr, u16>,
}

impl Emitter {
    fn ip(&mut self, src: Ipv4Addr, dst: Ipv4Addr) -> Ipv4Header {
        let id = self.ident.entry(src).or_insert(u16::from(src.octets()[3]) << 8);
        *id = id.wrapping_add(1);
        Ipv4Header { ident: *id, ..Ipv4Header::new(src, dst) }
    }

    fn push(&mut self, ts: u64, frame: Vec<u8>, attack: bool) {
        self.events.push(Event { ts, frame, attack });
    }
}

/// One TCP connection, tracking sequence numbers for both ends.
struct Conn {
    client: Ipv4Addr,
    server: Ipv4Addr,
    cport: u16,
    sport: u16,
    cseq: u32,
    sseq: u32,
    attack: bool,
    drop_rate: f64,
}

impl Conn {
    fn new(rng: &mut ChaCha8Rng, client: Ipv4Addr, cport: u16, server: Ipv4Addr, sport: u16, attack: bool, drop_rate: f64) -> Self {
        Conn { client, server, cport, sport, cseq: rng.gen(), sseq: rng.gen(), attack, drop_rate }
    }

    fn send(&mut self, em: &mut Emitter, rng: &mut ChaCha8Rng, ts: u64, from_client: bool, flags: u8, payload: &[u8]) {
        let (src, dst, sp, dp) = if from_client {
            (self.client, self.server, self.cport, self.sport)
        } else {
            (self.server, self.client, self.sport, self.cport)
        };
        let (seq, ack) = if from_client { (self.cseq, self.sseq) } else { (self.sseq, self.cseq) };
        let advance = payload.len() as u32 + u32::from(flags & (F::SYN | F::FIN) != 0);
        if from_client {
            self.cseq = self.cseq.wrapping_add(advance);
        } else {
            self.sseq = self.sseq.wrapping_add(advance);
        }
        // the loss draw happens for every packet so the stream stays aligned
        let lost = rng.gen::<f64>() < self.drop_rate;
        if lost {
            return;
        }
        let ip = em.ip(src, dst);
        let tcp = TcpHeader { seq, ack: if flags & F::ACK != 0 { ack } else { 0 }, ..TcpHeader::new(sp, dp, flags) };
        em.push(ts, craft::tcp_frame(&ip, &tcp, payload), self.attack);
    }

    /// SYN, SYN/ACK, ACK. Returns the time after the last packet.
    fn handshake(&mut self, em: &mut Emitter, rng: &mut ChaCha8Rng, mut t: u64) -> u64 {
        self.send(em, rng, t, true, F::SYN, &[]);
        t += latency(rng);
        self.send(em, rng, t, false, F::SYN | F::ACK, &[]);
        t += latency(rng);
        self.send(em, rng, t, true, F::ACK, &[]);
        t
    }

    /// Client-initiated FIN exchange.
    fn close(&mut self, em: &mut Emitter, rng: &mut ChaCha8Rng, mut t: u64) -> u64 {
        self.send(em, rng, t, true, F::FIN | F::ACK, &[]);
        t += latency(rng);
        self.send(em, rng, t, false, F::FIN | F::ACK, &[]);
        t += latency(rng);
        self.send(em, rng, t, true, F::ACK, &[]);
        t
    }
}

/// One-way LAN delay in microseconds.
fn latency(rng: &mut ChaCha8Rng) -> u64 {
    rng.gen_range(150..1500)
}

fn secs(s: f64) -> u64 {
    (s * 1e6).round() as u64
}

fn random_bytes(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    rng.fill(&mut v[..]);
    v
}

fn random_text(rng: &mut ChaCha8Rng, len: usize) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    (0..len).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char).collect()
}

fn actor_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn port_in(rng: &mut ChaCha8Rng, range: (u16, u16)) -> u16 {
    rng.gen_range(range.0..=range.1)
}

/// Publish payload length range for sensor `i`. Ranges shift per sensor.
fn publish_len_range(i: usize) -> RangeInclusive<usize> {
    let lo = 8 + 12 * (i % 16);
    lo..=lo + 40
}

fn sensor(em: &mut Emitter, cfg: &ScenarioConfig, i: usize, ip: Ipv4Addr) {
    let mut rng = actor_rng(cfg.seed, 1 + i as u64);
    let drop = cfg.drop_rates[i % cfg.drop_rates.len()];
    let end = secs(cfg.duration);
    let (plo, phi) = cfg.sensor_publish_period_range;
    let client_id = format!("sensor{i}-{}", random_text(&mut rng, 4 + i % 8));
    let topic = format!("iot/sensor{i}/value");
    let lens = publish_len_range(i);
    let mut t = rng.gen_range(0..secs(phi).max(1));
    while t < end {
        let port = port_in(&mut rng, cfg.ephemeral_ports);
        let mut c = Conn::new(&mut rng, ip, port, cfg.broker_ip, MQTT_PORT, false, drop);
        t = c.handshake(em, &mut rng, t) + latency(&mut rng);
        let connect = encode_connect(&client_id, None, None, true, 60).expect("short client id");
        c.send(em, &mut rng, t, true, F::PSH | F::ACK, &connect);
        t += latency(&mut rng);
        c.send(em, &mut rng, t, false, F::PSH | F::ACK, &encode_raw(CONNACK, &[0x00, 0x00]).expect("fixed body"));
        t += latency(&mut rng);
        c.send(em, &mut rng, t, true, F::ACK, &[]);
        for _ in 0..rng.gen_range(3..=8) {
            t += secs(rng.gen_range(plo..=phi));
            if t >= end {
                break;
            }
            let mut body = (topic.len() as u16).to_be_bytes().to_vec();
            body.extend_from_slice(topic.as_bytes());
            let n = rng.gen_range(lens.clone());
            body.extend(random_bytes(&mut rng, n));
            c.send(em, &mut rng, t, true, F::PSH | F::ACK, &encode_raw(PUBLISH, &body).expect("small publish"));
            t += latency(&mut rng);
            c.send(em, &mut rng, t, false, F::ACK, &[]);
        }
        t += latency(&mut rng);
        t = c.close(em, &mut rng, t);
        t += secs(rng.gen_range(0.5..3.0));
    }
}

fn camera(em: &mut Emitter, cfg: &ScenarioConfig) {
    if cfg.camera_rate <= 0.0 {
        return;
    }
    let mut rng = actor_rng(cfg.seed, 1000);
    let drop = cfg.drop_rates[cfg.sensor_count % cfg.drop_rates.len()];
    let (cam, monitor) = cfg.camera_ips;
    let end = secs(cfg.duration);
    let step = secs(1.0 / cfg.camera_rate).max(1);
    let mut t = rng.gen_range(0..step);
    while t < end {
        let len = rng.gen_range(900..=1400);
        let payload = random_bytes(&mut rng, len);
        if rng.gen::<f64>() >= drop {
            let ip = em.ip(cam, monitor);
            em.push(t, craft::udp_frame(&ip, CAMERA_PORT, CAMERA_PORT, &payload), false);
        }
        t += step - step / 10 + rng.gen_range(0..=step / 5);
    }
}

fn attack_start(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> u64 {
    let d = secs(cfg.duration);
    d / 10 + rng.gen_range(0..=d / 5)
}

fn scan_ports(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Vec<u16> {
    let mut ports: Vec<u16> = (cfg.scan_ports.0..=cfg.scan_ports.1).collect();
    ports.shuffle(rng);
    ports
}

fn scan_a(em: &mut Emitter, cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) {
    let mut t = attack_start(cfg, rng);
    let sport = rng.gen_range(32768..=60999);
    for p in scan_ports(cfg, rng) {
        t += rng.gen_range(300..3000);
        let mut c = Conn::new(rng, cfg.attacker_ip, sport, cfg.broker_ip, p, true, 0.0);
        c.send(em, rng, t, true, F::SYN, &[]);
        let r = t + latency(rng);
        if p == SSH_PORT || p == MQTT_PORT {
            c.send(em, rng, r, false, F::SYN | F::ACK, &[]);
            let r = r + latency(rng);
            c.send(em, rng, r, true, F::RST, &[]);
        } else {
            c.send(em, rng, r, false, F::RST | F::ACK, &[]);
        }
    }
}

fn scan_su(em: &mut Emitter, cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) {
    let mut t = attack_start(cfg, rng);
    let sport = rng.gen_range(32768..=60999);
    for p in scan_ports(cfg, rng) {
        t += rng.gen_range(500..5000);
        let ip = em.ip(cfg.attacker_ip, cfg.broker_ip);
        em.push(t, craft::udp_frame(&ip, sport, p, &[]), true);
    }
}

fn sparta(em: &mut Emitter, cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) {
    let mut t = attack_start(cfg, rng);
    for _ in 0..cfg.attack_attempts {
        let port = port_in(rng, cfg.ephemeral_ports);
        let mut c = Conn::new(rng, cfg.attacker_ip, port, cfg.broker_ip, SSH_PORT, true, 0.0);
        t = c.handshake(em, rng, t) + latency(rng);
        c.send(em, rng, t, false, F::PSH | F::ACK, SSH_BANNER);
        t += latency(rng);
        c.send(em, rng, t, true, F::PSH | F::ACK, b"SSH-2.0-libssh2_1.8.0\r\n");
        for _ in 0..rng.gen_range(2..=4) {
            t += latency(rng);
            let n = rng.gen_range(48..600);
            let payload = random_bytes(rng, n);
            c.send(em, rng, t, true, F::PSH | F::ACK, &payload);
            t += latency(rng);
            let n = rng.gen_range(48..600);
            let payload = random_bytes(rng, n);
            c.send(em, rng, t, false, F::PSH | F::ACK, &payload);
        }
        t += latency(rng);
        t = c.close(em, rng, t);
        t += rng.gen_range(20_000..400_000);
    }
}

fn mqtt_bf(em: &mut Emitter, cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) {
    let mut t = attack_start(cfg, rng);
    for _ in 0..cfg.attack_attempts {
        let port = port_in(rng, cfg.ephemeral_ports);
        let mut c = Conn::new(rng, cfg.attacker_ip, port, cfg.broker_ip, MQTT_PORT, true, 0.0);
        t = c.handshake(em, rng, t) + latency(rng);
        let (cl, ul, pl) = (rng.gen_range(1..=6), rng.gen_range(3..=8), rng.gen_range(4..=10));
        let id = random_text(rng, cl);
        let user = random_text(rng, ul);
        let pass = random_text(rng, pl);
        let connect = encode_connect(&id, Some(&user), Some(pass.as_bytes()), true, 60).expect("short fields");
        c.send(em, rng, t, true, F::PSH | F::ACK, &connect);
        t += latency(rng);
        // 5 = not authorized
        c.send(em, rng, t, false, F::PSH | F::ACK, &encode_raw(CONNACK, &[0x00, 0x05]).expect("fixed body"));
        t += latency(rng);
        c.send(em, rng, t, true, F::ACK, &[]);
        t += latency(rng);
        t = c.close(em, rng, t);
        t += rng.gen_range(20_000..300_000);
    }
}

/// Builds the capture and its per-packet labels.
pub fn generate_capture(cfg: &ScenarioConfig) -> Result<SynthCapture, SynthError> {
    cfg.validate()?;
    let mut em = Emitter::default();
    for (i, ip) in cfg.sensor_ips().into_iter().enumerate() {
        sensor(&mut em, cfg, i, ip);
    }
    camera(&mut em, cfg);
    let mut rng = actor_rng(cfg.seed, 2000);
    match cfg.scenario {
        Scenario::Normal => {}
        Scenario::ScanA => scan_a(&mut em, cfg, &mut rng),
        Scenario::ScanSU => scan_su(&mut em, cfg, &mut rng),
        Scenario::Sparta => sparta(&mut em, cfg, &mut rng),
        Scenario::MqttBf => mqtt_bf(&mut em, cfg, &mut rng),
    }
    let mut events = em.events;
    // stable: equal timestamps keep generation order
    events.sort_by_key(|e| e.ts);
    let mut writer = PcapWriter::new(Vec::new())?;
    let mut truth = Vec::with_capacity(events.len());
    let attack = cfg.scenario.attack_class();
    let mut last: Option<u64> = None;
    for e in &events {
        let ts = match last {
            Some(p) if e.ts <= p => p + 1,
            _ => e.ts,
        };
        last = Some(ts);
        let sec = BASE_TIME + ts / 1_000_000;
        let sec = u32::try_from(sec).map_err(|_| SynthError::InvalidConfig("capture runs past 2106".into()))?;
        writer.write_frame(sec, (ts % 1_000_000) as u32, &e.frame)?;
        truth.push(if e.attack {
            TruthEntry { is_attack: 1, class: attack }
        } else {
            TruthEntry { is_attack: 0, class: AttackClass::Benign }
        });
    }
    Ok(SynthCapture { pcap: writer.into_inner(), truth: GroundTruth(truth) })
}
