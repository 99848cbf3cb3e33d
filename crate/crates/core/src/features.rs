//! Per-packet feature rows.

use serde::{Deserialize, Serialize};

use crate::capture::ParsedPacket;
use crate::dataset::{FeatureLevel, FeatureRow, LabelQuery, LabelRuleSet, Value};
use crate::label::AttackClass;

/// Packet-level feature columns in output order.
pub const PACKET_COLUMNS: [&str; 29] = [
    "ip_src",
    "ip_dest",
    "protocol",
    "ttl",
    "ip_len",
    "ip_flag_df",
    "ip_flag_mf",
    "ip_flag_rb",
    "prt_src",
    "prt_dst",
    "tcp_flag_res",
    "tcp_flag_ns",
    "tcp_flag_cwr",
    "tcp_flag_ecn",
    "tcp_flag_urg",
    "tcp_flag_ack",
    "tcp_flag_push",
    "tcp_flag_reset",
    "tcp_flag_syn",
    "tcp_flag_fin",
    "mqtt_messagetype",
    "mqtt_messagelength",
    "mqtt_flag_uname",
    "mqtt_flag_passwd",
    "mqtt_flag_retain",
    "mqtt_flag_qos",
    "mqtt_flag_willflag",
    "mqtt_flag_clean",
    "mqtt_flag_reserved",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketFeatureRecord {
    pub ip_src: String,
    pub ip_dest: String,
    pub protocol: String,
    pub ttl: u8,
    pub ip_len: u16,
    pub ip_flag_df: u8,
    pub ip_flag_mf: u8,
    pub ip_flag_rb: u8,
    pub prt_src: u16,
    pub prt_dst: u16,
    pub tcp_flag_res: u8,
    pub tcp_flag_ns: u8,
    pub tcp_flag_cwr: u8,
    pub tcp_flag_ecn: u8,
    pub tcp_flag_urg: u8,
    pub tcp_flag_ack: u8,
    pub tcp_flag_push: u8,
    pub tcp_flag_reset: u8,
    pub tcp_flag_syn: u8,
    pub tcp_flag_fin: u8,
    pub mqtt_messagetype: u8,
    pub mqtt_messagelength: u32,
    pub mqtt_flag_uname: u8,
    pub mqtt_flag_passwd: u8,
    pub mqtt_flag_retain: u8,
    pub mqtt_flag_qos: u8,
    pub mqtt_flag_willflag: u8,
    pub mqtt_flag_clean: u8,
    pub mqtt_flag_reserved: u8,
    pub is_attack: u8,
    pub class: AttackClass,
}

/// Builds the feature row for one packet. Only the first MQTT message in the
/// segment populates the `mqtt_*` fields.
pub fn extract_packet_features(pkt: &ParsedPacket, labels: &LabelRuleSet) -> PacketFeatureRecord {
    let b = u8::from;
    let f = &pkt.tcp_flags;
    let m = pkt.mqtt_messages.first().copied().unwrap_or_default();
    let (is_attack, class) = labels.label(&LabelQuery::from_packet(pkt));
    PacketFeatureRecord {
        ip_src: pkt.ip_src.to_string(),
        ip_dest: pkt.ip_dest.to_string(),
        protocol: pkt.protocol_name().to_string(),
        ttl: pkt.ttl,
        ip_len: pkt.ip_len,
        ip_flag_df: b(pkt.ip_flag_df),
        ip_flag_mf: b(pkt.ip_flag_mf),
        ip_flag_rb: b(pkt.ip_flag_rb),
        prt_src: pkt.prt_src,
        prt_dst: pkt.prt_dst,
        tcp_flag_res: b(f.res),
        tcp_flag_ns: b(f.ns),
        tcp_flag_cwr: b(f.cwr),
        tcp_flag_ecn: b(f.ecn),
        tcp_flag_urg: b(f.urg),
        tcp_flag_ack: b(f.ack),
        tcp_flag_push: b(f.push),
        tcp_flag_reset: b(f.reset),
        tcp_flag_syn: b(f.syn),
        tcp_flag_fin: b(f.fin),
        mqtt_messagetype: m.message_type,
        mqtt_messagelength: m.message_length,
        mqtt_flag_uname: b(m.flag_uname),
        mqtt_flag_passwd: b(m.flag_passwd),
        mqtt_flag_retain: b(m.flag_retain),
        mqtt_flag_qos: m.flag_qos,
        mqtt_flag_willflag: b(m.flag_willflag),
        mqtt_flag_clean: b(m.flag_clean),
        mqtt_flag_reserved: b(m.flag_reserved),
        is_attack,
        class,
    }
}

pub fn extract_all(packets: &[ParsedPacket], labels: &LabelRuleSet) -> Vec<PacketFeatureRecord> {
    packets.iter().map(|p| extract_packet_features(p, labels)).collect()
}

impl FeatureRow for PacketFeatureRecord {
    const LEVEL: FeatureLevel = FeatureLevel::Packet;

    fn values(&self) -> Vec<Value> {
        let n = |x: f64| Value::Num(x);
        vec![
            Value::Text(self.ip_src.clone()),
            Value::Text(self.ip_dest.clone()),
            Value::Text(self.protocol.clone()),
            n(self.ttl.into()),
            n(self.ip_len.into()),
            n(self.ip_flag_df.into()),
            n(self.ip_flag_mf.into()),
            n(self.ip_flag_rb.into()),
            n(self.prt_src.into()),
            n(self.prt_dst.into()),
            n(self.tcp_flag_res.into()),
            n(self.tcp_flag_ns.into()),
            n(self.tcp_flag_cwr.into()),
            n(self.tcp_flag_ecn.into()),
            n(self.tcp_flag_urg.into()),
            n(self.tcp_flag_ack.into()),
            n(self.tcp_flag_push.into()),
            n(self.tcp_flag_reset.into()),
            n(self.tcp_flag_syn.into()),
            n(self.tcp_flag_fin.into()),
            n(self.mqtt_messagetype.into()),
            n(self.mqtt_messagelength.into()),
            n(self.mqtt_flag_uname.into()),
            n(self.mqtt_flag_passwd.into()),
            n(self.mqtt_flag_retain.into()),
            n(self.mqtt_flag_qos.into()),
            n(self.mqtt_flag_willflag.into()),
            n(self.mqtt_flag_clean.into()),
            n(self.mqtt_flag_reserved.into()),
        ]
    }

    fn label(&self) -> (u8, AttackClass) {
        (self.is_attack, self.class)
    }
}

#[cfg(test)]
mod tests {
    use std::net::Ipv4Addr;

    use super::*;
    use crate::capture::craft::{self, tcp_flags, Ipv4Header, TcpHeader};
    use crate::capture::{parse_packet, PacketConfig, RawFrame, TsResolution};
    use crate::label::Scenario;

    const ATTACKER: Ipv4Addr = Ipv4Addr::new(192, 168, 2, 66);
    const BROKER: Ipv4Addr = Ipv4Addr::new(192, 168, 2, 10);

    fn parse(data: Vec<u8>) -> ParsedPacket {
        let frame = RawFrame {
            ts_sec: 1,
            ts_frac: 0,
            resolution: TsResolution::Micro,
            captured_len: data.len() as u32,
            original_len: data.len() as u32,
            data,
        };
        parse_packet(&frame, &PacketConfig::default()).unwrap().unwrap()
    }

    #[test]
    fn udp_packet_has_zero_tcp_and_mqtt_fields() {
        let ip = Ipv4Header::new(Ipv4Addr::new(192, 168, 2, 20), Ipv4Addr::new(192, 168, 2, 21));
        let r = extract_packet_features(&parse(craft::udp_frame(&ip, 5004, 5004, &[1; 1200])), &LabelRuleSet::normal());
        assert_eq!(r.protocol, "UDP");
        let v = r.values();
        // tcp_flag_* and mqtt_* columns are all zero
        for col in 10..29 {
            assert_eq!(v[col], Value::Num(0.0), "column {}", PACKET_COLUMNS[col]);
        }
        assert_eq!((r.is_attack, r.class), (0, AttackClass::Benign));
    }

    #[test]
    fn connect_flags_and_label() {
        let ip = Ipv4Header::new(ATTACKER, BROKER);
        let connect = [0x10, 0x0C, 0x00, 0x04, 0x4D, 0x51, 0x54, 0x54, 0x04, 0xC2, 0x00, 0x3C, 0x00, 0x00];
        let f = craft::tcp_frame(&ip, &TcpHeader::new(50000, 1883, tcp_flags::PSH | tcp_flags::ACK), &connect);
        let rules = LabelRuleSet::attack(Scenario::MqttBf, [ATTACKER]).unwrap();
        let r = extract_packet_features(&parse(f), &rules);
        assert_eq!(r.mqtt_messagetype, 1);
        assert_eq!(r.mqtt_messagelength, 12);
        assert_eq!((r.mqtt_flag_uname, r.mqtt_flag_passwd, r.mqtt_flag_clean), (1, 1, 1));
        assert_eq!(r.protocol, "MQTT");
        assert_eq!((r.tcp_flag_push, r.tcp_flag_ack, r.tcp_flag_syn), (1, 1, 0));
        assert_eq!((r.is_attack, r.class), (1, AttackClass::MqttBf));
    }

    #[test]
    fn first_mqtt_message_wins() {
        let ip = Ipv4Header::new(BROKER, Ipv4Addr::new(192, 168, 2, 101));
        let mut payload = vec![0x20, 0x02, 0x00, 0x00]; // CONNACK
        payload.extend([0x30, 0x03, 0x00, 0x01, b'x']); // PUBLISH
        let p = parse(craft::tcp_frame(&ip, &TcpHeader::new(1883, 40001, tcp_flags::ACK), &payload));
        assert_eq!(p.mqtt_messages.len(), 2);
        let r = extract_packet_features(&p, &LabelRuleSet::normal());
        assert_eq!((r.mqtt_messagetype, r.mqtt_messagelength), (2, 2));
    }

    #[test]
    fn value_count_matches_schema() {
        let ip = Ipv4Header::new(BROKER, ATTACKER);
        let r = extract_packet_features(&parse(craft::tcp_frame(&ip, &TcpHeader::new(1, 2, 0), &[])), &LabelRuleSet::normal());
        assert_eq!(r.values().len(), PACKET_COLUMNS.len());
    }
}
