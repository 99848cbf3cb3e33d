//! MQTT 3.1 / 3.1.1 fixed-header dissection and encoding.
//!
//! Only the fixed header of each control packet is decoded, plus the
//! connect-flags byte of CONNECT packets. Packets are taken back to back from
//! a single TCP segment payload; a trailing partial packet is dropped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CONNECT: u8 = 1;
pub const CONNACK: u8 = 2;
pub const PUBLISH: u8 = 3;
pub const PUBACK: u8 = 4;
pub const SUBSCRIBE: u8 = 8;
pub const PINGREQ: u8 = 12;
pub const DISCONNECT: u8 = 14;

/// Largest value representable by the four-byte remaining-length field.
pub const MAX_REMAINING_LENGTH: u32 = 268_435_455;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MqttMessage {
    pub message_type: u8,
    /// Decoded remaining length (variable header plus payload).
    pub message_length: u32,
    pub flag_uname: bool,
    pub flag_passwd: bool,
    pub flag_retain: bool,
    pub flag_qos: u8,
    pub flag_willflag: bool,
    pub flag_clean: bool,
    pub flag_reserved: bool,
}

impl MqttMessage {
    pub fn new(message_type: u8, message_length: u32) -> Self {
        MqttMessage { message_type, message_length, ..Default::default() }
    }

    /// Length on the wire: fixed header byte, remaining-length field, body.
    pub fn wire_len(&self) -> usize {
        1 + remaining_length_size(self.message_length) + self.message_length as usize
    }

    pub fn connect_flags_byte(&self) -> u8 {
        (u8::from(self.flag_uname) << 7)
            | (u8::from(self.flag_passwd) << 6)
            | (u8::from(self.flag_retain) << 5)
            | ((self.flag_qos & 0x3) << 3)
            | (u8::from(self.flag_willflag) << 2)
            | (u8::from(self.flag_clean) << 1)
            | u8::from(self.flag_reserved)
    }

    fn has_connect_flags(&self) -> bool {
        self.connect_flags_byte() != 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum VarintError {
    #[error("remaining length field is incomplete")]
    Incomplete,
    #[error("remaining length field uses more than four bytes")]
    TooLong,
    #[error("value {0} exceeds the remaining-length maximum")]
    OutOfRange(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MqttEncodeError {
    #[error("message type {0} outside 1..=14")]
    BadType(u8),
    #[error("qos {0} outside 0..=2")]
    BadQos(u8),
    #[error("connect flags set on non-CONNECT message type {0}")]
    FlagsOnNonConnect(u8),
    #[error("CONNECT body needs at least {min} bytes, message_length is {got}")]
    ConnectTooShort { min: u32, got: u32 },
    #[error("body length {body} does not match message_length {declared}")]
    BodyLength { body: usize, declared: u32 },
    #[error(transparent)]
    Varint(#[from] VarintError),
}

pub fn remaining_length_size(value: u32) -> usize {
    match value {
        0..=127 => 1,
        128..=16_383 => 2,
        16_384..=2_097_151 => 3,
        _ => 4,
    }
}

pub fn encode_remaining_length(mut value: u32, out: &mut Vec<u8>) -> Result<(), VarintError> {
    if value > MAX_REMAINING_LENGTH {
        return Err(VarintError::OutOfRange(value));
    }
    loop {
        let mut byte = (value % 128) as u8;
        value /= 128;
        if value > 0 {
            byte |= 0x80;
        }
        out.push(byte);
        if value == 0 {
            return Ok(());
        }
    }
}

/// Decodes a remaining-length field, returning the value and bytes consumed.
pub fn decode_remaining_length(bytes: &[u8]) -> Result<(u32, usize), VarintError> {
    let mut value: u32 = 0;
    let mut multiplier: u32 = 1;
    for i in 0..4 {
        let byte = *bytes.get(i).ok_or(VarintError::Incomplete)?;
        value += u32::from(byte & 0x7f) * multiplier;
        if byte & 0x80 == 0 {
            return Ok((value, i + 1));
        }
        multiplier *= 128;
    }
    Err(VarintError::TooLong)
}

/// Result of scanning one segment payload.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MqttScan {
    pub messages: Vec<MqttMessage>,
    /// Bytes consumed by the decoded messages.
    pub consumed: usize,
    /// Bytes left over (partial or undecodable trailing data).
    pub trailing: usize,
}

fn fixed_header_flags(message_type: u8) -> u8 {
    match message_type {
        6 | 8 | 10 => 0x2,
        _ => 0,
    }
}

fn decode_one(buf: &[u8]) -> Option<(MqttMessage, usize)> {
    let first = *buf.first()?;
    let message_type = first >> 4;
    if !(1..=14).contains(&message_type) {
        return None;
    }
    let (length, n) = decode_remaining_length(&buf[1..]).ok()?;
    let start = 1 + n;
    let end = start.checked_add(length as usize)?;
    let body = buf.get(start..end)?;
    let mut msg = MqttMessage::new(message_type, length);
    if message_type == CONNECT {
        // protocol name (length-prefixed), protocol level, connect flags
        let name_len = usize::from(u16::from_be_bytes([*body.first()?, *body.get(1)?]));
        let flags = *body.get(2 + name_len + 1)?;
        let qos = (flags >> 3) & 0x3;
        if qos > 2 {
            return None;
        }
        msg.flag_uname = flags & 0x80 != 0;
        msg.flag_passwd = flags & 0x40 != 0;
        msg.flag_retain = flags & 0x20 != 0;
        msg.flag_qos = qos;
        msg.flag_willflag = flags & 0x04 != 0;
        msg.flag_clean = flags & 0x02 != 0;
        msg.flag_reserved = flags & 0x01 != 0;
    }
    Some((msg, end))
}

/// Decodes consecutive control packets until the first undecodable byte.
pub fn scan_mqtt_stream(payload: &[u8]) -> MqttScan {
    let mut scan = MqttScan::default();
    let mut pos = 0;
    while pos < payload.len() {
        match decode_one(&payload[pos..]) {
            Some((msg, used)) => {
                scan.messages.push(msg);
                pos += used;
            }
            None => break,
        }
    }
    scan.consumed = pos;
    scan.trailing = payload.len() - pos;
    scan
}

pub fn parse_mqtt_stream(payload: &[u8]) -> Vec<MqttMessage> {
    scan_mqtt_stream(payload).messages
}

fn check_header(msg: &MqttMessage) -> Result<(), MqttEncodeError> {
    if !(1..=14).contains(&msg.message_type) {
        return Err(MqttEncodeError::BadType(msg.message_type));
    }
    if msg.flag_qos > 2 {
        return Err(MqttEncodeError::BadQos(msg.flag_qos));
    }
    if msg.message_type != CONNECT && msg.has_connect_flags() {
        return Err(MqttEncodeError::FlagsOnNonConnect(msg.message_type));
    }
    if msg.message_length > MAX_REMAINING_LENGTH {
        return Err(VarintError::OutOfRange(msg.message_length).into());
    }
    Ok(())
}

/// Minimal CONNECT variable header: "MQTT" name, level 4, flags, keep-alive.
const CONNECT_HEADER_LEN: u32 = 10;

/// Encodes `msg` so that decoding yields `msg` again. Body bytes beyond the
/// CONNECT variable header are produced by `fill`.
pub fn encode_message(msg: &MqttMessage, fill: impl FnOnce(&mut [u8])) -> Result<Vec<u8>, MqttEncodeError> {
    check_header(msg)?;
    let mut body = Vec::with_capacity(msg.message_length as usize);
    if msg.message_type == CONNECT {
        if msg.message_length < CONNECT_HEADER_LEN {
            return Err(MqttEncodeError::ConnectTooShort { min: CONNECT_HEADER_LEN, got: msg.message_length });
        }
        body.extend_from_slice(&[0x00, 0x04, b'M', b'Q', b'T', b'T', 0x04, msg.connect_flags_byte(), 0x00, 0x3c]);
    }
    let start = body.len();
    body.resize(msg.message_length as usize, 0);
    fill(&mut body[start..]);
    encode_raw(msg.message_type, &body)
}

/// Frames an arbitrary body as an MQTT control packet of type `message_type`.
pub fn encode_raw(message_type: u8, body: &[u8]) -> Result<Vec<u8>, MqttEncodeError> {
    if !(1..=14).contains(&message_type) {
        return Err(MqttEncodeError::BadType(message_type));
    }
    let len = u32::try_from(body.len()).map_err(|_| VarintError::OutOfRange(u32::MAX))?;
    let mut out = Vec::with_capacity(body.len() + 5);
    out.push((message_type << 4) | fixed_header_flags(message_type));
    encode_remaining_length(len, &mut out)?;
    out.extend_from_slice(body);
    Ok(out)
}

/// Builds a complete CONNECT packet with client id and optional credentials.
pub fn encode_connect(
    client_id: &str,
    username: Option<&str>,
    password: Option<&[u8]>,
    clean_session: bool,
    keep_alive: u16,
) -> Result<Vec<u8>, MqttEncodeError> {
    let mut flags = 0u8;
    if username.is_some() {
        flags |= 0x80;
    }
    if password.is_some() {
        flags |= 0x40;
    }
    if clean_session {
        flags |= 0x02;
    }
    let mut body = vec![0x00, 0x04, b'M', b'Q', b'T', b'T', 0x04, flags];
    body.extend_from_slice(&keep_alive.to_be_bytes());
    let mut push_field = |b: &[u8]| {
        body.extend_from_slice(&(b.len() as u16).to_be_bytes());
        body.extend_from_slice(b);
    };
    push_field(client_id.as_bytes());
    if let Some(u) = username {
        push_field(u.as_bytes());
    }
    if let Some(p) = password {
        push_field(p);
    }
    encode_raw(CONNECT, &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn publish_fixed_header() {
        let msgs = parse_mqtt_stream(&[0x30, 0x05, 0x00, 0x03, 0x61, 0x62, 0x63]);
        assert_eq!(msgs, vec![MqttMessage::new(PUBLISH, 5)]);
    }

    #[test]
    fn connect_flags_decoded() {
        let bytes = [0x10, 0x0C, 0x00, 0x04, 0x4D, 0x51, 0x54, 0x54, 0x04, 0xC2, 0x00, 0x3C, 0x00, 0x00];
        let scan = scan_mqtt_stream(&bytes);
        assert_eq!(scan.messages.len(), 1);
        let m = scan.messages[0];
        assert_eq!(m.message_type, CONNECT);
        assert_eq!(m.message_length, 12);
        assert!(m.flag_uname && m.flag_passwd && m.flag_clean);
        assert_eq!(m.flag_qos, 0);
        assert!(!m.flag_retain && !m.flag_willflag && !m.flag_reserved);
        assert_eq!(scan.trailing, 0);
    }

    #[test]
    fn connect_example_with_short_body_is_partial() {
        // Remaining length 12 but only 10 body bytes present: dropped as partial.
        let bytes = [0x10, 0x0C, 0x00, 0x04, 0x4D, 0x51, 0x54, 0x54, 0x04, 0xC2, 0x00, 0x3C];
        let scan = scan_mqtt_stream(&bytes);
        assert!(scan.messages.is_empty());
        assert_eq!(scan.trailing, bytes.len());
    }

    #[test]
    fn varint_examples() {
        assert_eq!(decode_remaining_length(&[0xC1, 0x02]), Ok((321, 2)));
        assert_eq!(decode_remaining_length(&[0xff, 0xff, 0xff, 0x7f]), Ok((MAX_REMAINING_LENGTH, 4)));
        assert_eq!(decode_remaining_length(&[0xff, 0xff, 0xff, 0xff, 0x01]), Err(VarintError::TooLong));
        assert_eq!(decode_remaining_length(&[0x80]), Err(VarintError::Incomplete));
        let mut out = Vec::new();
        assert!(encode_remaining_length(MAX_REMAINING_LENGTH + 1, &mut out).is_err());
    }

    #[test]
    fn varint_boundaries() {
        for v in [0u32, 127, 128, 16_383, 16_384, 2_097_151, 2_097_152, MAX_REMAINING_LENGTH] {
            let mut out = Vec::new();
            encode_remaining_length(v, &mut out).unwrap();
            assert_eq!(out.len(), remaining_length_size(v));
            assert_eq!(decode_remaining_length(&out), Ok((v, out.len())));
        }
    }

    #[test]
    fn stops_at_undecodable_byte() {
        let mut bytes = vec![0xC0, 0x00]; // PINGREQ
        bytes.extend([0xE0, 0x00]); // DISCONNECT
        bytes.extend([0xF0, 0x00, 0x30, 0x00]); // type 15 is reserved
        let scan = scan_mqtt_stream(&bytes);
        assert_eq!(scan.messages.len(), 2);
        assert_eq!(scan.consumed, 4);
        assert_eq!(scan.trailing, 4);
        assert!(parse_mqtt_stream(&[0x00, 0x00]).is_empty());
        assert!(parse_mqtt_stream(&[]).is_empty());
    }

    #[test]
    fn connect_with_qos_three_is_undecodable() {
        let bytes = [0x10, 0x0A, 0x00, 0x04, b'M', b'Q', b'T', b'T', 0x04, 0x18, 0x00, 0x3c];
        assert!(parse_mqtt_stream(&bytes).is_empty());
    }

    #[test]
    fn encode_connect_builder() {
        let bytes = encode_connect("sensor-1", Some("user"), Some(b"secret"), true, 60).unwrap();
        let msgs = parse_mqtt_stream(&bytes);
        assert_eq!(msgs.len(), 1);
        assert!(msgs[0].flag_uname && msgs[0].flag_passwd && msgs[0].flag_clean);
        assert_eq!(msgs[0].wire_len(), bytes.len());
    }

    #[test]
    fn encoder_rejects_invalid_messages() {
        let mut m = MqttMessage::new(PUBLISH, 3);
        m.flag_uname = true;
        assert!(matches!(encode_message(&m, |_| {}), Err(MqttEncodeError::FlagsOnNonConnect(3))));
        assert!(encode_message(&MqttMessage::new(0, 0), |_| {}).is_err());
        assert!(encode_message(&MqttMessage::new(CONNECT, 4), |_| {}).is_err());
    }

    fn arb_message() -> impl Strategy<Value = MqttMessage> {
        (1u8..=14, 0u32..20_000, any::<[bool; 6]>(), 0u8..=2).prop_map(|(t, len, f, qos)| {
            let mut m = MqttMessage::new(t, len);
            if t == CONNECT {
                m.message_length = len.max(CONNECT_HEADER_LEN);
                m.flag_uname = f[0];
                m.flag_passwd = f[1];
                m.flag_retain = f[2];
                m.flag_willflag = f[3];
                m.flag_clean = f[4];
                m.flag_reserved = f[5];
                m.flag_qos = qos;
            }
            m
        })
    }

    proptest! {
        #[test]
        fn varint_round_trip(v in 0u32..=MAX_REMAINING_LENGTH) {
            let mut out = Vec::new();
            encode_remaining_length(v, &mut out).unwrap();
            prop_assert_eq!(decode_remaining_length(&out), Ok((v, out.len())));
        }

        #[test]
        fn encode_parse_concatenated(msgs in prop::collection::vec(arb_message(), 1..5), fill in any::<u8>()) {
            let mut bytes = Vec::new();
            for m in &msgs {
                bytes.extend(encode_message(m, |b| b.fill(fill)).unwrap());
            }
            prop_assert_eq!(parse_mqtt_stream(&bytes), msgs);
        }

        #[test]
        fn never_overreads(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
            let scan = scan_mqtt_stream(&bytes);
            prop_assert_eq!(scan.consumed + scan.trailing, bytes.len());
            let total: usize = scan.messages.iter().map(|m| m.wire_len()).sum();
            prop_assert_eq!(total, scan.consumed);
        }
    }
}
