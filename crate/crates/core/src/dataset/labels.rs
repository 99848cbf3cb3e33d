use std::collections::BTreeSet;
use std::fs;
use std::net::Ipv4Addr;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::capture::ParsedPacket;
use crate::label::{AttackClass, Scenario};

/// Optional constraints ANDed with the attacker-address match.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraPredicates {
    /// Either port must be in this set (empty = any port).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ports: Vec<u16>,
    /// IP protocol number (6 = TCP, 17 = UDP).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proto: Option<u8>,
}

/// Attacker predicates for one capture scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelRuleSet {
    pub scenario: Scenario,
    pub attacker_ips: BTreeSet<Ipv4Addr>,
    pub attack_class: AttackClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra_predicates: Option<ExtraPredicates>,
}

#[derive(Deserialize)]
struct RawRules {
    scenario: Scenario,
    #[serde(default)]
    attacker_ips: Vec<Ipv4Addr>,
    attack_class: Option<AttackClass>,
    #[serde(default)]
    extra_predicates: Option<ExtraPredicates>,
}

impl<'de> Deserialize<'de> for LabelRuleSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawRules::deserialize(d)?;
        let rules = LabelRuleSet {
            scenario: raw.scenario,
            attacker_ips: raw.attacker_ips.into_iter().collect(),
            attack_class: raw.attack_class.unwrap_or_else(|| raw.scenario.attack_class()),
            extra_predicates: raw.extra_predicates,
        };
        rules.validate().map_err(serde::de::Error::custom)?;
        Ok(rules)
    }
}

impl LabelRuleSet {
    pub fn normal() -> Self {
        LabelRuleSet {
            scenario: Scenario::Normal,
            attacker_ips: BTreeSet::new(),
            attack_class: AttackClass::Benign,
            extra_predicates: None,
        }
    }

    pub fn attack(scenario: Scenario, attacker_ips: impl IntoIterator<Item = Ipv4Addr>) -> Result<Self, DatasetError> {
        let rules = LabelRuleSet {
            scenario,
            attacker_ips: attacker_ips.into_iter().collect(),
            attack_class: scenario.attack_class(),
            extra_predicates: None,
        };
        rules.validate()?;
        Ok(rules)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidRules(m));
        if self.scenario == Scenario::Normal {
            if !self.attacker_ips.is_empty() {
                return bad("scenario normal must not list attacker addresses".into());
            }
            if self.attack_class != AttackClass::Benign {
                return bad(format!("scenario normal cannot carry attack class {}", self.attack_class));
            }
        } else if self.attack_class == AttackClass::Benign {
            return bad(format!("scenario {} needs an attack class", self.scenario));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self, DatasetError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("label rules serialize")
    }

    /// Labels a record from its endpoints.
    pub fn label(&self, q: &LabelQuery) -> (u8, AttackClass) {
        let ip_hit = self.attacker_ips.contains(&q.ip_src) || self.attacker_ips.contains(&q.ip_dest);
        let extra_ok = match &self.extra_predicates {
            None => true,
            Some(p) => {
                (p.ports.is_empty() || p.ports.contains(&q.prt_src) || p.ports.contains(&q.prt_dst))
                    && p.proto.is_none_or(|proto| proto == q.proto)
            }
        };
        if ip_hit && extra_ok {
            (1, self.attack_class)
        } else {
            (0, AttackClass::Benign)
        }
    }
}

/// Endpoint description used by [`LabelRuleSet::label`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelQuery {
    pub ip_src: Ipv4Addr,
    pub ip_dest: Ipv4Addr,
    pub prt_src: u16,
    pub prt_dst: u16,
    pub proto: u8,
}

impl LabelQuery {
    pub fn from_packet(p: &ParsedPacket) -> Self {
        LabelQuery {
            ip_src: p.ip_src,
            ip_dest: p.ip_dest,
            prt_src: p.prt_src,
            prt_dst: p.prt_dst,
            proto: p.transport.protocol_number(),
        }
    }
}

/// Address-only labeling; extra port/protocol predicates are not consulted.
pub fn apply_label_rules(ip_src: Ipv4Addr, ip_dest: Ipv4Addr, rules: &LabelRuleSet) -> (u8, AttackClass) {
    if rules.attacker_ips.contains(&ip_src) || rules.attacker_ips.contains(&ip_dest) {
        (1, rules.attack_class)
    } else {
        (0, AttackClass::Benign)
    }
}
