//! Class labels and capture scenarios.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Five-way traffic class. Variant order is the canonical class order used
/// by confusion matrices and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttackClass {
    #[serde(rename = "Benign")]
    Benign,
    #[serde(rename = "Scan_A")]
    ScanA,
    #[serde(rename = "Scan_sU")]
    ScanSU,
    #[serde(rename = "Sparta")]
    Sparta,
    #[serde(rename = "MQTT_BF")]
    MqttBf,
}

impl AttackClass {
    pub const ALL: [AttackClass; 5] = [
        AttackClass::Benign,
        AttackClass::ScanA,
        AttackClass::ScanSU,
        AttackClass::Sparta,
        AttackClass::MqttBf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackClass::Benign => "Benign",
            AttackClass::ScanA => "Scan_A",
            AttackClass::ScanSU => "Scan_sU",
            AttackClass::Sparta => "Sparta",
            AttackClass::MqttBf => "MQTT_BF",
        }
    }

    pub fn is_attack(self) -> bool {
        self != AttackClass::Benign
    }
}

impl fmt::Display for AttackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for AttackClass {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttackClass::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

/// Recorded capture scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "normal")]
    Normal,
    #[serde(rename = "scan_A")]
    ScanA,
    #[serde(rename = "scan_sU")]
    ScanSU,
    #[serde(rename = "sparta")]
    Sparta,
    #[serde(rename = "mqtt_bf")]
    MqttBf,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Normal,
        Scenario::ScanA,
        Scenario::ScanSU,
        Scenario::Sparta,
        Scenario::MqttBf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Normal => "normal",
            Scenario::ScanA => "scan_A",
            Scenario::ScanSU => "scan_sU",
            Scenario::Sparta => "sparta",
            Scenario::MqttBf => "mqtt_bf",
        }
    }

    /// Class assigned to attacker traffic in this scenario.
    pub fn attack_class(self) -> AttackClass {
        match self {
            Scenario::Normal => AttackClass::Benign,
            Scenario::ScanA => AttackClass::ScanA,
            Scenario::ScanSU => AttackClass::ScanSU,
            Scenario::Sparta => AttackClass::Sparta,
            Scenario::MqttBf => AttackClass::MqttBf,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}
