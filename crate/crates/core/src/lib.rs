//! MQTT-aware intrusion detection toolkit.
//!
//! The crate turns pcap captures into three feature abstractions (per packet,
//! unidirectional flow, bidirectional flow), trains classical classifiers on
//! them and evaluates the classifiers with stratified cross-validation.
//!
//! Pipeline, bottom-up:
//!
//! * [`capture`]: pcap reading/writing, Ethernet/IPv4/TCP/UDP decoding and MQTT
//!   fixed-header dissection.
//! * [`features`]: one feature row per decoded packet.
//! * [`flow`]: uniflow and biflow assembly with inter-arrival and length statistics.
//! * [`dataset`]: label rules, feature tables, CSV I/O, hold-out split, z-scoring.
//! * [`classifiers`]: logistic regression, Gaussian naive Bayes, k-NN, CART,
//!   random forest, linear and RBF support vector machines.
//! * [`eval`]: confusion matrices, per-class and weighted metrics, k-fold CV and
//!   report rendering.
//! * [`synth`]: deterministic synthetic captures for the benign and attack scenarios.
//!
//! The learning layers are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below pin the common `f64` instantiations.

pub mod capture;
pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod flow;
pub mod label;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use label::AttackClass;
pub use scalar::Scalar;

/// Feature table with `f64` cells.
pub type Table = dataset::FeatureTable<f64>;
/// Feature table with `f32` cells.
pub type Table32 = dataset::FeatureTable<f32>;
/// Trained model over `f64` features.
pub type Model = classifiers::Model<f64>;
/// Trained model over `f32` features.
pub type Model32 = classifiers::Model<f32>;
/// Standardizer over `f64` features.
pub type Standardizer = dataset::Standardizer<f64>;
