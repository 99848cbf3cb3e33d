use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mqtt_ids::classifiers::ClassifierKind;
use mqtt_ids::dataset::FeatureLevel;
use mqtt_ids::label::Scenario;

#[derive(Debug, Parser)]
#[command(name = "mqtt-ids", version, about = "Packet and flow feature pipeline for MQTT intrusion detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labelled synthetic capture.
    Synth(SynthArgs),
    /// Decode captures into a packet, uniflow or biflow feature CSV.
    Extract(ExtractArgs),
    /// Stratified train/test split of a feature CSV.
    Split(SplitArgs),
    /// Fit a classifier and save it as JSON.
    Train(TrainArgs),
    /// Score a saved model on a feature CSV.
    Evaluate(EvaluateArgs),
    /// Stratified k-fold cross-validation.
    Crossval(CrossvalArgs),
    /// Combine evaluation outputs into accuracy and metric tables.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, env = "MQTT_IDS_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Scenario,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Scenario settings as JSON; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seconds of benign traffic.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub sensors: Option<usize>,
    /// Brute-force attempts.
    #[arg(long)]
    pub attempts: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, value_parser = parse_level)]
    pub level: FeatureLevel,
    /// Repeatable; each input pairs with the `--rules` at the same position.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// One rule file for all inputs, or one per input.
    #[arg(long = "rules", required = true)]
    pub rules: Vec<PathBuf>,
    /// TCP ports dissected as MQTT.
    #[arg(long = "mqtt-port", default_values_t = [1883u16])]
    pub mqtt_ports: Vec<u16>,
    /// Close a flow after this many idle seconds.
    #[arg(long)]
    pub idle_timeout: Option<f64>,
    /// Write the table without address and label-revealing columns.
    #[arg(long)]
    pub drop_leaky: bool,
    #[command(flatten)]
    pub drop: DropArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DropArgs {
    /// Also drop mqtt_messagetype and mqtt_messagelength from packet tables.
    #[arg(long)]
    pub drop_mqtt_header: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 0.75)]
    pub train_fraction: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Hyperparameters as JSON; flags below override it.
    #[arg(long)]
    pub hyper: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "svm-c")]
    pub svm_c: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Override the per-classifier standardisation default.
    #[arg(long)]
    pub standardize: Option<bool>,
    #[command(flatten)]
    pub drop: DropArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = parse_kind)]
    pub model: ClassifierKind,
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub params: ModelArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Saved model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[arg(long, value_parser = parse_kind)]
    pub model: ClassifierKind,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub params: ModelArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory of JSON evaluation outputs.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_level(s: &str) -> Result<FeatureLevel, String> {
    s.parse().map_err(|_| "expected packet, uniflow or biflow".to_string())
}

fn parse_kind(s: &str) -> Result<ClassifierKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = ClassifierKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}
