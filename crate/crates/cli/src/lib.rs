//! Command-line front end: synth, extract, split, train, evaluate, crossval and report.

mod args;
mod manifest;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;
use log::{info, warn};
use mqtt_ids::capture::{decode_capture, CaptureError, PacketConfig};
use mqtt_ids::classifiers::{self, ClassifierError, ClassifierSpec, Hyperparameters};
use mqtt_ids::dataset::{
    drop_leaky_columns, read_feature_csv, split_holdout, write_feature_csv, DatasetError, DropPolicy, FeatureLevel,
    LabelRuleSet,
};
use mqtt_ids::eval::{self, render_report, render_text, EvalError, EvalReport, ReportEntry};
use mqtt_ids::features::extract_all;
use mqtt_ids::flow::{assemble_biflows, assemble_uniflows, FlowConfig, FlowError};
use mqtt_ids::synth::{generate_capture, ScenarioConfig, SynthError};
use mqtt_ids::{Model, Table};
use thiserror::Error;

pub use args::{Cli, Command, Format};
pub use manifest::{sidecar, Envelope, RunManifest};

use args::{
    CrossvalArgs, DropArgs, EvaluateArgs, ExtractArgs, ModelArgs, ReportArgs, SplitArgs, SynthArgs, TrainArgs,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(#[from] mqtt_ids::Error),
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.into())
            }
        }
    )*};
}

data_error!(CaptureError, FlowError, DatasetError, EvalError, SynthError, std::io::Error, serde_json::Error);

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::InvalidHyperparameter(m) => CliError::Usage(m),
            e => CliError::Data(e.into()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

/// Runs with the process's standard streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// `argv[0]` is the program name. Results without `--out` go to `out`,
/// diagnostics to `err`.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Split(a) => split(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a, out),
        Command::Crossval(a) => crossval(a, out),
        Command::Report(a) => report(a, out),
    }
}

fn write_json<V: serde::Serialize>(path: &Path, v: &V) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn write_manifest(out: &Path, m: &RunManifest) -> Result<(), CliError> {
    write_json(&sidecar(out, ".manifest.json"), m)
}

/// Text results have no room for the manifest, so a file target gets a sidecar.
fn emit(out: &mut dyn Write, path: Option<&Path>, format: Format, m: &RunManifest, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            fs::write(p, text)?;
            if format == Format::Text {
                write_manifest(p, m)?;
            }
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_str::<ScenarioConfig>(&fs::read_to_string(p)?)?,
        None => ScenarioConfig::default(),
    };
    cfg.scenario = a.scenario;
    cfg.seed = a.seed.seed;
    if let Some(d) = a.duration {
        cfg.duration = d;
    }
    if let Some(n) = a.sensors {
        cfg.sensor_count = n;
    }
    if let Some(n) = a.attempts {
        cfg.attack_attempts = n;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let cap = generate_capture(&cfg)?;
    let truth = sidecar(&a.out, ".truth.json");
    let rules = sidecar(&a.out, ".rules.json");
    fs::write(&a.out, &cap.pcap)?;
    write_json(&truth, &cap.truth)?;
    fs::write(&rules, cfg.label_rules().to_json() + "\n")?;
    info!("{}: {} packets", a.out.display(), cap.truth.0.len());

    let mut m = RunManifest::new("synth").output(&a.out).output(&truth).output(&rules);
    if let Some(p) = &a.config {
        m = m.input(p);
    }
    m.seed = Some(cfg.seed);
    m.settings = serde_json::to_value(&cfg)?;
    write_manifest(&a.out, &m)
}

fn extract(a: ExtractArgs) -> Result<(), CliError> {
    if a.rules.len() != 1 && a.rules.len() != a.inputs.len() {
        return Err(CliError::Usage(format!(
            "--rules given {} times; pass it once or once per --input ({})",
            a.rules.len(),
            a.inputs.len()
        )));
    }
    let pcfg = PacketConfig { mqtt_ports: a.mqtt_ports.iter().copied().collect::<BTreeSet<_>>() };
    let fcfg = FlowConfig { idle_timeout: a.idle_timeout };
    let mut tables = Vec::with_capacity(a.inputs.len());
    for (i, input) in a.inputs.iter().enumerate() {
        let rules = LabelRuleSet::load(&a.rules[if a.rules.len() == 1 { 0 } else { i }])?;
        let (pkts, stats) = decode_capture(input, &pcfg)?;
        info!(
            "{}: {} frames, {} packets, {} skipped, {} malformed",
            input.display(),
            stats.frames,
            stats.packets,
            stats.skipped,
            stats.malformed
        );
        if stats.malformed > 0 {
            warn!("{}: {} malformed frames were dropped", input.display(), stats.malformed);
        }
        let source = input.file_stem().map_or_else(|| input.display().to_string(), |s| s.to_string_lossy().into_owned());
        let t = match a.level {
            FeatureLevel::Packet => Table::from_records(source, &extract_all(&pkts, &rules)),
            FeatureLevel::Uniflow => Table::from_records(source, &assemble_uniflows(&pkts, &rules, &fcfg)),
            FeatureLevel::Biflow => Table::from_records(source, &assemble_biflows(&pkts, &rules, &fcfg)),
        };
        info!("{}: {} {} rows", input.display(), t.n_rows(), a.level);
        tables.push(t);
    }
    let refs: Vec<&Table> = tables.iter().collect();
    let mut table = Table::concat(&refs)?;
    let policy = drop_policy(&a.drop);
    if a.drop_leaky {
        table = drop_leaky_columns(&table, policy)?;
    }
    write_feature_csv(&table, &a.out)?;

    let mut m = RunManifest::new("extract").output(&a.out);
    m.inputs = a.inputs.iter().map(|p| manifest::path_str(p)).collect();
    m.rules = a.rules.iter().map(|p| manifest::path_str(p)).collect();
    m.level = Some(a.level);
    m.settings = serde_json::json!({
        "mqtt_ports": pcfg.mqtt_ports,
        "idle_timeout": a.idle_timeout,
        "drop_leaky": a.drop_leaky,
        "drop_policy": policy,
    });
    write_manifest(&a.out, &m)
}

fn split(a: SplitArgs) -> Result<(), CliError> {
    if !(a.train_fraction > 0.0 && a.train_fraction < 1.0) {
        return Err(CliError::Usage(format!("--train-fraction {} must lie in (0, 1)", a.train_fraction)));
    }
    let t: Table = read_feature_csv(&a.features)?;
    let (train, test) = split_holdout(&t, a.train_fraction, a.seed.seed)?;
    write_feature_csv(&train, &a.train_out)?;
    write_feature_csv(&test, &a.test_out)?;
    let mut m = RunManifest::new("split").input(&a.features).output(&a.train_out).output(&a.test_out);
    m.level = Some(t.level());
    m.seed = Some(a.seed.seed);
    m.settings = serde_json::json!({ "train_fraction": a.train_fraction });
    write_manifest(&a.train_out, &m)?;
    write_manifest(&a.test_out, &m)
}

fn drop_policy(d: &DropArgs) -> DropPolicy {
    DropPolicy { keep_mqtt_header: !d.drop_mqtt_header }
}

/// Reads a feature CSV, removing identifying columns when present.
fn load_training_table(path: &Path, d: &DropArgs) -> Result<Table, CliError> {
    let t: Table = read_feature_csv(path)?;
    if t.has_text_columns() {
        Ok(drop_leaky_columns(&t, drop_policy(d))?)
    } else {
        Ok(t)
    }
}

fn build_spec(kind: classifiers::ClassifierKind, seed: u64, p: &ModelArgs) -> Result<ClassifierSpec, CliError> {
    let mut h = match &p.hyper {
        Some(path) => serde_json::from_str::<Hyperparameters>(&fs::read_to_string(path)?)?,
        None => Hyperparameters::default(),
    };
    if let Some(k) = p.k {
        h.knn_k = k;
    }
    if let Some(n) = p.trees {
        h.rf_trees = n;
    }
    if p.max_depth.is_some() {
        h.dt_max_depth = p.max_depth;
    }
    if let Some(l) = p.lambda {
        h.lr_lambda = l;
    }
    if let Some(c) = p.svm_c {
        h.svm_c = c;
    }
    if p.gamma.is_some() {
        h.svm_gamma = p.gamma;
    }
    if p.standardize.is_some() {
        h.standardize = p.standardize;
    }
    h.validate()?;
    Ok(ClassifierSpec { kind, hyper: h, seed })
}

fn model_manifest(command: &str, features: &Path, level: FeatureLevel, spec: &ClassifierSpec, p: &ModelArgs) -> RunManifest {
    let mut m = RunManifest::new(command).input(features);
    if let Some(h) = &p.hyper {
        m = m.input(h);
    }
    m.level = Some(level);
    m.classifier = Some(spec.clone());
    m.seed = Some(spec.seed);
    m.settings = serde_json::json!({ "drop_policy": drop_policy(&p.drop) });
    m
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let spec = build_spec(a.model, a.seed.seed, &a.params)?;
    let t = load_training_table(&a.features, &a.params.drop)?;
    let model = classifiers::fit(&spec, &t)?;
    model.save(&a.out)?;
    info!("{}: {} on {} rows, {} features", a.out.display(), a.model.display_name(), t.n_rows(), model.n_features());
    let m = model_manifest("train", &a.features, t.level(), &spec, &a.params).output(&a.out);
    write_manifest(&a.out, &m)
}

fn render_eval(format: Format, env: &Envelope<EvalReport>) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(env)? + "\n",
        Format::Text => eval_text(&env.report),
    })
}

fn evaluate(a: EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = Model::load(&a.model)?;
    let t: Table = read_feature_csv(&a.features)?;
    let report = eval::evaluate(&model, &t)?;
    let mut m = RunManifest::new("evaluate").input(&a.model).input(&a.features);
    m.level = Some(t.level());
    m.classifier = Some(model.spec.clone());
    m.seed = Some(model.spec.seed);
    m.settings = serde_json::json!({ "format": format_name(a.format) });
    if let Some(p) = &a.out {
        m = m.output(p);
    }
    let env = Envelope { manifest: m, report };
    emit(out, a.out.as_deref(), a.format, &env.manifest, &render_eval(a.format, &env)?)
}

fn crossval(a: CrossvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.folds < 2 {
        return Err(CliError::Usage(format!("--folds {} must be at least 2", a.folds)));
    }
    let spec = build_spec(a.model, a.seed.seed, &a.params)?;
    let t = load_training_table(&a.features, &a.params.drop)?;
    let report = eval::cross_validate(&spec, &t, a.folds, a.seed.seed)?;
    info!("{} {}-fold on {}: accuracy {:.2}%", a.model.display_name(), a.folds, t.level(), report.overall_accuracy * 100.0);
    let mut m = model_manifest("crossval", &a.features, t.level(), &spec, &a.params);
    m.settings["folds"] = a.folds.into();
    m.settings["format"] = format_name(a.format).into();
    if let Some(p) = &a.out {
        m = m.output(p);
    }
    let env = Envelope { manifest: m, report };
    emit(out, a.out.as_deref(), a.format, &env.manifest, &render_eval(a.format, &env)?)
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Text => "text",
    }
}

fn pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

fn eval_text(r: &EvalReport) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let name = r.spec.as_ref().map_or("model", |sp| sp.kind.display_name());
    let how = if r.folds > 0 { format!("{}-fold cross-validation", r.folds) } else { "held-out evaluation".into() };
    let _ = writeln!(s, "{name}, {} features, {} rows, {how}", r.level, r.rows);
    let _ = writeln!(s, "Overall accuracy: {}", pct(r.overall_accuracy));
    if let Some(f) = &r.fold_mean {
        let _ = writeln!(s, "Mean fold accuracy: {}", pct(f.accuracy));
    }
    let _ = writeln!(s, "\n{:<16}  {:>10}  {:>10}  {:>10}  {:>8}", "Class", "Recall", "Precision", "F1", "Support");
    for e in &r.per_class {
        let m = &e.metrics;
        let _ = writeln!(
            s,
            "{:<16}  {:>10}  {:>10}  {:>10}  {:>8}",
            e.class.as_str(),
            pct(m.recall),
            pct(m.precision),
            pct(m.f1),
            m.support
        );
    }
    let w = &r.weighted;
    let _ = writeln!(s, "{:<16}  {:>10}  {:>10}  {:>10}", "Weighted avg", pct(w.recall), pct(w.precision), pct(w.f1));
    let _ = writeln!(s, "\nConfusion matrix (rows: truth, columns: predicted)");
    let classes = r.confusion.classes();
    let _ = write!(s, "{:<16}", "");
    for c in classes {
        let _ = write!(s, "  {:>10}", c.as_str());
    }
    let _ = writeln!(s);
    for (c, row) in classes.iter().zip(r.confusion.counts()) {
        let _ = write!(s, "{:<16}", c.as_str());
        for n in row {
            let _ = write!(s, "  {n:>10}");
        }
        let _ = writeln!(s);
    }
    s
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut paths: Vec<_> = fs::read_dir(&a.input)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        name.ends_with(".json") && !name.ends_with(".manifest.json")
    });
    paths.sort();
    if let Some(o) = &a.out {
        paths.retain(|p| p != o);
    }
    let mut entries = Vec::new();
    let mut m = RunManifest::new("report");
    for p in &paths {
        let text = fs::read_to_string(p)?;
        let Ok(env) = serde_json::from_str::<Envelope<EvalReport>>(&text) else {
            info!("{}: not an evaluation output, skipped", p.display());
            continue;
        };
        let name = env.report.spec.as_ref().map_or("model", |s| s.kind.display_name());
        entries.push(ReportEntry::from_eval(name, &env.report));
        m = m.input(p);
    }
    let doc = render_report(&entries)?;
    m.settings = serde_json::json!({ "format": format_name(a.format) });
    if let Some(p) = &a.out {
        m = m.output(p);
    }
    let env = Envelope { manifest: m, report: doc };
    let text = match a.format {
        Format::Text => render_text(&env.report),
        Format::Json => serde_json::to_string_pretty(&env)? + "\n",
    };
    emit(out, a.out.as_deref(), a.format, &env.manifest, &text)
}
