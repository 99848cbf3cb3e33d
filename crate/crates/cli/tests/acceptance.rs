//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a required criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mqtt_ids::capture::mqtt::{
    decode_remaining_length, encode_message, encode_remaining_length, parse_mqtt_stream, remaining_length_size, CONNECT,
    MAX_REMAINING_LENGTH,
};
use mqtt_ids::capture::MqttMessage;
use mqtt_ids::classifiers::{best_split, fit_matrix, logistic_loss_grad, ClassifierKind, ClassifierSpec, Hyperparameters, MaxFeatures};
use mqtt_ids::dataset::{FeatureLevel, LabelRuleSet};
use mqtt_ids::eval::{
    overall_accuracy, per_class_metrics, render_report, weighted_average, ConfusionMatrix, EvalReport, ReportEntry,
    WeightedMetrics,
};
use mqtt_ids::flow::{assemble_biflows, assemble_uniflows, FlowConfig};
use mqtt_ids::label::Scenario;
use mqtt_ids::AttackClass;
use mqtt_ids_cli::{run_with, Envelope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("metric identities", metric_identities),
        ("weighted-average aggregation", weighted_aggregation),
        ("flow oracle equivalence", flow_oracles),
        ("MQTT encode/parse round trip", mqtt_round_trip),
        ("classifier oracles", classifier_oracles),
        ("flow features beat packet features on MQTT_BF", desk_scale_trend),
        ("pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    match std::env::var_os("MQTT_IDS_DATASET") {
        Some(dir) => match full_dataset(Path::new(&dir)) {
            Ok(d) => println!("PASS criterion 8 (optional): full dataset: {d}"),
            Err(e) => println!("FAIL criterion 8 (optional): full dataset: {e}"),
        },
        None => println!("FAIL criterion 8 (optional): full dataset: not run, MQTT_IDS_DATASET is unset"),
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.gen_range(1..=6);
        let mut counts: Vec<Vec<u64>> = (0..k).map(|_| (0..k).map(|_| rng.gen_range(0..=10_000)).collect()).collect();
        // sparse rows and columns exercise the zero-division paths
        if rng.gen_bool(0.3) {
            let z = rng.gen_range(0..k);
            counts.iter_mut().for_each(|r| r[z] = 0);
        }
        if counts.iter().flatten().sum::<u64>() == 0 {
            counts[0][0] = 1;
        }
        let cm = ConfusionMatrix::from_counts((0..k).collect::<Vec<usize>>(), counts).map_err(|e| e.to_string())?;
        let pc = per_class_metrics(&cm);
        let w = weighted_average(&pc);
        let acc = overall_accuracy(&cm).map_err(|e| e.to_string())?;
        worst = worst.max((w.recall - acc).abs());
        ensure!((w.recall - acc).abs() <= 1e-12, "weighted recall {} vs accuracy {acc}", w.recall);
        for (_, m) in &pc {
            let h = if m.precision + m.recall == 0.0 { 0.0 } else { 2.0 * m.precision * m.recall / (m.precision + m.recall) };
            ensure!((m.f1 - h).abs() <= 1e-12, "f1 {} vs harmonic mean {h}", m.f1);
        }
    }
    // a class that is never predicted and never hit scores 0 everywhere
    let cm = ConfusionMatrix::from_counts(vec![AttackClass::Benign, AttackClass::MqttBf], vec![vec![0, 40], vec![0, 60]])
        .map_err(|e| e.to_string())?;
    let benign = per_class_metrics(&cm)[0].1;
    ensure!(
        (benign.precision, benign.recall, benign.f1) == (0.0, 0.0, 0.0),
        "never-predicted class gave {benign:?}"
    );
    Ok(format!("1000 matrices, max |weighted recall - accuracy| = {worst:.1e}"))
}

fn weighted_aggregation() -> Outcome {
    let mut entries = Vec::new();
    for line in include_str!("data/weighted_averages.csv").lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize| f[i].parse::<f64>().map(|v| v / 100.0).map_err(|e| format!("{line}: {e}"));
        let level: FeatureLevel = f[1].parse().map_err(|e| format!("{e}"))?;
        let weighted = WeightedMetrics { recall: num(2)?, precision: num(3)?, f1: num(4)? };
        entries.push(ReportEntry { classifier: f[0].into(), level, accuracy: weighted.recall, per_class: Vec::new(), weighted });
    }
    ensure!(entries.len() == 21, "fixture has {} rows", entries.len());
    let doc = render_report(&entries).map_err(|e| e.to_string())?;
    let want = [(FeatureLevel::Packet, 75.31, 72.37), (FeatureLevel::Uniflow, 93.77, 97.19), (FeatureLevel::Biflow, 98.85, 99.04)];
    let mut got = Vec::new();
    for (level, recall, precision) in want {
        let a = doc.aggregates.iter().find(|a| a.level == level).ok_or(format!("no {level} aggregate"))?;
        let (r, p) = (a.weighted.recall * 100.0, a.weighted.precision * 100.0);
        ensure!(a.classifiers == 7, "{level}: {} classifiers", a.classifiers);
        ensure!((r - recall).abs() <= 0.01, "{level} recall mean {r:.4} vs {recall}");
        ensure!((p - precision).abs() <= 0.01, "{level} precision mean {p:.4} vs {precision}");
        got.push(format!("{level} {r:.2}/{p:.2}"));
    }
    Ok(format!("recall/precision means {}", got.join(", ")))
}

fn flow_oracles() -> Outcome {
    let rules = LabelRuleSet::attack(Scenario::MqttBf, ["10.0.0.3".parse().unwrap()]).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut packets = 0;
    for stream in 0..200 {
        let n = rng.gen_range(0..=1000);
        packets += n;
        let pkts = support::random_stream(&mut rng, n);
        let transport = pkts.iter().filter(|p| support::key_of(p).is_some()).count() as u64;

        let uni = assemble_uniflows(&pkts, &rules, &FlowConfig::default());
        let want = support::oracle_uniflows(&pkts, &rules);
        ensure!(uni.len() == want.len(), "stream {stream}: {} uniflows, oracle {}", uni.len(), want.len());
        for r in &uni {
            let (stats, label) = want.get(&r.key).ok_or(format!("stream {stream}: unexpected key {:?}", r.key))?;
            if let Some(m) = support::stats_mismatch(&r.stats, stats, 1e-9) {
                return Err(format!("stream {stream} uniflow {:?}: {m}", r.key));
            }
            ensure!((r.is_attack, r.class) == *label, "stream {stream}: uniflow label");
        }
        ensure!(uni.iter().map(|r| r.stats.num_pkts).sum::<u64>() == transport, "stream {stream}: uniflow conservation");

        let bi = assemble_biflows(&pkts, &rules, &FlowConfig::default());
        let want = support::oracle_biflows(&pkts, &rules);
        ensure!(bi.len() == want.len(), "stream {stream}: {} biflows, oracle {}", bi.len(), want.len());
        for r in &bi {
            let (fwd, bwd, label) = want.get(&r.key).ok_or(format!("stream {stream}: unexpected key {:?}", r.key))?;
            for (got, exp) in [(&r.fwd, fwd), (&r.bwd, bwd)] {
                if let Some(m) = support::stats_mismatch(got, exp, 1e-9) {
                    return Err(format!("stream {stream} biflow {:?}: {m}", r.key));
                }
            }
            ensure!((r.is_attack, r.class) == *label, "stream {stream}: biflow label");
        }
        ensure!(
            bi.iter().map(|r| r.fwd.num_pkts + r.bwd.num_pkts).sum::<u64>() == transport,
            "stream {stream}: biflow conservation"
        );
    }
    Ok(format!("200 streams, {packets} packets"))
}

fn mqtt_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let big = [127u32, 128, 16_383, 16_384, 2_097_151, 2_097_152];
    for i in 0..10_000 {
        let t = rng.gen_range(1..=14u8);
        let len = if rng.gen_bool(0.01) { big[rng.gen_range(0..big.len())] } else { rng.gen_range(0..20_000) };
        let mut m = MqttMessage::new(t, len);
        if t == CONNECT {
            m.message_length = len.max(10);
            m.flag_uname = rng.gen();
            m.flag_passwd = rng.gen();
            m.flag_retain = rng.gen();
            m.flag_willflag = rng.gen();
            m.flag_clean = rng.gen();
            m.flag_reserved = rng.gen();
            m.flag_qos = rng.gen_range(0..=2);
        }
        let fill: u8 = rng.gen();
        let bytes = encode_message(&m, |b| b.fill(fill)).map_err(|e| format!("packet {i}: {e}"))?;
        ensure!(bytes.len() == m.wire_len(), "packet {i}: wire length");
        let parsed = parse_mqtt_stream(&bytes);
        ensure!(parsed == vec![m], "packet {i}: {m:?} parsed as {parsed:?}");
    }
    let boundaries = [(0u32, 1usize), (127, 1), (128, 2), (16_383, 2), (16_384, 3), (2_097_151, 3), (2_097_152, 4), (268_435_455, 4)];
    for (v, size) in boundaries {
        let mut out = Vec::new();
        encode_remaining_length(v, &mut out).map_err(|e| format!("{v}: {e}"))?;
        ensure!(out.len() == size && remaining_length_size(v) == size, "{v}: encoded in {} bytes", out.len());
        ensure!(decode_remaining_length(&out) == Ok((v, size)), "{v}: decode mismatch");
    }
    ensure!(encode_remaining_length(MAX_REMAINING_LENGTH + 1, &mut Vec::new()).is_err(), "value above the maximum encoded");
    Ok("10000 control packets, 8 varint boundaries".into())
}

const CLASSES: [AttackClass; 3] = [AttackClass::Benign, AttackClass::ScanA, AttackClass::MqttBf];

fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("f{i}")).collect()
}

fn random_data(rng: &mut ChaCha8Rng, n: usize, d: usize, k: usize, grid: bool) -> (Vec<Vec<f64>>, Vec<usize>) {
    let x = (0..n)
        .map(|_| (0..d).map(|_| if grid { rng.gen_range(0..4) as f64 } else { rng.gen_range(-3.0..3.0) }).collect())
        .collect();
    let mut y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    y[0] = 0;
    y[n - 1] = 1;
    (x, y)
}

fn spec(kind: ClassifierKind, hyper: Hyperparameters) -> ClassifierSpec {
    ClassifierSpec { kind, hyper, seed: 7 }
}

fn classifier_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let err = |e: mqtt_ids::classifiers::ClassifierError| e.to_string();

    for round in 0..100 {
        let n = rng.gen_range(2..60);
        let d = rng.gen_range(1..5);
        let k = rng.gen_range(1..=n.min(9));
        let (x, y) = random_data(&mut rng, n, d, 3, round % 2 == 0);
        let h = Hyperparameters { knn_k: k, standardize: Some(false), ..Default::default() };
        let m = fit_matrix(&spec(ClassifierKind::Knn, h), names(d), &x, &y, CLASSES.to_vec()).map_err(err)?;
        for _ in 0..20 {
            let q: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0f64).round()).collect();
            let want = CLASSES[support::knn_oracle(&x, &y, 3, k, &q)];
            ensure!(m.predict_row(&q).map_err(err)?.class == want, "k-NN dataset {round}, query {q:?}");
        }
    }

    let datasets = 3000;
    for round in 0..datasets {
        let n = rng.gen_range(2..=8);
        let d = rng.gen_range(1..=3);
        let k = rng.gen_range(2..=3);
        let (x, y) = random_data(&mut rng, n, d, k, true);
        let cands = support::gini_candidates(&x, &y, 3);
        let rows: Vec<usize> = (0..n).collect();
        let feats: Vec<usize> = (0..d).collect();
        match best_split(&x, &y, 3, &rows, &feats) {
            None => ensure!(cands.is_empty(), "tree dataset {round}: no split found"),
            Some(s) => {
                let min = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
                ensure!((s.impurity - min).abs() < 1e-12, "tree dataset {round}: impurity {} vs {min}", s.impurity);
            }
        }
    }

    for round in 0..20 {
        let (x, y) = random_data(&mut rng, 80, 4, 3, false);
        let h = Hyperparameters { rf_trees: 1, rf_bootstrap: false, rf_max_features: MaxFeatures::All, ..Default::default() };
        let rf = fit_matrix(&spec(ClassifierKind::Rf, h.clone()), names(4), &x, &y, CLASSES.to_vec()).map_err(err)?;
        let dt = fit_matrix(&spec(ClassifierKind::Dt, h), names(4), &x, &y, CLASSES.to_vec()).map_err(err)?;
        for _ in 0..200 {
            let q: Vec<f64> = (0..4).map(|_| rng.gen_range(-4.0..4.0)).collect();
            ensure!(rf.predict_row(&q).map_err(err)? == dt.predict_row(&q).map_err(err)?, "forest dataset {round}");
        }
    }

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (x, y) = random_data(&mut rng, 30, 3, 2, false);
        let s: Vec<f64> = y.iter().map(|&c| if c == 1 { 1.0 } else { -1.0 }).collect();
        let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let (_, gw, gb) = logistic_loss_grad(&x, &s, &w, b, 0.01);
        let loss = |w: &[f64], b: f64| logistic_loss_grad(&x, &s, w, b, 0.01).0;
        let h = 1e-6;
        let mut numeric = Vec::new();
        for j in 0..3 {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[j] += h;
            down[j] -= h;
            numeric.push((loss(&up, b) - loss(&down, b)) / (2.0 * h));
        }
        numeric.push((loss(&w, b + h) - loss(&w, b - h)) / (2.0 * h));
        let analytic: Vec<f64> = gw.iter().copied().chain([gb]).collect();
        let diff = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-8);
        worst = worst.max(diff / scale);
    }
    ensure!(worst <= 1e-5, "LR gradient relative error {worst:.2e}");

    let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let y = [0, 0, 1, 1];
    let h = Hyperparameters { svm_gamma: Some(1.0), svm_c: 10.0, standardize: Some(false), ..Default::default() };
    let m = fit_matrix(&spec(ClassifierKind::SvmRbf, h), names(2), &x, &y, CLASSES[..2].to_vec()).map_err(err)?;
    for (r, &c) in x.iter().zip(&y) {
        ensure!(m.predict_row(r).map_err(err)?.class == CLASSES[c], "RBF SVM misclassifies XOR point {r:?}");
    }
    Ok(format!("k-NN 100 datasets, root splits {datasets} datasets, LR gradient error {worst:.1e}, XOR separated"))
}

/// Runs the command line in-process; panics with its diagnostics on failure.
fn cli(args: &[&str]) -> String {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mqtt-ids").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    assert_eq!(code, 0, "{args:?} failed: {}", String::from_utf8_lossy(&err));
    String::from_utf8(out).expect("utf-8 output")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn desk_scale_trend() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = tmp.path();
    cli(&["synth", "--scenario", "normal", "--seed", "11", "--duration", "300", "--out", &p(d, "normal.pcap")]);
    cli(&["synth", "--scenario", "mqtt_bf", "--seed", "12", "--duration", "120", "--attempts", "400", "--out", &p(d, "bf.pcap")]);
    let mut recall: BTreeMap<(String, FeatureLevel), f64> = BTreeMap::new();
    let mut packets = 0;
    for level in FeatureLevel::ALL {
        let csv = p(d, &format!("{level}.csv"));
        cli(&[
            "extract", "--level", level.as_str(),
            "--input", &p(d, "normal.pcap"), "--rules", &p(d, "normal.pcap.rules.json"),
            "--input", &p(d, "bf.pcap"), "--rules", &p(d, "bf.pcap.rules.json"),
            "--out", &csv,
        ]);
        for model in ["dt", "rf"] {
            let json = cli(&["crossval", "--model", model, "--features", &csv, "--folds", "5", "--seed", "13"]);
            let env: Envelope<EvalReport> = serde_json::from_str(&json).map_err(|e| e.to_string())?;
            if level == FeatureLevel::Packet {
                packets = env.report.rows;
            }
            let r = env.report.class_metrics(AttackClass::MqttBf).ok_or("no MQTT_BF rows")?.recall;
            recall.insert((model.to_string(), level), r);
        }
    }
    ensure!((8_000..=14_000).contains(&packets), "{packets} packets, expected about 10000");
    let mut parts = Vec::new();
    for model in ["dt", "rf"] {
        let get = |l| recall[&(model.to_string(), l)];
        let (pk, uni, bi) = (get(FeatureLevel::Packet), get(FeatureLevel::Uniflow), get(FeatureLevel::Biflow));
        ensure!(uni > pk && bi > pk, "{model}: MQTT_BF recall packet {pk:.4}, uniflow {uni:.4}, biflow {bi:.4}");
        parts.push(format!("{model} {:.2}/{:.2}/{:.2}%", pk * 100.0, uni * 100.0, bi * 100.0));
    }
    Ok(format!("{packets} packets; MQTT_BF recall packet/uniflow/biflow: {}", parts.join(", ")))
}

fn pipeline(d: &Path) {
    cli(&["synth", "--scenario", "normal", "--seed", "21", "--duration", "60", "--out", &p(d, "normal.pcap")]);
    cli(&["synth", "--scenario", "sparta", "--seed", "22", "--duration", "30", "--attempts", "60", "--out", &p(d, "sparta.pcap")]);
    std::fs::create_dir_all(d.join("reports")).unwrap();
    for level in ["packet", "biflow"] {
        let csv = p(d, &format!("{level}.csv"));
        cli(&[
            "extract", "--level", level,
            "--input", &p(d, "normal.pcap"), "--rules", &p(d, "normal.pcap.rules.json"),
            "--input", &p(d, "sparta.pcap"), "--rules", &p(d, "sparta.pcap.rules.json"),
            "--out", &csv,
        ]);
        let (train, test) = (p(d, &format!("{level}.train.csv")), p(d, &format!("{level}.test.csv")));
        cli(&["split", "--features", &csv, "--seed", "23", "--train-out", &train, "--test-out", &test]);
        for model in ["rf", "lr", "svm-rbf"] {
            let path = p(d, &format!("{model}-{level}.model.json"));
            cli(&["train", "--model", model, "--features", &train, "--seed", "24", "--trees", "20", "--out", &path]);
            cli(&["evaluate", "--model", &path, "--features", &test, "--out", &p(d, &format!("reports/{model}-{level}.json"))]);
        }
        cli(&["crossval", "--model", "knn", "--features", &csv, "--seed", "25", "--out", &p(d, &format!("reports/knn-{level}.json"))]);
    }
    cli(&["report", "--in", &p(d, "reports"), "--format", "text", "--out", &p(d, "report.txt")]);
    cli(&["report", "--in", &p(d, "reports"), "--format", "json", "--out", &p(d, "report.json")]);
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = tmp.path();
    pipeline(d);
    let first = snapshot(d);
    std::fs::remove_dir_all(d).map_err(|e| e.to_string())?;
    std::fs::create_dir(d).map_err(|e| e.to_string())?;
    pipeline(d);
    let second = snapshot(d);
    ensure!(first.keys().eq(second.keys()), "file sets differ");
    let differing: Vec<String> =
        first.iter().filter(|(k, v)| second[*k] != **v).map(|(k, _)| k.display().to_string()).collect();
    ensure!(differing.is_empty(), "outputs differ: {}", differing.join(", "));
    let count = |ext: &str| first.keys().filter(|k| k.to_string_lossy().ends_with(ext)).count();
    Ok(format!(
        "{} files identical ({} CSVs, {} models, {} reports)",
        first.len(),
        count(".csv"),
        count(".model.json"),
        first.keys().filter(|k| k.starts_with("reports") || k.starts_with("report.")).count()
    ))
}

/// Expects `<scenario>.pcap` and `<scenario>.rules.json` for each scenario.
fn full_dataset(dir: &Path) -> Outcome {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let o = out.path();
    let mut inputs = Vec::new();
    for s in Scenario::ALL {
        let pcap = dir.join(format!("{s}.pcap"));
        let rules = dir.join(format!("{s}.rules.json"));
        ensure!(pcap.exists() && rules.exists(), "missing {} or its rules file", pcap.display());
        inputs.push((pcap.display().to_string(), rules.display().to_string()));
    }
    let mut accuracy = BTreeMap::new();
    for level in FeatureLevel::ALL {
        let csv = p(o, &format!("{level}.csv"));
        let mut args = vec!["extract".to_string(), "--level".into(), level.as_str().into(), "--out".into(), csv.clone()];
        for (pcap, rules) in &inputs {
            args.extend(["--input".into(), pcap.clone(), "--rules".into(), rules.clone()]);
        }
        cli(&args.iter().map(String::as_str).collect::<Vec<_>>());
        let models: &[&str] = match level {
            FeatureLevel::Packet => &["knn", "rf"],
            FeatureLevel::Uniflow => &[],
            FeatureLevel::Biflow => &["dt", "rf"],
        };
        for model in models {
            let json = cli(&["crossval", "--model", model, "--features", &csv, "--folds", "5", "--seed", "1"]);
            let env: Envelope<EvalReport> = serde_json::from_str(&json).map_err(|e| e.to_string())?;
            accuracy.insert((model.to_string(), level), env.report.overall_accuracy * 100.0);
        }
    }
    for model in ["dt", "rf"] {
        let a = accuracy[&(model.to_string(), FeatureLevel::Biflow)];
        ensure!(a >= 99.5 - 2.0, "{model} biflow accuracy {a:.2}%");
    }
    for model in ["knn", "rf"] {
        let a = accuracy[&(model.to_string(), FeatureLevel::Packet)];
        ensure!(a < 75.0 + 2.0, "{model} packet accuracy {a:.2}%");
    }
    let rows = |level: &str| -> Result<usize, String> {
        let o2 = p(o, &format!("normal-{level}.csv"));
        cli(&["extract", "--level", level, "--input", &inputs[0].0, "--rules", &inputs[0].1, "--out", &o2]);
        Ok(std::fs::read_to_string(&o2).map_err(|e| e.to_string())?.lines().count() - 1)
    };
    let ratio = rows("uniflow")? as f64 / rows("biflow")?.max(1) as f64;
    ensure!((ratio - 2.0).abs() <= 0.2, "normal uniflow:biflow ratio {ratio:.2}");
    Ok(format!("accuracies {accuracy:?}, normal uniflow:biflow {ratio:.2}"))
}
