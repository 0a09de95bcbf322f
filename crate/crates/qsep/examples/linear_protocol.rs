//! End-to-end boundary-tracing run: generate, train, evaluate.
//!
//! Drives the same pipeline the CLI exposes: acquire the 5-angle x-z-plane
//! dataset from a calibrated source, train the 4-input linear classifier,
//! and score it on a freshly acquired test set. The trained unit beats the
//! fixed CHSH rule by a wide margin because it learns boundary weights from
//! the labels instead of assuming the |S| > 2 threshold.

use qsep::experiment::ProtocolKind;
use qsep::harness::{cmd_eval, cmd_gen, cmd_train, EvalOptions, GenOptions, TrainOptions};

fn main() -> qsep::Result<()> {
    let out = std::env::temp_dir().join("qsep_linear_protocol");
    let train_dir = out.join("train_data");
    let test_dir = out.join("test_data");
    let model_dir = out.join("model");
    let eval_dir = out.join("eval");

    for (dir, seed) in [(&train_dir, 101u64), (&test_dir, 102u64)] {
        cmd_gen(&GenOptions {
            protocol: Some(ProtocolKind::Linear),
            seed: Some(seed),
            out: dir.clone(),
            ..GenOptions::default()
        })?;
    }

    let model = cmd_train(&TrainOptions {
        data: train_dir.join("dataset.csv"),
        arch: Some("linear".into()),
        seed: Some(103),
        out: model_dir.clone(),
        ..TrainOptions::default()
    })?;
    assert!(
        model.training.final_train_match >= 0.97,
        "linear unit should fit its own training wheel"
    );

    let report = cmd_eval(&EvalOptions {
        model: model_dir.join("model.json"),
        data: test_dir.join("dataset.csv"),
        out: eval_dir.clone(),
    })?;

    println!("\nper-state test match rates:");
    for s in &report.result.per_state {
        println!("  theta = {:.4}: {:.4}", s.theta, s.match_rate);
    }
    let baseline = &report.baselines[0];
    println!(
        "\ntrained linear: {:.4} vs {}: {:.4}",
        report.result.match_rate, baseline.name, baseline.match_rate
    );
    assert!(report.result.match_rate >= 0.9);
    assert!(report.result.match_rate > baseline.match_rate + 0.05);
    println!("artifacts under {}", out.display());
    Ok(())
}
