//! Command pipelines behind the `qsep` binary: calibrate a source model,
//! generate datasets, train and evaluate classifiers, and reproduce the
//! shipped figures. Everything here is a plain library call, so tests and
//! examples can drive the exact code paths the binary runs.

pub mod figures;
pub mod report;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ann::{self, Arch, TrainConfig};
use crate::error::{Error, Result};
use crate::experiment::{
    calibrate_source, gen_linear_dataset, gen_nonlinear_dataset, gen_theory_dataset,
    ppt_boundary_noisy, Calibration, ProtocolKind, ProtocolSpec, SourceModel, DEFAULT_SEED,
};
use crate::io::{self, ModelFile, TrainingSummary};
use crate::measure::{chsh_classifier_standard, FeaturePlan, FeatureVector};
use crate::quantum::{ppt_boundary, SeparabilityLabel};

use figures::FigureInputs;
use report::{evaluate_rows, BaselineEntry, EvalReport};

/// Default calibration target: purity of the noisy reference state.
pub const DEFAULT_TARGET_PURITY: f64 = 0.914;
/// Default calibration target: concurrence of the noisy reference state.
pub const DEFAULT_TARGET_CONCURRENCE: f64 = 0.927;

/// Echo of the resolved configuration, written into every output directory.
pub fn write_provenance(out_dir: &Path, command: &str, config: serde_json::Value) -> Result<()> {
    let v = serde_json::json!({
        "tool": "qsep",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    });
    io::write_json(&out_dir.join("provenance.json"), &v)
}

#[derive(Debug, Clone)]
pub struct CalibrateOptions {
    pub target_purity: f64,
    pub target_concurrence: f64,
    pub out: PathBuf,
}

/// Solve for the source model matching the purity and concurrence targets
/// and write it to `out/source.json`.
pub fn cmd_calibrate(opts: &CalibrateOptions) -> Result<Calibration> {
    let cal = calibrate_source(opts.target_purity, opts.target_concurrence)?;
    io::write_json(&opts.out.join("source.json"), &cal)?;
    write_provenance(
        &opts.out,
        "calibrate",
        serde_json::json!({
            "target_purity": opts.target_purity,
            "target_concurrence": opts.target_concurrence,
        }),
    )?;
    println!(
        "calibrated source: v = {:.6}, d = {:.6}, bg_asym = {:.6}",
        cal.model.v, cal.model.d, cal.model.bg_asym
    );
    println!(
        "achieved purity = {:.6}, concurrence = {:.6}",
        cal.achieved_purity, cal.achieved_concurrence
    );
    Ok(cal)
}

/// A source file is either a full calibration record or a bare model.
#[derive(Deserialize)]
#[serde(untagged)]
enum SourceFile {
    Calibrated(Calibration),
    Bare(SourceModel),
}

/// Load a source model from `source.json` output or a hand-written model.
pub fn read_source(path: &Path) -> Result<SourceModel> {
    let text = std::fs::read_to_string(path)?;
    let parsed: SourceFile = serde_json::from_str(&text).map_err(|e| {
        Error::Parse(format!("{}: not a source model file: {e}", path.display()))
    })?;
    let model = match parsed {
        SourceFile::Calibrated(c) => c.model,
        SourceFile::Bare(m) => m,
    };
    model.validate()?;
    Ok(model)
}

#[derive(Debug, Clone, Default)]
pub struct GenOptions {
    /// Required unless `config` supplies a full protocol description.
    pub protocol: Option<ProtocolKind>,
    /// Exact features and labels instead of simulated acquisitions.
    pub theory: bool,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub plan: Option<String>,
    /// Source model file; defaults to calibrating the standard targets.
    pub source: Option<PathBuf>,
    /// Also dump reconstructed density matrices next to each CSV.
    pub matrices: bool,
    /// Full `ProtocolSpec` as JSON; flags still override its fields.
    pub config: Option<PathBuf>,
    pub out: PathBuf,
}

/// Resolve the protocol description from flags and the optional config file.
fn resolve_spec(opts: &GenOptions) -> Result<ProtocolSpec> {
    let mut spec = match (&opts.config, opts.protocol) {
        (Some(path), kind) => {
            let text = std::fs::read_to_string(path)?;
            let spec: ProtocolSpec = serde_json::from_str(&text).map_err(|e| {
                Error::InvalidConfig(format!("{}: bad protocol config: {e}", path.display()))
            })?;
            if let Some(k) = kind {
                if k != spec.kind {
                    return Err(Error::InvalidConfig(format!(
                        "--protocol {k} disagrees with config kind {}",
                        spec.kind
                    )));
                }
            }
            spec
        }
        (None, Some(ProtocolKind::Linear)) => {
            ProtocolSpec::linear(opts.seed.unwrap_or(DEFAULT_SEED))
        }
        (None, Some(ProtocolKind::Nonlinear)) => {
            ProtocolSpec::nonlinear(opts.seed.unwrap_or(DEFAULT_SEED))
        }
        (None, None) => {
            return Err(Error::InvalidConfig(
                "pass --protocol linear|nonlinear or --config <json>".into(),
            ))
        }
    };
    if let Some(shots) = opts.shots {
        spec.shots = shots;
    }
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    if let Some(plan) = &opts.plan {
        spec.plan = plan.clone();
    }
    spec.validate()?;
    Ok(spec)
}

/// Generate datasets into the output directory. Boundary-tracing runs write
/// `dataset.csv`; phase-discrimination runs write `train.csv` and `test.csv`
/// (theory runs only the training window). Every CSV gets a JSON sidecar.
pub fn cmd_gen(opts: &GenOptions) -> Result<()> {
    let spec = resolve_spec(opts)?;
    let source = if opts.theory {
        if opts.source.is_some() {
            return Err(Error::InvalidConfig(
                "--theory computes exact features; it cannot honor --source".into(),
            ));
        }
        None
    } else {
        Some(match &opts.source {
            Some(path) => read_source(path)?,
            None => calibrate_source(DEFAULT_TARGET_PURITY, DEFAULT_TARGET_CONCURRENCE)?.model,
        })
    };

    let mut written: Vec<(String, usize)> = Vec::new();
    let mut emit = |name: &str, ds: &crate::experiment::Dataset, role: &str| -> Result<()> {
        let csv = opts.out.join(format!("{name}.csv"));
        io::write_dataset(&csv, &opts.out.join(format!("{name}.json")), ds, role)?;
        if opts.matrices {
            io::write_matrices(&opts.out.join(format!("{name}_matrices.csv")), ds)?;
        }
        written.push((format!("{name}.csv"), ds.len()));
        Ok(())
    };

    match (spec.kind, opts.theory, source) {
        (ProtocolKind::Linear, true, _) => {
            emit("dataset", &gen_theory_dataset(&spec)?, "full")?;
        }
        (ProtocolKind::Linear, false, Some(m)) => {
            emit("dataset", &gen_linear_dataset(&spec, &m)?, "full")?;
        }
        (ProtocolKind::Nonlinear, true, _) => {
            emit("train", &gen_theory_dataset(&spec)?, "train")?;
        }
        (ProtocolKind::Nonlinear, false, Some(m)) => {
            let (train, test) = gen_nonlinear_dataset(&spec, &m)?;
            emit("train", &train, "train")?;
            emit("test", &test, "test")?;
        }
        (_, false, None) => unreachable!("non-theory runs always resolve a source"),
    }

    write_provenance(
        &opts.out,
        "gen",
        serde_json::json!({
            "spec": spec,
            "theory": opts.theory,
            "source": source,
            "matrices": opts.matrices,
            "files": written.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        }),
    )?;
    for (name, rows) in &written {
        println!("wrote {} ({rows} samples)", opts.out.join(name).display());
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    pub data: PathBuf,
    /// "linear" or "mlp"; inferred from `nne` when absent.
    pub arch: Option<String>,
    /// Hidden width; 0 selects the linear model.
    pub nne: Option<usize>,
    pub seed: Option<u64>,
    pub epochs: Option<u32>,
    pub learning_rate: Option<f64>,
    /// Full `TrainConfig` as JSON; flags still override its fields.
    pub config: Option<PathBuf>,
    pub out: PathBuf,
}

/// Map the (arch, n_ne) flag pair onto an architecture. A width of zero is
/// the linear model; "mlp" without a width defaults to ten hidden units.
pub fn resolve_arch(arch: Option<&str>, nne: Option<usize>) -> Result<Arch> {
    match (arch, nne) {
        (Some("linear") | None, None | Some(0)) => Ok(Arch::Linear),
        (Some("linear"), Some(n)) => Err(Error::InvalidConfig(format!(
            "--arch linear conflicts with --nne {n}"
        ))),
        (Some("mlp"), None) => Ok(Arch::Mlp { hidden: 10 }),
        (Some("mlp"), Some(0)) => Err(Error::InvalidConfig(
            "--arch mlp needs at least one hidden unit; --nne 0 selects linear".into(),
        )),
        (Some("mlp") | None, Some(n)) => Ok(Arch::Mlp { hidden: n }),
        (Some(other), _) => Err(Error::InvalidConfig(format!(
            "unknown architecture '{other}' (expected linear or mlp)"
        ))),
    }
}

/// Sidecar lookup that fails with a pointed message instead of a bare
/// missing-file error; the sidecar carries the plan the model must record.
fn require_sidecar(data: &Path) -> Result<io::DatasetSidecar> {
    let path = io::sidecar_path(data);
    if !path.exists() {
        return Err(Error::InvalidConfig(format!(
            "no sidecar {} next to {}; datasets must keep their provenance file",
            path.display(),
            data.display()
        )));
    }
    io::read_sidecar(&path)
}

/// Decimated loss curve plus summary, written next to the model. Wall time
/// lives here, not in the model file, so model files stay byte-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingArtifact {
    pub summary: TrainingSummary,
    pub wall_secs: f64,
    /// Every `stride`-th epoch loss, first and last always included.
    pub stride: usize,
    pub losses: Vec<f64>,
}

impl TrainingArtifact {
    fn new(report: &ann::TrainReport) -> Self {
        const MAX_POINTS: usize = 512;
        let n = report.losses.len();
        let stride = n.div_ceil(MAX_POINTS).max(1);
        let mut losses: Vec<f64> = report.losses.iter().copied().step_by(stride).collect();
        if n > 0 && (n - 1) % stride != 0 {
            losses.push(report.losses[n - 1]);
        }
        TrainingArtifact {
            summary: TrainingSummary::from_report(report),
            wall_secs: report.wall_secs,
            stride,
            losses,
        }
    }
}

/// Train a classifier on a dataset CSV and write `model.json` plus a
/// training report into the output directory.
pub fn cmd_train(opts: &TrainOptions) -> Result<ModelFile> {
    let rows = io::read_dataset(&opts.data)?;
    let sidecar = require_sidecar(&opts.data)?;
    let arch = resolve_arch(opts.arch.as_deref(), opts.nne)?;

    let mut cfg = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<TrainConfig>(&text).map_err(|e| {
                Error::InvalidConfig(format!("{}: bad train config: {e}", path.display()))
            })?
        }
        None => TrainConfig::new(opts.seed.unwrap_or(DEFAULT_SEED)),
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(epochs) = opts.epochs {
        cfg.epochs = epochs;
    }
    if let Some(lr) = opts.learning_rate {
        cfg.learning_rate = lr;
    }

    let xs: Vec<[f64; 4]> = rows.iter().map(|r| r.features.0).collect();
    let ys: Vec<bool> = rows
        .iter()
        .map(|r| r.label == SeparabilityLabel::Entangled)
        .collect();
    let (model, report) = ann::train(&xs, &ys, arch, &cfg)?;

    let model_file = ModelFile::from_parts(
        &model,
        &sidecar.plan.name,
        &report,
        serde_json::to_value(&sidecar)?,
    );
    io::write_model(&opts.out.join("model.json"), &model_file)?;
    io::write_json(
        &opts.out.join("training_report.json"),
        &TrainingArtifact::new(&report),
    )?;
    write_provenance(
        &opts.out,
        "train",
        serde_json::json!({
            "data": opts.data.display().to_string(),
            "arch": arch.name(),
            "n_ne": arch.hidden(),
            "train_config": cfg,
        }),
    )?;
    println!(
        "trained {} (n_ne = {}) on {} samples: loss {:.6} -> {:.6}, train match {:.4}",
        arch.name(),
        arch.hidden(),
        rows.len(),
        report.losses.first().copied().unwrap_or(f64::NAN),
        report.losses.last().copied().unwrap_or(f64::NAN),
        report.final_train_match
    );
    Ok(model_file)
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub model: PathBuf,
    pub data: PathBuf,
    pub out: PathBuf,
}

/// True when every plan direction lies in the x-z plane, which is exactly
/// when the fixed CHSH rule is a meaningful comparison on these features.
fn plan_in_xz_plane(plan: &FeaturePlan) -> bool {
    [&plan.a0, &plan.a0_prime, &plan.b0, &plan.b0_prime]
        .iter()
        .all(|d| d.y.abs() <= 1e-12)
}

/// Evaluate a trained model file against a dataset CSV. The model's plan
/// must match the dataset's acquisition plan; refusing mixed plans is the
/// point of recording them.
pub fn cmd_eval(opts: &EvalOptions) -> Result<EvalReport> {
    let mf = io::read_model(&opts.model)?;
    let model = mf.to_model()?;
    let rows = io::read_dataset(&opts.data)?;
    let sidecar = require_sidecar(&opts.data)?;

    if mf.plan != sidecar.plan.name {
        return Err(Error::PlanMismatch(format!(
            "model was trained on plan '{}' but the dataset was acquired under '{}'",
            mf.plan, sidecar.plan.name
        )));
    }
    let canonical = FeaturePlan::from_name(&mf.plan)?;
    if !sidecar.plan.approx_eq(&canonical, 1e-9) {
        return Err(Error::PlanMismatch(format!(
            "dataset sidecar directions disagree with plan '{}'",
            mf.plan
        )));
    }

    let source = sidecar.source;
    let boundary = move |theta: f64, phi: f64| match source.as_ref() {
        Some(m) => ppt_boundary_noisy(m, theta, phi),
        None => ppt_boundary(theta, phi),
    };
    let result = evaluate_rows(
        &rows,
        |x| ann::predict(&model, x, mf.threshold),
        boundary,
    )?;

    let mut baselines = Vec::new();
    if plan_in_xz_plane(&sidecar.plan) {
        let chsh = evaluate_rows(
            &rows,
            |x| chsh_classifier_standard(&FeatureVector(*x)),
            boundary,
        )?;
        baselines.push(BaselineEntry {
            name: "standard-chsh".into(),
            samples: chsh.samples,
            match_rate: chsh.match_rate,
            per_state: chsh.per_state,
        });
    }

    let report = EvalReport {
        arch: mf.arch.clone(),
        n_ne: mf.n_ne,
        plan: mf.plan.clone(),
        threshold: mf.threshold,
        result,
        baselines,
    };
    io::write_json(&opts.out.join("eval.json"), &report)?;
    report::write_mismatch_csv(&opts.out.join("mismatches.csv"), &report.result.mismatches)?;
    write_provenance(
        &opts.out,
        "eval",
        serde_json::json!({
            "model": opts.model.display().to_string(),
            "data": opts.data.display().to_string(),
            "plan": mf.plan,
        }),
    )?;
    println!(
        "evaluated {} (n_ne = {}) on {} samples: match rate {:.4}, {} mismatches",
        report.arch,
        report.n_ne,
        report.result.samples,
        report.result.match_rate,
        report.result.mismatches.len()
    );
    for b in &report.baselines {
        println!("baseline {}: match rate {:.4}", b.name, b.match_rate);
    }
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct ReproduceOptions {
    /// fig3, fig4, fig5, or figS1.
    pub figure: String,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub out: PathBuf,
}

/// Rebuild one shipped figure end to end: acquire, train, score, and render.
pub fn cmd_reproduce(opts: &ReproduceOptions) -> Result<()> {
    let mut inputs = FigureInputs::default();
    if let Some(seed) = opts.seed {
        inputs.master_seed = seed;
    }
    if let Some(shots) = opts.shots {
        inputs.shots = shots;
    }
    match opts.figure.as_str() {
        "fig3" => {
            let s = figures::run_fig3(&opts.out, &inputs)?;
            println!(
                "fig3: trained linear match {:.4}, fixed CHSH match {:.4}",
                s.trained.match_rate, s.baseline.match_rate
            );
        }
        "fig4" => {
            let s = figures::run_fig4(&opts.out, &inputs)?;
            println!(
                "fig4: linear match {:.4}, mlp({}) match {:.4}",
                s.linear.match_rate, s.hidden, s.mlp.match_rate
            );
        }
        "fig5" => {
            let s = figures::run_fig5(&opts.out, &inputs)?;
            for p in &s.points {
                println!(
                    "fig5: n_ne {:>3}: experiment {:.4}, theory {:.4}",
                    p.n_ne, p.experiment_test, p.theory_test
                );
            }
        }
        "figS1" | "figs1" => {
            let s = figures::run_figs1(&opts.out, &inputs)?;
            println!("figS1: fixed CHSH match {:.4}", s.chsh.match_rate);
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown figure '{other}' (expected fig3, fig4, fig5, or figS1)"
            )))
        }
    }
    write_provenance(
        &opts.out,
        "reproduce",
        serde_json::json!({ "figure": opts.figure, "inputs": inputs }),
    )?;
    Ok(())
}
