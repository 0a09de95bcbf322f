//! On-disk formats.
//!
//! Dataset CSV: header `theta,phi,p,f1,f2,f3,f4,label,seed`, floats with 12
//! significant digits, label 0 = separable / 1 = entangled, seed the exact
//! substream value that reproduces the row (0 for exact rows). A JSON sidecar
//! carries the full provenance. Matrices dump as 32-column CSV (row-major,
//! re/im interleaved, full precision). Model files are JSON with the flat
//! weight layout documented in `Model::flat_params`. Nothing here writes
//! timestamps: outputs are byte-identical across reruns by construction.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ann::{Arch, Model, TrainConfig, TrainReport};
use crate::error::{Error, Result};
use crate::experiment::{Dataset, ProtocolKind, ProtocolSpec, SourceModel};
use crate::measure::{FeaturePlan, FeatureVector};
use crate::quantum::SeparabilityLabel;

/// Canonical dataset CSV header.
pub const DATASET_HEADER: &str = "theta,phi,p,f1,f2,f3,f4,label,seed";

/// 12-significant-digit float used in dataset CSVs.
fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Full-precision float used in matrix dumps.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One dataset row as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub theta: f64,
    pub phi: f64,
    pub p: f64,
    pub features: FeatureVector,
    pub label: SeparabilityLabel,
    pub seed: u64,
}

/// Provenance sidecar written next to every dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub kind: ProtocolKind,
    /// Which half of a split this file is: "train", "test", or "full".
    pub role: String,
    /// True when features are exact correlators rather than measured ones.
    pub theory: bool,
    pub spec: ProtocolSpec,
    pub plan: FeaturePlan,
    pub source: Option<SourceModel>,
    pub samples: usize,
}

impl DatasetSidecar {
    pub fn describe(dataset: &Dataset, role: &str) -> Result<Self> {
        Ok(DatasetSidecar {
            kind: dataset.spec.kind,
            role: role.to_string(),
            theory: dataset.source.is_none(),
            spec: dataset.spec.clone(),
            plan: FeaturePlan::from_name(&dataset.spec.plan)?,
            source: dataset.source,
            samples: dataset.len(),
        })
    }
}

/// Write the dataset CSV and its JSON sidecar.
pub fn write_dataset(
    csv_path: &Path,
    sidecar_path: &Path,
    dataset: &Dataset,
    role: &str,
) -> Result<()> {
    let mut out = String::with_capacity(64 * (dataset.len() + 1));
    out.push_str(DATASET_HEADER);
    out.push('\n');
    for s in &dataset.samples {
        let f = s.features.0;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt12(s.theta),
            fmt12(s.phi),
            fmt12(s.p),
            fmt12(f[0]),
            fmt12(f[1]),
            fmt12(f[2]),
            fmt12(f[3]),
            s.label.as_u8(),
            s.seed
        ));
    }
    write_atomic(csv_path, out.as_bytes())?;
    write_json(sidecar_path, &DatasetSidecar::describe(dataset, role)?)
}

/// View of an in-memory dataset as disk-shaped rows (drops the matrices).
pub fn dataset_rows(dataset: &Dataset) -> Vec<DatasetRow> {
    dataset
        .samples
        .iter()
        .map(|s| DatasetRow {
            theta: s.theta,
            phi: s.phi,
            p: s.p,
            features: s.features,
            label: s.label,
            seed: s.seed,
        })
        .collect()
}

/// Read a dataset CSV back into rows. The header must match the canonical
/// one exactly.
pub fn read_dataset(csv_path: &Path) -> Result<Vec<DatasetRow>> {
    let text = std::fs::read_to_string(csv_path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == DATASET_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "{}: expected header '{DATASET_HEADER}', found {:?}",
                csv_path.display(),
                other.unwrap_or_default()
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parse(format!(
                "{} line {}: {} fields, expected 9",
                csv_path.display(),
                i + 2,
                fields.len()
            )));
        }
        let num = |k: usize| -> Result<f64> {
            fields[k].trim().parse::<f64>().map_err(|e| {
                Error::Parse(format!(
                    "{} line {} field {}: {e}",
                    csv_path.display(),
                    i + 2,
                    k + 1
                ))
            })
        };
        let label = match fields[7].trim() {
            "0" => SeparabilityLabel::Separable,
            "1" => SeparabilityLabel::Entangled,
            other => {
                return Err(Error::Parse(format!(
                    "{} line {}: label '{other}' is not 0 or 1",
                    csv_path.display(),
                    i + 2
                )))
            }
        };
        let seed = fields[8].trim().parse::<u64>().map_err(|e| {
            Error::Parse(format!("{} line {}: seed: {e}", csv_path.display(), i + 2))
        })?;
        rows.push(DatasetRow {
            theta: num(0)?,
            phi: num(1)?,
            p: num(2)?,
            features: FeatureVector::new([num(3)?, num(4)?, num(5)?, num(6)?])?,
            label,
            seed,
        });
    }
    Ok(rows)
}

pub fn read_sidecar(path: &Path) -> Result<DatasetSidecar> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Conventional sidecar path: `x.csv` → `x.json`.
pub fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("json")
}

/// Dump the reconstructed matrix of every sample, one row per sample, 32
/// columns of re/im-interleaved entries in row-major order.
pub fn write_matrices(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut header = Vec::with_capacity(32);
    for i in 0..4 {
        for j in 0..4 {
            header.push(format!("m{i}{j}_re"));
            header.push(format!("m{i}{j}_im"));
        }
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for s in &dataset.samples {
        let m = s.reconstructed.matrix();
        let mut cells = Vec::with_capacity(32);
        for i in 0..4 {
            for j in 0..4 {
                cells.push(fmt17(m.0[i][j].re));
                cells.push(fmt17(m.0[i][j].im));
            }
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Summary statistics of a training run (the full loss curve stays in
/// memory; files carry the ends of the curve). Deliberately excludes wall
/// time: model files are byte-identical across reruns of the same seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub first_loss: f64,
    pub final_loss: f64,
    pub lr_halvings: u32,
    pub final_train_match: f64,
}

impl TrainingSummary {
    pub fn from_report(report: &TrainReport) -> Self {
        TrainingSummary {
            first_loss: *report.losses.first().unwrap_or(&f64::NAN),
            final_loss: *report.losses.last().unwrap_or(&f64::NAN),
            lr_halvings: report.lr_halvings,
            final_train_match: report.final_train_match,
        }
    }
}

/// Model file: architecture, flat weights, the plan the features came from,
/// and enough provenance to regenerate the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    /// "linear" or "mlp".
    pub arch: String,
    /// Hidden-layer width; 0 for the linear model.
    pub n_ne: usize,
    /// Flat parameters in `Model::flat_params` order.
    pub weights: Vec<f64>,
    pub plan: String,
    pub threshold: f64,
    pub train_config: TrainConfig,
    pub dataset_provenance: serde_json::Value,
    pub training: TrainingSummary,
}

impl ModelFile {
    pub fn from_parts(
        model: &Model,
        plan: &str,
        report: &TrainReport,
        dataset_provenance: serde_json::Value,
    ) -> Self {
        let arch = model.arch();
        ModelFile {
            arch: arch.name().to_string(),
            n_ne: arch.hidden(),
            weights: model.flat_params(),
            plan: plan.to_string(),
            threshold: report.config.threshold,
            train_config: report.config,
            dataset_provenance,
            training: TrainingSummary::from_report(report),
        }
    }

    pub fn to_model(&self) -> Result<Model> {
        let arch = match (self.arch.as_str(), self.n_ne) {
            ("linear", 0) => Arch::Linear,
            ("linear", n) => {
                return Err(Error::Parse(format!(
                    "linear model file claims {n} hidden units"
                )))
            }
            ("mlp", n) if n >= 1 => Arch::Mlp { hidden: n },
            ("mlp", _) => {
                return Err(Error::Parse("mlp model file with zero hidden units".into()))
            }
            (other, _) => {
                return Err(Error::Parse(format!("unknown architecture '{other}'")))
            }
        };
        Model::from_flat(arch, &self.weights)
    }
}

pub fn write_model(path: &Path, file: &ModelFile) -> Result<()> {
    write_json(path, file)
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Write plain text atomically (sibling temp file plus rename).
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

/// Pretty-printed JSON with a trailing newline, written atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Write via a sibling temp file and rename, so readers never observe a
/// half-written file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{ext}.tmp"),
        None => "tmp".to_string(),
    });
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann::{train, TrainConfig};
    use crate::experiment::{gen_theory_dataset, ProtocolSpec};

    fn tiny_dataset() -> Dataset {
        let mut spec = ProtocolSpec::linear(7);
        spec.thetas = vec![std::f64::consts::FRAC_PI_4];
        spec.p_count = 9;
        gen_theory_dataset(&spec).unwrap()
    }

    #[test]
    fn dataset_roundtrips_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("data.csv");
        let side = sidecar_path(&csv);
        let ds = tiny_dataset();
        write_dataset(&csv, &side, &ds, "full").unwrap();

        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.starts_with(DATASET_HEADER));
        assert_eq!(text.lines().count(), ds.len() + 1);

        let rows = read_dataset(&csv).unwrap();
        assert_eq!(rows.len(), ds.len());
        for (row, s) in rows.iter().zip(&ds.samples) {
            // 12 significant digits: relative error below 1e-10.
            assert!((row.p - s.p).abs() <= 1e-10 * s.p.abs().max(1.0));
            assert_eq!(row.label, s.label);
            assert_eq!(row.seed, s.seed);
            for i in 0..4 {
                assert!((row.features.0[i] - s.features.0[i]).abs() <= 1e-10);
            }
        }

        let sc = read_sidecar(&side).unwrap();
        assert_eq!(sc.samples, ds.len());
        assert!(sc.theory);
        assert_eq!(sc.plan.name, "xz");
        assert_eq!(sc.role, "full");
    }

    #[test]
    fn rewriting_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let ds = tiny_dataset();
        write_dataset(&a, &sidecar_path(&a), &ds, "full").unwrap();
        write_dataset(&b, &sidecar_path(&b), &ds, "full").unwrap();
        assert_eq!(
            std::fs::read(&a).unwrap(),
            std::fs::read(&b).unwrap()
        );
        assert_eq!(
            std::fs::read(sidecar_path(&a)).unwrap(),
            std::fs::read(sidecar_path(&b)).unwrap()
        );
    }

    #[test]
    fn malformed_csv_is_rejected_with_context() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Parse(_))));

        std::fs::write(
            &path,
            format!("{DATASET_HEADER}\n1.0,0.0,0.5,0.1,0.1,0.1,0.1,2,0\n"),
        )
        .unwrap();
        let err = read_dataset(&path).unwrap_err();
        assert!(err.to_string().contains("label"), "{err}");

        std::fs::write(&path, format!("{DATASET_HEADER}\n1.0,0.0\n")).unwrap();
        assert!(read_dataset(&path).is_err());
    }

    #[test]
    fn matrices_dump_has_32_columns_and_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("matrices.csv");
        let ds = tiny_dataset();
        write_matrices(&path, &ds).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 32);
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|c| c.parse().unwrap())
            .collect();
        assert_eq!(first.len(), 32);
        // Diagonal of the p = p_min theory state: close to I/4.
        let p = ds.samples[0].p;
        let expect_corner = p * 0.0 + (1.0 - p) * 0.25;
        assert!((first[0] - expect_corner).abs() < 1e-15);
    }

    #[test]
    fn model_file_roundtrips_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let xs = vec![[0.6, 0.0, 0.0, 0.0], [-0.6, 0.0, 0.0, 0.0]];
        let ys = vec![true, false];
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::new(3)
        };
        let (model, report) = train(&xs, &ys, Arch::Mlp { hidden: 2 }, &cfg).unwrap();
        let file = ModelFile::from_parts(&model, "xz", &report, serde_json::json!({"rows": 2}));
        write_model(&path, &file).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(back.arch, "mlp");
        assert_eq!(back.n_ne, 2);
        assert_eq!(back.weights, model.flat_params());
        let rebuilt = back.to_model().unwrap();
        assert_eq!(rebuilt.flat_params(), model.flat_params());

        let mut broken = back.clone();
        broken.arch = "transformer".into();
        assert!(broken.to_model().is_err());
        let mut broken = back.clone();
        broken.n_ne = 0;
        assert!(broken.to_model().is_err());
        let mut broken = back;
        broken.weights.pop();
        assert!(broken.to_model().is_err());
    }
}
