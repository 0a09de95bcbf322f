//! Evaluation reports: overall and per-state match rates, confusion counts,
//! and the geometry of the mistakes (how far each mismatch sits from the
//! separability boundary of its state family).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::DatasetRow;
use crate::quantum::SeparabilityLabel;

/// Match-rate tally for one (θ, φ) source setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRate {
    pub theta: f64,
    pub phi: f64,
    pub samples: usize,
    pub matches: usize,
    pub match_rate: f64,
}

/// 2×2 outcome counts; "positive" is Entangled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_entangled_pred_entangled: usize,
    pub true_entangled_pred_separable: usize,
    pub true_separable_pred_entangled: usize,
    pub true_separable_pred_separable: usize,
}

/// One misclassified sample with its distance to the state's boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub theta: f64,
    pub phi: f64,
    pub p: f64,
    pub label: SeparabilityLabel,
    pub predicted: SeparabilityLabel,
    /// Separability boundary p* of this (θ, φ) family, when it exists.
    pub boundary: Option<f64>,
    /// |p − p*|, when the boundary exists.
    pub distance: Option<f64>,
}

/// Classifier performance over one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCore {
    pub samples: usize,
    pub matches: usize,
    pub match_rate: f64,
    pub per_state: Vec<StateRate>,
    pub confusion: Confusion,
    pub mismatches: Vec<Mismatch>,
}

/// Score a classifier against the dataset labels. `boundary` maps (θ, φ) to
/// the family's separability boundary and is consulted once per state.
pub fn evaluate_rows(
    rows: &[DatasetRow],
    mut classify: impl FnMut(&[f64; 4]) -> SeparabilityLabel,
    mut boundary: impl FnMut(f64, f64) -> Result<Option<f64>>,
) -> Result<EvalCore> {
    let mut per_state: Vec<StateRate> = Vec::new();
    let mut boundaries: Vec<((u64, u64), Option<f64>)> = Vec::new();
    let mut confusion = Confusion::default();
    let mut mismatches = Vec::new();
    let mut matches = 0usize;

    for row in rows {
        let key = (row.theta.to_bits(), row.phi.to_bits());
        let bstar = match boundaries.iter().find(|(k, _)| *k == key) {
            Some((_, b)) => *b,
            None => {
                let b = boundary(row.theta, row.phi)?;
                boundaries.push((key, b));
                b
            }
        };
        let predicted = classify(&row.features.0);
        let hit = predicted == row.label;
        matches += usize::from(hit);
        match (row.label, predicted) {
            (SeparabilityLabel::Entangled, SeparabilityLabel::Entangled) => {
                confusion.true_entangled_pred_entangled += 1
            }
            (SeparabilityLabel::Entangled, SeparabilityLabel::Separable) => {
                confusion.true_entangled_pred_separable += 1
            }
            (SeparabilityLabel::Separable, SeparabilityLabel::Entangled) => {
                confusion.true_separable_pred_entangled += 1
            }
            (SeparabilityLabel::Separable, SeparabilityLabel::Separable) => {
                confusion.true_separable_pred_separable += 1
            }
        }
        if !hit {
            mismatches.push(Mismatch {
                theta: row.theta,
                phi: row.phi,
                p: row.p,
                label: row.label,
                predicted,
                boundary: bstar,
                distance: bstar.map(|b| (row.p - b).abs()),
            });
        }
        match per_state
            .iter_mut()
            .find(|s| s.theta.to_bits() == key.0 && s.phi.to_bits() == key.1)
        {
            Some(s) => {
                s.samples += 1;
                s.matches += usize::from(hit);
            }
            None => per_state.push(StateRate {
                theta: row.theta,
                phi: row.phi,
                samples: 1,
                matches: usize::from(hit),
                match_rate: 0.0,
            }),
        }
    }
    for s in &mut per_state {
        s.match_rate = s.matches as f64 / s.samples as f64;
    }
    Ok(EvalCore {
        samples: rows.len(),
        matches,
        match_rate: matches as f64 / rows.len().max(1) as f64,
        per_state,
        confusion,
        mismatches,
    })
}

/// A named comparison entry (e.g. the fixed-coefficient CHSH baseline).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub name: String,
    pub samples: usize,
    pub match_rate: f64,
    pub per_state: Vec<StateRate>,
}

/// The full evaluation artifact written by the eval command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub arch: String,
    pub n_ne: usize,
    pub plan: String,
    pub threshold: f64,
    pub result: EvalCore,
    pub baselines: Vec<BaselineEntry>,
}

/// Mismatch table: one row per misclassified sample.
pub fn write_mismatch_csv(path: &Path, mismatches: &[Mismatch]) -> Result<()> {
    let mut out = String::from("theta,phi,p,label,predicted,boundary,distance\n");
    for m in mismatches {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.11e}")).unwrap_or_default();
        out.push_str(&format!(
            "{:.11e},{:.11e},{:.11e},{},{},{},{}\n",
            m.theta,
            m.phi,
            m.p,
            m.label.as_u8(),
            m.predicted.as_u8(),
            opt(m.boundary),
            opt(m.distance)
        ));
    }
    crate::io::write_text(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FeatureVector;

    fn row(theta: f64, p: f64, label: SeparabilityLabel) -> DatasetRow {
        DatasetRow {
            theta,
            phi: 0.0,
            p,
            features: FeatureVector([p, 0.0, 0.0, 0.0]),
            label,
            seed: 0,
        }
    }

    #[test]
    fn perfect_and_majority_classifiers_score_as_expected() {
        use SeparabilityLabel::{Entangled, Separable};
        let rows = vec![
            row(0.5, 0.2, Separable),
            row(0.5, 0.6, Entangled),
            row(0.7, 0.4, Entangled),
            row(0.7, 0.8, Entangled),
        ];
        // Oracle: read the label back from p (entangled iff first feature > 0.33).
        let oracle = evaluate_rows(
            &rows,
            |x| {
                if x[0] > 0.33 {
                    Entangled
                } else {
                    Separable
                }
            },
            |_, _| Ok(Some(1.0 / 3.0)),
        )
        .unwrap();
        assert_eq!(oracle.match_rate, 1.0);
        assert!(oracle.mismatches.is_empty());
        assert_eq!(oracle.confusion.true_entangled_pred_entangled, 3);
        assert_eq!(oracle.confusion.true_separable_pred_separable, 1);

        // Constant classifier: majority label fraction.
        let constant = evaluate_rows(&rows, |_| Entangled, |_, _| Ok(None)).unwrap();
        assert_eq!(constant.match_rate, 0.75);
        assert_eq!(constant.mismatches.len(), 1);
        assert_eq!(constant.mismatches[0].distance, None);
    }

    #[test]
    fn overall_rate_is_the_weighted_mean_of_per_state_rates() {
        use SeparabilityLabel::{Entangled, Separable};
        let mut rows = Vec::new();
        for i in 0..7 {
            rows.push(row(0.3, 0.1 * i as f64 + 0.1, Separable));
        }
        for i in 0..3 {
            rows.push(row(0.6, 0.2 * i as f64 + 0.2, Entangled));
        }
        let core = evaluate_rows(&rows, |_| Entangled, |_, _| Ok(None)).unwrap();
        let weighted: f64 = core
            .per_state
            .iter()
            .map(|s| s.match_rate * s.samples as f64)
            .sum::<f64>()
            / core.samples as f64;
        assert!((core.match_rate - weighted).abs() < 1e-15);
        assert_eq!(core.per_state.len(), 2);
    }

    #[test]
    fn mismatch_rows_carry_boundary_distances() {
        use SeparabilityLabel::Separable;
        let rows = vec![row(0.5, 0.4, Separable)];
        let core = evaluate_rows(
            &rows,
            |_| SeparabilityLabel::Entangled,
            |_, _| Ok(Some(0.55)),
        )
        .unwrap();
        assert_eq!(core.mismatches.len(), 1);
        let m = &core.mismatches[0];
        assert_eq!(m.boundary, Some(0.55));
        assert!((m.distance.unwrap() - 0.15).abs() < 1e-12);
    }

    #[test]
    fn mismatch_csv_has_one_line_per_entry() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mismatches.csv");
        let ms = vec![Mismatch {
            theta: 0.5,
            phi: 0.0,
            p: 0.4,
            label: SeparabilityLabel::Separable,
            predicted: SeparabilityLabel::Entangled,
            boundary: None,
            distance: None,
        }];
        write_mismatch_csv(&path, &ms).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().ends_with(",0,1,,"));
    }
}
