//! Minimal feed-forward classifiers over the four-correlator features:
//! a logistic unit and a one-hidden-layer ReLU network, trained from scratch
//! with full-batch gradient descent on binary cross-entropy. No autograd;
//! the gradients are written out by hand and pinned by finite-difference
//! tests.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::SeparabilityLabel;
use crate::stream::{lanes, substream};

/// Probability floor/ceiling inside the cross-entropy.
pub const BCE_EPS: f64 = 1e-12;

/// σ(w·x + w₀).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub w: [f64; 4],
    pub b: f64,
}

/// σ(W₂·relu(W₁x + b₁) + b₂) with one hidden layer of `w1.len()` units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub w1: Vec<[f64; 4]>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Network shape: `Mlp { hidden: 0 }` is invalid; a zero-neuron sweep point
/// maps to `Linear`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Linear,
    Mlp { hidden: usize },
}

impl Arch {
    pub fn name(&self) -> &'static str {
        match self {
            Arch::Linear => "linear",
            Arch::Mlp { .. } => "mlp",
        }
    }

    /// Hidden-layer width; 0 for the linear model.
    pub fn hidden(&self) -> usize {
        match self {
            Arch::Linear => 0,
            Arch::Mlp { hidden } => *hidden,
        }
    }

    /// Flat parameter count (see `Model::flat_params` for the layout).
    pub fn n_params(&self) -> usize {
        match self {
            Arch::Linear => 5,
            Arch::Mlp { hidden } => hidden * 6 + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Model {
    Linear(LinearModel),
    Mlp(MlpModel),
}

fn sigmoid(t: f64) -> f64 {
    let p = if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    };
    // The two branches are stable but still saturate in f64 (to 1.0 above
    // t ~ 36.7, to 0.0 below t ~ -745); the output contract is the open
    // interval, so pin the result to the nearest representable neighbors.
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

impl Model {
    pub fn arch(&self) -> Arch {
        match self {
            Model::Linear(_) => Arch::Linear,
            Model::Mlp(m) => Arch::Mlp {
                hidden: m.w1.len(),
            },
        }
    }

    /// Output probability in (0, 1).
    pub fn forward(&self, x: &[f64; 4]) -> f64 {
        match self {
            Model::Linear(m) => {
                let z = m.w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + m.b;
                sigmoid(z)
            }
            Model::Mlp(m) => {
                let mut z2 = m.b2;
                for j in 0..m.w1.len() {
                    let z1 = m.w1[j].iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + m.b1[j];
                    if z1 > 0.0 {
                        z2 += m.w2[j] * z1;
                    }
                }
                sigmoid(z2)
            }
        }
    }

    /// Parameters flattened in the canonical order: linear = w₁..w₄, b;
    /// mlp = W₁ row-major, then b₁, then W₂, then b₂. Initialization and
    /// serialization both use this order.
    pub fn flat_params(&self) -> Vec<f64> {
        match self {
            Model::Linear(m) => {
                let mut p = m.w.to_vec();
                p.push(m.b);
                p
            }
            Model::Mlp(m) => {
                let mut p = Vec::with_capacity(self.arch().n_params());
                for row in &m.w1 {
                    p.extend_from_slice(row);
                }
                p.extend_from_slice(&m.b1);
                p.extend_from_slice(&m.w2);
                p.push(m.b2);
                p
            }
        }
    }

    /// Inverse of `flat_params`.
    pub fn from_flat(arch: Arch, params: &[f64]) -> Result<Model> {
        if params.len() != arch.n_params() {
            return Err(Error::InvalidConfig(format!(
                "{} parameters supplied, {} architecture needs {}",
                params.len(),
                arch.name(),
                arch.n_params()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig(
                "model parameters must be finite".into(),
            ));
        }
        Ok(match arch {
            Arch::Linear => Model::Linear(LinearModel {
                w: [params[0], params[1], params[2], params[3]],
                b: params[4],
            }),
            Arch::Mlp { hidden } => {
                if hidden == 0 {
                    return Err(Error::InvalidConfig(
                        "hidden width must be at least 1".into(),
                    ));
                }
                let mut w1 = Vec::with_capacity(hidden);
                for j in 0..hidden {
                    let o = 4 * j;
                    w1.push([params[o], params[o + 1], params[o + 2], params[o + 3]]);
                }
                let b1 = params[4 * hidden..5 * hidden].to_vec();
                let w2 = params[5 * hidden..6 * hidden].to_vec();
                Model::Mlp(MlpModel {
                    w1,
                    b1,
                    w2,
                    b2: params[6 * hidden],
                })
            }
        })
    }
}

/// Binary cross-entropy with the prediction clamped to [ε, 1−ε].
pub fn bce_loss(pred: f64, label: bool) -> f64 {
    let p = pred.clamp(BCE_EPS, 1.0 - BCE_EPS);
    if label {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Mean loss and its exact gradient in flat-parameter order. The ReLU
/// subgradient at zero is taken as zero.
pub fn loss_and_gradients(
    model: &Model,
    xs: &[[f64; 4]],
    ys: &[bool],
) -> Result<(f64, Vec<f64>)> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::DegenerateData(format!(
            "gradient batch has {} features and {} labels",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; model.arch().n_params()];
    match model {
        Model::Linear(_) => {
            for (x, &y) in xs.iter().zip(ys) {
                let p = model.forward(x);
                loss += bce_loss(p, y);
                let delta = (p - f64::from(u8::from(y))) / n;
                for i in 0..4 {
                    grad[i] += delta * x[i];
                }
                grad[4] += delta;
            }
        }
        Model::Mlp(m) => {
            let h = m.w1.len();
            let mut act = vec![0.0; h];
            for (x, &y) in xs.iter().zip(ys) {
                let mut z2 = m.b2;
                for j in 0..h {
                    let z1 = m.w1[j].iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + m.b1[j];
                    act[j] = if z1 > 0.0 { z1 } else { 0.0 };
                    z2 += m.w2[j] * act[j];
                }
                let p = sigmoid(z2);
                loss += bce_loss(p, y);
                let delta2 = (p - f64::from(u8::from(y))) / n;
                for j in 0..h {
                    grad[5 * h + j] += delta2 * act[j];
                    if act[j] > 0.0 {
                        let delta1 = delta2 * m.w2[j];
                        for i in 0..4 {
                            grad[4 * j + i] += delta1 * x[i];
                        }
                        grad[4 * h + j] += delta1;
                    }
                }
                grad[6 * h] += delta2;
            }
        }
    }
    Ok((loss / n, grad))
}

/// Training hyperparameters. The defaults hold for every shipped protocol;
/// only the seed has no sensible default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: u32,
    /// Parameters start uniform in [−init_halfwidth, +init_halfwidth].
    pub init_halfwidth: f64,
    pub seed: u64,
    /// Decision threshold used for match rates and reports.
    pub threshold: f64,
}

impl TrainConfig {
    pub fn new(seed: u64) -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 20_000,
            init_halfwidth: 0.5,
            seed,
            threshold: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be positive".into()));
        }
        if !(self.init_halfwidth > 0.0) || !self.init_halfwidth.is_finite() {
            return Err(Error::InvalidConfig(
                "init half-width must be positive".into(),
            ));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig("threshold must be in (0, 1)".into()));
        }
        Ok(())
    }
}

/// What training did: the recorded loss curve plus summary numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub losses: Vec<f64>,
    pub final_train_match: f64,
    pub lr_halvings: u32,
    pub wall_secs: f64,
    pub config: TrainConfig,
}

/// Draw initial parameters uniformly from the config's init stream.
pub fn init_model(arch: Arch, cfg: &TrainConfig) -> Result<Model> {
    let mut rng = substream(cfg.seed, &[lanes::INIT]);
    let hw = cfg.init_halfwidth;
    let params: Vec<f64> = (0..arch.n_params())
        .map(|_| rng.gen_range(-hw..=hw))
        .collect();
    Model::from_flat(arch, &params)
}

/// Full-batch gradient descent. The learning rate halves (at most ten times)
/// whenever the epoch loss rises, which keeps the recorded curve descending
/// on every dataset this crate generates. Deterministic given (data, config).
pub fn train(
    xs: &[[f64; 4]],
    ys: &[bool],
    arch: Arch,
    cfg: &TrainConfig,
) -> Result<(Model, TrainReport)> {
    cfg.validate()?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::DegenerateData(format!(
            "training set has {} features and {} labels",
            xs.len(),
            ys.len()
        )));
    }
    if ys.iter().all(|&y| y) || ys.iter().all(|&y| !y) {
        return Err(Error::DegenerateData(
            "training set holds a single class; the decision boundary is undefined".into(),
        ));
    }
    let start = std::time::Instant::now();
    let mut model = init_model(arch, cfg)?;
    let mut lr = cfg.learning_rate;
    let mut lr_halvings = 0u32;
    let mut losses = Vec::with_capacity(cfg.epochs as usize);
    let mut prev_loss = f64::INFINITY;
    for _ in 0..cfg.epochs {
        let (loss, grad) = loss_and_gradients(&model, xs, ys)?;
        if loss > prev_loss && lr_halvings < 10 {
            lr *= 0.5;
            lr_halvings += 1;
        }
        losses.push(loss);
        prev_loss = loss;
        let mut params = model.flat_params();
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= lr * g;
        }
        model = Model::from_flat(arch, &params)?;
    }
    let report = TrainReport {
        final_train_match: match_rate(&model, xs, ys, cfg.threshold)?,
        losses,
        lr_halvings,
        wall_secs: start.elapsed().as_secs_f64(),
        config: *cfg,
    };
    Ok((model, report))
}

/// Entangled iff the forward output reaches the threshold (ties count as
/// entangled: the costlier mistake is calling an entangled state separable).
pub fn predict(model: &Model, x: &[f64; 4], threshold: f64) -> SeparabilityLabel {
    if model.forward(x) >= threshold {
        SeparabilityLabel::Entangled
    } else {
        SeparabilityLabel::Separable
    }
}

/// Fraction of samples whose prediction equals the label.
pub fn match_rate(model: &Model, xs: &[[f64; 4]], ys: &[bool], threshold: f64) -> Result<f64> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::DegenerateData(format!(
            "evaluation set has {} features and {} labels",
            xs.len(),
            ys.len()
        )));
    }
    let hits = xs
        .iter()
        .zip(ys)
        .filter(|(x, &y)| {
            (predict(model, x, threshold) == SeparabilityLabel::Entangled) == y
        })
        .count();
    Ok(hits as f64 / xs.len() as f64)
}
