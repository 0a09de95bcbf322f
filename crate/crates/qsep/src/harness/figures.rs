//! Reproduction pipelines: fixed-seed dataset builds, training runs, and
//! deterministic SVG renderings of the resulting label maps and sweep curves.
//!
//! Every pipeline derives its dataset and training seeds from the master
//! seed through fixed substream paths, so rerunning a figure with the same
//! inputs rewrites byte-identical CSV and SVG files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ann::{self, Arch, Model, TrainConfig, TrainReport};
use crate::error::Result;
use crate::experiment::{
    calibrate_source, gen_linear_dataset, gen_nonlinear_dataset, gen_theory_dataset,
    ppt_boundary_noisy, Calibration, ProtocolSpec, SourceModel, DEFAULT_SEED, DEFAULT_SHOTS,
};
use crate::io::{self, DatasetRow, DatasetSidecar, ModelFile};
use crate::measure::{chsh_classifier_standard, FeatureVector};
use crate::quantum::{ppt_boundary, SeparabilityLabel};
use crate::stream::{derive_seed, lanes};

use super::report::{evaluate_rows, EvalCore};
use super::{DEFAULT_TARGET_CONCURRENCE, DEFAULT_TARGET_PURITY};

/// Hidden width used by the phase-discrimination label-map figure.
pub const LABEL_MAP_HIDDEN: usize = 10;

/// Hidden widths of the network-size sweep; 0 denotes the linear model.
pub const NEURON_SWEEP: [usize; 4] = [0, 5, 10, 100];

const COLOR_ENTANGLED: &str = "#d95f02";
const COLOR_SEPARABLE: &str = "#1b9e77";
const COLOR_THEORY: &str = "#7570b3";

/// Knobs shared by every reproduction pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureInputs {
    pub master_seed: u64,
    /// Events recorded per pool component and setting.
    pub shots: u64,
    /// Gradient-descent epochs for every model trained by the pipeline.
    pub epochs: u32,
}

impl FigureInputs {
    pub fn new(master_seed: u64, shots: u64) -> Self {
        FigureInputs {
            master_seed,
            shots,
            epochs: TrainConfig::new(0).epochs,
        }
    }
}

impl Default for FigureInputs {
    fn default() -> Self {
        FigureInputs::new(DEFAULT_SEED, DEFAULT_SHOTS)
    }
}

/// Substream seed for one dataset role of one figure.
fn figure_seed(master: u64, figure: u64, role: u64) -> u64 {
    derive_seed(master, &[lanes::DATASET, figure, role])
}

/// Independently seeded starts probed per hidden-layer training run.
pub const TRAIN_STARTS: u64 = 16;

/// Probe length used to rank starts before the full run.
const PROBE_EPOCHS: u32 = 2_000;

/// Train a hidden-layer model with start selection: probe several seeded
/// initializations briefly, rank them by final probe loss, and rerun the
/// winner (first index on ties) for the full epoch count. A small ReLU
/// layer can collapse within the first few hundred epochs into an all-dead
/// state whose gradient is exactly zero, so single-start results swing hard
/// with the seed; the surviving and collapsed runs separate cleanly in
/// probe loss. Selection looks only at training loss, never at test data.
/// Linear training is convex and skips straight to the full run. The
/// winning config (with its seed) is returned, so the exact model remains
/// reproducible from a single `train` call.
fn train_selected(
    xs: &[[f64; 4]],
    ys: &[bool],
    arch: Arch,
    master: u64,
    path: &[u64],
    epochs: u32,
) -> Result<(Model, TrainReport, TrainConfig)> {
    let seed_for = |candidate: u64| {
        let mut full = path.to_vec();
        full.push(candidate);
        derive_seed(master, &full)
    };
    let mut cfg = TrainConfig::new(seed_for(0));
    cfg.epochs = epochs;
    if let Arch::Mlp { .. } = arch {
        let mut best: Option<(f64, u64)> = None;
        for candidate in 0..TRAIN_STARTS {
            let mut probe = TrainConfig::new(seed_for(candidate));
            probe.epochs = epochs.min(PROBE_EPOCHS);
            let (_, report) = ann::train(xs, ys, arch, &probe)?;
            let loss = *report.losses.last().expect("epochs is validated positive");
            if best.is_none_or(|(held, _)| loss < held) {
                best = Some((loss, candidate));
            }
        }
        let (_, winner) = best.expect("at least one start is probed");
        cfg.seed = seed_for(winner);
    }
    let (model, report) = ann::train(xs, ys, arch, &cfg)?;
    Ok((model, report, cfg))
}

/// Boundary lookup for mismatch geometry: the noisy-source boundary when a
/// source model is known, the ideal-family boundary otherwise.
fn boundary_for(source: Option<SourceModel>) -> impl FnMut(f64, f64) -> Result<Option<f64>> {
    move |theta, phi| match source.as_ref() {
        Some(m) => ppt_boundary_noisy(m, theta, phi),
        None => ppt_boundary(theta, phi),
    }
}

fn f12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Angles that are small multiples of π/20 get exact fraction labels;
/// anything else falls back to decimal.
fn pi_fraction_label(x: f64) -> String {
    let k = (x * 20.0 / std::f64::consts::PI).round();
    if (x - k * std::f64::consts::PI / 20.0).abs() > 1e-9 || k.abs() > 40.0 {
        return format!("{x:.3}");
    }
    let k = k as i64;
    if k == 0 {
        return "0".to_string();
    }
    let g = gcd(k.unsigned_abs(), 20);
    let (num, den) = (k / g as i64, 20 / g as i64);
    match (num, den) {
        (1, 1) => "π".to_string(),
        (n, 1) => format!("{n}π"),
        (1, d) => format!("π/{d}"),
        (n, d) => format!("{n}π/{d}"),
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Labeled states CSV: ground-truth label plus one column per classifier.
fn write_states_csv(
    path: &Path,
    rows: &[DatasetRow],
    preds: &[(&str, &[SeparabilityLabel])],
) -> Result<()> {
    let mut out = String::from("theta,phi,p,label");
    for (name, _) in preds {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}",
            f12(r.theta),
            f12(r.phi),
            f12(r.p),
            r.label.as_u8()
        ));
        for (_, ps) in preds {
            out.push_str(&format!(",{}", ps[i].as_u8()));
        }
        out.push('\n');
    }
    io::write_text(path, &out)
}

/// Match-rate CSV: one row per (classifier, state) plus an overall row per
/// classifier with empty angle cells.
fn write_rates_csv(path: &Path, entries: &[(&str, &EvalCore)]) -> Result<()> {
    let mut out = String::from("classifier,scope,theta,phi,samples,matches,match_rate\n");
    for (name, core) in entries {
        for s in &core.per_state {
            out.push_str(&format!(
                "{name},state,{},{},{},{},{}\n",
                f12(s.theta),
                f12(s.phi),
                s.samples,
                s.matches,
                f12(s.match_rate)
            ));
        }
        out.push_str(&format!(
            "{name},overall,,,{},{},{}\n",
            core.samples,
            core.matches,
            f12(core.match_rate)
        ));
    }
    io::write_text(path, &out)
}

/// One angular sector of a label wheel: points at radius p, fanned across
/// the sector in order of increasing p.
#[derive(Debug, Clone)]
pub struct WheelSection {
    pub label: String,
    /// Separability boundary of the sector's family, drawn as a dashed arc.
    pub boundary: Option<f64>,
    /// (p, predicted, actual), sorted by p.
    pub points: Vec<(f64, SeparabilityLabel, SeparabilityLabel)>,
}

/// One disk of a wheel figure.
#[derive(Debug, Clone)]
pub struct WheelDisk {
    pub title: String,
    pub sections: Vec<WheelSection>,
}

/// Group rows into wheel sections by (θ, φ) in first-appearance order.
fn build_disk(
    title: &str,
    rows: &[DatasetRow],
    preds: &[SeparabilityLabel],
    boundary: &mut impl FnMut(f64, f64) -> Result<Option<f64>>,
) -> Result<WheelDisk> {
    let mut keys: Vec<(u64, u64)> = Vec::new();
    let mut sections: Vec<WheelSection> = Vec::new();
    for (r, &pred) in rows.iter().zip(preds) {
        let key = (r.theta.to_bits(), r.phi.to_bits());
        let idx = match keys.iter().position(|&k| k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                sections.push(WheelSection {
                    label: format!("θ = {}", pi_fraction_label(r.theta)),
                    boundary: boundary(r.theta, r.phi)?,
                    points: Vec::new(),
                });
                sections.len() - 1
            }
        };
        sections[idx].points.push((r.p, pred, r.label));
    }
    for s in &mut sections {
        s.points
            .sort_by(|a, b| a.0.partial_cmp(&b.0).expect("p is finite"));
    }
    Ok(WheelDisk {
        title: title.to_string(),
        sections,
    })
}

fn polar(cx: f64, cy: f64, r: f64, ang: f64) -> (f64, f64) {
    (cx + r * ang.cos(), cy - r * ang.sin())
}

/// Polyline approximation of an arc; avoids SVG arc-flag bookkeeping and
/// renders identically everywhere.
fn arc_polyline(cx: f64, cy: f64, r: f64, a0: f64, a1: f64) -> String {
    const STEPS: usize = 24;
    let pts: Vec<String> = (0..=STEPS)
        .map(|i| {
            let a = a0 + (a1 - a0) * i as f64 / STEPS as f64;
            let (x, y) = polar(cx, cy, r, a);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    pts.join(" ")
}

/// Render label wheels: one disk per classifier and φ class, sectors by θ,
/// radius proportional to the mixing weight p.
pub fn render_wheels(disks: &[WheelDisk], cols: usize) -> String {
    let cols = cols.max(1);
    let rows = disks.len().div_ceil(cols);
    let (panel_w, panel_h, legend_h) = (370.0, 406.0, 40.0);
    let width = panel_w * cols as f64;
    let height = panel_h * rows as f64 + legend_h;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">\n\
         <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
    );
    let (r_outer, r_inner) = (146.0, 22.0);
    for (d, disk) in disks.iter().enumerate() {
        let col = (d % cols) as f64;
        let row = (d / cols) as f64;
        let cx = col * panel_w + panel_w / 2.0;
        let cy = row * panel_h + 30.0 + r_outer + 18.0;
        s.push_str(&format!(
            "<text x=\"{cx:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"15\" \
             fill=\"#222222\">{}</text>\n",
            row * panel_h + 22.0,
            disk.title
        ));
        let n = disk.sections.len().max(1);
        let w = std::f64::consts::TAU / n as f64;
        let gap = 0.022;
        for (k, sec) in disk.sections.iter().enumerate() {
            let a_hi = std::f64::consts::FRAC_PI_2 - k as f64 * w - gap;
            let a_lo = std::f64::consts::FRAC_PI_2 - (k as f64 + 1.0) * w + gap;
            // Sector frame: two radial edges and the outer arc.
            for a in [a_lo, a_hi] {
                let (x0, y0) = polar(cx, cy, r_inner, a);
                let (x1, y1) = polar(cx, cy, r_outer, a);
                s.push_str(&format!(
                    "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" \
                     stroke=\"#cccccc\" stroke-width=\"1\"/>\n"
                ));
            }
            s.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
                arc_polyline(cx, cy, r_outer, a_lo, a_hi)
            ));
            // Dashed boundary arc at radius p*.
            if let Some(b) = sec.boundary {
                let r = r_inner + b * (r_outer - r_inner);
                s.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"#555555\" \
                     stroke-width=\"1.4\" stroke-dasharray=\"5 4\"/>\n",
                    arc_polyline(cx, cy, r, a_lo, a_hi)
                ));
            }
            // Points fan across the sector in order of increasing p.
            let count = sec.points.len().max(1) as f64;
            for (i, &(p, pred, actual)) in sec.points.iter().enumerate() {
                let frac = (i as f64 + 0.5) / count;
                let a = a_hi - frac * (a_hi - a_lo);
                let r = r_inner + p * (r_outer - r_inner);
                let (x, y) = polar(cx, cy, r, a);
                let fill = match pred {
                    SeparabilityLabel::Entangled => COLOR_ENTANGLED,
                    SeparabilityLabel::Separable => COLOR_SEPARABLE,
                };
                let ring = if pred == actual {
                    String::new()
                } else {
                    " stroke=\"#000000\" stroke-width=\"0.9\"".to_string()
                };
                s.push_str(&format!(
                    "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.4\" fill=\"{fill}\"{ring}/>\n"
                ));
            }
            // Sector label outside the rim.
            let a_mid = (a_lo + a_hi) / 2.0;
            let (x, y) = polar(cx, cy, r_outer + 16.0, a_mid);
            s.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\" \
                 fill=\"#444444\">{}</text>\n",
                y + 4.0,
                sec.label
            ));
        }
    }
    // Legend.
    let ly = height - 16.0;
    s.push_str(&format!(
        "<circle cx=\"16\" cy=\"{ly:.0}\" r=\"4\" fill=\"{COLOR_ENTANGLED}\"/>\n\
         <text x=\"26\" y=\"{:.0}\" font-size=\"12\" fill=\"#333333\">predicted entangled</text>\n\
         <circle cx=\"166\" cy=\"{ly:.0}\" r=\"4\" fill=\"{COLOR_SEPARABLE}\"/>\n\
         <text x=\"176\" y=\"{:.0}\" font-size=\"12\" fill=\"#333333\">predicted separable</text>\n\
         <circle cx=\"316\" cy=\"{ly:.0}\" r=\"4\" fill=\"none\" stroke=\"#000000\"/>\n\
         <text x=\"326\" y=\"{:.0}\" font-size=\"12\" fill=\"#333333\">mismatch</text>\n\
         <line x1=\"406\" y1=\"{ly:.0}\" x2=\"436\" y2=\"{ly:.0}\" stroke=\"#555555\" \
         stroke-width=\"1.4\" stroke-dasharray=\"5 4\"/>\n\
         <text x=\"442\" y=\"{:.0}\" font-size=\"12\" fill=\"#333333\">separability boundary \
         (radius = p)</text>\n</svg>\n",
        ly + 4.0,
        ly + 4.0,
        ly + 4.0,
        ly + 4.0
    ));
    s
}

/// One polyline of a category line chart.
#[derive(Debug, Clone)]
pub struct ChartSeries {
    pub name: String,
    pub color: String,
    pub values: Vec<f64>,
}

/// Render match rates against a categorical x axis (network widths).
pub fn render_line_chart(
    title: &str,
    x_title: &str,
    x_labels: &[String],
    series: &[ChartSeries],
) -> String {
    let (width, height) = (560.0, 380.0);
    let (x0, y0, x1, y1) = (72.0, 46.0, 536.0, 300.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        for &v in &s.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let pad = ((hi - lo) * 0.15).max(0.005);
    let (lo, hi) = (lo - pad, (hi + pad).min(1.002));
    let px = |i: usize| {
        let n = x_labels.len().max(2) as f64;
        x0 + 24.0 + (x1 - x0 - 48.0) * i as f64 / (n - 1.0)
    };
    let py = |v: f64| y1 - (v - lo) / (hi - lo) * (y1 - y0);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">\n\
         <rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n\
         <text x=\"{:.0}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" \
         fill=\"#222222\">{title}</text>\n",
        width / 2.0
    );
    for i in 0..=5 {
        let v = lo + (hi - lo) * i as f64 / 5.0;
        let y = py(v);
        s.push_str(&format!(
            "<line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{x1:.2}\" y2=\"{y:.2}\" \
             stroke=\"#e5e5e5\" stroke-width=\"1\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\" \
             fill=\"#555555\">{v:.3}</text>\n",
            x0 - 6.0,
            y + 4.0
        ));
    }
    for (i, label) in x_labels.iter().enumerate() {
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\" \
             fill=\"#333333\">{label}</text>\n",
            px(i),
            y1 + 20.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\" \
         fill=\"#333333\">{x_title}</text>\n\
         <rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" \
         stroke=\"#999999\" stroke-width=\"1\"/>\n",
        (x0 + x1) / 2.0,
        y1 + 42.0,
        x1 - x0,
        y1 - y0
    ));
    for (si, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", px(i), py(v)))
            .collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            pts.join(" "),
            ser.color
        ));
        for (i, &v) in ser.values.iter().enumerate() {
            s.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.6\" fill=\"{}\"/>\n",
                px(i),
                py(v),
                ser.color
            ));
        }
        let lx = x0 + 12.0 + 190.0 * si as f64;
        let ly = height - 14.0;
        s.push_str(&format!(
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" \
             stroke-width=\"2\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"#333333\">{}</text>\n",
            lx + 26.0,
            ser.color,
            lx + 32.0,
            ly + 4.0,
            ser.name
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Boundary-tracing figure: a trained linear classifier next to the fixed
/// CHSH rule, each on its own freshly acquired 5-section test wheel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fig3Summary {
    pub calibration: Calibration,
    pub trained: EvalCore,
    pub baseline: EvalCore,
}

pub fn run_fig3(out: &Path, inputs: &FigureInputs) -> Result<Fig3Summary> {
    std::fs::create_dir_all(out)?;
    let cal = calibrate_source(DEFAULT_TARGET_PURITY, DEFAULT_TARGET_CONCURRENCE)?;
    let mut train_spec = ProtocolSpec::linear(figure_seed(inputs.master_seed, 3, 0));
    train_spec.shots = inputs.shots;
    let mut test_spec = ProtocolSpec::linear(figure_seed(inputs.master_seed, 3, 1));
    test_spec.shots = inputs.shots;
    let mut chsh_spec = ProtocolSpec::linear(figure_seed(inputs.master_seed, 3, 3));
    chsh_spec.plan = "xz-chsh".into();
    chsh_spec.shots = inputs.shots;

    let train_ds = gen_linear_dataset(&train_spec, &cal.model)?;
    let test_ds = gen_linear_dataset(&test_spec, &cal.model)?;
    let chsh_ds = gen_linear_dataset(&chsh_spec, &cal.model)?;

    let (model, report, cfg) = train_selected(
        &train_ds.xs(),
        &train_ds.ys(),
        Arch::Linear,
        inputs.master_seed,
        &[lanes::DATASET, 3, 2],
        inputs.epochs,
    )?;

    let test_rows = io::dataset_rows(&test_ds);
    let preds: Vec<SeparabilityLabel> = test_rows
        .iter()
        .map(|r| ann::predict(&model, &r.features.0, cfg.threshold))
        .collect();
    let trained = evaluate_rows(
        &test_rows,
        |x| ann::predict(&model, x, cfg.threshold),
        boundary_for(Some(cal.model)),
    )?;
    let chsh_rows = io::dataset_rows(&chsh_ds);
    let chsh_preds: Vec<SeparabilityLabel> = chsh_rows
        .iter()
        .map(|r| chsh_classifier_standard(&r.features))
        .collect();
    let baseline = evaluate_rows(
        &chsh_rows,
        |x| chsh_classifier_standard(&FeatureVector(*x)),
        boundary_for(Some(cal.model)),
    )?;

    io::write_dataset(
        &out.join("fig3_train.csv"),
        &out.join("fig3_train.json"),
        &train_ds,
        "train",
    )?;
    io::write_dataset(
        &out.join("fig3_test.csv"),
        &out.join("fig3_test.json"),
        &test_ds,
        "test",
    )?;
    io::write_dataset(
        &out.join("fig3_chsh.csv"),
        &out.join("fig3_chsh.json"),
        &chsh_ds,
        "full",
    )?;
    let provenance = serde_json::to_value(DatasetSidecar::describe(&train_ds, "train")?)?;
    io::write_model(
        &out.join("fig3_model.json"),
        &ModelFile::from_parts(&model, &train_spec.plan, &report, provenance),
    )?;
    write_states_csv(&out.join("fig3_states.csv"), &test_rows, &[("predicted", &preds)])?;
    write_rates_csv(
        &out.join("fig3_match_rates.csv"),
        &[("trained-linear", &trained), ("standard-chsh", &baseline)],
    )?;
    let mut bf = boundary_for(Some(cal.model));
    let disks = vec![
        build_disk("trained linear classifier", &test_rows, &preds, &mut bf)?,
        build_disk("fixed CHSH classifier", &chsh_rows, &chsh_preds, &mut bf)?,
    ];
    io::write_text(&out.join("fig3.svg"), &render_wheels(&disks, 2))?;
    let summary = Fig3Summary {
        calibration: cal,
        trained,
        baseline,
    };
    io::write_json(&out.join("fig3_summary.json"), &summary)?;
    Ok(summary)
}

/// Phase-discrimination label maps: a linear model and a small network
/// trained on the same boundary-window draws, mapped over all three φ
/// classes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fig4Summary {
    pub calibration: Calibration,
    pub hidden: usize,
    pub linear: EvalCore,
    pub mlp: EvalCore,
}

pub fn run_fig4(out: &Path, inputs: &FigureInputs) -> Result<Fig4Summary> {
    std::fs::create_dir_all(out)?;
    let cal = calibrate_source(DEFAULT_TARGET_PURITY, DEFAULT_TARGET_CONCURRENCE)?;
    let mut spec = ProtocolSpec::nonlinear(figure_seed(inputs.master_seed, 4, 0));
    spec.shots = inputs.shots;
    let (train_ds, test_ds) = gen_nonlinear_dataset(&spec, &cal.model)?;

    let (xs, ys) = (train_ds.xs(), train_ds.ys());
    let (lin_model, lin_report, cfg_lin) = train_selected(
        &xs,
        &ys,
        Arch::Linear,
        inputs.master_seed,
        &[lanes::DATASET, 4, 2],
        inputs.epochs,
    )?;
    let (mlp_model, mlp_report, cfg_mlp) = train_selected(
        &xs,
        &ys,
        Arch::Mlp {
            hidden: LABEL_MAP_HIDDEN,
        },
        inputs.master_seed,
        &[lanes::DATASET, 4, 3],
        inputs.epochs,
    )?;

    let rows = io::dataset_rows(&test_ds);
    let preds_lin: Vec<SeparabilityLabel> = rows
        .iter()
        .map(|r| ann::predict(&lin_model, &r.features.0, cfg_lin.threshold))
        .collect();
    let preds_mlp: Vec<SeparabilityLabel> = rows
        .iter()
        .map(|r| ann::predict(&mlp_model, &r.features.0, cfg_mlp.threshold))
        .collect();
    let linear = evaluate_rows(
        &rows,
        |x| ann::predict(&lin_model, x, cfg_lin.threshold),
        boundary_for(Some(cal.model)),
    )?;
    let mlp = evaluate_rows(
        &rows,
        |x| ann::predict(&mlp_model, x, cfg_mlp.threshold),
        boundary_for(Some(cal.model)),
    )?;

    io::write_dataset(
        &out.join("fig4_train.csv"),
        &out.join("fig4_train.json"),
        &train_ds,
        "train",
    )?;
    io::write_dataset(
        &out.join("fig4_test.csv"),
        &out.join("fig4_test.json"),
        &test_ds,
        "test",
    )?;
    let provenance = serde_json::to_value(DatasetSidecar::describe(&train_ds, "train")?)?;
    io::write_model(
        &out.join("fig4_linear_model.json"),
        &ModelFile::from_parts(&lin_model, &spec.plan, &lin_report, provenance.clone()),
    )?;
    io::write_model(
        &out.join("fig4_mlp_model.json"),
        &ModelFile::from_parts(&mlp_model, &spec.plan, &mlp_report, provenance),
    )?;
    write_states_csv(
        &out.join("fig4_states.csv"),
        &rows,
        &[
            ("predicted_linear", &preds_lin),
            ("predicted_mlp", &preds_mlp),
        ],
    )?;
    let mlp_name = format!("mlp-{LABEL_MAP_HIDDEN}");
    write_rates_csv(
        &out.join("fig4_match_rates.csv"),
        &[("linear", &linear), (mlp_name.as_str(), &mlp)],
    )?;

    let mut bf = boundary_for(Some(cal.model));
    let mut disks = Vec::new();
    for (arch_name, preds) in [("linear", &preds_lin), (mlp_name.as_str(), &preds_mlp)] {
        for &phi in &spec.phis {
            let mut sub_rows = Vec::new();
            let mut sub_preds = Vec::new();
            for (r, &p) in rows.iter().zip(preds.iter()) {
                if r.phi.to_bits() == phi.to_bits() {
                    sub_rows.push(r.clone());
                    sub_preds.push(p);
                }
            }
            disks.push(build_disk(
                &format!("{arch_name}, φ = {}", pi_fraction_label(phi)),
                &sub_rows,
                &sub_preds,
                &mut bf,
            )?);
        }
    }
    io::write_text(
        &out.join("fig4.svg"),
        &render_wheels(&disks, spec.phis.len()),
    )?;
    let summary = Fig4Summary {
        calibration: cal,
        hidden: LABEL_MAP_HIDDEN,
        linear,
        mlp,
    };
    io::write_json(&out.join("fig4_summary.json"), &summary)?;
    Ok(summary)
}

/// One width of the network-size sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig5Point {
    /// Hidden width; 0 is the linear model.
    pub n_ne: usize,
    pub experiment_train: f64,
    pub experiment_test: f64,
    pub theory_train: f64,
    pub theory_test: f64,
}

/// Network-size sweep: experiment-trained and theory-trained classifiers,
/// both scored on the same experimental test grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fig5Summary {
    pub calibration: Calibration,
    pub points: Vec<Fig5Point>,
}

pub fn run_fig5(out: &Path, inputs: &FigureInputs) -> Result<Fig5Summary> {
    std::fs::create_dir_all(out)?;
    let cal = calibrate_source(DEFAULT_TARGET_PURITY, DEFAULT_TARGET_CONCURRENCE)?;
    let mut spec = ProtocolSpec::nonlinear(figure_seed(inputs.master_seed, 5, 0));
    spec.shots = inputs.shots;
    let (train_exp, test_exp) = gen_nonlinear_dataset(&spec, &cal.model)?;
    let theory_train = gen_theory_dataset(&spec)?;

    let (xs_e, ys_e) = (train_exp.xs(), train_exp.ys());
    let (xs_t, ys_t) = (theory_train.xs(), theory_train.ys());
    let (xs_test, ys_test) = (test_exp.xs(), test_exp.ys());

    let mut points = Vec::new();
    for &n in &NEURON_SWEEP {
        let arch = if n == 0 {
            Arch::Linear
        } else {
            Arch::Mlp { hidden: n }
        };
        let (model_e, report_e, cfg_e) = train_selected(
            &xs_e,
            &ys_e,
            arch,
            inputs.master_seed,
            &[lanes::DATASET, 5, 2, n as u64],
            inputs.epochs,
        )?;
        let (model_t, report_t, cfg_t) = train_selected(
            &xs_t,
            &ys_t,
            arch,
            inputs.master_seed,
            &[lanes::DATASET, 5, 3, n as u64],
            inputs.epochs,
        )?;
        points.push(Fig5Point {
            n_ne: n,
            experiment_train: report_e.final_train_match,
            experiment_test: ann::match_rate(&model_e, &xs_test, &ys_test, cfg_e.threshold)?,
            theory_train: report_t.final_train_match,
            theory_test: ann::match_rate(&model_t, &xs_test, &ys_test, cfg_t.threshold)?,
        });
    }

    io::write_dataset(
        &out.join("fig5_train.csv"),
        &out.join("fig5_train.json"),
        &train_exp,
        "train",
    )?;
    io::write_dataset(
        &out.join("fig5_test.csv"),
        &out.join("fig5_test.json"),
        &test_exp,
        "test",
    )?;
    io::write_dataset(
        &out.join("fig5_theory.csv"),
        &out.join("fig5_theory.json"),
        &theory_train,
        "train",
    )?;
    let mut csv = String::from("n_ne,trained_on,train_match,test_match\n");
    for pt in &points {
        csv.push_str(&format!(
            "{},experiment,{},{}\n{},theory,{},{}\n",
            pt.n_ne,
            f12(pt.experiment_train),
            f12(pt.experiment_test),
            pt.n_ne,
            f12(pt.theory_train),
            f12(pt.theory_test)
        ));
    }
    io::write_text(&out.join("fig5_match_rates.csv"), &csv)?;

    let x_labels: Vec<String> = NEURON_SWEEP
        .iter()
        .map(|&n| {
            if n == 0 {
                "0 (linear)".to_string()
            } else {
                n.to_string()
            }
        })
        .collect();
    let series = vec![
        ChartSeries {
            name: "experiment-trained".into(),
            color: COLOR_ENTANGLED.into(),
            values: points.iter().map(|p| p.experiment_test).collect(),
        },
        ChartSeries {
            name: "theory-trained".into(),
            color: COLOR_THEORY.into(),
            values: points.iter().map(|p| p.theory_test).collect(),
        },
    ];
    io::write_text(
        &out.join("fig5.svg"),
        &render_line_chart(
            "test match rate vs hidden width",
            "hidden units",
            &x_labels,
            &series,
        ),
    )?;
    let summary = Fig5Summary {
        calibration: cal,
        points,
    };
    io::write_json(&out.join("fig5_summary.json"), &summary)?;
    Ok(summary)
}

/// Fixed-CHSH wheel: the unoptimized rule applied to an acquisition whose
/// plan actually measures the CHSH combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FigS1Summary {
    pub calibration: Calibration,
    pub chsh: EvalCore,
}

pub fn run_figs1(out: &Path, inputs: &FigureInputs) -> Result<FigS1Summary> {
    std::fs::create_dir_all(out)?;
    let cal = calibrate_source(DEFAULT_TARGET_PURITY, DEFAULT_TARGET_CONCURRENCE)?;
    let mut spec = ProtocolSpec::linear(figure_seed(inputs.master_seed, 6, 0));
    spec.plan = "xz-chsh".into();
    spec.shots = inputs.shots;
    let ds = gen_linear_dataset(&spec, &cal.model)?;
    let rows = io::dataset_rows(&ds);
    let preds: Vec<SeparabilityLabel> = rows
        .iter()
        .map(|r| chsh_classifier_standard(&r.features))
        .collect();
    let chsh = evaluate_rows(
        &rows,
        |x| chsh_classifier_standard(&FeatureVector(*x)),
        boundary_for(Some(cal.model)),
    )?;

    io::write_dataset(
        &out.join("figS1_data.csv"),
        &out.join("figS1_data.json"),
        &ds,
        "full",
    )?;
    write_states_csv(&out.join("figS1_states.csv"), &rows, &[("predicted", &preds)])?;
    write_rates_csv(&out.join("figS1_match_rates.csv"), &[("standard-chsh", &chsh)])?;
    let mut bf = boundary_for(Some(cal.model));
    let disk = build_disk("fixed CHSH classifier", &rows, &preds, &mut bf)?;
    io::write_text(&out.join("figS1.svg"), &render_wheels(&[disk], 1))?;
    let summary = FigS1Summary {
        calibration: cal,
        chsh,
    };
    io::write_json(&out.join("figS1_summary.json"), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_fraction_labels_cover_the_shipped_angles() {
        use std::f64::consts::PI;
        assert_eq!(pi_fraction_label(0.0), "0");
        assert_eq!(pi_fraction_label(PI / 20.0), "π/20");
        assert_eq!(pi_fraction_label(PI / 10.0), "π/10");
        assert_eq!(pi_fraction_label(3.0 * PI / 20.0), "3π/20");
        assert_eq!(pi_fraction_label(PI / 5.0), "π/5");
        assert_eq!(pi_fraction_label(PI / 4.0), "π/4");
        assert_eq!(pi_fraction_label(PI / 2.0), "π/2");
        assert_eq!(pi_fraction_label(PI), "π");
        assert_eq!(pi_fraction_label(0.123), "0.123");
    }

    #[test]
    fn disks_group_by_state_and_sort_by_radius() {
        use SeparabilityLabel::{Entangled, Separable};
        let mk = |theta: f64, p: f64, label| DatasetRow {
            theta,
            phi: 0.0,
            p,
            features: FeatureVector([0.0; 4]),
            label,
            seed: 0,
        };
        let rows = vec![
            mk(0.5, 0.9, Entangled),
            mk(0.7, 0.5, Entangled),
            mk(0.5, 0.2, Separable),
            mk(0.5, 0.6, Entangled),
        ];
        let preds = vec![Entangled, Separable, Separable, Entangled];
        let disk = build_disk("t", &rows, &preds, &mut |_, _| Ok(Some(0.4))).unwrap();
        assert_eq!(disk.sections.len(), 2);
        let ps: Vec<f64> = disk.sections[0].points.iter().map(|p| p.0).collect();
        assert_eq!(ps, vec![0.2, 0.6, 0.9]);
        assert_eq!(disk.sections[1].points.len(), 1);
        assert_eq!(disk.sections[0].boundary, Some(0.4));
    }

    #[test]
    fn wheel_svg_is_deterministic_and_well_formed() {
        use SeparabilityLabel::{Entangled, Separable};
        let disk = WheelDisk {
            title: "demo".into(),
            sections: vec![WheelSection {
                label: "θ = π/4".into(),
                boundary: Some(1.0 / 3.0),
                points: vec![(0.2, Separable, Separable), (0.8, Entangled, Separable)],
            }],
        };
        let a = render_wheels(std::slice::from_ref(&disk), 1);
        let b = render_wheels(std::slice::from_ref(&disk), 1);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert!(a.contains("demo"));
        assert!(a.contains("stroke-dasharray"));
        // One mismatched point gets the black ring.
        assert_eq!(a.matches("stroke=\"#000000\" stroke-width=\"0.9\"").count(), 1);
    }

    #[test]
    fn line_chart_svg_carries_series_and_labels() {
        let series = vec![
            ChartSeries {
                name: "alpha".into(),
                color: "#112233".into(),
                values: vec![0.95, 0.97, 0.99],
            },
            ChartSeries {
                name: "beta".into(),
                color: "#445566".into(),
                values: vec![0.91, 0.93, 0.94],
            },
        ];
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let svg = render_line_chart("demo chart", "width", &labels, &series);
        assert!(svg.contains("alpha") && svg.contains("beta"));
        assert!(svg.contains("demo chart"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 6);
        assert_eq!(svg, render_line_chart("demo chart", "width", &labels, &series));
    }

    #[test]
    fn states_and_rates_csvs_have_expected_shapes() {
        use SeparabilityLabel::{Entangled, Separable};
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            DatasetRow {
                theta: 0.5,
                phi: 0.0,
                p: 0.3,
                features: FeatureVector([0.0; 4]),
                label: Separable,
                seed: 1,
            },
            DatasetRow {
                theta: 0.5,
                phi: 0.0,
                p: 0.8,
                features: FeatureVector([0.0; 4]),
                label: Entangled,
                seed: 2,
            },
        ];
        let preds = vec![Separable, Separable];
        let sp = dir.path().join("states.csv");
        write_states_csv(&sp, &rows, &[("predicted", &preds)]).unwrap();
        let text = std::fs::read_to_string(&sp).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("theta,phi,p,label,predicted\n"));

        let core = evaluate_rows(&rows, |_| Separable, |_, _| Ok(None)).unwrap();
        let rp = dir.path().join("rates.csv");
        write_rates_csv(&rp, &[("const", &core)]).unwrap();
        let text = std::fs::read_to_string(&rp).unwrap();
        // Header, one state row, one overall row.
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().starts_with("const,overall,,,2,1,"));
    }

    #[test]
    fn boundary_tracing_figure_smoke_run_is_reproducible() {
        let inputs = FigureInputs {
            master_seed: 77,
            shots: 150,
            epochs: 60,
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let a = run_fig3(dir_a.path(), &inputs).unwrap();
        let b = run_fig3(dir_b.path(), &inputs).unwrap();
        for rate in [a.trained.match_rate, a.baseline.match_rate] {
            assert!((0.0..=1.0).contains(&rate));
        }
        for name in [
            "fig3_train.csv",
            "fig3_test.csv",
            "fig3_chsh.csv",
            "fig3_states.csv",
            "fig3_match_rates.csv",
            "fig3_model.json",
            "fig3_summary.json",
            "fig3.svg",
        ] {
            let pa = std::fs::read(dir_a.path().join(name)).unwrap();
            let pb = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(pa, pb, "{name} differs between identical runs");
        }
        let states = std::fs::read_to_string(dir_a.path().join("fig3_states.csv")).unwrap();
        assert_eq!(states.lines().count(), 1 + 495);
        assert_eq!(a.trained.samples, 495);
        assert_eq!(b.baseline.samples, 495);
    }
}
