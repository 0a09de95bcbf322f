//! Match rate as a function of network width, on exact (theory) data.
//!
//! Trains the sweep {linear, 5, 10, 100 hidden units} on a boundary-window
//! training set with exact features and scores each model on the exact full
//! grid of the same fifteen states. Epochs are reduced from the shipped
//! default to keep the example quick; the ordering of the curve is already
//! visible. The full experimental sweep is `qsep reproduce --figure fig5`.

use qsep::ann::{match_rate, train, Arch, TrainConfig};
use qsep::experiment::{gen_theory_dataset, ProtocolKind, ProtocolSpec};
use qsep::harness::figures::NEURON_SWEEP;
use qsep::stream::{derive_seed, lanes};

fn main() -> qsep::Result<()> {
    let train_spec = ProtocolSpec::nonlinear(0);
    let mut test_spec = train_spec.clone();
    test_spec.kind = ProtocolKind::Linear; // same states and plan, full p grid
    let train_ds = gen_theory_dataset(&train_spec)?;
    let test_ds = gen_theory_dataset(&test_spec)?;
    println!(
        "train: {} window samples, test: {} grid samples\n",
        train_ds.len(),
        test_ds.len()
    );

    let (xs, ys) = (train_ds.xs(), train_ds.ys());
    let (xs_test, ys_test) = (test_ds.xs(), test_ds.ys());

    println!("{:>6} {:>12} {:>12} {:>10}", "n_ne", "train match", "test match", "halvings");
    let mut rates = Vec::new();
    for &n in &NEURON_SWEEP {
        let arch = if n == 0 {
            Arch::Linear
        } else {
            Arch::Mlp { hidden: n }
        };
        let mut cfg = TrainConfig::new(derive_seed(42, &[lanes::INIT, n as u64]));
        cfg.epochs = 3_000;
        let (model, report) = train(&xs, &ys, arch, &cfg)?;
        let test = match_rate(&model, &xs_test, &ys_test, cfg.threshold)?;
        println!(
            "{n:>6} {:>12.4} {test:>12.4} {:>10}",
            report.final_train_match, report.lr_halvings
        );
        rates.push(test);
    }

    // Hidden units help on this task; the widest model is not worse than
    // the linear cut by more than noise.
    assert!(
        rates.last().unwrap() >= rates.first().unwrap(),
        "width should not hurt phase discrimination on exact data"
    );
    Ok(())
}
