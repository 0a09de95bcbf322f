//! Two-qubit separability lab.
//!
//! Simulates a polarization-entangled photon-pair source with tunable noise,
//! measures it under shot noise in a handful of fixed settings, labels the
//! reconstructed states with the positive-partial-transpose criterion, and
//! trains small neural classifiers to recover the entanglement boundary from
//! the measured features alone.
//!
//! Module map, bottom up:
//! - [`linalg`]: 4x4 complex Hermitian eigendecomposition and helpers.
//! - [`quantum`]: states, partial transpose, concurrence, exact boundaries.
//! - [`stream`]: counter-based random substreams (order-independent seeds).
//! - [`measure`]: Bloch directions, feature plans, CHSH, count sampling.
//! - [`tomography`]: nine-setting Pauli tomography and reconstruction.
//! - [`experiment`]: source noise model, calibration, dataset generators.
//! - [`ann`]: linear and one-hidden-layer classifiers, full-batch training.
//! - [`io`]: dataset CSVs with JSON sidecars, model files, atomic writes.
//! - [`harness`]: the command pipelines behind the `qsep` binary.
//!
//! Runnable examples, one per capability (`cargo run --example <name>`):
//! - `ppt_oracle`: closed-form separability boundaries of the state family.
//! - `chsh_thresholds`: CHSH violations and what the fixed rule misses.
//! - `source_calibration`: solving the noise dials for target purity and
//!   concurrence, and how noise moves the boundaries.
//! - `tomography_roundtrip`: reconstruction fidelity versus shot count.
//! - `linear_protocol`: generate, train, evaluate on the boundary wheel.
//! - `nonlinear_protocol`: phase discrimination, linear versus hidden layer.
//! - `neuron_sweep`: match rate as a function of network width.

pub mod ann;
pub mod error;
pub mod experiment;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod quantum;
pub mod stream;
pub mod tomography;

pub use error::{Error, Result};
