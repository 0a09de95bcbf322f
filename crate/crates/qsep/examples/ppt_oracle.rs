//! Exact separability boundaries of the noisy partially entangled family.
//!
//! For |ψ(θ, φ)⟩ = cos θ|HV⟩ + e^{iφ} sin θ|VH⟩ mixed with white noise,
//! the PPT criterion is exact, and the boundary has the closed form
//! p* = 1 / (1 + 2 sin 2θ). This walks the shipped θ grid, compares the
//! bisected boundary against the closed form, and shows φ-independence.

use qsep::experiment::default_thetas;
use qsep::quantum::{concurrence, ket_from_params, ppt_boundary, werner_like};

fn main() -> qsep::Result<()> {
    println!("{:>10} {:>14} {:>14} {:>12}", "theta", "p* (bisect)", "p* (closed)", "|diff|");
    for &theta in &default_thetas() {
        let numeric = ppt_boundary(theta, 0.0)?.expect("entangled for theta > 0");
        let closed = 1.0 / (1.0 + 2.0 * (2.0 * theta).sin());
        println!(
            "{theta:>10.6} {numeric:>14.9} {closed:>14.9} {:>12.2e}",
            (numeric - closed).abs()
        );
        assert!((numeric - closed).abs() < 1e-9);

        // The boundary is blind to the phase.
        for phi in [0.5f64, 2.0, 5.0] {
            let at_phi = ppt_boundary(theta, phi)?.expect("entangled for theta > 0");
            assert!((at_phi - numeric).abs() < 1e-9);
        }
    }

    // Concurrence of the reference mixture has its own closed form,
    // C = max(0, (3p - 1) / 2), vanishing exactly at the boundary p = 1/3.
    let bell = ket_from_params(std::f64::consts::FRAC_PI_4, 0.0)?.density();
    println!("\n{:>6} {:>12} {:>12}", "p", "concurrence", "(3p-1)/2");
    for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
        let c = concurrence(&werner_like(&bell, p)?);
        let closed = ((3.0 * p - 1.0) / 2.0).max(0.0);
        println!("{p:>6.3} {c:>12.9} {closed:>12.9}");
        assert!((c - closed).abs() < 1e-9);
    }
    println!("\nall boundaries match the closed forms");
    Ok(())
}
