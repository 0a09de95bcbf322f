//! CHSH values of the family under the shipped measurement plans.
//!
//! Three facts worth seeing side by side:
//!  1. Under the xz-chsh plan the Bell state reaches |S| = 2√2 and the
//!     noise mixture crosses |S| = 2 at p = 1/√2, far above the PPT
//!     boundary p = 1/3: the fixed rule misses a wide band of entanglement.
//!  2. Under the xz acquisition plan the default sign pattern gives S = 0
//!     on this family; only the best pattern over all CHSH combinations
//!     recovers the violation.
//!  3. Partially entangled pure states violate less, and product states
//!     never leave [-2, 2].

use qsep::measure::{chsh_max_violation, chsh_value, FeaturePlan, DEFAULT_CHSH_SIGNS};
use qsep::quantum::{ket_from_params, ppt_boundary, werner_like};

fn main() -> qsep::Result<()> {
    let bell = ket_from_params(std::f64::consts::FRAC_PI_4, 0.0)?.density();
    let chsh_plan = FeaturePlan::xz_chsh();
    let xz_plan = FeaturePlan::xz();

    let (s_max, pattern) = chsh_max_violation(&bell, &chsh_plan);
    println!("Bell state, xz-chsh plan: max |S| = {s_max:.9} (2*sqrt(2) = {:.9})", 8f64.sqrt());
    println!("attained by sign pattern {pattern:?}");
    assert!((s_max - 8f64.sqrt()).abs() < 1e-9);

    let s_default_xz = chsh_value(&bell, &xz_plan, DEFAULT_CHSH_SIGNS)?;
    println!("Bell state, xz acquisition plan, default signs: S = {s_default_xz:.3e}");
    assert!(s_default_xz.abs() < 1e-12);

    // Violation threshold of the white-noise mixture: |S|(p) = 2√2 p.
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (s, _) = chsh_max_violation(&werner_like(&bell, mid)?, &chsh_plan);
        if s > 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let threshold = 0.5 * (lo + hi);
    let expected = 1.0 / 2f64.sqrt();
    let ppt = ppt_boundary(std::f64::consts::FRAC_PI_4, 0.0)?.unwrap();
    println!("\nnoise mixture: |S| > 2 for p > {threshold:.9} (1/sqrt(2) = {expected:.9})");
    println!("PPT boundary sits at p = {ppt:.9}");
    println!("band missed by the fixed rule: ({ppt:.4}, {threshold:.4})");
    assert!((threshold - expected).abs() < 1e-6);

    println!("\n{:>10} {:>12}", "theta", "max |S|");
    for k in 1..=5 {
        let theta = k as f64 * std::f64::consts::PI / 20.0;
        let rho = ket_from_params(theta, 0.0)?.density();
        let (s, _) = chsh_max_violation(&rho, &chsh_plan);
        println!("{theta:>10.6} {s:>12.9}");
    }

    let product = ket_from_params(0.0, 0.0)?.density();
    let (s_prod, _) = chsh_max_violation(&product, &chsh_plan);
    println!("\nproduct state max |S| = {s_prod:.9} (classical bound 2)");
    assert!(s_prod <= 2.0 + 1e-12);
    Ok(())
}
