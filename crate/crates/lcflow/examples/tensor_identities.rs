//! Randomized checks of the tensor algebra: Hessian diagonalization in the
//! director frame, finite-difference Jacobians, rotation covariance and the
//! spectral div/curl identities.

use lcflow::cli::checks::{identity_checks, CheckSizes};

fn main() -> lcflow::Result<()> {
    let sizes = CheckSizes {
        seed: 7,
        ..CheckSizes::default()
    };
    for c in identity_checks(&sizes)? {
        println!(
            "{:<24} {:>5} cases  max defect {:.2e}  tol {:.0e}  {}",
            c.name,
            c.cases,
            c.max_defect,
            c.tolerance,
            if c.passed { "ok" } else { "FAILED" }
        );
    }
    Ok(())
}
