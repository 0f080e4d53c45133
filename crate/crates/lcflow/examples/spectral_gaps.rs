//! Ground and second eigenvalues of the scalar layer forms over an eps sweep,
//! and the largest eigenvalue of the five-channel form.

use lcflow::spectral::{spectral_gap_sweep, theorem_report, FormKind, TheoremForm};

fn main() -> lcflow::Result<()> {
    let l = -0.5;
    let eps = [0.1, 0.05, 0.025];
    for kind in [FormKind::G0, FormKind::G1, FormKind::G2] {
        let sweep = spectral_gap_sweep(kind, l, &eps, None)?;
        println!("G{}:", kind.index());
        for r in &sweep.rows {
            println!(
                "  eps {:<6} N {:<6} lambda1 {:>13.5e}  lambda2 {:>12.5e}  lambda2*eps^2 {:.5}  (unit mass: {:.4e}, {:.4e})",
                r.epsilon, r.n, r.lambda1, r.lambda2, r.lambda2_eps2, r.lambda1_unweighted, r.lambda2_unweighted
            );
        }
        println!(
            "  c0 {:.4}  spread {:.3}  |lambda1| decreasing: {}",
            sweep.c0, sweep.gap_spread, sweep.ground_decreasing
        );
    }
    println!("five-channel form:");
    for e in [0.1, 0.05, 0.025, 0.0125] {
        let r = theorem_report(&TheoremForm::new(e, l)?)?;
        println!(
            "  eps {:<7} N {:<7} max eigenvalue {:>12.5e}  channels {:?}",
            e,
            r.n,
            r.max_eigenvalue,
            r.channel_max.map(|c| format!("{c:.3e}"))
        );
    }
    Ok(())
}
