//! The one-dimensional transition profile, its surface tension, and the
//! Wronskians of the fundamental pairs behind the layer solvers.

use lcflow::cli::commands::{model_wronskians, profile_table};
use lcflow::layer::{fundamental_pair, LayerContext, PairKind};

fn main() -> lcflow::Result<()> {
    for l in [-1.2, -0.5, -0.1] {
        let (_, s) = profile_table(l, 40.0, 4001)?;
        println!(
            "L {l:>5}: ode residual {:.1e}, first integral {:.1e}, tension {:.12} (exact {:.12})",
            s.max_ode_residual,
            s.max_first_integral_defect,
            s.surface_tension,
            s.surface_tension_exact
        );
    }

    println!("\nmodel pairs");
    for r in model_wronskians(&[0.1, 0.5, 1.0, 4.0], 40.0, 4001)? {
        println!(
            "  A {:>4}: W(u1,u2) {:.10} expected {:.10}, W(u3,u4) {:.10}",
            r.a, r.w12, r.w12_expected, r.w34
        );
    }

    println!("\nlayer pairs at L = -0.5");
    let ctx = LayerContext::new(-0.5)?;
    for kind in [PairKind::Kappa, PairKind::Iota] {
        let p = fundamental_pair(kind, &ctx, &ctx.default_grid())?;
        println!(
            "  {kind:?}: W {:.10}, variation {:.1e}",
            p.wronskian, p.wronskian_variation
        );
    }
    Ok(())
}
