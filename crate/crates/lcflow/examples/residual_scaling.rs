//! PDE residual of the glued leading-order solution: a flat static layer
//! (exact, so the residual is discretization error) and a shrinking circle
//! whose residual grows like 1/eps.

use lcflow::approx::{
    residual, ApproxSolution, DirectorField, Geometry, GlueConfig, ResidualSweep, Sampling,
};
use lcflow::field::PeriodicGrid;
use lcflow::tensor::ModelParams;

fn main() -> lcflow::Result<()> {
    let l = -0.5;

    let eps = 0.01;
    let slab = Geometry::slab([1.0, 0.0, 0.0], 0.5, 0.25, 1.0)?;
    let flat = ApproxSolution::new(
        slab,
        GlueConfig::full_band(),
        DirectorField::Normal,
        ModelParams::new(l, eps)?,
    )?;
    let r = residual(
        &flat,
        &Sampling::Grid(PeriodicGrid::cube(1, 1024, 1.0)?),
        0.0,
    )?;
    println!(
        "flat layer, eps {eps}: sup {:.3e}  l2 {:.3e}",
        r.sup_norm, r.l2_norm
    );

    let mut rows = Vec::new();
    for eps in [0.04, 0.02, 0.01] {
        let circle = Geometry::radial_mcf([0.0; 3], 0.8, 2, l)?;
        let sol = ApproxSolution::new(
            circle,
            GlueConfig::new(0.4)?,
            DirectorField::Normal,
            ModelParams::new(l, eps)?,
        )?;
        let r = residual(
            &sol,
            &Sampling::Tube {
                nodes_per_eps: 8.0,
                angles: 8,
            },
            0.0,
        )?;
        println!(
            "circle, eps {eps}: sup {:.4e}  l2 {:.4e}  |R:E^i| {:?}",
            r.sup_norm,
            r.l2_norm,
            r.channel_sup.map(|c| format!("{c:.2e}"))
        );
        rows.push(r);
    }
    let sweep = ResidualSweep::from_reports(rows)?;
    println!(
        "fitted exponents: sup {:.3}  l2 {:.3}",
        sweep.sup_exponent, sweep.l2_exponent
    );
    sweep.write_csv(std::io::stdout())?;
    Ok(())
}
