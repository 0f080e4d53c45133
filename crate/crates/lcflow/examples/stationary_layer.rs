//! A flat nematic slab held in a periodic box: both interfaces should stay
//! put while the energy relaxes, and the energy per unit area of one layer
//! gives the surface tension.

use lcflow::cli::runs::{flat_layer_tension, slab_run, SlabSetup};

fn main() -> lcflow::Result<()> {
    let setup = SlabSetup::new(-0.5, 0.05, 512);
    println!("{:>8} {:>16} {:>10} {:>10}", "t", "energy", "left", "right");
    let res = slab_run(&setup, |r| {
        println!(
            "{:>8.4} {:>16.10e} {:>10.6} {:>10.6}",
            r[0], r[1], r[2], r[3]
        )
    })?;
    println!(
        "drift {:.3e} (h = {:.3e}), energy monotone: {}",
        res.max_drift,
        setup.box_len / setup.nodes as f64,
        res.energy_monotone
    );

    for l in [-1.4, -1.0, -0.5, -0.1] {
        let sigma = flat_layer_tension(l, 0.02, 2048)?;
        let exact = (1.0 + 2.0 * l / 3.0f64).sqrt() / 9.0;
        println!("L {l:>5}: eps*energy/area {sigma:.10}  sqrt(1+2L/3)/9 {exact:.10}");
    }
    Ok(())
}
