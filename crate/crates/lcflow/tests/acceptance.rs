//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `EXPECTED_FAILURES` are run at their stated
//! tolerances; a failure there is reported but does not fail the target.

use std::time::Instant;

use lcflow::cli::checks::{divcurl, hessian_diagonal, hessian_vs_jacobian};
use lcflow::cli::commands::{
    bounded_sequence, model_wronskians, profile_table, residual_scaling_sweep,
};
use lcflow::cli::runs::{droplet_run, flat_layer_tension, slab_run, DropletSetup, SlabSetup};
use lcflow::cli::{run, Scenario};
use lcflow::layer::{
    potential, s_profile, solve_layer, GridFn, LayerContext, LayerKind, Potential, Tail,
    UniformGrid,
};
use lcflow::spectral::{spectral_gap_sweep, theorem_report, FormKind, TheoremForm};
use lcflow::Error;

/// Shrinking-disc comparison; see the project notes for the analysis.
const EXPECTED_FAILURES: [usize; 1] = [9];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

type Criterion = (usize, &'static str, fn() -> lcflow::Result<Outcome>);

fn c1_profile() -> lcflow::Result<Outcome> {
    let t = Instant::now();
    let mut worst: (f64, f64) = (0.0, 0.0);
    for l in [-1.4, -1.0, -0.5, -0.1] {
        let ctx = LayerContext::new(l)?;
        let (_, s) = profile_table(l, 40.0, 8001)?;
        worst.0 = worst.0.max(s.max_ode_residual);
        worst.1 = worst.1.max(s.max_first_integral_defect);
        // one point past the table's range, where s' is tiny and s'' is not
        let z = -40.0;
        let d1 = s_profile(z, &ctx, 1)?;
        let s0 = s_profile(z, &ctx, 0)?;
        worst.1 = worst
            .1
            .max((ctx.stiffness() * d1 * d1 - s0 * s0 * (1.0 - s0) * (1.0 - s0)).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    Ok(outcome(
        worst.0 < 1e-12 && worst.1 < 1e-12 && secs < 1.0,
        format!(
            "ode residual {:.2e}, first integral {:.2e}, {secs:.2}s",
            worst.0, worst.1
        ),
    ))
}

fn c2_endpoints() -> lcflow::Result<Outcome> {
    let v = [
        potential(Potential::Theta, 0.0),
        potential(Potential::Theta, 1.0),
        potential(Potential::Kappa, 1.0),
        potential(Potential::Iota, 1.0),
    ];
    Ok(outcome(
        v == [1.0, 1.0, 0.0, 9.0],
        format!("theta(0), theta(1), kappa(1), iota(1) = {v:?}"),
    ))
}

fn c3_hessian() -> lcflow::Result<Outcome> {
    let d = hessian_diagonal(20, 11)?;
    let j = hessian_vs_jacobian(100, 12);
    Ok(outcome(
        d.passed && j.passed,
        format!(
            "diagonal defect {:.2e} over {} cases, jacobian defect {:.2e} over {} pairs",
            d.max_defect, d.cases, j.max_defect, j.cases
        ),
    ))
}

fn c4_wronskians() -> lcflow::Result<Outcome> {
    let t = Instant::now();
    let rows = model_wronskians(&[0.1, 0.5, 1.0], 40.0, 4001)?;
    let e12 = rows
        .iter()
        .map(|r| (r.w12 - r.w12_expected).abs())
        .fold(0.0, f64::max);
    let e34 = rows.iter().map(|r| (r.w34 + 1.0).abs()).fold(0.0, f64::max);
    let var = rows
        .iter()
        .map(|r| r.w12_variation.max(r.w34_variation))
        .fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64();
    Ok(outcome(
        e12 < 1e-6 && e34 < 1e-6 && var < 1e-6 && secs < 10.0,
        format!(
            "|W12 - 2/sqrt(1+A)| {e12:.2e}, |W34 + 1| {e34:.2e}, variation {var:.2e}, {secs:.2}s"
        ),
    ))
}

fn sup_diff(a: &GridFn, f: impl Fn(f64) -> f64) -> f64 {
    a.grid
        .nodes()
        .zip(&a.values)
        .fold(0.0, |m, (z, v)| m.max((v - f(z)).abs()))
}

fn c5_layer_solvers() -> lcflow::Result<Outcome> {
    let mut notes = Vec::new();
    let mut ok = true;

    // type0: exact solution s''
    let c = LayerContext::new(-0.5)?;
    let g = c.gamma;
    let grid = UniformGrid::new(-40.0 / g, 40.0 / g, 8001)?;
    let sd = |k: u8| move |z: f64| s_profile(z, &c, k).unwrap();
    let s4 = |z: f64| {
        let s = sd(0)(z);
        let t = 1.0 - s;
        g.powi(4) * s * t * ((t - s) * potential(Potential::Theta, s) + s * t * (12.0 * s - 6.0))
    };
    let rhs0 = GridFn::sample(grid, [Tail::exp(0.0, g); 2], |z| {
        -c.stiffness() * s4(z) + potential(Potential::Theta, sd(0)(z)) * sd(2)(z)
    });
    let e0 = sup_diff(&solve_layer(LayerKind::Type0, &rhs0, &c, None)?, sd(2));
    ok &= e0 < 1e-7;
    notes.push(format!("type0 {e0:.1e}"));

    // type1: exact solution s^2 + s'
    let exact1 = |z: f64| sd(0)(z).powi(2) + sd(1)(z);
    let rhs1 = GridFn::sample(grid, [Tail::exp(0.0, g); 2], |z| {
        let (s, d1, d2, d3) = (sd(0)(z), sd(1)(z), sd(2)(z), sd(3)(z));
        -c.shear_stiffness() * (2.0 * d1 * d1 + 2.0 * s * d2 + d3)
            + potential(Potential::Kappa, s) * exact1(z)
    });
    let e1 = sup_diff(&solve_layer(LayerKind::Type1, &rhs1, &c, None)?, exact1);
    ok &= e1 < 1e-7;
    notes.push(format!("type1 {e1:.1e}"));

    // type2: exact solution s^3
    let rhs2 = GridFn::sample(grid, [Tail::exp(0.0, 3.0 * g), Tail::exp(9.0, g)], |z| {
        let (s, d1, d2) = (sd(0)(z), sd(1)(z), sd(2)(z));
        -(6.0 * s * d1 * d1 + 3.0 * s * s * d2) + potential(Potential::Iota, s) * s.powi(3)
    });
    let e2 = sup_diff(&solve_layer(LayerKind::Type2, &rhs2, &c, None)?, |z| {
        sd(0)(z).powi(3)
    });
    ok &= e2 < 1e-7;
    notes.push(format!("type2 {e2:.1e}"));

    // incompatible type0 data: f0 = s', whose integral against s' is gamma/6
    let bad = GridFn::sample(grid, [Tail::exp(0.0, g); 2], sd(1));
    match solve_layer(LayerKind::Type0, &bad, &c, None) {
        Err(Error::Solvability { integral, .. }) => {
            ok &= (integral - g / 6.0).abs() < 1e-8;
            notes.push(format!(
                "type0 rejected, integral {integral:.8} vs gamma/6 {:.8}",
                g / 6.0
            ));
        }
        other => {
            ok = false;
            notes.push(format!("type0 not rejected: {other:?}"));
        }
    }

    // type2 far field f2+/9 for data converging to f2+ = 4.5
    let f_plus = 4.5;
    let rhs = GridFn::sample(grid, [Tail::exp(0.0, 2.0 * g), Tail::exp(f_plus, g)], |z| {
        f_plus * sd(0)(z).powi(2)
    });
    let sol = solve_layer(LayerKind::Type2, &rhs, &c, None)?;
    let limit = sol.tails[1].limit().unwrap_or(f64::NAN);
    let far = *sol.values.last().unwrap();
    let el = (limit - f_plus / 9.0).abs().max((far - f_plus / 9.0).abs());
    ok &= el < 1e-6;
    notes.push(format!("type2 limit error {el:.1e}"));
    Ok(outcome(ok, notes.join(", ")))
}

fn c6_divcurl() -> lcflow::Result<Outcome> {
    let t = Instant::now();
    let [p, i] = divcurl(20, 64, 2024)?;
    let secs = t.elapsed().as_secs_f64();
    Ok(outcome(
        p.passed && i.passed && secs < 30.0,
        format!(
            "pointwise {:.2e}, integrated {:.2e}, {secs:.1}s",
            p.max_defect, i.max_defect
        ),
    ))
}

fn c7_tension() -> lcflow::Result<Outcome> {
    let mut worst: f64 = 0.0;
    for l in [-1.4, -1.0, -0.5, -0.1] {
        let sigma = flat_layer_tension(l, 0.02, 2048)?;
        worst = worst.max((sigma - (1.0 + 2.0 * l / 3.0f64).sqrt() / 9.0).abs());
    }
    Ok(outcome(
        worst < 1e-6,
        format!("largest |eps E/area - sqrt(1+2L/3)/9| {worst:.2e}"),
    ))
}

fn c8_stationary() -> lcflow::Result<Outcome> {
    let setup = SlabSetup::new(-0.5, 0.05, 512);
    let r = slab_run(&setup, |_| {})?;
    let h = setup.box_len / setup.nodes as f64;
    Ok(outcome(
        r.max_drift < h && r.energy_monotone,
        format!(
            "drift {:.2e} (h {h:.2e}), energy monotone {}, {} steps",
            r.max_drift, r.energy_monotone, r.steps
        ),
    ))
}

fn c9_mean_curvature() -> lcflow::Result<Outcome> {
    let mut ok = true;
    let mut notes = Vec::new();
    for l in [-0.5, -1.0] {
        let mut err = Vec::new();
        for eps in [0.04, 0.02] {
            let r = droplet_run(&DropletSetup::new(l, eps, 0.3, 512), |_| {})?;
            err.push(r.max_rel_error);
        }
        let good = err[1] < 0.05 && err[1] < err[0];
        ok &= good;
        notes.push(format!(
            "L {l}: rel err {:.3} (eps 0.04), {:.3} (eps 0.02)",
            err[0], err[1]
        ));
    }
    Ok(outcome(ok, notes.join("; ")))
}

fn c10_gaps() -> lcflow::Result<Outcome> {
    let eps = [0.1, 0.05, 0.025];
    let mut ok = true;
    let mut notes = Vec::new();
    for kind in [FormKind::G0, FormKind::G1] {
        let s = spectral_gap_sweep(kind, -0.5, &eps, None)?;
        ok &= s.ground_decreasing && s.gap_positive() && s.gap_stable();
        notes.push(format!(
            "G{}: |lambda1| decreasing {}, lambda2 eps^2 in [{:.3}, {:.3}]",
            kind.index(),
            s.ground_decreasing,
            s.c0,
            s.c0 * s.gap_spread
        ));
    }
    let s = spectral_gap_sweep(FormKind::G2, -0.5, &eps, None)?;
    let floor = s
        .rows
        .iter()
        .map(|r| r.lambda1 * r.epsilon * r.epsilon)
        .fold(f64::INFINITY, f64::min);
    ok &= floor >= 0.9;
    notes.push(format!("G2: min lambda1 eps^2 {floor:.4}"));
    Ok(outcome(ok, notes.join("; ")))
}

fn c11_theorem_form() -> lcflow::Result<Outcome> {
    let seq: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&e| Ok(theorem_report(&TheoremForm::new(e, -0.5)?)?.max_eigenvalue))
        .collect::<lcflow::Result<_>>()?;
    Ok(outcome(
        bounded_sequence(&seq),
        format!(
            "max eigenvalues {:?}",
            seq.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()
        ),
    ))
}

fn c12_residual() -> lcflow::Result<Outcome> {
    let sc = Scenario::new("residual-scaling")?;
    let (flat, sweep) = residual_scaling_sweep(&sc.config)?;
    Ok(outcome(
        flat <= 1e-6 && (-1.3..=-0.7).contains(&sweep.sup_exponent),
        format!(
            "flat sup {flat:.2e}, radial sup exponent {:.3}",
            sweep.sup_exponent
        ),
    ))
}

fn c13_determinism() -> lcflow::Result<Outcome> {
    let scenarios: [&[&str]; 5] = [
        &["profile"],
        &["spectrum"],
        &["simulate", "--t_end", "0.02"],
        &["residual-scaling"],
        &["identity-checks", "--fields", "2", "--field_nodes", "16"],
    ];
    let dir = tempfile::tempdir()?;
    let read_all = || -> std::io::Result<Vec<(std::ffi::OsString, Vec<u8>)>> {
        let mut files = Vec::new();
        for e in std::fs::read_dir(dir.path())? {
            let e = e?;
            files.push((e.file_name(), std::fs::read(e.path())?));
        }
        files.sort();
        Ok(files)
    };
    let mut runs = Vec::new();
    for _ in 0..2 {
        for args in scenarios {
            let mut a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            a.extend([
                "--threads".into(),
                "1".into(),
                "--out".into(),
                dir.path().display().to_string(),
            ]);
            run(&Scenario::from_args(&a)?)?;
        }
        runs.push(read_all()?);
    }
    let mut compared = 0;
    for ((name, a), (_, b)) in runs[0].iter().zip(&runs[1]) {
        if a != b {
            return Ok(outcome(
                false,
                format!("{} differs between runs", name.to_string_lossy()),
            ));
        }
        compared += 1;
    }
    Ok(outcome(
        compared >= 15,
        format!("{compared} files byte-identical across two runs"),
    ))
}

fn main() {
    let criteria: [Criterion; 13] = [
        (1, "profile exactness", c1_profile),
        (2, "potential endpoints", c2_endpoints),
        (3, "hessian diagonalization", c3_hessian),
        (4, "wronskians", c4_wronskians),
        (5, "layer-ode solvers", c5_layer_solvers),
        (6, "div-curl identity", c6_divcurl),
        (7, "surface tension", c7_tension),
        (8, "stationary layer", c8_stationary),
        (9, "mean curvature flow", c9_mean_curvature),
        (10, "spectral gaps", c10_gaps),
        (11, "five-channel form bound", c11_theorem_form),
        (12, "residual scaling", c12_residual),
        (13, "determinism", c13_determinism),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let (passed, detail) = match f() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let expected_fail = EXPECTED_FAILURES.contains(&id);
        let tag = match (passed, expected_fail) {
            (true, false) => "PASS",
            (true, true) => "PASS (XPASS)",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!(
            "criterion {id:>2} {name:<26} {tag:<16} {detail} [{:.1}s]",
            t.elapsed().as_secs_f64()
        );
        if !passed && !expected_fail {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
