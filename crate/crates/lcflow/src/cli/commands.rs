//! The command pipelines. Each returns the tables and summary it reports.

use serde_json::{json, Value};

use super::checks::{identity_checks, Check, CheckSizes};
use super::config::Config;
use super::report::{num, Table};
use super::runs::{droplet_run, slab_run, DropletSetup, SlabSetup};
use crate::approx::{
    residual, ApproxSolution, DirectorField, Geometry, GlueConfig, ResidualSweep, Sampling,
};
use crate::error::{Error, Result};
use crate::field::{PeriodicGrid, TimeSeries};
use crate::layer::{
    fundamental_pair, s_profile, scalar_force, simpson, volterra_fundamental, wronskian_profile,
    FundamentalKind, LayerContext, PairKind, UniformGrid,
};
use crate::spectral::{spectral_gap_sweep, theorem_report, FormKind, TheoremForm};
use crate::tensor::ModelParams;

/// Output of a command: named tables, a JSON summary and whether its
/// built-in checks passed.
pub struct Output {
    pub tables: Vec<(String, Table)>,
    pub summary: Value,
    pub passed: bool,
}

/// Smallest power of two with at least 8 nodes per `eps` on `box_len`.
pub fn auto_nodes(box_len: f64, eps: f64) -> usize {
    ((8.0 * box_len / eps).ceil() as usize).next_power_of_two()
}

fn series_table(s: &TimeSeries) -> Table {
    let cols: Vec<&str> = s.columns.iter().map(String::as_str).collect();
    let mut t = Table::new(&cols);
    for r in &s.rows {
        t.push_nums(r);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProfileSummary {
    pub max_ode_residual: f64,
    pub max_first_integral_defect: f64,
    /// `(2/3)(1 + 2L/3) ∫ s'^2` by quadrature, and its closed form.
    pub surface_tension: f64,
    pub surface_tension_exact: f64,
}

/// `s, s', s''` on `|z| <= z_max` with the ODE residual
/// `(1+2L/3) s'' + f(s)` and the first-integral defect
/// `(1+2L/3) s'^2 - s^2 (1-s)^2`.
pub fn profile_table(l: f64, z_max: f64, nodes: usize) -> Result<(Table, ProfileSummary)> {
    let ctx = LayerContext::new(l)?;
    let grid = UniformGrid::new(-z_max, z_max, nodes)?;
    let k = ctx.stiffness();
    let mut t = Table::new(&[
        "z",
        "s",
        "ds",
        "d2s",
        "ode_residual",
        "first_integral_defect",
    ]);
    let (mut res, mut fi): (f64, f64) = (0.0, 0.0);
    let mut ds2 = Vec::with_capacity(nodes);
    for z in grid.nodes() {
        let s = s_profile(z, &ctx, 0)?;
        let d1 = s_profile(z, &ctx, 1)?;
        let d2 = s_profile(z, &ctx, 2)?;
        let r = k * d2 + scalar_force(s);
        let f = k * d1 * d1 - s * s * (1.0 - s) * (1.0 - s);
        res = res.max(r.abs());
        fi = fi.max(f.abs());
        ds2.push(d1 * d1);
        t.push_nums(&[z, s, d1, d2, r, f]);
    }
    let tension = 2.0 / 3.0 * k * simpson(&ds2, grid.h());
    Ok((
        t,
        ProfileSummary {
            max_ode_residual: res,
            max_first_integral_defect: fi,
            surface_tension: tension,
            surface_tension_exact: k.sqrt() / 9.0,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WronskianRow {
    pub a: f64,
    pub w12: f64,
    pub w12_expected: f64,
    pub w12_variation: f64,
    pub w34: f64,
    pub w34_variation: f64,
}

/// Wronskians of the model fundamental solutions for each `A`.
pub fn model_wronskians(a_values: &[f64], y_max: f64, nodes: usize) -> Result<Vec<WronskianRow>> {
    let g = UniformGrid::new(-y_max, y_max, nodes)?;
    a_values
        .iter()
        .map(|&a| {
            let u: Vec<_> = [
                FundamentalKind::U1,
                FundamentalKind::U2,
                FundamentalKind::U3,
                FundamentalKind::U4,
            ]
            .into_iter()
            .map(|k| volterra_fundamental(k, a, &g))
            .collect::<Result<_>>()?;
            let (w12, v12, _) =
                wronskian_profile(&u[0].u.values, &u[0].du, &u[1].u.values, &u[1].du);
            let (w34, v34, _) =
                wronskian_profile(&u[2].u.values, &u[2].du, &u[3].u.values, &u[3].du);
            Ok(WronskianRow {
                a,
                w12,
                w12_expected: 2.0 / (1.0 + a).sqrt(),
                w12_variation: v12,
                w34,
                w34_variation: v34,
            })
        })
        .collect()
}

fn fundamentals(cfg: &Config) -> Result<Output> {
    let l = cfg.f64("L")?;
    let rows = model_wronskians(&cfg.f64_list("A")?, cfg.f64("y_max")?, cfg.usize("nodes")?)?;
    let mut t = Table::new(&[
        "pair",
        "parameter",
        "wronskian",
        "expected",
        "variation",
        "coverage",
    ]);
    let mut err12: f64 = 0.0;
    let mut err34: f64 = 0.0;
    let mut var: f64 = 0.0;
    for r in &rows {
        t.push(vec![
            "u1u2".into(),
            num(r.a),
            num(r.w12),
            num(r.w12_expected),
            num(r.w12_variation),
            String::new(),
        ]);
        t.push(vec![
            "u3u4".into(),
            num(r.a),
            num(r.w34),
            num(-1.0),
            num(r.w34_variation),
            String::new(),
        ]);
        err12 = err12.max((r.w12 - r.w12_expected).abs());
        err34 = err34.max((r.w34 + 1.0).abs());
        var = var.max(r.w12_variation).max(r.w34_variation);
    }
    let ctx = LayerContext::new(l)?;
    let mut layer = Vec::new();
    for (name, kind) in [("kappa", PairKind::Kappa), ("iota", PairKind::Iota)] {
        let p = fundamental_pair(kind, &ctx, &ctx.default_grid())?;
        t.push(vec![
            name.into(),
            num(l),
            num(p.wronskian),
            String::new(),
            num(p.wronskian_variation),
            num(p.wronskian_coverage),
        ]);
        layer.push(
            json!({"pair": name, "wronskian": p.wronskian, "variation": p.wronskian_variation}),
        );
        var = var.max(p.wronskian_variation);
    }
    let passed = err12 < 1e-6 && err34 < 1e-6 && var < 1e-6;
    Ok(Output {
        tables: vec![("fundamentals.csv".into(), t)],
        summary: json!({
            "model": rows,
            "layer_pairs": layer,
            "max_error_u1u2": err12,
            "max_error_u3u4": err34,
            "max_variation": var,
            "passed": passed,
        }),
        passed,
    })
}

fn profile(cfg: &Config) -> Result<Output> {
    let (t, s) = profile_table(cfg.f64("L")?, cfg.f64("z_max")?, cfg.usize("nodes")?)?;
    let passed = s.max_ode_residual < 1e-12 && s.max_first_integral_defect < 1e-12;
    Ok(Output {
        tables: vec![("profile.csv".into(), t)],
        summary: json!({ "profile": s, "passed": passed }),
        passed,
    })
}

fn spectrum(cfg: &Config) -> Result<Output> {
    let l = cfg.f64("L")?;
    let eps = cfg.f64_list("eps")?;
    let mut t = Table::new(&["kind", "epsilon", "N", "lambda1", "lambda2", "lambda2_eps2"]);
    let mut kinds = Vec::new();
    let mut passed = true;
    for k in cfg.usize_list("kinds")? {
        let kind = FormKind::from_index(k)?;
        let sweep = spectral_gap_sweep(kind, l, &eps, None)?;
        for r in &sweep.rows {
            t.push(vec![
                r.kind.to_string(),
                num(r.epsilon),
                r.n.to_string(),
                num(r.lambda1),
                num(r.lambda2),
                num(r.lambda2_eps2),
            ]);
        }
        let floor = sweep
            .rows
            .iter()
            .map(|r| r.lambda1 * r.epsilon * r.epsilon)
            .fold(f64::INFINITY, f64::min);
        let ok = match kind {
            FormKind::G2 => floor >= 0.9,
            _ => sweep.ground_decreasing && sweep.gap_positive() && sweep.gap_stable(),
        };
        passed &= ok;
        kinds.push(json!({
            "kind": k,
            "c0": sweep.c0,
            "gap_spread": sweep.gap_spread,
            "ground_decreasing": sweep.ground_decreasing,
            "ground_decay_rate": sweep.ground_decay_rate,
            "min_lambda1_eps2": floor,
            "passed": ok,
        }));
    }
    Ok(Output {
        tables: vec![("spectrum.csv".into(), t)],
        summary: json!({ "kinds": kinds, "passed": passed }),
        passed,
    })
}

/// Successive values grow by at most 10% of the previous magnitude.
pub fn bounded_sequence(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + 0.1 * w[0].abs())
}

fn thm_spectral(cfg: &Config) -> Result<Output> {
    let l = cfg.f64("L")?;
    let mut t = Table::new(&[
        "epsilon",
        "N",
        "max_eigenvalue",
        "channel0",
        "channel1",
        "channel2",
        "channel3",
        "channel4",
        "block_defect",
    ]);
    let mut seq = Vec::new();
    for e in cfg.f64_list("eps")? {
        let r = theorem_report(&TheoremForm::new(e, l)?)?;
        let mut row = vec![num(e), r.n.to_string(), num(r.max_eigenvalue)];
        row.extend(r.channel_max.iter().map(|&c| num(c)));
        row.push(num(r.block_defect));
        t.push(row);
        seq.push(r.max_eigenvalue);
    }
    let passed = bounded_sequence(&seq);
    Ok(Output {
        tables: vec![("thm-spectral.csv".into(), t)],
        summary: json!({ "max_eigenvalues": seq, "bounded": passed, "passed": passed }),
        passed,
    })
}

fn slab_setup(cfg: &Config) -> Result<SlabSetup> {
    let eps = cfg.f64("eps")?;
    let mut s = SlabSetup::new(cfg.f64("L")?, eps, 0);
    s.nodes = cfg
        .opt_usize("nodes")?
        .unwrap_or_else(|| auto_nodes(s.box_len, eps));
    s.half_width = cfg.f64("half_width")?;
    s.dt_factor = cfg.f64("dt_factor")?;
    s.record_every = cfg.usize("record_every")?;
    if let Some(t) = cfg.opt_f64("t_end")? {
        s.t_end = t;
    }
    Ok(s)
}

fn droplet_setup(cfg: &Config) -> Result<DropletSetup> {
    let eps = cfg.f64("eps")?;
    let mut s = DropletSetup::new(cfg.f64("L")?, eps, cfg.f64("R0")?, 0);
    s.nodes = cfg
        .opt_usize("nodes")?
        .unwrap_or_else(|| auto_nodes(s.box_len, eps));
    s.anchoring_width = cfg.f64("anchoring_width")?;
    s.dt_factor = cfg.f64("dt_factor")?;
    s.record_every = cfg.usize("record_every")?;
    Ok(s)
}

fn simulate(
    cfg: &Config,
    progress: &mut dyn FnMut(&[f64]),
) -> Result<(Output, crate::field::QField)> {
    match cfg.str("geometry")? {
        "slab" => {
            let s = slab_setup(cfg)?;
            let r = slab_run(&s, |row| progress(row))?;
            let h = s.box_len / s.nodes as f64;
            let passed = r.max_drift < h && r.energy_monotone;
            let summary = json!({
                "nodes": s.nodes,
                "steps": r.steps,
                "max_drift": r.max_drift,
                "h": h,
                "energy_monotone": r.energy_monotone,
                "passed": passed,
            });
            let t = series_table(&r.series);
            Ok((
                Output {
                    tables: vec![("simulate.csv".into(), t)],
                    summary,
                    passed,
                },
                r.final_field,
            ))
        }
        "disc" => {
            let s = droplet_setup(cfg)?;
            let r = droplet_run(&s, |row| progress(row))?;
            let summary = json!({
                "nodes": s.nodes,
                "steps": r.steps,
                "max_rel_error": r.max_rel_error,
                "energy_monotone": r.energy_monotone,
                "passed": r.energy_monotone,
            });
            Ok((
                Output {
                    tables: vec![("simulate.csv".into(), series_table(&r.series))],
                    summary,
                    passed: r.energy_monotone,
                },
                r.final_field,
            ))
        }
        g => Err(Error::Config(format!("geometry `{g}` is not slab or disc"))),
    }
}

fn droplet_compare(cfg: &Config, progress: &mut dyn FnMut(&[f64])) -> Result<Output> {
    let s = droplet_setup(cfg)?;
    let r = droplet_run(&s, |row| progress(row))?;
    let passed = r.max_rel_error < 0.05;
    Ok(Output {
        tables: vec![("droplet-compare.csv".into(), series_table(&r.series))],
        summary: json!({
            "nodes": s.nodes,
            "steps": r.steps,
            "max_rel_error": r.max_rel_error,
            "energy_monotone": r.energy_monotone,
            "vanished_at": r.vanished_at,
            "passed": passed,
        }),
        passed,
    })
}

/// Flat static residual and the radial sweep.
pub fn residual_scaling_sweep(cfg: &Config) -> Result<(f64, ResidualSweep)> {
    let l = cfg.f64("L")?;
    let flat_eps = cfg.f64("flat_eps")?;
    let slab = Geometry::slab([1.0, 0.0, 0.0], 0.5, 0.25, 1.0)?;
    let flat = ApproxSolution::new(
        slab,
        GlueConfig::full_band(),
        DirectorField::Normal,
        ModelParams::new(l, flat_eps)?,
    )?;
    let grid = PeriodicGrid::cube(1, cfg.usize("flat_nodes")?, 1.0)?;
    let flat_sup = residual(&flat, &Sampling::Grid(grid), 0.0)?.sup_norm;

    let dim = cfg.usize("dim")?;
    let sampling = Sampling::Tube {
        nodes_per_eps: cfg.f64("nodes_per_eps")?,
        angles: cfg.usize("angles")?,
    };
    let mut rows = Vec::new();
    for eps in cfg.f64_list("eps")? {
        let geom = Geometry::radial_mcf([0.0; 3], cfg.f64("R0")?, dim, l)?;
        let sol = ApproxSolution::new(
            geom,
            GlueConfig::new(cfg.f64("delta")?)?,
            DirectorField::Normal,
            ModelParams::new(l, eps)?,
        )?;
        rows.push(residual(&sol, &sampling, 0.0)?);
    }
    Ok((flat_sup, ResidualSweep::from_reports(rows)?))
}

fn residual_scaling(cfg: &Config) -> Result<Output> {
    let (flat_sup, sweep) = residual_scaling_sweep(cfg)?;
    let mut t = Table::new(&["epsilon", "sup_norm", "l2_norm"]);
    for r in &sweep.rows {
        t.push_nums(&[r.epsilon, r.sup_norm, r.l2_norm]);
    }
    let passed = flat_sup <= 1e-6 && (-1.3..=-0.7).contains(&sweep.sup_exponent);
    Ok(Output {
        tables: vec![("residual-scaling.csv".into(), t)],
        summary: json!({
            "flat_sup_norm": flat_sup,
            "sup_exponent": sweep.sup_exponent,
            "l2_exponent": sweep.l2_exponent,
            "channel_sup": sweep.rows.iter().map(|r| json!({"epsilon": r.epsilon, "channels": r.channel_sup})).collect::<Vec<_>>(),
            "passed": passed,
        }),
        passed,
    })
}

fn identity(cfg: &Config) -> Result<Output> {
    let sizes = CheckSizes {
        seed: cfg.usize("seed")? as u64,
        frames: cfg.usize("frames")?,
        pairs: cfg.usize("pairs")?,
        fields: cfg.usize("fields")?,
        field_nodes: cfg.usize("field_nodes")?,
    };
    let checks: Vec<Check> = identity_checks(&sizes)?;
    let mut t = Table::new(&["check", "cases", "max_defect", "tolerance", "passed"]);
    for c in &checks {
        t.push(vec![
            c.name.clone(),
            c.cases.to_string(),
            num(c.max_defect),
            num(c.tolerance),
            c.passed.to_string(),
        ]);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Output {
        tables: vec![("identity-checks.csv".into(), t)],
        summary: json!({ "checks": checks, "passed": passed }),
        passed,
    })
}

/// Runs the pipeline for `command`. Simulations report each recorded row
/// through `progress` and hand back their final field.
pub fn execute(
    command: &str,
    cfg: &Config,
    progress: &mut dyn FnMut(&[f64]),
) -> Result<(Output, Option<crate::field::QField>)> {
    Ok(match command {
        "profile" => (profile(cfg)?, None),
        "fundamentals" => (fundamentals(cfg)?, None),
        "spectrum" => (spectrum(cfg)?, None),
        "thm-spectral" => (thm_spectral(cfg)?, None),
        "simulate" => {
            let (o, f) = simulate(cfg, progress)?;
            (o, Some(f))
        }
        "droplet-compare" => (droplet_compare(cfg, progress)?, None),
        "residual-scaling" => (residual_scaling(cfg)?, None),
        "identity-checks" => (identity(cfg)?, None),
        c => return Err(Error::Config(format!("unknown command `{c}`"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_rule() {
        assert_eq!(auto_nodes(1.0, 0.02), 512);
        assert_eq!(auto_nodes(1.0, 0.04), 256);
        assert_eq!(auto_nodes(2.0, 0.05), 512);
    }

    #[test]
    fn growth_rule() {
        assert!(bounded_sequence(&[2.86e-3, 7.1e-4, 1.8e-4]));
        assert!(bounded_sequence(&[1.0, 1.1]));
        assert!(!bounded_sequence(&[1.0, 1.2]));
        assert!(bounded_sequence(&[-1.0, -0.95]));
    }

    #[test]
    fn profile_is_exact() {
        let (t, s) = profile_table(-0.5, 40.0, 801).unwrap();
        assert_eq!(t.rows.len(), 801);
        assert!(s.max_ode_residual < 1e-12 && s.max_first_integral_defect < 1e-12);
        assert!((s.surface_tension - s.surface_tension_exact).abs() < 1e-6);
    }
}
