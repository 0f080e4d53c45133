//! Simulation pipelines shared by the commands.

use crate::approx::{build_q0, ApproxSolution, DirectorField, Geometry, GlueConfig};
use crate::error::{Error, Result};
use crate::field::{
    energy, interface_locate, Interface, PeriodicGrid, Probe, QField, Scheme, SimConfig,
    Simulation, Spectral, TimeSeries,
};
use crate::tensor::{ModelParams, Vec3};

/// Isotropic disc in a periodic nematic whose director is normal to the
/// interface and escapes to `e3` away from it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DropletSetup {
    pub l: f64,
    pub epsilon: f64,
    pub r0: f64,
    pub nodes: usize,
    pub box_len: f64,
    /// Distance over which the director turns from `∇d` to `e3`.
    pub anchoring_width: f64,
    /// `dt = dt_factor eps^2`.
    pub dt_factor: f64,
    pub record_every: usize,
    /// Stop once the predicted radius falls below `stop_radius_eps * eps`.
    pub stop_radius_eps: f64,
}

impl DropletSetup {
    pub fn new(l: f64, epsilon: f64, r0: f64, nodes: usize) -> Self {
        DropletSetup {
            l,
            epsilon,
            r0,
            nodes,
            box_len: 1.0,
            anchoring_width: 0.2,
            dt_factor: 0.1,
            record_every: 25,
            stop_radius_eps: 4.0,
        }
    }

    pub fn center(&self) -> Vec3 {
        [0.5 * self.box_len, 0.5 * self.box_len, 0.0]
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::radial_mcf(self.center(), self.r0, 2, self.l)
    }

    pub fn initial_field(&self) -> Result<QField> {
        let params = ModelParams::new(self.l, self.epsilon)?;
        if self.anchoring_width > self.r0 || self.r0 + self.anchoring_width > 0.5 * self.box_len {
            return Err(Error::Config(format!(
                "anchoring width {} must fit between the center, the interface at {} and the box edge",
                self.anchoring_width, self.r0
            )));
        }
        let dir = DirectorField::Escaped {
            width: self.anchoring_width,
            axis: [0.0, 0.0, 1.0],
        };
        let sol = ApproxSolution::new(self.geometry()?, GlueConfig::full_band(), dir, params)?;
        let grid = PeriodicGrid::cube(2, self.nodes, self.box_len)?;
        build_q0(&sol, grid, 0.0)
    }

    /// Time at which the predicted radius reaches the stop radius.
    pub fn t_end(&self) -> f64 {
        let k = 1.0 + 2.0 * self.l / 3.0;
        let rs = self.stop_radius_eps * self.epsilon;
        ((self.r0 * self.r0 - rs * rs) / (2.0 * k)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DropletResult {
    pub setup: DropletSetup,
    /// Columns `t, energy, radius, radius_sq, predicted_r2, rel_error`.
    pub series: TimeSeries,
    /// Largest relative error of `R^2` while the measured `R > 4 eps`.
    pub max_rel_error: f64,
    pub energy_monotone: bool,
    /// Time at which the disc was first found gone, if before `t_end`.
    pub vanished_at: Option<f64>,
    pub steps: usize,
    #[serde(skip)]
    pub final_field: QField,
}

/// Runs the shrinking-disc simulation and compares `R(t)^2` with the
/// mean-curvature prediction.
pub fn droplet_run(setup: &DropletSetup, mut observe: impl FnMut(&[f64])) -> Result<DropletResult> {
    let field = setup.initial_field()?;
    let geom = setup.geometry()?;
    let cfg = SimConfig {
        dt: setup.dt_factor * setup.epsilon * setup.epsilon,
        t_end: setup.t_end(),
        scheme: Scheme::SemiImplicitFourier,
        record_every: setup.record_every,
    };
    let mut sim = Simulation::new(field, cfg)?;
    let c = setup.center();
    let mut series = TimeSeries::new("radius", &["radius_sq", "predicted_r2", "rel_error"]);
    let mut max_rel: f64 = 0.0;
    let mut last_energy = f64::INFINITY;
    let mut monotone = true;
    let window = 4.0 * setup.epsilon;
    let mut vanished_at = None;
    sim.run_while(|s| {
        let f = s.field();
        let probe = Probe::Radial {
            center: c,
            director: None,
        };
        let radius = match interface_locate(f, &probe) {
            Ok(Interface::Radial { radius, .. }) => radius,
            Err(Error::NotLayered(_)) if !series.rows.is_empty() => {
                vanished_at = Some(f.time);
                return Ok(false);
            }
            Ok(_) => unreachable!(),
            Err(e) => return Err(e),
        };
        let e = s.energy();
        if e > last_energy + 1e-9 * (1.0 + last_energy.abs()) {
            monotone = false;
        }
        last_energy = e;
        let pred = geom.radius_sq(f.time);
        let rel = (radius * radius - pred).abs() / pred;
        if radius > window {
            max_rel = max_rel.max(rel);
        }
        let row = vec![f.time, e, radius, radius * radius, pred, rel];
        observe(&row);
        series.push(row)?;
        Ok(true)
    })?;
    Ok(DropletResult {
        setup: *setup,
        series,
        max_rel_error: max_rel,
        energy_monotone: monotone,
        vanished_at,
        steps: sim.steps_taken(),
        final_field: sim.into_field(),
    })
}

/// Flat nematic slab `|x - center| < half_width` on a 1-d periodic box,
/// started from the glued layer profile with director `e1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SlabSetup {
    pub l: f64,
    pub epsilon: f64,
    pub nodes: usize,
    pub box_len: f64,
    pub half_width: f64,
    pub delta: f64,
    pub dt_factor: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl SlabSetup {
    pub fn new(l: f64, epsilon: f64, nodes: usize) -> Self {
        SlabSetup {
            l,
            epsilon,
            nodes,
            box_len: 2.0,
            half_width: 0.5,
            delta: 8.0 * epsilon,
            dt_factor: 0.1,
            t_end: 0.1,
            record_every: 50,
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::slab(
            [1.0, 0.0, 0.0],
            0.5 * self.box_len,
            self.half_width,
            self.box_len,
        )
    }

    pub fn initial_field(&self) -> Result<QField> {
        let params = ModelParams::new(self.l, self.epsilon)?;
        let glue = if self.delta.is_finite() {
            GlueConfig::new(self.delta)?
        } else {
            GlueConfig::full_band()
        };
        let sol = ApproxSolution::new(
            self.geometry()?,
            glue,
            DirectorField::Constant([1.0, 0.0, 0.0]),
            params,
        )?;
        let grid = PeriodicGrid::cube(1, self.nodes, self.box_len)?;
        build_q0(&sol, grid, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SlabResult {
    pub setup: SlabSetup,
    /// Columns `t, energy, left, right`.
    pub series: TimeSeries,
    /// Largest displacement of either interface from its start.
    pub max_drift: f64,
    pub energy_monotone: bool,
    pub steps: usize,
    #[serde(skip)]
    pub final_field: QField,
}

/// Evolves the slab and tracks both interfaces.
pub fn slab_run(setup: &SlabSetup, mut observe: impl FnMut(&[f64])) -> Result<SlabResult> {
    let field = setup.initial_field()?;
    let cfg = SimConfig {
        dt: setup.dt_factor * setup.epsilon * setup.epsilon,
        t_end: setup.t_end,
        scheme: Scheme::SemiImplicitFourier,
        record_every: setup.record_every,
    };
    let mut sim = Simulation::new(field, cfg)?;
    let mut series = TimeSeries::new("left", &["right"]);
    let mut start: Option<[f64; 2]> = None;
    let mut drift: f64 = 0.0;
    let mut last = f64::INFINITY;
    let mut monotone = true;
    sim.run(|s| {
        let probe = Probe::Flat {
            axis: 0,
            director: [1.0, 0.0, 0.0],
        };
        let Interface::Flat { crossings, .. } = interface_locate(s.field(), &probe)? else {
            unreachable!()
        };
        if crossings.len() != 2 {
            return Err(Error::NotLayered(format!(
                "{} interfaces in a slab",
                crossings.len()
            )));
        }
        let x = [crossings[0], crossings[1]];
        let x0 = *start.get_or_insert(x);
        drift = drift.max((x[0] - x0[0]).abs()).max((x[1] - x0[1]).abs());
        let e = s.energy();
        if e > last + 1e-12 * (1.0 + last.abs()) {
            monotone = false;
        }
        last = e;
        let row = vec![s.field().time, e, x[0], x[1]];
        observe(&row);
        series.push(row)
    })?;
    Ok(SlabResult {
        setup: *setup,
        series,
        max_drift: drift,
        energy_monotone: monotone && sim.energy_violations == 0,
        steps: sim.steps_taken(),
        final_field: sim.into_field(),
    })
}

/// `eps` times the energy per unit area of one flat layer, measured on a
/// periodic slab (two layers) with spectral derivatives.
pub fn flat_layer_tension(l: f64, epsilon: f64, nodes: usize) -> Result<f64> {
    let mut setup = SlabSetup::new(l, epsilon, nodes);
    setup.delta = f64::INFINITY;
    let field = setup.initial_field()?;
    let e = energy(&field, &Spectral::new(&field.grid));
    Ok(0.5 * epsilon * e)
}
