use num_complex::Complex64;
use rayon::prelude::*;

use super::ops::{elastic_apply_fd4, energy, forward_all, inverse_all, semi_implicit_update};
use super::{QField, Spectral, Q_BOUND};
use crate::error::{Error, Result};
use crate::tensor::{bulk_force, bulk_potential, SymTraceless3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Scheme {
    /// Forward Euler with fourth-order differences.
    Explicit,
    /// Elastic term implicit in Fourier space, bulk force explicit.
    SemiImplicitFourier,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
}

impl SimConfig {
    /// `dt = 0.1 eps^2` with the semi-implicit scheme.
    pub fn semi_implicit(eps: f64, t_end: f64) -> Self {
        SimConfig {
            dt: 0.1 * eps * eps,
            t_end,
            scheme: Scheme::SemiImplicitFourier,
            record_every: 10,
        }
    }

    /// Number of steps to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Largest stable step for a field.
///
/// The bulk force is explicit in both schemes and its linearization at the
/// nematic well has eigenvalue `-9/eps^2`, so `dt < 2 eps^2 / 9`. The
/// explicit scheme additionally obeys
/// `dt <= 0.2 min(eps^2, h^2 / (2 dim (1 + |L|)))`.
pub fn stability_bound(field: &QField, scheme: Scheme) -> f64 {
    let eps2 = field.params.epsilon * field.params.epsilon;
    match scheme {
        Scheme::SemiImplicitFourier => 2.0 * eps2 / 9.0,
        Scheme::Explicit => {
            let h = field.grid.min_h();
            let dim = field.grid.dim as f64;
            0.2 * eps2.min(h * h / (2.0 * dim * (1.0 + field.params.l.abs())))
        }
    }
}

const ENERGY_TOL: f64 = 1e-9;
const MAX_VIOLATIONS: usize = 3;

/// A running gradient-flow simulation with an energy monitor.
#[derive(Debug)]
pub struct Simulation {
    field: QField,
    cfg: SimConfig,
    sp: Spectral,
    steps: usize,
    /// Energy of the state before the most recent step.
    last_energy: Option<f64>,
    consecutive: usize,
    pub energy_violations: usize,
    pub max_energy_increase: f64,
}

impl Simulation {
    pub fn new(field: QField, cfg: SimConfig) -> Result<Self> {
        field.validate()?;
        if !(cfg.dt > 0.0) || !(cfg.t_end >= 0.0) || cfg.record_every == 0 {
            return Err(Error::Config(format!(
                "need dt > 0, t_end >= 0 and record_every >= 1 (got {}, {}, {})",
                cfg.dt, cfg.t_end, cfg.record_every
            )));
        }
        let bound = stability_bound(&field, cfg.scheme);
        if cfg.dt > bound {
            return Err(Error::StabilityViolation { dt: cfg.dt, bound });
        }
        let sp = Spectral::new(&field.grid);
        Ok(Simulation {
            field,
            cfg,
            sp,
            steps: 0,
            last_energy: None,
            consecutive: 0,
            energy_violations: 0,
            max_energy_increase: 0.0,
        })
    }

    pub fn field(&self) -> &QField {
        &self.field
    }

    pub fn into_field(self) -> QField {
        self.field
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn energy(&self) -> f64 {
        energy(&self.field, &self.sp)
    }

    fn monitor(&mut self, e: f64) -> Result<()> {
        if let Some(prev) = self.last_energy {
            let rise = e - prev;
            if rise > ENERGY_TOL * (1.0 + prev.abs()) {
                self.energy_violations += 1;
                self.consecutive += 1;
                self.max_energy_increase = self.max_energy_increase.max(rise);
                log::warn!(
                    "energy increased by {rise:.3e} at step {} (t = {:.6e})",
                    self.steps,
                    self.field.time
                );
                if self.consecutive >= MAX_VIOLATIONS {
                    return Err(Error::Integration {
                        step: self.steps,
                        time: self.field.time,
                        reason: format!("energy increased in {MAX_VIOLATIONS} consecutive steps"),
                    });
                }
            } else {
                self.consecutive = 0;
            }
        }
        self.last_energy = Some(e);
        Ok(())
    }

    /// Advances one step.
    pub fn step(&mut self) -> Result<()> {
        let e_before = match self.cfg.scheme {
            Scheme::SemiImplicitFourier => self.semi_implicit_step(),
            Scheme::Explicit => self.explicit_step(),
        };
        self.monitor(e_before)?;
        self.steps += 1;
        self.field.time += self.cfg.dt;
        for (i, q) in self.field.data.iter().enumerate() {
            if !q.is_finite() || q.norm() > Q_BOUND {
                return Err(Error::Integration {
                    step: self.steps,
                    time: self.field.time,
                    reason: format!(
                        "node {i}: |Q| = {} (non-finite or beyond {Q_BOUND})",
                        q.norm()
                    ),
                });
            }
        }
        Ok(())
    }

    /// Returns the energy of the state before the step.
    fn semi_implicit_step(&mut self) -> f64 {
        let p = self.field.params;
        let eps2 = p.epsilon * p.epsilon;
        let dt = self.cfg.dt;
        let comps = self.field.components();
        let force: Vec<SymTraceless3> = self
            .field
            .data
            .par_iter()
            .map(|q| bulk_force(q, &p) * (1.0 / eps2))
            .collect();
        let fcomps: [Vec<f64>; 5] = std::array::from_fn(|c| force.iter().map(|q| q.0[c]).collect());
        let mut hats = forward_all(&self.sp, &comps);
        let fhats = forward_all(&self.sp, &fcomps);
        let n = self.field.grid.len();
        let sp = &self.sp;
        let l = p.l;
        let (updated, elastic): (Vec<[Complex64; 5]>, Vec<f64>) = (0..n)
            .into_par_iter()
            .map(|i| {
                let k = sp.wavevector(i);
                let q: [Complex64; 5] = std::array::from_fn(|c| hats[c][i]);
                let f: [Complex64; 5] = std::array::from_fn(|c| fhats[c][i]);
                semi_implicit_update(&q, &f, &k, dt, l)
            })
            .unzip();
        for (i, c) in updated.iter().enumerate() {
            for q in 0..5 {
                hats[q][i] = c[q];
            }
        }
        let nn = n as f64;
        let el = 0.5 * elastic.iter().sum::<f64>() * self.field.grid.volume() / (nn * nn);
        let bulk = self
            .field
            .data
            .iter()
            .map(|q| bulk_potential(q, &p))
            .sum::<f64>()
            * self.field.grid.cell_volume()
            / eps2;
        let next = inverse_all(&self.sp, hats);
        self.field.set_components(&next);
        bulk + el
    }

    fn explicit_step(&mut self) -> f64 {
        let p = self.field.params;
        let eps2 = p.epsilon * p.epsilon;
        let e = energy(&self.field, &self.sp);
        let lap = elastic_apply_fd4(&self.field);
        let dt = self.cfg.dt;
        for (q, lq) in self.field.data.iter_mut().zip(&lap.data) {
            let f = bulk_force(q, &p);
            *q += (*lq + f * (1.0 / eps2)) * dt;
        }
        e
    }

    /// Runs to `t_end`, calling `observe` on the initial state, every
    /// `record_every` steps and on the final state.
    pub fn run(&mut self, mut observe: impl FnMut(&Simulation) -> Result<()>) -> Result<()> {
        self.run_while(|s| observe(s).map(|_| true))
    }

    /// Like [`Simulation::run`], but stops early once `observe` returns
    /// `false`.
    pub fn run_while(
        &mut self,
        mut observe: impl FnMut(&Simulation) -> Result<bool>,
    ) -> Result<()> {
        if !observe(self)? {
            return Ok(());
        }
        let total = self.cfg.steps();
        for k in 1..=total {
            self.step()?;
            if (k % self.cfg.record_every == 0 || k == total) && !observe(self)? {
                break;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PeriodicGrid;
    use crate::tensor::{ModelParams, SymTraceless3};

    #[test]
    fn zero_stays_zero() {
        let g = PeriodicGrid::cube(2, 16, 1.0).unwrap();
        let p = ModelParams::new(-0.5, 0.1).unwrap();
        let mut s =
            Simulation::new(QField::zeros(g, p), SimConfig::semi_implicit(0.1, 0.01)).unwrap();
        s.run(|_| Ok(())).unwrap();
        assert!(s.field().data.iter().all(|q| q.0 == [0.0; 5]));
    }

    #[test]
    fn stability_violation_is_reported() {
        let g = PeriodicGrid::cube(1, 32, 1.0).unwrap();
        let p = ModelParams::new(-0.5, 0.1).unwrap();
        let cfg = SimConfig {
            dt: 0.3 * 0.01,
            ..SimConfig::semi_implicit(0.1, 0.1)
        };
        assert!(matches!(
            Simulation::new(QField::zeros(g, p), cfg),
            Err(Error::StabilityViolation { .. })
        ));
    }

    #[test]
    fn uniform_state_follows_scalar_ode() {
        let eps = 0.1;
        let g = PeriodicGrid::cube(1, 16, 1.0).unwrap();
        let p = ModelParams::new(-0.5, eps).unwrap();
        let e0 = SymTraceless3::uniaxial(&[1.0, 0.0, 0.0]);
        let f = QField::from_fn(g, p, |_| e0 * 0.8);
        let cfg = SimConfig {
            dt: 2e-4 * eps * eps,
            t_end: 5.0 * eps * eps,
            scheme: Scheme::SemiImplicitFourier,
            record_every: 1000,
        };
        let mut sim = Simulation::new(f, cfg).unwrap();
        let mut worst: f64 = 0.0;
        sim.run(|s| {
            let t = s.field().time / (eps * eps);
            let exact = scalar_oracle(0.8, t);
            let got = s.field().data[3].dot(&e0) / e0.norm_sq();
            worst = worst.max((got - exact).abs());
            Ok(())
        })
        .unwrap();
        assert!(worst < 1e-4, "{worst}");
    }

    /// `s' = -2s^3 + 3s^2 - s` by classical RK4 with a fine step.
    fn scalar_oracle(s0: f64, t: f64) -> f64 {
        let g = |s: f64| -2.0 * s * s * s + 3.0 * s * s - s;
        let n = ((t / 1e-4).ceil() as usize).max(1);
        let h = t / n as f64;
        let mut s = s0;
        for _ in 0..n {
            let k1 = g(s);
            let k2 = g(s + 0.5 * h * k1);
            let k3 = g(s + 0.5 * h * k2);
            let k4 = g(s + h * k3);
            s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        s
    }

    #[test]
    fn translation_equivariance() {
        let g = PeriodicGrid::new(2, &[32, 16], &[1.0, 0.5]).unwrap();
        let p = ModelParams::new(-0.8, 0.1).unwrap();
        let init = |shift: f64| {
            QField::from_fn(g, p, move |x| {
                let y = x[0] - shift;
                SymTraceless3::from_components(
                    0.3 * (2.0 * std::f64::consts::PI * y).cos(),
                    0.1 * (4.0 * std::f64::consts::PI * y).sin(),
                    0.2 * (4.0 * std::f64::consts::PI * x[1]).cos()
                        * (2.0 * std::f64::consts::PI * y).sin(),
                    0.05,
                    -0.1,
                )
            })
        };
        let cfg = SimConfig::semi_implicit(0.1, 0.005);
        let mut a = Simulation::new(init(0.0), cfg).unwrap();
        let mut b = Simulation::new(init(4.0 / 32.0), cfg).unwrap();
        a.run(|_| Ok(())).unwrap();
        b.run(|_| Ok(())).unwrap();
        let mut worst: f64 = 0.0;
        for idx in 0..g.len() {
            let m = g.multi_index(idx);
            let shifted = g.index([(m[0] + 4) % 32, m[1], m[2]]);
            worst = worst.max((a.field().data[idx] - b.field().data[shifted]).max_abs());
        }
        assert!(worst < 1e-12, "{worst}");
        assert_eq!(a.energy_violations, 0);
    }

    #[test]
    fn energy_decreases_and_trace_is_kept() {
        let g = PeriodicGrid::cube(2, 32, 1.0).unwrap();
        let eps = 0.1;
        let p = ModelParams::new(-1.0, eps).unwrap();
        let f = QField::from_fn(g, p, |x| {
            let c = (2.0 * std::f64::consts::PI * x[0]).cos();
            let s = (2.0 * std::f64::consts::PI * x[1]).sin();
            SymTraceless3::from_components(0.4 * c, -0.2 * s, 0.3 * c * s, 0.1, -0.2 * c)
        });
        for scheme in [Scheme::SemiImplicitFourier, Scheme::Explicit] {
            let mut cfg = SimConfig::semi_implicit(eps, 0.02);
            cfg.scheme = scheme;
            cfg.dt = cfg.dt.min(stability_bound(&f, scheme));
            cfg.record_every = 1;
            let mut sim = Simulation::new(f.clone(), cfg).unwrap();
            let mut energies = Vec::new();
            sim.run(|s| {
                energies.push(s.energy());
                Ok(())
            })
            .unwrap();
            for w in energies.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()),
                    "{scheme:?}: {} -> {}",
                    w[0],
                    w[1]
                );
            }
            assert_eq!(sim.energy_violations, 0);
            for q in &sim.field().data {
                let m = q.matrix();
                assert!((m[0][0] + m[1][1] + m[2][2]).abs() < 1e-12);
                assert_eq!(m[0][1], m[1][0]);
            }
        }
    }
}
