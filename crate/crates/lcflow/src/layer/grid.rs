use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Uniform grid `z_i = z_min + i h`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct UniformGrid {
    pub z_min: f64,
    pub z_max: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(z_min: f64, z_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!(
                "grid needs at least 3 nodes, got {n}"
            )));
        }
        if !(z_max > z_min) || !z_min.is_finite() || !z_max.is_finite() {
            return Err(Error::Domain(format!(
                "bad grid interval [{z_min}, {z_max}]"
            )));
        }
        Ok(UniformGrid { z_min, z_max, n })
    }

    pub fn h(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.z_max
        } else {
            self.z_min + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// Grid with every node multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> UniformGrid {
        UniformGrid {
            z_min: self.z_min * factor,
            z_max: self.z_max * factor,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Asymptotic behaviour at one end of a grid function.
///
/// `Exp { limit, rate }` means `|v(z) - limit| ~ C exp(-rate |z|)`; a negative
/// rate records exponential growth. `Linear { slope }` means `v ~ slope * z`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Tail {
    Exp { limit: f64, rate: f64 },
    Linear { slope: f64 },
}

impl Tail {
    pub fn exp(limit: f64, rate: f64) -> Tail {
        Tail::Exp { limit, rate }
    }

    pub fn decays_to_zero(&self) -> bool {
        matches!(*self, Tail::Exp { limit, rate } if limit == 0.0 && rate > 0.0)
    }

    pub fn converges(&self) -> bool {
        matches!(*self, Tail::Exp { rate, .. } if rate > 0.0)
    }

    pub fn limit(&self) -> Option<f64> {
        match *self {
            Tail::Exp { limit, rate } if rate > 0.0 => Some(limit),
            _ => None,
        }
    }

    fn encode(&self) -> String {
        match *self {
            Tail::Exp { limit, rate } => format!("exp(limit={limit:e},rate={rate:e})"),
            Tail::Linear { slope } => format!("linear(slope={slope:e})"),
        }
    }

    fn decode(s: &str) -> Result<Tail> {
        let bad = || Error::Io(format!("cannot parse tail '{s}'"));
        let field = |body: &str, key: &str| -> Result<f64> {
            body.split(',')
                .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .ok_or_else(bad)?
                .parse::<f64>()
                .map_err(|_| bad())
        };
        if let Some(body) = s.strip_prefix("exp(").and_then(|b| b.strip_suffix(')')) {
            Ok(Tail::Exp {
                limit: field(body, "limit")?,
                rate: field(body, "rate")?,
            })
        } else if let Some(body) = s.strip_prefix("linear(").and_then(|b| b.strip_suffix(')')) {
            Ok(Tail::Linear {
                slope: field(body, "slope")?,
            })
        } else {
            Err(bad())
        }
    }
}

/// A function sampled on a uniform grid with tail metadata at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    /// `[left, right]`.
    pub tails: [Tail; 2],
}

impl GridFn {
    pub fn new(grid: UniformGrid, values: Vec<f64>, tails: [Tail; 2]) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n
            )));
        }
        Ok(GridFn {
            grid,
            values,
            tails,
        })
    }

    /// Samples `f` on the grid.
    pub fn sample(grid: UniformGrid, tails: [Tail; 2], f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        GridFn {
            grid,
            values,
            tails,
        }
    }

    pub fn tail(&self, side: Side) -> Tail {
        match side {
            Side::Left => self.tails[0],
            Side::Right => self.tails[1],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Exponential rate fitted by least squares to `log|v - limit|` over the
    /// outermost 10% of samples. `None` when the tail is below rounding level
    /// or the recorded tail is not exponential.
    pub fn fitted_tail_rate(&self, side: Side) -> Option<f64> {
        let Tail::Exp { limit, .. } = self.tail(side) else {
            return None;
        };
        let m = (self.grid.n / 10).max(3);
        let idx: Vec<usize> = match side {
            Side::Left => (0..m).collect(),
            Side::Right => (self.grid.n - m..self.grid.n).collect(),
        };
        let floor = if limit == 0.0 {
            f64::MIN_POSITIVE
        } else {
            1e-12 * limit.abs()
        };
        let mut xs = Vec::with_capacity(m);
        let mut ys = Vec::with_capacity(m);
        for &i in &idx {
            let dev = (self.values[i] - limit).abs();
            if dev <= floor || dev == 0.0 {
                return None;
            }
            xs.push(self.grid.node(i).abs());
            ys.push(dev.ln());
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Some(-sxy / sxx)
    }

    /// Checks the recorded exponential rates against fitted ones (20%).
    pub fn check_tails(&self) -> Result<()> {
        for side in [Side::Left, Side::Right] {
            if let (Tail::Exp { rate, .. }, Some(fit)) =
                (self.tail(side), self.fitted_tail_rate(side))
            {
                if (fit - rate).abs() > 0.2 * rate.abs() {
                    return Err(Error::Domain(format!(
                        "{side:?} tail: recorded rate {rate:.4} but fitted {fit:.4}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Two-column CSV `z,value` preceded by a `# tail_rate` comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# tail_rate left={} right={}",
            self.tails[0].encode(),
            self.tails[1].encode()
        )?;
        writeln!(w, "z,value")?;
        let mut line = String::new();
        for (i, v) in self.values.iter().enumerate() {
            line.clear();
            write!(line, "{:.17e},{:.17e}", self.grid.node(i), v).unwrap();
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<GridFn> {
        let mut tails = None;
        let mut zs = Vec::new();
        let mut vs = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# tail_rate") {
                let mut it = rest.split_whitespace();
                let mut get = |key: &str| -> Result<Tail> {
                    let tok = it
                        .next()
                        .and_then(|t| t.strip_prefix(key))
                        .ok_or_else(|| Error::Io("malformed tail_rate header".into()))?;
                    Tail::decode(tok)
                };
                tails = Some([get("left=")?, get("right=")?]);
                continue;
            }
            if line.is_empty() || line.starts_with('#') || line.starts_with("z,") {
                continue;
            }
            let (z, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Io(format!("bad csv row '{line}'")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Io(format!("bad number '{s}'")))
            };
            zs.push(parse(z)?);
            vs.push(parse(v)?);
        }
        let tails = tails.ok_or_else(|| Error::Io("missing tail_rate header".into()))?;
        if zs.len() < 3 {
            return Err(Error::Io("fewer than 3 rows".into()));
        }
        let grid = UniformGrid::new(zs[0], *zs.last().unwrap(), zs.len())?;
        let h = grid.h();
        for (i, z) in zs.iter().enumerate() {
            if (z - grid.node(i)).abs() > 1e-9 * h {
                return Err(Error::Io("nodes are not uniform".into()));
            }
        }
        GridFn::new(grid, vs, tails)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(UniformGrid::new(0.0, 1.0, 2).is_err());
        assert!(UniformGrid::new(1.0, 0.0, 10).is_err());
        let g = UniformGrid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(
            g.nodes().collect::<Vec<_>>(),
            vec![-1.0, -0.5, 0.0, 0.5, 1.0]
        );
    }

    #[test]
    fn csv_round_trip() {
        let g = UniformGrid::new(-10.0, 10.0, 101).unwrap();
        let f = GridFn::sample(g, [Tail::exp(0.0, 1.0), Tail::Linear { slope: 2.0 }], |z| {
            z.sin() * 0.3
        });
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = GridFn::read_csv(&buf[..]).unwrap();
        assert_eq!(back.tails, f.tails);
        assert_eq!(back.values, f.values);
        assert_eq!(back.grid.n, 101);
    }

    #[test]
    fn tail_fit() {
        let g = UniformGrid::new(-20.0, 20.0, 801).unwrap();
        let f = GridFn::sample(g, [Tail::exp(0.0, 1.5), Tail::exp(2.0, 0.5)], |z| {
            if z < 0.0 {
                (1.5 * z).exp()
            } else {
                2.0 - (-0.5 * z).exp()
            }
        });
        assert!((f.fitted_tail_rate(Side::Left).unwrap() - 1.5).abs() < 1e-8);
        assert!((f.fitted_tail_rate(Side::Right).unwrap() - 0.5).abs() < 1e-6);
        f.check_tails().unwrap();
        let wrong = GridFn {
            tails: [Tail::exp(0.0, 3.0), f.tails[1]],
            ..f
        };
        assert!(wrong.check_tails().is_err());
    }
}
