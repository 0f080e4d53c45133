use std::io::{Read, Write};

use super::{PeriodicGrid, QField};
use crate::error::{Error, Result};
use crate::tensor::{ModelParams, SymTraceless3};

const MAGIC: &[u8; 4] = b"QFLD";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Binary snapshot, little endian:
///
/// ```text
/// "QFLD"  u32 version  u32 dim  u64 n[3]  f64 box[3]  f64 eps  f64 L  f64 time
/// then 5 f64 per node (xx, yy, xy, xz, yz), row-major, last axis fastest
/// ```
///
/// Unused axes are stored with `n = 1`.
pub fn write_snapshot<W: Write>(field: &QField, mut w: W) -> Result<()> {
    let g = &field.grid;
    let mut buf = Vec::with_capacity(100 + 40 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.dim as u32).to_le_bytes());
    for n in g.n {
        buf.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for v in g
        .box_len
        .iter()
        .chain([field.params.epsilon, field.params.l, field.time].iter())
    {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for q in &field.data {
        for c in q.0 {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a>(&'a [u8]);

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.0.len() < N {
            return Err(Error::Io("truncated snapshot".into()));
        }
        let (a, b) = self.0.split_at(N);
        self.0 = b;
        Ok(a.try_into().unwrap())
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<QField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut c = Cursor(&bytes);
    if &c.take::<4>()? != MAGIC {
        return Err(Error::Io("not a field snapshot".into()));
    }
    let version = u32::from_le_bytes(c.take()?);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Io(format!("snapshot version {version} unsupported")));
    }
    let dim = u32::from_le_bytes(c.take()?) as usize;
    let mut n = [0usize; 3];
    for v in &mut n {
        *v = u64::from_le_bytes(c.take()?) as usize;
    }
    let mut box_len = [0.0; 3];
    for v in &mut box_len {
        *v = c.f64()?;
    }
    let (eps, l, time) = (c.f64()?, c.f64()?, c.f64()?);
    if !(1..=3).contains(&dim) {
        return Err(Error::Io(format!("snapshot dim {dim}")));
    }
    let grid = PeriodicGrid::new(dim, &n[..dim], &box_len[..dim])?;
    if grid.n != n {
        return Err(Error::Io("unused axes must have one node".into()));
    }
    let params = ModelParams::new(l, eps)?;
    if c.0.len() != 40 * grid.len() {
        return Err(Error::Io(format!(
            "{} payload bytes for {} nodes",
            c.0.len(),
            grid.len()
        )));
    }
    let mut data = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let mut q = [0.0; 5];
        for v in &mut q {
            *v = c.f64()?;
        }
        data.push(SymTraceless3(q));
    }
    let field = QField {
        grid,
        data,
        params,
        time,
    };
    field.validate()?;
    Ok(field)
}

/// Rows of named columns, written as CSV. The first column is time.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    /// `t,energy,<interface>` plus any extra columns.
    pub fn new(interface: &str, extra: &[&str]) -> Self {
        let mut columns = vec!["t".to_string(), "energy".to_string(), interface.to_string()];
        columns.extend(extra.iter().map(|s| s.to_string()));
        TimeSeries {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Config(format!(
                "row of {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let g = PeriodicGrid::new(2, &[16, 18], &[1.0, 0.5]).unwrap();
        let mut f = QField::from_fn(g, ModelParams::new(-0.3, 0.07).unwrap(), |x| {
            SymTraceless3::from_components(x[0], -x[1], 0.1, x[0] * x[1], 0.3)
        });
        f.time = 0.125;
        let mut bytes = Vec::new();
        write_snapshot(&f, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 4 + 8 + 24 + 48 + 40 * g.len());
        let back = read_snapshot(&bytes[..]).unwrap();
        assert_eq!(back, f);
        assert!(read_snapshot(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_snapshot(&bad[..]).is_err());
    }

    #[test]
    fn series_csv() {
        let mut s = TimeSeries::new("radius", &["predicted_r2"]);
        s.push(vec![0.0, 1.0, 0.3, 0.09]).unwrap();
        assert!(s.push(vec![0.0]).is_err());
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,energy,radius,predicted_r2\n"));
        assert_eq!(s.column("radius").unwrap(), vec![0.3]);
    }
}
