//! Output files.
//!
//! Binary layout (little-endian throughout):
//!
//! ```text
//! b"WMKG"            magic
//! u32                version (1)
//! u32                rank
//! u64 x rank         sizes
//! (u32 len, utf-8) x rank   axis labels
//! f64 x rank         axis spacings
//! f64 x prod(sizes)  data, row-major (last axis fastest)
//! ```
//!
//! CSV mirrors a field as one row per element: a coordinate column per axis
//! followed by `value`. Coordinates are `index * delta`, except on an axis
//! labelled `k`, which is centered: `(index - size/2) * delta`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

pub const MAGIC: &[u8; 4] = b"WMKG";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub size: usize,
    pub delta: f64,
}

impl Axis {
    pub fn new(label: impl Into<String>, size: usize, delta: f64) -> Self {
        Self {
            label: label.into(),
            size,
            delta,
        }
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        if self.label == "k" {
            (i as f64 - (self.size / 2) as f64) * self.delta
        } else {
            i as f64 * self.delta
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub axes: Vec<Axis>,
    pub data: Vec<f64>,
}

impl Field {
    pub fn new(axes: Vec<Axis>, data: Vec<f64>) -> io::Result<Self> {
        let len: usize = axes.iter().map(|a| a.size).product();
        if len != data.len() {
            return Err(invalid(format!("{} values for a field of {len} elements", data.len())));
        }
        Ok(Self { axes, data })
    }

    /// Phase-space array with axes `r` (rows) and `k` (columns).
    pub fn phase_space(a: &Array2<f64>, dr: f64, dk: f64) -> Self {
        let (nr, nk) = a.dim();
        Self {
            axes: vec![Axis::new("r", nr, dr), Axis::new("k", nk, dk)],
            data: a.iter().copied().collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn write_bin<W: Write>(field: &Field, mut w: W) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(field.rank() as u32).to_le_bytes())?;
    for a in &field.axes {
        w.write_all(&(a.size as u64).to_le_bytes())?;
    }
    for a in &field.axes {
        w.write_all(&(a.label.len() as u32).to_le_bytes())?;
        w.write_all(a.label.as_bytes())?;
    }
    for a in &field.axes {
        w.write_all(&a.delta.to_le_bytes())?;
    }
    for v in &field.data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_bin<R: Read>(mut r: R) -> io::Result<Field> {
    if &read_array::<4, _>(&mut r)? != MAGIC {
        return Err(invalid("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(invalid(format!("unsupported version {version}")));
    }
    let rank = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let mut sizes = Vec::with_capacity(rank);
    for _ in 0..rank {
        let s = u64::from_le_bytes(read_array(&mut r)?);
        sizes.push(usize::try_from(s).map_err(|_| invalid(format!("axis size {s} too large")))?);
    }
    let mut labels = Vec::with_capacity(rank);
    for _ in 0..rank {
        let len = u32::from_le_bytes(read_array(&mut r)?) as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        labels.push(String::from_utf8(buf).map_err(|e| invalid(e.to_string()))?);
    }
    let mut axes = Vec::with_capacity(rank);
    for (label, size) in labels.into_iter().zip(sizes) {
        axes.push(Axis::new(label, size, f64::from_le_bytes(read_array(&mut r)?)));
    }
    let len = axes
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.size))
        .ok_or_else(|| invalid("field size overflows".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * len {
        return Err(invalid(format!(
            "expected {} data bytes, found {}",
            8 * len,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Field { axes, data })
}

pub fn write_csv<W: Write>(field: &Field, mut w: W) -> io::Result<()> {
    let header: Vec<&str> = field.axes.iter().map(|a| a.label.as_str()).chain(["value"]).collect();
    writeln!(w, "{}", header.join(","))?;
    let mut idx = vec![0usize; field.rank()];
    for v in &field.data {
        for (a, &i) in field.axes.iter().zip(&idx) {
            write!(w, "{:e},", a.coordinate(i))?;
        }
        writeln!(w, "{v:e}")?;
        for d in (0..idx.len()).rev() {
            idx[d] += 1;
            if idx[d] < field.axes[d].size {
                break;
            }
            idx[d] = 0;
        }
    }
    w.flush()
}

/// Column table (time series and similar) with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    }

    /// Rank-2 field with axes `sample` and `column`, unit spacings.
    pub fn to_field(&self) -> Field {
        Field {
            axes: vec![
                Axis::new("sample", self.rows.len(), 1.0),
                Axis::new("column", self.columns.len(), 1.0),
            ],
            data: self.rows.iter().flatten().copied().collect(),
        }
    }
}

pub fn save_bin(field: &Field, path: &Path) -> io::Result<()> {
    write_bin(field, BufWriter::new(File::create(path)?))
}

pub fn load_bin(path: &Path) -> io::Result<Field> {
    read_bin(BufReader::new(File::open(path)?))
}

pub fn save_csv(field: &Field, path: &Path) -> io::Result<()> {
    write_csv(field, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_bytes() {
        let f = Field::new(vec![Axis::new("r", 2, 0.5)], vec![1.0, -2.0]).unwrap();
        let mut buf = Vec::new();
        write_bin(&f, &mut buf).unwrap();
        let mut want = b"WMKG".to_vec();
        want.extend(1u32.to_le_bytes());
        want.extend(1u32.to_le_bytes());
        want.extend(2u64.to_le_bytes());
        want.extend(1u32.to_le_bytes());
        want.extend(b"r");
        want.extend(0.5f64.to_le_bytes());
        want.extend(1.0f64.to_le_bytes());
        want.extend((-2.0f64).to_le_bytes());
        assert_eq!(buf, want);
    }

    #[test]
    fn rejects_truncated_and_foreign() {
        let f = Field::new(vec![Axis::new("r", 3, 1.0)], vec![1.0, 2.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_bin(&f, &mut buf).unwrap();
        assert!(read_bin(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_bin(&bad[..]).is_err());
        assert!(Field::new(vec![Axis::new("r", 2, 1.0)], vec![1.0]).is_err());
    }

    #[test]
    fn csv_layout() {
        let a = Array2::from_shape_vec((2, 2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_csv(&Field::phase_space(&a, 0.5, 0.25), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,k,value");
        assert_eq!(lines[1], "0e0,-2.5e-1,1e0");
        assert_eq!(lines[2], "0e0,0e0,2e0");
        assert_eq!(lines[3], "5e-1,-2.5e-1,3e0");
        assert_eq!(lines.len(), 5);
    }
}
