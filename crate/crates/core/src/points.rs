use std::io::{BufRead, Write};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::metric::Metric;

/// `n` points in `R^d`, stored row-major, with the metric they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    d: usize,
    coords: Vec<f64>,
    metric: Metric,
}

impl PointSet {
    pub fn new(d: usize, coords: Vec<f64>, metric: Metric) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if coords.is_empty() {
            return Err(Error::Empty);
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: coords.len() % d,
            });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(PointSet {
            n: coords.len() / d,
            d,
            coords,
            metric,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], metric: Metric) -> Result<Self> {
        let d = rows.first().ok_or(Error::Empty)?.len();
        let mut coords = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            coords.extend_from_slice(r);
        }
        Self::new(d, coords, metric)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Distance between stored points `i` and `j` under the set's metric.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.eval(self.point(i), self.point(j))
    }

    pub fn check_query(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: q.len(),
            });
        }
        Ok(())
    }

    /// Text format: header `n d metric [p]`, then one row per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        match self.metric {
            Metric::L1 => writeln!(w, "{} {} l1", self.n, self.d)?,
            Metric::L2 => writeln!(w, "{} {} l2", self.n, self.d)?,
            Metric::Lp(p) => writeln!(w, "{} {} lp {:?}", self.n, self.d, p)?,
        }
        for row in self.iter() {
            let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing header".into()))??;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(Error::Format(format!("bad header {header:?}")));
        }
        let n: usize = parse(toks[0])?;
        let d: usize = parse(toks[1])?;
        let metric = match (toks[2], toks.get(3)) {
            ("l1", None) => Metric::L1,
            ("l2", None) => Metric::L2,
            ("lp", Some(p)) => Metric::lp(parse(p)?)?,
            _ => return Err(Error::Format(format!("bad metric in header {header:?}"))),
        };
        let mut coords = Vec::with_capacity(n * d);
        let mut rows = 0;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let before = coords.len();
            for t in line.split_whitespace() {
                coords.push(parse::<f64>(t)?);
            }
            if coords.len() - before != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: coords.len() - before,
                });
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::Format(format!("header declares {n} rows, found {rows}")));
        }
        Self::new(d, coords, metric)
    }

    /// Binary format: `SDNN`, u32 n, u32 d, u8 metric tag, f64 p, then n*d f64, all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(b"SDNN");
        w.u32(self.n as u32);
        w.u32(self.d as u32);
        w.u8(self.metric.tag());
        w.f64(self.metric.exponent());
        for &x in &self.coords {
            w.f64(x);
        }
        w.buf
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader::new(buf, b"SDNN")?;
        let n = r.u32()? as usize;
        let d = r.u32()? as usize;
        let tag = r.u8()?;
        let p = r.f64()?;
        let metric = Metric::from_tag(tag, p)?;
        let total = n
            .checked_mul(d)
            .filter(|t| t.checked_mul(8).is_some_and(|b| b <= buf.len()))
            .ok_or_else(|| Error::Format("size exceeds data".into()))?;
        let coords = (0..total).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        Self::new(d, coords, metric)
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Format(format!("cannot parse {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_sets() {
        assert!(matches!(PointSet::new(2, vec![], Metric::L1), Err(Error::Empty)));
        assert!(PointSet::new(0, vec![1.0], Metric::L1).is_err());
        assert!(PointSet::new(2, vec![1.0, 2.0, 3.0], Metric::L1).is_err());
        assert!(matches!(
            PointSet::new(1, vec![f64::INFINITY], Metric::L1),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn text_round_trip() {
        let ps = PointSet::from_rows(&[vec![0.1, -2.0], vec![1e-300, 3.5]], Metric::Lp(1.5)).unwrap();
        let mut buf = Vec::new();
        ps.write_text(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("2 2 lp 1.5\n"));
        assert_eq!(PointSet::read_text(&buf[..]).unwrap(), ps);
    }

    #[test]
    fn binary_layout() {
        let ps = PointSet::from_rows(&[vec![1.0, 2.0]], Metric::L2).unwrap();
        let b = ps.to_bytes();
        assert_eq!(&b[..4], b"SDNN");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 2);
        assert_eq!(b[12], 2);
        assert_eq!(f64::from_le_bytes(b[13..21].try_into().unwrap()), 2.0);
        assert_eq!(b.len(), 21 + 16);
        assert_eq!(PointSet::from_bytes(&b).unwrap(), ps);
        assert!(PointSet::from_bytes(&b[..b.len() - 1]).is_err());
    }

    #[test]
    fn text_row_count_checked() {
        assert!(PointSet::read_text("2 2 l1\n1 2\n".as_bytes()).is_err());
        assert!(PointSet::read_text("1 2 l1\n1 2 3\n".as_bytes()).is_err());
        assert!(PointSet::read_text("1 2 lq\n1 2\n".as_bytes()).is_err());
    }
}
