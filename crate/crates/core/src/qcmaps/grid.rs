use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LogCoordMap;
use crate::error::{positive, Error, Result};
use crate::numfmt::sci17;

/// Allowed mismatch between `w(t, 1)` and `w(t, 0) + i`.
pub const SEAM_TOLERANCE: f64 = 1e-10;

/// A map sampled on `t_i = a i / (n_t - 1)`, `x_j = j / n_x`, stored row-major in `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    domain_modulus: f64,
    target_modulus: f64,
    n_t: usize,
    n_x: usize,
    samples: Vec<Complex64>,
}

impl GridMap {
    pub fn from_samples(
        domain_modulus: f64,
        target_modulus: f64,
        n_t: usize,
        n_x: usize,
        samples: Vec<Complex64>,
    ) -> Result<Self> {
        positive("domain modulus", domain_modulus)?;
        positive("target modulus", target_modulus)?;
        if n_t < 3 || n_x < 3 {
            return Err(Error::Lattice(format!(
                "lattice {n_t} x {n_x} is smaller than 3 x 3"
            )));
        }
        if samples.len() != n_t * n_x {
            return Err(Error::Lattice(format!(
                "{} samples for a {n_t} x {n_x} lattice",
                samples.len()
            )));
        }
        if samples
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Lattice("non-finite sample".into()));
        }
        Ok(GridMap {
            domain_modulus,
            target_modulus,
            n_t,
            n_x,
            samples,
        })
    }

    /// Samples `map` and checks the seam rule on every row.
    pub fn sample<M: LogCoordMap + ?Sized>(map: &M, n_t: usize, n_x: usize) -> Result<Self> {
        let a = map.domain_modulus();
        let mut samples = Vec::with_capacity(n_t * n_x);
        for i in 0..n_t {
            let t = a * i as f64 / (n_t.max(2) - 1) as f64;
            samples.extend((0..n_x).map(|j| map.eval(t, j as f64 / n_x as f64)));
        }
        let grid = GridMap::from_samples(a, map.target_modulus(), n_t, n_x, samples)?;
        let defect = (0..n_t)
            .map(|i| (map.eval(grid.t_at(i), 1.0) - grid.value(i, 0) - Complex64::i()).norm())
            .fold(0.0, f64::max);
        if defect > SEAM_TOLERANCE {
            return Err(Error::Lattice(format!(
                "seam mismatch {defect:e} exceeds {SEAM_TOLERANCE:e}"
            )));
        }
        Ok(grid)
    }

    pub fn domain_modulus(&self) -> f64 {
        self.domain_modulus
    }

    pub fn target_modulus(&self) -> f64 {
        self.target_modulus
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn h_t(&self) -> f64 {
        self.domain_modulus / (self.n_t - 1) as f64
    }

    pub fn h_x(&self) -> f64 {
        1.0 / self.n_x as f64
    }

    pub fn t_at(&self, i: usize) -> f64 {
        self.domain_modulus * i as f64 / (self.n_t - 1) as f64
    }

    pub fn x_at(&self, j: usize) -> f64 {
        j as f64 / self.n_x as f64
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.samples[i * self.n_x + j]
    }

    /// Value at `x_j` continued across the seam: `w(t, x + 1) = w(t, x) + i`.
    pub fn value_cyclic(&self, i: usize, j: isize) -> Complex64 {
        let n = self.n_x as isize;
        let wraps = j.div_euclid(n);
        self.value(i, j.rem_euclid(n) as usize) + Complex64::new(0.0, wraps as f64)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// CSV with header `t,x,re,im`, preceded by a comment line carrying the moduli.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# domain_modulus={} target_modulus={} n_t={} n_x={}",
            sci17(self.domain_modulus),
            sci17(self.target_modulus),
            self.n_t,
            self.n_x
        )?;
        writeln!(w, "t,x,re,im")?;
        for i in 0..self.n_t {
            for j in 0..self.n_x {
                let z = self.value(i, j);
                writeln!(
                    w,
                    "{},{},{},{}",
                    sci17(self.t_at(i)),
                    sci17(self.x_at(j)),
                    sci17(z.re),
                    sci17(z.im)
                )?;
            }
        }
        Ok(())
    }

    /// Reads the format of [`GridMap::write_csv`]. Without the comment line the
    /// domain modulus is the largest `t`, and the target modulus is the mean
    /// real part of the last row.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut meta: Option<(f64, f64)> = None;
        let mut rows: Vec<[f64; 4]> = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                meta = parse_meta(c).or(meta);
                continue;
            }
            if !header_seen {
                if line.replace(' ', "") != "t,x,re,im" {
                    return Err(Error::Parse(format!(
                        "expected header t,x,re,im, got {line}"
                    )));
                }
                header_seen = true;
                continue;
            }
            let mut vals = [0.0; 4];
            let mut fields = line.split(',');
            for v in vals.iter_mut() {
                let f = fields
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {}: too few fields", lineno + 1)))?;
                *v = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {f:?}", lineno + 1)))?;
            }
            if fields.next().is_some() {
                return Err(Error::Parse(format!(
                    "line {}: too many fields",
                    lineno + 1
                )));
            }
            rows.push(vals);
        }
        let ts: BTreeSet<u64> = rows.iter().map(|r| r[0].to_bits()).collect();
        let xs: BTreeSet<u64> = rows.iter().map(|r| r[1].to_bits()).collect();
        let (n_t, n_x) = (ts.len(), xs.len());
        if n_t * n_x != rows.len() {
            return Err(Error::Lattice(format!(
                "{} rows do not form a {n_t} x {n_x} lattice",
                rows.len()
            )));
        }
        rows.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
        let samples: Vec<Complex64> = rows.iter().map(|r| Complex64::new(r[2], r[3])).collect();
        let (a, target) = match meta {
            Some(m) => m,
            None => {
                let a = rows.last().map(|r| r[0]).unwrap_or(0.0);
                let last = &samples[samples.len().saturating_sub(n_x)..];
                (
                    a,
                    last.iter().map(|z| z.re).sum::<f64>() / n_x.max(1) as f64,
                )
            }
        };
        GridMap::from_samples(a, target, n_t, n_x, samples)
    }
}

fn parse_meta(comment: &str) -> Option<(f64, f64)> {
    let mut a = None;
    let mut b = None;
    for kv in comment.split_whitespace() {
        match kv.split_once('=') {
            Some(("domain_modulus", v)) => a = v.parse().ok(),
            Some(("target_modulus", v)) => b = v.parse().ok(),
            _ => {}
        }
    }
    Some((a?, b?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcmaps::{BoundaryDistortion, ShearingMap, TwistMap};

    #[test]
    fn csv_round_trip() {
        let m = TwistMap::new(1.3, 0.7).unwrap();
        let g = GridMap::sample(&m, 5, 4).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = GridMap::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn csv_without_meta() {
        let csv = "t,x,re,im\n0,0,0,0\n0,0.5,0,0.5\n0,0.25,0,0.25\n\
                   1,0,2,0\n1,0.25,2,0.25\n1,0.5,2,0.5\n\
                   0.5,0,1,0\n0.5,0.25,1,0.25\n0.5,0.5,1,0.5\n";
        let g = GridMap::read_csv(csv.as_bytes()).unwrap();
        assert_eq!((g.n_t(), g.n_x()), (3, 3));
        assert_eq!(g.domain_modulus(), 1.0);
        assert_eq!(g.target_modulus(), 2.0);
        assert_eq!(g.value(1, 2), Complex64::new(1.0, 0.5));
    }

    #[test]
    fn csv_rejects_ragged() {
        let csv = "t,x,re,im\n0,0,0,0\n0,0.5,0,0.5\n1,0,1,0\n";
        assert!(GridMap::read_csv(csv.as_bytes()).is_err());
        assert!(GridMap::read_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn cyclic_values() {
        let f = BoundaryDistortion::with_bilipschitz(1.2).unwrap();
        let s = ShearingMap::new(2.0, f).unwrap();
        let g = GridMap::sample(&s, 9, 8).unwrap();
        let d = g.value_cyclic(3, 8) - g.value(3, 0);
        assert!((d - Complex64::i()).norm() < 1e-15);
        let d = g.value_cyclic(3, -1) - g.value(3, 7);
        assert!((d + Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn rejects_tiny_lattice() {
        let m = TwistMap::new(1.0, 1.0).unwrap();
        assert!(GridMap::sample(&m, 2, 8).is_err());
    }
}
