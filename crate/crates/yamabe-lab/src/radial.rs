//! Radial profiles sampled on a grid, with local polynomial interpolation in
//! `ln r` and the CSV exchange format.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{precondition, LabError, Result};

/// Geometric grid `r_lo * 10^(k / points_per_decade)`, ending exactly at `r_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub r_lo: f64,
    pub r_hi: f64,
    pub points_per_decade: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self { r_lo: 1e-4, r_hi: 1e4, points_per_decade: 256 }
    }
}

impl LogGrid {
    pub fn new(r_lo: f64, r_hi: f64, points_per_decade: usize) -> Self {
        Self { r_lo, r_hi, points_per_decade }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_lo > 0.0 && self.r_hi > self.r_lo && self.r_hi.is_finite()) {
            return Err(precondition(format!(
                "grid needs 0 < r_lo < r_hi, got [{}, {}]",
                self.r_lo, self.r_hi
            )));
        }
        if self.points_per_decade < 4 {
            return Err(precondition("points_per_decade must be at least 4"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        let decades = (self.r_hi / self.r_lo).log10();
        ((decades * self.points_per_decade as f64).round() as usize).max(2) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing in `ln r`.
    pub fn step(&self) -> f64 {
        (self.r_hi / self.r_lo).ln() / (self.len() - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let n = self.len();
        let h = self.step();
        let s0 = self.r_lo.ln();
        let mut out: Vec<f64> = (0..n).map(|i| (s0 + h * i as f64).exp()).collect();
        out[0] = self.r_lo;
        out[n - 1] = self.r_hi;
        out
    }

    pub fn refined(&self, factor: usize) -> Self {
        Self { points_per_decade: self.points_per_decade * factor, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    pub inner_exponent: Option<f64>,
    pub outer_exponent: Option<f64>,
}

const STENCIL: usize = 8;

impl RadialFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(LabError::Parse(format!(
                "{} radii but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < STENCIL {
            return Err(LabError::Parse(format!("need at least {STENCIL} nodes")));
        }
        if grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::Parse("grid must be positive and strictly increasing".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Parse(format!("non-finite value at r = {}", grid[i])));
        }
        Ok(Self { grid, values, inner_exponent: None, outer_exponent: None })
    }

    pub fn from_fn(grid: &LogGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes = grid.nodes();
        let values = nodes.iter().map(|&r| f(r)).collect();
        Self::new(nodes, values)
    }

    pub fn with_exponents(mut self, inner: Option<f64>, outer: Option<f64>) -> Self {
        self.inner_exponent = inner;
        self.outer_exponent = outer;
        self
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn r_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().expect("non-empty grid")
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min() * (1.0 - 1e-14) && r <= self.r_max() * (1.0 + 1e-14)
    }

    fn check(&self, r: f64) -> Result<()> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(LabError::OutOfDomain { radius: r, lo: self.r_min(), hi: self.r_max() })
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.eval_derivatives(r)?.0)
    }

    /// Value, first and second radial derivative at `r`.
    pub fn eval_derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        self.check(r)?;
        let s = r.clamp(self.r_min(), self.r_max()).ln();
        let n = self.grid.len();
        let k = self.grid.partition_point(|&g| g.ln() <= s).clamp(1, n - 1);
        let start = k.saturating_sub(STENCIL / 2).min(n - STENCIL);
        let xs: Vec<f64> = self.grid[start..start + STENCIL].iter().map(|g| g.ln()).collect();
        let mut c: Vec<f64> = self.values[start..start + STENCIL].to_vec();
        for j in 1..STENCIL {
            for i in (j..STENCIL).rev() {
                c[i] = (c[i] - c[i - 1]) / (xs[i] - xs[i - j]);
            }
        }
        let (mut p, mut dp, mut ddp) = (c[STENCIL - 1], 0.0, 0.0);
        for i in (0..STENCIL - 1).rev() {
            let t = s - xs[i];
            ddp = ddp * t + 2.0 * dp;
            dp = dp * t + p;
            p = p * t + c[i];
        }
        Ok((p, dp / r, (ddp - dp) / (r * r)))
    }

    /// Least-squares slope of `ln|f|` against `ln r` over nodes in `[a, b]`.
    pub fn loglog_slope(&self, a: f64, b: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .grid
            .iter()
            .zip(&self.values)
            .filter(|(r, v)| **r >= a && **r <= b && v.abs() > 0.0)
            .map(|(r, v)| (r.ln(), v.abs().ln()))
            .collect();
        if pts.len() < 2 {
            return Err(precondition(format!("fewer than two usable nodes in [{a}, {b}]")));
        }
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let sy: f64 = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let num: f64 = pts.iter().map(|p| (p.0 - sx) * (p.1 - sy)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - sx).powi(2)).sum();
        Ok(num / den)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.grid.iter().zip(&self.values).map(|(&r, &v)| f(r, v)).collect();
        Self { values, ..self.clone() }
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "value", "inner_exponent", "outer_exponent"])?;
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for (r, v) in self.grid.iter().zip(&self.values) {
            out.write_record([
                format!("{r:e}"),
                format!("{v:e}"),
                fmt(self.inner_exponent),
                fmt(self.outer_exponent),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("r") || headers.get(1) != Some("value") {
            return Err(LabError::Parse(format!("unexpected CSV header {headers:?}")));
        }
        let (mut grid, mut values) = (Vec::new(), Vec::new());
        let (mut inner, mut outer) = (None, None);
        let num = |s: &str, line: usize| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| LabError::Parse(format!("line {line}: {e}")))
        };
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            grid.push(num(&rec[0], i + 2)?);
            values.push(num(&rec[1], i + 2)?);
            if let Some(p) = rec.get(2).filter(|s| !s.trim().is_empty()) {
                inner = Some(num(p, i + 2)?);
            }
            if let Some(q) = rec.get(3).filter(|s| !s.trim().is_empty()) {
                outer = Some(num(q, i + 2)?);
            }
        }
        Ok(Self::new(grid, values)?.with_exponents(inner, outer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_endpoints() {
        let g = LogGrid::default();
        let nodes = g.nodes();
        assert_eq!(nodes.len(), 8 * 256 + 1);
        assert_eq!(nodes[0], 1e-4);
        assert_eq!(*nodes.last().unwrap(), 1e4);
    }

    #[test]
    fn interpolation_derivatives_of_power_law() {
        let g = LogGrid::new(1e-2, 1e2, 64);
        let f = RadialFunction::from_fn(&g, |r| r * r * r).unwrap();
        let (v, d1, d2) = f.eval_derivatives(0.37).unwrap();
        assert!((v / 0.37f64.powi(3) - 1.0).abs() < 1e-10);
        assert!((d1 / (3.0 * 0.37f64.powi(2)) - 1.0).abs() < 1e-9);
        assert!((d2 / (6.0 * 0.37) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn out_of_domain_names_radius() {
        let g = LogGrid::new(1.0, 10.0, 16);
        let f = RadialFunction::from_fn(&g, |r| r).unwrap();
        match f.eval(20.0) {
            Err(LabError::OutOfDomain { radius, .. }) => assert_eq!(radius, 20.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = LogGrid::new(1e-3, 1e3, 16);
        let f = RadialFunction::from_fn(&g, |r| (1.0 + r * r).powf(-4.0))
            .unwrap()
            .with_exponents(Some(0.0), Some(-8.0));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = RadialFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }
}
