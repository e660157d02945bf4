use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ProfileApprox, SampleGrid};
use crate::error::{precondition, LabError, Result};

/// Where the sampled values came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SampleSource {
    ExactProfile,
    Perturbed(String),
    Loaded(String),
}

/// Values of a function on a [`SampleGrid`], row-major over `(radius, direction)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSolution {
    pub grid: SampleGrid,
    pub values: Vec<f64>,
    pub source: SampleSource,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    radii: Vec<f64>,
    directions: Vec<Vec<f64>>,
    source: SampleSource,
}

impl SampledSolution {
    pub fn new(grid: SampleGrid, values: Vec<f64>, source: SampleSource) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(precondition(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(precondition("sampled values must be finite"));
        }
        Ok(Self { grid, values, source })
    }

    pub fn from_profile(profile: &ProfileApprox, grid: &SampleGrid) -> Result<Self> {
        Self::perturbed_with(profile, grid, SampleSource::ExactProfile, |_, _| 0.0)
    }

    /// The profile plus `delta(r, theta)`.
    pub fn perturbed(
        profile: &ProfileApprox,
        grid: &SampleGrid,
        label: &str,
        delta: impl Fn(f64, &[f64]) -> f64,
    ) -> Result<Self> {
        Self::perturbed_with(profile, grid, SampleSource::Perturbed(label.into()), delta)
    }

    fn perturbed_with(
        profile: &ProfileApprox,
        grid: &SampleGrid,
        source: SampleSource,
        delta: impl Fn(f64, &[f64]) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for (i, &r) in grid.radii.iter().enumerate() {
            for (j, theta) in grid.directions.iter().enumerate() {
                values.push(profile.eval(&grid.point(i, j))? + delta(r, theta));
            }
        }
        Self::new(grid.clone(), values, source)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.directions.len() + j]
    }

    /// CSV with header `r,theta_index,value`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "theta_index", "value"])?;
        for (i, r) in self.grid.radii.iter().enumerate() {
            for j in 0..self.grid.directions.len() {
                out.write_record([format!("{r:e}"), j.to_string(), format!("{:e}", self.value(i, j))])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// JSON sidecar listing the radii, directions and source.
    pub fn write_sidecar(&self, w: impl Write) -> Result<()> {
        let side = Sidecar {
            radii: self.grid.radii.clone(),
            directions: self.grid.directions.clone(),
            source: self.source.clone(),
        };
        serde_json::to_writer_pretty(w, &side)?;
        Ok(())
    }

    pub fn read(csv_in: impl Read, sidecar: impl Read, label: &str) -> Result<Self> {
        let side: Sidecar = serde_json::from_reader(sidecar)?;
        let grid = SampleGrid::new(side.radii, side.directions)?;
        let nd = grid.directions.len();
        let mut values = vec![f64::NAN; grid.len()];
        let mut rdr = csv::Reader::from_reader(csv_in);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "theta_index", "value"] {
            return Err(LabError::Parse(format!("expected header r,theta_index,value, got {headers:?}")));
        }
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| LabError::Parse(format!("row {}: bad field {k}", line + 2)))
            };
            let r = parse(0)?;
            let j = parse(1)? as usize;
            let i = grid
                .radii
                .iter()
                .position(|g| (g - r).abs() <= 1e-12 * g.abs())
                .ok_or_else(|| LabError::Parse(format!("row {}: radius {r} not in the sidecar grid", line + 2)))?;
            if j >= nd {
                return Err(LabError::Parse(format!("row {}: direction index {j} out of range", line + 2)));
            }
            values[i * nd + j] = parse(2)?;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(LabError::Parse("CSV does not cover every grid node".into()));
        }
        Self::new(grid, values, SampleSource::Loaded(label.into()))
    }
}

/// Which error envelope to fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EnvelopeRegime {
    /// `C M^{-12/(n-2)} (1+r)^{8-n+a}`, `a = (3/4)(n - 10 + sqrt(eps))`.
    Coarse { eps: f64 },
    /// `C M^{-12/(n-2)} (1+r)^{8-n}`.
    Improved,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusMargin {
    pub r: f64,
    pub max_error: f64,
    /// `max_error` over the envelope shape at this radius.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    pub regime: EnvelopeRegime,
    pub exponent: f64,
    pub fitted_constant: f64,
    pub worst_radius: f64,
    pub admissible_constant: Option<f64>,
    pub violation: bool,
    pub margins: Vec<RadiusMargin>,
}

/// Fit the envelope constant of `E = v - profile` on the shared grid. When an
/// admissible constant is given, a larger fitted constant is a violation.
pub fn error_envelope_check(
    v: &SampledSolution,
    profile: &ProfileApprox,
    regime: EnvelopeRegime,
    admissible: Option<f64>,
) -> Result<EnvelopeReport> {
    let n = profile.n().as_f64();
    if v.grid.dimension() != profile.n().get() {
        return Err(precondition("sampled solution and profile live in different dimensions"));
    }
    let exponent = match regime {
        EnvelopeRegime::Coarse { eps } => {
            if !(eps > 0.0) {
                return Err(precondition("the coarse envelope needs eps > 0"));
            }
            8.0 - n + 0.75 * (n - 10.0 + eps.sqrt())
        }
        EnvelopeRegime::Improved => 8.0 - n,
    };
    let scale = profile.height().powf(-12.0 / (n - 2.0));
    let mut margins = Vec::with_capacity(v.grid.radii.len());
    let (mut fitted, mut worst) = (0.0f64, 0.0);
    for (i, &r) in v.grid.radii.iter().enumerate() {
        let mut max_error = 0.0f64;
        for j in 0..v.grid.directions.len() {
            let e = v.value(i, j) - profile.eval(&v.grid.point(i, j))?;
            max_error = max_error.max(e.abs());
        }
        let ratio = max_error / (scale * (1.0 + r).powf(exponent));
        if ratio > fitted {
            fitted = ratio;
            worst = r;
        }
        margins.push(RadiusMargin { r, max_error, ratio });
    }
    Ok(EnvelopeReport {
        regime,
        exponent,
        fitted_constant: fitted,
        worst_radius: worst,
        admissible_constant: admissible,
        violation: admissible.is_some_and(|c| fitted > c),
        margins,
    })
}
