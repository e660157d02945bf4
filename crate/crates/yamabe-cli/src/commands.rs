use std::fs;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;
use yamabe_lab::bubble::KelvinParams;
use yamabe_lab::curvature::{
    dimension_gate, generate_jet, validate_jet, CurvatureJet, JetSpec, ProjectionMode,
};
use yamabe_lab::pohozaev::{eval_pohozaev, i2_breakdown, PohozaevField, PohozaevInput};
use yamabe_lab::profile::{build_profile, pde_residual, residual_radius_limit, SampleGrid, SampledSolution, DEFAULT_RADIUS_EPS};
use yamabe_lab::radial::{LogGrid, RadialFunction};
use yamabe_lab::sphere::{exact, ladder_denominator, odd_moment_constant, rational, sphere_monomial_moment};
use yamabe_lab::sturm_liouville::{
    check_f2_bounds, check_f2lambda_bounds, check_supersolutions, solve_f2, solve_f2_lambda, solve_f3, solve_fpl,
    BvpSolution, FamilyOptions,
};
use yamabe_lab::{Dimension, LabError};

use crate::{CliError, Outcome, RunConfig};

pub fn dimension(cfg: &RunConfig) -> Result<Dimension, CliError> {
    Ok(Dimension::new(cfg.get("dim")?)?)
}

pub fn family_options(cfg: &RunConfig) -> Result<FamilyOptions, CliError> {
    let grid = LogGrid::new(cfg.get("grid.r_lo")?, cfg.get("grid.r_hi")?, cfg.get("grid.ppd")?);
    grid.validate()?;
    Ok(FamilyOptions::with_grid(grid))
}

pub fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(cfg.raw("out").unwrap_or("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn pretty<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// `p/q` or a decimal.
pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let bad = || CliError::config(format!("cannot parse `{s}` as a rational number"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(rational(p, q))
        }
        None => Ok(exact(s.trim().parse::<f64>().map_err(|_| bad())?)),
    }
}

pub fn load_jet(path: &str) -> Result<CurvatureJet, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{path}: {e}")))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{path}: {e}")))?;
    CurvatureJet::from_json(&v).map_err(|e| CliError::config(format!("{path}: {e}")))
}

pub fn projection_mode(cfg: &RunConfig) -> Result<ProjectionMode, CliError> {
    match cfg.raw("mode").unwrap_or("hypothesis") {
        "general" => Ok(ProjectionMode::General),
        "hypothesis" => Ok(ProjectionMode::Hypothesis),
        other => Err(CliError::config(format!("key `mode`: expected general or hypothesis, got `{other}`"))),
    }
}

/// The configured jet file, or a seeded hypothesis jet without a sextic block.
pub fn jet_or_generated(cfg: &RunConfig) -> Result<CurvatureJet, CliError> {
    if let Some(path) = cfg.raw("jet") {
        return load_jet(path);
    }
    let mut spec = JetSpec::new(cfg.get("dim")?, cfg.get("seed")?, ProjectionMode::Hypothesis);
    spec.sextic_block = false;
    Ok(generate_jet(&spec)?)
}

fn write_profile_csv(dir: &Path, name: &str, sol: &BvpSolution) -> Result<(), CliError> {
    let mut buf = Vec::new();
    sol.profile.write_csv(&mut buf)?;
    fs::write(dir.join(format!("{name}.csv")), buf)?;
    Ok(())
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = dimension(cfg)?;
    let opts = family_options(cfg)?;
    let family: String = cfg.get("family")?;
    let (sol, report, passed) = match family.as_str() {
        "f2" => {
            let sol = solve_f2(n, &opts)?;
            let rep = check_f2_bounds(&sol, n, cfg.get("bounds.lo")?, cfg.get("bounds.hi")?)?;
            let ok = rep.lower_bound_ok && rep.upper_finite;
            (sol, serde_json::to_value(rep)?, ok)
        }
        "f3" => {
            let sol = solve_f3(n, &opts)?;
            let (lo, hi) = (sol.profile.r_min(), sol.profile.r_max());
            let rep = json!({
                "n": n.get(),
                "residual_norm": sol.residual_norm,
                "min_value": sol.min_value,
                "inner_slope": sol.profile.loglog_slope(lo, lo * 10.0)?,
                "outer_slope": sol.profile.loglog_slope(hi / 10.0, hi)?,
            });
            (sol, rep, true)
        }
        "f2lambda" => {
            let kp = KelvinParams::new(cfg.get("lambda")?)?;
            let sol = solve_f2_lambda(n, kp, &opts)?;
            let rep = check_f2lambda_bounds(&sol, n, kp, cfg.get("eps")?, None)?;
            let ok = rep.lower_bound_ok && rep.upper_finite;
            (sol, serde_json::to_value(rep)?, ok)
        }
        "fpl" => {
            let kp = KelvinParams::new(cfg.get("lambda")?)?;
            let l: usize = cfg.get("l")?;
            let r_hi: f64 = cfg.get("fpl.r_hi")?;
            let sol = solve_fpl(n, kp, l, None, r_hi, &opts)?;
            let rep = json!({
                "n": n.get(),
                "l": l,
                "lambda": kp.lambda(),
                "residual_norm": sol.residual_norm,
                "min_value": sol.min_value,
                "outer_slope": sol.profile.loglog_slope(r_hi * 1e-3, r_hi * 1e-2)?,
                "expected_outer_exponent": l as f64 + 4.0 - n.as_f64(),
            });
            (sol, rep, true)
        }
        other => return Err(CliError::config(format!("key `family`: unknown family `{other}`"))),
    };
    let dir = out_dir(cfg)?;
    write_profile_csv(&dir, &family, &sol)?;
    let text = pretty(&report)?;
    write(&dir.join(format!("{family}_bounds.json")), &text)?;
    Ok(Outcome { stdout: text, passed })
}

pub fn cmd_bounds(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = dimension(cfg)?;
    let opts = family_options(cfg)?;
    let sol = solve_f2(n, &opts)?;
    let f2 = check_f2_bounds(&sol, n, cfg.get("bounds.lo")?, cfg.get("bounds.hi")?)?;
    let sup = check_supersolutions(n, &opts.grid)?;
    let passed = f2.lower_bound_ok && f2.upper_finite && sup.phi1_ok && sup.comparison_ok;
    let text = pretty(&json!({ "f2": f2, "supersolutions": sup }))?;
    Ok(Outcome { stdout: text, passed })
}

pub fn cmd_gate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let from: usize = cfg.get("gate.from")?;
    let to: usize = cfg.get("gate.to")?;
    let eps = parse_rational(cfg.raw("gate.eps").unwrap_or("0"))?;
    let mut out = String::from("n,lhs,rhs,margin,holds\n");
    for n in from..=to {
        let g = dimension_gate(n, &eps)?;
        out.push_str(&format!("{},{:e},{:e},{:e},{}\n", g.n, g.lhs, g.rhs, g.margin, g.holds));
    }
    Ok(Outcome { stdout: out, passed: true })
}

pub fn cmd_moments(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n: usize = cfg.get("dim")?;
    if n < 2 {
        return Err(CliError::config("moments need n ≥ 2"));
    }
    let mut mixed = vec![0u8; n];
    mixed[0] = 2;
    mixed[1] = 2;
    let mut pure = vec![0u8; n];
    pure[0] = 4;
    let (m, p) = (sphere_monomial_moment(n, &mixed), sphere_monomial_moment(n, &pure));
    let nn = n as i64;
    let passed = m == rational(1, nn * (nn + 2)) && p == rational(3, nn * (nn + 2));
    let ladder: Vec<String> = (1..=3).map(|k| ladder_denominator(n, k).to_string()).collect();
    let odd: Vec<String> = (1..=2).map(|k| odd_moment_constant(n, k).map(|c| c.to_string())).collect::<Result<_, _>>()?;
    let text = pretty(&json!({
        "n": n,
        "mean_theta1_sq_theta2_sq": m.to_string(),
        "mean_theta1_fourth": p.to_string(),
        "matches_closed_form": passed,
        "ladder_denominators": ladder,
        "odd_moment_constants": odd,
    }))?;
    Ok(Outcome { stdout: text, passed })
}

pub fn cmd_jet_generate(cfg: &RunConfig, output: Option<&str>) -> Result<Outcome, CliError> {
    let seed: u64 = cfg.get("seed")?;
    let spec = JetSpec::new(cfg.get("dim")?, seed, projection_mode(cfg)?);
    let jet = generate_jet(&spec)?;
    let text = serde_json::to_string(&jet.to_json(Some(seed)))? + "\n";
    match output {
        Some(path) => {
            write(Path::new(path), &text)?;
            Ok(Outcome { stdout: format!("wrote {path}\n"), passed: true })
        }
        None => Ok(Outcome { stdout: text, passed: true }),
    }
}

pub fn cmd_jet_validate(path: &str) -> Result<Outcome, CliError> {
    let jet = load_jet(path)?;
    let rep = validate_jet(&jet);
    Ok(Outcome { stdout: pretty(&rep)?, passed: rep.passed })
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let jet = jet_or_generated(cfg)?;
    let n = jet.n();
    let opts = family_options(cfg)?;
    let height: f64 = cfg.get("height")?;
    let f2 = solve_f2(n, &opts)?.profile;
    let f3 = solve_f3(n, &opts)?.profile;
    let profile = build_profile(&jet, height, Some(&f2), Some(&f3))?;
    let limit = residual_radius_limit(n.get(), height, DEFAULT_RADIUS_EPS);
    let radii = SampleGrid::log_radii(0.05, limit.max(0.1), cfg.get("residual.points")?);
    let dirs = SampleGrid::standard_directions(n.get(), cfg.get("residual.directions")?, cfg.get("seed")?);
    let grid = SampleGrid::new(radii, dirs)?;
    let rep = pde_residual(&profile, &jet, &grid)?;
    let samples = SampledSolution::from_profile(&profile, &grid)?;
    let dir = out_dir(cfg)?;
    let mut csv = Vec::new();
    samples.write_csv(&mut csv)?;
    fs::write(dir.join("profile_samples.csv"), csv)?;
    let mut side = Vec::new();
    samples.write_sidecar(&mut side)?;
    fs::write(dir.join("profile_samples.json"), side)?;
    let text = pretty(&rep)?;
    write(&dir.join("profile_residual.json"), &text)?;
    let summary = pretty(&json!({
        "n": n.get(),
        "height": height,
        "fitted_constant": rep.fitted_constant,
        "worst_radius": rep.worst_radius,
        "max_abs": rep.max_abs,
        "radius_limit": rep.radius_limit,
        "warnings": rep.warnings,
    }))?;
    Ok(Outcome { stdout: summary, passed: rep.fitted_constant.is_finite() })
}

fn read_radial(dir: &Path, name: &str) -> Result<RadialFunction, CliError> {
    let path = dir.join(format!("{name}.csv"));
    let file = fs::File::open(&path)
        .map_err(|_| CliError::from(LabError::Dependency(format!("{} (run `solve --profile {name}` first)", path.display()))))?;
    Ok(RadialFunction::read_csv(file)?)
}

pub fn cmd_pohozaev(cfg: &RunConfig, profile_dir: Option<&str>) -> Result<Outcome, CliError> {
    let jet = match cfg.raw("jet") {
        Some(p) => load_jet(p)?,
        None => CurvatureJet::zero(dimension(cfg)?),
    };
    let height: f64 = cfg.get("height")?;
    let radius: f64 = cfg.get("radius")?;
    let flat = jet.rm0().iter().chain(jet.rm1()).chain(jet.rm2()).all(|v| *v == 0.0) && jet.blocks().next().is_none();
    let input = match profile_dir {
        Some(dir) => {
            let dir = Path::new(dir);
            let f2 = read_radial(dir, "f2")?;
            let f3 = read_radial(dir, "f3")?;
            let profile = build_profile(&jet, height, Some(&f2), Some(&f3))?;
            PohozaevInput::profile(profile, jet, radius)
        }
        None => PohozaevInput::bubble(jet, height, radius),
    };
    let exact_solution = flat && matches!(input.field, PohozaevField::Bubble { .. });
    let rep = eval_pohozaev(&input)?;
    let breakdown = i2_breakdown(&input)?;
    let passed = !exact_solution || rep.normalized_defect.abs() <= 1e-8;
    let text = pretty(&json!({
        "I1": rep.i1,
        "I2": rep.i2,
        "I3": rep.i3,
        "I4": rep.i4,
        "I5": rep.i5,
        "defect": rep.defect,
        "normalized_defect": rep.normalized_defect,
        "I5_times_height_squared": rep.i5_height_scaled,
        "refinement_change": rep.refinement_change,
        "breakdown": breakdown,
    }))?;
    Ok(Outcome { stdout: text, passed })
}
