use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::output::{csv, read_json, to_canonical_json, write_atomic};
use super::{CliError, Command, RunConfig, RunOutcome, SurfaceChoice, SCHEMA_VERSION};
use crate::diskmap::{
    self, calabi, calabi_shifted, default_suspension_constant, mean_action_check_with, periodic_points,
    suspension_dictionary, DictionaryOptions, HamiltonianSpec,
};
use crate::error::Error;
use crate::flow::{approximate_liouville_by_orbits, liouville_mass, liouville_sample, write_samples_csv};
use crate::systolic::{
    average_identity, contact_volume, disk_pairing, enumerate_tori, pairing, special_period, systolic_interval,
    witness_measure, Orbit, SpecialOrbit,
};
use crate::topology::{
    action_linking_verify, linking_number, ClosedCurve, LinkingOptions, SeifertSurface, VerifyOptions,
    DEFAULT_RETURN_TOLERANCE,
};
use crate::toric::{ProfileSpec, ToricProfile};

/// `|z|` above which a Monte Carlo check counts as inconsistent.
const Z_THRESHOLD: f64 = 4.0;

struct Emitted {
    report: Value,
    parameters: Value,
    input: Value,
    csv: Vec<(&'static str, String, usize)>,
    warnings: Vec<String>,
    summary: String,
    exit_code: i32,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(name: &str, v: T) -> Result<T, CliError> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(CliError::Input(format!("--{name} must be positive (got {v})")))
    }
}

pub(super) fn dispatch(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let emitted = match cfg.command {
        Command::ToricAnalyze => toric_analyze(cfg)?,
        Command::Systole => systole(cfg)?,
        Command::VerifyActionLinking => verify_action_linking(cfg)?,
        Command::Equidistribute => equidistribute(cfg)?,
        Command::DiskmapCalabi => diskmap_calabi(cfg)?,
        Command::DiskmapDictionary => diskmap_dictionary(cfg)?,
        Command::Linking => linking(cfg)?,
    };
    let mut warnings = emitted.warnings;
    let mut files = Vec::new();
    for (name, text, rows) in &emitted.csv {
        if *rows == 0 {
            warnings.push(format!("no data for {name}; file not written"));
            continue;
        }
        files.push(write_atomic(&cfg.output, name, text.as_bytes())?);
    }
    let envelope = json!({
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command.name(),
        "seed": cfg.seed,
        "input": emitted.input,
        "parameters": emitted.parameters,
        "report": emitted.report,
        "warnings": warnings,
    });
    let path = write_atomic(&cfg.output, "report.json", to_canonical_json(&envelope).as_bytes())?;
    files.insert(0, path.clone());
    Ok(RunOutcome {
        exit_code: emitted.exit_code,
        files,
        summary: format!("{}: {} (report: {})", cfg.command.name(), emitted.summary, path.display()),
        warnings,
    })
}

fn load_profile(cfg: &RunConfig) -> Result<(ProfileSpec, ToricProfile), CliError> {
    let spec: ProfileSpec = read_json(&cfg.input)?;
    let profile = spec.build()?;
    Ok((spec, profile))
}

/// Tori are unavailable on boundaries with a negative partial derivative;
/// that is reported as a warning rather than failing the whole command.
fn tori_or_warning(profile: &ToricProfile, max_pq: u32, warnings: &mut Vec<String>) -> Result<Value, CliError> {
    match enumerate_tori(profile, max_pq) {
        Ok(t) => Ok(to_value(&t)),
        Err(Error::Precondition(msg)) => {
            warnings.push(format!("tori not enumerated: {msg}"));
            Ok(Value::Null)
        }
        Err(e) => Err(e.into()),
    }
}

fn toric_analyze(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let (spec, profile) = load_profile(cfg)?;
    let grid = positive("grid", cfg.grid.unwrap_or(256))?;
    let max_pq = positive("max-pq", cfg.max_pq.unwrap_or(8))?;
    let mut warnings = Vec::new();
    let two_a = profile.total_t();
    let (d1_min, d2_min) = profile.min_partials(grid.max(16));
    let report = json!({
        "area": profile.quadrant_area(),
        "two_a": two_a,
        "intercepts": to_value(&profile.intercepts_with_consistency()),
        "volume": contact_volume(&profile),
        "periods": {
            "gamma1": special_period(&profile, SpecialOrbit::Gamma1),
            "gamma2": special_period(&profile, SpecialOrbit::Gamma2),
        },
        "endpoint_pairing": pairing(&profile, Orbit::Gamma2, Orbit::Gamma1)?,
        "min_partials": [d1_min, d2_min],
        "is_ellipsoid": profile.is_ellipsoid(),
        "average_identity": to_value(&average_identity(&profile)?),
        "tori": tori_or_warning(&profile, max_pq, &mut warnings)?,
    });
    let mut rows = Vec::with_capacity(grid);
    for j in 0..grid {
        let t = two_a * (j as f64 + 0.5) / grid as f64;
        rows.push(vec![
            t,
            disk_pairing(&profile, SpecialOrbit::Gamma1, t)?,
            disk_pairing(&profile, SpecialOrbit::Gamma2, t)?,
        ]);
    }
    Ok(Emitted {
        summary: format!("2A = {two_a:.6}, volume = {:.6}", contact_volume(&profile)),
        report,
        parameters: json!({"grid": grid, "max_pq": max_pq}),
        input: to_value(&spec),
        csv: vec![("pairing_profile.csv", csv(&["t", "rho_gamma1", "rho_gamma2"], &rows), rows.len())],
        warnings,
        exit_code: 0,
    })
}

fn systole(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let (spec, profile) = load_profile(cfg)?;
    let grid = positive("grid", cfg.grid.unwrap_or(1024))?;
    let max_pq = positive("max-pq", cfg.max_pq.unwrap_or(8))?;
    let mut warnings = Vec::new();
    let rep = systolic_interval(&profile, grid)?;
    let mut report = to_value(&rep);
    report["tori"] = tori_or_warning(&profile, max_pq, &mut warnings)?;

    // g(t, t̂) = 2A·D₁F(C(min))·D₂F(C(max)) on a plotting grid
    let m = grid.min(128) + 1;
    let two_a = profile.total_t();
    let points =
        (0..m).map(|i| profile.boundary_point(two_a * i as f64 / (m - 1) as f64)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(m * m);
    for (i, pi) in points.iter().enumerate() {
        for (j, pj) in points.iter().enumerate() {
            let (lo, hi) = if i <= j { (pi, pj) } else { (pj, pi) };
            rows.push(vec![pi.t, pj.t, two_a * lo.d1 * hi.d2]);
        }
    }
    Ok(Emitted {
        summary: format!(
            "interval [{:.10}, {:.10}], norm {:.3e}, contains one: {}",
            rep.interval.0, rep.interval.1, rep.norm, rep.contains_one
        ),
        report,
        parameters: json!({"grid": grid, "max_pq": max_pq}),
        input: to_value(&spec),
        csv: vec![("systolic_grid.csv", csv(&["t", "t_hat", "g"], &rows), rows.len())],
        warnings,
        exit_code: 0,
    })
}

fn verify_action_linking(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let (spec, profile) = load_profile(cfg)?;
    let samples = positive("samples", cfg.samples.unwrap_or(100_000))?;
    let horizon = positive("horizon", cfg.horizon.unwrap_or(1000.0))?;
    let opts = VerifyOptions {
        n_samples: samples,
        horizon,
        seed: cfg.seed,
        return_tolerance: DEFAULT_RETURN_TOLERANCE,
        threads: cfg.threads,
    };
    let which: &[SpecialOrbit] = match cfg.surface {
        SurfaceChoice::Gamma1 => &[SpecialOrbit::Gamma1],
        SurfaceChoice::Gamma2 => &[SpecialOrbit::Gamma2],
        SurfaceChoice::Both => &[SpecialOrbit::Gamma1, SpecialOrbit::Gamma2],
    };
    let mut results = Vec::new();
    let mut worst: f64 = 0.0;
    for &orbit in which {
        let surface = SeifertSurface::for_orbit(&profile, orbit, 0.0)?;
        let r = action_linking_verify(&profile, &surface, &opts)?;
        worst = if r.z.is_nan() { f64::INFINITY } else { worst.max(r.z) };
        results.push(r);
    }
    let consistent = worst <= Z_THRESHOLD;
    Ok(Emitted {
        summary: format!("max z = {worst:.3} ({})", if consistent { "consistent" } else { "INCONSISTENT" }),
        report: json!({
            "results": to_value(&results),
            "z_threshold": Z_THRESHOLD,
            "max_z": worst,
            "consistent": consistent,
        }),
        parameters: json!({
            "samples": samples,
            "horizon": horizon,
            "return_tolerance": DEFAULT_RETURN_TOLERANCE,
        }),
        input: to_value(&spec),
        csv: Vec::new(),
        warnings: Vec::new(),
        exit_code: if consistent { 0 } else { 4 },
    })
}

fn equidistribute(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let (spec, profile) = load_profile(cfg)?;
    let n_tori = positive("grid", cfg.grid.unwrap_or(64))?;
    let max_pq = positive("max-pq", cfg.max_pq.unwrap_or(64))?;
    let epsilon = cfg.epsilon.unwrap_or(0.1);
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CliError::Input(format!("--epsilon must lie in (0, 1) (got {epsilon})")));
    }
    let samples = cfg.samples.unwrap_or(1000);
    let set = approximate_liouville_by_orbits(&profile, n_tori, max_pq)?;
    let witnesses = json!({
        "gamma1": to_value(&witness_measure(&profile, SpecialOrbit::Gamma1, epsilon)?),
        "gamma2": to_value(&witness_measure(&profile, SpecialOrbit::Gamma2, epsilon)?),
    });
    let pts = if samples == 0 { Vec::new() } else { liouville_sample(&profile, samples, cfg.seed)? };
    let mut buf = Vec::new();
    write_samples_csv(&mut buf, &pts).map_err(|e| CliError::io(&cfg.output.join("liouville_samples.csv"), e))?;
    Ok(Emitted {
        summary: format!("{} orbits, discrepancy {:.3e}", set.orbits.len(), set.discrepancy),
        report: json!({
            "orbit_set": to_value(&set),
            "liouville_mass": liouville_mass(&profile),
            "witness_measures": witnesses,
        }),
        parameters: json!({"n_tori": n_tori, "max_pq": max_pq, "epsilon": epsilon, "samples": samples}),
        input: to_value(&spec),
        csv: vec![("liouville_samples.csv", String::from_utf8(buf).expect("ascii csv"), pts.len())],
        warnings: Vec::new(),
        exit_code: 0,
    })
}

struct DiskSetup {
    spec: HamiltonianSpec,
    h: diskmap::DiskHamiltonian,
    quad_n: usize,
    k_max: u32,
    search_grid: usize,
}

fn load_hamiltonian(cfg: &RunConfig) -> Result<DiskSetup, CliError> {
    let spec: HamiltonianSpec = read_json(&cfg.input)?;
    let h = spec.build()?;
    let quad_n = positive("grid", cfg.grid.unwrap_or(32))?;
    let k_max = positive("k-max", cfg.k_max.unwrap_or(3))?;
    // root bracketing is cheap for radial kinds; Newton starts are not
    let search_grid = if h.is_radial() { 4 * quad_n } else { (quad_n / 4).max(4) };
    Ok(DiskSetup { spec, h, quad_n, k_max, search_grid })
}

fn diskmap_calabi(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let d = load_hamiltonian(cfg)?;
    let epsilon = positive("epsilon", cfg.epsilon.unwrap_or(0.1))?;
    let cal = calabi(&d.h, d.quad_n)?;
    let shifted = calabi_shifted(&d.h, d.quad_n, &|x, y| x * y)?;
    let set = periodic_points(&d.h, d.k_max, d.search_grid)?;
    let check = mean_action_check_with(&d.h, epsilon, cal, &set.points)?;
    let mut warnings = Vec::new();
    if set.skipped > 0 {
        warnings.push(format!("{} Newton starts did not converge", set.skipped));
    }
    let rows: Vec<Vec<f64>> = if d.h.is_radial() {
        let n = 4 * d.quad_n;
        (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                let (hv, dh, _) = d.h.radial_profile(s).expect("radial");
                vec![s, hv - s * dh]
            })
            .collect()
    } else {
        let mut r: Vec<Vec<f64>> =
            set.points.iter().map(|p| vec![p.z.0 * p.z.0 + p.z.1 * p.z.1, p.mean_action]).collect();
        r.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        r
    };
    Ok(Emitted {
        summary: format!("CAL = {cal:.12}, {} periodic points", set.points.len()),
        report: json!({
            "calabi": cal,
            "calabi_shifted_primitive": shifted,
            "primitive_shift_difference": (shifted - cal).abs(),
            "periodic_points": to_value(&set.points),
            "skipped_starts": set.skipped,
            "mean_action_check": to_value(&check),
        }),
        parameters: json!({
            "quad_n": d.quad_n,
            "k_max": d.k_max,
            "search_grid": d.search_grid,
            "epsilon": epsilon,
        }),
        input: to_value(&d.spec),
        csv: vec![("action_spectrum.csv", csv(&["s", "mean_action"], &rows), rows.len())],
        warnings,
        exit_code: 0,
    })
}

fn diskmap_dictionary(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let d = load_hamiltonian(cfg)?;
    let epsilon = cfg.epsilon.unwrap_or(0.1);
    let c = cfg.constant.unwrap_or_else(|| default_suspension_constant(&d.h));
    let set = periodic_points(&d.h, d.k_max, d.search_grid)?;
    let opts = DictionaryOptions { epsilon, quad_n: d.quad_n, ..Default::default() };
    let rep = suspension_dictionary(&d.h, c, &set.points, &opts)?;
    let max_period_residual = rep.rows.iter().map(|r| (r.period - r.period_from_action).abs()).fold(0.0, f64::max);
    let crossings_match = rep.rows.iter().all(|r| r.crossings == r.k as i64);
    let mut warnings = rep.warnings.clone();
    if set.skipped > 0 {
        warnings.push(format!("{} Newton starts did not converge", set.skipped));
    }
    let rows: Vec<Vec<f64>> = rep.rows.iter().map(|r| vec![r.mean_action, r.rho]).collect();
    Ok(Emitted {
        summary: format!(
            "{} orbits, max |T - σ - kc| = {max_period_residual:.3e}, crossings match: {crossings_match}",
            rep.rows.len()
        ),
        report: json!({
            "suspension": to_value(&rep.suspension),
            "volume_residual": (rep.suspension.volume_quadrature - rep.suspension.volume).abs(),
            "rows": to_value(&rep.rows),
            "max_period_residual": max_period_residual,
            "crossings_match": crossings_match,
        }),
        parameters: json!({
            "c": c,
            "epsilon": epsilon,
            "quad_n": d.quad_n,
            "k_max": d.k_max,
            "search_grid": d.search_grid,
        }),
        input: to_value(&d.spec),
        csv: vec![("dictionary.csv", csv(&["mean_action", "rho"], &rows), rows.len())],
        warnings,
        exit_code: 0,
    })
}

/// One curve of a `linking` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Gamma1 {
        #[serde(default)]
        samples: Option<usize>,
    },
    Gamma2 {
        #[serde(default)]
        samples: Option<usize>,
    },
    /// A `(p, q)` orbit on the torus over `C(t)`; needs a profile.
    Torus {
        t: f64,
        p: u32,
        q: u32,
        #[serde(default)]
        phase: [f64; 2],
        #[serde(default)]
        samples: Option<usize>,
    },
    /// Points `x1,y1,x2,y2` per line; relative paths resolve against the
    /// input file's directory.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkingInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    pub first: CurveSpec,
    pub second: CurveSpec,
    #[serde(default = "default_max_chord")]
    pub max_chord: f64,
}

fn default_max_chord() -> f64 {
    0.5
}

fn build_curve(
    spec: &CurveSpec,
    profile: Option<&ToricProfile>,
    base: &Path,
    max_chord: f64,
) -> Result<ClosedCurve, CliError> {
    Ok(match spec {
        CurveSpec::Gamma1 { samples } => ClosedCurve::gamma1(samples.unwrap_or(512))?,
        CurveSpec::Gamma2 { samples } => ClosedCurve::gamma2(samples.unwrap_or(512))?,
        CurveSpec::Torus { t, p, q, phase, samples } => {
            let profile = profile.ok_or_else(|| CliError::Input("a torus curve needs a \"profile\"".into()))?;
            let n = samples.unwrap_or(128 * (p + q) as usize);
            ClosedCurve::torus_orbit(profile, *t, *p, *q, (phase[0], phase[1]), n)?
        }
        CurveSpec::Csv { path } => {
            let full = if path.is_absolute() { path.clone() } else { base.join(path) };
            let f = fs::File::open(&full).map_err(|e| CliError::io(&full, e))?;
            ClosedCurve::read_csv(BufReader::new(f), max_chord)?
        }
    })
}

fn linking(cfg: &RunConfig) -> Result<Emitted, CliError> {
    let input: LinkingInput = read_json(&cfg.input)?;
    if !(input.max_chord > 0.0) {
        return Err(CliError::Input("max_chord must be positive".into()));
    }
    let profile = input.profile.as_ref().map(|p| p.build()).transpose()?;
    let base = cfg.input.parent().unwrap_or(Path::new("."));
    let c1 = build_curve(&input.first, profile.as_ref(), base, input.max_chord)?;
    let c2 = build_curve(&input.second, profile.as_ref(), base, input.max_chord)?;
    let est = linking_number(&c1, &c2, &LinkingOptions::default())?;
    Ok(Emitted {
        summary: format!("link = {} (sum {:.6}, residual {:.2e})", est.link, est.value, est.residual),
        report: json!({
            "linking": to_value(&est),
            "edges": [c1.len(), c2.len()],
        }),
        parameters: json!({"max_chord": input.max_chord}),
        input: to_value(&input),
        csv: Vec::new(),
        warnings: Vec::new(),
        exit_code: 0,
    })
}
