//! `simulate`: particle ensembles.

use std::path::Path;

use coulombgas::cir::mean_h_v;
use coulombgas::dynamics::{gaussian_configuration, simulate_ensemble, GuardKind, PathRecord, SimConfig};
use coulombgas::model::energy_v;
use coulombgas::rng::stream;
use coulombgas::stats::Sample1D;
use coulombgas::{Configuration, ModelParams};
use serde_json::json;

use crate::output::{Cell, OutputDir, Table};
use crate::settings::{parse_pair, Defaults, Settings};
use crate::{CliError, Outcome};

pub const DEFAULTS: Defaults = Defaults { n: 8, dt: 1e-3, t_end: 1.0, paths: 100, grid: 40 };

/// Stream index of the built-in initial configuration.
const INITIAL_STREAM: u64 = u64::MAX;

/// Reads `x,y` lines; blank lines, `#` comments and a non-numeric first
/// line (a header) are skipped.
pub fn read_initial(path: &Path) -> Result<Configuration, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut pts = Vec::new();
    let mut first = true;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match parse_pair(line) {
            Ok(p) => pts.push(p),
            Err(_) if first => {}
            Err(e) => return Err(CliError::Usage(format!("{} line {}: {e}", path.display(), i + 1))),
        }
        first = false;
    }
    Ok(Configuration::from_xy(&pts)?)
}

fn initial_configuration(s: &Settings) -> Result<Configuration, CliError> {
    let cfg = match &s.initial {
        Some(path) => read_initial(path)?,
        None => gaussian_configuration(s.n, 1e-6, &mut stream(s.seed, INITIAL_STREAM))?,
    };
    if cfg.len() != s.n {
        return Err(CliError::Usage(format!("initial configuration has {} points, --n is {}", cfg.len(), s.n)));
    }
    Ok(cfg)
}

fn path_table(r: &PathRecord) -> Table {
    let mut t = Table::new(&["t", "h_v", "h_w", "min_gap"]);
    for k in 0..r.len() {
        t.push(vec![r.times[k].into(), r.h_v[k].into(), r.h_w[k].into(), r.min_gap[k].into()]);
    }
    t
}

fn column(records: &[PathRecord], k: usize, f: impl Fn(&PathRecord) -> &[f64]) -> Result<Sample1D, CliError> {
    Ok(Sample1D::new(records.iter().map(|r| f(r)[k]).collect())?)
}

pub fn run(s: &Settings, out: Option<&mut OutputDir>) -> Result<Outcome, CliError> {
    let params = ModelParams::new(s.n, s.alpha, s.beta)?;
    let initial = initial_configuration(s)?;
    let sim = SimConfig {
        dt: s.dt,
        t_end: s.t_end,
        record_every: s.record_every,
        epsilon: s.epsilon,
        seed: s.seed,
        ..SimConfig::default()
    };
    let records = simulate_ensemble(&initial, &sim, &params, s.paths)?;
    let h_v0 = energy_v(&initial);

    let mut ensemble = Table::new(&["t", "h_v_mean", "h_v_se", "h_v_theory", "h_w_mean", "h_w_se", "min_gap_min"]);
    let mut last = json!(null);
    for k in 0..records[0].len() {
        let t = records[0].times[k];
        let hv = column(&records, k, |r| &r.h_v)?;
        let hw = column(&records, k, |r| &r.h_w)?;
        let gap = records.iter().map(|r| r.min_gap[k]).fold(f64::INFINITY, f64::min);
        let theory = mean_h_v(t, h_v0, &params);
        ensemble.push(vec![
            t.into(),
            hv.mean().into(),
            hv.standard_error().into(),
            theory.into(),
            hw.mean().into(),
            hw.standard_error().into(),
            gap.into(),
        ]);
        last = json!({
            "t": t,
            "h_v_mean": hv.mean(),
            "h_v_se": hv.standard_error(),
            "h_v_theory": theory,
            "h_w_mean": hw.mean(),
            "h_w_se": hw.standard_error(),
        });
    }

    let count = |kind| records.iter().map(|r| r.count(kind)).sum::<usize>();
    let min_gap = records.iter().flat_map(|r| r.min_gap.iter().copied()).fold(f64::INFINITY, f64::min);
    let summary = json!({
        "n": s.n,
        "alpha": s.alpha,
        "beta": s.beta,
        "paths": s.paths,
        "h_v0": h_v0,
        "final": last,
        "min_gap_min": min_gap,
        "guard_events": {
            "gap_floor": count(GuardKind::GapFloor),
            "radius_cap": count(GuardKind::RadiusCap),
            "halving_exhausted": count(GuardKind::HalvingExhausted),
        },
    });

    if let Some(dir) = out {
        let mut init = Table::new(&["x", "y"]);
        for p in initial.points() {
            init.push(vec![Cell::from(p.x), Cell::from(p.y)]);
        }
        dir.write_table("initial", &init, s.format)?;
        for (p, r) in records.iter().enumerate() {
            dir.write_table(&format!("paths/path_{p:05}"), &path_table(r), s.format)?;
        }
        dir.write_table("ensemble", &ensemble, s.format)?;
        dir.write_json("summary.json", &summary)?;
    }
    Ok(Outcome { summary, failures: Vec::new() })
}
