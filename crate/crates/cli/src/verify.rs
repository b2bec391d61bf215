//! `verify`: the full verification suite, or its closed-form part.

use coulombgas::suite::{run_suite, SuiteConfig};
use serde_json::json;

use crate::output::OutputDir;
use crate::settings::{Defaults, Settings};
use crate::{CliError, Outcome};

pub const DEFAULTS: Defaults = Defaults { n: 8, dt: 1e-3, t_end: 1.0, paths: 1, grid: 40 };

pub fn run(s: &Settings, out: Option<&mut OutputDir>) -> Result<Outcome, CliError> {
    let cfg = SuiteConfig::full(s.seed);
    let reports = run_suite(&cfg, s.quick)?;
    for r in &reports {
        eprintln!("{}", r.summary_line());
    }
    let failures: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.failing().map(move |c| {
                format!("criterion {} {}: {} = {:e} (tolerance {:e})", r.id, r.title, c.name, c.value, c.tolerance)
            })
        })
        .collect();
    let report = json!({
        "seed": s.seed,
        "quick": s.quick,
        "suite": cfg,
        "all_passed": failures.is_empty(),
        "criteria": reports,
    });
    if let Some(dir) = out {
        dir.write_json("report.json", &report)?;
    }
    let summary = json!({
        "all_passed": failures.is_empty(),
        "criteria": reports.iter().map(|r| json!({ "id": r.id, "title": r.title, "passed": r.passed() })).collect::<Vec<_>>(),
    });
    Ok(Outcome { summary, failures })
}
