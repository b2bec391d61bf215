//! Acceptance run: one PASS/FAIL line per criterion at the reference sample
//! sizes. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use coulombgas::suite::{self, CriterionReport, SuiteConfig};
use coulombgas::Result;

fn timed(label: &str, f: impl FnOnce() -> Result<CriterionReport>) -> CriterionReport {
    let start = Instant::now();
    let report = f().unwrap_or_else(|e| panic!("{label}: {e}"));
    println!("{}  [{:.1}s]", report.summary_line(), start.elapsed().as_secs_f64());
    for c in report.failing() {
        println!("    {}: {}", c.name, c.detail);
    }
    report
}

fn main() -> ExitCode {
    let cfg = SuiteConfig::full(20240601);
    let mut reports = Vec::new();

    reports.push(timed("1", || suite::closed_form_identities(&cfg)));
    reports.push(timed("2", || suite::inequalities(&cfg)));

    let start = Instant::now();
    let (p3, mean_records) = suite::second_moment_ensemble(&cfg).expect("mean ensemble");
    println!("       (second-moment ensemble simulated in {:.1}s)", start.elapsed().as_secs_f64());
    reports.push(timed("3", || suite::second_moment_mean(&p3, &mean_records)));

    let start = Instant::now();
    let (p4, stat_records) = suite::stationary_ensemble(&cfg).expect("stationary ensemble");
    println!("       (stationary ensemble simulated in {:.1}s)", start.elapsed().as_secs_f64());
    reports.push(timed("4", || suite::stationary_gamma(&cfg, &p4, &stat_records)));

    reports.push(timed("5", || suite::cir_contraction(&cfg)));
    reports.push(timed("6", || suite::ginibre_marginal(&cfg, Some((&p4, &stat_records)))));
    reports.push(timed("7", suite::chaoticity_decay));
    reports.push(timed("8", || suite::non_explosion(&cfg)));
    reports.push(timed("9", || suite::h_w_bound(&p3, &mean_records)));
    reports.push(timed("10", || suite::poincare_ratio(&cfg)));

    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed()).map(|r| r.id).collect();
    println!("acceptance: {} of {} criteria pass", reports.len() - failed.len(), reports.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
