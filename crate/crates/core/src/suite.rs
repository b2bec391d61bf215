//! Verification checks shared by the `verify` command and the acceptance tests.
//!
//! Each criterion bundles a few named checks; a criterion passes when all of
//! its checks pass. Sample sizes come from [`SuiteConfig`], whose `full`
//! preset holds the reference sizes and `reduced` a fast smoke-test variant.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cir::{cir_from_model, coupled_contraction_test, gamma_cdf, mean_h_v, sample_cir_exact, GammaLaw};
use crate::dynamics::{
    eta_bound_check, gaussian_configuration, rescale_to_h_v, simulate_ensemble, simulate_with_rng, GuardKind,
    PathRecord, SimConfig,
};
use crate::error::Result;
use crate::ginibre::{
    delta2, exp_series_tail, marginal1_radial_cdf, marginal1_second_moment, poincare_rayleigh, sample_marginal1,
    trunc_exp, trunc_exp_tail_bound,
};
use crate::model::{
    apply_generator, energy, energy_lower_bound, energy_v, fd_laplacian4, generator_h, generator_h_v, generator_h_w,
    grad_coercivity_bound, grad_h, grad_norm_sq, interaction_sum, Configuration, ModelParams, Point2,
};
use crate::rng::{stream, StreamRng};
use crate::stats::{chi_square_test, ks_statistic, radial_histogram, w1_empirical, RadialHistogram, Sample1D};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    /// Passes when `value <= tolerance`.
    fn at_most(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        CheckOutcome { name: name.into(), passed: value <= tolerance, value, tolerance, detail }
    }

    /// Passes when `value >= tolerance`.
    fn at_least(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        CheckOutcome { name: name.into(), passed: value >= tolerance, value, tolerance, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub checks: Vec<CheckOutcome>,
}

impl CriterionReport {
    fn new(id: u8, title: &str) -> Self {
        CriterionReport { id, title: title.into(), checks: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line: status, id, title and the value of every check.
    pub fn summary_line(&self) -> String {
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{}{}={:.4e} (tol {:.4e})", if c.passed { "" } else { "!" }, c.name, c.value, c.tolerance))
            .collect();
        format!(
            "{} criterion {:>2} {}: {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            parts.join("; ")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub n_configs: usize,
    pub mean_paths: usize,
    pub stationary_paths: usize,
    pub coupled_pairs: usize,
    pub coupled_dt: f64,
    pub marginal_draws: usize,
    pub nonexplosion_seeds: usize,
    pub rayleigh_draws: usize,
}

impl SuiteConfig {
    pub fn full(seed: u64) -> Self {
        SuiteConfig {
            seed,
            n_configs: 1000,
            mean_paths: 2000,
            stationary_paths: 2000,
            coupled_pairs: 5000,
            coupled_dt: 1e-4,
            marginal_draws: 100_000,
            nonexplosion_seeds: 200,
            rayleigh_draws: 100_000,
        }
    }

    pub fn reduced(seed: u64) -> Self {
        SuiteConfig {
            seed,
            n_configs: 100,
            mean_paths: 200,
            stationary_paths: 200,
            coupled_pairs: 500,
            coupled_dt: 1e-3,
            marginal_draws: 20_000,
            nonexplosion_seeds: 10,
            rayleigh_draws: 20_000,
        }
    }
}

// Stream indices reserved for each experiment, so that criteria do not share
// random numbers.
const STREAM_CONFIGS: u64 = 1 << 40;
const STREAM_INITIAL: u64 = 2 << 40;
const STREAM_CIR: u64 = 3 << 40;
const STREAM_MARGINAL: u64 = 4 << 40;
const STREAM_RAYLEIGH: u64 = 5 << 40;

fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(scale).max(f64::MIN_POSITIVE)
}

fn random_configs(seed: u64, n_configs: usize, sizes: &[usize]) -> Result<Vec<Configuration>> {
    let mut rng = stream(seed, STREAM_CONFIGS);
    (0..n_configs).map(|k| gaussian_configuration(sizes[k % sizes.len()], 1e-6, &mut rng)).collect()
}

fn params_for(k: usize, n: usize) -> Result<ModelParams> {
    if k.is_multiple_of(2) {
        ModelParams::ginibre(n)
    } else {
        ModelParams::crossover(n)
    }
}

/// Closed-form identities on random configurations.
pub fn closed_form_identities(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut report = CriterionReport::new(1, "closed-form identities");
    let configs = random_configs(cfg.seed, cfg.n_configs, &[2, 3, 8, 16])?;
    let (mut grad, mut split, mut eigen, mut gen_fd, mut lap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let energy_f = |c: &Configuration| energy(c);
    let h_v = |c: &Configuration| Ok(energy_v(c));
    for (k, x) in configs.iter().enumerate() {
        let n = x.len();
        let nf = n as f64;
        let p = params_for(k, n)?;

        let g = grad_h(x)?;
        grad = grad.max(rel_err(grad_norm_sq(x)?, g.norm_sq(), 0.0));

        let total = generator_h(x, &p)?;
        let parts = generator_h_v(x, &p)? + generator_h_w(x, &p)?;
        split = split.max(rel_err(total, parts, 0.0));

        let lv = generator_h_v(x, &p)?;
        let theta = nf / p.beta + (nf - 1.0) / (2.0 * nf);
        let rate = 4.0 * p.alpha / nf;
        let closed = -rate * (energy_v(x) - theta);
        eigen = eigen.max(rel_err(lv, closed, rate * theta));

        let fd = apply_generator(&h_v, x, &p, 1e-4)?;
        gen_fd = gen_fd.max(rel_err(fd, lv, 4.0 * p.alpha / p.beta));

        let step = (5e-3 * x.min_gap()).min(1e-3);
        lap = lap.max((fd_laplacian4(&energy_f, x, step)? - 4.0).abs());
    }
    let detail = format!("{} configurations, N in {{2,3,8,16}}", configs.len());
    report.checks.push(CheckOutcome::at_most("grad_norm_sq_rel", grad, 1e-10, detail.clone()));
    report.checks.push(CheckOutcome::at_most("generator_split_rel", split, 1e-10, detail.clone()));
    report.checks.push(CheckOutcome::at_most("eigenvector_rel", eigen, 1e-10, detail.clone()));
    report.checks.push(CheckOutcome::at_most("fd_generator_h_v_rel", gen_fd, 1e-5, "fd_step 1e-4".into()));
    report.checks.push(CheckOutcome::at_most(
        "fd_laplacian_abs",
        lap,
        1e-4,
        "five-point stencil, step min(1e-3, 5e-3 min_gap)".into(),
    ));
    Ok(report)
}

/// Largest violation of the truncated-exponential tail bound over the grid
/// `|z| in [0, 2] \ (0.95, 1.05)`, 41 radii by 16 angles, as `lhs / rhs - 1`.
pub fn tail_bound_worst_violation(n: usize) -> Result<f64> {
    let nf = n as f64;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=40 {
        let a = 2.0 * i as f64 / 40.0;
        if a > 0.95 && a < 1.05 {
            continue;
        }
        for k in 0..16 {
            let z = Complex64::from_polar(a, 2.0 * PI * k as f64 / 16.0);
            let w = z * nf;
            let lhs = if a <= 1.0 { exp_series_tail(n, w).norm() } else { trunc_exp(n, w)?.norm() };
            let rhs = trunc_exp_tail_bound(n, z)?;
            let v = if rhs > 0.0 {
                lhs / rhs - 1.0
            } else if lhs > 0.0 {
                f64::INFINITY
            } else {
                -1.0
            };
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

/// Inequalities: interaction sum, energy lower bound, gradient coercivity
/// and the truncated-exponential tail bound.
pub fn inequalities(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut report = CriterionReport::new(2, "inequality suite");
    let configs = random_configs(cfg.seed.wrapping_add(1), cfg.n_configs, &[2, 3, 5, 8, 16])?;
    let (mut s_min, mut energy_gap, mut coercive_gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for x in &configs {
        s_min = s_min.min(interaction_sum(x)?);
        energy_gap = energy_gap.min(energy(x)? - energy_lower_bound(x));
        coercive_gap = coercive_gap.min(grad_norm_sq(x)? - grad_coercivity_bound(x)?);
    }
    let mut rng = stream(cfg.seed.wrapping_add(2), STREAM_CONFIGS);
    let mut collinear_max = 0.0f64;
    for k in 0..cfg.n_configs {
        let x = collinear_configuration(2 + k % 15, &mut rng)?;
        collinear_max = collinear_max.max(interaction_sum(&x)?.abs());
    }
    let detail = format!("{} configurations", configs.len());
    report.checks.push(CheckOutcome::at_least("interaction_sum_min", s_min, -1e-12, detail.clone()));
    report.checks.push(CheckOutcome::at_most(
        "collinear_interaction_sum_abs",
        collinear_max,
        1e-9,
        format!("{} collinear configurations", cfg.n_configs),
    ));
    report.checks.push(CheckOutcome::at_least("energy_minus_lower_bound_min", energy_gap, 0.0, detail.clone()));
    report.checks.push(CheckOutcome::at_least("coercivity_gap_min", coercive_gap, -1e-10, detail));
    for n in [8usize, 32] {
        let v = tail_bound_worst_violation(n)?;
        report.checks.push(CheckOutcome::at_most(
            &format!("tail_bound_violation_n{n}"),
            v,
            1e-12,
            "relative excess of lhs over r_N".into(),
        ));
    }
    Ok(report)
}

/// Points on a random line through a random offset, gaps at least `1e-3`.
pub fn collinear_configuration(n: usize, rng: &mut StreamRng) -> Result<Configuration> {
    let angle: f64 = rng.random_range(0.0..2.0 * PI);
    let dir = Point2::new(angle.cos(), angle.sin());
    let offset = Point2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    loop {
        let mut ts: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        ts.sort_by(f64::total_cmp);
        if ts.windows(2).all(|w| w[1] - w[0] >= 1e-3) {
            return Configuration::new(ts.iter().map(|&t| offset + dir * t).collect());
        }
    }
}

/// Ensemble of the mean-evolution experiment: `N = 16`, `beta = N^2`,
/// `alpha = N`, `dt = 1e-3`, from a fixed configuration with `H_V = 1`,
/// recorded every `0.25` up to `t = 1`.
pub fn second_moment_ensemble(cfg: &SuiteConfig) -> Result<(ModelParams, Vec<PathRecord>)> {
    let params = ModelParams::ginibre(16)?;
    let mut rng = stream(cfg.seed, STREAM_INITIAL);
    let x0 = rescale_to_h_v(&gaussian_configuration(16, 1e-6, &mut rng)?, 1.0)?;
    let sim = SimConfig { dt: 1e-3, t_end: 1.0, record_every: 250, seed: cfg.seed, ..SimConfig::default() };
    Ok((params, simulate_ensemble(&x0, &sim, &params, cfg.mean_paths)?))
}

pub fn second_moment_mean(params: &ModelParams, records: &[PathRecord]) -> Result<CriterionReport> {
    let mut report = CriterionReport::new(3, "second-moment mean evolution");
    let h0 = records[0].h_v[0];
    for &t in &[0.25, 0.5, 1.0] {
        let k = records[0].times.iter().position(|&s| (s - t).abs() < 1e-9).expect("recorded time");
        let sample = Sample1D::new(records.iter().map(|r| r.h_v[k]).collect())?;
        let expect = mean_h_v(t, h0, params);
        let se = sample.standard_error();
        let z = (sample.mean() - expect).abs() / se;
        report.checks.push(CheckOutcome::at_most(
            &format!("z_score_t{t}"),
            z,
            4.0,
            format!("mean {:.6} vs {:.6}, se {:.2e}, {} paths", sample.mean(), expect, se, records.len()),
        ));
    }
    Ok(report)
}

pub fn h_w_bound(params: &ModelParams, records: &[PathRecord]) -> Result<CriterionReport> {
    let mut report = CriterionReport::new(9, "interaction energy bound");
    let eta = eta_bound_check(records, params)?;
    let worst =
        eta.rows.iter().map(|r| (r.eta_hat - r.bound) / r.se.max(f64::MIN_POSITIVE)).fold(f64::NEG_INFINITY, f64::max);
    report.checks.push(CheckOutcome::at_most(
        "violations",
        eta.violations() as f64,
        0.0,
        format!("eta(0) = {:.6}, worst (eta - bound)/se = {:.3}", eta.eta0, worst),
    ));
    Ok(report)
}

/// Ensemble of the stationary experiment: `N = 8`, `beta = N^2`, `alpha = N`,
/// `dt = 1e-3`, up to `t = 6`.
pub fn stationary_ensemble(cfg: &SuiteConfig) -> Result<(ModelParams, Vec<PathRecord>)> {
    let params = ModelParams::ginibre(8)?;
    let mut rng = stream(cfg.seed.wrapping_add(4), STREAM_INITIAL);
    let x0 = rescale_to_h_v(&gaussian_configuration(8, 1e-6, &mut rng)?, 1.0)?;
    let sim =
        SimConfig { dt: 1e-3, t_end: 6.0, record_every: 1000, seed: cfg.seed.wrapping_add(4), ..SimConfig::default() };
    Ok((params, simulate_ensemble(&x0, &sim, &params, cfg.stationary_paths)?))
}

pub fn stationary_gamma(cfg: &SuiteConfig, params: &ModelParams, records: &[PathRecord]) -> Result<CriterionReport> {
    let mut report = CriterionReport::new(4, "stationary Gamma law");
    let law = GammaLaw::from_model(params);
    let cir = cir_from_model(params);
    let t = *records[0].times.last().expect("nonempty record");
    let end = Sample1D::new(records.iter().map(|r| *r.h_v.last().expect("nonempty record")).collect())?;
    let ks = ks_statistic(&end, |r| gamma_cdf(&law, r.max(0.0)).unwrap_or(0.0));
    report.checks.push(CheckOutcome::at_most("ks", ks, 0.05, format!("{} end states at t = {t}", end.len())));

    let r0 = records[0].h_v[0];
    let mut rng = stream(cfg.seed, STREAM_CIR);
    let exact: Vec<f64> = (0..end.len()).map(|_| sample_cir_exact(r0, t, &cir, &mut rng)).collect::<Result<_>>()?;
    let w1 = w1_empirical(&end, &Sample1D::new(exact)?)?;
    report.checks.push(CheckOutcome::at_most("w1_vs_exact_cir", w1, 0.01 * cir.theta, "tolerance 0.01 theta".into()));
    Ok(report)
}

pub fn cir_contraction(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut report = CriterionReport::new(5, "CIR pathwise contraction");
    let cir = cir_from_model(&ModelParams::new(4, 4.0, 4.0)?);
    let mut rng = stream(cfg.seed, STREAM_CIR + 1);
    let r = coupled_contraction_test(2.0, 0.5, 1.0, &cir, cfg.coupled_pairs, cfg.coupled_dt, &mut rng)?;
    report.checks.push(CheckOutcome::at_most(
        "mean_gap",
        r.mean_gap,
        r.bound + 3.0 * r.se + r.allowance,
        format!("bound {:.6}, se {:.2e}, allowance {:.2e}, {} pairs", r.bound, r.se, r.allowance, cfg.coupled_pairs),
    ));
    Ok(report)
}

/// Equal-width radial bins on `[0, 1 + 8/sqrt(N)]` with their exact
/// probabilities under the one-point marginal.
pub fn radial_bins(n: usize, bins: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let r_max = 1.0 + 8.0 / (n as f64).sqrt();
    let edges: Vec<f64> = (0..=bins).map(|k| r_max * k as f64 / bins as f64).collect();
    let cdf: Vec<f64> = edges.iter().map(|&r| marginal1_radial_cdf(n, r)).collect::<Result<_>>()?;
    let probs = cdf.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((edges, probs))
}

fn chi_square_check(name: &str, hist: &RadialHistogram, probs: &[f64]) -> Result<CheckOutcome> {
    let res = chi_square_test(hist, probs)?;
    Ok(CheckOutcome::at_least(
        name,
        res.p_value,
        0.01,
        format!("chi2 = {:.3}, df = {}, {} points", res.statistic, res.df, hist.total),
    ))
}

pub fn ginibre_marginal(
    cfg: &SuiteConfig,
    stationary: Option<(&ModelParams, &[PathRecord])>,
) -> Result<CriterionReport> {
    let mut report = CriterionReport::new(6, "one-point marginal agreement");
    let n = 64;
    let mut rng = stream(cfg.seed, STREAM_MARGINAL);
    let draws: Vec<Point2> = (0..cfg.marginal_draws).map(|_| sample_marginal1(n, &mut rng)).collect::<Result<_>>()?;
    let m2 = Sample1D::new(draws.iter().map(|p| p.norm_sq()).collect())?;
    let z = (m2.mean() - marginal1_second_moment(n)).abs() / m2.standard_error();
    report.checks.push(CheckOutcome::at_most("second_moment_z", z, 3.0, format!("mean {:.6} vs 65/128", m2.mean())));

    let (edges, probs) = radial_bins(n, 50)?;
    report.checks.push(chi_square_check("sampler_chi2_p", &radial_histogram(&draws, &edges)?, &probs)?);

    if let Some((params, records)) = stationary {
        let pooled: Vec<Point2> = records.iter().flat_map(|r| r.final_state.points().iter().copied()).collect();
        let (edges, probs) = radial_bins(params.n, 50)?;
        report.checks.push(chi_square_check("equilibrium_chi2_p", &radial_histogram(&pooled, &edges)?, &probs)?);
    }
    Ok(report)
}

/// Points of the lattice `0.1 Z^2` inside the closed disc of radius `0.7`.
fn chaos_grid() -> Vec<Complex64> {
    let mut pts = Vec::new();
    for i in -7i32..=7 {
        for j in -7i32..=7 {
            let z = Complex64::new(0.1 * i as f64, 0.1 * j as f64);
            if z.norm() <= 0.7 + 1e-12 {
                pts.push(z);
            }
        }
    }
    pts
}

/// `sup |Delta_N|` over pairs of grid points at distance at least `0.2`.
pub fn chaos_sup(n: usize) -> Result<f64> {
    let grid = chaos_grid();
    let sups: Vec<f64> = grid
        .par_iter()
        .map(|&a| {
            let mut s = 0.0f64;
            for &b in &grid {
                if (a - b).norm() >= 0.2 - 1e-12 {
                    s = s.max(delta2(n, a, b)?.abs());
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(sups.into_iter().fold(0.0, f64::max))
}

pub fn chaoticity_decay() -> Result<CriterionReport> {
    let mut report = CriterionReport::new(7, "chaoticity decay");
    let ns = [16usize, 32, 64];
    let sups: Vec<f64> = ns.iter().map(|&n| chaos_sup(n)).collect::<Result<_>>()?;
    for (&n, &s) in ns.iter().zip(&sups) {
        let bound = 2.0 / ((n as f64 - 1.0) * PI * PI);
        report.checks.push(CheckOutcome::at_most(&format!("sup_delta_n{n}"), s, bound, "bound 2/((N-1) pi^2)".into()));
    }
    let steps = sups.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    report.checks.push(CheckOutcome {
        name: "strictly_decreasing".into(),
        passed: steps < 0.0,
        value: steps,
        tolerance: 0.0,
        detail: format!("sups {sups:?}"),
    });
    Ok(report)
}

pub fn non_explosion(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut report = CriterionReport::new(8, "non-explosion");
    for (name, params) in [("ginibre", ModelParams::ginibre(8)?), ("crossover", ModelParams::crossover(8)?)] {
        let results: Vec<(usize, usize, f64)> = (0..cfg.nonexplosion_seeds as u64)
            .into_par_iter()
            .map(|s| {
                let mut rng = stream(cfg.seed.wrapping_add(s), STREAM_INITIAL + 1);
                let x0 = gaussian_configuration(8, 1e-6, &mut rng)?;
                let sim = SimConfig {
                    dt: 1e-3,
                    t_end: 5.0,
                    record_every: 10,
                    seed: cfg.seed.wrapping_add(s),
                    ..SimConfig::default()
                };
                let mut path_rng = stream(sim.seed, 0);
                let rec = simulate_with_rng(&x0, &sim, &params, &mut path_rng)?;
                let gap = rec.min_gap.iter().copied().fold(f64::INFINITY, f64::min);
                Ok((rec.count(GuardKind::HalvingExhausted), rec.count(GuardKind::GapFloor), gap))
            })
            .collect::<Result<_>>()?;
        let exhausted: usize = results.iter().map(|r| r.0).sum();
        let refined: usize = results.iter().map(|r| r.1).sum();
        let gap = results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
        let seeds = results.len();
        report.checks.push(CheckOutcome::at_most(
            &format!("{name}_halving_exhausted"),
            exhausted as f64,
            0.0,
            format!("{seeds} seeds, {refined} refined steps"),
        ));
        report.checks.push(CheckOutcome {
            name: format!("{name}_min_gap"),
            passed: gap > 0.0,
            value: gap,
            tolerance: 0.0,
            detail: "smallest recorded gap, must be > 0".into(),
        });
    }
    Ok(report)
}

pub fn poincare_ratio(cfg: &SuiteConfig) -> Result<CriterionReport> {
    let mut report = CriterionReport::new(10, "Poincare ratio boundedness");
    let ns = [4usize, 16, 64];
    let mut re_ratios = Vec::new();
    let mut sq_ratios = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        let mut rng = stream(cfg.seed, STREAM_RAYLEIGH + k as u64);
        let re = poincare_rayleigh(n, |z| z.x, |_| Point2::new(1.0, 0.0), cfg.rayleigh_draws, &mut rng)?;
        let sq = poincare_rayleigh(n, |z| z.norm_sq(), |z| z * 2.0, cfg.rayleigh_draws, &mut rng)?;
        let expect = (n as f64 + 1.0) / (4.0 * n as f64);
        report.checks.push(CheckOutcome::at_most(
            &format!("re_z_score_n{n}"),
            (re.ratio - expect).abs() / re.se,
            3.0,
            format!("ratio {:.6} vs (N+1)/(4N) = {:.6}", re.ratio, expect),
        ));
        re_ratios.push(re.ratio);
        sq_ratios.push(sq.ratio);
    }
    for (name, ratios) in [("re_z", &re_ratios), ("abs_z_sq", &sq_ratios)] {
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        report.checks.push(CheckOutcome::at_most(
            &format!("{name}_spread"),
            hi / lo,
            2.0,
            format!("ratios {ratios:?} for N = {ns:?}"),
        ));
    }
    Ok(report)
}

/// Runs every criterion, or only the deterministic closed-form ones when
/// `quick` is set.
pub fn run_suite(cfg: &SuiteConfig, quick: bool) -> Result<Vec<CriterionReport>> {
    let mut out = vec![closed_form_identities(cfg)?, inequalities(cfg)?];
    if quick {
        return Ok(out);
    }
    let (p3, mean_records) = second_moment_ensemble(cfg)?;
    out.push(second_moment_mean(&p3, &mean_records)?);
    let (p4, stat_records) = stationary_ensemble(cfg)?;
    out.push(stationary_gamma(cfg, &p4, &stat_records)?);
    out.push(cir_contraction(cfg)?);
    out.push(ginibre_marginal(cfg, Some((&p4, &stat_records)))?);
    out.push(chaoticity_decay()?);
    out.push(non_explosion(cfg)?);
    out.push(h_w_bound(&p3, &mean_records)?);
    out.push(poincare_ratio(cfg)?);
    Ok(out)
}
