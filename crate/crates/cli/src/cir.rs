//! `cir`: Euler and exact CIR samples against the mean, the Gamma law and
//! the W1 contraction.

use coulombgas::cir::{cir_em_path, cir_from_model, gamma_cdf, sample_cir_exact, w1_contraction_bound, GammaLaw};
use coulombgas::rng::stream;
use coulombgas::special::gamma_p;
use coulombgas::stats::{ks_critical_1pct, ks_statistic, w1_empirical, w1_vs_gamma, Sample1D};
use coulombgas::ModelParams;
use rayon::prelude::*;
use serde_json::json;

use crate::output::{OutputDir, Table};
use crate::settings::{Defaults, Settings};
use crate::{CliError, Outcome};

pub const DEFAULTS: Defaults = Defaults { n: 8, dt: 1e-3, t_end: 6.0, paths: 2000, grid: 12 };

/// Stream indices of the exact draws and of the noise-floor sample.
const EXACT_STREAMS: u64 = 1 << 40;
const FLOOR_STREAM: u64 = 1 << 41;

/// `E|G - r0|` for `G ~ Gamma(a, b)`.
pub fn w1_point_to_gamma(r0: f64, law: &GammaLaw) -> Result<f64, CliError> {
    let (a, b) = (law.shape, law.rate);
    let below = r0 * gamma_p(a, b * r0)? - (a / b) * gamma_p(a + 1.0, b * r0)?;
    Ok(law.mean() - r0 + 2.0 * below)
}

pub fn run(s: &Settings, out: Option<&mut OutputDir>) -> Result<Outcome, CliError> {
    let params = ModelParams::new(s.n, s.alpha, s.beta)?;
    let cir = cir_from_model(&params);
    let law = GammaLaw::from_model(&params);

    // Rows at k t_end / grid, with the step shrunk so they fall on the grid.
    let rows = if s.t_end > 0.0 { s.grid } else { 0 };
    let per_row = if rows > 0 { (s.t_end / (s.dt * rows as f64)).ceil().max(1.0) as usize } else { 0 };
    let n_steps = rows * per_row;
    let dt = if n_steps > 0 { s.t_end / n_steps as f64 } else { s.dt };
    let times: Vec<f64> = (0..=rows).map(|k| if rows > 0 { s.t_end * k as f64 / rows as f64 } else { 0.0 }).collect();

    let em: Vec<Vec<f64>> = (0..s.paths)
        .into_par_iter()
        .map(|p| cir_em_path(s.r0, dt, n_steps, per_row.max(1), &cir, &mut stream(s.seed, p as u64)))
        .collect();
    let exact: Vec<Vec<f64>> = (0..s.paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream(s.seed, EXACT_STREAMS + p as u64);
            times.iter().map(|&t| if t > 0.0 { sample_cir_exact(s.r0, t, &cir, &mut rng) } else { Ok(s.r0) }).collect()
        })
        .collect::<Result<_, _>>()?;

    let mut floor_rng = stream(s.seed, FLOOR_STREAM);
    let floor_sample = Sample1D::new((0..s.paths).map(|_| law.sample(&mut floor_rng)).collect())?;
    let floor = w1_vs_gamma(&floor_sample, &law)?;
    let w1_0 = w1_point_to_gamma(s.r0, &law)?;
    let scheme_tol = 0.01 * cir.theta;

    let mut table = Table::new(&[
        "t",
        "em_mean",
        "em_se",
        "exact_mean",
        "exact_se",
        "theory_mean",
        "ks_em",
        "ks_exact",
        "w1_em_gamma",
        "w1_exact_gamma",
        "w1_bound",
        "w1_em_exact",
    ]);
    let mut worst_mean_z = 0.0f64;
    let mut worst_decay = f64::NEG_INFINITY;
    // Scheme consistency is checked at t = 1, or at t_end when shorter.
    let t_check = s.t_end.min(1.0);
    let k_check = times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t_check).abs().total_cmp(&(b.1 - t_check).abs()))
        .map_or(0, |(k, _)| k);
    let mut scheme_w1 = 0.0;
    let (mut ks_end, mut ks_exact_end) = (0.0, 0.0);
    for (k, &t) in times.iter().enumerate() {
        let a = Sample1D::new(em.iter().map(|v| v[k]).collect())?;
        let b = Sample1D::new(exact.iter().map(|v| v[k]).collect())?;
        let theory = cir.mean_at(s.r0, t);
        for x in [&a, &b] {
            let d = (x.mean() - theory).abs();
            let se = x.standard_error();
            let z = if d == 0.0 {
                0.0
            } else if se > 0.0 {
                d / se
            } else {
                f64::INFINITY
            };
            worst_mean_z = worst_mean_z.max(z);
        }
        let cdf = |r: f64| gamma_cdf(&law, r).unwrap_or(f64::NAN);
        let ks_a = ks_statistic(&a, cdf);
        let ks_b = ks_statistic(&b, cdf);
        let w_a = w1_vs_gamma(&a, &law)?;
        let w_b = w1_vs_gamma(&b, &law)?;
        let bound = w1_contraction_bound(t, w1_0, &params);
        let w_ab = w1_empirical(&a, &b)?;
        worst_decay = worst_decay.max(w_a - (bound + 2.0 * floor + scheme_tol));
        if k == k_check {
            scheme_w1 = w_ab;
        }
        (ks_end, ks_exact_end) = (ks_a, ks_b);
        table.push(vec![
            t.into(),
            a.mean().into(),
            a.standard_error().into(),
            b.mean().into(),
            b.standard_error().into(),
            theory.into(),
            ks_a.into(),
            ks_b.into(),
            w_a.into(),
            w_b.into(),
            bound.into(),
            w_ab.into(),
        ]);
    }

    let ks_crit = ks_critical_1pct(s.paths);
    let checks = [
        ("means_within_4se", worst_mean_z <= 4.0, worst_mean_z, 4.0),
        ("ks_end", s.t_end == 0.0 || ks_end <= ks_crit, ks_end, ks_crit),
        ("w1_decay", worst_decay <= 0.0, worst_decay, 0.0),
        ("em_exact_w1", scheme_w1 <= scheme_tol, scheme_w1, scheme_tol),
    ];
    let failures: Vec<String> =
        checks.iter().filter(|c| !c.1).map(|c| format!("{}: value {:e}, tolerance {:e}", c.0, c.2, c.3)).collect();
    let flags: serde_json::Map<String, serde_json::Value> =
        checks.iter().map(|c| (c.0.to_string(), json!({ "passed": c.1, "value": c.2, "tolerance": c.3 }))).collect();
    let summary = json!({
        "kappa": cir.kappa,
        "theta": cir.theta,
        "sigma": cir.sigma,
        "feller": cir.feller(),
        "gamma_shape": law.shape,
        "gamma_rate": law.rate,
        "r0": s.r0,
        "dt_used": dt,
        "scheme_check_time": times[k_check],
        "w1_initial": w1_0,
        "w1_noise_floor": floor,
        "ks_exact_end": ks_exact_end,
        "flags": flags,
        "all_passed": failures.is_empty(),
    });

    if let Some(dir) = out {
        dir.write_table("cir_table", &table, s.format)?;
        dir.write_json("summary.json", &summary)?;
    }
    Ok(Outcome { summary, failures })
}
