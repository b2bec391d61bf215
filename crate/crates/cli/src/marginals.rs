//! `marginals`: grids of the one- and two-point densities, `Delta_N` and the
//! truncated-exponential tail bound.

use std::f64::consts::PI;

use coulombgas::ginibre::{
    delta2, exp_series_tail, marginal1_density, marginal2_density, trunc_exp, trunc_exp_tail_bound,
};
use coulombgas::suite::{chaos_sup, tail_bound_worst_violation};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::output::{Cell, OutputDir, Table};
use crate::settings::{Defaults, Settings};
use crate::{CliError, Outcome};

pub const DEFAULTS: Defaults = Defaults { n: 8, dt: 1e-3, t_end: 1.0, paths: 1, grid: 40 };

const HALF_WIDTH: f64 = 1.5;

/// `grid + 1` points per axis on `[-1.5, 1.5]`.
pub fn axis(grid: usize) -> Vec<f64> {
    (0..=grid).map(|i| HALF_WIDTH * (2.0 * i as f64 - grid as f64) / grid as f64).collect()
}

/// `|e_N(Nz) - exp(Nz) 1_{|z| <= 1}|`.
fn tail_lhs(n: usize, z: Complex64) -> Result<f64, CliError> {
    let w = z * n as f64;
    Ok(if z.norm() <= 1.0 { exp_series_tail(n, w).norm() } else { trunc_exp(n, w)?.norm() })
}

struct Row {
    n: usize,
    x: f64,
    y: f64,
    phi1: f64,
    phi2: f64,
    delta: f64,
    r_n: f64,
    lhs: f64,
}

pub fn run(s: &Settings, out: Option<&mut OutputDir>) -> Result<Outcome, CliError> {
    let ax = axis(s.grid);
    let anchor = Complex64::new(s.anchor.0, s.anchor.1);
    let mut ns = s.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    if ns[0] < 2 {
        return Err(CliError::Usage("--n-list entries must be >= 2 for pair densities".into()));
    }

    let mut points = Vec::with_capacity(ns.len() * ax.len() * ax.len());
    for &n in &ns {
        for &y in &ax {
            points.extend(ax.iter().map(|&x| (n, x, y)));
        }
    }
    let rows: Vec<Row> = points
        .par_iter()
        .map(|&(n, x, y)| {
            let z = Complex64::new(x, y);
            Ok(Row {
                n,
                x,
                y,
                phi1: marginal1_density(n, z)?,
                phi2: marginal2_density(n, anchor, z)?,
                delta: delta2(n, anchor, z)?,
                r_n: trunc_exp_tail_bound(n, z)?,
                lhs: tail_lhs(n, z)?,
            })
        })
        .collect::<Result<_, CliError>>()?;

    let mut phi1 = Table::new(&["n", "x", "y", "phi1"]);
    let mut phi2 = Table::new(&["n", "x", "y", "phi2"]);
    let mut delta = Table::new(&["n", "x", "y", "delta"]);
    let mut r_n = Table::new(&["n", "x", "y", "r_n", "tail"]);
    for r in &rows {
        let head = [Cell::from(r.n), Cell::from(r.x), Cell::from(r.y)];
        phi1.push([&head[..], &[r.phi1.into()]].concat());
        phi2.push([&head[..], &[r.phi2.into()]].concat());
        delta.push([&head[..], &[r.delta.into()]].concat());
        r_n.push([&head[..], &[r.r_n.into(), r.lhs.into()]].concat());
    }

    let mut per_n = Vec::new();
    let mut sups = Vec::new();
    let mut worst_tail = f64::NEG_INFINITY;
    let mut worst_phi0 = 0.0f64;
    for &n in &ns {
        let sup = chaos_sup(n)?;
        let tail = tail_bound_worst_violation(n)?;
        let phi0 = marginal1_density(n, Complex64::new(0.0, 0.0))?;
        sups.push(sup);
        worst_tail = worst_tail.max(tail);
        worst_phi0 = worst_phi0.max((phi0 - 1.0 / PI).abs());
        per_n.push(json!({
            "n": n,
            "sup_abs_delta": sup,
            "sup_reference": 2.0 / ((n as f64 - 1.0) * PI * PI),
            "tail_bound_worst_violation": tail,
            "phi1_at_zero": phi0,
        }));
    }
    let step = sups.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let checks = [
        ("sup_delta_decreasing", ns.len() < 2 || step < 0.0, step, 0.0),
        ("tail_bound_holds", worst_tail <= 1e-12, worst_tail, 1e-12),
        ("phi1_zero_is_one_over_pi", worst_phi0 <= 1e-12, worst_phi0, 1e-12),
    ];
    let failures: Vec<String> =
        checks.iter().filter(|c| !c.1).map(|c| format!("{}: value {:e}, tolerance {:e}", c.0, c.2, c.3)).collect();
    let flags: serde_json::Map<String, serde_json::Value> =
        checks.iter().map(|c| (c.0.to_string(), json!({ "passed": c.1, "value": c.2, "tolerance": c.3 }))).collect();
    let summary = json!({
        "anchor": [s.anchor.0, s.anchor.1],
        "compact_grid": "|z1|, |z2| <= 0.7, |z1 - z2| >= 0.2, lattice step 0.1",
        "tail_grid": "|z| in [0, 2] minus (0.95, 1.05), 41 radii by 16 angles",
        "per_n": per_n,
        "flags": flags,
        "all_passed": failures.is_empty(),
    });

    if let Some(dir) = out {
        dir.write_table("phi1", &phi1, s.format)?;
        dir.write_table("phi2", &phi2, s.format)?;
        dir.write_table("delta2", &delta, s.format)?;
        dir.write_table("r_n", &r_n, s.format)?;
        dir.write_json("report.json", &summary)?;
    }
    Ok(Outcome { summary, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_contains_zero_for_even_grids() {
        let a = axis(40);
        assert_eq!(a.len(), 41);
        assert_eq!(a[20], 0.0);
        assert_eq!((a[0], a[40]), (-1.5, 1.5));
    }
}
