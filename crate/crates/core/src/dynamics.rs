//! Euler-Maruyama integration of the particle system.
//!
//! Each base step of size `dt` proposes
//! `x + sqrt(2 alpha/beta) sqrt(h) xi + h b(x)` and accepts it when the new
//! minimal gap exceeds the collision floor `sqrt(h 2 alpha/beta)`, the size of
//! one Brownian increment. A rejected step is replaced by two half steps with
//! fresh Gaussian increments, recursively, up to `max_halvings` levels. Past
//! that depth the step is taken with the drift regularized at radius equal to
//! the floor. Refinements and fallbacks are logged as guard events.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{energy_v, energy_w, Configuration, GradientField, ModelParams, Point2};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record observables every this many accepted base steps.
    pub record_every: usize,
    /// Drift regularization radius; 0 keeps the exact singular drift.
    pub epsilon: f64,
    pub max_halvings: u32,
    /// A radius-cap guard event is logged whenever a particle leaves this disc.
    pub guard_radius: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1e-3, t_end: 1.0, record_every: 1, epsilon: 0.0, max_halvings: 16, guard_radius: 1e3, seed: 0 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParam(format!("dt must be finite and > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidParam(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParam("record_every must be >= 1".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParam(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        if !(self.guard_radius > 0.0) {
            return Err(Error::InvalidParam("guard_radius must be > 0".into()));
        }
        Ok(())
    }

    /// Number of base steps; the last one is shortened to land on `t_end`.
    pub fn n_steps(&self) -> usize {
        let r = self.t_end / self.dt;
        let k = r.round();
        if (r - k).abs() <= 1e-9 * r.max(1.0) {
            k as usize
        } else {
            r.ceil() as usize
        }
    }

    fn time_of(&self, step: usize) -> f64 {
        if step >= self.n_steps() {
            self.t_end
        } else {
            step as f64 * self.dt
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardKind {
    /// A base step was refined because a proposal fell below the collision floor.
    GapFloor,
    /// A particle left the disc of radius `guard_radius`.
    RadiusCap,
    /// Refinement hit `max_halvings`; the step used the regularized drift.
    HalvingExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardEvent {
    pub time: f64,
    pub kind: GuardKind,
}

/// Observables along one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub times: Vec<f64>,
    pub h_v: Vec<f64>,
    pub h_w: Vec<f64>,
    pub min_gap: Vec<f64>,
    pub guard_events: Vec<GuardEvent>,
    pub final_state: Configuration,
}

impl PathRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn count(&self, kind: GuardKind) -> usize {
        self.guard_events.iter().filter(|e| e.kind == kind).count()
    }

    fn push(&mut self, t: f64, cfg: &Configuration) -> Result<()> {
        self.times.push(t);
        self.h_v.push(energy_v(cfg));
        self.h_w.push(energy_w(cfg)?);
        self.min_gap.push(cfg.min_gap());
        Ok(())
    }
}

/// Drift of the particle system, written term by term:
/// `-2 (alpha/N) x_i - 2 (alpha/N^2) sum_{j != i} (x_j - x_i)/|x_i - x_j|^2`.
pub fn drift(cfg: &Configuration, params: &ModelParams) -> Result<GradientField> {
    check_len(cfg, params)?;
    let mut out = vec![Point2::ZERO; cfg.len()];
    drift_into(cfg.points(), params, 0.0, &mut out)?;
    Ok(GradientField { components: out })
}

/// Drift with `W` replaced inside radius `epsilon` by a kernel whose pair
/// force grows linearly, `2r/epsilon^2`, from zero at the origin up to the
/// exact value `2/epsilon` at `r = epsilon`. Outside the ball the drift is
/// unchanged.
pub fn drift_regularized(cfg: &Configuration, params: &ModelParams, epsilon: f64) -> Result<GradientField> {
    check_len(cfg, params)?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParam(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    let mut out = vec![Point2::ZERO; cfg.len()];
    drift_into(cfg.points(), params, epsilon, &mut out)?;
    Ok(GradientField { components: out })
}

fn check_len(cfg: &Configuration, params: &ModelParams) -> Result<()> {
    if cfg.len() != params.n {
        return Err(Error::SizeMismatch { expected: params.n, got: cfg.len() });
    }
    Ok(())
}

fn drift_into(pts: &[Point2], params: &ModelParams, epsilon: f64, out: &mut [Point2]) -> Result<()> {
    let n = pts.len() as f64;
    let conf = 2.0 * params.alpha / n;
    let rep = 2.0 * params.alpha / (n * n);
    let eps2 = epsilon * epsilon;
    for i in 0..pts.len() {
        let mut pair = Point2::ZERO;
        for j in 0..pts.len() {
            if i == j {
                continue;
            }
            let d = pts[j] - pts[i];
            let r2 = d.norm_sq();
            if r2 >= eps2 && r2 > 0.0 {
                pair += d * (1.0 / r2);
            } else if epsilon > 0.0 {
                pair += d * (1.0 / eps2);
            } else {
                return Err(Error::Coincident { i: i.min(j), j: i.max(j) });
            }
        }
        out[i] = pts[i] * (-conf) - pair * rep;
    }
    Ok(())
}

/// One Euler-Maruyama step `x + sqrt(2 alpha/beta) noise + dt b(x)`.
///
/// `noise` must already carry the `sqrt(dt)` scaling. A result with two
/// coincident particles is reported as [`Error::Coincident`] so that the
/// caller can reject the step.
pub fn step_em(cfg: &Configuration, dt: f64, params: &ModelParams, noise: &GradientField) -> Result<Configuration> {
    if noise.len() != cfg.len() {
        return Err(Error::SizeMismatch { expected: cfg.len(), got: noise.len() });
    }
    let b = drift(cfg, params)?;
    let s = params.noise_scale();
    let pts = cfg
        .points()
        .iter()
        .zip(&noise.components)
        .zip(&b.components)
        .map(|((&x, &xi), &bi)| x + xi * s + bi * dt)
        .collect();
    Configuration::new(pts)
}

/// Minimal gap below which a step of size `h` is refined.
pub fn collision_floor(h: f64, params: &ModelParams) -> f64 {
    (h * 2.0 * params.alpha / params.beta).sqrt()
}

struct Stepper<'a> {
    params: &'a ModelParams,
    sim: &'a SimConfig,
    noise: Vec<Point2>,
    drift: Vec<Point2>,
    proposal: Vec<Point2>,
    refined: bool,
    exhausted: bool,
}

impl<'a> Stepper<'a> {
    fn new(params: &'a ModelParams, sim: &'a SimConfig) -> Self {
        let n = params.n;
        Stepper {
            params,
            sim,
            noise: vec![Point2::ZERO; n],
            drift: vec![Point2::ZERO; n],
            proposal: vec![Point2::ZERO; n],
            refined: false,
            exhausted: false,
        }
    }

    fn propose(&mut self, state: &[Point2], h: f64, epsilon: f64) -> Result<()> {
        drift_into(state, self.params, epsilon, &mut self.drift)?;
        let s = self.params.noise_scale();
        for (k, &x) in state.iter().enumerate() {
            self.proposal[k] = x + self.noise[k] * s + self.drift[k] * h;
        }
        Ok(())
    }

    fn advance(&mut self, state: &mut Vec<Point2>, h: f64, depth: u32, rng: &mut StreamRng, t: f64) -> Result<()> {
        let sqrt_h = h.sqrt();
        for xi in self.noise.iter_mut() {
            let gx: f64 = rng.sample(StandardNormal);
            let gy: f64 = rng.sample(StandardNormal);
            *xi = Point2::new(gx * sqrt_h, gy * sqrt_h);
        }
        self.propose(state, h, self.sim.epsilon)?;
        if let Some(index) = self.proposal.iter().position(|p| !p.is_finite()) {
            return Err(Error::BlowUp { time: t, detail: format!("particle {index} became non-finite") });
        }
        let floor = collision_floor(h, self.params);
        if min_gap_of(&self.proposal) > floor {
            state.copy_from_slice(&self.proposal);
            return Ok(());
        }
        if depth < self.sim.max_halvings {
            self.refined = true;
            self.advance(state, 0.5 * h, depth + 1, rng, t)?;
            return self.advance(state, 0.5 * h, depth + 1, rng, t);
        }
        self.exhausted = true;
        let eps = floor.max(self.sim.epsilon);
        loop {
            self.propose(state, h, eps)?;
            if min_gap_of(&self.proposal) > 0.0 {
                state.copy_from_slice(&self.proposal);
                return Ok(());
            }
            for xi in self.noise.iter_mut() {
                let gx: f64 = rng.sample(StandardNormal);
                let gy: f64 = rng.sample(StandardNormal);
                *xi = Point2::new(gx * sqrt_h, gy * sqrt_h);
            }
        }
    }
}

fn min_gap_of(pts: &[Point2]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            best = best.min((pts[i] - pts[j]).norm_sq());
        }
    }
    best.sqrt()
}

/// Simulates one path on the stream `(sim.seed, 0)`.
pub fn simulate(initial: &Configuration, sim: &SimConfig, params: &ModelParams) -> Result<PathRecord> {
    let mut rng = rng::stream(sim.seed, 0);
    simulate_with_rng(initial, sim, params, &mut rng)
}

pub fn simulate_with_rng(
    initial: &Configuration,
    sim: &SimConfig,
    params: &ModelParams,
    rng: &mut StreamRng,
) -> Result<PathRecord> {
    sim.validate()?;
    check_len(initial, params)?;
    initial.check_domain()?;

    let n_steps = sim.n_steps();
    let mut record = PathRecord {
        times: Vec::with_capacity(n_steps / sim.record_every + 1),
        h_v: Vec::new(),
        h_w: Vec::new(),
        min_gap: Vec::new(),
        guard_events: Vec::new(),
        final_state: initial.clone(),
    };
    record.push(0.0, initial)?;

    let mut state = initial.points().to_vec();
    let mut stepper = Stepper::new(params, sim);
    for step in 0..n_steps {
        let t0 = sim.time_of(step);
        let t1 = sim.time_of(step + 1);
        stepper.refined = false;
        stepper.exhausted = false;
        stepper.advance(&mut state, t1 - t0, 0, rng, t0)?;
        if stepper.refined {
            record.guard_events.push(GuardEvent { time: t1, kind: GuardKind::GapFloor });
        }
        if stepper.exhausted {
            record.guard_events.push(GuardEvent { time: t1, kind: GuardKind::HalvingExhausted });
        }
        if state.iter().any(|p| p.norm() > sim.guard_radius) {
            record.guard_events.push(GuardEvent { time: t1, kind: GuardKind::RadiusCap });
        }
        if (step + 1) % sim.record_every == 0 {
            let cfg = Configuration::new(state.clone())?;
            record.push(t1, &cfg)?;
        }
    }
    record.final_state = Configuration::new(state)?;
    Ok(record)
}

/// Runs `n_paths` independent paths; path `p` uses the stream `(sim.seed, p)`,
/// so the output does not depend on how the work is scheduled.
pub fn simulate_ensemble(
    initial: &Configuration,
    sim: &SimConfig,
    params: &ModelParams,
    n_paths: usize,
) -> Result<Vec<PathRecord>> {
    if n_paths == 0 {
        return Err(Error::InvalidParam("n_paths must be >= 1".into()));
    }
    sim.validate()?;
    (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = rng::stream(sim.seed, p as u64);
            simulate_with_rng(initial, sim, params, &mut rng)
        })
        .collect()
}

/// Standard Gaussian points, redrawn until every gap is at least `min_gap`.
pub fn gaussian_configuration<R: Rng + ?Sized>(n: usize, min_gap: f64, rng: &mut R) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::InvalidParam("n must be >= 1".into()));
    }
    loop {
        let pts: Vec<Point2> =
            (0..n).map(|_| Point2::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        if min_gap_of(&pts) >= min_gap {
            return Configuration::new(pts);
        }
    }
}

/// Rescales a configuration about the origin so that `H_V` equals `target`.
pub fn rescale_to_h_v(cfg: &Configuration, target: f64) -> Result<Configuration> {
    let hv = energy_v(cfg);
    if !(hv > 0.0) || !(target > 0.0) {
        return Err(Error::InvalidParam("rescaling needs positive H_V and target".into()));
    }
    let s = (target / hv).sqrt();
    Configuration::new(cfg.points().iter().map(|&p| p * s).collect())
}

/// One row of [`EtaReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRow {
    pub t: f64,
    pub eta_hat: f64,
    pub se: f64,
    pub bound: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub eta0: f64,
    /// `max(eta(0), log(N/2))`, the time-uniform form of the bound.
    pub uniform_bound: f64,
    pub rows: Vec<EtaRow>,
}

impl EtaReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.flagged).count()
    }
}

/// Compares `eta(t) = (2N/(N-1)) E[H_W(X_t)]` estimated from an ensemble
/// with the bound `-log(exp(-eta(0) - 4 alpha t/N) + (2/N)(1 - exp(-4 alpha t/N)))`.
/// A time is flagged when the estimate exceeds the bound by more than three
/// standard errors.
pub fn eta_bound_check(records: &[PathRecord], params: &ModelParams) -> Result<EtaReport> {
    let first = records.first().ok_or_else(|| Error::InvalidParam("empty ensemble".into()))?;
    if params.n < 2 {
        return Err(Error::InvalidParam("eta_bound_check needs n >= 2".into()));
    }
    let len = first.len();
    if records.iter().any(|r| r.len() != len || r.h_w[0] != first.h_w[0]) {
        return Err(Error::InvalidParam("ensemble paths must share the initial state and sampling times".into()));
    }
    let n = params.n as f64;
    let scale = 2.0 * n / (n - 1.0);
    let eta0 = scale * first.h_w[0];
    let rate = params.relaxation_rate();
    let m = records.len() as f64;
    let rows = (1..len)
        .map(|k| {
            let t = first.times[k];
            let mean = records.iter().map(|r| r.h_w[k]).sum::<f64>() / m;
            let var = if records.len() > 1 {
                records.iter().map(|r| (r.h_w[k] - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            let eta_hat = scale * mean;
            let se = scale * (var / m).sqrt();
            let decay = (-rate * t).exp();
            let bound = -((-eta0).exp() * decay + 2.0 / n * (1.0 - decay)).ln();
            EtaRow { t, eta_hat, se, bound, flagged: eta_hat > bound + 3.0 * se }
        })
        .collect();
    Ok(EtaReport { eta0, uniform_bound: eta0.max((n / 2.0).ln()), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::grad_h;

    fn pair() -> Configuration {
        Configuration::from_xy(&[(1.0, 0.0), (-1.0, 0.0)]).unwrap()
    }

    #[test]
    fn drift_examples() {
        let p1 = ModelParams::new(1, 1.5, 1.0).unwrap();
        let one = Configuration::from_xy(&[(0.4, -2.0)]).unwrap();
        let b1 = drift(&one, &p1).unwrap().components[0];
        assert!((b1 - Point2::new(-1.2, 6.0)).norm() < 1e-15);

        let p2 = ModelParams::new(2, 1.0, 1.0).unwrap();
        let b = drift(&pair(), &p2).unwrap();
        assert!((b.components[0].x + 0.75).abs() < 1e-15);
        assert!((b.components[1].x - 0.75).abs() < 1e-15);
        let g = grad_h(&pair()).unwrap().scaled(-1.0);
        assert!(b.max_abs_diff(&g) < 1e-15);
    }

    #[test]
    fn regularized_drift_matches_outside_and_vanishes_at_coincidence() {
        let p = ModelParams::new(3, 2.0, 3.0).unwrap();
        let cfg = Configuration::from_xy(&[(0.0, 0.0), (0.5, 0.1), (-0.3, 0.8)]).unwrap();
        let exact = drift(&cfg, &p).unwrap();
        let reg = drift_regularized(&cfg, &p, 0.1).unwrap();
        assert_eq!(exact, reg);

        let coincident = Configuration::new_allow_coincident(vec![
            Point2::new(0.2, 0.2),
            Point2::new(0.2, 0.2),
            Point2::new(0.0, 0.0),
        ])
        .unwrap();
        let without_pair = {
            // confinement plus the third particle's force only
            let b = drift_regularized(&coincident, &p, 0.05).unwrap();
            b.components[0]
        };
        let x0 = Point2::new(0.2, 0.2);
        let d = Point2::ZERO - x0;
        let expect = x0 * (-2.0 * 2.0 / 3.0) - d * (1.0 / d.norm_sq()) * (2.0 * 2.0 / 9.0);
        assert!((without_pair - expect).norm() < 1e-14);
        assert!(drift_regularized(&coincident, &p, 0.0).is_err());
    }

    #[test]
    fn regularized_branches_meet_at_the_seam() {
        let p = ModelParams::new(2, 1.0, 1.0).unwrap();
        let eps = 0.25;
        let just_inside = Configuration::from_xy(&[(0.0, 0.0), (eps * (1.0 - 1e-13), 0.0)]).unwrap();
        let r = drift_regularized(&just_inside, &p, eps).unwrap();
        let o = drift(&just_inside, &p).unwrap();
        assert!(r.max_abs_diff(&o) < 1e-11);
        // inside the ball the pair force is linear in the separation
        let half = Configuration::from_xy(&[(0.0, 0.0), (0.5 * eps, 0.0)]).unwrap();
        let bh = drift_regularized(&half, &p, eps).unwrap();
        assert!((bh.components[0].x - 0.5 * r.components[0].x).abs() < 1e-12);
    }

    #[test]
    fn step_em_identity_and_deterministic_step() {
        let p = ModelParams::new(2, 1.0, 2.0).unwrap();
        let zero = GradientField::zeros(2);
        assert_eq!(step_em(&pair(), 0.0, &p, &zero).unwrap(), pair());
        let next = step_em(&pair(), 0.1, &p, &zero).unwrap();
        assert!((next.points()[0].x - (1.0 - 0.075)).abs() < 1e-15);
    }

    #[test]
    fn step_em_reports_collision() {
        let p = ModelParams::new(2, 1.0, 2.0).unwrap();
        let noise = GradientField { components: vec![Point2::new(-0.5, 0.0), Point2::new(0.5, 0.0)] };
        let cfg = Configuration::from_xy(&[(0.5, 0.0), (-0.5, 0.0)]).unwrap();
        // sqrt(2 alpha / beta) = 1, drift vanishes by choosing dt = 0
        assert!(matches!(step_em(&cfg, 0.0, &p, &noise), Err(Error::Coincident { .. })));
    }

    #[test]
    fn ornstein_uhlenbeck_mean_decay() {
        let p = ModelParams::new(1, 1.0, 1.0).unwrap();
        let zero = GradientField::zeros(1);
        let mut cfg = Configuration::from_xy(&[(1.0, 0.0)]).unwrap();
        for _ in 0..1000 {
            cfg = step_em(&cfg, 1e-3, &p, &zero).unwrap();
        }
        assert!((cfg.points()[0].norm() - (-2.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn zero_horizon_records_initial_state() {
        let p = ModelParams::ginibre(3).unwrap();
        let cfg = Configuration::from_xy(&[(0.1, 0.0), (0.0, 0.5), (-0.4, -0.2)]).unwrap();
        let sim = SimConfig { t_end: 0.0, ..SimConfig::default() };
        let rec = simulate(&cfg, &sim, &p).unwrap();
        assert_eq!(rec.times, vec![0.0]);
        assert_eq!(rec.h_v, vec![energy_v(&cfg)]);
        assert_eq!(rec.h_w, vec![energy_w(&cfg).unwrap()]);
        assert_eq!(rec.final_state, cfg);
    }

    #[test]
    fn record_stride_and_final_time() {
        let p = ModelParams::ginibre(4).unwrap();
        let mut r = rng::stream(1, 0);
        let cfg = gaussian_configuration(4, 1e-6, &mut r).unwrap();
        let sim = SimConfig { dt: 0.01, t_end: 0.1, record_every: 5, ..SimConfig::default() };
        let rec = simulate(&cfg, &sim, &p).unwrap();
        assert_eq!(rec.times.len(), 3);
        assert!((rec.times[2] - 0.1).abs() < 1e-15);
        assert!(rec.min_gap.iter().all(|&g| g > 0.0));
    }

    #[test]
    fn single_particle_min_gap_is_infinite() {
        let p = ModelParams::new(1, 1.0, 1.0).unwrap();
        let cfg = Configuration::from_xy(&[(0.5, 0.5)]).unwrap();
        let sim = SimConfig { dt: 0.01, t_end: 0.05, ..SimConfig::default() };
        let rec = simulate(&cfg, &sim, &p).unwrap();
        assert!(rec.min_gap.iter().all(|g| g.is_infinite()));
    }

    #[test]
    fn invalid_inputs() {
        let p = ModelParams::ginibre(2).unwrap();
        let bad = SimConfig { dt: 0.0, ..SimConfig::default() };
        assert!(simulate(&pair(), &bad, &p).is_err());
        assert!(simulate_ensemble(&pair(), &SimConfig::default(), &p, 0).is_err());
        let coincident = Configuration::new_allow_coincident(vec![Point2::ZERO, Point2::ZERO]).unwrap();
        assert!(matches!(simulate(&coincident, &SimConfig::default(), &p), Err(Error::Coincident { .. })));
        assert!(eta_bound_check(&[], &p).is_err());
    }

    #[test]
    fn eta_at_time_zero_is_deterministic() {
        let p = ModelParams::ginibre(3).unwrap();
        let cfg = Configuration::from_xy(&[(0.3, 0.0), (0.0, 0.5), (-0.4, -0.2)]).unwrap();
        let sim = SimConfig { dt: 0.01, t_end: 0.05, ..SimConfig::default() };
        let recs = simulate_ensemble(&cfg, &sim, &p, 8).unwrap();
        let rep = eta_bound_check(&recs, &p).unwrap();
        assert_eq!(rep.eta0, 3.0 * energy_w(&cfg).unwrap());
        assert_eq!(rep.rows.len(), 5);
    }
}
