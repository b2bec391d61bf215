//! Second-moment reduction: the Cox-Ingersoll-Ross process followed by
//! `H_V(X_t)` and its Gamma stationary law.
//!
//! The Gamma law is parametrized by a *rate*: its density is proportional to
//! `r^(shape - 1) exp(-rate r)` with `rate = beta`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::special::{gamma_p, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirParams {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl CirParams {
    pub fn new(kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("theta", theta), ("sigma", sigma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParam(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(CirParams { kappa, theta, sigma })
    }

    /// `2 kappa theta >= sigma^2`: the process started above zero stays there.
    pub fn feller(&self) -> bool {
        self.feller_margin() >= -1e-12 * self.sigma * self.sigma
    }

    pub fn feller_margin(&self) -> f64 {
        2.0 * self.kappa * self.theta - self.sigma * self.sigma
    }

    pub fn mean_at(&self, r0: f64, t: f64) -> f64 {
        let e = (-self.kappa * t).exp();
        r0 * e + self.theta * (1.0 - e)
    }

    pub fn variance_at(&self, r0: f64, t: f64) -> f64 {
        let e = (-self.kappa * t).exp();
        let s2k = self.sigma * self.sigma / self.kappa;
        r0 * s2k * (e - e * e) + 0.5 * self.theta * s2k * (1.0 - e).powi(2)
    }
}

/// `kappa = 4 alpha/N`, `theta = N/beta + (N-1)/(2N)`, `sigma = sqrt(8 alpha/(N beta))`.
pub fn cir_from_model(params: &ModelParams) -> CirParams {
    let n = params.n as f64;
    CirParams {
        kappa: 4.0 * params.alpha / n,
        theta: n / params.beta + (n - 1.0) / (2.0 * n),
        sigma: (8.0 * params.alpha / (n * params.beta)).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaLaw {
    pub shape: f64,
    pub rate: f64,
}

impl GammaLaw {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParam(format!("gamma law needs shape, rate > 0 (got {shape}, {rate})")));
        }
        Ok(GammaLaw { shape, rate })
    }

    /// Stationary law of `H_V`: shape `N + (N-1) beta/(2N)`, rate `beta`.
    pub fn from_model(params: &ModelParams) -> Self {
        let n = params.n as f64;
        GammaLaw { shape: n + (n - 1.0) * params.beta / (2.0 * n), rate: params.beta }
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Gamma::new(self.shape, 1.0 / self.rate).expect("validated gamma law").sample(rng)
    }
}

pub fn gamma_pdf(law: &GammaLaw, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParam(format!("gamma density needs r >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(if law.shape < 1.0 {
            f64::INFINITY
        } else if law.shape == 1.0 {
            law.rate
        } else {
            0.0
        });
    }
    if r.is_infinite() {
        return Ok(0.0);
    }
    let log = law.shape * law.rate.ln() - ln_gamma(law.shape) + (law.shape - 1.0) * r.ln() - law.rate * r;
    Ok(log.exp())
}

pub fn gamma_cdf(law: &GammaLaw, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParam(format!("gamma cdf needs r >= 0, got {r}")));
    }
    gamma_p(law.shape, law.rate * r)
}

/// `E[H_V(X_t)]` started from `h_v0`.
pub fn mean_h_v(t: f64, h_v0: f64, params: &ModelParams) -> f64 {
    let n = params.n as f64;
    let e = (-params.relaxation_rate() * t).exp();
    h_v0 * e + (0.5 + n / params.beta - 0.5 / n) * (1.0 - e)
}

/// `exp(-4 alpha t/N) w1_0`.
pub fn w1_contraction_bound(t: f64, w1_0: f64, params: &ModelParams) -> f64 {
    (-params.relaxation_rate() * t).exp() * w1_0
}

/// Full-truncation Euler step, clamped at zero.
pub fn step_cir_em(r: f64, dt: f64, cir: &CirParams, gaussian: f64) -> f64 {
    let rp = r.max(0.0);
    let next = r + cir.kappa * (cir.theta - rp) * dt + cir.sigma * (rp * dt).sqrt() * gaussian;
    next.max(0.0)
}

/// Euler path from `r0` over `n_steps` steps of size `dt`, returning the
/// values after every `record_every` steps, starting with `r0` itself.
pub fn cir_em_path<R: Rng + ?Sized>(
    r0: f64,
    dt: f64,
    n_steps: usize,
    record_every: usize,
    cir: &CirParams,
    rng: &mut R,
) -> Vec<f64> {
    let stride = record_every.max(1);
    let mut out = Vec::with_capacity(n_steps / stride + 1);
    out.push(r0);
    let mut r = r0;
    for k in 1..=n_steps {
        r = step_cir_em(r, dt, cir, rng.sample(StandardNormal));
        if k % stride == 0 {
            out.push(r);
        }
    }
    out
}

/// Exact draw of `R_t` given `R_0 = r0`, through the Poisson mixture
/// representation of the noncentral chi-square law.
pub fn sample_cir_exact<R: Rng + ?Sized>(r0: f64, t: f64, cir: &CirParams, rng: &mut R) -> Result<f64> {
    if !(r0 >= 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParam(format!("r0 must be finite and >= 0, got {r0}")));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParam(format!("t must be > 0, got {t}")));
    }
    let e = (-cir.kappa * t).exp();
    let c = cir.sigma * cir.sigma * (1.0 - e) / (4.0 * cir.kappa);
    let nu = 4.0 * cir.kappa * cir.theta / (cir.sigma * cir.sigma);
    let lambda = r0 * e / c;
    let k = if lambda > 0.0 {
        Poisson::new(0.5 * lambda).map_err(|err| Error::InvalidParam(format!("poisson mixture: {err}")))?.sample(rng)
    } else {
        0.0
    };
    let g = Gamma::new(0.5 * nu + k, 2.0).map_err(|err| Error::InvalidParam(format!("gamma mixture: {err}")))?;
    Ok(c * g.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub mean_gap: f64,
    pub se: f64,
    /// `exp(-kappa t) |x - y|`.
    pub bound: f64,
    /// Discretization allowance `5 dt kappa |x - y|`.
    pub allowance: f64,
    pub flagged: bool,
}

/// Runs `n_pairs` pairs of Euler paths from `x` and `y` driven by the same
/// Gaussian increments and compares the mean final gap with the pathwise
/// contraction bound.
pub fn coupled_contraction_test<R: Rng + ?Sized>(
    x: f64,
    y: f64,
    t: f64,
    cir: &CirParams,
    n_pairs: usize,
    dt: f64,
    rng: &mut R,
) -> Result<ContractionReport> {
    if !(x >= 0.0 && y >= 0.0 && t >= 0.0) {
        return Err(Error::InvalidParam("coupled test needs x, y, t >= 0".into()));
    }
    if n_pairs < 100 {
        return Err(Error::InvalidParam(format!("n_pairs must be >= 100, got {n_pairs}")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParam(format!("dt must be > 0, got {dt}")));
    }
    let steps = (t / dt).round() as usize;
    let h = if steps > 0 { t / steps as f64 } else { 0.0 };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_pairs {
        let (mut rx, mut ry) = (x, y);
        for _ in 0..steps {
            let g: f64 = rng.sample(StandardNormal);
            rx = step_cir_em(rx, h, cir, g);
            ry = step_cir_em(ry, h, cir, g);
        }
        let gap = (rx - ry).abs();
        sum += gap;
        sum_sq += gap * gap;
    }
    let m = n_pairs as f64;
    let mean_gap = sum / m;
    let var = ((sum_sq - m * mean_gap * mean_gap) / (m - 1.0)).max(0.0);
    let se = (var / m).sqrt();
    let dist = (x - y).abs();
    let bound = (-cir.kappa * t).exp() * dist;
    let allowance = 5.0 * dt * cir.kappa * dist;
    Ok(ContractionReport { mean_gap, se, bound, allowance, flagged: mean_gap > bound + 3.0 * se + allowance })
}
