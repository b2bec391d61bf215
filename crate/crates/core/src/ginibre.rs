//! Marginals of the invariant law at `beta = N^2`.
//!
//! With the truncated exponential `e_N(w) = sum_{l < N} w^l / l!`, the
//! one- and two-point marginals are
//!
//! ```text
//! phi1(z)      = exp(-N|z|^2) e_N(N|z|^2) / pi
//! phi2(z1, z2) = N/(N-1) [phi1(z1) phi1(z2) - exp(-N(|z1|^2+|z2|^2)) |e_N(N z1 conj(z2))|^2 / pi^2]
//! ```
//!
//! and the `k`-point marginal is a determinant of the same kernel. Every
//! product of a Gaussian factor with a partial sum is evaluated in scaled or
//! log space, since `N|z|^2` quickly reaches hundreds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point2;
use crate::special::{gamma_p, ln_factorial};

impl From<Point2> for Complex64 {
    fn from(p: Point2) -> Self {
        Complex64::new(p.x, p.y)
    }
}

impl From<Complex64> for Point2 {
    fn from(z: Complex64) -> Self {
        Point2::new(z.re, z.im)
    }
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParam(format!("kernel order must be >= {min}, got {n}")));
    }
    Ok(())
}

/// Direct partial sum `e_n(w)`. Overflows for large `|w|`; use the scaled
/// functions below for densities.
pub fn trunc_exp(n: usize, w: Complex64) -> Result<Complex64> {
    check_n(n, 1)?;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for l in 1..n {
        term = term * w / l as f64;
        sum += term;
    }
    if !(sum.re.is_finite() && sum.im.is_finite()) {
        return Err(Error::InvalidParam(format!("e_{n}({w}) overflows; use the scaled kernel")));
    }
    Ok(sum)
}

/// `exp(-lambda) sum_{l < n} lambda^l / l!`, summed outward from the largest term.
pub fn poisson_head(n: usize, lambda: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if lambda == 0.0 {
        return 1.0;
    }
    let peak = (lambda.floor() as usize).min(n - 1);
    let log_peak = peak as f64 * lambda.ln() - lambda - ln_factorial(peak as u64);
    let mut sum = 1.0;
    let mut t = 1.0;
    for l in (1..=peak).rev() {
        t *= l as f64 / lambda;
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
    }
    t = 1.0;
    for l in (peak + 1)..n {
        t *= lambda / l as f64;
        sum += t;
        if t < 1e-18 * sum {
            break;
        }
    }
    (log_peak.exp() * sum).min(1.0)
}

/// `exp(-N(|z1|^2 + |z2|^2)/2) e_N(N z1 conj(z2))`.
pub fn scaled_kernel_complex(n: usize, z1: Complex64, z2: Complex64) -> Result<Complex64> {
    check_n(n, 1)?;
    let nf = n as f64;
    if z1 == z2 {
        return Ok(Complex64::new(poisson_head(n, nf * z1.norm_sqr()), 0.0));
    }
    let shift = 0.5 * nf * (z1.norm_sqr() + z2.norm_sqr());
    let w = z1 * z2.conj() * nf;
    if w.im == 0.0 && w.re >= 0.0 {
        return Ok(Complex64::new((w.re - shift).exp() * poisson_head(n, w.re), 0.0));
    }
    let r = w.norm();
    let phase = w.arg();
    let log_r = r.ln();
    let peak = (r.floor() as usize).min(n - 1);
    let log_peak = peak as f64 * log_r - ln_factorial(peak as u64);
    let mut sum = Complex64::new(0.0, 0.0);
    for l in 0..n {
        let lm = l as f64 * log_r - ln_factorial(l as u64) - log_peak;
        if lm < -745.0 {
            continue;
        }
        sum += Complex64::from_polar(lm.exp(), l as f64 * phase);
    }
    Ok(sum * (log_peak - shift).exp())
}

/// `exp(-N(|z1|^2 + |z2|^2)/2) |e_N(N z1 conj(z2))|`.
pub fn scaled_kernel(n: usize, z1: Complex64, z2: Complex64) -> Result<f64> {
    Ok(scaled_kernel_complex(n, z1, z2)?.norm())
}

/// One-point density `phi1`; `n = 1` gives `exp(-|z|^2)/pi`.
pub fn marginal1_density(n: usize, z: Complex64) -> Result<f64> {
    check_n(n, 1)?;
    Ok(poisson_head(n, n as f64 * z.norm_sqr()) / PI)
}

/// `P(|Z| <= r)` under `phi1`: the squared radius is a uniform mixture of
/// `Gamma(l + 1, rate N)` laws, `l < N`.
pub fn marginal1_radial_cdf(n: usize, r: f64) -> Result<f64> {
    check_n(n, 1)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidParam(format!("radius must be >= 0, got {r}")));
    }
    let u = n as f64 * r * r;
    let mut acc = 0.0;
    for l in 0..n {
        acc += gamma_p(l as f64 + 1.0, u)?;
    }
    Ok(acc / n as f64)
}

pub fn marginal2_density(n: usize, z1: Complex64, z2: Complex64) -> Result<f64> {
    check_n(n, 2)?;
    let nf = n as f64;
    let p1 = poisson_head(n, nf * z1.norm_sqr());
    let p2 = poisson_head(n, nf * z2.norm_sqr());
    let k = scaled_kernel(n, z1, z2)?;
    Ok(nf / (nf - 1.0) * (p1 * p2 - k * k) / (PI * PI))
}

/// `phi2(z1, z2) - phi1(z1) phi1(z2)`.
pub fn delta2(n: usize, z1: Complex64, z2: Complex64) -> Result<f64> {
    Ok(marginal2_density(n, z1, z2)? - marginal1_density(n, z1)? * marginal1_density(n, z2)?)
}

/// `k`-point density from the determinant of the scaled kernel matrix.
///
/// Values below `-1e-12` are reported as a conditioning error; smaller
/// negative roundoff is returned unchanged.
pub fn marginal_k_density(n: usize, zs: &[Complex64]) -> Result<f64> {
    check_n(n, 1)?;
    let k = zs.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParam(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut m = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        for j in 0..k {
            m[i * k + j] = scaled_kernel_complex(n, zs[i], zs[j])?;
        }
    }
    let det = lu_determinant(&mut m, k);
    let nf = n as f64;
    let prefactor: f64 = (0..k).map(|j| nf / (nf - j as f64) / PI).product();
    let value = prefactor * det.re;
    if value < -1e-12 {
        return Err(Error::Conditioning(format!("{k}-point density evaluated to {value:e}")));
    }
    Ok(value)
}

fn lu_determinant(m: &mut [Complex64], k: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let pivot =
            (col..k).max_by(|&a, &b| m[a * k + col].norm().total_cmp(&m[b * k + col].norm())).expect("nonempty range");
        if m[pivot * k + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..k {
                m.swap(pivot * k + j, col * k + j);
            }
            det = -det;
        }
        let p = m[col * k + col];
        det *= p;
        for row in (col + 1)..k {
            let factor = m[row * k + col] / p;
            for j in col..k {
                let v = m[col * k + j];
                m[row * k + j] -= factor * v;
            }
        }
    }
    det
}

/// `sum_{l >= n} w^l / l!`, summed directly; for moderate `|w|` only.
pub fn exp_series_tail(n: usize, w: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    for l in 1..=n {
        term = term * w / l as f64;
    }
    let mut tail = Complex64::new(0.0, 0.0);
    let mut l = n;
    loop {
        tail += term;
        l += 1;
        term = term * w / l as f64;
        if l as f64 > 2.0 * w.norm() && term.norm() <= 1e-17 * tail.norm() {
            return tail;
        }
    }
}

/// `r_N(z)`, the bound on `|e_N(Nz) - exp(Nz) 1_{|z| <= 1}|`.
pub fn trunc_exp_tail_bound(n: usize, z: Complex64) -> Result<f64> {
    check_n(n, 1)?;
    let a = z.norm();
    if a == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let factor = if a <= 1.0 { (nf + 1.0) / (nf * (1.0 - a) + 1.0) } else { nf / (nf * (a - 1.0) + 1.0) };
    let log = nf - 0.5 * (2.0 * PI * nf).ln() + nf * a.ln() + factor.ln();
    Ok(log.exp())
}

/// `E|Z|^2 = (N + 1)/(2N)` under `phi1`.
pub fn marginal1_second_moment(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 1.0) / (2.0 * nf)
}

/// Exact draw from `phi1`: pick `l` uniformly below `N`, draw the squared
/// radius from `Gamma(l + 1, rate N)` and a uniform angle.
pub fn sample_marginal1<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Point2> {
    check_n(n, 1)?;
    let nf = n as f64;
    let shape = rng.random_range(0..n) + 1;
    let u = if shape <= 32 {
        let e = Exp::new(nf).expect("positive rate");
        (0..shape).map(|_| e.sample(rng)).sum::<f64>()
    } else {
        Gamma::new(shape as f64, 1.0 / nf).expect("positive shape").sample(rng)
    };
    let angle = rng.random_range(0.0..(2.0 * PI));
    let r = u.sqrt();
    Ok(Point2::new(r * angle.cos(), r * angle.sin()))
}

/// Monte-Carlo estimate of `Var(f) / E|grad f|^2` under `phi1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighEstimate {
    pub ratio: f64,
    /// Delta-method standard error of the ratio.
    pub se: f64,
}

pub fn poincare_rayleigh<F, G, R>(n: usize, f: F, grad_f: G, n_samples: usize, rng: &mut R) -> Result<RayleighEstimate>
where
    F: Fn(Point2) -> f64,
    G: Fn(Point2) -> Point2,
    R: Rng + ?Sized,
{
    check_n(n, 1)?;
    if n_samples < 10_000 {
        return Err(Error::InvalidParam(format!("n_samples must be >= 10000, got {n_samples}")));
    }
    let mut fv = Vec::with_capacity(n_samples);
    let mut gv = Vec::with_capacity(n_samples);
    for s in 0..n_samples {
        let z = sample_marginal1(n, rng)?;
        if s < 10 {
            check_gradient(&f, &grad_f, z)?;
        }
        fv.push(f(z));
        gv.push(grad_f(z).norm_sq());
    }
    let m = n_samples as f64;
    let b_mean = gv.iter().sum::<f64>() / m;
    if !(b_mean > 0.0) {
        return Err(Error::InvalidParam("test function has vanishing gradient".into()));
    }
    let f_mean = fv.iter().sum::<f64>() / m;
    let a: Vec<f64> = fv.iter().map(|v| (v - f_mean).powi(2)).collect();
    let var = a.iter().sum::<f64>() / (m - 1.0);
    let ratio = var / b_mean;
    let a_mean = a.iter().sum::<f64>() / m;
    let psi_var =
        a.iter().zip(&gv).map(|(ai, bi)| ((ai - a_mean) - ratio * (bi - b_mean)) / b_mean).map(|p| p * p).sum::<f64>()
            / (m - 1.0);
    Ok(RayleighEstimate { ratio, se: (psi_var / m).sqrt() })
}

fn check_gradient<F, G>(f: &F, grad_f: &G, z: Point2) -> Result<()>
where
    F: Fn(Point2) -> f64,
    G: Fn(Point2) -> Point2,
{
    let h = 1e-5;
    let fd = Point2::new(
        (f(z + Point2::new(h, 0.0)) - f(z - Point2::new(h, 0.0))) / (2.0 * h),
        (f(z + Point2::new(0.0, h)) - f(z - Point2::new(0.0, h))) / (2.0 * h),
    );
    let g = grad_f(z);
    if (fd - g).norm() > 1e-5 * g.norm().max(1.0) {
        return Err(Error::InvalidParam(format!("gradient disagrees with finite differences at ({}, {})", z.x, z.y)));
    }
    Ok(())
}
