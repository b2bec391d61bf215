//! Configuration space, energy, gradient and generator closed forms.
//!
//! All pair sums run over ordered pairs `i != j`, row-major in `i` then `j`,
//! exactly as the formulas are written. This keeps every function
//! bit-reproducible for a given build and makes the code-to-formula
//! correspondence easy to audit.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the plane, identified with a complex number `x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    #[inline]
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Particle count `N`, speed `alpha` and inverse temperature `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("n must be at least 1".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParam(format!("alpha must be finite and > 0, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParam(format!("beta must be finite and > 0, got {beta}")));
        }
        Ok(ModelParams { n, alpha, beta })
    }

    /// Random matrix regime: `beta = N^2`, `alpha = N`.
    pub fn ginibre(n: usize) -> Result<Self> {
        let nf = n as f64;
        Self::new(n, nf, nf * nf)
    }

    /// Crossover regime: `beta = N`, `alpha = N`.
    pub fn crossover(n: usize) -> Result<Self> {
        let nf = n as f64;
        Self::new(n, nf, nf)
    }

    /// Noise amplitude `sqrt(2 alpha / beta)`.
    pub fn noise_scale(&self) -> f64 {
        (2.0 * self.alpha / self.beta).sqrt()
    }

    /// Relaxation rate `4 alpha / N` of the second moment.
    pub fn relaxation_rate(&self) -> f64 {
        4.0 * self.alpha / self.n as f64
    }

    fn check_len(&self, cfg: &Configuration) -> Result<()> {
        if cfg.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: cfg.len() });
        }
        Ok(())
    }
}

/// `N` labelled points of the plane.
///
/// [`Configuration::new`] enforces membership in the configuration space
/// (finite coordinates, no two points equal). No minimal-gap threshold is
/// imposed: the space is open and thresholds belong to the integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<Point2>,
}

impl Configuration {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        let cfg = Self::new_allow_coincident(points)?;
        cfg.check_domain()?;
        Ok(cfg)
    }

    /// Finite coordinates only; coincident points are accepted. Used by the
    /// regularized drift, which is defined everywhere.
    pub fn new_allow_coincident(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParam("configuration must hold at least one point".into()));
        }
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Configuration { points })
    }

    pub fn from_xy(xy: &[(f64, f64)]) -> Result<Self> {
        Self::new(xy.iter().map(|&(x, y)| Point2::new(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point2> {
        self.points
    }

    /// `|x|^2 = sum_i |x_i|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sq()).sum()
    }

    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Smallest pairwise distance; `+inf` for a single particle.
    pub fn min_gap(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                best = best.min((self.points[i] - self.points[j]).norm());
            }
        }
        best
    }

    /// Errors with the first coincident pair, if any.
    pub fn check_domain(&self) -> Result<()> {
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                if (self.points[i] - self.points[j]).norm_sq() == 0.0 {
                    return Err(Error::Coincident { i, j });
                }
            }
        }
        Ok(())
    }

    /// Copy with particle `i`, coordinate `axis` (0 = x, 1 = y) shifted by `h`.
    pub(crate) fn shifted(&self, i: usize, axis: usize, h: f64) -> Vec<Point2> {
        let mut pts = self.points.clone();
        if axis == 0 {
            pts[i].x += h;
        } else {
            pts[i].y += h;
        }
        pts
    }
}

/// One planar vector per particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientField {
    pub components: Vec<Point2>,
}

impl GradientField {
    pub fn zeros(n: usize) -> Self {
        GradientField { components: vec![Point2::ZERO; n] }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sq()).sum()
    }

    pub fn scaled(&self, s: f64) -> GradientField {
        GradientField { components: self.components.iter().map(|&c| c * s).collect() }
    }

    pub fn max_abs_diff(&self, other: &GradientField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a.x - b.x).abs().max((a.y - b.y).abs()))
            .fold(0.0, f64::max)
    }
}

/// `H_V(x) = (1/N) sum_i |x_i|^2`.
pub fn energy_v(cfg: &Configuration) -> f64 {
    cfg.norm_sq() / cfg.len() as f64
}

/// `H_W(x) = (1/(2N^2)) sum_{i != j} log(1/|x_i - x_j|^2)`.
pub fn energy_w(cfg: &Configuration) -> Result<f64> {
    let pts = cfg.points();
    let n = pts.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let r2 = (pts[i] - pts[j]).norm_sq();
            if r2 == 0.0 {
                return Err(Error::Coincident { i: i.min(j), j: i.max(j) });
            }
            sum -= r2.ln();
        }
    }
    Ok(sum / (2.0 * (n * n) as f64))
}

pub fn energy(cfg: &Configuration) -> Result<f64> {
    Ok(energy_v(cfg) + energy_w(cfg)?)
}

/// Coercivity bound `|x|^2/(2N) + 1/16`; always below [`energy`].
pub fn energy_lower_bound(cfg: &Configuration) -> f64 {
    cfg.norm_sq() / (2.0 * cfg.len() as f64) + 1.0 / 16.0
}

/// `v_i = sum_{j != i} (x_i - x_j) / |x_i - x_j|^2`.
pub fn interaction_vectors(cfg: &Configuration) -> Result<Vec<Point2>> {
    let pts = cfg.points();
    let n = pts.len();
    let mut out = vec![Point2::ZERO; n];
    for i in 0..n {
        let mut acc = Point2::ZERO;
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = pts[i] - pts[j];
            let r2 = d.norm_sq();
            if r2 == 0.0 {
                return Err(Error::Coincident { i: i.min(j), j: i.max(j) });
            }
            acc += d * (1.0 / r2);
        }
        out[i] = acc;
    }
    Ok(out)
}

/// `sum_{i != j} 1/|x_i - x_j|^2`.
fn inverse_square_sum(cfg: &Configuration) -> Result<f64> {
    let pts = cfg.points();
    let n = pts.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let r2 = (pts[i] - pts[j]).norm_sq();
            if r2 == 0.0 {
                return Err(Error::Coincident { i: i.min(j), j: i.max(j) });
            }
            sum += 1.0 / r2;
        }
    }
    Ok(sum)
}

/// `grad_{x_i} H = (2/N) x_i - (2/N^2) v_i`.
pub fn grad_h(cfg: &Configuration) -> Result<GradientField> {
    let n = cfg.len() as f64;
    let v = interaction_vectors(cfg)?;
    let components = cfg.points().iter().zip(&v).map(|(&x, &vi)| x * (2.0 / n) - vi * (2.0 / (n * n))).collect();
    Ok(GradientField { components })
}

/// Closed form `|grad H|^2 = (4/N^2)|x|^2 + (4/N^4) sum_i |v_i|^2 - 4(N-1)/N^2`.
pub fn grad_norm_sq(cfg: &Configuration) -> Result<f64> {
    let n = cfg.len() as f64;
    let v = interaction_vectors(cfg)?;
    let inter: f64 = v.iter().map(|vi| vi.norm_sq()).sum();
    Ok(4.0 / (n * n) * cfg.norm_sq() + 4.0 / n.powi(4) * inter - 4.0 * (n - 1.0) / (n * n))
}

/// `S_N = sum_i |v_i|^2 - sum_{i != j} 1/|x_i - x_j|^2`, nonnegative, zero on
/// collinear configurations.
///
/// Expanding `|v_i|^2` cancels the inverse squares exactly, leaving a sum over
/// triples of `2 (u_ab.u_ac + u_ba.u_bc + u_ca.u_cb)` with
/// `u_ij = (x_i - x_j)/|x_i - x_j|^2`. Summing triple by triple avoids the
/// cancellation between large terms when two particles are close.
pub fn interaction_sum(cfg: &Configuration) -> Result<f64> {
    if cfg.len() < 2 {
        return Err(Error::InvalidParam("interaction_sum needs n >= 2".into()));
    }
    cfg.check_domain()?;
    let pts = cfg.points();
    let n = pts.len();
    let u = |i: usize, j: usize| {
        let d = pts[i] - pts[j];
        d * (1.0 / d.norm_sq())
    };
    let mut sum = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let uab = u(a, b);
            for c in (b + 1)..n {
                let (uac, ubc) = (u(a, c), u(b, c));
                sum += 2.0 * (uab.dot(uac) - uab.dot(ubc) + uac.dot(ubc));
            }
        }
    }
    Ok(sum)
}

/// Lower bound on `|grad H|^2` obtained by dropping `S_N >= 0`.
pub fn grad_coercivity_bound(cfg: &Configuration) -> Result<f64> {
    if cfg.len() < 2 {
        return Err(Error::InvalidParam("grad_coercivity_bound needs n >= 2".into()));
    }
    let n = cfg.len() as f64;
    Ok(4.0 / (n * n) * cfg.norm_sq() + 4.0 / n.powi(4) * inverse_square_sum(cfg)? - 4.0 * (n - 1.0) / (n * n))
}

/// Hessian of `W(z) = -log(a^2 + b^2)` at `z = (a, b)`:
/// `2 [[a^2 - b^2, 2ab], [2ab, b^2 - a^2]] / (a^2 + b^2)^2`.
pub fn hessian_w(z: Point2) -> Result<[[f64; 2]; 2]> {
    let r2 = z.norm_sq();
    if r2 == 0.0 {
        return Err(Error::InvalidParam("hessian of W is undefined at the origin".into()));
    }
    if !z.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    let s = 2.0 / (r2 * r2);
    let (a, b) = (z.x, z.y);
    let diag = (a * a - b * b) * s;
    let off = 2.0 * a * b * s;
    Ok([[diag, off], [off, -diag]])
}

/// `L H_V = 4 alpha/beta + 2 alpha (N-1)/N^2 - (4 alpha/N) H_V`.
pub fn generator_h_v(cfg: &Configuration, params: &ModelParams) -> Result<f64> {
    params.check_len(cfg)?;
    cfg.check_domain()?;
    let n = cfg.len() as f64;
    let ModelParams { alpha, beta, .. } = *params;
    Ok(4.0 * alpha / beta + 2.0 * alpha * (n - 1.0) / (n * n) - 4.0 * alpha / n * energy_v(cfg))
}

/// `L H_W = 2 alpha (N-1)/N^2 - (4 alpha/N^4) sum_i |v_i|^2`.
pub fn generator_h_w(cfg: &Configuration, params: &ModelParams) -> Result<f64> {
    params.check_len(cfg)?;
    if cfg.len() < 2 {
        return Err(Error::InvalidParam("generator_h_w needs n >= 2".into()));
    }
    let n = cfg.len() as f64;
    let alpha = params.alpha;
    let v = interaction_vectors(cfg)?;
    let inter: f64 = v.iter().map(|vi| vi.norm_sq()).sum();
    Ok(2.0 * alpha * (n - 1.0) / (n * n) - 4.0 * alpha / n.powi(4) * inter)
}

/// `L H = 4 alpha/beta + 4 alpha ((N-1)/N^2 - H_V/N - (1/N^2) sum_i |v_i/N|^2)`.
///
/// Evaluated from its own closed form, not as the sum of the two parts.
pub fn generator_h(cfg: &Configuration, params: &ModelParams) -> Result<f64> {
    params.check_len(cfg)?;
    let n = cfg.len() as f64;
    let ModelParams { alpha, beta, .. } = *params;
    let v = interaction_vectors(cfg)?;
    let inter: f64 = v.iter().map(|vi| (*vi * (1.0 / n)).norm_sq()).sum();
    Ok(4.0 * alpha / beta + 4.0 * alpha * ((n - 1.0) / (n * n) - energy_v(cfg) / n - inter / (n * n)))
}

/// The constant `c = 4 alpha (1/beta + 1/N)` with `L H <= c` on the whole space.
pub fn generator_h_upper_bound(params: &ModelParams) -> f64 {
    4.0 * params.alpha * (1.0 / params.beta + 1.0 / params.n as f64)
}

fn stencil_point(cfg: &Configuration, i: usize, axis: usize, h: f64) -> Result<Configuration> {
    Configuration::new(cfg.shifted(i, axis, h))
}

/// Second-order central-difference Laplacian of `f` in `(R^2)^N`.
pub fn fd_laplacian<F>(f: &F, cfg: &Configuration, h: f64) -> Result<f64>
where
    F: Fn(&Configuration) -> Result<f64>,
{
    let f0 = f(cfg)?;
    let mut lap = 0.0;
    for i in 0..cfg.len() {
        for axis in 0..2 {
            let fp = f(&stencil_point(cfg, i, axis, h)?)?;
            let fm = f(&stencil_point(cfg, i, axis, -h)?)?;
            lap += (fp - 2.0 * f0 + fm) / (h * h);
        }
    }
    Ok(lap)
}

/// Fourth-order central-difference Laplacian (five points per coordinate).
pub fn fd_laplacian4<F>(f: &F, cfg: &Configuration, h: f64) -> Result<f64>
where
    F: Fn(&Configuration) -> Result<f64>,
{
    let f0 = f(cfg)?;
    let mut lap = 0.0;
    for i in 0..cfg.len() {
        for axis in 0..2 {
            let fp1 = f(&stencil_point(cfg, i, axis, h)?)?;
            let fm1 = f(&stencil_point(cfg, i, axis, -h)?)?;
            let fp2 = f(&stencil_point(cfg, i, axis, 2.0 * h)?)?;
            let fm2 = f(&stencil_point(cfg, i, axis, -2.0 * h)?)?;
            lap += (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
        }
    }
    Ok(lap)
}

/// Numerical `L f = (alpha/beta) Lap f - alpha grad H . grad f`.
///
/// Derivatives of `f` use second-order central differences with step `h`;
/// the drift uses [`grad_h`] exactly. Fails if a stencil point leaves the
/// configuration space.
pub fn apply_generator<F>(f: &F, cfg: &Configuration, params: &ModelParams, h: f64) -> Result<f64>
where
    F: Fn(&Configuration) -> Result<f64>,
{
    params.check_len(cfg)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParam(format!("fd_step must be finite and > 0, got {h}")));
    }
    let grad = grad_h(cfg)?;
    let f0 = f(cfg)?;
    let mut lap = 0.0;
    let mut transport = 0.0;
    for i in 0..cfg.len() {
        for axis in 0..2 {
            let fp = f(&stencil_point(cfg, i, axis, h)?)?;
            let fm = f(&stencil_point(cfg, i, axis, -h)?)?;
            lap += (fp - 2.0 * f0 + fm) / (h * h);
            let df = (fp - fm) / (2.0 * h);
            let gh = if axis == 0 { grad.components[i].x } else { grad.components[i].y };
            transport += gh * df;
        }
    }
    Ok(params.alpha / params.beta * lap - params.alpha * transport)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> Configuration {
        Configuration::from_xy(&[(1.0, 0.0), (-1.0, 0.0)]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn energies_on_symmetric_pair() {
        let cfg = pair();
        assert!(close(energy_v(&cfg), 1.0, 1e-15));
        assert!(close(energy_w(&cfg).unwrap(), -(4.0f64).ln() / 4.0, 1e-15));
        assert!(close(energy(&cfg).unwrap(), 1.0 - (4.0f64).ln() / 4.0, 1e-15));
        assert!(close(energy_lower_bound(&cfg), 0.5625, 1e-15));
    }

    #[test]
    fn energy_trivial_cases() {
        let single = Configuration::from_xy(&[(3.0, 4.0)]).unwrap();
        assert_eq!(energy_v(&single), 25.0);
        assert_eq!(energy_w(&single).unwrap(), 0.0);
        assert_eq!(energy_lower_bound(&single), 12.5 + 1.0 / 16.0);

        let unit = Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(energy_w(&unit).unwrap(), 0.0);

        let h = 3f64.sqrt() / 2.0;
        let tri = Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.5, h)]).unwrap();
        assert!(energy_w(&tri).unwrap().abs() < 1e-15);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)];
        assert_eq!(Configuration::new(pts.clone()), Err(Error::Coincident { i: 1, j: 2 }));
        let cfg = Configuration::new_allow_coincident(pts).unwrap();
        assert_eq!(energy_w(&cfg), Err(Error::Coincident { i: 1, j: 2 }));
        assert!(grad_h(&cfg).is_err());
        assert!(interaction_sum(&cfg).is_err());
        let nan = vec![Point2::new(f64::NAN, 0.0)];
        assert_eq!(Configuration::new(nan), Err(Error::NonFinite { index: 0 }));
    }

    #[test]
    fn gradient_on_symmetric_pair() {
        let g = grad_h(&pair()).unwrap();
        assert!(close(g.components[0].x, 0.75, 1e-15));
        assert!(close(g.components[1].x, -0.75, 1e-15));
        assert_eq!(g.components[0].y, 0.0);
        assert!(close(grad_norm_sq(&pair()).unwrap(), 1.125, 1e-15));
        assert!(close(grad_coercivity_bound(&pair()).unwrap(), 1.125, 1e-15));
    }

    #[test]
    fn single_particle_is_pure_confinement() {
        let cfg = Configuration::from_xy(&[(0.3, -1.7)]).unwrap();
        let g = grad_h(&cfg).unwrap();
        assert_eq!(g.components[0], Point2::new(0.6, -3.4));
        assert!(close(grad_norm_sq(&cfg).unwrap(), 4.0 * (0.09 + 2.89), 1e-14));
    }

    #[test]
    fn interaction_sum_vanishes_for_two_and_collinear() {
        let two = Configuration::from_xy(&[(0.2, 0.7), (-1.3, 0.4)]).unwrap();
        assert!(interaction_sum(&two).unwrap().abs() < 1e-12);
        let line: Vec<_> = (1..=5).map(|i| (i as f64, 0.0)).collect();
        let cfg = Configuration::from_xy(&line).unwrap();
        assert!(interaction_sum(&cfg).unwrap().abs() < 1e-9);
        let tri = Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
        assert!(interaction_sum(&tri).unwrap() > 0.1);
    }

    #[test]
    fn hessian_of_w() {
        assert_eq!(hessian_w(Point2::new(1.0, 0.0)).unwrap(), [[2.0, 0.0], [0.0, -2.0]]);
        assert_eq!(hessian_w(Point2::new(0.0, 2.0)).unwrap(), [[-0.5, 0.0], [0.0, 0.5]]);
        assert!(hessian_w(Point2::ZERO).is_err());
    }

    #[test]
    fn generators_on_symmetric_pair() {
        let p = ModelParams::new(2, 2.0, 4.0).unwrap();
        let cfg = pair();
        assert!(close(generator_h_v(&cfg, &p).unwrap(), -1.0, 1e-15));
        assert!(close(generator_h_w(&cfg, &p).unwrap(), 0.75, 1e-15));
        assert!(close(generator_h(&cfg, &p).unwrap(), -0.25, 1e-15));
    }

    #[test]
    fn generator_h_v_vanishes_at_eigenvector_fixed_point() {
        let p = ModelParams::new(4, 1.3, 2.5).unwrap();
        let target: f64 = 4.0 / 2.5 + 3.0 / 8.0;
        let r = (target).sqrt();
        let cfg = Configuration::from_xy(&[(r, 0.0), (-r, 0.0), (0.0, r), (0.0, -r)]).unwrap();
        assert!(generator_h_v(&cfg, &p).unwrap().abs() < 1e-14);
    }

    #[test]
    fn size_mismatch_is_reported() {
        let p = ModelParams::new(3, 1.0, 1.0).unwrap();
        assert_eq!(generator_h(&pair(), &p), Err(Error::SizeMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn apply_generator_constant_is_zero() {
        let p = ModelParams::new(2, 2.0, 4.0).unwrap();
        let c = |_: &Configuration| Ok(3.5);
        assert_eq!(apply_generator(&c, &pair(), &p, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn apply_generator_rejects_stencil_leaving_domain() {
        let p = ModelParams::new(2, 1.0, 1.0).unwrap();
        let cfg = Configuration::from_xy(&[(0.0, 0.0), (0.5, 0.0)]).unwrap();
        let r = apply_generator(&energy_w, &cfg, &p, 0.5);
        assert!(matches!(r, Err(Error::Coincident { .. })));
    }

    #[test]
    fn params_validation_and_regimes() {
        assert!(ModelParams::new(0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2, 0.0, 1.0).is_err());
        assert!(ModelParams::new(2, 1.0, f64::INFINITY).is_err());
        let g = ModelParams::ginibre(8).unwrap();
        assert_eq!((g.alpha, g.beta), (8.0, 64.0));
        let c = ModelParams::crossover(8).unwrap();
        assert_eq!((c.alpha, c.beta), (8.0, 8.0));
    }
}
