//! Empirical distances and goodness-of-fit statistics.

use serde::{Deserialize, Serialize};

use crate::cir::{gamma_cdf, GammaLaw};
use crate::error::{Error, Result};
use crate::model::Point2;
use crate::special::gamma_q;

/// A nonempty sample of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample1D {
    values: Vec<f64>,
}

impl Sample1D {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParam("sample must be nonempty".into()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Sample1D { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Standard error of the mean (zero for a single value).
    pub fn standard_error(&self) -> f64 {
        let m = self.values.len();
        if m < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        (var / m as f64).sqrt()
    }
}

/// Wasserstein-1 distance between two empirical measures of equal size.
pub fn w1_empirical(a: &Sample1D, b: &Sample1D) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { expected: a.len(), got: b.len() });
    }
    let (sa, sb) = (a.sorted(), b.sorted());
    Ok(sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// Quantile of a Gamma law by bisection on the cdf.
pub fn gamma_quantile(law: &GammaLaw, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParam(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let mut lo = 0.0;
    let mut hi = law.mean().max(1e-300);
    while gamma_cdf(law, hi)? < p {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if gamma_cdf(law, mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// W1 between the sample and a Gamma law, matching order statistics with the
/// midpoint quantiles `(i - 1/2)/m`.
pub fn w1_vs_gamma(a: &Sample1D, law: &GammaLaw) -> Result<f64> {
    let m = a.len() as f64;
    let mut acc = 0.0;
    for (i, x) in a.sorted().iter().enumerate() {
        acc += (x - gamma_quantile(law, (i as f64 + 0.5) / m)?).abs();
    }
    Ok(acc / m)
}

/// Kolmogorov-Smirnov distance between the empirical cdf and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(a: &Sample1D, cdf: F) -> f64 {
    let m = a.len() as f64;
    a.sorted()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i as f64 + 1.0) / m - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(m: usize) -> f64 {
    1.63 / (m as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Number of points binned, including those outside the edges.
    pub total: u64,
}

impl RadialHistogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }
}

/// Histogram of `|z|`; bins are half-open `[e_k, e_{k+1})` except the last,
/// which is closed.
pub fn radial_histogram(points: &[Point2], edges: &[f64]) -> Result<RadialHistogram> {
    check_edges(edges)?;
    let mut counts = vec![0u64; edges.len() - 1];
    for p in points {
        if let Some(k) = bin_of(edges, p.norm()) {
            counts[k] += 1;
        }
    }
    Ok(RadialHistogram { edges: edges.to_vec(), counts, total: points.len() as u64 })
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidParam("need at least two edges".into()));
    }
    if edges.windows(2).any(|w| !(w[1] > w[0])) || edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParam("edges must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn bin_of(edges: &[f64], r: f64) -> Option<usize> {
    let last = edges.len() - 1;
    if !(r >= edges[0] && r <= edges[last]) {
        return None;
    }
    let k = edges.partition_point(|&e| e <= r);
    Some((k - 1).min(last - 1))
}

/// `sum (O_k - m p_k)^2 / (m p_k)` with `m = hist.total`.
pub fn chi_square_gof(hist: &RadialHistogram, expected: &[f64]) -> Result<f64> {
    if expected.len() != hist.counts.len() {
        return Err(Error::SizeMismatch { expected: hist.counts.len(), got: expected.len() });
    }
    let mass: f64 = expected.iter().sum();
    if mass > 1.0 + 1e-9 {
        return Err(Error::InvalidParam(format!("expected probabilities sum to {mass} > 1")));
    }
    let m = hist.total as f64;
    let mut stat = 0.0;
    for (k, (&o, &p)) in hist.counts.iter().zip(expected).enumerate() {
        if !(p > 0.0) {
            return Err(Error::InvalidParam(format!("bin {k} has zero expected probability")));
        }
        let e = m * p;
        stat += (o as f64 - e).powi(2) / e;
    }
    Ok(stat)
}

/// Merges adjacent bins, left to right, until each expected count
/// `total * p` reaches `min_expected`. A short remainder joins the last bin.
pub fn merge_sparse_bins(
    hist: &RadialHistogram,
    expected: &[f64],
    min_expected: f64,
) -> Result<(RadialHistogram, Vec<f64>)> {
    if expected.len() != hist.counts.len() {
        return Err(Error::SizeMismatch { expected: hist.counts.len(), got: expected.len() });
    }
    let m = hist.total as f64;
    let mut edges = vec![hist.edges[0]];
    let mut counts = Vec::new();
    let mut probs = Vec::new();
    let (mut c, mut p) = (0u64, 0.0);
    for (k, (&ck, &pk)) in hist.counts.iter().zip(expected).enumerate() {
        c += ck;
        p += pk;
        if m * p >= min_expected {
            edges.push(hist.edges[k + 1]);
            counts.push(c);
            probs.push(p);
            c = 0;
            p = 0.0;
        }
    }
    if c > 0 || p > 0.0 {
        let last_edge = *hist.edges.last().expect("nonempty edges");
        match counts.last_mut() {
            Some(lc) => {
                *lc += c;
                *probs.last_mut().expect("parallel vectors") += p;
                *edges.last_mut().expect("nonempty edges") = last_edge;
            }
            None => {
                edges.push(last_edge);
                counts.push(c);
                probs.push(p);
            }
        }
    }
    Ok((RadialHistogram { edges, counts, total: hist.total }, probs))
}

/// Upper tail probability of the chi-square law with `df` degrees of freedom.
pub fn chi_square_p_value(stat: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidParam("chi-square needs df >= 1".into()));
    }
    gamma_q(0.5 * df as f64, 0.5 * stat.max(0.0))
}

/// Outcome of a binned chi-square test after sparse-bin merging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Chi-square test of a histogram against bin probabilities; degrees of
/// freedom are the merged bin count minus one.
pub fn chi_square_test(hist: &RadialHistogram, expected: &[f64]) -> Result<ChiSquareResult> {
    let (merged, probs) = merge_sparse_bins(hist, expected, 5.0)?;
    let statistic = chi_square_gof(&merged, &probs)?;
    let df = merged.n_bins().saturating_sub(1).max(1);
    Ok(ChiSquareResult { statistic, df, p_value: chi_square_p_value(statistic, df)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn s(v: &[f64]) -> Sample1D {
        Sample1D::new(v.to_vec()).unwrap()
    }

    #[test]
    fn w1_examples() {
        assert_eq!(w1_empirical(&s(&[0.3, 1.2]), &s(&[1.2, 0.3])).unwrap(), 0.0);
        assert_eq!(w1_empirical(&s(&[0.0]), &s(&[1.0])).unwrap(), 1.0);
        assert_eq!(w1_empirical(&s(&[0.0, 2.0]), &s(&[1.0, 1.0])).unwrap(), 1.0);
        assert!(w1_empirical(&s(&[0.0]), &s(&[1.0, 2.0])).is_err());
        assert!(Sample1D::new(vec![]).is_err());
        assert!(Sample1D::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn w1_vs_gamma_single_point() {
        let law = GammaLaw::new(2.0, 1.0).unwrap();
        let median = gamma_quantile(&law, 0.5).unwrap();
        assert!((gamma_cdf(&law, median).unwrap() - 0.5).abs() < 1e-10);
        let d = w1_vs_gamma(&s(&[2.0]), &law).unwrap();
        assert!((d - (2.0 - median).abs()).abs() < 1e-9);
    }

    #[test]
    fn w1_vs_gamma_self_and_shift() {
        let law = GammaLaw::new(5.0, 4.0).unwrap();
        let mut rng = stream(8, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| law.sample(&mut rng)).collect();
        let base = w1_vs_gamma(&s(&xs), &law).unwrap();
        // fluctuation scale: sd / sqrt(m) with sd = sqrt(5)/4
        assert!(base < 3.0 * 5f64.sqrt() / 4.0 / 100.0 * 3.0, "base={base}");
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.5).collect();
        let d = w1_vs_gamma(&s(&shifted), &law).unwrap();
        assert!((d - 0.5).abs() < base + 1e-3, "d={d}");
    }

    #[test]
    fn ks_examples() {
        let uniform = |x: f64| x.clamp(0.0, 1.0);
        assert_eq!(ks_statistic(&s(&[0.5, 0.5, 0.5, 0.5]), uniform), 0.5);
        assert_eq!(ks_statistic(&s(&[-1.0, -2.0]), uniform), 1.0);
        let k = ks_statistic(&s(&[0.1, 0.9, 0.6]), uniform);
        assert!((0.0..=1.0).contains(&k));
    }

    #[test]
    fn ks_calibration() {
        let mut rng = stream(9, 0);
        let m = 2000;
        let reps = 100;
        let passes = (0..reps)
            .filter(|_| {
                let xs: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
                ks_statistic(&s(&xs), |x| x.clamp(0.0, 1.0)) < ks_critical_1pct(m)
            })
            .count();
        assert!(passes >= 95, "passes={passes}");
    }

    #[test]
    fn ks_invariant_under_monotone_transform() {
        let mut rng = stream(9, 1);
        let xs: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
        let k1 = ks_statistic(&s(&xs), |x| x.clamp(0.0, 1.0));
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).exp()).collect();
        let k2 = ks_statistic(&s(&ys), |y| (y.ln() / 3.0).clamp(0.0, 1.0));
        assert!((k1 - k2).abs() < 1e-12);
    }

    #[test]
    fn histogram_examples() {
        let pts = vec![Point2::ZERO; 7];
        let h = radial_histogram(&pts, &[0.0, 1.0]).unwrap();
        assert_eq!(h.counts, vec![7]);
        let pts = vec![Point2::new(0.5, 0.0), Point2::new(3.0, 0.0), Point2::new(0.0, 1.0)];
        let h = radial_histogram(&pts, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(h.counts, vec![0, 2]);
        assert_eq!(h.total, 3);
        assert!(radial_histogram(&pts, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn uniform_disc_equal_area_bins() {
        let mut rng = stream(2, 0);
        let pts: Vec<Point2> = (0..40_000)
            .map(|_| {
                let r = rng.random::<f64>().sqrt();
                let t = rng.random::<f64>() * std::f64::consts::TAU;
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let edges: Vec<f64> = (0..=10).map(|k| (k as f64 / 10.0).sqrt()).collect();
        let h = radial_histogram(&pts, &edges).unwrap();
        let res = chi_square_test(&h, &[0.1; 10]).unwrap();
        assert!(res.p_value > 1e-3, "{res:?}");
    }

    #[test]
    fn chi_square_examples() {
        let h = RadialHistogram { edges: vec![0.0, 1.0, 2.0], counts: vec![30, 70], total: 100 };
        assert_eq!(chi_square_gof(&h, &[0.3, 0.7]).unwrap(), 0.0);
        let one = RadialHistogram { edges: vec![0.0, 1.0], counts: vec![50], total: 50 };
        assert_eq!(chi_square_gof(&one, &[1.0]).unwrap(), 0.0);
        assert!(chi_square_gof(&h, &[0.0, 1.0]).is_err());
        assert!(chi_square_gof(&h, &[0.6, 0.6]).is_err());
    }

    #[test]
    fn chi_square_calibration() {
        let mut rng = stream(3, 0);
        let probs = [0.1, 0.2, 0.3, 0.4];
        let edges = [0.0, 0.1, 0.3, 0.6, 1.0];
        let reps = 200;
        let mut mean = 0.0;
        for _ in 0..reps {
            let pts: Vec<Point2> = (0..500).map(|_| Point2::new(rng.random::<f64>(), 0.0)).collect();
            let h = radial_histogram(&pts, &edges).unwrap();
            mean += chi_square_gof(&h, &probs).unwrap() / reps as f64;
        }
        // df = 3, sd of the mean = sqrt(6/200)
        assert!((mean - 3.0).abs() < 4.0 * (6.0f64 / reps as f64).sqrt(), "mean={mean}");
    }

    #[test]
    fn merging_preserves_totals() {
        let h = RadialHistogram { edges: vec![0.0, 1.0, 2.0, 3.0, 4.0], counts: vec![1, 40, 2, 1], total: 44 };
        let (m, p) = merge_sparse_bins(&h, &[0.02, 0.9, 0.05, 0.03], 5.0).unwrap();
        assert_eq!(m.counts.iter().sum::<u64>(), 44);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(m.edges.first(), Some(&0.0));
        assert_eq!(m.edges.last(), Some(&4.0));
        assert_eq!(m.edges.len(), m.counts.len() + 1);
        assert!(p.iter().all(|&q| 44.0 * q >= 5.0));
    }

    #[test]
    fn p_value_of_median() {
        // median of chi-square(2) is 2 ln 2
        let p = chi_square_p_value(2.0 * 2f64.ln(), 2).unwrap();
        assert!((p - 0.5).abs() < 1e-14);
    }
}
