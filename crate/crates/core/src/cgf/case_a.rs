//! Random numbers of cooperating and interfering nodes with gamma fading and
//! no path loss: X = Σ_{i≤M} G_i, Y = Σ_{j≤N} G_j.

use num_complex::Complex64;

use super::{c_expm1, c_ln1p, check_real_strip, log_derivs, CgfModel};
use crate::cumulants::{moments_to_cumulants, CumulantSet, FadingModel, MomentSet};
use crate::error::{arg_err, Error, Result};

/// How the node counts M (signal) and N (interference) are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Aggregation {
    /// M ~ Poisson(λ1), N ~ Poisson(λ2), independent.
    Poisson { lambda1: f64, lambda2: f64 },
    /// M ~ Bin(L, p) and N ~ Bin(L, 1 − p), independent.
    Binomial { l: u32, p: f64 },
}

/// How a saddle point was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaddleMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseAModel {
    pub shape: f64,
    pub rate: f64,
    pub aggregation: Aggregation,
    pub theta: f64,
}

impl CaseAModel {
    pub fn new(fading: FadingModel, aggregation: Aggregation, theta: f64) -> Result<Self> {
        let (shape, rate) = match fading {
            FadingModel::Gamma { shape, rate } => (shape, rate),
            FadingModel::Unit => return Err(Error::Capability("this case needs gamma fading".into())),
            FadingModel::LogNormal { .. } => {
                return Err(Error::Capability("lognormal fading has no MGF; use a moment-based method".into()))
            }
        };
        if !(theta > 0.0 && theta.is_finite()) {
            return arg_err(format!("threshold must be positive, got {theta}"));
        }
        match aggregation {
            Aggregation::Poisson { lambda1, lambda2 } => {
                if !(lambda1 > 0.0 && lambda2 > 0.0) {
                    return arg_err(format!("mean counts must be positive, got ({lambda1}, {lambda2})"));
                }
            }
            Aggregation::Binomial { l, p } => {
                if l == 0 || !(p > 0.0 && p < 1.0) {
                    return arg_err(format!("need L >= 1 and 0 < p < 1, got L = {l}, p = {p}"));
                }
            }
        }
        Ok(Self { shape, rate, aggregation, theta })
    }

    pub fn fading(&self) -> FadingModel {
        FadingModel::Gamma { shape: self.shape, rate: self.rate }
    }

    /// M_G(s) − 1 = (1 + s/β)^{−a} − 1.
    fn mgf_m1(&self, s: Complex64) -> Complex64 {
        c_expm1(-c_ln1p(s / self.rate) * self.shape)
    }

    /// M_G^{(k)}(s) for k = 0..=n at real s.
    fn mgf_derivs(&self, s: f64, n: usize) -> Vec<f64> {
        let base = 1.0 + s / self.rate;
        let mut out = Vec::with_capacity(n + 1);
        let mut coef = 1.0;
        for k in 0..=n {
            if k > 0 {
                coef *= -(self.shape + (k - 1) as f64) / self.rate;
            }
            out.push(coef * base.powf(-self.shape - k as f64));
        }
        out
    }

    /// Interference and signal parts of K^{(n)}(t), n ≥ 1.
    fn deriv_parts(&self, n: usize, t: f64) -> (f64, f64) {
        let th = self.theta;
        let my = self.mgf_derivs(th * t, n);
        let mx = self.mgf_derivs(-t, n);
        let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        match self.aggregation {
            Aggregation::Poisson { lambda1, lambda2 } => {
                (lambda2 * th.powi(n as i32) * my[n], lambda1 * sign(n) * mx[n])
            }
            Aggregation::Binomial { l, p } => {
                let q = 1.0 - p;
                let lf = l as f64;
                let hy = p + q * my[0];
                let gy: Vec<f64> = (1..=n).map(|k| q * th.powi(k as i32) * my[k] / hy).collect();
                let hx = q + p * mx[0];
                let gx: Vec<f64> = (1..=n).map(|k| p * sign(k) * mx[k] / hx).collect();
                (lf * log_derivs(&gy)[n - 1], lf * log_derivs(&gx)[n - 1])
            }
        }
    }

    /// K'(t) together with the magnitude of the two parts that cancel at the
    /// saddle point (the natural scale for residuals).
    pub fn saddle_residual(&self, t: f64) -> (f64, f64) {
        let (y, x) = self.deriv_parts(1, t);
        (y + x, y.abs() + x.abs())
    }

    /// Root of K'(t) = 0.
    ///
    /// Poisson counts: with k = (θλ2/λ1)^{1/(a+1)}, t̂ = β(k − 1)/(θ + k).
    /// Binomial counts, with x = t/β, A = 1 + θx and B = 1 − x, solve
    /// p²A^{a+1} + pq[(1 − θ) + 2θx] − θq²B^{a+1} = 0, which is the quadratic
    /// θ(θp² − q²)x² + 2θ(1 − pq)x + (p − θq) = 0 for Rayleigh fading.
    pub fn saddle(&self) -> Result<(f64, SaddleMethod)> {
        let (a, beta, th) = (self.shape, self.rate, self.theta);
        match self.aggregation {
            Aggregation::Poisson { lambda1, lambda2 } => {
                let k = (th * lambda2 / lambda1).powf(1.0 / (a + 1.0));
                Ok((beta * (k - 1.0) / (th + k), SaddleMethod::ClosedForm))
            }
            Aggregation::Binomial { p, .. } => {
                let q = 1.0 - p;
                let (lo, hi) = (-1.0 / th, 1.0);
                if a == 1.0 {
                    let qa = th * (th * p * p - q * q);
                    let qb = 2.0 * th * (1.0 - p * q);
                    let qc = p - th * q;
                    let x = if qa.abs() < 1e-14 * qb.abs() {
                        -qc / qb
                    } else {
                        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
                        let r1 = -(qb + qb.signum() * disc) / (2.0 * qa);
                        let r2 = qc / (qa * r1);
                        if r1 > lo && r1 < hi {
                            r1
                        } else {
                            r2
                        }
                    };
                    if !(x > lo && x < hi) {
                        return Err(Error::Saddle(format!("quadratic root {x} outside the strip")));
                    }
                    return Ok((beta * x, SaddleMethod::ClosedForm));
                }
                // G(x) is increasing on (−1/θ, 1) with opposite signs at the ends
                let g = |x: f64| {
                    let aa = 1.0 + th * x;
                    let bb = 1.0 - x;
                    p * p * aa.powf(a + 1.0) + p * q * ((1.0 - th) + 2.0 * th * x) - th * q * q * bb.powf(a + 1.0)
                };
                let dg = |x: f64| {
                    let aa = 1.0 + th * x;
                    let bb = 1.0 - x;
                    (a + 1.0) * (p * p * th * aa.powf(a) + th * q * q * bb.powf(a)) + 2.0 * p * q * th
                };
                let x = safeguarded_newton(g, dg, lo, hi, 0.0)?;
                Ok((beta * x, SaddleMethod::Numeric))
            }
        }
    }

    /// Exact κ_1..κ_order of Ω.
    pub fn exact_cumulants(&self, order: usize) -> Result<CumulantSet> {
        let f = self.fading();
        let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let kappa = match self.aggregation {
            Aggregation::Poisson { lambda1, lambda2 } => (1..=order)
                .map(|n| f.moment(n) * (self.theta.powi(n as i32) * lambda2 + sign(n) * lambda1))
                .collect(),
            Aggregation::Binomial { l, p } => {
                // Bernoulli-gated gain B·G has μ_n = p μ_n(G)
                let gated = |pp: f64| {
                    let mut mu = vec![1.0];
                    mu.extend((1..=order).map(|n| pp * f.moment(n)));
                    moments_to_cumulants(&MomentSet { mu }).kappa
                };
                let kx = gated(p);
                let ky = gated(1.0 - p);
                (1..=order)
                    .map(|n| l as f64 * (self.theta.powi(n as i32) * ky[n - 1] + sign(n) * kx[n - 1]))
                    .collect()
            }
        };
        CumulantSet::new(kappa)
    }
}

/// Newton's method on an increasing function with a sign change on (lo, hi),
/// falling back to bisection whenever a step leaves the bracket.
pub(crate) fn safeguarded_newton(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    start: f64,
) -> Result<f64> {
    let eps = 1e-12 * (hi - lo);
    let (mut a, mut b) = (lo + eps, hi - eps);
    let (fa, fb) = (f(a), f(b));
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::Saddle(format!("no sign change on ({lo}, {hi})")));
    }
    let mut x = if start > a && start < b { start } else { 0.5 * (a + b) };
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let mut nx = x - fx / d;
        if !(nx > a && nx < b) || !nx.is_finite() {
            nx = 0.5 * (a + b);
        }
        if (nx - x).abs() <= 1e-15 * x.abs().max(1e-300) || b - a <= 1e-15 * (a.abs() + b.abs()) {
            return Ok(nx);
        }
        x = nx;
    }
    Ok(x)
}

impl CgfModel for CaseAModel {
    fn eval(&self, t: Complex64) -> Result<Complex64> {
        if t.im == 0.0 {
            check_real_strip(self, t.re)?;
        }
        let ty = t * self.theta;
        let tx = -t;
        Ok(match self.aggregation {
            Aggregation::Poisson { lambda1, lambda2 } => self.mgf_m1(ty) * lambda2 + self.mgf_m1(tx) * lambda1,
            Aggregation::Binomial { l, p } => {
                let q = 1.0 - p;
                // ln(p + q M) = ln(1 + q (M − 1)), and likewise for X
                let ky = c_ln1p(self.mgf_m1(ty) * q);
                let kx = c_ln1p(self.mgf_m1(tx) * p);
                (ky + kx) * l as f64
            }
        })
    }

    fn deriv(&self, n: usize, t: f64) -> Result<f64> {
        check_real_strip(self, t)?;
        if n == 0 {
            return Ok(self.eval(Complex64::new(t, 0.0))?.re);
        }
        let (y, x) = self.deriv_parts(n, t);
        Ok(y + x)
    }

    fn strip(&self) -> (f64, f64) {
        (-self.rate / self.theta, self.rate)
    }

    /// Ω = 0 exactly when both counts are zero.
    fn atom(&self, omega: f64) -> f64 {
        if omega != 0.0 {
            return 0.0;
        }
        match self.aggregation {
            Aggregation::Poisson { lambda1, lambda2 } => (-lambda1 - lambda2).exp(),
            Aggregation::Binomial { l, p } => (p * (1.0 - p)).powi(l as i32),
        }
    }

    fn t_scale(&self) -> f64 {
        self.rate
    }

    fn closed_saddle(&self) -> Option<f64> {
        self.saddle().ok().map(|(t, _)| t)
    }

    fn cumulants(&self, order: usize) -> Result<CumulantSet> {
        self.exact_cumulants(order)
    }

    fn describe(&self) -> String {
        format!("case A {:?}, gamma({}, {}), theta={}", self.aggregation, self.shape, self.rate, self.theta)
    }
}
