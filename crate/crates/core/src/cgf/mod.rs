//! Cumulant generating functions of Ω.
//!
//! Convention: K(t) = log E[e^{−tΩ}], so K^{(n)}(0) = (−1)^n κ_n(Ω). The
//! characteristic function is E[e^{jτΩ}] = exp(K(−jτ)).

mod case_a;
mod radial;

pub use case_a::{Aggregation, CaseAModel, SaddleMethod};
pub use radial::RadialCgf;

use num_complex::Complex64;

use crate::cumulants::{bell_table, CumulantSet};
use crate::error::{arg_err, Error, Result};

/// An evaluable CGF of Ω.
pub trait CgfModel: Send + Sync {
    /// K(t) at complex t (principal branches).
    fn eval(&self, t: Complex64) -> Result<Complex64>;

    /// K^{(n)}(t) at real t inside the strip.
    fn deriv(&self, n: usize, t: f64) -> Result<f64>;

    /// Open interval of real t on which K is finite.
    fn strip(&self) -> (f64, f64);

    /// Natural unit of t, used to scale tolerances and initial steps.
    fn t_scale(&self) -> f64 {
        1.0
    }

    /// Probability mass of Ω at ω; zero for continuous laws.
    fn atom(&self, _omega: f64) -> f64 {
        0.0
    }

    /// Analytic solution of K'(t) = 0, if the model has one.
    fn closed_saddle(&self) -> Option<f64> {
        None
    }

    /// Cumulants κ_1..κ_order of Ω.
    fn cumulants(&self, order: usize) -> Result<CumulantSet> {
        let kappa = (1..=order)
            .map(|n| self.deriv(n, 0.0).map(|d| if n % 2 == 0 { d } else { -d }))
            .collect::<Result<Vec<_>>>()?;
        CumulantSet::new(kappa)
    }

    fn describe(&self) -> String;
}

pub(crate) fn check_real_strip(model: &dyn CgfModel, t: f64) -> Result<()> {
    let (lo, hi) = model.strip();
    if !(t > lo && t < hi) {
        return Err(Error::Strip(format!("t = {t} outside ({lo}, {hi})")));
    }
    Ok(())
}

/// ln(1 + z), accurate for small |z|.
pub(crate) fn c_ln1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

/// e^w − 1, accurate for small |w|.
pub(crate) fn c_expm1(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let em1 = w.re.exp_m1();
    let h = (0.5 * w.im).sin();
    Complex64::new(em1 * c - 2.0 * h * h, (em1 + 1.0) * s)
}

/// Derivatives of ln h from the normalized derivatives g_k = h^{(k)}/h,
/// k = 1..n: (ln h)^{(n)} = Σ_k (−1)^{k−1}(k−1)! B_{n,k}(g_1, ...).
pub(crate) fn log_derivs(g: &[f64]) -> Vec<f64> {
    let n_max = g.len();
    let b = bell_table(n_max, g);
    (1..=n_max)
        .map(|n| {
            let mut s = 0.0;
            let mut fact = 1.0;
            for k in 1..=n {
                if k > 1 {
                    fact *= (k - 1) as f64;
                }
                s += if k % 2 == 1 { fact } else { -fact } * b[n][k];
            }
            s
        })
        .collect()
}

/// Law of the number of summands in a compound sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountLaw {
    Poisson { mean: f64 },
    Binomial { trials: u32, p: f64 },
}

impl CountLaw {
    /// K_N(s) = log E[e^{−sN}].
    pub fn cgf(&self, s: Complex64) -> Complex64 {
        match *self {
            CountLaw::Poisson { mean } => c_expm1(-s) * mean,
            CountLaw::Binomial { trials, p } => {
                let h = Complex64::new(1.0 - p, 0.0) + (-s).exp() * p;
                h.ln() * trials as f64
            }
        }
    }
}

/// K_Y(t) = K_N(−K_G(t)) for Y = G_1 + ... + G_N with N independent of the
/// i.i.d. increments.
pub fn compound_cgf(count: &CountLaw, inner: impl Fn(Complex64) -> Complex64, t: Complex64) -> Complex64 {
    match *count {
        // λ(M_G − 1) directly; avoids exp(log(...)) roundoff
        CountLaw::Poisson { mean } => c_expm1(inner(t)) * mean,
        CountLaw::Binomial { .. } => count.cgf(-inner(t)),
    }
}

/// Ω ~ N(mean, var): K(t) = −mean·t + var·t²/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCgf {
    pub mean: f64,
    pub var: f64,
}

impl GaussianCgf {
    pub fn new(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0 && var.is_finite() && mean.is_finite()) {
            return arg_err(format!("Gaussian needs finite mean and var > 0, got ({mean}, {var})"));
        }
        Ok(Self { mean, var })
    }
}

impl CgfModel for GaussianCgf {
    fn eval(&self, t: Complex64) -> Result<Complex64> {
        Ok(-t * self.mean + t * t * (0.5 * self.var))
    }

    fn deriv(&self, n: usize, t: f64) -> Result<f64> {
        Ok(match n {
            0 => -self.mean * t + 0.5 * self.var * t * t,
            1 => -self.mean + self.var * t,
            2 => self.var,
            _ => 0.0,
        })
    }

    fn strip(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn t_scale(&self) -> f64 {
        1.0 / self.var.sqrt()
    }

    fn closed_saddle(&self) -> Option<f64> {
        Some(self.mean / self.var)
    }

    fn describe(&self) -> String {
        format!("gaussian(mean={}, var={})", self.mean, self.var)
    }
}

/// Ω = θY − X with X, Y independent unit exponentials:
/// K(t) = −ln(1 + θt) − ln(1 − t) on (−1/θ, 1). P(Ω > 0) = θ/(1 + θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPairCgf {
    pub theta: f64,
}

impl ExpPairCgf {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return arg_err(format!("threshold must be positive, got {theta}"));
        }
        Ok(Self { theta })
    }

    pub fn exact_outage(&self) -> f64 {
        self.theta / (1.0 + self.theta)
    }
}

impl CgfModel for ExpPairCgf {
    fn eval(&self, t: Complex64) -> Result<Complex64> {
        if t.im == 0.0 {
            check_real_strip(self, t.re)?;
        }
        Ok(-c_ln1p(t * self.theta) - c_ln1p(-t))
    }

    fn deriv(&self, n: usize, t: f64) -> Result<f64> {
        check_real_strip(self, t)?;
        if n == 0 {
            return Ok(-(self.theta * t).ln_1p() - (-t).ln_1p());
        }
        let fact: f64 = (1..n).map(|k| k as f64).product();
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let y = sign * fact * (self.theta / (1.0 + self.theta * t)).powi(n as i32);
        let x = fact / (1.0 - t).powi(n as i32);
        Ok(y + x)
    }

    fn strip(&self) -> (f64, f64) {
        (-1.0 / self.theta, 1.0)
    }

    fn closed_saddle(&self) -> Option<f64> {
        // θ/(1+θt) = 1/(1−t)
        Some((self.theta - 1.0) / (2.0 * self.theta))
    }

    fn describe(&self) -> String {
        format!("exponential pair(theta={})", self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn fd(model: &dyn CgfModel, n: usize, t: f64, h: f64) -> f64 {
        let f = |x: f64| model.deriv(n - 1, x).unwrap();
        (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn complex_helpers() {
        let z = Complex64::new(1e-12, -2e-12);
        assert!((c_ln1p(z) - z).norm() < 1e-23);
        assert!((c_expm1(z) - z).norm() < 1e-23);
        let z = Complex64::new(0.3, 1.7);
        assert!((c_ln1p(z) - (z + 1.0).ln()).norm() < 1e-15);
        assert!((c_expm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn compound_examples() {
        let t = Complex64::new(0.7, 0.0);
        let unit = |s: Complex64| -s;
        let k = compound_cgf(&CountLaw::Poisson { mean: 2.0 }, unit, t);
        assert_relative_eq!(k.re, 2.0 * ((-0.7f64).exp() - 1.0), max_relative = 1e-14);
        assert_eq!(compound_cgf(&CountLaw::Poisson { mean: 2.0 }, unit, Complex64::new(0.0, 0.0)).re, 0.0);
        let g = |s: Complex64| -c_ln1p(s * 0.5) * 2.0;
        let k = compound_cgf(&CountLaw::Binomial { trials: 1, p: 1.0 }, g, t);
        assert_relative_eq!(k.re, g(t).re, max_relative = 1e-14);
        let exp_g = |s: Complex64| -c_ln1p(s);
        let k = compound_cgf(&CountLaw::Poisson { mean: 3.0 }, exp_g, Complex64::new(1.0, 0.0));
        assert_relative_eq!(k.re, -1.5, max_relative = 1e-14);
    }

    #[test]
    fn log_derivs_match_direct() {
        // h(s) = 2 + e^{s}, at s = 0.3
        let e = 0.3f64.exp();
        let h = 2.0 + e;
        let g = vec![e / h; 4];
        let d = log_derivs(&g);
        let d1 = e / h;
        let d2 = e / h - d1 * d1;
        assert_relative_eq!(d[0], d1, max_relative = 1e-14);
        assert_relative_eq!(d[1], d2, max_relative = 1e-14);
        // third derivative of ln(2+e^s) is 2e^s(2−e^s)/(2+e^s)^3
        assert_relative_eq!(d[2], 2.0 * e * (2.0 - e) / h.powi(3), max_relative = 1e-13);
    }

    #[test]
    fn gaussian_and_pair() {
        let g = GaussianCgf::new(-1.0, 1.0).unwrap();
        assert_eq!(g.eval(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(g.cumulants(4).unwrap().kappa, vec![-1.0, 1.0, 0.0, 0.0]);
        let p = ExpPairCgf::new(3.0).unwrap();
        for n in 1..=4 {
            assert_relative_eq!(p.deriv(n, 0.1).unwrap(), fd(&p, n, 0.1, 1e-4), max_relative = 1e-7);
        }
        let ts = p.closed_saddle().unwrap();
        assert!(p.deriv(1, ts).unwrap().abs() < 1e-14);
        // κ_n = (n−1)!(θ^n + (−1)^n) for θY − X
        let k = p.cumulants(3).unwrap();
        assert_relative_eq!(k.k(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(k.k(2), 10.0, max_relative = 1e-14);
        assert_relative_eq!(k.k(3), 2.0 * 26.0, max_relative = 1e-14);
        assert!(p.deriv(1, 1.5).is_err());
    }
}
