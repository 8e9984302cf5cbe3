//! Campbell cumulants of the signal and interference shot noise, cumulants of
//! Ω = θY − X, and Bell-polynomial moment/cumulant transforms.

use std::f64::consts::PI;

use crate::error::{arg_err, Error, Result};
use crate::specfun::log_gamma;

/// Default cumulant order cap.
pub const DEFAULT_ORDER: usize = 8;
/// Hard cap; beyond this the Bell transforms lose too much to cancellation.
pub const MAX_ORDER: usize = 16;

/// PPP deployment around the typical user.
///
/// Base stations with a ≤ r < R cooperate (signal X); those with r ≥ R
/// interfere (Y). `window` optionally truncates the interference field at an
/// outer radius, as in a finite simulation area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkGeometry {
    pub lambda: f64,
    pub a: f64,
    pub r_coop: f64,
    pub alpha: f64,
    pub power: f64,
    pub window: Option<f64>,
}

impl NetworkGeometry {
    pub fn new(lambda: f64, a: f64, r_coop: f64, alpha: f64, power: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return arg_err(format!("intensity must be positive, got {lambda}"));
        }
        if !(a > 0.0 && a < r_coop && r_coop.is_finite()) {
            return arg_err(format!("need 0 < a < R, got a = {a}, R = {r_coop}"));
        }
        if !(alpha > 2.0 && alpha.is_finite()) {
            return arg_err(format!("path-loss exponent must exceed 2, got {alpha}"));
        }
        if !(power > 0.0 && power.is_finite()) {
            return arg_err(format!("transmit power must be positive, got {power}"));
        }
        Ok(Self { lambda, a, r_coop, alpha, power, window: None })
    }

    /// Truncate the interference field at radius `w` (> R).
    pub fn with_window(mut self, w: f64) -> Result<Self> {
        if !(w > self.r_coop) {
            return arg_err(format!("window radius {w} must exceed R = {}", self.r_coop));
        }
        self.window = if w.is_finite() { Some(w) } else { None };
        Ok(self)
    }

    /// Geometry with `num_bs` base stations on average inside a disc of radius
    /// `window`; the interference field is truncated there.
    pub fn from_bs_count(num_bs: f64, window: f64, a: f64, r_coop: f64, alpha: f64, power: f64) -> Result<Self> {
        if !(num_bs > 0.0 && window > 0.0) {
            return arg_err(format!("need positive BS count and window, got {num_bs}, {window}"));
        }
        Self::new(num_bs / (PI * window * window), a, r_coop, alpha, power)?.with_window(window)
    }

    /// u = R / a.
    pub fn u(&self) -> f64 {
        self.r_coop / self.a
    }

    /// Outer radius of the interference field (infinite when untruncated).
    pub fn outer(&self) -> f64 {
        self.window.unwrap_or(f64::INFINITY)
    }
}

/// Distribution of the per-link power gain G.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    /// G ≡ 1.
    Unit,
    /// Gamma(shape, rate); shape 1 is Rayleigh, shape m is Nakagami-m.
    Gamma { shape: f64, rate: f64 },
    /// ln G ~ N(mu_ln, sigma_ln²). Moments only, no MGF.
    LogNormal { mu_ln: f64, sigma_ln: f64 },
}

impl FadingModel {
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return arg_err(format!("gamma fading needs shape, rate > 0, got ({shape}, {rate})"));
        }
        Ok(FadingModel::Gamma { shape, rate })
    }

    pub fn lognormal(mu_ln: f64, sigma_ln: f64) -> Result<Self> {
        if !(sigma_ln > 0.0 && mu_ln.is_finite() && sigma_ln.is_finite()) {
            return arg_err(format!("lognormal fading needs sigma > 0, got {sigma_ln}"));
        }
        Ok(FadingModel::LogNormal { mu_ln, sigma_ln })
    }

    /// μ_n(G) = E[G^n].
    pub fn moment(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            FadingModel::Unit => 1.0,
            FadingModel::Gamma { shape, rate } => {
                // Γ(α+n)/(Γ(α) β^n) as a rising product
                (0..n).fold(1.0, |acc, k| acc * (shape + k as f64) / rate)
            }
            FadingModel::LogNormal { mu_ln, sigma_ln } => (nf * mu_ln + 0.5 * nf * nf * sigma_ln * sigma_ln).exp(),
        }
    }

    pub fn has_mgf(&self) -> bool {
        !matches!(self, FadingModel::LogNormal { .. })
    }
}

/// Cumulants κ_1..κ_N.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantSet {
    pub kappa: Vec<f64>,
}

impl CumulantSet {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.is_empty() {
            return arg_err("cumulant set needs at least one entry");
        }
        Ok(Self { kappa })
    }

    pub fn order(&self) -> usize {
        self.kappa.len()
    }

    /// κ_n, 1-based.
    pub fn k(&self, n: usize) -> f64 {
        self.kappa[n - 1]
    }

    pub fn mean(&self) -> f64 {
        self.kappa[0]
    }

    pub fn variance(&self) -> Option<f64> {
        self.kappa.get(1).copied()
    }

    /// κ_3 / κ_2^{3/2}.
    pub fn skewness(&self) -> Option<f64> {
        if self.order() < 3 {
            return None;
        }
        Some(self.k(3) / self.k(2).powf(1.5))
    }

    /// κ_4 / κ_2².
    pub fn excess_kurtosis(&self) -> Option<f64> {
        if self.order() < 4 {
            return None;
        }
        Some(self.k(4) / (self.k(2) * self.k(2)))
    }

    /// Cumulants of (X − κ_1)/√κ_2.
    pub fn standardized(&self) -> Result<CumulantSet> {
        let var = self.variance().filter(|v| *v > 0.0).ok_or_else(|| Error::Argument("standardizing needs κ_2 > 0".into()))?;
        let sd = var.sqrt();
        let mut out = Vec::with_capacity(self.order());
        for (i, k) in self.kappa.iter().enumerate() {
            let n = i + 1;
            out.push(match n {
                1 => 0.0,
                2 => 1.0,
                _ => k / sd.powi(n as i32),
            });
        }
        Ok(CumulantSet { kappa: out })
    }
}

/// Raw moments μ_0..μ_N with μ_0 = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub mu: Vec<f64>,
}

impl MomentSet {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.first() != Some(&1.0) {
            return arg_err("moment set must start with μ_0 = 1");
        }
        Ok(Self { mu })
    }

    /// Highest available order N.
    pub fn order(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn m(&self, n: usize) -> f64 {
        self.mu[n]
    }
}

/// Table of partial Bell polynomials B_{n,k}(x_1, ...) for 0 ≤ k ≤ n ≤ n_max,
/// built with B_{n,k} = Σ_{i=1}^{n−k+1} C(n−1, i−1) x_i B_{n−i,k−1}.
pub fn bell_table(n_max: usize, x: &[f64]) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n_max + 1]; n_max + 1];
    b[0][0] = 1.0;
    let binom = binomial_rows(n_max);
    for n in 1..=n_max {
        for k in 1..=n {
            let mut s = 0.0;
            for i in 1..=(n - k + 1) {
                if i > x.len() {
                    break;
                }
                s += binom[n - 1][i - 1] * x[i - 1] * b[n - i][k - 1];
            }
            b[n][k] = s;
        }
    }
    b
}

fn binomial_rows(n_max: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n_max + 1]; n_max + 1];
    for n in 0..=n_max {
        c[n][0] = 1.0;
        for k in 1..=n {
            c[n][k] = c[n - 1][k - 1] + if k < n { c[n - 1][k] } else { 0.0 };
        }
    }
    c
}

/// Partial exponential Bell polynomial B_{n,k}(x_1, ..., x_{n−k+1}).
pub fn bell_partial(n: usize, k: usize, x: &[f64]) -> Result<f64> {
    if n == 0 && k == 0 {
        return Ok(1.0);
    }
    if k > n {
        return arg_err(format!("bell_partial needs k <= n, got n = {n}, k = {k}"));
    }
    if k == 0 {
        return Ok(0.0);
    }
    if x.len() < n - k + 1 {
        return arg_err(format!("B_{{{n},{k}}} needs {} arguments, got {}", n - k + 1, x.len()));
    }
    Ok(bell_table(n, x)[n][k])
}

/// μ_n = Σ_k B_{n,k}(κ_1, ...).
pub fn cumulants_to_moments(k: &CumulantSet) -> MomentSet {
    let n_max = k.order();
    let b = bell_table(n_max, &k.kappa);
    let mut mu = vec![1.0];
    for n in 1..=n_max {
        mu.push((1..=n).map(|j| b[n][j]).sum());
    }
    MomentSet { mu }
}

/// κ_n = Σ_k (−1)^{k−1} (k−1)! B_{n,k}(μ_1, ...).
pub fn moments_to_cumulants(m: &MomentSet) -> CumulantSet {
    let n_max = m.order();
    let b = bell_table(n_max, &m.mu[1..]);
    let mut kappa = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut s = 0.0;
        let mut fact = 1.0; // (k−1)!
        for k in 1..=n {
            if k > 1 {
                fact *= (k - 1) as f64;
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * fact * b[n][k];
        }
        kappa.push(s);
    }
    CumulantSet { kappa }
}

/// n-th cumulant of Σ G_i P r_i^{−α} over PPP points with r_lo ≤ r < r_hi:
/// 2πλ μ_n(G) P^n (r_lo^{2−nα} − r_hi^{2−nα}) / (nα − 2).
pub fn campbell_cumulant(n: usize, geom: &NetworkGeometry, fading: &FadingModel, r_lo: f64, r_hi: f64) -> Result<f64> {
    if n == 0 {
        return arg_err("cumulant order starts at 1");
    }
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return arg_err(format!("need 0 < r_lo < r_hi, got [{r_lo}, {r_hi}]"));
    }
    let e = n as f64 * geom.alpha - 2.0;
    if e <= 0.0 {
        return Err(Error::Divergence(format!("n·α = {} does not exceed 2", n as f64 * geom.alpha)));
    }
    let mu = fading.moment(n);
    if mu == 0.0 {
        return Ok(0.0);
    }
    let hi = if r_hi.is_finite() { r_hi.powf(-e) } else { 0.0 };
    Ok(2.0 * PI * geom.lambda * mu * geom.power.powi(n as i32) * (r_lo.powf(-e) - hi) / e)
}

/// κ_n(X): signal from the cooperation annulus [a, R).
pub fn signal_cumulant(n: usize, geom: &NetworkGeometry, fading: &FadingModel) -> Result<f64> {
    campbell_cumulant(n, geom, fading, geom.a, geom.r_coop)
}

/// κ_n(Y): interference from [R, window).
pub fn interference_cumulant(n: usize, geom: &NetworkGeometry, fading: &FadingModel) -> Result<f64> {
    campbell_cumulant(n, geom, fading, geom.r_coop, geom.outer())
}

/// κ_n(Ω) = θ^n κ_n(Y) + (−1)^n κ_n(X).
pub fn omega_cumulant(n: usize, geom: &NetworkGeometry, fading: &FadingModel, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return arg_err(format!("threshold must be positive, got {theta}"));
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(theta.powi(n as i32) * interference_cumulant(n, geom, fading)? + sign * signal_cumulant(n, geom, fading)?)
}

/// Closed form κ_n(Ω) = κ_n^lim [1 + ((−θ)^n − 1) u^{2−nα}] for an untruncated
/// interference field.
pub fn omega_cumulant_closed(n: usize, geom: &NetworkGeometry, fading: &FadingModel, theta: f64) -> Result<f64> {
    if geom.window.is_some() {
        return arg_err("closed form assumes an untruncated interference field");
    }
    let lim = omega_cumulant_limit(n, geom, fading)?;
    let e = 2.0 - n as f64 * geom.alpha;
    Ok(lim * (1.0 + ((-theta).powi(n as i32) - 1.0) * geom.u().powf(e)))
}

/// κ_n^lim = (−1)^n 2πλ μ_n(G) P^n a^{2−nα} / (nα − 2), the u → ∞ limit.
pub fn omega_cumulant_limit(n: usize, geom: &NetworkGeometry, fading: &FadingModel) -> Result<f64> {
    let e = n as f64 * geom.alpha - 2.0;
    if n == 0 || e <= 0.0 {
        return Err(Error::Divergence(format!("n·α must exceed 2 (n = {n})")));
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * 2.0 * PI * geom.lambda * fading.moment(n) * geom.power.powi(n as i32) * geom.a.powf(-e) / e)
}

/// κ_1..κ_order of Ω.
pub fn omega_cumulants(geom: &NetworkGeometry, fading: &FadingModel, theta: f64, order: usize) -> Result<CumulantSet> {
    if !(1..=MAX_ORDER).contains(&order) {
        return arg_err(format!("cumulant order must be in 1..={MAX_ORDER}, got {order}"));
    }
    let kappa = (1..=order).map(|n| omega_cumulant(n, geom, fading, theta)).collect::<Result<Vec<_>>>()?;
    Ok(CumulantSet { kappa })
}

/// Squared skewness and excess kurtosis of Ω in the u → ∞ limit:
///
/// Skew² = 8(α−1)³ / ((3α−2)² 2πλa²) · μ_3²/μ_2³,
/// ExKurt = (α−1)² / ((2α−1) πλa²) · μ_4/μ_2²,
///
/// i.e. the ratios κ_3²/κ_2³ and κ_4/κ_2² of the limiting cumulants. Both fall
/// as 1/λ, so Ω approaches a Gaussian only for dense networks.
pub fn omega_shape_stats(geom: &NetworkGeometry, fading: &FadingModel) -> (f64, f64) {
    let al = geom.alpha;
    let (m2, m3, m4) = (fading.moment(2), fading.moment(3), fading.moment(4));
    let area = PI * geom.lambda * geom.a * geom.a;
    let skew2 = 8.0 * (al - 1.0).powi(3) / ((3.0 * al - 2.0).powi(2) * 2.0 * area) * m3 * m3 / (m2 * m2 * m2);
    let exkurt = (al - 1.0).powi(2) / ((2.0 * al - 1.0) * area) * m4 / (m2 * m2);
    (skew2, exkurt)
}

/// ln of μ_n for a gamma fading law, for callers that need large orders.
pub fn gamma_log_moment(n: usize, shape: f64, rate: f64) -> Result<f64> {
    Ok(log_gamma(shape + n as f64)? - log_gamma(shape)? - n as f64 * rate.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_geom() -> NetworkGeometry {
        NetworkGeometry::new(1.0, 1.0, 2.0, 4.0, 1.0).unwrap()
    }

    #[test]
    fn bell_values() {
        assert_eq!(bell_partial(3, 2, &[1.0, 1.0]).unwrap(), 3.0);
        assert_eq!(bell_partial(4, 2, &[1.0, 1.0, 1.0]).unwrap(), 7.0);
        assert_eq!(bell_partial(5, 5, &[2.0]).unwrap(), 32.0);
        assert_eq!(bell_partial(4, 2, &[1.0, 2.0, 3.0]).unwrap(), 3.0 * 4.0 + 4.0 * 3.0);
        assert!(bell_partial(2, 3, &[1.0]).is_err());
        assert!(bell_partial(4, 2, &[1.0]).is_err());
    }

    #[test]
    fn transforms() {
        let m = cumulants_to_moments(&CumulantSet::new(vec![1.0, 1.0, 1.0]).unwrap());
        assert_eq!(m.mu, vec![1.0, 1.0, 2.0, 5.0]);
        let m = cumulants_to_moments(&CumulantSet::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap());
        assert_eq!(m.mu, vec![1.0, 0.0, 1.0, 0.0, 3.0]);
        let m = cumulants_to_moments(&CumulantSet::new(vec![2.0, 0.0, 0.0, 0.0]).unwrap());
        assert_eq!(m.mu, vec![1.0, 2.0, 4.0, 8.0, 16.0]);
        let k = moments_to_cumulants(&MomentSet::new(vec![1.0, 1.0, 2.0, 5.0]).unwrap());
        assert_eq!(k.kappa, vec![1.0, 1.0, 1.0]);
        let k = moments_to_cumulants(&MomentSet::new(vec![1.0, 1.0, 2.0, 6.0, 24.0]).unwrap());
        assert_eq!(k.kappa, vec![1.0, 1.0, 2.0, 6.0]);
    }

    #[test]
    fn campbell_values() {
        let g = unit_geom();
        let f = FadingModel::Unit;
        assert_relative_eq!(campbell_cumulant(1, &g, &f, 1.0, 2.0).unwrap(), 3.0 * PI / 4.0, max_relative = 1e-14);
        assert_relative_eq!(campbell_cumulant(1, &g, &f, 2.0, f64::INFINITY).unwrap(), PI / 4.0, max_relative = 1e-14);
        let g2 = NetworkGeometry::new(1.0, 1.0, 2.0, 2.5, 1.0).unwrap();
        assert!(campbell_cumulant(1, &g2, &f, 1.0, 2.0).is_ok());
        let mut g3 = g2;
        g3.alpha = 2.0;
        assert!(matches!(campbell_cumulant(1, &g3, &f, 1.0, 2.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn campbell_matches_quadrature() {
        let g = NetworkGeometry::new(0.3, 1.0, 2.0, 3.5, 2.0).unwrap();
        let f = FadingModel::gamma(2.0, 1.5).unwrap();
        for n in 1..=4 {
            let q = crate::quad::integrate(|r: f64| r * (g.power * r.powf(-g.alpha)).powi(n as i32), 1.0, 2.0, 1e-14, 0.0, 100).value;
            let want = 2.0 * PI * g.lambda * f.moment(n) * q;
            assert_relative_eq!(campbell_cumulant(n, &g, &f, 1.0, 2.0).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn omega_values() {
        let g = unit_geom();
        let f = FadingModel::Unit;
        assert_relative_eq!(omega_cumulant(1, &g, &f, 1.0).unwrap(), -PI / 2.0, max_relative = 1e-14);
        assert_relative_eq!(omega_cumulant(2, &g, &f, 1.0).unwrap(), PI / 3.0, max_relative = 1e-14);
        let far = NetworkGeometry::new(1.0, 1.0, 1e6, 4.0, 1.0).unwrap();
        for n in 1..=4 {
            assert_relative_eq!(
                omega_cumulant(n, &far, &f, 1.0).unwrap(),
                omega_cumulant_limit(n, &far, &f).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn closed_form_matches_decomposition() {
        let g = NetworkGeometry::new(200.0 / (PI * 1e6), 30.0, 150.0, 3.3, 0.7).unwrap();
        let f = FadingModel::gamma(1.7, 0.8).unwrap();
        for n in 1..=6 {
            for &theta in &[0.1, 1.0, 10.0] {
                let a = omega_cumulant(n, &g, &f, theta).unwrap();
                let b = omega_cumulant_closed(n, &g, &f, theta).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn shape_stats() {
        let g = NetworkGeometry::new(1.0 / (PI * 900.0), 30.0, 150.0, 4.0, 1.0).unwrap();
        let f = FadingModel::gamma(1.0, 1.0).unwrap();
        let (s2, ek) = omega_shape_stats(&g, &f);
        assert_relative_eq!(s2, 4.86, max_relative = 1e-12);
        assert_relative_eq!(ek, 54.0 / 7.0, max_relative = 1e-12);
        let k2 = omega_cumulant_limit(2, &g, &f).unwrap();
        let k3 = omega_cumulant_limit(3, &g, &f).unwrap();
        let k4 = omega_cumulant_limit(4, &g, &f).unwrap();
        assert_relative_eq!(s2, k3 * k3 / (k2 * k2 * k2), max_relative = 1e-10);
        assert_relative_eq!(ek, k4 / (k2 * k2), max_relative = 1e-10);
        let mut g2 = g;
        g2.lambda *= 2.0;
        let (s2b, ekb) = omega_shape_stats(&g2, &f);
        assert_relative_eq!(s2b, s2 / 2.0, max_relative = 1e-14);
        assert_relative_eq!(ekb, ek / 2.0, max_relative = 1e-14);
        // unit gain is a valid fading law here
        let (s2u, _) = omega_shape_stats(&g, &FadingModel::Unit);
        assert!(s2u > 0.0);
    }

    #[test]
    fn fading_moments() {
        let f = FadingModel::gamma(2.5, 0.5).unwrap();
        for n in 0..6 {
            let want = gamma_log_moment(n, 2.5, 0.5).unwrap().exp();
            assert_relative_eq!(f.moment(n), want, max_relative = 1e-12);
        }
        let ln = FadingModel::lognormal(0.1, 0.5).unwrap();
        assert_relative_eq!(ln.moment(2), (0.2f64 + 0.5).exp(), max_relative = 1e-15);
        assert!(!ln.has_mgf());
    }

    #[test]
    fn standardization() {
        let k = CumulantSet::new(vec![3.0, 4.0, 2.0, 5.0]).unwrap().standardized().unwrap();
        assert_eq!(k.kappa, vec![0.0, 1.0, 0.25, 5.0 / 16.0]);
    }

    proptest! {
        #[test]
        fn bell_round_trip(k1 in -2.0f64..2.0, k2 in 0.1f64..3.0, rest in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let mut kappa = vec![k1, k2];
            kappa.extend(rest);
            let ks = CumulantSet::new(kappa.clone()).unwrap();
            let m = cumulants_to_moments(&ks);
            let back = moments_to_cumulants(&m);
            for (i, (a, b)) in kappa.iter().zip(back.kappa.iter()).enumerate() {
                // κ_n is homogeneous of degree n in the moment scale, and the
                // Bell sum cancels terms of size max_j |μ_j|^{n/j}
                let n = (i + 1) as f64;
                let unit = (1..=8).map(|j| m.mu[j].abs().powf(1.0 / j as f64)).fold(1.0, f64::max);
                let scale = unit.powf(n);
                prop_assert!((a - b).abs() <= 1e-10 * scale);
            }
        }
    }
}
