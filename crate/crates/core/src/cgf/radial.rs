//! Shot-noise CGF of Ω for a PPP of base stations with path loss:
//!
//! K(t) = 2πλ [ ∫_a^R (M_G(−tPr^{−α}) − 1) r dr + ∫_R^W (M_G(tθPr^{−α}) − 1) r dr ]
//!
//! with M_G(s) = E[e^{−sG}]. Unit gain gives the deterministic-fading case.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{c_expm1, c_ln1p, check_real_strip, CgfModel};
use crate::cumulants::{omega_cumulant, omega_cumulants, CumulantSet, FadingModel, NetworkGeometry};
use crate::error::{arg_err, Error, Result};
use crate::quad::{integrate_breaks, integrate_to_inf, QuadValue};
use crate::specfun::{growth_gamma, inc_gamma_lower};

const REL_TOL: f64 = 1e-12;
const MAX_INTERVALS: usize = 4000;
/// Phase |t|P r^{−α} beyond which unit-gain integrals on the imaginary axis
/// switch to the rotated contour.
const PHASE_SPLIT: f64 = 20.0;

/// ∫_{x1}^{x2} (e^{jσx} − 1) x^{−s−1} dx for PHASE_SPLIT ≤ x1 ≤ x2. The
/// oscillatory part ∫_x^∞ e^{jσy} y^{−s−1} dy is moved onto y = x + jσu,
/// where it becomes jσe^{jσx} ∫_0^∞ e^{−u}(x + jσu)^{−s−1} du.
fn oscillatory_piece(s: f64, sigma: f64, x1: f64, x2: f64) -> Result<Complex64> {
    let tail = |x: f64| -> Result<Complex64> {
        let r = integrate_to_inf(
            |u: f64| Complex64::new(x, sigma * u).powf(-s - 1.0) * (-u).exp(),
            0.0,
            1e-13,
            0.0,
            200,
        );
        if !r.converged {
            return Err(Error::Accuracy { partial: r.value.norm(), err_estimate: r.err });
        }
        Ok(Complex64::new(0.0, sigma) * Complex64::new(0.0, sigma * x).exp() * r.value)
    };
    Ok(tail(x1)? - tail(x2)? - (x1.powf(-s) - x2.powf(-s)) / s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCgf {
    pub geom: NetworkGeometry,
    pub fading: FadingModel,
    pub theta: f64,
}

impl RadialCgf {
    /// Unit channel gains.
    pub fn case_b(geom: NetworkGeometry, theta: f64) -> Result<Self> {
        Self::case_c(geom, FadingModel::Unit, theta)
    }

    /// Random channel gains with a closed-form MGF.
    pub fn case_c(geom: NetworkGeometry, fading: FadingModel, theta: f64) -> Result<Self> {
        if !fading.has_mgf() {
            return Err(Error::Capability("lognormal fading has no MGF; use a moment-based method".into()));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return arg_err(format!("threshold must be positive, got {theta}"));
        }
        Ok(Self { geom, fading, theta })
    }

    fn mgf_m1(&self, s: Complex64) -> Complex64 {
        match self.fading {
            FadingModel::Gamma { shape, rate } => c_expm1(-c_ln1p(s / rate) * shape),
            _ => c_expm1(-s),
        }
    }

    fn mgf_deriv(&self, n: usize, s: f64) -> f64 {
        match self.fading {
            FadingModel::Gamma { shape, rate } => {
                let coef: f64 = (0..n).map(|k| -(shape + k as f64) / rate).product();
                coef * (1.0 + s / rate).powf(-shape - n as f64)
            }
            _ => {
                if n.is_multiple_of(2) {
                    (-s).exp()
                } else {
                    -(-s).exp()
                }
            }
        }
    }

    /// m = α/(α − 2); the interference integral runs over w = (r/R)^{2−α}.
    fn m(&self) -> f64 {
        self.geom.alpha / (self.geom.alpha - 2.0)
    }

    fn w_lo(&self) -> f64 {
        match self.geom.window {
            Some(w) => (w / self.geom.r_coop).powf(2.0 - self.geom.alpha),
            None => 0.0,
        }
    }

    fn signal_breaks(&self, mag: f64) -> Vec<f64> {
        let g = &self.geom;
        let mut b = vec![g.a];
        if mag > 0.0 {
            // where |t|P r^{−α} crosses 1 and 10
            for level in [10.0, 1.0] {
                let r = (mag * g.power / level).powf(1.0 / g.alpha);
                if r > g.a && r < g.r_coop && r > *b.last().unwrap() {
                    b.push(r);
                }
            }
        }
        b.push(g.r_coop);
        b
    }

    fn interference_breaks(&self, mag: f64) -> Vec<f64> {
        let g = &self.geom;
        let lo = self.w_lo();
        let mut b = vec![lo];
        let c = mag * self.theta * g.power * g.r_coop.powf(-g.alpha);
        if c > 0.0 {
            for level in [1.0, 10.0] {
                let w = (level / c).powf(1.0 / self.m());
                if w > lo && w < 1.0 && w > *b.last().unwrap() {
                    b.push(w);
                }
            }
        }
        b.push(1.0);
        b
    }

    fn finish<T: QuadValue>(&self, parts: [crate::quad::QuadResult<T>; 2]) -> Result<T> {
        for p in &parts {
            let scale = p.value.magnitude().max(p.abs_integral * 1e-3);
            if !p.value.is_finite_value() || (!p.converged && p.err > 1e-7 * scale) {
                return Err(Error::Accuracy { partial: p.value.magnitude(), err_estimate: p.err });
            }
        }
        Ok((parts[0].value + parts[1].value) * (2.0 * PI * self.geom.lambda))
    }

    /// K(jb) for unit gains: direct quadrature where the phase is below
    /// PHASE_SPLIT, the rotated contour above it.
    fn eval_unit_imaginary(&self, b: f64) -> Result<Complex64> {
        let g = self.geom;
        let t = Complex64::new(0.0, b);
        let s = 2.0 / g.alpha;
        let sgn = b.signum();

        // signal: e^{jbPr^{−α}} − 1, phase x = |b|P r^{−α}
        let kap = b.abs() * g.power;
        let r_c = (kap / PHASE_SPLIT).powf(1.0 / g.alpha).clamp(g.a, g.r_coop);
        let mut breaks = vec![r_c];
        breaks.extend(self.signal_breaks(b.abs()).into_iter().filter(|&r| r > r_c));
        let mut fs = |r: f64| c_expm1(t * (g.power * r.powf(-g.alpha))) * r;
        let sig = integrate_breaks(&mut fs, &breaks, REL_TOL, 0.0, MAX_INTERVALS);
        let x_a = kap * g.a.powf(-g.alpha);
        let mut extra = Complex64::new(0.0, 0.0);
        if x_a > PHASE_SPLIT {
            let x_lo = PHASE_SPLIT.max(kap * g.r_coop.powf(-g.alpha));
            extra += oscillatory_piece(s, sgn, x_lo, x_a)? * (kap.powf(s) / g.alpha);
        }

        // interference: e^{−jbθPr^{−α}} − 1 over w, phase x = c_abs w^m
        let m = self.m();
        let kap_i = b.abs() * self.theta * g.power;
        let c_abs = kap_i * g.r_coop.powf(-g.alpha);
        let w_lo = self.w_lo();
        let w_c = (PHASE_SPLIT / c_abs).powf(1.0 / m).clamp(w_lo, 1.0);
        let mut breaks: Vec<f64> = self.interference_breaks(b.abs()).into_iter().filter(|&w| w < w_c).collect();
        breaks.push(w_c);
        let c = t * (self.theta * g.power * g.r_coop.powf(-g.alpha));
        let pre = self.prefactor_interference();
        let mut fi = |w: f64| {
            let wm = w.powf(m);
            if wm == 0.0 {
                return -c * pre;
            }
            c_expm1(-c * wm) * (pre / wm)
        };
        let int = integrate_breaks(&mut fi, &breaks, REL_TOL, 0.0, MAX_INTERVALS);
        if c_abs > PHASE_SPLIT {
            let x_lo = PHASE_SPLIT.max(kap_i * g.window.map_or(0.0, |w| w.powf(-g.alpha)));
            extra += oscillatory_piece(s, -sgn, x_lo, c_abs)? * (kap_i.powf(s) / g.alpha);
        }
        Ok(self.finish([sig, int])? + extra * (2.0 * PI * g.lambda))
    }

    fn prefactor_interference(&self) -> f64 {
        self.geom.r_coop * self.geom.r_coop / (self.geom.alpha - 2.0)
    }

    /// K^{(n)}(t) for unit gains from incomplete gamma functions: with
    /// s = n − 2/α,
    ///
    /// ∫ r^{1−nα} e^{±c r^{−α}} dr = (1/α) c^{2/α−n} ∫ x^{s−1} e^{±x} dx,
    ///
    /// where the x-integral is a difference of lower incomplete gammas γ(s, ·)
    /// for the decaying sign and of [`growth_gamma`] for the growing one.
    pub fn deriv_closed_form(&self, n: usize, t: f64) -> Result<f64> {
        if self.fading != FadingModel::Unit {
            return Err(Error::Capability("closed-form derivatives need unit gains".into()));
        }
        if n == 0 {
            return arg_err("closed form covers derivatives of order >= 1");
        }
        if t == 0.0 {
            let k = omega_cumulant(n, &self.geom, &self.fading, self.theta)?;
            return Ok(if n.is_multiple_of(2) { k } else { -k });
        }
        let g = &self.geom;
        let s = n as f64 - 2.0 / g.alpha;
        let abs_t = t.abs();
        let lower = |hi: f64, lo: f64| -> Result<f64> {
            let a = if hi > 0.0 { inc_gamma_lower(s, hi)? } else { 0.0 };
            let b = if lo > 0.0 { inc_gamma_lower(s, lo)? } else { 0.0 };
            Ok(a - b)
        };
        let growth = |hi: f64, lo: f64| -> Result<f64> { Ok(growth_gamma(s, hi)? - growth_gamma(s, lo)?) };

        let cs = abs_t * g.power;
        let (xa, xr) = (cs * g.a.powf(-g.alpha), cs * g.r_coop.powf(-g.alpha));
        let sig_int = if t > 0.0 { growth(xa, xr)? } else { lower(xa, xr)? };
        let sig = g.power.powi(n as i32) / g.alpha * cs.powf(2.0 / g.alpha - n as f64) * sig_int;

        let ci = abs_t * self.theta * g.power;
        let yr = ci * g.r_coop.powf(-g.alpha);
        let yw = g.window.map_or(0.0, |w| ci * w.powf(-g.alpha));
        let int_int = if t > 0.0 { lower(yr, yw)? } else { growth(yr, yw)? };
        let int = (-self.theta * g.power).powi(n as i32) / g.alpha * ci.powf(2.0 / g.alpha - n as f64) * int_int;

        Ok(2.0 * PI * g.lambda * (sig + int))
    }
}

impl CgfModel for RadialCgf {
    fn eval(&self, t: Complex64) -> Result<Complex64> {
        if t.im == 0.0 {
            check_real_strip(self, t.re)?;
        }
        if self.fading == FadingModel::Unit && t.re == 0.0 {
            return self.eval_unit_imaginary(t.im);
        }
        let g = self.geom;
        let mag = t.norm();
        let mut fs = |r: f64| self.mgf_m1(-t * (g.power * r.powf(-g.alpha))) * r;
        let sig = integrate_breaks(&mut fs, &self.signal_breaks(mag), REL_TOL, 0.0, MAX_INTERVALS);
        let m = self.m();
        let c = t * (self.theta * g.power * g.r_coop.powf(-g.alpha));
        let pre = self.prefactor_interference();
        let mut fi = |w: f64| {
            let wm = w.powf(m);
            let v = self.mgf_m1(c * wm);
            if wm == 0.0 {
                // limit (M(cy) − 1)/y → −c μ_1 as y → 0
                return -c * self.fading.moment(1) * pre;
            }
            v * (pre / wm)
        };
        let int = integrate_breaks(&mut fi, &self.interference_breaks(mag), REL_TOL, 0.0, MAX_INTERVALS);
        self.finish([sig, int])
    }

    fn deriv(&self, n: usize, t: f64) -> Result<f64> {
        check_real_strip(self, t)?;
        if n == 0 {
            return Ok(self.eval(Complex64::new(t, 0.0))?.re);
        }
        let g = self.geom;
        let nf = n as i32;
        let mut fs = |r: f64| {
            let y = g.power * r.powf(-g.alpha);
            (-y).powi(nf) * self.mgf_deriv(n, -t * y) * r
        };
        let sig = integrate_breaks(&mut fs, &self.signal_breaks(t.abs()), REL_TOL, 0.0, MAX_INTERVALS);
        let m = self.m();
        let c0 = self.theta * g.power * g.r_coop.powf(-g.alpha);
        let pre = self.prefactor_interference() * c0.powi(nf);
        let mut fi = |w: f64| {
            let wm = w.powf(m);
            pre * w.powf(m * (n as f64 - 1.0)) * self.mgf_deriv(n, t * c0 * wm)
        };
        let int = integrate_breaks(&mut fi, &self.interference_breaks(t.abs()), REL_TOL, 0.0, MAX_INTERVALS);
        self.finish([sig, int])
    }

    fn strip(&self) -> (f64, f64) {
        match self.fading {
            FadingModel::Gamma { rate, .. } => {
                let g = &self.geom;
                (-rate * g.r_coop.powf(g.alpha) / (self.theta * g.power), rate * g.a.powf(g.alpha) / g.power)
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// An empty window leaves Ω = 0.
    fn atom(&self, omega: f64) -> f64 {
        match self.geom.window {
            Some(w) if omega == 0.0 => {
                let g = &self.geom;
                (-g.lambda * PI * (w * w - g.a * g.a)).exp()
            }
            _ => 0.0,
        }
    }

    fn t_scale(&self) -> f64 {
        self.geom.a.powf(self.geom.alpha) / self.geom.power
    }

    fn cumulants(&self, order: usize) -> Result<CumulantSet> {
        omega_cumulants(&self.geom, &self.fading, self.theta, order)
    }

    fn describe(&self) -> String {
        format!("radial {:?}, {:?}, theta={}", self.geom, self.fading, self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_geom() -> NetworkGeometry {
        NetworkGeometry::new(1.0, 1.0, 2.0, 4.0, 1.0).unwrap()
    }

    fn paper_geom(alpha: f64) -> NetworkGeometry {
        NetworkGeometry::new(200.0 / (PI * 1e6), 30.0, 150.0, alpha, 1.0).unwrap()
    }

    #[test]
    fn eval_at_zero() {
        let m = RadialCgf::case_b(unit_geom(), 1.0).unwrap();
        assert_eq!(m.eval(Complex64::new(0.0, 0.0)).unwrap().norm(), 0.0);
    }

    #[test]
    fn first_derivative_at_zero() {
        let m = RadialCgf::case_b(unit_geom(), 1.0).unwrap();
        assert_relative_eq!(m.deriv(1, 0.0).unwrap(), PI / 2.0, max_relative = 1e-10);
        assert_relative_eq!(m.deriv_closed_form(1, 1e-9).unwrap(), PI / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn closed_form_matches_finite_difference() {
        let m = RadialCgf::case_b(paper_geom(4.0), 1.0).unwrap();
        let t = 0.1;
        let h = 1e-4 * t;
        let k = |x: f64| m.eval(Complex64::new(x, 0.0)).unwrap().re;
        let fd = (k(t + h) - k(t - h)) / (2.0 * h);
        assert_relative_eq!(m.deriv_closed_form(1, t).unwrap(), fd, max_relative = 1e-6);
        for &t in &[-3e5, -1e4, 1e3, 1e5, 4e6] {
            for n in 1..=3 {
                assert_relative_eq!(m.deriv_closed_form(n, t).unwrap(), m.deriv(n, t).unwrap(), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn unit_gain_gamma_limit_consistency() {
        // Case C with deterministic gains is Case B
        let g = paper_geom(3.5).with_window(1000.0).unwrap();
        let b = RadialCgf::case_b(g, 2.0).unwrap();
        let c = RadialCgf::case_c(g, FadingModel::Unit, 2.0).unwrap();
        for &tau in &[0.0, 1e2, 3e4, 1e6] {
            let t = Complex64::new(tau * 0.3, tau);
            assert!((b.eval(t).unwrap() - c.eval(t).unwrap()).norm() <= 1e-12 * b.eval(t).unwrap().norm().max(1e-300));
        }
    }

    #[test]
    fn derivatives_at_zero_are_cumulants() {
        let f = FadingModel::gamma(1.5, 0.7).unwrap();
        for geom in [paper_geom(4.0), paper_geom(3.0).with_window(1000.0).unwrap()] {
            let m = RadialCgf::case_c(geom, f, 0.8).unwrap();
            for n in 1..=4 {
                let k = omega_cumulant(n, &geom, &f, 0.8).unwrap();
                let want = if n % 2 == 0 { k } else { -k };
                assert_relative_eq!(m.deriv(n, 0.0).unwrap(), want, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn rotated_contour_matches_direct_quadrature() {
        for geom in [paper_geom(4.0), paper_geom(3.0).with_window(1000.0).unwrap()] {
            let m = RadialCgf::case_b(geom, 2.0).unwrap();
            for &tau in &[3e4, -3e4, 5e6, 1e8] {
                let tau = tau * m.t_scale() / 1e6;
                let via_split = m.eval(Complex64::new(0.0, tau)).unwrap();
                // a vanishing real part forces the plain quadrature path
                let direct = m.eval(Complex64::new(1e-300, tau)).unwrap();
                assert!((via_split - direct).norm() <= 1e-9 * direct.norm().max(1e-3), "{tau}: {via_split} {direct}");
            }
            // far beyond where plain quadrature can resolve the phase
            let k = m.eval(Complex64::new(0.0, 1e6 * m.t_scale())).unwrap();
            assert!(k.exp().norm() <= 1.0);
        }
    }

    #[test]
    fn lognormal_rejected() {
        let f = FadingModel::lognormal(0.0, 1.0).unwrap();
        assert!(matches!(RadialCgf::case_c(paper_geom(4.0), f, 1.0), Err(Error::Capability(_))));
    }

    #[test]
    fn gamma_strip() {
        let f = FadingModel::gamma(1.0, 1.0).unwrap();
        let m = RadialCgf::case_c(paper_geom(4.0), f, 1.0).unwrap();
        let (lo, hi) = m.strip();
        assert_relative_eq!(hi, 30f64.powi(4), max_relative = 1e-14);
        assert!(lo < 0.0);
        assert!(m.deriv(1, hi * 1.01).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn characteristic_bound(tau in 0.0f64..1e7, shape in 0.5f64..3.0) {
            let f = FadingModel::gamma(shape, 1.0).unwrap();
            let m = RadialCgf::case_c(paper_geom(3.5), f, 1.0).unwrap();
            let k = m.eval(Complex64::new(0.0, tau)).unwrap();
            prop_assert!(k.exp().norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn convexity(frac in -0.9f64..0.9) {
            let f = FadingModel::gamma(2.0, 1.0).unwrap();
            let m = RadialCgf::case_c(paper_geom(4.0), f, 1.0).unwrap();
            let (lo, hi) = m.strip();
            let t = if frac < 0.0 { -frac * lo } else { frac * hi };
            prop_assert!(m.deriv(2, t).unwrap() > 0.0);
            let b = RadialCgf::case_b(paper_geom(4.0), 1.0).unwrap();
            prop_assert!(b.deriv(2, frac * 1e7).unwrap() > 0.0);
        }
    }
}
