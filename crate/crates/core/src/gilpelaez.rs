//! Characteristic-function inversion for the CCDF of Ω.
//!
//! Q(ω) = P(Ω > ω) = ½ + (1/π)∫_0^∞ Im{φ(τ)e^{−jτω}}/τ dτ with
//! φ(τ) = E[e^{jτΩ}] = exp(K(−jτ)). At an atom of Ω the integral gives the
//! midpoint P(Ω > ω) + ½P(Ω = ω); [`CgfModel::atom`] removes the half.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::cgf::CgfModel;
use crate::error::{arg_err, Error, Result};
use crate::quad::integrate;
use crate::result::{clamp_prob, Method, OutageResult};

const MAX_INTERVALS_PER_PANEL: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    /// Accuracy target, relative to max(Q, 0.01).
    pub rel_tol: f64,
    /// Hard truncation of the τ range. `None` grows panels until the
    /// integrand has died out.
    pub t_max: Option<f64>,
    pub max_panels: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-8, t_max: None, max_panels: 64 }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 1e-12 && self.rel_tol < 1e-2) {
            return arg_err(format!("rel_tol must lie in (1e-12, 1e-2), got {}", self.rel_tol));
        }
        if self.max_panels < 8 {
            return arg_err(format!("max_panels must be at least 8, got {}", self.max_panels));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0) {
                return arg_err(format!("t_max must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

/// Unclamped inversion result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub q: f64,
    pub err: f64,
    pub panels: usize,
}

/// P(Ω > ω) before clamping, with its error estimate.
pub fn invert(cgf: &dyn CgfModel, omega: f64, cfg: &InversionConfig) -> Result<Inversion> {
    cfg.validate()?;
    let kappa1 = -cgf.deriv(1, 0.0)?;
    let kappa2 = cgf.deriv(2, 0.0)?;
    if !(kappa2 > 0.0) {
        return Err(Error::Numeric(format!("non-positive variance {kappa2}")));
    }
    let sigma = kappa2.sqrt();
    let m = kappa1 - omega;

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |tau: f64| -> f64 {
        if failure.borrow().is_some() {
            return 0.0;
        }
        match cgf.eval(Complex64::new(0.0, -tau)) {
            Ok(k) => (k - Complex64::new(0.0, tau * omega)).exp().im / tau,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };

    // Near 0 the integrand is m − O(τ²); the quadratic term is below 1e-12
    // relative on [0, t0].
    let t0 = 1e-6 / sigma.max(m.abs());
    let mut total = m * t0;
    let mut err = 0.0;
    let mut lo = t0;
    let mut hi = 1.0 / sigma;
    let mut quiet = 0;
    let mut panels = 0;
    loop {
        if let Some(t_max) = cfg.t_max {
            hi = hi.min(t_max);
        }
        let q_hat = 0.5 + total / std::f64::consts::PI;
        let target = std::f64::consts::PI * cfg.rel_tol * q_hat.abs().max(0.01);
        let r = integrate(integrand, lo, hi, 0.0, 0.1 * target, MAX_INTERVALS_PER_PANEL);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        total += r.value;
        err += r.err;
        panels += 1;
        let truncated = cfg.t_max.is_some_and(|t| hi >= t);
        if r.abs_integral < 0.01 * target {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 2 || truncated {
            // what is left beyond hi is bounded by the last panel's envelope
            err += r.abs_integral;
            break;
        }
        if panels >= cfg.max_panels {
            err += r.abs_integral;
            let q = 0.5 + total / std::f64::consts::PI;
            return Err(Error::Accuracy { partial: q, err_estimate: err / std::f64::consts::PI });
        }
        lo = hi;
        hi *= 2.0;
    }
    let q = 0.5 + total / std::f64::consts::PI - 0.5 * cgf.atom(omega);
    let err = err / std::f64::consts::PI;
    if err > cfg.rel_tol * q.abs().max(0.01) {
        return Err(Error::Accuracy { partial: q, err_estimate: err });
    }
    Ok(Inversion { q, err, panels })
}

/// P(Ω > ω) clamped to [0, 1], with its error estimate.
pub fn ccdf(cgf: &dyn CgfModel, omega: f64, cfg: &InversionConfig) -> Result<(f64, f64)> {
    let inv = invert(cgf, omega, cfg)?;
    Ok((clamp_prob(inv.q).0, inv.err))
}

/// P_out = P(Ω > eval_point); eval_point is 0 for SIR and −θσ² for SINR.
pub fn outage_gp(cgf: &dyn CgfModel, eval_point: f64, cfg: &InversionConfig) -> Result<OutageResult> {
    let inv = invert(cgf, eval_point, cfg)?;
    let (p, clamped) = clamp_prob(inv.q);
    let mut out = OutageResult::new(p, Method::GilPelaez);
    out.err_estimate = Some(inv.err);
    out.panels = Some(inv.panels);
    if clamped {
        out.note(format!("clamped from {:e}", inv.q));
    }
    Ok(out)
}
