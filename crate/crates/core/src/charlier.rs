//! Charlier (orthogonal polynomial) reconstruction of a distribution from its
//! moments, against a Gaussian or Student-t base weight.
//!
//! With F(x) = Σ_k a_k ∫_{−∞}^x φ_k w and a_k = (1/C_k) Σ_i φ_{ki} μ_i, the
//! CDF only needs the incomplete moments ∫_{−∞}^x t^i w(t) dt of the weight.

use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::beta::beta_reg;

use crate::cumulants::{cumulants_to_moments, CumulantSet, MomentSet};
use crate::error::{arg_err, Error, Result};
use crate::quad::integrate;
use crate::result::{clamp_prob, CharlierBase, Method, OutageResult};
use crate::specfun::{beta_fn, log_gamma, normal_cdf, normal_pdf};

pub const DEFAULT_ORDER: usize = 6;
/// Footnote and quadrature norms may disagree by this much before the
/// quadrature value is flagged.
const NORM_AGREEMENT: f64 = 1e-6;

/// φ(x) = Σ_i coeffs[i] x^i.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap_or(&0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// He_n against the standard normal density.
    Hermite,
    /// Student-t weight (1 + x²/v)^{−(v+1)/2}, unnormalized.
    Krishnamoorthy { v: u32 },
    /// Weight solving w′/w = (a0 + a1x)/(b0 + b1x + b2x²).
    Pearson { a0: f64, a1: f64, b0: f64, b1: f64, b2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalSystem {
    pub family: Family,
    pub polys: Vec<Polynomial>,
    /// C_k = ∫ φ_k² w.
    pub norms: Vec<f64>,
    pub notes: Vec<String>,
}

impl OrthogonalSystem {
    pub fn max_degree(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn weight(&self, x: f64) -> f64 {
        weight(&self.family, x)
    }

    /// max_{m≠n} |∫φ_mφ_n w| / √(C_mC_n), by quadrature.
    pub fn orthogonality_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for m in 0..self.polys.len() {
            for n in 0..m {
                let (p, q) = (&self.polys[m], &self.polys[n]);
                let ip = weighted_integral(&self.family, |x| p.eval(x) * q.eval(x))?;
                worst = worst.max(ip.abs() / (self.norms[m] * self.norms[n]).sqrt());
            }
        }
        Ok(worst)
    }
}

fn weight(family: &Family, x: f64) -> f64 {
    match *family {
        Family::Hermite => normal_pdf(x),
        Family::Krishnamoorthy { v } => {
            let v = v as f64;
            (1.0 + x * x / v).powf(-(v + 1.0) / 2.0)
        }
        Family::Pearson { a0, a1, b0, b1: _, b2 } => {
            if b2 == 0.0 {
                ((a0 * x + 0.5 * a1 * x * x) / b0).exp()
            } else {
                let r = (b0 * b2).sqrt();
                (a0 / r * (x * (b2 / b0).sqrt()).atan()).exp() * ((b0 + b2 * x * x) / b0).powf(a1 / (2.0 * b2))
            }
        }
    }
}

/// ∫ f w over the real line.
fn weighted_integral(family: &Family, f: impl Fn(f64) -> f64) -> Result<f64> {
    let r = match *family {
        Family::Hermite => integrate(|x: f64| f(x) * normal_pdf(x), -40.0, 40.0, 1e-13, 0.0, 2000),
        Family::Pearson { a0, a1, b0, b2: 0.0, .. } => {
            // Gaussian-type weight centred at −a0/a1 with variance −b0/a1
            let (centre, sd) = (-a0 / a1, (-b0 / a1).sqrt());
            integrate(|x: f64| f(x) * weight(family, x), centre - 40.0 * sd, centre + 40.0 * sd, 1e-13, 0.0, 2000)
        }
        _ => {
            // x = √(b0/b2) tan ϑ turns the algebraic tails into a finite range
            let k = match *family {
                Family::Krishnamoorthy { v } => (v as f64).sqrt(),
                Family::Pearson { b0, b2, .. } => (b0 / b2).sqrt(),
                Family::Hermite => unreachable!(),
            };
            integrate(
                |th: f64| {
                    let x = k * th.tan();
                    let c = th.cos();
                    if c == 0.0 {
                        return 0.0;
                    }
                    f(x) * weight(family, x) * k / (c * c)
                },
                -FRAC_PI_2,
                FRAC_PI_2,
                1e-13,
                0.0,
                4000,
            )
        }
    };
    if !r.converged {
        return Err(Error::Numeric(format!("weighted quadrature did not converge (err {:e})", r.err)));
    }
    Ok(r.value)
}

/// He_0..He_max with C_n = n!.
pub fn hermite_system(max_order: usize) -> OrthogonalSystem {
    let mut polys = vec![Polynomial::new(vec![1.0])];
    if max_order >= 1 {
        polys.push(Polynomial::new(vec![0.0, 1.0]));
    }
    for n in 1..max_order {
        // He_{n+1} = x He_n − n He_{n−1}
        let mut c = vec![0.0; n + 2];
        for (i, a) in polys[n].coeffs.iter().enumerate() {
            c[i + 1] += a;
        }
        for (i, a) in polys[n - 1].coeffs.iter().enumerate() {
            c[i] -= n as f64 * a;
        }
        polys.push(Polynomial::new(c));
    }
    let mut norms = vec![1.0];
    for n in 1..=max_order {
        norms.push(norms[n - 1] * n as f64);
    }
    OrthogonalSystem { family: Family::Hermite, polys, norms, notes: Vec::new() }
}

/// Polynomial solutions R_0..R_max of the hypergeometric equation
/// D y″ + (N + D′) y′ + λ_n y = 0 attached to the Pearson weight w′/w = N/D,
/// N = a0 + a1x, D = b0 + b1x + b2x², in Rodrigues normalization
/// R_n = (1/w) dⁿ/dxⁿ [Dⁿ w].
///
/// Coefficients follow from the leading one downwards; a family whose
/// equation has no degree-n solution (t weight with 2n − 1 ≥ v) is an error.
pub fn pearson_orthopoly(a0: f64, a1: f64, b0: f64, b1: f64, b2: f64, max_order: usize) -> Result<OrthogonalSystem> {
    if max_order < 1 {
        return arg_err("pearson_orthopoly needs max_order >= 1");
    }
    let family = Family::Pearson { a0, a1, b0, b1, b2 };
    let polys = pearson_polys(a0, a1, b0, b1, b2, max_order)?;
    let supported = b1 == 0.0 && b0 > 0.0 && ((b2 == 0.0 && a1 < 0.0) || b2 > 0.0);
    if !supported {
        return Err(Error::Capability(
            "norms are available for the Gaussian (b1 = b2 = 0) and Student-t (b1 = 0, b2 > 0) weights only".into(),
        ));
    }
    let norms = polys
        .iter()
        .map(|p| weighted_integral(&family, |x| p.eval(x).powi(2)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(k) = norms.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::Divergence(format!("degree {k} polynomial has no finite norm under this weight")));
    }
    Ok(OrthogonalSystem { family, polys, norms, notes: Vec::new() })
}

fn pearson_polys(a0: f64, a1: f64, b0: f64, b1: f64, b2: f64, max_order: usize) -> Result<Vec<Polynomial>> {
    let (t0, t1) = (a0 + b1, a1 + 2.0 * b2);
    let mut polys = Vec::with_capacity(max_order + 1);
    for n in 0..=max_order {
        let lead: f64 = (0..n).map(|k| t1 + (n + k) as f64 * b2 - b2).product();
        if lead == 0.0 || !lead.is_finite() {
            return Err(Error::Divergence(format!("no polynomial of degree {n} for this weight")));
        }
        let mut c = vec![0.0; n + 3];
        c[n] = lead;
        for k in (0..n).rev() {
            let denom = (k as f64 - n as f64) * (t1 + (k + n) as f64 * b2 - b2);
            if denom == 0.0 {
                return Err(Error::Divergence(format!("no polynomial of degree {n} for this weight")));
            }
            let kf = k as f64;
            let rhs = c[k + 2] * (kf + 2.0) * (kf + 1.0) * b0 + c[k + 1] * (kf + 1.0) * (kf * b1 + t0);
            c[k] = -rhs / denom;
        }
        c.truncate(n + 1);
        polys.push(Polynomial::new(c));
    }
    Ok(polys)
}

/// Highest degree with a finite norm under the t weight: 2n < v.
pub fn krishnamoorthy_max_degree(v: u32) -> usize {
    (v as usize).div_ceil(2) - 1
}

/// C_n = 2^{1−v+2n} π √v Γ(n+1) Γ(v−n+1) / ((v − 2n) Γ²((v+1)/2 − n)).
pub fn krishnamoorthy_footnote_norm(v: u32, n: usize) -> Result<f64> {
    let (vf, nf) = (v as f64, n as f64);
    if 2.0 * nf >= vf {
        return Err(Error::Divergence(format!("T_{n} has infinite norm for v = {v}")));
    }
    let ln = (1.0 - vf + 2.0 * nf) * 2f64.ln() + PI.ln() + 0.5 * vf.ln() + log_gamma(nf + 1.0)? + log_gamma(vf - nf + 1.0)?
        - (vf - 2.0 * nf).ln()
        - 2.0 * log_gamma((vf + 1.0) / 2.0 - nf)?;
    Ok(ln.exp())
}

/// T_0..T_K, K = min(max_order, largest n with 2n < v), normalized as
/// T_n(x) = (−1)^n v^{−n/2} R_n(x) so that T_1 = (v − 1)x/√v. Norms come from
/// quadrature; the closed-form norm is checked against them.
pub fn krishnamoorthy_system(v: u32, max_order: usize) -> Result<OrthogonalSystem> {
    if v < 5 {
        return arg_err(format!("Krishnamoorthy polynomials need v >= 5, got {v}"));
    }
    let k_max = krishnamoorthy_max_degree(v).min(max_order);
    let vf = v as f64;
    let raw = pearson_polys(0.0, -(vf + 1.0), vf, 0.0, 1.0, k_max)?;
    let polys: Vec<Polynomial> = raw
        .iter()
        .enumerate()
        .map(|(n, p)| p.scaled(if n % 2 == 0 { 1.0 } else { -1.0 } * vf.powf(-(n as f64) / 2.0)))
        .collect();
    let family = Family::Krishnamoorthy { v };
    let mut notes = Vec::new();
    let mut norms = Vec::with_capacity(polys.len());
    for (n, p) in polys.iter().enumerate() {
        let quad = weighted_integral(&family, |x| p.eval(x).powi(2))?;
        let foot = krishnamoorthy_footnote_norm(v, n)?;
        if ((foot - quad) / quad).abs() > NORM_AGREEMENT {
            notes.push(format!("C_{n}: closed form {foot:e} disagrees with quadrature {quad:e}; using quadrature"));
        }
        norms.push(quad);
    }
    Ok(OrthogonalSystem { family, polys, norms, notes })
}

/// a_k = (1/C_k) Σ_i φ_{ki} μ_i.
pub fn orthogonal_moments(system: &OrthogonalSystem, moments: &MomentSet) -> Result<Vec<f64>> {
    if moments.order() < system.max_degree() {
        return arg_err(format!(
            "expansion to degree {} needs moments to that order, have {}",
            system.max_degree(),
            moments.order()
        ));
    }
    Ok(system
        .polys
        .iter()
        .zip(&system.norms)
        .map(|(p, c)| p.coeffs.iter().enumerate().map(|(i, f)| f * moments.m(i)).sum::<f64>() / c)
        .collect())
}

/// ∫_{−∞}^w x^n φ(x) dx for n = 0..=n_max, standard normal φ.
pub fn hermite_incomplete_moments(w: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let pdf = normal_pdf(w);
    out.push(normal_cdf(w));
    if n_max >= 1 {
        out.push(-pdf);
    }
    for n in 2..=n_max {
        let v = -w.powi(n as i32 - 1) * pdf + (n - 1) as f64 * out[n - 2];
        out.push(v);
    }
    out
}

/// ∫_{−∞}^w x^n (1 + x²/v)^{−(v+1)/2} dx for n = 0..=n_max (< v), by parts:
/// J_n = [v(n−1)J_{n−2} − v w^{n−1}(1 + w²/v)^{−(v−1)/2}]/(v − n).
pub fn t_incomplete_moments(w: f64, v: u32, n_max: usize) -> Result<Vec<f64>> {
    let vf = v as f64;
    if n_max as f64 >= vf {
        return Err(Error::Divergence(format!("incomplete moment of order {n_max} diverges for v = {v}")));
    }
    let c0 = vf.sqrt() * beta_fn(0.5, vf / 2.0)?;
    let tail = 0.5 * beta_reg(vf / 2.0, 0.5, vf / (vf + w * w));
    let cdf = if w < 0.0 { tail } else { 1.0 - tail };
    let edge = (1.0 + w * w / vf).powf(-(vf - 1.0) / 2.0);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(c0 * cdf);
    if n_max >= 1 {
        out.push(-vf / (vf - 1.0) * edge);
    }
    for n in 2..=n_max {
        let nf = n as f64;
        out.push((vf * (nf - 1.0) * out[n - 2] - vf * w.powi(n as i32 - 1) * edge) / (vf - nf));
    }
    Ok(out)
}

fn incomplete_moments(system: &OrthogonalSystem, w: f64) -> Result<Vec<f64>> {
    let k = system.max_degree();
    match system.family {
        Family::Hermite => Ok(hermite_incomplete_moments(w, k)),
        Family::Krishnamoorthy { v } => t_incomplete_moments(w, v, k),
        Family::Pearson { .. } => Err(Error::Capability("CDF evaluation needs the Hermite or Krishnamoorthy system".into())),
    }
}

/// F(w) = Σ_k a_k Σ_i φ_{ki} J_i(w) for the expansion with orthogonal moments
/// `a`.
pub fn expansion_cdf(system: &OrthogonalSystem, a: &[f64], w: f64) -> Result<f64> {
    let j = incomplete_moments(system, w)?;
    Ok(system
        .polys
        .iter()
        .zip(a)
        .map(|(p, ak)| ak * p.coeffs.iter().zip(&j).map(|(c, ji)| c * ji).sum::<f64>())
        .sum())
}

/// Reconstructed density w(x) Σ a_k φ_k(x).
pub fn expansion_pdf(system: &OrthogonalSystem, a: &[f64], x: f64) -> f64 {
    system.weight(x) * system.polys.iter().zip(a).map(|(p, ak)| ak * p.eval(x)).sum::<f64>()
}

/// Whether to standardize Ω before expanding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CharlierMode {
    /// Expand Ω′ = (Ω − κ_1)/√κ_2 (scaled to the t variance for the t base).
    #[default]
    Standardized,
    /// Plug the raw moments of Ω into the base as is.
    PaperLiteral,
}

/// v = round(6/ExKurt + 4), at least 5.
pub fn t_degrees_of_freedom(cumulants: &CumulantSet) -> Result<u32> {
    let ek = cumulants
        .excess_kurtosis()
        .ok_or_else(|| Error::Argument("degrees of freedom need cumulants to order 4".into()))?;
    if !(ek > 0.0) {
        return Err(Error::Capability(format!(
            "excess kurtosis {ek} is not positive; the t base needs a leptokurtic target, use the Hermite base"
        )));
    }
    let v = (6.0 / ek + 4.0).round();
    Ok(if v.is_finite() { v.clamp(5.0, u32::MAX as f64) as u32 } else { u32::MAX })
}

fn finish(system: &OrthogonalSystem, a: &[f64], cdf_at: f64, unit: f64, base: CharlierBase) -> Result<OutageResult> {
    let f = expansion_cdf(system, a, cdf_at)?;
    let (p, clamped) = clamp_prob(1.0 - f);
    let mut out = OutageResult::new(p, Method::Charlier(base));
    out.order = Some(system.max_degree());
    out.notes.extend(system.notes.iter().cloned());
    if clamped {
        out.note(format!("clamped from {:e}", 1.0 - f));
    }
    let min_density = (0..=240)
        .map(|i| {
            let u = -6.0 + 0.05 * i as f64;
            expansion_pdf(system, a, u * unit) * unit
        })
        .fold(f64::INFINITY, f64::min);
    if min_density < 0.0 {
        out.note(format!("reconstructed density dips to {min_density:e}"));
    }
    Ok(out)
}

/// P_out = 1 − F(eval_point) from the Gram-Charlier series in He_0..He_K
/// about the standard normal, with the raw moments given.
pub fn outage_hermite(moments: &MomentSet, eval_point: f64, max_order: usize) -> Result<OutageResult> {
    if max_order > moments.order() {
        return arg_err(format!("order {max_order} needs moments to that order, have {}", moments.order()));
    }
    let system = hermite_system(max_order);
    let a = orthogonal_moments(&system, moments)?;
    finish(&system, &a, eval_point, 1.0, CharlierBase::Hermite)
}

/// P_out = 1 − F(eval_point) from the Krishnamoorthy series about t_v, with
/// v from the excess kurtosis in `cumulants` and the raw moments given.
pub fn outage_krishnamoorthy(
    moments: &MomentSet,
    cumulants: &CumulantSet,
    eval_point: f64,
    max_order: usize,
) -> Result<OutageResult> {
    let v = t_degrees_of_freedom(cumulants)?;
    let system = krishnamoorthy_system(v, max_order.min(moments.order()))?;
    let a = orthogonal_moments(&system, moments)?;
    let mut out = finish(&system, &a, eval_point, 1.0, CharlierBase::StudentT)?;
    out.note(format!("v = {v}"));
    Ok(out)
}

/// Charlier outage from the cumulants of Ω.
pub fn outage_charlier(
    cumulants: &CumulantSet,
    eval_point: f64,
    base: CharlierBase,
    mode: CharlierMode,
    order: usize,
) -> Result<OutageResult> {
    if order < 2 {
        return arg_err(format!("truncation order must be at least 2, got {order}"));
    }
    if order > cumulants.order() {
        return arg_err(format!("order {order} needs cumulants to that order, have {}", cumulants.order()));
    }
    let sd = cumulants.variance().filter(|v| *v > 0.0).map(f64::sqrt).ok_or_else(|| Error::Argument("κ_2 must be positive".into()))?;
    match (base, mode) {
        (_, CharlierMode::PaperLiteral) => {
            let m = cumulants_to_moments(cumulants);
            match base {
                CharlierBase::Hermite => outage_hermite(&m, eval_point, order),
                CharlierBase::StudentT => outage_krishnamoorthy(&m, cumulants, eval_point, order),
            }
        }
        (CharlierBase::Hermite, CharlierMode::Standardized) => {
            let m = cumulants_to_moments(&cumulants.standardized()?);
            outage_hermite(&m, (eval_point - cumulants.mean()) / sd, order)
        }
        (CharlierBase::StudentT, CharlierMode::Standardized) => {
            let v = t_degrees_of_freedom(cumulants)?;
            let vf = v as f64;
            // match the t variance v/(v − 2) so that a_1 = a_2 = 0
            let unit = (vf / (vf - 2.0)).sqrt();
            let z = cumulants.standardized()?;
            let scaled = CumulantSet::new(z.kappa.iter().enumerate().map(|(i, k)| k * unit.powi(i as i32 + 1)).collect())?;
            let m = cumulants_to_moments(&scaled);
            let system = krishnamoorthy_system(v, order)?;
            let a = orthogonal_moments(&system, &m)?;
            let mut out = finish(&system, &a, (eval_point - cumulants.mean()) / sd * unit, unit, CharlierBase::StudentT)?;
            out.note(format!("v = {v}"));
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn t_moments(v: f64, order: usize) -> MomentSet {
        // E X^{2k} = v^k Γ(k+½)Γ(v/2−k)/(Γ(½)Γ(v/2))
        let mut mu = vec![1.0];
        for n in 1..=order {
            mu.push(if n % 2 == 1 {
                0.0
            } else {
                let k = (n / 2) as f64;
                v.powf(k) * gamma(k + 0.5).unwrap() * gamma(v / 2.0 - k).unwrap() / (gamma(0.5).unwrap() * gamma(v / 2.0).unwrap())
            });
        }
        MomentSet::new(mu).unwrap()
    }

    #[test]
    fn hermite_coefficients() {
        let h = hermite_system(4);
        assert_eq!(h.polys[2].coeffs, vec![-1.0, 0.0, 1.0]);
        assert_eq!(h.polys[4].coeffs, vec![3.0, 0.0, -6.0, 0.0, 1.0]);
        let p3 = &h.polys[3];
        let c3 = weighted_integral(&Family::Hermite, |x| p3.eval(x).powi(2)).unwrap();
        assert_relative_eq!(c3, 6.0, max_relative = 1e-12);
        assert!(h.orthogonality_residual().unwrap() < 1e-12);
    }

    #[test]
    fn krishnamoorthy_low_orders() {
        let s = krishnamoorthy_system(10, 8).unwrap();
        assert_eq!(s.max_degree(), 4);
        assert_relative_eq!(s.polys[1].coeffs[1], 9.0 / 10f64.sqrt(), max_relative = 1e-14);
        // monic forms from P_{n+1} = xP_n − b_n P_{n−1}, b_n = v n(v+1−n)/((v−2n)(v−2n+2))
        let monic = [vec![-1.25, 0.0, 1.0], vec![0.0, -5.0, 0.0, 1.0], vec![12.5, 0.0, -15.0, 0.0, 1.0]];
        for (n, want) in (2..=4).zip(monic.iter()) {
            let p = &s.polys[n];
            for (c, w) in p.coeffs.iter().zip(want) {
                assert!((c / p.leading() - w).abs() <= 1e-10 * w.abs().max(1.0), "T_{n}: {:?}", p.coeffs);
            }
        }
        assert!(s.notes.is_empty(), "{:?}", s.notes);
        assert!(s.orthogonality_residual().unwrap() < 1e-10);
    }

    #[test]
    fn footnote_norms_match_quadrature() {
        for v in [5, 6, 10, 12, 16, 25] {
            let s = krishnamoorthy_system(v, 8).unwrap();
            for (n, c) in s.norms.iter().enumerate() {
                assert_relative_eq!(krishnamoorthy_footnote_norm(v, n).unwrap(), *c, max_relative = 1e-9);
            }
        }
        assert_relative_eq!(
            krishnamoorthy_footnote_norm(10, 0).unwrap(),
            10f64.sqrt() * beta_fn(0.5, 5.0).unwrap(),
            max_relative = 1e-13
        );
        assert!(krishnamoorthy_footnote_norm(10, 5).is_err());
    }

    #[test]
    fn printed_recurrence_is_not_orthogonal() {
        // T_{n+1} = (n+v+1)xT_n − n(n+v)(x²+v)T_{n−1} with T_1 = (v+1)x gives
        // T_2 = 121x² − 110 at v = 10, which is not orthogonal to T_0
        let fam = Family::Krishnamoorthy { v: 10 };
        let ip = weighted_integral(&fam, |x| 121.0 * x * x - 110.0).unwrap();
        let c0 = weighted_integral(&fam, |_| 1.0).unwrap();
        assert!(ip.abs() / c0 > 1.0);
    }

    #[test]
    fn pearson_reproduces_both_families() {
        let p = pearson_orthopoly(0.0, -1.0, 1.0, 0.0, 0.0, 6).unwrap();
        let h = hermite_system(6);
        for n in 0..=6 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for (a, b) in p.polys[n].coeffs.iter().zip(&h.polys[n].coeffs) {
                assert!((a - sign * b).abs() <= 1e-10 * b.abs().max(1.0));
            }
        }
        assert!(p.orthogonality_residual().unwrap() < 1e-10);
        for v in [10u32, 12, 16] {
            let vf = v as f64;
            let p = pearson_orthopoly(0.0, -(vf + 1.0), vf, 0.0, 1.0, krishnamoorthy_max_degree(v)).unwrap();
            let k = krishnamoorthy_system(v, 16).unwrap();
            for n in 0..=k.max_degree() {
                let ratio = k.polys[n].leading() / p.polys[n].leading();
                for (a, b) in p.polys[n].coeffs.iter().zip(&k.polys[n].coeffs) {
                    assert!((a * ratio - b).abs() <= 1e-10 * b.abs().max(1.0));
                }
            }
        }
        // the t equation has no degree-n solution once 2n − 1 >= v
        assert!(pearson_orthopoly(0.0, -11.0, 10.0, 0.0, 1.0, 6).is_err());
        assert!(matches!(pearson_orthopoly(0.0, -1.0, 1.0, 1.0, 1.0, 2), Err(Error::Capability(_))));
    }

    #[test]
    fn incomplete_moments_at_zero() {
        // ∫_{−∞}^0 x^n φ = (−1)^n 2^{(n−1)/2} Γ((n+1)/2) / √(2π)
        let h = hermite_incomplete_moments(0.0, 8);
        for (n, got) in h.iter().enumerate() {
            let nf = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let want = sign * 2f64.powf((nf - 1.0) / 2.0) * gamma((nf + 1.0) / 2.0).unwrap() / (2.0 * PI).sqrt();
            assert_relative_eq!(*got, want, max_relative = 1e-13);
        }
        // J_n(0) = (−1)^n v^{(n+1)/2} B((v−n)/2, (n+1)/2) / 2
        let v = 12u32;
        let j = t_incomplete_moments(0.0, v, 8).unwrap();
        for (n, got) in j.iter().enumerate() {
            let (vf, nf) = (v as f64, n as f64);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let want = sign * vf.powf((nf + 1.0) / 2.0) * beta_fn((vf - nf) / 2.0, (nf + 1.0) / 2.0).unwrap() / 2.0;
            assert_relative_eq!(*got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn t_incomplete_moments_by_quadrature() {
        let v = 9u32;
        for &w in &[-3.0, -0.4, 1.7] {
            let j = t_incomplete_moments(w, v, 6).unwrap();
            for (n, got) in j.iter().enumerate() {
                let f = |x: f64| x.powi(n as i32) * (1.0 + x * x / 9.0).powf(-5.0);
                let r = crate::quad::integrate_from_neg_inf(f, w, 1e-13, 0.0, 2000);
                assert_relative_eq!(*got, r.value, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn self_expansion_is_trivial() {
        let h = hermite_system(6);
        let normal = cumulants_to_moments(&CumulantSet::new(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap());
        let a = orthogonal_moments(&h, &normal).unwrap();
        assert_relative_eq!(a[0], 1.0, max_relative = 1e-14);
        assert!(a[1..].iter().all(|x| x.abs() < 1e-12));
        let s = krishnamoorthy_system(12, 8).unwrap();
        let a = orthogonal_moments(&s, &t_moments(12.0, 8)).unwrap();
        assert_relative_eq!(a[0] * s.norms[0], 1.0, max_relative = 1e-12);
        assert!(a[1..].iter().all(|x| x.abs() < 1e-9), "{a:?}");
        let r = outage_krishnamoorthy(&t_moments(12.0, 8), &CumulantSet::new(vec![0.0, 1.2, 0.0, 1.2 * 1.2 * 0.75]).unwrap(), 0.0, 8).unwrap();
        assert_relative_eq!(r.p_out, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn moment_matched_dof() {
        let k = CumulantSet::new(vec![0.0, 1.0, 0.0, 0.75]).unwrap();
        assert_eq!(t_degrees_of_freedom(&k).unwrap(), 12);
        let k = CumulantSet::new(vec![0.0, 1.0, 0.0, -0.2]).unwrap();
        assert!(matches!(t_degrees_of_freedom(&k), Err(Error::Capability(_))));
    }

    #[test]
    fn literal_mode_shifted_gaussian() {
        // N(−1, 1) raw moments against the standard normal weight
        let k = CumulantSet::new(vec![-1.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let r = outage_charlier(&k, 0.0, CharlierBase::Hermite, CharlierMode::PaperLiteral, 6).unwrap();
        assert!((r.p_out - 0.158_655_253_931_457_05).abs() < 2e-3, "{}", r.p_out);
    }

    #[test]
    fn cdf_agrees_with_hermite_identity() {
        // ∫_{−∞}^w He_k φ = −He_{k−1}(w)φ(w) for k ≥ 1
        let h = hermite_system(7);
        for &w in &[-2.0, 0.3, 1.9] {
            for k in 1..=7 {
                let mut a = vec![0.0; 8];
                a[k] = 1.0;
                let got = expansion_cdf(&h, &a, w).unwrap();
                assert_relative_eq!(got, -h.polys[k - 1].eval(w) * normal_pdf(w), max_relative = 1e-11, epsilon = 1e-14);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn gaussian_exactness(mean in -4.0f64..4.0, var in 0.01f64..10.0, w in -5.0f64..5.0, order in 2usize..=8) {
            let mut kappa = vec![mean, var];
            kappa.resize(8, 0.0);
            let k = CumulantSet::new(kappa).unwrap();
            let r = outage_charlier(&k, w, CharlierBase::Hermite, CharlierMode::Standardized, order).unwrap();
            prop_assert!((r.p_out - normal_cdf((mean - w) / var.sqrt())).abs() <= 1e-10);
        }

        #[test]
        fn order_two_is_plain_gaussian(k3 in -2.0f64..2.0, k4 in 0.0f64..5.0, w in -3.0f64..3.0) {
            let k = CumulantSet::new(vec![0.5, 2.0, k3, k4]).unwrap();
            let r = outage_charlier(&k, w, CharlierBase::Hermite, CharlierMode::Standardized, 2).unwrap();
            prop_assert!((r.p_out - normal_cdf((0.5 - w) / 2f64.sqrt())).abs() <= 1e-12);
        }

        #[test]
        fn orthogonality(v in 5u32..30) {
            let s = krishnamoorthy_system(v, 16).unwrap();
            prop_assert!(s.orthogonality_residual().unwrap() <= 1e-8);
        }
    }
}
