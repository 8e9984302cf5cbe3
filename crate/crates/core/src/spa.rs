//! Saddle point approximations to the CDF of Ω.
//!
//! Everything here works in the forward convention K̄(s) = K(−s) =
//! log E[e^{sΩ}], so K̄^{(n)}(s) = (−1)^n K^{(n)}(−s) and the textbook
//! Lugannani-Rice formula applies unchanged.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::cgf::CgfModel;
use crate::error::{Error, Result};
use crate::quad::integrate_to_inf;
use crate::result::{clamp_prob, BaseKind, Method, OutageResult};
use crate::specfun::{bessel_k1e, lambert_w, mills_ratio, normal_cdf, normal_pdf, WBranch};

/// Below this |ẑ| the normal-base correction is replaced by its limit.
const NEAR_MEAN: f64 = 1e-4;
/// Chi-square bases with more degrees of freedom than this are treated as
/// normal.
const MAX_CHISQ_DOF: f64 = 1e7;
const MAX_NEWTON: usize = 200;

/// Saddle point and local shape of K̄ at it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleContext {
    pub s_hat: f64,
    pub omega: f64,
    /// Legendre-Fenchel value ŝω − K̄(ŝ).
    pub c: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// k3²/k2³
    pub eta: f64,
    /// k4/k2²
    pub rho: f64,
    /// k3 or k4 came from finite differences.
    pub reduced_order: bool,
}

impl SaddleContext {
    /// sgn(ŝ)√(2c), the normal-base ẑ.
    pub fn w_hat(&self) -> f64 {
        sign(self.s_hat) * (2.0 * self.c).sqrt()
    }

    fn reflected(&self) -> SaddleContext {
        SaddleContext { s_hat: -self.s_hat, omega: -self.omega, k3: -self.k3, ..*self }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// K̄^{(n)}(s).
fn kbar(cgf: &dyn CgfModel, n: usize, s: f64) -> Result<f64> {
    let d = cgf.deriv(n, -s)?;
    Ok(if n % 2 == 1 { -d } else { d })
}

/// Solves K̄′(ŝ) = ω by Newton's method safeguarded with bisection on the
/// reflected strip. The residual target is 1e-10·max(|ω|, √K̄″(0)).
pub fn solve_saddle(cgf: &dyn CgfModel, omega: f64) -> Result<SaddleContext> {
    let (lo_t, hi_t) = cgf.strip();
    let (mut blo, mut bhi) = (-hi_t, -lo_t);
    let sd0 = kbar(cgf, 2, 0.0)?.sqrt();
    let tol = 1e-10 * omega.abs().max(sd0);

    let mut s = 0.0;
    if omega == 0.0 {
        if let Some(t) = cgf.closed_saddle() {
            s = -t;
        }
    }
    let mut converged = false;
    for _ in 0..MAX_NEWTON {
        let f = kbar(cgf, 1, s)? - omega;
        if f.abs() <= tol {
            converged = true;
            break;
        }
        if f < 0.0 {
            blo = s;
        } else {
            bhi = s;
        }
        let d = kbar(cgf, 2, s)?;
        let mut next = s - f / d;
        if !(next > blo && next < bhi) || !next.is_finite() {
            if blo.is_finite() && bhi.is_finite() {
                next = 0.5 * (blo + bhi);
            } else {
                // Newton left the bracket on its open side; step outwards
                let step = cgf.t_scale().max((s - next).abs());
                next = if f < 0.0 { s + step } else { s - step };
                if !(next > blo && next < bhi) {
                    next = if f < 0.0 { 0.5 * (s + bhi) } else { 0.5 * (s + blo) };
                }
            }
        }
        if next == s || (bhi - blo) <= 4.0 * f64::EPSILON * s.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        s = next;
    }
    if !converged {
        let f = kbar(cgf, 1, s)? - omega;
        if f.abs() > tol {
            return Err(Error::Saddle(format!(
                "no root of K'(s) = {omega} inside the strip (last s = {s:e}, residual {f:e})"
            )));
        }
    }
    context_at(cgf, s, omega)
}

fn context_at(cgf: &dyn CgfModel, s: f64, omega: f64) -> Result<SaddleContext> {
    let k0 = kbar(cgf, 0, s)?;
    let k2 = kbar(cgf, 2, s)?;
    if !(k2 > 0.0) {
        return Err(Error::Saddle(format!("K''(s) = {k2} is not positive at s = {s}")));
    }
    let mut reduced_order = false;
    let h = 1e-4 * cgf.t_scale().max(s.abs() * 1e-2).min(s.abs().max(cgf.t_scale()));
    let mut higher = |n: usize| -> Result<f64> {
        match kbar(cgf, n, s) {
            Ok(v) => Ok(v),
            Err(Error::Capability(_)) | Err(Error::Accuracy { .. }) => {
                reduced_order = true;
                let lower = |x: f64| kbar(cgf, n - 1, x);
                Ok((lower(s + h)? - lower(s - h)?) / (2.0 * h))
            }
            Err(e) => Err(e),
        }
    };
    let k3 = higher(3)?;
    let k4 = higher(4)?;
    let c = (s * omega - k0).max(0.0);
    let c = if s == 0.0 { 0.0 } else { c };
    Ok(SaddleContext {
        s_hat: s,
        omega,
        c,
        k2,
        k3,
        k4,
        eta: k3 * k3 / (k2 * k2 * k2),
        rho: k4 / (k2 * k2),
        reduced_order,
    })
}

/// A base distribution matched to a saddle context: its saddle ẑ, its own
/// saddle point s̆ and second derivative L″(s̆) there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseDistribution {
    Normal,
    /// χ² with `dof` degrees of freedom, fitted to the reflected target when
    /// the target is left-skewed.
    ChiSquare { dof: f64, z_hat: f64, s_base: f64, reflected: bool },
    /// Inverse Gaussian IG(μ, 1).
    InverseGaussian { mu: f64, z_hat: f64, s_base: f64, reflected: bool },
    /// NIG(α, β, 0, 1); `d` = √(α² − β²) − c and `e` = c + α√(1 + ẑ²).
    Nig { alpha: f64, beta: f64, z_hat: f64, s_base: f64, d: f64, e: f64 },
}

impl BaseDistribution {
    pub fn kind(&self) -> BaseKind {
        match self {
            BaseDistribution::Normal => BaseKind::Normal,
            BaseDistribution::ChiSquare { .. } => BaseKind::ChiSquare,
            BaseDistribution::InverseGaussian { .. } => BaseKind::InverseGaussian,
            BaseDistribution::Nig { .. } => BaseKind::Nig,
        }
    }
}

fn capability<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Capability(msg.into()))
}

/// Fits the base of the given kind to the context by matching the LF value
/// and the third (and for NIG, fourth) standardized derivative.
pub fn base_params(ctx: &SaddleContext, kind: BaseKind) -> Result<BaseDistribution> {
    match kind {
        BaseKind::Normal => Ok(BaseDistribution::Normal),
        BaseKind::ChiSquare => {
            if ctx.eta == 0.0 {
                return capability("chi-square base needs a skewed target");
            }
            let reflected = ctx.k3 < 0.0;
            let x = if reflected { ctx.reflected() } else { *ctx };
            let dof = 8.0 / x.eta;
            if !(dof <= MAX_CHISQ_DOF) {
                return capability(format!("chi-square base with {dof:e} degrees of freedom is indistinguishable from normal"));
            }
            let arg = -(-2.0 * x.c / dof - 1.0).exp();
            let branch = if x.s_hat > 0.0 { WBranch::Lower } else { WBranch::Principal };
            let z_hat = if x.c == 0.0 { dof } else { -dof * lambert_w(arg, branch)? };
            let s_base = 0.5 * (1.0 - dof / z_hat);
            Ok(BaseDistribution::ChiSquare { dof, z_hat, s_base, reflected })
        }
        BaseKind::InverseGaussian => {
            if ctx.eta == 0.0 {
                return capability("inverse Gaussian base needs a skewed target");
            }
            let reflected = ctx.k3 < 0.0;
            let x = if reflected { ctx.reflected() } else { *ctx };
            // the base's η at its saddle is 9ẑ
            let z_hat = x.eta / 9.0;
            let denom = 1.0 + sign(x.s_hat) * (2.0 * x.c * z_hat).sqrt();
            if !(denom > 0.0) {
                return capability("lower tail too far out for an inverse Gaussian base with this skewness");
            }
            let mu = z_hat / denom;
            let s_base = 0.5 * (1.0 / (mu * mu) - 1.0 / (z_hat * z_hat));
            Ok(BaseDistribution::InverseGaussian { mu, z_hat, s_base, reflected })
        }
        BaseKind::Nig => {
            let (eta, rho) = (ctx.eta, ctx.rho);
            if !(3.0 * rho > 5.0 * eta) {
                return capability(format!("NIG base needs 3ρ > 5η, got ρ = {rho}, η = {eta}"));
            }
            if eta == 0.0 {
                return capability("NIG base needs a skewed target");
            }
            let alpha = 9.0 / ((3.0 * rho - 5.0 * eta) * (3.0 * rho - 4.0 * eta)).sqrt();
            let z_hat = sign(ctx.k3) / (3.0 * rho / eta - 5.0).sqrt();
            let q = (1.0 + z_hat * z_hat).sqrt();
            let u = alpha * z_hat / q;
            // c = α√(1+ẑ²) − βẑ − √(α² − β²), quadratic in β after squaring
            let a_ = alpha * q - ctx.c;
            let disc = (alpha * alpha * q * q - a_ * a_).max(0.0);
            let mut pick = None;
            for root in [(a_ * z_hat + disc.sqrt()) / (q * q), (a_ * z_hat - disc.sqrt()) / (q * q)] {
                let gamma_ = (alpha * alpha - root * root).sqrt();
                let resid = alpha * q - root * z_hat - gamma_ - ctx.c;
                let s_base = u - root;
                let side_ok = ctx.c == 0.0 || sign(s_base) == sign(ctx.s_hat);
                if root.abs() < alpha && resid.abs() <= 1e-9 * (alpha * q).max(1.0) && side_ok {
                    pick = Some((root, s_base, gamma_));
                    break;
                }
            }
            let Some((beta, s_base, gamma_)) = pick else {
                return capability("no NIG skewness parameter reproduces the Legendre-Fenchel value");
            };
            Ok(BaseDistribution::Nig { alpha, beta, z_hat, s_base, d: gamma_ - ctx.c, e: ctx.c + alpha * q })
        }
    }
}

/// G(ẑ), 1 − G(ẑ), g(ẑ), s̆, L″(s̆) of a fitted non-normal base.
struct BasePieces {
    cdf: f64,
    sf: f64,
    pdf: f64,
    s_base: f64,
    l2: f64,
}

fn chisq_pieces(dof: f64, z: f64, s_base: f64) -> BasePieces {
    let a = 0.5 * dof;
    let ln_pdf = (a - 1.0) * z.ln() - 0.5 * z - a * 2f64.ln() - ln_gamma(a);
    BasePieces { cdf: gamma_lr(a, 0.5 * z), sf: gamma_ur(a, 0.5 * z), pdf: ln_pdf.exp(), s_base, l2: 2.0 * z * z / dof }
}

fn ig_pieces(mu: f64, z: f64, s_base: f64) -> BasePieces {
    let c = (z - mu) * (z - mu) / (2.0 * mu * mu * z);
    let y1 = (z / mu - 1.0) / z.sqrt();
    let y2 = (z / mu + 1.0) / z.sqrt();
    let ec = (-c).exp() / (2.0 * PI).sqrt();
    // Φ(−y1) = e^{−c}R(y1)/√(2π) and e^{2/μ}Φ(−y2) = e^{−c}R(y2)/√(2π)
    let (cdf, sf) = if y1 > 0.0 {
        let sf = ec * (mills_ratio(y1) - mills_ratio(y2));
        (1.0 - sf, sf)
    } else {
        let cdf = normal_cdf(y1) + ec * mills_ratio(y2);
        (cdf, 1.0 - cdf)
    };
    BasePieces { cdf, sf, pdf: ec / (z * z * z).sqrt(), s_base, l2: z * z * z }
}

fn nig_density(alpha: f64, beta: f64, x: f64) -> Result<f64> {
    let gamma_ = (alpha * alpha - beta * beta).sqrt();
    let q = (1.0 + x * x).sqrt();
    Ok(alpha / PI * (gamma_ + beta * x - alpha * q).exp() * bessel_k1e(alpha * q)? / q)
}

fn nig_pieces(alpha: f64, beta: f64, z: f64, s_base: f64) -> Result<BasePieces> {
    let gamma_ = (alpha * alpha - beta * beta).sqrt();
    let mean = beta / gamma_;
    let sd = alpha / gamma_.powf(1.5);
    let mut failure = None;
    let mut tail = |dir: f64| {
        let r = integrate_to_inf(
            |y: f64| match nig_density(alpha, beta, z + dir * sd * y) {
                Ok(v) => v * sd,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            },
            0.0,
            1e-11,
            1e-15,
            2000,
        );
        (r.value, r.converged)
    };
    let (cdf, sf, ok) = if z <= mean {
        let (lower, ok) = tail(-1.0);
        (lower, 1.0 - lower, ok)
    } else {
        let (upper, ok) = tail(1.0);
        (1.0 - upper, upper, ok)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    if !ok {
        return Err(Error::Numeric("NIG CDF quadrature did not converge".into()));
    }
    let pdf = nig_density(alpha, beta, z)?;
    let q = (1.0 + z * z).sqrt();
    Ok(BasePieces { cdf, sf, pdf, s_base, l2: q * q * q / alpha })
}

/// (F̂(ω), 1 − F̂(ω)) before clamping, each computed without cancellation
/// against 1.
pub fn wbb_tails(ctx: &SaddleContext, base: &BaseDistribution) -> Result<(f64, f64)> {
    let w = ctx.w_hat();
    if w.abs() < NEAR_MEAN {
        // 1/ẑ − 1/û → k3/(6 k2^{3/2}) as ŝ → 0, for every base
        let corr = normal_pdf(w) * ctx.k3 / (6.0 * ctx.k2.powf(1.5));
        return Ok((normal_cdf(w) + corr, normal_cdf(-w) - corr));
    }
    let (pieces, s_hat, reflected) = match *base {
        BaseDistribution::Normal => {
            let u = ctx.s_hat * ctx.k2.sqrt();
            let corr = normal_pdf(w) * (1.0 / w - 1.0 / u);
            return Ok((normal_cdf(w) + corr, normal_cdf(-w) - corr));
        }
        BaseDistribution::ChiSquare { dof, z_hat, s_base, reflected } => {
            (chisq_pieces(dof, z_hat, s_base), ctx.s_hat, reflected)
        }
        BaseDistribution::InverseGaussian { mu, z_hat, s_base, reflected } => {
            (ig_pieces(mu, z_hat, s_base), ctx.s_hat, reflected)
        }
        BaseDistribution::Nig { alpha, beta, z_hat, s_base, .. } => {
            (nig_pieces(alpha, beta, z_hat, s_base)?, ctx.s_hat, false)
        }
    };
    let s_hat = if reflected { -s_hat } else { s_hat };
    let u = s_hat * (ctx.k2 / pieces.l2).sqrt();
    let corr = pieces.pdf * (1.0 / pieces.s_base - 1.0 / u);
    let (f, q) = (pieces.cdf + corr, pieces.sf - corr);
    // the fit was to −Ω: F_Ω(ω) = 1 − F_{−Ω}(−ω)
    Ok(if reflected { (q, f) } else { (f, q) })
}

/// F̂(ω) before clamping.
pub fn wbb_cdf(ctx: &SaddleContext, base: &BaseDistribution) -> Result<f64> {
    Ok(wbb_tails(ctx, base)?.0)
}

/// P_out = 1 − F̂(eval_point) with the requested base, falling back to the
/// normal base (with a note) when the base cannot be fitted.
pub fn outage_spa(cgf: &dyn CgfModel, eval_point: f64, kind: BaseKind) -> Result<OutageResult> {
    let ctx = solve_saddle(cgf, eval_point)?;
    let mut notes = Vec::new();
    if ctx.reduced_order {
        notes.push("higher derivatives from finite differences".to_string());
    }
    let fitted = base_params(&ctx, kind).and_then(|b| wbb_tails(&ctx, &b).map(|t| (b, t)));
    let (base, (_, q)) = match fitted {
        Ok(v) => v,
        Err(e @ (Error::Capability(_) | Error::Numeric(_) | Error::Domain(_))) if kind != BaseKind::Normal => {
            notes.push(format!("{} base unavailable ({e}); fell back to normal", kind.name()));
            let b = BaseDistribution::Normal;
            (b, wbb_tails(&ctx, &b)?)
        }
        Err(e) => return Err(e),
    };
    if ctx.w_hat().abs() < NEAR_MEAN {
        notes.push("near-mean limit used".to_string());
    }
    let (p, clamped) = clamp_prob(q);
    if clamped {
        notes.push(format!("clamped from {q:e}"));
    }
    let mut out = OutageResult::new(p, Method::Spa(kind));
    out.saddle = Some(ctx.s_hat);
    out.lf_value = Some(ctx.c);
    if base.kind() != kind {
        out.base_used = Some(base.kind());
    }
    out.notes = notes;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgf::{Aggregation, CaseAModel, ExpPairCgf, GaussianCgf, RadialCgf};
    use crate::cumulants::{FadingModel, NetworkGeometry};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn case_a(lambda1: f64, lambda2: f64, shape: f64, theta: f64) -> CaseAModel {
        let f = FadingModel::gamma(shape, shape).unwrap();
        CaseAModel::new(f, Aggregation::Poisson { lambda1, lambda2 }, theta).unwrap()
    }

    #[test]
    fn gaussian_saddle_and_cdf() {
        let g = GaussianCgf::new(-1.0, 1.0).unwrap();
        let ctx = solve_saddle(&g, 0.0).unwrap();
        assert_relative_eq!(ctx.s_hat, 1.0, max_relative = 1e-14);
        assert_relative_eq!(wbb_cdf(&ctx, &BaseDistribution::Normal).unwrap(), 0.841_344_746_068_542_9, max_relative = 1e-12);
        let ctx = solve_saddle(&g, -1.0).unwrap();
        assert_eq!(ctx.s_hat, 0.0);
        assert_eq!(ctx.c, 0.0);
        assert_eq!(wbb_cdf(&ctx, &BaseDistribution::Normal).unwrap(), 0.5);
    }

    #[test]
    fn case_a_saddle_maps_to_forward_convention() {
        let m = case_a(1.0, 1.0, 1.0, 4.0);
        let ctx = solve_saddle(&m, 0.0).unwrap();
        assert_relative_eq!(ctx.s_hat, -1.0 / 6.0, max_relative = 1e-12);
        // the numeric path lands on the same root
        let ctx2 = solve_saddle(&m, 1e-300).unwrap();
        assert_relative_eq!(ctx2.s_hat, -1.0 / 6.0, max_relative = 1e-9);
    }

    #[test]
    fn saddle_residual_and_range() {
        let m = case_a(2.0, 1.0, 1.5, 0.7);
        for &w in &[-3.0, -0.5, 0.0, 0.4, 2.5] {
            let ctx = solve_saddle(&m, w).unwrap();
            let resid = kbar(&m, 1, ctx.s_hat).unwrap() - w;
            assert!(resid.abs() <= 1e-10 * w.abs().max(m.deriv(2, 0.0).unwrap().sqrt()));
        }
        let p = ExpPairCgf::new(3.0).unwrap();
        assert!(solve_saddle(&p, 50.0).is_ok());
    }

    #[test]
    fn exponential_pair_lugannani_rice() {
        let p = ExpPairCgf::new(3.0).unwrap();
        let r = outage_spa(&p, 0.0, BaseKind::Normal).unwrap();
        assert!((r.p_out - 0.75).abs() < 5e-3, "{}", r.p_out);
    }

    #[test]
    fn symmetric_model_is_half() {
        let m = case_a(2.0, 2.0, 2.0, 1.0);
        for kind in [BaseKind::Normal, BaseKind::ChiSquare, BaseKind::InverseGaussian, BaseKind::Nig] {
            let r = outage_spa(&m, 0.0, kind).unwrap();
            assert!((r.p_out - 0.5).abs() < 5e-3, "{kind:?} {}", r.p_out);
        }
    }

    #[test]
    fn bases_agree_on_mild_skew() {
        let m = case_a(6.0, 3.0, 2.0, 1.5);
        let ps: Vec<f64> = [BaseKind::Normal, BaseKind::ChiSquare, BaseKind::InverseGaussian, BaseKind::Nig]
            .iter()
            .map(|&k| {
                let r = outage_spa(&m, 0.0, k).unwrap();
                assert!(r.base_used.is_none(), "{k:?} fell back: {:?}", r.notes);
                r.p_out
            })
            .collect();
        for a in &ps {
            for b in &ps {
                assert!((a - b).abs() < 0.02, "{ps:?}");
            }
        }
    }

    #[test]
    fn nig_self_consistency() {
        let g = NetworkGeometry::from_bs_count(200.0, 1000.0, 30.0, 150.0, 4.0, 1.0).unwrap();
        let m = RadialCgf::case_b(g, 1.0).unwrap();
        let ctx = solve_saddle(&m, 0.0).unwrap();
        let BaseDistribution::Nig { alpha, beta, z_hat, s_base, .. } = base_params(&ctx, BaseKind::Nig).unwrap() else {
            panic!()
        };
        // L̄′(s̆) = (β + s̆)/√(α² − (β + s̆)²) must return ẑ
        let u = beta + s_base;
        let q = (alpha * alpha - u * u).sqrt();
        assert_relative_eq!(u / q, z_hat, max_relative = 1e-10);
        assert!(alpha * alpha / (q * q * q) > 0.0);
    }

    #[test]
    fn nig_validity_falls_back() {
        // ρ = 0 with η > 0 violates 3ρ > 5η
        let ctx = SaddleContext { s_hat: 0.3, omega: 0.0, c: 0.05, k2: 1.0, k3: 0.5, k4: 0.0, eta: 0.25, rho: 0.0, reduced_order: false };
        assert!(matches!(base_params(&ctx, BaseKind::Nig), Err(Error::Capability(_))));
    }

    #[test]
    fn chisq_and_ig_are_exact_on_themselves() {
        // Ω ~ χ²_ν shifted: K̄(s) = −(ν/2)ln(1 − 2s); the chi-square base
        // reproduces it exactly in the parts that do not depend on û.
        struct ChiSq(f64);
        impl CgfModel for ChiSq {
            fn eval(&self, t: num_complex::Complex64) -> Result<num_complex::Complex64> {
                Ok(-(t * 2.0 + 1.0).ln() * (0.5 * self.0))
            }
            fn deriv(&self, n: usize, t: f64) -> Result<f64> {
                if n == 0 {
                    return Ok(-0.5 * self.0 * (1.0 + 2.0 * t).ln());
                }
                let fact: f64 = (1..n).map(|k| k as f64).product();
                let sgn = if n % 2 == 1 { -1.0 } else { 1.0 };
                Ok(sgn * 0.5 * self.0 * fact * 2f64.powi(n as i32) / (1.0 + 2.0 * t).powi(n as i32))
            }
            fn strip(&self) -> (f64, f64) {
                (-0.5, f64::INFINITY)
            }
            fn describe(&self) -> String {
                "chisq".into()
            }
        }
        let m = ChiSq(5.0);
        for &x in &[1.0, 3.0, 7.0, 9.0] {
            let ctx = solve_saddle(&m, x).unwrap();
            let f = wbb_cdf(&ctx, &base_params(&ctx, BaseKind::ChiSquare).unwrap()).unwrap();
            assert_relative_eq!(f, gamma_lr(2.5, x / 2.0), max_relative = 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn gaussian_exactness(mean in -5.0f64..5.0, var in 0.01f64..50.0, w in -5.0f64..5.0) {
            let g = GaussianCgf::new(mean, var).unwrap();
            let ctx = solve_saddle(&g, w).unwrap();
            let f = wbb_cdf(&ctx, &BaseDistribution::Normal).unwrap();
            prop_assert!((f - normal_cdf((w - mean) / var.sqrt())).abs() <= 1e-12);
        }

        #[test]
        fn tail_orientation(l1 in 0.5f64..8.0, l2 in 0.5f64..8.0, shape in 0.5f64..4.0, theta in 0.2f64..5.0) {
            let m = case_a(l1, l2, shape, theta);
            let k = m.cumulants(2).unwrap();
            let sd = k.k(2).sqrt();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..50 {
                let w = k.k(1) + sd * (-4.0 + 8.0 * i as f64 / 49.0);
                let Ok(ctx) = solve_saddle(&m, w) else { continue };
                let f = wbb_cdf(&ctx, &BaseDistribution::Normal).unwrap();
                prop_assert!(f >= prev - 1e-6, "{w}: {f} < {prev}");
                prev = f;
            }
        }

        #[test]
        fn near_mean_continuity(l1 in 0.5f64..8.0, l2 in 0.5f64..8.0, theta in 0.2f64..5.0) {
            let m = case_a(l1, l2, 1.5, theta);
            let k = m.cumulants(2).unwrap();
            let sd = k.k(2).sqrt();
            let at = |w: f64| wbb_cdf(&solve_saddle(&m, w).unwrap(), &BaseDistribution::Normal).unwrap();
            let mid = at(k.k(1));
            for d in [-1e-6, 1e-6, -1e-3, 1e-3] {
                prop_assert!((at(k.k(1) + d * sd) - mid).abs() <= 1e-4 + d.abs());
            }
        }
    }
}
