//! Monte Carlo simulation of the downlink: draw the base stations, the gains
//! and count outage events θ(Y + σ²) > X.
//!
//! Trial i uses ChaCha8 keyed by the seed on stream i, so every trial sees the
//! same random numbers whatever the worker count. Trials are grouped in fixed
//! chunks whose statistics are merged in chunk order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1, Gamma, Normal, Poisson};
use rayon::prelude::*;

use crate::cgf::{Aggregation, CaseAModel};
use crate::cumulants::{CumulantSet, FadingModel, NetworkGeometry};
use crate::error::{arg_err, Result};
use crate::result::{Method, OutageResult};

pub const DEFAULT_WINDOW: f64 = 1000.0;
const CHUNK: u64 = 2048;

/// How the Case A node counts relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountCoupling {
    /// M and N drawn independently, as in the analytic CGF.
    #[default]
    Independent,
    /// Binomial only: N = L − M.
    Complementary,
}

/// What is simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimModel {
    /// Random node counts, gamma gains, no path loss.
    CaseA { model: CaseAModel, coupling: CountCoupling },
    /// PPP in the annulus [a, window) with the given gains (unit gains: Case B).
    Radial { geom: NetworkGeometry, fading: FadingModel, theta: f64 },
    /// X, Y independent unit exponentials.
    ExpPair { theta: f64 },
}

impl SimModel {
    fn theta(&self) -> f64 {
        match *self {
            SimModel::CaseA { model, .. } => model.theta,
            SimModel::Radial { theta, .. } | SimModel::ExpPair { theta } => theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Outer radius of the simulated area (radial models).
    pub window_radius: f64,
    pub model: SimModel,
    /// Noise power σ²; zero gives SIR outage.
    pub noise: f64,
    /// Radial models: exactly round(λπ(W² − a²)) stations per trial instead of
    /// a Poisson number.
    pub fixed_count: bool,
}

impl SimConfig {
    /// Poisson counts, no noise, window from the geometry (or 1000).
    pub fn new(model: SimModel, trials: u64, seed: u64) -> Self {
        let window_radius = match model {
            SimModel::Radial { geom, .. } => geom.window.unwrap_or(DEFAULT_WINDOW),
            _ => DEFAULT_WINDOW,
        };
        Self { trials, seed, window_radius, model, noise: 0.0, fixed_count: false }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return arg_err("need at least one trial");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return arg_err(format!("noise power must be non-negative, got {}", self.noise));
        }
        if let SimModel::Radial { geom, fading, theta } = self.model {
            if !(self.window_radius > geom.r_coop) {
                return arg_err(format!("window radius {} must exceed R = {}", self.window_radius, geom.r_coop));
            }
            if !(theta > 0.0 && theta.is_finite()) {
                return arg_err(format!("threshold must be positive, got {theta}"));
            }
            if let FadingModel::Gamma { shape, rate } = fading {
                FadingModel::gamma(shape, rate)?;
            }
        }
        if let SimModel::ExpPair { theta } = self.model {
            if !(theta > 0.0 && theta.is_finite()) {
                return arg_err(format!("threshold must be positive, got {theta}"));
            }
        }
        if let SimModel::CaseA { model, coupling: CountCoupling::Complementary } = self.model {
            if !matches!(model.aggregation, Aggregation::Binomial { .. }) {
                return arg_err("complementary counts need binomial aggregation");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalResult {
    pub p_hat: f64,
    pub std_err: f64,
    pub trials: u64,
    pub outages: u64,
    /// k-statistics k_1..k_4 of the signal X.
    pub sample_cumulants_x: CumulantSet,
    /// k-statistics k_1..k_4 of the interference Y.
    pub sample_cumulants_y: CumulantSet,
}

impl EmpiricalResult {
    pub fn to_outage(&self) -> OutageResult {
        let mut r = OutageResult::new(self.p_hat, Method::MonteCarlo);
        r.err_estimate = Some(self.std_err);
        r
    }
}

/// Running count and central power sums, mergeable (Pébay's update).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.merge(&Moments { n: 1.0, mean: x, ..Default::default() });
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.n, o.n);
        let n = na + nb;
        let d = o.mean - self.mean;
        let (d2, d3, d4) = (d * d, d * d * d, d * d * d * d);
        let m4 = self.m4
            + o.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * o.m3 - nb * self.m3) / n;
        let m3 = self.m3 + o.m3 + d3 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * o.m2 - nb * self.m2) / n;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        *self = Moments { n, mean: self.mean + d * nb / n, m2, m3, m4 };
    }

    /// Unbiased k-statistics k_1..k_order (order ≤ 4).
    fn k_statistics(&self, order: usize) -> Result<CumulantSet> {
        let n = self.n;
        let (m2, m3, m4) = (self.m2 / n, self.m3 / n, self.m4 / n);
        let all = [
            self.mean,
            n / (n - 1.0) * m2,
            n * n / ((n - 1.0) * (n - 2.0)) * m3,
            n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0)),
        ];
        CumulantSet::new(all[..order].to_vec())
    }
}

/// Unbiased k-statistics k_1..k_max_order (max_order ≤ 4) of a sample.
pub fn sample_cumulants(values: &[f64], max_order: usize) -> Result<CumulantSet> {
    if values.len() < 10 {
        return arg_err(format!("k-statistics need at least 10 values, got {}", values.len()));
    }
    if !(1..=4).contains(&max_order) {
        return arg_err(format!("k-statistics are implemented for orders 1..=4, got {max_order}"));
    }
    let mut m = Moments::default();
    for &v in values {
        m.push(v);
    }
    m.k_statistics(max_order)
}

#[derive(Default, Clone, Copy)]
struct ChunkStats {
    outages: u64,
    x: Moments,
    y: Moments,
}

/// Samplers prepared once per simulation.
enum Sampler {
    CaseA {
        gain: Gamma<f64>,
        counts: Counts,
    },
    Radial {
        count: Option<Poisson<f64>>,
        fixed: u64,
        a2: f64,
        span: f64,
        r_coop2: f64,
        half_alpha: f64,
        power: f64,
        gain: Gain,
    },
    ExpPair,
}

enum Counts {
    Poisson(Poisson<f64>, Poisson<f64>),
    Binomial(Binomial, Binomial),
    Complementary(Binomial, u64),
}

enum Gain {
    Unit,
    Gamma(Gamma<f64>),
    LogNormal(Normal<f64>),
}

impl Gain {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Gain::Unit => 1.0,
            Gain::Gamma(g) => g.sample(rng),
            Gain::LogNormal(n) => n.sample(rng).exp(),
        }
    }
}

fn dist_err(e: impl std::fmt::Display) -> crate::error::Error {
    crate::error::Error::Argument(format!("sampler: {e}"))
}

impl Sampler {
    fn new(cfg: &SimConfig) -> Result<Self> {
        Ok(match cfg.model {
            SimModel::CaseA { model, coupling } => {
                let gain = Gamma::new(model.shape, 1.0 / model.rate).map_err(dist_err)?;
                let counts = match (model.aggregation, coupling) {
                    (Aggregation::Poisson { lambda1, lambda2 }, _) => {
                        Counts::Poisson(Poisson::new(lambda1).map_err(dist_err)?, Poisson::new(lambda2).map_err(dist_err)?)
                    }
                    (Aggregation::Binomial { l, p }, CountCoupling::Independent) => Counts::Binomial(
                        Binomial::new(l as u64, p).map_err(dist_err)?,
                        Binomial::new(l as u64, 1.0 - p).map_err(dist_err)?,
                    ),
                    (Aggregation::Binomial { l, p }, CountCoupling::Complementary) => {
                        Counts::Complementary(Binomial::new(l as u64, p).map_err(dist_err)?, l as u64)
                    }
                };
                Sampler::CaseA { gain, counts }
            }
            SimModel::Radial { geom, fading, .. } => {
                let w = cfg.window_radius;
                let a2 = geom.a * geom.a;
                let mean = geom.lambda * std::f64::consts::PI * (w * w - a2);
                let gain = match fading {
                    FadingModel::Unit => Gain::Unit,
                    FadingModel::Gamma { shape, rate } => Gain::Gamma(Gamma::new(shape, 1.0 / rate).map_err(dist_err)?),
                    FadingModel::LogNormal { mu_ln, sigma_ln } => Gain::LogNormal(Normal::new(mu_ln, sigma_ln).map_err(dist_err)?),
                };
                Sampler::Radial {
                    count: if cfg.fixed_count { None } else { Some(Poisson::new(mean).map_err(dist_err)?) },
                    fixed: mean.round() as u64,
                    a2,
                    span: w * w - a2,
                    r_coop2: geom.r_coop * geom.r_coop,
                    half_alpha: geom.alpha / 2.0,
                    power: geom.power,
                    gain,
                }
            }
            SimModel::ExpPair { .. } => Sampler::ExpPair,
        })
    }

    /// One trial: (X, Y).
    fn trial(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match self {
            Sampler::CaseA { gain, counts } => {
                let (m, n) = match counts {
                    Counts::Poisson(pm, pn) => (pm.sample(rng) as u64, pn.sample(rng) as u64),
                    Counts::Binomial(bm, bn) => (bm.sample(rng), bn.sample(rng)),
                    Counts::Complementary(bm, l) => {
                        let m = bm.sample(rng);
                        (m, l - m)
                    }
                };
                let x = (0..m).map(|_| gain.sample(rng)).sum();
                let y = (0..n).map(|_| gain.sample(rng)).sum();
                (x, y)
            }
            Sampler::Radial { count, fixed, a2, span, r_coop2, half_alpha, power, gain } => {
                let total = match count {
                    Some(p) => p.sample(rng) as u64,
                    None => *fixed,
                };
                let (mut x, mut y) = (0.0, 0.0);
                for _ in 0..total {
                    // r² uniform on [a², W²]
                    let r2 = a2 + rng.random::<f64>() * span;
                    let v = power * gain.draw(rng) * r2.powf(-half_alpha);
                    if r2 < *r_coop2 {
                        x += v;
                    } else {
                        y += v;
                    }
                }
                (x, y)
            }
            Sampler::ExpPair => (rng.sample(Exp1), rng.sample(Exp1)),
        }
    }
}

/// Runs the simulation on the current rayon pool.
pub fn simulate(cfg: &SimConfig) -> Result<EmpiricalResult> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg)?;
    let theta = cfg.model.theta();
    let chunks = cfg.trials.div_ceil(CHUNK);
    let per_chunk: Vec<ChunkStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = ChunkStats::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i);
                let (x, y) = sampler.trial(&mut rng);
                if theta * (y + cfg.noise) > x {
                    s.outages += 1;
                }
                s.x.push(x);
                s.y.push(y);
            }
            s
        })
        .collect();
    let mut total = ChunkStats::default();
    for s in &per_chunk {
        total.outages += s.outages;
        total.x.merge(&s.x);
        total.y.merge(&s.y);
    }
    let n = cfg.trials as f64;
    let p_hat = total.outages as f64 / n;
    let order = if cfg.trials >= 4 { 4 } else { 1 };
    Ok(EmpiricalResult {
        p_hat,
        std_err: (p_hat * (1.0 - p_hat) / n).sqrt(),
        trials: cfg.trials,
        outages: total.outages,
        sample_cumulants_x: total.x.k_statistics(order)?,
        sample_cumulants_y: total.y.k_statistics(order)?,
    })
}
