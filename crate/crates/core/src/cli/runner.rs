//! Evaluates a [`RunConfig`] over its sweep and renders the CSV tables.

use std::io::Write;

use rayon::prelude::*;

use super::config::{Case, Fading, MethodKind, ModelConfig, RunConfig, SweepVar};
use crate::cgf::{Aggregation, CaseAModel, CgfModel, RadialCgf};
use crate::charlier::outage_charlier;
use crate::cumulants::{omega_cumulants, CumulantSet, FadingModel, NetworkGeometry};
use crate::error::{Error, Result};
use crate::gilpelaez::outage_gp;
use crate::mc::{simulate, SimConfig, SimModel};
use crate::result::OutageResult;
use crate::spa::outage_spa;

/// Order of the cumulants table.
pub const CUMULANT_COLUMNS: usize = 8;

/// One CSV row; `result` is an error for `NA` cells.
#[derive(Debug, Clone)]
pub struct Cell {
    pub sweep_value: Option<f64>,
    pub method: MethodKind,
    pub result: Result<OutageResult>,
}

#[derive(Debug, Clone)]
pub struct CumulantRow {
    pub sweep_value: Option<f64>,
    pub result: Result<CumulantSet>,
}

/// A model instantiated at one sweep point.
#[derive(Debug, Clone, Copy)]
pub enum Instance {
    CaseA(CaseAModel),
    Radial { geom: NetworkGeometry, fading: FadingModel, theta: f64 },
}

impl Instance {
    pub fn theta(&self) -> f64 {
        match self {
            Instance::CaseA(m) => m.theta,
            Instance::Radial { theta, .. } => *theta,
        }
    }

    pub fn cgf(&self) -> Result<Box<dyn CgfModel>> {
        Ok(match *self {
            Instance::CaseA(m) => Box::new(m),
            Instance::Radial { geom, fading, theta } => Box::new(RadialCgf::case_c(geom, fading, theta)?),
        })
    }

    pub fn cumulants(&self, order: usize) -> Result<CumulantSet> {
        match self {
            Instance::CaseA(m) => m.exact_cumulants(order),
            Instance::Radial { geom, fading, theta } => omega_cumulants(geom, fading, *theta, order),
        }
    }
}

/// Applies the sweep value (if any) and builds the model.
pub fn instantiate(model: &ModelConfig, var: Option<SweepVar>, x: f64) -> Result<Instance> {
    let mut m = model.clone();
    match var {
        Some(SweepVar::ThetaDb) => m.theta = super::config::db_to_linear(x),
        Some(SweepVar::NumBs) => m.num_bs = Some(x),
        Some(SweepVar::PCoop) => m.p = x,
        Some(SweepVar::L) => m.l = x.round() as u32,
        None => {}
    }
    let gamma = |f: Fading| match f {
        Fading::Gamma { shape, rate } => FadingModel::gamma(shape, rate),
        Fading::LogNormal { mu_ln, sigma_ln } => FadingModel::lognormal(mu_ln, sigma_ln),
    };
    Ok(match m.case {
        Case::APoisson => Instance::CaseA(CaseAModel::new(
            gamma(m.fading)?,
            Aggregation::Poisson { lambda1: m.lambda1, lambda2: m.lambda2 },
            m.theta,
        )?),
        Case::ABinomial => Instance::CaseA(CaseAModel::new(gamma(m.fading)?, Aggregation::Binomial { l: m.l, p: m.p }, m.theta)?),
        Case::B | Case::C => {
            let geom = match m.num_bs {
                Some(n) => NetworkGeometry::from_bs_count(n, m.window, m.a, m.r_coop, m.alpha, m.power)?,
                None => NetworkGeometry::new(m.lambda.expect("validated"), m.a, m.r_coop, m.alpha, m.power)?.with_window(m.window)?,
            };
            let fading = if m.case == Case::B { FadingModel::Unit } else { gamma(m.fading)? };
            Instance::Radial { geom, fading, theta: m.theta }
        }
    })
}

fn evaluate(cfg: &RunConfig, inst: &Instance, method: MethodKind) -> Result<OutageResult> {
    let eval_point = -inst.theta() * cfg.model.noise;
    let mc = &cfg.method;
    match method {
        MethodKind::GilPelaez => match outage_gp(inst.cgf()?.as_ref(), eval_point, &mc.inversion) {
            // report the partial result rather than dropping the cell
            Err(Error::Accuracy { partial, err_estimate }) => {
                let mut r = OutageResult::new(partial.clamp(0.0, 1.0), crate::result::Method::GilPelaez);
                r.err_estimate = Some(err_estimate);
                r.notes.push(format!("accuracy target {:e} missed", mc.inversion.rel_tol));
                Ok(r)
            }
            other => other,
        },
        MethodKind::Spa(kind) => outage_spa(inst.cgf()?.as_ref(), eval_point, kind),
        MethodKind::Charlier(base) => {
            let k = inst.cumulants(mc.charlier_order)?;
            outage_charlier(&k, eval_point, base, mc.charlier_mode, mc.charlier_order)
        }
        MethodKind::Mc => {
            let model = match *inst {
                Instance::CaseA(model) => SimModel::CaseA { model, coupling: cfg.model.coupling },
                Instance::Radial { geom, fading, theta } => {
                    if geom.window.is_none() {
                        return Err(Error::Capability("simulation needs a finite window".into()));
                    }
                    SimModel::Radial { geom, fading, theta }
                }
            };
            let mut sim = SimConfig::new(model, mc.mc_trials, mc.mc_seed);
            sim.noise = cfg.model.noise;
            sim.fixed_count = mc.mc_fixed_count;
            Ok(simulate(&sim)?.to_outage())
        }
    }
}

fn points(cfg: &RunConfig) -> Vec<Option<f64>> {
    match cfg.sweep {
        Some(s) => s.grid().into_iter().map(Some).collect(),
        None => vec![None],
    }
}

/// All cells, in sweep order then method order. Points run concurrently.
pub fn run(cfg: &RunConfig) -> Vec<Cell> {
    let var = cfg.sweep.map(|s| s.variable);
    let per_point: Vec<Vec<Cell>> = points(cfg)
        .into_par_iter()
        .map(|x| {
            let inst = instantiate(&cfg.model, var, x.unwrap_or(f64::NAN));
            cfg.method
                .methods
                .iter()
                .map(|&method| Cell {
                    sweep_value: x,
                    method,
                    result: inst.clone().and_then(|i| evaluate(cfg, &i, method)),
                })
                .collect()
        })
        .collect();
    per_point.into_iter().flatten().collect()
}

/// κ_1..κ_8 of Ω at every sweep point.
pub fn cumulant_table(cfg: &RunConfig) -> Vec<CumulantRow> {
    let var = cfg.sweep.map(|s| s.variable);
    points(cfg)
        .into_par_iter()
        .map(|x| CumulantRow {
            sweep_value: x,
            result: instantiate(&cfg.model, var, x.unwrap_or(f64::NAN)).and_then(|i| i.cumulants(CUMULANT_COLUMNS)),
        })
        .collect()
}

/// Nine significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_else(|| "NA".into())
}

pub fn write_outage_csv(cells: &[Cell], out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sweep_value", "method", "p_out", "diag_err", "diag_note"])?;
    for c in cells {
        let method = c.method.to_string();
        let sweep = fmt_opt(c.sweep_value);
        match &c.result {
            Ok(r) => w.write_record([sweep, method, fmt_num(r.p_out), fmt_opt(r.err_estimate), r.notes.join("; ")])?,
            Err(e) => w.write_record([sweep, method, "NA".into(), "NA".into(), e.to_string()])?,
        }
    }
    w.flush()
}

pub fn write_cumulant_csv(rows: &[CumulantRow], out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["sweep_value".to_string()];
    header.extend((1..=CUMULANT_COLUMNS).map(|n| format!("k{n}")));
    header.extend(["skew".to_string(), "ex_kurt".to_string()]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![fmt_opt(r.sweep_value)];
        match &r.result {
            Ok(k) => {
                rec.extend(k.kappa.iter().map(|v| fmt_num(*v)));
                rec.push(fmt_opt(k.skewness()));
                rec.push(fmt_opt(k.excess_kurtosis()));
            }
            Err(_) => rec.extend(std::iter::repeat_n("NA".to_string(), CUMULANT_COLUMNS + 2)),
        }
        w.write_record(&rec)?;
    }
    w.flush()
}
