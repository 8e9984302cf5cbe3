//! Outage results shared by the analytic routes and the simulator.

use std::fmt;

/// Base distribution of a saddle point approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseKind {
    Normal,
    ChiSquare,
    InverseGaussian,
    Nig,
}

impl BaseKind {
    pub fn name(self) -> &'static str {
        match self {
            BaseKind::Normal => "normal",
            BaseKind::ChiSquare => "chisq",
            BaseKind::InverseGaussian => "ig",
            BaseKind::Nig => "nig",
        }
    }
}

/// Base weight of a Charlier expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharlierBase {
    Hermite,
    StudentT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    GilPelaez,
    Spa(BaseKind),
    Charlier(CharlierBase),
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::GilPelaez => write!(f, "gil_pelaez"),
            Method::Spa(b) => write!(f, "spa:{}", b.name()),
            Method::Charlier(CharlierBase::Hermite) => write!(f, "charlier:hermite"),
            Method::Charlier(CharlierBase::StudentT) => write!(f, "charlier:t"),
            Method::MonteCarlo => write!(f, "mc"),
        }
    }
}

/// P_out with whatever the method knows about its own quality.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageResult {
    pub p_out: f64,
    pub method: Method,
    /// Quadrature error (Gil-Pelaez) or standard error (MC).
    pub err_estimate: Option<f64>,
    /// Saddle point in the forward convention.
    pub saddle: Option<f64>,
    /// Legendre-Fenchel value at the saddle.
    pub lf_value: Option<f64>,
    /// Truncation order of a series method, or t degrees of freedom.
    pub order: Option<usize>,
    pub panels: Option<usize>,
    /// Base actually used, if it differs from the one requested.
    pub base_used: Option<BaseKind>,
    pub notes: Vec<String>,
}

impl OutageResult {
    pub fn new(p_out: f64, method: Method) -> Self {
        Self {
            p_out,
            method,
            err_estimate: None,
            saddle: None,
            lf_value: None,
            order: None,
            panels: None,
            base_used: None,
            notes: Vec::new(),
        }
    }

    pub(crate) fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }
}

/// Clamps to [0, 1], returning whether clamping happened.
pub(crate) fn clamp_prob(p: f64) -> (f64, bool) {
    if p < 0.0 {
        (0.0, true)
    } else if p > 1.0 {
        (1.0, true)
    } else {
        (p, false)
    }
}
