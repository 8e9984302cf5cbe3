//! Run configuration: `[section]` headers and flat `key = value` lines, `#`
//! or `;` comments. Unknown keys and sections are errors.

use std::collections::BTreeMap;
use std::fmt;

use crate::charlier::{CharlierMode, DEFAULT_ORDER};
use crate::gilpelaez::InversionConfig;
use crate::mc::{CountCoupling, DEFAULT_WINDOW};
use crate::result::{BaseKind, CharlierBase};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, column, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    APoisson,
    ABinomial,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    Gamma { shape: f64, rate: f64 },
    LogNormal { mu_ln: f64, sigma_ln: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub case: Case,
    /// Linear SIR threshold.
    pub theta: f64,
    /// Linear noise power σ².
    pub noise: f64,
    /// Gains: Case A and C. Case B always has unit gains.
    pub fading: Fading,
    pub lambda1: f64,
    pub lambda2: f64,
    pub l: u32,
    pub p: f64,
    pub coupling: CountCoupling,
    /// Mean BS count in the window; used instead of `lambda` when set.
    pub num_bs: Option<f64>,
    pub lambda: Option<f64>,
    pub a: f64,
    pub r_coop: f64,
    pub window: f64,
    pub alpha: f64,
    /// Linear transmit power.
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    GilPelaez,
    Spa(BaseKind),
    Charlier(CharlierBase),
    Mc,
}

impl MethodKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "gil_pelaez" => MethodKind::GilPelaez,
            "spa:normal" => MethodKind::Spa(BaseKind::Normal),
            "spa:chisq" => MethodKind::Spa(BaseKind::ChiSquare),
            "spa:ig" => MethodKind::Spa(BaseKind::InverseGaussian),
            "spa:nig" => MethodKind::Spa(BaseKind::Nig),
            "charlier:hermite" => MethodKind::Charlier(CharlierBase::Hermite),
            "charlier:t" => MethodKind::Charlier(CharlierBase::StudentT),
            "mc" => MethodKind::Mc,
            _ => return None,
        })
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match *self {
            MethodKind::GilPelaez => crate::result::Method::GilPelaez,
            MethodKind::Spa(b) => crate::result::Method::Spa(b),
            MethodKind::Charlier(b) => crate::result::Method::Charlier(b),
            MethodKind::Mc => crate::result::Method::MonteCarlo,
        };
        write!(f, "{m}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub methods: Vec<MethodKind>,
    pub inversion: InversionConfig,
    pub charlier_order: usize,
    pub charlier_mode: CharlierMode,
    pub mc_trials: u64,
    pub mc_seed: u64,
    pub mc_fixed_count: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    ThetaDb,
    NumBs,
    PCoop,
    L,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub variable: SweepVar,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Sweep {
    /// lo + i(hi − lo)/(steps − 1).
    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.hi } else { self.lo + i as f64 * h }).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub method: MethodConfig,
    pub sweep: Option<Sweep>,
}

/// dB → linear for power quantities.
pub fn db_to_linear(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

struct Entry {
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

type Section = BTreeMap<String, Entry>;

const MODEL_KEYS: &[&str] = &[
    "case", "theta", "theta_unit", "noise", "noise_unit", "fading", "fading_shape", "fading_rate", "mu_ln", "sigma_ln",
    "lambda1", "lambda2", "L", "p", "counts", "num_bs", "lambda", "a", "r_coop", "window", "alpha", "power", "power_unit",
];
const METHOD_KEYS: &[&str] = &[
    "methods", "rel_tol", "max_panels", "charlier_order", "charlier_mode", "mc_trials", "mc_seed", "mc_fixed_count",
];
const SWEEP_KEYS: &[&str] = &["variable", "lo", "hi", "steps"];

fn tokenize(text: &str) -> Result<BTreeMap<String, Section>, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("");
        let indent = content.len() - content.trim_start().len();
        let t = content.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(line, indent + 1, "unterminated section header");
            };
            let name = name.trim().to_string();
            if !["model", "method", "sweep"].contains(&name.as_str()) {
                return err(line, indent + 2, format!("unknown section [{name}]"));
            }
            if sections.contains_key(&name) {
                return err(line, indent + 1, format!("duplicate section [{name}]"));
            }
            sections.insert(name.clone(), Section::new());
            current = Some(name);
            continue;
        }
        let Some(eq) = content.find('=') else {
            return err(line, indent + 1, "expected `key = value`");
        };
        let Some(sec) = current.as_ref() else {
            return err(line, indent + 1, "key outside of any section");
        };
        let key = content[..eq].trim().to_string();
        let after = &content[eq + 1..];
        let value_col = eq + 2 + (after.len() - after.trim_start().len());
        let allowed = match sec.as_str() {
            "model" => MODEL_KEYS,
            "method" => METHOD_KEYS,
            _ => SWEEP_KEYS,
        };
        if !allowed.contains(&key.as_str()) {
            return err(line, indent + 1, format!("unknown key `{key}` in [{sec}]"));
        }
        let entries = sections.get_mut(sec).expect("section exists");
        if entries.contains_key(&key) {
            return err(line, indent + 1, format!("duplicate key `{key}`"));
        }
        entries.insert(key, Entry { value: after.trim().to_string(), line, key_col: indent + 1, value_col });
    }
    Ok(sections)
}

struct Reader<'a> {
    name: &'a str,
    s: &'a Section,
    header_line: usize,
}

impl Reader<'_> {
    fn missing<T>(&self, key: &str) -> Result<T, ConfigError> {
        err(self.header_line, 1, format!("[{}] needs `{key}`", self.name))
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.s.get(key)
    }

    fn str_or(&self, key: &str, default: &str) -> String {
        self.raw(key).map(|e| e.value.clone()).unwrap_or_else(|| default.to_string())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => match e.value.parse::<T>() {
                Ok(v) => Ok(Some(v)),
                Err(_) => err(e.line, e.value_col, format!("cannot parse `{}` for `{key}`", e.value)),
            },
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        match self.parse(key)? {
            Some(v) => Ok(v),
            None => self.missing(key),
        }
    }

    /// Value in linear units; `<key>_unit` must say `db` or `linear`.
    fn power_quantity(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let unit_key = format!("{key}_unit");
        let Some(v) = self.parse::<f64>(key)? else {
            if let Some(e) = self.raw(&unit_key) {
                return err(e.line, e.key_col, format!("`{unit_key}` given without `{key}`"));
            }
            return match default {
                Some(d) => Ok(d),
                None => self.missing(key),
            };
        };
        let e = self.raw(key).expect("parsed");
        match self.raw(&unit_key).map(|u| u.value.as_str()) {
            Some("db") | Some("dB") => Ok(db_to_linear(v)),
            Some("linear") => Ok(v),
            Some(other) => {
                let u = self.raw(&unit_key).expect("present");
                err(u.line, u.value_col, format!("unit must be `db` or `linear`, got `{other}`"))
            }
            None => err(e.line, e.key_col, format!("`{key}` needs an explicit `{unit_key}` (db or linear)")),
        }
    }

    fn fail<T>(&self, key: &str, msg: &str) -> Result<T, ConfigError> {
        let (line, col) = self.raw(key).map(|e| (e.line, e.value_col)).unwrap_or((self.header_line, 1));
        err(line, col, format!("`{key}`: {msg}"))
    }

    fn check(&self, key: &str, ok: bool, msg: &str) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            self.fail(key, msg)
        }
    }
}

fn header_line(text: &str, name: &str) -> usize {
    text.lines().position(|l| l.trim() == format!("[{name}]")).map(|i| i + 1).unwrap_or(0)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let sections = tokenize(text)?;
    let empty = Section::new();
    let get = |name: &'static str| Reader { name, s: sections.get(name).unwrap_or(&empty), header_line: header_line(text, name) };
    if !sections.contains_key("model") {
        return err(0, 0, "missing [model] section");
    }
    if !sections.contains_key("method") {
        return err(0, 0, "missing [method] section");
    }
    let m = get("model");
    let case = match m.raw("case").map(|e| e.value.as_str()) {
        Some("a_poisson") => Case::APoisson,
        Some("a_binomial") => Case::ABinomial,
        Some("b") => Case::B,
        Some("c") => Case::C,
        Some(other) => {
            let e = m.raw("case").expect("present");
            return err(e.line, e.value_col, format!("case must be a_poisson, a_binomial, b or c, got `{other}`"));
        }
        None => return m.missing("case"),
    };
    let theta = m.power_quantity("theta", None)?;
    let noise = m.power_quantity("noise", Some(0.0))?;
    let power = m.power_quantity("power", Some(1.0))?;
    m.check("theta", theta > 0.0 && theta.is_finite(), "must be a positive finite threshold")?;
    m.check("noise", noise >= 0.0 && noise.is_finite(), "must be non-negative")?;
    m.check("power", power > 0.0 && power.is_finite(), "must be positive")?;
    let fading = match m.str_or("fading", "gamma").as_str() {
        "gamma" => {
            let shape = m.f64_or("fading_shape", 1.0)?;
            let rate = m.f64_or("fading_rate", 1.0)?;
            m.check("fading_shape", shape > 0.0, "must be positive")?;
            m.check("fading_rate", rate > 0.0, "must be positive")?;
            Fading::Gamma { shape, rate }
        }
        "lognormal" => {
            let mu_ln = m.f64_or("mu_ln", 0.0)?;
            let sigma_ln = m.require_f64("sigma_ln")?;
            m.check("sigma_ln", sigma_ln > 0.0, "must be positive")?;
            Fading::LogNormal { mu_ln, sigma_ln }
        }
        other => {
            let e = m.raw("fading").expect("present");
            return err(e.line, e.value_col, format!("fading must be gamma or lognormal, got `{other}`"));
        }
    };
    if case != Case::C && matches!(fading, Fading::LogNormal { .. }) {
        return m.fail("fading", "lognormal gains are only available for case c");
    }
    if case == Case::B {
        for key in ["fading", "fading_shape", "fading_rate", "mu_ln", "sigma_ln"] {
            m.check(key, m.raw(key).is_none(), "case b has unit gains")?;
        }
    }
    let coupling = match m.str_or("counts", "independent").as_str() {
        "independent" => CountCoupling::Independent,
        "complementary" => CountCoupling::Complementary,
        _ => return m.fail("counts", "must be independent or complementary"),
    };
    let (mut lambda1, mut lambda2, mut l, mut p) = (0.0, 0.0, 0, 0.0);
    match case {
        Case::APoisson => {
            lambda1 = m.require_f64("lambda1")?;
            lambda2 = m.require_f64("lambda2")?;
            m.check("lambda1", lambda1 > 0.0, "must be positive")?;
            m.check("lambda2", lambda2 > 0.0, "must be positive")?;
            m.check("counts", coupling == CountCoupling::Independent, "complementary counts need case a_binomial")?;
        }
        Case::ABinomial => {
            l = match m.parse::<u32>("L")? {
                Some(v) => v,
                None => return m.missing("L"),
            };
            p = m.require_f64("p")?;
            m.check("L", l >= 1, "must be at least 1")?;
            m.check("p", p > 0.0 && p < 1.0, "must lie in (0, 1)")?;
        }
        Case::B | Case::C => {}
    }
    let radial = matches!(case, Case::B | Case::C);
    let num_bs = m.parse::<f64>("num_bs")?;
    let lambda = m.parse::<f64>("lambda")?;
    let a = m.f64_or("a", 30.0)?;
    let r_coop = m.f64_or("r_coop", 150.0)?;
    let window = m.f64_or("window", DEFAULT_WINDOW)?;
    let alpha = m.f64_or("alpha", 4.0)?;
    if radial {
        m.check("num_bs", num_bs.is_some() != lambda.is_some(), "give exactly one of `num_bs` and `lambda`")?;
        m.check("num_bs", num_bs.is_none_or(|n| n > 0.0), "must be positive")?;
        m.check("num_bs", num_bs.is_none() || window.is_finite(), "needs a finite window")?;
        m.check("lambda", lambda.is_none_or(|v| v > 0.0), "must be positive")?;
        m.check("a", a > 0.0, "must be positive")?;
        m.check("r_coop", r_coop > a, "must exceed a")?;
        m.check("window", window > r_coop, "must exceed r_coop")?;
        m.check("alpha", alpha > 2.0 && alpha.is_finite(), "must exceed 2")?;
    } else {
        for key in ["num_bs", "lambda", "a", "r_coop", "window", "alpha", "power"] {
            m.check(key, m.raw(key).is_none(), "only meaningful for cases b and c")?;
        }
    }
    let model = ModelConfig {
        case,
        theta,
        noise,
        fading,
        lambda1,
        lambda2,
        l,
        p,
        coupling,
        num_bs,
        lambda,
        a,
        r_coop,
        window,
        alpha,
        power,
    };

    let r = get("method");
    let list = match r.raw("methods") {
        Some(e) => e,
        None => return r.missing("methods"),
    };
    let mut methods = Vec::new();
    for (off, name) in split_with_offsets(&list.value) {
        match MethodKind::parse(name) {
            Some(k) if !methods.contains(&k) => methods.push(k),
            Some(_) => return err(list.line, list.value_col + off, format!("method `{name}` listed twice")),
            None => return err(list.line, list.value_col + off, format!("unknown method `{name}`")),
        }
    }
    if methods.is_empty() {
        return err(list.line, list.value_col, "at least one method is required");
    }
    let defaults = InversionConfig::default();
    let inversion = InversionConfig {
        rel_tol: r.f64_or("rel_tol", defaults.rel_tol)?,
        max_panels: r.parse::<usize>("max_panels")?.unwrap_or(defaults.max_panels),
        ..defaults
    };
    if let Err(e) = inversion.validate() {
        let key = if r.raw("rel_tol").is_some() { "rel_tol" } else { "max_panels" };
        r.check(key, false, &e.to_string())?;
    }
    let charlier_order = r.parse::<usize>("charlier_order")?.unwrap_or(DEFAULT_ORDER);
    r.check("charlier_order", (2..=crate::cumulants::MAX_ORDER).contains(&charlier_order), "must lie in 2..=16")?;
    let charlier_mode = match r.str_or("charlier_mode", "standardized").as_str() {
        "standardized" => CharlierMode::Standardized,
        "literal" => CharlierMode::PaperLiteral,
        _ => return r.fail("charlier_mode", "must be standardized or literal"),
    };
    let mc_trials = r.parse::<u64>("mc_trials")?.unwrap_or(100_000);
    r.check("mc_trials", mc_trials >= 1, "must be at least 1")?;
    let method = MethodConfig {
        methods,
        inversion,
        charlier_order,
        charlier_mode,
        mc_trials,
        mc_seed: r.parse::<u64>("mc_seed")?.unwrap_or(1),
        mc_fixed_count: r.parse::<bool>("mc_fixed_count")?.unwrap_or(false),
    };

    let sweep = match sections.get("sweep") {
        None => None,
        Some(_) => {
            let s = get("sweep");
            let variable = match s.raw("variable").map(|e| e.value.as_str()) {
                Some("theta_db") => SweepVar::ThetaDb,
                Some("num_bs") => SweepVar::NumBs,
                Some("p_coop") => SweepVar::PCoop,
                Some("L") => SweepVar::L,
                Some(_) => return s.fail("variable", "must be theta_db, num_bs, p_coop or L"),
                None => return s.missing("variable"),
            };
            let lo = s.require_f64("lo")?;
            let hi = s.require_f64("hi")?;
            let steps = match s.parse::<usize>("steps")? {
                Some(n) => n,
                None => return s.missing("steps"),
            };
            s.check("steps", steps >= 1, "must be at least 1")?;
            s.check("hi", lo.is_finite() && hi.is_finite() && (hi > lo || (steps == 1 && hi == lo)), "need lo < hi (or lo = hi with one step)")?;
            let sweep = Sweep { variable, lo, hi, steps };
            let fits = match variable {
                SweepVar::ThetaDb => true,
                SweepVar::NumBs => radial && window.is_finite(),
                SweepVar::PCoop | SweepVar::L => case == Case::ABinomial,
            };
            s.check("variable", fits, "does not apply to this model")?;
            match variable {
                SweepVar::NumBs => s.check("lo", lo > 0.0, "BS counts must be positive")?,
                SweepVar::PCoop => s.check("lo", lo > 0.0 && hi < 1.0, "p must stay inside (0, 1)")?,
                SweepVar::L => s.check(
                    "steps",
                    lo >= 1.0 && sweep.grid().iter().all(|v| (v - v.round()).abs() < 1e-9),
                    "L grid points must be positive integers",
                )?,
                SweepVar::ThetaDb => {}
            }
            Some(sweep)
        }
    };
    Ok(RunConfig { model, method, sweep })
}

/// Comma-separated items with their byte offsets.
fn split_with_offsets(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in s.split(',') {
        let lead = part.len() - part.trim_start().len();
        if !part.trim().is_empty() {
            out.push((start + lead, part.trim()));
        }
        start += part.len() + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str = "\
[model]
case = a_binomial
theta = -10
theta_unit = db
L = 10
p = 0.1

[method]
methods = gil_pelaez, spa:normal

[sweep]
variable = L
lo = 2
hi = 40
steps = 20
";

    #[test]
    fn parses_binomial_sweep() {
        let c = parse_config(FIG3).unwrap();
        assert_eq!(c.model.case, Case::ABinomial);
        assert!((c.model.theta - 0.1).abs() < 1e-16);
        assert_eq!(c.method.methods, vec![MethodKind::GilPelaez, MethodKind::Spa(BaseKind::Normal)]);
        let g = c.sweep.unwrap().grid();
        assert_eq!(g.len(), 20);
        assert_eq!((g[0], g[1], g[19]), (2.0, 4.0, 40.0));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_config(&FIG3.replace("p = 0.1", "pp = 0.1")).unwrap_err();
        assert_eq!((e.line, e.column), (6, 1));
        assert!(e.message.contains("unknown key"));
        let e = parse_config(&FIG3.replace("L = 10", "L = ten")).unwrap_err();
        assert_eq!((e.line, e.column), (5, 5));
        let e = parse_config(&FIG3.replace("theta_unit = db\n", "")).unwrap_err();
        assert!(e.message.contains("theta_unit"), "{e}");
        let e = parse_config(&FIG3.replace("spa:normal", "spa:gumbel")).unwrap_err();
        assert_eq!((e.line, e.column), (9, 23));
        let e = parse_config(&FIG3.replace("[sweep]", "[sweeps]")).unwrap_err();
        assert_eq!(e.line, 11);
        let e = parse_config(&FIG3.replace("variable = L", "variable = num_bs")).unwrap_err();
        assert!(e.message.contains("does not apply"));
        let e = parse_config(&FIG3.replace("hi = 40", "hi = 40.5")).unwrap_err();
        assert!(e.message.contains("integers"));
    }

    #[test]
    fn db_and_linear_agree() {
        let lin = parse_config(&FIG3.replace("theta = -10\ntheta_unit = db", "theta = 0.1\ntheta_unit = linear")).unwrap();
        assert_eq!(lin.model.theta, parse_config(FIG3).unwrap().model.theta);
        assert_eq!(db_to_linear(0.0), 1.0);
        assert_eq!(db_to_linear(10.0), 10.0);
    }

    #[test]
    fn radial_defaults() {
        let c = parse_config("[model]\ncase = b\ntheta = 1\ntheta_unit = linear\nnum_bs = 200\n[method]\nmethods = mc\n").unwrap();
        assert_eq!((c.model.a, c.model.r_coop, c.model.window, c.model.alpha, c.model.power), (30.0, 150.0, 1000.0, 4.0, 1.0));
        assert!(c.sweep.is_none());
        assert!(parse_config("[model]\ncase = b\ntheta = 1\ntheta_unit = linear\n[method]\nmethods = mc\n").is_err());
        assert!(parse_config("[model]\ncase = b\ntheta = 1\ntheta_unit = linear\nnum_bs = 5\nfading_shape = 2\n[method]\nmethods = mc\n").is_err());
    }
}
