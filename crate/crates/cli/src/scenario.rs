//! Scenario files: TOML with fixed sections, unknown keys rejected.
//!
//! ```toml
//! format = "scenario-v1"
//! name = "h0-half"
//! output = "out/h0-half"
//!
//! [base]
//! genfun = "h0"            # or: norm = "euclidean" | "ellipse" | "randers" | "quartic"
//!
//! [omega]
//! liouville_terms = 3      # or: quotients = [0, 1, 1, 1]
//!
//! [perturbation]
//! epsilon = 0.1
//! r = 1
//! rational = "1/2"         # or: convergent_index = 2
//!
//! [grids]
//! barrier = 64
//! orbit = 100000
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use twistcore::aubry::{convergents, liouville_partial_sum, ContinuedFraction};
use twistcore::genfun::{builtin_h0, builtin_h1, SharedGenFun};
use twistcore::mather::{PlanRequest, RationalChoice, MAX_R};
use twistcore::norms::{build_section, flat_generating_function, FinslerNorm};
use twistcore::twist::{map_from_genfun, TwistMap};

use crate::CliError;

pub const SCENARIO_FORMAT: &str = "scenario-v1";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: String,
    #[serde(default = "default_name")]
    pub name: String,
    pub output: Option<PathBuf>,
    pub base: BaseSection,
    #[serde(default)]
    pub omega: OmegaSection,
    #[serde(default)]
    pub perturbation: PerturbationSection,
    #[serde(default)]
    pub grids: GridSection,
    #[serde(default)]
    pub orbit: OrbitSection,
}

fn default_name() -> String {
    "scenario".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSection {
    pub genfun: Option<String>,
    pub norm: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub beta: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSection {
    /// Partial sum `sum_{n<=terms} base^{-n!}` of the Liouville constant.
    pub liouville_terms: Option<u32>,
    #[serde(default = "default_liouville_base")]
    pub liouville_base: u32,
    pub quotients: Option<Vec<i64>>,
}

fn default_liouville_base() -> u32 {
    10
}

impl Default for OmegaSection {
    fn default() -> Self {
        Self { liouville_terms: Some(3), liouville_base: 10, quotients: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_r")]
    pub r: u32,
    pub convergent_index: Option<usize>,
    /// Explicit approximant `"p/q"`, overriding `convergent_index`.
    pub rational: Option<String>,
    #[serde(default = "default_fraction")]
    pub amplitude_fraction: f64,
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_r() -> u32 {
    1
}

fn default_fraction() -> f64 {
    1.0
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self { epsilon: 0.1, r: 1, convergent_index: None, rational: None, amplitude_fraction: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_barrier_grid")]
    pub barrier: usize,
    /// Points on the middle third of `I` for the signed barrier.
    #[serde(default = "default_signed_grid")]
    pub signed: usize,
    #[serde(default = "default_orbit_len")]
    pub orbit: usize,
    /// Window half-width for placing `I` and starting the signed barrier;
    /// the settled heteroclinic window when absent.
    pub window: Option<usize>,
    /// Gap threshold for the orbit verdict; `|J| / 2` when absent.
    pub delta: Option<f64>,
}

fn default_barrier_grid() -> usize {
    64
}

fn default_signed_grid() -> usize {
    16
}

fn default_orbit_len() -> usize {
    100_000
}

impl Default for GridSection {
    fn default() -> Self {
        Self { barrier: 64, signed: 16, orbit: 100_000, window: None, delta: None }
    }
}

/// Start of the `orbit` verb.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSection {
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "default_y0")]
    pub y0: f64,
    #[serde(default = "default_orbit_steps")]
    pub n: usize,
}

fn default_y0() -> f64 {
    0.4
}

fn default_orbit_steps() -> usize {
    1000
}

impl Default for OrbitSection {
    fn default() -> Self {
        Self { x0: 0.0, y0: 0.4, n: 1000 }
    }
}

/// The base system, resolved from `[base]`.
#[derive(Clone)]
pub enum Base {
    GenFun(SharedGenFun),
    Norm(FinslerNorm),
}

impl Base {
    pub fn label(&self) -> String {
        match self {
            Base::GenFun(h) => h.label(),
            Base::Norm(n) => n.label(),
        }
    }

    pub fn genfun(&self) -> SharedGenFun {
        match self {
            Base::GenFun(h) => h.clone(),
            Base::Norm(n) => Arc::new(flat_generating_function(n)),
        }
    }

    /// Band of `y` on which the map of the base is defined.
    pub fn band(&self) -> (f64, f64) {
        match self {
            Base::GenFun(h) if h.label() == "h1" => (-1.0, 1.0),
            Base::GenFun(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Base::Norm(n) => build_section(n).domain(),
        }
    }

    pub fn map(&self) -> TwistMap {
        match self {
            Base::GenFun(h) => map_from_genfun(h.clone(), self.band()),
            Base::Norm(n) => TwistMap::from_section(build_section(n)),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.format != SCENARIO_FORMAT {
            return Err(invalid(format!("unsupported format {:?}, expected {SCENARIO_FORMAT:?}", self.format)));
        }
        self.base()?;
        self.omega()?;
        let p = &self.perturbation;
        if !(p.epsilon >= 0.0 && p.epsilon <= 1.0) {
            return Err(invalid(format!("epsilon = {} outside [0, 1]", p.epsilon)));
        }
        if p.r == 0 || p.r > MAX_R {
            return Err(invalid(format!("r = {} outside 1..={MAX_R}", p.r)));
        }
        if !(p.amplitude_fraction > 0.0 && p.amplitude_fraction <= 1.0) {
            return Err(invalid(format!("amplitude_fraction = {} outside (0, 1]", p.amplitude_fraction)));
        }
        if p.rational.is_some() && p.convergent_index.is_some() {
            return Err(invalid("give either rational or convergent_index, not both"));
        }
        if let Some(r) = &p.rational {
            parse_rational(r)?;
        }
        let g = &self.grids;
        if !(2..=4096).contains(&g.barrier) {
            return Err(invalid(format!("grids.barrier = {} outside 2..=4096", g.barrier)));
        }
        if !(1..=1024).contains(&g.signed) {
            return Err(invalid(format!("grids.signed = {} outside 1..=1024", g.signed)));
        }
        if !(100..=10_000_000).contains(&g.orbit) {
            return Err(invalid(format!("grids.orbit = {} outside 100..=10000000", g.orbit)));
        }
        if let Some(d) = g.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(invalid(format!("grids.delta = {d} outside (0, 1)")));
            }
        }
        if self.orbit.n == 0 || self.orbit.n > 10_000_000 {
            return Err(invalid(format!("orbit.n = {} outside 1..=10000000", self.orbit.n)));
        }
        Ok(())
    }

    pub fn base(&self) -> Result<Base, CliError> {
        let b = &self.base;
        match (&b.genfun, &b.norm) {
            (Some(g), None) => {
                if b.a.is_some() || b.b.is_some() || b.beta.is_some() || b.c.is_some() {
                    return Err(invalid("norm parameters given for a builtin generating function"));
                }
                match g.as_str() {
                    "h0" => Ok(Base::GenFun(builtin_h0())),
                    "h1" => Ok(Base::GenFun(builtin_h1())),
                    other => Err(invalid(format!("unknown generating function {other:?} (h0, h1)"))),
                }
            }
            (None, Some(n)) => {
                let need = |v: Option<f64>, key: &str| v.ok_or_else(|| invalid(format!("norm {n:?} needs `{key}`")));
                match n.as_str() {
                    "euclidean" => Ok(Base::Norm(FinslerNorm::euclidean())),
                    "ellipse" => {
                        let (a, bb) = (need(b.a, "a")?, need(b.b, "b")?);
                        if !(a > 0.0 && bb > 0.0) {
                            return Err(invalid("ellipse axes must be positive"));
                        }
                        Ok(Base::Norm(FinslerNorm::ellipse(a, bb)))
                    }
                    "randers" => {
                        let beta = need(b.beta, "beta")?;
                        if !(beta.abs() < 1.0) {
                            return Err(invalid("randers needs |beta| < 1"));
                        }
                        Ok(Base::Norm(FinslerNorm::randers(beta)))
                    }
                    "quartic" => Ok(Base::Norm(FinslerNorm::quartic(need(b.c, "c")?))),
                    other => Err(invalid(format!("unknown norm family {other:?}"))),
                }
            }
            _ => Err(invalid("[base] needs exactly one of `genfun` or `norm`")),
        }
    }

    pub fn omega(&self) -> Result<ContinuedFraction, CliError> {
        let o = &self.omega;
        match (o.liouville_terms, &o.quotients) {
            (Some(t), None) => {
                if !(1..=5).contains(&t) || !(2..=100).contains(&o.liouville_base) {
                    return Err(invalid("liouville_terms must be in 1..=5 and liouville_base in 2..=100"));
                }
                Ok(ContinuedFraction::from_rational(&liouville_partial_sum(t, o.liouville_base)))
            }
            (None, Some(q)) => {
                if q.is_empty() || q.iter().skip(1).any(|&a| a <= 0) {
                    return Err(invalid("partial quotients must be nonempty and positive after the first"));
                }
                Ok(ContinuedFraction::from_quotients(q.iter().map(|&a| a.into()).collect()))
            }
            _ => Err(invalid("[omega] needs exactly one of `liouville_terms` or `quotients`")),
        }
    }

    /// The approximant `p/q`: explicit, the chosen convergent, or the first
    /// convergent with `q >= 2`.
    pub fn rational(&self) -> Result<(i64, i64), CliError> {
        if let Some(r) = &self.perturbation.rational {
            return parse_rational(r);
        }
        let cf = self.omega()?;
        let all = convergents(&cf, cf.len()).map_err(CliError::Core)?;
        let pick = match self.perturbation.convergent_index {
            Some(k) => all.get(k).ok_or_else(|| invalid(format!("convergent_index {k} beyond {} quotients", all.len())))?,
            None => all
                .iter()
                .find(|c| c.q >= 2.into())
                .ok_or_else(|| invalid("omega has no convergent with q >= 2"))?,
        };
        pick.to_i64().ok_or_else(|| invalid("convergent does not fit in i64"))
    }

    pub fn plan_request(&self, window: Option<usize>) -> Result<PlanRequest, CliError> {
        let (p, q) = self.rational()?;
        Ok(PlanRequest {
            epsilon: self.perturbation.epsilon,
            r: self.perturbation.r,
            omega: self.omega()?,
            rational: RationalChoice::Fixed { p, q },
            amplitude_fraction: self.perturbation.amplitude_fraction,
            window: window.or(self.grids.window),
        })
    }
}

pub fn parse_rational(s: &str) -> Result<(i64, i64), CliError> {
    let (p, q) = s.split_once('/').ok_or_else(|| invalid(format!("rational {s:?} is not of the form p/q")))?;
    let p: i64 = p.trim().parse().map_err(|_| invalid(format!("bad numerator in {s:?}")))?;
    let q: i64 = q.trim().parse().map_err(|_| invalid(format!("bad denominator in {s:?}")))?;
    if q < 1 {
        return Err(invalid(format!("denominator of {s:?} must be positive")));
    }
    Ok((p, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    const H0: &str = r#"
format = "scenario-v1"
name = "h0"
[base]
genfun = "h0"
[perturbation]
rational = "1/2"
"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = Scenario::parse(H0).unwrap();
        assert_eq!(s.rational().unwrap(), (1, 2));
        assert_eq!(s.grids.barrier, 64);
        assert_eq!(s.perturbation.epsilon, 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = H0.replace("genfun = \"h0\"", "genfun = \"h0\"\nsmoothness = 3");
        assert!(matches!(Scenario::parse(&bad), Err(CliError::Config(_))));
        let bad = format!("{H0}\n[extra]\nx = 1\n");
        assert!(Scenario::parse(&bad).is_err());
    }

    #[test]
    fn ranges_are_enforced() {
        assert!(Scenario::parse(&H0.replace("rational = \"1/2\"", "rational = \"1/2\"\nr = 9")).is_err());
        assert!(Scenario::parse(&H0.replace("rational = \"1/2\"", "rational = \"1/2\"\nepsilon = -0.1")).is_err());
        assert!(Scenario::parse(&H0.replace("scenario-v1", "scenario-v0")).is_err());
        assert!(Scenario::parse(&H0.replace("genfun = \"h0\"", "genfun = \"h0\"\nnorm = \"euclidean\"")).is_err());
    }

    #[test]
    fn default_convergent_has_q_at_least_two() {
        let s = Scenario::parse("format = \"scenario-v1\"\n[base]\nnorm = \"euclidean\"\n[omega]\nquotients = [0, 1, 1, 1, 1]\n").unwrap();
        assert_eq!(s.rational().unwrap(), (1, 2));
        assert_eq!(s.base().unwrap().band(), (-1.0, 1.0));
    }
}
