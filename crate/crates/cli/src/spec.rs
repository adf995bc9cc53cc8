//! JSON problem specs and their conversion into engine inputs.

use std::collections::BTreeMap;

use serde::Deserialize;

use sing_asym::asymfun::{AsymFunction, ExpansionSide, Side, Term};
use sing_asym::expr::Expr;
use sing_asym::indexsets::{IndexEntry, IndexFamily, IndexSet};
use sing_asym::pushforward::{BlowupDensity, Density2D};
use sing_asym::sal::{SigmaFunction, SigmaTerm};
use sing_asym::Result;

type C64 = num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Reginteg,
    Mellin,
    Substitution,
    Sal,
    Separable,
    Pushforward,
    Indexset,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Reginteg => "reginteg",
            Kind::Mellin => "mellin",
            Kind::Substitution => "substitution",
            Kind::Sal => "sal",
            Kind::Separable => "separable",
            Kind::Pushforward => "pushforward",
            Kind::Indexset => "indexset",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    pub precision: Option<f64>,
    pub truncate: Option<f64>,
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: Kind,
    pub payload: serde_json::Value,
    #[serde(default)]
    pub output: OutputOptions,
}

/// A real exponent or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    pub fn value(self) -> C64 {
        match self {
            Number::Real(v) => C64::new(v, 0.0),
            Number::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// `x^exponent · Σ log[i] ln^i x`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub exponent: Number,
    pub log: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSpec {
    #[serde(default)]
    pub terms: Vec<TermSpec>,
    pub order: f64,
}

impl SideSpec {
    fn build(&self, side: Side) -> Result<ExpansionSide> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut term = Term::real(0.0, &t.log);
                term.exponent = t.exponent.value();
                term
            })
            .collect();
        ExpansionSide::new(side, terms, self.order)
    }
}

fn default_side() -> SideSpec {
    SideSpec { terms: Vec::new(), order: 1.0 }
}

/// A function on `(0, ∞)` with its expansions; a missing side means no
/// singular terms and a bounded remainder there.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub expr: String,
    #[serde(default = "default_side")]
    pub zero: SideSpec,
    #[serde(default = "default_side")]
    pub infinity: SideSpec,
    pub support: Option<[f64; 2]>,
    #[serde(default)]
    pub breakpoints: Vec<f64>,
}

impl FunctionSpec {
    pub fn build(&self) -> Result<AsymFunction> {
        let mut f = AsymFunction::parse(&self.expr, self.zero.build(Side::Zero)?, self.infinity.build(Side::Infinity)?)?;
        if !self.breakpoints.is_empty() {
            f = f.with_breakpoints(&self.breakpoints);
        }
        if let Some([a, b]) = self.support {
            f = f.with_support(a, b)?;
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegIntegPayload {
    pub function: FunctionSpec,
    /// Also evaluate through the sampled primitive at `[x0, x1]`.
    pub sampled: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct MellinPayload {
    pub function: FunctionSpec,
    #[serde(default)]
    pub z: Vec<Number>,
    #[serde(default)]
    pub finite_part: bool,
    #[serde(default)]
    pub fit_poles: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstitutionPayload {
    pub function: FunctionSpec,
    #[serde(default)]
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaTermSpec {
    pub alpha: f64,
    pub coeffs: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct SigmaSpec {
    pub expr: String,
    pub order: usize,
    #[serde(default)]
    pub log_bound: usize,
    #[serde(default)]
    pub zeta_asym: Vec<SigmaTermSpec>,
    pub x_support: Option<[f64; 2]>,
    pub zeta_support: Option<[f64; 2]>,
}

impl SigmaSpec {
    pub fn build(&self, order: Option<usize>) -> Result<SigmaFunction> {
        let terms = self
            .zeta_asym
            .iter()
            .map(|t| SigmaTerm::parse(t.alpha, &t.coeffs.iter().map(String::as_str).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        let mut s = SigmaFunction::parse(&self.expr, order.unwrap_or(self.order), self.log_bound, terms)?;
        if let Some([a, b]) = self.x_support {
            s = s.with_x_support(a, b);
        }
        if let Some([a, b]) = self.zeta_support {
            s = s.with_zeta_support(a, b);
        }
        Ok(s)
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct SalPayload {
    pub sigma: SigmaSpec,
    #[serde(default)]
    pub z_grid: Vec<f64>,
    #[serde(default = "yes")]
    pub enforce_hypotheses: bool,
    #[serde(default)]
    pub skip_diagnostics: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparablePayload {
    pub phi: Expr,
    pub function: FunctionSpec,
    pub q: f64,
    /// Expand `⨍ φ(x)·(t/x)·f(t/x) dx` instead of `⨍ φ(tx) f(x) dx`.
    #[serde(default)]
    pub corollary: bool,
    #[serde(default)]
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DensitySpec {
    pub expr: String,
    pub x_max: f64,
    pub y_max: f64,
    #[serde(default = "yes")]
    pub smooth: bool,
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density2D> {
        Density2D::parse(&self.expr, self.x_max, self.y_max, self.smooth)
    }
}

/// Generators per face as `[re, im, k]` triples; an empty list is the empty set.
pub type FamilySpec = BTreeMap<String, Vec<IndexEntry>>;

pub fn build_family(spec: &FamilySpec, n: f64) -> Result<IndexFamily> {
    spec.iter()
        .map(|(face, gens)| {
            let set = if gens.is_empty() { IndexSet::empty(n) } else { IndexSet::complete(gens, n)? };
            Ok((face.clone(), set))
        })
        .collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct BlowupSpec {
    /// `u_A(x, y)`; absent means the b-density `x·y·u` of the payload density.
    pub u_a: Option<String>,
    pub index: Option<FamilySpec>,
    pub x_support: Option<[f64; 2]>,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    #[serde(default)]
    pub t_grid: Vec<f64>,
}

fn default_p_max() -> usize {
    2
}

fn default_truncation() -> f64 {
    5.0
}

impl BlowupSpec {
    pub fn build(&self, density: Option<&Density2D>, n: f64) -> Result<BlowupDensity> {
        let mut d = match (&self.u_a, density) {
            (Some(u), _) => {
                let index = self.index.as_ref().ok_or_else(|| {
                    sing_asym::Error::InvalidInput("a blow-up model with `uA` needs an `index` family".into())
                })?;
                BlowupDensity::parse(u, build_family(index, n)?)?
            }
            (None, Some(u)) => BlowupDensity::from_density(u, n)?,
            (None, None) => {
                return Err(sing_asym::Error::InvalidInput("blow-up model needs `uA` or a density".into()))
            }
        };
        if let Some([a, b]) = self.x_support {
            d = d.with_x_support(a, b);
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct PushforwardPayload {
    pub density: Option<DensitySpec>,
    #[serde(default = "default_prediction_order")]
    pub order: usize,
    #[serde(default)]
    pub t: Vec<f64>,
    /// Basis `[a, b]` for `t^a ln^b t` fits of the sampled values.
    #[serde(default)]
    pub fit_basis: Vec<(f64, usize)>,
    pub blowup: Option<BlowupSpec>,
    #[serde(default = "default_truncation")]
    pub truncation: f64,
}

fn default_prediction_order() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct MatrixSpec {
    pub sources: Vec<String>,
    pub targets: Vec<String>,
    pub exponents: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "operation", rename_all = "lowercase", deny_unknown_fields)]
pub enum IndexSetPayload {
    Complete {
        generators: Vec<IndexEntry>,
        #[serde(default = "default_truncation")]
        truncation: f64,
    },
    Union {
        a: Vec<IndexEntry>,
        b: Vec<IndexEntry>,
        #[serde(default = "default_truncation")]
        truncation: f64,
    },
    Push {
        matrix: MatrixSpec,
        family: FamilySpec,
        #[serde(default = "default_truncation")]
        truncation: f64,
    },
    Integrability {
        matrix: MatrixSpec,
        family: FamilySpec,
        #[serde(default = "default_truncation")]
        truncation: f64,
    },
    Nullfaces {
        matrix: MatrixSpec,
    },
}

/// `"a:b:points:geometric"` or `"a:b:points:linear"`.
pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 4 {
        return Err(format!("grid `{text}` is not of the form a:b:points:geometric|linear"));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("grid bound `{s}`: {e}"));
    let (a, b) = (num(parts[0])?, num(parts[1])?);
    let n: usize = parts[2].trim().parse().map_err(|e| format!("grid size `{}`: {e}", parts[2]))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(format!("grid `{text}` is empty or unbounded"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    match parts[3].trim() {
        "geometric" => {
            if !(a > 0.0 && b > 0.0) {
                return Err(format!("geometric grid `{text}` needs positive bounds"));
            }
            Ok((0..n).map(|i| a * (b / a).powf(step(i))).collect())
        }
        "linear" => Ok((0..n).map(|i| a + (b - a) * step(i)).collect()),
        other => Err(format!("grid spacing `{other}` is neither geometric nor linear")),
    }
}
