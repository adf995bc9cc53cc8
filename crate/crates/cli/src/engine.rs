//! Dispatch of validated specs to the engines.

use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use sing_asym::asymfun::Expansion;
use sing_asym::indexsets::{
    check_integrability, extended_union, nullfaces, push_index_family, ExponentMatrix, IndexEntry, IndexFamily,
    IndexSet,
};
use sing_asym::pushforward::{
    condition_c_check, f_pushforward, fit_asymptotics, push_xy_with, sal_prediction_smooth,
};
use sing_asym::quadrature::Quadrature;
use sing_asym::sal::{
    corollary_expansion, sal_expansion_verified, sal_expansion_with, separable_expansion, SalOptions,
};
use sing_asym::Error;

use crate::spec::*;

type C64 = num_complex::Complex64;

/// How a run ended; the discriminant is the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Validation = 2,
    Numerical = 3,
    Hypothesis = 4,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Validation => "validation-error",
            Status::Numerical => "numerical-failure",
            Status::Hypothesis => "hypothesis-failure",
        }
    }
}

pub fn classify(e: &Error) -> Status {
    match e {
        Error::Domain(_)
        | Error::StepDifferentiation(_)
        | Error::Pole { .. }
        | Error::Quadrature { .. }
        | Error::Divergence(_)
        | Error::RankDeficient { .. } => Status::Numerical,
        Error::Hypothesis(_) => Status::Hypothesis,
        _ => Status::Validation,
    }
}

/// One CSV line: `t, value, prediction, residual`.
#[derive(Debug, Clone, Copy)]
pub struct Row {
    pub t: f64,
    pub value: f64,
    pub prediction: f64,
    pub residual: f64,
}

#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub result: Value,
    pub rows: Vec<Row>,
    pub message: Option<String>,
}

impl Outcome {
    fn ok(result: Value, rows: Vec<Row>) -> Self {
        Outcome { status: Status::Ok, result, rows, message: None }
    }

    pub fn failed(e: &Error, result: Value) -> Self {
        Outcome { status: classify(e), result, rows: Vec::new(), message: Some(e.to_string()) }
    }

    pub fn invalid(message: String) -> Self {
        Outcome { status: Status::Validation, result: Value::Null, rows: Vec::new(), message: Some(message) }
    }
}

/// Command-line overrides of the spec's output options.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub precision: Option<f64>,
    pub truncate: Option<f64>,
    pub grid: Option<Vec<f64>>,
}

struct Settings {
    quad: Option<Quadrature<f64>>,
    truncate: Option<f64>,
    grid: Option<Vec<f64>>,
}

impl Settings {
    fn quad(&self) -> Quadrature<f64> {
        self.quad.unwrap_or_default()
    }

    fn grid_or(&self, own: &[f64]) -> Vec<f64> {
        self.grid.clone().unwrap_or_else(|| own.to_vec())
    }

    fn truncate_usize(&self) -> Result<Option<usize>, String> {
        match self.truncate {
            None => Ok(None),
            Some(n) if n >= 0.0 && n.fract() == 0.0 => Ok(Some(n as usize)),
            Some(n) => Err(format!("truncation {n} must be a non-negative integer for this kind")),
        }
    }
}

fn c(z: C64) -> Value {
    json!([z.re, z.im])
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn payload<T: DeserializeOwned>(v: &Value) -> Result<T, String> {
    serde_json::from_value(v.clone()).map_err(|e| format!("payload does not match the schema: {e}"))
}

/// Validates and runs one spec.
pub fn run_spec(spec: &ProblemSpec, over: &Overrides) -> Outcome {
    let settings = match settings(spec, over) {
        Ok(s) => s,
        Err(m) => return Outcome::invalid(m),
    };
    let r = match spec.kind {
        Kind::Reginteg => payload(&spec.payload).map(|p| reginteg(&p, &settings)),
        Kind::Mellin => payload(&spec.payload).map(|p| mellin(&p, &settings)),
        Kind::Substitution => payload(&spec.payload).map(|p| substitution(&p, &settings)),
        Kind::Sal => payload(&spec.payload).and_then(|p| sal(&p, &settings)),
        Kind::Separable => payload(&spec.payload).map(|p| separable(&p, &settings)),
        Kind::Pushforward => payload(&spec.payload).and_then(|p| pushforward(&p, &settings)),
        Kind::Indexset => payload(&spec.payload).map(|p| indexset(&p, &settings)),
    };
    r.unwrap_or_else(Outcome::invalid)
}

fn settings(spec: &ProblemSpec, over: &Overrides) -> Result<Settings, String> {
    let precision = over.precision.or(spec.output.precision);
    if let Some(p) = precision {
        if !(p > 0.0 && p < 1.0) {
            return Err(format!("precision {p} must lie in (0, 1)"));
        }
    }
    let grid = match (&over.grid, &spec.output.grid) {
        (Some(g), _) => Some(g.clone()),
        (None, Some(text)) => Some(parse_grid(text)?),
        (None, None) => None,
    };
    Ok(Settings {
        quad: precision.map(|p| Quadrature::new(p, p)),
        truncate: over.truncate.or(spec.output.truncate),
        grid,
    })
}

macro_rules! attempt {
    ($e:expr, $partial:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return Outcome::failed(&err, $partial),
        }
    };
}

fn reginteg(p: &RegIntegPayload, s: &Settings) -> Outcome {
    let f = attempt!(p.function.build(), Value::Null);
    let quad = s.quad();
    let est = attempt!(f.reg_integral_with(&quad), Value::Null);
    let mut result = json!({ "value": c(est.value), "error": est.error });
    if let Some([x0, x1]) = p.sampled {
        let sampled = attempt!(f.reg_integral_sampled(&quad, x0, x1), result);
        result["sampled"] = json!({ "x0": x0, "x1": x1, "value": c(sampled.value), "error": sampled.error });
    }
    Outcome::ok(result, Vec::new())
}

fn mellin(p: &MellinPayload, s: &Settings) -> Outcome {
    let f = attempt!(p.function.build(), Value::Null);
    let quad = s.quad();
    let (lo, hi) = f.mellin_strip();
    let zs: Vec<C64> = match &s.grid {
        Some(g) => g.iter().map(|&v| C64::new(v, 0.0)).collect(),
        None => p.z.iter().map(|z| z.value()).collect(),
    };
    let values: Vec<Value> = zs
        .iter()
        .map(|&z| match f.mellin_with(&quad, z) {
            Ok(m) => json!({ "z": c(z), "value": c(m.value), "error": m.error }),
            Err(e) => json!({ "z": c(z), "failure": e.to_string() }),
        })
        .collect();
    let mut result = json!({
        "strip": [lo, hi],
        "poles": to_value(&f.mellin_poles()),
        "values": values,
    });
    if p.finite_part {
        let fp = attempt!(f.mellin_finite_part_with(&quad), result);
        let reg = attempt!(f.reg_integral_with(&quad), result);
        result["finitePart"] = json!({ "value": c(fp.value), "error": fp.error, "regIntegral": c(reg.value) });
    }
    if p.fit_poles {
        let fits: Vec<Value> = f
            .mellin_poles()
            .iter()
            .map(|pole| match f.fit_pole_order(pole.location) {
                Ok(fit) => to_value(&fit),
                Err(e) => json!({ "location": c(pole.location), "failure": e.to_string() }),
            })
            .collect();
        result["poleFits"] = Value::Array(fits);
    }
    Outcome::ok(result, Vec::new())
}

fn substitution(p: &SubstitutionPayload, s: &Settings) -> Outcome {
    let f = attempt!(p.function.build(), Value::Null);
    let quad = s.quad();
    let reg = attempt!(f.reg_integral_with(&quad), Value::Null);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for t in s.grid_or(&p.t) {
        let lemma = attempt!(f.scale_reg_integral_with(&quad, t), Value::Null);
        let direct = attempt!(f.rescale(t).and_then(|g| g.reg_integral_with(&quad)), Value::Null);
        let gap = (lemma.value - direct.value).norm();
        values.push(json!({ "t": t, "lemma": c(lemma.value), "rescaled": c(direct.value), "gap": gap }));
        rows.push(Row { t, value: direct.value.re, prediction: lemma.value.re, residual: gap });
    }
    Outcome::ok(json!({ "regIntegral": c(reg.value), "values": values }), rows)
}

fn sal(p: &SalPayload, s: &Settings) -> Result<Outcome, String> {
    let sigma = match p.sigma.build(s.truncate_usize()?) {
        Ok(v) => v,
        Err(e) => return Ok(Outcome::failed(&e, Value::Null)),
    };
    let opts = SalOptions {
        quad: s.quad(),
        enforce_hypotheses: p.enforce_hypotheses,
        skip_diagnostics: p.skip_diagnostics,
    };
    let grid = s.grid_or(&p.z_grid);
    let run = if grid.is_empty() {
        sal_expansion_with(&sigma, &opts).map(|r| (r, None))
    } else {
        sal_expansion_verified(&sigma, &opts, &grid).map(|(r, v)| (r, Some(v)))
    };
    Ok(match run {
        Ok((report, verify)) => {
            let rows = verify
                .as_ref()
                .map(|v| {
                    v.points
                        .iter()
                        .map(|pt| Row { t: pt.z, value: pt.direct, prediction: pt.truncated, residual: pt.residual })
                        .collect()
                })
                .unwrap_or_default();
            let mut result = to_value(&report);
            if let Some(v) = verify {
                result["verification"] = to_value(&v);
            }
            Outcome::ok(result, rows)
        }
        Err(Error::Hypothesis(h)) => {
            let e = Error::Hypothesis(h.clone());
            Outcome::failed(&e, json!({ "hypothesisDiagnostics": to_value(&*h) }))
        }
        Err(e) => Outcome::failed(&e, Value::Null),
    })
}

fn separable(p: &SeparablePayload, s: &Settings) -> Outcome {
    let f = attempt!(p.function.build(), Value::Null);
    let e = if p.corollary {
        attempt!(corollary_expansion(&p.phi, &f, p.q), Value::Null)
    } else {
        attempt!(separable_expansion(&p.phi, &f, p.q), Value::Null)
    };
    let samples: Vec<Value> = s.grid_or(&p.t).iter().map(|&t| json!({ "t": t, "value": c(e.eval(t)) })).collect();
    Outcome::ok(json!({ "expansion": to_value(&e), "samples": samples }), Vec::new())
}

fn pushforward(p: &PushforwardPayload, s: &Settings) -> Result<Outcome, String> {
    let order = s.truncate_usize()?.unwrap_or(p.order);
    let quad = s.quad.unwrap_or_else(|| Quadrature::new(1e-15, 1e-14));
    let grid = s.grid_or(&p.t);
    let density = match p.density.as_ref().map(DensitySpec::build).transpose() {
        Ok(d) => d,
        Err(e) => return Ok(Outcome::failed(&e, Value::Null)),
    };
    if density.is_none() && p.blowup.is_none() {
        return Err("pushforward payload needs a `density`, a `blowup` model or both".into());
    }
    let mut result = json!({});
    let mut rows = Vec::new();
    if let Some(u) = &density {
        let prediction: Option<Expansion> = if u.is_smooth() {
            Some(match sal_prediction_smooth(u, order) {
                Ok(e) => e,
                Err(e) => return Ok(Outcome::failed(&e, result)),
            })
        } else {
            None
        };
        let mut samples = Vec::new();
        let mut fit_points = Vec::new();
        for &t in &grid {
            let v = match push_xy_with(u, t, &quad) {
                Ok(v) => v,
                Err(e) => return Ok(Outcome::failed(&e, result)),
            };
            let pred = prediction.as_ref().map_or(f64::NAN, |e| e.eval(t).re);
            rows.push(Row { t, value: v.value, prediction: pred, residual: (v.value - pred).abs() });
            fit_points.push((t, v.value));
            samples.push(json!({ "t": t, "value": v.value, "error": v.error, "note": v.note }));
        }
        result["samples"] = Value::Array(samples);
        if let Some(e) = &prediction {
            result["prediction"] = to_value(e);
        }
        if !p.fit_basis.is_empty() {
            result["fit"] = match fit_asymptotics(&fit_points, &p.fit_basis) {
                Ok(f) => to_value(&f),
                Err(e) => return Ok(Outcome::failed(&e, result)),
            };
        }
    }
    if let Some(b) = &p.blowup {
        let d = match b.build(density.as_ref(), p.truncation) {
            Ok(d) => d,
            Err(e) => return Ok(Outcome::failed(&e, result)),
        };
        let t_grid = if b.t_grid.is_empty() { grid.clone() } else { b.t_grid.clone() };
        let coefficients: Vec<Value> = t_grid
            .iter()
            .map(|&t| match f_pushforward(&d, t) {
                Ok(v) => json!({ "t": t, "value": v.value, "error": v.error }),
                Err(e) => json!({ "t": t, "failure": e.to_string() }),
            })
            .collect();
        result["blowup"] = json!({
            "sigma": d.sigma_expr().to_string(),
            "uB": d.u_b_expr().to_string(),
            "dtOverT": coefficients,
            "conditionC": to_value(&condition_c_check(&d, b.p_max, &t_grid)),
        });
    }
    Ok(Outcome::ok(result, rows))
}

fn set_value(set: &IndexSet) -> Value {
    json!({ "truncation": set.truncation(), "entries": to_value(&set.entries()) })
}

fn family_value(fam: &IndexFamily) -> Value {
    Value::Object(fam.iter().map(|(k, v)| (k.clone(), set_value(v))).collect())
}

fn complete(gens: &[IndexEntry], n: f64) -> sing_asym::Result<IndexSet> {
    if gens.is_empty() {
        Ok(IndexSet::empty(n))
    } else {
        IndexSet::complete(gens, n)
    }
}

fn matrix(m: &MatrixSpec) -> sing_asym::Result<ExponentMatrix> {
    ExponentMatrix::new(m.sources.clone(), m.targets.clone(), m.exponents.clone())
}

fn indexset(p: &IndexSetPayload, s: &Settings) -> Outcome {
    let n_of = |own: f64| s.truncate.unwrap_or(own);
    let result = match p {
        IndexSetPayload::Complete { generators, truncation } => {
            set_value(&attempt!(complete(generators, n_of(*truncation)), Value::Null))
        }
        IndexSetPayload::Union { a, b, truncation } => {
            let n = n_of(*truncation);
            let a = attempt!(complete(a, n), Value::Null);
            let b = attempt!(complete(b, n), Value::Null);
            set_value(&attempt!(extended_union(&a, &b), Value::Null))
        }
        IndexSetPayload::Push { matrix: m, family, truncation } => {
            let n = n_of(*truncation);
            let e = attempt!(matrix(m), Value::Null);
            let fam = attempt!(build_family(family, n), Value::Null);
            let (out, report) = attempt!(push_index_family(&e, &fam, n), Value::Null);
            json!({ "family": family_value(&out), "emptyFaces": report.empty_faces })
        }
        IndexSetPayload::Integrability { matrix: m, family, truncation } => {
            let e = attempt!(matrix(m), Value::Null);
            let fam = attempt!(build_family(family, n_of(*truncation)), Value::Null);
            to_value(&attempt!(check_integrability(&fam, &e), Value::Null))
        }
        IndexSetPayload::Nullfaces { matrix: m } => {
            let e = attempt!(matrix(m), Value::Null);
            json!({ "nullfaces": nullfaces(&e) })
        }
    };
    Outcome::ok(result, Vec::new())
}
