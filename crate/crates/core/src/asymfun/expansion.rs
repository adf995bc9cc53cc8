use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use super::{c64, Lp, C64};
use crate::scalar::{real_pow, same_exponent, EXPONENT_TOL};

/// `v^e · p(ln v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub exponent: C64,
    pub poly: Lp,
}

impl Term {
    pub fn new(exponent: C64, poly: Lp) -> Self {
        Term { exponent, poly }
    }

    /// Real exponent and real log coefficients.
    pub fn real(exponent: f64, coeffs: &[f64]) -> Self {
        Term { exponent: c64(exponent), poly: Lp::from_real(coeffs) }
    }

    pub fn eval(&self, v: f64) -> C64 {
        real_pow(v, self.exponent) * self.poly.eval_real(v.ln())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TermRepr {
    exponent: (f64, f64),
    log_coeffs: Lp,
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TermRepr { exponent: (self.exponent.re, self.exponent.im), log_coeffs: self.poly.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TermRepr::deserialize(d)?;
        Ok(Term::new(C64::new(r.exponent.0, r.exponent.1), r.log_coeffs))
    }
}

/// Finite asymptotic expansion in a named variable, with a recorded
/// remainder `O(v^order · ln^k v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub variable: String,
    terms: Vec<Term>,
    pub remainder_order: f64,
    pub remainder_log_power: usize,
    pub notes: Vec<String>,
}

impl Expansion {
    /// Sorts by `(Re, Im)` of the exponent; coincident exponents are merged
    /// (and noted), zero polynomials dropped.
    pub fn new(variable: &str, terms: Vec<Term>, remainder_order: f64, remainder_log_power: usize) -> Self {
        let mut e = Expansion {
            variable: variable.to_string(),
            terms: Vec::new(),
            remainder_order,
            remainder_log_power,
            notes: Vec::new(),
        };
        for t in terms {
            e.push(t);
        }
        e.normalize();
        e
    }

    pub fn empty(variable: &str, remainder_order: f64) -> Self {
        Self::new(variable, Vec::new(), remainder_order, 0)
    }

    fn push(&mut self, t: Term) {
        match self.terms.iter_mut().find(|o| same_exponent(o.exponent, t.exponent, EXPONENT_TOL)) {
            Some(o) => {
                if o.exponent != t.exponent {
                    let note = format!("merged numerically coincident exponents near {}", o.exponent);
                    if !self.notes.contains(&note) {
                        self.notes.push(note);
                    }
                }
                o.poly = &o.poly + &t.poly;
            }
            None => self.terms.push(t),
        }
    }

    fn normalize(&mut self) {
        self.terms.retain(|t| !t.poly.is_zero());
        self.terms
            .sort_by(|a, b| a.exponent.re.total_cmp(&b.exponent.re).then(a.exponent.im.total_cmp(&b.exponent.im)));
    }

    /// Adds a term, merging with an existing exponent.
    pub fn add_term(&mut self, t: Term) {
        self.push(t);
        self.normalize();
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The polynomial attached to exponent `e` (zero if absent).
    pub fn poly_at(&self, e: C64) -> Lp {
        self.terms
            .iter()
            .find(|t| same_exponent(t.exponent, e, EXPONENT_TOL))
            .map_or_else(Lp::zero, |t| t.poly.clone())
    }

    /// Coefficient of `v^e ln^k v`.
    pub fn coefficient(&self, e: f64, k: usize) -> C64 {
        self.poly_at(c64(e)).coeff(k)
    }

    /// Sum of the terms at `v > 0`.
    pub fn eval(&self, v: f64) -> C64 {
        self.terms.iter().map(|t| t.eval(v)).sum()
    }

    /// Keeps the terms accepted by `keep`.
    pub fn filtered(&self, keep: impl Fn(&Term) -> bool) -> Self {
        let mut out = self.clone();
        out.terms.retain(|t| keep(t));
        out
    }

    /// Every coefficient multiplied by `c`.
    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.poly = t.poly.scale(c);
        }
        out.normalize();
        out
    }

    /// Termwise sum; the remainder is the weaker of the two.
    pub fn sum(&self, other: &Expansion, small_variable: bool) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        out.normalize();
        out.remainder_order = if small_variable {
            self.remainder_order.min(other.remainder_order)
        } else {
            self.remainder_order.max(other.remainder_order)
        };
        out.remainder_log_power = self.remainder_log_power.max(other.remainder_log_power);
        out.notes.extend(other.notes.iter().cloned());
        out
    }

    /// Largest coefficient difference against `other`, over all exponents of either.
    pub fn max_coefficient_gap(&self, other: &Expansion) -> f64 {
        let mut gap: f64 = 0.0;
        for t in self.terms.iter().chain(other.terms.iter()) {
            let a = self.poly_at(t.exponent);
            let b = other.poly_at(t.exponent);
            gap = gap.max((&a - &b).max_abs());
        }
        gap
    }
}

impl Serialize for Expansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Expansion", 5)?;
        st.serialize_field("notes", &self.notes)?;
        st.serialize_field("remainderLogPower", &self.remainder_log_power)?;
        st.serialize_field("remainderOrder", &self.remainder_order)?;
        st.serialize_field("terms", &self.terms)?;
        st.serialize_field("variable", &self.variable)?;
        st.end()
    }
}
