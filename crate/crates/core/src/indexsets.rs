//! Index sets, index families and exponent matrices: completion, the
//! extended union, push-forward of index families, nullfaces and the
//! integrability condition.
//!
//! Index sets are infinite; they are carried as generators plus a truncation
//! bound `N`, and only entries with `Re α < N` are materialized.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{same_exponent, Cplx, Real, EXPONENT_TOL};
use crate::{Error, Result};

/// Default truncation bound for materialized index sets.
pub const DEFAULT_TRUNCATION: f64 = 5.0;

/// `(α, k)`: the term `ρ^α ln^k ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexEntry<T: Real = f64> {
    pub alpha: Cplx<T>,
    pub k: usize,
}

impl<T: Real> IndexEntry<T> {
    pub fn new(alpha: Cplx<T>, k: usize) -> Self {
        IndexEntry { alpha, k }
    }

    pub fn real(alpha: T, k: usize) -> Self {
        IndexEntry { alpha: Cplx::new(alpha, T::zero()), k }
    }
}

impl Serialize for IndexEntry<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.alpha.re, self.alpha.im, self.k).serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexEntry<f64> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (re, im, k) = <(f64, f64, usize)>::deserialize(d)?;
        Ok(IndexEntry { alpha: Cplx::new(re, im), k })
    }
}

/// Truncated materialization of an index set.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet<T: Real = f64> {
    generators: Vec<IndexEntry<T>>,
    truncation: T,
    entries: Vec<IndexEntry<T>>,
}

fn order<T: Real>(a: &IndexEntry<T>, b: &IndexEntry<T>) -> std::cmp::Ordering {
    a.alpha
        .re
        .partial_cmp(&b.alpha.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.alpha.im.partial_cmp(&b.alpha.im).unwrap_or(std::cmp::Ordering::Equal))
        .then(a.k.cmp(&b.k))
}

impl<T: Real> IndexSet<T> {
    /// Smallest index set containing `generators`, truncated at `Re α < n`.
    pub fn complete(generators: &[IndexEntry<T>], n: T) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        Ok(Self::build(generators.to_vec(), n, T::lit(EXPONENT_TOL)))
    }

    /// The empty set: no admissible terms (rapid vanishing).
    pub fn empty(n: T) -> Self {
        IndexSet { generators: Vec::new(), truncation: n, entries: Vec::new() }
    }

    fn build(generators: Vec<IndexEntry<T>>, n: T, tol: T) -> Self {
        // clusters of coinciding exponents with their maximal log power
        let mut clusters: Vec<(Cplx<T>, usize)> = Vec::new();
        for g in &generators {
            let mut shift = T::zero();
            while g.alpha.re + shift < n {
                let a = g.alpha + shift;
                match clusters.iter_mut().find(|(c, _)| same_exponent(*c, a, tol)) {
                    Some(slot) => slot.1 = slot.1.max(g.k),
                    None => clusters.push((a, g.k)),
                }
                shift = shift + T::one();
            }
        }
        let mut entries: Vec<IndexEntry<T>> = clusters
            .into_iter()
            .flat_map(|(a, kmax)| (0..=kmax).map(move |k| IndexEntry::new(a, k)))
            .collect();
        entries.sort_by(order);
        IndexSet { generators, truncation: n, entries }
    }

    /// Materialized entries sorted by `(Re α, Im α, k)`.
    pub fn entries(&self) -> &[IndexEntry<T>] {
        &self.entries
    }

    pub fn generators(&self) -> &[IndexEntry<T>] {
        &self.generators
    }

    pub fn truncation(&self) -> T {
        self.truncation
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn contains(&self, alpha: Cplx<T>, k: usize) -> bool {
        let tol = T::lit(EXPONENT_TOL);
        self.entries.iter().any(|e| e.k == k && same_exponent(e.alpha, alpha, tol))
    }

    /// Smallest real part among materialized entries.
    pub fn min_re(&self) -> Option<T> {
        self.entries.iter().map(|e| e.alpha.re).reduce(T::min)
    }

    /// The same set materialized with another truncation bound.
    pub fn rematerialize(&self, n: T) -> Self {
        Self::build(self.generators.clone(), n, T::lit(EXPONENT_TOL))
    }

    /// Verifies the closure rules on the materialized entries.
    pub fn is_closed(&self) -> bool {
        let tol = T::lit(EXPONENT_TOL);
        self.entries.iter().all(|e| {
            let shifted = e.alpha + T::one();
            let shift_ok = shifted.re >= self.truncation || self.contains(shifted, e.k);
            let down_ok = (0..e.k).all(|p| self.contains(e.alpha, p));
            shift_ok && down_ok && e.alpha.re < self.truncation + tol
        }) && self.entries.windows(2).all(|w| order(&w[0], &w[1]) != std::cmp::Ordering::Greater)
    }

    /// Entries equal as sets (within the exponent tolerance).
    pub fn same_entries(&self, other: &Self) -> bool {
        self.len() == other.len() && self.entries.iter().all(|e| other.contains(e.alpha, e.k))
    }
}

/// `K ⋸ I = K ∪ I ∪ {(z, p'+p''+1) : (z,p') ∈ K, (z,p'') ∈ I}`.
pub fn extended_union<T: Real>(k: &IndexSet<T>, i: &IndexSet<T>) -> Result<IndexSet<T>> {
    extended_union_with_tol(k, i, T::lit(EXPONENT_TOL))
}

/// Extended union with an explicit exponent-matching tolerance.
pub fn extended_union_with_tol<T: Real>(k: &IndexSet<T>, i: &IndexSet<T>, tol: T) -> Result<IndexSet<T>> {
    if (k.truncation - i.truncation).abs() > tol {
        return Err(Error::TruncationMismatch(k.truncation.to_f64_lossy(), i.truncation.to_f64_lossy()));
    }
    let mut gens: Vec<IndexEntry<T>> = k.entries.iter().chain(i.entries.iter()).copied().collect();
    for a in &k.entries {
        for b in &i.entries {
            if same_exponent(a.alpha, b.alpha, tol) {
                gens.push(IndexEntry::new(a.alpha, a.k + b.k + 1));
            }
        }
    }
    Ok(IndexSet::build(gens, k.truncation, tol))
}

/// Assignment of an index set to each boundary hypersurface.
pub type IndexFamily<T = f64> = BTreeMap<String, IndexSet<T>>;

/// Exponent matrix `e(G, H)` of a b-map: rows are source faces, columns target faces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExponentMatrix {
    pub faces_x: Vec<String>,
    pub faces_y: Vec<String>,
    pub e: Vec<Vec<u32>>,
}

impl ExponentMatrix {
    pub fn new(faces_x: Vec<String>, faces_y: Vec<String>, e: Vec<Vec<u32>>) -> Result<Self> {
        let m = ExponentMatrix { faces_x, faces_y, e };
        m.validate()?;
        Ok(m)
    }

    /// Shape check.
    pub fn validate(&self) -> Result<()> {
        if self.e.len() != self.faces_x.len() || self.e.iter().any(|row| row.len() != self.faces_y.len()) {
            return Err(Error::FaceMismatch(format!(
                "matrix shape does not match {} source and {} target faces",
                self.faces_x.len(),
                self.faces_y.len()
            )));
        }
        Ok(())
    }

    /// Each source face maps into at most one target face.
    pub fn check_b_normal(&self) -> Result<()> {
        self.validate()?;
        for (g, row) in self.faces_x.iter().zip(&self.e) {
            if row.iter().filter(|&&v| v != 0).count() > 1 {
                return Err(Error::NotBNormal(g.clone()));
            }
        }
        Ok(())
    }

    pub fn get(&self, g: usize, h: usize) -> u32 {
        self.e[g][h]
    }
}

/// Faces mapped into no target face.
pub fn nullfaces(e: &ExponentMatrix) -> Vec<String> {
    e.faces_x
        .iter()
        .zip(&e.e)
        .filter(|(_, row)| row.iter().all(|&v| v == 0))
        .map(|(g, _)| g.clone())
        .collect()
}

/// Side information from [`push_index_family`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PushReport {
    /// Target faces receiving no nonzero column; assigned the empty set.
    pub empty_faces: Vec<String>,
}

fn covers<T: Real>(fam: &IndexFamily<T>, faces: &[String]) -> Result<()> {
    if let Some(missing) = faces.iter().find(|g| !fam.contains_key(*g)) {
        return Err(Error::FaceMismatch(format!("no index set for face `{missing}`")));
    }
    if let Some(extra) = fam.keys().find(|k| !faces.contains(k)) {
        return Err(Error::FaceMismatch(format!("unknown face `{extra}`")));
    }
    Ok(())
}

/// `f_#𝒦(H)`: extended union, folded in source-face order, of the sets
/// `{(z/e(G,H), p)}` over faces `G` with `e(G,H) ≠ 0`.
pub fn push_index_family<T: Real>(
    e: &ExponentMatrix,
    fam: &IndexFamily<T>,
    n: T,
) -> Result<(IndexFamily<T>, PushReport)> {
    e.check_b_normal()?;
    covers(fam, &e.faces_x)?;
    let mut out = IndexFamily::new();
    let mut report = PushReport::default();
    for (h_idx, h) in e.faces_y.iter().enumerate() {
        let mut acc: Option<IndexSet<T>> = None;
        for (g_idx, g) in e.faces_x.iter().enumerate() {
            let exp = e.get(g_idx, h_idx);
            if exp == 0 {
                continue;
            }
            let div = T::of_usize(exp as usize);
            let source = &fam[g];
            let scaled = if source.is_empty() {
                IndexSet::empty(n)
            } else {
                let wide = source.rematerialize(n * div);
                let gens: Vec<IndexEntry<T>> =
                    wide.entries().iter().map(|en| IndexEntry::new(en.alpha / div, en.k)).collect();
                if gens.is_empty() {
                    IndexSet::empty(n)
                } else {
                    IndexSet::complete(&gens, n)?
                }
            };
            acc = Some(match acc {
                None => scaled,
                Some(prev) => extended_union(&prev, &scaled)?,
            });
        }
        let set = acc.unwrap_or_else(|| {
            report.empty_faces.push(h.clone());
            IndexSet::empty(n)
        });
        out.insert(h.clone(), set);
    }
    Ok((out, report))
}

/// Verdict of the integrability condition on nullfaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegrabilityReport {
    pub integrable: bool,
    pub nullfaces: Vec<String>,
    /// `(face, entry)` pairs with `Re α <= 0` on a nullface.
    pub violations: Vec<(String, IndexEntry<f64>)>,
}

/// True iff every materialized entry on every nullface has `Re α > 0`.
pub fn check_integrability<T: Real>(fam: &IndexFamily<T>, e: &ExponentMatrix) -> Result<IntegrabilityReport> {
    e.validate()?;
    covers(fam, &e.faces_x)?;
    let null = nullfaces(e);
    let mut violations = Vec::new();
    for g in &null {
        for en in fam[g].entries() {
            if en.alpha.re <= T::zero() {
                violations.push((
                    g.clone(),
                    IndexEntry::new(Cplx::new(en.alpha.re.to_f64_lossy(), en.alpha.im.to_f64_lossy()), en.k),
                ));
            }
        }
    }
    Ok(IntegrabilityReport { integrable: violations.is_empty(), nullfaces: null, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: f64, k: usize) -> IndexEntry {
        IndexEntry::real(a, k)
    }

    fn smooth(n: f64) -> IndexSet {
        IndexSet::complete(&[r(0.0, 0)], n).unwrap()
    }

    fn pairs(s: &IndexSet) -> Vec<(f64, usize)> {
        s.entries().iter().map(|e| (e.alpha.re, e.k)).collect()
    }

    /// Brute-force closure: iterate the two rules to a fixed point.
    fn brute_closure(gens: &[(f64, usize)], n: f64) -> Vec<(f64, usize)> {
        let mut set: Vec<(f64, usize)> = gens.iter().copied().filter(|g| g.0 < n).collect();
        loop {
            let mut grown = set.clone();
            for &(a, k) in &set {
                if a + 1.0 < n && !grown.contains(&(a + 1.0, k)) {
                    grown.push((a + 1.0, k));
                }
                for p in 0..k {
                    if !grown.contains(&(a, p)) {
                        grown.push((a, p));
                    }
                }
            }
            if grown.len() == set.len() {
                break;
            }
            set = grown;
        }
        set.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        set
    }

    #[test]
    fn completion_examples() {
        assert_eq!(pairs(&smooth(3.0)), vec![(0.0, 0), (1.0, 0), (2.0, 0)]);
        let s = IndexSet::complete(&[r(0.0, 1)], 2.0).unwrap();
        assert_eq!(pairs(&s), brute_closure(&[(0.0, 1)], 2.0));
        assert_eq!(pairs(&s), vec![(0.0, 0), (0.0, 1), (1.0, 0), (1.0, 1)]);
        assert!(s.is_closed());
        assert!(matches!(IndexSet::<f64>::complete(&[], 3.0), Err(Error::EmptyGenerators)));
    }

    #[test]
    fn extended_union_examples() {
        let k = smooth(5.0);
        let ku = extended_union(&k, &k).unwrap();
        let expect: Vec<(f64, usize)> = (0..5).flat_map(|n| [(n as f64, 0), (n as f64, 1)]).collect();
        assert_eq!(pairs(&ku), expect);

        let half = IndexSet::complete(&[r(0.5, 0)], 5.0).unwrap();
        let u = extended_union(&k, &half).unwrap();
        assert_eq!(u.len(), k.len() + half.len());
        assert!(u.entries().iter().all(|e| e.k == 0));

        let one = IndexSet::complete(&[r(1.0, 0)], 3.0).unwrap();
        let expect = IndexSet::complete(&[r(1.0, 0), r(1.0, 1)], 3.0).unwrap();
        assert!(extended_union(&one, &one).unwrap().same_entries(&expect));

        let other = smooth(4.0);
        assert!(matches!(extended_union(&k, &other), Err(Error::TruncationMismatch(..))));
    }

    #[test]
    fn extended_union_tolerance_is_configurable() {
        let a = IndexSet::complete(&[r(0.0, 0)], 2.0).unwrap();
        let b = IndexSet::complete(&[r(1e-7, 0)], 2.0).unwrap();
        assert!(extended_union(&a, &b).unwrap().entries().iter().all(|e| e.k == 0));
        let loose = extended_union_with_tol(&a, &b, 1e-6).unwrap();
        assert!(loose.entries().iter().any(|e| e.k == 1));
    }

    fn xy_model() -> (ExponentMatrix, IndexFamily) {
        let e = ExponentMatrix::new(vec!["xaxis".into(), "yaxis".into()], vec!["0".into()], vec![vec![1], vec![1]])
            .unwrap();
        let fam = IndexFamily::from([("xaxis".to_string(), smooth(5.0)), ("yaxis".to_string(), smooth(5.0))]);
        (e, fam)
    }

    fn blowup_matrix() -> ExponentMatrix {
        ExponentMatrix::new(
            vec!["G1".into(), "G2".into(), "G3".into()],
            vec!["H".into()],
            vec![vec![1], vec![0], vec![1]],
        )
        .unwrap()
    }

    #[test]
    fn push_forward_examples() {
        let (e, fam) = xy_model();
        let (out, report) = push_index_family(&e, &fam, 5.0).unwrap();
        assert!(report.empty_faces.is_empty());
        let k = smooth(5.0);
        assert!(out["0"].same_entries(&extended_union(&k, &k).unwrap()));

        let e = blowup_matrix();
        let k1 = IndexSet::complete(&[r(0.5, 0)], 5.0).unwrap();
        let k2 = IndexSet::complete(&[r(-3.0, 2)], 5.0).unwrap();
        let k3 = IndexSet::complete(&[r(1.0, 0)], 5.0).unwrap();
        let fam = IndexFamily::from([("G1".into(), k1.clone()), ("G2".into(), k2), ("G3".into(), k3.clone())]);
        let (out, _) = push_index_family(&e, &fam, 5.0).unwrap();
        assert!(out["H"].same_entries(&extended_union(&k1, &k3).unwrap()));

        let e = ExponentMatrix::new(vec!["G".into()], vec!["H".into()], vec![vec![2]]).unwrap();
        let fam = IndexFamily::from([("G".into(), IndexSet::complete(&[r(1.0, 0)], 3.0).unwrap())]);
        let (out, _) = push_index_family(&e, &fam, 3.0).unwrap();
        let got = pairs(&out["H"]);
        assert_eq!(&got[..4], &[(0.5, 0), (1.0, 0), (1.5, 0), (2.0, 0)]);
        assert_eq!(got.last(), Some(&(2.5, 0)));
    }

    #[test]
    fn push_forward_errors_and_empty_faces() {
        let (e, mut fam) = xy_model();
        fam.remove("yaxis");
        assert!(matches!(push_index_family(&e, &fam, 5.0), Err(Error::FaceMismatch(_))));

        let e = ExponentMatrix::new(vec!["G".into()], vec!["H1".into(), "H2".into()], vec![vec![1, 0]]).unwrap();
        let fam = IndexFamily::from([("G".into(), smooth(3.0))]);
        let (out, report) = push_index_family(&e, &fam, 3.0).unwrap();
        assert_eq!(report.empty_faces, vec!["H2".to_string()]);
        assert!(out["H2"].is_empty());

        let bad = ExponentMatrix::new(vec!["G".into()], vec!["H1".into(), "H2".into()], vec![vec![1, 1]]).unwrap();
        assert!(matches!(push_index_family(&bad, &fam, 3.0), Err(Error::NotBNormal(_))));
        assert!(ExponentMatrix::new(vec!["G".into()], vec!["H".into()], vec![vec![1, 1]]).is_err());
    }

    #[test]
    fn nullface_examples() {
        assert_eq!(nullfaces(&blowup_matrix()), vec!["G2".to_string()]);
        let ones = ExponentMatrix::new(vec!["a".into(), "b".into()], vec!["H".into()], vec![vec![1], vec![1]]).unwrap();
        assert!(nullfaces(&ones).is_empty());
        let zeros = ExponentMatrix::new(vec!["a".into(), "b".into()], vec!["H".into()], vec![vec![0], vec![0]]).unwrap();
        assert_eq!(nullfaces(&zeros).len(), 2);
    }

    #[test]
    fn integrability_examples() {
        let e = blowup_matrix();
        let fam_with = |g2: IndexEntry| {
            IndexFamily::from([
                ("G1".into(), smooth(5.0)),
                ("G2".into(), IndexSet::complete(&[g2], 5.0).unwrap()),
                ("G3".into(), IndexSet::complete(&[r(1.0, 0)], 5.0).unwrap()),
            ])
        };
        assert!(check_integrability(&fam_with(r(1.0, 0)), &e).unwrap().integrable);
        let bad = check_integrability(&fam_with(r(0.0, 0)), &e).unwrap();
        assert!(!bad.integrable);
        assert_eq!(bad.violations[0], ("G2".to_string(), r(0.0, 0)));

        let (ones, fam) = xy_model();
        assert!(check_integrability(&fam, &ones).unwrap().integrable);
    }

    #[test]
    fn serde_triples() {
        let e: IndexEntry = serde_json::from_str("[0.5, -1.0, 2]").unwrap();
        assert_eq!(e, IndexEntry::new(Cplx::new(0.5, -1.0), 2));
        assert_eq!(serde_json::to_string(&e).unwrap(), "[0.5,-1.0,2]");
    }

    #[test]
    fn generic_over_f32() {
        let s = IndexSet::<f32>::complete(&[IndexEntry::real(0.0f32, 1)], 2.0).unwrap();
        assert_eq!(s.len(), 4);
        let u = extended_union(&s, &s).unwrap();
        assert!(u.contains(Cplx::new(0.0, 0.0), 3));
    }
}
