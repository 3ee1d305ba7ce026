//! Truncated moment functionals.
//!
//! A [`MomentSequence`] stores `L(X^γ)` exactly for every exponent of total
//! degree at most `D`, normalized so that `L(1) = 1`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;
use crate::poly::{monomials_up_to, Exponent, Polynomial};
use crate::rational::{format_rational, parse_rational, pow, ratio, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub point: Vec<Rational>,
    pub weight: Rational,
}

/// A finitely atomic probability measure with exact points and weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicMeasure {
    num_vars: usize,
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(num_vars: usize, atoms: Vec<Atom>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::Invalid("num_vars must be at least 1".into()));
        }
        if atoms.is_empty() {
            return Err(Error::Invalid("a measure needs at least one atom".into()));
        }
        let mut seen = HashSet::new();
        let mut total = Rational::zero();
        for a in &atoms {
            if a.point.len() != num_vars {
                return Err(Error::dims(num_vars, a.point.len()));
            }
            if !a.weight.is_positive() {
                return Err(Error::Invalid(format!("weight {} is not positive", a.weight)));
            }
            if !seen.insert(a.point.clone()) {
                return Err(Error::Invalid("atoms must be pairwise distinct".into()));
            }
            total += &a.weight;
        }
        if !total.is_one() {
            return Err(Error::Invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(AtomicMeasure { num_vars, atoms })
    }

    /// Univariate measure from `(point, weight)` pairs.
    pub fn univariate(atoms: &[(Rational, Rational)]) -> Result<Self> {
        let atoms = atoms
            .iter()
            .map(|(x, w)| Atom { point: vec![x.clone()], weight: w.clone() })
            .collect();
        AtomicMeasure::new(1, atoms)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_weight(&self) -> Rational {
        self.atoms.iter().map(|a| a.weight.clone()).min().expect("nonempty")
    }

    /// `max_j |atom_j[var]|`.
    pub fn max_abs_coordinate(&self, var: usize) -> Rational {
        self.atoms.iter().map(|a| a.point[var].abs()).max().expect("nonempty")
    }

    /// Weight of the atom at `point`, zero if there is none.
    pub fn mass_at(&self, point: &[Rational]) -> Rational {
        self.atoms
            .iter()
            .find(|a| a.point == point)
            .map_or_else(Rational::zero, |a| a.weight.clone())
    }

    /// Parses `"(p1:w1),(p2:w2)"` where each point is a comma-separated
    /// coordinate list, e.g. `"(-1:3/4),(1/2:1/4)"` or `"(1/2,-1/2:1)"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in atom list {text:?}")))?;
            let close = body
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed atom in {text:?}")))?;
            let (inner, after) = (&body[..close], &body[close + 1..]);
            let (coords, weight) = inner
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("atom {inner:?} needs the form point:weight")))?;
            let point = coords.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
            atoms.push(Atom { point, weight: parse_rational(weight)? });
            rest = after.trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
            } else if !rest.is_empty() {
                return Err(Error::Parse(format!("expected ',' between atoms in {text:?}")));
            }
        }
        let num_vars = atoms.first().map_or(0, |a| a.point.len());
        AtomicMeasure::new(num_vars, atoms)
    }
}

impl fmt::Display for AtomicMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                let pt: Vec<String> = a.point.iter().map(format_rational).collect();
                format!("({}:{})", pt.join(","), format_rational(&a.weight))
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Closed-form univariate families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    UniformUnitInterval,
    StandardGaussian,
    /// Atoms `1/n` with weights `2^-n` for `n < N`; the last atom `1/N`
    /// carries the remaining weight `2^-(N-1)`.
    DiracSeries(usize),
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::UniformUnitInterval => "uniform01".into(),
            Family::StandardGaussian => "gaussian".into(),
            Family::DiracSeries(n) => format!("dirac-series:{n}"),
        }
    }

    /// The family as an atomic measure, when it is one.
    pub fn atomic_measure(&self) -> Option<AtomicMeasure> {
        let Family::DiracSeries(n) = *self else {
            return None;
        };
        let two = BigInt::from(2);
        let atoms: Vec<(Rational, Rational)> = (1..=n)
            .map(|k| {
                let e = if k < n { k } else { n - 1 };
                let w = Rational::new(BigInt::one(), num_traits::pow(two.clone(), e));
                (ratio(1, k as i64), w)
            })
            .collect();
        Some(AtomicMeasure::univariate(&atoms).expect("weights sum to one"))
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "uniform01" | "uniform" | "uniform-unit-interval" => Ok(Family::UniformUnitInterval),
            "gaussian" | "normal" | "standard-gaussian" => Ok(Family::StandardGaussian),
            _ => {
                let n = lower
                    .strip_prefix("dirac-series:")
                    .or_else(|| lower.strip_prefix("dirac:"))
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| Error::UnsupportedFamily(s.to_string()))?;
                if n < 2 {
                    return Err(Error::UnsupportedFamily(format!("{s}: needs at least 2 atoms")));
                }
                Ok(Family::DiracSeries(n))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Atomic,
    ClosedForm(String),
    File,
}

impl Provenance {
    fn tag(&self) -> String {
        match self {
            Provenance::Atomic => "atomic".into(),
            Provenance::ClosedForm(name) => format!("closed-form:{name}"),
            Provenance::File => "file".into(),
        }
    }

    fn from_tag(tag: &str) -> Provenance {
        if tag == "atomic" {
            Provenance::Atomic
        } else if let Some(name) = tag.strip_prefix("closed-form:") {
            Provenance::ClosedForm(name.to_string())
        } else {
            Provenance::File
        }
    }
}

#[derive(Clone, Debug)]
pub struct MomentSequence {
    num_vars: usize,
    max_degree: usize,
    monomials: Vec<Exponent>,
    values: Vec<Rational>,
    index: HashMap<Exponent, usize>,
    provenance: Provenance,
}

impl PartialEq for MomentSequence {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars
            && self.max_degree == other.max_degree
            && self.values == other.values
            && self.provenance == other.provenance
    }
}

impl MomentSequence {
    /// Builds a sequence from values listed in graded lexicographic order.
    fn from_ordered(
        num_vars: usize,
        max_degree: usize,
        values: Vec<Rational>,
        provenance: Provenance,
    ) -> Result<Self> {
        let monomials = monomials_up_to(num_vars, max_degree);
        if monomials.len() != values.len() {
            return Err(Error::Invalid(format!(
                "expected {} moments for degree {max_degree}, got {}",
                monomials.len(),
                values.len()
            )));
        }
        if !values[0].is_one() {
            return Err(Error::Invalid(format!(
                "L(1) = {} but moment sequences are normalized to L(1) = 1",
                format_rational(&values[0])
            )));
        }
        let index = monomials.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        Ok(MomentSequence { num_vars, max_degree, monomials, values, index, provenance })
    }

    /// Builds a sequence from explicit `(exponent, value)` pairs; every
    /// exponent up to `max_degree` must be present exactly once.
    pub fn from_values(
        num_vars: usize,
        max_degree: usize,
        entries: impl IntoIterator<Item = (Vec<u32>, Rational)>,
        provenance: Provenance,
    ) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::Invalid("num_vars must be at least 1".into()));
        }
        let monomials = monomials_up_to(num_vars, max_degree);
        let position: HashMap<&[u32], usize> =
            monomials.iter().enumerate().map(|(i, e)| (e.entries(), i)).collect();
        let mut values: Vec<Option<Rational>> = vec![None; monomials.len()];
        for (exp, v) in entries {
            if exp.len() != num_vars {
                return Err(Error::dims(num_vars, exp.len()));
            }
            let Some(&i) = position.get(exp.as_slice()) else {
                return Err(Error::Invalid(format!("exponent {exp:?} exceeds max_degree {max_degree}")));
            };
            if values[i].replace(v).is_some() {
                return Err(Error::Invalid(format!("duplicate moment for exponent {exp:?}")));
            }
        }
        let mut out = Vec::with_capacity(values.len());
        for (v, e) in values.into_iter().zip(&monomials) {
            out.push(v.ok_or_else(|| {
                Error::Invalid(format!("missing moment for exponent {:?}", e.entries()))
            })?);
        }
        MomentSequence::from_ordered(num_vars, max_degree, out, provenance)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn value(&self, exp: &Exponent) -> Option<&Rational> {
        self.index.get(exp).map(|&i| &self.values[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.monomials.iter().zip(&self.values)
    }

    /// `L(X^k)` for `k = 0..=D` of a univariate sequence.
    pub fn univariate_values(&self) -> Result<&[Rational]> {
        if self.num_vars != 1 {
            return Err(Error::dims(1, self.num_vars));
        }
        Ok(&self.values)
    }

    pub fn check_degree(&self, needed: usize) -> Result<()> {
        if needed > self.max_degree {
            return Err(Error::DegreeExceeded { needed, available: self.max_degree });
        }
        Ok(())
    }

    fn check_vars(&self, a: &Polynomial) -> Result<()> {
        if a.num_vars() != self.num_vars {
            return Err(Error::dims(self.num_vars, a.num_vars()));
        }
        Ok(())
    }

    /// `L(a)`.
    pub fn apply(&self, a: &Polynomial) -> Result<Rational> {
        self.check_vars(a)?;
        self.check_degree(a.degree())?;
        let mut total = Rational::zero();
        for (exp, coef) in a.terms() {
            total += coef * &self.values[self.index[exp]];
        }
        Ok(total)
    }

    /// Hankel-type matrix `(L(X^(γ+δ)))` indexed by monomials of degree `<= t`.
    pub fn moment_matrix(&self, t: usize) -> Result<RationalMatrix> {
        self.check_degree(2 * t)?;
        let rows = monomials_up_to(self.num_vars, t);
        Ok(RationalMatrix::from_fn(rows.len(), rows.len(), |i, j| {
            self.values[self.index[&rows[i].add(&rows[j])]].clone()
        }))
    }

    /// Matrix `(L(X^(γ+δ) a))` indexed by monomials of degree `<= t`. It is
    /// PSD exactly when `L(b^2 a) >= 0` for every `b` of degree `<= t`.
    pub fn localizing_matrix(&self, a: &Polynomial, t: usize) -> Result<RationalMatrix> {
        self.check_vars(a)?;
        self.check_degree(2 * t + a.degree())?;
        let rows = monomials_up_to(self.num_vars, t);
        let terms: Vec<(&Exponent, &Rational)> = a.terms().collect();
        Ok(RationalMatrix::from_fn(rows.len(), rows.len(), |i, j| {
            let base = rows[i].add(&rows[j]);
            let mut v = Rational::zero();
            for (e, c) in &terms {
                v += *c * &self.values[self.index[&base.add(e)]];
            }
            v
        }))
    }

    /// Exact Cauchy-Schwarz test `L(ab)^2 <= L(a^2) L(b^2)`.
    pub fn cbs_check(&self, a: &Polynomial, b: &Polynomial) -> Result<bool> {
        self.check_vars(a)?;
        self.check_vars(b)?;
        let (da, db) = (a.degree(), b.degree());
        self.check_degree((da + db).max(2 * da).max(2 * db))?;
        let ab = self.apply(&a.mul(b)?)?;
        let aa = self.apply(&a.square())?;
        let bb = self.apply(&b.square())?;
        Ok(&ab * &ab <= aa * bb)
    }

    /// Copy truncated to a smaller degree.
    pub fn truncate(&self, max_degree: usize) -> Result<MomentSequence> {
        self.check_degree(max_degree)?;
        let n = monomials_up_to(self.num_vars, max_degree).len();
        MomentSequence::from_ordered(
            self.num_vars,
            max_degree,
            self.values[..n].to_vec(),
            self.provenance.clone(),
        )
    }

    pub fn to_json(&self) -> MomentFile {
        MomentFile {
            num_vars: self.num_vars,
            max_degree: self.max_degree,
            moments: self
                .entries()
                .map(|(e, v)| MomentEntry { exp: e.entries().to_vec(), value: Value::String(format_rational(v)) })
                .collect(),
            provenance: self.provenance.tag(),
        }
    }

    pub fn from_json(file: &MomentFile) -> Result<MomentSequence> {
        let mut entries = Vec::with_capacity(file.moments.len());
        for m in &file.moments {
            let value = match &m.value {
                Value::String(s) => parse_rational(s)?,
                Value::Number(n) => parse_rational(&n.to_string())?,
                other => return Err(Error::Parse(format!("moment value {other} is not a number"))),
            };
            entries.push((m.exp.clone(), value));
        }
        MomentSequence::from_values(
            file.num_vars,
            file.max_degree,
            entries,
            Provenance::from_tag(&file.provenance),
        )
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable")
    }

    pub fn from_json_str(text: &str) -> Result<MomentSequence> {
        let file: MomentFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        MomentSequence::from_json(&file)
    }

    pub fn read(path: &Path) -> Result<MomentSequence> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        MomentSequence::from_json_str(&text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentFile {
    pub num_vars: usize,
    pub max_degree: usize,
    pub moments: Vec<MomentEntry>,
    #[serde(default = "default_provenance")]
    pub provenance: String,
}

fn default_provenance() -> String {
    "file".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub exp: Vec<u32>,
    pub value: Value,
}

/// `L(X^γ) = Σ_j w_j x_j^γ` for every `|γ| <= D`.
pub fn from_atomic(mu: &AtomicMeasure, max_degree: usize) -> MomentSequence {
    let monomials = monomials_up_to(mu.num_vars(), max_degree);
    // powers[j][i][k] = x_{j,i}^k
    let powers: Vec<Vec<Vec<Rational>>> = mu
        .atoms()
        .iter()
        .map(|a| {
            a.point
                .iter()
                .map(|x| {
                    let mut p = Vec::with_capacity(max_degree + 1);
                    let mut cur = Rational::one();
                    for _ in 0..=max_degree {
                        p.push(cur.clone());
                        cur *= x;
                    }
                    p
                })
                .collect()
        })
        .collect();
    let values = monomials
        .iter()
        .map(|e| {
            let mut total = Rational::zero();
            for (atom, pw) in mu.atoms().iter().zip(&powers) {
                let mut term = atom.weight.clone();
                for (i, &k) in e.entries().iter().enumerate() {
                    if k > 0 {
                        term *= &pw[i][k as usize];
                    }
                }
                total += term;
            }
            total
        })
        .collect();
    MomentSequence::from_ordered(mu.num_vars(), max_degree, values, Provenance::Atomic)
        .expect("atomic probability measures are normalized")
}

/// Moments of a closed-form univariate family.
pub fn from_closed_form(family: &Family, max_degree: usize) -> MomentSequence {
    let provenance = Provenance::ClosedForm(family.name());
    let values: Vec<Rational> = match family {
        Family::UniformUnitInterval => (0..=max_degree).map(|k| ratio(1, k as i64 + 1)).collect(),
        Family::StandardGaussian => {
            let mut out = Vec::with_capacity(max_degree + 1);
            let mut double_factorial = BigInt::one();
            for k in 0..=max_degree {
                if k % 2 == 1 {
                    out.push(Rational::zero());
                } else {
                    if k >= 2 {
                        double_factorial *= BigInt::from(k - 1);
                    }
                    out.push(Rational::from_integer(double_factorial.clone()));
                }
            }
            out
        }
        Family::DiracSeries(_) => {
            let mu = family.atomic_measure().expect("atomic family");
            let mut seq = from_atomic(&mu, max_degree);
            seq.provenance = provenance;
            return seq;
        }
    };
    MomentSequence::from_ordered(1, max_degree, values, provenance).expect("normalized family")
}

/// `x^k` as an exact rational, for tests and callers building fixtures.
pub fn monomial_value(point: &[Rational], exp: &Exponent) -> Rational {
    point
        .iter()
        .zip(exp.entries())
        .fold(Rational::one(), |acc, (x, &e)| acc * pow(x, e as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{exact_rank, psd_check, PsdVerdict};
    use crate::poly::parse_polynomial;
    use crate::rational::int;

    fn two_atoms() -> AtomicMeasure {
        AtomicMeasure::parse("(-1:3/4),(1/2:1/4)").unwrap()
    }

    fn x(k: u32) -> Exponent {
        Exponent::new(vec![k])
    }

    #[test]
    fn from_atomic_examples() {
        let delta0 = from_atomic(&AtomicMeasure::parse("(0,0:1)").unwrap(), 4);
        for (e, v) in delta0.entries() {
            assert_eq!(v, &if e.total() == 0 { int(1) } else { int(0) });
        }
        let half = from_atomic(&AtomicMeasure::parse("(1/2:1)").unwrap(), 2);
        assert_eq!(half.value(&x(1)).unwrap(), &ratio(1, 2));
        assert_eq!(half.value(&x(2)).unwrap(), &ratio(1, 4));
        let l = from_atomic(&two_atoms(), 2);
        assert_eq!(l.value(&x(1)).unwrap(), &ratio(-5, 8));
        assert_eq!(l.value(&x(2)).unwrap(), &ratio(13, 16));
    }

    #[test]
    fn closed_form_examples() {
        let u = from_closed_form(&Family::UniformUnitInterval, 8);
        assert_eq!(u.value(&x(3)).unwrap(), &ratio(1, 4));
        let g = from_closed_form(&Family::StandardGaussian, 8);
        assert_eq!(g.value(&x(4)).unwrap(), &int(3));
        assert_eq!(g.value(&x(8)).unwrap(), &int(105));
        assert_eq!(g.value(&x(5)).unwrap(), &int(0));
        let d = from_closed_form(&Family::DiracSeries(3), 2);
        assert_eq!(d.value(&x(1)).unwrap(), &ratio(17, 24));
        let twenty = Family::DiracSeries(20).atomic_measure().unwrap();
        assert_eq!(twenty.mass_at(&[int(1)]), ratio(1, 2));
        assert_eq!(twenty.len(), 20);
    }

    #[test]
    fn family_names_parse() {
        for f in [Family::UniformUnitInterval, Family::StandardGaussian, Family::DiracSeries(20)] {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!(matches!("cauchy".parse::<Family>(), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn apply_examples() {
        let l = from_atomic(&two_atoms(), 4);
        assert_eq!(l.apply(&Polynomial::one(1)).unwrap(), int(1));
        assert_eq!(l.apply(&parse_polynomial("X^2", 1).unwrap()).unwrap(), ratio(13, 16));
        let c = from_atomic(&AtomicMeasure::parse("(3/2:1)").unwrap(), 4);
        assert_eq!(c.apply(&parse_polynomial("X^3", 1).unwrap()).unwrap(), ratio(27, 8));
        let err = l.apply(&parse_polynomial("X^5", 1).unwrap()).unwrap_err();
        assert_eq!(err, Error::DegreeExceeded { needed: 5, available: 4 });
    }

    #[test]
    fn moment_matrix_examples() {
        let d0 = from_atomic(&AtomicMeasure::parse("(0:1)").unwrap(), 2);
        assert_eq!(d0.moment_matrix(1).unwrap().to_rows(), vec![vec![int(1), int(0)], vec![int(0), int(0)]]);
        let dc = from_atomic(&AtomicMeasure::parse("(3:1)").unwrap(), 2);
        let m = dc.moment_matrix(1).unwrap();
        assert_eq!(m.to_rows(), vec![vec![int(1), int(3)], vec![int(3), int(9)]]);
        assert_eq!(exact_rank(&m), 1);
        let l = from_atomic(&two_atoms(), 4);
        let m = l.moment_matrix(1).unwrap();
        assert_eq!(m.to_rows(), vec![vec![int(1), ratio(-5, 8)], vec![ratio(-5, 8), ratio(13, 16)]]);
        assert_eq!(exact_rank(&m), 2);
        let r = psd_check(&l.moment_matrix(2).unwrap(), 1e-9).unwrap();
        assert_eq!(r.verdict, PsdVerdict::Psd);
        assert_eq!(r.rank_estimate, 2);
        assert!(l.moment_matrix(3).is_err());
    }

    #[test]
    fn localizing_matrix_examples() {
        let l = from_atomic(&two_atoms(), 6);
        assert_eq!(l.localizing_matrix(&Polynomial::one(1), 2).unwrap(), l.moment_matrix(2).unwrap());
        let a = parse_polynomial("1 - X^2", 1).unwrap();
        let m = l.localizing_matrix(&a, 1).unwrap();
        assert_eq!(m.get(0, 0), &(int(1) - ratio(13, 16)));
        assert!(psd_check(&m, 1e-9).unwrap().passes());
        let dc = from_atomic(&AtomicMeasure::parse("(1/3:1)").unwrap(), 6);
        let pos = parse_polynomial("1 - X", 1).unwrap();
        assert!(psd_check(&dc.localizing_matrix(&pos, 2).unwrap(), 1e-9).unwrap().passes());
    }

    #[test]
    fn cbs_examples() {
        let l = from_atomic(&two_atoms(), 8);
        let a = parse_polynomial("1 + 2X - X^3", 1).unwrap();
        let b = parse_polynomial("X^2 - 1/3", 1).unwrap();
        assert!(l.cbs_check(&a, &Polynomial::one(1)).unwrap());
        assert!(l.cbs_check(&a, &a).unwrap());
        assert!(l.cbs_check(&a, &b).unwrap());
        let ab = l.apply(&a.mul(&a).unwrap()).unwrap();
        assert_eq!(&ab * &ab, l.apply(&a.square()).unwrap() * l.apply(&a.square()).unwrap());
    }

    #[test]
    fn file_round_trip_and_validation() {
        let l = from_atomic(&AtomicMeasure::parse("(1/2,-1/3:1/2),(0,1:1/2)").unwrap(), 3);
        let back = MomentSequence::from_json_str(&l.to_json_string()).unwrap();
        assert_eq!(back, l);

        let text = r#"{"num_vars":1,"max_degree":2,"moments":[
            {"exp":[0],"value":"1"},{"exp":[1],"value":0.5},{"exp":[2],"value":"0.25"}]}"#;
        let f = MomentSequence::from_json_str(text).unwrap();
        assert_eq!(f.value(&x(1)).unwrap(), &ratio(1, 2));
        assert_eq!(f.provenance(), &Provenance::File);

        let missing = r#"{"num_vars":1,"max_degree":2,"moments":[{"exp":[0],"value":"1"},{"exp":[1],"value":"0"}]}"#;
        assert!(MomentSequence::from_json_str(missing).is_err());
        let unnormalized = r#"{"num_vars":1,"max_degree":0,"moments":[{"exp":[0],"value":"2"}]}"#;
        assert!(MomentSequence::from_json_str(unnormalized).is_err());
    }

    #[test]
    fn atomic_measure_validation() {
        assert!(AtomicMeasure::parse("(0:1/2),(0:1/2)").is_err());
        assert!(AtomicMeasure::parse("(0:1/2),(1:1/3)").is_err());
        assert!(AtomicMeasure::parse("(0:-1),(1:2)").is_err());
        assert!(AtomicMeasure::parse("(0,1:1/2),(1:1/2)").is_err());
        let m = two_atoms();
        assert_eq!(m.to_string(), "(-1/1:3/4),(1/2:1/4)");
        assert_eq!(AtomicMeasure::parse(&m.to_string()).unwrap(), m);
    }
}
