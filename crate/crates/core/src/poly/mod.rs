//! Exact multivariate polynomials over the rationals.
//!
//! Terms are kept in a [`BTreeMap`] keyed by [`Exponent`], whose ordering is
//! graded lexicographic: lower total degree first, and within one degree
//! `X1` before `X2` before ... This is also the row order of moment
//! matrices.

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

pub use parse::parse_polynomial;

/// Default cap on the total degree produced by [`Polynomial::pow2`] and
/// friends.
pub const DEFAULT_DEGREE_BUDGET: usize = 256;

/// A monomial exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent {
    entries: Vec<u32>,
    total: usize,
}

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        let total = entries.iter().map(|&e| e as usize).sum();
        Exponent { entries, total }
    }

    pub fn zero(num_vars: usize) -> Self {
        Exponent { entries: vec![0; num_vars], total: 0 }
    }

    /// The exponent of `X_{var+1}`.
    pub fn unit(num_vars: usize, var: usize) -> Self {
        let mut entries = vec![0; num_vars];
        entries[var] = 1;
        Exponent { entries, total: 1 }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn num_vars(&self) -> usize {
        self.entries.len()
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Exponent { entries, total: self.total + other.total }
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total
            .cmp(&other.total)
            .then_with(|| other.entries.cmp(&self.entries))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponents in `num_vars` variables with total degree `<= max_total`,
/// in graded lexicographic order.
pub fn monomials_up_to(num_vars: usize, max_total: usize) -> Vec<Exponent> {
    let mut out = Vec::new();
    for total in 0..=max_total {
        let mut current = vec![0u32; num_vars];
        fill_degree(&mut current, 0, total, &mut out);
    }
    out
}

fn fill_degree(current: &mut [u32], var: usize, remaining: usize, out: &mut Vec<Exponent>) {
    if var + 1 == current.len() {
        current[var] = remaining as u32;
        out.push(Exponent::new(current.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u32;
        fill_degree(current, var + 1, remaining - e, out);
    }
    current[var] = 0;
}

/// A polynomial in `num_vars` variables with exact rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    num_vars: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl Polynomial {
    pub fn zero(num_vars: usize) -> Self {
        assert!(num_vars >= 1, "at least one variable is required");
        Polynomial { num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: Rational) -> Self {
        let mut p = Polynomial::zero(num_vars);
        p.add_term(Exponent::zero(num_vars), c);
        p
    }

    pub fn one(num_vars: usize) -> Self {
        Polynomial::constant(num_vars, Rational::one())
    }

    /// The coordinate polynomial `X_{var+1}`.
    pub fn var(num_vars: usize, var: usize) -> Self {
        assert!(var < num_vars);
        Polynomial::monomial(Exponent::unit(num_vars, var), Rational::one())
    }

    pub fn monomial(exp: Exponent, coef: Rational) -> Self {
        let mut p = Polynomial::zero(exp.num_vars());
        p.add_term(exp, coef);
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms(
        num_vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self> {
        let mut p = Polynomial::zero(num_vars);
        for (exp, coef) in terms {
            if exp.len() != num_vars {
                return Err(Error::dims(num_vars, exp.len()));
            }
            p.add_term(Exponent::new(exp), coef);
        }
        Ok(p)
    }

    /// Univariate polynomial from coefficients in increasing degree.
    pub fn univariate(coeffs: &[Rational]) -> Self {
        let terms = coeffs.iter().enumerate().map(|(k, c)| (vec![k as u32], c.clone()));
        Polynomial::from_terms(1, terms).expect("univariate")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximal total degree of a stored term, 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().next_back().map_or(0, Exponent::total)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exp: &Exponent) -> Rational {
        self.terms.get(exp).cloned().unwrap_or_else(Rational::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Exponent::zero(self.num_vars))
    }

    fn add_term(&mut self, exp: Exponent, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_dims(&self, other: &Polynomial) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::dims(self.num_vars, other.num_vars));
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, factor: &Rational) -> Polynomial {
        if factor.is_zero() {
            return Polynomial::zero(self.num_vars);
        }
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * factor)).collect();
        Polynomial { num_vars: self.num_vars, terms }
    }

    /// `self + c`.
    pub fn add_constant(&self, c: &Rational) -> Polynomial {
        let mut out = self.clone();
        out.add_term(Exponent::zero(self.num_vars), c.clone());
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dims(other)?;
        let mut out = Polynomial::zero(self.num_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn square(&self) -> Polynomial {
        self.mul(self).expect("same dimension")
    }

    /// `self^e` by binary powering, refusing results above `budget`.
    pub fn pow(&self, e: usize, budget: usize) -> Result<Polynomial> {
        let degree = self.degree() * e;
        if degree > budget {
            return Err(Error::BudgetExceeded { degree, budget });
        }
        let mut result = Polynomial::one(self.num_vars);
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        Ok(result)
    }

    /// `self^(2^d)` by `d` successive squarings.
    pub fn pow2(&self, d: u32, budget: usize) -> Result<Polynomial> {
        let degree = self.degree().saturating_mul(1usize << d);
        if degree > budget {
            return Err(Error::BudgetExceeded { degree, budget });
        }
        let mut p = self.clone();
        for _ in 0..d {
            p = p.square();
        }
        Ok(p)
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.num_vars {
            return Err(Error::dims(self.num_vars, point.len()));
        }
        let mut total = Rational::zero();
        for (exp, coef) in &self.terms {
            let mut term = coef.clone();
            for (x, &e) in point.iter().zip(exp.entries()) {
                if e > 0 {
                    term *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Substitutes `X1` in a univariate polynomial by `inner`.
    pub fn compose_univariate(&self, inner: &Polynomial) -> Result<Polynomial> {
        if self.num_vars != 1 {
            return Err(Error::dims(1, self.num_vars));
        }
        // Horner in the outer variable.
        let mut out = Polynomial::zero(inner.num_vars);
        for k in (0..=self.degree()).rev() {
            out = out.mul(inner)?;
            let c = self.coefficient(&Exponent::new(vec![k as u32]));
            out = out.add_constant(&c);
        }
        Ok(out)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }

    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson { exp: e.entries.clone(), coef: format_rational(c) })
                .collect(),
        }
    }

    pub fn from_json(json: &PolynomialJson) -> Result<Polynomial> {
        if json.num_vars == 0 {
            return Err(Error::Invalid("num_vars must be at least 1".into()));
        }
        let mut terms = Vec::with_capacity(json.terms.len());
        for t in &json.terms {
            terms.push((t.exp.clone(), parse_rational(&t.coef)?));
        }
        Polynomial::from_terms(json.num_vars, terms)
    }
}

impl fmt::Display for Polynomial {
    /// Canonical text form: `p/q * X1^e1 X2^e2 + ...`, terms in graded
    /// lexicographic order, zero exponents omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0/1");
        }
        for (i, (exp, coef)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", format_rational(coef))?;
            let factors: Vec<String> = exp
                .entries
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, e)| format!("X{}^{}", v + 1, e))
                .collect();
            if !factors.is_empty() {
                write!(f, " * {}", factors.join(" "))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub num_vars: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coef: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn x() -> Polynomial {
        Polynomial::var(1, 0)
    }

    fn c1(v: Rational) -> Polynomial {
        Polynomial::constant(1, v)
    }

    fn p2(text: &str) -> Polynomial {
        parse_polynomial(text, 2).unwrap()
    }

    #[test]
    fn add_examples() {
        assert!(x().add(&x().neg()).unwrap().is_zero());
        let lhs = c1(int(1)).add(&x()).unwrap().add(&x().square()).unwrap();
        assert_eq!(lhs, parse_polynomial("1 + X + X^2", 1).unwrap());
        let s = p2("X + Y").add(&p2("X - Y")).unwrap();
        assert_eq!(s, p2("2*X"));
    }

    #[test]
    fn mul_examples() {
        let a = c1(int(1)).add(&x()).unwrap();
        let b = c1(int(1)).sub(&x()).unwrap();
        assert_eq!(a.mul(&b).unwrap(), parse_polynomial("1 - X^2", 1).unwrap());
        assert!(a.mul(&Polynomial::zero(1)).unwrap().is_zero());
        assert_eq!(p2("X + Y").square(), p2("X^2 + 2 X Y + Y^2"));
        assert_eq!(a.mul(&b).unwrap().degree(), 2);
    }

    #[test]
    fn pow2_examples() {
        assert_eq!(x().pow2(3, 256).unwrap(), parse_polynomial("X^8", 1).unwrap());
        let a = c1(int(1)).add(&x()).unwrap();
        assert_eq!(a.pow2(1, 256).unwrap(), parse_polynomial("1 + 2X + X^2", 1).unwrap());
        assert_eq!(c1(int(2)).pow2(2, 256).unwrap(), c1(int(16)));
    }

    #[test]
    fn pow2_respects_budget() {
        let err = x().pow2(9, 256).unwrap_err();
        assert_eq!(err, Error::BudgetExceeded { degree: 512, budget: 256 });
        assert!(x().pow2(8, 256).is_ok());
    }

    #[test]
    fn eval_examples() {
        let p = parse_polynomial("X^2 - 1", 1).unwrap();
        assert_eq!(p.eval(&[int(2)]).unwrap(), int(3));
        assert_eq!(Polynomial::one(3).eval(&[int(5), ratio(1, 3), int(-2)]).unwrap(), int(1));
        assert_eq!(p2("X*Y").eval(&[ratio(1, 2), int(4)]).unwrap(), int(2));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = x().add(&p2("X")).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 1, found: 2 });
        assert!(x().mul(&p2("Y")).is_err());
        assert!(x().eval(&[int(1), int(2)]).is_err());
    }

    #[test]
    fn graded_lex_order() {
        let m = monomials_up_to(2, 2);
        let got: Vec<Vec<u32>> = m.iter().map(|e| e.entries().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(monomials_up_to(3, 3).len(), 20);
    }

    #[test]
    fn display_and_json_are_canonical() {
        let p = p2("-5/8 X + 3/4 X^2 Y + 1");
        assert_eq!(p.to_string(), "1/1 + -5/8 * X1^1 + 3/4 * X1^2 X2^1");
        assert_eq!(parse_polynomial(&p.to_string(), 2).unwrap(), p);
        let json = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(
            json,
            r#"{"num_vars":2,"terms":[{"exp":[0,0],"coef":"1/1"},{"exp":[1,0],"coef":"-5/8"},{"exp":[2,1],"coef":"3/4"}]}"#
        );
        let back: PolynomialJson = serde_json::from_str(&json).unwrap();
        assert_eq!(Polynomial::from_json(&back).unwrap(), p);
        assert_eq!(Polynomial::zero(1).to_string(), "0/1");
    }

    #[test]
    fn compose_univariate_matches_direct_expansion() {
        let outer = parse_polynomial("1 - X^2/4", 1).unwrap();
        let inner = p2("X + Y");
        let direct = Polynomial::one(2)
            .sub(&inner.square().scale(&ratio(1, 4)))
            .unwrap();
        assert_eq!(outer.compose_univariate(&inner).unwrap(), direct);
    }
}
