//! Dense univariate polynomials over the rationals, stored as integer
//! coefficients over one shared denominator.
//!
//! Repeated squaring of bump and kernel polynomials dominates the cost of
//! mass estimation; keeping a single denominator avoids a gcd per
//! coefficient product.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{common_denominator, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    coeffs: Vec<BigInt>,
    den: BigInt,
}

impl UPoly {
    pub fn from_rationals(coeffs: &[Rational]) -> Self {
        let den = common_denominator(coeffs);
        let coeffs = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let mut p = UPoly { coeffs, den };
        p.normalize();
        p
    }

    pub fn constant(c: Rational) -> Self {
        UPoly::from_rationals(&[c])
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.coeffs
            .iter()
            .map(|c| Rational::new(c.clone(), self.den.clone()))
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.clone();
        for c in &self.coeffs {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() {
            for c in &mut self.coeffs {
                *c /= &g;
            }
            self.den /= &g;
        }
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly { coeffs: Vec::new(), den: BigInt::one() };
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        let mut p = UPoly { coeffs, den: &self.den * &other.den };
        p.normalize();
        p
    }

    pub fn square(&self) -> UPoly {
        let n = self.coeffs.len();
        if n == 0 {
            return self.clone();
        }
        let mut coeffs = vec![BigInt::zero(); 2 * n - 1];
        for i in 0..n {
            let a = &self.coeffs[i];
            if a.is_zero() {
                continue;
            }
            coeffs[2 * i] += a * a;
            let twice = a << 1usize;
            for j in i + 1..n {
                coeffs[i + j] += &twice * &self.coeffs[j];
            }
        }
        let mut p = UPoly { coeffs, den: &self.den * &self.den };
        p.normalize();
        p
    }

    pub fn pow2(&self, d: u32) -> UPoly {
        let mut p = self.clone();
        for _ in 0..d {
            p = p.square();
        }
        p
    }

    pub fn pow(&self, e: usize) -> UPoly {
        let mut result = UPoly::constant(Rational::one());
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        result
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x: &Rational) -> Rational {
        if self.coeffs.is_empty() {
            return Rational::zero();
        }
        // Horner on numerator and denominator separately:
        // sum c_k p^k q^(n-k) / (den q^n).
        let (p, q) = (x.numer(), x.denom());
        let n = self.coeffs.len() - 1;
        let mut acc = self.coeffs[n].clone();
        let mut qpow = BigInt::one();
        for k in (0..n).rev() {
            qpow *= q;
            acc = acc * p + &self.coeffs[k] * &qpow;
        }
        Rational::new(acc, &self.den * qpow)
    }

    /// Sign of the value at `x` (-1, 0 or 1).
    pub fn sign_at(&self, x: &Rational) -> i32 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Coefficients of `u -> self(c + u)`.
    pub fn taylor_shift(&self, c: &Rational) -> Vec<Rational> {
        let mut a = self.to_rationals();
        let n = a.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = &a[j + 1] * c;
                a[j] += t;
            }
        }
        a
    }

    /// Lower bound on `min |self(x)|` over `|x - c| <= r`, from the Taylor
    /// expansion at `c`. Returns zero when the bound is not positive.
    pub fn abs_lower_bound(&self, c: &Rational, r: &Rational) -> Rational {
        if self.coeffs.is_empty() {
            return Rational::zero();
        }
        // With c = p/s, B(w) = s^n self(w/s) has integer coefficients and
        // self(c + u) = B(p + s u) / s^n, so the shift stays in integers.
        let n = self.coeffs.len() - 1;
        let (p, s) = (c.numer(), c.denom());
        let mut spow = BigInt::one();
        let mut b = vec![BigInt::zero(); n + 1];
        for j in (0..=n).rev() {
            b[j] = &self.coeffs[j] * &spow;
            spow *= s;
        }
        for i in 0..n {
            for j in (i..n).rev() {
                let t = &b[j + 1] * p;
                b[j] += t;
            }
        }
        // |B_0| rd^n - Σ |B_j| (s rn)^j rd^(n-j), over s^n den rd^n.
        let (rn, rd) = (r.numer().abs(), r.denom());
        let srn = s * &rn;
        let mut rd_pows = vec![BigInt::one(); n + 1];
        for j in 1..=n {
            rd_pows[j] = &rd_pows[j - 1] * rd;
        }
        let mut acc = b[0].abs() * &rd_pows[n];
        let mut up = BigInt::one();
        for j in 1..=n {
            up *= &srn;
            acc -= b[j].abs() * &up * &rd_pows[n - j];
        }
        if !acc.is_positive() {
            return Rational::zero();
        }
        // spow = s^(n+1) here.
        Rational::new(acc, &spow / s * &self.den * &rd_pows[n])
    }

    /// `Σ c_i p_i` over one common denominator.
    pub fn combine(terms: &[(Rational, &UPoly)]) -> UPoly {
        let mut den = BigInt::one();
        for (c, p) in terms {
            den = den.lcm(&(c.denom() * &p.den));
        }
        let len = terms.iter().map(|(_, p)| p.coeffs.len()).max().unwrap_or(0);
        let mut coeffs = vec![BigInt::zero(); len];
        for (c, p) in terms {
            if c.is_zero() {
                continue;
            }
            let f = c.numer() * (&den / (c.denom() * &p.den));
            for (out, a) in coeffs.iter_mut().zip(&p.coeffs) {
                *out += &f * a;
            }
        }
        let mut p = UPoly { coeffs, den };
        p.normalize();
        p
    }
}

/// Moments `mu_0..mu_K` as integers over a common denominator, so that
/// applying the functional to a [`UPoly`] is one integer dot product.
#[derive(Clone, Debug)]
pub struct ScaledMoments {
    values: Vec<BigInt>,
    den: BigInt,
}

impl ScaledMoments {
    pub fn new(moments: &[Rational]) -> Self {
        let den = common_denominator(moments);
        let values = moments.iter().map(|m| m.numer() * (&den / m.denom())).collect();
        ScaledMoments { values, den }
    }

    /// Highest available moment index.
    pub fn max_degree(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn apply(&self, p: &UPoly) -> Result<Rational> {
        if !p.is_zero() && p.degree() > self.max_degree() {
            return Err(Error::DegreeExceeded { needed: p.degree(), available: self.max_degree() });
        }
        let mut acc = BigInt::zero();
        for (c, m) in p.coeffs.iter().zip(&self.values) {
            acc += c * m;
        }
        Ok(Rational::new(acc, &p.den * &self.den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn up(c: &[Rational]) -> UPoly {
        UPoly::from_rationals(c)
    }

    #[test]
    fn arithmetic_matches_rational_coefficients() {
        let a = up(&[ratio(1, 2), ratio(-1, 3), int(2)]);
        let b = up(&[ratio(3, 4), int(1)]);
        let prod = a.mul(&b);
        assert_eq!(
            prod.to_rationals(),
            vec![ratio(3, 8), ratio(1, 4), ratio(7, 6), int(2)]
        );
        assert_eq!(a.square(), a.mul(&a));
        assert_eq!(a.pow2(2), a.mul(&a).mul(&a).mul(&a));
        assert_eq!(a.pow(3), a.mul(&a).mul(&a));
    }

    #[test]
    fn eval_is_exact() {
        let a = up(&[int(-1), int(0), int(1)]);
        assert_eq!(a.eval(&int(2)), int(3));
        assert_eq!(a.eval(&ratio(1, 2)), ratio(-3, 4));
        assert_eq!(a.sign_at(&int(1)), 0);
    }

    #[test]
    fn taylor_shift_and_lower_bound() {
        let a = up(&[int(1), int(2), int(1)]); // (1+x)^2
        assert_eq!(a.taylor_shift(&int(1)), vec![int(4), int(4), int(1)]);
        let lb = a.abs_lower_bound(&int(1), &ratio(1, 10));
        assert_eq!(lb, int(4) - ratio(4, 10) - ratio(1, 100));
        assert!(a.abs_lower_bound(&int(-1), &ratio(1, 10)).is_zero());
        let q = up(&[ratio(1, 3), ratio(-5, 7), ratio(2, 9), ratio(1, 2)]);
        let (c, r) = (ratio(3, 4), ratio(1, 50));
        let shifted = q.taylor_shift(&c);
        let mut slow = shifted[0].abs();
        for (j, coef) in shifted.iter().enumerate().skip(1) {
            slow -= coef.abs() * crate::rational::pow(&r, j);
        }
        assert_eq!(q.abs_lower_bound(&c, &r), slow);
    }

    #[test]
    fn combine_matches_sum() {
        let a = up(&[ratio(1, 2), ratio(-1, 3)]);
        let b = up(&[ratio(2, 5), int(0), ratio(7, 4)]);
        let c = UPoly::combine(&[(ratio(3, 7), &a), (ratio(-1, 6), &b)]);
        assert_eq!(
            c.to_rationals(),
            vec![ratio(3, 14) - ratio(1, 15), ratio(-1, 7), ratio(-7, 24)]
        );
    }

    #[test]
    fn scaled_moments_apply() {
        let m = ScaledMoments::new(&[int(1), ratio(1, 2), ratio(1, 3), ratio(1, 4)]);
        let p = up(&[int(0), int(0), int(0), int(4)]);
        assert_eq!(m.apply(&p).unwrap(), int(1));
        let mut high = vec![int(0); 5];
        high.push(int(1));
        assert!(m.apply(&up(&high)).is_err());
    }
}
