//! Matrices of exact rationals: floating PSD verdicts, exact rank modulo
//! large primes, and exact linear solves.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};

/// Default PSD tolerance, relative to the largest absolute eigenvalue.
pub const DEFAULT_PSD_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Invalid("ragged matrix rows".into()));
        }
        Ok(RationalMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.data.chunks(self.cols.max(1)).map(<[Rational]>::to_vec).collect()
    }

    pub fn check_symmetric(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::Invalid(format!("matrix is {}x{}, not square", self.rows, self.cols)));
        }
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if self.get(i, j) != self.get(j, i) {
                    return Err(Error::NonSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Float copy scaled by an exact power of two so the largest entry is
    /// near 1. Returns the matrix and the base-2 exponent removed.
    pub fn to_scaled_f64(&self) -> (DMatrix<f64>, i64) {
        let shift = self
            .data
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| v.numer().bits() as i64 - v.denom().bits() as i64)
            .max()
            .unwrap_or(0);
        let scale = if shift >= 0 {
            Rational::new(BigInt::one(), BigInt::one() << shift as usize)
        } else {
            Rational::from_integer(BigInt::one() << (-shift) as usize)
        };
        let m = DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(&(self.get(i, j) * &scale)));
        (m, shift)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsdVerdict {
    #[serde(rename = "PSD")]
    Psd,
    #[serde(rename = "NotPSD")]
    NotPsd,
    Borderline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub size: usize,
    pub min_eigenvalue: f64,
    pub max_abs_eigenvalue: f64,
    /// Absolute tolerance (relative tolerance times the largest absolute
    /// eigenvalue).
    pub tolerance: f64,
    pub verdict: PsdVerdict,
    pub rank_estimate: usize,
}

impl PsdReport {
    /// True unless the matrix is clearly indefinite.
    pub fn passes(&self) -> bool {
        self.verdict != PsdVerdict::NotPsd
    }
}

/// Eigenvalue-based PSD verdict.
///
/// Eigenvalues come from a float copy of the matrix. A minimum eigenvalue
/// within rounding noise (`8 n eps max|λ|`) of zero counts as PSD; one that
/// is negative beyond the noise but within `tolerance * max|λ|` is
/// Borderline; anything lower is NotPSD.
pub fn psd_check(m: &RationalMatrix, tolerance: f64) -> Result<PsdReport> {
    m.check_symmetric()?;
    let n = m.rows();
    if n == 0 {
        return Ok(PsdReport {
            size: 0,
            min_eigenvalue: 0.0,
            max_abs_eigenvalue: 0.0,
            tolerance: 0.0,
            verdict: PsdVerdict::Psd,
            rank_estimate: 0,
        });
    }
    let (f, shift) = m.to_scaled_f64();
    let eig = f.symmetric_eigenvalues();
    let unscale = |v: f64| v * 2f64.powi(shift.clamp(-1000, 1000) as i32);
    let max_abs = eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = tolerance * max_abs;
    let noise = (8.0 * n as f64 * f64::EPSILON * max_abs).min(tol);
    let verdict = if min >= -noise {
        PsdVerdict::Psd
    } else if min >= -tol {
        PsdVerdict::Borderline
    } else {
        PsdVerdict::NotPsd
    };
    let rank_estimate = eig.iter().filter(|&&v| v > tol).count();
    Ok(PsdReport {
        size: n,
        min_eigenvalue: unscale(min),
        max_abs_eigenvalue: unscale(max_abs),
        tolerance: unscale(tol),
        verdict,
        rank_estimate,
    })
}

const PRIMES: [u64; 3] = [(1 << 61) - 1, (1 << 62) - 57, (1 << 60) - 93];

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn reduce(v: &BigInt, p: u64) -> u64 {
    let r = v % BigInt::from(p);
    let r = if r.is_negative() { r + BigInt::from(p) } else { r };
    r.to_u64().expect("reduced below p")
}

fn rank_mod(m: &RationalMatrix, p: u64) -> Option<usize> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = Vec::with_capacity(rows * cols);
    for v in &m.data {
        let den = reduce(v.denom(), p);
        if den == 0 {
            return None;
        }
        a.push(mul_mod(reduce(v.numer(), p), pow_mod(den, p - 2, p), p));
    }
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| a[r * cols + col] != 0) else {
            continue;
        };
        for j in 0..cols {
            a.swap(pivot * cols + j, rank * cols + j);
        }
        let inv = pow_mod(a[rank * cols + col], p - 2, p);
        for r in rank + 1..rows {
            let f = mul_mod(a[r * cols + col], inv, p);
            if f == 0 {
                continue;
            }
            for j in col..cols {
                let sub = mul_mod(f, a[rank * cols + j], p);
                a[r * cols + j] = (a[r * cols + j] + p - sub) % p;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Some(rank)
}

/// Rank over the rationals, computed modulo two large primes.
///
/// A rank modulo a prime never exceeds the true rank, and equals it unless
/// the prime divides one specific nonzero minor; taking the maximum over
/// two primes makes a wrong answer practically impossible.
pub fn exact_rank(m: &RationalMatrix) -> usize {
    PRIMES
        .iter()
        .filter_map(|&p| rank_mod(m, p))
        .take(2)
        .max()
        .unwrap_or(0)
}

/// Solves `a x = b` exactly; `None` if `a` is singular.
pub fn solve_rational(a: &RationalMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return None;
    }
    let mut rows: Vec<Vec<Rational>> = a.to_rows();
    for (row, rhs) in rows.iter_mut().zip(b) {
        row.push(rhs.clone());
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, pivot);
        let inv = rows[col][col].recip();
        for v in rows[col].iter_mut().skip(col) {
            *v *= &inv;
        }
        for r in 0..n {
            if r == col || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for j in col..=n {
                let t = &rows[col][j] * &f;
                rows[r][j] -= t;
            }
        }
    }
    Some(rows.into_iter().map(|mut r| r.pop().expect("rhs column")).collect())
}

/// Determinant by exact elimination.
pub fn determinant(a: &RationalMatrix) -> Result<Rational> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Invalid("determinant of a non-square matrix".into()));
    }
    let mut rows = a.to_rows();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
            return Ok(Rational::zero());
        };
        if pivot != col {
            rows.swap(col, pivot);
            det = -det;
        }
        det *= &rows[col][col];
        let inv = rows[col][col].recip();
        for r in col + 1..n {
            if rows[r][col].is_zero() {
                continue;
            }
            let f = &rows[r][col] * &inv;
            for j in col..n {
                let t = &rows[col][j] * &f;
                rows[r][j] -= t;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn mat(rows: &[&[Rational]]) -> RationalMatrix {
        RationalMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn psd_examples() {
        let r = psd_check(&mat(&[&[int(1), int(0)], &[int(0), int(0)]]), 1e-9).unwrap();
        assert_eq!(r.verdict, PsdVerdict::Psd);
        assert_eq!(r.rank_estimate, 1);
        let r = psd_check(&mat(&[&[int(0), int(1)], &[int(1), int(0)]]), 1e-9).unwrap();
        assert_eq!(r.verdict, PsdVerdict::NotPsd);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_rejects_asymmetric() {
        let err = psd_check(&mat(&[&[int(1), int(2)], &[int(0), int(1)]]), 1e-9).unwrap_err();
        assert_eq!(err, Error::NonSymmetric { row: 0, col: 1 });
    }

    #[test]
    fn psd_handles_huge_entries() {
        let big = crate::rational::pow(&int(10), 400);
        let r = psd_check(&mat(&[&[big.clone(), int(0)], &[int(0), big]]), 1e-9).unwrap();
        assert_eq!(r.verdict, PsdVerdict::Psd);
        assert_eq!(r.rank_estimate, 2);
    }

    #[test]
    fn exact_rank_of_hilbert_matrix() {
        let h = RationalMatrix::from_fn(12, 12, |i, j| ratio(1, (i + j + 1) as i64));
        assert_eq!(exact_rank(&h), 12);
        let low = RationalMatrix::from_fn(6, 6, |i, j| int((i * j) as i64 + 1));
        assert_eq!(exact_rank(&low), 2);
    }

    #[test]
    fn solve_and_determinant() {
        let a = mat(&[&[int(1), ratio(-5, 8)], &[ratio(-5, 8), ratio(13, 16)]]);
        assert_eq!(determinant(&a).unwrap(), ratio(27, 64));
        let x = solve_rational(&a, &[int(1), int(0)]).unwrap();
        assert_eq!(&x[0] * int(1) + &x[1] * ratio(-5, 8), int(1));
        let s = mat(&[&[int(1), int(2)], &[int(2), int(4)]]);
        assert!(solve_rational(&s, &[int(1), int(1)]).is_none());
    }
}
