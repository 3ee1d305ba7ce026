//! Moments of `a_# ν` (the values `L(a^k)`) and the orthogonal polynomials
//! they define.
//!
//! The three-term recurrence is computed exactly from the moments. Its
//! Jacobi matrix gives Gauss nodes; the extreme nodes are certified by exact
//! sign evaluation and serve as lower bounds for `sup |a|` on the support.
//! When a norm `L(π_N^2)` vanishes, `π_N` annihilates the support.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::moments::MomentSequence;
use crate::poly::Polynomial;
use crate::rational::{format_rational, from_f64, to_f64, Rational};
use crate::univariate::{ScaledMoments, UPoly};

/// `L(a^k)` for `k = 0..=kmax`. With `kmax = None` every feasible power
/// (`k deg(a) <= D`) is computed.
pub fn power_moments(l: &MomentSequence, a: &Polynomial, kmax: Option<usize>) -> Result<Vec<Rational>> {
    if a.num_vars() != l.num_vars() {
        return Err(Error::DimensionMismatch { expected: l.num_vars(), found: a.num_vars() });
    }
    let deg = a.degree();
    let feasible = if deg == 0 { l.max_degree() } else { l.max_degree() / deg };
    let kmax = match kmax {
        Some(k) if k > feasible && deg > 0 => {
            return Err(Error::DegreeExceeded { needed: k * deg, available: l.max_degree() });
        }
        Some(k) => k,
        None => feasible,
    };
    if deg == 0 {
        let c = a.constant_term();
        let mut out = Vec::with_capacity(kmax + 1);
        let mut cur = Rational::one();
        for _ in 0..=kmax {
            out.push(cur.clone());
            cur *= &c;
        }
        return Ok(out);
    }
    let mut out = Vec::with_capacity(kmax + 1);
    if l.num_vars() == 1 {
        let scaled = ScaledMoments::new(l.univariate_values()?);
        let base = UPoly::from_rationals(&univariate_coefficients(a));
        let mut cur = UPoly::constant(Rational::one());
        for k in 0..=kmax {
            if k > 0 {
                cur = cur.mul(&base);
            }
            out.push(scaled.apply(&cur)?);
        }
    } else {
        let mut cur = Polynomial::one(a.num_vars());
        for k in 0..=kmax {
            if k > 0 {
                cur = cur.mul(a)?;
            }
            out.push(l.apply(&cur)?);
        }
    }
    Ok(out)
}

/// Dense coefficients of a univariate polynomial.
pub fn univariate_coefficients(a: &Polynomial) -> Vec<Rational> {
    let mut c = vec![Rational::zero(); a.degree() + 1];
    for (e, v) in a.terms() {
        c[e.total()] = v.clone();
    }
    c
}

/// Monic orthogonal polynomials of a univariate moment functional.
#[derive(Clone, Debug)]
pub struct OrthogonalSystem {
    polys: Vec<Vec<Rational>>,
    dense: Vec<UPoly>,
    norms: Vec<Rational>,
    alphas: Vec<Rational>,
    annihilator: Option<usize>,
}

impl OrthogonalSystem {
    /// Runs the recurrence on `mu_0..mu_M`. Fails if some norm is negative,
    /// which no positive measure allows.
    pub fn new(moments: &[Rational]) -> Result<Self> {
        let m = moments.len().saturating_sub(1);
        let mut polys: Vec<Vec<Rational>> = vec![vec![Rational::one()]];
        let mut norms: Vec<Rational> = Vec::new();
        let mut alphas = Vec::new();
        let mut annihilator = None;
        let mut i = 0;
        while 2 * i <= m && !moments.is_empty() {
            let pi = &polys[i];
            let h: Rational = pi.iter().enumerate().map(|(j, c)| c * &moments[i + j]).sum();
            if h.is_zero() {
                norms.push(h);
                annihilator = Some(i);
                break;
            }
            if h.is_negative() {
                return Err(Error::NotPositive(format!(
                    "L(π_{i}^2) = {} < 0 for the degree-{i} orthogonal polynomial",
                    format_rational(&h)
                )));
            }
            norms.push(h.clone());
            if 2 * i + 1 > m {
                break;
            }
            let shifted: Rational = pi.iter().enumerate().map(|(j, c)| c * &moments[i + 1 + j]).sum();
            let mut a = shifted / &h;
            if i >= 1 {
                a += &pi[i - 1];
            }
            let mut next = vec![Rational::zero(); i + 2];
            for (j, c) in pi.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= &a * c;
            }
            if i >= 1 {
                let b = &h / &norms[i - 1];
                for (j, c) in polys[i - 1].iter().enumerate() {
                    next[j] -= &b * c;
                }
            }
            alphas.push(a);
            polys.push(next);
            i += 1;
        }
        let dense = polys.iter().map(|p| UPoly::from_rationals(p)).collect();
        Ok(OrthogonalSystem { polys, dense, norms, alphas, annihilator })
    }

    /// Index `N` with `L(π_N^2) = 0`, if the recurrence terminated.
    pub fn annihilator_degree(&self) -> Option<usize> {
        self.annihilator
    }

    /// Coefficients of `π_i`.
    pub fn poly(&self, i: usize) -> &[Rational] {
        &self.polys[i]
    }

    /// `L(π_i^2)` for every `i` where it is known.
    pub fn norms(&self) -> &[Rational] {
        &self.norms
    }

    /// Number of orthogonal polynomials with positive norm.
    pub fn positive_count(&self) -> usize {
        self.norms.iter().filter(|h| h.is_positive()).count()
    }

    /// Size of the Jacobi matrix (degree of the node polynomial).
    pub fn node_count(&self) -> usize {
        self.alphas.len()
    }

    fn jacobi(&self) -> DMatrix<f64> {
        let k = self.alphas.len();
        let mut j = DMatrix::zeros(k, k);
        for i in 0..k {
            j[(i, i)] = to_f64(&self.alphas[i]);
            if i + 1 < k {
                let b = to_f64(&(&self.norms[i + 1] / &self.norms[i])).max(0.0).sqrt();
                j[(i, i + 1)] = b;
                j[(i + 1, i)] = b;
            }
        }
        j
    }

    /// Gauss nodes (zeros of `π_K`), ascending, in floating point.
    pub fn nodes(&self) -> Vec<f64> {
        if self.alphas.is_empty() {
            return Vec::new();
        }
        let mut v: Vec<f64> = self.jacobi().symmetric_eigenvalues().iter().cloned().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Gauss nodes with weights (normalized by `L(1)`).
    pub fn quadrature(&self) -> Vec<(f64, f64)> {
        if self.alphas.is_empty() {
            return Vec::new();
        }
        let eig = self.jacobi().symmetric_eigen();
        let mu0 = to_f64(&self.norms[0]);
        let mut out: Vec<(f64, f64)> = (0..eig.eigenvalues.len())
            .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Certified interval `[lo, hi]` such that the support of the measure
    /// reaches below `lo` and above `hi`. Each end is `None` when the float
    /// node could not be confirmed by an exact sign change.
    pub fn certified_extremes(&self) -> (Option<f64>, Option<f64>) {
        let k = self.alphas.len();
        if k == 0 {
            return (None, None);
        }
        let nodes = self.nodes();
        let pk = UPoly::from_rationals(&self.polys[k]);
        let (min, max) = (nodes[0], nodes[k - 1]);
        // Just below the largest zero the monic π_K is negative; just above
        // the smallest it has sign (-1)^(K-1).
        // A float that is an exact zero a few ulps outward is preferred.
        let is_zero = |x: f64| pk.sign_at(&from_f64(x)) == 0;
        let hi = exact_zero_near(max, 1.0, is_zero)
            .or_else(|| bracket(max, -1.0, |x| pk.sign_at(&from_f64(x)) <= 0));
        let want = if (k - 1).is_multiple_of(2) { 1 } else { -1 };
        let lo = exact_zero_near(min, -1.0, is_zero).or_else(|| {
            bracket(min, 1.0, |x| {
                let s = pk.sign_at(&from_f64(x));
                s == 0 || s == want
            })
        });
        (lo, hi)
    }

    /// Certified lower bound on `sup |t|` over the support.
    pub fn certified_radius(&self) -> f64 {
        let (lo, hi) = self.certified_extremes();
        let mut r: f64 = 0.0;
        if let Some(h) = hi {
            r = r.max(h);
        }
        if let Some(l) = lo {
            r = r.max(-l);
        }
        r
    }

    /// Christoffel kernel `K_k(t, t0) = Σ_{i<=k} π_i(t0) π_i(t) / h_i` as
    /// coefficients in `t`. Requires `k < positive_count()`.
    pub fn kernel(&self, t0: &Rational, k: usize) -> Result<Vec<Rational>> {
        Ok(self.kernel_poly(t0, k)?.to_rationals())
    }

    /// [`OrthogonalSystem::kernel`] as a [`UPoly`].
    pub fn kernel_poly(&self, t0: &Rational, k: usize) -> Result<UPoly> {
        if k >= self.positive_count() {
            return Err(Error::DegreeExceeded { needed: 2 * k, available: 2 * self.positive_count().saturating_sub(1) });
        }
        let terms: Vec<(Rational, &UPoly)> =
            (0..=k).map(|i| (self.dense[i].eval(t0) / &self.norms[i], &self.dense[i])).collect();
        Ok(UPoly::combine(&terms))
    }
}

fn exact_zero_near(x: f64, direction: f64, is_zero: impl Fn(f64) -> bool) -> Option<f64> {
    let mut y = x;
    for _ in 0..4 {
        y = if direction > 0.0 { y.next_up() } else { y.next_down() };
        if is_zero(y) {
            return Some(y);
        }
    }
    None
}

/// Walks from `x` in `direction` in growing steps until `ok` holds.
fn bracket(x: f64, direction: f64, ok: impl Fn(f64) -> bool) -> Option<f64> {
    if ok(x) {
        return Some(x);
    }
    let scale = x.abs().max(f64::MIN_POSITIVE);
    let mut step = scale * f64::EPSILON;
    while step <= scale * 1e-5 {
        let y = x + direction * step;
        if ok(y) {
            return Some(y);
        }
        step *= 4.0;
    }
    None
}

/// The functional transported along a polynomial `a`: moments `L(a^k)` and
/// their orthogonal system.
#[derive(Clone, Debug)]
pub struct Pushforward {
    form: Polynomial,
    moments: Vec<Rational>,
    scaled: ScaledMoments,
    system: OrthogonalSystem,
}

impl Pushforward {
    pub fn new(l: &MomentSequence, form: &Polynomial) -> Result<Self> {
        let moments = power_moments(l, form, None)?;
        Pushforward::from_moments(form.clone(), moments)
    }

    pub fn from_moments(form: Polynomial, moments: Vec<Rational>) -> Result<Self> {
        let system = OrthogonalSystem::new(&moments)?;
        let scaled = ScaledMoments::new(&moments);
        Ok(Pushforward { form, moments, scaled, system })
    }

    pub fn form(&self) -> &Polynomial {
        &self.form
    }

    pub fn moments(&self) -> &[Rational] {
        &self.moments
    }

    pub fn system(&self) -> &OrthogonalSystem {
        &self.system
    }

    /// Highest usable power of the form.
    pub fn max_power(&self) -> usize {
        self.moments.len().saturating_sub(1)
    }

    /// `L(q(a))` for a univariate `q` of degree at most `max_power()`.
    pub fn apply(&self, q: &UPoly) -> Result<Rational> {
        self.scaled.apply(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{from_atomic, from_closed_form, AtomicMeasure, Family};
    use crate::poly::parse_polynomial;
    use crate::rational::{int, ratio};

    fn two_atoms(d: usize) -> MomentSequence {
        from_atomic(&AtomicMeasure::parse("(-1:3/4),(1/2:1/4)").unwrap(), d)
    }

    #[test]
    fn power_moments_match_apply() {
        let l = two_atoms(12);
        let a = parse_polynomial("X^2 - X/3", 1).unwrap();
        let mu = power_moments(&l, &a, None).unwrap();
        assert_eq!(mu.len(), 7);
        for (k, m) in mu.iter().enumerate() {
            assert_eq!(m, &l.apply(&a.pow(k, 256).unwrap()).unwrap());
        }
        let m2 = from_atomic(&AtomicMeasure::parse("(1/2,-1:1/3),(0,2:2/3)").unwrap(), 6);
        let b = parse_polynomial("X + 2Y", 2).unwrap();
        let mu = power_moments(&m2, &b, None).unwrap();
        assert_eq!(mu[2], ratio(1, 3) * ratio(9, 4) + ratio(2, 3) * int(16));
        assert!(power_moments(&l, &a, Some(7)).is_err());
    }

    #[test]
    fn annihilator_of_atomic_measure() {
        let l = two_atoms(16);
        let sys = OrthogonalSystem::new(l.univariate_values().unwrap()).unwrap();
        assert_eq!(sys.annihilator_degree(), Some(2));
        // π_2 = (X + 1)(X - 1/2)
        assert_eq!(sys.poly(2), &[ratio(-1, 2), ratio(1, 2), int(1)]);
        let nodes = sys.nodes();
        assert!((nodes[0] + 1.0).abs() < 1e-12 && (nodes[1] - 0.5).abs() < 1e-12);
        assert_eq!(sys.certified_radius(), 1.0);
        let q = sys.quadrature();
        assert!((q[0].1 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn uniform_nodes_stay_inside_the_interval() {
        let l = from_closed_form(&Family::UniformUnitInterval, 64);
        let sys = OrthogonalSystem::new(l.univariate_values().unwrap()).unwrap();
        assert_eq!(sys.annihilator_degree(), None);
        assert_eq!(sys.node_count(), 32);
        let (lo, hi) = sys.certified_extremes();
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        assert!(lo > 0.0 && lo < 0.01, "{lo}");
        assert!(hi < 1.0 && hi > 0.99, "{hi}");
    }

    #[test]
    fn kernel_reproduces_polynomials() {
        // Σ_j K(t, t0) q(t) dν = q(t0) for deg q <= k.
        let l = from_closed_form(&Family::UniformUnitInterval, 16);
        let pf = Pushforward::new(&l, &Polynomial::var(1, 0)).unwrap();
        let t0 = ratio(1, 3);
        let k = pf.system().kernel(&t0, 4).unwrap();
        let q = [int(2), int(-1), int(0), int(5)];
        let prod = UPoly::from_rationals(&k).mul(&UPoly::from_rationals(&q));
        let expect = UPoly::from_rationals(&q).eval(&t0);
        assert_eq!(pf.apply(&prod).unwrap(), expect);
    }

    #[test]
    fn negative_norm_is_reported() {
        let bad = [int(1), int(0), int(-1)];
        assert!(matches!(OrthogonalSystem::new(&bad), Err(Error::NotPositive(_))));
    }
}
