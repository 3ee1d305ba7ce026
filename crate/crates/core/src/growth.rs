//! The seminorm ladder `p_d(a) = L(a^(2^d))^(1/2^d)`, the root sequence
//! `r_n = L(a^(2n))^(1/2n)`, and the growth verdict built on them.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::MomentSequence;
use crate::poly::Polynomial;
use crate::pushforward::{power_moments, univariate_coefficients, OrthogonalSystem};
use crate::rational::{format_rational, nth_root, pow, Rational};
use crate::univariate::{ScaledMoments, UPoly};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthThresholds {
    /// Ladder log-increments below this count as converged.
    pub increment_tol: f64,
    /// Nonincreasing final log-increments whose last step shrinks by at
    /// least this factor count as converging geometrically.
    pub contraction_ratio: f64,
    /// Log-log slope of `r_n` against `n` at or above which the sequence is
    /// called diverging.
    pub divergence_slope: f64,
}

impl Default for GrowthThresholds {
    fn default() -> Self {
        GrowthThresholds { increment_tol: 1e-3, contraction_ratio: 0.75, divergence_slope: 0.25 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthVerdict {
    Bounded,
    Diverging,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    /// The analysed polynomial in canonical text form.
    pub poly: String,
    pub ladder: Vec<(u32, f64)>,
    pub roots: Vec<(usize, f64)>,
    pub d_max: u32,
    /// Last ladder value.
    pub ladder_estimate: f64,
    /// Largest certified `|node|` of the Gauss rule of `a_# ν`.
    pub quadrature_radius: f64,
    /// `max(ladder_estimate, quadrature_radius)`; a lower bound on `p_L(a)`.
    pub p_l_estimate: f64,
    pub verdict: GrowthVerdict,
    /// Log-log slope of `r_n` over the upper half of the feasible range.
    pub slope: f64,
    pub lower_bound: bool,
}

fn check_even_power(power: usize, v: &Rational) -> Result<()> {
    if v.is_negative() {
        return Err(Error::NegativePower { power, value: format_rational(v) });
    }
    Ok(())
}

/// Exact `L(a^(2^d))`.
pub fn ladder_power(l: &MomentSequence, a: &Polynomial, d: u32) -> Result<Rational> {
    let k = 1usize << d;
    let needed = a.degree() * k;
    l.check_degree(needed)?;
    let v = if l.num_vars() == 1 {
        let scaled = ScaledMoments::new(l.univariate_values()?);
        let p = UPoly::from_rationals(&univariate_coefficients(a)).pow2(d);
        scaled.apply(&p)?
    } else {
        l.apply(&a.pow2(d, l.max_degree())?)?
    };
    check_even_power(k, &v)?;
    Ok(v)
}

/// `p_d(a) = L(a^(2^d))^(1/2^d)`.
pub fn p_d(l: &MomentSequence, a: &Polynomial, d: u32) -> Result<f64> {
    let v = ladder_power(l, a, d)?;
    Ok(nth_root(&v, 1 << d))
}

fn roots_from(mu: &[Rational]) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    let mut n = 1;
    while 2 * n < mu.len() {
        check_even_power(2 * n, &mu[2 * n])?;
        out.push((n, nth_root(&mu[2 * n], 2 * n)));
        n += 1;
    }
    Ok(out)
}

/// `r_n = L(a^(2n))^(1/2n)` for every feasible `n >= 1`.
pub fn root_sequence(l: &MomentSequence, a: &Polynomial) -> Result<Vec<(usize, f64)>> {
    roots_from(&power_moments(l, a, None)?)
}

/// Exact check that `r_n` is nondecreasing: `L(a^(2n))^(n+1) <= L(a^(2n+2))^n`.
pub fn roots_monotone(l: &MomentSequence, a: &Polynomial) -> Result<bool> {
    let mu = power_moments(l, a, None)?;
    let mut n = 1;
    while 2 * n + 2 < mu.len() {
        let (lo, hi) = (&mu[2 * n], &mu[2 * n + 2]);
        check_even_power(2 * n, lo)?;
        check_even_power(2 * n + 2, hi)?;
        if pow(lo, n + 1) > pow(hi, n) {
            return Ok(false);
        }
        n += 1;
    }
    Ok(true)
}

/// Least-squares slope of `ln r_n` against `ln n` over the upper half of
/// the range; zero when some `r_n` vanishes.
fn log_log_slope(roots: &[(usize, f64)]) -> f64 {
    let tail = &roots[roots.len() / 2..];
    if tail.len() < 2 || tail.iter().any(|&(_, r)| r <= 0.0) {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = tail.iter().map(|&(n, r)| ((n as f64).ln(), r.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn log_increments(ladder: &[(u32, f64)]) -> Vec<f64> {
    ladder
        .windows(2)
        .map(|w| match (w[0].1, w[1].1) {
            (a, b) if a == 0.0 && b == 0.0 => 0.0,
            (0.0, _) => f64::INFINITY,
            (a, b) => (b / a).ln(),
        })
        .collect()
}

fn decide(ladder: &[(u32, f64)], slope: f64, th: &GrowthThresholds) -> GrowthVerdict {
    if slope >= th.divergence_slope {
        return GrowthVerdict::Diverging;
    }
    let g = log_increments(ladder);
    if g.is_empty() {
        return GrowthVerdict::Inconclusive;
    }
    let last = &g[g.len().saturating_sub(3)..];
    if last.iter().all(|&x| x < th.increment_tol) {
        return GrowthVerdict::Bounded;
    }
    if last.len() == 3
        && last.iter().all(|x| x.is_finite() && *x >= 0.0)
        && last[1] <= last[0]
        && last[2] <= th.contraction_ratio * last[1]
    {
        return GrowthVerdict::Bounded;
    }
    GrowthVerdict::Inconclusive
}

/// Ladder, roots, `p_L` estimate and verdict for `a`.
pub fn growth_profile(l: &MomentSequence, a: &Polynomial, th: &GrowthThresholds) -> Result<GrowthProfile> {
    let mu = power_moments(l, a, None)?;
    let roots = roots_from(&mu)?;
    let mut ladder = Vec::new();
    let mut d = 1u32;
    while (1usize << d) < mu.len() {
        let k = 1usize << d;
        ladder.push((d, nth_root(&mu[k], k)));
        d += 1;
    }
    let d_max = ladder.last().map_or(0, |x| x.0);
    let ladder_estimate = ladder.last().map_or(0.0, |x| x.1);
    let quadrature_radius = OrthogonalSystem::new(&mu)?.certified_radius();
    let slope = log_log_slope(&roots);
    let verdict = decide(&ladder, slope, th);
    Ok(GrowthProfile {
        poly: a.to_string(),
        ladder,
        roots,
        d_max,
        ladder_estimate,
        quadrature_radius,
        p_l_estimate: ladder_estimate.max(quadrature_radius),
        verdict,
        slope,
        lower_bound: true,
    })
}

/// `Σ_n 1/r_n` over the feasible range; infinite when some `r_n` is zero.
pub fn carleman_partial(l: &MomentSequence, a: &Polynomial) -> Result<f64> {
    let roots = root_sequence(l, a)?;
    Ok(roots.iter().map(|&(_, r)| if r == 0.0 { f64::INFINITY } else { 1.0 / r }).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormSample {
    pub a: String,
    pub b: String,
    pub lambda: String,
    pub triangle: bool,
    pub homogeneity: bool,
    pub cross_submultiplicative: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub d: u32,
    pub samples: Vec<SeminormSample>,
    pub all_hold: bool,
}

const RELATIVE_SLACK: f64 = 1e-9;

/// Triangle inequality, homogeneity and `p_d(ab) <= p_(d+1)(a) p_(d+1)(b)`
/// on each sample `(a, b, λ)`.
///
/// Homogeneity and cross-submultiplicativity are compared exactly on the
/// `2^d`-th (resp. `2^(d+1)`-th) powers; the triangle inequality in floating
/// point with relative slack `1e-9`.
pub fn seminorm_props(
    l: &MomentSequence,
    d: u32,
    samples: &[(Polynomial, Polynomial, Rational)],
) -> Result<SeminormReport> {
    let mut out = Vec::with_capacity(samples.len());
    for (a, b, lambda) in samples {
        let sum = a.add(b)?;
        let pa = p_d(l, a, d)?;
        let pb = p_d(l, b, d)?;
        let psum = p_d(l, &sum, d)?;
        let triangle = psum <= (pa + pb) * (1.0 + RELATIVE_SLACK);

        let scaled = ladder_power(l, &a.scale(lambda), d)?;
        let homogeneity = scaled == pow(lambda, 1 << d) * ladder_power(l, a, d)?;

        let prod = ladder_power(l, &a.mul(b)?, d)?;
        let cross = &prod * &prod <= ladder_power(l, a, d + 1)? * ladder_power(l, b, d + 1)?;

        out.push(SeminormSample {
            a: a.to_string(),
            b: b.to_string(),
            lambda: format_rational(lambda),
            triangle,
            homogeneity,
            cross_submultiplicative: cross,
        });
    }
    let all_hold = out.iter().all(|s| s.triangle && s.homogeneity && s.cross_submultiplicative);
    Ok(SeminormReport { d, samples: out, all_hold })
}

/// `p_1(a) = 0` exactly when `p_d(a) = 0`, decided on exact rationals.
pub fn kernel_check(l: &MomentSequence, a: &Polynomial, d: u32) -> Result<bool> {
    let first = ladder_power(l, a, 1)?;
    let deep = ladder_power(l, a, d.max(1))?;
    Ok(first.is_zero() == deep.is_zero())
}

/// `index,value` CSV rows.
pub fn to_csv<I: std::fmt::Display>(rows: &[(I, f64)]) -> String {
    let mut s = String::from("index,value\n");
    for (i, v) in rows {
        s.push_str(&format!("{i},{v}\n"));
    }
    s
}
