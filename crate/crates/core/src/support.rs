//! Support localization: the coordinate box, membership tests, finite
//! support detection, tail bounds and localizing-matrix certificates.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{growth_profile, p_d, GrowthProfile, GrowthThresholds, GrowthVerdict};
use crate::linalg::{exact_rank, psd_check, PsdReport, DEFAULT_PSD_TOLERANCE};
use crate::mass::{atom_mass, MassOptions};
use crate::moments::MomentSequence;
use crate::poly::{monomials_up_to, Polynomial};
use crate::pushforward::power_moments;
use crate::rational::{from_f64, pow, to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub intervals: Vec<(f64, f64)>,
    /// Half-widths before slack: the `p_L` estimates of the coordinates.
    pub radii: Vec<f64>,
    pub slack: f64,
}

impl SupportBox {
    pub fn contains(&self, point: &[f64]) -> bool {
        point.iter().zip(&self.intervals).all(|(x, (lo, hi))| lo <= x && x <= hi)
    }
}

fn bounded_profile(l: &MomentSequence, a: &Polynomial, th: &GrowthThresholds) -> Result<GrowthProfile> {
    let p = growth_profile(l, a, th)?;
    if p.verdict == GrowthVerdict::Diverging {
        return Err(Error::GrowthDiverging { what: a.to_string() });
    }
    Ok(p)
}

/// `Π_i [-b_i - slack, b_i + slack]` with `b_i` the `p_L` estimate of `X_i`.
pub fn support_box(l: &MomentSequence, slack: f64, th: &GrowthThresholds) -> Result<SupportBox> {
    let mut intervals = Vec::new();
    let mut radii = Vec::new();
    for i in 0..l.num_vars() {
        let x = Polynomial::var(l.num_vars(), i);
        let p = growth_profile(l, &x, th)?;
        if p.verdict == GrowthVerdict::Diverging {
            return Err(Error::GrowthDiverging { what: format!("X{}", i + 1) });
        }
        radii.push(p.p_l_estimate);
        intervals.push((-p.p_l_estimate - slack, p.p_l_estimate + slack));
    }
    Ok(SupportBox { intervals, radii, slack })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Membership {
    Rejected { witness: String, value: f64, estimate: f64 },
    NotRejected,
}

/// Coordinates, their squares and pairwise products.
pub fn default_tests(num_vars: usize) -> Vec<Polynomial> {
    let xs: Vec<Polynomial> = (0..num_vars).map(|i| Polynomial::var(num_vars, i)).collect();
    let mut out = xs.clone();
    for i in 0..num_vars {
        for j in i..num_vars {
            out.push(xs[i].mul(&xs[j]).expect("same dimension"));
        }
    }
    out
}

/// Rejects `alpha` when some test polynomial exceeds its `p_L` estimate
/// there by more than the relative slack. Passing every test is not a
/// proof of membership.
pub fn kl_member(
    l: &MomentSequence,
    alpha: &[Rational],
    tests: &[Polynomial],
    slack: f64,
    th: &GrowthThresholds,
) -> Result<Membership> {
    for a in tests {
        let p = bounded_profile(l, a, th)?;
        let value = to_f64(&a.eval(alpha)?.abs());
        if value > p.p_l_estimate * (1.0 + slack) {
            return Ok(Membership::Rejected { witness: a.to_string(), value, estimate: p.p_l_estimate });
        }
    }
    Ok(Membership::NotRejected)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FiniteVerdict {
    Finite(usize),
    NotCertified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSupportReport {
    pub d: u32,
    pub c_est: f64,
    pub cardinality_bound: f64,
    pub hankel_rank: usize,
    /// Smallest `t` with `rank M_t = rank M_(t+1)`, if any.
    pub flat_level: Option<usize>,
    pub verdict: FiniteVerdict,
    /// Candidates whose mass bound fell below the zero tolerance.
    pub skipped_candidates: usize,
}

#[derive(Clone, Debug)]
pub struct FiniteOptions {
    pub mass: MassOptions,
    pub tolerance: f64,
    /// Largest moment matrix (rows) used in the rank scan.
    pub max_matrix_size: usize,
}

impl FiniteOptions {
    pub fn new(d: u32) -> Self {
        FiniteOptions { mass: MassOptions::new(d, 64), tolerance: 0.05, max_matrix_size: 400 }
    }
}

const ZERO_TOL: f64 = 1e-12;

/// Exact moment-matrix ranks for `t = 0, 1, ...` until two consecutive
/// ranks agree. Returns `(ranks, flat level)`.
pub fn rank_scan(l: &MomentSequence, max_size: usize) -> Result<(Vec<usize>, Option<usize>)> {
    let mut ranks = Vec::new();
    let mut t = 0;
    while 2 * t <= l.max_degree() && monomials_up_to(l.num_vars(), t).len() <= max_size {
        ranks.push(exact_rank(&l.moment_matrix(t)?));
        if t >= 1 && ranks[t] == ranks[t - 1] {
            return Ok((ranks, Some(t - 1)));
        }
        t += 1;
    }
    Ok((ranks, None))
}

/// Estimates the constant `C` with `C p_L <= p_d` and checks rank flatness.
pub fn finite_support_check(
    l: &MomentSequence,
    samples: &[Polynomial],
    candidates: &[Vec<Rational>],
    opts: &FiniteOptions,
) -> Result<FiniteSupportReport> {
    let d = opts.mass.d;
    let mut c_est: f64 = 1.0;
    for a in samples {
        let p = bounded_profile(l, a, &opts.mass.thresholds)?;
        if p.p_l_estimate < ZERO_TOL {
            continue;
        }
        c_est = c_est.min(p_d(l, a, d)? / p.p_l_estimate);
    }
    let mut skipped = 0;
    let mut mass_opts = opts.mass.clone();
    mass_opts.candidates = candidates.to_vec();
    for alpha in candidates {
        let m = atom_mass(l, alpha, &mass_opts)?;
        if m.value < ZERO_TOL {
            skipped += 1;
            continue;
        }
        c_est = c_est.min(m.value.powf(1.0 / (1u64 << d) as f64));
    }
    let cardinality_bound = c_est.powf(-((1u64 << d) as f64));
    let (ranks, flat) = rank_scan(l, opts.max_matrix_size)?;
    let hankel_rank = match flat {
        Some(t) => ranks[t],
        None => ranks.last().copied().unwrap_or(0),
    };
    let verdict = match flat {
        Some(_) if hankel_rank as f64 <= cardinality_bound * (1.0 + opts.tolerance) => {
            FiniteVerdict::Finite(hankel_rank)
        }
        _ => FiniteVerdict::NotCertified,
    };
    Ok(FiniteSupportReport {
        d,
        c_est,
        cardinality_bound,
        hankel_rank,
        flat_level: flat,
        verdict,
        skipped_candidates: skipped,
    })
}

/// `min(1, L(a^(2n)) / threshold^(2n))` for every feasible `n`: bounds on
/// `ν(|a| >= threshold)`.
pub fn chebyshev_tail(l: &MomentSequence, a: &Polynomial, threshold: f64) -> Result<Vec<(usize, f64)>> {
    if !(threshold > 0.0) {
        return Err(Error::Invalid("threshold must be positive".into()));
    }
    let thr = from_f64(threshold);
    let mu = power_moments(l, a, None)?;
    let mut out = Vec::new();
    let mut n = 1;
    while 2 * n < mu.len() {
        let v = to_f64(&(&mu[2 * n] / pow(&thr, 2 * n)));
        out.push((n, v.clamp(0.0, 1.0)));
        n += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QlCertificates {
    pub c_a: f64,
    pub plus: PsdReport,
    pub minus: PsdReport,
}

impl QlCertificates {
    pub fn both_pass(&self) -> bool {
        self.plus.passes() && self.minus.passes()
    }
}

/// Localizing-matrix PSD verdicts for `C_a + a` and `C_a - a`, `C_a` the
/// `p_L` estimate of `a` widened by a relative `1e-9`.
pub fn ql_certificates(l: &MomentSequence, a: &Polynomial, t: usize, th: &GrowthThresholds) -> Result<QlCertificates> {
    l.check_degree(2 * t + a.degree())?;
    let p = bounded_profile(l, a, th)?;
    // The float estimate cannot hit an irrational or non-dyadic sup exactly;
    // widen it by the PSD tolerance so rounding alone cannot fail the test.
    let c = from_f64(p.p_l_estimate * (1.0 + DEFAULT_PSD_TOLERANCE));
    let plus = l.localizing_matrix(&a.add_constant(&c), t)?;
    let minus = l.localizing_matrix(&a.neg().add_constant(&c), t)?;
    Ok(QlCertificates {
        c_a: to_f64(&c),
        plus: psd_check(&plus, DEFAULT_PSD_TOLERANCE)?,
        minus: psd_check(&minus, DEFAULT_PSD_TOLERANCE)?,
    })
}
