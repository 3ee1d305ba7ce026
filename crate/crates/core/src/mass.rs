//! Upper bounds on the mass `ν({α})` of a single point.
//!
//! For any polynomial `a` with `a(α) != 0`,
//! `ν({α}) <= L(a^(2^d)) / a(α)^(2^d)`, with equality in the limit over
//! polynomials that peak at `α` on the support. The bounds here run over a
//! family of such polynomials in a linear form `ℓ`:
//!
//! * the bump `(1 - ε (ℓ(α) - ℓ)^2 / p_L(2ℓ)^2)^(2n)`,
//! * the Christoffel kernel of `ℓ_# ν` centred at `ℓ(α)`,
//! * the annihilating orthogonal polynomial when `ℓ_# ν` is finitely atomic.
//!
//! All quotients are exact rationals, so every reported bound is a true
//! upper bound.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{growth_profile, GrowthThresholds, GrowthVerdict};
use crate::moments::MomentSequence;
use crate::poly::Polynomial;
use crate::pushforward::Pushforward;
use crate::rational::{format_rational, pow, round_up, to_f64, Rational};
use crate::univariate::UPoly;

/// Bump sharpness parameter.
pub fn default_epsilon() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// `(1 - ε (b(α) - b)^2 / pl_2b^2)^(2n)`.
pub fn bump(
    alpha: &[Rational],
    b: &Polynomial,
    pl_2b: &Rational,
    epsilon: &Rational,
    n: usize,
    budget: usize,
) -> Result<Polynomial> {
    if !pl_2b.is_positive() {
        return Err(Error::Invalid("p_L(2b) must be positive".into()));
    }
    if !epsilon.is_positive() || epsilon > &Rational::one() {
        return Err(Error::Invalid("epsilon must lie in (0, 1]".into()));
    }
    let degree = 4 * n * b.degree();
    if degree > budget {
        return Err(Error::BudgetExceeded { degree, budget });
    }
    let diff = b.neg().add_constant(&b.eval(alpha)?);
    let base = Polynomial::one(b.num_vars()).sub(&diff.square().scale(&(epsilon / (pl_2b * pl_2b))))?;
    base.pow(2 * n, budget)
}

/// Univariate bump in `t`: `(1 - ε (t0 - t)^2 / s^2)^(2n)`.
fn bump_in_t(t0: &Rational, s: &Rational, epsilon: &Rational, n: usize) -> UPoly {
    let c = epsilon / (s * s);
    // 1 - c (t0 - t)^2 = (1 - c t0^2) + 2 c t0 t - c t^2
    let base = UPoly::from_rationals(&[Rational::one() - &c * t0 * t0, Rational::from_integer(2.into()) * &c * t0, -c]);
    base.pow(2 * n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub alpha: Vec<f64>,
    pub alpha_exact: Vec<String>,
    pub d: u32,
    /// Running minimum over the family, one entry per level `n`.
    pub bounds: Vec<(usize, f64)>,
    /// The plain bump bound at each level, before taking minima.
    pub bump_bounds: Vec<(usize, f64)>,
    pub converged: bool,
    pub value: f64,
    /// Exact value of the final bound.
    pub value_exact: String,
    pub outside_box: bool,
    /// Linear forms used, in canonical text form.
    pub forms: Vec<String>,
}

impl MassEstimate {
    pub fn upper_bounds(&self) -> &[(usize, f64)] {
        &self.bounds
    }
}

#[derive(Clone, Debug)]
pub struct MassOptions {
    pub d: u32,
    /// Maximal level `n`; levels are further capped by degree feasibility.
    pub budget: usize,
    pub seed: u64,
    /// Known candidate atoms, used to pick a separating linear form.
    pub candidates: Vec<Vec<Rational>>,
    pub thresholds: GrowthThresholds,
    pub box_slack: f64,
}

impl MassOptions {
    pub fn new(d: u32, budget: usize) -> Self {
        MassOptions {
            d,
            budget,
            seed: 0,
            candidates: Vec::new(),
            thresholds: GrowthThresholds::default(),
            box_slack: 0.05,
        }
    }
}

/// Draws a rational linear form with coefficients `k/8`, `k` in `[-8, 8]`,
/// taking distinct values on `points`. Up to 16 draws.
pub fn separating_form(num_vars: usize, points: &[Vec<Rational>], seed: u64) -> Option<Polynomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..16 {
        let coeffs: Vec<Rational> = (0..num_vars)
            .map(|_| {
                let k: i64 = rng.random_range(1..=8) * if rng.random_bool(0.5) { 1 } else { -1 };
                Rational::new(k.into(), 8.into())
            })
            .collect();
        let form = Polynomial::from_terms(
            num_vars,
            coeffs.iter().enumerate().map(|(i, c)| {
                let mut e = vec![0; num_vars];
                e[i] = 1;
                (e, c.clone())
            }),
        )
        .expect("matching dimension");
        let mut values: Vec<Rational> = points.iter().map(|p| form.eval(p).expect("dimension")).collect();
        values.sort();
        if values.windows(2).all(|w| w[0] != w[1]) {
            return Some(form);
        }
    }
    None
}

/// Linear forms used for mass bounds: the coordinates, plus a separating
/// random form in several variables.
pub fn mass_forms(num_vars: usize, alpha: &[Rational], candidates: &[Vec<Rational>], seed: u64) -> Vec<Polynomial> {
    let mut forms: Vec<Polynomial> = (0..num_vars).map(|i| Polynomial::var(num_vars, i)).collect();
    if num_vars > 1 {
        let mut pts = candidates.to_vec();
        if !pts.iter().any(|p| p.as_slice() == alpha) {
            pts.push(alpha.to_vec());
        }
        if let Some(f) = separating_form(num_vars, &pts, seed) {
            forms.push(f);
        }
    }
    forms
}

/// Mass-bound machinery for one linear form.
#[derive(Clone, Debug)]
pub struct FormBounds {
    pf: Pushforward,
    spread: Rational,
}

impl FormBounds {
    pub fn new(l: &MomentSequence, form: &Polynomial) -> Result<Self> {
        let pf = Pushforward::new(l, form)?;
        let nodes = pf.system().nodes();
        let (lo, hi) = match (nodes.first(), nodes.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, 0.0),
        };
        // The bump only sees differences of ℓ, so ℓ may be centred at the
        // midpoint c of its range: p_L(2(ℓ - c)) = 2 sup |ℓ - c| = hi - lo.
        let width = (hi - lo).max(0.0);
        let spread = if width > 1e-12 { round_up(width, 1 << 20) } else { Rational::one() };
        Ok(FormBounds { pf, spread })
    }

    pub fn pushforward(&self) -> &Pushforward {
        &self.pf
    }

    /// `L(q(ℓ)^(2^d)) / |q(t0)|^(2^d)`, or `None` when `q(t0) = 0` or the
    /// power is not feasible.
    pub fn ratio(&self, q: &UPoly, t0: &Rational, d: u32) -> Option<Rational> {
        if q.degree() << d > self.pf.max_power() {
            return None;
        }
        let peak = q.eval(t0);
        if peak.is_zero() {
            return None;
        }
        let num = self.pf.apply(&q.pow2(d)).ok()?;
        Some(num / pow(&peak.abs(), 1 << d))
    }

    /// `L(q^(2^d)) / inf_{|t - c| <= r} |q(t)|^(2^d)`: bounds the mass of
    /// `{x : |ℓ(x) - c| <= r}`.
    pub fn interval_ratio(&self, q: &UPoly, c: &Rational, r: &Rational, d: u32) -> Option<Rational> {
        if q.degree() << d > self.pf.max_power() {
            return None;
        }
        let low = q.abs_lower_bound(c, r);
        if low.is_zero() {
            return None;
        }
        let num = self.pf.apply(&q.pow2(d)).ok()?;
        Some(num / pow(&low, 1 << d))
    }

    /// Largest level `n` with `4n 2^d <= max_power`.
    pub fn max_level(&self, d: u32) -> usize {
        self.pf.max_power() / (4usize << d)
    }

    /// The bump of level `n` peaking at `t0`.
    pub fn bump(&self, t0: &Rational, n: usize) -> UPoly {
        bump_in_t(t0, &self.spread, &default_epsilon(), n)
    }

    /// Christoffel kernel at `t0` of degree at most `max_degree`.
    pub fn kernel(&self, t0: &Rational, max_degree: usize) -> Option<UPoly> {
        let count = self.pf.system().positive_count();
        if count == 0 {
            return None;
        }
        let k = max_degree.min(count - 1);
        self.pf.system().kernel_poly(t0, k).ok()
    }

    /// `π_N` with `L(π_N^2) = 0`, if the form's pushforward is finitely
    /// atomic and `N <= max_degree`.
    pub fn annihilator(&self, max_degree: usize) -> Option<UPoly> {
        let n = self.pf.system().annihilator_degree()?;
        (n <= max_degree).then(|| UPoly::from_rationals(self.pf.system().poly(n)))
    }

    /// Family bounds at level `n`: `(bump bound, best bound)`.
    fn level(&self, t0: &Rational, n: usize, d: u32) -> (Option<Rational>, Option<Rational>) {
        let bump = self.ratio(&self.bump(t0, n), t0, d);
        let mut best = bump.clone();
        let mut consider = |v: Option<Rational>| {
            if let Some(v) = v {
                if best.as_ref().is_none_or(|b| &v < b) {
                    best = Some(v);
                }
            }
        };
        if let Some(k) = self.kernel(t0, 4 * n) {
            consider(self.ratio(&k, t0, d));
        }
        if let Some(p) = self.annihilator(4 * n) {
            consider(self.ratio(&p, t0, d));
        }
        (bump, best)
    }
}

fn outside_box(l: &MomentSequence, alpha: &[Rational], th: &GrowthThresholds, slack: f64) -> Result<bool> {
    let mut outside = false;
    for (i, a) in alpha.iter().enumerate() {
        let p = growth_profile(l, &Polynomial::var(l.num_vars(), i), th)?;
        if p.verdict == GrowthVerdict::Diverging {
            return Err(Error::GrowthDiverging { what: format!("X{}", i + 1) });
        }
        if to_f64(a).abs() > p.p_l_estimate + slack {
            outside = true;
        }
    }
    Ok(outside)
}

/// Nonincreasing upper bounds on `ν({α})`.
pub fn atom_mass(l: &MomentSequence, alpha: &[Rational], opts: &MassOptions) -> Result<MassEstimate> {
    if alpha.len() != l.num_vars() {
        return Err(Error::DimensionMismatch { expected: l.num_vars(), found: alpha.len() });
    }
    if opts.d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    let outside = outside_box(l, alpha, &opts.thresholds, opts.box_slack)?;
    let forms = mass_forms(l.num_vars(), alpha, &opts.candidates, opts.seed);
    let mut per_form = Vec::with_capacity(forms.len());
    for f in &forms {
        per_form.push((FormBounds::new(l, f)?, f.eval(alpha)?));
    }
    let levels = per_form
        .iter()
        .map(|(fb, _)| fb.max_level(opts.d))
        .max()
        .unwrap_or(0)
        .min(opts.budget);
    if levels == 0 {
        return Err(Error::BudgetExceeded { degree: 4 << opts.d, budget: l.max_degree() });
    }
    let mut running = Rational::one();
    let mut bounds = Vec::with_capacity(levels);
    let mut bump_bounds = Vec::with_capacity(levels);
    for n in 1..=levels {
        let mut level_bump: Option<Rational> = None;
        for (fb, t0) in &per_form {
            if n > fb.max_level(opts.d) {
                continue;
            }
            let (bump, best) = fb.level(t0, n, opts.d);
            if let Some(b) = bump {
                if level_bump.as_ref().is_none_or(|x| &b < x) {
                    level_bump = Some(b);
                }
            }
            if let Some(b) = best {
                if b < running {
                    running = b;
                }
            }
        }
        bounds.push((n, to_f64(&running)));
        bump_bounds.push((n, level_bump.as_ref().map_or(1.0, to_f64)));
    }
    let converged = bounds.len() >= 2 && {
        let (a, b) = (bounds[bounds.len() - 2].1, bounds[bounds.len() - 1].1);
        a - b <= 1e-3 * a + 1e-12
    };
    Ok(MassEstimate {
        alpha: alpha.iter().map(to_f64).collect(),
        alpha_exact: alpha.iter().map(format_rational).collect(),
        d: opts.d,
        value: to_f64(&running),
        value_exact: format_rational(&running),
        bounds,
        bump_bounds,
        converged,
        outside_box: outside,
        forms: forms.iter().map(Polynomial::to_string).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{from_atomic, from_closed_form, AtomicMeasure, Family};
    use crate::poly::parse_polynomial;
    use crate::rational::{int, ratio};

    #[test]
    fn bump_examples() {
        let x = Polynomial::var(1, 0);
        let b = bump(&[int(0)], &x, &int(2), &int(1), 1, 256).unwrap();
        assert_eq!(b, parse_polynomial("(1 - X^2/4)^2", 1).unwrap());
        let b = bump(&[ratio(1, 2)], &x, &int(2), &ratio(1, 2), 2, 256).unwrap();
        assert_eq!(b, parse_polynomial("(1 - (1/2 - X)^2/8)^4", 1).unwrap());
        assert_eq!(b.eval(&[ratio(1, 2)]).unwrap(), int(1));
        assert!(matches!(bump(&[int(0)], &x, &int(2), &int(1), 65, 256), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn bump_in_t_matches_polynomial_bump() {
        let x = Polynomial::var(1, 0);
        let t0 = ratio(-2, 3);
        let s = ratio(5, 2);
        let direct = bump(std::slice::from_ref(&t0), &x, &s, &default_epsilon(), 3, 256).unwrap();
        let fast = bump_in_t(&t0, &s, &default_epsilon(), 3);
        for xv in [int(0), ratio(1, 7), int(-3)] {
            assert_eq!(direct.eval(&[xv.clone()]).unwrap(), fast.eval(&xv));
        }
    }

    #[test]
    fn single_atom_has_full_mass() {
        let l = from_atomic(&AtomicMeasure::parse("(2/3:1)").unwrap(), 16);
        let m = atom_mass(&l, &[ratio(2, 3)], &MassOptions::new(1, 4)).unwrap();
        assert!((m.value - 1.0).abs() < 1e-6);
        assert!(m.bounds.iter().all(|b| (b.1 - 1.0).abs() < 1e-12));
    }

    #[test]
    fn two_atom_masses_are_exact() {
        let l = from_atomic(&AtomicMeasure::parse("(-1:3/4),(1/2:1/4)").unwrap(), 128);
        let opts = MassOptions::new(2, 64);
        let a = atom_mass(&l, &[int(-1)], &opts).unwrap();
        assert_eq!(a.value_exact, "3/4");
        let b = atom_mass(&l, &[ratio(1, 2)], &opts).unwrap();
        assert_eq!(b.value_exact, "1/4");
        let z = atom_mass(&l, &[int(0)], &opts).unwrap();
        assert_eq!(z.value, 0.0);
        for est in [&a, &b, &z] {
            assert!(est.bounds.windows(2).all(|w| w[1].1 <= w[0].1));
        }
    }

    #[test]
    fn uniform_endpoint_has_small_mass() {
        let l = from_closed_form(&Family::UniformUnitInterval, 128);
        let m = atom_mass(&l, &[int(1)], &MassOptions::new(2, 64)).unwrap();
        assert!(m.value < 0.05, "{}", m.value);
        assert!(m.bounds.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn gaussian_is_refused() {
        let l = from_closed_form(&Family::StandardGaussian, 64);
        assert!(matches!(atom_mass(&l, &[int(0)], &MassOptions::new(2, 8)), Err(Error::GrowthDiverging { .. })));
    }

    #[test]
    fn bivariate_atoms_sharing_a_coordinate() {
        let mu = AtomicMeasure::parse("(1/2,1/2:1/3),(1/2,-1/2:2/3)").unwrap();
        let l = from_atomic(&mu, 24);
        let m = atom_mass(&l, &[ratio(1, 2), ratio(-1, 2)], &MassOptions::new(1, 8)).unwrap();
        assert!((m.value - 2.0 / 3.0).abs() < 1e-9, "{}", m.value);
        assert!(m.value >= 2.0 / 3.0 - 1e-12);
    }

    #[test]
    fn separating_form_is_deterministic() {
        let pts = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        let a = separating_form(2, &pts, 7).unwrap();
        let b = separating_form(2, &pts, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.eval(&pts[0]).unwrap(), a.eval(&pts[1]).unwrap());
    }
}
