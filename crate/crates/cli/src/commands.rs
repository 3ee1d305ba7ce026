use std::fmt;

use moment_core::fixtures::random_polynomial;
use moment_core::growth::{
    growth_profile, kernel_check, roots_monotone, seminorm_props, to_csv, GrowthProfile, GrowthThresholds,
};
use moment_core::linalg::{psd_check, DEFAULT_PSD_TOLERANCE};
use moment_core::mass::{atom_mass, MassOptions};
use moment_core::moments::{from_atomic, from_closed_form, AtomicMeasure, Family};
use moment_core::oracle::{grid_scan, prony_recover, GridOptions, RecoveryResult};
use moment_core::poly::{monomials_up_to, parse_polynomial};
use moment_core::pushforward::{power_moments, OrthogonalSystem};
use moment_core::rational::{from_f64, parse_rational, ratio};
use moment_core::support::{finite_support_check, support_box, FiniteOptions};
use moment_core::univariate::UPoly;
use moment_core::{Error, MomentSequence, Polynomial, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::io::{read_moments, write_output};
use crate::{Command, Common, Format, Method, ThresholdArgs};

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Usage(String),
    Io(String),
}

impl Failure {
    pub fn io(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }

    /// 2 for malformed input, 3 for an analysis refusal, 4 for an exhausted
    /// budget.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::GrowthDiverging { .. } | Error::RankUnstable { .. } | Error::IllConditioned(_)) => 3,
            Failure::Core(Error::BudgetExceeded { .. }) => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Usage(s) => write!(f, "invalid arguments: {s}"),
            Failure::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Run<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Run<T> {
    Err(Failure::Usage(msg.into()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn emit<T: Serialize>(common: &Common, value: &T, csv: Option<String>) -> Run<()> {
    let text = match (common.format, csv) {
        (Format::Json, _) => to_json(value),
        (Format::Csv, Some(c)) => c,
        (Format::Csv, None) => return usage("csv output is not available for this command"),
    };
    write_output(&common.output, &text)
}

fn thresholds(t: &ThresholdArgs) -> Run<GrowthThresholds> {
    if !(t.increment_tol > 0.0 && t.contraction_ratio > 0.0 && t.contraction_ratio < 1.0 && t.divergence_slope > 0.0) {
        return usage("thresholds must be positive and the contraction ratio below 1");
    }
    Ok(GrowthThresholds {
        increment_tol: t.increment_tol,
        contraction_ratio: t.contraction_ratio,
        divergence_slope: t.divergence_slope,
    })
}

fn parse_point(text: &str, num_vars: usize) -> Run<Vec<Rational>> {
    let point = text.split(',').map(|s| parse_rational(s.trim())).collect::<Result<Vec<_>, _>>()?;
    if point.len() != num_vars {
        return Err(Error::DimensionMismatch { expected: num_vars, found: point.len() }.into());
    }
    Ok(point)
}

fn check_d(d: u32) -> Run<()> {
    if d == 0 || d > 16 {
        return usage("d must lie in 1..=16");
    }
    Ok(())
}

pub fn run(command: Command) -> Run<u8> {
    match command {
        Command::Gen { atoms, family, degree, common } => {
            let l = match (atoms, family) {
                (Some(a), _) => from_atomic(&AtomicMeasure::parse(&a)?, degree),
                (None, Some(f)) => from_closed_form(&f.parse::<Family>()?, degree),
                (None, None) => return usage("one of --atoms or --family is required"),
            };
            if common.format == Format::Csv {
                return usage("gen writes moment JSON only");
            }
            write_output(&common.output, &l.to_json_string())?;
            Ok(0)
        }
        Command::Check { input, common } => {
            let l = read_moments(&input.input)?;
            let report = check_report(&l, common.seed)?;
            let code = if report.all_pass { 0 } else { 1 };
            emit(&common, &report, None)?;
            Ok(code)
        }
        Command::Growth { input, poly, thresholds: t, common } => {
            let l = read_moments(&input.input)?;
            let a = parse_polynomial(&poly, l.num_vars())?;
            let p = growth_profile(&l, &a, &thresholds(&t)?)?;
            let csv = to_csv(&p.ladder);
            emit(&common, &p, Some(csv))?;
            Ok(0)
        }
        Command::Box { input, slack, thresholds: t, common } => {
            if !(slack >= 0.0) {
                return usage("slack must be nonnegative");
            }
            let l = read_moments(&input.input)?;
            let b = support_box(&l, slack, &thresholds(&t)?)?;
            emit(&common, &b, None)?;
            Ok(0)
        }
        Command::Mass { input, alpha, d, budget, candidate, common } => {
            check_d(d)?;
            let l = read_moments(&input.input)?;
            let alpha = parse_point(&alpha, l.num_vars())?;
            let mut opts = MassOptions::new(d, budget);
            opts.seed = common.seed;
            opts.candidates = candidate.iter().map(|c| parse_point(c, l.num_vars())).collect::<Run<_>>()?;
            let m = atom_mass(&l, &alpha, &opts)?;
            let csv = to_csv(&m.bounds);
            emit(&common, &m, Some(csv))?;
            Ok(0)
        }
        Command::Finite { input, d, candidate, common } => {
            check_d(d)?;
            let l = read_moments(&input.input)?;
            let candidates = candidate.iter().map(|c| parse_point(c, l.num_vars())).collect::<Run<Vec<_>>>()?;
            let mut opts = FiniteOptions::new(d);
            opts.mass.seed = common.seed;
            let samples: Vec<Polynomial> = (0..l.num_vars()).map(|i| Polynomial::var(l.num_vars(), i)).collect();
            let r = finite_support_check(&l, &samples, &candidates, &opts)?;
            emit(&common, &r, None)?;
            Ok(0)
        }
        Command::Recover { input, method, resolution, d, floor, slack, max_cells, common } => {
            let l = read_moments(&input.input)?;
            let r = match method {
                Method::Prony => prony_recover(&l)?,
                Method::Grid => {
                    check_d(d)?;
                    if resolution < 2 || !(floor > 0.0 && floor <= 1.0) || !(slack >= 0.0) {
                        return usage("need resolution >= 2, floor in (0, 1] and slack >= 0");
                    }
                    let b = support_box(&l, slack, &GrowthThresholds::default())?;
                    let opts = GridOptions { seed: common.seed, max_cells, ..GridOptions::default() };
                    grid_scan(&l, &b, resolution, d, floor, &opts)?
                }
            };
            emit(&common, &r, None)?;
            Ok(0)
        }
        Command::Report { input, common } => {
            let l = read_moments(&input.input)?;
            let report = full_report(&l, common.seed)?;
            emit(&common, &report, None)?;
            Ok(0)
        }
    }
}

#[derive(Serialize)]
pub struct CheckItem {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
pub struct CheckReport {
    num_vars: usize,
    max_degree: usize,
    checks: Vec<CheckItem>,
    growth: Vec<Value>,
    all_pass: bool,
}

/// Violations of positivity surface as a failed check; anything else is a
/// real error.
fn battery(name: &str, f: impl FnOnce() -> Result<(bool, String), Error>) -> Run<CheckItem> {
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e @ (Error::NotPositive(_) | Error::NegativePower { .. })) => (false, e.to_string()),
        Err(e) => return Err(e.into()),
    };
    Ok(CheckItem { name: name.into(), passed, detail })
}

fn check_report(l: &MomentSequence, seed: u64) -> Run<CheckReport> {
    let m = l.num_vars();
    let dmax = l.max_degree();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<Polynomial> = (0..m).map(|i| Polynomial::var(m, i)).collect();
    let mut checks = Vec::new();

    let mut t = dmax / 2;
    while monomials_up_to(m, t).len() > 400 {
        t -= 1;
    }
    checks.push(battery("moment-matrix-psd", || {
        let r = psd_check(&l.moment_matrix(t)?, DEFAULT_PSD_TOLERANCE)?;
        Ok((r.passes(), format!("order {t}: {:?}, min eigenvalue {:e}", r.verdict, r.min_eigenvalue)))
    })?);

    let deg = (dmax / 2).min(3);
    let pairs: Vec<(Polynomial, Polynomial)> =
        (0..100).map(|_| (random_polynomial(&mut rng, m, deg), random_polynomial(&mut rng, m, deg))).collect();
    checks.push(battery("cauchy-schwarz", || {
        let mut bad = 0;
        for (a, b) in &pairs {
            if !l.cbs_check(a, b)? {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{bad} of {} pairs of degree <= {deg} violate it", pairs.len())))
    })?);

    checks.push(battery("root-monotonicity", || {
        let mut bad = Vec::new();
        for x in &coords {
            if !roots_monotone(l, x)? {
                bad.push(x.to_string());
            }
        }
        Ok((bad.is_empty(), if bad.is_empty() { "r_n nondecreasing for every coordinate".into() } else { bad.join("; ") }))
    })?);

    let mut kernel_polys = coords.clone();
    kernel_polys.extend((0..5).map(|_| random_polynomial(&mut rng, m, 1)));
    checks.push(battery("seminorm-kernel", || {
        let d = usize::BITS - 1 - dmax.max(2).leading_zeros();
        let mut bad = Vec::new();
        for a in &kernel_polys {
            if !kernel_check(l, a, d)? {
                bad.push(a.to_string());
            }
        }
        Ok((bad.is_empty(), format!("p_1 and p_{d} share zeros on {} polynomials", kernel_polys.len() - bad.len())))
    })?);

    let samples: Vec<(Polynomial, Polynomial, Rational)> = (1..=10)
        .map(|k| (random_polynomial(&mut rng, m, 1), random_polynomial(&mut rng, m, 1), ratio(k - 5, 3)))
        .collect();
    checks.push(battery("seminorm-properties", || {
        if dmax < 4 {
            return Ok((true, "skipped: needs degree 4".into()));
        }
        let d = (usize::BITS - 1 - dmax.leading_zeros() - 1).min(4);
        let r = seminorm_props(l, d, &samples)?;
        Ok((r.all_hold, format!("triangle, homogeneity and cross-submultiplicativity at d = {d}")))
    })?);

    let th = GrowthThresholds::default();
    let growth = coords
        .iter()
        .map(|x| match growth_profile(l, x, &th) {
            Ok(p) => json!({"poly": p.poly, "verdict": p.verdict, "p_l_estimate": p.p_l_estimate}),
            Err(e) => json!({"poly": x.to_string(), "error": e.to_string()}),
        })
        .collect();
    let all_pass = checks.iter().all(|c| c.passed);
    Ok(CheckReport { num_vars: m, max_degree: dmax, checks, growth, all_pass })
}

fn section<T: Serialize>(r: Result<T, Error>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).expect("serializable report"),
        Err(e) => json!({"error": e.to_string()}),
    }
}

/// Best rational approximations of `x` by continued fractions.
fn convergents(x: f64) -> Vec<Rational> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if !a.is_finite() || a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let (Some(h2), Some(k2)) = (a.checked_mul(h1).and_then(|p| p.checked_add(h0)), a.checked_mul(k1).and_then(|p| p.checked_add(k0))) else {
            break;
        };
        if k2.abs() > 1 << 40 {
            break;
        }
        out.push(Rational::new(h2.into(), k2.into()));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a as f64;
        if frac.abs() < 1e-300 {
            break;
        }
        v = 1.0 / frac;
    }
    out
}

/// Snaps a recovered coordinate to an exact root of `annihilator` when a
/// short rational is one; otherwise keeps the float.
fn snap(x: f64, annihilator: Option<&UPoly>) -> Rational {
    if let Some(q) = annihilator {
        for c in convergents(x) {
            if q.sign_at(&c) == 0 {
                return c;
            }
        }
    }
    from_f64(x)
}

fn full_report(l: &MomentSequence, seed: u64) -> Run<Value> {
    let m = l.num_vars();
    let th = GrowthThresholds::default();
    let check = check_report(l, seed)?;
    let growth: Vec<Value> = (0..m)
        .map(|i| section::<GrowthProfile>(growth_profile(l, &Polynomial::var(m, i), &th)))
        .collect();
    let support = support_box(l, 0.05, &th);
    let recovery: Result<RecoveryResult, Error> = if m == 1 {
        prony_recover(l)
    } else {
        support.clone().and_then(|b| {
            let opts = GridOptions { seed, ..GridOptions::default() };
            grid_scan(l, &b, 21, 2, 0.05, &opts)
        })
    };

    let annihilators: Vec<Option<UPoly>> = (0..m)
        .map(|i| {
            let mu = power_moments(l, &Polynomial::var(m, i), None).ok()?;
            let sys = OrthogonalSystem::new(&mu).ok()?;
            let n = sys.annihilator_degree()?;
            Some(UPoly::from_rationals(sys.poly(n)))
        })
        .collect();
    let atoms: Vec<Vec<Rational>> = match &recovery {
        Ok(r) => r
            .atoms
            .iter()
            .map(|a| a.point.iter().zip(&annihilators).map(|(&x, q)| snap(x, q.as_ref())).collect())
            .collect(),
        Err(_) => Vec::new(),
    };
    let mut mass_opts = MassOptions::new(2, 64);
    mass_opts.seed = seed;
    mass_opts.candidates = atoms.clone();
    let masses: Vec<Value> = atoms.iter().map(|a| section(atom_mass(l, a, &mass_opts))).collect();
    let mut finite_opts = FiniteOptions::new(2);
    finite_opts.mass.seed = seed;
    let coords: Vec<Polynomial> = (0..m).map(|i| Polynomial::var(m, i)).collect();
    let finite = section(finite_support_check(l, &coords, &atoms, &finite_opts));

    Ok(json!({
        "num_vars": m,
        "max_degree": l.max_degree(),
        "provenance": l.to_json().provenance,
        "check": check,
        "growth": growth,
        "box": section(support),
        "recovery": section(recovery),
        "mass": masses,
        "finite": finite,
    }))
}
