//! Independent atom recovery, used to cross-check the mass and support
//! machinery.
//!
//! `prony_recover` reads atoms off the kernel of a flat Hankel matrix.
//! `grid_scan` covers the support box with cells, discards every cell whose
//! mass is provably below a floor, refines the rest and clusters the
//! survivors.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{growth_profile, GrowthThresholds, GrowthVerdict};
use crate::linalg::{solve_rational, RationalMatrix};
use crate::mass::{separating_form, FormBounds};
use crate::moments::{AtomicMeasure, MomentSequence};
use crate::poly::{monomials_up_to, Exponent, Polynomial};
use crate::rational::{from_f64, pow, round_up, to_f64, Rational};
use crate::support::{rank_scan, SupportBox};
use crate::univariate::UPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryMethod {
    Prony1D,
    GridScan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredAtom {
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub method: RecoveryMethod,
    pub atoms: Vec<RecoveredAtom>,
    /// Largest absolute moment mismatch up to degree `2N`.
    pub residual: f64,
}

const SEPARATION: f64 = 1e-8;

fn residual(l: &MomentSequence, atoms: &[RecoveredAtom], max_degree: usize) -> f64 {
    let t = max_degree.min(l.max_degree());
    let mut worst: f64 = 0.0;
    for e in monomials_up_to(l.num_vars(), t) {
        let model: f64 = atoms
            .iter()
            .map(|a| a.weight * a.point.iter().zip(e.entries()).map(|(x, &k)| x.powi(k as i32)).product::<f64>())
            .sum();
        let truth = l.value(&e).map_or(0.0, to_f64);
        worst = worst.max((model - truth).abs());
    }
    worst
}

fn renormalize(atoms: &mut [RecoveredAtom]) {
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    if (total - 1.0).abs() <= 1e-6 {
        for a in atoms {
            a.weight /= total;
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Real roots of the monic polynomial `x^n + Σ c_j x^j` (`coeffs = c`).
fn monic_roots(coeffs: &[f64]) -> Result<Vec<f64>> {
    let n = coeffs.len();
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -coeffs[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let scale = 1.0 + coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut full = coeffs.to_vec();
    full.push(1.0);
    let mut roots = Vec::with_capacity(n);
    for z in companion.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-6 * scale {
            return Err(Error::IllConditioned(format!("complex root {z}")));
        }
        let mut x = z.re;
        for _ in 0..8 {
            let (p, dp) = horner(&full, x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        roots.push(x);
    }
    roots.sort_by(f64::total_cmp);
    if roots.windows(2).any(|w| w[1] - w[0] < SEPARATION) {
        return Err(Error::IllConditioned("roots closer than 1e-8".into()));
    }
    Ok(roots)
}

/// Hankel-kernel recovery of a finitely atomic measure on the line.
pub fn prony_recover(l: &MomentSequence) -> Result<RecoveryResult> {
    let m = l.univariate_values()?;
    let (ranks, flat) = rank_scan(l, usize::MAX)?;
    let Some(t) = flat else {
        return Err(Error::RankUnstable { max_degree: l.max_degree() });
    };
    let n = ranks[t];
    if n == 0 {
        return Err(Error::RankUnstable { max_degree: l.max_degree() });
    }
    let hankel = RationalMatrix::from_fn(n, n, |i, j| m[i + j].clone());
    let rhs: Vec<Rational> = (0..n).map(|i| -m[i + n].clone()).collect();
    let c = solve_rational(&hankel, &rhs).ok_or_else(|| Error::IllConditioned("singular Hankel block".into()))?;
    let roots = monic_roots(&c.iter().map(to_f64).collect::<Vec<_>>())?;

    let rows = (2 * n).min(m.len());
    let v = DMatrix::from_fn(rows, n, |k, j| roots[j].powi(k as i32));
    let b = DVector::from_iterator(rows, m[..rows].iter().map(to_f64));
    let w = v
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    if let Some(bad) = w.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::IllConditioned(format!("nonpositive weight {bad}")));
    }
    let mut atoms: Vec<RecoveredAtom> = roots
        .iter()
        .zip(w.iter())
        .map(|(&x, &weight)| RecoveredAtom { point: vec![x], weight })
        .collect();
    renormalize(&mut atoms);
    Ok(RecoveryResult { method: RecoveryMethod::Prony1D, residual: residual(l, &atoms, 2 * n), atoms })
}

#[derive(Clone, Debug)]
pub struct GridOptions {
    pub seed: u64,
    /// Cells are refined until every half-width is at most this.
    pub leaf_half_width: f64,
    /// Cap on the number of cell evaluations.
    pub max_cells: usize,
    pub thresholds: GrowthThresholds,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            seed: 0,
            leaf_half_width: 1e-9,
            max_cells: 5_000,
            thresholds: GrowthThresholds::default(),
        }
    }
}

/// One linear form with its cached bounds.
struct CellForm {
    coeffs: Vec<Rational>,
    fb: FormBounds,
    /// `π_N` and `L(π_N^(2^d))` when the pushforward is finitely atomic.
    annihilator: Option<(UPoly, Rational)>,
    kernel_degree: Option<usize>,
    bump_level: usize,
}

impl CellForm {
    fn new(l: &MomentSequence, form: &Polynomial, d: u32) -> Result<Self> {
        let coeffs = (0..l.num_vars()).map(|i| form.coefficient(&Exponent::unit(l.num_vars(), i))).collect();
        let fb = FormBounds::new(l, form)?;
        let max_power = fb.pushforward().max_power();
        let annihilator = fb.annihilator(max_power >> d).and_then(|q| {
            let num = fb.pushforward().apply(&q.pow2(d)).ok()?;
            Some((q, num))
        });
        let count = fb.pushforward().system().positive_count();
        let kernel_degree = (count > 0).then(|| (count - 1).min(max_power >> d));
        let bump_level = fb.max_level(d);
        Ok(CellForm { coeffs, fb, annihilator, kernel_degree, bump_level })
    }

    /// Upper bound on the mass of the cell, `None` when nothing applies.
    fn cell_bound(&self, center: &[Rational], half: &[Rational], d: u32) -> Option<Rational> {
        let mut c = Rational::zero();
        let mut r = Rational::zero();
        for ((a, x), h) in self.coeffs.iter().zip(center).zip(half) {
            c += a * x;
            r += a.abs() * h;
        }
        if let Some((q, num)) = &self.annihilator {
            let low = q.abs_lower_bound(&c, &r);
            if !low.is_zero() {
                return Some(num / pow(&low, 1 << d));
            }
        }
        let mut best: Option<Rational> = None;
        let mut consider = |v: Option<Rational>| {
            if let Some(v) = v {
                if best.as_ref().is_none_or(|b| &v < b) {
                    best = Some(v);
                }
            }
        };
        if let Some(k) = self.kernel_degree {
            if let Some(q) = self.fb.kernel(&c, k) {
                consider(self.fb.interval_ratio(&q, &c, &r, d));
            }
        }
        if self.bump_level > 0 {
            consider(self.fb.interval_ratio(&self.fb.bump(&c, self.bump_level), &c, &r, d));
        }
        best
    }
}

struct Cell {
    center: Vec<Rational>,
    bound: f64,
}

fn adjacent(a: &Cell, b: &Cell, half: &[Rational]) -> bool {
    a.center
        .iter()
        .zip(&b.center)
        .zip(half)
        .all(|((x, y), h)| (x - y).abs() <= h * Rational::from_integer(2.into()))
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

/// Locates every point of mass at least `mass_floor` inside `support`.
///
/// The box is split into `resolution` cells per axis around the grid
/// nodes. A cell is dropped once some exact upper bound on its mass falls
/// below the floor; survivors are halved until they reach the leaf width.
/// Adjacent leaves form one atom, placed at their bound-weighted mean with
/// the largest leaf bound as its mass.
pub fn grid_scan(
    l: &MomentSequence,
    support: &SupportBox,
    resolution: usize,
    d: u32,
    mass_floor: f64,
    opts: &GridOptions,
) -> Result<RecoveryResult> {
    let m = l.num_vars();
    if support.intervals.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: support.intervals.len() });
    }
    if resolution < 2 {
        return Err(Error::Invalid("resolution must be at least 2".into()));
    }
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    for i in 0..m {
        let p = growth_profile(l, &Polynomial::var(m, i), &opts.thresholds)?;
        if p.verdict == GrowthVerdict::Diverging {
            return Err(Error::GrowthDiverging { what: format!("X{}", i + 1) });
        }
    }
    let mut forms: Vec<Polynomial> = (0..m).map(|i| Polynomial::var(m, i)).collect();
    if m > 1 {
        forms.extend(separating_form(m, &[], opts.seed));
    }
    let forms = forms.iter().map(|f| CellForm::new(l, f, d)).collect::<Result<Vec<_>>>()?;
    let floor = from_f64(mass_floor);
    let leaf = from_f64(opts.leaf_half_width);
    let two = Rational::from_integer(2.into());

    let mut half = Vec::with_capacity(m);
    let mut axes = Vec::with_capacity(m);
    for &(lo, hi) in &support.intervals {
        // Outward to a coarse dyadic grid keeps cell centres short.
        let (lo, hi) = (-round_up(-lo, 1 << 16), round_up(hi, 1 << 16));
        let step = (&hi - &lo) / Rational::from_integer((resolution - 1).into());
        let h = if step.is_positive() { &step / &two } else { leaf.clone() };
        axes.push((0..resolution).map(|k| &lo + &step * Rational::from_integer(k.into())).collect::<Vec<_>>());
        half.push(h);
    }
    let mut cells: Vec<Vec<Rational>> = vec![Vec::new()];
    for axis in &axes {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                axis.iter().map(move |x| {
                    let mut c = c.clone();
                    c.push(x.clone());
                    c
                })
            })
            .collect();
    }

    let mut evaluated = 0usize;
    let leaves: Vec<Cell>;
    loop {
        let mut survivors = Vec::new();
        for center in cells {
            evaluated += 1;
            if evaluated > opts.max_cells {
                return Err(Error::BudgetExceeded { degree: evaluated, budget: opts.max_cells });
            }
            let mut bound = Rational::one();
            for f in &forms {
                if let Some(b) = f.cell_bound(&center, &half, d) {
                    if b < bound {
                        bound = b;
                    }
                }
            }
            if bound >= floor {
                survivors.push(Cell { center, bound: to_f64(&bound) });
            }
        }
        if half.iter().all(|h| h <= &leaf) || survivors.is_empty() {
            leaves = survivors;
            break;
        }
        let split: Vec<bool> = half.iter().map(|h| h > &leaf).collect();
        for (h, s) in half.iter_mut().zip(&split) {
            if *s {
                *h = &*h / &two;
            }
        }
        cells = Vec::new();
        for cell in survivors {
            let mut children = vec![cell.center];
            for (i, s) in split.iter().enumerate() {
                if !s {
                    continue;
                }
                children = children
                    .into_iter()
                    .flat_map(|c| {
                        [-1i64, 1].map(|sign| {
                            let mut c = c.clone();
                            c[i] += &half[i] * Rational::from_integer(sign.into());
                            c
                        })
                    })
                    .collect();
            }
            cells.extend(children);
        }
    }

    let mut parent: Vec<usize> = (0..leaves.len()).collect();
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            if adjacent(&leaves[i], &leaves[j], &half) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut atoms = Vec::new();
    for root in 0..leaves.len() {
        if find(&mut parent, root) != root {
            continue;
        }
        let members: Vec<&Cell> = (0..leaves.len())
            .filter(|&i| find(&mut parent, i) == root)
            .map(|i| &leaves[i])
            .collect();
        let total: f64 = members.iter().map(|c| c.bound).sum();
        let point = (0..m)
            .map(|k| members.iter().map(|c| c.bound * to_f64(&c.center[k])).sum::<f64>() / total)
            .collect();
        let weight = members.iter().map(|c| c.bound).fold(0.0, f64::max);
        atoms.push(RecoveredAtom { point, weight });
    }
    renormalize(&mut atoms);
    let reach = 2 * atoms.len().max(1);
    Ok(RecoveryResult { method: RecoveryMethod::GridScan, residual: residual(l, &atoms, reach), atoms })
}

fn augment(i: usize, edges: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
    for &j in &edges[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if owner[j].is_none_or(|k| augment(k, edges, seen, owner)) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}

/// True when the atoms of `truth` and `recovered` pair up one to one within
/// `loc_tol` (max-norm) and `mass_tol`.
pub fn compare(truth: &AtomicMeasure, recovered: &RecoveryResult, loc_tol: f64, mass_tol: f64) -> bool {
    let t = truth.atoms();
    let r = &recovered.atoms;
    if t.len() != r.len() {
        return false;
    }
    let edges: Vec<Vec<usize>> = t
        .iter()
        .map(|a| {
            (0..r.len())
                .filter(|&j| {
                    r[j].point.len() == a.point.len()
                        && a.point.iter().zip(&r[j].point).all(|(x, y)| (to_f64(x) - y).abs() <= loc_tol)
                        && (to_f64(&a.weight) - r[j].weight).abs() <= mass_tol
                })
                .collect()
        })
        .collect();
    let mut owner = vec![None; r.len()];
    (0..t.len()).all(|i| augment(i, &edges, &mut vec![false; r.len()], &mut owner))
}
