//! Seeded synthetic measures and polynomials for validation runs.

use rand::Rng;

use crate::moments::{Atom, AtomicMeasure};
use crate::poly::{monomials_up_to, Polynomial};
use crate::rational::Rational;

/// Random measure on the line: `1..=max_atoms` atoms on the grid `k/20` in
/// `[-2, 2]`, pairwise at least `1/10` apart, weights at least `1/20`.
pub fn random_univariate<R: Rng>(rng: &mut R, max_atoms: usize) -> AtomicMeasure {
    let n = rng.random_range(1..=max_atoms.max(1));
    let mut ks: Vec<i64> = Vec::with_capacity(n);
    while ks.len() < n {
        let k = rng.random_range(-40..=40);
        if ks.iter().all(|&j| (j - k).abs() >= 2) {
            ks.push(k);
        }
    }
    let raw = loop {
        let raw: Vec<i64> = (0..n).map(|_| rng.random_range(1..=20)).collect();
        let total: i64 = raw.iter().sum();
        if raw.iter().all(|&w| 20 * w >= total) {
            break raw;
        }
    };
    let total: i64 = raw.iter().sum();
    let atoms = ks
        .iter()
        .zip(&raw)
        .map(|(&k, &w)| Atom {
            point: vec![Rational::new(k.into(), 20.into())],
            weight: Rational::new(w.into(), total.into()),
        })
        .collect();
    AtomicMeasure::new(1, atoms).expect("valid by construction")
}

/// Random polynomial of degree at most `degree` with coefficients `k/4`,
/// `k` in `[-4, 4]`.
pub fn random_polynomial<R: Rng>(rng: &mut R, num_vars: usize, degree: usize) -> Polynomial {
    let terms = monomials_up_to(num_vars, degree).into_iter().map(|e| {
        let k: i64 = rng.random_range(-4..=4);
        (e.entries().to_vec(), Rational::new(k.into(), 4.into()))
    });
    Polynomial::from_terms(num_vars, terms).expect("matching dimension")
}
