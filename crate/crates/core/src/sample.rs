//! Seeded random classes and correspondences with small rational entries,
//! for fuzzing algebraic identities.

use std::sync::Arc;

use num_traits::Zero;
use rand::Rng;

use crate::chowring::{ChowDatum, Class};
use crate::correspond::Correspondence;
use crate::exactlin::{rat, RatMatrix, Rational};

/// Numerator in `-3..=3`, denominator in `1..=3`.
pub fn small_rational<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    rat(rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

/// Like [`small_rational`] but zero with probability `1 - density`.
fn sparse_rational<R: Rng + ?Sized>(rng: &mut R, density: f64) -> Rational {
    if rng.gen_bool(density) {
        small_rational(rng)
    } else {
        Rational::zero()
    }
}

pub fn random_class<R: Rng + ?Sized>(rng: &mut R, datum: &Arc<ChowDatum>, codim: usize) -> Class {
    let coeffs = (0..datum.rank(codim)).map(|_| small_rational(rng)).collect();
    Class::new(datum, codim, coeffs).expect("length matches rank")
}

/// Random correspondence of total codimension `codim`; each coefficient is
/// nonzero with probability `density`.
pub fn random_correspondence<R: Rng + ?Sized>(
    rng: &mut R,
    source: &Arc<ChowDatum>,
    target: &Arc<ChowDatum>,
    codim: usize,
    density: f64,
) -> Correspondence {
    let blocks = (0..=codim)
        .map(|i| {
            RatMatrix::from_fn(source.rank(i), target.rank(codim - i), |_, _| {
                sparse_rational(rng, density)
            })
        })
        .collect();
    Correspondence::new(source, target, codim, blocks).expect("shapes match ranks")
}

/// Random `u × v` with `u ∈ CH^i(source)` and `v ∈ CH^j(target)`.
pub fn random_product_cycle<R: Rng + ?Sized>(
    rng: &mut R,
    source: &Arc<ChowDatum>,
    target: &Arc<ChowDatum>,
    i: usize,
    j: usize,
) -> Correspondence {
    Correspondence::product_cycle(&random_class(rng, source, i), &random_class(rng, target, j))
}

/// Random linear combination of the given correspondences.
pub fn random_combination<R: Rng + ?Sized>(rng: &mut R, items: &[Correspondence]) -> Correspondence {
    let first = items.first().expect("nonempty list");
    items.iter().fold(
        Correspondence::zero(first.source(), first.target(), first.codim()),
        |acc, c| acc.add(&c.scale(&small_rational(rng))).expect("compatible items"),
    )
}
