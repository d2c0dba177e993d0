#![allow(dead_code)]

use std::sync::Arc;

use chowkit::chowring::{product, projective_space, quotient, ChowDatum, Class, GroupActionDatum, MorphismDatum};
use chowkit::blowup::{blow_up_many, BlowupTower};
use chowkit::exactlin::int;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn lines_squared() -> Arc<ChowDatum> {
    let p1 = projective_space(1);
    product(&p1, &p1).unwrap()
}

/// `q: P^1 × P^1 -> Sym^2 P^1` together with the swap action.
pub fn swap_quotient() -> (GroupActionDatum, MorphismDatum) {
    let action = GroupActionDatum::swap(&lines_squared()).unwrap();
    let (_, q) = quotient(&action).unwrap();
    (action, q)
}

pub fn points(x: &Arc<ChowDatum>, k: usize) -> Vec<Class> {
    vec![x.point_class().unwrap(); k]
}

/// `P^n` blown up at `k` points with multiplier `c`.
pub fn blown_up(n: usize, k: usize, c: i64) -> BlowupTower {
    let x = projective_space(n);
    blow_up_many(&x, &points(&x, k), &int(c)).unwrap()
}
