//! A/B splitting on blow-ups. `B₀` below is the span of the doubly
//! exceptional cycles `e_i × e_j`; the full kernel `B` of `(f × f)_*` also
//! contains mixed cycles such as `f^*ℓ × e_1`.

mod common;

use chowkit::blowup::{split_ab, BlowupDatum};
use chowkit::correspond::{corr_pullback, Correspondence};
use chowkit::exactlin::int;
use chowkit::sample::{random_class, random_combination, random_correspondence, small_rational};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use common::{blown_up, rng};

fn stages() -> Vec<BlowupDatum> {
    vec![
        blown_up(2, 1, -1).stages()[0].clone(),
        blown_up(3, 1, -2).stages()[0].clone(),
        blown_up(4, 2, -1).stages()[1].clone(),
    ]
}

fn random_a(r: &mut ChaCha8Rng, b: &BlowupDatum) -> Correspondence {
    let x = b.base();
    corr_pullback(b.morphism(), &random_correspondence(r, x, x, x.dim(), 0.6)).unwrap()
}

fn doubly_exceptional(b: &BlowupDatum) -> Vec<Correspondence> {
    let d = b.dim();
    (1..d)
        .map(|i| {
            Correspondence::product_cycle(&b.exceptional_class(i).unwrap(), &b.exceptional_class(d - i).unwrap())
        })
        .collect()
}

fn random_b0(r: &mut ChaCha8Rng, b: &BlowupDatum) -> Correspondence {
    random_combination(r, &doubly_exceptional(b))
}

/// Random element of the full kernel `B`, mixed terms included.
fn random_b(r: &mut ChaCha8Rng, b: &BlowupDatum) -> Correspondence {
    let y = b.result();
    let d = b.dim();
    let mut out = random_b0(r, b);
    for i in 1..d {
        let e = b.exceptional_class(i).unwrap();
        let left = Correspondence::product_cycle(&e, &random_class(r, y, d - i));
        let right = Correspondence::product_cycle(&random_class(r, y, d - i), &e);
        out = out.add(&left.scale(&small_rational(r))).unwrap();
        out = out.add(&right.scale(&small_rational(r))).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn splitting_is_unique_and_linear(seed in any::<u64>(), which in 0usize..3) {
        let b = &stages()[which];
        let mut r = rng(seed);
        let a = random_a(&mut r, b);
        let beta = random_b(&mut r, b);
        prop_assert!(b.is_in_b(&beta).unwrap());
        let s = split_ab(b, &a.add(&beta).unwrap()).unwrap();
        prop_assert_eq!(&s.a_part, &a);
        prop_assert_eq!(&s.b_part, &beta);
        let again = split_ab(b, &s.a_part).unwrap();
        prop_assert_eq!(&again.a_part, &a);
        prop_assert!(again.b_part.is_zero());

        let y = b.result();
        let g1 = random_correspondence(&mut r, y, y, b.dim(), 0.5);
        let g2 = random_correspondence(&mut r, y, y, b.dim(), 0.5);
        let t = small_rational(&mut r);
        let sum = split_ab(b, &g1.add(&g2.scale(&t)).unwrap()).unwrap();
        let (s1, s2) = (split_ab(b, &g1).unwrap(), split_ab(b, &g2).unwrap());
        prop_assert_eq!(sum.a_part, s1.a_part.add(&s2.a_part.scale(&t)).unwrap());
        prop_assert_eq!(sum.b_part, s1.b_part.add(&s2.b_part.scale(&t)).unwrap());
    }

    #[test]
    fn doubly_exceptional_part_is_orthogonal_to_a(seed in any::<u64>(), which in 0usize..3) {
        let b = &stages()[which];
        let mut r = rng(seed);
        let a = random_a(&mut r, b);
        let beta = random_b0(&mut r, b);
        prop_assert!(a.compose(&beta).unwrap().is_zero());
        prop_assert!(beta.compose(&a).unwrap().is_zero());
    }

    #[test]
    fn a_and_b0_are_subrings_and_composition_splits(seed in any::<u64>(), which in 0usize..3) {
        let b = &stages()[which];
        let mut r = rng(seed);
        let (a1, a2) = (random_a(&mut r, b), random_a(&mut r, b));
        let (b1, b2) = (random_b0(&mut r, b), random_b0(&mut r, b));
        let aa = a1.compose(&a2).unwrap();
        prop_assert!(split_ab(b, &aa).unwrap().b_part.is_zero());
        let bb = b1.compose(&b2).unwrap();
        prop_assert!(b.is_doubly_exceptional(&bb).unwrap());
        let g = a1.add(&b1).unwrap().compose(&a2.add(&b2).unwrap()).unwrap();
        let s = split_ab(b, &g).unwrap();
        prop_assert_eq!(s.a_part, aa);
        prop_assert_eq!(s.b_part, bb);
    }

    #[test]
    fn action_splits_componentwise(seed in any::<u64>(), which in 0usize..3) {
        // (f^*α + β)•(f^*x + y) = f^*(α•x) + β•y for β ∈ B₀ and exceptional y
        let b = &stages()[which];
        let f = b.morphism();
        let x = b.base();
        let d = b.dim();
        let mut r = rng(seed);
        let alpha = random_correspondence(&mut r, x, x, d, 0.6);
        let beta = random_b0(&mut r, b);
        let j = r.gen_range(1..d);
        let xc = random_class(&mut r, x, j);
        let y = b.exceptional_class(j).unwrap().scale(&small_rational(&mut r));
        let total = corr_pullback(f, &alpha).unwrap().add(&beta).unwrap();
        let lhs = total.act(&f.pullback(&xc).unwrap().add(&y).unwrap()).unwrap();
        let rhs = f.pullback(&alpha.act(&xc).unwrap()).unwrap().add(&beta.act(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn mixed_kernel_elements_break_orthogonality_and_closure() {
    let b = &stages()[0];
    let y = b.result();
    let l = chowkit::Class::basis(y, 1, 0);
    let e1 = b.exceptional_class(1).unwrap();
    let le = Correspondence::product_cycle(&l, &e1);
    let el = Correspondence::product_cycle(&e1, &l);
    let ll = Correspondence::product_cycle(&l, &l);
    assert!(b.is_in_b(&le).unwrap() && b.is_in_b(&el).unwrap());
    assert!(split_ab(b, &ll).unwrap().b_part.is_zero());
    // B•A ≠ 0
    assert_eq!(le.compose(&ll).unwrap(), le);
    // B•B leaves B: (e_1 × ℓ)•(ℓ × e_1) = deg(e_1·e_1) ℓ × ℓ
    assert_eq!(el.compose(&le).unwrap(), ll.scale(&int(-1)));
    assert!(!b.is_in_b(&el.compose(&le).unwrap()).unwrap());
}
