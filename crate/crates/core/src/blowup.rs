//! Blow-ups of a datum at a rational point, and the transport of
//! Chow–Künneth projectors up and down the blow-down map.
//!
//! On `Y = Bl_a X` with `dim X = d`, the basis of `CH^i(Y)` is the pulled-back
//! basis of `CH^i(X)` followed by one exceptional class `e_i` for
//! `1 <= i <= d-1`. Products follow
//!
//! ```text
//! f^*x · f^*y = f^*(xy)
//! f^*x · e_j  = (codim-0 part of x) e_j
//! e_i · e_j   = c e_{i+j}   (i + j < d)
//! e_i · e_j   = c f^*[a]    (i + j = d)
//! ```
//!
//! where `c` is the exceptional self-intersection multiplier (`-1` for a
//! smooth point).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::chowring::{ensure_same, ChowDatum, Class, DatumParts, KunnethPair, MorphismDatum};
use crate::correspond::{corr_pullback, corr_pushforward, diagonal, CKDecomposition, Correspondence};
use crate::error::{ChowError, Result};
use crate::exactlin::{fmt_rational, int, rat, zero_vec, RatMatrix, Rational};

#[derive(Clone)]
pub struct BlowupDatum {
    base: Arc<ChowDatum>,
    center: Class,
    multiplier: Rational,
    result: Arc<ChowDatum>,
    f: MorphismDatum,
}

impl fmt::Debug for BlowupDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BlowupDatum({} at {}, c = {})",
            self.base.name(),
            self.center,
            fmt_rational(&self.multiplier)
        )
    }
}

/// Smallest `n` such that no label of `x` starts with `e{n}_`.
fn next_stage(x: &ChowDatum) -> usize {
    let used: BTreeSet<usize> = (0..=x.dim())
        .flat_map(|i| x.labels(i).iter())
        .filter_map(|label| {
            let rest = label.strip_prefix('e')?;
            let (n, _) = rest.split_once('_')?;
            n.parse().ok()
        })
        .collect();
    (1..).find(|n| !used.contains(n)).expect("unbounded range")
}

/// Blows up `x` at the zero-cycle `center` (degree one) with exceptional
/// multiplier `c`.
pub fn blow_up(x: &Arc<ChowDatum>, center: &Class, c: &Rational) -> Result<BlowupDatum> {
    let pairs = x.require_kunneth()?;
    let d = x.dim();
    ensure_same(center.datum(), x, "blow-up center")?;
    if d == 0 {
        return Err(ChowError::InvalidCenter("cannot blow up a zero-dimensional datum".into()));
    }
    if center.codim() != d || center.degree() != int(1) {
        return Err(ChowError::InvalidCenter(format!(
            "center {} must be a zero-cycle of degree 1 (codim {}, degree {})",
            center,
            center.codim(),
            fmt_rational(&center.degree())
        )));
    }
    if c.is_zero() {
        return Err(ChowError::DegenerateMultiplier);
    }
    let has_e = |i: usize| i >= 1 && i < d;
    let rank = |i: usize| if i > d { 0 } else { x.rank(i) + usize::from(has_e(i)) };
    let stage = next_stage(x);

    // coefficients on Y of a class pulled back from X
    let pulled = |i: usize, v: &[Rational]| -> Vec<Rational> {
        let mut out = v.to_vec();
        out.resize(rank(i), Rational::zero());
        out
    };
    let e = |i: usize| -> Vec<Rational> {
        let mut out = zero_vec(rank(i));
        out[x.rank(i)] = int(1);
        out
    };

    let labels = (0..=d)
        .map(|i| {
            let mut v = x.labels(i).to_vec();
            if has_e(i) {
                v.push(format!("e{stage}_{i}"));
            }
            v
        })
        .collect();
    let mult = (0..=d)
        .map(|i| {
            (0..=d)
                .map(|j| {
                    let k = i + j;
                    let mut rows = Vec::with_capacity(rank(i) * rank(j));
                    for a in 0..rank(i) {
                        for b in 0..rank(j) {
                            let ea = a == x.rank(i);
                            let eb = b == x.rank(j);
                            let row = if k > d {
                                Vec::new()
                            } else {
                                match (ea, eb) {
                                    (false, false) => pulled(k, x.basis_product(i, a, j, b)),
                                    (false, true) if i == 0 => e(j),
                                    (true, false) if j == 0 => e(i),
                                    (false, true) | (true, false) => zero_vec(rank(k)),
                                    (true, true) if k < d => e(k).into_iter().map(|q| q * c).collect(),
                                    (true, true) => pulled(d, center.coeffs()).into_iter().map(|q| q * c).collect(),
                                }
                            };
                            rows.push(row);
                        }
                    }
                    RatMatrix::from_rows(rows, rank(k)).expect("consistent widths")
                })
                .collect()
        })
        .collect();
    let mut kunneth: Vec<KunnethPair> = pairs
        .iter()
        .map(|p| KunnethPair {
            codim: p.codim,
            left: pulled(p.codim, &p.left),
            right: pulled(d - p.codim, &p.right),
        })
        .collect();
    for i in 1..d {
        kunneth.push(KunnethPair {
            codim: i,
            left: e(i).into_iter().map(|q| q / c).collect(),
            right: e(d - i),
        });
    }
    let result = ChowDatum::new(DatumParts {
        name: format!("Bl({})", x.name()),
        labels,
        mult,
        degree: x.degree_functional().to_vec(),
        kunneth: Some(kunneth),
        cellular: x.is_cellular(),
    })?;
    let pullback = (0..=d)
        .map(|i| RatMatrix::from_fn(rank(i), x.rank(i), |r, s| if r == s { int(1) } else { int(0) }))
        .collect();
    let pushforward = (0..=d)
        .map(|i| RatMatrix::from_fn(x.rank(i), rank(i), |r, s| if r == s { int(1) } else { int(0) }))
        .collect();
    let f = MorphismDatum::new(&result, x, pullback, pushforward, int(1))?;
    Ok(BlowupDatum {
        base: x.clone(),
        center: center.clone(),
        multiplier: c.clone(),
        result,
        f,
    })
}

impl BlowupDatum {
    pub fn base(&self) -> &Arc<ChowDatum> {
        &self.base
    }

    pub fn center(&self) -> &Class {
        &self.center
    }

    pub fn multiplier(&self) -> &Rational {
        &self.multiplier
    }

    pub fn result(&self) -> &Arc<ChowDatum> {
        &self.result
    }

    /// The blow-down map `f: Y -> X`.
    pub fn morphism(&self) -> &MorphismDatum {
        &self.f
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Index of `e_i` in the basis of `CH^i(Y)`, when it exists.
    pub fn exceptional_index(&self, i: usize) -> Option<usize> {
        (i >= 1 && i < self.dim()).then(|| self.base.rank(i))
    }

    pub fn is_exceptional(&self, codim: usize, idx: usize) -> bool {
        self.exceptional_index(codim) == Some(idx)
    }

    /// The class `e_i`, `1 <= i <= d-1`.
    pub fn exceptional_class(&self, i: usize) -> Option<Class> {
        self.exceptional_index(i).map(|idx| Class::basis(&self.result, i, idx))
    }

    fn check_on_result(&self, gamma: &Correspondence, what: &str) -> Result<()> {
        ensure_same(gamma.source(), &self.result, what)?;
        ensure_same(gamma.target(), &self.result, what)
    }

    /// True when `(f × f)_* γ = 0`.
    pub fn is_in_b(&self, gamma: &Correspondence) -> Result<bool> {
        self.check_on_result(gamma, "membership in B")?;
        Ok(corr_pushforward(&self.f, gamma)?.is_zero())
    }

    /// True when every product-cycle term of `γ` is `e_i × e_j`.
    pub fn is_doubly_exceptional(&self, gamma: &Correspondence) -> Result<bool> {
        self.check_on_result(gamma, "exceptional support")?;
        let c = gamma.codim();
        Ok(gamma
            .terms()
            .all(|(i, a, b, _)| self.is_exceptional(i, a) && self.is_exceptional(c - i, b)))
    }
}

/// `γ = a_part + b_part` with `a_part = (f × f)^*(f × f)_* γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ABSplit {
    pub a_part: Correspondence,
    pub b_part: Correspondence,
}

pub fn split_ab(b: &BlowupDatum, gamma: &Correspondence) -> Result<ABSplit> {
    b.check_on_result(gamma, "A/B splitting")?;
    let a_part = corr_pullback(&b.f, &corr_pushforward(&b.f, gamma)?)?;
    let b_part = gamma.sub(&a_part)?;
    Ok(ABSplit { a_part, b_part })
}

/// Classes on `E × Y` and `Y × E`, stored on `Y × Y` with exceptional left
/// (respectively right) factors.
#[derive(Clone, Debug, PartialEq)]
pub struct TauPair {
    pub tau1: Correspondence,
    pub tau2: Correspondence,
}

impl TauPair {
    /// The class `(j × 1)_* τ_1 + (1 × j)_* τ_2` on `Y × Y`.
    pub fn reconstruct(&self) -> Result<Correspondence> {
        self.tau1.add(&self.tau2)
    }

    /// Moves a doubly exceptional `κ` from one side to the other:
    /// `(τ_1 + κ, τ_2 - κ)`. The reconstructed class is unchanged.
    pub fn shift(&self, b: &BlowupDatum, kappa: &Correspondence) -> Result<TauPair> {
        if !b.is_doubly_exceptional(kappa)? {
            return Err(ChowError::InconsistentTau(format!(
                "shift {kappa} has a non-exceptional factor"
            )));
        }
        Ok(TauPair {
            tau1: self.tau1.add(kappa)?,
            tau2: self.tau2.sub(kappa)?,
        })
    }

    fn check_support(&self, b: &BlowupDatum) -> Result<()> {
        let c = self.tau1.codim();
        if let Some((i, a, _, _)) = self.tau1.terms().find(|&(i, a, _, _)| !b.is_exceptional(i, a)) {
            return Err(ChowError::InconsistentTau(format!(
                "tau1 has non-exceptional left factor {}",
                b.result.labels(i)[a]
            )));
        }
        if let Some((i, _, r, _)) = self.tau2.terms().find(|&(i, _, r, _)| !b.is_exceptional(c - i, r)) {
            return Err(ChowError::InconsistentTau(format!(
                "tau2 has non-exceptional right factor {}",
                b.result.labels(c - i)[r]
            )));
        }
        Ok(())
    }
}

/// Splits `σ ∈ B` into a `τ` pair: `e × y` terms go to `τ_1`, `x × e` terms
/// to `τ_2`, and `e × e` terms are shared half and half.
pub fn decompose_sigma(b: &BlowupDatum, sigma: &Correspondence) -> Result<TauPair> {
    if !b.is_in_b(sigma)? {
        return Err(ChowError::NotInB(format!("(f × f)_* does not kill {sigma}")));
    }
    let c = sigma.codim();
    let half = rat(1, 2);
    let mut tau1 = Correspondence::zero(&b.result, &b.result, c);
    let mut tau2 = tau1.clone();
    for (i, a, r, q) in sigma.terms() {
        match (b.is_exceptional(i, a), b.is_exceptional(c - i, r)) {
            (true, false) => tau1.block_mut(i)[(a, r)] += q,
            (false, true) => tau2.block_mut(i)[(a, r)] += q,
            (true, true) => {
                let h = &q * &half;
                tau1.block_mut(i)[(a, r)] += h.clone();
                tau2.block_mut(i)[(a, r)] += h;
            }
            (false, false) => {
                return Err(ChowError::NotInB(format!(
                    "term {} × {} has no exceptional factor",
                    b.result.labels(i)[a],
                    b.result.labels(c - i)[r]
                )))
            }
        }
    }
    Ok(TauPair { tau1, tau2 })
}

/// `(½(τ_1 + τ_2^t), ½(τ_1^t + τ_2))`; requires the reconstructed `σ` to be
/// self-transpose.
pub fn symmetrize(t: &TauPair) -> Result<TauPair> {
    let sigma = t.reconstruct()?;
    if sigma.transpose() != sigma {
        return Err(ChowError::InconsistentTau(format!(
            "reconstructed class {sigma} is not self-transpose"
        )));
    }
    let half = rat(1, 2);
    Ok(TauPair {
        tau1: t.tau1.add(&t.tau2.transpose())?.scale(&half),
        tau2: t.tau1.transpose().add(&t.tau2)?.scale(&half),
    })
}

/// `γ_0, ..., γ_d` extracted from a `τ` pair, with the multipliers `m_i`
/// defined by `γ_i • γ_i = m_i γ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gammas {
    pub gammas: Vec<Correspondence>,
    pub multipliers: Vec<Rational>,
}

/// `η_i` is the part of `τ_1` whose exceptional left factor has codim `i`,
/// `θ_i` the part of `τ_2` whose left factor has codim `i`; then
/// `γ_0 = θ_0`, `γ_d = η_d` and `γ_i = η_i + θ_i`. Each `γ_i` must be
/// idempotent or nilpotent of the form `γ•γ = 0`; the latter are dropped
/// after checking that they sum to zero.
pub fn gammas(b: &BlowupDatum, t: &TauPair) -> Result<Gammas> {
    b.check_on_result(&t.tau1, "gamma extraction")?;
    t.check_support(b)?;
    let d = b.dim();
    let mut gammas: Vec<Correspondence> = (0..=d)
        .map(|i| {
            let eta = if i >= 1 { t.tau1.restrict_to_block(i) } else { Correspondence::zero(&b.result, &b.result, d) };
            let theta = if i < d { t.tau2.restrict_to_block(i) } else { Correspondence::zero(&b.result, &b.result, d) };
            eta.add(&theta)
        })
        .collect::<Result<_>>()?;
    let mut multipliers = Vec::with_capacity(d + 1);
    for (i, g) in gammas.iter().enumerate() {
        let square = g.compose(g)?;
        let m = match g.terms().next() {
            None => Rational::zero(),
            Some((k, a, r, q)) => &square.block(k)[(a, r)] / &q,
        };
        if square != g.scale(&m) {
            return Err(ChowError::ConstructionViolation(format!(
                "γ_{i} • γ_{i} is not a multiple of γ_{i}"
            )));
        }
        if !(m.is_zero() || m == int(1)) {
            return Err(ChowError::ConstructionViolation(format!(
                "γ_{i} • γ_{i} = {} γ_{i}; expected 0 or 1",
                fmt_rational(&m)
            )));
        }
        multipliers.push(m);
    }
    let dropped = multipliers
        .iter()
        .zip(&gammas)
        .filter(|(m, _)| m.is_zero())
        .try_fold(Correspondence::zero(&b.result, &b.result, d), |acc, (_, g)| acc.add(g))?;
    if !dropped.is_zero() {
        return Err(ChowError::ConstructionViolation(format!(
            "the nilpotent γ terms sum to {dropped}, not 0"
        )));
    }
    for (g, m) in gammas.iter_mut().zip(&multipliers) {
        if m.is_zero() {
            *g = Correspondence::zero(&b.result, &b.result, d);
        }
    }
    Ok(Gammas { gammas, multipliers })
}

/// `σ = Δ_Y - (f × f)^* Σ π_i`.
pub fn sigma(pis: &CKDecomposition, b: &BlowupDatum) -> Result<Correspondence> {
    ensure_same(pis.datum(), &b.base, "lifting a decomposition")?;
    diagonal(&b.result)?.sub(&corr_pullback(&b.f, &pis.total())?)
}

/// The canonical `τ` pair of a decomposition: split `σ` and symmetrize.
pub fn canonical_tau(pis: &CKDecomposition, b: &BlowupDatum) -> Result<TauPair> {
    symmetrize(&decompose_sigma(b, &sigma(pis, b)?)?)
}

/// Lifts `π_0..π_{2d}` on `X` to `Y` with the canonical `τ` choice.
pub fn lift_ck(pis: &CKDecomposition, b: &BlowupDatum) -> Result<CKDecomposition> {
    let tau = canonical_tau(pis, b)?;
    lift_ck_with_tau(pis, b, &tau)
}

/// `ρ_j = (f × f)^* π_j + γ_{d - j/2}` for even `j`, `(f × f)^* π_j` for odd
/// `j`, with `γ` extracted from the supplied `τ` pair.
pub fn lift_ck_with_tau(pis: &CKDecomposition, b: &BlowupDatum, tau: &TauPair) -> Result<CKDecomposition> {
    let s = sigma(pis, b)?;
    if tau.reconstruct()? != s {
        return Err(ChowError::InconsistentTau(
            "τ pair does not reconstruct Δ_Y - (f × f)^* Σ π_i".into(),
        ));
    }
    let g = gammas(b, tau)?;
    let d = b.dim();
    let projectors = pis
        .projectors()
        .iter()
        .enumerate()
        .map(|(j, pi)| {
            let pulled = corr_pullback(&b.f, pi)?;
            if j % 2 == 0 {
                pulled.add(&g.gammas[d - j / 2])
            } else {
                Ok(pulled)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    CKDecomposition::new(&b.result, projectors)
}

/// `π_j = (f × f)_* ν_j`.
pub fn blowdown_ck(nus: &CKDecomposition, b: &BlowupDatum) -> Result<CKDecomposition> {
    ensure_same(nus.datum(), &b.result, "blowing down a decomposition")?;
    let projectors = nus
        .projectors()
        .iter()
        .map(|nu| corr_pushforward(&b.f, nu))
        .collect::<Result<Vec<_>>>()?;
    CKDecomposition::new(&b.base, projectors)
}

/// A sequence of point blow-ups starting from `base`.
#[derive(Clone, Debug)]
pub struct BlowupTower {
    base: Arc<ChowDatum>,
    stages: Vec<BlowupDatum>,
    map: MorphismDatum,
}

/// Blows up `x` successively at `centers` (zero-cycles on `x`, pulled back
/// to each stage) with multiplier `c`.
pub fn blow_up_many(x: &Arc<ChowDatum>, centers: &[Class], c: &Rational) -> Result<BlowupTower> {
    let mut tower = BlowupTower {
        base: x.clone(),
        stages: Vec::new(),
        map: MorphismDatum::identity(x),
    };
    for center in centers {
        let here = tower.map.pullback(center)?;
        let stage = blow_up(tower.datum(), &here, c)?;
        tower.map = tower.map.compose(stage.morphism())?;
        tower.stages.push(stage);
    }
    Ok(tower)
}

impl BlowupTower {
    pub fn base(&self) -> &Arc<ChowDatum> {
        &self.base
    }

    /// The top of the tower.
    pub fn datum(&self) -> &Arc<ChowDatum> {
        self.map.source()
    }

    pub fn stages(&self) -> &[BlowupDatum] {
        &self.stages
    }

    /// Composite blow-down to the base.
    pub fn morphism(&self) -> &MorphismDatum {
        &self.map
    }

    pub fn lift(&self, pis: &CKDecomposition) -> Result<CKDecomposition> {
        self.stages.iter().try_fold(pis.clone(), |acc, b| lift_ck(&acc, b))
    }

    pub fn lower(&self, nus: &CKDecomposition) -> Result<CKDecomposition> {
        self.stages.iter().rev().try_fold(nus.clone(), |acc, b| blowdown_ck(&acc, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chowring::projective_space;
    use crate::correspond::standard_decomposition;

    fn bl(n: usize, c: i64) -> BlowupDatum {
        let x = projective_space(n);
        blow_up(&x, &x.point_class().unwrap(), &int(c)).unwrap()
    }

    fn fl(b: &BlowupDatum, i: usize) -> Class {
        Class::basis(b.result(), i, 0)
    }

    #[test]
    fn plane_blowup_pairing() {
        let b = bl(2, -1);
        let y = b.result();
        assert_eq!(y.ranks(), vec![1, 2, 1]);
        assert_eq!(y.labels(1), &["l".to_string(), "e1_1".to_string()]);
        assert_eq!(y.pairing(1), &RatMatrix::from_i64(&[&[1, 0], &[0, -1]]));
        let e1 = b.exceptional_class(1).unwrap();
        assert!(b.morphism().pushforward(&e1).unwrap().is_zero());
        let delta = diagonal(y).unwrap();
        for i in 0..=2 {
            for a in 0..y.rank(i) {
                let x = Class::basis(y, i, a);
                assert_eq!(delta.act(&x).unwrap(), x);
            }
        }
    }

    #[test]
    fn curve_blowup_changes_nothing() {
        let b = bl(1, -1);
        assert_eq!(b.result().ranks(), vec![1, 1]);
        assert!(b.exceptional_class(1).is_none());
        let x = b.base().clone();
        let lifted = lift_ck(&standard_decomposition(&x).unwrap(), &b).unwrap();
        for (rho, pi) in lifted.projectors().iter().zip(standard_decomposition(&x).unwrap().projectors()) {
            assert_eq!(rho, &corr_pullback(b.morphism(), pi).unwrap());
        }
    }

    #[test]
    fn bad_centers_and_multipliers() {
        let x = projective_space(2);
        let two_points = x.point_class().unwrap().scale(&int(2));
        assert!(matches!(blow_up(&x, &two_points, &int(-1)), Err(ChowError::InvalidCenter(_))));
        let line = Class::basis(&x, 1, 0);
        assert!(matches!(blow_up(&x, &line, &int(-1)), Err(ChowError::InvalidCenter(_))));
        assert!(matches!(
            blow_up(&x, &x.point_class().unwrap(), &int(0)),
            Err(ChowError::DegenerateMultiplier)
        ));
    }

    #[test]
    fn labels_advance_per_stage() {
        let x = projective_space(3);
        let tower = blow_up_many(&x, &[x.point_class().unwrap(), x.point_class().unwrap()], &int(-1)).unwrap();
        assert_eq!(tower.datum().labels(2), &["l^2", "e1_2", "e2_2"]);
        assert_eq!(tower.datum().ranks(), vec![1, 3, 3, 1]);
        assert_eq!(tower.morphism().generic_degree(), &int(1));
    }

    #[test]
    fn splitting_examples() {
        let b = bl(2, -1);
        let y = b.result();
        let x = b.base();
        let e1 = b.exceptional_class(1).unwrap();
        let ee = Correspondence::product_cycle(&e1, &e1);
        let s = split_ab(&b, &ee).unwrap();
        assert!(s.a_part.is_zero());
        assert_eq!(s.b_part, ee);

        let ll = corr_pullback(b.morphism(), &Correspondence::product_cycle(&Class::basis(x, 1, 0), &Class::basis(x, 1, 0))).unwrap();
        assert!(split_ab(&b, &ll).unwrap().b_part.is_zero());

        let s = split_ab(&b, &diagonal(y).unwrap()).unwrap();
        assert_eq!(s.a_part, corr_pullback(b.morphism(), &diagonal(x).unwrap()).unwrap());
        assert_eq!(s.b_part, ee.scale(&int(-1)));
    }

    #[test]
    fn sigma_decompositions() {
        let b = bl(2, -1);
        let y = b.result();
        let e1 = b.exceptional_class(1).unwrap();
        let l = fl(&b, 1);
        let canonical = Correspondence::product_cycle(&e1, &e1).scale(&int(-1));
        let t = decompose_sigma(&b, &canonical).unwrap();
        assert_eq!(t.tau1, canonical.scale(&rat(1, 2)));
        assert_eq!(t.tau1, t.tau2);
        assert_eq!(symmetrize(&t).unwrap(), t);

        let zero = Correspondence::zero(y, y, 2);
        let t = decompose_sigma(&b, &zero).unwrap();
        assert!(t.tau1.is_zero() && t.tau2.is_zero());

        let el = Correspondence::product_cycle(&e1, &l);
        let le = Correspondence::product_cycle(&l, &e1);
        let mixed = el.add(&le).unwrap();
        let t = decompose_sigma(&b, &mixed).unwrap();
        assert_eq!(t.tau1, el);
        assert_eq!(t.tau2, le);

        let lopsided = TauPair { tau1: mixed.clone(), tau2: zero.clone() };
        let sym = symmetrize(&lopsided).unwrap();
        assert_eq!(sym.tau2, sym.tau1.transpose());
        assert_eq!(sym.reconstruct().unwrap(), mixed);

        let ll = Correspondence::product_cycle(&l, &l);
        assert!(matches!(decompose_sigma(&b, &ll), Err(ChowError::NotInB(_))));
        let skew = TauPair { tau1: el, tau2: zero };
        assert!(matches!(symmetrize(&skew), Err(ChowError::InconsistentTau(_))));
    }

    #[test]
    fn gammas_on_plane_and_space() {
        let b = bl(2, -1);
        let e1 = b.exceptional_class(1).unwrap();
        let pis = standard_decomposition(b.base()).unwrap();
        let g = gammas(&b, &canonical_tau(&pis, &b).unwrap()).unwrap();
        assert_eq!(g.gammas[1], Correspondence::product_cycle(&e1, &e1).scale(&int(-1)));
        assert!(g.gammas[0].is_zero() && g.gammas[2].is_zero());
        assert_eq!(g.multipliers[1], int(1));

        for c in [-1, 3] {
            let b = bl(3, c);
            let pis = standard_decomposition(b.base()).unwrap();
            let g = gammas(&b, &canonical_tau(&pis, &b).unwrap()).unwrap();
            let (e1, e2) = (b.exceptional_class(1).unwrap(), b.exceptional_class(2).unwrap());
            let inv = int(c).recip();
            assert_eq!(g.gammas[1], Correspondence::product_cycle(&e1, &e2).scale(&inv));
            assert_eq!(g.gammas[2], Correspondence::product_cycle(&e2, &e1).scale(&inv));
            assert!(g.gammas[1].is_idempotent().unwrap());
            assert!(g.gammas[1].are_orthogonal(&g.gammas[2]).unwrap());
        }
    }

    #[test]
    fn gammas_reject_non_idempotent_sigma() {
        let b = bl(2, -1);
        let e1 = b.exceptional_class(1).unwrap();
        let doubled = Correspondence::product_cycle(&e1, &e1).scale(&int(-2));
        let t = decompose_sigma(&b, &doubled).unwrap();
        assert!(matches!(gammas(&b, &t), Err(ChowError::ConstructionViolation(_))));
    }

    #[test]
    fn plane_lift_middle_projector() {
        let b = bl(2, -1);
        let pis = standard_decomposition(b.base()).unwrap();
        let rho = lift_ck(&pis, &b).unwrap();
        let l = fl(&b, 1);
        let e1 = b.exceptional_class(1).unwrap();
        let expected = Correspondence::product_cycle(&l, &l)
            .sub(&Correspondence::product_cycle(&e1, &e1))
            .unwrap();
        assert_eq!(rho.projector(2), &expected);
        assert!(rho.projector(1).is_zero() && rho.projector(3).is_zero());
        assert_eq!(rho.projector(2).act(&e1).unwrap(), e1);
        assert_eq!(rho.total(), diagonal(b.result()).unwrap());
        assert_eq!(blowdown_ck(&rho, &b).unwrap(), pis);
    }

    #[test]
    fn pushforward_of_middle_projector() {
        let b = bl(2, -1);
        let pis = standard_decomposition(b.base()).unwrap();
        let rho = lift_ck(&pis, &b).unwrap();
        let down = corr_pushforward(b.morphism(), rho.projector(2)).unwrap();
        let l = Class::basis(b.base(), 1, 0);
        assert_eq!(down, Correspondence::product_cycle(&l, &l));
    }

    #[test]
    fn tau_must_match_sigma() {
        let b = bl(2, -1);
        let pis = standard_decomposition(b.base()).unwrap();
        let y = b.result();
        let bogus = TauPair {
            tau1: Correspondence::zero(y, y, 2),
            tau2: Correspondence::zero(y, y, 2),
        };
        assert!(matches!(lift_ck_with_tau(&pis, &b, &bogus), Err(ChowError::InconsistentTau(_))));
    }

    #[test]
    fn shifted_tau_gives_the_same_lift() {
        let b = bl(3, -1);
        let pis = standard_decomposition(b.base()).unwrap();
        let tau = canonical_tau(&pis, &b).unwrap();
        let (e1, e2) = (b.exceptional_class(1).unwrap(), b.exceptional_class(2).unwrap());
        let kappa = Correspondence::product_cycle(&e2, &e1).scale(&rat(3, 7));
        let moved = tau.shift(&b, &kappa).unwrap();
        assert_ne!(moved, tau);
        assert_eq!(lift_ck_with_tau(&pis, &b, &moved).unwrap(), lift_ck(&pis, &b).unwrap());
        let not_exc = Correspondence::product_cycle(&fl(&b, 1), &e2);
        assert!(matches!(tau.shift(&b, &not_exc), Err(ChowError::InconsistentTau(_))));
    }

    #[test]
    fn empty_tower_is_the_identity() {
        let x = projective_space(2);
        let tower = blow_up_many(&x, &[], &int(-1)).unwrap();
        assert_eq!(tower.morphism(), &MorphismDatum::identity(&x));
        let pis = standard_decomposition(&x).unwrap();
        assert_eq!(tower.lift(&pis).unwrap(), pis);
    }

    #[test]
    fn two_point_plane() {
        let x = projective_space(2);
        let p = x.point_class().unwrap();
        let tower = blow_up_many(&x, &[p.clone(), p], &int(-1)).unwrap();
        assert_eq!(tower.datum().rank(1), 3);
        let pis = standard_decomposition(&x).unwrap();
        let up = tower.lift(&pis).unwrap();
        assert_eq!(up.total(), diagonal(tower.datum()).unwrap());
        assert_eq!(tower.lower(&up).unwrap(), pis);
    }

    #[test]
    fn mixed_b_terms_are_not_orthogonal_to_a() {
        // f^*ℓ × e_1 is killed by (f × f)_* but does not annihilate A
        let b = bl(2, -1);
        let l = fl(&b, 1);
        let e1 = b.exceptional_class(1).unwrap();
        let mixed = Correspondence::product_cycle(&l, &e1);
        assert!(b.is_in_b(&mixed).unwrap());
        assert!(!b.is_doubly_exceptional(&mixed).unwrap());
        let a = Correspondence::product_cycle(&l, &l);
        assert_eq!(mixed.compose(&a).unwrap(), mixed);
    }
}
