//! Correspondences between Chow data, stored as sums of product cycles.
//!
//! A correspondence of total codimension `c` from `X` to `Y` keeps one block
//! per first-factor codimension `i`: a matrix whose `(a, b)` entry is the
//! coefficient of `x_a × y_b` with `x_a ∈ CH^i(X)` and `y_b ∈ CH^{c-i}(Y)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::chowring::{
    ensure_same, same_datum, ChowDatum, Class, GroupActionDatum, MorphismDatum,
};
use crate::error::{ChowError, Result};
use crate::exactlin::{fmt_rational, int, RatMatrix, Rational};

#[derive(Clone)]
pub struct Correspondence {
    source: Arc<ChowDatum>,
    target: Arc<ChowDatum>,
    codim: usize,
    blocks: Vec<RatMatrix>,
}

impl PartialEq for Correspondence {
    fn eq(&self, other: &Self) -> bool {
        self.codim == other.codim
            && self.blocks == other.blocks
            && same_datum(&self.source, &other.source)
            && same_datum(&self.target, &other.target)
    }
}

impl fmt::Debug for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Correspondence({} -> {}, codim {}: {})",
            self.source.name(),
            self.target.name(),
            self.codim,
            self
        )
    }
}

impl fmt::Display for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a, b, q) in self.terms() {
            let mag = if q < Rational::zero() { -q.clone() } else { q.clone() };
            let sign = if q < Rational::zero() { "-" } else { "+" };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if !mag.is_one() {
                write!(f, "{}*", fmt_rational(&mag))?;
            }
            write!(
                f,
                "({} × {})",
                self.source.labels(i)[a],
                self.target.labels(self.codim - i)[b]
            )?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Correspondence {
    pub fn new(
        source: &Arc<ChowDatum>,
        target: &Arc<ChowDatum>,
        codim: usize,
        blocks: Vec<RatMatrix>,
    ) -> Result<Correspondence> {
        if blocks.len() != codim + 1 {
            return Err(ChowError::AmbientMismatch(format!(
                "codimension {codim} needs {} blocks, got {}",
                codim + 1,
                blocks.len()
            )));
        }
        for (i, m) in blocks.iter().enumerate() {
            if m.rows() != source.rank(i) || m.cols() != target.rank(codim - i) {
                return Err(ChowError::AmbientMismatch(format!(
                    "block {i} has shape {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    source.rank(i),
                    target.rank(codim - i)
                )));
            }
        }
        Ok(Correspondence {
            source: source.clone(),
            target: target.clone(),
            codim,
            blocks,
        })
    }

    pub fn zero(source: &Arc<ChowDatum>, target: &Arc<ChowDatum>, codim: usize) -> Correspondence {
        let blocks = (0..=codim)
            .map(|i| RatMatrix::zeros(source.rank(i), target.rank(codim - i)))
            .collect();
        Correspondence {
            source: source.clone(),
            target: target.clone(),
            codim,
            blocks,
        }
    }

    /// The exterior product `u × v`.
    pub fn product_cycle(u: &Class, v: &Class) -> Correspondence {
        let mut out = Correspondence::zero(u.datum(), v.datum(), u.codim() + v.codim());
        if u.codim() <= u.datum().dim() && v.codim() <= v.datum().dim() {
            out.blocks[u.codim()] = RatMatrix::outer(u.coeffs(), v.coeffs());
        }
        out
    }

    /// `x_a × y_b` for basis elements.
    pub fn basis_cycle(
        source: &Arc<ChowDatum>,
        target: &Arc<ChowDatum>,
        i: usize,
        a: usize,
        j: usize,
        b: usize,
    ) -> Correspondence {
        let mut out = Correspondence::zero(source, target, i + j);
        out.blocks[i][(a, b)] = Rational::one();
        out
    }

    pub fn source(&self) -> &Arc<ChowDatum> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ChowDatum> {
        &self.target
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn blocks(&self) -> &[RatMatrix] {
        &self.blocks
    }

    /// Block for first-factor codimension `i`.
    pub fn block(&self, i: usize) -> &RatMatrix {
        &self.blocks[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut RatMatrix {
        &mut self.blocks[i]
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(RatMatrix::is_zero)
    }

    /// Nonzero coefficients as `(i, a, b, coeff)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, usize, Rational)> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(i, m)| m.entries().filter(|(_, _, q)| !q.is_zero()).map(move |(a, b, q)| (i, a, b, q.clone())))
    }

    fn check_compatible(&self, other: &Correspondence, what: &str) -> Result<()> {
        ensure_same(&self.source, &other.source, what)?;
        ensure_same(&self.target, &other.target, what)?;
        if self.codim != other.codim {
            return Err(ChowError::AmbientMismatch(format!(
                "{what}: codimension {} vs {}",
                self.codim, other.codim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Correspondence) -> Result<Correspondence> {
        self.check_compatible(other, "sum of correspondences")?;
        Ok(self.with_blocks(self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Correspondence) -> Result<Correspondence> {
        self.check_compatible(other, "difference of correspondences")?;
        Ok(self.with_blocks(self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, s: &Rational) -> Correspondence {
        self.with_blocks(self.blocks.iter().map(|m| m.scale(s)).collect())
    }

    fn with_blocks(&self, blocks: Vec<RatMatrix>) -> Correspondence {
        Correspondence {
            source: self.source.clone(),
            target: self.target.clone(),
            codim: self.codim,
            blocks,
        }
    }

    /// Sum of a nonempty list of compatible correspondences.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a Correspondence>) -> Result<Correspondence> {
        let mut iter = items.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| ChowError::AmbientMismatch("sum of an empty list".into()))?
            .clone();
        iter.try_fold(first, |acc, c| acc.add(c))
    }

    /// Keeps only the block of first-factor codimension `i`.
    pub fn restrict_to_block(&self, i: usize) -> Correspondence {
        let mut out = Correspondence::zero(&self.source, &self.target, self.codim);
        out.blocks[i] = self.blocks[i].clone();
        out
    }

    pub fn transpose(&self) -> Correspondence {
        let blocks = (0..=self.codim).map(|i| self.blocks[self.codim - i].transpose()).collect();
        Correspondence {
            source: self.target.clone(),
            target: self.source.clone(),
            codim: self.codim,
            blocks,
        }
    }

    /// Matrix of `x ↦ act(self, x)` from `CH^j(source)` to the target
    /// piece of codimension `codim + j - d_source`.
    pub fn action_matrix(&self, j: usize) -> Result<RatMatrix> {
        let d = self.source.dim();
        if j > d {
            return Err(ChowError::AmbientMismatch(format!("codimension {j} exceeds dimension {d}")));
        }
        if self.codim + j < d {
            return Err(ChowError::AmbientMismatch(format!(
                "a codimension-{} correspondence sends CH^{j} below codimension 0",
                self.codim
            )));
        }
        let i = d - j;
        let out_codim = self.codim + j - d;
        if i > self.codim {
            return Ok(RatMatrix::zeros(self.target.rank(out_codim), self.source.rank(j)));
        }
        Ok((self.source.pairing(j) * &self.blocks[i]).transpose())
    }

    /// `(u × v) · x = deg(x·u) v`, extended bilinearly.
    pub fn act(&self, x: &Class) -> Result<Class> {
        ensure_same(x.datum(), &self.source, "action on a class")?;
        let m = self.action_matrix(x.codim())?;
        Class::new(&self.target, self.codim + x.codim() - self.source.dim(), m.mul_vec(x.coeffs()))
    }

    /// `self ∘ right`, where `right` goes from `X` to `Y` and `self` from
    /// `Y` to `Z`.
    pub fn compose(&self, right: &Correspondence) -> Result<Correspondence> {
        ensure_same(&right.target, &self.source, "composition")?;
        let y = &self.source;
        let dy = y.dim();
        let c = composite_codim(self.codim, right.codim, dy)?;
        let blocks = (0..=c)
            .map(|i| {
                let rows = right.source.rank(i);
                let cols = self.target.rank(c - i);
                // the middle codimensions are c_r - i and dy - (c_r - i)
                if i > right.codim || right.codim - i > dy {
                    return RatMatrix::zeros(rows, cols);
                }
                let j = dy - (right.codim - i);
                if j > self.codim {
                    return RatMatrix::zeros(rows, cols);
                }
                &(&right.blocks[i] * y.pairing(right.codim - i)) * &self.blocks[j]
            })
            .collect();
        Ok(Correspondence {
            source: right.source.clone(),
            target: self.target.clone(),
            codim: c,
            blocks,
        })
    }

    pub fn is_idempotent(&self) -> Result<bool> {
        Ok(self.compose(self)? == *self)
    }

    pub fn are_orthogonal(&self, other: &Correspondence) -> Result<bool> {
        Ok(self.compose(other)?.is_zero() && other.compose(self)?.is_zero())
    }

    /// `g ⊗ g` applied to a self-correspondence, with `g` given per codim.
    pub fn apply_automorphism(&self, g: &[RatMatrix]) -> Result<Correspondence> {
        ensure_same(&self.source, &self.target, "automorphism action")?;
        let blocks = (0..=self.codim)
            .map(|i| {
                let gi = g.get(i);
                let gj = g.get(self.codim - i);
                match (gi, gj) {
                    (Some(gi), Some(gj)) if i <= self.source.dim() && self.codim - i <= self.source.dim() => {
                        &(gi * &self.blocks[i]) * &gj.transpose()
                    }
                    _ => self.blocks[i].clone(),
                }
            })
            .collect();
        Ok(self.with_blocks(blocks))
    }
}

fn composite_codim(c_left: usize, c_right: usize, dy: usize) -> Result<usize> {
    (c_left + c_right).checked_sub(dy).ok_or_else(|| {
        ChowError::AmbientMismatch(format!(
            "composite of codimensions {c_left} and {c_right} over a {dy}-dimensional middle factor is negative"
        ))
    })
}

/// The diagonal as the sum of its Künneth pairs.
pub fn diagonal(x: &Arc<ChowDatum>) -> Result<Correspondence> {
    let pairs = x.require_kunneth()?;
    let mut out = Correspondence::zero(x, x, x.dim());
    for p in pairs {
        out.blocks[p.codim] = &out.blocks[p.codim] + &RatMatrix::outer(&p.left, &p.right);
    }
    Ok(out)
}

/// `(f × f)^* α` for `f: X -> W` and `α` on `W × W`.
pub fn corr_pullback(f: &MorphismDatum, alpha: &Correspondence) -> Result<Correspondence> {
    ensure_same(alpha.source(), f.target(), "pullback of a correspondence")?;
    ensure_same(alpha.target(), f.target(), "pullback of a correspondence")?;
    let x = f.source();
    let dw = f.target().dim();
    let c = alpha.codim;
    let blocks = (0..=c)
        .map(|i| {
            if i > dw || c - i > dw {
                return RatMatrix::zeros(x.rank(i), x.rank(c - i));
            }
            &(f.pullback_matrix(i) * &alpha.blocks[i]) * &f.pullback_matrix(c - i).transpose()
        })
        .collect();
    Correspondence::new(x, x, c, blocks)
}

/// `(f × f)_* α` for `f: X -> W` and `α` on `X × X`.
pub fn corr_pushforward(f: &MorphismDatum, alpha: &Correspondence) -> Result<Correspondence> {
    ensure_same(alpha.source(), f.source(), "pushforward of a correspondence")?;
    ensure_same(alpha.target(), f.source(), "pushforward of a correspondence")?;
    let s = f.shift();
    let w = f.target();
    let c = alpha.codim.checked_sub(2 * s).ok_or_else(|| {
        ChowError::AmbientMismatch("pushforward of a correspondence lands below codimension 0".into())
    })?;
    let blocks = (0..=c)
        .map(|i| {
            let (p, q) = (i + s, alpha.codim - i - s);
            if p > f.source().dim() || q > f.source().dim() {
                return RatMatrix::zeros(w.rank(i), w.rank(c - i));
            }
            &(f.pushforward_matrix(p) * &alpha.blocks[p]) * &f.pushforward_matrix(q).transpose()
        })
        .collect();
    Correspondence::new(w, w, c, blocks)
}

/// Exterior product `α ⊗ β` on `(X1 × Y1) × (X2 × Y2)`, where `left` and
/// `right` are the product data `X1 × Y1` and `X2 × Y2`.
pub fn external_product(
    alpha: &Correspondence,
    beta: &Correspondence,
    left: &Arc<ChowDatum>,
    right: &Arc<ChowDatum>,
) -> Result<Correspondence> {
    for (prod, a, b) in [(left, &alpha.source, &beta.source), (right, &alpha.target, &beta.target)] {
        let Some((x, y)) = prod.factors() else {
            return Err(ChowError::AmbientMismatch(format!("{} is not a product", prod.name())));
        };
        ensure_same(x, a, "external product")?;
        ensure_same(y, b, "external product")?;
    }
    let c = alpha.codim + beta.codim;
    let mut out = Correspondence::zero(left, right, c);
    for (i, r, s, qa) in alpha.terms() {
        for (j, t, u, qb) in beta.terms() {
            let row = left.product_index(i + j, i, r, t).expect("index in range");
            let col = right
                .product_index(c - i - j, alpha.codim - i, s, u)
                .expect("index in range");
            out.blocks[i + j][(row, col)] += &qa * &qb;
        }
    }
    Ok(out)
}

type TripleKey = [(usize, usize); 3];

/// A cycle on a triple product `X × Y × Z` in the tensor basis, stored
/// sparsely. Used to evaluate compositions and push-pull identities directly
/// from the structure constants of the three factors.
#[derive(Clone, Debug)]
pub struct TripleCycle {
    factors: [Arc<ChowDatum>; 3],
    terms: BTreeMap<TripleKey, Rational>,
}

impl PartialEq for TripleCycle {
    fn eq(&self, other: &Self) -> bool {
        self.factors.iter().zip(&other.factors).all(|(a, b)| same_datum(a, b)) && self.terms == other.terms
    }
}

impl TripleCycle {
    pub fn zero(factors: [Arc<ChowDatum>; 3]) -> TripleCycle {
        TripleCycle {
            factors,
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(factors: [Arc<ChowDatum>; 3], key: TripleKey) -> TripleCycle {
        let mut out = TripleCycle::zero(factors);
        out.add_term(key, Rational::one());
        out
    }

    pub fn factors(&self) -> &[Arc<ChowDatum>; 3] {
        &self.factors
    }

    pub fn terms(&self) -> &BTreeMap<TripleKey, Rational> {
        &self.terms
    }

    fn add_term(&mut self, key: TripleKey, q: Rational) {
        if q.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Rational::zero);
        *entry += q;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    fn unit_key(d: &ChowDatum) -> (usize, usize) {
        debug_assert_eq!(d.rank(0), 1);
        (0, 0)
    }

    /// `p12^* α` for `α` on `X × Y`.
    pub fn from_p12(alpha: &Correspondence, z: &Arc<ChowDatum>) -> TripleCycle {
        let mut out = TripleCycle::zero([alpha.source.clone(), alpha.target.clone(), z.clone()]);
        for (i, a, b, q) in alpha.terms() {
            out.add_term([(i, a), (alpha.codim - i, b), Self::unit_key(z)], q);
        }
        out
    }

    /// `p23^* α` for `α` on `Y × Z`.
    pub fn from_p23(x: &Arc<ChowDatum>, alpha: &Correspondence) -> TripleCycle {
        let mut out = TripleCycle::zero([x.clone(), alpha.source.clone(), alpha.target.clone()]);
        for (i, a, b, q) in alpha.terms() {
            out.add_term([Self::unit_key(x), (i, a), (alpha.codim - i, b)], q);
        }
        out
    }

    /// `p13^* α` for `α` on `X × Z`.
    pub fn from_p13(alpha: &Correspondence, y: &Arc<ChowDatum>) -> TripleCycle {
        let mut out = TripleCycle::zero([alpha.source.clone(), y.clone(), alpha.target.clone()]);
        for (i, a, b, q) in alpha.terms() {
            out.add_term([(i, a), Self::unit_key(y), (alpha.codim - i, b)], q);
        }
        out
    }

    /// Intersection product, factor by factor.
    pub fn mul(&self, other: &TripleCycle) -> Result<TripleCycle> {
        for (a, b) in self.factors.iter().zip(&other.factors) {
            ensure_same(a, b, "product of triple cycles")?;
        }
        let mut out = TripleCycle::zero(self.factors.clone());
        for (k1, q1) in &self.terms {
            for (k2, q2) in &other.terms {
                let parts: Vec<(usize, &[Rational])> = (0..3)
                    .map(|f| {
                        let d = &self.factors[f];
                        let codim = k1[f].0 + k2[f].0;
                        let v: &[Rational] = if codim > d.dim() {
                            &[]
                        } else {
                            d.basis_product(k1[f].0, k1[f].1, k2[f].0, k2[f].1)
                        };
                        (codim, v)
                    })
                    .collect();
                let q = q1 * q2;
                for (a, qa) in parts[0].1.iter().enumerate().filter(|(_, q)| !q.is_zero()) {
                    for (b, qb) in parts[1].1.iter().enumerate().filter(|(_, q)| !q.is_zero()) {
                        for (c, qc) in parts[2].1.iter().enumerate().filter(|(_, q)| !q.is_zero()) {
                            out.add_term(
                                [(parts[0].0, a), (parts[1].0, b), (parts[2].0, c)],
                                &q * qa * qb * qc,
                            );
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pullback along `f1 × f2 × f3`; `None` entries stand for identities.
    pub fn pullback(&self, maps: [Option<&MorphismDatum>; 3]) -> Result<TripleCycle> {
        let mut factors = self.factors.clone();
        for (f, m) in maps.iter().enumerate() {
            if let Some(m) = m {
                ensure_same(m.target(), &self.factors[f], "pullback of a triple cycle")?;
                factors[f] = m.source().clone();
            }
        }
        let mut out = TripleCycle::zero(factors);
        for (key, q) in &self.terms {
            let images: Vec<Vec<(usize, Rational)>> = (0..3)
                .map(|f| match maps[f] {
                    None => vec![(key[f].1, Rational::one())],
                    Some(m) => m
                        .pullback_matrix(key[f].0)
                        .col(key[f].1)
                        .into_iter()
                        .enumerate()
                        .filter(|(_, q)| !q.is_zero())
                        .collect(),
                })
                .collect();
            for (a, qa) in &images[0] {
                for (b, qb) in &images[1] {
                    for (c, qc) in &images[2] {
                        out.add_term([(key[0].0, *a), (key[1].0, *b), (key[2].0, *c)], q * qa * qb * qc);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `p13_*`: integrate the middle factor against its degree map. The
    /// result has total codimension `codim - d_Y`.
    pub fn push13(&self, codim: usize) -> Result<Correspondence> {
        let [x, y, z] = &self.factors;
        let dy = y.dim();
        let c = codim.checked_sub(dy).ok_or_else(|| {
            ChowError::AmbientMismatch("push forward of a triple cycle lands below codimension 0".into())
        })?;
        let mut out = Correspondence::zero(x, z, c);
        for (key, q) in &self.terms {
            if key[0].0 + key[1].0 + key[2].0 != codim {
                return Err(ChowError::AmbientMismatch(format!(
                    "triple cycle is not homogeneous of codimension {codim}"
                )));
            }
            if key[1].0 != dy {
                continue;
            }
            let deg = &y.degree_functional()[key[1].1];
            if !deg.is_zero() {
                out.blocks[key[0].0][(key[0].1, key[2].1)] += q * deg;
            }
        }
        Ok(out)
    }
}

/// Composition evaluated literally as `p13_*(p12^* right · p23^* left)` in
/// the triple tensor basis. Independent of the cached pairing matrices; kept
/// as a cross-check for [`Correspondence::compose`].
pub fn compose_oracle(left: &Correspondence, right: &Correspondence) -> Result<Correspondence> {
    ensure_same(&right.target, &left.source, "composition")?;
    let c = composite_codim(left.codim, right.codim, left.source.dim())?;
    let lower = TripleCycle::from_p12(right, &left.target);
    let upper = TripleCycle::from_p23(&right.source, left);
    lower.mul(&upper)?.push13(c + left.source.dim())
}

/// An ordered list `π_0, ..., π_{2d}` of self-correspondences of codimension
/// `d` on one datum.
#[derive(Clone, Debug, PartialEq)]
pub struct CKDecomposition {
    datum: Arc<ChowDatum>,
    projectors: Vec<Correspondence>,
}

impl CKDecomposition {
    pub fn new(datum: &Arc<ChowDatum>, projectors: Vec<Correspondence>) -> Result<CKDecomposition> {
        let d = datum.dim();
        if projectors.len() != 2 * d + 1 {
            return Err(ChowError::InvalidDecomposition(format!(
                "{} projectors for a datum of dimension {d}, expected {}",
                projectors.len(),
                2 * d + 1
            )));
        }
        for (i, p) in projectors.iter().enumerate() {
            if !same_datum(p.source(), datum) || !same_datum(p.target(), datum) || p.codim() != d {
                return Err(ChowError::InvalidDecomposition(format!(
                    "projector {i} is not a codimension-{d} self-correspondence of {}",
                    datum.name()
                )));
            }
        }
        Ok(CKDecomposition {
            datum: datum.clone(),
            projectors,
        })
    }

    pub fn datum(&self) -> &Arc<ChowDatum> {
        &self.datum
    }

    pub fn projectors(&self) -> &[Correspondence] {
        &self.projectors
    }

    pub fn projector(&self, i: usize) -> &Correspondence {
        &self.projectors[i]
    }

    pub fn into_projectors(self) -> Vec<Correspondence> {
        self.projectors
    }

    pub fn total(&self) -> Correspondence {
        Correspondence::sum(&self.projectors).expect("projectors share one ambient")
    }
}

/// `π_{2i}` is the part of the diagonal with first-factor codimension
/// `d - i`; odd projectors vanish. For `P^n` this is `ℓ^{n-i} × ℓ^i`.
pub fn standard_decomposition(x: &Arc<ChowDatum>) -> Result<CKDecomposition> {
    let delta = diagonal(x)?;
    let d = x.dim();
    let projectors = (0..=2 * d)
        .map(|k| {
            if k % 2 == 0 {
                delta.restrict_to_block(d - k / 2)
            } else {
                Correspondence::zero(x, x, d)
            }
        })
        .collect();
    CKDecomposition::new(x, projectors)
}

/// `π_k = Σ_{i+j=k} π_i ⊗ π'_j` on a product datum.
pub fn product_decomposition(
    left: &CKDecomposition,
    right: &CKDecomposition,
    prod: &Arc<ChowDatum>,
) -> Result<CKDecomposition> {
    let d = prod.dim();
    let mut projectors = vec![Correspondence::zero(prod, prod, d); 2 * d + 1];
    for (i, p) in left.projectors().iter().enumerate() {
        for (j, q) in right.projectors().iter().enumerate() {
            if p.is_zero() || q.is_zero() {
                continue;
            }
            projectors[i + j] = projectors[i + j].add(&external_product(p, q, prod, prod)?)?;
        }
    }
    CKDecomposition::new(prod, projectors)
}

/// Descends a decomposition along the quotient `q: X -> X/G` as
/// `(1/|G|)(q × q)_* π_i`. Every `π_i` must be fixed by each `g × g`.
pub fn quotient_decomposition(
    dec: &CKDecomposition,
    action: &GroupActionDatum,
    q: &MorphismDatum,
) -> Result<CKDecomposition> {
    ensure_same(dec.datum(), action.datum(), "quotient decomposition")?;
    for (i, p) in dec.projectors().iter().enumerate() {
        for g in action.elements() {
            if p.apply_automorphism(g)? != *p {
                return Err(ChowError::UnsupportedDatum(format!(
                    "projector {i} is not invariant under the group action"
                )));
            }
        }
    }
    let inv = int(action.order() as i64).recip();
    let projectors = dec
        .projectors()
        .iter()
        .map(|p| corr_pushforward(q, p).map(|c| c.scale(&inv)))
        .collect::<Result<Vec<_>>>()?;
    CKDecomposition::new(q.target(), projectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chowring::{product, projective_space, quotient};
    use crate::exactlin::rat;

    fn ell(x: &Arc<ChowDatum>, i: usize) -> Class {
        Class::basis(x, i, 0)
    }

    #[test]
    fn key_cycles_on_the_plane() {
        let p2 = projective_space(2);
        let s1 = Correspondence::product_cycle(&ell(&p2, 2), &ell(&p2, 0));
        let s2 = Correspondence::product_cycle(&ell(&p2, 0), &ell(&p2, 2));
        assert_eq!(s1.compose(&s1).unwrap(), s1);
        assert!(s1.compose(&s2).unwrap().is_zero());
        assert!(s1.are_orthogonal(&s2).unwrap());
        assert!(s2.is_idempotent().unwrap());
    }

    #[test]
    fn diagonal_is_a_two_sided_identity() {
        let p1 = projective_space(1);
        let q = product(&p1, &p1).unwrap();
        let delta = diagonal(&q).unwrap();
        let g = Correspondence::product_cycle(&Class::basis(&q, 1, 0), &Class::basis(&q, 1, 1));
        assert_eq!(delta.compose(&g).unwrap(), g);
        assert_eq!(g.compose(&delta).unwrap(), g);
        assert!(delta.is_idempotent().unwrap());
        assert_eq!(delta.terms().count(), 4);
    }

    #[test]
    fn diagonal_of_line_and_point() {
        let p1 = projective_space(1);
        let delta = diagonal(&p1).unwrap();
        let expected = Correspondence::product_cycle(&ell(&p1, 0), &ell(&p1, 1))
            .add(&Correspondence::product_cycle(&ell(&p1, 1), &ell(&p1, 0)))
            .unwrap();
        assert_eq!(delta, expected);
        let pt = projective_space(0);
        assert_eq!(diagonal(&pt).unwrap().to_string(), "(1 × 1)");
    }

    #[test]
    fn oracle_small_cases() {
        let p1 = projective_space(1);
        let a = Correspondence::product_cycle(&ell(&p1, 0), &ell(&p1, 1));
        assert_eq!(compose_oracle(&a, &a).unwrap(), a);
        assert_eq!(a.compose(&a).unwrap(), a);
        let p3 = projective_space(3);
        let delta = diagonal(&p3).unwrap();
        assert_eq!(compose_oracle(&delta, &delta).unwrap(), delta);
        let zero = Correspondence::zero(&p3, &p3, 3);
        assert!(compose_oracle(&zero, &delta).unwrap().is_zero());
    }

    #[test]
    fn transpose_rules() {
        let p2 = projective_space(2);
        let uv = Correspondence::product_cycle(&ell(&p2, 1), &ell(&p2, 2));
        let vu = Correspondence::product_cycle(&ell(&p2, 2), &ell(&p2, 1));
        assert_eq!(uv.transpose(), vu);
        assert_eq!(uv.transpose().transpose(), uv);
        let delta = diagonal(&p2).unwrap();
        assert_eq!(delta.transpose(), delta);
    }

    #[test]
    fn action_on_projective_space() {
        let n = 3;
        let pn = projective_space(n);
        let dec = standard_decomposition(&pn).unwrap();
        for i in 0..=n {
            for j in 0..=n {
                let image = dec.projector(2 * i).act(&ell(&pn, j)).unwrap();
                if i == j {
                    assert_eq!(image, ell(&pn, j));
                } else {
                    assert!(image.is_zero());
                }
            }
        }
        let delta = diagonal(&pn).unwrap();
        assert_eq!(delta.act(&ell(&pn, 2)).unwrap(), ell(&pn, 2));
    }

    #[test]
    fn point_cycles_act_by_degree() {
        let p2 = projective_space(2);
        let s1 = Correspondence::product_cycle(&ell(&p2, 2), &ell(&p2, 0));
        let s2 = Correspondence::product_cycle(&ell(&p2, 0), &ell(&p2, 2));
        // (u × v)·y = deg(y·u) v, so [pt] × [X] sees only the fundamental class
        assert_eq!(s1.act(&ell(&p2, 0)).unwrap(), ell(&p2, 0));
        assert!(s1.act(&ell(&p2, 2)).unwrap().is_zero());
        assert!(s2.act(&ell(&p2, 0)).unwrap().is_zero());
        assert_eq!(s2.act(&ell(&p2, 2)).unwrap(), ell(&p2, 2));
    }

    #[test]
    fn pullback_along_identity_and_swap_quotient() {
        let p1 = projective_space(1);
        let q2 = product(&p1, &p1).unwrap();
        let id = MorphismDatum::identity(&q2);
        let g = Correspondence::product_cycle(&Class::basis(&q2, 1, 1), &Class::basis(&q2, 1, 0));
        assert_eq!(corr_pullback(&id, &g).unwrap(), g);

        let (quot, q) = quotient(&GroupActionDatum::swap(&q2).unwrap()).unwrap();
        let delta = diagonal(&quot).unwrap();
        let pulled = corr_pullback(&q, &delta).unwrap();
        assert_eq!(pulled.compose(&pulled).unwrap(), pulled.scale(&int(2)));
        let h = Correspondence::product_cycle(&Class::basis(&quot, 1, 0), &Class::basis(&quot, 1, 0));
        let round = corr_pushforward(&q, &corr_pullback(&q, &h).unwrap()).unwrap();
        assert_eq!(round, h.scale(&int(4)));
    }

    #[test]
    fn products_of_standard_decompositions_tensor() {
        let p1 = projective_space(1);
        let p2 = projective_space(2);
        let prod = product(&p1, &p2).unwrap();
        let tensored = product_decomposition(
            &standard_decomposition(&p1).unwrap(),
            &standard_decomposition(&p2).unwrap(),
            &prod,
        )
        .unwrap();
        assert_eq!(tensored, standard_decomposition(&prod).unwrap());
    }

    #[test]
    fn swap_quotient_decomposition_matches_plane() {
        let p1 = projective_space(1);
        let q2 = product(&p1, &p1).unwrap();
        let action = GroupActionDatum::swap(&q2).unwrap();
        let (quot, q) = quotient(&action).unwrap();
        let dec = quotient_decomposition(&standard_decomposition(&q2).unwrap(), &action, &q).unwrap();
        assert_eq!(dec.total(), diagonal(&quot).unwrap());
        for (i, p) in dec.projectors().iter().enumerate() {
            assert!(p.is_idempotent().unwrap(), "π_{i}");
        }
    }

    #[test]
    fn non_invariant_projectors_do_not_descend() {
        let p1 = projective_space(1);
        let q2 = product(&p1, &p1).unwrap();
        let action = GroupActionDatum::swap(&q2).unwrap();
        let (_, q) = quotient(&action).unwrap();
        let mut projectors = standard_decomposition(&q2).unwrap().into_projectors();
        // move the (1⊗l)×(l⊗1) term of π_2 into π_1
        let piece = Correspondence::basis_cycle(&q2, &q2, 1, 0, 1, 0);
        projectors[2] = projectors[2].sub(&piece).unwrap();
        projectors[1] = projectors[1].add(&piece).unwrap();
        let dec = CKDecomposition::new(&q2, projectors).unwrap();
        assert!(matches!(
            quotient_decomposition(&dec, &action, &q),
            Err(ChowError::UnsupportedDatum(_))
        ));
    }

    #[test]
    fn decomposition_length_is_checked() {
        let p1 = projective_space(1);
        let err = CKDecomposition::new(&p1, vec![Correspondence::zero(&p1, &p1, 1)]).unwrap_err();
        assert!(matches!(err, ChowError::InvalidDecomposition(_)));
    }

    #[test]
    fn mismatched_middle_factor() {
        let a = diagonal(&projective_space(1)).unwrap();
        let b = diagonal(&projective_space(2)).unwrap();
        assert!(matches!(a.compose(&b), Err(ChowError::AmbientMismatch(_))));
        assert!(matches!(compose_oracle(&a, &b), Err(ChowError::AmbientMismatch(_))));
    }

    #[test]
    fn display_lists_terms() {
        let p1 = projective_space(1);
        let c = Correspondence::product_cycle(&ell(&p1, 0), &ell(&p1, 1)).scale(&rat(-1, 2));
        assert_eq!(c.to_string(), "-1/2*(1 × l)");
    }
}
