//! Finite models of rational Chow rings.
//!
//! A [`ChowDatum`] is a graded commutative Q-algebra `CH^0 ⊕ ... ⊕ CH^d`
//! given by structure constants on a labelled basis, together with the degree
//! map `CH^d -> Q` and, for cellular-style data, an expression of the diagonal
//! as a sum of product cycles. [`MorphismDatum`] carries the pullback and
//! pushforward of a morphism, and [`GroupActionDatum`] a finite group acting
//! by graded ring automorphisms, from which [`quotient`] builds the invariant
//! subring.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{ChowError, Result};
use crate::exactlin::{
    add_vec, axpy, dot, fmt_rational, int, is_zero_vec, scale_vec, unit_vec, zero_vec, RatMatrix,
    Rational,
};

/// One summand `left × right` of a diagonal decomposition, with `left` in
/// codimension `codim` and `right` in codimension `d - codim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KunnethPair {
    pub codim: usize,
    pub left: Vec<Rational>,
    pub right: Vec<Rational>,
}

/// Raw tables from which a [`ChowDatum`] is validated and built.
///
/// `mult[i][j]` has one row per basis pair `(a, b)` of `CH^i × CH^j`
/// (row index `a * rank(j) + b`) holding the coefficients of `a·b` in
/// `CH^{i+j}`; it has zero columns when `i + j > d`.
#[derive(Clone, Debug)]
pub struct DatumParts {
    pub name: String,
    pub labels: Vec<Vec<String>>,
    pub mult: Vec<Vec<RatMatrix>>,
    pub degree: Vec<Rational>,
    pub kunneth: Option<Vec<KunnethPair>>,
    pub cellular: bool,
}

#[derive(PartialEq)]
pub struct ChowDatum {
    name: String,
    dim: usize,
    labels: Vec<Vec<String>>,
    mult: Vec<Vec<RatMatrix>>,
    degree: Vec<Rational>,
    kunneth: Option<Vec<KunnethPair>>,
    cellular: bool,
    factors: Option<(Arc<ChowDatum>, Arc<ChowDatum>)>,
    pairing: Vec<RatMatrix>,
}

impl fmt::Debug for ChowDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChowDatum({}, ranks {:?})", self.name, self.ranks())
    }
}

/// Identity of data: pointer equality first, structural equality otherwise.
pub fn same_datum(a: &Arc<ChowDatum>, b: &Arc<ChowDatum>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn ensure_same(a: &Arc<ChowDatum>, b: &Arc<ChowDatum>, what: &str) -> Result<()> {
    if same_datum(a, b) {
        Ok(())
    } else {
        Err(ChowError::AmbientMismatch(format!(
            "{what}: {} vs {}",
            a.name(),
            b.name()
        )))
    }
}

impl ChowDatum {
    /// Validates `parts` (exhaustive associativity and commutativity, unit
    /// law, and the diagonal when present) and builds the datum.
    pub fn new(parts: DatumParts) -> Result<Arc<ChowDatum>> {
        Self::build(parts, None)
    }

    pub(crate) fn build(
        parts: DatumParts,
        factors: Option<(Arc<ChowDatum>, Arc<ChowDatum>)>,
    ) -> Result<Arc<ChowDatum>> {
        let datum = Self::assemble(parts, factors)?;
        datum.check_ring_axioms()?;
        if datum.kunneth.is_some() {
            datum.check_kunneth()?;
        }
        Ok(Arc::new(datum))
    }

    fn assemble(
        parts: DatumParts,
        factors: Option<(Arc<ChowDatum>, Arc<ChowDatum>)>,
    ) -> Result<ChowDatum> {
        let DatumParts {
            name,
            labels,
            mult,
            degree,
            kunneth,
            cellular,
        } = parts;
        if labels.is_empty() {
            return Err(ChowError::InvalidDatum(format!("{name}: no graded pieces")));
        }
        let d = labels.len() - 1;
        let rank = |k: usize| if k <= d { labels[k].len() } else { 0 };
        if rank(0) != 1 {
            return Err(ChowError::InvalidDatum(format!(
                "{name}: CH^0 must be one-dimensional, found rank {}",
                rank(0)
            )));
        }
        if mult.len() != d + 1 || mult.iter().any(|row| row.len() != d + 1) {
            return Err(ChowError::InvalidDatum(format!(
                "{name}: multiplication table must be {0}x{0}",
                d + 1
            )));
        }
        for (i, row) in mult.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                if m.rows() != rank(i) * rank(j) || m.cols() != rank(i + j) {
                    return Err(ChowError::InvalidDatum(format!(
                        "{name}: table CH^{i} x CH^{j} has shape {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        rank(i) * rank(j),
                        rank(i + j)
                    )));
                }
            }
        }
        if degree.len() != rank(d) {
            return Err(ChowError::InvalidDatum(format!(
                "{name}: degree map has length {}, CH^{d} has rank {}",
                degree.len(),
                rank(d)
            )));
        }
        if let Some(pairs) = &kunneth {
            for p in pairs {
                if p.codim > d || p.left.len() != rank(p.codim) || p.right.len() != rank(d - p.codim) {
                    return Err(ChowError::InvalidDatum(format!(
                        "{name}: malformed diagonal term in codimension {}",
                        p.codim
                    )));
                }
            }
        }
        let mut datum = ChowDatum {
            name,
            dim: d,
            labels,
            mult,
            degree,
            kunneth,
            cellular,
            factors,
            pairing: Vec::new(),
        };
        datum.pairing = (0..=d)
            .map(|i| {
                RatMatrix::from_fn(datum.rank(i), datum.rank(d - i), |a, b| {
                    dot(datum.basis_product(i, a, d - i, b), &datum.degree)
                })
            })
            .collect();
        Ok(datum)
    }

    fn check_ring_axioms(&self) -> Result<()> {
        let d = self.dim;
        for j in 0..=d {
            for b in 0..self.rank(j) {
                if self.basis_product(0, 0, j, b) != unit_vec(self.rank(j), b).as_slice() {
                    return Err(ChowError::InvalidDatum(format!(
                        "{}: unit does not act as identity on {}",
                        self.name, self.labels[j][b]
                    )));
                }
            }
        }
        for i in 0..=d {
            for j in i..=d {
                for a in 0..self.rank(i) {
                    for b in 0..self.rank(j) {
                        if self.basis_product(i, a, j, b) != self.basis_product(j, b, i, a) {
                            return Err(ChowError::InvalidDatum(format!(
                                "{}: {}·{} is not commutative",
                                self.name, self.labels[i][a], self.labels[j][b]
                            )));
                        }
                    }
                }
            }
        }
        for i in 1..=d {
            for j in 1..=d - i {
                for k in 1..=d - i - j {
                    for a in 0..self.rank(i) {
                        for b in 0..self.rank(j) {
                            let ab = self.basis_product(i, a, j, b).to_vec();
                            for c in 0..self.rank(k) {
                                let left = self.mul_coeffs(i + j, &ab, k, &unit_vec(self.rank(k), c));
                                let bc = self.basis_product(j, b, k, c).to_vec();
                                let right = self.mul_coeffs(i, &unit_vec(self.rank(i), a), j + k, &bc);
                                if left != right {
                                    return Err(ChowError::InvalidDatum(format!(
                                        "{}: ({}·{})·{} differs from {}·({}·{})",
                                        self.name,
                                        self.labels[i][a],
                                        self.labels[j][b],
                                        self.labels[k][c],
                                        self.labels[i][a],
                                        self.labels[j][b],
                                        self.labels[k][c]
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_kunneth(&self) -> Result<()> {
        let d = self.dim;
        for i in 0..=d {
            let p = &self.pairing[i];
            if p.rows() != p.cols() || p.inverse().is_none() {
                return Err(ChowError::InvalidDatum(format!(
                    "{}: Poincaré pairing between CH^{i} and CH^{} is degenerate",
                    self.name,
                    d - i
                )));
            }
        }
        let pairs = self.kunneth.as_deref().unwrap_or_default();
        for j in 0..=d {
            for x in 0..self.rank(j) {
                let xv = unit_vec(self.rank(j), x);
                let mut image = zero_vec(self.rank(j));
                for pair in pairs.iter().filter(|p| p.codim == d - j) {
                    let s = self.degree_coeffs(d, &self.mul_coeffs(j, &xv, pair.codim, &pair.left));
                    axpy(&mut image, &s, &pair.right);
                }
                if image != xv {
                    return Err(ChowError::InvalidDatum(format!(
                        "{}: diagonal does not act as identity on {}",
                        self.name, self.labels[j][x]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rank of `CH^codim`; zero above the dimension.
    pub fn rank(&self, codim: usize) -> usize {
        if codim <= self.dim {
            self.labels[codim].len()
        } else {
            0
        }
    }

    pub fn ranks(&self) -> Vec<usize> {
        (0..=self.dim).map(|i| self.rank(i)).collect()
    }

    pub fn total_rank(&self) -> usize {
        self.ranks().iter().sum()
    }

    pub fn labels(&self, codim: usize) -> &[String] {
        &self.labels[codim]
    }

    pub fn degree_functional(&self) -> &[Rational] {
        &self.degree
    }

    pub fn kunneth(&self) -> Option<&[KunnethPair]> {
        self.kunneth.as_deref()
    }

    pub fn is_cellular(&self) -> bool {
        self.cellular
    }

    pub fn factors(&self) -> Option<&(Arc<ChowDatum>, Arc<ChowDatum>)> {
        self.factors.as_ref()
    }

    pub fn mult_table(&self, i: usize, j: usize) -> &RatMatrix {
        &self.mult[i][j]
    }

    /// Coefficients of `b_a · b_b` for basis elements `a ∈ CH^i`, `b ∈ CH^j`.
    pub fn basis_product(&self, i: usize, a: usize, j: usize, b: usize) -> &[Rational] {
        self.mult[i][j].row(a * self.rank(j) + b)
    }

    /// `x · y` on coefficient vectors; the result lives in `CH^{i+j}`.
    pub fn mul_coeffs(&self, i: usize, x: &[Rational], j: usize, y: &[Rational]) -> Vec<Rational> {
        let mut out = zero_vec(self.rank(i + j));
        if i + j > self.dim {
            return out;
        }
        let nj = self.rank(j);
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                axpy(&mut out, &(xa * yb), self.mult[i][j].row(a * nj + b));
            }
        }
        out
    }

    /// Degree of a class of codimension `codim`; zero unless `codim == d`.
    pub fn degree_coeffs(&self, codim: usize, x: &[Rational]) -> Rational {
        if codim == self.dim {
            dot(x, &self.degree)
        } else {
            Rational::zero()
        }
    }

    /// `pairing(i)[a][b] = deg(b_a · b_b)` for `a ∈ CH^i`, `b ∈ CH^{d-i}`.
    pub fn pairing(&self, i: usize) -> &RatMatrix {
        &self.pairing[i]
    }

    /// First codimension-`d` basis class of nonzero degree, normalized to
    /// degree one.
    pub fn point_class(self: &Arc<Self>) -> Option<Class> {
        let d = self.dim;
        let idx = self.degree.iter().position(|q| !q.is_zero())?;
        let coeffs = scale_vec(&self.degree[idx].recip(), &unit_vec(self.rank(d), idx));
        Some(Class {
            datum: self.clone(),
            codim: d,
            coeffs,
        })
    }

    pub fn has_kunneth(&self) -> bool {
        self.kunneth.is_some()
    }

    pub(crate) fn require_kunneth(&self) -> Result<&[KunnethPair]> {
        self.kunneth.as_deref().ok_or_else(|| {
            ChowError::UnsupportedDatum(format!("{} carries no strong Künneth decomposition", self.name))
        })
    }

    /// Position of `a ⊗ b` (with `a ∈ CH^i` of the left factor) inside
    /// `CH^k` of a product datum.
    pub fn product_index(&self, k: usize, i: usize, a: usize, b: usize) -> Option<usize> {
        let (x, y) = self.factors.as_ref()?;
        let off = product_offset(x, y, k, i)?;
        Some(off + a * y.rank(k - i) + b)
    }
}

fn product_offset(x: &ChowDatum, y: &ChowDatum, k: usize, i: usize) -> Option<usize> {
    if i > k || i > x.dim() || k - i > y.dim() {
        return None;
    }
    let lo = k.saturating_sub(y.dim());
    Some((lo..i).map(|p| x.rank(p) * y.rank(k - p)).sum())
}

/// Renders a coefficient vector as a combination of labels.
pub fn format_combination(labels: &[String], coeffs: &[Rational]) -> String {
    let mut out = String::new();
    for (label, q) in labels.iter().zip(coeffs) {
        if q.is_zero() {
            continue;
        }
        let negative = q < &Rational::zero();
        let mag = if negative { -q.clone() } else { q.clone() };
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if !mag.is_one() {
            out.push_str(&fmt_rational(&mag));
            out.push('*');
        }
        out.push_str(label);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// A homogeneous class of codimension `codim` on `datum`.
#[derive(Clone)]
pub struct Class {
    datum: Arc<ChowDatum>,
    codim: usize,
    coeffs: Vec<Rational>,
}

impl PartialEq for Class {
    fn eq(&self, other: &Self) -> bool {
        self.codim == other.codim && self.coeffs == other.coeffs && same_datum(&self.datum, &other.datum)
    }
}

impl fmt::Debug for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [CH^{}({})]", self, self.codim, self.datum.name())
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.codim > self.datum.dim() {
            return write!(f, "0");
        }
        write!(f, "{}", format_combination(self.datum.labels(self.codim), &self.coeffs))
    }
}

impl Class {
    pub fn new(datum: &Arc<ChowDatum>, codim: usize, coeffs: Vec<Rational>) -> Result<Class> {
        if coeffs.len() != datum.rank(codim) {
            return Err(ChowError::AmbientMismatch(format!(
                "{} coefficients for CH^{codim}({}) of rank {}",
                coeffs.len(),
                datum.name(),
                datum.rank(codim)
            )));
        }
        Ok(Class {
            datum: datum.clone(),
            codim,
            coeffs,
        })
    }

    pub fn basis(datum: &Arc<ChowDatum>, codim: usize, idx: usize) -> Class {
        Class {
            datum: datum.clone(),
            codim,
            coeffs: unit_vec(datum.rank(codim), idx),
        }
    }

    pub fn zero(datum: &Arc<ChowDatum>, codim: usize) -> Class {
        Class {
            datum: datum.clone(),
            codim,
            coeffs: zero_vec(datum.rank(codim)),
        }
    }

    /// Fundamental class `[X]`.
    pub fn unit(datum: &Arc<ChowDatum>) -> Class {
        Class::basis(datum, 0, 0)
    }

    pub fn datum(&self) -> &Arc<ChowDatum> {
        &self.datum
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.coeffs)
    }

    pub fn mul(&self, other: &Class) -> Result<Class> {
        ensure_same(&self.datum, &other.datum, "product of classes")?;
        Ok(Class {
            datum: self.datum.clone(),
            codim: self.codim + other.codim,
            coeffs: self
                .datum
                .mul_coeffs(self.codim, &self.coeffs, other.codim, &other.coeffs),
        })
    }

    /// Pushforward to the point; zero unless the class is zero-dimensional.
    pub fn degree(&self) -> Rational {
        self.datum.degree_coeffs(self.codim, &self.coeffs)
    }

    pub fn add(&self, other: &Class) -> Result<Class> {
        ensure_same(&self.datum, &other.datum, "sum of classes")?;
        if self.codim != other.codim {
            return Err(ChowError::AmbientMismatch(format!(
                "adding classes of codimension {} and {}",
                self.codim, other.codim
            )));
        }
        Ok(Class {
            datum: self.datum.clone(),
            codim: self.codim,
            coeffs: add_vec(&self.coeffs, &other.coeffs),
        })
    }

    pub fn scale(&self, s: &Rational) -> Class {
        Class {
            datum: self.datum.clone(),
            codim: self.codim,
            coeffs: scale_vec(s, &self.coeffs),
        }
    }
}

/// Builtin model of `P^n`: `CH^i = Q·ℓ^i`, `deg ℓ^n = 1`, diagonal
/// `Σ ℓ^i × ℓ^{n-i}`.
pub fn projective_space(n: usize) -> Arc<ChowDatum> {
    let rank = |k: usize| usize::from(k <= n);
    let labels = (0..=n)
        .map(|i| {
            vec![match i {
                0 => "1".to_string(),
                1 => "l".to_string(),
                _ => format!("l^{i}"),
            }]
        })
        .collect();
    let mult = (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| RatMatrix::from_fn(1, rank(i + j), |_, _| Rational::one()))
                .collect()
        })
        .collect();
    let kunneth = (0..=n)
        .map(|i| KunnethPair {
            codim: i,
            left: vec![Rational::one()],
            right: vec![Rational::one()],
        })
        .collect();
    let parts = DatumParts {
        name: format!("P^{n}"),
        labels,
        mult,
        degree: vec![Rational::one()],
        kunneth: Some(kunneth),
        cellular: true,
    };
    ChowDatum::new(parts).expect("projective space tables are valid")
}

/// Graded tensor product `CH(X) ⊗ CH(Y)`, modelling `CH(X × Y)` for data
/// with a strong Künneth decomposition.
pub fn product(x: &Arc<ChowDatum>, y: &Arc<ChowDatum>) -> Result<Arc<ChowDatum>> {
    let kx = x.require_kunneth()?;
    let ky = y.require_kunneth()?;
    let (dx, dy) = (x.dim(), y.dim());
    let d = dx + dy;
    // basis of CH^k: (i, a, b) with a ∈ CH^i(X), b ∈ CH^{k-i}(Y)
    let basis: Vec<Vec<(usize, usize, usize)>> = (0..=d)
        .map(|k| {
            let mut v = Vec::new();
            for i in k.saturating_sub(dy)..=k.min(dx) {
                for a in 0..x.rank(i) {
                    for b in 0..y.rank(k - i) {
                        v.push((i, a, b));
                    }
                }
            }
            v
        })
        .collect();
    let rank = |k: usize| if k <= d { basis[k].len() } else { 0 };
    let labels = basis
        .iter()
        .enumerate()
        .map(|(k, terms)| {
            terms
                .iter()
                .map(|&(i, a, b)| format!("{}⊗{}", x.labels(i)[a], y.labels(k - i)[b]))
                .collect()
        })
        .collect();
    let index = |k: usize, i: usize, a: usize, b: usize| -> usize {
        product_offset(x, y, k, i).expect("index in range") + a * y.rank(k - i) + b
    };
    // tensor of coefficient vectors living in CH^p(X) and CH^q(Y)
    let tensor = |p: usize, u: &[Rational], q: usize, w: &[Rational]| -> Vec<Rational> {
        let k = p + q;
        let mut out = zero_vec(rank(k));
        for (a, ua) in u.iter().enumerate() {
            if ua.is_zero() {
                continue;
            }
            for (b, wb) in w.iter().enumerate() {
                if !wb.is_zero() {
                    out[index(k, p, a, b)] += ua * wb;
                }
            }
        }
        out
    };
    let mult = (0..=d)
        .map(|k1| {
            (0..=d)
                .map(|k2| {
                    let rows: Vec<Vec<Rational>> = basis[k1]
                        .iter()
                        .flat_map(|&(i1, a1, b1)| {
                            basis[k2].iter().map(move |&(i2, a2, b2)| (i1, a1, b1, i2, a2, b2))
                        })
                        .map(|(i1, a1, b1, i2, a2, b2)| {
                            if k1 + k2 > d || i1 + i2 > dx || (k1 - i1) + (k2 - i2) > dy {
                                return zero_vec(rank(k1 + k2));
                            }
                            let xa = x.basis_product(i1, a1, i2, a2);
                            let yb = y.basis_product(k1 - i1, b1, k2 - i2, b2);
                            tensor(i1 + i2, xa, k1 + k2 - i1 - i2, yb)
                        })
                        .collect();
                    RatMatrix::from_rows(rows, rank(k1 + k2)).expect("consistent widths")
                })
                .collect()
        })
        .collect();
    let degree = basis[d]
        .iter()
        .map(|&(_, a, b)| &x.degree_functional()[a] * &y.degree_functional()[b])
        .collect();
    let mut kunneth = Vec::new();
    for p in kx {
        for q in ky {
            kunneth.push(KunnethPair {
                codim: p.codim + q.codim,
                left: tensor(p.codim, &p.left, q.codim, &q.left),
                right: tensor(dx - p.codim, &p.right, dy - q.codim, &q.right),
            });
        }
    }
    let parts = DatumParts {
        name: format!("{}x{}", x.name(), y.name()),
        labels,
        mult,
        degree,
        kunneth: Some(kunneth),
        cellular: x.is_cellular() && y.is_cellular(),
    };
    ChowDatum::build(parts, Some((x.clone(), y.clone())))
}

/// Pullback/pushforward pair of a morphism `source -> target`.
///
/// `pullback[i]` maps `CH^i(target)` into `CH^i(source)`; `pushforward[i]`
/// maps `CH^i(source)` into `CH^{i-s}(target)` where `s = d_source - d_target`.
#[derive(Clone)]
pub struct MorphismDatum {
    source: Arc<ChowDatum>,
    target: Arc<ChowDatum>,
    pullback: Vec<RatMatrix>,
    pushforward: Vec<RatMatrix>,
    degree: Rational,
}

impl fmt::Debug for MorphismDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MorphismDatum({} -> {}, degree {})",
            self.source.name(),
            self.target.name(),
            fmt_rational(&self.degree)
        )
    }
}

impl PartialEq for MorphismDatum {
    fn eq(&self, other: &Self) -> bool {
        same_datum(&self.source, &other.source)
            && same_datum(&self.target, &other.target)
            && self.pullback == other.pullback
            && self.pushforward == other.pushforward
            && self.degree == other.degree
    }
}

impl MorphismDatum {
    pub fn new(
        source: &Arc<ChowDatum>,
        target: &Arc<ChowDatum>,
        pullback: Vec<RatMatrix>,
        pushforward: Vec<RatMatrix>,
        degree: Rational,
    ) -> Result<MorphismDatum> {
        let bad = |msg: String| ChowError::InvalidMorphism(format!("{} -> {}: {msg}", source.name(), target.name()));
        if source.dim() < target.dim() {
            return Err(bad("source dimension below target dimension".into()));
        }
        if degree <= Rational::zero() {
            return Err(bad("generic degree must be positive".into()));
        }
        let shift = source.dim() - target.dim();
        if pullback.len() != target.dim() + 1 || pushforward.len() != source.dim() + 1 {
            return Err(bad("wrong number of graded pieces".into()));
        }
        for (i, m) in pullback.iter().enumerate() {
            if (m.rows(), m.cols()) != (source.rank(i), target.rank(i)) {
                return Err(bad(format!("pullback on CH^{i} has the wrong shape")));
            }
        }
        for (i, m) in pushforward.iter().enumerate() {
            let rows = if i >= shift { target.rank(i - shift) } else { 0 };
            if (m.rows(), m.cols()) != (rows, source.rank(i)) {
                return Err(bad(format!("pushforward on CH^{i} has the wrong shape")));
            }
        }
        let f = MorphismDatum {
            source: source.clone(),
            target: target.clone(),
            pullback,
            pushforward,
            degree,
        };
        f.check_contract().map_err(bad)?;
        Ok(f)
    }

    fn check_contract(&self) -> std::result::Result<(), String> {
        let (s, t) = (&self.source, &self.target);
        if self.pull_coeffs(0, &[Rational::one()]) != unit_vec(1, 0) {
            return Err("pullback does not preserve the fundamental class".into());
        }
        for i in 0..=t.dim() {
            for j in 0..=t.dim() - i {
                for a in 0..t.rank(i) {
                    for b in 0..t.rank(j) {
                        let lhs = self.pull_coeffs(i + j, t.basis_product(i, a, j, b));
                        let rhs = s.mul_coeffs(
                            i,
                            self.pullback[i].col(a).as_slice(),
                            j,
                            self.pullback[j].col(b).as_slice(),
                        );
                        if lhs != rhs {
                            return Err(format!(
                                "pullback is not multiplicative on {}·{}",
                                t.labels(i)[a],
                                t.labels(j)[b]
                            ));
                        }
                    }
                }
            }
        }
        // projection formula f_*(f^*y · x) = y · f_*x
        for j in 0..=t.dim() {
            for b in 0..t.rank(j) {
                let fy = self.pullback[j].col(b);
                let y = unit_vec(t.rank(j), b);
                for i in 0..=s.dim() {
                    if i + j > s.dim() {
                        continue;
                    }
                    for a in 0..s.rank(i) {
                        let x = unit_vec(s.rank(i), a);
                        let (_, lhs) = self.push_coeffs(i + j, &s.mul_coeffs(j, &fy, i, &x));
                        let rhs = match self.push_coeffs(i, &x) {
                            (Some(c), fx) => t.mul_coeffs(j, &y, c, &fx),
                            (None, _) => zero_vec(lhs.len()),
                        };
                        if lhs != rhs {
                            return Err(format!(
                                "projection formula fails for y = {}, x = {}",
                                t.labels(j)[b],
                                s.labels(i)[a]
                            ));
                        }
                    }
                }
            }
        }
        if s.dim() == t.dim() {
            for i in 0..=t.dim() {
                let composite = &self.pushforward[i] * &self.pullback[i];
                if composite != RatMatrix::identity(t.rank(i)).scale(&self.degree) {
                    return Err(format!("pushforward∘pullback is not degree·identity on CH^{i}"));
                }
            }
        }
        Ok(())
    }

    pub fn identity(datum: &Arc<ChowDatum>) -> MorphismDatum {
        let maps: Vec<RatMatrix> = datum.ranks().into_iter().map(RatMatrix::identity).collect();
        MorphismDatum {
            source: datum.clone(),
            target: datum.clone(),
            pullback: maps.clone(),
            pushforward: maps,
            degree: Rational::one(),
        }
    }

    /// `self ∘ inner` where `inner: Z -> source(self)`.
    pub fn compose(&self, inner: &MorphismDatum) -> Result<MorphismDatum> {
        ensure_same(&inner.target, &self.source, "composing morphisms")?;
        let pullback = (0..=self.target.dim())
            .map(|i| &inner.pullback[i] * &self.pullback[i])
            .collect();
        let s_inner = inner.shift();
        let pushforward = (0..=inner.source.dim())
            .map(|i| {
                if i >= s_inner && i - s_inner >= self.shift() {
                    &self.pushforward[i - s_inner] * &inner.pushforward[i]
                } else {
                    RatMatrix::zeros(0, inner.source.rank(i))
                }
            })
            .collect();
        MorphismDatum::new(
            &inner.source,
            &self.target,
            pullback,
            pushforward,
            &self.degree * &inner.degree,
        )
    }

    pub fn source(&self) -> &Arc<ChowDatum> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ChowDatum> {
        &self.target
    }

    pub fn generic_degree(&self) -> &Rational {
        &self.degree
    }

    /// `d_source - d_target`.
    pub fn shift(&self) -> usize {
        self.source.dim() - self.target.dim()
    }

    pub fn pullback_matrix(&self, codim: usize) -> &RatMatrix {
        &self.pullback[codim]
    }

    pub fn pushforward_matrix(&self, codim: usize) -> &RatMatrix {
        &self.pushforward[codim]
    }

    pub fn pull_coeffs(&self, codim: usize, y: &[Rational]) -> Vec<Rational> {
        if codim > self.target.dim() {
            return Vec::new();
        }
        self.pullback[codim].mul_vec(y)
    }

    /// Pushforward of a codim-`codim` vector; the codimension is `None` when
    /// the image lands in negative codimension (and is therefore zero).
    pub fn push_coeffs(&self, codim: usize, x: &[Rational]) -> (Option<usize>, Vec<Rational>) {
        if codim > self.source.dim() {
            return (None, Vec::new());
        }
        let c = codim.checked_sub(self.shift());
        (c, self.pushforward[codim].mul_vec(x))
    }

    pub fn pullback(&self, y: &Class) -> Result<Class> {
        ensure_same(y.datum(), &self.target, "pullback")?;
        Class::new(&self.source, y.codim(), self.pull_coeffs(y.codim(), y.coeffs()))
    }

    pub fn pushforward(&self, x: &Class) -> Result<Class> {
        ensure_same(x.datum(), &self.source, "pushforward")?;
        match self.push_coeffs(x.codim(), x.coeffs()) {
            (Some(c), v) => Class::new(&self.target, c, v),
            (None, _) => Err(ChowError::AmbientMismatch(format!(
                "pushforward of a codimension-{} class lands below codimension 0",
                x.codim()
            ))),
        }
    }
}

/// A finite group acting on a datum by graded ring automorphisms; each
/// element is stored as one matrix per codimension acting on coefficient
/// columns.
#[derive(Clone)]
pub struct GroupActionDatum {
    datum: Arc<ChowDatum>,
    elements: Vec<Vec<RatMatrix>>,
}

impl fmt::Debug for GroupActionDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupActionDatum(order {} on {})", self.order(), self.datum.name())
    }
}

impl GroupActionDatum {
    pub fn new(datum: &Arc<ChowDatum>, elements: Vec<Vec<RatMatrix>>) -> Result<GroupActionDatum> {
        let bad = |msg: String| ChowError::InvalidAction(format!("on {}: {msg}", datum.name()));
        let d = datum.dim();
        let identity: Vec<RatMatrix> = datum.ranks().into_iter().map(RatMatrix::identity).collect();
        for (g, el) in elements.iter().enumerate() {
            if el.len() != d + 1 || el.iter().enumerate().any(|(i, m)| m.rows() != datum.rank(i) || m.cols() != datum.rank(i)) {
                return Err(bad(format!("element {g} has the wrong shape")));
            }
            if el.iter().any(|m| m.inverse().is_none()) {
                return Err(bad(format!("element {g} is not invertible")));
            }
            if el[0] != RatMatrix::identity(1) {
                return Err(bad(format!("element {g} moves the fundamental class")));
            }
            for a in 0..datum.rank(d) {
                let moved = el[d].col(a);
                if dot(&moved, datum.degree_functional()) != datum.degree_functional()[a] {
                    return Err(bad(format!("element {g} does not preserve degrees")));
                }
            }
            for i in 0..=d {
                for j in 0..=d - i {
                    for a in 0..datum.rank(i) {
                        for b in 0..datum.rank(j) {
                            let lhs = el[i + j].mul_vec(datum.basis_product(i, a, j, b));
                            let rhs = datum.mul_coeffs(i, &el[i].col(a), j, &el[j].col(b));
                            if lhs != rhs {
                                return Err(bad(format!("element {g} is not multiplicative")));
                            }
                        }
                    }
                }
            }
        }
        if !elements.contains(&identity) {
            return Err(bad("identity element missing".into()));
        }
        for g in &elements {
            for h in &elements {
                let gh: Vec<RatMatrix> = g.iter().zip(h).map(|(a, b)| a * b).collect();
                if !elements.contains(&gh) {
                    return Err(bad("element list is not closed under composition".into()));
                }
            }
        }
        Ok(GroupActionDatum {
            datum: datum.clone(),
            elements,
        })
    }

    pub fn trivial(datum: &Arc<ChowDatum>) -> GroupActionDatum {
        GroupActionDatum {
            datum: datum.clone(),
            elements: vec![datum.ranks().into_iter().map(RatMatrix::identity).collect()],
        }
    }

    /// Exchange of factors on `S × S`.
    pub fn swap(datum: &Arc<ChowDatum>) -> Result<GroupActionDatum> {
        let Some((x, y)) = datum.factors() else {
            return Err(ChowError::InvalidAction(format!("{} is not a product", datum.name())));
        };
        if !same_datum(x, y) {
            return Err(ChowError::InvalidAction(format!(
                "swap needs equal factors, found {} and {}",
                x.name(),
                y.name()
            )));
        }
        let swap: Vec<RatMatrix> = (0..=datum.dim())
            .map(|k| {
                let mut m = RatMatrix::zeros(datum.rank(k), datum.rank(k));
                for i in k.saturating_sub(y.dim())..=k.min(x.dim()) {
                    for a in 0..x.rank(i) {
                        for b in 0..y.rank(k - i) {
                            let from = datum.product_index(k, i, a, b).expect("in range");
                            let to = datum.product_index(k, k - i, b, a).expect("in range");
                            m[(to, from)] = Rational::one();
                        }
                    }
                }
                m
            })
            .collect();
        let identity = datum.ranks().into_iter().map(RatMatrix::identity).collect();
        GroupActionDatum::new(datum, vec![identity, swap])
    }

    pub fn datum(&self) -> &Arc<ChowDatum> {
        &self.datum
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Vec<RatMatrix>] {
        &self.elements
    }

    /// Averaging projector `(1/|G|) Σ g` on `CH^codim`.
    pub fn averaging_projector(&self, codim: usize) -> RatMatrix {
        let n = self.datum.rank(codim);
        let sum = self
            .elements
            .iter()
            .fold(RatMatrix::zeros(n, n), |acc, g| &acc + &g[codim]);
        sum.scale(&Rational::new(1.into(), (self.order() as i64).into()))
    }
}

/// Invariant basis of one graded piece: reduced echelon rows of the image of
/// the averaging projector, with their pivot columns.
struct InvariantBasis {
    vectors: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

impl InvariantBasis {
    fn new(projector: &RatMatrix) -> Self {
        let (red, pivots) = projector.transpose().rref();
        let vectors = (0..pivots.len()).map(|r| red.row(r).to_vec()).collect();
        InvariantBasis { vectors, pivots }
    }

    /// Coordinates of an invariant vector; exact because echelon rows carry
    /// a 1 at their own pivot and 0 at every other pivot.
    fn coords(&self, v: &[Rational]) -> Vec<Rational> {
        self.pivots.iter().map(|&p| v[p].clone()).collect()
    }
}

/// Invariant subring `CH(X)^G`, modelling `CH(X/G)`, together with the
/// quotient morphism `q: X -> X/G` of generic degree `|G|`.
pub fn quotient(action: &GroupActionDatum) -> Result<(Arc<ChowDatum>, MorphismDatum)> {
    let ambient = action.datum();
    let d = ambient.dim();
    let order = int(action.order() as i64);
    let projectors: Vec<RatMatrix> = (0..=d).map(|i| action.averaging_projector(i)).collect();
    let bases: Vec<InvariantBasis> = projectors.iter().map(InvariantBasis::new).collect();
    let rank = |k: usize| if k <= d { bases[k].vectors.len() } else { 0 };
    let labels = (0..=d)
        .map(|i| {
            bases[i]
                .vectors
                .iter()
                .map(|v| format_combination(ambient.labels(i), v))
                .collect()
        })
        .collect();
    let mult = (0..=d)
        .map(|i| {
            (0..=d)
                .map(|j| {
                    let rows = bases[i]
                        .vectors
                        .iter()
                        .flat_map(|u| bases[j].vectors.iter().map(move |v| (u, v)))
                        .map(|(u, v)| {
                            if i + j > d {
                                Vec::new()
                            } else {
                                bases[i + j].coords(&ambient.mul_coeffs(i, u, j, v))
                            }
                        })
                        .collect();
                    RatMatrix::from_rows(rows, rank(i + j)).expect("consistent widths")
                })
                .collect()
        })
        .collect();
    let inv_order = order.recip();
    let degree = bases[d]
        .vectors
        .iter()
        .map(|v| &inv_order * ambient.degree_coeffs(d, v))
        .collect();
    // |G| · (P ⊗ P) applied to the ambient diagonal, in invariant coordinates
    let kunneth = ambient.kunneth().map(|pairs| {
        let mut blocks: Vec<RatMatrix> = (0..=d).map(|p| RatMatrix::zeros(rank(p), rank(d - p))).collect();
        for pair in pairs {
            let l = bases[pair.codim].coords(&projectors[pair.codim].mul_vec(&pair.left));
            let r = bases[d - pair.codim].coords(&projectors[d - pair.codim].mul_vec(&pair.right));
            blocks[pair.codim] = &blocks[pair.codim] + &RatMatrix::outer(&l, &r).scale(&order);
        }
        blocks
            .iter()
            .enumerate()
            .flat_map(|(p, m)| {
                (0..m.rows()).filter(|&a| !is_zero_vec(m.row(a))).map(move |a| KunnethPair {
                    codim: p,
                    left: unit_vec(m.rows(), a),
                    right: m.row(a).to_vec(),
                })
            })
            .collect::<Vec<_>>()
    });
    let parts = DatumParts {
        name: format!("({})/G{}", ambient.name(), action.order()),
        labels,
        mult,
        degree,
        kunneth,
        cellular: ambient.is_cellular(),
    };
    let datum = match ChowDatum::new(parts.clone()) {
        Ok(datum) => datum,
        Err(ChowError::InvalidDatum(_)) if parts.kunneth.is_some() => ChowDatum::new(DatumParts {
            kunneth: None,
            ..parts
        })?,
        Err(e) => return Err(e),
    };
    let pullback = (0..=d)
        .map(|i| RatMatrix::from_columns(&bases[i].vectors, ambient.rank(i)))
        .collect();
    let pushforward = (0..=d)
        .map(|i| {
            RatMatrix::from_fn(rank(i), ambient.rank(i), |r, c| {
                let col = projectors[i].col(c);
                &order * &col[bases[i].pivots[r]]
            })
        })
        .collect();
    let q = MorphismDatum::new(ambient, &datum, pullback, pushforward, order)?;
    Ok((datum, q))
}
