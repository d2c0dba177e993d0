//! Verification of Chow–Künneth axioms, Poincaré duality and Murre's
//! conjectures B, B′, C and D on a concrete decomposition.

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::chowring::{ensure_same, format_combination, Class};
use crate::correspond::{diagonal, CKDecomposition, Correspondence};
use crate::error::{ChowError, Result};
use crate::exactlin::{kernel, RatMatrix, Subspace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed: true,
            witness: None,
        }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed: false,
            witness: Some(witness.into()),
        }
    }

    /// Passes when `failures` is empty; otherwise the first few failures
    /// become the witness.
    fn from_failures(name: impl Into<String>, failures: Vec<String>) -> Check {
        if failures.is_empty() {
            return Check::pass(name);
        }
        let shown: Vec<&str> = failures.iter().take(3).map(String::as_str).collect();
        let mut witness = shown.join("; ");
        if failures.len() > shown.len() {
            witness.push_str(&format!("; and {} more", failures.len() - shown.len()));
        }
        Check::fail(name, witness)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn overall(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name)?;
            if let Some(w) = &c.witness {
                write!(f, ": {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Descending chain `F^0 ⊇ F^1 ⊇ ...` inside `CH^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    pub codim: usize,
    pub chain: Vec<Subspace>,
}

impl Filtration {
    /// Level `k`; levels past the end repeat the last one.
    pub fn level(&self, k: usize) -> &Subspace {
        &self.chain[k.min(self.chain.len() - 1)]
    }
}

/// Holds a decomposition and lazily computed action matrices of every
/// projector on every `CH^j`.
pub struct Verifier<'a> {
    dec: &'a CKDecomposition,
    actions: OnceLock<Vec<Vec<RatMatrix>>>,
}

impl<'a> Verifier<'a> {
    pub fn new(dec: &'a CKDecomposition) -> Self {
        Verifier {
            dec,
            actions: OnceLock::new(),
        }
    }

    fn d(&self) -> usize {
        self.dec.datum().dim()
    }

    /// `actions[i][j]` is the matrix of `π_i` on `CH^j`.
    fn actions(&self) -> &[Vec<RatMatrix>] {
        self.actions.get_or_init(|| {
            let d = self.d();
            self.dec
                .projectors()
                .par_iter()
                .map(|p| {
                    (0..=d)
                        .map(|j| p.action_matrix(j).expect("codim-d self-correspondence"))
                        .collect()
                })
                .collect()
        })
    }

    pub fn action(&self, i: usize, j: usize) -> &RatMatrix {
        &self.actions()[i][j]
    }

    pub fn verify_ck(&self) -> VerificationReport {
        let dec = self.dec;
        let x = dec.datum();
        let d = self.d();
        let n = dec.projectors().len();
        let mut report = VerificationReport::default();

        report.checks.push(match diagonal(x) {
            Ok(delta) => {
                let diff = delta.sub(&dec.total()).expect("same ambient");
                if diff.is_zero() {
                    Check::pass("sum equals diagonal")
                } else {
                    Check::fail("sum equals diagonal", format!("Δ - Σπ_i = {diff}"))
                }
            }
            Err(e) => Check::fail("sum equals diagonal", e.to_string()),
        });

        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        let products: Vec<((usize, usize), Correspondence)> = pairs
            .par_iter()
            .map(|&(i, j)| ((i, j), dec.projector(i).compose(dec.projector(j)).expect("same ambient")))
            .collect();
        let mut idem = Vec::new();
        let mut orth = Vec::new();
        for ((i, j), prod) in &products {
            if i == j {
                if prod != dec.projector(*i) {
                    idem.push(format!("π_{i}•π_{i} - π_{i} = {}", prod.sub(dec.projector(*i)).expect("same ambient")));
                }
            } else if !prod.is_zero() {
                orth.push(format!("π_{i}•π_{j} = {prod}"));
            }
        }
        report.checks.push(Check::from_failures("idempotence", idem));
        report.checks.push(Check::from_failures("orthogonality", orth));

        let mut types = Vec::new();
        for (i, p) in dec.projectors().iter().enumerate() {
            let allowed = (i % 2 == 0).then(|| d - i / 2);
            for (block, m) in p.blocks().iter().enumerate() {
                if Some(block) != allowed && !m.is_zero() {
                    types.push(format!(
                        "π_{i} has terms of codimension type ({block}, {})",
                        d - block
                    ));
                }
            }
        }
        report.checks.push(Check::from_failures("grading type", types));
        report
    }

    pub fn check_poincare(&self) -> VerificationReport {
        let dec = self.dec;
        let n = dec.projectors().len();
        let failures = (0..n)
            .filter(|&i| dec.projector(i).transpose() != *dec.projector(n - 1 - i))
            .map(|i| format!("π_{i}^t ≠ π_{}", n - 1 - i))
            .collect();
        VerificationReport {
            checks: vec![Check::from_failures("Poincaré duality", failures)],
        }
    }

    fn vanishing(&self, name: &str, range: impl Fn(usize, usize) -> bool) -> VerificationReport {
        let dec = self.dec;
        let x = dec.datum();
        let d = self.d();
        let mut failures = Vec::new();
        for i in 0..dec.projectors().len() {
            for j in 0..=d {
                if !range(i, j) {
                    continue;
                }
                let m = self.action(i, j);
                for a in 0..x.rank(j) {
                    let image = m.col(a);
                    if image.iter().any(|q| !num_traits::Zero::is_zero(q)) {
                        let out = x.labels(j);
                        failures.push(format!(
                            "π_{i} sends {} to {}",
                            Class::basis(x, j, a),
                            format_combination(out, &image)
                        ));
                    }
                }
            }
        }
        VerificationReport {
            checks: vec![Check::from_failures(name, failures)],
        }
    }

    /// `π_i` acts as zero on `CH^j` for `i < j` or `i > 2j`.
    pub fn check_b(&self) -> VerificationReport {
        self.vanishing("Murre B", |i, j| i < j || i > 2 * j)
    }

    /// `π_i` acts as zero on `CH^j` for `i < j` or `i > j + d`.
    pub fn check_bprime(&self) -> VerificationReport {
        let d = self.d();
        self.vanishing("Murre B′", move |i, j| i < j || i > j + d)
    }

    /// `F^k CH^j = ker(π_{2j+1-k}) ∩ F^{k-1}` for `k = 1..=2j+1`, with
    /// repeated trailing levels dropped.
    pub fn filtration(&self, j: usize) -> Filtration {
        let n = self.dec.datum().rank(j);
        let mut chain = vec![Subspace::full(n)];
        for k in 1..=2 * j + 1 {
            let idx = 2 * j + 1 - k;
            let prev = chain.last().expect("nonempty");
            let next = if idx < self.dec.projectors().len() {
                let ker = Subspace::span(n, &kernel(self.action(idx, j))).expect("kernel vectors have length n");
                prev.intersect(&ker).expect("same ambient")
            } else {
                prev.clone()
            };
            chain.push(next);
        }
        while chain.len() > 1 && chain[chain.len() - 1] == chain[chain.len() - 2] {
            chain.pop();
        }
        Filtration { codim: j, chain }
    }

    pub fn filtrations(&self) -> Vec<Filtration> {
        (0..=self.d()).map(|j| self.filtration(j)).collect()
    }

    /// `F^1 CH^j = 0` for every `j`, the cellular form of conjecture D.
    pub fn check_d_cellular(&self) -> Result<VerificationReport> {
        let x = self.dec.datum();
        if !x.is_cellular() {
            return Err(ChowError::UnsupportedDatum(format!(
                "{} is not cellular; homological triviality is not modelled",
                x.name()
            )));
        }
        let failures = self
            .filtrations()
            .iter()
            .filter(|f| f.level(1).dim() != 0)
            .map(|f| {
                let basis: Vec<String> = f
                    .level(1)
                    .basis()
                    .iter()
                    .map(|v| format_combination(x.labels(f.codim), v))
                    .collect();
                format!("F^1 CH^{} = span{{{}}}", f.codim, basis.join(", "))
            })
            .collect();
        Ok(VerificationReport {
            checks: vec![Check::from_failures("Murre D (cellular)", failures)],
        })
    }
}

pub fn verify_ck(dec: &CKDecomposition) -> VerificationReport {
    Verifier::new(dec).verify_ck()
}

pub fn check_poincare(dec: &CKDecomposition) -> VerificationReport {
    Verifier::new(dec).check_poincare()
}

pub fn check_b(dec: &CKDecomposition) -> VerificationReport {
    Verifier::new(dec).check_b()
}

pub fn check_bprime(dec: &CKDecomposition) -> VerificationReport {
    Verifier::new(dec).check_bprime()
}

pub fn filtration(dec: &CKDecomposition, j: usize) -> Filtration {
    Verifier::new(dec).filtration(j)
}

pub fn check_d_cellular(dec: &CKDecomposition) -> Result<VerificationReport> {
    Verifier::new(dec).check_d_cellular()
}

/// Compares the filtrations induced by each variant, codimension by
/// codimension and level by level. Only agreement among the given variants
/// is tested.
pub fn check_c(variants: &[CKDecomposition]) -> Result<VerificationReport> {
    let Some(first) = variants.first() else {
        return Ok(VerificationReport {
            checks: vec![Check::pass("Murre C (no variants)")],
        });
    };
    for v in &variants[1..] {
        ensure_same(v.datum(), first.datum(), "filtration comparison")?;
    }
    let all: Vec<Vec<Filtration>> = variants.par_iter().map(|v| Verifier::new(v).filtrations()).collect();
    let d = first.datum().dim();
    let mut report = VerificationReport::default();
    for j in 0..=d {
        let mut failures = Vec::new();
        for (n, fs) in all.iter().enumerate().skip(1) {
            let (a, b) = (&all[0][j], &fs[j]);
            let depth = a.chain.len().max(b.chain.len());
            for k in 0..depth {
                if a.level(k) != b.level(k) {
                    failures.push(format!(
                        "variant {n} differs at F^{k}: dimension {} vs {}",
                        b.level(k).dim(),
                        a.level(k).dim()
                    ));
                }
            }
        }
        report
            .checks
            .push(Check::from_failures(format!("Murre C on CH^{j} (agreement among provided variants)"), failures));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::{blow_up, lift_ck};
    use crate::chowring::{projective_space, ChowDatum, DatumParts, KunnethPair};
    use crate::correspond::standard_decomposition;
    use crate::exactlin::{int, rat};
    use std::sync::Arc;

    #[test]
    fn projective_spaces_pass_everything() {
        for n in 0..=4 {
            let dec = standard_decomposition(&projective_space(n)).unwrap();
            let v = Verifier::new(&dec);
            assert!(v.verify_ck().overall(), "P^{n}: {}", v.verify_ck());
            assert!(v.check_poincare().overall());
            assert!(v.check_b().overall());
            assert!(v.check_bprime().overall());
            assert!(v.check_d_cellular().unwrap().overall());
        }
    }

    #[test]
    fn swapped_projectors_break_the_grading() {
        let x = projective_space(2);
        let mut ps = standard_decomposition(&x).unwrap().into_projectors();
        ps.swap(0, 1);
        let dec = CKDecomposition::new(&x, ps).unwrap();
        let report = verify_ck(&dec);
        let grading = report.checks.iter().find(|c| c.name == "grading type").unwrap();
        assert!(!grading.passed);
        assert!(grading.witness.as_ref().unwrap().contains("π_1"));
    }

    #[test]
    fn missing_piece_fails_the_sum() {
        let x = projective_space(2);
        let mut ps = standard_decomposition(&x).unwrap().into_projectors();
        ps[2] = Correspondence::zero(&x, &x, 2);
        let report = verify_ck(&CKDecomposition::new(&x, ps).unwrap());
        assert!(!report.checks[0].passed);
        assert!(report.checks[0].witness.as_ref().unwrap().contains("l × l"));
    }

    #[test]
    fn perturbed_projector_breaks_duality() {
        let x = projective_space(2);
        let mut ps = standard_decomposition(&x).unwrap().into_projectors();
        ps[1] = ps[2].scale(&rat(1, 3));
        let dec = CKDecomposition::new(&x, ps).unwrap();
        assert!(!check_poincare(&dec).overall());
        let dec = standard_decomposition(&blow_up_plane()).unwrap();
        assert!(check_poincare(&dec).overall());
    }

    fn blow_up_plane() -> Arc<ChowDatum> {
        let x = projective_space(2);
        blow_up(&x, &x.point_class().unwrap(), &int(-1)).unwrap().result().clone()
    }

    #[test]
    fn lifted_plane_passes_duality_and_b() {
        let x = projective_space(2);
        let b = blow_up(&x, &x.point_class().unwrap(), &int(-1)).unwrap();
        let rho = lift_ck(&standard_decomposition(&x).unwrap(), &b).unwrap();
        let v = Verifier::new(&rho);
        assert!(v.verify_ck().overall());
        assert!(v.check_poincare().overall());
        assert!(v.check_b().overall());
        assert!(v.check_d_cellular().unwrap().overall());
    }

    #[test]
    fn projective_filtrations() {
        let dec = standard_decomposition(&projective_space(3)).unwrap();
        for j in 0..=3 {
            let f = filtration(&dec, j);
            assert_eq!(f.chain.len(), 2, "CH^{j}");
            assert_eq!(f.level(0).dim(), 1);
            assert_eq!(f.level(1).dim(), 0);
            assert!(f.chain.len() <= j + 2);
        }
    }

    #[test]
    fn filtration_with_a_silent_projector() {
        // with π_0 zeroed nothing on CH^0 is ever cut down
        let x = projective_space(1);
        let mut ps = standard_decomposition(&x).unwrap().into_projectors();
        ps[0] = Correspondence::zero(&x, &x, 1);
        let dec = CKDecomposition::new(&x, ps).unwrap();
        let f = filtration(&dec, 0);
        assert_eq!(f.chain.len(), 1);
        assert_eq!(f.level(5).dim(), 1);
        assert!(!check_d_cellular(&dec).unwrap().overall());
    }

    #[test]
    fn c_agreement_and_mismatch() {
        let x = projective_space(2);
        let dec = standard_decomposition(&x).unwrap();
        assert!(check_c(std::slice::from_ref(&dec)).unwrap().overall());
        assert!(check_c(&[dec.clone(), dec.clone()]).unwrap().overall());
        let other = standard_decomposition(&projective_space(1)).unwrap();
        assert!(matches!(check_c(&[dec, other]), Err(ChowError::AmbientMismatch(_))));
    }

    #[test]
    fn d_needs_cellular_data() {
        let p1 = projective_space(1);
        let mock = ChowDatum::new(DatumParts {
            name: "mock".into(),
            labels: vec![vec!["1".into()], vec!["p".into()]],
            mult: vec![
                vec![p1.mult_table(0, 0).clone(), p1.mult_table(0, 1).clone()],
                vec![p1.mult_table(1, 0).clone(), p1.mult_table(1, 1).clone()],
            ],
            degree: vec![int(1)],
            kunneth: Some(vec![
                KunnethPair { codim: 0, left: vec![int(1)], right: vec![int(1)] },
                KunnethPair { codim: 1, left: vec![int(1)], right: vec![int(1)] },
            ]),
            cellular: false,
        })
        .unwrap();
        let dec = standard_decomposition(&mock).unwrap();
        assert!(verify_ck(&dec).overall());
        assert!(matches!(check_d_cellular(&dec), Err(ChowError::UnsupportedDatum(_))));
    }

    #[test]
    fn b_failure_names_the_class() {
        let x = projective_space(1);
        let mut ps = standard_decomposition(&x).unwrap().into_projectors();
        ps.swap(0, 2);
        let report = check_b(&CKDecomposition::new(&x, ps).unwrap());
        assert!(!report.overall());
        assert!(report.checks[0].witness.as_ref().unwrap().starts_with("π_0 sends"));
    }
}
