//! Builds the datum and decomposition named by a config and runs its tasks.

use std::sync::Arc;
use std::time::Instant;

use chowkit::blowup::{blow_up, blow_up_many, blowdown_ck, canonical_tau, lift_ck, lift_ck_with_tau, BlowupDatum};
use chowkit::chowring::{product, projective_space, quotient, GroupActionDatum};
use chowkit::correspond::{compose_oracle, product_decomposition, quotient_decomposition};
use chowkit::exactlin::int;
use chowkit::murre::{self, Check, VerificationReport, Verifier};
use chowkit::sample::{random_correspondence, random_product_cycle};
use chowkit::{standard_decomposition, ChowDatum, ChowError, CKDecomposition, Correspondence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Action, RunConfig, Task, VarietySpec};
use crate::report::{CheckRecord, DatumSummary, Report, Timing};

pub const DEFAULT_FUZZ_CASES: usize = 200;

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub timing: bool,
    pub fuzz_cases: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            timing: false,
            fuzz_cases: DEFAULT_FUZZ_CASES,
        }
    }
}

/// A built variety: its datum, decomposition, and for a blow-up the
/// base decomposition and the stages, so that other `τ` choices
/// can be replayed.
pub struct Built {
    pub datum: Arc<ChowDatum>,
    pub decomposition: CKDecomposition,
    blowup: Option<(CKDecomposition, Vec<BlowupDatum>)>,
}

pub fn build(spec: &VarietySpec) -> Result<Built, ChowError> {
    match spec {
        VarietySpec::ProjectiveSpace(n) => {
            let datum = projective_space(*n);
            let decomposition = standard_decomposition(&datum)?;
            Ok(Built {
                datum,
                decomposition,
                blowup: None,
            })
        }
        VarietySpec::Product(a, b) => {
            let (a, b) = (build(a)?, build(b)?);
            let datum = product(&a.datum, &b.datum)?;
            let decomposition = product_decomposition(&a.decomposition, &b.decomposition, &datum)?;
            Ok(Built {
                datum,
                decomposition,
                blowup: None,
            })
        }
        VarietySpec::Quotient(base, action) => {
            let base = build(base)?;
            let action = match action {
                Action::Swap => GroupActionDatum::swap(&base.datum)?,
                Action::Trivial => GroupActionDatum::trivial(&base.datum),
            };
            let (datum, q) = quotient(&action)?;
            let decomposition = quotient_decomposition(&base.decomposition, &action, &q)?;
            Ok(Built {
                datum,
                decomposition,
                blowup: None,
            })
        }
        VarietySpec::Blowup {
            base,
            points,
            multiplier,
        } => {
            let base = build(base)?;
            let point = base.datum.point_class().ok_or_else(|| {
                ChowError::InvalidCenter(format!("{} has no zero-cycle of nonzero degree", base.datum.name()))
            })?;
            let tower = blow_up_many(&base.datum, &vec![point; *points], multiplier)?;
            let decomposition = tower.lift(&base.decomposition)?;
            Ok(Built {
                datum: tower.datum().clone(),
                decomposition,
                blowup: Some((base.decomposition, tower.stages().to_vec())),
            })
        }
    }
}

fn prefixed(task: Task, report: VerificationReport) -> Vec<CheckRecord> {
    report.checks.into_iter().map(|c| CheckRecord::from_check(task, c)).collect()
}

fn failed(task: Task, name: &str, err: &ChowError) -> Vec<CheckRecord> {
    vec![CheckRecord::from_check(task, Check::fail(name, err.to_string()))]
}

/// A second decomposition for comparing filtrations: on a blow-up, every
/// stage is lifted with `τ` shifted by `Σ (i+1) e_i × e_{d-i}`; otherwise
/// the diagonal-block decomposition of the datum.
fn alternative(built: &Built) -> Result<Option<CKDecomposition>, ChowError> {
    match &built.blowup {
        Some((base, stages)) => {
            let mut acc = base.clone();
            for b in stages {
                let d = b.dim();
                let mut kappa = Correspondence::zero(b.result(), b.result(), d);
                for i in 1..d {
                    let (Some(u), Some(v)) = (b.exceptional_class(i), b.exceptional_class(d - i)) else {
                        continue;
                    };
                    kappa = kappa.add(&Correspondence::product_cycle(&u, &v).scale(&int(i as i64 + 1)))?;
                }
                let tau = canonical_tau(&acc, b)?.shift(b, &kappa)?;
                acc = lift_ck_with_tau(&acc, b, &tau)?;
            }
            Ok(Some(acc))
        }
        None if built.datum.has_kunneth() => Ok(Some(standard_decomposition(&built.datum)?)),
        None => Ok(None),
    }
}

/// One more blow-up of the built variety at a point, multiplier `-1`.
fn extra_blowup(built: &Built) -> Result<BlowupDatum, ChowError> {
    let point = built.datum.point_class().ok_or_else(|| {
        ChowError::InvalidCenter(format!("{} has no zero-cycle of nonzero degree", built.datum.name()))
    })?;
    blow_up(&built.datum, &point, &int(-1))
}

fn run_task(task: Task, built: &Built, verifier: &Verifier, seed: u64, cases: usize) -> Vec<CheckRecord> {
    match task {
        Task::VerifyCk => prefixed(task, verifier.verify_ck()),
        Task::Poincare => prefixed(task, verifier.check_poincare()),
        Task::MurreB => prefixed(task, verifier.check_b()),
        Task::MurreBprime => prefixed(task, verifier.check_bprime()),
        Task::MurreC => {
            let mut variants = vec![built.decomposition.clone()];
            match alternative(built) {
                Ok(alt) => variants.extend(alt),
                Err(e) => return failed(task, "alternative decomposition", &e),
            }
            match murre::check_c(&variants) {
                Ok(r) => prefixed(task, r),
                Err(e) => failed(task, "filtration comparison", &e),
            }
        }
        Task::MurreD => match verifier.check_d_cellular() {
            Ok(r) => prefixed(task, r),
            Err(e) => failed(task, "Murre D (cellular)", &e),
        },
        Task::Lift => match extra_blowup(built).and_then(|b| lift_ck(&built.decomposition, &b)) {
            Ok(lifted) => {
                let v = Verifier::new(&lifted);
                let mut r = v.verify_ck();
                r.extend(v.check_poincare());
                prefixed(task, r)
            }
            Err(e) => failed(task, "lift to one-point blow-up", &e),
        },
        Task::Blowdown => {
            let lowered = extra_blowup(built).and_then(|b| {
                let nus = standard_decomposition(b.result())?;
                blowdown_ck(&nus, &b)
            });
            match lowered {
                Ok(dec) => prefixed(task, Verifier::new(&dec).verify_ck()),
                Err(e) => failed(task, "blow-down from one-point blow-up", &e),
            }
        }
        Task::Roundtrip => {
            let name = "blow-down of lift is the identity";
            let back = extra_blowup(built).and_then(|b| blowdown_ck(&lift_ck(&built.decomposition, &b)?, &b));
            match back {
                Ok(back) => {
                    let bad: Vec<usize> = (0..back.projectors().len())
                        .filter(|&i| back.projector(i) != built.decomposition.projector(i))
                        .collect();
                    let check = match bad.first() {
                        None => Check::pass(name),
                        Some(&i) => Check::fail(
                            name,
                            format!("π_{i}: got {}, expected {}", back.projector(i), built.decomposition.projector(i)),
                        ),
                    };
                    vec![CheckRecord::from_check(task, check)]
                }
                Err(e) => failed(task, name, &e),
            }
        }
        Task::OracleFuzz => vec![CheckRecord::from_check(task, oracle_fuzz(&built.datum, seed, cases))],
    }
}

/// Compares `compose` against the pull-multiply-push oracle on seeded
/// random correspondences of `X × X`.
pub fn oracle_fuzz(x: &Arc<ChowDatum>, seed: u64, cases: usize) -> Check {
    let name = format!("composition agrees with oracle ({cases} cases, seed {seed})");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = x.dim();
    for case in 0..cases {
        // total codimension must lie in d..=3d for the composite to exist
        let (alpha, beta) = if rng.gen_bool(0.25) {
            let (i, j, k) = (rng.gen_range(0..=d), rng.gen_range(0..=d), rng.gen_range(0..=d));
            let l = rng.gen_range(d.saturating_sub(i + j + k).min(d)..=d);
            (random_product_cycle(&mut rng, x, x, i, j), random_product_cycle(&mut rng, x, x, k, l))
        } else {
            let c1 = rng.gen_range(0..=2 * d);
            let c2 = rng.gen_range(d.saturating_sub(c1)..=(3 * d - c1).min(2 * d));
            (
                random_correspondence(&mut rng, x, x, c1, 0.5),
                random_correspondence(&mut rng, x, x, c2, 0.5),
            )
        };
        let fast = alpha.compose(&beta);
        let slow = compose_oracle(&alpha, &beta);
        match (fast, slow) {
            (Ok(f), Ok(s)) if f == s => {}
            (Ok(f), Ok(s)) => {
                return Check::fail(name, format!("case {case}: ({alpha})•({beta}) gave {f}, oracle {s}"))
            }
            (Err(e), _) | (_, Err(e)) => return Check::fail(name, format!("case {case}: {e}")),
        }
    }
    Check::pass(name)
}

pub fn summarize(built: &Built) -> DatumSummary {
    DatumSummary {
        name: built.datum.name().to_string(),
        dimension: built.datum.dim(),
        ranks: built.datum.ranks(),
        kunneth: built.datum.has_kunneth(),
        cellular: built.datum.is_cellular(),
        blowup_stages: built.blowup.as_ref().map_or(0, |(_, s)| s.len()),
    }
}

/// Runs every configured task. Construction failures become a failed
/// `build` check.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Report {
    let start = Instant::now();
    let mut report = Report::new(cfg);
    match build(&cfg.variety) {
        Ok(built) => {
            report.datum = Some(summarize(&built));
            let verifier = Verifier::new(&built.decomposition);
            for &task in &cfg.tasks {
                report.checks.extend(run_task(task, &built, &verifier, cfg.seed, opts.fuzz_cases));
            }
        }
        Err(e) => report.checks.push(CheckRecord::build_failure(&e)),
    }
    if opts.timing {
        report.timing = Some(Timing {
            total_ms: start.elapsed().as_millis() as u64,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run_text(text: &str) -> Report {
        run(&parse_config(text).unwrap(), &RunOptions { timing: false, fuzz_cases: 20 })
    }

    #[test]
    fn every_task_passes_on_a_blown_up_plane() {
        let r = run_text(
            "variety = blowup(projective_space(2), 2, -1)\n\
             tasks = [verify-ck, poincare, murre-B, murre-Bprime, murre-C, murre-D, lift, blowdown, roundtrip, oracle-fuzz]",
        );
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.datum.as_ref().unwrap().ranks, vec![1, 3, 1]);
    }

    #[test]
    fn quotient_surface_tasks() {
        let r = run_text(
            "variety = blowup(quotient(product(projective_space(1), projective_space(1)), swap), 1, 1/2)\n\
             tasks = [verify-ck, poincare, murre-B, murre-C, roundtrip]",
        );
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn construction_failure_is_a_failed_check() {
        let r = run_text("variety = blowup(projective_space(0), 1, -1); tasks = [verify-ck]");
        assert!(!r.passed());
        assert_eq!(r.checks.len(), 1);
        assert_eq!(r.checks[0].task, "build");
    }

    #[test]
    fn lift_needs_positive_dimension() {
        let r = run_text("variety = projective_space(0); tasks = [verify-ck, lift]");
        assert!(!r.passed());
        assert!(r.checks.iter().any(|c| c.task == "lift" && c.status == "fail"));
        assert!(r.checks.iter().filter(|c| c.task == "verify-ck").all(|c| c.status == "pass"));
    }
}
