//! Acceptance criteria. Prints one line per criterion and exits nonzero if
//! any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kmtopo::affine_sl2::{aff_member, kp_witness, AffElt, AffSpec};
use kmtopo::harness::{
    conjugation_generators, find_conjugation_bound, run_conj_invariance, run_suite, ConjBound,
    SamplerConfig, SuiteReport, Verdict,
};
use kmtopo::root_data::{RootGenSys, RootVec};
use kmtopo::sl2_rank1::{tree_retract, Sl2Elt, TreePoint};
use kmtopo::valued_field::{q_frac, q_int, FieldSpec, Scalar};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn p3() -> FieldSpec {
    FieldSpec::padic(3).unwrap()
}

fn f2t() -> FieldSpec {
    FieldSpec::rational_function(2).unwrap()
}

fn cfg(field: FieldSpec, trials: u64) -> SamplerConfig {
    SamplerConfig {
        field,
        trials,
        ..SamplerConfig::default()
    }
}

fn suite(name: &str, c: &SamplerConfig) -> Result<SuiteReport, String> {
    let r = run_suite(name, c).map_err(|e| e.to_string())?;
    match r.verdict {
        Verdict::Pass => Ok(r),
        Verdict::NotApplicable => Err(format!("{name} not applicable for {}", c.field)),
        Verdict::Fail => Err(format!(
            "{name} on {}: {} failures, first {:?}",
            c.field,
            r.failures.len(),
            r.failures[0]
        )),
    }
}

fn commutation() -> Outcome {
    let a = suite("commutation", &cfg(p3(), 1000))?;
    let b = suite("commutation", &cfg(f2t(), 1000))?;
    Ok(format!("{} + {} identities", a.trials_run, b.trials_run))
}

fn uut() -> Outcome {
    let r = suite("uut-uniqueness", &cfg(p3(), 1000))?;
    Ok(format!("{} round trips", r.trials_run))
}

fn kerpi() -> Outcome {
    let r = suite("kerpi-sl2", &cfg(p3(), 500))?;
    if r.trials_run != 3000 {
        return Err(format!("expected 3000 checks, ran {}", r.trials_run));
    }
    Ok("n = 1, 2, 3 in both directions, 0 disagreements".into())
}

fn hn_closure() -> Outcome {
    let r = suite("hn-closure", &cfg(p3(), 1000))?;
    Ok(format!("{} products and inverses", r.trials_run))
}

fn v_in_h() -> Outcome {
    let r = suite("v-in-h", &cfg(p3(), 500))?;
    Ok(format!("{} samples", r.trials_run))
}

fn conj_invariance() -> Outcome {
    let c = cfg(p3(), 200);
    let r = run_conj_invariance(&c, &[1, 2], 6);
    if r.verdict != Verdict::Pass {
        return Err(format!("exhausted: {:?}", r.failures));
    }
    let worst = conjugation_generators(c.field)
        .iter()
        .filter_map(|e| {
            let g = e.to_affine(c.field).unwrap();
            match find_conjugation_bound(&g, 2, 6, &c) {
                ConjBound::Found(m) => Some(m),
                ConjBound::Exhausted => None,
            }
        })
        .max()
        .unwrap_or(0);
    Ok(format!(
        "{} generator/level pairs, worst m = {worst} at n = 2",
        r.trials_run
    ))
}

fn center_separation() -> Outcome {
    suite("center-separation", &cfg(p3(), 1))?;
    let one = Scalar::one(p3());
    let g = AffElt::torus(-&one, one).unwrap();
    let center_o = aff_member(&g, AffSpec::CenterO).unwrap().member;
    let kerpi = aff_member(&g, AffSpec::KerPiN(1)).unwrap().member;
    if !center_o || kerpi {
        return Err(format!("centerO = {center_o}, kerpi:1 = {kerpi}"));
    }
    Ok("(-I, 1) central, integral, fixes test points, outside ker pi_1".into())
}

fn coset_count() -> Outcome {
    let r = suite("coset-count", &cfg(p3(), 1))?;
    Ok(r.notes.join("; "))
}

fn tree_retraction() -> Outcome {
    let c = cfg(p3(), 500);
    if c.valuation_range != (-3, 6) {
        return Err("unexpected valuation window".into());
    }
    let r = suite("tree-retraction", &c)?;
    let pi = c.field.uniformizer();
    let folded = tree_retract(&TreePoint::new(Sl2Elt::x_minus(pi), q_int(1)));
    if folded != q_int(0) {
        return Err(format!("(x_-(w), 1) retracts to {folded}"));
    }
    for y in [q_int(-3), q_frac(-1, 2), q_int(0), q_frac(7, 4), q_int(5)] {
        let got = tree_retract(&TreePoint::standard(c.field, y.clone()));
        if got != y {
            return Err(format!("(I, {y}) retracts to {got}"));
        }
    }
    Ok(format!("{} points agree with the oracle", r.trials_run))
}

fn fix_criterion() -> Outcome {
    let r = suite("fix-criterion", &cfg(p3(), 500))?;
    Ok(format!("{} tori, n = 1..4", r.trials_run))
}

fn root_enumeration() -> Outcome {
    let h = 9i64;
    let got: BTreeSet<Vec<i64>> = RootGenSys::affine_sl2()
        .real_roots_up_to_height(h as u32)
        .into_iter()
        .map(|r| r.0)
        .collect();
    // +-a + k delta with a = a_1 and delta = a_0 + a_1, in (a_0, a_1) coordinates
    let mut expected = BTreeSet::new();
    for k in -h..=h {
        for (c0, c1) in [(k, k + 1), (k, k - 1)] {
            if (c0 + c1).abs() <= h {
                expected.insert(vec![c0, c1]);
            }
        }
    }
    if got != expected {
        return Err(format!(
            "got {} roots, expected {}",
            got.len(),
            expected.len()
        ));
    }
    let positive = got.iter().filter(|r| r.iter().sum::<i64>() > 0).count() as i64;
    if positive != 2 * ((h + 1) / 2) {
        return Err(format!("{positive} positive roots"));
    }
    let a1: BTreeSet<RootVec> = RootGenSys::a1()
        .real_roots_up_to_height(h as u32)
        .into_iter()
        .collect();
    let alpha = RootVec(vec![1]);
    if a1 != BTreeSet::from([alpha.neg(), alpha]) {
        return Err(format!("A1 roots {a1:?}"));
    }
    Ok(format!(
        "{} affine roots to height {h}, A1 = {{+-a}}",
        got.len()
    ))
}

fn kp() -> Outcome {
    let one = kp_witness(1, 12).witness_index;
    let two = kp_witness(2, 12).witness_index;
    if one != Some(2) || two != Some(3) {
        return Err(format!("witness indices {one:?}, {two:?}"));
    }
    Ok("n = 1 -> 2, n = 2 -> 3".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("commutation", 5, commutation),
        ("uut-uniqueness", 5, uut),
        ("kerpi-sl2", 10, kerpi),
        ("hn-closure", 20, hn_closure),
        ("v-in-h", 20, v_in_h),
        ("conj-invariance", 60, conj_invariance),
        ("center-separation", 1, center_separation),
        ("coset-count", 5, coset_count),
        ("tree-retraction", 10, tree_retraction),
        ("fix-criterion", 10, fix_criterion),
        ("root-enumeration", 1, root_enumeration),
        ("kp-witness", 1, kp),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(*limit) => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit} s"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} {name:<18} PASS ({elapsed:.2?}) {detail}",
                i + 1
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "criterion {:>2} {name:<18} FAIL ({elapsed:.2?}) {why}",
                    i + 1
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
