//! Deterministic samplers and named verification suites.
//!
//! Every trial draws from its own ChaCha stream selected by the trial index,
//! so a suite's report depends only on its name and [`SamplerConfig`].
//! Failures record their inputs as expressions and can be replayed.

use std::collections::BTreeSet;
use std::time::Instant;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine_sl2::{
    aff_member, fixes_test_point, vform_check, AffElt, AffSpec, AffTorusElt, VFactorization,
};
use crate::expr::{
    parse_element, parse_point, parse_scalar, ElementExpr, ExprError, Factor, PointExpr,
};
use crate::sl2_rank1::{
    ker_pi_by_congruence, ker_pi_by_product, sl2_member, tree_act, tree_point_equal, tree_retract,
    upt_decompose, Sl2Elt, Sl2Spec, TreePoint, Upt,
};
use crate::valued_field::{q_frac, q_int, FieldSpec, FpPoly, Scalar, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("cannot replay: {0}")]
    Replay(String),
}

impl From<ExprError> for HarnessError {
    fn from(e: ExprError) -> Self {
        HarnessError::Replay(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub field: FieldSpec,
    pub valuation_range: (i64, i64),
    pub laurent_support: i64,
    pub word_length: usize,
    pub trials: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 42,
            field: FieldSpec::PAdic { p: 3 },
            valuation_range: (-3, 6),
            laurent_support: 6,
            word_length: 8,
            trials: 500,
        }
    }
}

/// Random stream for one trial.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_unit<R: Rng>(rng: &mut R, field: FieldSpec) -> Scalar {
    match field {
        FieldSpec::PAdic { p } => {
            let p = p as i64;
            let pick = |rng: &mut R, hi: i64| loop {
                let x = rng.random_range(1..=hi);
                if x % p != 0 {
                    return x;
                }
            };
            let n = pick(rng, 4 * p + 4);
            let d = pick(rng, 2 * p + 2);
            let s = Scalar::from_ratio(field, n, d).expect("nonzero denominator");
            if rng.random_bool(0.5) {
                -s
            } else {
                s
            }
        }
        FieldSpec::RationalFunction { p } => {
            let poly = |rng: &mut R, deg: usize| {
                let mut c: Vec<u64> = (0..=deg).map(|_| rng.random_range(0..p)).collect();
                c[0] = rng.random_range(1..p);
                FpPoly::new(p, c)
            };
            let num = poly(rng, 2);
            let den = poly(rng, 1);
            Scalar::from_polys(field, num, den).expect("nonzero denominator")
        }
    }
}

/// `w^v` times a random unit.
fn scalar_with_valuation<R: Rng>(rng: &mut R, field: FieldSpec, v: i64) -> Scalar {
    random_unit(rng, field) * Scalar::uniformizer_pow(field, v)
}

/// A scalar with valuation at least `lo`, biased towards the boundary.
fn scalar_at_least<R: Rng>(rng: &mut R, field: FieldSpec, lo: i64) -> Scalar {
    let extra = [0, 0, 0, 1, 2, 3][rng.random_range(0..6)];
    scalar_with_valuation(rng, field, lo + extra)
}

fn scalar_in_window<R: Rng>(rng: &mut R, cfg: &SamplerConfig) -> Scalar {
    let (lo, hi) = cfg.valuation_range;
    let v = rng.random_range(lo..=hi);
    scalar_with_valuation(rng, cfg.field, v)
}

/// `1 + c` with `w(c) >= lo`, or exactly `1`.
fn one_plus<R: Rng>(rng: &mut R, field: FieldSpec, lo: i64) -> Scalar {
    if rng.random_bool(0.2) {
        Scalar::one(field)
    } else {
        Scalar::one(field) + scalar_at_least(rng, field, lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleClass {
    Sl2Generic,
    Sl2KerPi(u32),
    AffWord,
    AffHn(u32),
    AffTorus,
    AffVForm(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sampled {
    Sl2(Sl2Elt),
    Affine(AffElt),
}

fn xp(k: Option<i64>, c: Scalar) -> Factor {
    Factor::XPlus { k, c }
}

fn xm(k: Option<i64>, c: Scalar) -> Factor {
    Factor::XMinus { k, c }
}

fn affine(expr: &ElementExpr, field: FieldSpec) -> AffElt {
    expr.to_affine(field)
        .expect("sampled expressions are valid")
}

fn sl2(expr: &ElementExpr, field: FieldSpec) -> Sl2Elt {
    expr.to_sl2(field).expect("sampled expressions are valid")
}

fn sample_sl2_generic<R: Rng>(rng: &mut R, cfg: &SamplerConfig) -> ElementExpr {
    let len = rng.random_range(1..=cfg.word_length.max(1));
    let factors = (0..len)
        .map(|_| match rng.random_range(0..4) {
            0 => xp(None, scalar_in_window(rng, cfg)),
            1 => xm(None, scalar_in_window(rng, cfg)),
            2 => Factor::Diag(scalar_in_window(rng, cfg)),
            _ => Factor::W,
        })
        .collect();
    ElementExpr(factors)
}

fn sample_sl2_kerpi<R: Rng>(rng: &mut R, field: FieldSpec, n: u32) -> ElementExpr {
    let n = n as i64;
    ElementExpr(vec![
        xp(None, scalar_at_least(rng, field, n)),
        xm(None, scalar_at_least(rng, field, n)),
        Factor::Diag(one_plus(rng, field, n)),
    ])
}

fn sample_aff_word<R: Rng>(rng: &mut R, cfg: &SamplerConfig) -> ElementExpr {
    let len = rng.random_range(1..=cfg.word_length.max(1));
    let k_max = cfg.laurent_support;
    let factors = (0..len)
        .map(|_| match rng.random_range(0..6) {
            0 => xp(
                Some(rng.random_range(-k_max..=k_max)),
                scalar_in_window(rng, cfg),
            ),
            1 => xm(
                Some(rng.random_range(-k_max..=k_max)),
                scalar_in_window(rng, cfg),
            ),
            2 => Factor::TMu {
                l: rng.random_range(-2..=2),
                n: rng.random_range(-2..=2),
            },
            3 => Factor::Torus {
                f: random_unit(rng, cfg.field),
                z: random_unit(rng, cfg.field),
            },
            4 => Factor::S0,
            _ => Factor::S1,
        })
        .collect();
    ElementExpr(factors)
}

fn sample_aff_hn<R: Rng>(rng: &mut R, cfg: &SamplerConfig, n: u32) -> ElementExpr {
    let field = cfg.field;
    let len = rng.random_range(1..=(cfg.word_length / 2).max(1));
    let k_max = cfg.laurent_support;
    let ni = n as i64;
    let factors = (0..len)
        .map(|_| {
            if rng.random_range(0..5) == 0 {
                return Factor::Torus {
                    f: one_plus(rng, field, ni),
                    z: one_plus(rng, field, ni),
                };
            }
            let k = rng.random_range(-k_max..=k_max);
            let c = scalar_at_least(rng, field, ni * k.abs().max(1));
            if rng.random_bool(0.5) {
                xp(Some(k), c)
            } else {
                xm(Some(k), c)
            }
        })
        .collect();
    ElementExpr(factors)
}

fn sample_aff_torus<R: Rng>(rng: &mut R, cfg: &SamplerConfig) -> ElementExpr {
    ElementExpr(vec![Factor::Torus {
        f: scalar_in_window(rng, cfg),
        z: scalar_in_window(rng, cfg),
    }])
}

/// `u+ . u- . t` with root-group coefficients bounded so that the factors
/// fix `[-n lambda, n lambda]` for `lambda = a^vee + 3d`.
fn sample_aff_vform<R: Rng>(
    rng: &mut R,
    cfg: &SamplerConfig,
    n: u32,
) -> (ElementExpr, VFactorization) {
    let field = cfg.field;
    let k_max = cfg.laurent_support.clamp(1, 3);
    let n = n as i64;
    let mut plus = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        if rng.random_bool(0.5) {
            let k = rng.random_range(0..=k_max);
            plus.push(xp(Some(k), scalar_at_least(rng, field, n * (2 + 3 * k))));
        } else {
            let k = rng.random_range(1..=k_max);
            plus.push(xm(Some(k), scalar_at_least(rng, field, n * (3 * k - 2))));
        }
    }
    let mut minus = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        if rng.random_bool(0.5) {
            let k = rng.random_range(0..=k_max);
            minus.push(xm(Some(-k), scalar_at_least(rng, field, n * (2 + 3 * k))));
        } else {
            let k = rng.random_range(1..=k_max);
            minus.push(xp(Some(-k), scalar_at_least(rng, field, n * (3 * k - 2))));
        }
    }
    let (f, z) = (one_plus(rng, field, 2 * n), one_plus(rng, field, 2 * n));
    let fz = VFactorization {
        plus: affine(&ElementExpr(plus.clone()), field),
        minus: affine(&ElementExpr(minus.clone()), field),
        torus: AffTorusElt::new(f.clone(), z.clone()).expect("units"),
    };
    let mut factors = plus;
    factors.extend(minus);
    factors.push(Factor::Torus { f, z });
    (ElementExpr(factors), fz)
}

fn sample_with<R: Rng>(
    rng: &mut R,
    class: SampleClass,
    cfg: &SamplerConfig,
) -> (ElementExpr, Sampled) {
    let field = cfg.field;
    match class {
        SampleClass::Sl2Generic => {
            let e = sample_sl2_generic(rng, cfg);
            let g = sl2(&e, field);
            (e, Sampled::Sl2(g))
        }
        SampleClass::Sl2KerPi(n) => {
            let e = sample_sl2_kerpi(rng, field, n);
            let g = sl2(&e, field);
            assert!(
                sl2_member(&g, &Sl2Spec::KerPi(n)).member,
                "sampler produced {e}"
            );
            (e, Sampled::Sl2(g))
        }
        SampleClass::AffWord => {
            let e = sample_aff_word(rng, cfg);
            let g = affine(&e, field);
            (e, Sampled::Affine(g))
        }
        SampleClass::AffHn(n) => {
            let e = sample_aff_hn(rng, cfg, n);
            let g = affine(&e, field);
            assert!(
                aff_member(&g, AffSpec::HN(n)).expect("total").member,
                "sampler produced {e}"
            );
            (e, Sampled::Affine(g))
        }
        SampleClass::AffTorus => {
            let e = sample_aff_torus(rng, cfg);
            let g = affine(&e, field);
            (e, Sampled::Affine(g))
        }
        SampleClass::AffVForm(n) => {
            let (e, fz) = sample_aff_vform(rng, cfg, n);
            assert!(vform_check(&fz, n).member, "sampler produced {e}");
            let g = fz.plus.mul(&fz.minus).mul(&fz.torus.to_elt());
            (e, Sampled::Affine(g))
        }
    }
}

/// The sample of `class` for trial `index`.
pub fn sample_element(
    class: SampleClass,
    cfg: &SamplerConfig,
    index: u64,
) -> (ElementExpr, Sampled) {
    sample_with(&mut trial_rng(cfg.seed, index), class, cfg)
}

fn sample_affine<R: Rng>(
    rng: &mut R,
    class: SampleClass,
    cfg: &SamplerConfig,
) -> (ElementExpr, AffElt) {
    match sample_with(rng, class, cfg) {
        (e, Sampled::Affine(g)) => (e, g),
        _ => unreachable!("affine class"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    /// `None` for fixed (non-random) cases.
    pub trial: Option<u64>,
    pub case: String,
    pub inputs: Vec<String>,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub config: SamplerConfig,
    pub trials_run: u64,
    pub verdict: Verdict,
    pub failures: Vec<Failure>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elapsed_ms: Option<u64>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// Registered suites and a one-line description of each.
pub const SUITES: [(&str, &str); 13] = [
    ("commutation", "x_-(b) x_+(a) against both reordered forms"),
    (
        "uut-uniqueness",
        "upper-lower-torus decomposition round trip",
    ),
    (
        "kerpi-sl2",
        "congruence kernel: entry congruences vs product form, n <= 3",
    ),
    (
        "rank1-refinement",
        "x_+(2n) x_-(2n) T_4n closed under products and inverses",
    ),
    (
        "hn-closure",
        "H_n closed under products and inverses, n <= 2",
    ),
    (
        "v-in-h",
        "U+ U- T_2n samples for n lambda lie in H_n, n <= 2",
    ),
    (
        "h2n-in-v",
        "H_3n fixes the segment [-n lambda', n lambda'], n <= 2",
    ),
    (
        "conj-invariance",
        "conjugation bound m <= 6 into H_n for 12 generators, n <= 2",
    ),
    (
        "hausdorff",
        "non-identity elements leave H_n at the predicted level",
    ),
    (
        "center-separation",
        "(-I, 1) is central and integral but not in ker pi_1",
    ),
    ("coset-count", "at least 10 distinct H_2 cosets inside H_1"),
    (
        "tree-retraction",
        "retraction agrees with a candidate-scan oracle",
    ),
    (
        "fix-criterion",
        "torus fixing criterion vs tree point equality",
    ),
];

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|(n, _)| *n)
}

struct Ctx<'a> {
    cfg: &'a SamplerConfig,
    failures: Vec<Failure>,
    notes: Vec<String>,
    trials: u64,
    applicable: bool,
}

impl Ctx<'_> {
    fn fail(&mut self, trial: Option<u64>, case: String, inputs: Vec<String>, mismatch: Mismatch) {
        self.failures.push(Failure {
            trial,
            case,
            inputs,
            expected: mismatch.0,
            got: mismatch.1,
        });
    }
}

/// `(expected, got)` for a failed check.
type Mismatch = (String, String);
type Check = Result<(), Mismatch>;

fn mismatch(expected: impl ToString, got: impl ToString) -> Check {
    Err((expected.to_string(), got.to_string()))
}

fn ensure(cond: bool, expected: &str, got: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err((expected.to_string(), got()))
    }
}

pub fn run_suite(name: &str, cfg: &SamplerConfig) -> Result<SuiteReport, HarnessError> {
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        failures: Vec::new(),
        notes: Vec::new(),
        trials: 0,
        applicable: true,
    };
    match name {
        "commutation" => suite_commutation(&mut ctx),
        "uut-uniqueness" => suite_uut(&mut ctx),
        "kerpi-sl2" => suite_kerpi(&mut ctx),
        "rank1-refinement" => suite_rank1(&mut ctx),
        "hn-closure" => suite_hn_closure(&mut ctx),
        "v-in-h" => suite_v_in_h(&mut ctx),
        "h2n-in-v" => suite_h2n_in_v(&mut ctx, 3),
        "conj-invariance" => suite_conj(&mut ctx, &[1, 2], 6),
        "hausdorff" => suite_hausdorff(&mut ctx),
        "center-separation" => suite_center(&mut ctx),
        "coset-count" => suite_coset(&mut ctx),
        "tree-retraction" => suite_retraction(&mut ctx),
        "fix-criterion" => suite_fix(&mut ctx),
        other => return Err(HarnessError::UnknownSuite(other.to_string())),
    }
    Ok(finish(name, ctx, start))
}

fn finish(name: &str, ctx: Ctx<'_>, start: Instant) -> SuiteReport {
    let mut failures = ctx.failures;
    failures.sort_by_key(|f| f.trial);
    let verdict = if !ctx.applicable {
        Verdict::NotApplicable
    } else if failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    SuiteReport {
        name: name.to_string(),
        config: ctx.cfg.clone(),
        trials_run: ctx.trials,
        verdict,
        failures,
        notes: ctx.notes,
        elapsed_ms: Some(start.elapsed().as_millis() as u64),
    }
}

/// The `H_m -> H_n` suite with an explicit multiplier `m / n`.
pub fn run_h2n_in_v(cfg: &SamplerConfig, multiplier: u32) -> SuiteReport {
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        failures: Vec::new(),
        notes: Vec::new(),
        trials: 0,
        applicable: true,
    };
    suite_h2n_in_v(&mut ctx, multiplier);
    finish("h2n-in-v", ctx, start)
}

/// Conjugation-invariance for chosen levels and search bound.
pub fn run_conj_invariance(cfg: &SamplerConfig, levels: &[u32], m_max: u32) -> SuiteReport {
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        failures: Vec::new(),
        notes: Vec::new(),
        trials: 0,
        applicable: true,
    };
    suite_conj(&mut ctx, levels, m_max);
    finish("conj-invariance", ctx, start)
}

fn case_param(case: &str, key: &str) -> Result<u32, HarnessError> {
    case.split_whitespace()
        .find_map(|part| part.strip_prefix(&format!("{key}=")))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| HarnessError::Replay(format!("case {case:?} has no {key}")))
}

/// Re-run the check behind a recorded failure; `Ok(true)` if it still fails.
pub fn replay(name: &str, failure: &Failure, cfg: &SamplerConfig) -> Result<bool, HarnessError> {
    let field = cfg.field;
    let inputs = &failure.inputs;
    let input = |i: usize| -> Result<&str, HarnessError> {
        inputs
            .get(i)
            .map(String::as_str)
            .ok_or_else(|| HarnessError::Replay("missing input".into()))
    };
    let elt =
        |i: usize| -> Result<ElementExpr, HarnessError> { Ok(parse_element(field, input(i)?)?) };
    let result = match name {
        "commutation" => check_commutation(
            &parse_scalar(field, input(0)?)?,
            &parse_scalar(field, input(1)?)?,
        ),
        "uut-uniqueness" => check_uut(&Upt {
            b: parse_scalar(field, input(0)?)?,
            c: parse_scalar(field, input(1)?)?,
            delta: parse_scalar(field, input(2)?)?,
        }),
        "kerpi-sl2" => {
            let n = case_param(&failure.case, "n")?;
            check_kerpi(
                &elt(0)?.to_sl2(field)?,
                n,
                failure.case.contains("product-form"),
            )
        }
        "rank1-refinement" => {
            let n = case_param(&failure.case, "n")?;
            check_rank1(&elt(0)?.to_sl2(field)?, &elt(1)?.to_sl2(field)?, n)
        }
        "hn-closure" => {
            let n = case_param(&failure.case, "n")?;
            check_hn_closure(&elt(0)?.to_affine(field)?, &elt(1)?.to_affine(field)?, n)
        }
        "v-in-h" => check_v_in_h(&elt(0)?.to_affine(field)?, case_param(&failure.case, "n")?),
        "h2n-in-v" => check_h2n(&elt(0)?.to_affine(field)?, case_param(&failure.case, "n")?),
        "hausdorff" => check_hausdorff(&elt(0)?.to_affine(field)?),
        "tree-retraction" => check_retraction(&parse_point(field, input(0)?)?.to_point(field)?),
        "fix-criterion" => {
            let g = elt(0)?.to_sl2(field)?;
            check_fix(g.a(), case_param(&failure.case, "n")?)
        }
        "conj-invariance" => {
            let g = elt(0)?.to_affine(field)?;
            let n = case_param(&failure.case, "n")?;
            let m_max = case_param(&failure.case, "m_max")?;
            match find_conjugation_bound(&g, n, m_max, cfg) {
                ConjBound::Found(_) => Ok(()),
                ConjBound::Exhausted => mismatch(format!("m <= {m_max}"), "exhausted"),
            }
        }
        "center-separation" | "coset-count" => {
            let report = run_suite(name, cfg)?;
            return Ok(report.verdict == Verdict::Fail);
        }
        other => return Err(HarnessError::UnknownSuite(other.to_string())),
    };
    Ok(result.is_err())
}

// ---------------------------------------------------------------- suites

fn check_commutation(a: &Scalar, b: &Scalar) -> Check {
    let s = Scalar::one(a.field()) + a * b;
    let Ok(si) = s.inv() else {
        return Ok(());
    };
    let lhs = Sl2Elt::x_minus(b.clone()).mul(&Sl2Elt::x_plus(a.clone()));
    let coroot = Sl2Elt::diag(si.clone()).expect("nonzero");
    let torus_middle = Sl2Elt::x_plus(a * &si)
        .mul(&coroot)
        .mul(&Sl2Elt::x_minus(b * &si));
    let torus_right = Sl2Elt::x_plus(a * &si)
        .mul(&Sl2Elt::x_minus(b * &s))
        .mul(&coroot);
    ensure(torus_middle == lhs, &lhs.to_string(), || {
        torus_middle.to_string()
    })?;
    ensure(torus_right == lhs, &lhs.to_string(), || {
        torus_right.to_string()
    })
}

fn suite_commutation(ctx: &mut Ctx<'_>) {
    let cfg = ctx.cfg;
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        let (a, b) = loop {
            let a = scalar_in_window(&mut rng, cfg);
            let b = scalar_in_window(&mut rng, cfg);
            if !(Scalar::one(cfg.field) + &a * &b).is_zero() {
                break (a, b);
            }
        };
        ctx.trials += 1;
        if let Err(m) = check_commutation(&a, &b) {
            ctx.fail(
                Some(trial),
                "both forms".into(),
                vec![a.to_string(), b.to_string()],
                m,
            );
        }
    }
}

fn check_uut(u: &Upt) -> Check {
    let g = u.compose().map_err(|e| (u_string(u), e.to_string()))?;
    match upt_decompose(&g) {
        Ok(back) => ensure(back == *u, &u_string(u), || u_string(&back)),
        Err(e) => mismatch(u_string(u), e),
    }
}

fn u_string(u: &Upt) -> String {
    format!("(b, c, delta) = ({}, {}, {})", u.b, u.c, u.delta)
}

fn suite_uut(ctx: &mut Ctx<'_>) {
    let cfg = ctx.cfg;
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        let b = if rng.random_bool(0.1) {
            Scalar::zero(cfg.field)
        } else {
            scalar_in_window(&mut rng, cfg)
        };
        let c = if rng.random_bool(0.1) {
            Scalar::zero(cfg.field)
        } else {
            scalar_in_window(&mut rng, cfg)
        };
        let u = Upt {
            b,
            c,
            delta: scalar_in_window(&mut rng, cfg),
        };
        ctx.trials += 1;
        if let Err(m) = check_uut(&u) {
            let inputs = vec![u.b.to_string(), u.c.to_string(), u.delta.to_string()];
            ctx.fail(Some(trial), "round trip".into(), inputs, m);
        }
    }
}

fn check_kerpi(g: &Sl2Elt, n: u32, must_hold: bool) -> Check {
    let by_entries = ker_pi_by_congruence(g, n).member;
    let by_product = ker_pi_by_product(g, n).member;
    if must_hold && !by_entries {
        return mismatch("congruent to I", "entry congruence fails");
    }
    ensure(
        by_entries == by_product,
        &format!("product form = {by_entries}"),
        || format!("product form = {by_product}"),
    )
}

/// Elements near the congruence boundary, occasionally outside the big cell.
fn sample_sl2_near<R: Rng>(rng: &mut R, field: FieldSpec, n: u32) -> ElementExpr {
    let n = n as i64;
    let vs: Vec<i64> = (0..3).map(|_| rng.random_range(n - 2..=n + 2)).collect();
    let mut factors = vec![
        xp(None, scalar_with_valuation(rng, field, vs[0])),
        xm(None, scalar_with_valuation(rng, field, vs[1])),
        Factor::Diag(Scalar::one(field) + scalar_with_valuation(rng, field, vs[2].max(1))),
    ];
    match rng.random_range(0..6) {
        0 => factors.push(Factor::W),
        1 => factors.insert(
            0,
            Factor::Diag(Scalar::uniformizer_pow(field, rng.random_range(-1..=1))),
        ),
        _ => {}
    }
    ElementExpr(factors)
}

fn suite_kerpi(ctx: &mut Ctx<'_>) {
    let cfg = ctx.cfg;
    let field = cfg.field;
    for n in 1..=3u32 {
        for trial in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, trial);
            let (e, g) = match sample_with(&mut rng, SampleClass::Sl2KerPi(n), cfg) {
                (e, Sampled::Sl2(g)) => (e, g),
                _ => unreachable!(),
            };
            ctx.trials += 1;
            if let Err(m) = check_kerpi(&g, n, true) {
                ctx.fail(
                    Some(trial),
                    format!("n={n} product-form"),
                    vec![e.to_string()],
                    m,
                );
            }
            let e = sample_sl2_near(&mut rng, field, n);
            let g = sl2(&e, field);
            ctx.trials += 1;
            if let Err(m) = check_kerpi(&g, n, false) {
                ctx.fail(
                    Some(trial),
                    format!("n={n} congruence"),
                    vec![e.to_string()],
                    m,
                );
            }
        }
    }
    if field.residue_char() == 2 {
        ctx.notes
            .push("center witness skipped: -1 = 1 in the residue field".into());
    } else {
        let minus = Sl2Elt::diag(-Scalar::one(field)).expect("nonzero");
        if ker_pi_by_congruence(&minus, 1).member {
            ctx.fail(
                None,
                "n=1 center witness".into(),
                vec!["diag(-1)".into()],
                ("outside ker pi_1".into(), "inside".into()),
            );
        }
    }
}

fn sample_vlambda<R: Rng>(rng: &mut R, field: FieldSpec, n: u32) -> ElementExpr {
    let n = n as i64;
    ElementExpr(vec![
        xp(None, scalar_at_least(rng, field, 2 * n)),
        xm(None, scalar_at_least(rng, field, 2 * n)),
        Factor::Diag(one_plus(rng, field, 4 * n)),
    ])
}

fn check_rank1(g: &Sl2Elt, h: &Sl2Elt, n: u32) -> Check {
    let spec = Sl2Spec::VLambda(n);
    for (what, x) in [("g h", g.mul(h)), ("g^-1", g.inv())] {
        let m = sl2_member(&x, &spec);
        ensure(m.member, &format!("{what} in the set"), || {
            m.reason.clone().unwrap_or_default()
        })?;
    }
    Ok(())
}

fn suite_rank1(ctx: &mut Ctx<'_>) {
    let cfg = ctx.cfg;
    for n in 1..=2u32 {
        for trial in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, trial);
            let e1 = sample_vlambda(&mut rng, cfg.field, n);
            let e2 = sample_vlambda(&mut rng, cfg.field, n);
            ctx.trials += 1;
            if let Err(m) = check_rank1(&sl2(&e1, cfg.field), &sl2(&e2, cfg.field), n) {
                ctx.fail(
                    Some(trial),
                    format!("n={n}"),
                    vec![e1.to_string(), e2.to_string()],
                    m,
                );
            }
        }
    }
}

fn check_hn_closure(g: &AffElt, h: &AffElt, n: u32) -> Check {
    for (what, x) in [("g h", g.mul(h)), ("g^-1", g.inv())] {
        let m = aff_member(&x, AffSpec::HN(n)).expect("total");
        ensure(m.member, &format!("{what} in H_{n}"), || {
            m.reason.clone().unwrap_or_default()
        })?;
    }
    Ok(())
}

fn suite_hn_closure(ctx: &mut Ctx<'_>) {
    let cfg = ctx.cfg;
    for n in 1..=2u32 {
        for trial in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, trial);
            let (e1, g) = sample_affine(&mut rng, SampleClass::AffHn(n), cfg);
            let (e2, h) = sample_affine(&mut rng, SampleClass::AffHn(n), cfg);
            ctx.trials += 1;
            if let Err(m) = check_hn_closure(&g, &h, n) {
                ctx.fail(
                    Some(trial),
                    format!("n={n}"),
                    vec![e1.to_string(), e2.to_string()],
                    m,
                );
            }
        }
    }
}

fn check_v_in_h(g: &AffElt, n: u32) -> Check {
    let m = aff_member(g, AffSpec::HN(n)).expect("total");
    ensure(m.member, &format!("in H_{n}"), || {
        m.reason.clone().unwrap_or_default()
    })
}

fn suite_v_in_h(ctx: &mut Ctx<'_>) {
    let cfg = ctx.cfg;
    for n in 1..=2u32 {
        for trial in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, trial);
            let (e, g) = sample_affine(&mut rng, SampleClass::AffVForm(n), cfg);
            ctx.trials += 1;
            if let Err(m) = check_v_in_h(&g, n) {
                ctx.fail(Some(trial), format!("n={n}"), vec![e.to_string()], m);
            }
        }
    }
}

/// `lambda' = a^vee + d`.
const LAMBDA_PRIME: (i64, i64) = (1, 1);

/// `g` fixes `mu` iff `t_mu^{-1} g t_mu` lies in `SL_2(O[u, 1/u]) x| O^*`.
fn fixes_vertex(g: &AffElt, l: i64, n: i64) -> Result<(), String> {
    let field = g.field();
    let conj = AffElt::t_mu(field, -l, -n).conj(g);
    for (idx, entry) in conj.matrix().iter().enumerate() {
        for (k, c) in entry.terms() {
            if !c.is_integral() {
                return Err(format!(
                    "entry {idx} coefficient at u^{k} has valuation {} after conjugation",
                    c.valuation()
                ));
            }
        }
    }
    if !conj.z().is_unit_integral() {
        return Err("z is not a unit".into());
    }
    Ok(())
}

fn check_h2n(g: &AffElt, n: u32) -> Check {
    let n = n as i64;
    for sign in [1, -1] {
        let (l, d) = (sign * n * LAMBDA_PRIME.0, sign * n * LAMBDA_PRIME.1);
        if let Err(why) = fixes_vertex(g, l, d) {
            return mismatch(format!("fixes {} lambda'", sign * n), why);
        }
    }
    Ok(())
}

fn suite_h2n_in_v(ctx: &mut Ctx<'_>, multiplier: u32) {
    let cfg = ctx.cfg;
    ctx.notes
        .push(format!("samples drawn from H_{{{multiplier}n}}"));
    for n in 1..=2u32 {
        for trial in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, trial);
            let (e, g) = sample_affine(&mut rng, SampleClass::AffHn(multiplier * n), cfg);
            ctx.trials += 1;
            if let Err(m) = check_h2n(&g, n) {
                ctx.fail(
                    Some(trial),
                    format!("n={n} multiplier={multiplier}"),
                    vec![e.to_string()],
                    m,
                );
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConjBound {
    Found(u32),
    Exhausted,
}

/// Least `m <= m_max` such that every sampled element of `H_m` conjugates
/// by `g` into `H_n`; uses `cfg.trials` samples per level.
pub fn find_conjugation_bound(g: &AffElt, n: u32, m_max: u32, cfg: &SamplerConfig) -> ConjBound {
    let gi = g.inv();
    'levels: for m in 1..=m_max {
        for i in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, i);
            let (_, h) = sample_affine(&mut rng, SampleClass::AffHn(m), cfg);
            let c = g.mul(&h).mul(&gi);
            if !aff_member(&c, AffSpec::HN(n)).expect("total").member {
                continue 'levels;
            }
        }
        return ConjBound::Found(m);
    }
    ConjBound::Exhausted
}

/// The fixed list of conjugating elements.
pub fn conjugation_generators(field: FieldSpec) -> Vec<ElementExpr> {
    let one = Scalar::one(field);
    let inv_pi = Scalar::uniformizer_pow(field, -1);
    let e = |f: Factor| ElementExpr::single(f);
    vec![
        e(xp(Some(0), one.clone())),
        e(xm(Some(0), one.clone())),
        e(xp(Some(0), inv_pi.clone())),
        e(xm(Some(0), inv_pi)),
        e(xp(Some(1), one.clone())),
        e(xm(Some(1), one.clone())),
        e(xp(Some(-1), one.clone())),
        e(xm(Some(-1), one)),
        e(Factor::TMu { l: 1, n: 0 }),
        e(Factor::TMu { l: 0, n: 1 }),
        e(Factor::S0),
        e(Factor::S1),
    ]
}

fn suite_conj(ctx: &mut Ctx<'_>, levels: &[u32], m_max: u32) {
    let cfg = ctx.cfg;
    for &n in levels {
        for e in conjugation_generators(cfg.field) {
            let g = affine(&e, cfg.field);
            ctx.trials += 1;
            match find_conjugation_bound(&g, n, m_max, cfg) {
                ConjBound::Found(m) => ctx.notes.push(format!("{e}: n={n} m={m}")),
                ConjBound::Exhausted => ctx.fail(
                    None,
                    format!("n={n} m_max={m_max}"),
                    vec![e.to_string()],
                    (format!("m <= {m_max}"), "exhausted".into()),
                ),
            }
        }
    }
}

/// A level `n` with `g` outside `H_n`, read off from the coefficient
/// valuations; `None` for the identity.
pub fn n_escape(g: &AffElt) -> Option<u32> {
    let field = g.field();
    let one = Scalar::one(field);
    let mut best: Option<i64> = None;
    let mut consider = |level: i64| best = Some(best.map_or(level, |b| b.min(level)));
    for (idx, entry) in g.matrix().iter().enumerate() {
        let diag = idx == 0 || idx == 3;
        for (k, c) in entry.terms() {
            let dev = if diag && k == 0 { c - &one } else { c.clone() };
            match dev.valuation() {
                Valuation::Infinite => {}
                Valuation::Finite(v) if v < 0 => consider(1),
                Valuation::Finite(v) => consider(Integer::div_floor(&v, &k.abs().max(1)) + 1),
            }
        }
        if diag && entry.coeff(0).is_zero() {
            consider(1);
        }
    }
    match (g.z() - &one).valuation() {
        Valuation::Infinite => {}
        Valuation::Finite(v) => consider(v.max(0) + 1),
    }
    best.map(|b| b as u32)
}

fn check_hausdorff(g: &AffElt) -> Check {
    let Some(n) = n_escape(g) else {
        return ensure(g.is_identity(), "identity", || g.to_string());
    };
    let m = aff_member(g, AffSpec::HN(n)).expect("total");
    ensure(!m.member, &format!("outside H_{n}"), || {
        format!("inside H_{n}")
    })
}

fn suite_hausdorff(ctx: &mut Ctx<'_>) {
    let cfg = ctx.cfg;
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        let class = match rng.random_range(0..4) {
            0 => SampleClass::AffWord,
            1 => SampleClass::AffTorus,
            k => SampleClass::AffHn(k as u32),
        };
        let (e, g) = sample_affine(&mut rng, class, cfg);
        if g.is_identity() {
            continue;
        }
        ctx.trials += 1;
        if let Err(m) = check_hausdorff(&g) {
            ctx.fail(Some(trial), "escape".into(), vec![e.to_string()], m);
        }
    }
}

fn suite_center(ctx: &mut Ctx<'_>) {
    let field = ctx.cfg.field;
    if field.residue_char() == 2 {
        ctx.applicable = false;
        ctx.notes
            .push("not applicable: -1 = 1 in residue characteristic 2".into());
        return;
    }
    let one = Scalar::one(field);
    let t = AffTorusElt::new(-&one, one.clone()).expect("nonzero");
    let g = t.to_elt();
    let input = vec![ElementExpr::single(Factor::Torus { f: -&one, z: one }).to_string()];
    ctx.trials = 1;
    let center_o = aff_member(&g, AffSpec::CenterO).expect("torus");
    if !center_o.member {
        ctx.fail(
            None,
            "centerO".into(),
            input.clone(),
            ("member".into(), center_o.reason.unwrap_or_default()),
        );
    }
    for i in 0..2 {
        for n in 1..=10 {
            if !fixes_test_point(&t, i, n) {
                ctx.fail(
                    None,
                    format!("i={i} n={n}"),
                    input.clone(),
                    ("fixes test point".into(), "does not".into()),
                );
            }
        }
    }
    if aff_member(&g, AffSpec::KerPiN(1)).expect("total").member {
        ctx.fail(
            None,
            "kerpi".into(),
            input.clone(),
            ("outside ker pi_1".into(), "inside".into()),
        );
    }
    ctx.notes.push(format!("witness {}", input[0]));
}

fn suite_coset(ctx: &mut Ctx<'_>) {
    let field = ctx.cfg.field;
    let candidates: Vec<ElementExpr> = (1..=12)
        .map(|k| ElementExpr::single(xm(Some(k), Scalar::uniformizer_pow(field, k))))
        .collect();
    let mut reps: Vec<(ElementExpr, AffElt)> = Vec::new();
    for e in candidates {
        let g = affine(&e, field);
        ctx.trials += 1;
        if !aff_member(&g, AffSpec::HN(1)).expect("total").member {
            ctx.fail(
                None,
                "in H_1".into(),
                vec![e.to_string()],
                ("in H_1".into(), "outside".into()),
            );
            continue;
        }
        let gi = g.inv();
        let new_coset = reps.iter().all(|(_, h)| {
            !aff_member(&gi.mul(h), AffSpec::HN(2))
                .expect("total")
                .member
        });
        if new_coset {
            reps.push((e, g));
        }
    }
    ctx.notes
        .push(format!("{} distinct H_2 cosets", reps.len()));
    if reps.len() < 10 {
        let inputs = reps.iter().map(|(e, _)| e.to_string()).collect();
        ctx.fail(
            None,
            "count".into(),
            inputs,
            (">= 10 cosets".into(), reps.len().to_string()),
        );
    }
}

/// Every `y'` such that `(x_+(c), y')` equals `p` for some `c`, found by
/// scanning candidates in a window sized from `p`.
pub fn retraction_oracle(p: &TreePoint) -> Vec<BigRational> {
    let g = &p.g;
    let y = &p.y;
    let max_val = g
        .entries()
        .iter()
        .filter_map(|s| s.valuation().finite())
        .map(i64::abs)
        .max()
        .unwrap_or(0);
    let window = y.abs().ceil().to_integer();
    let window: i64 = i64::try_from(window).expect("small coordinate") + 2 * max_val + 4;
    let mut candidates = BTreeSet::new();
    for k in -window..=window {
        candidates.insert(q_frac(k, 2));
        candidates.insert(y + q_int(k));
        candidates.insert(q_int(k) - y);
    }
    candidates
        .into_iter()
        .filter(|c| exists_unipotent(g, y, c))
        .collect()
}

/// `{ c : w(x - c s) >= r }` as a condition on `c`.
enum Constraint {
    Always,
    Never,
    Ball { center: Scalar, radius: BigRational },
}

fn constraint(x: &Scalar, s: &Scalar, r: &BigRational) -> Constraint {
    if s.is_zero() {
        return if x.valuation().ge_rational(r) {
            Constraint::Always
        } else {
            Constraint::Never
        };
    }
    let center = x.try_div(s).expect("nonzero");
    let vs = q_int(s.valuation().finite().expect("nonzero"));
    Constraint::Ball {
        center,
        radius: (r - vs).ceil(),
    }
}

/// Whether `(x_+(c), y2) ~ (g, y)` for some `c`: with `h = x_+(-c) g`
/// the four valuation conditions of point equality must hold.
fn exists_unipotent(g: &Sl2Elt, y: &BigRational, y2: &BigRational) -> bool {
    if !g.c().valuation().ge_rational(&(y + y2)) || !g.d().valuation().ge_rational(&(y2 - y)) {
        return false;
    }
    let c1 = constraint(g.a(), g.c(), &(y - y2));
    let c2 = constraint(g.b(), g.d(), &-(y + y2));
    match (c1, c2) {
        (Constraint::Never, _) | (_, Constraint::Never) => false,
        (Constraint::Always, _) | (_, Constraint::Always) => true,
        (
            Constraint::Ball {
                center: x1,
                radius: r1,
            },
            Constraint::Ball {
                center: x2,
                radius: r2,
            },
        ) => (&x1 - &x2).valuation().ge_rational(&std::cmp::min(r1, r2)),
    }
}

fn check_retraction(p: &TreePoint) -> Check {
    let got = tree_retract(p);
    let oracle = retraction_oracle(p);
    let show = |v: &[BigRational]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    ensure(
        oracle == [got.clone()],
        &format!("[{}]", show(&oracle)),
        || got.to_string(),
    )
}

fn suite_retraction(ctx: &mut Ctx<'_>) {
    let cfg = ctx.cfg;
    let field = cfg.field;
    let pi = field.uniformizer();
    let fixed: Vec<(PointExpr, BigRational)> = vec![
        (
            PointExpr {
                element: ElementExpr::single(xm(None, pi.clone())),
                y: q_int(1),
            },
            q_int(0),
        ),
        (
            PointExpr {
                element: ElementExpr::single(xm(None, pi.clone())),
                y: q_frac(1, 4),
            },
            q_frac(1, 4),
        ),
    ]
    .into_iter()
    .chain(
        [q_int(-2), q_frac(-1, 2), q_int(0), q_frac(1, 4), q_int(3)]
            .into_iter()
            .map(|y| {
                (
                    PointExpr {
                        element: ElementExpr::single(Factor::Diag(Scalar::one(field))),
                        y: y.clone(),
                    },
                    y,
                )
            }),
    )
    .collect();
    for (pe, expected) in fixed {
        let p = pe.to_point(field).expect("valid");
        let got = tree_retract(&p);
        ctx.trials += 1;
        if got != expected {
            ctx.fail(
                None,
                "closed case".into(),
                vec![pe.to_string()],
                (expected.to_string(), got.to_string()),
            );
        }
        if let Err(m) = check_retraction(&p) {
            ctx.fail(None, "closed case oracle".into(), vec![pe.to_string()], m);
        }
    }
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        let element = sample_sl2_generic(&mut rng, cfg);
        let y = if rng.random_bool(0.8) {
            q_frac(rng.random_range(-8..=8), 2)
        } else {
            q_frac(rng.random_range(-16..=16), 4)
        };
        let pe = PointExpr { element, y };
        let p = pe.to_point(field).expect("valid");
        ctx.trials += 1;
        if let Err(m) = check_retraction(&p) {
            ctx.fail(Some(trial), "oracle".into(), vec![pe.to_string()], m);
        }
    }
}

fn check_fix(f: &Scalar, n: u32) -> Check {
    let field = f.field();
    let criterion = (f * f).in_one_plus_pi_n(n as i64);
    let t = Sl2Elt::diag(f.clone()).map_err(|e| ("torus".to_string(), e.to_string()))?;
    let base = TreePoint::new(
        Sl2Elt::x_plus(Scalar::uniformizer_pow(field, -(n as i64))),
        q_int(0),
    );
    let geometric = tree_point_equal(&tree_act(&t, &base), &base);
    ensure(
        criterion == geometric,
        &format!("criterion = {criterion}"),
        || format!("geometric = {geometric}"),
    )
}

fn suite_fix(ctx: &mut Ctx<'_>) {
    let cfg = ctx.cfg;
    let field = cfg.field;
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial);
        let f = match rng.random_range(0..3) {
            0 => {
                let sign = if rng.random_bool(0.5) {
                    Scalar::one(field)
                } else {
                    -Scalar::one(field)
                };
                let v = rng.random_range(0..=5);
                sign + scalar_with_valuation(&mut rng, field, v)
            }
            1 => scalar_in_window(&mut rng, cfg),
            _ => random_unit(&mut rng, field),
        };
        if f.is_zero() {
            continue;
        }
        let e = ElementExpr::single(Factor::Diag(f.clone()));
        ctx.trials += 1;
        for n in 1..=4 {
            if let Err(m) = check_fix(&f, n) {
                ctx.fail(Some(trial), format!("n={n}"), vec![e.to_string()], m);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: u64) -> SamplerConfig {
        SamplerConfig {
            trials,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn samplers_are_deterministic_and_valid() {
        let cfg = small(10);
        for class in [
            SampleClass::Sl2Generic,
            SampleClass::Sl2KerPi(1),
            SampleClass::AffWord,
            SampleClass::AffHn(2),
            SampleClass::AffTorus,
            SampleClass::AffVForm(1),
        ] {
            for i in 0..5 {
                let (e1, g1) = sample_element(class, &cfg, i);
                let (e2, g2) = sample_element(class, &cfg, i);
                assert_eq!(e1.to_string(), e2.to_string());
                assert_eq!(g1, g2);
            }
        }
        for i in 0..8 {
            let (e, g) = sample_element(SampleClass::AffVForm(1 + (i % 2) as u32), &cfg, i);
            let Sampled::Affine(g) = g else { panic!() };
            assert_eq!(affine(&e, cfg.field), g);
            assert!(
                aff_member(&g, AffSpec::VForm(1 + (i % 2) as u32))
                    .unwrap()
                    .member,
                "{e}"
            );
        }
        let (_, g) = sample_element(SampleClass::Sl2KerPi(1), &cfg, 3);
        let Sampled::Sl2(g) = g else { panic!() };
        assert!(sl2_member(&g, &Sl2Spec::KerPi(1)).member);
    }

    #[test]
    fn unknown_suite() {
        assert_eq!(
            run_suite("nope", &small(1)),
            Err(HarnessError::UnknownSuite("nope".into()))
        );
    }

    #[test]
    fn oracle_examples() {
        let f = FieldSpec::padic(3).unwrap();
        let pi = f.uniformizer();
        let p = TreePoint::new(Sl2Elt::x_minus(pi.clone()), q_int(1));
        assert_eq!(retraction_oracle(&p), vec![q_int(0)]);
        let p = TreePoint::new(Sl2Elt::x_minus(pi), q_frac(1, 4));
        assert_eq!(retraction_oracle(&p), vec![q_frac(1, 4)]);
    }

    #[test]
    fn conjugation_bounds() {
        let cfg = small(50);
        let f = cfg.field;
        assert_eq!(
            find_conjugation_bound(&AffElt::identity(f), 1, 6, &cfg),
            ConjBound::Found(1)
        );
        let g = AffElt::x_plus(0, Scalar::uniformizer_pow(f, -1));
        assert!(matches!(find_conjugation_bound(&g, 1, 6, &cfg), ConjBound::Found(m) if m <= 4));
        let t = AffElt::t_mu(f, 1, 0);
        assert!(matches!(find_conjugation_bound(&t, 1, 6, &cfg), ConjBound::Found(m) if m <= 3));
        let s0 = AffElt::s0(f);
        assert_eq!(
            find_conjugation_bound(&s0, 1, 2, &cfg),
            ConjBound::Exhausted
        );
    }

    #[test]
    fn h2n_multiplier_two_fails_and_replays() {
        let cfg = small(60);
        let report = run_h2n_in_v(&cfg, 2);
        assert_eq!(report.verdict, Verdict::Fail);
        for failure in &report.failures {
            let again = replay("h2n-in-v", failure, &cfg).unwrap();
            assert!(again, "failure did not reproduce: {failure:?}");
        }
        // the explicit obstruction: x_-(-1; w^{2n}) moves n lambda'
        let f = cfg.field;
        for n in 1..=2 {
            let g = AffElt::x_minus(-1, Scalar::uniformizer_pow(f, 2 * n));
            assert!(aff_member(&g, AffSpec::HN(2 * n as u32)).unwrap().member);
            assert!(check_h2n(&g, n as u32).is_err());
        }
        assert_eq!(run_h2n_in_v(&small(40), 3).verdict, Verdict::Pass);
    }

    #[test]
    fn n_escape_examples() {
        let f = FieldSpec::padic(3).unwrap();
        assert_eq!(n_escape(&AffElt::identity(f)), None);
        let g = AffElt::x_plus(2, Scalar::uniformizer_pow(f, 5));
        assert_eq!(n_escape(&g), Some(3));
        assert!(!aff_member(&g, AffSpec::HN(3)).unwrap().member);
        assert!(aff_member(&g, AffSpec::HN(2)).unwrap().member);
        let t = AffElt::torus(Scalar::one(f), Scalar::from_int(f, 10)).unwrap();
        assert_eq!(n_escape(&t), Some(3));
    }

    #[test]
    fn center_separation_depends_on_characteristic() {
        let report = run_suite("center-separation", &small(1)).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let cfg2 = SamplerConfig {
            field: FieldSpec::padic(2).unwrap(),
            ..small(1)
        };
        assert_eq!(
            run_suite("center-separation", &cfg2).unwrap().verdict,
            Verdict::NotApplicable
        );
        let cfgq = SamplerConfig {
            field: FieldSpec::rational_function(2).unwrap(),
            ..small(1)
        };
        assert_eq!(
            run_suite("center-separation", &cfgq).unwrap().verdict,
            Verdict::NotApplicable
        );
    }

    #[test]
    fn kerpi_suite_skips_center_witness_in_characteristic_two() {
        let cfg2 = SamplerConfig {
            field: FieldSpec::padic(2).unwrap(),
            ..small(20)
        };
        let report = run_suite("kerpi-sl2", &cfg2).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.notes.iter().any(|n| n.contains("skipped")));
    }

    #[test]
    fn suites_pass_at_small_scale() {
        let cfg = small(20);
        for name in suite_names().filter(|n| *n != "conj-invariance") {
            let report = run_suite(name, &cfg).unwrap();
            assert!(report.passed(), "{name}: {:?}", report.failures);
        }
        let cfgq = SamplerConfig {
            field: FieldSpec::rational_function(2).unwrap(),
            ..small(20)
        };
        for name in [
            "commutation",
            "uut-uniqueness",
            "kerpi-sl2",
            "hn-closure",
            "tree-retraction",
            "fix-criterion",
        ] {
            let report = run_suite(name, &cfgq).unwrap();
            assert!(report.passed(), "{name}: {:?}", report.failures);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = small(15);
        let mut a = run_suite("tree-retraction", &cfg).unwrap();
        let mut b = run_suite("tree-retraction", &cfg).unwrap();
        a.elapsed_ms = None;
        b.elapsed_ms = None;
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
