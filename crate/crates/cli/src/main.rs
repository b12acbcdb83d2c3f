//! `kmtopo` command-line front end.

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kmtopo::affine_sl2::{aff_member, kp_witness, v_factorize, AffElt, AffSpec};
use kmtopo::expr::{parse_element, parse_point, parse_rational, ExprError};
use kmtopo::harness::{run_suite, suite_names, SamplerConfig, SuiteReport, Verdict};
use kmtopo::root_data::{ApartmentVec, RootGenSys, TitsClass};
use kmtopo::sl2_rank1::{
    birkhoff_decompose, fixed_interval, sl2_member, tree_retract, upt_decompose, Membership,
    Sl2Elt, Sl2Spec,
};
use kmtopo::valued_field::{FieldSpec, Scalar};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(
    name = "kmtopo",
    version,
    about = "Valued-field filtrations on SL_2 and affine SL_2"
)]
struct Cli {
    /// `p:<prime>` for Q with the p-adic valuation, `fq:<prime>` for F_q(t).
    #[arg(long, global = true, default_value = "p:3")]
    field: FieldSpec,
    /// Emit structured JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    Sl2,
    Affine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Upt,
    Birkhoff,
    Vform,
}

#[derive(Subcommand)]
enum Command {
    /// List real roots up to a height; optionally classify a vector.
    Roots {
        #[arg(long, default_value = "affine-sl2")]
        system: String,
        #[arg(long, default_value_t = 3)]
        height: u32,
        /// Comma-separated apartment coordinates to locate in the Tits cone.
        #[arg(long, allow_hyphen_values = true)]
        classify: Option<String>,
        #[arg(long, default_value_t = 64)]
        max_steps: usize,
    },
    /// Evaluate the character `m a + n delta` on a torus element.
    Char {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        expr: String,
    },
    /// Multiply element expressions.
    Mul {
        #[arg(long, value_enum, default_value = "affine")]
        group: Group,
        #[arg(required = true)]
        exprs: Vec<String>,
    },
    /// Test membership in a filtration subgroup.
    Member {
        /// `kerpi:n`, `hn:n`, `tn:n`, `tnphi:n`, `center`, `centerO`, `vform:n`,
        /// or for SL_2: `sl2-kerpi:n`, `sl2-tn:n`, `sl2-tnunits`,
        /// `sl2-vlambda:n`, `fix:y`, `bigcell-o`.
        #[arg(long)]
        spec: String,
        expr: String,
    },
    /// Factor an element.
    Decompose {
        #[arg(long, value_enum, default_value = "upt")]
        kind: Kind,
        expr: String,
    },
    /// Retract a tree point onto the standard apartment.
    Retract { point: String },
    /// Tree points fixed by an SL_2 element.
    FixInterval { expr: String },
    /// Translation vector of a torus element.
    Nu { expr: String },
    /// Root heights along `r_1 r_0 r_1 ...` and the first factorial overtake.
    KpWitness {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Run verification suites.
    Verify {
        /// A suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        /// Include elapsed milliseconds.
        #[arg(long)]
        timing: bool,
        /// Also write the JSON report to this file.
        #[arg(long)]
        out: Option<String>,
    },
}

enum CliError {
    Usage(String),
    Validation(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn invalid(e: impl fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// Text and JSON renderings of one command's result.
struct Output {
    text: String,
    json: Value,
    code: u8,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output {
            text,
            json,
            code: 0,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                let mut json = out.json;
                json.as_object_mut()
                    .expect("object")
                    .insert("schema".into(), json!(SCHEMA));
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json).expect("serializable")
                );
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("{e}");
            if cli.json {
                let kind = match e {
                    CliError::Usage(_) => "usage",
                    CliError::Validation(_) => "validation",
                };
                println!(
                    "{}",
                    json!({"schema": SCHEMA, "error": {"kind": kind, "message": e.to_string()}})
                );
            }
            ExitCode::from(match e {
                CliError::Usage(_) => 1,
                CliError::Validation(_) => 2,
            })
        }
    }
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let field = cli.field;
    match &cli.command {
        Command::Roots {
            system,
            height,
            classify,
            max_steps,
        } => roots(system, *height, classify.as_deref(), *max_steps),
        Command::Char { m, n, expr } => {
            let t = torus(field, expr)?;
            let v = t.eval_char(*m, *n);
            Ok(Output::ok(
                format!("{v}\nvaluation {}\n", v.valuation()),
                json!({"command": "char", "value": v.to_string(), "valuation": v.valuation().to_string()}),
            ))
        }
        Command::Mul { group, exprs } => {
            let mut text = String::new();
            let product = match group {
                Group::Sl2 => {
                    let mut g = Sl2Elt::identity(field);
                    for e in exprs {
                        g = g.mul(&parse_element(field, e)?.to_sl2(field)?);
                    }
                    g.to_string()
                }
                Group::Affine => {
                    let mut g = AffElt::identity(field);
                    for e in exprs {
                        g = g.mul(&parse_element(field, e)?.to_affine(field)?);
                    }
                    g.to_string()
                }
            };
            text.push_str(&product);
            text.push('\n');
            Ok(Output::ok(
                text,
                json!({"command": "mul", "product": product}),
            ))
        }
        Command::Member { spec, expr } => member(field, spec, expr),
        Command::Decompose { kind, expr } => decompose(field, *kind, expr),
        Command::Retract { point } => {
            let p = parse_point(field, point)?.to_point(field)?;
            let y = tree_retract(&p);
            Ok(Output::ok(
                format!("{y}\n"),
                json!({"command": "retract", "y": y.to_string()}),
            ))
        }
        Command::FixInterval { expr } => {
            let g = parse_element(field, expr)?.to_sl2(field)?;
            let iv = fixed_interval(&g);
            Ok(Output::ok(
                format!("{iv}\n"),
                json!({"command": "fix-interval", "interval": iv.to_string()}),
            ))
        }
        Command::Nu { expr } => {
            let v = torus(field, expr)?.nu_translation();
            let coords: Vec<String> = v.0.iter().map(|q| q.to_string()).collect();
            Ok(Output::ok(
                format!("{v}\n"),
                json!({"command": "nu", "coords": coords}),
            ))
        }
        Command::KpWitness { n, depth } => {
            if *n == 0 {
                return Err(CliError::Usage("--n must be positive".into()));
            }
            let w = kp_witness(*n, *depth);
            let mut text = String::new();
            for (i, (beta, ht)) in w.betas.iter().enumerate() {
                text.push_str(&format!("{:>3}  {beta}  height {ht}\n", i + 1));
            }
            match w.witness_index {
                Some(i) => text.push_str(&format!("witness index {i}\n")),
                None => text.push_str("witness index not found\n"),
            }
            let betas: Vec<Value> = w
                .betas
                .iter()
                .map(|(b, h)| json!({"root": b.0, "height": h}))
                .collect();
            Ok(Output::ok(
                text,
                json!({"command": "kp-witness", "n": n, "betas": betas, "witness_index": w.witness_index}),
            ))
        }
        Command::Verify {
            suite,
            seed,
            trials,
            timing,
            out,
        } => verify(field, suite, *seed, *trials, *timing, out.as_deref()),
    }
}

fn torus(field: FieldSpec, expr: &str) -> Result<kmtopo::affine_sl2::AffTorusElt, CliError> {
    parse_element(field, expr)?
        .to_affine(field)?
        .as_torus()
        .ok_or_else(|| invalid("expression is not a torus element"))
}

fn roots(
    system: &str,
    height: u32,
    classify: Option<&str>,
    max_steps: usize,
) -> Result<Output, CliError> {
    let sys = RootGenSys::load(system).map_err(invalid)?;
    let roots = sys.real_roots_up_to_height(height);
    let positive = roots.iter().filter(|r| r.is_positive()).count();
    let mut text = format!(
        "{} real roots up to height {height} ({positive} positive)\n",
        roots.len()
    );
    let mut listed = Vec::new();
    for r in &roots {
        text.push_str(&format!("{r}  height {}\n", r.height()));
        listed.push(json!({"root": r.0, "height": r.height()}));
    }
    let mut json = json!({"command": "roots", "system": system, "height": height, "roots": listed});
    if let Some(src) = classify {
        let coords = src
            .split(',')
            .map(|c| parse_rational(c.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        if coords.len() != sys.rank() {
            return Err(invalid(format!("expected {} coordinates", sys.rank())));
        }
        let v = ApartmentVec(coords);
        match sys.tits_classify(&v, max_steps) {
            TitsClass::InCone { w, face, dominant } => {
                let n = sys.n_of_lambda(&v, max_steps).ok();
                let face: Vec<usize> = face.into_iter().collect();
                text.push_str(&format!("{v} = {w} . {dominant}, face {face:?}"));
                if let Some(n) = &n {
                    text.push_str(&format!(", N = {n}"));
                }
                text.push('\n');
                json["classify"] = json!({
                    "class": "in-cone",
                    "word": w.word(),
                    "dominant": dominant.0.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                    "face": face,
                    "n_of_lambda": n.map(|n| n.to_string()),
                });
            }
            TitsClass::NotClassified => {
                text.push_str(&format!("{v} not classified within {max_steps} steps\n"));
                json["classify"] = json!({"class": "not-classified"});
            }
        }
    }
    Ok(Output::ok(text, json))
}

enum AnySpec {
    Sl2(Sl2Spec),
    Affine(AffSpec),
}

fn parse_level(name: &str, arg: Option<&str>) -> Result<u32, CliError> {
    let arg =
        arg.ok_or_else(|| CliError::Usage(format!("spec {name} needs a level, e.g. {name}:1")))?;
    match arg.parse::<u32>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(CliError::Usage(format!(
            "bad level {arg:?} for spec {name}"
        ))),
    }
}

fn parse_spec(src: &str) -> Result<AnySpec, CliError> {
    let (name, arg) = match src.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (src, None),
    };
    let level = || parse_level(name, arg);
    let no_arg = |spec: AnySpec| match arg {
        None => Ok(spec),
        Some(_) => Err(CliError::Usage(format!("spec {name} takes no level"))),
    };
    match name {
        "kerpi" => Ok(AnySpec::Affine(AffSpec::KerPiN(level()?))),
        "hn" => Ok(AnySpec::Affine(AffSpec::HN(level()?))),
        "tn" => Ok(AnySpec::Affine(AffSpec::TN(level()?))),
        "tnphi" => Ok(AnySpec::Affine(AffSpec::TnPhi(level()?))),
        "vform" => Ok(AnySpec::Affine(AffSpec::VForm(level()?))),
        "center" => no_arg(AnySpec::Affine(AffSpec::Center)),
        "centerO" => no_arg(AnySpec::Affine(AffSpec::CenterO)),
        "sl2-kerpi" => Ok(AnySpec::Sl2(Sl2Spec::KerPi(level()?))),
        "sl2-tn" => Ok(AnySpec::Sl2(Sl2Spec::Tn(level()?))),
        "sl2-vlambda" => Ok(AnySpec::Sl2(Sl2Spec::VLambda(level()?))),
        "sl2-tnunits" => no_arg(AnySpec::Sl2(Sl2Spec::TnUnits)),
        "bigcell-o" => no_arg(AnySpec::Sl2(Sl2Spec::BigCellO)),
        "fix" => {
            let y = arg.ok_or_else(|| {
                CliError::Usage("spec fix needs a coordinate, e.g. fix:1/2".into())
            })?;
            Ok(AnySpec::Sl2(Sl2Spec::FixPoint(parse_rational(y)?)))
        }
        other => Err(CliError::Usage(format!("unknown spec {other:?}"))),
    }
}

fn member(field: FieldSpec, spec: &str, expr: &str) -> Result<Output, CliError> {
    let m: Membership = match parse_spec(spec)? {
        AnySpec::Sl2(s) => sl2_member(&parse_element(field, expr)?.to_sl2(field)?, &s),
        AnySpec::Affine(s) => {
            aff_member(&parse_element(field, expr)?.to_affine(field)?, s).map_err(invalid)?
        }
    };
    let text = match &m.reason {
        Some(r) if !m.member => format!("false: {r}\n"),
        _ => format!("{}\n", m.member),
    };
    Ok(Output::ok(
        text,
        json!({"command": "member", "spec": spec, "member": m.member, "reason": m.reason}),
    ))
}

fn decompose(field: FieldSpec, kind: Kind, expr: &str) -> Result<Output, CliError> {
    let e = parse_element(field, expr)?;
    let s = |x: &Scalar| x.to_string();
    match kind {
        Kind::Upt => {
            let u = upt_decompose(&e.to_sl2(field)?).map_err(invalid)?;
            Ok(Output::ok(
                format!("b = {}\nc = {}\ndelta = {}\n", u.b, u.c, u.delta),
                json!({"command": "decompose", "kind": "upt", "b": s(&u.b), "c": s(&u.c), "delta": s(&u.delta)}),
            ))
        }
        Kind::Birkhoff => {
            let b = birkhoff_decompose(&e.to_sl2(field)?);
            Ok(Output::ok(
                format!("beta = {}\nn = {}\ngamma = {}\n", b.beta, b.n, b.gamma),
                json!({"command": "decompose", "kind": "birkhoff", "beta": s(&b.beta), "n": b.n.to_string(), "gamma": s(&b.gamma)}),
            ))
        }
        Kind::Vform => {
            let g = e.to_affine(field)?;
            match v_factorize(&g) {
                Some(v) => {
                    let t = v.torus.to_elt();
                    Ok(Output::ok(
                        format!("plus = {}\nminus = {}\ntorus = {}\n", v.plus, v.minus, t),
                        json!({"command": "decompose", "kind": "vform", "plus": v.plus.to_string(),
                               "minus": v.minus.to_string(), "torus": t.to_string()}),
                    ))
                }
                None => Err(invalid("no U+ U- T factorization")),
            }
        }
    }
}

fn verify(
    field: FieldSpec,
    suite: &str,
    seed: u64,
    trials: u64,
    timing: bool,
    out: Option<&str>,
) -> Result<Output, CliError> {
    let names: Vec<&str> = if suite == "all" {
        suite_names().collect()
    } else if suite_names().any(|n| n == suite) {
        vec![suite]
    } else {
        return Err(CliError::Usage(format!("unknown suite {suite:?}")));
    };
    let cfg = SamplerConfig {
        seed,
        field,
        trials,
        ..SamplerConfig::default()
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for name in names {
        let mut report = run_suite(name, &cfg).map_err(|e| CliError::Usage(e.to_string()))?;
        if !timing {
            report.elapsed_ms = None;
        }
        reports.push(report);
    }
    let failed = reports.iter().any(|r| r.verdict == Verdict::Fail);
    let mut text = String::new();
    for r in &reports {
        let verdict = match r.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "not applicable",
        };
        text.push_str(&format!(
            "{:<18} {verdict:<14} trials {}",
            r.name, r.trials_run
        ));
        if let Some(ms) = r.elapsed_ms {
            text.push_str(&format!("  {ms} ms"));
        }
        text.push('\n');
        for f in &r.failures {
            let trial = f.trial.map_or("-".to_string(), |t| t.to_string());
            text.push_str(&format!(
                "  trial {trial} [{}] inputs {:?}\n    expected {}\n    got      {}\n",
                f.case, f.inputs, f.expected, f.got
            ));
        }
    }
    let json = json!({"command": "verify", "verdict": if failed { "fail" } else { "pass" }, "suites": reports});
    if let Some(path) = out {
        let mut doc = json.clone();
        doc["schema"] = json!(SCHEMA);
        let body = serde_json::to_string_pretty(&doc).expect("serializable");
        std::fs::write(path, body + "\n").map_err(|e| invalid(format!("writing {path}: {e}")))?;
    }
    Ok(Output {
        text,
        json,
        code: if failed { 3 } else { 0 },
    })
}
