//! Command-line front end. [`run`] parses arguments, writes to the given
//! streams and returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use rayon::prelude::*;

use crate::algebra::{AlgebraElement, ConformalAlgebra, Signature};
use crate::curved::{
    check_normality, gamma3_quartic, gamma4_quartic, polarize4, q3_correction, q3_polarized, q4_correction,
    q4_polarized, symbol_jet_at, CurvatureData, CurvedError, Jet, NormalityViolation,
};
use crate::io::{scalar_from_str, symbol_terms, CurvatureFile, OperatorFile, ProblemFile};
use crate::poly::{int, Poly, Scalar};
use crate::quantizer::{QuantizationProblem, Quantizer, QuantizerError};
use crate::sample::{scalar, seeded, vector, SampleRng};
use crate::spectral::{critical_table, distinct_criticals, EigenvalueTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CRITICAL: i32 = 3;
pub const EXIT_DEGREE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "confquant", version, about = "Exact conformally equivariant quantization on flat R^{p,q}")]
pub struct Cli {
    /// Seed for every random sample drawn by a command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quantize a symbol and write the operator as JSON.
    Quantize {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Curvature file; adds the degree-4 correction at the origin.
        #[arg(long)]
        curvature: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check equivariance of the quantization for every basis generator.
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated grades of the generators to check (-1, 0, 1).
        #[arg(long, allow_hyphen_values = true)]
        grade: Option<String>,
        /// Corrupt the lift on purpose.
        #[arg(long)]
        fuzz: bool,
    },
    /// List critical shift values.
    Criticals {
        #[arg(long)]
        signature: Signature,
        #[arg(long, default_value_t = 4)]
        kmax: u32,
    },
    /// Run normality, degeneration, polarization and guard checks on curvature data.
    CurvedCheck {
        curvature: PathBuf,
        #[arg(long, default_value = "1/2")]
        lambda: String,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Problem file (JSON).
    input: PathBuf,
    /// Must agree with the file when given.
    #[arg(long)]
    signature: Option<Signature>,
    /// Overrides the source weight in the file.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Overrides the target weight in the file.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, default_value_t = 4)]
    kmax: u32,
    #[arg(long)]
    allow_high_degree: bool,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

type CmdResult = Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Quantize { problem, curvature, output } => cmd_quantize(&problem, curvature.as_deref(), output.as_deref(), out),
        Command::Verify { problem, grade, fuzz } => cmd_verify(&problem, grade.as_deref(), fuzz, out),
        Command::Criticals { signature, kmax } => cmd_criticals(signature, kmax, out),
        Command::CurvedCheck { curvature, lambda, samples } => cmd_curved_check(&curvature, &lambda, samples, cli.seed, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))
}

fn parse_err(e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_PARSE, e.to_string())
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))
}

/// Names `delta` when it is one of `(m+1)/m`, `(m+2)/m`.
fn named_value(delta: &Scalar, m: usize) -> Option<&'static str> {
    let m = m as i64;
    if *delta == Scalar::new((m + 1).into(), m.into()) {
        Some("(m+1)/m")
    } else if *delta == Scalar::new((m + 2).into(), m.into()) {
        Some("(m+2)/m")
    } else {
        None
    }
}

fn quantizer_failure(e: QuantizerError, m: usize) -> Failure {
    match &e {
        QuantizerError::Critical { delta, .. } => {
            let witness = e.critical_witness().expect("critical");
            let name = named_value(delta, m).map(|n| format!(" = {n}")).unwrap_or_default();
            Failure::new(EXIT_CRITICAL, format!("critical value {witness}{name}"))
        }
        QuantizerError::DegreeTooHigh { .. } => Failure::new(EXIT_DEGREE, e.to_string()),
        _ => Failure::new(EXIT_FAILURE, e.to_string()),
    }
}

struct Loaded {
    quantizer: Quantizer,
    lambda: Scalar,
    mu: Scalar,
    symbol: Poly,
}

fn load_problem(args: &ProblemArgs) -> Result<Loaded, Failure> {
    let text = read(&args.input)?;
    let file = ProblemFile::from_json(&text).map_err(parse_err)?;
    let parsed = file.parse().map_err(parse_err)?;
    if let Some(sig) = args.signature {
        if sig != parsed.signature {
            return Err(Failure::new(
                EXIT_PARSE,
                format!("--signature {sig} does not match the file's {}", parsed.signature),
            ));
        }
    }
    let lambda = match &args.lambda {
        Some(s) => scalar_from_str(s).map_err(parse_err)?,
        None => parsed.lambda,
    };
    let mu = match &args.mu {
        Some(s) => scalar_from_str(s).map_err(parse_err)?,
        None => parsed.mu,
    };
    let degree = parsed.symbol.xi_degree().unwrap_or(0);
    let kmax = if args.allow_high_degree { args.kmax.max(degree) } else { args.kmax };
    let quantizer = Quantizer::with_options(parsed.signature, kmax, args.allow_high_degree)
        .map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
    Ok(Loaded { quantizer, lambda, mu, symbol: parsed.symbol })
}

fn load_curvature(path: &Path) -> Result<CurvatureData, Failure> {
    let text = read(path)?;
    CurvatureFile::from_json(&text).map_err(parse_err)?.to_data().map_err(parse_err)
}

fn curved_failure(e: CurvedError, m: usize) -> Failure {
    match &e {
        CurvedError::CriticalDenominator { delta, .. } => {
            let name = named_value(delta, m).unwrap_or("a critical value");
            Failure::new(
                EXIT_CRITICAL,
                format!("critical value delta={delta} = {name}: the degree-4 curvature correction is undefined ({e})"),
            )
        }
        CurvedError::DegreeTooHigh(_) => Failure::new(EXIT_DEGREE, e.to_string()),
        _ => Failure::new(EXIT_FAILURE, e.to_string()),
    }
}

fn cmd_quantize(args: &ProblemArgs, curvature: Option<&Path>, output: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let l = load_problem(args)?;
    let sig = l.quantizer.signature();
    let m = sig.dim();
    let delta = &l.mu - &l.lambda;
    let kappa = curvature.map(load_curvature).transpose()?;
    if let Some(k) = &kappa {
        if k.signature() != sig {
            return Err(Failure::new(EXIT_PARSE, "curvature file signature does not match the problem"));
        }
    }
    let quartic = l.symbol.xi_degree_part(4);
    let correction = match &kappa {
        Some(k) if !quartic.is_zero() => {
            let origin = vec![Scalar::zero(); m];
            let jet = symbol_jet_at(&quartic, &origin);
            let kjet = Jet::constant(k.clone(), CurvatureData::zero(sig), m);
            let q3 = q3_polarized(&jet, &kjet, &delta).map_err(|e| curved_failure(e, m))?;
            let q4 = q4_polarized(&jet, &kjet, &delta, &l.lambda).map_err(|e| curved_failure(e, m))?;
            Some(&q3 + &q4)
        }
        _ => None,
    };
    let problem = l.quantizer.problem(l.lambda.clone(), l.mu.clone(), l.symbol).map_err(|e| quantizer_failure(e, m))?;
    let op = l.quantizer.quantize(&problem).map_err(|e| quantizer_failure(e, m))?;
    let mut file = OperatorFile::from_operator(&op);
    file.curvature_correction = correction.as_ref().map(symbol_terms);
    let text = file.to_json();
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot write {}: {e}", path.display())))?,
        None => write_out(out, &text)?,
    }
    Ok(EXIT_OK)
}

fn parse_grades(text: Option<&str>) -> Result<Vec<i8>, Failure> {
    let Some(text) = text else {
        return Ok(vec![-1, 0, 1]);
    };
    let mut out = Vec::new();
    for part in text.split(',') {
        let g: i8 = part.trim().parse().map_err(|_| Failure::new(EXIT_PARSE, format!("invalid grade {part:?}")))?;
        if !(-1..=1).contains(&g) {
            return Err(Failure::new(EXIT_PARSE, format!("grade {g} is not one of -1, 0, 1")));
        }
        if !out.contains(&g) {
            out.push(g);
        }
    }
    Ok(out)
}

fn cmd_verify(args: &ProblemArgs, grade: Option<&str>, fuzz: bool, out: &mut dyn Write) -> CmdResult {
    let grades = parse_grades(grade)?;
    let l = load_problem(args)?;
    let m = l.quantizer.signature().dim();
    let quantizer = l.quantizer.with_fuzz(fuzz);
    let affine_only = grades.iter().all(|&g| g <= 0);
    let problem = if affine_only {
        quantizer.problem_unchecked(l.lambda, l.mu, l.symbol)
    } else {
        quantizer.problem(l.lambda, l.mu, l.symbol)
    }
    .map_err(|e| quantizer_failure(e, m))?;
    let lines = verify_lines(&quantizer, &problem, &grades).map_err(|e| quantizer_failure(e, m))?;
    let total = lines.len();
    let zero = lines.iter().filter(|(_, ok)| *ok).count();
    let mut text = String::new();
    for (line, _) in &lines {
        text.push_str(line);
        text.push('\n');
    }
    text.push_str(&format!("summary: {zero}/{total} residuals zero\n"));
    write_out(out, &text)?;
    Ok(if zero == total { EXIT_OK } else { EXIT_FAILURE })
}

fn verify_lines(
    quantizer: &Quantizer,
    problem: &QuantizationProblem,
    grades: &[i8],
) -> Result<Vec<(String, bool)>, QuantizerError> {
    let alg: &ConformalAlgebra = quantizer.algebra();
    let selected: Vec<(usize, i8, &AlgebraElement)> = alg
        .basis()
        .iter()
        .zip(alg.basis_grades())
        .enumerate()
        .filter(|(_, (_, g))| grades.contains(g))
        .map(|(i, (b, g))| (i, g, b))
        .collect();
    selected
        .par_iter()
        .map(|&(i, g, b)| {
            let r = quantizer.verify_equivariance(problem, b)?;
            let ok = r.is_zero();
            let status = if ok { "zero".to_string() } else { format!("nonzero ({} terms)", r.poly().len()) };
            Ok((format!("generator {i} grade {g} residual {status}"), ok))
        })
        .collect()
}

fn cmd_criticals(sig: Signature, kmax: u32, out: &mut dyn Write) -> CmdResult {
    let alg = ConformalAlgebra::new(sig);
    let table = EigenvalueTable::build(&alg, kmax).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
    let mut text = String::new();
    for cv in distinct_criticals(&critical_table(&table, kmax)) {
        text.push_str(&format!("{cv}\n"));
    }
    write_out(out, &text)?;
    Ok(EXIT_OK)
}

fn describe(v: &NormalityViolation) -> String {
    match v {
        NormalityViolation::Kappa0NotAntisymmetric { j, k } => format!("kappa0 not antisymmetric at ({j},{k})"),
        NormalityViolation::Kappa1NotAntisymmetric { j, k } => format!("kappa1 not antisymmetric at ({j},{k})"),
        NormalityViolation::NotConformal { j, k } => format!("kappa0({j},{k}) not in co(p,q)"),
        NormalityViolation::NonzeroTrace { j, k } => format!("kappa0({j},{k}) has nonzero trace"),
        NormalityViolation::NonzeroContraction { j, l, value } => {
            format!("contraction at (j,l)=({j},{l}) is {value}")
        }
    }
}

fn quartic_symbol(x: &[Scalar]) -> Poly {
    let lin = Poly::xi_linear(x.len(), x);
    let sq = &lin * &lin;
    &sq * &sq
}

fn random_scalar_jet(rng: &mut SampleRng, m: usize) -> Jet<Scalar> {
    let d1 = vector(rng, m);
    let mut d2 = vec![vec![Scalar::zero(); m]; m];
    for a in 0..m {
        for b in a..m {
            let v = scalar(rng);
            d2[a][b] = v.clone();
            d2[b][a] = v;
        }
    }
    Jet { value: scalar(rng), d1, d2: Some(d2) }
}

struct Suite {
    name: &'static str,
    failures: Vec<String>,
}

fn degeneration_suite(sig: Signature, kappa: &CurvatureData, lambda: &Scalar, rng: &mut SampleRng, n: usize) -> Suite {
    let m = sig.dim();
    let delta = Scalar::new(1.into(), 5.into());
    let mut failures = Vec::new();
    let mut datasets = vec![("zero curvature", CurvatureData::zero(sig))];
    if kappa.is_zero() {
        datasets.push(("input curvature", kappa.clone()));
    }
    for (label, k) in &datasets {
        let kjet = Jet::constant(k.clone(), CurvatureData::zero(sig), m);
        for i in 0..n {
            let h = vector(rng, m);
            let x = vector(rng, m);
            let t = random_scalar_jet(rng, m);
            let checks = [
                ("gamma3", gamma3_quartic(k, &h, &x)),
                ("gamma4", gamma4_quartic(k, &h, &x, lambda)),
                ("Q3", q3_correction(&t, &kjet, &x, &delta).unwrap_or_else(|_| Poly::one(m))),
                ("Q4", q4_correction(&t, &kjet, &x, &delta, lambda).unwrap_or_else(|_| Poly::one(m))),
            ];
            for (name, v) in checks {
                if !v.is_zero() {
                    failures.push(format!("{name} nonzero for {label} (sample {i})"));
                }
            }
        }
    }
    Suite { name: "degeneration", failures }
}

fn polarization_suite(kappa: &CurvatureData, lambda: &Scalar, rng: &mut SampleRng, n: usize) -> Suite {
    let sig = kappa.signature();
    let m = sig.dim();
    let delta = Scalar::new(1.into(), 5.into());
    let kjet = Jet::constant(kappa.clone(), CurvatureData::zero(sig), m);
    let mut failures = Vec::new();
    for i in 0..n {
        let h = vector(rng, m);
        let x = vector(rng, m);
        let t = Jet::constant(scalar(rng), Scalar::zero(), m);
        let diag = [&x[..], &x[..], &x[..], &x[..]];
        if polarize4(|v| gamma3_quartic(kappa, &h, v), diag) != gamma3_quartic(kappa, &h, &x) {
            failures.push(format!("gamma3 diagonal (sample {i})"));
        }
        if polarize4(|v| gamma4_quartic(kappa, &h, v, lambda), diag) != gamma4_quartic(kappa, &h, &x, lambda) {
            failures.push(format!("gamma4 diagonal (sample {i})"));
        }
        let q3 = |v: &[Scalar]| q3_correction(&t, &kjet, v, &delta).expect("generic delta");
        if polarize4(q3, diag) != q3(&x) {
            failures.push(format!("Q3 diagonal (sample {i})"));
        }
        // polarized Q3 on X^4 agrees with the quartic formula
        let sym_jet = Jet::constant(quartic_symbol(&x).scale(&t.value), Poly::zero(m), m);
        match q3_polarized(&sym_jet, &kjet, &delta) {
            Ok(v) if v == q3(&x) => {}
            _ => failures.push(format!("Q3 polarized extension (sample {i})")),
        }
        let hs: Vec<Vec<Scalar>> = (0..4).map(|_| vector(rng, m)).collect();
        let a = polarize4(|v| gamma3_quartic(kappa, &h, v), [&hs[0], &hs[1], &hs[2], &hs[3]]);
        let b = polarize4(|v| gamma3_quartic(kappa, &h, v), [&hs[2], &hs[0], &hs[3], &hs[1]]);
        if a != b {
            failures.push(format!("gamma3 polarization not symmetric (sample {i})"));
        }
    }
    Suite { name: "polarization", failures }
}

fn guard_suite(kappa: &CurvatureData, lambda: &Scalar) -> Suite {
    let sig = kappa.signature();
    let m = sig.dim() as i64;
    let kjet = Jet::constant(kappa.clone(), CurvatureData::zero(sig), sig.dim());
    let t = Jet::constant(int(1), Scalar::zero(), sig.dim());
    let x = vec![int(1); sig.dim()];
    let d1 = Scalar::new((m + 1).into(), m.into());
    let d2 = Scalar::new((m + 2).into(), m.into());
    let generic = Scalar::new(1.into(), 5.into());
    let critical = |r: Result<Poly, CurvedError>| matches!(r, Err(CurvedError::CriticalDenominator { .. }));
    let mut failures = Vec::new();
    if !critical(q3_correction(&t, &kjet, &x, &d2)) {
        failures.push("Q3 accepted delta=(m+2)/m".to_string());
    }
    if d1 != d2 && critical(q3_correction(&t, &kjet, &x, &d1)) {
        failures.push("Q3 rejected delta=(m+1)/m".to_string());
    }
    for (d, name) in [(&d1, "(m+1)/m"), (&d2, "(m+2)/m")] {
        if !critical(q4_correction(&t, &kjet, &x, d, lambda)) {
            failures.push(format!("Q4 accepted delta={name}"));
        }
    }
    if critical(q3_correction(&t, &kjet, &x, &generic)) || critical(q4_correction(&t, &kjet, &x, &generic, lambda)) {
        failures.push("guard triggered at a generic delta".to_string());
    }
    Suite { name: "guards", failures }
}

fn cmd_curved_check(path: &Path, lambda: &str, samples: usize, seed: u64, out: &mut dyn Write) -> CmdResult {
    let kappa = load_curvature(path)?;
    let lambda = scalar_from_str(lambda).map_err(parse_err)?;
    let sig = kappa.signature();
    let mut rng = seeded(seed);
    let report = check_normality(&kappa);
    let normality = Suite { name: "normality", failures: report.violations.iter().map(describe).collect() };
    let mut text = String::new();
    let mut all_pass = true;
    let suites = [
        normality,
        degeneration_suite(sig, &kappa, &lambda, &mut rng, samples),
        polarization_suite(&kappa, &lambda, &mut rng, samples),
        guard_suite(&kappa, &lambda),
    ];
    for suite in &suites {
        if suite.failures.is_empty() {
            text.push_str(&format!("{}: PASS\n", suite.name));
        } else {
            all_pass = false;
            text.push_str(&format!("{}: FAIL\n", suite.name));
            for f in &suite.failures {
                text.push_str(&format!("  {f}\n"));
            }
        }
    }
    if let Some((j, l)) = report.contraction_witness() {
        text.push_str(&format!("normality witness: (j,l)=({j},{l})\n"));
    }
    write_out(out, &text)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_FAILURE })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("confquant").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn criticals_m2() {
        let (code, out, _) = run_args(&["criticals", "--signature", "2,0"]);
        assert_eq!(code, 0);
        assert!(out.lines().any(|l| l.starts_with("delta=3/2 ")));
        assert!(out.lines().any(|l| l.starts_with("delta=2 ")));
        let (_, empty, _) = run_args(&["criticals", "--signature", "2,0", "--kmax", "0"]);
        assert!(empty.is_empty());
    }

    #[test]
    fn grade_parsing() {
        assert_eq!(parse_grades(Some("-1,0")).ok(), Some(vec![-1, 0]));
        assert!(parse_grades(Some("2")).is_err());
        assert_eq!(parse_grades(None).ok(), Some(vec![-1, 0, 1]));
    }

    #[test]
    fn bad_arguments_exit_2() {
        assert_eq!(run_args(&["bogus"]).0, EXIT_PARSE);
        assert_eq!(run_args(&["criticals", "--signature", "x"]).0, EXIT_PARSE);
    }

    #[test]
    fn named_values() {
        assert_eq!(named_value(&int(2), 2), Some("(m+2)/m"));
        assert_eq!(named_value(&Scalar::new(4.into(), 3.into()), 3), Some("(m+1)/m"));
        assert_eq!(named_value(&int(1), 3), None);
    }
}
