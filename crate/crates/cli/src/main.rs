use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kzp::num::{format_rat, is_prime, parse_rat, Int};
use kzp::oracle::{truncated_measure, OracleError};
use kzp::padic::PadicError;
use kzp::presburger::{parse, qe};
use kzp::ring::{
    certificate_from_json, certificate_to_json, decide_equal, measure_function, normalize_to_basic,
    presentation_from_json, presentation_to_json, verify_certificate, Equality, Presentation, RingError,
};
use kzp::semilinear::{count_parametric, to_cells, CountError};
use kzp::Formula;

#[derive(Parser)]
#[command(name = "kzp", version, about = "Exact p-adic measures of definable families")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// The prime p. Must match the prime of every input document.
    #[arg(short = 'p', long = "prime")]
    prime: Option<i64>,
    /// Parameter point, e.g. `s=3,t=5`. Without it, results stay symbolic.
    #[arg(long, num_args = 0..=1, default_missing_value = "")]
    at: Option<String>,
}

#[derive(Subcommand)]
enum Verb {
    /// Measure function of a presentation.
    Measure {
        doc: String,
        #[command(flatten)]
        common: Common,
    },
    /// Decide whether two presentations have equal measure.
    Eq {
        left: String,
        right: String,
        /// Multiply the left side by this rational first.
        #[arg(long)]
        scale: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Rewrite `ℓ·Ξ` into basic form.
    Normalize {
        doc: String,
        /// Write the certificate here.
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Write the basic document here instead of stdout.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Count the fibers of a Presburger family.
    Count {
        /// File holding the formula; `-` reads stdin.
        path: Option<String>,
        #[arg(long)]
        formula: Option<String>,
        /// Counted variables, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        vars: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
        #[arg(long, default_value = "true")]
        domain: String,
        #[command(flatten)]
        common: Common,
    },
    /// Eliminate the quantifiers of a Presburger formula.
    Qe {
        path: Option<String>,
        #[arg(long)]
        formula: Option<String>,
    },
    /// Bracket the measure at a parameter point by residue truncation.
    Oracle {
        doc: String,
        #[arg(long, default_value_t = 8)]
        depth: u32,
        #[arg(long, default_value_t = 12)]
        window: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Replay a certificate.
    Certify {
        cert: String,
        #[command(flatten)]
        common: Common,
    },
}

/// A failed run: exit code and a one-line diagnostic.
struct Failure(u8, String);

fn input(msg: impl Into<String>) -> Failure {
    Failure(2, msg.into())
}

impl From<RingError> for Failure {
    fn from(e: RingError) -> Self {
        let code = match &e {
            RingError::Diverges { .. } | RingError::Generator { source: PadicError::Diverges(_), .. } => 3,
            _ => 2,
        };
        Failure(code, e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = if matches!(e, OracleError::Diverges { .. }) { 3 } else { 2 };
        Failure(code, e.to_string())
    }
}

impl From<CountError> for Failure {
    fn from(e: CountError) -> Self {
        Failure(3, e.to_string())
    }
}

type Run = Result<(String, u8), Failure>;

fn read(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| input(format!("{path}: {e}")))
}

fn write(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn prime(c: &Common) -> Result<Int, Failure> {
    let p = c.prime.ok_or_else(|| input("missing -p/--prime"))?;
    let p = Int::from(p);
    if !is_prime(&p) {
        return Err(input("p must be prime"));
    }
    Ok(p)
}

fn load(path: &str, p: &Int) -> Result<Presentation, Failure> {
    let x = presentation_from_json(&read(path)?).map_err(|e| input(format!("{path}: {e}")))?;
    if x.p() != p {
        return Err(input(format!("{path}: document prime {} differs from -p {p}", x.p())));
    }
    Ok(x)
}

fn point(c: &Common, params: &[String]) -> Result<Option<BTreeMap<String, Int>>, Failure> {
    let Some(text) = &c.at else { return Ok(None) };
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| input(format!("--at: expected name=value, got `{part}`")))?;
        let v: Int = v.trim().parse().map_err(|_| input(format!("--at: `{v}` is not an integer")))?;
        out.insert(k.trim().to_string(), v);
    }
    if let Some(k) = out.keys().find(|k| !params.contains(k)) {
        return Err(input(format!("--at: unknown parameter `{k}`")));
    }
    if let Some(k) = params.iter().find(|k| !out.contains_key(*k)) {
        return Err(input(format!("--at: no value for parameter `{k}`")));
    }
    Ok(Some(out))
}

fn formula_arg(path: &Option<String>, inline: &Option<String>) -> Result<Formula, Failure> {
    let text = match (path, inline) {
        (_, Some(f)) => f.clone(),
        (Some(p), None) => read(p)?,
        (None, None) => return Err(input("give a formula file or --formula")),
    };
    parse(text.trim()).map_err(|e| input(format!("formula: {e}")))
}

fn show_point(pt: &[(String, Int)]) -> String {
    pt.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

fn measure(doc: &str, c: &Common) -> Run {
    let p = prime(c)?;
    let x = load(doc, &p)?;
    let mf = measure_function(&x)?;
    let at = point(c, &x.param_vars)?;
    if at.is_none() && !x.param_vars.is_empty() {
        return Ok((mf.expr.to_string(), 0));
    }
    let v = mf.eval(&at.unwrap_or_default()).map_err(|e| input(e.to_string()))?;
    Ok((format!("{}\n", format_rat(&v)), 0))
}

fn eq(left: &str, right: &str, scale: &Option<String>, c: &Common) -> Run {
    let p = prime(c)?;
    let mut a = load(left, &p)?;
    let b = load(right, &p)?;
    if let Some(q) = scale {
        let q = parse_rat(q).ok_or_else(|| input(format!("--scale: `{q}` is not a rational")))?;
        a = a.scalar_mul(&q);
    }
    if let Some(pt) = point(c, &a.param_vars)? {
        let va = measure_function(&a)?.eval(&pt).map_err(|e| input(e.to_string()))?;
        let vb = measure_function(&b)?.eval(&pt).map_err(|e| input(e.to_string()))?;
        if va == vb {
            return Ok(("Equal\n".into(), 0));
        }
        return Ok((format!("NotEqual: {} vs {}\n", format_rat(&va), format_rat(&vb)), 1));
    }
    Ok(match decide_equal(&a, &b)? {
        Equality::Equal => ("Equal\n".into(), 0),
        Equality::NotEqual { witness, v1, v2 } => {
            let at = if witness.is_empty() { String::new() } else { format!(" at {}", show_point(&witness)) };
            (format!("NotEqual{at}: {} vs {}\n", format_rat(&v1), format_rat(&v2)), 1)
        }
    })
}

fn normalize(doc: &str, cert: &Option<PathBuf>, output: &Option<PathBuf>, c: &Common) -> Run {
    let p = prime(c)?;
    let x = load(doc, &p)?;
    let n = normalize_to_basic(&x)?;
    if let Some(path) = cert {
        write(path, &certificate_to_json(&n.certificate))?;
    }
    let basic = presentation_to_json(&n.basic.presentation);
    let mut out = format!("ell = {}\n", n.ell);
    match output {
        Some(path) => write(path, &basic)?,
        None => {
            out.push_str(&basic);
            out.push('\n');
        }
    }
    Ok((out, 0))
}

fn count(f: &Formula, vars: &[String], params: &[String], domain: &str, c: &Common) -> Run {
    prime(c)?;
    let domain = parse(domain).map_err(|e| input(format!("--domain: {e}")))?;
    let cells = to_cells(&qe(f), vars, params);
    let pp = count_parametric(&cells, &qe(&domain))?;
    match point(c, params)? {
        None if !params.is_empty() => Ok((pp.to_string(), 0)),
        pt => {
            let pt = pt.unwrap_or_default();
            let v = pp.eval(&|v| pt.get(v).cloned()).ok_or_else(|| input("parameter point outside the domain"))?;
            Ok((format!("{}\n", format_rat(&v)), 0))
        }
    }
}

fn oracle(doc: &str, depth: u32, window: u32, c: &Common) -> Run {
    let p = prime(c)?;
    let x = load(doc, &p)?;
    let pt = point(c, &x.param_vars)?.unwrap_or_default();
    let b = truncated_measure(&x, &pt, depth, window, &x.ctx)?;
    Ok((format!("{b}\nwidth {}\n", format_rat(&b.width())), 0))
}

fn certify(path: &str, c: &Common) -> Run {
    let p = prime(c)?;
    let cert = certificate_from_json(&read(path)?).map_err(|e| input(format!("{path}: {e}")))?;
    if let Some(x) = cert.first() {
        if x.p() != &p {
            return Err(input(format!("{path}: certificate prime {} differs from -p {p}", x.p())));
        }
    }
    Ok(match verify_certificate(&cert) {
        Ok(()) => (format!("valid ({} steps)\n", cert.steps.len()), 0),
        Err(e) => (format!("invalid: {e}\n"), 1),
    })
}

fn run(cli: Cli) -> Run {
    match &cli.verb {
        Verb::Measure { doc, common } => measure(doc, common),
        Verb::Eq { left, right, scale, common } => eq(left, right, scale, common),
        Verb::Normalize { doc, cert, output, common } => normalize(doc, cert, output, common),
        Verb::Count { path, formula, vars, params, domain, common } => {
            count(&formula_arg(path, formula)?, vars, params, domain, common)
        }
        Verb::Qe { path, formula } => Ok((format!("{}\n", qe(&formula_arg(path, formula)?)), 0)),
        Verb::Oracle { doc, depth, window, common } => oracle(doc, *depth, *window, common),
        Verb::Certify { cert, common } => certify(cert, common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code)
        }
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
