//! `dilogkit` command-line front end.

use clap::{Parser, Subcommand, ValueEnum};
use dilogkit::algebra::{roots_all, IntPolynomial};
use dilogkit::expr::{self, Binding};
use dilogkit::harness::{self, CorpusItem, Report, Summary, VerifyConfig, DEFAULT_SEED};
use dilogkit::ladder::{check_ladder, LadderSpec};
use dilogkit::numerics::{format_complex, format_real, format_sci};
use dilogkit::quad::QuadCheck;
use dilogkit::relation::{find_integer_relation, parse_values, RelationProblem};
use dilogkit::{Error, PrecisionContext};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const MIN_VERIFY_DIGITS: u32 = 20;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "dilogkit", version, about = "High-precision dilogarithm identities")]
struct Cli {
    /// Working precision in decimal digits.
    #[arg(long, global = true, default_value_t = 60)]
    digits: u32,
    /// Pass threshold 10^-E; defaults to digits - 10.
    #[arg(long = "tol-exp", global = true, allow_hyphen_values = true)]
    tol_exp: Option<i64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for `verify`; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for parametric sampling.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate an expression.
    Eval {
        expr: String,
        /// name=expression, repeatable.
        #[arg(long = "bind", short = 'b')]
        bind: Vec<String>,
    },
    /// Verify a corpus file or directory.
    Verify { path: PathBuf },
    /// Check one ladder file.
    Ladder { file: PathBuf },
    /// All complex roots of an integer polynomial.
    Roots { poly: String },
    /// Integer relation search over values read one per line.
    Pslq {
        file: PathBuf,
        #[arg(long = "max-norm", default_value_t = 1000)]
        max_norm: u64,
    },
    /// Run a quadrature cross-check by file or id.
    Quadcheck {
        target: String,
        /// Where ids are looked up.
        #[arg(long, default_value = "corpus/quad")]
        dir: PathBuf,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn exit_code(e: &Error) -> u8 {
    match e.root_cause() {
        Error::Syntax { .. } | Error::Unbound(_) | Error::Invalid(_) | Error::Io(_) | Error::EmptyDomain(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if cli.digits == 0 {
        return Err(usage("--digits must be positive"));
    }
    let ctx = PrecisionContext::new(cli.digits);
    match &cli.cmd {
        Cmd::Eval { expr, bind } => cmd_eval(cli, &ctx, expr, bind),
        Cmd::Verify { path } => {
            need_verify_digits(cli)?;
            cmd_verify(cli, &ctx, path)
        }
        Cmd::Ladder { file } => {
            need_verify_digits(cli)?;
            cmd_ladder(cli, &ctx, file)
        }
        Cmd::Roots { poly } => cmd_roots(cli, &ctx, poly),
        Cmd::Pslq { file, max_norm } => cmd_pslq(cli, &ctx, file, *max_norm),
        Cmd::Quadcheck { target, dir } => {
            need_verify_digits(cli)?;
            cmd_quadcheck(cli, &ctx, target, dir)
        }
    }
}

fn need_verify_digits(cli: &Cli) -> Result<(), Failure> {
    if cli.digits < MIN_VERIFY_DIGITS {
        return Err(usage(format!("verification needs --digits >= {MIN_VERIFY_DIGITS}")));
    }
    Ok(())
}

fn config(cli: &Cli) -> VerifyConfig {
    VerifyConfig { seed: cli.seed, tol_exp: cli.tol_exp, jobs: cli.jobs }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn cmd_eval(cli: &Cli, ctx: &PrecisionContext, text: &str, binds: &[String]) -> Result<u8, Failure> {
    let mut b = Binding::new();
    for spec in binds {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("--bind expects name=expr, got {spec}")))?;
        let v = expr::eval_str(value.trim(), &b, ctx)?;
        b.insert(name.trim().to_string(), v);
    }
    let v = expr::eval_str(text, &b, ctx)?;
    match cli.format {
        Format::Text => println!("{}", format_complex(&v, cli.digits)),
        Format::Json => print_json(&json!({
            "re": format_real(v.real(), cli.digits),
            "im": format_real(v.imag(), cli.digits),
            "digits": cli.digits,
        })),
    }
    Ok(0)
}

fn report_line(r: &Report) -> String {
    let mut line = format!("{:<12} {:<40} residual {}", r.outcome.label(), r.id, r.max_residual_text);
    if let Some(err) = r.samples.iter().find_map(|s| s.error.as_ref()) {
        line.push_str(&format!("  [{err}]"));
    }
    line
}

fn cmd_verify(cli: &Cli, ctx: &PrecisionContext, path: &Path) -> Result<u8, Failure> {
    if !path.exists() {
        return Err(usage(format!("no such file or directory: {}", path.display())));
    }
    let cfg = config(cli);
    let summary = harness::verify_corpus(path, ctx, &cfg)?;
    match cli.format {
        Format::Text => print_summary(&summary, &cfg, ctx),
        Format::Json => print_json(&serde_json::to_value(&summary).expect("summary")),
    }
    Ok(if summary.success { 0 } else { EXIT_FAIL })
}

fn print_summary(s: &Summary, cfg: &VerifyConfig, ctx: &PrecisionContext) {
    println!("# seed {} digits {} tolerance 1e-{}", s.seed, s.digits, cfg.tol_exp(ctx));
    for r in &s.reports {
        println!("{}", report_line(r));
    }
    println!("{}", s.line());
}

fn cmd_ladder(cli: &Cli, ctx: &PrecisionContext, file: &Path) -> Result<u8, Failure> {
    let spec = LadderSpec::load(file)?;
    let rep = check_ladder(&spec, ctx, cli.tol_exp);
    let label = if rep.pass { "PASS" } else { "FAIL" };
    match cli.format {
        Format::Text => {
            let mut line = format!("{label} {} residual {} (tolerance 1e-{})", rep.id, rep.residual_text, rep.tol_exp);
            if let Some(e) = &rep.error {
                line.push_str(&format!("  [{e}]"));
            }
            println!("{line}");
        }
        Format::Json => print_json(&serde_json::to_value(&rep).expect("report")),
    }
    if let Some(e) = &rep.error {
        return Err(Failure { code: EXIT_NUMERIC, msg: e.clone() });
    }
    Ok(if rep.pass { 0 } else { EXIT_FAIL })
}

fn cmd_roots(cli: &Cli, ctx: &PrecisionContext, text: &str) -> Result<u8, Failure> {
    let p = IntPolynomial::parse(text)?;
    let roots = roots_all(&p, ctx)?;
    let shown: Vec<String> = roots.iter().map(|z| format_complex(z, cli.digits)).collect();
    match cli.format {
        Format::Text => {
            for s in &shown {
                println!("{s}");
            }
        }
        Format::Json => {
            let list: Vec<_> = roots
                .iter()
                .map(|z| json!({"re": format_real(z.real(), cli.digits), "im": format_real(z.imag(), cli.digits)}))
                .collect();
            print_json(&json!({"poly": p.to_text(), "roots": list, "digits": cli.digits}));
        }
    }
    Ok(0)
}

fn cmd_pslq(cli: &Cli, ctx: &PrecisionContext, file: &Path, max_norm: u64) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let values = parse_values(&text, ctx.prec())?;
    let prob = RelationProblem::new(values, max_norm, cli.digits);
    let res = find_integer_relation(&prob, ctx)?;
    let margin = format_sci(&res.confidence_margin, 4);
    match (&res.coeffs, cli.format) {
        (Some(c), Format::Text) => {
            let v: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            println!("{}", v.join(" "));
            println!("# residual {} margin {margin}", format_sci(&res.residual, 4));
        }
        (None, Format::Text) => println!("NONE norm > {:.6e}", res.norm_bound),
        (c, Format::Json) => print_json(&json!({
            "coeffs": c.as_ref().map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
            "residual": format_sci(&res.residual, 4),
            "margin": margin,
            "norm_bound": res.norm_bound,
            "iterations": res.iterations,
        })),
    }
    Ok(if res.coeffs.is_some() { 0 } else { EXIT_FAIL })
}

fn find_quad(target: &str, dir: &Path) -> Result<PathBuf, Failure> {
    let p = PathBuf::from(target);
    if p.is_file() {
        return Ok(p);
    }
    let files = harness::corpus_files(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    for f in files {
        if let Ok(CorpusItem::Quad(q)) = CorpusItem::load(&f) {
            if q.id == target {
                return Ok(f);
            }
        }
    }
    Err(usage(format!("no quadrature check {target} under {}", dir.display())))
}

fn cmd_quadcheck(cli: &Cli, ctx: &PrecisionContext, target: &str, dir: &Path) -> Result<u8, Failure> {
    let path = find_quad(target, dir)?;
    let mut q = QuadCheck::load(&path)?;
    if let Some(t) = cli.tol_exp {
        q.tol_exp = u32::try_from(t).map_err(|_| usage("--tol-exp must be non-negative here"))?;
    }
    let rep = q.run(ctx)?;
    match cli.format {
        Format::Text => {
            for (name, value, err) in &rep.integrals {
                println!("{name} = {value}  (error estimate {err:.2e})");
            }
            println!("lhs = {}", rep.lhs);
            println!("rhs = {}", rep.rhs);
            let label = if rep.pass { "PASS" } else { "FAIL" };
            println!("{label} {} difference {:.3e} (tolerance 1e-{})", rep.id, rep.difference, rep.tol_exp);
        }
        Format::Json => print_json(&serde_json::to_value(&rep).expect("report")),
    }
    Ok(if rep.pass { 0 } else { EXIT_FAIL })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_kind() {
        assert_eq!(exit_code(&Error::Syntax { pos: 0, expected: "x".into() }), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Domain("d".into()).at("lhs")), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::Convergence("c".into())), EXIT_NUMERIC);
    }

    #[test]
    fn parses_flags() {
        let c = Cli::try_parse_from(["dilogkit", "verify", "corpus", "--digits", "40", "--tol-exp", "30"]).unwrap();
        assert_eq!(c.digits, 40);
        assert_eq!(c.tol_exp, Some(30));
        assert!(matches!(c.cmd, Cmd::Verify { .. }));
    }

    #[test]
    fn rejects_low_digits_for_verify() {
        let c = Cli::try_parse_from(["dilogkit", "--digits", "10", "verify", "x"]).unwrap();
        assert_eq!(run(&c).err().map(|f| f.code), Some(EXIT_USAGE));
    }
}
