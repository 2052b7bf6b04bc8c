//! `bbp-tails`: evaluate the pi/4 and log-2 series tails through
//! independent routes, extract their hex digits at arbitrary positions,
//! verify the underlying identities, and compute exact moment linear
//! forms. Every run emits a human table or a machine-readable report.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand};

use commands::{ConstantArg, RouteArg, SuiteArg};
use report::RunReport;

#[derive(Parser)]
#[command(name = "bbp-tails", version, about = "series tails of pi/4 and log 2: evaluation, digit extraction, verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FormatArg {
    Text,
    Report,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate R_n (pi) or R'_n (log 2) by one route or all of them
    Eval(EvalArgs),
    /// Extract hex digits at a position without computing earlier ones
    Digits(DigitsArgs),
    /// Run a verification suite (exact identities, lemmas, cross-oracles)
    Verify(VerifyArgs),
    /// Exact linear form integral Q(1-x) x^(2n)/(1+x^2) as a + b pi + c log 2
    LinearForm(LinearFormArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Constant, positionally (equivalent to --constant)
    #[arg(value_enum, value_name = "CONSTANT")]
    constant_pos: Option<ConstantArg>,
    #[arg(long, value_enum)]
    constant: Option<ConstantArg>,
    /// Tail index n >= 1
    #[arg(long, default_value_t = 1)]
    n: u64,
    /// Working precision in bits (>= 64)
    #[arg(long, default_value_t = 256)]
    bits: u32,
    #[arg(long, value_enum, default_value_t = RouteArg::All)]
    route: RouteArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Args)]
struct DigitsArgs {
    /// Constant, positionally (equivalent to --constant)
    #[arg(value_enum, value_name = "CONSTANT")]
    constant_pos: Option<ConstantArg>,
    #[arg(long, value_enum)]
    constant: Option<ConstantArg>,
    /// Tail index; 0 means the full constant (pi or log 2)
    #[arg(long, default_value_t = 0)]
    n: u64,
    /// First hex position to extract (0 = first digit after the point)
    #[arg(long, default_value_t = 0)]
    pos: u64,
    /// Number of digits (1..=8)
    #[arg(long, default_value_t = 4)]
    count: u32,
    /// Treat a low-confidence window as a numeric failure (exit 3)
    #[arg(long)]
    strict: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite, positionally (equivalent to --suite)
    #[arg(value_enum, value_name = "SUITE")]
    suite_pos: Option<SuiteArg>,
    #[arg(long, value_enum)]
    suite: Option<SuiteArg>,
    /// Largest tail index for the oracle suite
    #[arg(long, default_value_t = 10)]
    n: u64,
    #[arg(long, default_value_t = 256)]
    bits: u32,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Args)]
struct LinearFormArgs {
    /// Comma-separated rational coefficients of Q, ascending degree
    /// (e.g. "1,0,2/3")
    #[arg(long)]
    poly: String,
    /// Tail index n >= 1
    #[arg(long, default_value_t = 1)]
    n: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

fn resolve<T: Copy + PartialEq + std::fmt::Debug>(
    positional: Option<T>,
    flag: Option<T>,
    what: &str,
) -> Result<T, String> {
    match (positional, flag) {
        (Some(p), Some(f)) if p == f => Ok(p),
        (Some(p), None) => Ok(p),
        (None, Some(f)) => Ok(f),
        (Some(p), Some(f)) => Err(format!(
            "conflicting {what}: positional {p:?} vs --{what} {f:?}"
        )),
        (None, None) => Err(format!("missing {what}: pass it positionally or via --{what}")),
    }
}

fn emit(report: &RunReport, format: FormatArg) {
    match format {
        FormatArg::Text => print!("{}", report.to_text()),
        FormatArg::Report => println!("{}", report.to_json()),
    }
}

fn main() {
    let cli = Cli::parse();
    let (report, code, format) = match cli.command {
        Command::Eval(args) => {
            let format = args.format;
            match resolve(args.constant_pos, args.constant, "constant") {
                Ok(constant) => {
                    let (r, c) = commands::cmd_eval(constant, args.n, args.bits, args.route);
                    (r, c, format)
                }
                Err(msg) => {
                    let mut r = RunReport::new("eval");
                    r.output("error", &msg);
                    r.status = report::Status::Error;
                    (r, report::EXIT_USAGE, format)
                }
            }
        }
        Command::Digits(args) => {
            let format = args.format;
            match resolve(args.constant_pos, args.constant, "constant") {
                Ok(constant) => {
                    let (r, c) =
                        commands::cmd_digits(constant, args.n, args.pos, args.count, args.strict);
                    (r, c, format)
                }
                Err(msg) => {
                    let mut r = RunReport::new("digits");
                    r.output("error", &msg);
                    r.status = report::Status::Error;
                    (r, report::EXIT_USAGE, format)
                }
            }
        }
        Command::Verify(args) => {
            let format = args.format;
            match resolve(args.suite_pos, args.suite, "suite") {
                Ok(suite) => {
                    let (r, c) = commands::cmd_verify(suite, args.n, args.bits);
                    (r, c, format)
                }
                Err(msg) => {
                    let mut r = RunReport::new("verify");
                    r.output("error", &msg);
                    r.status = report::Status::Error;
                    (r, report::EXIT_USAGE, format)
                }
            }
        }
        Command::LinearForm(args) => {
            let (r, c) = commands::cmd_linear_form(&args.poly, args.n);
            (r, c, args.format)
        }
    };
    emit(&report, format);
    std::process::exit(code);
}
