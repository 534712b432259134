use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quartic_zeta_core::field::Field;
use quartic_zeta_core::oracle;
use quartic_zeta_core::padic::PrecisionProfile;
use quartic_zeta_core::zeta::{self, Computation, Mode, Step};
use quartic_zeta_core::{CurveInput, Error};

mod input;
mod report;

use report::{CountEntry, Report, Timings};

#[derive(Parser, Debug)]
#[command(name = "quartic-zeta", version, about = "Zeta functions of quartics y^4 + g(x) y^2 + h(x) = 0 over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the Weil polynomial of one curve.
    Compute(ComputeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Split,
    Full,
}

#[derive(Args, Debug)]
struct ComputeArgs {
    /// JSON curve description, or `-` for stdin.
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value = "split")]
    mode: ModeArg,
    /// Full proven precision schedule (default).
    #[arg(long, conflicts_with_all = ["fast", "n3", "n4", "n5"])]
    rigorous: bool,
    /// Small heuristic precisions; pair with --verify.
    #[arg(long, conflicts_with_all = ["n3", "n4", "n5"])]
    fast: bool,
    #[arg(long = "N3", requires_all = ["n4", "n5"])]
    n3: Option<u32>,
    #[arg(long = "N4", requires_all = ["n3", "n5"])]
    n4: Option<u32>,
    #[arg(long = "N5", requires_all = ["n3", "n4"])]
    n5: Option<u32>,
    /// Compare #C(F_(q^r)) with enumeration for r = 1..R.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=4))]
    verify: u8,
    /// Also run the other mode and print per-step timings side by side.
    #[arg(long)]
    bench: bool,
    #[arg(long)]
    json: bool,
}

const EXIT_INTERNAL: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_SINGULAR: u8 = 3;
const EXIT_ASSUMPTION: u8 = 4;
const EXIT_MISMATCH: u8 = 5;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) => EXIT_PARSE,
        Error::Singular(_) => EXIT_SINGULAR,
        Error::Assumption(_) => EXIT_ASSUMPTION,
        _ => EXIT_INTERNAL,
    }
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("reading stdin: {e}"))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))
    }
}

fn profile(args: &ComputeArgs, c: &CurveInput) -> PrecisionProfile {
    let (p, n) = (c.fq.characteristic(), c.fq.degree());
    match (args.fast, args.n3, args.n4, args.n5) {
        (true, ..) => PrecisionProfile::fast(p, n),
        (false, Some(n3), Some(n4), Some(n5)) => PrecisionProfile::custom(p, n, n3, n4, n5),
        _ => PrecisionProfile::rigorous(p, n),
    }
}

fn run_mode(c: &CurveInput, prof: &PrecisionProfile, mode: Mode) -> Result<(Computation, Timings), Error> {
    let mut t = Timings::default();
    let mut last = Instant::now();
    let mut on_step = |s: Step| {
        let now = Instant::now();
        t.set(s, now.duration_since(last).as_secs_f64() * 1e3);
        last = now;
    };
    let comp = zeta::compute(c, prof, mode, &mut on_step)?;
    Ok((comp, t))
}

fn compute(args: &ComputeArgs) -> Result<u8, (u8, String)> {
    let text = read_input(&args.input).map_err(|e| (EXIT_PARSE, e))?;
    let curve = input::parse_curve(&text).map_err(|e| (EXIT_PARSE, e))?;
    if let Err(e) = curve.ensure_smooth() {
        return Err((exit_code(&e), e.to_string()));
    }
    let prof = profile(args, &curve);
    prof.validate().map_err(|e| (EXIT_PARSE, format!("invalid precisions: {e}")))?;
    let mode = match args.mode {
        ModeArg::Split => Mode::Split,
        ModeArg::Full => Mode::Full,
    };
    let (comp, timings) = run_mode(&curve, &prof, mode).map_err(|e| (exit_code(&e), e.to_string()))?;

    let q = comp.weil.q;
    let rmax = (args.verify as usize).max(3);
    let engine = zeta::curve_counts(&comp.weil.p, q, rmax);
    let mut counts = Vec::new();
    let mut mismatch = false;
    for (k, &e) in engine.iter().enumerate() {
        let r = k + 1;
        let mut entry = CountEntry { r, engine: e, oracle: None, matches: None };
        if r <= args.verify as usize {
            match oracle::count_c(&curve, r) {
                Ok(o) => {
                    entry.oracle = Some(o as i128);
                    entry.matches = Some(o as i128 == e);
                    mismatch |= o as i128 != e;
                }
                Err(err) => eprintln!("r = {r}: oracle skipped: {err}"),
            }
        }
        counts.push(entry);
    }

    let bench = if args.bench {
        let other = match mode {
            Mode::Split => Mode::Full,
            Mode::Full => Mode::Split,
        };
        let (_, t_other) = run_mode(&curve, &prof, other).map_err(|e| (exit_code(&e), e.to_string()))?;
        Some(match mode {
            Mode::Split => report::Bench::new(timings.clone(), t_other),
            Mode::Full => report::Bench::new(t_other, timings.clone()),
        })
    } else {
        None
    };

    let rep = Report::new(&comp, counts, timings, bench);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
    } else {
        print!("{}", rep.text());
    }
    if mismatch {
        eprintln!("verification mismatch: engine and enumeration disagree");
        return Ok(EXIT_MISMATCH);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Compute(args) => match compute(&args) {
            Ok(code) => ExitCode::from(code),
            Err((code, msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(code)
            }
        },
    }
}
