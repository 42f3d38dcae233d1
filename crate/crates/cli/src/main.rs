//! `ultrafractal` command-line front-end.
//!
//! Exit codes: 0 success, 1 a check failed or the input has no contracting
//! system, 2 usage or input syntax, 3 a resource cap was hit.

mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use ultrafractal::ifs::Caps;
use ultrafractal::ordinal::ExtHeight;
use ultrafractal::space::OrdinalSpace;
use ultrafractal::Error;

#[derive(Parser, Debug)]
#[command(name = "ultrafractal", version, about = "Scattered ordinal spaces, height trees and their contracting systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cantor-Bendixson height, multiplicity and fractal verdict of a space.
    Classify(ClassifyArgs),
    /// Print a truncated canonical height tree.
    Tree(TreeArgs),
    /// Build the contracting system and run Hutchinson iteration.
    Ifs(IfsArgs),
    /// Run verification suites and print a pass/fail table.
    Verify(VerifyArgs),
    /// Locate fixed points and follow orbits towards them.
    Iterate(IterateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    All,
    Tree,
    Norm,
    Morphism,
    Ultrametric,
    Lipschitz,
    Partition,
    Words,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Space literal: an ordinal γ for [0, γ], or `cantor`.
    #[arg(value_parser = parse_space, allow_hyphen_values = true)]
    pub space: OrdinalSpace,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct TreeArgs {
    /// Root height: an ordinal literal or `inf`.
    #[arg(long, value_parser = parse_root_height, allow_hyphen_values = true)]
    pub height: ExtHeight,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(0..=10))]
    pub depth: u32,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub breadth: u32,
    /// Annotate nodes with their norm.
    #[arg(long)]
    pub norm: bool,
    #[arg(long, value_parser = parse_lambda, default_value = "1/2")]
    pub lambda: BigRational,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[command(flatten)]
    pub caps: CapArgs,
}

/// Either a root height (single tree) or a space (glued from its pieces).
#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    #[arg(long, value_parser = parse_root_height, allow_hyphen_values = true)]
    pub height: Option<ExtHeight>,
    #[arg(long, value_parser = parse_space, allow_hyphen_values = true)]
    pub space: Option<OrdinalSpace>,
}

#[derive(Args, Debug)]
pub struct CapArgs {
    /// Deepest level searched when locating a node.
    #[arg(long, default_value_t = Caps::default().level_cap, value_parser = clap::value_parser!(u32).range(1..=4096))]
    pub level_cap: u32,
    /// Largest point or node set built by iteration.
    #[arg(long, default_value_t = Caps::default().net_cap)]
    pub net_cap: usize,
    /// Longest word enumerated for word diameters.
    #[arg(long, default_value_t = Caps::default().word_cap)]
    pub word_cap: usize,
    /// Run everything on the calling thread.
    #[arg(long)]
    pub sequential: bool,
}

impl CapArgs {
    pub fn caps(&self) -> Caps {
        Caps {
            level_cap: self.level_cap,
            net_cap: self.net_cap,
            word_cap: self.word_cap,
        }
    }
}

#[derive(Args, Debug)]
pub struct IfsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_parser = parse_lambda, default_value = "1/2")]
    pub lambda: BigRational,
    /// Number of Hutchinson steps.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=32))]
    pub iterate: u32,
    /// Level at which partition, ultrametric and Lipschitz verdicts are taken
    /// (at most the iteration count).
    #[arg(long, default_value_t = 6)]
    pub verdict_level: u32,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_parser = parse_lambda, default_value = "1/2")]
    pub lambda: BigRational,
    /// Suites to run; repeat or separate with commas.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    pub suite: Vec<Suite>,
    /// Level for the partition, net and word suites.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(0..=32))]
    pub levels: u32,
    /// Window depth for the tree, norm and morphism suites.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=8))]
    pub depth: u32,
    /// Window breadth for the tree, norm and morphism suites.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=32))]
    pub breadth: u32,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args, Debug)]
pub struct IterateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_parser = parse_lambda, default_value = "1/2")]
    pub lambda: BigRational,
    /// Only this map (index into the map list).
    #[arg(long)]
    pub map: Option<usize>,
    /// Norm below which an approximate fixed point is accepted.
    #[arg(long, value_parser = parse_positive, default_value = "1/1048576")]
    pub tol: BigRational,
    /// Seed branch stem such as `[1,2]`, or `P:[1,2]` for piece P of a space.
    #[arg(long = "seed", allow_hyphen_values = true)]
    pub seeds: Vec<String>,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(0..=64))]
    pub steps: u32,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[command(flatten)]
    pub caps: CapArgs,
}

fn parse_space(s: &str) -> Result<OrdinalSpace, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_root_height(s: &str) -> Result<ExtHeight, String> {
    let h: ExtHeight = s.parse().map_err(|e: Error| e.to_string())?;
    if h == ExtHeight::MinusOne {
        return Err(Error::InvalidRootHeight.to_string());
    }
    Ok(h)
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a rational p/q"))
}

fn parse_lambda(s: &str) -> Result<BigRational, String> {
    let l = parse_rational(s)?;
    ultrafractal::tree::check_lambda(&l).map_err(|e| e.to_string())?;
    Ok(l)
}

fn parse_positive(s: &str) -> Result<BigRational, String> {
    let t = parse_rational(s)?;
    if t <= BigRational::from_integer(0.into()) {
        return Err(Error::NonPositiveTolerance.to_string());
    }
    Ok(t)
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_cap() => 3,
        Error::Syntax { .. }
        | Error::NonDescending
        | Error::ZeroCoefficient
        | Error::Overflow
        | Error::Unaddressable { .. }
        | Error::LambdaOutOfRange
        | Error::InvalidRootHeight
        | Error::NonPositiveTolerance
        | Error::NoSuchMap(_) => 2,
        _ => 1,
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
    let result = match &cli.command {
        Command::Classify(a) => commands::classify(a),
        Command::Tree(a) => commands::tree(a),
        Command::Ifs(a) => commands::ifs(a),
        Command::Verify(a) => commands::verify(a),
        Command::Iterate(a) => commands::iterate(a),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.text.as_bytes());
            let _ = stdout.flush();
            ExitCode::from(out.code)
        }
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
