use clap::{Args, Parser, Subcommand, ValueEnum};
use elldet::campaign::{run_campaign, CampaignSpec, IdentityKind, OutputFormat};
use elldet::Error;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "elldet",
    version,
    about = "Numerical verification campaigns for elliptic determinant transformations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one identity over randomly sampled constrained parameters.
    Verify(VerifyArgs),
    /// Check the S3 group laws and the six-expression consistency.
    Orbit(CommonArgs),
    /// Cross-validate theta routes, product identities and determinants.
    Selftest(CommonArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Identity to verify.
    #[arg(long, value_enum)]
    identity: IdentityArg,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Inclusive order range, e.g. 3 or 1..6.
    #[arg(long, default_value = "1..6", value_parser = parse_range)]
    n: (u32, u32),
    /// Trials per order.
    #[arg(long, default_value_t = 25)]
    trials: u32,
    /// Mantissa bits per real component.
    #[arg(long = "prec", default_value_t = 256)]
    precision_bits: u32,
    /// Extra working bits absorbing rounding and truncation tails.
    #[arg(long = "guard", default_value_t = 32)]
    guard_bits: u32,
    /// Relative residual acceptance threshold.
    #[arg(long = "tol", default_value_t = 1e-35)]
    tolerance: f64,
    /// Base seed; trial k draws from seed + k.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Per-row grid bounds for the cnt identity, e.g. 2,1,3.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u32>>,
    /// Largest nome modulus; 0 pins the trigonometric case.
    #[arg(long = "p-max", default_value_t = 0.6)]
    p_modulus_max: f64,
    /// Report format.
    #[arg(long = "out", value_enum, default_value_t = OutputArg::Human)]
    output: OutputArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum IdentityArg {
    Jackson,
    Warnaar,
    Dt,
    Ts,
    Et1,
    Et2,
    Et3,
    Tdt,
    Cnt,
    Xy,
    #[value(name = "cnt-special", alias = "cnt_special")]
    CntSpecial,
    Orbit,
    #[value(name = "theta-selftest", alias = "theta_selftest")]
    ThetaSelftest,
}

impl From<IdentityArg> for IdentityKind {
    fn from(value: IdentityArg) -> Self {
        match value {
            IdentityArg::Jackson => IdentityKind::Jackson,
            IdentityArg::Warnaar => IdentityKind::Warnaar,
            IdentityArg::Dt => IdentityKind::Dt,
            IdentityArg::Ts => IdentityKind::Ts,
            IdentityArg::Et1 => IdentityKind::Et1,
            IdentityArg::Et2 => IdentityKind::Et2,
            IdentityArg::Et3 => IdentityKind::Et3,
            IdentityArg::Tdt => IdentityKind::Tdt,
            IdentityArg::Cnt => IdentityKind::Cnt,
            IdentityArg::Xy => IdentityKind::Xy,
            IdentityArg::CntSpecial => IdentityKind::CntSpecial,
            IdentityArg::Orbit => IdentityKind::Orbit,
            IdentityArg::ThetaSelftest => IdentityKind::ThetaSelftest,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputArg {
    Json,
    Csv,
    Human,
}

impl From<OutputArg> for OutputFormat {
    fn from(value: OutputArg) -> Self {
        match value {
            OutputArg::Json => OutputFormat::Json,
            OutputArg::Csv => OutputFormat::Csv,
            OutputArg::Human => OutputFormat::Human,
        }
    }
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let parse_one = |v: &str| v.trim().parse::<u32>().map_err(|e| e.to_string());
    if let Some((lo, hi)) = s.split_once("..") {
        Ok((parse_one(lo)?, parse_one(hi)?))
    } else {
        let v = parse_one(s)?;
        Ok((v, v))
    }
}

fn build_spec(identity: IdentityKind, args: CommonArgs) -> CampaignSpec {
    CampaignSpec {
        identity,
        n_lo: args.n.0,
        n_hi: args.n.1,
        trials: args.trials,
        m: args.m,
        precision_bits: args.precision_bits,
        guard_bits: args.guard_bits,
        tolerance: args.tolerance,
        seed: args.seed,
        p_modulus_max: args.p_modulus_max,
        output: args.output.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match cli.command {
        Command::Verify(args) => build_spec(args.identity.into(), args.common),
        Command::Orbit(common) => build_spec(IdentityKind::Orbit, common),
        Command::Selftest(common) => build_spec(IdentityKind::ThetaSelftest, common),
    };
    match run_campaign(&spec) {
        Ok(result) => {
            print!("{}", result.render());
            if result.summary.fail > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err @ Error::SamplerExhausted(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
