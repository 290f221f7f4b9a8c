//! `crownkit` command-line front end. Every subcommand prints one JSON
//! document; exit code 0 means pass, 2 a numerical failure, 1 a usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crownkit::config::Config;
use crownkit::lie::ProjPoint;
use num_complex::Complex64 as C64;

mod commands;
mod output;

use output::{CommandResult, Status};

#[derive(Parser, Debug)]
#[command(
    name = "crownkit",
    version,
    about = "Numerics for the crown domain of the upper half plane"
)]
struct Cli {
    /// Configuration file; overrides CROWNKIT_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for random sampling; overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    t.replace('j', "i")
        .parse::<C64>()
        .map_err(|_| format!("cannot parse {s:?} as a complex number a+bi"))
}

pub fn parse_proj(s: &str) -> Result<ProjPoint, String> {
    if s.eq_ignore_ascii_case("inf") {
        Ok(ProjPoint::Infinity)
    } else {
        parse_complex(s).map(ProjPoint::Finite)
    }
}

/// A point of the pair model.
#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// First coordinate as `a+bi` or `inf`.
    #[arg(long, value_parser = parse_proj, allow_hyphen_values = true)]
    pub z1: ProjPoint,
    /// Second coordinate as `a+bi` or `inf`.
    #[arg(long, value_parser = parse_proj, allow_hyphen_values = true)]
    pub z2: ProjPoint,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ParamKind {
    Elliptic,
    Unipotent,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum SuiteLevel {
    Quick,
    Full,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum RadialKind {
    Gaussian,
    PolyGauss,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Membership of a pair in the crown and in its one-sided halves.
    CrownCheck(PointArgs),
    /// Point `g exp(iφh) x₀` or `g exp(ixe) x₀`.
    Param {
        #[arg(long, value_enum, default_value = "elliptic")]
        kind: ParamKind,
        /// φ for the elliptic, x for the unipotent parameterization.
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// Real group element as `a,b,c,d`.
        #[arg(long, default_value = "1,0,0,1", allow_hyphen_values = true)]
        g: String,
    },
    /// Real element carrying the unipotent orbit through `n_{i sin 2φ} x₀` onto `exp(iφh) x₀`.
    Match {
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
    },
    /// Stratum of a boundary point.
    Boundary {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Coordinates on the complex quadric `Q = 1`.
    Quadric(PointArgs),
    /// `log a_C` of a crown point, or the closed form on a K-orbit.
    Aproj {
        #[arg(long, value_parser = parse_proj, allow_hyphen_values = true, requires = "z2")]
        z1: Option<ProjPoint>,
        #[arg(long, value_parser = parse_proj, allow_hyphen_values = true, requires = "z1")]
        z2: Option<ProjPoint>,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "z1")]
        theta: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "theta")]
        phi: Option<f64>,
    },
    /// Range of `Im log a_C` over a K-orbit.
    Convexity {
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Membership of a trace value in `p(A exp(iω) x₀)`.
    TraceDomain {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        value: C64,
        /// Half-width of ω; defaults to π/4.
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        doubled: bool,
    },
    /// Trace along the escape curve.
    Escape {
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Spherical function at a crown point.
    Phi {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[command(flatten)]
        point: PointArgs,
    },
    /// `φ_λ` at a doubled point against the pairing of half-continued vectors.
    Doubling {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
    },
    /// `‖π(a_ε) v_K‖` along a list of ε.
    NormGrowth {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1e-2,1e-3,1e-4,1e-5,1e-6"
        )]
        eps: Vec<f64>,
    },
    /// Derived representation against difference quotients of the group action.
    DpiCheck {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Continuation angle of the test vector.
        #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "-2,-0.3,0.5,1.7",
            allow_hyphen_values = true
        )]
        x: Vec<f64>,
    },
    /// Sobolev norm of `π(a_ε) v_K`.
    Sobolev {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Restrict to one subgroup (A, N, Nbar, H, K); all directions otherwise.
        #[arg(long)]
        subgroup: Option<String>,
    },
    /// Dyadic upper bound for the invariant Sobolev norm of `π(a_ε) v_K`.
    InvariantBound {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Spherical transform of a radial function at given λ.
    Transform {
        #[arg(long, value_enum, default_value = "gaussian")]
        function: RadialKind,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,4")]
        lambda: Vec<f64>,
    },
    /// Parseval identity for a radial function.
    Parseval {
        #[arg(long, value_enum, default_value = "gaussian")]
        function: RadialKind,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
    },
    /// Gutzmer identity for a Gaussian spectral density.
    Gutzmer {
        #[arg(long, default_value_t = 2.0)]
        center: f64,
        #[arg(long, default_value_t = 0.5)]
        width: f64,
        /// Orbit shift as a fraction of π/4.
        #[arg(long, default_value_t = 0.5)]
        r: f64,
    },
    /// Hardy kernel at a pair of crown points.
    HardyKernel {
        #[command(flatten)]
        z: PointArgs,
        #[arg(long, value_parser = parse_proj, allow_hyphen_values = true)]
        w1: ProjPoint,
        #[arg(long, value_parser = parse_proj, allow_hyphen_values = true)]
        w2: ProjPoint,
    },
    /// Gram matrix of the Hardy kernel on random crown points.
    Kernel {
        #[arg(long, default_value_t = 6)]
        points: usize,
        #[arg(long, default_value_t = 0.7)]
        phi_max: f64,
    },
    /// Fourier-coefficient bound chain on a synthetic strip function.
    Maass {
        #[arg(long, default_value_t = 3.0)]
        y: f64,
        #[arg(long, default_value_t = 4)]
        modes: i64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Raise the first coefficient to 1 so that the bound must fail.
        #[arg(long)]
        control: bool,
    },
    /// Acceptance checks.
    Suite {
        #[arg(long, value_enum, default_value = "quick")]
        level: SuiteLevel,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        /// Include wall-clock timings, which makes the output run-dependent.
        #[arg(long)]
        timings: bool,
    },
}

fn load_config(cli: &Cli) -> Result<Config, String> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p),
        None => Config::from_env(),
    }
    .map_err(|e| e.to_string())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result: CommandResult = match commands::run(&cli.command, &cfg) {
        Ok(r) => r,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(commands::Failure::Numeric(mut r)) => {
            r.status = Status::Fail;
            *r
        }
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&result).expect("serialisable result")
    );
    ExitCode::from(result.status.exit_code() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0+1i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("-0.5-2i").unwrap(), C64::new(-0.5, -2.0));
        assert_eq!(parse_complex("3").unwrap(), C64::new(3.0, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3 + 2e2i").unwrap(), C64::new(1e-3, 200.0));
        assert_eq!(parse_complex("1+2j").unwrap(), C64::new(1.0, 2.0));
        assert!(parse_complex("1+").is_err());
        assert_eq!(parse_proj("INF").unwrap(), ProjPoint::Infinity);
    }
}
