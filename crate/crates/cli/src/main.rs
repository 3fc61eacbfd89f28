//! Command-line surface for the rate-region library.
//!
//! Numeric subcommands print JSON; curve subcommands print CSV. Floats are
//! emitted in the shortest representation that re-parses to the same value,
//! so outputs are byte-stable for fixed inputs and seeds.
//!
//! Exit codes: 0 success, 2 invalid input, 3 infeasible instance.

// Validation is written as `!(x > lo)` so that NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rateregion::ceo::{kkt_solve, MuSpec};
use rateregion::many::{
    solve_symmetric_lambda, symmetric_minimax_profile, symmetric_sum_rate, symmetric_theta,
    SymmetricInstance,
};
use rateregion::minimax::minimax_profile;
use rateregion::model::{SourceModel, TestChannel};
use rateregion::msums::{msums_sum_rate, remote_msums_spec, remote_source_map, MSumsSpec};
use rateregion::numeric::half_log2_plus;
use rateregion::sim::{musum_coupling_check, simulate, SimConfig, SourceKind};
use rateregion::test_channel::theta_star;
use rateregion::two_encoder::RegionSpec;
use rateregion::Error;

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Parser)]
#[command(
    name = "rateregion",
    version,
    about = "Rate regions and sum rates for distributed compression of correlated Gaussian sources",
    after_help = "CSV columns: `region` emits r1,r2; `theta-curve` emits theta,d1d2; \
                  `minimax` emits theta,r_coop,r_sum (with a JSON summary on stdout when --out is set).\n\
                  The `msums` config file is JSON: {\"rho\": number, \"constraints\": [{\"mu\": [m1, m2], \"d\": number}, ...]};\n\
                  directions are normalized to unit length on load, with caps rescaled accordingly."
)]
struct Cli {
    /// Report rate-valued outputs in nats instead of bits (conversion on
    /// output only).
    #[arg(long, global = true)]
    nats: bool,
    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the dominant boundary of the two-encoder rate region (CSV).
    Region {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        d1: f64,
        #[arg(long)]
        d2: f64,
        /// Number of sweep points over the first rate.
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Minimal sum rate and the associated channel quantities (JSON).
    Sumrate {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        d1: f64,
        #[arg(long)]
        d2: f64,
    },
    /// Distortion product realizable at each error correlation (CSV).
    ThetaCurve {
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Cooperative and weighted-sum converse bounds over the error
    /// correlation (CSV; min-max summary as JSON when --out is set).
    Minimax {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        d1: f64,
        #[arg(long)]
        d2: f64,
        #[arg(long, default_value_t = 2001)]
        grid: usize,
    },
    /// Sum rate of a weighted-sum target with its water-filling solution
    /// (JSON). Negative correlation is accepted when the weights have
    /// opposite signs; the sign flip is recorded in the output.
    Musum {
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu1: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu2: f64,
        #[arg(long)]
        d: f64,
    },
    /// Solve a multi-constraint problem from a JSON config file (JSON).
    Msums {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
    /// Remote-source problem: noisy observations of hidden sources (JSON).
    /// Negative correlation is reduced by a sign flip of the second source.
    Remote {
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long)]
        s1sq: f64,
        #[arg(long)]
        s2sq: f64,
        #[arg(long)]
        d1: f64,
        #[arg(long)]
        d2: f64,
    },
    /// Symmetric many-source sum rate (JSON); --grid adds the min-max
    /// profile summary.
    Many {
        #[arg(long)]
        rho: f64,
        #[arg(long = "L", visible_alias = "l")]
        l: usize,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Monte Carlo run of a two-encoder test channel with analytic
    /// estimator coefficients (JSON).
    Simulate {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        l1: f64,
        #[arg(long)]
        l2: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SourceArg::Gaussian)]
        source: SourceArg,
        /// Also track the weighted error `mu^T (y - yhat)`, as "a,b".
        #[arg(long)]
        mu: Option<String>,
        /// Additionally verify the weighted-sum/CEO coupling identity for
        /// the given --mu.
        #[arg(long, default_value_t = false)]
        coupling: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    Gaussian,
    Uniform,
    RademacherMixture,
}

impl From<SourceArg> for SourceKind {
    fn from(v: SourceArg) -> Self {
        match v {
            SourceArg::Gaussian => SourceKind::Gaussian,
            SourceArg::Uniform => SourceKind::Uniform,
            SourceArg::RademacherMixture => SourceKind::RademacherMixture,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InfeasibleRemoteDistortion { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: 2,
            message: format!("io error: {e}"),
        }
    }
}

/// Unit conversion applied to rate-valued outputs only.
struct Units {
    nats: bool,
}

impl Units {
    fn rate(&self, bits: f64) -> f64 {
        if self.nats {
            bits * LN_2
        } else {
            bits
        }
    }

    fn name(&self) -> &'static str {
        if self.nats {
            "nats/sample"
        } else {
            "bits/sample"
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            // Write-then-rename so readers never observe a partial file.
            let mut tmp = path.clone();
            tmp.as_mut_os_string().push(".tmp");
            fs::write(&tmp, content)?;
            fs::rename(&tmp, path)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct SumrateOut {
    rho: f64,
    d1: f64,
    d2: f64,
    units: &'static str,
    sum_rate: f64,
    beta: f64,
    in_diag_dg: bool,
    /// Error correlation of the optimizing channel; absent when the
    /// distortion pair is not a realizable diagonal.
    theta_star: Option<f64>,
}

#[derive(Serialize)]
struct KktOut {
    r1: f64,
    r2: f64,
    nu: f64,
    lambda: [f64; 2],
    s: [f64; 2],
}

#[derive(Serialize)]
struct MusumOut {
    rho: f64,
    mu: [f64; 2],
    d: f64,
    units: &'static str,
    sum_rate: f64,
    /// Absent when a weight coordinate is zero (single-marginal case).
    kkt: Option<KktOut>,
    /// Present when a negative correlation was reduced by flipping the
    /// second source's sign.
    reduction: Option<&'static str>,
}

#[derive(Serialize)]
struct MinimaxSummary {
    rho: f64,
    d1: f64,
    d2: f64,
    units: &'static str,
    grid: usize,
    theta_star: f64,
    value: f64,
}

#[derive(Serialize)]
struct MsumsOut {
    rho: f64,
    units: &'static str,
    solution: rateregion::MSumsSolution,
}

#[derive(Serialize)]
struct RemoteOut {
    rho: f64,
    s1sq: f64,
    s2sq: f64,
    d: [f64; 2],
    units: &'static str,
    map: rateregion::RemoteMap,
    solution: rateregion::MSumsSolution,
    reduction: Option<&'static str>,
}

#[derive(Serialize)]
struct ManyOut {
    rho: f64,
    #[serde(rename = "L")]
    l: usize,
    d: f64,
    units: &'static str,
    lambda: f64,
    theta: f64,
    sum_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    minimax: Option<ManyMinimaxOut>,
}

#[derive(Serialize)]
struct ManyMinimaxOut {
    grid: usize,
    theta_star: f64,
    value: f64,
}

#[derive(Serialize)]
struct SimulateOut {
    report: rateregion::SimReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    coupling: Option<rateregion::CouplingReport>,
}

#[derive(serde::Deserialize)]
struct MsumsConfig {
    rho: f64,
    constraints: Vec<rateregion::MuConstraint>,
}

fn parse_mu(s: &str) -> Result<[f64; 2], Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Failure::invalid(format!(
            "--mu expects two comma-separated numbers, got {s:?}"
        )));
    }
    let a = parts[0]
        .trim()
        .parse::<f64>()
        .map_err(|e| Failure::invalid(format!("--mu: {e}")))?;
    let b = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|e| Failure::invalid(format!("--mu: {e}")))?;
    Ok([a, b])
}

fn run(cli: Cli) -> Result<(), Failure> {
    let units = Units { nats: cli.nats };
    match cli.command {
        Command::Region {
            rho,
            d1,
            d2,
            points,
        } => {
            let spec = RegionSpec::new(rho, d1, d2)?;
            let trace = spec.trace_boundary(points)?;
            let mut csv = String::from("r1,r2\n");
            for p in &trace.points {
                csv.push_str(&format!("{},{}\n", units.rate(p.r1), units.rate(p.r2)));
            }
            emit(&cli.out, &csv)
        }
        Command::Sumrate { rho, d1, d2 } => {
            let spec = RegionSpec::new(rho, d1, d2)?;
            let out = SumrateOut {
                rho,
                d1,
                d2,
                units: units.name(),
                sum_rate: units.rate(spec.sum_rate_star()),
                beta: spec.beta(),
                in_diag_dg: spec.in_diag_dg(),
                theta_star: theta_star(d1, d2, rho).ok(),
            };
            emit(&cli.out, &to_json(&out))
        }
        Command::ThetaCurve { rho, points } => {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::InvalidCorrelation { rho }.into());
            }
            if points < 2 {
                return Err(Error::InvalidGrid {
                    min: 2,
                    got: points,
                }
                .into());
            }
            // Invert the correlation fixed point: at error correlation t
            // the realizable distortion product is
            // (t (1 - rho^2) / (rho (1 - t^2)))^2.
            let mut csv = String::from("theta,d1d2\n");
            for i in 0..points {
                let t = rho * i as f64 / (points - 1) as f64;
                let p = if i == 0 {
                    0.0
                } else {
                    let root = t * (1.0 - rho * rho) / (rho * (1.0 - t * t));
                    (root * root).min(1.0)
                };
                csv.push_str(&format!("{t},{p}\n"));
            }
            emit(&cli.out, &csv)
        }
        Command::Minimax { rho, d1, d2, grid } => {
            let profile = minimax_profile(d1, d2, rho, grid)?;
            let mut csv = String::from("theta,r_coop,r_sum\n");
            for ((t, c), s) in profile
                .theta_grid
                .iter()
                .zip(&profile.coop)
                .zip(&profile.sum)
            {
                csv.push_str(&format!("{t},{},{}\n", units.rate(*c), units.rate(*s)));
            }
            emit(&cli.out, &csv)?;
            if cli.out.is_some() {
                let summary = MinimaxSummary {
                    rho,
                    d1,
                    d2,
                    units: units.name(),
                    grid,
                    theta_star: profile.theta_star,
                    value: units.rate(profile.value),
                };
                print!("{}", to_json(&summary));
            }
            Ok(())
        }
        Command::Musum { rho, mu1, mu2, d } => {
            let (rho_eff, mu_eff, reduction) = if rho < 0.0 {
                if mu1 * mu2 > 0.0 {
                    return Err(Failure::invalid(
                        "negative correlation requires weights of opposite sign",
                    ));
                }
                (
                    -rho,
                    [mu1.abs(), mu2.abs()],
                    Some("second source negated to reduce to positive correlation"),
                )
            } else {
                (rho, [mu1, mu2], None)
            };
            let (sum_rate, kkt) = if mu_eff[0] == 0.0 || mu_eff[1] == 0.0 {
                // Single-marginal case: only one source enters the target.
                let w = mu_eff[0].max(mu_eff[1]);
                if w == 0.0 {
                    return Err(Error::ZeroDirection.into());
                }
                if !(d > 0.0) {
                    return Err(Error::InvalidDistortion { value: d }.into());
                }
                (half_log2_plus(w * w / d), None)
            } else {
                let spec = MuSpec::new(mu_eff[0], mu_eff[1], d)?;
                let sol = kkt_solve(&spec, rho_eff)?;
                (
                    sol.sum_rate,
                    Some(KktOut {
                        r1: units.rate(sol.r1),
                        r2: units.rate(sol.r2),
                        nu: sol.nu,
                        lambda: [sol.lambda1, sol.lambda2],
                        s: [sol.s1, sol.s2],
                    }),
                )
            };
            let out = MusumOut {
                rho,
                mu: [mu1, mu2],
                d,
                units: units.name(),
                sum_rate: units.rate(sum_rate),
                kkt,
                reduction,
            };
            emit(&cli.out, &to_json(&out))
        }
        Command::Msums { config } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", config.display())))?;
            let parsed: MsumsConfig = serde_json::from_str(&text)
                .map_err(|e| Failure::invalid(format!("invalid config: {e}")))?;
            let spec = MSumsSpec::new(parsed.rho, parsed.constraints)?;
            let mut solution = msums_sum_rate(&spec)?;
            solution.sum_rate = units.rate(solution.sum_rate);
            let out = MsumsOut {
                rho: parsed.rho,
                units: units.name(),
                solution,
            };
            emit(&cli.out, &to_json(&out))
        }
        Command::Remote {
            rho,
            s1sq,
            s2sq,
            d1,
            d2,
        } => {
            // A negative correlation flips the second hidden source and its
            // observation; all variances and distortions are unchanged.
            let (rho_eff, reduction) = if rho < 0.0 {
                (
                    -rho,
                    Some("second source negated to reduce to positive correlation"),
                )
            } else {
                (rho, None)
            };
            let map = remote_source_map(s1sq, s2sq, rho_eff)?;
            let spec = remote_msums_spec(s1sq, s2sq, rho_eff, d1, d2)?;
            let mut solution = msums_sum_rate(&spec)?;
            solution.sum_rate = units.rate(solution.sum_rate);
            let out = RemoteOut {
                rho,
                s1sq,
                s2sq,
                d: [d1, d2],
                units: units.name(),
                map,
                solution,
                reduction,
            };
            emit(&cli.out, &to_json(&out))
        }
        Command::Many { rho, l, d, grid } => {
            let inst = SymmetricInstance::new(rho, l, d)?;
            let minimax = match grid {
                Some(n) => {
                    let p = symmetric_minimax_profile(&inst, n)?;
                    Some(ManyMinimaxOut {
                        grid: n,
                        theta_star: p.theta_star,
                        value: units.rate(p.value),
                    })
                }
                None => None,
            };
            let out = ManyOut {
                rho,
                l,
                d,
                units: units.name(),
                lambda: solve_symmetric_lambda(&inst),
                theta: symmetric_theta(&inst),
                sum_rate: units.rate(symmetric_sum_rate(&inst)),
                minimax,
            };
            emit(&cli.out, &to_json(&out))
        }
        Command::Simulate {
            rho,
            l1,
            l2,
            samples,
            seed,
            source,
            mu,
            coupling,
        } => {
            let mu = mu.as_deref().map(parse_mu).transpose()?;
            if coupling && mu.is_none() {
                return Err(Failure::invalid("--coupling requires --mu"));
            }
            let config = SimConfig::new(
                SourceModel::pair(rho)?,
                TestChannel::pair(l1, l2)?,
                samples,
                seed,
                source.into(),
            )?;
            let report = simulate(&config, mu)?;
            let coupling_report = if coupling {
                let channel = TestChannel::pair(l1, l2)?;
                Some(musum_coupling_check(
                    rho,
                    mu.expect("checked above"),
                    &channel,
                    samples,
                    seed,
                )?)
            } else {
                None
            };
            let out = SimulateOut {
                report,
                coupling: coupling_report,
            };
            emit(&cli.out, &to_json(&out))
        }
    }
}
