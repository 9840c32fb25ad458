#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fpconv::acceptance::{self, Tolerances};
use fpconv::format::{fmt17, num};
use fpconv::freeconv::ConvolutionPair;
use fpconv::montecarlo::{
    run_trials, trials_csv, EnsembleSpec, McSummary, MuEnsemble, DEFAULT_MAX_N,
};
use fpconv::potential::{emit_profile, Grid, ProfileKind};
use fpconv::Measure;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use args::{parse_grid, parse_measure, parse_tol, Failure, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "fpconv",
    version,
    about = "Left edge and logarithmic potential of free additive convolutions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Pair {
    /// Measure JSON, @file, or a token: sc, sc:B, mp, mp:B, delta:A
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
    #[arg(long, allow_hyphen_values = true)]
    nu: String,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Points {
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
    /// start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    z_grid: Option<String>,
}

impl Points {
    fn values(&self) -> Outcome<Vec<f64>> {
        match (&self.z, &self.z_grid) {
            (Some(z), _) => Ok(vec![*z]),
            (None, Some(g)) => Ok(parse_grid(g)?.points()),
            (None, None) => Err(Failure::Config("one of --z or --z-grid is required".into())),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print h*, g*, z* of mu ⊞ nu as JSON
    Endpoint {
        #[command(flatten)]
        pair: Pair,
    },
    /// Print the potential of mu ⊞ nu, one JSON line per z
    Potential {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        points: Points,
    },
    /// Print the Stieltjes transform of mu ⊞ nu, one JSON line per z
    Stieltjes {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        points: Points,
    },
    /// Write a sampled curve and its annotations as CSV
    Profile {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_parser = ["e", "f", "ginv", "j"])]
        kind: String,
        /// Abscissa grid start:stop:count (g for e, ginv, j; h for f)
        #[arg(long, allow_hyphen_values = true)]
        z_grid: String,
        /// Required for kind e
        #[arg(long, allow_hyphen_values = true)]
        z: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare sampled spectra of A + D with the predicted edge and potential
    Mc {
        /// sc:B for GOE, mp:B for Wishart
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to z* - 0.5
        #[arg(long, allow_hyphen_values = true)]
        z: Option<f64>,
        /// Also write the per-trial CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite
    Selftest {
        /// NAME=VALUE
        #[arg(long)]
        tol: Vec<String>,
        /// Run only these criteria (1-10)
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=10))]
        only: Vec<u8>,
    },
}

fn pair_of(p: &Pair) -> Outcome<(Measure, Measure, ConvolutionPair)> {
    let mu = parse_measure(&p.mu)?;
    let nu = parse_measure(&p.nu)?;
    let pair = ConvolutionPair::new(&mu, &nu)?;
    Ok((mu, nu, pair))
}

fn print_json<T: Serialize>(v: &T) -> Outcome<()> {
    let s = serde_json::to_string(v).map_err(|e| Failure::Config(e.to_string()))?;
    writeln!(std::io::stdout(), "{s}")?;
    Ok(())
}

/// Fails on the first z at or right of z* before doing any work.
fn check_left_of_edge(pair: &ConvolutionPair, zs: &[f64]) -> Outcome<()> {
    let z_star = pair.endpoint_summary()?.z_star;
    match zs.iter().find(|&&z| !(z < z_star)) {
        Some(z) => Err(Failure::Domain(format!(
            "z = {z} is not left of z* = {}",
            fmt17(z_star)
        ))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct StieltjesLine {
    #[serde(serialize_with = "num")]
    z: f64,
    #[serde(serialize_with = "num")]
    g: f64,
    /// G_nu^{-1}(g)
    #[serde(serialize_with = "num")]
    h: f64,
}

/// First 16 hex digits of the SHA-256 of a canonical description.
fn config_hash(parts: &[String]) -> String {
    let digest = Sha256::digest(parts.join("\n").as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn canonical(m: &Measure) -> String {
    serde_json::to_string(m).expect("measures serialize")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Outcome<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

#[derive(Serialize)]
struct ProfileFiles {
    table: PathBuf,
    annotations: PathBuf,
    points: usize,
}

fn max_n() -> Outcome<usize> {
    match std::env::var("FPCONV_MAX_N") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("FPCONV_MAX_N = '{v}' is not a dimension"))),
        Err(_) => Ok(DEFAULT_MAX_N),
    }
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Endpoint { pair } => {
            let (_, _, pair) = pair_of(&pair)?;
            print_json(&pair.endpoint_summary()?)
        }
        Command::Potential { pair, points } => {
            let zs = points.values()?;
            let (_, _, pair) = pair_of(&pair)?;
            check_left_of_edge(&pair, &zs)?;
            let results = zs
                .par_iter()
                .map(|&z| pair.u_variational(z))
                .collect::<Result<Vec<_>, _>>()?;
            results.iter().try_for_each(print_json)
        }
        Command::Stieltjes { pair, points } => {
            let zs = points.values()?;
            let (_, _, pair) = pair_of(&pair)?;
            check_left_of_edge(&pair, &zs)?;
            let lines = zs
                .par_iter()
                .map(|&z| {
                    pair.conv_stieltjes(z)
                        .map(|(g, h)| StieltjesLine { z, g, h })
                })
                .collect::<Result<Vec<_>, _>>()?;
            lines.iter().try_for_each(print_json)
        }
        Command::Profile {
            pair,
            kind,
            z_grid,
            z,
            out,
        } => {
            let kind: ProfileKind = kind.parse().map_err(Failure::Config)?;
            let grid: Grid = parse_grid(&z_grid)?;
            if kind == ProfileKind::E && z.is_none() {
                return Err(Failure::Config("--kind e needs --z".into()));
            }
            let (mu, nu, pair) = pair_of(&pair)?;
            let table = emit_profile(&pair, z, kind, &grid)?;
            let hash = config_hash(&[
                canonical(&mu),
                canonical(&nu),
                kind.name().to_string(),
                z.map_or("-".into(), fmt17),
                format!("{}:{}:{}", fmt17(grid.start), fmt17(grid.stop), grid.count),
            ]);
            let stem = format!("{}_{hash}", kind.name());
            let files = ProfileFiles {
                table: write_file(&out, &format!("{stem}.csv"), &table.to_csv())?,
                annotations: write_file(
                    &out,
                    &format!("{stem}_annotations.csv"),
                    &table.annotations_csv(),
                )?,
                points: table.abscissa.len(),
            };
            print_json(&files)
        }
        Command::Mc {
            mu,
            nu,
            n,
            trials,
            seed,
            z,
            out,
        } => {
            let ensemble = match parse_measure(&mu)? {
                Measure::Semicircle { beta } => MuEnsemble::Goe { beta },
                Measure::MarchenkoPastur { beta } => MuEnsemble::Wishart { beta },
                _ => {
                    return Err(Failure::Config(
                        "mc needs a semicircle (GOE) or Marchenko-Pastur (Wishart) mu".into(),
                    ))
                }
            };
            let nu = parse_measure(&nu)?;
            let mut spec = EnsembleSpec::new(ensemble, nu.clone(), n, trials, seed);
            spec.max_n = max_n()?;
            spec.validate()?;
            // predict with the beta the finite matrix realizes
            let limit = match ensemble {
                MuEnsemble::Goe { .. } => ensemble.measure()?,
                MuEnsemble::Wishart { .. } => Measure::marchenko_pastur(spec.achieved_beta())?,
            };
            let pair = ConvolutionPair::new(&limit, &nu)?;
            let z_star = pair.endpoint_summary()?.z_star;
            let z = z.unwrap_or(z_star - 0.5);
            check_left_of_edge(&pair, &[z])?;
            let predicted = pair.u_variational(z)?.u;
            let records = run_trials(&spec, Some(z))?;
            if let Some(dir) = out {
                let hash = config_hash(&[
                    serde_json::to_string(&ensemble).expect("ensembles serialize"),
                    canonical(&nu),
                    format!("{n}:{trials}:{seed}:{}", fmt17(z)),
                ]);
                write_file(&dir, &format!("mc_{hash}.csv"), &trials_csv(&records))?;
            }
            print_json(&McSummary::new(&spec, &records, z, predicted, z_star))
        }
        Command::Selftest { tol, only } => {
            let mut tolerances = Tolerances::default();
            for t in &tol {
                let (name, value) = parse_tol(t)?;
                tolerances.set(&name, value).map_err(Failure::Config)?;
            }
            let ids: Vec<usize> = if only.is_empty() {
                (1..=acceptance::CRITERIA.len()).collect()
            } else {
                only.iter().map(|&i| i as usize).collect()
            };
            let mut failed = 0;
            for id in ids {
                let o = acceptance::run(id, &tolerances);
                writeln!(std::io::stdout(), "{o}")?;
                failed += usize::from(!o.passed);
            }
            if failed > 0 {
                Err(Failure::Selftest)
            } else {
                Ok(())
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("fpconv: {e}");
        std::process::exit(e.code());
    }
}
