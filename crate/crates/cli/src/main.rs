//! Command line front end for the anisohardy verifiers.
//!
//! Exit codes: 0 when every check passes, 1 on a violation, 2 on usage or
//! numerical errors.

mod config;
mod output;
mod verify;

use std::fs;
use std::io::BufReader;
use std::process::ExitCode;

use anisohardy::atoms::{default_d, make_atom_with, validate_atom, Atom, AtomOptions, AtomReport, DEFAULT_Q};
use anisohardy::dilation::StepQuasiNorm;
use anisohardy::error::{Error, Result};
use anisohardy::grid::GridFunction;
use clap::{Parser, Subcommand};
use serde_json::json;

use config::{ExperimentConfig, GlobalArgs};
use output::{num, EXIT_ERROR, EXIT_PASS, EXIT_VIOLATION};

#[derive(Debug, Parser)]
#[command(name = "anisohardy", version, about = "Numerical experiments on anisotropic Hardy spaces")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the validated dilation with its ellipsoid as JSON.
    DilationInfo,
    /// Evaluate the step quasi-norm at `--point`.
    RhoEval,
    /// Norms of grid functions and ball indicators.
    Space {
        #[command(subcommand)]
        action: SpaceAction,
    },
    /// Build or validate atoms.
    Atom {
        #[command(subcommand)]
        action: AtomAction,
    },
    /// Run a verifier over the configured seeds.
    Verify {
        #[command(subcommand)]
        check: verify::Check,
    },
}

#[derive(Debug, Subcommand)]
enum SpaceAction {
    /// Norm of the grid function in `--input`.
    Norm,
    /// Indicator norm of the ball given by `--k` and `--center`.
    Indicator,
    /// Lower-bound ratios over the scales in `--shells`.
    LowerBound,
}

#[derive(Debug, Subcommand)]
enum AtomAction {
    /// Build the atom for the first seed and print its manifest.
    Make,
    /// Validate `--input` as an atom on the configured ball, or rebuild and
    /// validate one atom per seed.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = ExperimentConfig::resolve(cli.global).and_then(|cfg| dispatch(&cli.command, &cfg));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn dispatch(command: &Command, cfg: &ExperimentConfig) -> Result<ExitCode> {
    match command {
        Command::DilationInfo => {
            println!("{}", cfg.dilation()?.to_json());
            Ok(ExitCode::from(EXIT_PASS))
        }
        Command::RhoEval => rho_eval(cfg),
        Command::Space { action } => match action {
            SpaceAction::Norm => space_norm(cfg),
            SpaceAction::Indicator => space_indicator(cfg),
            SpaceAction::LowerBound => verify::lower_bound(cfg, "space-lower-bound")?.emit(cfg),
        },
        Command::Atom { action } => match action {
            AtomAction::Make => atom_make(cfg),
            AtomAction::Validate => atom_validate(cfg),
        },
        Command::Verify { check } => verify::run(check, cfg)?.emit(cfg),
    }
}

fn rho_eval(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let point = cfg
        .point
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("rho-eval needs --point".into()))?;
    let rho = StepQuasiNorm::new(cfg.dilation()?)?;
    let v = rho.rho(point)?;
    if cfg.json {
        println!("{}", json!({ "rho": num(v.value), "k": v.exponent }));
    } else {
        match v.exponent {
            Some(k) => println!("rho={} k={}", v.value, k),
            None => println!("rho=0"),
        }
    }
    Ok(ExitCode::from(EXIT_PASS))
}

fn read_grid(cfg: &ExperimentConfig) -> Result<GridFunction> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("this command needs --input".into()))?;
    GridFunction::read_csv(BufReader::new(fs::File::open(path)?))
}

fn space_norm(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let space = cfg.space(&cfg.dilation()?)?;
    let norm = space.norm(&read_grid(cfg)?)?;
    if cfg.json {
        println!("{}", json!({ "space": space.descriptor(), "norm": num(norm) }));
    } else {
        println!("norm={}", norm);
    }
    Ok(ExitCode::from(EXIT_PASS))
}

fn space_indicator(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let s = cfg.setup()?;
    let ball = cfg.ball(&s.dilation)?;
    let indicator = s.space.indicator_norm(&ball)?;
    let vol = ball.volume();
    let bound = vol.powf(1.0 / s.exponents.q0).min(vol.powf(1.0 / s.exponents.p_minus));
    if cfg.json {
        println!(
            "{}",
            json!({
                "k": ball.k,
                "volume": num(vol),
                "indicator": num(indicator),
                "bound": num(bound),
                "ratio": num(indicator / bound),
            })
        );
    } else {
        println!("indicator={} volume={} ratio={}", indicator, vol, indicator / bound);
    }
    Ok(ExitCode::from(EXIT_PASS))
}

fn atom_options(cfg: &ExperimentConfig) -> AtomOptions {
    AtomOptions {
        resolution: cfg.grid,
        ..Default::default()
    }
}

fn atom_make(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let s = cfg.setup()?;
    let d = cfg.d.unwrap_or_else(|| default_d(&s.exponents, &s.dilation));
    let q = cfg.q.unwrap_or(DEFAULT_Q);
    let seed = cfg.seeds[0];
    let atom = make_atom_with(s.space.clone(), cfg.ball(&s.dilation)?, q, d, seed, atom_options(cfg))?;
    let manifest = atom.manifest();
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        let mut csv = Vec::new();
        atom.f.write_csv(&mut csv)?;
        fs::write(dir.join("atom.csv"), csv)?;
        fs::write(dir.join("atom.json"), format!("{}\n", manifest))?;
    }
    println!("{}", manifest);
    Ok(ExitCode::from(if atom.certs.pass { EXIT_PASS } else { EXIT_VIOLATION }))
}

fn atom_validate(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let s = cfg.setup()?;
    let d = cfg.d.unwrap_or_else(|| default_d(&s.exponents, &s.dilation));
    let q = cfg.q.unwrap_or(DEFAULT_Q);
    let ball = cfg.ball(&s.dilation)?;
    let reports: Vec<(u64, AtomReport)> = if cfg.input.is_some() {
        let mut atom = Atom {
            f: read_grid(cfg)?,
            ball,
            q,
            d,
            space: s.space.clone(),
            seed: 0,
            certs: AtomReport {
                support_leak: 0.0,
                size_ratio: 0.0,
                max_moment: 0.0,
                support_ok: false,
                size_ok: false,
                moments_ok: false,
                pass: false,
            },
        };
        atom.certs = validate_atom(&atom)?;
        vec![(0, atom.certs)]
    } else {
        cfg.seeds
            .iter()
            .map(|&seed| {
                make_atom_with(s.space.clone(), ball.clone(), q, d, seed, atom_options(cfg)).map(|a| (seed, a.certs))
            })
            .collect::<Result<_>>()?
    };
    let pass = reports.iter().all(|(_, r)| r.pass);
    let rows: Vec<_> = reports
        .iter()
        .map(|(seed, r)| json!({ "seed": seed, "residuals": r }))
        .collect();
    println!("{}", json!({ "pass": pass, "atoms": rows }));
    Ok(ExitCode::from(if pass { EXIT_PASS } else { EXIT_VIOLATION }))
}
