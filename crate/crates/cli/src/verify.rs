use anisohardy::atoms::{
    coefficient_bound_check, default_d, make_atom_with, random_decomposition, AtomOptions, DecompositionParams,
    DEFAULT_Q,
};
use anisohardy::dilation::{DilatedBall, ExpansiveDilation};
use anisohardy::error::{Error, Result};
use anisohardy::fourier_bounds::{
    derivative_decay_check, hardy_littlewood_integral, origin_decay_profile, pointwise_bound_check,
    reconstruct_f, write_shell_csv, Envelope, FrequencyGrid, ShellDensity, ShellRow, HL_TAIL_TOL,
};
use anisohardy::grid::{multi_indices, GridFunction};
use anisohardy::maximal::{fs_probe, BallScan};
use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{ExperimentConfig, Setup};
use crate::output::{num, Outcome};

/// Tolerated `|F(0)|` relative to `Σ|λ| ‖a‖_∞`.
const ORIGIN_TOL: f64 = 1e-12;
const COEFF_TOL: f64 = 1e-8;
const HL_SPREAD_MAX: f64 = 10.0;
const FS_SPREAD_MAX: f64 = 2.0;
const FS_FAMILY: usize = 4;

#[derive(Debug, Clone, Subcommand)]
pub enum Check {
    /// Pointwise Fourier bound of seeded atoms against the envelope.
    FtBound,
    /// Derivative decay constants of seeded atoms for every |α| ≤ d.
    DerivativeDecay,
    /// Decay of |F| / ρ*^{1/q0-1} towards the origin.
    OriginDecay,
    /// Weighted Hardy–Littlewood integral against the atomic quasi-norm.
    HlIntegral,
    /// Coefficient sum against the atomic quasi-norm.
    CoeffBound,
    /// Indicator norms of centered balls against min{|B|^{1/q0}, |B|^{1/p_-}}.
    SpaceLowerBound,
    /// Fefferman–Stein probe on seeded families of disjoint indicators.
    FsProbe(FsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FsArgs {
    /// Convexification exponent; defaults to 2/3 of p_-.
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub u: f64,
}

pub fn run(check: &Check, cfg: &ExperimentConfig) -> Result<Outcome> {
    match check {
        Check::FtBound => ft_bound(cfg),
        Check::DerivativeDecay => derivative_decay(cfg),
        Check::OriginDecay => origin_decay(cfg),
        Check::HlIntegral => hl_integral(cfg),
        Check::CoeffBound => coeff_bound(cfg),
        Check::SpaceLowerBound => lower_bound(cfg, "space-lower-bound"),
        Check::FsProbe(args) => fs(cfg, args),
    }
}

fn samples(cfg: &ExperimentConfig, n: usize) -> usize {
    cfg.samples.unwrap_or(if n == 1 { 32 } else { 16 })
}

fn options(cfg: &ExperimentConfig) -> AtomOptions {
    AtomOptions {
        resolution: cfg.grid,
        ..Default::default()
    }
}

fn moment_order(cfg: &ExperimentConfig, s: &Setup) -> usize {
    cfg.d.unwrap_or_else(|| default_d(&s.exponents, &s.dilation))
}

fn params(cfg: &ExperimentConfig, d: usize) -> DecompositionParams {
    DecompositionParams {
        atoms: cfg.atoms.unwrap_or(5),
        q: cfg.q.unwrap_or(DEFAULT_Q),
        d,
        options: options(cfg),
        ..Default::default()
    }
}

fn merge_profile(acc: &mut Vec<ShellRow>, rows: &[ShellRow]) {
    if acc.is_empty() {
        acc.extend_from_slice(rows);
        return;
    }
    for (a, r) in acc.iter_mut().zip(rows) {
        a.metric = a.metric.max(r.metric);
    }
}

fn shell_csv(rows: &[ShellRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_shell_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn ft_bound(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = cfg.setup()?;
    let n = s.dilation.n;
    let env = Envelope::new(&s.dilation, &s.exponents)?;
    let d = moment_order(cfg, &s);
    let q = cfg.q.unwrap_or(DEFAULT_Q);
    let (lo, hi) = cfg.shells_or(-10, 10);
    let grid = FrequencyGrid::new(&env, lo..=hi, samples(cfg, n), cfg.seeds[0])?;
    let ball = cfg.ball(&s.dilation)?;
    let origin = vec![0.0; n];

    let mut profile = Vec::new();
    let mut per_seed = Vec::new();
    let (mut c_hat, mut at) = (0.0f64, None);
    let mut pass = true;
    for &seed in &cfg.seeds {
        let a = make_atom_with(s.space.clone(), ball.clone(), q, d, seed, options(cfg))?;
        let r = pointwise_bound_check(&a, &env, &grid)?;
        let at_origin = a.f.fourier_at(&origin).norm() / a.f.sup_norm().max(f64::MIN_POSITIVE);
        let ok = a.certs.pass && r.c_hat.is_finite() && at_origin <= ORIGIN_TOL;
        pass &= ok;
        if r.c_hat > c_hat {
            c_hat = r.c_hat;
            at = r.shell_at_sup;
        }
        merge_profile(&mut profile, &r.profile);
        per_seed.push(json!({
            "seed": seed,
            "C_hat": num(r.c_hat),
            "shell_at_sup": r.shell_at_sup,
            "origin_ratio": num(at_origin),
            "atom_ok": a.certs.pass,
        }));
    }
    Ok(Outcome {
        name: "ft-bound",
        csv: shell_csv(&profile)?,
        summary: json!({
            "C_hat": num(c_hat),
            "shell_at_sup": at,
            "pass": pass,
            "d": d,
            "q": num(q),
            "per_seed": per_seed,
        }),
    })
}

fn derivative_decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = cfg.setup()?;
    let n = s.dilation.n;
    let env = Envelope::new(&s.dilation, &s.exponents)?;
    let d = moment_order(cfg, &s);
    let q = cfg.q.unwrap_or(DEFAULT_Q);
    let (lo, hi) = cfg.shells_or(-10, 10);
    let grid = FrequencyGrid::new(&env, lo..=hi, samples(cfg, n), cfg.seeds[0])?;
    let ball = cfg.ball(&s.dilation)?;
    let alphas = multi_indices(n, d);

    let mut csv = String::from("seed,alpha,c_hat\n");
    let mut c_hat = 0.0f64;
    let mut pass = true;
    for &seed in &cfg.seeds {
        let a = make_atom_with(s.space.clone(), ball.clone(), q, d, seed, options(cfg))?;
        pass &= a.certs.pass;
        for row in derivative_decay_check(&a, &alphas, &grid)? {
            let label: Vec<String> = row.alpha.iter().map(|v| v.to_string()).collect();
            csv.push_str(&format!("{},{},{:.16e}\n", seed, label.join(";"), row.c_hat));
            pass &= row.c_hat.is_finite();
            c_hat = c_hat.max(row.c_hat);
        }
    }
    Ok(Outcome {
        name: "derivative-decay",
        csv,
        summary: json!({ "C_hat": num(c_hat), "shell_at_sup": null, "pass": pass, "d": d }),
    })
}

fn origin_decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = cfg.setup()?;
    let n = s.dilation.n;
    let env = Envelope::new(&s.dilation, &s.exponents)?;
    let d = moment_order(cfg, &s);
    let (lo, hi) = cfg.shells_or(2, 12);
    let params = params(cfg, d);

    let mut profile = Vec::new();
    let mut rates = Vec::new();
    let mut theoretical = f64::NAN;
    let mut pass = true;
    for &seed in &cfg.seeds {
        let dec = random_decomposition(s.space.clone(), s.dilation.clone(), &params, seed)?;
        let scale: f64 = dec.lambdas.iter().zip(&dec.atoms).map(|(l, a)| l.norm() * a.f.sup_norm()).sum();
        let at_origin = reconstruct_f(&dec, &vec![0.0; n]).norm();
        let r = origin_decay_profile(&dec, &env, lo..=hi, samples(cfg, n), seed)?;
        pass &= r.decays && at_origin <= ORIGIN_TOL * scale;
        rates.push(r.fitted_rate);
        theoretical = r.theoretical_rate;
        merge_profile(&mut profile, &r.rows);
    }
    let (c_hat, at) = profile
        .iter()
        .fold((0.0f64, None), |(m, at), r| if r.metric > m { (r.metric, Some(r.shell_m)) } else { (m, at) });
    let mean_rate = rates.iter().sum::<f64>() / rates.len() as f64;
    Ok(Outcome {
        name: "origin-decay",
        csv: shell_csv(&profile)?,
        summary: json!({
            "C_hat": num(c_hat),
            "shell_at_sup": at,
            "pass": pass,
            "d": d,
            "fitted_rate": num(mean_rate),
            "theoretical_rate": num(theoretical),
        }),
    })
}

fn hl_integral(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = cfg.setup()?;
    let env = Envelope::new(&s.dilation, &s.exponents)?;
    let d = cfg.d.unwrap_or_else(|| default_d(&s.exponents, &s.dilation) + 1);
    let cutoff = cfg.shells.map_or(12, |(_, hi)| hi);
    let params = params(cfg, d);

    let mut profile = Vec::new();
    let mut ratios = Vec::new();
    let mut worst_tail = 0.0f64;
    let mut pass = true;
    for &seed in &cfg.seeds {
        let dec = random_decomposition(s.space.clone(), s.dilation.clone(), &params, seed)?;
        match hardy_littlewood_integral(&dec, &env, cutoff, ShellDensity::default(), s.exponents.theta0, seed) {
            Ok(r) => {
                ratios.push(r.ratio);
                worst_tail = worst_tail.max(r.tail_increment);
                merge_profile(&mut profile, &r.rows);
            }
            Err(Error::NotConverged(msg)) => {
                eprintln!("seed {}: NotConverged: {}", seed, msg);
                pass = false;
            }
            Err(e) => return Err(e),
        }
    }
    let c_hat = ratios.iter().cloned().fold(0.0, f64::max);
    let ratio_spread = spread(&ratios);
    pass &= ratio_spread <= HL_SPREAD_MAX && worst_tail <= HL_TAIL_TOL;
    let at = profile
        .iter()
        .fold((0.0f64, None), |(m, at), r| if r.metric > m { (r.metric, Some(r.shell_m)) } else { (m, at) })
        .1;
    Ok(Outcome {
        name: "hl-integral",
        csv: shell_csv(&profile)?,
        summary: json!({
            "C_hat": num(c_hat),
            "shell_at_sup": at,
            "pass": pass,
            "d": d,
            "cutoff": cutoff,
            "ratio_spread": num(ratio_spread),
            "max_tail_increment": num(worst_tail),
        }),
    })
}

fn coeff_bound(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = cfg.setup()?;
    let d = moment_order(cfg, &s);
    let params = params(cfg, d);
    let mut csv = String::from("seed,lhs,rhs,ratio\n");
    let mut worst = 0.0f64;
    for &seed in &cfg.seeds {
        let dec = random_decomposition(s.space.clone(), s.dilation.clone(), &params, seed)?;
        let r = coefficient_bound_check(&dec, s.exponents.theta0)?;
        csv.push_str(&format!("{},{:.16e},{:.16e},{:.16e}\n", seed, r.lhs, r.rhs, r.ratio));
        worst = worst.max(r.ratio);
    }
    Ok(Outcome {
        name: "coeff-bound",
        csv,
        summary: json!({
            "C_hat": num(worst),
            "shell_at_sup": null,
            "pass": worst <= 1.0 + COEFF_TOL,
            "ratio": num(worst),
        }),
    })
}

pub fn lower_bound(cfg: &ExperimentConfig, name: &'static str) -> Result<Outcome> {
    let s = cfg.setup()?;
    let (lo, hi) = cfg.shells_or(-6, 6);
    let r = s.space.check_lower_bound(s.dilation.clone(), lo..=hi)?;
    let mut csv = String::from("k,volume,indicator,bound,ratio\n");
    for row in &r.rows {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            row.k, row.volume, row.indicator, row.bound, row.ratio
        ));
    }
    let at = r
        .rows
        .iter()
        .find(|row| row.ratio == r.min_ratio)
        .map(|row| row.k);
    Ok(Outcome {
        name,
        csv,
        summary: json!({
            "C_hat": num(r.min_ratio),
            "shell_at_sup": at,
            "pass": r.decade_stable(),
            "min_ratio": num(r.min_ratio),
            "median_ratio": num(r.median_ratio),
        }),
    })
}

/// Disjoint weighted indicators centered at `-3, -1, 1, 3` along the first axis.
fn probe_family(dilation: &std::sync::Arc<ExpansiveDilation>, res: usize, seed: u64) -> Result<Vec<GridFunction>> {
    let n = dilation.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_top = (-12..=0)
        .rev()
        .find(|&k| dilation.half_widths(k).iter().all(|h| *h < 1.0))
        .ok_or_else(|| Error::InvalidParameter("no probe scale fits the unit slots".into()))?;
    let mut family = Vec::with_capacity(FS_FAMILY);
    for j in 0..FS_FAMILY {
        let mut center = vec![0.0; n];
        center[0] = -3.0 + 2.0 * j as f64;
        for c in center.iter_mut().skip(1) {
            *c = rng.gen_range(-2.0..2.0);
        }
        let k = k_top - rng.gen_range(0..2);
        let ball = DilatedBall::new(center, k, dilation.clone())?;
        let amp = rng.gen_range(0.5..1.5);
        family.push(GridFunction::from_fn(vec![-4.0; n], vec![4.0; n], vec![res; n], |x| {
            if ball.contains(x) {
                amp
            } else {
                0.0
            }
        })?);
    }
    Ok(family)
}

fn fs(cfg: &ExperimentConfig, args: &FsArgs) -> Result<Outcome> {
    let s = cfg.setup()?;
    let n = s.dilation.n;
    let p = args.exponent.unwrap_or(2.0 / 3.0 * s.exponents.p_minus);
    let res = cfg.grid.unwrap_or(if n == 1 { 512 } else { 64 });
    let mut csv = String::from("seed,c_fs\n");
    let mut values = Vec::new();
    let mut pass = true;
    for &seed in &cfg.seeds {
        let family = probe_family(&s.dilation, res, seed)?;
        let scan = BallScan::default_for(&family[0], s.dilation.clone())?;
        match fs_probe(&s.space, p, args.u, &family, &scan)? {
            Some(c) => {
                csv.push_str(&format!("{},{:.16e}\n", seed, c));
                pass &= c.is_finite();
                values.push(c);
            }
            None => csv.push_str(&format!("{},\n", seed)),
        }
    }
    let c_hat = values.iter().cloned().fold(0.0, f64::max);
    let probe_spread = spread(&values);
    pass &= !values.is_empty() && probe_spread <= FS_SPREAD_MAX;
    Ok(Outcome {
        name: "fs-probe",
        csv,
        summary: json!({
            "C_hat": num(c_hat),
            "shell_at_sup": null,
            "pass": pass,
            "p": num(p),
            "u": num(args.u),
            "spread": num(probe_spread),
        }),
    })
}
