//! Anisotropic `(X, q, d)`-atoms and finite atomic decompositions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dilation::{DilatedBall, ExpansiveDilation};
use crate::error::{Error, Result};
use crate::grid::{default_resolution, multi_indices, GridFunction};
use crate::linalg::quad_form;
use crate::spaces::{BallSpace, ExponentBundle};

/// Default atom integrability exponent.
pub const DEFAULT_Q: f64 = 2.0;
/// Gram condition number beyond which the moment system is rejected.
pub const GRAM_COND_MAX: f64 = 1e12;

/// Validation thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub support: f64,
    pub size: f64,
    pub moment: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            support: 1e-14,
            size: 1e-10,
            moment: 1e-10,
        }
    }
}

/// `max(⌊(1/θ0 − 1) ln b / ln λ_-⌋, 0)`.
pub fn default_d(e: &ExponentBundle, d: &ExpansiveDilation) -> usize {
    let v = (1.0 / e.theta0 - 1.0) * d.b.ln() / d.lambda_minus.ln();
    v.floor().max(0.0) as usize
}

/// Residuals recorded by [`validate_atom`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomReport {
    /// `max |a|` outside the ball divided by `‖a‖_∞`.
    pub support_leak: f64,
    /// `‖a‖_q / (|B|^{1/q} ‖1_B‖^{-1})`.
    pub size_ratio: f64,
    /// `max_γ |∫ a (x-c)^γ| / (‖a‖_∞ diam^{|γ|})`.
    pub max_moment: f64,
    pub support_ok: bool,
    pub size_ok: bool,
    pub moments_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Atom {
    pub f: GridFunction,
    pub ball: DilatedBall,
    pub q: f64,
    pub d: usize,
    pub space: Arc<BallSpace>,
    pub seed: u64,
    pub certs: AtomReport,
}

impl Atom {
    /// Size bound `|B|^{1/q} ‖1_B‖_X^{-1}`.
    pub fn size_bound(&self) -> Result<f64> {
        size_bound(&self.space, &self.ball, self.q)
    }

    /// JSON manifest `{center, k, q, d, space_descriptor, seed, residuals}`.
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "center": self.ball.center,
            "k": self.ball.k,
            "q": if self.q.is_infinite() { serde_json::Value::from("inf") } else { self.q.into() },
            "d": self.d,
            "space_descriptor": self.space.descriptor(),
            "seed": self.seed,
            "residuals": self.certs,
        })
    }
}

fn size_bound(space: &BallSpace, ball: &DilatedBall, q: f64) -> Result<f64> {
    let vol_q = if q.is_infinite() { 1.0 } else { ball.volume().powf(1.0 / q) };
    Ok(vol_q / space.indicator_norm(ball)?)
}

/// Grid over the bounding box of `ball`, symmetric about its center.
pub fn ball_grid(ball: &DilatedBall, res: usize) -> Result<GridFunction> {
    let (lo, hi) = ball.bounding_box();
    GridFunction::zeros(lo, hi, vec![res; ball.dilation.n])
}

fn bump(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s)).exp()
    } else {
        0.0
    }
}

/// Options for [`make_atom_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AtomOptions {
    /// Cells per axis; defaults to the grid module's resolution for `n`.
    pub resolution: Option<usize>,
    pub thresholds: Thresholds,
}


/// Random smooth atom with default options.
pub fn make_atom(space: Arc<BallSpace>, ball: DilatedBall, q: f64, d: usize, seed: u64) -> Result<Atom> {
    make_atom_with(space, ball, q, d, seed, AtomOptions::default())
}

/// Random smooth atom: seeded bump, moment removal through the discrete Gram
/// system, then scaling onto the size bound.
pub fn make_atom_with(
    space: Arc<BallSpace>,
    ball: DilatedBall,
    q: f64,
    d: usize,
    seed: u64,
    opts: AtomOptions,
) -> Result<Atom> {
    let e = space.exponents()?;
    if !(q > e.p0.max(1.0)) {
        return Err(Error::InvalidParameter(format!(
            "atom exponent q = {} must exceed max(p0, 1) = {}",
            q,
            e.p0.max(1.0)
        )));
    }
    let n = ball.dilation.n;
    let res = opts.resolution.unwrap_or_else(|| default_resolution(n));
    let grid = ball_grid(&ball, res)?;
    let hw: Vec<f64> = (0..n).map(|a| 0.5 * (grid.upper()[a] - grid.lower()[a])).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, Vec<f64>, f64)> = (0..4)
        .map(|_| {
            let amp = rng.gen_range(0.5..1.5);
            let freq: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.5..2.5)).collect();
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (amp, freq, phase)
        })
        .collect();
    let offset: f64 = rng.gen_range(-0.5..0.5);

    let form = ball.dilation.ball_form(ball.k);
    let c2 = ball.dilation.c().powi(2);
    let len = grid.len();
    let mut window = vec![0.0; len];
    let mut g = vec![0.0; len];
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(len);
    let mut x = vec![0.0; n];
    for idx in 0..len {
        grid.center_into(idx, &mut x);
        let diff: Vec<f64> = (0..n).map(|a| x[a] - ball.center[a]).collect();
        let w = bump(quad_form(&form, n, &diff) / c2);
        let y: Vec<f64> = (0..n).map(|a| diff[a] / hw[a]).collect();
        let r: f64 = offset
            + terms
                .iter()
                .map(|(amp, fr, ph)| {
                    let arg: f64 = fr.iter().zip(&y).map(|(f, v)| f * v).sum::<f64>();
                    amp * (std::f64::consts::TAU * arg + ph).sin()
                })
                .sum::<f64>();
        window[idx] = w;
        g[idx] = w * r;
        ys.push(y);
    }

    let basis = multi_indices(n, d);
    let mono = |y: &[f64], gamma: &[usize]| -> f64 {
        y.iter().zip(gamma).map(|(v, &e)| v.powi(e as i32)).product()
    };
    let m = basis.len();
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    let mut vals = vec![0.0; m];
    for idx in 0..len {
        if window[idx] == 0.0 {
            continue;
        }
        for (i, gamma) in basis.iter().enumerate() {
            vals[i] = mono(&ys[idx], gamma);
        }
        for i in 0..m {
            rhs[i] += g[idx] * vals[i];
            for j in 0..m {
                gram[(i, j)] += window[idx] * vals[i] * vals[j];
            }
        }
    }
    let eig = gram.clone().symmetric_eigenvalues();
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(0.0, f64::max);
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if cond > GRAM_COND_MAX {
        return Err(Error::GramSingular { cond });
    }
    let chol = gram.cholesky().ok_or(Error::GramSingular { cond })?;
    // Two projection passes: the second removes the solver residual of the first.
    for pass in 0..2 {
        if pass == 1 {
            rhs.fill(0.0);
            for idx in 0..len {
                if window[idx] == 0.0 {
                    continue;
                }
                for (i, gamma) in basis.iter().enumerate() {
                    rhs[i] += g[idx] * mono(&ys[idx], gamma);
                }
            }
        }
        let coef = chol.solve(&rhs);
        for idx in 0..len {
            if window[idx] == 0.0 {
                continue;
            }
            let corr: f64 = basis
                .iter()
                .enumerate()
                .map(|(i, gamma)| coef[i] * mono(&ys[idx], gamma))
                .sum();
            g[idx] -= window[idx] * corr;
        }
    }
    let bound = size_bound(&space, &ball, q)?;
    let norm0 = grid.with_values(g.clone())?.lq_norm(q);
    if norm0 == 0.0 {
        return Err(Error::InvalidParameter("moment removal annihilated the bump".into()));
    }
    let amplitude = rng.gen_range(1.0..2.0) * bound / norm0;
    let a0 = grid.with_values(g.into_iter().map(|v| v * amplitude).collect())?;
    let a = a0.scaled((bound / a0.lq_norm(q)).min(1.0));
    finish(a, ball, q, d, space, seed, opts.thresholds)
}

/// The one-dimensional sign atom `sign(x - c) 1_B(x) / ‖1_B‖_X`.
pub fn sign_atom(space: Arc<BallSpace>, ball: DilatedBall, q: f64, res: Option<usize>) -> Result<Atom> {
    if ball.dilation.n != 1 {
        return Err(Error::Dimension("the sign atom is defined in one dimension".into()));
    }
    let grid = ball_grid(&ball, res.unwrap_or(default_resolution(1)))?;
    let scale = 1.0 / space.indicator_norm(&ball)?;
    let c = ball.center[0];
    let half = grid.len() / 2;
    let values: Vec<f64> = (0..grid.len())
        .map(|i| if i < half { -scale } else { scale })
        .collect();
    debug_assert!(grid.center(half)[0] > c);
    let f = grid.with_values(values)?;
    finish(f, ball, q, 0, space, 0, Thresholds::default())
}

fn finish(
    f: GridFunction,
    ball: DilatedBall,
    q: f64,
    d: usize,
    space: Arc<BallSpace>,
    seed: u64,
    thresholds: Thresholds,
) -> Result<Atom> {
    let mut atom = Atom {
        f,
        ball,
        q,
        d,
        space,
        seed,
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
    atom.certs = validate_atom_with(&atom, thresholds)?;
    Ok(atom)
}

/// Check support, size and vanishing moments at default thresholds.
pub fn validate_atom(a: &Atom) -> Result<AtomReport> {
    validate_atom_with(a, Thresholds::default())
}

pub fn validate_atom_with(a: &Atom, t: Thresholds) -> Result<AtomReport> {
    let f = &a.f;
    let sup = f.sup_norm();
    let mut leak: f64 = 0.0;
    let mut x = vec![0.0; f.dim()];
    for (idx, v) in f.values().iter().enumerate() {
        if *v != 0.0 {
            f.center_into(idx, &mut x);
            if !a.ball.contains(&x) {
                leak = leak.max(v.abs());
            }
        }
    }
    let support_leak = if sup > 0.0 { leak / sup } else { 0.0 };
    let bound = a.size_bound()?;
    let size_ratio = f.lq_norm(a.q) / bound;
    let diam = a.ball.diameter();
    let mut max_moment: f64 = 0.0;
    if sup > 0.0 {
        for gamma in multi_indices(f.dim(), a.d) {
            let order: usize = gamma.iter().sum();
            let m = f.moment(&gamma, &a.ball.center).abs();
            max_moment = max_moment.max(m / (sup * diam.powi(order as i32)));
        }
    }
    let support_ok = support_leak <= t.support;
    let size_ok = size_ratio <= 1.0 + t.size;
    let moments_ok = max_moment <= t.moment;
    Ok(AtomReport {
        support_leak,
        size_ratio,
        max_moment,
        support_ok,
        size_ok,
        moments_ok,
        pass: support_ok && size_ok && moments_ok,
    })
}

/// A finite decomposition `Σ λ_j a_j`.
#[derive(Debug, Clone)]
pub struct AtomicDecomposition {
    pub lambdas: Vec<Complex64>,
    pub atoms: Vec<Atom>,
}

impl AtomicDecomposition {
    pub fn new(lambdas: Vec<Complex64>, atoms: Vec<Atom>) -> Result<Self> {
        if lambdas.len() != atoms.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} atoms",
                lambdas.len(),
                atoms.len()
            )));
        }
        if let Some(first) = atoms.first() {
            let desc = first.space.descriptor();
            if atoms
                .iter()
                .any(|a| a.q != first.q || a.d != first.d || a.space.descriptor() != desc)
            {
                return Err(Error::InvalidParameter(
                    "all atoms must share the same (space, q, d)".into(),
                ));
            }
        }
        Ok(AtomicDecomposition { lambdas, atoms })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn abs_sum(&self) -> f64 {
        self.lambdas.iter().map(|l| l.norm()).sum()
    }

    /// JSON manifest: list of `{lambda, atom}`.
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.lambdas
                .iter()
                .zip(&self.atoms)
                .map(|(l, a)| serde_json::json!({"lambda": [l.re, l.im], "atom": a.manifest()}))
                .collect(),
        )
    }
}

/// Largest cell count used when assembling the indicator stack.
const STACK_CELL_CAP: usize = 1 << 20;
const CELLS_PER_BALL: f64 = 16.0;

/// Common grid over the union of the balls, fine enough to resolve the
/// smallest one.
fn stack_grid(dec: &AtomicDecomposition) -> Result<GridFunction> {
    let n = dec.atoms[0].ball.dilation.n;
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let mut min_width = vec![f64::INFINITY; n];
    for a in &dec.atoms {
        let (l, h) = a.ball.bounding_box();
        for i in 0..n {
            lo[i] = lo[i].min(l[i]);
            hi[i] = hi[i].max(h[i]);
            min_width[i] = min_width[i].min(h[i] - l[i]);
        }
    }
    let per_axis_cap = (STACK_CELL_CAP as f64).powf(1.0 / n as f64).floor() as usize;
    let shape: Vec<usize> = (0..n)
        .map(|i| {
            let want = (CELLS_PER_BALL * (hi[i] - lo[i]) / min_width[i]).ceil() as usize;
            want.clamp(default_resolution(n).min(per_axis_cap), per_axis_cap)
        })
        .collect();
    GridFunction::zeros(lo, hi, shape)
}

/// `‖{Σ_j [|λ_j| 1_{B_j} / ‖1_{B_j}‖_X]^{θ0}}^{1/θ0}‖_X`.
///
/// Indicators and their norms are both taken on one common grid, so the
/// functional is evaluated consistently at the discrete level.
pub fn atomic_quasi_norm(dec: &AtomicDecomposition, theta0: f64) -> Result<f64> {
    if dec.is_empty() || dec.lambdas.iter().all(|l| l.norm() == 0.0) {
        return Ok(0.0);
    }
    let space = dec.atoms[0].space.clone();
    let grid = stack_grid(dec)?;
    let mut stack = vec![0.0; grid.len()];
    let mut x = vec![0.0; grid.dim()];
    for (lam, atom) in dec.lambdas.iter().zip(&dec.atoms) {
        if lam.norm() == 0.0 {
            continue;
        }
        let mut ind = vec![0.0; grid.len()];
        for (idx, v) in ind.iter_mut().enumerate() {
            grid.center_into(idx, &mut x);
            if atom.ball.contains(&x) {
                *v = 1.0;
            }
        }
        let ind = grid.with_values(ind)?;
        let norm = space.norm(&ind)?;
        if norm == 0.0 {
            return Err(Error::InvalidParameter("ball not resolved by the stack grid".into()));
        }
        let w = (lam.norm() / norm).powf(theta0);
        for (s, v) in stack.iter_mut().zip(ind.values()) {
            if *v != 0.0 {
                *s += w;
            }
        }
    }
    let assembled = grid.with_values(stack.into_iter().map(|s| s.powf(1.0 / theta0)).collect())?;
    space.norm(&assembled)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `Σ|λ_j|` against the atomic quasi-norm.
pub fn coefficient_bound_check(dec: &AtomicDecomposition, theta0: f64) -> Result<CoefficientBound> {
    let lhs = dec.abs_sum();
    let rhs = atomic_quasi_norm(dec, theta0)?;
    let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(CoefficientBound { lhs, rhs, ratio })
}

/// How coefficients of random decompositions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaLaw {
    /// `|λ_j| ~ U(0.5, 1)` with a uniform random phase.
    Uniform,
    /// `|λ_j| = 10^{-j} U(0.5, 1)` with a uniform random phase: one dominant
    /// atom and geometrically smaller corrections.
    Dominant,
}

/// Parameters of [`random_decomposition`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionParams {
    pub atoms: usize,
    /// Scales are drawn uniformly from this inclusive range.
    pub k_range: (i32, i32),
    /// Centers are drawn uniformly from `[-spread, spread]^n`.
    pub center_spread: f64,
    pub lambda: LambdaLaw,
    pub q: f64,
    pub d: usize,
    pub options: AtomOptions,
    /// Use disjoint balls along axis 0 instead of random centers.
    pub disjoint: bool,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        DecompositionParams {
            atoms: 5,
            k_range: (-2, 1),
            center_spread: 2.0,
            lambda: LambdaLaw::Uniform,
            q: DEFAULT_Q,
            d: 0,
            options: AtomOptions::default(),
            disjoint: false,
        }
    }
}

/// Seeded random decomposition of smooth atoms.
pub fn random_decomposition(
    space: Arc<BallSpace>,
    dilation: Arc<ExpansiveDilation>,
    params: &DecompositionParams,
    seed: u64,
) -> Result<AtomicDecomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let n = dilation.n;
    let mut lambdas = Vec::with_capacity(params.atoms);
    let mut atoms = Vec::with_capacity(params.atoms);
    let mut cursor = 0.0;
    for j in 0..params.atoms {
        let k = rng.gen_range(params.k_range.0..=params.k_range.1);
        let center: Vec<f64> = if params.disjoint {
            let hw = dilation.half_widths(k);
            let mut c = vec![0.0; n];
            c[0] = cursor + hw[0];
            cursor += 2.0 * hw[0] * 1.05;
            c
        } else {
            (0..n)
                .map(|_| rng.gen_range(-params.center_spread..=params.center_spread))
                .collect()
        };
        let modulus = rng.gen_range(0.5..1.0)
            * match params.lambda {
                LambdaLaw::Uniform => 1.0,
                LambdaLaw::Dominant => 0.1f64.powi(j as i32),
            };
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        lambdas.push(Complex64::from_polar(modulus, phase));
        let ball = DilatedBall::new(center, k, dilation.clone())?;
        let atom_seed: u64 = rng.gen();
        atoms.push(make_atom_with(
            space.clone(),
            ball,
            params.q,
            params.d,
            atom_seed,
            params.options,
        )?);
    }
    AtomicDecomposition::new(lambdas, atoms)
}
