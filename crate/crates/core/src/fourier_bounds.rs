//! Fourier-side checks on atoms and finite decompositions: derivative decay,
//! the pointwise envelope bound, vanishing order at the origin and the
//! weighted Hardy-Littlewood integral.

use std::io::Write;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::atoms::{atomic_quasi_norm, Atom, AtomicDecomposition};
use crate::dilation::{ExpansiveDilation, StepQuasiNorm};
use crate::error::{Error, Result};
use crate::spaces::ExponentBundle;

/// `E(ξ) = max{ρ*(ξ)^{1/q0 - 1}, ρ*(ξ)^{1/p_- - 1}}`.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub rho_star: StepQuasiNorm,
    pub q0: f64,
    pub p_minus: f64,
}

impl Envelope {
    pub fn new(dilation: &ExpansiveDilation, e: &ExponentBundle) -> Result<Self> {
        Ok(Envelope {
            rho_star: StepQuasiNorm::transposed(dilation)?,
            q0: e.q0,
            p_minus: e.p_minus,
        })
    }

    pub fn b(&self) -> f64 {
        self.rho_star.b()
    }

    /// The transpose dilation generating ρ*.
    pub fn dual(&self) -> &Arc<ExpansiveDilation> {
        &self.rho_star.dilation
    }

    /// Envelope value on the shell where `ρ* = b^m`.
    pub fn level(&self, m: i32) -> f64 {
        let r = self.b().powi(m);
        r.powf(1.0 / self.q0 - 1.0).max(r.powf(1.0 / self.p_minus - 1.0))
    }

    /// `E(ξ)`, zero at the origin.
    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        Ok(match self.rho_star.exponent(xi)? {
            None => 0.0,
            Some(m) => self.level(m),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellPoint {
    pub xi: Vec<f64>,
    /// Exponent with `ρ*(ξ) = b^m`.
    pub m: i32,
}

/// Frequencies grouped by ρ*-shell.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    pub m_min: i32,
    pub m_max: i32,
    pub samples_per_shell: usize,
    pub points: Vec<ShellPoint>,
}

impl FrequencyGrid {
    /// `samples` points on each shell `B*_{m+1} \ B*_m`, `m ∈ m_range`,
    /// obtained by mapping one set of base-shell samples through `(Aᵀ)^m`.
    ///
    /// Points whose computed exponent disagrees with the intended shell
    /// (rounding at the boundary) are dropped.
    pub fn new(env: &Envelope, m_range: RangeInclusive<i32>, samples: usize, seed: u64) -> Result<Self> {
        let dual = env.dual();
        let base = dual.base_shell_samples(samples, seed);
        let mut points = Vec::new();
        for m in m_range.clone() {
            for xi in dual.shell_samples(m, &base) {
                if env.rho_star.exponent(&xi)? == Some(m) {
                    points.push(ShellPoint { xi, m });
                }
            }
        }
        Ok(FrequencyGrid {
            m_min: *m_range.start(),
            m_max: *m_range.end(),
            samples_per_shell: samples,
            points,
        })
    }

    pub fn xis(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.xi.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Per-shell row `(shell_m, rho_star, metric)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellRow {
    pub shell_m: i32,
    pub rho_star: f64,
    pub metric: f64,
}

/// Write shell rows as CSV with the `shell_m,rho_star,metric` header.
pub fn write_shell_csv<W: Write>(rows: &[ShellRow], mut w: W) -> Result<()> {
    writeln!(w, "shell_m,rho_star,metric")?;
    for r in rows {
        writeln!(w, "{},{:.16e},{:.16e}", r.shell_m, r.rho_star, r.metric)?;
    }
    Ok(())
}

/// Empirical constant with the shell where it is attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    pub shell_at_sup: Option<i32>,
    #[serde(skip)]
    pub profile: Vec<ShellRow>,
}

fn shell_profile(grid: &FrequencyGrid, b: f64, ratios: &[f64]) -> BoundReport {
    let mut profile: Vec<ShellRow> = (grid.m_min..=grid.m_max)
        .map(|m| ShellRow {
            shell_m: m,
            rho_star: b.powi(m),
            metric: 0.0,
        })
        .collect();
    let mut c_hat: f64 = 0.0;
    let mut at = None;
    for (p, r) in grid.points.iter().zip(ratios) {
        let row = &mut profile[(p.m - grid.m_min) as usize];
        row.metric = row.metric.max(*r);
        if *r > c_hat {
            c_hat = *r;
            at = Some(p.m);
        }
    }
    BoundReport {
        c_hat,
        shell_at_sup: at,
        profile,
    }
}

/// One row of [`derivative_decay_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeRow {
    pub alpha: Vec<usize>,
    pub c_hat: f64,
}

/// `Ĉ_α = sup |∂^α 𝓕(D_A^{i0} a)(ξ)| / (b^{-i0/q} ‖a‖_q min{1, |ξ|^{d-|α|+1}})`
/// with `i0` the scale of the atom's ball.
pub fn derivative_decay_check(a: &Atom, alphas: &[Vec<usize>], grid: &FrequencyGrid) -> Result<Vec<DerivativeRow>> {
    let d = &a.ball.dilation;
    let i0 = a.ball.k;
    let rescaled = a.f.dilate(d, i0)?;
    let scale = d.b.powf(-(i0 as f64) / a.q) * a.f.lq_norm(a.q);
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let order: usize = alpha.iter().sum();
        if alpha.len() != d.n {
            return Err(Error::Dimension(format!("multi-index {:?} in R^{}", alpha, d.n)));
        }
        if order > a.d {
            return Err(Error::InvalidParameter(format!(
                "|α| = {} exceeds the moment order d = {}",
                order, a.d
            )));
        }
        let mut c_hat: f64 = 0.0;
        for p in &grid.points {
            let r = p.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r == 0.0 {
                continue;
            }
            let v = rescaled.fourier_derivative_at(&p.xi, alpha).norm();
            let den = scale * r.powi((a.d - order + 1) as i32).min(1.0);
            c_hat = c_hat.max(v / den);
        }
        rows.push(DerivativeRow {
            alpha: alpha.clone(),
            c_hat,
        });
    }
    Ok(rows)
}

/// `Ĉ = sup_{ξ≠0} |â(ξ)| / E(ξ)` over the grid.
pub fn pointwise_bound_check(a: &Atom, env: &Envelope, grid: &FrequencyGrid) -> Result<BoundReport> {
    let vals = a.f.fourier_on_grid(&grid.xis());
    let ratios: Vec<f64> = grid
        .points
        .iter()
        .zip(&vals)
        .map(|(p, v)| v.norm() / env.level(p.m))
        .collect();
    Ok(shell_profile(grid, env.b(), &ratios))
}

/// `F(ξ) = Σ λ_i â_i(ξ)`.
pub fn reconstruct_f(dec: &AtomicDecomposition, xi: &[f64]) -> Complex64 {
    dec.lambdas
        .iter()
        .zip(&dec.atoms)
        .map(|(l, a)| l * a.f.fourier_at(xi))
        .sum()
}

/// [`reconstruct_f`] over many frequencies.
pub fn reconstruct_on(dec: &AtomicDecomposition, xis: &[Vec<f64>]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); xis.len()];
    for (l, a) in dec.lambdas.iter().zip(&dec.atoms) {
        if l.norm() == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(a.f.fourier_on_grid(xis)) {
            *o += l * v;
        }
    }
    out
}

/// `Ĉ = sup |F(ξ)| / (N_atomic E(ξ))`, with the atomic quasi-norm standing in
/// for the Hardy norm.
pub fn decomposition_bound_check(
    dec: &AtomicDecomposition,
    env: &Envelope,
    grid: &FrequencyGrid,
    theta0: f64,
) -> Result<BoundReport> {
    let n_atomic = atomic_quasi_norm(dec, theta0)?;
    if n_atomic == 0.0 {
        return Ok(shell_profile(grid, env.b(), &vec![0.0; grid.len()]));
    }
    let vals = reconstruct_on(dec, &grid.xis());
    let ratios: Vec<f64> = grid
        .points
        .iter()
        .zip(&vals)
        .map(|(p, v)| v.norm() / (n_atomic * env.level(p.m)))
        .collect();
    Ok(shell_profile(grid, env.b(), &ratios))
}

/// `1 - 1/q0 + (d+1) ln λ_- / ln b`.
pub fn theoretical_origin_rate(q0: f64, d: usize, dilation: &ExpansiveDilation) -> f64 {
    1.0 - 1.0 / q0 + (d as f64 + 1.0) * dilation.lambda_minus.ln() / dilation.b.ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OriginDecay {
    /// Rows indexed by `m` with `ρ* = b^{-m}`; `metric` holds `R_m`.
    pub rows: Vec<ShellRow>,
    /// `-slope` of the least-squares fit of `log_b R_m` against `m`.
    pub fitted_rate: f64,
    pub theoretical_rate: f64,
    /// `R_{m_max} ≤ 0.1 R_{m_min + 2}`.
    pub decays: bool,
    /// `R_m` non-increasing over the range.
    pub monotone: bool,
}

/// `R_m = max |F(ξ)| / ρ*(ξ)^{1/q0 - 1}` over samples with `ρ*(ξ) = b^{-m}`.
pub fn origin_decay_profile(
    dec: &AtomicDecomposition,
    env: &Envelope,
    m_range: RangeInclusive<i32>,
    samples: usize,
    seed: u64,
) -> Result<OriginDecay> {
    let (lo, hi) = (*m_range.start(), *m_range.end());
    if lo > hi {
        return Err(Error::InvalidParameter("empty shell range".into()));
    }
    let grid = FrequencyGrid::new(env, -hi..=-lo, samples, seed)?;
    let vals = reconstruct_on(dec, &grid.xis());
    let b = env.b();
    let mut rows: Vec<ShellRow> = (lo..=hi)
        .map(|m| ShellRow {
            shell_m: m,
            rho_star: b.powi(-m),
            metric: 0.0,
        })
        .collect();
    for (p, v) in grid.points.iter().zip(&vals) {
        let m = -p.m;
        let row = &mut rows[(m - lo) as usize];
        row.metric = row.metric.max(v.norm() / row.rho_star.powf(1.0 / env.q0 - 1.0));
    }
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.metric > 0.0)
        .map(|r| (r.shell_m as f64, r.metric.ln() / b.ln()))
        .collect();
    let fitted_rate = if fit.len() >= 2 {
        let k = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / k;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -sxy / sxx
    } else {
        f64::NAN
    };
    let d = dec.atoms.first().map_or(0, |a| a.d);
    let r_at = |m: i32| rows.iter().find(|r| r.shell_m == m).map(|r| r.metric);
    let decays = match (r_at(hi), r_at(lo + 2)) {
        (Some(top), Some(early)) => top <= 0.1 * early,
        _ => false,
    };
    let monotone = rows.windows(2).all(|w| w[1].metric <= w[0].metric);
    Ok(OriginDecay {
        rows,
        fitted_rate,
        theoretical_rate: theoretical_origin_rate(env.q0, d, env.dual()),
        decays,
        monotone,
    })
}

/// Per-shell sample counts `clamp(round(base b^m), min, max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellDensity {
    pub base: f64,
    pub min: usize,
    pub max: usize,
}

impl Default for ShellDensity {
    fn default() -> Self {
        ShellDensity {
            base: 2.0,
            min: 32,
            max: 1 << 14,
        }
    }
}

impl ShellDensity {
    pub fn count(&self, b: f64, m: i32) -> usize {
        let raw = (self.base * b.powi(m)).round();
        if raw.is_finite() {
            (raw as usize).clamp(self.min, self.max)
        } else {
            self.max
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HlReport {
    pub integral: f64,
    pub n_atomic: f64,
    /// `integral / n_atomic`.
    pub ratio: f64,
    /// `(I_M - I_{M-2}) / I_M`.
    pub tail_increment: f64,
    pub cutoff: i32,
    /// Per-shell contributions `∫_shell |F|^{q0} w`.
    pub rows: Vec<ShellRow>,
}

/// Relative increment accepted between cutoffs `M - 2` and `M`.
pub const HL_TAIL_TOL: f64 = 0.01;

/// `I = {∫ |F|^{q0} min{ρ*^{q0 - q0/p_- - 1}, ρ*^{q0 - 2}}}^{1/q0}` by shell
/// quadrature over `ρ* ∈ (b^{-M}, b^M)`.
pub fn hardy_littlewood_integral(
    dec: &AtomicDecomposition,
    env: &Envelope,
    cutoff: i32,
    density: ShellDensity,
    theta0: f64,
    seed: u64,
) -> Result<HlReport> {
    if cutoff < 2 {
        return Err(Error::InvalidParameter("shell cutoff must be at least 2".into()));
    }
    let n_atomic = atomic_quasi_norm(dec, theta0)?;
    let b = env.b();
    let q0 = env.q0;
    let dual = env.dual();
    let mut rows = Vec::new();
    for m in -cutoff..cutoff {
        let count = density.count(b, m);
        let base = dual.base_shell_samples(count, seed.wrapping_add(m as u64));
        let xis = dual.shell_samples(m, &base);
        let vals = reconstruct_on(dec, &xis);
        let mean = vals.iter().map(|v| v.norm().powf(q0)).sum::<f64>() / vals.len() as f64;
        let rho = b.powi(m);
        let weight = rho
            .powf(q0 - q0 / env.p_minus - 1.0)
            .min(rho.powf(q0 - 2.0));
        let volume = rho * (b - 1.0);
        rows.push(ShellRow {
            shell_m: m,
            rho_star: rho,
            metric: volume * mean * weight,
        });
    }
    let total: f64 = rows.iter().map(|r| r.metric).sum();
    let inner: f64 = rows
        .iter()
        .filter(|r| r.shell_m >= -(cutoff - 2) && r.shell_m < cutoff - 2)
        .map(|r| r.metric)
        .sum();
    let integral = total.powf(1.0 / q0);
    let tail_increment = if integral > 0.0 {
        (integral - inner.powf(1.0 / q0)) / integral
    } else {
        0.0
    };
    if tail_increment > HL_TAIL_TOL {
        return Err(Error::NotConverged(format!(
            "tail increment {:.3e} between cutoffs {} and {} exceeds {}",
            tail_increment,
            cutoff - 2,
            cutoff,
            HL_TAIL_TOL
        )));
    }
    let ratio = if n_atomic > 0.0 { integral / n_atomic } else { 0.0 };
    Ok(HlReport {
        integral,
        n_atomic,
        ratio,
        tail_increment,
        cutoff,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::sign_atom;
    use crate::dilation::DilatedBall;
    use crate::spaces::BallSpace;
    use std::f64::consts::PI;

    fn setup(p: f64) -> (Arc<ExpansiveDilation>, Arc<BallSpace>, Envelope) {
        let d = Arc::new(ExpansiveDilation::from_text("2").unwrap());
        let s = Arc::new(BallSpace::lebesgue(p).unwrap());
        let env = Envelope::new(&d, &s.exponents().unwrap()).unwrap();
        (d, s, env)
    }

    #[test]
    fn grid_labels_match() {
        let (_, _, env) = setup(2.0 / 3.0);
        let g = FrequencyGrid::new(&env, -3..=3, 16, 1).unwrap();
        assert_eq!(g.len(), 7 * 16);
        for p in &g.points {
            assert_eq!(env.rho_star.exponent(&p.xi).unwrap(), Some(p.m));
        }
    }

    #[test]
    fn sign_atom_derivative_constant() {
        let (d, s, env) = setup(2.0 / 3.0);
        let g = FrequencyGrid::new(&env, -10..=6, 32, 1).unwrap();
        let a0 = sign_atom(s.clone(), DilatedBall::centered(0, d.clone()).unwrap(), 2.0, None).unwrap();
        let c0 = derivative_decay_check(&a0, &[vec![0]], &g).unwrap()[0].c_hat;
        assert!(c0 <= PI / 2.0 + 1e-3, "{}", c0);
        assert!(c0 > 1.0);
        let a2 = sign_atom(s, DilatedBall::centered(2, d).unwrap(), 2.0, None).unwrap();
        let c2 = derivative_decay_check(&a2, &[vec![0]], &g).unwrap()[0].c_hat;
        assert!(c2 / c0 < 1.5 && c0 / c2 < 1.5);
    }

    #[test]
    fn cancellation_and_linearity() {
        let (d, s, env) = setup(2.0 / 3.0);
        let a = sign_atom(s, DilatedBall::centered(0, d).unwrap(), 2.0, None).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let dec = AtomicDecomposition::new(vec![one, -one], vec![a.clone(), a.clone()]).unwrap();
        assert_eq!(reconstruct_f(&dec, &[0.7]).norm(), 0.0);
        let single = AtomicDecomposition::new(vec![one], vec![a.clone()]).unwrap();
        assert_eq!(reconstruct_f(&single, &[0.7]), a.f.fourier_at(&[0.7]));
        let g = FrequencyGrid::new(&env, -4..=4, 8, 1).unwrap();
        let pw = pointwise_bound_check(&a, &env, &g).unwrap();
        let t31 = decomposition_bound_check(&single, &env, &g, 0.6).unwrap();
        assert!((pw.c_hat - t31.c_hat).abs() <= 1e-12 * pw.c_hat);
        let zero = AtomicDecomposition::new(vec![one * 0.0], vec![a]).unwrap();
        assert_eq!(decomposition_bound_check(&zero, &env, &g, 0.6).unwrap().c_hat, 0.0);
    }

    #[test]
    fn sign_atom_origin_rate() {
        let (d, s, env) = setup(2.0 / 3.0);
        let a = sign_atom(s, DilatedBall::centered(0, d.clone()).unwrap(), 2.0, None).unwrap();
        let dec = AtomicDecomposition::new(vec![Complex64::new(1.0, 0.0)], vec![a]).unwrap();
        let od = origin_decay_profile(&dec, &env, 2..=12, 16, 3).unwrap();
        assert!((od.theoretical_rate - 0.5).abs() < 1e-12);
        assert!((od.fitted_rate - 0.5).abs() < 0.125, "{}", od.fitted_rate);
        assert!(od.decays && od.monotone, "{:?}", od);
    }
}
