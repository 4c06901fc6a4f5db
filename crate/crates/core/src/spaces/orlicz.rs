//! Orlicz functions and Luxemburg-type norms.

use crate::error::{Error, Result};

pub(crate) const BRACKET_LO: f64 = 1e-12;
pub(crate) const BRACKET_HI: f64 = 1e12;
const MAX_BISECTIONS: usize = 200;
const REL_TOL: f64 = 1e-13;

/// An Orlicz function `Φ`, given as a power law or as a monotone table.
#[derive(Debug, Clone, PartialEq)]
pub enum OrliczFunction {
    /// `Φ(t) = t^p`.
    Power(f64),
    /// Piecewise power-law interpolation through `(t_i, Φ_i)` with
    /// `t_i` and `Φ_i` strictly increasing. Outside the table the end
    /// segments are extended with their own log-slopes.
    Table { t: Vec<f64>, phi: Vec<f64> },
}

impl OrliczFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("power exponent {} must be positive", p)));
        }
        Ok(OrliczFunction::Power(p))
    }

    pub fn table(t: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || t.len() != phi.len() {
            return Err(Error::InvalidParameter("Orlicz table needs at least two matching rows".into()));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if t[0] <= 0.0 || phi[0] <= 0.0 || !increasing(&t) || !increasing(&phi) {
            return Err(Error::InvalidParameter(
                "Orlicz table must be positive and strictly increasing".into(),
            ));
        }
        Ok(OrliczFunction::Table { t, phi })
    }

    fn slopes(t: &[f64], phi: &[f64]) -> Vec<f64> {
        t.windows(2)
            .zip(phi.windows(2))
            .map(|(tw, pw)| (pw[1] / pw[0]).ln() / (tw[1] / tw[0]).ln())
            .collect()
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            OrliczFunction::Power(p) => s.powf(*p),
            OrliczFunction::Table { t, phi } => {
                let seg = match t.iter().position(|&ti| ti > s) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => t.len() - 2,
                }
                .min(t.len() - 2);
                let slope = (phi[seg + 1] / phi[seg]).ln() / (t[seg + 1] / t[seg]).ln();
                phi[seg] * (s / t[seg]).powf(slope)
            }
        }
    }

    /// `Φ^{-1}(y)`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match self {
            OrliczFunction::Power(p) => y.powf(1.0 / p),
            OrliczFunction::Table { .. } => {
                let (mut lo, mut hi) = (-700.0f64, 700.0f64);
                for _ in 0..MAX_BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(mid.exp()) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        }
    }

    /// Lower type exponent `p_Φ^-`.
    pub fn p_lower(&self) -> f64 {
        match self {
            OrliczFunction::Power(p) => *p,
            OrliczFunction::Table { t, phi } => {
                Self::slopes(t, phi).into_iter().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Upper type exponent `p_Φ^+`.
    pub fn p_upper(&self) -> f64 {
        match self {
            OrliczFunction::Power(p) => *p,
            OrliczFunction::Table { t, phi } => Self::slopes(t, phi).into_iter().fold(0.0, f64::max),
        }
    }

    /// Smallest `C` with `Φ(st) ≤ C s^{p_upper} Φ(t)` over the sampled `s ≥ 1`
    /// and `t`.
    pub fn upper_type_constant(&self, s_samples: &[f64], t_samples: &[f64]) -> f64 {
        let p = self.p_upper();
        let mut c: f64 = 0.0;
        for &s in s_samples.iter().filter(|s| **s >= 1.0) {
            for &t in t_samples.iter().filter(|t| **t > 0.0) {
                c = c.max(self.eval(s * t) / (s.powf(p) * self.eval(t)));
            }
        }
        c
    }

    pub fn descriptor(&self) -> String {
        match self {
            OrliczFunction::Power(p) => format!("pow({})", p),
            OrliczFunction::Table { t, .. } => format!("table({} rows)", t.len()),
        }
    }
}

/// Solve `modular(λ) = 1` for a non-increasing modular by bisection in
/// `log λ` over `[1e-12, 1e12]`.
///
/// Returns 0 when the modular vanishes identically.
pub(crate) fn luxemburg<F: Fn(f64) -> f64>(modular: F) -> Result<f64> {
    let m_hi = modular(BRACKET_HI);
    if !m_hi.is_finite() || m_hi > 1.0 {
        return Err(Error::BisectionFailure(format!(
            "modular at the upper bracket {:e} is {}",
            BRACKET_HI, m_hi
        )));
    }
    let m_lo = modular(BRACKET_LO);
    if m_lo == 0.0 {
        return Ok(0.0);
    }
    if m_lo <= 1.0 {
        return Ok(BRACKET_LO);
    }
    let mut lo = BRACKET_LO.ln();
    let mut hi = BRACKET_HI.ln();
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if modular(mid.exp()) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < REL_TOL {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
