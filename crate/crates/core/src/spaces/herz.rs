//! Herz weights, their Matuszewska-Orlicz indices and the local generalized
//! Herz norm.

use std::fmt;
use std::sync::Arc;

use crate::grid::GridFunction;

/// Annulus range used by the Herz norm.
pub const HERZ_K_MIN: i32 = -40;
pub const HERZ_K_MAX: i32 = 40;

/// The four Matuszewska-Orlicz indices `(m_0, M_0, m_∞, M_∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoIndices {
    pub m0: f64,
    pub big_m0: f64,
    pub m_inf: f64,
    pub big_m_inf: f64,
}

/// A positive weight `ω` on `(0, ∞)`.
#[derive(Clone)]
pub struct HerzWeight {
    omega: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
    indices: Option<MoIndices>,
}

impl fmt::Debug for HerzWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HerzWeight")
            .field("label", &self.label)
            .field("indices", &self.indices)
            .finish()
    }
}

impl HerzWeight {
    /// `ω(t) = t^α`, whose four indices all equal `α`.
    pub fn power(alpha: f64) -> Self {
        HerzWeight {
            omega: Arc::new(move |t: f64| t.powf(alpha)),
            label: format!("t^{}", alpha),
            indices: Some(MoIndices {
                m0: alpha,
                big_m0: alpha,
                m_inf: alpha,
                big_m_inf: alpha,
            }),
        }
    }

    /// An arbitrary weight; indices are estimated on demand.
    pub fn custom<F>(label: &str, omega: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        HerzWeight {
            omega: Arc::new(omega),
            label: label.to_string(),
            indices: None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.omega)(t)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Supplied indices, or the estimate on the default sample grid.
    pub fn indices(&self) -> MoIndices {
        self.indices
            .unwrap_or_else(|| mo_indices(self, &MoGrid::default()))
    }
}

/// Sample grid replacing the limits in the index definitions.
#[derive(Debug, Clone, PartialEq)]
pub struct MoGrid {
    /// Values of `t` in `(0, 1)`; the `∞` side uses their reciprocals.
    pub t: Vec<f64>,
    /// Values of `h` near `0`; the `∞` side uses their reciprocals.
    pub h: Vec<f64>,
}

fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

impl Default for MoGrid {
    /// `t ∈ [10^-2, 0.99]` and `h ∈ {10^-1, ..., 10^-4}`, so every argument
    /// stays inside `(10^-6, 10^6)`.
    fn default() -> Self {
        MoGrid {
            t: log_spaced(1e-2, 0.99, 60),
            h: log_spaced(1e-4, 1e-1, 13),
        }
    }
}

impl MoGrid {
    /// Deep window for slowly varying factors: `t` down to `10^-12` and
    /// `h ∈ [10^-12, 10^-8]`.
    pub fn refined() -> Self {
        MoGrid {
            t: log_spaced(1e-12, 0.999, 200),
            h: log_spaced(1e-12, 1e-8, 9),
        }
    }
}

/// Estimate the indices, replacing each upper or lower limit in `h` by the
/// extreme over the sampled window.
///
/// The index at infinity that the definition labels `I(ω)` is returned as
/// `m_inf`.
pub fn mo_indices(w: &HerzWeight, grid: &MoGrid) -> MoIndices {
    let ratio_extremes = |t: f64, hs: &mut dyn Iterator<Item = f64>| {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for h in hs {
            let r = w.eval(h * t) / w.eval(h);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    };
    let mut m0 = f64::NEG_INFINITY;
    let mut big_m0 = f64::INFINITY;
    let mut m_inf = f64::NEG_INFINITY;
    let mut big_m_inf = f64::INFINITY;
    for &t in &grid.t {
        let lt = t.ln();
        let (lo, hi) = ratio_extremes(t, &mut grid.h.iter().cloned());
        m0 = m0.max(hi.ln() / lt);
        big_m0 = big_m0.min(lo.ln() / lt);
        let ti = 1.0 / t;
        let lti = ti.ln();
        let (lo, hi) = ratio_extremes(ti, &mut grid.h.iter().map(|h| 1.0 / h));
        m_inf = m_inf.max(lo.ln() / lti);
        big_m_inf = big_m_inf.min(hi.ln() / lti);
    }
    MoIndices {
        m0,
        big_m0,
        m_inf,
        big_m_inf,
    }
}

/// Annulus index of a point at Euclidean distance `r`: the `k` with
/// `2^{k-1} ≤ r < 2^k`.
pub(crate) fn annulus_index(r: f64) -> Option<i32> {
    if r <= 0.0 {
        return None;
    }
    let k = r.log2().floor() as i32 + 1;
    if (HERZ_K_MIN..=HERZ_K_MAX).contains(&k) {
        Some(k)
    } else {
        None
    }
}

/// `{Σ_k ω(2^k)^q ‖f 1_{annulus k}‖_p^q}^{1/q}` with cells assigned by
/// their centers.
pub(crate) fn herz_norm(f: &GridFunction, w: &HerzWeight, p: f64, q: f64) -> f64 {
    let slots = (HERZ_K_MAX - HERZ_K_MIN + 1) as usize;
    let mut sums = vec![0.0f64; slots];
    let mut x = vec![0.0; f.dim()];
    for (idx, v) in f.values().iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        f.center_into(idx, &mut x);
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if let Some(k) = annulus_index(r) {
            sums[(k - HERZ_K_MIN) as usize] += v.abs().powf(p);
        }
    }
    let cell = f.cell_volume();
    let mut total = 0.0;
    for (i, s) in sums.iter().enumerate() {
        if *s == 0.0 {
            continue;
        }
        let k = HERZ_K_MIN + i as i32;
        let lp = (s * cell).powf(1.0 / p);
        total += (w.eval(2f64.powi(k)) * lp).powf(q);
    }
    total.powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_weight_indices_are_exact() {
        for alpha in [0.3, 1.0, -0.5] {
            let w = HerzWeight::custom("pow", move |t: f64| t.powf(alpha));
            let ix = mo_indices(&w, &MoGrid::default());
            for v in [ix.m0, ix.big_m0, ix.m_inf, ix.big_m_inf] {
                assert!((v - alpha).abs() < 1e-6, "{} vs {}", v, alpha);
            }
        }
    }

    #[test]
    fn constant_weight_has_zero_indices() {
        let ix = mo_indices(&HerzWeight::custom("one", |_| 1.0), &MoGrid::default());
        assert_eq!((ix.m0, ix.big_m0, ix.m_inf, ix.big_m_inf), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn log_factor_vanishes_on_refined_grid() {
        let alpha = 0.4;
        let w = HerzWeight::custom("powlog", move |t: f64| t.powf(alpha) * (1.0 + t.ln().abs()));
        let ix = mo_indices(&w, &MoGrid::refined());
        assert!((ix.m0 - alpha).abs() < 5e-2);
        assert!((ix.big_m0 - alpha).abs() < 5e-2);
    }

    #[test]
    fn annuli() {
        assert_eq!(annulus_index(1.0), Some(1));
        assert_eq!(annulus_index(0.75), Some(0));
        assert_eq!(annulus_index(0.5), Some(0));
        assert_eq!(annulus_index(0.0), None);
    }
}
