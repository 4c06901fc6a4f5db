//! Grid maximal operators: Hardy-Littlewood, powered, non-tangential and
//! grand, plus an empirical Fefferman-Stein probe.

use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use rayon::prelude::*;

use crate::atoms::default_d;
use crate::dilation::{ExpansiveDilation, StepQuasiNorm};
use crate::error::{Error, Result};
use crate::grid::{multi_indices, GridFunction};
use crate::spaces::scan::{for_each_cell_in_ball, lattice_count_in_ball};
use crate::spaces::{BallSpace, ExponentBundle};

/// Default scale range of a scan.
pub const SCAN_K_MIN: i32 = -6;
pub const SCAN_K_MAX: i32 = 6;
/// Default center stride, in cells.
pub const SCAN_STRIDE: usize = 8;
/// Default scale range of the non-tangential operator.
pub const NT_K_RANGE: RangeInclusive<i32> = -6..=2;

/// Candidate balls `center + B_k` for the maximal supremum.
#[derive(Debug, Clone)]
pub struct BallScan {
    pub dilation: Arc<ExpansiveDilation>,
    pub centers: Vec<Vec<f64>>,
    pub k_min: i32,
    pub k_max: i32,
}

impl BallScan {
    /// Centers at every `stride`-th cell of `f`'s grid, scales `k_range`.
    pub fn for_grid(
        f: &GridFunction,
        dilation: Arc<ExpansiveDilation>,
        stride: usize,
        k_range: RangeInclusive<i32>,
    ) -> Result<Self> {
        if dilation.n != f.dim() {
            return Err(Error::Dimension("dilation and grid dimensions differ".into()));
        }
        let stride = stride.max(1);
        let n = f.dim();
        let counts: Vec<usize> = f.shape().iter().map(|s| s.div_ceil(stride)).collect();
        let total: usize = counts.iter().product();
        let mut centers = Vec::with_capacity(total);
        for mut flat in 0..total {
            let mut multi = vec![0usize; n];
            for a in (0..n).rev() {
                multi[a] = ((flat % counts[a]) * stride + stride / 2).min(f.shape()[a] - 1);
                flat /= counts[a];
            }
            centers.push(f.center(f.ravel(&multi)));
        }
        Ok(BallScan {
            dilation,
            centers,
            k_min: *k_range.start(),
            k_max: *k_range.end(),
        })
    }

    /// Default density: stride 8 and `k ∈ [-6, 6]`.
    pub fn default_for(f: &GridFunction, dilation: Arc<ExpansiveDilation>) -> Result<Self> {
        Self::for_grid(f, dilation, SCAN_STRIDE, SCAN_K_MIN..=SCAN_K_MAX)
    }

    /// Add candidate centers; the candidate set only grows, so maximal
    /// values never decrease.
    pub fn with_centers(mut self, extra: impl IntoIterator<Item = Vec<f64>>) -> Self {
        self.centers.extend(extra);
        self
    }

    /// Every candidate `(center, k)` in scan order.
    pub fn balls(&self) -> impl Iterator<Item = (&[f64], i32)> + '_ {
        self.centers
            .iter()
            .flat_map(move |c| (self.k_min..=self.k_max).map(move |k| (c.as_slice(), k)))
    }
}

/// Average of `|f|` over the cell centers in `center + B_k`, with `f`
/// taken as zero at lattice points outside its grid.
///
/// The divisor counts lattice points rather than using `|B| = b^k`, so the
/// average of a constant over a ball inside the grid is that constant.
pub fn ball_average(f: &GridFunction, d: &ExpansiveDilation, center: &[f64], k: i32) -> f64 {
    average_with_count(f, d, center, k, lattice_count_in_ball(f, d, center, k))
}

fn average_with_count(f: &GridFunction, d: &ExpansiveDilation, center: &[f64], k: i32, count: usize) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let mut s = 0.0;
    for_each_cell_in_ball(f, d, center, k, |i| s += f.values()[i].abs());
    s / count as f64
}

/// Whether `center` sits on the cell-center lattice of `f`.
fn on_lattice(f: &GridFunction, center: &[f64]) -> bool {
    (0..f.dim()).all(|a| {
        let t = (center[a] - f.lower()[a]) / f.h()[a] - 0.5;
        (t - t.round()).abs() < 1e-9
    })
}

/// Hardy-Littlewood maximal function on `f`'s grid.
pub fn hl_maximal(f: &GridFunction, scan: &BallScan) -> Result<GridFunction> {
    let d = &scan.dilation;
    if d.n != f.dim() {
        return Err(Error::Dimension("dilation and grid dimensions differ".into()));
    }
    let balls: Vec<(&[f64], i32)> = scan.balls().collect();
    // Lattice-centered balls of one scale all hold the same number of points.
    let origin = f.center(0);
    let counts: Vec<usize> = (scan.k_min..=scan.k_max)
        .map(|k| lattice_count_in_ball(f, d, &origin, k))
        .collect();
    let averages: Vec<f64> = balls
        .par_iter()
        .map(|(c, k)| {
            let count = if on_lattice(f, c) {
                counts[(k - scan.k_min) as usize]
            } else {
                lattice_count_in_ball(f, d, c, *k)
            };
            average_with_count(f, d, c, *k, count)
        })
        .collect();
    let mut out = vec![0.0; f.len()];
    for ((c, k), avg) in balls.iter().zip(&averages) {
        if *avg == 0.0 {
            continue;
        }
        for_each_cell_in_ball(f, d, c, *k, |i| {
            if *avg > out[i] {
                out[i] = *avg;
            }
        });
    }
    f.with_values(out)
}

/// `{M(|f|^α)}^{1/α}`.
pub fn powered_maximal(f: &GridFunction, scan: &BallScan, alpha: f64) -> Result<GridFunction> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("power {} must be positive", alpha)));
    }
    let m = hl_maximal(&f.map(|v| v.abs().powf(alpha)), scan)?;
    Ok(m.map(|v| v.powf(1.0 / alpha)))
}

/// A test function given in closed form.
#[derive(Clone)]
pub struct TestFunction {
    phi: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub label: String,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction").field("label", &self.label).finish()
    }
}

impl TestFunction {
    pub fn new<F>(label: &str, phi: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        TestFunction {
            phi: Arc::new(phi),
            label: label.to_string(),
        }
    }

    /// `exp(-|x|² / w²)`.
    pub fn gaussian(width: f64) -> Self {
        Self::new(&format!("gauss({})", width), move |x: &[f64]| {
            (-x.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp()
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.phi)(x)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let inner = self.phi.clone();
        TestFunction {
            phi: Arc::new(move |x: &[f64]| s * inner(x)),
            label: self.label.clone(),
        }
    }

    /// `φ_k(x) = b^{-k} φ(A^{-k} x)`.
    pub fn dilated(&self, d: &ExpansiveDilation, k: i32, x: &[f64]) -> f64 {
        d.b.powi(-k) * self.eval(&d.apply_power(-k, x))
    }
}

/// Finite-difference estimate of
/// `sup_x max_{|α| ≤ N} max{1, ρ(x)^N} |∂^α φ(x)|` over a lattice of
/// `points` per axis on `[-radius, radius]^n`.
pub fn schwartz_seminorm(
    phi: &TestFunction,
    rho: &StepQuasiNorm,
    order: usize,
    radius: f64,
    points: usize,
) -> Result<f64> {
    let n = rho.dilation.n;
    let step = 1e-2 * radius / 8.0;
    let alphas = multi_indices(n, order);
    let total = points.pow(n as u32);
    let mut best: f64 = 0.0;
    let mut x = vec![0.0; n];
    for mut flat in 0..total {
        for a in (0..n).rev() {
            let j = flat % points;
            flat /= points;
            x[a] = -radius + 2.0 * radius * j as f64 / (points - 1) as f64;
        }
        let r = rho.rho(&x)?.value;
        let weight = r.powi(order as i32).max(1.0);
        for alpha in &alphas {
            let v = finite_difference(phi, &x, alpha, step).abs();
            best = best.max(weight * v);
        }
    }
    Ok(best)
}

/// Nested central differences of order `alpha`.
fn finite_difference(phi: &TestFunction, x: &[f64], alpha: &[usize], h: f64) -> f64 {
    let n = x.len();
    let mut stencil: Vec<(Vec<f64>, f64)> = vec![(x.to_vec(), 1.0)];
    for a in 0..n {
        let k = alpha[a];
        if k == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(stencil.len() * (k + 1));
        for (p, w) in &stencil {
            for j in 0..=k {
                let coeff = binomial(k, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
                let mut q = p.clone();
                q[a] += (k as f64 / 2.0 - j as f64) * h;
                next.push((q, w * coeff / h.powi(k as i32)));
            }
        }
        stencil = next;
    }
    stencil.iter().map(|(p, w)| w * phi.eval(p)).sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Test functions normalized to the `𝒮_N` budget.
#[derive(Debug, Clone)]
pub struct TestDictionary {
    pub members: Vec<TestFunction>,
    pub order: usize,
}

/// `N = ⌊(1/θ0 - 1) ln b / ln λ_-⌋ + 2`.
pub fn seminorm_order(e: &ExponentBundle, d: &ExpansiveDilation) -> usize {
    default_d(e, d) + 2
}

impl TestDictionary {
    /// Gaussians of widths `1/2`, `1` and `2`, each divided by its estimated
    /// seminorm of order `order`.
    pub fn gaussians(d: Arc<ExpansiveDilation>, order: usize) -> Result<Self> {
        let rho = StepQuasiNorm::new(d)?;
        let mut members = Vec::new();
        for w in [0.5, 1.0, 2.0] {
            let g = TestFunction::gaussian(w);
            let s = schwartz_seminorm(&g, &rho, order, 8.0 * w, seminorm_points(rho.dilation.n))?;
            members.push(g.scaled(1.0 / s));
        }
        Ok(TestDictionary { members, order })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn seminorm_points(n: usize) -> usize {
    match n {
        1 => 801,
        2 => 81,
        _ => 17,
    }
}

/// `sup_{k, y ∈ x + B_k} |f ∗ φ_k(y)|` with convolutions by direct
/// summation over `f`'s cells and `y` restricted to cell centers.
pub fn nontangential_maximal(
    f: &GridFunction,
    phi: &TestFunction,
    d: &ExpansiveDilation,
    k_range: RangeInclusive<i32>,
) -> Result<GridFunction> {
    if d.n != f.dim() {
        return Err(Error::Dimension("dilation and grid dimensions differ".into()));
    }
    let n = f.dim();
    let cell = f.cell_volume();
    let support: Vec<(Vec<f64>, f64)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (f.center(i), *v))
        .collect();
    let mut out = vec![0.0f64; f.len()];
    for k in k_range {
        let conv: Vec<f64> = (0..f.len())
            .into_par_iter()
            .map(|i| {
                let y = f.center(i);
                let mut diff = vec![0.0; n];
                let mut s = 0.0;
                for (x, v) in &support {
                    for a in 0..n {
                        diff[a] = y[a] - x[a];
                    }
                    s += v * phi.dilated(d, k, &diff);
                }
                (s * cell).abs()
            })
            .collect();
        let best: Vec<f64> = (0..f.len())
            .into_par_iter()
            .map(|i| {
                let x = f.center(i);
                let mut m: f64 = 0.0;
                for_each_cell_in_ball(f, d, &x, k, |j| m = m.max(conv[j]));
                m
            })
            .collect();
        for (o, b) in out.iter_mut().zip(best) {
            *o = o.max(b);
        }
    }
    f.with_values(out)
}

/// Pointwise maximum of [`nontangential_maximal`] over the dictionary.
pub fn grand_maximal(
    f: &GridFunction,
    dict: &TestDictionary,
    d: &ExpansiveDilation,
    k_range: RangeInclusive<i32>,
) -> Result<GridFunction> {
    if dict.is_empty() {
        return Err(Error::InvalidParameter("empty test dictionary".into()));
    }
    let mut out = vec![0.0f64; f.len()];
    for phi in &dict.members {
        let m = nontangential_maximal(f, phi, d, k_range.clone())?;
        for (o, v) in out.iter_mut().zip(m.values()) {
            *o = o.max(*v);
        }
    }
    f.with_values(out)
}

/// `‖(Σ (M f_k)^u)^{1/u}‖_{X^{1/p}} / ‖(Σ |f_k|^u)^{1/u}‖_{X^{1/p}}`, or
/// `None` when the denominator vanishes.
pub fn fs_probe(
    space: &BallSpace,
    p: f64,
    u: f64,
    family: &[GridFunction],
    scan: &BallScan,
) -> Result<Option<f64>> {
    let e = space.exponents()?;
    if !(p > 0.0 && p < e.p_minus) {
        return Err(Error::InvalidParameter(format!(
            "probe exponent {} must lie in (0, p_- = {})",
            p, e.p_minus
        )));
    }
    if !(u > 1.0) {
        return Err(Error::InvalidParameter(format!("u = {} must exceed 1", u)));
    }
    let Some(first) = family.first() else {
        return Ok(None);
    };
    if family.iter().any(|g| !g.same_grid(first)) {
        return Err(Error::Dimension("family members must share one grid".into()));
    }
    let mut lhs = vec![0.0; first.len()];
    let mut rhs = vec![0.0; first.len()];
    for g in family {
        let m = hl_maximal(g, scan)?;
        for (acc, v) in lhs.iter_mut().zip(m.values()) {
            *acc += v.powf(u);
        }
        for (acc, v) in rhs.iter_mut().zip(g.values()) {
            *acc += v.abs().powf(u);
        }
    }
    let convex = space.convexify(1.0 / p)?;
    let den = convex.norm(&first.with_values(rhs.into_iter().map(|s| s.powf(1.0 / u)).collect())?)?;
    if den == 0.0 {
        return Ok(None);
    }
    let num = convex.norm(&first.with_values(lhs.into_iter().map(|s| s.powf(1.0 / u)).collect())?)?;
    Ok(Some(num / den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1() -> Arc<ExpansiveDilation> {
        Arc::new(ExpansiveDilation::from_text("2").unwrap())
    }

    fn unit_indicator() -> GridFunction {
        GridFunction::from_fn(vec![-4.0], vec![4.0], vec![1024], |x| {
            if x[0].abs() < 0.5 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn brute_force_value_at_two() {
        let f = unit_indicator();
        let scan = BallScan::default_for(&f, d1()).unwrap();
        let m = hl_maximal(&f, &scan).unwrap();
        assert!((m.interpolate(&[2.0]) - 0.25).abs() < 0.25 * 0.02);
        let pm = powered_maximal(&f, &scan, 0.5).unwrap();
        assert!((pm.interpolate(&[2.0]) - 0.0625).abs() < 0.0625 * 0.04);
    }

    #[test]
    fn constant_is_fixed_inside() {
        let f = GridFunction::from_fn(vec![-1.0], vec![1.0], vec![256], |_| 1.0).unwrap();
        let scan = BallScan::default_for(&f, d1()).unwrap();
        let m = hl_maximal(&f, &scan).unwrap();
        assert!((m.interpolate(&[0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dictionary_members_are_normalized() {
        let d = d1();
        let dict = TestDictionary::gaussians(d.clone(), 3).unwrap();
        let rho = StepQuasiNorm::new(d).unwrap();
        for (phi, w) in dict.members.iter().zip([0.5, 1.0, 2.0]) {
            let s = schwartz_seminorm(phi, &rho, 3, 8.0 * w, 801).unwrap();
            assert!(s <= 1.0 + 5e-2, "{}", s);
        }
    }

    #[test]
    fn nontangential_basics() {
        let d = d1();
        let phi = TestFunction::gaussian(1.0);
        let f = GridFunction::from_fn(vec![-4.0], vec![4.0], vec![128], |x| phi.eval(x)).unwrap();
        let m = nontangential_maximal(&f, &phi, &d, -2..=1).unwrap();
        let auto: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * f.cell_volume();
        assert!(m.interpolate(&[0.0]) >= auto * (1.0 - 1e-3));
        let zero = f.map(|_| 0.0);
        let mz = nontangential_maximal(&zero, &phi, &d, -2..=1).unwrap();
        assert_eq!(mz.sup_norm(), 0.0);
        let dict = TestDictionary {
            members: vec![phi.clone()],
            order: 2,
        };
        let g = grand_maximal(&f, &dict, &d, -2..=1).unwrap();
        assert_eq!(g.values(), m.values());
    }

    #[test]
    fn fs_probe_constant_function() {
        let f = GridFunction::from_fn(vec![-1.0], vec![1.0], vec![256], |_| 1.0).unwrap();
        let scan = BallScan::default_for(&f, d1()).unwrap();
        let space = BallSpace::lebesgue(0.75).unwrap();
        let c = fs_probe(&space, 0.5, 2.0, &[f.clone()], &scan).unwrap().unwrap();
        assert!((c - 1.0).abs() <= 0.1, "{}", c);
        let zero = f.map(|_| 0.0);
        assert_eq!(fs_probe(&space, 0.5, 2.0, &[zero], &scan).unwrap(), None);
    }
}
