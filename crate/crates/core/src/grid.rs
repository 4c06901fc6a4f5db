//! Uniform tensor grids with midpoint-rule quadrature.
//!
//! A [`GridFunction`] stores real samples at the cell centers
//! `lower + (j + 1/2) h` of an axis-aligned box, row-major with axis 0
//! varying slowest.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dilation::ExpansiveDilation;
use crate::error::{Error, Result};
use crate::linalg::mat_vec;

/// Default per-axis resolution in one dimension.
pub const DEFAULT_RES_1D: usize = 1 << 12;
/// Default per-axis resolution in two dimensions.
pub const DEFAULT_RES_2D: usize = 1 << 8;
/// Largest derivative order accepted by [`GridFunction::fourier_derivative_at`].
pub const D_MAX: usize = 6;
/// Phase factors are recomputed exactly every this many cells.
const PHASE_ANCHOR: usize = 32;

/// Default per-axis resolution for dimension `n`.
pub fn default_resolution(n: usize) -> usize {
    match n {
        1 => DEFAULT_RES_1D,
        2 => DEFAULT_RES_2D,
        _ => 32,
    }
}

/// All multi-indices of length `n` with total degree at most `max_degree`,
/// ordered by degree.
pub fn multi_indices(n: usize, max_degree: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in (0..=left).rev() {
            cur.push(v);
            rec(n, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        rec(n, deg, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lower: Vec<f64>,
    upper: Vec<f64>,
    shape: Vec<usize>,
    h: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let n = lower.len();
        if n == 0 || upper.len() != n || shape.len() != n {
            return Err(Error::Dimension("box corners and shape disagree".into()));
        }
        if shape.iter().any(|&s| s < 2) {
            return Err(Error::InvalidParameter("every axis needs at least 2 samples".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(u > l)) {
            return Err(Error::InvalidParameter("box has empty extent".into()));
        }
        let total: usize = shape.iter().product();
        if values.len() != total {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                total,
                values.len()
            )));
        }
        let h = (0..n).map(|i| (upper[i] - lower[i]) / shape[i] as f64).collect();
        Ok(GridFunction { lower, upper, shape, h, values })
    }

    pub fn zeros(lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        let total = shape.iter().product();
        Self::new(lower, upper, shape, vec![0.0; total])
    }

    /// Sample `f` at every cell center.
    pub fn from_fn<F>(lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut g = Self::zeros(lower, upper, shape)?;
        let mut x = vec![0.0; g.dim()];
        for idx in 0..g.values.len() {
            g.center_into(idx, &mut x);
            g.values[idx] = f(&x);
        }
        Ok(g)
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.lower.clone(), self.upper.clone(), self.shape.clone(), values)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    pub fn box_volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.lower == other.lower && self.upper == other.upper && self.shape == other.shape
    }

    /// Cell-center coordinates along one axis.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis])
            .map(|j| self.lower[axis] + (j as f64 + 0.5) * self.h[axis])
            .collect()
    }

    /// Multi-index of the flat index `idx`.
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            out[axis] = idx % self.shape[axis];
            idx /= self.shape[axis];
        }
        out
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn center_into(&self, mut idx: usize, x: &mut [f64]) {
        for axis in (0..self.dim()).rev() {
            let j = idx % self.shape[axis];
            idx /= self.shape[axis];
            x[axis] = self.lower[axis] + (j as f64 + 0.5) * self.h[axis];
        }
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.center_into(idx, &mut x);
        x
    }

    /// Apply `f` to every value.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> GridFunction {
        let mut g = self.clone();
        g.values.iter_mut().for_each(|v| *v = f(*v));
        g
    }

    /// Multiply every value by `s`.
    pub fn scaled(&self, s: f64) -> GridFunction {
        self.map(|v| v * s)
    }

    /// Midpoint-rule integral `Σ values · Π h`.
    pub fn quadrature(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Midpoint integral of `f(x) (x - origin)^γ`.
    pub fn moment(&self, gamma: &[usize], origin: &[f64]) -> f64 {
        let n = self.dim();
        let axes: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                self.axis_coords(a)
                    .into_iter()
                    .map(|x| (x - origin[a]).powi(gamma[a] as i32))
                    .collect()
            })
            .collect();
        let mut sum = 0.0;
        let mut multi = vec![0usize; n];
        for &v in &self.values {
            let mut w = v;
            for a in 0..n {
                w *= axes[a][multi[a]];
            }
            sum += w;
            increment(&mut multi, &self.shape);
        }
        sum * self.cell_volume()
    }

    /// `(∫|f|^q)^{1/q}`, or `max |f|` for `q = ∞`.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.sup_norm();
        }
        let s: f64 = self.values.iter().map(|v| v.abs().powf(q)).sum();
        (s * self.cell_volume()).powf(1.0 / q)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Measure of `{f ≠ 0}` on the grid.
    pub fn support_measure(&self) -> f64 {
        self.values.iter().filter(|v| **v != 0.0).count() as f64 * self.cell_volume()
    }

    /// Non-increasing rearrangement of `|f|`.
    pub fn rearrange(&self) -> Rearrangement {
        let mut v: Vec<f64> = self
            .values
            .iter()
            .map(|x| x.abs())
            .filter(|x| *x > 0.0)
            .collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Rearrangement {
            values: v,
            cell: self.cell_volume(),
        }
    }

    /// Multilinear interpolation of the cell-center samples.
    ///
    /// Points outside the box evaluate to zero; points inside the box but
    /// beyond the outermost centers use the nearest edge values.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut base = [0usize; 8];
        let mut frac = [0.0f64; 8];
        let mut single = [false; 8];
        assert!(n <= 8, "interpolation supports up to 8 axes");
        for a in 0..n {
            if x[a] < self.lower[a] || x[a] > self.upper[a] {
                return 0.0;
            }
            let t = (x[a] - self.lower[a]) / self.h[a] - 0.5;
            let last = self.shape[a] - 1;
            if t <= 0.0 {
                base[a] = 0;
                frac[a] = 0.0;
                single[a] = true;
            } else if t >= last as f64 {
                base[a] = last;
                frac[a] = 0.0;
                single[a] = true;
            } else {
                let i = t.floor() as usize;
                base[a] = i.min(last - 1);
                frac[a] = t - base[a] as f64;
            }
        }
        let mut total = 0.0;
        let mut multi = vec![0usize; n];
        for corner in 0..(1usize << n) {
            let mut weight = 1.0;
            let mut skip = false;
            for a in 0..n {
                let bit = (corner >> a) & 1;
                if single[a] && bit == 1 {
                    skip = true;
                    break;
                }
                multi[a] = base[a] + bit;
                weight *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if skip || weight == 0.0 {
                continue;
            }
            total += weight * self.values[self.ravel(&multi)];
        }
        total
    }

    /// Resample onto a new grid by interpolation.
    pub fn resample(&self, lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>) -> Result<GridFunction> {
        GridFunction::from_fn(lower, upper, shape, |x| self.interpolate(x))
    }

    /// `g(x) = f(A^k x)` on the box `A^{-k}(box)` with the same shape.
    pub fn dilate(&self, d: &ExpansiveDilation, k: i32) -> Result<GridFunction> {
        if k == 0 {
            return Ok(self.clone());
        }
        let n = self.dim();
        if d.n != n {
            return Err(Error::Dimension("dilation and grid dimensions differ".into()));
        }
        let inv = d.power(-k);
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for corner in 0..(1usize << n) {
            let p: Vec<f64> = (0..n)
                .map(|a| if (corner >> a) & 1 == 1 { self.upper[a] } else { self.lower[a] })
                .collect();
            let y = mat_vec(&inv, n, &p);
            for a in 0..n {
                lo[a] = lo[a].min(y[a]);
                hi[a] = hi[a].max(y[a]);
            }
        }
        self.dilate_onto(d, k, lo, hi, self.shape.clone())
    }

    /// `g(x) = f(A^k x)` sampled on a caller-supplied grid.
    pub fn dilate_onto(
        &self,
        d: &ExpansiveDilation,
        k: i32,
        lower: Vec<f64>,
        upper: Vec<f64>,
        shape: Vec<usize>,
    ) -> Result<GridFunction> {
        let n = self.dim();
        let fwd = d.power(k);
        GridFunction::from_fn(lower, upper, shape, |x| self.interpolate(&mat_vec(&fwd, n, x)))
    }

    /// Midpoint-rule Fourier transform `Π h Σ f(x_j) e^{-2πi x_j·ξ}`.
    pub fn fourier_at(&self, xi: &[f64]) -> Complex64 {
        self.weighted_fourier(xi, None)
    }

    /// Transform of `(-2πi x)^α f`.
    pub fn fourier_derivative_at(&self, xi: &[f64], alpha: &[usize]) -> Complex64 {
        let order: usize = alpha.iter().sum();
        if order == 0 {
            return self.fourier_at(xi);
        }
        let raw = self.weighted_fourier(xi, Some(alpha));
        raw * Complex64::new(0.0, -2.0 * PI).powu(order as u32)
    }

    /// Batch transform over a list of frequencies, in input order.
    pub fn fourier_on_grid(&self, xis: &[Vec<f64>]) -> Vec<Complex64> {
        xis.par_iter().map(|xi| self.fourier_at(xi)).collect()
    }

    fn weighted_fourier(&self, xi: &[f64], alpha: Option<&[usize]>) -> Complex64 {
        let n = self.dim();
        // Per-axis phase factors, with the monomial weights folded in.
        let phases: Vec<Vec<Complex64>> = (0..n)
            .map(|a| {
                let pow = alpha.map_or(0, |al| al[a]) as i32;
                let coords = self.axis_coords(a);
                let exact = |x: f64| {
                    let (s, c) = (-2.0 * PI * x * xi[a]).sin_cos();
                    Complex64::new(c, s)
                };
                let step = exact(self.h[a]);
                let mut out = Vec::with_capacity(coords.len());
                let mut cur = Complex64::new(1.0, 0.0);
                for (j, x) in coords.iter().enumerate() {
                    // Rotate by the step, re-anchoring periodically to bound drift.
                    cur = if j % PHASE_ANCHOR == 0 { exact(*x) } else { cur * step };
                    out.push(if pow == 0 { cur } else { cur * x.powi(pow) });
                }
                out
            })
            .collect();
        let vol = self.cell_volume();
        if n == 1 {
            let mut re = 0.0;
            let mut im = 0.0;
            for (v, p) in self.values.iter().zip(&phases[0]) {
                re += v * p.re;
                im += v * p.im;
            }
            return Complex64::new(re, im) * vol;
        }
        // Contract the last axis first, then fold outward.
        let inner = *self.shape.last().unwrap();
        let last = &phases[n - 1];
        let mut partial: Vec<Complex64> = self
            .values
            .chunks(inner)
            .map(|row| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (v, p) in row.iter().zip(last) {
                    re += v * p.re;
                    im += v * p.im;
                }
                Complex64::new(re, im)
            })
            .collect();
        for a in (0..n - 1).rev() {
            let len = self.shape[a];
            partial = partial
                .chunks(len)
                .map(|chunk| chunk.iter().zip(&phases[a]).map(|(v, p)| v * p).sum())
                .collect();
        }
        partial[0] * vol
    }

    /// CSV dump: a `# box=...; shape=...` header then one value per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let boxes: Vec<String> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| format!("[{},{}]", l, u))
            .collect();
        let shape: Vec<String> = self.shape.iter().map(|s| s.to_string()).collect();
        writeln!(w, "# box={}; shape={}", boxes.join("x"), shape.join("x"))?;
        for v in &self.values {
            writeln!(w, "{}", v)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<GridFunction> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid CSV".into()))??;
        let (lower, upper, shape) = parse_header(&header)?;
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad value '{}'", i + 2, t)))?,
            );
        }
        GridFunction::new(lower, upper, shape, values)
    }

    /// Little-endian binary dump: magic, n, corners, shape, values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * (3 * self.dim() + self.len()));
        out.extend_from_slice(b"AHGF");
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        for v in self.lower.iter().chain(&self.upper) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for s in &self.shape {
            out.extend_from_slice(&(*s as u64).to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<GridFunction> {
        let bad = || Error::Parse("truncated or malformed grid binary".into());
        if bytes.len() < 8 || &bytes[..4] != b"AHGF" {
            return Err(bad());
        }
        let n = u32::from_le_bytes(bytes[4..8].try_into().map_err(|_| bad())?) as usize;
        let mut pos = 8;
        let mut take8 = |bytes: &[u8]| -> Result<[u8; 8]> {
            let s = bytes.get(pos..pos + 8).ok_or_else(bad)?;
            pos += 8;
            s.try_into().map_err(|_| bad())
        };
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for _ in 0..n {
            lower.push(f64::from_le_bytes(take8(bytes)?));
        }
        for _ in 0..n {
            upper.push(f64::from_le_bytes(take8(bytes)?));
        }
        let mut shape = Vec::with_capacity(n);
        for _ in 0..n {
            shape.push(u64::from_le_bytes(take8(bytes)?) as usize);
        }
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        for _ in 0..total {
            values.push(f64::from_le_bytes(take8(bytes)?));
        }
        GridFunction::new(lower, upper, shape, values)
    }
}

fn parse_header(line: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>)> {
    let bad = || Error::Parse(format!("line 1: malformed grid header '{}'", line));
    let body = line.trim().strip_prefix('#').ok_or_else(bad)?.trim();
    let mut box_part = None;
    let mut shape_part = None;
    for field in body.split(';') {
        let field = field.trim();
        if let Some(v) = field.strip_prefix("box=") {
            box_part = Some(v);
        } else if let Some(v) = field.strip_prefix("shape=") {
            shape_part = Some(v);
        }
    }
    let (box_part, shape_part) = (box_part.ok_or_else(bad)?, shape_part.ok_or_else(bad)?);
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for interval in box_part.split("]x[") {
        let inner = interval.trim_matches(|c| c == '[' || c == ']');
        let mut it = inner.split(',');
        let l = it.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
        let u = it.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
        lower.push(l);
        upper.push(u);
    }
    let shape = shape_part
        .split('x')
        .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    Ok((lower, upper, shape))
}

fn increment(multi: &mut [usize], shape: &[usize]) {
    for a in (0..multi.len()).rev() {
        multi[a] += 1;
        if multi[a] < shape[a] {
            return;
        }
        multi[a] = 0;
    }
}

/// Non-increasing rearrangement as a step function.
///
/// `values[i]` is the value of `f*` on `(i·cell, (i+1)·cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    pub values: Vec<f64>,
    pub cell: f64,
}

impl Rearrangement {
    /// `(value, cumulative measure)` pairs merged over equal values.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            let t = (i + 1) as f64 * self.cell;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = t,
                _ => out.push((v, t)),
            }
        }
        out
    }

    pub fn total_measure(&self) -> f64 {
        self.values.len() as f64 * self.cell
    }

    /// `f*(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.values.first().cloned().unwrap_or(0.0);
        }
        let i = (t / self.cell).floor() as usize;
        self.values.get(i).cloned().unwrap_or(0.0)
    }

    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.values.first().cloned().unwrap_or(0.0);
        }
        (self.values.iter().map(|v| v.powf(q)).sum::<f64>() * self.cell).powf(1.0 / q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(vec![lo], vec![hi], vec![n], |x| f(x[0])).unwrap()
    }

    #[test]
    fn quadrature_examples() {
        let one = GridFunction::from_fn(vec![0.0, 0.0], vec![1.0, 1.0], vec![7, 9], |_| 1.0).unwrap();
        assert!((one.quadrature() - 1.0).abs() < 1e-14);
        assert!((line(0.0, 1.0, 13, |x| x).quadrature() - 0.5).abs() < 1e-15);
        assert_eq!(line(-0.5, 0.5, 64, f64::signum).quadrature(), 0.0);
    }

    #[test]
    fn norm_examples() {
        let half = line(0.0, 1.0, 100, |x| if x < 0.5 { 1.0 } else { 0.0 });
        assert!((half.lq_norm(2.0) - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((line(-0.5, 0.5, 64, f64::signum).lq_norm(1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rearrangement_examples() {
        let f = line(0.0, 3.0, 300, |x| if x < 1.0 { 2.0 } else { 1.0 });
        let steps = f.rearrange().steps();
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].0, 2.0);
        assert!((steps[0].1 - 1.0).abs() < 1e-12);
        assert!((steps[1].1 - 3.0).abs() < 1e-12);
        assert!(line(0.0, 1.0, 10, |_| 0.0).rearrange().values.is_empty());
    }

    #[test]
    fn fourier_closed_forms() {
        let ind = line(-0.5, 0.5, DEFAULT_RES_1D, |_| 1.0);
        let sgn = line(-0.5, 0.5, DEFAULT_RES_1D, f64::signum);
        for i in 0..=80 {
            let xi = -4.0 + 0.1 * i as f64;
            let (sinc, sgn_hat) = if xi == 0.0 {
                (1.0, Complex64::new(0.0, 0.0))
            } else {
                let px = PI * xi;
                (px.sin() / px, Complex64::new(0.0, -(1.0 - px.cos()) / px))
            };
            assert!((ind.fourier_at(&[xi]) - sinc).norm() < 1e-6);
            assert!((sgn.fourier_at(&[xi]) - sgn_hat).norm() < 1e-6);
        }
        let d = sgn.fourier_derivative_at(&[0.0], &[1]);
        assert!((d - Complex64::new(0.0, -PI / 2.0)).norm() < 1e-6);
        assert!(ind.fourier_derivative_at(&[0.0], &[1]).norm() < 1e-12);
    }

    #[test]
    fn fourier_two_dimensional_separable() {
        let g = GridFunction::from_fn(vec![-0.5, -0.5], vec![0.5, 0.5], vec![64, 32], |x| {
            x[0].signum() * (1.0 + x[1])
        })
        .unwrap();
        let xi = [0.7, -1.3];
        let direct: Complex64 = (0..g.len())
            .map(|i| {
                let x = g.center(i);
                let ph = -2.0 * PI * (x[0] * xi[0] + x[1] * xi[1]);
                Complex64::new(ph.cos(), ph.sin()) * g.values()[i]
            })
            .sum::<Complex64>()
            * g.cell_volume();
        assert!((g.fourier_at(&xi) - direct).norm() < 1e-12);
        let batch = g.fourier_on_grid(&[xi.to_vec(), vec![0.0, 0.0]]);
        assert_eq!(batch[0], g.fourier_at(&xi));
    }

    #[test]
    fn dilate_indicator() {
        let d = ExpansiveDilation::from_text("2").unwrap();
        let f = line(-0.5, 0.5, 64, |_| 1.0);
        let g = f.dilate(&d, 1).unwrap();
        assert!((g.lower()[0] + 0.25).abs() < 1e-15 && (g.upper()[0] - 0.25).abs() < 1e-15);
        assert!(g.values().iter().all(|v| *v == 1.0));
        assert_eq!(f.dilate(&d, 0).unwrap(), f);
    }

    #[test]
    fn io_round_trips() {
        let g = GridFunction::from_fn(vec![-1.0, 0.0], vec![1.0, 2.0], vec![3, 4], |x| x[0] * 0.1 + x[1])
            .unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("# box=[-1,1]x[0,2]; shape=3x4"));
        assert_eq!(GridFunction::read_csv(&buf[..]).unwrap(), g);
        assert_eq!(GridFunction::from_bytes(&g.to_bytes()).unwrap(), g);
    }

    #[test]
    fn multi_index_listing() {
        assert_eq!(multi_indices(2, 1), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(1, 3).len(), 4);
    }
}
