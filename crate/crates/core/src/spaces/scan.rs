//! Ball scans over grid cells, shared by the Morrey and Orlicz-slice norms.

use rayon::prelude::*;

use crate::dilation::ExpansiveDilation;
use crate::grid::GridFunction;
use crate::linalg::quad_form;

use super::orlicz::{luxemburg, OrliczFunction};

/// Visit the flat indices of the cells whose centers lie in `center + B_k`.
pub(crate) fn for_each_cell_in_ball<F: FnMut(usize)>(
    f: &GridFunction,
    d: &ExpansiveDilation,
    center: &[f64],
    k: i32,
    mut visit: F,
) {
    let n = f.dim();
    let hw = d.half_widths(k);
    let mut lo = vec![0usize; n];
    let mut hi = vec![0usize; n];
    for a in 0..n {
        let h = f.h()[a];
        let first = ((center[a] - hw[a] - f.lower()[a]) / h - 0.5).ceil();
        let last = ((center[a] + hw[a] - f.lower()[a]) / h - 0.5).floor();
        let first = first.max(0.0);
        let last = last.min((f.shape()[a] - 1) as f64);
        if first > last {
            return;
        }
        lo[a] = first as usize;
        hi[a] = last as usize;
    }
    let form = d.ball_form(k);
    let c2 = d.c() * d.c();
    let mut multi = lo.clone();
    let mut diff = vec![0.0; n];
    loop {
        for a in 0..n {
            let x = f.lower()[a] + (multi[a] as f64 + 0.5) * f.h()[a];
            diff[a] = x - center[a];
        }
        if quad_form(&form, n, &diff) < c2 {
            visit(f.ravel(&multi));
        }
        let mut a = n;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            if multi[a] < hi[a] {
                multi[a] += 1;
                break;
            }
            multi[a] = lo[a];
        }
    }
}

/// Number of points of the cell-center lattice of `f`, extended beyond the
/// grid, that lie in `center + B_k`.
pub(crate) fn lattice_count_in_ball(f: &GridFunction, d: &ExpansiveDilation, center: &[f64], k: i32) -> usize {
    let n = f.dim();
    let hw = d.half_widths(k);
    let mut lo = vec![0i64; n];
    let mut hi = vec![0i64; n];
    for a in 0..n {
        let h = f.h()[a];
        lo[a] = ((center[a] - hw[a] - f.lower()[a]) / h - 0.5).ceil() as i64;
        hi[a] = ((center[a] + hw[a] - f.lower()[a]) / h - 0.5).floor() as i64;
        if lo[a] > hi[a] {
            return 0;
        }
    }
    let form = d.ball_form(k);
    let c2 = d.c() * d.c();
    let mut multi = lo.clone();
    let mut diff = vec![0.0; n];
    let mut count = 0;
    loop {
        for a in 0..n {
            let x = f.lower()[a] + (multi[a] as f64 + 0.5) * f.h()[a];
            diff[a] = x - center[a];
        }
        if quad_form(&form, n, &diff) < c2 {
            count += 1;
        }
        let mut a = n;
        loop {
            if a == 0 {
                return count;
            }
            a -= 1;
            if multi[a] < hi[a] {
                multi[a] += 1;
                break;
            }
            multi[a] = lo[a];
        }
    }
}

/// Candidate-ball set for the Morrey supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct MorreyScan {
    /// Every `center_stride`-th cell center along each axis is a candidate.
    pub center_stride: usize,
    pub k_min: i32,
    pub k_max: i32,
    /// Balls expected to hold fewer cells than this are skipped.
    pub min_cells: usize,
    /// Additional candidate centers.
    pub extra_centers: Vec<Vec<f64>>,
}

impl Default for MorreyScan {
    fn default() -> Self {
        MorreyScan {
            center_stride: 16,
            k_min: -6,
            k_max: 6,
            min_cells: 16,
            extra_centers: Vec::new(),
        }
    }
}

impl MorreyScan {
    /// Halve the center stride (never below 1).
    pub fn refined(&self) -> Self {
        MorreyScan {
            center_stride: (self.center_stride / 2).max(1),
            ..self.clone()
        }
    }

    pub(crate) fn centers(&self, f: &GridFunction) -> Vec<Vec<f64>> {
        let n = f.dim();
        let stride = self.center_stride.max(1);
        let counts: Vec<usize> = f.shape().iter().map(|s| s.div_ceil(stride)).collect();
        let total: usize = counts.iter().product();
        let mut out = Vec::with_capacity(total + self.extra_centers.len());
        for mut flat in 0..total {
            let mut x = vec![0.0; n];
            for a in (0..n).rev() {
                let j = (flat % counts[a]) * stride + stride / 2;
                flat /= counts[a];
                let j = j.min(f.shape()[a] - 1);
                x[a] = f.lower()[a] + (j as f64 + 0.5) * f.h()[a];
            }
            out.push(x);
        }
        out.extend(self.extra_centers.iter().cloned());
        out
    }
}

/// `sup_B |B|^{1/p - 1/q} ‖f‖_{L^q(B)}` over the candidate balls.
pub(crate) fn morrey_norm(
    f: &GridFunction,
    d: &ExpansiveDilation,
    p: f64,
    q: f64,
    scan: &MorreyScan,
) -> f64 {
    let cell = f.cell_volume();
    let ks: Vec<i32> = (scan.k_min..=scan.k_max)
        .filter(|&k| d.b.powi(k) / cell >= scan.min_cells as f64)
        .collect();
    let powered: Vec<f64> = f.values().iter().map(|v| v.abs().powf(q)).collect();
    scan.centers(f)
        .par_iter()
        .map(|c| {
            let mut best: f64 = 0.0;
            for &k in &ks {
                let mut s = 0.0;
                for_each_cell_in_ball(f, d, c, k, |i| s += powered[i]);
                if s > 0.0 {
                    let v = d.b.powf(k as f64 * (1.0 / p - 1.0 / q)) * (s * cell).powf(1.0 / q);
                    best = best.max(v);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// `{∫ [‖f 1_{x+B_ℓ}‖_Φ / ‖1_{x+B_ℓ}‖_Φ]^q dx}^{1/q}` with `x` on a midpoint
/// lattice of `lattice` points per axis covering `box - B_ℓ`.
pub(crate) fn orlicz_slice_norm(
    f: &GridFunction,
    d: &ExpansiveDilation,
    phi: &OrliczFunction,
    q: f64,
    ell: i32,
    lattice: usize,
) -> crate::Result<f64> {
    let n = f.dim();
    let hw = d.half_widths(ell);
    let lo: Vec<f64> = (0..n).map(|a| f.lower()[a] - hw[a]).collect();
    let hi: Vec<f64> = (0..n).map(|a| f.upper()[a] + hw[a]).collect();
    let step: Vec<f64> = (0..n).map(|a| (hi[a] - lo[a]) / lattice as f64).collect();
    let dv: f64 = step.iter().product();
    let denom = 1.0 / phi.inverse(1.0 / d.b.powi(ell));
    let cell = f.cell_volume();
    let total = lattice.pow(n as u32);
    let terms: Vec<crate::Result<f64>> = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut x = vec![0.0; n];
            for a in (0..n).rev() {
                let j = flat % lattice;
                flat /= lattice;
                x[a] = lo[a] + (j as f64 + 0.5) * step[a];
            }
            let num = match phi {
                OrliczFunction::Power(p) => {
                    let mut s = 0.0;
                    for_each_cell_in_ball(f, d, &x, ell, |i| s += f.values()[i].abs().powf(*p));
                    (s * cell).powf(1.0 / p)
                }
                OrliczFunction::Table { .. } => {
                    let mut vals = Vec::new();
                    for_each_cell_in_ball(f, d, &x, ell, |i| {
                        let v = f.values()[i].abs();
                        if v > 0.0 {
                            vals.push(v)
                        }
                    });
                    if vals.is_empty() {
                        0.0
                    } else {
                        luxemburg(|lam| vals.iter().map(|v| phi.eval(v / lam)).sum::<f64>() * cell)?
                    }
                }
            };
            Ok((num / denom).powf(q))
        })
        .collect();
    let mut sum = 0.0;
    for t in terms {
        sum += t?;
    }
    Ok((sum * dv).powf(1.0 / q))
}
