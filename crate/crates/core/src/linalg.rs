//! Small dense helpers on row-major `f64` slices.
//!
//! The hot loops (ball membership, quasi-norm search, shell sampling) run on
//! dimensions n <= 3, where `DMatrix` allocation overhead dominates.

use nalgebra::DMatrix;

/// Row-major copy of a square matrix.
pub(crate) fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * m.ncols());
    for i in 0..n {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub(crate) fn mat_vec(m: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    mat_vec_into(m, n, x, &mut out);
    out
}

pub(crate) fn mat_vec_into(m: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// `x^T M x` for a row-major symmetric `M`.
#[inline]
pub(crate) fn quad_form(m: &[f64], n: usize, x: &[f64]) -> f64 {
    match n {
        1 => m[0] * x[0] * x[0],
        2 => m[0] * x[0] * x[0] + (m[1] + m[2]) * x[0] * x[1] + m[3] * x[1] * x[1],
        _ => {
            let mut s = 0.0;
            for i in 0..n {
                let row = &m[i * n..(i + 1) * n];
                let mut t = 0.0;
                for j in 0..n {
                    t += row[j] * x[j];
                }
                s += x[i] * t;
            }
            s
        }
    }
}

pub(crate) fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Volume of the Euclidean unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Integer power of a square matrix, negative exponents through `inv`.
pub(crate) fn mat_pow(a: &DMatrix<f64>, inv: &DMatrix<f64>, k: i32) -> DMatrix<f64> {
    let n = a.nrows();
    let base = if k >= 0 { a } else { inv };
    let mut result = DMatrix::identity(n, n);
    let mut sq = base.clone();
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &sq;
        }
        sq = &sq * &sq;
        e >>= 1;
    }
    result
}
