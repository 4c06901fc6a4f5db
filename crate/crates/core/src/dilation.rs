//! Expansive matrices, their invariant ellipsoid, dilated balls and the step
//! homogeneous quasi-norm.

use std::borrow::Cow;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{euclid, mat_pow, mat_vec, quad_form, to_row_major, unit_ball_volume};

/// Default spectral padding applied to non-normal matrices.
pub const DEFAULT_DELTA: f64 = 0.05;
/// Default truncation tolerance of the ellipsoid series.
pub const DEFAULT_TOL: f64 = 1e-12;
pub const K_MIN_DEFAULT: i32 = -60;
pub const K_MAX_DEFAULT: i32 = 60;

const CACHE_LO: i32 = -64;
const CACHE_HI: i32 = 64;
const MAX_SERIES_TERMS: usize = 10_000;
const BOUNDARY_SAMPLES: usize = 1000;

/// Parse the `"a,b;c,d"` matrix text format.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = text
        .trim()
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| {
                    e.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad matrix entry '{}'", e.trim())))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!(
            "matrix '{}' is not square",
            text.trim()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Parse a comma separated point.
pub fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|e| {
            e.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad point coordinate '{}'", e.trim())))
        })
        .collect()
}

/// The invariant ellipsoid `Δ = {x : xᵀPx < c²}`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    pub p: DMatrix<f64>,
    pub c: f64,
    pub r: f64,
    /// Number of series terms summed before truncation.
    pub terms: usize,
}

#[derive(Debug, Clone)]
struct Geometry {
    ellipsoid: Ellipsoid,
    /// `c · L^{-T}` with `P = L Lᵀ`, maps the unit ball onto `Δ`.
    unit_to_delta: Vec<f64>,
    /// `P^{-1}`, row-major.
    p_inv: DMatrix<f64>,
    /// `(A^{-k})ᵀ P A^{-k}` for k in the cache window.
    forms: Vec<Vec<f64>>,
    /// `A^k` for k in the cache window.
    powers: Vec<Vec<f64>>,
}

/// A validated expansive matrix together with its spectral and ellipsoid data.
#[derive(Debug, Clone)]
pub struct ExpansiveDilation {
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    pub a_t: DMatrix<f64>,
    pub n: usize,
    pub b: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub w: f64,
    /// Moduli of the computed eigenvalues.
    pub eigen_moduli: Vec<f64>,
    pub normal: bool,
    pub delta: f64,
    geometry: Option<Geometry>,
}

/// Check that every eigenvalue of `m` lies outside the closed unit disk and
/// derive `b`, `λ±` and `w`.
pub fn validate_expansive(m: &DMatrix<f64>, delta: f64) -> Result<ExpansiveDilation> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let det = m.determinant();
    if det.abs() < 1e-14 {
        return Err(Error::Singular { det });
    }
    let moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    let min_mod = moduli.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_mod = moduli.iter().cloned().fold(0.0, f64::max);
    if min_mod <= 1.0 + 1e-10 {
        return Err(Error::NotExpansive { modulus: min_mod });
    }
    let mt = m.transpose();
    let comm = (m * &mt - &mt * m).norm();
    let normal = comm <= 1e-12 * m.norm_squared().max(1.0);
    let (mut lambda_minus, lambda_plus) = if normal {
        (min_mod, max_mod)
    } else {
        (min_mod * (1.0 - delta), max_mod * (1.0 + delta))
    };
    if lambda_minus <= 1.0 {
        lambda_minus = 0.5 * (1.0 + min_mod);
    }
    let a_inv = m
        .clone()
        .try_inverse()
        .ok_or(Error::Singular { det })?;
    Ok(ExpansiveDilation {
        a: m.clone(),
        a_inv,
        a_t: mt,
        n,
        b: det.abs(),
        lambda_minus,
        lambda_plus,
        w: 0.5 * (1.0 + lambda_minus),
        eigen_moduli: moduli,
        normal,
        delta,
        geometry: None,
    })
}

impl ExpansiveDilation {
    /// Validate and build the ellipsoid with default parameters.
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        validate_expansive(m, DEFAULT_DELTA)?.build_ellipsoid(DEFAULT_TOL)
    }

    /// Parse the matrix text format and build.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(&parse_matrix(text)?)
    }

    /// The dilation generated by `Aᵀ`, with the same `δ` and tolerance.
    pub fn transposed(&self) -> Result<Self> {
        let tol = DEFAULT_TOL;
        validate_expansive(&self.a_t, self.delta)?.build_ellipsoid(tol)
    }

    /// Sum the series `P = Σ w^{2k} (A^{-k})ᵀ A^{-k}` and derive `c` and `r`.
    pub fn build_ellipsoid(mut self, tol: f64) -> Result<Self> {
        let n = self.n;
        let mut p = DMatrix::<f64>::zeros(n, n);
        let mut inv_pow = DMatrix::<f64>::identity(n, n);
        let w2 = self.w * self.w;
        let mut weight = 1.0;
        let mut terms = 0;
        loop {
            let term = inv_pow.transpose() * &inv_pow * weight;
            p += &term;
            terms += 1;
            if term.norm() < tol {
                break;
            }
            if terms >= MAX_SERIES_TERMS {
                return Err(Error::SeriesDivergence { terms });
            }
            inv_pow = &self.a_inv * inv_pow;
            weight *= w2;
        }
        p = (&p + p.transpose()) * 0.5;
        let det_p = p.determinant();
        let c = (det_p.sqrt() / unit_ball_volume(n)).powf(1.0 / n as f64);
        let chol = nalgebra::Cholesky::new(p.clone())
            .ok_or_else(|| Error::InvalidParameter("ellipsoid matrix is not positive definite".into()))?;
        let l = chol.l();
        let l_inv_t = l
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("Cholesky factor is singular".into()))?
            .transpose();
        let unit_to_delta = to_row_major(&(l_inv_t * c));
        let p_inv = chol.inverse();

        let mut forms = Vec::with_capacity((CACHE_HI - CACHE_LO + 1) as usize);
        let mut powers = Vec::with_capacity(forms.capacity());
        for k in CACHE_LO..=CACHE_HI {
            let ak = mat_pow(&self.a, &self.a_inv, k);
            let am = mat_pow(&self.a, &self.a_inv, -k);
            forms.push(to_row_major(&(am.transpose() * &p * am)));
            powers.push(to_row_major(&ak));
        }

        let mut geometry = Geometry {
            ellipsoid: Ellipsoid { p, c, r: self.w, terms },
            unit_to_delta,
            p_inv,
            forms,
            powers,
        };
        // Inflation margin estimated on boundary samples of Δ.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e111);
        let pm = to_row_major(&geometry.ellipsoid.p);
        let a_inv = to_row_major(&self.a_inv);
        let mut worst: f64 = 0.0;
        for _ in 0..BOUNDARY_SAMPLES {
            let u = random_unit(&mut rng, n);
            let x = mat_vec(&geometry.unit_to_delta, n, &u);
            let y = mat_vec(&a_inv, n, &x);
            worst = worst.max(quad_form(&pm, n, &y).sqrt() / c);
        }
        let margin = if worst > 0.0 { 1.0 / worst } else { f64::INFINITY };
        let r = self.w.min(margin);
        if r * worst >= 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(
                "inflated ellipsoid is not contained in A·Δ".into(),
            ));
        }
        geometry.ellipsoid.r = r;
        self.geometry = Some(geometry);
        Ok(self)
    }

    pub fn has_ellipsoid(&self) -> bool {
        self.geometry.is_some()
    }

    fn geom(&self) -> &Geometry {
        self.geometry
            .as_ref()
            .expect("ellipsoid must be built before geometric queries")
    }

    pub fn ellipsoid(&self) -> Option<&Ellipsoid> {
        self.geometry.as_ref().map(|g| &g.ellipsoid)
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.geom().ellipsoid.p
    }

    pub fn c(&self) -> f64 {
        self.geom().ellipsoid.c
    }

    pub fn r(&self) -> f64 {
        self.geom().ellipsoid.r
    }

    /// `|x|_P = sqrt(xᵀPx)`.
    pub fn p_norm(&self, x: &[f64]) -> f64 {
        quad_form(&self.geom().forms[(-CACHE_LO) as usize], self.n, x).sqrt()
    }

    /// Quadratic form `(A^{-k})ᵀ P A^{-k}` as a row-major slice.
    pub fn ball_form(&self, k: i32) -> Cow<'_, [f64]> {
        if (CACHE_LO..=CACHE_HI).contains(&k) {
            Cow::Borrowed(&self.geom().forms[(k - CACHE_LO) as usize])
        } else {
            let am = mat_pow(&self.a, &self.a_inv, -k);
            Cow::Owned(to_row_major(&(am.transpose() * self.p() * am)))
        }
    }

    /// `A^k` as a row-major matrix.
    pub fn power(&self, k: i32) -> Cow<'_, [f64]> {
        if (CACHE_LO..=CACHE_HI).contains(&k) {
            Cow::Borrowed(&self.geom().powers[(k - CACHE_LO) as usize])
        } else {
            Cow::Owned(to_row_major(&mat_pow(&self.a, &self.a_inv, k)))
        }
    }

    /// Apply `A^k` to `x`.
    pub fn apply_power(&self, k: i32, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.power(k), self.n, x)
    }

    /// Membership of `x` (relative to the ball center) in `B_k`.
    #[inline]
    pub fn in_scale(&self, k: i32, x: &[f64]) -> bool {
        let c = self.c();
        quad_form(&self.ball_form(k), self.n, x) < c * c
    }

    /// Axis half-widths of the bounding box of `B_k`.
    pub fn half_widths(&self, k: i32) -> Vec<f64> {
        let ak = mat_pow(&self.a, &self.a_inv, k);
        let inv_form = &ak * &self.geom().p_inv * ak.transpose();
        (0..self.n)
            .map(|i| self.c() * inv_form[(i, i)].max(0.0).sqrt())
            .collect()
    }

    /// Uniform samples of the base shell `B_1 \ B_0`.
    ///
    /// In one dimension the samples form a deterministic stratified lattice;
    /// otherwise they come from rejection sampling driven by `seed`.
    pub fn base_shell_samples(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let n = self.n;
        if n == 1 {
            let h0 = self.c() / self.p()[(0, 0)].sqrt();
            let h1 = h0 * self.a[(0, 0)].abs();
            let half = count.div_ceil(2).max(1);
            let mut out = Vec::with_capacity(2 * half);
            for j in 0..half {
                let t = h0 + (h1 - h0) * (j as f64 + 0.5) / half as f64;
                out.push(vec![t]);
                out.push(vec![-t]);
            }
            out.truncate(count.max(1));
            return out;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = self.power(1);
        let map = &self.geom().unit_to_delta;
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let u = random_unit(&mut rng, n);
            let radius: f64 = rng.gen::<f64>().powf(1.0 / n as f64);
            let u: Vec<f64> = u.iter().map(|v| v * radius).collect();
            let y = mat_vec(&a, n, &mat_vec(map, n, &u));
            if !self.in_scale(0, &y) && self.in_scale(1, &y) {
                out.push(y);
            }
        }
        out
    }

    /// Samples with exponent `m`: the base shell mapped through `A^m`.
    pub fn shell_samples(&self, m: i32, base: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let pw = self.power(m);
        base.iter().map(|x| mat_vec(&pw, self.n, x)).collect()
    }

    /// JSON record `{n, A, b, lambda_minus, lambda_plus, w, c, r, P}`.
    pub fn to_json(&self) -> String {
        fn num(v: f64) -> String {
            format!("{:.16e}", v)
        }
        fn mat(m: &DMatrix<f64>) -> String {
            let rows: Vec<String> = (0..m.nrows())
                .map(|i| {
                    let e: Vec<String> = (0..m.ncols()).map(|j| num(m[(i, j)])).collect();
                    format!("[{}]", e.join(", "))
                })
                .collect();
            format!("[{}]", rows.join(", "))
        }
        let (c, r, p) = match self.ellipsoid() {
            Some(e) => (num(e.c), num(e.r), mat(&e.p)),
            None => ("null".into(), "null".into(), "null".into()),
        };
        format!(
            "{{\"n\": {}, \"A\": {}, \"b\": {}, \"lambda_minus\": {}, \"lambda_plus\": {}, \"w\": {}, \"c\": {}, \"r\": {}, \"P\": {}}}",
            self.n,
            mat(&self.a),
            num(self.b),
            num(self.lambda_minus),
            num(self.lambda_plus),
            num(self.w),
            c,
            r,
            p
        )
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = euclid(&v);
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// The translated dilated ball `center + B_k`.
#[derive(Debug, Clone)]
pub struct DilatedBall {
    pub center: Vec<f64>,
    pub k: i32,
    pub dilation: Arc<ExpansiveDilation>,
}

impl DilatedBall {
    pub fn new(center: Vec<f64>, k: i32, dilation: Arc<ExpansiveDilation>) -> Result<Self> {
        if center.len() != dilation.n {
            return Err(Error::Dimension(format!(
                "center has {} coordinates, dilation acts on R^{}",
                center.len(),
                dilation.n
            )));
        }
        if !dilation.has_ellipsoid() {
            return Err(Error::InvalidParameter("ellipsoid not built".into()));
        }
        Ok(DilatedBall { center, k, dilation })
    }

    /// `B_k` centered at the origin.
    pub fn centered(k: i32, dilation: Arc<ExpansiveDilation>) -> Result<Self> {
        let n = dilation.n;
        Self::new(vec![0.0; n], k, dilation)
    }

    /// `|B| = b^k`.
    pub fn volume(&self) -> f64 {
        self.dilation.b.powi(self.k)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        self.dilation.in_scale(self.k, &d)
    }

    /// Axis-aligned bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let hw = self.dilation.half_widths(self.k);
        let lo = self.center.iter().zip(&hw).map(|(c, h)| c - h).collect();
        let hi = self.center.iter().zip(&hw).map(|(c, h)| c + h).collect();
        (lo, hi)
    }

    /// Largest Euclidean distance between two points of the ball.
    pub fn diameter(&self) -> f64 {
        let ak = mat_pow(&self.dilation.a, &self.dilation.a_inv, self.k);
        let inv_form = &ak * &self.dilation.geom().p_inv * ak.transpose();
        let top = inv_form
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(0.0, f64::max);
        2.0 * self.dilation.c() * top.sqrt()
    }
}

/// Free-function form of [`DilatedBall::contains`].
pub fn ball_contains(ball: &DilatedBall, x: &[f64]) -> bool {
    ball.contains(x)
}

/// Value of the step quasi-norm: `b^k` with its exponent, or `0` at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoValue {
    pub value: f64,
    pub exponent: Option<i32>,
}

/// The step homogeneous quasi-norm ρ, or ρ* when built from the transpose.
#[derive(Debug, Clone)]
pub struct StepQuasiNorm {
    pub dilation: Arc<ExpansiveDilation>,
    pub transpose_mode: bool,
    pub k_min: i32,
    pub k_max: i32,
}

impl StepQuasiNorm {
    pub fn new(dilation: Arc<ExpansiveDilation>) -> Result<Self> {
        if !dilation.has_ellipsoid() {
            return Err(Error::InvalidParameter("ellipsoid not built".into()));
        }
        Ok(StepQuasiNorm {
            dilation,
            transpose_mode: false,
            k_min: K_MIN_DEFAULT,
            k_max: K_MAX_DEFAULT,
        })
    }

    /// ρ* built from `Aᵀ` with its own ellipsoid.
    pub fn transposed(d: &ExpansiveDilation) -> Result<Self> {
        let mut q = Self::new(Arc::new(d.transposed()?))?;
        q.transpose_mode = true;
        Ok(q)
    }

    pub fn with_clamps(mut self, k_min: i32, k_max: i32) -> Self {
        self.k_min = k_min;
        self.k_max = k_max;
        self
    }

    pub fn b(&self) -> f64 {
        self.dilation.b
    }

    /// Exponent `k` with `x ∈ B_{k+1} \ B_k`, `None` at the origin.
    pub fn exponent(&self, x: &[f64]) -> Result<Option<i32>> {
        if euclid(x) < 1e-300 {
            return Ok(None);
        }
        let d = &self.dilation;
        let out = Error::OutOfRange {
            k_min: self.k_min,
            k_max: self.k_max,
        };
        if !d.in_scale(self.k_max, x) || d.in_scale(self.k_min, x) {
            return Err(out);
        }
        let (mut lo, mut hi) = (self.k_min, self.k_max);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if d.in_scale(mid, x) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi - 1))
    }

    pub fn rho(&self, x: &[f64]) -> Result<RhoValue> {
        Ok(match self.exponent(x)? {
            None => RhoValue {
                value: 0.0,
                exponent: None,
            },
            Some(k) => RhoValue {
                value: self.b().powi(k),
                exponent: Some(k),
            },
        })
    }
}

/// One row of [`norm_comparison_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    /// Shell exponent; samples satisfy `ρ(x) = b^m`.
    pub m: i32,
    pub lower_exponent: f64,
    pub upper_exponent: f64,
    /// `min |x| / ρ(x)^{lower_exponent}` over the shell.
    pub lower_ratio_min: f64,
    /// `max |x| / ρ(x)^{upper_exponent}` over the shell.
    pub upper_ratio_max: f64,
}

/// Empirical comparison between ρ and the Euclidean norm on the shells `m`
/// of `scales` and on their mirrors `-m`.
///
/// For `ρ > 1` the lower bound uses `ln λ_-/ln b` and the upper bound
/// `ln λ_+/ln b`; on the mirrored small scales the roles swap.
pub fn norm_comparison_profile(
    q: &StepQuasiNorm,
    scales: std::ops::RangeInclusive<i32>,
    samples_per_scale: usize,
) -> Result<Vec<ComparisonRow>> {
    let d = &q.dilation;
    let ln_b = d.b.ln();
    let e_minus = d.lambda_minus.ln() / ln_b;
    let e_plus = d.lambda_plus.ln() / ln_b;
    let base = d.base_shell_samples(samples_per_scale, 0xC0FFEE);
    let mut rows = Vec::new();
    let mut shells: Vec<i32> = scales.clone().collect();
    shells.extend(scales.map(|m| -m));
    for m in shells {
        let (le, ue) = if m >= 0 { (e_minus, e_plus) } else { (e_plus, e_minus) };
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for x in d.shell_samples(m, &base) {
            let rv = q.rho(&x)?;
            let len = euclid(&x);
            lo = lo.min(len / rv.value.powf(le));
            hi = hi.max(len / rv.value.powf(ue));
        }
        rows.push(ComparisonRow {
            m,
            lower_exponent: le,
            upper_exponent: ue,
            lower_ratio_min: lo,
            upper_ratio_max: hi,
        });
    }
    Ok(rows)
}
