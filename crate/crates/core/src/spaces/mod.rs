//! Ball quasi-Banach function spaces evaluated on grid functions.

pub mod herz;
pub mod orlicz;
pub(crate) mod scan;

use std::fmt;
use std::sync::Arc;

use crate::dilation::{DilatedBall, ExpansiveDilation};
use crate::error::{Error, Result};
use crate::grid::{default_resolution, GridFunction};

pub use herz::{mo_indices, HerzWeight, MoGrid, MoIndices};
pub use orlicz::OrliczFunction;
pub use scan::MorreyScan;

use orlicz::luxemburg;

/// Largest family accepted by [`BallSpace::concavity_probe`].
pub const MAX_FAMILY: usize = 8;

/// The exponents `(p_-, q_0, θ_0, p_0)` attached to a space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentBundle {
    pub p_minus: f64,
    pub q0: f64,
    pub theta0: f64,
    pub p0: f64,
    pub underline_p: f64,
}

impl ExponentBundle {
    /// Build and validate a bundle.
    ///
    /// `theta0` defaults to `0.9 · min(p_-, 1)`; `p0` defaults to `1.5`, or to
    /// the midpoint of `(p0_floor, 2)` when the floor is at least `1.5`.
    pub fn new(p_minus: f64, q0: f64, theta0: Option<f64>, p0: Option<f64>, p0_floor: f64) -> Result<Self> {
        let underline_p = p_minus.min(1.0);
        let theta0 = theta0.unwrap_or(0.9 * underline_p);
        let p0 = p0.unwrap_or(if p0_floor < 1.5 { 1.5 } else { 0.5 * (p0_floor + 2.0) });
        let b = ExponentBundle {
            p_minus,
            q0,
            theta0,
            p0,
            underline_p,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.p_minus > 0.0
            && self.theta0 > 0.0
            && self.theta0 < self.underline_p
            && self.underline_p <= 1.0
            && self.theta0 < self.p0
            && self.p_minus <= self.q0 + 1e-15
            && self.q0 <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "exponent bundle violates 0 < θ0 < min(p_-,1), θ0 < p0, p_- ≤ q0 ≤ 1: {:?}",
                self
            )))
        }
    }
}

/// A variable exponent `p(·)`, either sampled on a grid or given by a formula.
#[derive(Clone)]
pub enum VariableExponent {
    Field(GridFunction),
    Formula {
        p: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        ess_inf: f64,
        ess_sup: f64,
        label: String,
    },
}

impl fmt::Debug for VariableExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableExponent::Field(g) => write!(f, "Field(shape={:?})", g.shape()),
            VariableExponent::Formula { label, ess_inf, ess_sup, .. } => {
                write!(f, "Formula({}, [{}, {}])", label, ess_inf, ess_sup)
            }
        }
    }
}

impl VariableExponent {
    pub fn constant(p: f64) -> Self {
        VariableExponent::Formula {
            p: Arc::new(move |_| p),
            ess_inf: p,
            ess_sup: p,
            label: format!("{}", p),
        }
    }

    pub fn formula<F>(label: &str, p: F, ess_inf: f64, ess_sup: f64) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        VariableExponent::Formula {
            p: Arc::new(p),
            ess_inf,
            ess_sup,
            label: label.to_string(),
        }
    }

    /// Exponent at `x`. A sampled field is interpolated and held constant
    /// beyond its box by clamping `x` to it.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            VariableExponent::Formula { p, .. } => p(x),
            VariableExponent::Field(g) => {
                let y: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .map(|(a, v)| v.clamp(g.lower()[a], g.upper()[a]))
                    .collect();
                g.interpolate(&y)
            }
        }
    }

    pub fn ess_inf(&self) -> f64 {
        match self {
            VariableExponent::Formula { ess_inf, .. } => *ess_inf,
            VariableExponent::Field(g) => g.values().iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn ess_sup(&self) -> f64 {
        match self {
            VariableExponent::Formula { ess_sup, .. } => *ess_sup,
            VariableExponent::Field(g) => g.values().iter().cloned().fold(0.0, f64::max),
        }
    }

    /// Largest `|p(x) - p(y)| · log(e + 1/|x - y|)` over neighbouring field
    /// samples, a finite-difference proxy for the local log-Hölder constant.
    pub fn log_holder_probe(&self) -> Option<f64> {
        let VariableExponent::Field(g) = self else {
            return None;
        };
        let mut worst: f64 = 0.0;
        for idx in 0..g.len() {
            let m = g.unravel(idx);
            for a in 0..g.dim() {
                if m[a] + 1 < g.shape()[a] {
                    let mut m2 = m.clone();
                    m2[a] += 1;
                    let dp = (g.values()[idx] - g.values()[g.ravel(&m2)]).abs();
                    let dist = g.h()[a];
                    worst = worst.max(dp * (std::f64::consts::E + 1.0 / dist).ln());
                }
            }
        }
        Some(worst)
    }
}

/// The concrete spaces.
#[derive(Debug, Clone)]
pub enum SpaceKind {
    Lebesgue { p: f64 },
    Morrey { p: f64, q: f64, dilation: Arc<ExpansiveDilation>, scan: MorreyScan },
    OrliczSlice { phi: OrliczFunction, q: f64, ell: i32, dilation: Arc<ExpansiveDilation>, lattice: usize },
    Lorentz { p: f64, q: f64 },
    VariableLebesgue { exponent: VariableExponent },
    MixedNorm { p: Vec<f64> },
    LocalHerz { weight: HerzWeight, p: f64, q: f64, dim: usize },
    Orlicz { phi: OrliczFunction },
    /// The `p`-convexification of the inner space.
    Convexified { inner: Box<BallSpace>, p: f64 },
}

/// A ball quasi-Banach function space with optional exponent overrides.
#[derive(Debug, Clone)]
pub struct BallSpace {
    pub kind: SpaceKind,
    pub theta0: Option<f64>,
    pub p0: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{} = {} must be positive", name, v)))
    }
}

impl BallSpace {
    fn from_kind(kind: SpaceKind) -> Self {
        BallSpace {
            kind,
            theta0: None,
            p0: None,
        }
    }

    pub fn lebesgue(p: f64) -> Result<Self> {
        positive("p", p)?;
        Ok(Self::from_kind(SpaceKind::Lebesgue { p }))
    }

    pub fn lorentz(p: f64, q: f64) -> Result<Self> {
        positive("p", p)?;
        positive("q", q)?;
        Ok(Self::from_kind(SpaceKind::Lorentz { p, q }))
    }

    pub fn orlicz(phi: OrliczFunction) -> Self {
        Self::from_kind(SpaceKind::Orlicz { phi })
    }

    pub fn variable(exponent: VariableExponent) -> Result<Self> {
        positive("ess inf p", exponent.ess_inf())?;
        Ok(Self::from_kind(SpaceKind::VariableLebesgue { exponent }))
    }

    pub fn mixed(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidParameter("mixed norm needs at least one exponent".into()));
        }
        for v in &p {
            positive("p_i", *v)?;
        }
        Ok(Self::from_kind(SpaceKind::MixedNorm { p }))
    }

    pub fn herz(weight: HerzWeight, p: f64, q: f64, dim: usize) -> Result<Self> {
        positive("p", p)?;
        positive("q", q)?;
        Ok(Self::from_kind(SpaceKind::LocalHerz { weight, p, q, dim }))
    }

    /// Morrey space `M^p_q` with `0 < q ≤ p`.
    pub fn morrey(p: f64, q: f64, dilation: Arc<ExpansiveDilation>) -> Result<Self> {
        positive("p", p)?;
        positive("q", q)?;
        if q > p {
            return Err(Error::InvalidParameter(format!("Morrey space needs q ≤ p, got q = {} > p = {}", q, p)));
        }
        Ok(Self::from_kind(SpaceKind::Morrey {
            p,
            q,
            dilation,
            scan: MorreyScan::default(),
        }))
    }

    pub fn orlicz_slice(phi: OrliczFunction, q: f64, ell: i32, dilation: Arc<ExpansiveDilation>) -> Result<Self> {
        positive("q", q)?;
        let lattice = match dilation.n {
            1 => 512,
            2 => 48,
            _ => 12,
        };
        Ok(Self::from_kind(SpaceKind::OrliczSlice {
            phi,
            q,
            ell,
            dilation,
            lattice,
        }))
    }

    /// Replace the Morrey candidate set.
    pub fn with_morrey_scan(mut self, new_scan: MorreyScan) -> Self {
        if let SpaceKind::Morrey { scan, .. } = &mut self.kind {
            *scan = new_scan;
        }
        self
    }

    pub fn with_theta0(mut self, theta0: f64) -> Self {
        self.theta0 = Some(theta0);
        self
    }

    pub fn with_p0(mut self, p0: f64) -> Self {
        self.p0 = Some(p0);
        self
    }

    /// The `p`-convexification, with norm `‖|f|^p‖^{1/p}`.
    pub fn convexify(&self, p: f64) -> Result<BallSpace> {
        positive("p", p)?;
        Ok(Self::from_kind(SpaceKind::Convexified {
            inner: Box::new(self.clone()),
            p,
        }))
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            SpaceKind::Lebesgue { .. } => "lebesgue",
            SpaceKind::Morrey { .. } => "morrey",
            SpaceKind::OrliczSlice { .. } => "orlicz-slice",
            SpaceKind::Lorentz { .. } => "lorentz",
            SpaceKind::VariableLebesgue { .. } => "variable",
            SpaceKind::MixedNorm { .. } => "mixed",
            SpaceKind::LocalHerz { .. } => "herz",
            SpaceKind::Orlicz { .. } => "orlicz",
            SpaceKind::Convexified { .. } => "convexified",
        }
    }

    /// Descriptor string in the command line grammar.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            SpaceKind::Lebesgue { p } => format!("lebesgue:p={}", p),
            SpaceKind::Morrey { p, q, .. } => format!("morrey:p={},q={}", p, q),
            SpaceKind::OrliczSlice { phi, q, ell, .. } => {
                format!("orlicz-slice:phi={},q={},ell={}", phi.descriptor(), q, ell)
            }
            SpaceKind::Lorentz { p, q } => format!("lorentz:p={},q={}", p, q),
            SpaceKind::VariableLebesgue { exponent } => format!("variable:{:?}", exponent),
            SpaceKind::MixedNorm { p } => {
                let s: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                format!("mixed:p={}", s.join(","))
            }
            SpaceKind::LocalHerz { weight, p, q, .. } => {
                format!("herz:omega={},p={},q={}", weight.label(), p, q)
            }
            SpaceKind::Orlicz { phi } => format!("orlicz:phi={}", phi.descriptor()),
            SpaceKind::Convexified { inner, p } => format!("({})^{}", inner.descriptor(), p),
        }
    }

    /// Exponent bundle derived from the kind, with the overrides applied.
    pub fn exponents(&self) -> Result<ExponentBundle> {
        let (p_minus, q0, floor) = match &self.kind {
            SpaceKind::Lebesgue { p } => (*p, *p, 0.0),
            SpaceKind::Morrey { p, q, .. } => (*q, *p, 0.0),
            SpaceKind::OrliczSlice { phi, q, .. } => {
                let (lo, hi) = (phi.p_lower(), phi.p_upper());
                // The printed maximum includes 1, so the value never drops
                // below 1; capped at 1 as required by q0 ≤ 1.
                let printed = hi.max(q * lo / (q + lo)).max(1.0);
                (lo.min(*q), printed.min(1.0), hi.max(*q).max(1.0))
            }
            SpaceKind::Lorentz { p, .. } => (*p, 1.0, 0.0),
            SpaceKind::VariableLebesgue { exponent } => (exponent.ess_inf(), exponent.ess_sup(), exponent.ess_sup()),
            SpaceKind::MixedNorm { p } => {
                let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = p.iter().cloned().fold(0.0, f64::max);
                (lo, hi, hi)
            }
            SpaceKind::LocalHerz { weight, p, dim, .. } => {
                let ix = weight.indices();
                let n = *dim as f64;
                let p_minus = 0.99 * n / (ix.big_m0.max(ix.big_m_inf) + n / p);
                let small = ix.m0.min(ix.m_inf);
                (p_minus, 1.0, (n / (small + n / p)).max(1.0))
            }
            SpaceKind::Orlicz { phi } => (phi.p_lower(), phi.p_upper(), phi.p_upper()),
            SpaceKind::Convexified { inner, p } => {
                let e = inner.exponents()?;
                (e.p_minus * p, e.q0 * p, e.p0 * p)
            }
        };
        ExponentBundle::new(p_minus, q0, self.theta0, self.p0, floor)
    }

    /// The norm of `f`.
    pub fn norm(&self, f: &GridFunction) -> Result<f64> {
        match &self.kind {
            SpaceKind::Lebesgue { p } => Ok(f.lq_norm(*p)),
            SpaceKind::Lorentz { p, q } => Ok(lorentz_norm(f, *p, *q)),
            SpaceKind::Orlicz { phi } => {
                let cell = f.cell_volume();
                let vals: Vec<f64> = f.values().iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
                luxemburg(|lam| vals.iter().map(|v| phi.eval(v / lam)).sum::<f64>() * cell)
            }
            SpaceKind::VariableLebesgue { exponent } => {
                let cell = f.cell_volume();
                let mut pairs = Vec::new();
                let mut x = vec![0.0; f.dim()];
                for (i, v) in f.values().iter().enumerate() {
                    if *v != 0.0 {
                        f.center_into(i, &mut x);
                        pairs.push((v.abs(), exponent.eval(&x)));
                    }
                }
                luxemburg(|lam| pairs.iter().map(|(v, p)| (v / lam).powf(*p)).sum::<f64>() * cell)
            }
            SpaceKind::MixedNorm { p } => {
                if p.len() != f.dim() {
                    return Err(Error::Dimension(format!(
                        "mixed norm has {} exponents, grid has {} axes",
                        p.len(),
                        f.dim()
                    )));
                }
                Ok(mixed_norm(f, p))
            }
            SpaceKind::LocalHerz { weight, p, q, .. } => Ok(herz::herz_norm(f, weight, *p, *q)),
            SpaceKind::Morrey { p, q, dilation, scan } => {
                check_dim(f, dilation)?;
                Ok(scan::morrey_norm(f, dilation, *p, *q, scan))
            }
            SpaceKind::OrliczSlice { phi, q, ell, dilation, lattice } => {
                check_dim(f, dilation)?;
                scan::orlicz_slice_norm(f, dilation, phi, *q, *ell, *lattice)
            }
            SpaceKind::Convexified { inner, p } => {
                let g = f.map(|v| v.abs().powf(*p));
                Ok(inner.norm(&g)?.powf(1.0 / p))
            }
        }
    }

    /// `‖1_B‖`, analytic where a closed form exists and evaluated on a grid
    /// over the bounding box of `B` otherwise.
    pub fn indicator_norm(&self, ball: &DilatedBall) -> Result<f64> {
        let vol = ball.volume();
        match &self.kind {
            SpaceKind::Lebesgue { p } | SpaceKind::Lorentz { p, .. } => Ok(vol.powf(1.0 / p)),
            SpaceKind::Orlicz { phi } => Ok(1.0 / phi.inverse(1.0 / vol)),
            SpaceKind::Convexified { inner, p } => Ok(inner.indicator_norm(ball)?.powf(1.0 / p)),
            SpaceKind::Morrey { p, q, dilation, scan } => {
                let f = indicator_grid(ball, default_resolution(ball.dilation.n))?;
                let local = MorreyScan {
                    k_min: ball.k - 6,
                    k_max: ball.k + 6,
                    extra_centers: vec![ball.center.clone()],
                    ..scan.clone()
                };
                Ok(scan::morrey_norm(&f, dilation, *p, *q, &local))
            }
            _ => self.norm(&indicator_grid(ball, default_resolution(ball.dilation.n))?),
        }
    }

    /// Ratios `‖1_{B_k}‖ / min{|B_k|^{1/q0}, |B_k|^{1/p_-}}` for centered
    /// balls.
    pub fn check_lower_bound(
        &self,
        dilation: Arc<ExpansiveDilation>,
        k_range: std::ops::RangeInclusive<i32>,
    ) -> Result<LowerBoundReport> {
        let e = self.exponents()?;
        let mut rows = Vec::new();
        for k in k_range {
            let ball = DilatedBall::centered(k, dilation.clone())?;
            let vol = ball.volume();
            let indicator = self.indicator_norm(&ball)?;
            let bound = vol.powf(1.0 / e.q0).min(vol.powf(1.0 / e.p_minus));
            rows.push(LowerBoundRow {
                k,
                volume: vol,
                indicator,
                bound,
                ratio: indicator / bound,
            });
        }
        Ok(LowerBoundReport::from_rows(rows))
    }

    /// `max_S Σ_{k∈S} ‖f_k‖_{X^{1/q0}} / ‖Σ_{k∈S} |f_k|‖_{X^{1/q0}}` over the
    /// non-empty subsets `S` of the family.
    pub fn concavity_probe(&self, q0: f64, family: &[GridFunction]) -> Result<f64> {
        if family.is_empty() || family.len() > MAX_FAMILY {
            return Err(Error::InvalidParameter(format!(
                "family size must be in 1..={}, got {}",
                MAX_FAMILY,
                family.len()
            )));
        }
        if family.iter().any(|g| !g.same_grid(&family[0])) {
            return Err(Error::Dimension("family members must share one grid".into()));
        }
        let norm_q0 = |g: &GridFunction| -> Result<f64> {
            Ok(self.norm(&g.map(|v| v.abs().powf(1.0 / q0)))?.powf(q0))
        };
        let single: Vec<f64> = family.iter().map(norm_q0).collect::<Result<_>>()?;
        let mut best: f64 = 0.0;
        for mask in 1usize..(1 << family.len()) {
            let mut sum = vec![0.0; family[0].len()];
            let mut lhs = 0.0;
            for (j, g) in family.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    lhs += single[j];
                    for (s, v) in sum.iter_mut().zip(g.values()) {
                        *s += v.abs();
                    }
                }
            }
            let rhs = norm_q0(&family[0].with_values(sum)?)?;
            if rhs > 0.0 {
                best = best.max(lhs / rhs);
            }
        }
        Ok(best)
    }
}

fn check_dim(f: &GridFunction, d: &ExpansiveDilation) -> Result<()> {
    if f.dim() == d.n {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "grid has {} axes, dilation acts on R^{}",
            f.dim(),
            d.n
        )))
    }
}

/// `1_B` sampled on its bounding box with `res` cells per axis.
pub fn indicator_grid(ball: &DilatedBall, res: usize) -> Result<GridFunction> {
    let (lo, hi) = ball.bounding_box();
    GridFunction::from_fn(lo, hi, vec![res; ball.dilation.n], |x| {
        if ball.contains(x) {
            1.0
        } else {
            0.0
        }
    })
}

/// Exact Lorentz quasi-norm of a step rearrangement.
pub fn lorentz_norm(f: &GridFunction, p: f64, q: f64) -> f64 {
    let r = f.rearrange();
    if q.is_infinite() {
        return r
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * ((i + 1) as f64 * r.cell).powf(1.0 / p))
            .fold(0.0, f64::max);
    }
    let e = q / p;
    let mut sum = 0.0;
    let mut prev = 0.0;
    for (i, v) in r.values.iter().enumerate() {
        let t = ((i + 1) as f64 * r.cell).powf(e);
        sum += v.powf(q) * (t - prev);
        prev = t;
    }
    sum.powf(1.0 / q)
}

/// Iterated mixed norm, integrating axis 0 with `p[0]` first.
pub fn mixed_norm(f: &GridFunction, p: &[f64]) -> f64 {
    let n = f.dim();
    let shape = f.shape();
    // Work on |f|^{p0}, reduced over axis 0 into the remaining axes.
    let inner: usize = shape[1..].iter().product();
    let mut cur = vec![0.0; inner];
    for i0 in 0..shape[0] {
        let row = &f.values()[i0 * inner..(i0 + 1) * inner];
        for (c, v) in cur.iter_mut().zip(row) {
            *c += v.abs().powf(p[0]);
        }
    }
    let mut level: Vec<f64> = cur.iter().map(|s| (s * f.h()[0]).powf(1.0 / p[0])).collect();
    for a in 1..n {
        let rest: usize = shape[a + 1..].iter().product();
        let mut next = vec![0.0; rest];
        for ia in 0..shape[a] {
            for (j, nx) in next.iter_mut().enumerate() {
                *nx += level[ia * rest + j].powf(p[a]);
            }
        }
        level = next.iter().map(|s| (s * f.h()[a]).powf(1.0 / p[a])).collect();
    }
    level[0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundRow {
    pub k: i32,
    pub volume: f64,
    pub indicator: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub rows: Vec<LowerBoundRow>,
    pub min_ratio: f64,
    pub median_ratio: f64,
}

impl LowerBoundReport {
    fn from_rows(rows: Vec<LowerBoundRow>) -> Self {
        let mut r: Vec<f64> = rows.iter().map(|x| x.ratio).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let min_ratio = r.first().cloned().unwrap_or(f64::NAN);
        let median_ratio = if r.is_empty() {
            f64::NAN
        } else if r.len() % 2 == 1 {
            r[r.len() / 2]
        } else {
            0.5 * (r[r.len() / 2 - 1] + r[r.len() / 2])
        };
        LowerBoundReport {
            rows,
            min_ratio,
            median_ratio,
        }
    }

    /// All ratios positive and `min ≥ 0.5 · median`.
    pub fn decade_stable(&self) -> bool {
        self.rows.iter().all(|r| r.ratio > 0.0) && self.min_ratio >= 0.5 * self.median_ratio
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    match v.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        s => s
            .parse()
            .map_err(|_| Error::Parse(format!("parameter {}: cannot parse '{}' as a number", key, s))),
    }
}

fn parse_phi(v: &str) -> Result<OrliczFunction> {
    let v = v.trim();
    if let Some(inner) = v.strip_prefix("pow(").and_then(|s| s.strip_suffix(')')) {
        return OrliczFunction::power(parse_f64("phi", inner)?);
    }
    Err(Error::Parse(format!("unknown Orlicz function '{}' (expected pow(p))", v)))
}

fn read_phi_table(path: &str) -> Result<OrliczFunction> {
    let text = std::fs::read_to_string(path)?;
    let mut t = Vec::new();
    let mut phi = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',');
        let a = it.next().unwrap_or("");
        let b = it
            .next()
            .ok_or_else(|| Error::Parse(format!("{}:{}: expected 't,phi'", path, i + 1)))?;
        t.push(parse_f64("t", a)?);
        phi.push(parse_f64("phi", b)?);
    }
    OrliczFunction::table(t, phi)
}

/// Parse a descriptor such as `lebesgue:p=0.75` or `mixed:p=0.5,0.75`.
///
/// Morrey and Orlicz-slice spaces are tied to `dilation`; Herz spaces use
/// its dimension.
pub fn parse_space(desc: &str, dilation: Arc<ExpansiveDilation>) -> Result<BallSpace> {
    let desc = desc.trim();
    let (kind, rest) = desc.split_once(':').unwrap_or((desc, ""));
    let mut params: Vec<(String, Vec<String>)> = Vec::new();
    for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match tok.split_once('=') {
            Some((k, v)) => params.push((k.trim().to_string(), vec![v.trim().to_string()])),
            None => match params.last_mut() {
                Some(last) => last.1.push(tok.to_string()),
                None => return Err(Error::Parse(format!("dangling value '{}' in '{}'", tok, desc))),
            },
        }
    }
    let get = |key: &str| -> Option<&Vec<String>> { params.iter().find(|(k, _)| k == key).map(|(_, v)| v) };
    let num = |key: &str| -> Result<f64> {
        let v = get(key).ok_or_else(|| Error::Parse(format!("'{}' needs parameter {}", desc, key)))?;
        parse_f64(key, &v[0])
    };
    let phi = || -> Result<OrliczFunction> {
        if let Some(v) = get("phi") {
            parse_phi(&v[0])
        } else if let Some(v) = get("phifile") {
            read_phi_table(&v[0])
        } else {
            Err(Error::Parse(format!("'{}' needs parameter phi", desc)))
        }
    };
    let space = match kind {
        "lebesgue" => BallSpace::lebesgue(num("p")?)?,
        "lorentz" => BallSpace::lorentz(num("p")?, num("q")?)?,
        "orlicz" => BallSpace::orlicz(phi()?),
        "mixed" => {
            let v = get("p").ok_or_else(|| Error::Parse(format!("'{}' needs parameter p", desc)))?;
            let p = v.iter().map(|s| parse_f64("p", s)).collect::<Result<Vec<_>>>()?;
            if p.len() != dilation.n {
                return Err(Error::Dimension(format!(
                    "mixed norm has {} exponents, dilation acts on R^{}",
                    p.len(),
                    dilation.n
                )));
            }
            BallSpace::mixed(p)?
        }
        "variable" => {
            if let Some(v) = get("pfile") {
                let file = std::fs::File::open(&v[0])?;
                let g = GridFunction::read_csv(std::io::BufReader::new(file))?;
                BallSpace::variable(VariableExponent::Field(g))?
            } else {
                BallSpace::variable(VariableExponent::constant(num("p")?))?
            }
        }
        "herz" => BallSpace::herz(HerzWeight::power(num("alpha")?), num("p")?, num("q")?, dilation.n)?,
        "morrey" => {
            let mut s = BallSpace::morrey(num("p")?, num("q")?, dilation)?;
            if let Some(v) = get("stride") {
                let stride = parse_f64("stride", &v[0])? as usize;
                s = s.with_morrey_scan(MorreyScan {
                    center_stride: stride.max(1),
                    ..MorreyScan::default()
                });
            }
            s
        }
        "orlicz-slice" => {
            let ell = get("ell").map(|v| parse_f64("ell", &v[0])).transpose()?.unwrap_or(0.0);
            BallSpace::orlicz_slice(phi()?, num("q")?, ell as i32, dilation)?
        }
        other => return Err(Error::UnsupportedKind(format!("unknown space kind '{}'", other))),
    };
    Ok(space)
}
