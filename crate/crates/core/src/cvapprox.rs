//! Fourier-series synthesis of `exp(i alpha f(q))` on the periodized
//! interval `[-L, L]`, evaluated on real grids.
//!
//! The series is `f(q) ~ C_0 + sum_n C_n cos(n pi q / L) + D_n sin(n pi q / L)`;
//! each term is a rotated quadrature and can be realised with the
//! displacement-type gates of a continuous-variable chain.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionKind {
    Monomial(u32),
    /// Samples on the uniform grid `q_i = -L + 2L i / (len - 1)`, linearly
    /// interpolated.
    Tabulated(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicFunctionSpec {
    pub kind: FunctionKind,
    pub half_width: f64,
}

impl PeriodicFunctionSpec {
    pub fn monomial(k: u32) -> Self {
        PeriodicFunctionSpec { kind: FunctionKind::Monomial(k), half_width: PI }
    }

    pub fn with_half_width(mut self, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Domain(format!("half-width {l} must be positive")));
        }
        self.half_width = l;
        Ok(self)
    }

    pub fn tabulated(values: Vec<f64>, half_width: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain("need at least two samples".into()));
        }
        PeriodicFunctionSpec { kind: FunctionKind::Tabulated(values), half_width: PI }
            .with_half_width(half_width)
    }

    pub fn eval(&self, q: f64) -> f64 {
        let l = self.half_width;
        match &self.kind {
            FunctionKind::Monomial(k) => q.powi(*k as i32),
            FunctionKind::Tabulated(v) => {
                let t = ((q + l) / (2.0 * l)).clamp(0.0, 1.0) * (v.len() - 1) as f64;
                let i = (t.floor() as usize).min(v.len() - 2);
                let frac = t - i as f64;
                v[i] * (1.0 - frac) + v[i + 1] * frac
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSynthesis {
    pub half_width: f64,
    pub c0: f64,
    /// `sine[n-1] = D_n`.
    pub sine: Vec<f64>,
    /// `cosine[n-1] = C_n`.
    pub cosine: Vec<f64>,
}

impl FourierSynthesis {
    pub fn n_max(&self) -> usize {
        self.sine.len()
    }

    pub fn eval(&self, q: f64) -> f64 {
        let x = PI * q / self.half_width;
        let (s1, c1) = x.sin_cos();
        // sin(nx), cos(nx) by the angle-addition recurrence.
        let (mut s, mut c) = (s1, c1);
        let mut acc = self.c0;
        for (ds, dc) in self.sine.iter().zip(&self.cosine) {
            acc += ds * s + dc * c;
            let ns = s * c1 + c * s1;
            c = c * c1 - s * s1;
            s = ns;
        }
        acc
    }

    /// Rows `n sine cosine`.
    pub fn table(&self) -> String {
        let mut out = String::from("# n sine cosine\n");
        let _ = writeln!(out, "0 0 {:e}", self.c0);
        for (i, (s, c)) in self.sine.iter().zip(&self.cosine).enumerate() {
            let _ = writeln!(out, "{} {:e} {:e}", i + 1, s, c);
        }
        out
    }
}

/// `D_n` of `q` on `[-pi, pi]`.
pub fn linear_sine_coeff(n: u32) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    -2.0 * sign / n as f64
}

/// `D_n` of `q^3` on `[-pi, pi]`.
pub fn cubic_sine_coeff(n: u32) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let nf = n as f64;
    -2.0 * (nf * nf * PI * PI - 6.0) * sign / (nf * nf * nf)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

const GL_ORDER: usize = 20;

/// Projections onto `1, cos(n pi q/L), sin(n pi q/L)` by composite
/// Gauss-Legendre quadrature with enough panels to resolve `n_max`.
pub fn numeric_coeffs(spec: &PeriodicFunctionSpec, n_max: usize) -> FourierSynthesis {
    let l = spec.half_width;
    let panels = (2 * n_max).max(64);
    let (gx, gw) = gauss_legendre(GL_ORDER);
    let h = 2.0 * l / panels as f64;
    let mut c0 = 0.0;
    let mut sine = vec![0.0; n_max];
    let mut cosine = vec![0.0; n_max];
    for p in 0..panels {
        let mid = -l + h * (p as f64 + 0.5);
        for (&x, &w) in gx.iter().zip(&gw) {
            let q = mid + 0.5 * h * x;
            let wf = 0.5 * h * w * spec.eval(q);
            c0 += wf;
            let t = PI * q / l;
            let (s1, c1) = t.sin_cos();
            let (mut s, mut c) = (s1, c1);
            for n in 0..n_max {
                sine[n] += wf * s;
                cosine[n] += wf * c;
                let ns = s * c1 + c * s1;
                c = c * c1 - s * s1;
                s = ns;
            }
        }
    }
    FourierSynthesis {
        half_width: l,
        c0: c0 / (2.0 * l),
        sine: sine.into_iter().map(|v| v / l).collect(),
        cosine: cosine.into_iter().map(|v| v / l).collect(),
    }
}

/// Series coefficients; closed forms for `q` and `q^3`, quadrature otherwise.
pub fn fourier_coeffs(spec: &PeriodicFunctionSpec, n_max: usize) -> Result<FourierSynthesis> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let l = spec.half_width;
    let closed = |k: i32, coeff: fn(u32) -> f64| FourierSynthesis {
        half_width: l,
        c0: 0.0,
        // q^k = (L/pi)^k x^k with x = pi q / L.
        sine: (1..=n_max as u32).map(|n| coeff(n) * (l / PI).powi(k)).collect(),
        cosine: vec![0.0; n_max],
    };
    Ok(match spec.kind {
        FunctionKind::Monomial(1) => closed(1, linear_sine_coeff),
        FunctionKind::Monomial(3) => closed(3, cubic_sine_coeff),
        _ => numeric_coeffs(spec, n_max),
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ErrorMetric {
    /// Sup over the grid on `|alpha q| < pi`.
    Sup,
    /// Root-mean-square over the same grid.
    L2,
    /// Sup over the narrower window where the target phase satisfies
    /// `|alpha f(q)| < pi` (monomials only).
    PhaseWindow,
}

fn window(spec: &PeriodicFunctionSpec, alpha: f64, metric: ErrorMetric) -> f64 {
    let l = spec.half_width;
    if alpha == 0.0 {
        return l;
    }
    let lin = PI / alpha.abs();
    match (metric, &spec.kind) {
        (ErrorMetric::PhaseWindow, FunctionKind::Monomial(k)) if *k > 0 => {
            lin.powf(1.0 / *k as f64).min(l)
        }
        _ => lin.min(l),
    }
}

/// `|exp(i alpha f) - exp(i alpha S_n)| / sqrt 2` over the uniform interior
/// grid `q_i = -w + 2 w i / (G + 1)`, `i = 1..=G`, reduced by `metric`.
pub fn approx_error_with(
    spec: &PeriodicFunctionSpec,
    alpha: f64,
    n_max: usize,
    grid_points: usize,
    metric: ErrorMetric,
) -> Result<f64> {
    if grid_points < 1000 {
        return Err(Error::Domain(format!("grid of {grid_points} points, need at least 1000")));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let synth = fourier_coeffs(spec, n_max)?;
    let w = window(spec, alpha, metric);
    let mut sup = 0.0f64;
    let mut sq = 0.0;
    for i in 1..=grid_points {
        let q = -w + 2.0 * w * i as f64 / (grid_points + 1) as f64;
        let exact = C64::from_polar(1.0, alpha * spec.eval(q));
        let approx = C64::from_polar(1.0, alpha * synth.eval(q));
        let e = (exact - approx).norm() / SQRT_2;
        sup = sup.max(e);
        sq += e * e;
    }
    Ok(match metric {
        ErrorMetric::L2 => (sq / grid_points as f64).sqrt(),
        _ => sup,
    })
}

pub fn approx_error(spec: &PeriodicFunctionSpec, alpha: f64, n_max: usize, grid_points: usize) -> Result<f64> {
    approx_error_with(spec, alpha, n_max, grid_points, ErrorMetric::Sup)
}

/// `(n_max, epsilon)` rows.
pub fn error_sweep(
    spec: &PeriodicFunctionSpec,
    alpha: f64,
    n_maxes: &[usize],
    grid_points: usize,
    metric: ErrorMetric,
) -> Result<Vec<(usize, f64)>> {
    n_maxes
        .iter()
        .map(|&n| Ok((n, approx_error_with(spec, alpha, n, grid_points, metric)?)))
        .collect()
}

pub fn format_sweep(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("# n_max epsilon\n");
    for (n, e) in rows {
        let _ = writeln!(out, "{n} {e:e}");
    }
    out
}

/// Quadrature rotation turning `a q + b p` into `beta` times the rotated
/// quadrature `q cos(omega) + p sin(omega)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QuadratureRotation {
    pub omega: f64,
    pub beta: f64,
}

impl QuadratureRotation {
    pub fn conjugation(&self) -> String {
        format!("q -> q cos({:.6}) + p sin({:.6})", self.omega, self.omega)
    }
}

pub fn rotation_angles(a: f64, b: f64) -> Result<QuadratureRotation> {
    if a == 0.0 && b == 0.0 {
        return Err(Error::Domain("(a, b) = (0, 0) has no direction".into()));
    }
    Ok(QuadratureRotation { omega: b.atan2(a), beta: a.hypot(b) })
}

/// Coefficients of `cos(ap + bq)` and `sin(ap + bq)` in the symmetric and
/// antisymmetric combinations of `X(a) Z(b)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QuadratureCoefficients {
    pub symmetric: (f64, f64),
    pub antisymmetric: (f64, f64),
}

pub fn quadrature_decomposition(a: f64, b: f64) -> QuadratureCoefficients {
    let (s, c) = (a * b).sin_cos();
    QuadratureCoefficients {
        symmetric: (2.0 * c, -2.0 * s),
        antisymmetric: (2.0 * s, 2.0 * c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(linear_sine_coeff(1), 2.0);
        assert!((cubic_sine_coeff(1) - 2.0 * (PI * PI - 6.0)).abs() < 1e-12);
        assert!((cubic_sine_coeff(1) - 7.7392088).abs() < 1e-6);
        assert!((cubic_sine_coeff(2) - (6.0 - 4.0 * PI * PI) / 4.0).abs() < 1e-12);
        assert!((cubic_sine_coeff(2) + 8.3696044).abs() < 1e-6);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(20);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let i38: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((i38 - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn zero_alpha_has_no_error() {
        let e = approx_error(&PeriodicFunctionSpec::monomial(3), 0.0, 10, 1000).unwrap();
        assert_eq!(e, 0.0);
        assert!(approx_error(&PeriodicFunctionSpec::monomial(3), 1.0, 10, 10).is_err());
    }

    #[test]
    fn rotation_examples() {
        let r = rotation_angles(1.0, 0.0).unwrap();
        assert_eq!((r.omega, r.beta), (0.0, 1.0));
        let r = rotation_angles(0.0, 1.0).unwrap();
        assert!((r.omega - PI / 2.0).abs() < 1e-15 && r.beta == 1.0);
        let r = rotation_angles(3.0, 4.0).unwrap();
        assert!((r.omega - 0.927295218).abs() < 1e-9 && (r.beta - 5.0).abs() < 1e-15);
        assert!(rotation_angles(0.0, 0.0).is_err());
    }

    #[test]
    fn quadrature_examples() {
        assert_eq!(quadrature_decomposition(0.0, 3.0).symmetric, (2.0, 0.0));
        assert_eq!(quadrature_decomposition(0.0, 3.0).antisymmetric, (0.0, 2.0));
        let q = quadrature_decomposition(1.0, PI / 2.0);
        assert!(q.symmetric.0.abs() < 1e-15 && (q.symmetric.1 + 2.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_linear_matches_closed_form() {
        let grid: Vec<f64> = (0..=2000).map(|i| -PI + 2.0 * PI * i as f64 / 2000.0).collect();
        let spec = PeriodicFunctionSpec::tabulated(grid, PI).unwrap();
        let s = fourier_coeffs(&spec, 5).unwrap();
        for n in 1..=5u32 {
            assert!((s.sine[n as usize - 1] - linear_sine_coeff(n)).abs() < 1e-6);
        }
    }

    #[test]
    fn rescaled_interval() {
        let spec = PeriodicFunctionSpec::monomial(3).with_half_width(2.0).unwrap();
        let closed = fourier_coeffs(&spec, 8).unwrap();
        let num = numeric_coeffs(&spec, 8);
        for (a, b) in closed.sine.iter().zip(&num.sine) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
