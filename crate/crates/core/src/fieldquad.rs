//! Helmholtz field quadrature and the two fractional derivatives.
//!
//! The field is u(x, y) = ∫ F(ξ) e^{2πi(xξ + y√(k²-ξ²))} dξ over (-k, k).
//! All ξ-integrals run in the angle θ with ξ = k·sin θ, which removes the
//! square-root endpoint behaviour of √(k²-ξ²) at ±k.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{domain, Error, Result};
use crate::quad::{adaptive, tanh_sinh, Adaptive, GaussLegendre};
use crate::scatdata::ScatteringDensity;

/// Radians of phase allowed per 16-point panel.
const PHASE_PER_PANEL: f64 = 10.0;
const MIN_PANELS: usize = 48;
const NODE_BUDGET: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub value: Complex64,
}

fn theta_range(k: f64, a: f64, b: f64) -> (f64, f64) {
    ((a / k).clamp(-1.0, 1.0).asin(), (b / k).clamp(-1.0, 1.0).asin())
}

/// u(x, y) by adaptive Gauss–Kronrod in θ.
pub fn eval_field(f: &ScatteringDensity, x: f64, y: f64) -> Result<Complex64> {
    eval_field_with(f, x, y, Adaptive::with_tol(1e-11, 1e-12))
}

pub fn eval_field_with(f: &ScatteringDensity, x: f64, y: f64, opts: Adaptive) -> Result<Complex64> {
    if !(x.is_finite() && y.is_finite()) {
        return Err(domain("field point must be finite"));
    }
    let k = f.k();
    let mut total = Complex64::new(0.0, 0.0);
    for &(a, b) in f.pieces() {
        let (t0, t1) = theta_range(k, a, b);
        let rate = TAU * k * (x.abs() + y.abs());
        let panels = (rate * (t1 - t0) / PHASE_PER_PANEL).ceil() as usize + 4;
        let integrand = |t: f64| {
            let (s, c) = t.sin_cos();
            let xi = k * s;
            let phase = TAU * (x * xi + y * k * c);
            f.eval_unchecked(xi) * Complex64::from_polar(k * c, phase)
        };
        total += adaptive(integrand, t0, t1, &[], opts.panels(panels))?.value;
    }
    Ok(total)
}

/// Fixed composite Gauss–Legendre nodes resolving the field on |x| ≤ x_max, |y| ≤ y_max.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    xi: Vec<f64>,
    eta: Vec<f64>,
    weight: Vec<Complex64>,
}

/// The field along a horizontal line y = const.
#[derive(Debug, Clone)]
pub struct FieldLine {
    xi: Vec<f64>,
    coeff: Vec<Complex64>,
}

impl FieldEvaluator {
    pub fn new(f: &ScatteringDensity, x_max: f64, y_max: f64) -> Result<Self> {
        let k = f.k();
        let gl = GaussLegendre::new(16);
        let rate = TAU * k * (x_max.abs() + y_max.abs());
        let mut xi = Vec::new();
        let mut eta = Vec::new();
        let mut weight = Vec::new();
        for &(a, b) in f.pieces() {
            let (t0, t1) = theta_range(k, a, b);
            let panels = ((rate * (t1 - t0) / PHASE_PER_PANEL).ceil() as usize).max(MIN_PANELS);
            let count = xi.len() + panels * gl.len();
            if count > NODE_BUDGET {
                return Err(Error::Budget {
                    count,
                    budget: NODE_BUDGET,
                });
            }
            let h = (t1 - t0) / panels as f64;
            for p in 0..panels {
                let lo = t0 + h * p as f64;
                for (t, w) in gl.mapped(lo, lo + h) {
                    let (s, c) = t.sin_cos();
                    let x = k * s;
                    xi.push(x);
                    eta.push(k * c);
                    weight.push(f.eval_unchecked(x) * (k * c * w));
                }
            }
        }
        Ok(Self { xi, eta, weight })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn line(&self, y: f64) -> FieldLine {
        let coeff = self
            .eta
            .iter()
            .zip(&self.weight)
            .map(|(&e, &w)| w * Complex64::from_polar(1.0, TAU * y * e))
            .collect();
        FieldLine {
            xi: self.xi.clone(),
            coeff,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&xi, &eta), &w) in self.xi.iter().zip(&self.eta).zip(&self.weight) {
            acc += w * Complex64::from_polar(1.0, TAU * (x * xi + y * eta));
        }
        acc
    }
}

impl FieldLine {
    pub fn eval(&self, x: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&xi, c) in self.xi.iter().zip(&self.coeff) {
            let (s, co) = (TAU * x * xi).sin_cos();
            re += c.re * co - c.im * s;
            im += c.re * s + c.im * co;
        }
        Complex64::new(re, im)
    }
}

/// Stationary-phase approximation √(k/y)·F(kx/y)·e^{2πiky - iπ/4} for y ≫ |x|.
pub fn far_field(f: &ScatteringDensity, x: f64, y: f64) -> Result<Complex64> {
    if !(y > 0.0) {
        return Err(domain(format!("far field needs y > 0 (got y = {y})")));
    }
    if x.abs() > y / 10.0 {
        return Err(domain(format!("far field needs |x| <= y/10 (got x = {x}, y = {y})")));
    }
    let k = f.k();
    let amp = (k / y).sqrt();
    Ok(f.eval(k * x / y) * Complex64::from_polar(amp, TAU * k * y - PI / 4.0))
}

/// Controls for the windowed x-moments of |u(·, y)|².
#[derive(Debug, Clone, Copy)]
pub struct MomentOptions {
    pub rel_tol: f64,
    /// Largest half window tried.
    pub max_window: f64,
    /// Largest accepted tail, relative to the value.
    pub accept_tail: f64,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_window: 512.0,
            accept_tail: 1e-3,
        }
    }
}

/// A windowed moment with its extrapolated tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    /// windowed integral plus extrapolated tail
    pub value: f64,
    /// integral over |x| ≤ window
    pub windowed: f64,
    /// bound on what lies beyond the window
    pub tail: f64,
    pub window: f64,
}

fn moment_segment(line: &FieldLine, power: f64, a: f64, b: f64, hx: f64, gl: &GaussLegendre) -> f64 {
    let integrand = |x: f64| x.abs().powf(power) * line.eval(x).norm_sqr();
    let panels = ((b - a) / hx).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let cusp_at_zero = power.fract() != 0.0;
    (0..panels)
        .into_par_iter()
        .map(|p| {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            if cusp_at_zero && (lo == 0.0 || hi == 0.0) {
                tanh_sinh(|x: f64, _, _| integrand(x), lo, hi, 1e-12).value
            } else {
                gl.integrate(integrand, lo, hi)
            }
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// Wynn's epsilon extrapolation of a partial-sum sequence.
pub fn wynn_epsilon(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n == 0 {
        return 0.0;
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur = seq.to_vec();
    let mut best = seq[n - 1];
    for col in 1..n {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.abs() <= 1e-15 * cur[i + 1].abs() || d == 0.0 {
                // column has converged
                return if col % 2 == 1 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        if col % 2 == 0 {
            best = *next.last().expect("non-empty column");
        }
        prev = cur;
        cur = next;
    }
    best
}

/// ∫|x|^power |u(x, y)|² dx over doubling windows, extrapolated in the window size.
pub fn spatial_moment(
    f: &ScatteringDensity,
    power: f64,
    y: f64,
    opts: &MomentOptions,
) -> Result<Moment> {
    if !(power >= 0.0) {
        return Err(domain("moment power must be non-negative"));
    }
    let Some((lo, hi)) = f.support_hull() else {
        return Ok(Moment {
            value: 0.0,
            windowed: 0.0,
            tail: 0.0,
            window: 0.0,
        });
    };
    let k = f.k();
    if f.support_margin() <= 0.0 {
        return Err(Error::Support {
            what: "field moments need a positive support margin".into(),
        });
    }
    let edge = lo.abs().max(hi.abs());
    let ray = y.abs() * edge / ((k - edge) * (k + edge)).sqrt();
    let min_width = f
        .pieces()
        .iter()
        .map(|&(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    let span = hi - lo;
    let hx = 1.0 / span;
    let mut window = (ray + (8.0f64).max(8.0 / min_width)).ceil();
    let gl = GaussLegendre::new(16);

    let ev = FieldEvaluator::new(f, window, y.abs())?;
    let line = ev.line(y);
    let mut sum = moment_segment(&line, power, -window, 0.0, hx, &gl)
        + moment_segment(&line, power, 0.0, window, hx, &gl);
    let mut seq = vec![sum];
    let mut estimate = sum;
    let mut uncertainty = f64::INFINITY;
    while 2.0 * window <= opts.max_window {
        let next = 2.0 * window;
        let ev = FieldEvaluator::new(f, next, y.abs())?;
        let line = ev.line(y);
        let delta = moment_segment(&line, power, -next, -window, hx, &gl)
            + moment_segment(&line, power, window, next, hx, &gl);
        sum += delta;
        window = next;
        seq.push(sum);
        if delta.abs() <= 1e-15 * sum.abs() {
            estimate = sum;
            uncertainty = delta.abs();
            break;
        }
        if seq.len() >= 3 {
            let e1 = wynn_epsilon(&seq);
            let e0 = wynn_epsilon(&seq[..seq.len() - 1]);
            estimate = e1;
            uncertainty = (e1 - e0).abs();
            if uncertainty <= opts.rel_tol * e1.abs() {
                break;
            }
        }
    }
    if seq.len() < 3 && uncertainty.is_infinite() {
        estimate = sum;
        uncertainty = seq
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .next_back()
            .unwrap_or(sum.abs());
    }
    let tail = (estimate - sum).abs().max(uncertainty);
    if tail > opts.accept_tail * estimate.abs() {
        return Err(Error::TailTooLarge {
            tail,
            value: estimate,
        });
    }
    Ok(Moment {
        value: estimate,
        windowed: sum,
        tail,
        window,
    })
}

/// Samples of a complex function on strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(domain("grid nodes and values differ in length"));
        }
        if nodes.len() < 2 {
            return Err(domain("grid needs at least two nodes"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("grid nodes must be strictly increasing"));
        }
        Ok(Self { nodes, values })
    }

    /// n equally spaced nodes on [lo, hi].
    pub fn uniform(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(domain("uniform grid needs n >= 2 and hi > lo"));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values)
    }

    /// n nodes on [lo, hi) with spacing (hi - lo)/n, for periodic sampling.
    pub fn periodic(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(domain("periodic grid needs n >= 2 and hi > lo"));
        }
        let h = (hi - lo) / n as f64;
        let nodes: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Common spacing when the nodes are equally spaced (relative tolerance 1e-9).
    pub fn uniform_spacing(&self) -> Option<f64> {
        let h = self.nodes[1] - self.nodes[0];
        self.nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
            .then_some(h)
    }

    /// Piecewise-linear interpolant, constant beyond the end nodes.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let j = self.nodes.partition_point(|&t| t <= x) - 1;
        let (a, b) = (self.nodes[j], self.nodes[j + 1]);
        let s = (x - a) / (b - a);
        self.values[j] * (1.0 - s) + self.values[j + 1] * s
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            values: self.nodes.iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect(),
        }
    }

    /// Pointwise product on a shared grid.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.nodes != other.nodes {
            return Err(domain("grid functions live on different nodes"));
        }
        Ok(Self {
            nodes: self.nodes.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// Trapezoid L² norm of the samples.
    pub fn l2_norm(&self) -> f64 {
        trapezoid_l2(&self.nodes, self.values.iter().map(|v| v.norm()))
    }
}

/// Trapezoid L² norm of real samples on `nodes`.
pub fn trapezoid_l2(nodes: &[f64], values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let mut s = 0.0;
    for i in 0..nodes.len() - 1 {
        s += 0.5 * (nodes[i + 1] - nodes[i]) * (v[i] * v[i] + v[i + 1] * v[i + 1]);
    }
    s.sqrt()
}

// ∫_{t0}^{t1} t^q dt for 0 ≤ t0 < t1, written to survive t1 ≈ t0.
fn power_integral(q: f64, t0: f64, t1: f64) -> f64 {
    let e = q + 1.0;
    if t0 == 0.0 {
        debug_assert!(e > 0.0);
        return t1.powf(e) / e;
    }
    let r = ((t1 - t0) / t0).ln_1p();
    if e.abs() < 1e-14 {
        r
    } else {
        t0.powf(e) * (e * r).exp_m1() / e
    }
}

// ∫_{t0}^{t1} |α + s t|² t^{-1-2b} dt; α is dropped when t0 = 0 since d(0) = 0 there.
fn cell_contribution(alpha: Complex64, s: Complex64, b: f64, t0: f64, t1: f64) -> f64 {
    let quad = s.norm_sqr() * power_integral(1.0 - 2.0 * b, t0, t1);
    if t0 == 0.0 {
        return quad;
    }
    let c0 = alpha.norm_sqr();
    let c1 = 2.0 * (alpha.conj() * s).re;
    c0 * power_integral(-1.0 - 2.0 * b, t0, t1) + c1 * power_integral(-2.0 * b, t0, t1) + quad
}

/// 𝒟^b f(x) = (∫|f(x) - f(t)|²/|x - t|^{1+2b} dt)^{1/2} for the piecewise-linear
/// interpolant of `f`, held constant beyond its end nodes.
///
/// Each cell is integrated in closed form, so the diagonal |x - t| → 0 carries
/// the local-linear model of f exactly.
pub fn frac_deriv_singular(f: &GridFunction, b: f64, x: f64) -> Result<f64> {
    crate::specfun::FracOrder::new(b)?;
    if !x.is_finite() {
        return Err(domain("evaluation point must be finite"));
    }
    let nodes = &f.nodes;
    let vals = &f.values;
    let n = nodes.len();
    let fx = f.interpolate(x);
    let mut total = 0.0;
    for j in 0..n - 1 {
        let (a, c) = (nodes[j], nodes[j + 1]);
        let s = (vals[j + 1] - vals[j]) / (c - a);
        if x <= a {
            let alpha = if x == a { Complex64::new(0.0, 0.0) } else { vals[j] - fx - s * (a - x) };
            total += cell_contribution(alpha, s, b, a - x, c - x);
        } else if x >= c {
            let alpha = if x == c { Complex64::new(0.0, 0.0) } else { vals[j] + s * (x - a) - fx };
            total += cell_contribution(alpha, -s, b, x - c, x - a);
        } else {
            let zero = Complex64::new(0.0, 0.0);
            total += cell_contribution(zero, -s, b, 0.0, x - a);
            total += cell_contribution(zero, s, b, 0.0, c - x);
        }
    }
    let two_b = 2.0 * b;
    let left = (vals[0] - fx).norm_sqr();
    if left > 0.0 && x > nodes[0] {
        total += left * (x - nodes[0]).powf(-two_b) / two_b;
    }
    let right = (vals[n - 1] - fx).norm_sqr();
    if right > 0.0 && x < nodes[n - 1] {
        total += right * (nodes[n - 1] - x).powf(-two_b) / two_b;
    }
    Ok(total.max(0.0).sqrt())
}

/// 𝒟^b f at every node of the grid.
pub fn frac_deriv_singular_nodes(f: &GridFunction, b: f64) -> Result<Vec<f64>> {
    f.nodes
        .par_iter()
        .map(|&x| frac_deriv_singular(f, b, x))
        .collect()
}

/// Flags a jump of the samples at x: the cell holding x changes by more than
/// ten times both neighbouring cells and by more than 1e-3 of the sample range.
pub fn discontinuity_at(f: &GridFunction, x: f64) -> bool {
    let n = f.nodes.len();
    if x <= f.nodes[0] || x >= f.nodes[n - 1] || n < 4 {
        return false;
    }
    let j = f.nodes.partition_point(|&t| t <= x) - 1;
    let j = j.clamp(1, n - 3);
    let d = |i: usize| (f.values[i + 1] - f.values[i]).norm();
    let range = f
        .values
        .iter()
        .map(|v| (v - f.values[0]).norm())
        .fold(0.0, f64::max);
    let here = d(j);
    here > 1e-3 * range && here > 10.0 * d(j - 1).max(d(j + 1))
}

/// Result of [`frac_deriv_fourier`]: the derivative and the share of spectral
/// mass in the top quarter of the resolved band.
#[derive(Debug, Clone)]
pub struct FourierDerivative {
    pub values: GridFunction,
    pub spectral_tail: f64,
}

impl FourierDerivative {
    /// More than 1e-6 of the spectral mass sits near the Nyquist band.
    pub fn aliasing_warning(&self) -> bool {
        self.spectral_tail > 1e-6
    }
}

/// D^b f = ℱ⁻¹(|2πν|^b f̂) with the samples read as one period of length n·h.
pub fn frac_deriv_fourier(f: &GridFunction, b: f64) -> Result<FourierDerivative> {
    crate::specfun::FracOrder::new(b)?;
    let h = f
        .uniform_spacing()
        .ok_or_else(|| domain("Fourier derivative needs equally spaced nodes"))?;
    let n = f.len();
    let period = n as f64 * h;
    let mut buf = f.values.clone();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let total: f64 = buf.iter().map(|c| c.norm_sqr()).sum();
    let mut tail = 0.0;
    for (m, c) in buf.iter_mut().enumerate() {
        let idx = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        if idx.abs() > 0.375 * n as f64 {
            tail += c.norm_sqr();
        }
        let mult = if m == 0 {
            // the zero bin stands for |ν| < 1/(2L); use its mean multiplier
            (PI / period).powf(b) / (1.0 + b)
        } else {
            (TAU * idx.abs() / period).powf(b)
        };
        *c *= mult;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let values = buf.into_iter().map(|c| c * scale).collect();
    Ok(FourierDerivative {
        values: GridFunction::new(f.nodes.clone(), values)?,
        spectral_tail: if total > 0.0 { tail / total } else { 0.0 },
    })
}

/// m_y(ξ) = e^{2πiy√(k²-ξ²)} on |ξ| ≤ k and 1 beyond.
pub fn multiplier_value(y: f64, k: f64, xi: f64) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(domain("k > 0"));
    }
    if xi.abs() > 4.0 * k {
        return Err(domain(format!("|xi| <= 4k (got xi = {xi})")));
    }
    Ok(if xi.abs() <= k {
        Complex64::from_polar(1.0, TAU * y * ((k - xi) * (k + xi)).sqrt())
    } else {
        Complex64::new(1.0, 0.0)
    })
}

/// (k|y|)^b/(k²-ξ²)^{b/2} + k(1 + |ξ|^b|y|^{b/2})/√(k²-ξ²)
pub fn multiplier_bracket(y: f64, k: f64, b: f64, xi: f64) -> f64 {
    let w = (k - xi) * (k + xi);
    (k * y.abs()).powf(b) / w.powf(0.5 * b) + k * (1.0 + xi.abs().powf(b) * y.abs().powf(0.5 * b)) / w.sqrt()
}

/// max over interior grid nodes of 𝒟^b m_y divided by [`multiplier_bracket`].
/// The grid has `n` nodes ξ = k·sin θ with θ equally spaced on [-π/2, π/2].
pub fn multiplier_bound_ratio(y: f64, k: f64, b: f64, n: usize) -> Result<f64> {
    crate::specfun::FracOrder::new(b)?;
    if n < 8 {
        return Err(domain("multiplier grid needs at least 8 nodes"));
    }
    let nodes: Vec<f64> = (0..n)
        .map(|i| k * (-0.5 * PI + PI * i as f64 / (n - 1) as f64).sin())
        .collect();
    let values = nodes
        .iter()
        .map(|&xi| multiplier_value(y, k, xi))
        .collect::<Result<Vec<_>>>()?;
    let g = GridFunction::new(nodes, values)?;
    let interior = &g.nodes()[1..n - 1];
    let ratios = interior
        .par_iter()
        .map(|&xi| Ok(frac_deriv_singular(&g, b, xi)? / multiplier_bracket(y, k, b, xi)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Both sides of ‖𝒟^b(fg)‖₂ ≤ ‖f·𝒟^b g‖₂ + ‖g·𝒟^b f‖₂ on a common grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeibnizSides {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn leibniz_sides(f: &GridFunction, g: &GridFunction, b: f64) -> Result<LeibnizSides> {
    let fg = f.product(g)?;
    let nodes = f.nodes();
    let d_fg = frac_deriv_singular_nodes(&fg, b)?;
    let d_f = frac_deriv_singular_nodes(f, b)?;
    let d_g = frac_deriv_singular_nodes(g, b)?;
    let lhs = trapezoid_l2(nodes, d_fg);
    let a = trapezoid_l2(nodes, f.values().iter().zip(&d_g).map(|(v, d)| v.norm() * d));
    let c = trapezoid_l2(nodes, g.values().iter().zip(&d_f).map(|(v, d)| v.norm() * d));
    Ok(LeibnizSides { lhs, rhs: a + c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_has_zero_field() {
        let f = ScatteringDensity::zero(2.0).unwrap();
        assert_eq!(eval_field(&f, 1.3, 0.4).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn field_at_origin_is_the_integral() {
        let f = ScatteringDensity::indicator(2.0, -1.0, 1.0).unwrap();
        assert!((eval_field(&f, 0.0, 0.0).unwrap() - 2.0).norm() < 1e-12);
        let p = ScatteringDensity::parabola(2.0).unwrap();
        assert!((eval_field(&p, 0.0, 0.0).unwrap() - 4.0 / 3.0).norm() < 1e-12);
    }

    #[test]
    fn field_of_indicator_at_height_zero_is_a_sinc() {
        let f = ScatteringDensity::indicator(2.0, -1.0, 1.0).unwrap();
        for x in [0.3, 2.7, 41.25] {
            let exact = (TAU * x).sin() / (PI * x);
            assert!((eval_field(&f, x, 0.0).unwrap().re - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn fixed_nodes_agree_with_adaptive() {
        let f = ScatteringDensity::chirped_bump(2.0, 0.2, 1.1, 0.4).unwrap();
        let ev = FieldEvaluator::new(&f, 60.0, 5.0).unwrap();
        let line = ev.line(3.0);
        for x in [-60.0, -7.5, 0.0, 0.9, 33.3] {
            let a = eval_field(&f, x, 3.0).unwrap();
            assert!((line.eval(x) - a).norm() < 1e-10, "{x}");
            assert!((ev.eval(x, 3.0) - a).norm() < 1e-10, "{x}");
        }
    }

    #[test]
    fn real_data_gives_conjugate_symmetric_field() {
        let f = ScatteringDensity::bump(2.0, 0.3, 0.8).unwrap();
        for (x, y) in [(0.7, 0.0), (3.1, 2.0)] {
            let a = eval_field(&f, -x, y).unwrap();
            let b = eval_field(&f, x, y).unwrap().conj();
            // conjugation flips y as well; at y = 0 both agree
            if y == 0.0 {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn far_field_preconditions_and_modulus() {
        let f = ScatteringDensity::bump(2.0, 0.0, 1.0).unwrap();
        assert!(far_field(&f, 1.0, 5.0).is_err());
        assert!(far_field(&f, 0.0, -1.0).is_err());
        let v = far_field(&f, 0.3, 10.0).unwrap();
        assert!((v.norm() - (0.2f64).sqrt() * f.eval(0.06).norm()).abs() < 1e-15);
        let g = ScatteringDensity::bump(2.0, 0.5, 0.4).unwrap();
        assert_eq!(far_field(&g, 0.0, 30.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn plancherel_at_height_zero() {
        let f = ScatteringDensity::bump(2.0, 0.1, 0.9).unwrap();
        let m = spatial_moment(&f, 0.0, 0.0, &MomentOptions::default()).unwrap();
        let l2 = f.l2_norm_sq().unwrap();
        assert!((m.value - l2).abs() < 1e-3 * l2, "{} {}", m.value, l2);
    }

    #[test]
    fn wynn_accelerates_geometric_tails() {
        let seq: Vec<f64> = (0..6).map(|j| 1.0 - 0.5f64.powi(j) + 0.3 * 0.25f64.powi(j)).collect();
        assert!((wynn_epsilon(&seq) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_derivative_of_constant_is_zero() {
        let g = GridFunction::uniform(-3.0, 3.0, 50, |_| Complex64::new(2.0, -1.0)).unwrap();
        for x in [-5.0, -1.0, 0.3, 2.9] {
            assert_eq!(frac_deriv_singular(&g, 0.4, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn singular_derivative_of_indicator_matches_riemann_sum() {
        // f = 1 on (0, 1): the integrand is 1/|x - t|^{1.5} off (0, 1)
        let g = GridFunction::new(
            vec![-1e-9, 0.0, 1.0, 1.0 + 1e-9],
            vec![0.0, 1.0, 1.0, 0.0].into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )
        .unwrap();
        let v = frac_deriv_singular(&g, 0.25, 0.5).unwrap();
        // midpoint sum in log distance over [0.5, 0.5 + l] on each side, closed form beyond
        let n = 1_000_000;
        let l: f64 = 2000.0;
        let (lo, hi) = (0.5f64.ln(), (0.5 + l).ln());
        let h = (hi - lo) / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let d = (lo + (i as f64 + 0.5) * h).exp();
            s += 2.0 * h * d.powf(-0.5);
        }
        s += 2.0 * (0.5 + l).powf(-0.5) / 0.5;
        assert!((v * v - s).abs() < 1e-3 * s, "{} {}", v * v, s);
    }

    #[test]
    fn singular_derivative_scales_with_dilation() {
        let f = |x: f64| Complex64::new((-x * x).exp(), 0.0);
        let lam = 2.0;
        let g1 = GridFunction::uniform(-12.0, 12.0, 4001, f).unwrap();
        let g2 = GridFunction::uniform(-24.0, 24.0, 4001, |x| f(x / lam)).unwrap();
        let b = 0.3;
        for x in [0.0, 0.6, 1.5] {
            let a = frac_deriv_singular(&g1, b, x).unwrap();
            let c = frac_deriv_singular(&g2, b, lam * x).unwrap();
            assert!((c - lam.powf(-b) * a).abs() < 1e-4 * a, "{x}");
        }
    }

    #[test]
    fn jump_is_flagged() {
        let g = GridFunction::uniform(-1.0, 1.0, 41, |x| Complex64::new(if x > 0.01 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        assert!(discontinuity_at(&g, 0.02));
        assert!(!discontinuity_at(&g, -0.5));
    }

    #[test]
    fn fourier_derivative_of_cosine() {
        let g = GridFunction::periodic(0.0, 1.0, 64, |x| Complex64::new((TAU * x).cos(), 0.0)).unwrap();
        let d = frac_deriv_fourier(&g, 0.5).unwrap();
        for (x, v) in g.nodes().iter().zip(d.values.values()) {
            assert!((v.re - TAU.sqrt() * (TAU * x).cos()).abs() < 1e-6);
            assert!(v.im.abs() < 1e-9);
        }
        assert!(!d.aliasing_warning());
    }

    #[test]
    fn fourier_derivative_near_order_zero_is_identity() {
        let g = GridFunction::uniform(-10.0, 10.0, 512, |x| Complex64::new((-x * x).exp(), 0.0)).unwrap();
        let d = frac_deriv_fourier(&g, 1e-4).unwrap();
        let err = g
            .values()
            .iter()
            .zip(d.values.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-2, "{err}");
    }

    #[test]
    fn multiplier_is_unimodular_and_trivial_at_height_zero() {
        for xi in [-7.9, -2.0, 0.0, 1.3, 2.0, 4.5] {
            assert!((multiplier_value(0.7, 2.0, xi).unwrap().norm() - 1.0).abs() < 1e-15);
        }
        assert!(multiplier_value(0.7, 2.0, 8.5).is_err());
        assert_eq!(multiplier_bound_ratio(0.0, 5.0, 0.5, 200).unwrap(), 0.0);
    }
}
