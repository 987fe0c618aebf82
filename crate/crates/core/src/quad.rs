//! Quadrature rules shared by every numerical route in the crate.
//!
//! Three tools live here: fixed Gauss–Legendre rules (used for composite
//! panels and tensor cells), a globally adaptive Gauss–Kronrod (7/15) driver
//! with initial panel splitting for oscillatory integrands, and tanh–sinh
//! for integrable endpoint singularities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values a quadrature rule can accumulate: real or complex scalars.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// An integral value together with an error estimate and the evaluation count.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T: QuadValue, F: FnMut(f64) -> T>(&self, mut f: F, a: f64, b: f64) -> T {
        self.mapped(a, b)
            .fold(T::zero(), |acc, (x, w)| acc + f(x) * w)
    }

    /// Composite rule with `panels` equal sub-intervals.
    pub fn composite<T: QuadValue, F: FnMut(f64) -> T>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        panels: usize,
    ) -> T {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels).fold(T::zero(), |acc, p| {
            let lo = a + h * p as f64;
            acc + self.integrate(&mut f, lo, lo + h)
        })
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// Kronrod 15-point abscissae and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let fc = f(centr);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let absc = hlgth * XGK[j];
        let f1 = f(centr - absc);
        let f2 = f(centr + absc);
        fv1[j] = f1;
        fv2[j] = f2;
        resk = resk + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * WG[j / 2];
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).magnitude() + (fv2[j] - reskh).magnitude());
    }
    let resasc = resasc * hlgth.abs();
    let mut err = ((resk - resg) * hlgth).magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    (resk * hlgth, err)
}

/// Options for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
    /// Number of equal panels the interval is cut into before adapting.
    pub initial_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_evals: 2_000_000,
            initial_panels: 1,
        }
    }
}

impl Adaptive {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn panels(mut self, n: usize) -> Self {
        self.initial_panels = n.max(1);
        self
    }

    pub fn budget(mut self, evals: usize) -> Self {
        self.max_evals = evals;
        self
    }
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod quadrature over [a, b] with optional interior breakpoints.
pub fn adaptive<T, F>(mut f: F, a: f64, b: f64, breaks: &[f64], opts: Adaptive) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: 0.0,
            evals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let total_len = hi - lo;
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    let mut value = T::zero();
    let mut error = 0.0;
    for w in cuts.windows(2) {
        let (s, e) = (w[0], w[1]);
        let n = ((opts.initial_panels as f64) * (e - s) / total_len).ceil().max(1.0) as usize;
        let h = (e - s) / n as f64;
        for p in 0..n {
            let pa = s + h * p as f64;
            let pb = if p + 1 == n { e } else { pa + h };
            let (v, er) = kronrod15(&mut f, pa, pb);
            evals += 15;
            value = value + v;
            error += er;
            heap.push(Piece {
                a: pa,
                b: pb,
                value: v,
                error: er,
            });
        }
    }

    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * value.magnitude());
        if error <= tol {
            break;
        }
        if evals + 30 > opts.max_evals {
            return Err(Error::NonConvergence {
                budget: opts.max_evals,
                estimate: error,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution; keep its estimate
            heap.push(Piece { error: 0.0, ..worst });
            error -= worst.error;
            continue;
        }
        let (v1, e1) = kronrod15(&mut f, worst.a, mid);
        let (v2, e2) = kronrod15(&mut f, mid, worst.b);
        evals += 30;
        value = value - worst.value + v1 + v2;
        error += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed the drift of incremental updates
    let value = heap.iter().fold(T::zero(), |acc, p| acc + p.value);
    let error = heap.iter().map(|p| p.error).sum::<f64>();
    Ok(Estimate {
        value: value * sign,
        error,
        evals,
    })
}

/// Tanh–sinh quadrature on [a, b]. The integrand receives the abscissa together
/// with its distances to `a` and `b`, which stay accurate when the node crowds an endpoint.
pub fn tanh_sinh<T, F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Estimate<T>
where
    T: QuadValue,
    F: FnMut(f64, f64, f64) -> T,
{
    let len = b - a;
    let half = 0.5 * len;
    let mut evals = 0usize;
    let mut node = |t: f64| -> (T, usize) {
        let u = 0.5 * PI * t.sinh();
        let cu = u.cosh();
        let w = half * 0.5 * PI * t.cosh() / (cu * cu);
        // distance from the nearer endpoint
        let d = len / (1.0 + (2.0 * u.abs()).exp());
        if w < 1e-300 || d <= 0.0 {
            return (T::zero(), 0);
        }
        let (x, da, db) = if t < 0.0 {
            (a + d, d, len - d)
        } else {
            (b - d, len - d, d)
        };
        (f(x, da, db) * w, 1)
    };

    let t_max = 6.5;
    let mut h = 0.5;
    let (c, n0) = node(0.0);
    let mut sum = c;
    evals += n0;
    let mut t = h;
    while t <= t_max {
        let (p, n1) = node(t);
        let (m, n2) = node(-t);
        sum = sum + p + m;
        evals += n1 + n2;
        t += h;
    }
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for _level in 0..10 {
        h *= 0.5;
        let mut t = h;
        let mut add = T::zero();
        while t <= t_max {
            let (p, n1) = node(t);
            let (m, n2) = node(-t);
            add = add + p + m;
            evals += n1 + n2;
            t += 2.0 * h;
        }
        sum = sum + add;
        let next = sum * h;
        error = (next - estimate).magnitude();
        estimate = next;
        if error <= rel_tol * estimate.magnitude() || error < 1e-300 {
            break;
        }
    }
    Estimate {
        value: estimate,
        error,
        evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let gl = GaussLegendre::new(10);
        let s: f64 = gl.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let v = gl.integrate(|x| x.powi(18), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        let v = gl.integrate(|x| x.powi(7) + 3.0 * x * x, 0.0, 2.0);
        assert!((v - (32.0 + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn large_rules_stay_accurate() {
        let gl = GaussLegendre::new(64);
        let v = gl.integrate(|x| (10.0 * x).cos(), -1.0, 1.0);
        assert!((v - 2.0 * 10f64.sin() / 10.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks_and_oscillation() {
        let r = adaptive(|x: f64| x.abs(), -1.0, 2.0, &[], Adaptive::default()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-12);
        let r = adaptive(
            |x: f64| Complex64::from_polar(1.0, 200.0 * x),
            0.0,
            1.0,
            &[],
            Adaptive::default().panels(40),
        )
        .unwrap();
        let exact = (Complex64::from_polar(1.0, 200.0) - 1.0) / Complex64::new(0.0, 200.0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn adaptive_reports_budget_exhaustion() {
        let r = adaptive(
            |x: f64| (1.0 / x).sin(),
            1e-9,
            1.0,
            &[],
            Adaptive::with_tol(1e-15, 1e-15).budget(200),
        );
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn tanh_sinh_integrates_endpoint_singularities() {
        let r = tanh_sinh(|_x: f64, da: f64, _db: f64| da.powf(-0.5), 0.0, 1.0, 1e-13);
        assert!((r.value - 2.0).abs() < 1e-10, "{}", r.value);
        let r = tanh_sinh(
            |x: f64, _da: f64, db: f64| x * db.ln(),
            0.0,
            1.0,
            1e-13,
        );
        // ∫ x ln(1-x) dx = -3/4
        assert!((r.value + 0.75).abs() < 1e-11, "{}", r.value);
    }
}
