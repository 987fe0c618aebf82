//! Dispersion functionals of a Helmholtz field.
//!
//! h_b(y) = ∫|x|^{2b}|u(x, y)|² dx. For b = 1 it is a quadratic polynomial in y
//! with closed-form coefficients. For 0 < b < 1 it is evaluated either directly
//! from the field or through the double integral of the phased data
//! f(ξ) = F(ξ)e^{2πiy√(k²-ξ²)}:
//!
//! h_b(y) = (ω_b/2) ∬ |f(ξ) - f(η)|² / |ξ - η|^{1+2b} dξ dη.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fieldquad::{spatial_moment, wynn_epsilon, Moment, MomentOptions};
use crate::quad::{adaptive, tanh_sinh, Adaptive};
use crate::scatdata::{regularity_report, weighted_spectral_moment, RegularityReport, ScatteringDensity};
use crate::specfun::{frank_constant, omega, FracOrder};

/// h₁(y) = c0 + c1·y + c2·y².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPolynomial {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl DispersionPolynomial {
    pub fn eval(&self, y: f64) -> f64 {
        self.c0 + y * (self.c1 + y * self.c2)
    }

    /// Position of the minimum, -c1/(2 c2); zero when c2 vanishes.
    pub fn argmin(&self) -> f64 {
        if self.c2 > 0.0 {
            -self.c1 / (2.0 * self.c2)
        } else {
            0.0
        }
    }
}

fn sqrt_band(k: f64, xi: f64) -> f64 {
    ((k - xi) * (k + xi)).max(0.0).sqrt()
}

/// Closed-form coefficients of h₁ from F and F′.
pub fn h1_polynomial(f: &ScatteringDensity) -> Result<DispersionPolynomial> {
    if f.is_zero() {
        return Ok(DispersionPolynomial { c0: 0.0, c1: 0.0, c2: 0.0 });
    }
    if !f.has_derivative() {
        return Err(Error::MissingDerivative);
    }
    if f.support_margin() <= 0.0 {
        return Err(Error::Support {
            what: "h1 coefficients need a positive support margin".into(),
        });
    }
    let scale = f
        .pieces()
        .iter()
        .flat_map(|&(a, c)| (0..=64).map(move |i| a + (c - a) * i as f64 / 64.0))
        .map(|xi| f.eval(xi).norm())
        .fold(0.0, f64::max);
    for &(a, c) in f.pieces() {
        for e in [a, c] {
            if f.eval_unchecked(e).norm() > 1e-8 * scale.max(1e-300) {
                return Err(domain(format!(
                    "F must vanish at the support edge {e} for a finite second moment"
                )));
            }
        }
    }
    let k = f.k();
    let d = |xi: f64| f.eval_derivative(xi).expect("derivative present");
    let opts = Adaptive::with_tol(1e-15, 1e-12);
    let c0 = f.integrate(|xi| d(xi).norm_sqr(), &[], opts)? / (4.0 * PI * PI);
    let c1 = f.integrate(
        |xi| (d(xi).conj() * f.eval_unchecked(xi)).im * xi / sqrt_band(k, xi),
        &[],
        opts,
    )? / PI;
    let c2 = f.integrate(
        |xi| xi * xi * f.eval_unchecked(xi).norm_sqr() / ((k - xi) * (k + xi)),
        &[],
        opts,
    )?;
    Ok(DispersionPolynomial { c0, c1, c2 })
}

/// ∫|x|^{2b}|u(x, y)|² dx from the field itself.
pub fn hb_direct(f: &ScatteringDensity, b: f64, y: f64, opts: &MomentOptions) -> Result<Moment> {
    FracOrder::new(b)?;
    spatial_moment(f, 2.0 * b, y, opts)
}

/// ∫|x|²|u(x, y)|² dx from the field itself.
pub fn h1_direct(f: &ScatteringDensity, y: f64, opts: &MomentOptions) -> Result<Moment> {
    spatial_moment(f, 2.0, y, opts)
}

struct Phased<'a> {
    f: &'a ScatteringDensity,
    k: f64,
    y: f64,
}

impl Phased<'_> {
    fn at(&self, xi: f64) -> Complex64 {
        self.f.eval_unchecked(xi) * Complex64::from_polar(1.0, TAU * self.y * sqrt_band(self.k, xi))
    }

    // largest local frequency (cycles per unit) of the phase on [a, c]
    fn max_frequency(&self, a: f64, c: f64) -> f64 {
        let e = a.abs().max(c.abs());
        self.y.abs() * e / sqrt_band(self.k, e).max(1e-300)
    }
}

const PHASE_PER_PANEL: f64 = 6.0;

fn panels_for(freq: f64, len: f64) -> usize {
    (TAU * freq * len / PHASE_PER_PANEL).ceil() as usize + 2
}

/// ∫∫ over one support piece, written as 2∫dξ ∫_0^{c-ξ} |f(ξ+t) - f(ξ)|² t^{-1-2b} dt.
fn diagonal_block(p: &Phased, b: f64, a: f64, c: f64, amp2: f64) -> Result<f64> {
    let len = c - a;
    let freq = p.max_frequency(a, c);
    let t_split = (0.05 * len).min(0.25 / freq.max(1e-300));
    let inner_opts = Adaptive::with_tol(1e-13 * amp2, 1e-10);
    let mut failure = None;
    let outer = |xi: f64| -> f64 {
        let reach = c - xi;
        if reach <= 0.0 {
            return 0.0;
        }
        let fx = p.at(xi);
        let g = |t: f64| (p.at(xi + t) - fx).norm_sqr() * t.powf(-1.0 - 2.0 * b);
        let t1 = t_split.min(reach);
        // below t_m the difference is |f'|²t² to high relative accuracy and
        // differencing would only return rounding noise
        let t_m = 1e-3 * t1;
        let q = (p.at(xi + t_m) - fx).norm_sqr() / (t_m * t_m);
        let near = q * t_m.powf(2.0 - 2.0 * b) / (2.0 - 2.0 * b)
            + tanh_sinh(|_t: f64, da: f64, _| g(t_m + da), 0.0, t1 - t_m, 1e-10).value;
        let far = if t1 < reach {
            match adaptive(g, t1, reach, &[], inner_opts.panels(panels_for(freq, reach - t1))) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        } else {
            0.0
        };
        near + far
    };
    let res = adaptive(
        outer,
        a,
        c,
        &[],
        Adaptive::with_tol(1e-13 * amp2 * len, 1e-9).panels(panels_for(freq, len)),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * res.value)
}

/// ∫_{I}∫_{J} |f(ξ) - f(η)|²/|ξ - η|^{1+2b} for two separated pieces.
fn cross_block(p: &Phased, b: f64, i: (f64, f64), j: (f64, f64), amp2: f64) -> Result<f64> {
    let fi = p.max_frequency(i.0, i.1);
    let fj = p.max_frequency(j.0, j.1);
    let inner_opts = Adaptive::with_tol(1e-14 * amp2, 1e-10).panels(panels_for(fj, j.1 - j.0));
    let mut failure = None;
    let r = adaptive(
        |xi: f64| {
            let fx = p.at(xi);
            let g = |eta: f64| (fx - p.at(eta)).norm_sqr() * (eta - xi).abs().powf(-1.0 - 2.0 * b);
            match adaptive(g, j.0, j.1, &[], inner_opts) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        i.0,
        i.1,
        &[],
        Adaptive::with_tol(1e-14 * amp2, 1e-9).panels(panels_for(fi, i.1 - i.0)),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value)
}

/// ∫_I |F(ξ)|² ∫_{η outside the support} |ξ - η|^{-1-2b} dη dξ, inner integral in closed form.
fn exterior_block(f: &ScatteringDensity, b: f64, idx: usize) -> f64 {
    let pieces = f.pieces();
    let (a, c) = pieces[idx];
    let two_b = 2.0 * b;
    // complement of the support as intervals (lo, hi), possibly infinite
    let mut gaps = Vec::with_capacity(pieces.len() + 1);
    gaps.push((f64::NEG_INFINITY, pieces[0].0));
    for w in pieces.windows(2) {
        gaps.push((w[0].1, w[1].0));
    }
    gaps.push((pieces[pieces.len() - 1].1, f64::INFINITY));
    let kernel = |near: f64, far: f64| (near.powf(-two_b) - if far.is_finite() { far.powf(-two_b) } else { 0.0 }) / two_b;
    tanh_sinh(
        |xi: f64, da: f64, db: f64| {
            let mass = f.eval_unchecked(xi).norm_sqr();
            if mass == 0.0 {
                return 0.0;
            }
            let mut e = 0.0;
            for &(lo, hi) in &gaps {
                if hi <= a {
                    // gap on the left; the adjacent one ends exactly at a
                    let near = if hi == a { da } else { xi - hi };
                    e += kernel(near, xi - lo);
                } else if lo >= c {
                    let near = if lo == c { db } else { lo - xi };
                    e += kernel(near, hi - xi);
                }
            }
            mass * e
        },
        a,
        c,
        1e-12,
    )
    .value
}

/// h_b(y) from the double integral of the phased data plus the closed-form exterior part.
pub fn hb_frank(f: &ScatteringDensity, b: f64, y: f64) -> Result<f64> {
    FracOrder::new(b)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    if f.support_margin() <= 0.0 {
        return Err(Error::Support {
            what: "h_b needs a positive support margin".into(),
        });
    }
    let p = Phased { f, k: f.k(), y };
    let pieces = f.pieces();
    let amp2 = pieces
        .iter()
        .flat_map(|&(a, c)| (0..=64).map(move |i| a + (c - a) * i as f64 / 64.0))
        .map(|xi| f.eval(xi).norm_sqr())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut total = 0.0;
    for (i, &(a, c)) in pieces.iter().enumerate() {
        total += diagonal_block(&p, b, a, c, amp2)?;
        total += 2.0 * exterior_block(f, b, i);
        for &other in &pieces[i + 1..] {
            total += 2.0 * cross_block(&p, b, (a, c), other, amp2)?;
        }
    }
    Ok(frank_constant(b)? * total)
}

/// Φ(τ), the transform of h_b in y away from τ = 0, as a complex number.
///
/// Φ(τ) = -ω_b ∬ F(ξ)conj(F(η)) |ξ-η|^{-1-2b} δ(τ - g(ξ) + g(η)) dξ dη with
/// g(ξ) = √(k²-ξ²). In the variables v = g(ξ) + g(η) and v = 2k - |τ| - w² each
/// of the four sign branches becomes a smooth integral in w.
pub fn phi_hat_complex(f: &ScatteringDensity, b: f64, tau: f64) -> Result<Complex64> {
    FracOrder::new(b)?;
    let k = f.k();
    if tau == 0.0 || !tau.is_finite() || tau.abs() >= 2.0 * k {
        return Err(domain(format!("0 < |tau| < 2k (got tau = {tau})")));
    }
    let at = tau.abs();
    if f.is_zero() || at >= k {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w_max = (2.0 * (k - at)).sqrt();
    let mut breaks = Vec::new();
    for &(a, c) in f.pieces() {
        for e in [a.abs(), c.abs()] {
            // depth below k at which |ξ| reaches e
            let depth = e * e / (k + sqrt_band(k, e));
            breaks.push((2.0 * depth).sqrt());
            if depth > at {
                breaks.push((2.0 * (depth - at)).sqrt());
            }
        }
    }
    for s in [0.5, 1.0, 2.0, 4.0] {
        breaks.push(s * at.sqrt());
    }
    breaks.retain(|w| *w > 0.0 && *w < w_max);
    let integrand = |w: f64| -> Complex64 {
        let e_small = 0.5 * w * w;
        let e_big = e_small + at;
        let (e_xi, e_eta) = if tau > 0.0 { (e_small, e_big) } else { (e_big, e_small) };
        let ax = (e_xi * (2.0 * k - e_xi)).sqrt();
        let ay = (e_eta * (2.0 * k - e_eta)).sqrt();
        if ax == 0.0 || ay == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let jac = 4.0 * (k - e_xi) * (k - e_eta) / (ax * ay) * 2.0 * w;
        let mut acc = Complex64::new(0.0, 0.0);
        for sx in [-1.0, 1.0] {
            let fx = f.eval(sx * ax);
            if fx == Complex64::new(0.0, 0.0) {
                continue;
            }
            for sy in [-1.0, 1.0] {
                let fy = f.eval(sy * ay);
                let dist = (sx * ax - sy * ay).abs();
                acc += fx * fy.conj() * dist.powf(-1.0 - 2.0 * b);
            }
        }
        acc * jac
    };
    let r = adaptive(integrand, 0.0, w_max, &breaks, Adaptive::with_tol(1e-15, 1e-10).panels(16))?;
    Ok(r.value * (-omega(b)? / 8.0))
}

/// Real part of [`phi_hat_complex`]; the imaginary part vanishes for real or even data.
pub fn phi_hat(f: &ScatteringDensity, b: f64, tau: f64) -> Result<f64> {
    Ok(phi_hat_complex(f, b, tau)?.re)
}

/// The τ → 0 law of Φ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularLimit {
    /// ω_b ∫|ξ|^{2b}|F|²/(k²-ξ²)^b
    pub value: f64,
    /// extrapolation of |τ|^{1+2b}|Φ(τ)| along τ = 2^{-j}, j = 3..10
    pub extrapolated: f64,
    pub samples: Vec<(f64, f64)>,
    /// successive extrapolations differ by more than 5%
    pub unstable: bool,
}

pub fn singular_limit(f: &ScatteringDensity, b: f64) -> Result<SingularLimit> {
    FracOrder::new(b)?;
    let value = omega(b)? * weighted_spectral_moment(f, b, b)?;
    if f.is_zero() {
        return Ok(SingularLimit {
            value: 0.0,
            extrapolated: 0.0,
            samples: Vec::new(),
            unstable: false,
        });
    }
    let mut samples = Vec::new();
    for j in 3..=10 {
        let tau = 2f64.powi(-j);
        let phi = phi_hat_complex(f, b, tau)?;
        samples.push((tau, tau.powf(1.0 + 2.0 * b) * phi.norm()));
    }
    let seq: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let extrapolated = wynn_epsilon(&seq);
    let previous = wynn_epsilon(&seq[..seq.len() - 1]);
    let unstable = (extrapolated - previous).abs() > 0.05 * extrapolated.abs();
    Ok(SingularLimit {
        value,
        extrapolated,
        samples,
        unstable,
    })
}

/// |y|^{-2b} h_b(y) h_b(0) against its large-|y| limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyProduct {
    pub product: f64,
    /// m_singular · m_spatial
    pub predicted_limit: f64,
    /// ω_b · m_singular · m_spatial
    pub stated_limit: f64,
    pub deviation: f64,
}

pub fn uncertainty_product(f: &ScatteringDensity, b: f64, y: f64) -> Result<UncertaintyProduct> {
    let report = regularity_report(f, b)?;
    uncertainty_product_with(f, b, y, &report)
}

/// As [`uncertainty_product`] with a precomputed regularity report.
pub fn uncertainty_product_with(
    f: &ScatteringDensity,
    b: f64,
    y: f64,
    report: &RegularityReport,
) -> Result<UncertaintyProduct> {
    if y == 0.0 {
        return Err(domain("uncertainty product needs y != 0"));
    }
    let predicted_limit = report.m_singular * report.m_spatial;
    if predicted_limit == 0.0 {
        return Err(Error::Degenerate {
            what: "predicted limit is zero".into(),
        });
    }
    let product = y.abs().powf(-2.0 * b) * hb_frank(f, b, y)? * hb_frank(f, b, 0.0)?;
    Ok(UncertaintyProduct {
        product,
        predicted_limit,
        stated_limit: omega(b)? * predicted_limit,
        deviation: (product / predicted_limit - 1.0).abs(),
    })
}

/// The y-independent norms entering the upper bound for h_b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBoundTerms {
    pub k: f64,
    pub b: f64,
    /// ‖F‖²
    pub l2: f64,
    /// ‖|x|^b u₀‖²
    pub m_spatial: f64,
    /// ‖|ξ|^b F/√(k²-ξ²)‖²
    pub m_spectral: f64,
    /// ‖F/(k²-ξ²)^{b/2}‖²
    pub edge_weighted: f64,
}

impl UpperBoundTerms {
    pub fn new(f: &ScatteringDensity, b: f64) -> Result<Self> {
        let report = regularity_report(f, b)?;
        Ok(Self {
            k: f.k(),
            b,
            l2: f.l2_norm_sq()?,
            m_spatial: report.m_spatial,
            m_spectral: report.m_spectral,
            edge_weighted: if f.is_zero() { 0.0 } else { weighted_spectral_moment(f, 0.0, b)? },
        })
    }

    /// (1+|y|^b)‖F‖² + ‖|x|^b u₀‖² + k²(1+|y|^b)‖|ξ|^b F/√(k²-ξ²)‖²
    pub fn displayed(&self, y: f64) -> f64 {
        let g = 1.0 + y.abs().powf(self.b);
        g * self.l2 + self.m_spatial + self.k * self.k * g * self.m_spectral
    }

    /// [`Self::displayed`] plus (k|y|)^{2b}‖F/(k²-ξ²)^{b/2}‖², the square of the
    /// leading multiplier term.
    pub fn rhs(&self, y: f64) -> f64 {
        self.displayed(y) + (self.k * y.abs()).powf(2.0 * self.b) * self.edge_weighted
    }
}

/// Right side of the upper bound for h_b(y), up to a constant depending on b.
pub fn hb_upper_bound_rhs(f: &ScatteringDensity, b: f64, y: f64) -> Result<f64> {
    Ok(UpperBoundTerms::new(f, b)?.rhs(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_everywhere() {
        let z = ScatteringDensity::zero(2.0).unwrap();
        assert_eq!(h1_polynomial(&z).unwrap(), DispersionPolynomial { c0: 0.0, c1: 0.0, c2: 0.0 });
        assert_eq!(hb_frank(&z, 0.5, 3.0).unwrap(), 0.0);
        assert_eq!(phi_hat(&z, 0.5, 0.3).unwrap(), 0.0);
        assert_eq!(singular_limit(&z, 0.5).unwrap().value, 0.0);
        assert!(matches!(uncertainty_product(&z, 0.5, 2.0), Err(Error::Degenerate { .. })));
        assert_eq!(hb_upper_bound_rhs(&z, 0.5, 7.0).unwrap(), 0.0);
        assert_eq!(hb_direct(&z, 0.5, 1.0, &MomentOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn parabola_coefficients() {
        let f = ScatteringDensity::parabola(2.0).unwrap();
        let p = h1_polynomial(&f).unwrap();
        // (1/4π²)∫4ξ² = 2/(3π²)
        assert!((p.c0 - 2.0 / (3.0 * PI * PI)).abs() < 1e-13);
        assert_eq!(p.c1, 0.0);
        // ∫ξ²(1-ξ²)²/(4-ξ²) on (-1,1), mpmath
        assert!((p.c2 - 0.041_687_862_7).abs() < 1e-9, "{}", p.c2);
    }

    #[test]
    fn h1_rejects_missing_derivative_and_edge_values() {
        let f = ScatteringDensity::indicator(2.0, -1.0, 1.0).unwrap();
        assert!(matches!(h1_polynomial(&f), Err(Error::MissingDerivative)));
    }

    #[test]
    fn chirp_shifts_the_minimum() {
        let f = ScatteringDensity::chirped_bump(2.0, 0.0, 1.0, 0.5).unwrap();
        let p = h1_polynomial(&f).unwrap();
        assert!(p.c1.abs() > 1e-3);
        assert!(p.c1.abs() <= 2.0 * (p.c0 * p.c2).sqrt());
        let g = ScatteringDensity::bump(2.0, 0.0, 1.0).unwrap();
        let q = h1_polynomial(&g).unwrap();
        assert_eq!(q.c1, 0.0);
        assert_eq!(q.argmin(), 0.0);
    }

    #[test]
    fn conjugate_reflection_flips_height() {
        let f = ScatteringDensity::chirped_bump(2.0, 0.3, 0.9, 0.4).unwrap();
        let g = f.conj_reflected();
        for y in [0.0, 1.5] {
            let a = hb_frank(&f, 0.4, y).unwrap();
            // conjugate reflection reverses the direction of propagation
            let c = hb_frank(&g, 0.4, -y).unwrap();
            assert!((a - c).abs() < 1e-8 * a, "{a} {c}");
        }
    }

    #[test]
    fn phi_is_even_for_real_data_and_rejects_bad_tau() {
        let f = ScatteringDensity::bump(2.0, 0.2, 0.9).unwrap();
        for tau in [0.02, 0.1, 0.25] {
            let a = phi_hat(&f, 0.5, tau).unwrap();
            let c = phi_hat(&f, 0.5, -tau).unwrap();
            assert!(a < 0.0 && (a - c).abs() < 1e-9 * a.abs(), "{tau}: {a} {c}");
        }
        assert!(phi_hat(&f, 0.5, 0.0).is_err());
        assert!(phi_hat(&f, 0.5, 4.0).is_err());
        assert_eq!(phi_hat(&f, 0.5, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn singular_limit_of_indicator() {
        let f = ScatteringDensity::indicator(2.0, -1.0, 1.0).unwrap();
        let s = singular_limit(&f, 0.5).unwrap();
        // ω_{1/2}·2(2 - √3)
        assert!((s.value - 0.027_148_929_3).abs() < 1e-9, "{}", s.value);
    }

    #[test]
    fn upper_bound_grows_with_height() {
        let f = ScatteringDensity::bump(2.0, 0.0, 1.0).unwrap();
        let t = UpperBoundTerms::new(&f, 0.5).unwrap();
        let mut last = 0.0;
        for y in [0.0, 0.5, 1.0, 4.0, 30.0] {
            let v = t.rhs(y);
            assert!(v >= last);
            assert!(t.displayed(y) <= v);
            last = v;
        }
    }
}
