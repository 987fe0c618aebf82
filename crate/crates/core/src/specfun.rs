//! Real Gamma, Riemann zeta on (1, ∞) and the dispersion constant ω_b.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Order of a fractional derivative, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(b: f64) -> Result<Self> {
        if b > 0.0 && b < 1.0 {
            Ok(Self(b))
        } else {
            Err(domain(format!("0 < b < 1 (got b = {b})")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    let (r, sign) = if r > 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

fn lanczos_sum(z: f64) -> f64 {
    // z = x - 1
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    a
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && (x - x.round()).abs() < 1e-12
}

/// Γ(x) for real x away from the non-positive integers.
pub fn gamma_real(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(domain("gamma argument is NaN"));
    }
    if is_pole(x) {
        return Err(Error::Pole { x });
    }
    if x < 0.5 {
        // reflection
        let s = sin_pi(x);
        return Ok(PI / (s * gamma_real(1.0 - x)?));
    }
    if x == x.round() && x <= 171.0 {
        let mut f = 1.0;
        for i in 2..(x as u64) {
            f *= i as f64;
        }
        return Ok(f);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain(format!("ln_gamma needs x > 0 (got {x})")));
    }
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos form in its accurate range
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

// Stieltjes constants γ_0..γ_4 for the Laurent expansion around s = 1.
const STIELTJES: [f64; 5] = [
    0.577_215_664_901_532_9,
    -0.072_815_845_483_676_7,
    -0.009_690_363_192_872_3,
    0.002_053_834_420_303_4,
    0.002_325_370_065_467_3,
];

/// Riemann ζ(s) for real s > 1.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(domain(format!("zeta needs s > 1 (got s = {s})")));
    }
    let d = s - 1.0;
    if d < 1e-3 {
        let mut sum = 1.0 / d;
        let mut pow = 1.0;
        let mut fact = 1.0;
        for (n, g) in STIELTJES.iter().enumerate() {
            if n > 0 {
                pow *= -d;
                fact *= n as f64;
            }
            sum += g * pow / fact;
        }
        return Ok(sum);
    }
    if s > 60.0 {
        return Ok(1.0 + 2f64.powf(-s) + 3f64.powf(-s));
    }
    Ok(eta_borwein(s) / (1.0 - 2f64.powf(1.0 - s)))
}

// Borwein's accelerated alternating series for the Dirichlet eta function.
#[allow(clippy::needless_range_loop)]
fn eta_borwein(s: f64) -> f64 {
    const N: usize = 40;
    let mut d = [0.0f64; N + 1];
    let mut term = 1.0 / N as f64; // i = 0 term of the inner sum, before the factor n
    let mut acc = term;
    d[0] = N as f64 * acc;
    for i in 1..=N {
        let fi = i as f64;
        let n = N as f64;
        // ratio of consecutive (n+i-1)! 4^i / ((n-i)! (2i)!)
        term *= (n + fi - 1.0) * 4.0 * (n - fi + 1.0) / ((2.0 * fi - 1.0) * (2.0 * fi));
        acc += term;
        d[i] = n * acc;
    }
    let dn = d[N];
    let mut sum = 0.0;
    for k in 0..N {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) / ((k + 1) as f64).powf(s);
    }
    -sum / dn
}

/// ω_b = 2/(2π)^{2b} · Γ(2b)/(Γ(b)|Γ(-b)|), evaluated in log space.
pub fn omega(b: f64) -> Result<f64> {
    let b = FracOrder::new(b)?.get();
    // |Γ(-b)| = Γ(1 - b) / b
    let ln_abs_gamma_neg = ln_gamma(1.0 - b)? - b.ln();
    let ln = 2f64.ln() - 2.0 * b * (2.0 * PI).ln() + ln_gamma(2.0 * b)? - ln_gamma(b)? - ln_abs_gamma_neg;
    Ok(ln.exp())
}

/// Constant in ∫|x|^{2b}|f̂(x)|²dx = c·∬|f(ξ)-f(η)|²/|ξ-η|^{1+2b} dξdη for the
/// transform with kernel e^{-2πixξ}. It is ω_b/2.
pub fn frank_constant(b: f64) -> Result<f64> {
    Ok(0.5 * omega(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_real(5.0).unwrap(), 24.0);
        assert!(rel(gamma_real(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma_real(-0.25).unwrap(), -4.901_666_809_860_711) < 1e-12);
        assert!(rel(gamma_real(0.75).unwrap(), 1.225_416_702_465_177_6) < 1e-13);
        assert!(rel(gamma_real(30.5).unwrap(), 4.822_696_933_490_909e31) < 1e-12);
        assert!(rel(gamma_real(-7.3).unwrap(), 4.183_878_730_135_48e-4) < 1e-11);
    }

    #[test]
    fn gamma_poles_are_rejected() {
        for x in [0.0, -1.0, -2.0, -17.0] {
            assert!(matches!(gamma_real(x), Err(Error::Pole { .. })));
        }
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for x in [0.01, 0.3, 1.7, 4.2, 25.0] {
            assert!((ln_gamma(x).unwrap() - gamma_real(x).unwrap().ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn zeta_values() {
        assert!(rel(zeta(2.0).unwrap(), PI * PI / 6.0) < 1e-13);
        assert!(rel(zeta(4.0).unwrap(), PI.powi(4) / 90.0) < 1e-13);
        assert!(rel(zeta(2.5).unwrap(), 1.341_487_257_250_917_3) < 1e-12);
        assert!(rel(zeta(1.0001).unwrap(), 10_000.577_222_947_54) < 1e-12);
        assert!(rel(zeta(1.01).unwrap(), 100.577_943_338_496_78) < 1e-11);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn omega_values() {
        assert!((omega(0.5).unwrap() - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
        assert!((omega(0.25).unwrap() - 0.079_577_471_545_947_67).abs() < 1e-12);
        assert!(omega(1.0).is_err() && omega(0.0).is_err());
    }
}
