//! Dispersion of mollified periodic data F^ε = ε^{-1/2} Σ F(n) φ((ξ - n)/ε).
//!
//! For b = 1 the dispersion splits into a blow-up term of order ε^{-2} and a
//! stable quadratic in y. For 0 < b < 1 it splits into the diagonal part S_b^ε
//! and an off-diagonal part built from R_b^ε, which tends to
//! R_b(y) = -2ω_b Σ_{n≠m} F(n)conj(F(m)) e^{2πiy(g_n - g_m)} / |n - m|^{1+2b},
//! g_n = √(k² - n²).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::dispersion::{h1_polynomial, hb_frank};
use crate::error::{domain, Error, Result};
use crate::measure::AtomicMeasure;
use crate::quad::GaussLegendre;
use crate::scatdata::{mollify, AtomicSpectrum, BumpProfile, NormMode};
use crate::specfun::{omega, FracOrder};

pub const ATOM_MERGE_TOL: f64 = 1e-12;
const CELL_RULE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicDecomposition {
    /// c_φ Σ|F(n)|² / (4π²ε²)
    pub singular_value: f64,
    /// y² Σ|F(n)|² n²/(k² - n²)
    pub stable_value: f64,
    /// h₁(y) of the mollified data
    pub total: f64,
    pub eps: f64,
    pub b: f64,
}

impl PeriodicDecomposition {
    /// total - singular_value, the part that should approach stable_value.
    pub fn remainder(&self) -> f64 {
        self.total - self.singular_value
    }
}

fn band(k: f64, xi: f64) -> f64 {
    ((k - xi) * (k + xi)).sqrt()
}

/// b = 1 decomposition of the dispersion of mollified data at height y.
pub fn h1_periodic_decompose(
    atoms: &AtomicSpectrum,
    bump: &BumpProfile,
    eps: f64,
    y: f64,
) -> Result<PeriodicDecomposition> {
    bump.require(NormMode::UnitL2)?;
    let f = mollify(atoms, bump, eps)?;
    let total = h1_polynomial(&f)?.eval(y);
    let k = atoms.k();
    let singular_value = bump.c_phi() * atoms.l2_sq() / (4.0 * PI * PI * eps * eps);
    let stable_value = y * y
        * atoms
            .iter()
            .map(|(n, c)| {
                let n = n as f64;
                c.norm_sqr() * n * n / ((k - n) * (k + n))
            })
            .sum::<f64>();
    Ok(PeriodicDecomposition {
        singular_value,
        stable_value,
        total,
        eps,
        b: 1.0,
    })
}

/// S_b^ε(y): the sum over atoms of the dispersion of each mollified atom alone.
///
/// Each term is ε^{-2b}|F(n)|² ∫|x|^{2b}|∫φ(η)e^{2πi(xη + y√(k²-(n+εη)²))}dη|²dx,
/// evaluated through the double-integral representation so no x-window is needed.
pub fn singular_part(atoms: &AtomicSpectrum, bump: &BumpProfile, eps: f64, b: f64, y: f64) -> Result<f64> {
    bump.require(NormMode::UnitIntegral)?;
    FracOrder::new(b)?;
    // validates eps, overlap and band for the whole set once
    mollify(atoms, bump, eps)?;
    let mut total = 0.0;
    for (n, c) in atoms.iter() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let single = AtomicSpectrum::new(atoms.k(), [(n, c)])?;
        total += hb_frank(&mollify(&single, bump, eps)?, b, y)?;
    }
    Ok(total)
}

fn check_regular_eps(atoms: &AtomicSpectrum, bump: &BumpProfile, eps: f64) -> Result<()> {
    bump.require(NormMode::UnitIntegral)?;
    if !(eps > 0.0) {
        return Err(domain(format!("eps must be positive (got {eps})")));
    }
    if eps >= 0.25 {
        return Err(Error::Overlap {
            width: 4.0 * eps,
            spacing: 1.0,
        });
    }
    if let Some(n) = atoms.max_abs_n() {
        let reach = n as f64 + eps * bump.radius();
        if reach >= atoms.k() {
            return Err(Error::Support {
                what: format!("mollified atoms reach {reach} with k = {}", atoms.k()),
            });
        }
    }
    Ok(())
}

/// R_b^ε(y) before taking the real part.
///
/// -(2ω_b/ε²) Σ_{n≠m} F(n)conj(F(m)) ∬ φ((ξ-n)/ε)φ((η-m)/ε) e^{2πiy(g(ξ)-g(η))} / |ξ-η|^{1+2b},
/// each cell by a fixed 32×32 Gauss rule in the bump variables.
pub fn regular_part_eps_complex(
    atoms: &AtomicSpectrum,
    bump: &BumpProfile,
    eps: f64,
    b: f64,
    y: f64,
) -> Result<Complex64> {
    FracOrder::new(b)?;
    check_regular_eps(atoms, bump, eps)?;
    let k = atoms.k();
    let r = bump.radius();
    let gl = GaussLegendre::new(CELL_RULE);
    let nodes: Vec<(f64, f64)> = gl.mapped(-r, r).map(|(s, w)| (s, w * bump.value(s))).collect();
    let list: Vec<(i64, Complex64)> = atoms.iter().collect();
    let phased: Vec<Vec<Complex64>> = list
        .iter()
        .map(|&(n, _)| {
            nodes
                .iter()
                .map(|&(s, w)| Complex64::from_polar(w, TAU * y * band(k, n as f64 + eps * s)))
                .collect()
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, &(n, cn)) in list.iter().enumerate() {
        for (j, &(m, cm)) in list.iter().enumerate() {
            if i == j {
                continue;
            }
            let gap = (n - m) as f64;
            let mut cell = Complex64::new(0.0, 0.0);
            for (a, &(s, _)) in nodes.iter().enumerate() {
                let pa = phased[i][a];
                let mut row = Complex64::new(0.0, 0.0);
                for (bi, &(t, _)) in nodes.iter().enumerate() {
                    let d = (gap + eps * (s - t)).abs();
                    row += phased[j][bi].conj() * d.powf(-1.0 - 2.0 * b);
                }
                cell += pa * row;
            }
            total += cn * cm.conj() * cell;
        }
    }
    Ok(total * (-2.0 * omega(b)?))
}

/// Real part of [`regular_part_eps_complex`].
pub fn regular_part_eps(atoms: &AtomicSpectrum, bump: &BumpProfile, eps: f64, b: f64, y: f64) -> Result<f64> {
    Ok(regular_part_eps_complex(atoms, bump, eps, b, y)?.re)
}

/// R_b(y) summed exactly over the finite atom set, before taking the real part.
pub fn regular_limit_complex(atoms: &AtomicSpectrum, b: f64, y: f64) -> Result<Complex64> {
    FracOrder::new(b)?;
    let k = atoms.k();
    let list: Vec<(i64, Complex64)> = atoms.iter().collect();
    let mut total = Complex64::new(0.0, 0.0);
    for &(n, cn) in &list {
        for &(m, cm) in &list {
            if n == m {
                continue;
            }
            let tau = tau_nm(k, n, m);
            total += cn * cm.conj() * Complex64::from_polar(((n - m) as f64).abs().powf(-1.0 - 2.0 * b), TAU * tau * y);
        }
    }
    Ok(total * (-2.0 * omega(b)?))
}

pub fn regular_limit(atoms: &AtomicSpectrum, b: f64, y: f64) -> Result<f64> {
    Ok(regular_limit_complex(atoms, b, y)?.re)
}

/// √(k²-n²) - √(k²-m²) without cancellation.
pub fn tau_nm(k: f64, n: i64, m: i64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (m * m - n * n) / (band(k, n) + band(k, m))
}

/// Fourier atoms of R_b: weight -2ω_b F(n)conj(F(m))/|n-m|^{1+2b} at τ_nm,
/// coincident locations merged, real parts kept.
pub fn rb_hat_atoms(atoms: &AtomicSpectrum, b: f64) -> Result<AtomicMeasure> {
    let om = omega(b)?;
    let k = atoms.k();
    let list: Vec<(i64, Complex64)> = atoms.iter().collect();
    let mut raw: Vec<(f64, Complex64)> = Vec::new();
    for &(n, cn) in &list {
        for &(m, cm) in &list {
            if n != m {
                let w = cn * cm.conj() * (-2.0 * om * ((n - m) as f64).abs().powf(-1.0 - 2.0 * b));
                raw.push((tau_nm(k, n, m), w));
            }
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, Complex64)> = Vec::new();
    for (loc, w) in raw {
        match merged.last_mut() {
            Some(last) if (loc - last.0).abs() <= ATOM_MERGE_TOL => last.1 += w,
            _ => merged.push((loc, w)),
        }
    }
    AtomicMeasure::new(
        format!("R_b hat (b={b}, k={k})"),
        merged.into_iter().map(|(l, w)| (l, w.re)).collect(),
    )
}

/// 2^{1+2b}·2ω_b·Σ_{n≠m}|F(n)F(m)|/|n-m|^{1+2b}
pub fn l1_bound(atoms: &AtomicSpectrum, b: f64) -> Result<f64> {
    let om = omega(b)?;
    let list: Vec<(i64, Complex64)> = atoms.iter().collect();
    let mut s = 0.0;
    for &(n, cn) in &list {
        for &(m, cm) in &list {
            if n != m {
                s += cn.norm() * cm.norm() * ((n - m) as f64).abs().powf(-1.0 - 2.0 * b);
            }
        }
    }
    Ok(2f64.powf(1.0 + 2.0 * b) * 2.0 * om * s)
}

/// A fraction p/q with q ≤ q_max and |x/y - p/q| ≤ tol, if there is one.
pub fn rational_ratio(x: f64, y: f64, q_max: u64, tol: f64) -> Option<(i64, u64)> {
    if y == 0.0 {
        return None;
    }
    let r = x / y;
    (1..=q_max).find_map(|q| {
        let p = (r * q as f64).round();
        ((r - p / q as f64).abs() <= tol).then_some((p as i64, q))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comb5() -> AtomicSpectrum {
        AtomicSpectrum::truncated_comb(2.5, 2).unwrap()
    }

    #[test]
    fn stable_value_of_the_five_atom_comb() {
        let bump = BumpProfile::standard(NormMode::UnitL2);
        let d = h1_periodic_decompose(&comb5(), &bump, 0.05, 1.0).unwrap();
        assert!((d.stable_value - 3.936_507_936_507_936).abs() < 1e-12);
        let single = AtomicSpectrum::new(2.5, [(0, Complex64::new(1.0, 0.0))]).unwrap();
        assert_eq!(h1_periodic_decompose(&single, &bump, 0.05, 3.0).unwrap().stable_value, 0.0);
        assert_eq!(h1_periodic_decompose(&comb5(), &bump, 0.05, 0.0).unwrap().stable_value, 0.0);
    }

    #[test]
    fn modes_are_enforced() {
        let l2 = BumpProfile::standard(NormMode::UnitL2);
        let int = BumpProfile::standard(NormMode::UnitIntegral);
        assert!(h1_periodic_decompose(&comb5(), &int, 0.1, 1.0).is_err());
        assert!(regular_part_eps(&comb5(), &l2, 0.1, 0.5, 1.0).is_err());
        assert!(singular_part(&comb5(), &l2, 0.1, 0.5, 1.0).is_err());
        assert!(matches!(regular_part_eps(&comb5(), &int, 0.25, 0.5, 1.0), Err(Error::Overlap { .. })));
    }

    #[test]
    fn two_atom_limits() {
        let one = Complex64::new(1.0, 0.0);
        let a = AtomicSpectrum::new(100.0, [(0, one), (1, one)]).unwrap();
        let om = omega(0.5).unwrap();
        assert!((regular_limit(&a, 0.5, 0.0).unwrap() + 4.0 * om).abs() < 1e-15);
        let hat = rb_hat_atoms(&a, 0.5).unwrap();
        assert_eq!(hat.len(), 2);
        // √10000 - √9999
        assert!((hat.atoms()[1].0 - 0.005_000_125_006_250_782).abs() < 1e-15);
        assert!((hat.atoms()[0].1 + 2.0 * om).abs() < 1e-15);
        assert!((l1_bound(&a, 0.5).unwrap() - 16.0 * om).abs() < 1e-14);
        let single = AtomicSpectrum::new(3.0, [(1, one)]).unwrap();
        assert!(rb_hat_atoms(&single, 0.5).unwrap().is_empty());
        assert_eq!(l1_bound(&single, 0.5).unwrap(), 0.0);
        let bump = BumpProfile::standard(NormMode::UnitIntegral);
        assert_eq!(regular_part_eps(&single, &bump, 0.1, 0.5, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn conjugate_pairs_merge() {
        let hat = rb_hat_atoms(&comb5(), 0.5).unwrap();
        // 20 ordered pairs, (n,m) and (-n,-m) share a location
        assert!(hat.len() < 20);
        let om = omega(0.5).unwrap();
        let direct: f64 = (-2..=2i64)
            .flat_map(|n| (-2..=2i64).map(move |m| (n, m)))
            .filter(|(n, m)| n != m)
            .map(|(n, m)| 2.0 * om / ((n - m) as f64).abs().powi(2))
            .sum();
        assert!((hat.total_variation() - direct).abs() < 1e-14);
    }

    #[test]
    fn regular_part_is_bounded_and_close_to_its_limit() {
        let bump = BumpProfile::standard(NormMode::UnitIntegral);
        let bound = l1_bound(&comb5(), 0.5).unwrap();
        for y in [0.0, 0.3, 0.9] {
            let r = regular_part_eps(&comb5(), &bump, 1.0 / 64.0, 0.5, y).unwrap();
            let lim = regular_limit(&comb5(), 0.5, y).unwrap();
            assert!(r.abs() <= bound);
            assert!((r - lim).abs() < 1e-2 * lim.abs(), "{y}: {r} {lim}");
        }
    }

    #[test]
    fn decomposition_reassembles_the_dispersion() {
        // with the ω_b/2 double-integral constant the off-diagonal part is (ε/2)·R_b^ε
        let bump = BumpProfile::standard(NormMode::UnitIntegral);
        let atoms = comb5();
        let eps = 0.125;
        for y in [0.0, 0.6] {
            let whole = hb_frank(&mollify(&atoms, &bump, eps).unwrap(), 0.5, y).unwrap();
            let s = singular_part(&atoms, &bump, eps, 0.5, y).unwrap();
            let r = regular_part_eps(&atoms, &bump, eps, 0.5, y).unwrap();
            assert!((whole - s - 0.5 * eps * r).abs() < 1e-7 * whole, "{y}: {whole} {s} {r}");
        }
    }

    #[test]
    fn singular_part_scales_exactly_at_height_zero() {
        let bump = BumpProfile::standard(NormMode::UnitIntegral);
        let a = singular_part(&comb5(), &bump, 0.1, 0.5, 0.0).unwrap() * 0.1;
        let c = singular_part(&comb5(), &bump, 0.05, 0.5, 0.0).unwrap() * 0.05;
        assert!((a - c).abs() < 1e-8 * a);
        let empty = AtomicSpectrum::new(2.5, []).unwrap();
        assert_eq!(singular_part(&empty, &bump, 0.1, 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn rational_ratio_finds_only_small_denominators() {
        assert_eq!(rational_ratio(1.5, 1.0, 50, 1e-12), Some((3, 2)));
        assert_eq!(rational_ratio(2f64.sqrt(), 1.0, 50, 1e-9), None);
        let k = 10.0;
        let t1 = tau_nm(k, 0, 1);
        let t2 = tau_nm(k, 0, 2);
        assert_eq!(rational_ratio(t1, t2, 50, 1e-9), None);
    }
}
