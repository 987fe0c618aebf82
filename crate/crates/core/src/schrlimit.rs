//! The Schrödinger limit of the periodic regular part.
//!
//! In time, h_{b,per}(2t) = Σ_{p/q} -ω_b ζ(2+2b) a_b(q) q^{-2-2b} δ(t - p/q).
//! In frequency, its atoms sit at r/2 with weight -2ω_b α_b(r). The rescaled
//! Helmholtz measures 𝓡_b^{(k)} converge to the frequency side in a weighted
//! Sobolev norm as k → ∞.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::measure::{fmt17, AtomicMeasure};
use crate::periodic::tau_nm;
use crate::quad::GaussLegendre;
use crate::specfun::{omega, zeta, FracOrder};

/// a_b(q): 1 for odd q, 2 - 2^{2+2b} for q ≡ 2 mod 4, 2^{2+2b} for 4 | q.
pub fn coeff_a(q: u64, b: f64) -> Result<f64> {
    FracOrder::new(b)?;
    if q == 0 {
        return Err(domain("a_b(q) needs q >= 1"));
    }
    let p = 2f64.powf(2.0 + 2.0 * b);
    Ok(match q % 4 {
        1 | 3 => 1.0,
        2 => 2.0 - p,
        _ => p,
    })
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// α_b(r): 2Σ_{d|r} d^{-1-2b} for odd r, 2^{-2b}Σ_{4d|r} d^{-1-2b} for 4 | r, else 0.
pub fn coeff_alpha(r: i64, b: f64) -> Result<f64> {
    FracOrder::new(b)?;
    if r == 0 {
        return Err(domain("alpha_b(r) needs r != 0"));
    }
    let n = r.unsigned_abs();
    let e = -1.0 - 2.0 * b;
    Ok(if n % 2 == 1 {
        2.0 * divisors(n).iter().map(|&d| (d as f64).powf(e)).sum::<f64>()
    } else if n.is_multiple_of(4) {
        2f64.powf(-2.0 * b) * divisors(n / 4).iter().map(|&d| (d as f64).powf(e)).sum::<f64>()
    } else {
        0.0
    })
}

/// Σ 1/|n-m|^{1+2b} over integer pairs |n|, |m| ≤ N with n² - m² = r.
pub fn alpha_bruteforce(r: i64, b: f64, n_max: i64) -> Result<f64> {
    FracOrder::new(b)?;
    if n_max < r.abs() {
        return Err(domain(format!("alpha_bruteforce needs N >= |r| (N = {n_max}, r = {r})")));
    }
    let e = -1.0 - 2.0 * b;
    let mut s = 0.0;
    for n in -n_max..=n_max {
        let t = n * n - r;
        if t < 0 {
            continue;
        }
        let root = (t as f64).sqrt().round() as i64;
        if root * root != t || root > n_max {
            continue;
        }
        for m in if root == 0 { vec![0] } else { vec![root, -root] } {
            if m != n {
                s += ((n - m).abs() as f64).powf(e);
            }
        }
    }
    Ok(s)
}

/// Reduced fractions p/q in [0, 1) with q ≤ q_max, in increasing order.
///
/// In-order walk of the Stern–Brocot tree between 0/1 and 1/1.
pub fn farey(q_max: u64) -> Vec<(u64, u64)> {
    enum Step {
        Visit((u64, u64), (u64, u64)),
        Emit((u64, u64)),
    }
    let mut out = vec![(0, 1)];
    let mut stack = vec![Step::Visit((0, 1), (1, 1))];
    while let Some(step) = stack.pop() {
        match step {
            Step::Emit(m) => out.push(m),
            Step::Visit(l, r) => {
                let m = (l.0 + r.0, l.1 + r.1);
                if m.1 <= q_max {
                    stack.push(Step::Visit(m, r));
                    stack.push(Step::Emit(m));
                    stack.push(Step::Visit(l, m));
                }
            }
        }
    }
    out
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalAtom {
    pub p: i64,
    pub q: u64,
    pub weight: f64,
}

impl RationalAtom {
    pub fn t(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// Atoms of h_{b,per}(2t) in the t variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalAtomSet {
    pub b: f64,
    pub q_max: u64,
    pub window: (f64, f64),
    pub atoms: Vec<RationalAtom>,
}

impl RationalAtomSet {
    pub fn as_measure(&self) -> AtomicMeasure {
        AtomicMeasure::new(
            format!("h_per(2t) atoms (b={}, q_max={})", self.b, self.q_max),
            self.atoms.iter().map(|a| (a.t(), a.weight)).collect(),
        )
        .expect("finite atoms")
    }

    /// The same distribution as a function of s = 2t: δ(t - p/q) = 2δ(s - 2p/q).
    pub fn in_doubled_time(&self) -> AtomicMeasure {
        AtomicMeasure::new(
            format!("h_per(s) atoms (b={}, q_max={})", self.b, self.q_max),
            self.atoms.iter().map(|a| (2.0 * a.t(), 2.0 * a.weight)).collect(),
        )
        .expect("finite atoms")
    }

    /// Σ weight over the atoms with t in [0, 1), the mean of h_{b,per} over a period.
    pub fn period_mass(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.p >= 0 && (a.p as u64) < a.q)
            .map(|a| a.weight)
            .sum()
    }

    /// CSV "t,weight" with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,weight\n");
        for a in &self.atoms {
            s.push_str(&fmt17(a.t()));
            s.push(',');
            s.push_str(&fmt17(a.weight));
            s.push('\n');
        }
        s
    }
}

/// Time atoms p/q in [lo, hi) with q ≤ q_max and weight -ω_b ζ(2+2b) a_b(q)/q^{2+2b}.
pub fn hbper_time_atoms(b: f64, q_max: u64, window: (f64, f64)) -> Result<RationalAtomSet> {
    FracOrder::new(b)?;
    if q_max < 1 {
        return Err(domain("q_max >= 1"));
    }
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(domain(format!("window needs lo < hi (got {lo}, {hi})")));
    }
    let base = -omega(b)? * zeta(2.0 + 2.0 * b)?;
    let fr = farey(q_max);
    let mut atoms = Vec::new();
    for shift in (lo.floor() as i64)..=(hi.ceil() as i64) {
        for &(p, q) in &fr {
            let pp = shift * q as i64 + p as i64;
            let t = pp as f64 / q as f64;
            if t >= lo && t < hi {
                let w = base * coeff_a(q, b)? * (q as f64).powf(-2.0 - 2.0 * b);
                atoms.push(RationalAtom { p: pp, q, weight: w });
            }
        }
    }
    Ok(RationalAtomSet {
        b,
        q_max,
        window,
        atoms,
    })
}

/// Frequency atoms -2ω_b α_b(r) at r/2, 0 < |r| ≤ r_max, zero weights omitted.
pub fn hbper_freq_atoms(b: f64, r_max: u64) -> Result<AtomicMeasure> {
    let om = omega(b)?;
    if r_max < 1 {
        return Err(domain("r_max >= 1"));
    }
    let mut atoms = Vec::new();
    for r in 1..=r_max as i64 {
        let a = coeff_alpha(r, b)?;
        if a != 0.0 {
            atoms.push((0.5 * r as f64, -2.0 * om * a));
            atoms.push((-0.5 * r as f64, -2.0 * om * a));
        }
    }
    AtomicMeasure::new(format!("h_per hat (b={b}, r_max={r_max})"), atoms)
}

pub const PAIR_BUDGET: usize = 50_000_000;

/// ⌊k^{1/2 - ε}⌋, the cut-off of the rescaled data.
pub fn rescaled_cutoff(k: f64, eps_exp: f64) -> i64 {
    k.powf(0.5 - eps_exp).floor() as i64
}

/// Atoms of 𝓡_b^{(k)}: k(√(k²-n²) - √(k²-m²)) with weight -2ω_b/|n-m|^{1+2b}
/// for n ≠ m, |n|, |m| ≤ k^{1/2-ε}.
pub fn rescaled_rk_atoms(b: f64, k: f64, eps_exp: f64) -> Result<AtomicMeasure> {
    let om = omega(b)?;
    if !(k >= 10.0 && k.is_finite()) {
        return Err(domain(format!("k >= 10 (got {k})")));
    }
    if !(eps_exp > 0.0 && eps_exp < 0.5) {
        return Err(domain(format!("0 < eps_exp < 1/2 (got {eps_exp})")));
    }
    let n_max = rescaled_cutoff(k, eps_exp);
    let m = (2 * n_max + 1) as usize;
    let count = m * (m - 1);
    if count > PAIR_BUDGET {
        return Err(Error::Budget {
            count,
            budget: PAIR_BUDGET,
        });
    }
    let mut atoms = Vec::with_capacity(count);
    for n in -n_max..=n_max {
        for mm in -n_max..=n_max {
            if n != mm {
                atoms.push((k * tau_nm(k, n, mm), -2.0 * om * ((n - mm).abs() as f64).powf(-1.0 - 2.0 * b)));
            }
        }
    }
    AtomicMeasure::merged(format!("rescaled R_b^(k) (b={b}, k={k}, eps={eps_exp})"), atoms, 1e-9 * k)
}

/// Parameters of the weighted Sobolev distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevParams {
    s: f64,
}

impl SobolevParams {
    pub fn new(s: f64) -> Result<Self> {
        if s < -0.5 {
            Ok(Self { s })
        } else {
            Err(domain(format!("Sobolev index s < -1/2 (got s = {s})")))
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Decay rate of the kernel κ(τ) = e^{-2π|τ|}.
const KERNEL_RATE: f64 = 2.0 * PI;

/// (∫ G(τ)²(1+τ²)^s dτ)^{1/2} with G = (μ - ν) * κ.
///
/// Between consecutive atom locations G is A e^{-2πτ} + B e^{2πτ}, so each gap
/// is integrated by Gauss–Legendre on unit-length panels from running sums.
pub fn sobolev_distance(mu: &AtomicMeasure, nu: &AtomicMeasure, params: SobolevParams) -> Result<f64> {
    let mut atoms: Vec<(f64, f64)> = mu
        .atoms()
        .iter()
        .copied()
        .chain(nu.atoms().iter().map(|&(l, w)| (l, -w)))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    // coincident locations are combined so the gaps below have positive length
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (l, w) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == l => last.1 += w,
            _ => merged.push((l, w)),
        }
    }
    if merged.is_empty() {
        return Ok(0.0);
    }
    let s = params.s;
    let n = merged.len();
    // left[j] = Σ_{i≤j} c_i e^{-2π(l_j - l_i)}, right[j] = Σ_{i≥j} c_i e^{-2π(l_i - l_j)}
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    for j in 0..n {
        left[j] = merged[j].1 + if j > 0 { left[j - 1] * (-KERNEL_RATE * (merged[j].0 - merged[j - 1].0)).exp() } else { 0.0 };
    }
    for j in (0..n).rev() {
        right[j] = merged[j].1 + if j + 1 < n { right[j + 1] * (-KERNEL_RATE * (merged[j + 1].0 - merged[j].0)).exp() } else { 0.0 };
    }
    let gl = GaussLegendre::new(20);
    let weight = |t: f64| (1.0 + t * t).powf(s);
    let panel_sum = |lo: f64, hi: f64, g: &dyn Fn(f64) -> f64| -> f64 {
        let panels = (hi - lo).ceil().max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        (0..panels)
            .map(|p| {
                let a = lo + h * p as f64;
                gl.integrate(|t| g(t).powi(2) * weight(t), a, a + h)
            })
            .sum()
    };
    // tails: beyond the outer atoms G decays like e^{-2π|τ - l|}; 12 units leave e^{-150}
    let (l0, ln) = (merged[0].0, merged[n - 1].0);
    let mut total = panel_sum(l0 - 12.0, l0, &|t| right[0] * (-KERNEL_RATE * (l0 - t)).exp());
    total += panel_sum(ln, ln + 12.0, &|t| left[n - 1] * (-KERNEL_RATE * (t - ln)).exp());
    let gaps: f64 = (0..n - 1)
        .into_par_iter()
        .map(|j| {
            let (a, b) = (merged[j].0, merged[j + 1].0);
            let (lj, rj) = (left[j], right[j + 1]);
            panel_sum(a, b, &|t| lj * (-KERNEL_RATE * (t - a)).exp() + rj * (-KERNEL_RATE * (b - t)).exp())
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    total += gaps;
    Ok(total.max(0.0).sqrt())
}

/// g(τ) = exp(-π((τ - center)/width)²)
pub fn gaussian(center: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| (-PI * ((t - center) / width).powi(2)).exp()
}

/// Σ w_i g(loc_i) for g = [`gaussian`].
pub fn pair_with_gaussian(mu: &AtomicMeasure, center: f64, width: f64) -> Result<f64> {
    if !(width > 0.0) {
        return Err(domain(format!("gaussian width must be positive (got {width})")));
    }
    Ok(mu.pair(gaussian(center, width)))
}

/// Cross-check between the time and frequency series of h_{b,per}.
///
/// With s = 2t, h_{b,per} has period 2 and Fourier coefficients c_r at r/2;
/// ⟨ĥ, g⟩ = Σ c_r g(r/2) equals ⟨h, ĝ⟩ = Σ 2w_t ĝ(2t) over the time atoms. The
/// frequency atoms carry 2c_r for r ≠ 0 and omit c_0, the mean over a period,
/// so freq_side is compared with 2·(time_side - mean·g(0)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityReport {
    pub b: f64,
    pub center: f64,
    pub width: f64,
    /// Re Σ 2w ĝ(2t) over time atoms
    pub time_side: f64,
    /// Σ w over time atoms in one period
    pub mean: f64,
    /// Σ w g(r/2) over frequency atoms
    pub freq_side: f64,
    pub predicted_freq_side: f64,
    pub rel_error: f64,
}

pub fn duality_check(b: f64, q_max: u64, r_max: u64, center: f64, width: f64) -> Result<DualityReport> {
    if !(width > 0.0) {
        return Err(domain("gaussian width must be positive"));
    }
    // ĝ(s) = width·e^{-π width² s²}·e^{-2πi s center}; keep |s| ≤ 7/width
    let reach = 3.5 / width + 1.0;
    let time = hbper_time_atoms(b, q_max, (-reach, reach))?;
    let per = hbper_time_atoms(b, q_max, (0.0, 1.0))?;
    let time_side: f64 = time
        .in_doubled_time()
        .pair(|s| width * (-PI * width * width * s * s).exp() * (2.0 * PI * s * center).cos());
    let mean = per.period_mass();
    let freq_side = pair_with_gaussian(&hbper_freq_atoms(b, r_max)?, center, width)?;
    let g0 = gaussian(center, width)(0.0);
    let predicted = 2.0 * (time_side - mean * g0);
    Ok(DualityReport {
        b,
        center,
        width,
        time_side,
        mean,
        freq_side,
        predicted_freq_side: predicted,
        rel_error: ((freq_side - predicted) / freq_side).abs(),
    })
}

/// Checks that every (p, q) of a set is reduced.
pub fn all_reduced(set: &RationalAtomSet) -> bool {
    set.atoms.iter().all(|a| gcd(a.p.unsigned_abs(), a.q) == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_cases() {
        assert_eq!(coeff_a(1, 0.3).unwrap(), 1.0);
        assert_eq!(coeff_a(7, 0.3).unwrap(), 1.0);
        assert!((coeff_a(2, 0.25).unwrap() + 3.656_854_249_492_38).abs() < 1e-13);
        assert!((coeff_a(4, 0.25).unwrap() - 5.656_854_249_492_38).abs() < 1e-13);
        assert!(coeff_a(0, 0.25).is_err());
    }

    #[test]
    fn alpha_cases_and_oracle() {
        assert_eq!(coeff_alpha(1, 0.4).unwrap(), 2.0);
        assert_eq!(coeff_alpha(-1, 0.4).unwrap(), 2.0);
        assert_eq!(coeff_alpha(2, 0.4).unwrap(), 0.0);
        assert_eq!(coeff_alpha(4, 0.5).unwrap(), 0.5);
        assert!((coeff_alpha(3, 0.5).unwrap() - 20.0 / 9.0).abs() < 1e-15);
        assert!(coeff_alpha(0, 0.5).is_err());
        assert_eq!(alpha_bruteforce(1, 0.5, 10).unwrap(), 2.0);
        assert_eq!(alpha_bruteforce(2, 0.5, 10).unwrap(), 0.0);
        assert!((alpha_bruteforce(3, 0.5, 10).unwrap() - 20.0 / 9.0).abs() < 1e-15);
        for r in [-12i64, -5, 8, 9, 15, 16, 36, 48] {
            let a = coeff_alpha(r, 0.25).unwrap();
            let c = alpha_bruteforce(r, 0.25, 2 * r.abs() + 4).unwrap();
            assert!((a - c).abs() < 1e-12, "{r}: {a} {c}");
        }
    }

    #[test]
    fn farey_sequence() {
        assert_eq!(farey(1), vec![(0, 1)]);
        assert_eq!(farey(3), vec![(0, 1), (1, 3), (1, 2), (2, 3)]);
        // |F_q ∩ [0,1)| = 1 + Σ_{2≤j≤q} φ(j)
        assert_eq!(farey(10).len(), 1 + 1 + 2 + 2 + 4 + 2 + 6 + 4 + 6 + 4);
        let f = farey(40);
        assert!(f.windows(2).all(|w| w[0].0 * w[1].1 < w[1].0 * w[0].1));
        assert!(f.iter().all(|&(p, q)| gcd(p, q) == 1));
    }

    #[test]
    fn time_atoms() {
        let one = hbper_time_atoms(0.25, 1, (0.0, 1.0)).unwrap();
        assert_eq!(one.atoms.len(), 1);
        assert!((one.atoms[0].weight + 0.106_752_164).abs() < 1e-8);
        let three = hbper_time_atoms(0.25, 3, (0.0, 1.0)).unwrap();
        let ts: Vec<f64> = three.atoms.iter().map(|a| a.t()).collect();
        assert_eq!(ts, vec![0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0]);
        assert!(three.atoms[1].weight < 0.0 && three.atoms[2].weight > 0.0);
        let wide = hbper_time_atoms(0.5, 12, (-1.5, 2.25)).unwrap();
        assert!(all_reduced(&wide));
        assert!(wide.atoms.iter().all(|a| a.t() >= -1.5 && a.t() < 2.25));
        let csv = three.to_csv();
        assert!(csv.starts_with("t,weight\n0,-0.10675216"));
    }

    #[test]
    fn frequency_atoms() {
        let om = omega(0.5).unwrap();
        let one = hbper_freq_atoms(0.5, 1).unwrap();
        assert_eq!(one.atoms(), &[(-0.5, -4.0 * om), (0.5, -4.0 * om)]);
        assert_eq!(hbper_freq_atoms(0.5, 2).unwrap(), {
            let mut m = hbper_freq_atoms(0.5, 1).unwrap();
            m = AtomicMeasure::new("h_per hat (b=0.5, r_max=2)".to_string(), m.atoms().to_vec()).unwrap();
            m
        });
        assert!(hbper_freq_atoms(0.5, 50).unwrap().atoms().iter().all(|a| a.1 < 0.0));
    }

    #[test]
    fn rescaled_atoms() {
        let m = rescaled_rk_atoms(0.5, 100.0, 0.1).unwrap();
        // pair (1, 0)
        let loc = 100.0 * tau_nm(100.0, 1, 0);
        assert!((loc + 0.500_012_500_625_039).abs() < 1e-12);
        assert!(m.atoms().iter().any(|a| (a.0 - loc).abs() < 1e-12));
        let unmerged: f64 = (13 * 12) as f64;
        assert!((m.len() as f64) < unmerged);
        assert!(rescaled_rk_atoms(0.5, 5.0, 0.1).is_err());
    }

    #[test]
    fn sobolev_metric() {
        let p = SobolevParams::new(-0.75).unwrap();
        assert!(SobolevParams::new(-0.5).is_err());
        let a = AtomicMeasure::new("a", vec![(0.0, 1.0), (0.3, -2.0), (5.0, 0.5)]).unwrap();
        let b = AtomicMeasure::new("b", vec![(0.1, 1.0), (0.3, -1.0)]).unwrap();
        let c = AtomicMeasure::new("c", vec![(-2.0, 0.7)]).unwrap();
        assert_eq!(sobolev_distance(&a, &a, p).unwrap(), 0.0);
        let ab = sobolev_distance(&a, &b, p).unwrap();
        assert!((ab - sobolev_distance(&b, &a, p).unwrap()).abs() < 1e-14);
        assert!(ab <= sobolev_distance(&a, &c, p).unwrap() + sobolev_distance(&c, &b, p).unwrap() + 1e-9);
        // single atom at 0: 2∫_0^∞ e^{-4πτ}(1+τ²)^s by Simpson on [0, 8]
        let w = 3.0;
        let one = AtomicMeasure::new("w", vec![(0.0, w)]).unwrap();
        let d = sobolev_distance(&one, &AtomicMeasure::empty("0"), p).unwrap();
        let n = 200_000;
        let h = 8.0 / n as f64;
        let g = |t: f64| 2.0 * (-4.0 * PI * t).exp() * (1.0 + t * t).powf(-0.75);
        let s: f64 = (0..=n)
            .map(|i| {
                let c = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                c * g(i as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((d - w * s.sqrt()).abs() < 1e-9, "{d} {}", w * s.sqrt());
    }

    #[test]
    fn gaussian_pairing() {
        let m = AtomicMeasure::new("m", vec![(0.7, -2.0)]).unwrap();
        assert_eq!(pair_with_gaussian(&m, 0.7, 1.0).unwrap(), -2.0);
        assert_eq!(pair_with_gaussian(&AtomicMeasure::empty("e"), 0.7, 1.0).unwrap(), 0.0);
        assert!(pair_with_gaussian(&m, 0.7, 0.0).is_err());
    }
}
