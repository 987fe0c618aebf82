//! The acceptance suite: twelve numbered checks, each with a runtime budget.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dispersion::{
    h1_direct, h1_polynomial, hb_direct, hb_frank, singular_limit, uncertainty_product_with, UpperBoundTerms,
};
use crate::error::Result;
use crate::fieldquad::{eval_field, far_field, leibniz_sides, multiplier_bound_ratio, GridFunction, MomentOptions};
use crate::periodic::{h1_periodic_decompose, regular_limit, regular_part_eps};
use crate::scatdata::{regularity_report, AtomicSpectrum, BumpProfile, NormMode, ScatteringDensity};
use crate::schrlimit::{
    alpha_bruteforce, coeff_a, coeff_alpha, hbper_freq_atoms, hbper_time_atoms, rescaled_cutoff, rescaled_rk_atoms,
    sobolev_distance, SobolevParams,
};
use crate::specfun::omega;

pub const ALL: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} ({:.2}s of {}s): {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn name_and_budget(id: u32) -> (&'static str, u64) {
    match id {
        1 => ("special constants", 1),
        2 => ("divisor-sum oracle", 10),
        3 => ("h1 closed form", 60),
        4 => ("b=1 periodic decomposition", 120),
        5 => ("route equivalence", 300),
        6 => ("singularity law", 300),
        7 => ("asymptotic uncertainty principle", 600),
        8 => ("regular-part convergence", 300),
        9 => ("k to infinity limit", 300),
        10 => ("Talbot atom table", 10),
        11 => ("inequality suite", 300),
        12 => ("far field", 60),
        _ => ("unknown", 0),
    }
}

/// Runs one criterion. Numerical errors count as failures with the error in the detail.
pub fn run(id: u32) -> CriterionResult {
    let (name, budget) = name_and_budget(id);
    let start = Instant::now();
    let res = match id {
        1 => special_constants(),
        2 => divisor_oracle(),
        3 => h1_closed_form(),
        4 => periodic_h1(),
        5 => route_equivalence(),
        6 => singularity_law(),
        7 => uncertainty(),
        8 => regular_convergence(),
        9 => k_limit(),
        10 => talbot_table(),
        11 => inequalities(),
        12 => far_field_rate(),
        _ => outcome(false, format!("no criterion {id}")),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget);
    let (pass, detail) = match res {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let over = elapsed > budget;
    CriterionResult {
        id,
        name,
        pass: pass && !over,
        detail: if over { format!("{detail}; over the runtime budget") } else { detail },
        elapsed,
        budget,
    }
}

fn special_constants() -> Result<Outcome> {
    let om = omega(0.5)?;
    let om_err = (om - 1.0 / (2.0 * PI * PI)).abs();
    let mut mismatches = 0;
    for b in [0.25, 0.5, 0.75] {
        let p = 2f64.powf(2.0 + 2.0 * b);
        for q in 1..=1000u64 {
            let expect = if q % 2 == 1 {
                1.0
            } else if q % 4 == 2 {
                2.0 - p
            } else {
                p
            };
            if coeff_a(q, b)? != expect {
                mismatches += 1;
            }
        }
        for r in (-1000..=1000i64).filter(|&r| r != 0) {
            let n = r.abs();
            let e = -1.0 - 2.0 * b;
            let expect = if n % 2 == 1 {
                2.0 * (1..=n).filter(|d| n % d == 0).map(|d| (d as f64).powf(e)).sum::<f64>()
            } else if n % 4 == 0 {
                2f64.powf(-2.0 * b) * (1..=n / 4).filter(|d| n % (4 * d) == 0).map(|d| (d as f64).powf(e)).sum::<f64>()
            } else {
                0.0
            };
            if (coeff_alpha(r, b)? - expect).abs() > 1e-14 * expect.abs().max(1.0) {
                mismatches += 1;
            }
        }
    }
    outcome(
        om_err < 1e-10 && mismatches == 0,
        format!("|omega(0.5) - 1/(2pi^2)| = {om_err:.1e}, case mismatches = {mismatches}"),
    )
}

fn divisor_oracle() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for b in [0.25, 0.5, 0.75] {
        for r in (-200..=200i64).filter(|&r| r != 0) {
            let d = (coeff_alpha(r, b)? - alpha_bruteforce(r, b, 2 * r.abs() + 4)?).abs();
            worst = worst.max(d);
        }
    }
    outcome(worst <= 1e-12, format!("max |alpha - bruteforce| = {worst:.1e}"))
}

fn h1_closed_form() -> Result<Outcome> {
    let f = ScatteringDensity::parabola(2.0)?;
    let p = h1_polynomial(&f)?;
    let mut worst: f64 = 0.0;
    for y in [0.0, 0.5, 1.0, 2.0] {
        let d = h1_direct(&f, y, &MomentOptions::default())?.value;
        worst = worst.max((p.eval(y) - d).abs() / d);
    }
    outcome(
        worst <= 1e-4,
        format!("c = ({:.6}, {:.1e}, {:.7}), max rel. error {worst:.1e}", p.c0, p.c1, p.c2),
    )
}

fn periodic_h1() -> Result<Outcome> {
    let atoms = AtomicSpectrum::truncated_comb(2.5, 2)?;
    let bump = BumpProfile::standard(NormMode::UnitL2);
    let mut errs = Vec::new();
    let mut last = 0.0;
    for eps in [0.1, 0.05, 0.025] {
        let d = h1_periodic_decompose(&atoms, &bump, eps, 1.0)?;
        errs.push((d.remainder() - d.stable_value).abs() / d.stable_value);
        last = d.remainder();
    }
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing && errs[2] <= 0.02,
        format!("total - singular = {last:.7} (limit 3.9365079), rel. errors {:.1e} {:.1e} {:.1e}", errs[0], errs[1], errs[2]),
    )
}

fn route_equivalence() -> Result<Outcome> {
    let f = ScatteringDensity::bump(2.0, 0.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for b in [0.25, 0.5, 0.75] {
        for y in [0.0, 1.0, 5.0] {
            let a = hb_frank(&f, b, y)?;
            let d = hb_direct(&f, b, y, &MomentOptions::default())?.value;
            worst = worst.max((a - d).abs() / d);
        }
    }
    outcome(worst <= 1e-3, format!("max rel. difference over 9 cases {worst:.1e}"))
}

fn singularity_law() -> Result<Outcome> {
    let f = ScatteringDensity::parabola(2.0)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for b in [0.25, 0.5] {
        let s = singular_limit(&f, b)?;
        let rel = (s.extrapolated - s.value).abs() / s.value;
        pass &= rel <= 0.01 && !s.unstable;
        parts.push(format!("b={b}: {:.7} vs {:.7} (rel {rel:.1e})", s.extrapolated, s.value));
    }
    outcome(pass, parts.join(", "))
}

fn uncertainty() -> Result<Outcome> {
    let f = ScatteringDensity::bump(2.0, 0.0, 1.0)?;
    let report = regularity_report(&f, 0.5)?;
    let mut devs = Vec::new();
    let mut stated_ratio = 0.0;
    for y in [5.0, 10.0, 25.0, 50.0] {
        let u = uncertainty_product_with(&f, 0.5, y, &report)?;
        devs.push(u.deviation);
        stated_ratio = u.product / u.stated_limit;
    }
    let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing && devs[3] <= 0.10,
        format!(
            "deviations {:.1e} {:.1e} {:.1e} {:.1e}; product/(omega-weighted limit) at y=50 is {stated_ratio:.3} = {:.3}/omega_b",
            devs[0],
            devs[1],
            devs[2],
            devs[3],
            stated_ratio * omega(0.5)?
        ),
    )
}

fn regular_convergence() -> Result<Outcome> {
    let atoms = AtomicSpectrum::truncated_comb(2.5, 2)?;
    let bump = BumpProfile::standard(NormMode::UnitIntegral);
    let ys: Vec<f64> = (0..64).map(|i| i as f64 / 63.0).collect();
    let limit = ys.iter().map(|&y| regular_limit(&atoms, 0.5, y)).collect::<Result<Vec<_>>>()?;
    let scale = limit.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut sups = Vec::new();
    for eps in [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let mut sup: f64 = 0.0;
        for (&y, l) in ys.iter().zip(&limit) {
            sup = sup.max((regular_part_eps(&atoms, &bump, eps, 0.5, y)? - l).abs());
        }
        sups.push(sup);
    }
    let factors: Vec<f64> = sups.windows(2).map(|w| w[0] / w[1]).collect();
    let rel = sups[3] / scale;
    outcome(
        factors.iter().all(|&f| f >= 1.5) && rel <= 0.02,
        format!(
            "halving factors {:.2} {:.2} {:.2}, sup error at 1/64 is {rel:.1e} of sup|R_b|",
            factors[0], factors[1], factors[2]
        ),
    )
}

fn k_limit() -> Result<Outcome> {
    let b = 0.5;
    let eps = 0.1;
    let ks = [1e2, 1e3, 1e4];
    let n_top = rescaled_cutoff(ks[2], eps);
    let r_max = (2 * n_top * n_top) as u64;
    let target = hbper_freq_atoms(b, r_max)?;
    let params = SobolevParams::new(-0.75)?;
    let mut d = Vec::new();
    for k in ks {
        d.push(sobolev_distance(&rescaled_rk_atoms(b, k, eps)?, &target, params)?);
    }
    outcome(
        d[1] < d[0] && d[2] < d[1],
        format!("distances {:.5} {:.5} {:.5} (r_max = {r_max})", d[0], d[1], d[2]),
    )
}

fn talbot_table() -> Result<Outcome> {
    let b = 0.25;
    let set = hbper_time_atoms(b, 40, (0.0, 1.0))?;
    let zero = set.atoms.iter().find(|a| a.p == 0).map(|a| a.weight).unwrap_or(f64::NAN);
    let zero_ok = (zero + 0.106_752_1).abs() < 1e-7;
    let signs_ok = set.atoms.iter().all(|a| match a.q % 4 {
        2 => a.weight > 0.0,
        _ => a.weight < 0.0,
    });
    // |w|·q^{2+2b}/|a_b(q)| is one constant for the whole table
    let c0 = zero.abs();
    let mut worst: f64 = 0.0;
    for a in &set.atoms {
        let c = a.weight.abs() * (a.q as f64).powf(2.0 + 2.0 * b) / coeff_a(a.q, b)?.abs();
        worst = worst.max((c - c0).abs() / c0);
    }
    outcome(
        zero_ok && signs_ok && worst < 1e-12,
        format!(
            "{} atoms, t=0 weight {zero:.8}, sign pattern {}, decay exponent spread {worst:.1e}",
            set.atoms.len(),
            if signs_ok { "ok" } else { "broken" }
        ),
    )
}

fn inequalities() -> Result<Outcome> {
    // Leibniz on random smooth pairs
    let mut rng = ChaCha8Rng::seed_from_u64(20_241_016);
    let mut leibniz_ok = true;
    let mut min_gap = f64::INFINITY;
    for _ in 0..10 {
        let (a1, s1, w1, c1) = (rng.gen_range(0.5..2.0), rng.gen_range(0.4..1.5), rng.gen_range(0.0..4.0), rng.gen_range(-1.0..1.0));
        let (a2, s2, w2, c2) = (rng.gen_range(0.5..2.0), rng.gen_range(0.4..1.5), rng.gen_range(0.0..4.0), rng.gen_range(-1.0..1.0));
        let b = rng.gen_range(0.1..0.9);
        let f = GridFunction::uniform(-12.0, 12.0, 1201, |x| {
            Complex64::new(a1 * (-((x - c1) / s1).powi(2)).exp() * (w1 * x).cos(), 0.0)
        })?;
        let g = GridFunction::uniform(-12.0, 12.0, 1201, |x| {
            Complex64::new(a2 * (-((x - c2) / s2).powi(2)).exp() * (w2 * x).sin() + 0.3 * a2 * (-((x - c2) / s2).powi(2)).exp(), 0.0)
        })?;
        let s = leibniz_sides(&f, &g, b)?;
        leibniz_ok &= s.lhs <= s.rhs + 1e-6;
        min_gap = min_gap.min(s.rhs - s.lhs);
    }

    // upper bound ratio over doubling y-ranges
    let bump = ScatteringDensity::bump(2.0, 0.0, 1.0)?;
    let terms = UpperBoundTerms::new(&bump, 0.5)?;
    let (mut r100, mut r200, mut d100, mut d200) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for y in 0..=200 {
        let y = y as f64;
        let h = hb_frank(&bump, 0.5, y)?;
        let (r, d) = (h / terms.rhs(y), h / terms.displayed(y));
        if y <= 100.0 {
            r100 = r100.max(r);
            d100 = d100.max(d);
        }
        r200 = r200.max(r);
        d200 = d200.max(d);
    }
    let upper_ok = r200 <= 1.25 * r100;

    // multiplier bound ratio under grid refinement
    let mut mult_ok = true;
    let mut spread: f64 = 1.0;
    for y in [0.5, 1.0, 2.0] {
        let a = multiplier_bound_ratio(y, 5.0, 0.5, 200)?;
        let c = multiplier_bound_ratio(y, 5.0, 0.5, 400)?;
        let q = a.max(c) / a.min(c);
        mult_ok &= a.is_finite() && c.is_finite() && q < 2.0;
        spread = spread.max(q);
    }
    outcome(
        leibniz_ok && upper_ok && mult_ok,
        format!(
            "Leibniz min slack {min_gap:.3}; h_b/rhs max {r100:.4} on [0,100], {r200:.4} on [0,200] \
             (displayed form without the (k|y|)^2b term: {d100:.3} -> {d200:.3}); multiplier ratio spread {spread:.3}"
        ),
    )
}

fn far_field_rate() -> Result<Outcome> {
    let f = ScatteringDensity::bump(2.0, 0.0, 1.0)?;
    let errs = [25.0, 50.0, 100.0]
        .iter()
        .map(|&y| Ok((eval_field(&f, 0.0, y)? - far_field(&f, 0.0, y)?).norm()))
        .collect::<Result<Vec<f64>>>()?;
    let target = 2f64.powf(-1.5);
    let ratios = [errs[1] / errs[0], errs[2] / errs[1]];
    outcome(
        ratios.iter().all(|r| (r / target - 1.0).abs() <= 0.3),
        format!("error ratios per doubling {:.4} {:.4} (target {target:.4})", ratios[0], ratios[1]),
    )
}
