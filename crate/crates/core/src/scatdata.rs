//! Scattering data: smooth densities on (-k, k), truncated Dirac combs,
//! mollification of combs by a compact bump, and the regularity moments.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{adaptive, tanh_sinh, Adaptive};

/// Normalization convention of a [`BumpProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormMode {
    /// ∫φ² = 1
    UnitL2,
    /// ∫φ = 1
    UnitIntegral,
}

/// The bump x ↦ C·exp(-1/(1-(x/r)²)) on (-r, r), r = 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    radius: f64,
    scale: f64,
    mode: NormMode,
    integral: f64,
    l2_sq: f64,
    c_phi: f64,
}

fn raw_bump(s: f64) -> f64 {
    // s = x / r
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn raw_bump_ds(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        raw_bump(s) * (-2.0 * s) / (q * q)
    }
}

impl BumpProfile {
    pub fn standard(mode: NormMode) -> Self {
        Self::with_radius(0.5, mode)
    }

    pub fn with_radius(radius: f64, mode: NormMode) -> Self {
        let opts = Adaptive::with_tol(1e-16, 1e-14);
        let int = |f: &dyn Fn(f64) -> f64| {
            adaptive(|s: f64| f(s), -1.0, 1.0, &[0.0], opts)
                .expect("bump integrals are smooth")
                .value
        };
        let raw_int = radius * int(&raw_bump);
        let raw_l2 = radius * int(&|s| raw_bump(s).powi(2));
        // ∫(d/dx φ)² = (1/r) ∫(d/ds)²
        let raw_dl2 = int(&|s| raw_bump_ds(s).powi(2)) / radius;
        let scale = match mode {
            NormMode::UnitL2 => 1.0 / raw_l2.sqrt(),
            NormMode::UnitIntegral => 1.0 / raw_int,
        };
        Self {
            radius,
            scale,
            mode,
            integral: scale * raw_int,
            l2_sq: scale * scale * raw_l2,
            c_phi: scale * scale * raw_dl2,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.scale * raw_bump(x / self.radius)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.scale * raw_bump_ds(x / self.radius) / self.radius
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }

    /// ‖φ′‖₂²
    pub fn c_phi(&self) -> f64 {
        self.c_phi
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_sq
    }

    pub(crate) fn require(&self, mode: NormMode) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(domain(format!("bump must be normalized as {mode:?}")))
        }
    }
}

pub type Profile = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A square-integrable density F on (-k, k), smooth on each of its support pieces.
///
/// The pieces are closed intervals separated by positive gaps; F vanishes
/// between them and outside (-k, k).
#[derive(Clone)]
pub struct ScatteringDensity {
    k: f64,
    pieces: Vec<(f64, f64)>,
    value: Profile,
    derivative: Option<Profile>,
    label: String,
}

impl fmt::Debug for ScatteringDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScatteringDensity")
            .field("k", &self.k)
            .field("pieces", &self.pieces)
            .field("has_derivative", &self.derivative.is_some())
            .field("label", &self.label)
            .finish()
    }
}

impl ScatteringDensity {
    pub fn new(
        k: f64,
        pieces: Vec<(f64, f64)>,
        value: Profile,
        derivative: Option<Profile>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(domain(format!("k > 0 (got k = {k})")));
        }
        for (i, &(lo, hi)) in pieces.iter().enumerate() {
            if !(lo < hi) {
                return Err(domain(format!("support piece [{lo}, {hi}] is empty")));
            }
            if lo < -k || hi > k {
                return Err(Error::Support {
                    what: format!("piece [{lo}, {hi}] with k = {k}"),
                });
            }
            if i > 0 && lo <= pieces[i - 1].1 {
                return Err(domain("support pieces must be sorted and separated"));
            }
        }
        Ok(Self {
            k,
            pieces,
            value,
            derivative,
            label: label.into(),
        })
    }

    pub fn zero(k: f64) -> Result<Self> {
        Self::new(k, Vec::new(), Arc::new(|_| Complex64::new(0.0, 0.0)), Some(Arc::new(|_| Complex64::new(0.0, 0.0))), "zero")
    }

    /// exp(-1/(1-s²)) with s = (ξ - center)/half_width.
    pub fn bump(k: f64, center: f64, half_width: f64) -> Result<Self> {
        Self::chirped_bump(k, center, half_width, 0.0)
    }

    /// A bump multiplied by the phase e^{2πi·chirp·(ξ - center)²}.
    pub fn chirped_bump(k: f64, center: f64, half_width: f64, chirp: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(domain("bump half width must be positive"));
        }
        let phase = move |xi: f64| {
            let d = xi - center;
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * chirp * d * d)
        };
        let value: Profile = Arc::new(move |xi| phase(xi) * raw_bump((xi - center) / half_width));
        let derivative: Profile = Arc::new(move |xi| {
            let s = (xi - center) / half_width;
            let amp = raw_bump(s);
            let damp = raw_bump_ds(s) / half_width;
            let dphase = Complex64::new(0.0, 4.0 * std::f64::consts::PI * chirp * (xi - center));
            phase(xi) * (damp + dphase * amp)
        });
        let label = if chirp == 0.0 {
            format!("bump(center={center}, half_width={half_width})")
        } else {
            format!("chirped_bump(center={center}, half_width={half_width}, chirp={chirp})")
        };
        Self::new(
            k,
            vec![(center - half_width, center + half_width)],
            value,
            Some(derivative),
            label,
        )
    }

    /// (1 - ξ²) on (-1, 1).
    pub fn parabola(k: f64) -> Result<Self> {
        Self::new(
            k,
            vec![(-1.0, 1.0)],
            Arc::new(|xi: f64| Complex64::new(1.0 - xi * xi, 0.0)),
            Some(Arc::new(|xi: f64| Complex64::new(-2.0 * xi, 0.0))),
            "parabola",
        )
    }

    /// The indicator of (lo, hi). It has no derivative.
    pub fn indicator(k: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            k,
            vec![(lo, hi)],
            Arc::new(|_| Complex64::new(1.0, 0.0)),
            None,
            format!("indicator({lo}, {hi})"),
        )
    }

    /// ξ ↦ conj(F(-ξ)).
    pub fn conj_reflected(&self) -> Self {
        let f = self.value.clone();
        let d = self.derivative.clone();
        let mut pieces: Vec<(f64, f64)> = self.pieces.iter().map(|&(a, b)| (-b, -a)).collect();
        pieces.reverse();
        Self {
            k: self.k,
            pieces,
            value: Arc::new(move |xi| f(-xi).conj()),
            derivative: d.map(|d| -> Profile { Arc::new(move |xi| -d(-xi).conj()) }),
            label: format!("conj_reflected({})", self.label),
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Distance from the support to the band edges ±k.
    pub fn support_margin(&self) -> f64 {
        let reach = self
            .pieces
            .iter()
            .map(|&(a, b)| a.abs().max(b.abs()))
            .fold(0.0, f64::max);
        self.k - reach
    }

    /// Smallest and largest point of the support.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        Some((self.pieces.first()?.0, self.pieces.last()?.1))
    }

    fn inside(&self, xi: f64) -> bool {
        // pieces are few, a linear scan beats a search here
        self.pieces.iter().any(|&(a, b)| xi >= a && xi <= b) && xi.abs() < self.k
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        if self.inside(xi) {
            (self.value)(xi)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn eval_derivative(&self, xi: f64) -> Option<Complex64> {
        let d = self.derivative.as_ref()?;
        Some(if self.inside(xi) {
            d(xi)
        } else {
            Complex64::new(0.0, 0.0)
        })
    }

    /// Raw evaluator without the support test; callers stay inside a piece.
    pub(crate) fn eval_unchecked(&self, xi: f64) -> Complex64 {
        (self.value)(xi)
    }

    /// Largest gap between the stored derivative and a central difference, over
    /// 32 deterministic interior points. Scaled by max(1, |F′|).
    pub fn derivative_mismatch(&self) -> Result<f64> {
        let d = self.derivative.as_ref().ok_or(Error::MissingDerivative)?;
        let mut worst: f64 = 0.0;
        let golden = 0.618_033_988_749_894_9;
        for (pi, &(a, b)) in self.pieces.iter().enumerate() {
            for j in 0..32 {
                let u = ((j as f64 + 1.0 + pi as f64) * golden).fract();
                let xi = a + (b - a) * (0.05 + 0.9 * u);
                let h = 1e-6 * (b - a);
                let fd = ((self.value)(xi + h) - (self.value)(xi - h)) / (2.0 * h);
                let exact = d(xi);
                worst = worst.max((fd - exact).norm() / exact.norm().max(1.0));
            }
        }
        Ok(worst)
    }

    /// ∫ g(ξ) over the support, piece by piece, with extra breakpoints.
    pub fn integrate<F>(&self, g: F, breaks: &[f64], opts: Adaptive) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let mut total = 0.0;
        for &(a, b) in &self.pieces {
            total += adaptive(&g, a, b, breaks, opts)?.value;
        }
        Ok(total)
    }

    pub fn l2_norm_sq(&self) -> Result<f64> {
        self.integrate(|xi| self.eval_unchecked(xi).norm_sqr(), &[], Adaptive::default())
    }

    pub fn l1_norm(&self) -> Result<f64> {
        self.integrate(|xi| self.eval_unchecked(xi).norm(), &[], Adaptive::default())
    }
}

/// Truncated comb data: coefficients F(n) on integers with |n| < k.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicSpectrum {
    k: f64,
    coeffs: BTreeMap<i64, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    n: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRecord {
    #[serde(default = "schema_version")]
    schema: u32,
    k: f64,
    atoms: Vec<AtomRecord>,
}

fn schema_version() -> u32 {
    1
}

impl AtomicSpectrum {
    pub fn new(k: f64, coeffs: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(domain(format!("k > 0 (got k = {k})")));
        }
        let mut map = BTreeMap::new();
        for (n, c) in coeffs {
            if (n as f64).abs() >= k {
                return Err(Error::Support {
                    what: format!("atom n = {n} needs |n| < k = {k}"),
                });
            }
            *map.entry(n).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Ok(Self { k, coeffs: map })
    }

    /// F(n) = 1 for every integer |n| < k.
    pub fn comb(k: f64) -> Result<Self> {
        let n_max = largest_inside(k);
        Self::truncated_comb(k, n_max)
    }

    /// F(n) = 1 for |n| ≤ n_max.
    pub fn truncated_comb(k: f64, n_max: i64) -> Result<Self> {
        Self::new(k, (-n_max..=n_max).map(|n| (n, Complex64::new(1.0, 0.0))))
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, n: i64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn max_abs_n(&self) -> Option<i64> {
        self.coeffs.keys().map(|n| n.abs()).max()
    }

    pub fn min_spacing(&self) -> Option<i64> {
        let keys: Vec<i64> = self.coeffs.keys().copied().collect();
        keys.windows(2).map(|w| w[1] - w[0]).min()
    }

    /// Σ|F(n)|²
    pub fn l2_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// max |F(-n) - conj F(n)|
    pub fn hermitian_defect(&self) -> f64 {
        self.iter()
            .map(|(n, c)| (self.get(-n) - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        let rec = SpectrumRecord {
            schema: 1,
            k: self.k,
            atoms: self
                .iter()
                .map(|(n, c)| AtomRecord { n, re: c.re, im: c.im })
                .collect(),
        };
        serde_json::to_string_pretty(&rec).expect("plain records serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: SpectrumRecord =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if rec.schema != 1 {
            return Err(Error::Format(format!("unsupported schema {}", rec.schema)));
        }
        Self::new(rec.k, rec.atoms.into_iter().map(|a| (a.n, Complex64::new(a.re, a.im))))
    }
}

/// Largest integer n with n < k.
pub fn largest_inside(k: f64) -> i64 {
    let c = k.ceil() as i64;
    if (c as f64) < k {
        c
    } else {
        c - 1
    }
}

/// F^ε(ξ) = ε^{-1/2} Σ F(n) φ((ξ - n)/ε).
pub fn mollify(atoms: &AtomicSpectrum, bump: &BumpProfile, eps: f64) -> Result<ScatteringDensity> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(domain(format!("0 < eps <= 1 (got eps = {eps})")));
    }
    let width = 2.0 * eps * bump.radius();
    if let Some(sp) = atoms.min_spacing() {
        if width >= sp as f64 {
            return Err(Error::Overlap {
                width,
                spacing: sp as f64,
            });
        }
    }
    let half = eps * bump.radius();
    let k = atoms.k();
    let pieces: Vec<(f64, f64)> = atoms
        .iter()
        .map(|(n, _)| (n as f64 - half, n as f64 + half))
        .collect();
    if let Some(&(lo, _)) = pieces.first() {
        let hi = pieces.last().map(|p| p.1).unwrap_or(lo);
        if lo <= -k || hi >= k {
            return Err(Error::Support {
                what: format!("mollified atoms reach [{lo}, {hi}] with k = {k}"),
            });
        }
    }
    let coeffs = Arc::new(atoms.coeffs.clone());
    let pre = eps.powf(-0.5);
    let b = *bump;
    let c2 = coeffs.clone();
    let value: Profile = Arc::new(move |xi: f64| {
        let n = xi.round() as i64;
        match coeffs.get(&n) {
            Some(&c) => c * (pre * b.value((xi - n as f64) / eps)),
            None => Complex64::new(0.0, 0.0),
        }
    });
    let derivative: Profile = Arc::new(move |xi: f64| {
        let n = xi.round() as i64;
        match c2.get(&n) {
            Some(&c) => c * (pre * b.derivative((xi - n as f64) / eps) / eps),
            None => Complex64::new(0.0, 0.0),
        }
    });
    ScatteringDensity::new(
        k,
        pieces,
        value,
        Some(derivative),
        format!("mollified comb ({} atoms, eps={eps})", atoms.len()),
    )
}

/// The three weighted moments of scattering data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityReport {
    /// ∫|x|^{2b}|u₀|²
    pub m_spatial: f64,
    /// truncation tail attached to `m_spatial`
    pub spatial_tail: f64,
    /// ∫|ξ|^{2b}|F|²/(k²-ξ²)
    pub m_spectral: f64,
    /// ∫|ξ|^{2b}|F|²/(k²-ξ²)^b
    pub m_singular: f64,
}

/// ∫|ξ|^{2b}|F|²/(k²-ξ²)^p over the support. Uses tanh-sinh near 0 so the
/// |ξ|^{2b} cusp costs nothing.
pub(crate) fn weighted_spectral_moment(f: &ScatteringDensity, b: f64, p: f64) -> Result<f64> {
    let k = f.k;
    let mut total = 0.0;
    for &(a, c) in f.pieces() {
        let g = |xi: f64| {
            let w = (k - xi.abs()) * (k + xi.abs());
            xi.abs().powf(2.0 * b) * f.eval_unchecked(xi).norm_sqr() / w.powf(p)
        };
        let mut parts = Vec::new();
        if a < 0.0 && c > 0.0 {
            parts.push((a, 0.0));
            parts.push((0.0, c));
        } else {
            parts.push((a, c));
        }
        for (lo, hi) in parts {
            if lo == 0.0 || hi == 0.0 {
                let r = tanh_sinh(
                    |xi: f64, da: f64, db: f64| {
                        let x = if lo == 0.0 { da } else { -db };
                        let _ = xi;
                        g(x)
                    },
                    lo,
                    hi,
                    1e-12,
                );
                total += r.value;
            } else {
                total += adaptive(g, lo, hi, &[], Adaptive::default())?.value;
            }
        }
    }
    Ok(total)
}

pub fn regularity_report(f: &ScatteringDensity, b: f64) -> Result<RegularityReport> {
    crate::specfun::FracOrder::new(b)?;
    if f.is_zero() {
        return Ok(RegularityReport {
            m_spatial: 0.0,
            spatial_tail: 0.0,
            m_spectral: 0.0,
            m_singular: 0.0,
        });
    }
    if f.support_margin() <= 0.0 {
        return Err(Error::Support {
            what: "weighted moments need a positive support margin".into(),
        });
    }
    let spatial = crate::fieldquad::spatial_moment(f, 2.0 * b, 0.0, &Default::default())?;
    Ok(RegularityReport {
        m_spatial: spatial.value,
        spatial_tail: spatial.tail,
        m_spectral: weighted_spectral_moment(f, b, 1.0)?,
        m_singular: weighted_spectral_moment(f, b, b)?,
    })
}
