//! Finite atomic measures on the line and the shared atom file formats.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Formats a float with 17 significant digits, positional for moderate
/// magnitudes and in exponent form otherwise.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // log10 can be off by one at exact powers of ten
        let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
        if digits > 17 && decimals > 0 {
            let d = decimals - 1;
            return format!("{x:.d$}");
        }
        s
    } else {
        format!("{x:.16e}")
    }
}

/// Point masses (loc, w), sorted by location.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    label: String,
    atoms: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    loc: f64,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    #[serde(default = "schema_one")]
    schema: u32,
    #[serde(default)]
    label: String,
    atoms: Vec<AtomRecord>,
}

fn schema_one() -> u32 {
    1
}

impl AtomicMeasure {
    pub fn new(label: impl Into<String>, mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|(l, w)| !l.is_finite() || !w.is_finite()) {
            return Err(domain("atom locations and weights must be finite"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            label: label.into(),
            atoms,
        })
    }

    pub fn empty(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            atoms: Vec::new(),
        }
    }

    /// Sorts and adds together atoms whose locations are within `tol` of the
    /// first location of their cluster. Exact zero weights are dropped.
    pub fn merged(label: impl Into<String>, atoms: Vec<(f64, f64)>, tol: f64) -> Result<Self> {
        let sorted = Self::new(label, atoms)?;
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.atoms.len());
        for (loc, w) in sorted.atoms {
            match out.last_mut() {
                Some(last) if (loc - last.0).abs() <= tol => last.1 += w,
                _ => out.push((loc, w)),
            }
        }
        out.retain(|a| a.1 != 0.0);
        Ok(Self {
            label: sorted.label,
            atoms: out,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Σ|w|
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.1.abs()).sum()
    }

    /// Σ w·g(loc)
    pub fn pair(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(l, w)| w * g(l)).sum()
    }

    /// The measure with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            label: self.label.clone(),
            atoms: self.atoms.iter().map(|&(l, w)| (l, c * w)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = MeasureFile {
            schema: 1,
            label: self.label.clone(),
            atoms: self.atoms.iter().map(|&(loc, w)| AtomRecord { loc, w }).collect(),
        };
        serde_json::to_string_pretty(&file).expect("measure serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MeasureFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if file.schema != 1 {
            return Err(Error::Format(format!("unsupported schema {}", file.schema)));
        }
        Self::new(file.label, file.atoms.into_iter().map(|a| (a.loc, a.w)).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("loc,w\n");
        for &(l, w) in &self.atoms {
            s.push_str(&fmt17(l));
            s.push(',');
            s.push_str(&fmt17(w));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(label: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("loc,w") => {}
            other => return Err(Error::Format(format!("expected header loc,w, found {other:?}"))),
        }
        let mut atoms = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let mut next = || -> Result<f64> {
                cols.next()
                    .ok_or_else(|| Error::Format(format!("line {}: missing column", i + 2)))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))
            };
            let loc = next()?;
            let w = next()?;
            atoms.push((loc, w));
        }
        Self::new(label, atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.5), "0.50000000000000000");
        assert_eq!(fmt17(-0.1), "-0.10000000000000001");
        assert_eq!(fmt17(0.0), "0");
        assert_eq!(fmt17(1e-9), "1.0000000000000001e-9");
        assert_eq!(fmt17(1.0), "1.0000000000000000");
        assert_eq!(fmt17(10.0), "10.000000000000000");
        for x in [std::f64::consts::PI, 1.0 / 3.0, -2.5e-4, 123456.789, 0.1 + 0.2, 1e20] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn merge_adds_close_atoms() {
        let m = AtomicMeasure::merged("m", vec![(1.0, 2.0), (0.0, 1.0), (1.0 + 1e-13, 3.0), (2.0, 0.0)], 1e-12).unwrap();
        assert_eq!(m.atoms(), &[(0.0, 1.0), (1.0, 5.0)]);
        assert_eq!(m.total_variation(), 6.0);
    }

    #[test]
    fn json_and_csv_round_trips_are_exact() {
        let m = AtomicMeasure::new("x", vec![(0.1 + 0.2, -1.0 / 3.0), (-7.25, 1e-300), (1e5 / 3.0, 2.0)]).unwrap();
        assert_eq!(AtomicMeasure::from_json(&m.to_json()).unwrap(), m);
        assert_eq!(AtomicMeasure::from_csv("x", &m.to_csv()).unwrap(), m);
        assert!(AtomicMeasure::from_csv("x", "a,b\n1,2\n").is_err());
        assert!(AtomicMeasure::from_json(r#"{"schema":2,"atoms":[]}"#).is_err());
    }
}
