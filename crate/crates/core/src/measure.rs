//! Finitely supported nonnegative measures on a one-dimensional parameter domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compact interval `[lo, hi]`, or `[lo, hi)` when the right endpoint is
/// identified with `lo` (periodic families).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterDomain {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_true")]
    pub includes_hi: bool,
}

fn default_true() -> bool {
    true
}

impl ParameterDomain {
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::build(lo, hi, true)
    }

    pub fn half_open(lo: f64, hi: f64) -> Result<Self> {
        Self::build(lo, hi, false)
    }

    fn build(lo: f64, hi: f64, includes_hi: bool) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::Parameter(format!(
                "domain needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi, includes_hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && (t < self.hi || (self.includes_hi && t == self.hi))
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain {
                t,
                lo: self.lo,
                hi: self.hi,
                close: if self.includes_hi { "]" } else { ")" },
            })
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// One Dirac component `a * delta_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub a: f64,
}

/// A nonnegative measure `sum_i a_i delta_{t_i}` kept in canonical form:
/// locations strictly increasing, every weight positive.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Canonicalizes the given atoms: sorts by location, merges duplicate
    /// locations by summing weights and drops zero weights.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, atom) in atoms.iter().enumerate() {
            if !atom.t.is_finite() {
                return Err(Error::Parameter(format!("atom {i} has non-finite location")));
            }
            if !atom.a.is_finite() || atom.a < 0.0 {
                return Err(Error::Parameter(format!(
                    "atom {i} has invalid weight {} (must be finite and nonnegative)",
                    atom.a
                )));
            }
        }
        Ok(Self {
            atoms: canonicalize(atoms),
        })
    }

    /// Builds a measure from parallel location and weight slices.
    pub fn from_parts(locations: &[f64], weights: &[f64]) -> Result<Self> {
        if locations.len() != weights.len() {
            return Err(Error::Dimension {
                expected: locations.len(),
                found: weights.len(),
            });
        }
        Self::new(
            locations
                .iter()
                .zip(weights)
                .map(|(&t, &a)| Atom { t, a })
                .collect(),
        )
    }

    /// Single unit atom.
    pub fn dirac(t: f64) -> Result<Self> {
        Self::new(vec![Atom { t, a: 1.0 }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn locations(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.t)
    }

    /// Total variation norm, i.e. total mass for a nonnegative measure.
    pub fn tv_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.a).sum()
    }

    /// Sum of two measures (the union of their atoms, merged).
    pub fn merge(&self, other: &DiscreteMeasure) -> DiscreteMeasure {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        DiscreteMeasure {
            atoms: canonicalize(atoms),
        }
    }

    pub fn scaled(&self, c: f64) -> Result<DiscreteMeasure> {
        Self::new(self.atoms.iter().map(|a| Atom { t: a.t, a: a.a * c }).collect())
    }

    pub fn check_domain(&self, domain: &ParameterDomain) -> Result<()> {
        self.atoms.iter().try_for_each(|a| domain.check(a.t))
    }
}

fn canonicalize(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|x, y| x.t.total_cmp(&y.t));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for atom in atoms {
        match out.last_mut() {
            Some(last) if last.t == atom.t => last.a += atom.a,
            _ => out.push(atom),
        }
    }
    out.retain(|a| a.a > 0.0);
    out
}

#[derive(Deserialize)]
struct MeasureRepr {
    atoms: Vec<Atom>,
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MeasureRepr::deserialize(d)?;
        DiscreteMeasure::new(repr.atoms).map_err(serde::de::Error::custom)
    }
}

/// Parses `{"atoms":[{"t":..,"a":..},..]}`.
pub fn parse_measure_json(text: &str) -> Result<DiscreteMeasure> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn atom(t: f64, a: f64) -> Atom {
        Atom { t, a }
    }

    #[test]
    fn tv_mass_examples() {
        assert_eq!(DiscreteMeasure::empty().tv_mass(), 0.0);
        let truth = DiscreteMeasure::from_parts(
            &[0.1 * PI, 0.2 * PI, 0.3 * PI, 0.31 * PI],
            &[0.25, 0.25, 0.25, 0.25],
        )
        .unwrap();
        assert_eq!(truth.tv_mass(), 1.0);
        let x = DiscreteMeasure::new(vec![atom(0.3, 0.2), atom(0.7, 0.5)]).unwrap();
        assert!((x.tv_mass() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn canonical_form_merges_sorts_and_drops_zeros() {
        let x = DiscreteMeasure::new(vec![
            atom(0.5, 0.1),
            atom(0.2, 0.0),
            atom(0.1, 0.3),
            atom(0.5, 0.2),
        ])
        .unwrap();
        assert_eq!(x.atoms(), &[atom(0.1, 0.3), atom(0.5, 0.1 + 0.2)]);
    }

    #[test]
    fn rejects_negative_and_non_finite() {
        assert!(DiscreteMeasure::new(vec![atom(0.1, -0.5)]).is_err());
        assert!(DiscreteMeasure::new(vec![atom(f64::NAN, 0.5)]).is_err());
        assert!(DiscreteMeasure::new(vec![atom(0.1, f64::INFINITY)]).is_err());
    }

    #[test]
    fn domain_membership() {
        let half = ParameterDomain::half_open(0.0, 1.0).unwrap();
        assert!(half.contains(0.0) && !half.contains(1.0) && !half.contains(-1e-12));
        let closed = ParameterDomain::closed(0.0, 1.0).unwrap();
        assert!(closed.contains(1.0));
        assert!(ParameterDomain::closed(1.0, 1.0).is_err());
        assert!(ParameterDomain::closed(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn json_shape() {
        let x = DiscreteMeasure::new(vec![atom(0.7, 0.5), atom(0.3, 0.2)]).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"atoms":[{"t":0.3,"a":0.2},{"t":0.7,"a":0.5}]}"#);
        assert_eq!(parse_measure_json(&s).unwrap(), x);
        assert!(parse_measure_json(r#"{"atoms":[{"t":0.3,"a":-1}]}"#).is_err());
    }
}
