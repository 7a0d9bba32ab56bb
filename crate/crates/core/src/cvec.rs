//! Complex measurement vectors.
//!
//! All formulas only ever use `Re<a, b>`, which is the Euclidean inner
//! product of `C^m` viewed as `R^{2m}`. The helpers here work in that
//! real embedding so gradients and the finite-dimensional solvers stay real.

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite vector in `C^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec {
    entries: Vec<Complex64>,
}

impl CVec {
    /// Builds a vector, rejecting non-finite entries.
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parameter(format!("entry {i} is not finite")));
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            entries: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    /// Real vector embedded in `C^m`.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    /// `Re<self, other>` with `<a, b> = sum conj(a_i) b_i`.
    pub fn re_dot(&self, other: &CVec) -> f64 {
        re_dot(&self.entries, &other.entries)
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: f64) -> CVec {
        CVec::from_vec_unchecked(self.entries.iter().map(|z| z * c).collect())
    }

    pub fn add(&self, other: &CVec) -> CVec {
        debug_assert_eq!(self.len(), other.len());
        CVec::from_vec_unchecked(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &CVec) -> CVec {
        debug_assert_eq!(self.len(), other.len());
        CVec::from_vec_unchecked(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &CVec) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * c;
        }
    }

    pub fn neg(&self) -> CVec {
        CVec::from_vec_unchecked(self.entries.iter().map(|z| -z).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// `Re sum conj(a_i) b_i`, i.e. the real inner product of the `R^{2m}` embeddings.
pub fn re_dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

// Serialized as an array of `[re, im]` pairs.
impl Serialize for CVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for z in &self.entries {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for CVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        CVec::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .map_err(de::Error::custom)
    }
}

/// Parses a JSON array of `[re, im]` pairs.
pub fn parse_cvec_json(text: &str) -> Result<CVec> {
    Ok(serde_json::from_str(text)?)
}
