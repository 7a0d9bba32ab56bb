//! Atom families `Phi: I -> C^m`, evaluation grids and sampled atom tables.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cvec::CVec;
use crate::error::{Error, Result};
use crate::measure::ParameterDomain;

/// Relative singular-value threshold used by [`AtomDictionary::chebyshev_check`].
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Trigonometric moment atom: entries `exp(pi i k t)` for
/// `k = -(m-1), -(m-1)+2, ..., m-1`. `m` must be odd.
pub fn fourier_atom(t: f64, m: usize) -> Result<CVec> {
    if m.is_multiple_of(2) {
        return Err(Error::Parameter(format!("trigonometric atoms need odd m, got {m}")));
    }
    let half = (m as i64 - 1) / 2;
    // k = 2j for j = -half..=half
    let entries = (-half..=half)
        .map(|j| Complex64::from_polar(1.0, std::f64::consts::PI * (2 * j) as f64 * t))
        .collect();
    Ok(CVec::from_vec_unchecked(entries))
}

/// Gaussian-window atom: entry `j` is `exp(-c (t - s_j)^2)`.
pub fn gaussian_atom(t: f64, samples: &[f64], c: f64) -> CVec {
    CVec::from_vec_unchecked(
        samples
            .iter()
            .map(|&s| Complex64::new((-c * (t - s) * (t - s)).exp(), 0.0))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    Fourier { m: usize },
    Gaussian { samples: Vec<f64>, c: f64 },
    /// Sorted by location.
    Tabulated { points: Vec<f64>, atoms: Vec<CVec> },
}

/// A continuous map from the parameter domain to `C^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomDictionary {
    family: Family,
    domain: ParameterDomain,
    m: usize,
}

impl AtomDictionary {
    /// Trigonometric moments on `[0, 1)`.
    pub fn fourier(m: usize) -> Result<Self> {
        if m == 0 || m.is_multiple_of(2) {
            return Err(Error::Parameter(format!("trigonometric atoms need odd m, got {m}")));
        }
        Ok(Self {
            family: Family::Fourier { m },
            domain: ParameterDomain::half_open(0.0, 1.0)?,
            m,
        })
    }

    /// Gaussian translates `exp(-c (t - s_j)^2)` on a closed domain.
    pub fn gaussian(samples: Vec<f64>, c: f64, domain: ParameterDomain) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Parameter("gaussian dictionary needs samples".into()));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Parameter(format!("gaussian width must be positive, got {c}")));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Parameter("gaussian samples must be finite".into()));
        }
        let m = samples.len();
        Ok(Self {
            family: Family::Gaussian { samples, c },
            domain,
            m,
        })
    }

    /// Gaussian dictionary with `count` uniform samples on `[lo, hi]` and domain `[lo, hi]`.
    pub fn gaussian_uniform(count: usize, lo: f64, hi: f64, c: f64) -> Result<Self> {
        let domain = ParameterDomain::closed(lo, hi)?;
        let samples = match count {
            0 => return Err(Error::Parameter("gaussian dictionary needs samples".into())),
            1 => vec![0.5 * (lo + hi)],
            _ => (0..count)
                .map(|j| lo + (hi - lo) * j as f64 / (count - 1) as f64)
                .collect(),
        };
        Self::gaussian(samples, c, domain)
    }

    /// Explicit table `point -> atom`.
    pub fn tabulated(points: Vec<f64>, atoms: Vec<CVec>, domain: ParameterDomain) -> Result<Self> {
        if points.len() != atoms.len() {
            return Err(Error::Dimension {
                expected: points.len(),
                found: atoms.len(),
            });
        }
        let m = atoms
            .first()
            .map(CVec::len)
            .ok_or_else(|| Error::Parameter("tabulated dictionary is empty".into()))?;
        if m == 0 {
            return Err(Error::Parameter("atoms must have positive dimension".into()));
        }
        if let Some(bad) = atoms.iter().find(|a| a.len() != m) {
            return Err(Error::Dimension {
                expected: m,
                found: bad.len(),
            });
        }
        let mut pairs: Vec<(f64, CVec)> = points.into_iter().zip(atoms).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Parameter(format!("duplicate tabulated point {}", w[0].0)));
            }
        }
        for (t, _) in &pairs {
            domain.check(*t)?;
        }
        let (points, atoms) = pairs.into_iter().unzip();
        Ok(Self {
            family: Family::Tabulated { points, atoms },
            domain,
            m,
        })
    }

    /// Tabulated dictionary with atom `i` placed at location `i`.
    pub fn tabulated_indexed(atoms: Vec<CVec>) -> Result<Self> {
        let n = atoms.len();
        let points = (0..n).map(|i| i as f64).collect();
        let hi = (n.max(2) - 1) as f64;
        Self::tabulated(points, atoms, ParameterDomain::closed(0.0, hi)?)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> &ParameterDomain {
        &self.domain
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Fourier { .. } => "fourier",
            Family::Gaussian { .. } => "gaussian",
            Family::Tabulated { .. } => "tabulated",
        }
    }

    pub fn is_fourier(&self) -> bool {
        matches!(self.family, Family::Fourier { .. })
    }

    /// `Phi(t)`, rejecting locations outside the domain.
    pub fn eval(&self, t: f64) -> Result<CVec> {
        self.domain.check(t)?;
        match &self.family {
            Family::Fourier { m } => fourier_atom(t, *m),
            Family::Gaussian { samples, c } => Ok(gaussian_atom(t, samples, *c)),
            Family::Tabulated { points, atoms } => points
                .binary_search_by(|p| p.total_cmp(&t))
                .map(|i| atoms[i].clone())
                .map_err(|_| Error::Parameter(format!("{t} is not a tabulated point"))),
        }
    }

    /// Atoms for a list of locations.
    pub fn eval_many(&self, ts: &[f64]) -> Result<Vec<CVec>> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }

    /// The evaluation grid with `n` points. Periodic domains use `lo + j w / n`,
    /// closed domains `lo + j w / (n - 1)`; tabulated families ignore `n` and
    /// use their table.
    pub fn uniform_grid(&self, n: usize) -> Result<Grid> {
        let d = self.domain;
        match &self.family {
            Family::Tabulated { points, .. } => Grid::new(points.clone()),
            _ => {
                if n < 2 {
                    return Err(Error::Parameter(format!("grid needs at least 2 points, got {n}")));
                }
                let points = if d.includes_hi {
                    (0..n)
                        .map(|j| {
                            if j == n - 1 {
                                d.hi
                            } else {
                                d.lo + d.width() * j as f64 / (n - 1) as f64
                            }
                        })
                        .collect()
                } else {
                    (0..n).map(|j| d.lo + d.width() * j as f64 / n as f64).collect()
                };
                Grid::new(points)
            }
        }
    }

    /// `r = max_t |Phi(t)|_2`: exact for trigonometric atoms, a grid scan otherwise.
    pub fn radius(&self, grid: &Grid) -> Result<f64> {
        if let Family::Fourier { m } = self.family {
            return Ok((m as f64).sqrt());
        }
        if grid.is_empty() {
            return Err(Error::Parameter("radius needs a nonempty grid".into()));
        }
        let norms = grid
            .points()
            .par_iter()
            .map(|&t| self.eval(t).map(|a| a.norm()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(norms.into_iter().fold(0.0, f64::max))
    }

    /// Whether `Phi(t_1), ..., Phi(t_m)` are numerically linearly independent:
    /// smallest singular value above [`RANK_TOLERANCE`] times the largest.
    pub fn chebyshev_check(&self, points: &[f64]) -> Result<bool> {
        if points.len() != self.m {
            return Err(Error::Dimension {
                expected: self.m,
                found: points.len(),
            });
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter("chebyshev check needs distinct points".into()));
        }
        let cols = self.eval_many(points)?;
        let mat = DMatrix::from_fn(self.m, self.m, |i, j| cols[j].entries()[i]);
        let sv = mat.singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(max > 0.0 && min > RANK_TOLERANCE * max)
    }
}

/// Strictly increasing evaluation points inside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parameter(format!(
                "grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parameter("grid points must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("grid points must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest gap between consecutive points.
    pub fn spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Stable content hash of the point set (hex, 16 chars).
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for p in &self.points {
            h.update(p.to_bits().to_le_bytes());
        }
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Atoms sampled once on a grid, stored row-major (`n x m`).
#[derive(Debug, Clone)]
pub struct AtomTable {
    grid: Grid,
    m: usize,
    data: Vec<Complex64>,
}

impl AtomTable {
    pub fn new(dict: &AtomDictionary, grid: &Grid) -> Result<Self> {
        let m = dict.m();
        let rows = grid
            .points()
            .par_iter()
            .map(|&t| dict.eval(t))
            .collect::<Result<Vec<CVec>>>()?;
        let mut data = Vec::with_capacity(rows.len() * m);
        for row in rows {
            data.extend(row.into_entries());
        }
        Ok(Self {
            grid: grid.clone(),
            m,
            data,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    /// `Re<Phi(t_i), g>` for every grid point, computed in parallel.
    pub fn correlations(&self, g: &CVec) -> Vec<f64> {
        let g = g.entries();
        self.data
            .par_chunks(self.m)
            .map(|row| crate::cvec::re_dot(row, g))
            .collect()
    }
}

/// Dictionary description used in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DictionarySpec {
    Fourier {
        m: usize,
    },
    Gaussian {
        c: f64,
        samples: SampleSpec,
    },
    Tabulated {
        points: Vec<f64>,
        atoms: Vec<CVec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
}

impl DictionarySpec {
    pub fn build(&self) -> Result<AtomDictionary> {
        match self {
            DictionarySpec::Fourier { m } => AtomDictionary::fourier(*m),
            DictionarySpec::Gaussian { c, samples } => {
                AtomDictionary::gaussian_uniform(samples.count, samples.lo, samples.hi, *c)
            }
            DictionarySpec::Tabulated { points, atoms } => {
                let lo = points.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = points.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let hi = if hi > lo { hi } else { lo + 1.0 };
                AtomDictionary::tabulated(points.clone(), atoms.clone(), ParameterDomain::closed(lo, hi)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn fourier_atom_examples() {
        let a = fourier_atom(0.0, 3).unwrap();
        assert!(a.entries().iter().all(|z| *z == Complex64::new(1.0, 0.0)));

        let a = fourier_atom(0.5, 3).unwrap();
        let expected = [-1.0, 1.0, -1.0];
        for (z, e) in a.entries().iter().zip(expected) {
            assert!(close(*z, Complex64::new(e, 0.0), 1e-15), "{z}");
        }

        let a = fourier_atom(0.1234, 33).unwrap();
        assert!((a.norm() - 33f64.sqrt()).abs() < 1e-12);

        assert!(fourier_atom(0.1, 4).is_err());
        assert!(AtomDictionary::fourier(32).is_err());
    }

    #[test]
    fn fourier_exponent_step_is_uniform() {
        let t = 0.37;
        let a = fourier_atom(t, 7).unwrap();
        let step = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t);
        for w in a.entries().windows(2) {
            assert!(close(w[1], w[0] * step, 1e-14));
        }
        assert!(close(
            a.entries()[0],
            Complex64::from_polar(1.0, -std::f64::consts::PI * 6.0 * t),
            1e-14
        ));
    }

    #[test]
    fn gaussian_atom_examples() {
        let a = gaussian_atom(0.5, &[0.4, 0.5, 0.6], 100.0);
        let e = (-1.0f64).exp();
        let expected = [e, 1.0, e];
        for (z, x) in a.entries().iter().zip(expected) {
            assert!((z.re - x).abs() < 1e-15 && z.im == 0.0);
        }
        let a = gaussian_atom(0.0, &[0.0, 0.7], 100.0);
        assert_eq!(a.entries()[0].re, 1.0);

        let samples = [0.8, 0.9, 1.0];
        let a = gaussian_atom(0.0, &samples, 100.0);
        let bound = (-100.0f64 * 0.8 * 0.8).exp();
        assert!(a.entries().iter().all(|z| z.re <= bound));
    }

    #[test]
    fn radius_examples() {
        let f = AtomDictionary::fourier(33).unwrap();
        let grid = f.uniform_grid(10).unwrap();
        assert_eq!(f.radius(&grid).unwrap(), 33f64.sqrt());

        let tab = AtomDictionary::tabulated_indexed(vec![
            CVec::from_real(&[1.0, 0.0]).unwrap(),
            CVec::from_real(&[0.0, 2.0]).unwrap(),
        ])
        .unwrap();
        let grid = tab.uniform_grid(0).unwrap();
        assert_eq!(tab.radius(&grid).unwrap(), 2.0);
    }

    #[test]
    fn gaussian_radius_brute_force_and_refinement() {
        let g = AtomDictionary::gaussian_uniform(33, 0.0, 1.0, 100.0).unwrap();
        let coarse = g.uniform_grid(1000).unwrap();
        let fine = g.uniform_grid(10_000).unwrap();
        let r = g.radius(&coarse).unwrap();
        let brute = coarse
            .points()
            .iter()
            .map(|&t| {
                (0..33)
                    .map(|j| {
                        let s = j as f64 / 32.0;
                        (-200.0 * (t - s) * (t - s)).exp()
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        assert!((r - brute).abs() < 1e-12);
        assert!((g.radius(&fine).unwrap() - r).abs() < 1e-3);
    }

    #[test]
    fn grid_conventions() {
        let f = AtomDictionary::fourier(3).unwrap();
        let g = f.uniform_grid(4).unwrap();
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 0.75]);
        assert_eq!(g.spacing(), 0.25);
        let gauss = AtomDictionary::gaussian_uniform(3, 0.0, 1.0, 100.0).unwrap();
        let g = gauss.uniform_grid(5).unwrap();
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(f.uniform_grid(1).is_err());
        assert!(Grid::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn eval_checks_domain_and_is_deterministic() {
        let f = AtomDictionary::fourier(5).unwrap();
        assert!(f.eval(1.0).is_err());
        assert!(f.eval(-0.1).is_err());
        assert_eq!(f.eval(0.3).unwrap(), f.eval(0.3).unwrap());
        let g = AtomDictionary::gaussian_uniform(5, 0.0, 1.0, 100.0).unwrap();
        assert!(g.eval(1.0).is_ok());
        assert!(g.eval(1.0 + 1e-9).is_err());
    }

    #[test]
    fn analytic_families_are_lipschitz_under_small_perturbations() {
        let h = 1e-7;
        let f = AtomDictionary::fourier(33).unwrap();
        let g = AtomDictionary::gaussian_uniform(33, 0.0, 1.0, 100.0).unwrap();
        for k in 0..50 {
            let t = 0.01 + 0.019 * k as f64;
            // |d/dt Phi| <= pi (m-1) sqrt(m) for trig atoms
            let df = f.eval(t + h).unwrap().sub(&f.eval(t).unwrap()).norm() / h;
            assert!(df <= std::f64::consts::PI * 32.0 * 33f64.sqrt());
            // |d/dt exp(-c u^2)| <= sqrt(2c/e) per entry
            let dg = g.eval(t + h).unwrap().sub(&g.eval(t).unwrap()).norm() / h;
            assert!(dg <= (200.0 / std::f64::consts::E).sqrt() * 33f64.sqrt());
        }
    }

    #[test]
    fn chebyshev_examples() {
        let f = AtomDictionary::fourier(3).unwrap();
        assert!(f.chebyshev_check(&[0.1, 0.2, 0.3]).unwrap());
        assert!(f.chebyshev_check(&[0.1, 0.1, 0.3]).is_err());
        assert!(f.chebyshev_check(&[0.1, 0.2]).is_err());

        let same = CVec::from_real(&[1.0, 2.0]).unwrap();
        let tab = AtomDictionary::tabulated_indexed(vec![same.clone(), same]).unwrap();
        assert!(!tab.chebyshev_check(&[0.0, 1.0]).unwrap());

        let g = AtomDictionary::gaussian_uniform(5, 0.0, 1.0, 100.0).unwrap();
        assert!(g.chebyshev_check(&[0.05, 0.3, 0.45, 0.7, 0.95]).unwrap());
    }

    #[test]
    fn dictionary_spec_json() {
        let spec: DictionarySpec = serde_json::from_str(r#"{"family":"fourier","m":33}"#).unwrap();
        assert_eq!(spec.build().unwrap().m(), 33);
        let spec: DictionarySpec = serde_json::from_str(
            r#"{"family":"gaussian","c":100,"samples":{"count":33,"lo":0,"hi":1}}"#,
        )
        .unwrap();
        let d = spec.build().unwrap();
        assert_eq!(d.m(), 33);
        assert_eq!(d.family_name(), "gaussian");
    }
}
