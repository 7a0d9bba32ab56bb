//! Differentiable losses on `C^m` with their Fenchel conjugates.

use serde::{Deserialize, Serialize};

use crate::cvec::CVec;
use crate::error::{Error, Result};

/// Interface every loss must provide to the solvers.
///
/// `gamma` is the constant for which
/// `|x - x'|^2 / (2 gamma) <= L(x) - L(x') - Re<x - x', grad L(x')> <= gamma/2 |x - x'|^2`.
pub trait Loss {
    fn value(&self, z: &CVec) -> f64;
    fn gradient(&self, z: &CVec) -> CVec;
    /// `L_o(lambda) = sup_z Re<lambda, z> - L(z)`.
    fn conjugate(&self, lambda: &CVec) -> f64;
    fn conjugate_gradient(&self, lambda: &CVec) -> CVec;
    fn gamma(&self) -> f64;
    /// Tight Lipschitz constant of the gradient (at most `gamma`).
    fn smoothness(&self) -> f64;
    /// Strong convexity modulus (at least `1 / gamma`).
    fn strong_convexity(&self) -> f64;
}

/// The losses that ship with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossModel {
    /// `L(z) = sigma/2 |z|^2`.
    ScaledQuadratic { sigma: f64 },
}

impl Default for LossModel {
    fn default() -> Self {
        LossModel::ScaledQuadratic { sigma: 1.0 }
    }
}

impl LossModel {
    pub fn scaled_quadratic(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Parameter(format!("loss scale must be positive, got {sigma}")));
        }
        Ok(LossModel::ScaledQuadratic { sigma })
    }

    /// Value and gradient in one call.
    pub fn eval(&self, z: &CVec) -> (f64, CVec) {
        (self.value(z), self.gradient(z))
    }
}

impl Loss for LossModel {
    fn value(&self, z: &CVec) -> f64 {
        match *self {
            LossModel::ScaledQuadratic { sigma } => 0.5 * sigma * z.norm_sq(),
        }
    }

    fn gradient(&self, z: &CVec) -> CVec {
        match *self {
            LossModel::ScaledQuadratic { sigma } => z.scale(sigma),
        }
    }

    fn conjugate(&self, lambda: &CVec) -> f64 {
        match *self {
            LossModel::ScaledQuadratic { sigma } => lambda.norm_sq() / (2.0 * sigma),
        }
    }

    fn conjugate_gradient(&self, lambda: &CVec) -> CVec {
        match *self {
            LossModel::ScaledQuadratic { sigma } => lambda.scale(1.0 / sigma),
        }
    }

    fn gamma(&self) -> f64 {
        match *self {
            LossModel::ScaledQuadratic { sigma } => sigma.max(1.0 / sigma),
        }
    }

    fn smoothness(&self) -> f64 {
        match *self {
            LossModel::ScaledQuadratic { sigma } => sigma,
        }
    }

    fn strong_convexity(&self) -> f64 {
        match *self {
            LossModel::ScaledQuadratic { sigma } => sigma,
        }
    }
}
