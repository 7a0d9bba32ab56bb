use crate::cvec::CVec;
use crate::dictionary::AtomDictionary;
use crate::error::{Error, Result};
use crate::loss::{Loss, LossModel};
use crate::measure::DiscreteMeasure;

/// `sum_i a_i Phi(t_i)` for a finitely supported measure.
pub fn synthesize(dict: &AtomDictionary, x: &DiscreteMeasure) -> Result<CVec> {
    let mut out = CVec::zeros(dict.m());
    for atom in x.atoms() {
        out.axpy(atom.a, &dict.eval(atom.t)?);
    }
    Ok(out)
}

/// Observations, dictionary, loss and TV bound of one inverse problem:
/// minimize `L(sum_i a_i Phi(t_i) - y)` over nonnegative measures of mass at most `tv_bound`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    y: CVec,
    dict: AtomDictionary,
    loss: LossModel,
    tv_bound: f64,
}

impl ProblemInstance {
    pub fn new(y: CVec, dict: AtomDictionary, loss: LossModel, tv_bound: f64) -> Result<Self> {
        if y.len() != dict.m() {
            return Err(Error::Dimension {
                expected: dict.m(),
                found: y.len(),
            });
        }
        if !(tv_bound.is_finite() && tv_bound > 0.0) {
            return Err(Error::Parameter(format!("TV bound must be positive, got {tv_bound}")));
        }
        Ok(Self {
            y,
            dict,
            loss,
            tv_bound,
        })
    }

    /// Unit TV bound and the unscaled quadratic loss.
    pub fn with_defaults(y: CVec, dict: AtomDictionary) -> Result<Self> {
        Self::new(y, dict, LossModel::default(), 1.0)
    }

    pub fn y(&self) -> &CVec {
        &self.y
    }

    pub fn dict(&self) -> &AtomDictionary {
        &self.dict
    }

    pub fn loss(&self) -> &LossModel {
        &self.loss
    }

    pub fn tv_bound(&self) -> f64 {
        self.tv_bound
    }

    /// Objective at the zero measure, `L(-y)`.
    pub fn loss_at_zero(&self) -> f64 {
        self.loss.value(&self.y.neg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;

    #[test]
    fn synthesize_examples() {
        let f = AtomDictionary::fourier(5).unwrap();
        let x = DiscreteMeasure::dirac(0.3).unwrap();
        assert_eq!(synthesize(&f, &x).unwrap(), f.eval(0.3).unwrap());
        assert_eq!(synthesize(&f, &DiscreteMeasure::empty()).unwrap(), CVec::zeros(5));

        let tab = AtomDictionary::tabulated_indexed(vec![
            CVec::from_real(&[1.0, 0.0]).unwrap(),
            CVec::from_real(&[0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let x = DiscreteMeasure::new(vec![Atom { t: 0.0, a: 0.5 }, Atom { t: 1.0, a: 0.5 }]).unwrap();
        assert_eq!(synthesize(&tab, &x).unwrap(), CVec::from_real(&[0.5, 0.5]).unwrap());
    }

    #[test]
    fn synthesize_rejects_out_of_domain() {
        let f = AtomDictionary::fourier(5).unwrap();
        let x = DiscreteMeasure::dirac(1.5).unwrap();
        assert!(matches!(synthesize(&f, &x), Err(Error::Domain { .. })));
    }

    #[test]
    fn instance_validation() {
        let f = AtomDictionary::fourier(5).unwrap();
        assert!(ProblemInstance::with_defaults(CVec::zeros(3), f.clone()).is_err());
        assert!(ProblemInstance::new(CVec::zeros(5), f.clone(), LossModel::default(), 0.0).is_err());
        let p = ProblemInstance::with_defaults(CVec::zeros(5), f).unwrap();
        assert_eq!(p.tv_bound(), 1.0);
    }
}
