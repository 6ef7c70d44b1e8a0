use num_complex::Complex64;

use super::{QsimError, StateVector};

/// Vectors whose residual norm falls below this after orthogonalisation are
/// treated as dependent and dropped.
pub const DROP_TOLERANCE: f64 = 1e-10;

/// An orthonormal basis of the span of a list of states, built once by
/// modified Gram–Schmidt and reused for many projections.
#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    num_qubits: usize,
    vectors: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct SpanProjection {
    pub probability: f64,
    pub post_state: Option<StateVector>,
}

impl OrthonormalBasis {
    pub fn new(states: &[StateVector]) -> Result<Self, QsimError> {
        let first = states.first().ok_or(QsimError::EmptySupport)?;
        let num_qubits = first.num_qubits();
        let mut vectors: Vec<Vec<Complex64>> = Vec::new();
        for s in states {
            if s.num_qubits() != num_qubits {
                return Err(QsimError::DimensionMismatch {
                    left: num_qubits,
                    right: s.num_qubits(),
                });
            }
            let mut v = s.amps().to_vec();
            // Two passes keep the basis orthogonal to machine precision.
            for _ in 0..2 {
                for e in &vectors {
                    let c: Complex64 = e.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, a) in v.iter_mut().zip(e) {
                        *x -= c * a;
                    }
                }
            }
            let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
            if norm > DROP_TOLERANCE {
                for x in &mut v {
                    *x /= norm;
                }
                vectors.push(v);
            }
        }
        Ok(Self { num_qubits, vectors })
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// `‖Π ψ‖²` and the renormalised `Π ψ` (absent when the projection
    /// vanishes).
    pub fn project(&self, state: &StateVector) -> Result<SpanProjection, QsimError> {
        if state.num_qubits() != self.num_qubits {
            return Err(QsimError::DimensionMismatch {
                left: self.num_qubits,
                right: state.num_qubits(),
            });
        }
        if state.norm_sqr() == 0.0 {
            return Err(QsimError::ZeroState);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
        let mut probability = 0.0;
        for e in &self.vectors {
            let c: Complex64 = e.iter().zip(state.amps()).map(|(a, b)| a.conj() * b).sum();
            probability += c.norm_sqr();
            for (o, a) in out.iter_mut().zip(e) {
                *o += c * a;
            }
        }
        let post_state = if probability > DROP_TOLERANCE * DROP_TOLERANCE {
            Some(StateVector::normalized(self.num_qubits, out)?)
        } else {
            None
        };
        Ok(SpanProjection {
            probability: probability.min(1.0),
            post_state,
        })
    }

    /// `⟨x|Π|x⟩` for every basis state `x`.
    pub fn diagonal(&self) -> Vec<f64> {
        let dim = 1usize << self.num_qubits;
        let mut d = vec![0.0; dim];
        for e in &self.vectors {
            for (x, a) in d.iter_mut().zip(e) {
                *x += a.norm_sqr();
            }
        }
        d
    }

    /// `‖ψ − Π ψ‖²`, the weight outside the span.
    pub fn defect(&self, state: &StateVector) -> Result<f64, QsimError> {
        Ok((1.0 - self.project(state)?.probability).max(0.0))
    }
}

/// Projects `state` onto the span of `basis_states`.
pub fn project_onto_span(
    state: &StateVector,
    basis_states: &[StateVector],
) -> Result<SpanProjection, QsimError> {
    OrthonormalBasis::new(basis_states)?.project(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn in_span_and_orthogonal() {
        let b0 = StateVector::basis(2, 0).unwrap();
        let b1 = StateVector::basis(2, 1).unwrap();
        let plus = StateVector::uniform_over(&[0, 1], 2).unwrap();
        let p = project_onto_span(&plus, &[b0.clone(), b1.clone()]).unwrap();
        assert!((p.probability - 1.0).abs() < 1e-12);
        assert!(p.post_state.unwrap().fidelity(&plus).unwrap() > 1.0 - 1e-12);
        let p = project_onto_span(&StateVector::basis(2, 3).unwrap(), &[b0, b1]).unwrap();
        assert_eq!(p.probability, 0.0);
        assert!(p.post_state.is_none());
    }

    #[test]
    fn dependent_inputs_dropped() {
        let s = StateVector::random(3, &mut seeded(1)).unwrap();
        let basis = OrthonormalBasis::new(&[s.clone(), s.clone()]).unwrap();
        assert_eq!(basis.rank(), 1);
    }
}
