use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, Rational};
use crate::structure::word::Word;

/// Weights `θ` of the self-similar measure `μ_θ`, with `μ_θ(K_w) = θ_w`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfSimilarWeights {
    theta: Vec<Rational>,
}

impl SelfSimilarWeights {
    /// Requires every weight positive and the weights summing to one.
    pub fn new(theta: Vec<Rational>) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::Invalid("need at least two measure weights".into()));
        }
        if let Some((i, t)) = theta.iter().enumerate().find(|(_, t)| !t.is_positive()) {
            return Err(Error::Invalid(format!("measure weight {i} = {} is not positive", format_rational(t))));
        }
        let total: Rational = theta.iter().sum();
        if !total.is_one() {
            return Err(Error::Invalid(format!("measure weights sum to {}, not 1", format_rational(&total))));
        }
        Ok(Self { theta })
    }

    pub fn uniform(n: usize) -> Self {
        Self { theta: vec![Rational::new(1.into(), (n as i64).into()); n] }
    }

    pub fn theta(&self) -> &[Rational] {
        &self.theta
    }

    /// `θ_w = θ_{w₁} ⋯ θ_{w_m}`, with `θ_∅ = 1`.
    pub fn measure_weight(&self, w: &Word) -> Rational {
        w.symbols().fold(Rational::one(), |acc, s| acc * &self.theta[s.index()])
    }

    /// `μ_θ(K_w)` for every `w ∈ W_m`, in lexicographic order.
    pub fn level_weights(&self, m: usize) -> Vec<Rational> {
        let mut out = vec![Rational::one()];
        for _ in 0..m {
            out = out.iter().flat_map(|p| self.theta.iter().map(move |t| p * t)).collect();
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty() || self.theta.iter().all(Zero::is_zero)
    }
}
