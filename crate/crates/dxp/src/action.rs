//! Actions as seen by environments, the replay buffer, and the world model.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Index into a finite action set.
    Discrete(usize),
    /// Raw action vector for continuous spaces.
    Continuous(Vec<f64>),
}

impl Action {
    /// Encode for model input: one-hot for discrete actions, raw values for
    /// continuous ones. `dim` is the model's declared action dimension.
    pub fn encode(&self, dim: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; dim];
        self.encode_into(dim, &mut out)?;
        Ok(out)
    }

    pub fn encode_into(&self, dim: usize, out: &mut [f64]) -> Result<()> {
        if out.len() != dim {
            return Err(Error::DimensionMismatch {
                what: "action encoding buffer",
                expected: dim,
                got: out.len(),
            });
        }
        out.fill(0.0);
        match self {
            Action::Discrete(i) => {
                if *i >= dim {
                    return Err(Error::DimensionMismatch {
                        what: "discrete action index",
                        expected: dim,
                        got: *i,
                    });
                }
                out[*i] = 1.0;
            }
            Action::Continuous(v) => {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        what: "continuous action",
                        expected: dim,
                        got: v.len(),
                    });
                }
                out.copy_from_slice(v);
            }
        }
        Ok(())
    }

    /// The all-zero placeholder stored on episode-start transitions.
    pub fn null_discrete() -> Action {
        Action::Discrete(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_encoding() {
        assert_eq!(Action::Discrete(2).encode(4).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert!(Action::Discrete(4).encode(4).is_err());
    }

    #[test]
    fn continuous_passthrough() {
        let a = Action::Continuous(vec![0.5, -0.25]);
        assert_eq!(a.encode(2).unwrap(), vec![0.5, -0.25]);
        assert!(a.encode(3).is_err());
    }
}
