//! Cantor–Bendixson calculus on the compact ordinal intervals `[0, γ]` and on
//! the Cantor space.
//!
//! A point `ξ > 0` of `[0, γ]` with CNF trailing exponent `e` has scattered
//! height `e`, and `0` has height `0`. Consequently the `α`-th derived set is
//! `{ω^α · ζ : 1 ≤ ζ ≤ δ}` with `δ` the largest ordinal satisfying
//! `ω^α · δ ≤ γ`, which as an order type is again an interval.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::{ExtHeight, HeightKind, Ordinal};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OrdinalSpace {
    Empty,
    /// `[0, γ]` with the order topology.
    Interval(Ordinal),
    /// The uncountable zero-dimensional representative.
    Cantor,
}

/// Size of `X^{(ℏ(X))}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Multiplicity {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(n) => write!(f, "{n}"),
            Multiplicity::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FractalVerdict {
    BanachUltrafractal,
    NotTopologicalFractal,
}

impl FractalVerdict {
    pub fn is_fractal(self) -> bool {
        self == FractalVerdict::BanachUltrafractal
    }
}

impl fmt::Display for FractalVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FractalVerdict::BanachUltrafractal => write!(f, "BanachUltrafractal"),
            FractalVerdict::NotTopologicalFractal => write!(f, "NotTopologicalFractal"),
        }
    }
}

impl OrdinalSpace {
    pub fn interval(gamma: Ordinal) -> Self {
        OrdinalSpace::Interval(gamma)
    }

    /// Order type of the underlying point set (`γ + 1` for `[0, γ]`).
    pub fn order_type(&self) -> Result<Option<Ordinal>> {
        match self {
            OrdinalSpace::Empty => Ok(Some(Ordinal::zero())),
            OrdinalSpace::Interval(g) => Ok(Some(g.successor()?)),
            OrdinalSpace::Cantor => Ok(None),
        }
    }

    /// The `α`-th derived set `X^{(α)}`.
    pub fn derived_set_n(&self, alpha: &Ordinal) -> Result<OrdinalSpace> {
        match self {
            OrdinalSpace::Empty => Ok(OrdinalSpace::Empty),
            OrdinalSpace::Cantor => Ok(OrdinalSpace::Cantor),
            OrdinalSpace::Interval(g) if alpha.is_zero() => Ok(OrdinalSpace::Interval(g.clone())),
            OrdinalSpace::Interval(g) => {
                let delta = g.div_omega_pow(alpha)?;
                Ok(match delta.as_finite() {
                    Some(0) => OrdinalSpace::Empty,
                    Some(n) => OrdinalSpace::Interval(Ordinal::finite(n - 1)),
                    None => OrdinalSpace::Interval(delta),
                })
            }
        }
    }

    /// One Cantor–Bendixson derivative: the non-isolated points.
    pub fn derived_set(&self) -> Result<OrdinalSpace> {
        self.derived_set_n(&Ordinal::finite(1))
    }

    /// `(ℏ(X), |X^{(ℏ(X))}|)`.
    pub fn scattered_height(&self) -> Result<(ExtHeight, Multiplicity)> {
        match self {
            OrdinalSpace::Empty => Err(Error::EmptySpace),
            OrdinalSpace::Cantor => Ok((ExtHeight::Infinity, Multiplicity::Infinite)),
            OrdinalSpace::Interval(g) => match g.as_finite() {
                // [0, n] is n+1 isolated points
                Some(n) => Ok((
                    ExtHeight::zero(),
                    Multiplicity::Finite(n.checked_add(1).ok_or(Error::Overflow)?),
                )),
                None => {
                    let lead = g.leading().expect("infinite ordinal has terms");
                    Ok((
                        ExtHeight::Ord(lead.exponent.clone()),
                        Multiplicity::Finite(lead.coefficient),
                    ))
                }
            },
        }
    }

    pub fn is_unital(&self) -> Result<bool> {
        Ok(matches!(
            self.scattered_height()?.1,
            Multiplicity::Infinite | Multiplicity::Finite(1)
        ))
    }

    /// Splits `X` into unital clopen pieces of the same scattered height,
    /// listed left to right.
    pub fn unital_decomposition(&self) -> Result<Vec<OrdinalSpace>> {
        match self {
            OrdinalSpace::Empty => Err(Error::EmptySpace),
            OrdinalSpace::Cantor => Ok(vec![OrdinalSpace::Cantor]),
            OrdinalSpace::Interval(g) => {
                if let Some(n) = g.as_finite() {
                    let count = n.checked_add(1).ok_or(Error::Overflow)?;
                    return Ok((0..count)
                        .map(|_| OrdinalSpace::Interval(Ordinal::zero()))
                        .collect());
                }
                let lead = g.leading().expect("infinite ordinal has terms");
                let block = Ordinal::omega_pow(lead.exponent.clone());
                let tail = Ordinal::from_terms(g.terms()[1..].to_vec())?;
                let mut pieces: Vec<OrdinalSpace> = (1..lead.coefficient)
                    .map(|_| OrdinalSpace::Interval(block.clone()))
                    .collect();
                pieces.push(OrdinalSpace::Interval(block.add(&tail)?));
                Ok(pieces)
            }
        }
    }

    pub fn classify_fractal(&self) -> Result<FractalVerdict> {
        let (height, _) = self.scattered_height()?;
        Ok(verdict_for_height(&height))
    }
}

/// A zero-dimensional compact metrizable space is a fractal exactly when its
/// scattered height is not a limit ordinal.
pub fn verdict_for_height(height: &ExtHeight) -> FractalVerdict {
    match height.kind() {
        HeightKind::Limit => FractalVerdict::NotTopologicalFractal,
        _ => FractalVerdict::BanachUltrafractal,
    }
}

impl fmt::Display for OrdinalSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdinalSpace::Empty => write!(f, "empty"),
            OrdinalSpace::Interval(g) => write!(f, "[0,{g}]"),
            OrdinalSpace::Cantor => write!(f, "cantor"),
        }
    }
}

/// Space literals: `cantor`, or an ordinal literal `γ` meaning `[0, γ]`.
impl FromStr for OrdinalSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cantor" => Ok(OrdinalSpace::Cantor),
            other => Ok(OrdinalSpace::Interval(other.parse()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(s: &str) -> OrdinalSpace {
        s.parse().unwrap()
    }

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn derived_set_examples() {
        assert_eq!(sp("w").derived_set().unwrap(), sp("0"));
        assert_eq!(sp("5").derived_set().unwrap(), OrdinalSpace::Empty);
        assert_eq!(sp("w^2*3+w*2+5").derived_set().unwrap(), sp("w*3+2"));
        assert_eq!(sp("w*2").derived_set().unwrap(), sp("1"));
        assert_eq!(sp("w^(w+1)").derived_set().unwrap(), sp("w^(w+1)"));
        assert_eq!(sp("cantor").derived_set().unwrap(), OrdinalSpace::Cantor);
        assert_eq!(OrdinalSpace::Empty.derived_set().unwrap(), OrdinalSpace::Empty);
    }

    #[test]
    fn transfinite_derivative() {
        // [0, ω^ω] keeps a copy of itself at every finite stage and
        // collapses to the single top point at stage ω
        let x = sp("w^w");
        assert_eq!(x.derived_set_n(&o("3")).unwrap(), sp("w^w"));
        assert_eq!(x.derived_set_n(&o("w")).unwrap(), sp("0"));
        assert_eq!(x.derived_set_n(&o("w+1")).unwrap(), OrdinalSpace::Empty);
        assert_eq!(sp("w^2*3+w").derived_set_n(&o("2")).unwrap(), sp("2"));
    }

    #[test]
    fn scattered_height_examples() {
        assert_eq!(
            sp("w^2*3+w*2+5").scattered_height().unwrap(),
            (ExtHeight::finite(2), Multiplicity::Finite(3))
        );
        assert_eq!(
            sp("0").scattered_height().unwrap(),
            (ExtHeight::zero(), Multiplicity::Finite(1))
        );
        assert_eq!(
            sp("5").scattered_height().unwrap(),
            (ExtHeight::zero(), Multiplicity::Finite(6))
        );
        assert_eq!(
            sp("cantor").scattered_height().unwrap(),
            (ExtHeight::Infinity, Multiplicity::Infinite)
        );
        assert_eq!(
            OrdinalSpace::Empty.scattered_height(),
            Err(Error::EmptySpace)
        );
    }

    #[test]
    fn unitality() {
        assert!(sp("w^2").is_unital().unwrap());
        assert!(!sp("w*2").is_unital().unwrap());
        assert!(sp("cantor").is_unital().unwrap());
        assert!(sp("0").is_unital().unwrap());
        assert!(!sp("1").is_unital().unwrap());
        assert_eq!(OrdinalSpace::Empty.is_unital(), Err(Error::EmptySpace));
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(
            sp("w*2").unital_decomposition().unwrap(),
            vec![sp("w"), sp("w")]
        );
        assert_eq!(
            sp("w^2*3+w*2+5").unital_decomposition().unwrap(),
            vec![sp("w^2"), sp("w^2"), sp("w^2+w*2+5")]
        );
        assert_eq!(sp("w").unital_decomposition().unwrap(), vec![sp("w")]);
        assert_eq!(sp("2").unital_decomposition().unwrap().len(), 3);
        assert_eq!(
            sp("cantor").unital_decomposition().unwrap(),
            vec![OrdinalSpace::Cantor]
        );
        assert_eq!(
            OrdinalSpace::Empty.unital_decomposition(),
            Err(Error::EmptySpace)
        );
    }

    #[test]
    fn classification_examples() {
        use FractalVerdict::*;
        assert_eq!(sp("w").classify_fractal().unwrap(), BanachUltrafractal);
        assert_eq!(sp("w^w").classify_fractal().unwrap(), NotTopologicalFractal);
        assert_eq!(sp("cantor").classify_fractal().unwrap(), BanachUltrafractal);
        assert_eq!(sp("3").classify_fractal().unwrap(), BanachUltrafractal);
        assert_eq!(
            sp("w^(w+1)").classify_fractal().unwrap(),
            BanachUltrafractal
        );
    }
}
