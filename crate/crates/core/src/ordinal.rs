//! Ordinals below epsilon-zero in Cantor normal form, extended by `-1` and `∞`.
//!
//! An [`Ordinal`] is stored as its CNF term list `ω^{e₁}·c₁ + … + ω^{e_k}·c_k`
//! with strictly descending exponents and positive coefficients. Because the
//! representation is canonical, the derived structural order on the term list
//! coincides with the ordinal order.
//!
//! Literal grammar (whitespace is ignored):
//!
//! ```text
//! ext      := "-1" | "inf" | ordinal
//! ordinal  := term ("+" term)*
//! term     := "w" ["^" exponent] ["*" number] | number
//! exponent := number | "w" | "(" ordinal ")"
//! ```
//!
//! The parser rejects non-normal input (`w+w`, `3+w`, `w*0`) instead of
//! normalizing it; [`fmt::Display`] prints the canonical literal.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One CNF term `ω^exponent · coefficient`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub exponent: Ordinal,
    pub coefficient: u64,
}

/// An ordinal below ε₀ in Cantor normal form. The empty term list is 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ordinal {
    terms: Vec<Term>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeightKind {
    MinusOne,
    Zero,
    Successor,
    Limit,
    Infinity,
}

impl fmt::Display for HeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeightKind::MinusOne => "minus-one",
            HeightKind::Zero => "zero",
            HeightKind::Successor => "successor",
            HeightKind::Limit => "limit",
            HeightKind::Infinity => "infinity",
        })
    }
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn finite(n: u64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        Ordinal {
            terms: vec![Term {
                exponent: Ordinal::zero(),
                coefficient: n,
            }],
        }
    }

    pub fn omega() -> Self {
        Self::omega_pow(Ordinal::finite(1))
    }

    /// `ω^exponent`.
    pub fn omega_pow(exponent: Ordinal) -> Self {
        Ordinal {
            terms: vec![Term {
                exponent,
                coefficient: 1,
            }],
        }
    }

    /// Builds an ordinal from CNF terms, rejecting non-normal input.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.coefficient == 0 {
                return Err(Error::ZeroCoefficient);
            }
        }
        if terms.windows(2).any(|w| w[0].exponent <= w[1].exponent) {
            return Err(Error::NonDescending);
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a machine integer when the ordinal is finite.
    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exponent.is_zero() => Some(t.coefficient),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_finite().is_some()
    }

    pub fn leading(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn kind(&self) -> HeightKind {
        match self.terms.last() {
            None => HeightKind::Zero,
            Some(t) if t.exponent.is_zero() => HeightKind::Successor,
            Some(_) => HeightKind::Limit,
        }
    }

    /// Standard (non-commutative) ordinal addition.
    pub fn add(&self, rhs: &Ordinal) -> Result<Ordinal> {
        let Some(head) = rhs.terms.first() else {
            return Ok(self.clone());
        };
        let mut terms: Vec<Term> = self
            .terms
            .iter()
            .take_while(|t| t.exponent > head.exponent)
            .cloned()
            .collect();
        let carried = self
            .terms
            .iter()
            .find(|t| t.exponent == head.exponent)
            .map_or(0, |t| t.coefficient);
        terms.push(Term {
            exponent: head.exponent.clone(),
            coefficient: head
                .coefficient
                .checked_add(carried)
                .ok_or(Error::Overflow)?,
        });
        terms.extend(rhs.terms[1..].iter().cloned());
        Ok(Ordinal { terms })
    }

    pub fn successor(&self) -> Result<Ordinal> {
        self.add(&Ordinal::finite(1))
    }

    /// The predecessor of a successor ordinal.
    pub fn predecessor(&self) -> Option<Ordinal> {
        if self.kind() != HeightKind::Successor {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().expect("successor has terms");
        if last.coefficient == 1 {
            terms.pop();
        } else {
            last.coefficient -= 1;
        }
        Some(Ordinal { terms })
    }

    /// The unique `ξ` with `alpha + ξ = self`; requires `alpha <= self`.
    pub fn left_sub(&self, alpha: &Ordinal) -> Result<Ordinal> {
        if alpha > self {
            return Err(Error::NotLeftSubtractable);
        }
        let mut i = 0;
        while i < alpha.terms.len() && i < self.terms.len() && alpha.terms[i] == self.terms[i] {
            i += 1;
        }
        if i == alpha.terms.len() {
            return Ok(Ordinal {
                terms: self.terms[i..].to_vec(),
            });
        }
        let a = &alpha.terms[i];
        let b = &self.terms[i];
        let mut terms = Vec::new();
        if a.exponent == b.exponent {
            // alpha <= self forces a smaller coefficient here
            terms.push(Term {
                exponent: b.exponent.clone(),
                coefficient: b.coefficient - a.coefficient,
            });
            terms.extend(self.terms[i + 1..].iter().cloned());
        } else {
            terms.extend(self.terms[i..].iter().cloned());
        }
        Ok(Ordinal { terms })
    }

    /// The largest `δ` with `ω^alpha · δ <= self`.
    pub fn div_omega_pow(&self, alpha: &Ordinal) -> Result<Ordinal> {
        let mut terms = Vec::new();
        for t in self.terms.iter().filter(|t| t.exponent >= *alpha) {
            terms.push(Term {
                exponent: t.exponent.left_sub(alpha)?,
                coefficient: t.coefficient,
            });
        }
        Ok(Ordinal { terms })
    }

    /// Element `n` of the Wainer fundamental sequence of a limit ordinal:
    /// `(γ+ω^{β+1})[n] = γ+ω^β·n` and `(γ+ω^δ)[n] = γ+ω^{δ[n]}` for limit `δ`.
    pub fn fundamental(&self, n: u64) -> Result<Ordinal> {
        if self.kind() != HeightKind::Limit {
            return Err(Error::NotLimit(ExtHeight::Ord(self.clone())));
        }
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        let mut terms = self.terms.clone();
        let last = terms.pop().expect("limit has terms");
        if last.coefficient > 1 {
            terms.push(Term {
                exponent: last.exponent.clone(),
                coefficient: last.coefficient - 1,
            });
        }
        match last.exponent.predecessor() {
            Some(pred) => terms.push(Term {
                exponent: pred,
                coefficient: n,
            }),
            None => terms.push(Term {
                exponent: last.exponent.fundamental(n)?,
                coefficient: 1,
            }),
        }
        Ok(Ordinal { terms })
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            match t.exponent.as_finite() {
                Some(0) => write!(f, "{}", t.coefficient)?,
                Some(1) => write!(f, "w")?,
                Some(e) => write!(f, "w^{e}")?,
                None if t.exponent == Ordinal::omega() => write!(f, "w^w")?,
                None => write!(f, "w^({})", t.exponent)?,
            }
            if !t.exponent.is_zero() && t.coefficient > 1 {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

/// An element of `{-1} ∪ ε₀ ∪ {∞}`, ordered `-1 < every ordinal < ∞`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtHeight {
    MinusOne,
    Ord(Ordinal),
    Infinity,
}

impl ExtHeight {
    pub fn zero() -> Self {
        ExtHeight::Ord(Ordinal::zero())
    }

    pub fn finite(n: u64) -> Self {
        ExtHeight::Ord(Ordinal::finite(n))
    }

    pub fn omega() -> Self {
        ExtHeight::Ord(Ordinal::omega())
    }

    pub fn as_ordinal(&self) -> Option<&Ordinal> {
        match self {
            ExtHeight::Ord(o) => Some(o),
            _ => None,
        }
    }

    pub fn kind(&self) -> HeightKind {
        match self {
            ExtHeight::MinusOne => HeightKind::MinusOne,
            ExtHeight::Ord(o) => o.kind(),
            ExtHeight::Infinity => HeightKind::Infinity,
        }
    }

    /// `-1` or `0`: nodes of such height have only their central successor.
    pub fn is_leaf_like(&self) -> bool {
        matches!(self.kind(), HeightKind::MinusOne | HeightKind::Zero)
    }

    /// `α − 1 = sup{β : β+1 ≤ α}`: predecessor on successors, identity on
    /// `0`, limits and `∞`.
    pub fn minus_one(&self) -> Result<ExtHeight> {
        match self {
            ExtHeight::MinusOne => Err(Error::NotOrdinal(self.clone())),
            ExtHeight::Infinity => Ok(ExtHeight::Infinity),
            ExtHeight::Ord(o) => Ok(ExtHeight::Ord(o.predecessor().unwrap_or_else(|| o.clone()))),
        }
    }

    /// `h + 1` with `-1 + 1 = 0` and `∞ + 1 = ∞`.
    pub fn plus_one(&self) -> Result<ExtHeight> {
        match self {
            ExtHeight::MinusOne => Ok(ExtHeight::zero()),
            ExtHeight::Infinity => Ok(ExtHeight::Infinity),
            ExtHeight::Ord(o) => Ok(ExtHeight::Ord(o.successor()?)),
        }
    }
}

impl From<Ordinal> for ExtHeight {
    fn from(o: Ordinal) -> Self {
        ExtHeight::Ord(o)
    }
}

impl fmt::Display for ExtHeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtHeight::MinusOne => write!(f, "-1"),
            ExtHeight::Ord(o) => write!(f, "{o}"),
            ExtHeight::Infinity => write!(f, "inf"),
        }
    }
}

pub fn compare(a: &ExtHeight, b: &ExtHeight) -> Ordering {
    a.cmp(b)
}

/// Ordinal addition on extended heights; `-1` and `∞` are rejected.
pub fn ord_add(a: &ExtHeight, b: &ExtHeight) -> Result<ExtHeight> {
    match (a, b) {
        (ExtHeight::Ord(x), ExtHeight::Ord(y)) => Ok(ExtHeight::Ord(x.add(y)?)),
        (ExtHeight::Ord(_), other) | (other, _) => Err(Error::NotOrdinal(other.clone())),
    }
}

pub fn classify_kind(a: &ExtHeight) -> HeightKind {
    a.kind()
}

pub fn height_minus_one(a: &ExtHeight) -> Result<ExtHeight> {
    a.minus_one()
}

pub fn fundamental_sequence(a: &ExtHeight, n: u64) -> Result<Ordinal> {
    match a {
        ExtHeight::Ord(o) => o.fundamental(n),
        other => Err(Error::NotLimit(other.clone())),
    }
}

pub fn parse_ordinal(text: &str) -> Result<ExtHeight> {
    text.parse()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn number(&mut self) -> Result<u64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Overflow)
    }

    fn exponent(&mut self) -> Result<Ordinal> {
        match self.peek() {
            Some(b'0'..=b'9') => Ok(Ordinal::finite(self.number()?)),
            Some(b'w') => {
                self.pos += 1;
                Ok(Ordinal::omega())
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.ordinal()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            _ => self.err("expected an exponent"),
        }
    }

    fn term(&mut self) -> Result<Term> {
        if self.eat(b'w') {
            let exponent = if self.eat(b'^') {
                self.exponent()?
            } else {
                Ordinal::finite(1)
            };
            let coefficient = if self.eat(b'*') { self.number()? } else { 1 };
            return Ok(Term {
                exponent,
                coefficient,
            });
        }
        let coefficient = self.number()?;
        Ok(Term {
            exponent: Ordinal::zero(),
            coefficient,
        })
    }

    fn ordinal(&mut self) -> Result<Ordinal> {
        let mut terms = vec![self.term()?];
        while self.eat(b'+') {
            terms.push(self.term()?);
        }
        // a lone "0" denotes zero
        if terms.len() == 1 && terms[0].exponent.is_zero() && terms[0].coefficient == 0 {
            return Ok(Ordinal::zero());
        }
        Ordinal::from_terms(terms)
    }
}

impl FromStr for Ordinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser {
            src: cleaned.as_bytes(),
            pos: 0,
        };
        let o = p.ordinal()?;
        if p.pos != p.src.len() {
            return p.err("trailing input");
        }
        Ok(o)
    }
}

impl FromStr for ExtHeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "-1" => Ok(ExtHeight::MinusOne),
            "inf" => Ok(ExtHeight::Infinity),
            other => Ok(ExtHeight::Ord(other.parse()?)),
        }
    }
}

impl Serialize for ExtHeight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtHeight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
