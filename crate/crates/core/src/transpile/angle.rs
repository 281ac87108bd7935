use std::f64::consts::TAU;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A free variable in a circuit angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// Trainable parameter `p{k}`.
    Param(usize),
    /// Input feature `x{i}`.
    Feature(usize),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Param(k) => write!(f, "p{k}"),
            Symbol::Feature(i) => write!(f, "x{i}"),
        }
    }
}

/// Affine angle expression `offset + Σ coeff·symbol`, in radians.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Angle {
    pub offset: f64,
    pub terms: Vec<(Symbol, f64)>,
}

impl Angle {
    pub fn constant(v: f64) -> Self {
        Self {
            offset: v,
            terms: Vec::new(),
        }
    }

    pub fn symbol(s: Symbol) -> Self {
        Self {
            offset: 0.0,
            terms: vec![(s, 1.0)],
        }
    }

    pub fn param(k: usize) -> Self {
        Self::symbol(Symbol::Param(k))
    }

    pub fn feature(i: usize) -> Self {
        Self::symbol(Symbol::Feature(i))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for a constant that is a multiple of 2π within `1e-12`.
    pub fn is_trivial_rotation(&self) -> bool {
        if !self.is_constant() {
            return false;
        }
        let r = self.offset.rem_euclid(TAU);
        r < 1e-12 || TAU - r < 1e-12
    }

    pub fn plus(&self, rhs: &Angle) -> Angle {
        let mut out = self.clone();
        out.offset += rhs.offset;
        for &(s, c) in &rhs.terms {
            match out.terms.iter_mut().find(|(t, _)| *t == s) {
                Some(slot) => slot.1 += c,
                None => out.terms.push((s, c)),
            }
        }
        out.terms.retain(|&(_, c)| c != 0.0);
        out
    }

    pub fn offset_by(&self, v: f64) -> Angle {
        let mut out = self.clone();
        out.offset += v;
        out
    }

    pub fn scaled(&self, k: f64) -> Angle {
        Angle {
            offset: self.offset * k,
            terms: self
                .terms
                .iter()
                .map(|&(s, c)| (s, c * k))
                .filter(|&(_, c)| c != 0.0)
                .collect(),
        }
    }

    pub fn coefficient(&self, s: Symbol) -> f64 {
        self.terms
            .iter()
            .filter(|(t, _)| *t == s)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.terms.iter().map(|(s, _)| *s)
    }

    /// Evaluates with the given parameter and feature values.
    pub fn eval(&self, params: &[f64], features: &[f64]) -> Result<f64> {
        let mut v = self.offset;
        for &(s, c) in &self.terms {
            let x = match s {
                Symbol::Param(k) => params.get(k),
                Symbol::Feature(i) => features.get(i),
            }
            .ok_or_else(|| Error::Dimension(format!("no value bound for {s}")))?;
            v += c * x;
        }
        Ok(v)
    }

    /// Replaces symbols with values, leaving a constant.
    pub fn bind(&self, params: &[f64], features: &[f64]) -> Result<Angle> {
        Ok(Angle::constant(self.eval(params, features)?))
    }

    pub fn parse(text: &str) -> Result<Angle> {
        let bad = || Error::Domain(format!("cannot parse angle expression '{text}'"));
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut out = Angle::default();
        // split into signed terms, keeping exponents like 1e-3 intact
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for i in 1..bytes.len() {
            let c = bytes[i];
            if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'*') {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        for term in terms {
            let (sign, body) = match term.as_bytes().first() {
                Some(b'-') => (-1.0, &term[1..]),
                Some(b'+') => (1.0, &term[1..]),
                _ => (1.0, term),
            };
            let mut coeff = sign;
            let mut sym = None;
            for factor in body.split('*') {
                if let Some(s) = parse_symbol(factor) {
                    if sym.replace(s).is_some() {
                        return Err(bad());
                    }
                } else if factor == "pi" {
                    coeff *= std::f64::consts::PI;
                } else {
                    coeff *= factor.parse::<f64>().map_err(|_| bad())?;
                }
            }
            match sym {
                Some(s) => out = out.plus(&Angle::symbol(s).scaled(coeff)),
                None => out.offset += coeff,
            }
        }
        Ok(out)
    }
}

fn parse_symbol(s: &str) -> Option<Symbol> {
    let (head, digits) = s.split_at(1.min(s.len()));
    let idx = digits.parse::<usize>().ok()?;
    match head {
        "p" => Some(Symbol::Param(idx)),
        "x" => Some(Symbol::Feature(idx)),
        _ => None,
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle::constant(v)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for &(s, c) in &self.terms {
            if wrote {
                f.write_str(if c < 0.0 { "-" } else { "+" })?;
            } else if c < 0.0 {
                f.write_str("-")?;
            }
            if c.abs() != 1.0 {
                write!(f, "{}*", c.abs())?;
            }
            write!(f, "{s}")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "{}", self.offset)
        } else if self.offset != 0.0 {
            write!(
                f,
                "{}{}",
                if self.offset < 0.0 { "-" } else { "+" },
                self.offset.abs()
            )
        } else {
            Ok(())
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_constant() {
            s.serialize_f64(self.offset)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Angle::constant(v)),
            Raw::Text(t) => Angle::parse(&t).map_err(de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["p3", "x0", "-0.5*p2+3.5", "2*x1-p0", "1.5e-3", "-p1-1e-2"] {
            let a = Angle::parse(text).unwrap();
            let again = Angle::parse(&a.to_string()).unwrap();
            assert_eq!(a, again, "{text}");
        }
        let a = Angle::parse("-0.5*p2 + pi").unwrap();
        assert_eq!(a.coefficient(Symbol::Param(2)), -0.5);
        assert!((a.offset - std::f64::consts::PI).abs() < 1e-15);
        assert!(Angle::parse("q1").is_err());
        assert!(Angle::parse("p1*p2").is_err());
    }

    #[test]
    fn arithmetic_and_binding() {
        let a = Angle::param(1).scaled(0.5).offset_by(1.0);
        let b = Angle::param(1).scaled(-0.5).plus(&Angle::feature(0));
        let c = a.plus(&b);
        assert_eq!(c.terms, vec![(Symbol::Feature(0), 1.0)]);
        assert_eq!(c.eval(&[0.0, 9.0], &[2.0]).unwrap(), 3.0);
        assert!(c.eval(&[], &[]).is_err());
    }

    #[test]
    fn trivial_rotations() {
        assert!(Angle::constant(0.0).is_trivial_rotation());
        assert!(Angle::constant(2.0 * TAU).is_trivial_rotation());
        assert!(Angle::constant(-TAU).is_trivial_rotation());
        assert!(!Angle::constant(0.1).is_trivial_rotation());
        assert!(!Angle::param(0)
            .scaled(0.0)
            .plus(&Angle::param(1))
            .is_trivial_rotation());
    }
}
