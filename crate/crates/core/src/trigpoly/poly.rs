//! Sparse polynomials with exact rational weights over an abstract monomial type.
//!
//! Zero weights are never stored, so structural equality is mathematical equality.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num::{BigRational, One, Zero};

pub type Rational = BigRational;

/// Exponent vector of a monomial. Multiplication of monomials adds exponents.
pub trait Exponents: Ord + Clone + Debug {
    fn unit() -> Self;
    fn times(&self, other: &Self) -> Self;
    /// Total degree in the heterogeneity amplitudes; drives amplitude truncation.
    fn amplitude_degree(&self) -> u32;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly<M: Exponents> {
    terms: BTreeMap<M, Rational>,
}

impl<M: Exponents> Default for Poly<M> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<M: Exponents> Poly<M> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(w: Rational) -> Self {
        Self::term(M::unit(), w)
    }

    pub fn term(m: M, w: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, w);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, w)| *m == M::unit() && w.is_one())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&M, &Rational)> {
        self.terms.iter()
    }

    pub fn weight(&self, m: &M) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Highest amplitude degree present; `None` for the zero polynomial.
    pub fn max_amplitude_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exponents::amplitude_degree).max()
    }

    pub fn min_amplitude_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exponents::amplitude_degree).min()
    }

    pub fn add_term(&mut self, m: M, w: Rational) {
        if w.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(w);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += w;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (m, w) in &other.terms {
            self.add_term(m.clone(), w.clone());
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: &Rational) {
        if s.is_zero() {
            return;
        }
        for (m, w) in &other.terms {
            self.add_term(m.clone(), w * s);
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, w)| (m.clone(), w * s)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, w)| (m.clone(), -w)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_scaled(other, &-Rational::one());
        out
    }

    /// Product, discarding monomials whose amplitude degree exceeds `max_a`.
    pub fn mul_trunc(&self, other: &Self, max_a: u32) -> Self {
        let mut out = Self::zero();
        for (ma, wa) in &self.terms {
            let da = ma.amplitude_degree();
            if da > max_a {
                continue;
            }
            for (mb, wb) in &other.terms {
                if da + mb.amplitude_degree() > max_a {
                    continue;
                }
                out.add_term(ma.times(mb), wa * wb);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_trunc(other, u32::MAX)
    }

    pub fn truncate(&self, max_a: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.amplitude_degree() <= max_a)
                .map(|(m, w)| (m.clone(), w.clone()))
                .collect(),
        }
    }

    /// Keep only the monomials accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&M) -> bool) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, w)| (m.clone(), w.clone()))
                .collect(),
        }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (M, Rational)>) -> Self {
        let mut p = Self::zero();
        for (m, w) in iter {
            p.add_term(m, w);
        }
        p
    }
}

/// Parse `"num/den"` or an integer string into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    use num::BigInt;
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Parse a decimal literal such as `0.975`, `-1.5e-2` or `3/4` exactly.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    use num::BigInt;
    let s = s.trim();
    if s.contains('/') {
        return parse_rational(s);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exp - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num::pow(ten, scale as usize);
    } else {
        value /= num::pow(ten, (-scale) as usize);
    }
    Some(if neg { -value } else { value })
}

/// `"num/den"` form used by every serialized artifact.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    use num::ToPrimitive;
    match q.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            // Very large numerator and denominator: scale both down first.
            let n = q.numer().to_f64().unwrap_or(f64::NAN);
            let d = q.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
