//! Trigonometric series in the two microscale phases, multiplying derivatives of
//! the macroscale mean field `U`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{One, Zero};

use super::poly::{frac, int, Rational};
use super::ring::{CoeffMonomial, RingElement, Substitution, Wavenumbers};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Cos,
    Sin,
}

/// `cos` or `sin` of `m·k1·x1 + n·k2·x2`, always stored in canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Harmonic {
    m: i64,
    n: i64,
    parity: Parity,
}

impl Harmonic {
    pub const CONST: Harmonic = Harmonic {
        m: 0,
        n: 0,
        parity: Parity::Cos,
    };

    /// Canonical representative and the sign it absorbs, or `None` for the
    /// identically vanishing `sin(0)`.
    pub fn canonical(m: i64, n: i64, parity: Parity) -> Option<(Harmonic, bool)> {
        if m == 0 && n == 0 && parity == Parity::Sin {
            return None;
        }
        let flip = m < 0 || (m == 0 && n < 0);
        let (m, n) = if flip { (-m, -n) } else { (m, n) };
        let negate = flip && parity == Parity::Sin;
        Some((Harmonic { m, n, parity }, negate))
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_constant(&self) -> bool {
        self.m == 0 && self.n == 0
    }

    /// Phase `m·k1·x1 + n·k2·x2` at a numeric point.
    pub fn phase(&self, k1: f64, k2: f64, x1: f64, x2: f64) -> f64 {
        self.m as f64 * k1 * x1 + self.n as f64 * k2 * x2
    }

    pub fn eval(&self, k1: f64, k2: f64, x1: f64, x2: f64) -> f64 {
        let t = self.phase(k1, k2, x1, x2);
        match self.parity {
            Parity::Cos => t.cos(),
            Parity::Sin => t.sin(),
        }
    }
}

impl fmt::Display for Harmonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let name = match self.parity {
            Parity::Cos => "cos",
            Parity::Sin => "sin",
        };
        let arg = match (self.m, self.n) {
            (m, 0) => format!("{m}*q1"),
            (0, n) => format!("{n}*q2"),
            (m, n) => format!("{m}*q1{n:+}*q2"),
        };
        write!(f, "{name}({arg})")
    }
}

/// Whether a series multiplies derivatives of `U` (a field) or is a bare
/// coefficient function of the phases (diffusivity, its reciprocal).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    Scalar,
    Field,
}

/// Retained orders: derivative order `d ≤ max_d`, amplitude degree `≤ max_a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    pub max_d: u32,
    pub max_a: u32,
}

impl Truncation {
    pub fn new(max_d: u32, max_a: u32) -> Self {
        Self { max_d, max_a }
    }

    pub fn min(self, o: Truncation) -> Truncation {
        Truncation::new(self.max_d.min(o.max_d), self.max_a.min(o.max_a))
    }
}

pub type TermKey = (u32, Harmonic);

/// `Σ coeff(d, h) · h(x1, x2) · ∂x^d U`, or for scalars `Σ coeff(h) · h(x1, x2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSeries {
    kind: SeriesKind,
    wavenumbers: Wavenumbers,
    truncation: Truncation,
    terms: BTreeMap<TermKey, RingElement>,
}

fn accumulate(terms: &mut BTreeMap<TermKey, RingElement>, key: TermKey, c: RingElement) {
    if c.is_zero() {
        return;
    }
    match terms.entry(key) {
        Entry::Vacant(e) => {
            e.insert(c);
        }
        Entry::Occupied(mut e) => {
            e.get_mut().add_assign(&c);
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

fn accumulate_ref(terms: &mut BTreeMap<TermKey, RingElement>, key: TermKey, c: &RingElement) {
    match terms.entry(key) {
        Entry::Vacant(e) => {
            e.insert(c.clone());
        }
        Entry::Occupied(mut e) => {
            e.get_mut().add_assign(c);
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

impl FieldSeries {
    pub fn zero(kind: SeriesKind, wavenumbers: Wavenumbers, truncation: Truncation) -> Self {
        Self {
            kind,
            wavenumbers,
            truncation,
            terms: BTreeMap::new(),
        }
    }

    /// The mean field `U` itself.
    pub fn mean_field(wavenumbers: Wavenumbers, truncation: Truncation) -> Self {
        let mut f = Self::zero(SeriesKind::Field, wavenumbers, truncation);
        f.add_term(0, 0, 0, Parity::Cos, RingElement::one());
        f
    }

    /// The constant scalar `1`.
    pub fn scalar_one(wavenumbers: Wavenumbers, truncation: Truncation) -> Self {
        let mut f = Self::zero(SeriesKind::Scalar, wavenumbers, truncation);
        f.add_term(0, 0, 0, Parity::Cos, RingElement::one());
        f
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn wavenumbers(&self) -> Wavenumbers {
        self.wavenumbers
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total number of coefficient monomials, a size measure for reports.
    pub fn monomial_count(&self) -> usize {
        self.terms.values().map(RingElement::term_count).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TermKey, &RingElement)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, d: u32, h: Harmonic) -> Option<&RingElement> {
        self.terms.get(&(d, h))
    }

    /// Add `c · trig(m, n) · ∂x^d U`, canonicalizing the harmonic and applying
    /// the truncation.
    pub fn add_term(&mut self, d: u32, m: i64, n: i64, parity: Parity, c: RingElement) {
        if self.kind == SeriesKind::Scalar {
            assert_eq!(d, 0, "scalar series carry no derivative order");
        }
        if d > self.truncation.max_d {
            return;
        }
        let Some((h, negate)) = Harmonic::canonical(m, n, parity) else {
            return;
        };
        let c = c.truncate(self.truncation.max_a);
        accumulate(&mut self.terms, (d, h), if negate { c.neg() } else { c });
    }

    fn like(&self, other: &Self) -> Self {
        assert_eq!(self.kind, other.kind, "adding series of different kinds");
        assert_eq!(self.wavenumbers, other.wavenumbers, "mixing wavenumber conventions");
        let truncation = self.truncation.min(other.truncation);
        Self::zero(self.kind, self.wavenumbers, truncation)
    }

    fn fits(&self, d: u32, c: &RingElement) -> bool {
        d <= self.truncation.max_d && c.min_amplitude_degree().is_some_and(|a| a <= self.truncation.max_a)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.like(other);
        let t = out.truncation;
        let narrowed = t != self.truncation || t != other.truncation;
        for src in [self, other] {
            for (key, c) in &src.terms {
                if !out.fits(key.0, c) {
                    continue;
                }
                if narrowed {
                    accumulate(&mut out.terms, *key, c.truncate(t.max_a));
                } else {
                    accumulate_ref(&mut out.terms, *key, c);
                }
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect(),
            ..self.clone_empty()
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn clone_empty(&self) -> Self {
        Self::zero(self.kind, self.wavenumbers, self.truncation)
    }

    /// Multiply every coefficient by a ring element.
    pub fn scale(&self, s: &RingElement) -> Self {
        let mut out = self.clone_empty();
        for (key, c) in &self.terms {
            accumulate(&mut out.terms, *key, c.mul_trunc(s, self.truncation.max_a));
        }
        out
    }

    pub fn scale_rational(&self, s: &Rational) -> Self {
        let mut out = self.clone_empty();
        if s.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(k, c)| (*k, c.scale(s))).collect();
        out
    }

    /// Restrict to tighter orders.
    pub fn truncated(&self, t: Truncation) -> Self {
        let t = self.truncation.min(t);
        let mut out = Self::zero(self.kind, self.wavenumbers, t);
        for (key, c) in &self.terms {
            if out.fits(key.0, c) {
                accumulate(&mut out.terms, *key, c.truncate(t.max_a));
            }
        }
        out
    }

    /// Same terms under possibly looser orders (for continuing a construction
    /// at a higher order).
    pub fn with_truncation(&self, t: Truncation) -> Self {
        let mut out = self.truncated(t);
        out.truncation = t;
        out
    }

    /// Product via product-to-sum identities; at most one operand may be a field.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let kind = match (self.kind, other.kind) {
            (SeriesKind::Field, SeriesKind::Field) => return Err(Error::IllPosedProduct),
            (SeriesKind::Scalar, SeriesKind::Scalar) => SeriesKind::Scalar,
            _ => SeriesKind::Field,
        };
        assert_eq!(self.wavenumbers, other.wavenumbers, "mixing wavenumber conventions");
        let t = self.truncation.min(other.truncation);
        let mut out = Self::zero(kind, self.wavenumbers, t);
        let half = frac(1, 2);
        let degs: Vec<(u32, &TermKey, &RingElement)> = other
            .terms
            .iter()
            .filter_map(|(k, c)| c.min_amplitude_degree().map(|a| (a, k, c)))
            .collect();
        for ((d1, h1), c1) in &self.terms {
            let Some(a1) = c1.min_amplitude_degree() else { continue };
            for &(a2, (d2, h2), c2) in &degs {
                let d = d1 + d2;
                if a1 + a2 > t.max_a || d > t.max_d {
                    continue;
                }
                let prod = c1.mul_trunc(c2, t.max_a);
                if prod.is_zero() {
                    continue;
                }
                let prod = prod.scale(&half);
                let (sm, sn) = (h1.m + h2.m, h1.n + h2.n);
                let (dm, dn) = (h1.m - h2.m, h1.n - h2.n);
                use Parity::{Cos, Sin};
                // (parity, m, n, negate) for the two product-to-sum pieces
                let pieces = match (h1.parity, h2.parity) {
                    (Cos, Cos) => [(Cos, dm, dn, false), (Cos, sm, sn, false)],
                    (Sin, Cos) => [(Sin, sm, sn, false), (Sin, dm, dn, false)],
                    (Cos, Sin) => [(Sin, sm, sn, false), (Sin, dm, dn, true)],
                    (Sin, Sin) => [(Cos, dm, dn, false), (Cos, sm, sn, true)],
                };
                for (parity, m, n, neg) in pieces {
                    if let Some((h, flip)) = Harmonic::canonical(m, n, parity) {
                        let c = if neg != flip { prod.neg() } else { prod.clone() };
                        accumulate(&mut out.terms, (d, h), c);
                    }
                }
            }
        }
        Ok(out)
    }

    fn wavenumber_factor(&self, m: i64, which: u8) -> RingElement {
        match (which, self.wavenumbers) {
            (1, Wavenumbers::Symbolic) => RingElement::monomial(0, 0, 1, 0, int(m)),
            (1, Wavenumbers::UnitK1) => RingElement::constant(int(m)),
            _ => RingElement::monomial(0, 0, 0, 1, int(m)),
        }
    }

    fn derivative(&self, which: u8) -> Self {
        let mut out = self.clone_empty();
        for ((d, h), c) in &self.terms {
            let mult = if which == 1 { h.m } else { h.n };
            if mult == 0 {
                continue;
            }
            let (parity, sign) = match h.parity {
                Parity::Cos => (Parity::Sin, -Rational::one()),
                Parity::Sin => (Parity::Cos, Rational::one()),
            };
            let coeff = match (which, self.wavenumbers) {
                (1, Wavenumbers::UnitK1) => c.scale(&(sign * int(mult))),
                _ => c.mul(&self.wavenumber_factor(mult, which)).scale(&sign),
            };
            accumulate(&mut out.terms, (*d, Harmonic { parity, ..*h }), coeff);
        }
        out
    }

    pub fn d_x1(&self) -> Self {
        self.derivative(1)
    }

    pub fn d_x2(&self) -> Self {
        self.derivative(2)
    }

    /// Derivative along the diagonal `∂x1 + ∂x2`.
    pub fn d_z(&self) -> Self {
        let mut out = self.clone_empty();
        for ((d, h), c) in &self.terms {
            if h.is_constant() {
                continue;
            }
            let omega = RingElement::combination(h.m, h.n, self.wavenumbers);
            let (parity, coeff) = match h.parity {
                Parity::Cos => (Parity::Sin, c.mul(&omega).neg()),
                Parity::Sin => (Parity::Cos, c.mul(&omega)),
            };
            accumulate(&mut out.terms, (*d, Harmonic { parity, ..*h }), coeff);
        }
        out
    }

    /// Macroscale derivative: raises the order of `U`-derivatives by one.
    pub fn d_x(&self) -> Self {
        let mut out = self.clone_empty();
        if self.kind == SeriesKind::Scalar {
            return out;
        }
        for ((d, h), c) in &self.terms {
            if *d < self.truncation.max_d {
                out.terms.insert((d + 1, *h), c.clone());
            }
        }
        out
    }

    /// Average over both phases: keeps exactly the constant harmonics.
    pub fn mean(&self) -> Self {
        let mut out = self.clone_empty();
        out.terms = self
            .terms
            .iter()
            .filter(|((_, h), _)| h.is_constant())
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        out
    }

    /// Remove the constant harmonics, returning them separately.
    pub fn split_mean(&self) -> (Self, Self) {
        let mut mean = self.clone_empty();
        let mut rest = self.clone_empty();
        for (k, c) in &self.terms {
            let target = if k.1.is_constant() { &mut mean } else { &mut rest };
            target.terms.insert(*k, c.clone());
        }
        (mean, rest)
    }

    /// Zero-mean `v` with `(∂x1 + ∂x2) v = self`; fails if `self` has a mean.
    pub fn solve_diag(&self) -> Result<Self> {
        let (mean, rest) = self.split_mean();
        if let Some(((d, _), c)) = mean.terms.iter().next() {
            return Err(Error::Solvability(format!("{c} at derivative order {d}")));
        }
        rest.integrate_diag()
    }

    /// As [`FieldSeries::solve_diag`] but discards any mean obstruction,
    /// returning how many constant-harmonic terms were dropped.
    pub fn solve_diag_dropping_mean(&self) -> Result<(Self, usize)> {
        let (mean, rest) = self.split_mean();
        Ok((rest.integrate_diag()?, mean.len()))
    }

    fn integrate_diag(&self) -> Result<Self> {
        let mut out = self.clone_empty();
        let mut cache: HashMap<(i64, i64), RingElement> = HashMap::new();
        for ((d, h), c) in &self.terms {
            let recip = match cache.entry((h.m, h.n)) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(RingElement::reciprocal_of_combination(h.m, h.n, self.wavenumbers)?)
                }
            };
            let (parity, coeff) = match h.parity {
                Parity::Cos => (Parity::Sin, c.mul(recip)),
                Parity::Sin => (Parity::Cos, c.mul(recip).neg()),
            };
            accumulate(&mut out.terms, (*d, Harmonic { parity, ..*h }), coeff);
        }
        Ok(out)
    }

    /// Time derivative of the field given the closure `∂t U = g`: each
    /// `c · h · ∂x^d U` becomes `c · h · ∂x^d g`.
    pub fn apply_evolution(&self, g: &Self) -> Result<Self> {
        if g.terms.keys().any(|(_, h)| !h.is_constant()) {
            return Err(Error::NonConstantEvolution);
        }
        let t = self.truncation.min(g.truncation);
        let mut out = Self::zero(SeriesKind::Field, self.wavenumbers, t);
        for ((d, h), c) in &self.terms {
            for ((e, _), cg) in &g.terms {
                if d + e > t.max_d {
                    continue;
                }
                accumulate(&mut out.terms, (d + e, *h), c.mul_trunc(cg, t.max_a));
            }
        }
        Ok(out)
    }

    /// Coefficients of the constant harmonic, indexed by derivative order.
    pub fn mean_coefficients(&self) -> BTreeMap<u32, RingElement> {
        self.terms
            .iter()
            .filter(|((_, h), _)| h.is_constant())
            .map(|((d, _), c)| (*d, c.clone()))
            .collect()
    }

    /// Apply an exact substitution to every coefficient.
    pub fn substitute(&self, s: &Substitution) -> Result<Self> {
        let mut out = self.clone_empty();
        for (k, c) in &self.terms {
            accumulate(&mut out.terms, *k, c.substitute(s)?);
        }
        Ok(out)
    }

    /// Terms whose coefficient has the given amplitude degree.
    pub fn amplitude_slice(&self, degree: u32) -> Self {
        let mut out = self.clone_empty();
        for (k, c) in &self.terms {
            accumulate(&mut out.terms, *k, c.amplitude_slice(degree));
        }
        out
    }

    pub fn max_amplitude_degree(&self) -> Option<u32> {
        self.terms.values().filter_map(RingElement::max_amplitude_degree).max()
    }

    /// Sum of the coefficient-weighted harmonics at a point, per derivative order.
    pub fn eval_f64(
        &self,
        v: &super::ring::Valuation<f64>,
        x1: f64,
        x2: f64,
    ) -> BTreeMap<u32, f64> {
        let k1 = match self.wavenumbers {
            Wavenumbers::Symbolic => v.k1,
            Wavenumbers::UnitK1 => 1.0,
        };
        let mut out = BTreeMap::new();
        for ((d, h), c) in &self.terms {
            *out.entry(*d).or_insert(0.0) += c.eval_f64(v) * h.eval(k1, v.k2, x1, x2);
        }
        out
    }
}

impl fmt::Display for FieldSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((d, h), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{c}]")?;
            if !h.is_constant() {
                write!(f, "*{h}")?;
            }
            if self.kind == SeriesKind::Field {
                match d {
                    0 => write!(f, "*U")?,
                    1 => write!(f, "*U_x")?,
                    d => write!(f, "*U_x^{d}")?,
                }
            }
        }
        Ok(())
    }
}

/// Monomial `a1^p1 a2^p2 k1^r1 k2^r2` with an integer or fractional weight.
pub fn coeff(p1: u32, p2: u32, r1: i32, r2: i32, w: Rational) -> RingElement {
    RingElement::from_poly(super::poly::Poly::term(CoeffMonomial::new(p1, p2, r1, r2), w))
}
