//! Trigonometric series in the fast phase `x2` multiplying mixed slow
//! derivatives `∂x^i ∂x1^j U` of the mean field.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num::One;
use serde_json::{json, Value};

use super::ring::{Basis, MesoMonomial, MesoRingElement};
use crate::error::{Error, Result};
use crate::trigpoly::poly::{frac, int};
use crate::trigpoly::{Harmonic, Parity, Rational, SeriesKind};

/// `(i, j, h)`: the term multiplies `h(k2 x2) · ∂x^i ∂x1^j U`.
pub type MesoKey = (u32, u32, Harmonic);

/// Retained orders: slow order `i + j + Σ j·e_j ≤ max_slow`, `a2` degree `≤ max_a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MesoTruncation {
    pub max_slow: u32,
    pub max_a: u32,
}

impl MesoTruncation {
    pub fn new(max_slow: u32, max_a: u32) -> Self {
        Self { max_slow, max_a }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MesoFieldSeries {
    kind: SeriesKind,
    truncation: MesoTruncation,
    terms: BTreeMap<MesoKey, MesoRingElement>,
}

fn fast(n: i64, parity: Parity) -> Option<(Harmonic, bool)> {
    Harmonic::canonical(0, n, parity)
}

fn k2_power(p: i32, w: Rational) -> MesoRingElement {
    MesoRingElement::monomial(MesoMonomial::new(0, p, 0, &[]), w)
}

impl MesoFieldSeries {
    pub fn zero(kind: SeriesKind, truncation: MesoTruncation) -> Self {
        Self {
            kind,
            truncation,
            terms: BTreeMap::new(),
        }
    }

    /// The mean field `U` itself.
    pub fn mean_field(truncation: MesoTruncation) -> Self {
        let mut s = Self::zero(SeriesKind::Field, truncation);
        s.add_term(0, 0, 0, Parity::Cos, MesoRingElement::one());
        s
    }

    /// Scalar `c · cos/sin(n k2 x2)`.
    pub fn scalar(c: MesoRingElement, n: i64, parity: Parity, truncation: MesoTruncation) -> Self {
        let mut s = Self::zero(SeriesKind::Scalar, truncation);
        s.add_term(0, 0, n, parity, c);
        s
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn truncation(&self) -> MesoTruncation {
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

    pub fn monomial_count(&self) -> usize {
        self.terms.values().map(MesoRingElement::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MesoKey, &MesoRingElement)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, i: u32, j: u32, h: Harmonic) -> Option<&MesoRingElement> {
        self.terms.get(&(i, j, h))
    }

    fn clone_empty(&self) -> Self {
        Self::zero(self.kind, self.truncation)
    }

    fn keep(&self, i: u32, j: u32, c: &MesoRingElement) -> MesoRingElement {
        let t = self.truncation;
        let base = i + j;
        if base > t.max_slow {
            return MesoRingElement::zero();
        }
        c.filter(|m| m.a2 <= t.max_a && base + m.slow_weight() <= t.max_slow)
    }

    fn accumulate(&mut self, key: MesoKey, c: MesoRingElement) {
        let c = self.keep(key.0, key.1, &c);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
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

    /// Add `c · h(n k2 x2) · ∂x^i ∂x1^j U`, folding into canonical harmonics.
    pub fn add_term(&mut self, i: u32, j: u32, n: i64, parity: Parity, c: MesoRingElement) {
        if let Some((h, negate)) = fast(n, parity) {
            self.accumulate((i, j, h), if negate { c.neg() } else { c });
        }
    }

    pub fn with_truncation(&self, t: MesoTruncation) -> Self {
        let mut out = Self::zero(self.kind, t);
        for (k, c) in &self.terms {
            out.accumulate(*k, c.clone());
        }
        out
    }

    fn map_coeffs(&self, f: impl Fn(&MesoRingElement) -> MesoRingElement) -> Self {
        let mut out = self.clone_empty();
        for (k, c) in &self.terms {
            out.accumulate(*k, f(c));
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        if self.is_zero() {
            out.kind = o.kind;
        }
        for (k, c) in &o.terms {
            out.accumulate(*k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(MesoRingElement::neg)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &MesoRingElement) -> Self {
        self.map_coeffs(|c| c.mul(s))
    }

    pub fn scale_rational(&self, s: &Rational) -> Self {
        self.map_coeffs(|c| c.scale(s))
    }

    /// Product with product-to-sum folding of the `x2` harmonics; at most one
    /// factor may carry `U`.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let kind = match (self.kind, o.kind) {
            (SeriesKind::Field, SeriesKind::Field) => return Err(Error::IllPosedProduct),
            (SeriesKind::Scalar, SeriesKind::Scalar) => SeriesKind::Scalar,
            _ => SeriesKind::Field,
        };
        let t = self.truncation;
        let mut out = Self::zero(kind, t);
        let half = frac(1, 2);
        for ((i1, j1, h1), c1) in &self.terms {
            for ((i2, j2, h2), c2) in &o.terms {
                let (i, j) = (i1 + i2, j1 + j2);
                if i + j > t.max_slow {
                    continue;
                }
                let c = c1.mul_trunc(c2, t.max_a, t.max_slow - i - j).scale(&half);
                if c.is_zero() {
                    continue;
                }
                let (n1, n2) = (h1.n(), h2.n());
                use Parity::{Cos, Sin};
                match (h1.parity(), h2.parity()) {
                    (Cos, Cos) => {
                        out.add_term(i, j, n1 - n2, Cos, c.clone());
                        out.add_term(i, j, n1 + n2, Cos, c);
                    }
                    (Sin, Sin) => {
                        out.add_term(i, j, n1 - n2, Cos, c.clone());
                        out.add_term(i, j, n1 + n2, Cos, c.neg());
                    }
                    (Sin, Cos) => {
                        out.add_term(i, j, n1 + n2, Sin, c.clone());
                        out.add_term(i, j, n1 - n2, Sin, c);
                    }
                    (Cos, Sin) => {
                        out.add_term(i, j, n1 + n2, Sin, c.clone());
                        out.add_term(i, j, n2 - n1, Sin, c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `∂x`: raises the order of the `x` derivative on `U`.
    pub fn d_x(&self) -> Self {
        let mut out = self.clone_empty();
        if self.kind == SeriesKind::Scalar {
            return out;
        }
        for ((i, j, h), c) in &self.terms {
            out.accumulate((i + 1, *j, *h), c.clone());
        }
        out
    }

    /// `∂x1`: acts on both the coefficients and `U`.
    pub fn d_x1(&self) -> Self {
        let mut out = self.clone_empty();
        for ((i, j, h), c) in &self.terms {
            out.accumulate((*i, *j, *h), c.d_x1());
            if self.kind == SeriesKind::Field {
                out.accumulate((*i, j + 1, *h), c.clone());
            }
        }
        out
    }

    /// `∂x2`.
    pub fn d_x2(&self) -> Self {
        let mut out = self.clone_empty();
        for ((i, j, h), c) in &self.terms {
            let n = h.n();
            if n == 0 {
                continue;
            }
            let (parity, w) = match h.parity() {
                Parity::Cos => (Parity::Sin, int(-n)),
                Parity::Sin => (Parity::Cos, int(n)),
            };
            out.add_term(*i, *j, n, parity, c.mul(&k2_power(1, w)));
        }
        out
    }

    /// Average over one period of `x2`.
    pub fn mean(&self) -> Self {
        let mut out = self.clone_empty();
        for (k, c) in &self.terms {
            if k.2.n() == 0 {
                out.accumulate(*k, c.clone());
            }
        }
        out
    }

    /// The periodic antiderivative in `x2` with zero mean.
    pub fn antiderivative_x2(&self) -> Result<Self> {
        let mut out = self.clone_empty();
        for ((i, j, h), c) in &self.terms {
            let n = h.n();
            if n == 0 {
                return Err(Error::Solvability(c.to_string()));
            }
            let (parity, w) = match h.parity() {
                Parity::Cos => (Parity::Sin, frac(1, n)),
                Parity::Sin => (Parity::Cos, frac(-1, n)),
            };
            out.add_term(*i, *j, n, parity, c.mul(&k2_power(-1, w)));
        }
        Ok(out)
    }

    /// `∂t` of a field whose mean evolves by `∂t U = g`, `g` free of `x2`.
    pub fn apply_evolution(&self, g: &Self) -> Result<Self> {
        if g.terms.keys().any(|k| k.2.n() != 0) {
            return Err(Error::NonConstantEvolution);
        }
        let mut out = self.clone_empty();
        for ((i, j, h), c) in &self.terms {
            for ((p, q, _), gc) in &g.terms {
                let mut dg = gc.clone();
                let mut binom = Rational::one();
                for r in 0..=*j {
                    if r > 0 {
                        dg = dg.d_x1();
                        binom = binom * int((j - r + 1) as i64) / int(r as i64);
                    }
                    out.accumulate((i + p, q + j - r, *h), c.mul(&dg).scale(&binom));
                }
            }
        }
        Ok(out)
    }

    /// Coefficients rewritten in the other symbol basis.
    pub fn change_basis(&self) -> Self {
        self.map_coeffs(MesoRingElement::change_basis)
    }

    /// Terms of total slow order `≤ s`.
    pub fn slow_slice(&self, s: u32) -> Self {
        self.with_truncation(MesoTruncation::new(s.min(self.truncation.max_slow), self.truncation.max_a))
            .with_truncation(self.truncation)
    }

    /// Terms whose coefficient has `a2` degree exactly `p`.
    pub fn amplitude_slice(&self, p: u32) -> Self {
        self.map_coeffs(|c| c.filter(|m| m.a2 == p))
    }

    /// Set every `s_j`, `j ≥ 1`, to zero: a constant mesoscale diffusivity.
    pub fn constant_mesoscale(&self) -> Self {
        self.map_coeffs(|c| c.filter(|m| m.max_index() == 0))
    }

    pub fn fmt_in(&self, basis: Basis) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let lines: Vec<String> = self
            .terms
            .iter()
            .map(|((i, j, h), c)| {
                let mut factors = vec![format!("({})", c.fmt_in(basis))];
                if !h.is_constant() {
                    factors.push(fast_name(h));
                }
                if self.kind == SeriesKind::Field {
                    factors.push(derivative_name(*i, *j));
                }
                factors.join(" * ")
            })
            .collect();
        lines.join("\n + ")
    }

    /// Terms as JSON with coefficients written in `basis`, converting from
    /// the stored `b` basis when `basis` is [`Basis::C`].
    pub fn to_json(&self, basis: Basis) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|((i, j, h), c)| {
                json!({
                    "dx": i,
                    "dx1": j,
                    "harmonic": if h.is_constant() { "1".to_string() } else { fast_name(h) },
                    "coeff": match basis {
                        Basis::B => c.fmt_in(basis),
                        Basis::C => c.change_basis().fmt_in(basis),
                    },
                })
            })
            .collect();
        Value::Array(terms)
    }
}

fn fast_name(h: &Harmonic) -> String {
    let f = match h.parity() {
        Parity::Cos => "cos",
        Parity::Sin => "sin",
    };
    match h.n() {
        1 => format!("{f}(k2*x2)"),
        n => format!("{f}({n}*k2*x2)"),
    }
}

fn derivative_name(i: u32, j: u32) -> String {
    let part = |v: &str, p: u32| match p {
        0 => String::new(),
        1 => format!("d{v}"),
        p => format!("d{v}^{p}"),
    };
    let s = format!("{}{}", part("x", i), part("x1", j));
    if s.is_empty() {
        "U".into()
    } else {
        format!("{s} U")
    }
}

impl fmt::Display for MesoFieldSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_in(Basis::B))
    }
}
