//! Exact coefficient ring for the two-phase construction.
//!
//! A [`RingElement`] is `N / D` where `N` is a sparse polynomial in the
//! amplitudes `a1, a2` with Laurent powers of the wavenumbers `k1, k2`, and `D`
//! is a product of irreducible mixed linear forms `m·k1 + n·k2` (both `m, n`
//! nonzero). Pure `k1` or `k2` divisors are absorbed into the Laurent powers.
//! The fraction is kept reduced: no factor of `D` divides `N`. Since every
//! factor is prime in `Q[a1, a2, k1^±1, k2^±1]` the reduced form is unique,
//! so structural equality decides equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, Integer, One, Signed, Zero};

use super::poly::{format_rational, int, Exponents, Poly, Rational};
use crate::error::{Error, Result};

/// Exponents of `a1^p1 a2^p2 k1^r1 k2^r2`. The weight lives in the owning
/// polynomial so that each exponent tuple appears once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CoeffMonomial {
    pub p1: u32,
    pub p2: u32,
    pub r1: i32,
    pub r2: i32,
}

impl CoeffMonomial {
    pub const ONE: CoeffMonomial = CoeffMonomial {
        p1: 0,
        p2: 0,
        r1: 0,
        r2: 0,
    };

    pub fn new(p1: u32, p2: u32, r1: i32, r2: i32) -> Self {
        Self { p1, p2, r1, r2 }
    }
}

impl Exponents for CoeffMonomial {
    fn unit() -> Self {
        Self::ONE
    }

    fn times(&self, o: &Self) -> Self {
        Self {
            p1: self.p1 + o.p1,
            p2: self.p2 + o.p2,
            r1: self.r1 + o.r1,
            r2: self.r2 + o.r2,
        }
    }

    fn amplitude_degree(&self) -> u32 {
        self.p1 + self.p2
    }
}

/// Irreducible mixed form `m·k1 + n·k2`, normalized to `gcd(m, n) = 1`, `m > 0`, `n != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearForm {
    m: i64,
    n: i64,
}

impl LinearForm {
    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    /// Split `m·k1 + n·k2` into `scale · form`; both `m` and `n` must be nonzero.
    fn normalize(m: i64, n: i64) -> (i64, LinearForm) {
        debug_assert!(m != 0 && n != 0);
        let g = m.gcd(&n);
        let s = if m < 0 { -g } else { g };
        (s, LinearForm { m: m / s, n: n / s })
    }

    fn as_poly(&self) -> Poly<CoeffMonomial> {
        let mut p = Poly::zero();
        p.add_term(CoeffMonomial::new(0, 0, 1, 0), int(self.m));
        p.add_term(CoeffMonomial::new(0, 0, 0, 1), int(self.n));
        p
    }
}

/// How the microscale wavenumbers enter the algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wavenumbers {
    /// `k1`, `k2` are independent symbols.
    Symbolic,
    /// Nondimensional single-period setting: `k1 = 1` exactly, `k2` symbolic
    /// (but no mixed divisors may arise).
    UnitK1,
}

/// Numeric values for every symbol of the ring.
#[derive(Clone, Debug, PartialEq)]
pub struct Valuation<T> {
    pub a1: T,
    pub a2: T,
    pub k1: T,
    pub k2: T,
}

/// Exact values for some symbols; `None` keeps the symbol.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Substitution {
    pub a1: Option<Rational>,
    pub a2: Option<Rational>,
    pub k1: Option<Rational>,
    pub k2: Option<Rational>,
}

impl Substitution {
    pub fn is_empty(&self) -> bool {
        self.a1.is_none() && self.a2.is_none() && self.k1.is_none() && self.k2.is_none()
    }
}

fn rational_pow(x: &Rational, e: i32, what: &str) -> Result<Rational> {
    if e < 0 && x.is_zero() {
        return Err(Error::ZeroDivisor(what.into()));
    }
    Ok(num::pow::pow(
        if e < 0 { x.recip() } else { x.clone() },
        e.unsigned_abs() as usize,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RingElement {
    num: Poly<CoeffMonomial>,
    den: BTreeMap<LinearForm, u32>,
}

impl RingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(w: Rational) -> Self {
        Self::from_poly(Poly::constant(w))
    }

    pub fn monomial(p1: u32, p2: u32, r1: i32, r2: i32, w: Rational) -> Self {
        Self::from_poly(Poly::term(CoeffMonomial::new(p1, p2, r1, r2), w))
    }

    pub fn from_poly(num: Poly<CoeffMonomial>) -> Self {
        Self {
            num,
            den: BTreeMap::new(),
        }
    }

    /// Build `num / Π form^power`, reducing the fraction.
    pub fn from_parts(num: Poly<CoeffMonomial>, den: impl IntoIterator<Item = (i64, i64, u32)>) -> Result<Self> {
        let mut out = Self::from_poly(num);
        for (m, n, power) in den {
            let inv = Self::reciprocal_of_combination(m, n, Wavenumbers::Symbolic)?;
            for _ in 0..power {
                out = out.mul(&inv);
            }
        }
        Ok(out)
    }

    pub fn numerator(&self) -> &Poly<CoeffMonomial> {
        &self.num
    }

    pub fn divisors(&self) -> impl Iterator<Item = (&LinearForm, &u32)> {
        self.den.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.is_one()
    }

    pub fn is_divisor_free(&self) -> bool {
        self.den.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.num.len()
    }

    pub fn max_amplitude_degree(&self) -> Option<u32> {
        self.num.max_amplitude_degree()
    }

    pub fn min_amplitude_degree(&self) -> Option<u32> {
        self.num.min_amplitude_degree()
    }

    /// `m·k1 + n·k2` under the given wavenumber convention.
    pub fn combination(m: i64, n: i64, wn: Wavenumbers) -> Self {
        let mut p = Poly::zero();
        match wn {
            Wavenumbers::Symbolic => p.add_term(CoeffMonomial::new(0, 0, 1, 0), int(m)),
            Wavenumbers::UnitK1 => p.add_term(CoeffMonomial::ONE, int(m)),
        }
        p.add_term(CoeffMonomial::new(0, 0, 0, 1), int(n));
        Self::from_poly(p)
    }

    /// `1 / (m·k1 + n·k2)`.
    pub fn reciprocal_of_combination(m: i64, n: i64, wn: Wavenumbers) -> Result<Self> {
        match (m, n, wn) {
            (0, 0, _) => Err(Error::ZeroDivisor("0·k1 + 0·k2".into())),
            (0, n, _) => Ok(Self::monomial(0, 0, 0, -1, Rational::new(1.into(), n.into()))),
            (m, 0, Wavenumbers::Symbolic) => {
                Ok(Self::monomial(0, 0, -1, 0, Rational::new(1.into(), m.into())))
            }
            (m, 0, Wavenumbers::UnitK1) => Ok(Self::constant(Rational::new(1.into(), m.into()))),
            (m, n, Wavenumbers::Symbolic) => {
                let (s, form) = LinearForm::normalize(m, n);
                let mut den = BTreeMap::new();
                den.insert(form, 1);
                Ok(Self {
                    num: Poly::constant(Rational::new(1.into(), s.into())),
                    den,
                }
                .reduced())
            }
            (m, n, Wavenumbers::UnitK1) => Err(Error::MixedDivisorUnsupported { m, n }),
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }

    /// Multiply by the monomial `a1^p1 a2^p2 k1^r1 k2^r2` (always a unit or
    /// coprime to every mixed form, so no reduction is needed).
    pub fn mul_monomial(&self, mono: CoeffMonomial, w: &Rational) -> Self {
        if w.is_zero() || self.is_zero() {
            return Self::zero();
        }
        Self {
            num: Poly::from_terms(self.num.iter().map(|(m, c)| (m.times(&mono), c * w))),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            let num = self.num.add(&other.num);
            return Self {
                num,
                den: self.den.clone(),
            }
            .reduced();
        }
        let mut lcm = self.den.clone();
        for (f, &p) in &other.den {
            let e = lcm.entry(*f).or_insert(0);
            *e = (*e).max(p);
        }
        let a = Self::lift_numerator(&self.num, &self.den, &lcm);
        let b = Self::lift_numerator(&other.num, &other.den, &lcm);
        Self { num: a.add(&b), den: lcm }.reduced()
    }

    /// In-place sum; cheap when both operands share the same divisors.
    pub fn add_assign(&mut self, other: &Self) {
        if other.is_zero() {
            return;
        }
        if self.den == other.den {
            self.num.add_assign(&other.num);
            if !self.den.is_empty() {
                *self = std::mem::take(self).reduced();
            } else if self.num.is_zero() {
                self.den.clear();
            }
        } else {
            *self = RingElement::add(self, other);
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_trunc(other, u32::MAX)
    }

    /// Product with amplitude truncation. Denominators carry no amplitudes, so
    /// truncating the numerator is exact modulo `a^(max_a+1)`.
    pub fn mul_trunc(&self, other: &Self, max_a: u32) -> Self {
        let num = self.num.mul_trunc(&other.num, max_a);
        if self.den.is_empty() && other.den.is_empty() {
            return Self::from_poly(num);
        }
        let mut den = self.den.clone();
        for (f, p) in &other.den {
            *den.entry(*f).or_insert(0) += p;
        }
        Self { num, den }.reduced()
    }

    pub fn truncate(&self, max_a: u32) -> Self {
        Self {
            num: self.num.truncate(max_a),
            den: self.den.clone(),
        }
        .reduced()
    }

    /// Terms of exactly the given amplitude degree.
    pub fn amplitude_slice(&self, degree: u32) -> Self {
        Self {
            num: self.num.filter(|m| m.amplitude_degree() == degree),
            den: self.den.clone(),
        }
        .reduced()
    }

    fn lift_numerator(
        num: &Poly<CoeffMonomial>,
        den: &BTreeMap<LinearForm, u32>,
        target: &BTreeMap<LinearForm, u32>,
    ) -> Poly<CoeffMonomial> {
        let mut out = num.clone();
        for (f, &p) in target {
            let have = den.get(f).copied().unwrap_or(0);
            let lin = f.as_poly();
            for _ in have..p {
                out = out.mul(&lin);
            }
        }
        out
    }

    fn reduced(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        if self.den.is_empty() {
            return self;
        }
        let forms: Vec<LinearForm> = self.den.keys().copied().collect();
        for f in forms {
            while self.den.get(&f).copied().unwrap_or(0) > 0 {
                match divide_by_form(&self.num, f) {
                    Some(q) => {
                        self.num = q;
                        let e = self.den.get_mut(&f).expect("present");
                        *e -= 1;
                        if *e == 0 {
                            self.den.remove(&f);
                        }
                    }
                    None => break,
                }
            }
        }
        self
    }

    pub fn eval_f64(&self, v: &Valuation<f64>) -> f64 {
        let mut num = 0.0;
        for (m, w) in self.num.iter() {
            num += super::poly::rational_to_f64(w)
                * v.a1.powi(m.p1 as i32)
                * v.a2.powi(m.p2 as i32)
                * v.k1.powi(m.r1)
                * v.k2.powi(m.r2);
        }
        let mut den = 1.0;
        for (f, &p) in &self.den {
            den *= (f.m as f64 * v.k1 + f.n as f64 * v.k2).powi(p as i32);
        }
        num / den
    }

    /// Replace the chosen symbols by exact values. Divisors need both
    /// wavenumbers to be substituted (or neither).
    pub fn substitute(&self, s: &Substitution) -> Result<Self> {
        let mut num = Poly::zero();
        for (m, w) in self.num.iter() {
            let mut w = w.clone();
            let mut out = *m;
            if let Some(v) = &s.a1 {
                w *= rational_pow(v, m.p1 as i32, "a1")?;
                out.p1 = 0;
            }
            if let Some(v) = &s.a2 {
                w *= rational_pow(v, m.p2 as i32, "a2")?;
                out.p2 = 0;
            }
            if let Some(v) = &s.k1 {
                w *= rational_pow(v, m.r1, "k1")?;
                out.r1 = 0;
            }
            if let Some(v) = &s.k2 {
                w *= rational_pow(v, m.r2, "k2")?;
                out.r2 = 0;
            }
            num.add_term(out, w);
        }
        if self.den.is_empty() {
            return Ok(Self::from_poly(num));
        }
        match (&s.k1, &s.k2) {
            (None, None) => Ok(Self {
                num,
                den: self.den.clone(),
            }
            .reduced()),
            (Some(k1), Some(k2)) => {
                let mut den = Rational::one();
                for (f, &p) in &self.den {
                    let lin = Rational::from_integer(f.m.into()) * k1 + Rational::from_integer(f.n.into()) * k2;
                    den *= rational_pow(&lin, -(p as i32), &format!("{}·k1 + {}·k2", f.m, f.n))?;
                }
                Ok(Self::from_poly(num.scale(&den)))
            }
            _ => Err(Error::Unsupported(
                "substituting one wavenumber into an element with mixed divisors".into(),
            )),
        }
    }

    pub fn eval_exact(&self, v: &Valuation<Rational>) -> Result<Rational> {
        let pow = rational_pow;
        let mut num = Rational::zero();
        for (m, w) in self.num.iter() {
            num += w
                * pow(&v.a1, m.p1 as i32, "a1")?
                * pow(&v.a2, m.p2 as i32, "a2")?
                * pow(&v.k1, m.r1, "k1")?
                * pow(&v.k2, m.r2, "k2")?;
        }
        let mut den = Rational::one();
        for (f, &p) in &self.den {
            let lin = Rational::from_integer(f.m.into()) * &v.k1 + Rational::from_integer(f.n.into()) * &v.k2;
            if lin.is_zero() {
                return Err(Error::ZeroDivisor(format!("{}·k1 + {}·k2", f.m, f.n)));
            }
            den *= num::pow::pow(lin, p as usize);
        }
        Ok(num / den)
    }
}

/// Exact division of a Laurent polynomial by a mixed linear form, or `None`
/// when it does not divide.
fn divide_by_form(num: &Poly<CoeffMonomial>, f: LinearForm) -> Option<Poly<CoeffMonomial>> {
    // Group by amplitude powers and total k-degree; each group is a binary form.
    let mut groups: BTreeMap<(u32, u32, i32), BTreeMap<i32, Rational>> = BTreeMap::new();
    for (m, w) in num.iter() {
        groups
            .entry((m.p1, m.p2, m.r1 + m.r2))
            .or_default()
            .insert(m.r1, w.clone());
    }
    let fm = Rational::from_integer(BigInt::from(f.m));
    let fn_ = Rational::from_integer(BigInt::from(f.n));
    let mut out = Poly::zero();
    for ((p1, p2, total), coeffs) in groups {
        let jmin = *coeffs.keys().next().expect("nonempty");
        let jmax = *coeffs.keys().next_back().expect("nonempty");
        let deg = (jmax - jmin) as usize;
        if deg == 0 {
            return None;
        }
        // In t = k1/k2: P(t) = Σ c_i t^i; divide by (m t + n).
        let p: Vec<Rational> = (0..=deg)
            .map(|i| coeffs.get(&(jmin + i as i32)).cloned().unwrap_or_else(Rational::zero))
            .collect();
        let mut q = vec![Rational::zero(); deg];
        q[deg - 1] = &p[deg] / &fm;
        for i in (1..deg).rev() {
            q[i - 1] = (&p[i] - &fn_ * &q[i]) / &fm;
        }
        let rem = &p[0] - &fn_ * &q[0];
        if !rem.is_zero() {
            return None;
        }
        for (i, qi) in q.into_iter().enumerate() {
            let r1 = jmin + i as i32;
            out.add_term(CoeffMonomial::new(p1, p2, r1, total - 1 - r1), qi);
        }
    }
    Some(out)
}

impl Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        RingElement::add(self, rhs)
    }
}

impl Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        RingElement::sub(self, rhs)
    }
}

impl Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        RingElement::mul(self, rhs)
    }
}

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement::neg(self)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        if !self.den.is_empty() {
            write!(f, "(")?;
        }
        for (m, w) in self.num.iter() {
            let neg = w.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let aw = w.abs();
            let mut factors = Vec::new();
            if !aw.is_one() || *m == CoeffMonomial::ONE {
                factors.push(format_rational(&aw).trim_end_matches("/1").to_string());
            }
            for (sym, e) in [("a1", m.p1 as i32), ("a2", m.p2 as i32), ("k1", m.r1), ("k2", m.r2)] {
                match e {
                    0 => {}
                    1 => factors.push(sym.to_string()),
                    e => factors.push(format!("{sym}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        if !self.den.is_empty() {
            write!(f, ")")?;
            for (lf, p) in &self.den {
                write!(f, "/({}*k1{:+}*k2)", lf.m, lf.n)?;
                if *p > 1 {
                    write!(f, "^{p}")?;
                }
            }
        }
        Ok(())
    }
}
