//! Coefficients of the mesoscale construction: polynomials in `a2`, Laurent in
//! `k2` and in the mesoscale symbol `s_0`, polynomial in its derivatives
//! `s_1, s_2, …` with `∂x1 s_j = s_{j+1}`.

use std::fmt;

use num::{One, Signed, Zero};

use crate::trigpoly::poly::{format_rational, int, Exponents, Poly};
use crate::trigpoly::Rational;

/// Which function the symbols `s_j` denote.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `b_j = d^j b/dx1^j` with `b = 1/𝒦`.
    B,
    /// `c_j = d^j 𝒦/dx1^j`.
    C,
}

impl Basis {
    pub fn letter(&self) -> char {
        match self {
            Basis::B => 'b',
            Basis::C => 'c',
        }
    }
}

/// `a2^a · k2^k · s_0^e0 · Π_{j≥1} s_j^{e_j}`; `e` holds `e_1, e_2, …` without
/// trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MesoMonomial {
    pub a2: u32,
    pub k2: i32,
    pub s0: i32,
    e: Vec<u32>,
}

impl MesoMonomial {
    pub fn new(a2: u32, k2: i32, s0: i32, derivs: &[u32]) -> Self {
        let mut m = Self {
            a2,
            k2,
            s0,
            e: derivs.to_vec(),
        };
        m.trim();
        m
    }

    fn trim(&mut self) {
        while self.e.last() == Some(&0) {
            self.e.pop();
        }
    }

    /// Power of `s_j`, `j ≥ 0`.
    pub fn power(&self, j: usize) -> i32 {
        if j == 0 {
            self.s0
        } else {
            self.e.get(j - 1).copied().unwrap_or(0) as i32
        }
    }

    /// Highest `j` with a nonzero power of `s_j`.
    pub fn max_index(&self) -> usize {
        self.e.len()
    }

    /// Number of `x1` derivatives carried by the symbols, `Σ j·e_j`.
    pub fn slow_weight(&self) -> u32 {
        self.e.iter().enumerate().map(|(i, p)| (i as u32 + 1) * p).sum()
    }

    fn with_power(&self, j: usize, delta: i32) -> Self {
        let mut m = self.clone();
        if j == 0 {
            m.s0 += delta;
        } else {
            if m.e.len() < j {
                m.e.resize(j, 0);
            }
            m.e[j - 1] = (m.e[j - 1] as i32 + delta) as u32;
            m.trim();
        }
        m
    }
}

impl Exponents for MesoMonomial {
    fn unit() -> Self {
        Self::new(0, 0, 0, &[])
    }

    fn times(&self, o: &Self) -> Self {
        let n = self.e.len().max(o.e.len());
        let e: Vec<u32> = (0..n)
            .map(|i| self.e.get(i).copied().unwrap_or(0) + o.e.get(i).copied().unwrap_or(0))
            .collect();
        Self::new(self.a2 + o.a2, self.k2 + o.k2, self.s0 + o.s0, &e)
    }

    fn amplitude_degree(&self) -> u32 {
        self.a2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MesoRingElement {
    poly: Poly<MesoMonomial>,
}

impl MesoRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self { poly: Poly::one() }
    }

    pub fn constant(w: Rational) -> Self {
        Self { poly: Poly::constant(w) }
    }

    pub fn monomial(m: MesoMonomial, w: Rational) -> Self {
        Self { poly: Poly::term(m, w) }
    }

    /// The symbol `s_j`.
    pub fn symbol(j: usize) -> Self {
        Self::monomial(MesoMonomial::unit().with_power(j, 1), Rational::one())
    }

    pub fn from_poly(poly: Poly<MesoMonomial>) -> Self {
        Self { poly }
    }

    pub fn poly(&self) -> &Poly<MesoMonomial> {
        &self.poly
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MesoMonomial, &Rational)> {
        self.poly.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn len(&self) -> usize {
        self.poly.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poly.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { poly: self.poly.add(&o.poly) }
    }

    pub fn add_assign(&mut self, o: &Self) {
        self.poly.add_assign(&o.poly);
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { poly: self.poly.sub(&o.poly) }
    }

    pub fn neg(&self) -> Self {
        Self { poly: self.poly.neg() }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self { poly: self.poly.scale(s) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { poly: self.poly.mul(&o.poly) }
    }

    /// Product keeping amplitude degree `≤ max_a` and slow weight `≤ max_w`.
    pub fn mul_trunc(&self, o: &Self, max_a: u32, max_w: u32) -> Self {
        let mut out = Poly::zero();
        for (ma, wa) in self.poly.iter() {
            let (da, sa) = (ma.a2, ma.slow_weight());
            if da > max_a || sa > max_w {
                continue;
            }
            for (mb, wb) in o.poly.iter() {
                if da + mb.a2 > max_a || sa + mb.slow_weight() > max_w {
                    continue;
                }
                out.add_term(ma.times(mb), wa * wb);
            }
        }
        Self { poly: out }
    }

    pub fn filter(&self, keep: impl FnMut(&MesoMonomial) -> bool) -> Self {
        Self { poly: self.poly.filter(keep) }
    }

    /// `∂x1` as the derivation `s_j ↦ s_{j+1}`.
    pub fn d_x1(&self) -> Self {
        let mut out = Poly::zero();
        for (m, w) in self.poly.iter() {
            for j in 0..=m.max_index() {
                let p = m.power(j);
                if p == 0 {
                    continue;
                }
                let next = m.with_power(j, -1).with_power(j + 1, 1);
                out.add_term(next, w * int(p as i64));
            }
        }
        Self { poly: out }
    }

    /// `∂x1^r` applied `r` times.
    pub fn d_x1_n(&self, r: u32) -> Self {
        (0..r).fold(self.clone(), |acc, _| acc.d_x1())
    }

    pub fn max_amplitude_degree(&self) -> Option<u32> {
        self.poly.max_amplitude_degree()
    }

    pub fn max_slow_weight(&self) -> Option<u32> {
        self.poly.iter().map(|(m, _)| m.slow_weight()).max()
    }

    /// Ring homomorphism sending `s_j` to `images[j]` (and `s_0^{-1}` to
    /// `inverse0`), leaving `a2`, `k2` untouched.
    pub fn substitute_symbols(&self, images: &[MesoRingElement], inverse0: &MesoRingElement) -> Self {
        let mut out = Self::zero();
        for (m, w) in self.poly.iter() {
            let mut term = Self::monomial(MesoMonomial::new(m.a2, m.k2, 0, &[]), w.clone());
            let base0 = if m.s0 >= 0 { &images[0] } else { inverse0 };
            for _ in 0..m.s0.unsigned_abs() {
                term = term.mul(base0);
            }
            for (j, image) in images.iter().enumerate().take(m.max_index() + 1).skip(1) {
                for _ in 0..m.power(j) {
                    term = term.mul(image);
                }
            }
            out.add_assign(&term);
        }
        out
    }

    /// Rewrite from one basis to the other: `s_j ↦ ∂x1^j (1/t_0)`.
    pub fn change_basis(&self) -> Self {
        let top = self.iter().map(|(m, _)| m.max_index()).max().unwrap_or(0);
        let inv = Self::monomial(MesoMonomial::new(0, 0, -1, &[]), Rational::one());
        let mut images = vec![inv.clone()];
        for j in 1..=top {
            images.push(images[j - 1].d_x1());
        }
        self.substitute_symbols(&images, &Self::symbol(0))
    }

    pub fn fmt_in(&self, basis: Basis) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let s = basis.letter();
        let mut parts = Vec::new();
        for (m, w) in self.poly.iter() {
            let mut factors = Vec::new();
            let mut push = |name: String, p: i32| match p {
                0 => {}
                1 => factors.push(name),
                p => factors.push(format!("{name}^{p}")),
            };
            push("a2".into(), m.a2 as i32);
            push("k2".into(), m.k2);
            for j in 0..=m.max_index() {
                push(format!("{s}{j}"), m.power(j));
            }
            let coef = if factors.is_empty() {
                format_rational(w)
            } else if w.is_one() {
                factors.join("*")
            } else if (-w).is_one() {
                format!("-{}", factors.join("*"))
            } else {
                format!("{}*{}", format_rational(w), factors.join("*"))
            };
            parts.push(coef);
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }

    /// Sign of the leading rational weight; used for display only.
    pub fn leading_is_negative(&self) -> bool {
        self.poly.iter().next().is_some_and(|(_, w)| w.is_negative())
    }
}

impl fmt::Display for MesoRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_in(Basis::B))
    }
}

impl Zero for MesoRingElement {
    fn zero() -> Self {
        MesoRingElement::zero()
    }

    fn is_zero(&self) -> bool {
        MesoRingElement::is_zero(self)
    }
}

impl std::ops::Add for MesoRingElement {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        MesoRingElement::add(&self, &o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::poly::frac;

    fn s(j: usize) -> MesoRingElement {
        MesoRingElement::symbol(j)
    }

    #[test]
    fn derivation_of_reciprocal() {
        let inv = MesoRingElement::monomial(MesoMonomial::new(0, 0, -1, &[]), Rational::one());
        // d/dx1 (1/b0) = −b1/b0²
        let want = MesoRingElement::monomial(MesoMonomial::new(0, 0, -2, &[1]), int(-1));
        assert_eq!(inv.d_x1(), want);
        // d²/dx1² (1/b0) = −b2/b0² + 2 b1²/b0³
        let want2 = MesoRingElement::monomial(MesoMonomial::new(0, 0, -2, &[0, 1]), int(-1))
            .add(&MesoRingElement::monomial(MesoMonomial::new(0, 0, -3, &[2]), int(2)));
        assert_eq!(inv.d_x1().d_x1(), want2);
    }

    #[test]
    fn leibniz_rule() {
        let f = s(0).mul(&s(1)).add(&s(2).scale(&frac(3, 2)));
        let g = s(1).mul(&s(1)).add(&MesoRingElement::monomial(MesoMonomial::new(1, -2, -3, &[]), int(5)));
        let lhs = f.mul(&g).d_x1();
        let rhs = f.d_x1().mul(&g).add(&f.mul(&g.d_x1()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn basis_change_is_an_involution() {
        let f = s(0).mul(&s(2)).add(&s(1).mul(&s(1)).scale(&int(-4)))
            .add(&MesoRingElement::monomial(MesoMonomial::new(2, -2, -1, &[0, 0, 1]), frac(1, 2)));
        assert_eq!(f.change_basis().change_basis(), f);
    }

    #[test]
    fn slow_weight_counts_derivatives() {
        assert_eq!(MesoMonomial::new(0, 0, -3, &[2, 0, 1]).slow_weight(), 5);
    }
}
