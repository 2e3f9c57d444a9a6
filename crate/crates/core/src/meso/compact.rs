//! Expansion of compact nested expressions such as
//! `D(c0*D(U)) + a2^2/(2*k2^2)*D(c0^2*D(D(c0*D(U))))` into canonical series.
//!
//! Symbols: `a2`, `k2`, `b<j>`, `c<j>` (`c_j = d^j𝒦/dx1^j = ∂x1^j (1/b0)`),
//! `U`, `D(·) = ∂x(·) + ∂x1(·)`, and `sin(n*k2*x2)`, `cos(n*k2*x2)`.
//! Division is allowed only by invertible monomials.

use num::{One, Zero};

use super::ring::{MesoMonomial, MesoRingElement};
use super::series::{MesoFieldSeries, MesoTruncation};
use crate::error::{Error, Result};
use crate::trigpoly::poly::int;
use crate::trigpoly::{Harmonic, Parity, SeriesKind};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let s = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[s..i].parse().map_err(|_| Error::Parse {
                pos: s,
                msg: "integer out of range".into(),
            })?;
            out.push((s, Tok::Num(n)));
        } else if c.is_ascii_alphabetic() {
            let s = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((s, Tok::Ident(src[s..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    t: MesoTruncation,
    c_images: Vec<MesoRingElement>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            self.err(format!("expected `{op}`"))
        }
    }

    fn expect_ident(&mut self, name: &str) -> Result<()> {
        if self.peek() == Some(&Tok::Ident(name.into())) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{name}`"))
        }
    }

    fn scalar(&self, c: MesoRingElement) -> MesoFieldSeries {
        MesoFieldSeries::scalar(c, 0, Parity::Cos, self.t)
    }

    fn expr(&mut self) -> Result<MesoFieldSeries> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MesoFieldSeries> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?)?;
            } else if self.eat('/') {
                let at = self.here();
                let d = self.unary()?;
                let inv = invert(&d).ok_or(Error::Parse {
                    pos: at,
                    msg: "division only by invertible monomials in k2 and b0/c0".into(),
                })?;
                acc = acc.mul(&self.scalar(inv))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<MesoFieldSeries> {
        if self.eat('-') {
            Ok(self.unary()?.neg())
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<MesoFieldSeries> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let e = match self.peek() {
            Some(Tok::Num(n)) => *n,
            _ => return self.err("expected integer exponent"),
        };
        self.pos += 1;
        let base = if neg {
            match invert(&base) {
                Some(inv) => self.scalar(inv),
                None => return self.err("negative power of a non-invertible factor"),
            }
        } else {
            base
        };
        let mut acc = self.scalar(MesoRingElement::one());
        for _ in 0..e {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<MesoFieldSeries> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Tok::Num(n) => Ok(self.scalar(MesoRingElement::constant(int(n)))),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Op(c) => {
                self.pos -= 1;
                self.err(format!("unexpected `{c}`"))
            }
            Tok::Ident(name) => self.named(&name),
        }
    }

    fn named(&mut self, name: &str) -> Result<MesoFieldSeries> {
        match name {
            "a2" => Ok(self.scalar(MesoRingElement::monomial(MesoMonomial::new(1, 0, 0, &[]), One::one()))),
            "k2" => Ok(self.scalar(MesoRingElement::monomial(MesoMonomial::new(0, 1, 0, &[]), One::one()))),
            "U" => Ok(MesoFieldSeries::mean_field(self.t)),
            "D" => {
                self.expect('(')?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e.d_x().add(&e.d_x1()))
            }
            "sin" | "cos" => {
                self.expect('(')?;
                let n = match self.peek() {
                    Some(Tok::Num(n)) => {
                        let n = *n;
                        self.pos += 1;
                        self.expect('*')?;
                        n
                    }
                    _ => 1,
                };
                self.expect_ident("k2")?;
                self.expect('*')?;
                self.expect_ident("x2")?;
                self.expect(')')?;
                let parity = if name == "sin" { Parity::Sin } else { Parity::Cos };
                Ok(MesoFieldSeries::scalar(MesoRingElement::one(), n, parity, self.t))
            }
            _ => {
                let (letter, idx) = name.split_at(1);
                let j: usize = match idx.parse() {
                    Ok(j) if !idx.starts_with('+') => j,
                    _ => return Err(Error::UnknownSymbol(name.into())),
                };
                match letter {
                    "b" => Ok(self.scalar(MesoRingElement::symbol(j))),
                    "c" => {
                        let c = self.c_symbol(j);
                        Ok(self.scalar(c))
                    }
                    _ => Err(Error::UnknownSymbol(name.into())),
                }
            }
        }
    }

    fn c_symbol(&mut self, j: usize) -> MesoRingElement {
        while self.c_images.len() <= j {
            let next = match self.c_images.last() {
                None => MesoRingElement::monomial(MesoMonomial::new(0, 0, -1, &[]), One::one()),
                Some(prev) => prev.d_x1(),
            };
            self.c_images.push(next);
        }
        self.c_images[j].clone()
    }
}

/// Inverse of a single invertible scalar monomial (no `a2`, no `b_{j≥1}`).
fn invert(s: &MesoFieldSeries) -> Option<MesoRingElement> {
    if s.kind() != SeriesKind::Scalar || s.len() != 1 {
        return None;
    }
    let ((_, _, h), c) = s.iter().next()?;
    if *h != Harmonic::CONST || c.len() != 1 {
        return None;
    }
    let (m, w) = c.iter().next()?;
    if m.a2 != 0 || m.max_index() != 0 || w.is_zero() {
        return None;
    }
    Some(MesoRingElement::monomial(MesoMonomial::new(0, -m.k2, -m.s0, &[]), w.recip()))
}

/// Expand a compact expression at the given truncation.
pub fn expand_compact(src: &str, t: MesoTruncation) -> Result<MesoFieldSeries> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        t,
        c_images: Vec::new(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Evolution `D(c0 D(U)) + a2²/(2k2²) D(c0² D(D(c0 D(U))))`.
pub const EVOLUTION_COMPACT: &str = "D(c0*D(U)) + a2^2/(2*k2^2)*D(c0^2*D(D(c0*D(U))))";

/// Field `U + c0 a2 sin(k2x2)/k2 D(U) + D(c0 a2 cos(k2x2)/k2² D(U))`.
pub const FIELD_COMPACT: &str = "U + c0*a2*sin(k2*x2)/k2*D(U) + D(c0*a2*cos(k2*x2)/k2^2*D(U))";
