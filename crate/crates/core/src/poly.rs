//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Variables are numbered from 0; a monomial is its exponent vector with
//! trailing zeros trimmed, so equal polynomials have equal representations.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Pow, Zero};
use thiserror::Error;

use crate::rational::{self, Rational};

type Monomial = Vec<u32>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

fn trimmed(mut m: Monomial) -> Monomial {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn var(i: usize) -> Poly {
        let mut m = vec![0; i + 1];
        m[i] = 1;
        let mut p = Poly::zero();
        p.add_term(m, Rational::one());
        p
    }

    /// Σ coeffs[i]·x_i
    pub fn linear(coeffs: &[Rational]) -> Poly {
        let mut p = Poly::zero();
        for (i, c) in coeffs.iter().enumerate() {
            let mut m = vec![0; i + 1];
            m[i] = 1;
            p.add_term(m, c.clone());
        }
        p
    }

    pub fn monomial(exponents: &[u32], c: Rational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(exponents.to_vec(), c);
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let m = trimmed(m);
        let entry = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_empty())
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Rational::zero)
    }

    /// One more than the highest variable index that occurs.
    pub fn nvars(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.get(i).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            p.add_term(m.clone(), c * k);
        }
        p
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(Rational::one()), |acc, _| &acc * self)
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.get(i).copied().unwrap_or(0);
            if e == 0 {
                continue;
            }
            let mut d = m.clone();
            d[i] -= 1;
            p.add_term(d, c * rational::rat(e as i64));
        }
        p
    }

    /// Directional derivative Σ dir[i]·∂_i.
    pub fn directional(&self, dir: &[Rational]) -> Poly {
        dir.iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .fold(Poly::zero(), |acc, (i, a)| &acc + &self.derivative(i).scale(a))
    }

    /// Value at `x`; variables beyond `x.len()` read 0.
    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match x.get(i) {
                    Some(xi) => v *= Pow::pow(xi, e),
                    None => {
                        v = Rational::zero();
                        break;
                    }
                }
            }
            total += v;
        }
        total
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .enumerate()
                    .fold(rational::to_f64(c), |v, (i, &e)| v * x.get(i).copied().unwrap_or(0.0).powi(e as i32))
            })
            .sum()
    }

    /// Replaces every x_i by `subs[i]`. Panics if a variable has no replacement.
    pub fn substitute(&self, subs: &[Poly]) -> Poly {
        let mut powers: BTreeMap<(usize, u32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    let s = subs.get(i).unwrap_or_else(|| panic!("no substitute for x{}", i + 1));
                    let power = powers.entry((i, e)).or_insert_with(|| s.pow(e));
                    term = &term * power;
                }
            }
            for (m, c) in term.terms {
                out.add_term(m, c);
            }
        }
        out
    }

    /// Renders with custom variable names.
    pub fn display_with<F: Fn(usize) -> String>(&self, name: F) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        // highest degree first reads more naturally
        let mut terms: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let negative = c < &Rational::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            if k == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_empty() {
                factors.push(rational::format_rational(&mag));
            }
            for (i, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(name(i)),
                    _ => factors.push(format!("{}^{e}", name(i))),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(|i| format!("x{}", i + 1)))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &rhs.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    // exponents add when monomials multiply
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let n = ma.len().max(mb.len());
                let m: Monomial =
                    (0..n).map(|i| ma.get(i).copied().unwrap_or(0) + mb.get(i).copied().unwrap_or(0)).collect();
                p.add_term(m, ca * cb);
            }
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("polynomial syntax error at column {column}: {message}")]
pub struct PolyParseError {
    /// 1-based
    pub column: usize,
    pub message: String,
}

/// Parses `x1`-style variables (1-based).
pub fn parse_indexed(src: &str) -> Result<Poly, PolyParseError> {
    parse_with(src, |name| {
        let digits = name.strip_prefix('x')?;
        let k: usize = digits.parse().ok()?;
        (k >= 1 && !digits.starts_with('0')).then(|| k - 1)
    })
}

/// Parses sums and products of rational literals, variables, powers and
/// parenthesized subexpressions. `resolve` maps a variable name to its index.
pub fn parse_with<F: Fn(&str) -> Option<usize>>(src: &str, resolve: F) -> Result<Poly, PolyParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, resolve: &resolve };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> PolyParseError {
        PolyParseError { column: self.pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly, PolyParseError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, PolyParseError> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Poly, PolyParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let digits = self.take_while(|b| b.is_ascii_digit());
            let e: u32 = digits.parse().map_err(|_| self.error("expected a nonnegative integer exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn take_while(&mut self, keep: impl Fn(u8) -> bool) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && keep(self.src[self.pos]) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Poly, PolyParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() => {
                let start = self.pos;
                let num = self.take_while(|b| b.is_ascii_digit());
                let lit = if self.src.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    let den = self.take_while(|b| b.is_ascii_digit());
                    format!("{num}/{den}")
                } else {
                    num
                };
                rational::parse_rational(&lit).map(Poly::constant).map_err(|_| PolyParseError {
                    column: start + 1,
                    message: format!("invalid rational literal `{lit}`"),
                })
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let start = self.pos;
                let name = self.take_while(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'.');
                match (self.resolve)(&name) {
                    Some(i) => Ok(Poly::var(i)),
                    None => Err(PolyParseError { column: start + 1, message: format!("unknown variable `{name}`") }),
                }
            }
            Some(_) => Err(self.error("expected a number, variable or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}
