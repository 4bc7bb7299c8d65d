//! Multivariate polynomials with exact rational coefficients.
//!
//! Used wherever exactness matters: the pre-Lie product on polynomial vector
//! fields, user-supplied chart potentials (differentiated exactly, evaluated
//! in floating point only at the end), and the cleared-denominator critical
//! systems of the likelihood module.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{ConeError, Result};

/// Polynomial in `nvars` variables over the rationals; terms keyed by
/// exponent vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn constant_i64(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, BigRational::from_integer(BigInt::from(c)))
    }

    /// Exact embedding of an `f64` (every finite double is rational).
    pub fn constant_f64(nvars: usize, c: f64) -> Result<Self> {
        let r = BigRational::from_float(c).ok_or(ConeError::NonFinite)?;
        Ok(Self::constant(nvars, r))
    }

    /// The monomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(exps, BigRational::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    fn insert_term(&mut self, exps: Vec<u32>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, BigRational::one());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact partial derivative with respect to `x_i`.
    pub fn deriv(&self, i: usize) -> Self {
        assert!(i < self.nvars, "variable index out of range");
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[i] -= 1;
            out.insert_term(exps, c * BigRational::from_integer(BigInt::from(e[i])));
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        let mut s = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (xi, &ei) in x.iter().zip(e) {
                if ei > 0 {
                    t *= xi.powi(ei as i32);
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_c64(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        let mut s = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (xi, &ei) in x.iter().zip(e) {
                if ei > 0 {
                    t *= xi.powu(ei);
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_rational(&self, x: &[BigRational]) -> BigRational {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        let mut s = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &ei) in x.iter().zip(e) {
                for _ in 0..ei {
                    t *= xi;
                }
            }
            s += t;
        }
        s
    }

    /// Renders the polynomial with the given variable names.
    pub fn format_with_vars(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars, "name count mismatch");
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let is_const_term = e.iter().all(|&x| x == 0);
            let coeff_is_one = mag.is_one();
            if !coeff_is_one || is_const_term {
                let _ = write!(out, "{mag}");
            }
            let mut first_factor = coeff_is_one && !is_const_term;
            for (i, &ei) in e.iter().enumerate() {
                if ei == 0 {
                    continue;
                }
                if !first_factor {
                    out.push('*');
                } else {
                    first_factor = false;
                }
                out.push_str(&names[i]);
                if ei > 1 {
                    let _ = write!(out, "^{ei}");
                }
            }
        }
        out
    }
}

/// Parses a polynomial from the CLI grammar: integer or `a/b` rational
/// coefficients, `+`, `-`, `*`, `^` with non-negative integer exponents,
/// parentheses, and variables named `<letter...><index>` with 1-based
/// indices (for example `t1`, `x3`).
pub fn parse_poly(src: &str, nvars: usize) -> Result<MultiPoly> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        nvars,
    };
    let p = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(ConeError::Parse(format!(
            "unexpected trailing input at token {}",
            parser.pos
        )));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigRational),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part: String = chars[start..i].iter().collect();
                let numer: BigInt = int_part
                    .parse()
                    .map_err(|_| ConeError::Parse(format!("bad integer `{int_part}`")))?;
                // a/b rational, only when the slash is followed by digits
                if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    let dstart = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let den_part: String = chars[dstart..i].iter().collect();
                    let denom: BigInt = den_part
                        .parse()
                        .map_err(|_| ConeError::Parse(format!("bad denominator `{den_part}`")))?;
                    if denom.is_zero() {
                        return Err(ConeError::Parse("zero denominator".into()));
                    }
                    out.push(Token::Number(BigRational::new(numer, denom)));
                } else if i < chars.len() && chars[i] == '.' {
                    // decimal literal, converted exactly in base 10
                    i += 1;
                    let fstart = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let frac_part: String = chars[fstart..i].iter().collect();
                    if frac_part.is_empty() {
                        return Err(ConeError::Parse("dangling decimal point".into()));
                    }
                    let frac: BigInt = frac_part.parse().unwrap();
                    let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
                    out.push(Token::Number(
                        BigRational::from_integer(numer)
                            + BigRational::new(frac, scale),
                    ));
                } else {
                    out.push(Token::Number(BigRational::from_integer(numer)));
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let istart = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if istart == i {
                    let name: String = chars[start..i].iter().collect();
                    return Err(ConeError::Parse(format!(
                        "variable `{name}` is missing its index (expected e.g. `{name}1`)"
                    )));
                }
                let idx: usize = chars[istart..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| ConeError::Parse("bad variable index".into()))?;
                if idx == 0 {
                    return Err(ConeError::Parse("variable indices are 1-based".into()));
                }
                out.push(Token::Var(idx - 1));
            }
            other => {
                return Err(ConeError::Parse(format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    nvars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        while let Some(tok) = self.peek() {
            match tok {
                Token::Plus => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Token::Minus => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.factor()?;
        while let Some(Token::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MultiPoly> {
        let mut sign = BigRational::one();
        while let Some(Token::Minus) = self.peek() {
            self.pos += 1;
            sign = -sign;
        }
        let mut base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            let exp = match self.peek() {
                Some(Token::Number(r)) if r.is_integer() && !r.is_negative() => {
                    let e = r.to_integer().to_u32().ok_or_else(|| {
                        ConeError::Parse("exponent too large".into())
                    })?;
                    self.pos += 1;
                    e
                }
                _ => {
                    return Err(ConeError::Parse(
                        "exponent must be a non-negative integer".into(),
                    ))
                }
            };
            base = base.pow(exp);
        }
        Ok(base.scale(&sign))
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        match self.peek().cloned() {
            Some(Token::Number(r)) => {
                self.pos += 1;
                Ok(MultiPoly::constant(self.nvars, r))
            }
            Some(Token::Var(i)) => {
                if i >= self.nvars {
                    return Err(ConeError::Parse(format!(
                        "variable index {} exceeds variable count {}",
                        i + 1,
                        self.nvars
                    )));
                }
                self.pos += 1;
                Ok(MultiPoly::var(self.nvars, i))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(ConeError::Parse("missing closing parenthesis".into())),
                }
            }
            other => Err(ConeError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parse_and_eval() {
        let p = parse_poly("t1^4 + t2^4 + t3^4 + t1^2*t2*t3", 3).unwrap();
        assert_eq!(p.total_degree(), 4);
        assert_eq!(p.eval_f64(&[1.0, 1.0, 1.0]), 4.0);
        assert_eq!(p.eval_f64(&[2.0, 1.0, 1.0]), 16.0 + 1.0 + 1.0 + 4.0);
    }

    #[test]
    fn parse_rational_coefficients() {
        let p = parse_poly("1/2*x1^2 - 3*x2 + 2/3", 2).unwrap();
        let v = p.eval_rational(&[rat(2, 1), rat(1, 3)]);
        // 1/2*4 - 3*(1/3) + 2/3 = 2 - 1 + 2/3 = 5/3
        assert_eq!(v, rat(5, 3));
    }

    #[test]
    fn parse_decimal_exactly() {
        let p = parse_poly("0.25*t1", 1).unwrap();
        assert_eq!(p.eval_rational(&[rat(4, 1)]), rat(1, 1));
    }

    #[test]
    fn parse_errors() {
        assert!(parse_poly("t1 +", 1).is_err());
        assert!(parse_poly("t4", 3).is_err());
        assert!(parse_poly("t1^(2)", 1).is_err());
        assert!(parse_poly("t1^-2", 1).is_err());
        assert!(parse_poly("q", 1).is_err());
    }

    #[test]
    fn derivative_is_exact() {
        let p = parse_poly("t1^3*t2 - 2*t2^2", 2).unwrap();
        let d1 = p.deriv(0);
        let expect = parse_poly("3*t1^2*t2", 2).unwrap();
        assert_eq!(d1, expect);
        let d2 = p.deriv(1);
        let expect = parse_poly("t1^3 - 4*t2", 2).unwrap();
        assert_eq!(d2, expect);
    }

    #[test]
    fn arithmetic_identities() {
        let a = parse_poly("t1^2 + t2", 2).unwrap();
        let b = parse_poly("t1 - t2", 2).unwrap();
        let lhs = a.mul(&b).add(&b.mul(&a));
        let rhs = a.mul(&b).scale(&rat(2, 1));
        assert_eq!(lhs, rhs);
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn format_round_trips_through_parser() {
        let p = parse_poly("-1/2*t1^2*t2 + t3 - 4", 3).unwrap();
        let names: Vec<String> = (1..=3).map(|i| format!("t{i}")).collect();
        let s = p.format_with_vars(&names);
        let q = parse_poly(&s, 3).unwrap();
        assert_eq!(p, q);
    }
}
