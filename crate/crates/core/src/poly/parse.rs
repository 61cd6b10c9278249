//! Recursive-descent parser for polynomial expressions in `x1..xd`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'x' integer | '(' expr ')'
//! ```
//!
//! Division is only allowed by constants. Decimal literals are read as exact
//! rationals.

use dashu_base::UnsignedAbs;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

use super::Polynomial;
use crate::error::{Error, Result};

/// Largest total degree any intermediate result may reach.
pub const MAX_DEGREE: usize = 64;
/// Largest number of terms any intermediate result may hold.
pub const MAX_TERMS: usize = 20_000;
const MAX_DEPTH: usize = 64;
const MAX_LITERAL_DIGITS: usize = 200;

pub fn parse_polynomial(src: &str, dim: usize) -> Result<Polynomial<RBig>> {
    let coeff_limit = UBig::from(10u8).pow(MAX_LITERAL_DIGITS);
    let mut p = Parser { src: src.as_bytes(), pos: 0, dim, depth: 0, coeff_limit };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(p.err("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    p.check(&e)?;
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
    depth: usize,
    coeff_limit: UBig,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Expr { pos: self.pos, msg: msg.into() }
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

    fn check(&self, p: &Polynomial<RBig>) -> Result<()> {
        if p.degree() > MAX_DEGREE {
            return Err(self.err("degree limit exceeded"));
        }
        if p.terms.len() > MAX_TERMS {
            return Err(self.err("term limit exceeded"));
        }
        // Keeps every accepted coefficient printable as literals this parser reads back.
        let fits = |n: &UBig| n < &self.coeff_limit;
        if !p.terms.values().all(|c| fits(&c.numerator().unsigned_abs()) && fits(c.denominator())) {
            return Err(self.err("coefficient too large"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Polynomial<RBig>> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err("nesting too deep"));
        }
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
            self.check(&acc)?;
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial<RBig>> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    if acc.degree() + rhs.degree() > MAX_DEGREE
                        || acc.terms.len().saturating_mul(rhs.terms.len()) > MAX_TERMS * 8
                    {
                        return Err(self.err("product too large"));
                    }
                    acc = acc.mul(&rhs);
                }
                b'/' => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.unary()?;
                    if !rhs.is_constant() {
                        return Err(Error::Expr { pos: at, msg: "division by a non-constant".into() });
                    }
                    let c = rhs
                        .terms
                        .values()
                        .next()
                        .cloned()
                        .ok_or(Error::Expr { pos: at, msg: "division by zero".into() })?;
                    acc = acc.scale(&(RBig::ONE / c));
                }
                _ => break,
            }
            self.check(&acc)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial<RBig>> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.nest(|p| p.unary().map(|v| v.neg()))
            }
            Some(b'+') => {
                self.pos += 1;
                self.nest(|p| p.unary())
            }
            _ => self.power(),
        }
    }

    fn nest<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err("nesting too deep"));
        }
        let r = f(self);
        self.depth -= 1;
        r
    }

    fn power(&mut self) -> Result<Polynomial<RBig>> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let k = self.uint()?;
            if k > MAX_DEGREE as u64 || base.degree() * k as usize > MAX_DEGREE {
                return Err(Error::Expr { pos: at, msg: "exponent too large".into() });
            }
            // Repeated products so the limits cut off runaway coefficients early.
            let mut r = Polynomial::constant(self.dim, RBig::ONE);
            for _ in 0..k {
                r = r.mul(&base);
                self.check(&r)?;
            }
            return Ok(r);
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        if self.pos - start > 18 {
            return Err(Error::Expr { pos: start, msg: "integer too long".into() });
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("bounded digit run"))
    }

    fn atom(&mut self) -> Result<Polynomial<RBig>> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                let at = self.pos;
                let i = self.uint()?;
                if i == 0 || i as usize > self.dim {
                    return Err(Error::Expr {
                        pos: at,
                        msg: format!("variable x{i} outside x1..x{}", self.dim),
                    });
                }
                Ok(Polynomial::variable(self.dim, i as usize - 1, RBig::ONE))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                Ok(Polynomial::constant(self.dim, v))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<RBig> {
        let start = self.pos;
        let mut int_digits = String::new();
        let mut frac_digits = String::new();
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            int_digits.push(self.src[self.pos] as char);
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                frac_digits.push(self.src[self.pos] as char);
                self.pos += 1;
            }
        }
        if int_digits.is_empty() && frac_digits.is_empty() {
            return Err(Error::Expr { pos: start, msg: "malformed number".into() });
        }
        if int_digits.len() + frac_digits.len() > MAX_LITERAL_DIGITS {
            return Err(Error::Expr { pos: start, msg: "literal too long".into() });
        }
        decimal_to_rational(&int_digits, &frac_digits)
            .ok_or(Error::Expr { pos: start, msg: "malformed number".into() })
    }
}

/// Exact value of the decimal `int.frac`.
pub(crate) fn decimal_to_rational(int: &str, frac: &str) -> Option<RBig> {
    let digits = format!("{int}{frac}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let num: UBig = digits.parse().ok()?;
    let den = UBig::from(10u8).pow(frac.len());
    Some(RBig::from_parts(IBig::from(num), den))
}
