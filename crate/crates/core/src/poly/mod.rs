//! Sparse multivariate polynomials over any [`Coeff`] ring.

pub(crate) mod parse;

use std::collections::BTreeMap;

use dashu_ratio::RBig;

use crate::arith::{Coeff, Complex, GaussRational, Real};
use crate::multi_index::MultiIndex;

pub use parse::{parse_polynomial, MAX_DEGREE, MAX_TERMS};

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<C> {
    pub dim: usize,
    pub terms: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> Polynomial<C> {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        Self::monomial(MultiIndex::zero(dim), c)
    }

    pub fn monomial(a: MultiIndex, c: C) -> Self {
        let dim = a.dim();
        let mut p = Polynomial::zero(dim);
        if !c.is_zero() {
            p.terms.insert(a, c);
        }
        p
    }

    /// `x_{axis+1}` with the given unit coefficient.
    pub fn variable(dim: usize, axis: usize, one: C) -> Self {
        Self::monomial(MultiIndex::unit(dim, axis, 1), one)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|a| a.degree()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, a: MultiIndex, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&a) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&a);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(a, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (a, c) in &o.terms {
            r.add_term(a.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.neg())).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Polynomial::zero(self.dim);
        for (a, c) in &self.terms {
            for (b, e) in &o.terms {
                r.add_term(a.add(b), c.mul(e));
            }
        }
        r
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut r = Polynomial::zero(self.dim);
        for (a, c) in &self.terms {
            r.add_term(a.clone(), c.mul(k));
        }
        r
    }

    /// `self^k` by repeated squaring; `one` supplies the unit coefficient.
    pub fn pow(&self, k: u32, one: &C) -> Self {
        let mut result = Polynomial::constant(self.dim, one.clone());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Coefficient-wise conjugate.
    pub fn conj(&self) -> Self {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.conj())).collect(),
        }
    }

    pub fn coeff(&self, a: &MultiIndex) -> Option<&C> {
        self.terms.get(a)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let mut r = Polynomial::zero(self.dim);
        for (a, c) in &self.terms {
            r.add_term(a.clone(), f(c));
        }
        r
    }

    /// True when the only term (if any) is the constant one.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|a| a.degree() == 0)
    }
}

impl Polynomial<RBig> {
    /// Exact evaluation at a rational point.
    pub fn eval_rational(&self, x: &[RBig]) -> RBig {
        let mut acc = RBig::ZERO;
        for (a, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&a.0) {
                for _ in 0..e {
                    t = &t * xi;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn to_gauss(&self) -> Polynomial<GaussRational> {
        self.map_coeffs(|c| GaussRational::real(c.clone()))
    }

    pub fn to_real(&self, bits: usize) -> Polynomial<Real> {
        self.map_coeffs(|c| Real::from_rational(c, bits))
    }

    pub fn to_complex(&self, bits: usize) -> Polynomial<Complex> {
        self.map_coeffs(|c| Complex::from_real(Real::from_rational(c, bits)))
    }
}

impl Polynomial<GaussRational> {
    pub fn to_complex(&self, bits: usize) -> Polynomial<Complex> {
        self.map_coeffs(|c| Complex::from_gauss(c, bits))
    }
}

/// Renders an exact polynomial in the same grammar the parser accepts.
pub fn format_rational_polynomial(p: &Polynomial<RBig>) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (a, c) in p.terms.iter() {
        let neg = c < &RBig::ZERO;
        let mag = if neg { -c.clone() } else { c.clone() };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors = Vec::new();
        if a.degree() == 0 || mag != RBig::ONE {
            if mag.denominator() == &dashu_int::UBig::ONE {
                factors.push(mag.numerator().to_string());
            } else {
                factors.push(format!("({}/{})", mag.numerator(), mag.denominator()));
            }
        }
        for (i, &e) in a.0.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(format!("x{}", i + 1)),
                _ => factors.push(format!("x{}^{}", i + 1, e)),
            }
        }
        out.push_str(&factors.join("*"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dashu_int::IBig;

    fn r(n: i64) -> RBig {
        RBig::from(IBig::from(n))
    }

    #[test]
    fn binomial_square() {
        let x = Polynomial::variable(2, 0, r(1));
        let y = Polynomial::variable(2, 1, r(1));
        let s = x.add(&y).pow(2, &r(1));
        assert_eq!(s.terms.len(), 3);
        assert_eq!(s.coeff(&MultiIndex(vec![1, 1])), Some(&r(2)));
        assert_eq!(s.degree(), 2);
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = Polynomial::variable(1, 0, r(1));
        assert!(x.sub(&x).is_zero());
    }

    #[test]
    fn format_parses_back() {
        let p = parse_polynomial("3*x1^2 - x2/4 + 7", 2).unwrap();
        let s = format_rational_polynomial(&p);
        assert_eq!(parse_polynomial(&s, 2).unwrap(), p);
    }
}
