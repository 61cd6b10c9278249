//! Moment matrices, positivity checks, the moment functional and Riesz
//! closure distances.

pub mod linalg;

use dashu_ratio::RBig;
use serde::{Deserialize, Serialize};

use crate::arith::{Complex, GaussRational, Real};
use crate::error::{Error, Result};
use crate::measures::{MomentSequence, MomentTable};
use crate::multi_index::{monomials_up_to, MultiIndex};
use crate::poly::Polynomial;
use crate::quadrature::QuadOptions;

use linalg::{ldl_exact, ldl_max_pivot, solve_semidefinite};

/// Working precision and tolerances.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PrecisionPolicy {
    pub bits: usize,
    /// PSD tolerance relative to the matrix max-norm; `None` means
    /// 1e−30 at 256 bits, scaled as 10^(−30·bits/256).
    pub tau_psd: Option<f64>,
    /// Ridge added to the Gram diagonal in least-squares solves.
    pub lambda_reg: f64,
    #[serde(skip)]
    pub quadrature: QuadOptions,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { bits: 256, tau_psd: None, lambda_reg: 0.0, quadrature: QuadOptions::default() }
    }
}

impl PrecisionPolicy {
    pub fn with_bits(bits: usize) -> Self {
        PrecisionPolicy { bits, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits < 64 {
            return Err(Error::Invariant("precision must be at least 64 bits".into()));
        }
        if let Some(t) = self.tau_psd {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Invariant("tau_psd must be positive".into()));
            }
        }
        if !(self.lambda_reg >= 0.0 && self.lambda_reg.is_finite()) {
            return Err(Error::Invariant("lambda_reg must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn tau(&self) -> Real {
        match self.tau_psd {
            Some(t) => Real::from_f64(t, self.bits),
            None => {
                let e = -30.0 * self.bits as f64 / 256.0;
                Real::from_i64(10, self.bits).powi(e.round() as i64)
            }
        }
    }

    /// Rounding-level threshold: a few hundred units in the last place.
    pub fn noise(&self) -> Real {
        Real::pow2(-(self.bits as i64) + 10, self.bits)
    }
}

/// Scalar produced by the moment functional.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(GaussRational),
    Float(Complex),
}

impl Scalar {
    pub fn to_complex(&self, bits: usize) -> Complex {
        match self {
            Scalar::Exact(g) => Complex::from_gauss(g, bits),
            Scalar::Float(c) => Complex::new(c.re.with_bits(bits), c.im.with_bits(bits)),
        }
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        self.to_complex(64).to_c64()
    }
}

/// Complex-coefficient polynomial, exact or in working precision.
#[derive(Clone, Debug, PartialEq)]
pub enum PolynomialExpr {
    Exact(Polynomial<GaussRational>),
    Float(Polynomial<Complex>),
}

impl PolynomialExpr {
    pub fn from_rational(p: &Polynomial<RBig>) -> Self {
        PolynomialExpr::Exact(p.to_gauss())
    }

    pub fn dim(&self) -> usize {
        match self {
            PolynomialExpr::Exact(p) => p.dim,
            PolynomialExpr::Float(p) => p.dim,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            PolynomialExpr::Exact(p) => p.degree(),
            PolynomialExpr::Float(p) => p.degree(),
        }
    }

    pub fn to_complex(&self, bits: usize) -> Polynomial<Complex> {
        match self {
            PolynomialExpr::Exact(p) => p.to_complex(bits),
            PolynomialExpr::Float(p) => p.clone(),
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            PolynomialExpr::Exact(p) => PolynomialExpr::Exact(p.conj()),
            PolynomialExpr::Float(p) => PolynomialExpr::Float(p.conj()),
        }
    }

    pub fn mul(&self, o: &Self, bits: usize) -> Self {
        match (self, o) {
            (PolynomialExpr::Exact(a), PolynomialExpr::Exact(b)) => PolynomialExpr::Exact(a.mul(b)),
            _ => PolynomialExpr::Float(self.to_complex(bits).mul(&o.to_complex(bits))),
        }
    }
}

fn guard(s: &MomentSequence, deg: usize) -> Result<()> {
    if deg > s.max_order() {
        return Err(Error::DegreeOverflow { needed: deg, available: s.max_order() });
    }
    Ok(())
}

fn working_bits(s: &MomentSequence, fallback: usize) -> usize {
    if s.is_exact() {
        fallback
    } else {
        s.bits().max(64)
    }
}

/// L_s(p) = Σ p_α s_α.
pub fn apply_functional(s: &MomentSequence, p: &PolynomialExpr) -> Result<Scalar> {
    if p.dim() != s.dim() {
        return Err(Error::Dimension(format!("polynomial in {} variables, sequence in {}", p.dim(), s.dim())));
    }
    guard(s, p.degree())?;
    match (p, &s.table) {
        (PolynomialExpr::Exact(q), MomentTable::Exact(_)) => {
            let (mut re, mut im) = (RBig::ZERO, RBig::ZERO);
            for (a, c) in &q.terms {
                let v = s.exact(a).expect("within order");
                re += &c.re * v;
                im += &c.im * v;
            }
            Ok(Scalar::Exact(GaussRational::new(re, im)))
        }
        _ => {
            let bits = working_bits(s, 256).max(match p {
                PolynomialExpr::Float(q) => q.terms.values().map(|c| c.bits()).max().unwrap_or(64),
                PolynomialExpr::Exact(_) => 64,
            });
            let q = p.to_complex(bits);
            let mut acc = Complex::zero(bits);
            for (a, c) in &q.terms {
                let v = s.real(a, bits).expect("within order");
                acc = &acc + &c.scale(&v);
            }
            Ok(Scalar::Float(acc))
        }
    }
}

/// ⟨p, q⟩ = L_s(p · conj(q)).
pub fn gram_inner(s: &MomentSequence, p: &PolynomialExpr, q: &PolynomialExpr) -> Result<Scalar> {
    guard(s, p.degree() + q.degree())?;
    let bits = working_bits(s, 256);
    apply_functional(s, &p.mul(&q.conj(), bits))
}

/// Hankel-type matrix H[α,β] = s_{α+β} over monomials of degree ≤ n.
#[derive(Clone, Debug)]
pub struct MomentMatrix {
    pub degree: usize,
    pub index: Vec<MultiIndex>,
    pub entries: MatrixEntries,
}

#[derive(Clone, Debug)]
pub enum MatrixEntries {
    Exact(Vec<Vec<RBig>>),
    Float(Vec<Vec<Real>>),
}

impl MomentMatrix {
    pub fn size(&self) -> usize {
        self.index.len()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        match &self.entries {
            MatrixEntries::Exact(m) => m.iter().map(|r| r.iter().map(|x| x.to_f64().value()).collect()).collect(),
            MatrixEntries::Float(m) => m.iter().map(|r| r.iter().map(|x| x.to_f64()).collect()).collect(),
        }
    }
}

pub fn moment_matrix(s: &MomentSequence, n: usize) -> Result<MomentMatrix> {
    guard(s, 2 * n)?;
    let index = monomials_up_to(s.dim(), n);
    let entries = match &s.table {
        MomentTable::Exact(_) => MatrixEntries::Exact(
            index
                .iter()
                .map(|a| index.iter().map(|b| s.exact(&a.add(b)).expect("within order").clone()).collect())
                .collect(),
        ),
        MomentTable::Float(_) => {
            let bits = s.bits();
            MatrixEntries::Float(
                index
                    .iter()
                    .map(|a| index.iter().map(|b| s.real(&a.add(b), bits).expect("within order")).collect())
                    .collect(),
            )
        }
    };
    Ok(MomentMatrix { degree: n, index, entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PsdVerdict {
    Psd,
    NotPsd,
    Marginal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub verdict: PsdVerdict,
    /// Smallest pivot, or minus the largest leftover coupling when the
    /// elimination stalls; a cheap proxy for the smallest eigenvalue.
    pub min_eigen_estimate: f64,
    pub rank: usize,
    pub exact: bool,
}

/// Pivoted LDLᵀ positivity test.
///
/// Float matrices: pivots at or above −(rounding noise)·‖H‖ count as
/// nonnegative; a negative pivot (or uncancelled coupling in the singular
/// remainder) beyond τ·‖H‖ is NOT_PSD, and anything in between MARGINAL.
/// Exact matrices use exact pivots.
pub fn psd_check(h: &MomentMatrix, policy: &PrecisionPolicy) -> PsdReport {
    match &h.entries {
        MatrixEntries::Exact(m) => {
            let (pivots, diag, off) = ldl_exact(m);
            let min_diag = diag.iter().min().cloned();
            let neg_diag = min_diag.as_ref().is_some_and(|d| *d < RBig::ZERO);
            let not_psd = neg_diag || off > RBig::ZERO;
            let mut est = pivots.iter().min().cloned();
            if let Some(d) = min_diag {
                est = Some(est.map_or(d.clone(), |e| e.min(d)));
            }
            let est = est.map_or(0.0, |e| e.to_f64().value());
            let est = if off > RBig::ZERO { est.min(-off.to_f64().value()) } else { est };
            PsdReport {
                verdict: if not_psd { PsdVerdict::NotPsd } else { PsdVerdict::Psd },
                min_eigen_estimate: est,
                rank: pivots.len(),
                exact: true,
            }
        }
        MatrixEntries::Float(m) => {
            let bits = policy.bits;
            let m: Vec<Vec<Real>> = m.iter().map(|r| r.iter().map(|x| x.with_bits(bits)).collect()).collect();
            let mut norm = Real::zero(bits);
            for r in &m {
                for x in r {
                    let a = x.abs();
                    if a > norm {
                        norm = a;
                    }
                }
            }
            let size = Real::from_i64(m.len().max(1) as i64, bits);
            let noise = &policy.noise() * &size * &norm;
            let tol = &policy.tau() * &norm;
            let e = ldl_max_pivot(&m, &noise);
            let mut min = e.pivots.iter().chain(&e.residual_diag).cloned().fold(None, |acc: Option<Real>, x| {
                Some(match acc {
                    Some(a) if a <= x => a,
                    _ => x,
                })
            });
            if e.residual_diag.len() >= 2 {
                let off = -e.residual_off.clone();
                min = Some(match min {
                    Some(a) if a <= off => a,
                    _ => off,
                });
            }
            let min = min.unwrap_or_else(|| Real::zero(bits));
            let neg = -min.clone();
            let verdict = if neg > tol {
                PsdVerdict::NotPsd
            } else if neg > noise {
                PsdVerdict::Marginal
            } else {
                PsdVerdict::Psd
            };
            PsdReport { verdict, min_eigen_estimate: min.to_f64(), rank: e.pivots.len(), exact: false }
        }
    }
}

/// Result of a closure-distance computation.
#[derive(Clone, Debug)]
pub struct RieszResult {
    pub degree: usize,
    /// ‖1 − m·p*‖ recomputed from the optimal polynomial.
    pub distance: Real,
    /// Squared optimum read off the normal equations, s₀ − r^H c.
    pub squared_normal: Real,
    /// Squared optimum recomputed directly as L(|1 − m p*|²).
    pub squared_direct: Real,
    pub optimizer: Polynomial<Complex>,
    pub rank: usize,
}

/// min over deg p ≤ n of ‖1 − m·p‖ in the moment seminorm, from the
/// monomial-basis normal equations.
pub fn riesz_distance(s: &MomentSequence, m: &PolynomialExpr, n: usize, policy: &PrecisionPolicy) -> Result<RieszResult> {
    let d = s.dim();
    if m.dim() != d {
        return Err(Error::Dimension("multiplier dimension differs from sequence".into()));
    }
    guard(s, 2 * (m.degree() + n))?;
    let bits = policy.bits;
    let mc = m.to_complex(bits);
    let mconj = mc.conj();
    // |m|² has real coefficients.
    let w = mc.mul(&mconj);
    let basis = monomials_up_to(d, n);
    let sval = |a: &MultiIndex| s.real(a, bits).expect("within order");
    let mut g = vec![vec![Real::zero(bits); basis.len()]; basis.len()];
    for (i, a) in basis.iter().enumerate() {
        for j in i..basis.len() {
            let ab = a.add(&basis[j]);
            let mut acc = Real::zero(bits);
            for (c, coef) in &w.terms {
                acc = acc + &coef.re * &sval(&ab.add(c));
            }
            g[i][j] = acc.clone();
            g[j][i] = acc;
        }
    }
    if policy.lambda_reg > 0.0 {
        let lam = Real::from_f64(policy.lambda_reg, bits);
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = &row[i] + &lam;
        }
    }
    // r_j = L(conj(m) x^{α_j})
    let (mut r_re, mut r_im) = (Vec::new(), Vec::new());
    for a in &basis {
        let mut acc = Complex::zero(bits);
        for (c, coef) in &mconj.terms {
            acc = &acc + &coef.scale(&sval(&a.add(c)));
        }
        r_re.push(acc.re);
        r_im.push(acc.im);
    }
    let floor = Real::pow2(-(bits as i64) / 2 - (bits as i64) / 4, bits);
    let sol = solve_semidefinite(&g, &[r_re.clone(), r_im.clone()], &floor);
    let tau = policy.tau().to_f64();
    if sol.worst_negative < -tau.sqrt() {
        return Err(Error::IllConditioned(format!(
            "Gram matrix has a negative pivot ratio {:e} at degree {n}",
            sol.worst_negative
        )));
    }
    let coeffs: Vec<Complex> =
        sol.solutions[0].iter().zip(&sol.solutions[1]).map(|(a, b)| Complex::new(a.clone(), b.clone())).collect();
    // s₀ − Re Σ conj(r_j) c_j
    let s0 = sval(&MultiIndex::zero(d));
    let mut rc = Real::zero(bits);
    for ((rr, ri), c) in r_re.iter().zip(&r_im).zip(&coeffs) {
        rc = rc + rr * &c.re + ri * &c.im;
    }
    let squared_normal = &s0 - &rc;
    let mut p = Polynomial::zero(d);
    for (a, c) in basis.iter().zip(&coeffs) {
        p.add_term(a.clone(), c.clone());
    }
    let one = Polynomial::constant(d, Complex::one(bits));
    let resid = one.sub(&mc.mul(&p));
    let direct = gram_inner(s, &PolynomialExpr::Float(resid.clone()), &PolynomialExpr::Float(resid))?;
    let squared_direct = direct.to_complex(bits).re;
    let distance = if squared_direct.is_negative() { Real::zero(bits) } else { squared_direct.sqrt() };
    Ok(RieszResult { degree: n, distance, squared_normal, squared_direct, optimizer: p, rank: sol.rank })
}

/// The multiplier x + i in one variable.
pub fn x_plus_i() -> PolynomialExpr {
    let mut p = Polynomial::zero(1);
    p.add_term(MultiIndex(vec![1]), GaussRational::real(RBig::ONE));
    p.add_term(MultiIndex(vec![0]), GaussRational::i());
    PolynomialExpr::Exact(p)
}
