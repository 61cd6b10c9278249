//! Jacobi recurrence coefficients and orthonormal polynomials of the first
//! and second kind for one-dimensional moment sequences.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::arith::{Complex, Real};
use crate::error::{Error, Result};
use crate::measures::{MomentSequence, MomentTable};
use crate::moment_core::linalg::ldl_exact;
use crate::moment_core::PrecisionPolicy;
use crate::multi_index::MultiIndex;

/// Three-term recurrence zP_k = b_{k−1}P_{k−1} + c_k P_k + b_k P_{k+1}.
#[derive(Clone, Debug)]
pub struct RecurrenceData {
    /// Largest k for which P_k is available.
    pub k_max: usize,
    /// b_0..b_{k_max}; one entry shorter when the support is exhausted.
    pub b: Vec<Real>,
    /// c_0..c_{k_max}.
    pub c: Vec<Real>,
    pub s0: Real,
    /// Set when the Hankel matrix became singular before the requested K,
    /// i.e. the measure has exactly k_max + 1 support points.
    pub rank_deficient: bool,
    pub fingerprint: String,
    pub bits: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceSummary {
    pub k_max: usize,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub rank_deficient: bool,
}

impl RecurrenceData {
    pub fn summary(&self) -> RecurrenceSummary {
        RecurrenceSummary {
            k_max: self.k_max,
            b: self.b.iter().map(|x| x.to_f64()).collect(),
            c: self.c.iter().map(|x| x.to_f64()).collect(),
            rank_deficient: self.rank_deficient,
        }
    }
}

/// SHA-256 over the decimal rendering of a 1D table.
pub fn fingerprint(s: &MomentSequence) -> String {
    let mut h = Sha256::new();
    h.update(format!("d={};N={};", s.dim(), s.max_order()));
    for (_, v) in s.entries() {
        match v {
            crate::measures::MomentValue::Exact(r) => h.update(format!("{}/{};", r.numerator(), r.denominator())),
            crate::measures::MomentValue::Float(x) => h.update(format!("{};", x.to_decimal_string())),
        }
    }
    format!("{:x}", h.finalize())
}

/// Upper Cholesky factor rows R[i][j] (j ≥ i) of the Hankel matrix of
/// size `m`. Stops at the first pivot that is zero at working precision and
/// reports its index; for exact tables the singularity is confirmed exactly,
/// otherwise a vanishing pivot of an exact table means precision ran out.
fn hankel_cholesky(s: &MomentSequence, m: usize, bits: usize) -> Result<(Vec<Vec<Real>>, Option<usize>)> {
    let h = |i: usize, j: usize| s.real_1d(i + j, bits);
    let noise = Real::pow2(-(bits as i64) + 32, bits);
    let mut r: Vec<Vec<Real>> = Vec::with_capacity(m);
    for i in 0..m {
        let hii = h(i, i);
        if hii.is_negative() {
            return Err(Error::NonPositiveEvenMoment(2 * i));
        }
        let mut d = hii.clone();
        for row in r.iter() {
            d = d - &row[i] * &row[i];
        }
        let floor = &hii * &noise * Real::from_i64(i as i64 + 1, bits);
        if d <= floor {
            let singular = match &s.table {
                MomentTable::Exact(_) => exact_leading_singular(s, i + 1),
                MomentTable::Float(_) => d >= -floor,
            };
            if singular {
                return Ok((r, Some(i)));
            }
            return Err(Error::IllConditioned(format!(
                "Hankel pivot {i} lost at {bits} bits; raise the precision"
            )));
        }
        let rii = d.sqrt();
        let mut row = vec![Real::zero(bits); m];
        for j in i + 1..m {
            let mut v = h(i, j);
            for prev in r.iter() {
                v = v - &prev[i] * &prev[j];
            }
            row[j] = v / &rii;
        }
        row[i] = rii;
        r.push(row);
    }
    Ok((r, None))
}

/// Whether the leading `size`×`size` Hankel block of an exact table is
/// singular.
fn exact_leading_singular(s: &MomentSequence, size: usize) -> bool {
    let Some(block) = (0..size)
        .map(|i| (0..size).map(|j| s.exact(&MultiIndex(vec![(i + j) as u32])).cloned()).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
    else {
        return false;
    };
    let (pivots, _, _) = ldl_exact(&block);
    pivots.len() < size
}

/// Jacobi coefficients up to index K from the Cholesky factor of the
/// Hankel matrix of size K+2.
pub fn recurrence_coefficients(s: &MomentSequence, k: usize, policy: &PrecisionPolicy) -> Result<RecurrenceData> {
    if s.dim() != 1 {
        return Err(Error::Dimension("recurrence needs a one-dimensional sequence".into()));
    }
    let need = 2 * (k + 1);
    if need > s.max_order() {
        return Err(Error::DegreeOverflow { needed: need, available: s.max_order() });
    }
    let bits = policy.bits;
    let (r, fail) = hankel_cholesky(s, k + 2, bits)?;
    let s0 = s.real_1d(0, bits);
    let rows = r.len();
    // With j successful pivots the support has j points (if it stopped).
    let (k_max, nb) = match fail {
        None => (k, k + 1),
        Some(j) => {
            if j == 0 {
                return Err(Error::Invariant("s_0 must be positive".into()));
            }
            (j - 1, j - 1)
        }
    };
    let mut b = Vec::with_capacity(nb);
    let mut c = Vec::with_capacity(k_max + 1);
    for i in 0..=k_max {
        let cur = &r[i][i + 1] / &r[i][i];
        let ci = if i == 0 { cur } else { cur - &r[i - 1][i] / &r[i - 1][i - 1] };
        c.push(ci);
        if i < nb && i + 1 < rows {
            b.push(&r[i + 1][i + 1] / &r[i][i]);
        }
    }
    Ok(RecurrenceData {
        k_max,
        b,
        c,
        s0,
        rank_deficient: fail.is_some(),
        fingerprint: fingerprint(s),
        bits,
    })
}

/// Monomial coefficients of P_0..P_K as columns of R⁻¹; independent of the
/// recurrence and used to cross-check it.
pub fn orthonormal_coefficients(s: &MomentSequence, k: usize, policy: &PrecisionPolicy) -> Result<Vec<Vec<Real>>> {
    if 2 * k > s.max_order() {
        return Err(Error::DegreeOverflow { needed: 2 * k, available: s.max_order() });
    }
    let bits = policy.bits;
    let (r, fail) = hankel_cholesky(s, k + 1, bits)?;
    if let Some(j) = fail {
        return Err(Error::RankDeficient { support_points: j });
    }
    let n = k + 1;
    // Solve R X = I column by column (upper triangular back substitution).
    let mut cols = Vec::with_capacity(n);
    for col in 0..n {
        let mut x = vec![Real::zero(bits); col + 1];
        for i in (0..=col).rev() {
            let mut v = if i == col { Real::one(bits) } else { Real::zero(bits) };
            for (j, xj) in x.iter().enumerate().take(col + 1).skip(i + 1) {
                v = v - &r[i][j] * xj;
            }
            x[i] = v / &r[i][i];
        }
        cols.push(x);
    }
    Ok(cols)
}

fn check_index(r: &RecurrenceData, k: usize) -> Result<()> {
    if k > r.k_max + usize::from(r.b.len() > r.k_max) {
        return Err(Error::IndexOverflow { index: k, available: r.k_max });
    }
    Ok(())
}

/// P_0(z)..P_n(z) by forward recurrence.
pub fn eval_p_all(r: &RecurrenceData, n: usize, z: &Complex) -> Result<Vec<Complex>> {
    check_index(r, n)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(Complex::from_real(r.s0.sqrt().recip()));
    three_term(r, n, z, &mut out);
    Ok(out)
}

fn three_term(r: &RecurrenceData, n: usize, z: &Complex, out: &mut Vec<Complex>) {
    for k in out.len() - 1..n {
        let zc = Complex::new(&z.re - &r.c[k], z.im.clone());
        let mut v = &zc * &out[k];
        if k >= 1 {
            v = &v - &out[k - 1].scale(&r.b[k - 1]);
        }
        out.push(v.scale(&r.b[k].recip()));
    }
}

pub fn eval_p(r: &RecurrenceData, k: usize, z: &Complex) -> Result<Complex> {
    Ok(eval_p_all(r, k, z)?.pop().expect("nonempty"))
}

/// Q_0(z)..Q_n(z) by the shifted recurrence Q_0 = 0, Q_1 = √s₀ / b₀.
pub fn eval_q_all(r: &RecurrenceData, n: usize, z: &Complex) -> Result<Vec<Complex>> {
    check_index(r, n)?;
    let bits = r.bits;
    let mut out = vec![Complex::zero(bits)];
    if n == 0 {
        return Ok(out);
    }
    out.push(Complex::from_real(r.s0.sqrt() / &r.b[0]));
    three_term(r, n, z, &mut out);
    Ok(out)
}

pub fn eval_q(r: &RecurrenceData, k: usize, z: &Complex) -> Result<Complex> {
    Ok(eval_q_all(r, k, z)?.pop().expect("nonempty"))
}

/// Monomial coefficients of P_0..P_n obtained from the recurrence.
pub fn p_coefficients(r: &RecurrenceData, n: usize) -> Result<Vec<Vec<Real>>> {
    check_index(r, n)?;
    let bits = r.bits;
    let mut polys: Vec<Vec<Real>> = vec![vec![r.s0.sqrt().recip()]];
    for k in 0..n {
        let mut next = vec![Real::zero(bits); k + 2];
        for (i, a) in polys[k].iter().enumerate() {
            next[i + 1] = &next[i + 1] + a;
            next[i] = &next[i] - &(&r.c[k] * a);
        }
        if k >= 1 {
            for (i, a) in polys[k - 1].iter().enumerate() {
                next[i] = &next[i] - &(&r.b[k - 1] * a);
            }
        }
        let binv = r.b[k].recip();
        polys.push(next.into_iter().map(|x| x * &binv).collect());
    }
    Ok(polys)
}

/// Q_k(z) = L_u[(P_k(z) − P_k(u))/(z − u)], expanding the divided difference
/// (z^j − u^j)/(z − u) = Σ_{m<j} z^{j−1−m} u^m and applying the functional.
pub fn eval_q_expansion(s: &MomentSequence, r: &RecurrenceData, k: usize, z: &Complex) -> Result<Complex> {
    if k > s.max_order() + 1 {
        return Err(Error::IndexOverflow { index: k, available: s.max_order() + 1 });
    }
    let bits = r.bits;
    let a = p_coefficients(r, k)?.pop().expect("nonempty");
    // zpow[i] = z^i
    let mut zpow = vec![Complex::one(bits)];
    for i in 1..=k {
        let v = &zpow[i - 1] * z;
        zpow.push(v);
    }
    let mut acc = Complex::zero(bits);
    for (j, aj) in a.iter().enumerate().skip(1) {
        let mut inner = Complex::zero(bits);
        for m in 0..j {
            inner = &inner + &zpow[j - 1 - m].scale(&s.real_1d(m, bits));
        }
        acc = &acc + &inner.scale(aj);
    }
    Ok(acc)
}

/// Σ_{k≤n} |P_k(z)|².
pub fn christoffel_sum(r: &RecurrenceData, z: &Complex, n: usize) -> Result<Real> {
    let p = eval_p_all(r, n, z)?;
    Ok(p.iter().fold(Real::zero(r.bits), |acc, v| acc + v.norm_sqr()))
}

/// Running sums Σ_{k≤n} |P_k(z)|² for n = 0..=n_max.
pub fn christoffel_sums(r: &RecurrenceData, z: &Complex, n_max: usize) -> Result<Vec<Real>> {
    let p = eval_p_all(r, n_max, z)?;
    let mut acc = Real::zero(r.bits);
    Ok(p.iter()
        .map(|v| {
            acc = &acc + &v.norm_sqr();
            acc.clone()
        })
        .collect())
}
