//! Laplace, Fantappiè and Cauchy transforms of measure specifications,
//! finite-difference complete-monotonicity checks and the iterated Poisson
//! recursion.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::Real;
use crate::error::{Error, Result};
use crate::measures::{CatalogFamily, MeasureKind, MeasureSpec, MomentSequence, PolynomialMap};
use crate::moment_core::PrecisionPolicy;
use crate::multi_index::{monomials_of_degree, MultiIndex};
use crate::quadrature::{integrate, integrate_infinite, integrate_semi_infinite, QuadOptions};

/// A transform value with an absolute error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

impl Estimate {
    fn exact(value: Complex64) -> Self {
        Estimate { value, error: 0.0 }
    }

    fn mul(self, o: Estimate) -> Estimate {
        Estimate { value: self.value * o.value, error: self.error * o.value.norm() + o.error * self.value.norm() + self.error * o.error }
    }
}

fn rat_f64(r: &dashu_ratio::RBig) -> f64 {
    r.to_f64().value()
}

fn eval_map(map: &PolynomialMap, x: &[f64]) -> Vec<f64> {
    map.components
        .iter()
        .map(|c| {
            c.terms
                .iter()
                .map(|(a, k)| rat_f64(k) * a.0.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>())
                .sum()
        })
        .collect()
}

fn integrate_family(fam: &CatalogFamily, g: &mut dyn FnMut(f64) -> f64, opts: &QuadOptions) -> Result<(f64, f64)> {
    let mut h = |x: f64| {
        let d = fam.density(x);
        if d == 0.0 {
            0.0
        } else {
            d * g(x)
        }
    };
    let (lo, hi) = fam.support();
    let r = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => integrate(h, lo, hi, opts)?,
        (true, false) => integrate_semi_infinite(h, lo, opts)?,
        _ => integrate_infinite(&mut h, opts)?,
    };
    Ok((r.value, r.error))
}

/// ∫ g dμ over a catalog density, real and imaginary parts separately.
fn expect_family(fam: &CatalogFamily, g: &dyn Fn(f64) -> Result<Complex64>, opts: &QuadOptions) -> Result<Estimate> {
    let failure = RefCell::new(None);
    let part = |im: bool| {
        integrate_family(
            fam,
            &mut |x| match g(x) {
                Ok(v) => {
                    if im {
                        v.im
                    } else {
                        v.re
                    }
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            opts,
        )
    };
    let (re, er) = part(false)?;
    let (im, ei) = part(true)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Estimate { value: Complex64::new(re, im), error: er.hypot(ei) })
}

/// ∫ g dμ for any specification, by exact sums over atoms and nested
/// adaptive quadrature over densities.
pub fn expectation(spec: &MeasureSpec, g: &dyn Fn(&[f64]) -> Result<Complex64>, opts: &QuadOptions) -> Result<Estimate> {
    match &spec.kind {
        MeasureKind::Discrete { atoms } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in atoms {
                let x: Vec<f64> = a.point.iter().map(rat_f64).collect();
                acc += g(&x)? * rat_f64(&a.weight);
            }
            Ok(Estimate::exact(acc))
        }
        MeasureKind::Catalog(fam) => expect_family(fam, &|x| g(&[x]), opts),
        MeasureKind::Product { factors } => expect_product(factors, &[], g, opts),
        MeasureKind::Pushforward { base, map } => expectation(base, &|x| g(&eval_map(map, x)), opts),
    }
}

fn expect_product(
    factors: &[MeasureSpec],
    prefix: &[f64],
    g: &dyn Fn(&[f64]) -> Result<Complex64>,
    opts: &QuadOptions,
) -> Result<Estimate> {
    let Some((first, rest)) = factors.split_first() else {
        return g(prefix).map(Estimate::exact);
    };
    let err = RefCell::new(0f64);
    let inner = |x: &[f64]| -> Result<Complex64> {
        let mut p = prefix.to_vec();
        p.extend_from_slice(x);
        let e = expect_product(rest, &p, g, opts)?;
        *err.borrow_mut() += 0.0f64.max(e.error);
        Ok(e.value)
    };
    let mut out = expectation(first, &inner, opts)?;
    // Inner errors are absolute per evaluation and bounded by the largest.
    out.error += err.into_inner().min(out.value.norm().max(1.0) * opts.abs_tol.max(opts.rel_tol));
    Ok(out)
}

/// ∫ Π_i g_i(x_i) dμ, factorizing over product components.
fn expect_separable(spec: &MeasureSpec, offset: usize, g: &dyn Fn(usize, f64) -> Complex64, opts: &QuadOptions) -> Result<Estimate> {
    match &spec.kind {
        MeasureKind::Product { factors } => {
            let mut acc = Estimate::exact(Complex64::new(1.0, 0.0));
            let mut off = offset;
            for f in factors {
                acc = acc.mul(expect_separable(f, off, g, opts)?);
                off += f.dimension;
            }
            Ok(acc)
        }
        _ => expectation(spec, &|x| Ok(x.iter().enumerate().map(|(i, &v)| g(offset + i, v)).product()), opts),
    }
}

/// Whether the support provably lies in the closed positive orthant.
pub fn nonnegative_support(spec: &MeasureSpec) -> Option<bool> {
    match &spec.kind {
        MeasureKind::Discrete { atoms } => Some(atoms.iter().all(|a| a.point.iter().all(|x| x.sign() != dashu_base::Sign::Negative))),
        MeasureKind::Catalog(fam) => Some(fam.support().0 >= 0.0),
        MeasureKind::Product { factors } => {
            let mut all = true;
            for f in factors {
                all &= nonnegative_support(f)?;
            }
            Some(all)
        }
        MeasureKind::Pushforward { .. } => spec.atoms().map(|atoms| {
            atoms.iter().all(|a| a.point.iter().all(|x| x.sign() != dashu_base::Sign::Negative))
        }),
    }
}

fn require_orthant(spec: &MeasureSpec) -> Result<()> {
    match nonnegative_support(spec) {
        Some(true) => Ok(()),
        Some(false) => Err(Error::Domain("support is not contained in the positive orthant".into())),
        None => Err(Error::Domain("support of this pushforward cannot be checked".into())),
    }
}

fn check_dim(spec: &MeasureSpec, n: usize) -> Result<()> {
    if spec.dimension != n {
        return Err(Error::Dimension(format!("point has {n} coordinates, measure has {}", spec.dimension)));
    }
    Ok(())
}

/// μ̃(z) = ∫ e^{−t·z} dμ(t) on the orthant, for Re z_i > 0.
pub fn laplace_eval(spec: &MeasureSpec, z: &[Complex64], opts: &QuadOptions) -> Result<Estimate> {
    check_dim(spec, z.len())?;
    require_orthant(spec)?;
    if z.iter().any(|w| !(w.re > 0.0)) {
        return Err(Error::Domain("Laplace transform needs Re z > 0".into()));
    }
    laplace_inner(spec, 0, z, opts)
}

fn laplace_inner(spec: &MeasureSpec, offset: usize, z: &[Complex64], opts: &QuadOptions) -> Result<Estimate> {
    match &spec.kind {
        MeasureKind::Catalog(CatalogFamily::Exponential { lambda }) => {
            let l = rat_f64(lambda);
            Ok(Estimate::exact(l / (z[offset] + l)))
        }
        MeasureKind::Catalog(CatalogFamily::Uniform { a, b }) => {
            let (a, b, w) = (rat_f64(a), rat_f64(b), z[offset]);
            Ok(Estimate::exact(((-a * w).exp() - (-b * w).exp()) / ((b - a) * w)))
        }
        MeasureKind::Product { factors } => {
            let mut acc = Estimate::exact(Complex64::new(1.0, 0.0));
            let mut off = offset;
            for f in factors {
                acc = acc.mul(laplace_inner(f, off, z, opts)?);
                off += f.dimension;
            }
            Ok(acc)
        }
        _ => expect_separable(spec, offset, &|i, x| (-x * z[i]).exp(), opts),
    }
}

/// 𝒞μ(z) = ∫ dμ(x)/Π(x_i − z_i), for Im z_i ≠ 0.
pub fn cauchy_eval(spec: &MeasureSpec, z: &[Complex64], opts: &QuadOptions) -> Result<Estimate> {
    check_dim(spec, z.len())?;
    if z.iter().any(|w| w.im == 0.0 || !w.im.is_finite()) {
        return Err(Error::Domain("Cauchy transform needs Im z_i != 0".into()));
    }
    expect_separable(spec, 0, &|i, x| 1.0 / (x - z[i]), opts)
}

/// ℱ(μ)(p₀, p) = ∫ dμ(x)/(p₀ + p·x) with p₀ > 0 and p in the orthant.
pub fn fantappie_eval(spec: &MeasureSpec, p0: f64, p: &[f64], opts: &QuadOptions) -> Result<Estimate> {
    check_dim(spec, p.len())?;
    require_orthant(spec)?;
    if !(p0 > 0.0) || p.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::Domain("Fantappiè transform needs p0 > 0 and p >= 0".into()));
    }
    expectation(
        spec,
        &|x| Ok(Complex64::new(1.0 / (p0 + p.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()), 0.0)),
        opts,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FantappieSeries {
    pub order: usize,
    pub value: f64,
    /// |first omitted group|, which bounds the truncation error for
    /// measures on the orthant.
    pub first_omitted: f64,
}

/// Σ_{|α|≤K} (−1)^{|α|} (|α| α) p^α s_α / p₀^{|α|+1}.
pub fn fantappie_series(s: &MomentSequence, p0: f64, p: &[f64], k: usize, policy: &PrecisionPolicy) -> Result<FantappieSeries> {
    let d = s.dim();
    if p.len() != d {
        return Err(Error::Dimension(format!("p has {} entries, sequence has dimension {d}", p.len())));
    }
    if !(p0 > 0.0) {
        return Err(Error::Domain("p0 must be positive".into()));
    }
    if k + 1 > s.max_order() {
        return Err(Error::DegreeOverflow { needed: k + 1, available: s.max_order() });
    }
    let bits = policy.bits;
    let pr: Vec<Real> = p.iter().map(|&x| Real::from_f64(x, bits)).collect();
    let inv = Real::from_f64(p0, bits).recip();
    let group = |n: usize| -> Real {
        let mut acc = Real::zero(bits);
        for a in monomials_of_degree(d, n) {
            let mut term = Real::from_int(&multinomial(&a), bits) * s.real(&a, bits).expect("within order");
            for (e, x) in a.0.iter().zip(&pr) {
                term = term * x.powi(*e as i64);
            }
            acc = acc + term;
        }
        acc * inv.powi(n as i64 + 1)
    };
    let mut value = Real::zero(bits);
    for n in 0..=k {
        let g = group(n);
        value = if n % 2 == 0 { value + g } else { value - g };
    }
    Ok(FantappieSeries { order: k, value: value.to_f64(), first_omitted: group(k + 1).abs().to_f64() })
}

fn multinomial(a: &MultiIndex) -> dashu_int::IBig {
    let mut acc = dashu_int::IBig::ONE;
    let mut total = 0u64;
    for &e in &a.0 {
        for i in 1..=e as u64 {
            total += 1;
            acc = acc * dashu_int::IBig::from(total) / dashu_int::IBig::from(i);
        }
    }
    acc
}

/// Applies f₁ = (F(z) − F(z with z_d conjugated))/(2i) and then
/// f_{k+1} = (f_k(z) − f_k(z with z_k conjugated))/(2i) for k = 1..d−1.
pub fn poisson_recursion(f: &dyn Fn(&[Complex64]) -> Result<Complex64>, z: &[Complex64]) -> Result<Complex64> {
    let d = z.len();
    if d == 0 {
        return Err(Error::Dimension("empty point".into()));
    }
    if z.iter().any(|w| !(w.im > 0.0)) {
        return Err(Error::Domain("Poisson recursion needs Im z_i > 0".into()));
    }
    let mut order = vec![d - 1];
    order.extend(0..d - 1);
    fn level(f: &dyn Fn(&[Complex64]) -> Result<Complex64>, order: &[usize], z: &mut Vec<Complex64>, k: usize) -> Result<Complex64> {
        if k == 0 {
            return f(z);
        }
        let idx = order[k - 1];
        let a = level(f, order, z, k - 1)?;
        z[idx] = z[idx].conj();
        let b = level(f, order, z, k - 1);
        z[idx] = z[idx].conj();
        Ok((a - b?) / Complex64::new(0.0, 2.0))
    }
    level(f, &order, &mut z.to_vec(), d)
}

/// Σ_j w_j Π_i y_i/((x_i − s_{ji})² + y_i²) over the atoms of a discrete
/// specification.
pub fn poisson_direct(spec: &MeasureSpec, z: &[Complex64]) -> Result<f64> {
    check_dim(spec, z.len())?;
    let atoms = spec.atoms().ok_or_else(|| Error::Domain("direct Poisson sums need a discrete measure".into()))?;
    Ok(atoms
        .iter()
        .map(|a| {
            rat_f64(&a.weight)
                * a.point
                    .iter()
                    .zip(z)
                    .map(|(s, w)| {
                        let dx = w.re - rat_f64(s);
                        w.im / (dx * dx + w.im * w.im)
                    })
                    .product::<f64>()
        })
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
    /// Largest total difference order |α| checked.
    pub order: usize,
}

impl GridSpec {
    pub fn uniform(d: usize, lo: f64, hi: f64, steps: usize, order: usize) -> Self {
        GridSpec { axes: vec![GridAxis { lo, hi, steps }; d], order }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::Schema("grid needs at least one axis".into()));
        }
        for a in &self.axes {
            if a.steps == 0 || !(a.lo < a.hi) || !a.lo.is_finite() || !a.hi.is_finite() {
                return Err(Error::Schema(format!("invalid grid axis {a:?}")));
            }
        }
        Ok(())
    }

    fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.steps + 1).collect()
    }

    fn coord(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.lo + (a.hi - a.lo) * i as f64 / a.steps as f64)
            .collect()
    }

    /// Grid points in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        multi_range(&self.shape()).iter().map(|i| self.coord(i)).collect()
    }
}

fn multi_range(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in shape {
        out = out.into_iter().flat_map(|p| (0..n).map(move |i| [p.clone(), vec![i]].concat())).collect();
    }
    out
}

fn flat(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: Vec<f64>,
    pub alpha: Vec<u32>,
    /// (−1)^{|α|} Δ^α F, which should be nonnegative.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub checked: usize,
    pub violation_count: usize,
    /// At most `MAX_LISTED` violations, in grid order.
    pub violations: Vec<Violation>,
    /// Grid values of F in row-major order.
    pub values: Vec<f64>,
    /// Per grid point, whether a difference based there failed.
    pub flagged: Vec<bool>,
}

pub const MAX_LISTED: usize = 1000;
/// Relative slack for the sign test, times the largest |F| in the stencil.
pub const CM_TOLERANCE: f64 = 1e-10;

/// Checks (−1)^{|α|} Δ^α F ≥ 0 for forward differences of every order
/// 1 ≤ |α| ≤ grid.order whose stencil fits in the grid.
pub fn complete_monotonicity_check(f: &dyn Fn(&[f64]) -> Result<f64>, grid: &GridSpec) -> Result<MonotonicityReport> {
    grid.validate()?;
    let values = grid.points().iter().map(|x| f(x)).collect::<Result<Vec<f64>>>()?;
    monotonicity_of_values(values, grid)
}

/// Same check on values already sampled at `grid.points()`.
pub fn monotonicity_of_values(values: Vec<f64>, grid: &GridSpec) -> Result<MonotonicityReport> {
    grid.validate()?;
    let shape = grid.shape();
    let d = shape.len();
    let points = multi_range(&shape);
    if values.len() != points.len() {
        return Err(Error::Dimension(format!("{} values for {} grid points", values.len(), points.len())));
    }
    let mut report = MonotonicityReport { checked: 0, violation_count: 0, violations: vec![], values: vec![], flagged: vec![false; points.len()] };
    for n in 1..=grid.order {
        for alpha in monomials_of_degree(d, n) {
            let offsets = multi_range(&alpha.0.iter().map(|&e| e as usize + 1).collect::<Vec<_>>());
            for base in &points {
                if base.iter().zip(&alpha.0).zip(&shape).any(|((&b, &e), &s)| b + e as usize >= s) {
                    continue;
                }
                let mut acc = 0.0;
                let mut scale = 0f64;
                for off in &offsets {
                    // Δ^α F(x) = Σ_β (−1)^{|α|−|β|} (α β) F(x + βh).
                    let coef: f64 = off
                        .iter()
                        .zip(&alpha.0)
                        .map(|(&b, &e)| binom(e as usize, b) as f64)
                        .product();
                    let sign = if (n - off.iter().sum::<usize>()) % 2 == 0 { 1.0 } else { -1.0 };
                    let idx: Vec<usize> = base.iter().zip(off).map(|(a, b)| a + b).collect();
                    let v = values[flat(&shape, &idx)];
                    scale = scale.max(v.abs());
                    acc += sign * coef * v;
                }
                let signed = if n % 2 == 0 { acc } else { -acc };
                report.checked += 1;
                if signed < -CM_TOLERANCE * scale || !signed.is_finite() {
                    report.violation_count += 1;
                    report.flagged[flat(&shape, base)] = true;
                    if report.violations.len() < MAX_LISTED {
                        report.violations.push(Violation { point: grid.coord(base), alpha: alpha.0.clone(), value: signed });
                    }
                }
            }
        }
    }
    report.values = values;
    Ok(report)
}

fn binom(n: usize, k: usize) -> u64 {
    crate::multi_index::binomial(n, k) as u64
}

/// Complete-monotonicity check of the real Laplace transform of a measure.
pub fn laplace_monotonicity(spec: &MeasureSpec, grid: &GridSpec, opts: &QuadOptions) -> Result<MonotonicityReport> {
    if grid.axes.len() != spec.dimension {
        return Err(Error::Dimension("grid and measure dimensions differ".into()));
    }
    complete_monotonicity_check(
        &|x| {
            let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            laplace_eval(spec, &z, opts).map(|e| e.value.re)
        },
        grid,
    )
}
