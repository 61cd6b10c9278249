//! Truncated moment sequences and their computation from measure specs.

use std::collections::HashMap;
use std::sync::Arc;

use dashu_int::IBig;
use dashu_ratio::RBig;

use super::catalog::FamilyMoments;
use super::spec::{MeasureKind, MeasureSpec, PolynomialMap};
use crate::arith::Real;
use crate::error::{Error, Result};
use crate::moment_core::PrecisionPolicy;
use crate::multi_index::{MonomialBasis, MultiIndex};
use crate::poly::Polynomial;

/// One moment value.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentValue {
    Exact(RBig),
    Float(Real),
}

impl MomentValue {
    pub fn to_real(&self, bits: usize) -> Real {
        match self {
            MomentValue::Exact(r) => Real::from_rational(r, bits),
            MomentValue::Float(x) => x.with_bits(bits),
        }
    }

    pub fn add(&self, o: &MomentValue, bits: usize) -> MomentValue {
        match (self, o) {
            (MomentValue::Exact(a), MomentValue::Exact(b)) => MomentValue::Exact(a + b),
            _ => MomentValue::Float(self.to_real(bits) + o.to_real(bits)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MomentTable {
    Exact(Vec<RBig>),
    Float(Vec<Real>),
}

impl MomentTable {
    pub fn len(&self) -> usize {
        match self {
            MomentTable::Exact(v) => v.len(),
            MomentTable::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Moments s_α for all |α| ≤ N, stored in graded order.
#[derive(Clone, Debug)]
pub struct MomentSequence {
    basis: Arc<MonomialBasis>,
    pub table: MomentTable,
    pub provenance: String,
}

impl PartialEq for MomentSequence {
    fn eq(&self, o: &Self) -> bool {
        self.dim() == o.dim() && self.max_order() == o.max_order() && self.table == o.table
    }
}

fn basis_cache(dim: usize, n: usize) -> Arc<MonomialBasis> {
    Arc::new(MonomialBasis::new(dim, n))
}

impl MomentSequence {
    fn build(dim: usize, max_order: usize, table: MomentTable, provenance: String) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invariant("dimension must be positive".into()));
        }
        let basis = basis_cache(dim, max_order);
        if basis.len() != table.len() {
            return Err(Error::Invariant(format!(
                "moment table has {} entries, expected {}",
                table.len(),
                basis.len()
            )));
        }
        let s = MomentSequence { basis, table, provenance };
        let s0_positive = match &s.table {
            MomentTable::Exact(v) => v[0] > RBig::ZERO,
            MomentTable::Float(v) => v[0].is_positive(),
        };
        if !s0_positive {
            return Err(Error::Invariant("s_0 must be positive".into()));
        }
        Ok(s)
    }

    /// Exact table in graded order (see [`crate::multi_index::monomials_up_to`]).
    pub fn new_exact(dim: usize, max_order: usize, values: Vec<RBig>, provenance: impl Into<String>) -> Result<Self> {
        Self::build(dim, max_order, MomentTable::Exact(values), provenance.into())
    }

    pub fn new_float(dim: usize, max_order: usize, values: Vec<Real>, provenance: impl Into<String>) -> Result<Self> {
        Self::build(dim, max_order, MomentTable::Float(values), provenance.into())
    }

    /// One-dimensional sequence from a list of values s_0..s_N.
    pub fn from_values_1d(values: Vec<MomentValue>, bits: usize, provenance: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invariant("empty moment list".into()));
        }
        let n = values.len() - 1;
        if values.iter().all(|v| matches!(v, MomentValue::Exact(_))) {
            let v = values
                .into_iter()
                .map(|v| match v {
                    MomentValue::Exact(r) => r,
                    MomentValue::Float(_) => unreachable!(),
                })
                .collect();
            Self::new_exact(1, n, v, provenance)
        } else {
            Self::new_float(1, n, values.iter().map(|v| v.to_real(bits)).collect(), provenance)
        }
    }

    pub fn from_f64_1d(values: &[f64], bits: usize) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::OverflowToInfinity(i));
        }
        Self::new_float(
            1,
            values.len().saturating_sub(1),
            values.iter().map(|&v| Real::from_f64(v, bits)).collect(),
            "supplied",
        )
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn max_order(&self) -> usize {
        self.basis.max_degree
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.table, MomentTable::Exact(_))
    }

    /// Significand width of a float table (0 for exact tables).
    pub fn bits(&self) -> usize {
        match &self.table {
            MomentTable::Exact(_) => 0,
            MomentTable::Float(v) => v.iter().map(|x| x.bits()).max().unwrap_or(0),
        }
    }

    pub fn get(&self, a: &MultiIndex) -> Option<MomentValue> {
        let i = self.basis.index_of(a)?;
        Some(self.at(i))
    }

    pub fn at(&self, i: usize) -> MomentValue {
        match &self.table {
            MomentTable::Exact(v) => MomentValue::Exact(v[i].clone()),
            MomentTable::Float(v) => MomentValue::Float(v[i].clone()),
        }
    }

    pub fn exact(&self, a: &MultiIndex) -> Option<&RBig> {
        match &self.table {
            MomentTable::Exact(v) => self.basis.index_of(a).map(|i| &v[i]),
            MomentTable::Float(_) => None,
        }
    }

    pub fn real(&self, a: &MultiIndex, bits: usize) -> Option<Real> {
        self.get(a).map(|v| v.to_real(bits))
    }

    /// s_n of a one-dimensional sequence.
    pub fn real_1d(&self, n: usize, bits: usize) -> Real {
        self.at(n).to_real(bits)
    }

    pub fn s0(&self) -> MomentValue {
        self.at(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, MomentValue)> + '_ {
        self.basis.list.iter().enumerate().map(|(i, a)| (a, self.at(i)))
    }

    /// Float copy of the table at the given width.
    pub fn to_float(&self, bits: usize) -> MomentSequence {
        let values = (0..self.basis.len()).map(|i| self.at(i).to_real(bits)).collect();
        MomentSequence { basis: self.basis.clone(), table: MomentTable::Float(values), provenance: self.provenance.clone() }
    }

    /// Restriction to orders ≤ n.
    pub fn truncate(&self, n: usize) -> MomentSequence {
        let n = n.min(self.max_order());
        let basis = basis_cache(self.dim(), n);
        let k = basis.len();
        let table = match &self.table {
            MomentTable::Exact(v) => MomentTable::Exact(v[..k].to_vec()),
            MomentTable::Float(v) => MomentTable::Float(v[..k].to_vec()),
        };
        MomentSequence { basis, table, provenance: self.provenance.clone() }
    }

    /// λ·s for a positive rational λ.
    pub fn scaled(&self, lambda: &RBig) -> Result<MomentSequence> {
        if *lambda <= RBig::ZERO {
            return Err(Error::Invariant("scale must be positive".into()));
        }
        let table = match &self.table {
            MomentTable::Exact(v) => MomentTable::Exact(v.iter().map(|x| x * lambda).collect()),
            MomentTable::Float(v) => {
                let bits = self.bits();
                let l = Real::from_rational(lambda, bits);
                MomentTable::Float(v.iter().map(|x| x * &l).collect())
            }
        };
        Ok(MomentSequence { basis: self.basis.clone(), table, provenance: self.provenance.clone() })
    }

    /// s / s_0, so the normalized mass is one.
    pub fn normalized(&self, bits: usize) -> MomentSequence {
        match &self.table {
            MomentTable::Exact(v) => {
                let s0 = v[0].clone();
                MomentSequence {
                    basis: self.basis.clone(),
                    table: MomentTable::Exact(v.iter().map(|x| x / &s0).collect()),
                    provenance: self.provenance.clone(),
                }
            }
            MomentTable::Float(v) => {
                let s0 = v[0].with_bits(bits);
                MomentSequence {
                    basis: self.basis.clone(),
                    table: MomentTable::Float(v.iter().map(|x| x.with_bits(bits) / &s0).collect()),
                    provenance: self.provenance.clone(),
                }
            }
        }
    }
}

fn discrete_moments(dim: usize, atoms: &[super::spec::Atom], n: usize) -> Vec<RBig> {
    let basis = MonomialBasis::new(dim, n);
    let mut out = vec![RBig::ZERO; basis.len()];
    for atom in atoms {
        let pows: Vec<Vec<RBig>> = atom
            .point
            .iter()
            .map(|x| {
                let mut p = vec![RBig::ONE];
                for k in 1..=n {
                    let v = &p[k - 1] * x;
                    p.push(v);
                }
                p
            })
            .collect();
        for (slot, a) in out.iter_mut().zip(&basis.list) {
            let mut t = atom.weight.clone();
            for (j, &e) in a.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &pows[j][e as usize];
                }
            }
            *slot += t;
        }
    }
    out
}

/// s_α for |α| ≤ `max_order`.
pub fn compute_moments(spec: &MeasureSpec, max_order: usize, policy: &PrecisionPolicy) -> Result<MomentSequence> {
    let bits = policy.bits;
    match &spec.kind {
        MeasureKind::Discrete { atoms } => {
            MomentSequence::new_exact(spec.dimension, max_order, discrete_moments(spec.dimension, atoms, max_order), "exact")
        }
        MeasureKind::Catalog(f) => match f.moments(max_order, bits, &policy.quadrature)? {
            FamilyMoments::Exact(v) => MomentSequence::new_exact(1, max_order, v, format!("exact ({})", f.id())),
            FamilyMoments::Float { values, note } => {
                MomentSequence::new_float(1, max_order, values, format!("{}: {note}", f.id()))
            }
        },
        MeasureKind::Product { factors } => {
            let parts = factors
                .iter()
                .map(|f| compute_moments(f, max_order, policy))
                .collect::<Result<Vec<_>>>()?;
            let exact = parts.iter().all(|p| p.is_exact());
            let basis = MonomialBasis::new(spec.dimension, max_order);
            let mut offsets = Vec::new();
            let mut off = 0;
            for p in &parts {
                offsets.push(off);
                off += p.dim();
            }
            let note = format!(
                "product of [{}]{}",
                parts.iter().map(|p| p.provenance.as_str()).collect::<Vec<_>>().join("; "),
                if exact || parts.iter().all(|p| !p.is_exact()) { "" } else { "; exact factors demoted to float" }
            );
            let slice = |a: &MultiIndex, k: usize| MultiIndex(a.0[offsets[k]..offsets[k] + parts[k].dim()].to_vec());
            if exact {
                let v = basis
                    .list
                    .iter()
                    .map(|a| {
                        parts.iter().enumerate().fold(RBig::ONE, |acc, (k, p)| {
                            acc * p.exact(&slice(a, k)).expect("order within table")
                        })
                    })
                    .collect();
                MomentSequence::new_exact(spec.dimension, max_order, v, note)
            } else {
                let v = basis
                    .list
                    .iter()
                    .map(|a| {
                        parts.iter().enumerate().fold(Real::one(bits), |acc, (k, p)| {
                            acc * p.real(&slice(a, k), bits).expect("order within table")
                        })
                    })
                    .collect();
                MomentSequence::new_float(spec.dimension, max_order, v, note)
            }
        }
        MeasureKind::Pushforward { base, map } => {
            let need = max_order
                .checked_mul(map.max_degree().max(1))
                .ok_or(Error::DegreeOverflow { needed: usize::MAX, available: 0 })?;
            let s = compute_moments(base, need, policy)?;
            pushforward_moments(&s, map, max_order)
        }
    }
}

/// The j-th marginal (0-based axis) as a one-dimensional sequence.
pub fn marginal(s: &MomentSequence, axis: usize) -> Result<MomentSequence> {
    if axis >= s.dim() {
        return Err(Error::AxisOutOfRange { axis, dim: s.dim() });
    }
    let d = s.dim();
    let values = (0..=s.max_order())
        .map(|n| s.get(&MultiIndex::unit(d, axis, n as u32)).expect("within order"))
        .collect();
    MomentSequence::from_values_1d(values, s.bits().max(64), format!("marginal {} of {}", axis + 1, s.provenance))
}

/// L_s applied to an exact polynomial.
pub fn apply_rational(s: &MomentSequence, p: &Polynomial<RBig>) -> Result<MomentValue> {
    if p.degree() > s.max_order() {
        return Err(Error::DegreeOverflow { needed: p.degree(), available: s.max_order() });
    }
    match &s.table {
        MomentTable::Exact(_) => {
            let mut acc = RBig::ZERO;
            for (a, c) in &p.terms {
                acc += c * s.exact(a).expect("within order");
            }
            Ok(MomentValue::Exact(acc))
        }
        MomentTable::Float(_) => {
            let bits = s.bits();
            let mut acc = Real::zero(bits);
            for (a, c) in &p.terms {
                let v = s.real(a, bits).expect("within order");
                acc = if *c == RBig::ONE { acc + v } else { acc + Real::from_rational(c, bits) * v };
            }
            Ok(MomentValue::Float(acc))
        }
    }
}

/// Moments t_β = L_s(φ^β) of the image measure, |β| ≤ `max_order`.
pub fn pushforward_moments(s: &MomentSequence, map: &PolynomialMap, max_order: usize) -> Result<MomentSequence> {
    if map.source_dim != s.dim() {
        return Err(Error::Dimension(format!("map source {} vs sequence {}", map.source_dim, s.dim())));
    }
    let m = map.target_dim();
    let degs: Vec<usize> = map.components.iter().map(|c| c.degree()).collect();
    let basis = MonomialBasis::new(m, max_order);
    // Bound before expanding anything.
    let worst = basis
        .list
        .iter()
        .map(|b| b.0.iter().zip(&degs).map(|(&e, &g)| e as usize * g).sum::<usize>())
        .max()
        .unwrap_or(0);
    if worst > s.max_order() {
        // The bound may be loose when cancellation lowers degrees; expand to
        // find the true requirement.
        let mut needed = 0;
        let mut cache = HashMap::new();
        for b in &basis.list {
            needed = needed.max(power_of_map(map, b, &mut cache).degree());
            if needed > s.max_order() {
                return Err(Error::DegreeOverflow { needed, available: s.max_order() });
            }
        }
    }
    let mut cache: HashMap<MultiIndex, Polynomial<RBig>> = HashMap::new();
    let mut values = Vec::with_capacity(basis.len());
    for b in &basis.list {
        let p = power_of_map(map, b, &mut cache);
        values.push(apply_rational(s, &p)?);
    }
    let prov = format!("pushforward of {}", s.provenance);
    let bits = s.bits().max(64);
    if s.is_exact() {
        let v = values
            .into_iter()
            .map(|v| match v {
                MomentValue::Exact(r) => r,
                MomentValue::Float(_) => unreachable!(),
            })
            .collect();
        MomentSequence::new_exact(m, max_order, v, prov)
    } else {
        MomentSequence::new_float(m, max_order, values.iter().map(|v| v.to_real(bits)).collect(), prov)
    }
}

/// φ^β = φ₁^β₁ ⋯ φ_m^β_m, memoized on β.
fn power_of_map(
    map: &PolynomialMap,
    b: &MultiIndex,
    cache: &mut HashMap<MultiIndex, Polynomial<RBig>>,
) -> Polynomial<RBig> {
    if let Some(p) = cache.get(b) {
        return p.clone();
    }
    let p = match b.0.iter().position(|&e| e > 0) {
        None => Polynomial::constant(map.source_dim, RBig::ONE),
        Some(j) => {
            let mut prev = b.clone();
            prev.0[j] -= 1;
            power_of_map(map, &prev, cache).mul(&map.components[j])
        }
    };
    cache.insert(b.clone(), p.clone());
    p
}

/// Convenience for tests and fixtures: exact rational from an integer.
pub fn rat(n: i64) -> RBig {
    RBig::from(IBig::from(n))
}
