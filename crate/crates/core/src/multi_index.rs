//! Multi-indices and graded monomial enumeration.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Exponent vector α ∈ ℕ₀ᵈ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn unit(d: usize, axis: usize, n: u32) -> Self {
        let mut v = vec![0; d];
        v[axis] = n;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| a * k).collect())
    }
}

/// Graded order: total degree first, then lexicographically descending so
/// that `x1` precedes `x2` within a degree.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All α ∈ ℕ₀ᵈ with |α| = k in graded order.
pub fn monomials_of_degree(d: usize, k: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(pos: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        let d = cur.len();
        if pos + 1 == d {
            cur[pos] = left as u32;
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e as u32;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    if d == 0 {
        if k == 0 {
            out.push(MultiIndex(vec![]));
        }
        return out;
    }
    rec(0, k, &mut cur, &mut out);
    out
}

/// All α with |α| ≤ n in graded order; length C(n+d, d).
pub fn monomials_up_to(d: usize, n: usize) -> Vec<MultiIndex> {
    (0..=n).flat_map(|k| monomials_of_degree(d, k)).collect()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Position lookup for the graded basis of degree ≤ n.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub dim: usize,
    pub max_degree: usize,
    pub list: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl MonomialBasis {
    pub fn new(dim: usize, max_degree: usize) -> Self {
        let list = monomials_up_to(dim, max_degree);
        let lookup = list.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        MonomialBasis { dim, max_degree, list, lookup }
    }

    /// `None` when the basis would hold more than `cap` monomials.
    pub fn try_new(dim: usize, max_degree: usize, cap: usize) -> Option<Self> {
        let mut count: u128 = 1;
        for i in 0..dim {
            count = count * (max_degree + i + 1) as u128 / (i + 1) as u128;
            if count > cap as u128 {
                return None;
            }
        }
        Some(Self::new(dim, max_degree))
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn index_of(&self, a: &MultiIndex) -> Option<usize> {
        self.lookup.get(a).copied()
    }
}
