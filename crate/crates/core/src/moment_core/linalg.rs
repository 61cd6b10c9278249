//! Dense symmetric factorizations in arbitrary precision.

use dashu_ratio::RBig;

use crate::arith::Real;

/// Outcome of a diagonally pivoted LDLᵀ elimination.
#[derive(Clone, Debug)]
pub struct Elimination {
    /// Pivots in elimination order.
    pub pivots: Vec<Real>,
    /// Original row index of each pivot.
    pub order: Vec<usize>,
    /// Diagonal of the block left when elimination stopped.
    pub residual_diag: Vec<Real>,
    /// Largest absolute off-diagonal entry of that block.
    pub residual_off: Real,
}

/// Eliminates with the largest remaining diagonal entry as pivot while it
/// exceeds `floor`.
pub fn ldl_max_pivot(a: &[Vec<Real>], floor: &Real) -> Elimination {
    let n = a.len();
    let bits = a.first().and_then(|r| r.first()).map(|x| x.bits()).unwrap_or(64);
    let mut m: Vec<Vec<Real>> = a.to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    let mut order = Vec::new();
    while !active.is_empty() {
        let (pos, &p) = active
            .iter()
            .enumerate()
            .max_by(|x, y| m[*x.1][*x.1].partial_cmp(&m[*y.1][*y.1]).expect("finite"))
            .expect("nonempty");
        let d = m[p][p].clone();
        if d <= *floor {
            break;
        }
        active.remove(pos);
        let rinv = d.recip();
        let col: Vec<Real> = active.iter().map(|&i| m[i][p].clone()).collect();
        for (ii, &i) in active.iter().enumerate() {
            let f = &col[ii] * &rinv;
            for (jj, &j) in active.iter().enumerate().skip(ii) {
                let v = &m[i][j] - &f * &col[jj];
                m[i][j] = v.clone();
                m[j][i] = v;
            }
        }
        pivots.push(d);
        order.push(p);
    }
    let residual_diag = active.iter().map(|&i| m[i][i].clone()).collect();
    let mut residual_off = Real::zero(bits);
    for (ii, &i) in active.iter().enumerate() {
        for &j in active.iter().skip(ii + 1) {
            let v = m[i][j].abs();
            if v > residual_off {
                residual_off = v;
            }
        }
    }
    Elimination { pivots, order, residual_diag, residual_off }
}

/// Exact counterpart of [`ldl_max_pivot`] with floor zero.
pub fn ldl_exact(a: &[Vec<RBig>]) -> (Vec<RBig>, Vec<RBig>, RBig) {
    let n = a.len();
    let mut m: Vec<Vec<RBig>> = a.to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    while !active.is_empty() {
        let (pos, &p) = active
            .iter()
            .enumerate()
            .max_by(|x, y| m[*x.1][*x.1].cmp(&m[*y.1][*y.1]))
            .expect("nonempty");
        let d = m[p][p].clone();
        if d <= RBig::ZERO {
            break;
        }
        active.remove(pos);
        let col: Vec<RBig> = active.iter().map(|&i| m[i][p].clone()).collect();
        for (ii, &i) in active.iter().enumerate() {
            let f = &col[ii] / &d;
            for (jj, &j) in active.iter().enumerate().skip(ii) {
                let v = &m[i][j] - &f * &col[jj];
                m[i][j] = v.clone();
                m[j][i] = v;
            }
        }
        pivots.push(d);
    }
    let diag = active.iter().map(|&i| m[i][i].clone()).collect();
    let mut off = RBig::ZERO;
    for (ii, &i) in active.iter().enumerate() {
        for &j in active.iter().skip(ii + 1) {
            let v = if m[i][j] < RBig::ZERO { -m[i][j].clone() } else { m[i][j].clone() };
            if v > off {
                off = v;
            }
        }
    }
    (pivots, diag, off)
}

/// Solution of a symmetric positive semidefinite system `A x = b` for one
/// or more right-hand sides.
///
/// Pivots are chosen by largest ratio to the original diagonal, which makes
/// the rank decision independent of diagonal scaling. Pivots below
/// `rel_floor` times their original diagonal are treated as dependent and
/// the corresponding unknowns set to zero.
pub struct SemidefiniteSolve {
    pub solutions: Vec<Vec<Real>>,
    pub rank: usize,
    /// Smallest ratio pivot / original diagonal among accepted pivots.
    pub min_ratio: f64,
    /// Most negative ratio seen among rejected pivots (0 if none).
    pub worst_negative: f64,
}

pub fn solve_semidefinite(a: &[Vec<Real>], rhs: &[Vec<Real>], rel_floor: &Real) -> SemidefiniteSolve {
    let n = a.len();
    let bits = a.first().and_then(|r| r.first()).map(|x| x.bits()).unwrap_or(64);
    let orig: Vec<Real> = (0..n).map(|i| a[i][i].clone()).collect();
    let mut m: Vec<Vec<Real>> = a.to_vec();
    let mut active: Vec<usize> = (0..n).filter(|&i| orig[i].is_positive()).collect();
    // L stored by columns in elimination order.
    let mut lcols: Vec<(usize, Real, Vec<(usize, Real)>)> = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut worst_negative = 0.0f64;
    while !active.is_empty() {
        let ratio = |i: usize, m: &Vec<Vec<Real>>| &m[i][i] / &orig[i];
        let (pos, p) = active
            .iter()
            .copied()
            .enumerate()
            .max_by(|x, y| ratio(x.1, &m).partial_cmp(&ratio(y.1, &m)).expect("finite"))
            .expect("nonempty");
        let r = ratio(p, &m);
        if r <= *rel_floor {
            for &i in &active {
                let ri = ratio(i, &m).to_f64();
                if ri < worst_negative {
                    worst_negative = ri;
                }
            }
            break;
        }
        min_ratio = min_ratio.min(r.to_f64());
        active.remove(pos);
        let d = m[p][p].clone();
        let dinv = d.recip();
        let col: Vec<Real> = active.iter().map(|&i| m[i][p].clone()).collect();
        for (ii, &i) in active.iter().enumerate() {
            let f = &col[ii] * &dinv;
            for (jj, &j) in active.iter().enumerate().skip(ii) {
                let v = &m[i][j] - &f * &col[jj];
                m[i][j] = v.clone();
                m[j][i] = v;
            }
        }
        let l: Vec<(usize, Real)> = active.iter().zip(&col).map(|(&i, c)| (i, c * &dinv)).collect();
        lcols.push((p, d, l));
    }
    let rank = lcols.len();
    let mut solutions = Vec::with_capacity(rhs.len());
    for b in rhs {
        // Forward: L y = b restricted to the pivoted rows.
        let mut y: Vec<Real> = b.to_vec();
        for (p, _, l) in &lcols {
            let yp = y[*p].clone();
            for (i, li) in l {
                y[*i] = &y[*i] - li * &yp;
            }
        }
        let mut x = vec![Real::zero(bits); n];
        for (p, d, _) in &lcols {
            x[*p] = &y[*p] / d;
        }
        // Backward: Lᵀ x = D⁻¹ y.
        for (p, _, l) in lcols.iter().rev() {
            let mut acc = x[*p].clone();
            for (i, li) in l {
                acc = acc - li * &x[*i];
            }
            x[*p] = acc;
        }
        solutions.push(x);
    }
    if min_ratio == f64::INFINITY {
        min_ratio = 0.0;
    }
    SemidefiniteSolve { solutions, rank, min_ratio, worst_negative }
}
