//! Truncated Nevanlinna matrix, Weyl disks and the parametrized Cauchy
//! transforms of a one-dimensional moment sequence.

use serde::{Deserialize, Serialize};

use crate::arith::{parse_complex_literal, Complex, Real, WireComplex};
use crate::error::{Error, Result};
use crate::measures::MomentSequence;
use crate::moment_core::PrecisionPolicy;
use crate::orthopoly::{eval_p_all, eval_q_all, recurrence_coefficients, RecurrenceData};

/// Series below this last-term magnitude count as converged.
pub const CONVERGED_TAIL: f64 = 1e-12;

/// A_n, B_n, C_n, D_n at a point z.
#[derive(Clone, Debug)]
pub struct NevanlinnaQuadruple {
    pub z: Complex,
    pub n: usize,
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    /// Largest of the last three term magnitudes, per series (A, B, C, D).
    pub tails: [f64; 4],
}

impl NevanlinnaQuadruple {
    pub fn converged(&self) -> bool {
        self.tails.iter().all(|t| *t < CONVERGED_TAIL)
    }

    /// AD − BC, identically 1 for the untruncated functions.
    pub fn determinant(&self) -> Complex {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn to_wire(&self) -> QuadrupleReport {
        QuadrupleReport {
            z: (&self.z).into(),
            n: self.n,
            a: (&self.a).into(),
            b: (&self.b).into(),
            c: (&self.c).into(),
            d: (&self.d).into(),
            tails: self.tails,
            converged: self.converged(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleReport {
    pub z: WireComplex,
    pub n: usize,
    pub a: WireComplex,
    pub b: WireComplex,
    pub c: WireComplex,
    pub d: WireComplex,
    pub tails: [f64; 4],
    pub converged: bool,
}

fn recurrence_for(s: &MomentSequence, n: usize, policy: &PrecisionPolicy) -> Result<RecurrenceData> {
    let r = recurrence_coefficients(s, n, policy)?;
    if r.k_max < n {
        return Err(Error::RankDeficient { support_points: r.k_max + 1 });
    }
    Ok(r)
}

/// Truncated sums over k = 0..=n.
pub fn quadruple(s: &MomentSequence, z: &Complex, n: usize, policy: &PrecisionPolicy) -> Result<NevanlinnaQuadruple> {
    let r = recurrence_for(s, n, policy)?;
    quadruple_from(&r, z, n)
}

pub fn quadruple_from(r: &RecurrenceData, z: &Complex, n: usize) -> Result<NevanlinnaQuadruple> {
    let bits = r.bits;
    let zero = Complex::zero(bits);
    let pz = eval_p_all(r, n, z)?;
    let qz = eval_q_all(r, n, z)?;
    let p0 = eval_p_all(r, n, &zero)?;
    let q0 = eval_q_all(r, n, &zero)?;
    let mut sums = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
    let mut tails = [0f64; 4];
    for k in 0..=n {
        let terms = [
            z * &(&q0[k] * &qz[k]),
            z * &(&q0[k] * &pz[k]),
            z * &(&p0[k] * &qz[k]),
            z * &(&p0[k] * &pz[k]),
        ];
        for (i, t) in terms.iter().enumerate() {
            sums[i] = &sums[i] + t;
            if k + 3 > n {
                tails[i] = tails[i].max(t.abs().to_f64());
            }
        }
    }
    let [a, b, c, d] = sums;
    let one = Complex::one(bits);
    Ok(NevanlinnaQuadruple { z: z.clone(), n, a, b: &b - &one, c: &c + &one, d, tails })
}

/// Nevanlinna parameter: a finite complex constant or ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Phi {
    Finite(num_complex::Complex64),
    Infinity,
}

/// Accepts `inf`, `const:<c>` or a bare complex literal such as `0.5-2i`.
pub fn parse_phi(src: &str) -> Result<Phi> {
    let t = src.trim();
    let body = t.strip_prefix("const:").unwrap_or(t).trim();
    match body {
        "inf" | "infinity" | "∞" => return Ok(Phi::Infinity),
        _ => {}
    }
    parse_complex_literal(body)
        .map(|(re, im)| Phi::Finite(num_complex::Complex64::new(re, im)))
        .ok_or_else(|| Error::Schema(format!("invalid parameter {src:?}; expected inf, const:<c> or a+bi")))
}

/// −(CΦ + A)/(DΦ + B), or −C/D at Φ = ∞.
pub fn parametrized_value(q: &NevanlinnaQuadruple, phi: &Phi) -> Result<Complex> {
    let bits = q.z.bits();
    let (num, den, scale) = match phi {
        Phi::Infinity => (q.c.clone(), q.d.clone(), q.d.abs()),
        Phi::Finite(f) => {
            let f = Complex::from_c64(*f, bits);
            let den = &(&q.d * &f) + &q.b;
            let scale = &(&q.d.abs() * &f.abs()) + &q.b.abs();
            (&(&q.c * &f) + &q.a, den, scale)
        }
    };
    let floor = Real::from_f64(1e-30, bits) * &scale;
    if den.abs() <= floor {
        return Err(Error::Pole(format!("denominator vanishes at {:?}", phi)));
    }
    Ok(-&(&num / &den))
}

/// Weyl disk at truncation n: {w : Σ_{k≤n}|wP_k + Q_k|² ≤ (w − w̄)/(z − z̄)}.
#[derive(Clone, Debug)]
pub struct WeylDisk {
    pub z: Complex,
    pub n: usize,
    pub center: Complex,
    pub radius: Real,
    /// 1/(|z − z̄|Σ|P_k|²), computed independently of `radius`.
    pub weyl_radius: Real,
}

pub fn weyl_disk(s: &MomentSequence, z: &Complex, n: usize, policy: &PrecisionPolicy) -> Result<WeylDisk> {
    if z.im.is_zero() {
        return Err(Error::RealPoint);
    }
    let r = recurrence_for(s, n, policy)?;
    weyl_disk_from(&r, z, n)
}

/// Completing the square in the boundary equation
/// S_PP|w|² + 2 Re(wβ) + S_QQ = 0 with β = Σ P_k Q̄_k + i/(2y).
pub fn weyl_disk_from(r: &RecurrenceData, z: &Complex, n: usize) -> Result<WeylDisk> {
    if z.im.is_zero() {
        return Err(Error::RealPoint);
    }
    let bits = r.bits;
    let p = eval_p_all(r, n, z)?;
    let q = eval_q_all(r, n, z)?;
    let mut spp = Real::zero(bits);
    let mut sqq = Real::zero(bits);
    let mut spq = Complex::zero(bits);
    for (pk, qk) in p.iter().zip(&q) {
        spp = &spp + &pk.norm_sqr();
        sqq = &sqq + &qk.norm_sqr();
        spq = &spq + &(pk * &qk.conj());
    }
    let two_y = &z.im + &z.im;
    let beta = Complex::new(spq.re.clone(), &spq.im + &two_y.recip());
    let center = -&beta.conj().scale(&spp.recip());
    let disc = &beta.norm_sqr() - &(&spp * &sqq);
    let radius = if disc.is_negative() { Real::zero(bits) } else { disc.sqrt() / &spp };
    let weyl_radius = (&two_y.abs() * &spp).recip();
    Ok(WeylDisk { z: z.clone(), n, center, radius, weyl_radius })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskMembership {
    pub n: usize,
    pub center: WireComplex,
    pub radius: f64,
    pub w: WireComplex,
    /// |w − center| − radius; negative inside.
    pub signed_distance: f64,
}

impl WeylDisk {
    pub fn signed_distance(&self, w: &Complex) -> Real {
        &(w - &self.center).abs() - &self.radius
    }

    pub fn membership(&self, w: &Complex) -> DiskMembership {
        DiskMembership {
            n: self.n,
            center: (&self.center).into(),
            radius: self.radius.to_f64(),
            w: w.into(),
            signed_distance: self.signed_distance(w).to_f64(),
        }
    }

    /// |c_inner − c_outer| + r_inner − r_outer; ≤ 0 when `inner` is contained.
    pub fn containment_margin(&self, inner: &WeylDisk) -> Real {
        &(&(&inner.center - &self.center).abs() + &inner.radius) - &self.radius
    }
}

pub fn disk_membership(s: &MomentSequence, z: &Complex, w: &Complex, n: usize, policy: &PrecisionPolicy) -> Result<DiskMembership> {
    Ok(weyl_disk(s, z, n, policy)?.membership(w))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StieltjesEstimate {
    /// (k, −Q_k(0)/P_k(0)) for the indices with P_k(0) ≠ 0.
    pub ratios: Vec<(usize, f64)>,
    /// Indices skipped because P_k(0) vanished.
    pub skipped: Vec<usize>,
    pub aitken: Vec<f64>,
    pub estimate: f64,
    pub monotone: bool,
    pub stabilized: bool,
}

/// d₀ = −lim Q_k(0)/P_k(0), Aitken-accelerated.
pub fn stieltjes_d0(s: &MomentSequence, n_max: usize, policy: &PrecisionPolicy) -> Result<StieltjesEstimate> {
    let r = recurrence_coefficients(s, n_max, policy)?;
    let n = r.k_max.min(n_max);
    let zero = Complex::zero(r.bits);
    let p = eval_p_all(&r, n, &zero)?;
    let q = eval_q_all(&r, n, &zero)?;
    let tiny = Real::pow2(-(r.bits as i64) / 2, r.bits) * &p[0].re.abs();
    let mut ratios = Vec::new();
    let mut skipped = Vec::new();
    for k in 1..=n {
        if p[k].re.abs() <= tiny {
            skipped.push(k);
            continue;
        }
        ratios.push((k, -(&q[k].re / &p[k].re)));
    }
    let aitken: Vec<Real> = ratios
        .windows(3)
        .map(|w| {
            let (x0, x1, x2) = (&w[0].1, &w[1].1, &w[2].1);
            let d1 = x1 - x0;
            let d2 = &(x2 - x1) - &d1;
            if d2.is_zero() {
                x2.clone()
            } else {
                x0 - &(&(&d1 * &d1) / &d2)
            }
        })
        .collect();
    let monotone = ratios.windows(2).all(|w| !(&w[1].1 - &w[0].1).is_negative())
        || ratios.windows(2).all(|w| !(&w[1].1 - &w[0].1).is_positive());
    let stabilized = aitken.len() >= 2 && {
        let m = aitken.len();
        let diff = (&aitken[m - 1] - &aitken[m - 2]).abs().to_f64();
        diff < 1e-6 * aitken[m - 1].abs().to_f64().max(1.0)
    };
    let estimate = aitken
        .last()
        .or(ratios.last().map(|r| &r.1))
        .map_or(f64::NAN, |x| x.to_f64());
    Ok(StieltjesEstimate {
        ratios: ratios.iter().map(|(k, v)| (*k, v.to_f64())).collect(),
        skipped,
        aitken: aitken.iter().map(|x| x.to_f64()).collect(),
        estimate,
        monotone,
        stabilized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{compute_moments, parse_measure_spec};

    fn seq(id: &str, n: usize, bits: usize) -> MomentSequence {
        let spec = parse_measure_spec(&format!(r#"{{"kind":"catalog","catalog_id":"{id}"}}"#)).unwrap();
        compute_moments(&spec, n, &PrecisionPolicy::with_bits(bits)).unwrap()
    }

    fn i(bits: usize) -> Complex {
        Complex::from_f64(0.0, 1.0, bits)
    }

    #[test]
    fn degree_zero_values() {
        let p = PrecisionPolicy::default();
        let s = seq("gaussian", 4, 256);
        let z = Complex::from_f64(0.3, 2.0, 256);
        let q = quadruple(&s, &z, 0, &p).unwrap();
        assert!(q.a.is_zero());
        assert!((q.b.to_c64() + 1.0).norm() < 1e-30);
        assert!((q.c.to_c64() - 1.0).norm() < 1e-30);
        assert!((&q.d - &z).abs().to_f64() < 1e-30);
        assert!(parametrized_value(&q, &Phi::Finite(0.0.into())).unwrap().abs().to_f64() < 1e-30);
        let w = parametrized_value(&q, &Phi::Infinity).unwrap().to_c64();
        assert!((w + 1.0 / z.to_c64()).norm() < 1e-15);
    }

    #[test]
    fn lognormal_geometry() {
        let bits = 256;
        let p = PrecisionPolicy::with_bits(bits);
        let s = seq("lognormal", 130, bits);
        let r = recurrence_coefficients(&s, 60, &p).unwrap();
        let q = quadruple_from(&r, &i(bits), 60).unwrap();
        assert!(q.converged(), "{:?}", q.tails);
        assert!((q.determinant().to_c64() - 1.0).norm() < 1e-8);
        let disk = weyl_disk_from(&r, &i(bits), 60).unwrap();
        assert!(Real::rel_diff(&disk.radius, &disk.weyl_radius).to_f64() < 1e-15);
        for phi in [-1.0, 0.0, 1.0] {
            let w = parametrized_value(&q, &Phi::Finite(phi.into())).unwrap();
            assert!(disk.signed_distance(&w).abs().to_f64() < 1e-8);
        }
        let w = parametrized_value(&q, &Phi::Finite(num_complex::Complex64::i())).unwrap();
        assert!(disk.signed_distance(&w).to_f64() < -1e-6);
    }

    #[test]
    fn truncated_circle_is_exact() {
        // At every truncation, real parameters map onto the truncated circle.
        let p = PrecisionPolicy::default();
        let s = seq("gaussian", 20, 256);
        let z = Complex::from_f64(0.4, 0.7, 256);
        for n in [1, 3, 6] {
            let q = quadruple(&s, &z, n, &p).unwrap();
            let disk = weyl_disk(&s, &z, n, &p).unwrap();
            for phi in [-2.0, 0.5, 3.0] {
                let w = parametrized_value(&q, &Phi::Finite(phi.into())).unwrap();
                assert!(disk.signed_distance(&w).abs().to_f64() < 1e-40, "n={n}");
            }
        }
    }

    #[test]
    fn phi_parsing() {
        assert_eq!(parse_phi("inf").unwrap(), Phi::Infinity);
        assert_eq!(parse_phi("const:2-1i").unwrap(), Phi::Finite(num_complex::Complex64::new(2.0, -1.0)));
        assert_eq!(parse_phi("i").unwrap(), Phi::Finite(num_complex::Complex64::i()));
        assert!(parse_phi("const:").is_err());
    }

    #[test]
    fn stieltjes_short_tail() {
        let e = stieltjes_d0(&seq("lognormal", 10, 256), 2, &PrecisionPolicy::default()).unwrap();
        assert!(!e.stabilized);
    }

    #[test]
    fn lognormal_stieltjes_and_nesting() {
        let p = PrecisionPolicy::default();
        let s = seq("lognormal", 130, 256);
        let e = stieltjes_d0(&s, 50, &p).unwrap();
        assert!(e.stabilized && e.monotone, "{:?}", &e.aitken[e.aitken.len() - 3..]);
        let r = recurrence_coefficients(&s, 60, &p).unwrap();
        let disks: Vec<_> = (10..=60).map(|n| weyl_disk_from(&r, &i(256), n).unwrap()).collect();
        for w in disks.windows(2) {
            assert!(w[0].containment_margin(&w[1]).to_f64() <= 1e-60 * w[0].radius.to_f64());
        }
    }
}
