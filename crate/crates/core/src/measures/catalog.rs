//! Named one-dimensional density families.

use std::f64::consts::PI;

use dashu_int::IBig;
use dashu_ratio::RBig;
use serde_json::{json, Map, Value};

use super::spec::{rational_from_json, rational_to_json};
use crate::arith::Real;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum CatalogFamily {
    /// Normal law with mean μ and standard deviation σ.
    Gaussian { mu: RBig, sigma: RBig },
    /// Law of e^Y with Y ~ N(μ, σ²).
    Lognormal { mu: RBig, sigma: RBig },
    /// Density λe^{−λx} on (0, ∞).
    Exponential { lambda: RBig },
    /// Uniform law on [a, b].
    Uniform { a: RBig, b: RBig },
    /// Density ∝ x^{−ln x}(1 + ε sin(2π ln x)) on (0, ∞), normalized by the
    /// ε = 0 mass. All members share one moment sequence.
    StieltjesFamily { epsilon: RBig },
}

/// Moments of a family, either exact or rounded to the working precision.
#[derive(Clone, Debug)]
pub enum FamilyMoments {
    Exact(Vec<RBig>),
    Float { values: Vec<Real>, note: String },
}

fn int(v: i64) -> RBig {
    RBig::from(IBig::from(v))
}

fn param(p: &Map<String, Value>, names: &[&str], id: &str) -> Result<RBig> {
    for n in names {
        if let Some(v) = p.get(*n) {
            return rational_from_json(v, &format!("{id}.{n}"));
        }
    }
    Err(Error::Schema(format!("{id}: missing parameter {:?}", names[0])))
}

fn param_or(p: &Map<String, Value>, names: &[&str], id: &str, default: RBig) -> Result<RBig> {
    if names.iter().any(|n| p.contains_key(*n)) {
        param(p, names, id)
    } else {
        Ok(default)
    }
}

fn to_f64(r: &RBig) -> f64 {
    r.to_f64().value()
}

impl CatalogFamily {
    pub fn from_parts(id: &str, p: &Map<String, Value>) -> Result<Self> {
        let f = match id {
            "gaussian" => CatalogFamily::Gaussian {
                mu: param_or(p, &["mu"], id, RBig::ZERO)?,
                sigma: param_or(p, &["sigma"], id, RBig::ONE)?,
            },
            "lognormal" => CatalogFamily::Lognormal {
                mu: param_or(p, &["mu"], id, RBig::ZERO)?,
                sigma: param_or(p, &["sigma"], id, RBig::ONE)?,
            },
            "exponential" => CatalogFamily::Exponential { lambda: param_or(p, &["lambda", "rate"], id, RBig::ONE)? },
            "uniform" => CatalogFamily::Uniform {
                a: param_or(p, &["a"], id, RBig::ZERO)?,
                b: param_or(p, &["b"], id, RBig::ONE)?,
            },
            "stieltjes_family" => {
                CatalogFamily::StieltjesFamily { epsilon: param(p, &["epsilon", "eps"], id)? }
            }
            other => return Err(Error::Schema(format!("unknown catalog_id {other:?}"))),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CatalogFamily::Gaussian { sigma, .. } | CatalogFamily::Lognormal { sigma, .. } => {
                if *sigma <= RBig::ZERO {
                    return Err(Error::Invariant("sigma must be positive".into()));
                }
            }
            CatalogFamily::Exponential { lambda } => {
                if *lambda <= RBig::ZERO {
                    return Err(Error::Invariant("lambda must be positive".into()));
                }
            }
            CatalogFamily::Uniform { a, b } => {
                if a >= b {
                    return Err(Error::Invariant("uniform needs a < b".into()));
                }
            }
            CatalogFamily::StieltjesFamily { epsilon } => {
                if *epsilon < int(-1) || *epsilon > int(1) {
                    return Err(Error::Invariant("epsilon must lie in [-1, 1]".into()));
                }
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &'static str {
        match self {
            CatalogFamily::Gaussian { .. } => "gaussian",
            CatalogFamily::Lognormal { .. } => "lognormal",
            CatalogFamily::Exponential { .. } => "exponential",
            CatalogFamily::Uniform { .. } => "uniform",
            CatalogFamily::StieltjesFamily { .. } => "stieltjes_family",
        }
    }

    pub fn parameters_json(&self) -> Value {
        match self {
            CatalogFamily::Gaussian { mu, sigma } | CatalogFamily::Lognormal { mu, sigma } => {
                json!({"mu": rational_to_json(mu), "sigma": rational_to_json(sigma)})
            }
            CatalogFamily::Exponential { lambda } => json!({"lambda": rational_to_json(lambda)}),
            CatalogFamily::Uniform { a, b } => json!({"a": rational_to_json(a), "b": rational_to_json(b)}),
            CatalogFamily::StieltjesFamily { epsilon } => json!({"epsilon": rational_to_json(epsilon)}),
        }
    }

    /// Closed support interval (endpoints may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            CatalogFamily::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            CatalogFamily::Uniform { a, b } => (to_f64(a), to_f64(b)),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Normalized density in double precision.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            CatalogFamily::Gaussian { mu, sigma } => {
                let (m, s) = (to_f64(mu), to_f64(sigma));
                let z = (x - m) / s;
                (-0.5 * z * z).exp() / (s * (2.0 * PI).sqrt())
            }
            CatalogFamily::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let (m, s) = (to_f64(mu), to_f64(sigma));
                let z = (x.ln() - m) / s;
                (-0.5 * z * z).exp() / (x * s * (2.0 * PI).sqrt())
            }
            CatalogFamily::Exponential { lambda } => {
                if x < 0.0 {
                    return 0.0;
                }
                let l = to_f64(lambda);
                l * (-l * x).exp()
            }
            CatalogFamily::Uniform { a, b } => {
                let (a, b) = (to_f64(a), to_f64(b));
                if x < a || x > b {
                    0.0
                } else {
                    1.0 / (b - a)
                }
            }
            CatalogFamily::StieltjesFamily { epsilon } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let u = x.ln();
                // ε = 0 mass of x^{−ln x} is √π·e^{1/4}.
                let mass = PI.sqrt() * 0.25f64.exp();
                (-u * u).exp() * (1.0 + to_f64(epsilon) * (2.0 * PI * u).sin()) / mass
            }
        }
    }

    /// Moments s_0..s_n. Rational parameters give exact tables except for
    /// the lognormal (closed form in floating point) and the Stieltjes
    /// family (adaptive quadrature).
    pub fn moments(&self, n: usize, bits: usize, quad: &QuadOptions) -> Result<FamilyMoments> {
        match self {
            CatalogFamily::Gaussian { mu, sigma } => {
                // s_k = μ s_{k−1} + (k−1)σ² s_{k−2}
                let var = sigma * sigma;
                let mut s = vec![RBig::ONE];
                for k in 1..=n {
                    let mut v = mu * &s[k - 1];
                    if k >= 2 {
                        v += int(k as i64 - 1) * &var * &s[k - 2];
                    }
                    s.push(v);
                }
                Ok(FamilyMoments::Exact(s))
            }
            CatalogFamily::Exponential { lambda } => {
                let mut s = vec![RBig::ONE];
                for k in 1..=n {
                    let v = &s[k - 1] * int(k as i64) / lambda;
                    s.push(v);
                }
                Ok(FamilyMoments::Exact(s))
            }
            CatalogFamily::Uniform { a, b } => {
                let w = b - a;
                let (mut pa, mut pb) = (a.clone(), b.clone());
                let mut s = Vec::with_capacity(n + 1);
                for k in 0..=n {
                    s.push((&pb - &pa) / (int(k as i64 + 1) * &w));
                    pa = &pa * a;
                    pb = &pb * b;
                }
                Ok(FamilyMoments::Exact(s))
            }
            CatalogFamily::Lognormal { mu, sigma } => {
                let m = Real::from_rational(mu, bits);
                let v = Real::from_rational(&(sigma * sigma), bits);
                let half = Real::from_f64(0.5, bits);
                let values = (0..=n)
                    .map(|k| {
                        let k = Real::from_i64(k as i64, bits);
                        (&k * &m + &k * &k * &v * &half).exp()
                    })
                    .collect();
                Ok(FamilyMoments::Float { values, note: format!("closed form at {bits} bits") })
            }
            CatalogFamily::StieltjesFamily { epsilon } => {
                let eps = to_f64(epsilon);
                let (mass, e0) = stieltjes_reduced(0, 0.0, quad)?;
                let mass = Real::from_f64(mass, bits);
                let mut evals = e0;
                let mut values = Vec::with_capacity(n + 1);
                for k in 0..=n {
                    let (red, e) = stieltjes_reduced(k, eps, quad)?;
                    evals += e;
                    let c = (k as f64 + 1.0) / 2.0;
                    // Peak factor e^{c²} relative to the mass's e^{1/4},
                    // applied in high precision.
                    let peak = Real::from_f64(c * c - 0.25, bits).exp();
                    values.push(Real::from_f64(red, bits) * peak / &mass);
                }
                Ok(FamilyMoments::Float {
                    values,
                    note: format!("adaptive Gauss-Kronrod quadrature, {evals} integrand evaluations"),
                })
            }
        }
    }
}

/// ∫ e^{−v²}(1 + ε sin 2π(v + c)) dv with c = (k+1)/2: the k-th moment
/// integrand after x = e^u and removal of the peak factor e^{c²}.
fn stieltjes_reduced(k: usize, eps: f64, quad: &QuadOptions) -> Result<(f64, usize)> {
    let c = (k as f64 + 1.0) / 2.0;
    let f = |v: f64| (-v * v).exp() * (1.0 + eps * (2.0 * PI * (v + c)).sin());
    // e^{−v²} < 1e−43 beyond |v| = 10.
    let r = integrate(f, -10.0, 10.0, quad)?;
    Ok((r.value, r.evals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_double_factorials() {
        let f = CatalogFamily::Gaussian { mu: RBig::ZERO, sigma: RBig::ONE };
        let FamilyMoments::Exact(s) = f.moments(6, 64, &QuadOptions::default()).unwrap() else { panic!() };
        let want: Vec<RBig> = [1, 0, 1, 0, 3, 0, 15].iter().map(|&v| int(v)).collect();
        assert_eq!(s, want);
    }

    #[test]
    fn stieltjes_family_is_normalized() {
        for eps in [RBig::ZERO, RBig::from_parts(IBig::from(-1), 2u8.into())] {
            let f = CatalogFamily::StieltjesFamily { epsilon: eps };
            let FamilyMoments::Float { values, .. } = f.moments(8, 128, &QuadOptions::default()).unwrap() else { panic!() };
            for (n, v) in values.iter().enumerate() {
                // ∫ x^n x^{−ln x} dx / ∫ x^{−ln x} dx = e^{n(n+2)/4}
                let want = ((n * (n + 2)) as f64 / 4.0).exp();
                assert!((v.to_f64() / want - 1.0).abs() < 1e-10, "{n}: {v}");
            }
        }
    }

    #[test]
    fn exponential_factorials() {
        let f = CatalogFamily::Exponential { lambda: int(2) };
        let FamilyMoments::Exact(s) = f.moments(3, 64, &QuadOptions::default()).unwrap() else { panic!() };
        assert_eq!(s[3], RBig::from_parts(IBig::from(6), 8u8.into()));
    }

    #[test]
    fn densities_integrate_to_one() {
        use crate::quadrature::{integrate_infinite, integrate_semi_infinite};
        let q = QuadOptions::default();
        let fams = [
            CatalogFamily::Gaussian { mu: int(1), sigma: int(2) },
            CatalogFamily::Lognormal { mu: RBig::ZERO, sigma: RBig::ONE },
            CatalogFamily::Exponential { lambda: int(3) },
            CatalogFamily::StieltjesFamily { epsilon: RBig::from_parts(IBig::from(1), 2u8.into()) },
        ];
        for f in fams {
            let m = match f.support() {
                (a, _) if a.is_finite() => integrate_semi_infinite(|x| f.density(x), a, &q).unwrap().value,
                _ => integrate_infinite(|x| f.density(x), &q).unwrap().value,
            };
            assert!((m - 1.0).abs() < 1e-9, "{} mass {m}", f.id());
        }
    }
}
