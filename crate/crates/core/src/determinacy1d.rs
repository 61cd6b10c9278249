//! One-dimensional determinacy diagnostics: Carleman sums, Weyl radii,
//! Riesz closure distances and a combined verdict.

use serde::{Deserialize, Serialize};

use crate::arith::{Complex, Real, WireComplex};
use crate::error::{Error, Result};
use crate::measures::MomentSequence;
use crate::moment_core::{riesz_distance, x_plus_i, PrecisionPolicy};
use crate::orthopoly::{christoffel_sums, recurrence_coefficients};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeriesClass {
    DivergesLikely,
    ConvergesLikely,
    Inconclusive,
}

/// Partial sums of a nonnegative series with a tail-fit classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnostic {
    /// Terms t_1..t_n.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Fitted decay exponent p in t_n ≈ c·n^{−p} over the second half.
    pub exponent_p: f64,
    pub coefficient_c: f64,
    /// Fitted q in n·t_n ≈ (log n)^q, only when p is close to 1.
    pub log_exponent_q: Option<f64>,
    /// Estimated remainder beyond the last term.
    pub tail_estimate: f64,
    pub classification: SeriesClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeriesConfig {
    pub delta_fit: f64,
    pub min_terms: usize,
    /// Convergence also needs the tail estimate below this fraction of the
    /// partial sum.
    pub tail_fraction: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig { delta_fit: 0.15, min_terms: 8, tail_fraction: 1e-3 }
    }
}

/// Least-squares slope and intercept.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Classifies Σ t_n from the given terms (t_1 first).
pub fn classify_series(terms: Vec<f64>, cfg: &SeriesConfig) -> SeriesDiagnostic {
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        partial_sums.push(acc);
    }
    let n = terms.len();
    let mut out = SeriesDiagnostic {
        terms,
        partial_sums,
        exponent_p: f64::NAN,
        coefficient_c: f64::NAN,
        log_exponent_q: None,
        tail_estimate: f64::INFINITY,
        classification: SeriesClass::Inconclusive,
    };
    if n < cfg.min_terms.max(4) {
        return out;
    }
    let lo = n / 2;
    let idx: Vec<usize> = (lo..n).filter(|&i| out.terms[i] > 0.0 && out.terms[i].is_finite()).collect();
    if idx.len() < 3 {
        // Terms vanish: the series is a finite sum.
        if out.terms[lo..].iter().all(|&t| t == 0.0) {
            out.exponent_p = f64::INFINITY;
            out.tail_estimate = 0.0;
            out.classification = SeriesClass::ConvergesLikely;
        }
        return out;
    }
    let xs: Vec<f64> = idx.iter().map(|&i| ((i + 1) as f64).ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| out.terms[i].ln()).collect();
    let (slope, icpt) = linear_fit(&xs, &ys);
    let p = -slope;
    out.exponent_p = p;
    out.coefficient_c = icpt.exp();
    let last = out.terms[n - 1];
    let nf = n as f64;
    let total = out.partial_sums[n - 1];
    let mut tail = if p > 1.0 { last * nf / (p - 1.0) } else { f64::INFINITY };
    // Geometric tail from the average ratio over the fitted window.
    let (first, lastk) = (idx[0], idx[idx.len() - 1]);
    if lastk > first {
        let ratio = ((out.terms[lastk] / out.terms[first]).ln() / (lastk - first) as f64).exp();
        if ratio < 1.0 {
            tail = tail.min(last * ratio / (1.0 - ratio));
        }
    }
    out.tail_estimate = tail;
    let d = cfg.delta_fit;
    out.classification = if p <= 1.0 - d {
        SeriesClass::DivergesLikely
    } else if p >= 1.0 + d {
        if tail <= cfg.tail_fraction * total {
            SeriesClass::ConvergesLikely
        } else {
            SeriesClass::Inconclusive
        }
    } else {
        // Borderline p ≈ 1: compare n·t_n with powers of log n.
        let idx2: Vec<usize> = idx.iter().copied().filter(|&i| i + 1 >= 3).collect();
        if idx2.len() < 3 {
            return out;
        }
        let xs: Vec<f64> = idx2.iter().map(|&i| ((i + 1) as f64).ln().ln()).collect();
        let ys: Vec<f64> = idx2.iter().map(|&i| ((i + 1) as f64 * out.terms[i]).ln()).collect();
        let (q, _) = linear_fit(&xs, &ys);
        out.log_exponent_q = Some(q);
        if q >= -1.0 + d {
            SeriesClass::DivergesLikely
        } else if q <= -1.0 - d && tail <= cfg.tail_fraction * total {
            SeriesClass::ConvergesLikely
        } else {
            SeriesClass::Inconclusive
        }
    };
    out
}

/// Σ_{n=1}^{n_max} (s_{2n}/s_0)^{−1/(2n)}.
pub fn carleman_report(s: &MomentSequence, n_max: usize, cfg: &SeriesConfig, policy: &PrecisionPolicy) -> Result<SeriesDiagnostic> {
    if s.dim() != 1 {
        return Err(Error::Dimension("Carleman report needs a one-dimensional sequence".into()));
    }
    if 2 * n_max > s.max_order() {
        return Err(Error::DegreeOverflow { needed: 2 * n_max, available: s.max_order() });
    }
    let bits = policy.bits;
    let s0 = s.real_1d(0, bits);
    if !s0.is_positive() {
        return Err(Error::NonPositiveEvenMoment(0));
    }
    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let v = s.real_1d(2 * n, bits);
        if !v.is_positive() {
            return Err(Error::NonPositiveEvenMoment(2 * n));
        }
        let e = (v / &s0).ln() / Real::from_i64(-2 * n as i64, bits);
        terms.push(e.exp().to_f64());
    }
    Ok(classify_series(terms, cfg))
}

/// Weyl radii ρ_n(z) = 1/(|z − z̄| Σ_{k≤n}|P_k(z)|²) for n = 0..=n_max.
#[derive(Clone, Debug)]
pub struct WeylRadii {
    pub z: Complex,
    pub radii: Vec<Real>,
    /// Finite support: the recurrence ended before n_max.
    pub terminal: bool,
}

pub fn weyl_radius(s: &MomentSequence, z: &Complex, n_max: usize, policy: &PrecisionPolicy) -> Result<WeylRadii> {
    if z.im.is_zero() {
        return Err(Error::RealPoint);
    }
    let r = recurrence_coefficients(s, n_max, policy)?;
    let n = r.k_max.min(n_max);
    let sums = christoffel_sums(&r, z, n)?;
    let two_y = (&z.im + &z.im).abs();
    let radii = sums.iter().map(|x| (&two_y * x).recip()).collect();
    Ok(WeylRadii { z: z.clone(), radii, terminal: r.rank_deficient })
}

/// Distances d(n) = min ‖1 − (x+i)p‖ over deg p ≤ n.
pub fn riesz_determinacy(s: &MomentSequence, degrees: &[usize], policy: &PrecisionPolicy) -> Result<Vec<(usize, Real)>> {
    let m = x_plus_i();
    degrees
        .iter()
        .map(|&n| riesz_distance(s, &m, n, policy).map(|r| (n, r.distance)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Evidence {
    DeterminateEvidence,
    IndeterminateEvidence,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Signal {
    Determinate,
    Indeterminate,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Verdict1DConfig {
    pub z: WireComplex,
    pub weyl_n_max: usize,
    pub carleman_n_max: usize,
    pub riesz_degrees: Vec<usize>,
    /// Caps every criterion at this truncation when set.
    pub truncation: Option<usize>,
    pub series: SeriesConfig,
    /// Riesz distances below this (and decreasing) count as decay.
    pub riesz_threshold: f64,
    /// Relative change between the last two Riesz distances that counts as
    /// a plateau.
    pub riesz_plateau: f64,
    /// Last-quarter relative variation of ρ_n that counts as stabilized.
    pub weyl_stabilization: f64,
    /// ρ_n below this counts as collapse to zero.
    pub weyl_collapse: f64,
}

impl Default for Verdict1DConfig {
    fn default() -> Self {
        Verdict1DConfig {
            z: WireComplex::new(0.0, 1.0),
            weyl_n_max: 60,
            carleman_n_max: 100,
            riesz_degrees: vec![5, 10, 15, 20],
            truncation: None,
            series: SeriesConfig::default(),
            riesz_threshold: 0.05,
            riesz_plateau: 1e-3,
            weyl_stabilization: 1e-8,
            weyl_collapse: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylDiagnostic {
    pub z: WireComplex,
    /// ρ_0..ρ_n.
    pub radii: Vec<f64>,
    pub last_quarter_variation: f64,
    pub terminal: bool,
    pub signal: Signal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszDiagnostic {
    pub degrees: Vec<usize>,
    pub distances: Vec<f64>,
    pub signal: Signal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict1D {
    pub overall: Evidence,
    pub carleman: Option<SeriesDiagnostic>,
    pub weyl: Option<WeylDiagnostic>,
    pub riesz: Option<RieszDiagnostic>,
    /// Number of support points when the measure is finitely supported.
    pub finite_support: Option<usize>,
    pub notes: Vec<String>,
}

fn cap(v: usize, t: Option<usize>) -> usize {
    t.map_or(v, |t| v.min(t))
}

/// Largest n ≤ `want` for which the recurrence succeeds at this precision.
fn weyl_with_fallback(s: &MomentSequence, z: &Complex, want: usize, policy: &PrecisionPolicy, notes: &mut Vec<String>) -> Option<WeylRadii> {
    let mut n = want;
    loop {
        match weyl_radius(s, z, n, policy) {
            Ok(w) => return Some(w),
            Err(Error::IllConditioned(msg)) if n > 4 => {
                notes.push(format!("weyl: {msg}; retrying with n_max = {}", n * 3 / 4));
                n = n * 3 / 4;
            }
            Err(e) => {
                notes.push(format!("weyl: {e}"));
                return None;
            }
        }
    }
}

/// Combines Carleman, Weyl and Riesz evidence for a 1D sequence.
pub fn verdict_1d(s: &MomentSequence, cfg: &Verdict1DConfig, policy: &PrecisionPolicy) -> Verdict1D {
    let mut notes = Vec::new();
    let mut out = Verdict1D {
        overall: Evidence::Inconclusive,
        carleman: None,
        weyl: None,
        riesz: None,
        finite_support: None,
        notes: vec![],
    };
    if s.dim() != 1 {
        out.notes.push("sequence is not one-dimensional".into());
        return out;
    }
    let s = &s.normalized(policy.bits);
    let n_avail = s.max_order();

    // Carleman
    let cn = cap(cfg.carleman_n_max, cfg.truncation).min(n_avail / 2);
    match carleman_report(s, cn, &cfg.series, policy) {
        Ok(d) => out.carleman = Some(d),
        Err(e) => notes.push(format!("carleman: {e}")),
    }

    // Weyl
    let wn = cap(cfg.weyl_n_max, cfg.truncation).min((n_avail / 2).saturating_sub(1));
    let z = cfg.z.to_complex(policy.bits);
    if z.im.is_zero() {
        notes.push("weyl: evaluation point is real".into());
    } else if let Some(w) = weyl_with_fallback(s, &z, wn, policy, &mut notes) {
        let radii: Vec<f64> = w.radii.iter().map(|x| x.to_f64()).collect();
        let n = w.radii.len() - 1;
        let q = n * 3 / 4;
        let variation = Real::rel_diff(&w.radii[q], &w.radii[n]).to_f64();
        let last = radii[n];
        let signal = if w.terminal {
            out.finite_support = Some(n + 1);
            Signal::Determinate
        } else if last < cfg.weyl_collapse {
            Signal::Determinate
        } else if n + 1 >= cfg.series.min_terms && variation < cfg.weyl_stabilization && last > 0.0 {
            Signal::Indeterminate
        } else {
            Signal::None
        };
        out.weyl = Some(WeylDiagnostic { z: cfg.z, radii, last_quarter_variation: variation, terminal: w.terminal, signal });
    }

    // Riesz
    let rmax = cap(usize::MAX, cfg.truncation).min((n_avail / 2).saturating_sub(1));
    let mut degrees: Vec<usize> = cfg.riesz_degrees.iter().map(|&d| d.min(rmax)).collect();
    degrees.dedup();
    if !degrees.is_empty() {
        match riesz_determinacy(s, &degrees, policy) {
            Ok(v) => {
                let distances: Vec<f64> = v.iter().map(|(_, d)| d.to_f64()).collect();
                let k = distances.len();
                let decreasing = distances.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
                let last = distances[k - 1];
                let signal = if k >= 2 && last < cfg.riesz_threshold && decreasing {
                    Signal::Determinate
                } else if k >= 2
                    && last >= cfg.riesz_threshold
                    && (distances[k - 2] - last).abs() <= cfg.riesz_plateau * last
                {
                    Signal::Indeterminate
                } else {
                    Signal::None
                };
                out.riesz = Some(RieszDiagnostic { degrees, distances, signal });
            }
            Err(e) => notes.push(format!("riesz: {e}")),
        }
    }

    let carleman_div = out.carleman.as_ref().is_some_and(|c| c.classification == SeriesClass::DivergesLikely);
    let weyl = out.weyl.as_ref().map_or(Signal::None, |w| w.signal);
    let riesz = out.riesz.as_ref().map_or(Signal::None, |r| r.signal);
    out.overall = if out.finite_support.is_some() {
        Evidence::DeterminateEvidence
    } else if matches!(
        (weyl, riesz),
        (Signal::Determinate, Signal::Indeterminate) | (Signal::Indeterminate, Signal::Determinate)
    ) {
        notes.push("weyl and riesz disagree".into());
        Evidence::Inconclusive
    } else if carleman_div || riesz == Signal::Determinate {
        Evidence::DeterminateEvidence
    } else if weyl == Signal::Indeterminate && riesz == Signal::Indeterminate {
        Evidence::IndeterminateEvidence
    } else {
        Evidence::Inconclusive
    };
    out.notes = notes;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{compute_moments, parse_measure_spec};

    fn seq(id: &str, n: usize) -> MomentSequence {
        let spec = parse_measure_spec(&format!(r#"{{"kind":"catalog","catalog_id":"{id}"}}"#)).unwrap();
        compute_moments(&spec, n, &PrecisionPolicy::default()).unwrap()
    }

    #[test]
    fn constant_terms_diverge() {
        let s = MomentSequence::new_exact(1, 20, vec![dashu_ratio::RBig::ONE; 21], "delta at 1").unwrap();
        let c = carleman_report(&s, 10, &SeriesConfig::default(), &PrecisionPolicy::default()).unwrap();
        assert!((c.partial_sums[9] - 10.0).abs() < 1e-12);
        assert_eq!(c.classification, SeriesClass::DivergesLikely);
    }

    #[test]
    fn lognormal_geometric_terms() {
        let c = carleman_report(&seq("lognormal", 100), 50, &SeriesConfig::default(), &PrecisionPolicy::default()).unwrap();
        for (n, t) in c.terms.iter().enumerate() {
            assert!((t - (-(n as f64 + 1.0)).exp()).abs() < 1e-15);
        }
        assert_eq!(c.classification, SeriesClass::ConvergesLikely);
    }

    #[test]
    fn short_series_inconclusive() {
        let c = classify_series(vec![1.0, 0.5, 0.25], &SeriesConfig::default());
        assert_eq!(c.classification, SeriesClass::Inconclusive);
    }

    #[test]
    fn nonpositive_even_moment() {
        let s = MomentSequence::from_f64_1d(&[1.0, 0.0, -1.0, 0.0, 1.0], 256).unwrap();
        assert!(matches!(
            carleman_report(&s, 2, &SeriesConfig::default(), &PrecisionPolicy::default()),
            Err(Error::NonPositiveEvenMoment(2))
        ));
    }

    #[test]
    fn real_point_rejected() {
        let z = Complex::from_f64(1.0, 0.0, 256);
        assert!(matches!(weyl_radius(&seq("gaussian", 10), &z, 2, &PrecisionPolicy::default()), Err(Error::RealPoint)));
    }

    #[test]
    fn gaussian_radius_example() {
        let z = Complex::from_f64(0.0, 1.0, 256);
        let w = weyl_radius(&seq("gaussian", 10), &z, 2, &PrecisionPolicy::default()).unwrap();
        assert!((w.radii[2].to_f64() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn lognormal_truncated_is_inconclusive() {
        let cfg = Verdict1DConfig { truncation: Some(3), ..Default::default() };
        let v = verdict_1d(&seq("lognormal", 200), &cfg, &PrecisionPolicy::default());
        assert_eq!(v.overall, Evidence::Inconclusive);
    }
}

#[cfg(test)]
mod verdict_tests {
    use super::*;
    use crate::measures::{compute_moments, parse_measure_spec};

    fn verdict(id: &str) -> Verdict1D {
        let spec = parse_measure_spec(&format!(r#"{{"kind":"catalog","catalog_id":"{id}"}}"#)).unwrap();
        let s = compute_moments(&spec, 200, &PrecisionPolicy::default()).unwrap();
        verdict_1d(&s, &Verdict1DConfig::default(), &PrecisionPolicy::default())
    }

    #[test]
    fn catalog_verdicts() {
        for (id, want) in [
            ("gaussian", Evidence::DeterminateEvidence),
            ("lognormal", Evidence::IndeterminateEvidence),
            ("uniform", Evidence::DeterminateEvidence),
            ("exponential", Evidence::DeterminateEvidence),
        ] {
            let v = verdict(id);
            assert_eq!(v.overall, want, "{id}");
        }
    }
}
