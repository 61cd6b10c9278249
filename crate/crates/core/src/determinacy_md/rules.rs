use dashu_int::IBig;
use dashu_ratio::RBig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CheckConfig, RuleEvidence, RuleId, SubPayload, SubVerdict};
use crate::arith::{f64_to_rational, Real};
use crate::determinacy1d::{carleman_report, classify_series, verdict_1d, SeriesClass, SeriesDiagnostic};
use crate::error::{Error, Result};
use crate::measures::{marginal, pushforward_moments, MomentSequence, MomentValue, PolynomialMap};
use crate::moment_core::{riesz_distance, PolynomialExpr, PrecisionPolicy};
use crate::multi_index::{monomials_of_degree, MultiIndex};
use crate::poly::Polynomial;

fn verdict_of(s: &MomentSequence, label: impl Into<String>, cfg: &CheckConfig, policy: &PrecisionPolicy) -> SubVerdict {
    SubVerdict::verdict(label, verdict_1d(s, &cfg.verdict, policy))
}

fn series_sub(label: impl Into<String>, d: SeriesDiagnostic) -> SubVerdict {
    SubVerdict { label: label.into(), passed: d.classification == SeriesClass::DivergesLikely, payload: SubPayload::Series(d) }
}

fn carleman_cap(s: &MomentSequence, cfg: &CheckConfig) -> usize {
    let mut n = cfg.verdict.carleman_n_max.min(s.max_order() / 2);
    if let Some(t) = cfg.verdict.truncation {
        n = n.min(t);
    }
    n
}

/// Combined 1D verdict on a one-dimensional sequence.
pub fn rule_verdict_1d(s: &MomentSequence, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    if s.dim() != 1 {
        return RuleEvidence::not_applicable(RuleId::Verdict1d, "sequence is not one-dimensional");
    }
    let mut r = RuleEvidence::new(RuleId::Verdict1d);
    r.sub_verdicts.push(verdict_of(s, "sequence", cfg, policy));
    r.conclude_all()
}

/// All marginals determinate.
pub fn rule_petersen(s: &MomentSequence, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    if s.dim() < 2 {
        return RuleEvidence::not_applicable(RuleId::Petersen, "needs at least two variables");
    }
    let mut r = RuleEvidence::new(RuleId::Petersen);
    for j in 0..s.dim() {
        let m = marginal(s, j).expect("axis in range");
        r.sub_verdicts.push(verdict_of(&m, format!("marginal x{}", j + 1), cfg, policy));
    }
    r.conclude_all()
}

/// Carleman's condition on every marginal.
pub fn rule_nussbaum(s: &MomentSequence, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    let mut r = RuleEvidence::new(RuleId::Nussbaum);
    let d = s.dim();
    let n_max = carleman_cap(s, cfg);
    for j in 0..d {
        let m = marginal(s, j).expect("axis in range");
        match carleman_report(&m, n_max, &cfg.verdict.series, policy) {
            Ok(c) => r.sub_verdicts.push(series_sub(format!("carleman x{}", j + 1), c)),
            Err(e) => {
                r.notes.push(format!("carleman x{}: {e}", j + 1));
                r.sub_verdicts.push(SubVerdict {
                    label: format!("carleman x{}", j + 1),
                    passed: false,
                    payload: SubPayload::Check { detail: e.to_string() },
                });
            }
        }
    }
    if d >= 2 && r.sub_verdicts[..d - 1].iter().all(|v| v.passed) {
        r.notes.push("first d-1 marginals satisfy Carleman's condition: the sequence is a moment sequence".into());
    }
    r.conclude_all()
}

fn root_term(sum: &Real, k: usize, exponent_den: usize) -> f64 {
    if sum.is_zero() {
        return f64::INFINITY;
    }
    (sum.ln() / Real::from_i64(-(exponent_den as i64) * k as i64, sum.bits())).exp().to_f64()
}

fn classify_with_infinite(terms: Vec<f64>, cfg: &CheckConfig) -> SeriesDiagnostic {
    let infinite = terms.iter().any(|t| t.is_infinite());
    let mut d = classify_series(terms, &cfg.verdict.series);
    if infinite {
        d.classification = SeriesClass::DivergesLikely;
    }
    d
}

fn multinomial(a: &MultiIndex) -> IBig {
    let mut acc = IBig::ONE;
    let mut total = 0u64;
    for &e in &a.0 {
        for i in 1..=e as u64 {
            total += 1;
            acc = acc * IBig::from(total) / IBig::from(i);
        }
    }
    acc
}

/// Quasi-analyticity sums for measures on the positive orthant:
/// Σ_k [Σ_{|α|=k} s_α²]^{−1/2k} and Σ_k [Σ_{|α|=k} (k α) s_{2α}]^{−1/k}.
pub fn rule_bochner_taylor(s: &MomentSequence, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    if !cfg.assertions.support_nonnegative {
        return RuleEvidence::needs_assertion(RuleId::BochnerTaylor, "support in the positive orthant must be asserted");
    }
    let mut r = RuleEvidence::new(RuleId::BochnerTaylor);
    r.assertions.push("support in the positive orthant".into());
    let bits = policy.bits;
    let d = s.dim();
    let s0 = s.s0().to_real(bits);
    if !s0.is_positive() {
        r.notes.push("s0 is not positive".into());
        return r;
    }
    let value = |a: &MultiIndex| s.real(a, bits).expect("within order") / &s0;
    let cap = s.max_order().min(cfg.verdict.truncation.unwrap_or(usize::MAX));
    let main: Vec<f64> = (1..=cap)
        .map(|k| {
            let sum = monomials_of_degree(d, k).iter().fold(Real::zero(bits), |acc, a| {
                let v = value(a);
                acc + &v * &v
            });
            root_term(&sum, k, 2)
        })
        .collect();
    let corollary: Vec<f64> = (1..=cap / 2)
        .map(|k| {
            let sum = monomials_of_degree(d, k).iter().fold(Real::zero(bits), |acc, a| {
                acc + Real::from_int(&multinomial(a), bits) * value(&a.scale(2))
            });
            root_term(&sum, k, 1)
        })
        .collect();
    let main = classify_with_infinite(main, cfg);
    let corollary = classify_with_infinite(corollary, cfg);
    let any = main.classification == SeriesClass::DivergesLikely || corollary.classification == SeriesClass::DivergesLikely;
    r.sub_verdicts.push(series_sub("sum of squared moments", main));
    r.sub_verdicts.push(series_sub("multinomial sum", corollary));
    if any {
        r.conclusion = super::Conclusion::DeterminateEvidence;
        r.notes.push("determinate on the positive orthant".into());
    }
    r
}

/// n ↦ s_{β + n e_axis + 2 e_bump} + s_{β + n e_axis}, with β_axis = 0.
pub fn eskin_sequence(s: &MomentSequence, axis: usize, base: &MultiIndex, bump: usize) -> Result<MomentSequence> {
    let d = s.dim();
    if axis >= d || bump >= d || base.dim() != d || base.0[axis] != 0 {
        return Err(Error::Invariant("invalid Eskin index".into()));
    }
    let top = base.degree() + 2;
    if top > s.max_order() {
        return Err(Error::DegreeOverflow { needed: top, available: s.max_order() });
    }
    let bits = s.bits().max(64);
    let values = (0..=s.max_order() - top)
        .map(|n| {
            let lo = base.add(&MultiIndex::unit(d, axis, n as u32));
            let hi = lo.add(&MultiIndex::unit(d, bump, 2));
            let a = s.get(&hi).expect("within order");
            a.add(&s.get(&lo).expect("within order"), bits)
        })
        .collect::<Vec<MomentValue>>();
    MomentSequence::from_values_1d(values, bits, format!("eskin sequence of {}", s.provenance))
}

fn label_index(base: &MultiIndex, axis: usize) -> String {
    let parts: Vec<String> = base.0.iter().enumerate().map(|(i, e)| if i == axis { "n".into() } else { e.to_string() }).collect();
    format!("({})", parts.join(","))
}

fn eskin_family(
    r: &mut RuleEvidence,
    s: &MomentSequence,
    axis: usize,
    bump: usize,
    base: MultiIndex,
    cfg: &CheckConfig,
    policy: &PrecisionPolicy,
) {
    let label = format!("{} + bump x{}", label_index(&base, axis), bump + 1);
    if base.degree() + 2 + cfg.min_subsequence_order > s.max_order() {
        r.caveats.push(format!("{label} skipped: not enough moments"));
        return;
    }
    match eskin_sequence(s, axis, &base, bump) {
        Ok(seq) => r.sub_verdicts.push(verdict_of(&seq, label, cfg, policy)),
        Err(e) => r.notes.push(format!("{label}: {e}")),
    }
}

/// Two variables: the sequences {s_(n,2k+2) + s_(n,2k)} for k ≤ k_max and
/// the last marginal.
pub fn rule_eskin(s: &MomentSequence, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    match s.dim() {
        2 => {}
        d if d >= 3 => {
            let mut r = rule_eskin_multi(s, cfg, policy);
            r.id = RuleId::Eskin;
            r.notes.push("dispatched to the d >= 3 variant".into());
            return r;
        }
        _ => return RuleEvidence::not_applicable(RuleId::Eskin, "needs at least two variables"),
    }
    let mut r = RuleEvidence::new(RuleId::Eskin);
    for k in 0..=cfg.eskin_k_max {
        eskin_family(&mut r, s, 0, 1, MultiIndex(vec![0, 2 * k as u32]), cfg, policy);
    }
    r.caveats.push(format!("only k = 0..={} tested", cfg.eskin_k_max));
    let last = marginal(s, 1).expect("axis in range");
    r.sub_verdicts.push(verdict_of(&last, "marginal x2", cfg, policy));
    r.conclude_all()
}

/// Even multi-indices on `free` axes with entries ≤ cap.
fn even_tuples(d: usize, free: &[usize], cap: u32) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::zero(d)];
    for &ax in free {
        out = out
            .into_iter()
            .flat_map(|b| {
                (0..=cap / 2).map(move |k| {
                    let mut c = b.clone();
                    c.0[ax] = 2 * k;
                    c
                })
            })
            .collect();
    }
    out
}

/// d ≥ 3: the families with n on axis j and the last axis bumped, plus for
/// each pair j < l < d the families with axis l bumped.
pub fn rule_eskin_multi(s: &MomentSequence, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    let d = s.dim();
    if d < 3 {
        return RuleEvidence::not_applicable(RuleId::EskinMulti, "needs at least three variables");
    }
    let mut r = RuleEvidence::new(RuleId::EskinMulti);
    let cap = cfg.eskin_multi_k_max as u32;
    for j in 0..d - 1 {
        let free: Vec<usize> = (0..d).filter(|&i| i != j).collect();
        for base in even_tuples(d, &free, cap) {
            eskin_family(&mut r, s, j, d - 1, base, cfg, policy);
        }
    }
    for j in 0..d - 1 {
        for l in j + 1..d - 1 {
            let free: Vec<usize> = (0..d).filter(|&i| i != j).collect();
            for base in even_tuples(d, &free, cap) {
                eskin_family(&mut r, s, j, l, base, cfg, policy);
            }
        }
    }
    r.caveats.push(format!("only even k_i <= {cap} tested"));
    let last = marginal(s, d - 1).expect("axis in range");
    r.sub_verdicts.push(verdict_of(&last, format!("marginal x{d}"), cfg, policy));
    r.conclude_all()
}

fn component_sequence(s: &MomentSequence, map: &PolynomialMap, k: usize) -> Result<MomentSequence> {
    let comp = PolynomialMap::new(map.source_dim, vec![map.components[k].clone()], false)?;
    let deg = comp.max_degree().max(1);
    pushforward_moments(s, &comp, s.max_order() / deg)
}

/// Injective polynomial map whose components all have determinate images.
pub fn rule_pushforward(s: &MomentSequence, map: Option<&PolynomialMap>, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    let Some(map) = map else {
        return RuleEvidence::needs_assertion(RuleId::Pushforward, "no polynomial map supplied");
    };
    if !map.injectivity_asserted {
        return RuleEvidence::needs_assertion(RuleId::Pushforward, "injectivity of the map must be asserted");
    }
    if map.source_dim != s.dim() {
        return RuleEvidence::not_applicable(RuleId::Pushforward, "map source dimension differs from the sequence");
    }
    let mut r = RuleEvidence::new(RuleId::Pushforward);
    r.assertions.push("map is injective on the support".into());
    for k in 0..map.target_dim() {
        let label = format!("component {}", crate::poly::format_rational_polynomial(&map.components[k]));
        match component_sequence(s, map, k) {
            Ok(t) => r.sub_verdicts.push(verdict_of(&t, label, cfg, policy)),
            Err(e) => {
                r.notes.push(format!("{label}: {e}"));
                r.sub_verdicts.push(SubVerdict { label, passed: false, payload: SubPayload::Check { detail: e.to_string() } });
            }
        }
    }
    r.conclude_all()
}

/// Image under |x|²: t_k = L((x₁² + … + x_d²)^k).
pub fn radial_sequence(s: &MomentSequence) -> Result<MomentSequence> {
    let d = s.dim();
    let mut p = Polynomial::zero(d);
    for j in 0..d {
        p.add_term(MultiIndex::unit(d, j, 2), RBig::ONE);
    }
    let map = PolynomialMap::new(d, vec![p], false)?;
    pushforward_moments(s, &map, s.max_order() / 2)
}

pub fn rule_radial(s: &MomentSequence, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    let mut r = RuleEvidence::new(RuleId::Radial);
    match radial_sequence(s) {
        Ok(t) => r.sub_verdicts.push(verdict_of(&t, "squared norm", cfg, policy)),
        Err(e) => {
            r.notes.push(e.to_string());
            return r;
        }
    }
    r.conclude_all()
}

/// Compact base in the first d−1 coordinates and a determinate last marginal.
pub fn rule_cylinder(s: &MomentSequence, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    let d = s.dim();
    if d < 2 {
        return RuleEvidence::not_applicable(RuleId::Cylinder, "needs at least two variables");
    }
    let Some(radius) = cfg.assertions.compact_base_radius else {
        return RuleEvidence::needs_assertion(RuleId::Cylinder, "a compact base radius must be asserted");
    };
    let bits = policy.bits;
    let s0 = s.s0().to_real(bits);
    let bound = radius * (1.0 + cfg.cylinder_tol);
    for j in 0..d - 1 {
        for n in 1..=s.max_order() / 2 {
            let v = s.real(&MultiIndex::unit(d, j, 2 * n as u32), bits).expect("within order") / &s0;
            if !v.is_positive() {
                continue;
            }
            let root = (v.ln() / Real::from_i64(2 * n as i64, bits)).exp().to_f64();
            if root > bound {
                return RuleEvidence::not_applicable(
                    RuleId::Cylinder,
                    format!("(s_{{2n e{}}})^(1/2n) = {root:.6} exceeds R = {radius} at n = {n}", j + 1),
                );
            }
        }
    }
    let mut r = RuleEvidence::new(RuleId::Cylinder);
    r.assertions.push(format!("first {} coordinates supported in a ball of radius {radius}", d - 1));
    let last = marginal(s, d - 1).expect("axis in range");
    r.sub_verdicts.push(verdict_of(&last, format!("marginal x{d}"), cfg, policy));
    let mut r = r.conclude_all();
    if r.conclusion == super::Conclusion::DeterminateEvidence {
        r.notes.push("ultradeterminate".into());
    }
    r
}

/// ℓ1-normalized directions with integer weights 1..=16 before normalization.
pub fn sample_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<RBig>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let w: Vec<i64> = (0..d).map(|_| rng.gen_range(1..=16)).collect();
            let total: i64 = w.iter().sum();
            w.iter().map(|&x| RBig::from_parts(IBig::from(x), dashu_int::UBig::from(total as u64))).collect()
        })
        .collect()
}

fn explicit_directions(dirs: &[Vec<f64>], d: usize) -> Result<Vec<Vec<RBig>>> {
    dirs.iter()
        .map(|a| {
            if a.len() != d || a.iter().any(|x| !(*x >= 0.0)) || a.iter().all(|x| *x == 0.0) {
                return Err(Error::Schema(format!("direction {a:?} must have {d} nonnegative entries, not all zero")));
            }
            let total: f64 = a.iter().sum();
            a.iter()
                .map(|x| f64_to_rational(x / total).ok_or_else(|| Error::Schema("non-finite direction".into())))
                .collect()
        })
        .collect()
}

/// Images under x ↦ a·x for finitely many directions a.
pub fn rule_line_pencil(s: &MomentSequence, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    if !cfg.assertions.support_nonnegative {
        return RuleEvidence::needs_assertion(RuleId::LinePencil, "support in the positive orthant must be asserted");
    }
    let d = s.dim();
    let dirs = match &cfg.directions {
        Some(v) => match explicit_directions(v, d) {
            Ok(v) => v,
            Err(e) => return RuleEvidence::not_applicable(RuleId::LinePencil, e.to_string()),
        },
        None => sample_directions(d, cfg.pencil_directions, cfg.seed),
    };
    let mut r = RuleEvidence::new(RuleId::LinePencil);
    r.assertions.push("support in the positive orthant".into());
    r.caveats.push(format!("{} of uncountably many directions tested", dirs.len()));
    for a in dirs {
        let mut p = Polynomial::zero(d);
        for (j, c) in a.iter().enumerate() {
            p.add_term(MultiIndex::unit(d, j, 1), c.clone());
        }
        let label = format!(
            "direction ({})",
            a.iter().map(|c| format!("{}/{}", c.numerator(), c.denominator())).collect::<Vec<_>>().join(",")
        );
        let seq = PolynomialMap::new(d, vec![p], false).and_then(|m| pushforward_moments(s, &m, s.max_order()));
        match seq {
            Ok(t) => r.sub_verdicts.push(verdict_of(&t, label, cfg, policy)),
            Err(e) => r.notes.push(format!("{label}: {e}")),
        }
    }
    r.conclude_all()
}

/// 1 + Σ x_i².
pub fn canonical_weight(d: usize) -> Polynomial<RBig> {
    let mut p = Polynomial::constant(d, RBig::ONE);
    for j in 0..d {
        p.add_term(MultiIndex::unit(d, j, 2), RBig::ONE);
    }
    p
}

/// Closure distances m(n) = min ‖1 − f·p‖ over deg p ≤ n.
pub fn rule_density(s: &MomentSequence, f: Option<&Polynomial<RBig>>, cfg: &CheckConfig, policy: &PrecisionPolicy) -> RuleEvidence {
    let d = s.dim();
    let canonical = canonical_weight(d);
    let f = f.unwrap_or(&canonical);
    if f.dim != d {
        return RuleEvidence::not_applicable(RuleId::Density, "weight dimension differs from the sequence");
    }
    if f.is_constant() {
        return RuleEvidence::needs_assertion(RuleId::Density, "a constant weight does not separate points");
    }
    let mut r = RuleEvidence::new(RuleId::Density);
    if *f != canonical {
        if !cfg.assertions.density_weight {
            return RuleEvidence::needs_assertion(RuleId::Density, "f >= 1 and point separation must be asserted");
        }
        r.assertions.push("f >= 1 on the support and separates points".into());
    }
    let m = PolynomialExpr::from_rational(f);
    let degrees: Vec<usize> =
        cfg.density_degrees.iter().copied().filter(|&n| 2 * (f.degree() + n) <= s.max_order()).collect();
    let mut distances = Vec::new();
    for &n in &degrees {
        match riesz_distance(s, &m, n, policy) {
            Ok(v) => distances.push(v.distance.to_f64()),
            Err(e) => {
                r.notes.push(format!("degree {n}: {e}"));
                break;
            }
        }
    }
    let degrees = degrees[..distances.len()].to_vec();
    if distances.len() < cfg.density_degrees.len() {
        r.caveats.push(format!("degree ladder truncated to {degrees:?}"));
    }
    let decreasing = distances.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let passed = distances.len() >= 2 && decreasing && distances.last().is_some_and(|&x| x < cfg.density_threshold);
    r.sub_verdicts.push(SubVerdict { label: "weighted closure distance".into(), passed, payload: SubPayload::Distances { degrees, distances } });
    r.conclude_all()
}
