use dashu_ratio::RBig;
use momentdet::determinacy1d::Evidence;
use momentdet::determinacy_md::*;
use momentdet::measures::*;
use momentdet::moment_core::PrecisionPolicy;

fn catalog(id: &str) -> String {
    format!(r#"{{"kind":"catalog","catalog_id":"{id}"}}"#)
}

fn product(ids: &[&str], n: usize) -> MomentSequence {
    let factors: Vec<String> = ids.iter().map(|id| catalog(id)).collect();
    let spec = parse_measure_spec(&format!(r#"{{"kind":"product","factors":[{}]}}"#, factors.join(","))).unwrap();
    compute_moments(&spec, n, &PrecisionPolicy::default()).unwrap()
}

fn one(id: &str, n: usize) -> MomentSequence {
    compute_moments(&parse_measure_spec(&catalog(id)).unwrap(), n, &PrecisionPolicy::default()).unwrap()
}

fn cfg() -> CheckConfig {
    CheckConfig::default()
}

#[test]
fn petersen_and_nussbaum_on_products() {
    let p = PrecisionPolicy::default();
    let gg = product(&["gaussian", "gaussian"], 48);
    assert_eq!(rule_petersen(&gg, &cfg(), &p).conclusion, Conclusion::DeterminateEvidence);
    assert_eq!(rule_nussbaum(&gg, &cfg(), &p).conclusion, Conclusion::DeterminateEvidence);
    let gl = product(&["gaussian", "lognormal"], 48);
    let pet = rule_petersen(&gl, &cfg(), &p);
    assert_eq!(pet.conclusion, Conclusion::Inconclusive);
    assert_eq!(pet.failing(), vec!["marginal x2"]);
    let nus = rule_nussbaum(&gl, &cfg(), &p);
    assert_eq!(nus.conclusion, Conclusion::Inconclusive);
    assert!(nus.notes.iter().any(|n| n.contains("moment sequence")));
    assert_eq!(rule_petersen(&one("gaussian", 40), &cfg(), &p).applicability, Applicability::NotApplicable);
    assert_eq!(rule_nussbaum(&one("gaussian", 200), &cfg(), &p).conclusion, Conclusion::DeterminateEvidence);
}

#[test]
fn bochner_taylor_needs_assertion() {
    let p = PrecisionPolicy::default();
    let e = one("exponential", 60);
    assert_eq!(rule_bochner_taylor(&e, &cfg(), &p).applicability, Applicability::NeedsAssertion);
    let mut c = cfg();
    c.assertions.support_nonnegative = true;
    let r = rule_bochner_taylor(&e, &c, &p);
    assert_eq!(r.conclusion, Conclusion::DeterminateEvidence);
    let r = rule_bochner_taylor(&one("lognormal", 60), &c, &p);
    assert_eq!(r.conclusion, Conclusion::Inconclusive);
}

#[test]
fn eskin_families() {
    let p = PrecisionPolicy::default();
    let gg = product(&["gaussian", "gaussian"], 48);
    let r = rule_eskin(&gg, &cfg(), &p);
    assert_eq!(r.conclusion, Conclusion::DeterminateEvidence);
    assert_eq!(r.sub_verdicts.len(), 5);
    assert!(!r.caveats.is_empty());
    assert_eq!(rule_eskin(&product(&["gaussian", "lognormal"], 48), &cfg(), &p).conclusion, Conclusion::Inconclusive);
    assert_eq!(rule_eskin_multi(&gg, &cfg(), &p).applicability, Applicability::NotApplicable);
}

#[test]
fn eskin_sequence_is_scaled_marginal() {
    let gg = product(&["gaussian", "gaussian"], 24);
    let m1 = marginal(&gg, 0).unwrap();
    let m2 = marginal(&gg, 1).unwrap();
    for k in 0..=3u32 {
        let seq = eskin_sequence(&gg, 0, &momentdet::multi_index::MultiIndex(vec![0, 2 * k]), 1).unwrap();
        let factor = m2.exact(&momentdet::multi_index::MultiIndex(vec![2 * k + 2])).unwrap()
            + m2.exact(&momentdet::multi_index::MultiIndex(vec![2 * k])).unwrap();
        for n in 0..=seq.max_order() {
            let a = momentdet::multi_index::MultiIndex(vec![n as u32]);
            assert_eq!(seq.exact(&a).unwrap(), &(m1.exact(&a).unwrap() * &factor));
        }
    }
}

#[test]
fn eskin_multi_in_three_dimensions() {
    let p = PrecisionPolicy::default();
    let g3 = product(&["gaussian", "gaussian", "gaussian"], 40);
    let r = rule_eskin_multi(&g3, &cfg(), &p);
    assert_eq!(r.conclusion, Conclusion::DeterminateEvidence, "{:?}", r.failing());
    let dispatched = rule_eskin(&g3, &cfg(), &p);
    assert_eq!(dispatched.id, RuleId::Eskin);
    assert_eq!(dispatched.conclusion, Conclusion::DeterminateEvidence);
}

#[test]
fn pushforward_rule() {
    let p = PrecisionPolicy::default();
    let gg = product(&["gaussian", "gaussian"], 48);
    assert_eq!(rule_pushforward(&gg, None, &cfg(), &p).applicability, Applicability::NeedsAssertion);
    let lin = PolynomialMap::parse(2, &["x1 + x2", "x1 - x2"], true).unwrap();
    assert_eq!(rule_pushforward(&gg, Some(&lin), &cfg(), &p).conclusion, Conclusion::DeterminateEvidence);
    let unasserted = PolynomialMap::parse(2, &["x1 + x2", "x1 - x2"], false).unwrap();
    assert_eq!(rule_pushforward(&gg, Some(&unasserted), &cfg(), &p).applicability, Applicability::NeedsAssertion);
    // The identity map reproduces the marginal verdicts exactly.
    let id = rule_pushforward(&gg, Some(&PolynomialMap::identity(2)), &cfg(), &p);
    let pet = rule_petersen(&gg, &cfg(), &p);
    for (a, b) in id.sub_verdicts.iter().zip(&pet.sub_verdicts) {
        assert_eq!(serde_json::to_string(&a.payload).unwrap(), serde_json::to_string(&b.payload).unwrap());
    }
}

#[test]
fn radial_rule() {
    let p = PrecisionPolicy::default();
    let gg = product(&["gaussian", "gaussian"], 48);
    let t = radial_sequence_of(&gg);
    for k in 0..=24u32 {
        let want = RBig::from(dashu_int::IBig::from(2u8).pow(k as usize)) * factorial(k);
        assert_eq!(t.exact(&momentdet::multi_index::MultiIndex(vec![k])).unwrap(), &want);
    }
    assert_eq!(rule_radial(&gg, &cfg(), &p).conclusion, Conclusion::DeterminateEvidence);
    let delta = compute_moments(&parse_measure_spec(r#"{"kind":"discrete","atoms":[[[0,0],1]]}"#).unwrap(), 20, &p).unwrap();
    assert_eq!(rule_radial(&delta, &cfg(), &p).conclusion, Conclusion::DeterminateEvidence);
    // s_n = e^{n²/2} in one variable, so the squared-norm sequence is t_k = e^{2k²}.
    let synth: Vec<_> = (0..=80i64)
        .map(|n| momentdet::arith::Real::from_rational(&RBig::from_parts((n * n).into(), 2u8.into()), 256).exp())
        .collect();
    let s = MomentSequence::new_float(1, 80, synth, "synthetic").unwrap();
    let r = rule_radial(&s, &cfg(), &p);
    assert_eq!(r.conclusion, Conclusion::Inconclusive);
    let SubPayload::Verdict(v) = &r.sub_verdicts[0].payload else { panic!() };
    assert_eq!(v.carleman.as_ref().unwrap().classification, momentdet::determinacy1d::SeriesClass::ConvergesLikely);
}

fn factorial(k: u32) -> RBig {
    (1..=k).fold(RBig::ONE, |a, i| a * RBig::from(dashu_int::IBig::from(i)))
}

fn radial_sequence_of(s: &MomentSequence) -> MomentSequence {
    let map = PolynomialMap::parse(s.dim(), &["x1^2 + x2^2"], false).unwrap();
    pushforward_moments(s, &map, s.max_order() / 2).unwrap()
}

#[test]
fn cylinder_rule() {
    let p = PrecisionPolicy::default();
    let ug = product(&["uniform", "gaussian"], 48);
    assert_eq!(rule_cylinder(&ug, &cfg(), &p).applicability, Applicability::NeedsAssertion);
    let mut c = cfg();
    c.assertions.compact_base_radius = Some(1.0);
    assert_eq!(rule_cylinder(&ug, &c, &p).conclusion, Conclusion::DeterminateEvidence);
    let gg = product(&["gaussian", "gaussian"], 48);
    assert_eq!(rule_cylinder(&gg, &c, &p).applicability, Applicability::NotApplicable);
}

#[test]
fn line_pencil_rule() {
    let p = PrecisionPolicy::default();
    let ee = product(&["exponential", "exponential"], 48);
    assert_eq!(rule_line_pencil(&ee, &cfg(), &p).applicability, Applicability::NeedsAssertion);
    let mut c = cfg();
    c.assertions.support_nonnegative = true;
    let r = rule_line_pencil(&ee, &c, &p);
    assert_eq!(r.sub_verdicts.len(), 8);
    assert_eq!(r.conclusion, Conclusion::DeterminateEvidence);
    assert!(!r.caveats.is_empty());
    // Direction e1 gives the first marginal.
    c.directions = Some(vec![vec![1.0, 0.0]]);
    let r = rule_line_pencil(&ee, &c, &p);
    let pet = rule_petersen(&ee, &cfg(), &p);
    assert_eq!(r.sub_verdicts[0].payload, pet.sub_verdicts[0].payload);
    assert_eq!(sample_directions(2, 3, 7), sample_directions(2, 3, 7));
}

#[test]
fn density_rule() {
    let p = PrecisionPolicy::default();
    let uu = product(&["uniform", "uniform"], 48);
    let r = rule_density(&uu, None, &cfg(), &p);
    assert_eq!(r.conclusion, Conclusion::DeterminateEvidence);
    let r = rule_density(&one("lognormal", 40), None, &cfg(), &p);
    assert_eq!(r.conclusion, Conclusion::Inconclusive);
    let f1 = momentdet::poly::parse_polynomial("1", 2).unwrap();
    assert_eq!(rule_density(&uu, Some(&f1), &cfg(), &p).applicability, Applicability::NeedsAssertion);
    let custom = momentdet::poly::parse_polynomial("2 + x1^2", 2).unwrap();
    assert_eq!(rule_density(&uu, Some(&custom), &cfg(), &p).applicability, Applicability::NeedsAssertion);
}

#[test]
fn combine_semantics() {
    let p = PrecisionPolicy::default();
    let s = one("gaussian", 10);
    let empty = combine("f".into(), &s, &cfg(), vec![]);
    assert_eq!(empty.overall, Evidence::Inconclusive);
    assert!(!empty.warnings.is_empty());
    let mut det = RuleEvidence::new(RuleId::Radial);
    det.conclusion = Conclusion::DeterminateEvidence;
    let rep = combine("f".into(), &s, &cfg(), vec![RuleEvidence::new(RuleId::Petersen), det]);
    assert_eq!(rep.overall, Evidence::DeterminateEvidence);
    assert_eq!(rep.rules[0].id, RuleId::Petersen);

    let mut c = cfg();
    c.rules = vec!["all-1d".into()];
    let rep = run_check(&one("lognormal", 200), &c, &p).unwrap();
    assert_eq!(rep.overall, Evidence::IndeterminateEvidence);
    let gl = product(&["gaussian", "lognormal"], 48);
    c.rules = vec!["all".into()];
    let rep = run_check(&gl, &c, &p).unwrap();
    assert_eq!(rep.overall, Evidence::Inconclusive);
}

#[test]
fn rule_selection() {
    assert_eq!(select_rules(&["petersen".into(), "nussbaum".into()]).unwrap(), vec![RuleId::Nussbaum, RuleId::Petersen]);
    assert_eq!(select_rules(&["all".into()]).unwrap().len(), RuleId::ALL.len());
    assert!(select_rules(&["nope".into()]).is_err());
}
