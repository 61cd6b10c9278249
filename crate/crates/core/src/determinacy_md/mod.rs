//! Multivariate determinacy rules. Every rule is a sufficient condition, so
//! the engine only ever concludes determinacy at d ≥ 2.

mod rules;

use serde::{Deserialize, Serialize};

pub use rules::{
    eskin_sequence, rule_bochner_taylor, rule_cylinder, rule_density, rule_eskin, rule_eskin_multi, rule_line_pencil,
    radial_sequence, rule_nussbaum, rule_petersen, rule_pushforward, rule_radial, rule_verdict_1d, sample_directions,
};

use crate::determinacy1d::{Evidence, SeriesDiagnostic, Verdict1D, Verdict1DConfig};
use crate::error::{Error, Result};
use crate::measures::{MomentSequence, PolynomialMap};
use crate::moment_core::PrecisionPolicy;
use crate::orthopoly::fingerprint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    BochnerTaylor,
    Cylinder,
    Density,
    Eskin,
    EskinMulti,
    LinePencil,
    Nussbaum,
    Petersen,
    Pushforward,
    Radial,
    Verdict1d,
}

impl RuleId {
    pub const ALL: [RuleId; 11] = [
        RuleId::BochnerTaylor,
        RuleId::Cylinder,
        RuleId::Density,
        RuleId::Eskin,
        RuleId::EskinMulti,
        RuleId::LinePencil,
        RuleId::Nussbaum,
        RuleId::Petersen,
        RuleId::Pushforward,
        RuleId::Radial,
        RuleId::Verdict1d,
    ];

    /// Rules that make sense for a single variable.
    pub const ONE_DIMENSIONAL: [RuleId; 6] = [
        RuleId::BochnerTaylor,
        RuleId::Density,
        RuleId::Nussbaum,
        RuleId::Pushforward,
        RuleId::Radial,
        RuleId::Verdict1d,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::BochnerTaylor => "bochner_taylor",
            RuleId::Cylinder => "cylinder",
            RuleId::Density => "density",
            RuleId::Eskin => "eskin",
            RuleId::EskinMulti => "eskin_multi",
            RuleId::LinePencil => "line_pencil",
            RuleId::Nussbaum => "nussbaum",
            RuleId::Petersen => "petersen",
            RuleId::Pushforward => "pushforward",
            RuleId::Radial => "radial",
            RuleId::Verdict1d => "verdict_1d",
        }
    }

    pub fn parse(name: &str) -> Option<RuleId> {
        let n = name.trim().to_ascii_lowercase().replace('-', "_");
        RuleId::ALL.into_iter().find(|r| r.as_str() == n)
    }
}

/// Expands a rule list; `all` and `all-1d` are accepted as groups.
pub fn select_rules(names: &[String]) -> Result<Vec<RuleId>> {
    let mut out = Vec::new();
    for name in names {
        match name.trim() {
            "all" => out.extend(RuleId::ALL),
            "all-1d" | "all_1d" => out.extend(RuleId::ONE_DIMENSIONAL),
            other => out.push(RuleId::parse(other).ok_or_else(|| Error::Schema(format!("unknown rule {other:?}")))?),
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Applicability {
    Applies,
    NotApplicable,
    NeedsAssertion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Conclusion {
    DeterminateEvidence,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubPayload {
    Verdict(Verdict1D),
    Series(SeriesDiagnostic),
    Distances { degrees: Vec<usize>, distances: Vec<f64> },
    Check { detail: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubVerdict {
    pub label: String,
    /// Whether this sub-check reached the state the rule requires.
    pub passed: bool,
    #[serde(flatten)]
    pub payload: SubPayload,
}

impl SubVerdict {
    pub fn verdict(label: impl Into<String>, v: Verdict1D) -> Self {
        SubVerdict { label: label.into(), passed: v.overall == Evidence::DeterminateEvidence, payload: SubPayload::Verdict(v) }
    }

    pub fn as_verdict(&self) -> Option<&Verdict1D> {
        match &self.payload {
            SubPayload::Verdict(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleEvidence {
    pub id: RuleId,
    pub applicability: Applicability,
    pub conclusion: Conclusion,
    pub sub_verdicts: Vec<SubVerdict>,
    /// User assertions this rule relied on.
    pub assertions: Vec<String>,
    /// Finite-enumeration caveats (sampled directions, truncated index ranges).
    pub caveats: Vec<String>,
    pub notes: Vec<String>,
}

impl RuleEvidence {
    pub fn new(id: RuleId) -> Self {
        RuleEvidence {
            id,
            applicability: Applicability::Applies,
            conclusion: Conclusion::Inconclusive,
            sub_verdicts: vec![],
            assertions: vec![],
            caveats: vec![],
            notes: vec![],
        }
    }

    pub fn not_applicable(id: RuleId, why: impl Into<String>) -> Self {
        let mut r = Self::new(id);
        r.applicability = Applicability::NotApplicable;
        r.notes.push(why.into());
        r
    }

    pub fn needs_assertion(id: RuleId, what: impl Into<String>) -> Self {
        let mut r = Self::new(id);
        r.applicability = Applicability::NeedsAssertion;
        r.notes.push(what.into());
        r
    }

    /// Labels of sub-checks that did not reach their required state.
    pub fn failing(&self) -> Vec<&str> {
        self.sub_verdicts.iter().filter(|v| !v.passed).map(|v| v.label.as_str()).collect()
    }

    /// Concludes determinacy iff every sub-check passed.
    fn conclude_all(mut self) -> Self {
        if self.applicability == Applicability::Applies
            && !self.sub_verdicts.is_empty()
            && self.sub_verdicts.iter().all(|v| v.passed)
        {
            self.conclusion = Conclusion::DeterminateEvidence;
        }
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MapAssertion {
    pub components: Vec<String>,
    pub injective: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Assertions {
    /// Support lies in the closed positive orthant.
    pub support_nonnegative: bool,
    /// The first d−1 coordinates are supported in a ball of this radius.
    pub compact_base_radius: Option<f64>,
    /// A custom density weight satisfies f ≥ 1 and separates points.
    pub density_weight: bool,
    pub map: Option<MapAssertion>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    pub rules: Vec<String>,
    pub verdict: Verdict1DConfig,
    pub assertions: Assertions,
    /// Eskin: k = 0..=eskin_k_max in dimension two.
    pub eskin_k_max: usize,
    /// Eskin, d ≥ 3: even k_i ≤ this bound.
    pub eskin_multi_k_max: usize,
    /// Sub-sequences shorter than this are skipped (with a caveat).
    pub min_subsequence_order: usize,
    pub pencil_directions: usize,
    /// Explicit pencil directions; sampled from `seed` when absent.
    pub directions: Option<Vec<Vec<f64>>>,
    pub seed: u64,
    /// Weight f for the density rule; 1 + Σ x_i² when absent.
    pub density_f: Option<String>,
    pub density_degrees: Vec<usize>,
    pub density_threshold: f64,
    /// Relative slack in the compact-base plausibility check.
    pub cylinder_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            rules: vec!["all".into()],
            verdict: Verdict1DConfig::default(),
            assertions: Assertions::default(),
            eskin_k_max: 3,
            eskin_multi_k_max: 2,
            min_subsequence_order: 16,
            pencil_directions: 8,
            directions: None,
            seed: 0,
            density_f: None,
            density_degrees: vec![2, 4, 6, 8, 10],
            density_threshold: 0.05,
            cylinder_tol: 1e-6,
        }
    }
}

impl CheckConfig {
    pub fn map(&self, d: usize) -> Result<Option<PolynomialMap>> {
        self.assertions
            .map
            .as_ref()
            .map(|m| {
                let comps: Vec<&str> = m.components.iter().map(String::as_str).collect();
                PolynomialMap::parse(d, &comps, m.injective)
            })
            .transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub fingerprint: String,
    pub dimension: usize,
    pub max_order: usize,
    pub config: CheckConfig,
    pub rules: Vec<RuleEvidence>,
    pub overall: Evidence,
    pub warnings: Vec<String>,
}

/// OR over rules. An indeterminacy verdict is only possible in one variable,
/// and only from the combined 1D verdict.
pub fn combine(fingerprint: String, s: &MomentSequence, config: &CheckConfig, mut rules: Vec<RuleEvidence>) -> EvidenceReport {
    rules.sort_by_key(|r| r.id);
    let mut warnings = vec![];
    if rules.is_empty() {
        warnings.push("no rules were run".to_string());
    }
    let overall = if rules.iter().any(|r| r.conclusion == Conclusion::DeterminateEvidence) {
        Evidence::DeterminateEvidence
    } else if s.dim() == 1
        && rules
            .iter()
            .filter(|r| r.id == RuleId::Verdict1d)
            .flat_map(|r| r.sub_verdicts.iter().filter_map(SubVerdict::as_verdict))
            .any(|v| v.overall == Evidence::IndeterminateEvidence)
    {
        Evidence::IndeterminateEvidence
    } else {
        Evidence::Inconclusive
    };
    EvidenceReport {
        fingerprint,
        dimension: s.dim(),
        max_order: s.max_order(),
        config: config.clone(),
        rules,
        overall,
        warnings,
    }
}

/// Runs the selected rules and combines them.
pub fn run_check(s: &MomentSequence, config: &CheckConfig, policy: &PrecisionPolicy) -> Result<EvidenceReport> {
    let ids = select_rules(&config.rules)?;
    let map = config.map(s.dim())?;
    let density = config
        .density_f
        .as_deref()
        .map(|f| crate::poly::parse_polynomial(f, s.dim()))
        .transpose()?;
    let evidence = ids
        .iter()
        .map(|id| match id {
            RuleId::BochnerTaylor => rule_bochner_taylor(s, config, policy),
            RuleId::Cylinder => rule_cylinder(s, config, policy),
            RuleId::Density => rule_density(s, density.as_ref(), config, policy),
            RuleId::Eskin => rule_eskin(s, config, policy),
            RuleId::EskinMulti => rule_eskin_multi(s, config, policy),
            RuleId::LinePencil => rule_line_pencil(s, config, policy),
            RuleId::Nussbaum => rule_nussbaum(s, config, policy),
            RuleId::Petersen => rule_petersen(s, config, policy),
            RuleId::Pushforward => rule_pushforward(s, map.as_ref(), config, policy),
            RuleId::Radial => rule_radial(s, config, policy),
            RuleId::Verdict1d => rule_verdict_1d(s, config, policy),
        })
        .collect();
    Ok(combine(fingerprint(s), s, config, evidence))
}
