//! Declarative measure specifications and their JSON form.

use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use serde_json::{json, Map, Value};

use super::catalog::CatalogFamily;
use crate::error::{Error, Result};
use crate::poly::{format_rational_polynomial, parse_polynomial, Polynomial};

/// Polynomial map ℝᵈ → ℝᵐ with rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialMap {
    pub source_dim: usize,
    pub components: Vec<Polynomial<RBig>>,
    pub injectivity_asserted: bool,
}

impl PolynomialMap {
    pub fn new(source_dim: usize, components: Vec<Polynomial<RBig>>, injectivity_asserted: bool) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Schema("map needs at least one component".into()));
        }
        if components.iter().any(|c| c.dim != source_dim) {
            return Err(Error::Dimension("map component dimension differs from source".into()));
        }
        Ok(PolynomialMap { source_dim, components, injectivity_asserted })
    }

    /// Parses components written in `x1..xd`.
    pub fn parse(source_dim: usize, components: &[&str], injectivity_asserted: bool) -> Result<Self> {
        let comps = components
            .iter()
            .map(|c| parse_polynomial(c, source_dim))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source_dim, comps, injectivity_asserted)
    }

    pub fn identity(d: usize) -> Self {
        let comps = (0..d).map(|i| Polynomial::variable(d, i, RBig::ONE)).collect();
        PolynomialMap { source_dim: d, components: comps, injectivity_asserted: true }
    }

    /// Coordinate projection onto axis `j` (0-based).
    pub fn coordinate(d: usize, j: usize) -> Self {
        PolynomialMap {
            source_dim: d,
            components: vec![Polynomial::variable(d, j, RBig::ONE)],
            injectivity_asserted: false,
        }
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn max_degree(&self) -> usize {
        self.components.iter().map(|c| c.degree()).max().unwrap_or(0)
    }

    pub fn eval_rational(&self, x: &[RBig]) -> Vec<RBig> {
        self.components.iter().map(|c| c.eval_rational(x)).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "components": self.components.iter().map(format_rational_polynomial).collect::<Vec<_>>(),
            "injectivity_asserted": self.injectivity_asserted,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: Vec<RBig>,
    pub weight: RBig,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    Discrete { atoms: Vec<Atom> },
    Catalog(CatalogFamily),
    Product { factors: Vec<MeasureSpec> },
    Pushforward { base: Box<MeasureSpec>, map: PolynomialMap },
}

/// Largest ambient dimension a specification may have.
pub const MAX_DIMENSION: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpec {
    pub dimension: usize,
    pub kind: MeasureKind,
}

impl MeasureSpec {
    pub fn discrete(atoms: Vec<Atom>) -> Result<Self> {
        let dimension = atoms
            .first()
            .map(|a| a.point.len())
            .ok_or_else(|| Error::Invariant("discrete measure needs at least one atom".into()))?;
        let s = MeasureSpec { dimension, kind: MeasureKind::Discrete { atoms } };
        s.validate()?;
        Ok(s)
    }

    pub fn catalog(family: CatalogFamily) -> Result<Self> {
        family.validate()?;
        Ok(MeasureSpec { dimension: 1, kind: MeasureKind::Catalog(family) })
    }

    pub fn product(factors: Vec<MeasureSpec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Schema("product needs at least one factor".into()));
        }
        let dimension = factors.iter().map(|f| f.dimension).sum();
        Ok(MeasureSpec { dimension, kind: MeasureKind::Product { factors } })
    }

    pub fn pushforward(base: MeasureSpec, map: PolynomialMap) -> Result<Self> {
        if map.source_dim != base.dimension {
            return Err(Error::Dimension(format!(
                "map expects dimension {}, base has {}",
                map.source_dim, base.dimension
            )));
        }
        Ok(MeasureSpec { dimension: map.target_dim(), kind: MeasureKind::Pushforward { base: Box::new(base), map } })
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.dimension > MAX_DIMENSION {
            return Err(Error::Dimension(format!("dimension {} outside 1..={MAX_DIMENSION}", self.dimension)));
        }
        match &self.kind {
            MeasureKind::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::Invariant("discrete measure needs at least one atom".into()));
                }
                for (i, a) in atoms.iter().enumerate() {
                    if a.point.len() != self.dimension {
                        return Err(Error::Invariant(format!(
                            "atom {i} has {} coordinates, expected {}",
                            a.point.len(),
                            self.dimension
                        )));
                    }
                    if a.weight <= RBig::ZERO {
                        return Err(Error::Invariant(format!("atom {i} has nonpositive weight")));
                    }
                }
                Ok(())
            }
            MeasureKind::Catalog(f) => f.validate(),
            MeasureKind::Product { factors } => {
                let sum: usize = factors.iter().map(|f| f.dimension).sum();
                if sum != self.dimension {
                    return Err(Error::Invariant(format!(
                        "product dimension {} differs from factor sum {sum}",
                        self.dimension
                    )));
                }
                factors.iter().try_for_each(|f| f.validate())
            }
            MeasureKind::Pushforward { base, map } => {
                if map.source_dim != base.dimension || map.target_dim() != self.dimension {
                    return Err(Error::Invariant("pushforward dimensions inconsistent".into()));
                }
                base.validate()
            }
        }
    }

    /// True when every constituent is a discrete measure with rational data.
    pub fn is_discrete(&self) -> bool {
        match &self.kind {
            MeasureKind::Discrete { .. } => true,
            MeasureKind::Catalog(_) => false,
            MeasureKind::Product { factors } => factors.iter().all(|f| f.is_discrete()),
            MeasureKind::Pushforward { base, .. } => base.is_discrete(),
        }
    }

    /// Flattens a measure built from discrete pieces into its atom list.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        match &self.kind {
            MeasureKind::Discrete { atoms } => Some(atoms.clone()),
            MeasureKind::Catalog(_) => None,
            MeasureKind::Product { factors } => {
                let mut acc = vec![Atom { point: vec![], weight: RBig::ONE }];
                for f in factors {
                    let fa = f.atoms()?;
                    let mut next = Vec::with_capacity(acc.len() * fa.len());
                    for a in &acc {
                        for b in &fa {
                            let mut p = a.point.clone();
                            p.extend(b.point.iter().cloned());
                            next.push(Atom { point: p, weight: &a.weight * &b.weight });
                        }
                    }
                    acc = next;
                }
                Some(acc)
            }
            MeasureKind::Pushforward { base, map } => Some(
                base.atoms()?
                    .into_iter()
                    .map(|a| Atom { point: map.eval_rational(&a.point), weight: a.weight })
                    .collect(),
            ),
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.kind {
            MeasureKind::Discrete { atoms } => json!({
                "kind": "discrete",
                "dimension": self.dimension,
                "atoms": atoms.iter().map(|a| json!([
                    a.point.iter().map(rational_to_json).collect::<Vec<_>>(),
                    rational_to_json(&a.weight)
                ])).collect::<Vec<_>>(),
            }),
            MeasureKind::Catalog(f) => json!({
                "kind": "catalog",
                "dimension": 1,
                "catalog_id": f.id(),
                "parameters": f.parameters_json(),
            }),
            MeasureKind::Product { factors } => json!({
                "kind": "product",
                "dimension": self.dimension,
                "factors": factors.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
            }),
            MeasureKind::Pushforward { base, map } => json!({
                "kind": "pushforward",
                "dimension": self.dimension,
                "base": base.to_json(),
                "map": map.to_json(),
            }),
        }
    }
}

/// `[num, den]` pair with a positive denominator. Integers beyond the i64
/// range are written as decimal strings so no digits are lost.
pub fn rational_to_json(r: &RBig) -> Value {
    let den = IBig::from(r.denominator().clone());
    json!([integer_to_json(r.numerator()), integer_to_json(&den)])
}

fn integer_to_json(v: &IBig) -> Value {
    match i64::try_from(v) {
        Ok(i) => json!(i),
        Err(_) => Value::String(v.to_string()),
    }
}

/// Reads a rational from `[num, den]`, an integer, a decimal number, or a
/// string such as `"3/4"` or `"-1.5e-2"`.
pub fn rational_from_json(v: &Value, what: &str) -> Result<RBig> {
    match v {
        Value::Array(a) if a.len() == 2 => {
            let num = integer_from_json(&a[0], what)?;
            let den = integer_from_json(&a[1], what)?;
            if den == IBig::ZERO {
                return Err(Error::Invariant(format!("{what}: zero denominator")));
            }
            let (sign, mag) = den.into_parts();
            let num = if sign == dashu_base::Sign::Negative { -num } else { num };
            Ok(RBig::from_parts(num, mag))
        }
        Value::Number(n) => parse_rational_str(&n.to_string())
            .ok_or_else(|| Error::Schema(format!("{what}: unreadable number {n}"))),
        Value::String(s) => {
            parse_rational_str(s).ok_or_else(|| Error::Schema(format!("{what}: unreadable rational {s:?}")))
        }
        _ => Err(Error::Schema(format!("{what}: expected a rational"))),
    }
}

fn integer_from_json(v: &Value, what: &str) -> Result<IBig> {
    let s = match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        _ => return Err(Error::Schema(format!("{what}: expected an integer"))),
    };
    s.parse::<IBig>().map_err(|_| Error::Schema(format!("{what}: expected an integer, got {s:?}")))
}

/// Parses `p/q`, `-12`, `1.25`, `3e-4`.
pub fn parse_rational_str(s: &str) -> Option<RBig> {
    let s = s.trim();
    if s.is_empty() || s.len() > 400 {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: IBig = p.trim().parse().ok()?;
        let q: IBig = q.trim().parse().ok()?;
        if q == IBig::ZERO {
            return None;
        }
        let (sign, mag) = q.into_parts();
        let p = if sign == dashu_base::Sign::Negative { -p } else { p };
        return Some(RBig::from_parts(p, mag));
    }
    let (neg, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(k) => (&body[..k], body[k + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    if exp.unsigned_abs() > 400 {
        return None;
    }
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if !int.bytes().all(|c| c.is_ascii_digit()) || !frac.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let mut r = crate::poly::parse::decimal_to_rational(int, frac)?;
    let scale = UBig::from(10u8).pow(exp.unsigned_abs() as usize);
    if exp > 0 {
        r = r * RBig::from(IBig::from(scale));
    } else if exp < 0 {
        r = r / RBig::from(IBig::from(scale));
    }
    Some(if neg { -r } else { r })
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in src.char_indices() {
        if i >= offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

/// Parses JSON text into a `serde_json::Value`, mapping syntax errors to
/// [`Error::Parse`] with a line and column.
pub fn parse_json_text(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        let (line, col) = if e.line() == 0 { line_col(text, text.len()) } else { (e.line(), e.column()) };
        Error::Parse { line, col, msg: e.to_string() }
    })
}

pub fn parse_measure_spec(text: &str) -> Result<MeasureSpec> {
    let v = parse_json_text(text)?;
    measure_spec_from_value(&v)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Schema(format!("{ctx}: missing field {key:?}")))
}

pub fn measure_spec_from_value(v: &Value) -> Result<MeasureSpec> {
    let obj = v.as_object().ok_or_else(|| Error::Schema("measure spec must be an object".into()))?;
    let kind = field(obj, "kind", "measure")?
        .as_str()
        .ok_or_else(|| Error::Schema("kind must be a string".into()))?;
    let declared = match obj.get("dimension") {
        None | Some(Value::Null) => None,
        Some(d) => Some(
            d.as_u64()
                .filter(|&d| d >= 1 && d <= MAX_DIMENSION as u64)
                .ok_or_else(|| Error::Schema(format!("dimension must be an integer in 1..={MAX_DIMENSION}")))?
                as usize,
        ),
    };
    let spec = match kind {
        "discrete" => {
            let atoms_v = field(obj, "atoms", "discrete")?
                .as_array()
                .ok_or_else(|| Error::Schema("atoms must be an array".into()))?;
            let mut atoms = Vec::with_capacity(atoms_v.len());
            for (i, a) in atoms_v.iter().enumerate() {
                let pair = a
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| Error::Schema(format!("atom {i} must be [point, weight]")))?;
                let point = pair[0]
                    .as_array()
                    .ok_or_else(|| Error::Schema(format!("atom {i}: point must be an array")))?
                    .iter()
                    .map(|c| rational_from_json(c, &format!("atom {i} coordinate")))
                    .collect::<Result<Vec<_>>>()?;
                let weight = rational_from_json(&pair[1], &format!("atom {i} weight"))?;
                atoms.push(Atom { point, weight });
            }
            if atoms.is_empty() {
                return Err(Error::Invariant("discrete measure needs at least one atom".into()));
            }
            let dimension = declared.unwrap_or(atoms[0].point.len());
            let s = MeasureSpec { dimension, kind: MeasureKind::Discrete { atoms } };
            s.validate()?;
            s
        }
        "catalog" => {
            let id = field(obj, "catalog_id", "catalog")?
                .as_str()
                .ok_or_else(|| Error::Schema("catalog_id must be a string".into()))?;
            let empty = Map::new();
            let params = match obj.get("parameters") {
                None | Some(Value::Null) => &empty,
                Some(p) => p.as_object().ok_or_else(|| Error::Schema("parameters must be an object".into()))?,
            };
            MeasureSpec::catalog(CatalogFamily::from_parts(id, params)?)?
        }
        "product" => {
            let fs = field(obj, "factors", "product")?
                .as_array()
                .ok_or_else(|| Error::Schema("factors must be an array".into()))?;
            let factors = fs.iter().map(measure_spec_from_value).collect::<Result<Vec<_>>>()?;
            MeasureSpec::product(factors)?
        }
        "pushforward" => {
            let base = measure_spec_from_value(field(obj, "base", "pushforward")?)?;
            let m = field(obj, "map", "pushforward")?
                .as_object()
                .ok_or_else(|| Error::Schema("map must be an object".into()))?;
            let comps = field(m, "components", "map")?
                .as_array()
                .ok_or_else(|| Error::Schema("components must be an array".into()))?
                .iter()
                .map(|c| c.as_str().ok_or_else(|| Error::Schema("components must be strings".into())))
                .collect::<Result<Vec<_>>>()?;
            let inj = match m.get("injectivity_asserted").or_else(|| m.get("injective")) {
                None | Some(Value::Null) => false,
                Some(Value::Bool(b)) => *b,
                Some(_) => return Err(Error::Schema("injectivity flag must be boolean".into())),
            };
            let map = PolynomialMap::parse(base.dimension, &comps, inj)?;
            MeasureSpec::pushforward(base, map)?
        }
        other => return Err(Error::Schema(format!("unknown kind {other:?}"))),
    };
    if let Some(d) = declared {
        if d != spec.dimension {
            return Err(Error::Invariant(format!(
                "declared dimension {d} differs from computed dimension {}",
                spec.dimension
            )));
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_at_origin() {
        let s = parse_measure_spec(r#"{"kind":"discrete","dimension":1,"atoms":[[[[0,1]],[1,1]]]}"#).unwrap();
        let atoms = s.atoms().unwrap();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].weight, RBig::ONE);
        assert_eq!(atoms[0].point, vec![RBig::ZERO]);
    }

    #[test]
    fn lognormal_lookup() {
        let s = parse_measure_spec(r#"{"kind":"catalog","catalog_id":"lognormal","parameters":{"mu":0,"sigma":1}}"#)
            .unwrap();
        assert_eq!(s.dimension, 1);
        assert!(matches!(s.kind, MeasureKind::Catalog(CatalogFamily::Lognormal { .. })));
    }

    #[test]
    fn pushforward_structure() {
        let s = parse_measure_spec(
            r#"{"kind":"pushforward",
                "base":{"kind":"discrete","atoms":[[[1,2],[1,2]],[[3,4],[1,2]]]},
                "map":{"components":["x1+x2"]}}"#,
        )
        .unwrap();
        assert_eq!(s.dimension, 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_measure_spec(r#"{"kind":"blob"}"#), Err(Error::Schema(_))));
        assert!(matches!(
            parse_measure_spec(r#"{"kind":"discrete","atoms":[[[0],[-1,1]]]}"#),
            Err(Error::Invariant(_))
        ));
        assert!(matches!(
            parse_measure_spec(r#"{"kind":"catalog","catalog_id":"stieltjes_family","parameters":{"epsilon":2}}"#),
            Err(Error::Invariant(_))
        ));
        assert!(matches!(parse_measure_spec("{\n  \"kind\": }"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_measure_spec(r#"{"kind":"catalog"}"#), Err(Error::Schema(_))));
        let wide = format!(r#"{{"kind":"discrete","atoms":[[[{}],[1,1]]]}}"#, vec!["0"; 65].join(","));
        assert!(matches!(parse_measure_spec(&wide), Err(Error::Dimension(_))));
    }

    #[test]
    fn rational_forms() {
        let half = RBig::from_parts(IBig::from(1), UBig::from(2u8));
        assert_eq!(parse_rational_str("1/2"), Some(half.clone()));
        assert_eq!(parse_rational_str("0.5"), Some(half.clone()));
        assert_eq!(parse_rational_str("5e-1"), Some(half.clone()));
        assert_eq!(parse_rational_str("-2/-4"), Some(half.clone()));
        assert_eq!(rational_from_json(&json!([1, 2]), "x").unwrap(), half);
        assert_eq!(rational_from_json(&json!([-1, -2]), "x").unwrap(), half);
        assert!(parse_rational_str("1/0").is_none());
        assert!(parse_rational_str("abc").is_none());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"kind":"product","factors":[
            {"kind":"catalog","catalog_id":"gaussian","parameters":{"mu":[1,3],"sigma":2}},
            {"kind":"pushforward","base":{"kind":"discrete","atoms":[[[1,2],[1,3]],[[0,0],[2,3]]]},
             "map":{"components":["x1^2-x2/7","x1*x2"],"injective":true}}]}"#;
        let s = parse_measure_spec(text).unwrap();
        let back = measure_spec_from_value(&s.to_json()).unwrap();
        assert_eq!(s, back);
    }
}
