use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use momentdet::arith::{parse_complex_literal, Complex, WireComplex};
use momentdet::determinacy_md::run_check;
use momentdet::io::{parse_moments_json, write_moments_json, SCHEMA};
use momentdet::measures::{compute_moments, parse_measure_spec, MeasureSpec, MomentSequence};
use momentdet::nevanlinna::{parametrized_value, parse_phi, quadruple, weyl_disk, Phi};
use momentdet::transforms::{
    cauchy_eval, fantappie_eval, laplace_eval, monotonicity_of_values, poisson_direct, poisson_recursion, Estimate,
    GridAxis, GridSpec, MonotonicityReport,
};
use momentdet::Error;

use crate::config::RunConfig;
use crate::{read_file, CliError, Input, TransformKind};

fn load_spec(path: &Path) -> Result<MeasureSpec, CliError> {
    Ok(parse_measure_spec(&read_file(path)?)?)
}

/// Reads `--spec` (computing moments through `default_order(d)` unless
/// `--max-order` is given) or `--moments`.
fn load_sequence(cfg: &RunConfig, input: &Input, default_order: impl Fn(usize) -> usize) -> Result<MomentSequence, CliError> {
    let policy = cfg.policy()?;
    match (&input.spec, &input.moments) {
        (Some(p), _) => {
            let spec = load_spec(p)?;
            let n = input.max_order.unwrap_or_else(|| default_order(spec.dimension));
            Ok(compute_moments(&spec, n, &policy)?)
        }
        (None, Some(p)) => {
            let s = parse_moments_json(&read_file(p)?, policy.bits)?;
            match input.max_order {
                Some(n) if n < s.max_order() => Ok(s.truncate(n)),
                Some(n) if n > s.max_order() => Err(CliError::Input(format!(
                    "--max-order {n} exceeds the table's max_order {}",
                    s.max_order()
                ))),
                _ => Ok(s),
            }
        }
        (None, None) => Err(CliError::Input("one of --spec or --moments is required".into())),
    }
}

fn parse_point(src: &str, what: &str) -> Result<Complex64, CliError> {
    parse_complex_literal(src)
        .map(|(re, im)| Complex64::new(re, im))
        .ok_or_else(|| CliError::Input(format!("{what}: expected a complex number like 0+1i, got {src:?}")))
}

fn nonreal(src: &str) -> Result<Complex64, CliError> {
    let z = parse_point(src, "--z")?;
    if z.im == 0.0 {
        return Err(CliError::Input(format!("--z must be non-real, got {src:?}")));
    }
    Ok(z)
}

fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain JSON");
    s.push('\n');
    s
}

pub fn moments(cfg: &RunConfig, spec: &Path, max_order: usize) -> Result<String, CliError> {
    let spec = load_spec(spec)?;
    let s = compute_moments(&spec, max_order, &cfg.policy()?)?;
    let mut text = write_moments_json(&s);
    text.push('\n');
    Ok(text)
}

/// Default truncation for `check` from a specification.
pub fn default_check_order(d: usize) -> usize {
    if d == 1 {
        202
    } else {
        48
    }
}

pub fn check(cfg: &RunConfig, input: &Input) -> Result<String, CliError> {
    let s = load_sequence(cfg, input, default_check_order)?;
    let report = run_check(&s, &cfg.check, &cfg.policy()?)?;
    Ok(json_text(&json!({
        "schema": SCHEMA,
        "command": "check",
        "run_config": cfg,
        "report": report,
    })))
}

pub fn weyl(cfg: &RunConfig, input: &Input, z: &str, degree: usize) -> Result<String, CliError> {
    let zc = nonreal(z)?;
    let s = load_sequence(cfg, input, |_| 2 * degree + 2)?;
    if s.dim() != 1 {
        return Err(Error::Dimension("weyl needs a one-dimensional sequence".into()).into());
    }
    let policy = cfg.policy()?;
    let r = momentdet::determinacy1d::weyl_radius(&s, &Complex::from_c64(zc, policy.bits), degree, &policy)?;
    let mut out = String::new();
    writeln!(out, "# {SCHEMA} weyl z={z} precision_bits={}", policy.bits).unwrap();
    if r.terminal {
        writeln!(out, "# recurrence terminated at n={}", r.radii.len() - 1).unwrap();
    }
    out.push_str("n,rho\n");
    for (n, rho) in r.radii.iter().enumerate().skip(1) {
        writeln!(out, "{n},{:e}", rho.to_f64()).unwrap();
    }
    Ok(out)
}

pub fn nevanlinna(cfg: &RunConfig, input: &Input, z: &str, degree: usize, phis: &[String], ws: &[String]) -> Result<String, CliError> {
    let zc = nonreal(z)?;
    let s = load_sequence(cfg, input, |_| 2 * degree + 2)?;
    if s.dim() != 1 {
        return Err(Error::Dimension("nevanlinna needs a one-dimensional sequence".into()).into());
    }
    let policy = cfg.policy()?;
    let zr = Complex::from_c64(zc, policy.bits);
    let q = quadruple(&s, &zr, degree, &policy)?;
    let disk = weyl_disk(&s, &zr, degree, &policy)?;
    let mut values = vec![];
    let mut membership = vec![];
    for src in phis {
        let phi = parse_phi(src)?;
        let v = parametrized_value(&q, &phi)?;
        membership.push(json!({"source": format!("phi {src}"), "membership": disk.membership(&v)}));
        let label = match phi {
            Phi::Infinity => "inf".to_string(),
            Phi::Finite(c) => format!("{}{:+}i", c.re, c.im),
        };
        values.push(json!({"phi": label, "value": WireComplex::from(&v)}));
    }
    for src in ws {
        let w = Complex::from_c64(parse_point(src, "--w")?, policy.bits);
        membership.push(json!({"source": format!("w {src}"), "membership": disk.membership(&w)}));
    }
    Ok(json_text(&json!({
        "schema": SCHEMA,
        "command": "nevanlinna",
        "run_config": cfg,
        "quadruple": q.to_wire(),
        "determinant": WireComplex::from(&q.determinant()),
        "values": values,
        "disk": {
            "center": WireComplex::from(&disk.center),
            "radius": disk.radius.to_f64(),
            "weyl_radius": disk.weyl_radius.to_f64(),
        },
        "membership": membership,
    })))
}

pub struct GridFlags {
    pub lo: String,
    pub hi: String,
    pub steps: String,
    pub order: usize,
}

fn per_axis<T: std::str::FromStr + Clone>(src: &str, d: usize, what: &str) -> Result<Vec<T>, CliError> {
    let parts = src
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| CliError::Input(format!("--{what}: cannot read {p:?}"))))
        .collect::<Result<Vec<T>, _>>()?;
    match parts.len() {
        1 => Ok(vec![parts[0].clone(); d]),
        n if n == d => Ok(parts),
        n => Err(CliError::Input(format!("--{what}: {n} values for {d} axes"))),
    }
}

impl GridFlags {
    fn grid(&self, d: usize) -> Result<GridSpec, CliError> {
        let lo: Vec<f64> = per_axis(&self.lo, d, "lo")?;
        let hi: Vec<f64> = per_axis(&self.hi, d, "hi")?;
        let steps: Vec<usize> = per_axis(&self.steps, d, "steps")?;
        let g = GridSpec {
            axes: (0..d).map(|i| GridAxis { lo: lo[i], hi: hi[i], steps: steps[i] }).collect(),
            order: self.order,
        };
        g.validate()?;
        if g.axes.iter().map(|a| a.steps + 1).product::<usize>() > 1_000_000 {
            return Err(CliError::Input("grid has more than 10^6 points".into()));
        }
        Ok(g)
    }
}

struct Row {
    value: Complex64,
    error: Option<f64>,
    violation: Option<bool>,
}

pub fn transform(cfg: &RunConfig, spec: &Path, kind: TransformKind, flags: &GridFlags, y: f64, p0: f64, check: bool) -> Result<String, CliError> {
    let spec = load_spec(spec)?;
    let d = spec.dimension;
    let grid = flags.grid(d)?;
    let q = cfg.quad();
    let points = grid.points();
    let est = |e: Estimate| Row { value: e.value, error: Some(e.error), violation: None };
    let lift = |x: &[f64]| -> Vec<Complex64> { x.iter().map(|&v| Complex64::new(v, y)).collect() };
    if matches!(kind, TransformKind::Cauchy | TransformKind::Poisson) && !(y > 0.0) {
        return Err(CliError::Input("--y must be positive".into()));
    }
    let mut rows = Vec::with_capacity(points.len());
    for x in &points {
        rows.push(match kind {
            TransformKind::Laplace => {
                let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                est(laplace_eval(&spec, &z, &q)?)
            }
            TransformKind::Fantappie => est(fantappie_eval(&spec, p0, x, &q)?),
            TransformKind::Cauchy => est(cauchy_eval(&spec, &lift(x), &q)?),
            TransformKind::Poisson => {
                let z = lift(x);
                let f = |w: &[Complex64]| cauchy_eval(&spec, w, &q).map(|e| e.value);
                let v = poisson_recursion(&f, &z)?;
                let error = spec.atoms().map(|_| poisson_direct(&spec, &z)).transpose()?.map(|p| (v.re - p).abs());
                Row { value: v, error, violation: Some(v.re < -1e-12) }
            }
        });
    }
    let report: Option<MonotonicityReport> = match kind {
        TransformKind::Laplace | TransformKind::Fantappie if check => {
            let r = monotonicity_of_values(rows.iter().map(|r| r.value.re).collect(), &grid)?;
            for (row, f) in rows.iter_mut().zip(&r.flagged) {
                row.violation = Some(*f);
            }
            Some(r)
        }
        _ => None,
    };

    let kind_name = format!("{kind:?}").to_ascii_lowercase();
    let mut out = String::new();
    write!(out, "# {SCHEMA} transform kind={kind_name}").unwrap();
    match kind {
        TransformKind::Cauchy | TransformKind::Poisson => write!(out, " y={y}").unwrap(),
        TransformKind::Fantappie => write!(out, " p0={p0}").unwrap(),
        TransformKind::Laplace => {}
    }
    out.push('\n');
    let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).chain(["re", "im", "error", "violation"].map(String::from)).collect();
    writeln!(out, "{}", header.join(",")).unwrap();
    for (x, r) in points.iter().zip(&rows) {
        let mut cells: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        cells.push(format!("{:e}", r.value.re));
        cells.push(format!("{:e}", r.value.im));
        cells.push(r.error.map(|e| format!("{e:e}")).unwrap_or_default());
        cells.push(r.violation.map(|v| if v { "1" } else { "0" }.to_string()).unwrap_or_default());
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    if let Some(r) = report {
        writeln!(out, "# monotonicity order={} checked={} violations={}", grid.order, r.checked, r.violation_count).unwrap();
        for v in &r.violations {
            writeln!(out, "# violation x={:?} alpha={:?} value={:e}", v.point, v.alpha, v.value).unwrap();
        }
    }
    Ok(out)
}
