//! Scriptable front end: source specifications, run configuration, and the
//! serialization of pipeline artifacts.
//!
//! Sources are described either as JSON (full generality, nesting allowed)
//! or as a compact inline shorthand for the common cases:
//!
//! ```text
//! gaussian
//! lognormal:1
//! atomic:-1@0.5,1@0.5
//! table:moments.json
//! scaled:2:gaussian
//! product:gaussian|lognormal:1
//! ```
//!
//! Numeric parameters are parsed exactly (decimal or `p/q`), never through
//! binary floats, and every emitted artifact renders numbers as decimal
//! strings, so identical invocations produce byte-identical files.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::diagnostics::{ScalingSweep, TrendReport};
use crate::error::{Error, Result};
use crate::hankel::SpectrumResult;
use crate::moment_source::{
    atomic_moments, gaussian_moments, load_table, lognormal_moments, product, AtomicMeasure1D,
    MomentSource,
};
use crate::scalar::{parse_rat, rat_to_string, to_dec_string, Rat};
use crate::torus::DualityReport;
use num_traits::Signed;

/// Desk-scale guards and precision settings for a CLI run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub precision_bits: usize,
    pub precision_ceiling: usize,
    pub max_dimension: usize,
    pub max_nesting: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            precision_bits: 256,
            precision_ceiling: 4096,
            max_dimension: 4,
            max_nesting: 3,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.precision_bits < 64 {
            violations.push(format!(
                "precision must be at least 64 bits, got {}",
                self.precision_bits
            ));
        }
        if self.precision_ceiling < self.precision_bits {
            violations.push(format!(
                "precision ceiling {} is below the working precision {}",
                self.precision_ceiling, self.precision_bits
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::SourceSpec { violations })
        }
    }
}

/// Parsed source description.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceSpec {
    Gaussian,
    Lognormal {
        #[serde(deserialize_with = "de_rat")]
        sigma: Rat,
    },
    Atomic {
        atoms: Vec<AtomSpec>,
    },
    Table {
        path: PathBuf,
    },
    Product {
        factors: Vec<SourceSpec>,
    },
    Scaled {
        #[serde(deserialize_with = "de_rat")]
        radius: Rat,
        base: Box<SourceSpec>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    #[serde(deserialize_with = "de_rat")]
    pub location: Rat,
    #[serde(deserialize_with = "de_rat")]
    pub weight: Rat,
}

/// Accept `"1/2"`, `"0.5"`, or a bare JSON number (whose literal text is
/// preserved) as an exact rational.
fn de_rat<'de, D>(deserializer: D) -> std::result::Result<Rat, D::Error>
where
    D: serde::Deserializer<'de>,
{
    use serde::de::Error as _;
    let v = serde_json::Value::deserialize(deserializer)?;
    let text = match &v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        other => return Err(D::Error::custom(format!("expected number, got {other}"))),
    };
    parse_rat(&text).map_err(|e| D::Error::custom(format!("{e}")))
}

/// Parse a source specification from JSON or the inline shorthand.
pub fn parse_source_spec(text: &str) -> Result<SourceSpec> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).map_err(|e| Error::SourceSpec {
            violations: vec![format!("JSON source spec: {e}")],
        });
    }
    parse_shorthand(trimmed)
}

fn parse_shorthand(text: &str) -> Result<SourceSpec> {
    let bad = |msg: String| Error::SourceSpec {
        violations: vec![msg],
    };
    if text == "gaussian" {
        return Ok(SourceSpec::Gaussian);
    }
    if let Some(rest) = text.strip_prefix("lognormal:") {
        return Ok(SourceSpec::Lognormal {
            sigma: parse_rat(rest)?,
        });
    }
    if let Some(rest) = text.strip_prefix("atomic:") {
        let mut atoms = Vec::new();
        for part in rest.split(',') {
            let (loc, w) = part
                .split_once('@')
                .ok_or_else(|| bad(format!("atom `{part}` is not location@weight")))?;
            atoms.push(AtomSpec {
                location: parse_rat(loc)?,
                weight: parse_rat(w)?,
            });
        }
        return Ok(SourceSpec::Atomic { atoms });
    }
    if let Some(rest) = text.strip_prefix("table:") {
        return Ok(SourceSpec::Table {
            path: PathBuf::from(rest),
        });
    }
    if let Some(rest) = text.strip_prefix("scaled:") {
        let (radius, inner) = rest
            .split_once(':')
            .ok_or_else(|| bad("scaled shorthand is scaled:R:SPEC".into()))?;
        return Ok(SourceSpec::Scaled {
            radius: parse_rat(radius)?,
            base: Box::new(parse_shorthand(inner)?),
        });
    }
    if let Some(rest) = text.strip_prefix("product:") {
        let factors = rest
            .split('|')
            .map(parse_shorthand)
            .collect::<Result<Vec<_>>>()?;
        return Ok(SourceSpec::Product { factors });
    }
    Err(bad(format!(
        "unknown source `{text}` (expected gaussian, lognormal:S, atomic:L@W,.., \
         table:PATH, scaled:R:SPEC, or product:A|B)"
    )))
}

impl SourceSpec {
    fn dimension(&self) -> usize {
        match self {
            SourceSpec::Product { factors } => factors.len(),
            SourceSpec::Scaled { base, .. } => base.dimension(),
            // table dimension comes from the file; counted as 1 here and
            // re-checked after load
            _ => 1,
        }
    }

    fn depth(&self) -> usize {
        match self {
            SourceSpec::Product { factors } => {
                1 + factors.iter().map(SourceSpec::depth).max().unwrap_or(0)
            }
            SourceSpec::Scaled { base, .. } => 1 + base.depth(),
            _ => 1,
        }
    }

    /// Collect constraint violations without building anything.
    fn check(&self, violations: &mut Vec<String>) {
        match self {
            SourceSpec::Gaussian | SourceSpec::Table { .. } => {}
            SourceSpec::Lognormal { sigma } => {
                if !sigma.is_positive() {
                    violations.push(format!(
                        "lognormal sigma must be positive, got {}",
                        rat_to_string(sigma)
                    ));
                }
            }
            SourceSpec::Atomic { atoms } => {
                if atoms.is_empty() {
                    violations.push("atomic source needs at least one atom".into());
                }
                for a in atoms {
                    if !a.weight.is_positive() {
                        violations.push(format!(
                            "atom weight {} must be positive",
                            rat_to_string(&a.weight)
                        ));
                    }
                }
            }
            SourceSpec::Product { factors } => {
                if factors.is_empty() {
                    violations.push("empty product".into());
                }
                for f in factors {
                    if matches!(f, SourceSpec::Product { .. }) {
                        violations.push("product factors must be one-dimensional".into());
                    }
                    f.check(violations);
                }
            }
            SourceSpec::Scaled { radius, base } => {
                if !radius.is_positive() {
                    violations.push(format!(
                        "scaling radius must be positive, got {}",
                        rat_to_string(radius)
                    ));
                }
                base.check(violations);
            }
        }
    }
}

/// Validate a spec and build the source. `hankel_degree` sizes table loads
/// (assembly to degree N reads moments to 2N).
pub fn build_source(
    spec: &SourceSpec,
    config: &RunConfig,
    hankel_degree: u32,
) -> Result<MomentSource> {
    let mut violations = Vec::new();
    spec.check(&mut violations);
    if spec.depth() > config.max_nesting {
        violations.push(format!(
            "nesting depth {} exceeds the limit {}",
            spec.depth(),
            config.max_nesting
        ));
    }
    if spec.dimension() > config.max_dimension {
        violations.push(format!(
            "dimension {} exceeds the desk-scale limit {} (raise --max-dimension)",
            spec.dimension(),
            config.max_dimension
        ));
    }
    if !violations.is_empty() {
        return Err(Error::SourceSpec { violations });
    }
    build_unchecked(spec, config, hankel_degree)
}

fn build_unchecked(
    spec: &SourceSpec,
    config: &RunConfig,
    hankel_degree: u32,
) -> Result<MomentSource> {
    match spec {
        SourceSpec::Gaussian => Ok(gaussian_moments()),
        SourceSpec::Lognormal { sigma } => lognormal_moments(sigma.clone()),
        SourceSpec::Atomic { atoms } => {
            let measure = AtomicMeasure1D::new(
                atoms
                    .iter()
                    .map(|a| (a.location.clone(), a.weight.clone()))
                    .collect(),
            )?;
            Ok(atomic_moments(measure))
        }
        SourceSpec::Table { path } => {
            let d = table_dimension(path)?;
            if d > config.max_dimension {
                return Err(Error::SourceSpec {
                    violations: vec![format!(
                        "table dimension {d} exceeds the desk-scale limit {}",
                        config.max_dimension
                    )],
                });
            }
            load_table(path, d, hankel_degree)
        }
        SourceSpec::Product { factors } => {
            let built = factors
                .iter()
                .map(|f| build_unchecked(f, config, hankel_degree))
                .collect::<Result<Vec<_>>>()?;
            product(built)
        }
        SourceSpec::Scaled { radius, base } => {
            build_unchecked(base, config, hankel_degree)?.scaled(radius)
        }
    }
}

fn table_dimension(path: &Path) -> Result<usize> {
    #[derive(Deserialize)]
    struct Header {
        d: usize,
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
    let h: Header = serde_json::from_str(&text)
        .map_err(|e| Error::Table(format!("malformed table header: {e}")))?;
    Ok(h.d)
}

/// Parse a comma-separated radius list, exactly.
pub fn parse_radii(text: &str) -> Result<Vec<Rat>> {
    let radii = text
        .split(',')
        .map(|s| parse_rat(s.trim()))
        .collect::<Result<Vec<_>>>()?;
    if radii.is_empty() {
        return Err(Error::InvalidParameter("empty radius list".into()));
    }
    for r in &radii {
        if !r.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "radius {} must be positive",
                rat_to_string(r)
            )));
        }
    }
    Ok(radii)
}

/// Parse one point in `ℂ^d`.
///
/// Coordinates are separated by `;`. Each coordinate is either a `re,im`
/// pair of decimals or a complex literal (`1`, `i`, `-2i`, `1+0.5i`). A
/// single chunk whose comma-parts all carry `i` is also accepted as a list
/// of coordinates (`i,i`).
pub fn parse_point(text: &str) -> Result<Vec<(Rat, Rat)>> {
    let chunks: Vec<&str> = text.split(';').map(str::trim).collect();
    if chunks.len() == 1 && chunks[0].contains(',') {
        let parts: Vec<&str> = chunks[0].split(',').map(str::trim).collect();
        if parts.iter().all(|p| p.contains('i')) {
            return parts.iter().map(|p| parse_complex_literal(p)).collect();
        }
        if parts.len() == 2 {
            return Ok(vec![(parse_rat(parts[0])?, parse_rat(parts[1])?)]);
        }
        return Err(Error::InvalidParameter(format!(
            "cannot read point `{text}`: expected `re,im` pairs separated by `;`"
        )));
    }
    chunks
        .iter()
        .map(|c| {
            if let Some((re, im)) = c.split_once(',') {
                Ok((parse_rat(re.trim())?, parse_rat(im.trim())?))
            } else {
                parse_complex_literal(c)
            }
        })
        .collect()
}

fn parse_complex_literal(text: &str) -> Result<(Rat, Rat)> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || Error::NumberParse(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if !s.contains('i') {
        return Ok((parse_rat(&s)?, Rat::from_integer(0.into())));
    }
    // split at the sign that separates real and imaginary parts (skip a
    // leading sign and exponent signs)
    let bytes = s.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k] as char;
        if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
            split = Some(k);
            break;
        }
    }
    let (re_str, im_str) = match split {
        Some(k) => (&s[..k], &s[k..]),
        None => ("0", s.as_str()),
    };
    let im_body = im_str.strip_suffix('i').ok_or_else(err)?;
    let im = match im_body {
        "" | "+" => Rat::from_integer(1.into()),
        "-" => Rat::from_integer((-1).into()),
        other => parse_rat(other)?,
    };
    let re = if re_str.is_empty() {
        Rat::from_integer(0.into())
    } else {
        parse_rat(re_str)?
    };
    Ok((re, im))
}

/// Write a file atomically: temp in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        )),
        None => PathBuf::from(format!(
            ".{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        )),
    };
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV for an eigenvalue sequence. Exact zeros print as literal `0`.
pub fn eigenseq_csv(results: &[SpectrumResult]) -> String {
    let mut out = String::from("N,matrix_size,lambda_min,residual_bound,precision_bits_used\n");
    for (n, s) in results.iter().enumerate() {
        let lam = if s.exact_zero {
            "0".to_string()
        } else {
            to_dec_string(s.lambda_min())
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            n,
            s.size(),
            lam,
            to_dec_string(&s.residual_abs),
            s.bits_used
        ));
    }
    out
}

/// CSV for kernel partial sums.
pub fn kernelsum_csv(sums: &[crate::scalar::BigFloat]) -> String {
    let mut out = String::from("n,partial_sum\n");
    for (n, s) in sums.iter().enumerate() {
        out.push_str(&format!("{},{}\n", n, to_dec_string(s)));
    }
    out
}

/// JSON payload of a duality report.
pub fn duality_json(r: &DualityReport) -> String {
    #[derive(serde::Serialize)]
    struct Payload {
        lambda_min: String,
        #[serde(rename = "lambda_max_K")]
        lambda_max_k: String,
        product: String,
        residual_bound: String,
        #[serde(rename = "trace_K")]
        trace_k: String,
        precision_bits_h: usize,
        precision_bits_k: usize,
    }
    serde_json::to_string_pretty(&Payload {
        lambda_min: to_dec_string(&r.lambda_min_h),
        lambda_max_k: to_dec_string(&r.lambda_max_k),
        product: to_dec_string(&r.product),
        residual_bound: to_dec_string(&r.residual_bound),
        trace_k: to_dec_string(&r.trace_k),
        precision_bits_h: r.bits_h,
        precision_bits_k: r.bits_k,
    })
    .expect("serialization")
}

/// JSON payload of a 1-dimensional trend report.
pub fn trend_json(source: &str, r: &TrendReport) -> String {
    #[derive(serde::Serialize)]
    struct Cell {
        n: u32,
        lambda_min: String,
        residual: String,
        precision_bits: usize,
        exact_zero: bool,
    }
    #[derive(serde::Serialize)]
    struct Payload {
        source: String,
        finite_n_only: bool,
        verdict: String,
        half_ratio: Option<f64>,
        log_slope: Option<f64>,
        cells: Vec<Cell>,
    }
    serde_json::to_string_pretty(&Payload {
        source: source.to_string(),
        finite_n_only: true,
        verdict: r.verdict.to_string(),
        half_ratio: r.summary.half_ratio,
        log_slope: r.summary.decay_exponent,
        cells: r
            .cells
            .iter()
            .map(|c| Cell {
                n: c.degree,
                lambda_min: if c.exact_zero {
                    "0".into()
                } else {
                    to_dec_string(&c.lambda_min)
                },
                residual: to_dec_string(&c.residual_abs),
                precision_bits: c.bits,
                exact_zero: c.exact_zero,
            })
            .collect(),
    })
    .expect("serialization")
}

/// JSON payload of a scaling sweep (for non-product multivariate sources).
pub fn sweep_json(s: &ScalingSweep) -> String {
    #[derive(serde::Serialize)]
    struct Cell {
        n: u32,
        lambda_min: String,
        residual: String,
        precision_bits: usize,
        exact_zero: bool,
    }
    #[derive(serde::Serialize)]
    struct Column {
        radius: String,
        floor_positive: bool,
        cells: Vec<Cell>,
    }
    #[derive(serde::Serialize)]
    struct Payload {
        source: String,
        finite_n_only: bool,
        n_max: u32,
        monotone_consistent: bool,
        columns: Vec<Column>,
        note: String,
    }
    serde_json::to_string_pretty(&Payload {
        source: s.source.clone(),
        finite_n_only: true,
        n_max: s.n_max,
        monotone_consistent: s.monotone_consistent,
        columns: s
            .columns
            .iter()
            .map(|c| Column {
                radius: rat_to_string(&c.radius),
                floor_positive: c.trend.floor_positive,
                cells: c
                    .cells
                    .iter()
                    .map(|cell| Cell {
                        n: cell.degree,
                        lambda_min: if cell.exact_zero {
                            "0".into()
                        } else {
                            to_dec_string(&cell.lambda_min)
                        },
                        residual: to_dec_string(&cell.residual_abs),
                        precision_bits: cell.bits,
                        exact_zero: cell.exact_zero,
                    })
                    .collect(),
            })
            .collect(),
        note: "source is not a product: marginal-based verdicts do not apply; floors are \
               finite-degree evidence only"
            .to_string(),
    })
    .expect("serialization")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_json_specs() {
        let s = parse_source_spec(r#"{"kind":"gaussian"}"#).unwrap();
        assert!(matches!(s, SourceSpec::Gaussian));

        let s = parse_source_spec(
            r#"{"kind":"product","factors":[{"kind":"gaussian"},{"kind":"lognormal","sigma":1}]}"#,
        )
        .unwrap();
        match &s {
            SourceSpec::Product { factors } => {
                assert_eq!(factors.len(), 2);
                assert!(matches!(factors[1], SourceSpec::Lognormal { .. }));
            }
            _ => panic!(),
        }
        let src = build_source(&s, &RunConfig::default(), 4).unwrap();
        assert_eq!(src.d(), 2);

        // sigma as string with exact decimal
        let s = parse_source_spec(r#"{"kind":"lognormal","sigma":"0.5"}"#).unwrap();
        match s {
            SourceSpec::Lognormal { sigma } => assert_eq!(sigma, parse_rat("1/2").unwrap()),
            _ => panic!(),
        }
    }

    #[test]
    fn empty_product_rejected() {
        let s = parse_source_spec(r#"{"kind":"product","factors":[]}"#).unwrap();
        let err = build_source(&s, &RunConfig::default(), 2).unwrap_err();
        match err {
            Error::SourceSpec { violations } => {
                assert!(violations.iter().any(|v| v.contains("empty product")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shorthand_specs() {
        assert!(matches!(
            parse_source_spec("gaussian").unwrap(),
            SourceSpec::Gaussian
        ));
        let s = parse_source_spec("product:gaussian|lognormal:1").unwrap();
        assert!(matches!(s, SourceSpec::Product { .. }));
        let s = parse_source_spec("atomic:-1@0.5,1@0.5").unwrap();
        match &s {
            SourceSpec::Atomic { atoms } => assert_eq!(atoms.len(), 2),
            _ => panic!(),
        }
        let s = parse_source_spec("scaled:2:gaussian").unwrap();
        assert!(matches!(s, SourceSpec::Scaled { .. }));
        assert!(parse_source_spec("fourier").is_err());
    }

    #[test]
    fn violations_are_collected() {
        let s = parse_source_spec(
            r#"{"kind":"product","factors":[
                {"kind":"lognormal","sigma":"-1"},
                {"kind":"gaussian"},{"kind":"gaussian"},{"kind":"gaussian"},
                {"kind":"gaussian"}]}"#,
        )
        .unwrap();
        let err = build_source(&s, &RunConfig::default(), 2).unwrap_err();
        match err {
            Error::SourceSpec { violations } => {
                assert!(violations.len() >= 2); // bad sigma and dimension 5
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_points() {
        // kernelsum style: re,im pairs
        let p = parse_point("0,1;0,1").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].1, parse_rat("1").unwrap());
        // diagnose style: literals
        let p = parse_point("i,i").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].0, parse_rat("0").unwrap());
        assert_eq!(p[1].1, parse_rat("1").unwrap());
        // single coordinate pair
        let p = parse_point("0.5,-2").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].1, parse_rat("-2").unwrap());
        // literals with real and imaginary parts
        let p = parse_point("1+2i").unwrap();
        assert_eq!(p[0].0, parse_rat("1").unwrap());
        assert_eq!(p[0].1, parse_rat("2").unwrap());
        let p = parse_point("-i").unwrap();
        assert_eq!(p[0].1, parse_rat("-1").unwrap());
        let p = parse_point("1.5e0-0.5i").unwrap();
        assert_eq!(p[0].0, parse_rat("3/2").unwrap());
        assert_eq!(p[0].1, parse_rat("-1/2").unwrap());
    }

    #[test]
    fn parse_radii_list() {
        let r = parse_radii("0.5,1,2").unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[0], parse_rat("1/2").unwrap());
        assert!(parse_radii("0,1").is_err());
        assert!(parse_radii("-1").is_err());
    }
}
