//! Text formats: generating-vector files, space descriptions in JSON, and
//! float formatting for CSV output.
//!
//! Vector file layout (blank lines and `#` comments ignored):
//!
//! ```text
//! lattice <N> <s>
//! <z_1>
//! ...
//! ```
//!
//! or, for polynomial rules with components and modulus given as integer
//! encodings of their coefficient vectors (`Σ a_i b^i`),
//!
//! ```text
//! polylattice <b> <m> <n> <P>
//! <z_1>
//! ...
//! ```

use serde_json::{json, Value};

use crate::algebra::Poly;
use crate::error::{Error, Result};
use crate::points::{LatticeRule, PolyLatticeRule, Rule};
use crate::spaces::{Family, SpaceSpec};
use crate::weights::WeightScheme;

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn write_vector(rule: &Rule) -> String {
    let mut out = String::new();
    match rule {
        Rule::Lattice(r) => {
            out.push_str(&format!("lattice {} {}\n", r.n_points(), r.dimension()));
            for z in r.z() {
                out.push_str(&format!("{z}\n"));
            }
        }
        Rule::Polynomial(r) => {
            out.push_str(&format!(
                "polylattice {} {} {} {}\n",
                r.base(),
                r.m(),
                r.precision(),
                r.modulus().to_int()
            ));
            for z in r.z() {
                out.push_str(&format!("{}\n", z.to_int()));
            }
        }
    }
    out
}

fn parse_u64(tok: &str, what: &str) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| Error::Parse(format!("{what}: expected a non-negative integer, got {tok:?}")))
}

pub fn read_vector(text: &str) -> Result<Rule> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty vector file".into()))?
        .split_whitespace()
        .collect();
    let body: Vec<u64> = lines.map(|l| parse_u64(l, "component")).collect::<Result<_>>()?;
    match header.as_slice() {
        ["lattice", n, s] => {
            let n = parse_u64(n, "N")?;
            let s = parse_u64(s, "s")? as usize;
            if body.len() != s {
                return Err(Error::DimensionMismatch { expected: s, got: body.len() });
            }
            Ok(Rule::Lattice(LatticeRule::new(n, body)?))
        }
        ["polylattice", b, m, n, p] => {
            let b = parse_u64(b, "b")? as u32;
            let m = parse_u64(m, "m")? as u32;
            let n = parse_u64(n, "n")? as u32;
            let modulus = Poly::from_int(b, parse_u64(p, "P")?)?;
            let z = body.iter().map(|&c| Poly::from_int(b, c)).collect::<Result<Vec<_>>>()?;
            Ok(Rule::Polynomial(PolyLatticeRule::new(b, modulus, m, n, z)?))
        }
        _ => Err(Error::Parse(format!("unrecognised header {:?}", header.join(" ")))),
    }
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Parse(format!("{what} must be a number")))
}

/// Resolves a weights description for `s` dimensions. Besides the literal
/// scheme layout, product weights accept `{"constant": g}` or
/// `{"ratio": r}` (`γ_j = r^j`).
pub fn resolve_weights(v: &Value, s: usize) -> Result<WeightScheme> {
    let kind = v.get("type").and_then(Value::as_str).unwrap_or("");
    let params = v.get("params").cloned().unwrap_or(Value::Null);
    match kind {
        "product" if params.get("constant").is_some() => {
            Ok(WeightScheme::product_constant(number(&params["constant"], "constant")?, s))
        }
        "product" if params.get("ratio").is_some() => {
            Ok(WeightScheme::product_geometric(number(&params["ratio"], "ratio")?, s))
        }
        "finite_diameter" => {
            let diameter = params
                .get("diameter")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("finite_diameter needs an integer diameter".into()))?;
            let base = params
                .get("base")
                .ok_or_else(|| Error::Parse("finite_diameter needs a base scheme".into()))?;
            Ok(WeightScheme::FiniteDiameter {
                diameter: diameter as usize,
                base: Box::new(resolve_weights(base, s)?),
            })
        }
        _ => serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("weights: {e}"))),
    }
}

/// Parses a space description:
/// `{"family": "korobov", "alpha": 2, "p": 2 | "inf", "base"?: 2,
///   "kappa"?: 1.41, "weights": {...}}`.
pub fn parse_space(text: &str, s: usize) -> Result<SpaceSpec> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("space: {e}")))?;
    let family: Family = serde_json::from_value(v.get("family").cloned().unwrap_or(Value::Null))
        .map_err(|e| Error::Parse(format!("family: {e}")))?;
    let alpha = number(v.get("alpha").unwrap_or(&Value::Null), "alpha")?;
    let p = match v.get("p") {
        Some(Value::String(t)) if matches!(t.as_str(), "inf" | "infinity" | "∞") => f64::INFINITY,
        Some(x) => number(x, "p")?,
        None => return Err(Error::Parse("space needs p".into())),
    };
    let weights = resolve_weights(
        v.get("weights").ok_or_else(|| Error::Parse("space needs weights".into()))?,
        s,
    )?;
    let mut space = SpaceSpec::new(family, alpha, p, weights);
    if let Some(b) = v.get("base") {
        space.base = b.as_u64().ok_or_else(|| Error::Parse("base must be an integer".into()))? as u32;
    }
    if let Some(k) = v.get("kappa") {
        space.kappa = number(k, "kappa")?;
    }
    space.validate(s)?;
    Ok(space)
}

/// JSON form of a space, readable by [`parse_space`].
pub fn space_to_json(space: &SpaceSpec) -> Value {
    json!({
        "family": space.family,
        "alpha": space.alpha,
        "p": if space.p.is_infinite() { json!("inf") } else { json!(space.p) },
        "base": space.base,
        "kappa": space.kappa,
        "weights": space.weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_round_trip() {
        let r = Rule::Lattice(LatticeRule::new(101, vec![1, 27, 40]).unwrap());
        assert_eq!(read_vector(&write_vector(&r)).unwrap(), r);
        let p = Poly::from_int(2, 0b100101).unwrap();
        let z = vec![Poly::one(2), Poly::from_int(2, 7).unwrap()];
        let r = Rule::Polynomial(PolyLatticeRule::new(2, p, 5, 7, z).unwrap());
        assert_eq!(read_vector(&write_vector(&r)).unwrap(), r);
    }

    #[test]
    fn vector_errors() {
        assert!(matches!(read_vector(""), Err(Error::Parse(_))));
        assert!(matches!(read_vector("lattice 5 2\n1\n"), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(read_vector("grid 5\n"), Err(Error::Parse(_))));
        assert!(read_vector("# comment\nlattice 5 1\n1 # first\n").is_ok());
    }

    #[test]
    fn space_forms() {
        let sp = parse_space(
            r#"{"family":"korobov","alpha":2,"p":2,"weights":{"type":"product","params":{"ratio":0.9}}}"#,
            3,
        )
        .unwrap();
        assert_eq!(sp.weights, WeightScheme::product_geometric(0.9, 3));
        let sp2 = parse_space(&space_to_json(&sp).to_string(), 3).unwrap();
        assert_eq!(sp, sp2);
        let w = parse_space(
            r#"{"family":"walsh","alpha":2,"p":"inf","weights":{"type":"finite_diameter","params":{"diameter":2,"base":{"type":"product","params":{"constant":0.5}}}}}"#,
            4,
        )
        .unwrap();
        assert!(w.p.is_infinite());
        assert!(matches!(w.weights, WeightScheme::FiniteDiameter { diameter: 2, .. }));
        assert!(parse_space(r#"{"family":"nope","alpha":2,"p":2,"weights":{}}"#, 2).is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300] {
            let t = format_f64(x);
            assert_eq!(t.parse::<f64>().unwrap(), x);
        }
    }
}
