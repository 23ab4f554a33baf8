//! JSON encodings: polynomial term lists, knot tables and web specs.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::{CPoly, QPoly};
use crate::reduce;
use crate::scalar::{f64_to_rat_exact, is_finite, parse_rat, rat_to_f64, Rat, Ring, Scalar, Q};
use crate::web::{catalog, CubicWeb, NormalForm};

/// `[[m, n, re, im], ...]` with rational exponents as strings when not integral.
pub fn poly_to_json(p: &CPoly) -> Value {
    let ex = |r: Rat| if *r.denom() == 1 { json!(r.to_integer()) } else { json!(r.to_string()) };
    Value::Array(p.terms().map(|(m, n, c)| json!([ex(m), ex(n), c.re, c.im])).collect())
}

fn rat_from_json(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(Rat::from_integer)
            .or_else(|| n.as_f64().and_then(crate::scalar::f64_to_rat_exact))
            .ok_or_else(|| Error::ParseError(format!("exponent {n} is not rational"))),
        Value::String(s) => parse_rat(s).ok_or_else(|| Error::ParseError(format!("exponent `{s}` is not rational"))),
        other => Err(Error::ParseError(format!("exponent must be a number or string, got {other}"))),
    }
}

pub fn scalar_from_json(v: &Value) -> Result<Scalar> {
    match v {
        Value::Number(n) => Ok(Scalar::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| Error::ParseError("complex real part".into()))?;
            let im = a[1].as_f64().ok_or_else(|| Error::ParseError("complex imaginary part".into()))?;
            Ok(Scalar::new(re, im))
        }
        other => Err(Error::ParseError(format!("expected a number or [re, im], got {other}"))),
    }
}

pub fn poly_from_json(v: &Value) -> Result<CPoly> {
    let arr = v.as_array().ok_or_else(|| Error::ParseError("polynomial must be a list of terms".into()))?;
    let mut p = CPoly::zero();
    let mut seen = BTreeSet::new();
    for t in arr {
        let t = t.as_array().ok_or_else(|| Error::ParseError("term must be [m, n, re, im]".into()))?;
        if t.len() != 3 && t.len() != 4 {
            return Err(Error::ParseError("term must be [m, n, re] or [m, n, re, im]".into()));
        }
        let (m, n) = (rat_from_json(&t[0])?, rat_from_json(&t[1])?);
        if !seen.insert((m, n)) {
            return Err(Error::ParseError(format!("duplicate exponent pair ({m}, {n})")));
        }
        let re = t[2].as_f64().ok_or_else(|| Error::ParseError("coefficient must be numeric".into()))?;
        let im = if t.len() == 4 { t[3].as_f64().ok_or_else(|| Error::ParseError("coefficient must be numeric".into()))? } else { 0.0 };
        p.add_term(m, n, Scalar::new(re, im));
    }
    Ok(p)
}

fn coeff_from_json(v: &Value) -> Result<(Scalar, Option<Rat>)> {
    match v {
        Value::String(s) => {
            let r = parse_rat(s).ok_or_else(|| Error::ParseError(format!("coefficient `{s}` is not rational")))?;
            Ok((Scalar::new(rat_to_f64(r), 0.0), Some(r)))
        }
        Value::Number(n) => {
            let x = n.as_f64().ok_or_else(|| Error::ParseError("coefficient must be numeric".into()))?;
            Ok((Scalar::new(x, 0.0), f64_to_rat_exact(x)))
        }
        other => {
            let z = scalar_from_json(other)?;
            Ok((z, if z.im == 0.0 { f64_to_rat_exact(z.re) } else { None }))
        }
    }
}

/// Term list `[[m, n, c], ...]` with `c` a number, a rational string or
/// `[re, im]`; also `[m, n, re, im]`. Exact when every coefficient is a
/// small rational.
pub fn field_from_json(v: &Value) -> Result<Field> {
    let arr = v.as_array().ok_or_else(|| Error::ParseError("polynomial must be a list of terms".into()))?;
    let mut num = CPoly::zero();
    let mut exact = Some(QPoly::zero());
    let mut seen = BTreeSet::new();
    for t in arr {
        let t = t.as_array().ok_or_else(|| Error::ParseError("term must be [m, n, c]".into()))?;
        let (m, n, c) = match t.len() {
            3 => (rat_from_json(&t[0])?, rat_from_json(&t[1])?, coeff_from_json(&t[2])?),
            4 => (rat_from_json(&t[0])?, rat_from_json(&t[1])?, coeff_from_json(&Value::Array(t[2..].to_vec()))?),
            _ => return Err(Error::ParseError("term must be [m, n, c] or [m, n, re, im]".into())),
        };
        if !seen.insert((m, n)) {
            return Err(Error::ParseError(format!("duplicate exponent pair ({m}, {n})")));
        }
        if !is_finite(c.0) {
            return Err(Error::ParseError("coefficient must be finite".into()));
        }
        num.add_term(m, n, c.0);
        exact = match (exact, c.1) {
            (Some(mut e), Some(r)) => {
                e.add_term(m, n, Q::from_rat(r));
                Some(e)
            }
            _ => None,
        };
    }
    Ok(match exact {
        Some(e) => Field::from_exact(e),
        None => Field::from_numeric(num),
    })
}

fn num_param(params: &Value, key: &str) -> Result<Option<Scalar>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => parse_rat(s)
            .map(|r| Some(Scalar::new(rat_to_f64(r), 0.0)))
            .ok_or_else(|| Error::ParseError(format!("parameter `{key}` = `{s}` is not a number"))),
        Some(v) => scalar_from_json(v).map(Some),
    }
}

fn uint_param(params: &Value, key: &str) -> Result<Option<u32>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .map(Some)
            .ok_or_else(|| Error::ParseError(format!("parameter `{key}` must be a non-negative integer"))),
    }
}

fn pair_param(v: &Value, key: &str) -> Result<Option<(f64, f64)>> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(a)) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(x), Some(y)) => Ok(Some((x, y))),
            _ => Err(Error::ParseError(format!("`{key}` must hold two numbers"))),
        },
        _ => Err(Error::ParseError(format!("`{key}` must be a two-element list"))),
    }
}

/// Parameters of a catalog entry or a reduced-family member, as read from
/// a spec's `params` object.
pub struct Params<'a>(pub &'a Value);

impl Params<'_> {
    pub fn scalar(&self, key: &str) -> Result<Option<Scalar>> {
        num_param(self.0, key)
    }
    pub fn uint(&self, key: &str) -> Result<Option<u32>> {
        uint_param(self.0, key)
    }
}

pub fn normal_form_from_json(v: &Value) -> Result<NormalForm> {
    let empty = json!({});
    let params = v.get("params").unwrap_or(&empty);
    let name = match v.get("name").or_else(|| v.get("form")) {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => format!("form{n}"),
        _ => return Err(Error::ParseError("catalog spec needs `name` (e.g. \"form6\")".into())),
    };
    let p = Params(params);
    NormalForm::parse(&name, p.uint("m0")?, p.scalar("L")?)
}

fn weights_from_json(v: &Value) -> Result<Option<(Rat, Rat)>> {
    match v.get("weights") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(a)) if a.len() == 2 => Ok(Some((rat_from_json(&a[0])?, rat_from_json(&a[1])?))),
        _ => Err(Error::ParseError("`weights` must be [w_x, w_y]".into())),
    }
}

fn base_point_from_json(v: &Value) -> Result<(Scalar, Scalar)> {
    match v.get("base_point") {
        None | Some(Value::Null) => Ok((Scalar::new(0.0, 0.0), Scalar::new(0.0, 0.0))),
        Some(Value::Array(a)) if a.len() == 2 => Ok((scalar_from_json(&a[0])?, scalar_from_json(&a[1])?)),
        _ => Err(Error::ParseError("`base_point` must be [x, y]".into())),
    }
}

/// Integration settings of a profile spec: `range` and `step`.
pub fn profile_settings(v: &Value, default_range: (f64, f64)) -> Result<((f64, f64), f64)> {
    let range = pair_param(v, "range")?.unwrap_or(default_range);
    let step = match v.get("step") {
        None | Some(Value::Null) => 1e-2,
        Some(s) => s.as_f64().ok_or_else(|| Error::ParseError("`step` must be a number".into()))?,
    };
    Ok((range, step))
}

/// Build a web from its JSON spec:
///
/// ```json
/// {"kind": "catalog", "name": "form6", "params": {"L": 0.785}}
/// {"kind": "polynomial", "coefficients": {"S": [], "A": [[1,0,2]], "B": [[0,1,1]]}, "weights": [2,3]}
/// {"kind": "profile", "family": "parabolic", "params": {"a0": 0.333, "L": 0.785}, "range": [-0.5, 0.5]}
/// ```
pub fn web_from_json(v: &Value) -> Result<CubicWeb> {
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or("catalog");
    match kind {
        "catalog" => {
            let form = normal_form_from_json(v)?;
            let mut web = catalog(&form);
            if v.get("base_point").is_some() {
                return Err(Error::InvalidInput("catalog webs are based at the origin".into()));
            }
            if let Some(n) = v.get("label").and_then(Value::as_str) {
                web = web.with_name(n);
            }
            Ok(web)
        }
        "polynomial" => {
            let c = v.get("coefficients").ok_or_else(|| Error::ParseError("polynomial spec needs `coefficients`".into()))?;
            let weights = weights_from_json(v)?;
            let base = base_point_from_json(v)?;
            let name = v.get("name").and_then(Value::as_str).unwrap_or("polynomial web").to_string();
            let get = |k: &str| c.get(k).map(field_from_json).transpose();
            if let (Some(s), Some(a), Some(b)) = (get("S")?, get("A")?, get("B")?) {
                return Ok(CubicWeb::monic(s, a, b, weights, base, name));
            }
            match (get("K3")?, get("K2")?, get("K1")?, get("K0")?) {
                (Some(k3), Some(k2), Some(k1), Some(k0)) => CubicWeb::new([k3, k2, k1, k0], weights, base, name),
                _ => Err(Error::ParseError("coefficients need S, A, B or K3, K2, K1, K0".into())),
            }
        }
        "profile" => Ok(profile_from_json(v)?.1),
        other => Err(Error::ParseError(format!("unknown web kind `{other}`"))),
    }
}

/// Reduced-family member from a profile spec; returns the profile JSON and
/// the web.
pub fn profile_from_json(v: &Value) -> Result<(Value, CubicWeb)> {
    let empty = json!({});
    let p = Params(v.get("params").unwrap_or(&empty));
    let family = v.get("family").and_then(Value::as_str).ok_or_else(|| Error::ParseError("profile spec needs `family`".into()))?;
    let zero = Scalar::new(0.0, 0.0);
    match family {
        "parabolic" => {
            let (range, step) = profile_settings(v, (-0.5, 0.5))?;
            let s0 = p.scalar("s0")?.unwrap_or(zero);
            let a0 = p.scalar("a0")?.unwrap_or(Scalar::new(1.0 / 3.0, 0.0));
            let b0 = match (p.scalar("b0")?, p.scalar("L")?) {
                (Some(b), _) => b,
                (None, Some(l)) => reduce::parabolic_b0_for(l),
                (None, None) => zero,
            };
            let (prof, web) = reduce::integrate_parabolic(s0, a0, b0, range, step)?;
            Ok((prof.to_json(), web))
        }
        "hyperbolic" => {
            let (range, step) = profile_settings(v, (-0.6, 0.6))?;
            let m0 = p.uint("m0")?.unwrap_or(0);
            let sigma0 = p.scalar("sigma0")?.or(p.scalar("s0")?).unwrap_or(zero);
            let alpha0 = p.scalar("alpha0")?.or(p.scalar("a0")?).unwrap_or(zero);
            let beta0 = p.scalar("beta0")?.or(p.scalar("b0")?).unwrap_or(zero);
            let (prof, web) = reduce::integrate_hyperbolic(sigma0, alpha0, beta0, m0, range, step)?;
            Ok((prof.to_json(), web))
        }
        other => Err(Error::ParseError(format!("unknown profile family `{other}`"))),
    }
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))
}

/// JSON of a polynomial web (`null` coefficients for other backings).
pub fn web_to_json(web: &CubicWeb) -> Value {
    let coeff = |f: &Field| match f {
        Field::Poly(p) => poly_to_json(&p.numeric),
        _ => Value::Null,
    };
    let c = |z: Scalar| json!([z.re, z.im]);
    let mut coefficients = serde_json::Map::new();
    if web.is_monic() {
        for (k, f) in ["S", "A", "B"].iter().zip(&web.coeffs[1..]) {
            coefficients.insert(k.to_string(), coeff(f));
        }
    } else {
        for (k, f) in ["K3", "K2", "K1", "K0"].iter().zip(&web.coeffs) {
            coefficients.insert(k.to_string(), coeff(f));
        }
    }
    json!({
        "kind": "polynomial",
        "name": web.name,
        "coefficients": coefficients,
        "weights": web.weights.map(|(a, b)| [a.to_string(), b.to_string()]),
        "base_point": [c(web.base_point.0), c(web.base_point.1)],
    })
}
