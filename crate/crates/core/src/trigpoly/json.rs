//! Canonical JSON for ring elements and series: sorted keys, rationals as
//! `"num/den"` strings, terms in the canonical map order.

use serde_json::{json, Map, Value};

use super::poly::{format_rational, parse_rational, Poly};
use super::ring::{CoeffMonomial, RingElement, Wavenumbers};
use super::series::{FieldSeries, Parity, SeriesKind, Truncation};
use crate::error::{Error, Result};

pub fn ring_to_json(e: &RingElement) -> Value {
    let terms: Vec<Value> = e
        .numerator()
        .iter()
        .map(|(m, w)| {
            json!({
                "p1": m.p1,
                "p2": m.p2,
                "r1": m.r1,
                "r2": m.r2,
                "w": format_rational(w),
            })
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("terms".into(), Value::Array(terms));
    let divisors: Vec<Value> = e
        .divisors()
        .map(|(f, p)| json!({"m": f.m(), "n": f.n(), "power": p}))
        .collect();
    if !divisors.is_empty() {
        obj.insert("divisors".into(), Value::Array(divisors));
    }
    Value::Object(obj)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Format(format!("missing key `{key}`")))
}

fn int_field(v: &Value, key: &str) -> Result<i64> {
    field(v, key)?
        .as_i64()
        .ok_or_else(|| Error::Format(format!("`{key}` is not an integer")))
}

pub fn ring_from_json(v: &Value) -> Result<RingElement> {
    let terms = field(v, "terms")?
        .as_array()
        .ok_or_else(|| Error::Format("`terms` is not an array".into()))?;
    let mut num = Poly::zero();
    for t in terms {
        let nonneg = |k: &str| -> Result<u32> {
            u32::try_from(int_field(t, k)?).map_err(|_| Error::Format(format!("`{k}` must be non-negative")))
        };
        let w = field(t, "w")?
            .as_str()
            .and_then(parse_rational)
            .ok_or_else(|| Error::Format("weight is not a rational string".into()))?;
        let m = CoeffMonomial::new(nonneg("p1")?, nonneg("p2")?, int_field(t, "r1")? as i32, int_field(t, "r2")? as i32);
        num.add_term(m, w);
    }
    let mut den = Vec::new();
    if let Some(ds) = v.get("divisors") {
        for d in ds.as_array().ok_or_else(|| Error::Format("`divisors` is not an array".into()))? {
            den.push((int_field(d, "m")?, int_field(d, "n")?, int_field(d, "power")? as u32));
        }
    }
    RingElement::from_parts(num, den)
}

pub fn series_to_json(f: &FieldSeries) -> Value {
    let t = f.truncation();
    let terms: Vec<Value> = f
        .iter()
        .map(|((d, h), c)| {
            json!({
                "d": d,
                "m": h.m(),
                "n": h.n(),
                "parity": match h.parity() { Parity::Cos => "cos", Parity::Sin => "sin" },
                "coeff": ring_to_json(c),
            })
        })
        .collect();
    json!({
        "kind": match f.kind() { SeriesKind::Scalar => "scalar", SeriesKind::Field => "field" },
        "wavenumbers": match f.wavenumbers() { Wavenumbers::Symbolic => "symbolic", Wavenumbers::UnitK1 => "unit_k1" },
        "orders": [t.max_d, t.max_a],
        "terms": terms,
    })
}

pub fn series_from_json(v: &Value) -> Result<FieldSeries> {
    let kind = match field(v, "kind")?.as_str() {
        Some("scalar") => SeriesKind::Scalar,
        Some("field") => SeriesKind::Field,
        other => return Err(Error::Format(format!("unknown series kind {other:?}"))),
    };
    let wavenumbers = match field(v, "wavenumbers")?.as_str() {
        Some("symbolic") => Wavenumbers::Symbolic,
        Some("unit_k1") => Wavenumbers::UnitK1,
        other => return Err(Error::Format(format!("unknown wavenumber mode {other:?}"))),
    };
    let orders = field(v, "orders")?
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Format("`orders` must be a pair".into()))?;
    let ord = |i: usize| orders[i].as_u64().map(|x| x as u32).ok_or_else(|| Error::Format("bad order".into()));
    let mut out = FieldSeries::zero(kind, wavenumbers, Truncation::new(ord(0)?, ord(1)?));
    for t in field(v, "terms")?
        .as_array()
        .ok_or_else(|| Error::Format("`terms` is not an array".into()))?
    {
        let parity = match field(t, "parity")?.as_str() {
            Some("cos") => Parity::Cos,
            Some("sin") => Parity::Sin,
            other => return Err(Error::Format(format!("unknown parity {other:?}"))),
        };
        out.add_term(
            int_field(t, "d")? as u32,
            int_field(t, "m")?,
            int_field(t, "n")?,
            parity,
            ring_from_json(field(t, "coeff")?)?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::poly::{frac, int};
    use crate::trigpoly::series::coeff;

    #[test]
    fn ring_json_has_sorted_keys_and_string_weights() {
        let e = coeff(2, 0, -2, 0, frac(1, 2));
        let s = serde_json::to_string(&ring_to_json(&e)).unwrap();
        assert_eq!(s, r#"{"terms":[{"p1":2,"p2":0,"r1":-2,"r2":0,"w":"1/2"}]}"#);
    }

    #[test]
    fn series_round_trip_with_divisor() {
        let mut f = FieldSeries::zero(SeriesKind::Field, Wavenumbers::Symbolic, Truncation::new(4, 4));
        let inv = RingElement::reciprocal_of_combination(1, -2, Wavenumbers::Symbolic).unwrap();
        f.add_term(1, 1, -2, Parity::Sin, inv.mul(&coeff(1, 1, 0, 0, int(3))));
        f.add_term(2, 0, 1, Parity::Cos, coeff(0, 1, -2, 0, frac(-5, 7)));
        let v = series_to_json(&f);
        assert!(v["terms"][0]["coeff"].get("divisors").is_some());
        assert_eq!(series_from_json(&v).unwrap(), f);
    }
}
