//! JSON chain format.
//!
//! A chain is either a bare list of words or an object
//! `{"n": 2, "coordinates": "angular" | "unit", "words": [...]}`.
//! A word is a list of equivariant forms `{"prime": [terms], "dblprime": [terms]}`
//! and a term is `{"mode": [m₁,…,m_n], "indices": [i₁,…,i_k], "re": …, "im": …}`
//! with 1-based indices. Coefficients are JSON numbers or decimal-free
//! rational strings `"p/q"`; `im` defaults to 0.
//!
//! In angular coordinates (the default) a term means `c·e^{i⟨m,φ⟩} dφ^I`
//! with `φ = 2πx`; this is the only form with exact rational coefficients
//! for `d`. In unit coordinates it means `c·e^{2πi⟨m,x⟩} dx^I` and is only
//! accepted by the float backend.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::chains::Chain;
use crate::error::{Error, Result};
use crate::forms::{EquivariantForm, TrigPolyForm};
use crate::scalar::{Coeff, GaussRational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinates {
    Angular,
    Unit,
}

struct Term {
    mode: Vec<i64>,
    indices: Vec<usize>,
    re: Value,
    im: Value,
}

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Parses `"p/q"`, `"p"` or an integral JSON number.
pub fn parse_rational(v: &Value) -> Result<(i64, i64)> {
    match v {
        Value::Null => Ok((0, 1)),
        Value::Number(x) => {
            if let Some(i) = x.as_i64() {
                Ok((i, 1))
            } else {
                Err(perr(format!("{x} is not an integer; exact coefficients are written \"p/q\"")))
            }
        }
        Value::String(s) => {
            let (p, q) = match s.split_once('/') {
                Some((p, q)) => (p.trim(), q.trim()),
                None => (s.trim(), "1"),
            };
            let p: i64 = p.parse().map_err(|_| perr(format!("bad numerator in {s:?}")))?;
            let q: i64 = q.parse().map_err(|_| perr(format!("bad denominator in {s:?}")))?;
            if q == 0 {
                return Err(perr(format!("zero denominator in {s:?}")));
            }
            Ok((p, q))
        }
        other => Err(perr(format!("coefficient {other} must be a number or a \"p/q\" string"))),
    }
}

fn parse_float(v: &Value) -> Result<f64> {
    match v {
        Value::Number(x) => x.as_f64().ok_or_else(|| perr(format!("{x} is not a float"))),
        _ => {
            let (p, q) = parse_rational(v)?;
            Ok(p as f64 / q as f64)
        }
    }
}

fn parse_terms(v: Option<&Value>, what: &str) -> Result<Vec<Term>> {
    let Some(v) = v else { return Ok(Vec::new()) };
    let arr = v.as_array().ok_or_else(|| perr(format!("{what} must be a list of terms")))?;
    arr.iter()
        .map(|t| {
            let obj = t.as_object().ok_or_else(|| perr("a term must be an object"))?;
            for k in obj.keys() {
                if !["mode", "indices", "re", "im"].contains(&k.as_str()) {
                    return Err(perr(format!("unknown term field {k:?}")));
                }
            }
            let mode = obj
                .get("mode")
                .and_then(Value::as_array)
                .ok_or_else(|| perr("term without a \"mode\" list"))?
                .iter()
                .map(|m| m.as_i64().ok_or_else(|| perr(format!("mode entry {m} is not an integer"))))
                .collect::<Result<Vec<i64>>>()?;
            let indices = match obj.get("indices") {
                None => Vec::new(),
                Some(v) => v
                    .as_array()
                    .ok_or_else(|| perr("\"indices\" must be a list"))?
                    .iter()
                    .map(|i| match i.as_u64() {
                        Some(k) if k >= 1 => Ok(k as usize - 1),
                        _ => Err(perr(format!("index {i} is not a positive integer (indices are 1-based)"))),
                    })
                    .collect::<Result<Vec<usize>>>()?,
            };
            Ok(Term { mode, indices, re: obj.get("re").cloned().unwrap_or(Value::Null), im: obj.get("im").cloned().unwrap_or(Value::Null) })
        })
        .collect()
}

struct Doc<'a> {
    n: Option<usize>,
    coords: Coordinates,
    words: &'a [Value],
}

fn document(v: &Value) -> Result<Doc<'_>> {
    match v {
        Value::Array(words) => Ok(Doc { n: None, coords: Coordinates::Angular, words }),
        Value::Object(obj) => {
            for k in obj.keys() {
                if !["n", "coordinates", "words"].contains(&k.as_str()) {
                    return Err(perr(format!("unknown chain field {k:?}")));
                }
            }
            let n = match obj.get("n") {
                None => None,
                Some(x) => Some(x.as_u64().ok_or_else(|| perr("\"n\" must be a positive integer"))? as usize),
            };
            let coords = match obj.get("coordinates").and_then(Value::as_str) {
                None | Some("angular") => Coordinates::Angular,
                Some("unit") => Coordinates::Unit,
                Some(other) => return Err(perr(format!("unknown coordinates {other:?}"))),
            };
            let words = obj.get("words").and_then(Value::as_array).ok_or_else(|| perr("chain object without a \"words\" list"))?;
            Ok(Doc { n, coords, words })
        }
        _ => Err(perr("a chain is a list of words or an object with \"words\"")),
    }
}

fn build<S: Coeff>(v: &Value, coeff: impl Fn(&Term) -> Result<S>) -> Result<(Chain<S>, Coordinates)> {
    let doc = document(v)?;
    let mut parsed: Vec<Vec<(Vec<Term>, Vec<Term>)>> = Vec::new();
    let mut n = doc.n;
    for w in doc.words {
        let slots = w.as_array().ok_or_else(|| perr("a word must be a list of forms"))?;
        if slots.is_empty() {
            return Err(perr("a word needs at least one form"));
        }
        let mut forms = Vec::new();
        for f in slots {
            let obj = f.as_object().ok_or_else(|| perr("a form must be an object"))?;
            for k in obj.keys() {
                if k != "prime" && k != "dblprime" {
                    return Err(perr(format!("unknown form field {k:?}")));
                }
            }
            let p = parse_terms(obj.get("prime"), "prime")?;
            let d = parse_terms(obj.get("dblprime"), "dblprime")?;
            for t in p.iter().chain(&d) {
                match n {
                    None => n = Some(t.mode.len()),
                    Some(k) if k != t.mode.len() => return Err(perr(format!("mode of length {} on a torus of dimension {k}", t.mode.len()))),
                    _ => {}
                }
            }
            forms.push((p, d));
        }
        parsed.push(forms);
    }
    let n = n.ok_or_else(|| perr("cannot infer the dimension of an empty chain; give \"n\""))?;
    let mut chain = Chain::zero(n);
    for word in parsed {
        let mut forms = Vec::with_capacity(word.len());
        for (p, d) in word {
            let mut prime = TrigPolyForm::zero(n);
            for t in &p {
                prime.add_term(&t.mode, &t.indices, coeff(t)?)?;
            }
            let mut dbl = TrigPolyForm::zero(n);
            for t in &d {
                dbl.add_term(&t.mode, &t.indices, coeff(t)?)?;
            }
            forms.push(EquivariantForm::new(prime, dbl)?);
        }
        chain = chain.add(&Chain::from_forms(&forms)?);
    }
    Ok((chain, doc.coords))
}

/// Exact chain in angular coordinates.
pub fn parse_chain_exact(v: &Value) -> Result<Chain<GaussRational>> {
    if document(v)?.coords == Coordinates::Unit {
        return Err(perr("unit coordinates carry factors of 2π and have no exact form; use the float backend"));
    }
    let (chain, _) = build(v, |t| Ok(GaussRational::from_parts(parse_rational(&t.re)?, parse_rational(&t.im)?)))?;
    Ok(chain)
}

/// Float chain in the evaluator's normalization (unit coordinates).
pub fn parse_chain_float(v: &Value) -> Result<Chain<Complex64>> {
    let coords = document(v)?.coords;
    let (chain, _) = build(v, |t| {
        let z = Complex64::new(parse_float(&t.re)?, parse_float(&t.im)?);
        Ok(match coords {
            Coordinates::Unit => z,
            Coordinates::Angular => z * TAU.powi(t.indices.len() as i32),
        })
    })?;
    Ok(chain)
}

/// One word per chain term, each slot a single monomial, in angular
/// coordinates. Parsing the result gives back the chain.
pub fn chain_to_json(chain: &Chain<GaussRational>) -> Value {
    let n = chain.dim();
    let words: Vec<Value> = chain
        .terms()
        .map(|(w, k)| {
            let slots: Vec<Value> = w
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let (re, im) = if i == 0 { (k.re_parts(), k.im_parts()) } else { ((1, 1), (0, 1)) };
                    let term = json!({
                        "mode": m.mode.to_vec(n),
                        "indices": m.idx.indices().map(|j| j + 1).collect::<Vec<_>>(),
                        "re": format!("{}/{}", re.0, re.1),
                        "im": format!("{}/{}", im.0, im.1),
                    });
                    if m.dbl {
                        json!({"dblprime": [term]})
                    } else {
                        json!({"prime": [term]})
                    }
                })
                .collect();
            Value::Array(slots)
        })
        .collect();
    json!({"n": n, "coordinates": "angular", "words": words})
}
