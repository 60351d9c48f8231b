//! The JSON form file: {"dim": k, "gram": [[...], ...]}. Entries are JSON
//! integers when they fit in 64 bits and decimal strings otherwise.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::forms::QuadraticForm;

#[derive(Serialize, Deserialize)]
struct FormFile {
    dim: usize,
    gram: Vec<Vec<Value>>,
}

fn entry(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| Error::Parse(format!("non-integer entry {n}"))),
        Value::String(s) => s.trim().parse().map_err(|_| Error::Parse(format!("non-integer entry {s:?}"))),
        other => Err(Error::Parse(format!("unexpected entry {other}"))),
    }
}

pub fn parse_form(text: &str) -> Result<QuadraticForm> {
    let file: FormFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.gram.len() != file.dim {
        return Err(Error::Parse(format!("dim is {} but the matrix has {} rows", file.dim, file.gram.len())));
    }
    let rows = file.gram.iter().map(|r| r.iter().map(entry).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    QuadraticForm::validate(rows)
}

pub fn read_form(path: &Path) -> Result<QuadraticForm> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_form(&text)
}

pub fn form_to_json(form: &QuadraticForm) -> String {
    let gram = form
        .gram()
        .rows()
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| match x.to_i64() {
                    Some(v) => Value::from(v),
                    None => Value::String(x.to_string()),
                })
                .collect()
        })
        .collect();
    serde_json::to_string(&FormFile { dim: form.dim(), gram }).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = QuadraticForm::from_i64_rows(&[vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 4]]).unwrap();
        let text = form_to_json(&f);
        assert_eq!(text, r#"{"dim":3,"gram":[[2,1,0],[1,2,1],[0,1,4]]}"#);
        assert_eq!(parse_form(&text).unwrap(), f);
        let big = "36893488147419103232";
        let g = parse_form(&format!(r#"{{"dim":3,"gram":[["{big}",0,0],[0,2,0],[0,0,2]]}}"#)).unwrap();
        assert!(form_to_json(&g).contains(&format!("\"{big}\"")));
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(parse_form("{"), Err(Error::Parse(_))));
        assert!(matches!(parse_form(r#"{"dim":2,"gram":[[2,0,0],[0,2,0],[0,0,2]]}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_form(r#"{"dim":3,"gram":[[2,0,0],[0,3,0],[0,0,2]]}"#), Err(Error::OddDiagonal(1))));
        assert!(matches!(parse_form(r#"{"dim":3,"gram":[[2,0,0],[0,2.5,0],[0,0,2]]}"#), Err(Error::Parse(_))));
    }
}
