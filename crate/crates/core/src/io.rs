//! Family file formats.
//!
//! Text: first line `n k s`, then one set per line as ascending,
//! space-separated elements. Blank lines and lines starting with `#` are
//! skipped. JSON: `{"n":…,"k":…,"s":…,"sets":[[…],…]}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{EmcError, Result};
use crate::family::{KSet, Params, SetFamily};

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    n: u32,
    k: u32,
    s: u32,
    sets: Vec<Vec<u32>>,
}

impl Serialize for SetFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let p = self.params();
        FamilyJson {
            n: p.n(),
            k: p.k(),
            s: p.s(),
            sets: self.iter().map(Vec::from).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SetFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = FamilyJson::deserialize(deserializer)?;
        family_from_json(raw).map_err(serde::de::Error::custom)
    }
}

fn family_from_json(raw: FamilyJson) -> Result<SetFamily> {
    let params = Params::new(raw.n, raw.k, raw.s)?;
    let mut sets = Vec::with_capacity(raw.sets.len());
    for (idx, list) in raw.sets.into_iter().enumerate() {
        if list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EmcError::Input(format!("set #{} is not strictly ascending", idx + 1)));
        }
        sets.push(KSet::from_elements(list)?);
    }
    SetFamily::new(params, sets)
}

pub fn family_to_json(f: &SetFamily) -> String {
    serde_json::to_string(f).expect("family serialization is infallible")
}

pub fn family_from_json_str(text: &str) -> Result<SetFamily> {
    Ok(serde_json::from_str(text)?)
}

pub fn family_to_text(f: &SetFamily) -> String {
    let p = f.params();
    let mut out = format!("{} {} {}\n", p.n(), p.k(), p.s());
    for set in f {
        let line: Vec<String> = set.elements().map(|x| x.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<u32>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<u32>()
                .map_err(|_| EmcError::Input(format!("line {lineno}: '{tok}' is not a non-negative integer")))
        })
        .collect()
}

/// Parses the text format; errors name the offending line.
pub fn family_from_text(text: &str) -> Result<SetFamily> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (lineno, header) = lines
        .next()
        .ok_or_else(|| EmcError::Input("empty family file".into()))?;
    let head = parse_numbers(header, lineno)?;
    let [n, k, s] = head[..] else {
        return Err(EmcError::Input(format!("line {lineno}: header must be 'n k s'")));
    };
    let params = Params::new(n, k, s).map_err(|e| EmcError::Input(format!("line {lineno}: {e}")))?;

    let mut sets: Vec<(usize, KSet)> = Vec::new();
    for (lineno, line) in lines {
        let elems = parse_numbers(line, lineno)?;
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EmcError::Input(format!("line {lineno}: elements must be strictly ascending")));
        }
        if elems.len() != k as usize {
            return Err(EmcError::Input(format!(
                "line {lineno}: expected {k} elements, found {}",
                elems.len()
            )));
        }
        if let Some(x) = elems.iter().find(|&&x| x == 0 || x > n) {
            return Err(EmcError::Input(format!("line {lineno}: element {x} outside [{n}]")));
        }
        let set = KSet::from_elements(elems).map_err(|e| EmcError::Input(format!("line {lineno}: {e}")))?;
        if let Some((first, _)) = sets.iter().find(|(_, s)| *s == set) {
            return Err(EmcError::Input(format!(
                "line {lineno}: duplicate of the set on line {first}"
            )));
        }
        sets.push((lineno, set));
    }
    SetFamily::new(params, sets.into_iter().map(|(_, s)| s))
}

/// Reads either format, choosing JSON when the content starts with `{`.
pub fn family_from_str(text: &str) -> Result<SetFamily> {
    if text.trim_start().starts_with('{') {
        family_from_json_str(text)
    } else {
        family_from_text(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::make_f_star;
    use proptest::prelude::*;

    #[test]
    fn text_example() {
        let f = family_from_text("5 2 2\n# star at 2\n1 2\n2 3\n\n2 4\n2 5\n").unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(family_to_text(&f), "5 2 2\n1 2\n2 3\n2 4\n2 5\n");
    }

    #[test]
    fn text_errors_name_lines() {
        let err = |t: &str| family_from_text(t).unwrap_err().to_string();
        assert!(err("4 2 2\n1 2\n2 1\n").contains("line 3"));
        assert!(err("4 2 2\n1 2\n1 2\n").contains("line 3: duplicate of the set on line 2"));
        assert!(err("4 2 2\n1 2 3\n").contains("line 2"));
        assert!(err("4 2 2\n1 5\n").contains("line 2"));
        assert!(err("4 2\n").contains("line 1"));
        assert!(err("").contains("empty"));
    }

    #[test]
    fn json_example() {
        let f = make_f_star(Params::new(4, 2, 2).unwrap()).unwrap();
        let json = family_to_json(&f);
        assert_eq!(json, r#"{"n":4,"k":2,"s":2,"sets":[[1,2],[1,3],[1,4]]}"#);
        assert_eq!(family_from_str(&json).unwrap(), f);
        assert!(family_from_json_str(r#"{"n":4,"k":2,"s":2,"sets":[[2,1]]}"#).is_err());
        assert!(family_from_json_str(r#"{"n":4,"k":2,"s":2,"sets":[[1,2],[1,2]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn both_formats_round_trip(n in 1u32..=12, k in 1u32..=4, s in 1u32..=4, pick in any::<u64>()) {
            prop_assume!(k <= n);
            let p = Params::new(n, k, s).unwrap();
            let sets: Vec<KSet> = p.all_ksets().enumerate().filter(|(i, _)| pick >> (i % 64) & 1 == 1).map(|(_, s)| s).collect();
            let f = SetFamily::new(p, sets).unwrap();
            prop_assert_eq!(family_from_str(&family_to_text(&f)).unwrap(), f.clone());
            prop_assert_eq!(family_from_str(&family_to_json(&f)).unwrap(), f);
        }
    }
}
