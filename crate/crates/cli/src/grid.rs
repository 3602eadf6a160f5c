//! Parameter lists for the oracle grid: `7`, `2..8` (inclusive), `2,3,5`, or
//! any comma-separated mix such as `1..3,7`.

use anyhow::{bail, Context, Result};

pub fn parse_list(text: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        if part.is_empty() {
            bail!("empty entry in '{text}'");
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u32 = lo.trim().parse().with_context(|| format!("bad range start in '{part}'"))?;
            let hi: u32 = hi.trim().parse().with_context(|| format!("bad range end in '{part}'"))?;
            if lo > hi {
                bail!("empty range '{part}'");
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().with_context(|| format!("'{part}' is not a number"))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_list("7").unwrap(), vec![7]);
        assert_eq!(parse_list("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_list("5, 1..2,2").unwrap(), vec![1, 2, 5]);
        assert!(parse_list("4..2").is_err());
        assert!(parse_list("x").is_err());
        assert!(parse_list("1,,2").is_err());
    }
}
