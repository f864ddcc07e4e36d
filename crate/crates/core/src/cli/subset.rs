use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Query-time selection of item indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubsetSpec {
    All,
    List(Vec<u64>),
    /// Inclusive range `[start, end]`.
    Range { start: u64, end: u64 },
    /// Indices with `index % modulus == residue`.
    Residue { modulus: u64, residue: u64 },
}

impl SubsetSpec {
    pub fn contains(&self, index: u64) -> bool {
        match self {
            SubsetSpec::All => true,
            SubsetSpec::List(v) => v.contains(&index),
            SubsetSpec::Range { start, end } => (*start..=*end).contains(&index),
            SubsetSpec::Residue { modulus, residue } => index % modulus == *residue,
        }
    }
}

fn number(s: &str, what: &str) -> Result<u64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid {what} '{s}' in subset")))
}

impl FromStr for SubsetSpec {
    type Err = Error;

    /// Parses `all`, `list:3,5,8`, `range:0:99` or `mod:2:1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.splitn(2, ':');
        let kind = parts.next().unwrap_or_default();
        let rest = parts.next();
        match (kind, rest) {
            ("all", None) => Ok(SubsetSpec::All),
            ("list", Some(items)) => Ok(SubsetSpec::List(
                items
                    .split(',')
                    .map(|i| number(i, "index"))
                    .collect::<Result<_>>()?,
            )),
            ("range", Some(bounds)) => {
                let (a, b) = bounds
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("range needs 'range:a:b', got '{s}'")))?;
                let (start, end) = (number(a, "range start")?, number(b, "range end")?);
                if start > end {
                    return Err(Error::Config(format!("empty range {start}..={end}")));
                }
                Ok(SubsetSpec::Range { start, end })
            }
            ("mod", Some(args)) => {
                let (m, r) = args
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("residue needs 'mod:m:r', got '{s}'")))?;
                let (modulus, residue) = (number(m, "modulus")?, number(r, "residue")?);
                if modulus == 0 || residue >= modulus {
                    return Err(Error::Config(format!(
                        "residue class needs 0 <= r < m, got m={modulus} r={residue}"
                    )));
                }
                Ok(SubsetSpec::Residue { modulus, residue })
            }
            _ => Err(Error::Config(format!("unrecognized subset '{s}'"))),
        }
    }
}

impl fmt::Display for SubsetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetSpec::All => write!(f, "all"),
            SubsetSpec::List(v) => {
                let items: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "list:{}", items.join(","))
            }
            SubsetSpec::Range { start, end } => write!(f, "range:{start}:{end}"),
            SubsetSpec::Residue { modulus, residue } => write!(f, "mod:{modulus}:{residue}"),
        }
    }
}
