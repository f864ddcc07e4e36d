//! Weight ingestion from CSV and JSONL.
//!
//! CSV holds one weight per line, or `index,weight` rows when the first line
//! is the header `index,weight`. JSONL holds one `{"index": i, "weight": w}`
//! object per line. Blank lines are skipped; errors carry 1-based line numbers.

use std::io::BufRead;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::item::{check_weight, Population, WeightedItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for WeightFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(WeightFormat::Csv),
            "jsonl" | "ndjson" => Ok(WeightFormat::Jsonl),
            other => Err(Error::Config(format!("unknown weight format '{other}'"))),
        }
    }
}

impl WeightFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => WeightFormat::Jsonl,
            _ => WeightFormat::Csv,
        }
    }
}

pub fn read_population<R: BufRead>(reader: R, format: WeightFormat) -> Result<Population> {
    let items = match format {
        WeightFormat::Csv => read_csv(reader)?,
        WeightFormat::Jsonl => read_jsonl(reader)?,
    };
    Population::new(items).map_err(|e| match e {
        Error::EmptyPopulation => Error::Parse {
            line: 0,
            message: "input contains no weights".into(),
        },
        other => other,
    })
}

fn read_csv<R: BufRead>(reader: R) -> Result<Vec<WeightedItem>> {
    let mut items = Vec::new();
    let mut indexed = None;
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if indexed.is_none() {
            let header: Vec<_> = line.split(',').map(str::trim).collect();
            if header == ["index", "weight"] {
                indexed = Some(true);
                continue;
            }
            indexed = Some(false);
        }
        let item = if indexed == Some(true) {
            let mut fields = line.split(',').map(str::trim);
            let (Some(i), Some(w), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err(line_no, "expected two fields 'index,weight'"));
            };
            let index: u64 = i
                .parse()
                .map_err(|_| parse_err(line_no, &format!("invalid index '{i}'")))?;
            WeightedItem {
                index,
                weight: parse_weight(line_no, index, w)?,
            }
        } else {
            let index = items.len() as u64;
            WeightedItem {
                index,
                weight: parse_weight(line_no, index, line)?,
            }
        };
        items.push(item);
    }
    Ok(items)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    index: u64,
    weight: f64,
}

fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<WeightedItem>> {
    let mut items = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow =
            serde_json::from_str(&line).map_err(|e| parse_err(line_no, &e.to_string()))?;
        check_weight(row.index, row.weight).map_err(|e| parse_err(line_no, &e.to_string()))?;
        items.push(WeightedItem {
            index: row.index,
            weight: row.weight,
        });
    }
    Ok(items)
}

fn parse_weight(line: usize, index: u64, field: &str) -> Result<f64> {
    let weight: f64 = field
        .parse()
        .map_err(|_| parse_err(line, &format!("invalid weight '{field}'")))?;
    check_weight(index, weight).map_err(|e| parse_err(line, &e.to_string()))?;
    Ok(weight)
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}
