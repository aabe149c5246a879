use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One explicit rating.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub user: String,
    pub item: String,
    /// 1..=5
    pub rating: u8,
    pub timestamp: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatingFormat {
    /// `user::item::rating::timestamp` (MovieLens `ratings.dat`)
    MovielensDat,
    /// `user,item,rating,timestamp` with a header row
    Csv,
}

impl FromStr for RatingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "movielens-dat" | "movielens" | "dat" => Ok(RatingFormat::MovielensDat),
            "csv" => Ok(RatingFormat::Csv),
            _ => Err(Error::invalid(format!("unknown rating format `{s}`"))),
        }
    }
}

/// MovieLens files are Latin-1; fall back to that when the bytes are not
/// valid UTF-8.
fn read_text(path: &Path) -> Result<String> {
    let bytes = crate::error::read_file(path)?;
    Ok(match String::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => e.into_bytes().iter().map(|&b| b as char).collect(),
    })
}

fn parse_rating(raw: &str) -> std::result::Result<u8, String> {
    let raw = raw.trim();
    let value: f64 = raw
        .parse()
        .map_err(|_| format!("rating `{raw}` is not a number"))?;
    if value.fract() != 0.0 || !(1.0..=5.0).contains(&value) {
        return Err(format!("rating `{raw}` is not an integer in 1..=5"));
    }
    Ok(value as u8)
}

fn parse_timestamp(raw: &str) -> std::result::Result<Option<i64>, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|_| format!("timestamp `{raw}` is not an integer"))
}

/// Reads a rating log, preserving input order.
pub fn load_ratings(path: impl AsRef<Path>, format: RatingFormat) -> Result<Vec<Interaction>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    match format {
        RatingFormat::MovielensDat => {
            for (i, line) in text.lines().enumerate() {
                let line_no = i + 1;
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.trim_end_matches('\r').split("::").collect();
                if fields.len() != 4 && fields.len() != 3 {
                    return Err(perr(line_no, format!("expected 4 `::`-separated fields, got {}", fields.len())));
                }
                let rating = parse_rating(fields[2]).map_err(|m| perr(line_no, m))?;
                let timestamp = match fields.get(3) {
                    Some(ts) => parse_timestamp(ts).map_err(|m| perr(line_no, m))?,
                    None => None,
                };
                if fields[0].is_empty() || fields[1].is_empty() {
                    return Err(perr(line_no, "empty user or item key".into()));
                }
                out.push(Interaction {
                    user: fields[0].to_string(),
                    item: fields[1].to_string(),
                    rating,
                    timestamp,
                });
            }
        }
        RatingFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .flexible(true)
                .from_reader(text.as_bytes());
            let header = reader.headers().map_err(|e| perr(1, e.to_string()))?.clone();
            let names: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
            if names.len() < 3 || names[0] != "user" || names[1] != "item" || names[2] != "rating" {
                return Err(perr(1, format!("expected header `user,item,rating,timestamp`, got `{}`", names.join(","))));
            }
            for (i, record) in reader.records().enumerate() {
                let line_no = i + 2;
                let record = record.map_err(|e| perr(line_no, e.to_string()))?;
                if record.len() < 3 || record.len() > 4 {
                    return Err(perr(line_no, format!("expected 3 or 4 fields, got {}", record.len())));
                }
                let user = record[0].trim();
                let item = record[1].trim();
                if user.is_empty() || item.is_empty() {
                    return Err(perr(line_no, "empty user or item key".into()));
                }
                let rating = parse_rating(&record[2]).map_err(|m| perr(line_no, m))?;
                let timestamp = match record.get(3) {
                    Some(ts) => parse_timestamp(ts).map_err(|m| perr(line_no, m))?,
                    None => None,
                };
                out.push(Interaction {
                    user: user.to_string(),
                    item: item.to_string(),
                    rating,
                    timestamp,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoInteractions(path.to_path_buf()));
    }
    Ok(out)
}

/// Splits a `|`- or `,`-separated label list, trimming blanks.
pub fn parse_label_list(raw: &str) -> BTreeSet<String> {
    raw.split(['|', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Reads item labels.
///
/// `MovielensDat`: `movies.dat` lines `id::title::Genre|Genre`.
/// `Csv`: header `item,labels`, labels `|`-separated.
pub fn load_item_labels(
    path: impl AsRef<Path>,
    format: RatingFormat,
) -> Result<HashMap<String, BTreeSet<String>>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = HashMap::new();
    match format {
        RatingFormat::MovielensDat => {
            for (i, line) in text.lines().enumerate() {
                let line = line.trim_end_matches('\r');
                if line.trim().is_empty() {
                    continue;
                }
                let (id, rest) = line
                    .split_once("::")
                    .ok_or_else(|| perr(i + 1, "expected `id::title::genres`".into()))?;
                let (_, genres) = rest
                    .rsplit_once("::")
                    .ok_or_else(|| perr(i + 1, "expected `id::title::genres`".into()))?;
                out.insert(id.trim().to_string(), parse_label_list(genres));
            }
        }
        RatingFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(text.as_bytes());
            for (i, record) in reader.records().enumerate() {
                let record = record.map_err(|e| perr(i + 2, e.to_string()))?;
                if record.len() != 2 {
                    return Err(perr(i + 2, format!("expected `item,labels`, got {} fields", record.len())));
                }
                out.insert(record[0].trim().to_string(), parse_label_list(&record[1]));
            }
        }
    }
    if out.is_empty() {
        return Err(perr(0, "no item labels".into()));
    }
    Ok(out)
}
