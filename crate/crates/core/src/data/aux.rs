use std::collections::HashMap;
use std::path::Path;

use ndarray::Array2;
use super::domains::DatasetBundle;
use crate::{Error, Result};

pub const DEFAULT_AUX_DIM: usize = 256;

/// Per-user dense side information aligned with the bundle's user index.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxMatrix {
    pub values: Array2<f64>,
    /// Users that had no vector in the input and got zeros.
    pub missing: Vec<String>,
}

impl AuxMatrix {
    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub(crate) fn subset(&self, users: &[usize]) -> AuxMatrix {
        AuxMatrix {
            values: self.values.select(ndarray::Axis(0), users),
            missing: self.missing.clone(),
        }
    }
}

/// Reads headerless CSV rows `user,v1,...,vd`.
pub fn load_aux_vectors(
    path: impl AsRef<Path>,
    expected_dim: usize,
) -> Result<HashMap<String, Vec<f64>>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::ReadFile {
                path: path.to_path_buf(),
                source,
            },
            other => Error::invalid(format!("{other:?}")),
        })?;
    let mut out = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        let user = record.get(0).unwrap_or("").trim().to_string();
        if record.len() - 1 != expected_dim {
            return Err(Error::AuxVector {
                user,
                message: format!("expected {expected_dim} values, got {}", record.len() - 1),
            });
        }
        let mut v = Vec::with_capacity(expected_dim);
        for field in record.iter().skip(1) {
            let x: f64 = field.trim().parse().map_err(|_| Error::AuxVector {
                user: user.clone(),
                message: format!("`{field}` is not a number (line {line})"),
            })?;
            if !x.is_finite() {
                return Err(Error::AuxVector {
                    user: user.clone(),
                    message: format!("non-finite value on line {line}"),
                });
            }
            v.push(x);
        }
        if out.insert(user.clone(), v).is_some() {
            return Err(Error::AuxVector {
                user,
                message: format!("duplicate entry on line {line}"),
            });
        }
    }
    Ok(out)
}

/// Aligns vectors to the bundle's users; absent users get zeros and are
/// recorded in the provenance.
pub fn attach_aux(bundle: &mut DatasetBundle, vectors: &HashMap<String, Vec<f64>>, dim: usize) {
    let users = &bundle.source.user_index;
    let mut values = Array2::zeros((users.len(), dim));
    let mut missing = Vec::new();
    for (r, user) in users.iter().enumerate() {
        match vectors.get(user) {
            Some(v) => values.row_mut(r).assign(&ndarray::ArrayView1::from(v.as_slice())),
            None => missing.push(user.clone()),
        }
    }
    bundle.provenance.aux_missing_users = missing.len();
    bundle.aux = Some(AuxMatrix { values, missing });
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn csv_file(rows: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for r in rows {
            writeln!(f, "{r}").unwrap();
        }
        f
    }

    fn row(user: &str, n: usize) -> String {
        let vals: Vec<String> = (0..n).map(|i| format!("{}", i as f64 * 0.01)).collect();
        format!("{user},{}", vals.join(","))
    }

    #[test]
    fn accepts_full_width() {
        let f = csv_file(&[row("u1", 256)]);
        let got = load_aux_vectors(f.path(), 256).unwrap();
        assert_eq!(got["u1"].len(), 256);
    }

    #[test]
    fn rejects_short_row() {
        let f = csv_file(&[row("u1", 255)]);
        assert!(matches!(load_aux_vectors(f.path(), 256), Err(Error::AuxVector { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        let f = csv_file(&["u1,1.0,NaN".to_string()]);
        assert!(matches!(load_aux_vectors(f.path(), 2), Err(Error::AuxVector { .. })));
    }

    #[test]
    fn missing_users_get_zeros() {
        use crate::data::{binarize_and_filter, Interaction};
        let mk = |u: &str, i: &str| Interaction { user: u.into(), item: i.into(), rating: 5, timestamp: None };
        let mut b = binarize_and_filter(
            &[mk("1", "s"), mk("2", "s")],
            &[mk("1", "a"), mk("1", "b"), mk("2", "a"), mk("2", "b")],
            4,
            2,
        )
        .unwrap();
        let vectors = HashMap::from([("1".to_string(), vec![0.5, -1.0])]);
        attach_aux(&mut b, &vectors, 2);
        let aux = b.aux.as_ref().unwrap();
        assert_eq!(aux.values.row(0).to_vec(), vec![0.5, -1.0]);
        assert_eq!(aux.values.row(1).to_vec(), vec![0.0, 0.0]);
        assert_eq!(aux.missing, vec!["2"]);
        assert_eq!(b.provenance.aux_missing_users, 1);
    }
}
