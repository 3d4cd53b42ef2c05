//! Precomputed feature vectors from CSV: `d` float columns followed by one
//! integer label column. A first row that does not parse as numbers is taken
//! as a header.

use std::collections::BTreeSet;
use std::path::Path;

use super::Dataset;
use crate::error::DataError;

pub fn load_feature_csv(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut dim: Option<usize> = None;

    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let bad = |message: String| DataError::Csv {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() < 2 {
            return Err(bad(format!(
                "need at least one feature and a label, found {} columns",
                record.len()
            )));
        }
        let parsed: Result<Vec<f64>, _> = record
            .iter()
            .take(record.len() - 1)
            .map(str::parse::<f64>)
            .collect();
        let label = record[record.len() - 1].parse::<usize>();

        let (row, label) = match (parsed, label) {
            (Ok(row), Ok(label)) => (row, label),
            _ if i == 0 => continue,
            (Err(e), _) => return Err(bad(format!("non-numeric feature: {e}"))),
            (_, Err(e)) => {
                return Err(bad(format!(
                    "label `{}` is not a nonnegative integer: {e}",
                    &record[record.len() - 1]
                )))
            }
        };
        if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
            return Err(bad(format!("non-finite value in column {}", pos + 1)));
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(bad(format!(
                    "expected {d} feature columns, found {}",
                    row.len()
                )))
            }
            Some(_) => {}
        }
        features.extend(row);
        labels.push(label);
    }

    let Some(dim) = dim else {
        return Err(DataError::EmptyFile {
            path: path.to_path_buf(),
        });
    };
    let distinct: BTreeSet<usize> = labels.iter().copied().collect();
    let classes = distinct.len();
    if let Some(&label) = distinct.iter().find(|&&l| l >= classes) {
        return Err(DataError::Csv {
            path: path.to_path_buf(),
            line: 0,
            message: format!(
                "labels must be contiguous from 0; found {} distinct labels including {label}",
                classes
            ),
        });
    }
    Dataset::new(features, labels, dim, classes)
}

fn csv_error(path: &Path, e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    DataError::Csv {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn load(contents: &str) -> Result<Dataset, DataError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        fs::write(&path, contents).unwrap();
        load_feature_csv(&path)
    }

    #[test]
    fn hundred_dim_binary() {
        let mut text = String::new();
        for r in 0..6 {
            let row: Vec<String> = (0..100)
                .map(|c| format!("{}", (r * c) as f64 * 0.01))
                .collect();
            text.push_str(&format!("{},{}\n", row.join(","), r % 2));
        }
        let d = load(&text).unwrap();
        assert_eq!((d.len(), d.dim(), d.classes()), (6, 100, 2));
        assert_eq!(d.row(2)[3], 0.06);
    }

    #[test]
    fn header_crlf_and_single_row() {
        let d = load("x,y,label\r\n1.5,-2,0\r\n").unwrap();
        assert_eq!((d.len(), d.dim(), d.classes()), (1, 2, 1));
        assert_eq!(d.row(0), &[1.5, -2.0]);
    }

    #[test]
    fn empty_file_rejected() {
        assert!(matches!(load(""), Err(DataError::EmptyFile { .. })));
        assert!(matches!(load("a,b,c\n"), Err(DataError::EmptyFile { .. })));
    }

    #[test]
    fn ragged_and_non_numeric_rows_name_the_line() {
        let err = load("1,2,0\n3,4,1\n5,1\n").unwrap_err();
        assert!(matches!(err, DataError::Csv { line: 3, .. }), "{err}");
        let err = load("1,2,0\n3,abc,1\n").unwrap_err();
        assert!(matches!(err, DataError::Csv { line: 2, .. }), "{err}");
        let err = load("1,2,0\n3,4,0.5\n").unwrap_err();
        assert!(matches!(err, DataError::Csv { line: 2, .. }), "{err}");
    }

    #[test]
    fn non_contiguous_labels_rejected() {
        assert!(load("1,0\n2,4\n").is_err());
    }
}
