//! File loaders for interaction and metadata files.
//!
//! Two interaction layouts are supported:
//! * `CsvHeader`: comma-separated with a `userId,movieId,rating,timestamp`
//!   style header (column order fixed, names ignored).
//! * `Tsv`: headerless `user<TAB>item[<TAB>weight]`; missing weight means
//!   implicit feedback with rating 1.0.
//!
//! Metadata is a headerless TSV `item<TAB>title<TAB>feature1|feature2|...`
//! where the feature column may be empty or absent.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{CatalogEntry, DatasetError, InteractionSet, ItemCatalog, RatingScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionFormat {
    CsvHeader,
    Tsv,
}

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn row_err(path: &Path, line: u64, reason: impl Into<String>) -> DatasetError {
    DatasetError::MalformedRow {
        path: path.display().to_string(),
        line,
        reason: reason.into(),
    }
}

/// Loads an interaction file, collapsing duplicate (user, item) pairs
/// (last by timestamp, then file order). Ratings are validated against the
/// declared scale; `None` marks implicit feedback where every row scores 1.0
/// unless the file carries an explicit weight column.
pub fn load_interactions(
    path: &Path,
    format: InteractionFormat,
    scale: Option<RatingScale>,
) -> Result<InteractionSet, DatasetError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut records: Vec<(String, String, f64, Option<i64>)> = Vec::new();
    let mut line_no: u64 = 0;
    for line in reader.lines() {
        let line = line.map_err(|e| io_err(path, e))?;
        line_no += 1;
        if line_no == 1 && format == InteractionFormat::CsvHeader {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let record = match format {
            InteractionFormat::CsvHeader => parse_csv_row(path, line_no, &line)?,
            InteractionFormat::Tsv => parse_tsv_row(path, line_no, &line)?,
        };
        if let Some(RatingScale { min, max }) = scale {
            if record.2 < min || record.2 > max {
                return Err(DatasetError::RatingOutOfScale {
                    rating: record.2,
                    min,
                    max,
                    path: path.display().to_string(),
                    line: line_no,
                });
            }
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(DatasetError::EmptyFile {
            path: path.display().to_string(),
        });
    }
    Ok(InteractionSet::from_records(records, scale))
}

fn parse_csv_row(
    path: &Path,
    line_no: u64,
    line: &str,
) -> Result<(String, String, f64, Option<i64>), DatasetError> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() < 3 {
        return Err(row_err(
            path,
            line_no,
            format!("expected user,item,rating[,timestamp], got {} fields", fields.len()),
        ));
    }
    let rating: f64 = fields[2]
        .parse()
        .map_err(|_| row_err(path, line_no, format!("rating {:?} is not a number", fields[2])))?;
    let timestamp = match fields.get(3) {
        None => None,
        Some(raw) if raw.is_empty() => None,
        Some(raw) => Some(raw.parse::<i64>().map_err(|_| {
            row_err(path, line_no, format!("timestamp {raw:?} is not an integer"))
        })?),
    };
    Ok((fields[0].to_string(), fields[1].to_string(), rating, timestamp))
}

fn parse_tsv_row(
    path: &Path,
    line_no: u64,
    line: &str,
) -> Result<(String, String, f64, Option<i64>), DatasetError> {
    let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
    if fields.len() < 2 {
        return Err(row_err(
            path,
            line_no,
            format!("expected user<TAB>item[<TAB>weight], got {} fields", fields.len()),
        ));
    }
    let weight = match fields.get(2) {
        None => 1.0,
        Some(raw) if raw.is_empty() => 1.0,
        Some(raw) => raw
            .parse::<f64>()
            .map_err(|_| row_err(path, line_no, format!("weight {raw:?} is not a number")))?,
    };
    Ok((fields[0].to_string(), fields[1].to_string(), weight, None))
}

/// Loads a metadata TSV into a catalog. Rows with an empty title are
/// rejected; a missing or empty feature column yields an empty feature list.
pub fn load_catalog(path: &Path) -> Result<ItemCatalog, DatasetError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut entries: BTreeMap<String, CatalogEntry> = BTreeMap::new();
    let mut line_no: u64 = 0;
    for line in reader.lines() {
        let line = line.map_err(|e| io_err(path, e))?;
        line_no += 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err(row_err(
                path,
                line_no,
                format!("expected item<TAB>title[<TAB>features], got {} fields", fields.len()),
            ));
        }
        let item = fields[0].trim().to_string();
        let title = fields[1].trim().to_string();
        if title.is_empty() {
            return Err(DatasetError::EmptyTitle {
                item,
                path: path.display().to_string(),
                line: line_no,
            });
        }
        let features: Vec<String> = fields
            .get(2)
            .map(|raw| {
                raw.split('|')
                    .map(str::trim)
                    .filter(|f| !f.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default();
        entries.insert(item, CatalogEntry { title, features });
    }
    Ok(ItemCatalog::new(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file
    }

    #[test]
    fn loads_movielens_style_csv() {
        let file = write_temp(
            "userId,movieId,rating,timestamp\n\
             1,10,4.0,100\n\
             1,11,3.5,200\n\
             2,10,5.0,50\n\
             2,12,2.0,60\n",
        );
        let data = load_interactions(
            file.path(),
            InteractionFormat::CsvHeader,
            Some(RatingScale { min: 0.5, max: 5.0 }),
        )
        .unwrap();
        assert_eq!(data.len(), 4);
        assert_eq!(data.universe().user_count(), 2);
        assert_eq!(data.universe().item_count(), 3);
    }

    #[test]
    fn duplicate_rows_keep_latest_timestamp() {
        let file = write_temp(
            "userId,movieId,rating,timestamp\n\
             u1,i1,1.0,5\n\
             u1,i1,3.0,9\n",
        );
        let data =
            load_interactions(file.path(), InteractionFormat::CsvHeader, None).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data.interactions()[0].rating, 3.0);
    }

    #[test]
    fn malformed_rating_names_the_line() {
        let file = write_temp(
            "userId,movieId,rating,timestamp\n\
             u1,i1,notanumber,0\n",
        );
        let err =
            load_interactions(file.path(), InteractionFormat::CsvHeader, None).unwrap_err();
        match err {
            DatasetError::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        let file = write_temp("userId,movieId,rating,timestamp\n");
        assert!(matches!(
            load_interactions(file.path(), InteractionFormat::CsvHeader, None),
            Err(DatasetError::EmptyFile { .. })
        ));
    }

    #[test]
    fn tsv_without_weight_is_implicit() {
        let file = write_temp("u1\ta1\nu1\ta2\t42\n");
        let data = load_interactions(file.path(), InteractionFormat::Tsv, None).unwrap();
        assert_eq!(data.len(), 2);
        let ratings: Vec<f64> = data.interactions().iter().map(|r| r.rating).collect();
        assert_eq!(ratings, vec![1.0, 42.0]);
    }

    #[test]
    fn rating_outside_scale_is_rejected() {
        let file = write_temp("userId,movieId,rating,timestamp\nu1,i1,9.0,0\n");
        assert!(matches!(
            load_interactions(
                file.path(),
                InteractionFormat::CsvHeader,
                Some(RatingScale { min: 1.0, max: 5.0 })
            ),
            Err(DatasetError::RatingOutOfScale { .. })
        ));
    }

    #[test]
    fn catalog_parses_titles_and_features() {
        let file = write_temp(
            "i1\tThe Matrix (1999)\tAction|Sci-Fi\n\
             i2\tDune\n\
             i3\tBare\t\n",
        );
        let catalog = load_catalog(file.path()).unwrap();
        assert_eq!(catalog.len(), 3);
        assert_eq!(catalog.get("i1").unwrap().features, vec!["Action", "Sci-Fi"]);
        assert!(catalog.get("i2").unwrap().features.is_empty());
        assert!(catalog.get("i3").unwrap().features.is_empty());
    }

    #[test]
    fn catalog_rejects_empty_title() {
        let file = write_temp("i1\t\tAction\n");
        assert!(matches!(
            load_catalog(file.path()),
            Err(DatasetError::EmptyTitle { .. })
        ));
    }
}
