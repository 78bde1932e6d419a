//! CSV manifests listing songs to ingest and queries to evaluate.

use std::path::{Path, PathBuf};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq)]
pub struct SongEntry {
    pub path: PathBuf,
    pub song_id: String,
    pub title: String,
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryEntry {
    pub path: PathBuf,
    pub target_id: String,
    pub query_id: String,
}

fn read_rows(
    manifest: &Path,
    min_fields: usize,
) -> Result<Vec<(usize, csv::StringRecord)>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(manifest)
        .map_err(|e| Failure::from(e).context(manifest.display()))?;
    let mut rows = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Failure::from(e).context(manifest.display()))?;
        // header is line 1
        let line = i + 2;
        if row.len() < min_fields || row.iter().take(min_fields).any(str::is_empty) {
            return Err(Failure::Data(format!(
                "{} line {line}: expected at least {min_fields} non-empty fields",
                manifest.display()
            )));
        }
        rows.push((line, row));
    }
    Ok(rows)
}

fn resolve(manifest: &Path, path: &str) -> PathBuf {
    let path = Path::new(path);
    match manifest.parent() {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Reads `path,song_id,title[,group]` rows.
pub fn read_songs(manifest: &Path) -> Result<Vec<SongEntry>, Failure> {
    Ok(read_rows(manifest, 2)?
        .into_iter()
        .map(|(_, row)| SongEntry {
            path: resolve(manifest, &row[0]),
            song_id: row[1].to_string(),
            title: row
                .get(2)
                .filter(|t| !t.is_empty())
                .unwrap_or(&row[1])
                .to_string(),
            group: row.get(3).filter(|g| !g.is_empty()).map(str::to_string),
        })
        .collect())
}

/// Reads `path,target_id[,query_id]` rows; the query id defaults to the
/// file stem.
pub fn read_queries(manifest: &Path) -> Result<Vec<QueryEntry>, Failure> {
    Ok(read_rows(manifest, 2)?
        .into_iter()
        .map(|(line, row)| {
            let path = resolve(manifest, &row[0]);
            let query_id = match row.get(2).filter(|q| !q.is_empty()) {
                Some(q) => q.to_string(),
                None => path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| format!("line{line}")),
            };
            QueryEntry {
                path,
                target_id: row[1].to_string(),
                query_id,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn songs_resolve_relative_paths_and_default_titles() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("songs.csv");
        fs::write(
            &path,
            "path,song_id,title,group\na.wav,a,Song A,\n/abs/b.wav, b ,,hymns\n",
        )
        .unwrap();
        let songs = read_songs(&path).unwrap();
        assert_eq!(songs[0].path, dir.path().join("a.wav"));
        assert_eq!(songs[0].title, "Song A");
        assert_eq!(songs[0].group, None);
        assert_eq!(songs[1].path, PathBuf::from("/abs/b.wav"));
        assert_eq!(songs[1].song_id, "b");
        assert_eq!(songs[1].title, "b");
        assert_eq!(songs[1].group.as_deref(), Some("hymns"));
    }

    #[test]
    fn queries_default_to_file_stem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        fs::write(
            &path,
            "path,target_id,query_id\nhum/x1.wav,s1\ny.wav,s2,custom\n",
        )
        .unwrap();
        let q = read_queries(&path).unwrap();
        assert_eq!(q[0].query_id, "x1");
        assert_eq!(q[1].query_id, "custom");
        assert_eq!(q[1].target_id, "s2");
    }

    #[test]
    fn short_rows_are_rejected_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        fs::write(&path, "path,target_id\nok.wav,s1\nbroken.wav\n").unwrap();
        let err = read_queries(&path).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
