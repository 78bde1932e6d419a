//! Song ingestion and the on-disk feature store.
//!
//! # Store layout
//!
//! ```text
//! <store>/manifest.json          human-readable index (see below)
//! <store>/features/00000_mfcc.f32
//! <store>/features/00000_lpc.f32
//! ...
//! ```
//!
//! Matrix files hold little-endian IEEE `f32` values, row-major (one frame after
//! another). The manifest fields are:
//!
//! - `format_version`: integer, currently [`FORMAT_VERSION`]
//! - `config`: the [`FeatureConfig`] every matrix was extracted with
//! - `songs[]`: `song_id`, `title`, optional `group`, `source_hash` (16 hex
//!   digits, FNV-1a of the ingested WAV bytes) and `features[]` with `kind`,
//!   `file` (relative path), `frames`, `dim`, `byte_len` and `content_hash`
//!   (FNV-1a of the matrix file, 16 hex digits).

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio_io::{self, AudioClip};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureExtractor, FeatureKind, FeatureSequence};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
const FEATURE_DIR: &str = "features";

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// One database song with its extracted features.
#[derive(Debug, Clone, PartialEq)]
pub struct SongRecord {
    pub song_id: String,
    pub title: String,
    /// Recordings of the same song share a group; `None` means the song is its
    /// own group. Used by kNN voting.
    pub group: Option<String>,
    pub source_hash: u64,
    pub features: BTreeMap<FeatureKind, FeatureSequence>,
}

impl SongRecord {
    pub fn group_key(&self) -> &str {
        self.group.as_deref().unwrap_or(&self.song_id)
    }
}

/// Runs the full pipeline on an in-memory clip: center extraction (stereo
/// only), downmix, resampling to 8 kHz, then all three feature kinds.
pub fn ingest_clip(
    clip: &AudioClip,
    song_id: &str,
    title: &str,
    source_hash: u64,
    config: &FeatureConfig,
) -> Result<SongRecord> {
    if song_id.is_empty() {
        return Err(Error::Argument("song id must not be empty".into()));
    }
    if config.frame.sample_rate_hz != audio_io::WORKING_RATE_HZ {
        return Err(Error::Configuration(format!(
            "ingestion resamples to {} Hz but features are configured for {} Hz",
            audio_io::WORKING_RATE_HZ,
            config.frame.sample_rate_hz
        )));
    }
    let prepared = audio_io::preprocess(clip)?;
    let features = FeatureExtractor::new(*config)?.extract_all(&prepared)?;
    Ok(SongRecord {
        song_id: song_id.to_string(),
        title: title.to_string(),
        group: None,
        source_hash,
        features,
    })
}

/// Reads a WAV file and ingests it.
pub fn ingest_song(
    path: impl AsRef<Path>,
    song_id: &str,
    title: &str,
    config: &FeatureConfig,
) -> Result<SongRecord> {
    let bytes = fs::read(path.as_ref())?;
    let clip = audio_io::read_wav_bytes(&bytes)?;
    ingest_clip(&clip, song_id, title, fnv1a(&bytes), config)
}

/// Songs plus the single extraction configuration they all share.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    pub config: FeatureConfig,
    pub format_version: u32,
    records: Vec<SongRecord>,
}

impl FeatureStore {
    pub fn new(config: FeatureConfig) -> Self {
        Self {
            config,
            format_version: FORMAT_VERSION,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[SongRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, song_id: &str) -> Option<&SongRecord> {
        self.records.iter().find(|r| r.song_id == song_id)
    }

    pub fn contains(&self, song_id: &str) -> bool {
        self.get(song_id).is_some()
    }

    /// Adds a record, refusing duplicate ids and foreign configurations.
    pub fn insert(&mut self, record: SongRecord) -> Result<()> {
        if record.song_id.is_empty() {
            return Err(Error::Argument("song id must not be empty".into()));
        }
        if self.contains(&record.song_id) {
            return Err(Error::Conflict(format!(
                "song '{}' is already in the store",
                record.song_id
            )));
        }
        if let Some(seq) = record
            .features
            .values()
            .find(|s| *s.config() != self.config)
        {
            return Err(Error::Configuration(format!(
                "song '{}' has {} features extracted with a different configuration than the store",
                record.song_id,
                seq.kind()
            )));
        }
        self.records.push(record);
        Ok(())
    }

    /// Reads, processes and inserts one WAV file.
    pub fn ingest_song(
        &mut self,
        path: impl AsRef<Path>,
        song_id: &str,
        title: &str,
    ) -> Result<()> {
        if self.contains(song_id) {
            return Err(Error::Conflict(format!(
                "song '{song_id}' is already in the store"
            )));
        }
        let record = ingest_song(path, song_id, title, &self.config)?;
        self.insert(record)
    }

    /// Ingests several files concurrently; records are inserted in input order.
    /// Nothing is inserted unless every file succeeds. On failure returns the
    /// offending input index with its error.
    pub fn ingest_many(
        &mut self,
        items: &[(PathBuf, String, String)],
    ) -> std::result::Result<(), (usize, Error)> {
        let mut seen: HashSet<&str> = HashSet::new();
        for (i, (_, id, _)) in items.iter().enumerate() {
            if self.contains(id) || !seen.insert(id) {
                return Err((
                    i,
                    Error::Conflict(format!("song '{id}' is already in the store")),
                ));
            }
        }
        let config = self.config;
        let records: Vec<Result<SongRecord>> = items
            .par_iter()
            .map(|(path, id, title)| ingest_song(path, id, title, &config))
            .collect();
        let mut staged = Vec::with_capacity(records.len());
        for (i, r) in records.into_iter().enumerate() {
            staged.push(r.map_err(|e| (i, e))?);
        }
        for (i, record) in staged.into_iter().enumerate() {
            self.insert(record).map_err(|e| (i, e))?;
        }
        Ok(())
    }

    /// Song ids in ascending order.
    pub fn sorted_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.records.iter().map(|r| r.song_id.as_str()).collect();
        ids.sort_unstable();
        ids
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    config: FeatureConfig,
    songs: Vec<SongEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SongEntry {
    song_id: String,
    title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    source_hash: String,
    features: Vec<MatrixEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixEntry {
    kind: FeatureKind,
    file: String,
    frames: usize,
    dim: usize,
    byte_len: usize,
    content_hash: String,
}

fn hex64(v: u64) -> String {
    format!("{v:016x}")
}

fn parse_hex64(s: &str, song: &str) -> Result<u64> {
    u64::from_str_radix(s, 16).map_err(|_| Error::Integrity {
        song: song.to_string(),
        detail: format!("'{s}' is not a 64-bit hex hash"),
    })
}

fn encode_matrix(seq: &FeatureSequence) -> Vec<u8> {
    seq.data().iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn write_store_files(store: &FeatureStore, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join(FEATURE_DIR))?;
    let mut songs = Vec::with_capacity(store.len());
    for (i, rec) in store.records.iter().enumerate() {
        let mut features = Vec::new();
        for (kind, seq) in &rec.features {
            let file = format!(
                "{FEATURE_DIR}/{i:05}_{}.f32",
                kind.name().to_ascii_lowercase()
            );
            let bytes = encode_matrix(seq);
            fs::write(dir.join(&file), &bytes)?;
            features.push(MatrixEntry {
                kind: *kind,
                file,
                frames: seq.frames(),
                dim: seq.dim(),
                byte_len: bytes.len(),
                content_hash: hex64(fnv1a(&bytes)),
            });
        }
        songs.push(SongEntry {
            song_id: rec.song_id.clone(),
            title: rec.title.clone(),
            group: rec.group.clone(),
            source_hash: hex64(rec.source_hash),
            features,
        });
    }
    let manifest = Manifest {
        format_version: store.format_version,
        config: store.config,
        songs,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

fn sibling(dir: &Path, tag: &str) -> PathBuf {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "store".into());
    dir.with_file_name(format!(".{name}.{tag}-{}", std::process::id()))
}

/// Writes the store to `dir`, replacing any previous contents atomically: the
/// new store is built in a sibling temporary directory and renamed into place.
pub fn save_store(store: &FeatureStore, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    if let Some(parent) = dir.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let staging = sibling(dir, "tmp");
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    if let Err(e) = write_store_files(store, &staging) {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    if dir.exists() {
        let old = sibling(dir, "old");
        if old.exists() {
            fs::remove_dir_all(&old)?;
        }
        fs::rename(dir, &old)?;
        if let Err(e) = fs::rename(&staging, dir) {
            fs::rename(&old, dir)?;
            return Err(e.into());
        }
        fs::remove_dir_all(&old)?;
    } else {
        fs::rename(&staging, dir)?;
    }
    Ok(())
}

/// Loads a store written by [`save_store`], verifying every matrix file
/// against the manifest.
pub fn load_store(dir: impl AsRef<Path>) -> Result<FeatureStore> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let raw: serde_json::Value = serde_json::from_str(&text)?;
    let found =
        raw.get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Data("manifest has no format_version".into()))? as u32;
    if found != FORMAT_VERSION {
        return Err(Error::Migration {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let manifest: Manifest = serde_json::from_value(raw)?;
    manifest.config.validate()?;

    let mut store = FeatureStore::new(manifest.config);
    for entry in manifest.songs {
        let integrity = |detail: String| Error::Integrity {
            song: entry.song_id.clone(),
            detail,
        };
        let mut features = BTreeMap::new();
        for m in &entry.features {
            let expected_len = m.frames * m.dim * 4;
            if m.byte_len != expected_len {
                return Err(integrity(format!(
                    "{} manifest claims {} bytes for a {}x{} matrix",
                    m.kind, m.byte_len, m.frames, m.dim
                )));
            }
            let bytes = fs::read(dir.join(&m.file))
                .map_err(|e| integrity(format!("cannot read {}: {e}", m.file)))?;
            if bytes.len() != m.byte_len {
                return Err(integrity(format!(
                    "{} is {} bytes, manifest says {}",
                    m.file,
                    bytes.len(),
                    m.byte_len
                )));
            }
            if fnv1a(&bytes) != parse_hex64(&m.content_hash, &entry.song_id)? {
                return Err(integrity(format!(
                    "{} does not match its content hash",
                    m.file
                )));
            }
            let data = bytes
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            let seq = FeatureSequence::new(m.kind, m.dim, data, manifest.config)
                .map_err(|e| integrity(format!("{}: {e}", m.file)))?;
            if features.insert(m.kind, seq).is_some() {
                return Err(integrity(format!("{} listed twice", m.kind)));
            }
        }
        let source_hash = parse_hex64(&entry.source_hash, &entry.song_id)?;
        store.insert(SongRecord {
            song_id: entry.song_id.clone(),
            title: entry.title,
            group: entry.group,
            source_hash,
            features,
        })?;
    }
    Ok(store)
}
