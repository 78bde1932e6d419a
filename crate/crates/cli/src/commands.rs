use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qbsh_core::audio_io::write_wav_f32;
use qbsh_core::corpus::{self, load_store, save_store, MANIFEST_FILE};
use qbsh_core::eval::synth::{query_seed, synth_songs, QueryPerturbation};
use qbsh_core::eval::{run_experiment, Grid, Query};
use qbsh_core::similarity::rank;
use qbsh_core::{DistanceMeasure, FeatureConfig, FeatureKind, FeatureStore, MeasureKind};

use crate::failure::Failure;
use crate::manifest::{self, SongEntry};
use crate::{EvaluateArgs, IngestArgs, InspectArgs, MeasureArgs, QueryArgs, SynthArgs};

type CmdResult = Result<(), Failure>;

fn open_store(dir: &Path) -> Result<FeatureStore, Failure> {
    if !dir.join(MANIFEST_FILE).is_file() {
        return Err(Failure::Data(format!(
            "no feature store at {}",
            dir.display()
        )));
    }
    load_store(dir).map_err(|e| Failure::from(e).context(dir.display()))
}

fn measure(kind: MeasureKind, p: &MeasureArgs) -> Result<DistanceMeasure, Failure> {
    let m = DistanceMeasure {
        kind,
        k: p.k,
        t_norm: p.t_norm,
        band: p.band,
        dtw_normalize: p.dtw_normalize,
    };
    m.validate()?;
    Ok(m)
}

fn stem(path: &Path) -> Result<String, Failure> {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Failure::Usage(format!("cannot derive a song id from {}", path.display())))
}

pub fn ingest(args: IngestArgs) -> CmdResult {
    let dir = &args.store.store;
    let mut store = if dir.join(MANIFEST_FILE).is_file() {
        let store = open_store(dir)?;
        let wanted = args.overrides.apply(store.config);
        if !args.overrides.is_empty() && wanted != store.config {
            return Err(Failure::Usage(format!(
                "{} was built with different extraction settings; use a new store",
                dir.display()
            )));
        }
        store
    } else {
        let config = args.overrides.apply(FeatureConfig::default());
        config.validate()?;
        FeatureStore::new(config)
    };

    let mut entries = match &args.manifest {
        Some(m) => manifest::read_songs(m)?,
        None => Vec::new(),
    };
    for path in &args.files {
        let id = stem(path)?;
        entries.push(SongEntry {
            path: path.clone(),
            title: id.clone(),
            song_id: id,
            group: None,
        });
    }
    if entries.is_empty() {
        return Err(Failure::Usage(
            "nothing to ingest: give WAV files or --manifest".into(),
        ));
    }

    for entry in &entries {
        let mut record =
            corpus::ingest_song(&entry.path, &entry.song_id, &entry.title, &store.config)
                .map_err(|e| Failure::from(e).context(entry.path.display()))?;
        record.group = entry.group.clone();
        let frames = record.features[&FeatureKind::Mfcc].frames();
        store
            .insert(record)
            .map_err(|e| Failure::from(e).context(entry.path.display()))?;
        println!(
            "ingested {} ({}): {frames} frames",
            entry.song_id,
            entry.path.display()
        );
    }
    save_store(&store, dir)?;
    println!("{} songs in {}", store.len(), dir.display());
    Ok(())
}

pub fn query(args: QueryArgs) -> CmdResult {
    let store = open_store(&args.store.store)?;
    if store.is_empty() {
        return Err(Failure::Data(format!(
            "{} holds no songs",
            args.store.store.display()
        )));
    }
    let measure = measure(args.measure, &args.params)?;
    let record = corpus::ingest_song(&args.query, "query", "", &store.config)
        .map_err(|e| Failure::from(e).context(args.query.display()))?;
    let list = rank(
        "query",
        &record.features[&args.feature],
        store.records(),
        &measure,
    )?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "rank,song_id,title,distance")?;
    for (i, entry) in list.entries.iter().take(args.top).enumerate() {
        let title = store.get(&entry.song_id).map_or("", |r| r.title.as_str());
        writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            entry.song_id,
            csv_field(title),
            entry.distance
        )?;
    }
    Ok(())
}

/// Quotes a CSV field when it needs it.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn evaluate(args: EvaluateArgs) -> CmdResult {
    let store = open_store(&args.store.store)?;
    if store.is_empty() {
        return Err(Failure::Data(format!(
            "{} holds no songs",
            args.store.store.display()
        )));
    }
    let measures = args
        .measures
        .iter()
        .map(|&k| measure(k, &args.params))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = Grid {
        kinds: args.features.clone(),
        measures,
        excerpts: args.excerpts.clone(),
        db_sizes: if args.db_sizes.is_empty() {
            vec![store.len()]
        } else {
            args.db_sizes.clone()
        },
        mode: args.mode.into(),
    };
    if let Some(&p) = grid.excerpts.iter().find(|p| !(1..=100).contains(*p)) {
        return Err(Failure::Usage(format!("excerpt {p}% outside 1..=100")));
    }
    if let Some(&n) = grid.db_sizes.iter().find(|&&n| n == 0 || n > store.len()) {
        return Err(Failure::Usage(format!(
            "database size {n} outside 1..={} (the store size)",
            store.len()
        )));
    }

    let queries = match &args.queries {
        Some(path) => {
            let entries = manifest::read_queries(path)?;
            if let Some(e) = entries.iter().find(|e| !store.contains(&e.target_id)) {
                return Err(Failure::Data(format!(
                    "{}: query '{}' targets unknown song '{}'",
                    path.display(),
                    e.query_id,
                    e.target_id
                )));
            }
            entries
                .iter()
                .map(|e| {
                    let clip = qbsh_core::audio_io::read_wav(&e.path)
                        .map_err(|err| Failure::from(err).context(e.path.display()))?;
                    Query::from_clip(&e.query_id, &e.target_id, &clip, &store.config)
                        .map_err(|err| Failure::from(err).context(e.path.display()))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        None => store.records().iter().map(Query::from_record).collect(),
    };
    if queries.is_empty() {
        return Err(Failure::Usage("the query manifest lists no queries".into()));
    }

    let report = run_experiment(&store, &queries, &grid, args.seed)?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            fs::write(path, &csv)?;
            print_summary(&report);
            println!("wrote {} rows to {}", report.cells.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn print_summary(report: &qbsh_core::EvalReport) {
    println!(
        "{:<8}{:<8}{:>8}{:>8}{:>6}{:>8}{:>8}{:>8}{:>8}{:>8}",
        "feature", "measure", "excerpt", "db", "n", "top10", "top20", "top30", "moa", "mrr"
    );
    for c in &report.cells {
        println!(
            "{:<8}{:<8}{:>7}%{:>8}{:>6}{:>8.3}{:>8.3}{:>8.3}{:>8.3}{:>8.3}",
            c.kind.name(),
            c.measure.name(),
            c.excerpt_pct,
            c.db_size,
            c.n_queries,
            c.top10,
            c.top20,
            c.top30,
            c.moa,
            c.mrr
        );
    }
}

pub fn inspect(args: InspectArgs) -> CmdResult {
    let store = open_store(&args.store.store)?;
    let c = &store.config;
    println!("format_version: {}", store.format_version);
    println!(
        "config: frame_len={} hop={} pre_emphasis={} sample_rate_hz={} fft_size={} filters={} ceps={} \
         extended_mfcc={} lpc_order={} lpc_dim={} lpcc_count={} lpcc_dim={}",
        c.frame.frame_len,
        c.frame.hop,
        c.frame.pre_emphasis_alpha,
        c.frame.sample_rate_hz,
        c.fft_size,
        c.num_filters,
        c.num_ceps,
        c.mfcc_extended,
        c.lpc_order,
        c.lpc_dim,
        c.lpcc_count,
        c.lpcc_dim
    );
    println!("songs: {}", store.len());
    if !store.is_empty() {
        let kinds = FeatureKind::ALL.map(|k| k.name().to_string()).join(",");
        println!("song_id,title,{kinds}");
        for r in store.records() {
            let frames: Vec<String> = FeatureKind::ALL
                .iter()
                .map(|k| r.features.get(k).map_or(0, |s| s.frames()).to_string())
                .collect();
            println!("{},{},{}", r.song_id, csv_field(&r.title), frames.join(","));
        }
    }
    Ok(())
}

pub fn synth_corpus(args: SynthArgs) -> CmdResult {
    if args.songs == 0 || args.duration.is_nan() || args.duration <= 0.0 || args.rate < 8000 {
        return Err(Failure::Usage(
            "need at least one song, a positive duration and a rate of at least 8000 Hz".into(),
        ));
    }
    let songs_dir = args.out.join("songs");
    let queries_dir = args.out.join("queries");
    fs::create_dir_all(&songs_dir)?;
    fs::create_dir_all(&queries_dir)?;
    let perturbation = QueryPerturbation {
        max_tempo_deviation: args.tempo,
        snr_db: Some(args.snr),
    };

    let mut songs_csv = String::from("path,song_id,title\n");
    let mut queries_csv = String::from("path,target_id,query_id\n");
    for (i, song) in synth_songs(args.songs, args.duration, args.seed)
        .iter()
        .enumerate()
    {
        let clip = if args.stereo {
            song.render_stereo_mix(args.rate)?
        } else {
            song.render(args.rate)?
        };
        let song_file = PathBuf::from("songs").join(format!("{}.wav", song.song_id));
        write_wav_f32(args.out.join(&song_file), &clip)?;
        songs_csv.push_str(&format!(
            "{},{},{}\n",
            song_file.display(),
            song.song_id,
            song.title
        ));

        let query_id = format!("hum{i:04}");
        let hum = song.render_query(args.rate, &perturbation, query_seed(args.seed, i))?;
        let query_file = PathBuf::from("queries").join(format!("{query_id}.wav"));
        write_wav_f32(args.out.join(&query_file), &hum)?;
        queries_csv.push_str(&format!(
            "{},{},{query_id}\n",
            query_file.display(),
            song.song_id
        ));
    }
    fs::write(args.out.join("songs.csv"), songs_csv)?;
    fs::write(args.out.join("queries.csv"), queries_csv)?;
    println!(
        "wrote {} songs and queries to {}",
        args.songs,
        args.out.display()
    );
    Ok(())
}
