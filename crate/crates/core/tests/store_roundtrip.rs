use std::collections::BTreeMap;
use std::fs;

use proptest::prelude::*;
use qbsh_core::corpus::{load_store, save_store};
use qbsh_core::{Error, FeatureConfig, FeatureKind, FeatureSequence, FeatureStore, SongRecord};

fn record(id: String, title: String, frames: usize, values: &[f32], hash: u64) -> SongRecord {
    let config = FeatureConfig::default();
    let features = FeatureKind::ALL
        .iter()
        .map(|&kind| {
            let data: Vec<f32> = (0..frames * 12)
                .map(|i| values[i % values.len()] * (kind as u8 as f32 + 1.0))
                .collect();
            (kind, FeatureSequence::new(kind, 12, data, config).unwrap())
        })
        .collect::<BTreeMap<_, _>>();
    SongRecord {
        song_id: id,
        title,
        group: None,
        source_hash: hash,
        features,
    }
}

fn arb_store() -> impl Strategy<Value = FeatureStore> {
    proptest::collection::btree_map(
        "[a-z0-9_-]{1,12}",
        (
            ".{0,20}",
            1usize..20,
            proptest::collection::vec(-1e6f32..1e6, 1..40),
            any::<u64>(),
        ),
        0..6,
    )
    .prop_map(|songs| {
        let mut store = FeatureStore::new(FeatureConfig::default());
        for (id, (title, frames, values, hash)) in songs {
            store
                .insert(record(id, title, frames, &values, hash))
                .unwrap();
        }
        store
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn save_then_load_is_exact(store in arb_store()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store");
        save_store(&store, &path).unwrap();
        let back = load_store(&path).unwrap();
        prop_assert_eq!(&back, &store);
        for (a, b) in back.records().iter().zip(store.records()) {
            for (kind, seq) in &a.features {
                let bits_a: Vec<u32> = seq.data().iter().map(|v| v.to_bits()).collect();
                let bits_b: Vec<u32> = b.features[kind].data().iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(bits_a, bits_b);
            }
        }
    }
}

#[test]
fn truncated_matrix_is_reported_with_song() {
    let mut store = FeatureStore::new(FeatureConfig::default());
    store
        .insert(record("alpha".into(), "A".into(), 5, &[0.5, -0.25], 1))
        .unwrap();
    store
        .insert(record("beta".into(), "B".into(), 7, &[1.5], 2))
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store");
    save_store(&store, &path).unwrap();

    let victim = fs::read_dir(path.join("features"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().contains("00001"))
        .min()
        .unwrap();
    let bytes = fs::read(&victim).unwrap();
    fs::write(&victim, &bytes[..bytes.len() - 4]).unwrap();
    match load_store(&path) {
        Err(Error::Integrity { song, .. }) => assert_eq!(song, "beta"),
        other => panic!("expected an integrity error, got {other:?}"),
    }
}

#[test]
fn saving_twice_gives_identical_bytes() {
    let mut store = FeatureStore::new(FeatureConfig::default());
    store
        .insert(record("x".into(), "X".into(), 3, &[0.1, 0.2, 0.3], 9))
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    save_store(&store, &a).unwrap();
    save_store(&store, &b).unwrap();
    assert_eq!(
        fs::read(a.join("manifest.json")).unwrap(),
        fs::read(b.join("manifest.json")).unwrap()
    );
    for entry in fs::read_dir(a.join("features")).unwrap() {
        let entry = entry.unwrap();
        assert_eq!(
            fs::read(entry.path()).unwrap(),
            fs::read(b.join("features").join(entry.file_name())).unwrap()
        );
    }
}
