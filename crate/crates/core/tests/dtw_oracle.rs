use qbsh_core::similarity::{dtw, dtw_banded};
use qbsh_core::{FeatureConfig, FeatureKind, FeatureSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seq(rows: &[Vec<f64>]) -> FeatureSequence {
    FeatureSequence::from_rows(FeatureKind::Mfcc, rows, FeatureConfig::default()).unwrap()
}

/// Between 1 and `max_len` random rows.
fn random_rows(rng: &mut ChaCha8Rng, max_len: usize, dim: usize) -> Vec<Vec<f64>> {
    let len = rng.random_range(1..=max_len);
    (0..len)
        .map(|_| {
            (0..dim)
                .map(|_| rng.random_range(-2.0f32..2.0) as f64)
                .collect()
        })
        .collect()
}

fn cost(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Minimum over every monotone warping path from (0,0) to (n-1,m-1).
fn brute_force(q: &[Vec<f64>], c: &[Vec<f64>], i: usize, j: usize, acc: f64, best: &mut f64) {
    let acc = acc + cost(&q[i], &c[j]);
    if i == q.len() - 1 && j == c.len() - 1 {
        *best = best.min(acc);
        return;
    }
    if i + 1 < q.len() {
        brute_force(q, c, i + 1, j, acc, best);
    }
    if j + 1 < c.len() {
        brute_force(q, c, i, j + 1, acc, best);
    }
    if i + 1 < q.len() && j + 1 < c.len() {
        brute_force(q, c, i + 1, j + 1, acc, best);
    }
}

fn path_minimum(q: &[Vec<f64>], c: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    brute_force(q, c, 0, 0, 0.0, &mut best);
    best
}

#[test]
fn dtw_equals_exhaustive_path_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..200 {
        let dim = rng.random_range(1..4);
        let q = random_rows(&mut rng, 6, dim);
        let c = random_rows(&mut rng, 6, dim);
        let got = dtw(&seq(&q), &seq(&c)).unwrap();
        let want = path_minimum(&q, &c);
        assert!(
            (got - want).abs() <= 1e-12 * want.max(1.0),
            "{got} vs {want}"
        );
    }
}

#[test]
fn dtw_is_symmetric_and_zero_on_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..50 {
        let a = seq(&random_rows(&mut rng, 40, 12));
        let b = seq(&random_rows(&mut rng, 40, 12));
        assert_eq!(dtw(&a, &a).unwrap(), 0.0);
        let ab = dtw(&a, &b).unwrap();
        let ba = dtw(&b, &a).unwrap();
        assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
        assert!(ab >= 0.0);
    }
}

#[test]
fn band_covering_everything_is_unconstrained() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..50 {
        let a = seq(&random_rows(&mut rng, 30, 4));
        let b = seq(&random_rows(&mut rng, 30, 4));
        let wide = a.frames().max(b.frames());
        assert_eq!(
            dtw_banded(&a, &b, Some(wide)).unwrap(),
            dtw(&a, &b).unwrap()
        );
        let tight = a.frames().abs_diff(b.frames()).max(1);
        assert!(dtw_banded(&a, &b, Some(tight)).unwrap() >= dtw(&a, &b).unwrap());
    }
}

#[test]
fn band_narrower_than_length_gap_is_rejected() {
    let a = seq(&vec![vec![0.0]; 10]);
    let b = seq(&vec![vec![0.0]; 4]);
    assert!(dtw_banded(&a, &b, Some(5)).is_err());
    assert!(dtw_banded(&a, &b, Some(6)).is_ok());
}
