#![allow(dead_code)]

use beatmine::consensus::{self, ConsensusPattern};
use beatmine::corpus::{DatasetRecord, PseudoEmbedder, SongAnnotation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random pattern with exactly `beats` beats and a tempo in 70..180.
pub fn random_pattern(rng: &mut ChaCha8Rng, beats: usize) -> ConsensusPattern {
    let mut p = ConsensusPattern::empty(rng.gen_range(70..180));
    let mut placed = 0;
    while placed < beats {
        let (r, s) = (rng.gen_range(0..4), rng.gen_range(0..32));
        if p.tracks[r][s] == 0 {
            p.tracks[r][s] = 1;
            placed += 1;
        }
    }
    p
}

/// `n` records with pseudo-embeddings of distinct phrases and random targets.
pub fn toy_records(n: usize, beats: usize, seed: u64) -> Vec<DatasetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let embedder = PseudoEmbedder { seed };
    (0..n)
        .map(|i| {
            let phrase = format!("phrase number {i}");
            DatasetRecord {
                annotation: SongAnnotation {
                    artist: format!("artist {i}"),
                    title: format!("title {i}"),
                    phrases: vec![phrase.clone()],
                    audio_path: None,
                },
                embedding: embedder.embed(&phrase),
                target: consensus::to_vector(&random_pattern(&mut rng, beats)),
            }
        })
        .collect()
}

/// Minimum Hamming distance between two patterns over all role permutations,
/// and the distance under the identity permutation.
pub fn aligned_hamming(a: &ConsensusPattern, b: &ConsensusPattern) -> (usize, usize) {
    let dist = |perm: &[usize; 4]| -> usize {
        (0..4)
            .map(|r| {
                a.tracks[r]
                    .iter()
                    .zip(&b.tracks[perm[r]])
                    .filter(|(x, y)| x != y)
                    .count()
            })
            .sum()
    };
    let mut best = usize::MAX;
    for p in permutations4() {
        best = best.min(dist(&p));
    }
    (best, dist(&[0, 1, 2, 3]))
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    p.iter().for_each(|&i| seen[i] = true);
                    if seen.iter().all(|&s| s) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}
