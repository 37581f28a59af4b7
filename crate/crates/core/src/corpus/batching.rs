use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::document::Document;

/// Index batches from per-document lengths: a stable sort by length is cut
/// into chunks of `batch_size`, and the chunk order is shuffled by `seed`.
pub fn length_batches(lengths: &[usize], batch_size: usize, seed: u64) -> Vec<Vec<usize>> {
    let size = batch_size.max(1);
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| lengths[i]);
    let mut chunks: Vec<Vec<usize>> = order.chunks(size).map(<[usize]>::to_vec).collect();
    chunks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    chunks
}

/// Batches of document indices, homogeneous in sentence count.
pub fn batches(docs: &[Document], batch_size: usize, seed: u64) -> Vec<Vec<usize>> {
    let lengths: Vec<usize> = docs.iter().map(|d| d.sentences.len()).collect();
    length_batches(&lengths, batch_size, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_chunk_when_batch_exceeds_corpus() {
        let b = length_batches(&[3; 10], 64, 1);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].len(), 10);
    }

    #[test]
    fn chunks_group_by_length() {
        let lengths = [1, 9, 2, 8];
        let mut b: Vec<Vec<usize>> = length_batches(&lengths, 2, 5)
            .into_iter()
            .map(|c| {
                let mut l: Vec<usize> = c.iter().map(|&i| lengths[i]).collect();
                l.sort();
                l
            })
            .collect();
        b.sort();
        assert_eq!(b, vec![vec![1, 2], vec![8, 9]]);
    }

    proptest! {
        #[test]
        fn batches_partition_the_input(lengths in proptest::collection::vec(1usize..12, 0..80), size in 1usize..20, seed: u64) {
            let b = length_batches(&lengths, size, seed);
            let mut all: Vec<usize> = b.iter().flatten().copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..lengths.len()).collect::<Vec<_>>());
            prop_assert!(b.iter().all(|c| !c.is_empty() && c.len() <= size));
            prop_assert_eq!(&b, &length_batches(&lengths, size, seed));
        }
    }
}
