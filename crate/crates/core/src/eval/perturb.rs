//! Temporal perturbations of embedding sequences.

use ndarray::{concatenate, s, Array1, Axis};
use rand::Rng;

use crate::embedseq::EmbeddingSequence;
use crate::error::{Error, Result};
use crate::seed::{self, tag};

#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    Reverse,
    /// Walks the sequence once, swapping each disjoint adjacent pair with
    /// probability ½.
    ShuffleConsecutive { seed: u64 },
    /// Splices `vector` in before frame `position` (`position == T` appends).
    InsertVector { position: usize, vector: Vec<f32> },
}

pub fn perturb_sequence(seq: &EmbeddingSequence, kind: &Perturbation) -> Result<EmbeddingSequence> {
    let frames = seq.frames();
    let out = match kind {
        Perturbation::Reverse => frames.slice(s![..;-1, ..]).to_owned(),
        Perturbation::ShuffleConsecutive { seed } => {
            let mut rng = seed::rng(*seed, &[tag::SHUFFLE]);
            let mut order: Vec<usize> = (0..seq.num_frames()).collect();
            let mut t = 0;
            while t + 1 < order.len() {
                if rng.random_bool(0.5) {
                    order.swap(t, t + 1);
                    t += 2;
                } else {
                    t += 1;
                }
            }
            frames.select(Axis(0), &order)
        }
        Perturbation::InsertVector { position, vector } => {
            if vector.len() != seq.dim() {
                return Err(Error::DimensionMismatch {
                    expected: seq.dim(),
                    found: vector.len(),
                });
            }
            if *position > seq.num_frames() {
                return Err(Error::InvalidArgument(format!(
                    "insert position {position} beyond {} frames",
                    seq.num_frames()
                )));
            }
            let row = Array1::from(vector.clone()).insert_axis(Axis(0));
            concatenate(
                Axis(0),
                &[frames.slice(s![..*position, ..]), row.view(), frames.slice(s![*position.., ..])],
            )
            .expect("shapes checked")
        }
    };
    Ok(EmbeddingSequence::new(seq.video_id(), out, seq.fps())?
        .with_label(seq.label())
        .with_generator(seq.generator().map(str::to_owned)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn seq(t: usize) -> EmbeddingSequence {
        EmbeddingSequence::new("v", Array2::from_shape_fn((t, 3), |(i, j)| (i * 3 + j) as f32), 8.0).unwrap()
    }

    #[test]
    fn reverse_is_involution() {
        let s = seq(5);
        let r = perturb_sequence(&s, &Perturbation::Reverse).unwrap();
        assert_eq!(r.frame(0), s.frame(4));
        assert_eq!(perturb_sequence(&r, &Perturbation::Reverse).unwrap(), s);
    }

    #[test]
    fn insert_positions() {
        let s = seq(4);
        let v = vec![9.0, 9.0, 9.0];
        let end = perturb_sequence(&s, &Perturbation::InsertVector { position: 4, vector: v.clone() }).unwrap();
        assert_eq!(end.num_frames(), 5);
        assert_eq!(end.frame(4).to_vec(), v);
        let mid = perturb_sequence(&s, &Perturbation::InsertVector { position: 2, vector: v.clone() }).unwrap();
        assert_eq!(mid.frame(2).to_vec(), v);
        assert_eq!(mid.frame(3), s.frame(2));
        assert!(perturb_sequence(&s, &Perturbation::InsertVector { position: 5, vector: v }).is_err());
        assert!(matches!(
            perturb_sequence(&s, &Perturbation::InsertVector { position: 0, vector: vec![1.0] }),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn shuffle_is_seeded_adjacent_swaps() {
        let s = seq(16);
        let a = perturb_sequence(&s, &Perturbation::ShuffleConsecutive { seed: 3 }).unwrap();
        assert_eq!(a, perturb_sequence(&s, &Perturbation::ShuffleConsecutive { seed: 3 }).unwrap());
        let mut moved = 0;
        for t in 0..16 {
            let orig = (a.frame(t)[0] / 3.0) as usize;
            assert!(orig.abs_diff(t) <= 1);
            moved += usize::from(orig != t);
        }
        assert!(moved > 0);
        let mut sorted: Vec<usize> = (0..16).map(|t| (a.frame(t)[0] / 3.0) as usize).collect();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..16).collect::<Vec<_>>());
    }
}
