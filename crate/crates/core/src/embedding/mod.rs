//! CBOW word2vec with negative sampling, one model per time bucket.

mod format;
mod model;
mod train;
mod vocab;

pub use format::{read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use model::EmbeddingModel;
pub use train::{cbow_step, train, train_documents, TrainConfig, TrainReport};
pub use vocab::{subsample_keep_prob, UnigramTable, Vocabulary, UNIGRAM_POWER};

use crate::error::{Error, Result};
use crate::scalar::{dot, norm, Real};

/// Cosine similarity; errors if either vector has zero norm.
pub fn cosine<F: Real>(u: &[F], v: &[F]) -> Result<F> {
    if u.len() != v.len() {
        return Err(Error::Config(format!(
            "cosine of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if !(nu > F::zero()) || !(nv > F::zero()) {
        return Err(Error::ZeroNorm("cosine argument".into()));
    }
    Ok((dot(u, v) / (nu * nv)).max(-F::one()).min(F::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        let v = [1.0, 2.0, 2.0];
        assert!((cosine(&v, &v).unwrap() - 1.0f64).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0f64);
        assert!((cosine(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap() - 8.0f64 / 9.0).abs() < 1e-15);
        assert!(matches!(cosine(&[0.0f64, 0.0], &[1.0, 0.0]), Err(Error::ZeroNorm(_))));
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            pair in (1usize..12).prop_flat_map(|n| (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            )),
            c in 0.01f64..100.0,
        ) {
            let (u, v) = pair;
            prop_assume!(norm(&u) > 1e-6 && norm(&v) > 1e-6);
            let a = cosine(&u, &v).unwrap();
            prop_assert!((a - cosine(&v, &u).unwrap()).abs() < 1e-12);
            let su: Vec<f64> = u.iter().map(|x| x * c).collect();
            prop_assert!((a - cosine(&su, &v).unwrap()).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }
}
