//! Measures how strongly trait words associate with male versus female
//! words in embeddings trained per time bucket of a document corpus, with
//! resampling, trend models, validation correlations and ancillary counts.

pub mod aggression;
pub mod artistgender;
pub mod bias;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod lexicon;
pub mod linalg;
pub mod resampling;
pub mod scalar;
pub mod stats;
pub mod synth;
pub mod trends;
pub mod validation;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Real;

pub type EmbeddingModel32 = embedding::EmbeddingModel<f32>;
pub type EmbeddingModel64 = embedding::EmbeddingModel<f64>;
pub type BiasSeries32 = bias::BiasSeries<f32>;
pub type BiasSeries64 = bias::BiasSeries<f64>;

pub type TrendFit32 = trends::TrendFit<f32>;
pub type TrendFit64 = trends::TrendFit<f64>;
