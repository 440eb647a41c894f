pub mod aggression;
pub mod bias;
pub mod gender;
pub mod ingest;
pub mod report;
pub mod synth;
pub mod train;
pub mod trend;
pub mod validate;
