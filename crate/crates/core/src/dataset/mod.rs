//! Training corpora: generation, line-delimited record files, replay checks,
//! and the model weights file format.

mod build;
mod records;
mod weights_file;

pub use build::{
    build_records, generate_instance, replay_verify, trajectory_for, write_dataset, BuildSpec,
    Manifest, ManifestFile, ReplayReport, BA_MAX_ATTACH, DEFAULT_B, DEFAULT_COVER_EPSILON,
    TRAIN_FRACTION,
};
pub use records::{
    read_records, read_records_file, write_records, write_records_file, DatasetRecord, Record,
    SolutionRecord, Split, SCHEMA_VERSION,
};
pub use weights_file::{format_weights, parse_weights, read_weights_file, write_weights_file};
