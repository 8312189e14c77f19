//! In-memory data model, CSV I/O, normalization, splitting and the synthetic
//! vital-sign generator.

pub mod csv_io;
pub mod frame;
pub mod normalize;
pub mod split;
pub mod synth;

pub use csv_io::{load_csv, load_mask_csv, write_csv, write_mask_csv, CsvOptions};
pub use frame::{default_features, Feature, VitalsFrame};
pub use normalize::{fit_normalizer, NormalizationStats};
pub use split::{split_stays, SplitAssignment, SplitRatios};
pub use synth::generate_synthetic;
