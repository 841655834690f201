//! Dataset ingestion, splitting, and augmentation orchestration with
//! leakage protection: augmentation runs strictly after the train/test
//! split and only on the training side.

pub mod augment;
pub mod error;
pub mod load;
pub mod schema;
pub mod split;

pub use augment::augment_train;
pub use error::{DataError, RowError};
pub use load::load_dataset;
pub use schema::{AugmentMode, ColumnDescriptor, ComponentSpec, DatasetSchema, GlobalSpec};
pub use split::{make_splits, FoldSplit, SplitPlan};
