//! Textual entailment recognition over sentence pairs.
//!
//! Sentences are preprocessed into content-word tokens, mapped to vectors
//! through a word-embedding store, and compared through difference-vector and
//! overlap features. Four classical learners and a majority-vote ensemble are
//! trained on those features.
//!
//! ```no_run
//! use entailkit::embedstore::{load_embeddings, EmbeddingFormat};
//! use entailkit::evalharness::{run_experiment_from_path, ExperimentOptions};
//! use entailkit::features::{FeatureSet, Stores};
//! use entailkit::corpus::ColumnMap;
//!
//! let store = load_embeddings("vectors.bin", EmbeddingFormat::Binary, None)?;
//! let report = run_experiment_from_path(
//!     "SICK.txt",
//!     &ColumnMap::default(),
//!     FeatureSet::EmdvThr,
//!     Stores::single(&store),
//!     42,
//!     &ExperimentOptions::default(),
//! )?;
//! println!("{}", report.to_text());
//! # Ok::<(), entailkit::Error>(())
//! ```

pub mod cli;
pub mod corpus;
pub mod embedstore;
pub mod error;
pub mod evalharness;
pub mod features;
pub mod learners;
pub mod semrep;
pub mod textprep;

pub use corpus::{EntailmentLabel, LabeledPair};
pub use embedstore::EmbeddingStore;
pub use error::{Error, Result};
pub use features::{FeatureSet, FeatureVector, Stores};
pub use semrep::{SentenceVector, Strategy};
pub use textprep::{preprocess, PrepConfig, TokenList};
