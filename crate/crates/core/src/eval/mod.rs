//! Embedding backends, cosine classification, and accuracy reports.

pub mod backend;
pub mod embedding;
pub mod harness;
pub mod mock_server;
pub mod protocol;
pub mod report;

pub use backend::{BackendError, BackendSpec, EmbeddingBackend, ImageInput, MockBackend, MockMode, StdioBackend};
pub use embedding::{classify, EmbeddingVector, Scores};
pub use harness::{evaluate, ClassificationResult, EvalError, EvalOptions, Evaluation};
pub use protocol::{AdaptConfig, BackendInfo, Capabilities};
pub use report::{compare_reports, Comparison, EvalReport};
