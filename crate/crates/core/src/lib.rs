pub mod eval;
pub mod import;
pub mod manifest;
pub mod prompt;
pub mod scene;
pub mod taxonomy;
