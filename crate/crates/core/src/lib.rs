pub mod axiom;
pub mod embedding;
pub mod engine;
pub mod evaluation;
pub(crate) mod format;
pub mod interference;
pub mod scenario;
pub mod synthesis;
