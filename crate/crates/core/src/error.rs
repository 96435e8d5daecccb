use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed sentence starting at line {line}: {message}")]
    Structure { line: usize, message: String },

    #[error("input size mismatch: {src} source sentences, {trg} target sentences, {align} alignment lines")]
    CountMismatch { src: usize, trg: usize, align: usize },

    #[error("pair {pair_id}: alignment link {src_idx}-{trg_idx} out of range ({src_len} source, {trg_len} target tokens)")]
    AlignmentRange {
        pair_id: usize,
        src_idx: usize,
        trg_idx: usize,
        src_len: usize,
        trg_len: usize,
    },

    #[error("morpheme slot {slot} exhausted after {attempts} rejected candidates")]
    Exhausted { slot: String, attempts: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("line count mismatch: {outputs} system output lines, {expected} test lines")]
    LineCountMismatch { outputs: usize, expected: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
