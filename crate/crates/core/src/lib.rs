//! Weighted finite-state transducers and unsupervised decipherment of noisy
//! phone sequences into graphemes.
//!
//! The crate is organised bottom-up:
//!
//! - [`fst`]: semirings, transducers, composition, shortest path,
//!   forward–backward, pruning and text I/O.
//! - [`ngram`]: Witten–Bell backoff n-gram models over graphemes or words,
//!   compiled to acceptors, and grapheme lexicons.
//! - [`decipher`]: the lexical and alignment models, the edit transducer,
//!   Baum–Welch training against a staged language-model schedule, and
//!   decoding.
//! - [`synth`]: synthetic text and noisy phone channels for experiments.
//! - [`eval`]: WER/CER and lattice oracle error rates.
//! - [`cli`]: experiment configuration and the commands behind the
//!   `decipher-fst` binary.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod cli;
pub mod decipher;
pub mod error;
pub mod eval;
pub mod fst;
pub mod ngram;
pub mod synth;

pub use error::{Error, Result};
