//! Unsupervised training of a phone-to-grapheme channel and decoding with it.
//!
//! The channel is a lexical table `P(phone | grapheme)` combined with a
//! fixed edit-operation model; [`build_edit_fst`] turns both into one
//! transducer. Baum–Welch training ([`em_step`], [`train`]) fits the table so
//! that deciphered phone sequences score well under a grapheme or word
//! language model, and [`decipher`] finds the best grapheme sequence.

mod alignment;
mod decode;
mod edit_fst;
mod em;
mod fused;
mod io;
mod lexical;
mod lm;
mod schedule;
mod train;

pub use alignment::{AlignmentModel, AFTER_DEL, AFTER_INS, BASE};
pub use decode::{decipher, graphemes_to_text, DecipherResult, DecodeOptions, Decoder};
pub use edit_fst::build_edit_fst;
pub use em::{em_step, expected_counts, EStepRoute, EmOptions, EmStep};
pub use io::{lexical_from_tsv, lexical_meta, lexical_to_tsv, read_lexical, write_lexical, LexicalMeta};
pub use lexical::{init_lexical, prune_lexical, smooth, LexicalModel, DEFAULT_INSERTION_MASS};
pub use lm::{CharLm, LanguageModel, WordLm};
pub use schedule::{LmRef, Stage, TrainingSchedule, WORD_STAGE_BEAM};
pub use train::{train, train_with, IterationRecord, LmSet, Trained};
