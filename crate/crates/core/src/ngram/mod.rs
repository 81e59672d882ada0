//! Backoff n-gram language models over graphemes and words.

mod fst;
mod lexicon;
mod model;
mod store;

pub use fst::{backoff_walk, lm_to_fst};
pub use lexicon::{build_lexicon_fst, GraphemeLexicon};
pub use model::{
    graphemes_of, normalize_line, perplexity, train_char_lm, train_word_lm, NGramLm, TokenKind,
    MAX_ORDER, UNKNOWN_WORD, WORD_BOUNDARY,
};
pub use store::{read_lm, write_lm, LmMeta};
