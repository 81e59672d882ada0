//! Synthetic decipherment data: generated text pronounced through a
//! pronunciation table and corrupted by a noisy phone channel.

mod channel;
mod table;
mod task;
mod text;
mod words;

pub use channel::{gen_cipher, select_shortest, ChannelNoise, Cipher};
pub use table::{PronunciationTable, SILENCE_PHONE};
pub use task::{build_task, build_task_from_text, SyntheticTask, TableKind, TaskConfig};
pub use text::{word_list, TextGenerator};
