//! Lexicon-based sentiment scoring on [0, 1] with 0.5 neutral.
//!
//! score = 0.5 + 0.5 * (pos - neg) / (pos + neg) over lexicon hits; texts
//! with no hits are neutral. The shipped lexicon is a plain word list, one
//! token per line; custom lists load from files with the same format. This
//! is a deterministic stand-in, not a claim of classifier parity.

use crate::numeric::Scalar;
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

const POSITIVE_WORDS: &str = include_str!("../../assets/positive_words.txt");
const NEGATIVE_WORDS: &str = include_str!("../../assets/negative_words.txt");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {0}: {1}")]
    Io(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

fn parse_word_list(raw: &str) -> BTreeSet<String> {
    raw.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_lowercase).collect()
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            positive: parse_word_list(POSITIVE_WORDS),
            negative: parse_word_list(NEGATIVE_WORDS),
        }
    }
}

impl Lexicon {
    pub fn from_files(positive: &Path, negative: &Path) -> Result<Self, LexiconError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p)
                .map_err(|e| LexiconError::Io(p.display().to_string(), e.to_string()))
        };
        Ok(Lexicon {
            positive: parse_word_list(&read(positive)?),
            negative: parse_word_list(&read(negative)?),
        })
    }

    pub fn len(&self) -> (usize, usize) {
        (self.positive.len(), self.negative.len())
    }

    /// Sentiment of `text` in [0, 1]; 0.5 when no lexicon token occurs.
    pub fn score<F: Scalar>(&self, text: &str) -> F {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for token in text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            let token = token.to_lowercase();
            if self.positive.contains(&token) {
                pos += 1;
            } else if self.negative.contains(&token) {
                neg += 1;
            }
        }
        if pos + neg == 0 {
            return F::from_f64(0.5).expect("0.5 representable");
        }
        let balance = (pos as f64 - neg as f64) / (pos as f64 + neg as f64);
        F::from_f64(0.5 + 0.5 * balance).expect("score representable")
    }
}

/// Score with the default lexicon.
pub fn sentiment<F: Scalar>(text: &str) -> F {
    thread_local! {
        static DEFAULT: Lexicon = Lexicon::default();
    }
    DEFAULT.with(|lex| lex.score(text))
}
